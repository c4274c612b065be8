//! Conformal maps of the disk onto horn domains `{0 < arg z < theta(|z|)}`.
//!
//! A map is represented through the strip `0 < Im T < 1`: an analytic model
//! `F` is fitted so that `Im F = 0` on the segment `[0, 1]` and `Im F = 1` on
//! the upper profile curve, and the disk map is
//! `G(w) = F^{-1}((2/pi) artanh(w) + i/2)`, with `-1 -> 0` and `1 -> 1`.
//! The image is the region cut out by the level curve `Im F = 1`, so `G` is
//! exactly conformal and only its boundary is approximate.

mod model;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{artanh_on_circle, bisect_last_true, cis, Knots, UnitTable, C64};

pub use model::{BoundaryModel, DiskModel, HornModel, ModelRegistry};

/// Default shrink factor applied to profiles before fitting.
pub const DEFAULT_SHRINK: f64 = 0.2;

/// Slack allowed by the containment audit.
pub const CONTAINMENT_TOL: f64 = 1e-9;

/// Fit nodes cover `r` in `[1e-6, 1 - 1e-6]` (logit range).
const NODE_LOGIT: f64 = 13.815_510_557_964_274;

/// Logit range of the spine used by inversion.
const SPINE_LOGIT: f64 = 600.0;

/// Polynomial degrees tried by the horn fit, in no particular order.
const HORN_DEGREES: [usize; 6] = [6, 10, 14, 18, 24, 32];

/// Angles this close to an end of the spine preimage are snapped to it.
const ENDPOINT_SNAP: f64 = 4.0 * f64::EPSILON * PI;

/// Imaginary-part increment per continuation step off the spine.
const CONTINUATION_STEP: f64 = 0.1;

/// Angular profile of a horn: continuous on `[0, 1]`, zero at both ends,
/// positive inside, at most `pi/4`.
#[derive(Clone)]
pub struct CuspProfile {
    theta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    samples: Vec<(f64, f64)>,
}

impl fmt::Debug for CuspProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CuspProfile")
            .field("samples", &self.samples.len())
            .field("max", &self.max_theta())
            .finish()
    }
}

impl CuspProfile {
    pub fn new(theta: impl Fn(f64) -> f64 + Send + Sync + 'static, samples: usize) -> Result<Self> {
        let n = samples.max(3);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let r = i as f64 / (n - 1) as f64;
                (r, theta(r))
            })
            .collect();
        Self::validate(&pts)?;
        Ok(CuspProfile {
            theta: Arc::new(theta),
            samples: pts,
        })
    }

    /// Piecewise-linear profile through the table values.
    pub fn from_table(table: &UnitTable) -> Result<Self> {
        let t = table.clone();
        let samples: Vec<(f64, f64)> = table.nodes().zip(table.values.iter().copied()).collect();
        Self::validate(&samples)?;
        Ok(CuspProfile {
            theta: Arc::new(move |r| t.eval(r)),
            samples,
        })
    }

    fn validate(pts: &[(f64, f64)]) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("cusp profile: {msg}")));
        if pts.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (first, last) = (pts[0].1, pts[pts.len() - 1].1);
        if first.abs() > 1e-15 || last.abs() > 1e-15 {
            return bad(format!("theta(0) = {first}, theta(1) = {last}; both must vanish"));
        }
        if let Some(p) = pts.iter().find(|p| p.1 < 0.0 || p.1 > FRAC_PI_4 + 1e-15) {
            return bad(format!("theta({}) = {} outside [0, pi/4]", p.0, p.1));
        }
        if let Some(p) = pts[1..pts.len() - 1].iter().find(|p| p.1 <= 0.0) {
            return bad(format!("theta({}) = {} not positive", p.0, p.1));
        }
        Ok(())
    }

    pub fn theta(&self, r: f64) -> f64 {
        if !(r > 0.0 && r < 1.0) {
            return 0.0;
        }
        (self.theta)(r)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn max_theta(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> CuspProfile {
        let inner = self.theta.clone();
        CuspProfile {
            theta: Arc::new(move |r| factor * inner(r)),
            samples: self.samples.iter().map(|&(r, t)| (r, factor * t)).collect(),
        }
    }
}

impl Serialize for CuspProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.samples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CuspProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let samples = Vec::<(f64, f64)>::deserialize(d)?;
        CuspProfile::validate(&samples).map_err(serde::de::Error::custom)?;
        let knots = Knots::new(samples.clone()).map_err(serde::de::Error::custom)?;
        Ok(CuspProfile {
            theta: Arc::new(move |r| knots.eval(r)),
            samples,
        })
    }
}

/// `F = sum c_k phi_k + i offset` for a boundary model.
#[derive(Clone, Debug)]
struct StripMap {
    model: Arc<dyn BoundaryModel>,
    degree: usize,
    coeffs: Vec<f64>,
    offset: f64,
}

impl StripMap {
    fn eval(&self, z: C64, om: C64) -> (C64, C64) {
        let n = self.coeffs.len();
        let mut val = vec![C64::default(); n];
        let mut der = vec![C64::default(); n];
        self.model.basis(z, om, self.degree, &mut val, &mut der);
        let mut f = C64::new(0.0, self.offset);
        let mut df = C64::new(0.0, 0.0);
        for k in 0..n {
            f += val[k] * self.coeffs[k];
            df += der[k] * self.coeffs[k];
        }
        (f, df)
    }

    fn spine_point(&self, y: f64) -> (C64, C64) {
        let lo = self.model.spine_lo();
        let span = 1.0 - lo;
        let x = lo + span / (1.0 + (-y).exp());
        let om = span / (1.0 + y.exp());
        (C64::new(x, 0.0), C64::new(om, 0.0))
    }

    /// Logit range swept by audits. The disk model loses precision in
    /// `1 + z` near -1, so its sweep stops well short of that end.
    fn spine_sweep(&self) -> f64 {
        if self.model.spine_lo() == 0.0 {
            40.0
        } else {
            12.0
        }
    }

    fn spine_value(&self, y: f64) -> f64 {
        let (z, om) = self.spine_point(y);
        self.eval(z, om).0.re
    }

    /// Solves `Re F = target` on the spine; `None` beyond either end.
    fn spine_solve(&self, target: f64) -> std::result::Result<(C64, C64), bool> {
        let lim = if self.model.spine_lo() == 0.0 { SPINE_LOGIT } else { 36.0 };
        let (mut a, mut b) = (-lim, lim);
        if target <= self.spine_value(a) {
            return Err(false);
        }
        if target >= self.spine_value(b) {
            return Err(true);
        }
        let mut y = 0.0;
        for _ in 0..200 {
            let (z, om) = self.spine_point(y);
            let (f, df) = self.eval(z, om);
            let g = f.re - target;
            if g == 0.0 {
                break;
            }
            if g < 0.0 {
                a = y;
            } else {
                b = y;
            }
            // dx/dy = (x - lo) om / span
            let span = 1.0 - self.model.spine_lo();
            let dxdy = (z.re - self.model.spine_lo()) * om.re / span;
            let step = g / (df.re * dxdy);
            let mut next = y - step;
            if b - a > 1.0 || !(next > a && next < b) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - y).abs() <= 1e-15 * (1.0 + y.abs()) || b - a <= 1e-15 * (1.0 + y.abs()) {
                y = next;
                break;
            }
            y = next;
        }
        Ok(self.spine_point(y))
    }

    /// Point `(z, 1 - z)` with `F(z) = target`, `0 <= Im target <= 1`.
    fn invert(&self, target: C64) -> std::result::Result<(C64, C64), bool> {
        let (mut z, mut om) = self.spine_solve(target.re)?;
        let base = self.offset;
        let im = target.im.clamp(0.0, 1.0);
        let steps = ((im - base).abs() / CONTINUATION_STEP).ceil().max(1.0) as usize;
        for j in 1..=steps {
            let t = C64::new(target.re, base + (im - base) * j as f64 / steps as f64);
            match self.newton(z, om, t) {
                Some(p) => (z, om) = p,
                None => return Ok((C64::new(f64::NAN, f64::NAN), C64::new(f64::NAN, f64::NAN))),
            }
        }
        Ok((z, om))
    }

    fn newton(&self, mut z: C64, mut om: C64, target: C64) -> Option<(C64, C64)> {
        let tol = 1e-13 * (1.0 + target.norm());
        let (mut f, mut df) = self.eval(z, om);
        for _ in 0..80 {
            let r = target - f;
            if r.norm() <= tol {
                return Some((z, om));
            }
            let mut d = r / df;
            let mut moved = false;
            for _ in 0..50 {
                let (z2, om2) = (z + d, om - d);
                if self.model.admissible(z2, om2) {
                    let (f2, df2) = self.eval(z2, om2);
                    if (target - f2).norm() < r.norm() {
                        z = z2;
                        om = om2;
                        f = f2;
                        df = df2;
                        moved = true;
                        break;
                    }
                }
                d *= 0.5;
            }
            if !moved {
                break;
            }
        }
        // Descent can only stall near a root of an analytic function, so a
        // stalled iterate is rounding-limited (cancellation in `1 + z`).
        ((target - f).norm() <= 1e-8 * (1.0 + target.norm())).then_some((z, om))
    }

    fn endpoint(&self, hi: bool) -> C64 {
        C64::new(if hi { 1.0 } else { self.model.spine_lo() }, 0.0)
    }

    /// Image of a strip-coordinate point `sigma`, `|Im sigma| <= pi/4`.
    fn eval_strip(&self, sigma: C64) -> C64 {
        let t = sigma * (2.0 / PI) + C64::new(0.0, 0.5);
        match self.invert(t) {
            Ok((z, _)) => z,
            Err(hi) => self.endpoint(hi),
        }
    }
}

/// Serialized form of a [`ConformalMap`].
#[derive(Serialize, Deserialize)]
struct MapData {
    model: String,
    degree: usize,
    coeffs: Vec<f64>,
    offset: f64,
    resolution: usize,
    accuracy: f64,
    shrink: f64,
}

/// Conformal map `G` of the closed disk onto the closure of a Jordan domain,
/// with `G(-1)` and `G(1)` the ends of the spine.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MapData", into = "MapData")]
pub struct ConformalMap {
    core: StripMap,
    /// Fit nodes on the prescribed curve.
    pub node_images: Vec<C64>,
    /// Circle angles of the points mapped nearest to the fit nodes.
    pub node_preimages: Vec<f64>,
    pub resolution: usize,
    /// Largest deviation of midpoint boundary samples from the prescribed curve.
    pub accuracy: f64,
    pub shrink: f64,
}

impl TryFrom<MapData> for ConformalMap {
    type Error = String;
    fn try_from(d: MapData) -> std::result::Result<Self, String> {
        let model = ModelRegistry::default()
            .get(&d.model)
            .ok_or_else(|| format!("unknown boundary model \"{}\"", d.model))?;
        if d.coeffs.len() != model.basis_len(d.degree) {
            return Err("coefficient count does not match the model degree".into());
        }
        Ok(ConformalMap {
            core: StripMap {
                model,
                degree: d.degree,
                coeffs: d.coeffs,
                offset: d.offset,
            },
            node_images: Vec::new(),
            node_preimages: Vec::new(),
            resolution: d.resolution,
            accuracy: d.accuracy,
            shrink: d.shrink,
        })
    }
}

impl From<ConformalMap> for MapData {
    fn from(m: ConformalMap) -> Self {
        MapData {
            model: m.core.model.name().to_string(),
            degree: m.core.degree,
            coeffs: m.core.coeffs,
            offset: m.core.offset,
            resolution: m.resolution,
            accuracy: m.accuracy,
            shrink: m.shrink,
        }
    }
}

impl ConformalMap {
    pub fn model(&self) -> &str {
        self.core.model.name()
    }

    /// Circle angle of the preimage of 0 (or of the spine's lower end).
    pub fn z0_angle(&self) -> f64 {
        PI
    }

    /// Circle angle of the preimage of 1.
    pub fn z1_angle(&self) -> f64 {
        0.0
    }

    pub fn endpoint_one(&self) -> C64 {
        self.core.endpoint(true)
    }

    /// `G(tanh(sigma))` for `|Im sigma| <= pi/4`.
    pub fn eval_strip(&self, sigma: C64) -> C64 {
        self.core.eval_strip(sigma)
    }

    pub fn eval(&self, w: C64) -> C64 {
        if w.norm() >= 1.0 {
            return self.eval_boundary(w.arg());
        }
        self.core.eval_strip(w.atanh())
    }

    /// Boundary value through the closed form of `artanh` on the circle.
    ///
    /// The horn map approaches its cusp ends only like `1/|log|t - t_end||`,
    /// so angles within rounding of `0` or `pi` are taken to be the ends.
    pub fn eval_boundary(&self, angle: f64) -> C64 {
        let d = crate::numeric::angle_diff(angle, 0.0).abs();
        if d <= ENDPOINT_SNAP {
            return self.core.endpoint(true);
        }
        if PI - d <= ENDPOINT_SNAP {
            return self.core.endpoint(false);
        }
        match artanh_on_circle(angle) {
            Some(s) => self.core.eval_strip(s),
            None => self.core.endpoint(crate::numeric::angle_diff(angle, 0.0).abs() < FRAC_PI_2),
        }
    }

    pub fn forward(self: &Arc<Self>) -> crate::disk_algebra::HoloFunction {
        crate::disk_algebra::Expr::Conformal {
            map: self.clone(),
            arg: crate::disk_algebra::Expr::var(),
        }
        .into()
    }

    /// `Im F` on a ray from the origin; used to locate the fitted boundary.
    fn level_angle(&self, r: f64, one_minus_r: f64, guess: f64) -> Option<f64> {
        let point = |phi: f64| -> (C64, C64) {
            let z = r * cis(phi);
            let s = (0.5 * phi).sin();
            let om = C64::new(one_minus_r + 2.0 * r * s * s, -r * phi.sin());
            (z, om)
        };
        let level = |phi: f64| {
            let (z, om) = point(phi);
            self.core.eval(z, om).0.im - 1.0
        };
        let mut hi = guess.max(1e-300);
        while level(hi) < 0.0 {
            hi *= 2.0;
            if hi > FRAC_PI_2 {
                return None;
            }
        }
        Some(bisect_last_true(0.0, hi, 200, |p| level(p) < 0.0))
    }
}

/// Logistic radii `1/(1+e^{-x})` and their complements for `x` uniform.
fn logistic_nodes(n: usize) -> Vec<(f64, f64, f64)> {
    (0..n)
        .map(|j| {
            let x = -NODE_LOGIT + 2.0 * NODE_LOGIT * j as f64 / (n - 1) as f64;
            (x, 1.0 / (1.0 + (-x).exp()), 1.0 / (1.0 + x.exp()))
        })
        .collect()
}

fn polar(r: f64, one_minus_r: f64, phi: f64) -> (C64, C64) {
    let s = (0.5 * phi).sin();
    (r * cis(phi), C64::new(one_minus_r + 2.0 * r * s * s, -r * phi.sin()))
}

fn least_squares(model: &Arc<dyn BoundaryModel>, degree: usize, rows: &[(C64, C64, f64)]) -> Result<StripMap> {
    let n = model.basis_len(degree);
    let cols = n + usize::from(model.has_offset());
    let mut a = nalgebra::DMatrix::<f64>::zeros(rows.len(), cols);
    let mut b = nalgebra::DVector::<f64>::zeros(rows.len());
    let mut val = vec![C64::default(); n];
    let mut der = vec![C64::default(); n];
    for (j, &(z, om, target)) in rows.iter().enumerate() {
        model.basis(z, om, degree, &mut val, &mut der);
        for k in 0..n {
            a[(j, k)] = val[k].im;
        }
        if model.has_offset() {
            a[(j, n)] = 1.0;
        }
        b[j] = target;
    }
    let scales: Vec<f64> = (0..cols).map(|k| a.column(k).norm().max(f64::MIN_POSITIVE)).collect();
    for (k, s) in scales.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let sol = svd
        .solve(&b, 1e-13 * smax)
        .map_err(|e| Error::ConformalFit(e.to_string()))?;
    let coeffs: Vec<f64> = (0..n).map(|k| sol[k] / scales[k]).collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::ConformalFit("non-finite coefficients".into()));
    }
    let offset = if model.has_offset() { sol[n] / scales[n] } else { 0.0 };
    Ok(StripMap {
        model: model.clone(),
        degree,
        coeffs,
        offset,
    })
}

/// `F' > 0` along the spine, so that `F` is real-increasing there.
fn spine_increasing(core: &StripMap) -> bool {
    let mut prev = f64::NEG_INFINITY;
    let ymax = core.spine_sweep();
    (0..4001).all(|i| {
        let y = ymax * (2.0 * i as f64 / 4000.0 - 1.0);
        let (z, om) = core.spine_point(y);
        let (f, df) = core.eval(z, om);
        let ok = df.re > 0.0 && f.re > prev;
        prev = f.re;
        ok
    })
}

fn horn_map(profile: &CuspProfile, n: usize, shrink: f64, degree: usize) -> Result<ConformalMap> {
    let model: Arc<dyn BoundaryModel> = Arc::new(HornModel);
    let fit_theta = |r: f64| (1.0 - shrink) * profile.theta(r);
    let nodes = logistic_nodes(n);
    let rows: Vec<(C64, C64, f64)> = nodes
        .iter()
        .map(|&(_, r, omr)| {
            let (z, om) = polar(r, omr, fit_theta(r));
            (z, om, 1.0)
        })
        .collect();
    let core = least_squares(&model, degree, &rows)?;
    if !(core.coeffs[0] > 0.0 && core.coeffs[2] > 0.0) {
        return Err(Error::ConformalFit(format!(
            "cusp coefficients not positive ({}, {})",
            core.coeffs[0], core.coeffs[2]
        )));
    }
    if !spine_increasing(&core) {
        return Err(Error::ConformalFit("model not increasing on the segment".into()));
    }
    let mut map = ConformalMap {
        core,
        node_images: rows.iter().map(|r| r.0).collect(),
        node_preimages: Vec::new(),
        resolution: n,
        accuracy: f64::INFINITY,
        shrink,
    };
    map.node_preimages = map
        .node_images
        .iter()
        .zip(&rows)
        .map(|(_, &(z, om, _))| {
            let x = FRAC_PI_2 * map.core.eval(z, om).0.re;
            2.0 * (-2.0 * x).exp().atan()
        })
        .collect();
    let deviations: Vec<f64> = nodes
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| {
            let x = 0.5 * (w[0].0 + w[1].0);
            let (r, omr) = (1.0 / (1.0 + (-x).exp()), 1.0 / (1.0 + x.exp()));
            let target = fit_theta(r);
            match map.level_angle(r, omr, target) {
                Some(phi) => r * (phi - target).abs(),
                None => f64::INFINITY,
            }
        })
        .collect();
    map.accuracy = deviations.into_iter().fold(0.0, f64::max);
    Ok(map)
}

/// Fits the horn map for `(1 - shrink) theta` without auditing containment;
/// the most accurate admissible degree is kept.
pub fn fit_cusp_map(profile: &CuspProfile, n: usize, shrink: f64) -> Result<ConformalMap> {
    candidates(profile, n, shrink)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::ConformalFit("no admissible fit".into()))
}

fn candidates(profile: &CuspProfile, n: usize, shrink: f64) -> Result<Vec<ConformalMap>> {
    if n < 64 {
        return Err(Error::InvalidArgument(format!("conformal resolution {n} below 64")));
    }
    if !(0.0..1.0).contains(&shrink) {
        return Err(Error::InvalidArgument(format!("shrink {shrink} outside [0, 1)")));
    }
    let mut maps: Vec<ConformalMap> = HORN_DEGREES
        .par_iter()
        .filter(|&&d| d + 3 < n / 4)
        .filter_map(|&d| horn_map(profile, n, shrink, d).ok())
        .collect();
    maps.sort_by(|a, b| a.accuracy.total_cmp(&b.accuracy));
    Ok(maps)
}

/// Horn map for `profile`, fitted to the shrunk curve and audited for
/// containment in the unshrunk horn on a 100 x 100 sample.
pub fn build_cusp_map(profile: &CuspProfile, n: usize, shrink: f64) -> Result<ConformalMap> {
    let mut last = None;
    for map in candidates(profile, n, shrink)? {
        let report = verify_containment(&map, Some(profile), 100);
        if report.passed {
            return Ok(map);
        }
        last = Some(report);
    }
    Err(Error::Containment(match last {
        Some(r) => format!(
            "min arg {:.3e}, min theta margin {:.3e}, max modulus {:.6}, {} non-finite of {}",
            r.min_arg, r.min_theta_margin, r.max_modulus, r.non_finite, r.samples
        ),
        None => "no admissible fit".into(),
    }))
}

/// Map of the disk onto itself through the disk model; the exact answer is
/// the identity.
pub fn build_disk_calibration(n: usize, degree: usize) -> Result<ConformalMap> {
    if n < 64 {
        return Err(Error::InvalidArgument(format!("conformal resolution {n} below 64")));
    }
    let model: Arc<dyn BoundaryModel> = Arc::new(DiskModel);
    let half = n / 2;
    let mut rows = Vec::with_capacity(2 * half);
    for j in 0..half {
        let x = -8.0 + 16.0 * (j as f64 + 0.5) / half as f64;
        let t = 2.0 * (-2.0 * x).exp().atan();
        for angle in [t, -t] {
            let z = cis(angle);
            let om = -crate::numeric::expm1(C64::new(0.0, angle));
            rows.push((z, om, if angle > 0.0 { 1.0 } else { 0.0 }));
        }
    }
    let core = least_squares(&model, degree, &rows)?;
    if !spine_increasing(&core) {
        return Err(Error::ConformalFit("calibration model not increasing".into()));
    }
    let accuracy = rows
        .iter()
        .map(|&(z, om, target)| (core.eval(z, om).0.im - target).abs())
        .fold(0.0, f64::max);
    Ok(ConformalMap {
        core,
        node_images: rows.iter().map(|r| r.0).collect(),
        node_preimages: rows.iter().map(|r| r.0.arg()).collect(),
        resolution: n,
        accuracy,
        shrink: 0.0,
    })
}

/// `G(z)` for `|z| <= 1`.
pub fn map_eval(g: &ConformalMap, z: C64) -> Result<C64> {
    let r = z.norm();
    if !(r <= 1.0 + crate::disk_algebra::DISK_TOLERANCE) {
        return Err(Error::OutsideDisk(r));
    }
    Ok(g.eval(z))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: usize,
    /// Smallest `arg G(z)`.
    pub min_arg: f64,
    /// Smallest `theta(|G(z)|) - arg G(z)`.
    pub min_theta_margin: f64,
    pub max_modulus: f64,
    pub non_finite: usize,
    pub passed: bool,
}

/// Samples the image of the map: a `grid x grid` polar grid of the open
/// disk, `grid` boundary points, and a sweep of the strip along the spine
/// that reaches into both cusps. With a profile, images must lie in the
/// closed horn; without one, in the closed unit disk.
pub fn verify_containment(g: &ConformalMap, profile: Option<&CuspProfile>, grid: usize) -> ContainmentReport {
    let grid = grid.max(2);
    let mut sigmas: Vec<Option<C64>> = Vec::new();
    let mut points: Vec<C64> = Vec::new();
    for i in 0..grid {
        let r = (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            points.push(r * cis(2.0 * PI * (j as f64 + 0.25) / grid as f64));
        }
    }
    let boundary: Vec<f64> = (0..grid).map(|j| 2.0 * PI * j as f64 / grid as f64).collect();
    let ymax = g.core.spine_sweep();
    for i in 0..grid {
        let y = ymax * (2.0 * i as f64 / (grid - 1) as f64 - 1.0);
        let x = g.core.spine_value(y);
        for level in [0.0, 0.25, 0.5, 0.75, 1.0] {
            sigmas.push(Some((C64::new(x, level) - C64::new(0.0, 0.5)) * FRAC_PI_2));
        }
    }
    let mut images: Vec<C64> = points.par_iter().map(|&z| g.eval(z)).collect();
    images.extend(boundary.par_iter().map(|&t| g.eval_boundary(t)).collect::<Vec<_>>());
    images.extend(
        sigmas
            .par_iter()
            .map(|s| g.eval_strip(s.unwrap()))
            .collect::<Vec<_>>(),
    );
    containment_of(&images, profile)
}

/// Containment margins of a set of image points.
pub fn containment_of(images: &[C64], profile: Option<&CuspProfile>) -> ContainmentReport {
    let mut rep = ContainmentReport {
        samples: images.len(),
        min_arg: f64::INFINITY,
        min_theta_margin: f64::INFINITY,
        max_modulus: 0.0,
        non_finite: 0,
        passed: false,
    };
    for w in images {
        if !(w.re.is_finite() && w.im.is_finite()) {
            rep.non_finite += 1;
            continue;
        }
        let m = w.norm();
        rep.max_modulus = rep.max_modulus.max(m);
        if let Some(p) = profile {
            let arg = if m == 0.0 { 0.0 } else { w.im.atan2(w.re) };
            rep.min_arg = rep.min_arg.min(arg);
            rep.min_theta_margin = rep.min_theta_margin.min(p.theta(m) - arg);
        }
    }
    rep.passed = rep.non_finite == 0
        && rep.max_modulus <= 1.0 + CONTAINMENT_TOL
        && (profile.is_none() || (rep.min_arg >= -CONTAINMENT_TOL && rep.min_theta_margin >= -CONTAINMENT_TOL));
    rep
}
