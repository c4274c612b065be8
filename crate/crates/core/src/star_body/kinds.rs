use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{random_direction, ray_gauge, BodyRegistry, ConvexHull, Gauge, StarBody};
use crate::error::{Error, Result};
use crate::numeric::{norm, wrap_angle, Vector, C64};

fn parse<T: for<'de> Deserialize<'de>>(spec: &Value, kind: &str) -> Result<T> {
    let mut spec = spec.clone();
    if let Value::Object(map) = &mut spec {
        map.remove("kind");
    }
    serde_json::from_value(spec).map_err(|e| Error::Problem(format!("body \"{kind}\": {e}")))
}

fn positive(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::InvalidArgument(format!("{what} must be positive and finite, got {x}")))
    }
}

fn with_center(gauge: Arc<dyn Gauge>, center: Option<Vector>) -> Result<StarBody> {
    match center {
        Some(c) => StarBody::new(c, gauge),
        None => Ok(StarBody::centered(gauge)),
    }
}

#[derive(Clone, Debug)]
pub struct Ball {
    dim: usize,
    radius: f64,
}

impl Ball {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("ball dimension must be positive".into()));
        }
        Ok(Ball {
            dim,
            radius: positive(radius, "ball radius")?,
        })
    }
}

impl Gauge for Ball {
    fn kind(&self) -> &'static str {
        "ball"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, v: &[C64]) -> f64 {
        norm(v) / self.radius
    }
    fn kernel_inradius(&self) -> f64 {
        self.radius
    }
    fn outradius(&self) -> f64 {
        self.radius
    }
    fn lipschitz_bound(&self) -> f64 {
        1.0 / self.radius
    }
    fn describe(&self) -> Option<Value> {
        Some(json!({"kind": "ball", "radius": self.radius, "dim": self.dim}))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallSpec {
    radius: f64,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default)]
    center: Option<Vector>,
}

pub(super) fn build_ball(spec: &Value, _: &BodyRegistry) -> Result<StarBody> {
    let s: BallSpec = parse(spec, "ball")?;
    let dim = s.dim.or(s.center.as_ref().map(Vector::dim)).unwrap_or(1);
    with_center(Arc::new(Ball::new(dim, s.radius)?), s.center)
}

/// `max_i |z_i| / r_i`.
#[derive(Clone, Debug)]
pub struct Polydisk {
    radii: Vec<f64>,
}

impl Polydisk {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidArgument("polydisk needs at least one radius".into()));
        }
        for &r in &radii {
            positive(r, "polydisk radius")?;
        }
        Ok(Polydisk { radii })
    }
}

impl Gauge for Polydisk {
    fn kind(&self) -> &'static str {
        "polydisk"
    }
    fn dim(&self) -> usize {
        self.radii.len()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        v.iter()
            .zip(&self.radii)
            .map(|(z, r)| z.norm() / r)
            .fold(0.0, f64::max)
    }
    fn kernel_inradius(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }
    fn outradius(&self) -> f64 {
        self.radii.iter().map(|r| r * r).sum::<f64>().sqrt()
    }
    fn lipschitz_bound(&self) -> f64 {
        1.0 / self.kernel_inradius()
    }
    fn describe(&self) -> Option<Value> {
        Some(json!({"kind": "polydisk", "radii": self.radii}))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolydiskSpec {
    radii: Vec<f64>,
    #[serde(default)]
    center: Option<Vector>,
}

pub(super) fn build_polydisk(spec: &Value, _: &BodyRegistry) -> Result<StarBody> {
    let s: PolydiskSpec = parse(spec, "polydisk")?;
    with_center(Arc::new(Polydisk::new(s.radii)?), s.center)
}

/// Star body in C with boundary radius interpolated linearly in the angle.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    angles: Vec<f64>,
    radii: Vec<f64>,
}

impl RadialProfile {
    pub fn new(profile: &[(f64, f64)]) -> Result<Self> {
        if profile.is_empty() {
            return Err(Error::InvalidArgument("radial profile is empty".into()));
        }
        let mut pts: Vec<(f64, f64)> = profile
            .iter()
            .map(|&(a, r)| positive(r, "profile radius").map(|r| (wrap_angle(a), r)))
            .collect::<Result<_>>()?;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[1].0 - w[0].0 < 1e-12) {
            return Err(Error::InvalidArgument("radial profile has repeated angles".into()));
        }
        Ok(RadialProfile {
            angles: pts.iter().map(|p| p.0).collect(),
            radii: pts.iter().map(|p| p.1).collect(),
        })
    }

    /// Segments `(start angle, span, r_start, r_end)`, wrapping around.
    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        let n = self.angles.len();
        (0..n).map(move |i| {
            let j = (i + 1) % n;
            let mut span = self.angles[j] - self.angles[i];
            if span <= 0.0 {
                span += 2.0 * PI;
            }
            (self.angles[i], span, self.radii[i], self.radii[j])
        })
    }

    pub fn radius_at(&self, angle: f64) -> f64 {
        if self.angles.len() == 1 {
            return self.radii[0];
        }
        let a = wrap_angle(angle);
        for (start, span, r0, r1) in self.segments() {
            let mut off = a - start;
            if off < 0.0 {
                off += 2.0 * PI;
            }
            if off <= span {
                return r0 + (r1 - r0) * off / span;
            }
        }
        self.radii[0]
    }
}

impl Gauge for RadialProfile {
    fn kind(&self) -> &'static str {
        "radial_profile"
    }
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, v: &[C64]) -> f64 {
        let r = v[0].norm();
        if r == 0.0 {
            return 0.0;
        }
        r / self.radius_at(v[0].arg())
    }
    fn kernel_inradius(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }
    fn outradius(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }
    /// Supremum of `|grad (|v| / r(arg v))| = sqrt(1/r^2 + (r'/r^2)^2)` over the
    /// profile segments.
    fn lipschitz_bound(&self) -> f64 {
        if self.angles.len() == 1 {
            return 1.0 / self.radii[0];
        }
        self.segments()
            .map(|(_, span, r0, r1)| {
                let slope = (r1 - r0) / span;
                let rmin = r0.min(r1);
                (1.0 / (rmin * rmin) + slope * slope / rmin.powi(4)).sqrt()
            })
            .fold(0.0, f64::max)
    }
    fn describe(&self) -> Option<Value> {
        let profile: Vec<[f64; 2]> = self.angles.iter().zip(&self.radii).map(|(&a, &r)| [a, r]).collect();
        Some(json!({"kind": "radial_profile", "profile": profile}))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadialSpec {
    profile: Vec<(f64, f64)>,
    #[serde(default)]
    center: Option<Vector>,
}

pub(super) fn build_radial_profile(spec: &Value, _: &BodyRegistry) -> Result<StarBody> {
    let s: RadialSpec = parse(spec, "radial_profile")?;
    with_center(Arc::new(RadialProfile::new(&s.profile)?), s.center)
}

/// `[co(points)]_eps` about the centroid of the points.
#[derive(Clone, Debug)]
pub struct HullEps {
    points: Vec<Vector>,
    hull: ConvexHull,
    eps: f64,
    centroid: Vector,
    inradius: f64,
    outradius: f64,
}

impl HullEps {
    pub fn new(points: &[Vector], eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidArgument(format!("hull eps must be positive, got {eps}")));
        }
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("hull needs at least one point".into()))?;
        let dim = first.dim();
        for p in points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !p.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let n = points.len() as f64;
        let centroid = Vector(
            (0..dim)
                .map(|i| points.iter().map(|p| p.0[i]).sum::<C64>() / n)
                .collect(),
        );
        let rel: Vec<Vec<f64>> = points.iter().map(|p| to_real(&(p - &centroid).0)).collect();
        let hull = ConvexHull::new(rel);
        let inradius = eps + hull.inradius_about_origin();
        let outradius = eps + points.iter().map(|p| (p - &centroid).norm()).fold(0.0, f64::max);
        Ok(HullEps {
            points: points.to_vec(),
            hull,
            eps,
            centroid,
            inradius,
            outradius,
        })
    }

    pub fn centroid(&self) -> &Vector {
        &self.centroid
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn hull(&self) -> &ConvexHull {
        &self.hull
    }
}

pub(crate) fn to_real(v: &[C64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

impl Gauge for HullEps {
    fn kind(&self) -> &'static str {
        "hull_eps"
    }
    fn dim(&self) -> usize {
        self.centroid.dim()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        ray_gauge(v, self.inradius, self.outradius, |x| {
            self.hull.distance(&to_real(x)) < self.eps
        })
    }
    fn kernel_inradius(&self) -> f64 {
        self.inradius
    }
    fn outradius(&self) -> f64 {
        self.outradius
    }
    /// Convex body containing a ball of radius `rho` about the center.
    fn lipschitz_bound(&self) -> f64 {
        1.0 / self.inradius
    }
    fn describe(&self) -> Option<Value> {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                if p.dim() == 1 {
                    json!([p.0[0].re, p.0[0].im])
                } else {
                    serde_json::to_value(p).unwrap_or(Value::Null)
                }
            })
            .collect();
        Some(json!({"kind": "hull_eps", "points": points, "eps": self.eps}))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointSpec {
    Scalar([f64; 2]),
    Vector(Vector),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HullSpec {
    points: Vec<PointSpec>,
    eps: f64,
    /// Written back by `describe`; must agree with the centroid.
    #[serde(default)]
    center: Option<Vector>,
}

pub(super) fn build_hull_eps(spec: &Value, _: &BodyRegistry) -> Result<StarBody> {
    let s: HullSpec = parse(spec, "hull_eps")?;
    let points: Vec<Vector> = s
        .points
        .into_iter()
        .map(|p| match p {
            PointSpec::Scalar([re, im]) => Vector(vec![C64::new(re, im)]),
            PointSpec::Vector(v) => v,
        })
        .collect();
    let body = super::hull_body(&points, s.eps)?;
    if let Some(c) = s.center {
        let scale = 1.0 + body.center().norm();
        if c.dim() != body.dim() || (&c - body.center()).norm() > 1e-12 * scale {
            return Err(Error::Problem("body \"hull_eps\": center must be the centroid of the points".into()));
        }
    }
    Ok(body)
}

/// Direct product; the gauge is the maximum over the factors.
#[derive(Clone, Debug)]
pub struct Product {
    factors: Vec<Arc<dyn Gauge>>,
}

impl Product {
    pub fn new(factors: Vec<Arc<dyn Gauge>>) -> Self {
        Product { factors }
    }
}

impl Gauge for Product {
    fn kind(&self) -> &'static str {
        "product"
    }
    fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        let mut offset = 0;
        let mut p = 0.0f64;
        for f in &self.factors {
            let d = f.dim();
            p = p.max(f.eval(&v[offset..offset + d]));
            offset += d;
        }
        p
    }
    fn kernel_inradius(&self) -> f64 {
        self.factors.iter().map(|f| f.kernel_inradius()).fold(f64::INFINITY, f64::min)
    }
    fn outradius(&self) -> f64 {
        self.factors.iter().map(|f| f.outradius().powi(2)).sum::<f64>().sqrt()
    }
    fn lipschitz_bound(&self) -> f64 {
        self.factors.iter().map(|f| f.lipschitz_bound()).fold(0.0, f64::max)
    }
    fn describe(&self) -> Option<Value> {
        let factors: Option<Vec<Value>> = self.factors.iter().map(|f| f.describe()).collect();
        Some(json!({"kind": "product", "factors": factors?}))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductSpec {
    factors: Vec<Value>,
    #[serde(default)]
    center: Option<Vector>,
}

pub(super) fn build_product(spec: &Value, reg: &BodyRegistry) -> Result<StarBody> {
    let s: ProductSpec = parse(spec, "product")?;
    if s.factors.is_empty() {
        return Err(Error::Problem("body \"product\": no factors".into()));
    }
    let mut bodies = s.factors.iter().map(|f| reg.build(f));
    let mut acc = bodies.next().unwrap()?;
    for b in bodies {
        acc = super::product_body(&acc, &b?);
    }
    match s.center {
        Some(c) => StarBody::new(c, acc.gauge().clone()),
        None => Ok(acc),
    }
}

/// `factor * M`, with gauge `p / factor`.
#[derive(Clone, Debug)]
pub struct Scaled {
    inner: Arc<dyn Gauge>,
    factor: f64,
}

impl Scaled {
    pub fn new(inner: Arc<dyn Gauge>, factor: f64) -> Result<Self> {
        Ok(Scaled {
            inner,
            factor: positive(factor, "scale factor")?,
        })
    }
}

impl Gauge for Scaled {
    fn kind(&self) -> &'static str {
        "scaled"
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, v: &[C64]) -> f64 {
        self.inner.eval(v) / self.factor
    }
    fn kernel_inradius(&self) -> f64 {
        self.inner.kernel_inradius() * self.factor
    }
    fn outradius(&self) -> f64 {
        self.inner.outradius() * self.factor
    }
    fn lipschitz_bound(&self) -> f64 {
        self.inner.lipschitz_bound() / self.factor
    }
    fn describe(&self) -> Option<Value> {
        Some(json!({"kind": "scaled", "factor": self.factor, "body": self.inner.describe()?}))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaledSpec {
    factor: f64,
    body: Value,
    #[serde(default)]
    center: Option<Vector>,
}

pub(super) fn build_scaled(spec: &Value, reg: &BodyRegistry) -> Result<StarBody> {
    let s: ScaledSpec = parse(spec, "scaled")?;
    let inner = reg.build(&s.body)?.scaled(s.factor)?;
    match s.center {
        Some(c) => StarBody::new(c, inner.gauge().clone()),
        None => Ok(inner),
    }
}

pub type GaugeFn = Arc<dyn Fn(&[C64]) -> f64 + Send + Sync>;

/// Body `{p < 1}` of a caller-supplied homogeneous function. Radii are
/// estimated by sampling directions; the Lipschitz bound follows the
/// `R / rho^2` star-body convention.
#[derive(Clone)]
pub struct FromGauge {
    dim: usize,
    p: GaugeFn,
    inradius: f64,
    outradius: f64,
}

impl fmt::Debug for FromGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FromGauge")
            .field("dim", &self.dim)
            .field("inradius", &self.inradius)
            .field("outradius", &self.outradius)
            .finish()
    }
}

impl FromGauge {
    pub fn new(dim: usize, p: GaugeFn, samples: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let (mut pmin, mut pmax) = (f64::INFINITY, 0.0f64);
        for _ in 0..samples {
            let u = random_direction(&mut rng, dim);
            let pu = p(&u);
            pmin = pmin.min(pu);
            pmax = pmax.max(pu);
        }
        if pmax <= 0.0 || !pmax.is_finite() {
            return Err(Error::InvalidArgument("gauge vanishes on every sampled direction".into()));
        }
        Ok(FromGauge {
            dim,
            p,
            inradius: 1.0 / pmax,
            outradius: if pmin > 0.0 { 1.0 / pmin } else { f64::INFINITY },
        })
    }
}

impl Gauge for FromGauge {
    fn kind(&self) -> &'static str {
        "from_gauge"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, v: &[C64]) -> f64 {
        (self.p)(v)
    }
    fn kernel_inradius(&self) -> f64 {
        self.inradius
    }
    fn outradius(&self) -> f64 {
        self.outradius
    }
    fn lipschitz_bound(&self) -> f64 {
        self.outradius / (self.inradius * self.inradius)
    }
    fn describe(&self) -> Option<Value> {
        None
    }
}
