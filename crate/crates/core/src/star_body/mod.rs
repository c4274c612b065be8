//! Star-shaped bodies described by their Minkowski gauge.
//!
//! A body is a center plus a [`Gauge`] measuring `p_M(v - center)`. Gauge
//! kinds are registered by name in a [`BodyRegistry`] so that problem files
//! can select them with a `"kind"` tag.

mod hull;
mod kinds;
mod modulus;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::numeric::{Vector, C64};

pub use hull::ConvexHull;
pub use kinds::{Ball, FromGauge, HullEps, Polydisk, Product, RadialProfile, Scaled};
pub use modulus::{modulus_bound, ModulusBound, ModulusSampling};

/// Half-width of the band around `gauge == 1` classified as boundary.
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Iterations used by ray bisection against a membership oracle.
pub const RAY_BISECTION_ITERS: usize = 60;

/// A Minkowski functional of an open absorbing star-shaped set, measured
/// from the set's center.
pub trait Gauge: Debug + Send + Sync {
    fn kind(&self) -> &'static str;

    fn dim(&self) -> usize;

    /// `p_M(v)` for `v` already translated so the center is the origin.
    fn eval(&self, v: &[C64]) -> f64;

    /// Radius of a ball about the center contained in the body.
    fn kernel_inradius(&self) -> f64;

    /// Radius of a ball about the center containing the body.
    fn outradius(&self) -> f64;

    /// Lipschitz constant of the gauge for the Euclidean norm.
    fn lipschitz_bound(&self) -> f64;

    /// Problem-file description, when the body can be written back out.
    fn describe(&self) -> Option<Value>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Clone, Debug)]
pub struct StarBody {
    center: Vector,
    gauge: Arc<dyn Gauge>,
}

impl StarBody {
    pub fn new(center: Vector, gauge: Arc<dyn Gauge>) -> Result<Self> {
        if center.dim() != gauge.dim() {
            return Err(Error::DimensionMismatch {
                expected: gauge.dim(),
                got: center.dim(),
            });
        }
        if !center.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(StarBody { center, gauge })
    }

    pub fn centered(gauge: Arc<dyn Gauge>) -> Self {
        StarBody {
            center: Vector::zeros(gauge.dim()),
            gauge,
        }
    }

    pub fn kind(&self) -> &'static str {
        self.gauge.kind()
    }

    pub fn dim(&self) -> usize {
        self.gauge.dim()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn gauge(&self) -> &Arc<dyn Gauge> {
        &self.gauge
    }

    pub fn kernel_inradius(&self) -> f64 {
        self.gauge.kernel_inradius()
    }

    pub fn outradius(&self) -> f64 {
        self.gauge.outradius()
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.gauge.lipschitz_bound()
    }

    /// `p_M(v - center)`.
    pub fn gauge_eval(&self, v: &Vector) -> Result<f64> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(self.gauge_unchecked(v.as_slice()))
    }

    /// Gauge about the center without input validation.
    pub fn gauge_unchecked(&self, v: &[C64]) -> f64 {
        let rel: Vec<C64> = v.iter().zip(&self.center.0).map(|(a, c)| a - c).collect();
        self.gauge.eval(&rel)
    }

    /// Gauge of a vector already expressed relative to the center.
    pub fn gauge_relative(&self, v: &[C64]) -> f64 {
        self.gauge.eval(v)
    }

    pub fn classify(&self, v: &Vector) -> Result<Membership> {
        let p = self.gauge_eval(v)?;
        Ok(if p < 1.0 - BOUNDARY_BAND {
            Membership::Interior
        } else if p <= 1.0 + BOUNDARY_BAND {
            Membership::Boundary
        } else {
            Membership::Exterior
        })
    }

    /// The body `factor * (M - center) + center`, whose gauge is `p / factor`.
    pub fn scaled(&self, factor: f64) -> Result<StarBody> {
        let gauge = Arc::new(Scaled::new(self.gauge.clone(), factor)?);
        StarBody::new(self.center.clone(), gauge)
    }

    pub fn describe(&self) -> Option<Value> {
        let mut v = self.gauge.describe()?;
        if self.center.0.iter().any(|z| *z != C64::new(0.0, 0.0)) {
            if let Value::Object(map) = &mut v {
                if !map.contains_key("center") {
                    map.insert("center".into(), serde_json::to_value(&self.center).ok()?);
                }
            }
        }
        Some(v)
    }
}

/// Builds a body of one kind from its problem-file record.
pub trait BodyBuilder: Send + Sync {
    fn build(&self, spec: &Value, registry: &BodyRegistry) -> Result<StarBody>;
}

impl<F> BodyBuilder for F
where
    F: Fn(&Value, &BodyRegistry) -> Result<StarBody> + Send + Sync,
{
    fn build(&self, spec: &Value, registry: &BodyRegistry) -> Result<StarBody> {
        self(spec, registry)
    }
}

/// Gauge kinds addressable by their `"kind"` tag.
pub struct BodyRegistry {
    builders: BTreeMap<String, Box<dyn BodyBuilder>>,
}

impl Default for BodyRegistry {
    fn default() -> Self {
        let mut reg = BodyRegistry::empty();
        reg.register("ball", kinds::build_ball);
        reg.register("polydisk", kinds::build_polydisk);
        reg.register("radial_profile", kinds::build_radial_profile);
        reg.register("hull_eps", kinds::build_hull_eps);
        reg.register("product", kinds::build_product);
        reg.register("scaled", kinds::build_scaled);
        reg
    }
}

impl BodyRegistry {
    pub fn empty() -> Self {
        BodyRegistry {
            builders: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, kind: &str, builder: impl BodyBuilder + 'static) {
        self.builders.insert(kind.to_string(), Box::new(builder));
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, spec: &Value) -> Result<StarBody> {
        let kind = spec
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Problem("body: missing string key \"kind\"".into()))?;
        let builder = self
            .builders
            .get(kind)
            .ok_or_else(|| Error::Problem(format!("body: unknown kind \"{kind}\"")))?;
        builder.build(spec, self)
    }
}

/// Ball of the given radius about `center`.
pub fn ball(center: Vector, radius: f64) -> Result<StarBody> {
    let g = Ball::new(center.dim(), radius)?;
    StarBody::new(center, Arc::new(g))
}

/// The body `{p < 1}` of a continuous positively homogeneous function.
/// Homogeneity is spot-checked on `samples` random rays.
pub fn body_from_gauge(
    dim: usize,
    p: impl Fn(&[C64]) -> f64 + Send + Sync + 'static,
    samples: usize,
    seed: u64,
) -> Result<StarBody> {
    if dim == 0 || samples == 0 {
        return Err(Error::InvalidArgument("dimension and samples must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let v = random_direction(&mut rng, dim);
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        let pv = p(&v);
        let sv: Vec<C64> = v.iter().map(|z| z * scale).collect();
        let psv = p(&sv);
        let rel_err = (psv - scale * pv).abs() / (scale * pv).abs().max(f64::MIN_POSITIVE);
        if !pv.is_finite() || pv < 0.0 || rel_err > 1e-6 {
            return Err(Error::Homogeneity {
                ray: v.iter().map(|z| [z.re, z.im]).collect(),
                scale,
                rel_err,
            });
        }
    }
    let gauge = FromGauge::new(dim, Arc::new(p), samples.max(256), seed)?;
    Ok(StarBody::centered(Arc::new(gauge)))
}

/// Product body; its gauge is the maximum of the factor gauges.
pub fn product_body(b1: &StarBody, b2: &StarBody) -> StarBody {
    let center = Vector(b1.center.0.iter().chain(&b2.center.0).copied().collect());
    let gauge = Product::new(vec![b1.gauge.clone(), b2.gauge.clone()]);
    StarBody {
        center,
        gauge: Arc::new(gauge),
    }
}

/// The open `eps`-neighbourhood of the convex hull of `points`, recentered
/// at the centroid of the points.
pub fn hull_body(points: &[Vector], eps: f64) -> Result<StarBody> {
    let g = HullEps::new(points, eps)?;
    let center = g.centroid().clone();
    StarBody::new(center, Arc::new(g))
}

pub(crate) fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let n = crate::numeric::norm(&v);
        if n > 1e-8 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub(crate) fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Gauge along a ray by bisection against a membership oracle. `inner` and
/// `outer` bracket the boundary crossing in units of the direction `v`.
pub(crate) fn ray_gauge(v: &[C64], inner: f64, outer: f64, inside: impl Fn(&[C64]) -> bool) -> f64 {
    let n = crate::numeric::norm(v);
    if n == 0.0 {
        return 0.0;
    }
    let scaled = |t: f64| -> Vec<C64> { v.iter().map(|z| z * t).collect() };
    let t_lo = inner / n;
    let mut t_hi = outer / n;
    while inside(&scaled(t_hi)) {
        t_hi *= 2.0;
    }
    let t = crate::numeric::bisect_last_true(t_lo, t_hi, RAY_BISECTION_ITERS, |t| inside(&scaled(t)));
    1.0 / t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::I;
    use serde_json::json;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_ball_gauge_is_norm() {
        let b = ball(Vector::zeros(2), 1.0).unwrap();
        let v = Vector(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        assert!((b.gauge_eval(&v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(b.gauge_eval(&Vector::zeros(2)).unwrap(), 0.0);
        assert_eq!(b.classify(&v).unwrap(), Membership::Boundary);
    }

    #[test]
    fn gauge_eval_rejects_bad_input() {
        let b = ball(Vector::zeros(2), 1.0).unwrap();
        assert!(matches!(
            b.gauge_eval(&Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let nan = Vector(vec![c(f64::NAN, 0.0), c(0.0, 0.0)]);
        assert!(matches!(b.gauge_eval(&nan), Err(Error::NonFinite)));
    }

    #[test]
    fn polydisk_from_gauge_round_trip() {
        let b = body_from_gauge(2, |v: &[C64]| v[0].norm().max(v[1].norm()), 100, 1).unwrap();
        let v = Vector(vec![c(0.5, 0.0), 0.9 * I]);
        assert!((b.gauge_eval(&v).unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn body_from_gauge_rejects_inhomogeneous_function() {
        let err = body_from_gauge(1, |v: &[C64]| v[0].norm_sqr(), 20, 3).unwrap_err();
        assert!(matches!(err, Error::Homogeneity { .. }));
    }

    #[test]
    fn product_of_balls_takes_max() {
        let b1 = ball(Vector::zeros(1), 1.0).unwrap();
        let b2 = ball(Vector::zeros(1), 1.0).unwrap();
        let p = product_body(&b1, &b2);
        assert_eq!(p.dim(), 2);
        let v = Vector(vec![c(0.3, 0.0), c(0.0, 0.7)]);
        assert!((p.gauge_eval(&v).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(p.gauge_eval(&Vector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn registry_builds_every_documented_kind() {
        let reg = BodyRegistry::default();
        let specs = [
            json!({"kind": "ball", "radius": 1.0}),
            json!({"kind": "polydisk", "radii": [1.0, 2.0]}),
            json!({"kind": "radial_profile", "profile": [[0.0, 1.0], [3.0, 1.5]]}),
            json!({"kind": "hull_eps", "points": [[1.0, 0.0], [-1.0, 0.0]], "eps": 0.5}),
            json!({"kind": "product", "factors": [{"kind": "ball", "radius": 1.0}, {"kind": "ball", "radius": 2.0}]}),
            json!({"kind": "scaled", "factor": 2.0, "body": {"kind": "ball", "radius": 1.0}}),
        ];
        for s in &specs {
            let b = reg.build(s).unwrap();
            let round = reg.build(&b.describe().unwrap()).unwrap();
            let v = Vector(vec![c(0.3, -0.2); b.dim()]);
            assert!((b.gauge_eval(&v).unwrap() - round.gauge_eval(&v).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn registry_rejects_unknown_kind_and_keys() {
        let reg = BodyRegistry::default();
        assert!(reg.build(&json!({"kind": "cube"})).is_err());
        assert!(reg.build(&json!({"kind": "ball", "radius": 1.0, "colour": 3})).is_err());
        assert!(reg.build(&json!({"radius": 1.0})).is_err());
    }

    #[test]
    fn hull_body_rejects_nonpositive_eps() {
        let pts = [Vector(vec![c(1.0, 0.0)])];
        assert!(hull_body(&pts, 0.0).is_err());
        assert!(hull_body(&pts, -1.0).is_err());
    }
}
