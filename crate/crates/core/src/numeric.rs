//! Small numeric building blocks shared across modules: complex helpers,
//! the `Vector` type for points of C^n, and piecewise-linear tables.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// `e^z - 1` without cancellation for small `z`.
pub fn expm1(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * half * half;
    let im = x.exp() * y.sin();
    C64::new(re, im)
}

/// `artanh(exp(-p))`, evaluated through `p` so that values of `exp(-p)`
/// indistinguishable from 1 in floating point still give finite results.
/// Returns `None` for `p == 0`, where the value is `+infinity`.
pub fn artanh_exp_neg(p: C64) -> Option<C64> {
    if p == C64::new(0.0, 0.0) {
        return None;
    }
    let one_minus = -expm1(-p);
    let one_plus = C64::new(1.0, 0.0) + (-p).exp();
    Some(0.5 * (one_plus / one_minus).ln())
}

/// `artanh(e^{it})` for a point of the unit circle given by its angle.
/// Returns `None` at `t = 0` and `t = pi`.
pub fn artanh_on_circle(t: f64) -> Option<C64> {
    let half = 0.5 * wrap_angle(t);
    let cot = half.cos() / half.sin();
    if !cot.is_finite() || cot == 0.0 {
        return None;
    }
    let im = if cot > 0.0 { PI / 4.0 } else { -PI / 4.0 };
    Some(C64::new(0.5 * cot.abs().ln(), im))
}

/// Angle reduced to `[0, 2pi)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Signed angular difference reduced to `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

pub fn cis(t: f64) -> C64 {
    C64::new(t.cos(), t.sin())
}

/// A point of C^n with the Euclidean norm of R^{2n}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<C64>);

impl Vector {
    pub fn zeros(dim: usize) -> Self {
        Vector(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn from_reals(re: &[f64]) -> Self {
        Vector(re.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> Vector {
        Vector(self.0.iter().map(|z| z * c).collect())
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }
}

impl From<Vec<C64>> for Vector {
    fn from(v: Vec<C64>) -> Self {
        Vector(v)
    }
}

impl Add<&Vector> for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub<&Vector> for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, rhs: f64) -> Vector {
        Vector(self.0.iter().map(|z| z * rhs).collect())
    }
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Piecewise-linear function on a uniform grid of `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitTable {
    pub values: Vec<f64>,
}

impl UnitTable {
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n >= 2);
        let values = (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect();
        UnitTable { values }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.values.len();
        (0..n).map(move |i| i as f64 / (n - 1) as f64)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.values.len();
        let x = r.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (x.floor() as usize).min(n - 2);
        let t = x - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Maximum of the interpolant on `[a, b]`.
    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        let n = self.values.len();
        let mut m = self.eval(a).max(self.eval(b));
        let lo = (a.clamp(0.0, 1.0) * (n - 1) as f64).ceil() as usize;
        let hi = (b.clamp(0.0, 1.0) * (n - 1) as f64).floor() as usize;
        for i in lo..=hi.min(n - 1) {
            m = m.max(self.values[i]);
        }
        m
    }
}

/// Piecewise-linear function through sorted knots, extended linearly with
/// the last slope beyond the final knot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knots {
    pub points: Vec<(f64, f64)>,
}

impl Knots {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("need at least two knots".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument("knots must be strictly increasing".into()));
        }
        Ok(Knots { points })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.points;
        let i = match p.partition_point(|k| k.0 <= x) {
            0 => 0,
            k if k >= p.len() => p.len() - 2,
            k => k - 1,
        };
        let (x0, y0) = p[i];
        let (x1, y1) = p[i + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Least concave majorant of points sorted by abscissa (upper hull).
pub fn concave_majorant(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or below the chord a-p
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Bisection for the largest `t` in `[lo, hi]` with `pred(t)` true, assuming
/// `pred` is true at `lo` and monotone (true then false).
pub fn bisect_last_true(mut lo: f64, mut hi: f64, iters: usize, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_matches_naive_for_moderate_arguments() {
        for z in [C64::new(0.3, -0.7), C64::new(-2.0, 1.0), C64::new(1e-3, 2.0)] {
            let naive = z.exp() - 1.0;
            assert!((expm1(z) - naive).norm() < 1e-14);
        }
        let tiny = C64::new(1e-20, 1e-20);
        assert!((expm1(tiny) - tiny).norm() < 1e-35);
    }

    #[test]
    fn artanh_exp_neg_agrees_with_direct_formula() {
        let p = C64::new(0.4, 0.2);
        let direct = (-p).exp().atanh();
        assert!((artanh_exp_neg(p).unwrap() - direct).norm() < 1e-13);
        assert!(artanh_exp_neg(C64::new(0.0, 0.0)).is_none());
        // exp(-1e-30) rounds to 1 but the strip coordinate stays finite
        let s = artanh_exp_neg(C64::new(1e-30, 0.0)).unwrap();
        assert!((s.re - 0.5 * (2e30f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn artanh_on_circle_matches_complex_atanh() {
        for t in [0.3, 1.2, 2.9, 3.5, 5.0] {
            let direct = cis(t).atanh();
            let ours = artanh_on_circle(t).unwrap();
            assert!((direct - ours).norm() < 1e-12, "t = {t}");
        }
        assert!(artanh_on_circle(0.0).is_none());
    }

    #[test]
    fn concave_majorant_of_convex_points_is_chord() {
        let pts = [(0.0, 0.0), (1.0, 0.1), (2.0, 2.0)];
        assert_eq!(concave_majorant(&pts), vec![(0.0, 0.0), (2.0, 2.0)]);
    }

    #[test]
    fn unit_table_max_on_interval() {
        let t = UnitTable { values: vec![0.0, 1.0, 0.0] };
        assert_eq!(t.max_on(0.1, 0.9), 1.0);
        assert!((t.max_on(0.0, 0.25) - 0.5).abs() < 1e-15);
    }
}
