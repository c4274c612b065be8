//! Regression problems and independent oracles shared by the integration
//! tests. Oracles here never call the library's own gauge or peak code.

#![allow(dead_code)]

use std::f64::consts::PI;

use peakinterp::disk_algebra::NodeSet;
use peakinterp::engine::{GridSpec, InterpolationProblem, ProblemSpec};
use peakinterp::numeric::{Vector, C64};
use peakinterp::star_body::BodyRegistry;
use serde_json::{json, Value};

/// Distance from `w` to the real segment `[-1, 1]`.
pub fn dist_to_segment(w: C64) -> f64 {
    C64::new(w.re - w.re.clamp(-1.0, 1.0), w.im).norm()
}

/// Gauge of a convex body about 0 from a strict membership test, by
/// bisection on the ray.
pub fn bisect_gauge(v: &[C64], inside: impl Fn(&[C64]) -> bool) -> f64 {
    if v.iter().all(|z| z.norm() == 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let scaled = |l: f64| -> Vec<C64> { v.iter().map(|z| z / l).collect() };
    while !inside(&scaled(hi)) {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(&scaled(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The stadium `{dist(w, [-1, 1]) < 1/2}`.
pub fn stadium_gauge(w: C64) -> f64 {
    bisect_gauge(&[w], |x| dist_to_segment(x[0]) < 0.5)
}

/// Distance from `w` to the convex polygon with counterclockwise vertices.
pub fn dist_to_polygon(w: C64, verts: &[C64]) -> f64 {
    let n = verts.len();
    let inside = (0..n).all(|i| {
        let (a, b) = (verts[i], verts[(i + 1) % n]);
        ((b - a).conj() * (w - a)).im >= 0.0
    });
    if inside {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let (a, b) = (verts[i], verts[(i + 1) % n]);
            let d = b - a;
            let t = (((w - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (w - (a + d * t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `exp(-prod_j (1 - conj(s_j) z)^(1/m))` straight from the definition.
pub fn chi_oracle(angles: &[f64], z: C64) -> C64 {
    let m = angles.len() as f64;
    let p: C64 = angles
        .iter()
        .map(|&a| {
            let base = C64::new(1.0, 0.0) - C64::from_polar(1.0, -a) * z;
            if base.norm() == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                base.powf(1.0 / m)
            }
        })
        .product();
    (-p).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BodyKind {
    Disk,
    Stadium,
    Polydisk,
    Product,
}

impl BodyKind {
    pub const ALL: [BodyKind; 4] = [BodyKind::Disk, BodyKind::Stadium, BodyKind::Polydisk, BodyKind::Product];

    pub fn json(self) -> Value {
        let stadium = json!({"kind": "hull_eps", "points": [[1.0, 0.0], [-1.0, 0.0]], "eps": 0.5});
        match self {
            BodyKind::Disk => json!({"kind": "ball", "radius": 1.0, "dim": 1}),
            BodyKind::Stadium => stadium,
            BodyKind::Polydisk => json!({"kind": "polydisk", "radii": [1.0, 0.5]}),
            BodyKind::Product => json!({"kind": "product", "factors": [stadium, {"kind": "ball", "radius": 0.8, "dim": 1}]}),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            BodyKind::Disk | BodyKind::Stadium => 1,
            _ => 2,
        }
    }

    /// Gauge written out by hand for each body.
    pub fn gauge_oracle(self, v: &[C64]) -> f64 {
        match self {
            BodyKind::Disk => v[0].norm(),
            BodyKind::Stadium => stadium_gauge(v[0]),
            BodyKind::Polydisk => (v[0].norm() / 1.0).max(v[1].norm() / 0.5),
            BodyKind::Product => stadium_gauge(v[0]).max(v[1].norm() / 0.8),
        }
    }
}

/// Node angles for `m` nodes, not aligned with the audit grid.
pub fn node_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| 0.3 + 2.0 * PI * j as f64 / m as f64).collect()
}

/// Data with gauge `level` at the first node and `0.8 level` elsewhere.
pub fn regression_values(kind: BodyKind, m: usize, level: f64) -> Vec<Vec<C64>> {
    (0..m)
        .map(|j| {
            let t = 1.0 + 2.0 * j as f64;
            let dir: Vec<C64> = match kind.dim() {
                1 => vec![C64::from_polar(1.0, 0.7 * t)],
                _ => vec![C64::from_polar(1.0, 0.7 * t), C64::from_polar(0.6, -1.3 * t)],
            };
            let g = kind.gauge_oracle(&dir);
            let target = if j == 0 { level } else { 0.8 * level };
            dir.into_iter().map(|z| z * (target / g)).collect()
        })
        .collect()
}

pub fn regression_spec(kind: BodyKind, m: usize, level: f64, grid: GridSpec, k_max: usize) -> ProblemSpec {
    let v = json!({
        "nodes": node_angles(m),
        "values": regression_values(kind, m, level),
        "body": kind.json(),
        "grid": grid,
        "k_max": k_max,
    });
    serde_json::from_value(v).expect("regression spec")
}

pub fn regression_problem(kind: BodyKind, m: usize, level: f64, grid: GridSpec, k_max: usize) -> InterpolationProblem {
    regression_spec(kind, m, level, grid, k_max)
        .build(&BodyRegistry::default())
        .expect("regression problem")
}

pub fn small_grid() -> GridSpec {
    GridSpec { radial: 24, angular: 48 }
}

pub fn nodes(angles: &[f64]) -> NodeSet {
    NodeSet::new(angles).unwrap()
}

pub fn vector(re_im: &[(f64, f64)]) -> Vector {
    Vector(re_im.iter().map(|&(a, b)| C64::new(a, b)).collect())
}
