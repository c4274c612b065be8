//! Elements of the disk algebra as composition trees of primitives that are
//! holomorphic inside the disk and continuous up to the circle.

mod cr;
mod expr;
mod extension;
mod peak;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{angle_diff, cis, wrap_angle, C64};

pub use cr::{cr_residual, cr_residual_fn};
pub use expr::Expr;
pub use extension::{lagrange_extension, min_supnorm_extension, MinSupnorm};
pub use peak::{mobius, peak_exponent, peak_function, Mobius};

/// Default minimal angular separation of interpolation nodes.
pub const DEFAULT_SEP_MIN: f64 = 1e-3;

/// Separation below which two nodes are treated as the same point.
const DUPLICATE_SEP: f64 = 1e-12;

/// Distinct points of the unit circle, stored by angle in `[0, 2pi)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeSet {
    angles: Vec<f64>,
    #[serde(skip)]
    sep_min: f64,
}

impl NodeSet {
    pub fn new(angles: &[f64]) -> Result<Self> {
        Self::with_separation(angles, DEFAULT_SEP_MIN)
    }

    pub fn with_separation(angles: &[f64], sep_min: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument("node set is empty".into()));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        let angles: Vec<f64> = angles.iter().map(|&a| wrap_angle(a)).collect();
        let mut sep = f64::INFINITY;
        let mut witness = 0.0;
        for i in 0..angles.len() {
            for j in 0..i {
                let d = angle_diff(angles[i], angles[j]).abs();
                if d < sep {
                    sep = d;
                    witness = angles[i];
                }
            }
        }
        if sep < DUPLICATE_SEP {
            return Err(Error::DuplicateNodes(witness));
        }
        if sep < sep_min {
            return Err(Error::IllConditionedNodes { sep, min: sep_min });
        }
        Ok(NodeSet { angles, sep_min })
    }

    /// `m` equally spaced nodes starting at angle 0.
    pub fn equispaced(m: usize) -> Result<Self> {
        let angles: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
        Self::new(&angles)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn sep_min(&self) -> f64 {
        self.sep_min
    }

    pub fn points(&self) -> Vec<C64> {
        self.angles.iter().map(|&a| cis(a)).collect()
    }

    /// Euclidean distance from `z` to the nearest node.
    pub fn distance(&self, z: C64) -> f64 {
        self.angles.iter().map(|&a| (z - cis(a)).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Index of the node at this boundary angle, if any.
    pub fn node_at(&self, angle: f64) -> Option<usize> {
        self.angles.iter().position(|&a| angle_diff(a, angle).abs() < DUPLICATE_SEP)
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            angles: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        NodeSet::new(&raw.angles).map_err(serde::de::Error::custom)
    }
}

/// A point of the closed disk; boundary points may carry their exact angle so
/// that primitives can use closed-form boundary values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint {
    pub z: C64,
    pub angle: Option<f64>,
}

impl DiskPoint {
    pub fn interior(z: C64) -> Self {
        DiskPoint { z, angle: None }
    }

    pub fn boundary(angle: f64) -> Self {
        DiskPoint {
            z: cis(angle),
            angle: Some(wrap_angle(angle)),
        }
    }
}

/// Slack allowed on `|z| <= 1` for evaluation.
pub const DISK_TOLERANCE: f64 = 1e-12;

/// A disk-algebra element: an expression tree plus the claims attached to it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HoloFunction {
    pub expr: Expr,
    /// Claimed bound for the sup norm on the closed disk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_bound: Option<f64>,
    /// Declared values at boundary angles.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub node_values: Vec<(f64, C64)>,
}

impl From<Expr> for HoloFunction {
    fn from(expr: Expr) -> Self {
        HoloFunction {
            expr,
            sup_bound: None,
            node_values: Vec::new(),
        }
    }
}

impl HoloFunction {
    pub fn eval(&self, z: C64) -> Result<C64> {
        let r = z.norm();
        if !(r <= 1.0 + DISK_TOLERANCE) {
            return Err(Error::OutsideDisk(r));
        }
        Ok(self.expr.eval(DiskPoint::interior(z)))
    }

    pub fn eval_boundary(&self, angle: f64) -> C64 {
        self.expr.eval(DiskPoint::boundary(angle))
    }

    pub fn eval_point(&self, p: DiskPoint) -> C64 {
        self.expr.eval(p)
    }

    /// Largest deviation from the declared node values.
    pub fn node_residual(&self) -> f64 {
        self.node_values
            .iter()
            .map(|&(a, v)| (self.eval_boundary(a) - v).norm())
            .fold(0.0, f64::max)
    }

    /// Smallest real part met by a fractional-power base over the points.
    pub fn min_pow_base_re(&self, points: &[DiskPoint]) -> f64 {
        let mut m = f64::INFINITY;
        for &p in points {
            self.expr.visit_pow_bases(p, &mut |b| m = m.min(b.re));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_set_rejects_duplicates_and_crowding() {
        assert!(matches!(NodeSet::new(&[0.0, 2.0 * PI]), Err(Error::DuplicateNodes(_))));
        assert!(matches!(
            NodeSet::new(&[0.0, 1e-4]),
            Err(Error::IllConditionedNodes { .. })
        ));
        assert!(NodeSet::new(&[]).is_err());
        let s = NodeSet::new(&[-PI / 2.0, PI / 2.0]).unwrap();
        assert!((s.angles()[0] - 1.5 * PI).abs() < 1e-15);
        assert_eq!(s.node_at(-PI / 2.0), Some(0));
    }

    #[test]
    fn eval_rejects_points_outside_disk() {
        let f = HoloFunction::from(Expr::Var);
        assert!(matches!(f.eval(C64::new(1.1, 0.0)), Err(Error::OutsideDisk(_))));
        assert!(f.eval(C64::new(1.0 + 1e-13, 0.0)).is_ok());
    }

    #[test]
    fn node_set_json_round_trip() {
        let s = NodeSet::new(&[0.0, PI]).unwrap();
        let v = serde_json::to_string(&s).unwrap();
        let back: NodeSet = serde_json::from_str(&v).unwrap();
        assert_eq!(s.angles(), back.angles());
        assert!(serde_json::from_str::<NodeSet>(r#"{"angles": [1.0, 1.0]}"#).is_err());
    }
}
