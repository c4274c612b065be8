//! Interpolation into `C \ {0}` through the covering `exp: C -> C \ {0}`.
//! Each node is its own clopen piece, so every node gets an independent
//! branch of the logarithm.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk_algebra::{cr_residual, lagrange_extension, DiskPoint, Expr, HoloFunction, NodeSet};
use crate::error::{Error, Result};
use crate::numeric::{cis, C64};

/// Boundary samples for the radius of `g~`.
const RANGE_SAMPLES: usize = 4096;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftProblem {
    pub nodes: NodeSet,
    pub values: Vec<C64>,
    /// Logarithm branch per node; principal when empty.
    #[serde(default)]
    pub branch_offsets: Vec<i64>,
}

impl LiftProblem {
    pub fn new(nodes: NodeSet, values: Vec<C64>) -> Self {
        LiftProblem {
            nodes,
            values,
            branch_offsets: Vec::new(),
        }
    }

    fn branch(&self, j: usize) -> i64 {
        self.branch_offsets.get(j).copied().unwrap_or(0)
    }
}

/// The lift `g~` and `g = exp(g~)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lift {
    pub log: HoloFunction,
    pub g: HoloFunction,
}

pub fn clopen_partition_lift(p: &LiftProblem) -> Result<Lift> {
    if p.values.len() != p.nodes.len() {
        return Err(Error::SizeMismatch {
            what: "lift values",
            expected: p.nodes.len(),
            got: p.values.len(),
        });
    }
    if !p.branch_offsets.is_empty() && p.branch_offsets.len() != p.nodes.len() {
        return Err(Error::SizeMismatch {
            what: "branch offsets",
            expected: p.nodes.len(),
            got: p.branch_offsets.len(),
        });
    }
    let mut logs = Vec::with_capacity(p.values.len());
    for (j, f) in p.values.iter().enumerate() {
        if !(f.norm() > 0.0) {
            return Err(Error::ZeroTarget(j));
        }
        logs.push(C64::new(f.norm().ln(), f.arg() + 2.0 * PI * p.branch(j) as f64));
    }
    let log = lagrange_extension(&p.nodes, &logs)?;
    let g = HoloFunction {
        expr: Expr::Exp {
            arg: Box::new(log.expr.clone()),
        },
        sup_bound: None,
        node_values: p.nodes.angles().iter().copied().zip(p.values.iter().copied()).collect(),
    };
    Ok(Lift { log, g })
}

/// Annulus `{e^-cR <= |w| <= e^cR}`, which holds `exp` of the disk of
/// radius `cR`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeBound {
    pub radius: f64,
    pub c: f64,
    pub inner: f64,
    pub outer: f64,
}

impl RangeBound {
    pub fn contains(&self, w: C64) -> bool {
        let m = w.norm();
        m >= self.inner && m <= self.outer
    }
}

/// Radius of the smallest disk about 0 holding `g~` of the closed disk.
/// `g~` is a polynomial of degree `d`, so Bernstein's inequality turns the
/// sampled boundary maximum into a bound: the true maximum exceeds the
/// sampled one by a factor at most `1 / (1 - d pi / n)`.
#[allow(non_snake_case)]
pub fn range_bound_L(g_tilde: &HoloFunction, degree: usize, c: f64) -> Result<RangeBound> {
    if !(c >= 1.0) {
        return Err(Error::InvalidArgument(format!("interpolation constant {c} below 1")));
    }
    let n = RANGE_SAMPLES;
    let sampled = (0..n)
        .into_par_iter()
        .map(|k| g_tilde.eval_boundary(2.0 * PI * k as f64 / n as f64).norm())
        .reduce(|| 0.0, f64::max);
    let ratio = degree as f64 * PI / n as f64;
    if ratio >= 1.0 {
        return Err(Error::InvalidArgument(format!("degree {degree} too high for the range sample")));
    }
    let radius = sampled / (1.0 - ratio);
    Ok(RangeBound {
        radius,
        c,
        inner: (-c * radius).exp(),
        outer: (c * radius).exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub min_modulus: f64,
    pub range: RangeBound,
    /// Grid points whose image lies outside the range annulus.
    pub outside_range: usize,
    pub cr_residual: f64,
    pub passed: bool,
}

/// Lift, range bound and a polar-grid audit with about `points` samples.
pub fn audit_lift(p: &LiftProblem, points: usize) -> Result<(Lift, LiftReport)> {
    let lift = clopen_partition_lift(p)?;
    let degree = p.nodes.len().saturating_sub(1);
    let range = range_bound_L(&lift.log, degree, 1.0)?;
    let side = (points as f64).sqrt().ceil() as usize;
    let grid: Vec<DiskPoint> = (0..side)
        .flat_map(|i| {
            (0..side).map(move |j| {
                let t = 2.0 * PI * j as f64 / side as f64;
                if i + 1 == side {
                    DiskPoint::boundary(t)
                } else {
                    DiskPoint::interior((i as f64 / (side - 1) as f64) * cis(t))
                }
            })
        })
        .collect();
    let values: Vec<C64> = grid.par_iter().map(|&z| lift.g.eval_point(z)).collect();
    let max_f = p.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let residual = lift.g.node_residual();
    let tolerance = 1e-10 * (1.0 + max_f);
    let min_modulus = values.iter().map(|w| w.norm()).fold(f64::INFINITY, f64::min);
    let outside_range = values.iter().filter(|w| !range.contains(**w)).count();
    let cr = cr_residual(&lift.g, 64);
    let passed = residual <= tolerance && min_modulus > 0.0 && outside_range == 0 && cr <= 1e-6;
    let report = LiftReport {
        residual,
        tolerance,
        samples: grid.len(),
        min_modulus,
        range,
        outside_range,
        cr_residual: cr,
        passed,
    };
    Ok((lift, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_gives_a_constant() {
        let s = NodeSet::new(&[0.0]).unwrap();
        let e = std::f64::consts::E;
        let lift = clopen_partition_lift(&LiftProblem::new(s, vec![C64::new(e, 0.0)])).unwrap();
        assert!((lift.log.eval(C64::new(0.3, 0.1)).unwrap() - 1.0).norm() < 1e-15);
        assert!((lift.g.eval(C64::new(0.0, 0.0)).unwrap() - e).norm() < 1e-14);
    }

    #[test]
    fn two_nodes_and_branch_shift() {
        let s = NodeSet::new(&[0.0, PI]).unwrap();
        let vals = vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let mut p = LiftProblem::new(s, vals);
        let (a, ra) = audit_lift(&p, 10_000).unwrap();
        assert!(ra.passed, "{ra:?}");
        assert!((a.log.eval_boundary(PI) - C64::new(0.0, PI)).norm() < 1e-12);
        p.branch_offsets = vec![0, 1];
        let (b, rb) = audit_lift(&p, 10_000).unwrap();
        assert!(rb.passed);
        assert!(rb.residual <= 1e-12 && ra.residual <= 1e-12);
        let z = C64::new(0.1, 0.5);
        assert!((a.g.eval(z).unwrap() - b.g.eval(z).unwrap()).norm() > 1e-3);
    }

    #[test]
    fn zero_target_is_rejected() {
        let s = NodeSet::new(&[0.0, 1.0]).unwrap();
        let p = LiftProblem::new(s, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(clopen_partition_lift(&p), Err(Error::ZeroTarget(1))));
    }

    #[test]
    fn range_of_identity() {
        let z = HoloFunction::from(Expr::Var);
        let r = range_bound_L(&z, 1, 2.0).unwrap();
        assert!((r.radius - 1.0).abs() < 1e-3 && r.radius >= 1.0);
        assert!((r.outer * r.inner - 1.0).abs() < 1e-12);
        let zero = HoloFunction::from(Expr::Const { value: C64::new(0.0, 0.0) });
        let r0 = range_bound_L(&zero, 0, 1.0).unwrap();
        assert_eq!((r0.inner, r0.outer), (1.0, 1.0));
    }
}
