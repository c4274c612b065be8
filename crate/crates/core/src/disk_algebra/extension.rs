use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{DiskPoint, Expr, HoloFunction, NodeSet};
use crate::error::{Error, Result};
use crate::numeric::C64;

/// Lawson reweighting sweeps per degree.
const LAWSON_ITERS: usize = 300;

/// Refinement factor of the grid used for the reported bound.
const REFINE: usize = 8;

fn check_values(s: &NodeSet, values: &[C64]) -> Result<()> {
    if values.len() != s.len() {
        return Err(Error::SizeMismatch {
            what: "node values",
            expected: s.len(),
            got: values.len(),
        });
    }
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Interpolating polynomial of degree `|S| - 1`.
pub fn lagrange_extension(s: &NodeSet, values: &[C64]) -> Result<HoloFunction> {
    check_values(s, values)?;
    Ok(HoloFunction {
        expr: Expr::Lagrange {
            angles: s.angles().to_vec(),
            values: values.to_vec(),
        },
        sup_bound: None,
        node_values: s.angles().iter().copied().zip(values.iter().copied()).collect(),
    })
}

fn lagrange_monomial(s: &NodeSet, values: &[C64]) -> Option<Vec<C64>> {
    let m = s.len();
    let pts = s.points();
    let v = DMatrix::from_fn(m, m, |r, c| pts[r].powi(c as i32));
    v.lu().solve(&DVector::from_column_slice(values)).map(|c| c.iter().copied().collect())
}

#[derive(Clone, Debug)]
pub struct MinSupnorm {
    pub function: HoloFunction,
    /// Upper bound for the sup norm on the closed disk.
    pub bound: f64,
    /// Degree of the returned polynomial.
    pub degree: usize,
}

/// Polynomial of degree at most `degree` interpolating the data whose
/// maximum modulus on a `grid`-point boundary sample is approximately
/// minimal (Lawson iteration), with a certified sup-norm bound.
pub fn min_supnorm_extension(s: &NodeSet, values: &[C64], degree: usize, grid: usize) -> Result<MinSupnorm> {
    check_values(s, values)?;
    let m = s.len();
    let data_max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if grid < degree + 2 || grid < 2 * m {
        return Err(Error::InvalidArgument(format!(
            "grid of {grid} points too small for degree {degree} with {m} nodes"
        )));
    }
    if degree + 1 < m {
        let coeffs = lagrange_monomial(s, values)
            .ok_or_else(|| Error::InvalidArgument("singular node system".into()))?;
        let scale = 1.0 + data_max;
        if coeffs[degree + 1..].iter().any(|c| c.norm() > 1e-12 * scale) {
            return Err(Error::InvalidArgument(format!(
                "no interpolant of degree {degree} through {m} nodes"
            )));
        }
        let f = HoloFunction::from(Expr::Poly {
            coeffs: coeffs[..=degree].to_vec(),
            arg: Expr::var(),
        });
        return Ok(finish(f, degree, grid, data_max, s, values));
    }

    let lag = lagrange_extension(s, values)?;
    let node_poly = node_polynomial(s);
    let mut best = finish(lag.clone(), m - 1, grid, data_max, s, values);
    for d in m..=degree {
        let q = lawson(&lag, &node_poly, d - m, grid);
        let f = HoloFunction::from(Expr::Sum {
            terms: vec![
                lag.expr.clone(),
                Expr::Product {
                    factors: vec![
                        node_poly.clone(),
                        Expr::Poly {
                            coeffs: q,
                            arg: Expr::var(),
                        },
                    ],
                },
            ],
        });
        let cand = finish(f, d, grid, data_max, s, values);
        if cand.bound < best.bound {
            best = cand;
        }
    }
    Ok(best)
}

fn node_polynomial(s: &NodeSet) -> Expr {
    Expr::Product {
        factors: s
            .points()
            .into_iter()
            .map(|p| Expr::Poly {
                coeffs: vec![-p, C64::new(1.0, 0.0)],
                arg: Expr::var(),
            })
            .collect(),
    }
}

/// Coefficients of `q` minimising `max_k |L(z_k) + Pi(z_k) q(z_k)|`.
fn lawson(lag: &HoloFunction, node_poly: &Expr, qdeg: usize, grid: usize) -> Vec<C64> {
    let n = qdeg + 1;
    let pts: Vec<DiskPoint> = (0..grid).map(|k| DiskPoint::boundary(2.0 * PI * k as f64 / grid as f64)).collect();
    let l: Vec<C64> = pts.iter().map(|&p| lag.eval_point(p)).collect();
    let a = DMatrix::from_fn(grid, n, |k, i| node_poly.eval(pts[k]) * pts[k].z.powi(i as i32));
    let mut u = vec![1.0 / grid as f64; grid];
    let mut best = (f64::INFINITY, vec![C64::new(0.0, 0.0); n]);
    for _ in 0..LAWSON_ITERS {
        let sw: Vec<f64> = u.iter().map(|w| w.sqrt()).collect();
        let aw = DMatrix::from_fn(grid, n, |k, i| a[(k, i)] * sw[k]);
        let bw = DVector::from_fn(grid, |k, _| -l[k] * sw[k]);
        let Ok(c) = aw.svd(true, true).solve(&bw, 1e-14) else { break };
        let resid: Vec<f64> = (0..grid)
            .map(|k| (l[k] + (0..n).map(|i| a[(k, i)] * c[i]).sum::<C64>()).norm())
            .collect();
        let worst = resid.iter().copied().fold(0.0, f64::max);
        if worst < best.0 {
            best = (worst, c.iter().copied().collect());
        }
        let total: f64 = u.iter().zip(&resid).map(|(w, r)| w * r).sum();
        if !(total > 0.0) {
            break;
        }
        for (w, r) in u.iter_mut().zip(&resid) {
            *w *= r / total;
        }
    }
    best.1
}

/// Attaches the certified bound: every boundary angle is within `h` of a
/// grid angle, so Bernstein's inequality gives
/// `sup |p| <= max_grid |p| / (1 - d h)` for degree `d`.
fn finish(mut f: HoloFunction, degree: usize, grid: usize, data_max: f64, s: &NodeSet, values: &[C64]) -> MinSupnorm {
    let fine = REFINE * grid;
    let grid_max = (0..fine)
        .map(|k| f.eval_boundary(2.0 * PI * k as f64 / fine as f64).norm())
        .fold(0.0, f64::max);
    let half_step = PI / fine as f64;
    let factor = 1.0 - degree as f64 * half_step;
    let bound = if degree == 0 { grid_max } else { grid_max / factor };
    let bound = bound.max(data_max);
    f.sup_bound = Some(bound);
    f.node_values = s.angles().iter().copied().zip(values.iter().copied()).collect();
    MinSupnorm { function: f, bound, degree }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn single_node_is_constant() {
        let s = NodeSet::new(&[0.0]).unwrap();
        let f = lagrange_extension(&s, &[c(5.0)]).unwrap();
        assert!((f.eval(C64::new(0.3, 0.2)).unwrap() - 5.0).norm() < 1e-15);
    }

    #[test]
    fn two_antipodal_nodes_give_identity() {
        let s = NodeSet::new(&[0.0, PI]).unwrap();
        let f = lagrange_extension(&s, &[c(1.0), c(-1.0)]).unwrap();
        let z = C64::new(0.3, -0.4);
        assert!((f.eval(z).unwrap() - z).norm() < 1e-15);
    }

    #[test]
    fn three_node_residual() {
        let s = NodeSet::new(&[0.0, PI / 2.0, PI]).unwrap();
        let f = lagrange_extension(&s, &[c(1.0), c(0.0), c(1.0)]).unwrap();
        for (p, v) in s.points().iter().zip([1.0, 0.0, 1.0]) {
            assert!((f.eval(*p).unwrap() - v).norm() < 1e-14);
        }
        assert_eq!(f.node_residual(), 0.0);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let s = NodeSet::new(&[0.0, 1.0]).unwrap();
        assert!(matches!(lagrange_extension(&s, &[c(1.0)]), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn constant_data_has_bound_one() {
        let s = NodeSet::new(&[0.0]).unwrap();
        for d in [0, 3] {
            let r = min_supnorm_extension(&s, &[c(1.0)], d, 512).unwrap();
            assert!((r.bound - 1.0).abs() < 1e-12, "degree {d}: {}", r.bound);
        }
        let s2 = NodeSet::new(&[0.0, PI]).unwrap();
        let r = min_supnorm_extension(&s2, &[c(1.0), c(1.0)], 0, 512).unwrap();
        assert_eq!(r.bound, 1.0);
        assert!(min_supnorm_extension(&s2, &[c(1.0), c(-1.0)], 0, 512).is_err());
    }

    #[test]
    fn identity_data_bound_does_not_grow() {
        let s = NodeSet::new(&[0.0, PI]).unwrap();
        let vals = [c(1.0), c(-1.0)];
        let mut prev = f64::INFINITY;
        for d in 1..=6 {
            let r = min_supnorm_extension(&s, &vals, d, 512).unwrap();
            assert!(r.bound >= 1.0 && r.bound <= 1.0 + 1e-2, "{}", r.bound);
            assert!(r.bound <= prev);
            assert!(r.function.node_residual() < 1e-12);
            prev = r.bound;
        }
    }

    #[test]
    fn extra_degrees_reduce_bound_for_rough_data() {
        let s = NodeSet::new(&[0.0, 0.5, 1.0]).unwrap();
        let vals = [c(1.0), c(-1.0), c(1.0)];
        let low = min_supnorm_extension(&s, &vals, 2, 512).unwrap();
        let high = min_supnorm_extension(&s, &vals, 12, 512).unwrap();
        assert!(high.bound < low.bound, "{} vs {}", high.bound, low.bound);
        assert!(high.bound >= 1.0);
    }
}
