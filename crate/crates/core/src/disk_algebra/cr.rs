use std::f64::consts::PI;

use rayon::prelude::*;

use super::HoloFunction;
use crate::numeric::{cis, C64, I};

const STEP: f64 = 1e-5;
const MAX_RADIUS: f64 = 0.95;

/// Maximum over a polar grid of `|f_x + i f_y|`, relative to the local
/// gradient or, where that is small, the grid-mean gradient.
pub fn cr_residual(f: &HoloFunction, grid: usize) -> f64 {
    cr_residual_fn(|z| f.expr.eval(super::DiskPoint::interior(z)), grid)
}

pub fn cr_residual_fn(f: impl Fn(C64) -> C64 + Sync, grid: usize) -> f64 {
    let grid = grid.max(2);
    let pts: Vec<C64> = (0..grid)
        .flat_map(|i| {
            let r = MAX_RADIUS * i as f64 / (grid - 1) as f64;
            (0..grid).map(move |j| r * cis(2.0 * PI * j as f64 / grid as f64))
        })
        .collect();
    let samples: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|&z| {
            let fx = (f(z + STEP) - f(z - STEP)) / (2.0 * STEP);
            let fy = (f(z + I * STEP) - f(z - I * STEP)) / (2.0 * STEP);
            ((fx + I * fy).norm(), fx.norm().max(fy.norm()))
        })
        .collect();
    let mean = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    samples
        .iter()
        .map(|&(res, grad)| {
            let scale = grad.max(mean);
            if scale > 0.0 {
                res / scale
            } else {
                res
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk_algebra::Expr;

    #[test]
    fn cube_is_holomorphic() {
        let f = HoloFunction::from(Expr::Poly {
            coeffs: vec![0.0.into(), 0.0.into(), 0.0.into(), 1.0.into()],
            arg: Expr::var(),
        });
        assert!(cr_residual(&f, 30) <= 1e-8);
    }

    #[test]
    fn conjugation_is_rejected() {
        let r = cr_residual_fn(|z| z.conj(), 20);
        assert!((r - 2.0).abs() < 1e-6, "{r}");
    }
}
