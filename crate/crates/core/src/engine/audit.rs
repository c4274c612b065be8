//! Grid audit of an assembled extension. Every inequality the construction
//! relies on is re-measured on the audit grid, in normalised units.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Prepared, Stage};
use crate::conformal::{containment_of, ContainmentReport};
use crate::disk_algebra::{DiskPoint, HoloFunction};
use crate::numeric::{norm, C64};

/// Points at which the assembled expressions are compared with the grid
/// computation.
const DAG_PROBES: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageAudit {
    pub index: usize,
    pub eps: f64,
    pub containment: ContainmentReport,
    /// `max |h_k|` on the compact set `E_k`.
    pub max_on_compact: f64,
    pub interior_max: f64,
    pub boundary_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub grid_points: usize,
    pub interp_residual: f64,
    pub interp_tolerance: f64,
    /// Largest difference between the expression trees and the grid values.
    pub dag_consistency: f64,
    /// `1 - max p(h - c)` off the node collars, in the original gauge.
    pub interior_margin: f64,
    /// `1 - max p(h - c) / rho_star` off the node collars.
    pub relative_margin: f64,
    /// `max p(h - c)` over the whole grid.
    pub max_gauge: f64,
    /// Smallest `B(x) - p~(h~(x))` for the pointwise chain bound `B`.
    pub chain_min_slack: f64,
    /// Smallest slack of the truncated-sum inequality, `1 <= n < K`.
    pub finite_sum_min_slack: Option<f64>,
    /// Slack of the epsilon step inequality for each `n < K`.
    pub eps_step_slack: Vec<f64>,
    /// Smallest `sum_k w_k |h_k| theta_k(|h_k|) ||g~|| - ||h~ - h~'||`.
    pub h_gap_slack: f64,
    pub stages: Vec<StageAudit>,
    /// Grid points lying in `U_{n+1}` but not in `U_n`.
    pub monotone_violations: usize,
    /// Lipschitz bound times the largest step of `h~` between neighbouring
    /// grid points; how far the margin could fall between samples.
    pub cell_allowance: f64,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Values at one grid point, for CSV dumps.
#[derive(Clone, Debug)]
pub struct GridSample {
    pub z: C64,
    pub on_circle: bool,
    pub dist: f64,
    /// `p~(g~)`.
    pub gauge_g: f64,
    /// `p~(h~)`.
    pub gauge_h: f64,
    /// `sum_k w_k h_k`.
    pub multiplier: C64,
    pub stage_values: Vec<C64>,
    pub h: Vec<C64>,
}

struct PointAudit {
    sample: GridSample,
    chain: f64,
    finite_sum: Option<f64>,
    gap: f64,
    /// Deepest `n` with the point in `U_n`.
    depth: usize,
    monotone_ok: bool,
}

fn audit_point(prep: &Prepared, stages: &[Stage], i: usize) -> PointAudit {
    let sched = &prep.schedule;
    let kk = stages.len();
    let g = &prep.g_grid[i];
    let vals: Vec<C64> = stages.iter().map(|s| s.eval_strip(prep.chi_strip[i])).collect();
    let mult: C64 = stages.iter().zip(&vals).map(|(s, v)| s.weight * v).sum();
    let h_norm: Vec<C64> = g.iter().map(|z| mult * z).collect();
    let gauge_h = prep.body.gauge_relative(&h_norm);
    let gauge_g = prep.gauge_grid[i];

    let abs_sum: f64 = stages.iter().zip(&vals).map(|(s, v)| s.weight * v.norm()).sum();
    let arc = |k: usize, v: C64| sched.theta(k, v.norm()) * v.norm();
    let spread: f64 = stages.iter().zip(&vals).map(|(s, v)| s.weight * arc(s.index, *v)).sum();
    let modulus = &sched.omega.modulus;
    let chain = abs_sum * gauge_g + modulus.eval(spread) - gauge_h;
    let real: Vec<C64> = g.iter().map(|z| abs_sum * z).collect();
    let diff: Vec<C64> = h_norm.iter().zip(&real).map(|(a, b)| a - b).collect();
    let gap = spread * norm(g) - norm(&diff);

    let in_u = |n: usize| n == 0 || prep.in_stage_set(n, i);
    let depth = (0..=kk).take_while(|&n| in_u(n)).last().unwrap_or(0);
    let monotone_ok = (1..=kk).all(|n| !in_u(n) || in_u(n - 1));
    let finite_sum = if prep.chi_strip[i].is_some() && depth >= 1 && depth < kk {
        let n = depth;
        let e = sched.eps[n];
        let partial: f64 = stages[..n].iter().zip(&vals).map(|(s, v)| s.weight * v.norm()).sum();
        let partial_spread: f64 = stages[..n].iter().zip(&vals).map(|(s, v)| s.weight * arc(s.index, *v)).sum();
        Some(1.0 - e - partial * (1.0 + e) - sched.omega.eval(partial_spread))
    } else {
        None
    };

    let m = prep.normalization.m_norm;
    let c = &prep.normalization.center;
    let h: Vec<C64> = h_norm.iter().zip(&c.0).map(|(z, c0)| c0 + z * m).collect();
    PointAudit {
        sample: GridSample {
            z: prep.grid.points[i].z,
            on_circle: prep.grid.on_circle[i],
            dist: prep.grid.dist[i],
            gauge_g,
            gauge_h,
            multiplier: mult,
            stage_values: vals,
            h,
        },
        chain,
        finite_sum,
        gap,
        depth,
        monotone_ok,
    }
}

/// Re-measures every inequality of the construction on the audit grid.
pub fn audit_margins(prep: &Prepared, stages: &[Stage], h: &[HoloFunction]) -> (AuditReport, Vec<GridSample>) {
    let tol = prep.problem.tolerances;
    let sched = &prep.schedule;
    let n_pts = prep.grid.len();
    let points: Vec<PointAudit> = (0..n_pts).into_par_iter().map(|i| audit_point(prep, stages, i)).collect();

    let max_f = prep.problem.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let interp_tolerance = tol.interpolation * (1.0 + max_f);
    let interp_residual = h.iter().map(HoloFunction::node_residual).fold(0.0, f64::max);

    let step = (n_pts / DAG_PROBES).max(1);
    let dag_consistency = (0..n_pts)
        .step_by(step)
        .map(|i| {
            let p: DiskPoint = prep.grid.points[i];
            h.iter()
                .zip(&points[i].sample.h)
                .map(|(f, &v)| (f.eval_point(p) - v).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    let collar = prep.problem.collar;
    let rho = prep.normalization.rho_star;
    let off_collar = || points.iter().filter(|p| p.sample.dist >= collar);
    let max_rel = off_collar().map(|p| p.sample.gauge_h).fold(0.0, f64::max);
    let relative_margin = 1.0 - max_rel;
    let interior_margin = 1.0 - max_rel * rho;
    let max_gauge = points.iter().map(|p| p.sample.gauge_h * rho).fold(0.0, f64::max);
    let chain_min_slack = points.iter().map(|p| p.chain).fold(f64::INFINITY, f64::min);
    let finite_sum_min_slack = points.iter().filter_map(|p| p.finite_sum).reduce(f64::min);
    let h_gap_slack = points.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min);
    let monotone_violations = points.iter().filter(|p| !p.monotone_ok).count();

    let c = (sched.m_gauge / sched.m_norm).max(1.0);
    let eps_step_slack: Vec<f64> = (0..stages.len())
        .map(|n| {
            let t = sched.m_norm * sched.eps[n + 1] / 2f64.powi(n as i32);
            sched.eps[n] - c * t - sched.omega.modulus.eval(t)
        })
        .collect();

    let stage_audits: Vec<StageAudit> = stages
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let images: Vec<C64> = points.iter().map(|p| p.sample.stage_values[j]).collect();
            let profile = sched.theta_profile(s.index).ok();
            let max_on = |pred: &dyn Fn(&PointAudit) -> bool| {
                points
                    .iter()
                    .filter(|p| pred(p))
                    .map(|p| p.sample.stage_values[j].norm())
                    .fold(0.0, f64::max)
            };
            StageAudit {
                index: s.index,
                eps: s.eps,
                containment: containment_of(&images, profile.as_ref()),
                max_on_compact: max_on(&|p| p.depth < s.index),
                interior_max: max_on(&|p| !p.sample.on_circle),
                boundary_max: max_on(&|p| p.sample.on_circle),
            }
        })
        .collect();

    let ang = prep.grid.spec.angular;
    let mut jump = 0.0f64;
    for i in 1..n_pts {
        let next = if i % ang == 0 { i + 1 - ang } else { i + 1 };
        let d: Vec<C64> = points[i]
            .sample
            .h
            .iter()
            .zip(&points[next].sample.h)
            .map(|(a, b)| a - b)
            .collect();
        jump = jump.max(norm(&d) / prep.normalization.m_norm);
    }
    let cell_allowance = prep.body.lipschitz_bound() * jump;

    let mut failures = Vec::new();
    if !(interp_residual <= interp_tolerance) {
        failures.push(format!("interpolation residual {interp_residual:e} exceeds {interp_tolerance:e}"));
    }
    if !(dag_consistency <= interp_tolerance) {
        failures.push(format!("expression values differ from the grid by {dag_consistency:e}"));
    }
    if !(relative_margin > 0.0) {
        failures.push(format!("relative margin {relative_margin:e} is not positive"));
    }
    if !(max_gauge <= 1.0 + tol.slack) {
        failures.push(format!("gauge {max_gauge} exceeds 1"));
    }
    if !(chain_min_slack >= -tol.slack) {
        failures.push(format!("chain bound violated by {:e}", -chain_min_slack));
    }
    if !(h_gap_slack >= -tol.slack) {
        failures.push(format!("angular gap bound violated by {:e}", -h_gap_slack));
    }
    for (n, s) in eps_step_slack.iter().enumerate() {
        if !(*s >= -tol.slack) {
            failures.push(format!("epsilon step {n} violated by {:e}", -s));
        }
    }
    if monotone_violations > 0 {
        failures.push(format!("{monotone_violations} grid points break U_(n+1) in U_n"));
    }
    for s in &stage_audits {
        if !s.containment.passed {
            failures.push(format!("stage {} leaves its horn", s.index));
        }
        if !(s.max_on_compact <= s.eps) {
            failures.push(format!("stage {}: |h| = {} on E exceeds eps = {}", s.index, s.max_on_compact, s.eps));
        }
        if !(s.interior_max <= s.boundary_max + tol.maximum_principle) {
            failures.push(format!("stage {}: interior maximum above boundary maximum", s.index));
        }
    }

    let report = AuditReport {
        grid_points: n_pts,
        interp_residual,
        interp_tolerance,
        dag_consistency,
        interior_margin,
        relative_margin,
        max_gauge,
        chain_min_slack,
        finite_sum_min_slack,
        eps_step_slack,
        h_gap_slack,
        stages: stage_audits,
        monotone_violations,
        cell_allowance,
        passed: failures.is_empty(),
        failures,
    };
    (report, points.into_iter().map(|p| p.sample).collect())
}
