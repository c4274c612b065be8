//! Range-constrained interpolation `h = sum_k w_k h_k g`: a linear extension
//! `g` of the data, multiplied by peak-type stage functions `h_k` whose
//! values lie in thin horns, so that `h` interpolates exactly and stays
//! strictly inside the body off the nodes.

mod audit;
mod problem;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{build_cusp_map, ConformalMap, CuspProfile};
use crate::disk_algebra::{lagrange_extension, peak_exponent, DiskPoint, Expr, HoloFunction, NodeSet};
use crate::error::{Error, Result};
use crate::numeric::{artanh_exp_neg, cis, norm, Vector, C64};
use crate::schedule::{build_omega, Schedule, ScheduleSummary};
use crate::star_body::{hull_body, modulus_bound, ModulusBound, ModulusSampling, StarBody};

pub use audit::{audit_margins, AuditReport, GridSample, StageAudit};
pub use problem::{GridSpec, ProblemSpec, Tolerances};

/// Gauge slack allowed for data on the boundary of the body.
pub const DATA_TOL: f64 = 1e-9;

/// Points sampled on `|w| = r` when choosing the Mobius shift.
const SHIFT_SAMPLES: usize = 512;

/// Fraction of `eps` the sampled stage modulus may reach on `|w| = r`.
const SHIFT_SAFETY: f64 = 0.95;

/// Bisection steps for the Mobius shift.
const SHIFT_BISECTIONS: usize = 60;

/// Boundary samples used for the norm bound of the linear extension.
const NORM_SAMPLES: usize = 4096;

#[derive(Clone, Debug)]
pub struct InterpolationProblem {
    pub nodes: NodeSet,
    pub values: Vec<Vector>,
    pub body: StarBody,
    /// Radius of the neighbourhood `U = {dist(., S) < delta}`.
    pub delta: f64,
    /// Collar around the nodes excluded from the strict-margin audit.
    pub collar: f64,
    pub k_max: usize,
    pub grid: GridSpec,
    pub conformal_n: usize,
    pub shrink: f64,
    pub psi_grid: usize,
    pub modulus: ModulusSampling,
    pub tolerances: Tolerances,
}

impl InterpolationProblem {
    pub fn new(nodes: NodeSet, values: Vec<Vector>, body: StarBody) -> Result<Self> {
        let p = InterpolationProblem {
            nodes,
            values,
            body,
            delta: 0.2,
            collar: 0.01,
            k_max: crate::schedule::DEFAULT_DEPTH,
            grid: GridSpec::default(),
            conformal_n: 512,
            shrink: crate::conformal::DEFAULT_SHRINK,
            psi_grid: crate::schedule::DEFAULT_PSI_GRID,
            modulus: ModulusSampling::default(),
            tolerances: Tolerances::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.nodes.len() {
            return Err(Error::SizeMismatch {
                what: "node values",
                expected: self.nodes.len(),
                got: self.values.len(),
            });
        }
        for v in &self.values {
            if v.dim() != self.body.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.body.dim(),
                    got: v.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        if !(self.delta > 0.0 && self.delta < 2.0) {
            return Err(Error::ImproperNeighbourhood(self.delta));
        }
        if !(self.collar > 0.0 && self.collar < self.delta) {
            return Err(Error::InvalidArgument(format!(
                "collar {} must lie in (0, delta)",
                self.collar
            )));
        }
        if self.grid.radial < 2 || self.grid.angular < 3 {
            return Err(Error::InvalidArgument("audit grid too coarse".into()));
        }
        Ok(())
    }
}

/// Polar audit grid of the closed disk; the outer ring lies on the circle.
#[derive(Clone, Debug)]
pub struct AuditGrid {
    pub points: Vec<DiskPoint>,
    /// Distance to the node set.
    pub dist: Vec<f64>,
    pub on_circle: Vec<bool>,
    pub spec: GridSpec,
}

impl AuditGrid {
    pub fn polar(spec: GridSpec, nodes: &NodeSet) -> Self {
        let mut points = vec![DiskPoint::interior(C64::new(0.0, 0.0))];
        let mut on_circle = vec![false];
        for i in 1..spec.radial {
            let r = i as f64 / (spec.radial - 1) as f64;
            for j in 0..spec.angular {
                let t = 2.0 * PI * j as f64 / spec.angular as f64;
                if i + 1 == spec.radial {
                    points.push(DiskPoint::boundary(t));
                    on_circle.push(true);
                } else {
                    points.push(DiskPoint::interior(r * cis(t)));
                    on_circle.push(false);
                }
            }
        }
        let dist = points.iter().map(|p| nodes.distance(p.z)).collect();
        AuditGrid {
            points,
            dist,
            on_circle,
            spec,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The coordinatewise Lagrange extension and the scalars derived from it.
#[derive(Clone, Debug)]
pub struct LinearExtension {
    pub components: Vec<HoloFunction>,
    /// `max ||g||` over the sample.
    pub m_norm: f64,
    /// `max p(g)` over the sample, when a body is given.
    pub m_gauge: Option<f64>,
    /// Diameter of the balanced convex hull of the sampled values.
    pub diam: f64,
}

impl LinearExtension {
    pub fn eval(&self, p: DiskPoint) -> Vec<C64> {
        self.components.iter().map(|f| f.eval_point(p)).collect()
    }
}

/// Coordinatewise Lagrange extension of vector data. The norm bound is taken
/// over `samples` boundary points, where the maximum of `||g||` lives.
pub fn linear_vector_extension(
    nodes: &NodeSet,
    values: &[Vector],
    body: Option<&StarBody>,
    samples: usize,
) -> Result<LinearExtension> {
    let dim = values.first().map(Vector::dim).ok_or(Error::DegenerateData)?;
    let components = (0..dim)
        .map(|i| {
            let col: Vec<C64> = values.iter().map(|v| v.0[i]).collect();
            lagrange_extension(nodes, &col)
        })
        .collect::<Result<Vec<_>>>()?;
    let ext = LinearExtension {
        components,
        m_norm: 0.0,
        m_gauge: None,
        diam: 0.0,
    };
    let pts: Vec<DiskPoint> = (0..samples)
        .map(|k| DiskPoint::boundary(2.0 * PI * k as f64 / samples as f64))
        .collect();
    let vals: Vec<Vec<C64>> = pts.par_iter().map(|&p| ext.eval(p)).collect();
    let m_norm = vals.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let m_gauge = body.map(|b| vals.iter().map(|v| b.gauge_relative(v)).fold(0.0, f64::max));
    Ok(LinearExtension {
        m_norm,
        m_gauge,
        diam: 2.0 * m_norm,
        ..ext
    })
}

/// Scalars that make the problem scale-free: data are centered, the gauge
/// is divided by `rho_star` and vectors by `m_norm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub center: Vector,
    /// `max_S p(f)`.
    pub rho_star: f64,
    /// `max ||g||` over the audit grid and boundary samples.
    pub m_norm: f64,
    /// `max p~(g~)` in normalised units.
    pub m_gauge: f64,
    /// Diameter of the hull in normalised units.
    pub diam: f64,
}

/// Problem state shared by stage construction and the audit.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub problem: InterpolationProblem,
    pub normalization: Normalization,
    pub g: LinearExtension,
    /// Centered body scaled so that its gauge is `p(m v) / rho_star`.
    pub body: StarBody,
    pub modulus: ModulusBound,
    pub schedule: Schedule,
    pub grid: AuditGrid,
    /// Normalised `g~` on the grid.
    pub g_grid: Vec<Vec<C64>>,
    pub gauge_grid: Vec<f64>,
    /// `artanh(chi)` on the grid, `None` on nodes.
    pub chi_strip: Vec<Option<C64>>,
    pub peak_exponent: Expr,
}

impl Prepared {
    /// Grid indices in `U_n = {x in U : p~(g~(x)) < 1 + eps_n}`.
    pub fn in_stage_set(&self, n: usize, idx: usize) -> bool {
        self.grid.dist[idx] < self.problem.delta && self.gauge_grid[idx] < 1.0 + self.schedule.eps[n]
    }
}

/// Linear extension, normalisation, modulus bound and schedule.
pub fn prepare(problem: &InterpolationProblem) -> Result<Prepared> {
    problem.validate()?;
    let body = &problem.body;
    let center = body.center().clone();
    let centered: Vec<Vector> = problem.values.iter().map(|v| v - &center).collect();
    let gauges: Vec<f64> = centered.iter().map(|v| body.gauge_relative(&v.0)).collect();
    if let Some((node, &gauge)) = gauges.iter().enumerate().find(|(_, &p)| !(p <= 1.0 + DATA_TOL)) {
        return Err(Error::DataOutsideBody { node, gauge });
    }
    let rho_star = gauges.iter().copied().fold(0.0, f64::max);
    if rho_star <= 0.0 {
        return Err(Error::DegenerateData);
    }

    let g = linear_vector_extension(&problem.nodes, &centered, Some(body), NORM_SAMPLES)?;
    let grid = AuditGrid::polar(problem.grid, &problem.nodes);
    let raw: Vec<Vec<C64>> = grid.points.par_iter().map(|&p| g.eval(p)).collect();
    let m_norm = raw.iter().map(|v| norm(v)).fold(g.m_norm, f64::max);
    let scaled = StarBody::centered(body.gauge().clone()).scaled(rho_star / m_norm)?;
    let g_grid: Vec<Vec<C64>> = raw
        .into_iter()
        .map(|v| v.into_iter().map(|z| z / m_norm).collect())
        .collect();
    let gauge_grid: Vec<f64> = g_grid.par_iter().map(|v| scaled.gauge_relative(v)).collect();
    let m_gauge = gauge_grid
        .iter()
        .copied()
        .fold(g.m_gauge.unwrap_or(0.0) / rho_star, f64::max);

    let modulus = modulus_bound(&scaled, 1.0, problem.modulus)?;
    let omega = build_omega(modulus.clone(), 2.0, true)?;
    let schedule = Schedule::build(omega, 1.0, m_gauge, problem.k_max, problem.psi_grid)?;

    let exponent = peak_exponent(&problem.nodes);
    let chi_strip: Vec<Option<C64>> = grid
        .points
        .par_iter()
        .map(|&p| artanh_exp_neg(exponent.eval(p)))
        .collect();

    Ok(Prepared {
        problem: problem.clone(),
        normalization: Normalization {
            center,
            rho_star,
            m_norm,
            m_gauge,
            diam: 2.0,
        },
        g,
        body: scaled,
        modulus,
        schedule,
        grid,
        g_grid,
        gauge_grid,
        chi_strip,
        peak_exponent: exponent,
    })
}

/// One stage `h_eps = G(g_a(chi))` with `a = -tanh(tau)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Stage {
    pub index: usize,
    pub eps: f64,
    pub weight: f64,
    /// Mobius shift in strip units.
    pub tau: f64,
    /// Radius with `|chi| < radius` on the compact set.
    pub radius: f64,
    pub max_chi_on_compact: f64,
    pub compact_points: usize,
    pub map: Arc<ConformalMap>,
}

impl Stage {
    /// Stage value from `artanh(chi)`, exactly 1 on the nodes.
    pub fn eval_strip(&self, chi_strip: Option<C64>) -> C64 {
        match chi_strip {
            None => self.map.endpoint_one(),
            Some(s) => self.map.eval_strip(s - self.tau),
        }
    }

    pub fn expr(&self, exponent: &Expr) -> Expr {
        Expr::HornStage {
            exponent: Box::new(exponent.clone()),
            shift: self.tau,
            map: self.map.clone(),
        }
    }
}

/// Single stage function: values in the closed horn of the map, equal
/// to 1 on `S`, and at most `eps` on the compact set given by the points
/// `compact` (which must stay away from `S`).
pub fn build_h_eps(nodes: &NodeSet, eps: f64, compact: &[DiskPoint], map: Arc<ConformalMap>) -> Result<(HoloFunction, Stage)> {
    let exponent = peak_exponent(nodes);
    let strips: Vec<Option<C64>> = compact.iter().map(|&p| artanh_exp_neg(exponent.eval(p))).collect();
    let stage = stage_from_strips(0, eps, 1.0, &strips, map)?;
    let f = HoloFunction {
        expr: stage.expr(&exponent),
        sup_bound: Some(1.0),
        node_values: nodes.angles().iter().map(|&a| (a, C64::new(1.0, 0.0))).collect(),
    };
    Ok((f, stage))
}

fn stage_from_strips(index: usize, eps: f64, weight: f64, compact: &[Option<C64>], map: Arc<ConformalMap>) -> Result<Stage> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps {eps} outside (0, 1)")));
    }
    if compact.is_empty() {
        return Err(Error::InvalidArgument("compact set is empty".into()));
    }
    let mut max_chi = 0.0f64;
    for s in compact {
        match s {
            None => return Err(Error::CompactTouchesPeakSet(1.0)),
            Some(s) => max_chi = max_chi.max(s.tanh().norm()),
        }
    }
    if max_chi >= 1.0 - 1e-6 {
        return Err(Error::CompactTouchesPeakSet(max_chi));
    }
    let radius = max_chi + (0.5 * (1.0 - max_chi)).min(0.01);
    let circle: Vec<C64> = (0..SHIFT_SAMPLES)
        .map(|j| (radius * cis(2.0 * PI * j as f64 / SHIFT_SAMPLES as f64)).atanh())
        .collect();
    let target = SHIFT_SAFETY * eps;
    let ok = |tau: f64| circle.iter().all(|&s| map.eval_strip(s - tau).norm() <= target);
    let tau = if ok(0.0) {
        0.0
    } else {
        let mut hi = 1.0;
        while !ok(hi) {
            hi *= 2.0;
            if hi > 1e7 {
                return Err(Error::EpsilonUnreachable(eps));
            }
        }
        let mut lo = 0.5 * hi;
        if hi == 1.0 {
            lo = 0.0;
        }
        for _ in 0..SHIFT_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(Stage {
        index,
        eps,
        weight,
        tau,
        radius,
        max_chi_on_compact: max_chi,
        compact_points: compact.len(),
        map,
    })
}

/// Conformal maps and shifts for every stage of the schedule.
pub fn build_stages(prep: &Prepared) -> Result<Vec<Stage>> {
    let sched = &prep.schedule;
    let profiles: Vec<CuspProfile> = sched.theta_profiles()?;
    let maps: Vec<Result<ConformalMap>> = profiles
        .par_iter()
        .map(|p| build_cusp_map(p, prep.problem.conformal_n, prep.problem.shrink))
        .collect();
    let mut stages = Vec::with_capacity(sched.k_max);
    for (k, map) in (1..=sched.k_max).zip(maps) {
        let map = Arc::new(map.map_err(|e| e.at_stage(k))?);
        let compact: Vec<Option<C64>> = (0..prep.grid.len())
            .filter(|&i| !prep.in_stage_set(k, i))
            .map(|i| prep.chi_strip[i])
            .collect();
        if compact.is_empty() {
            return Err(Error::ImproperNeighbourhood(prep.problem.delta).at_stage(k));
        }
        let stage = stage_from_strips(k, sched.eps[k], sched.weights[k - 1], &compact, map).map_err(|e| e.at_stage(k))?;
        stages.push(stage);
    }
    Ok(stages)
}

/// `h = c + (sum_k w_k h_k) g` as one expression per coordinate.
pub fn assemble_functions(prep: &Prepared, stages: &[Stage]) -> Vec<HoloFunction> {
    let weighted = Expr::Sum {
        terms: stages
            .iter()
            .map(|s| Expr::Scale {
                factor: C64::new(s.weight, 0.0),
                arg: Box::new(s.expr(&prep.peak_exponent)),
            })
            .collect(),
    };
    let center = &prep.normalization.center;
    prep.g
        .components
        .iter()
        .enumerate()
        .map(|(i, gi)| {
            let product = Expr::Product {
                factors: vec![weighted.clone(), gi.expr.clone()],
            };
            HoloFunction {
                expr: Expr::Sum {
                    terms: vec![Expr::Const { value: center.0[i] }, product],
                },
                sup_bound: None,
                node_values: prep
                    .problem
                    .nodes
                    .angles()
                    .iter()
                    .zip(&prep.problem.values)
                    .map(|(&a, v)| (a, v.0[i]))
                    .collect(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtensionResult {
    /// Problem file the result was built from; `verify` rebuilds from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<serde_json::Value>,
    pub normalization: Normalization,
    pub schedule: ScheduleSummary,
    pub stages: Vec<Stage>,
    /// Coordinates of the extension.
    pub h: Vec<HoloFunction>,
    /// Coordinates of the linear extension of the centered data.
    pub g: Vec<HoloFunction>,
    pub report: AuditReport,
    #[serde(skip)]
    pub samples: Vec<GridSample>,
}

/// Full pipeline: normalisation, schedule, stages, assembly and audit.
/// Audit failures are recorded in the report, not raised.
pub fn assemble_extension(problem: &InterpolationProblem) -> Result<ExtensionResult> {
    let prep = prepare(problem)?;
    let stages = build_stages(&prep)?;
    Ok(finish(&prep, stages))
}

pub fn finish(prep: &Prepared, stages: Vec<Stage>) -> ExtensionResult {
    let h = assemble_functions(prep, &stages);
    let (report, samples) = audit_margins(prep, &stages, &h);
    ExtensionResult {
        problem: None,
        normalization: prep.normalization.clone(),
        schedule: prep.schedule.summary(),
        stages,
        h,
        g: prep.g.components.clone(),
        report,
        samples,
    }
}

/// Extension with values in the `eps`-neighbourhood of the convex hull of
/// the data, strictly inside it off the nodes.
pub fn convex_hull_extension(mut problem: InterpolationProblem, eps: f64) -> Result<ExtensionResult> {
    problem.body = hull_body(&problem.values, eps)?;
    assemble_extension(&problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star_body::ball;

    fn small(mut p: InterpolationProblem) -> InterpolationProblem {
        p.grid = GridSpec { radial: 24, angular: 48 };
        p.conformal_n = 256;
        p.psi_grid = 65;
        p.k_max = 3;
        p
    }

    fn unit_disk() -> StarBody {
        ball(Vector::zeros(1), 1.0).unwrap()
    }

    #[test]
    fn linear_extension_examples() {
        let s = NodeSet::new(&[0.0]).unwrap();
        let v = Vector(vec![C64::new(0.3, 0.4), C64::new(1.0, 0.0)]);
        let g = linear_vector_extension(&s, std::slice::from_ref(&v), None, 512).unwrap();
        assert!((g.m_norm - v.norm()).abs() < 1e-15);
        let s2 = NodeSet::new(&[0.0, PI]).unwrap();
        let g2 = linear_vector_extension(&s2, &[v.clone(), v.scale(C64::new(-1.0, 0.0))], None, 512).unwrap();
        assert!((g2.m_norm - v.norm()).abs() < 1e-12);
        let z = C64::new(0.2, -0.3);
        assert!((g2.components[0].eval(z).unwrap() - v.0[0] * z).norm() < 1e-15);
    }

    #[test]
    fn degenerate_and_outside_data_are_rejected() {
        let s = NodeSet::new(&[0.0]).unwrap();
        let zero = InterpolationProblem::new(s.clone(), vec![Vector::zeros(1)], unit_disk()).unwrap();
        assert!(matches!(prepare(&zero), Err(Error::DegenerateData)));
        let far = InterpolationProblem::new(s, vec![Vector::from_reals(&[2.0])], unit_disk()).unwrap();
        assert!(matches!(prepare(&far), Err(Error::DataOutsideBody { .. })));
    }

    #[test]
    fn single_node_disk_problem() {
        let s = NodeSet::new(&[0.0]).unwrap();
        let p = small(InterpolationProblem::new(s, vec![Vector::from_reals(&[1.0])], unit_disk()).unwrap());
        let res = assemble_extension(&p).unwrap();
        let r = &res.report;
        assert!(r.passed, "{:#?}", r);
        assert!(r.interp_residual <= 1e-12);
        assert!(r.relative_margin > 0.0);
        assert_eq!(res.h[0].eval_boundary(0.0), C64::new(1.0, 0.0));
    }

    #[test]
    fn h_eps_meets_its_contract() {
        let s = NodeSet::new(&[0.0]).unwrap();
        let profile = CuspProfile::new(|r| PI / 8.0 * r * (1.0 - r), 257).unwrap();
        let map = Arc::new(build_cusp_map(&profile, 256, 0.2).unwrap());
        let e = [DiskPoint::interior(C64::new(0.0, 0.0))];
        let (h, stage) = build_h_eps(&s, 0.25, &e, map).unwrap();
        assert_eq!(h.eval_boundary(0.0), C64::new(1.0, 0.0));
        assert!(h.eval(C64::new(0.0, 0.0)).unwrap().norm() <= 0.25);
        assert!(stage.tau >= 0.0);
        let far = [DiskPoint::boundary(0.0)];
        let map = stage.map.clone();
        assert!(matches!(build_h_eps(&s, 0.25, &far, map), Err(Error::CompactTouchesPeakSet(_))));
    }
}
