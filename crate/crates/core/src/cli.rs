//! Command-line front end. Problems and reports are JSON, grids are CSV.
//! Exit status: 0 when every audit passes, 2 on an audit failure (the
//! report is still written), 1 on input errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conformal::{build_cusp_map, verify_containment, CuspProfile, DEFAULT_SHRINK};
use crate::covering::{audit_lift, LiftProblem};
use crate::disk_algebra::NodeSet;
use crate::engine::{self, ExtensionResult, GridSample, ProblemSpec};
use crate::error::{Error, Result};
use crate::numeric::{Vector, C64};
use crate::star_body::BodyRegistry;

#[derive(Parser, Debug)]
#[command(name = "peakinterp", version, about = "Peak-interpolation in the disk algebra with values in star bodies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Problem file (a result file for `verify`).
    #[arg(long, global = true)]
    pub problem: Option<PathBuf>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid audits.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the seed of the problem file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub grid_radial: Option<usize>,
    #[arg(long, global = true)]
    pub grid_angular: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Range-constrained interpolation into a body.
    Interpolate,
    /// Interpolation into the eps-neighbourhood of the hull of the data.
    Hull,
    /// Nonvanishing interpolation through the exponential covering.
    Lift,
    /// Gauge table of a body.
    Gauge,
    /// Horn map and its boundary correspondence.
    Conformal,
    /// Re-audit a result file.
    Verify,
}

/// Outcome of a command that produced a report.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    AuditFailure,
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::AuditFailure) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let path = cli
        .problem
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--problem is required".into()))?;
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Problem(e.to_string()))?;
    match cli.command {
        Command::Interpolate => interpolate(cli, value),
        Command::Hull => interpolate(cli, hull_to_problem(value)?),
        Command::Lift => lift(cli, value),
        Command::Gauge => gauge(cli, value),
        Command::Conformal => conformal(cli, value),
        Command::Verify => verify(cli, value),
    }
}

fn interpolate(cli: &Cli, value: Value) -> Result<Outcome> {
    let mut spec: ProblemSpec = serde_json::from_value(value).map_err(|e| Error::Problem(e.to_string()))?;
    if let Some(s) = cli.seed {
        spec.seed = s;
    }
    if let Some(r) = cli.grid_radial {
        spec.grid.radial = r;
    }
    if let Some(a) = cli.grid_angular {
        spec.grid.angular = a;
    }
    let problem = spec.build(&BodyRegistry::default())?;
    let mut result = engine::assemble_extension(&problem)?;
    result.problem = Some(serde_json::to_value(&spec)?);
    write_report(cli.out.as_deref(), &result)?;
    if let Some(out) = &cli.out {
        fs::write(csv_path(out, "grid"), grid_csv(&result.samples, result.normalization.rho_star))?;
    }
    Ok(outcome(result.report.passed))
}

/// A hull problem is an interpolation problem whose body is the
/// `eps`-neighbourhood of the hull of its own values.
fn hull_to_problem(mut value: Value) -> Result<Value> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Problem("hull problem must be an object".into()))?;
    if obj.contains_key("body") {
        return Err(Error::Problem("unknown field `body` in hull problem; the body is the hull".into()));
    }
    let eps = obj
        .remove("eps")
        .ok_or_else(|| Error::Problem("missing field `eps`".into()))?;
    let points = obj
        .get("values")
        .cloned()
        .ok_or_else(|| Error::Problem("missing field `values`".into()))?;
    obj.insert("body".into(), json!({"kind": "hull_eps", "points": points, "eps": eps}));
    Ok(value)
}

fn verify(cli: &Cli, value: Value) -> Result<Outcome> {
    let stored: ExtensionResult = serde_json::from_value(value).map_err(|e| Error::Problem(e.to_string()))?;
    let spec_value = stored
        .problem
        .clone()
        .ok_or_else(|| Error::Problem("result has no `problem` field".into()))?;
    let spec: ProblemSpec = serde_json::from_value(spec_value).map_err(|e| Error::Problem(e.to_string()))?;
    let problem = spec.build(&BodyRegistry::default())?;
    let prep = engine::prepare(&problem)?;
    let mut fresh = engine::finish(&prep, stored.stages.clone());
    fresh.problem = stored.problem.clone();
    let agree = to_canonical(&fresh)? == to_canonical(&stored)?;
    let report = json!({
        "agrees_with_file": agree,
        "passed": fresh.report.passed,
        "report": fresh.report,
    });
    write_report(cli.out.as_deref(), &report)?;
    Ok(outcome(agree && fresh.report.passed))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LiftSpec {
    nodes: Vec<f64>,
    values: Vec<C64>,
    #[serde(default)]
    branch_offsets: Vec<i64>,
    #[serde(default = "default_lift_samples")]
    samples: usize,
    #[serde(default)]
    #[allow(dead_code)]
    seed: u64,
}

fn default_lift_samples() -> usize {
    10_000
}

fn lift(cli: &Cli, value: Value) -> Result<Outcome> {
    let spec: LiftSpec = serde_json::from_value(value).map_err(|e| Error::Problem(e.to_string()))?;
    let p = LiftProblem {
        nodes: NodeSet::new(&spec.nodes)?,
        values: spec.values,
        branch_offsets: spec.branch_offsets,
    };
    let (lift, report) = audit_lift(&p, spec.samples)?;
    let passed = report.passed;
    write_report(cli.out.as_deref(), &json!({"report": report, "lift": lift}))?;
    Ok(outcome(passed))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeSpec {
    body: Value,
    vectors: Vec<Vector>,
}

#[derive(Serialize)]
struct GaugeRow {
    vector: Vector,
    gauge: f64,
    norm: f64,
}

fn gauge(cli: &Cli, value: Value) -> Result<Outcome> {
    let spec: GaugeSpec = serde_json::from_value(value).map_err(|e| Error::Problem(e.to_string()))?;
    let body = BodyRegistry::default().build(&spec.body)?;
    let rows = spec
        .vectors
        .into_iter()
        .map(|v| {
            let gauge = body.gauge_eval(&v)?;
            Ok(GaugeRow {
                norm: v.norm(),
                vector: v,
                gauge,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_report(cli.out.as_deref(), &json!({"body": body.describe(), "rows": rows}))?;
    Ok(Outcome::Pass)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConformalSpec {
    /// Half-angle profile sampled uniformly on `[0, 1]`.
    #[serde(default)]
    theta: Option<Vec<f64>>,
    /// Shorthand for `theta(r) = amplitude r (1 - r)`.
    #[serde(default)]
    amplitude: Option<f64>,
    #[serde(default = "default_conformal_n")]
    n: usize,
    #[serde(default = "default_shrink")]
    shrink: f64,
    #[serde(default = "default_containment_grid")]
    containment_grid: usize,
}

fn default_conformal_n() -> usize {
    1024
}
fn default_shrink() -> f64 {
    DEFAULT_SHRINK
}
fn default_containment_grid() -> usize {
    100
}

fn conformal(cli: &Cli, value: Value) -> Result<Outcome> {
    let spec: ConformalSpec = serde_json::from_value(value).map_err(|e| Error::Problem(e.to_string()))?;
    let profile = match (spec.theta, spec.amplitude) {
        (Some(t), None) => CuspProfile::from_table(&crate::numeric::UnitTable { values: t })?,
        (None, Some(a)) => CuspProfile::new(move |r| a * r * (1.0 - r), 257)?,
        _ => return Err(Error::Problem("give exactly one of `theta` and `amplitude`".into())),
    };
    let map = Arc::new(build_cusp_map(&profile, spec.n, spec.shrink)?);
    let containment = verify_containment(&map, Some(&profile), spec.containment_grid);
    let passed = containment.passed;
    write_report(
        cli.out.as_deref(),
        &json!({"containment": containment, "map": &*map, "accuracy": map.accuracy}),
    )?;
    if let Some(out) = &cli.out {
        let mut csv = String::from("index,curve_re,curve_im,preimage_angle\n");
        for (j, (w, t)) in map.node_images.iter().zip(&map.node_preimages).enumerate() {
            let _ = writeln!(csv, "{j},{:.16e},{:.16e},{:.16e}", w.re, w.im, t);
        }
        fs::write(csv_path(out, "boundary"), csv)?;
    }
    Ok(outcome(passed))
}

fn outcome(passed: bool) -> Outcome {
    if passed {
        Outcome::Pass
    } else {
        Outcome::AuditFailure
    }
}

/// `report.json` -> `report.<tag>.csv`.
pub fn csv_path(out: &Path, tag: &str) -> PathBuf {
    out.with_extension(format!("{tag}.csv"))
}

fn grid_csv(samples: &[GridSample], rho_star: f64) -> String {
    let stages = samples.first().map_or(0, |s| s.stage_values.len());
    let mut csv = String::from("x,y,gauge_h");
    for k in 1..=stages {
        let _ = write!(csv, ",abs_h{k}");
    }
    csv.push('\n');
    for s in samples {
        let _ = write!(csv, "{:.16e},{:.16e},{:.16e}", s.z.re, s.z.im, s.gauge_h * rho_star);
        for v in &s.stage_values {
            let _ = write!(csv, ",{:.16e}", v.norm());
        }
        csv.push('\n');
    }
    csv
}

/// Pretty JSON with every float written to 17 significant digits, so equal
/// values always give equal bytes.
pub fn to_canonical<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn write_report<T: Serialize + ?Sized>(out: Option<&Path>, value: &T) -> Result<()> {
    let text = to_canonical(value)?;
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Default)]
struct FixedFloat {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for FixedFloat {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_canonical(&json!({"a": 0.1, "b": [1.0, -2.5e-300]})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"][1].as_f64(), Some(-2.5e-300));
    }

    #[test]
    fn hull_problem_gets_its_body() {
        let v = json!({"nodes": [0.0], "values": [[[1.0, 0.0]]], "eps": 0.5});
        let p = hull_to_problem(v).unwrap();
        assert_eq!(p["body"]["kind"], "hull_eps");
        assert!(hull_to_problem(json!({"nodes": [0.0], "values": []})).is_err());
    }
}
