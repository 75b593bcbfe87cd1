use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, PotentialSpec};
use super::output::{write_atomic, write_json};
use crate::dynamics::{CircleKind, MapSystem, Point};
use crate::error::{Error, Result};
use crate::format::sci;
use crate::operator::{build, leading_eigentriple, subleading_modulus, Quadrature, Scheme};
use crate::oracle::{
    closed_form_pressure_pl, dense_spectrum_oracle, pressure_periodic_sum, pressure_preimage_ratio,
    pressure_preimage_sum, DENSE_ORACLE_MAX,
};
use crate::potentials::{flatten, GeometricScope, Potential};
use crate::thermo::{
    equilibrium_state, expanding_on_average_certificate, gap_onset_scan, gap_scan, lyapunov_exponents,
    phase_transition_scan, pressure_sweep, skew_boundary_analysis, PressureCurve, GAP_THRESHOLD,
};

/// The experiment pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    PressureSweep,
    GapScan,
    Equilibrium,
    SkewAnalysis,
    OracleCheck,
    FlattenDemo,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PressureSweep => "pressure-sweep",
            Command::GapScan => "gap-scan",
            Command::Equilibrium => "equilibrium",
            Command::SkewAnalysis => "skew-analysis",
            Command::OracleCheck => "oracle-check",
            Command::FlattenDemo => "flatten-demo",
            Command::Report => "report",
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub n: Option<Vec<usize>>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(seed) = self.seed {
            match &mut cfg.quadrature {
                Quadrature::MonteCarlo { seed: s, .. } => *s = seed,
                Quadrature::Gauss { .. } => {
                    return Err(Error::Config {
                        path: "quadrature".into(),
                        message: "--seed only applies to Monte Carlo quadrature".into(),
                    })
                }
            }
        }
        if let Some(s) = self.scheme {
            cfg.scheme = s;
        }
        if let Some(n) = &self.n {
            cfg.n = n.clone();
        }
        if let Some(v) = self.t_min {
            cfg.t.min = v;
        }
        if let Some(v) = self.t_max {
            cfg.t.max = v;
        }
        if let Some(v) = self.t_steps {
            cfg.t.steps = v;
        }
        cfg.validate()
    }
}

/// Artifacts written by a run and whether every eigen-iteration converged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub converged: bool,
}

impl RunOutcome {
    /// `0` on success, `2` when some `t` failed to converge.
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            2
        }
    }
}

/// Exit code of a finished run: `1` for configuration and build errors.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    result.as_ref().map_or(1, RunOutcome::exit_code)
}

struct Session<'a> {
    cfg: &'a ExperimentConfig,
    command: Command,
    artifacts: Vec<PathBuf>,
    converged: bool,
}

impl Session<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn csv<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let p = self.path(name);
        write_atomic(&p, body)?;
        self.artifacts.push(p);
        Ok(())
    }

    fn curve(&mut self, name: &str, curve: &PressureCurve) -> Result<()> {
        self.converged &= curve.all_converged();
        self.csv(name, |w| curve.write_csv(w))
    }

    fn summary(&mut self, name: &str, mut body: Value) -> Result<()> {
        body["command"] = json!(self.command.name());
        body["config"] = serde_json::to_value(self.cfg)?;
        body["converged"] = json!(self.converged);
        let p = self.path(name);
        write_json(&p, &body)?;
        self.artifacts.push(p);
        Ok(())
    }
}

/// Runs `command` on a worker pool of the configured size.
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cfg.workers {
        pool = pool.num_threads(k);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    pool.install(|| {
        let mut s = Session { cfg, command, artifacts: Vec::new(), converged: true };
        match command {
            Command::PressureSweep => run_pressure_sweep(&mut s)?,
            Command::GapScan => run_gap_scan(&mut s)?,
            Command::Equilibrium => run_equilibrium(&mut s)?,
            Command::SkewAnalysis => run_skew(&mut s)?,
            Command::OracleCheck => run_oracle(&mut s)?,
            Command::FlattenDemo => run_flatten(&mut s)?,
            Command::Report => run_report(&mut s)?,
        }
        Ok(RunOutcome { artifacts: s.artifacts, converged: s.converged })
    })
}

#[derive(Serialize)]
struct LevelSummary<'a> {
    #[serde(rename = "N")]
    n: usize,
    scheme_tolerance: f64,
    checks: &'a Option<crate::thermo::CurveChecks>,
    entropy_deviation: Option<f64>,
    converged: bool,
}

fn level_summary(c: &PressureCurve) -> LevelSummary<'_> {
    LevelSummary {
        n: c.discretization.n,
        scheme_tolerance: c.scheme_tolerance,
        checks: &c.checks,
        entropy_deviation: c.entropy_deviation,
        converged: c.all_converged(),
    }
}

fn run_pressure_sweep(s: &mut Session) -> Result<()> {
    let cfg = s.cfg;
    let map = cfg.map.build()?;
    let phi = cfg.potential.build(&map)?;
    let t = cfg.t_grid();
    let curves: Vec<PressureCurve> = cfg
        .ladder()
        .iter()
        .map(|d| pressure_sweep(&map, &phi, &t, d, &cfg.sweep_options(true)))
        .collect::<Result<_>>()?;
    for c in &curves {
        s.curve(&format!("pressure_N{}.csv", c.discretization.n), c)?;
    }
    let scan = if curves.len() >= 2 {
        match phase_transition_scan(&curves, None) {
            Ok(r) => json!(r),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        Value::Null
    };
    let levels: Vec<_> = curves.iter().map(level_summary).collect();
    s.summary("pressure.json", json!({ "levels": levels, "scan": scan }))
}

fn run_gap_scan(s: &mut Session) -> Result<()> {
    let cfg = s.cfg;
    let map = cfg.map.build()?;
    let phi = cfg.potential.build(&map)?;
    let result = gap_scan(&map, &phi, &cfg.t_grid(), &cfg.ladder(), &cfg.sweep_options(true), cfg.refine)?;
    for c in &result.curves {
        s.curve(&format!("gap_scan_N{}.csv", c.discretization.n), c)?;
    }
    let onset = match &cfg.onset {
        Some(o) => {
            let r = gap_onset_scan(&map, &phi, o.direction, o.t_max, o.points, &cfg.finest(), &cfg.sweep_options(true))?;
            s.converged &= r.converged.iter().all(|&c| c);
            s.csv("gap_onset.csv", |w| {
                writeln!(w, "t,gap_ratio,converged")?;
                for i in 0..r.t.len() {
                    writeln!(w, "{},{},{}", sci(r.t[i]), sci(r.gap_ratio[i]), r.converged[i])?;
                }
                Ok(())
            })?;
            json!({ "direction": r.direction, "threshold": r.threshold })
        }
        None => Value::Null,
    };
    let levels: Vec<_> = result.curves.iter().map(level_summary).collect();
    s.summary(
        "gap_scan.json",
        json!({
            "levels": levels,
            "candidates": result.scan.candidates,
            "analytic": result.scan.analytic,
            "onset": onset,
        }),
    )
}

fn run_equilibrium(s: &mut Session) -> Result<()> {
    let cfg = s.cfg;
    let map = cfg.map.build()?;
    let phi = cfg.potential.build(&map)?.scaled(cfg.t_eval);
    let disc = cfg.finest();
    let opts = cfg.eigen_options();
    let op = build(&map, &phi, &disc)?;
    let mut report = leading_eigentriple(&op, &opts)?;
    if report.converged {
        report = subleading_modulus(&op, &report, &opts)?;
    }
    s.converged &= report.converged && report.gap_converged;
    s.csv("eigenvectors.csv", |w| op.write_eigenvectors_csv(&report, w))?;
    let state = match equilibrium_state(&map, &phi, &disc, &opts) {
        Ok(mu) => {
            let certificate = expanding_on_average_certificate(&mu, &map, cfg.l_max)?;
            json!({
                "total_mass": mu.total_mass(),
                "min_weight": mu.weights().iter().copied().fold(f64::INFINITY, f64::min),
                "lyapunov": lyapunov_exponents(&mu, &map),
                "certificate": certificate,
            })
        }
        Err(e @ (Error::GapCollapsed { .. } | Error::NotConverged { .. })) => {
            s.converged = false;
            json!({ "error": e.to_string() })
        }
        Err(e) => return Err(e),
    };
    s.summary(
        "equilibrium.json",
        json!({ "t": cfg.t_eval, "spectrum": report, "equilibrium": state }),
    )
}

fn run_skew(s: &mut Session) -> Result<()> {
    let cfg = s.cfg;
    let map = cfg.map.build()?;
    let phi = cfg.potential.build(&map)?;
    let report = skew_boundary_analysis(&map, &phi, &cfg.t_grid(), &cfg.finest(), &cfg.sweep_options(false))?;
    s.curve("skew.csv", &report.full)?;
    s.summary(
        "skew.json",
        json!({
            "class": report.class,
            "boundaries": report.boundaries,
            "labels": report.labels,
            "margin": report.margin,
            "min_margin": report.min_margin(),
            "scheme_tolerance": report.scheme_tolerance,
        }),
    )
}

fn closed_form_slopes(cfg: &ExperimentConfig) -> Option<Vec<f64>> {
    match (&cfg.map, &cfg.potential) {
        (
            super::config::MapSpec::Circle { family: CircleKind::PiecewiseLinear { slopes }, .. },
            PotentialSpec::Geometric { scope: GeometricScope::Full },
        ) => Some(slopes.clone()),
        (
            super::config::MapSpec::Circle { family: CircleKind::Linear { multiplier }, .. },
            PotentialSpec::Geometric { scope: GeometricScope::Full },
        ) => Some(vec![*multiplier as f64; *multiplier as usize]),
        _ => None,
    }
}

fn base_point(map: &MapSystem, x0: f64) -> Point {
    let mut c = vec![0.0; map.dim()];
    c[0] = x0;
    Point::new(&c)
}

fn run_oracle(s: &mut Session) -> Result<()> {
    let cfg = s.cfg;
    let map = cfg.map.build()?;
    let phi = cfg.potential.build(&map)?;
    let disc = cfg.finest();
    let t = cfg.t_grid();
    let curve = pressure_sweep(&map, &phi, &t, &disc, &cfg.sweep_options(false))?;
    s.converged &= curve.all_converged();
    let slopes = closed_form_slopes(cfg);
    let closed: Vec<f64> = match &slopes {
        Some(sl) => t.iter().map(|&ti| closed_form_pressure_pl(sl, ti)).collect::<Result<_>>()?,
        None => vec![f64::NAN; t.len()],
    };
    let errors: Vec<f64> = curve.pressure.iter().zip(&closed).map(|(p, c)| (p - c).abs()).collect();
    s.csv("oracle_curve.csv", |w| {
        writeln!(w, "t,P_operator,P_closed_form,error")?;
        for i in 0..t.len() {
            writeln!(w, "{},{},{},{}", sci(t[i]), sci(curve.pressure[i]), sci(closed[i]), sci(errors[i]))?;
        }
        Ok(())
    })?;

    let phi_t = phi.scaled(cfg.t_eval);
    let op = build(&map, &phi_t, &disc)?;
    let opts = cfg.eigen_options();
    let mut report = leading_eigentriple(&op, &opts)?;
    s.converged &= report.converged;
    let p_op = report.pressure;
    let budget = cfg.oracle.budget as u128;
    let rows: Vec<(f64, usize, f64, f64)> = cfg
        .oracle
        .x0
        .iter()
        .flat_map(|&x| cfg.oracle.depths.iter().map(move |&n| (x, n)))
        .map(|(x, n)| -> Result<_> {
            let p = base_point(&map, x);
            Ok((
                x,
                n,
                pressure_preimage_sum(&map, &phi_t, &p, n, budget)?,
                pressure_preimage_ratio(&map, &phi_t, &p, n, budget)?,
            ))
        })
        .collect::<Result<_>>()?;
    s.csv("oracle_preimage.csv", |w| {
        writeln!(w, "x0,n,P_preimage,P_ratio,P_operator,error")?;
        for (x, n, p, r) in &rows {
            writeln!(w, "{},{n},{},{},{},{}", sci(*x), sci(*p), sci(*r), sci(p_op), sci((p - p_op).abs()))?;
        }
        Ok(())
    })?;
    let periodic = if cfg.oracle.period > 0 {
        match pressure_periodic_sum(&map, &phi_t, cfg.oracle.period, budget) {
            Ok(p) => json!({ "n": cfg.oracle.period, "pressure": p, "error": (p - p_op).abs() }),
            Err(e @ Error::NotExpanding { .. }) => json!({ "n": cfg.oracle.period, "rejected": e.to_string() }),
            Err(e) => return Err(e),
        }
    } else {
        Value::Null
    };
    let dense = if op.size() <= DENSE_ORACLE_MAX && report.converged {
        report = subleading_modulus(&op, &report, &opts)?;
        let eig = dense_spectrum_oracle(&op)?;
        let moduli: Vec<f64> = eig.iter().map(|z| z.norm()).collect();
        json!({
            "moduli": moduli,
            "lambda1_iterative": report.lambda1,
            "lambda2_iterative": report.lambda2_modulus,
            "lambda1_error": (moduli[0] - report.lambda1).abs(),
        })
    } else {
        Value::Null
    };
    let max_err = slopes.as_ref().map(|_| errors.iter().copied().fold(0.0f64, f64::max));
    s.summary(
        "oracle.json",
        json!({
            "oracle": {
                "t_eval": cfg.t_eval,
                "operator_pressure": p_op,
                "closed_form_max_error": max_err,
                "preimage": rows.iter().map(|(x, n, p, r)| json!({ "x0": x, "n": n, "pressure": p, "ratio": r })).collect::<Vec<_>>(),
                "periodic": periodic,
                "dense": dense,
                "parameters": cfg.oracle,
            }
        }),
    )
}

/// `sup |a - b|` over a uniform grid of `samples^dim` points.
fn sampled_sup_distance(a: &Potential, b: &Potential, dim: usize, samples: usize) -> f64 {
    let total = samples.pow(dim as u32);
    (0..total)
        .into_par_iter()
        .map(|mut i| {
            let mut c = vec![0.0; dim];
            for slot in c.iter_mut().rev() {
                *slot = (i % samples) as f64 / samples as f64;
                i /= samples;
            }
            let p = Point::new(&c);
            (a.eval(&p) - b.eval(&p)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

fn run_flatten(s: &mut Session) -> Result<()> {
    let cfg = s.cfg;
    let map = cfg.map.build()?;
    let phi = cfg.potential.build(&map)?;
    let f = &cfg.flatten;
    let mut rows = Vec::new();
    for k in f.k_min..=f.k_max {
        let eps = 0.5f64.powi(k as i32);
        let flat = flatten(&phi, eps, &map)?;
        rows.push((k, eps, sampled_sup_distance(&flat, &phi, map.dim(), f.samples), flat.holder_constant()));
    }
    s.csv("flatten.csv", |w| {
        writeln!(w, "k,epsilon,sup_deviation,holder_constant")?;
        for (k, e, d, h) in &rows {
            writeln!(w, "{k},{},{},{}", sci(*e), sci(*d), sci(*h))?;
        }
        Ok(())
    })?;
    let monotone = rows.windows(2).all(|w| w[1].2 <= w[0].2);
    let gap = match f.gap_epsilon {
        Some(eps) if !f.gap_t.is_empty() => {
            let flat = flatten(&phi, eps, &map)?;
            let curves: Vec<PressureCurve> = cfg
                .ladder()
                .iter()
                .map(|d| pressure_sweep(&map, &flat, &f.gap_t, d, &cfg.sweep_options(true)))
                .collect::<Result<_>>()?;
            s.csv("flatten_gap.csv", |w| {
                writeln!(w, "t,N,gap_ratio,converged")?;
                for c in &curves {
                    for i in 0..c.len() {
                        writeln!(w, "{},{},{},{}", sci(c.t[i]), c.discretization.n, sci(c.gap_ratio[i]), c.converged[i])?;
                    }
                }
                Ok(())
            })?;
            s.converged &= curves.iter().all(PressureCurve::all_converged);
            let max_gap = curves
                .iter()
                .flat_map(|c| c.gap_ratio.iter().copied())
                .fold(f64::NEG_INFINITY, f64::max);
            json!({ "epsilon": eps, "max_gap_ratio": max_gap, "gap_persists": max_gap < GAP_THRESHOLD })
        }
        _ => Value::Null,
    };
    s.summary("flatten.json", json!({ "monotone": monotone, "gap": gap }))
}

fn csv_files(dir: &Path) -> Result<Vec<String>> {
    let mut names: Vec<String> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| n.ends_with(".csv"))
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    names.sort();
    Ok(names)
}

/// Gnuplot script for the curves already present in the output directory.
fn gnuplot_script(names: &[String]) -> String {
    let mut out = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n");
    let curves: Vec<&String> = names
        .iter()
        .filter(|n| n.starts_with("pressure_N") || n.starts_with("gap_scan_N") || n.as_str() == "skew.csv")
        .collect();
    if !curves.is_empty() {
        let plot = |col: &str| -> String {
            curves
                .iter()
                .map(|n| format!("'{n}' using 't':'{col}' with linespoints title '{n}'"))
                .collect::<Vec<_>>()
                .join(", \\\n     ")
        };
        out += "\nset output 'pressure.png'\nset xlabel 't'\nset ylabel 'P'\nplot ";
        out += &plot("P");
        out += "\n\nset output 'derivative.png'\nset ylabel 'dP/dt'\nplot ";
        out += &plot("P_mu");
        out += "\n\nset output 'gap.png'\nset ylabel 'gap ratio'\nplot ";
        out += &plot("gap_ratio");
        out += "\n";
    }
    if names.iter().any(|n| n == "flatten.csv") {
        out += "\nset output 'flatten.png'\nset logscale xy\nset xlabel 'epsilon'\nset ylabel 'sup deviation'\nplot 'flatten.csv' using 'epsilon':'sup_deviation' with linespoints\nunset logscale\n";
    }
    out
}

fn run_report(s: &mut Session) -> Result<()> {
    let names = csv_files(&s.cfg.out)?;
    let script = gnuplot_script(&names);
    let p = s.path("report.gp");
    write_atomic(&p, |w| Ok(w.write_all(script.as_bytes())?))?;
    s.artifacts.push(p);
    s.summary("report.json", json!({ "data": names, "script": "report.gp" }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_lists_available_curves() {
        let names = vec!["flatten.csv".to_string(), "pressure_N32.csv".to_string()];
        let script = gnuplot_script(&names);
        assert!(script.contains("'pressure_N32.csv' using 't':'P'"));
        assert!(script.contains("flatten.png"));
        assert!(!gnuplot_script(&[]).contains("plot"));
    }
}
