//! Command dispatch and report assembly.

use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use super::output::Table;
use crate::discretize::{BoxGrid, Discretization, Grid};
use crate::eigensolve::{negative_spectrum_scan, solve, EigenBasis, SolveOptions};
use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, DomainSpec};
use crate::linearized::{assemble_linearized, default_kernel_tol, spectrum_near_zero};
use crate::semilinear::{gradient_check, ground_state, GroundState, GroundStateSummary, Init, MinimizeOptions};
use crate::verify::{
    check_foliated_schwarz, check_radial, count_nodal_domains, faber_krahn, fit_linear_decay, fit_semilinear_decay,
    hks_sequence, multistart_uniqueness, p_sweep, pohozaev_residual, second_eig_bound, CheckReport, ComparisonKind,
    ComparisonReport, Nonlinearity, ShapeSolver, SweepOptions,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    FaberKrahn,
    SecondBound,
    Scaling,
    Monotonicity,
    RadialSymmetry,
    FoliatedSchwarz,
    Nodal,
    Pohozaev,
    Gradient,
    Nondegeneracy,
    Uniqueness,
}

impl Check {
    pub const ALL: [Check; 11] = [
        Check::FaberKrahn,
        Check::SecondBound,
        Check::Scaling,
        Check::Monotonicity,
        Check::RadialSymmetry,
        Check::FoliatedSchwarz,
        Check::Nodal,
        Check::Pohozaev,
        Check::Gradient,
        Check::Nondegeneracy,
        Check::Uniqueness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::FaberKrahn => "faber-krahn",
            Check::SecondBound => "second-bound",
            Check::Scaling => "scaling",
            Check::Monotonicity => "monotonicity",
            Check::RadialSymmetry => "radial-symmetry",
            Check::FoliatedSchwarz => "foliated-schwarz",
            Check::Nodal => "nodal",
            Check::Pohozaev => "pohozaev",
            Check::Gradient => "gradient",
            Check::Nondegeneracy => "nondegeneracy",
            Check::Uniqueness => "uniqueness",
        }
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
            Error::ConfigKey { key: "check".into(), msg: format!("unknown check `{s}`; expected one of {}", names.join(", ")) }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Eig,
    Semilinear,
    Sweep,
    Verify(Check),
    Hks,
    NegScan,
    DecayFit,
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::Eig => "eig".into(),
            Command::Semilinear => "semilinear".into(),
            Command::Sweep => "sweep".into(),
            Command::Verify(c) => format!("verify {}", c.name()),
            Command::Hks => "hks".into(),
            Command::NegScan => "neg-scan".into(),
            Command::DecayFit => "decay-fit".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
}

/// Outcome of one command; byte-identical for identical config and version.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub command: String,
    pub config: std::collections::BTreeMap<String, String>,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
    pub result: Value,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// 3 for configuration and parameter errors, 2 for solver failures.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::ConfigParse { .. } | Error::ConfigKey { .. } | Error::InvalidParameter(_) | Error::Unsupported(_) => 3,
        _ => 2,
    }
}

/// Machine-readable failure document.
pub fn error_json(command: &str, e: &Error) -> Value {
    let kind = match e {
        Error::ConfigParse { .. } | Error::ConfigKey { .. } => "config",
        Error::InvalidParameter(_) | Error::Unsupported(_) => "parameter",
        Error::Io(_) => "io",
        _ => "solver",
    };
    let mut v = json!({"command": command, "kind": kind, "message": e.to_string(), "exit_code": error_exit_code(e)});
    match e {
        Error::ConfigParse { line, .. } => v["line"] = json!(line),
        Error::ConfigKey { key, .. } => v["key"] = json!(key),
        _ => {}
    }
    v
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn minimize_opts(cfg: &ExperimentConfig) -> MinimizeOptions {
    MinimizeOptions { max_iter: cfg.max_iter, seed: cfg.seed, ..MinimizeOptions::default() }
}

fn eigen(cfg: &ExperimentConfig, disc: &Discretization, k: usize) -> Result<EigenBasis> {
    solve(disc, &SolveOptions { k_max: k, tol: cfg.tol, seed: cfg.seed, use_symmetry: true })
}

fn require_p(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.p.ok_or_else(|| Error::ConfigKey { key: "p".into(), msg: "required by this command".into() })
}

fn state(cfg: &ExperimentConfig, disc: &Discretization, p: f64) -> Result<GroundState> {
    ground_state(disc, p, Init::Eigenfunction, &minimize_opts(cfg))
}

fn report(cfg: &ExperimentConfig, cmd: Command, verdicts: Vec<Verdict>, result: Value, table: Option<Table>) -> RunReport {
    RunReport {
        version: VERSION,
        command: cmd.name(),
        config: cfg.entries.clone(),
        seed: cfg.seed,
        verdicts,
        result,
        table,
    }
}

fn verdict(name: &str, pass: bool) -> Vec<Verdict> {
    vec![Verdict { name: name.into(), pass }]
}

/// Runs `cmd`. Errors abort the command; failing checks come back as verdicts.
pub fn run(cfg: &ExperimentConfig, cmd: Command) -> Result<RunReport> {
    match cmd {
        Command::Eig => run_eig(cfg),
        Command::Semilinear => run_semilinear(cfg),
        Command::Sweep => run_sweep(cfg),
        Command::Verify(c) => {
            let r = run_check(cfg, c)?;
            let v = verdict(&r.check, r.verdict);
            Ok(report(cfg, cmd, v, to_value(&r), None))
        }
        Command::Hks => run_hks(cfg),
        Command::NegScan => run_neg_scan(cfg),
        Command::DecayFit => run_decay(cfg),
    }
}

fn run_eig(cfg: &ExperimentConfig) -> Result<RunReport> {
    let disc = cfg.discretization()?;
    let b = eigen(cfg, &disc, cfg.k_max)?;
    let mut t = Table::new(&["k", "lambda", "rayleigh_residual", "gram_offdiag_max", "multiplicity"]);
    for (row, m) in b.rows().iter().zip(&b.multiplicity) {
        t.push(vec![row.k.into(), row.lambda.into(), row.rayleigh_residual.into(), row.gram_offdiag_max.into(), (*m).into()]);
    }
    let result = json!({
        "rows": to_value(&b.rows()),
        "multiplicity": b.multiplicity,
        "gram_offdiag_max": b.gram_offdiag_max(),
        "matvecs": b.matvecs,
        "spacing": disc.spacing(),
    });
    Ok(report(cfg, Command::Eig, Vec::new(), result, Some(t)))
}

fn run_semilinear(cfg: &ExperimentConfig) -> Result<RunReport> {
    let p = require_p(cfg)?;
    let disc = cfg.discretization()?;
    let s = state(cfg, &disc, p)?;
    let mut result = json!({
        "summary": to_value(&GroundStateSummary::from(&s)),
        "sup_norm": to_value(&s.sup_norm_scaling()),
        "descent_iterations": s.descent_iterations,
        "newton_iterations": s.newton_iterations,
        "restarts": s.restarts,
    });
    if p > 2.0 {
        let w = spectrum_near_zero(&assemble_linearized(&disc, &s)?, 3, default_kernel_tol(disc.spacing()))?;
        result["linearized"] = to_value(&w);
    }
    let mut t = Table::new(&["index", "v"]);
    for (i, v) in s.v.values.iter().enumerate() {
        t.push(vec![i.into(), (*v).into()]);
    }
    Ok(report(cfg, Command::Semilinear, Vec::new(), result, Some(t)))
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<RunReport> {
    let list = cfg
        .p_list
        .clone()
        .or_else(|| cfg.p.map(|p| vec![p]))
        .ok_or_else(|| Error::ConfigKey { key: "sweep.p_list".into(), msg: "required by sweep".into() })?;
    let disc = cfg.discretization()?;
    let opts = SweepOptions { minimize: minimize_opts(cfg), ..SweepOptions::default() };
    let rep = p_sweep(&disc, &list, &opts)?;
    let mut t = Table::new(&[
        "p",
        "alpha_p",
        "gap_to_lambda1",
        "const_estimate",
        "sup_pow",
        "ln_sup",
        "min_abs_lin_eig",
        "approx_kernel_dim",
    ]);
    for r in &rep.rows {
        t.push(vec![
            r.p.into(),
            r.alpha_p.into(),
            r.gap_to_lambda1.into(),
            r.const_estimate.into(),
            r.sup_pow.into(),
            r.ln_sup.into(),
            r.min_abs_lin_eig.into(),
            r.approx_kernel_dim.into(),
        ]);
    }
    let v = verdict("finite", rep.rows.iter().all(|r| r.is_finite()));
    Ok(report(cfg, Command::Sweep, v, to_value(&rep), Some(t)))
}

fn run_hks(cfg: &ExperimentConfig) -> Result<RunReport> {
    let c = cfg.hks_volume.unwrap_or(2.0 * unit_ball_volume(3));
    let steps = hks_sequence(c, &cfg.hks_separations, cfg.hks_h)?;
    let mut t = Table::new(&["separation", "lambda2", "lambda1_ball", "lambda1_exact", "gap", "second_bound_margin"]);
    for s in &steps {
        t.push(vec![
            s.separation.into(),
            s.lambda2.into(),
            s.lambda1_ball.into(),
            s.lambda1_exact.into(),
            s.gap.into(),
            s.second_bound.margin.into(),
        ]);
    }
    let verdicts = vec![
        Verdict { name: "gap_positive".into(), pass: steps.iter().all(|s| s.gap > 0.0) },
        Verdict { name: "gap_decreasing".into(), pass: steps.windows(2).all(|w| w[1].gap < w[0].gap) },
        Verdict { name: "second_bound".into(), pass: steps.iter().all(|s| s.second_bound.verdict) },
    ];
    Ok(report(cfg, Command::Hks, verdicts, json!({"volume": c, "steps": to_value(&steps)}), Some(t)))
}

fn run_neg_scan(cfg: &ExperimentConfig) -> Result<RunReport> {
    let scan = negative_spectrum_scan(&cfg.domain, &cfg.scan_l, cfg.grid_n)?;
    let mut t = Table::new(&["L", "lambda_minus"]);
    for (l, lam) in &scan {
        t.push(vec![(*l).into(), (*lam).into()]);
    }
    let mags: Vec<f64> = scan.iter().filter(|s| s.1.is_finite()).map(|s| s.1.abs()).collect();
    let v = verdict("magnitude_decreasing", mags.windows(2).all(|w| w[1] < w[0]));
    let rows: Vec<Value> = scan.iter().map(|(l, lam)| json!({"L": l, "lambda_minus": lam})).collect();
    Ok(report(cfg, Command::NegScan, v, json!({"n": cfg.grid_n, "rows": rows}), Some(t)))
}

fn run_decay(cfg: &ExperimentConfig) -> Result<RunReport> {
    let disc = cfg.discretization()?;
    let center = cfg.domain.centroid();
    let fit = match cfg.p {
        Some(p) => {
            let window = cfg
                .decay_window
                .ok_or_else(|| Error::ConfigKey { key: "decay.r_lo".into(), msg: "semilinear fits need a window".into() })?;
            let init = if cfg.radial.is_some() { Init::Eigenfunction } else { Init::Bump(cfg.seed) };
            let s = ground_state(&disc, p, init, &minimize_opts(cfg))?;
            fit_semilinear_decay(&s, &center, window)?
        }
        None => {
            let b = eigen(cfg, &disc, 1)?;
            fit_linear_decay(b.phi(1), b.lambda(1), &center, cfg.domain.circumradius(), cfg.decay_window)?
        }
    };
    let v = verdict("rate", fit.rel_error() <= cfg.decay_tol);
    let result = json!({"fit": to_value(&fit), "rel_error": fit.rel_error(), "tolerance": cfg.decay_tol});
    Ok(report(cfg, Command::DecayFit, v, result, None))
}

fn check_report(check: Check, inputs: Value, lhs: f64, rhs: f64, verdict: bool, details: Option<Value>) -> CheckReport {
    CheckReport { check: check.name().into(), inputs, lhs, rhs, margin: lhs - rhs, verdict, details }
}

fn from_comparison(check: Check, inputs: Value, c: &ComparisonReport) -> CheckReport {
    check_report(check, inputs, c.lhs, c.rhs, c.verdict, Some(to_value(c)))
}

fn shape_solver(cfg: &ExperimentConfig) -> ShapeSolver {
    let (lo, hi) = cfg.domain.bounding_box();
    let extent = lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs()));
    let l = cfg.half_width();
    ShapeSolver { h: 2.0 * l / (cfg.grid_n as f64 + 1.0), pad: l - extent, radial_m: cfg.radial.map_or(4000, |r| r.0) }
}

/// Same node count on a box scaled by `t`, so the two solves are matched.
fn scaled_disc(cfg: &ExperimentConfig, domain: &DomainSpec, t: f64) -> Result<Discretization> {
    let grid = match cfg.grid()? {
        Grid::Box(g) => Grid::Box(BoxGrid::new(g.half_width * t, g.n)?),
        Grid::Radial(g) => Grid::Radial(crate::discretize::RadialGrid::new(g.dim, g.r_max * t, g.m)?),
    };
    Discretization::new(grid, domain)
}

pub fn run_check(cfg: &ExperimentConfig, check: Check) -> Result<CheckReport> {
    let inputs = json!({"domain": cfg.domain.label(), "spacing": cfg.grid()?.spacing(), "seed": cfg.seed});
    match check {
        Check::FaberKrahn => {
            let c = faber_krahn(&cfg.domain, &shape_solver(cfg))?;
            Ok(from_comparison(check, inputs, &c))
        }
        Check::SecondBound => {
            let disc = cfg.discretization()?;
            let b = eigen(cfg, &disc, 2)?;
            let c = second_eig_bound(&disc, b.phi(2), b.lambda(2))?;
            Ok(from_comparison(check, inputs, &c))
        }
        Check::Scaling => {
            let big = cfg.domain.scale(2.0)?;
            let l1 = eigen(cfg, &cfg.discretization()?, 1)?.lambda(1);
            let l2 = eigen(cfg, &scaled_disc(cfg, &big, 2.0)?, 1)?.lambda(1);
            let tol = 5e-3 * l1;
            let c = ComparisonReport {
                kind: ComparisonKind::Scaling,
                lhs: 4.0 * l2,
                rhs: l1,
                margin: 4.0 * l2 - l1,
                tolerance: tol,
                verdict: (4.0 * l2 - l1).abs() <= tol,
                equality: Some((4.0 * l2 - l1).abs() <= tol),
            };
            Ok(from_comparison(check, inputs, &c))
        }
        Check::Monotonicity => {
            let disc = cfg.discretization()?;
            let grown = cfg.domain.scale(1.5)?;
            let l1 = eigen(cfg, &disc, 1)?.lambda(1);
            let l2 = eigen(cfg, &Discretization::new(disc.grid.clone(), &grown)?, 1)?.lambda(1);
            let c = ComparisonReport::strict(ComparisonKind::Monotonicity, l1, l2, 1e-9 * l1);
            Ok(from_comparison(check, inputs, &c))
        }
        Check::RadialSymmetry => {
            let disc = cfg.discretization()?;
            let b = eigen(cfg, &disc, 1)?;
            let dev = check_radial(b.phi(1), &cfg.domain)?;
            Ok(check_report(check, inputs, dev, 5e-3, dev < 5e-3, None))
        }
        Check::FoliatedSchwarz => {
            let disc = cfg.discretization()?;
            let b = eigen(cfg, &disc, 2)?;
            let r = check_foliated_schwarz(b.phi(2), &cfg.domain, cfg.seed)?;
            let worst = r.axial_dev.max(r.monotonicity_violation).max(r.reflection_violation);
            Ok(check_report(check, inputs, worst, 1e-2, r.consistent(1e-2), Some(to_value(&r))))
        }
        Check::Nodal => {
            let disc = cfg.discretization()?;
            let b = eigen(cfg, &disc, cfg.k_max)?;
            let counts: Vec<usize> = (1..=cfg.k_max).map(|k| count_nodal_domains(b.phi(k), 1e-3)).collect();
            let courant = counts.iter().enumerate().all(|(i, c)| *c <= i + 1 && *c >= 1);
            let pass = counts[0] == 1 && courant && counts.iter().skip(1).all(|c| *c >= 2);
            let worst = counts.iter().enumerate().map(|(i, c)| *c as f64 - (i + 1) as f64).fold(f64::NEG_INFINITY, f64::max);
            Ok(check_report(check, inputs, worst, 0.0, pass, Some(json!({"counts": counts}))))
        }
        Check::Pohozaev => {
            let disc = cfg.discretization()?;
            let terms = match cfg.p {
                Some(p) => {
                    let s = state(cfg, &disc, p)?;
                    let u = s.u().ok_or_else(|| Error::Convergence("amplitude out of range".into()))?;
                    pohozaev_residual(&disc.field(u), Nonlinearity::Power(p), &disc)?
                }
                None => {
                    let b = eigen(cfg, &disc, 1)?;
                    pohozaev_residual(b.phi(1), Nonlinearity::Eigen(b.lambda(1)), &disc)?
                }
            };
            let pass = terms.boundary_term > 0.0;
            Ok(check_report(check, inputs, terms.boundary_term, 0.0, pass, Some(to_value(&terms))))
        }
        Check::Gradient => {
            let p = cfg.p.unwrap_or(2.5);
            let disc = cfg.discretization()?;
            let v = eigen(cfg, &disc, 1)?.phi(1).values.iter().map(|x| x.abs()).collect::<Vec<_>>();
            let err = gradient_check(&disc, &v, p, 20, 1e-6, cfg.seed);
            Ok(check_report(check, inputs, err, 1e-5, err <= 1e-5, Some(json!({"p": p, "directions": 20}))))
        }
        Check::Nondegeneracy => {
            let p = require_p(cfg)?;
            let disc = cfg.discretization()?;
            let s = state(cfg, &disc, p)?;
            let tol = default_kernel_tol(disc.spacing());
            let w = spectrum_near_zero(&assemble_linearized(&disc, &s)?, 3, tol)?;
            Ok(check_report(check, inputs, w.min_abs, tol, w.min_abs > tol, Some(to_value(&w))))
        }
        Check::Uniqueness => {
            let p = cfg.p.unwrap_or(2.1);
            let disc = cfg.discretization()?;
            let r = multistart_uniqueness(&disc, p, cfg.n_starts, cfg.seed, &minimize_opts(cfg))?;
            Ok(check_report(check, inputs, r.n_distinct as f64, 1.0, r.n_distinct == 1, Some(to_value(&r))))
        }
    }
}

/// Output targets for `path`: a `.json` or `.csv` extension selects that
/// format alone, anything else receives both with the extension appended.
pub fn output_paths(path: &str, has_table: bool) -> (Option<String>, Option<String>) {
    if path.ends_with(".json") {
        (Some(path.to_string()), None)
    } else if path.ends_with(".csv") {
        (None, has_table.then(|| path.to_string()))
    } else {
        (Some(format!("{path}.json")), has_table.then(|| format!("{path}.csv")))
    }
}

/// Writes the report files and returns the JSON text.
pub fn emit(report: &RunReport, path: Option<&str>) -> Result<String> {
    let text = super::output::to_json(report)?;
    if let Some(path) = path {
        let (json_path, csv_path) = output_paths(path, report.table.is_some());
        if let Some(j) = json_path {
            std::fs::write(j, &text)?;
        }
        if let (Some(c), Some(t)) = (csv_path, &report.table) {
            std::fs::write(c, t.to_csv())?;
        }
    }
    Ok(text)
}
