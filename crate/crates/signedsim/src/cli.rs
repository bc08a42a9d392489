//! Command orchestration and report emission for the thin CLI binary.
//!
//! Every command builds a typed report `{schema_version, command, config,
//! results}` and renders it as pretty JSON (default) or RFC-4180-style CSV
//! with a fixed, documented header.  Reports are deterministic: identical
//! configs (including seeds) produce byte-identical output, regardless of
//! how many threads the Monte Carlo sweeps use.
//!
//! Exit codes: 0 success, 2 internal check failure, 3 parse error,
//! 4 signaling model, 5 infeasible target, 6 invalid parameters or grid,
//! 7 oracle infeasible with no Monte Carlo fallback requested.
//!
//! Note on JSON numbers: infinite rates serialize as `null` (JSON has no
//! infinity literal); CSV renders them as `inf`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{kl_divergence, ProbDist, SignedMeasure};
use crate::rates::{
    compare_rates, exact_ball_probability, ising_baseline, lattice_min_kl, mc_ball_probability,
    BallSpec, IsingBaseline,
};
use crate::reversal::{
    min_kl_given_pushforward, near_uniform_derivative, near_uniform_gap, NearUniformConfig,
    ReversalProblem,
};
use crate::scenario::{
    bell_fixture, canonical_phase_space, no_signaling_check, realize_minimal, EmpiricalModel,
};
use crate::simulation::{
    bell_deviation_fixture, derive_stream_seed, double, signed_pushforward, OutcomeMap,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(Error::InvalidConfig(format!(
                "unknown format '{other}' (expected json or csv)"
            ))),
        }
    }
}

/// Which realization backs a simulation-side computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizationChoice {
    /// The deterministic minimal-weight solver output.
    Solver,
    /// The built-in Bell-table measure (only valid for that table).
    Fixture,
}

impl std::str::FromStr for RealizationChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solver" => Ok(Self::Solver),
            "fixture" => Ok(Self::Fixture),
            other => Err(Error::InvalidConfig(format!(
                "unknown realization '{other}' (expected solver or fixture)"
            ))),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub config: C,
    pub results: R,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    fn new(command: &str, config: C, results: R) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Map an error to the documented process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InternalCheck(_) => 2,
        Error::ModelParse(_) | Error::Io(_) => 3,
        Error::SignalingModel(_) => 4,
        Error::Infeasible(_) => 5,
        Error::InvalidConfig(_)
        | Error::InvalidMeasure(_)
        | Error::InvalidDistribution(_)
        | Error::LabelMismatch(_)
        | Error::DimensionMismatch(_)
        | Error::MissingContext(_)
        | Error::StepTooLarge(_) => 6,
        Error::TooLarge { .. } => 7,
        _ => 1,
    }
}

// --------------------------------------------------------------------------
// CSV helpers
// --------------------------------------------------------------------------

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_num(x: f64) -> String {
    format!("{x}")
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_num).unwrap_or_default()
}

// --------------------------------------------------------------------------
// bell-demo
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BellDemoConfig {
    /// Sample size at which the Sanov probabilities are quoted.
    pub n: u64,
}

#[derive(Debug, Serialize)]
pub struct BellDemoResults {
    /// Total variation weight of the fixture measure.
    pub total_weight: f64,
    /// Worst cancellation-roundtrip error over all table cells.
    pub roundtrip_max_error: f64,
    /// Worst deviation-image error against the target frequency.
    pub deviation_image_error: f64,
    pub d_coarse: f64,
    pub d_fine: f64,
    pub reversal: bool,
    pub p_coarse: f64,
    pub p_fine: f64,
}

pub type BellDemoReport = Report<BellDemoConfig, BellDemoResults>;

/// Run the built-in Bell-state demonstration end to end.
pub fn bell_demo(config: BellDemoConfig) -> Result<BellDemoReport> {
    let (model, lam) = bell_fixture();
    let sim = double(&lam);
    if sim.total_weight() != 1.25 {
        return Err(Error::InternalCheck(format!(
            "fixture total weight {} is not 5/4",
            sim.total_weight()
        )));
    }
    let space = canonical_phase_space(model.scenario())?;
    let nu = sim.as_dist();
    let mut roundtrip_max_error = 0.0f64;
    for ctx in model.scenario().contexts() {
        let chi = OutcomeMap::from_context(&space, &ctx)?;
        let image = signed_pushforward(&nu, &chi)?;
        let row = model.row(&ctx).expect("fixture is complete");
        for (a, b) in image.dist.probs().iter().zip(row.probs()) {
            roundtrip_max_error = roundtrip_max_error.max((a - b).abs());
        }
    }
    if roundtrip_max_error > 1e-12 {
        return Err(Error::InternalCheck(format!(
            "cancellation roundtrip error {roundtrip_max_error} above 1e-12"
        )));
    }

    let (_, g) = bell_deviation_fixture();
    let ctx = vec![0, 0];
    let chi = OutcomeMap::from_context(&space, &ctx)?;
    let image = signed_pushforward(&g, &chi)?;
    let target = ProbDist::new(
        chi.observable_labels().to_vec(),
        vec![2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0],
    )?;
    let deviation_image_error = image
        .dist
        .probs()
        .iter()
        .zip(target.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if deviation_image_error > 1e-12 {
        return Err(Error::InternalCheck(format!(
            "deviation image error {deviation_image_error} above 1e-12"
        )));
    }

    let mu = model.row(&ctx).expect("fixture is complete");
    let cmp = compare_rates(&g, &nu, &target, mu, config.n)?;
    let results = BellDemoResults {
        total_weight: sim.total_weight(),
        roundtrip_max_error,
        deviation_image_error,
        d_coarse: cmp.d_coarse,
        d_fine: cmp.d_fine,
        reversal: cmp.reversal,
        p_coarse: cmp.p_coarse,
        p_fine: cmp.p_fine,
    };
    Ok(Report::new("bell-demo", config, results))
}

pub fn bell_demo_csv(report: &BellDemoReport) -> String {
    let r = &report.results;
    let mut out = String::from(
        "schema_version,command,n,total_weight,roundtrip_max_error,deviation_image_error,d_coarse,d_fine,reversal,p_coarse,p_fine\n",
    );
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{}",
        report.schema_version,
        report.command,
        report.config.n,
        csv_num(r.total_weight),
        csv_num(r.roundtrip_max_error),
        csv_num(r.deviation_image_error),
        csv_num(r.d_coarse),
        csv_num(r.d_fine),
        r.reversal,
        csv_num(r.p_coarse),
        csv_num(r.p_fine),
    );
    out
}

// --------------------------------------------------------------------------
// realize
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RealizeConfig {
    /// Model source: a file path or `builtin:bell`.
    pub model: String,
    pub realization: RealizationChoice,
}

#[derive(Debug, Serialize)]
pub struct RealizeResults {
    pub no_signaling_max_gap: f64,
    pub total_weight: f64,
    pub residual: f64,
    pub state_labels: Vec<String>,
    pub lambda: Vec<f64>,
}

pub type RealizeReport = Report<RealizeConfig, RealizeResults>;

/// Resolve the realization a config asks for: fixture measure or solver
/// output.  The fixture is only valid for the built-in Bell table.
fn resolve_realization(
    model: &EmpiricalModel,
    choice: RealizationChoice,
) -> Result<(SignedMeasure, f64, f64)> {
    match choice {
        RealizationChoice::Solver => {
            let real = realize_minimal(model)?;
            Ok((real.lam, real.total_weight, real.residual))
        }
        RealizationChoice::Fixture => {
            let (fixture_model, lam) = bell_fixture();
            for ctx in fixture_model.scenario().contexts() {
                let ours = model.row(&ctx).ok_or_else(|| {
                    Error::InvalidConfig("fixture realization requires the Bell table model".into())
                })?;
                let fixture_row = fixture_model.row(&ctx).expect("fixture is complete");
                let diff = ours
                    .probs()
                    .iter()
                    .zip(fixture_row.probs())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if diff > 1e-12 {
                    return Err(Error::InvalidConfig(
                        "fixture realization requires the Bell table model".into(),
                    ));
                }
            }
            let residual = crate::scenario::realization_residual(&lam, model)?;
            let total = crate::measures::total_variation_weight(&lam);
            Ok((lam, total, residual))
        }
    }
}

pub fn realize(config: RealizeConfig, model: &EmpiricalModel) -> Result<RealizeReport> {
    let report = no_signaling_check(model)?;
    if !report.pass {
        return Err(Error::SignalingModel(report.max_gap));
    }
    let (lam, total_weight, residual) = resolve_realization(model, config.realization)?;
    let results = RealizeResults {
        no_signaling_max_gap: report.max_gap,
        total_weight,
        residual,
        state_labels: lam.labels().to_vec(),
        lambda: lam.weights().to_vec(),
    };
    Ok(Report::new("realize", config, results))
}

pub fn realize_csv(report: &RealizeReport) -> String {
    let r = &report.results;
    let mut out = String::from(
        "schema_version,command,model,realization,no_signaling_max_gap,total_weight,residual,state,lambda\n",
    );
    let realization = match report.config.realization {
        RealizationChoice::Solver => "solver",
        RealizationChoice::Fixture => "fixture",
    };
    for (label, w) in r.state_labels.iter().zip(&r.lambda) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            report.schema_version,
            report.command,
            csv_field(&report.config.model),
            realization,
            csv_num(r.no_signaling_max_gap),
            csv_num(r.total_weight),
            csv_num(r.residual),
            csv_field(label),
            csv_num(*w),
        );
    }
    out
}

// --------------------------------------------------------------------------
// reversal-search
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ReversalSearchConfig {
    pub model: String,
    pub context: String,
    pub target: Vec<f64>,
    pub realization: RealizationChoice,
}

#[derive(Debug, Serialize)]
pub struct ReversalSearchResults {
    pub total_weight: f64,
    /// Minimal simulation-side rate achieving the target image.
    pub d_star: f64,
    /// Observable-side rate `D(f‖μ)` of the same target.
    pub d_coarse: f64,
    pub reversal: bool,
    pub constraint_residual: f64,
    pub iterations: usize,
    pub slot_labels: Vec<String>,
    pub g_star: Vec<f64>,
}

pub type ReversalSearchReport = Report<ReversalSearchConfig, ReversalSearchResults>;

pub fn reversal_search(
    config: ReversalSearchConfig,
    model: &EmpiricalModel,
) -> Result<ReversalSearchReport> {
    let scenario = model.scenario();
    let ctx = scenario.parse_context(&config.context)?;
    let row = model
        .row(&ctx)
        .ok_or_else(|| Error::MissingContext(config.context.clone()))?
        .clone();
    let space = canonical_phase_space(scenario)?;
    let chi = OutcomeMap::from_context(&space, &ctx)?;
    let target = ProbDist::new(chi.observable_labels().to_vec(), config.target.clone())?;

    let (lam, total_weight, _) = resolve_realization(model, config.realization)?;
    let sim = double(&lam);
    let problem = ReversalProblem::new(sim, chi, target.clone())?;
    let projection = min_kl_given_pushforward(&problem)?;
    let d_coarse = kl_divergence(&target, &row)?;
    let results = ReversalSearchResults {
        total_weight,
        d_star: projection.divergence,
        d_coarse,
        reversal: projection.divergence < d_coarse - 1e-12,
        constraint_residual: projection.constraint_residual,
        iterations: projection.iterations,
        slot_labels: projection.g.labels().to_vec(),
        g_star: projection.g.probs().to_vec(),
    };
    Ok(Report::new("reversal-search", config, results))
}

pub fn reversal_search_csv(report: &ReversalSearchReport) -> String {
    let r = &report.results;
    let mut out = String::from(
        "schema_version,command,model,context,realization,total_weight,d_star,d_coarse,reversal,constraint_residual,slot,g_star\n",
    );
    let realization = match report.config.realization {
        RealizationChoice::Solver => "solver",
        RealizationChoice::Fixture => "fixture",
    };
    for (label, g) in r.slot_labels.iter().zip(&r.g_star) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            report.schema_version,
            report.command,
            csv_field(&report.config.model),
            csv_field(&report.config.context),
            realization,
            csv_num(r.total_weight),
            csv_num(r.d_star),
            csv_num(r.d_coarse),
            r.reversal,
            csv_num(r.constraint_residual),
            csv_field(label),
            csv_num(*g),
        );
    }
    out
}

// --------------------------------------------------------------------------
// near-uniform
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct NearUniformCliConfig {
    pub m: usize,
    pub c: f64,
    pub target: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub derivative_step: f64,
}

#[derive(Debug, Serialize)]
pub struct NearUniformRow {
    pub epsilon: f64,
    pub gap_direct: f64,
    pub gap_closed_form: f64,
}

#[derive(Debug, Serialize)]
pub struct NearUniformResults {
    pub rows: Vec<NearUniformRow>,
    /// One-sided finite-difference slope of the gap at zero negativity;
    /// absent when the target puts no mass on the merged observable.
    pub derivative_fd: Option<f64>,
    pub derivative_analytic: Option<f64>,
}

pub type NearUniformReport = Report<NearUniformCliConfig, NearUniformResults>;

pub fn near_uniform(config: NearUniformCliConfig) -> Result<NearUniformReport> {
    if config.epsilon_grid.is_empty() {
        return Err(Error::InvalidConfig("empty negativity grid".into()));
    }
    let base = NearUniformConfig::new(config.m, 0.0, config.c, config.target.clone())?;
    let mut grid = config.epsilon_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let mut rows = Vec::with_capacity(grid.len());
    for eps in grid {
        let gap = near_uniform_gap(&base.with_epsilon(eps)?)?;
        rows.push(NearUniformRow {
            epsilon: eps,
            gap_direct: gap.direct,
            gap_closed_form: gap.closed_form,
        });
    }
    let (derivative_fd, derivative_analytic) = if config.target[1] > 0.0 {
        let d = near_uniform_derivative(&base, config.derivative_step)?;
        (Some(d.finite_difference), Some(d.analytic))
    } else {
        (None, None)
    };
    let results = NearUniformResults {
        rows,
        derivative_fd,
        derivative_analytic,
    };
    Ok(Report::new("near-uniform", config, results))
}

pub fn near_uniform_csv(report: &NearUniformReport) -> String {
    let r = &report.results;
    let mut out = String::from(
        "schema_version,command,m,c,epsilon,gap_direct,gap_closed_form,derivative_fd,derivative_analytic\n",
    );
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            report.schema_version,
            report.command,
            report.config.m,
            csv_num(report.config.c),
            csv_num(row.epsilon),
            csv_num(row.gap_direct),
            csv_num(row.gap_closed_form),
            csv_opt(r.derivative_fd),
            csv_opt(r.derivative_analytic),
        );
    }
    out
}

// --------------------------------------------------------------------------
// mc-sanov
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct McSanovConfig {
    pub dist: Vec<f64>,
    pub center: Vec<f64>,
    pub delta: f64,
    pub n_grid: Vec<u64>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct McSanovRow {
    pub n: u64,
    pub exact_prob: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub empirical_rate: Option<f64>,
    pub lattice_min_kl: Option<f64>,
    /// `D(center‖dist)`: the Sanov limit rate at the ball center.
    pub kl_limit_rate: f64,
}

#[derive(Debug, Serialize)]
pub struct McSanovResults {
    pub rows: Vec<McSanovRow>,
}

pub type McSanovReport = Report<McSanovConfig, McSanovResults>;

pub fn mc_sanov(config: McSanovConfig) -> Result<McSanovReport> {
    if config.n_grid.is_empty() {
        return Err(Error::InvalidConfig("empty sample-size grid".into()));
    }
    let p = ProbDist::from_probs(config.dist.clone())?;
    let center = ProbDist::from_probs(config.center.clone())?;
    let ball = BallSpec::new(center.clone(), config.delta)?;
    let kl_limit_rate = kl_divergence(&center, &p)?;

    let mut grid = config.n_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let mut rows = Vec::with_capacity(grid.len());
    for &n in &grid {
        let exact = match exact_ball_probability(&p, &ball, n) {
            Ok(prob) => Some(prob),
            Err(Error::TooLarge { .. }) if config.trials > 0 => None,
            Err(e) => return Err(e),
        };
        let rate = match exact {
            Some(prob) if prob > 0.0 => Some(-prob.ln() / n as f64),
            _ => None,
        };
        let min_kl = match lattice_min_kl(&p, &ball, n) {
            Ok(v) => Some(v),
            Err(Error::ZeroProbability) => None,
            Err(Error::TooLarge { .. }) => None,
            Err(e) => return Err(e),
        };
        let (mc_estimate, mc_stderr) = if config.trials > 0 {
            // one derived stream family per grid point, keyed by n
            let est = mc_ball_probability(
                &p,
                &ball,
                n,
                config.trials,
                derive_stream_seed(config.seed, n),
            )?;
            (Some(est.estimate), Some(est.stderr))
        } else {
            (None, None)
        };
        rows.push(McSanovRow {
            n,
            exact_prob: exact,
            mc_estimate,
            mc_stderr,
            empirical_rate: rate,
            lattice_min_kl: min_kl,
            kl_limit_rate,
        });
    }
    Ok(Report::new("mc-sanov", config, McSanovResults { rows }))
}

pub fn mc_sanov_csv(report: &McSanovReport) -> String {
    let mut out = String::from(
        "schema_version,command,delta,trials,seed,n,exact_prob,mc_estimate,mc_stderr,empirical_rate,lattice_min_kl,kl_limit_rate\n",
    );
    for row in &report.results.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            report.schema_version,
            report.command,
            csv_num(report.config.delta),
            report.config.trials,
            report.config.seed,
            row.n,
            csv_opt(row.exact_prob),
            csv_opt(row.mc_estimate),
            csv_opt(row.mc_stderr),
            csv_opt(row.empirical_rate),
            csv_opt(row.lattice_min_kl),
            csv_num(row.kl_limit_rate),
        );
    }
    out
}

// --------------------------------------------------------------------------
// ising
// --------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct IsingConfig {
    pub coupling: f64,
    pub temperature: f64,
    /// Deviation over microstates; defaults to the Gibbs distribution.
    pub g: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct IsingResults {
    pub partition: f64,
    pub micro_labels: Vec<String>,
    pub fine: Vec<f64>,
    pub coarse: Vec<f64>,
    pub g: Vec<f64>,
    pub g_coarse: Vec<f64>,
    pub d_fine: f64,
    pub d_coarse: f64,
    /// Classical data processing direction `D(g‖ν) ≥ D(Tg‖Tν)`.
    pub dpi_holds: bool,
}

pub type IsingReport = Report<IsingConfig, IsingResults>;

pub fn ising(config: IsingConfig) -> Result<IsingReport> {
    let base = ising_baseline(config.coupling, config.temperature)?;
    let g = match &config.g {
        Some(probs) => ProbDist::new(IsingBaseline::micro_labels(), probs.clone())?,
        None => base.fine.clone(),
    };
    let g_coarse = base.apply_kernel(&g)?;
    let d_fine = kl_divergence(&g, &base.fine)?;
    let d_coarse = kl_divergence(&g_coarse, &base.coarse)?;
    let results = IsingResults {
        partition: base.partition,
        micro_labels: IsingBaseline::micro_labels(),
        fine: base.fine.probs().to_vec(),
        coarse: base.coarse.probs().to_vec(),
        g: g.probs().to_vec(),
        g_coarse: g_coarse.probs().to_vec(),
        d_fine,
        d_coarse,
        dpi_holds: d_fine >= d_coarse - 1e-12,
    };
    Ok(Report::new("ising", config, results))
}

pub fn ising_csv(report: &IsingReport) -> String {
    let r = &report.results;
    let mut out = String::from(
        "schema_version,command,coupling,temperature,partition,state,fine,g,coarse_a,coarse_b,d_fine,d_coarse,dpi_holds\n",
    );
    for (i, label) in r.micro_labels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            report.schema_version,
            report.command,
            csv_num(report.config.coupling),
            csv_num(report.config.temperature),
            csv_num(r.partition),
            csv_field(label),
            csv_num(r.fine[i]),
            csv_num(r.g[i]),
            csv_num(r.coarse[0]),
            csv_num(r.coarse[1]),
            csv_num(r.d_fine),
            csv_num(r.d_coarse),
            r.dpi_holds,
        );
    }
    out
}

// --------------------------------------------------------------------------
// shared parsing
// --------------------------------------------------------------------------

/// Parse a comma-separated probability vector; entries may be decimals or
/// rationals like `2/3`.
pub fn parse_prob_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| crate::scenario::parse_probability(tok.trim()))
        .collect()
}

/// Parse a comma-separated list of f64 grid values.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad number '{tok}'")))
        })
        .collect()
}

/// Parse a comma-separated list of u64 grid values.
pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidConfig(format!("bad integer '{tok}'")))
        })
        .collect()
}

/// Load a model from a path, or the built-in fixture for `builtin:bell`.
pub fn load_model(source: &str) -> Result<EmpiricalModel> {
    if source == "builtin:bell" {
        return Ok(bell_fixture().0);
    }
    let text = std::fs::read_to_string(source)?;
    crate::scenario::model_from_json(&text)
}
