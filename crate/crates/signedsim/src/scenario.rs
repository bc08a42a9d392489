//! Measurement scenarios, empirical models, phase-space encodings, and
//! signed realizations.
//!
//! A scenario lists the parties, each party's measurements, and the shared
//! outcome labels.  An empirical model attaches to every measurement
//! context (one measurement per party) a distribution over joint outcomes.
//! The canonical phase space enumerates every deterministic assignment of
//! outcomes to all measurements; a state's index spells out its outcomes
//! as base-`|outcomes|` digits in global measurement order, most
//! significant digit first.
//!
//! [`realize_minimal`] finds a signed measure on phase space that
//! reproduces a no-signaling model while minimizing the total variation
//! weight `Λ = Σ|λ_j|`, via the standard split `λ = λ⁺ − λ⁻` solved as a
//! linear program.  Realizations are not unique; the solver returns one
//! deterministic optimum (fixed lowest-index pivoting).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linprog::{solve_equality_form, LpOutcome};
use crate::measures::{ProbDist, SignedMeasure};

/// Hard cap on phase-space size for canonical enumeration.
const MAX_STATES: usize = 1 << 20;

/// Marginal agreement tolerance for the no-signaling check.
pub const NO_SIGNALING_TOL: f64 = 1e-9;

/// Parties, per-party measurement labels, and shared outcome labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementScenario {
    parties: Vec<String>,
    measurements: Vec<Vec<String>>,
    outcomes: Vec<String>,
}

impl MeasurementScenario {
    pub fn new(
        parties: Vec<String>,
        measurements: Vec<Vec<String>>,
        outcomes: Vec<String>,
    ) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::InvalidConfig("at least one party required".into()));
        }
        if measurements.len() != parties.len() {
            return Err(Error::InvalidConfig(
                "one measurement list per party required".into(),
            ));
        }
        if measurements.iter().any(|m| m.is_empty()) {
            return Err(Error::InvalidConfig(
                "every party needs at least one measurement".into(),
            ));
        }
        if outcomes.len() < 2 {
            return Err(Error::InvalidConfig(
                "at least two outcomes required".into(),
            ));
        }
        let mut all: Vec<&String> = measurements.iter().flatten().collect();
        all.sort();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(
                "measurement labels must be globally unique".into(),
            ));
        }
        let mut outs: Vec<&String> = outcomes.iter().collect();
        outs.sort();
        if outs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("outcome labels must be unique".into()));
        }
        Ok(Self {
            parties,
            measurements,
            outcomes,
        })
    }

    /// The bipartite two-measurement two-outcome scenario used by the
    /// built-in Bell-state fixture.
    pub fn bell() -> Self {
        Self::new(
            vec!["Alice".into(), "Bob".into()],
            vec![vec!["a".into(), "a'".into()], vec!["b".into(), "b'".into()]],
            vec!["0".into(), "1".into()],
        )
        .expect("static scenario is valid")
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn measurements(&self) -> &[Vec<String>] {
        &self.measurements
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    /// Total number of measurements across all parties.
    pub fn num_measurements(&self) -> usize {
        self.measurements.iter().map(|m| m.len()).sum()
    }

    /// Global measurement order: parties in order, each party's
    /// measurements in order.
    pub fn measurement_labels(&self) -> Vec<&str> {
        self.measurements
            .iter()
            .flat_map(|m| m.iter().map(|s| s.as_str()))
            .collect()
    }

    /// Global index of party `p`'s measurement `m`.
    pub fn global_measurement_index(&self, party: usize, measurement: usize) -> usize {
        self.measurements[..party]
            .iter()
            .map(|m| m.len())
            .sum::<usize>()
            + measurement
    }

    /// All measurement contexts (one measurement per party), lexicographic
    /// with the first party most significant.
    pub fn contexts(&self) -> Vec<Vec<usize>> {
        let radices: Vec<usize> = self.measurements.iter().map(|m| m.len()).collect();
        cartesian(&radices)
    }

    /// All joint outcomes, lexicographic with the first party most
    /// significant.
    pub fn joint_outcomes(&self) -> Vec<Vec<usize>> {
        let radices = vec![self.num_outcomes(); self.num_parties()];
        cartesian(&radices)
    }

    /// Labels for joint outcomes: per-party outcome labels joined by `|`.
    pub fn joint_outcome_labels(&self) -> Vec<String> {
        self.joint_outcomes()
            .iter()
            .map(|jo| {
                jo.iter()
                    .map(|&o| self.outcomes[o].as_str())
                    .collect::<Vec<_>>()
                    .join("|")
            })
            .collect()
    }

    /// Lexicographic index of a joint outcome.
    pub fn joint_outcome_index(&self, joint: &[usize]) -> usize {
        let k = self.num_outcomes();
        joint.iter().fold(0, |acc, &o| acc * k + o)
    }

    /// Human-readable context key, e.g. `a,b'`.
    pub fn context_label(&self, context: &[usize]) -> String {
        context
            .iter()
            .enumerate()
            .map(|(p, &m)| self.measurements[p][m].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parse a comma-separated context key back into per-party indices.
    pub fn parse_context(&self, key: &str) -> Result<Vec<usize>> {
        let parts: Vec<&str> = key.split(',').map(|s| s.trim()).collect();
        if parts.len() != self.num_parties() {
            return Err(Error::InvalidConfig(format!(
                "context '{key}' has {} entries for {} parties",
                parts.len(),
                self.num_parties()
            )));
        }
        let mut ctx = Vec::with_capacity(parts.len());
        for (p, label) in parts.iter().enumerate() {
            match self.measurements[p].iter().position(|m| m == label) {
                Some(i) => ctx.push(i),
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "party {} has no measurement '{label}'",
                        self.parties[p]
                    )))
                }
            }
        }
        Ok(ctx)
    }

    fn check_context(&self, context: &[usize]) -> Result<()> {
        if context.len() != self.num_parties()
            || context
                .iter()
                .zip(&self.measurements)
                .any(|(&m, list)| m >= list.len())
        {
            return Err(Error::InvalidConfig(format!("invalid context {context:?}")));
        }
        Ok(())
    }
}

fn cartesian(radices: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = radices.iter().product();
    let mut out = Vec::with_capacity(total);
    for mut i in 0..total {
        let mut tuple = vec![0; radices.len()];
        for (slot, &r) in tuple.iter_mut().zip(radices).rev() {
            *slot = i % r;
            i /= r;
        }
        out.push(tuple);
    }
    out
}

/// A deterministic assignment of one outcome to every measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeAssignment {
    outcomes: Vec<usize>,
}

impl OutcomeAssignment {
    /// Outcome index per global measurement.
    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }
}

/// The set of all deterministic outcome assignments, in index order.
#[derive(Debug, Clone)]
pub struct PhaseSpace {
    scenario: MeasurementScenario,
    states: Vec<OutcomeAssignment>,
}

impl PhaseSpace {
    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn states(&self) -> &[OutcomeAssignment] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State labels `w0, w1, ...` used by measures on this space.
    pub fn state_labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| format!("w{i}")).collect()
    }
}

/// Enumerate the canonical phase space of a scenario.
///
/// State `w_i` assigns outcomes given by the base-`|outcomes|` digits of
/// `i`, most significant digit first, in global measurement order.
pub fn canonical_phase_space(scenario: &MeasurementScenario) -> Result<PhaseSpace> {
    let k = scenario.num_outcomes();
    let m = scenario.num_measurements();
    let mut size: usize = 1;
    for _ in 0..m {
        size = size
            .checked_mul(k)
            .filter(|&s| s <= MAX_STATES)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("phase space larger than {MAX_STATES} states"))
            })?;
    }
    let mut states = Vec::with_capacity(size);
    for mut i in 0..size {
        let mut outcomes = vec![0; m];
        for slot in outcomes.iter_mut().rev() {
            *slot = i % k;
            i /= k;
        }
        states.push(OutcomeAssignment { outcomes });
    }
    Ok(PhaseSpace {
        scenario: scenario.clone(),
        states,
    })
}

/// Indices of the states whose assignment, restricted to `context`, equals
/// `joint_outcome`.
pub fn states_consistent_with(
    space: &PhaseSpace,
    context: &[usize],
    joint_outcome: &[usize],
) -> Vec<usize> {
    let scenario = space.scenario();
    let globals: Vec<usize> = context
        .iter()
        .enumerate()
        .map(|(p, &m)| scenario.global_measurement_index(p, m))
        .collect();
    space
        .states()
        .iter()
        .enumerate()
        .filter(|(_, st)| {
            globals
                .iter()
                .zip(joint_outcome)
                .all(|(&g, &o)| st.outcomes[g] == o)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Outcome tables per measurement context.
#[derive(Debug, Clone)]
pub struct EmpiricalModel {
    scenario: MeasurementScenario,
    rows: BTreeMap<Vec<usize>, ProbDist>,
}

impl EmpiricalModel {
    pub fn new(scenario: MeasurementScenario, rows: Vec<(Vec<usize>, ProbDist)>) -> Result<Self> {
        let labels = scenario.joint_outcome_labels();
        let mut map = BTreeMap::new();
        for (ctx, dist) in rows {
            scenario.check_context(&ctx)?;
            if dist.labels() != labels.as_slice() {
                return Err(Error::LabelMismatch(format!(
                    "row {} must be labelled by joint outcomes",
                    scenario.context_label(&ctx)
                )));
            }
            if map.insert(ctx.clone(), dist).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate context {}",
                    scenario.context_label(&ctx)
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidConfig("model has no rows".into()));
        }
        Ok(Self {
            scenario,
            rows: map,
        })
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn row(&self, context: &[usize]) -> Option<&ProbDist> {
        self.rows.get(context)
    }

    pub fn contexts_present(&self) -> Vec<Vec<usize>> {
        self.rows.keys().cloned().collect()
    }

    /// True when every context of the scenario has a row.
    pub fn is_complete(&self) -> bool {
        self.scenario
            .contexts()
            .iter()
            .all(|c| self.rows.contains_key(c))
    }

    fn require_complete(&self) -> Result<()> {
        for ctx in self.scenario.contexts() {
            if !self.rows.contains_key(&ctx) {
                return Err(Error::MissingContext(self.scenario.context_label(&ctx)));
            }
        }
        Ok(())
    }
}

/// Worst marginal disagreement found by [`no_signaling_check`].
#[derive(Debug, Clone, Serialize)]
pub struct MarginalDiscrepancy {
    pub party: String,
    pub measurement: String,
    pub context_a: String,
    pub context_b: String,
    pub gap: f64,
}

/// Outcome of [`no_signaling_check`].
#[derive(Debug, Clone, Serialize)]
pub struct NoSignalingReport {
    pub pass: bool,
    pub max_gap: f64,
    pub worst: Option<MarginalDiscrepancy>,
}

/// Check that each party's marginal outcome distribution for a measurement
/// is identical across all contexts containing that measurement.
pub fn no_signaling_check(model: &EmpiricalModel) -> Result<NoSignalingReport> {
    model.require_complete()?;
    let scenario = model.scenario();
    let joint = scenario.joint_outcomes();
    let mut max_gap = 0.0f64;
    let mut worst = None;

    for party in 0..scenario.num_parties() {
        for meas in 0..scenario.measurements()[party].len() {
            let ctxs: Vec<Vec<usize>> = scenario
                .contexts()
                .into_iter()
                .filter(|c| c[party] == meas)
                .collect();
            let marginals: Vec<Vec<f64>> = ctxs
                .iter()
                .map(|ctx| {
                    let row = model.row(ctx).expect("complete model");
                    let mut marg = vec![0.0; scenario.num_outcomes()];
                    for (jo, &p) in joint.iter().zip(row.probs()) {
                        marg[jo[party]] += p;
                    }
                    marg
                })
                .collect();
            for i in 0..marginals.len() {
                for j in i + 1..marginals.len() {
                    let gap = marginals[i]
                        .iter()
                        .zip(&marginals[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max);
                    if gap > max_gap {
                        max_gap = gap;
                        worst = Some(MarginalDiscrepancy {
                            party: scenario.parties()[party].clone(),
                            measurement: scenario.measurements()[party][meas].clone(),
                            context_a: scenario.context_label(&ctxs[i]),
                            context_b: scenario.context_label(&ctxs[j]),
                            gap,
                        });
                    }
                }
            }
        }
    }
    Ok(NoSignalingReport {
        pass: max_gap <= NO_SIGNALING_TOL,
        max_gap,
        worst,
    })
}

/// Maximum violation of the realization constraints: for every present
/// (context, outcome) cell, `|Σ_{consistent states} λ_j − model prob|`.
pub fn realization_residual(lam: &SignedMeasure, model: &EmpiricalModel) -> Result<f64> {
    let space = canonical_phase_space(model.scenario())?;
    if lam.len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "measure has {} weights for {} phase-space states",
            lam.len(),
            space.len()
        )));
    }
    let joint = model.scenario().joint_outcomes();
    let mut worst = 0.0f64;
    for (ctx, row) in &model.rows {
        for (jo, &p) in joint.iter().zip(row.probs()) {
            let mass: f64 = states_consistent_with(&space, ctx, jo)
                .into_iter()
                .map(|j| lam.weights()[j])
                .sum();
            worst = worst.max((mass - p).abs());
        }
    }
    Ok(worst)
}

/// Push a phase-space measure through the outcome map of every context.
///
/// Errors with [`Error::NegativeImage`] when some cell receives mass below
/// `-1e-12`; smaller negative rounding noise is clamped to zero.
pub fn induced_model(
    scenario: &MeasurementScenario,
    lam: &SignedMeasure,
) -> Result<EmpiricalModel> {
    let space = canonical_phase_space(scenario)?;
    if lam.len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "measure has {} weights for {} phase-space states",
            lam.len(),
            space.len()
        )));
    }
    let labels = scenario.joint_outcome_labels();
    let joint = scenario.joint_outcomes();
    let mut rows = Vec::new();
    for ctx in scenario.contexts() {
        let mut probs = Vec::with_capacity(joint.len());
        for (idx, jo) in joint.iter().enumerate() {
            let mass: f64 = states_consistent_with(&space, &ctx, jo)
                .into_iter()
                .map(|j| lam.weights()[j])
                .sum();
            if mass < -1e-12 {
                return Err(Error::NegativeImage {
                    index: idx,
                    value: mass,
                });
            }
            probs.push(mass.max(0.0));
        }
        rows.push((ctx, ProbDist::new(labels.clone(), probs)?));
    }
    EmpiricalModel::new(scenario.clone(), rows)
}

/// A signed measure realizing a model, with its certificate numbers.
#[derive(Debug, Clone)]
pub struct Realization {
    pub lam: SignedMeasure,
    pub model: EmpiricalModel,
    /// Max absolute constraint violation of `lam` against the model.
    pub residual: f64,
    /// `Λ* = Σ|λ*_j|` attained by the solver.
    pub total_weight: f64,
}

/// Iteration cap for the realization LP.
const LP_MAX_ITERS: usize = 20_000;

/// Find a signed measure realizing `model` with minimal total variation
/// weight `Λ = Σ|λ_j|`.
///
/// Solved as a linear program on the split `λ = λ⁺ − λ⁻`.  The returned
/// measure is deterministic for a given model.
pub fn realize_minimal(model: &EmpiricalModel) -> Result<Realization> {
    model.require_complete()?;
    let scenario = model.scenario();
    let space = canonical_phase_space(scenario)?;
    let n = space.len();
    let joint = scenario.joint_outcomes();

    let mut a = Vec::new();
    let mut b = Vec::new();
    for (ctx, row) in &model.rows {
        for (jo, &p) in joint.iter().zip(row.probs()) {
            let mut coeffs = vec![0.0; 2 * n];
            for j in states_consistent_with(&space, ctx, jo) {
                coeffs[j] = 1.0;
                coeffs[n + j] = -1.0;
            }
            a.push(coeffs);
            b.push(p);
        }
    }
    let c = vec![1.0; 2 * n];

    match solve_equality_form(&a, &b, &c, LP_MAX_ITERS) {
        LpOutcome::Optimal(sol) => {
            let weights: Vec<f64> = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
            let lam = SignedMeasure::new(space.state_labels(), weights)
                .map_err(|e| Error::NonConvergence(format!("solver output invalid: {e}")))?;
            let residual = realization_residual(&lam, model)?;
            if residual > 1e-9 {
                return Err(Error::NonConvergence(format!(
                    "realization residual {residual} above 1e-9"
                )));
            }
            let total_weight: f64 = lam.weights().iter().map(|w| w.abs()).sum();
            // the split objective can only overstate the weight
            debug_assert!(sol.objective >= total_weight - 1e-7);
            Ok(Realization {
                lam,
                model: model.clone(),
                residual,
                total_weight,
            })
        }
        LpOutcome::Infeasible => Err(Error::Infeasible(
            "no signed realization exists (model violates no-signaling)".into(),
        )),
        LpOutcome::IterationLimit => Err(Error::SolverStall(LP_MAX_ITERS)),
        LpOutcome::Unbounded => Err(Error::NonConvergence(
            "realization program unbounded".into(),
        )),
    }
}

/// Feasibility of a non-negative realization (`λ ≥ 0`).
///
/// Brute-force companion check for the invariant that the minimal total
/// variation weight is one exactly when a classical realization exists.
pub fn nonnegative_realization_exists(model: &EmpiricalModel) -> Result<bool> {
    model.require_complete()?;
    let scenario = model.scenario();
    let space = canonical_phase_space(scenario)?;
    let n = space.len();
    let joint = scenario.joint_outcomes();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (ctx, row) in &model.rows {
        for (jo, &p) in joint.iter().zip(row.probs()) {
            let mut coeffs = vec![0.0; n];
            for j in states_consistent_with(&space, ctx, jo) {
                coeffs[j] = 1.0;
            }
            a.push(coeffs);
            b.push(p);
        }
    }
    match solve_equality_form(&a, &b, &vec![0.0; n], LP_MAX_ITERS) {
        LpOutcome::Optimal(_) => Ok(true),
        LpOutcome::Infeasible => Ok(false),
        LpOutcome::IterationLimit => Err(Error::SolverStall(LP_MAX_ITERS)),
        LpOutcome::Unbounded => Err(Error::NonConvergence("feasibility run unbounded".into())),
    }
}

/// The built-in Bell-state fixture: the outcome table and the signed
/// measure that realizes it with total variation weight 5/4.
///
/// All entries are dyadic rationals, represented exactly in binary
/// floating point.
pub fn bell_fixture() -> (EmpiricalModel, SignedMeasure) {
    let scenario = MeasurementScenario::bell();
    let labels = scenario.joint_outcome_labels();
    let rows = vec![
        (vec![0, 0], vec![0.5, 0.0, 0.0, 0.5]),
        (vec![1, 0], vec![0.375, 0.125, 0.125, 0.375]),
        (vec![0, 1], vec![0.375, 0.125, 0.125, 0.375]),
        (vec![1, 1], vec![0.125, 0.375, 0.375, 0.125]),
    ];
    let rows = rows
        .into_iter()
        .map(|(ctx, probs)| {
            (
                ctx,
                ProbDist::new(labels.clone(), probs).expect("fixture rows are valid"),
            )
        })
        .collect();
    let model = EmpiricalModel::new(scenario.clone(), rows).expect("fixture model is valid");

    let mut weights = vec![0.0; 16];
    weights[0] = 0.25;
    weights[1] = 0.125;
    weights[4] = 0.125;
    weights[10] = -0.125;
    weights[11] = 0.25;
    weights[14] = 0.25;
    weights[15] = 0.125;
    let space = canonical_phase_space(&scenario).expect("bell phase space");
    let lam = SignedMeasure::new(space.state_labels(), weights).expect("fixture measure is valid");
    (model, lam)
}

// ---------------------------------------------------------------------------
// JSON model schema
// ---------------------------------------------------------------------------

/// One probability cell: a plain number, a decimal string, or a rational
/// string `p/q` (so tables like 3/8 can be entered exactly).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ProbEntry {
    Num(f64),
    Text(String),
}

/// Parse a probability token: a decimal like `0.375` or a rational `3/8`.
pub fn parse_probability(text: &str) -> Result<f64> {
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::ModelParse(format!("bad rational '{s}'")))?;
        let den: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::ModelParse(format!("bad rational '{s}'")))?;
        if den == 0.0 {
            return Err(Error::ModelParse(format!("zero denominator in '{s}'")));
        }
        Ok(num / den)
    } else {
        s.parse()
            .map_err(|_| Error::ModelParse(format!("bad probability '{s}'")))
    }
}

fn parse_prob_entry(entry: &ProbEntry) -> Result<f64> {
    match entry {
        ProbEntry::Num(x) => Ok(*x),
        ProbEntry::Text(s) => parse_probability(s),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    parties: Vec<String>,
    measurements: Vec<Vec<String>>,
    outcomes: Vec<String>,
    /// context key (comma-joined measurement labels) -> probabilities over
    /// joint outcomes in outcome-lexicographic order
    rows: BTreeMap<String, Vec<ProbEntry>>,
}

/// Parse an empirical model from its JSON representation.
pub fn model_from_json(text: &str) -> Result<EmpiricalModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::ModelParse(e.to_string()))?;
    let scenario = MeasurementScenario::new(file.parties, file.measurements, file.outcomes)
        .map_err(|e| Error::ModelParse(e.to_string()))?;
    let labels = scenario.joint_outcome_labels();
    let mut rows = Vec::new();
    for (key, entries) in &file.rows {
        let ctx = scenario
            .parse_context(key)
            .map_err(|e| Error::ModelParse(e.to_string()))?;
        let probs = entries
            .iter()
            .map(parse_prob_entry)
            .collect::<Result<Vec<f64>>>()?;
        let dist = ProbDist::new(labels.clone(), probs)
            .map_err(|e| Error::ModelParse(format!("row '{key}': {e}")))?;
        rows.push((ctx, dist));
    }
    EmpiricalModel::new(scenario, rows).map_err(|e| Error::ModelParse(e.to_string()))
}

/// Serialize a model back to the JSON schema (numeric probabilities).
pub fn model_to_json(model: &EmpiricalModel) -> String {
    let scenario = model.scenario();
    let rows: BTreeMap<String, Vec<ProbEntry>> = model
        .contexts_present()
        .into_iter()
        .map(|ctx| {
            let key = scenario.context_label(&ctx);
            let entries = model
                .row(&ctx)
                .expect("context present")
                .probs()
                .iter()
                .map(|&p| ProbEntry::Num(p))
                .collect();
            (key, entries)
        })
        .collect();
    let file = ModelFile {
        parties: scenario.parties().to_vec(),
        measurements: scenario.measurements().to_vec(),
        outcomes: scenario.outcomes().to_vec(),
        rows,
    };
    serde_json::to_string_pretty(&file).expect("model serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::total_variation_weight;

    #[test]
    fn bell_phase_space_has_sixteen_states() {
        let scenario = MeasurementScenario::bell();
        let space = canonical_phase_space(&scenario).unwrap();
        assert_eq!(space.len(), 16);
        // w7 assigns outcomes 0, 1, 1, 1 to a, a', b, b'
        assert_eq!(space.states()[7].outcomes(), &[0, 1, 1, 1]);
    }

    #[test]
    fn single_binary_measurement_has_two_states() {
        let scenario = MeasurementScenario::new(
            vec!["P".into()],
            vec![vec!["x".into()]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let space = canonical_phase_space(&scenario).unwrap();
        assert_eq!(space.len(), 2);
    }

    #[test]
    fn consistent_states_match_bit_decoding() {
        let scenario = MeasurementScenario::bell();
        let space = canonical_phase_space(&scenario).unwrap();
        // (a, b') -> (0, 1): states 1, 3, 5, 7
        let ctx = scenario.parse_context("a,b'").unwrap();
        assert_eq!(
            states_consistent_with(&space, &ctx, &[0, 1]),
            vec![1, 3, 5, 7]
        );
        // (a, b) -> (0, 0): states 0, 1, 4, 5
        let ctx = scenario.parse_context("a,b").unwrap();
        assert_eq!(
            states_consistent_with(&space, &ctx, &[0, 0]),
            vec![0, 1, 4, 5]
        );
    }

    #[test]
    fn consistent_states_partition_phase_space() {
        let scenario = MeasurementScenario::bell();
        let space = canonical_phase_space(&scenario).unwrap();
        for ctx in scenario.contexts() {
            let mut seen = vec![false; space.len()];
            for jo in scenario.joint_outcomes() {
                for j in states_consistent_with(&space, &ctx, &jo) {
                    assert!(!seen[j], "state {j} hit twice");
                    seen[j] = true;
                }
            }
            assert!(seen.iter().all(|&s| s), "partition misses states");
        }
    }

    #[test]
    fn bell_fixture_passes_no_signaling() {
        let (model, _) = bell_fixture();
        let report = no_signaling_check(&model).unwrap();
        assert!(report.pass);
        assert_eq!(report.max_gap, 0.0);
    }

    #[test]
    fn tampered_row_fails_no_signaling() {
        let (model, _) = bell_fixture();
        let scenario = model.scenario().clone();
        let labels = scenario.joint_outcome_labels();
        let mut rows: Vec<(Vec<usize>, ProbDist)> = scenario
            .contexts()
            .into_iter()
            .map(|c| (c.clone(), model.row(&c).unwrap().clone()))
            .collect();
        rows[0] = (
            vec![0, 0],
            ProbDist::new(labels, vec![0.6, 0.0, 0.0, 0.4]).unwrap(),
        );
        let tampered = EmpiricalModel::new(scenario, rows).unwrap();
        let report = no_signaling_check(&tampered).unwrap();
        assert!(!report.pass);
        // marginal P(a = 0) moves from 1/2 to 0.6
        assert!((report.max_gap - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_context_model_passes_vacuously() {
        let scenario = MeasurementScenario::new(
            vec!["P".into(), "Q".into()],
            vec![vec!["x".into()], vec!["y".into()]],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let labels = scenario.joint_outcome_labels();
        let row = ProbDist::new(labels, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let model = EmpiricalModel::new(scenario, vec![(vec![0, 0], row)]).unwrap();
        let report = no_signaling_check(&model).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn missing_context_is_reported() {
        let scenario = MeasurementScenario::bell();
        let labels = scenario.joint_outcome_labels();
        let row = ProbDist::new(labels, vec![0.25; 4]).unwrap();
        let model = EmpiricalModel::new(scenario, vec![(vec![0, 0], row)]).unwrap();
        assert!(matches!(
            no_signaling_check(&model),
            Err(Error::MissingContext(_))
        ));
    }

    #[test]
    fn fixture_measure_realizes_table_exactly() {
        let (model, lam) = bell_fixture();
        assert_eq!(lam.weights()[10], -0.125);
        let row = model.row(&[1, 1]).unwrap();
        assert_eq!(row.probs(), &[0.125, 0.375, 0.375, 0.125]);
        assert_eq!(realization_residual(&lam, &model).unwrap(), 0.0);
    }

    #[test]
    fn uniform_measure_misses_table_by_quarter() {
        let (model, _) = bell_fixture();
        let lam = SignedMeasure::new(
            canonical_phase_space(model.scenario())
                .unwrap()
                .state_labels(),
            vec![1.0 / 16.0; 16],
        )
        .unwrap();
        let r = realization_residual(&lam, &model).unwrap();
        assert!((r - 0.25).abs() < 1e-12, "residual {r}");
    }

    #[test]
    fn induced_model_roundtrips_residual_zero() {
        let (_, lam) = bell_fixture();
        let scenario = MeasurementScenario::bell();
        let model = induced_model(&scenario, &lam).unwrap();
        assert_eq!(realization_residual(&lam, &model).unwrap(), 0.0);
    }

    #[test]
    fn realize_minimal_on_bell_table() {
        let (model, _) = bell_fixture();
        let real = realize_minimal(&model).unwrap();
        assert!(real.residual <= 1e-9);
        assert!(
            real.total_weight <= 1.25 + 1e-7,
            "Λ* = {}",
            real.total_weight
        );
        // the fixture attains 5/4, and an independent LP run confirms the
        // optimum is exactly 5/4
        assert!(real.total_weight >= 1.25 - 1e-7);
        let sum: f64 = real.lam.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(!nonnegative_realization_exists(&model).unwrap());
    }

    #[test]
    fn realize_minimal_uniform_rows_is_classical() {
        let scenario = MeasurementScenario::bell();
        let labels = scenario.joint_outcome_labels();
        let rows = scenario
            .contexts()
            .into_iter()
            .map(|c| (c, ProbDist::new(labels.clone(), vec![0.25; 4]).unwrap()))
            .collect();
        let model = EmpiricalModel::new(scenario, rows).unwrap();
        let real = realize_minimal(&model).unwrap();
        assert!((real.total_weight - 1.0).abs() < 1e-7);
        assert!(nonnegative_realization_exists(&model).unwrap());
    }

    #[test]
    fn pr_box_needs_negativity() {
        let scenario = MeasurementScenario::bell();
        let labels = scenario.joint_outcome_labels();
        let corr = vec![0.5, 0.0, 0.0, 0.5];
        let anti = vec![0.0, 0.5, 0.5, 0.0];
        let rows = vec![
            (vec![0, 0], corr.clone()),
            (vec![0, 1], corr.clone()),
            (vec![1, 0], corr),
            (vec![1, 1], anti),
        ]
        .into_iter()
        .map(|(c, p)| (c, ProbDist::new(labels.clone(), p).unwrap()))
        .collect();
        let model = EmpiricalModel::new(scenario, rows).unwrap();
        assert!(no_signaling_check(&model).unwrap().pass);
        let real = realize_minimal(&model).unwrap();
        assert!(real.total_weight > 1.0 + 1e-9, "Λ* = {}", real.total_weight);
        assert!(!nonnegative_realization_exists(&model).unwrap());
    }

    #[test]
    fn realize_minimal_is_deterministic() {
        let (model, _) = bell_fixture();
        let a = realize_minimal(&model).unwrap();
        let b = realize_minimal(&model).unwrap();
        assert_eq!(a.lam.weights(), b.lam.weights());
    }

    #[test]
    fn tv_weight_of_solver_output_at_least_one() {
        let (model, _) = bell_fixture();
        let real = realize_minimal(&model).unwrap();
        assert!(total_variation_weight(&real.lam) >= 1.0 - 1e-12);
    }

    #[test]
    fn json_roundtrip_with_rationals() {
        let text = r#"{
            "parties": ["Alice", "Bob"],
            "measurements": [["a", "a'"], ["b", "b'"]],
            "outcomes": ["0", "1"],
            "rows": {
                "a,b": ["1/2", "0", "0", "1/2"],
                "a',b": ["3/8", "1/8", "1/8", "3/8"],
                "a,b'": ["3/8", "1/8", "1/8", "3/8"],
                "a',b'": ["1/8", "3/8", "3/8", "1/8"]
            }
        }"#;
        let model = model_from_json(text).unwrap();
        let (fixture, _) = bell_fixture();
        for ctx in fixture.scenario().contexts() {
            assert_eq!(
                model.row(&ctx).unwrap().probs(),
                fixture.row(&ctx).unwrap().probs()
            );
        }
        let json = model_to_json(&model);
        let reparsed = model_from_json(&json).unwrap();
        assert_eq!(
            reparsed.row(&[0, 0]).unwrap().probs(),
            model.row(&[0, 0]).unwrap().probs()
        );
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            model_from_json("{ not json"),
            Err(Error::ModelParse(_))
        ));
        assert!(matches!(
            model_from_json(r#"{"parties": [], "measurements": [], "outcomes": [], "rows": {}}"#),
            Err(Error::ModelParse(_))
        ));
    }
}
