//! The classical simulation scheme for signed measures.
//!
//! A signed measure `λ` on a phase space `Ω` of size `m` is simulated by a
//! non-negative measure `ν` on the doubled space `Ψ = Ω⁺ ⊔ Ω⁻`:
//!
//! ```text
//!     ν⁺_j = λ_j / Λ   if λ_j > 0, else 0
//!     ν⁻_j = |λ_j| / Λ if λ_j < 0, else 0        Λ = Σ_j |λ_j|
//! ```
//!
//! Sampling from `ν` produces a frequency vector `g` on `Ψ`.  The
//! cancellation pushforward `Γ` nets plus- and minus-copy mass per
//! observable and renormalizes by the total net mass:
//!
//! ```text
//!     (Γ(g))_i = Σ_{j ∈ χ⁻¹(i)} (g⁺_j − g⁻_j)  /  Σ_k (g⁺_k − g⁻_k)
//! ```
//!
//! Applying `Γ` to `ν` itself recovers exactly the classical image
//! `μ_i = Σ_{j ∈ χ⁻¹(i)} λ_j`, which is what makes the scheme a simulation.
//! The same bookkeeping in matrix form is the signed channel `T` with one
//! `±1` per column (`sign(λ_j)` at row `χ(j)`), decomposed as
//! `T = T⁺ − T⁻` where `T⁺` (every `−1` flipped to `+1`) is an ordinary
//! column-stochastic channel and `T⁻` keeps `+2` at the negative columns.
//! Then `μ = Λ·Tν` and `Γ(g) = F·Tg` with `F = 1/Σ_i (Tg)_i`.
//!
//! Layout convention: the doubled space is indexed `[Ω⁺ then Ω⁻]`, with
//! zero-weight slots retained so that slot arithmetic stays aligned with
//! `Ω`.  Zero-weight states are zero-probability sampling events; the
//! channel treats their sign as `+1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::measures::{
    empirical_from_counts, total_variation_weight, FrequencyDist, ProbDist, SignedMeasure,
};
use crate::scenario::{states_consistent_with, PhaseSpace};

/// Tolerance below which the total net mass is treated as vanished.
pub const NET_MASS_TOL: f64 = 1e-12;

/// The simulation measure `ν` on the doubled space, plus index bookkeeping.
#[derive(Debug, Clone)]
pub struct DoubledSimulation {
    base_labels: Vec<String>,
    nu_plus: Vec<f64>,
    nu_minus: Vec<f64>,
    lam: SignedMeasure,
    total_weight: f64,
}

impl DoubledSimulation {
    pub fn base_len(&self) -> usize {
        self.base_labels.len()
    }

    pub fn base_labels(&self) -> &[String] {
        &self.base_labels
    }

    pub fn nu_plus(&self) -> &[f64] {
        &self.nu_plus
    }

    pub fn nu_minus(&self) -> &[f64] {
        &self.nu_minus
    }

    pub fn measure(&self) -> &SignedMeasure {
        &self.lam
    }

    /// `Λ = Σ_j |λ_j|`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Labels for the doubled space: `L+` for the plus copy, `L-` for the
    /// minus copy, in layout order `[Ω⁺ then Ω⁻]`.
    pub fn doubled_labels(&self) -> Vec<String> {
        self.base_labels
            .iter()
            .map(|l| format!("{l}+"))
            .chain(self.base_labels.iter().map(|l| format!("{l}-")))
            .collect()
    }

    /// `ν` as a distribution over the doubled space.
    pub fn as_dist(&self) -> ProbDist {
        let probs: Vec<f64> = self
            .nu_plus
            .iter()
            .chain(self.nu_minus.iter())
            .copied()
            .collect();
        ProbDist::new(self.doubled_labels(), probs).expect("nu is a valid distribution")
    }

    /// `ν` collapsed to base indices: `ν_j = |λ_j| / Λ`.  Valid because at
    /// most one of `ν⁺_j`, `ν⁻_j` is nonzero.
    pub fn collapsed(&self) -> Vec<f64> {
        self.nu_plus
            .iter()
            .zip(&self.nu_minus)
            .map(|(p, m)| p + m)
            .collect()
    }
}

/// Build the doubled simulation measure of a signed measure.
pub fn double(lam: &SignedMeasure) -> DoubledSimulation {
    let total_weight = total_variation_weight(lam);
    let nu_plus: Vec<f64> = lam
        .weights()
        .iter()
        .map(|&w| if w > 0.0 { w / total_weight } else { 0.0 })
        .collect();
    let nu_minus: Vec<f64> = lam
        .weights()
        .iter()
        .map(|&w| if w < 0.0 { -w / total_weight } else { 0.0 })
        .collect();
    DoubledSimulation {
        base_labels: lam.labels().to_vec(),
        nu_plus,
        nu_minus,
        lam: lam.clone(),
        total_weight,
    }
}

/// A map from phase-space states to observable values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMap {
    assignments: Vec<usize>,
    observable_labels: Vec<String>,
}

impl OutcomeMap {
    pub fn new(assignments: Vec<usize>, observable_labels: Vec<String>) -> Result<Self> {
        if let Some(&bad) = assignments.iter().find(|&&o| o >= observable_labels.len()) {
            return Err(Error::DimensionMismatch(format!(
                "assignment targets observable {bad} but only {} exist",
                observable_labels.len()
            )));
        }
        Ok(Self {
            assignments,
            observable_labels,
        })
    }

    /// The identity map on a label set.
    pub fn identity(labels: Vec<String>) -> Self {
        let assignments = (0..labels.len()).collect();
        Self {
            assignments,
            observable_labels: labels,
        }
    }

    /// Derive the outcome map a measurement context induces on the phase
    /// space.  Built through [`states_consistent_with`], which is the
    /// single source of truth for state/outcome consistency.
    pub fn from_context(space: &PhaseSpace, context: &[usize]) -> Result<Self> {
        let scenario = space.scenario();
        let labels = scenario.joint_outcome_labels();
        let mut assignments = vec![usize::MAX; space.len()];
        for (idx, jo) in scenario.joint_outcomes().iter().enumerate() {
            for j in states_consistent_with(space, context, jo) {
                assignments[j] = idx;
            }
        }
        if assignments.contains(&usize::MAX) {
            return Err(Error::InvalidConfig(
                "context does not cover the phase space".into(),
            ));
        }
        Self::new(assignments, labels)
    }

    /// Number of phase-space states the map is defined on.
    pub fn base_len(&self) -> usize {
        self.assignments.len()
    }

    pub fn num_observables(&self) -> usize {
        self.observable_labels.len()
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn observable_labels(&self) -> &[String] {
        &self.observable_labels
    }

    pub fn preimage(&self, observable: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, &o)| o == observable)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Push a signed measure forward classically: `μ_i = Σ_{j ∈ χ⁻¹(i)} λ_j`.
///
/// The image must be non-negative for the observables to make sense;
/// a cell below `-1e-12` is a [`Error::NegativeImage`], smaller rounding
/// noise is clamped.
pub fn classical_pushforward(lam: &SignedMeasure, chi: &OutcomeMap) -> Result<ProbDist> {
    if lam.len() != chi.base_len() {
        return Err(Error::DimensionMismatch(format!(
            "measure has {} states, map covers {}",
            lam.len(),
            chi.base_len()
        )));
    }
    let mut image = vec![0.0; chi.num_observables()];
    for (j, &w) in lam.weights().iter().enumerate() {
        image[chi.assignments[j]] += w;
    }
    for (i, &v) in image.iter().enumerate() {
        if v < -NET_MASS_TOL {
            return Err(Error::NegativeImage { index: i, value: v });
        }
    }
    let image = image.into_iter().map(|v| v.max(0.0)).collect();
    ProbDist::new(chi.observable_labels.clone(), image)
}

/// Output of the cancellation pushforward.
#[derive(Debug, Clone)]
pub struct PushforwardResult {
    /// The normalized image distribution over observables.
    pub dist: ProbDist,
    /// `F = 1 / Σ_k (g⁺_k − g⁻_k)`.
    pub normalizer: f64,
    /// Per-observable signed sums before normalization.
    pub net_masses: Vec<f64>,
}

/// Cancellation pushforward `Γ` of a distribution on the doubled space.
///
/// `g` must be indexed by `[Ω⁺ then Ω⁻]` with `2·base_len` slots.  Raw net
/// masses are reported as computed; a component below `-1e-12` or a
/// non-positive total is an error rather than a silent projection, because
/// clipping would bias downstream large-deviation statistics.
pub fn signed_pushforward(g: &ProbDist, chi: &OutcomeMap) -> Result<PushforwardResult> {
    let m = chi.base_len();
    if g.len() != 2 * m {
        return Err(Error::DimensionMismatch(format!(
            "doubled distribution has {} slots, expected {}",
            g.len(),
            2 * m
        )));
    }
    let probs = g.probs();
    let mut net = vec![0.0; chi.num_observables()];
    for j in 0..m {
        net[chi.assignments[j]] += probs[j] - probs[m + j];
    }
    let total: f64 = net.iter().sum();
    if total <= NET_MASS_TOL {
        return Err(Error::SignedNormalizationFailure(total));
    }
    if let Some((i, &v)) = net.iter().enumerate().find(|(_, &v)| v < -NET_MASS_TOL) {
        return Err(Error::NegativeNetMass {
            index: i,
            value: v,
            net_masses: net.clone(),
        });
    }
    let normalizer = 1.0 / total;
    let dist = ProbDist::new(
        chi.observable_labels.clone(),
        net.iter().map(|&v| (v * normalizer).max(0.0)).collect(),
    )?;
    Ok(PushforwardResult {
        dist,
        normalizer,
        net_masses: net,
    })
}

/// The signed column-stochastic channel of a pair `(λ, χ)` and its
/// decomposition into non-negative channels.
#[derive(Debug, Clone)]
pub struct SignedChannel {
    matrix: Vec<Vec<f64>>,
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
}

impl SignedChannel {
    /// `T`: entries in `{−1, 0, +1}`, one nonzero per column.
    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    /// `T⁺`: every `−1` flipped to `+1`; column-stochastic.
    pub fn plus(&self) -> &[Vec<f64>] {
        &self.plus
    }

    /// `T⁻`: `+1 ↦ 0`, `−1 ↦ +2`; `T = T⁺ − T⁻` exactly.
    pub fn minus(&self) -> &[Vec<f64>] {
        &self.minus
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, v)
    }

    pub fn apply_plus(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.plus, v)
    }

    pub fn apply_minus(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.minus, v)
    }
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Build the `m×m` signed channel `T_ij = sign(λ_j)` for `j ∈ χ⁻¹(i)`.
///
/// The observable index set must fit inside the state index set (the map
/// is re-indexed into `{0..m}`).  Zero-weight states carry sign `+1`; they
/// are zero-probability events and never contribute mass.
pub fn build_channel(lam: &SignedMeasure, chi: &OutcomeMap) -> Result<SignedChannel> {
    let m = lam.len();
    if chi.base_len() != m {
        return Err(Error::DimensionMismatch(format!(
            "measure has {} states, map covers {}",
            m,
            chi.base_len()
        )));
    }
    if chi.num_observables() > m {
        return Err(Error::DimensionMismatch(format!(
            "{} observables cannot be re-indexed into {} states",
            chi.num_observables(),
            m
        )));
    }
    let mut matrix = vec![vec![0.0; m]; m];
    let mut plus = vec![vec![0.0; m]; m];
    let mut minus = vec![vec![0.0; m]; m];
    for (j, &w) in lam.weights().iter().enumerate() {
        let i = chi.assignments[j];
        if w < 0.0 {
            matrix[i][j] = -1.0;
            plus[i][j] = 1.0;
            minus[i][j] = 2.0;
        } else {
            matrix[i][j] = 1.0;
            plus[i][j] = 1.0;
        }
    }
    Ok(SignedChannel {
        matrix,
        plus,
        minus,
    })
}

/// Multinomial sample of `n` i.i.d. draws from `dist`, deterministic for a
/// given `(dist, n, seed)` triple.
///
/// Drawn by sequential binomial splitting from a seeded ChaCha stream, so
/// the cost is `O(cells)` rather than `O(n)`.
pub fn sample(dist: &ProbDist, n: u64, seed: u64) -> FrequencyDist {
    assert!(n >= 1, "sample size must be positive");
    let probs = dist.probs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    let last_pos = probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("distribution has positive mass");
    let mut remaining_n = n;
    let mut remaining_mass = 1.0f64;
    for (j, &p) in probs.iter().enumerate() {
        if remaining_n == 0 {
            break;
        }
        if j == last_pos {
            counts[j] = remaining_n;
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let cond = (p / remaining_mass).clamp(0.0, 1.0);
        let draw = if cond >= 1.0 {
            remaining_n
        } else {
            Binomial::new(remaining_n, cond)
                .expect("conditional probability in [0, 1]")
                .sample(&mut rng)
        };
        counts[j] = draw;
        remaining_n -= draw;
        remaining_mass -= p;
    }
    empirical_from_counts(&counts).expect("counts sum to n >= 1")
}

/// Derive a per-call stream seed from a master seed and a call index.
///
/// SplitMix64 finalizer over the master seed advanced by `call_index + 1`
/// golden-gamma increments.  Calls with distinct indices get independent
/// streams regardless of execution order, which is what makes parallel
/// sweeps reproducible.
pub fn derive_stream_seed(master: u64, call_index: u64) -> u64 {
    let mut z =
        master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(call_index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The worked simulation-side deviation for the Bell fixture: the doubled
/// simulation of the fixture measure and the deviation `g` whose
/// cancellation image under the `(a, b)` context is `(2/3, 0, 0, 1/3)`.
pub fn bell_deviation_fixture() -> (DoubledSimulation, ProbDist) {
    let (_, lam) = crate::scenario::bell_fixture();
    let sim = double(&lam);
    let m = sim.base_len();
    let mut g = vec![0.0; 2 * m];
    g[0] = 0.284;
    g[1] = 0.078;
    g[4] = 0.078;
    g[m + 10] = 0.170;
    g[11] = 0.156;
    g[14] = 0.156;
    g[15] = 0.078;
    let g = ProbDist::new(sim.doubled_labels(), g).expect("deviation fixture is valid");
    (sim, g)
}
