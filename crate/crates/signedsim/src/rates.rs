//! Large-deviation rates and probability estimates.
//!
//! The rate of deviating to an empirical distribution `q` when sampling
//! i.i.d. from `p` is the KL divergence `D(q‖p)`; the probability of
//! landing near `q` after `n` draws is approximately `exp(−n·D(q‖p))`.
//! This module quantifies "near" as an L1 ball and provides three routes
//! to the ball probability:
//!
//! 1. [`exact_ball_probability`] — exact summation of the multinomial
//!    distribution over the count-vector lattice, in log domain;
//! 2. [`mc_ball_probability`] — seeded Monte Carlo with per-trial derived
//!    streams (identical results for any degree of parallelism);
//! 3. [`sanov_probability`] — the exponential approximation itself.
//!
//! [`empirical_rate`] turns the exact probability back into a rate
//! `−(1/n)·ln P` for checking how fast the approximation tightens, and
//! [`lattice_min_kl`] gives the matching finite-`n` reference rate (the
//! smallest KL over count vectors inside the ball).
//!
//! [`small_deviation_form`] is the quadratic (chi-square) rate governing
//! fluctuations of order `1/√n`: `(q−p)ᵀ Σ_p⁺ (q−p)` with `Σ_p` the
//! multinomial covariance restricted to the simplex tangent space.
//! [`ising_baseline`] supplies the two-spin Gibbs / noisy-measurement pair
//! used as the strict classical data-processing baseline.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{kl_divergence, l1_raw, ProbDist};
use crate::simulation::{derive_stream_seed, sample};

/// Largest count-vector lattice the exact oracle will enumerate.
pub const LATTICE_CAP: u128 = 10_000_000;

/// An L1 ball around a center distribution.
#[derive(Debug, Clone)]
pub struct BallSpec {
    pub center: ProbDist,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: ProbDist, radius: f64) -> Result<Self> {
        if radius.is_nan() || radius < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ball radius {radius} must be non-negative"
            )));
        }
        Ok(Self { center, radius })
    }

    /// Membership test with a relative guard so that lattice points landing
    /// exactly on the boundary are not lost to rounding.
    pub fn contains(&self, probs: &[f64]) -> bool {
        let d = l1_raw(probs, self.center.probs());
        d <= self.radius + 1e-12 * (1.0 + self.radius)
    }
}

/// Sanov approximation `exp(−n·rate)`; zero when the rate is infinite.
pub fn sanov_probability(rate: f64, n: u64) -> f64 {
    assert!(rate >= 0.0, "rate must be non-negative");
    if rate.is_infinite() {
        return 0.0;
    }
    (-(n as f64) * rate).exp()
}

/// Paired fine/coarse rates with their Sanov probability estimates.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RateComparison {
    /// `D(g‖ν)`: rate of the simulation-side deviation.
    pub d_fine: f64,
    /// `D(f‖μ)`: rate of the observable-side deviation.
    pub d_coarse: f64,
    pub n: u64,
    pub p_fine: f64,
    pub p_coarse: f64,
    /// True when the fine rate is strictly smaller: the simulation makes
    /// its deviation *more* likely than the real process makes its image.
    pub reversal: bool,
}

/// Compare the simulation-side rate `D(g‖ν)` with the observable-side rate
/// `D(f‖μ)` at sample size `n`.
pub fn compare_rates(
    fine_emp: &ProbDist,
    fine_ref: &ProbDist,
    coarse_emp: &ProbDist,
    coarse_ref: &ProbDist,
    n: u64,
) -> Result<RateComparison> {
    let d_fine = kl_divergence(fine_emp, fine_ref)?;
    let d_coarse = kl_divergence(coarse_emp, coarse_ref)?;
    Ok(RateComparison {
        d_fine,
        d_coarse,
        n,
        p_fine: sanov_probability(d_fine, n),
        p_coarse: sanov_probability(d_coarse, n),
        reversal: d_fine < d_coarse - 1e-12,
    })
}

/// Cumulative log-factorial table: `table[k] = ln k!`.
fn log_factorials(n: u64) -> Vec<f64> {
    let mut table = Vec::with_capacity(n as usize + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Number of count vectors on the lattice: `C(n + k − 1, k − 1)`.
fn lattice_size(n: u64, k: usize) -> u128 {
    let mut size: u128 = 1;
    for i in 1..k as u128 {
        size = size.saturating_mul(n as u128 + i);
        size /= i;
        if size > LATTICE_CAP * 1000 {
            return u128::MAX;
        }
    }
    size
}

/// Streaming log-sum-exp accumulator.
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn add(&mut self, log_term: f64) {
        if log_term == f64::NEG_INFINITY {
            return;
        }
        if log_term > self.max {
            self.sum = self.sum * (self.max - log_term).exp() + 1.0;
            self.max = log_term;
        } else {
            self.sum += (log_term - self.max).exp();
        }
    }

    fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            0.0
        } else {
            (self.max + self.sum.ln()).exp().min(1.0)
        }
    }
}

struct BallEnumeration<'a> {
    n: u64,
    support: Vec<usize>,
    log_p: Vec<f64>,
    centers: Vec<f64>,
    off_support_mass: f64,
    log_fact: Vec<f64>,
    ball: &'a BallSpec,
}

impl BallEnumeration<'_> {
    /// Visit every count vector over the support cells; `visit` receives
    /// the log multinomial probability and the per-cell counts of each
    /// vector inside the ball.
    fn run(&self, visit: &mut dyn FnMut(f64, &[u64])) {
        let k = self.support.len();
        let mut counts = vec![0u64; k];
        self.recurse(0, self.n, 0.0, self.off_support_mass, &mut counts, visit);
    }

    fn recurse(
        &self,
        cell: usize,
        remaining: u64,
        log_coef: f64,
        partial_l1: f64,
        counts: &mut [u64],
        visit: &mut dyn FnMut(f64, &[u64]),
    ) {
        let k = self.support.len();
        let tol = 1e-12 * (1.0 + self.ball.radius);
        // terms only grow; prune subtrees that already exceed the radius
        if partial_l1 > self.ball.radius + tol {
            return;
        }
        if cell == k - 1 {
            let emp = remaining as f64 / self.n as f64;
            let dist = partial_l1 + (emp - self.centers[cell]).abs();
            if dist <= self.ball.radius + tol {
                counts[cell] = remaining;
                let lp = log_coef - self.log_fact[remaining as usize]
                    + remaining as f64 * self.log_p[cell];
                visit(lp, counts);
            }
            return;
        }
        // remaining cells cannot shrink the distance below this bound
        let rest_center: f64 = self.centers[cell..].iter().sum();
        let lower = partial_l1 + (remaining as f64 / self.n as f64 - rest_center).abs();
        if lower > self.ball.radius + tol {
            return;
        }
        for c in 0..=remaining {
            let emp = c as f64 / self.n as f64;
            counts[cell] = c;
            self.recurse(
                cell + 1,
                remaining - c,
                log_coef - self.log_fact[c as usize] + c as f64 * self.log_p[cell],
                partial_l1 + (emp - self.centers[cell]).abs(),
                counts,
                visit,
            );
        }
    }
}

fn ball_enumeration<'a>(p: &ProbDist, ball: &'a BallSpec, n: u64) -> Result<BallEnumeration<'a>> {
    if p.len() != ball.center.len() {
        return Err(Error::DimensionMismatch(format!(
            "distribution has {} cells, ball center {}",
            p.len(),
            ball.center.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be positive".into()));
    }
    let support: Vec<usize> = (0..p.len()).filter(|&i| p.probs()[i] > 0.0).collect();
    let size = lattice_size(n, support.len());
    if size > LATTICE_CAP {
        return Err(Error::TooLarge {
            size,
            cap: LATTICE_CAP,
        });
    }
    // cells outside the support always hold zero counts; their distance
    // contribution is the center mass they were supposed to carry
    let off_support_mass: f64 = (0..p.len())
        .filter(|i| !support.iter().any(|s| s == i))
        .map(|i| ball.center.probs()[i])
        .sum();
    let log_p: Vec<f64> = support.iter().map(|&i| p.probs()[i].ln()).collect();
    let centers: Vec<f64> = support.iter().map(|&i| ball.center.probs()[i]).collect();
    let log_fact = log_factorials(n);
    Ok(BallEnumeration {
        n,
        support,
        log_p,
        centers,
        off_support_mass,
        log_fact,
        ball,
    })
}

/// Exact probability that the empirical distribution of `n` i.i.d. draws
/// from `p` lies within the L1 ball.
///
/// Sums the multinomial over all count vectors in the ball using
/// log-domain arithmetic (cumulative log-factorial table), so it does not
/// underflow at the sample sizes the lattice cap admits.
pub fn exact_ball_probability(p: &ProbDist, ball: &BallSpec, n: u64) -> Result<f64> {
    let walker = ball_enumeration(p, ball, n)?;
    let mut acc = LogSum::new();
    let base = walker.log_fact[n as usize];
    walker.run(&mut |lp, _| acc.add(base + lp));
    Ok(acc.value())
}

/// Smallest KL divergence `D(k/n ‖ p)` over count vectors `k` inside the
/// ball: the rate Sanov's bound actually competes against at resolution
/// `1/n`.  Errors with [`Error::ZeroProbability`] when the ball contains
/// no lattice point.
pub fn lattice_min_kl(p: &ProbDist, ball: &BallSpec, n: u64) -> Result<f64> {
    let walker = ball_enumeration(p, ball, n)?;
    let mut best = f64::INFINITY;
    let mut seen = false;
    let probs = p.probs().to_vec();
    let support = walker.support.clone();
    walker.run(&mut |_, counts| {
        seen = true;
        let mut kl = 0.0;
        for (slot, &i) in support.iter().enumerate() {
            let q = counts[slot] as f64 / n as f64;
            if q > 0.0 {
                kl += q * (q / probs[i]).ln();
            }
        }
        if kl < best {
            best = kl;
        }
    });
    if !seen {
        return Err(Error::ZeroProbability);
    }
    Ok(best)
}

/// A Monte Carlo ball-probability estimate with its binomial standard
/// error.
#[derive(Debug, Clone, serde::Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub trials: u64,
}

/// Estimate the ball probability by sampling `trials` empirical
/// distributions of size `n` from `p`.
///
/// Each trial draws from its own stream derived as
/// `derive_stream_seed(seed, trial)`, so the result is identical for any
/// execution order or degree of parallelism.
pub fn mc_ball_probability(
    p: &ProbDist,
    ball: &BallSpec,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    if p.len() != ball.center.len() {
        return Err(Error::DimensionMismatch(format!(
            "distribution has {} cells, ball center {}",
            p.len(),
            ball.center.len()
        )));
    }
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let freq = sample(p, n, derive_stream_seed(seed, t));
            u64::from(ball.contains(&freq.probs()))
        })
        .sum();
    let estimate = hits as f64 / trials as f64;
    let stderr = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(McEstimate {
        estimate,
        stderr,
        hits,
        trials,
    })
}

/// Finite-`n` empirical rate `−(1/n)·ln P(ball)` from the exact oracle.
pub fn empirical_rate(p: &ProbDist, ball: &BallSpec, n: u64) -> Result<f64> {
    let prob = exact_ball_probability(p, ball, n)?;
    if prob <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok(-prob.ln() / n as f64)
}

/// Small-deviation quadratic form `(q−p)ᵀ Σ_p⁺ (q−p)` on the simplex
/// tangent space, where `Σ_p = diag(p) − p pᵀ` is the per-draw multinomial
/// covariance and `⁺` the pseudo-inverse.
///
/// Equals the chi-square statistic `Σ_i (q_i−p_i)²/p_i` when `p` has full
/// support on the cells where `q` differs; [`chi_square_form`] computes
/// that route directly so the identity can be checked numerically.
pub fn small_deviation_form(q: &ProbDist, p: &ProbDist) -> Result<f64> {
    let active = active_cells(q, p)?;
    if active.is_empty() {
        return Ok(0.0);
    }
    let k = active.len();
    let pm: Vec<f64> = active.iter().map(|&i| p.probs()[i]).collect();
    let u: Vec<f64> = active
        .iter()
        .map(|&i| q.probs()[i] - p.probs()[i])
        .collect();
    let sigma = nalgebra::DMatrix::from_fn(k, k, |r, c| {
        let diag = if r == c { pm[r] } else { 0.0 };
        diag - pm[r] * pm[c]
    });
    let eig = nalgebra::SymmetricEigen::new(sigma);
    let max_eig = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let cutoff = 1e-12 * max_eig.max(1e-300);
    let uv = nalgebra::DVector::from_vec(u);
    let mut total = 0.0;
    for (idx, &val) in eig.eigenvalues.iter().enumerate() {
        if val > cutoff {
            let comp = eig.eigenvectors.column(idx).dot(&uv);
            total += comp * comp / val;
        }
    }
    Ok(total)
}

/// Chi-square route `Σ_i (q_i−p_i)²/p_i` for the same quadratic form.
pub fn chi_square_form(q: &ProbDist, p: &ProbDist) -> Result<f64> {
    let active = active_cells(q, p)?;
    Ok(active
        .iter()
        .map(|&i| {
            let d = q.probs()[i] - p.probs()[i];
            d * d / p.probs()[i]
        })
        .sum())
}

fn active_cells(q: &ProbDist, p: &ProbDist) -> Result<Vec<usize>> {
    if !q.same_labels(p) {
        return Err(Error::LabelMismatch(
            "quadratic form requires identical label sequences".into(),
        ));
    }
    let mut active = Vec::new();
    for i in 0..p.len() {
        let pi = p.probs()[i];
        let qi = q.probs()[i];
        if pi > 0.0 {
            active.push(i);
        } else if qi != pi {
            return Err(Error::SingularCovariance(i));
        }
    }
    Ok(active)
}

/// The two-spin Gibbs distribution with its noisy coarse-graining kernel:
/// the baseline whose data-processing inequality is strict.
#[derive(Debug, Clone)]
pub struct IsingBaseline {
    pub coupling: f64,
    pub temperature: f64,
    /// Gibbs distribution over microstates `++, +-, -+, --`.
    pub fine: ProbDist,
    /// Row-stochastic kernel microstate -> macrostate `{A, B}`.
    pub kernel: [[f64; 2]; 4],
    /// Image of `fine` under the kernel.
    pub coarse: ProbDist,
    /// Partition function `Z`.
    pub partition: f64,
}

impl IsingBaseline {
    pub fn micro_labels() -> Vec<String> {
        ["++", "+-", "-+", "--"].map(String::from).to_vec()
    }

    pub fn macro_labels() -> Vec<String> {
        ["A", "B"].map(String::from).to_vec()
    }

    /// Apply the coarse-graining kernel to a distribution over microstates.
    pub fn apply_kernel(&self, g: &ProbDist) -> Result<ProbDist> {
        if !g.same_labels(&self.fine) {
            return Err(Error::LabelMismatch(
                "kernel expects a distribution over the microstates".into(),
            ));
        }
        let mut image = [0.0f64; 2];
        for (row, &gs) in self.kernel.iter().zip(g.probs()) {
            image[0] += gs * row[0];
            image[1] += gs * row[1];
        }
        ProbDist::new(Self::macro_labels(), image.to_vec())
    }
}

/// Build the two-spin Gibbs baseline: energies `∓J` for aligned/opposed
/// spins at the given temperature, coarse-grained by the fixed kernel that
/// reads aligned spins deterministically and opposed spins as a coin flip.
pub fn ising_baseline(coupling: f64, temperature: f64) -> Result<IsingBaseline> {
    if !temperature.is_finite() || temperature <= 0.0 || !coupling.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "need finite coupling and positive temperature, got J={coupling}, T={temperature}"
        )));
    }
    // microstates ++, +-, -+, --; H = -J s1 s2
    let aligned = (coupling / temperature).exp();
    let opposed = (-coupling / temperature).exp();
    let weights = [aligned, opposed, opposed, aligned];
    let partition: f64 = weights.iter().sum();
    let fine = ProbDist::new(
        IsingBaseline::micro_labels(),
        weights.iter().map(|w| w / partition).collect(),
    )?;
    let kernel = [[1.0, 0.0], [0.5, 0.5], [0.5, 0.5], [0.0, 1.0]];
    let mut coarse = [0.0f64; 2];
    for (row, &p) in kernel.iter().zip(fine.probs()) {
        coarse[0] += p * row[0];
        coarse[1] += p * row[1];
    }
    let coarse = ProbDist::new(IsingBaseline::macro_labels(), coarse.to_vec())?;
    Ok(IsingBaseline {
        coupling,
        temperature,
        fine,
        kernel,
        coarse,
        partition,
    })
}
