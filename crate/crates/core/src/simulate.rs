//! Monte-Carlo estimation of MSE matrices for separable measurement strategies.
//!
//! Each trial draws its randomness from a ChaCha8 stream selected by the trial
//! index, so results are bit-identical regardless of thread scheduling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bounds::{gamma_factor, WeightSpec};
use crate::error::{QestError, Result};
use crate::linalg::{dot, SymMat, Vec3};
use crate::model::{angle_difference, ThetaParams};
use crate::povm::{build_optimal_estimator, build_optimal_povm, build_phase_perturbed_povm, Povm};
use crate::report::fmt_sig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    SingleCopyOptimal,
    TwoStep,
    Adaptive,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::SingleCopyOptimal => "single-copy-optimal",
            Strategy::TwoStep => "two-step",
            Strategy::Adaptive => "adaptive",
        })
    }
}

impl FromStr for Strategy {
    type Err = QestError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-copy-optimal" | "single" => Ok(Strategy::SingleCopyOptimal),
            "two-step" => Ok(Strategy::TwoStep),
            "adaptive" => Ok(Strategy::Adaptive),
            _ => Err(QestError::Parse(format!("unknown strategy '{s}' (single-copy-optimal, two-step, adaptive)"))),
        }
    }
}

pub const DEFAULT_PHASE_EXPONENT: f64 = 0.5;
pub const DEFAULT_BATCH: u64 = 100;
/// Adaptive: cumulative copies spent on the phase axis grow as `N^exponent`.
///
/// A phase error δ shrinks the apparent θ1 by `θ1 δ²/2`; with `m` phase copies its
/// square costs `O(n/m²)` in `n·MSE` while the phase copies cost `O(m/n)`. The two
/// balance at `m ∝ n^{2/3}`.
pub const DEFAULT_ADAPTIVE_PHASE_EXPONENT: f64 = 2.0 / 3.0;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub theta_true: ThetaParams,
    pub weight: WeightSpec,
    pub strategy: Strategy,
    /// Copies per trial.
    pub n: u64,
    pub trials: usize,
    pub seed: u64,
    /// Two-step: `floor(n^exponent)` copies go to the phase.
    pub phase_fraction_exponent: f64,
    /// Adaptive: copies per batch.
    pub batch_size: u64,
    /// Adaptive: growth exponent of the cumulative phase-axis copies.
    pub adaptive_phase_exponent: f64,
}

impl SimConfig {
    pub fn new(theta_true: ThetaParams, weight: WeightSpec, strategy: Strategy, n: u64, trials: usize, seed: u64) -> Self {
        SimConfig {
            theta_true,
            weight,
            strategy,
            n,
            trials,
            seed,
            phase_fraction_exponent: DEFAULT_PHASE_EXPONENT,
            batch_size: DEFAULT_BATCH,
            adaptive_phase_exponent: DEFAULT_ADAPTIVE_PHASE_EXPONENT,
        }
    }

    /// Copies spent on the phase in the two-step strategy.
    pub fn phase_copies(&self) -> u64 {
        ((self.n as f64).powf(self.phase_fraction_exponent).floor() as u64).max(1)
    }

    /// Checks the configuration; returns human-readable warnings for legal but poor choices.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.n < 4 {
            return Err(QestError::InvalidConfig(format!("n must be at least 4, got {}", self.n)));
        }
        if self.trials < 2 {
            return Err(QestError::InvalidConfig(format!("need at least 2 trials, got {}", self.trials)));
        }
        let w = self.weight.interest_block();
        if w.dim() != 2 || !w.is_pd() {
            return Err(QestError::InvalidWeight("interest block of the weight must be 2x2 positive definite".into()));
        }
        match self.strategy {
            Strategy::TwoStep => {
                let e = self.phase_fraction_exponent;
                if !(e > 0.0 && e < 1.0) {
                    return Err(QestError::InvalidConfig(format!("phase_fraction_exponent must lie in (0, 1), got {e}")));
                }
                let m = self.phase_copies();
                if m < 2 {
                    return Err(QestError::InvalidConfig("two-step needs at least 2 phase copies".into()));
                }
                if m >= self.n {
                    return Err(QestError::InvalidConfig(format!("phase stage uses {m} of {} copies, none left", self.n)));
                }
                if 10 * (self.n - m) < self.n {
                    warnings.push(format!(
                        "only {} of {} copies remain after the phase stage; the error will be large",
                        self.n - m,
                        self.n
                    ));
                }
            }
            Strategy::Adaptive => {
                if self.batch_size < 3 {
                    return Err(QestError::InvalidConfig("batch size must be at least 3".into()));
                }
                let e = self.adaptive_phase_exponent;
                if !(0.0..1.0).contains(&e) {
                    return Err(QestError::InvalidConfig(format!("adaptive_phase_exponent must lie in [0, 1), got {e}")));
                }
                if self.batch_size > self.n {
                    warnings.push("batch size exceeds n; only the tomographic batch runs".into());
                }
            }
            Strategy::SingleCopyOptimal => {}
        }
        Ok(warnings)
    }
}

fn serialize_sym<S: Serializer>(m: &SymMat, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.to_rows().serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoStepDiagnostics {
    pub phase_copies: u64,
    /// `m · mean(θ̂3 - θ3)²`.
    pub phase_var_times_m: f64,
    /// `n · mean(θ̂3 - θ3)²`, the per-copy phase entry of the MSE matrix.
    pub v33: f64,
    /// `v33 / (v33 - g³³)`, absent when `v33 ≤ g³³`.
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimResult {
    pub strategy: Option<Strategy>,
    pub n: u64,
    pub trials: usize,
    /// MSE matrix of the n-copy estimator of `(θ1, θ2)`.
    #[serde(serialize_with = "serialize_sym")]
    pub empirical_mse: SymMat,
    pub weighted_mse: f64,
    pub n_times_weighted_mse: f64,
    /// Jackknife standard error of `n_times_weighted_mse`.
    pub stderr: f64,
    /// Trials with a degenerate phase sample or a non-converged MLE step.
    pub flagged_trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub two_step: Option<TwoStepDiagnostics>,
}

/// Multinomial draw of `n` outcomes from `povm` on `ρ_t`, as counts in element order.
pub fn sample_outcomes<R: Rng + ?Sized>(t: &ThetaParams, povm: &Povm, n: u64, rng: &mut R) -> Result<Vec<u64>> {
    sample_counts(&povm.probabilities(t), n, rng)
}

/// Multinomial sampling by sequential conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], n: u64, rng: &mut R) -> Result<Vec<u64>> {
    if let Some(p) = probs.iter().find(|p| !(**p >= -1e-12)) {
        return Err(QestError::InvalidPovm(format!("negative outcome probability {p:e}")));
    }
    let mut counts = vec![0; probs.len()];
    let mut left = n;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    for (i, p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let p = p.max(0.0);
        if i + 1 == probs.len() {
            counts[i] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(left, q).map_err(|e| QestError::InvalidPovm(e.to_string()))?.sample(rng);
        counts[i] = c;
        left -= c;
        mass -= p;
    }
    Ok(counts)
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// MSE matrix, weighted trace and its jackknife standard error from per-trial estimates.
///
/// Component 3 (if present) is compared modulo 2π. `n` scales the reported
/// `n_times_weighted_mse`; `w` must match the estimate dimension.
pub fn mse_from_trials(estimates: &[Vec<f64>], truth: &[f64], w: &SymMat, n: u64) -> Result<SimResult> {
    let k = truth.len();
    if estimates.len() < 2 {
        return Err(QestError::InvalidConfig("need at least 2 trials".into()));
    }
    if w.dim() != k {
        return Err(QestError::DimensionMismatch { expected: k, got: w.dim() });
    }
    let trials = estimates.len();
    let mut v = SymMat::zeros(k);
    let mut q = Vec::with_capacity(trials);
    for e in estimates {
        if e.len() != k {
            return Err(QestError::DimensionMismatch { expected: k, got: e.len() });
        }
        let err: Vec<f64> = (0..k).map(|i| if i == 2 { angle_difference(e[i], truth[i]) } else { e[i] - truth[i] }).collect();
        let mut wq = 0.0;
        for i in 0..k {
            for j in 0..k {
                wq += w.get(i, j) * err[i] * err[j];
            }
            for j in i..k {
                v.set(i, j, v.get(i, j) + err[i] * err[j]);
            }
        }
        q.push(wq);
    }
    let v = v.scale(1.0 / trials as f64);
    let weighted = w.trace_product(&v);
    let nf = n as f64;
    Ok(SimResult {
        strategy: None,
        n,
        trials,
        empirical_mse: v,
        weighted_mse: weighted,
        n_times_weighted_mse: nf * weighted,
        stderr: nf * jackknife_stderr(&q),
        flagged_trials: 0,
        two_step: None,
    })
}

/// Jackknife standard error of a sample mean.
fn jackknife_stderr(x: &[f64]) -> f64 {
    let t = x.len() as f64;
    let total: f64 = x.iter().sum();
    let loo: Vec<f64> = x.iter().map(|v| (total - v) / (t - 1.0)).collect();
    let mean_loo = loo.iter().sum::<f64>() / t;
    ((t - 1.0) / t * loo.iter().map(|m| (m - mean_loo).powi(2)).sum::<f64>()).sqrt()
}

pub fn run(cfg: &SimConfig) -> Result<SimResult> {
    match cfg.strategy {
        Strategy::SingleCopyOptimal => run_single_copy_optimal(cfg),
        Strategy::TwoStep => run_two_step(cfg),
        Strategy::Adaptive => run_adaptive(cfg),
    }
}

fn require(cfg: &SimConfig, s: Strategy) -> Result<()> {
    if cfg.strategy != s {
        return Err(QestError::InvalidConfig(format!("configuration is for strategy {}, not {s}", cfg.strategy)));
    }
    cfg.validate().map(|_| ())
}

/// Known phase: every copy is measured with the optimal POVM at the true point and
/// the locally unbiased single-copy estimates are averaged.
pub fn run_single_copy_optimal(cfg: &SimConfig) -> Result<SimResult> {
    require(cfg, Strategy::SingleCopyOptimal)?;
    let t = cfg.theta_true;
    let w = cfg.weight.interest_block();
    let (povm, _) = build_optimal_povm(&t, &w)?;
    let est = build_optimal_estimator(&t, &povm, 2)?;
    let probs = povm.probabilities(&t);
    let estimates: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let counts = sample_counts(&probs, cfg.n, &mut trial_rng(cfg.seed, i))?;
            Ok(average_estimate(&counts, &est.estimates))
        })
        .collect::<Result<_>>()?;
    let mut r = mse_from_trials(&estimates, &t.components(2), &w, cfg.n)?;
    r.strategy = Some(Strategy::SingleCopyOptimal);
    Ok(r)
}

fn average_estimate(counts: &[u64], table: &[Vec<f64>]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    let k = table[0].len();
    let mut out = vec![0.0; k];
    for (c, e) in counts.iter().zip(table) {
        for (o, v) in out.iter_mut().zip(e) {
            *o += *c as f64 * v;
        }
    }
    out.iter().map(|v| v / total as f64).collect()
}

/// Phase estimate from `m` copies: σ1 on the first half, σ2 on the rest. The sign
/// of θ1 is taken as known, since `(θ1, θ3)` and `(-θ1, θ3 + π)` give the same state.
/// Returns `None` when both empirical means vanish.
fn estimate_phase<R: Rng + ?Sized>(t: &ThetaParams, m: u64, rng: &mut R) -> Result<Option<f64>> {
    let s = t.bloch().0;
    let m1 = m.div_ceil(2);
    let m2 = m - m1;
    let mean = |axis: usize, copies: u64, rng: &mut R| -> Result<f64> {
        if copies == 0 {
            return Ok(0.0);
        }
        let up = sample_counts(&[0.5 * (1.0 + s[axis]), 0.5 * (1.0 - s[axis])], copies, rng)?[0];
        Ok((2.0 * up as f64 - copies as f64) / copies as f64)
    };
    let c = mean(0, m1, rng)?;
    let d = mean(1, m2, rng)?;
    if c == 0.0 && d == 0.0 {
        return Ok(None);
    }
    let sign = t.theta1().signum();
    Ok(Some((sign * d).atan2(sign * c)))
}

/// Unknown phase: `m = floor(n^e)` copies estimate θ3, the remaining copies use the
/// optimal measurement designed at the estimated phase.
pub fn run_two_step(cfg: &SimConfig) -> Result<SimResult> {
    require(cfg, Strategy::TwoStep)?;
    let t = cfg.theta_true;
    let w = cfg.weight.interest_block();
    let m = cfg.phase_copies();
    let rest = cfg.n - m;
    let per_trial: Vec<(Vec<f64>, f64, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i);
            let (phase, flagged) = match estimate_phase(&t, m, &mut rng)? {
                Some(p) => (p, false),
                None => (0.0, true),
            };
            let povm = build_phase_perturbed_povm(&t, phase, &w)?;
            let est = build_optimal_estimator(&t.with_theta3(phase), &povm, 2)?;
            let counts = sample_outcomes(&t, &povm, rest, &mut rng)?;
            Ok((average_estimate(&counts, &est.estimates), angle_difference(phase, t.theta3()), flagged))
        })
        .collect::<Result<_>>()?;
    let estimates: Vec<Vec<f64>> = per_trial.iter().map(|p| p.0.clone()).collect();
    let mut r = mse_from_trials(&estimates, &t.components(2), &w, cfg.n)?;
    let phase_mse = per_trial.iter().map(|p| p.1 * p.1).sum::<f64>() / cfg.trials as f64;
    let v33 = cfg.n as f64 * phase_mse;
    let g33 = 1.0 / (t.theta1() * t.theta1());
    r.strategy = Some(Strategy::TwoStep);
    r.flagged_trials = per_trial.iter().filter(|p| p.2).count();
    r.two_step =
        Some(TwoStepDiagnostics { phase_copies: m, phase_var_times_m: m as f64 * phase_mse, v33, gamma: gamma_factor(v33, g33).ok() });
    Ok(r)
}

/// One likelihood term: `count · log(a0 + a · s)`.
#[derive(Clone, Copy)]
struct Term {
    count: f64,
    a0: f64,
    a: Vec3,
}

/// Largest Bloch length the adaptive design will use.
const MAX_BLOCH: f64 = 1.0 - 1e-6;
/// Largest Bloch length used for measurement design and for warm starts.
const MAX_DESIGN_BLOCH: f64 = 0.99;
/// Smallest `|θ1|` the adaptive design will use.
const MIN_DESIGN_THETA1: f64 = 1e-3;

/// Maximum-likelihood Bloch vector by damped Newton steps, projected onto the
/// ball `|s| ≤ MAX_BLOCH`. The log-likelihood is concave in `s`.
fn mle_bloch(terms: &[Term], start: Vec3, steps: usize) -> (Vec3, bool) {
    let loglik = |s: &Vec3| -> f64 {
        let mut l = 0.0;
        for t in terms {
            let p = t.a0 + dot(&t.a, s);
            if p <= 0.0 {
                if t.count > 0.0 {
                    return f64::NEG_INFINITY;
                }
                continue;
            }
            l += t.count * p.ln();
        }
        l
    };
    let mut s = start;
    let mut cur = loglik(&s);
    for _ in 0..steps {
        let mut g = [0.0; 3];
        let mut h = SymMat::zeros(3);
        for t in terms {
            if t.count == 0.0 {
                continue;
            }
            let p = t.a0 + dot(&t.a, &s);
            for i in 0..3 {
                g[i] += t.count * t.a[i] / p;
                for j in i..3 {
                    h.set(i, j, h.get(i, j) + t.count * t.a[i] * t.a[j] / (p * p));
                }
            }
        }
        // ridge keeps the step defined when the data do not identify every direction
        let ridge = 1e-9 * h.trace().max(1.0);
        let h = h.add(&SymMat::identity(3).scale(ridge));
        let Ok(hinv) = h.inverse() else { return (s, false) };
        let step = hinv.to_gen().mul_vec(&g);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut cand = [s[0] + alpha * step[0], s[1] + alpha * step[1], s[2] + alpha * step[2]];
            let len = dot(&cand, &cand).sqrt();
            if len > MAX_BLOCH {
                cand = cand.map(|x| x * MAX_BLOCH / len);
            }
            let val = loglik(&cand);
            if val >= cur - 1e-12 * cur.abs() {
                let moved = (0..3).map(|i| (cand[i] - s[i]).abs()).fold(0.0, f64::max);
                s = cand;
                cur = val;
                accepted = true;
                if moved < 1e-10 {
                    return (s, true);
                }
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return (s, true);
        }
    }
    (s, false)
}

fn shrink(s: Vec3, max_len: f64) -> Vec3 {
    let len = dot(&s, &s).sqrt();
    if len > max_len {
        s.map(|x| x * max_len / len)
    } else {
        s
    }
}

/// Nearest model point usable for measurement design.
fn design_point(s: &Vec3, sign: f64) -> ThetaParams {
    let mut theta1 = sign * s[0].hypot(s[1]);
    let phase = (sign * s[1]).atan2(sign * s[0]);
    if theta1.abs() < MIN_DESIGN_THETA1 {
        theta1 = sign * MIN_DESIGN_THETA1;
    }
    let mut theta2 = s[2];
    let len = theta1.hypot(theta2);
    if len > MAX_DESIGN_BLOCH {
        theta1 *= MAX_DESIGN_BLOCH / len;
        theta2 *= MAX_DESIGN_BLOCH / len;
    }
    ThetaParams::new(theta1, theta2, phase).expect("projected point is valid")
}

/// Batched adaptive strategy: tomography on the first batch, then each batch measures
/// part of its copies along the in-plane axis perpendicular to the current phase estimate
/// (the most phase-sensitive projective measurement) and the rest with the optimal
/// measurement at the current maximum-likelihood estimate. The phase share keeps the
/// cumulative phase copies near `N^adaptive_phase_exponent`.
pub fn run_adaptive(cfg: &SimConfig) -> Result<SimResult> {
    require(cfg, Strategy::Adaptive)?;
    let t = cfg.theta_true;
    let w = cfg.weight.interest_block();
    let sign = t.theta1().signum();
    let s_true = t.bloch().0;
    let per_trial: Vec<(Vec<f64>, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, i);
            let mut terms: Vec<Term> = Vec::new();
            let first = cfg.batch_size.min(cfg.n);
            let mut start = [0.0; 3];
            for axis in 0..3 {
                let copies = first / 3 + u64::from((axis as u64) < first % 3);
                let up = sample_counts(&[0.5 * (1.0 + s_true[axis]), 0.5 * (1.0 - s_true[axis])], copies, &mut rng)?[0];
                let mut a = [0.0; 3];
                a[axis] = 0.5;
                terms.push(Term { count: up as f64, a0: 0.5, a });
                terms.push(Term { count: (copies - up) as f64, a0: 0.5, a: a.map(|x| -x) });
                if copies > 0 {
                    start[axis] = (2.0 * up as f64 - copies as f64) / copies as f64;
                }
            }
            let len = dot(&start, &start).sqrt();
            if len > 0.9 {
                start = start.map(|x| x * 0.9 / len);
            }
            let mut flagged = false;
            let (mut s_hat, ok) = mle_bloch(&terms, start, 20);
            flagged |= !ok;
            let mut used = first;
            let mut phase_used = 0u64;
            while used < cfg.n {
                let b = cfg.batch_size.min(cfg.n - used);
                let target = ((used + b) as f64).powf(cfg.adaptive_phase_exponent).ceil() as u64;
                let phase_b = target.saturating_sub(phase_used).min(b);
                let design = design_point(&s_hat, sign);
                if phase_b > 0 {
                    let (sin, cos) = design.theta3().sin_cos();
                    let axis = [-sin, cos, 0.0];
                    let p_up = 0.5 * (1.0 + dot(&axis, &s_true));
                    let up = sample_counts(&[p_up, 1.0 - p_up], phase_b, &mut rng)?[0];
                    terms.push(Term { count: up as f64, a0: 0.5, a: axis.map(|x| 0.5 * x) });
                    terms.push(Term { count: (phase_b - up) as f64, a0: 0.5, a: axis.map(|x| -0.5 * x) });
                    phase_used += phase_b;
                }
                if b > phase_b {
                    let (povm, _) = build_optimal_povm(&design, &w)?;
                    let counts = sample_outcomes(&t, &povm, b - phase_b, &mut rng)?;
                    for (c, e) in counts.iter().zip(povm.elements()) {
                        let (a0, a) = e.pauli();
                        terms.push(Term { count: *c as f64, a0, a });
                    }
                }
                used += b;
                let (next, ok) = mle_bloch(&terms, shrink(s_hat, MAX_DESIGN_BLOCH), 50);
                if ok {
                    s_hat = next;
                } else {
                    flagged = true;
                }
            }
            let theta1 = sign * s_hat[0].hypot(s_hat[1]);
            Ok((vec![theta1, s_hat[2]], flagged))
        })
        .collect::<Result<_>>()?;
    let estimates: Vec<Vec<f64>> = per_trial.iter().map(|p| p.0.clone()).collect();
    let mut r = mse_from_trials(&estimates, &t.components(2), &w, cfg.n)?;
    r.strategy = Some(Strategy::Adaptive);
    r.flagged_trials = per_trial.iter().filter(|p| p.1).count();
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub n_weighted_mse: f64,
    pub stderr: f64,
    pub gamma: Option<f64>,
    pub strategy: Strategy,
}

/// Runs `cfg` at every `n` in `ns`. Each `n` uses its own seed derived from `cfg.seed`.
pub fn run_convergence(cfg: &SimConfig, ns: &[u64]) -> Result<Vec<ConvergenceRow>> {
    ns.iter()
        .map(|&n| {
            let c = SimConfig { n, seed: cfg.seed ^ n.wrapping_mul(0x9E37_79B9_7F4A_7C15), ..cfg.clone() };
            let r = run(&c)?;
            Ok(ConvergenceRow {
                n,
                n_weighted_mse: r.n_times_weighted_mse,
                stderr: r.stderr,
                gamma: r.two_step.and_then(|d| d.gamma),
                strategy: cfg.strategy,
            })
        })
        .collect()
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,n_weighted_mse,stderr,gamma,strategy\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            fmt_sig(r.n_weighted_mse),
            fmt_sig(r.stderr),
            r.gamma.map(fmt_sig).unwrap_or_default(),
            r.strategy
        ));
    }
    out
}
