//! Membership predicates for the sets of attainable MSE matrices.
//!
//! Every predicate returns named slack values. A condition holds when its slack is
//! `≥ -BOUNDARY_TOL`; strict inequalities whose slack lies within `±BOUNDARY_TOL`
//! are accepted but flagged as boundary cases.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::bounds::gamma_factor;
use crate::error::{QestError, Result};
use crate::fisher::{rld_fisher_inverse_closed_form, sld_fisher_inverse_closed_form};
use crate::linalg::{sym_eig, SymMat};
use crate::model::ThetaParams;

pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub member: bool,
    pub boundary: bool,
    /// Non-finite margins (undefined γ) serialize as `null`.
    #[serde(serialize_with = "serialize_margins")]
    pub margins: BTreeMap<String, f64>,
}

fn serialize_margins<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let clean: BTreeMap<&str, Option<f64>> = m.iter().map(|(k, v)| (k.as_str(), v.is_finite().then_some(*v))).collect();
    clean.serialize(s)
}

#[derive(Clone, Copy)]
enum Cond {
    Strict,
    NonStrict,
}

impl RegionVerdict {
    fn from_conditions(conds: &[(&str, f64, Cond)]) -> Self {
        let member = conds.iter().all(|(_, v, _)| *v >= -BOUNDARY_TOL);
        let boundary = member
            && conds.iter().any(|(_, v, c)| match c {
                Cond::Strict => *v <= BOUNDARY_TOL,
                Cond::NonStrict => v.abs() <= BOUNDARY_TOL,
            });
        let margins = conds.iter().map(|(n, v, _)| (n.to_string(), *v)).collect();
        RegionVerdict { member, boundary, margins }
    }

    pub fn margin(&self, name: &str) -> Option<f64> {
        self.margins.get(name).copied()
    }
}

fn check_candidate(v: &SymMat, k: usize) -> Result<()> {
    if v.dim() != k {
        return Err(QestError::DimensionMismatch { expected: k, got: v.dim() });
    }
    if !v.is_finite() {
        return Err(QestError::NonFinite);
    }
    Ok(())
}

/// `V > G⁻¹` and `det(V - G⁻¹) ≥ det G⁻¹`.
pub fn in_region_d(v: &SymMat, t: &ThetaParams) -> Result<RegionVerdict> {
    check_candidate(v, 2)?;
    let a = sld_fisher_inverse_closed_form(t, 2)?;
    let diff = v.sub(&a);
    Ok(RegionVerdict::from_conditions(&[
        ("eigen_slack", diff.min_eigenvalue(), Cond::Strict),
        ("det_slack", diff.det() - a.det(), Cond::NonStrict),
    ]))
}

/// `V > G⁻¹` and `Tr(G⁻¹ V⁻¹) ≤ 1`.
pub fn in_region_d_gm(v: &SymMat, t: &ThetaParams) -> Result<RegionVerdict> {
    check_candidate(v, 2)?;
    let vinv = v.inverse()?;
    let a = sld_fisher_inverse_closed_form(t, 2)?;
    Ok(RegionVerdict::from_conditions(&[
        ("eigen_slack", v.sub(&a).min_eigenvalue(), Cond::Strict),
        ("trace_slack", 1.0 - a.trace_product(&vinv), Cond::NonStrict),
    ]))
}

fn g33(t: &ThetaParams) -> f64 {
    1.0 / (t.theta1() * t.theta1())
}

/// γ when `v33 > g³³`, otherwise NaN.
fn gamma_or_nan(v33: f64, t: &ThetaParams) -> f64 {
    gamma_factor(v33, g33(t)).unwrap_or(f64::NAN)
}

/// Slack that is `-∞` when the underlying quantity is undefined.
fn or_neg_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::NEG_INFINITY
    } else {
        x
    }
}

/// Three-parameter attainable region: `V ≥ 0`, `v33 > g³³`, and the two-parameter
/// conditions with `G⁻¹` inflated by `γ = v33 / (v33 - g³³)`.
pub fn in_region_d3(v: &SymMat, t: &ThetaParams) -> Result<RegionVerdict> {
    check_candidate(v, 3)?;
    let a = sld_fisher_inverse_closed_form(t, 2)?;
    let v2 = v.leading_block();
    let v33 = v.get(2, 2);
    let gamma = gamma_or_nan(v33, t);
    let ga = a.scale(gamma);
    let diff = v2.sub(&ga);
    let (eig, det) = if gamma.is_finite() { (diff.min_eigenvalue(), diff.det() - ga.det()) } else { (f64::NAN, f64::NAN) };
    Ok(RegionVerdict::from_conditions(&[
        ("psd_slack", v.min_eigenvalue(), Cond::NonStrict),
        ("v33_slack", v33 - g33(t), Cond::Strict),
        ("eigen_slack", or_neg_inf(eig), Cond::Strict),
        ("det_slack", or_neg_inf(det), Cond::NonStrict),
    ]))
}

/// Region allowed by the SLD bound alone: `V2 ≥ G⁻¹`, `v33 ≥ g³³`.
pub fn in_region_sld3(v: &SymMat, t: &ThetaParams) -> Result<RegionVerdict> {
    check_candidate(v, 3)?;
    let a = sld_fisher_inverse_closed_form(t, 2)?;
    Ok(RegionVerdict::from_conditions(&[
        ("eigen_slack", v.leading_block().sub(&a).min_eigenvalue(), Cond::NonStrict),
        ("v33_slack", v.get(2, 2) - g33(t), Cond::NonStrict),
    ]))
}

/// `γ G⁻¹ - (γ - 1) G̃⁻¹` on the interest block.
pub fn holevo_region_threshold(t: &ThetaParams, gamma: f64) -> Result<SymMat> {
    let a = sld_fisher_inverse_closed_form(t, 2)?;
    let r = rld_fisher_inverse_closed_form(t, 2)?.re();
    Ok(a.scale(gamma).sub(&r.scale(gamma - 1.0)))
}

/// Region allowed by the Holevo bound: `V ≥ G⁻¹` for two parameters; for three,
/// `V ≥ 0`, `v33 > g³³`, `V2 > G⁻¹` and `V2 ≥ γ G⁻¹ - (γ - 1) G̃⁻¹`.
pub fn in_region_h(v: &SymMat, t: &ThetaParams) -> Result<RegionVerdict> {
    match v.dim() {
        2 => {
            check_candidate(v, 2)?;
            let a = sld_fisher_inverse_closed_form(t, 2)?;
            Ok(RegionVerdict::from_conditions(&[("eigen_slack", v.sub(&a).min_eigenvalue(), Cond::NonStrict)]))
        }
        3 => {
            check_candidate(v, 3)?;
            let a = sld_fisher_inverse_closed_form(t, 2)?;
            let v2 = v.leading_block();
            let v33 = v.get(2, 2);
            let gamma = gamma_or_nan(v33, t);
            let threshold_slack = if gamma.is_finite() { v2.sub(&holevo_region_threshold(t, gamma)?).min_eigenvalue() } else { f64::NAN };
            Ok(RegionVerdict::from_conditions(&[
                ("psd_slack", v.min_eigenvalue(), Cond::NonStrict),
                ("v33_slack", v33 - g33(t), Cond::Strict),
                ("sld_slack", v2.sub(&a).min_eigenvalue(), Cond::Strict),
                ("threshold_slack", or_neg_inf(threshold_slack), Cond::NonStrict),
            ]))
        }
        d => Err(QestError::DimensionMismatch { expected: 3, got: d }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1Report {
    /// `det V ≥ c²` and `V > 0`.
    pub d2_member: bool,
    pub samples: usize,
    /// Samples with `Tr(X V) < 2c √det X`.
    pub d1_violations: usize,
    /// Smallest observed `Tr(X V) - 2c √det X`.
    pub worst_slack: f64,
    /// Sampling agrees with the exact classification.
    pub consistent: bool,
}

/// Compares `{V > 0 : det V ≥ c²}` with `{V : Tr(X V) ≥ 2c √det X for all X > 0}` by sampling.
///
/// Sample 0 is the analytic worst case: `V⁻¹` for PD `V`, otherwise a projector onto
/// the most negative eigendirection of `V` (regularised to stay PD).
pub fn lemma1_equivalence_check(c: f64, v: &SymMat, trials: usize, seed: u64) -> Result<Lemma1Report> {
    check_candidate(v, 2)?;
    if !(c > 0.0) {
        return Err(QestError::InvalidConfig(format!("c must be positive, got {c}")));
    }
    let pd = v.is_pd();
    let d2_member = pd && v.det() >= c * c;
    let first = if pd {
        v.inverse()?
    } else {
        let e = sym_eig(v)?;
        let u = e.vectors.column(1);
        SymMat::from_fn(2, |i, j| u[i] * u[j] + if i == j { 1e-6 } else { 0.0 })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for n in 0..trials.max(1) {
        let x = if n == 0 {
            first
        } else {
            let b: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
            SymMat::from_fn(2, |i, j| b[i] * b[j] + b[2 + i] * b[2 + j] + if i == j { 1e-6 } else { 0.0 })
        };
        let lhs = x.trace_product(v);
        let slack = lhs - 2.0 * c * x.det().max(0.0).sqrt();
        worst = worst.min(slack);
        if slack < -BOUNDARY_TOL * lhs.abs().max(1.0) {
            violations += 1;
        }
    }
    Ok(Lemma1Report {
        d2_member,
        samples: trials.max(1),
        d1_violations: violations,
        worst_slack: worst,
        consistent: d2_member == (violations == 0),
    })
}
