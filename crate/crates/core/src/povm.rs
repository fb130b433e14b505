//! Measurements: validated POVMs, the weighted-trace-optimal two-arm measurement
//! and its locally unbiased estimator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QestError, Result};
use crate::fisher::{classical_fisher, sld_fisher, sld_operators};
use crate::linalg::{add3, dot, norm, psd_sqrt, scale3, sym_eig, GenMat, HermMat, SymMat, Vec3};
use crate::model::{angle_difference, pauli_coefficients, pauli_combination, ThetaParams};

/// Per-entry tolerance of `Σ Π_x = I` and of element positivity.
pub const POVM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    pub label: String,
    pub operator: HermMat,
    /// `Π = identity_coeff σ0 + bloch_coeff · σ`, cached for fast probability evaluation.
    identity_coeff: f64,
    bloch_coeff: Vec3,
}

impl PovmElement {
    fn new(label: String, operator: HermMat) -> Self {
        let (identity_coeff, bloch_coeff) = pauli_coefficients(&operator);
        PovmElement { label, operator, identity_coeff, bloch_coeff }
    }

    /// `Tr(ρ Π)` for a state with Bloch vector `s`.
    pub fn probability_from_bloch(&self, s: &Vec3) -> f64 {
        self.identity_coeff + dot(&self.bloch_coeff, s)
    }

    pub fn pauli(&self) -> (f64, Vec3) {
        (self.identity_coeff, self.bloch_coeff)
    }
}

/// A finite qubit POVM. Elements are PSD and sum to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<(String, HermMat)>) -> Result<Self> {
        if elements.is_empty() {
            return Err(QestError::InvalidPovm("no elements".into()));
        }
        let mut sum = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (label, op) in &elements {
            if op.dim() != 2 {
                return Err(QestError::InvalidPovm(format!("element '{label}' is not 2x2")));
            }
            let min = op.eigenvalues2()[1];
            if !(min >= -POVM_TOL) {
                return Err(QestError::InvalidPovm(format!("element '{label}' is not PSD (min eigenvalue {min:e})")));
            }
            for (i, row) in sum.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v += op.get(i, j);
                }
            }
        }
        for (i, row) in sum.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (v - Complex64::new(want, 0.0)).norm() > POVM_TOL {
                    return Err(QestError::InvalidPovm(format!("elements do not sum to identity (entry ({i},{j}) = {v})")));
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (label, _) in &elements {
            if !seen.insert(label.as_str()) {
                return Err(QestError::InvalidPovm(format!("duplicate label '{label}'")));
            }
        }
        Ok(Povm { elements: elements.into_iter().map(|(l, op)| PovmElement::new(l, op)).collect() })
    }

    /// Two-outcome projective measurement of `n̂ · σ` with labels `+` / `-`.
    pub fn projective(direction: &Vec3) -> Result<Self> {
        let len = norm(direction);
        if !(len > 0.0) {
            return Err(QestError::InvalidPovm("zero measurement direction".into()));
        }
        let n = scale3(direction, 0.5 / len);
        Povm::new(vec![("+".into(), pauli_combination(0.5, &n)), ("-".into(), pauli_combination(0.5, &n.map(|x| -x)))])
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.elements.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.label == label)
    }

    /// Born-rule probabilities `Tr(ρ_θ Π_x)`.
    pub fn probabilities(&self, t: &ThetaParams) -> Vec<f64> {
        let s = t.bloch().0;
        self.elements.iter().map(|e| e.probability_from_bloch(&s)).collect()
    }

    /// `∂_i Tr(ρ_θ Π_x) = Tr(∂_i ρ_θ Π_x)` per element.
    pub fn probability_gradients(&self, t: &ThetaParams, k: usize) -> Result<Vec<Vec<f64>>> {
        let d = t.bloch_derivatives(k)?;
        Ok(self.elements.iter().map(|e| d.iter().map(|di| dot(&e.bloch_coeff, di)).collect()).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.wire()).expect("POVM serializes")
    }

    fn wire(&self) -> Vec<WireElement> {
        self.elements
            .iter()
            .map(|e| {
                let mut matrix = [[0.0; 2]; 4];
                for i in 0..2 {
                    for j in 0..2 {
                        let z = e.operator.get(i, j);
                        matrix[2 * i + j] = [z.re, z.im];
                    }
                }
                WireElement { label: e.label.clone(), matrix }
            })
            .collect()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let wire: Vec<WireElement> = serde_json::from_value(v.clone()).map_err(|e| QestError::Parse(e.to_string()))?;
        let elements = wire
            .into_iter()
            .map(|w| {
                let m = w.matrix;
                let c = crate::linalg::CMat::from_fn(2, |i, j| Complex64::new(m[2 * i + j][0], m[2 * i + j][1]));
                Ok((w.label, HermMat::from_cmat(&c).map_err(|e| QestError::InvalidPovm(e.to_string()))?))
            })
            .collect::<Result<Vec<_>>>()?;
        Povm::new(repair_rounding(elements))
    }
}

/// Deviations from validity this small are attributed to decimal rounding of serialized output.
const ROUNDING_TOL: f64 = 1e-7;

/// Undoes decimal rounding: clips slightly negative eigenvalues, then restores completeness
/// with the congruence `S^{-1/2} E S^{-1/2}` where `S` is the element sum. Larger defects are
/// left for [`Povm::new`] to reject.
fn repair_rounding(elements: Vec<(String, HermMat)>) -> Vec<(String, HermMat)> {
    if elements.iter().any(|(_, op)| op.dim() != 2) {
        return elements;
    }
    let clipped: Vec<(String, HermMat)> = elements
        .into_iter()
        .map(|(label, op)| {
            let (a, b) = pauli_coefficients(&op);
            let len = norm(&b);
            if len > a && len - a <= ROUNDING_TOL && len > 0.0 {
                (label, pauli_combination(a, &scale3(&b, a.max(0.0) / len)))
            } else {
                (label, op)
            }
        })
        .collect();
    let (mut a, mut b) = (0.0, [0.0; 3]);
    for (_, op) in &clipped {
        let (a0, b0) = pauli_coefficients(op);
        a += a0;
        b = add3(&b, &b0);
    }
    let len = norm(&b);
    let defect = (a - 1.0).abs() + len;
    if defect <= POVM_TOL || defect > ROUNDING_TOL {
        return clipped;
    }
    // S = a σ0 + b·σ has eigenvalues a ± |b| along ±b̂
    let (hi, lo) = ((a + len).powf(-0.5), (a - len).powf(-0.5));
    let axis = if len > 0.0 { scale3(&b, 0.5 * (hi - lo) / len) } else { [0.0; 3] };
    let root = pauli_combination(0.5 * (hi + lo), &axis);
    clipped
        .into_iter()
        .map(|(label, op)| {
            let m = root.as_cmat().mul(op.as_cmat()).mul(root.as_cmat());
            (label, HermMat::hermitian_part(&m))
        })
        .collect()
}

/// JSON wire form: `{label, matrix: [[re, im] × 4]}` row-major.
#[derive(Serialize, Deserialize)]
struct WireElement {
    label: String,
    matrix: [[f64; 2]; 4],
}

/// The two-arm mixture attaining the weighted-trace bound for `(θ1, θ2)`.
///
/// Arms are ordered by ascending eigenvalue of `F = √G⁻¹ W √G⁻¹`; arm `i`
/// measures along `directions[i]` with probability `probabilities[i] = √λ_i / Σ√λ_j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalPovmPlan {
    pub directions: Vec<Vec3>,
    pub probabilities: Vec<f64>,
    pub lambdas: Vec<f64>,
}

fn check_weight2(w: &SymMat) -> Result<()> {
    if w.dim() != 2 {
        return Err(QestError::InvalidWeight(format!("expected a 2x2 weight, got {}x{}", w.dim(), w.dim())));
    }
    if !w.is_finite() || !w.is_pd() {
        return Err(QestError::InvalidWeight("weight must be positive definite".into()));
    }
    Ok(())
}

/// Orients a measurement axis: positive overlap with `s`, else with `∂1 s`, else with `∂2 s`.
fn orient(n: Vec3, s: &Vec3, d: &[Vec3]) -> Vec3 {
    for r in [s, &d[0], &d[1]] {
        let o = dot(&n, r);
        if o.abs() > 1e-12 {
            return if o > 0.0 { n } else { n.map(|x| -x) };
        }
    }
    n
}

/// Embedding `E_θ`: columns `(cos θ3, sin θ3, 0)` and `(0, 0, 1)`, padded with a zero column.
fn embedding(t: &ThetaParams) -> GenMat {
    let (s, c) = t.theta3().sin_cos();
    GenMat::from_rows(&[&[c, 0.0, 0.0], &[s, 0.0, 0.0], &[0.0, 1.0, 0.0]]).expect("finite")
}

/// Optimal measurement for the two parameters of interest with the phase taken from `t`.
pub fn build_optimal_povm(t: &ThetaParams, w: &SymMat) -> Result<(Povm, OptimalPovmPlan)> {
    check_weight2(w)?;
    let g = sld_fisher(t, 2)?.matrix;
    let ginv = g.inverse()?;
    let root_ginv = psd_sqrt(&ginv)?;
    let f = root_ginv.sandwich(w);
    let eig = sym_eig(&f)?;
    // ascending
    let lambdas = vec![eig.values[1].max(0.0), eig.values[0].max(0.0)];
    let u_cols = [eig.vectors.column(1), eig.vectors.column(0)];

    let s = t.bloch().0;
    let d = t.bloch_derivatives(2)?;
    let e = embedding(t);
    let degenerate = (lambdas[1] - lambdas[0]).abs() <= 1e-12 * lambdas[1].max(1e-300);

    let mut directions = Vec::with_capacity(2);
    for arm in 0..2 {
        let other = lambdas[1 - arm];
        let normalizer = w.trace() - other * g.trace();
        let projector_route = if degenerate || normalizer.abs() < 1e-12 {
            None
        } else {
            rank_one_direction(&w.sub(&g.scale(other)).scale(1.0 / normalizer), &e)
        };
        let n = match projector_route {
            Some(n) => n,
            None => sld_eigen_direction(t, &root_ginv, &u_cols[arm])?,
        };
        directions.push(orient(n, &s, &d));
    }

    let roots: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    let probabilities: Vec<f64> = roots.iter().map(|r| r / total).collect();

    let mut elements = Vec::with_capacity(4);
    for (arm, (n, p)) in directions.iter().zip(&probabilities).enumerate() {
        let half = scale3(n, 0.5 * p);
        elements.push((format!("{}+", arm + 1), pauli_combination(0.5 * p, &half)));
        elements.push((format!("{}-", arm + 1), pauli_combination(0.5 * p, &half.map(|x| -x))));
    }
    let povm = Povm::new(elements)?;
    Ok((povm, OptimalPovmPlan { directions, probabilities, lambdas }))
}

/// Unit vector of `E M Eᵀ` when that 3×3 matrix is a rank-one projector.
fn rank_one_direction(m: &SymMat, e: &GenMat) -> Option<Vec3> {
    let p = SymMat::block_diag(m, 0.0).congruence(e);
    let eig = sym_eig(&p).ok()?;
    if eig.values[1].abs() > 1e-9 || eig.values[2].abs() > 1e-9 || (eig.values[0] - 1.0).abs() > 1e-9 {
        return None;
    }
    Some(eig.vectors.column(0))
}

/// Bloch axis of `L̂ = Σ_j (√G⁻¹ u)_j L_j`, the linear combination of SLD operators
/// singled out by the eigenvector `u` of `F`.
fn sld_eigen_direction(t: &ThetaParams, root_ginv: &SymMat, u: &Vec3) -> Result<Vec3> {
    let coeffs = root_ginv.to_gen().mul_vec(&u[..2]);
    let ops = sld_operators(t, 2)?;
    let mut n = [0.0; 3];
    for (c, op) in coeffs.iter().zip(&ops.ops) {
        for (ni, bi) in n.iter_mut().zip(op.bloch_coeff) {
            *ni += c * bi;
        }
    }
    let len = norm(&n);
    if !(len > 0.0) {
        return Err(QestError::Singular("optimal measurement direction"));
    }
    Ok(scale3(&n, 1.0 / len))
}

/// POVM designed as if the phase were `theta3_estimate`, for a state whose true phase is `t_true.theta3()`.
pub fn build_phase_perturbed_povm(t_true: &ThetaParams, theta3_estimate: f64, w: &SymMat) -> Result<Povm> {
    Ok(build_optimal_povm(&t_true.with_theta3(theta3_estimate), w)?.0)
}

/// A POVM together with an outcome → estimate table, locally unbiased at `anchor`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumEstimator {
    pub povm: Povm,
    /// One `k`-vector per POVM element, in element order.
    pub estimates: Vec<Vec<f64>>,
    pub anchor: ThetaParams,
}

impl QuantumEstimator {
    pub fn k(&self) -> usize {
        self.estimates.first().map_or(0, Vec::len)
    }

    pub fn estimate(&self, label: &str) -> Option<&[f64]> {
        self.povm.index_of(label).map(|i| self.estimates[i].as_slice())
    }

    /// Exact single-copy MSE matrix `Σ_x p(x)(θ̂(x) - θ)(θ̂(x) - θ)ᵀ` at the true point.
    pub fn mse_at(&self, truth: &ThetaParams) -> SymMat {
        let k = self.k();
        let probs = self.povm.probabilities(truth);
        let tv = truth.as_array();
        let mut v = SymMat::zeros(k);
        for (p, est) in probs.iter().zip(&self.estimates) {
            let err: Vec<f64> = (0..k).map(|i| if i == 2 { angle_difference(est[i], tv[i]) } else { est[i] - tv[i] }).collect();
            for i in 0..k {
                for j in i..k {
                    v.set(i, j, v.get(i, j) + p * err[i] * err[j]);
                }
            }
        }
        v
    }

    /// CSV with columns `label,theta1_hat,theta2_hat[,theta3_hat]`.
    pub fn to_csv(&self) -> String {
        let k = self.k();
        let mut out = String::from("label");
        for i in 1..=k {
            out.push_str(&format!(",theta{i}_hat"));
        }
        out.push('\n');
        for (e, est) in self.povm.elements().iter().zip(&self.estimates) {
            out.push_str(&e.label);
            for v in est {
                out.push_str(&format!(",{}", crate::report::fmt_sig(*v)));
            }
            out.push('\n');
        }
        out
    }
}

/// `θ̂(x) = θ + J⁻¹ ∂ log p_θ(x)` with `J` the classical Fisher information of `povm` at `anchor`.
pub fn build_optimal_estimator(anchor: &ThetaParams, povm: &Povm, k: usize) -> Result<QuantumEstimator> {
    let j = classical_fisher(anchor, povm, k)?;
    if j.matrix.min_eigenvalue() <= 1e-12 * j.matrix.max_abs().max(1.0) {
        return Err(QestError::RankDeficientMeasurement);
    }
    let jinv = j.inverse().map_err(|_| QestError::RankDeficientMeasurement)?.to_gen();
    let probs = povm.probabilities(anchor);
    let grads = povm.probability_gradients(anchor, k)?;
    let theta = anchor.components(k);
    let estimates = probs
        .iter()
        .zip(&grads)
        .map(|(p, g)| {
            let score: Vec<f64> = if *p > crate::fisher::DEAD_OUTCOME { g.iter().map(|x| x / p).collect() } else { vec![0.0; k] };
            let step = jinv.mul_vec(&score);
            theta.iter().zip(step).map(|(t, s)| t + s).collect()
        })
        .collect();
    Ok(QuantumEstimator { povm: povm.clone(), estimates, anchor: *anchor })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UnbiasednessReport {
    /// `‖Σ_x θ̂(x) p(x) - θ‖₂`.
    pub bias_residual: f64,
    /// `max_ij |Σ_x θ̂_i(x) ∂_j p(x) - δ_ij|`.
    pub derivative_residual: f64,
    pub passed: bool,
}

/// Checks both local-unbiasedness conditions at the estimator's anchor.
pub fn verify_locally_unbiased(e: &QuantumEstimator) -> Result<UnbiasednessReport> {
    let k = e.k();
    let probs = e.povm.probabilities(&e.anchor);
    let grads = e.povm.probability_gradients(&e.anchor, k)?;
    let theta = e.anchor.components(k);
    let mut bias = vec![0.0; k];
    let mut deriv = vec![vec![0.0; k]; k];
    for ((p, g), est) in probs.iter().zip(&grads).zip(&e.estimates) {
        for i in 0..k {
            bias[i] += est[i] * p;
            for j in 0..k {
                deriv[i][j] += est[i] * g[j];
            }
        }
    }
    let bias_residual = bias.iter().zip(&theta).map(|(b, t)| (b - t).powi(2)).sum::<f64>().sqrt();
    let mut derivative_residual: f64 = 0.0;
    for (i, row) in deriv.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            derivative_residual = derivative_residual.max((v - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    Ok(UnbiasednessReport { bias_residual, derivative_residual, passed: bias_residual < 1e-9 && derivative_residual < 1e-9 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::classical_fisher;

    fn t(a: f64, b: f64, c: f64) -> ThetaParams {
        ThetaParams::new(a, b, c).unwrap()
    }

    #[test]
    fn rejects_incomplete() {
        let half = pauli_combination(0.5, &[0.0; 3]);
        assert!(Povm::new(vec![("a".into(), half)]).is_err());
        let neg = pauli_combination(0.5, &[0.0, 0.0, 0.7]);
        let comp = pauli_combination(0.5, &[0.0, 0.0, -0.7]);
        assert!(Povm::new(vec![("a".into(), neg), ("b".into(), comp)]).is_err());
        assert!(Povm::new(vec![]).is_err());
        let dup = Povm::new(vec![("a".into(), half), ("a".into(), half)]);
        assert!(matches!(dup, Err(QestError::InvalidPovm(_))));
    }

    #[test]
    fn identity_weight_example() {
        let p = t(0.5, 0.5, 0.0);
        let (povm, plan) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        let r = 0.5f64.sqrt();
        let n1 = plan.directions[0];
        let n2 = plan.directions[1];
        for (a, b) in n1.iter().zip([r, 0.0, r]) {
            assert!((a - b).abs() < 1e-12, "{n1:?}");
        }
        for (a, b) in n2.iter().zip([r, 0.0, -r]) {
            assert!((a - b).abs() < 1e-12, "{n2:?}");
        }
        assert!((plan.probabilities[0] - r / (1.0 + r)).abs() < 1e-12);
        assert!((plan.probabilities[1] - 1.0 / (1.0 + r)).abs() < 1e-12);
        assert!(dot(&n1, &n2).abs() < 1e-12);
        assert_eq!(povm.labels(), vec!["1+", "1-", "2+", "2-"]);
    }

    #[test]
    fn optimal_mse_at_reference_point() {
        let p = t(0.6, 0.0, 0.3);
        let (povm, _) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        let jinv = classical_fisher(&p, &povm, 2).unwrap().inverse().unwrap();
        assert!(jinv.max_abs_diff(&SymMat::diag(&[1.44, 1.8])) < 1e-12);
    }

    #[test]
    fn estimator_identity_weight_display() {
        let p = t(0.5, 0.5, 0.0);
        let (povm, plan) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        let est = build_optimal_estimator(&p, &povm, 2).unwrap();
        let s = p.bloch_length();
        let p1 = plan.probabilities[0];
        let p2 = plan.probabilities[1];
        // arm 2: θ ± (1/(p2 s))(-θ2, θ1), as an unordered pair
        let delta = [-0.5 / (p2 * s), 0.5 / (p2 * s)];
        let plus = est.estimate("2+").unwrap();
        let minus = est.estimate("2-").unwrap();
        let a = [0.5 + delta[0], 0.5 + delta[1]];
        let b = [0.5 - delta[0], 0.5 - delta[1]];
        let close = |x: &[f64], y: &[f64; 2]| (x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12;
        assert!((close(plus, &a) && close(minus, &b)) || (close(plus, &b) && close(minus, &a)));
        // arm 1: [1 ± (1/p1)(1-s)/s] θ
        let f = (1.0 - s) / (p1 * s);
        let plus = est.estimate("1+").unwrap();
        assert!((plus[0] - 0.5 * (1.0 + f)).abs() < 1e-12 && (plus[1] - 0.5 * (1.0 + f)).abs() < 1e-12);
        // arm 2 outcomes are fair coins at the anchor
        let probs = povm.probabilities(&p);
        assert!((probs[2] - p2 / 2.0).abs() < 1e-15 && (probs[3] - p2 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn estimator_is_locally_unbiased_and_mse_is_inverse_fisher() {
        let p = t(-0.3, 0.55, 5.1);
        let w = SymMat::from_rows(&[&[2.0, 0.3], &[0.3, 0.7]]).unwrap();
        let (povm, _) = build_optimal_povm(&p, &w).unwrap();
        let est = build_optimal_estimator(&p, &povm, 2).unwrap();
        let rep = verify_locally_unbiased(&est).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.bias_residual < 1e-12);
        let jinv = classical_fisher(&p, &povm, 2).unwrap().inverse().unwrap();
        assert!(est.mse_at(&p).max_abs_diff(&jinv) < 1e-10);
    }

    #[test]
    fn zero_estimator_residuals() {
        let p = t(0.6, 0.0, 0.3);
        let (povm, _) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        let est = QuantumEstimator { povm, estimates: vec![vec![0.0, 0.0]; 4], anchor: p };
        let rep = verify_locally_unbiased(&est).unwrap();
        assert!((rep.bias_residual - 0.6).abs() < 1e-15);
        assert!((rep.derivative_residual - 1.0).abs() < 1e-15);
        assert!(!rep.passed);
    }

    #[test]
    fn foreign_anchor_reports_residuals() {
        // at a fixed phase the model is affine, so only a phase mismatch can break unbiasedness
        let p = t(0.6, 0.0, 0.3);
        let q = t(0.6, 0.0, 0.8);
        let (povm, _) = build_optimal_povm(&q, &SymMat::identity(2)).unwrap();
        let mut est = build_optimal_estimator(&q, &povm, 2).unwrap();
        est.anchor = p;
        let rep = verify_locally_unbiased(&est).unwrap();
        assert!(!rep.passed);
        assert!(rep.bias_residual > 1e-3 || rep.derivative_residual > 1e-3);
    }

    #[test]
    fn rank_deficient_measurement() {
        let povm = Povm::projective(&[0.0, 0.0, 1.0]).unwrap();
        let err = build_optimal_estimator(&t(0.5, 0.5, 0.0), &povm, 2).unwrap_err();
        assert_eq!(err, QestError::RankDeficientMeasurement);
    }

    #[test]
    fn degenerate_weight_uses_eigen_route() {
        // W = G makes F the identity
        let p = t(0.4, -0.3, 2.0);
        let g = sld_fisher(&p, 2).unwrap().matrix;
        let (povm, plan) = build_optimal_povm(&p, &g).unwrap();
        assert!((plan.probabilities[0] - 0.5).abs() < 1e-12);
        let jinv = classical_fisher(&p, &povm, 2).unwrap().inverse().unwrap();
        let bound = crate::bounds::nagaoka_bound(&p, &g).unwrap();
        assert!((g.trace_product(&jinv) - bound).abs() < 1e-9);
    }

    #[test]
    fn projector_and_eigen_routes_agree() {
        let p = t(0.25, 0.6, 1.3);
        let w = SymMat::from_rows(&[&[1.0, -0.4], &[-0.4, 3.0]]).unwrap();
        let (_, plan) = build_optimal_povm(&p, &w).unwrap();
        let g = sld_fisher(&p, 2).unwrap().matrix;
        let rg = psd_sqrt(&g.inverse().unwrap()).unwrap();
        let eig = sym_eig(&rg.sandwich(&w)).unwrap();
        let n = sld_eigen_direction(&p, &rg, &eig.vectors.column(1)).unwrap();
        assert!((dot(&n, &plan.directions[0]).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_perturbed_identity() {
        let p = t(0.6, 0.0, 0.3);
        let povm = build_phase_perturbed_povm(&p, 0.3, &SymMat::identity(2)).unwrap();
        assert_eq!(povm, build_optimal_povm(&p, &SymMat::identity(2)).unwrap().0);
    }

    #[test]
    fn json_roundtrip() {
        let p = t(0.5, 0.5, 1.0);
        let (povm, _) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        let v = povm.to_json();
        assert_eq!(v[0]["label"], "1+");
        assert_eq!(v[0]["matrix"].as_array().unwrap().len(), 4);
        let back = Povm::from_json(&v).unwrap();
        for (a, b) in back.elements().iter().zip(povm.elements()) {
            assert_eq!(a.label, b.label);
            assert!(a.operator.max_abs_diff(&b.operator) < 1e-15);
        }
    }

    #[test]
    fn json_roundtrip_after_rounding() {
        let p = t(0.3, -0.45, 2.0);
        let (povm, _) = build_optimal_povm(&p, &SymMat::from_rows(&[&[1.0, 0.3], &[0.3, 2.0]]).unwrap()).unwrap();
        let mut v = povm.to_json();
        crate::report::round_json(&mut v);
        let back = Povm::from_json(&v).unwrap();
        for (a, b) in back.elements().iter().zip(povm.elements()) {
            assert!(a.operator.max_abs_diff(&b.operator) < 1e-8);
        }
        // genuine defects are still rejected
        v[0]["matrix"][0][0] = serde_json::json!(0.9);
        assert!(Povm::from_json(&v).is_err());
    }

    #[test]
    fn estimator_csv_columns() {
        let p = t(0.5, 0.5, 1.0);
        let (povm, _) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        let csv = build_optimal_estimator(&p, &povm, 2).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("label,theta1_hat,theta2_hat"));
        assert_eq!(csv.lines().count(), 5);
    }
}
