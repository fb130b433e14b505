//! Classical, SLD and RLD Fisher information for the qubit model.
//!
//! The quantum quantities use the Bloch-vector closed forms; the SLD operators
//! also have an independent route that solves `∂ρ = ½(ρL + Lρ)` directly in the
//! Pauli basis.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{QestError, Result};
use crate::linalg::{cross, dot, schur_complement, CMat, HermMat, SymMat, Vec3};
use crate::model::{check_param_count, pauli_combination, ThetaParams};
use crate::povm::Povm;

/// Probabilities below this are treated as dead outcomes.
pub const DEAD_OUTCOME: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FisherKind {
    Classical,
    Sld,
}

/// Real symmetric Fisher information matrix (per copy).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherMatrix {
    pub kind: FisherKind,
    pub matrix: SymMat,
}

impl FisherMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn inverse(&self) -> Result<SymMat> {
        self.matrix.inverse()
    }
}

/// Complex Hermitian RLD Fisher information matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RldFisherMatrix {
    pub matrix: HermMat,
}

impl RldFisherMatrix {
    pub fn inverse(&self) -> Result<HermMat> {
        self.matrix.inverse()
    }
}

/// `L = identity_coeff · σ0 + bloch_coeff · σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SldOperator {
    pub identity_coeff: f64,
    pub bloch_coeff: Vec3,
}

impl SldOperator {
    pub fn operator(&self) -> HermMat {
        pauli_combination(self.identity_coeff, &self.bloch_coeff)
    }

    /// Largest absolute difference over the four Pauli coefficients.
    pub fn max_coeff_diff(&self, o: &SldOperator) -> f64 {
        let mut d = (self.identity_coeff - o.identity_coeff).abs();
        for i in 0..3 {
            d = d.max((self.bloch_coeff[i] - o.bloch_coeff[i]).abs());
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SldOperators {
    pub ops: Vec<SldOperator>,
}

impl SldOperators {
    pub fn max_coeff_diff(&self, o: &SldOperators) -> f64 {
        self.ops.iter().zip(&o.ops).map(|(a, b)| a.max_coeff_diff(b)).fold(0.0, f64::max)
    }
}

/// SLD operators from the Bloch closed form.
pub fn sld_operators(t: &ThetaParams, k: usize) -> Result<SldOperators> {
    let s = t.bloch().0;
    let den = 1.0 - dot(&s, &s);
    let ops = t
        .bloch_derivatives(k)?
        .iter()
        .map(|d| {
            let r = dot(d, &s) / den;
            SldOperator { identity_coeff: -r, bloch_coeff: [d[0] + r * s[0], d[1] + r * s[1], d[2] + r * s[2]] }
        })
        .collect();
    Ok(SldOperators { ops })
}

/// SLD operators by solving the defining operator equation in the Pauli basis.
pub fn sld_operators_oracle(t: &ThetaParams, k: usize) -> Result<SldOperators> {
    let rho = *t.state().matrix().as_cmat();
    let half = Complex64::new(0.5, 0.0);
    let basis: Vec<CMat> = (0..4)
        .map(|mu| {
            let mut c = [0.0; 3];
            let c0 = if mu == 0 { 1.0 } else { 0.0 };
            if mu > 0 {
                c[mu - 1] = 1.0;
            }
            *pauli_combination(c0, &c).as_cmat()
        })
        .collect();
    let expand = |x: &CMat| -> [f64; 4] {
        let mut out = [0.0; 4];
        for (nu, b) in basis.iter().enumerate() {
            out[nu] = 0.5 * b.mul(x).trace().re;
        }
        out
    };
    // columns: action of X ↦ ½(ρX + Xρ) on each basis element
    let mut system = [[0.0; 4]; 4];
    for (mu, b) in basis.iter().enumerate() {
        let img = rho.mul(b).add(&b.mul(&rho)).scale(half);
        let col = expand(&img);
        for nu in 0..4 {
            system[nu][mu] = col[nu];
        }
    }
    let ops = t
        .state_derivatives(k)?
        .iter()
        .map(|drho| {
            let rhs = expand(drho.as_cmat());
            let x = solve4(system, rhs)?;
            Ok(SldOperator { identity_coeff: x[0], bloch_coeff: [x[1], x[2], x[3]] })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SldOperators { ops })
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Result<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap_or(col);
        if a[piv][col].abs() < 1e-14 {
            return Err(QestError::Singular("SLD operator equation"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..4 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for r in (0..4).rev() {
        let s: f64 = ((r + 1)..4).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// SLD Fisher information `g_ij = ⟨∂_i s, ∂_j s⟩ + ⟨∂_i s, s⟩⟨s, ∂_j s⟩ / (1 - s²)`.
pub fn sld_fisher(t: &ThetaParams, k: usize) -> Result<FisherMatrix> {
    let s = t.bloch().0;
    let den = 1.0 - dot(&s, &s);
    let d = t.bloch_derivatives(k)?;
    let matrix = SymMat::from_fn(k, |i, j| dot(&d[i], &d[j]) + dot(&d[i], &s) * dot(&s, &d[j]) / den);
    Ok(FisherMatrix { kind: FisherKind::Sld, matrix })
}

/// Closed-form `G⁻¹`: the 2×2 block `[[1-θ1², -θ1θ2], [-θ1θ2, 1-θ2²]]`, extended by `1/θ1²` for the phase.
pub fn sld_fisher_inverse_closed_form(t: &ThetaParams, k: usize) -> Result<SymMat> {
    check_param_count(k)?;
    let (a, b) = (t.theta1(), t.theta2());
    let block = SymMat::from_fn(2, |i, j| match (i, j) {
        (0, 0) => 1.0 - a * a,
        (1, 1) => 1.0 - b * b,
        _ => -a * b,
    });
    Ok(if k == 2 { block } else { SymMat::block_diag(&block, 1.0 / (a * a)) })
}

/// RLD Fisher information `g̃_ij = (⟨∂_i s, ∂_j s⟩ + i⟨∂_i s × ∂_j s, s⟩) / (1 - s²)`.
pub fn rld_fisher(t: &ThetaParams, k: usize) -> Result<RldFisherMatrix> {
    let s = t.bloch().0;
    let den = 1.0 - dot(&s, &s);
    let d = t.bloch_derivatives(k)?;
    let matrix = HermMat::from_fn(k, |i, j| Complex64::new(dot(&d[i], &d[j]), dot(&cross(&d[i], &d[j]), &s)) / den);
    Ok(RldFisherMatrix { matrix })
}

/// Closed-form `G̃⁻¹`: `(1 - s²) I` for two parameters; for three the real part equals
/// `G(3)⁻¹` and the phase column carries `-iθ2/θ1` and `+i`.
pub fn rld_fisher_inverse_closed_form(t: &ThetaParams, k: usize) -> Result<HermMat> {
    check_param_count(k)?;
    let (a, b) = (t.theta1(), t.theta2());
    if k == 2 {
        let v = 1.0 - a * a - b * b;
        return Ok(HermMat::from_real(&SymMat::diag(&[v, v])));
    }
    let re = sld_fisher_inverse_closed_form(t, 3)?;
    Ok(HermMat::from_fn(3, |i, j| {
        let im = match (i, j) {
            (0, 2) => -b / a,
            (1, 2) => 1.0,
            _ => 0.0,
        };
        Complex64::new(re.get(i, j), im)
    }))
}

/// Classical Fisher information of `povm` on `ρ_θ` for the first `k` parameters.
pub fn classical_fisher(t: &ThetaParams, povm: &Povm, k: usize) -> Result<FisherMatrix> {
    check_param_count(k)?;
    let probs = povm.probabilities(t);
    let grads = povm.probability_gradients(t, k)?;
    let mut matrix = SymMat::zeros(k);
    for ((p, g), e) in probs.iter().zip(&grads).zip(povm.elements()) {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if *p < DEAD_OUTCOME {
            if gmax < DEAD_OUTCOME {
                continue;
            }
            return Err(QestError::SingularModel { label: e.label.clone() });
        }
        for i in 0..k {
            for j in i..k {
                matrix.set(i, j, matrix.get(i, j) + g[i] * g[j] / p);
            }
        }
    }
    Ok(FisherMatrix { kind: FisherKind::Classical, matrix })
}

/// Fisher information for `(θ1, θ2)` when `θ3` is unknown: the Schur complement
/// `J_II - J_IN J_NN⁻¹ J_NI`, whose inverse is the interest block of `J⁻¹`.
pub fn effective_fisher(j: &FisherMatrix) -> Result<FisherMatrix> {
    if !j.matrix.is_pd() {
        return Err(QestError::NotPd { min_eigenvalue: j.matrix.min_eigenvalue() });
    }
    Ok(FisherMatrix { kind: j.kind, matrix: schur_complement(&j.matrix)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::psd_sqrt;

    fn t(a: f64, b: f64, c: f64) -> ThetaParams {
        ThetaParams::new(a, b, c).unwrap()
    }

    #[test]
    fn sld_identity_coefficient_example() {
        let ops = sld_operators(&t(0.5, 0.5, 0.0), 2).unwrap();
        assert!((ops.ops[1].identity_coeff + 1.0).abs() < 1e-15);
    }

    #[test]
    fn sld_theta2_zero_component_form() {
        let a: f64 = 0.4;
        let ops = sld_operators(&t(a, 0.0, 0.0), 2).unwrap();
        let r = a / (1.0 - a * a);
        assert!((ops.ops[0].identity_coeff + r).abs() < 1e-15);
        assert!((ops.ops[0].bloch_coeff[0] - (1.0 + a * a / (1.0 - a * a))).abs() < 1e-15);
    }

    #[test]
    fn sld_operators_have_zero_mean() {
        let p = t(0.3, -0.45, 2.0);
        let rho = p.state();
        for op in sld_operators(&p, 3).unwrap().ops {
            let m = rho.matrix().trace_product(op.operator().as_cmat());
            assert!(m.norm() < 1e-15);
        }
    }

    #[test]
    fn oracle_residual_at_reference_point() {
        let p = t(0.5, 0.5, 0.0);
        let rho = *p.state().matrix().as_cmat();
        let ops = sld_operators_oracle(&p, 3).unwrap();
        for (op, drho) in ops.ops.iter().zip(p.state_derivatives(3).unwrap()) {
            let l = *op.operator().as_cmat();
            let sym = rho.mul(&l).add(&l.mul(&rho)).scale(Complex64::new(0.5, 0.0));
            assert!(sym.max_abs_diff(drho.as_cmat()) < 1e-12);
        }
    }

    #[test]
    fn oracle_near_maximally_mixed() {
        let p = t(1e-6, 0.0, 0.7);
        let ops = sld_operators_oracle(&p, 2).unwrap();
        let d = p.bloch_derivatives(2).unwrap();
        for (op, di) in ops.ops.iter().zip(&d) {
            for c in 0..3 {
                assert!((op.bloch_coeff[c] - di[c]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sld_fisher_inverse_examples() {
        let g = sld_fisher(&t(0.5, 0.5, 1.0), 2).unwrap();
        let inv = g.inverse().unwrap();
        assert!(inv.max_abs_diff(&SymMat::from_rows(&[&[0.75, -0.25], &[-0.25, 0.75]]).unwrap()) < 1e-14);
        let g3 = sld_fisher(&t(0.5, 0.5, 1.0), 3).unwrap().inverse().unwrap();
        assert!((g3.get(2, 2) - 4.0).abs() < 1e-13);
        assert!(g3.get(0, 2).abs() < 1e-14 && g3.get(1, 2).abs() < 1e-14);
        let gd = sld_fisher(&t(0.3, 0.0, 0.2), 2).unwrap().inverse().unwrap();
        assert!(gd.get(0, 1).abs() < 1e-15);
    }

    #[test]
    fn trace_det_identity() {
        let p = t(0.3, -0.7, 1.1);
        let inv = sld_fisher_inverse_closed_form(&p, 2).unwrap();
        let s2 = 0.09 + 0.49;
        assert!((inv.trace() - 1.0 - inv.det()).abs() < 1e-12);
        assert!((inv.det() - (1.0 - s2)).abs() < 1e-12);
    }

    #[test]
    fn rld_examples() {
        let p = t(0.5, 0.5, 1.0);
        let inv2 = rld_fisher(&p, 2).unwrap().inverse().unwrap();
        assert!(inv2.re().max_abs_diff(&SymMat::diag(&[0.5, 0.5])) < 1e-14);
        assert!(inv2.im().max_abs() < 1e-14);
        let inv3 = rld_fisher(&p, 3).unwrap().inverse().unwrap();
        assert!((inv3.im().get(0, 2) + 1.0).abs() < 1e-13);
        assert!((inv3.im().get(1, 2) - 1.0).abs() < 1e-13);
        assert!((inv3.im().get(2, 0) - 1.0).abs() < 1e-13);
        assert!(inv3.max_abs_diff(&rld_fisher_inverse_closed_form(&p, 3).unwrap()) < 1e-12);
    }

    #[test]
    fn rld_real_part_matches_sld_for_three_params() {
        let p = t(-0.35, 0.6, 4.0);
        let rld = rld_fisher(&p, 3).unwrap().inverse().unwrap();
        let sld = sld_fisher(&p, 3).unwrap().inverse().unwrap();
        assert!(rld.re().max_abs_diff(&sld) < 1e-12);
    }

    #[test]
    fn sld_dominates_rld_for_two_params() {
        let p = t(0.2, 0.7, 0.0);
        let diff = sld_fisher(&p, 2).unwrap().inverse().unwrap().sub(&rld_fisher(&p, 2).unwrap().inverse().unwrap().re());
        assert!(diff.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn classical_fisher_sigma3() {
        let p = t(0.5, 0.5, 0.0);
        let povm = Povm::projective(&[0.0, 0.0, 1.0]).unwrap();
        let j = classical_fisher(&p, &povm, 2).unwrap();
        assert!(j.matrix.max_abs_diff(&SymMat::diag(&[0.0, 4.0 / 3.0])) < 1e-14);
    }

    #[test]
    fn classical_fisher_trivial_povm_is_zero() {
        let half = pauli_combination(0.5, &[0.0; 3]);
        let povm = Povm::new(vec![("a".into(), half), ("b".into(), half)]).unwrap();
        let j = classical_fisher(&t(0.5, 0.5, 0.0), &povm, 3).unwrap();
        assert_eq!(j.matrix, SymMat::zeros(3));
    }

    #[test]
    fn classical_fisher_dead_outcome_errors() {
        // s has length ~1 along z: the '-' outcome is nearly dead but still moves with θ2
        let p = t(1e-8, 0.999_999_999_999_99, 0.0);
        let povm = Povm::projective(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(classical_fisher(&p, &povm, 2), Err(QestError::SingularModel { .. })));
    }

    #[test]
    fn effective_fisher_examples() {
        let j = FisherMatrix {
            kind: FisherKind::Classical,
            matrix: SymMat::from_rows(&[&[2.0, 0.0, 1.0], &[0.0, 2.0, 0.0], &[1.0, 0.0, 2.0]]).unwrap(),
        };
        let e = effective_fisher(&j).unwrap();
        assert!(e.matrix.max_abs_diff(&SymMat::diag(&[1.5, 2.0])) < 1e-15);
        let g = sld_fisher(&t(0.5, 0.5, 1.0), 3).unwrap();
        let e = effective_fisher(&g).unwrap();
        assert!(e.matrix.max_abs_diff(&g.matrix.leading_block()) < 1e-15);
        let singular = FisherMatrix { kind: FisherKind::Classical, matrix: SymMat::diag(&[1.0, 1.0, 0.0]) };
        assert!(effective_fisher(&singular).is_err());
    }

    #[test]
    fn cotangent_sld_sqrt_consistency() {
        // sanity on psd_sqrt of a Fisher matrix
        let g = sld_fisher(&t(0.5, 0.5, 1.0), 2).unwrap().matrix;
        let r = psd_sqrt(&g).unwrap();
        assert!(r.mul(&r).symmetrize().max_abs_diff(&g) < 1e-13);
    }
}
