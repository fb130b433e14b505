//! Precision bounds on the weighted mean-square error `Tr(W V)`.

use serde::Serialize;

use crate::error::{QestError, Result};
use crate::fisher::{rld_fisher, rld_fisher_inverse_closed_form, sld_fisher, sld_fisher_inverse_closed_form};
use crate::linalg::{cross, dot, fidelity, norm, psd_sqrt, sym_eig, trabs, trabs_eigen, GenMat, SymMat, Vec3};
use crate::model::{check_param_count, ThetaParams};

/// Weight matrix of the figure of merit. The block form is only meaningful for three
/// parameters and is never inferred from numeric zeros.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightSpec {
    Full(SymMat),
    Block { w2: SymMat, w3: f64 },
}

fn check_pd(m: &SymMat) -> Result<()> {
    if !m.is_finite() {
        return Err(QestError::InvalidWeight("non-finite entry".into()));
    }
    if !m.is_pd() {
        return Err(QestError::InvalidWeight(format!("weight must be positive definite (min eigenvalue {:e})", m.min_eigenvalue())));
    }
    Ok(())
}

impl WeightSpec {
    pub fn identity(k: usize) -> Self {
        WeightSpec::Full(SymMat::identity(k))
    }

    pub fn full(m: SymMat) -> Result<Self> {
        check_pd(&m)?;
        Ok(WeightSpec::Full(m))
    }

    pub fn block(w2: SymMat, w3: f64) -> Result<Self> {
        if w2.dim() != 2 {
            return Err(QestError::DimensionMismatch { expected: 2, got: w2.dim() });
        }
        check_pd(&w2)?;
        if !(w3 > 0.0 && w3.is_finite()) {
            return Err(QestError::InvalidWeight(format!("w3 must be positive, got {w3}")));
        }
        Ok(WeightSpec::Block { w2, w3 })
    }

    pub fn is_block(&self) -> bool {
        matches!(self, WeightSpec::Block { .. })
    }

    /// Expanded `k × k` matrix.
    pub fn matrix(&self, k: usize) -> Result<SymMat> {
        check_param_count(k)?;
        match self {
            WeightSpec::Full(m) if m.dim() == k => Ok(*m),
            WeightSpec::Full(m) => Err(QestError::DimensionMismatch { expected: k, got: m.dim() }),
            WeightSpec::Block { w2, w3 } if k == 3 => Ok(SymMat::block_diag(w2, *w3)),
            WeightSpec::Block { .. } => Err(QestError::DimensionMismatch { expected: 3, got: k }),
        }
    }

    /// Weight on the two parameters of interest.
    pub fn interest_block(&self) -> SymMat {
        match self {
            WeightSpec::Full(m) if m.dim() == 3 => m.leading_block(),
            WeightSpec::Full(m) => *m,
            WeightSpec::Block { w2, .. } => *w2,
        }
    }
}

fn check_weight_dim(w: &SymMat, k: usize) -> Result<()> {
    if w.dim() != k {
        return Err(QestError::DimensionMismatch { expected: k, got: w.dim() });
    }
    check_pd(w)
}

/// `Tr(W G⁻¹)`.
pub fn sld_cr_bound(t: &ThetaParams, k: usize, w: &WeightSpec) -> Result<f64> {
    let w = w.matrix(k)?;
    let ginv = sld_fisher(t, k)?.inverse()?;
    Ok(w.trace_product(&ginv))
}

/// `Tr(W Re G̃⁻¹) + TrAbs(W Im G̃⁻¹)`, with TrAbs from explicit complex eigenvalues.
pub fn rld_cr_bound(t: &ThetaParams, k: usize, w: &WeightSpec) -> Result<f64> {
    let w = w.matrix(k)?;
    let rinv = rld_fisher(t, k)?.inverse()?;
    Ok(w.trace_product(&rinv.re()) + trabs_eigen(&w.to_gen().mul(&rinv.im()))?)
}

/// Two-parameter bound `Tr(W G⁻¹) + 2√det(W G⁻¹)`.
pub fn nagaoka_bound(t: &ThetaParams, w: &SymMat) -> Result<f64> {
    check_weight_dim(w, 2)?;
    let ginv = sld_fisher_inverse_closed_form(t, 2)?;
    Ok(w.trace_product(&ginv) + 2.0 * (w.det() * ginv.det()).max(0.0).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct HgmBound {
    pub value: f64,
    /// Eigenvalues of `F = √G⁻¹ W √G⁻¹`, descending.
    pub lambdas: Vec<f64>,
    /// Orthogonal eigenvectors of `F` as columns.
    #[serde(skip)]
    pub u: GenMat,
}

/// `(Σ √λ_i)²` over the eigenvalues of `√G⁻¹ W √G⁻¹`.
pub fn hgm_bound(t: &ThetaParams, k: usize, w: &WeightSpec) -> Result<HgmBound> {
    let w = w.matrix(k)?;
    let root = psd_sqrt(&sld_fisher(t, k)?.inverse()?)?;
    let eig = sym_eig(&root.sandwich(&w))?;
    let lambdas: Vec<f64> = eig.values.iter().map(|l| l.max(0.0)).collect();
    let sum: f64 = lambdas.iter().map(|l| l.sqrt()).sum();
    Ok(HgmBound { value: sum * sum, lambdas, u: eig.vectors })
}

/// HGM bound as the squared matrix fidelity `F(G⁻¹, W)²`.
pub fn hgm_bound_fidelity(t: &ThetaParams, k: usize, w: &WeightSpec) -> Result<f64> {
    let w = w.matrix(k)?;
    let f = fidelity(&sld_fisher_inverse_closed_form(t, k)?, &w)?;
    Ok(f * f)
}

/// Block-weight HGM bound `(√C^N[W2] + √(w3 g³³))²`.
pub fn hgm_block_closed_form(t: &ThetaParams, w2: &SymMat, w3: f64) -> Result<f64> {
    let g33 = 1.0 / (t.theta1() * t.theta1());
    let cn = nagaoka_bound(t, w2)?;
    Ok((cn.sqrt() + (w3 * g33).sqrt()).powi(2))
}

/// `γ = v33 / (v33 - g³³)`.
pub fn gamma_factor(v33: f64, g33: f64) -> Result<f64> {
    if !(v33 > g33) || !(g33 > 0.0) || !v33.is_finite() {
        return Err(QestError::InfeasibleMse { v33, g33 });
    }
    Ok(v33 / (v33 - g33))
}

/// Three-parameter Holevo bound, equal to the RLD bound for this model.
///
/// Block weights use the closed form
/// `Tr(W2 G⁻¹) + w3 g³³ + 2√(w3 g³³) √Tr(W2 (G⁻¹ - G̃⁻¹))`; full weights use
/// `Tr(W G⁻¹) + TrAbs(W Im G̃⁻¹)` with the structured TrAbs.
pub fn holevo_bound_k3(t: &ThetaParams, w: &WeightSpec) -> Result<f64> {
    match w {
        WeightSpec::Block { w2, w3 } => {
            check_weight_dim(w2, 2)?;
            let ginv = sld_fisher_inverse_closed_form(t, 2)?;
            let rinv = rld_fisher_inverse_closed_form(t, 2)?.re();
            let g33 = 1.0 / (t.theta1() * t.theta1());
            let gap = w2.trace_product(&ginv.sub(&rinv)).max(0.0);
            Ok(w2.trace_product(&ginv) + w3 * g33 + 2.0 * (w3 * g33).sqrt() * gap.sqrt())
        }
        WeightSpec::Full(_) => {
            let wm = w.matrix(3)?;
            let ginv = sld_fisher_inverse_closed_form(t, 3)?;
            let im = rld_fisher_inverse_closed_form(t, 3)?.im();
            Ok(wm.trace_product(&ginv) + trabs(&wm.to_gen().mul(&im))?)
        }
    }
}

/// `h[X|W] = Σ w_ij (⟨xⁱ,xʲ⟩ - ⟨xⁱ,s⟩⟨s,xʲ⟩) + 2√det W |⟨x¹ × x², s⟩|`.
pub fn holevo_function_k2(t: &ThetaParams, w: &SymMat, x: &[Vec3; 2]) -> f64 {
    let s = t.bloch().0;
    let mut h = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            h += w.get(i, j) * (dot(&x[i], &x[j]) - dot(&x[i], &s) * dot(&s, &x[j]));
        }
    }
    h + 2.0 * w.det().max(0.0).sqrt() * dot(&cross(&x[0], &x[1]), &s).abs()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HolevoK2 {
    pub value: f64,
    pub x_opt: [Vec3; 2],
}

/// Feasible pair `xⁱ = x_pⁱ + tᵢ n̂` with `⟨xⁱ, ∂_j s⟩ = δ_ij`.
fn holevo_k2_candidate(t: &ThetaParams, tau: [f64; 2]) -> Result<[Vec3; 2]> {
    let d = t.bloch_derivatives(2)?;
    let gram = SymMat::from_fn(2, |i, j| dot(&d[i], &d[j]));
    let ginv = gram.inverse()?;
    let n = cross(&d[0], &d[1]);
    let nn = norm(&n);
    let mut x = [[0.0; 3]; 2];
    for (i, xi) in x.iter_mut().enumerate() {
        for c in 0..3 {
            xi[c] = ginv.get(i, 0) * d[0][c] + ginv.get(i, 1) * d[1][c] + tau[i] * n[c] / nn;
        }
    }
    Ok(x)
}

/// Holevo bound for the two parameters of interest with a known phase, by direct
/// minimisation of [`holevo_function_k2`] over the feasible set.
pub fn holevo_bound_k2(t: &ThetaParams, w: &SymMat) -> Result<HolevoK2> {
    check_weight_dim(w, 2)?;
    let f = |tau: [f64; 2]| -> f64 { holevo_k2_candidate(t, tau).map(|x| holevo_function_k2(t, w, &x)).unwrap_or(f64::INFINITY) };
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for a in 0..41 {
        for b in 0..41 {
            let p = [-10.0 + 0.5 * a as f64, -10.0 + 0.5 * b as f64];
            let v = f(p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    let (tau, value) = nelder_mead(&f, best.0, 0.5, 1e-10, 10_000)?;
    Ok(HolevoK2 { value, x_opt: holevo_k2_candidate(t, tau)? })
}

/// Derivative-free minimisation in two variables. Stops once every vertex lies within
/// `tol` of the best one.
fn nelder_mead(f: &impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64, tol: f64, max_iter: usize) -> Result<([f64; 2], f64)> {
    let mut simplex = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut vals = simplex.map(f);
    let lerp = |a: [f64; 2], b: [f64; 2], c: f64| [a[0] + c * (b[0] - a[0]), a[1] + c * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);
        let size = simplex[1..].iter().map(|p| (p[0] - simplex[0][0]).hypot(p[1] - simplex[0][1])).fold(0.0, f64::max);
        if size < tol {
            return Ok((simplex[0], vals[0]));
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = lerp(simplex[2], centroid, 2.0);
        let fr = f(reflected);
        if fr < vals[0] {
            let expanded = lerp(simplex[2], centroid, 3.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                vals[2] = fe;
            } else {
                simplex[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = reflected;
            vals[2] = fr;
        } else {
            let contracted = if fr < vals[2] { lerp(simplex[2], centroid, 1.5) } else { lerp(simplex[2], centroid, 0.5) };
            let fc = f(contracted);
            if fc < vals[2].min(fr) {
                simplex[2] = contracted;
                vals[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = lerp(simplex[0], simplex[i], 0.5);
                    vals[i] = f(simplex[i]);
                }
            }
        }
    }
    Err(QestError::NoConvergence(format!("Nelder-Mead exceeded {max_iter} iterations")))
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub sld_cr: f64,
    pub rld_cr: f64,
    /// Nagaoka bound for two parameters, HGM bound for three.
    pub nagaoka_hgm: f64,
    pub holevo: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub k: usize,
    pub theta: ThetaParams,
    pub weight: Vec<Vec<f64>>,
}

/// Every bound at one point. `v33` (three parameters only) adds the γ-factor.
pub fn bound_report(t: &ThetaParams, k: usize, w: &WeightSpec, v33: Option<f64>) -> Result<BoundReport> {
    check_param_count(k)?;
    let wm = w.matrix(k)?;
    let sld_cr = sld_cr_bound(t, k, w)?;
    let rld_cr = rld_cr_bound(t, k, w)?;
    let (nagaoka_hgm, holevo) =
        if k == 2 { (nagaoka_bound(t, &wm)?, holevo_bound_k2(t, &wm)?.value) } else { (hgm_bound(t, 3, w)?.value, holevo_bound_k3(t, w)?) };
    let gamma = match (k, v33) {
        (3, Some(v)) => Some(gamma_factor(v, 1.0 / (t.theta1() * t.theta1()))?),
        (2, Some(_)) => return Err(QestError::InvalidConfig("v33 requires the three-parameter model".into())),
        _ => None,
    };
    Ok(BoundReport { sld_cr, rld_cr, nagaoka_hgm, holevo, gamma, k, theta: *t, weight: wm.to_rows() })
}
