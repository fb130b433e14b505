//! Test-only oracles built from first principles: 2×2 complex matrices and
//! brute-force solvers, sharing no code with the library's closed forms.
#![allow(dead_code, clippy::needless_range_loop)]

use num_complex::Complex64 as C;
use qest_core::linalg::SymMat;
use qest_core::ThetaParams;
use rand::Rng;

pub type M2 = [[C; 2]; 2];

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn paulis() -> [M2; 4] {
    let z = c(0.0);
    let o = c(1.0);
    let i = C::new(0.0, 1.0);
    [[[o, z], [z, o]], [[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]]
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut r = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn add(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn scale(a: &M2, s: C) -> M2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn tr(a: &M2) -> C {
    a[0][0] + a[1][1]
}

pub fn inv(a: &M2) -> M2 {
    let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

/// Density matrix written entrywise.
pub fn rho(t: &ThetaParams) -> M2 {
    let [a, b, p] = t.as_array();
    let e = C::from_polar(a, p);
    [[c(0.5 * (1.0 + b)), 0.5 * e.conj()], [0.5 * e, c(0.5 * (1.0 - b))]]
}

/// `∂_i ρ` written entrywise.
pub fn drho(t: &ThetaParams, k: usize) -> Vec<M2> {
    let [a, _, p] = t.as_array();
    let e = C::from_polar(1.0, p);
    let all = [
        [[c(0.0), 0.5 * e.conj()], [0.5 * e, c(0.0)]],
        [[c(0.5), c(0.0)], [c(0.0), c(-0.5)]],
        [[c(0.0), 0.5 * a * (C::i() * e).conj()], [0.5 * a * C::i() * e, c(0.0)]],
    ];
    all[..k].to_vec()
}

/// Solves `½(ρL + Lρ) = D` for Hermitian `L` by Gaussian elimination on the
/// four Pauli coefficients.
pub fn solve_sld(r: &M2, d: &M2) -> M2 {
    let p = paulis();
    // column μ: ½(ρσ_μ + σ_μρ) expanded in Pauli coefficients ½Tr(σ_ν ·)
    let mut a = [[0.0; 5]; 4];
    for mu in 0..4 {
        let s = scale(&add(&mul(r, &p[mu]), &mul(&p[mu], r)), c(0.5));
        for nu in 0..4 {
            a[nu][mu] = 0.5 * tr(&mul(&p[nu], &s)).re;
        }
    }
    for nu in 0..4 {
        a[nu][4] = 0.5 * tr(&mul(&p[nu], d)).re;
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..4 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..5 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let x: Vec<f64> = (0..4).map(|i| a[i][4] / a[i][i]).collect();
    let mut l = [[c(0.0); 2]; 2];
    for mu in 0..4 {
        l = add(&l, &scale(&p[mu], c(x[mu])));
    }
    l
}

/// SLD Fisher information `Re Tr(ρ L_i L_j)` from the direct solve.
pub fn sld_fisher_oracle(t: &ThetaParams, k: usize) -> SymMat {
    let r = rho(t);
    let ls: Vec<M2> = drho(t, k).iter().map(|d| solve_sld(&r, d)).collect();
    SymMat::from_fn(k, |i, j| tr(&mul(&r, &mul(&ls[i], &ls[j]))).re)
}

/// RLD Fisher information `Tr(∂_j ρ ρ⁻¹ ∂_i ρ)` entrywise, returned as (real, imaginary) parts.
pub fn rld_fisher_oracle(t: &ThetaParams, k: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let r = rho(t);
    let ri = inv(&r);
    let d = drho(t, k);
    let mut re = vec![vec![0.0; k]; k];
    let mut im = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let z = tr(&mul(&d[j], &mul(&ri, &d[i])));
            re[i][j] = z.re;
            im[i][j] = z.im;
        }
    }
    (re, im)
}

pub fn random_theta<R: Rng>(rng: &mut R) -> ThetaParams {
    loop {
        let a: f64 = rng.random_range(-0.95..0.95);
        let b: f64 = rng.random_range(-0.95..0.95);
        let p: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        if a.abs() > 0.05 && a * a + b * b < 0.95 {
            return ThetaParams::new(a, b, p).unwrap();
        }
    }
}

/// Random PD matrix `BᵀB + εI` with entries of `B` uniform in [-1, 1].
pub fn random_pd<R: Rng>(rng: &mut R, dim: usize, eps: f64) -> SymMat {
    let b: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    SymMat::from_fn(dim, |i, j| (0..dim).map(|l| b[l * dim + i] * b[l * dim + j]).sum::<f64>() + if i == j { eps } else { 0.0 })
}

/// Brute-force minimum of `Tr(W J⁻¹)` over two-arm mixtures of projective measurements
/// in the plane spanned by `(cos θ3, sin θ3, 0)` and `(0, 0, 1)`.
pub fn brute_force_two_arm_minimum(t: &ThetaParams, w: &SymMat) -> f64 {
    let s = t.bloch().0;
    let (sn, cs) = t.theta3().sin_cos();
    let e1 = [cs, sn, 0.0];
    let cost = |x: [f64; 3]| -> f64 {
        let (f1, f2, p) = (x[0], x[1], 1.0 / (1.0 + (-x[2]).exp()));
        let mut j = [[0.0; 2]; 2];
        for (phi, q) in [(f1, p), (f2, 1.0 - p)] {
            let n = [phi.cos() * e1[0], phi.cos() * e1[1], phi.sin()];
            let ns: f64 = (0..3).map(|i| n[i] * s[i]).sum();
            let g = [phi.cos(), phi.sin()];
            // p± = q(1 ± n·s)/2, ∂p± = ±q g/2
            for sign in [1.0, -1.0] {
                let pr = 0.5 * q * (1.0 + sign * ns);
                for a in 0..2 {
                    for b in 0..2 {
                        j[a][b] += 0.25 * q * q * g[a] * g[b] / pr;
                    }
                }
            }
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det <= 1e-14 {
            return f64::INFINITY;
        }
        (w.get(0, 0) * j[1][1] - 2.0 * w.get(0, 1) * j[0][1] + w.get(1, 1) * j[0][0]) / det
    };
    let mut best = ([0.0; 3], f64::INFINITY);
    let steps = 48;
    for a in 0..steps {
        for b in 0..steps {
            for l in 0..21 {
                let x =
                    [std::f64::consts::PI * a as f64 / steps as f64, std::f64::consts::PI * b as f64 / steps as f64, -5.0 + 0.5 * l as f64];
                let v = cost(x);
                if v < best.1 {
                    best = (x, v);
                }
            }
        }
    }
    // coordinate pattern search
    let mut h = 0.05;
    let (mut x, mut v) = best;
    while h > 1e-12 {
        let mut improved = false;
        for i in 0..3 {
            for d in [h, -h] {
                let mut y = x;
                y[i] += d;
                let fy = cost(y);
                if fy < v {
                    x = y;
                    v = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    v
}
