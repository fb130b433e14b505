//! Closed-form displays for this model, evaluated directly and compared with the library.

use qest_core::bounds::*;
use qest_core::fisher::*;
use qest_core::linalg::SymMat;
use qest_core::povm::*;
use qest_core::region::holevo_region_threshold;
use qest_core::ThetaParams;

fn t(a: f64, b: f64, c: f64) -> ThetaParams {
    ThetaParams::new(a, b, c).unwrap()
}

const POINTS: [(f64, f64, f64); 5] = [(0.5, 0.5, 1.0), (0.6, 0.0, 0.3), (-0.3, 0.7, 4.0), (0.9, -0.2, 2.2), (0.1, 0.1, 6.0)];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn sld_inverse_display() {
    for (a, b, c) in POINTS {
        let p = t(a, b, c);
        let g2 = sld_fisher(&p, 2).unwrap().inverse().unwrap();
        let want = SymMat::from_rows(&[&[1.0 - a * a, -a * b], &[-a * b, 1.0 - b * b]]).unwrap();
        assert!(g2.max_abs_diff(&want) < 1e-12);
        let s2 = a * a + b * b;
        assert!(close(want.trace() - 1.0, 1.0 - s2, 1e-15) && close(want.det(), 1.0 - s2, 1e-15));

        let g3 = sld_fisher(&p, 3).unwrap().inverse().unwrap();
        assert!(g3.leading_block().max_abs_diff(&want) < 1e-12);
        assert!(close(g3.get(2, 2), 1.0 / (a * a), 1e-10 / (a * a)));
        assert!(g3.get(0, 2).abs() < 1e-12 && g3.get(1, 2).abs() < 1e-12);
    }
}

#[test]
fn rld_inverse_display() {
    for (a, b, c) in POINTS {
        let p = t(a, b, c);
        let s2 = a * a + b * b;
        let r2 = rld_fisher(&p, 2).unwrap().inverse().unwrap();
        assert!(r2.re().max_abs_diff(&SymMat::identity(2).scale(1.0 - s2)) < 1e-12);
        assert!(r2.im().max_abs() < 1e-12);

        let r3 = rld_fisher(&p, 3).unwrap().inverse().unwrap();
        let im = r3.im();
        let scale = 1.0 / (a * a);
        assert!(close(im.get(0, 2), -b / a, 1e-10 * scale));
        assert!(close(im.get(1, 2), 1.0, 1e-10 * scale));
        assert!(close(im.get(2, 0), b / a, 1e-10 * scale));
        assert!(close(im.get(2, 1), -1.0, 1e-10 * scale));
        assert!((0..3).all(|i| im.get(i, i).abs() < 1e-10 * scale) && im.get(0, 1).abs() < 1e-10 * scale);
        assert!(r3.re().max_abs_diff(&sld_fisher(&p, 3).unwrap().inverse().unwrap()) < 1e-10 * scale);
    }
}

#[test]
fn nagaoka_eigenvalue_display() {
    let w = SymMat::from_rows(&[&[2.0, 0.3], &[0.3, 0.5]]).unwrap();
    for (a, b, c) in POINTS {
        let p = t(a, b, c);
        let ginv = sld_fisher(&p, 2).unwrap().inverse().unwrap();
        let tt = w.trace_product(&ginv);
        let det = w.det() * ginv.det();
        let disc = tt * tt - 4.0 * det;
        let lambdas = [0.5 * (tt - disc.sqrt()), 0.5 * (tt + disc.sqrt())];
        let (_, plan) = build_optimal_povm(&p, &w).unwrap();
        for (x, y) in plan.lambdas.iter().zip(lambdas) {
            assert!(close(*x, y, 1e-12 * tt));
        }
        let bound = nagaoka_bound(&p, &w).unwrap();
        assert!(close(bound, tt + 2.0 * det.sqrt(), 1e-12 * bound));
        assert!(close(bound, (lambdas[0].sqrt() + lambdas[1].sqrt()).powi(2), 1e-12 * bound));
    }
}

#[test]
fn optimal_mse_display() {
    let w = SymMat::from_rows(&[&[1.0, -0.4], &[-0.4, 3.0]]).unwrap();
    for (a, b, c) in POINTS {
        let p = t(a, b, c);
        for w in [SymMat::identity(2), w] {
            let (povm, _) = build_optimal_povm(&p, &w).unwrap();
            let v = classical_fisher(&p, &povm, 2).unwrap().inverse().unwrap();
            let ginv = SymMat::from_rows(&[&[1.0 - a * a, -a * b], &[-a * b, 1.0 - b * b]]).unwrap();
            let want = ginv.add(&w.inverse().unwrap().scale((w.det() * ginv.det()).sqrt()));
            assert!(v.max_abs_diff(&want) < 1e-9 * want.max_abs());
        }
    }
    let p = t(0.6, 0.0, 0.3);
    let (povm, _) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
    let v = classical_fisher(&p, &povm, 2).unwrap().inverse().unwrap();
    assert!(v.max_abs_diff(&SymMat::diag(&[1.44, 1.8])) < 1e-12);
}

#[test]
fn identity_weight_measurement_display() {
    for (a, b, c) in POINTS {
        let p = t(a, b, c);
        let s = (a * a + b * b).sqrt();
        let root = (1.0 - s * s).sqrt();
        let (povm, plan) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        assert!(close(plan.probabilities[0], root / (1.0 + root), 1e-12));
        assert!(close(plan.probabilities[1], 1.0 / (1.0 + root), 1e-12));

        let bloch = [a * c.cos(), a * c.sin(), b];
        let perp = [b * c.cos(), b * c.sin(), -a];
        let (n1, n2) = (plan.directions[0], plan.directions[1]);
        let along = |n: [f64; 3], v: [f64; 3]| (n[0] * v[0] + n[1] * v[1] + n[2] * v[2]).abs() / s;
        assert!(close(along(n1, bloch), 1.0, 1e-12));
        assert!(close(along(n2, perp), 1.0, 1e-12));
        assert!(along(n1, perp) < 1e-12);

        // the perpendicular arm has fair-coin outcomes at the true point
        let probs = povm.probabilities(&p);
        let p2 = plan.probabilities[1];
        assert!(close(probs[2], 0.5 * p2, 1e-14) && close(probs[3], 0.5 * p2, 1e-14));
    }
}

#[test]
fn identity_weight_estimator_display() {
    for (a, b, c) in POINTS {
        let p = t(a, b, c);
        let s = (a * a + b * b).sqrt();
        let (povm, plan) = build_optimal_povm(&p, &SymMat::identity(2)).unwrap();
        let est = build_optimal_estimator(&p, &povm, 2).unwrap();
        let (p1, p2) = (plan.probabilities[0], plan.probabilities[1]);

        // measuring along the state: the "+" outcome matches the displayed form; the "-" outcome
        // carries (1 + s) in place of (1 - s), which is what local unbiasedness forces
        let plus = 1.0 + (1.0 - s) / (p1 * s);
        let minus = 1.0 - (1.0 + s) / (p1 * s);
        let e1p = est.estimate("1+").unwrap();
        let e1m = est.estimate("1-").unwrap();
        assert!(close(e1p[0], plus * a, 1e-10) && close(e1p[1], plus * b, 1e-10));
        assert!(close(e1m[0], minus * a, 1e-10) && close(e1m[1], minus * b, 1e-10));

        // perpendicular arm: θ ± (-θ2, θ1)/(p2 s), as an unordered pair
        let shift = [-b / (p2 * s), a / (p2 * s)];
        let want = [[a + shift[0], b + shift[1]], [a - shift[0], b - shift[1]]];
        let got = [est.estimate("2+").unwrap(), est.estimate("2-").unwrap()];
        let matches = |g: &[f64], w: &[f64; 2]| close(g[0], w[0], 1e-10) && close(g[1], w[1], 1e-10);
        assert!(
            (matches(got[0], &want[0]) && matches(got[1], &want[1])) || (matches(got[0], &want[1]) && matches(got[1], &want[0])),
            "{got:?} vs {want:?}"
        );
    }
}

#[test]
fn holevo_with_block_weight_display() {
    // Tr(W G⁻¹) + w3 g³³ + 2 √(w3 g³³) √Tr(W (G⁻¹ - G̃⁻¹))
    let w2 = SymMat::from_rows(&[&[1.5, 0.2], &[0.2, 0.7]]).unwrap();
    for (a, b, c) in POINTS {
        let p = t(a, b, c);
        for w3 in [1.0, 0.25, 4.0] {
            let ginv = SymMat::from_rows(&[&[1.0 - a * a, -a * b], &[-a * b, 1.0 - b * b]]).unwrap();
            let rinv = SymMat::identity(2).scale(1.0 - a * a - b * b);
            let g33 = 1.0 / (a * a);
            let want = w2.trace_product(&ginv) + w3 * g33 + 2.0 * (w3 * g33).sqrt() * w2.trace_product(&ginv.sub(&rinv)).sqrt();
            let spec = WeightSpec::block(w2, w3).unwrap();
            assert!(close(holevo_bound_k3(&p, &spec).unwrap(), want, 1e-10 * want));
            assert!(close(rld_cr_bound(&p, 3, &spec).unwrap(), want, 1e-9 * want));
        }
    }
    let v = holevo_bound_k3(&t(0.6, 0.0, 0.3), &WeightSpec::block(SymMat::identity(2), 1.0).unwrap()).unwrap();
    assert!(close(v, 1.64 + 1.0 / 0.36 + 2.0, 1e-10));
}

#[test]
fn reference_point_values() {
    let p = t(0.5, 0.5, 1.0);
    let id2 = WeightSpec::identity(2);
    let block = WeightSpec::block(SymMat::identity(2), 1.0).unwrap();
    let half = 0.5f64.sqrt();
    assert!(close(sld_cr_bound(&p, 2, &id2).unwrap(), 1.5, 1e-12));
    assert!(close(rld_cr_bound(&p, 2, &id2).unwrap(), 1.0, 1e-12));
    assert!(close(nagaoka_bound(&p, &SymMat::identity(2)).unwrap(), 1.5 + 2.0 * half, 1e-12));
    assert!(close(sld_cr_bound(&p, 3, &block).unwrap(), 5.5, 1e-12));
    assert!(close(holevo_bound_k3(&p, &block).unwrap(), 5.5 + 4.0 * half, 1e-12));
    let hgm = (1.5 + 2.0 * half).sqrt() + 2.0;
    assert!(close(hgm_bound(&p, 3, &block).unwrap().value, hgm * hgm, 1e-10));
    assert!(close(holevo_bound_k2(&p, &SymMat::identity(2)).unwrap().value, 1.5, 1e-8));
}

#[test]
fn holevo_threshold_display() {
    // γ G⁻¹ - (γ - 1) G̃⁻¹ at γ = 2
    let th = holevo_region_threshold(&t(0.5, 0.5, 0.0), 2.0).unwrap();
    assert!(th.max_abs_diff(&SymMat::from_rows(&[&[1.0, -0.5], &[-0.5, 1.0]]).unwrap()) < 1e-12);
}

#[test]
fn misaligned_phase_acts_as_a_shrunken_first_parameter() {
    // the measurement designed at θ3 + δ sees the state as (θ1 cos δ, θ2) at phase θ3 + δ
    let p = t(0.6, 0.0, 0.3);
    let w = SymMat::identity(2);
    for delta in [0.1, 0.05, 0.025] {
        let off = build_phase_perturbed_povm(&p, 0.3 + delta, &w).unwrap();
        let shrunk = t(0.6 * delta.cos(), 0.0, 0.3 + delta);
        let pa = off.probabilities(&p);
        let pb = off.probabilities(&shrunk);
        assert!(pa.iter().zip(&pb).all(|(x, y)| close(*x, *y, 1e-14)));
        let j = classical_fisher(&p, &off, 2).unwrap().matrix;
        let js = classical_fisher(&shrunk, &off, 2).unwrap().matrix;
        let c = delta.cos();
        assert!(close(j.get(0, 0), c * c * js.get(0, 0), 1e-10));
        println!(
            "delta={delta}: J11 ratio to aligned {:.9}, cos^2 {:.9}",
            j.get(0, 0) / classical_fisher(&p, &build_optimal_povm(&p, &w).unwrap().0, 2).unwrap().matrix.get(0, 0),
            c * c
        );
    }
}
