mod common;

use std::f64::consts::PI;

use atwist_core::catalog;
use atwist_core::prequantum::*;
use atwist_core::symexpr::{Chart, Expr, C64};
use atwist_core::tensorcalc::*;
use atwist_core::AtpStructure;
use common::{rd, rd_complex, same_field, sampler, zero};
use proptest::prelude::*;

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

fn structure() -> AtpStructure {
    catalog::prequantizable_five(Chart::standard(5), &Expr::coord(0), &Expr::coord(2))
}

fn certificate() -> PrequantCertificate {
    let (x1, x3) = (Expr::coord(0), Expr::coord(2));
    PrequantCertificate::new(MultiVectorField::basis(5, 4), catalog::block_eta(&x1, &x3)).with_potential(catalog::block_potential())
}

fn certified() -> ContravariantD {
    build_derivative(&structure(), &certificate()).unwrap()
}

/// A derivative with random complex `ω` and real `Z` on the five-dimensional
/// example family.
fn random_d(seed: u64) -> ContravariantD {
    let mut c = rd_complex(seed, 5);
    let omega: FormField = c.field(1);
    let z: MultiVectorField = rd(seed ^ 1, 5).field(1);
    ContravariantD::new(structure(), omega, z).unwrap()
}

#[test]
fn certificate_passes() {
    let r = check_certificate(&structure(), &certificate(), &sampler()).unwrap();
    assert!(r.pass(), "{r:?}");
    assert_eq!(r.checks.len(), 4);
}

#[test]
fn scaled_eta_is_rejected() {
    let mut c = certificate();
    c.eta = c.eta.scale_const(C64::new(1.01, 0.0));
    let r = check_certificate(&structure(), &c, &sampler()).unwrap();
    let eq = r.get("certificate_equation").unwrap();
    assert!(!eq.pass && eq.max_residual > 1e-3);
    assert!(r.get("eta_closed").unwrap().pass);
}

#[test]
fn example_sign_of_phi_has_no_certificate_with_z5() {
    // with the other x5-leg sign, Λ + ∂Z = Λ + Λ
    let s = catalog::twisted_five(Chart::standard(5), &Expr::coord(0), &Expr::coord(2));
    assert!(!check_certificate(&s, &certificate(), &sampler()).unwrap().pass());
}

#[test]
fn curvature_law_for_the_certified_derivative() {
    let d = certified();
    let p = d.curvature_bivector(&sampler()).unwrap();
    let r = sampler().check_pairs(d.chart(), "law", &curvature_law_pairs(&d, &p)).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn flat_derivative_is_flat_but_not_prequantum() {
    let d = ContravariantD::flat(structure());
    let p = d.curvature_bivector(&sampler()).unwrap();
    assert!(zero(d.chart(), &p.coefficients()).pass);
    let law = sampler().check_pairs(d.chart(), "law", &curvature_law_pairs(&d, &p)).unwrap();
    assert!(!law.pass);
    let (x1, x2, u) = (Expr::coord(0), Expr::coord(1), Expr::coord(3) + Expr::one());
    assert!(!zero(d.chart(), &[d.homomorphism_residual(&x1, &x2, &u)]).pass);
}

#[test]
fn equivalence_suite() {
    // certificate ⇔ homomorphism on coordinates ⇔ curvature law, for a passing
    // and a failing potential
    let s = structure();
    let u = Expr::coord(1) * Expr::coord(3) + Expr::i();
    for scale in [1.0, 1.5] {
        let mut c = certificate();
        c.eta = c.eta.scale_const(C64::new(scale, 0.0));
        c.potential = c.potential.map(|t| t.scale_const(C64::new(scale, 0.0)));
        let cert = check_certificate(&s, &c, &sampler()).unwrap().pass();
        let d = build_derivative(&s, &c).unwrap();
        let mut hom = Vec::new();
        for i in 0..5 {
            for j in i + 1..5 {
                hom.push(d.homomorphism_residual(&Expr::coord(i), &Expr::coord(j), &u));
            }
        }
        let hom = zero(&Chart::standard(5), &hom).pass;
        let p = d.curvature_bivector(&sampler()).unwrap();
        let law = sampler().check_pairs(d.chart(), "law", &curvature_law_pairs(&d, &p)).unwrap().pass;
        assert_eq!((cert, hom, law), (scale == 1.0, scale == 1.0, scale == 1.0));
    }
}

#[test]
fn hermitian_defect_of_a_real_connection() {
    // ω = dx1 is not imaginary: the residual is −2 dx1(Λ^#α) u1 ū2
    let s = structure();
    let d = ContravariantD::new(s.clone(), FormField::basis(5, 0), MultiVectorField::zero(5, 1)).unwrap();
    let alpha = FormField::basis(5, 1).add(&FormField::basis(5, 3).scale(&Expr::coord(4)));
    let (u1, u2) = (Expr::coord(0) + Expr::i(), Expr::coord(2).exp());
    let want = Expr::real(-2.0) * pair(&FormField::basis(5, 0), &s.anchor(&alpha)) * &u1 * u2.conj_expr();
    assert!(sampler().equiv(d.chart(), &d.hermitian_residual(&alpha, &u1, &u2), &want).unwrap().pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn derivative_axioms(seed in any::<u64>()) {
        let d = random_d(seed);
        let mut r = rd_complex(seed ^ 2, 5);
        let (a, b): (FormField, FormField) = (r.field(1), r.field(1));
        let (f, u, v) = (r.poly(), r.poly(), r.poly());
        let c = d.chart();
        let lin = d.apply(&a.add(&b.scale(&f)), &u) - d.apply(&a, &u) - &f * d.apply(&b, &u);
        let add = d.apply(&a, &(&u + &v)) - d.apply(&a, &u) - d.apply(&a, &v);
        let leib = d.apply(&a, &(&f * &u)) - apply_vector(&d.structure().anchor(&a), &f) * &u - &f * d.apply(&a, &u);
        prop_assert!(zero(c, &[lin, add, leib]).pass);
    }

    #[test]
    fn curvature_is_tensorial(seed in any::<u64>()) {
        let d = random_d(seed);
        let mut r = rd_complex(seed ^ 3, 5);
        let (a, b): (FormField, FormField) = (r.field(1), r.field(1));
        let (f, u) = (r.poly(), r.poly());
        let c = d.chart();
        let in_alpha = d.curvature(&a.scale(&f), &b, &u) - &f * d.curvature(&a, &b, &u);
        let in_u = d.curvature(&a, &b, &(&f * &u)) - &f * d.curvature(&a, &b, &u);
        prop_assert!(zero(c, &[in_alpha, in_u]).pass);
        prop_assert!(d.curvature_bivector(&sampler()).is_ok());
    }

    #[test]
    fn curvature_is_a_coboundary(seed in any::<u64>()) {
        // P = ∂(2πi Z − Λ^#ω); for Z = 0 this is Λ^#(dω)
        let d = random_d(seed);
        let s = d.structure();
        let p = d.curvature_bivector_unchecked();
        let w = d.z().scale_const(two_pi_i()).sub(&s.anchor(d.omega()));
        prop_assert!(same_field(d.chart(), &p, &s.coboundary_field(&w).unwrap()).pass);
        let flat_z = ContravariantD::new(s.clone(), d.omega().clone(), MultiVectorField::zero(5, 1)).unwrap();
        let pz = flat_z.curvature_bivector_unchecked();
        prop_assert!(same_field(d.chart(), &pz, &s.anchor_k(&exterior_d(d.omega()))).pass);
    }

    #[test]
    fn imaginary_connection_gives_imaginary_curvature(seed in any::<u64>()) {
        let mut r = rd(seed, 5);
        let omega = r.field::<Form>(1).scale_const(C64::new(0.0, 1.0));
        let z: MultiVectorField = r.field(1);
        let d = ContravariantD::new(structure(), omega, z).unwrap();
        let p = d.curvature_bivector_unchecked();
        let re: Vec<Expr> = p.coefficients().into_iter().map(|c| (&c + c.conj_expr()).scale(C64::new(0.5, 0.0))).collect();
        prop_assert!(zero(d.chart(), &re).pass);
    }

    #[test]
    fn changing_the_potential(seed in any::<u64>()) {
        let s = structure();
        let mut r = rd(seed, 5);
        let h = r.poly();
        let base = certified();
        // ϑ' = ϑ + dh leaves P unchanged: the shift is ∂ of −2πiΛ^#(dh), which is 0
        let mut c = certificate();
        c.potential = c.potential.map(|t| t.add(&differential(5, &h)));
        let moved = build_derivative(&s, &c).unwrap();
        let diff = moved.curvature_bivector_unchecked().sub(&base.curvature_bivector_unchecked());
        let cob = s.coboundary_field(&s.anchor(&differential(5, &h)).scale_const(-two_pi_i())).unwrap();
        prop_assert!(same_field(s.chart(), &diff, &cob).pass);
        prop_assert!(zero(s.chart(), &diff.coefficients()).pass);
        // a general shift ω → ω + γ moves P by Λ^#(dγ)
        let gamma: FormField = rd_complex(seed ^ 4, 5).field(1);
        let shifted = ContravariantD::new(s.clone(), base.omega().add(&gamma), base.z().clone()).unwrap();
        let diff = shifted.curvature_bivector_unchecked().sub(&base.curvature_bivector_unchecked());
        prop_assert!(same_field(s.chart(), &diff, &s.anchor_k(&exterior_d(&gamma))).pass);
    }

    #[test]
    fn certified_derivative_is_hermitian(seed in any::<u64>()) {
        let d = certified();
        let alpha: FormField = rd(seed, 5).field(1);
        let mut c = rd_complex(seed ^ 5, 5);
        let (u1, u2) = (c.poly(), c.poly());
        prop_assert!(zero(d.chart(), &[d.hermitian_residual(&alpha, &u1, &u2)]).pass);
    }

    #[test]
    fn hat_is_a_homomorphism(seed in any::<u64>()) {
        let d = certified();
        let mut r = rd(seed, 5);
        let (f, g) = (r.poly(), r.poly());
        let u = rd_complex(seed ^ 6, 5).poly();
        prop_assert!(zero(d.chart(), &[d.homomorphism_residual(&f, &g, &u)]).pass);
    }
}
