#![allow(dead_code)]

use atwist_core::random::{PolySpec, RandomData};
use atwist_core::symexpr::{Chart, EquivReport, Expr, Sampler, C64};
use atwist_core::tensorcalc::GradedField;
use atwist_core::tensorcalc::Variance;
use proptest::prelude::*;

pub fn sampler() -> Sampler {
    Sampler::default()
}

pub fn zero(chart: &Chart, exprs: &[Expr]) -> EquivReport {
    sampler().check_zero(chart, "test", exprs).expect("regular sample points")
}

pub fn same_field<V: Variance>(chart: &Chart, a: &GradedField<V>, b: &GradedField<V>) -> EquivReport {
    sampler().check_pairs(chart, "test", &a.difference_pairs(b)).expect("regular sample points")
}

pub fn rd(seed: u64, dim: usize) -> RandomData {
    RandomData::new(seed, dim)
}

pub fn rd_complex(seed: u64, dim: usize) -> RandomData {
    RandomData::new(seed, dim).with_spec(PolySpec { complex: true, ..PolySpec::default() })
}

/// Expression trees over `dim` coordinates built from the full operator set
/// (no division or ln, so every tree is regular on the box).
pub fn arb_expr(dim: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..dim).prop_map(Expr::coord),
        (-4i32..=4).prop_map(|k| Expr::real(k as f64 / 2.0)),
        Just(Expr::i()),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| (Expr::real(0.25) * a).exp()),
            inner.clone().prop_map(|a| a.conj()),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| a.powi(n)),
            inner.prop_map(|a| -a),
        ]
    })
}

pub fn eval(chart: &Chart, e: &Expr, x: &[f64]) -> C64 {
    e.eval(chart, x).expect("regular point")
}

pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}
