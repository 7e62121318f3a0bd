//! Ready-made structures on `ℝ⁴` and `ℝ⁵` used by tests, golden manifests
//! and the acceptance suite.
//!
//! All five-dimensional structures share
//! `Λ = e^f ∂1∧∂2 + e^g ∂3∧∂4` and `θ = dx5`.

use crate::symexpr::{Chart, Expr};
use crate::tensorcalc::{FormField, MultiVectorField};
use crate::twisted::AtpStructure;

fn lambda5(f: &Expr, g: &Expr) -> MultiVectorField {
    MultiVectorField::monomial(5, &[0, 1], f.exp()).add(&MultiVectorField::monomial(5, &[2, 3], g.exp()))
}

/// The general 3-form with `x5`-legs `(∂5 e^{−A} + s·e^{−A})`, `s = ±1`.
fn phi5(f: &Expr, g: &Expr, s: f64) -> FormField {
    let ef = f.neg().exp();
    let eg = g.neg().exp();
    let items = [
        (alloc::vec![0, 2, 3], eg.partial(0)),
        (alloc::vec![1, 2, 3], eg.partial(1)),
        (alloc::vec![2, 3, 4], eg.partial(4) + eg.scale(s.into())),
        (alloc::vec![0, 1, 2], ef.partial(2)),
        (alloc::vec![0, 1, 3], ef.partial(3)),
        (alloc::vec![0, 1, 4], ef.partial(4) + ef.scale(s.into())),
    ];
    FormField::from_components(5, 3, items).expect("valid tuples")
}

/// Five-dimensional structure for arbitrary `f, g`, with `x5`-legs
/// `∂5 e^{−A} − e^{−A}`.
pub fn twisted_five(chart: Chart, f: &Expr, g: &Expr) -> AtpStructure {
    AtpStructure::new(chart, lambda5(f, g), phi5(f, g, -1.0), FormField::basis(5, 4)).expect("dimension 5")
}

/// Five-dimensional structure with `x5`-legs `∂5 e^{−A} + e^{−A}`. For
/// `f = f(x1, x2)`, `g = g(x3, x4)` this is
/// `φ = e^{−f} dx1∧dx2∧dx5 + e^{−g} dx3∧dx4∧dx5`.
pub fn prequantizable_five(chart: Chart, f: &Expr, g: &Expr) -> AtpStructure {
    AtpStructure::new(chart, lambda5(f, g), phi5(f, g, 1.0), FormField::basis(5, 4)).expect("dimension 5")
}

/// `η = −e^{−f} dx1∧dx2 − e^{−g} dx3∧dx4`.
pub fn block_eta(f: &Expr, g: &Expr) -> FormField {
    FormField::monomial(5, &[0, 1], f.neg().exp().neg()).add(&FormField::monomial(5, &[2, 3], g.neg().exp().neg()))
}

/// `ϑ = e^{−x1} dx2 + e^{−x3} dx4`, a potential of [`block_eta`] for
/// `f = x1`, `g = x3`.
pub fn block_potential() -> FormField {
    FormField::monomial(5, &[1], Expr::coord(0).neg().exp()).add(&FormField::monomial(5, &[3], Expr::coord(2).neg().exp()))
}

/// `Λ = ∂1∧∂2 + x1 ∂3∧∂4` with `φ = 0`, `θ = 0`: not Poisson.
pub fn non_poisson() -> AtpStructure {
    let l = MultiVectorField::monomial(4, &[0, 1], Expr::one()).add(&MultiVectorField::monomial(4, &[2, 3], Expr::coord(0)));
    AtpStructure::poisson(Chart::standard(4), l).expect("dimension 4")
}

/// `x1, x2, x3, x4, t` with `z1 = x1 + i x2`, `z2 = x3 + i x4`.
pub fn complex_chart() -> Chart {
    Chart::new(&["x1", "x2", "x3", "x4", "t"])
        .and_then(|c| c.with_pair(0, 1))
        .and_then(|c| c.with_pair(2, 3))
        .expect("fixed chart")
}
