use alloc::vec::Vec;

use super::field::{mask_indices, merge_sign, signed, FormField, GradedField, MultiVectorField, TensorError, Variance};
use crate::symexpr::Expr;

/// `a ∧ b`.
///
/// # Panics
/// If the fields live on charts of different dimension; see [`try_wedge`].
pub fn wedge<V: Variance>(a: &GradedField<V>, b: &GradedField<V>) -> GradedField<V> {
    try_wedge(a, b).expect("wedge of fields on different charts")
}

pub fn try_wedge<V: Variance>(a: &GradedField<V>, b: &GradedField<V>) -> Result<GradedField<V>, TensorError> {
    if a.dim() != b.dim() {
        return Err(TensorError::ChartMismatch(a.dim(), b.dim()));
    }
    let mut out = GradedField::zero(a.dim(), a.grade() + b.grade());
    for (ma, ea) in a.iter() {
        for (mb, eb) in b.iter() {
            if let Some(s) = merge_sign(ma, mb) {
                out.add_mask(ma | mb, signed(ea * eb, s));
            }
        }
    }
    Ok(out)
}

/// Directional derivative `X(f)`.
pub fn apply_vector(x: &MultiVectorField, f: &Expr) -> Expr {
    debug_assert_eq!(x.grade(), 1);
    Expr::sum(x.iter().map(|(m, c)| c * f.partial(m.trailing_zeros() as usize)).collect::<Vec<_>>())
}

/// Contraction of a vector into the first slot of a form. Zero on grade 0.
pub fn interior(x: &MultiVectorField, psi: &FormField) -> FormField {
    debug_assert_eq!(x.grade(), 1);
    let dim = psi.dim();
    if psi.grade() == 0 {
        return FormField::zero(dim, 0);
    }
    let mut out = FormField::zero(dim, psi.grade() - 1);
    for (m, c) in psi.iter() {
        for (b, i) in mask_indices(m).into_iter().enumerate() {
            let xi = x.mask_component(1 << i);
            if xi.is_zero() {
                continue;
            }
            out.add_mask(m & !(1 << i), signed(&xi * c, if b % 2 == 0 { 1 } else { -1 }));
        }
    }
    out
}

/// Contraction of a 1-form into the first slot of a multivector field.
pub fn interior_mv(alpha: &FormField, p: &MultiVectorField) -> MultiVectorField {
    debug_assert_eq!(alpha.grade(), 1);
    let dim = p.dim();
    if p.grade() == 0 {
        return MultiVectorField::zero(dim, 0);
    }
    let mut out = MultiVectorField::zero(dim, p.grade() - 1);
    for (m, c) in p.iter() {
        for (b, i) in mask_indices(m).into_iter().enumerate() {
            let ai = alpha.mask_component(1 << i);
            if ai.is_zero() {
                continue;
            }
            out.add_mask(m & !(1 << i), signed(&ai * c, if b % 2 == 0 { 1 } else { -1 }));
        }
    }
    out
}

pub fn exterior_d(psi: &FormField) -> FormField {
    let dim = psi.dim();
    let mut out = FormField::zero(dim, psi.grade() + 1);
    for (m, c) in psi.iter() {
        for k in 0..dim {
            if m & (1 << k) != 0 {
                continue;
            }
            let dc = c.partial(k);
            if dc.is_zero() {
                continue;
            }
            let s = merge_sign(1 << k, m).expect("disjoint");
            out.add_mask(m | (1 << k), signed(dc, s));
        }
    }
    out
}

/// `d f` for a function.
pub fn differential(dim: usize, f: &Expr) -> FormField {
    exterior_d(&FormField::scalar(dim, f.clone()))
}

/// Lie derivative of a form by Cartan's formula.
pub fn lie_form(x: &MultiVectorField, psi: &FormField) -> FormField {
    if psi.grade() == 0 {
        return FormField::scalar(psi.dim(), apply_vector(x, &psi.as_scalar()));
    }
    interior(x, &exterior_d(psi)).add(&exterior_d(&interior(x, psi)))
}

/// `Σ_i ∂_i X^i` against the coordinate volume.
pub fn divergence(x: &MultiVectorField) -> Expr {
    debug_assert_eq!(x.grade(), 1);
    Expr::sum(x.iter().map(|(m, c)| c.partial(m.trailing_zeros() as usize)).collect::<Vec<_>>())
}

/// Determinant by cofactor expansion along the first row. Zero entries
/// prune the recursion, which keeps sparse coordinate cases cheap.
pub fn det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    if n == 0 {
        return Expr::one();
    }
    let cols: Vec<usize> = (0..n).collect();
    det_rec(m, 0, &cols)
}

fn det_rec(m: &[Vec<Expr>], row: usize, cols: &[usize]) -> Expr {
    if cols.len() == 1 {
        return m[row][cols[0]].clone();
    }
    let mut terms = Vec::new();
    for (p, &c) in cols.iter().enumerate() {
        let e = &m[row][c];
        if e.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(m, row + 1, &rest);
        if minor.is_zero() {
            continue;
        }
        terms.push(signed(e * minor, if p % 2 == 0 { 1 } else { -1 }));
    }
    Expr::sum(terms)
}

/// `v(α_1, …, α_k)` for a k-vector and k one-forms.
pub fn eval_multivector(v: &MultiVectorField, alphas: &[FormField]) -> Expr {
    assert_eq!(v.grade(), alphas.len(), "slot count must match grade");
    let mut terms = Vec::new();
    for (m, c) in v.iter() {
        let idx = mask_indices(m);
        let mat: Vec<Vec<Expr>> = alphas
            .iter()
            .map(|a| idx.iter().map(|&i| a.mask_component(1 << i)).collect())
            .collect();
        let d = det(&mat);
        if !d.is_zero() {
            terms.push(c * d);
        }
    }
    Expr::sum(terms)
}

/// `ψ(X_1, …, X_k)` for a k-form and k vector fields.
pub fn eval_form(psi: &FormField, xs: &[MultiVectorField]) -> Expr {
    assert_eq!(psi.grade(), xs.len(), "slot count must match grade");
    let mut terms = Vec::new();
    for (m, c) in psi.iter() {
        let idx = mask_indices(m);
        let mat: Vec<Vec<Expr>> =
            xs.iter().map(|x| idx.iter().map(|&i| x.mask_component(1 << i)).collect()).collect();
        let d = det(&mat);
        if !d.is_zero() {
            terms.push(c * d);
        }
    }
    Expr::sum(terms)
}

/// `α(X)`.
pub fn pair(alpha: &FormField, x: &MultiVectorField) -> Expr {
    eval_form(alpha, core::slice::from_ref(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dx(i: usize) -> FormField {
        FormField::basis(3, i)
    }

    fn del(i: usize) -> MultiVectorField {
        MultiVectorField::basis(3, i)
    }

    #[test]
    fn wedge_examples() {
        let w = wedge(&dx(0), &dx(1));
        assert_eq!(w.component(&[0, 1]), Expr::one());
        assert!(wedge(&dx(0), &dx(0)).is_structurally_zero());
        let a = dx(0).scale(&Expr::coord(0));
        let b = wedge(&dx(1), &dx(2));
        assert_eq!(wedge(&a, &b).component(&[0, 1, 2]), Expr::coord(0));
        assert!(try_wedge(&dx(0), &FormField::basis(2, 0)).is_err());
    }

    #[test]
    fn interior_examples() {
        let w = wedge(&dx(0), &dx(1));
        assert_eq!(interior(&del(0), &w), dx(1));
        assert_eq!(interior(&del(1), &w), dx(0).neg());
        let f = FormField::scalar(3, Expr::coord(0));
        assert!(interior(&del(0), &f).is_structurally_zero());
    }

    #[test]
    fn d_and_lie_examples() {
        let a = dx(1).scale(&Expr::coord(0));
        assert_eq!(exterior_d(&a), wedge(&dx(0), &dx(1)));
        // L_{∂1}(x1 dx2) = dx2
        assert_eq!(lie_form(&del(0), &a), dx(1));
        // L_{x1∂1} dx1 = dx1
        assert_eq!(lie_form(&del(0).scale(&Expr::coord(0)), &dx(0)), dx(0));
    }

    #[test]
    fn divergence_examples() {
        assert!(divergence(&del(0)).is_zero());
        assert_eq!(divergence(&del(0).scale(&Expr::coord(0))), Expr::one());
    }

    #[test]
    fn pairings() {
        let w = wedge(&dx(0), &dx(1));
        assert_eq!(eval_form(&w, &[del(0), del(1)]), Expr::one());
        assert_eq!(eval_form(&w, &[del(1), del(0)]), Expr::real(-1.0));
        let v = wedge(&del(0), &del(1));
        assert_eq!(eval_multivector(&v, &[dx(0), dx(1)]), Expr::one());
    }
}
