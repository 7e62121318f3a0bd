use alloc::vec::Vec;

use super::calculus::{det, exterior_d, lie_form};
use super::field::{mask_indices, merge_sign, signed, FormField, MultiVectorField};
use crate::symexpr::Expr;

fn parity(n: usize) -> i32 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Schouten–Nijenhuis bracket, grade `p + q − 1`.
///
/// On monomials `a ∂_I` (`|I| = k`) and `b ∂_J`:
///
/// ```text
/// [a∂_I, b∂_J] = Σ_i (−1)^{k−i} a ∂_{I_i}(b) ∂_{I∖I_i} ∧ ∂_J
///              − Σ_j (−1)^{j−1} b ∂_{J_j}(a) ∂_I ∧ ∂_{J∖J_j}
/// ```
///
/// with 1-based slot positions. Two scalars bracket to zero.
pub fn schouten(p: &MultiVectorField, q: &MultiVectorField) -> MultiVectorField {
    assert_eq!(p.dim(), q.dim(), "schouten of fields on different charts");
    let dim = p.dim();
    if p.grade() + q.grade() == 0 {
        return MultiVectorField::zero(dim, 0);
    }
    let k = p.grade();
    let mut out = MultiVectorField::zero(dim, p.grade() + q.grade() - 1);
    for (mi, a) in p.iter() {
        let ii = mask_indices(mi);
        for (mj, b) in q.iter() {
            let jj = mask_indices(mj);
            for (pos, &i) in ii.iter().enumerate() {
                let rest = mi & !(1 << i);
                let Some(s) = merge_sign(rest, mj) else { continue };
                let db = b.partial(i);
                if db.is_zero() {
                    continue;
                }
                out.add_mask(rest | mj, signed(a * db, s * parity(k - (pos + 1))));
            }
            for (pos, &j) in jj.iter().enumerate() {
                let rest = mj & !(1 << j);
                let Some(s) = merge_sign(mi, rest) else { continue };
                let da = a.partial(j);
                if da.is_zero() {
                    continue;
                }
                out.add_mask(mi | rest, signed(b * da, -s * parity(pos)));
            }
        }
    }
    out
}

/// `Λ(α, β)`.
pub fn bivector_pair(lambda: &MultiVectorField, alpha: &FormField, beta: &FormField) -> Expr {
    debug_assert_eq!(lambda.grade(), 2);
    let mut terms = Vec::new();
    for (m, c) in lambda.iter() {
        let idx = mask_indices(m);
        let (i, j) = (1u32 << idx[0], 1u32 << idx[1]);
        let d = alpha.mask_component(i) * beta.mask_component(j) - alpha.mask_component(j) * beta.mask_component(i);
        if !d.is_zero() {
            terms.push(c * d);
        }
    }
    Expr::sum(terms)
}

/// `Λ^#(α)`, fixed by `Λ^#(α)(β) = Λ(α, β)`.
pub fn anchor1(lambda: &MultiVectorField, alpha: &FormField) -> MultiVectorField {
    debug_assert_eq!(lambda.grade(), 2);
    debug_assert_eq!(alpha.grade(), 1);
    let dim = lambda.dim();
    let mut out = MultiVectorField::zero(dim, 1);
    for (m, c) in lambda.iter() {
        let idx = mask_indices(m);
        let (i, j) = (idx[0], idx[1]);
        // Λ^{ij} (α_i ∂_j − α_j ∂_i)
        let ai = alpha.mask_component(1 << i);
        let aj = alpha.mask_component(1 << j);
        if !ai.is_zero() {
            out.add_mask(1 << j, c * ai);
        }
        if !aj.is_zero() {
            out.add_mask(1 << i, (c * aj).neg());
        }
    }
    out
}

/// The anchor on k-forms:
/// `Λ^#(ψ)(α_1, …, α_k) = (−1)^k ψ(Λ^#α_1, …, Λ^#α_k)`; identity on grade 0.
pub fn anchor_k(lambda: &MultiVectorField, psi: &FormField) -> MultiVectorField {
    let dim = psi.dim();
    let k = psi.grade();
    if k == 0 {
        return MultiVectorField::scalar(dim, psi.as_scalar());
    }
    if k == 1 {
        return anchor1(lambda, psi);
    }
    // column a: Λ^#(dx_a), as its components (Λ^{a j})_j
    let images: Vec<MultiVectorField> = (0..dim).map(|a| anchor1(lambda, &FormField::basis(dim, a))).collect();
    let mut out = MultiVectorField::zero(dim, k);
    for mi in super::field::ascending_masks(dim, k) {
        let ii = mask_indices(mi);
        let mut terms = Vec::new();
        for (mj, c) in psi.iter() {
            let jj = mask_indices(mj);
            let mat: Vec<Vec<Expr>> =
                ii.iter().map(|&a| jj.iter().map(|&j| images[a].mask_component(1 << j)).collect()).collect();
            let d = det(&mat);
            if !d.is_zero() {
                terms.push(c * d);
            }
        }
        out.add_mask(mi, signed(Expr::sum(terms), parity(k)));
    }
    out
}

/// Koszul bracket `ℒ_{Λ^#α}β − ℒ_{Λ^#β}α − dΛ(α,β)`.
pub fn koszul(lambda: &MultiVectorField, alpha: &FormField, beta: &FormField) -> FormField {
    let dim = alpha.dim();
    let xa = anchor1(lambda, alpha);
    let xb = anchor1(lambda, beta);
    let l = bivector_pair(lambda, alpha, beta);
    lie_form(&xa, beta)
        .sub(&lie_form(&xb, alpha))
        .sub(&exterior_d(&FormField::scalar(dim, l)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorcalc::wedge;

    fn del(i: usize) -> MultiVectorField {
        MultiVectorField::basis(4, i)
    }

    fn dx(i: usize) -> FormField {
        FormField::basis(4, i)
    }

    #[test]
    fn schouten_examples() {
        let x = del(0).scale(&Expr::coord(0));
        assert!(schouten(&x, &del(1)).is_structurally_zero());
        let l = wedge(&del(0), &del(1));
        assert_eq!(schouten(&x, &l), l.neg());
        assert!(schouten(&l, &l).is_structurally_zero());
        // [X, f] = X(f), [f, X] = −X(f)
        let f = MultiVectorField::scalar(4, Expr::coord(0).powi(2));
        assert_eq!(schouten(&del(0), &f).as_scalar(), Expr::coord(0).scale(2.0.into()));
        assert_eq!(schouten(&f, &del(0)).as_scalar(), Expr::coord(0).scale((-2.0).into()));
    }

    #[test]
    fn anchor_examples() {
        let l = wedge(&del(0), &del(1));
        assert_eq!(anchor1(&l, &dx(0)), del(1));
        assert_eq!(anchor1(&l, &dx(1)), del(0).neg());
        assert_eq!(anchor_k(&l, &wedge(&dx(0), &dx(1))), l);
        let f = FormField::scalar(4, Expr::coord(2));
        assert_eq!(anchor_k(&l, &f).as_scalar(), Expr::coord(2));
        assert!(anchor_k(&l, &FormField::zero(4, 2)).is_structurally_zero());
    }

    #[test]
    fn koszul_constant_lambda() {
        let l = wedge(&del(0), &del(1));
        assert!(koszul(&l, &dx(0), &dx(1)).is_structurally_zero());
        let b = dx(1).scale(&Expr::coord(0));
        assert!(koszul(&l, &dx(0), &b).is_structurally_zero());
    }
}
