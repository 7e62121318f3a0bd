//! Graded exterior calculus on one chart.
//!
//! Forms and multivector fields share [`GradedField`], tagged with a
//! variance marker so the two cannot be mixed by accident. Coordinate
//! indices are zero-based throughout.
//!
//! The anchor is fixed by `Λ^#(α)(β) = Λ(α, β)`; with `Λ = ∂1∧∂2` this
//! gives `Λ^#(dx1) = ∂2`.

mod brackets;
mod calculus;
mod field;

pub use brackets::{anchor1, anchor_k, bivector_pair, koszul, schouten};
pub use calculus::{
    apply_vector, det, differential, divergence, eval_form, eval_multivector, exterior_d, interior, interior_mv,
    lie_form, pair, try_wedge, wedge,
};
pub use field::{
    ascending_masks, mask_indices, merge_sign, tuple_mask, Form, FormField, GradedField, MultiVector,
    MultiVectorField, TensorError, Variance, MAX_DIM,
};
