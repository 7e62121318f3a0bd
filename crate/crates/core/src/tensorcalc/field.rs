use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::marker::PhantomData;

use crate::symexpr::{Expr, C64};

/// Largest supported chart dimension (index tuples are stored as bitmasks).
pub const MAX_DIM: usize = 32;

mod sealed {
    pub trait Sealed {}
}

/// Marker for the variance of a [`GradedField`].
pub trait Variance: sealed::Sealed + Clone + Copy + fmt::Debug + PartialEq + 'static {
    const NAME: &'static str;
}

/// Covariant fields: differential forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Form;

/// Contravariant fields: multivector fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MultiVector;

impl sealed::Sealed for Form {}
impl sealed::Sealed for MultiVector {}
impl Variance for Form {
    const NAME: &'static str = "form";
}
impl Variance for MultiVector {
    const NAME: &'static str = "multivector";
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TensorError {
    #[error("fields live on charts of dimension {0} and {1}")]
    ChartMismatch(usize, usize),
    #[error("expected grade {want}, got {got}")]
    GradeMismatch { got: usize, want: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("index tuple has {got} entries, field grade is {want}")]
    TupleLength { got: usize, want: usize },
}

/// Sparse field of fixed grade: ascending index tuple ↦ coefficient.
///
/// Index tuples are zero-based coordinate indices packed into a `u32`
/// bitmask. Missing tuples have zero coefficient.
#[derive(Clone, PartialEq)]
pub struct GradedField<V: Variance> {
    dim: usize,
    grade: usize,
    comps: BTreeMap<u32, Expr>,
    _v: PhantomData<V>,
}

pub type FormField = GradedField<Form>;
pub type MultiVectorField = GradedField<MultiVector>;

/// Ascending indices of a mask.
pub fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask & (1 << b) != 0).collect()
}

/// Mask of a tuple together with the sign of the sorting permutation, or
/// `None` when an index repeats.
pub fn tuple_mask(indices: &[usize]) -> Option<(u32, i32)> {
    let mut mask = 0u32;
    let mut inversions = 0usize;
    for (a, &i) in indices.iter().enumerate() {
        if i >= MAX_DIM || mask & (1 << i) != 0 {
            return None;
        }
        mask |= 1 << i;
        inversions += indices[..a].iter().filter(|&&j| j > i).count();
    }
    Some((mask, if inversions.is_multiple_of(2) { 1 } else { -1 }))
}

/// Sign of `e_I ∧ e_J` relative to `e_{I∪J}`, or `None` when they overlap.
pub fn merge_sign(a: u32, b: u32) -> Option<i32> {
    if a & b != 0 {
        return None;
    }
    // count pairs (i in a, j in b) with i > j
    let mut swaps = 0u32;
    for j in mask_indices(b) {
        swaps += (a >> (j + 1)).count_ones();
    }
    Some(if swaps.is_multiple_of(2) { 1 } else { -1 })
}

pub(crate) fn signed(e: Expr, sign: i32) -> Expr {
    if sign < 0 {
        e.neg()
    } else {
        e
    }
}

impl<V: Variance> GradedField<V> {
    pub fn zero(dim: usize, grade: usize) -> Self {
        assert!(dim <= MAX_DIM, "chart dimension {dim} exceeds {MAX_DIM}");
        GradedField { dim, grade, comps: BTreeMap::new(), _v: PhantomData }
    }

    /// The grade-0 field holding `e`.
    pub fn scalar(dim: usize, e: Expr) -> Self {
        let mut f = Self::zero(dim, 0);
        f.insert_mask(0, e);
        f
    }

    /// `c · e_{indices}` (`dx_I` or `∂_I`), indices in any order.
    pub fn monomial(dim: usize, indices: &[usize], c: Expr) -> Self {
        let mut f = Self::zero(dim, indices.len());
        f.add_component(indices, c).expect("valid basis indices");
        f
    }

    /// The coordinate basis element `dx_i` or `∂_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        Self::monomial(dim, &[i], Expr::one())
    }

    pub fn from_components<I>(dim: usize, grade: usize, items: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (Vec<usize>, Expr)>,
    {
        let mut f = Self::zero(dim, grade);
        for (idx, c) in items {
            f.add_component(&idx, c)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    /// Add `c` to the coefficient of the tuple (sign-adjusted for order).
    /// Repeated indices contribute nothing.
    pub fn add_component(&mut self, indices: &[usize], c: Expr) -> Result<(), TensorError> {
        if indices.len() != self.grade {
            return Err(TensorError::TupleLength { got: indices.len(), want: self.grade });
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= self.dim) {
            return Err(TensorError::IndexOutOfRange { index, dim: self.dim });
        }
        if let Some((mask, sign)) = tuple_mask(indices) {
            self.add_mask(mask, signed(c, sign));
        }
        Ok(())
    }

    pub(crate) fn add_mask(&mut self, mask: u32, c: Expr) {
        if c.is_zero() {
            return;
        }
        let v = match self.comps.remove(&mask) {
            Some(old) => old + c,
            None => c,
        };
        self.insert_mask(mask, v);
    }

    pub(crate) fn insert_mask(&mut self, mask: u32, c: Expr) {
        if c.is_zero() || (self.grade > self.dim) {
            self.comps.remove(&mask);
        } else {
            self.comps.insert(mask, c);
        }
    }

    /// Coefficient for an arbitrary index tuple: permutation sign applied,
    /// zero for repeated or out-of-range indices.
    pub fn component(&self, indices: &[usize]) -> Expr {
        if indices.len() != self.grade || indices.iter().any(|&i| i >= self.dim) {
            return Expr::zero();
        }
        match tuple_mask(indices) {
            Some((mask, sign)) => signed(self.mask_component(mask), sign),
            None => Expr::zero(),
        }
    }

    pub fn mask_component(&self, mask: u32) -> Expr {
        self.comps.get(&mask).cloned().unwrap_or_else(Expr::zero)
    }

    /// The grade-0 coefficient (zero for other grades).
    pub fn as_scalar(&self) -> Expr {
        if self.grade == 0 {
            self.mask_component(0)
        } else {
            Expr::zero()
        }
    }

    /// Stored components in ascending mask order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &Expr)> + '_ {
        self.comps.iter().map(|(m, e)| (*m, e))
    }

    /// Stored components as (ascending index tuple, coefficient).
    pub fn components(&self) -> Vec<(Vec<usize>, Expr)> {
        self.comps.iter().map(|(m, e)| (mask_indices(*m), e.clone())).collect()
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Every ascending tuple of this grade, including absent ones.
    pub fn all_masks(&self) -> Vec<u32> {
        ascending_masks(self.dim, self.grade)
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "fields on charts of different dimension");
        assert_eq!(self.grade, other.grade, "adding fields of different grade");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        for (m, e) in other.iter() {
            out.add_mask(m, e.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    /// Multiply every coefficient by a function.
    pub fn scale(&self, f: &Expr) -> Self {
        self.map(|e| f * e)
    }

    pub fn scale_const(&self, c: C64) -> Self {
        self.map(|e| e.scale(c))
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> Self {
        let mut out = Self::zero(self.dim, self.grade);
        for (m, e) in self.iter() {
            out.insert_mask(m, f(e));
        }
        out
    }

    /// Structural complex conjugate of every coefficient.
    pub fn conj(&self) -> Self {
        self.map(|e| e.conj_expr())
    }

    /// Coefficients of `self − other` over the union of stored tuples.
    pub fn difference_pairs(&self, other: &Self) -> Vec<(Expr, Expr)> {
        self.check_same(other);
        let mut masks: Vec<u32> = self.comps.keys().chain(other.comps.keys()).copied().collect();
        masks.sort_unstable();
        masks.dedup();
        masks.into_iter().map(|m| (self.mask_component(m), other.mask_component(m))).collect()
    }

    /// All stored coefficients.
    pub fn coefficients(&self) -> Vec<Expr> {
        self.comps.values().cloned().collect()
    }
}

/// Ascending masks of `k` indices out of `dim`, in increasing mask order.
pub fn ascending_masks(dim: usize, k: usize) -> Vec<u32> {
    if k > dim {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().fold(0u32, |m, &i| m | (1 << i)));
        // next combination
        let mut p = k;
        loop {
            if p == 0 {
                out.sort_unstable();
                return out;
            }
            p -= 1;
            if idx[p] < dim - k + p {
                idx[p] += 1;
                for q in p + 1..k {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

impl<V: Variance> fmt::Debug for GradedField<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[dim {}, grade {}]{{", V::NAME, self.dim, self.grade)?;
        for (n, (m, e)) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            let idx: Vec<usize> = mask_indices(m).iter().map(|i| i + 1).collect();
            write!(f, "{idx:?}: {e}")?;
        }
        f.write_str("}")
    }
}
