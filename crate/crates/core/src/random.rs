//! Seeded random polynomial data for property tests and acceptance runs.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::symexpr::{Expr, C64};
use crate::tensorcalc::{ascending_masks, mask_indices, GradedField, Variance};

/// Shape of generated polynomials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolySpec {
    pub max_terms: usize,
    pub max_degree: u32,
    /// Allow complex coefficients.
    pub complex: bool,
}

impl Default for PolySpec {
    fn default() -> Self {
        PolySpec { max_terms: 3, max_degree: 2, complex: false }
    }
}

pub struct RandomData {
    rng: ChaCha8Rng,
    dim: usize,
    spec: PolySpec,
}

fn coefficient<R: Rng>(rng: &mut R, complex: bool) -> C64 {
    // quarter-integers in [-2, 2], avoiding 0
    let pick = |rng: &mut R| loop {
        let k: i32 = rng.gen_range(-8..=8);
        if k != 0 {
            return k as f64 / 4.0;
        }
    };
    let re = pick(rng);
    let im = if complex && rng.gen_bool(0.5) { pick(rng) } else { 0.0 };
    C64::new(re, im)
}

impl RandomData {
    pub fn new(seed: u64, dim: usize) -> Self {
        RandomData { rng: ChaCha8Rng::seed_from_u64(seed), dim, spec: PolySpec::default() }
    }

    pub fn with_spec(mut self, spec: PolySpec) -> Self {
        self.spec = spec;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A polynomial with between 1 and `max_terms` monomials.
    pub fn poly(&mut self) -> Expr {
        let n = self.rng.gen_range(1..=self.spec.max_terms);
        let terms: Vec<Expr> = (0..n).map(|_| self.monomial()).collect();
        Expr::sum(terms)
    }

    /// A polynomial in the given coordinates only.
    pub fn poly_in(&mut self, coords: &[usize]) -> Expr {
        let n = self.rng.gen_range(1..=self.spec.max_terms);
        let terms: Vec<Expr> = (0..n).map(|_| self.monomial_in(coords)).collect();
        Expr::sum(terms)
    }

    fn monomial(&mut self) -> Expr {
        let coords: Vec<usize> = (0..self.dim).collect();
        self.monomial_in(&coords)
    }

    fn monomial_in(&mut self, coords: &[usize]) -> Expr {
        let c = coefficient(&mut self.rng, self.spec.complex);
        let deg = self.rng.gen_range(0..=self.spec.max_degree);
        let mut factors = alloc::vec![Expr::constant(c)];
        for _ in 0..deg {
            let k = coords[self.rng.gen_range(0..coords.len())];
            factors.push(Expr::coord(k));
        }
        Expr::product(factors)
    }

    /// A random field of the given grade with roughly half the components
    /// populated (at least one when any exist).
    pub fn field<V: Variance>(&mut self, grade: usize) -> GradedField<V> {
        let masks = ascending_masks(self.dim, grade);
        let mut f = GradedField::zero(self.dim, grade);
        if masks.is_empty() {
            return f;
        }
        let forced = self.rng.gen_range(0..masks.len());
        for (n, m) in masks.into_iter().enumerate() {
            if n == forced || self.rng.gen_bool(0.5) {
                let c = self.poly();
                f.add_component(&mask_indices(m), c).expect("valid tuple");
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorcalc::FormField;

    #[test]
    fn deterministic() {
        let a = RandomData::new(3, 4).poly();
        let b = RandomData::new(3, 4).poly();
        assert_eq!(a, b);
        let f: FormField = RandomData::new(1, 5).field(2);
        assert!(!f.is_structurally_zero());
        assert_eq!(f.grade(), 2);
    }
}
