//! Polarizations, observable classes, half-density operators and the
//! quadrature inner product.
//!
//! A section of `K ⊗ 𝒟` is stored as one complex function `u`, standing
//! for `u · (1 ⊗ |dx1∧…∧dxn|^{1/2})`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::prequantum::ContravariantD;
use crate::symexpr::{Chart, EvalError, Expr, SampleError, Sampler, Tape, C64};
use crate::tensorcalc::{apply_vector, divergence, FormField, MultiVectorField, TensorError};
use crate::twisted::AtpStructure;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PolarizeError {
    #[error("generator values are linearly dependent at {point:?}")]
    DegenerateGenerators { point: Vec<f64> },
    #[error("observables coincide: a pair needs two distinct functions")]
    NotDistinct,
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// A finite list of complex 1-forms; the polarization is their span.
#[derive(Clone, Debug, PartialEq)]
pub struct Polarization {
    generators: Vec<FormField>,
}

impl Polarization {
    pub fn new(generators: Vec<FormField>) -> Result<Self, TensorError> {
        if let Some(first) = generators.first() {
            for g in &generators {
                if g.grade() != 1 {
                    return Err(TensorError::GradeMismatch { got: g.grade(), want: 1 });
                }
                if g.dim() != first.dim() {
                    return Err(TensorError::ChartMismatch(first.dim(), g.dim()));
                }
            }
        }
        Ok(Polarization { generators })
    }

    pub fn generators(&self) -> &[FormField] {
        &self.generators
    }

    /// `span{dz_1, …, dz_k}` for the complex pairs of a chart.
    pub fn holomorphic(chart: &Chart) -> Self {
        let dim = chart.dim();
        let generators = chart
            .pairs()
            .iter()
            .map(|&(re, im)| FormField::basis(dim, re).add(&FormField::basis(dim, im).scale(&Expr::i())))
            .collect();
        Polarization { generators }
    }
}

/// Pointwise membership of a 1-form in a span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Largest `‖γ − proj γ‖ / (1 + ‖γ‖)` over the sample points.
    pub max_distance: f64,
    pub points: usize,
}

impl Membership {
    fn trivial() -> Self {
        Membership { member: true, max_distance: 0.0, points: 0 }
    }

    pub fn merge(self, o: Membership) -> Membership {
        Membership {
            member: self.member && o.member,
            max_distance: self.max_distance.max(o.max_distance),
            points: self.points.max(o.points),
        }
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    // through C64 so this also builds without std
    C64::new(a.iter().map(|x| x.norm_sqr()).sum::<f64>(), 0.0).sqrt().re
}

/// Orthonormal basis of the column span (modified Gram–Schmidt, applied
/// twice), or `None` when a column is numerically dependent.
fn orthonormalize(cols: &[Vec<C64>]) -> Option<Vec<Vec<C64>>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(cols.len());
    for c in cols {
        let n0 = norm(c);
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &basis {
                let p = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = norm(&v);
        if !(n > 1e-10 * n0.max(1e-300)) {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
    Some(basis)
}

/// Decide `γ ∈ span(P)` at the sample points of the named stream.
pub fn span_membership(
    chart: &Chart,
    gamma: &FormField,
    p: &Polarization,
    sampler: &Sampler,
    name: &str,
) -> Result<Membership, PolarizeError> {
    let dim = chart.dim();
    if gamma.is_structurally_zero() {
        return Ok(Membership { member: true, max_distance: 0.0, points: 0 });
    }
    let mut exprs: Vec<Expr> = (0..dim).map(|i| gamma.mask_component(1 << i)).collect();
    for g in p.generators() {
        exprs.extend((0..dim).map(|i| g.mask_component(1 << i)));
    }
    let mut worst: f64 = 0.0;
    let mut degenerate: Option<Vec<f64>> = None;
    sampler.for_each_point(chart, name, &exprs, |pt, vals| {
        if degenerate.is_some() {
            return;
        }
        let target = &vals[..dim];
        let cols: Vec<Vec<C64>> = vals[dim..].chunks(dim).map(|c| c.to_vec()).collect();
        let Some(basis) = orthonormalize(&cols) else {
            degenerate = Some(pt.to_vec());
            return;
        };
        let mut r = target.to_vec();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &r);
                r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let d = norm(&r) / (1.0 + norm(target));
        worst = if d.is_nan() { f64::INFINITY } else { worst.max(d) };
    })?;
    if let Some(point) = degenerate {
        return Err(PolarizeError::DegenerateGenerators { point });
    }
    Ok(Membership { member: worst <= sampler.tol, max_distance: worst, points: sampler.n_samples })
}

/// `Λ(α_a, α_b) ≡ 0` for all generator pairs.
pub fn isotropy_check(s: &AtpStructure, p: &Polarization, sampler: &Sampler) -> Result<crate::symexpr::EquivReport, SampleError> {
    let g = p.generators();
    let mut exprs = Vec::new();
    for a in 0..g.len() {
        for b in a + 1..g.len() {
            exprs.push(s.pairing(&g[a], &g[b]));
        }
    }
    sampler.check_zero(s.chart(), "isotropy", &exprs)
}

/// `[α_a, α_b]_{φ,θ} ∈ P` for all generator pairs.
pub fn lie_closure(s: &AtpStructure, p: &Polarization, sampler: &Sampler) -> Result<Membership, PolarizeError> {
    let g = p.generators();
    let mut out = Membership::trivial();
    for a in 0..g.len() {
        for b in a + 1..g.len() {
            let br = s.twisted_bracket(&g[a], &g[b]);
            out = out.merge(span_membership(s.chart(), &br, p, sampler, "lie_closure")?);
        }
    }
    Ok(out)
}

/// `[df, α]_{φ,θ} ∈ P` for every generator `α`.
pub fn in_p(s: &AtpStructure, p: &Polarization, f: &Expr, sampler: &Sampler) -> Result<Membership, PolarizeError> {
    let df = s.d(f);
    let mut out = Membership::trivial();
    for g in p.generators() {
        let br = s.twisted_bracket(&df, g);
        out = out.merge(span_membership(s.chart(), &br, p, sampler, "in_p")?);
    }
    Ok(out)
}

/// `i_{Λ^#dg} i_{Λ^#df} φ + Λ(df, dg) θ`.
pub fn pair_form(s: &AtpStructure, f: &Expr, g: &Expr) -> FormField {
    let (df, dg) = (s.d(f), s.d(g));
    s.phi_term(&df, &dg).add(&s.theta().scale(&s.pairing(&df, &dg)))
}

/// The pair condition: `f ≠ g`, both in `P(𝒫)`, and
/// `[pair_form(f, g), α]_{φ,θ} ∈ P` for every generator.
pub fn pair_condition(s: &AtpStructure, p: &Polarization, f: &Expr, g: &Expr, sampler: &Sampler) -> Result<Membership, PolarizeError> {
    if f == g || sampler.equiv(s.chart(), f, g)?.pass {
        return Err(PolarizeError::NotDistinct);
    }
    let mut out = in_p(s, p, f, sampler)?.merge(in_p(s, p, g, sampler)?);
    let beta = pair_form(s, f, g);
    for a in p.generators() {
        let br = s.twisted_bracket(&beta, a);
        out = out.merge(span_membership(s.chart(), &br, p, sampler, "pair_condition")?);
    }
    Ok(out)
}

/// Outcome of the witness search for `f ∈ 𝒬(𝒫)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QVerdict {
    pub member: bool,
    pub in_p: Membership,
    /// Index into the candidate list (witnesses, then the constant).
    pub witness: Option<usize>,
    pub max_distance: f64,
}

/// `f ∈ P(𝒫)` and some candidate `g` (given witnesses, then a constant
/// distinct from `f`) satisfies the pair condition.
pub fn in_q(s: &AtpStructure, p: &Polarization, f: &Expr, witnesses: &[Expr], sampler: &Sampler) -> Result<QVerdict, PolarizeError> {
    let inp = in_p(s, p, f, sampler)?;
    if !inp.member {
        return Ok(QVerdict { member: false, in_p: inp, witness: None, max_distance: inp.max_distance });
    }
    let constant = if sampler.equiv(s.chart(), f, &Expr::one())?.pass { Expr::zero() } else { Expr::one() };
    let mut best = f64::INFINITY;
    for (k, g) in witnesses.iter().chain(core::iter::once(&constant)).enumerate() {
        match pair_condition(s, p, f, g, sampler) {
            Ok(m) if m.member => {
                return Ok(QVerdict { member: true, in_p: inp, witness: Some(k), max_distance: m.max_distance });
            }
            Ok(m) => best = best.min(m.max_distance),
            Err(PolarizeError::NotDistinct) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(QVerdict { member: false, in_p: inp, witness: None, max_distance: best })
}

/// `ℒ_X(u β) = (X(u) + ½ u div X) β`.
pub fn lie_half_density(x: &MultiVectorField, u: &Expr) -> Expr {
    apply_vector(x, u) + (u * divergence(x)).scale(C64::new(0.5, 0.0))
}

/// `D_α` on `K ⊗ 𝒟`:
/// `Λ^#α(u) + u (ω(Λ^#α) + 2πi α(Z) + ½ div Λ^#α)`.
pub fn extended_d(d: &ContravariantD, alpha: &FormField, u: &Expr) -> Expr {
    let x = d.structure().anchor(alpha);
    lie_half_density(&x, u) + d.potential_term(alpha) * u
}

/// `D_α u` for every generator; `u ∈ ℋ₀` iff all vanish.
pub fn h0_residuals(d: &ContravariantD, p: &Polarization, u: &Expr) -> Vec<Expr> {
    p.generators().iter().map(|a| extended_d(d, a, u)).collect()
}

/// `f̂(u) = D_{df} u + 2πi f u` on `K ⊗ 𝒟`.
pub fn extended_hat(d: &ContravariantD, f: &Expr, u: &Expr) -> Expr {
    extended_d(d, &d.structure().d(f), u) + (f * u).scale(C64::new(0.0, 2.0 * PI))
}

/// Tensor-product midpoint rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub count: usize,
    pub bounds: Vec<(f64, f64)>,
    /// Largest boundary-cell integrand, relative to the largest over all
    /// cells, tolerated before a leak is reported.
    pub leak_tol: f64,
}

impl QuadratureGrid {
    pub fn new(chart: &Chart, count: usize) -> Self {
        assert!(count > 0, "grid needs at least one point per axis");
        QuadratureGrid { count, bounds: chart.bounds().to_vec(), leak_tol: 1e-3 }
    }

    pub fn total_points(&self) -> usize {
        self.count.pow(self.bounds.len() as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| (b - a) / self.count as f64).product()
    }

    fn point(&self, mut linear: usize, out: &mut [f64]) -> bool {
        let mut boundary = false;
        for (k, &(a, b)) in self.bounds.iter().enumerate() {
            let i = linear % self.count;
            linear /= self.count;
            out[k] = a + (b - a) * (i as f64 + 0.5) / self.count as f64;
            boundary |= i == 0 || i + 1 == self.count;
        }
        boundary
    }
}

/// Inner products of a family of sections, `G[a][b] = ⟨u_a, u_b⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gram {
    pub values: Vec<Vec<C64>>,
    /// Largest boundary-cell `|u_a ū_b|` relative to the largest over
    /// all cells, when it exceeds the grid's `leak_tol`.
    pub boundary_leak: Option<f64>,
}

impl Gram {
    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.values[a][b]
    }
}

const BLOCK: usize = 4096;

struct BlockSum {
    sums: Vec<C64>,
    boundary_max: f64,
    max: f64,
}

fn block_sum(tape: &Tape, grid: &QuadratureGrid, guard: f64, n: usize, block: usize) -> Result<BlockSum, EvalError> {
    let dim = grid.bounds.len();
    let total = grid.total_points();
    let mut point = vec![0.0; dim];
    let mut scratch = Vec::new();
    let mut vals = Vec::new();
    let mut sums = vec![C64::new(0.0, 0.0); n * n];
    let (mut boundary_max, mut max) = (0.0f64, 0.0f64);
    for lin in block * BLOCK..((block + 1) * BLOCK).min(total) {
        let on_boundary = grid.point(lin, &mut point);
        tape.eval_into(&point, guard, &mut scratch, &mut vals)?;
        for a in 0..n {
            for b in a..n {
                let v = vals[a] * vals[b].conj();
                sums[a * n + b] += v;
                let m = v.norm();
                max = max.max(m);
                if on_boundary {
                    boundary_max = boundary_max.max(m);
                }
            }
        }
    }
    Ok(BlockSum { sums, boundary_max, max })
}

fn pairwise(mut v: Vec<Vec<C64>>) -> Vec<C64> {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop().unwrap_or_default()
}

/// `⟨u_a, u_b⟩ = ∫ u_a ū_b` over the grid box for all pairs, in one sweep.
///
/// Blocks of cells are summed in order and combined by a pairwise tree,
/// so the result does not depend on thread count. The lower triangle is
/// filled by conjugation, which makes conjugate symmetry exact.
pub fn gram(chart: &Chart, sections: &[Expr], grid: &QuadratureGrid) -> Result<Gram, EvalError> {
    let n = sections.len();
    let tape = Tape::compile(chart.dim(), sections);
    let blocks = grid.total_points().div_ceil(BLOCK);
    let guard = chart.guard_eps();
    #[cfg(feature = "parallel")]
    let parts: Vec<BlockSum> = {
        use rayon::prelude::*;
        (0..blocks).into_par_iter().map(|b| block_sum(&tape, grid, guard, n, b)).collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<BlockSum> = (0..blocks).map(|b| block_sum(&tape, grid, guard, n, b)).collect::<Result<_, _>>()?;
    let boundary_max = parts.iter().map(|p| p.boundary_max).fold(0.0, f64::max);
    let max = parts.iter().map(|p| p.max).fold(0.0, f64::max);
    let total = pairwise(parts.into_iter().map(|p| p.sums).collect());
    let vol = grid.cell_volume();
    let mut values = vec![vec![C64::new(0.0, 0.0); n]; n];
    for a in 0..n {
        for b in a..n {
            let v = total.get(a * n + b).copied().unwrap_or_default() * vol;
            values[a][b] = v;
            values[b][a] = v.conj();
        }
    }
    let rel = if max > 0.0 { boundary_max / max } else { 0.0 };
    Ok(Gram { values, boundary_leak: (rel > grid.leak_tol).then_some(rel) })
}

/// `⟨u1, u2⟩` with the boundary-leak indicator.
pub fn inner_product(chart: &Chart, u1: &Expr, u2: &Expr, grid: &QuadratureGrid) -> Result<(C64, Option<f64>), EvalError> {
    let g = gram(chart, &[u1.clone(), u2.clone()], grid)?;
    Ok((g.get(0, 1), g.boundary_leak))
}

/// Anti-Hermiticity defect of `f̂` on two sections:
/// `(|⟨f̂u1, u2⟩ + ⟨u1, f̂u2⟩|, |⟨u1,u1⟩| + |⟨u2,u2⟩|, leak)`.
pub fn anti_hermitian_defect(
    d: &ContravariantD,
    f: &Expr,
    u1: &Expr,
    u2: &Expr,
    grid: &QuadratureGrid,
) -> Result<(f64, f64, Option<f64>), EvalError> {
    let h1 = extended_hat(d, f, u1);
    let h2 = extended_hat(d, f, u2);
    let g = gram(d.chart(), &[u1.clone(), u2.clone(), h1, h2], grid)?;
    let defect = (g.get(2, 1) + g.get(0, 3)).norm();
    let scale = g.get(0, 0).norm() + g.get(1, 1).norm();
    Ok((defect, scale, g.boundary_leak))
}
