//! θ-almost twisted Poisson structures `(Λ, φ, θ)`: validation, the
//! twisted bracket on 1-forms and the coboundary on multivector fields.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::symexpr::{Chart, EquivReport, Expr, NamedCheck, SampleError, Sampler, C64};
use crate::tensorcalc::{
    anchor1, anchor_k, apply_vector, ascending_masks, bivector_pair, differential, eval_multivector, exterior_d,
    interior, koszul, mask_indices, schouten, wedge, FormField, MultiVectorField, TensorError,
};

/// Highest input grade accepted by the coboundary.
pub const MAX_COBOUNDARY_GRADE: usize = 3;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TwistError {
    #[error("coboundary is implemented for grades 0..={MAX_COBOUNDARY_GRADE}, got {0}")]
    GradeUnsupported(usize),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Named residuals of the structure axioms.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<NamedCheck>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.report.pass)
    }

    pub fn get(&self, name: &str) -> Option<&EquivReport> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.report)
    }
}

/// A bivector `Λ`, 3-form `φ` and 1-form `θ` on one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct AtpStructure {
    chart: Chart,
    lambda: MultiVectorField,
    phi: FormField,
    theta: FormField,
}

fn expect(dim: usize, got_dim: usize, grade: usize, want: usize) -> Result<(), TensorError> {
    if got_dim != dim {
        return Err(TensorError::ChartMismatch(dim, got_dim));
    }
    if grade != want {
        return Err(TensorError::GradeMismatch { got: grade, want });
    }
    Ok(())
}

impl AtpStructure {
    pub fn new(chart: Chart, lambda: MultiVectorField, phi: FormField, theta: FormField) -> Result<Self, TensorError> {
        let dim = chart.dim();
        expect(dim, lambda.dim(), lambda.grade(), 2)?;
        expect(dim, phi.dim(), phi.grade(), 3)?;
        expect(dim, theta.dim(), theta.grade(), 1)?;
        Ok(AtpStructure { chart, lambda, phi, theta })
    }

    /// `φ = 0`, `θ = 0`.
    pub fn poisson(chart: Chart, lambda: MultiVectorField) -> Result<Self, TensorError> {
        let dim = chart.dim();
        Self::new(chart, lambda, FormField::zero(dim, 3), FormField::zero(dim, 1))
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn lambda(&self) -> &MultiVectorField {
        &self.lambda
    }

    pub fn phi(&self) -> &FormField {
        &self.phi
    }

    pub fn theta(&self) -> &FormField {
        &self.theta
    }

    pub fn anchor(&self, alpha: &FormField) -> MultiVectorField {
        anchor1(&self.lambda, alpha)
    }

    pub fn anchor_k(&self, psi: &FormField) -> MultiVectorField {
        anchor_k(&self.lambda, psi)
    }

    /// `Λ(α, β)`.
    pub fn pairing(&self, alpha: &FormField, beta: &FormField) -> Expr {
        bivector_pair(&self.lambda, alpha, beta)
    }

    pub fn d(&self, f: &Expr) -> FormField {
        differential(self.dim(), f)
    }

    pub fn poisson_bracket(&self, f: &Expr, g: &Expr) -> Expr {
        self.pairing(&self.d(f), &self.d(g))
    }

    pub fn hamiltonian(&self, f: &Expr) -> MultiVectorField {
        self.anchor(&self.d(f))
    }

    /// `i_{Λ^#β} i_{Λ^#α} φ`.
    pub fn phi_term(&self, alpha: &FormField, beta: &FormField) -> FormField {
        interior(&self.anchor(beta), &interior(&self.anchor(alpha), &self.phi))
    }

    /// `[α, β]_K + i_{Λ^#β} i_{Λ^#α} φ + Λ(α, β) θ`.
    pub fn twisted_bracket(&self, alpha: &FormField, beta: &FormField) -> FormField {
        koszul(&self.lambda, alpha, beta)
            .add(&self.phi_term(alpha, beta))
            .add(&self.theta.scale(&self.pairing(alpha, beta)))
    }

    /// `[[α,β],γ] + [[β,γ],α] + [[γ,α],β]`.
    pub fn bracket_jacobiator(&self, a: &FormField, b: &FormField, c: &FormField) -> FormField {
        let t = |x: &FormField, y: &FormField| self.twisted_bracket(x, y);
        t(&t(a, b), c).add(&t(&t(b, c), a)).add(&t(&t(c, a), b))
    }

    /// Axiom residuals as `(lhs, rhs)` component pairs.
    fn axiom_pairs(&self) -> [(&'static str, Vec<(Expr, Expr)>); 4] {
        let d_phi = exterior_d(&self.phi).difference_pairs(&wedge(&self.theta, &self.phi));
        let anchor_theta = self.anchor(&self.theta).difference_pairs(&MultiVectorField::zero(self.dim(), 1));
        let half = schouten(&self.lambda, &self.lambda).scale_const(C64::new(0.5, 0.0));
        let jac = half.difference_pairs(&self.anchor_k(&self.phi));
        let d_theta = exterior_d(&self.theta).difference_pairs(&FormField::zero(self.dim(), 2));
        [("d_phi", d_phi), ("anchor_theta", anchor_theta), ("schouten", jac), ("d_theta", d_theta)]
    }

    /// `dφ = θ∧φ`, `Λ^#θ = 0`, `½[Λ,Λ] = Λ^#φ` and `dθ = 0`, componentwise.
    pub fn validate(&self, s: &Sampler) -> Result<ValidationReport, SampleError> {
        let mut checks = Vec::new();
        for (name, pairs) in self.axiom_pairs() {
            let report = s.check_pairs(&self.chart, name, &pairs)?;
            checks.push(NamedCheck::new(name, report));
        }
        Ok(ValidationReport { checks })
    }

    /// The coboundary of `v` evaluated on the 1-forms `alphas`
    /// (`alphas.len() = grade(v) + 1`).
    pub fn coboundary(&self, v: &MultiVectorField, alphas: &[FormField]) -> Result<Expr, TwistError> {
        let n = v.grade();
        if n > MAX_COBOUNDARY_GRADE {
            return Err(TwistError::GradeUnsupported(n));
        }
        assert_eq!(alphas.len(), n + 1, "coboundary needs grade + 1 arguments");
        let mut bracket = |i: usize, j: usize| self.twisted_bracket(&alphas[i], &alphas[j]);
        Ok(self.coboundary_terms(v, alphas, &mut bracket))
    }

    fn coboundary_terms(
        &self,
        v: &MultiVectorField,
        alphas: &[FormField],
        bracket: &mut dyn FnMut(usize, usize) -> FormField,
    ) -> Expr {
        let m = alphas.len();
        let mut terms = Vec::new();
        for i in 0..m {
            let rest: Vec<FormField> = (0..m).filter(|&a| a != i).map(|a| alphas[a].clone()).collect();
            let inner = eval_multivector(v, &rest);
            let t = apply_vector(&self.anchor(&alphas[i]), &inner);
            // (−1)^{i−1} with 1-based i
            terms.push(if i % 2 == 0 { t } else { t.neg() });
        }
        for i in 0..m {
            for j in i + 1..m {
                let br = bracket(i, j);
                if br.is_structurally_zero() {
                    continue;
                }
                let mut args = vec![br];
                args.extend((0..m).filter(|&a| a != i && a != j).map(|a| alphas[a].clone()));
                let t = eval_multivector(v, &args);
                terms.push(if (i + j) % 2 == 0 { t } else { t.neg() });
            }
        }
        Expr::sum(terms)
    }

    /// The coboundary as a field of grade `grade(v) + 1`, assembled from its
    /// values on coordinate 1-forms.
    pub fn coboundary_field(&self, v: &MultiVectorField) -> Result<MultiVectorField, TwistError> {
        let n = v.grade();
        if n > MAX_COBOUNDARY_GRADE {
            return Err(TwistError::GradeUnsupported(n));
        }
        let dim = self.dim();
        let mut cache: BTreeMap<(usize, usize), FormField> = BTreeMap::new();
        let mut out = MultiVectorField::zero(dim, n + 1);
        for mask in ascending_masks(dim, n + 1) {
            let idx = mask_indices(mask);
            let alphas: Vec<FormField> = idx.iter().map(|&i| FormField::basis(dim, i)).collect();
            let mut bracket = |i: usize, j: usize| {
                let key = (idx[i], idx[j]);
                cache
                    .entry(key)
                    .or_insert_with(|| self.twisted_bracket(&alphas[i], &alphas[j]))
                    .clone()
            };
            let c = self.coboundary_terms(v, &alphas, &mut bracket);
            let mut one = MultiVectorField::zero(dim, n + 1);
            one.add_component(&idx, c)?;
            out = out.add(&one);
        }
        Ok(out)
    }

    /// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}} − Λ^#(φ)(df, dg, dh)`.
    pub fn jacobiator_residual(&self, f: &Expr, g: &Expr, h: &Expr) -> Expr {
        let pb = |a: &Expr, b: &Expr| self.poisson_bracket(a, b);
        let lhs = pb(f, &pb(g, h)) + pb(g, &pb(h, f)) + pb(h, &pb(f, g));
        let rhs = eval_multivector(&self.anchor_k(&self.phi), &[self.d(f), self.d(g), self.d(h)]);
        lhs - rhs
    }

    /// `∂(Λ^#μ) + Λ^#(dμ)`, which vanishes on valid structures.
    pub fn chain_map_residual(&self, mu: &FormField) -> Result<MultiVectorField, TwistError> {
        let lhs = self.coboundary_field(&self.anchor_k(mu))?;
        Ok(lhs.add(&self.anchor_k(&exterior_d(mu))))
    }
}
