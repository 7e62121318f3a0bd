//! Contravariant derivatives on the trivial line bundle, their curvature,
//! prequantization certificates and the hat representation.
//!
//! Sections are single complex functions `u`. A derivative is given by a
//! connection 1-form `ω` and a vector field `Z`:
//! `D_α u = Λ^#(α)(u) + (ω(Λ^#α) + 2πi α(Z)) u`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::random::{PolySpec, RandomData};
use crate::symexpr::{Chart, EquivReport, Expr, NamedCheck, SampleError, Sampler, C64};
use crate::tensorcalc::{apply_vector, ascending_masks, exterior_d, mask_indices, pair, FormField, MultiVectorField, TensorError};
use crate::twisted::{AtpStructure, TwistError};

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PrequantError {
    #[error("certificate carries no potential 1-form")]
    MissingPotential,
    #[error("curvature is not C^∞-linear in the section (residual {0:e})")]
    NotTensorial(f64),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// `(Z, η)` with an optional potential `ϑ`, `dϑ = η`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrequantCertificate {
    pub z: MultiVectorField,
    pub eta: FormField,
    pub potential: Option<FormField>,
}

impl PrequantCertificate {
    pub fn new(z: MultiVectorField, eta: FormField) -> Self {
        PrequantCertificate { z, eta, potential: None }
    }

    pub fn with_potential(mut self, theta: FormField) -> Self {
        self.potential = Some(theta);
        self
    }
}

/// Reports of one certificate check, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub checks: Vec<NamedCheck>,
}

impl CertificateReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.report.pass)
    }

    pub fn get(&self, name: &str) -> Option<&EquivReport> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.report)
    }
}

fn real_pairs(exprs: impl IntoIterator<Item = Expr>) -> Vec<(Expr, Expr)> {
    exprs.into_iter().map(|e| (e.conj_expr(), e)).collect()
}

/// `dη = 0`, `Λ + ∂Z = Λ^#(η)`, `Z` and `η` real, and `dϑ = η` when a
/// potential is present. Integrality of `[η]` is not examined.
pub fn check_certificate(s: &AtpStructure, c: &PrequantCertificate, sampler: &Sampler) -> Result<CertificateReport, PrequantError> {
    let chart = s.chart();
    let mut checks = Vec::new();
    let closed = exterior_d(&c.eta).coefficients();
    checks.push(NamedCheck::new("eta_closed", sampler.check_zero(chart, "eta_closed", &closed)?));
    let lhs = s.lambda().add(&s.coboundary_field(&c.z)?);
    let rhs = s.anchor_k(&c.eta);
    let eq = sampler.check_pairs(chart, "certificate_equation", &lhs.difference_pairs(&rhs))?;
    checks.push(NamedCheck::new("certificate_equation", eq));
    let reality = real_pairs(c.z.coefficients().into_iter().chain(c.eta.coefficients()));
    checks.push(NamedCheck::new("certificate_real", sampler.check_pairs(chart, "certificate_real", &reality)?));
    if let Some(theta) = &c.potential {
        let pairs = exterior_d(theta).difference_pairs(&c.eta);
        checks.push(NamedCheck::new("potential", sampler.check_pairs(chart, "potential", &pairs)?));
    }
    Ok(CertificateReport { checks })
}

/// A contravariant derivative on the trivial line bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct ContravariantD {
    structure: AtpStructure,
    omega: FormField,
    z: MultiVectorField,
}

impl ContravariantD {
    pub fn new(structure: AtpStructure, omega: FormField, z: MultiVectorField) -> Result<Self, TensorError> {
        let dim = structure.dim();
        for (d, g, want) in [(omega.dim(), omega.grade(), 1), (z.dim(), z.grade(), 1)] {
            if d != dim {
                return Err(TensorError::ChartMismatch(dim, d));
            }
            if g != want {
                return Err(TensorError::GradeMismatch { got: g, want });
            }
        }
        Ok(ContravariantD { structure, omega, z })
    }

    /// `ω = 0`, `Z = 0`: `D_α u = Λ^#(α)(u)`.
    pub fn flat(structure: AtpStructure) -> Self {
        let dim = structure.dim();
        ContravariantD { structure, omega: FormField::zero(dim, 1), z: MultiVectorField::zero(dim, 1) }
    }

    pub fn structure(&self) -> &AtpStructure {
        &self.structure
    }

    pub fn chart(&self) -> &Chart {
        self.structure.chart()
    }

    pub fn omega(&self) -> &FormField {
        &self.omega
    }

    pub fn z(&self) -> &MultiVectorField {
        &self.z
    }

    /// `ω(Λ^#α) + 2πi α(Z)`.
    pub fn potential_term(&self, alpha: &FormField) -> Expr {
        let x = self.structure.anchor(alpha);
        pair(&self.omega, &x) + pair(alpha, &self.z).scale(two_pi_i())
    }

    pub fn apply(&self, alpha: &FormField, u: &Expr) -> Expr {
        let x = self.structure.anchor(alpha);
        apply_vector(&x, u) + self.potential_term(alpha) * u
    }

    /// `D_α D_β u − D_β D_α u − D_{[α,β]} u`.
    pub fn curvature(&self, alpha: &FormField, beta: &FormField, u: &Expr) -> Expr {
        let br = self.structure.twisted_bracket(alpha, beta);
        self.apply(alpha, &self.apply(beta, u)) - self.apply(beta, &self.apply(alpha, u)) - self.apply(&br, u)
    }

    /// Components `C_D(dx_i, dx_j)(1)`, without the tensoriality check.
    pub fn curvature_bivector_unchecked(&self) -> MultiVectorField {
        let dim = self.structure.dim();
        let one = Expr::one();
        let mut out = MultiVectorField::zero(dim, 2);
        for m in ascending_masks(dim, 2) {
            let idx = mask_indices(m);
            let c = self.curvature(&FormField::basis(dim, idx[0]), &FormField::basis(dim, idx[1]), &one);
            out.add_component(&idx, c).expect("valid tuple");
        }
        out
    }

    /// The curvature bivector, after checking on random data that the
    /// curvature is `C^∞`-linear in the section.
    pub fn curvature_bivector(&self, sampler: &Sampler) -> Result<MultiVectorField, PrequantError> {
        let dim = self.structure.dim();
        let mut rd = RandomData::new(sampler.seed ^ 0x5eed_c0de, dim).with_spec(PolySpec { complex: true, ..PolySpec::default() });
        let one = Expr::one();
        let mut pairs = Vec::new();
        for _ in 0..3 {
            let a: FormField = rd.field(1);
            let b: FormField = rd.field(1);
            let u = rd.poly();
            pairs.push((self.curvature(&a, &b, &u), &u * self.curvature(&a, &b, &one)));
        }
        let r = sampler.check_pairs(self.chart(), "curvature_tensorial", &pairs)?;
        if !r.pass {
            return Err(PrequantError::NotTensorial(r.max_residual));
        }
        Ok(self.curvature_bivector_unchecked())
    }

    /// `Λ^#(α)(u1 ū2) − h(D_α u1, u2) − h(u1, D_α u2)`, `h(a, b) = a b̄`.
    pub fn hermitian_residual(&self, alpha: &FormField, u1: &Expr, u2: &Expr) -> Expr {
        let x = self.structure.anchor(alpha);
        let lhs = apply_vector(&x, &(u1 * u2.conj_expr()));
        let rhs = self.apply(alpha, u1) * u2.conj_expr() + u1 * self.apply(alpha, u2).conj_expr();
        lhs - rhs
    }

    /// `f̂(u) = D_{df} u + 2πi f u`.
    pub fn hat(&self, f: &Expr, u: &Expr) -> Expr {
        self.apply(&self.structure.d(f), u) + (f * u).scale(two_pi_i())
    }

    /// `[f̂, ĝ](u) − D_{i_{X_g} i_{X_f} φ} u − {f, g} D_θ u`.
    pub fn op_bracket(&self, f: &Expr, g: &Expr, u: &Expr) -> Expr {
        let s = &self.structure;
        let (df, dg) = (s.d(f), s.d(g));
        let comm = self.hat(f, &self.hat(g, u)) - self.hat(g, &self.hat(f, u));
        let phi_form = s.phi_term(&df, &dg);
        comm - self.apply(&phi_form, u) - s.pairing(&df, &dg) * self.apply(s.theta(), u)
    }

    /// `hat({f, g}) u − op_bracket(f, g, u)`.
    pub fn homomorphism_residual(&self, f: &Expr, g: &Expr, u: &Expr) -> Expr {
        self.hat(&self.structure.poisson_bracket(f, g), u) - self.op_bracket(f, g, u)
    }
}

/// `ω = −2πi ϑ` and the certificate's `Z`.
pub fn build_derivative(s: &AtpStructure, c: &PrequantCertificate) -> Result<ContravariantD, PrequantError> {
    let theta = c.potential.as_ref().ok_or(PrequantError::MissingPotential)?;
    let omega = theta.scale_const(-two_pi_i());
    Ok(ContravariantD::new(s.clone(), omega, c.z.clone())?)
}

/// `P_{C_D} + 2πi Λ` as component pairs `(P_{C_D}, −2πi Λ)`.
pub fn curvature_law_pairs(d: &ContravariantD, p: &MultiVectorField) -> Vec<(Expr, Expr)> {
    p.difference_pairs(&d.structure().lambda().scale_const(-two_pi_i()))
}
