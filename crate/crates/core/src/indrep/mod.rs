//! Induced unitary representations of `SO(n+1; ι, j') = N(x) ⋊ SO(n; j')`.
//!
//! Representation spaces are functions on the subgroup `SO(n; j')`, written
//! in canonical coordinates (blocks `k = 1..n-1`). For `g = t(x) k(Q)`,
//!
//! ```text
//! (U(g) f)(Q⁰) = exp(i ⟨h₀, Ad(k⁻¹(Q⁰)) x⟩) f(k⁻¹(Q) k(Q⁰))
//! ```
//!
//! with `h₀ = ±R e_n` (positive radius) or `h₀ = ±ρ e_m` (imaginary radius).
//! The stabilizer acts trivially.

pub mod contraction;
pub mod geometry;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, CkError, Result};
use crate::group::{factorize, BlockParams, CanonicalParams};
use crate::orbits::{adjoint, adjoint_inverse, apply, imaginary_families, invariant_weights, positive_families, Sign};
use crate::scalar::{Branch, Signature};

pub use contraction::{contraction_limit_check, ContractionQuantity, ContractionReport};
pub use geometry::{dcoeffs, dcoeffs_det, geometry, transported, transported_matrix, GeometryCoeffs};

/// A character `exp(i⟨h, x⟩)` of the translation subgroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Character {
    pub h: Vec<f64>,
}

impl Character {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.iter().any(|v| !v.is_finite()) {
            return domain("character has non-finite components");
        }
        Ok(Self { h })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        character_eval(&self.h, x)
    }
}

/// `exp(i Σ h_k x_k)`.
pub fn character_eval(h: &[f64], x: &[f64]) -> Result<Complex64> {
    if h.len() != x.len() {
        return domain(format!("character of length {} paired with vector of length {}", h.len(), x.len()));
    }
    Ok(Complex64::from_polar(1.0, h.iter().zip(x).map(|(a, b)| a * b).sum()))
}

/// Orbit family selecting the representation series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `ω^±_R`, character `±R e_n`.
    Positive { r: f64 },
    /// `σ^±_ρ`, character `±ρ e_m` (1-based axis `m`).
    Imaginary { rho: f64, axis: usize },
}

/// An element `t(x) k(Q)` of the contracted group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractedElement {
    pub x: Vec<f64>,
    /// Subgroup parameters, blocks `k = 1..n-1`.
    pub k: CanonicalParams,
}

impl ContractedElement {
    pub fn new(x: Vec<f64>, k: CanonicalParams) -> Self {
        Self { x, k }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            k: CanonicalParams::zeros(n, 1),
        }
    }

    /// `t(x₁)k₁ · t(x₂)k₂ = t(x₁ + Ad(k₁)x₂) · k₁k₂`, with `k₁k₂` brought back
    /// to canonical coordinates.
    pub fn product(&self, sub: &Signature, other: &ContractedElement) -> Result<ContractedElement> {
        let a1 = adjoint(sub, &self.k)?;
        let shifted = apply(&a1, &other.x);
        let x = self.x.iter().zip(&shifted).map(|(a, b)| a + b).collect();
        let k = subgroup_params(sub, &(a1 * adjoint(sub, &other.k)?))?;
        Ok(ContractedElement { x, k })
    }

    /// The `(n+1) x (n+1)` matrix `t(x) · diag(1, Ad(k))`.
    pub fn matrix(&self, sub: &Signature) -> Result<DMatrix<f64>> {
        crate::orbits::subgroup_matrix(sub, &self.k)
            .map(|m| crate::orbits::translation_matrix(&self.x) * m)
    }
}

/// Canonical subgroup parameters (blocks `1..n-1`) of an `n x n` matrix of `SO(n; j')`.
pub fn subgroup_params(sub: &Signature, m: &DMatrix<f64>) -> Result<CanonicalParams> {
    Ok(factorize(sub, m, 0)?.shifted_up(1))
}

/// `k⁻¹(Q) k(Q⁰)` in canonical coordinates.
pub fn shifted_argument(sub: &Signature, q: &CanonicalParams, q0: &CanonicalParams) -> Result<CanonicalParams> {
    subgroup_params(sub, &(adjoint_inverse(sub, q)? * adjoint(sub, q0)?))
}

type Evaluator = dyn Fn(&CanonicalParams) -> Result<Complex64> + Send + Sync;

/// A complex function on the subgroup, evaluated in canonical coordinates.
#[derive(Clone)]
pub struct RepFunction {
    evaluator: Arc<Evaluator>,
}

impl RepFunction {
    pub fn new(f: impl Fn(&CanonicalParams) -> Result<Complex64> + Send + Sync + 'static) -> Self {
        Self { evaluator: Arc::new(f) }
    }

    pub fn eval(&self, q: &CanonicalParams) -> Result<Complex64> {
        let v = (self.evaluator)(q)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return domain("representation function returned a non-finite value");
        }
        Ok(v)
    }
}

impl fmt::Debug for RepFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RepFunction")
    }
}

/// Signature, orbit family and sign of one representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepContext {
    pub signature: Signature,
    pub sub: Signature,
    pub family: Family,
    pub sign: Sign,
    /// Orbit families for this series (1 when `±` label the same orbit).
    pub families: u8,
}

impl RepContext {
    /// `signature` is the full `(j_1, ..., j_n)` with `j_1 = ι`.
    pub fn new(signature: &Signature, family: Family, sign: Sign) -> Result<Self> {
        if signature.n() < 2 {
            return Err(CkError::Config("the contracted group needs n >= 2".into()));
        }
        if signature.branch(1) != Branch::Parabolic {
            return Err(CkError::Config(format!(
                "induced representations need j_1 = d, got signature {signature}"
            )));
        }
        let sub = signature.sub(1)?;
        let n = signature.n();
        let families = match family {
            Family::Positive { r } => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(CkError::Config(format!("radius must be positive, got {r}")));
                }
                positive_families(&sub)
            }
            Family::Imaginary { rho, axis } => {
                if !(rho > 0.0 && rho.is_finite()) {
                    return Err(CkError::Config(format!("imaginary radius must be positive, got {rho}")));
                }
                if axis == 0 || axis > n {
                    return Err(CkError::Config(format!("axis {axis} outside 1..={n}")));
                }
                if invariant_weights(&sub)[axis - 1] >= 0.0 {
                    return Err(CkError::Config(format!(
                        "signature {signature} has no negative orbit weight on axis {axis}"
                    )));
                }
                imaginary_families(&sub, axis)
            }
        };
        Ok(Self {
            signature: signature.clone(),
            sub,
            family,
            sign,
            families,
        })
    }

    pub fn n(&self) -> usize {
        self.signature.n()
    }

    /// The character `h₀` of the series.
    pub fn character(&self) -> Vec<f64> {
        let n = self.n();
        let mut h = vec![0.0; n];
        match self.family {
            Family::Positive { r } => h[n - 1] = self.sign.value() * r,
            Family::Imaginary { rho, axis } => h[axis - 1] = self.sign.value() * rho,
        }
        h
    }

    /// Phase argument `⟨h₀, Ad(k⁻¹(Q⁰)) x⟩`.
    pub fn phase_angle(&self, x: &[f64], q0: &CanonicalParams) -> Result<f64> {
        let t = transported(&self.sub, q0, x)?;
        Ok(match self.family {
            Family::Positive { r } => self.sign.value() * r * t[self.n() - 1],
            Family::Imaginary { rho, axis } => self.sign.value() * rho * t[axis - 1],
        })
    }

    /// `(U(g) f)(Q⁰)` for either family.
    pub fn apply(&self, g: &ContractedElement, f: &RepFunction, q0: &CanonicalParams) -> Result<Complex64> {
        if g.x.len() != self.n() {
            return domain(format!("translation needs {} components, got {}", self.n(), g.x.len()));
        }
        let phase = Complex64::from_polar(1.0, self.phase_angle(&g.x, q0)?);
        Ok(phase * f.eval(&shifted_argument(&self.sub, &g.k, q0)?)?)
    }

    /// `U(g) f` as a new function.
    pub fn act(&self, g: &ContractedElement, f: &RepFunction) -> RepFunction {
        let ctx = self.clone();
        let g = g.clone();
        let f = f.clone();
        RepFunction::new(move |q0| ctx.apply(&g, &f, q0))
    }
}

/// `ω^±_R(t(x) k(Q)) f (Q⁰)`.
pub fn omega_apply(ctx: &RepContext, g: &ContractedElement, f: &RepFunction, q0: &CanonicalParams) -> Result<Complex64> {
    match ctx.family {
        Family::Positive { .. } => ctx.apply(g, f, q0),
        Family::Imaginary { .. } => Err(CkError::Config("ω needs a positive-radius context".into())),
    }
}

/// `σ^±_ρ(t(x) k(Q)) f (Q⁰)`.
pub fn sigma_apply(ctx: &RepContext, g: &ContractedElement, f: &RepFunction, q0: &CanonicalParams) -> Result<Complex64> {
    match ctx.family {
        Family::Imaginary { .. } => ctx.apply(g, f, q0),
        Family::Positive { .. } => Err(CkError::Config("σ needs an imaginary-radius context".into())),
    }
}

/// Heisenberg group `SO(3; ι, ι)`:
/// `e^{±iR(x₂ - x₁Q⁰₁₂)} f(Q⁰₁₂ - Q₁₂)`.
pub fn heisenberg_apply(r: f64, sign: Sign, x: [f64; 2], q12: f64, f: &RepFunction, q0_12: f64) -> Result<Complex64> {
    let phase = Complex64::from_polar(1.0, sign.value() * r * (x[1] - x[0] * q0_12));
    let arg = CanonicalParams::new(vec![BlockParams::new(1, vec![q0_12 - q12])]);
    Ok(phase * f.eval(&arg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sig(s: &str) -> Signature {
        Signature::parse(s).unwrap()
    }

    fn one_block(v: f64) -> CanonicalParams {
        CanonicalParams::new(vec![BlockParams::new(1, vec![v])])
    }

    fn gaussian() -> RepFunction {
        RepFunction::new(|q| {
            let v = q.flat();
            let s: f64 = v.iter().map(|a| a * a).sum();
            Ok(Complex64::new((-s).exp(), v.iter().sum::<f64>().sin()))
        })
    }

    #[test]
    fn character_examples() {
        assert_eq!(character_eval(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), Complex64::new(1.0, 0.0));
        let c = character_eval(&[1.0, 0.0], &[PI, 7.0]).unwrap();
        assert!((c - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let c = character_eval(&[2.0, 3.0], &[0.5, -1.0]).unwrap();
        assert!((c - Complex64::from_polar(1.0, -2.0)).norm() < 1e-15);
        assert!(character_eval(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn context_validation() {
        assert!(RepContext::new(&sig("1,1"), Family::Positive { r: 1.0 }, Sign::Plus).is_err());
        assert!(RepContext::new(&sig("d,1"), Family::Positive { r: 0.0 }, Sign::Plus).is_err());
        assert!(RepContext::new(&sig("d,1"), Family::Imaginary { rho: 1.0, axis: 1 }, Sign::Plus).is_err());
        let c = RepContext::new(&sig("d,i,1"), Family::Imaginary { rho: 1.0, axis: 1 }, Sign::Minus).unwrap();
        assert_eq!(c.character(), vec![-1.0, 0.0, 0.0]);
        let c = RepContext::new(&sig("d,1"), Family::Positive { r: 2.0 }, Sign::Plus).unwrap();
        assert_eq!(c.families, 1);
        let c = RepContext::new(&sig("d,d"), Family::Positive { r: 2.0 }, Sign::Plus).unwrap();
        assert_eq!(c.families, 2);
    }

    #[test]
    fn identity_acts_trivially() {
        let ctx = RepContext::new(&sig("d,1"), Family::Positive { r: 1.5 }, Sign::Plus).unwrap();
        let f = gaussian();
        let q0 = one_block(0.7);
        let v = omega_apply(&ctx, &ContractedElement::identity(2), &f, &q0).unwrap();
        assert!((v - f.eval(&q0).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn pure_translation_phase() {
        let ctx = RepContext::new(&sig("d,1"), Family::Positive { r: 1.5 }, Sign::Minus).unwrap();
        let f = gaussian();
        let q0 = CanonicalParams::zeros(2, 1);
        let g = ContractedElement::new(vec![0.4, 2.0], CanonicalParams::zeros(2, 1));
        let v = omega_apply(&ctx, &g, &f, &q0).unwrap();
        let expect = Complex64::from_polar(1.0, -1.5 * 2.0) * f.eval(&q0).unwrap();
        assert!((v - expect).norm() < 1e-15);

        let ctx = RepContext::new(&sig("d,i,1"), Family::Imaginary { rho: 0.5, axis: 1 }, Sign::Plus).unwrap();
        let q0 = CanonicalParams::zeros(3, 1);
        let g = ContractedElement::new(vec![1.2, -0.3, 0.8], CanonicalParams::zeros(3, 1));
        let v = sigma_apply(&ctx, &g, &f, &q0).unwrap();
        assert!((v - Complex64::from_polar(1.0, 0.6) * f.eval(&q0).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn heisenberg_examples() {
        let one = RepFunction::new(|_| Ok(Complex64::new(1.0, 0.0)));
        let v = heisenberg_apply(1.0, Sign::Plus, [2.0, 3.0], 0.5, &one, 1.0).unwrap();
        assert!((v - Complex64::from_polar(1.0, 1.0)).norm() < 1e-15);
        let f = gaussian();
        let v = heisenberg_apply(2.0, Sign::Minus, [0.0, 0.0], 0.0, &f, 0.3).unwrap();
        assert_eq!(v, f.eval(&one_block(0.3)).unwrap());

        let ctx = RepContext::new(&sig("d,d"), Family::Positive { r: 1.3 }, Sign::Minus).unwrap();
        let g = ContractedElement::new(vec![0.7, -1.1], one_block(0.45));
        let a = omega_apply(&ctx, &g, &f, &one_block(-0.2)).unwrap();
        let b = heisenberg_apply(1.3, Sign::Minus, [0.7, -1.1], 0.45, &f, -0.2).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn semidirect_product_matches_matrices() {
        let s = sig("i,1");
        let a = ContractedElement::new(vec![0.1, 0.2, -0.3], CanonicalParams::from_flat(3, 1, &[0.3, 0.1, 0.5]).unwrap());
        let b = ContractedElement::new(vec![-0.4, 0.6, 0.2], CanonicalParams::from_flat(3, 1, &[-0.2, 0.4, 1.1]).unwrap());
        let ab = a.product(&s, &b).unwrap();
        let lhs = ab.matrix(&s).unwrap();
        let rhs = a.matrix(&s).unwrap() * b.matrix(&s).unwrap();
        assert!((lhs - rhs).abs().max() < 1e-12);
    }
}
