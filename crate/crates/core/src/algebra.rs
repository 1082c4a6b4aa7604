//! Matrix generators of `so(n+1; j)`, their structure constants and the
//! quadratic Casimir element.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{sigma_product, Signature};

/// Index pair `(mu, nu)` of the generator `X_{mu nu}`, `0 <= mu < nu <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorIndex {
    pub mu: usize,
    pub nu: usize,
}

impl GeneratorIndex {
    pub fn new(mu: usize, nu: usize) -> Result<Self> {
        if mu >= nu {
            return domain(format!("generator index requires mu < nu, got ({mu}, {nu})"));
        }
        Ok(Self { mu, nu })
    }

    fn check(self, sig: &Signature) -> Result<()> {
        if self.mu >= self.nu || self.nu > sig.n() {
            return domain(format!(
                "generator index ({}, {}) invalid for n = {}",
                self.mu,
                self.nu,
                sig.n()
            ));
        }
        Ok(())
    }

    /// All indices for a signature, ordered by `(mu, nu)`.
    pub fn all(n: usize) -> Vec<GeneratorIndex> {
        (0..=n)
            .flat_map(|mu| (mu + 1..=n).map(move |nu| GeneratorIndex { mu, nu }))
            .collect()
    }
}

/// An element of `so(n+1; j)` in the defining representation.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub matrix: DMatrix<f64>,
    pub signature: Signature,
}

/// One term `coefficient * X_index` of a commutator expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketTerm {
    pub coefficient: f64,
    pub index: GeneratorIndex,
}

/// `X_{mu nu}`: entry `(nu, mu)` is 1, entry `(mu, nu)` is `-∏_{m=mu+1}^{nu} j_m²`.
pub fn generator(sig: &Signature, idx: GeneratorIndex) -> Result<AlgebraElement> {
    idx.check(sig)?;
    let mut m = DMatrix::zeros(sig.dim(), sig.dim());
    m[(idx.nu, idx.mu)] = 1.0;
    m[(idx.mu, idx.nu)] = -f64::from(sigma_product(sig, idx.mu + 1, idx.nu)?);
    Ok(AlgebraElement {
        matrix: m,
        signature: sig.clone(),
    })
}

/// Structure-constant expansion of `[X_a, X_b]`. Returns `None` when the
/// commutator vanishes identically (unchained or equal index pairs).
pub fn bracket(sig: &Signature, a: GeneratorIndex, b: GeneratorIndex) -> Result<Option<BracketTerm>> {
    a.check(sig)?;
    b.check(sig)?;
    let term = |c: i32, mu: usize, nu: usize| {
        Some(BracketTerm {
            coefficient: f64::from(c),
            index: GeneratorIndex { mu, nu },
        })
    };
    let (m1, n1, m2, n2) = (a.mu, a.nu, b.mu, b.nu);
    let out = if a == b {
        None
    } else if m1 == m2 {
        // [X_{mu a}, X_{mu b}] = (∏_{mu+1}^{a} j²) X_{ab} for a < b.
        if n1 < n2 {
            term(sigma_product(sig, m1 + 1, n1)?, n1, n2)
        } else {
            term(-sigma_product(sig, m1 + 1, n2)?, n2, n1)
        }
    } else if n1 == n2 {
        // [X_{a nu}, X_{b nu}] = (∏_{b+1}^{nu} j²) X_{ab} for a < b.
        if m1 < m2 {
            term(sigma_product(sig, m2 + 1, n2)?, m1, m2)
        } else {
            term(-sigma_product(sig, m1 + 1, n1)?, m2, m1)
        }
    } else if n1 == m2 {
        term(-1, m1, n2)
    } else if n2 == m1 {
        term(1, m2, n1)
    } else {
        None
    };
    Ok(out.filter(|t| t.coefficient != 0.0))
}

/// Matrix of a bracket expansion (zero matrix for the empty combination).
pub fn bracket_matrix(sig: &Signature, term: Option<BracketTerm>) -> Result<DMatrix<f64>> {
    match term {
        None => Ok(DMatrix::zeros(sig.dim(), sig.dim())),
        Some(t) => Ok(generator(sig, t.index)?.matrix * t.coefficient),
    }
}

/// `X(Q_k) = Σ_{s=k+1}^{n} Q_{ks} X_{ks}`.
pub fn algebra_element(sig: &Signature, k: usize, q: &[f64]) -> Result<AlgebraElement> {
    let n = sig.n();
    if k >= n {
        return domain(format!("block index {k} must be below n = {n}"));
    }
    if q.len() != n - k {
        return domain(format!("block {k} needs {} parameters, got {}", n - k, q.len()));
    }
    let mut m = DMatrix::zeros(sig.dim(), sig.dim());
    for (i, &qs) in q.iter().enumerate() {
        let s = k + 1 + i;
        m += generator(sig, GeneratorIndex { mu: k, nu: s })?.matrix * qs;
    }
    Ok(AlgebraElement {
        matrix: m,
        signature: sig.clone(),
    })
}

/// Weight of `X_{mu nu}²` in the Casimir: `(∏_{1}^{mu} j²)(∏_{nu+1}^{n} j²)`.
fn casimir_weight(sig: &Signature, idx: GeneratorIndex) -> f64 {
    let left = sigma_product(sig, 1, idx.mu).unwrap_or(1);
    let right = sigma_product(sig, idx.nu + 1, sig.n()).unwrap_or(1);
    f64::from(left * right)
}

/// The translation part `Σ_r (∏_{m=r+1}^{n} j_m²) X_{0r}²`.
pub fn casimir_translation_sum(sig: &Signature) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(sig.dim(), sig.dim());
    for r in 1..=sig.n() {
        let idx = GeneratorIndex { mu: 0, nu: r };
        let x = generator(sig, idx).expect("valid index").matrix;
        c += &x * &x * casimir_weight(sig, idx);
    }
    c
}

/// The rotation part `Σ_{a1<a2} (∏_{1}^{a1} j²)(∏_{a2+1}^{n} j²) X_{a1 a2}²`.
/// Vanishes identically when `j_1 = ι`.
pub fn casimir_rotation_sum(sig: &Signature) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(sig.dim(), sig.dim());
    for idx in GeneratorIndex::all(sig.n()).into_iter().filter(|i| i.mu >= 1) {
        let w = casimir_weight(sig, idx);
        if w != 0.0 {
            let x = generator(sig, idx).expect("valid index").matrix;
            c += &x * &x * w;
        }
    }
    c
}

/// Second-order Casimir in the defining representation.
pub fn casimir(sig: &Signature) -> DMatrix<f64> {
    casimir_translation_sum(sig) + casimir_rotation_sum(sig)
}

/// `AB - BA`.
pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}
