//! Adjoint and coadjoint actions of `SO(n; j')` on the translations of the
//! contracted group `SO(n+1; ι, j') = N(x) ⋊ SO(n; j')`, the orbit invariant,
//! orbit classification and stabilizers.
//!
//! Functions here take the subgroup signature `j' = (j_2, ..., j_n)`; the
//! translation and character spaces are `R^n`. Subgroup parameters keep the
//! block numbering of the full group, `k = 1, ..., n-1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, CkError, Result};
use crate::group::{rotation_block_sq, BlockParams, CanonicalParams};
use crate::scalar::{compactness, square_product, Branch, Compactness, Signature};

/// Zero-invariant threshold, relative to `max(1, |h|²)`.
const ZERO_INVARIANT_TOL: f64 = 1e-12;

fn check_block(sub: &Signature, p: &BlockParams) -> Result<()> {
    let n = sub.n() + 1;
    if p.k == 0 {
        return domain("translation block k = 0 is not an element of the subgroup");
    }
    if p.k >= n || p.q.len() != n - p.k {
        return domain(format!(
            "subgroup block {} with {} parameters is invalid for n = {n}",
            p.k,
            p.q.len()
        ));
    }
    Ok(())
}

/// `Ad(s(Q_k)) = s̃(Q_k)`: block `k >= 1` with its zero first row and column removed.
pub fn adjoint_block(sub: &Signature, p: &BlockParams) -> Result<DMatrix<f64>> {
    check_block(sub, p)?;
    Ok(rotation_block_sq(&sub.squares(), p.k - 1, &p.q))
}

/// `Ad(t(x)) = I` on the translation subgroup.
pub fn adjoint_translation(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n)
}

/// `Ad(k(Q)) = ∏_k s̃(Q_k)`.
pub fn adjoint(sub: &Signature, params: &CanonicalParams) -> Result<DMatrix<f64>> {
    let n = sub.n() + 1;
    params
        .blocks
        .iter()
        .try_fold(DMatrix::identity(n, n), |acc, b| Ok(acc * adjoint_block(sub, b)?))
}

/// `Ad(k(Q)⁻¹) = ∏_{k=n-1}^{1} s̃(-Q_k)`.
pub fn adjoint_inverse(sub: &Signature, params: &CanonicalParams) -> Result<DMatrix<f64>> {
    let n = sub.n() + 1;
    params
        .blocks
        .iter()
        .rev()
        .try_fold(DMatrix::identity(n, n), |acc, b| Ok(acc * adjoint_block(sub, &b.negated())?))
}

/// `Ad*(s(Q_k)) = [s̃(-Q_k)]ᵀ`.
pub fn coadjoint_block(sub: &Signature, p: &BlockParams) -> Result<DMatrix<f64>> {
    Ok(adjoint_block(sub, &p.negated())?.transpose())
}

/// `Ad*(k(Q)) = ∏_k Ad*(s(Q_k))` in block order.
pub fn coadjoint(sub: &Signature, params: &CanonicalParams) -> Result<DMatrix<f64>> {
    let n = sub.n() + 1;
    params
        .blocks
        .iter()
        .try_fold(DMatrix::identity(n, n), |acc, b| Ok(acc * coadjoint_block(sub, b)?))
}

/// The translation `t(x)` as an `(n+1) x (n+1)` matrix.
pub fn translation_matrix(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut m = DMatrix::identity(n + 1, n + 1);
    for (i, v) in x.iter().enumerate() {
        m[(i + 1, 0)] = *v;
    }
    m
}

/// `k(Q)` embedded in `SO(n+1; ι, j')` as `diag(1, Ad(k))`.
pub fn subgroup_matrix(sub: &Signature, params: &CanonicalParams) -> Result<DMatrix<f64>> {
    let n = sub.n() + 1;
    let mut m = DMatrix::identity(n + 1, n + 1);
    m.view_mut((1, 1), (n, n)).copy_from(&adjoint(sub, params)?);
    Ok(m)
}

/// Weights `∏_{m=r+1}^{n} j_m²` of `h_r²` in the orbit invariant, `r = 1..n`.
pub fn invariant_weights(sub: &Signature) -> Vec<f64> {
    let sq = sub.squares();
    let n = sub.n() + 1;
    // j_m = sub[m-1] (1-based), so ∏_{m=r+1}^{n} j_m² covers sub indices r..=n-1.
    (1..=n).map(|r| square_product(&sq, r, n - 1)).collect()
}

/// `Σ_{r=1}^{n-1} (∏_{m=r+1}^{n} j_m²) h_r² + h_n²`.
pub fn orbit_invariant(sub: &Signature, h: &[f64]) -> Result<f64> {
    let n = sub.n() + 1;
    if h.len() != n {
        return domain(format!("character needs {n} components, got {}", h.len()));
    }
    Ok(invariant_weights(sub).iter().zip(h).map(|(w, v)| w * v * v).sum())
}

/// Euclidean pairing `⟨h, x⟩`.
pub fn pairing(h: &[f64], x: &[f64]) -> f64 {
    h.iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn apply(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    Point,
    LowerDimensional,
    Cone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "radius_kind", rename_all = "snake_case")]
pub enum RadiusKind {
    /// Invariant `R² > 0`.
    Positive { r: f64 },
    /// Invariant `-ρ² < 0`; `axis` is the 1-based index `m` of `P_m`.
    Imaginary { rho: f64, axis: usize },
    /// Invariant zero; `subspace_dim` is set for lower-dimensional orbits.
    Zero {
        degeneracy: Degeneracy,
        subspace_dim: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizerKind {
    /// `SO(n-1; j_2, ..., j_{n-1})`, fixing the axis `h_n`.
    FixAxisN,
    /// `SO^m(n-1; j')`, fixing the axis `h_m`.
    FixAxisM,
}

/// Which subgroup blocks generate the stabilizer and which of their
/// components are pinned to zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerDescriptor {
    pub kind: StabilizerKind,
    /// 1-based axis fixed by the stabilizer.
    pub axis: usize,
    /// Blocks `k` that take part; absent blocks are the identity.
    pub blocks: Vec<usize>,
    /// `(k, r)`: component `Q_{kr}` is pinned to zero.
    pub pinned: Vec<(usize, usize)>,
}

impl StabilizerDescriptor {
    /// Build a stabilizer element, drawing each free component from `next`.
    pub fn element(&self, n: usize, mut next: impl FnMut() -> f64) -> CanonicalParams {
        let blocks = (1..n)
            .map(|k| {
                let q = (k + 1..=n)
                    .map(|r| {
                        if !self.blocks.contains(&k) || self.pinned.contains(&(k, r)) {
                            0.0
                        } else {
                            next()
                        }
                    })
                    .collect();
                BlockParams::new(k, q)
            })
            .collect();
        CanonicalParams::new(blocks)
    }
}

/// Classification of the coadjoint orbit through a character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitClass {
    #[serde(flatten)]
    pub radius_kind: RadiusKind,
    /// Value of the orbit invariant.
    pub value: f64,
    /// Number of orbit families from the connectedness rule (1 or 2).
    pub families: u8,
    /// Family count from the classical pattern enumeration of `j'` for
    /// positive and imaginary radius; `None` for zero radius.
    pub families_literal: Option<u8>,
    /// Set when the rule and the literal enumeration disagree.
    pub discrepancy: bool,
    /// Family of the classified character (`M^±`, `P^±_m`).
    pub sign: Sign,
    pub representative: Vec<f64>,
    pub stabilizer: Option<StabilizerDescriptor>,
    pub notes: Vec<String>,
}

// Last index p (1-based in sub) with j_{p+1} not elliptic.
fn last_non_elliptic(sub: &Signature) -> Option<(usize, Branch)> {
    (1..=sub.n())
        .rev()
        .map(|p| (p, sub.branch(p)))
        .find(|(_, b)| *b != Branch::Elliptic)
}

fn any_compact(sub: &Signature, ranges: impl Iterator<Item = (usize, usize)>) -> bool {
    ranges
        .into_iter()
        .any(|(a, b)| compactness(sub, a, b).map(|c| c == Compactness::Compact).unwrap_or(false))
}

/// Families of positive-radius orbits: one iff some `Y_{rn}` (scaled by
/// `∏_{m=r+1}^{n} j_m`) is compact.
pub fn positive_families(sub: &Signature) -> u8 {
    let n = sub.n() + 1;
    // ∏_{m=r+1}^{n} j_m covers sub indices r..=n-1.
    if any_compact(sub, (1..n).map(|r| (r, n - 1))) {
        1
    } else {
        2
    }
}

/// Families of imaginary-radius orbits at axis `m`: one iff some `Y_{rm}`,
/// `r < m`, scaled by `∏_{l=r+1}^{m} j_l`, is compact.
pub fn imaginary_families(sub: &Signature, m: usize) -> u8 {
    if any_compact(sub, (1..m).map(|r| (r, m - 1))) {
        1
    } else {
        2
    }
}

/// Literal reading of the positive-radius enumeration: one family exactly for
/// `j' = (..., j_{k+1} = i, 1, ..., 1, j_n = i)`, `1 <= k <= n-2`.
pub fn positive_families_literal(sub: &Signature) -> u8 {
    let len = sub.n();
    let last_is_i = sub.branch(len) == Branch::Hyperbolic;
    let earlier = (1..len).rev().map(|p| sub.branch(p)).find(|b| *b != Branch::Elliptic);
    if last_is_i && earlier == Some(Branch::Hyperbolic) {
        1
    } else {
        2
    }
}

/// Literal reading of the imaginary-radius enumeration at axis `m`.
pub fn imaginary_families_literal(sub: &Signature, m: usize) -> u8 {
    let j = |idx: usize| sub.branch(idx - 1); // j_idx for idx >= 2
    let n = sub.n() + 1;
    let tail_ok = m < n && j(m + 1) == Branch::Hyperbolic && (m + 2..=n).all(|l| j(l) == Branch::Elliptic);
    if !tail_ok || m < 2 {
        return 2;
    }
    // j_m = 1, j_{m+1} = i, trailing ones; m = 2..n-1.
    if j(m) == Branch::Elliptic {
        return 1;
    }
    // j_{r+1} = i, ones, j_m = i, j_{m+1} = i, trailing ones; r = 1..m-2.
    if m >= 3 && j(m) == Branch::Hyperbolic {
        let before = (2..m).rev().map(j).find(|b| *b != Branch::Elliptic);
        if before == Some(Branch::Hyperbolic) {
            return 1;
        }
    }
    2
}

fn unit(n: usize, axis: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[axis - 1] = scale;
    v
}

/// Classify the orbit of `h` under `Ad*(SO(n; j'))`.
pub fn classify_orbit(sub: &Signature, h: &[f64]) -> Result<OrbitClass> {
    let n = sub.n() + 1;
    let inv = orbit_invariant(sub, h)?;
    if h.iter().any(|v| !v.is_finite()) {
        return domain("character has non-finite components");
    }
    let scale = h.iter().fold(1.0f64, |a, v| a.max(v * v));
    let mut notes = Vec::new();

    if inv > ZERO_INVARIANT_TOL * scale {
        let r = inv.sqrt();
        let families = positive_families(sub);
        let literal = positive_families_literal(sub);
        let sign = if families == 2 { Sign::of(h[n - 1]) } else { Sign::Plus };
        if families != literal {
            notes.push(format!(
                "connectedness rule gives {families} famil{} but the literal enumeration gives {literal}",
                if families == 1 { "y" } else { "ies" }
            ));
        }
        let kind = RadiusKind::Positive { r };
        let mut cls = OrbitClass {
            radius_kind: kind,
            value: inv,
            families,
            families_literal: Some(literal),
            discrepancy: families != literal,
            sign,
            representative: unit(n, n, sign.value() * r),
            stabilizer: None,
            notes,
        };
        cls.stabilizer = Some(stabilizer(sub, &cls)?);
        return Ok(cls);
    }

    if inv < -ZERO_INVARIANT_TOL * scale {
        let rho = (-inv).sqrt();
        let m = match last_non_elliptic(sub) {
            Some((p, Branch::Hyperbolic)) => p,
            _ => {
                // Unreachable for {1, ι, i} signatures: a negative invariant
                // needs the last non-elliptic parameter to be imaginary.
                let w = invariant_weights(sub);
                let (idx, _) = w
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("nonempty weights");
                notes.push("no axis with trailing unit weights; using the most negative weight".into());
                idx + 1
            }
        };
        let families = imaginary_families(sub, m);
        let literal = imaginary_families_literal(sub, m);
        let sign = if families == 2 { Sign::of(h[m - 1]) } else { Sign::Plus };
        if families != literal {
            notes.push(format!(
                "connectedness rule gives {families} families at axis {m} but the literal enumeration gives {literal}"
            ));
        }
        let mut cls = OrbitClass {
            radius_kind: RadiusKind::Imaginary { rho, axis: m },
            value: inv,
            families,
            families_literal: Some(literal),
            discrepancy: families != literal,
            sign,
            representative: unit(n, m, sign.value() * rho),
            stabilizer: None,
            notes,
        };
        cls.stabilizer = Some(stabilizer(sub, &cls)?);
        return Ok(cls);
    }

    let is_zero = h.iter().all(|v| v.abs() <= 1e-12);
    let (degeneracy, subspace_dim, representative) = if is_zero {
        (Degeneracy::Point, None, vec![0.0; n])
    } else {
        match last_non_elliptic(sub) {
            Some((p, Branch::Parabolic)) => (Degeneracy::LowerDimensional, Some(p), h.to_vec()),
            Some((p, _)) => {
                let mut o = unit(n, p, 1.0);
                o[n - 1] = 1.0;
                (Degeneracy::Cone, None, o)
            }
            None => {
                notes.push("zero invariant with nonzero character on a positive-definite form".into());
                (Degeneracy::Point, None, vec![0.0; n])
            }
        }
    };
    Ok(OrbitClass {
        radius_kind: RadiusKind::Zero {
            degeneracy,
            subspace_dim,
        },
        value: inv,
        families: 1,
        families_literal: None,
        discrepancy: false,
        sign: Sign::Plus,
        representative,
        stabilizer: None,
        notes,
    })
}

/// Stabilizer of the representative of a nonzero-radius orbit.
pub fn stabilizer(sub: &Signature, cls: &OrbitClass) -> Result<StabilizerDescriptor> {
    let n = sub.n() + 1;
    match cls.radius_kind {
        RadiusKind::Positive { .. } => Ok(StabilizerDescriptor {
            kind: StabilizerKind::FixAxisN,
            axis: n,
            blocks: (1..n.saturating_sub(1)).collect(),
            pinned: (1..n.saturating_sub(1)).map(|k| (k, n)).collect(),
        }),
        RadiusKind::Imaginary { axis: m, .. } => Ok(StabilizerDescriptor {
            kind: StabilizerKind::FixAxisM,
            axis: m,
            blocks: (1..m).chain(m + 1..n).collect(),
            pinned: (1..m).map(|k| (k, m)).collect(),
        }),
        RadiusKind::Zero { .. } => Err(CkError::Unsupported(
            "stabilizers of zero-radius orbits are not constructed".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn sig(s: &str) -> Signature {
        Signature::parse(s).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(adjoint_translation(3), DMatrix::identity(3, 3));
        let th: f64 = 0.4;
        let a = adjoint_block(&sig("1"), &BlockParams::new(1, vec![th])).unwrap();
        let r = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!((a - r).abs().max() < 1e-15);
        assert!(adjoint_block(&sig("1"), &BlockParams::new(0, vec![th, 0.0])).is_err());
    }

    #[test]
    fn coadjoint_examples() {
        let s = sig("1");
        assert_eq!(coadjoint_block(&s, &BlockParams::new(1, vec![0.0])).unwrap(), DMatrix::identity(2, 2));
        let c = coadjoint_block(&s, &BlockParams::new(1, vec![FRAC_PI_2])).unwrap();
        let a = adjoint_block(&s, &BlockParams::new(1, vec![FRAC_PI_2])).unwrap();
        assert!((c - a).abs().max() < 1e-15);
        assert_eq!(coadjoint(&s, &CanonicalParams::new(vec![])).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn invariant_examples() {
        assert_eq!(orbit_invariant(&sig("1"), &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(orbit_invariant(&sig("i,1"), &[1.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(orbit_invariant(&sig("d,1"), &[5.0, 0.0, 1.0]).unwrap(), 1.0);
        assert!(orbit_invariant(&sig("1"), &[1.0]).is_err());
    }

    #[test]
    fn classification_examples() {
        let c = classify_orbit(&sig("1,1"), &[0.3, -2.0, 1.0]).unwrap();
        assert!(matches!(c.radius_kind, RadiusKind::Positive { .. }));
        assert_eq!(c.families, 1);
        assert!(c.discrepancy);

        let c = classify_orbit(&sig("1"), &[0.0, 0.0]).unwrap();
        assert_eq!(
            c.radius_kind,
            RadiusKind::Zero {
                degeneracy: Degeneracy::Point,
                subspace_dim: None
            }
        );

        let c = classify_orbit(&sig("i,1,i"), &[0.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(c.families, 1);
        assert!(!c.discrepancy);

        let c = classify_orbit(&sig("i,1"), &[2.0, 0.5, 0.0]).unwrap();
        assert_eq!(c.radius_kind, RadiusKind::Imaginary { rho: (4.0f64 - 0.25).sqrt(), axis: 1 });
        assert_eq!(c.families, 2);
        assert_eq!(c.sign, Sign::Plus);

        let c = classify_orbit(&sig("d"), &[0.0, -1.5]).unwrap();
        assert_eq!(c.families, 2);
        assert_eq!(c.representative, vec![0.0, -1.5]);
    }

    #[test]
    fn zero_radius_kinds() {
        let c = classify_orbit(&sig("d,1"), &[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            c.radius_kind,
            RadiusKind::Zero {
                degeneracy: Degeneracy::LowerDimensional,
                subspace_dim: Some(1)
            }
        );
        let c = classify_orbit(&sig("i,1"), &[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(c.radius_kind, RadiusKind::Zero { degeneracy: Degeneracy::Cone, .. }));
        assert_eq!(c.representative, vec![1.0, 0.0, 1.0]);
        assert!(matches!(stabilizer(&sig("i,1"), &c), Err(CkError::Unsupported(_))));
    }

    #[test]
    fn stabilizer_shapes() {
        let s = sig("1,1,1");
        let c = classify_orbit(&s, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let st = c.stabilizer.unwrap();
        assert_eq!(st.kind, StabilizerKind::FixAxisN);
        assert_eq!(st.pinned, vec![(1, 4), (2, 4)]);
        assert_eq!(st.blocks, vec![1, 2]);

        let s = sig("1,i,1");
        let c = classify_orbit(&s, &[0.0, 3.0, 0.0, 0.0]).unwrap();
        let st = c.stabilizer.unwrap();
        assert_eq!(st.kind, StabilizerKind::FixAxisM);
        assert_eq!(st.axis, 2);
        assert_eq!(st.blocks, vec![1, 3]);
        assert_eq!(st.pinned, vec![(1, 2)]);
    }
}
