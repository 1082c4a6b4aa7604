//! One-parameter blocks `s(Q_k)`, the canonical product parameterization,
//! the invariant metric and recovery of canonical coordinates.
//!
//! A group element is written `q = s(Q_0) s(Q_1) ... s(Q_{n-1})` where block
//! `k` is the exponential of `X(Q_k) = Σ_s Q_{ks} X_{ks}`. Each block is
//! evaluated in closed form through the kernels of `u = j_{k+1}² Q_k²`, so
//! null directions (`Q_k² = 0`, `Q_k ≠ 0`) and the hyperbolic region
//! (`Q_k² < 0`) need no special casing.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, CkError, Result};
use crate::scalar::{square_product, vc, vg, vs, Signature};

/// Admission tolerance for `MᵀGM = G` in [`factorize`].
pub const ISOMETRY_TOL: f64 = 1e-9;
/// Below this value of `VS(u)` the column of a block no longer fixes its direction.
pub const VS_DEGENERACY: f64 = 1e-7;

/// Parameters `Q_k = (Q_{k,k+1}, ..., Q_{k,n})` of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub k: usize,
    pub q: Vec<f64>,
}

impl BlockParams {
    pub fn new(k: usize, q: Vec<f64>) -> Self {
        Self { k, q }
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        Self { k, q: vec![0.0; n - k] }
    }

    pub fn negated(&self) -> Self {
        Self {
            k: self.k,
            q: self.q.iter().map(|v| -v).collect(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.k >= n {
            return domain(format!("block index {} must be below n = {n}", self.k));
        }
        if self.q.len() != n - self.k {
            return domain(format!(
                "block {} needs {} parameters, got {}",
                self.k,
                n - self.k,
                self.q.len()
            ));
        }
        if self.q.iter().any(|v| !v.is_finite()) {
            return domain(format!("block {} has non-finite parameters", self.k));
        }
        Ok(())
    }
}

/// Blocks `Q_{start}, ..., Q_{n-1}` of a canonical product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub blocks: Vec<BlockParams>,
}

impl CanonicalParams {
    pub fn new(blocks: Vec<BlockParams>) -> Self {
        Self { blocks }
    }

    /// All-zero parameters for blocks `start..n`.
    pub fn zeros(n: usize, start: usize) -> Self {
        Self {
            blocks: (start..n).map(|k| BlockParams::zeros(n, k)).collect(),
        }
    }

    /// Flattened parameter vector, block by block.
    pub fn flat(&self) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.q.iter().copied()).collect()
    }

    /// Inverse of [`CanonicalParams::flat`] for blocks `start..n`.
    pub fn from_flat(n: usize, start: usize, values: &[f64]) -> Result<Self> {
        let needed: usize = (start..n).map(|k| n - k).sum();
        if values.len() != needed {
            return domain(format!("expected {needed} parameters, got {}", values.len()));
        }
        let mut offset = 0;
        let blocks = (start..n)
            .map(|k| {
                let b = BlockParams::new(k, values[offset..offset + n - k].to_vec());
                offset += n - k;
                b
            })
            .collect();
        Ok(Self { blocks })
    }

    /// Renumber blocks by `k -> k - shift` (used to view a subgroup element
    /// of `SO(n+1; j)` as an element of `SO(n; j')`).
    pub fn shifted_down(&self, shift: usize) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                b.k.checked_sub(shift)
                    .map(|k| BlockParams::new(k, b.q.clone()))
                    .ok_or_else(|| CkError::Domain(format!("block {} cannot be shifted by {shift}", b.k)))
            })
            .collect::<Result<_>>()?;
        Ok(Self { blocks })
    }

    pub fn shifted_up(&self, shift: usize) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockParams::new(b.k + shift, b.q.clone()))
                .collect(),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let mut last = None;
        for b in &self.blocks {
            b.check(n)?;
            if last.is_some_and(|l| b.k <= l) {
                return domain("block indices must be strictly increasing");
            }
            last = Some(b.k);
        }
        Ok(())
    }
}

/// A matrix of `SO(n+1; j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: DMatrix<f64>,
    pub signature: Signature,
}

impl GroupElement {
    pub fn identity(sig: &Signature) -> Self {
        Self {
            matrix: DMatrix::identity(sig.dim(), sig.dim()),
            signature: sig.clone(),
        }
    }

    /// `max |MᵀGM - G|`.
    pub fn isometry_defect(&self) -> f64 {
        isometry_defect(&self.signature, &self.matrix)
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
            signature: self.signature.clone(),
        }
    }

    pub fn factorize(&self, start: usize) -> Result<CanonicalParams> {
        factorize(&self.signature, &self.matrix, start)
    }
}

/// Weights `∏_{l=k+2}^{r} j_l²` for `r = k+1..n` of block `k`.
pub(crate) fn block_weights(squares: &[f64], k: usize) -> Vec<f64> {
    let n = squares.len();
    (k + 1..=n).map(|r| square_product(squares, k + 2, r)).collect()
}

pub(crate) fn weighted_dot(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
}

/// `(a, b)_k = Σ_{r=k+1}^{n} (∏_{l=k+2}^{r} j_l²) a_r b_r`.
pub fn weighted_inner(sig: &Signature, k: usize, a: &[f64], b: &[f64]) -> Result<f64> {
    let n = sig.n();
    if k >= n || a.len() != n - k || b.len() != n - k {
        return domain(format!(
            "weighted inner product on block {k} needs two vectors of length {}",
            n.saturating_sub(k)
        ));
    }
    Ok(weighted_dot(&block_weights(&sig.squares(), k), a, b))
}

/// `Q_k²`; may be negative or zero for nonzero `q`.
pub fn q_squared(sig: &Signature, p: &BlockParams) -> Result<f64> {
    p.check(sig.n())?;
    weighted_inner(sig, p.k, &p.q, &p.q)
}

/// Closed-form block for arbitrary real squares `j_m²` (not restricted to
/// `{1, 0, -1}`); used directly by the contraction-limit checks.
pub fn rotation_block_sq(squares: &[f64], k: usize, q: &[f64]) -> DMatrix<f64> {
    let n = squares.len();
    let w = block_weights(squares, k);
    let sigma = squares[k];
    let u = sigma * weighted_dot(&w, q, q);
    let (c, s, g) = (vc(u), vs(u), vg(u));
    let mut m = DMatrix::identity(n + 1, n + 1);
    m[(k, k)] = c;
    for (i, &qs) in q.iter().enumerate() {
        let row = k + 1 + i;
        m[(row, k)] = qs * s;
        m[(k, row)] = -w[i] * qs * sigma * s;
        for (l, &qr) in q.iter().enumerate() {
            m[(row, k + 1 + l)] -= w[l] * qs * qr * sigma * g;
        }
    }
    m
}

/// Canonical product for arbitrary real squares.
pub fn group_matrix_sq(squares: &[f64], params: &CanonicalParams) -> DMatrix<f64> {
    let dim = squares.len() + 1;
    params
        .blocks
        .iter()
        .fold(DMatrix::identity(dim, dim), |acc, b| acc * rotation_block_sq(squares, b.k, &b.q))
}

/// `s(Q_k) = exp X(Q_k)` in closed form.
pub fn rotation_block(sig: &Signature, p: &BlockParams) -> Result<GroupElement> {
    p.check(sig.n())?;
    Ok(GroupElement {
        matrix: rotation_block_sq(&sig.squares(), p.k, &p.q),
        signature: sig.clone(),
    })
}

/// `q = ∏_k s(Q_k)` in increasing block order.
pub fn group_element(sig: &Signature, params: &CanonicalParams) -> Result<GroupElement> {
    params.check(sig.n())?;
    Ok(GroupElement {
        matrix: group_matrix_sq(&sig.squares(), params),
        signature: sig.clone(),
    })
}

/// `q⁻¹ = ∏_k s(-Q_k)` in decreasing block order.
pub fn inverse(sig: &Signature, params: &CanonicalParams) -> Result<GroupElement> {
    params.check(sig.n())?;
    let squares = sig.squares();
    let dim = sig.dim();
    let matrix = params.blocks.iter().rev().fold(DMatrix::identity(dim, dim), |acc, b| {
        acc * rotation_block_sq(&squares, b.k, &b.negated().q)
    });
    Ok(GroupElement {
        matrix,
        signature: sig.clone(),
    })
}

/// `G = diag(1, j_1², j_1² j_2², ..., ∏ j_m²)`.
pub fn gram(sig: &Signature) -> DMatrix<f64> {
    let squares = sig.squares();
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        sig.dim(),
        (0..=sig.n()).map(|k| square_product(&squares, 1, k)),
    ))
}

pub fn isometry_defect(sig: &Signature, m: &DMatrix<f64>) -> f64 {
    let g = gram(sig);
    (m.transpose() * &g * m - g).abs().max()
}

/// Image of the base point `F_0 = (1, 0, ..., 0)` under `s(Q_0)`.
pub fn act_on_base_point(sig: &Signature, p: &BlockParams) -> Result<Vec<f64>> {
    if p.k != 0 {
        return domain("base-point action needs the k = 0 block");
    }
    p.check(sig.n())?;
    let u = f64::from(sig.square(1)) * q_squared(sig, p)?;
    let s = vs(u);
    let mut out = Vec::with_capacity(sig.dim());
    out.push(vc(u));
    out.extend(p.q.iter().map(|q| q * s));
    Ok(out)
}

/// `x_0² + Σ_k x_k² ∏_{m<=k} j_m²`, equal to 1 on the unit sphere.
pub fn sphere_form(sig: &Signature, x: &[f64]) -> f64 {
    let g = gram(sig);
    x.iter().enumerate().map(|(i, v)| g[(i, i)] * v * v).sum()
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.abs().max()
}

/// Recover `u = j² Q²` of a block from its column `(VC(u), Q_r VS(u))`.
///
/// With `N = j² (col, col)_k`, `N = sin²√u` on the elliptic side and
/// `-sinh²√-u` on the hyperbolic side, so the angle comes from `atan2(√N, c)`
/// or `asinh(√-N)`; this stays accurate near `c = ±1` where `acos` does not.
fn column_to_u(sigma: f64, c: f64, weights: &[f64], col: &[f64], stage: usize, tol: f64) -> Result<f64> {
    if sigma == 0.0 {
        if (c - 1.0).abs() > tol {
            return Err(CkError::Precondition(format!(
                "stage {stage}: parabolic block needs a unit corner entry, found {c}"
            )));
        }
        return Ok(0.0);
    }
    if c < -1.0 - tol {
        return Err(CkError::Precondition(format!("stage {stage}: corner entry {c} below -1")));
    }
    let norm = sigma * weighted_dot(weights, col, col);
    if norm < 0.0 && c > 0.0 {
        let t = (-norm).sqrt().asinh();
        Ok(-t * t)
    } else {
        let t = norm.max(0.0).sqrt().atan2(c);
        Ok(t * t)
    }
}

/// Direction recovery at `VS(u) ≈ 0`, the boundary `Q_k² = ±π²` of the
/// elliptic ball. The column `Q VS(u)` is then tiny and every direction of the
/// right weighted length is a valid coset representative.
fn boundary_direction(weights: &[f64], col: &[f64], target: f64, stage: usize) -> Result<Vec<f64>> {
    let cw = weighted_dot(weights, col, col);
    let col_norm = col.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if col_norm > 1e-13 && cw * target > 0.0 {
        let scale = (target / cw).sqrt();
        return Ok(col.iter().map(|v| v * scale).collect());
    }
    let want = target.signum();
    match weights.iter().position(|&w| w == want) {
        Some(r) => {
            let mut q = vec![0.0; col.len()];
            q[r] = target.abs().sqrt();
            Ok(q)
        }
        None => Err(CkError::Degeneracy {
            stage,
            reason: "no axis of the required weight for a boundary block".into(),
        }),
    }
}

/// Recover canonical coordinates `Q_start, ..., Q_{n-1}` of `m`.
///
/// Blocks are peeled left to right: at stage `k` column `k` of the residual is
/// `(VC(u), Q_{kr} VS(u))`, giving `u` from the corner entry and `Q_k` from
/// the column. For `start > 0` the matrix must act trivially on the first
/// `start` coordinates. Recovered blocks lie in their parameter domains; the
/// last elliptic block is reported in `[0, 2π)`.
pub fn factorize(sig: &Signature, m: &DMatrix<f64>, start: usize) -> Result<CanonicalParams> {
    let n = sig.n();
    let dim = sig.dim();
    if m.nrows() != dim || m.ncols() != dim {
        return domain(format!("expected a {dim}x{dim} matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    if start > n {
        return domain(format!("start block {start} exceeds n = {n}"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return domain("matrix has non-finite entries");
    }
    let scale = max_abs(m).max(1.0);
    let tol = ISOMETRY_TOL * scale * scale;
    let defect = isometry_defect(sig, m);
    if defect > tol {
        return Err(CkError::Precondition(format!(
            "matrix is not an isometry of the metric (defect {defect:.3e})"
        )));
    }
    for i in 0..start {
        for jdx in 0..dim {
            let expect = if i == jdx { 1.0 } else { 0.0 };
            if (m[(i, jdx)] - expect).abs() > tol || (m[(jdx, i)] - expect).abs() > tol {
                return Err(CkError::Precondition(format!(
                    "matrix does not fix coordinate {i} required for start block {start}"
                )));
            }
        }
    }

    let squares = sig.squares();
    let mut residual = m.clone();
    let mut blocks = Vec::with_capacity(n - start);
    for k in start..n {
        let sigma = squares[k];
        let weights = block_weights(&squares, k);
        let c = residual[(k, k)];
        let col: Vec<f64> = (k + 1..dim).map(|r| residual[(r, k)]).collect();
        let u = column_to_u(sigma, c, &weights, &col, k, tol)?;
        let s = vs(u);
        let mut q: Vec<f64> = if s.abs() >= VS_DEGENERACY {
            col.iter().map(|v| v / s).collect()
        } else {
            // sigma is ±1 here, so Q² = sigma * u.
            boundary_direction(&weights, &col, sigma * u, k)?
        };
        if k + 1 == n && sigma > 0.0 && q[0] < 0.0 {
            q[0] += 2.0 * PI;
        }
        let peel = rotation_block_sq(&squares, k, &q.iter().map(|v| -v).collect::<Vec<_>>());
        residual = peel * residual;
        let stray = (k + 1..dim)
            .map(|r| residual[(r, k)].abs().max(residual[(k, r)].abs()))
            .fold((residual[(k, k)] - 1.0).abs(), f64::max);
        if stray > 1e-6 * scale * scale {
            return Err(CkError::Degeneracy {
                stage: k,
                reason: format!("residual does not fix coordinate {k} (off by {stray:.3e})"),
            });
        }
        for r in k..dim {
            residual[(r, k)] = if r == k { 1.0 } else { 0.0 };
            residual[(k, r)] = if r == k { 1.0 } else { 0.0 };
        }
        blocks.push(BlockParams::new(k, q));
    }
    Ok(CanonicalParams { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::algebra_element;

    fn sig(s: &str) -> Signature {
        Signature::parse(s).unwrap()
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn weighted_inner_examples() {
        assert_eq!(weighted_inner(&sig("1,1,1"), 0, &[1.0; 3], &[1.0; 3]).unwrap(), 3.0);
        assert_eq!(weighted_inner(&sig("d,i,1"), 0, &[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(weighted_inner(&sig("1,d,1"), 0, &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert!(weighted_inner(&sig("1,1"), 0, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn q_squared_examples() {
        assert_eq!(q_squared(&sig("1,1"), &BlockParams::zeros(2, 0)).unwrap(), 0.0);
        assert_eq!(q_squared(&sig("d,i,1"), &BlockParams::new(0, vec![1.0, 1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(q_squared(&sig("1,1"), &BlockParams::new(0, vec![3.0, 4.0])).unwrap(), 25.0);
    }

    #[test]
    fn elliptic_and_hyperbolic_single_angle() {
        let th: f64 = 0.83;
        let m = rotation_block(&sig("1,1"), &BlockParams::new(1, vec![th])).unwrap().matrix;
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, th.cos(), -th.sin(), 0.0, th.sin(), th.cos()]);
        assert!(close(&m, &expect, 1e-15));

        let m = rotation_block(&sig("1,i"), &BlockParams::new(1, vec![th])).unwrap().matrix;
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, th.cosh(), th.sinh(), 0.0, th.sinh(), th.cosh()]);
        assert!(close(&m, &expect, 1e-15));
    }

    #[test]
    fn parabolic_block_is_translation() {
        let (a, b) = (1.5, -2.0);
        let m = rotation_block(&sig("d,1"), &BlockParams::new(0, vec![a, b])).unwrap().matrix;
        let expect = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, a, 1.0, 0.0, b, 0.0, 1.0]);
        assert_eq!(m, expect);
    }

    #[test]
    fn heisenberg_is_unit_lower_triangular() {
        let s = sig("d,d");
        let p = CanonicalParams::new(vec![BlockParams::new(0, vec![1.0, 2.0]), BlockParams::new(1, vec![3.0])]);
        let m = group_element(&s, &p).unwrap().matrix;
        for i in 0..3 {
            assert_eq!(m[(i, i)], 1.0);
            for j in i + 1..3 {
                assert_eq!(m[(i, j)], 0.0);
            }
        }
        assert_eq!(m[(2, 1)], 3.0);
    }

    #[test]
    fn inverse_reverses_blocks() {
        let s = sig("1,i");
        let p = CanonicalParams::new(vec![BlockParams::new(0, vec![0.3, 0.4]), BlockParams::new(1, vec![0.9])]);
        let g = group_element(&s, &p).unwrap();
        let gi = inverse(&s, &p).unwrap();
        assert!(close(&(g.matrix * gi.matrix), &DMatrix::identity(3, 3), 1e-12));
        let single = CanonicalParams::new(vec![BlockParams::new(1, vec![0.9])]);
        assert_eq!(
            inverse(&s, &single).unwrap().matrix,
            rotation_block(&s, &BlockParams::new(1, vec![-0.9])).unwrap().matrix
        );
        assert!(close(&inverse(&s, &CanonicalParams::zeros(2, 0)).unwrap().matrix, &DMatrix::identity(3, 3), 0.0));
    }

    #[test]
    fn gram_examples() {
        assert_eq!(gram(&sig("1,1")), DMatrix::identity(3, 3));
        assert_eq!(gram(&sig("i,1")).diagonal().as_slice(), &[1.0, -1.0, -1.0]);
        assert_eq!(gram(&sig("d,i")).diagonal().as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn base_point_examples() {
        let s = sig("1,1");
        assert_eq!(act_on_base_point(&s, &BlockParams::zeros(2, 0)).unwrap(), vec![1.0, 0.0, 0.0]);
        let y = act_on_base_point(&s, &BlockParams::new(0, vec![PI / 2.0, 0.0])).unwrap();
        assert!(y[0].abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15 && y[2] == 0.0);
        let th: f64 = 1.2;
        let y = act_on_base_point(&sig("i,1"), &BlockParams::new(0, vec![th, 0.0])).unwrap();
        assert!((y[0] - th.cosh()).abs() < 1e-14 && (y[1] - th.sinh()).abs() < 1e-14);
        assert!(act_on_base_point(&s, &BlockParams::new(1, vec![0.0])).is_err());
    }

    #[test]
    fn block_matches_series_exponential() {
        let s = sig("1,i,d");
        let q = vec![0.4, -0.7, 1.1];
        let x = algebra_element(&s, 0, &q).unwrap().matrix;
        // Plain truncated series; entries here are O(1).
        let mut term = DMatrix::identity(4, 4);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &x / k as f64;
            sum += &term;
        }
        let m = rotation_block(&s, &BlockParams::new(0, q)).unwrap().matrix;
        assert!(close(&m, &sum, 1e-13));
    }

    #[test]
    fn factorize_identity_and_roundtrip() {
        let s = sig("1,1,1");
        let p = factorize(&s, &DMatrix::identity(4, 4), 0).unwrap();
        assert!(p.flat().iter().all(|v| *v == 0.0));

        let p = CanonicalParams::new(vec![
            BlockParams::new(0, vec![0.5, -1.0, 0.7]),
            BlockParams::new(1, vec![2.0, 0.3]),
            BlockParams::new(2, vec![-2.5]),
        ]);
        let m = group_element(&s, &p).unwrap().matrix;
        let back = factorize(&s, &m, 0).unwrap();
        assert!(close(&group_element(&s, &back).unwrap().matrix, &m, 1e-12));
        // last elliptic block is reported on the circle [0, 2π)
        assert!((back.blocks[2].q[0] - (2.0 * PI - 2.5)).abs() < 1e-12);
    }

    #[test]
    fn factorize_boundary_prefers_plus_pi() {
        let s = sig("1,1");
        let m = rotation_block(&s, &BlockParams::new(1, vec![PI])).unwrap().matrix;
        let back = factorize(&s, &m, 0).unwrap();
        assert!((back.blocks[1].q[0] - PI).abs() < 1e-12);
        let m = rotation_block(&s, &BlockParams::new(0, vec![0.0, -PI])).unwrap().matrix;
        let back = factorize(&s, &m, 0).unwrap();
        assert!(close(&group_element(&s, &back).unwrap().matrix, &m, 1e-8));
    }

    #[test]
    fn factorize_rejects_non_isometry() {
        let s = sig("1,1");
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 0.5;
        assert!(matches!(factorize(&s, &m, 0), Err(CkError::Precondition(_))));
        let m = rotation_block(&s, &BlockParams::new(0, vec![0.3, 0.1])).unwrap().matrix;
        assert!(matches!(factorize(&s, &m, 1), Err(CkError::Precondition(_))));
    }

    #[test]
    fn factorize_subgroup_start() {
        let s = sig("d,1,i");
        let p = CanonicalParams::new(vec![BlockParams::new(1, vec![0.4, 0.9]), BlockParams::new(2, vec![-0.6])]);
        let m = group_element(&s, &p).unwrap().matrix;
        let back = factorize(&s, &m, 1).unwrap();
        assert_eq!(back.blocks[0].k, 1);
        assert!(close(&group_element(&s, &back).unwrap().matrix, &m, 1e-12));
    }
}
