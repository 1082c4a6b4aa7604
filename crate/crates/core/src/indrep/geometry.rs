//! Transport of a translation vector through `Ad(k⁻¹(Q))`.
//!
//! The coefficients are stored rescaled so that no bare `Q_k = √(Q_k²)`
//! appears: with `u_k = j_{k+1}² Q_k²` and `⟨·,·⟩` the block-`k` weighted inner
//! product,
//!
//! ```text
//! X̃_k    = x_k VS(u_k) + j_{k+1}² ⟨Q_k, x⟩ VG(u_k)
//! Ỹ_k    = x_k VC(u_k) + j_{k+1}² ⟨Q_k, x⟩ VS(u_k)
//! Ã_{pk} = Q_{pk} VS(u_k) + j_{k+1}² ⟨Q_k, Q_p⟩ VG(u_k)     (p < k)
//! B̃_{pk} = Q_{pk} VC(u_k) + j_{k+1}² ⟨Q_k, Q_p⟩ VS(u_k)     (p < k)
//! ```
//!
//! Null blocks (`Q_k² = 0`, `Q_k ≠ 0`) are therefore regular.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::group::{block_weights, weighted_dot, CanonicalParams};
use crate::orbits::adjoint_inverse;
use crate::scalar::{vc, vg, vs, Signature};

/// Rescaled transport coefficients for one `(Q, x)` pair.
///
/// Vectors are indexed by block, `xt[b]` belonging to block `k = b + 1`.
/// `at[(p, k)]` and `bt[(p, k)]` are filled for `p < k` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryCoeffs {
    pub xt: Vec<f64>,
    pub yt: Vec<f64>,
    pub at: Vec<Vec<f64>>,
    pub bt: Vec<Vec<f64>>,
    pub u: Vec<f64>,
}

/// Block-local view of the subgroup parameters: block `b` has corner `b` and
/// components on coordinates `b+1..n`.
struct Blocks {
    n: usize,
    squares: Vec<f64>,
    q: Vec<Vec<f64>>,
}

impl Blocks {
    fn new(squares: &[f64], params: &CanonicalParams) -> Result<Self> {
        let n = squares.len() + 1;
        let mut q = vec![Vec::new(); n - 1];
        let mut seen = vec![false; n - 1];
        for b in &params.blocks {
            if b.k == 0 || b.k >= n || b.q.len() != n - b.k || seen[b.k - 1] {
                return domain(format!("invalid subgroup block {} for n = {n}", b.k));
            }
            seen[b.k - 1] = true;
            q[b.k - 1] = b.q.clone();
        }
        for (b, v) in q.iter_mut().enumerate() {
            if v.is_empty() {
                *v = vec![0.0; n - 1 - b];
            }
        }
        Ok(Self {
            n,
            squares: squares.to_vec(),
            q,
        })
    }

    /// Component `Q_{b, r}` with `r` a 0-based coordinate, `r > b`.
    fn comp(&self, b: usize, r: usize) -> f64 {
        self.q[b][r - b - 1]
    }

    /// `⟨Q_b, v⟩` with `v` a full length-`n` vector (only coordinates `> b` enter).
    fn inner(&self, b: usize, v: &[f64]) -> f64 {
        weighted_dot(&block_weights(&self.squares, b), &self.q[b], &v[b + 1..])
    }

    /// `Q_s` padded to a full length-`n` vector.
    fn padded(&self, s: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        v[s + 1..].copy_from_slice(&self.q[s]);
        v
    }
}

fn check_x(squares: &[f64], x: &[f64]) -> Result<()> {
    let n = squares.len() + 1;
    if x.len() != n {
        return domain(format!("translation vector needs {n} components, got {}", x.len()));
    }
    Ok(())
}

/// Rescaled coefficients `X̃, Ỹ, Ã, B̃, u` for subgroup parameters `params`
/// (blocks `k = 1..n-1`) and translation `x`.
pub fn geometry(sub: &Signature, params: &CanonicalParams, x: &[f64]) -> Result<GeometryCoeffs> {
    geometry_sq(&sub.squares(), params, x)
}

/// [`geometry`] for arbitrary real squares `j_m²`.
pub fn geometry_sq(squares: &[f64], params: &CanonicalParams, x: &[f64]) -> Result<GeometryCoeffs> {
    check_x(squares, x)?;
    let bl = Blocks::new(squares, params)?;
    let m = bl.n - 1;
    let mut out = GeometryCoeffs {
        xt: vec![0.0; m],
        yt: vec![0.0; m],
        at: vec![vec![0.0; m]; m],
        bt: vec![vec![0.0; m]; m],
        u: vec![0.0; m],
    };
    for k in 0..m {
        let sigma = bl.squares[k];
        let u = sigma * bl.inner(k, &bl.padded(k));
        let (c, s, g) = (vc(u), vs(u), vg(u));
        let qx = bl.inner(k, x);
        out.u[k] = u;
        out.xt[k] = x[k] * s + sigma * qx * g;
        out.yt[k] = x[k] * c + sigma * qx * s;
        for p in 0..k {
            let qq = bl.inner(k, &bl.padded(p));
            let qpk = bl.comp(p, k);
            out.at[p][k] = qpk * s + sigma * qq * g;
            out.bt[p][k] = qpk * c + sigma * qq * s;
        }
    }
    Ok(out)
}

/// `D̃_p = X̃_p - Σ_{s<p} D̃_s Ã_{sp}` by forward substitution.
pub fn dcoeffs(sub: &Signature, params: &CanonicalParams, x: &[f64]) -> Result<Vec<f64>> {
    Ok(dcoeffs_from(&geometry(sub, params, x)?))
}

pub fn dcoeffs_from(g: &GeometryCoeffs) -> Vec<f64> {
    let m = g.xt.len();
    let mut d = vec![0.0; m];
    for p in 0..m {
        d[p] = g.xt[p] - (0..p).map(|s| d[s] * g.at[s][p]).sum::<f64>();
    }
    d
}

/// Cofactor (Laplace) expansion along the first row.
fn laplace_det(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    match n {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => (0..n)
            .filter(|&c| m[(0, c)] != 0.0)
            .map(|c| {
                let minor = m.clone().remove_row(0).remove_column(c);
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[(0, c)] * laplace_det(&minor)
            })
            .sum(),
    }
}

/// `D̃_p` (1-based `p`) as the Cramer determinant: unit lower-triangular
/// `Ã` columns with the `X̃` vector in the last column.
pub fn dcoeffs_det(sub: &Signature, params: &CanonicalParams, x: &[f64], p: usize) -> Result<f64> {
    let g = geometry(sub, params, x)?;
    let m = g.xt.len();
    if p == 0 || p > m {
        return domain(format!("coefficient index {p} outside 1..={m}"));
    }
    let mut a = DMatrix::zeros(p, p);
    for r in 0..p {
        for s in 0..p - 1 {
            a[(r, s)] = match r.cmp(&s) {
                std::cmp::Ordering::Equal => 1.0,
                std::cmp::Ordering::Greater => g.at[s][r],
                std::cmp::Ordering::Less => 0.0,
            };
        }
        a[(r, p - 1)] = g.xt[r];
    }
    Ok(laplace_det(&a))
}

/// `x^(n-1) = Ad(k⁻¹(Q)) x` from the rescaled coefficients:
/// `x_r = Ỹ_r - Σ_{p<r} D̃_p B̃_{pr}` for `r <= n-1` and
/// `x_n - Σ_p D̃_p Q_{pn}` for the last coordinate.
pub fn transported(sub: &Signature, params: &CanonicalParams, x: &[f64]) -> Result<Vec<f64>> {
    transported_sq(&sub.squares(), params, x)
}

/// [`transported`] for arbitrary real squares `j_m²`.
pub fn transported_sq(squares: &[f64], params: &CanonicalParams, x: &[f64]) -> Result<Vec<f64>> {
    let g = geometry_sq(squares, params, x)?;
    let bl = Blocks::new(squares, params)?;
    let d = dcoeffs_from(&g);
    let m = g.xt.len();
    let mut out = Vec::with_capacity(m + 1);
    for r in 0..m {
        out.push(g.yt[r] - (0..r).map(|p| d[p] * g.bt[p][r]).sum::<f64>());
    }
    out.push(x[m] - (0..m).map(|p| d[p] * bl.comp(p, m)).sum::<f64>());
    Ok(out)
}

/// Intermediate vector `x^(k) = ∏_{r=k}^{1} Ad(s(-Q_r)) x` from the
/// coefficients: the first `k` coordinates are final, the rest are
/// `x_r - Σ_{p<=k} D̃_p Q_{pr}`.
pub fn transported_partial(sub: &Signature, params: &CanonicalParams, x: &[f64], k: usize) -> Result<Vec<f64>> {
    let g = geometry(sub, params, x)?;
    let bl = Blocks::new(&sub.squares(), params)?;
    let m = g.xt.len();
    if k > m {
        return domain(format!("stage {k} exceeds {m}"));
    }
    let d = dcoeffs_from(&g);
    let mut out = Vec::with_capacity(m + 1);
    for r in 0..k {
        out.push(g.yt[r] - (0..r).map(|p| d[p] * g.bt[p][r]).sum::<f64>());
    }
    for (r, xr) in x.iter().enumerate().take(m + 1).skip(k) {
        out.push(xr - (0..k).map(|p| d[p] * bl.comp(p, r)).sum::<f64>());
    }
    Ok(out)
}

/// Oracle: `Ad(k⁻¹(Q)) x` by explicit matrix products.
pub fn transported_matrix(sub: &Signature, params: &CanonicalParams, x: &[f64]) -> Result<Vec<f64>> {
    check_x(&sub.squares(), x)?;
    Ok(crate::orbits::apply(&adjoint_inverse(sub, params)?, x))
}
