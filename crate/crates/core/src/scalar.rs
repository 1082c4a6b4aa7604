//! Branch labels, signatures and the branch-uniform trigonometric kernels.
//!
//! Every trigonometric expression in the group formulas depends on a branch
//! parameter `j` only through `u = j² Q²`. The three entire functions
//!
//! ```text
//! VC(u) = cos √u,   VS(u) = sin √u / √u,   VG(u) = (1 - cos √u) / u
//! ```
//!
//! cover the elliptic (`u > 0`), parabolic (`u = 0`) and hyperbolic (`u < 0`)
//! cases with a single real formula, so no imaginary or nilpotent scalar is
//! ever materialized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, CkError, Result};

/// Below this magnitude the kernels switch to their Taylor polynomials.
const TAYLOR_CUTOFF: f64 = 1e-4;

/// Degree of the Taylor polynomials in `u`.
const TAYLOR_DEGREE: usize = 8;

/// One Cayley-Klein parameter `j_m`, stored through its square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `j = 1`, `j² = +1`.
    Elliptic,
    /// `j = ι` (dual unit), `j² = 0`.
    Parabolic,
    /// `j = i`, `j² = -1`.
    Hyperbolic,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Elliptic, Branch::Parabolic, Branch::Hyperbolic];

    /// The value of `j²`.
    pub fn square(self) -> i32 {
        match self {
            Branch::Elliptic => 1,
            Branch::Parabolic => 0,
            Branch::Hyperbolic => -1,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Branch::Elliptic => "1",
            Branch::Parabolic => "d",
            Branch::Hyperbolic => "i",
        }
    }
}

impl FromStr for Branch {
    type Err = CkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Branch::Elliptic),
            "d" => Ok(Branch::Parabolic),
            "i" => Ok(Branch::Hyperbolic),
            other => Err(CkError::Parse {
                token: other.to_string(),
            }),
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// The ordered parameters `(j_1, ..., j_n)` selecting the group `SO(n+1; j)`.
///
/// Indices in the public API are 1-based to match the usual `j_1 ... j_n`
/// numbering; [`Signature::branch`] and [`Signature::square`] take that index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    branches: Vec<Branch>,
}

impl Signature {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return domain("signature must contain at least one branch");
        }
        Ok(Self { branches })
    }

    /// Parse the comma-separated token format, e.g. `"d,1,i"`.
    pub fn parse(text: &str) -> Result<Self> {
        let branches = text
            .split(',')
            .map(Branch::from_str)
            .collect::<Result<Vec<_>>>()?;
        Self::new(branches)
    }

    /// All `3^n` signatures of length `n`, in lexicographic order of
    /// (elliptic, parabolic, hyperbolic).
    pub fn enumerate(n: usize) -> Vec<Signature> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<Branch>| {
                    Branch::ALL.iter().map(move |&b| {
                        let mut v = prefix.clone();
                        v.push(b);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(|branches| Signature { branches }).collect()
    }

    /// Number of parameters `n`; matrices of the group are `(n+1) x (n+1)`.
    pub fn n(&self) -> usize {
        self.branches.len()
    }

    pub fn dim(&self) -> usize {
        self.n() + 1
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// `j_m` for `1 <= m <= n`.
    pub fn branch(&self, m: usize) -> Branch {
        self.branches[m - 1]
    }

    /// `j_m²` for `1 <= m <= n`.
    pub fn square(&self, m: usize) -> i32 {
        self.branch(m).square()
    }

    /// The squares as floating point values, indexed from 0 (`out[m-1] = j_m²`).
    pub fn squares(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.square() as f64).collect()
    }

    /// The tail signature `j^(k) = (j_{k+1}, ..., j_n)`.
    pub fn sub(&self, k: usize) -> Result<Signature> {
        if k >= self.n() {
            return domain(format!("cannot drop {k} branches from a signature of length {}", self.n()));
        }
        Ok(Signature {
            branches: self.branches[k..].to_vec(),
        })
    }

    /// The signature `(b, j_1, ..., j_n)`.
    pub fn prepend(&self, b: Branch) -> Signature {
        let mut branches = Vec::with_capacity(self.n() + 1);
        branches.push(b);
        branches.extend_from_slice(&self.branches);
        Signature { branches }
    }

    pub fn all_elliptic(&self) -> bool {
        self.branches.iter().all(|&b| b == Branch::Elliptic)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tokens: Vec<&str> = self.branches.iter().map(|b| b.token()).collect();
        f.write_str(&tokens.join(","))
    }
}

impl FromStr for Signature {
    type Err = CkError;

    fn from_str(s: &str) -> Result<Self> {
        Signature::parse(s)
    }
}

/// Kind of a generator scaled by `∏ j_m` (not squared).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compactness {
    Compact,
    Parabolic,
    Hyperbolic,
}

// Horner evaluation of Σ_{k=0}^{TAYLOR_DEGREE} (-u)^k / (2k + offset)!.
fn taylor(u: f64, offset: u32) -> f64 {
    let mut coeffs = [0.0; TAYLOR_DEGREE + 1];
    let mut fact = (1..=offset).map(f64::from).product::<f64>();
    for (k, c) in coeffs.iter_mut().enumerate() {
        if k > 0 {
            let a = (2 * k as u32 + offset - 1) as f64;
            let b = (2 * k as u32 + offset) as f64;
            fact *= a * b;
        }
        *c = if k % 2 == 0 { 1.0 } else { -1.0 } / fact;
    }
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// `cos √u` (entire in `u`; `cosh √-u` for `u < 0`). Unchecked.
pub fn vc(u: f64) -> f64 {
    if u.abs() < TAYLOR_CUTOFF {
        taylor(u, 0)
    } else if u > 0.0 {
        u.sqrt().cos()
    } else {
        (-u).sqrt().cosh()
    }
}

/// `sin √u / √u` (`sinh √-u / √-u` for `u < 0`). Unchecked.
pub fn vs(u: f64) -> f64 {
    if u.abs() < TAYLOR_CUTOFF {
        taylor(u, 1)
    } else if u > 0.0 {
        let s = u.sqrt();
        s.sin() / s
    } else {
        let s = (-u).sqrt();
        s.sinh() / s
    }
}

/// `(1 - cos √u) / u`. Unchecked.
pub fn vg(u: f64) -> f64 {
    if u.abs() < TAYLOR_CUTOFF {
        taylor(u, 2)
    } else {
        // 1 - cos s = 2 sin²(s/2) avoids the cancellation of the direct form.
        let h = vs(u / 4.0);
        0.5 * h * h
    }
}

fn finite(u: f64) -> Result<f64> {
    if u.is_finite() {
        Ok(u)
    } else {
        domain(format!("kernel argument must be finite, got {u}"))
    }
}

/// Checked [`vc`].
pub fn kernel_vc(u: f64) -> Result<f64> {
    finite(u).map(vc)
}

/// Checked [`vs`].
pub fn kernel_vs(u: f64) -> Result<f64> {
    finite(u).map(vs)
}

/// Checked [`vg`].
pub fn kernel_vg(u: f64) -> Result<f64> {
    finite(u).map(vg)
}

fn check_range(sig: &Signature, a: usize, b: usize) -> Result<bool> {
    if b < a {
        return Ok(false);
    }
    if a < 1 || b > sig.n() {
        return domain(format!("index range {a}..={b} outside 1..={}", sig.n()));
    }
    Ok(true)
}

/// `∏_{m=a}^{b} j_m²`; the empty product (`b < a`) is `+1`.
pub fn sigma_product(sig: &Signature, a: usize, b: usize) -> Result<i32> {
    if !check_range(sig, a, b)? {
        return Ok(1);
    }
    Ok((a..=b).map(|m| sig.square(m)).product())
}

/// Classifies `∏_{m=a}^{b} j_m`: parabolic if any factor is `ι`, otherwise
/// compact for an even number of `i` factors and hyperbolic for an odd one.
pub fn compactness(sig: &Signature, a: usize, b: usize) -> Result<Compactness> {
    if !check_range(sig, a, b)? {
        return Ok(Compactness::Compact);
    }
    let range = &sig.branches()[a - 1..b];
    if range.contains(&Branch::Parabolic) {
        return Ok(Compactness::Parabolic);
    }
    let imaginary = range.iter().filter(|&&b| b == Branch::Hyperbolic).count();
    Ok(if imaginary % 2 == 0 {
        Compactness::Compact
    } else {
        Compactness::Hyperbolic
    })
}

/// Product of real squares `∏_{m=a}^{b} squares[m-1]` (1-based, empty = 1).
pub(crate) fn square_product(squares: &[f64], a: usize, b: usize) -> f64 {
    if b < a {
        return 1.0;
    }
    squares[a - 1..b].iter().product()
}
