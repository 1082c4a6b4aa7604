//! Numerical contraction limit: each parabolic `j` is replaced by a real `ε`
//! and the resulting quantities are compared with their parabolic values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checks::Check;
use crate::error::{CkError, Result};
use crate::group::{group_matrix_sq, rotation_block_sq, CanonicalParams};
use crate::scalar::{Branch, Signature};

use super::geometry::transported_sq;

/// Deviations below this are treated as exact agreement.
const EXACT_FLOOR: f64 = 1e-14;
/// Accepted band for the deviation ratio between `ε = 1e-3` and `ε = 1e-4`.
pub const RATIO_BAND: (f64, f64) = (50.0, 200.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionQuantity {
    pub name: String,
    pub epsilons: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Empirical orders `log(d_i / d_{i+1}) / log(ε_i / ε_{i+1})`.
    pub orders: Vec<f64>,
    /// `d(1e-3) / d(1e-4)` when both values are present and above the floor.
    pub ratio: Option<f64>,
    pub monotone: bool,
    pub pass: bool,
}

impl ContractionQuantity {
    /// As a check record: the deviation is `|log10(ratio / 100)|` against
    /// `log10 2`, which is the ratio band `[50, 200]`; quantities that agree
    /// exactly report their largest deviation against the exactness floor.
    pub fn as_check(&self) -> Check {
        let name = format!("contraction_{}", self.name);
        match self.ratio {
            Some(_) if !self.monotone => Check::new(name, f64::INFINITY, 2f64.log10()),
            Some(r) => Check::new(name, (r / 100.0).log10().abs(), 2f64.log10()),
            None => Check::new(name, self.deviations.iter().copied().fold(0.0, f64::max), EXACT_FLOOR),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub signature: Signature,
    pub quantities: Vec<ContractionQuantity>,
    pub pass: bool,
}

fn squares_with(sig: &Signature, eps: f64, from: usize) -> Vec<f64> {
    sig.branches()
        .iter()
        .enumerate()
        .map(|(i, b)| match b {
            Branch::Parabolic if i >= from => eps * eps,
            b => f64::from(b.square()),
        })
        .collect()
}

fn summarize(name: &str, epsilons: &[f64], deviations: Vec<f64>) -> ContractionQuantity {
    let exact = deviations.iter().all(|d| *d <= EXACT_FLOOR);
    let monotone = deviations.windows(2).all(|w| w[1] <= w[0] || w[0] <= EXACT_FLOOR);
    let orders = epsilons
        .windows(2)
        .zip(deviations.windows(2))
        .map(|(e, d)| (d[0] / d[1]).ln() / (e[0] / e[1]).ln())
        .collect();
    let find = |e: f64| epsilons.iter().position(|v| (v - e).abs() <= 1e-12 * e).map(|i| deviations[i]);
    let ratio = match (find(1e-3), find(1e-4)) {
        (Some(a), Some(b)) if b > EXACT_FLOOR => Some(a / b),
        _ => None,
    };
    let ratio_ok = match ratio {
        Some(r) => (RATIO_BAND.0..=RATIO_BAND.1).contains(&r),
        None => exact,
    };
    ContractionQuantity {
        name: name.into(),
        epsilons: epsilons.to_vec(),
        deviations,
        orders,
        ratio,
        monotone,
        pass: exact || (monotone && ratio_ok),
    }
}

fn random_params(rng: &mut ChaCha8Rng, n: usize, start: usize) -> CanonicalParams {
    let count: usize = (start..n).map(|k| n - k).sum();
    let v: Vec<f64> = (0..count).map(|_| rng.random_range(-1.0..1.0)).collect();
    CanonicalParams::from_flat(n, start, &v).expect("sized by construction")
}

/// Deviation of rotation blocks, canonical products and (for `j_1 = ι`)
/// representation phases at each `ε` from their parabolic values.
///
/// The representation phase keeps `j_1 = ι` and deforms only the parabolic
/// entries of `j'`.
pub fn contraction_limit_check(sig: &Signature, epsilons: &[f64], seed: u64) -> Result<ContractionReport> {
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0 && *e <= 0.1)) {
        return Err(CkError::Config("contraction parameters must lie in (0, 0.1]".into()));
    }
    if !sig.branches().contains(&Branch::Parabolic) {
        return Err(CkError::Config(format!("signature {sig} has no parabolic entry")));
    }
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();

    let n = sig.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = random_params(&mut rng, n, 0);
    let base = sig.squares();
    let mut quantities = Vec::new();

    let dev_blocks = eps
        .iter()
        .map(|&e| {
            let sq = squares_with(sig, e, 0);
            params
                .blocks
                .iter()
                .map(|b| (rotation_block_sq(&sq, b.k, &b.q) - rotation_block_sq(&base, b.k, &b.q)).abs().max())
                .fold(0.0, f64::max)
        })
        .collect();
    quantities.push(summarize("rotation_block", &eps, dev_blocks));

    let dev_products = eps
        .iter()
        .map(|&e| {
            let sq = squares_with(sig, e, 0);
            (group_matrix_sq(&sq, &params) - group_matrix_sq(&base, &params)).abs().max()
        })
        .collect();
    quantities.push(summarize("group_product", &eps, dev_products));

    if sig.branch(1) == Branch::Parabolic && n >= 2 {
        let sub = sig.sub(1)?;
        let q0 = random_params(&mut rng, n, 1);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = 1.0;
        let phase = |sq: &[f64]| -> Result<f64> { Ok(r * transported_sq(sq, &q0, &x)?[n - 1]) };
        let p0 = phase(&sub.squares())?;
        let dev = eps
            .iter()
            .map(|&e| {
                let p = phase(&squares_with(&sub, e, 0))?;
                // |e^{ia} - e^{ib}| = 2 |sin((a - b) / 2)|
                Ok(2.0 * ((p - p0) / 2.0).sin().abs())
            })
            .collect::<Result<Vec<_>>>()?;
        quantities.push(summarize("omega_phase", &eps, dev));
    }

    let pass = quantities.iter().all(|q| q.pass);
    Ok(ContractionReport {
        signature: sig.clone(),
        quantities,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

    #[test]
    fn euclidean_plane() {
        let r = contraction_limit_check(&Signature::parse("d,1").unwrap(), &EPS, 7).unwrap();
        assert!(r.pass, "{r:?}");
        let phase = r.quantities.iter().find(|q| q.name == "omega_phase").unwrap();
        assert!(phase.deviations.iter().all(|d| *d == 0.0));
        let block = &r.quantities[0];
        assert!((block.ratio.unwrap() - 100.0).abs() < 5.0);
    }

    #[test]
    fn parabolic_subgroup_phase() {
        let r = contraction_limit_check(&Signature::parse("d,d,1").unwrap(), &EPS, 3).unwrap();
        assert!(r.pass, "{r:?}");
        let phase = r.quantities.iter().find(|q| q.name == "omega_phase").unwrap();
        assert!(phase.ratio.is_some());
    }

    #[test]
    fn rejects_bad_epsilons() {
        let s = Signature::parse("d,1").unwrap();
        assert!(contraction_limit_check(&s, &[0.5], 1).is_err());
        assert!(contraction_limit_check(&s, &[], 1).is_err());
        assert!(contraction_limit_check(&Signature::parse("1,1").unwrap(), &EPS, 1).is_err());
    }
}
