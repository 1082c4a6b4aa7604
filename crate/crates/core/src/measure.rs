//! Parameter domains, the invariant measure in canonical coordinates, and
//! Monte Carlo integration against it.
//!
//! The measure is `dq = ∏_k VS(u_k)^{n-k-1} d^{n-k}Q_k` with `u_k = j_{k+1}² Q_k²`.
//! Noncompact directions are integrated over a user-supplied truncation box
//! `[-T, T]^d`; the measure there is not normalizable.
//!
//! Random numbers come from ChaCha8 with one stream per worker; draw `i` of
//! stream `s` is a pure function of `(seed, s, i)`, so results do not depend
//! on the thread count.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain as domain_error, CkError, Result};
use crate::group::{block_weights, factorize, group_element, weighted_dot, BlockParams, CanonicalParams};
use crate::scalar::{vs, Branch, Signature};

/// Number of independent RNG streams used by [`integrate`].
pub const STREAMS: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// `Q_k² <= π²`.
    RealBall,
    /// All of `R^{n-k}`.
    FullSpace,
    /// `Q_k² >= -π²`.
    ImaginaryBall,
    /// `[0, 2π)`, last block with `j_n = 1`.
    Circle,
    /// `R`, last block with `j_n ∈ {ι, i}`.
    Line,
}

/// Parameter domain of block `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub k: usize,
    /// `j^(k) = (j_{k+1}, ..., j_n)`.
    pub ambient: Signature,
    weights: Vec<f64>,
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Whether the domain is bounded without truncation.
    pub fn is_bounded(&self) -> bool {
        match self.kind {
            DomainKind::Circle => true,
            DomainKind::RealBall => self.weights.iter().all(|&w| w == 1.0),
            _ => false,
        }
    }

    /// `Q² >= -π²` holds for every vector when no weight is negative.
    pub fn is_constraint_vacuous(&self) -> bool {
        match self.kind {
            DomainKind::ImaginaryBall => self.weights.iter().all(|&w| w >= 0.0),
            DomainKind::FullSpace | DomainKind::Line => true,
            _ => false,
        }
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        let q2 = weighted_dot(&self.weights, q, q);
        match self.kind {
            DomainKind::RealBall => q2 <= PI * PI * (1.0 + 1e-12),
            DomainKind::ImaginaryBall => q2 >= -PI * PI * (1.0 + 1e-12),
            DomainKind::Circle => (0.0..2.0 * PI).contains(&q[0]),
            DomainKind::FullSpace | DomainKind::Line => true,
        }
    }
}

/// Domain `D_{n-k}(j^(k))` of block `k`.
pub fn domain(sig: &Signature, k: usize) -> Result<DomainSpec> {
    let n = sig.n();
    if k >= n {
        return domain_error(format!("block index {k} must be below n = {n}"));
    }
    let last = k + 1 == n;
    let kind = match (sig.branch(k + 1), last) {
        (Branch::Elliptic, true) => DomainKind::Circle,
        (_, true) => DomainKind::Line,
        (Branch::Elliptic, false) => DomainKind::RealBall,
        (Branch::Parabolic, false) => DomainKind::FullSpace,
        (Branch::Hyperbolic, false) => DomainKind::ImaginaryBall,
    };
    Ok(DomainSpec {
        kind,
        k,
        ambient: sig.sub(k)?,
        weights: block_weights(&sig.squares(), k),
    })
}

/// Invariant density `∏_k VS(u_k)^{n-k-1}` at the given parameters.
pub fn density(sig: &Signature, params: &CanonicalParams) -> f64 {
    let squares = sig.squares();
    let n = sig.n();
    params
        .blocks
        .iter()
        .map(|b| {
            let w = block_weights(&squares, b.k);
            let u = squares[b.k] * weighted_dot(&w, &b.q, &b.q);
            vs(u).powi((n - b.k - 1) as i32)
        })
        .product()
}

/// One draw from the measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSample {
    pub params: CanonicalParams,
    /// Density of the invariant measure at `params`.
    pub weight: f64,
}

/// Monte Carlo estimate of an integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

// Proposal region of one block: uniform ball, circle or truncated box.
#[derive(Debug, Clone)]
enum Proposal {
    Circle,
    Ball { dim: usize },
    Box { dim: usize, half: f64 },
}

impl Proposal {
    fn volume(&self) -> f64 {
        match *self {
            Proposal::Circle => 2.0 * PI,
            Proposal::Ball { dim } => unit_ball_volume(dim) * PI.powi(dim as i32),
            Proposal::Box { dim, half } => (2.0 * half).powi(dim as i32),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match *self {
            Proposal::Circle => vec![rng.random_range(0.0..2.0 * PI)],
            Proposal::Ball { dim } => {
                let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                let radius = PI * rng.random::<f64>().powf(1.0 / dim as f64);
                g.iter().map(|v| v / norm * radius).collect()
            }
            Proposal::Box { dim, half } => (0..dim).map(|_| rng.random_range(-half..=half)).collect(),
        }
    }
}

// Volume of the unit ball in R^d via V_d = 2π/d V_{d-2}.
fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Deterministic sampler of the (truncated) parameter domain.
#[derive(Debug, Clone)]
pub struct Sampler {
    sig: Signature,
    seed: u64,
    domains: Vec<DomainSpec>,
    proposals: Vec<Proposal>,
}

impl Sampler {
    /// `truncation` is the half-width `T` of the box used for every
    /// unbounded block; it must be positive when such a block exists.
    pub fn new(sig: &Signature, seed: u64, truncation: f64) -> Result<Self> {
        let mut domains = Vec::with_capacity(sig.n());
        let mut proposals = Vec::with_capacity(sig.n());
        for k in 0..sig.n() {
            let d = domain(sig, k)?;
            let p = if d.kind == DomainKind::Circle {
                Proposal::Circle
            } else if d.is_bounded() {
                Proposal::Ball { dim: d.dim() }
            } else {
                if !(truncation > 0.0 && truncation.is_finite()) {
                    return Err(CkError::Config(format!(
                        "block {k} has a noncompact domain; truncation must be positive, got {truncation}"
                    )));
                }
                Proposal::Box {
                    dim: d.dim(),
                    half: truncation,
                }
            };
            domains.push(d);
            proposals.push(p);
        }
        Ok(Self {
            sig: sig.clone(),
            seed,
            domains,
            proposals,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// Product volume of the proposal regions.
    pub fn proposal_volume(&self) -> f64 {
        self.proposals.iter().map(Proposal::volume).product()
    }

    fn rng(&self, stream: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.set_word_pos(u128::from(index) << 32);
        rng
    }

    fn propose(&self, rng: &mut ChaCha8Rng) -> (CanonicalParams, bool) {
        let n = self.sig.n();
        let mut inside = true;
        let blocks = self
            .proposals
            .iter()
            .zip(&self.domains)
            .enumerate()
            .map(|(k, (p, d))| {
                let q = p.draw(rng);
                inside &= d.contains(&q);
                debug_assert_eq!(q.len(), n - k);
                BlockParams::new(k, q)
            })
            .collect();
        (CanonicalParams::new(blocks), inside)
    }

    /// Single proposal draw `(params, inside the domain)`.
    pub fn proposal(&self, stream: u64, index: u64) -> (CanonicalParams, bool) {
        self.propose(&mut self.rng(stream, index))
    }

    /// Draw `index` of `stream`, uniform on the truncated domain.
    pub fn sample(&self, stream: u64, index: u64) -> MeasureSample {
        let mut rng = self.rng(stream, index);
        loop {
            let (params, inside) = self.propose(&mut rng);
            if inside {
                let weight = density(&self.sig, &params);
                return MeasureSample { params, weight };
            }
        }
    }
}

/// First draw for `seed`: uniform on the truncated domain, weighted by the density.
pub fn sample(sig: &Signature, seed: u64, truncation: f64) -> Result<MeasureSample> {
    Ok(Sampler::new(sig, seed, truncation)?.sample(0, 0))
}

#[derive(Debug, Clone, Default)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

/// Estimate several integrals `∫ f_i dq` from the same draws.
///
/// `f` returns one value per integrand and must return vectors of length
/// `outputs`. Each value is weighted by the density, the domain indicator and
/// the proposal volume.
pub fn integrate_many<F>(
    sig: &Signature,
    f: F,
    outputs: usize,
    samples: u64,
    seed: u64,
    truncation: f64,
) -> Result<Vec<Estimate>>
where
    F: Fn(&CanonicalParams) -> Vec<f64> + Sync,
{
    if samples < 2 {
        return Err(CkError::Config("at least two samples are required".into()));
    }
    let sampler = Sampler::new(sig, seed, truncation)?;
    let volume = sampler.proposal_volume();
    let per_stream = |s: u64| samples / STREAMS + u64::from(s < samples % STREAMS);
    let partial: Vec<Moments> = (0..STREAMS)
        .into_par_iter()
        .map(|s| {
            let mut m = Moments {
                sum: vec![0.0; outputs],
                sum_sq: vec![0.0; outputs],
            };
            for i in 0..per_stream(s) {
                let (params, inside) = sampler.proposal(s, i);
                if !inside {
                    continue;
                }
                let w = density(sig, &params) * volume;
                let values = f(&params);
                assert_eq!(values.len(), outputs, "integrand returned the wrong number of values");
                for (o, v) in values.into_iter().enumerate() {
                    let x = v * w;
                    m.sum[o] += x;
                    m.sum_sq[o] += x * x;
                }
            }
            m
        })
        .collect();
    let n = samples as f64;
    Ok((0..outputs)
        .map(|o| {
            let sum: f64 = partial.iter().map(|m| m.sum[o]).sum();
            let sum_sq: f64 = partial.iter().map(|m| m.sum_sq[o]).sum();
            let mean = sum / n;
            let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
            Estimate {
                estimate: mean,
                std_error: (var / n).sqrt(),
                samples,
                seed,
            }
        })
        .collect())
}

/// Monte Carlo estimate of `∫ f dq` over the (truncated) domain.
pub fn integrate<F>(sig: &Signature, f: F, samples: u64, seed: u64, truncation: f64) -> Result<Estimate>
where
    F: Fn(&CanonicalParams) -> f64 + Sync,
{
    Ok(integrate_many(sig, |p| vec![f(p)], 1, samples, seed, truncation)?[0])
}

/// Canonical coordinates of `g0 · q(params)`.
pub fn left_shift(sig: &Signature, g0: &DMatrix<f64>, params: &CanonicalParams) -> Result<CanonicalParams> {
    let m = g0 * group_element(sig, params)?.matrix;
    factorize(sig, &m, 0)
}

/// Canonical coordinates of `q(params) · g0`.
pub fn right_shift(sig: &Signature, g0: &DMatrix<f64>, params: &CanonicalParams) -> Result<CanonicalParams> {
    let m = group_element(sig, params)?.matrix * g0;
    factorize(sig, &m, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(s: &str) -> Signature {
        Signature::parse(s).unwrap()
    }

    #[test]
    fn domain_examples() {
        assert_eq!(domain(&sig("1,1"), 1).unwrap().kind, DomainKind::Circle);
        assert_eq!(domain(&sig("d,1"), 0).unwrap().kind, DomainKind::FullSpace);
        let d = domain(&sig("i,1,1"), 0).unwrap();
        assert_eq!(d.kind, DomainKind::ImaginaryBall);
        assert!(d.is_constraint_vacuous());
        assert_eq!(domain(&sig("1,i"), 1).unwrap().kind, DomainKind::Line);
        assert_eq!(domain(&sig("1,d"), 1).unwrap().kind, DomainKind::Line);
        assert!(domain(&sig("1,1"), 2).is_err());
        assert!(!domain(&sig("1,i,1"), 0).unwrap().is_bounded());
    }

    #[test]
    fn density_examples() {
        let s = sig("1,1");
        let p = CanonicalParams::new(vec![BlockParams::new(0, vec![0.6, 0.8]), BlockParams::new(1, vec![2.0])]);
        assert!((density(&s, &p) - 1f64.sin()).abs() < 1e-15);

        let p = CanonicalParams::new(vec![BlockParams::new(0, vec![5.0, -3.0]), BlockParams::new(1, vec![2.0])]);
        assert_eq!(density(&sig("d,1"), &p), 1.0);

        // j_1 = i with Q_0² = 1 gives u_0 = -1.
        let p = CanonicalParams::new(vec![BlockParams::new(0, vec![1.0, 0.0]), BlockParams::new(1, vec![0.4])]);
        assert!((density(&sig("i,1"), &p) - 1f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn density_is_even_blockwise() {
        let s = sig("1,i,1");
        let p = CanonicalParams::new(vec![
            BlockParams::new(0, vec![0.3, 0.9, -0.2]),
            BlockParams::new(1, vec![0.5, 0.1]),
            BlockParams::new(2, vec![1.0]),
        ]);
        let neg = CanonicalParams::new(p.blocks.iter().map(BlockParams::negated).collect());
        assert_eq!(density(&s, &p), density(&s, &neg));
    }

    #[test]
    fn sampling_is_deterministic_and_contained() {
        let s = sig("1,1");
        assert_eq!(sample(&s, 7, 1.0).unwrap(), sample(&s, 7, 1.0).unwrap());
        let sampler = Sampler::new(&s, 3, 1.0).unwrap();
        for i in 0..200 {
            let m = sampler.sample(1, i);
            let q0 = &m.params.blocks[0].q;
            let r = (q0[0] * q0[0] + q0[1] * q0[1]).sqrt();
            assert!(r <= PI);
            assert!((0.0..2.0 * PI).contains(&m.params.blocks[1].q[0]));
            assert!((m.weight - r.sin() / r).abs() < 1e-14);
        }
        let sampler = Sampler::new(&sig("d,1"), 3, 10.0).unwrap();
        for i in 0..200 {
            let m = sampler.sample(0, i);
            assert!(m.params.blocks[0].q.iter().all(|v| v.abs() <= 10.0));
        }
    }

    #[test]
    fn noncompact_needs_truncation() {
        assert!(matches!(Sampler::new(&sig("d,1"), 0, 0.0), Err(CkError::Config(_))));
        assert!(Sampler::new(&sig("1,1"), 0, 0.0).is_ok());
    }

    #[test]
    fn ball_volume() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
    }
}
