//! Randomized verification suites. Each check compares a closed form with an
//! independent computation and reports the largest deviation seen.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    algebra_element, bracket, bracket_matrix, casimir, casimir_rotation_sum, commutator, generator, GeneratorIndex,
};
use crate::error::{CkError, Result};
use crate::group::{block_weights, group_element, rotation_block, BlockParams, CanonicalParams};
use crate::indrep::geometry::{dcoeffs, dcoeffs_det, transported, transported_matrix};
use crate::indrep::{heisenberg_apply, omega_apply, ContractedElement, Family, RepContext, RepFunction};
use crate::measure::{integrate_many, left_shift, right_shift};
use crate::oracle::{expm, inf_norm};
use crate::orbits::{
    adjoint, adjoint_inverse, apply, classify_orbit, coadjoint, orbit_invariant, pairing, translation_matrix,
    subgroup_matrix, RadiusKind, Sign,
};
use crate::scalar::{vs, Branch, Signature};

/// Outcome of one verification: `pass` iff `max_deviation <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform components in `[-scale, scale]` for blocks `start..n`.
pub fn random_params(rng: &mut impl Rng, n: usize, start: usize, scale: f64) -> CanonicalParams {
    let count: usize = (start..n).map(|k| n - k).sum();
    let v: Vec<f64> = (0..count).map(|_| rng.random_range(-scale..=scale)).collect();
    CanonicalParams::from_flat(n, start, &v).expect("sized by construction")
}

pub fn random_vec(rng: &mut impl Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..=scale)).collect()
}

/// Replace block `b` (0-based in `squares`) by a nonzero vector with `Q² = 0`
/// when the block weights admit one.
fn make_null(rng: &mut impl Rng, squares: &[f64], b: usize, q: &mut [f64]) -> bool {
    let w = block_weights(squares, b);
    let t = rng.random_range(0.2..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    if let Some(r) = w.iter().position(|v| *v == 0.0) {
        q.iter_mut().for_each(|v| *v = 0.0);
        q[r] = t;
        return true;
    }
    let pos = w.iter().position(|v| *v > 0.0);
    let neg = w.iter().position(|v| *v < 0.0);
    if let (Some(a), Some(c)) = (pos, neg) {
        q.iter_mut().for_each(|v| *v = 0.0);
        q[a] = t;
        q[c] = if rng.random::<bool>() { t } else { -t };
        return true;
    }
    false
}

fn max(a: f64, b: f64) -> f64 {
    // NaN propagates so that a broken evaluation fails its check.
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Closed-form blocks against the series exponential of the generator sum.
pub fn closed_form_vs_expm(sig: &Signature, trials: usize, rng: &mut impl Rng) -> Result<Check> {
    let n = sig.n();
    let mut dev = 0.0f64;
    for _ in 0..trials {
        let k = rng.random_range(0..n);
        let q = random_vec(rng, n - k, 2.0);
        let closed = rotation_block(sig, &BlockParams::new(k, q.clone()))?.matrix;
        let series = expm(&algebra_element(sig, k, &q)?.matrix);
        dev = max(dev, inf_norm(&(closed - series)));
    }
    Ok(Check::new("closed_form_vs_expm", dev, 1e-9))
}

/// `MᵀGM = G` and `det M = 1` for products of two random elements.
pub fn isometry_and_determinant(sig: &Signature, trials: usize, rng: &mut impl Rng) -> Result<Vec<Check>> {
    let n = sig.n();
    let (mut iso, mut det) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let a = group_element(sig, &random_params(rng, n, 0, 1.0))?;
        let b = group_element(sig, &random_params(rng, n, 0, 1.0))?;
        let m = a.mul(&b);
        iso = max(iso, m.isometry_defect());
        det = max(det, (m.determinant() - 1.0).abs());
    }
    Ok(vec![Check::new("isometry", iso, 1e-12), Check::new("determinant", det, 1e-12)])
}

/// Structure constants against literal matrix commutators, all index pairs.
pub fn structure_constants(sig: &Signature) -> Result<Check> {
    let idx = GeneratorIndex::all(sig.n());
    let mut dev = 0.0f64;
    for &a in &idx {
        let xa = generator(sig, a)?.matrix;
        for &b in &idx {
            let xb = generator(sig, b)?.matrix;
            let table = bracket_matrix(sig, bracket(sig, a, b)?)?;
            dev = max(dev, (table - commutator(&xa, &xb)).abs().max());
        }
    }
    Ok(Check::new("structure_constants", dev, 1e-14))
}

/// `[C, X] = 0` for every generator; for `j_1 = ι` also the vanishing of
/// the rotation part of the Casimir.
pub fn casimir_centrality(sig: &Signature) -> Result<Vec<Check>> {
    let c = casimir(sig);
    let mut dev = 0.0f64;
    for idx in GeneratorIndex::all(sig.n()) {
        let x = generator(sig, idx)?.matrix;
        dev = max(dev, commutator(&c, &x).abs().max());
    }
    let mut out = vec![Check::new("casimir_centrality", dev, 1e-12)];
    if sig.branch(1) == Branch::Parabolic {
        out.push(Check::new("casimir_rotation_part_vanishes", casimir_rotation_sum(sig).abs().max(), 0.0));
    }
    Ok(out)
}

/// Statistics of a factorization roundtrip run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripStats {
    pub draws: usize,
    pub degenerate: usize,
    /// Degenerate draws whose failing stage was not near a null or boundary block.
    pub degenerate_off_null: usize,
}

/// `group_element(factorize(M)) = M` for random `M`.
pub fn factorize_roundtrip(sig: &Signature, trials: usize, rng: &mut impl Rng) -> Result<(Vec<Check>, RoundtripStats)> {
    let n = sig.n();
    let squares = sig.squares();
    let mut dev = 0.0f64;
    let mut stats = RoundtripStats {
        draws: trials,
        degenerate: 0,
        degenerate_off_null: 0,
    };
    for _ in 0..trials {
        let p = random_params(rng, n, 0, 1.5);
        let m = group_element(sig, &p)?.matrix;
        match crate::group::factorize(sig, &m, 0) {
            Ok(q) => dev = max(dev, inf_norm(&(group_element(sig, &q)?.matrix - &m))),
            Err(CkError::Degeneracy { stage, .. }) => {
                stats.degenerate += 1;
                let b = &p.blocks[stage];
                let u = squares[stage] * crate::group::weighted_dot(&block_weights(&squares, stage), &b.q, &b.q);
                if u.abs() > 1e-6 && vs(u).abs() > 1e-6 {
                    stats.degenerate_off_null += 1;
                }
            }
            Err(e) => return Err(e),
        }
    }
    let rate = stats.degenerate as f64 / trials.max(1) as f64;
    let checks = vec![
        Check::new("factorize_roundtrip", dev, 1e-8),
        Check::new("factorize_degeneracy_rate", rate, 1e-3),
        Check::new("factorize_degeneracy_off_null", stats.degenerate_off_null as f64, 0.0),
    ];
    Ok((checks, stats))
}

/// Coadjoint action on characters: conservation of the orbit invariant,
/// duality with the adjoint action, and the conjugation identity
/// `t(Ad(k)x) = k t(x) k⁻¹`.
pub fn coadjoint_suite(sub: &Signature, trials: usize, rng: &mut impl Rng) -> Result<Vec<Check>> {
    let n = sub.n() + 1;
    let (mut cons, mut dual, mut conj) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let k = random_params(rng, n, 1, 1.0);
        let h = random_vec(rng, n, 1.0);
        let x = random_vec(rng, n, 1.0);
        let h2 = apply(&coadjoint(sub, &k)?, &h);
        cons = max(cons, (orbit_invariant(sub, &h2)? - orbit_invariant(sub, &h)?).abs());
        let rhs = pairing(&h, &apply(&adjoint_inverse(sub, &k)?, &x));
        dual = max(dual, (pairing(&h2, &x) - rhs).abs());
        let km = subgroup_matrix(sub, &k)?;
        let kinv = {
            let mut m = DMatrix::identity(n + 1, n + 1);
            m.view_mut((1, 1), (n, n)).copy_from(&adjoint_inverse(sub, &k)?);
            m
        };
        let lhs = translation_matrix(&apply(&adjoint(sub, &k)?, &x));
        conj = max(conj, (lhs - &km * translation_matrix(&x) * kinv).abs().max());
    }
    Ok(vec![
        Check::new("orbit_invariant_conservation", cons, 1e-12),
        Check::new("coadjoint_duality", dual, 1e-12),
        Check::new("adjoint_conjugation", conj, 1e-12),
    ])
}

/// Classification is idempotent on representatives and stabilizer elements
/// fix the representative.
pub fn stabilizer_suite(sub: &Signature, trials: usize, rng: &mut impl Rng) -> Result<Vec<Check>> {
    let n = sub.n() + 1;
    let (mut fix, mut idem) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let h = random_vec(rng, n, 2.0);
        let cls = classify_orbit(sub, &h)?;
        let Some(st) = cls.stabilizer.clone() else { continue };
        let again = classify_orbit(sub, &cls.representative)?;
        let same = again.radius_kind == cls.radius_kind || radius_close(&again.radius_kind, &cls.radius_kind);
        if !same || again.families != cls.families || again.sign != cls.sign {
            idem = f64::INFINITY;
        }
        let k = st.element(n, || rng.random_range(-1.0..=1.0));
        let moved = apply(&coadjoint(sub, &k)?, &cls.representative);
        let d = moved.iter().zip(&cls.representative).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        fix = max(fix, d);
    }
    Ok(vec![
        Check::new("stabilizer_fixes_representative", fix, 1e-10),
        Check::new("classification_idempotent", idem, 0.0),
    ])
}

fn radius_close(a: &RadiusKind, b: &RadiusKind) -> bool {
    match (a, b) {
        (RadiusKind::Positive { r: x }, RadiusKind::Positive { r: y }) => (x - y).abs() <= 1e-12 * x.max(1.0),
        (RadiusKind::Imaginary { rho: x, axis: i }, RadiusKind::Imaginary { rho: y, axis: j }) => {
            i == j && (x - y).abs() <= 1e-12 * x.max(1.0)
        }
        _ => false,
    }
}

/// Recurrence against the Cramer determinant for the rescaled `D̃_p`.
pub fn dcoeffs_cross(sub: &Signature, trials: usize, rng: &mut impl Rng) -> Result<Check> {
    let n = sub.n() + 1;
    let mut dev = 0.0f64;
    for _ in 0..trials {
        let q = random_params(rng, n, 1, 1.0);
        let x = random_vec(rng, n, 1.0);
        let d = dcoeffs(sub, &q, &x)?;
        for (p, v) in d.iter().enumerate() {
            dev = max(dev, (dcoeffs_det(sub, &q, &x, p + 1)? - v).abs());
        }
    }
    Ok(Check::new("dcoeffs_recurrence_vs_determinant", dev, 1e-10))
}

/// Transported coordinates against the explicit `Ad`-matrix product,
/// with a share of null blocks.
pub fn transport_oracle(sub: &Signature, trials: usize, rng: &mut impl Rng) -> Result<(Check, usize)> {
    let n = sub.n() + 1;
    let squares = sub.squares();
    let mut dev = 0.0f64;
    let mut nulls = 0;
    for _ in 0..trials {
        let mut q = random_params(rng, n, 1, 1.0);
        for (b, block) in q.blocks.iter_mut().enumerate() {
            if rng.random::<f64>() < 0.25 && make_null(rng, &squares, b, &mut block.q) {
                nulls += 1;
            }
        }
        let x = random_vec(rng, n, 1.0);
        let a = transported(sub, &q, &x)?;
        let b = transported_matrix(sub, &q, &x)?;
        dev = max(dev, a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max));
    }
    Ok((Check::new("transport_vs_adjoint_product", dev, 1e-10), nulls))
}

/// Smooth function on the subgroup built from matrix entries, so that it is
/// a genuine function on the group whatever coordinates are used.
pub fn matrix_test_function(sub: &Signature, seed: u64) -> RepFunction {
    let n = sub.n() + 1;
    let mut r = rng(seed);
    let a: Vec<f64> = random_vec(&mut r, n * n, 1.0);
    let b: Vec<f64> = random_vec(&mut r, n * n, 1.0);
    let sub = sub.clone();
    RepFunction::new(move |q| {
        let m = adjoint(&sub, q)?;
        let d2: f64 = (m.clone() - DMatrix::identity(n, n)).iter().map(|v| v * v).sum();
        let re: f64 = m.iter().zip(&a).map(|(v, c)| v * c).sum();
        let im: f64 = m.iter().zip(&b).map(|(v, c)| v * c).sum();
        Ok(Complex64::new(re.cos(), im.sin()) * (-0.1 * d2).exp())
    })
}

/// Pointwise composition law `U(g₁g₂) f = U(g₁)(U(g₂) f)` and unit phase modulus.
pub fn homomorphism(ctx: &RepContext, trials: usize, points: usize, rng: &mut impl Rng) -> Result<Vec<Check>> {
    let n = ctx.n();
    let sub = &ctx.sub;
    let (mut dev, mut modulus) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let g1 = ContractedElement::new(random_vec(rng, n, 1.0), random_params(rng, n, 1, 1.0));
        let g2 = ContractedElement::new(random_vec(rng, n, 1.0), random_params(rng, n, 1, 1.0));
        let f = matrix_test_function(sub, rng.random::<u64>() ^ t as u64);
        let g12 = g1.product(sub, &g2)?;
        let inner = ctx.act(&g2, &f);
        for _ in 0..points {
            let q0 = random_params(rng, n, 1, 1.0);
            let lhs = ctx.apply(&g12, &f, &q0)?;
            let rhs = ctx.apply(&g1, &inner, &q0)?;
            dev = max(dev, (lhs - rhs).norm());
            let phase = Complex64::from_polar(1.0, ctx.phase_angle(&g1.x, &q0)?);
            modulus = max(modulus, (phase.norm() - 1.0).abs());
        }
    }
    Ok(vec![
        Check::new("homomorphism", dev, 1e-8),
        Check::new("phase_modulus", modulus, 1e-15),
    ])
}

/// Heisenberg closed form against the generic operator on `(ι, ι)`, plus
/// the literal value at one fixed point.
pub fn heisenberg_suite(trials: usize, rng: &mut impl Rng) -> Result<Vec<Check>> {
    let sig = Signature::parse("d,d")?;
    let sub = sig.sub(1)?;
    let mut dev = 0.0f64;
    for _ in 0..trials {
        let r = rng.random_range(0.1..3.0);
        let sign = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
        let ctx = RepContext::new(&sig, Family::Positive { r }, sign)?;
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let q12 = rng.random_range(-2.0..2.0);
        let q0 = rng.random_range(-2.0..2.0);
        let f = matrix_test_function(&sub, rng.random());
        let g = ContractedElement::new(x.to_vec(), CanonicalParams::new(vec![BlockParams::new(1, vec![q12])]));
        let generic = omega_apply(&ctx, &g, &f, &CanonicalParams::new(vec![BlockParams::new(1, vec![q0])]))?;
        let closed = heisenberg_apply(r, sign, x, q12, &f, q0)?;
        dev = max(dev, (generic - closed).norm());
    }
    let one = RepFunction::new(|_| Ok(Complex64::new(1.0, 0.0)));
    let v = heisenberg_apply(1.0, Sign::Plus, [2.0, 3.0], 0.5, &one, 1.0)?;
    Ok(vec![
        Check::new("heisenberg_vs_generic", dev, 1e-13),
        Check::new("heisenberg_literal_value", (v - Complex64::from_polar(1.0, 1.0)).norm(), 0.0),
    ])
}

/// `⟨U(q)f, U(q)g⟩ = ⟨f, g⟩` on the circle subgroup of `(ι, 1)` by the
/// periodic trapezoid rule.
pub fn unitarity_circle(r: f64, trials: usize, pairs: usize, points: usize, rng: &mut impl Rng) -> Result<Check> {
    let sig = Signature::parse("d,1")?;
    let block = |t: f64| CanonicalParams::new(vec![BlockParams::new(1, vec![t])]);
    let grid: Vec<f64> = (0..points).map(|i| 2.0 * PI * i as f64 / points as f64).collect();
    let inner = |f: &RepFunction, g: &RepFunction| -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for &t in &grid {
            s += f.eval(&block(t))?.conj() * g.eval(&block(t))?;
        }
        Ok(s * (2.0 * PI / points as f64))
    };
    let mut dev = 0.0f64;
    for p in 0..pairs {
        let (a, b, c) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), p as f64 + 1.0);
        let f = RepFunction::new(move |q| {
            let t = q.blocks[0].q[0];
            Ok(Complex64::new((a * t.cos()).exp(), (c * t).sin()))
        });
        let g = RepFunction::new(move |q| {
            let t = q.blocks[0].q[0];
            Ok(Complex64::from_polar(1.0 + 0.5 * (b * t.sin()).cos(), c * t))
        });
        let base = inner(&f, &g)?;
        for sign in [Sign::Plus, Sign::Minus] {
            let ctx = RepContext::new(&sig, Family::Positive { r }, sign)?;
            for _ in 0..trials {
                let q = ContractedElement::new(random_vec(rng, 2, 3.0), block(rng.random_range(0.0..2.0 * PI)));
                let moved = inner(&ctx.act(&q, &f), &ctx.act(&q, &g))?;
                dev = max(dev, (moved - base).norm());
            }
        }
    }
    Ok(Check::new("unitarity_trapezoid", dev, 1e-6))
}

/// Smooth test functions on the group, as functions of matrix entries.
/// For noncompact signatures they are bumps supported near the identity.
fn haar_functions(sig: &Signature, m: &DMatrix<f64>) -> Vec<f64> {
    let dim = sig.dim();
    if sig.all_elliptic() {
        vec![
            m[(0, 0)] * m[(0, 0)],
            (m[(1, 2.min(dim - 1))] + 0.5).powi(2),
            m[(dim - 1, dim - 1)].exp(),
            (m[(0, 1)] * m[(1, 0)]).cos(),
            m.trace().powi(3) + m[(1, 1)],
        ]
    } else {
        let d2: f64 = (m - DMatrix::identity(dim, dim)).iter().map(|v| v * v).sum();
        let bump = if d2 < 1.0 { (-1.0 / (1.0 - d2)).exp() } else { 0.0 };
        vec![
            bump,
            bump * m[(0, 0)],
            bump * m[(1, 0)].powi(2),
            bump * (1.0 + m[(dim - 1, 0)]).cos(),
            bump * m.trace(),
        ]
    }
}

/// Left- and right-shifted integrals against the unshifted one, pairwise
/// within three combined standard errors.
pub fn haar_invariance(sig: &Signature, samples: u64, seed: u64, truncation: f64) -> Result<(Vec<Check>, Vec<[f64; 6]>)> {
    let n = sig.n();
    let mut r = rng(seed ^ 0x5eed);
    let scale = if sig.all_elliptic() { 1.0 } else { 0.15 };
    let g0 = group_element(sig, &random_params(&mut r, n, 0, scale))?.matrix;
    let outputs = 15;
    let eval = |p: &CanonicalParams| -> Vec<f64> {
        let shifted = |q: Result<CanonicalParams>| -> Vec<f64> {
            match q.and_then(|q| group_element(sig, &q)) {
                Ok(e) => haar_functions(sig, &e.matrix),
                Err(_) => vec![f64::NAN; 5],
            }
        };
        let mut out = shifted(Ok(p.clone()));
        out.extend(shifted(left_shift(sig, &g0, p)));
        out.extend(shifted(right_shift(sig, &g0, p)));
        out
    };
    let est = integrate_many(sig, eval, outputs, samples, seed, truncation)?;
    let mut checks = Vec::new();
    let mut table = Vec::new();
    for i in 0..5 {
        let (u, l, rr) = (est[i], est[5 + i], est[10 + i]);
        table.push([u.estimate, u.std_error, l.estimate, l.std_error, rr.estimate, rr.std_error]);
        for (name, a, b) in [("left_vs_plain", u, l), ("right_vs_plain", u, rr), ("left_vs_right", l, rr)] {
            let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
            let d = (a.estimate - b.estimate).abs();
            checks.push(Check::new(format!("haar_f{}_{name}", i + 1), if d.is_nan() { f64::NAN } else { d }, tol));
        }
    }
    Ok((checks, table))
}

/// Full invariant suite for one signature.
pub fn verify_signature(sig: &Signature, trials: usize, seed: u64) -> Result<Vec<Check>> {
    let mut r = rng(seed);
    let mut out = vec![closed_form_vs_expm(sig, trials, &mut r)?];
    out.extend(isometry_and_determinant(sig, trials, &mut r)?);
    out.push(structure_constants(sig)?);
    out.extend(casimir_centrality(sig)?);
    out.extend(factorize_roundtrip(sig, trials, &mut r)?.0);
    if sig.n() >= 2 {
        let sub = sig.sub(1)?;
        out.extend(coadjoint_suite(&sub, trials, &mut r)?);
        out.extend(stabilizer_suite(&sub, trials.min(200), &mut r)?);
        out.push(dcoeffs_cross(&sub, trials, &mut r)?);
        out.push(transport_oracle(&sub, trials, &mut r)?.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_suite_passes() {
        let checks = verify_signature(&Signature::parse("d,1").unwrap(), 200, 42).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn null_blocks_are_generated() {
        let sub = Signature::parse("1,i").unwrap();
        let (c, nulls) = transport_oracle(&sub, 200, &mut rng(5)).unwrap();
        assert!(c.pass, "{c:?}");
        assert!(nulls > 0);
    }

    #[test]
    fn check_pass_rule() {
        assert!(Check::new("a", 1.0, 1.0).pass);
        assert!(!Check::new("a", f64::NAN, 1.0).pass);
    }
}
