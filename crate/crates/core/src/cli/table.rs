//! Orbit atlas over all subgroup signatures of a given size.

use serde::Serialize;

use crate::checks::Check;
use crate::error::{CkError, Result};
use crate::orbits::{classify_orbit, invariant_weights, Degeneracy, RadiusKind, StabilizerKind};
use crate::scalar::{Branch, Signature};

/// Largest `n` accepted by [`orbit_table`].
pub const MAX_TABLE_N: usize = 6;

/// One classified representative character.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRow {
    /// Subgroup signature `(j_2, ..., j_n)`.
    pub subgroup: String,
    pub h: String,
    pub radius_kind: &'static str,
    pub value: f64,
    pub axis: Option<usize>,
    pub degeneracy: Option<&'static str>,
    pub families: u8,
    pub families_literal: Option<u8>,
    pub discrepancy: bool,
    pub stabilizer: Option<&'static str>,
    pub notes: String,
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

fn row(sub: &Signature, h: Vec<f64>) -> Result<OrbitRow> {
    let c = classify_orbit(sub, &h)?;
    let (kind, axis, degeneracy) = match c.radius_kind {
        RadiusKind::Positive { .. } => ("positive", None, None),
        RadiusKind::Imaginary { axis, .. } => ("imaginary", Some(axis), None),
        RadiusKind::Zero { degeneracy, .. } => (
            "zero",
            None,
            Some(match degeneracy {
                Degeneracy::Point => "point",
                Degeneracy::LowerDimensional => "lower_dimensional",
                Degeneracy::Cone => "cone",
            }),
        ),
    };
    Ok(OrbitRow {
        subgroup: sub.to_string(),
        h: fmt_vec(&h),
        radius_kind: kind,
        value: c.value,
        axis,
        degeneracy,
        families: c.families,
        families_literal: c.families_literal,
        discrepancy: c.discrepancy,
        stabilizer: c.stabilizer.map(|s| match s.kind {
            StabilizerKind::FixAxisN => "fix_axis_n",
            StabilizerKind::FixAxisM => "fix_axis_m",
        }),
        notes: c.notes.join("; "),
    })
}

/// Representative characters for one subgroup signature: `e_n`, the zero
/// character, `e_m` when some weight is negative, and a nonzero null
/// character when one exists.
pub fn signature_rows(sub: &Signature) -> Result<Vec<OrbitRow>> {
    let n = sub.n() + 1;
    let unit = |i: usize| {
        let mut v = vec![0.0; n];
        v[i - 1] = 1.0;
        v
    };
    let mut rows = vec![row(sub, unit(n))?, row(sub, vec![0.0; n])?];
    let w = invariant_weights(sub);
    if let Some(m) = (1..=n).rev().find(|&m| w[m - 1] < 0.0) {
        rows.push(row(sub, unit(m))?);
    }
    let last = (1..=sub.n()).rev().find(|&p| sub.branch(p) != Branch::Elliptic);
    match last.map(|p| (p, sub.branch(p))) {
        Some((_, Branch::Parabolic)) => rows.push(row(sub, unit(1))?),
        Some((p, _)) => {
            let mut h = unit(p);
            h[n - 1] = 1.0;
            rows.push(row(sub, h)?);
        }
        None => {}
    }
    Ok(rows)
}

/// Classification rows over all `3^(n-1)` subgroup signatures.
pub fn orbit_table(n: usize) -> Result<Vec<OrbitRow>> {
    if !(2..=MAX_TABLE_N).contains(&n) {
        return Err(CkError::Config(format!("orbit table needs 2 <= n <= {MAX_TABLE_N}, got {n}")));
    }
    let mut rows = Vec::new();
    for sub in Signature::enumerate(n - 1) {
        rows.extend(signature_rows(&sub)?);
    }
    Ok(rows)
}

/// Consistency of an atlas: no negative invariant on all-elliptic rows,
/// the zero character is a point, and every rule/enumeration disagreement
/// is flagged with a note.
pub fn atlas_checks(rows: &[OrbitRow]) -> Vec<Check> {
    let count = |pred: &dyn Fn(&OrbitRow) -> bool| rows.iter().filter(|r| pred(r)).count() as f64;
    let elliptic = |r: &OrbitRow| r.subgroup.split(',').all(|t| t == "1");
    let is_zero_h = |r: &OrbitRow| r.h.split(' ').all(|t| t.parse::<f64>().map(|v| v == 0.0).unwrap_or(false));
    vec![
        Check::new(
            "elliptic_without_imaginary_radius",
            count(&|r| elliptic(r) && (r.radius_kind == "imaginary" || r.value < 0.0)),
            0.0,
        ),
        Check::new(
            "zero_character_is_point",
            count(&|r| is_zero_h(r) && r.degeneracy != Some("point")),
            0.0,
        ),
        Check::new(
            "discrepancies_flagged",
            count(&|r| {
                let differs = r.families_literal.is_some_and(|l| l != r.families);
                differs != r.discrepancy || (r.discrepancy && r.notes.is_empty())
            }),
            0.0,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_examples() {
        let rows = orbit_table(3).unwrap();
        let r = rows.iter().find(|r| r.subgroup == "1,1" && r.radius_kind == "positive").unwrap();
        assert_eq!(r.families, 1);
        assert!(r.discrepancy);
        assert!(rows.iter().any(|r| r.subgroup == "i,1" && r.radius_kind == "imaginary" && r.axis == Some(1)));
        let rows = orbit_table(2).unwrap();
        assert!(rows.iter().filter(|r| r.subgroup == "d").all(|r| r.radius_kind != "imaginary"));
        assert!(atlas_checks(&orbit_table(3).unwrap()).iter().all(|c| c.pass));
        assert!(orbit_table(7).is_err());
    }
}
