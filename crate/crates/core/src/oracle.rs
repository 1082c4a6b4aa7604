//! Reference computations that share no code with the closed forms they check.

use nalgebra::DMatrix;

/// Number of Taylor terms in the scaled exponential core.
const EXPM_TERMS: usize = 18;

/// Matrix exponential by scaling and squaring around an 18-term Taylor core.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = a.abs().row_sum().max();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a / 2f64.powi(squarings as i32);
    let dim = a.nrows();
    let mut term = DMatrix::<f64>::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..=EXPM_TERMS {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `max |a - b|` entrywise.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Induced infinity norm (largest absolute row sum).
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.abs().column_sum().max()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_generator() {
        let th = 2.5f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -th, th, 0.0]);
        let e = expm(&a);
        let r = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!(max_abs_diff(&e, &r) < 1e-14);
    }

    #[test]
    fn nilpotent() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 7.0, 0.0]);
        let e = expm(&a);
        assert!(max_abs_diff(&e, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 7.0, 1.0])) < 1e-14);
    }
}
