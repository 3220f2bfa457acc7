use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real};

// Backward-error bounds for the [m/m] diagonal Pade approximant (1-norm).
const THETA_F64: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
];
const THETA_F32: [(usize, f64); 3] = [(3, 4.258730016922831e-1), (5, 1.880152677804762e0), (7, 3.925_724_783_138_66)];

/// Coefficients of the numerator of the [m/m] Pade approximant to `exp`.
fn pade_coefficients(m: usize) -> Vec<f64> {
    let mut c = vec![1.0f64; m + 1];
    for j in 1..=m {
        c[j] = c[j - 1] * ((m + 1 - j) as f64) / ((j * (2 * m + 1 - j)) as f64);
    }
    c
}

/// Matrix exponential by scaling and squaring with a diagonal Pade approximant.
///
/// The degree and the number of squarings are chosen from the 1-norm.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    if !a.is_square() {
        return Err(Error::InvalidInput("expm: matrix is not square".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("expm: non-finite entries".into()));
    }
    let n = a.rows();
    let norm = a.one_norm().to_f64_lossy();
    let single = T::epsilon().to_f64_lossy() > 1e-10;
    let table: &[(usize, f64)] = if single { &THETA_F32 } else { &THETA_F64 };

    let (degree, theta_max) = table.iter().copied().find(|&(_, theta)| norm <= theta).unwrap_or(*table.last().unwrap());
    let squarings = if norm > theta_max { (norm / theta_max).log2().ceil().max(0.0) as i32 } else { 0 };
    if squarings > 1000 {
        return Err(Error::NumericalFailure(format!("expm: norm {norm:e} too large")));
    }
    let scaled = a.scale_real(T::lit(2f64.powi(-squarings)));

    let coeffs = pade_coefficients(degree);
    let ident = CMatrix::identity(n);
    let a2 = scaled.matmul(&scaled);
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() <= degree / 2 {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut even = CMatrix::zeros(n, n);
    let mut odd = CMatrix::zeros(n, n);
    for (k, &c) in coeffs.iter().enumerate() {
        let term = powers[k / 2].scale(cr(T::lit(c)));
        if k % 2 == 0 {
            even = &even + &term;
        } else {
            odd = &odd + &term;
        }
    }
    let u = scaled.matmul(&odd);
    let num = &even + &u;
    let den = &even - &u;
    let mut r = den.solve(&num)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
        if !r.is_finite() {
            return Err(Error::NumericalFailure("expm: overflow during squaring".into()));
        }
    }
    if !r.is_finite() {
        return Err(Error::NumericalFailure("expm: non-finite result".into()));
    }
    Ok(r)
}
