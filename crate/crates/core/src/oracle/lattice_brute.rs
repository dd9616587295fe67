//! Order-k lattice term by direct enumeration: every ordered k-tuple of
//! `(order, slice)` factors, with the Gaussian moment of the product taken
//! as a sum over all Wick pairings. Exponential cost, for tiny lattices only.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::lattice::TimeLattice;

/// Determinant by cofactor expansion.
fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    match n {
        0 => 1.0,
        1 => a[0][0],
        _ => (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, v)| *v).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][c] * det(&minor)
            })
            .sum(),
    }
}

/// `C = iħB⁻¹` via the adjugate.
fn covariance(lattice: &TimeLattice) -> Result<Vec<Vec<Complex64>>> {
    let b = lattice.quadratic_form();
    let n = b.len();
    let d = det(&b);
    if d == 0.0 {
        return Err(Error::InvalidInput("singular lattice quadratic form".into()));
    }
    let mut c = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<f64>> = b
                .iter()
                .enumerate()
                .filter(|&(r, _)| r != j)
                .map(|(_, row)| row.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| *v).collect())
                .collect();
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            c[i][j] = Complex64::new(0.0, lattice.hbar * sign * det(&minor) / d);
        }
    }
    Ok(c)
}

/// Sum over perfect matchings of `vars` of the product of covariances.
fn wick(vars: &[usize], cov: &[Vec<Complex64>]) -> Complex64 {
    if vars.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    if vars.len() % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let first = vars[0];
    let rest = &vars[1..];
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..rest.len() {
        let remaining: Vec<usize> = rest.iter().enumerate().filter(|&(q, _)| q != p).map(|(_, v)| *v).collect();
        total += cov[first][rest[p]] * wick(&remaining, cov);
    }
    total
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// The order-k term `(1/k!)(−iε/ħ)^k ⟨(Σ_m Σ_j V^{(m)}_j y_j^m/m!)^k⟩` over
/// derivative orders `orders`.
pub fn lattice_term_brute_force(lattice: &TimeLattice, k: usize, orders: &[usize]) -> Result<Complex64> {
    let cov = covariance(lattice)?;
    let n = lattice.slices();
    let factors: Vec<(usize, usize)> = orders.iter().flat_map(|&m| (0..n).map(move |j| (m, j))).collect();
    if factors.is_empty() {
        return Err(Error::InvalidInput("no factors".into()));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; k];
    loop {
        let mut coeff = 1.0;
        let mut vars = Vec::new();
        for &f in &idx {
            let (m, j) = factors[f];
            coeff *= lattice.derivative(j, m) / factorial(m);
            vars.extend(std::iter::repeat_n(j, m));
        }
        if coeff != 0.0 {
            total += coeff * wick(&vars, &cov);
        }
        let mut a = 0;
        while a < k {
            idx[a] += 1;
            if idx[a] < factors.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == k {
            break;
        }
    }
    let pref = Complex64::new(0.0, -lattice.epsilon / lattice.hbar).powi(k as i32) / factorial(k);
    Ok(pref * total)
}
