//! The series before the continuum limit, on a time lattice of `n` interior
//! slices.
//!
//! The fluctuation weight is `exp(i yᵀBy / 2ħ)` with `y₀ = y_{n+1} = 0`,
//! `B_jj = 2M/ε − εV″_j` and `B_{j,j±1} = −M/ε`. The order-k term is
//!
//! ```text
//! (1/k!)(−iε/ħ)^k ⟨ (Σ_m Σ_j V^{(m)}_j y_j^m / m!)^k ⟩
//! ```
//!
//! and is assembled here by the nested multinomial expansion: first over
//! the counts `P_m` of each derivative order, then over how each `P_m`
//! spreads across slices. Gaussian moments come from the integration-by-parts
//! recursion `⟨y_i f⟩ = Σ_j C_ij ⟨∂_j f⟩` with `C = iħB⁻¹`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::factorial;
use crate::potential::PotentialModel;

/// Lattice data: `V^{(m)}` at each slice of the classical path.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLattice {
    pub mass: f64,
    pub hbar: f64,
    pub epsilon: f64,
    /// `derivatives[j][m]` is `V^{(m)}(x_j^cl)`, `m = 0..=max_order`.
    pub derivatives: Vec<Vec<f64>>,
}

impl TimeLattice {
    /// Samples a potential at the interior path points `x_1..x_n`.
    pub fn from_potential(
        potential: &PotentialModel,
        path_points: &[f64],
        epsilon: f64,
        max_order: usize,
    ) -> Result<Self> {
        if path_points.is_empty() || !(epsilon > 0.0) {
            return Err(Error::InvalidInput(
                "lattice needs at least one slice and a positive step".into(),
            ));
        }
        let derivatives = path_points
            .iter()
            .map(|&x| (0..=max_order).map(|m| potential.derivative(m, x)).collect())
            .collect();
        Ok(Self {
            mass: potential.mass(),
            hbar: potential.hbar(),
            epsilon,
            derivatives,
        })
    }

    pub fn slices(&self) -> usize {
        self.derivatives.len()
    }

    /// `V^{(m)}` at slice `j`, zero beyond the stored order.
    pub fn derivative(&self, j: usize, m: usize) -> f64 {
        self.derivatives[j].get(m).copied().unwrap_or(0.0)
    }

    /// The real symmetric tridiagonal form `B`, dense.
    pub fn quadratic_form(&self) -> Vec<Vec<f64>> {
        let n = self.slices();
        let (m, e) = (self.mass, self.epsilon);
        let mut b = vec![vec![0.0; n]; n];
        for j in 0..n {
            b[j][j] = 2.0 * m / e - e * self.derivative(j, 2);
            if j + 1 < n {
                b[j][j + 1] = -m / e;
                b[j + 1][j] = -m / e;
            }
        }
        b
    }

    /// Covariance `C = iħB⁻¹` of the fluctuation weight.
    pub fn covariance(&self) -> Result<Vec<Vec<Complex64>>> {
        let inv = invert(&self.quadratic_form())?;
        Ok(inv
            .into_iter()
            .map(|row| row.into_iter().map(|v| Complex64::new(0.0, self.hbar * v)).collect())
            .collect())
    }
}

/// Gauss–Jordan inverse with partial pivoting. Lattices here are tiny.
fn invert(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap_or(col);
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::InvalidInput("singular lattice quadratic form".into()));
        }
        m.swap(col, piv);
        let p = m[col][col];
        for v in m[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= f * m[col][c];
                    }
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Memoised Gaussian moments `⟨Π y_j^{e_j}⟩` by integration by parts.
pub struct MomentTable {
    cov: Vec<Vec<Complex64>>,
    memo: HashMap<Vec<u32>, Complex64>,
}

impl MomentTable {
    pub fn new(cov: Vec<Vec<Complex64>>) -> Self {
        Self {
            cov,
            memo: HashMap::new(),
        }
    }

    pub fn moment(&mut self, exps: &[u32]) -> Complex64 {
        let total: u32 = exps.iter().sum();
        if total == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if total % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        if let Some(v) = self.memo.get(exps) {
            return *v;
        }
        let i = exps.iter().position(|&e| e > 0).unwrap_or(0);
        let mut rest = exps.to_vec();
        rest[i] -= 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..rest.len() {
            if rest[j] == 0 {
                continue;
            }
            let mult = rest[j] as f64;
            let c = self.cov[i][j];
            let mut next = rest.clone();
            next[j] -= 1;
            acc += c * mult * self.moment(&next);
        }
        self.memo.insert(exps.to_vec(), acc);
        acc
    }
}

/// All vectors of `parts` non-negative integers summing to `total`.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut tail in compositions(total - first, parts - 1) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// The order-k lattice term over derivative orders `orders`, by the nested
/// multinomial expansion.
pub fn lattice_term_multinomial(lattice: &TimeLattice, k: usize, orders: &[usize]) -> Result<Complex64> {
    if orders.iter().any(|&m| m < 3) {
        return Err(Error::InvalidInput("derivative orders start at 3".into()));
    }
    let n = lattice.slices();
    let mut moments = MomentTable::new(lattice.covariance()?);
    let mut total = Complex64::new(0.0, 0.0);
    for p in compositions(k as u32, orders.len()) {
        // k!/ΠP_m! · Π 1/m!^{P_m}
        let mut outer = factorial(k);
        for (&pm, &m) in p.iter().zip(orders) {
            outer /= factorial(pm as usize) * factorial(m).powi(pm as i32);
        }
        // Each P_m splits over slices independently; walk the product.
        let splits: Vec<Vec<Vec<u32>>> = p.iter().map(|&pm| compositions(pm, n)).collect();
        let mut idx = vec![0usize; orders.len()];
        loop {
            let mut coeff = outer;
            let mut exps = vec![0u32; n];
            for (a, &m) in orders.iter().enumerate() {
                let l = &splits[a][idx[a]];
                coeff *= factorial(p[a] as usize);
                for j in 0..n {
                    coeff /= factorial(l[j] as usize);
                    coeff *= lattice.derivative(j, m).powi(l[j] as i32);
                    exps[j] += m as u32 * l[j];
                }
            }
            if coeff != 0.0 {
                total += coeff * moments.moment(&exps);
            }
            // advance the mixed-radix counter
            let mut a = 0;
            while a < idx.len() {
                idx[a] += 1;
                if idx[a] < splits[a].len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == idx.len() {
                break;
            }
        }
    }
    let pref = Complex64::new(0.0, -lattice.epsilon / lattice.hbar).powi(k as i32) / factorial(k);
    Ok(pref * total)
}
