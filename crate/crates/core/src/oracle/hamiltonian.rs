//! Finite-difference Hamiltonian on a hard-walled grid, its spectrum, and
//! spectral synthesis of propagators.
//!
//! The walls sit one spacing outside the first and last grid points, so
//! every grid point is an interior unknown.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{GridSpec, WavefunctionGrid};
use crate::potential::PotentialModel;

/// Symmetric tridiagonal `H = −ħ²/2M ∂ₓ² + V` with a three-point Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHamiltonian {
    pub grid: GridSpec,
    pub mass: f64,
    pub hbar: f64,
    pub diagonal: Vec<f64>,
    pub off_diagonal: f64,
}

impl GridHamiltonian {
    pub fn new(potential: &PotentialModel, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let (m, hbar) = (potential.mass(), potential.hbar());
        let kin = hbar * hbar / (2.0 * m * grid.dx() * grid.dx());
        let diagonal = (0..grid.n_points).map(|i| potential.value(grid.x(i)) + 2.0 * kin).collect();
        Ok(Self { grid, mass: m, hbar, diagonal, off_diagonal: -kin })
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    /// `Hψ` for a complex vector.
    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let n = psi.len();
        let e = self.off_diagonal;
        (0..n)
            .map(|i| {
                let mut acc = self.diagonal[i] * psi[i];
                if i > 0 {
                    acc += e * psi[i - 1];
                }
                if i + 1 < n {
                    acc += e * psi[i + 1];
                }
                acc
            })
            .collect()
    }

    /// Gershgorin bound on `‖H‖`.
    pub fn norm_bound(&self) -> f64 {
        self.diagonal.iter().fold(0.0f64, |a, d| a.max(d.abs())) + 2.0 * self.off_diagonal.abs()
    }

    /// Full eigendecomposition.
    pub fn eigen(&self) -> Result<SpectralDecomposition> {
        let n = self.len();
        let mut d = self.diagonal.clone();
        let mut e = vec![self.off_diagonal; n];
        e[n - 1] = 0.0;
        ql_eigenvalues(&mut d, &mut e)?;
        d.sort_by(f64::total_cmp);
        let vectors = inverse_iteration(&self.diagonal, self.off_diagonal, &d, self.norm_bound())?;
        Ok(SpectralDecomposition { grid: self.grid, hbar: self.hbar, values: d, vectors })
    }
}

/// Implicit QL with Wilkinson-style shifts on a symmetric tridiagonal
/// matrix; `e[i]` couples `d[i]` and `d[i+1]`. Eigenvalues land in `d`.
fn ql_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenFailure(format!("QL did not converge at index {l}")));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// LU with partial pivoting of `T − λ` for constant off-diagonal `e`.
struct ShiftedLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(diag: &[f64], e: f64, lambda: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - lambda).collect();
        let mut du = vec![e; n.saturating_sub(1)];
        let mut dl = vec![e; n.saturating_sub(1)];
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { d, du, du2, dl, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    s
}

/// Eigenvectors by inverse iteration; vectors whose eigenvalues sit within
/// a cluster gap are re-orthogonalized against each other.
fn inverse_iteration(diag: &[f64], e: f64, values: &[f64], norm: f64) -> Result<Vec<Vec<f64>>> {
    let n = diag.len();
    let cluster_gap = 1e-5 * norm;
    let tiny = f64::EPSILON * norm;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut cluster_start = 0;
    for (j, &lambda) in values.iter().enumerate() {
        if j > 0 && lambda - values[j - 1] > cluster_gap {
            cluster_start = j;
        }
        // deterministic, non-special start vector
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7 + j * 13) as f64 * 0.618_033_988_7).sin()).collect();
        normalize(&mut x);
        let lu = ShiftedLu::new(diag, e, lambda, tiny);
        for _ in 0..4 {
            lu.solve(&mut x);
            for prev in &vectors[cluster_start..j] {
                let dot: f64 = x.iter().zip(prev).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
            }
            normalize(&mut x);
        }
        // residual check
        let res = (0..n)
            .map(|i| {
                let mut hx = (diag[i] - lambda) * x[i];
                if i > 0 {
                    hx += e * x[i - 1];
                }
                if i + 1 < n {
                    hx += e * x[i + 1];
                }
                hx.abs()
            })
            .fold(0.0f64, f64::max);
        if !(res <= 1e-8 * norm) {
            return Err(Error::EigenFailure(format!("eigenvector {j} residual {res:e}")));
        }
        // sign convention: the largest component is positive
        let big = x.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if big < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        vectors.push(x);
    }
    Ok(vectors)
}

/// Eigenpairs of a [`GridHamiltonian`], ascending, with orthonormal vectors
/// in the discrete inner product `Σᵢ uᵢvᵢ`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub grid: GridSpec,
    pub hbar: f64,
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SpectralDecomposition {
    /// `e^{−iHt/ħ}ψ₀` by spectral synthesis.
    pub fn evolve(&self, psi0: &WavefunctionGrid, duration: f64) -> Result<WavefunctionGrid> {
        if psi0.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.values.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (e, v) in self.values.iter().zip(&self.vectors) {
            let c: Complex64 = v.iter().zip(&psi0.values).map(|(a, b)| a * b).sum();
            let c = c * Complex64::from_polar(1.0, -e * duration / self.hbar);
            out.iter_mut().zip(v).for_each(|(o, a)| *o += c * a);
        }
        WavefunctionGrid::new(self.grid, out, psi0.time + duration)
    }

    /// `K(xᵢ, t; x_j, 0) = Σₙ φₙ(xᵢ)φₙ(x_j)e^{−iEₙt/ħ}/dx`.
    pub fn propagator_column(&self, x0_index: usize, duration: f64) -> Result<Vec<Complex64>> {
        if x0_index >= self.values.len() {
            return Err(Error::InvalidInput(format!("x0 index {x0_index} out of range")));
        }
        let dx = self.grid.dx();
        let n = self.values.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (e, v) in self.values.iter().zip(&self.vectors) {
            let c = Complex64::from_polar(v[x0_index] / dx, -e * duration / self.hbar);
            out.iter_mut().zip(v).for_each(|(o, a)| *o += c * a);
        }
        Ok(out)
    }

    /// Propagator applied to a normalized Gaussian of width `sigma` centred
    /// on grid point `x0_index`. Cuts off the high-lying grid modes that the
    /// bare column resolves poorly.
    pub fn smoothed_column(&self, x0_index: usize, sigma: f64, duration: f64) -> Result<WavefunctionGrid> {
        if x0_index >= self.values.len() || !(sigma > 0.0) {
            return Err(Error::InvalidInput("bad smoothing request".into()));
        }
        let x0 = self.grid.x(x0_index);
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).sqrt().recip();
        let delta = WavefunctionGrid::from_fn(self.grid, 0.0, |x| {
            Complex64::new(norm * (-(x - x0) * (x - x0) / (2.0 * sigma * sigma)).exp(), 0.0)
        })?;
        self.evolve(&delta, duration)
    }

    /// Size of the spectral tail of `psi`: weight in modes above `energy`.
    pub fn tail_weight(&self, psi: &WavefunctionGrid, energy: f64) -> f64 {
        let total: f64 = psi.values.iter().map(|c| c.norm_sqr()).sum();
        let tail: f64 = self
            .values
            .iter()
            .zip(&self.vectors)
            .filter(|(e, _)| **e > energy)
            .map(|(_, v)| v.iter().zip(&psi.values).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr())
            .sum();
        (tail / total).sqrt()
    }
}

/// Spectral propagator column at grid index `x0_index`.
pub fn exact_propagator_column(
    potential: &PotentialModel,
    grid: GridSpec,
    x0_index: usize,
    duration: f64,
) -> Result<Vec<Complex64>> {
    GridHamiltonian::new(potential, grid)?.eigen()?.propagator_column(x0_index, duration)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(n: usize, half: f64) -> (GridHamiltonian, SpectralDecomposition) {
        let v = PotentialModel::harmonic(1.0, 1.0, 1.0).unwrap();
        let h = GridHamiltonian::new(&v, GridSpec::new(-half, half, n).unwrap()).unwrap();
        let s = h.eigen().unwrap();
        (h, s)
    }

    #[test]
    fn small_matrix_matches_closed_form() {
        // pure Laplacian: λ_k = 2kin(1 − cos(kπ/(n+1)))
        let v = PotentialModel::free(1.0, 1.0).unwrap();
        let h = GridHamiltonian::new(&v, GridSpec::new(0.0, 1.0, 9).unwrap()).unwrap();
        let s = h.eigen().unwrap();
        let kin = -h.off_diagonal;
        for (k, e) in s.values.iter().enumerate() {
            let exact = 2.0 * kin * (1.0 - ((k + 1) as f64 * std::f64::consts::PI / 10.0).cos());
            assert!((e - exact).abs() < 1e-10 * exact, "{k}: {e} vs {exact}");
        }
    }

    #[test]
    fn harmonic_levels_and_orthonormality() {
        let (_, s) = harmonic(1024, 10.0);
        for k in 0..5 {
            assert!((s.values[k] - (k as f64 + 0.5)).abs() < 1e-3, "{k}: {}", s.values[k]);
        }
        for a in [0, 1, 7, 500, 1023] {
            for b in [0, 1, 7, 500, 1023] {
                let dot: f64 = s.vectors[a].iter().zip(&s.vectors[b]).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-9, "{a},{b}: {dot}");
            }
        }
        // ground state nodeless
        assert!(s.vectors[0].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn double_well_lowest_pair_is_nearly_degenerate() {
        let v = PotentialModel::new(vec![0.0, 0.0, -4.0, 0.0, 0.5], 1.0, 1.0).unwrap();
        let h = GridHamiltonian::new(&v, GridSpec::new(-5.0, 5.0, 1024).unwrap()).unwrap();
        let s = h.eigen().unwrap();
        let split = s.values[1] - s.values[0];
        let spacing = s.values[2] - s.values[1];
        assert!(split > 0.0 && split < 0.05 * spacing, "split {split}, spacing {spacing}");
    }

    #[test]
    fn zero_time_column_is_a_delta() {
        let (_, s) = harmonic(256, 8.0);
        let col = s.propagator_column(100, 0.0).unwrap();
        let dx = s.grid.dx();
        for (i, c) in col.iter().enumerate() {
            let want = if i == 100 { 1.0 / dx } else { 0.0 };
            assert!((c - want).norm() < 1e-9 / dx, "{i}: {c}");
        }
    }

    #[test]
    fn column_matches_harmonic_kernel() {
        let (_, s) = harmonic(4096, 10.0);
        let j = 1700;
        let x0 = s.grid.x(j);
        let t = 1.0;
        // a narrow smoothed delta matches the convolution of the analytic
        // kernel with the same Gaussian, which is itself a Gaussian
        let sigma = 0.4;
        let col = s.smoothed_column(j, sigma, t).unwrap();
        let g = super::super::AnalyticGaussian {
            mass: 1.0,
            hbar: 1.0,
            omega_sq: 1.0,
            alpha: sigma,
            center: x0,
            momentum: 0.0,
            amplitude: (2.0 * std::f64::consts::PI * sigma * sigma).sqrt().recip(),
        };
        let mut worst = 0.0f64;
        let peak = col.values.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        for (i, x) in s.grid.xs().into_iter().enumerate() {
            if x.abs() < 6.0 {
                worst = worst.max((col.values[i].norm() - g.value(x, t).norm()).abs() / peak);
            }
        }
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn spectral_evolution_is_unitary() {
        let (_, s) = harmonic(512, 8.0);
        let g = super::super::AnalyticGaussian::normalized(1.0, 1.0, 1.0, 1.0, 2.0, 0.0);
        let psi = g.sample(s.grid, 0.0).unwrap();
        let out = s.evolve(&psi, 3.7).unwrap();
        assert!((out.norm() - psi.norm()).abs() < 1e-12);
    }
}
