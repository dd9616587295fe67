//! Crank–Nicolson (Cayley) time stepping with hard walls.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::WavefunctionGrid;
use crate::oracle::hamiltonian::GridHamiltonian;
use crate::potential::PotentialModel;

/// Edge amplitude, relative to the peak, above which the walls are deemed
/// to have been felt.
pub const CONTAMINATION_LIMIT: f64 = 1e-6;

pub const DEFAULT_DT: f64 = 1e-4;

/// Precomputed Thomas factorization of `1 + iτH`, `τ = dt/2ħ`.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    ham: GridHamiltonian,
    dt: f64,
    tau: f64,
    // modified super-diagonal and inverse pivots
    c_prime: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(potential: &PotentialModel, grid: crate::evolve::GridSpec, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput("dt must be positive".into()));
        }
        let ham = GridHamiltonian::new(potential, grid)?;
        let tau = dt / (2.0 * ham.hbar);
        let n = ham.len();
        let off = Complex64::new(0.0, tau * ham.off_diagonal);
        let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
        let mut prev_c = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let diag = Complex64::new(1.0, tau * ham.diagonal[i]);
            let pivot = diag - off * prev_c;
            inv_pivot[i] = pivot.inv();
            prev_c = off * inv_pivot[i];
            c_prime[i] = prev_c;
        }
        Ok(Self { ham, dt, tau, c_prime, inv_pivot })
    }

    pub fn hamiltonian(&self) -> &GridHamiltonian {
        &self.ham
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One Cayley step in place; `scratch` must match the grid length.
    pub fn step(&self, psi: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = psi.len();
        let it = Complex64::new(0.0, self.tau);
        let off = it * self.ham.off_diagonal;
        // right-hand side (1 − iτH)ψ
        for i in 0..n {
            let mut hpsi = self.ham.diagonal[i] * psi[i];
            if i > 0 {
                hpsi += self.ham.off_diagonal * psi[i - 1];
            }
            if i + 1 < n {
                hpsi += self.ham.off_diagonal * psi[i + 1];
            }
            scratch[i] = psi[i] - it * hpsi;
        }
        // forward sweep
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            prev = (scratch[i] - off * prev) * self.inv_pivot[i];
            scratch[i] = prev;
        }
        // back substitution
        psi[n - 1] = scratch[n - 1];
        for i in (0..n - 1).rev() {
            psi[i] = scratch[i] - self.c_prime[i] * psi[i + 1];
        }
    }

    /// Evolves `psi0` and records a copy after every `record_every` steps,
    /// plus the final state. Checks wall contamination at each record.
    pub fn run(&self, psi0: &WavefunctionGrid, steps: usize, record_every: usize) -> Result<Vec<WavefunctionGrid>> {
        if psi0.grid() != self.ham.grid {
            return Err(Error::GridMismatch);
        }
        let record_every = record_every.max(1);
        let mut psi = psi0.values.clone();
        let mut scratch = psi.clone();
        let mut out = Vec::with_capacity(steps / record_every + 1);
        for s in 1..=steps {
            self.step(&mut psi, &mut scratch);
            if s % record_every == 0 || s == steps {
                let t = psi0.time + s as f64 * self.dt;
                let snap = WavefunctionGrid::new(self.ham.grid, psi.clone(), t)?;
                check_walls(&snap)?;
                out.push(snap);
            }
        }
        Ok(out)
    }
}

fn check_walls(psi: &WavefunctionGrid) -> Result<()> {
    let ratio = psi.edge_ratio();
    if ratio > CONTAMINATION_LIMIT {
        return Err(Error::BoundaryContamination { ratio, t: psi.time });
    }
    Ok(())
}

/// Evolves `psi0` through `duration` with steps no longer than `dt`.
pub fn crank_nicolson_evolve(
    potential: &PotentialModel,
    psi0: &WavefunctionGrid,
    duration: f64,
    dt: f64,
) -> Result<WavefunctionGrid> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidInput("duration must be non-negative".into()));
    }
    let steps = (duration / dt).ceil() as usize;
    if steps == 0 {
        return Ok(psi0.clone());
    }
    let cn = CrankNicolson::new(potential, psi0.grid(), duration / steps as f64)?;
    let mut out = cn.run(psi0, steps, steps)?;
    Ok(out.pop().expect("one record"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::GridSpec;
    use crate::oracle::AnalyticGaussian;

    #[test]
    fn norm_is_preserved() {
        let v = PotentialModel::new(vec![0.0, 0.3, -1.0, 0.0, 0.1], 1.0, 1.0).unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 1024).unwrap();
        let g = AnalyticGaussian::normalized(1.0, 1.0, 0.0, 0.7, -1.0, 0.5);
        let psi = g.sample(grid, 0.0).unwrap();
        let cn = CrankNicolson::new(&v, grid, 1e-3).unwrap();
        let out = cn.run(&psi, 10_000, 10_000).unwrap();
        assert!((out[0].norm() - psi.norm()).abs() < 1e-10);
    }

    #[test]
    fn coherent_state_center() {
        let v = PotentialModel::harmonic(1.0, 1.0, 1.0).unwrap();
        let grid = GridSpec::new(-8.0, 8.0, 2048).unwrap();
        let l = 1.5;
        let g = AnalyticGaussian::normalized(1.0, 1.0, 1.0, 1.0, l, 0.0);
        let psi = g.sample(grid, 0.0).unwrap();
        let cn = CrankNicolson::new(&v, grid, 1e-4).unwrap();
        for snap in cn.run(&psi, 20_000, 5_000).unwrap() {
            let xs = grid.xs();
            let mean: f64 = snap.density().iter().zip(&xs).map(|(r, x)| r * x).sum::<f64>() * grid.dx();
            assert!((mean - l * snap.time.cos()).abs() < 1e-4, "t {}: {mean}", snap.time);
        }
    }

    #[test]
    fn matches_spectral_evolution() {
        let v = PotentialModel::new(vec![0.0, 0.0, -1.0, 0.0, 0.05], 1.0, 1.0).unwrap();
        let grid = GridSpec::new(-8.0, 8.0, 512).unwrap();
        let g = AnalyticGaussian::normalized(1.0, 1.0, 0.0, 0.6, -2.0, 0.0);
        let psi = g.sample(grid, 0.0).unwrap();
        let cn = crank_nicolson_evolve(&v, &psi, 0.5, 2.5e-5).unwrap();
        let spec = GridHamiltonian::new(&v, grid).unwrap().eigen().unwrap().evolve(&psi, 0.5).unwrap();
        assert!(cn.l2_distance(&spec).unwrap() < 1e-6);
    }

    #[test]
    fn walls_are_detected() {
        let v = PotentialModel::free(1.0, 1.0).unwrap();
        let grid = GridSpec::new(-3.0, 3.0, 256).unwrap();
        let g = AnalyticGaussian::normalized(1.0, 1.0, 0.0, 0.3, 0.0, 0.0);
        let psi = g.sample(grid, 0.0).unwrap();
        let err = crank_nicolson_evolve(&v, &psi, 2.0, 1e-3).unwrap_err();
        assert_eq!(err.name(), "BoundaryContamination");
    }
}
