//! Wave packets on uniform grids and the Green's-function convolution
//! `ψ(x_t, t) = ∫ K(x_t, t; x₀, 0) ψ₀(x₀) dx₀`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::parallel::Execution;

/// Uniform grid metadata: `n_points` nodes from `x_min` to `x_max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        let g = Self {
            x_min,
            x_max,
            n_points,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_max > self.x_min) {
            return Err(Error::InvalidInput(format!(
                "grid bounds [{}, {}] are not increasing",
                self.x_min, self.x_max
            )));
        }
        if self.n_points < 3 {
            return Err(Error::InvalidInput("a grid needs at least 3 points".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + self.dx() * i as f64
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same grid with half the spacing.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }
}

/// Complex amplitudes on a uniform grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WavefunctionGrid {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, time: f64) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n_points {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            x_min: grid.x_min,
            x_max: grid.x_max,
            n_points: grid.n_points,
            values,
            time,
        })
    }

    /// Samples `f` on the grid.
    pub fn from_fn(grid: GridSpec, time: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.xs().into_iter().map(f).collect();
        Self::new(grid, values, time)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            x_min: self.x_min,
            x_max: self.x_max,
            n_points: self.n_points,
        }
    }

    pub fn dx(&self) -> f64 {
        self.grid().dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.grid().xs()
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `Σ|ψ|²·dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit `Σ|ψ|²·dx`.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            for v in &mut self.values {
                *v /= n;
            }
        }
        self
    }

    /// `(Σ|ψ−φ|²·dx)^{1/2}`; the grids must coincide.
    pub fn l2_distance(&self, other: &WavefunctionGrid) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.dx()).sqrt())
    }

    pub fn same_grid(&self, other: &WavefunctionGrid) -> bool {
        self.n_points == other.n_points
            && (self.x_min - other.x_min).abs() <= 1e-12 * self.dx()
            && (self.x_max - other.x_max).abs() <= 1e-12 * self.dx()
    }

    /// `|ψ|` at the two edge nodes relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = self.values[0].norm().max(self.values[self.n_points - 1].norm());
        edge / peak
    }

    /// `∫_{x ≥ x_split} |ψ|² dx` by the trapezoid rule, with the cell that
    /// contains `x_split` split linearly.
    pub fn probability_right_of(&self, x_split: f64) -> f64 {
        let rho = self.density();
        let g = self.grid();
        let dx = g.dx();
        let mut p = 0.0;
        for i in 0..self.n_points - 1 {
            let (xa, xb) = (g.x(i), g.x(i + 1));
            if xb <= x_split {
                continue;
            }
            if xa >= x_split {
                p += 0.5 * (rho[i] + rho[i + 1]) * dx;
            } else {
                let u = (x_split - xa) / dx;
                let r_split = rho[i] + u * (rho[i + 1] - rho[i]);
                p += 0.5 * (r_split + rho[i + 1]) * (xb - x_split);
            }
        }
        p
    }
}

/// Initial Gaussian `(1/√(2πα²))·exp(−(x−l)²/2α²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacketSpec {
    pub alpha: f64,
    pub center_l: f64,
    /// Rescale to unit `Σ|ψ|²·dx` after sampling. The bare prefactor
    /// normalises `∫ψ dx`, not `∫|ψ|² dx`.
    pub renormalize: bool,
}

impl GaussianPacketSpec {
    /// `α = 0.4`, `l = −3.126`, bare prefactor.
    pub const TUNNELING: GaussianPacketSpec = GaussianPacketSpec {
        alpha: 0.4,
        center_l: -3.126,
        renormalize: false,
    };

    pub fn value(&self, x: f64) -> f64 {
        let d = x - self.center_l;
        (-d * d / (2.0 * self.alpha * self.alpha)).exp() / (2.0 * PI * self.alpha * self.alpha).sqrt()
    }
}

/// Relative edge amplitude above which a grid counts as too narrow.
pub const EDGE_TOLERANCE: f64 = 1e-12;

/// Samples the packet; fails if it has not decayed to `1e-12` of its peak at
/// both edges.
pub fn gaussian_packet(spec: &GaussianPacketSpec, grid: GridSpec) -> Result<WavefunctionGrid> {
    grid.validate()?;
    if !(spec.alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {}", spec.alpha)));
    }
    let peak = spec.value(spec.center_l);
    let ratio = spec.value(grid.x_min).max(spec.value(grid.x_max)) / peak;
    if ratio >= EDGE_TOLERANCE {
        return Err(Error::GridTooNarrow { ratio });
    }
    let psi = WavefunctionGrid::from_fn(grid, 0.0, |x| Complex64::new(spec.value(x), 0.0))?;
    Ok(if spec.renormalize { psi.normalized() } else { psi })
}

/// Settings for [`propagate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    /// Input nodes with `|ψ₀| ≤ support_cut·max|ψ₀|` are skipped.
    pub support_cut: f64,
    pub execution: Execution,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            support_cut: 1e-12,
            execution: Execution::default(),
        }
    }
}

/// Trapezoid-rule convolution of `kernel(x0, xt, duration)` with `psi0`
/// on every node of `out_grid`.
pub fn propagate<K>(
    kernel: K,
    psi0: &WavefunctionGrid,
    duration: f64,
    out_grid: GridSpec,
    options: PropagateOptions,
) -> Result<WavefunctionGrid>
where
    K: Fn(f64, f64, f64) -> Result<Complex64> + Sync + Send,
{
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {duration}")));
    }
    out_grid.validate()?;
    let ratio = psi0.edge_ratio();
    if ratio >= EDGE_TOLERANCE {
        return Err(Error::GridTooNarrow { ratio });
    }
    let dx = psi0.dx();
    let peak = psi0.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let cut = options.support_cut * peak;
    let last = psi0.n_points - 1;
    // (x₀, trapezoid weight · ψ₀) on the support window
    let support: Vec<(f64, Complex64)> = psi0
        .xs()
        .into_iter()
        .zip(&psi0.values)
        .enumerate()
        .filter(|(_, (_, v))| v.norm() > cut)
        .map(|(i, (x, v))| {
            let w = if i == 0 || i == last { 0.5 * dx } else { dx };
            (x, v * w)
        })
        .collect();
    let values = options.execution.try_map_range(out_grid.n_points, |j| {
        let xt = out_grid.x(j);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(x0, wpsi) in &support {
            acc += kernel(x0, xt, duration)? * wpsi;
        }
        Ok(acc)
    })?;
    WavefunctionGrid::new(out_grid, values, psi0.time + duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{free_kernel, harmonic_kernel};

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(-8.0, 8.0, n).unwrap()
    }

    /// Free evolution of the unnormalised Gaussian `exp(−(x−l)²/2α²)`:
    /// `√(α²/σ²)·exp(−(x−l)²/2σ²)` with `σ² = α² + iħt/M`.
    fn free_gaussian(alpha: f64, l: f64, t: f64, x: f64) -> Complex64 {
        let s2 = Complex64::new(alpha * alpha, t);
        let d = x - l;
        (alpha * alpha / s2).sqrt() * (-d * d / (2.0 * s2)).exp()
    }

    #[test]
    fn packet_peak_and_symmetry() {
        let spec = GaussianPacketSpec::TUNNELING;
        let g = GridSpec::new(-8.0, 8.0, 1024).unwrap();
        let psi = gaussian_packet(&spec, g).unwrap();
        assert!((spec.value(-3.126) - 1.0 / (2.0 * PI * 0.16f64).sqrt()).abs() < 1e-15);
        let peak = psi.values.iter().map(|v| v.re).fold(0.0, f64::max);
        assert!(peak <= spec.value(-3.126));
        for d in [0.1, 0.37, 1.2] {
            let (a, b) = (spec.value(-3.126 + d), spec.value(-3.126 - d));
            assert!((a - b).abs() <= 1e-14 * a);
        }
        // bare prefactor: ∫|ψ|² = 1/(2α√π)
        assert!((psi.norm_sqr() - 1.0 / (2.0 * 0.4 * PI.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn renormalized_packet_has_unit_norm() {
        let spec = GaussianPacketSpec {
            renormalize: true,
            ..GaussianPacketSpec::TUNNELING
        };
        let psi = gaussian_packet(&spec, grid(1024)).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let r = gaussian_packet(&GaussianPacketSpec::TUNNELING, GridSpec::new(-5.0, 5.0, 512).unwrap());
        assert!(matches!(r, Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn free_spreading_matches_analytic() {
        let spec = GaussianPacketSpec {
            alpha: 0.5,
            center_l: -1.0,
            renormalize: false,
        };
        let g = GridSpec::new(-12.0, 12.0, 2048).unwrap();
        let psi0 = gaussian_packet(&spec, g).unwrap();
        let t = 0.8;
        let out = propagate(
            |x0, xt, d| free_kernel(1.0, 1.0, x0, xt, d),
            &psi0,
            t,
            g,
            PropagateOptions::default(),
        )
        .unwrap();
        let pre = 1.0 / (2.0 * PI * 0.25f64).sqrt();
        let peak = out.density().into_iter().fold(0.0, f64::max);
        for (i, x) in g.xs().into_iter().enumerate() {
            let exact = (free_gaussian(0.5, -1.0, t, x) * pre).norm_sqr();
            if exact > 1e-3 * peak {
                let got = out.values[i].norm_sqr();
                assert!((got - exact).abs() < 1e-4 * exact, "x {x}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn short_time_is_close_to_identity() {
        // The trapezoid sum over a chirped kernel returns copies of ψ(t)
        // shifted by 2πħt/(M·dx); the window is chosen so the first copy
        // lands outside it.
        let spec = GaussianPacketSpec {
            alpha: 0.25,
            center_l: 0.0,
            renormalize: true,
        };
        let g = GridSpec::new(-1.9, 1.9, 2048).unwrap();
        let psi0 = gaussian_packet(&spec, g).unwrap();
        let out = propagate(
            |x0, xt, d| free_kernel(1.0, 1.0, x0, xt, d),
            &psi0,
            1e-3,
            g,
            PropagateOptions::default(),
        )
        .unwrap();
        assert!(out.l2_distance(&psi0).unwrap() < 1e-2);
    }

    #[test]
    fn coherent_state_oscillates_rigidly() {
        let l = 1.5;
        let spec = GaussianPacketSpec {
            alpha: 1.0,
            center_l: l,
            renormalize: true,
        };
        let g = GridSpec::new(-10.0, 10.0, 2048).unwrap();
        let psi0 = gaussian_packet(&spec, g).unwrap();
        let w = Complex64::new(1.0, 0.0);
        for t in [0.4, 1.3, 2.5] {
            let out = propagate(
                |x0, xt, d| harmonic_kernel(1.0, w, 1.0, x0, xt, d),
                &psi0,
                t,
                g,
                PropagateOptions::default(),
            )
            .unwrap();
            let c = l * f64::cos(t);
            for (i, x) in g.xs().into_iter().enumerate() {
                let exact = (-(x - c) * (x - c)).exp() / PI.sqrt();
                assert!((out.values[i].norm_sqr() - exact).abs() < 1e-4, "t {t} x {x}");
            }
            assert!((out.norm() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn composition_of_exact_kernels() {
        let spec = GaussianPacketSpec {
            alpha: 0.7,
            center_l: 0.8,
            renormalize: true,
        };
        let g = GridSpec::new(-10.0, 10.0, 2048).unwrap();
        let psi0 = gaussian_packet(&spec, g).unwrap();
        let w = Complex64::new(1.0, 0.0);
        let k = |x0: f64, xt: f64, d: f64| harmonic_kernel(1.0, w, 1.0, x0, xt, d);
        let opts = PropagateOptions::default();
        let direct = propagate(k, &psi0, 1.1, g, opts).unwrap();
        let half = propagate(k, &psi0, 0.5, g, opts).unwrap();
        let two = propagate(k, &half, 0.6, g, opts).unwrap();
        assert!(direct.l2_distance(&two).unwrap() < 1e-3);
    }

    #[test]
    fn right_probability_of_symmetric_density() {
        let spec = GaussianPacketSpec {
            alpha: 0.6,
            center_l: 0.0,
            renormalize: true,
        };
        let psi = gaussian_packet(&spec, grid(1025)).unwrap();
        assert!((psi.probability_right_of(0.0) - 0.5).abs() < 1e-12);
        assert!((psi.probability_right_of(0.0013) - 0.5).abs() < 1e-2);
    }

    #[test]
    fn kernel_errors_propagate() {
        let psi0 = gaussian_packet(&GaussianPacketSpec::TUNNELING, grid(256)).unwrap();
        let r = propagate(
            |_, _, _| Err(Error::NearCaustic { phi: "pi".into(), sin_modulus: 0.0 }),
            &psi0,
            1.0,
            grid(256),
            PropagateOptions::default(),
        );
        assert!(matches!(r, Err(Error::NearCaustic { .. })));
    }
}
