//! The acceptance suite: one check per criterion, each timed against its
//! budget. Shared by `qfd verify` and the `acceptance` test target.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qfd_core::classical::{
    bare_frequency, fit_boundary_constants, lindstedt_path, solve_bvp_shooting, PathSource, ShootingOptions,
};
use qfd_core::evolve::{propagate, GridSpec, PropagateOptions, WavefunctionGrid};
use qfd_core::kernel::lattice::{lattice_term_multinomial, TimeLattice};
use qfd_core::kernel::{free_kernel, harmonic_kernel, kernel_series, KernelParams};
use qfd_core::madelung::{continuity_residual, decompose, gradient, max_abs, MadelungFields, MadelungOptions};
use qfd_core::oracle::{lattice_term_brute_force, AnalyticGaussian, CrankNicolson};
use qfd_core::potential::{DoubleWell, PotentialModel};
use qfd_core::trajectories::{integrate_trajectories, TrajectoryOptions};
use qfd_core::{Complex64, Execution};

use crate::commands;
use crate::config::{FieldSource, RunConfig, SeedSampling};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// `None` when the check shares another criterion's budget.
    pub budget: Option<Duration>,
}

impl Outcome {
    pub fn line(&self) -> String {
        let budget = self.budget.map_or(String::new(), |b| format!(" of {:.0} s", b.as_secs_f64()));
        format!(
            "[{}] {} {}: {} ({:.2} s{budget})",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
        )
    }
}

/// Runs `check`, failing it if it errors or overruns `budget`.
fn timed(
    id: u8,
    name: &'static str,
    budget_s: Option<f64>,
    check: impl FnOnce() -> Result<(bool, String), CliError>,
) -> Outcome {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let budget = budget_s.map(Duration::from_secs_f64);
    let (passed, detail) = match result {
        Ok((ok, d)) if budget.is_none_or(|b| elapsed < b) => (ok, d),
        Ok((_, d)) => (false, format!("{d}; over budget")),
        Err(e) => (false, format!("error {}: {e}", e.name())),
    };
    Outcome { id, name, passed, detail, elapsed, budget }
}

fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI { PI } else { r }
}

/// 100 `(x₀, x_t)` pairs in `[−3, 3]²`, fixed seed.
fn sample_pairs() -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..100).map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect()
}

const TIMES: [f64; 3] = [0.3, 1.0, 2.0];

pub fn harmonic_exactness() -> Outcome {
    timed(1, "harmonic exactness", Some(1.0), || {
        let v = PotentialModel::harmonic(1.0, 1.0, 1.0)?;
        let params = KernelParams::default();
        let (mut worst_mod, mut worst_arg) = (0.0f64, 0.0f64);
        for &t in &TIMES {
            for &(x0, xt) in &sample_pairs() {
                let k = kernel_series(&v, x0, xt, t, &params, PathSource::Shooting)?.value;
                let exact = harmonic_kernel(1.0, Complex64::new(1.0, 0.0), 1.0, x0, xt, t)?;
                worst_mod = worst_mod.max((k.norm() - exact.norm()).abs() / exact.norm());
                worst_arg = worst_arg.max(wrap_angle(k.arg() - exact.arg()).abs());
            }
        }
        Ok((
            worst_mod < 1e-8 && worst_arg < 1e-8,
            format!("max modulus rel err {worst_mod:.2e}, max phase err {worst_arg:.2e} rad"),
        ))
    })
}

pub fn free_limit() -> Outcome {
    timed(2, "free-particle limit", Some(1.0), || {
        let v = PotentialModel::new(vec![0.0, 0.0, 1e-12], 1.0, 1.0)?;
        let params = KernelParams::default();
        let mut worst = 0.0f64;
        for &t in &TIMES {
            for &(x0, xt) in &sample_pairs() {
                let k = kernel_series(&v, x0, xt, t, &params, PathSource::Shooting)?.value;
                let f = free_kernel(1.0, 1.0, x0, xt, t)?;
                worst = worst.max((k - f).norm() / f.norm());
            }
        }
        Ok((worst < 1e-6, format!("max rel err {worst:.2e}")))
    })
}

/// `min_θ ‖a − e^{iθ}b‖` and the minimizing `θ`.
fn distance_up_to_phase(a: &WavefunctionGrid, b: &WavefunctionGrid) -> (f64, f64) {
    let overlap: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| y.conj() * x).sum::<Complex64>() * a.dx();
    let d2 = a.norm_sqr() + b.norm_sqr() - 2.0 * overlap.norm();
    (d2.max(0.0).sqrt(), overlap.arg())
}

pub fn greens_fidelity() -> Outcome {
    timed(3, "Green's-function fidelity", Some(10.0), || {
        let grid = GridSpec::new(-10.0, 10.0, 2048)?;
        let g = AnalyticGaussian::normalized(1.0, 1.0, 1.0, 1.0, 1.5, 0.0);
        let psi0 = g.sample(grid, 0.0)?;
        let w = Complex64::new(1.0, 0.0);
        let k = |a: f64, b: f64, t: f64| harmonic_kernel(1.0, w, 1.0, a, b, t);
        let opts = PropagateOptions::default();
        let half = propagate(k, &psi0, PI - 0.5, grid, opts)?;
        let full = propagate(k, &half, PI + 0.5, grid, opts)?;
        let (err, theta) = distance_up_to_phase(&full, &psi0);
        Ok((err < 1e-3, format!("L2 error {err:.2e} up to global phase {theta:.4} rad")))
    })
}

pub fn lattice_combinatorics() -> Outcome {
    timed(4, "lattice combinatorics", Some(5.0), || {
        let v = PotentialModel::new(vec![0.0, 0.0, 0.0, 0.0, 0.25], 1.0, 1.0)?;
        let mut worst = 0.0f64;
        for pts in [vec![0.4, -0.3], vec![0.4, 0.1, -0.5]] {
            let lat = TimeLattice::from_potential(&v, &pts, 0.15, 4)?;
            for orders in [vec![4], vec![3, 4]] {
                let a = lattice_term_multinomial(&lat, 2, &orders)?;
                let b = lattice_term_brute_force(&lat, 2, &orders)?;
                worst = worst.max((a - b).norm() / b.norm());
            }
        }
        Ok((worst < 1e-8, format!("max rel err {worst:.2e} over 2 and 3 slices, orders {{4}} and {{3,4}}")))
    })
}

/// Series and oracle data for the tunneling run.
pub struct TunnelingRun {
    pub times: Vec<f64>,
    pub series: Vec<WavefunctionGrid>,
    pub series_right: Vec<f64>,
    pub oracle_right: Vec<f64>,
    pub fields: Vec<MadelungFields>,
}

fn compute_tunneling(cfg: &RunConfig) -> Result<TunnelingRun, CliError> {
    let times = cfg.snapshot_times();
    let series = commands::evolve_snapshots(cfg, Execution::default())?;
    let barrier = cfg.seeds.barrier_x;
    let series_right = series.iter().map(|s| s.probability_right_of(barrier)).collect();
    let interval = cfg.time.duration / cfg.time.snapshots as f64;
    let oracle = commands::oracle_snapshots(cfg, interval, cfg.time.snapshots)?;
    let oracle_right = oracle.iter().map(|s| s.probability_right_of(barrier)).collect();
    let fields = series.iter().map(|s| commands::madelung(cfg, s)).collect::<Result<_, _>>()?;
    Ok(TunnelingRun { times, series, series_right, oracle_right, fields })
}

fn tunneling_properties(times: &[f64], p: &[f64], quarter: f64) -> (bool, bool) {
    let positive = times.iter().zip(p).filter(|(t, _)| **t > 0.1).all(|(_, v)| *v > 0.0);
    let early: Vec<f64> = times.iter().zip(p).filter(|(t, _)| **t <= quarter).map(|(_, v)| *v).collect();
    let monotone = early.len() >= 2 && early.windows(2).all(|w| w[1] > w[0]);
    (positive, monotone)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

/// Criteria 5 and 6 share one run; the returned data feeds the others.
pub fn tunneling(cfg: &RunConfig) -> (Outcome, Option<TunnelingRun>) {
    let mut run = None;
    let outcome = timed(5, "double-well tunneling", Some(120.0), || {
        let r = compute_tunneling(cfg)?;
        let quarter = 0.25 * cfg.time.duration;
        let (sp, sm) = tunneling_properties(&r.times, &r.series_right, quarter);
        let (op, om) = tunneling_properties(&r.times, &r.oracle_right, quarter);
        let diff = r
            .times
            .iter()
            .zip(r.series_right.iter().zip(&r.oracle_right))
            .filter(|(t, _)| **t <= 0.5 + 1e-12)
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max);
        let detail = format!(
            "series positive {sp} monotone {sm}; oracle positive {op} monotone {om}; max |ΔP_R| (t ≤ 0.5) {diff:.2e}; P_R series [{}] oracle [{}]",
            fmt_list(&r.series_right),
            fmt_list(&r.oracle_right)
        );
        run = Some(r);
        Ok((sp && sm && op && om && diff < 0.05, detail))
    });
    (outcome, run)
}

pub fn quantum_potential_structure(cfg: &RunConfig, run: Option<&TunnelingRun>) -> Outcome {
    timed(6, "quantum-potential structure", None, || {
        let r = run.ok_or_else(|| CliError::Config("tunneling run unavailable".into()))?;
        let d = cfg.time.duration;
        let min_left: Vec<f64> = r
            .fields
            .iter()
            .map(|f| (0..f.len()).filter(|&i| f.grid.x(i) < 0.0).map(|i| f.q[i]).fold(f64::INFINITY, f64::min))
            .collect();
        let max_grad: Vec<f64> = r.fields.iter().map(|f| max_abs(&gradient(&f.q, f.grid.dx()))).collect();
        let early: Vec<f64> = r.times.iter().zip(&min_left).filter(|(t, _)| **t <= 0.25 * d).map(|(_, q)| *q).collect();
        let negative = early.iter().all(|q| *q < 0.0);
        let deepens = early.len() >= 2 && early.windows(2).all(|w| w[1] < w[0]);
        let mean = |lo: f64, hi: f64| {
            let v: Vec<f64> = r.times.iter().zip(&max_grad).filter(|(t, _)| **t >= lo && **t <= hi).map(|(_, g)| *g).collect();
            v.iter().sum::<f64>() / v.len().max(1) as f64
        };
        let (first, last) = (mean(0.0, 0.25 * d), mean(0.75 * d, d));
        let flattens = last < first;
        Ok((
            negative && deepens && flattens,
            format!(
                "min_(x<0) Q negative {negative}, deepens {deepens} [{}]; max|∂ₓQ| first quarter {first:.3e} → last quarter {last:.3e} (flattens {flattens})",
                fmt_list(&early)
            ),
        ))
    })
}

fn residual_norm(a: &WavefunctionGrid, b: &WavefunctionGrid, dt: f64, mass: f64, hbar: f64) -> Result<f64, CliError> {
    let o = MadelungOptions::new(mass, hbar);
    Ok(max_abs(&continuity_residual(&decompose(a, &o), &decompose(b, &o), dt)?))
}

pub fn continuity(cfg: &RunConfig) -> Outcome {
    timed(7, "continuity residual", Some(60.0), || {
        // analytic free Gaussian
        let g = AnalyticGaussian::normalized(1.0, 1.0, 0.0, 0.5, -0.5, 1.0);
        let t0 = 0.5;
        let free = |grid: GridSpec, dt: f64| -> Result<f64, CliError> {
            residual_norm(&g.sample(grid, t0)?, &g.sample(grid, t0 + dt)?, dt, 1.0, 1.0)
        };
        let coarse = GridSpec::new(-10.0, 10.0, 1024)?;
        let (fa, fb) = (free(coarse, 0.01)?, free(coarse.refined(), 0.005)?);
        // Crank–Nicolson double well
        let v = cfg.potential_model()?;
        let cn = |grid: GridSpec, dt: f64| -> Result<f64, CliError> {
            let psi0 = commands::initial_state(cfg, grid)?;
            let steps = (t0 / dt).round() as usize;
            let snaps = CrankNicolson::new(&v, grid, dt)?.run(&psi0, steps + 1, 1)?;
            residual_norm(&snaps[steps - 1], &snaps[steps], dt, v.mass(), v.hbar())
        };
        let coarse = GridSpec::new(-16.0, 16.0, 2048)?;
        let (ca, cb) = (cn(coarse, 2e-3)?, cn(coarse.refined(), 1e-3)?);
        let (rf, rc) = (fa / fb, ca / cb);
        Ok((
            rf >= 3.5 && rc >= 3.5,
            format!("free Gaussian {fa:.3e} → {fb:.3e} (×{rf:.2}); CN double well {ca:.3e} → {cb:.3e} (×{rc:.2})"),
        ))
    })
}

pub fn bohmian_consistency(cfg: &RunConfig) -> Outcome {
    timed(8, "Bohmian consistency", Some(60.0), || {
        // exact harmonic fields
        let g = AnalyticGaussian::normalized(1.0, 1.0, 1.0, 0.6, 1.0, -0.5);
        let grid = GridSpec::new(-8.0, 8.0, 2048)?;
        let o = MadelungOptions::new(1.0, 1.0);
        let fields: Vec<MadelungFields> = (0..=800)
            .map(|k| g.sample(grid, 4.0 * k as f64 / 800.0).map(|p| decompose(&p, &o)))
            .collect::<Result<_, _>>()?;
        let seeds: Vec<f64> = (0..40).map(|i| -0.5 + 3.0 * i as f64 / 39.0).collect();
        let set = integrate_trajectories(&fields, &seeds, &TrajectoryOptions::default())?;
        let worst_gap = (0..set.times.len())
            .flat_map(|k| set.positions.windows(2).map(move |w| w[1][k] - w[0][k]))
            .fold(f64::INFINITY, f64::min);
        let ordered = worst_gap > -1e-6;
        // tunneling run, oracle fields, ρ₀-sampled seeds
        let mut c = cfg.clone();
        c.seeds.count = 1000;
        c.seeds.sampling = SeedSampling::Random;
        c.seeds.field_source = FieldSource::Oracle;
        let run = commands::trajectories(&c, Execution::default())?;
        let p = run.final_right_probability;
        let f = run.set.crossing_fraction();
        let sigma = (p * (1.0 - p) / 1000.0).sqrt();
        let within = (f - p).abs() <= 3.0 * sigma;
        Ok((
            ordered && within,
            format!(
                "harmonic min neighbour gap {worst_gap:.3e}; crossing fraction {f:.4} vs oracle P_R(T) {p:.4} (3σ = {:.4})",
                3.0 * sigma
            ),
        ))
    })
}

pub fn classical_cross_validation() -> Outcome {
    timed(9, "classical cross-validation", Some(1.0), || {
        let p = DoubleWell { a: 1.0, lambda: 1e-4, ..DoubleWell::TUNNELING };
        let v = PotentialModel::double_well(p)?;
        let w0 = bare_frequency(&v);
        let lk = v.quartic_strength();
        let (mut worst_ratio, mut worst_back) = (0.0f64, 0.0f64);
        for &(xi, xf, t) in &[(1.0, 2.0, 1.0), (-1.5, 0.5, 2.0), (2.0, -1.0, 0.7), (0.5, 0.5, 2.5)] {
            let c = fit_boundary_constants(xi, xf, t, w0, lk)?;
            let back_i = c.amplitude_a * c.phase_phi0.cos();
            let back_f = c.amplitude_a * (w0 * t + c.phase_phi0).cos();
            worst_back = worst_back.max((back_i - xi).norm()).max((back_f - xf).norm());
            let shot = solve_bvp_shooting(&v, xi, xf, t, (xf - xi) / t, 1e-12, ShootingOptions::default())?;
            let end_shoot = shot.state(t).position;
            let end_lp = lindstedt_path(&c, &v, t);
            let tol = 10.0 * p.lambda * c.amplitude_a.norm();
            worst_ratio = worst_ratio.max((end_shoot - end_lp).norm() / tol);
        }
        Ok((
            worst_ratio < 1.0 && worst_back < 1e-10,
            format!("max endpoint gap / (10λ|A|) {worst_ratio:.3}; max back-substitution err {worst_back:.2e}"),
        ))
    })
}

/// Every criterion in order.
pub fn run_suite(cfg: &RunConfig) -> Vec<Outcome> {
    let mut out = vec![harmonic_exactness(), free_limit(), greens_fidelity(), lattice_combinatorics()];
    let (five, run) = tunneling(cfg);
    out.push(five);
    out.push(quantum_potential_structure(cfg, run.as_ref()));
    drop(run);
    out.push(continuity(cfg));
    out.push(bohmian_consistency(cfg));
    out.push(classical_cross_validation());
    out
}
