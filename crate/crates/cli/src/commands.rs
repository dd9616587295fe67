//! The work behind each subcommand, returning data so the acceptance suite
//! can reuse it. Writers live at the bottom.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qfd_core::classical::{bare_frequency, PathSource};
use qfd_core::evolve::{gaussian_packet, propagate, GaussianPacketSpec, GridSpec, PropagateOptions, WavefunctionGrid};
use qfd_core::kernel::{double_well_kernel, free_kernel, harmonic_kernel, kernel_series, KernelEvaluation};
use qfd_core::madelung::{decompose, MadelungFields, MadelungOptions};
use qfd_core::oracle::CrankNicolson;
use qfd_core::trajectories::{initial_accelerations, integrate_trajectories, seeds_from_quantiles, TrajectoryOptions, TrajectorySet};
use qfd_core::{Complex64, Execution};

use crate::config::{FieldSource, KernelMode, PathChoice, RunConfig, SeedSampling};
use crate::output::{csv, num, write};
use crate::CliError;

pub type KernelFn = Box<dyn Fn(f64, f64, f64) -> qfd_core::Result<Complex64> + Send + Sync>;

fn path_source(cfg: &RunConfig) -> PathSource {
    match cfg.kernel.path {
        PathChoice::Shooting => PathSource::Shooting,
        PathChoice::Lindstedt => PathSource::LindstedtPoincare,
    }
}

/// The propagator selected by `kernel.mode`.
pub fn kernel_function(cfg: &RunConfig) -> Result<KernelFn, CliError> {
    let v = cfg.potential_model()?;
    let params = cfg.kernel_params();
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let (m, hbar) = (v.mass(), v.hbar());
    Ok(match cfg.kernel.mode {
        KernelMode::Free => Box::new(move |a, b, t| free_kernel(m, hbar, a, b, t)),
        KernelMode::HarmonicExact => {
            if v.degree() > 2 || v.coefficient(1) != 0.0 {
                return Err(CliError::Config("harmonic-exact mode needs V = c₀ + c₂x²".into()));
            }
            let omega = bare_frequency(&v);
            let c0 = v.coefficient(0);
            Box::new(move |a, b, t| {
                let k = if omega.norm() == 0.0 { free_kernel(m, hbar, a, b, t)? } else { harmonic_kernel(m, omega, hbar, a, b, t)? };
                Ok(k * Complex64::from_polar(1.0, -c0 * t / hbar))
            })
        }
        KernelMode::General => {
            let source = path_source(cfg);
            if source == PathSource::LindstedtPoincare && !v.is_even_quartic() {
                return Err(CliError::Config("the lindstedt path needs an even quartic potential".into()));
            }
            Box::new(move |a, b, t| kernel_series(&v, a, b, t, &params, source).map(|e| e.value))
        }
        KernelMode::DoubleWell => {
            if !v.is_even_quartic() {
                return Err(CliError::Config("double-well mode needs an even quartic potential".into()));
            }
            Box::new(move |a, b, t| double_well_kernel(&v, a, b, t, &params).map(|e| e.value))
        }
    })
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn evaluation_json(e: &KernelEvaluation) -> Value {
    let terms: Vec<Value> = e
        .terms
        .iter()
        .map(|t| {
            json!({
                "k": t.k,
                "term": complex_json(t.term),
                "abs_term": t.term.norm(),
                "cumulative": complex_json(t.cumulative),
            })
        })
        .collect();
    json!({ "action": complex_json(e.action), "phi": complex_json(e.phase), "terms": terms })
}

/// `K(x0 → xt; duration)` with its truncation table.
pub fn kernel_report(cfg: &RunConfig, x0: f64, xt: f64) -> Result<Value, CliError> {
    let t = cfg.time.duration;
    let v = cfg.potential_model()?;
    let params = cfg.kernel_params();
    let (value, detail) = match cfg.kernel.mode {
        KernelMode::General => {
            let _mode_ok = kernel_function(cfg)?;
            let e = kernel_series(&v, x0, xt, t, &params, path_source(cfg))?;
            (e.value, evaluation_json(&e))
        }
        KernelMode::DoubleWell => {
            let _mode_ok = kernel_function(cfg)?;
            let e = double_well_kernel(&v, x0, xt, t, &params)?;
            (e.value, evaluation_json(&e))
        }
        KernelMode::Free | KernelMode::HarmonicExact => (kernel_function(cfg)?(x0, xt, t)?, json!({ "terms": [] })),
    };
    let mut out = json!({
        "config_sha256": cfg.hash(),
        "mode": cfg.kernel.mode,
        "x0": x0,
        "xt": xt,
        "t": t,
        "value": complex_json(value),
        "modulus": value.norm(),
        "arg": value.arg(),
    });
    if let (Value::Object(o), Value::Object(d)) = (&mut out, detail) {
        o.extend(d);
    }
    Ok(out)
}

/// The configured packet sampled on `grid`.
pub fn initial_state(cfg: &RunConfig, grid: GridSpec) -> Result<WavefunctionGrid, CliError> {
    let spec = GaussianPacketSpec { alpha: cfg.packet.alpha, center_l: cfg.packet.center, renormalize: cfg.packet.renormalize };
    Ok(gaussian_packet(&spec, grid)?)
}

/// Kernel propagation of the initial packet to each of `times`; `t = 0`
/// returns the packet itself.
pub fn evolve_at(cfg: &RunConfig, times: &[f64], execution: Execution) -> Result<Vec<WavefunctionGrid>, CliError> {
    let grid = cfg.grid_spec()?;
    let psi0 = initial_state(cfg, grid)?;
    let k = kernel_function(cfg)?;
    let opts = PropagateOptions { execution, ..PropagateOptions::default() };
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(psi0.clone())
            } else {
                Ok(propagate(&k, &psi0, t, grid, opts)?)
            }
        })
        .collect()
}

pub fn evolve_snapshots(cfg: &RunConfig, execution: Execution) -> Result<Vec<WavefunctionGrid>, CliError> {
    evolve_at(cfg, &cfg.snapshot_times(), execution)
}

/// Crank–Nicolson on the oracle grid, recorded at `k·interval` for
/// `k = 0..=count`. The step is shrunk so records land on exact multiples.
pub fn oracle_snapshots(cfg: &RunConfig, interval: f64, count: usize) -> Result<Vec<WavefunctionGrid>, CliError> {
    let grid = cfg.oracle_grid()?;
    let psi0 = initial_state(cfg, grid)?;
    let per = (interval / cfg.oracle.dt - 1e-9).ceil().max(1.0) as usize;
    let cn = CrankNicolson::new(&cfg.potential_model()?, grid, interval / per as f64)?;
    let mut out = vec![psi0.clone()];
    out.extend(cn.run(&psi0, per * count, per)?);
    for (k, s) in out.iter_mut().enumerate() {
        s.time = interval * k as f64;
    }
    Ok(out)
}

pub fn madelung(cfg: &RunConfig, psi: &WavefunctionGrid) -> Result<MadelungFields, CliError> {
    let v = cfg.potential_model()?;
    Ok(decompose(psi, &MadelungOptions::new(v.mass(), v.hbar())).with_quantum_potential(v.mass(), v.hbar()))
}

/// Seeds drawn from `ρ₀` on the field grid, ascending.
pub fn sample_seeds(cfg: &RunConfig, rho0: &MadelungFields) -> Result<Vec<f64>, CliError> {
    let n = cfg.seeds.count;
    let quantiles: Vec<f64> = match cfg.seeds.sampling {
        SeedSampling::Quantiles => (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
        SeedSampling::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seeds.rng_seed);
            (0..n).map(|_| rng.gen::<f64>()).collect()
        }
    };
    let mut seeds = seeds_from_quantiles(rho0, &quantiles)?;
    seeds.sort_by(f64::total_cmp);
    Ok(seeds)
}

/// Trajectories plus the diagnostics reported alongside them.
#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub set: TrajectorySet,
    pub accelerations: Vec<f64>,
    /// `∫_{x > barrier} ρ dx / ∫ρ dx` of the field wavefunction at the final time.
    pub final_right_probability: f64,
    pub field_source: FieldSource,
}

pub fn trajectories(cfg: &RunConfig, execution: Execution) -> Result<TrajectoryRun, CliError> {
    let v = cfg.potential_model()?;
    let count = (cfg.time.duration / cfg.seeds.snapshot_dt - 1e-9).ceil().max(1.0) as usize;
    let interval = cfg.time.duration / count as f64;
    let psis = match cfg.seeds.field_source {
        FieldSource::Oracle => oracle_snapshots(cfg, interval, count)?,
        FieldSource::Series => {
            let times: Vec<f64> = (0..=count).map(|k| interval * k as f64).collect();
            evolve_at(cfg, &times, execution)?
        }
    };
    let opts = MadelungOptions::new(v.mass(), v.hbar());
    let fields: Vec<MadelungFields> = psis.iter().map(|p| decompose(p, &opts)).collect();
    let last = psis.last().expect("at least two snapshots");
    let final_right_probability = last.probability_right_of(cfg.seeds.barrier_x) / last.norm_sqr();
    drop(psis);
    let f0 = fields[0].clone().with_quantum_potential(v.mass(), v.hbar());
    let seeds = sample_seeds(cfg, &f0)?;
    let topts = TrajectoryOptions { barrier_x: cfg.seeds.barrier_x, execution, ..TrajectoryOptions::default() };
    let set = integrate_trajectories(&fields, &seeds, &topts)?;
    let accelerations = initial_accelerations(&f0, &v, &seeds)?;
    Ok(TrajectoryRun { set, accelerations, final_right_probability, field_source: cfg.seeds.field_source })
}

// ---- writers ----

pub fn write_evolve(cfg: &RunConfig, snaps: &[WavefunctionGrid], dir: &Path) -> Result<(), CliError> {
    let hash = cfg.hash();
    let rows = snaps.iter().flat_map(|s| {
        s.xs().into_iter().zip(&s.values).map(move |(x, z)| vec![num(s.time), num(x), num(z.re), num(z.im), num(z.norm_sqr())])
    });
    write(dir, "evolve.csv", &csv(&hash, &["t", "x", "re_psi", "im_psi", "rho"], rows))?;
    let barrier = cfg.seeds.barrier_x;
    let summary = snaps.iter().map(|s| vec![num(s.time), num(s.probability_right_of(barrier)), num(s.norm_sqr())]);
    write(dir, "evolve_summary.csv", &csv(&hash, &["t", "p_right", "norm_sqr"], summary))
}

pub fn write_fields(cfg: &RunConfig, fields: &[MadelungFields], dir: &Path) -> Result<(), CliError> {
    let rows = fields.iter().flat_map(|f| {
        (0..f.len()).map(move |i| {
            vec![
                num(f.time),
                num(f.grid.x(i)),
                num(f.r[i]),
                num(f.s_m[i]),
                num(f.v[i]),
                num(f.q[i]),
                (f.nodes[i] as u8).to_string(),
            ]
        })
    });
    write(dir, "fields.csv", &csv(&cfg.hash(), &["t", "x", "r", "s_m", "v", "q", "node_flag"], rows))
}

pub fn write_trajectories(cfg: &RunConfig, run: &TrajectoryRun, dir: &Path) -> Result<(), CliError> {
    let set = &run.set;
    let rows = set.positions.iter().enumerate().flat_map(|(s, path)| {
        path.iter().zip(&set.times).map(move |(x, t)| vec![s.to_string(), num(set.seeds[s]), num(*t), num(*x)])
    });
    write(dir, "trajectories.csv", &csv(&cfg.hash(), &["seed_index", "seed", "t", "x"], rows))?;
    let seeds: Vec<Value> = (0..set.seeds.len())
        .map(|s| {
            json!({
                "index": s,
                "seed": set.seeds[s],
                "crossed": set.crossed_barrier[s],
                "final_x": set.positions[s].last(),
                "initial_acceleration": run.accelerations[s],
                "capped_steps": set.capped_steps[s],
                "failure": set.failures[s].as_ref().map(|e| e.name()),
            })
        })
        .collect();
    let summary = json!({
        "config_sha256": cfg.hash(),
        "field_source": run.field_source,
        "barrier_x": set.barrier_x,
        "crossing_fraction": set.crossing_fraction(),
        "final_right_fraction": set.final_right_fraction(),
        "field_right_probability": run.final_right_probability,
        "seeds": seeds,
    });
    write(dir, "tunneling_summary.json", &(serde_json::to_string_pretty(&summary).expect("json") + "\n"))
}
