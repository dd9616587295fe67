//! Run configuration: a versioned JSON document whose defaults reproduce the
//! tunneling run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use qfd_core::evolve::GridSpec;
use qfd_core::kernel::{KernelParams, MAX_JET_ORDER, MAX_K};
use qfd_core::potential::{DoubleWell, PotentialModel};

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub version: u32,
    pub potential: PotentialSpec,
    pub packet: PacketSpec,
    pub grid: GridConfig,
    pub time: TimeSpec,
    pub kernel: KernelSpec,
    pub seeds: SeedSpec,
    pub oracle: OracleSpec,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            potential: PotentialSpec::default(),
            packet: PacketSpec::default(),
            grid: GridConfig::default(),
            time: TimeSpec::default(),
            kernel: KernelSpec::default(),
            seeds: SeedSpec::default(),
            oracle: OracleSpec::default(),
            output_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `V = ½Ma x² + ¼MλK x⁴`.
    DoubleWell { mass: f64, a: f64, lambda: f64, k: f64, hbar: f64 },
    /// `V = Σ cₘ xᵐ`.
    Polynomial { coefficients: Vec<f64>, mass: f64, hbar: f64 },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        let p = DoubleWell::TUNNELING;
        PotentialSpec::DoubleWell { mass: p.mass, a: p.a, lambda: p.lambda, k: p.k, hbar: p.hbar }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub alpha: f64,
    pub center: f64,
    pub renormalize: bool,
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self { alpha: 0.4, center: -3.126, renormalize: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x_min: -8.0, x_max: 8.0, n_points: 2048 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub duration: f64,
    /// Snapshots after the initial one, evenly spaced up to `duration`.
    pub snapshots: usize,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { duration: 1.0, snapshots: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    General,
    DoubleWell,
    Free,
    HarmonicExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathChoice {
    Shooting,
    Lindstedt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub mode: KernelMode,
    pub k_max: usize,
    pub tol: f64,
    pub jet_order: usize,
    /// Classical path used by `general` mode.
    pub path: PathChoice,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { mode: KernelMode::DoubleWell, k_max: 2, tol: 1e-12, jet_order: 4, path: PathChoice::Shooting }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSampling {
    /// Midpoint quantiles `(i + ½)/n` of `ρ₀`.
    Quantiles,
    /// Seeded random draws from `ρ₀`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldSource {
    /// Crank–Nicolson snapshots on the oracle grid.
    Oracle,
    /// Kernel propagation on the main grid.
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub count: usize,
    pub sampling: SeedSampling,
    pub rng_seed: u64,
    pub field_source: FieldSource,
    /// Spacing of the velocity snapshots the trajectories run through.
    pub snapshot_dt: f64,
    pub barrier_x: f64,
}

impl Default for SeedSpec {
    fn default() -> Self {
        Self {
            count: 64,
            sampling: SeedSampling::Quantiles,
            rng_seed: 20_240_611,
            field_source: FieldSource::Oracle,
            snapshot_dt: 2e-3,
            barrier_x: 0.0,
        }
    }
}

/// Grid and step of the Crank–Nicolson reference. Wider than the main grid
/// so the hard walls stay unseen over the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self { x_min: -30.0, x_max: 30.0, n_points: 4096, dt: 1e-4 }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| bad(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key.path=value` overrides. Values parse as JSON, falling back
    /// to a bare string; keys must already exist.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, CliError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut doc = serde_json::to_value(self).expect("config serializes");
        for o in overrides {
            let (key, raw) = o.split_once('=').ok_or_else(|| bad(format!("override {o:?} is not KEY=VALUE")))?;
            let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            let mut slot = &mut doc;
            for part in key.split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|m| m.get_mut(part))
                    .ok_or_else(|| bad(format!("unknown config key {key:?}")))?;
            }
            *slot = value;
        }
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| bad(format!("override error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the compact JSON form, ignoring `output_dir` so the same
    /// run written elsewhere carries the same hash.
    pub fn hash(&self) -> String {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut doc {
            m.remove("output_dir");
        }
        let compact = serde_json::to_string(&doc).expect("config serializes");
        format!("{:x}", Sha256::digest(compact.as_bytes()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != CONFIG_VERSION {
            return Err(bad(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        match &self.potential {
            PotentialSpec::DoubleWell { mass, a, lambda, k, hbar } => {
                for (n, v) in [("mass", mass), ("a", a), ("lambda", lambda), ("k", k), ("hbar", hbar)] {
                    finite(n, *v)?;
                }
            }
            PotentialSpec::Polynomial { coefficients, mass, hbar } => {
                for c in coefficients {
                    finite("coefficient", *c)?;
                }
                finite("mass", *mass)?;
                finite("hbar", *hbar)?;
            }
        }
        self.potential_model()?;
        finite("alpha", self.packet.alpha)?;
        finite("center", self.packet.center)?;
        if !(self.packet.alpha > 0.0) {
            return Err(bad("packet alpha must be positive"));
        }
        for (n, g) in [("grid", (self.grid.x_min, self.grid.x_max, self.grid.n_points)), ("oracle", (self.oracle.x_min, self.oracle.x_max, self.oracle.n_points))] {
            finite(n, g.0)?;
            finite(n, g.1)?;
            if g.2 < 64 {
                return Err(bad(format!("{n} n_points must be at least 64, got {}", g.2)));
            }
            if !(g.0 < g.1) {
                return Err(bad(format!("{n} needs x_min < x_max")));
            }
        }
        finite("duration", self.time.duration)?;
        if !(self.time.duration > 0.0) {
            return Err(bad(format!("duration must be positive, got {}", self.time.duration)));
        }
        if self.time.snapshots == 0 {
            return Err(bad("snapshots must be at least 1"));
        }
        let k = &self.kernel;
        if k.k_max > MAX_K {
            return Err(bad(format!("k_max {} exceeds {MAX_K}", k.k_max)));
        }
        if k.jet_order < 2 * k.k_max || k.jet_order > MAX_JET_ORDER {
            return Err(bad(format!("jet_order must lie in [2·k_max, {MAX_JET_ORDER}]")));
        }
        finite("tol", k.tol)?;
        if !(k.tol >= 0.0) {
            return Err(bad("tol must be non-negative"));
        }
        let s = &self.seeds;
        if s.count == 0 {
            return Err(bad("seed count must be positive"));
        }
        finite("snapshot_dt", s.snapshot_dt)?;
        finite("barrier_x", s.barrier_x)?;
        if !(s.snapshot_dt > 0.0) {
            return Err(bad("snapshot_dt must be positive"));
        }
        finite("oracle dt", self.oracle.dt)?;
        if !(self.oracle.dt > 0.0) {
            return Err(bad("oracle dt must be positive"));
        }
        Ok(())
    }

    pub fn potential_model(&self) -> Result<PotentialModel, CliError> {
        let r = match &self.potential {
            PotentialSpec::DoubleWell { mass, a, lambda, k, hbar } => {
                PotentialModel::double_well(DoubleWell { mass: *mass, a: *a, lambda: *lambda, k: *k, hbar: *hbar })
            }
            PotentialSpec::Polynomial { coefficients, mass, hbar } => PotentialModel::new(coefficients.clone(), *mass, *hbar),
        };
        r.map_err(|e| bad(format!("potential: {e}")))
    }

    pub fn grid_spec(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.grid.x_min, self.grid.x_max, self.grid.n_points).map_err(|e| bad(format!("grid: {e}")))
    }

    pub fn oracle_grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.oracle.x_min, self.oracle.x_max, self.oracle.n_points).map_err(|e| bad(format!("oracle grid: {e}")))
    }

    pub fn kernel_params(&self) -> KernelParams {
        KernelParams {
            k_max: self.kernel.k_max,
            tol: self.kernel.tol,
            jet_order: self.kernel.jet_order,
            ..KernelParams::default()
        }
    }

    /// `t_k = k·duration/snapshots` for `k = 0..=snapshots`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let n = self.time.snapshots;
        (0..=n).map(|k| self.time.duration * k as f64 / n as f64).collect()
    }
}
