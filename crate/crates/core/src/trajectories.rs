//! Bohmian fluid-element trajectories `ẋ = v(x, t)` through a sequence of
//! Madelung snapshots.

use crate::error::{Error, Result};
use crate::madelung::{gradient, MadelungFields};
use crate::parallel::Execution;
use crate::potential::PotentialModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryOptions {
    /// `|v|` is capped at this multiple of the largest non-node field speed.
    pub v_cap_factor: f64,
    /// Position of the barrier used for the crossing flags.
    pub barrier_x: f64,
    /// RK4 steps per snapshot interval.
    pub substeps: usize,
    pub execution: Execution,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            v_cap_factor: 10.0,
            barrier_x: 0.0,
            substeps: 4,
            execution: Execution::default(),
        }
    }
}

/// Positions of every seed at every snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub seeds: Vec<f64>,
    pub times: Vec<f64>,
    /// `positions[s][k]` is seed `s` at `times[k]`.
    pub positions: Vec<Vec<f64>>,
    /// Ever on the other side of the barrier from where it started.
    pub crossed_barrier: Vec<bool>,
    /// Number of velocity evaluations that hit the cap.
    pub capped_steps: Vec<usize>,
    /// `LeftGrid` for seeds that reached a grid edge; their later positions
    /// stay clamped at the edge.
    pub failures: Vec<Option<Error>>,
    pub barrier_x: f64,
}

impl TrajectorySet {
    /// Fraction of seeds that finish strictly right of the barrier.
    pub fn final_right_fraction(&self) -> f64 {
        let n = self.seeds.len();
        if n == 0 {
            return 0.0;
        }
        let right = self
            .positions
            .iter()
            .filter(|p| p.last().is_some_and(|&x| x > self.barrier_x))
            .count();
        right as f64 / n as f64
    }

    pub fn crossing_fraction(&self) -> f64 {
        if self.seeds.is_empty() {
            return 0.0;
        }
        self.crossed_barrier.iter().filter(|&&c| c).count() as f64 / self.seeds.len() as f64
    }
}

/// Velocity field interpolated linearly in `x` and `t`.
struct VelocityField<'a> {
    snaps: &'a [MadelungFields],
    x_min: f64,
    dx: f64,
    n: usize,
    cap: f64,
}

impl VelocityField<'_> {
    fn at_snapshot(&self, k: usize, x: f64) -> f64 {
        let u = ((x - self.x_min) / self.dx).clamp(0.0, (self.n - 1) as f64);
        let i = (u.floor() as usize).min(self.n - 2);
        let f = u - i as f64;
        let v = &self.snaps[k].v;
        v[i] + f * (v[i + 1] - v[i])
    }

    /// `(v, capped)` inside snapshot interval `k` at fraction `s ∈ [0, 1]`.
    fn eval(&self, k: usize, s: f64, x: f64) -> (f64, bool) {
        let a = self.at_snapshot(k, x);
        let b = self.at_snapshot(k + 1, x);
        let v = a + s * (b - a);
        if v.abs() > self.cap {
            (v.signum() * self.cap, true)
        } else {
            (v, false)
        }
    }
}

/// RK4 through the snapshot sequence with `options.substeps` steps per
/// interval. Seeds that reach a grid edge are clamped there and reported.
pub fn integrate_trajectories(
    snapshots: &[MadelungFields],
    seeds: &[f64],
    options: &TrajectoryOptions,
) -> Result<TrajectorySet> {
    if snapshots.len() < 2 {
        return Err(Error::InvalidInput("trajectories need at least two snapshots".into()));
    }
    let grid = snapshots[0].grid;
    if snapshots.iter().any(|s| s.grid != grid) {
        return Err(Error::GridMismatch);
    }
    if snapshots.windows(2).any(|w| !(w[1].time > w[0].time)) {
        return Err(Error::InvalidInput("snapshot times must increase".into()));
    }
    if options.substeps == 0 {
        return Err(Error::InvalidInput("substeps must be positive".into()));
    }
    let dx = grid.dx();
    let (x_lo, x_hi) = (grid.x_min, grid.x_max);
    for &s in seeds {
        if !(s > x_lo && s < x_hi) {
            return Err(Error::InvalidInput(format!("seed {s} is outside the grid interior")));
        }
    }
    let vmax = snapshots
        .iter()
        .flat_map(|f| f.v.iter().zip(&f.nodes).filter(|(_, &n)| !n).map(|(v, _)| v.abs()))
        .fold(0.0, f64::max);
    let dt_max = snapshots
        .windows(2)
        .map(|w| w[1].time - w[0].time)
        .fold(0.0, f64::max);
    if vmax * dt_max >= 8.0 * dx {
        return Err(Error::InvalidInput(format!(
            "snapshot spacing too coarse: max|v|·dt = {:e} ≥ 8·dx",
            vmax * dt_max
        )));
    }
    let field = VelocityField {
        snaps: snapshots,
        x_min: grid.x_min,
        dx,
        n: grid.n_points,
        cap: options.v_cap_factor * vmax.max(f64::MIN_POSITIVE),
    };
    let times: Vec<f64> = snapshots.iter().map(|s| s.time).collect();
    let barrier = options.barrier_x;

    let runs = options.execution.map_range(seeds.len(), |si| {
        let seed = seeds[si];
        let mut x = seed;
        let mut path = Vec::with_capacity(times.len());
        path.push(x);
        let mut crossed = false;
        let mut capped = 0;
        let mut failure = None;
        let start_side = seed > barrier;
        for k in 0..times.len() - 1 {
            if failure.is_some() {
                path.push(x);
                continue;
            }
            let h = (times[k + 1] - times[k]) / options.substeps as f64;
            let ds = 1.0 / options.substeps as f64;
            for j in 0..options.substeps {
                let s0 = j as f64 * ds;
                let mut ev = |s: f64, y: f64| {
                    let (v, c) = field.eval(k, s, y);
                    capped += c as usize;
                    v
                };
                let k1 = ev(s0, x);
                let k2 = ev(s0 + 0.5 * ds, x + 0.5 * h * k1);
                let k3 = ev(s0 + 0.5 * ds, x + 0.5 * h * k2);
                let k4 = ev(s0 + ds, x + h * k3);
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (x > barrier) != start_side {
                    crossed = true;
                }
                if x <= x_lo || x >= x_hi {
                    x = x.clamp(x_lo, x_hi);
                    failure = Some(Error::LeftGrid {
                        seed,
                        t: times[k] + h * (j + 1) as f64,
                    });
                    break;
                }
            }
            path.push(x);
        }
        (path, crossed, capped, failure)
    });

    let mut set = TrajectorySet {
        seeds: seeds.to_vec(),
        times,
        positions: Vec::with_capacity(seeds.len()),
        crossed_barrier: Vec::with_capacity(seeds.len()),
        capped_steps: Vec::with_capacity(seeds.len()),
        failures: Vec::with_capacity(seeds.len()),
        barrier_x: barrier,
    };
    for (p, c, n, f) in runs {
        set.positions.push(p);
        set.crossed_barrier.push(c);
        set.capped_steps.push(n);
        set.failures.push(f);
    }
    Ok(set)
}

/// `−∂ₓ(V + Q)/M` at each seed from a snapshot whose `q` is filled in.
pub fn initial_accelerations(fields: &MadelungFields, potential: &PotentialModel, seeds: &[f64]) -> Result<Vec<f64>> {
    if fields.q.len() != fields.len() {
        return Err(Error::InvalidInput("quantum potential not computed for this snapshot".into()));
    }
    let g = fields.grid;
    let total: Vec<f64> = g
        .xs()
        .iter()
        .zip(&fields.q)
        .map(|(&x, q)| potential.value(x) + q)
        .collect();
    let force = gradient(&total, g.dx());
    Ok(seeds
        .iter()
        .map(|&s| {
            let u = ((s - g.x_min) / g.dx()).clamp(0.0, (g.n_points - 1) as f64);
            let i = (u.floor() as usize).min(g.n_points - 2);
            let f = u - i as f64;
            -(force[i] + f * (force[i + 1] - force[i])) / potential.mass()
        })
        .collect())
}

/// Inverse-CDF positions for the given quantiles of a grid density
/// (trapezoid cumulative, linear inside cells).
pub fn seeds_from_quantiles(fields: &MadelungFields, quantiles: &[f64]) -> Result<Vec<f64>> {
    let g = fields.grid;
    let dx = g.dx();
    let mut cdf = vec![0.0; g.n_points];
    for i in 1..g.n_points {
        cdf[i] = cdf[i - 1] + 0.5 * (fields.rho[i - 1] + fields.rho[i]) * dx;
    }
    let total = cdf[g.n_points - 1];
    if !(total > 0.0) {
        return Err(Error::InvalidInput("density integrates to zero".into()));
    }
    quantiles
        .iter()
        .map(|&u| {
            if !(0.0..1.0).contains(&u) {
                return Err(Error::InvalidInput(format!("quantile {u} outside [0, 1)")));
            }
            let target = u * total;
            let i = cdf.partition_point(|&c| c <= target).clamp(1, g.n_points - 1);
            let (c0, c1) = (cdf[i - 1], cdf[i]);
            let f = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
            let x = g.x(i - 1) + f * dx;
            // keep seeds strictly inside the grid
            Ok(x.clamp(g.x_min + 1e-9 * dx, g.x_max - 1e-9 * dx))
        })
        .collect()
}
