use crate::error::{Error, Result};
use crate::potential::PotentialModel;

use super::{ClassicalPath, PathSample, PathSource, DEFAULT_PATH_SAMPLES};

/// Knobs for [`solve_bvp_shooting`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Uniform time samples, including both endpoints.
    pub samples: usize,
    pub max_iterations: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            samples: DEFAULT_PATH_SAMPLES,
            max_iterations: 50,
        }
    }
}

fn acceleration(potential: &PotentialModel, x: f64) -> f64 {
    potential.force(x) / potential.mass()
}

fn rk4_step(potential: &PotentialModel, x: f64, v: f64, h: f64) -> (f64, f64) {
    let a1 = acceleration(potential, x);
    let (x2, v2) = (x + 0.5 * h * v, v + 0.5 * h * a1);
    let a2 = acceleration(potential, x2);
    let (x3, v3) = (x + 0.5 * h * v2, v + 0.5 * h * a2);
    let a3 = acceleration(potential, x3);
    let (x4, v4) = (x + h * v3, v + h * a3);
    let a4 = acceleration(potential, x4);
    (
        x + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4),
        v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
    )
}

/// Fixed-step RK4 solution of `M·ẍ = −V′(x)` sampled at `samples` uniform times.
pub fn integrate_ivp(
    potential: &PotentialModel,
    x0: f64,
    v0: f64,
    duration: f64,
    samples: usize,
) -> Vec<PathSample> {
    let steps = samples.max(2) - 1;
    let h = duration / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (x0, v0);
    out.push(PathSample {
        time: 0.0,
        position: x,
        velocity: v,
    });
    for i in 1..=steps {
        (x, v) = rk4_step(potential, x, v, h);
        out.push(PathSample {
            time: if i == steps { duration } else { h * i as f64 },
            position: x,
            velocity: v,
        });
    }
    out
}

fn terminal_position(potential: &PotentialModel, x0: f64, v0: f64, duration: f64, steps: usize) -> f64 {
    let h = duration / steps as f64;
    let (mut x, mut v) = (x0, v0);
    for _ in 0..steps {
        (x, v) = rk4_step(potential, x, v, h);
    }
    x
}

/// Shooting solution of the boundary-value problem `x(0) = x0`, `x(duration) = xt`.
///
/// Damped Newton on the initial velocity with a central-difference Jacobian.
/// Which branch is found depends on `guess_v0`.
pub fn solve_bvp_shooting(
    potential: &PotentialModel,
    x0: f64,
    xt: f64,
    duration: f64,
    guess_v0: f64,
    tol: f64,
    options: ShootingOptions,
) -> Result<ClassicalPath> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {duration}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !(x0.is_finite() && xt.is_finite() && guess_v0.is_finite()) {
        return Err(Error::InvalidInput("non-finite boundary data".into()));
    }
    let steps = options.samples.max(2) - 1;
    let miss = |v: f64| terminal_position(potential, x0, v, duration, steps) - xt;

    let mut v = guess_v0;
    let mut f = miss(v);
    let mut iterations = 0;
    while !(f.abs() <= tol) {
        if iterations == options.max_iterations || !f.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual: f.abs(),
            });
        }
        iterations += 1;
        let h = 1e-6 * v.abs().max(1.0);
        let jac = (miss(v + h) - miss(v - h)) / (2.0 * h);
        if jac == 0.0 || !jac.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual: f.abs(),
            });
        }
        let step = -f / jac;
        let mut damping = 1.0;
        loop {
            let trial = v + damping * step;
            let ft = miss(trial);
            if ft.abs() < f.abs() || damping < 1e-6 {
                v = trial;
                f = ft;
                break;
            }
            damping *= 0.5;
        }
    }

    let mut samples = integrate_ivp(potential, x0, v, duration, steps + 1);
    // Remove the remaining miss (below `tol`) with a linear correction so the
    // endpoint is exact without denting the last sample.
    let miss = samples.last().map_or(0.0, |s| s.position - xt);
    for s in samples.iter_mut() {
        s.position -= miss * s.time / duration;
        s.velocity -= miss / duration;
    }
    if let Some(last) = samples.last_mut() {
        last.position = xt;
    }
    ClassicalPath::from_samples(samples, potential, PathSource::Shooting)
}
