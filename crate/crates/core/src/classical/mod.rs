//! Classical boundary-value paths between `(x₀, 0)` and `(x_t, t)`.
//!
//! Two solvers produce a [`ClassicalPath`]: generic shooting on any
//! polynomial potential, and the first-order Lindstedt–Poincaré closed form
//! for the quartic double well.

mod lindstedt;
mod shooting;

pub use lindstedt::{
    bare_frequency, fit_boundary_constants, lindstedt_path, fit_first_order_constants, LindstedtConstants, LindstedtPath,
};
pub use shooting::{integrate_ivp, solve_bvp_shooting, ShootingOptions};

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::quadrature::GaussLegendre;

/// Default number of uniform time samples on a shooting path.
pub const DEFAULT_PATH_SAMPLES: usize = 512;

/// Which solver produced a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSource {
    Shooting,
    LindstedtPoincare,
}

/// One `(time, position, velocity)` sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub time: f64,
    pub position: f64,
    pub velocity: f64,
}

/// Position and velocity at a time, complex in general.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub time: f64,
    pub position: Complex64,
    pub velocity: Complex64,
}

#[derive(Debug, Clone)]
enum PathRepr {
    Sampled(Vec<PathSample>),
    Perturbative(LindstedtPath),
}

/// A classical path with its boundary data and classical action.
#[derive(Debug, Clone)]
pub struct ClassicalPath {
    x0: f64,
    xt: f64,
    duration: f64,
    action: Complex64,
    source: PathSource,
    repr: PathRepr,
}

impl ClassicalPath {
    /// Wraps uniformly spaced samples and computes the action along them.
    pub fn from_samples(
        samples: Vec<PathSample>,
        potential: &PotentialModel,
        source: PathSource,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two samples".into()));
        }
        let first = samples[0];
        let last = samples[samples.len() - 1];
        if !(last.time > first.time) || first.time != 0.0 {
            return Err(Error::InvalidInput("path times must start at 0 and increase".into()));
        }
        let mut path = ClassicalPath {
            x0: first.position,
            xt: last.position,
            duration: last.time,
            action: Complex64::new(0.0, 0.0),
            source,
            repr: PathRepr::Sampled(samples),
        };
        path.action = classical_action(&path, potential);
        Ok(path)
    }

    /// Closed-form perturbative path; the action is integrated along it.
    pub fn perturbative(
        path: LindstedtPath,
        x0: f64,
        xt: f64,
        duration: f64,
        potential: &PotentialModel,
    ) -> Self {
        let mut p = ClassicalPath {
            x0,
            xt,
            duration,
            action: Complex64::new(0.0, 0.0),
            source: PathSource::LindstedtPoincare,
            repr: PathRepr::Perturbative(path),
        };
        p.action = classical_action(&p, potential);
        p
    }

    /// Perturbative path whose action the caller fills in later.
    pub(crate) fn perturbative_deferred(path: LindstedtPath, x0: f64, xt: f64, duration: f64) -> Self {
        ClassicalPath {
            x0,
            xt,
            duration,
            action: Complex64::new(0.0, 0.0),
            source: PathSource::LindstedtPoincare,
            repr: PathRepr::Perturbative(path),
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn xt(&self) -> f64 {
        self.xt
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn action(&self) -> Complex64 {
        self.action
    }

    pub fn source(&self) -> PathSource {
        self.source
    }

    /// Stored samples, for sampled paths.
    pub fn samples(&self) -> Option<&[PathSample]> {
        match &self.repr {
            PathRepr::Sampled(s) => Some(s),
            PathRepr::Perturbative(_) => None,
        }
    }

    pub fn lindstedt(&self) -> Option<&LindstedtPath> {
        match &self.repr {
            PathRepr::Perturbative(p) => Some(p),
            PathRepr::Sampled(_) => None,
        }
    }

    /// Position and velocity at `t ∈ [0, duration]`. Sampled paths use cubic
    /// Hermite interpolation between samples.
    pub fn state(&self, t: f64) -> PathState {
        match &self.repr {
            PathRepr::Perturbative(p) => p.state(t),
            PathRepr::Sampled(s) => {
                let h = s[1].time - s[0].time;
                let n = s.len() - 1;
                let i = ((t / h).floor() as isize).clamp(0, n as isize - 1) as usize;
                let u = (t - s[i].time) / h;
                let (x, v) = hermite(&s[i], &s[i + 1], h, u);
                PathState {
                    time: t,
                    position: Complex64::new(x, 0.0),
                    velocity: Complex64::new(v, 0.0),
                }
            }
        }
    }

    /// Integrates `N` functionals of the path state over `[0, duration]`.
    ///
    /// Sampled paths use a 4-point Gauss–Legendre rule on every sample
    /// interval (exact for the interpolating cubic up to degree 7 integrands);
    /// closed-form paths use 12-point panels sized to the oscillation scale.
    pub fn integrate<const N: usize, F>(&self, mut f: F) -> [Complex64; N]
    where
        F: FnMut(&PathState) -> [Complex64; N],
    {
        let mut acc = [Complex64::new(0.0, 0.0); N];
        match &self.repr {
            PathRepr::Sampled(s) => {
                let basis = hermite_gauss_basis();
                for w in s.windows(2) {
                    let h = w[1].time - w[0].time;
                    for node in basis.iter() {
                        let x = node.h00 * w[0].position
                            + node.h10 * h * w[0].velocity
                            + node.h01 * w[1].position
                            + node.h11 * h * w[1].velocity;
                        let v = (node.d00 * w[0].position + node.d01 * w[1].position) / h
                            + node.d10 * w[0].velocity
                            + node.d11 * w[1].velocity;
                        let state = PathState {
                            time: w[0].time + node.s * h,
                            position: Complex64::new(x, 0.0),
                            velocity: Complex64::new(v, 0.0),
                        };
                        let vals = f(&state);
                        for k in 0..N {
                            acc[k] += vals[k] * (node.weight * h);
                        }
                    }
                }
            }
            PathRepr::Perturbative(p) => {
                // Integrands oscillate like exp(±2iωt) and slower harmonics of
                // the correction term; the node count follows |ω|·h per panel.
                let scale = p.constants().omega.norm() * self.duration;
                let panels = (scale / 2.0).ceil().max(1.0) as usize;
                let nodes = (7.0 + 4.0 * scale / panels as f64).ceil() as usize;
                let rule = GaussLegendre::cached(nodes.min(24));
                let hp = self.duration / panels as f64;
                for k in 0..panels {
                    let lo = hp * k as f64;
                    for (t, w) in rule.mapped(lo, lo + hp) {
                        let vals = f(&p.state(t));
                        for j in 0..N {
                            acc[j] += vals[j] * w;
                        }
                    }
                }
            }
        }
        acc
    }
}

/// `∫₀ᵗ [½·M·ẋ² − V(x)] dt′` along the path.
pub fn classical_action(path: &ClassicalPath, potential: &PotentialModel) -> Complex64 {
    let m = potential.mass();
    let [s] = path.integrate(|st| {
        [0.5 * m * st.velocity * st.velocity - potential.value_complex(st.position)]
    });
    s
}

fn hermite(a: &PathSample, b: &PathSample, h: f64, s: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let x = h00 * a.position + h10 * h * a.velocity + h01 * b.position + h11 * h * b.velocity;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    let v = (d00 * a.position + d01 * b.position) / h + d10 * a.velocity + d11 * b.velocity;
    (x, v)
}

struct HermiteNode {
    s: f64,
    weight: f64,
    h00: f64,
    h10: f64,
    h01: f64,
    h11: f64,
    d00: f64,
    d10: f64,
    d01: f64,
    d11: f64,
}

fn hermite_gauss_basis() -> &'static [HermiteNode] {
    static BASIS: OnceLock<Vec<HermiteNode>> = OnceLock::new();
    BASIS.get_or_init(|| {
        GaussLegendre::new(4)
            .mapped(0.0, 1.0)
            .map(|(s, weight)| {
                let s2 = s * s;
                let s3 = s2 * s;
                HermiteNode {
                    s,
                    weight,
                    h00: 2.0 * s3 - 3.0 * s2 + 1.0,
                    h10: s3 - 2.0 * s2 + s,
                    h01: -2.0 * s3 + 3.0 * s2,
                    h11: s3 - s2,
                    d00: 6.0 * s2 - 6.0 * s,
                    d10: 3.0 * s2 - 4.0 * s + 1.0,
                    d01: -6.0 * s2 + 6.0 * s,
                    d11: 3.0 * s2 - 2.0 * s,
                }
            })
            .collect()
    })
}
