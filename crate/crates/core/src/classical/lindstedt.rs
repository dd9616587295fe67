use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialModel;

use super::PathState;

/// Integration constants of the first-order Lindstedt–Poincaré path
/// `x(t) = A·cos(ωt + φ) − (λK·A³/8ω₀²)·cos(ωt + 3φ)·sin²(ωt)`.
///
/// Everything is complex: with `a < 0` the bare frequency `ω₀ = √a` is
/// imaginary and the trigonometric forms continue analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindstedtConstants {
    pub amplitude_a: Complex64,
    pub phase_phi0: Complex64,
    pub omega0: Complex64,
    pub omega: Complex64,
}

impl LindstedtConstants {
    /// Renormalised frequency `ω = ω₀ + 3λK·A²/(8ω₀)`.
    pub fn shifted_frequency(omega0: Complex64, amplitude: Complex64, lambda_k: f64) -> Complex64 {
        omega0 + 3.0 * lambda_k * amplitude * amplitude / (8.0 * omega0)
    }
}

/// Solves for `(A, φ)` from `x(0) = x_i` and the zeroth-order condition
/// `A·cos(ω₀t + φ) = x_f`.
///
/// The amplitude is kept on `Re(A) ≥ 0` and the phase on `Re(φ) ∈ (−π, π]`;
/// the sign of `φ` is whatever the boundary values require.
pub fn fit_boundary_constants(
    x_i: f64,
    x_f: f64,
    duration: f64,
    omega0: Complex64,
    lambda_k: f64,
) -> Result<LindstedtConstants> {
    if !(duration > 0.0) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {duration}")));
    }
    let wt = omega0 * duration;
    let (s, c) = (wt.sin(), wt.cos());
    if s.norm() < 1e-10 {
        return Err(Error::ConjugatePoint {
            sin_value: s.norm(),
        });
    }
    let d = Complex64::new(x_f * x_f + x_i * x_i, 0.0) - 2.0 * x_f * x_i * c;
    let root = d.sqrt();
    if root.norm() == 0.0 {
        if x_i == 0.0 && x_f == 0.0 {
            return Ok(LindstedtConstants {
                amplitude_a: Complex64::new(0.0, 0.0),
                phase_phi0: Complex64::new(std::f64::consts::FRAC_PI_2, 0.0),
                omega0,
                omega: omega0,
            });
        }
        return Err(Error::InvalidInput(
            "degenerate Lindstedt boundary constants (zero discriminant)".into(),
        ));
    }
    let mut amplitude = root / s;
    let cos_phi = x_i * s / root;
    let sin_phi = (x_i * c - x_f) / root;
    let i = Complex64::i();
    let mut phi = -i * (cos_phi + i * sin_phi).ln();
    if amplitude.re < 0.0 {
        amplitude = -amplitude;
        phi += std::f64::consts::PI;
        if phi.re > std::f64::consts::PI {
            phi -= 2.0 * std::f64::consts::PI;
        }
    }
    Ok(LindstedtConstants {
        amplitude_a: amplitude,
        phase_phi0: phi,
        omega0,
        omega: LindstedtConstants::shifted_frequency(omega0, amplitude, lambda_k),
    })
}

/// Constants for which the full first-order path, correction term and
/// shifted frequency included, meets both boundary values.
///
/// [`fit_boundary_constants`] only enforces the zeroth-order endpoint and
/// leaves an `O(λK·A³)` miss at `t = duration`. Here the path is written as
/// `P·e^{iωt} + Q·e^{−iωt} − 4C·(P³e^{iωt} + Q³e^{−iωt})·sin²ωt` with
/// `A·e^{±iφ} = 2P, 2Q` and `C = λK/8ω₀²`; `x(0) = x_i` fixes `Q = x_i − P`
/// and a damped Newton iteration on `P` solves `x(T) = x_f`. Unlike `(A, φ)`
/// this form stays regular near the pure exponential solutions of an
/// inverted well.
pub fn fit_first_order_constants(
    x_i: f64,
    x_f: f64,
    duration: f64,
    omega0: Complex64,
    lambda_k: f64,
) -> Result<LindstedtConstants> {
    if !(duration > 0.0) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {duration}")));
    }
    let t = duration;
    let i = Complex64::i();
    let s0 = (omega0 * t).sin();
    if s0.norm() < 1e-10 {
        return Err(Error::ConjugatePoint {
            sin_value: s0.norm(),
        });
    }
    let xi = Complex64::new(x_i, 0.0);
    // zeroth order: P + Q = x_i, P e^{iω₀T} + Q e^{−iω₀T} = x_f
    let mut p = (x_f - xi * (-i * omega0 * t).exp()) / (2.0 * i * s0);
    let c = lambda_k / (8.0 * omega0 * omega0);
    let g = 3.0 * lambda_k / (2.0 * omega0);
    let eval = |p: Complex64| {
        let q = xi - p;
        let w = omega0 + g * p * q;
        let e = (i * w * t).exp();
        let ei = e.inv();
        let (s, co) = ((e - ei) / (2.0 * i), 0.5 * (e + ei));
        let (p3, q3) = (p * p * p, q * q * q);
        let r = p * e + q * ei - 4.0 * c * (p3 * e + q3 * ei) * s * s - x_f;
        let d_fixed = e - ei - 4.0 * c * (3.0 * p * p * e - 3.0 * q * q * ei) * s * s;
        let d_w = i * t * (p * e - q * ei)
            - 4.0 * c * (i * t * (p3 * e - q3 * ei) * s * s + (p3 * e + q3 * ei) * 2.0 * s * co * t);
        (r, d_fixed + d_w * g * (q - p))
    };
    let scale = x_i.abs().max(x_f.abs()).max(1.0);
    let (mut r, mut d) = eval(p);
    let mut iterations = 0;
    while r.norm() > 1e-13 * scale {
        if iterations == 60 || d.norm() == 0.0 || !d.is_finite() {
            return Err(Error::NoConvergence {
                iterations,
                residual: r.norm(),
            });
        }
        iterations += 1;
        let step = r / d;
        let mut damping = 1.0;
        loop {
            let np = p - step * damping;
            let (nr, nd) = eval(np);
            if nr.norm() < r.norm() {
                (p, r, d) = (np, nr, nd);
                break;
            }
            damping *= 0.5;
            if damping < 1e-4 {
                if r.norm() <= 1e-10 * scale {
                    break;
                }
                return Err(Error::NoConvergence {
                    iterations,
                    residual: r.norm(),
                });
            }
        }
        if damping < 1e-4 {
            break;
        }
    }
    let q = xi - p;
    let mut amplitude = 2.0 * (p * q).sqrt();
    if amplitude.re < 0.0 {
        amplitude = -amplitude;
    }
    if amplitude.norm() == 0.0 {
        return Err(Error::InvalidInput(
            "boundary values select a pure exponential path (A = 0)".into(),
        ));
    }
    let phi = -i * (2.0 * p / amplitude).ln();
    Ok(LindstedtConstants {
        amplitude_a: amplitude,
        phase_phi0: phi,
        omega0,
        omega: LindstedtConstants::shifted_frequency(omega0, amplitude, lambda_k),
    })
}

/// Closed-form first-order path with precomputed phase factors.
#[derive(Debug, Clone, Copy)]
pub struct LindstedtPath {
    constants: LindstedtConstants,
    correction: Complex64,
    cos_phi: Complex64,
    sin_phi: Complex64,
    cos_3phi: Complex64,
    sin_3phi: Complex64,
}

impl LindstedtPath {
    pub fn new(constants: LindstedtConstants, lambda_k: f64) -> Self {
        let a = constants.amplitude_a;
        let w0 = constants.omega0;
        let phi = constants.phase_phi0;
        Self {
            constants,
            correction: lambda_k * a * a * a / (8.0 * w0 * w0),
            cos_phi: phi.cos(),
            sin_phi: phi.sin(),
            cos_3phi: (3.0 * phi).cos(),
            sin_3phi: (3.0 * phi).sin(),
        }
    }

    /// Uses `ω₀ = √a` and `λK` from an even quartic potential.
    pub fn for_potential(constants: LindstedtConstants, potential: &PotentialModel) -> Self {
        Self::new(constants, potential.quartic_strength())
    }

    pub fn constants(&self) -> &LindstedtConstants {
        &self.constants
    }

    pub fn position(&self, t: f64) -> Complex64 {
        self.state(t).position
    }

    pub fn state(&self, t: f64) -> PathState {
        let w = self.constants.omega;
        let a = self.constants.amplitude_a;
        let (s, c) = sin_cos(w * t);
        let cos1 = c * self.cos_phi - s * self.sin_phi;
        let sin1 = s * self.cos_phi + c * self.sin_phi;
        let cos3 = c * self.cos_3phi - s * self.sin_3phi;
        let sin3 = s * self.cos_3phi + c * self.sin_3phi;
        let position = a * cos1 - self.correction * cos3 * s * s;
        let velocity =
            -a * w * sin1 - self.correction * w * (2.0 * cos3 * s * c - sin3 * s * s);
        PathState {
            time: t,
            position,
            velocity,
        }
    }
}

/// `(sin z, cos z)` from a single complex exponential.
fn sin_cos(z: Complex64) -> (Complex64, Complex64) {
    let e = (Complex64::i() * z).exp();
    let ei = e.inv();
    ((e - ei) * Complex64::new(0.0, -0.5), 0.5 * (e + ei))
}

/// Evaluates the first-order Lindstedt–Poincaré path at `t`.
pub fn lindstedt_path(constants: &LindstedtConstants, potential: &PotentialModel, t: f64) -> Complex64 {
    LindstedtPath::for_potential(*constants, potential).position(t)
}

/// `ω₀ = √a` on the principal branch, so `a < 0` gives an imaginary frequency.
pub fn bare_frequency(potential: &PotentialModel) -> Complex64 {
    Complex64::new(potential.curvature(), 0.0).sqrt()
}
