//! Closed-form evolution of a Gaussian packet in `V = ½Mω²x²`, with
//! `ω² < 0` (inverted oscillator) and `ω² = 0` (free particle) allowed.
//!
//! The packet `N·exp(−(x−l)²/2α² + ip₀(x−l)/ħ)` stays Gaussian:
//!
//! ```text
//! ψ(x, t) = N·Z^{−1/2}·exp(i/ħ·[A(x−q)² + p(x−q) + ½(pq − p₀l)])
//! ```
//!
//! with `(q, p)` the classical trajectory, `Z = C + (2A₀/M)·S`,
//! `A = (M/2)·Ż/Z`, `A₀ = iħ/2α²`, `C = cos ωt` and `S = sin(ωt)/ω`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{GridSpec, WavefunctionGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticGaussian {
    pub mass: f64,
    pub hbar: f64,
    /// `ω²`; negative for an inverted oscillator.
    pub omega_sq: f64,
    pub alpha: f64,
    pub center: f64,
    pub momentum: f64,
    /// `ψ(l, 0)`.
    pub amplitude: f64,
}

impl AnalyticGaussian {
    /// Unit-norm packet.
    pub fn normalized(mass: f64, hbar: f64, omega_sq: f64, alpha: f64, center: f64, momentum: f64) -> Self {
        Self {
            mass,
            hbar,
            omega_sq,
            alpha,
            center,
            momentum,
            amplitude: (std::f64::consts::PI * alpha * alpha).powf(-0.25),
        }
    }

    /// `(cos ωt, sin(ωt)/ω)` for real `ω²` of either sign.
    fn c_s(&self, t: f64) -> (f64, f64) {
        let w2 = self.omega_sq;
        if w2 > 0.0 {
            let w = w2.sqrt();
            ((w * t).cos(), (w * t).sin() / w)
        } else if w2 < 0.0 {
            let k = (-w2).sqrt();
            ((k * t).cosh(), (k * t).sinh() / k)
        } else {
            (1.0, t)
        }
    }

    /// Classical centre `(q, p)` at `t`.
    pub fn center_at(&self, t: f64) -> (f64, f64) {
        let (c, s) = self.c_s(t);
        let m = self.mass;
        let q = self.center * c + self.momentum / m * s;
        let p = self.momentum * c - m * self.omega_sq * self.center * s;
        (q, p)
    }

    fn z(&self, t: f64) -> (Complex64, Complex64) {
        let (c, s) = self.c_s(t);
        let a0 = Complex64::new(0.0, self.hbar / (2.0 * self.alpha * self.alpha));
        let k = 2.0 * a0 / self.mass;
        (c + k * s, -self.omega_sq * s + k * c)
    }

    /// `Z^{−1/2}` continued from `Z(0) = 1` along `[0, t]`.
    fn inv_sqrt_z(&self, t: f64) -> Complex64 {
        let (z, _) = self.z(t);
        let scale = self.omega_sq.abs().sqrt() + self.hbar / (self.mass * self.alpha * self.alpha);
        let steps = (64.0 * (1.0 + scale * t.abs())).ceil() as usize;
        let mut arg = 0.0;
        let mut prev = Complex64::new(1.0, 0.0);
        for k in 1..=steps {
            let (zk, _) = self.z(t * k as f64 / steps as f64);
            arg += (zk / prev).arg();
            prev = zk;
        }
        Complex64::from_polar(z.norm().powf(-0.5), -0.5 * arg)
    }

    /// Width ratio `|Z(t)|`: `σ(t) = α·|Z(t)|`.
    pub fn width_ratio(&self, t: f64) -> f64 {
        self.z(t).0.norm()
    }

    /// Returns a closure-friendly evaluator for one time.
    pub fn at(&self, t: f64) -> GaussianSnapshot {
        let (q, p) = self.center_at(t);
        let (z, zd) = self.z(t);
        GaussianSnapshot {
            hbar: self.hbar,
            q,
            p,
            a: 0.5 * self.mass * zd / z,
            phase: 0.5 * (p * q - self.momentum * self.center),
            pre: self.amplitude * self.inv_sqrt_z(t),
        }
    }

    pub fn value(&self, x: f64, t: f64) -> Complex64 {
        self.at(t).value(x)
    }

    pub fn sample(&self, grid: GridSpec, t: f64) -> Result<WavefunctionGrid> {
        let snap = self.at(t);
        WavefunctionGrid::from_fn(grid, t, |x| snap.value(x))
    }

    /// Bohmian trajectory from `seed`: the packet moves rigidly with the
    /// centre while stretching with `|Z|`.
    pub fn bohm_trajectory(&self, seed: f64, t: f64) -> f64 {
        let (q, _) = self.center_at(t);
        q + (seed - self.center) * self.width_ratio(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.hbar > 0.0 && self.alpha > 0.0) {
            return Err(Error::InvalidInput("mass, hbar and alpha must be positive".into()));
        }
        Ok(())
    }
}

/// The packet frozen at one time.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSnapshot {
    hbar: f64,
    q: f64,
    p: f64,
    a: Complex64,
    phase: f64,
    pre: Complex64,
}

impl GaussianSnapshot {
    pub fn value(&self, x: f64) -> Complex64 {
        let d = x - self.q;
        let e = Complex64::i() / self.hbar * (self.a * d * d + self.p * d + self.phase);
        self.pre * e.exp()
    }
}
