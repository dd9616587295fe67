//! Closed-form kernels used as references.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check(mass: f64, hbar: f64, duration: f64) -> Result<()> {
    if !(mass > 0.0 && hbar > 0.0 && duration > 0.0) {
        return Err(Error::InvalidInput(
            "mass, hbar and duration must be positive".into(),
        ));
    }
    Ok(())
}

/// Free-particle kernel `√(M/2πiħt)·exp(iM(x_t−x₀)²/2ħt)`.
pub fn free_kernel(mass: f64, hbar: f64, x0: f64, xt: f64, duration: f64) -> Result<Complex64> {
    check(mass, hbar, duration)?;
    let pre = (Complex64::new(mass, 0.0) / Complex64::new(0.0, 2.0 * PI * hbar * duration)).sqrt();
    let d = xt - x0;
    Ok(pre * Complex64::new(0.0, mass * d * d / (2.0 * hbar * duration)).exp())
}

/// Kernel of `V = ½Mω²x²`. `omega` may be imaginary (inverted oscillator).
///
/// The square root is split as `√(M/2πiħt)·√(ωt/sin ωt)`, each on the
/// principal branch, which is the same convention the series uses.
pub fn harmonic_kernel(
    mass: f64,
    omega: Complex64,
    hbar: f64,
    x0: f64,
    xt: f64,
    duration: f64,
) -> Result<Complex64> {
    check(mass, hbar, duration)?;
    let wt = omega * duration;
    if wt.norm() < 1e-12 {
        return free_kernel(mass, hbar, x0, xt, duration);
    }
    let s = wt.sin();
    if s.norm() < 1e-12 {
        return Err(Error::ConjugatePoint { sin_value: s.norm() });
    }
    let pre = (Complex64::new(mass, 0.0) / Complex64::new(0.0, 2.0 * PI * hbar * duration)).sqrt()
        * (wt / s).sqrt();
    let action = mass * omega / (2.0 * s) * ((x0 * x0 + xt * xt) * wt.cos() - 2.0 * x0 * xt);
    Ok(pre * (Complex64::i() * action / hbar).exp())
}
