use num_complex::Complex64;

use crate::classical::LindstedtConstants;
use crate::error::{Error, Result};
use crate::potential::PotentialModel;

/// `∫₀ᵗ ω(t′)⁻² dt′` in closed form for the double-well frequency
/// `ω² = p + q·cos(2ωt + 2φ)`, `p = a + 3λK·A²/2`, `q = 3λK·A²/2`.
///
/// The antiderivative is `atan(r·tan θ)/(ω·√Δ)` with `θ = ωt + φ`,
/// `Δ = p² − q²` and `r = (p − q)/√Δ`. It is evaluated in the equivalent
/// form `θ + atan(u(θ))`, `u = (r − 1)·sin θ cos θ / (1 + (r − 1)·sin²θ)`,
/// choosing the sign of `√Δ` that puts `r` near 1, and any remaining jump of
/// the principal `atan` along `[0, t]` is removed by adding multiples of π.
pub fn closed_form_inv_omega2(
    constants: &LindstedtConstants,
    potential: &PotentialModel,
    duration: f64,
) -> Result<Complex64> {
    if duration == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let a = potential.curvature();
    let q = 1.5 * potential.quartic_strength() * constants.amplitude_a * constants.amplitude_a;
    let p = a + q;
    let disc = p * p - q * q;
    let scale = p.norm_sqr().max(q.norm_sqr());
    if disc.norm() <= 1e-14 * scale || scale == 0.0 {
        return Err(Error::DiscriminantZero);
    }
    let mut root = disc.sqrt();
    let beta = p - q;
    if (beta / root - 1.0).norm() > (beta / -root - 1.0).norm() {
        root = -root;
    }
    let r1 = beta / root - 1.0;
    let w = constants.omega;
    let phi = constants.phase_phi0;

    let branch = |theta: Complex64| {
        let (s, c) = (theta.sin(), theta.cos());
        (r1 * s * c / (1.0 + r1 * s * s)).atan()
    };
    let steps = ((w.norm() * duration) / std::f64::consts::FRAC_PI_4).ceil() as usize + 1;
    let mut prev = branch(phi);
    let start = prev;
    let mut shift = 0.0;
    for k in 1..=steps {
        let t = duration * k as f64 / steps as f64;
        let cur = branch(w * t + phi) + shift;
        let jump = cur.re - prev.re;
        let fix = (jump / std::f64::consts::PI).round() * std::f64::consts::PI;
        shift -= fix;
        prev = cur - fix;
    }
    let numerator = w * duration + (prev - start);
    Ok(numerator / (w * root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{bare_frequency, fit_boundary_constants, LindstedtPath};
    use crate::potential::DoubleWell;
    use crate::quadrature::GaussLegendre;

    fn well(a: f64, lambda: f64) -> PotentialModel {
        PotentialModel::double_well(DoubleWell {
            a,
            lambda,
            ..DoubleWell::TUNNELING
        })
        .unwrap()
    }

    /// Brute-force quadrature of the same ω(t)⁻² the closed form integrates.
    fn quadrature(k: &LindstedtConstants, v: &PotentialModel, t: f64) -> Complex64 {
        let q = 1.5 * v.quartic_strength() * k.amplitude_a * k.amplitude_a;
        let p = v.curvature() + q;
        let rule = GaussLegendre::new(20);
        rule.integrate(0.0, t, 64, |s| {
            let th = k.omega * s + k.phase_phi0;
            (p + q * (2.0 * th).cos()).inv()
        })
    }

    #[test]
    fn harmonic_limit() {
        for a in [1.0, -2.0, 0.3] {
            let v = well(a, 0.0);
            let k = fit_boundary_constants(0.4, 1.1, 0.7, bare_frequency(&v), 0.0).unwrap();
            let j = closed_form_inv_omega2(&k, &v, 0.7).unwrap();
            assert!((j - Complex64::new(0.7 / a, 0.0)).norm() < 1e-14, "a {a}: {j}");
        }
    }

    #[test]
    fn zero_duration() {
        let v = well(-2.0, 1e-4);
        let k = fit_boundary_constants(-3.0, -2.5, 0.5, bare_frequency(&v), 1e-4).unwrap();
        assert_eq!(closed_form_inv_omega2(&k, &v, 0.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tunneling_parameters_match_quadrature() {
        let v = well(-2.0, 1e-4);
        let k = fit_boundary_constants(-3.126, -3.0, 0.5, bare_frequency(&v), v.quartic_strength())
            .unwrap();
        let j = closed_form_inv_omega2(&k, &v, 0.5).unwrap();
        let q = quadrature(&k, &v, 0.5);
        assert!((j - q).norm() < 1e-6 * q.norm(), "{j} vs {q}");
    }

    #[test]
    fn matches_quadrature_along_the_path() {
        // ω⁻² evaluated on the actual perturbative path differs from the
        // double-angle form only at higher order in λ.
        let v = well(-2.0, 1e-4);
        let k = fit_boundary_constants(-3.126, -3.0, 0.5, bare_frequency(&v), v.quartic_strength())
            .unwrap();
        let path = LindstedtPath::for_potential(k, &v);
        let rule = GaussLegendre::new(20);
        let direct: Complex64 = rule.integrate(0.0, 0.5, 16, |s| {
            let x = path.position(s);
            (v.derivative_complex(2, x) / v.mass()).inv()
        });
        let j = closed_form_inv_omega2(&k, &v, 0.5).unwrap();
        assert!((j - direct).norm() < 1e-6 * direct.norm());
    }

    #[test]
    fn continuous_across_tan_poles() {
        // Real single well over several half periods: the bare arctan would
        // jump at every pole of tan θ.
        let v = well(1.0, 5e-2);
        let k = fit_boundary_constants(0.5, 1.5, 2.0, bare_frequency(&v), v.quartic_strength())
            .unwrap();
        for t in [0.5, 1.7, 3.0, 5.5, 9.0] {
            let j = closed_form_inv_omega2(&k, &v, t).unwrap();
            let q = quadrature(&k, &v, t);
            assert!((j - q).norm() < 1e-9 * q.norm(), "t {t}: {j} vs {q}");
        }
    }

    #[test]
    fn discriminant_zero() {
        let v = well(0.0, 0.0);
        let k = LindstedtConstants {
            amplitude_a: Complex64::new(1.0, 0.0),
            phase_phi0: Complex64::new(0.0, 0.0),
            omega0: Complex64::new(1.0, 0.0),
            omega: Complex64::new(1.0, 0.0),
        };
        assert!(matches!(closed_form_inv_omega2(&k, &v, 1.0), Err(Error::DiscriminantZero)));
    }
}
