use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Highest derivative order [`g_jet`] accepts.
pub const MAX_JET_ORDER: usize = 64;

/// Taylor jet of `g(φ) = √(φ / sin φ)` about a (complex) accumulated phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseJet {
    pub center: Complex64,
    jet: Jet,
}

impl PhaseJet {
    pub fn coefficients(&self) -> &[Complex64] {
        self.jet.coefficients()
    }

    pub fn order(&self) -> usize {
        self.jet.order()
    }

    pub fn value(&self) -> Complex64 {
        self.jet.value()
    }

    /// `dⁿg/dφⁿ` at the centre.
    pub fn derivative(&self, n: usize) -> Complex64 {
        self.jet.derivative(n)
    }
}

/// True when `sin φ` is (numerically) zero away from the removable point φ = 0.
pub fn is_near_caustic(phi: Complex64) -> bool {
    phi.sin().norm() < 1e-8 && phi.norm() >= 1.0
}

/// Builds the jet of `√(φ/sin φ)` at `phi` up to `order`.
///
/// Away from the origin the jet is `(u / sin u)^{1/2}` with `u = phi + h`;
/// near the origin the quotient is formed from the Maclaurin series of
/// `sin u / u` so the removable singularity never divides by zero.
pub fn g_jet(phi: Complex64, order: usize) -> Result<PhaseJet> {
    if order > MAX_JET_ORDER {
        return Err(Error::InvalidInput(format!(
            "jet order {order} exceeds {MAX_JET_ORDER}"
        )));
    }
    if !(phi.re.is_finite() && phi.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite phase {phi}")));
    }
    if is_near_caustic(phi) {
        return Err(Error::NearCaustic {
            phi: phi.to_string(),
            sin_modulus: phi.sin().norm(),
        });
    }
    let u = Jet::variable(phi, order);
    let ratio = if phi.norm() > 0.5 {
        let (s, _) = u.sin_cos();
        u.div(&s)
    } else {
        sinc_series(&u, order).recip()
    };
    Ok(PhaseJet {
        center: phi,
        jet: ratio.sqrt(),
    })
}

/// `sin u / u` from its Maclaurin series, for `|u(0)| ≤ 1/2`.
fn sinc_series(u: &Jet, order: usize) -> Jet {
    // |φ|² ≤ 1/4 here, so nine terms past the requested order reach 1e-18
    let terms = order / 2 + 9;
    let coeff = |k: usize| {
        let mut f = 1.0;
        for j in 1..=(2 * k + 1) {
            f *= j as f64;
        }
        if k.is_multiple_of(2) { 1.0 / f } else { -1.0 / f }
    };
    // u² = φ² + 2φε + ε² is banded, so each Horner step is linear in order
    let phi = u.value();
    let (w0, w1) = (phi * phi, 2.0 * phi);
    let mut acc = vec![Complex64::new(0.0, 0.0); order + 1];
    acc[0] = Complex64::new(coeff(terms), 0.0);
    for k in (0..terms).rev() {
        for n in (0..=order).rev() {
            let mut v = w0 * acc[n];
            if n >= 1 {
                v += w1 * acc[n - 1];
            }
            if n >= 2 {
                v += acc[n - 2];
            }
            acc[n] = v;
        }
        acc[0] += coeff(k);
    }
    Jet::from_coefficients(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};
    use crate::jet::factorial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g(phi: Complex64) -> Complex64 {
        if phi.norm() < 1e-8 {
            return c(1.0, 0.0);
        }
        (phi / phi.sin()).sqrt()
    }

    #[test]
    fn origin_limit() {
        let j = g_jet(c(0.0, 0.0), 6).unwrap();
        assert!((j.derivative(0) - 1.0).norm() < 1e-15);
        assert!(j.derivative(1).norm() < 1e-15);
        assert!((j.derivative(2) - 1.0 / 6.0).norm() < 1e-14);
        assert!(j.derivative(3).norm() < 1e-14);
    }

    #[test]
    fn quarter_turn_value() {
        let j = g_jet(c(FRAC_PI_2, 0.0), 2).unwrap();
        assert!((j.value() - c(FRAC_PI_2.sqrt(), 0.0)).norm() < 1e-14);
        assert!((j.value().re - 1.25331).abs() < 1e-5);
    }

    #[test]
    fn caustic_guard() {
        assert!(matches!(g_jet(c(PI, 0.0), 4), Err(Error::NearCaustic { .. })));
        assert!(g_jet(c(PI - 1e-3, 0.0), 4).is_ok());
    }

    #[test]
    fn matches_cauchy_integrals() {
        // g^(n)(φ) = n!/(2πi) ∮ g(z)/(z−φ)^{n+1} dz on a small circle,
        // trapezoid rule (spectrally accurate for periodic integrands).
        let points = [c(0.3, 0.0), c(1.2, 0.0), c(0.0, 1.4), c(0.8, -0.6), c(2.5, 0.2), c(0.6, 0.0)];
        let (r, nodes) = (0.25, 128);
        for phi in points {
            let jet = g_jet(phi, 6).unwrap();
            for n in 0..=6 {
                let mut acc = c(0.0, 0.0);
                for k in 0..nodes {
                    let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
                    acc += g(phi + w * r) * w.powi(-(n as i32));
                }
                let cauchy = acc * factorial(n) / (nodes as f64 * r.powi(n as i32));
                let exact = jet.derivative(n);
                assert!(
                    (cauchy - exact).norm() < 1e-9 * exact.norm().max(1.0),
                    "phi {phi} n {n}: {exact} vs {cauchy}"
                );
            }
        }
    }

    #[test]
    fn both_branches_agree_near_switch() {
        // Just inside and just outside the series radius.
        let a = g_jet(c(0.4999999, 0.0), 10).unwrap();
        let b = g_jet(c(0.5000001, 0.0), 10).unwrap();
        for n in 0..=10 {
            let da = a.derivative(n);
            let db = b.derivative(n);
            assert!((da - db).norm() < 1e-5 * da.norm().max(1.0), "n {n}: {da} {db}");
        }
    }

    #[test]
    fn imaginary_phase_is_real_valued() {
        // φ = iθ gives √(θ / sinh θ), an even real function of θ.
        let theta: f64 = 0.9;
        let j = g_jet(c(0.0, theta), 4).unwrap();
        assert!((j.value() - c((theta / theta.sinh()).sqrt(), 0.0)).norm() < 1e-14);
        assert!(j.derivative(2).im.abs() < 1e-14);
    }

    #[test]
    fn order_limit() {
        assert!(g_jet(c(0.2, 0.0), MAX_JET_ORDER).is_ok());
        assert!(g_jet(c(0.2, 0.0), MAX_JET_ORDER + 1).is_err());
    }
}
