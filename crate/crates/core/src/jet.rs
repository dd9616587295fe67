//! Truncated power series ("jets") over the complex numbers.
//!
//! A [`Jet`] of order `n` stores the Taylor coefficients `c₀..cₙ` of a
//! function about some centre; the k-th derivative there is `k!·cₖ`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); order + 1],
        }
    }

    pub fn constant(value: Complex64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.coeffs[0] = value;
        j
    }

    /// The independent variable `centre + h`.
    pub fn variable(centre: Complex64, order: usize) -> Self {
        let mut j = Self::constant(centre, order);
        if order >= 1 {
            j.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coefficients(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty());
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `dᵏ/dhᵏ` at the centre.
    pub fn derivative(&self, k: usize) -> Complex64 {
        self.coeffs[k] * factorial(k)
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(Complex64::new(1.0, 0.0), self.order()).div(self)
    }

    /// Series division; the divisor must have a non-zero constant term.
    pub fn div(&self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        let b0 = rhs.coeffs[0];
        let mut q = vec![Complex64::new(0.0, 0.0); n + 1];
        for k in 0..=n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Jet { coeffs: q }
    }

    /// `self^p` on the principal branch of the constant term.
    pub fn powf(&self, p: f64) -> Jet {
        let n = self.order();
        let a0 = self.coeffs[0];
        let mut f = vec![Complex64::new(0.0, 0.0); n + 1];
        f[0] = a0.powf(p);
        for k in 1..=n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                let w = p * j as f64 - (k - j) as f64;
                acc += self.coeffs[j] * f[k - j] * w;
            }
            f[k] = acc / (a0 * k as f64);
        }
        Jet { coeffs: f }
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Jet {
        let n = self.order();
        let mut r = vec![Complex64::new(0.0, 0.0); n + 1];
        r[0] = self.coeffs[0].sqrt();
        let two_r0 = r[0] * 2.0;
        for k in 1..=n {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= r[j] * r[k - j];
            }
            r[k] = acc / two_r0;
        }
        Jet { coeffs: r }
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.order();
        let mut s = vec![Complex64::new(0.0, 0.0); n + 1];
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..=n {
            let mut ds = Complex64::new(0.0, 0.0);
            let mut dc = Complex64::new(0.0, 0.0);
            for j in 1..=k {
                let w = self.coeffs[j] * j as f64;
                ds += w * c[k - j];
                dc -= w * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (Jet { coeffs: s }, Jet { coeffs: c })
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        Jet {
            coeffs: (0..=n).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        Jet {
            coeffs: (0..=n).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let n = self.order().min(rhs.order());
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum())
            .collect();
        Jet { coeffs }
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}
