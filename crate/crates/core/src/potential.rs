//! Polynomial potentials with closed-form derivatives of every order.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Highest polynomial degree accepted by [`PotentialModel`].
pub const MAX_DEGREE: usize = 16;

/// Parameters of the quartic double well `V = ½·M·a·x² + ¼·M·λ·K·x⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWell {
    pub mass: f64,
    pub a: f64,
    pub lambda: f64,
    pub k: f64,
    pub hbar: f64,
}

impl DoubleWell {
    /// Tunneling parameter set: M = 1, a = −2, λ = 10⁻⁴, K = 1, ħ = 1.
    pub const TUNNELING: DoubleWell = DoubleWell {
        mass: 1.0,
        a: -2.0,
        lambda: 1e-4,
        k: 1.0,
        hbar: 1.0,
    };
}

/// One-dimensional polynomial potential `V(x) = Σ cₘ xᵐ` together with the
/// particle mass and ħ.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    coefficients: Vec<f64>,
    mass: f64,
    hbar: f64,
}

impl PotentialModel {
    pub fn new(coefficients: Vec<f64>, mass: f64, hbar: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {mass}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite potential coefficient".into()));
        }
        let mut coefficients = coefficients;
        while coefficients.len() > 1 && coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(0.0);
        }
        if coefficients.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidInput(format!(
                "degree {} exceeds the maximum of {MAX_DEGREE}",
                coefficients.len() - 1
            )));
        }
        Ok(Self {
            coefficients,
            mass,
            hbar,
        })
    }

    pub fn free(mass: f64, hbar: f64) -> Result<Self> {
        Self::new(vec![0.0], mass, hbar)
    }

    /// `V = ½·M·ω₀²·x²`.
    pub fn harmonic(mass: f64, omega0: f64, hbar: f64) -> Result<Self> {
        Self::new(vec![0.0, 0.0, 0.5 * mass * omega0 * omega0], mass, hbar)
    }

    pub fn double_well(p: DoubleWell) -> Result<Self> {
        Self::new(
            vec![0.0, 0.0, 0.5 * p.mass * p.a, 0.0, 0.25 * p.mass * p.lambda * p.k],
            p.mass,
            p.hbar,
        )
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `cₘ`, zero past the degree.
    pub fn coefficient(&self, m: usize) -> f64 {
        self.coefficients.get(m).copied().unwrap_or(0.0)
    }

    /// True when only c₀, c₂ and c₄ may be non-zero.
    pub fn is_even_quartic(&self) -> bool {
        self.degree() <= 4 && self.coefficient(1) == 0.0 && self.coefficient(3) == 0.0
    }

    /// Quadratic curvature `a = V''(0)/M`.
    pub fn curvature(&self) -> f64 {
        2.0 * self.coefficient(2) / self.mass
    }

    /// Quartic strength `λ·K = 4·c₄/M`.
    pub fn quartic_strength(&self) -> f64 {
        4.0 * self.coefficient(4) / self.mass
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `dᵐV/dxᵐ` at `x`, by exact polynomial differentiation.
    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        if order > self.degree() {
            return 0.0;
        }
        let mut acc = 0.0;
        for m in (order..=self.degree()).rev() {
            acc = acc * x + self.coefficients[m] * falling_factorial(m, order);
        }
        acc
    }

    /// Same as [`PotentialModel::derivative`] for complex positions.
    pub fn derivative_complex(&self, order: usize, x: Complex64) -> Complex64 {
        if order > self.degree() {
            return Complex64::new(0.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for m in (order..=self.degree()).rev() {
            acc = acc * x + self.coefficients[m] * falling_factorial(m, order);
        }
        acc
    }

    pub fn value_complex(&self, x: Complex64) -> Complex64 {
        self.derivative_complex(0, x)
    }

    /// Force `−V'(x)`.
    pub fn force(&self, x: f64) -> f64 {
        -self.derivative(1, x)
    }

    /// Coefficient-wise sum; masses and ħ must agree.
    pub fn try_add(&self, other: &PotentialModel) -> Result<PotentialModel> {
        if self.mass != other.mass || self.hbar != other.hbar {
            return Err(Error::InvalidInput(
                "cannot add potentials with different mass or hbar".into(),
            ));
        }
        let n = self.coefficients.len().max(other.coefficients.len());
        let c = (0..n)
            .map(|m| self.coefficient(m) + other.coefficient(m))
            .collect();
        PotentialModel::new(c, self.mass, self.hbar)
    }
}

/// `m·(m−1)···(m−k+1)` as a float.
fn falling_factorial(m: usize, k: usize) -> f64 {
    ((m - k + 1)..=m).fold(1.0, |acc, j| acc * j as f64)
}
