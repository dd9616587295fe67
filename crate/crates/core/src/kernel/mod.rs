//! Propagator `K(x_t, t; x₀, 0)` as a series over the classical path.
//!
//! The general series multiplies the free prefactor `√(M/2πiħt)` and
//! `exp(iS_cl/ħ)` by
//!
//! ```text
//! Σ_k (1/k!)(−i/ħ)^k Σ_{m₁..m_k} Π_α [ I(m_α)/m_α! ] (ħ/−iM)^N · g^{(N)}(φ)
//! ```
//!
//! where `g(φ) = √(φ/sin φ)`, `φ = ∫ω dt`, `N = Σ m_α/2` and
//! `I(m) = ∫ V^{(m)}(x_cl)/ω^{m/2} dt`. Only even `m ≥ 4` contribute.

mod closed_form;
mod exact;
mod jet_phase;
pub mod lattice;

pub use closed_form::closed_form_inv_omega2;
pub use exact::{free_kernel, harmonic_kernel};
pub use jet_phase::{g_jet, is_near_caustic, PhaseJet, MAX_JET_ORDER};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::classical::{
    bare_frequency, solve_bvp_shooting, ClassicalPath, LindstedtConstants,
    LindstedtPath, PathSource, ShootingOptions, fit_first_order_constants,
};
use crate::error::{Error, Result};
use crate::jet::factorial;
use crate::potential::{PotentialModel, MAX_DEGREE};
use crate::quadrature::GaussLegendre;

/// Largest series order accepted.
pub const MAX_K: usize = 12;

/// Truncation and solver settings for kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub k_max: usize,
    /// Relative term size below which the series stops early.
    pub tol: f64,
    pub jet_order: usize,
    pub shooting: ShootingOptions,
    pub shooting_tol: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            k_max: 2,
            tol: 1e-12,
            jet_order: 4,
            shooting: ShootingOptions::default(),
            shooting_tol: 1e-12,
        }
    }
}

impl KernelParams {
    pub fn with_k_max(k_max: usize) -> Self {
        Self {
            k_max,
            jet_order: (2 * k_max).max(1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max > MAX_K {
            return Err(Error::InvalidInput(format!(
                "k_max {} exceeds {MAX_K}",
                self.k_max
            )));
        }
        if self.jet_order < 2 * self.k_max {
            return Err(Error::InvalidInput(format!(
                "jet_order {} must be at least 2·k_max = {}",
                self.jet_order,
                2 * self.k_max
            )));
        }
        if self.jet_order > MAX_JET_ORDER {
            return Err(Error::InvalidInput(format!(
                "jet_order {} exceeds {MAX_JET_ORDER}",
                self.jet_order
            )));
        }
        if !(self.tol >= 0.0) || !(self.shooting_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the truncation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub k: usize,
    /// The k-th series term, before the prefactor and `exp(iS/ħ)`.
    pub term: Complex64,
    /// Kernel value including every term up to this one.
    pub cumulative: Complex64,
}

/// A kernel value together with the quantities it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEvaluation {
    pub value: Complex64,
    pub action: Complex64,
    pub phase: Complex64,
    pub terms: Vec<SeriesTerm>,
}

/// `ω(t′) = √(V″(x_cl(t′))/M)`.
///
/// Principal branch, except that the cut runs along the negative imaginary
/// axis: `V″ < 0` gives `+i√|V″/M|` regardless of the sign of a rounding-level
/// imaginary part.
pub fn instantaneous_frequency(potential: &PotentialModel, path: &ClassicalPath, tprime: f64) -> Complex64 {
    let x = path.state(tprime).position;
    frequency_at(potential, x)
}

pub(crate) fn frequency_at(potential: &PotentialModel, x: Complex64) -> Complex64 {
    continuous_sqrt(potential.derivative_complex(2, x) / potential.mass())
}

/// `√z` with the cut on the negative imaginary axis.
pub fn continuous_sqrt(z: Complex64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    rot * (-Complex64::i() * z).sqrt()
}

/// `φ = ∫₀^upto ω(t′) dt′`.
pub fn accumulated_phase(potential: &PotentialModel, path: &ClassicalPath, upto: f64) -> Complex64 {
    if upto >= path.duration() {
        let [phi] = path.integrate(|st| [frequency_at(potential, st.position)]);
        return phi;
    }
    if upto <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let rule = GaussLegendre::new(8);
    let panels = 64;
    rule.integrate(0.0, upto, panels, |t| instantaneous_frequency(potential, path, t))
}

/// `I(m) = ∫₀ᵗ V^{(m)}(x_cl)/ω^{m/2} dt` for even `m ≥ 4`.
pub fn moment_integral(potential: &PotentialModel, path: &ClassicalPath, m: usize) -> Result<Complex64> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "moment order must be even and at least 4, got {m}"
        )));
    }
    if m > potential.degree() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let half = (m / 2) as i32;
    let mut bad = None;
    let [value] = path.integrate(|st| {
        let w = frequency_at(potential, st.position);
        if w.norm() == 0.0 {
            bad.get_or_insert(st.time);
        }
        [potential.derivative_complex(m, st.position) / w.powi(half)]
    });
    if let Some(t) = bad {
        return Err(Error::FrequencyZero { t });
    }
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::FrequencyZero { t: f64::NAN });
    }
    Ok(value)
}

fn prefactor(potential: &PotentialModel, duration: f64) -> Complex64 {
    let m = potential.mass();
    let hbar = potential.hbar();
    (Complex64::new(m, 0.0) / (Complex64::new(0.0, 2.0 * PI * hbar * duration))).sqrt()
}

/// Path for the kernel: shooting, or the first-order Lindstedt–Poincaré form
/// (even quartic potentials only).
pub fn classical_path_for(
    potential: &PotentialModel,
    x0: f64,
    xt: f64,
    duration: f64,
    params: &KernelParams,
    source: PathSource,
) -> Result<ClassicalPath> {
    match source {
        PathSource::Shooting => solve_bvp_shooting(
            potential,
            x0,
            xt,
            duration,
            (xt - x0) / duration,
            params.shooting_tol,
            params.shooting,
        ),
        PathSource::LindstedtPoincare => {
            let constants = lindstedt_constants(potential, x0, xt, duration)?;
            let lp = LindstedtPath::for_potential(constants, potential);
            Ok(ClassicalPath::perturbative(lp, x0, xt, duration, potential))
        }
    }
}

/// Boundary constants of the double-well path for the given endpoints: the
/// zeroth-order fit, refined so the first-order path meets `xt` exactly.
pub fn lindstedt_constants(
    potential: &PotentialModel,
    x0: f64,
    xt: f64,
    duration: f64,
) -> Result<LindstedtConstants> {
    if !potential.is_even_quartic() {
        return Err(Error::InvalidInput(
            "the Lindstedt-Poincare path needs an even quartic potential".into(),
        ));
    }
    let lk = potential.quartic_strength();
    fit_first_order_constants(x0, xt, duration, bare_frequency(potential), lk)
}

/// The general series, with the classical path from `path_source`.
pub fn kernel_series(
    potential: &PotentialModel,
    x0: f64,
    xt: f64,
    duration: f64,
    params: &KernelParams,
    path_source: PathSource,
) -> Result<KernelEvaluation> {
    params.validate()?;
    if !(duration > 0.0) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {duration}")));
    }
    let path = classical_path_for(potential, x0, xt, duration, params, path_source)?;
    kernel_series_on_path(potential, &path, params)
}

/// Even moment orders `4, 6, …` that can be non-zero for this potential.
fn moment_orders(potential: &PotentialModel) -> Vec<usize> {
    (4..=potential.degree()).step_by(2).collect()
}

/// The general series along an already computed path.
pub fn kernel_series_on_path(
    potential: &PotentialModel,
    path: &ClassicalPath,
    params: &KernelParams,
) -> Result<KernelEvaluation> {
    params.validate()?;
    let hbar = potential.hbar();
    let mass = potential.mass();
    let orders = moment_orders(potential);
    let max_half = orders.last().map_or(0, |m| m / 2);

    // One pass over the path: φ and every moment integral.
    const SLOTS: usize = 1 + (MAX_DEGREE - 2) / 2;
    let mut zero_freq = None;
    let integrals: [Complex64; SLOTS] = path.integrate(|st| {
        let w = frequency_at(potential, st.position);
        let mut out = [Complex64::new(0.0, 0.0); SLOTS];
        out[0] = w;
        if !orders.is_empty() {
            if w.norm() == 0.0 {
                zero_freq.get_or_insert(st.time);
            }
            let inv_w = w.inv();
            for (slot, &m) in orders.iter().enumerate() {
                out[slot + 1] = potential.derivative_complex(m, st.position) * inv_w.powi((m / 2) as i32);
            }
        }
        out
    });
    if let Some(t) = zero_freq {
        return Err(Error::FrequencyZero { t });
    }
    let phi = integrals[0];

    let needed_order = params.k_max * max_half;
    if needed_order > params.jet_order {
        return Err(Error::InvalidInput(format!(
            "jet_order {} is below the highest derivative needed ({needed_order})",
            params.jet_order
        )));
    }
    let jet = g_jet(phi, needed_order)?;

    // P(z) = Σ_m c(m) z^{m/2}; the m-tuple sum at order k is [z^N] P(z)^k.
    let mut poly = vec![Complex64::new(0.0, 0.0); max_half + 1];
    let hbar_over = Complex64::new(0.0, hbar / mass); // ħ/(−iM) = iħ/M
    for (slot, &m) in orders.iter().enumerate() {
        poly[m / 2] = integrals[slot + 1] / factorial(m) * hbar_over.powi((m / 2) as i32);
    }
    let minus_i_over_hbar = Complex64::new(0.0, -1.0 / hbar);
    let terms = sum_series(params, &jet, |k, power: &mut Vec<Complex64>| {
        if k > 0 {
            *power = poly_mul(power, &poly);
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (n, c) in power.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                s += c * jet.derivative(n);
            }
        }
        s * minus_i_over_hbar.powi(k as i32) / factorial(k)
    })?;
    Ok(assemble(potential, path.duration(), path.action(), phi, terms))
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Runs the k-sum with early stopping; returns raw terms (no prefactor).
fn sum_series<F>(params: &KernelParams, _jet: &PhaseJet, mut term_at: F) -> Result<Vec<Complex64>>
where
    F: FnMut(usize, &mut Vec<Complex64>) -> Complex64,
{
    let mut power = vec![Complex64::new(1.0, 0.0)];
    let mut partial = Complex64::new(0.0, 0.0);
    let mut terms = Vec::with_capacity(params.k_max + 1);
    let mut prev_norm = f64::INFINITY;
    for k in 0..=params.k_max {
        let term = term_at(k, &mut power);
        let norm = term.norm();
        if !norm.is_finite() {
            return Err(Error::SeriesDiverging { k });
        }
        if k > 0 && norm > 0.0 && norm >= prev_norm {
            return Err(Error::SeriesDiverging { k });
        }
        partial += term;
        terms.push(term);
        if k > 0 && norm <= params.tol * partial.norm() {
            break;
        }
        prev_norm = norm;
    }
    Ok(terms)
}

fn assemble(
    potential: &PotentialModel,
    duration: f64,
    action: Complex64,
    phi: Complex64,
    raw: Vec<Complex64>,
) -> KernelEvaluation {
    let front = prefactor(potential, duration) * (Complex64::i() * action / potential.hbar()).exp();
    let mut cumulative = Complex64::new(0.0, 0.0);
    let terms = raw
        .into_iter()
        .enumerate()
        .map(|(k, term)| {
            cumulative += term;
            SeriesTerm {
                k,
                term,
                cumulative: front * cumulative,
            }
        })
        .collect();
    KernelEvaluation {
        value: front * cumulative,
        action,
        phase: phi,
        terms,
    }
}

/// Perturbative double-well propagator along the first-order path fixed by
/// `constants`:
///
/// `K = √(M/2πiħt)·exp(iS/ħ)·Σ_k (1/k!)(iħλK/4M)^k J^k g^{(2k)}(φ)`,
/// `J = ∫ω⁻² dt` in closed form.
pub fn kernel_double_well(
    constants: &LindstedtConstants,
    potential: &PotentialModel,
    x0: f64,
    xt: f64,
    duration: f64,
    params: &KernelParams,
) -> Result<KernelEvaluation> {
    params.validate()?;
    if !potential.is_even_quartic() {
        return Err(Error::InvalidInput(
            "the double-well kernel needs an even quartic potential".into(),
        ));
    }
    if !(duration > 0.0) {
        return Err(Error::InvalidInput(format!("duration must be positive, got {duration}")));
    }
    let lp = LindstedtPath::for_potential(*constants, potential);
    let path = ClassicalPath::perturbative_deferred(lp, x0, xt, duration);
    let mass = potential.mass();
    let [action, phi] = path.integrate(|st| {
        [
            0.5 * mass * st.velocity * st.velocity - potential.value_complex(st.position),
            frequency_at(potential, st.position),
        ]
    });
    let jet = g_jet(phi, 2 * params.k_max)?;
    let j = if params.k_max > 0 {
        closed_form_inv_omega2(constants, potential, duration)?
    } else {
        Complex64::new(0.0, 0.0)
    };
    let coupling = Complex64::new(0.0, potential.hbar() * potential.quartic_strength() / (4.0 * mass));
    let base = coupling * j;
    let terms = sum_series(params, &jet, |k, _| {
        base.powi(k as i32) * jet.derivative(2 * k) / factorial(k)
    })?;
    Ok(assemble(potential, duration, action, phi, terms))
}

/// [`kernel_double_well`] with the boundary constants fitted to `(x0, xt)`.
pub fn double_well_kernel(
    potential: &PotentialModel,
    x0: f64,
    xt: f64,
    duration: f64,
    params: &KernelParams,
) -> Result<KernelEvaluation> {
    let constants = lindstedt_constants(potential, x0, xt, duration)?;
    kernel_double_well(&constants, potential, x0, xt, duration, params)
}
