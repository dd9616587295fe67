//! Polar (Madelung) form `ψ = R·exp(iS_M/ħ)`, the quantum potential
//! `Q = −(ħ²/2M)·R″/R` and the continuity residual `∂ₓ(ρv) + ∂ₜρ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolve::{GridSpec, WavefunctionGrid};

/// Which edge the phase unwrapping starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnwrapDirection {
    #[default]
    LeftToRight,
    RightToLeft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MadelungOptions {
    pub mass: f64,
    pub hbar: f64,
    /// Points with `R < node_floor·max R` are treated as nodes.
    pub node_floor: f64,
    pub direction: UnwrapDirection,
}

impl MadelungOptions {
    pub fn new(mass: f64, hbar: f64) -> Self {
        Self {
            mass,
            hbar,
            node_floor: 1e-8,
            direction: UnwrapDirection::LeftToRight,
        }
    }
}

/// Madelung variables on a grid. `q` is empty until
/// [`MadelungFields::with_quantum_potential`] fills it.
#[derive(Debug, Clone, PartialEq)]
pub struct MadelungFields {
    pub grid: GridSpec,
    pub time: f64,
    pub r: Vec<f64>,
    pub s_m: Vec<f64>,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
    /// Node points: phase interpolated, `Q` copied from a neighbour.
    pub nodes: Vec<bool>,
}

impl MadelungFields {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn with_quantum_potential(mut self, mass: f64, hbar: f64) -> Self {
        self.q = quantum_potential(&self, mass, hbar);
        self
    }

    /// `∫_{x ≥ x_split} ρ dx`, trapezoid with the straddling cell split.
    pub fn probability_right_of(&self, x_split: f64) -> f64 {
        let g = self.grid;
        let dx = g.dx();
        let mut p = 0.0;
        for i in 0..g.n_points - 1 {
            let (xa, xb) = (g.x(i), g.x(i + 1));
            if xb <= x_split {
                continue;
            }
            if xa >= x_split {
                p += 0.5 * (self.rho[i] + self.rho[i + 1]) * dx;
            } else {
                let u = (x_split - xa) / dx;
                let r = self.rho[i] + u * (self.rho[i + 1] - self.rho[i]);
                p += 0.5 * (r + self.rho[i + 1]) * (xb - x_split);
            }
        }
        p
    }
}

fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// First derivative with central differences inside and second-order
/// one-sided stencils at the two edges.
pub fn gradient(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    }
    out
}

/// Second derivative, central inside, second-order one-sided at the edges
/// (needs at least four points).
pub fn laplacian(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    if n < 4 {
        return out;
    }
    let h2 = dx * dx;
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    for i in 1..n - 1 {
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    out
}

/// Splits `ψ` into `R`, unwrapped `S_M`, `ρ = R²` and `v = ∂ₓS_M/M`.
pub fn decompose(psi: &WavefunctionGrid, options: &MadelungOptions) -> MadelungFields {
    let n = psi.n_points;
    let r: Vec<f64> = psi.values.iter().map(|z| z.norm()).collect();
    let peak = r.iter().cloned().fold(0.0, f64::max);
    let floor = options.node_floor * peak;
    let nodes: Vec<bool> = r.iter().map(|&x| x < floor || peak == 0.0).collect();

    // unwrap over non-node points in the chosen direction
    let order: Vec<usize> = match options.direction {
        UnwrapDirection::LeftToRight => (0..n).collect(),
        UnwrapDirection::RightToLeft => (0..n).rev().collect(),
    };
    let mut phase = vec![f64::NAN; n];
    let mut prev: Option<(f64, f64)> = None; // (raw, unwrapped)
    for &i in &order {
        if nodes[i] {
            continue;
        }
        let raw = psi.values[i].arg();
        let u = match prev {
            None => raw,
            Some((pr, pu)) => pu + wrap(raw - pr),
        };
        phase[i] = u;
        prev = Some((raw, u));
    }
    fill_nodes(&mut phase);
    let s_m: Vec<f64> = phase.iter().map(|p| options.hbar * p).collect();
    let dx = psi.dx();
    let v = gradient(&s_m, dx).into_iter().map(|g| g / options.mass).collect();
    let rho = r.iter().map(|x| x * x).collect();
    MadelungFields {
        grid: psi.grid(),
        time: psi.time,
        r,
        s_m,
        rho,
        v,
        q: Vec::new(),
        nodes,
    }
}

/// Linear interpolation across NaN runs, constant extrapolation at the ends.
fn fill_nodes(p: &mut [f64]) {
    let known: Vec<usize> = (0..p.len()).filter(|&i| !p[i].is_nan()).collect();
    if known.is_empty() {
        p.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let (first, last) = (known[0], known[known.len() - 1]);
    for i in 0..first {
        p[i] = p[first];
    }
    for i in last + 1..p.len() {
        p[i] = p[last];
    }
    for w in known.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in a + 1..b {
            let u = (i - a) as f64 / (b - a) as f64;
            p[i] = p[a] + u * (p[b] - p[a]);
        }
    }
}

/// `Q = −(ħ²/2M)·R″/R`. At node points `Q` takes the value of the nearest
/// non-node point.
pub fn quantum_potential(fields: &MadelungFields, mass: f64, hbar: f64) -> Vec<f64> {
    let dx = fields.grid.dx();
    let lap = laplacian(&fields.r, dx);
    let c = -hbar * hbar / (2.0 * mass);
    let n = fields.len();
    let mut q: Vec<f64> = (0..n)
        .map(|i| if fields.nodes[i] { f64::NAN } else { c * lap[i] / fields.r[i] })
        .collect();
    // nearest non-node value, ties to the left
    let known: Vec<usize> = (0..n).filter(|&i| !fields.nodes[i]).collect();
    if known.is_empty() {
        return vec![0.0; n];
    }
    let mut k = 0;
    for i in 0..n {
        if !q[i].is_nan() {
            continue;
        }
        while k + 1 < known.len() && known[k + 1] < i {
            k += 1;
        }
        let left = known[k];
        let pick = match known.get(k + 1) {
            Some(&right) if left > i || right - i < i - left => right,
            _ if left > i => left,
            _ => left,
        };
        q[i] = q[pick];
    }
    q
}

/// `∂ₓ(ρv) + ∂ₜρ` at the midpoint in time: the flux divergence is averaged
/// over the two snapshots and `∂ₜρ = (ρ₊ − ρ)/dt`.
pub fn continuity_residual(fields_t: &MadelungFields, fields_t_plus: &MadelungFields, dt: f64) -> Result<Vec<f64>> {
    if fields_t.grid != fields_t_plus.grid {
        return Err(Error::GridMismatch);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let dx = fields_t.grid.dx();
    let flux = |f: &MadelungFields| -> Vec<f64> {
        let j: Vec<f64> = f.rho.iter().zip(&f.v).map(|(r, v)| r * v).collect();
        gradient(&j, dx)
    };
    let (a, b) = (flux(fields_t), flux(fields_t_plus));
    Ok((0..fields_t.len())
        .map(|i| 0.5 * (a[i] + b[i]) + (fields_t_plus.rho[i] - fields_t.rho[i]) / dt)
        .collect())
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn opts() -> MadelungOptions {
        MadelungOptions::new(1.0, 1.0)
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(-8.0, 8.0, n).unwrap()
    }

    fn gaussian(alpha: f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new((-x * x / (4.0 * alpha * alpha)).exp(), 0.0)
    }

    #[test]
    fn real_gaussian_has_no_phase() {
        let psi = WavefunctionGrid::from_fn(grid(513), 0.0, gaussian(0.7)).unwrap();
        let f = decompose(&psi, &opts());
        assert!(f.s_m.iter().all(|&s| s == 0.0));
        for (r, z) in f.r.iter().zip(&psi.values) {
            assert_eq!(*r, z.re);
        }
        for (rho, r) in f.rho.iter().zip(&f.r) {
            assert_eq!(*rho, r * r);
        }
    }

    #[test]
    fn plane_wave_phase_is_linear() {
        let p = 3.7;
        let g = grid(1001);
        let psi = WavefunctionGrid::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, p * x)).unwrap();
        for dir in [UnwrapDirection::LeftToRight, UnwrapDirection::RightToLeft] {
            let f = decompose(&psi, &MadelungOptions { direction: dir, ..opts() });
            let c = f.s_m[0] - p * g.x(0);
            for (i, s) in f.s_m.iter().enumerate() {
                assert!((s - (p * g.x(i) + c)).abs() < 1e-9);
            }
            assert!(f.v.iter().all(|v| (v - p).abs() < 1e-9));
            let q = quantum_potential(&f, 1.0, 1.0);
            assert!(max_abs(&q) < 1e-9);
        }
    }

    #[test]
    fn gaussian_quantum_potential() {
        let alpha = 0.8;
        let g = grid(4001);
        let psi = WavefunctionGrid::from_fn(g, 0.0, gaussian(alpha)).unwrap();
        let f = decompose(&psi, &opts()).with_quantum_potential(1.0, 1.0);
        let a2 = alpha * alpha;
        for (i, x) in g.xs().into_iter().enumerate() {
            if f.nodes[i] {
                continue;
            }
            let exact = -0.5 * (x * x / (4.0 * a2 * a2) - 1.0 / (2.0 * a2));
            assert!((f.q[i] - exact).abs() < 1e-4 * exact.abs().max(1.0), "x {x}");
        }
        let mid = g.n_points / 2;
        assert!((f.q[mid] - 1.0 / (4.0 * a2)).abs() < 1e-5);
    }

    #[test]
    fn node_points_are_flagged_and_filled() {
        let g = grid(801);
        let psi = WavefunctionGrid::from_fn(g, 0.0, |x| Complex64::from_polar(x, 0.5 * x)).unwrap();
        let f = decompose(&psi, &opts()).with_quantum_potential(1.0, 1.0);
        let mid = 400;
        assert!(f.nodes[mid]);
        assert!(f.s_m.iter().all(|s| s.is_finite()));
        assert!(f.q.iter().all(|q| q.is_finite()));
        assert_eq!(f.q[mid], f.q[mid - 1]);
    }

    #[test]
    fn global_phase_and_scale_leave_q_unchanged() {
        let g = grid(1025);
        let psi = WavefunctionGrid::from_fn(g, 0.0, |x| {
            Complex64::from_polar((-(x - 0.5) * (x - 0.5) / 2.0).exp() + 0.3 * (-x * x).exp(), 0.4 * x * x)
        })
        .unwrap();
        let base = decompose(&psi, &opts()).with_quantum_potential(1.0, 1.0).q;
        // multiplication by i or by a power of two is exact
        let rot = WavefunctionGrid { values: psi.values.iter().map(|z| z * Complex64::i()).collect(), ..psi.clone() };
        assert_eq!(decompose(&rot, &opts()).with_quantum_potential(1.0, 1.0).q, base);
        let dbl = WavefunctionGrid { values: psi.values.iter().map(|z| z * 4.0).collect(), ..psi.clone() };
        assert_eq!(decompose(&dbl, &opts()).with_quantum_potential(1.0, 1.0).q, base);
        let gen = WavefunctionGrid {
            values: psi.values.iter().map(|z| z * Complex64::from_polar(2.7, 0.9)).collect(),
            ..psi.clone()
        };
        let q = decompose(&gen, &opts()).with_quantum_potential(1.0, 1.0).q;
        for (a, b) in q.iter().zip(&base) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
    }

    #[test]
    fn static_state_has_zero_residual() {
        let g = grid(2048);
        let psi = WavefunctionGrid::from_fn(g, 0.0, gaussian(1.0)).unwrap();
        let f = decompose(&psi, &opts());
        let later = WavefunctionGrid {
            time: 0.1,
            values: psi.values.iter().map(|z| z * Complex64::from_polar(1.0, -0.05)).collect(),
            ..psi.clone()
        };
        let r = continuity_residual(&f, &decompose(&later, &opts()), 0.1).unwrap();
        assert!(max_abs(&r) < 1e-6);
    }

    #[test]
    fn mismatched_grids() {
        let a = WavefunctionGrid::from_fn(grid(101), 0.0, gaussian(1.0)).unwrap();
        let b = WavefunctionGrid::from_fn(grid(103), 0.0, gaussian(1.0)).unwrap();
        let r = continuity_residual(&decompose(&a, &opts()), &decompose(&b, &opts()), 0.1);
        assert_eq!(r, Err(Error::GridMismatch));
    }

    #[test]
    fn stencils_are_second_order() {
        let f = |n: usize| {
            let g = GridSpec::new(0.0, 1.0, n).unwrap();
            let y: Vec<f64> = g.xs().iter().map(|x| x.sin()).collect();
            let d1 = gradient(&y, g.dx());
            let d2 = laplacian(&y, g.dx());
            let e1 = g.xs().iter().zip(&d1).map(|(x, d)| (d - x.cos()).abs()).fold(0.0, f64::max);
            let e2 = g.xs().iter().zip(&d2).map(|(x, d)| (d + x.sin()).abs()).fold(0.0, f64::max);
            (e1, e2)
        };
        let (a1, a2) = f(41);
        let (b1, b2) = f(81);
        assert!(a1 / b1 > 3.5 && a2 / b2 > 3.5, "{a1} {b1} {a2} {b2}");
    }
}
