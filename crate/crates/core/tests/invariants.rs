//! Randomised checks of the structural properties each module promises.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use proptest::prelude::*;

use qfd_core::classical::{bare_frequency, fit_boundary_constants, lindstedt_path, solve_bvp_shooting, PathSource, ShootingOptions};
use qfd_core::evolve::{propagate, GridSpec, PropagateOptions, WavefunctionGrid};
use qfd_core::kernel::{free_kernel, harmonic_kernel, kernel_series, KernelParams};
use qfd_core::madelung::{decompose, laplacian, MadelungOptions};
use qfd_core::oracle::{AnalyticGaussian, CrankNicolson};
use qfd_core::potential::{DoubleWell, PotentialModel};
use qfd_core::trajectories::{integrate_trajectories, TrajectoryOptions};
use qfd_core::{Complex64, Execution};

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

fn single_well(lambda: f64) -> PotentialModel {
    PotentialModel::double_well(DoubleWell { a: 1.0, lambda, ..DoubleWell::TUNNELING }).unwrap()
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn derivative_of_sum_is_sum_of_derivatives(
        a in prop::collection::vec(-3.0f64..3.0, 1..8),
        b in prop::collection::vec(-3.0f64..3.0, 1..8),
        m in 0usize..8,
        x in -4.0f64..4.0,
    ) {
        let (p, q) = (PotentialModel::new(a, 1.0, 1.0).unwrap(), PotentialModel::new(b, 1.0, 1.0).unwrap());
        let s = p.try_add(&q).unwrap();
        let (lhs, rhs) = (s.derivative(m, x), p.derivative(m, x) + q.derivative(m, x));
        prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * lhs.abs().max(1.0), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn lindstedt_starts_exactly_at_x_i(xi in -2.0f64..2.0, xf in -2.0f64..2.0, t in 0.2f64..2.8) {
        let v = single_well(1e-4);
        let c = fit_boundary_constants(xi, xf, t, bare_frequency(&v), v.quartic_strength()).unwrap();
        let start = lindstedt_path(&c, &v, 0.0);
        prop_assert!((start - Complex64::new(xi, 0.0)).norm() < 1e-12);
    }

    #[test]
    // kept clear of ω₀t = π, where A ~ 1/sin(ω₀t) and the O(λA³t) error grows
    fn lindstedt_and_shooting_agree_in_single_well(xi in -2.0f64..2.0, xf in -2.0f64..2.0, t in 0.2f64..2.0) {
        let lambda = 1e-4;
        let v = single_well(lambda);
        let c = fit_boundary_constants(xi, xf, t, bare_frequency(&v), v.quartic_strength()).unwrap();
        // the expansion parameter is λA²/ω₀²
        prop_assume!(lambda * c.amplitude_a.norm_sqr() < 1e-3);
        let shot = solve_bvp_shooting(&v, xi, xf, t, (xf - xi) / t, 1e-12, ShootingOptions::default()).unwrap();
        let gap = (shot.state(t).position - lindstedt_path(&c, &v, t)).norm();
        prop_assert!(gap <= 10.0 * lambda * c.amplitude_a.norm().max(1.0), "gap {}", gap);
    }

    #[test]
    fn quadratic_series_ignores_truncation(c2 in 0.05f64..2.0, x0 in -3.0f64..3.0, xt in -3.0f64..3.0, t in 0.1f64..1.5) {
        let v = PotentialModel::new(vec![0.0, 0.0, c2], 1.0, 1.0).unwrap();
        let k0 = kernel_series(&v, x0, xt, t, &KernelParams::with_k_max(0), PathSource::Shooting).unwrap().value;
        let k3 = kernel_series(&v, x0, xt, t, &KernelParams::with_k_max(3), PathSource::Shooting).unwrap().value;
        prop_assert_eq!(k0, k3);
    }

    #[test]
    fn kernel_is_symmetric_under_endpoint_exchange(x0 in -3.5f64..-0.5, xt in -3.5f64..-0.5, t in 0.1f64..0.6) {
        let v = PotentialModel::double_well(DoubleWell::TUNNELING).unwrap();
        let p = KernelParams::default();
        let ab = kernel_series(&v, x0, xt, t, &p, PathSource::Shooting).unwrap().value;
        let ba = kernel_series(&v, xt, x0, t, &p, PathSource::Shooting).unwrap().value;
        prop_assert!((ab - ba).norm() <= 1e-8 * ab.norm(), "{} vs {}", ab, ba);
    }

    #[test]
    fn series_terms_decay_for_tunneling_parameters(x0 in -4.0f64..-2.0, xt in -4.0f64..0.0, t in 0.1f64..1.0) {
        let v = PotentialModel::double_well(DoubleWell::TUNNELING).unwrap();
        let e = kernel_series(&v, x0, xt, t, &KernelParams::default(), PathSource::Shooting).unwrap();
        for w in e.terms.windows(2) {
            prop_assert!(w[1].term.norm() < w[0].term.norm());
        }
    }

    #[test]
    fn free_limit_is_continuous(x0 in -3.0f64..3.0, xt in -3.0f64..3.0, t in 0.1f64..2.0) {
        let v = PotentialModel::new(vec![0.0, 0.0, 1e-12], 1.0, 1.0).unwrap();
        let k = kernel_series(&v, x0, xt, t, &KernelParams::default(), PathSource::Shooting).unwrap().value;
        let f = free_kernel(1.0, 1.0, x0, xt, t).unwrap();
        prop_assert!((k - f).norm() < 1e-6 * f.norm());
    }
}

fn packet(grid: GridSpec, center: f64, width: f64, k: f64) -> WavefunctionGrid {
    WavefunctionGrid::from_fn(grid, 0.0, |x| {
        let d = x - center;
        Complex64::from_polar((-d * d / (2.0 * width * width)).exp(), k * x)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn propagation_is_linear(
        c1 in -1.5f64..1.5, c2 in -1.5f64..1.5,
        a in -2.0f64..2.0, b in -2.0f64..2.0,
        t in 0.2f64..2.5,
    ) {
        let grid = GridSpec::new(-10.0, 10.0, 256).unwrap();
        let w = Complex64::new(1.0, 0.0);
        let k = |x: f64, y: f64, d: f64| harmonic_kernel(1.0, w, 1.0, x, y, d);
        let (p1, p2) = (packet(grid, c1, 0.8, 0.5), packet(grid, c2, 1.1, -1.0));
        let (ca, cb) = (Complex64::new(a, 0.3), Complex64::new(b, -0.7));
        let mix = WavefunctionGrid::new(grid, p1.values.iter().zip(&p2.values).map(|(x, y)| ca * x + cb * y).collect(), 0.0).unwrap();
        let opts = PropagateOptions { support_cut: 0.0, ..PropagateOptions::default() };
        let lhs = propagate(k, &mix, t, grid, opts).unwrap();
        let (r1, r2) = (propagate(k, &p1, t, grid, opts).unwrap(), propagate(k, &p2, t, grid, opts).unwrap());
        let rhs = WavefunctionGrid::new(grid, r1.values.iter().zip(&r2.values).map(|(x, y)| ca * x + cb * y).collect(), t).unwrap();
        prop_assert!(lhs.l2_distance(&rhs).unwrap() <= 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn exact_kernels_preserve_norm(center in -2.0f64..2.0, width in 0.5f64..1.5, t in 0.2f64..2.5, harmonic in any::<bool>()) {
        let grid = GridSpec::new(-12.0, 12.0, 2048).unwrap();
        let psi0 = packet(grid, center, width, 0.0);
        let w = Complex64::new(1.0, 0.0);
        let out = if harmonic {
            propagate(|x, y, d| harmonic_kernel(1.0, w, 1.0, x, y, d), &psi0, t, grid, PropagateOptions::default())
        } else {
            propagate(|x, y, d| free_kernel(1.0, 1.0, x, y, d), &psi0, t.min(1.0), grid, PropagateOptions::default())
        }.unwrap();
        prop_assert!((out.norm() - psi0.norm()).abs() < 1e-3, "{} vs {}", out.norm(), psi0.norm());
    }

    #[test]
    fn sequential_and_parallel_propagation_agree(center in -2.0f64..2.0, t in 0.1f64..1.0) {
        let grid = GridSpec::new(-8.0, 8.0, 256).unwrap();
        let psi0 = packet(grid, center, 0.7, 0.0);
        let k = |x: f64, y: f64, d: f64| free_kernel(1.0, 1.0, x, y, d);
        let seq = propagate(k, &psi0, t, grid, PropagateOptions { execution: Execution::Sequential, ..Default::default() }).unwrap();
        let par = propagate(k, &psi0, t, grid, PropagateOptions { execution: Execution::Parallel, ..Default::default() }).unwrap();
        prop_assert_eq!(seq.values, par.values);
    }

    #[test]
    fn quantum_potential_ignores_phase_and_scale(
        quarter in 0usize..4,
        theta in -PI..PI,
        c in 0.01f64..100.0,
        center in -1.0f64..1.0,
        k in -2.0f64..2.0,
    ) {
        let grid = GridSpec::new(-6.0, 6.0, 512).unwrap();
        let psi = packet(grid, center, 0.9, k);
        let o = MadelungOptions::new(1.0, 1.0);
        let q_of = |f: &dyn Fn(Complex64) -> Complex64| {
            let w = WavefunctionGrid::new(grid, psi.values.iter().map(|z| f(*z)).collect(), 0.0).unwrap();
            decompose(&w, &o).with_quantum_potential(1.0, 1.0).q
        };
        let q = q_of(&|z| z);
        // quarter turns are exact in floating point, so Q is bit-identical
        let i = [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0), -Complex64::i()][quarter];
        prop_assert_eq!(&q_of(&|z| z * i), &q);
        // a general phase rounds ψ itself; Q follows to rounding
        let rot = Complex64::from_polar(1.0, theta);
        for qs in [q_of(&|z| z * rot), q_of(&|z| z * c)] {
            for (a, b) in qs.iter().zip(&q) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn madelung_identities_hold(center in -1.0f64..1.0, k in -2.0f64..2.0, mass in 0.5f64..2.0, hbar in 0.5f64..2.0) {
        let grid = GridSpec::new(-6.0, 6.0, 512).unwrap();
        let psi = packet(grid, center, 0.9, k);
        let f = decompose(&psi, &MadelungOptions::new(mass, hbar)).with_quantum_potential(mass, hbar);
        for i in 0..f.len() {
            prop_assert_eq!(f.rho[i], f.r[i] * f.r[i]);
        }
        let ds = qfd_core::madelung::gradient(&f.s_m, grid.dx());
        for i in 0..f.len() {
            prop_assert!((f.v[i] * mass - ds[i]).abs() <= 1e-12 * ds[i].abs().max(1.0));
        }
    }

    #[test]
    fn quantum_potential_reproduces_kinetic_term(center in -1.0f64..1.0, width in 0.5f64..1.5, mass in 0.5f64..2.0, hbar in 0.5f64..2.0) {
        // real nodeless ψ: Qψ = −(ħ²/2M)ψ″
        let grid = GridSpec::new(-4.0, 4.0, 256).unwrap();
        let psi = packet(grid, center, width, 0.0);
        let f = decompose(&psi, &MadelungOptions::new(mass, hbar)).with_quantum_potential(mass, hbar);
        let re: Vec<f64> = psi.values.iter().map(|z| z.re).collect();
        let lap = laplacian(&re, grid.dx());
        let scale = lap.iter().fold(0.0f64, |m, l| m.max(l.abs())) * hbar * hbar / mass;
        for i in (0..re.len()).filter(|&i| !f.nodes[i]) {
            let rhs = -hbar * hbar / (2.0 * mass) * lap[i];
            prop_assert!((f.q[i] * re[i] - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn exact_field_trajectories_stay_ordered(alpha in 0.4f64..1.5, center in -1.5f64..1.5, p0 in -1.0f64..1.0, harmonic in any::<bool>()) {
        let w2 = if harmonic { 1.0 } else { 0.0 };
        let g = AnalyticGaussian::normalized(1.0, 1.0, w2, alpha, center, p0);
        let grid = GridSpec::new(-10.0, 10.0, 1024).unwrap();
        let o = MadelungOptions::new(1.0, 1.0);
        let fields: Vec<_> = (0..=300).map(|k| decompose(&g.sample(grid, 1.5 * k as f64 / 300.0).unwrap(), &o)).collect();
        let seeds: Vec<f64> = (0..20).map(|i| center - 1.5 * alpha + 3.0 * alpha * i as f64 / 19.0).collect();
        let set = integrate_trajectories(&fields, &seeds, &TrajectoryOptions::default()).unwrap();
        for k in 0..set.times.len() {
            for s in 1..seeds.len() {
                prop_assert!(set.positions[s][k] - set.positions[s - 1][k] > -1e-6);
            }
        }
    }
}

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn crank_nicolson_conserves_norm(center in -2.0f64..2.0, k in -1.0f64..1.0) {
        let v = PotentialModel::double_well(DoubleWell::TUNNELING).unwrap();
        let grid = GridSpec::new(-10.0, 10.0, 512).unwrap();
        let cn = CrankNicolson::new(&v, grid, 1e-4).unwrap();
        let mut psi = packet(grid, center, 0.6, k).values;
        let n0: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let mut scratch = psi.clone();
        for _ in 0..10_000 {
            cn.step(&mut psi, &mut scratch);
        }
        let n1: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((n1 - n0).abs() / n0 < 1e-10, "drift {}", (n1 - n0) / n0);
    }
}

/// Seeds drawn from `ρ₀` end right of the origin in proportion to `∫₀^∞ρ(T)`.
#[test]
fn exact_field_trajectories_are_equivariant() {
    use rand::{Rng, SeedableRng};
    let g = AnalyticGaussian::normalized(1.0, 1.0, 1.0, 0.7, -0.6, 0.4);
    let grid = GridSpec::new(-8.0, 8.0, 1024).unwrap();
    let o = MadelungOptions::new(1.0, 1.0);
    let fields: Vec<_> = (0..=400).map(|k| decompose(&g.sample(grid, 2.0 * k as f64 / 400.0).unwrap(), &o)).collect();
    let rho0 = fields[0].clone();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let quantiles: Vec<f64> = (0..1000).map(|_| rng.gen()).collect();
    let seeds = qfd_core::trajectories::seeds_from_quantiles(&rho0, &quantiles).unwrap();
    let set = integrate_trajectories(&fields, &seeds, &TrajectoryOptions::default()).unwrap();
    let last = fields.last().unwrap();
    let total = rho0.probability_right_of(grid.x_min);
    let p = last.probability_right_of(0.0) / total;
    let f = set.final_right_fraction();
    let sigma = (p * (1.0 - p) / 1000.0).sqrt();
    assert!((f - p).abs() <= 3.0 * sigma, "fraction {f} vs {p} (σ {sigma})");
}
