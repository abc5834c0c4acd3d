//! Property-based checks of the structural invariants: spectral identities,
//! round trips, unitarity, conservation, and scheme orders, over randomized
//! smooth fields.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use nlskp::field::{ComplexField, ScalarField};
use nlskp::grenier::curl_constraint_deficit;
use nlskp::grid::PeriodicGrid;
use nlskp::invariants::kdv_invariants;
use nlskp::madelung::{polar_decompose, reconstruct};
use nlskp::nls::{NlsState, strang_step};
use nlskp::nonlinearity::NonlinearityModel;
use nlskp::spectral::{
    NormKind, dealias, l2_distance_complex, norm, norm_complex, spectral_derivative, translate,
};

const N: usize = 64;
const LEN: f64 = 2.0 * std::f64::consts::PI;

fn grid_1d() -> Arc<PeriodicGrid> {
    Arc::new(PeriodicGrid::new_1d(N, LEN).unwrap())
}

fn grid_2d() -> Arc<PeriodicGrid> {
    Arc::new(PeriodicGrid::new_2d(N, 32, LEN, LEN).unwrap())
}

/// Up to four low modes with bounded amplitudes: smooth, band-limited,
/// and small enough that 1 + field stays far from zero.
#[derive(Debug, Clone)]
struct Modes {
    terms: Vec<(f64, i64, f64)>, // (amplitude, mode, phase)
}

fn modes() -> impl Strategy<Value = Modes> {
    proptest::collection::vec(
        (-0.1_f64..0.1, 1_i64..6, 0.0..std::f64::consts::TAU),
        1..4,
    )
    .prop_map(|terms| Modes { terms })
}

impl Modes {
    fn sample(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(a, m, p)| a * (m as f64 * x + p).cos()).sum()
    }

    fn field(&self, grid: &Arc<PeriodicGrid>) -> ScalarField {
        ScalarField::from_fn(grid, |c| self.sample(c[0]))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // ─── spectral identities ────────────────────────────────────────────

    #[test]
    fn derivative_and_dealias_commute(m in modes()) {
        let grid = grid_1d();
        let f = m.field(&grid);
        let a = dealias(&spectral_derivative(&f, 0, 1).unwrap());
        let b = spectral_derivative(&dealias(&f), 0, 1).unwrap();
        let scale = norm(&a, NormKind::L2).max(1.0);
        for (x, y) in a.data.iter().zip(&b.data) {
            prop_assert!((x - y).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn translation_composes(m in modes(), s1 in -3.0_f64..3.0, s2 in -3.0_f64..3.0) {
        let grid = grid_1d();
        let f = m.field(&grid);
        let once = translate(&f, &[s1 + s2]).unwrap();
        let twice = translate(&translate(&f, &[s1]).unwrap(), &[s2]).unwrap();
        for (x, y) in once.data.iter().zip(&twice.data) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn translation_preserves_l2(m in modes(), s in -5.0_f64..5.0) {
        let grid = grid_1d();
        let f = m.field(&grid);
        let before = norm(&f, NormKind::L2);
        let after = norm(&translate(&f, &[s]).unwrap(), NormKind::L2);
        prop_assert!((before - after).abs() < 1e-10 * before.max(1.0));
    }

    #[test]
    fn hs_norm_dominates_l2(m in modes(), s in 0.0_f64..2.5) {
        // (1 + |k|^2)^s >= 1 mode by mode
        let grid = grid_1d();
        let f = m.field(&grid);
        prop_assert!(norm(&f, NormKind::Hs(s)) >= norm(&f, NormKind::L2) - 1e-12);
    }

    // ─── polar round trip and gauge freedom ─────────────────────────────

    #[test]
    fn polar_round_trip_recovers_the_wavefunction(amp in modes(), ph in modes(), eps in 0.05_f64..0.3) {
        let grid = grid_1d();
        let a = amp.field(&grid);
        let p = ph.field(&grid);
        let eps2 = eps * eps;
        let psi = ComplexField::from_data(
            &grid,
            a.data
                .iter()
                .zip(&p.data)
                .map(|(&av, &pv)| Complex64::from_polar(1.0 + eps2 * av, eps * pv))
                .collect(),
        )
        .unwrap();
        let polar = polar_decompose(&psi, eps).unwrap();
        let back = reconstruct(&polar).unwrap();
        prop_assert!(l2_distance_complex(&psi, &back) < 1e-10);
    }

    #[test]
    fn polar_decomposition_ignores_global_phase_windings(amp in modes(), eps in 0.05_f64..0.3, n in -2_i32..3) {
        // psi is unchanged under phi -> phi + 2 pi n / eps, so the
        // decomposition of the same psi must reconstruct identically
        // whatever branch the unwrap picks
        let grid = grid_1d();
        let a = amp.field(&grid);
        let eps2 = eps * eps;
        let shift = f64::from(n) * std::f64::consts::TAU;
        let psi = ComplexField::from_data(
            &grid,
            a.data
                .iter()
                .map(|&av| Complex64::from_polar(1.0 + eps2 * av, shift))
                .collect(),
        )
        .unwrap();
        let polar = polar_decompose(&psi, eps).unwrap();
        let back = reconstruct(&polar).unwrap();
        prop_assert!(l2_distance_complex(&psi, &back) < 1e-10);
        // amplitude is gauge-blind
        for (got, want) in polar.amp.data.iter().zip(&a.data) {
            prop_assert!((got - want).abs() < 1e-9);
        }
    }

    // ─── solver structure ───────────────────────────────────────────────

    #[test]
    fn strang_step_is_unitary(amp in modes(), ph in modes(), eps in 0.08_f64..0.3) {
        let grid = grid_1d();
        let a = amp.field(&grid);
        let p = ph.field(&grid);
        let eps2 = eps * eps;
        let psi = ComplexField::from_data(
            &grid,
            a.data
                .iter()
                .zip(&p.data)
                .map(|(&av, &pv)| Complex64::from_polar(1.0 + eps2 * av, eps * pv))
                .collect(),
        )
        .unwrap();
        let before = norm_complex(&psi, NormKind::L2);
        let state = NlsState::new(psi, eps, NonlinearityModel::gross_pitaevskii()).unwrap();
        let after = norm_complex(&strang_step(&state, 1e-4).unwrap().psi, NormKind::L2);
        prop_assert!((before - after).abs() < 1e-12 * before);
    }

    // ─── limit invariants ───────────────────────────────────────────────

    #[test]
    fn i0_is_quadratic_under_scaling(m in modes(), lambda in 0.5_f64..2.0) {
        let grid = grid_1d();
        let v = m.field(&grid);
        let scaled = v.map(|x| lambda * x);
        let (i0, _) = kdv_invariants(&v, 1.0, 6.0);
        let (i0s, _) = kdv_invariants(&scaled, 1.0, 6.0);
        prop_assert!((i0s - lambda * lambda * i0).abs() < 1e-10 * i0.abs().max(1e-30));
    }

    // ─── velocity structure in two dimensions ───────────────────────────

    #[test]
    fn gradient_velocities_satisfy_the_cross_constraint(m in modes(), eps in 0.05_f64..0.3) {
        // u = grad^eps theta / (2c) = (dx theta, eps dy theta)/(2c) always
        // satisfies dx u_perp = eps dy u_1
        let grid = grid_2d();
        let theta = ScalarField::from_fn(&grid, |c| m.sample(c[0]) * (1.0 + 0.5 * c[1].sin()));
        let u1 = spectral_derivative(&theta, 0, 1).unwrap().map(|d| d / 2.0);
        let u2 = spectral_derivative(&theta, 1, 1).unwrap().map(|d| eps * d / 2.0);
        let deficit = curl_constraint_deficit(&[u1, u2], eps).unwrap();
        prop_assert!(deficit < 1e-12, "deficit = {deficit}");
    }
}

// ─── fixed-seed structural checks (not property-randomized) ─────────────

/// Second-order self-convergence of the split step on a smooth state.
#[test]
fn strang_self_convergence_order_is_two() {
    let grid = grid_1d();
    let eps = 0.2;
    let model = NonlinearityModel::gross_pitaevskii();
    let psi0 = ComplexField::from_data(
        &grid,
        (0..N)
            .map(|j| {
                let x = LEN * (j as f64) / (N as f64) - LEN / 2.0;
                Complex64::from_polar(1.0 + eps * eps * 0.2 * x.cos(), eps * 0.3 * x.sin())
            })
            .collect(),
    )
    .unwrap();

    let t_final = 0.02;
    let run = |dt: f64| -> ComplexField {
        let mut state = NlsState::new(psi0.clone(), eps, model.clone()).unwrap();
        let steps = (t_final / dt).round() as usize;
        for _ in 0..steps {
            state = strang_step(&state, dt).unwrap();
        }
        state.psi
    };

    let reference = run(t_final / 1024.0);
    let err: Vec<f64> = [t_final / 16.0, t_final / 32.0, t_final / 64.0]
        .iter()
        .map(|&dt| l2_distance_complex(&run(dt), &reference))
        .collect();
    let order01 = (err[0] / err[1]).log2();
    let order12 = (err[1] / err[2]).log2();
    assert!((1.9..=2.1).contains(&order01), "orders {order01:.3}, {order12:.3}");
    assert!((1.9..=2.1).contains(&order12), "orders {order01:.3}, {order12:.3}");
}

/// Forward/backward linear flow composes to the identity (the propagator
/// phase is odd in dt).
#[test]
fn linear_flow_inverts_under_time_reversal() {
    let grid = grid_1d();
    let psi = ComplexField::from_data(
        &grid,
        (0..N)
            .map(|j| {
                let x = LEN * (j as f64) / (N as f64);
                Complex64::new(1.0 + 0.01 * x.cos(), 0.01 * (2.0 * x).sin())
            })
            .collect(),
    )
    .unwrap();
    let there = nlskp::nls::linear_flow(&psi, 0.37, 0.15, 1.0);
    let back = nlskp::nls::linear_flow(&there, -0.37, 0.15, 1.0);
    assert!(l2_distance_complex(&psi, &back) < 1e-12);
}
