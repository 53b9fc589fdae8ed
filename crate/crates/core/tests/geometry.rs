mod common;

use common::*;
use nogp_core::geometry::*;
use nogp_core::linalg::*;
use nogp_core::nogp::*;
use nogp_core::propagator::*;
use nogp_core::scanner::build_floquet_hamiltonian;
use nogp_core::three_level::*;
use nogp_core::xi::XiConfig;
use nogp_core::NogpError;
use proptest::prelude::*;

fn frame211() -> PartitionFrame {
    PartitionFrame::from_spectral(&CyclicSystem::spectral())
}

fn random_gauge(seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    let blocks = vec![
        random_unitary(&mut r, 2),
        random_unitary(&mut r, 1),
        random_unitary(&mut r, 1),
    ];
    CyclicSystem::spectral().basis().assemble_blocks(&blocks)
}

fn block_hermitian(seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    let blocks = vec![
        random_hermitian(&mut r, 2),
        random_hermitian(&mut r, 1),
        random_hermitian(&mut r, 1),
    ];
    CyclicSystem::spectral().basis().assemble_blocks(&blocks)
}

fn gate_frame(p: &ThreeLevelParams) -> PartitionFrame {
    PartitionFrame::from_spectral(&p.spectral(0.0, 1.0).unwrap())
}

#[test]
fn membership_examples() {
    let f = frame211();
    assert!(gauge_group_membership(&random_gauge(1), &f, 1e-12).unwrap());
    let mut r = rng(2);
    assert!(!gauge_group_membership(&random_unitary(&mut r, 4), &f, 1e-3).unwrap());
    assert_eq!(
        gauge_group_membership(&identity(4).scale(0.5), &f, 1e-3)
            .map_err(|e| matches!(e, NogpError::NotUnitary { .. })),
        Err(true)
    );
}

#[test]
fn vertical_tangent_returns_generator() {
    let f = frame211();
    let mut r = rng(3);
    let p = random_unitary(&mut r, 4);
    let x = block_hermitian(4) * I;
    let omega = canonical_connection(&p, &(&p * &x), &f).unwrap();
    assert!(max_abs_diff(&omega, &x) < 1e-12);
}

#[test]
fn horizontal_tangent_has_no_connection() {
    let f = frame211();
    let mut r = rng(5);
    let p = random_unitary(&mut r, 4);
    let a = random_hermitian(&mut r, 4) * I;
    let off = &a
        - f.partition.from_partition_basis(
            &f.partition
                .block_diagonal_part(&f.partition.to_partition_basis(&a)),
        );
    assert!(max_abs(&canonical_connection(&p, &(&p * off), &f).unwrap()) < 1e-12);
}

#[test]
fn gauge_action_is_free() {
    let mut r = rng(6);
    let p = random_unitary(&mut r, 4);
    for seed in 10..15 {
        let k = random_gauge(seed);
        let moved = max_abs_diff(&(&p * &k), &p);
        let distance = max_abs_diff(&k, &identity(4));
        assert!((moved - distance).abs() <= 2.0 * distance + 1e-15);
        assert!(moved > 0.0);
    }
    assert_eq!(max_abs_diff(&(&p * identity(4)), &p), 0.0);
}

#[test]
fn horizontal_lift_is_idempotent() {
    let sys = CyclicSystem::random(7);
    let pg = evolve(&sys.hamiltonian(), 2000).unwrap();
    let f = frame211();
    let once = horizontal_lift(&LiftCurve::heisenberg(&pg), &f);
    let twice = horizontal_lift(&once, &f);
    for (a, b) in once.unitaries().iter().zip(twice.unitaries()) {
        assert!(max_abs_diff(a, b) <= 1e-9);
    }
}

#[test]
fn nogp_lift_is_horizontal() {
    let sys = CyclicSystem::random(8);
    let s = CyclicSystem::spectral();
    let run = compute_nogp(&sys.hamiltonian(), &s, 16000).unwrap();
    let lift = LiftCurve::new(run.propagator.grid(), run.lift_samples(&s)).unwrap();
    let f = PartitionFrame::from_spectral(&s);
    let residual = verify_horizontal(&lift, &f).unwrap();
    assert!(residual <= 1e-6, "{residual:e}");
    assert!(verify_horizontal(&LiftCurve::heisenberg(&run.propagator), &f).unwrap() > 1e-2);
}

#[test]
fn gate_model_raw_lift_is_already_horizontal() {
    let p = ThreeLevelParams::for_gate(0.9, 1.4, Pulse::Sin2, 1.0).unwrap();
    let pg = evolve(&build_hamiltonian(&p), 2000).unwrap();
    let r = verify_horizontal(&LiftCurve::heisenberg(&pg), &gate_frame(&p)).unwrap();
    assert!(r <= 1e-6, "{r:e}");
}

#[test]
fn undetuned_floquet_lift_needs_gauge_correction() {
    let p = ThreeLevelParams::for_gate(1.0, 0.5, Pulse::Constant, 1.0).unwrap();
    let fh = build_floquet_hamiltonian(0.0, &p, &XiConfig::default()).unwrap();
    let pg = evolve(&fh.hamiltonian, 4000).unwrap();
    let f = gate_frame(&p);
    let raw = LiftCurve::heisenberg(&pg);
    assert!(verify_horizontal(&raw, &f).unwrap() > 1e-2);
    assert!(verify_horizontal(&horizontal_lift(&raw, &f), &f).unwrap() <= 1e-6);
}

#[test]
fn horizontal_lift_matches_transport() {
    let s = CyclicSystem::spectral();
    let f = PartitionFrame::from_spectral(&s);
    for seed in [11, 12] {
        let sys = CyclicSystem::random(seed);
        let run = compute_nogp(&sys.hamiltonian(), &s, 4000).unwrap();
        let lift = horizontal_lift(&LiftCurve::heisenberg(&run.propagator), &f);
        let reference = run.lift_samples(&s);
        let err = lift
            .unitaries()
            .iter()
            .zip(&reference)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max);
        assert!(err <= 1e-5, "seed {seed}: {err:e}");
        let hol = holonomy_from_lift(&lift, &f).unwrap();
        assert!(max_abs_diff(&hol, &run.result.holonomy) <= 1e-5);
        assert!(gauge_group_membership(&hol, &f, 1e-8).unwrap());
    }
}

#[test]
fn gate_holonomy_agrees_with_transport() {
    for pulse in Pulse::GATE_PULSES {
        let p = ThreeLevelParams::for_gate(1.2, 2.5, pulse, 1.0).unwrap();
        let s = p.spectral(0.0, 1.0).unwrap();
        let run = compute_nogp(&build_hamiltonian(&p), &s, 2000).unwrap();
        let f = PartitionFrame::from_spectral(&s);
        let hol = holonomy_from_lift(
            &horizontal_lift(&LiftCurve::heisenberg(&run.propagator), &f),
            &f,
        )
        .unwrap();
        assert!(max_abs_diff(&hol, &run.result.holonomy) <= 1e-8, "{pulse}");
        let g1 = &f.blocks_of(&hol)[0];
        assert!(max_abs_diff(g1, &closed_form_g1(1.2, 2.5)) <= 1e-6);
        assert!(gauge_group_membership(&hol, &f, 1e-8).unwrap());
    }
}

#[test]
fn two_periods_square_the_holonomy() {
    let sys = CyclicSystem::random(13);
    let s = CyclicSystem::spectral();
    let f = PartitionFrame::from_spectral(&s);
    let n = 8000;
    let pg = evolve(&sys.hamiltonian(), n).unwrap();
    let one = horizontal_lift(&LiftCurve::schrodinger(&pg), &f);
    let h1 = holonomy_from_lift(&one, &f).unwrap();
    let end = pg.final_unitary();
    let mut samples = pg.unitaries().to_vec();
    samples.extend(pg.unitaries()[1..].iter().map(|u| u * end));
    let two = LiftCurve::new(TimeGrid::new(2.0, 2 * n).unwrap(), samples).unwrap();
    let h2 = holonomy_from_lift(&horizontal_lift(&two, &f), &f).unwrap();
    let d = max_abs_diff(&h2, &(&h1 * &h1));
    assert!(d <= 1e-7, "{d:e}");
    for j in 0..s.num_blocks() {
        let g = state_evolution_phase(&sys.hamiltonian(), &pg, &s.basis().block(j)).unwrap();
        assert!(max_abs_diff(&f.blocks_of(&h1)[j], &g) <= 1e-5);
    }
}

#[test]
fn lift_rejects_bad_input() {
    let grid = TimeGrid::new(1.0, 2).unwrap();
    assert!(matches!(
        LiftCurve::new(grid, vec![identity(2); 2]),
        Err(NogpError::GridMismatch(_))
    ));
    assert!(matches!(
        LiftCurve::new(grid, vec![identity(2), identity(2).scale(1.1), identity(2)]),
        Err(NogpError::NotUnitary { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn connection_gauge_law(seed in 0u64..10_000) {
        let f = frame211();
        let mut r = rng(seed);
        let p = random_unitary(&mut r, 4);
        let q = random_complex_matrix(&mut r, 4);
        let k = random_gauge(seed + 1);
        let lhs = canonical_connection(&(&p * &k), &(&q * &k), &f).unwrap();
        let rhs = k.adjoint() * canonical_connection(&p, &q, &f).unwrap() * &k;
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn connection_is_linear(seed in 0u64..10_000, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let f = frame211();
        let mut r = rng(seed);
        let p = random_unitary(&mut r, 4);
        let q1 = random_complex_matrix(&mut r, 4);
        let q2 = random_complex_matrix(&mut r, 4);
        let lhs = canonical_connection(&p, &(q1.scale(a) + q2.scale(b)), &f).unwrap();
        let rhs = canonical_connection(&p, &q1, &f).unwrap().scale(a) + canonical_connection(&p, &q2, &f).unwrap().scale(b);
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn gauge_elements_are_members(seed in 0u64..10_000) {
        let f = frame211();
        let k = random_gauge(seed);
        prop_assert!(gauge_group_membership(&k, &f, 1e-12).unwrap());
        let k2 = random_gauge(seed + 7);
        prop_assert!(gauge_group_membership(&(&k * k2), &f, 1e-12).unwrap());
    }
}
