// Copyright 2026 The nmrqc Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_2, PI};

use nmrqc::control::{
    circuit_unitary, compile_circuit, decompose_single_qubit, gate_fidelity, gate_matrix,
    grape_optimize, rx, ry, rz, Circuit, Gate, GateKind, GradientMode, GrapeConfig, GrapeInit,
    GrapeProblem, ControlAmplitudes,
};
use nmrqc::dynamics::{program_unitary, PulseEvent, PulseModel};
use nmrqc::linalg::{self, CMatrix};
use nmrqc::random;
use nmrqc::spin::{CouplingModel, NucleusSpec, SpinSystemConfig};
use nmrqc::state::Ket;
use nmrqc::Error;

const HIGH_AMP_HZ: f64 = 1e9;

fn all_gates() -> Vec<Gate> {
    vec![
        Gate::on(GateKind::H, 0),
        Gate::on(GateKind::H, 1),
        Gate::on(GateKind::X, 0),
        Gate::on(GateKind::Y, 1),
        Gate::on(GateKind::Z, 0),
        Gate::on(GateKind::X90, 1),
        Gate::on(GateKind::Y90, 0),
        Gate::on(GateKind::Rz(-0.4), 1),
        Gate::on(GateKind::P(PI / 4.0), 0),
        Gate::cnot(0, 1),
        Gate::cnot(1, 0),
        Gate::new(GateKind::Cz, &[0, 1]),
        Gate::new(GateKind::Cy, &[0, 1]),
        Gate::new(GateKind::Swap, &[0, 1]),
    ]
}

fn compiled_fidelity(cfg: &SpinSystemConfig, g: &Gate, amp: f64, model: PulseModel) -> f64 {
    let c = Circuit::new(cfg.n_qubits()).add(g.kind.clone(), &g.targets);
    let prog = compile_circuit(&c, cfg, amp).unwrap();
    let u = program_unitary(&prog, cfg, model).unwrap();
    gate_fidelity(&u, &circuit_unitary(&c, Some(cfg)).unwrap()).unwrap()
}

#[test]
fn compiled_gates_match_on_gemini_ideal_pulses() {
    let cfg = SpinSystemConfig::gemini();
    for g in all_gates() {
        let f = compiled_fidelity(&cfg, &g, 12.5e3, PulseModel::Hard);
        assert!(f >= 1.0 - 1e-9, "{g}: {f}");
    }
}

#[test]
fn compiled_gates_match_on_gemini_finite_pulses() {
    let cfg = SpinSystemConfig::gemini();
    for g in all_gates() {
        let f = compiled_fidelity(&cfg, &g, HIGH_AMP_HZ, PulseModel::Finite);
        assert!(f >= 1.0 - 1e-9, "{g}: {f}");
    }
}

#[test]
fn compiled_gates_with_offsets_and_negative_coupling() {
    let cfg = SpinSystemConfig::new(
        "shifted",
        CouplingModel::Weak,
        vec![
            NucleusSpec::new("1H", 130.0, 3.0, 1.0, 0.4),
            NucleusSpec::new("13C", -75.0, 3.0, 1.0, 0.4),
        ],
        vec![vec![0.0, -140.0], vec![-140.0, 0.0]],
    )
    .unwrap();
    for g in all_gates() {
        let f = compiled_fidelity(&cfg, &g, 12.5e3, PulseModel::Hard);
        assert!(f >= 1.0 - 1e-9, "{g}: {f}");
    }
}

#[test]
fn three_spin_cnot_refocuses_spectator() {
    let cfg = SpinSystemConfig::new(
        "three",
        CouplingModel::Weak,
        vec![
            NucleusSpec::new("1H", 40.0, 3.0, 1.0, 0.3),
            NucleusSpec::new("13C", 0.0, 3.0, 1.0, 0.3),
            NucleusSpec::new("19F", -60.0, 3.0, 1.0, 0.3),
        ],
        vec![vec![0.0, 150.0, 35.0], vec![150.0, 0.0, -20.0], vec![35.0, -20.0, 0.0]],
    )
    .unwrap();
    for (c, t) in [(0, 1), (1, 0), (2, 0), (1, 2)] {
        let f = compiled_fidelity(&cfg, &Gate::cnot(c, t), 12.5e3, PulseModel::Hard);
        assert!(f >= 1.0 - 1e-9, "CNOT({c},{t}): {f}");
    }
}

#[test]
fn cnot_on_gemini_uses_720us_delay() {
    let cfg = SpinSystemConfig::gemini();
    let prog = compile_circuit(&Circuit::new(2).add(GateKind::Cnot, &[0, 1]), &cfg, 12.5e3).unwrap();
    let delays: Vec<f64> = prog.delays().collect();
    assert_eq!(delays.len(), 1);
    assert!((delays[0] - 1.0 / (2.0 * 697.4)).abs() < 1e-15);
    assert!((delays[0] * 1e6 - 717.0).abs() < 5.0);
}

#[test]
fn x_gate_is_two_x90_segments() {
    let cfg = SpinSystemConfig::gemini();
    let prog = compile_circuit(&Circuit::new(2).add(GateKind::X, &[0]), &cfg, 12.5e3).unwrap();
    assert_eq!(prog.events.len(), 2);
    for e in &prog.events {
        match e {
            PulseEvent::Rf { amp_hz, phase_rad, dur_s } => {
                assert_eq!(amp_hz, &vec![12.5e3, 0.0]);
                assert_eq!(phase_rad[0], 0.0);
                assert!((dur_s - 20e-6).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn h_gate_is_short_y_then_long_x() {
    let cfg = SpinSystemConfig::gemini();
    let prog = compile_circuit(&Circuit::new(2).add(GateKind::H, &[0]), &cfg, 12.5e3).unwrap();
    match (&prog.events[0], &prog.events[1]) {
        (
            PulseEvent::Rf { phase_rad: p0, dur_s: d0, .. },
            PulseEvent::Rf { phase_rad: p1, dur_s: d1, .. },
        ) => {
            assert!((p0[0] - FRAC_PI_2).abs() < 1e-15);
            assert_eq!(p1[0], 0.0);
            assert!((d1 / d0 - 2.0).abs() < 1e-12);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn uncoupled_pair_rejected() {
    let cfg = SpinSystemConfig::new(
        "free",
        CouplingModel::Weak,
        vec![NucleusSpec::new("1H", 0.0, 1.0, 1.0, 0.1), NucleusSpec::new("31P", 0.0, 1.0, 1.0, 0.1)],
        vec![vec![0.0, 0.0], vec![0.0, 0.0]],
    )
    .unwrap();
    let err = compile_circuit(&Circuit::new(2).add(GateKind::Cnot, &[0, 1]), &cfg, 1e4).unwrap_err();
    assert!(matches!(err, Error::UncoupledPair(0, 1)));
}

#[test]
fn bell_circuit_and_swap_identity() {
    let c = Circuit::new(2).add(GateKind::H, &[0]).add(GateKind::Cnot, &[0, 1]);
    let u = circuit_unitary(&c, None).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((u[(0, 0)].re - s).abs() < 1e-15 && (u[(3, 0)].re - s).abs() < 1e-15);
    let three = Circuit::new(2)
        .add(GateKind::Cnot, &[0, 1])
        .add(GateKind::Cnot, &[1, 0])
        .add(GateKind::Cnot, &[0, 1]);
    let swap = gate_matrix(&Gate::new(GateKind::Swap, &[0, 1]), 2).unwrap();
    assert!(linalg::max_abs_diff(&circuit_unitary(&three, None).unwrap(), &swap) < 1e-15);
    assert_eq!(circuit_unitary(&Circuit::new(2), None).unwrap(), linalg::identity(4));
}

#[test]
fn gate_algebra() {
    let h = gate_matrix(&Gate::on(GateKind::H, 0), 1).unwrap();
    let cn = gate_matrix(&Gate::cnot(0, 1), 2).unwrap();
    let cy = gate_matrix(&Gate::new(GateKind::Cy, &[0, 1]), 2).unwrap();
    assert!(linalg::max_abs_diff(&(&h * &h), &linalg::identity(2)) < 1e-15);
    assert!(linalg::max_abs_diff(&(&cn * &cn), &linalg::identity(4)) < 1e-15);
    let cy4 = &cy * &cy * &cy * &cy;
    assert!(linalg::max_abs_diff(&cy4, &linalg::identity(4)) < 1e-15);
}

#[test]
fn cnot_from_rz_decomposition_matches_up_to_phase() {
    // Alternative form: Rz corrections on both qubits around the bare coupling
    // evolution, with target conjugated by y rotations.
    let cfg = SpinSystemConfig::gemini();
    let uj = linalg::expm_hermitian(&cfg.internal_hamiltonian(), 1.0 / (2.0 * 697.4)).unwrap();
    let on = |m: &CMatrix, q: usize| linalg::embed_single(m, q, 2);
    let u = on(&ry(FRAC_PI_2), 1)
        * on(&rz(-FRAC_PI_2), 0)
        * on(&rz(-FRAC_PI_2), 1)
        * uj
        * on(&ry(-FRAC_PI_2), 1);
    let cn = gate_matrix(&Gate::cnot(0, 1), 2).unwrap();
    assert!(gate_fidelity(&u, &cn).unwrap() > 1.0 - 1e-12);
}

#[test]
fn decomposition_roundtrip_random() {
    let mut rng = random::seeded(2024);
    for _ in 0..100 {
        let u = random::haar_unitary(2, &mut rng);
        let d = decompose_single_qubit(&u).unwrap();
        assert!(linalg::max_abs_diff(&d.matrix(), &u) <= 1e-9);
    }
    let d = decompose_single_qubit(&rx(1.3)).unwrap();
    assert!(linalg::max_abs_diff(&d.matrix(), &rx(1.3)) < 1e-12);
}

#[test]
fn compiled_custom_single_qubit_unitary() {
    let cfg = SpinSystemConfig::gemini();
    let mut rng = random::seeded(5);
    let u = random::haar_unitary(2, &mut rng);
    let f = compiled_fidelity(&cfg, &Gate::on(GateKind::Custom(u), 1), 12.5e3, PulseModel::Hard);
    assert!(f >= 1.0 - 1e-9);
}

#[test]
fn compiled_program_maps_basis_states() {
    let cfg = SpinSystemConfig::gemini();
    for (c, t, input, output) in [(0, 1, 2, 3), (0, 1, 3, 2), (1, 0, 1, 3), (1, 0, 0, 0)] {
        let prog = compile_circuit(&Circuit::new(2).add(GateKind::Cnot, &[c, t]), &cfg, 12.5e3).unwrap();
        let u = program_unitary(&prog, &cfg, PulseModel::Hard).unwrap();
        let out = Ket::basis(2, input).apply(&u).unwrap();
        assert!(out.amplitudes()[output].norm_sqr() > 1.0 - 1e-9);
    }
}

fn three_spin_small() -> SpinSystemConfig {
    SpinSystemConfig::triangulum()
}

#[test]
fn grape_identity_is_stationary() {
    let cfg = SpinSystemConfig::new(
        "zero",
        CouplingModel::Weak,
        vec![NucleusSpec::new("1H", 0.0, 1.0, 1.0, 0.0), NucleusSpec::new("31P", 0.0, 1.0, 1.0, 0.0)],
        vec![vec![0.0, 0.0], vec![0.0, 0.0]],
    )
    .unwrap();
    let gcfg = GrapeConfig {
        segments: 10,
        dt: 1e-5,
        initial: GrapeInit::Constant { ux_hz: 0.0, uy_hz: 0.0 },
        ..GrapeConfig::default()
    };
    let problem = GrapeProblem::new(&linalg::identity(4), &cfg, gcfg.dt).unwrap();
    let (f, g) = problem.gradient(&ControlAmplitudes::zeros(10, 2), GradientMode::FirstOrder);
    assert!((f - 1.0).abs() < 1e-15);
    assert!(g.iter().all(|x| x.abs() < 1e-15));
    let res = grape_optimize(&linalg::identity(4), &cfg, &gcfg, 0).unwrap();
    assert_eq!(res.iterations, 0);
    assert!((res.final_fidelity - 1.0).abs() < 1e-12);
}

#[test]
fn grape_gradient_matches_finite_difference() {
    let cfg = SpinSystemConfig::gemini();
    let mut rng = random::seeded(99);
    let target = random::haar_unitary(4, &mut rng);
    let dt = 2e-6;
    let problem = GrapeProblem::new(&target, &cfg, dt).unwrap();
    let mut u = ControlAmplitudes::zeros(40, 2);
    for j in 0..40 {
        for c in 0..2 {
            u.ux[j][c] = 1500.0 * ((j + c) as f64).sin();
            u.uy[j][c] = 1200.0 * ((2 * j + c) as f64).cos();
        }
    }
    for mode in [GradientMode::FirstOrder, GradientMode::Exact] {
        let (_, grad) = problem.gradient(&u, mode);
        let delta = 1e-3;
        for j in [0usize, 7, 19, 39] {
            let i = j * 4 + 1;
            let mut up = u.clone();
            up.uy[j][0] += delta;
            let mut down = u.clone();
            down.uy[j][0] -= delta;
            let fd = (problem.fidelity(&up) - problem.fidelity(&down)) / (2.0 * delta);
            let rel = (grad[i] - fd).abs() / fd.abs().max(1e-12);
            let tol = if mode == GradientMode::Exact { 1e-5 } else { 1e-2 };
            assert!(rel <= tol, "{mode:?} segment {j}: analytic {} fd {fd}", grad[i]);
        }
    }
}

#[test]
fn grape_trace_is_monotone() {
    let cfg = three_spin_small();
    let target = linalg::embed_single(&rx(FRAC_PI_2), 0, 3);
    let gcfg = GrapeConfig {
        segments: 20,
        dt: 5e-5,
        max_iters: 15,
        ..GrapeConfig::default()
    };
    let res = grape_optimize(&target, &cfg, &gcfg, 1).unwrap();
    assert!(res.fidelity_trace.windows(2).all(|w| w[1] >= w[0]));
    assert!((res.final_fidelity - res.fidelity_trace.last().unwrap()).abs() < 1e-12);
    let again = grape_optimize(&target, &cfg, &gcfg, 1).unwrap();
    assert_eq!(res.amplitudes, again.amplitudes);
}
