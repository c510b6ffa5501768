//! Randomized invariants over small dimensions (N ≤ 16).

use proptest::prelude::*;
use rmtlab::chaosmaps::{baker, harper, sawtooth};
use rmtlab::circuits::{pseudo_random_operator, PseudoRandomSpec, RotationLayer};
use rmtlab::ensembles::{cue_from_gue, gue_sample, hurwitz_sample, Generator, RngStream};
use rmtlab::entangle::{average_q_over_basis, meyer_wallach_q};
use rmtlab::qcore::{
    apply, dft, iterate, matrix_power, qubit_purity, spectral_decomposition, unitarity_tolerance,
    Operator, StateVector, C64,
};
use rmtlab::stats::{
    eigenphase_spacings, eigenvector_amplitudes, element_amplitudes, ks_two_sample,
    EmpiricalDistribution,
};

const CASES: u32 = 1000;

fn gen(seed: u64) -> Generator {
    RngStream::new(seed, 0).generator()
}

fn random_state(n: usize, seed: u64) -> StateVector {
    let mut g = gen(seed);
    let amps = (0..1usize << n)
        .map(|_| C64::new(g.gaussian(), g.gaussian()))
        .collect();
    StateVector::normalized(n, amps).unwrap()
}

/// Purity of qubit `j` (1-based, MSB first) from the full density matrix.
fn purity_by_partial_trace(psi: &StateVector, j: usize) -> f64 {
    let n = psi.n_qubits();
    let dim = psi.dim();
    let a = psi.amplitudes();
    let rho: Vec<Vec<C64>> = (0..dim)
        .map(|k| (0..dim).map(|l| a[k] * a[l].conj()).collect())
        .collect();
    let bit = n - j;
    let mask = 1usize << bit;
    let mut reduced = [[C64::new(0.0, 0.0); 2]; 2];
    for k in 0..dim {
        for l in 0..dim {
            if k & !mask == l & !mask {
                reduced[(k >> bit) & 1][(l >> bit) & 1] += rho[k][l];
            }
        }
    }
    let [[a00, a01], [a10, a11]] = reduced;
    (a00 * a00 + a01 * a10 + a10 * a01 + a11 * a11).re
}

fn assert_unitary(u: &Operator) -> Result<(), TestCaseError> {
    let r = u.unitarity_residual();
    prop_assert!(r < unitarity_tolerance(u.dim()), "residual {r}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn hurwitz_samples_are_unitary(dim in 2usize..=16, delta in 0.0f64..=1.0, seed: u64) {
        assert_unitary(&hurwitz_sample(dim, delta, &mut gen(seed)).unwrap())?;
    }

    #[test]
    fn gue_is_hermitian_and_cue_is_unitary(dim in 1usize..=16, seed: u64) {
        let h = gue_sample(dim, &mut gen(seed));
        prop_assert!(h.max_abs_diff(&h.adjoint()) == 0.0);
        assert_unitary(&cue_from_gue(dim, &mut gen(seed)).unwrap())?;
    }

    #[test]
    fn pseudo_random_operators_are_unitary(n in 2usize..=4, m in 0usize..=4, seed: u64) {
        let spec = PseudoRandomSpec { n_qubits: n, iterations: m, rng: RngStream::new(seed, 1) };
        assert_unitary(&pseudo_random_operator(&spec).unwrap())?;
    }

    #[test]
    fn maps_are_unitary(half in 1usize..=8, k in -3.0f64..3.0, gamma in 0.0f64..2.0) {
        let dim = 2 * half;
        assert_unitary(&sawtooth(dim, k).unwrap())?;
        assert_unitary(&harper(dim, gamma).unwrap())?;
        assert_unitary(&baker(dim).unwrap())?;
    }

    #[test]
    fn dft_is_unitary(dim in 1usize..=16, shift: bool) {
        assert_unitary(&dft(dim, shift))?;
    }

    #[test]
    fn q_lies_in_unit_interval(n in 2usize..=4, seed: u64) {
        let q = meyer_wallach_q(&random_state(n, seed)).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn purity_matches_partial_trace(n in 3usize..=4, seed: u64) {
        let psi = random_state(n, seed);
        for j in 1..=n {
            let fast = qubit_purity(&psi, j).unwrap();
            let oracle = purity_by_partial_trace(&psi, j);
            prop_assert!((fast - oracle).abs() < 1e-12, "qubit {j}: {fast} vs {oracle}");
            prop_assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&fast));
        }
    }

    #[test]
    fn q_is_locally_invariant(n in 2usize..=4, seed: u64, phase in 0.0f64..std::f64::consts::TAU) {
        let psi = random_state(n, seed);
        let q = meyer_wallach_q(&psi).unwrap();
        let local = RotationLayer::draw(n, &mut gen(seed ^ 0x5555)).to_operator();
        let rotated = apply(&local, &psi).unwrap();
        prop_assert!((meyer_wallach_q(&rotated).unwrap() - q).abs() <= 1e-10);
        let shifted = apply(&Operator::identity(psi.dim()).scale(C64::from_polar(1.0, phase)), &psi).unwrap();
        prop_assert!((meyer_wallach_q(&shifted).unwrap() - q).abs() <= 1e-12);
    }

    #[test]
    fn product_states_have_zero_q(n in 2usize..=4, seed: u64) {
        let local = RotationLayer::draw(n, &mut gen(seed)).to_operator();
        let psi = apply(&local, &StateVector::basis(n, 0).unwrap()).unwrap();
        prop_assert!(meyer_wallach_q(&psi).unwrap() < 1e-10);
    }

    #[test]
    fn spectral_contracts(dim in 2usize..=16, delta in 0.0f64..=1.0, seed: u64) {
        let u = hurwitz_sample(dim, delta, &mut gen(seed)).unwrap();
        let s = spectral_decomposition(&u).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&u) < 1e-9);
        prop_assert!(s.orthonormality_residual() < 1e-9);
        prop_assert!(s.phases.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(s.phases.iter().all(|p| (0.0..std::f64::consts::TAU).contains(p)));
        let spacing_mean = eigenphase_spacings(&s).mean().unwrap();
        prop_assert!((spacing_mean - 1.0).abs() < 1e-12, "{spacing_mean}");
        let element_mean = element_amplitudes(&u).mean().unwrap();
        prop_assert!((element_mean - 1.0).abs() < 1e-12, "{element_mean}");
    }

    #[test]
    fn matrix_power_agrees_with_iteration(n in 2usize..=4, t in 1u32..=6, seed: u64, b in 0usize..16) {
        let u = hurwitz_sample(1 << n, 1.0, &mut gen(seed)).unwrap();
        let b = b % (1 << n);
        let basis = StateVector::basis(n, b).unwrap();
        let by_power = apply(&matrix_power(&u, t).unwrap(), &basis).unwrap();
        let by_steps = iterate(&u, &basis, t).unwrap();
        prop_assert!(by_power.max_abs_diff(&by_steps) < 1e-12);
    }

    #[test]
    fn basis_average_matches_per_state_route(n in 2usize..=4, t in 1u32..=4, seed: u64) {
        let u = hurwitz_sample(1 << n, 0.7, &mut gen(seed)).unwrap();
        let block = average_q_over_basis(&u, t).unwrap();
        let per_state: f64 = (0..1usize << n)
            .map(|b| meyer_wallach_q(&iterate(&u, &StateVector::basis(n, b).unwrap(), t).unwrap()).unwrap())
            .sum::<f64>()
            / (1usize << n) as f64;
        prop_assert!((block - per_state).abs() < 1e-12);
    }

    #[test]
    fn samplers_replay_bit_exactly(dim in 2usize..=16, delta in 0.0f64..=1.0, seed: u64, stream: u64) {
        let draw = || hurwitz_sample(dim, delta, &mut RngStream::new(seed, stream).generator()).unwrap().to_binary();
        prop_assert_eq!(draw(), draw());
        let spec = PseudoRandomSpec { n_qubits: 3, iterations: 2, rng: RngStream::new(seed, stream) };
        prop_assert_eq!(
            pseudo_random_operator(&spec).unwrap().to_binary(),
            pseudo_random_operator(&spec).unwrap().to_binary()
        );
    }

    #[test]
    fn binary_and_json_round_trip(dim in 1usize..=16, seed: u64) {
        let u = hurwitz_sample(dim, 1.0, &mut gen(seed)).unwrap();
        let bytes = u.to_binary();
        let back = Operator::read_binary(bytes.as_slice()).unwrap();
        prop_assert_eq!(back.to_binary(), bytes);
        let json = Operator::from_json(&u.to_json().unwrap()).unwrap();
        prop_assert!(json.max_abs_diff(&u) == 0.0);
    }

    #[test]
    fn two_sample_ks_is_a_metric(
        a in prop::collection::vec(0.0f64..4.0, 1..60),
        b in prop::collection::vec(0.0f64..4.0, 1..60),
        c in prop::collection::vec(0.0f64..4.0, 1..60),
    ) {
        let (a, b, c) = (
            EmpiricalDistribution::new(a).unwrap(),
            EmpiricalDistribution::new(b).unwrap(),
            EmpiricalDistribution::new(c).unwrap(),
        );
        let ab = ks_two_sample(&a, &b).unwrap();
        prop_assert_eq!(ab, ks_two_sample(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(ab <= ks_two_sample(&a, &c).unwrap() + ks_two_sample(&c, &b).unwrap() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Powers of `U` share its eigenvectors, so the eigenvector-amplitude
    /// sample does not depend on `t` while the spectrum stays simple.
    #[test]
    fn eigenvector_amplitudes_invariant_under_powers(dim in 2usize..=8, t in 2u32..=3, seed: u64) {
        let u = hurwitz_sample(dim, 1.0, &mut gen(seed)).unwrap();
        let ut = matrix_power(&u, t).unwrap();
        let s1 = spectral_decomposition(&u).unwrap();
        let st = spectral_decomposition(&ut).unwrap();
        let min_gap = eigenphase_spacings(&st).samples()[0] * std::f64::consts::TAU / dim as f64;
        prop_assume!(min_gap > 1e-3);
        let (a, b) = (eigenvector_amplitudes(&s1), eigenvector_amplitudes(&st));
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }
}
