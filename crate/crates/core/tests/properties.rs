//! Property tests over seeded random operators, states and protocols.

use proptest::prelude::*;

use qwork_core::divergences::{renyi, skew_symmetry_check, AlphaValue};
use qwork_core::dynamics::{build_unitary, evolve};
use qwork_core::operators::gibbs;
use qwork_core::random;
use qwork_core::workstats::{tpm_distribution, WorkDistribution};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn tpm_distributions_are_normalized_and_sorted(
        seed in any::<u64>(),
        dim in 2usize..=4,
        beta in 0.2f64..3.0,
    ) {
        let protocol = random::commensurate_protocol(dim, 0.5, 6, seed).unwrap();
        let rho0 = random::density_matrix(dim, seed.wrapping_add(1)).unwrap();
        let d = tpm_distribution(&rho0, &protocol, None).unwrap();
        let total: f64 = d.atoms().iter().map(|a| a.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        for pair in d.atoms().windows(2) {
            prop_assert!(pair[1].work - pair[0].work > d.merge_tol());
        }
        for atom in d.atoms() {
            prop_assert!(atom.probability >= 0.0);
        }
        // Characteristic function stays inside the unit disc.
        let theta = d.characteristic(beta);
        prop_assert!(theta.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn cgf_is_convex_and_zero_at_origin(seed in any::<u64>(), beta in 0.2f64..2.0) {
        let protocol = random::commensurate_protocol(3, 0.5, 6, seed).unwrap();
        let rho0 = gibbs(protocol.h0(), beta).unwrap().state;
        let d = tpm_distribution(&rho0, &protocol, None).unwrap();
        prop_assert_eq!(d.cgf(0.0), 0.0);
        let grid: Vec<f64> = (0..31).map(|i| beta * (-3.0 + 0.2 * i as f64)).collect();
        for w in grid.windows(3) {
            let second = d.cgf(w[2]) - 2.0 * d.cgf(w[1]) + d.cgf(w[0]);
            prop_assert!(second >= -1e-8);
        }
    }

    #[test]
    fn three_cgf_routes_agree_for_thermal_starts(
        seed in any::<u64>(),
        dim in 2usize..=4,
        beta in 0.3f64..2.0,
    ) {
        let protocol = random::commensurate_protocol(dim, 0.5, 6, seed).unwrap();
        let g0 = gibbs(protocol.h0(), beta).unwrap();
        let g_tau = gibbs(protocol.htau(), beta).unwrap();
        let pots = qwork_core::operators::ThermoPotentials::from_endpoints(
            beta, &g0, &g_tau,
        ).unwrap();
        let d = tpm_distribution(&g0.state, &protocol, None).unwrap();
        let u = build_unitary(&protocol).unwrap();
        let rho_tau = evolve(&g0.state, &u).unwrap();
        for factor in [-2.0, -0.5, 0.25, 0.5, 2.0] {
            let eta = factor * beta;
            let direct = d.cgf(eta);
            let fcs = qwork_core::workstats::cgf_fcs(&g0.state, &protocol, eta).unwrap();
            let via = qwork_core::bridge::cgf_via_renyi(
                &rho_tau, protocol.htau(), &pots, eta,
            ).unwrap();
            prop_assert!((direct - fcs).abs() < 1e-9);
            prop_assert!((direct - via).abs() < 1e-9);
        }
        // Jarzynski at the closure point.
        prop_assert!((d.cgf(beta) + beta * pots.delta_f).abs() < 1e-9);
        // Second law.
        prop_assert!(d.mean() - pots.delta_f >= -1e-10);
    }

    #[test]
    fn evolution_preserves_spectrum_and_purity(seed in any::<u64>(), dim in 2usize..=4) {
        let rho = random::density_matrix(dim, seed).unwrap();
        let u = random::unitary(dim, seed.wrapping_add(9)).unwrap();
        let out = evolve(&rho, &u).unwrap();
        prop_assert!((out.purity() - rho.purity()).abs() < 1e-12);
        let a = rho.operator().spectral().column_eigenvalues();
        let b = out.operator().spectral().column_eigenvalues();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn renyi_is_nonnegative_and_skew_symmetric(seed in any::<u64>(), dim in 2usize..=4) {
        let rho = random::density_matrix(dim, seed).unwrap();
        let sigma = random::density_matrix(dim, seed.wrapping_add(7)).unwrap();
        for alpha in [0.25, 0.5, 0.9, 1.0, 1.5, 3.0] {
            let s = renyi(&rho, &sigma, AlphaValue::new(alpha).unwrap()).unwrap();
            prop_assert!(s > -1e-10, "alpha {}: {}", alpha, s);
        }
        for alpha in [0.25, 0.5, 1.5, 3.0] {
            prop_assert!(skew_symmetry_check(&rho, &sigma, alpha).unwrap() < 1e-9);
        }
        // Identical states sit at zero for every order.
        prop_assert!(renyi(&rho, &rho, AlphaValue::Finite(0.5)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn partition_shift_invariance(seed in any::<u64>(), beta in 0.2f64..2.0, c in -2.0f64..2.0) {
        let h = random::hermitian(4, seed).unwrap();
        let z = gibbs(&h, beta).unwrap().partition;
        let zc = gibbs(&h.shifted(c), beta).unwrap().partition;
        let expected = (-beta * c).exp() * z;
        prop_assert!(((zc - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn sampling_is_deterministic_and_on_support(seed in any::<u64>(), n in 1usize..400) {
        let d = WorkDistribution::from_atoms(
            vec![(-1.0, 0.25), (0.25, 0.5), (2.0, 0.25)],
            None,
        ).unwrap();
        let a = d.sample(n, seed).unwrap();
        let b = d.sample(n, seed).unwrap();
        prop_assert_eq!(a.samples(), b.samples());
        for &w in a.samples() {
            prop_assert!(d.atoms().iter().any(|atom| atom.work == w));
        }
    }

    #[test]
    fn work_atom_merging_respects_tolerance(
        weights in proptest::collection::vec(0.05f64..1.0, 2..6),
        tol_exp in -9i32..-3,
    ) {
        let total: f64 = weights.iter().sum();
        let tol = 10f64.powi(tol_exp);
        let atoms: Vec<(f64, f64)> = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| (k as f64 * 0.5, w / total))
            .collect();
        let d = WorkDistribution::from_atoms(atoms, Some(tol)).unwrap();
        for pair in d.atoms().windows(2) {
            prop_assert!(pair[1].work - pair[0].work > tol);
        }
        let mass: f64 = d.atoms().iter().map(|a| a.probability).sum();
        prop_assert!((mass - 1.0).abs() < 1e-10);
    }
}
