mod common;

use proptest::prelude::*;
use rcs_lab::circuit::{parse, serialize};
use rcs_lab::rng::seeded;
use rcs_lab::sim::{sample, simulate, SampleSet};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary(seed in any::<u64>(), n in 2usize..=7, extra in 0usize..20) {
        let c = common::random_circuit(n, extra, &mut seeded(seed));
        let psi = simulate(&c).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() < 1e-10);
        let total: f64 = psi.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        let mut back = psi.clone();
        for layer in c.layers().iter().rev() {
            back.apply_layer_adjoint(layer);
        }
        prop_assert!((back.probability(0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn circuit_text_round_trip(seed in any::<u64>(), n in 2usize..=6, extra in 0usize..20) {
        let c = common::random_circuit(n, extra, &mut seeded(seed));
        let back = parse(&serialize(&c)).unwrap();
        prop_assert_eq!(back.id(), c.id());
        prop_assert_eq!(&back, &c);
    }

    #[test]
    fn sample_text_round_trip(seed in any::<u64>(), n in 2usize..=6, k in 1usize..200) {
        let c = common::random_circuit(n, 4, &mut seeded(seed));
        let s = sample(&simulate(&c).unwrap(), k, &mut seeded(seed ^ 1))
            .unwrap()
            .with_circuit_id(c.id());
        let back = SampleSet::from_text(&s.to_text()).unwrap();
        prop_assert_eq!(back.outcomes(), s.outcomes());
        prop_assert_eq!(back.n_qubits(), n);
        prop_assert_eq!(back.circuit_id, c.id());
    }
}
