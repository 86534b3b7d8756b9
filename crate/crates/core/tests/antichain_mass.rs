use divchain::hitting::{hitting_down, hitting_up};
use divchain::primitive::random_antichain;
use divchain::stochastic::stream;
use divchain::weights::WeightEvaluator;
use divchain::{ChainId, FactorTable, KernelConfig, MassVector, WeightId};
use proptest::prelude::*;
use rand::Rng;

const X: u64 = 3000;

fn random_mass(seed: u64, from: u64, sparsity: f64) -> MassVector {
    let mut rng = stream(seed, 0);
    MassVector::from_fn(X, |n| if n >= from && rng.random_bool(sparsity) { rng.random::<f64>() } else { 0.0 })
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // each path meets a primitive set at most once
    #[test]
    fn downward_mass_through_antichain_is_bounded(seed in any::<u64>(), density in 0.01f64..1.0, sparsity in 0.001f64..0.5) {
        let t = FactorTable::new(X).unwrap();
        let a = random_antichain(X, density, seed).unwrap();
        let b = random_mass(seed ^ 1, 1, sparsity);
        for c in [ChainId::VonMangoldt, ChainId::RandomPrime, ChainId::Mertens] {
            let h = hitting_down(&c, &b, &t).unwrap();
            let through: f64 = a.iter().map(|n| h.get(n)).sum();
            prop_assert!(through <= b.total() + 1e-10, "{c}: {through} > {}", b.total());
        }
    }

    #[test]
    fn upward_mass_through_antichain_is_bounded(seed in any::<u64>(), density in 0.01f64..1.0, sparsity in 0.001f64..0.5) {
        let t = FactorTable::new(X).unwrap();
        let ev = WeightEvaluator::new(&t, KernelConfig::default()).unwrap();
        let a = random_antichain(X, density, seed).unwrap();
        let b = random_mass(seed ^ 2, 2, sparsity);
        for (c, w) in [(ChainId::VonMangoldt, WeightId::Nu0), (ChainId::EpsModified, WeightId::Nu0)] {
            let h = hitting_up(&c, &w, &b, &ev).unwrap();
            let through: f64 = a.iter().map(|n| h.get(n)).sum();
            prop_assert!(through <= b.total() + 1e-10, "{c}: {through} > {}", b.total());
        }
    }
}
