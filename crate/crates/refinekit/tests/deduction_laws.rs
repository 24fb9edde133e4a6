//! Randomized laws of the consequence relation and its proof objects.

mod common;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use common::*;

fn config() -> Config {
    Config { cases: 500, rng_seed: RngSeed::Fixed(0x5eed), failure_persistence: None, ..Config::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn reflexivity(seed in any::<u64>()) {
        law_reflexivity(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn monotonicity(seed in any::<u64>()) {
        law_monotonicity(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn budget_monotonicity(seed in any::<u64>()) {
        law_budget_monotonicity(seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn substitution_replay(seed in any::<u64>()) {
        law_substitution_replay(seed).map_err(TestCaseError::fail)?;
    }
}
