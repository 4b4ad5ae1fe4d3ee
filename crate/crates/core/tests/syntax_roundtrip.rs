use mucalc_core::generator::FormulaGenerator;
use mucalc_core::{parse_formula, print_formula};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let phi = FormulaGenerator::default().formula(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = print_formula(&phi);
        prop_assert_eq!(parse_formula(&text).unwrap(), phi);
    }

    #[test]
    fn negation_is_an_involution(seed in any::<u64>()) {
        let phi = FormulaGenerator::default().formula(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(phi.negate().negate(), phi);
    }
}
