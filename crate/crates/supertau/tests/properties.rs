mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dx_is_a_derivation(p in poly(1), r in poly(2)) {
        leibniz(&dx_flow(), &p, 1, &r)?;
    }

    #[test]
    fn odd_flow_is_a_graded_derivation(p in poly(1), r in poly(0)) {
        leibniz(&odd_flow(), &one_field(&p), 1, &one_field(&r))?;
    }

    #[test]
    fn antiderivative_inverts_dx_on_jets(p in poly(1)) {
        antiderivative_inverts_dx(&p)?;
    }

    #[test]
    fn variational_derivatives_ignore_total_derivatives(p in poly(2), r in poly(2)) {
        lift_independent(&p, &r)?;
    }

    #[test]
    fn products_reach_one_normal_form(gs in factors(), a in poly(1), b in poly(0), c in poly(1)) {
        confluent(&gs, &a, &b, &c)?;
    }
}
