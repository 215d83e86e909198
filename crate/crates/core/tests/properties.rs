use anchorstream::means::{overall_from_sums, subgroup_from_sums, CellSums, ReplicateEvaluator};
use anchorstream::tableau::ObservedCell;
use anchorstream::{
    estimate_chapman, estimate_psi, estimate_psi_star, estimate_rs, CellCounts, CountEstimate, DesignContext,
    MeanTarget, NonCaseTotal, Subgroup,
};
use num_rational::Rational64;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn config() -> Config {
    Config { cases: 256, failure_persistence: None, ..Config::default() }
}

/// Every observed cell non-empty so all estimators are defined.
fn full_cells() -> impl Strategy<Value = CellCounts> {
    (prop::array::uniform6(1u64..40), 0u64..400).prop_map(|(n, n7)| {
        CellCounts::new(n[0], n[1], n[2], n[3], n[4], n[5], n7)
    })
}

fn close(exact: Rational64, approx: f64) -> bool {
    let e = exact.to_f64().unwrap();
    (e - approx).abs() <= 1e-9 * e.abs().max(1.0)
}

fn agree(exact: CountEstimate<Rational64>, approx: CountEstimate<f64>) -> bool {
    close(exact.n_hat, approx.n_hat) && close(exact.variance, approx.variance)
}

/// Sums with integer measurements `x = base + k` inside each cell.
fn sums_from(cells: &CellCounts, base: [i64; 6]) -> (CellSums<Rational64>, CellSums<f64>) {
    let n = cells.to_array();
    let mut exact = CellSums::empty(n[6]);
    let mut approx = CellSums::empty(n[6]);
    for cell in ObservedCell::ALL {
        for k in 0..n[cell.index()] {
            let x = base[cell.index()] + (k % 5) as i64;
            exact.add(cell, Some(&Rational64::from_integer(x)));
            approx.add(cell, Some(&(x as f64)));
        }
    }
    (exact, approx)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn float_estimators_match_exact_arithmetic(cells in full_cells()) {
        let ctx = DesignContext::from_cells(&cells).unwrap();
        prop_assert!(agree(estimate_rs(&cells, &ctx).unwrap(), estimate_rs(&cells, &ctx).unwrap()));
        prop_assert!(agree(estimate_chapman(&cells, &ctx).unwrap(), estimate_chapman(&cells, &ctx).unwrap()));
        prop_assert!(agree(estimate_psi(&cells, &ctx).unwrap(), estimate_psi(&cells, &ctx).unwrap()));
        prop_assert!(agree(estimate_psi_star(&cells, &ctx).unwrap(), estimate_psi_star(&cells, &ctx).unwrap()));
    }

    #[test]
    fn case_indicator_mean_is_prevalence(cells in full_cells()) {
        let ctx = DesignContext::from_cells(&cells).unwrap();
        let (mut sums, _) = sums_from(&cells, [0; 6]);
        // Replace the measurement with the case indicator.
        sums.sum = std::array::from_fn(|i| {
            let x = if ObservedCell::ALL[i].is_case() { sums.count[i] as i64 } else { 0 };
            Rational64::from_integer(x)
        });
        sums.sum_sq = sums.sum.clone();
        let star = estimate_psi_star::<Rational64>(&cells, &ctx).unwrap();
        prop_assert_eq!(overall_from_sums(&sums).unwrap(), star.prevalence_hat);
    }

    #[test]
    fn noncase_complement_equals_mirrored_total(cells in full_cells(), base in prop::array::uniform6(-20i64..20)) {
        let (sums, _) = sums_from(&cells, base);
        let mirrored = sums.subgroup_total(Subgroup::NonCases, NonCaseTotal::Mirrored).unwrap();
        let complement = sums.subgroup_total(Subgroup::NonCases, NonCaseTotal::Complement).unwrap();
        prop_assert_eq!(mirrored, complement);
        let a = subgroup_from_sums(&sums, Subgroup::NonCases, NonCaseTotal::Mirrored, None).unwrap();
        let b = subgroup_from_sums(&sums, Subgroup::NonCases, NonCaseTotal::Complement, None).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn estimated_subgroup_total_never_below_identified(cells in full_cells()) {
        let (sums, _) = sums_from(&cells, [1; 6]);
        let n = cells.to_array();
        let cases = sums.subgroup_total(Subgroup::Cases, NonCaseTotal::Mirrored).unwrap();
        prop_assert!(cases >= Rational64::from_integer((n[1] + n[3] + n[5]) as i64));
    }

    #[test]
    fn replicate_of_original_sample_is_point_estimate(cells in full_cells(), base in prop::array::uniform6(-20i64..20)) {
        let (exact, approx) = sums_from(&cells, base);
        let eval = ReplicateEvaluator::new(&approx, NonCaseTotal::Mirrored);
        for (target, subgroup) in [(MeanTarget::Cases, Subgroup::Cases), (MeanTarget::NonCases, Subgroup::NonCases)] {
            let want = subgroup_from_sums(&exact, subgroup, NonCaseTotal::Mirrored, None).unwrap();
            prop_assert!(close(want, eval.evaluate(target, &approx).unwrap()));
        }
    }
}
