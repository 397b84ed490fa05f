use num_traits::Zero;
use proptest::prelude::*;

use ocsp_core::analysis::{
    bucketize, efron_stein, noise_operator, noisy_influences, FiniteFunction, ProductSpace,
};
use ocsp_core::distributions::BaseDistribution;
use ocsp_core::order::perm::{all_permutations, for_each_linear_extension};
use ocsp_core::rational::{int, ratio, Rational};
use ocsp_core::reduction::{
    acceptance_probability, acceptance_with_pmf, dict_test_pmf, FunctionTable, TestDistribution,
};
use ocsp_core::solvers::{monte_carlo_value, InstanceSampler};
use ocsp_core::{exact_value, OcspInstance, OrderingPredicate};

fn function_on(sizes: Vec<usize>, values: Vec<i64>) -> FiniteFunction<Rational> {
    let space = ProductSpace::uniform(&sizes).unwrap();
    let n = space.len();
    FiniteFunction::new(space, values.into_iter().take(n).map(|v| ratio(v, 4)).collect()).unwrap()
}

fn small_function() -> impl Strategy<Value = FiniteFunction<Rational>> {
    prop::collection::vec(2usize..=3, 1..=3).prop_flat_map(|sizes| {
        let n: usize = sizes.iter().product();
        prop::collection::vec(-8i64..=8, n).prop_map(move |v| function_on(sizes.clone(), v))
    })
}

fn predicate() -> impl Strategy<Value = OrderingPredicate> {
    prop_oneof![
        Just(OrderingPredicate::mas()),
        Just(OrderingPredicate::btw()),
        Just(OrderingPredicate::nbtw()),
        Just(OrderingPredicate::same_order(2).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noise_preserves_mean_and_shrinks_variance(f in small_function(), k in 0i64..=8) {
        let rho = ratio(k, 8);
        let g = noise_operator(&f, &rho);
        prop_assert_eq!(g.expectation(), f.expectation());
        prop_assert!(g.variance() <= f.variance());
    }

    #[test]
    fn noise_operators_compose(f in small_function(), a in 0i64..=4, b in 0i64..=4) {
        let (ra, rb) = (ratio(a, 4), ratio(b, 4));
        let lhs = noise_operator(&noise_operator(&f, &ra), &rb);
        prop_assert_eq!(lhs, noise_operator(&f, &(&ra * &rb)));
    }

    #[test]
    fn efron_stein_parts_reconstruct_and_are_orthogonal(f in small_function()) {
        let parts = efron_stein(&f).unwrap();
        let mut sum = parts[0].clone();
        for p in &parts[1..] {
            sum = sum.zip_with(p, |a, b| a + b).unwrap();
        }
        prop_assert_eq!(&sum, &f);
        for s in 0..parts.len() {
            for t in s + 1..parts.len() {
                prop_assert!(parts[s].inner(&parts[t]).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn noisy_influences_bounded_by_variance(f in small_function(), k in 1i64..=10) {
        let gamma = ratio(k, 10);
        let infs = noisy_influences(&f, &gamma);
        let var = f.variance();
        prop_assert!(infs.iter().all(|i| *i <= var));
        prop_assert!(infs.iter().sum::<Rational>() <= &var / &gamma);
    }

    #[test]
    fn tie_extension_matches_linear_extension_average(
        pred in predicate(),
        raw in prop::collection::vec(0i64..3, 4),
    ) {
        let tuple = &raw[..pred.arity()];
        let mut total = Rational::zero();
        let mut count = 0i64;
        for_each_linear_extension(tuple, |perm| {
            total += pred.payoff(perm);
            count += 1;
        });
        prop_assert_eq!(pred.extended_eval(tuple).unwrap(), total / int(count));
    }

    #[test]
    fn bucketing_is_monotone_and_balanced(
        values in prop::collection::vec(-20i64..20, 12),
        buckets in prop::sample::select(vec![1usize, 2, 3, 4, 6, 12]),
    ) {
        let b = bucketize(&values, buckets).unwrap();
        for block in &b.members {
            prop_assert_eq!(block.len(), 12 / buckets);
        }
        for i in 0..12 {
            for j in 0..12 {
                if values[i] < values[j] {
                    prop_assert!(b.index[i] <= b.index[j]);
                }
            }
        }
    }

    #[test]
    fn pmf_and_direct_acceptance_agree(
        fv in prop::collection::vec(-3i64..3, 4),
        gv in prop::collection::vec(-3i64..3, 4),
        k in 0i64..=5,
    ) {
        let base = BaseDistribution::nbtw_base(2).unwrap();
        let td = TestDistribution::new(base, ratio(k, 10), vec![0, 1], 2).unwrap();
        let f = FunctionTable::new(vec![0, 1], 2, fv).unwrap();
        let g = FunctionTable::new(vec![0, 1], 2, gv).unwrap();
        let pred = OrderingPredicate::nbtw();
        let pmf = dict_test_pmf(&td).unwrap();
        prop_assert_eq!(
            acceptance_probability(&f, &g, &td, &pred).unwrap(),
            acceptance_with_pmf(&f, &g, &pmf, &pred).unwrap()
        );
    }
}

#[test]
fn monte_carlo_tracks_exact_value() {
    let inst = OcspInstance::from_named(
        &["a", "b", "c", "d", "e"],
        vec![OrderingPredicate::btw(), OrderingPredicate::mas()],
        &[(vec!["a", "b", "c"], 0, int(2)), (vec!["c", "d", "e"], 0, int(1)), (vec!["e", "a"], 1, int(1))],
    )
    .unwrap();
    let best = exact_value(&inst).unwrap();
    let ordering = best.best_ordering.clone().unwrap();
    let ranks = ordering.ranks_for(&inst).unwrap();
    let mc = monte_carlo_value(&InstanceSampler::new(&inst).unwrap(), &ranks, 50_000, 11).unwrap();
    let exact = best.best_value.to_f64();
    assert!((mc.best_value.to_f64() - exact).abs() <= mc.ci_halfwidth.unwrap().max(1e-12));
}

#[test]
fn random_ordering_value_is_the_mean_payoff() {
    for pred in [OrderingPredicate::btw(), OrderingPredicate::same_order(3).unwrap()] {
        let perms = all_permutations(pred.arity());
        let mean: Rational = perms.iter().map(|p| pred.payoff(p).clone()).sum::<Rational>() / int(perms.len() as i64);
        assert_eq!(pred.random_ordering_value(), mean);
    }
}
