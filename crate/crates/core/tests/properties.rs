use outlier_core::cluster::{init_known_t, is_nonincreasing};
use outlier_core::gl::gl_test_known_t_with_cost;
use outlier_core::pmf::empirical;
use outlier_core::select::{kth_smallest, top_t_largest};
use outlier_core::{average, bhattacharyya, delta2, delta3, kl, kmeans2, Alphabet, GlLimits, Pmf, StopRule};
use proptest::prelude::*;

fn pmf_strategy(k: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        Pmf::new(v.into_iter().map(|x| x / s).collect()).unwrap()
    })
}

/// Pmfs that may put zero mass on some symbols.
fn sparse_pmf_strategy(k: usize) -> impl Strategy<Value = Pmf> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], k)
        .prop_filter("nonzero", |v| v.iter().any(|&x| x > 0.0))
        .prop_map(|v| {
            let s: f64 = v.iter().sum();
            Pmf::new(v.into_iter().map(|x| x / s).collect()).unwrap()
        })
}

fn gammas_strategy(m: std::ops::RangeInclusive<usize>, k: usize) -> impl Strategy<Value = Vec<Pmf>> {
    prop::collection::vec(pmf_strategy(k), m)
}

fn values_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![
            3 => (0u8..5).prop_map(f64::from),
            5 => 0.0f64..10.0,
            1 => Just(f64::INFINITY),
        ],
        1..60,
    )
}

proptest! {
    #[test]
    fn kl_is_nonnegative_and_zero_only_on_equality(p in sparse_pmf_strategy(4), q in sparse_pmf_strategy(4)) {
        let d = kl(&p, &q).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(kl(&p, &p).unwrap(), 0.0);
        if p.total_variation(&q).unwrap() > 1e-6 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn kl_is_infinite_exactly_off_support(p in sparse_pmf_strategy(4), q in sparse_pmf_strategy(4)) {
        let off_support = p.probs().iter().zip(q.probs()).any(|(&a, &b)| a > 0.0 && b == 0.0);
        prop_assert_eq!(kl(&p, &q).unwrap().is_infinite(), off_support);
    }

    #[test]
    fn bhattacharyya_is_symmetric(p in sparse_pmf_strategy(5), q in sparse_pmf_strategy(5)) {
        let a = bhattacharyya(&p, &q).unwrap();
        let b = bhattacharyya(&q, &p).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(a == b || (a - b).abs() <= 1e-15 * a.abs().max(1.0));
    }

    #[test]
    fn empirical_entries_are_counts(seq in prop::collection::vec(0usize..6, 1..200)) {
        let n = seq.len() as f64;
        let g = empirical(&seq, Alphabet::new(6).unwrap()).unwrap();
        for (y, &p) in g.probs().iter().enumerate() {
            let count = seq.iter().filter(|&&s| s == y).count() as f64;
            prop_assert!((p * n - count).abs() < 1e-9);
        }
    }

    #[test]
    fn average_is_idempotent_and_order_free(p in pmf_strategy(4), qs in gammas_strategy(2..=6, 4)) {
        let same = vec![p.clone(); qs.len()];
        let avg = average(&same).unwrap();
        prop_assert!(avg.total_variation(&p).unwrap() < 1e-12);

        let mut rev = qs.clone();
        rev.reverse();
        let a = average(&qs).unwrap();
        let b = average(&rev).unwrap();
        prop_assert!(a.total_variation(&b).unwrap() < 1e-12);
    }

    #[test]
    fn kth_smallest_matches_sort(values in values_strategy(), k in 1usize..60) {
        let k = 1 + (k - 1) % values.len();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let idx = order[k - 1];
        prop_assert_eq!(kth_smallest(&values, k).unwrap(), (values[idx], idx));
    }

    #[test]
    fn top_t_matches_sort(values in values_strategy(), t in 1usize..60) {
        let t = 1 + (t - 1) % values.len();
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let mut want = order[..t].to_vec();
        want.sort_unstable();
        prop_assert_eq!(top_t_largest(&values, t).unwrap(), want);
    }

    #[test]
    fn gl_known_is_relabeling_invariant(gammas in gammas_strategy(5..=8, 3), rot in 0usize..8) {
        let m = gammas.len();
        let rot = rot % m;
        let (s, cost) = gl_test_known_t_with_cost(&gammas, 2, &GlLimits::default()).unwrap();
        let mut rotated = gammas.clone();
        rotated.rotate_left(rot);
        let (s2, cost2) = gl_test_known_t_with_cost(&rotated, 2, &GlLimits::default()).unwrap();
        prop_assert!((cost - cost2).abs() < 1e-12);
        // Continuous random inputs have a unique minimizer almost surely.
        let mapped: Vec<usize> = {
            let mut v: Vec<usize> = s2.indices().iter().map(|&i| (i + rot) % m).collect();
            v.sort_unstable();
            v
        };
        prop_assert_eq!(mapped, s.indices().to_vec());
    }

    #[test]
    fn delta2_one_step_selects_the_farthest_from_the_initial_center(
        gammas in gammas_strategy(5..=12, 4),
        probe in 0usize..12,
    ) {
        let m = gammas.len();
        let probe = probe % m;
        let t = (m - 1) / 2;
        let center = init_known_t(&gammas, probe).unwrap();
        let d: Vec<f64> = gammas.iter().map(|g| kl(g, &center).unwrap()).collect();
        let want = top_t_largest(&d, t).unwrap();
        let out = delta2(&gammas, t, StopRule::one_step(), probe).unwrap();
        prop_assert_eq!(out.detected.unwrap().indices().to_vec(), want);
        prop_assert_eq!(out.iterations, 1);
    }

    #[test]
    fn clustering_costs_never_increase(gammas in gammas_strategy(3..=15, 3), probe in 0usize..15) {
        let probe = probe % gammas.len();
        let out = delta3(&gammas, StopRule::until_convergence(), probe).unwrap();
        prop_assert!(is_nonincreasing(&out.cost_trace));
        prop_assert_eq!(out.iterations, out.cost_trace.len());
        let t = (gammas.len() - 1) / 2;
        let out = delta2(&gammas, t, StopRule::until_convergence(), probe).unwrap();
        prop_assert!(is_nonincreasing(&out.cost_trace));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn kmeans_terminates_within_cap(
        gammas in gammas_strategy(3..=10, 3),
        a in 0usize..10,
        b in 0usize..10,
    ) {
        let (a, b) = (a % gammas.len(), b % gammas.len());
        let run = kmeans2(&gammas, &gammas[a], &gammas[b], StopRule::until_convergence()).unwrap();
        prop_assert!(run.converged);
        prop_assert!(run.iterations <= 100);
        prop_assert!(is_nonincreasing(&run.cost_trace));
    }
}
