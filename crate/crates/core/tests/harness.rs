use outlier_core::gl::{gl_cost_known_t, gl_test_known_t_with_cost};
use outlier_core::sim::{
    convergence_profile, gen_cluster, gen_random_outliers, run_sim, sample_empiricals, scenario_rng, Harness,
    ProbePolicy, Scenario, ScenarioGenerator, ScenarioKind, ScenarioSpec, SimConfig,
};
use outlier_core::{Alphabet, GlLimits, OutlierSet, Pmf, TestKind};
use rand_distr::weighted::WeightedAliasIndex;

fn pmf(v: &[f64]) -> Pmf {
    Pmf::new(v.to_vec()).unwrap()
}

fn identical(pi: &[f64], mu: &[f64], outliers: Vec<usize>, m: usize) -> ScenarioSpec {
    let s = OutlierSet::new(outliers, m).unwrap();
    ScenarioSpec::Explicit(Scenario::identical(pmf(pi), pmf(mu), s).unwrap())
}

#[test]
fn dirichlet_draws_center_on_the_barycenter() {
    let a = Alphabet::new(3).unwrap();
    let draws = gen_random_outliers(a, 10_000, &mut scenario_rng(0), &Pmf::uniform(a), 0.0).unwrap();
    let mut mean = [0.0; 3];
    for d in &draws {
        for (m, p) in mean.iter_mut().zip(d.probs()) {
            *m += p / 10_000.0;
        }
    }
    let tv = 0.5 * mean.iter().map(|m| (m - 1.0 / 3.0).abs()).sum::<f64>();
    assert!(tv < 0.02, "{mean:?}");
}

#[test]
fn small_noise_clusters_stay_close() {
    let c = Pmf::uniform(Alphabet::new(10).unwrap());
    let draws = gen_cluster(&c, 100, 0.01, &mut scenario_rng(1)).unwrap();
    let worst = draws.iter().map(|p| p.total_variation(&c).unwrap()).fold(0.0, f64::max);
    assert!(worst < 0.1, "{worst}");
}

#[test]
fn empirical_concentrates() {
    let sampler = WeightedAliasIndex::new(vec![0.3, 0.7]).unwrap();
    let mut rng = outlier_core::sim::trial_rng(7, 1000, 0);
    let g = sample_empiricals(&[sampler], 2, 1000, &mut rng).remove(0);
    assert!(g.total_variation(&pmf(&[0.3, 0.7])).unwrap() < 0.05);
}

#[test]
fn separated_known_t_is_rarely_wrong() {
    let scenario = identical(&[0.25; 4], &[0.7, 0.1, 0.1, 0.1], vec![2, 7], 10);
    let config = SimConfig::new(scenario, vec![500], 200, vec![TestKind::Delta2, TestKind::GlKnown]);
    let records = run_sim(&config).unwrap();
    for r in &records {
        assert!(r.error_rate <= 0.02, "{r:?}");
        assert_eq!(r.cost_violations, 0);
    }
    assert!(records[1].error_rate <= 0.01);
}

#[test]
fn records_are_identical_across_thread_counts() {
    let g = ScenarioGenerator::new(ScenarioKind::IdenticalTypicalDistinctOutliers, 6, 12, 3);
    let mut config = SimConfig::new(
        ScenarioSpec::Generate(g),
        vec![10, 30, 60],
        100,
        outlier_core::TestKind::ALL.to_vec(),
    );
    config.master_seed = 42;
    config.threads = Some(1);
    let one = run_sim(&config).unwrap();
    config.threads = Some(4);
    let four = run_sim(&config).unwrap();
    assert_eq!(one, four);
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&four).unwrap()
    );
    config.master_seed = 43;
    assert_ne!(run_sim(&config).unwrap(), one);
}

#[test]
fn config_round_trips_through_json() {
    let g = ScenarioGenerator::new(ScenarioKind::TwoClusters, 10, 20, 4);
    let mut config = SimConfig::new(ScenarioSpec::Generate(g), vec![50, 100], 10, vec![TestKind::Delta3]);
    config.probe = ProbePolicy::Fixed(3);
    let text = serde_json::to_string(&config).unwrap();
    let back: SimConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, config);

    let explicit = SimConfig::new(
        identical(&[0.5, 0.5], &[0.9, 0.1], vec![0], 4),
        vec![5],
        1,
        vec![TestKind::Delta2],
    );
    let back: SimConfig = serde_json::from_str(&serde_json::to_string(&explicit).unwrap()).unwrap();
    assert_eq!(back, explicit);
}

#[test]
fn invalid_scenarios_are_refused_when_deserializing() {
    let text = r#"{"explicit":{"kind":"identical-both","typical_pmfs":[[0.5,0.5],[0.5,0.5]],"outlier_pmfs":[[0.9,0.1]],"true_set":[0,1]}}"#;
    assert!(serde_json::from_str::<ScenarioSpec>(text).is_err());
}

#[test]
fn iterations_fall_with_more_samples() {
    let g = ScenarioGenerator::new(ScenarioKind::IdenticalBoth, 10, 100, 10);
    let mut config = SimConfig::new(
        ScenarioSpec::Generate(g),
        vec![10, 50, 1600],
        100,
        vec![TestKind::Delta3],
    );
    config.master_seed = 3;
    let profile = convergence_profile(&[config]).unwrap();
    assert!(profile[2].avg_iterations <= profile[0].avg_iterations);
    assert!(profile[0].avg_iterations > 1.0);
}

#[test]
fn large_samples_converge_in_one_step() {
    let g = ScenarioGenerator::new(ScenarioKind::IdenticalBoth, 10, 100, 10);
    let mut config = SimConfig::new(ScenarioSpec::Generate(g), vec![10_000], 50, vec![TestKind::Delta3]);
    config.master_seed = 4;
    let profile = convergence_profile(&[config]).unwrap();
    assert!((profile[0].avg_iterations - 1.0).abs() <= 0.2, "{profile:?}");
}

#[test]
fn clustered_scenario_is_detected() {
    let mut rng = scenario_rng(5);
    let pi = Pmf::uniform(Alphabet::new(10).unwrap());
    let mu = pmf(&[0.25, 0.05, 0.05, 0.15, 0.05, 0.05, 0.15, 0.05, 0.05, 0.15]);
    let typicals = gen_cluster(&pi, 7, 0.01, &mut rng).unwrap();
    let outliers = gen_cluster(&mu, 3, 0.01, &mut rng).unwrap();
    let truth = OutlierSet::new(vec![1, 4, 8], 10).unwrap();
    let scenario = Scenario::new(ScenarioKind::TwoClusters, typicals, outliers, truth).unwrap();
    let mut config = SimConfig::new(
        ScenarioSpec::Explicit(scenario),
        vec![1000],
        200,
        vec![TestKind::Delta3],
    );
    config.master_seed = 5;
    let r = run_sim(&config).unwrap();
    assert!(r[0].error_rate <= 0.02, "{r:?}");
}

#[test]
fn converged_delta2_is_locally_optimal() {
    let scenario = identical(&[0.25; 4], &[0.55, 0.15, 0.15, 0.15], vec![3, 4], 10);
    let config = SimConfig::new(scenario, vec![1000], 200, vec![TestKind::Delta2]);
    let harness = Harness::new(&config).unwrap();
    let mut equal = 0;
    for t in harness.trials_at(1000).unwrap() {
        let s = t.runs[0].outcome.detected.clone().unwrap();
        let local = gl_cost_known_t(&t.gammas, &s).unwrap();
        let (_, global) = gl_test_known_t_with_cost(&t.gammas, 2, &GlLimits::default()).unwrap();
        assert!(local >= global);
        equal += usize::from(local == global);
    }
    assert!(equal as f64 / 200.0 >= 0.95, "{equal}");
}

#[test]
fn log_error_rate_decreases_with_n() {
    let scenario = identical(&[0.25; 4], &[0.4, 0.2, 0.2, 0.2], vec![0, 5], 10);
    let mut config = SimConfig::new(
        scenario,
        vec![50, 100, 150, 200],
        1000,
        vec![TestKind::Delta2, TestKind::Delta2OneStep],
    );
    config.master_seed = 8;
    let records = run_sim(&config).unwrap();
    for test in [TestKind::Delta2, TestKind::Delta2OneStep] {
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.test_name == test && r.errors > 0)
            .map(|r| (r.n as f64, r.error_rate.ln()))
            .collect();
        assert!(pts.len() >= 3, "{records:?}");
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let slope: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
        assert!(slope < 0.0);
    }
}
