use netpricing_core::harness::{run_experiment, ScenarioConfig};
use netpricing_core::PolicyKind;
use proptest::prelude::*;

fn config(segments: usize, fraction: f64, noise: &str, drift: &str, count: u64, horizon: usize) -> ScenarioConfig {
    let weights: Vec<Vec<f64>> = (0..segments)
        .map(|i| {
            (0..segments)
                .map(|j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let json = format!(
        r#"{{
            "name": "prop", "segments": {segments}, "horizon": {horizon}, "seeds": 2,
            "network": {{"kind": "explicit", "weights": {weights:?}}},
            "rho": {{"fraction_of_bound": {fraction}}},
            "noise": {noise},
            "beta_init": -0.4, "mu_init": [0.1, 0.15],
            "beta_drift": {{"exponent": {drift}}}, "mu_drift": {{"exponent": {drift}}},
            "arrivals": {{"plan": "uniform", "count": {count}}},
            "eta_scale": 0.25, "step_scaling": "segment"
        }}"#
    );
    ScenarioConfig::from_json(&json, "prop").unwrap()
}

const NOISES: [&str; 3] = [
    r#"{"family": "gaussian"}"#,
    r#"{"family": "laplace"}"#,
    r#"{"family": "student_t", "dof": 4.0}"#,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn regret_is_nondecreasing_and_oracle_is_exact(
        segments in 2usize..5,
        fraction in 0.0f64..1.0,
        noise in 0usize..3,
        drift in prop::sample::select(vec!["0.5", "1", "\"inf\""]),
        count in 1u64..80,
        master in any::<u64>(),
    ) {
        let cfg = config(segments, fraction, NOISES[noise], drift, count, 120);
        let scenario = cfg.resolve().unwrap();
        let e = run_experiment(&scenario, &PolicyKind::ALL, 2, 1, master).unwrap();
        prop_assert!(e.table.failures.is_empty(), "{:?}", e.table.failures);
        prop_assert_eq!(e.trajectories.len(), 6);
        for t in &e.trajectories {
            prop_assert_eq!(t.horizon(), 120);
            prop_assert!(t.cumulative[0] >= -1e-9);
            for w in t.cumulative.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-9, "{} regret fell: {:?}", t.policy, w);
            }
            prop_assert!(t.oracle_revenue.iter().all(|r| *r > 0.0 && r.is_finite()));
            if t.policy == PolicyKind::Oracle {
                prop_assert!(t.cumulative.iter().all(|r| *r == 0.0));
            }
        }
    }
}

#[test]
fn noise_family_names_parse() {
    for noise in NOISES {
        config(3, 0.5, noise, "1", 10, 5).resolve().unwrap();
    }
}
