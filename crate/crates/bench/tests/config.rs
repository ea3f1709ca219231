use equisampler_bench::config::{ExperimentConfig, ExperimentKind, LadderSpec, TemperatureSpec};
use equisampler_bench::BenchError;

const KINDS: [ExperimentKind; 3] = [ExperimentKind::Bench1d, ExperimentKind::Fold, ExperimentKind::QuenchCampaign];

#[test]
fn defaults_round_trip_through_json() {
    for kind in KINDS {
        let cfg = ExperimentConfig::new(kind);
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg, "{kind:?}");
    }
}

#[test]
fn edited_config_round_trips() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Fold);
    cfg.seeds = vec![3, 9];
    cfg.ring_caps = vec![100, 200];
    cfg.temperatures = Some(TemperatureSpec::Explicit(vec![0.5, 1.0, 2.0]));
    cfg.energy_ladder = Some(LadderSpec::Offsets { h0: Some(-5.0), h_top: Some(3.0), ratio: 2.0 });
    cfg.k = Some(2);
    cfg.hmc.n_leapfrog = 7;
    cfg.quench.hops = 11;
    let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn omitted_fields_come_from_the_experiment_defaults() {
    let cfg = ExperimentConfig::from_json(r#"{"experiment":"bench1d","seeds":[7],"hmc":{"n_leapfrog":4}}"#).unwrap();
    let base = ExperimentConfig::new(ExperimentKind::Bench1d);
    assert_eq!(cfg.seeds, vec![7]);
    assert_eq!(cfg.hmc.n_leapfrog, 4);
    assert_eq!(cfg.hmc.initial_step_size, base.hmc.initial_step_size);
    assert_eq!(cfg.k, Some(4));
    assert_eq!(cfg.production, base.production);
}

#[test]
fn unknown_fields_are_rejected() {
    for text in [
        r#"{"experiment":"bench1d","sweeps":10}"#,
        r#"{"experiment":"bench1d","hmc":{"leapfrog":3}}"#,
        r#"{"experiment":"fold","fold":{"natve":"x.xyz"}}"#,
    ] {
        match ExperimentConfig::from_json(text) {
            Err(e @ BenchError::Config(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("{text}: expected a config error, got {other:?}"),
        }
    }
}

#[test]
fn inconsistent_ladders_are_rejected() {
    let text = r#"{"experiment":"bench1d","k":3}"#;
    let err = ExperimentConfig::from_json(text).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    let text = r#"{"experiment":"bench1d","p_ee":1.5}"#;
    assert_eq!(ExperimentConfig::from_json(text).unwrap_err().exit_code(), 2);
    let text = r#"{"experiment":"bench1d","seeds":[]}"#;
    assert_eq!(ExperimentConfig::from_json(text).unwrap_err().exit_code(), 2);
}
