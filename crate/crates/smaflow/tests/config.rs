use std::fs;
use std::path::Path;

use smaflow::config::{Format, InitSpec, RESOLVED_NAME};
use smaflow::{load_config, Error, RunConfig};
use smaflow_core::{DealiasRule, Scheme};

fn parse(text: &str) -> smaflow::Result<RunConfig> {
    RunConfig::from_json(text, Path::new("test.json"), Path::new("/base"))
}

#[test]
fn minimal_config_takes_documented_defaults() {
    let c = parse(r#"{"n": 32}"#).unwrap();
    assert_eq!(
        (c.mu1, c.mu4, c.mu5, c.k, c.lambda, c.epsilon),
        (0.0, 1.0, 0.0, 1.0, 1.0, 1.0)
    );
    assert_eq!(c.dealias, DealiasRule::TwoThirds);
    assert_eq!(c.scheme, Scheme::Imex1);
    assert_eq!((c.dt, c.t_end, c.snapshot_every, c.diag_every), (1e-3, 1.0, 1000, 1));
    assert_eq!(c.initial.v, InitSpec::Zero {});
    assert_eq!(c.formats, vec![Format::Csv]);
    assert_eq!(c.output_dir, Path::new("/base/out"));
}

#[test]
fn parameter_errors_name_the_field() {
    match parse(r#"{"n": 32, "mu4": -1}"#) {
        Err(Error::Invalid { field, .. }) => assert_eq!(field, "mu4"),
        other => panic!("{other:?}"),
    }
    match parse(r#"{"n": 12}"#) {
        Err(Error::Invalid { field, .. }) => assert_eq!(field, "n"),
        other => panic!("{other:?}"),
    }
    match parse(r#"{"n": 16, "initial": {"phi": {"type": "random_band", "max_mode": 8, "amplitude": 0.1, "seed": 1}}}"#)
    {
        Err(Error::Invalid { field, .. }) => assert_eq!(field, "initial.phi.max_mode"),
        other => panic!("{other:?}"),
    }
    match parse(r#"{"n": 16, "initial": {"phi": {"type": "taylor_green", "amplitude": 1}}}"#) {
        Err(Error::Invalid { field, .. }) => assert_eq!(field, "initial.phi"),
        other => panic!("{other:?}"),
    }
    match parse(r#"{"n": 16, "steady": {"tol": 0}}"#) {
        Err(Error::Invalid { field, .. }) => assert!(field.starts_with("steady."), "{field}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_keys_are_rejected_with_a_position() {
    match parse("{\n  \"n\": 32,\n  \"mu9\": 1\n}") {
        Err(Error::Parse { line, message, .. }) => {
            assert_eq!(line, 3);
            assert!(message.contains("mu9"), "{message}");
        }
        other => panic!("{other:?}"),
    }
    let nested = r#"{"n": 16, "initial": {"v": {"type": "zero", "extra": 1}}}"#;
    assert!(matches!(parse(nested), Err(Error::Parse { .. })));
}

#[test]
fn resolved_config_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(
        &path,
        r#"{"n": 16, "mu1": 0.1, "scheme": "imex2", "dealias": "half",
            "initial": {"phi": {"type": "random_band", "max_mode": 3, "amplitude": 0.1, "seed": 4}},
            "formats": ["csv", "json"], "output_dir": "results"}"#,
    )
    .unwrap();
    let first = load_config(&path).unwrap();
    assert!(first.output_dir.is_absolute());
    fs::create_dir_all(&first.output_dir).unwrap();
    let resolved = first.write_resolved(&first.output_dir).unwrap();
    assert_eq!(resolved.file_name().unwrap(), RESOLVED_NAME);
    let second = load_config(&resolved).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.to_json(), second.to_json());
}
