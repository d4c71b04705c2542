use std::f64::consts::TAU;

use smaflow::snapshot::{decode, encode};
use smaflow::{load_snapshot, save_snapshot, Error, SnapshotError};
use smaflow_core::{make_grid, Field, State, VectorField};

fn sample_state() -> State {
    let g = make_grid(16).unwrap();
    let v = VectorField::new(
        Field::from_fn(&g, |x, y| (TAU * x).sin() * (TAU * y).cos() / 3.0),
        Field::from_fn(&g, |x, y| -(TAU * x).cos() * (TAU * y).sin() / 3.0),
    );
    let phi = Field::from_fn(&g, |x, y| 0.1 * (TAU * (x + 2.0 * y)).sin() + 1e-300 * x);
    State::new(v, phi, 0.1 + 0.2).unwrap()
}

fn bits(f: &Field) -> Vec<u64> {
    f.physical().iter().map(|x| x.to_bits()).collect()
}

#[test]
fn round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.smf");
    let s = sample_state();
    save_snapshot(&s, &path).unwrap();
    let r = load_snapshot(&path).unwrap();
    assert_eq!(r.t.to_bits(), s.t.to_bits());
    assert_eq!(bits(&r.v[0]), bits(&s.v[0]));
    assert_eq!(bits(&r.v[1]), bits(&s.v[1]));
    assert_eq!(bits(&r.phi), bits(&s.phi));
}

#[test]
fn truncated_file_is_a_size_mismatch() {
    let bytes = encode(&sample_state());
    let cut = &bytes[..bytes.len() - 8];
    match decode(cut) {
        Err(SnapshotError::SizeMismatch { expected, actual }) => assert_eq!(expected, actual + 8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn wrong_magic_is_rejected() {
    let mut bytes = encode(&sample_state());
    bytes[7] = b'2';
    assert!(matches!(decode(&bytes), Err(SnapshotError::BadMagic)));
    assert!(matches!(decode(b""), Err(SnapshotError::BadMagic)));
}

#[test]
fn non_finite_values_are_rejected() {
    let mut bytes = encode(&sample_state());
    let header = bytes.len() - 3 * 256 * 8;
    let at = header + 2 * 256 * 8 + 5 * 8;
    bytes[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
    match decode(&bytes) {
        Err(SnapshotError::NonFinite { field, index }) => assert_eq!((field, index), ("phi", 5)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn load_errors_carry_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("junk.smf");
    std::fs::write(&path, b"not a snapshot").unwrap();
    let err = load_snapshot(&path).unwrap_err();
    assert!(matches!(err, Error::Snapshot { .. }));
    assert!(err.to_string().contains("junk.smf"));
    assert!(matches!(
        load_snapshot(&dir.path().join("none.smf")),
        Err(Error::Io { .. })
    ));
}
