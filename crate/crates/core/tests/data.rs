use std::cell::Cell;
use std::fs;

use nvcert::data::*;
use nvcert::error::{Error, Result};
use nvcert::lseries::CoefficientSource;

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn bundled_files_round_trip_byte_for_byte() {
    let dir = bundled_data_dir();
    let nf = dir.join("newforms.jsonl");
    assert_eq!(serialize_newforms(&load_newforms(&nf).unwrap()), fs::read_to_string(&nf).unwrap());
    let cv = dir.join("curves.jsonl");
    assert_eq!(serialize_curves(&load_curves(&cv).unwrap()), fs::read_to_string(&cv).unwrap());
}

#[test]
fn one_valid_line() {
    let d = tempfile::tempdir().unwrap();
    let p = write(&d, "a.jsonl", "{\"label\":\"11.2.a.a\",\"level\":11,\"weight\":2,\"fricke_sign\":-1,\"orbit_size\":1,\"an\":[1,-2,-1,2]}\n");
    let r = load_newforms(&p).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].coefficients.len(), 4);
    assert_eq!(r[0].coefficients[1].mid(), -2.0);
}

#[test]
fn unnormalised_form_is_rejected_with_line_number() {
    let d = tempfile::tempdir().unwrap();
    let good = "{\"label\":\"a\",\"level\":11,\"weight\":2,\"fricke_sign\":-1,\"orbit_size\":1,\"an\":[1,-2]}\n";
    let bad = "{\"label\":\"b\",\"level\":11,\"weight\":2,\"fricke_sign\":-1,\"orbit_size\":1,\"an\":[2,-2]}\n";
    let p = write(&d, "a.jsonl", &format!("{good}{bad}"));
    match load_newforms(&p) {
        Err(Error::Schema { line, message, .. }) => {
            assert_eq!(line, 2);
            assert!(message.contains("normalised"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn empty_files_load_as_empty() {
    let d = tempfile::tempdir().unwrap();
    let p = write(&d, "e.jsonl", "");
    assert!(load_newforms(&p).unwrap().is_empty());
    assert!(load_curves(&p).unwrap().is_empty());
}

#[test]
fn missing_file_is_io_error() {
    assert!(matches!(load_newforms("/nonexistent/absent.jsonl"), Err(Error::Io { .. })));
}

#[test]
fn curve_missing_field() {
    let d = tempfile::tempdir().unwrap();
    let p = write(&d, "c.jsonl", "{\"label\":\"37a1\",\"analytic_rank\":1,\"lprime\":0.3}\n");
    assert!(matches!(load_curves(&p), Err(Error::Schema { line: 1, .. })));
}

#[test]
fn stated_precision_widens_values() {
    let d = tempfile::tempdir().unwrap();
    let p = write(&d, "c.jsonl", "{\"label\":\"37a1\",\"conductor\":37,\"analytic_rank\":1,\"lprime\":0.306,\"petersson_norm\":0.372,\"prec\":3}\n");
    let c = &load_curves(&p).unwrap()[0];
    let lp = c.lprime_value.unwrap();
    assert!(lp.contains(0.3055) && lp.contains(0.3065));
    assert!(!lp.contains(0.3067));
}

#[test]
fn prime_list_records_expand() {
    let d = tempfile::tempdir().unwrap();
    let p = write(
        &d,
        "ap.jsonl",
        "{\"label\":\"37.2.a.a\",\"level\":37,\"weight\":2,\"fricke_sign\":1,\"orbit_size\":1,\"ap\":{\"2\":-2,\"3\":-3,\"5\":-2,\"7\":-1}}\n",
    );
    let r = &load_newforms(&p).unwrap()[0];
    assert_eq!(r.coefficient_source, CoefficientSource::PrimeList);
    let full = load_newforms(bundled_data_dir().join("newforms.jsonl")).unwrap();
    assert_eq!(&r.coefficients[..], &full[0].coefficients[..7]);
    assert_eq!(serialize_newforms(std::slice::from_ref(r)), fs::read_to_string(&p).unwrap());
}

#[test]
fn tables_load() {
    let dims = load_ns_dimensions(bundled_data_dir().join("ns_dimensions.jsonl")).unwrap();
    assert_eq!(dims[&13], 3);
    let gen = load_x0plus_genera(bundled_data_dir().join("x0plus_genera.jsonl")).unwrap();
    assert_eq!(gen[&67], 2);
    assert_eq!(gen.len(), 95);
}

#[test]
fn digests_are_sha256() {
    let d = tempfile::tempdir().unwrap();
    let p = write(&d, "x", "abc");
    assert_eq!(file_digest(&p).unwrap().sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

struct Mock {
    calls: Cell<usize>,
    body: Option<&'static str>,
    fail: bool,
}

impl Transport for Mock {
    fn get(&self, url: &str) -> Result<Option<Vec<u8>>> {
        self.calls.set(self.calls.get() + 1);
        if self.fail {
            return Err(Error::Fetch { url: url.into(), message: "offline".into() });
        }
        Ok(self.body.map(|b| b.as_bytes().to_vec()))
    }
}

const CURVE_37: &str = "{\"label\":\"37a1\",\"conductor\":37,\"analytic_rank\":1,\"lprime\":0.3059997738340523018,\"petersson_norm\":0.3717541475106960502,\"prec\":17}\n";

fn source(dir: &tempfile::TempDir, body: Option<&'static str>, fail: bool) -> RemoteSource<Mock> {
    RemoteSource {
        base_url: "https://example.invalid/db".into(),
        cache_dir: dir.path().to_path_buf(),
        transport: Mock { calls: Cell::new(0), body, fail },
    }
}

#[test]
fn warm_cache_makes_no_request() {
    let d = tempfile::tempdir().unwrap();
    let s = source(&d, Some(CURVE_37), false);
    let first = s.fetch(37, RecordKind::Curves).unwrap();
    let second = s.fetch(37, RecordKind::Curves).unwrap();
    assert_eq!(s.transport.calls.get(), 1);
    assert_eq!(first, second);
    let cached = load_curves(s.cache_path(37, RecordKind::Curves)).unwrap();
    assert_eq!(first, RemoteRecords::Curves(cached));
}

#[test]
fn poisoned_cache_is_an_integrity_error() {
    let d = tempfile::tempdir().unwrap();
    let s = source(&d, Some(CURVE_37), false);
    s.fetch(37, RecordKind::Curves).unwrap();
    fs::write(s.cache_path(37, RecordKind::Curves), CURVE_37.replace("0.30", "0.31")).unwrap();
    assert!(matches!(s.fetch(37, RecordKind::Curves), Err(Error::Integrity { .. })));
}

#[test]
fn unknown_level_is_empty_not_an_error() {
    let d = tempfile::tempdir().unwrap();
    let s = source(&d, None, false);
    let r = s.fetch(999_983, RecordKind::Newforms).unwrap();
    assert!(r.is_empty());
}

#[test]
fn offline_without_cache_fails_explicitly() {
    let d = tempfile::tempdir().unwrap();
    let s = source(&d, None, true);
    assert!(matches!(s.fetch(37, RecordKind::Curves), Err(Error::Fetch { .. })));
    assert!(!s.cache_path(37, RecordKind::Curves).exists());
}

#[test]
fn invalid_remote_payload_is_not_cached() {
    let d = tempfile::tempdir().unwrap();
    let s = source(&d, Some("{\"label\":1}\n"), false);
    assert!(matches!(s.fetch(37, RecordKind::Curves), Err(Error::Schema { .. })));
    assert!(!s.cache_path(37, RecordKind::Curves).exists());
}

#[test]
fn cache_keys_separate_sources_levels_and_kinds() {
    let d = tempfile::tempdir().unwrap();
    let s = source(&d, None, false);
    let a = s.cache_path(37, RecordKind::Curves);
    assert_ne!(a, s.cache_path(37, RecordKind::Newforms));
    assert_ne!(a, s.cache_path(38, RecordKind::Curves));
    let mut t = source(&d, None, false);
    t.base_url.push('x');
    assert_ne!(a, t.cache_path(37, RecordKind::Curves));
}
