//! Newform and elliptic-curve datasets: JSONL ingestion, hashing and a cached remote client.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lseries::{expand_coefficients, CoefficientSource, NewformRecord};
use crate::rigor::Enclosure;

pub const CACHE_DIR_ENV: &str = "NVCERT_CACHE_DIR";
pub const BASE_URL_ENV: &str = "NVCERT_DATA_URL";

/// An elliptic curve with the inputs of the exclusion screen.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRecord {
    pub label: String,
    pub conductor: u64,
    pub analytic_rank: u32,
    pub lprime_value: Option<Enclosure>,
    pub petersson_norm: Option<Enclosure>,
    raw: RawCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawNewform {
    pub label: String,
    pub level: u64,
    pub weight: u32,
    pub fricke_sign: i64,
    pub orbit_size: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub an: Option<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ap: Option<Map<String, Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prec: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    label: String,
    conductor: u64,
    analytic_rank: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lprime: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    petersson_norm: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prec: Option<u32>,
}

/// Enclosure of a decimal literal, widened by half a unit in its stated
/// last place when `prec` is given.
pub fn literal_enclosure(text: &str, prec: Option<u32>) -> std::result::Result<Enclosure, String> {
    let v: f64 = text.parse().map_err(|_| format!("not a number: {text}"))?;
    if !v.is_finite() {
        return Err(format!("not finite: {text}"));
    }
    let integral = !text.contains(['.', 'e', 'E']);
    let exact = integral && v.abs() < 9_007_199_254_740_992.0;
    let base = if exact { Enclosure::point(v) } else { Enclosure::new(v.next_down(), v.next_up()) };
    Ok(match prec {
        Some(p) if !exact => {
            let half_unit = 0.5 * 10f64.powi(-(p as i32)) * (1.0 + 1e-12);
            base + Enclosure::symmetric_f64(half_unit)
        }
        _ => base,
    })
}

fn number_enclosure(n: &Number, prec: Option<u32>) -> std::result::Result<Enclosure, String> {
    literal_enclosure(&n.to_string(), prec)
}

impl NewformRecord {
    pub(crate) fn from_raw(raw: RawNewform) -> std::result::Result<Self, String> {
        if raw.weight != 2 {
            return Err(format!("weight {} is not 2", raw.weight));
        }
        if raw.fricke_sign != 1 && raw.fricke_sign != -1 {
            return Err(format!("fricke_sign {} is not ±1", raw.fricke_sign));
        }
        if raw.orbit_size == 0 {
            return Err("orbit_size must be at least 1".into());
        }
        if raw.level == 0 {
            return Err("level must be positive".into());
        }
        let (coefficients, source) = match (&raw.an, &raw.ap) {
            (Some(an), None) => {
                let v = an.iter().map(|x| number_enclosure(x, raw.prec)).collect::<std::result::Result<Vec<_>, _>>()?;
                (v, CoefficientSource::FullList)
            }
            (None, Some(ap)) => {
                let mut primes = BTreeMap::new();
                for (k, x) in ap {
                    let p: u64 = k.parse().map_err(|_| format!("ap key {k} is not an integer"))?;
                    let n = match x {
                        Value::Number(n) => n,
                        _ => return Err(format!("ap[{k}] is not a number")),
                    };
                    primes.insert(p, number_enclosure(n, raw.prec)?);
                }
                let target = primes.keys().next_back().copied().unwrap_or(1);
                let v = expand_coefficients(&primes, raw.level, target).map_err(|e| e.to_string())?;
                (v, CoefficientSource::PrimeList)
            }
            _ => return Err("exactly one of \"an\" and \"ap\" is required".into()),
        };
        if coefficients.first().is_none_or(|a1| !a1.contains(1.0)) {
            return Err("not normalised: a_1 != 1".into());
        }
        let mut coefficients = coefficients;
        coefficients[0] = Enclosure::ONE;
        Ok(NewformRecord {
            label: raw.label.clone(),
            level: raw.level,
            fricke_sign: raw.fricke_sign as i8,
            orbit_size: raw.orbit_size,
            coefficients,
            coefficient_source: source,
            raw: Some(raw),
        })
    }

    /// The canonical JSON line of this record.
    pub fn to_json_line(&self) -> String {
        let raw = self.raw.clone().unwrap_or_else(|| RawNewform {
            label: self.label.clone(),
            level: self.level,
            weight: 2,
            fricke_sign: self.fricke_sign as i64,
            orbit_size: self.orbit_size,
            an: Some(self.coefficients.iter().map(|c| Number::from_f64(c.mid()).expect("finite")).collect()),
            ap: None,
            prec: None,
        });
        serde_json::to_string(&raw).expect("serializable")
    }
}

impl CurveRecord {
    fn from_raw(raw: RawCurve) -> std::result::Result<Self, String> {
        if raw.conductor < 11 {
            return Err(format!("conductor {} is below 11", raw.conductor));
        }
        let lprime_value = raw.lprime.as_ref().map(|n| number_enclosure(n, raw.prec)).transpose()?;
        let petersson_norm = raw.petersson_norm.as_ref().map(|n| number_enclosure(n, raw.prec)).transpose()?;
        if petersson_norm.is_some_and(|n| !n.is_positive()) {
            return Err("petersson_norm must be positive".into());
        }
        if (raw.analytic_rank == 1) != lprime_value.is_some() {
            return Err("lprime is required exactly for analytic rank 1".into());
        }
        Ok(CurveRecord {
            label: raw.label.clone(),
            conductor: raw.conductor,
            analytic_rank: raw.analytic_rank,
            lprime_value,
            petersson_norm,
            raw,
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.raw).expect("serializable")
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_lines<T>(path: &Path, text: &str, mut f: impl FnMut(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(f(line).map_err(|message| Error::Schema { path: path.to_path_buf(), line: i + 1, message })?);
    }
    Ok(out)
}

fn parse_newforms(path: &Path, text: &str) -> Result<Vec<NewformRecord>> {
    parse_lines(path, text, |line| {
        let raw: RawNewform = serde_json::from_str(line).map_err(|e| e.to_string())?;
        NewformRecord::from_raw(raw)
    })
}

fn parse_curves(path: &Path, text: &str) -> Result<Vec<CurveRecord>> {
    parse_lines(path, text, |line| {
        let raw: RawCurve = serde_json::from_str(line).map_err(|e| e.to_string())?;
        CurveRecord::from_raw(raw)
    })
}

pub fn load_newforms(path: impl AsRef<Path>) -> Result<Vec<NewformRecord>> {
    let path = path.as_ref();
    parse_newforms(path, &read_file(path)?)
}

pub fn load_curves(path: impl AsRef<Path>) -> Result<Vec<CurveRecord>> {
    let path = path.as_ref();
    parse_curves(path, &read_file(path)?)
}

/// `{"level_param": N, "dim_plus_new": d}` lines, keyed by `N`.
pub fn load_ns_dimensions(path: impl AsRef<Path>) -> Result<BTreeMap<u64, u64>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Row {
        level_param: u64,
        dim_plus_new: u64,
    }
    let path = path.as_ref();
    let rows = parse_lines(path, &read_file(path)?, |l| serde_json::from_str::<Row>(l).map_err(|e| e.to_string()))?;
    Ok(rows.into_iter().map(|r| (r.level_param, r.dim_plus_new)).collect())
}

/// `{"level": N, "genus_x0plus": g}` lines, keyed by `N`.
pub fn load_x0plus_genera(path: impl AsRef<Path>) -> Result<BTreeMap<u64, u64>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Row {
        level: u64,
        genus_x0plus: u64,
    }
    let path = path.as_ref();
    let rows = parse_lines(path, &read_file(path)?, |l| serde_json::from_str::<Row>(l).map_err(|e| e.to_string()))?;
    Ok(rows.into_iter().map(|r| (r.level, r.genus_x0plus)).collect())
}

pub fn serialize_newforms(records: &[NewformRecord]) -> String {
    records.iter().map(|r| r.to_json_line() + "\n").collect()
}

pub fn serialize_curves(records: &[CurveRecord]) -> String {
    records.iter().map(|r| r.to_json_line() + "\n").collect()
}

/// A consumed data file, as named in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFile {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: impl AsRef<Path>) -> Result<DataFile> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(DataFile { path: path.to_path_buf(), sha256: sha256_hex(&bytes) })
}

/// The directory holding the bundled datasets.
pub fn bundled_data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Newforms,
    Curves,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Newforms => "newforms",
            RecordKind::Curves => "curves",
        }
    }
}

/// Plain HTTPS GET. `Ok(None)` means the resource does not exist.
pub trait Transport {
    fn get(&self, url: &str) -> Result<Option<Vec<u8>>>;
}

pub struct HttpTransport;

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<Option<Vec<u8>>> {
        match ureq::get(url).call() {
            Ok(mut resp) => resp
                .body_mut()
                .read_to_vec()
                .map(Some)
                .map_err(|e| Error::Fetch { url: url.to_string(), message: e.to_string() }),
            Err(ureq::Error::StatusCode(404)) => Ok(None),
            Err(e) => Err(Error::Fetch { url: url.to_string(), message: e.to_string() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RemoteRecords {
    Newforms(Vec<NewformRecord>),
    Curves(Vec<CurveRecord>),
}

impl RemoteRecords {
    pub fn is_empty(&self) -> bool {
        match self {
            RemoteRecords::Newforms(v) => v.is_empty(),
            RemoteRecords::Curves(v) => v.is_empty(),
        }
    }
}

/// Client for a database serving `{base}/{kind}/{level}.jsonl`.
pub struct RemoteSource<T: Transport> {
    pub base_url: String,
    pub cache_dir: PathBuf,
    pub transport: T,
}

impl RemoteSource<HttpTransport> {
    /// Base URL and cache directory from the environment.
    pub fn from_env() -> Result<Self> {
        let base_url = std::env::var(BASE_URL_ENV)
            .map_err(|_| Error::Parameter(format!("{BASE_URL_ENV} is not set")))?;
        Ok(RemoteSource { base_url, cache_dir: default_cache_dir(), transport: HttpTransport })
    }
}

pub fn default_cache_dir() -> PathBuf {
    if let Ok(d) = std::env::var(CACHE_DIR_ENV) {
        return PathBuf::from(d);
    }
    if let Ok(d) = std::env::var("XDG_CACHE_HOME") {
        return PathBuf::from(d).join("nvcert");
    }
    match std::env::var("HOME") {
        Ok(h) => PathBuf::from(h).join(".cache").join("nvcert"),
        Err(_) => std::env::temp_dir().join("nvcert-cache"),
    }
}

impl<T: Transport> RemoteSource<T> {
    fn url(&self, level: u64, kind: RecordKind) -> String {
        format!("{}/{}/{}.jsonl", self.base_url.trim_end_matches('/'), kind.as_str(), level)
    }

    /// Cache entry path; the name is the hash of `(source, kind, level)`.
    pub fn cache_path(&self, level: u64, kind: RecordKind) -> PathBuf {
        let key = sha256_hex(format!("{}\n{}\n{}", self.base_url, kind.as_str(), level).as_bytes());
        self.cache_dir.join(format!("{key}.jsonl"))
    }

    fn digest_path(data: &Path) -> PathBuf {
        data.with_extension("sha256")
    }

    fn read_cache(&self, data: &Path) -> Result<Option<Vec<u8>>> {
        let digest = Self::digest_path(data);
        if !data.exists() || !digest.exists() {
            return Ok(None);
        }
        let bytes = fs::read(data).map_err(|e| Error::io(data, e))?;
        let expected = fs::read_to_string(&digest).map_err(|e| Error::io(&digest, e))?.trim().to_string();
        let found = sha256_hex(&bytes);
        if expected != found {
            return Err(Error::Integrity { path: data.to_path_buf(), expected, found });
        }
        Ok(Some(bytes))
    }

    fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
        let dir = path.parent().expect("cache entries live in a directory");
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(format!(".tmp{}", std::process::id()));
        let tmp = PathBuf::from(tmp);
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(dir, e))
    }

    /// Records for one level, from the cache when present.
    ///
    /// A level unknown to the source yields an empty result, which is cached too.
    pub fn fetch(&self, level: u64, kind: RecordKind) -> Result<RemoteRecords> {
        let data = self.cache_path(level, kind);
        let bytes = match self.read_cache(&data)? {
            Some(b) => b,
            None => {
                let body = self.transport.get(&self.url(level, kind))?.unwrap_or_default();
                let text = std::str::from_utf8(&body)
                    .map_err(|e| Error::Fetch { url: self.url(level, kind), message: e.to_string() })?;
                // Validate before anything lands in the cache.
                match kind {
                    RecordKind::Newforms => drop(parse_newforms(Path::new(&self.url(level, kind)), text)?),
                    RecordKind::Curves => drop(parse_curves(Path::new(&self.url(level, kind)), text)?),
                }
                fs::create_dir_all(&self.cache_dir).map_err(|e| Error::io(&self.cache_dir, e))?;
                Self::write_atomic(&data, &body)?;
                Self::write_atomic(&Self::digest_path(&data), sha256_hex(&body).as_bytes())?;
                body
            }
        };
        let text = String::from_utf8(bytes).map_err(|e| Error::Schema { path: data.clone(), line: 0, message: e.to_string() })?;
        Ok(match kind {
            RecordKind::Newforms => RemoteRecords::Newforms(parse_newforms(&data, &text)?),
            RecordKind::Curves => RemoteRecords::Curves(parse_curves(&data, &text)?),
        })
    }
}

/// Fetches through the cache in `cache_dir` with plain HTTPS.
pub fn fetch_remote(base_url: &str, level: u64, kind: RecordKind, cache_dir: impl AsRef<Path>) -> Result<RemoteRecords> {
    RemoteSource { base_url: base_url.to_string(), cache_dir: cache_dir.as_ref().to_path_buf(), transport: HttpTransport }
        .fetch(level, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        assert_eq!(literal_enclosure("3", None).unwrap(), Enclosure::point(3.0));
        let e = literal_enclosure("0.1", None).unwrap();
        assert!(e.contains(0.1) && e.width() < 1e-16);
        let e = literal_enclosure("0.1", Some(3)).unwrap();
        assert!(e.contains(0.1005) && e.contains(0.0995) && !e.contains(0.1006));
        assert!(literal_enclosure("x", None).is_err());
    }

    #[test]
    fn a1_must_be_one() {
        let err = parse_newforms(
            Path::new("t.jsonl"),
            "{\"label\":\"x\",\"level\":11,\"weight\":2,\"fricke_sign\":-1,\"orbit_size\":1,\"an\":[2,-2]}\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Schema { line: 1, .. }), "{err}");
    }
}
