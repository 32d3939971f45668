//! Configuration-driven runs: solve, extrapolate, compare against every
//! applicable bound, run the requested check suites and write reports.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::bounds::{
    asymptotic_leading, classical_average_bound, melas_average, polya_tiling_bound,
    theorem1_average, theorem1_correction, BoundInputs,
};
use crate::eigen::{
    default_extrapolation_order, richardson_extrapolate, smallest_eigenvalues, GridDomain,
    Spectrum,
};
use crate::error::{Error, Result};
use crate::fourier::{check_global_identities, check_pointwise_bounds, CheckReport, ZGrid};
use crate::geometry::{measure, DomainConfig, DomainSpec, GeometrySummary, Resolution};
use crate::lemma::{lemma1_fuzz, FuzzConfig, FuzzReport};
use crate::rearrange::{rearrange, slope_bound_check, GriddedFunction, TOL_SLOPE};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckSuite {
    Bounds,
    Fourier,
    Rearrange,
    Lemma1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Gnuplot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            formats: default_formats(),
        }
    }
}

/// Fourier suite settings. Unset fields get dimension-dependent defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierConfig {
    /// Number of eigenfunctions in `f`; defaults to `min(3, k_max)`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub z_max: Option<f64>,
    #[serde(default)]
    pub dz: Option<f64>,
    /// Random pointwise samples, drawn from `[-z_range, z_range]^n`.
    #[serde(default)]
    pub z_samples: Option<usize>,
    #[serde(default)]
    pub z_range: Option<f64>,
}

/// A validated run description with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub l: usize,
    pub k_max: usize,
    /// Grid spacings, coarse to fine; consecutive levels halve.
    pub levels: Vec<f64>,
    pub checks: BTreeSet<CheckSuite>,
    pub output: OutputConfig,
    pub seed: u64,
    pub fourier: FourierConfig,
    pub extrapolation_order: Option<f64>,
    pub lemma1: FuzzConfig,
    /// Directory that relative mask paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

const TOP_LEVEL: &[&str] = &[
    "domain",
    "l",
    "k_max",
    "levels",
    "checks",
    "output",
    "seed",
    "fourier",
    "extrapolation_order",
    "lemma1",
];

fn field<T: serde::de::DeserializeOwned>(obj: &serde_json::Map<String, Value>, key: &str) -> Result<Option<T>> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| Error::config(key, e.to_string())),
    }
}

/// Spacing that resolves `domain` reasonably at desk scale.
pub fn default_spacing(domain: &DomainSpec) -> f64 {
    match domain {
        DomainSpec::Interval { length } => length / 200.0,
        DomainSpec::Ball { radius, .. } => radius / 32.0,
        DomainSpec::Box { lengths } => lengths.iter().copied().fold(f64::INFINITY, f64::min) / 32.0,
        DomainSpec::Mask(m) => m.cell,
    }
}

impl RunConfig {
    /// Parses JSON text; mask paths resolve against `base_dir`.
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::config("(root)", "expected a JSON object"))?;
        if let Some(unknown) = obj.keys().find(|k| !TOP_LEVEL.contains(&k.as_str())) {
            return Err(Error::config(unknown.as_str(), "unknown field"));
        }
        let domain_value = obj
            .get("domain")
            .ok_or_else(|| Error::config("domain", "missing"))?;
        match domain_value.get("kind").and_then(Value::as_str) {
            Some("interval" | "box" | "ball" | "mask") => {}
            Some(other) => {
                return Err(Error::config(
                    "domain.kind",
                    format!("unknown kind `{other}`; expected interval, box, ball or mask"),
                ))
            }
            None => return Err(Error::config("domain.kind", "missing")),
        }
        let domain: DomainConfig = serde_json::from_value(domain_value.clone())
            .map_err(|e| Error::config("domain", e.to_string()))?;
        let l: usize = field(obj, "l")?.ok_or_else(|| Error::config("l", "missing"))?;
        let spec = domain.resolve(base_dir)?;
        let h = default_spacing(&spec);
        let config = RunConfig {
            domain,
            l,
            k_max: field(obj, "k_max")?.unwrap_or(25),
            levels: field(obj, "levels")?.unwrap_or_else(|| vec![h, h / 2.0]),
            checks: field(obj, "checks")?.unwrap_or_else(|| BTreeSet::from([CheckSuite::Bounds])),
            output: field(obj, "output")?.unwrap_or_default(),
            seed: field(obj, "seed")?.unwrap_or(0),
            fourier: field(obj, "fourier")?.unwrap_or_default(),
            extrapolation_order: field(obj, "extrapolation_order")?,
            lemma1: field::<Lemma1Config>(obj, "lemma1")?
                .unwrap_or_default()
                .into_fuzz(),
            base_dir: base_dir.to_path_buf(),
        };
        config.validate(&spec)?;
        Ok(config)
    }

    fn validate(&self, spec: &DomainSpec) -> Result<()> {
        if self.l == 0 {
            return Err(Error::config("l", "must be at least 1"));
        }
        if self.k_max == 0 {
            return Err(Error::config("k_max", "must be at least 1"));
        }
        if self.levels.is_empty() {
            return Err(Error::config("levels", "need at least one grid level"));
        }
        if self.levels.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::config("levels", "spacings must be positive"));
        }
        if let Some(o) = self.extrapolation_order {
            if !(o > 0.0) {
                return Err(Error::config("extrapolation_order", "must be positive"));
            }
        }
        let coarsest = self.levels.iter().copied().fold(0.0, f64::max);
        let grid = GridDomain::from_domain(spec, coarsest)
            .map_err(|e| Error::config("levels", e.to_string()))?;
        if self.k_max > grid.len() {
            return Err(Error::config(
                "k_max",
                format!(
                    "{} exceeds the {} interior nodes of the coarsest level h = {coarsest}",
                    self.k_max,
                    grid.len()
                ),
            ));
        }
        if let Some(k) = self.fourier.k {
            if k == 0 || k > self.k_max {
                return Err(Error::config("fourier.k", "must lie in 1..=k_max"));
            }
        }
        Ok(())
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        self.domain.resolve(&self.base_dir)
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    fn fourier_settings(&self, dim: usize) -> (usize, ZGrid, usize, f64) {
        let f = &self.fourier;
        let (z_max, dz) = if dim == 1 { (60.0, 0.05) } else { (20.0, 0.25) };
        (
            f.k.unwrap_or(self.k_max.min(3)),
            ZGrid {
                z_max: f.z_max.unwrap_or(z_max),
                dz: f.dz.unwrap_or(dz),
            },
            f.z_samples.unwrap_or(200),
            f.z_range.unwrap_or(40.0),
        )
    }
}

/// JSON form of the `lemma1` fuzz settings inside a run config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Lemma1Config {
    #[serde(default)]
    seeds: Option<u64>,
    #[serde(default)]
    b_grid: Option<Vec<f64>>,
    #[serde(default)]
    l_max: Option<usize>,
    #[serde(default)]
    eta: Option<f64>,
}

impl Lemma1Config {
    fn into_fuzz(self) -> FuzzConfig {
        let d = FuzzConfig::default();
        FuzzConfig {
            seeds: self.seeds.unwrap_or(d.seeds),
            b_grid: self.b_grid.unwrap_or(d.b_grid),
            l_max: self.l_max.unwrap_or(d.l_max),
            eta: self.eta,
            ..d
        }
    }
}

/// Reads and validates a run config; mask paths resolve next to the file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    RunConfig::from_json_str(&text, base)
}

/// One row of the bound comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub k: usize,
    pub mean_lambda: f64,
    pub theorem1: f64,
    pub classical: f64,
    pub melas: Option<f64>,
    pub polya: Option<f64>,
    pub margin_ratio: f64,
    pub asymptotic_ratio: f64,
    /// Allowed shortfall of `mean_lambda` below `theorem1`.
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub domain: String,
    pub n: usize,
    pub l: usize,
    pub volume: f64,
    pub inertia: f64,
    pub inertia_feasible: bool,
    pub tol_quad: f64,
    /// The Polya column is a proven bound only for tiling domains.
    pub polya_conjectural: bool,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }
}

/// Everything a run produces; the JSON report is this structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub geometry: GeometrySummary,
    pub extrapolation_order: Option<f64>,
    pub spectra: Vec<Spectrum>,
    pub best: Spectrum,
    pub report: BoundReport,
    pub checks: Vec<CheckReport>,
    pub lemma1: Option<FuzzReport>,
}

impl RunRecord {
    /// No bound row fell short and every non-advisory check passed.
    pub fn passed(&self) -> bool {
        self.report.passed()
            && self.checks.iter().all(|c| c.advisory || c.passed)
            && self.lemma1.as_ref().map_or(true, |r| r.passed())
    }
}

fn boundary_aligned(domain: &DomainSpec, h: f64) -> bool {
    let divides = |a: f64| ((a / h).round() * h - a).abs() <= 1e-9 * a;
    match domain {
        DomainSpec::Interval { length } => divides(*length),
        DomainSpec::Box { lengths } => lengths.iter().all(|&a| divides(a)),
        _ => false,
    }
}

fn geometry_of(domain: &DomainSpec) -> Result<GeometrySummary> {
    match domain {
        DomainSpec::Mask(m) => measure(domain, Resolution::Cell(m.cell)),
        _ => measure(domain, Resolution::Analytic),
    }
}

/// Solves at every level, extrapolates the two finest, evaluates the bounds
/// for `k = 1..k_max` and runs the requested suites.
///
/// A row fails when `mean_lambda < theorem1 - tolerance`, the tolerance
/// combining the extrapolation error estimate of the first `k` values with
/// the effect of the geometry quadrature tolerance on the bound.
pub fn run_report(config: &RunConfig) -> Result<RunRecord> {
    let domain = config.domain_spec()?;
    let n = domain.dimension();
    let geometry = geometry_of(&domain)?;
    let mut levels = config.levels.clone();
    levels.sort_by(|a, b| b.total_cmp(a));
    let finest = *levels.last().unwrap();
    let need_vectors = config.checks.contains(&CheckSuite::Fourier)
        || config.checks.contains(&CheckSuite::Rearrange);

    let spectra: Vec<Spectrum> = levels
        .par_iter()
        .map(|&h| {
            let grid = GridDomain::from_domain(&domain, h)?;
            smallest_eigenvalues(&grid, config.l, config.k_max, need_vectors && h == finest)
        })
        .collect::<Result<_>>()?;

    let (best, order) = if spectra.len() >= 2 {
        let order = config.extrapolation_order.unwrap_or_else(|| {
            default_extrapolation_order(config.l, boundary_aligned(&domain, finest))
        });
        let m = spectra.len();
        (richardson_extrapolate(&spectra[m - 2], &spectra[m - 1], order)?, Some(order))
    } else {
        (spectra[0].clone(), None)
    };

    let report = bound_report(&domain, &geometry, config, &best)?;
    let fine = spectra.last().unwrap();
    let mut checks = Vec::new();
    if config.checks.contains(&CheckSuite::Bounds) {
        checks.extend(bound_invariants(&report));
    }
    if config.checks.contains(&CheckSuite::Fourier) {
        let (k, zg, samples, range) = config.fourier_settings(n);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let zs: Vec<[f64; 2]> = (0..samples)
            .map(|_| {
                let x = rng.gen_range(-range..=range);
                let y = if n == 2 { rng.gen_range(-range..=range) } else { 0.0 };
                [x, y]
            })
            .collect();
        let mut with_errors = fine.clone();
        with_errors.error_estimates = best.error_estimates.clone();
        checks.extend(check_pointwise_bounds(&with_errors, k, &zs)?);
        let target: f64 = best.values[..k].iter().sum();
        checks.extend(check_global_identities(&with_errors, k, zg, Some(target))?);
    }
    if config.checks.contains(&CheckSuite::Rearrange) {
        checks.extend(rearrangement_checks(fine, config.l)?);
    }
    let lemma1 = if config.checks.contains(&CheckSuite::Lemma1) {
        let mut cfg = config.lemma1.clone();
        cfg.first_seed = config.seed;
        Some(lemma1_fuzz(&cfg)?)
    } else {
        None
    };

    Ok(RunRecord {
        version: VERSION.to_string(),
        config_hash: config.hash(),
        config: config.clone(),
        geometry,
        extrapolation_order: order,
        spectra,
        best,
        report,
        checks,
        lemma1,
    })
}

fn bound_report(
    domain: &DomainSpec,
    geometry: &GeometrySummary,
    config: &RunConfig,
    best: &Spectrum,
) -> Result<BoundReport> {
    let n = geometry.dim;
    let l = config.l;
    let mut rows = Vec::with_capacity(config.k_max);
    let mut err_sum = 0.0;
    for k in 1..=config.k_max {
        err_sum += best.error_estimates.get(k - 1).copied().unwrap_or(0.0);
        let x = BoundInputs::new(n, l, geometry.volume, geometry.inertia, k)?;
        let mean = best.mean_of_first(k);
        let t1 = theorem1_average(&x)?.value;
        // every correction term carries at most I^-l
        let geo = l as f64 * theorem1_correction(&x)? * geometry.tol_quad / geometry.inertia;
        let tolerance = err_sum / k as f64 + geo;
        rows.push(BoundRow {
            k,
            mean_lambda: mean,
            theorem1: t1,
            classical: classical_average_bound(&x)?.value,
            melas: (l == 1).then(|| melas_average(&x).map(|b| b.value)).transpose()?,
            polya: (l == 1).then(|| polya_tiling_bound(&x).map(|b| b.value)).transpose()?,
            margin_ratio: mean / t1,
            asymptotic_ratio: mean / asymptotic_leading(&x, true)?.value,
            tolerance,
            passed: mean >= t1 - tolerance,
        });
    }
    let x = BoundInputs::new(n, l, geometry.volume, geometry.inertia, 1)?;
    Ok(BoundReport {
        domain: domain.label(),
        n,
        l,
        volume: geometry.volume,
        inertia: geometry.inertia,
        inertia_feasible: x.inertia_is_feasible(),
        tol_quad: geometry.tol_quad,
        polya_conjectural: !matches!(domain, DomainSpec::Interval { .. } | DomainSpec::Box { .. }),
        rows,
    })
}

/// Structural facts every row must satisfy: the improved bound strictly
/// exceeds the classical one and, for `l = 1`, equals the Melas bound.
fn bound_invariants(report: &BoundReport) -> Vec<CheckReport> {
    let mut out = Vec::new();
    for r in &report.rows {
        let mut c = CheckReport::inequality(format!("classical<theorem1 k={}", r.k), r.classical, r.theorem1, 0.0);
        c.passed = r.classical < r.theorem1;
        out.push(c);
        if let Some(m) = r.melas {
            out.push(CheckReport::identity(
                format!("theorem1=melas k={}", r.k),
                r.theorem1,
                m,
                1e-12 * m,
            ));
        }
    }
    out
}

/// Rearrangement facts for `|u_1|` on the finest grid: mass preservation,
/// the moment inequality and the (advisory) slope ratio.
fn rearrangement_checks(fine: &Spectrum, l: usize) -> Result<Vec<CheckReport>> {
    let (vectors, grid) = fine.eigenvectors()?;
    let f = GriddedFunction::new(grid, vectors[0].iter().map(|v| v.abs()).collect())?;
    let r = rearrange(&f, l)?;
    let raw: f64 = f.values().iter().sum::<f64>() * grid.cell_volume();
    let mut out = vec![CheckReport::identity("rearrange_mass", r.mass, raw, 1e-12 * raw)];
    let reach = (0..grid.len())
        .map(|k| {
            let x = grid.coords(k);
            x[0].hypot(x[1])
        })
        .fold(0.0, f64::max);
    out.push(CheckReport::inequality(
        "rearrange_moment",
        r.radial_moment_2l,
        f.moment_about_origin(2.0 * l as f64),
        r.rebin_tolerance(reach),
    ));
    let s = slope_bound_check(&f)?;
    if !s.skipped {
        out.push(
            CheckReport::inequality("rearrange_slope_ratio", s.worst_ratio, 1.0, TOL_SLOPE).advisory(),
        );
    }
    Ok(out)
}

pub const CSV_HEADER: &str = "k,mean_lambda,theorem1,classical,melas,polya,margin_ratio,asymptotic_ratio";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(report: &BoundReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.k,
            r.mean_lambda,
            r.theorem1,
            r.classical,
            opt(r.melas),
            opt(r.polya),
            r.margin_ratio,
            r.asymptotic_ratio
        );
    }
    s
}

pub fn to_json(record: &RunRecord) -> Result<String> {
    Ok(serde_json::to_string_pretty(record)? + "\n")
}

/// `(series name, two-column data)` for every non-empty series.
pub fn to_gnuplot(report: &BoundReport) -> Vec<(String, String)> {
    type Getter = fn(&BoundRow) -> Option<f64>;
    let series: [(&str, Getter); 7] = [
        ("mean_lambda", |r| Some(r.mean_lambda)),
        ("theorem1", |r| Some(r.theorem1)),
        ("classical", |r| Some(r.classical)),
        ("melas", |r| r.melas),
        ("polya", |r| r.polya),
        ("margin_ratio", |r| Some(r.margin_ratio)),
        ("asymptotic_ratio", |r| Some(r.asymptotic_ratio)),
    ];
    series
        .iter()
        .filter_map(|(name, get)| {
            let mut body = format!("# k {name}\n");
            let mut any = false;
            for r in &report.rows {
                if let Some(v) = get(r) {
                    any = true;
                    let _ = writeln!(body, "{} {}", r.k, v);
                }
            }
            any.then(|| (name.to_string(), body))
        })
        .collect()
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `report.csv`, `report.json` (plus `report.meta.json` holding the
/// wall-clock timestamp) and `report_<series>.dat` into `dir`.
pub fn emit(record: &RunRecord, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    for f in formats {
        match f {
            Format::Csv => written.push(write(dir.join("report.csv"), &to_csv(&record.report))?),
            Format::Json => {
                written.push(write(dir.join("report.json"), &to_json(record)?)?);
                let stamp = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                let meta = serde_json::json!({
                    "config_hash": record.config_hash,
                    "unix_time": stamp,
                });
                written.push(write(dir.join("report.meta.json"), &(meta.to_string() + "\n"))?);
            }
            Format::Gnuplot => {
                for (name, body) in to_gnuplot(&record.report) {
                    written.push(write(dir.join(format!("report_{name}.dat")), &body)?);
                }
            }
        }
    }
    Ok(written)
}

/// Reads a JSON report written by [`emit`].
pub fn load_report(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<RunConfig> {
        RunConfig::from_json_str(text, Path::new("."))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = cfg(r#"{"domain":{"kind":"interval","length":1},"l":2}"#).unwrap();
        assert_eq!(c.k_max, 25);
        assert_eq!(c.levels, vec![1.0 / 200.0, 1.0 / 400.0]);
        assert_eq!(c.checks, BTreeSet::from([CheckSuite::Bounds]));
        assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
    }

    #[test]
    fn bad_kind_names_the_field() {
        let e = cfg(r#"{"domain":{"kind":"triangle","side":1},"l":1}"#).unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "domain.kind"), "{e}");
        let e = cfg(r#"{"domain":{"kind":"interval","length":1},"l":1,"bogus":3}"#).unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "bogus"));
        let e = cfg(r#"{"domain":{"kind":"interval","length":1},"l":"two"}"#).unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "l"));
    }

    #[test]
    fn missing_mask_reports_path() {
        let e = cfg(r#"{"domain":{"kind":"mask","file":"nope.pgm","cell":0.1},"l":1}"#).unwrap_err();
        match e {
            Error::Io { path, .. } => assert!(path.ends_with("nope.pgm")),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn infeasible_k_max_rejected() {
        let e = cfg(r#"{"domain":{"kind":"interval","length":1},"l":1,"k_max":50,"levels":[0.05]}"#)
            .unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "k_max"));
    }

    #[test]
    fn interval_run_end_to_end() {
        let c = cfg(r#"{"domain":{"kind":"interval","length":3.141592653589793},"l":1,"k_max":3}"#)
            .unwrap();
        let rec = run_report(&c).unwrap();
        assert!(rec.passed());
        let row = &rec.report.rows[0];
        assert!((row.mean_lambda - 1.0).abs() < 1e-6);
        assert!((row.margin_ratio - 2.855).abs() < 0.01);
        let csv = to_csv(&rec.report);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert!(csv.lines().nth(1).unwrap().split(',').count() == 8);
    }

    #[test]
    fn membrane_free_columns_are_empty() {
        let c = cfg(r#"{"domain":{"kind":"interval","length":1},"l":2,"k_max":2,"levels":[0.02]}"#).unwrap();
        let rec = run_report(&c).unwrap();
        let csv = to_csv(&rec.report);
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line.split(',').nth(4), Some(""));
        assert_eq!(to_gnuplot(&rec.report).len(), 5);
    }
}
