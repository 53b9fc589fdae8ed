//! Riemann-zero detection through the three-level gate.
//!
//! `H_E(t) = Delta_E (|0><1| + |1><0|) + Omega(t) (|2><b| + |b><2|)` with
//! `Delta_E = xi(E)`. At a zero of `xi` the detuning vanishes and the phase
//! block of the `{|0>, |1>}` eigenspace is exactly the gate `n . sigma`; away
//! from zeros the evolution is no longer cyclic and the gate degrades. The
//! scan records both signatures per energy and cross-checks them against
//! sign changes of `xi`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NogpError, Result};
use crate::linalg::{c, max_abs, ComplexMatrix, C64};
use crate::nogp::compute_nogp;
use crate::propagator::{cyclicity_residual, DrivenHamiltonian};
use crate::three_level::{closed_form_g1, Pulse, ThreeLevelParams};
use crate::xi::{find_zeros, scan_grid, XiConfig, XiEvaluator, ZeroBracket, DEFAULT_ROOT_TOL};

/// How `G_1` is compared with the ideal gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateDistance {
    /// `max_abs(G_1 - n . sigma)`.
    MaxAbs,
    /// `min_alpha max_abs(e^{i alpha} G_1 - n . sigma)`, with `alpha` from the
    /// trace overlap.
    PhaseQuotient,
}

impl FromStr for GateDistance {
    type Err = NogpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-abs" => Ok(Self::MaxAbs),
            "phase-quotient" => Ok(Self::PhaseQuotient),
            _ => Err(NogpError::Parse {
                what: "distance".into(),
                message: format!("unknown metric {s:?} (max-abs | phase-quotient)"),
            }),
        }
    }
}

impl GateDistance {
    pub fn measure(self, g: &ComplexMatrix, ideal: &ComplexMatrix) -> f64 {
        match self {
            Self::MaxAbs => max_abs(&(g - ideal)),
            Self::PhaseQuotient => {
                let overlap = (ideal.adjoint() * g).trace();
                let rot = if overlap.norm() > 0.0 {
                    C64::from_polar(1.0, -overlap.arg())
                } else {
                    c(1.0, 0.0)
                };
                max_abs(&(g * rot - ideal))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = NogpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(NogpError::Parse {
                what: "format".into(),
                message: format!("unknown format {s:?} (csv | json)"),
            }),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub e_step: f64,
    pub pulse: Pulse,
    pub period: f64,
    pub theta: f64,
    pub vartheta: f64,
    pub steps: usize,
    /// Eigenvalues of `X_0 = lambda_1 (|0><0| + |1><1|) + lambda_2 |2><2|`.
    pub lambda1: f64,
    pub lambda2: f64,
    pub cyc_tol: f64,
    pub gate_tol: f64,
    pub distance: GateDistance,
    pub workers: usize,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub root_tol: f64,
    pub xi: XiConfig,
    /// Replaces `xi(E)` by a fixed detuning.
    pub delta_override: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            e_min: 10.0,
            e_max: 30.0,
            e_step: 0.25,
            pulse: Pulse::Constant,
            period: 1.0,
            theta: 1.0,
            vartheta: 0.5,
            steps: 2000,
            lambda1: 0.0,
            lambda2: 1.0,
            cyc_tol: 1e-4,
            gate_tol: 1e-3,
            distance: GateDistance::MaxAbs,
            workers: 4,
            format: OutputFormat::Csv,
            out: None,
            root_tol: DEFAULT_ROOT_TOL,
            xi: XiConfig::default(),
            delta_override: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| NogpError::Parse {
        what: key.into(),
        message: format!("{value:?}: {e}"),
    })
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NogpError::InvalidParameter(m));
        if !(self.e_min.is_finite() && self.e_max.is_finite()) || self.e_min > self.e_max {
            return bad(format!("energy range [{}, {}]", self.e_min, self.e_max));
        }
        if !(self.e_step > 0.0) {
            return bad(format!("e-step = {}", self.e_step));
        }
        if !(self.period > 0.0) || self.steps == 0 || self.workers == 0 {
            return bad("period, steps and workers must be positive".into());
        }
        if !(self.cyc_tol > 0.0 && self.gate_tol > 0.0 && self.root_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.pulse == Pulse::Off {
            return bad("the scan needs a gate pulse".into());
        }
        if self.lambda1 >= self.lambda2 {
            return bad("lambda1 < lambda2 required".into());
        }
        self.xi.validate()
    }

    /// Sets one option by its flag name (`e-min`, `pulse`, `steps`, ...).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "e-min" => self.e_min = parse_value(key, value)?,
            "e-max" => self.e_max = parse_value(key, value)?,
            "e-step" => self.e_step = parse_value(key, value)?,
            "pulse" => self.pulse = parse_value(key, value)?,
            "period" => self.period = parse_value(key, value)?,
            "theta" => self.theta = parse_value(key, value)?,
            "vartheta" => self.vartheta = parse_value(key, value)?,
            "steps" => self.steps = parse_value(key, value)?,
            "lambda1" => self.lambda1 = parse_value(key, value)?,
            "lambda2" => self.lambda2 = parse_value(key, value)?,
            "cyc-tol" => self.cyc_tol = parse_value(key, value)?,
            "gate-tol" => self.gate_tol = parse_value(key, value)?,
            "distance" => self.distance = parse_value(key, value)?,
            "workers" => self.workers = parse_value(key, value)?,
            "format" => self.format = parse_value(key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "root-tol" => self.root_tol = parse_value(key, value)?,
            "t-max" => self.xi.t_max = parse_value(key, value)?,
            "xi-terms" => self.xi.terms = parse_value(key, value)?,
            "xi-panels" => self.xi.panels = parse_value(key, value)?,
            "delta" => self.delta_override = Some(parse_value(key, value)?),
            _ => {
                return Err(NogpError::Parse {
                    what: "config".into(),
                    message: format!("unknown key {key:?}"),
                })
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ThreeLevelParams> {
        ThreeLevelParams::for_gate(self.theta, self.vartheta, self.pulse, self.period)
    }
}

/// Parses flat `key = value` text; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| NogpError::Parse {
            what: "config".into(),
            message: format!("line {}: expected key=value", n + 1),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

mod nan_as_null {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// One scanned energy. Failed rows carry `NaN` and a status message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    #[serde(rename = "E", with = "nan_as_null")]
    pub e: f64,
    #[serde(with = "nan_as_null")]
    pub delta: f64,
    #[serde(with = "nan_as_null")]
    pub cyc_residual: f64,
    #[serde(with = "nan_as_null")]
    pub gate_distance: f64,
    /// `arg(G_2)` in `[0, 2 pi)`.
    #[serde(with = "nan_as_null")]
    pub g2_phase: f64,
    pub zero_flag: bool,
    /// `ok`, `not_cyclic`, or `error: ...`.
    pub status: String,
}

impl ScanRecord {
    fn failed(e: f64, delta: f64, err: &NogpError) -> Self {
        Self {
            e,
            delta,
            cyc_residual: f64::NAN,
            gate_distance: f64::NAN,
            g2_phase: f64::NAN,
            zero_flag: false,
            status: format!("error: {err}").replace([',', '\n'], ";"),
        }
    }
}

/// `H_E(t)` for a given detuning.
pub fn floquet_hamiltonian_with_delta(delta: f64, p: &ThreeLevelParams) -> DrivenHamiltonian {
    let mut hop = ComplexMatrix::zeros(3, 3);
    hop[(0, 1)] = c(delta, 0.0);
    hop[(1, 0)] = c(delta, 0.0);
    let coupling = p.coupling();
    let (pulse, period) = (p.pulse, p.period);
    DrivenHamiltonian::new(
        format!("floquet/{pulse}/delta={delta:e}"),
        period,
        move |t| &hop + coupling.scale(pulse.value(t, period)),
    )
    .expect("Floquet Hamiltonian is well formed")
}

/// `H_E(t)` together with `Delta_E = xi(E)`.
#[derive(Debug, Clone)]
pub struct FloquetHamiltonian {
    pub e: f64,
    pub delta: f64,
    pub hamiltonian: DrivenHamiltonian,
}

pub fn build_floquet_hamiltonian(
    e: f64,
    p: &ThreeLevelParams,
    xi: &XiConfig,
) -> Result<FloquetHamiltonian> {
    let delta = XiEvaluator::new(*xi)?.eval(e)?.value;
    Ok(FloquetHamiltonian {
        e,
        delta,
        hamiltonian: floquet_hamiltonian_with_delta(delta, p),
    })
}

struct PointEvaluator {
    cfg: ScanConfig,
    params: ThreeLevelParams,
    ideal: ComplexMatrix,
    xi: XiEvaluator,
}

impl PointEvaluator {
    fn new(cfg: &ScanConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            params: cfg.params()?,
            ideal: closed_form_g1(cfg.theta, cfg.vartheta),
            xi: XiEvaluator::new(cfg.xi)?,
        })
    }

    fn delta(&self, e: f64) -> Result<f64> {
        match self.cfg.delta_override {
            Some(d) => Ok(d),
            None => Ok(self.xi.eval(e)?.value),
        }
    }

    /// Record without the zero flag.
    fn record(&self, e: f64) -> ScanRecord {
        let delta = match self.delta(e) {
            Ok(d) => d,
            Err(err) => return ScanRecord::failed(e, f64::NAN, &err),
        };
        match self.measure(delta) {
            Ok((cyc, gate, g2)) => ScanRecord {
                e,
                delta,
                cyc_residual: cyc,
                gate_distance: gate,
                g2_phase: g2,
                zero_flag: false,
                status: if cyc <= self.cfg.cyc_tol {
                    "ok"
                } else {
                    "not_cyclic"
                }
                .into(),
            },
            Err(err) => ScanRecord::failed(e, delta, &err),
        }
    }

    fn measure(&self, delta: f64) -> Result<(f64, f64, f64)> {
        let h = floquet_hamiltonian_with_delta(delta, &self.params);
        let s = self.params.spectral(self.cfg.lambda1, self.cfg.lambda2)?;
        let run = compute_nogp(&h, &s, self.cfg.steps)?;
        let cyc = cyclicity_residual(&run.propagator, &s)?;
        let gate = self
            .cfg
            .distance
            .measure(&run.result.blocks[0], &self.ideal);
        let g2 = run.result.blocks[1][(0, 0)].arg().rem_euclid(2.0 * PI);
        Ok((cyc, gate, g2))
    }
}

fn flag_zeros(records: &mut [ScanRecord], cfg: &ScanConfig) {
    let key = |r: &ScanRecord| {
        if r.gate_distance.is_nan() {
            f64::INFINITY
        } else {
            r.gate_distance
        }
    };
    let n = records.len();
    let flags: Vec<bool> = (0..n)
        .map(|k| {
            let r = &records[k];
            k > 0
                && k + 1 < n
                && r.cyc_residual <= cfg.cyc_tol
                && r.gate_distance <= cfg.gate_tol
                && key(r) < key(&records[k - 1])
                && key(r) < key(&records[k + 1])
        })
        .collect();
    for (r, f) in records.iter_mut().zip(flags) {
        r.zero_flag = f;
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| NogpError::InvalidParameter(format!("worker pool: {e}")))
}

/// Scans the energy grid; records come back sorted by `E`.
///
/// A point is flagged when it is within both thresholds and its gate
/// distance is a strict local minimum against both grid neighbours.
pub fn scan(cfg: &ScanConfig) -> Result<Vec<ScanRecord>> {
    let ev = PointEvaluator::new(cfg)?;
    let es = scan_grid(cfg.e_min, cfg.e_max, cfg.e_step);
    let mut records: Vec<ScanRecord> =
        pool(cfg.workers)?.install(|| es.par_iter().map(|&e| ev.record(e)).collect());
    records.sort_by(|a, b| a.e.total_cmp(&b.e));
    flag_zeros(&mut records, cfg);
    Ok(records)
}

/// Gate distance at a point between two neighbouring zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidpointDip {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(with = "nan_as_null")]
    pub gate_distance: f64,
    /// Midpoint gate distance over the gate distance at the root.
    #[serde(with = "nan_as_null")]
    pub ratio: f64,
}

/// A sign-change root of `xi` with the gate evaluated on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSummary {
    pub bracket: ZeroBracket,
    pub record: ScanRecord,
    /// Energies of flagged scan rows lying in the bracket's grid cell.
    pub flagged: Vec<f64>,
    pub midpoints: Vec<MidpointDip>,
}

impl ZeroSummary {
    /// Smallest midpoint ratio, `None` for an isolated zero.
    pub fn dip_ratio(&self) -> Option<f64> {
        self.midpoints
            .iter()
            .map(|m| m.ratio)
            .min_by(|a, b| a.total_cmp(b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub cyc_tol: f64,
    pub gate_tol: f64,
    pub root_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub generator: String,
    pub version: String,
    pub config: ScanConfig,
    pub tolerances: Tolerances,
    pub flag_rule: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub metadata: ScanMetadata,
    pub records: Vec<ScanRecord>,
    pub zeros: Vec<ZeroSummary>,
}

impl ScanReport {
    /// Maximal runs of consecutive flagged rows, as `(first E, last E)`.
    pub fn flag_clusters(&self) -> Vec<(f64, f64)> {
        flag_clusters(&self.records)
    }
}

pub fn flag_clusters(records: &[ScanRecord]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut prev = false;
    for r in records {
        if r.zero_flag {
            match (prev, out.last_mut()) {
                (true, Some(last)) => last.1 = r.e,
                _ => out.push((r.e, r.e)),
            }
        }
        prev = r.zero_flag;
    }
    out
}

pub fn metadata(cfg: &ScanConfig) -> ScanMetadata {
    ScanMetadata {
        generator: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        tolerances: Tolerances {
            cyc_tol: cfg.cyc_tol,
            gate_tol: cfg.gate_tol,
            root_tol: cfg.root_tol,
        },
        flag_rule: "cyc_residual <= cyc_tol and gate_distance <= gate_tol and gate_distance \
                    is a strict local minimum among grid neighbours"
            .into(),
    }
}

/// Scan plus the `xi` sign-change roots on the same grid, each evaluated at
/// the refined root and at the midpoints to its neighbouring roots.
pub fn scan_report(cfg: &ScanConfig) -> Result<ScanReport> {
    let records = scan(cfg)?;
    let zeros = if cfg.delta_override.is_some() || records.is_empty() {
        Vec::new()
    } else {
        let ev = PointEvaluator::new(cfg)?;
        let brackets = find_zeros(cfg.e_min, cfg.e_max, cfg.e_step, cfg.root_tol, &cfg.xi)?.roots;
        let roots: Vec<f64> = brackets.iter().map(|b| b.root).collect();
        let mids: Vec<f64> = roots.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let points: Vec<f64> = roots.iter().chain(&mids).copied().collect();
        let evaluated: Vec<ScanRecord> =
            pool(cfg.workers)?.install(|| points.par_iter().map(|&e| ev.record(e)).collect());
        let (at_roots, at_mids) = evaluated.split_at(roots.len());
        brackets
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let record = at_roots[k].clone();
                let dip = |m: &ScanRecord| MidpointDip {
                    e: m.e,
                    gate_distance: m.gate_distance,
                    ratio: m.gate_distance / record.gate_distance,
                };
                let mut midpoints = Vec::new();
                if k > 0 {
                    midpoints.push(dip(&at_mids[k - 1]));
                }
                if k < at_mids.len() {
                    midpoints.push(dip(&at_mids[k]));
                }
                ZeroSummary {
                    bracket: *b,
                    flagged: records
                        .iter()
                        .filter(|r| r.zero_flag && r.e >= b.grid_lo && r.e <= b.grid_hi)
                        .map(|r| r.e)
                        .collect(),
                    record,
                    midpoints,
                }
            })
            .collect()
    };
    Ok(ScanReport {
        metadata: metadata(cfg),
        records,
        zeros,
    })
}

pub const CSV_HEADER: &str = "E,delta,cyc_residual,gate_distance,g2_phase,zero_flag,status";

/// CSV text: header plus one row per record, floats with 17 significant digits.
pub fn to_csv(records: &[ScanRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
            r.e, r.delta, r.cyc_residual, r.gate_distance, r.g2_phase, r.zero_flag, r.status
        ));
    }
    out
}

pub fn from_csv(text: &str) -> Result<Vec<ScanRecord>> {
    let perr = |line: usize, message: String| NogpError::Parse {
        what: format!("csv line {line}"),
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(perr(1, format!("unexpected header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(n, line)| {
            let f: Vec<&str> = line.splitn(7, ',').collect();
            if f.len() != 7 {
                return Err(perr(n + 2, format!("expected 7 fields, got {}", f.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| perr(n + 2, format!("{s:?}: {e}")))
            };
            Ok(ScanRecord {
                e: num(f[0])?,
                delta: num(f[1])?,
                cyc_residual: num(f[2])?,
                gate_distance: num(f[3])?,
                g2_phase: num(f[4])?,
                zero_flag: f[5].parse().map_err(|e| perr(n + 2, format!("{e}")))?,
                status: f[6].to_string(),
            })
        })
        .collect()
}

pub fn to_json(report: &ScanReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| NogpError::Parse {
        what: "json".into(),
        message: e.to_string(),
    })?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ScanReport> {
    serde_json::from_str(text).map_err(|e| NogpError::Parse {
        what: "json".into(),
        message: e.to_string(),
    })
}

/// Writes the report in `format`; CSV carries the records only.
pub fn emit(report: &ScanReport, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(&report.records),
        OutputFormat::Json => to_json(report)?,
    };
    std::fs::write(path, text).map_err(|e| NogpError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(e: f64, gate: f64) -> ScanRecord {
        ScanRecord {
            e,
            delta: 0.0,
            cyc_residual: 0.0,
            gate_distance: gate,
            g2_phase: PI,
            zero_flag: false,
            status: "ok".into(),
        }
    }

    #[test]
    fn local_minimum_rule() {
        let cfg = ScanConfig::default();
        let mut r = vec![
            rec(0.0, 1e-5),
            rec(1.0, 2e-4),
            rec(2.0, 1e-4),
            rec(3.0, 5e-4),
            rec(4.0, 1e-2),
            rec(5.0, 2e-2),
        ];
        flag_zeros(&mut r, &cfg);
        let flags: Vec<bool> = r.iter().map(|x| x.zero_flag).collect();
        assert_eq!(flags, [false, false, true, false, false, false]);
        assert_eq!(flag_clusters(&r), vec![(2.0, 2.0)]);
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("# comment\n e-min = 1.5\n\npulse=sin2\n").unwrap();
        let mut cfg = ScanConfig::default();
        for (k, v) in &kv {
            cfg.set(k, v).unwrap();
        }
        assert_eq!(cfg.e_min, 1.5);
        assert_eq!(cfg.pulse, Pulse::Sin2);
        assert!(parse_key_values("novalue").is_err());
        assert!(cfg.set("bogus", "1").is_err());
        assert!(cfg.set("steps", "x").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut r = rec(14.0, 1.0 / 3.0);
        r.delta = -2.0e-7;
        r.cyc_residual = f64::NAN;
        let text = to_csv(std::slice::from_ref(&r));
        let back = from_csv(&text).unwrap();
        assert_eq!(back[0].gate_distance.to_bits(), r.gate_distance.to_bits());
        assert_eq!(back[0].delta.to_bits(), r.delta.to_bits());
        assert!(back[0].cyc_residual.is_nan());
        assert_eq!(to_csv(&back), text);
        assert_eq!(to_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn empty_range() {
        let cfg = ScanConfig {
            e_min: 12.0,
            e_max: 12.0,
            ..ScanConfig::default()
        };
        assert!(scan(&cfg).unwrap().is_empty());
    }

    #[test]
    fn phase_quotient_ignores_global_phase() {
        let g = closed_form_g1(0.4, 1.1);
        let rotated = &g * C64::from_polar(1.0, 0.7);
        assert!(GateDistance::PhaseQuotient.measure(&rotated, &g) < 1e-14);
        assert!(GateDistance::MaxAbs.measure(&rotated, &g) > 0.1);
    }
}
