//! Flat sectioned key/value configuration documents.
//!
//! Sections: `[system]`, `[protocol]`, `[grids]`, `[battery]`, `[sampling]`,
//! `[output]`. Energies are in natural units. Validation collects every
//! violated field before failing so one round trip fixes a whole document.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bridge::default_eta_grid;
use crate::divergences::AlphaValue;
use crate::dynamics::{Drive, Segment, UnitaryOperator};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::operators::HermitianOperator;

use super::models::default_battery;

#[derive(Debug, Clone)]
pub enum SystemModel {
    QubitFlip {
        gap: f64,
    },
    QubitDrive {
        gap: f64,
        amplitude: f64,
        duration: f64,
    },
    UniformShift {
        levels: Vec<f64>,
        shift: f64,
    },
    IsingQuench {
        n_sites: usize,
        coupling: f64,
        field_initial: f64,
        field_final: f64,
    },
    Custom {
        h0: HermitianOperator,
        htau: HermitianOperator,
        drive: Drive,
    },
}

impl SystemModel {
    pub fn name(&self) -> &'static str {
        match self {
            SystemModel::QubitFlip { .. } => "qubit-flip",
            SystemModel::QubitDrive { .. } => "qubit-drive",
            SystemModel::UniformShift { .. } => "uniform-shift",
            SystemModel::IsingQuench { .. } => "ising-quench",
            SystemModel::Custom { .. } => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BatteryConfig {
    pub dim_b: usize,
    pub delta: f64,
    pub j0: usize,
    pub margin: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SamplingConfig {
    pub n_samples: usize,
    pub n_copies: usize,
    pub eps: f64,
    pub seed: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub path: String,
    pub format: OutputFormat,
}

/// Fully validated scenario description with every default filled in.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub beta: f64,
    pub system: SystemModel,
    pub eta_grid: Vec<f64>,
    pub alpha_grid: Vec<AlphaValue>,
    pub battery: Option<BatteryConfig>,
    pub sampling: Option<SamplingConfig>,
    pub output: OutputConfig,
}

/// Parse result: the validated configuration plus non-fatal warnings
/// (unknown keys outside strict mode, ignored parameters).
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub config: ScenarioConfig,
    pub warnings: Vec<String>,
}

const SECTIONS: [&str; 6] = [
    "system", "protocol", "grids", "battery", "sampling", "output",
];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "system" => &[
            "model",
            "name",
            "beta",
            "gap",
            "levels",
            "shift",
            "n_sites",
            "coupling",
            "field_initial",
            "field_final",
            "h0",
            "htau",
        ],
        "protocol" => &["drive", "u", "amplitude", "duration"],
        "grids" => &["eta_grid", "alpha_grid"],
        "battery" => &["enabled", "dim_b", "delta", "j0", "margin"],
        "sampling" => &["enabled", "n_samples", "n_copies", "eps", "seed", "trials"],
        "output" => &["path", "format"],
        _ => &[],
    }
}

fn is_segment_key(key: &str) -> bool {
    key.strip_prefix("segment_")
        .and_then(|rest| rest.split_once('_'))
        .map(|(idx, field)| idx.parse::<usize>().is_ok() && (field == "h" || field == "dt"))
        .unwrap_or(false)
}

struct Document {
    // (section, key) -> (value, line number)
    entries: BTreeMap<(String, String), (String, usize)>,
}

impl Document {
    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&(section.to_owned(), key.to_owned()))
            .map(|(v, _)| v.as_str())
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == section)
    }
}

fn tokenize(text: &str, strict: bool) -> Result<(Document, Vec<String>)> {
    let mut entries = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut violations = Vec::new();
    let mut section: Option<String> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            match stripped.strip_suffix(']') {
                Some(name) => {
                    let name = name.trim().to_lowercase();
                    if SECTIONS.contains(&name.as_str()) {
                        section = Some(name);
                    } else {
                        let msg = format!("line {line_no}: unknown section [{name}]");
                        if strict {
                            violations.push(msg);
                        } else {
                            warnings.push(msg);
                        }
                        section = Some(name); // keep parsing; its keys are skipped below
                    }
                }
                None => violations.push(format!("line {line_no}: malformed section header")),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {line_no}: expected 'key = value'"));
            continue;
        };
        let key = key.trim().to_lowercase();
        let value = value.trim().to_owned();
        let Some(section_name) = section.clone() else {
            violations.push(format!("line {line_no}: key '{key}' outside any section"));
            continue;
        };
        let known = SECTIONS.contains(&section_name.as_str())
            && (known_keys(&section_name).contains(&key.as_str())
                || (section_name == "protocol" && is_segment_key(&key)));
        if !known {
            let msg = format!("line {line_no}: unknown key '{key}' in section [{section_name}]");
            if strict {
                violations.push(msg);
            } else {
                warnings.push(msg);
                continue;
            }
        }
        if entries
            .insert((section_name.clone(), key.clone()), (value, line_no))
            .is_some()
        {
            violations.push(format!(
                "line {line_no}: duplicate key '{key}' in section [{section_name}]"
            ));
        }
    }
    if violations.is_empty() {
        Ok((Document { entries }, warnings))
    } else {
        Err(Error::Config(violations.join("; ")))
    }
}

/// Accumulates field violations so the final error lists all of them.
struct Validator {
    violations: Vec<String>,
}

impl Validator {
    fn new() -> Self {
        Validator {
            violations: Vec::new(),
        }
    }

    fn push(&mut self, field: &str, message: impl std::fmt::Display) {
        self.violations.push(format!("{field}: {message}"));
    }

    fn finish(self) -> Result<()> {
        if self.violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(self.violations.join("; ")))
        }
    }
}

fn parse_f64(doc: &Document, section: &str, key: &str, default: f64, v: &mut Validator) -> f64 {
    match doc.get(section, key) {
        None => default,
        Some(text) => match text.parse::<f64>() {
            Ok(x) if x.is_finite() => x,
            _ => {
                v.push(key, format!("not a finite number: '{text}'"));
                default
            }
        },
    }
}

fn parse_usize(
    doc: &Document,
    section: &str,
    key: &str,
    default: usize,
    v: &mut Validator,
) -> usize {
    match doc.get(section, key) {
        None => default,
        Some(text) => match text.parse::<usize>() {
            Ok(x) => x,
            Err(_) => {
                v.push(key, format!("not a nonnegative integer: '{text}'"));
                default
            }
        },
    }
}

fn parse_bool(doc: &Document, section: &str, key: &str, default: bool, v: &mut Validator) -> bool {
    match doc.get(section, key) {
        None => default,
        Some("true") | Some("yes") | Some("1") => true,
        Some("false") | Some("no") | Some("0") => false,
        Some(text) => {
            v.push(key, format!("not a boolean: '{text}'"));
            default
        }
    }
}

fn parse_f64_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<f64>()
                .map_err(|_| format!("not a number: '{part}'"))
                .and_then(|x| {
                    if x.is_finite() {
                        Ok(x)
                    } else {
                        Err(format!("not finite: '{part}'"))
                    }
                })
        })
        .collect()
}

/// Complex scalar: `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i`.
fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty entry".to_owned());
    }
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Err(format!("not a complex literal: '{text}'"));
    };
    // Split body into real part and imaginary coefficient on the last +/-
    // that is not an exponent sign.
    let chars: Vec<char> = body.chars().collect();
    let mut split = None;
    for k in (1..chars.len()).rev() {
        if (chars[k] == '+' || chars[k] == '-') && chars[k - 1] != 'e' && chars[k - 1] != 'E' {
            split = Some(k);
            break;
        }
    }
    let (re_text, im_text) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_text.is_empty() {
        0.0
    } else {
        re_text
            .parse::<f64>()
            .map_err(|_| format!("bad real part in '{text}'"))?
    };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other
            .parse::<f64>()
            .map_err(|_| format!("bad imaginary part in '{text}'"))?,
    };
    Ok(Complex64::new(re, im))
}

/// Square matrix: rows separated by ';', entries by ','.
fn parse_matrix(text: &str) -> std::result::Result<CMat, String> {
    let rows: Vec<Vec<Complex64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(parse_complex)
                .collect::<std::result::Result<Vec<_>, _>>()
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err("matrix must be square (rows ';'-separated, entries ','-separated)".to_owned());
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

fn parse_hermitian(doc: &Document, key: &str, v: &mut Validator) -> Option<HermitianOperator> {
    let text = match doc.get("system", key) {
        Some(t) => t,
        None => {
            v.push(key, "required for the custom model");
            return None;
        }
    };
    let m = match parse_matrix(text) {
        Ok(m) => m,
        Err(e) => {
            v.push(key, e);
            return None;
        }
    };
    match HermitianOperator::new(m) {
        Ok(h) => Some(h),
        Err(e) => {
            v.push(key, e);
            None
        }
    }
}

fn parse_custom_drive(doc: &Document, dim: usize, v: &mut Validator) -> Option<Drive> {
    let kind = doc.get("protocol", "drive").unwrap_or("quench");
    match kind {
        "quench" => Some(Drive::SuddenQuench),
        "explicit" => {
            let text = match doc.get("protocol", "u") {
                Some(t) => t,
                None => {
                    v.push("u", "required for drive = explicit");
                    return None;
                }
            };
            let m = match parse_matrix(text) {
                Ok(m) => m,
                Err(e) => {
                    v.push("u", e);
                    return None;
                }
            };
            if m.nrows() != dim {
                v.push("u", format!("dimension {} does not match h0", m.nrows()));
                return None;
            }
            match UnitaryOperator::new(m) {
                Ok(u) => Some(Drive::Explicit(u)),
                Err(e) => {
                    v.push("u", e);
                    None
                }
            }
        }
        "piecewise" => {
            let mut segments = Vec::new();
            let mut k = 1usize;
            loop {
                let h_key = format!("segment_{k}_h");
                let dt_key = format!("segment_{k}_dt");
                let (h_text, dt_text) =
                    match (doc.get("protocol", &h_key), doc.get("protocol", &dt_key)) {
                        (None, None) => break,
                        (Some(h), Some(dt)) => (h, dt),
                        _ => {
                            v.push(&h_key, "segment needs both _h and _dt");
                            return None;
                        }
                    };
                let m = match parse_matrix(h_text) {
                    Ok(m) => m,
                    Err(e) => {
                        v.push(&h_key, e);
                        return None;
                    }
                };
                let h = match HermitianOperator::new(m) {
                    Ok(h) => h,
                    Err(e) => {
                        v.push(&h_key, e);
                        return None;
                    }
                };
                let duration = match dt_text.parse::<f64>() {
                    Ok(x) if x.is_finite() && x >= 0.0 => x,
                    _ => {
                        v.push(&dt_key, format!("not a nonnegative duration: '{dt_text}'"));
                        return None;
                    }
                };
                segments.push(Segment {
                    hamiltonian: h,
                    duration,
                });
                k += 1;
            }
            if segments.is_empty() {
                v.push("drive", "piecewise drive needs segment_1_h / segment_1_dt");
                return None;
            }
            Some(Drive::Piecewise(segments))
        }
        other => {
            v.push(
                "drive",
                format!("unknown drive '{other}' (explicit|piecewise|quench)"),
            );
            None
        }
    }
}

/// Parses and validates a configuration document.
///
/// In strict mode unknown sections and keys are errors; otherwise they are
/// collected as warnings. All violated fields are reported together.
pub fn parse_config(text: &str, strict: bool) -> Result<ParsedConfig> {
    let (doc, mut warnings) = tokenize(text, strict)?;
    let mut v = Validator::new();

    let model_name = doc.get("system", "model").unwrap_or("");
    if model_name.is_empty() {
        v.push("model", "missing required key in [system]");
    }

    let beta = parse_f64(&doc, "system", "beta", 1.0, &mut v);
    if beta <= 0.0 || beta.is_nan() {
        v.push("beta", format!("must be positive, got {beta}"));
    }

    let system = match model_name {
        "qubit-flip" | "qubit-drive" => {
            let gap = parse_f64(&doc, "system", "gap", 1.0, &mut v);
            if gap <= 0.0 || gap.is_nan() {
                v.push("gap", format!("must be positive, got {gap}"));
            }
            if model_name == "qubit-flip" {
                Some(SystemModel::QubitFlip { gap })
            } else {
                let amplitude = parse_f64(&doc, "protocol", "amplitude", 1.5, &mut v);
                let duration = parse_f64(&doc, "protocol", "duration", 0.7, &mut v);
                if duration < 0.0 || duration.is_nan() {
                    v.push("duration", format!("must be nonnegative, got {duration}"));
                }
                Some(SystemModel::QubitDrive {
                    gap,
                    amplitude,
                    duration,
                })
            }
        }
        "uniform-shift" => {
            let levels = match doc.get("system", "levels") {
                None => vec![0.0, 1.0],
                Some(text) => match parse_f64_list(text) {
                    Ok(l) if !l.is_empty() => l,
                    Ok(_) => {
                        v.push("levels", "must not be empty");
                        vec![0.0, 1.0]
                    }
                    Err(e) => {
                        v.push("levels", e);
                        vec![0.0, 1.0]
                    }
                },
            };
            let shift = parse_f64(&doc, "system", "shift", 0.5, &mut v);
            Some(SystemModel::UniformShift { levels, shift })
        }
        "ising-quench" => {
            let n_sites = parse_usize(&doc, "system", "n_sites", 4, &mut v);
            if !(1..=8).contains(&n_sites) {
                v.push("n_sites", format!("must be in 1..=8, got {n_sites}"));
            }
            Some(SystemModel::IsingQuench {
                n_sites: n_sites.clamp(1, 8),
                coupling: parse_f64(&doc, "system", "coupling", 1.0, &mut v),
                field_initial: parse_f64(&doc, "system", "field_initial", 1.0, &mut v),
                field_final: parse_f64(&doc, "system", "field_final", 0.5, &mut v),
            })
        }
        "custom" => {
            let h0 = parse_hermitian(&doc, "h0", &mut v);
            let htau = parse_hermitian(&doc, "htau", &mut v);
            match (h0, htau) {
                (Some(h0), Some(htau)) => {
                    if h0.dim() != htau.dim() {
                        v.push(
                            "htau",
                            format!("dimension {} does not match h0 ({})", htau.dim(), h0.dim()),
                        );
                        None
                    } else {
                        parse_custom_drive(&doc, h0.dim(), &mut v)
                            .map(|drive| SystemModel::Custom { h0, htau, drive })
                    }
                }
                _ => None,
            }
        }
        "" => None,
        other => {
            v.push("model", format!("unknown model '{other}'"));
            None
        }
    };

    let name = doc
        .get("system", "name")
        .map(str::to_owned)
        .unwrap_or_else(|| {
            if model_name.is_empty() {
                "scenario".to_owned()
            } else {
                model_name.to_owned()
            }
        });

    let eta_grid = match doc.get("grids", "eta_grid") {
        None => default_eta_grid(beta),
        Some(text) => match parse_f64_list(text) {
            Ok(grid) if !grid.is_empty() => {
                for &eta in &grid {
                    if eta == 0.0 {
                        v.push("eta_grid", "must exclude 0");
                    }
                    if eta == beta {
                        v.push("eta_grid", format!("must exclude beta = {beta}"));
                    }
                }
                grid
            }
            Ok(_) => {
                v.push("eta_grid", "must not be empty");
                default_eta_grid(beta)
            }
            Err(e) => {
                v.push("eta_grid", e);
                default_eta_grid(beta)
            }
        },
    };

    let alpha_grid = match doc.get("grids", "alpha_grid") {
        None => default_alpha_grid(),
        Some(text) => {
            let mut grid = Vec::new();
            let mut ok = true;
            for part in text.split(',') {
                let part = part.trim();
                let alpha = if part.eq_ignore_ascii_case("inf") {
                    Ok(AlphaValue::Infinity)
                } else {
                    part.parse::<f64>()
                        .map_err(|_| ())
                        .and_then(|x| AlphaValue::new(x).map_err(|_| ()))
                };
                match alpha {
                    Ok(a) => grid.push(a),
                    Err(_) => {
                        v.push("alpha_grid", format!("bad order '{part}'"));
                        ok = false;
                    }
                }
            }
            if ok && !grid.is_empty() {
                for (required, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1"), (2.0, "2")] {
                    if !grid.iter().any(|a| (a.value() - required).abs() < 1e-12) {
                        v.push("alpha_grid", format!("must include {label}"));
                    }
                }
                if !grid.iter().any(|a| a.is_infinite()) {
                    v.push("alpha_grid", "must include inf");
                }
                grid
            } else {
                default_alpha_grid()
            }
        }
    };

    let battery = if doc.has_section("battery") {
        if parse_bool(&doc, "battery", "enabled", true, &mut v) {
            let defaults = system
                .as_ref()
                .and_then(default_battery)
                .unwrap_or(BatteryConfig {
                    dim_b: 9,
                    delta: 1.0,
                    j0: 4,
                    margin: 1,
                });
            let dim_b = parse_usize(&doc, "battery", "dim_b", defaults.dim_b, &mut v);
            let delta = parse_f64(&doc, "battery", "delta", defaults.delta, &mut v);
            let j0 = parse_usize(&doc, "battery", "j0", defaults.j0, &mut v);
            let margin = parse_usize(&doc, "battery", "margin", defaults.margin, &mut v);
            if dim_b == 0 {
                v.push("dim_b", "must be at least 1");
            }
            if delta <= 0.0 || delta.is_nan() {
                v.push("delta", format!("must be positive, got {delta}"));
            }
            if j0 >= dim_b.max(1) {
                v.push("j0", format!("must be below dim_b = {dim_b}"));
            }
            Some(BatteryConfig {
                dim_b,
                delta,
                j0,
                margin,
            })
        } else {
            None
        }
    } else {
        system.as_ref().and_then(default_battery)
    };

    let sampling =
        if doc.has_section("sampling") && !parse_bool(&doc, "sampling", "enabled", true, &mut v) {
            None
        } else {
            let eps = parse_f64(&doc, "sampling", "eps", 0.1, &mut v);
            if eps.is_nan() || eps <= 0.0 || eps >= 1.0 {
                v.push("eps", format!("must lie in (0,1), got {eps}"));
            }
            let n_samples = parse_usize(&doc, "sampling", "n_samples", 100_000, &mut v);
            let n_copies = parse_usize(&doc, "sampling", "n_copies", 100, &mut v);
            let trials = parse_usize(&doc, "sampling", "trials", 10_000, &mut v);
            for (key, value) in [
                ("n_samples", n_samples),
                ("n_copies", n_copies),
                ("trials", trials),
            ] {
                if value == 0 {
                    v.push(key, "must be at least 1");
                }
            }
            let seed = match doc.get("sampling", "seed") {
                None => 42,
                Some(text) => match text.parse::<u64>() {
                    Ok(s) => s,
                    Err(_) => {
                        v.push("seed", format!("not an unsigned integer: '{text}'"));
                        42
                    }
                },
            };
            Some(SamplingConfig {
                n_samples,
                n_copies,
                eps,
                seed,
                trials,
            })
        };

    let format = match doc.get("output", "format") {
        None => OutputFormat::Json,
        Some("json") => OutputFormat::Json,
        Some("csv") => OutputFormat::Csv,
        Some(other) => {
            v.push("format", format!("unknown format '{other}' (csv|json)"));
            OutputFormat::Json
        }
    };
    let output = OutputConfig {
        path: doc.get("output", "path").unwrap_or("qwork-out").to_owned(),
        format,
    };

    if doc.has_section("protocol")
        && !matches!(
            system,
            Some(SystemModel::Custom { .. }) | Some(SystemModel::QubitDrive { .. }) | None
        )
    {
        warnings.push(format!(
            "[protocol] section is ignored by the '{model_name}' model"
        ));
    }

    v.finish()?;
    let system = system.ok_or_else(|| Error::Config("model: could not be built".to_owned()))?;

    let config = ScenarioConfig {
        name,
        beta,
        system,
        eta_grid,
        alpha_grid,
        battery,
        sampling,
        output,
    };
    // The protocol must actually assemble (dimensions line up, piecewise
    // segments match the endpoints) for the document to count as valid.
    if let Err(e) = super::models::build_protocol(&config) {
        return Err(Error::Config(format!("protocol: {e}")));
    }

    Ok(ParsedConfig { config, warnings })
}

pub(crate) fn default_alpha_grid() -> Vec<AlphaValue> {
    [0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0]
        .iter()
        .map(|&a| AlphaValue::new(a).expect("nonnegative order"))
        .chain([AlphaValue::Infinity])
        .collect()
}

/// Deterministic key/value echo of a configuration for reports.
pub(crate) fn config_echo(cfg: &ScenarioConfig) -> Vec<(String, String)> {
    let mut pairs = vec![
        ("name".to_owned(), cfg.name.clone()),
        ("model".to_owned(), cfg.system.name().to_owned()),
        ("beta".to_owned(), format!("{}", cfg.beta)),
    ];
    match &cfg.system {
        SystemModel::QubitFlip { gap } => pairs.push(("gap".to_owned(), format!("{gap}"))),
        SystemModel::QubitDrive {
            gap,
            amplitude,
            duration,
        } => {
            pairs.push(("gap".to_owned(), format!("{gap}")));
            pairs.push(("amplitude".to_owned(), format!("{amplitude}")));
            pairs.push(("duration".to_owned(), format!("{duration}")));
        }
        SystemModel::UniformShift { levels, shift } => {
            let levels_text = levels
                .iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",");
            pairs.push(("levels".to_owned(), levels_text));
            pairs.push(("shift".to_owned(), format!("{shift}")));
        }
        SystemModel::IsingQuench {
            n_sites,
            coupling,
            field_initial,
            field_final,
        } => {
            pairs.push(("n_sites".to_owned(), format!("{n_sites}")));
            pairs.push(("coupling".to_owned(), format!("{coupling}")));
            pairs.push(("field_initial".to_owned(), format!("{field_initial}")));
            pairs.push(("field_final".to_owned(), format!("{field_final}")));
        }
        SystemModel::Custom { h0, .. } => {
            pairs.push(("dim".to_owned(), format!("{}", h0.dim())));
        }
    }
    let eta_text = cfg
        .eta_grid
        .iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join(",");
    pairs.push(("eta_grid".to_owned(), eta_text));
    let alpha_text = cfg
        .alpha_grid
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",");
    pairs.push(("alpha_grid".to_owned(), alpha_text));
    if let Some(b) = &cfg.battery {
        pairs.push((
            "battery".to_owned(),
            format!(
                "dim_b={},delta={},j0={},margin={}",
                b.dim_b, b.delta, b.j0, b.margin
            ),
        ));
    }
    if let Some(s) = &cfg.sampling {
        pairs.push((
            "sampling".to_owned(),
            format!(
                "n_samples={},n_copies={},eps={},seed={},trials={}",
                s.n_samples, s.n_copies, s.eps, s.seed, s.trials
            ),
        ));
    }
    pairs.push((
        "output_format".to_owned(),
        cfg.output.format.as_str().to_owned(),
    ));
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_fills_defaults() {
        let parsed = parse_config("[system]\nmodel = qubit-flip\n", true).unwrap();
        let cfg = parsed.config;
        assert_eq!(cfg.name, "qubit-flip");
        assert_eq!(cfg.beta, 1.0);
        assert_eq!(cfg.eta_grid.len(), 24);
        assert_eq!(cfg.alpha_grid.len(), 10);
        assert!(cfg.battery.is_some());
        assert!(cfg.sampling.is_some());
        assert!(matches!(cfg.system, SystemModel::QubitFlip { gap } if gap == 1.0));
    }

    #[test]
    fn negative_beta_names_the_field() {
        let err = parse_config("[system]\nmodel = qubit-flip\nbeta = -1\n", true).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("beta"), "{msg}");
    }

    #[test]
    fn non_hermitian_custom_matrix_reports_asymmetry() {
        let doc =
            "[system]\nmodel = custom\nh0 = 0,1,0; 0,0,0; 0,0,1\nhtau = 0,0,0; 0,1,0; 0,0,1\n";
        let err = parse_config(doc, true).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("h0"), "{msg}");
        assert!(msg.contains("asymmetry"), "{msg}");
    }

    #[test]
    fn unknown_keys_error_only_in_strict_mode() {
        let doc = "[system]\nmodel = qubit-flip\nbogus = 1\n";
        assert!(parse_config(doc, true).is_err());
        let parsed = parse_config(doc, false).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].contains("bogus"));
    }

    #[test]
    fn violations_are_aggregated() {
        let doc = "[system]\nmodel = qubit-flip\nbeta = -2\ngap = -1\n[sampling]\neps = 3\n";
        let err = parse_config(doc, true).unwrap_err();
        let msg = err.to_string();
        for field in ["beta", "gap", "eps"] {
            assert!(msg.contains(field), "missing {field} in: {msg}");
        }
    }

    #[test]
    fn custom_model_with_explicit_drive() {
        let doc = "\
[system]
model = custom
h0 = 0,0; 0,1
htau = 0,0; 0,1
[protocol]
drive = explicit
u = 0,1; 1,0
";
        let cfg = parse_config(doc, true).unwrap().config;
        match cfg.system {
            SystemModel::Custom { h0, drive, .. } => {
                assert_eq!(h0.dim(), 2);
                assert!(matches!(drive, Drive::Explicit(_)));
            }
            other => panic!("unexpected model {other:?}"),
        }
    }

    #[test]
    fn complex_entries_parse() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("1-2i").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(
            parse_complex("1e-3+2e-4i").unwrap(),
            Complex64::new(1e-3, 2e-4)
        );
        assert!(parse_complex("chaos").is_err());
    }

    #[test]
    fn eta_grid_must_avoid_limit_points() {
        let doc = "[system]\nmodel = qubit-flip\n[grids]\neta_grid = 0.5, 1.0\n";
        let err = parse_config(doc, true).unwrap_err();
        assert!(err.to_string().contains("eta_grid"));
    }

    #[test]
    fn battery_can_be_disabled() {
        let doc = "[system]\nmodel = qubit-flip\n[battery]\nenabled = false\n";
        let cfg = parse_config(doc, true).unwrap().config;
        assert!(cfg.battery.is_none());
    }

    #[test]
    fn custom_piecewise_drive_parses_and_must_match_endpoints() {
        let good = "\
[system]
model = custom
h0 = 0,0; 0,1
htau = 0,0; 0,1
[protocol]
drive = piecewise
segment_1_h = 0,0; 0,1
segment_1_dt = 0.3
segment_2_h = 0,0.5; 0.5,1
segment_2_dt = 0.4
segment_3_h = 0,0; 0,1
segment_3_dt = 0.3
";
        let cfg = parse_config(good, true).unwrap().config;
        match &cfg.system {
            SystemModel::Custom { drive, .. } => {
                assert!(matches!(drive, Drive::Piecewise(s) if s.len() == 3));
            }
            other => panic!("unexpected model {other:?}"),
        }

        // First segment must equal the initial Hamiltonian.
        let bad = "\
[system]
model = custom
h0 = 0,0; 0,1
htau = 0,0; 0,1
[protocol]
drive = piecewise
segment_1_h = 0,0.5; 0.5,1
segment_1_dt = 0.3
segment_2_h = 0,0; 0,1
segment_2_dt = 0.3
";
        let err = parse_config(bad, true).unwrap_err();
        assert!(err.to_string().contains("protocol"), "{err}");
    }

    #[test]
    fn ising_has_no_default_battery() {
        let cfg = parse_config("[system]\nmodel = ising-quench\n", true)
            .unwrap()
            .config;
        assert!(cfg.battery.is_none());
    }
}
