//! Machine-readable run reports.
//!
//! The JSON writer is deliberately hand-rolled: key order follows struct
//! order, floats are printed with 17 significant digits, and the wall-clock
//! metadata sits in one final `meta` subsection, so two runs with the same
//! configuration and seed produce byte-identical output up to that
//! subsection.

use std::fmt::Write as _;

use crate::bridge::BridgeReport;
use crate::divergences::AlphaValue;
use crate::workstats::WorkDistribution;

use super::config::ScenarioConfig;
use super::runner::Check;

/// 17 significant digits; `inf`/`nan` become JSON strings.
fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"nan\"".to_owned()
    } else if x > 0.0 {
        "\"inf\"".to_owned()
    } else {
        "\"-inf\"".to_owned()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// Ordered JSON value; objects keep insertion order.
#[derive(Debug, Clone)]
pub(crate) enum Json {
    Null,
    Bool(bool),
    Num(f64),
    Int(u64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub(crate) fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub(crate) fn push(&mut self, key: &str, value: Json) {
        if let Json::Obj(fields) = self {
            fields.push((key.to_owned(), value));
        }
    }

    pub(crate) fn floats(values: &[f64]) -> Json {
        Json::Arr(values.iter().map(|&x| Json::Num(x)).collect())
    }

    pub(crate) fn pairs(values: &[(f64, f64)]) -> Json {
        Json::Arr(
            values
                .iter()
                .map(|&(a, b)| Json::Arr(vec![Json::Num(a), Json::Num(b)]))
                .collect(),
        )
    }

    fn render_into(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        let pad_in = "  ".repeat(indent + 1);
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Num(x) => out.push_str(&fmt_f64(*x)),
            Json::Int(n) => {
                let _ = write!(out, "{n}");
            }
            Json::Str(s) => {
                let _ = write!(out, "\"{}\"", escape(s));
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                // Scalar-only arrays stay on one line.
                let scalar = items
                    .iter()
                    .all(|i| !matches!(i, Json::Obj(_) | Json::Arr(_)));
                if scalar {
                    out.push('[');
                    for (k, item) in items.iter().enumerate() {
                        if k > 0 {
                            out.push_str(", ");
                        }
                        item.render_into(out, indent);
                    }
                    out.push(']');
                } else {
                    out.push_str("[\n");
                    for (k, item) in items.iter().enumerate() {
                        out.push_str(&pad_in);
                        item.render_into(out, indent + 1);
                        if k + 1 < items.len() {
                            out.push(',');
                        }
                        out.push('\n');
                    }
                    out.push_str(&pad);
                    out.push(']');
                }
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (k, (key, value)) in fields.iter().enumerate() {
                    out.push_str(&pad_in);
                    let _ = write!(out, "\"{}\": ", escape(key));
                    value.render_into(out, indent + 1);
                    if k + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&pad);
                out.push('}');
            }
        }
    }

    pub(crate) fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out.push('\n');
        out
    }
}

/// One Chebyshev tail check row.
#[derive(Debug, Clone, Copy)]
pub struct TailCheckRow {
    pub k: f64,
    pub threshold: f64,
    pub bound: f64,
    pub exact_tail: f64,
    pub empirical_tail: f64,
    pub zero_variance: bool,
}

/// Sampling-stage summary.
#[derive(Debug, Clone)]
pub struct SamplingReport {
    pub n_samples: usize,
    pub seed: u64,
    pub empirical_mean: f64,
    pub tail_checks: Vec<TailCheckRow>,
    pub eps: f64,
    pub n_copies: usize,
    pub trials: usize,
    pub eps_work: f64,
    pub exceed_frequency: f64,
    pub exceed_threshold: f64,
    pub formation_work: f64,
}

/// Battery-stage summary.
#[derive(Debug, Clone)]
pub struct BatteryReport {
    pub dim_b: usize,
    pub delta: f64,
    pub j0: usize,
    pub margin: usize,
    pub unitarity: f64,
    pub energy_conservation: f64,
    pub displacement_covariance: f64,
    pub tpm_work_residual: f64,
    pub tpm_prob_residual: f64,
    /// `(eta, identity residual, tilde trace)` per tested point.
    pub cgf_identity: Vec<(f64, f64, f64)>,
    pub cgf_identity_max: f64,
    pub product_final_state: bool,
    pub tilde_reduction_residual: Option<f64>,
    pub pure_battery_residual_max: f64,
}

/// Resource-stage summary.
#[derive(Debug, Clone)]
pub struct ResourceReport {
    pub alpha_grid: Vec<AlphaValue>,
    pub s_alpha: Vec<f64>,
    pub f_alpha: Vec<f64>,
    pub w_det_bound: f64,
    pub s_irr_det_bound: f64,
    pub alpha_star: AlphaValue,
    pub bound_family_match_max: f64,
    pub det_vs_stochastic_slack: f64,
    pub f_alpha_monotonicity_min_step: f64,
}

/// Wall-clock metadata, isolated in the final `meta` subsection.
#[derive(Debug, Clone, Default)]
pub struct MetaReport {
    pub unix_time_s: u64,
    pub total_ms: u64,
    pub bridge_ms: u64,
    pub sampling_ms: u64,
    pub battery_ms: u64,
    pub resource_ms: u64,
}

/// Everything one scenario run produces.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub failed: Option<String>,
    pub config_echo: Vec<(String, String)>,
    pub distribution: Option<WorkDistribution>,
    pub bridge: Option<BridgeReport>,
    pub sampling: Option<SamplingReport>,
    pub battery: Option<BatteryReport>,
    pub resource: Option<ResourceReport>,
    pub checks: Vec<Check>,
    pub meta: MetaReport,
}

impl RunReport {
    pub(crate) fn new(scenario: &str, config_echo: Vec<(String, String)>) -> Self {
        RunReport {
            scenario: scenario.to_owned(),
            failed: None,
            config_echo,
            distribution: None,
            bridge: None,
            sampling: None,
            battery: None,
            resource: None,
            checks: Vec::new(),
            meta: MetaReport::default(),
        }
    }

    /// All hard contracts passed and no stage failed.
    pub fn passed(&self) -> bool {
        self.failed.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut root = Json::obj();
        root.push("scenario", Json::Str(self.scenario.clone()));
        root.push("passed", Json::Bool(self.passed()));
        root.push(
            "failed",
            match &self.failed {
                Some(msg) => Json::Str(msg.clone()),
                None => Json::Null,
            },
        );

        let mut config = Json::obj();
        for (key, value) in &self.config_echo {
            config.push(key, Json::Str(value.clone()));
        }
        root.push("config", config);

        if let Some(d) = &self.distribution {
            let mut dist = Json::obj();
            dist.push(
                "atoms",
                Json::Arr(
                    d.atoms()
                        .iter()
                        .map(|a| Json::Arr(vec![Json::Num(a.work), Json::Num(a.probability)]))
                        .collect(),
                ),
            );
            dist.push("merge_tol", Json::Num(d.merge_tol()));
            root.push("work_distribution", dist);
        } else {
            root.push("work_distribution", Json::Null);
        }

        if let Some(b) = &self.bridge {
            let mut thermo = Json::obj();
            thermo.push("beta", Json::Num(b.pots.beta));
            thermo.push("z0", Json::Num(b.pots.z0));
            thermo.push("ztau", Json::Num(b.pots.ztau));
            thermo.push("f0", Json::Num(b.pots.f0));
            thermo.push("ftau", Json::Num(b.pots.ftau));
            thermo.push("delta_f", Json::Num(b.pots.delta_f));
            root.push("thermo", thermo);

            let mut bridge = Json::obj();
            bridge.push("eta_grid", Json::floats(&b.eta_grid));
            bridge.push("phi_direct", Json::floats(&b.phi_direct));
            bridge.push("phi_fcs", Json::floats(&b.phi_fcs));
            bridge.push("phi_renyi", Json::floats(&b.phi_renyi));
            bridge.push("renyi_values", Json::floats(&b.renyi_values));
            bridge.push("mean_work", Json::Num(b.mean_work));
            bridge.push("var_work", Json::Num(b.var_work));
            bridge.push("s_irr", Json::Num(b.s_irr));
            bridge.push("lower_bounds", Json::pairs(&b.lower_bounds));
            bridge.push("upper_bounds", Json::pairs(&b.upper_bounds));
            bridge.push("irr_bounds", Json::pairs(&b.irr_bounds));

            let mut variance = Json::obj();
            variance.push("direct", Json::Num(b.variance.var_direct));
            variance.push(
                "renyi_derivative",
                Json::Num(b.variance.var_renyi_derivative),
            );
            variance.push(
                "relative_entropy",
                Json::Num(b.variance.var_relative_entropy),
            );
            bridge.push("variance", variance);

            let mut res = Json::obj();
            let r = &b.residuals;
            res.push("cgf_fcs_max", Json::Num(r.cgf_fcs_max));
            res.push("cgf_renyi_max", Json::Num(r.cgf_renyi_max));
            res.push("jarzynski", Json::Num(r.jarzynski));
            res.push("irr_entropy_identity", Json::Num(r.irr_entropy_identity));
            res.push(
                "variance_relative_entropy",
                Json::Num(r.variance_relative_entropy),
            );
            res.push("variance_derivative", Json::Num(r.variance_derivative));
            res.push("lower_bound_min_slack", Json::Num(r.lower_bound_min_slack));
            res.push("upper_bound_min_slack", Json::Num(r.upper_bound_min_slack));
            res.push("irr_bound_min_slack", Json::Num(r.irr_bound_min_slack));
            res.push(
                "renyi_upper_regime_min_slack",
                Json::Num(r.renyi_upper_regime_min_slack),
            );
            res.push("second_law_slack", Json::Num(r.second_law_slack));
            bridge.push("residuals", res);
            root.push("bridge", bridge);
        } else {
            root.push("thermo", Json::Null);
            root.push("bridge", Json::Null);
        }

        match &self.sampling {
            Some(s) => {
                let mut sampling = Json::obj();
                sampling.push("n_samples", Json::Int(s.n_samples as u64));
                sampling.push("seed", Json::Int(s.seed));
                sampling.push("empirical_mean", Json::Num(s.empirical_mean));
                sampling.push(
                    "tail_checks",
                    Json::Arr(
                        s.tail_checks
                            .iter()
                            .map(|t| {
                                let mut row = Json::obj();
                                row.push("k", Json::Num(t.k));
                                row.push("threshold", Json::Num(t.threshold));
                                row.push("bound", Json::Num(t.bound));
                                row.push("exact_tail", Json::Num(t.exact_tail));
                                row.push("empirical_tail", Json::Num(t.empirical_tail));
                                row.push("zero_variance", Json::Bool(t.zero_variance));
                                row
                            })
                            .collect(),
                    ),
                );
                sampling.push("eps", Json::Num(s.eps));
                sampling.push("n_copies", Json::Int(s.n_copies as u64));
                sampling.push("trials", Json::Int(s.trials as u64));
                sampling.push("eps_work", Json::Num(s.eps_work));
                sampling.push("exceed_frequency", Json::Num(s.exceed_frequency));
                sampling.push("exceed_threshold", Json::Num(s.exceed_threshold));
                sampling.push("formation_work", Json::Num(s.formation_work));
                root.push("sampling", sampling);
            }
            None => root.push("sampling", Json::Null),
        }

        match &self.battery {
            Some(b) => {
                let mut battery = Json::obj();
                battery.push("dim_b", Json::Int(b.dim_b as u64));
                battery.push("delta", Json::Num(b.delta));
                battery.push("j0", Json::Int(b.j0 as u64));
                battery.push("margin", Json::Int(b.margin as u64));
                battery.push("unitarity", Json::Num(b.unitarity));
                battery.push("energy_conservation", Json::Num(b.energy_conservation));
                battery.push(
                    "displacement_covariance",
                    Json::Num(b.displacement_covariance),
                );
                battery.push("tpm_work_residual", Json::Num(b.tpm_work_residual));
                battery.push("tpm_prob_residual", Json::Num(b.tpm_prob_residual));
                battery.push(
                    "cgf_identity",
                    Json::Arr(
                        b.cgf_identity
                            .iter()
                            .map(|&(eta, residual, trace)| {
                                Json::Arr(vec![
                                    Json::Num(eta),
                                    Json::Num(residual),
                                    Json::Num(trace),
                                ])
                            })
                            .collect(),
                    ),
                );
                battery.push("cgf_identity_max", Json::Num(b.cgf_identity_max));
                battery.push("product_final_state", Json::Bool(b.product_final_state));
                battery.push(
                    "tilde_reduction_residual",
                    match b.tilde_reduction_residual {
                        Some(r) => Json::Num(r),
                        None => Json::Null,
                    },
                );
                battery.push(
                    "pure_battery_residual_max",
                    Json::Num(b.pure_battery_residual_max),
                );
                root.push("battery", battery);
            }
            None => root.push("battery", Json::Null),
        }

        match &self.resource {
            Some(r) => {
                let mut resource = Json::obj();
                resource.push(
                    "alpha_grid",
                    Json::Arr(
                        r.alpha_grid
                            .iter()
                            .map(|a| Json::Str(a.to_string()))
                            .collect(),
                    ),
                );
                resource.push("s_alpha", Json::floats(&r.s_alpha));
                resource.push("f_alpha", Json::floats(&r.f_alpha));
                resource.push("w_det_bound", Json::Num(r.w_det_bound));
                resource.push("s_irr_det_bound", Json::Num(r.s_irr_det_bound));
                resource.push("alpha_star", Json::Str(r.alpha_star.to_string()));
                resource.push(
                    "bound_family_match_max",
                    Json::Num(r.bound_family_match_max),
                );
                resource.push(
                    "det_vs_stochastic_slack",
                    Json::Num(r.det_vs_stochastic_slack),
                );
                resource.push(
                    "f_alpha_monotonicity_min_step",
                    Json::Num(r.f_alpha_monotonicity_min_step),
                );
                root.push("resource", resource);
            }
            None => root.push("resource", Json::Null),
        }

        root.push(
            "checks",
            Json::Arr(
                self.checks
                    .iter()
                    .map(|c| {
                        let mut check = Json::obj();
                        check.push("name", Json::Str(c.name.clone()));
                        check.push("value", Json::Num(c.value));
                        check.push("threshold", Json::Num(c.threshold));
                        check.push("kind", Json::Str(c.kind.to_owned()));
                        check.push("pass", Json::Bool(c.pass));
                        check
                    })
                    .collect(),
            ),
        );

        let mut meta = Json::obj();
        meta.push("unix_time_s", Json::Int(self.meta.unix_time_s));
        meta.push("total_ms", Json::Int(self.meta.total_ms));
        meta.push("bridge_ms", Json::Int(self.meta.bridge_ms));
        meta.push("sampling_ms", Json::Int(self.meta.sampling_ms));
        meta.push("battery_ms", Json::Int(self.meta.battery_ms));
        meta.push("resource_ms", Json::Int(self.meta.resource_ms));
        root.push("meta", meta);

        root.render()
    }

    /// `cgf.csv`: one row per eta grid point; bound columns are filled on
    /// the side of the grid where they apply.
    pub fn cgf_csv(&self) -> Option<String> {
        let b = self.bridge.as_ref()?;
        let mut out = String::from("eta,phi_direct,phi_fcs,phi_renyi,lower_bound,upper_bound\n");
        let csv_f = |x: f64| {
            if x.is_finite() {
                format!("{x:.16e}")
            } else {
                format!("{x}")
            }
        };
        for (k, &eta) in b.eta_grid.iter().enumerate() {
            let lower = b
                .lower_bounds
                .iter()
                .find(|(e, _)| *e == eta)
                .map(|&(_, v)| csv_f(v))
                .unwrap_or_default();
            let upper = b
                .upper_bounds
                .iter()
                .find(|(e, _)| *e == eta)
                .map(|&(_, v)| csv_f(v))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_f(eta),
                csv_f(b.phi_direct[k]),
                csv_f(b.phi_fcs[k]),
                csv_f(b.phi_renyi[k]),
                lower,
                upper
            );
        }
        Some(out)
    }

    /// `alpha.csv`: divergence and free-energy curves over the alpha grid.
    pub fn alpha_csv(&self) -> Option<String> {
        let r = self.resource.as_ref()?;
        let mut out = String::from("alpha,s_alpha,f_alpha\n");
        let csv_f = |x: f64| {
            if x.is_finite() {
                format!("{x:.16e}")
            } else {
                format!("{x}")
            }
        };
        for (k, alpha) in r.alpha_grid.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                alpha,
                csv_f(r.s_alpha[k]),
                csv_f(r.f_alpha[k])
            );
        }
        Some(out)
    }
}

pub(crate) fn echo_config(cfg: &ScenarioConfig) -> Vec<(String, String)> {
    super::config::config_echo(cfg)
}
