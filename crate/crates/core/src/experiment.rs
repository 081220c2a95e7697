//! Sweep experiments: rebuild a scenario across a swept knob (capacity,
//! zero-rate node count, relay count, or a total-capacity schedule), run the
//! matching equilibrium search per trial, and aggregate per sweep point.
//!
//! Trials are paired across sweep points: trial t always uses seed
//! `base_seed + t`, so point-to-point differences come from the knob and not
//! from a fresh rate draw. Failed trials are recorded with their error and
//! excluded from means; they never abort the sweep.

use serde::{Deserialize, Serialize};

use crate::approx::find_beta_psne;
use crate::cost::social_welfare;
use crate::equilibrium::find_psne_state_graph;
use crate::error::{Error, Result};
use crate::metrics::{brute_force_optimum, certify_bounds, lp_upper_bound, BoundStatus};
use crate::network::CachingNetwork;
use crate::scenarios::{self, ParamValue, ScenarioSpec};

// Scenario names that accept a seed parameter; for the fixed figure-scale
// instances the trial seed only steers the equilibrium walk.
const SEEDED_SCENARIOS: &[&str] = &["abilene", "abilene_extended", "geant", "grid", "random"];

// Offset separating the type-II selection stream from the rate-draw stream.
const TYPE2_SEED_OFFSET: u64 = 0x7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// Uniform per-node cache capacity.
    Capacity(Vec<f64>),
    /// Number of nodes whose request rates are zeroed.
    Type2(Vec<usize>),
    /// Number of relay nodes appended by the extension schedule.
    ExtraNodes(Vec<usize>),
    /// Total capacity units, dealt one at a time round-robin from node 1.
    TotalCapacity(Vec<usize>),
}

impl Sweep {
    fn labels(&self) -> Vec<String> {
        match self {
            Sweep::Capacity(v) => v.iter().map(|c| format!("{c}")).collect(),
            Sweep::Type2(v) | Sweep::ExtraNodes(v) | Sweep::TotalCapacity(v) => {
                v.iter().map(|k| format!("{k}")).collect()
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Sweep::Capacity(v) => v.len(),
            Sweep::Type2(v) | Sweep::ExtraNodes(v) | Sweep::TotalCapacity(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "G_ne")]
    GNe,
    #[serde(rename = "G_opt_exact")]
    GOptExact,
    #[serde(rename = "L_upper")]
    LUpper,
    #[serde(rename = "ratio")]
    Ratio,
    #[serde(rename = "poa_bounds")]
    PoaBounds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub sweep: Sweep,
    pub trials: u64,
    #[serde(default)]
    pub base_seed: u64,
    pub metrics: Vec<Metric>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.sweep.len() == 0 {
            return Err(Error::InvalidParameter("sweep range is empty".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::InvalidParameter(
                "metrics must name at least one of G_ne, G_opt_exact, L_upper, ratio, poa_bounds"
                    .into(),
            ));
        }
        if self.metrics.contains(&Metric::Ratio) {
            if !self.metrics.contains(&Metric::GNe) {
                return Err(Error::InvalidParameter(
                    "ratio needs its numerator: add G_ne to metrics".into(),
                ));
            }
            if !self.metrics.contains(&Metric::GOptExact)
                && !self.metrics.contains(&Metric::LUpper)
            {
                return Err(Error::InvalidParameter(
                    "ratio needs a denominator: add G_opt_exact or L_upper to metrics".into(),
                ));
            }
        }
        if let Sweep::ExtraNodes(ks) = &self.sweep {
            if ks.iter().any(|&k| k > 10) {
                return Err(Error::InvalidParameter(
                    "extra_nodes sweep values must lie in 0..=10".into(),
                ));
            }
        }
        if self.base_seed.checked_add(self.trials).is_none() {
            return Err(Error::InvalidParameter(
                "base_seed + trials overflows the seed space".into(),
            ));
        }
        Ok(())
    }

    /// Which optimum the ratio divides by, decided by the requested metrics.
    /// The exact optimum wins when both are available; a ratio against the
    /// LP bound understates the price of anarchy and is labeled as such.
    pub fn ratio_denominator(&self) -> Option<&'static str> {
        if !self.metrics.contains(&Metric::Ratio) {
            None
        } else if self.metrics.contains(&Metric::GOptExact) {
            Some("exact")
        } else {
            Some("upper")
        }
    }
}

/// Parses and validates an experiment description.
pub fn parse_experiment(json: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub sweep_label: String,
    pub trial: u64,
    pub seed: u64,
    pub g_ne: Option<f64>,
    pub g_opt: Option<f64>,
    pub l_upper: Option<f64>,
    pub ratio: Option<f64>,
    /// "ok", "bound_violated", or the error that stopped the trial.
    pub status: String,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok" || self.status == "bound_violated"
    }
}

/// Mean and population standard deviation over the successful trials of one
/// sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub sweep_label: String,
    pub successes: usize,
    pub failures: usize,
    pub mean_g_ne: Option<f64>,
    pub std_g_ne: Option<f64>,
    pub mean_g_opt: Option<f64>,
    pub mean_l_upper: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub std_ratio: Option<f64>,
    pub bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SweepSummary>,
    /// "exact" or "upper" when a ratio column was requested.
    pub ratio_denominator: Option<&'static str>,
}

pub const CSV_HEADER: &str = "sweep,trial,seed,G_ne,G_opt,L_upper,ratio,status";

impl ExperimentResult {
    /// Per-trial table. Byte-identical across runs for a fixed config:
    /// rows are ordered (sweep point, trial) and floats use the shortest
    /// round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.sweep_label,
                r.trial,
                r.seed,
                cell(r.g_ne),
                cell(r.g_opt),
                cell(r.l_upper),
                cell(r.ratio),
                sanitize(&r.status),
            ));
        }
        out
    }
}

// Status strings land in a comma-separated row; flatten separators.
fn sanitize(status: &str) -> String {
    status.replace([',', '\n'], ";")
}

/// Runs every (sweep point, trial) cell sequentially in order, so output and
/// aggregation are deterministic.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let labels = cfg.sweep.labels();
    let mut records = Vec::with_capacity(labels.len() * cfg.trials as usize);
    let mut summaries = Vec::with_capacity(labels.len());
    for (pi, label) in labels.iter().enumerate() {
        let mut point_records = Vec::with_capacity(cfg.trials as usize);
        for trial in 0..cfg.trials {
            let seed = cfg.base_seed + trial;
            let mut rec = TrialRecord {
                sweep_label: label.clone(),
                trial,
                seed,
                g_ne: None,
                g_opt: None,
                l_upper: None,
                ratio: None,
                status: "ok".to_string(),
            };
            if let Err(e) = run_trial(cfg, pi, seed, &mut rec) {
                rec.status = e.to_string();
            }
            point_records.push(rec);
        }
        summaries.push(summarize(label, &point_records));
        records.extend(point_records);
    }
    Ok(ExperimentResult {
        records,
        summaries,
        ratio_denominator: cfg.ratio_denominator(),
    })
}

fn build_instance(cfg: &ExperimentConfig, point: usize, seed: u64) -> Result<CachingNetwork> {
    let mut spec = cfg.scenario.clone();
    if SEEDED_SCENARIOS.contains(&spec.name.as_str()) {
        spec.params
            .insert("seed".to_string(), ParamValue::Number(seed as f64));
    }
    match &cfg.sweep {
        Sweep::Capacity(values) => {
            spec.params
                .insert("capacity".to_string(), ParamValue::Number(values[point]));
            scenarios::build(&spec)
        }
        Sweep::Type2(counts) => {
            let net = scenarios::build(&spec)?;
            scenarios::apply_type2_nodes(&net, counts[point], seed ^ TYPE2_SEED_OFFSET)
        }
        Sweep::ExtraNodes(counts) => {
            let net = scenarios::build(&spec)?;
            scenarios::extend_abilene(&net, counts[point])
        }
        Sweep::TotalCapacity(totals) => {
            let net = scenarios::build(&spec)?;
            let caps = deal_capacity(totals[point], net.node_count());
            Ok(net.with_capacities(caps))
        }
    }
}

// One unit at a time, node 1 first, wrapping around until the total is
// spent.
fn deal_capacity(total: usize, nodes: usize) -> Vec<f64> {
    let mut caps = vec![(total / nodes) as f64; nodes];
    for c in caps.iter_mut().take(total % nodes) {
        *c += 1.0;
    }
    caps
}

fn run_trial(
    cfg: &ExperimentConfig,
    point: usize,
    seed: u64,
    rec: &mut TrialRecord,
) -> Result<()> {
    let net = build_instance(cfg, point, seed)?;
    let wants = |m: Metric| cfg.metrics.contains(&m);

    let needs_equilibrium = wants(Metric::GNe) || wants(Metric::PoaBounds);
    let mut equilibrium = None;
    if needs_equilibrium {
        // exact walk for the unit-size game, sequential knapsack rounds
        // otherwise
        let result = if net.unit_sizes() {
            find_psne_state_graph(&net, seed, None)?
        } else {
            find_beta_psne(&net)?
        };
        rec.g_ne = Some(social_welfare(&net, &result.profile)?);
        equilibrium = Some(result);
    }
    if wants(Metric::GOptExact) {
        let (_, opt) = brute_force_optimum(&net, None)?;
        rec.g_opt = Some(opt);
    }
    if wants(Metric::LUpper) {
        let (_, upper) = lp_upper_bound(&net)?;
        rec.l_upper = Some(upper);
    }
    if wants(Metric::Ratio) {
        let denom = match cfg.ratio_denominator() {
            Some("exact") => rec.g_opt,
            _ => rec.l_upper,
        };
        rec.ratio = match (rec.g_ne, denom) {
            (Some(g), Some(d)) if d > 0.0 => Some(g / d),
            _ => None,
        };
    }
    if wants(Metric::PoaBounds) {
        let eq = equilibrium.expect("equilibrium computed above");
        let report = certify_bounds(&net, &[eq.profile], eq.beta, None)?;
        let violated = [
            report.bound_scalable,
            report.bound_curvature,
            report.bound_beta,
        ]
        .iter()
        .any(|s| *s == BoundStatus::Violated);
        if violated {
            rec.status = "bound_violated".to_string();
        }
    }
    Ok(())
}

fn summarize(label: &str, records: &[TrialRecord]) -> SweepSummary {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.is_ok()).collect();
    let stats = |field: fn(&TrialRecord) -> Option<f64>| {
        let xs: Vec<f64> = ok.iter().filter_map(|r| field(r)).collect();
        if xs.is_empty() {
            (None, None)
        } else {
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
            (Some(mean), Some(var.sqrt()))
        }
    };
    let (mean_g_ne, std_g_ne) = stats(|r| r.g_ne);
    let (mean_g_opt, _) = stats(|r| r.g_opt);
    let (mean_l_upper, _) = stats(|r| r.l_upper);
    let (mean_ratio, std_ratio) = stats(|r| r.ratio);
    SweepSummary {
        sweep_label: label.to_string(),
        successes: ok.len(),
        failures: records.len() - ok.len(),
        mean_g_ne,
        std_g_ne,
        mean_g_opt,
        mean_l_upper,
        mean_ratio,
        std_ratio,
        bound_violations: records.iter().filter(|r| r.status == "bound_violated").count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_tree_config() -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioSpec::named("random")
                .with_number("n", 5.0)
                .with_number("items", 3.0),
            sweep: Sweep::Capacity(vec![1.0, 2.0]),
            trials: 3,
            base_seed: 11,
            metrics: vec![Metric::GNe, Metric::GOptExact, Metric::Ratio],
        }
    }

    #[test]
    fn config_validation_catches_structural_mistakes() {
        let mut cfg = tiny_tree_config();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_tree_config();
        cfg.sweep = Sweep::Capacity(vec![]);
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_tree_config();
        cfg.metrics = vec![Metric::Ratio, Metric::GNe];
        assert!(cfg.validate().is_err(), "ratio without denominator");

        let mut cfg = tiny_tree_config();
        cfg.metrics = vec![Metric::Ratio, Metric::LUpper];
        assert!(cfg.validate().is_err(), "ratio without numerator");

        let mut cfg = tiny_tree_config();
        cfg.metrics = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = tiny_tree_config();
        cfg.sweep = Sweep::ExtraNodes(vec![11]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_schema_is_strict_and_round_trips() {
        let json = r#"{
            "scenario": {"name": "random", "params": {"n": 5, "items": 3}},
            "sweep": {"capacity": [1, 2]},
            "trials": 3,
            "base_seed": 11,
            "metrics": ["G_ne", "G_opt_exact", "ratio"]
        }"#;
        let cfg = parse_experiment(json).unwrap();
        assert_eq!(cfg, tiny_tree_config());
        assert_eq!(cfg.ratio_denominator(), Some("exact"));

        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);

        assert!(parse_experiment(r#"{"scenario": {"name": "fig1"}}"#).is_err());
        assert!(parse_experiment(&json.replace("G_ne", "G_nash")).is_err());
        assert!(parse_experiment(&json.replace("\"trials\": 3", "\"trials\": 3, \"x\": 1")).is_err());
    }

    #[test]
    fn sweep_output_is_deterministic_and_schema_stable() {
        let cfg = tiny_tree_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.records.len(), 6);
        assert!(a.to_csv().starts_with("sweep,trial,seed,G_ne,G_opt,L_upper,ratio,status\n"));
        for r in &a.records {
            assert_eq!(r.status, "ok");
            let ratio = r.ratio.unwrap();
            assert!(ratio > 0.0 && ratio <= 1.0 + 1e-9);
        }
        // paired seeds: trial t sees the same seed at every sweep point
        assert_eq!(a.records[0].seed, a.records[3].seed);
        for s in &a.summaries {
            assert_eq!(s.successes, 3);
            assert_eq!(s.failures, 0);
            assert!(s.mean_ratio.is_some() && s.std_ratio.is_some());
        }
    }

    #[test]
    fn infeasible_exact_optimum_is_recorded_not_fatal() {
        let cfg = ExperimentConfig {
            scenario: ScenarioSpec::named("abilene"),
            sweep: Sweep::Capacity(vec![1.0]),
            trials: 2,
            base_seed: 0,
            metrics: vec![Metric::GOptExact],
        };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 2);
        for r in &out.records {
            assert!(!r.is_ok());
            assert!(r.status.contains("exceeds the limit"));
            assert!(r.g_opt.is_none());
        }
        assert_eq!(out.summaries[0].failures, 2);
        let csv = out.to_csv();
        assert!(!csv.contains("exceeds the limit,"), "commas sanitized");
    }

    #[test]
    fn type2_and_total_capacity_sweeps_transform_the_instance() {
        let cfg = ExperimentConfig {
            scenario: ScenarioSpec::named("random").with_number("n", 6.0),
            sweep: Sweep::Type2(vec![0, 6]),
            trials: 1,
            base_seed: 4,
            metrics: vec![Metric::GNe],
        };
        let out = run_experiment(&cfg).unwrap();
        assert!(out.records[0].g_ne.unwrap() > 0.0);
        // all rates zeroed: the equilibrium is empty and gains nothing
        assert_eq!(out.records[1].g_ne.unwrap(), 0.0);

        assert_eq!(deal_capacity(13, 11), {
            let mut v = vec![1.0; 11];
            v[0] = 2.0;
            v[1] = 2.0;
            v
        });
        let cfg = ExperimentConfig {
            scenario: ScenarioSpec::named("random").with_number("n", 5.0),
            sweep: Sweep::TotalCapacity(vec![0, 7]),
            trials: 1,
            base_seed: 4,
            metrics: vec![Metric::GNe, Metric::LUpper, Metric::Ratio],
        };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.ratio_denominator, Some("upper"));
        assert_eq!(out.records[0].g_ne.unwrap(), 0.0);
        assert!(out.records[1].g_ne.unwrap() > 0.0);
        assert!(out.records[1].ratio.unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn bound_certification_runs_inside_trials() {
        let cfg = ExperimentConfig {
            scenario: ScenarioSpec::named("random")
                .with_number("n", 5.0)
                .with_number("items", 3.0),
            sweep: Sweep::Capacity(vec![1.0]),
            trials: 3,
            base_seed: 2,
            metrics: vec![Metric::GNe, Metric::PoaBounds],
        };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.summaries[0].bound_violations, 0);
        assert_eq!(out.summaries[0].successes, 3);
    }
}
