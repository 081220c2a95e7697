//! Command-line driver: network validation, property reports, equilibrium
//! search, efficiency bounds, named scenario instances, and sweep
//! experiments. Network arguments default to `-` (standard input) so
//! subcommands compose in a pipe:
//!
//! ```text
//! caching-games scenario fig4_poa_chain --param I=10 | caching-games analyze
//! ```
//!
//! Exit codes: 0 success, 1 bad input or failed validation, 2 a search
//! budget or enumeration limit was exceeded.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use caching_games::approx::find_beta_psne;
use caching_games::cost::social_welfare;
use caching_games::equilibrium::{
    brute_force_psne, find_psne_state_graph, EquilibriumResult, Method,
};
use caching_games::experiment::{parse_experiment, run_experiment, ExperimentResult};
use caching_games::format::{network_to_json, parse_network};
use caching_games::metrics::{brute_force_optimum, certify_bounds, lp_upper_bound};
use caching_games::properties::{check_properties, PropertyReport};
use caching_games::scenarios;
use caching_games::{
    validate_network, CachingNetwork, Error, ParamValue, ScenarioSpec, StrategyProfile,
};

#[derive(Parser)]
#[command(
    name = "caching-games",
    version,
    about = "Selfish caching games: costs, equilibria, and efficiency bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a network description; violations go to standard error.
    Validate {
        /// Network JSON file, or - for standard input.
        #[arg(default_value = "-")]
        net: String,
    },
    /// Structural property report as JSON.
    Props {
        #[arg(default_value = "-")]
        net: String,
    },
    /// State-graph equilibrium search (unit item sizes).
    Psne {
        #[arg(default_value = "-")]
        net: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Arc budget; defaults to the termination bound.
        #[arg(long)]
        max_arcs: Option<u64>,
    },
    /// Enumerate every pure equilibrium by brute force.
    PsneAll {
        #[arg(default_value = "-")]
        net: String,
        /// Search-space ceiling in profiles.
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Sequential 2-approximate equilibrium for sized items.
    ApproxPsne {
        #[arg(default_value = "-")]
        net: String,
    },
    /// Brute-force social optimum.
    Opt {
        #[arg(default_value = "-")]
        net: String,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Linear-programming upper bound on the optimal welfare.
    Upper {
        #[arg(default_value = "-")]
        net: String,
    },
    /// Full efficiency report: equilibria, optimum, bound checks.
    Analyze {
        #[arg(default_value = "-")]
        net: String,
        /// Approximation factor to certify against; inferred when absent.
        #[arg(long)]
        beta: Option<f64>,
        /// Search-space ceiling for the brute-force passes.
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Build a named instance and emit its network JSON.
    Scenario {
        name: String,
        /// Scenario parameter, repeatable: --param key=value.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep experiment from a JSON config; emits the trial CSV.
    Experiment {
        /// Config JSON file, or - for standard input.
        #[arg(default_value = "-")]
        config: String,
        /// CSV output file; standard output when absent (summary then goes
        /// to standard error).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit-code classification: bad input is 1, an exceeded budget or limit
/// is 2.
enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonTermination { .. }
            | Error::SearchSpaceExceeded { .. }
            | Error::KnapsackTooLarge { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Validate { net } => {
            let net = load_network(&net)?;
            let violations = validate_network(&net);
            if violations.is_empty() {
                println!(
                    "ok: {} nodes, {} items, {} edges",
                    net.node_count(),
                    net.item_count(),
                    net.edge_count()
                );
                Ok(())
            } else {
                for v in &violations {
                    eprintln!("{v}");
                }
                Err(Failure::Input(format!("{} violation(s)", violations.len())))
            }
        }
        Cmd::Props { net } => {
            let net = load_network(&net)?;
            let report = check_properties(&net);
            println!("{}", pretty(&props_json(&net, &report)));
            Ok(())
        }
        Cmd::Psne {
            net,
            seed,
            max_arcs,
        } => {
            let net = load_network(&net)?;
            let r = find_psne_state_graph(&net, seed, max_arcs)?;
            println!("{}", pretty(&equilibrium_json(&net, &r)?));
            Ok(())
        }
        Cmd::PsneAll { net, limit } => {
            let net = load_network(&net)?;
            let list = brute_force_psne(&net, limit)?;
            let mut worst: Option<f64> = None;
            let mut best: Option<f64> = None;
            let mut rows = Vec::with_capacity(list.len());
            for x in &list {
                let g = social_welfare(&net, x)?;
                worst = Some(worst.map_or(g, |w| w.min(g)));
                best = Some(best.map_or(g, |b| b.max(g)));
                rows.push(json!({ "welfare": g, "placement": placement_json(&net, x) }));
            }
            println!(
                "{}",
                pretty(&json!({
                    "count": list.len(),
                    "welfare_worst": worst,
                    "welfare_best": best,
                    "equilibria": rows,
                }))
            );
            Ok(())
        }
        Cmd::ApproxPsne { net } => {
            let net = load_network(&net)?;
            let r = find_beta_psne(&net)?;
            println!("{}", pretty(&equilibrium_json(&net, &r)?));
            Ok(())
        }
        Cmd::Opt { net, limit } => {
            let net = load_network(&net)?;
            let (x, g) = brute_force_optimum(&net, limit)?;
            println!(
                "{}",
                pretty(&json!({
                    "welfare_opt_exact": g,
                    "placement": placement_json(&net, &x),
                }))
            );
            Ok(())
        }
        Cmd::Upper { net } => {
            let net = load_network(&net)?;
            let (phi, l) = lp_upper_bound(&net)?;
            let mut map = serde_json::Map::new();
            for v in 0..net.node_count() {
                let mut inner = serde_json::Map::new();
                for i in 0..net.item_count() {
                    if phi.get(v, i) > 0.0 {
                        inner.insert(net.item_name(i).to_string(), json!(phi.get(v, i)));
                    }
                }
                if !inner.is_empty() {
                    map.insert(net.node_name(v).to_string(), inner.into());
                }
            }
            println!(
                "{}",
                pretty(&json!({
                    "welfare_opt_upper": l,
                    "placement": serde_json::Value::Object(map),
                }))
            );
            Ok(())
        }
        Cmd::Analyze { net, beta, limit } => {
            let net = load_network(&net)?;
            let (equilibria, found_beta) = find_equilibria(&net, limit)?;
            let report = certify_bounds(&net, &equilibria, beta.unwrap_or(found_beta), limit)?;
            println!("{}", pretty(&serde_json::to_value(&report).unwrap()));
            Ok(())
        }
        Cmd::Scenario { name, params, out } => {
            let mut spec = ScenarioSpec::named(&name);
            for p in &params {
                let (k, v) = p.split_once('=').ok_or_else(|| {
                    Failure::Input(format!("--param wants key=value, got {p:?}"))
                })?;
                spec.params.insert(k.to_string(), parse_param_value(v));
            }
            let net = scenarios::build(&spec)?;
            write_output(out.as_deref(), &network_to_json(&net))
        }
        Cmd::Experiment { config, out } => {
            let cfg = parse_experiment(&read_input(&config)?)?;
            let result = run_experiment(&cfg)?;
            match out {
                Some(path) => {
                    fs::write(&path, result.to_csv())?;
                    print_summary(&result, &mut std::io::stdout())
                }
                None => {
                    print!("{}", result.to_csv());
                    print_summary(&result, &mut std::io::stderr())
                }
            }
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn load_network(path: &str) -> Result<CachingNetwork, Failure> {
    Ok(parse_network(&read_input(path)?)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(fs::write(p, format!("{text}\n"))?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

// "1e3" and "0.5" become numbers; anything non-finite or non-numeric stays
// text ("true", "right", "unit").
fn parse_param_value(v: &str) -> ParamValue {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => ParamValue::Number(x),
        _ => ParamValue::Text(v.to_string()),
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json encoding is infallible here")
}

/// Equilibria to certify: the full brute-force list when the search space
/// fits, otherwise one verified state-graph equilibrium. Sized items go
/// through the sequential 2-approximation instead.
fn find_equilibria(
    net: &CachingNetwork,
    limit: Option<u64>,
) -> Result<(Vec<StrategyProfile>, f64), Failure> {
    if net.unit_sizes() {
        match brute_force_psne(net, limit) {
            Ok(list) => Ok((list, 1.0)),
            Err(Error::SearchSpaceExceeded { .. }) => {
                let r = find_psne_state_graph(net, 0, None)?;
                Ok((vec![r.profile], 1.0))
            }
            Err(e) => Err(e.into()),
        }
    } else {
        let r = find_beta_psne(net)?;
        Ok((vec![r.profile], r.beta))
    }
}

fn placement_json(net: &CachingNetwork, x: &StrategyProfile) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for v in 0..net.node_count() {
        let items: Vec<serde_json::Value> = x
            .node_items(v)
            .iter()
            .map(|&i| net.item_name(i).into())
            .collect();
        map.insert(net.node_name(v).to_string(), items.into());
    }
    map.into()
}

fn method_name(m: &Method) -> &'static str {
    match m {
        Method::StateGraph => "state_graph",
        Method::BruteForce => "brute_force",
        Method::ApproxSequential => "approx_sequential",
    }
}

fn equilibrium_json(
    net: &CachingNetwork,
    r: &EquilibriumResult,
) -> Result<serde_json::Value, Failure> {
    let welfare = social_welfare(net, &r.profile)?;
    Ok(json!({
        "method": method_name(&r.method),
        "beta": r.beta,
        "verified": r.verified,
        "arcs_traversed": r.arcs_traversed,
        "rounds": r.rounds,
        "max_cascade": r.max_cascade,
        "welfare": welfare,
        "placement": placement_json(net, &r.profile),
    }))
}

fn props_json(net: &CachingNetwork, p: &PropertyReport) -> serde_json::Value {
    let node_names =
        |ids: &[usize]| ids.iter().map(|&v| net.node_name(v)).collect::<Vec<_>>();
    let mut nodes = serde_json::Map::new();
    for v in 0..net.node_count() {
        nodes.insert(
            net.node_name(v).to_string(),
            json!({
                "tier": p.tiers[v],
                "intermediates": node_names(&p.intermediate_sets[v]),
            }),
        );
    }
    json!({
        "has_mixed_request_loop": p.has_mixed_request_loop,
        "loop_witness": p.loop_witness.as_ref().map(|w| node_names(w)),
        "traversed_two_cycles": p
            .traversed_two_cycles
            .iter()
            .map(|&(u, v)| json!([net.node_name(u), net.node_name(v)]))
            .collect::<Vec<_>>(),
        "homogeneous_requests": p.homogeneous_requests,
        "path_overlap": p.path_overlap,
        "overlap_witness": p.overlap_witness.as_ref().map(|w| json!({
            "request_node": net.node_name(w.request_node),
            "on_path_node": net.node_name(w.on_path_node),
            "item": net.item_name(w.item),
        })),
        "cloud_property": p.cloud_property,
        "cloud_server": p.cloud_server.map(|v| net.node_name(v)),
        "alpha": p.alpha,
        "nodes": nodes,
    })
}

/// Per-point mean and standard deviation lines, ratio column labeled by its
/// denominator so an LP-bound ratio is never mistaken for a price of
/// anarchy.
fn print_summary(result: &ExperimentResult, w: &mut impl Write) -> Result<(), Failure> {
    let ratio_label = match result.ratio_denominator {
        Some(d) => format!("ratio_{d}"),
        None => String::from("ratio"),
    };
    for s in &result.summaries {
        let mut line = format!(
            "{}: ok {}/{}",
            s.sweep_label,
            s.successes,
            s.successes + s.failures
        );
        if let (Some(m), Some(sd)) = (s.mean_g_ne, s.std_g_ne) {
            line.push_str(&format!(", G_ne {m:.6} +/- {sd:.6}"));
        }
        if let Some(m) = s.mean_g_opt {
            line.push_str(&format!(", G_opt {m:.6}"));
        }
        if let Some(m) = s.mean_l_upper {
            line.push_str(&format!(", L_upper {m:.6}"));
        }
        if let (Some(m), Some(sd)) = (s.mean_ratio, s.std_ratio) {
            line.push_str(&format!(", {ratio_label} {m:.6} +/- {sd:.6}"));
        }
        if s.bound_violations > 0 {
            line.push_str(&format!(", bound violations {}", s.bound_violations));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}
