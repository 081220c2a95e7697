//! Built-in instances: the small worked examples behind each figure-scale
//! construction, the simulation topologies (Abilene, a GEANT-scale stand-in,
//! a 4x4 grid, seeded random trees), and the two instance transformations
//! (zero-rate nodes, relay extension).
//!
//! Seeded scenarios draw from a ChaCha8 stream in a fixed documented order
//! (edge costs, then item sizes, then rates), so equal specs build equal
//! networks and a capacity change never reshuffles the rate draw.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::parse_network;
use crate::network::{self, CachingNetwork, NetworkBuilder, NetworkParts};
use crate::properties::detect_mixed_request_loop;
use crate::validate_network;

const ABILENE_JSON: &str = include_str!("../data/abilene.json");
const GEANT_JSON: &str = include_str!("../data/geant.json");

pub const SCENARIO_NAMES: &[&str] = &[
    "fig1",
    "fig2_triangle",
    "fig3_no_loop",
    "fig4_poa_chain",
    "fig5_paradox_pair",
    "fig6_overlap",
    "fig7_curvature",
    "abilene",
    "abilene_extended",
    "geant",
    "grid",
    "random",
];

/// One scenario parameter. Numbers cover counts, weights, seeds, and flags
/// (0/1); text covers mode switches like `side=left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, ParamValue>,
}

impl ScenarioSpec {
    pub fn named(name: &str) -> Self {
        ScenarioSpec {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_number(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), ParamValue::Number(value));
        self
    }

    pub fn with_text(mut self, key: &str, value: &str) -> Self {
        self.params
            .insert(key.to_string(), ParamValue::Text(value.to_string()));
        self
    }
}

/// Strict parameter reader: every key must be consumed by the scenario that
/// received it, so a typo fails instead of silently using a default.
struct Params<'a> {
    map: &'a BTreeMap<String, ParamValue>,
    used: BTreeSet<&'a str>,
}

impl<'a> Params<'a> {
    fn new(map: &'a BTreeMap<String, ParamValue>) -> Self {
        Params {
            map,
            used: BTreeSet::new(),
        }
    }

    fn take(&mut self, key: &str) -> Option<&'a ParamValue> {
        let (k, v) = self.map.get_key_value(key)?;
        self.used.insert(k.as_str());
        Some(v)
    }

    fn number(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(ParamValue::Number(v)) => Ok(*v),
            Some(ParamValue::Text(t)) => Err(Error::InvalidParameter(format!(
                "parameter {key} must be a number, got {t:?}"
            ))),
        }
    }

    fn count(&mut self, key: &str, default: usize, lo: usize, hi: usize) -> Result<usize> {
        let v = self.number(key, default as f64)?;
        if !v.is_finite() || v.fract() != 0.0 || v < lo as f64 || v > hi as f64 {
            return Err(Error::InvalidParameter(format!(
                "parameter {key} must be an integer in [{lo}, {hi}], got {v}"
            )));
        }
        Ok(v as usize)
    }

    fn seed(&mut self) -> Result<u64> {
        let v = self.number("seed", 0.0)?;
        if !v.is_finite() || v.fract() != 0.0 || !(0.0..=9.0e15).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "parameter seed must be a non-negative integer, got {v}"
            )));
        }
        Ok(v as u64)
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key) {
            None => Ok(default),
            Some(ParamValue::Number(v)) if *v == 0.0 => Ok(false),
            Some(ParamValue::Number(v)) if *v == 1.0 => Ok(true),
            Some(ParamValue::Text(t)) if t == "false" => Ok(false),
            Some(ParamValue::Text(t)) if t == "true" => Ok(true),
            Some(other) => Err(Error::InvalidParameter(format!(
                "parameter {key} must be a 0/1 or true/false flag, got {other:?}"
            ))),
        }
    }

    fn text(&mut self, key: &str, default: &str) -> Result<String> {
        match self.take(key) {
            None => Ok(default.to_string()),
            Some(ParamValue::Text(t)) => Ok(t.clone()),
            Some(ParamValue::Number(v)) => Err(Error::InvalidParameter(format!(
                "parameter {key} must be text, got {v}"
            ))),
        }
    }

    fn finish(self) -> Result<()> {
        let unused: Vec<&str> = self
            .map
            .keys()
            .map(String::as_str)
            .filter(|k| !self.used.contains(k))
            .collect();
        if unused.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "unknown parameter(s): {}",
                unused.join(", ")
            )))
        }
    }
}

/// Builds the named instance. Every output passes `validate_network`; the
/// seeded topologies additionally refuse to build if their cheapest-route
/// paths ever traversed a mixed request loop (they never should).
pub fn build(spec: &ScenarioSpec) -> Result<CachingNetwork> {
    let mut p = Params::new(&spec.params);
    let net = match spec.name.as_str() {
        "fig1" => {
            p.finish()?;
            fig1()
        }
        "fig2_triangle" => {
            p.finish()?;
            fig2_triangle()
        }
        "fig3_no_loop" => {
            p.finish()?;
            fig3_no_loop()
        }
        "fig4_poa_chain" => {
            let items = p.count("I", 10, 1, 64)?;
            let epsilon = p.number("epsilon", 0.01)?;
            let w21 = p.number("w21", 1.0)?;
            let w32 = p.number("w32", 100.0)?;
            p.finish()?;
            fig4_poa_chain(items, epsilon, w21, w32)
        }
        "fig5_paradox_pair" => {
            let side = p.text("side", "right")?;
            p.finish()?;
            match side.as_str() {
                "left" => fig5_left(),
                "right" => fig5_right(),
                other => Err(Error::InvalidParameter(format!(
                    "fig5_paradox_pair side must be \"left\" or \"right\", got {other:?}"
                ))),
            }
        }
        "fig6_overlap" => {
            p.finish()?;
            fig6_overlap()
        }
        "fig7_curvature" => {
            let w21 = p.number("w21", 1.0)?;
            let w32 = p.number("w32", 1.0)?;
            p.finish()?;
            fig7_curvature(w21, w32)
        }
        "abilene" => {
            let seed = p.seed()?;
            let capacity = p.number("capacity", 1.0)?;
            let homogeneous = p.flag("homogeneous", false)?;
            p.finish()?;
            abilene(seed, capacity, homogeneous)
        }
        "abilene_extended" => {
            let seed = p.seed()?;
            let capacity = p.number("capacity", 1.0)?;
            let homogeneous = p.flag("homogeneous", false)?;
            let extra = p.count("extra", 10, 0, 10)?;
            p.finish()?;
            extend_abilene(&abilene(seed, capacity, homogeneous)?, extra)
        }
        "geant" => {
            let seed = p.seed()?;
            let capacity = p.number("capacity", 1.0)?;
            let homogeneous = p.flag("homogeneous", false)?;
            p.finish()?;
            geant(seed, capacity, homogeneous)
        }
        "grid" => {
            let seed = p.seed()?;
            let capacity = p.number("capacity", 1.0)?;
            let homogeneous = p.flag("homogeneous", false)?;
            p.finish()?;
            grid(seed, capacity, homogeneous)
        }
        "random" => {
            let n = p.count("n", 8, 2, 256)?;
            let items = p.count("items", 4, 1, 64)?;
            let servers = p.count("servers", 1, 1, n)?;
            let capacity = p.number("capacity", 1.0)?;
            let seed = p.seed()?;
            let homogeneous = p.flag("homogeneous", false)?;
            let sizes = p.text("sizes", "unit")?;
            let max_cost = p.count("max_cost", 10, 1, 1_000_000)?;
            p.finish()?;
            random_tree(n, items, servers, capacity, seed, homogeneous, &sizes, max_cost)
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown scenario {other:?}; known scenarios: {}",
            SCENARIO_NAMES.join(", ")
        ))),
    }?;
    let violations = validate_network(&net);
    if let Some(v) = violations.first() {
        return Err(Error::InvalidParameter(format!(
            "scenario {} built an invalid network: {v}",
            spec.name
        )));
    }
    Ok(net)
}

/// Both halves of the extra-node paradox pair: a two-node network whose only
/// equilibrium is optimal, and the same network with a relay interposed so
/// that an equilibrium leaving the relay idle falls short of the optimum.
pub fn fig5_pair() -> Result<(CachingNetwork, CachingNetwork)> {
    Ok((fig5_left()?, fig5_right()?))
}

// 8-node illustration instance: two items served from opposite sides, every
// node requesting both. The two pinned paths and the weights on them are the
// instance's documented contract; the rest is cheapest-route.
fn fig1() -> Result<CachingNetwork> {
    let names = ["1", "2", "3", "4", "5", "6", "7", "8"];
    let mut b = NetworkBuilder::new();
    b.nodes(names);
    b.item("1", 1.0).item("2", 1.0);
    b.server("1", "4").server("2", "7");
    for (a, z, w) in [
        ("1", "2", 3.0),
        ("2", "4", 4.0),
        ("1", "3", 6.0),
        ("3", "6", 5.0),
        ("5", "6", 7.0),
        ("4", "6", 9.0),
        ("5", "7", 11.0),
        ("7", "8", 2.0),
    ] {
        b.sym_edge(a, z, w);
    }
    for n in names {
        b.capacity(n, 1.0);
        b.rate(n, "1", 1.0).rate(n, "2", 1.0);
    }
    b.path("5", "1", ["5", "6", "4"]);
    b.path("3", "2", ["3", "6", "5", "7"]);
    b.synthesize_missing_paths();
    b.build()
}

// Shared 5-node, 2-item skeleton for the equilibrium-free instance and its
// rerouted twin. Weights and rates are certified constants: with these
// numbers the server-adjacent nodes 4 and 5 have dominant strategies, and
// the best responses of nodes 1-3 negate each other around the routing
// cycle, so no profile is stable (frozen by the brute-force test below).
fn fig2_base() -> NetworkBuilder {
    let mut b = NetworkBuilder::new();
    b.nodes(["1", "2", "3", "4", "5"]);
    b.item("1", 1.0).item("2", 1.0);
    b.server("1", "4").server("2", "5");
    for (a, z, w) in [
        ("1", "2", 1.0),
        ("2", "4", 2.0),
        ("1", "3", 1.0),
        ("2", "3", 1.0),
        ("3", "5", 1.0),
        ("4", "5", 1.0),
    ] {
        b.sym_edge(a, z, w);
    }
    for n in ["1", "2", "3", "4", "5"] {
        b.capacity(n, 1.0);
        b.rate(n, "1", 10.0).rate(n, "2", 14.0);
    }
    b.path("2", "1", ["2", "4"]);
    b.path("4", "1", ["4"]);
    b.path("5", "1", ["5", "4"]);
    b.path("1", "2", ["1", "3", "5"]);
    b.path("2", "2", ["2", "1", "3", "5"]);
    b.path("3", "2", ["3", "5"]);
    b.path("4", "2", ["4", "5"]);
    b.path("5", "2", ["5"]);
    b
}

fn fig2_triangle() -> Result<CachingNetwork> {
    let mut b = fig2_base();
    b.path("1", "1", ["1", "3", "2", "4"]);
    b.path("3", "1", ["3", "2", "4"]);
    b.build()
}

// Same weights and rates, but the two item-1 paths that closed the traversal
// cycle are rerouted through the 1-2 edge, which restores equilibrium
// existence.
fn fig3_no_loop() -> Result<CachingNetwork> {
    let mut b = fig2_base();
    b.path("1", "1", ["1", "2", "4"]);
    b.path("3", "1", ["3", "1", "2", "4"]);
    b.build()
}

// Chain 1-2-3 where only node 1 requests: one slightly-preferred item plus
// I-1 near-ties. Node 1 can hold one item, node 2 the other I-1, so the
// worst equilibrium wastes node 2 entirely and the exact price of anarchy is
// 1 / (1 + (I-1)(1-eps) w32 / (w21 + w32)).
fn fig4_poa_chain(items: usize, epsilon: f64, w21: f64, w32: f64) -> Result<CachingNetwork> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1), got {epsilon}"
        )));
    }
    check_weight("w21", w21)?;
    check_weight("w32", w32)?;
    let mut b = NetworkBuilder::new();
    b.nodes(["1", "2", "3"]);
    b.sym_edge("1", "2", w21).sym_edge("2", "3", w32);
    b.capacity("1", 1.0).capacity("2", (items - 1) as f64);
    for k in 1..=items {
        let item = k.to_string();
        b.item(&item, 1.0).server(&item, "3");
        b.rate("1", &item, if k == 1 { 1.0 } else { 1.0 - epsilon });
    }
    b.synthesize_missing_paths();
    b.build()
}

fn fig5_left() -> Result<CachingNetwork> {
    let mut b = NetworkBuilder::new();
    b.nodes(["1", "2"]);
    b.item("1", 1.0).item("2", 1.0);
    b.server("1", "2").server("2", "2");
    b.sym_edge("1", "2", 2.0);
    b.capacity("1", 1.0);
    b.rate("1", "1", 2.0).rate("1", "2", 1.0);
    b.synthesize_missing_paths();
    b.build()
}

// The relay 3 sits on node 1's route to the server and splits the old cost 2
// evenly, so total route cost is unchanged. The relay requests nothing, so
// caching nothing is one of its best responses.
fn fig5_right() -> Result<CachingNetwork> {
    let mut b = NetworkBuilder::new();
    b.nodes(["1", "2", "3"]);
    b.item("1", 1.0).item("2", 1.0);
    b.server("1", "2").server("2", "2");
    b.sym_edge("1", "3", 1.0).sym_edge("3", "2", 1.0);
    b.capacity("1", 1.0).capacity("3", 1.0);
    b.rate("1", "1", 2.0).rate("1", "2", 1.0);
    b.path("1", "1", ["1", "3", "2"]);
    b.path("1", "2", ["1", "3", "2"]);
    b.synthesize_missing_paths();
    b.build()
}

fn fig6_overlap() -> Result<CachingNetwork> {
    let mut b = NetworkBuilder::new();
    b.nodes(["1", "2", "3"]);
    b.item("1", 1.0);
    b.server("1", "3");
    b.sym_edge("1", "2", 2.0).sym_edge("2", "3", 3.0);
    b.capacity("1", 1.0).capacity("2", 1.0);
    b.rate("1", "1", 1.0).rate("2", "1", 1.0);
    b.path("1", "1", ["1", "2", "3"]);
    b.path("2", "1", ["2", "3"]);
    b.build()
}

// Chain 1-2-3, both items at node 3, homogeneous rates, one slot at node 1
// only. The curvature of the welfare function is then exactly
// w32 / (w21 + w32).
fn fig7_curvature(w21: f64, w32: f64) -> Result<CachingNetwork> {
    check_weight("w21", w21)?;
    check_weight("w32", w32)?;
    let mut b = NetworkBuilder::new();
    b.nodes(["1", "2", "3"]);
    b.item("1", 1.0).item("2", 1.0);
    b.server("1", "3").server("2", "3");
    b.sym_edge("1", "2", w21).sym_edge("2", "3", w32);
    b.capacity("1", 1.0);
    for n in ["1", "2", "3"] {
        b.rate(n, "1", 2.0).rate(n, "2", 2.0);
    }
    b.synthesize_missing_paths();
    b.build()
}

fn check_weight(name: &str, w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite weight, got {w}"
        )))
    }
}

fn abilene(seed: u64, capacity: f64, homogeneous: bool) -> Result<CachingNetwork> {
    let mut parts = parse_network(ABILENE_JSON)?.to_parts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_rates(&mut parts, &mut rng);
    if homogeneous {
        homogenize_rates(&mut parts);
    }
    finish_seeded(parts, capacity)
}

fn geant(seed: u64, capacity: f64, homogeneous: bool) -> Result<CachingNetwork> {
    let mut parts = parse_network(GEANT_JSON)?.to_parts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    randomize_symmetric_costs(&mut parts, &mut rng, 1.0, 100.0)?;
    draw_rates(&mut parts, &mut rng);
    if homogeneous {
        homogenize_rates(&mut parts);
    }
    finish_seeded(parts, capacity)
}

// 4x4 grid, row-major node numbering, seeded costs, items 1-8 at one corner
// and 9-16 at the opposite one.
fn grid(seed: u64, capacity: f64, homogeneous: bool) -> Result<CachingNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetworkBuilder::new();
    let names: Vec<String> = (1..=16).map(|k| k.to_string()).collect();
    for n in &names {
        b.node(n);
    }
    for row in 0..4usize {
        for col in 0..4usize {
            let here = row * 4 + col;
            if col + 1 < 4 {
                b.sym_edge(&names[here], &names[here + 1], rng.gen_range(1.0..100.0));
            }
            if row + 1 < 4 {
                b.sym_edge(&names[here], &names[here + 4], rng.gen_range(1.0..100.0));
            }
        }
    }
    for k in 1..=16 {
        let item = k.to_string();
        b.item(&item, 1.0);
        b.server(&item, if k <= 8 { "1" } else { "16" });
    }
    let mut parts = b.build()?.to_parts();
    draw_rates(&mut parts, &mut rng);
    if homogeneous {
        homogenize_rates(&mut parts);
    }
    finish_seeded(parts, capacity)
}

// Uniform recursive tree: node v attaches to a uniform earlier node, so the
// instance is loop-free by construction. Items spread round-robin over the
// first `servers` nodes.
fn random_tree(
    n: usize,
    items: usize,
    servers: usize,
    capacity: f64,
    seed: u64,
    homogeneous: bool,
    sizes: &str,
    max_cost: usize,
) -> Result<CachingNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = NetworkBuilder::new();
    let names: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    for name in &names {
        b.node(name);
    }
    for v in 1..n {
        let parent = rng.gen_range(0..v);
        let w = rng.gen_range(1..=max_cost) as f64;
        b.sym_edge(&names[v], &names[parent], w);
    }
    let item_sizes: Vec<f64> = match sizes {
        "unit" => vec![1.0; items],
        "random" => (0..items).map(|_| rng.gen_range(1..=3) as f64).collect(),
        other => {
            return Err(Error::InvalidParameter(format!(
                "sizes must be \"unit\" or \"random\", got {other:?}"
            )))
        }
    };
    for (i, &size) in item_sizes.iter().enumerate() {
        let item = (i + 1).to_string();
        b.item(&item, size);
        b.server(&item, &names[i % servers]);
    }
    let mut parts = b.build()?.to_parts();
    draw_rates(&mut parts, &mut rng);
    if homogeneous {
        homogenize_rates(&mut parts);
    }
    finish_seeded(parts, capacity)
}

/// Zeroes the request rates of `n_type2` seeded-randomly chosen nodes. They
/// keep their caches and stay on every forwarding path.
pub fn apply_type2_nodes(
    net: &CachingNetwork,
    n_type2: usize,
    seed: u64,
) -> Result<CachingNetwork> {
    let n = net.node_count();
    if n_type2 > n {
        return Err(Error::InvalidParameter(format!(
            "cannot zero the rates of {n_type2} of {n} nodes"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx.truncate(n_type2);
    idx.sort_unstable();
    Ok(net.with_rates_zeroed(&idx))
}

// Which edge each relay splits, in insertion order. All ten are distinct
// links of the base network, so the schedule never references an edge that
// an earlier step already removed.
const EXTENSION_SCHEDULE: &[(&str, &str, &str)] = &[
    ("1", "2", "12"),
    ("1", "3", "13"),
    ("2", "4", "14"),
    ("2", "3", "15"),
    ("4", "5", "16"),
    ("3", "6", "17"),
    ("5", "6", "18"),
    ("5", "8", "19"),
    ("6", "7", "20"),
    ("7", "9", "21"),
];

/// Appends up to ten zero-rate relay nodes, each splitting one scheduled edge
/// into two halves whose costs sum to the original, and reroutes every stored
/// path across the split. Relays inherit the capacity of the first endpoint.
pub fn extend_abilene(net: &CachingNetwork, extra: usize) -> Result<CachingNetwork> {
    if extra > EXTENSION_SCHEDULE.len() {
        return Err(Error::InvalidParameter(format!(
            "at most {} extra nodes are supported, got {extra}",
            EXTENSION_SCHEDULE.len()
        )));
    }
    let mut parts = net.to_parts();
    for &(a_name, b_name, relay_name) in &EXTENSION_SCHEDULE[..extra] {
        if parts.node_names.iter().any(|n| n == relay_name) {
            return Err(Error::InvalidParameter(format!(
                "node {relay_name} already exists; the network was extended before"
            )));
        }
        let a = node_position(&parts, a_name)?;
        let b = node_position(&parts, b_name)?;
        let w_ab = parts.edges.remove(&(a, b)).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "extension expects the edge ({a_name}, {b_name}); not found"
            ))
        })?;
        let w_ba = parts.edges.remove(&(b, a)).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "extension expects the edge ({b_name}, {a_name}); not found"
            ))
        })?;
        let relay = parts.node_names.len();
        parts.node_names.push(relay_name.to_string());
        parts.capacities.push(parts.capacities[a]);
        parts.edges.insert((a, relay), w_ab / 2.0);
        parts.edges.insert((relay, b), w_ab / 2.0);
        parts.edges.insert((b, relay), w_ba / 2.0);
        parts.edges.insert((relay, a), w_ba / 2.0);
        for nodes in parts.paths.values_mut() {
            let mut k = 0;
            while k + 1 < nodes.len() {
                let step = (nodes[k], nodes[k + 1]);
                if step == (a, b) || step == (b, a) {
                    nodes.insert(k + 1, relay);
                    k += 2;
                } else {
                    k += 1;
                }
            }
        }
    }
    CachingNetwork::from_parts(parts)
}

fn node_position(parts: &NetworkParts, name: &str) -> Result<usize> {
    parts
        .node_names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::InvalidParameter(format!("no node named {name:?} in this network")))
}

// Rates U[0, 10) for every (node, item) pair, node-major order.
fn draw_rates(parts: &mut NetworkParts, rng: &mut ChaCha8Rng) {
    let n = parts.node_names.len();
    let m = parts.item_names.len();
    parts.rates.clear();
    for s in 0..n {
        for i in 0..m {
            let r = rng.gen_range(0.0..10.0);
            if r > 0.0 {
                parts.rates.insert((s, i), r);
            }
        }
    }
}

// Replaces every rate with the per-item mean over all nodes.
fn homogenize_rates(parts: &mut NetworkParts) {
    let n = parts.node_names.len();
    let m = parts.item_names.len();
    for i in 0..m {
        let mean = (0..n)
            .map(|s| parts.rates.get(&(s, i)).copied().unwrap_or(0.0))
            .sum::<f64>()
            / n as f64;
        for s in 0..n {
            if mean > 0.0 {
                parts.rates.insert((s, i), mean);
            } else {
                parts.rates.remove(&(s, i));
            }
        }
    }
}

// One cost draw per symmetric pair, ascending pair order, applied to both
// directions.
fn randomize_symmetric_costs(
    parts: &mut NetworkParts,
    rng: &mut ChaCha8Rng,
    lo: f64,
    hi: f64,
) -> Result<()> {
    let keys: Vec<(usize, usize)> = parts.edges.keys().copied().collect();
    for &(u, v) in &keys {
        if !parts.edges.contains_key(&(v, u)) {
            return Err(Error::InvalidParameter(format!(
                "cost randomization expects a symmetric edge set; ({u}, {v}) has no reverse"
            )));
        }
    }
    for (u, v) in keys {
        if u < v {
            let w = rng.gen_range(lo..hi);
            parts.edges.insert((u, v), w);
            parts.edges.insert((v, u), w);
        }
    }
    Ok(())
}

fn finish_seeded(mut parts: NetworkParts, capacity: f64) -> Result<CachingNetwork> {
    if !(capacity >= 0.0 && capacity.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "capacity must be a non-negative finite number, got {capacity}"
        )));
    }
    parts.capacities = vec![capacity; parts.node_names.len()];
    network::synthesize_paths(&mut parts)?;
    let net = CachingNetwork::from_parts(parts)?;
    let (looped, witness) = detect_mixed_request_loop(&net);
    if looped {
        let cycle = witness
            .unwrap_or_default()
            .iter()
            .map(|&v| net.node_name(v).to_string())
            .collect::<Vec<_>>()
            .join(" -> ");
        return Err(Error::PropertyViolation {
            property: "mixed request loop freedom",
            witness: format!("cheapest-route paths traversed the cycle {cycle}"),
        });
    }
    Ok(net)
}
