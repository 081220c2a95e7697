//! Definition-level oracles. Everything here recomputes from first
//! principles: path walks read edge costs straight off the network, best
//! responses and optima enumerate candidate sets exhaustively. Slow on
//! purpose; only run against small instances.

#![allow(dead_code)] // each integration binary uses its own slice

use caching_games::metrics::FractionalPlacement;
use caching_games::scenarios::{self, ScenarioSpec};
use caching_games::{CachingNetwork, StrategyProfile};

pub const TOL: f64 = 1e-9;

/// Expected cost of the (s, i) request: hop k is paid in the content
/// direction (reverse of travel) and survives while no node at or before
/// its tail holds the item. No path means no cost.
pub fn oracle_request_cost(
    net: &CachingNetwork,
    x: &StrategyProfile,
    s: usize,
    i: usize,
) -> f64 {
    let Some(p) = net.path(s, i) else { return 0.0 };
    let nodes = p.nodes();
    let mut total = 0.0;
    for k in 0..nodes.len() - 1 {
        if nodes[..=k].iter().any(|&v| x.caches(v, i)) {
            break;
        }
        let w = net
            .edge_cost(nodes[k + 1], nodes[k])
            .expect("oracle needs complete reverse edges");
        total += w;
    }
    total
}

pub fn oracle_node_cost(net: &CachingNetwork, x: &StrategyProfile, s: usize) -> f64 {
    (0..net.item_count())
        .map(|i| net.rate(s, i) * oracle_request_cost(net, x, s, i))
        .sum()
}

pub fn oracle_caching_gain(net: &CachingNetwork, x: &StrategyProfile, s: usize) -> f64 {
    oracle_node_cost(net, &StrategyProfile::empty(net), s) - oracle_node_cost(net, x, s)
}

pub fn oracle_welfare(net: &CachingNetwork, x: &StrategyProfile) -> f64 {
    (0..net.node_count())
        .map(|s| oracle_caching_gain(net, x, s))
        .sum()
}

/// Marginal value to `s` of holding `i` itself: the cost its requests for
/// `i` would still pay given only the other nodes' caches. The source's own
/// row is ignored.
pub fn oracle_deviation_weight(
    net: &CachingNetwork,
    x: &StrategyProfile,
    s: usize,
    i: usize,
) -> f64 {
    let Some(p) = net.path(s, i) else { return 0.0 };
    let nodes = p.nodes();
    let mut total = 0.0;
    for k in 0..nodes.len() - 1 {
        if nodes[1..=k].iter().any(|&v| x.caches(v, i)) {
            break;
        }
        total += net
            .edge_cost(nodes[k + 1], nodes[k])
            .expect("oracle needs complete reverse edges");
    }
    net.rate(s, i) * total
}

/// All cache sets node `s` can feasibly hold, as item bitmasks, ascending.
pub fn oracle_feasible_masks(net: &CachingNetwork, s: usize) -> Vec<u64> {
    let items = net.item_count();
    assert!(items <= 20, "oracle enumeration capped at 20 items");
    let mut out = Vec::new();
    for mask in 0u64..(1 << items) {
        let load: f64 = (0..items)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| net.item_size(i))
            .sum();
        if load <= net.capacity(s) + TOL {
            out.push(mask);
        }
    }
    out
}

/// Every feasible profile, odometer order. Asserts the space stays small.
pub fn oracle_all_profiles(net: &CachingNetwork) -> Vec<StrategyProfile> {
    let per_node: Vec<Vec<u64>> = (0..net.node_count())
        .map(|s| oracle_feasible_masks(net, s))
        .collect();
    let size: u128 = per_node.iter().map(|m| m.len() as u128).product();
    assert!(size <= 200_000, "oracle profile space too large: {size}");
    let mut out = Vec::with_capacity(size as usize);
    let mut idx = vec![0usize; per_node.len()];
    'outer: loop {
        let mut x = StrategyProfile::empty(net);
        for (s, masks) in per_node.iter().enumerate() {
            x.set_node_mask(s, masks[idx[s]]);
        }
        out.push(x);
        for s in (0..per_node.len()).rev() {
            idx[s] += 1;
            if idx[s] < per_node[s].len() {
                continue 'outer;
            }
            idx[s] = 0;
        }
        break;
    }
    out
}

/// Highest gain node `s` can reach by changing only its own cache set.
pub fn oracle_best_gain(net: &CachingNetwork, x: &StrategyProfile, s: usize) -> f64 {
    let mut trial = x.clone();
    let mut best = f64::NEG_INFINITY;
    for mask in oracle_feasible_masks(net, s) {
        trial.set_node_mask(s, mask);
        best = best.max(oracle_caching_gain(net, &trial, s));
    }
    best
}

pub fn oracle_is_psne(net: &CachingNetwork, x: &StrategyProfile) -> bool {
    (0..net.node_count())
        .all(|s| oracle_caching_gain(net, x, s) >= oracle_best_gain(net, x, s) - TOL)
}

pub fn oracle_is_beta_psne(net: &CachingNetwork, x: &StrategyProfile, beta: f64) -> bool {
    (0..net.node_count())
        .all(|s| beta * oracle_caching_gain(net, x, s) >= oracle_best_gain(net, x, s) - TOL)
}

pub fn oracle_psne_list(net: &CachingNetwork) -> Vec<StrategyProfile> {
    oracle_all_profiles(net)
        .into_iter()
        .filter(|x| oracle_is_psne(net, x))
        .collect()
}

/// Exhaustive welfare maximizer.
pub fn oracle_optimum(net: &CachingNetwork) -> (StrategyProfile, f64) {
    let mut best_x = StrategyProfile::empty(net);
    let mut best = f64::NEG_INFINITY;
    for x in oracle_all_profiles(net) {
        let g = oracle_welfare(net, &x);
        if g > best {
            best = g;
            best_x = x;
        }
    }
    (best_x, best)
}

/// Exhaustive 0/1 knapsack, up to 20 items. Returns (chosen mask, value).
pub fn oracle_knapsack(values: &[f64], sizes: &[f64], capacity: f64) -> (u64, f64) {
    assert!(values.len() <= 20);
    let mut best = (0u64, 0.0f64);
    for mask in 0u64..(1 << values.len()) {
        let (mut v, mut l) = (0.0, 0.0);
        for i in 0..values.len() {
            if mask >> i & 1 == 1 {
                v += values[i];
                l += sizes[i];
            }
        }
        if l <= capacity + TOL && v > best.1 {
            best = (mask, v);
        }
    }
    best
}

/// Fractional welfare by definition: expected saving with independent
/// per-node hit probabilities phi.
pub fn oracle_fractional_welfare(net: &CachingNetwork, phi: &FractionalPlacement) -> f64 {
    let mut total = 0.0;
    for s in 0..net.node_count() {
        for i in 0..net.item_count() {
            let lambda = net.rate(s, i);
            if lambda == 0.0 {
                continue;
            }
            let p = net.path(s, i).expect("positive-rate request has a path");
            let nodes = p.nodes();
            let mut miss = 1.0;
            let mut cost = 0.0;
            let mut full = 0.0;
            for k in 0..nodes.len() - 1 {
                miss *= 1.0 - phi.get(nodes[k], i);
                let w = net.edge_cost(nodes[k + 1], nodes[k]).unwrap();
                cost += w * miss;
                full += w;
            }
            total += lambda * (full - cost);
        }
    }
    total
}

/// Seeded tree-shaped instance with unit sizes; loop-free by construction.
/// Seeds fold into the float-exact range the scenario parameters accept.
pub fn random_unit_net(
    seed: u64,
    n: u64,
    items: u64,
    capacity: f64,
    servers: u64,
    homogeneous: bool,
) -> CachingNetwork {
    let spec = ScenarioSpec::named("random")
        .with_number("seed", (seed % (1 << 48)) as f64)
        .with_number("n", n as f64)
        .with_number("items", items as f64)
        .with_number("capacity", capacity)
        .with_number("servers", servers as f64)
        .with_number("homogeneous", if homogeneous { 1.0 } else { 0.0 });
    scenarios::build(&spec).expect("random scenario builds")
}

/// Same generator with random item sizes in 1..=3.
pub fn random_sized_net(
    seed: u64,
    n: u64,
    items: u64,
    capacity: f64,
    homogeneous: bool,
) -> CachingNetwork {
    let spec = ScenarioSpec::named("random")
        .with_number("seed", (seed % (1 << 48)) as f64)
        .with_number("n", n as f64)
        .with_number("items", items as f64)
        .with_number("capacity", capacity)
        .with_number("servers", 1.0)
        .with_number("homogeneous", if homogeneous { 1.0 } else { 0.0 })
        .with_text("sizes", "random");
    scenarios::build(&spec).expect("random scenario builds")
}
