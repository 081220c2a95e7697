//! Pure Nash equilibria of the equal-size caching game: best responses,
//! verification, state-graph search, and brute-force enumeration.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::deviation_weights_for_node;
use crate::error::{Error, Result};
use crate::network::CachingNetwork;
use crate::profile::{search_space_size, subsets_up_to_count, StrategyProfile};
use crate::properties::detect_mixed_request_loop;

/// Gain comparisons use this margin; smaller differences count as ties.
pub const GAIN_EPS: f64 = 1e-9;

/// Default cap on enumerated profiles in `brute_force_psne`.
pub const DEFAULT_SEARCH_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    StateGraph,
    BruteForce,
    ApproxSequential,
}

/// An equilibrium profile plus provenance of how it was found.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    pub method: Method,
    /// State-graph arcs taken (adds plus changes); 0 for other methods.
    pub arcs_traversed: u64,
    /// Add-arc rounds completed (state-graph method).
    pub rounds: u64,
    /// Longest change-arc cascade within one round.
    pub max_cascade: u64,
    pub verified: bool,
    /// Approximation factor: 1.0 means exact.
    pub beta: f64,
}

/// A profitable unilateral deviation, as evidence against equilibrium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    pub node: usize,
    pub better_set: Vec<usize>,
}

fn require_unit_sizes(net: &CachingNetwork) -> Result<()> {
    if net.unit_sizes() {
        Ok(())
    } else {
        Err(Error::UnequalSizes)
    }
}

/// Items node `s` would cache against the rest of the profile: its cache
/// slot count's worth of largest deviation weights, ties to the smaller
/// index. Maximizes the node's gain over all feasible sets.
pub fn best_response(
    net: &CachingNetwork,
    profile: &StrategyProfile,
    s: usize,
) -> Result<Vec<usize>> {
    require_unit_sizes(net)?;
    let slots = net.cache_slots(s)?;
    let q = deviation_weights_for_node(net, profile, s)?;
    Ok(top_items(&q, slots))
}

/// Indices of the `k` largest weights, ties to the smaller index, ascending.
fn top_items(q: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| q[b].partial_cmp(&q[a]).unwrap().then(a.cmp(&b)));
    let mut top: Vec<usize> = order.into_iter().take(k).collect();
    top.sort_unstable();
    top
}

/// Checks the equilibrium condition node by node. Returns the first node
/// whose best response beats its current gain by more than `GAIN_EPS`,
/// together with that better set.
pub fn verify_psne(
    net: &CachingNetwork,
    profile: &StrategyProfile,
) -> Result<(bool, Option<Deviation>)> {
    require_unit_sizes(net)?;
    if !profile.is_feasible(net) {
        return Err(Error::InvalidParameter(
            "cannot verify an infeasible profile".to_string(),
        ));
    }
    for s in 0..net.node_count() {
        let slots = net.cache_slots(s)?;
        let q = deviation_weights_for_node(net, profile, s)?;
        let current: f64 = profile.node_items(s).iter().map(|&i| q[i]).sum();
        let best_set = top_items(&q, slots);
        let best: f64 = best_set.iter().map(|&i| q[i]).sum();
        if best > current + GAIN_EPS {
            return Ok((false, Some(Deviation { node: s, better_set: best_set })));
        }
    }
    Ok((true, None))
}

/// Theoretical bound on the state-graph path length for loop-free
/// instances: |V| |I|^2 (|V|-2)^2.
pub fn state_graph_arc_bound(net: &CachingNetwork) -> u128 {
    let v = net.node_count() as i128;
    let i = net.item_count() as i128;
    (v * i * i * (v - 2) * (v - 2)).max(0) as u128
}

fn default_arc_budget(net: &CachingNetwork) -> Result<u64> {
    // The theoretical bound counts change arcs and is 0 for |V| <= 2, yet
    // every instance still needs its add arcs, so the budget adds one slot
    // per node on top.
    let mut slots = 0u128;
    for s in 0..net.node_count() {
        slots += net.cache_slots(s)? as u128;
    }
    Ok((state_graph_arc_bound(net) + slots + 1).min(u64::MAX as u128) as u64)
}

/// Walks the game's state graph from the empty profile: each round one node
/// with spare capacity adds its best item, then profitable single-item swaps
/// run until none is left. Terminates when every cache is full, which is
/// guaranteed on instances without a mixed request loop.
///
/// Seed 0 always picks the lowest-index node with spare capacity; any other
/// seed picks uniformly among them. Exceeding the arc budget is reported as
/// suspected non-termination, with a mixed-request-loop witness if one
/// exists.
pub fn find_psne_state_graph(
    net: &CachingNetwork,
    seed: u64,
    max_arcs: Option<u64>,
) -> Result<EquilibriumResult> {
    require_unit_sizes(net)?;
    let budget = match max_arcs {
        Some(b) => b,
        None => default_arc_budget(net)?,
    };
    let slots: Vec<usize> = (0..net.node_count())
        .map(|s| net.cache_slots(s))
        .collect::<Result<_>>()?;
    let mut rng = (seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed));
    let mut x = StrategyProfile::empty(net);
    let mut arcs = 0u64;
    let mut rounds = 0u64;
    let mut max_cascade = 0u64;

    let bump = |arcs: &mut u64| -> Result<()> {
        *arcs += 1;
        if *arcs > budget {
            let (_, witness) = detect_mixed_request_loop(net);
            return Err(Error::NonTermination {
                arcs: *arcs,
                budget,
                loop_witness: witness.map(|cycle| {
                    cycle.iter().map(|&v| net.node_name(v).to_string()).collect()
                }),
            });
        }
        Ok(())
    };

    loop {
        let open: Vec<usize> = (0..net.node_count())
            .filter(|&s| x.cached_count(s) < slots[s])
            .collect();
        let Some(&first) = open.first() else { break };
        let s = match &mut rng {
            Some(r) => open[r.gen_range(0..open.len())],
            None => first,
        };

        // Add arc: best uncached item, ties to the smaller index. Zero-gain
        // adds are fine; they only fill slots nobody competes for.
        let q = deviation_weights_for_node(net, &x, s)?;
        let add = (0..net.item_count())
            .filter(|&i| !x.caches(s, i))
            .max_by(|&a, &b| q[a].partial_cmp(&q[b]).unwrap().then(b.cmp(&a)))
            .expect("an open node always has an uncached item");
        x.insert(s, add);
        bump(&mut arcs)?;
        rounds += 1;

        // Change arcs: first profitable swap in (node, incoming, outgoing)
        // order, restarted from the top after every move.
        let mut cascade = 0u64;
        'swaps: loop {
            for v in 0..net.node_count() {
                let held = x.node_items(v);
                if held.is_empty() {
                    continue;
                }
                let q = deviation_weights_for_node(net, &x, v)?;
                for j in 0..net.item_count() {
                    if x.caches(v, j) {
                        continue;
                    }
                    for &t in &held {
                        if q[j] - q[t] > GAIN_EPS {
                            x.remove(v, t);
                            x.insert(v, j);
                            bump(&mut arcs)?;
                            cascade += 1;
                            continue 'swaps;
                        }
                    }
                }
            }
            break;
        }
        max_cascade = max_cascade.max(cascade);
    }

    let verified = verify_psne(net, &x)?.0;
    Ok(EquilibriumResult {
        profile: x,
        method: Method::StateGraph,
        arcs_traversed: arcs,
        rounds,
        max_cascade,
        verified,
        beta: 1.0,
    })
}

/// Every feasible profile that passes `verify_psne`, in lexicographic order
/// of per-node item sets. Refuses when the search space exceeds `limit`
/// (default ten million profiles).
pub fn brute_force_psne(
    net: &CachingNetwork,
    limit: Option<u64>,
) -> Result<Vec<StrategyProfile>> {
    require_unit_sizes(net)?;
    let limit = limit.unwrap_or(DEFAULT_SEARCH_LIMIT);
    let per_node: Vec<Vec<u64>> = (0..net.node_count())
        .map(|s| Ok(subsets_up_to_count(net.item_count(), net.cache_slots(s)?)))
        .collect::<Result<_>>()?;
    let size = search_space_size(&per_node);
    if size > limit as u128 {
        return Err(Error::SearchSpaceExceeded { size, limit });
    }

    let n = net.node_count();
    let mut found = Vec::new();
    let mut idx = vec![0usize; n];
    let mut x = StrategyProfile::empty(net);
    'outer: loop {
        for s in 0..n {
            x.set_node_mask(s, per_node[s][idx[s]]);
        }
        if is_psne_quick(net, &x)? {
            found.push(x.clone());
        }
        // Odometer: the last node's subset varies fastest.
        for s in (0..n).rev() {
            idx[s] += 1;
            if idx[s] < per_node[s].len() {
                continue 'outer;
            }
            idx[s] = 0;
        }
        break;
    }
    Ok(found)
}

/// Equilibrium test with early exit, no witness construction.
fn is_psne_quick(net: &CachingNetwork, x: &StrategyProfile) -> Result<bool> {
    for s in 0..net.node_count() {
        let slots = net.cache_slots(s)?;
        let q = deviation_weights_for_node(net, x, s)?;
        let current: f64 = x.node_items(s).iter().map(|&i| q[i]).sum();
        let best: f64 = {
            let mut sorted = q.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            sorted.iter().take(slots).sum()
        };
        if best > current + GAIN_EPS {
            return Ok(false);
        }
    }
    Ok(true)
}
