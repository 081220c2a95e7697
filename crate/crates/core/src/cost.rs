//! Routing costs, caching gains, and deviation weights.
//!
//! All evaluation works on arbitrary 0/1 placements, including ones over
//! capacity; feasibility is a separate predicate on `StrategyProfile`.

use crate::error::{Error, Result};
use crate::network::{CachingNetwork, ReqPath};
use crate::profile::StrategyProfile;

fn checked_path<'a>(
    net: &'a CachingNetwork,
    s: usize,
    i: usize,
) -> Result<Option<&'a ReqPath>> {
    match net.path(s, i) {
        Some(p) if p.is_complete() => Ok(Some(p)),
        Some(p) => {
            // Report the first content edge the path is missing.
            let k = p.rev_costs().iter().position(|w| w.is_nan()).unwrap();
            Err(Error::MissingReverseEdge {
                node: net.node_name(s).to_string(),
                item: net.item_name(i).to_string(),
                from: net.node_name(p.nodes()[k + 1]).to_string(),
                to: net.node_name(p.nodes()[k]).to_string(),
            })
        }
        None if net.rate(s, i) > 0.0 => Err(Error::MissingPath {
            node: net.node_name(s).to_string(),
            item: net.item_name(i).to_string(),
        }),
        None => Ok(None),
    }
}

/// Expected cost of one request for item `i` issued at node `s`: each path
/// edge is paid in the content direction unless some node at or before it
/// caches the item. Zero-rate requests without a path cost nothing.
pub fn request_cost(
    net: &CachingNetwork,
    profile: &StrategyProfile,
    s: usize,
    i: usize,
) -> Result<f64> {
    let Some(p) = checked_path(net, s, i)? else {
        return Ok(0.0);
    };
    let nodes = p.nodes();
    let mut miss = 1.0 - (profile.caches(nodes[0], i) as u8 as f64);
    let mut total = 0.0;
    for (k, &w) in p.rev_costs().iter().enumerate() {
        if miss == 0.0 {
            break;
        }
        total += w * miss;
        miss *= 1.0 - (profile.caches(nodes[k + 1], i) as u8 as f64);
    }
    Ok(total)
}

/// Aggregate expected cost at node `s` over all its requests.
pub fn node_cost(net: &CachingNetwork, profile: &StrategyProfile, s: usize) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..net.item_count() {
        let lambda = net.rate(s, i);
        if lambda > 0.0 {
            total += lambda * request_cost(net, profile, s, i)?;
        }
    }
    Ok(total)
}

/// Cost reduction at node `s` relative to the empty placement.
pub fn caching_gain(net: &CachingNetwork, profile: &StrategyProfile, s: usize) -> Result<f64> {
    let mut base = 0.0;
    for i in 0..net.item_count() {
        let lambda = net.rate(s, i);
        if lambda > 0.0 {
            let p = checked_path(net, s, i)?.unwrap();
            base += lambda * p.full_cost();
        }
    }
    Ok(base - node_cost(net, profile, s)?)
}

/// Sum of caching gains over all nodes, the social welfare objective.
pub fn social_welfare(net: &CachingNetwork, profile: &StrategyProfile) -> Result<f64> {
    let mut total = 0.0;
    for s in 0..net.node_count() {
        total += caching_gain(net, profile, s)?;
    }
    Ok(total)
}

/// Marginal value to node `s` of caching item `i` itself: the expected cost
/// its requests for `i` would incur given only the other nodes' placements.
/// Independent of `s`'s own row in the profile.
pub fn deviation_weight(
    net: &CachingNetwork,
    profile: &StrategyProfile,
    s: usize,
    i: usize,
) -> Result<f64> {
    let lambda = net.rate(s, i);
    let Some(p) = checked_path(net, s, i)? else {
        return Ok(0.0);
    };
    let nodes = p.nodes();
    let mut miss = 1.0;
    let mut total = 0.0;
    for (k, &w) in p.rev_costs().iter().enumerate() {
        if miss == 0.0 {
            break;
        }
        total += w * miss;
        // Skip the source factor: weight k+1 is blocked by caches strictly
        // between source and that edge.
        miss *= 1.0 - (profile.caches(nodes[k + 1], i) as u8 as f64);
    }
    Ok(lambda * total)
}

/// Deviation weights of every item for node `s`, one evaluation pass.
pub fn deviation_weights_for_node(
    net: &CachingNetwork,
    profile: &StrategyProfile,
    s: usize,
) -> Result<Vec<f64>> {
    (0..net.item_count())
        .map(|i| deviation_weight(net, profile, s, i))
        .collect()
}
