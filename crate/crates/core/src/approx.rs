//! Sequential approximate equilibria for the unequal-size game. Works on
//! instances with a single shared server and nested paths: nodes decide in
//! order of how many intermediates they depend on, so each knapsack sees
//! only already-fixed strategies.

use crate::cost::{caching_gain, deviation_weights_for_node};
use crate::equilibrium::{Deviation, EquilibriumResult, Method};
use crate::error::{Error, Result};
use crate::knapsack::{knapsack_exact, knapsack_half_approx, KnapsackSolution};
use crate::network::CachingNetwork;
use crate::profile::StrategyProfile;
use crate::properties::check_properties;

/// Margin for the deviation-payoff comparison.
const BETA_EPS: f64 = 1e-9;

fn sequential(net: &CachingNetwork, exact: bool) -> Result<EquilibriumResult> {
    let report = check_properties(net);
    if !report.cloud_property {
        return Err(Error::PropertyViolation {
            property: "cloud",
            witness: "items are not all served by one shared server node over one path per node"
                .to_string(),
        });
    }
    let Some(server) = report.cloud_server else {
        return Err(Error::PropertyViolation {
            property: "cloud",
            witness: "no item exists, so no shared server can be named".to_string(),
        });
    };
    if !report.path_overlap {
        let w = report.overlap_witness.as_ref().unwrap();
        return Err(Error::PropertyViolation {
            property: "path overlap",
            witness: format!(
                "node {} sits on the path of ({}, {}) but forwards differently",
                net.node_name(w.on_path_node),
                net.node_name(w.request_node),
                net.item_name(w.item)
            ),
        });
    }

    // Tier order: fewest intermediates first, index as tie-break. The server
    // itself never caches; everything it serves is already local.
    let mut order: Vec<usize> = (0..net.node_count()).filter(|&s| s != server).collect();
    order.sort_by_key(|&s| (report.tiers[s], s));

    let beta = if exact { 1.0 } else { 2.0 };
    let mut x = StrategyProfile::empty(net);
    let mut processed = 0u64;
    for &s in &order {
        let q = deviation_weights_for_node(net, &x, s)?;
        let sol: KnapsackSolution = if exact {
            knapsack_exact(&q, net.item_sizes(), net.capacity(s))?
        } else {
            knapsack_half_approx(&q, net.item_sizes(), net.capacity(s))?
        };
        for i in sol.chosen {
            x.insert(s, i);
        }
        processed += 1;
    }
    let verified = verify_beta_psne(net, &x, beta)?.0;
    Ok(EquilibriumResult {
        profile: x,
        method: Method::ApproxSequential,
        arcs_traversed: 0,
        rounds: processed,
        max_cascade: 0,
        verified,
        beta,
    })
}

/// One half-approximate knapsack per non-server node, in tier order. The
/// result is a 2-approximate equilibrium: no node can double its gain by
/// deviating alone.
pub fn find_beta_psne(net: &CachingNetwork) -> Result<EquilibriumResult> {
    sequential(net, false)
}

/// Same sweep with the exact knapsack, yielding an exact equilibrium: each
/// node's weights depend only on earlier tiers, so its choice stays a best
/// response in the final profile.
pub fn find_beta_psne_exact(net: &CachingNetwork) -> Result<EquilibriumResult> {
    sequential(net, true)
}

/// Checks that no node has a feasible deviation worth more than `beta`
/// times its current gain, using the exact knapsack for the best deviation.
/// Gains decompose into a part fixed by the other nodes plus the weights of
/// the node's own cached items, so both sides share the fixed part.
pub fn verify_beta_psne(
    net: &CachingNetwork,
    profile: &StrategyProfile,
    beta: f64,
) -> Result<(bool, Option<Deviation>)> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must be a finite value >= 1, got {beta}"
        )));
    }
    if !profile.is_feasible(net) {
        return Err(Error::InvalidParameter(
            "cannot verify an infeasible profile".to_string(),
        ));
    }
    let mut others = profile.clone();
    for s in 0..net.node_count() {
        let q = deviation_weights_for_node(net, profile, s)?;
        let saved = others.node_mask(s);
        others.clear_node(s);
        let fixed = caching_gain(net, &others, s)?;
        others.set_node_mask(s, saved);

        let current = fixed + profile.node_items(s).iter().map(|&i| q[i]).sum::<f64>();
        let best_sol = knapsack_exact(&q, net.item_sizes(), net.capacity(s))?;
        let best = fixed + best_sol.value;
        if best > beta * current + BETA_EPS {
            return Ok((false, Some(Deviation { node: s, better_set: best_sol.chosen })));
        }
    }
    Ok((true, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::verify_psne;
    use crate::network::NetworkBuilder;

    fn chain_with_sizes(sizes: &[f64], capacities: &[f64]) -> CachingNetwork {
        let mut b = NetworkBuilder::new();
        b.nodes(["1", "2", "3"])
            .sym_edge("1", "2", 2.0)
            .sym_edge("2", "3", 5.0);
        for (i, &l) in sizes.iter().enumerate() {
            let name = format!("i{i}");
            b.item(&name, l);
            b.server(&name, "3");
        }
        b.capacity("1", capacities[0]).capacity("2", capacities[1]).capacity("3", capacities[2]);
        for (i, _) in sizes.iter().enumerate() {
            let name = format!("i{i}");
            b.rate("1", &name, 1.0 + i as f64);
            b.rate("2", &name, 2.0);
        }
        b.synthesize_missing_paths();
        b.build().unwrap()
    }

    #[test]
    fn sequential_result_is_two_approximate() {
        let net = chain_with_sizes(&[1.0, 2.0, 3.0], &[3.0, 2.0, 0.0]);
        let r = find_beta_psne(&net).unwrap();
        assert_eq!(r.beta, 2.0);
        assert_eq!(r.rounds, 2);
        assert!(r.verified);
        assert!(verify_beta_psne(&net, &r.profile, 2.0).unwrap().0);
    }

    #[test]
    fn exact_sequential_is_an_exact_equilibrium() {
        let net = chain_with_sizes(&[1.0, 2.0, 3.0], &[3.0, 2.0, 0.0]);
        let r = find_beta_psne_exact(&net).unwrap();
        assert_eq!(r.beta, 1.0);
        assert!(r.verified);
    }

    #[test]
    fn equal_sizes_reduce_to_the_unit_game_equilibrium() {
        let net = chain_with_sizes(&[1.0, 1.0, 1.0], &[2.0, 1.0, 0.0]);
        let r = find_beta_psne_exact(&net).unwrap();
        assert!(verify_psne(&net, &r.profile).unwrap().0);
    }

    #[test]
    fn two_servers_violate_the_cloud_property() {
        let mut b = NetworkBuilder::new();
        b.nodes(["1", "2", "3"])
            .item("a", 1.0)
            .item("b", 2.0)
            .sym_edge("1", "2", 1.0)
            .sym_edge("1", "3", 1.0)
            .server("a", "2")
            .server("b", "3")
            .rate("1", "a", 1.0)
            .rate("1", "b", 1.0)
            .synthesize_missing_paths();
        let net = b.build().unwrap();
        assert!(matches!(
            find_beta_psne(&net),
            Err(Error::PropertyViolation { property: "cloud", .. })
        ));
    }

    #[test]
    fn beta_one_rejects_an_idle_cache_with_positive_weights() {
        let net = chain_with_sizes(&[1.0, 2.0], &[2.0, 0.0, 0.0]);
        let empty = StrategyProfile::empty(&net);
        let (ok, witness) = verify_beta_psne(&net, &empty, 1.0).unwrap();
        assert!(!ok);
        assert_eq!(witness.unwrap().node, 0);
    }

    #[test]
    fn any_exact_equilibrium_passes_every_beta() {
        let net = chain_with_sizes(&[1.0, 1.0], &[1.0, 1.0, 0.0]);
        let r = crate::equilibrium::find_psne_state_graph(&net, 0, None).unwrap();
        assert!(r.verified);
        for beta in [1.0, 1.5, 2.0, 10.0] {
            assert!(verify_beta_psne(&net, &r.profile, beta).unwrap().0);
        }
    }
}
