//! Efficiency analysis: exact social optimum by enumeration, the concave
//! surrogate upper bound from the LP relaxation, discrete curvature, and
//! certification of the price-of-anarchy bounds against those oracles.

use serde::Serialize;

use crate::cost::social_welfare;
use crate::error::{Error, Result};
use crate::network::CachingNetwork;
use crate::profile::{feasible_sets_per_node, search_space_size, StrategyProfile};
use crate::properties::{check_properties, PropertyReport};
use crate::simplex::LinearProgram;

/// Tolerance for bound satisfaction checks.
pub const BOUND_EPS: f64 = 1e-9;

/// Default cap on enumerated profiles for the optimum search.
pub const DEFAULT_OPT_LIMIT: u64 = 10_000_000;

/// A fractional placement: per (node, item) share in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPlacement {
    values: Vec<f64>,
    n_items: usize,
}

impl FractionalPlacement {
    pub fn zero(net: &CachingNetwork) -> Self {
        FractionalPlacement {
            values: vec![0.0; net.node_count() * net.item_count()],
            n_items: net.item_count(),
        }
    }

    pub fn get(&self, node: usize, item: usize) -> f64 {
        self.values[node * self.n_items + item]
    }

    pub fn set(&mut self, node: usize, item: usize, phi: f64) {
        self.values[node * self.n_items + item] = phi;
    }

    /// Sum of fractional shares at a node, weighted by item sizes.
    pub fn load(&self, net: &CachingNetwork, node: usize) -> f64 {
        (0..self.n_items)
            .map(|i| net.item_size(i) * self.get(node, i))
            .sum()
    }
}

/// Exact maximizer of social welfare over feasible profiles, by enumeration
/// in lexicographic order (ties keep the first maximizer). Refuses when the
/// search space exceeds `limit`.
pub fn brute_force_optimum(
    net: &CachingNetwork,
    limit: Option<u64>,
) -> Result<(StrategyProfile, f64)> {
    let limit = limit.unwrap_or(DEFAULT_OPT_LIMIT);
    let per_node = feasible_sets_per_node(net);
    let size = search_space_size(&per_node);
    if size > limit as u128 {
        return Err(Error::SearchSpaceExceeded { size, limit });
    }
    let n = net.node_count();
    let mut idx = vec![0usize; n];
    let mut x = StrategyProfile::empty(net);
    let mut best = x.clone();
    let mut best_value = social_welfare(net, &x)?;
    'outer: loop {
        for s in (0..n).rev() {
            idx[s] += 1;
            if idx[s] < per_node[s].len() {
                x.set_node_mask(s, per_node[s][idx[s]]);
                for t in s + 1..n {
                    x.set_node_mask(t, per_node[t][0]);
                }
                let value = social_welfare(net, &x)?;
                if value > best_value {
                    best_value = value;
                    best = x.clone();
                }
                continue 'outer;
            }
            idx[s] = 0;
        }
        break;
    }
    Ok((best, best_value))
}

/// Welfare of a fractional placement: the placement products in the routing
/// cost take fractional shares as-is.
pub fn welfare_fractional(net: &CachingNetwork, phi: &FractionalPlacement) -> Result<f64> {
    let mut total = 0.0;
    for &(s, i) in net.positive_requests() {
        let Some(p) = net.path(s, i) else {
            return Err(Error::MissingPath {
                node: net.node_name(s).to_string(),
                item: net.item_name(i).to_string(),
            });
        };
        let lambda = net.rate(s, i);
        let nodes = p.nodes();
        let mut miss = 1.0 - phi.get(nodes[0], i);
        let mut cost = 0.0;
        for (k, &w) in p.rev_costs().iter().enumerate() {
            cost += w * miss;
            miss *= 1.0 - phi.get(nodes[k + 1], i);
        }
        total += lambda * (p.full_cost() - cost);
    }
    Ok(total)
}

/// The concave surrogate: joint placement along each path prefix counts
/// additively, saturating at 1.
pub fn l_value(net: &CachingNetwork, phi: &FractionalPlacement) -> Result<f64> {
    let mut total = 0.0;
    for &(s, i) in net.positive_requests() {
        let Some(p) = net.path(s, i) else {
            return Err(Error::MissingPath {
                node: net.node_name(s).to_string(),
                item: net.item_name(i).to_string(),
            });
        };
        let lambda = net.rate(s, i);
        let nodes = p.nodes();
        let mut prefix = 0.0;
        for (k, &w) in p.rev_costs().iter().enumerate() {
            prefix += phi.get(nodes[k], i);
            total += lambda * w * prefix.min(1.0);
        }
    }
    Ok(total)
}

/// Maximizes the surrogate over fractional placements under the capacity
/// constraints. The result upper-bounds the exact optimal welfare.
///
/// Linearization: one auxiliary variable per (request, path prefix), capped
/// at 1 and at the prefix placement sum, with objective weight rate x edge
/// cost. Returns the optimal placement and its surrogate value.
pub fn lp_upper_bound(net: &CachingNetwork) -> Result<(FractionalPlacement, f64)> {
    let n = net.node_count();
    let m = net.item_count();
    let phi_var = |s: usize, i: usize| s * m + i;
    let mut num_vars = n * m;
    let mut objective = vec![0.0; n * m];
    // (request, prefix) -> t variable, built alongside the objective.
    let mut t_vars: Vec<(usize, usize, usize)> = Vec::new();
    for &(s, i) in net.positive_requests() {
        let p = net.path(s, i).ok_or_else(|| Error::MissingPath {
            node: net.node_name(s).to_string(),
            item: net.item_name(i).to_string(),
        })?;
        for (k, &w) in p.rev_costs().iter().enumerate() {
            t_vars.push((s, i, k));
            objective.push(net.rate(s, i) * w);
            num_vars += 1;
        }
    }
    let mut lp = LinearProgram::new(num_vars, objective);
    for s in 0..n {
        let coeffs = (0..m).map(|i| (phi_var(s, i), net.item_size(i))).collect();
        lp.add_row_leq(coeffs, net.capacity(s));
    }
    for j in 0..n * m {
        lp.add_row_leq(vec![(j, 1.0)], 1.0);
    }
    for (t_idx, &(s, i, k)) in t_vars.iter().enumerate() {
        let t = n * m + t_idx;
        lp.add_row_leq(vec![(t, 1.0)], 1.0);
        let p = net.path(s, i).unwrap();
        let mut coeffs = vec![(t, 1.0)];
        for &v in &p.nodes()[..=k] {
            coeffs.push((phi_var(v, i), -1.0));
        }
        lp.add_row_leq(coeffs, 0.0);
    }
    let sol = lp.maximize()?;
    let mut phi = FractionalPlacement::zero(net);
    for s in 0..n {
        for i in 0..m {
            phi.set(s, i, sol.x[phi_var(s, i)].clamp(0.0, 1.0));
        }
    }
    // Report the surrogate of the clamped placement so the value and the
    // placement always agree exactly.
    let value = l_value(net, &phi)?;
    Ok((phi, value))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature {
    /// How much a single node's marginal welfare shrinks when everyone else
    /// caches everything: 0 means not at all, 1 means completely.
    pub delta: f64,
    /// False when no single-node strategy has a positive marginal on the
    /// empty profile, which forces delta to 0 by convention.
    pub any_positive_marginal: bool,
}

/// Evaluates the curvature definition by enumerating every feasible
/// single-node strategy. The complementary profile (the node holds the
/// complement, everyone else holds everything) is deliberately infeasible.
pub fn discrete_curvature(net: &CachingNetwork) -> Result<Curvature> {
    let per_node = feasible_sets_per_node(net);
    let full = StrategyProfile::full(net);
    let welfare_full = social_welfare(net, &full)?;
    let mut delta: f64 = 0.0;
    let mut any = false;
    let mut lone = StrategyProfile::empty(net);
    let mut complement = full.clone();
    for s in 0..net.node_count() {
        for &mask in &per_node[s] {
            if mask == 0 {
                continue;
            }
            lone.set_node_mask(s, mask);
            let marginal_empty = social_welfare(net, &lone)?;
            lone.clear_node(s);
            if marginal_empty <= 0.0 {
                continue;
            }
            any = true;
            complement.set_node_mask(s, full.node_mask(s) & !mask);
            let marginal_full = welfare_full - social_welfare(net, &complement)?;
            complement.set_node_mask(s, full.node_mask(s));
            delta = delta.max((marginal_empty - marginal_full) / marginal_empty);
        }
    }
    Ok(Curvature { delta: delta.clamp(0.0, 1.0), any_positive_marginal: any })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    /// Preconditions hold and the inequality was checked true.
    Satisfied,
    /// Preconditions hold but the inequality failed.
    Violated,
    /// The instance does not satisfy the theorem's preconditions.
    NotApplicable,
    /// Preconditions hold but the exact ratio is unavailable.
    NotCheckable,
}

/// Welfare values, ratios, and bound checks for one instance.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    /// Worst and best welfare over the supplied equilibria.
    pub welfare_ne_worst: Option<f64>,
    pub welfare_ne_best: Option<f64>,
    /// Exact optimum when the search space fit the limit.
    pub welfare_opt_exact: Option<f64>,
    /// Surrogate LP optimum; always an upper bound on the exact optimum.
    pub welfare_opt_upper: f64,
    /// welfare_ne_worst / welfare_opt_exact, when both exist and the
    /// optimum is positive.
    pub poa_exact: Option<f64>,
    /// welfare_ne_worst / welfare_opt_upper: understates the true ratio, so
    /// it is never called a price of anarchy.
    pub ratio_upper: Option<f64>,
    pub alpha: usize,
    pub delta_g: f64,
    /// Guaranteed ratio floors from the three theorems, capped at 1.
    pub poa_lower_bound_scalable: f64,
    pub poa_lower_bound_curvature: f64,
    pub poa_lower_bound_beta: f64,
    pub bound_scalable: BoundStatus,
    pub bound_curvature: BoundStatus,
    pub bound_beta: BoundStatus,
    pub homogeneous_requests: bool,
    pub path_overlap: bool,
    pub cloud_property: bool,
    pub has_mixed_request_loop: bool,
    pub beta: f64,
}

fn bound_status(applicable: bool, poa: Option<f64>, floor: f64) -> BoundStatus {
    if !applicable {
        BoundStatus::NotApplicable
    } else {
        match poa {
            Some(r) if r >= floor - BOUND_EPS => BoundStatus::Satisfied,
            Some(_) => BoundStatus::Violated,
            None => BoundStatus::NotCheckable,
        }
    }
}

/// Assembles the full report for an instance and a set of equilibria (exact
/// or beta-approximate; pass the enumerated list for certification). The
/// exact optimum falls back to `None` when enumeration would exceed
/// `limit`; every other failure propagates.
pub fn certify_bounds(
    net: &CachingNetwork,
    equilibria: &[StrategyProfile],
    beta: f64,
    limit: Option<u64>,
) -> Result<AnalysisReport> {
    let props: PropertyReport = check_properties(net);
    let mut worst = None;
    let mut best = None;
    for x in equilibria {
        let g = social_welfare(net, x)?;
        worst = Some(worst.map_or(g, |w: f64| w.min(g)));
        best = Some(best.map_or(g, |b: f64| b.max(g)));
    }
    let opt_exact = match brute_force_optimum(net, limit) {
        Ok((_, v)) => Some(v),
        Err(Error::SearchSpaceExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let (_, upper) = lp_upper_bound(net)?;
    let curvature = discrete_curvature(net)?;
    let alpha = props.alpha;

    let poa_exact = match (worst, opt_exact) {
        (Some(w), Some(o)) if o > 0.0 => Some(w / o),
        _ => None,
    };
    let ratio_upper = worst.filter(|_| upper > 0.0).map(|w| w / upper);

    let a = alpha as f64;
    let floor_scalable = (1.0 / (1.0 + a)).min(1.0);
    let floor_curvature = if a + curvature.delta > 0.0 {
        (1.0 / (a + curvature.delta)).min(1.0)
    } else {
        1.0
    };
    let floor_beta = (1.0 / (1.0 + a * beta)).min(1.0);

    let exact_applicable =
        props.homogeneous_requests && props.path_overlap && !props.has_mixed_request_loop;
    let beta_applicable = exact_applicable && props.cloud_property;

    Ok(AnalysisReport {
        welfare_ne_worst: worst,
        welfare_ne_best: best,
        welfare_opt_exact: opt_exact,
        welfare_opt_upper: upper,
        poa_exact,
        ratio_upper,
        alpha,
        delta_g: curvature.delta,
        poa_lower_bound_scalable: floor_scalable,
        poa_lower_bound_curvature: floor_curvature,
        poa_lower_bound_beta: floor_beta,
        bound_scalable: bound_status(exact_applicable, poa_exact, floor_scalable),
        bound_curvature: bound_status(exact_applicable, poa_exact, floor_curvature),
        bound_beta: bound_status(beta_applicable, poa_exact, floor_beta),
        homogeneous_requests: props.homogeneous_requests,
        path_overlap: props.path_overlap,
        cloud_property: props.cloud_property,
        has_mixed_request_loop: props.has_mixed_request_loop,
        beta,
    })
}
