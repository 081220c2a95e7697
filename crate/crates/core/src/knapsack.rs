//! Max-weight knapsack: an exact oracle (dynamic program for integer sizes,
//! branch and bound otherwise) and the greedy LP-relaxation rounding that
//! guarantees half the optimum. Per-node cache decisions in the unequal-size
//! game reduce to this problem.

use crate::error::{Error, Result};

/// Tolerance scale for value comparisons during reconstruction.
const VALUE_EPS: f64 = 1e-9;

/// Item budget for the branch-and-bound path.
const BB_ITEM_LIMIT: usize = 30;

/// Cell budget for the dynamic-programming path.
const DP_CELL_LIMIT: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    /// Chosen items, ascending.
    pub chosen: Vec<usize>,
    /// Total weight of the chosen items.
    pub value: f64,
    /// True when produced by the exact oracle.
    pub exact: bool,
    /// Fully packed items of the LP relaxation (approximation only).
    pub lp_integral: Vec<usize>,
    /// The at-most-one fractional item of the LP relaxation.
    pub lp_fractional: Option<usize>,
}

fn check_inputs(q: &[f64], sizes: &[f64], capacity: f64) -> Result<()> {
    if q.len() != sizes.len() {
        return Err(Error::InvalidKnapsack(format!(
            "{} weights but {} sizes",
            q.len(),
            sizes.len()
        )));
    }
    if !(capacity >= 0.0) || !capacity.is_finite() {
        return Err(Error::InvalidKnapsack(format!("capacity {capacity}")));
    }
    for (i, &w) in q.iter().enumerate() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidKnapsack(format!("weight {w} at item {i}")));
        }
    }
    for (i, &l) in sizes.iter().enumerate() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidKnapsack(format!("size {l} at item {i}")));
        }
    }
    Ok(())
}

/// Item order for bounding: weight per unit size descending, index ascending.
fn ratio_order(q: &[f64], sizes: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = q[a] / sizes[a];
        let rb = q[b] / sizes[b];
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    order
}

/// Depth-first max value over `order[pos..]` with the classic fractional
/// upper bound for pruning.
fn bb_max(q: &[f64], sizes: &[f64], order: &[usize], pos: usize, cap: f64, acc: f64, best: &mut f64) {
    if acc > *best {
        *best = acc;
    }
    if pos == order.len() {
        return;
    }
    let mut bound = acc;
    let mut room = cap;
    for &i in &order[pos..] {
        if sizes[i] <= room {
            bound += q[i];
            room -= sizes[i];
        } else {
            bound += q[i] * (room / sizes[i]);
            break;
        }
    }
    if bound <= *best {
        return;
    }
    let i = order[pos];
    if sizes[i] <= cap {
        bb_max(q, sizes, order, pos + 1, cap - sizes[i], acc + q[i], best);
    }
    bb_max(q, sizes, order, pos + 1, cap, acc, best);
}

/// Max value over the items with index > `after` under `cap`.
fn suffix_max(q: &[f64], sizes: &[f64], after: usize, cap: f64) -> f64 {
    let order: Vec<usize> = ratio_order(q, sizes)
        .into_iter()
        .filter(|&i| i > after)
        .collect();
    let mut best = 0.0;
    bb_max(q, sizes, &order, 0, cap, 0.0, &mut best);
    best
}

fn integer_sizes(sizes: &[f64]) -> bool {
    sizes.iter().all(|&l| l.fract() == 0.0)
}

/// Exact optimum of the per-node placement problem: maximize total weight
/// under the size budget. Integer sizes go through a dynamic program when
/// the table is small; anything else uses branch and bound, limited to 30
/// items. Among optima, the lexicographically smallest item set is returned.
pub fn knapsack_exact(q: &[f64], sizes: &[f64], capacity: f64) -> Result<KnapsackSolution> {
    check_inputs(q, sizes, capacity)?;
    let n = q.len();
    let total: f64 = sizes.iter().sum();
    // A budget covering every item makes the search degenerate: clamping it
    // to the exact total turns every fit check into a rounding coin flip.
    // Take items in index order until nothing of value remains instead.
    if total <= capacity {
        let optimum: f64 = q.iter().sum();
        let tol = VALUE_EPS * optimum.abs().max(1.0);
        let mut chosen = Vec::new();
        let mut acc = 0.0;
        for i in 0..n {
            if acc >= optimum - tol {
                break;
            }
            chosen.push(i);
            acc += q[i];
        }
        return Ok(KnapsackSolution {
            chosen,
            value: acc,
            exact: true,
            lp_integral: Vec::new(),
            lp_fractional: None,
        });
    }
    let cap = capacity;
    let use_dp = integer_sizes(sizes)
        && (n as u128) * (cap as u128 + 1) <= DP_CELL_LIMIT;
    if !use_dp && n > BB_ITEM_LIMIT {
        return Err(Error::KnapsackTooLarge { items: n });
    }

    let (optimum, suffix_best): (f64, Box<dyn Fn(usize, f64) -> f64>) = if use_dp {
        let w_max = cap as usize;
        // dp[pos][w]: best value using items pos.. within capacity w.
        let mut dp = vec![vec![0.0f64; w_max + 1]; n + 1];
        for pos in (0..n).rev() {
            let l = sizes[pos] as usize;
            for w in 0..=w_max {
                let skip = dp[pos + 1][w];
                let take = if l <= w { dp[pos + 1][w - l] + q[pos] } else { f64::NEG_INFINITY };
                dp[pos][w] = skip.max(take);
            }
        }
        let opt = dp[0][w_max];
        (
            opt,
            Box::new(move |after: usize, room: f64| dp[after + 1][(room as usize).min(w_max)]),
        )
    } else {
        let order = ratio_order(q, sizes);
        let mut best = 0.0;
        bb_max(q, sizes, &order, 0, cap, 0.0, &mut best);
        let (q2, s2) = (q.to_vec(), sizes.to_vec());
        (best, Box::new(move |after, room| suffix_max(&q2, &s2, after, room)))
    };

    // Lexicographically smallest optimal set: stop as soon as the prefix
    // already reaches the optimum, otherwise take the item whenever the
    // optimum stays reachable with it.
    let tol = VALUE_EPS * optimum.abs().max(1.0);
    let mut chosen = Vec::new();
    let mut room = cap;
    let mut acc = 0.0;
    for i in 0..n {
        if acc >= optimum - tol {
            break;
        }
        if sizes[i] <= room && acc + q[i] + suffix_best(i, room - sizes[i]) >= optimum - tol {
            chosen.push(i);
            acc += q[i];
            room -= sizes[i];
        }
    }
    Ok(KnapsackSolution {
        chosen,
        value: acc,
        exact: true,
        lp_integral: Vec::new(),
        lp_fractional: None,
    })
}

/// Greedy LP-relaxation rounding: pack by weight-per-size until the first
/// item no longer fits (that one stays fractional), then keep either the
/// packed set or the fractional item alone, whichever weighs more. Value is
/// at least half the exact optimum.
pub fn knapsack_half_approx(q: &[f64], sizes: &[f64], capacity: f64) -> Result<KnapsackSolution> {
    check_inputs(q, sizes, capacity)?;
    // Items beyond the whole budget can never be packed; dropping them up
    // front keeps the one-item fallback feasible.
    let order: Vec<usize> = ratio_order(q, sizes)
        .into_iter()
        .filter(|&i| sizes[i] <= capacity)
        .collect();
    let mut integral = Vec::new();
    let mut fractional = None;
    let mut room = capacity;
    for &i in &order {
        if sizes[i] <= room {
            integral.push(i);
            room -= sizes[i];
        } else {
            if room > 0.0 {
                fractional = Some(i);
            }
            break;
        }
    }
    integral.sort_unstable();
    let integral_value: f64 = integral.iter().map(|&i| q[i]).sum();
    let chosen = match fractional {
        Some(f) if q[f] >= integral_value => vec![f],
        _ => integral.clone(),
    };
    let value = chosen.iter().map(|&i| q[i]).sum();
    Ok(KnapsackSolution {
        chosen,
        value,
        exact: false,
        lp_integral: integral,
        lp_fractional: fractional,
    })
}
