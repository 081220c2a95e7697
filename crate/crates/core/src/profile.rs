use crate::network::CachingNetwork;

/// Tolerance used when comparing cache loads against capacities.
pub const FEASIBILITY_EPS: f64 = 1e-9;

/// Binary placement x: one item bitmask per node. Networks are capped at 64
/// items so a node's cache always fits in a word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyProfile {
    masks: Vec<u64>,
    n_items: usize,
}

impl StrategyProfile {
    pub fn empty(net: &CachingNetwork) -> Self {
        StrategyProfile {
            masks: vec![0; net.node_count()],
            n_items: net.item_count(),
        }
    }

    pub fn full(net: &CachingNetwork) -> Self {
        let all = mask_all(net.item_count());
        StrategyProfile {
            masks: vec![all; net.node_count()],
            n_items: net.item_count(),
        }
    }

    /// Builds a profile from per-node item lists. Item indices out of range
    /// are a caller bug and panic.
    pub fn from_sets(net: &CachingNetwork, sets: &[Vec<usize>]) -> Self {
        assert_eq!(sets.len(), net.node_count(), "one item set per node");
        let mut p = StrategyProfile::empty(net);
        for (s, items) in sets.iter().enumerate() {
            for &i in items {
                p.insert(s, i);
            }
        }
        p
    }

    pub fn node_count(&self) -> usize {
        self.masks.len()
    }

    pub fn item_count(&self) -> usize {
        self.n_items
    }

    #[inline]
    pub fn caches(&self, node: usize, item: usize) -> bool {
        debug_assert!(item < self.n_items);
        self.masks[node] >> item & 1 == 1
    }

    #[inline]
    pub fn node_mask(&self, node: usize) -> u64 {
        self.masks[node]
    }

    pub fn set_node_mask(&mut self, node: usize, mask: u64) {
        debug_assert!(mask & !mask_all(self.n_items) == 0, "mask within item range");
        self.masks[node] = mask;
    }

    pub fn insert(&mut self, node: usize, item: usize) {
        assert!(item < self.n_items);
        self.masks[node] |= 1 << item;
    }

    pub fn remove(&mut self, node: usize, item: usize) {
        assert!(item < self.n_items);
        self.masks[node] &= !(1 << item);
    }

    pub fn clear_node(&mut self, node: usize) {
        self.masks[node] = 0;
    }

    /// Items cached at `node`, ascending.
    pub fn node_items(&self, node: usize) -> Vec<usize> {
        mask_items(self.masks[node])
    }

    pub fn cached_count(&self, node: usize) -> usize {
        self.masks[node].count_ones() as usize
    }

    /// Total size of the items cached at `node`.
    pub fn load(&self, net: &CachingNetwork, node: usize) -> f64 {
        mask_items(self.masks[node])
            .iter()
            .map(|&i| net.item_size(i))
            .sum()
    }

    /// True when every node's cache load fits its capacity. Infeasible
    /// profiles are still evaluable by the cost operations.
    pub fn is_feasible(&self, net: &CachingNetwork) -> bool {
        (0..self.masks.len()).all(|s| self.load(net, s) <= net.capacity(s) + FEASIBILITY_EPS)
    }

    /// True when `self` places a subset of `other`'s items at every node.
    pub fn is_subprofile_of(&self, other: &StrategyProfile) -> bool {
        self.masks
            .iter()
            .zip(&other.masks)
            .all(|(a, b)| a & !b == 0)
    }
}

pub fn mask_all(n_items: usize) -> u64 {
    debug_assert!(n_items <= 64);
    if n_items == 64 {
        u64::MAX
    } else {
        (1u64 << n_items) - 1
    }
}

pub fn mask_items(mask: u64) -> Vec<usize> {
    let mut items = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        items.push(i);
        m &= m - 1;
    }
    items
}

/// All item subsets with at most `max_items` elements, in lexicographic order
/// of their sorted element lists: {} < {0} < {0,1} < ... < {1} < {1,2} < ...
pub fn subsets_up_to_count(n_items: usize, max_items: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let cap = max_items.min(n_items);
    fn rec(out: &mut Vec<u64>, prefix: u64, count: usize, next: usize, n: usize, cap: usize) {
        out.push(prefix);
        if count == cap {
            return;
        }
        for i in next..n {
            rec(out, prefix | 1 << i, count + 1, i + 1, n, cap);
        }
    }
    rec(&mut out, 0, 0, 0, n_items, cap);
    out
}

/// All item subsets whose total size fits `capacity`, in the same
/// lexicographic order as `subsets_up_to_count`.
pub fn subsets_within_capacity(sizes: &[f64], capacity: f64) -> Vec<u64> {
    let mut out = Vec::new();
    fn rec(out: &mut Vec<u64>, prefix: u64, used: f64, next: usize, sizes: &[f64], cap: f64) {
        out.push(prefix);
        for i in next..sizes.len() {
            if used + sizes[i] <= cap + FEASIBILITY_EPS {
                rec(out, prefix | 1 << i, used + sizes[i], i + 1, sizes, cap);
            }
        }
    }
    rec(&mut out, 0, 0.0, 0, sizes, capacity);
    out
}

/// Per-node lists of feasible caches, in index order of nodes.
pub fn feasible_sets_per_node(net: &CachingNetwork) -> Vec<Vec<u64>> {
    (0..net.node_count())
        .map(|s| {
            if net.unit_sizes() {
                let c = net.capacity(s).max(0.0).floor() as usize;
                subsets_up_to_count(net.item_count(), c)
            } else {
                subsets_within_capacity(net.item_sizes(), net.capacity(s))
            }
        })
        .collect()
}

/// Number of feasible profiles, saturating at `u128::MAX`.
pub fn search_space_size(per_node: &[Vec<u64>]) -> u128 {
    per_node
        .iter()
        .fold(1u128, |acc, v| acc.saturating_mul(v.len() as u128))
}
