use std::collections::{BTreeMap, BinaryHeap, HashMap};

use crate::error::{Error, Result};

/// A request forwarding path, precomputed for cost evaluation.
///
/// `nodes` is the request direction (source first, designated server last).
/// `rev_costs[k]` is the cost of the content-transfer edge
/// (nodes[k+1], nodes[k]); responses travel the path backwards. A path whose
/// reverse edges are not all present is kept but marked incomplete, and cost
/// operations on it fail.
#[derive(Debug, Clone, PartialEq)]
pub struct ReqPath {
    pub(crate) nodes: Vec<usize>,
    pub(crate) rev_costs: Vec<f64>,
    pub(crate) full_cost: f64,
    pub(crate) complete: bool,
}

impl ReqPath {
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn rev_costs(&self) -> &[f64] {
        &self.rev_costs
    }

    /// Routing cost of the request when nothing is cached.
    pub fn full_cost(&self) -> f64 {
        self.full_cost
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// Number of edges.
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// An immutable caching network: directed graph with edge transfer costs,
/// items with sizes, per-node cache capacities, designated servers, request
/// rates, and fixed request forwarding paths.
///
/// Node and item identifiers are strings externally; all operations work on
/// dense indices in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CachingNetwork {
    node_names: Vec<String>,
    item_names: Vec<String>,
    item_sizes: Vec<f64>,
    capacities: Vec<f64>,
    edges: BTreeMap<(usize, usize), f64>,
    servers: Vec<Vec<usize>>,
    rates: Vec<f64>,
    paths: Vec<Option<ReqPath>>,
    unit_sizes: bool,
    positive_requests: Vec<(usize, usize)>,
}

impl CachingNetwork {
    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_names.len()
    }

    pub fn node_name(&self, node: usize) -> &str {
        &self.node_names[node]
    }

    pub fn item_name(&self, item: usize) -> &str {
        &self.item_names[item]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn item_index(&self, name: &str) -> Option<usize> {
        self.item_names.iter().position(|n| n == name)
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn item_names(&self) -> &[String] {
        &self.item_names
    }

    pub fn item_size(&self, item: usize) -> f64 {
        self.item_sizes[item]
    }

    pub fn item_sizes(&self) -> &[f64] {
        &self.item_sizes
    }

    /// True when every item has size exactly 1.
    pub fn unit_sizes(&self) -> bool {
        self.unit_sizes
    }

    pub fn capacity(&self, node: usize) -> f64 {
        self.capacities[node]
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn edge_cost(&self, from: usize, to: usize) -> Option<f64> {
        self.edges.get(&(from, to)).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Designated servers of `item`, ascending.
    pub fn servers(&self, item: usize) -> &[usize] {
        &self.servers[item]
    }

    pub fn is_server(&self, node: usize, item: usize) -> bool {
        self.servers[item].binary_search(&node).is_ok()
    }

    pub fn rate(&self, node: usize, item: usize) -> f64 {
        self.rates[node * self.item_names.len() + item]
    }

    pub fn path(&self, node: usize, item: usize) -> Option<&ReqPath> {
        self.paths[node * self.item_names.len() + item].as_ref()
    }

    /// Requests with a strictly positive rate, in (node, item) index order.
    pub fn positive_requests(&self) -> &[(usize, usize)] {
        &self.positive_requests
    }

    /// Number of cache slots usable by the unit-size game at `node`.
    /// Fails on non-integer capacity.
    pub fn cache_slots(&self, node: usize) -> Result<usize> {
        let c = self.capacities[node];
        if c < 0.0 || c.fract() != 0.0 || !c.is_finite() {
            return Err(Error::NonIntegerCapacity {
                node: self.node_names[node].clone(),
                capacity: c,
            });
        }
        Ok((c as usize).min(self.item_count()))
    }

    /// Copy with every capacity replaced by `c`.
    pub fn with_uniform_capacity(&self, c: f64) -> CachingNetwork {
        let mut net = self.clone();
        net.capacities = vec![c; net.node_names.len()];
        net
    }

    /// Copy with per-node capacities replaced.
    pub fn with_capacities(&self, capacities: Vec<f64>) -> CachingNetwork {
        assert_eq!(capacities.len(), self.node_names.len());
        let mut net = self.clone();
        net.capacities = capacities;
        net
    }

    /// Copy with the given nodes' request rates set to zero. Paths stay.
    pub fn with_rates_zeroed(&self, nodes: &[usize]) -> CachingNetwork {
        let mut net = self.clone();
        let m = net.item_names.len();
        for &s in nodes {
            for i in 0..m {
                net.rates[s * m + i] = 0.0;
            }
        }
        net.positive_requests = collect_positive(&net.rates, net.node_names.len(), m);
        net
    }

    pub(crate) fn to_parts(&self) -> NetworkParts {
        let m = self.item_names.len();
        let mut rates = BTreeMap::new();
        let mut paths = BTreeMap::new();
        for s in 0..self.node_names.len() {
            for i in 0..m {
                let r = self.rates[s * m + i];
                if r != 0.0 {
                    rates.insert((s, i), r);
                }
                if let Some(p) = &self.paths[s * m + i] {
                    paths.insert((s, i), p.nodes.clone());
                }
            }
        }
        NetworkParts {
            node_names: self.node_names.clone(),
            item_names: self.item_names.clone(),
            item_sizes: self.item_sizes.clone(),
            capacities: self.capacities.clone(),
            edges: self.edges.clone(),
            servers: self.servers.clone(),
            rates,
            paths,
        }
    }

    pub(crate) fn from_parts(parts: NetworkParts) -> Result<CachingNetwork> {
        let n = parts.node_names.len();
        let m = parts.item_names.len();
        if m > 64 {
            return Err(Error::TooManyItems { items: m });
        }
        let mut rates = vec![0.0; n * m];
        for ((s, i), r) in &parts.rates {
            rates[s * m + i] = *r;
        }
        let mut paths = vec![None; n * m];
        for ((s, i), nodes) in parts.paths {
            let mut rev_costs = Vec::with_capacity(nodes.len().saturating_sub(1));
            let mut complete = true;
            for k in 0..nodes.len().saturating_sub(1) {
                match parts.edges.get(&(nodes[k + 1], nodes[k])) {
                    Some(&w) => rev_costs.push(w),
                    None => {
                        rev_costs.push(f64::NAN);
                        complete = false;
                    }
                }
            }
            let full_cost = if complete { rev_costs.iter().sum() } else { f64::NAN };
            paths[s * m + i] = Some(ReqPath {
                nodes,
                rev_costs,
                full_cost,
                complete,
            });
        }
        let positive_requests = collect_positive(&rates, n, m);
        let unit_sizes = parts.item_sizes.iter().all(|&l| l == 1.0);
        Ok(CachingNetwork {
            node_names: parts.node_names,
            item_names: parts.item_names,
            item_sizes: parts.item_sizes,
            capacities: parts.capacities,
            edges: parts.edges,
            servers: parts.servers,
            rates,
            paths,
            unit_sizes,
            positive_requests,
        })
    }
}

fn collect_positive(rates: &[f64], n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for s in 0..n {
        for i in 0..m {
            if rates[s * m + i] > 0.0 {
                v.push((s, i));
            }
        }
    }
    v
}

/// Raw resolved network pieces, used by the builder and by transformations
/// that rewrite topology.
#[derive(Debug, Clone)]
pub(crate) struct NetworkParts {
    pub node_names: Vec<String>,
    pub item_names: Vec<String>,
    pub item_sizes: Vec<f64>,
    pub capacities: Vec<f64>,
    pub edges: BTreeMap<(usize, usize), f64>,
    pub servers: Vec<Vec<usize>>,
    pub rates: BTreeMap<(usize, usize), f64>,
    pub paths: BTreeMap<(usize, usize), Vec<usize>>,
}

/// Assembles a `CachingNetwork` by name. Resolution problems (unknown names,
/// duplicates) are collected and reported by `build`; semantic problems
/// (negative costs, broken paths) are left for `validate_network`.
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    nodes: Vec<String>,
    node_idx: HashMap<String, usize>,
    items: Vec<String>,
    item_idx: HashMap<String, usize>,
    sizes: Vec<f64>,
    capacities: HashMap<usize, f64>,
    edges: BTreeMap<(usize, usize), f64>,
    servers: BTreeMap<usize, Vec<usize>>,
    rates: BTreeMap<(usize, usize), f64>,
    paths: BTreeMap<(usize, usize), Vec<usize>>,
    synthesize: bool,
    errors: Vec<String>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        NetworkBuilder::default()
    }

    pub fn node(&mut self, name: &str) -> &mut Self {
        if self.node_idx.contains_key(name) {
            self.errors.push(format!("duplicate node {name:?}"));
        } else {
            self.node_idx.insert(name.to_string(), self.nodes.len());
            self.nodes.push(name.to_string());
        }
        self
    }

    pub fn nodes<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) -> &mut Self {
        for n in names {
            self.node(n);
        }
        self
    }

    pub fn item(&mut self, name: &str, size: f64) -> &mut Self {
        if self.item_idx.contains_key(name) {
            self.errors.push(format!("duplicate item {name:?}"));
        } else {
            self.item_idx.insert(name.to_string(), self.items.len());
            self.items.push(name.to_string());
            self.sizes.push(size);
        }
        self
    }

    pub fn capacity(&mut self, node: &str, c: f64) -> &mut Self {
        if let Some(s) = self.resolve_node(node) {
            if self.capacities.insert(s, c).is_some() {
                self.errors.push(format!("duplicate capacity for node {node:?}"));
            }
        }
        self
    }

    /// Directed edge with a transfer cost.
    pub fn edge(&mut self, from: &str, to: &str, cost: f64) -> &mut Self {
        if let (Some(u), Some(v)) = (self.resolve_node(from), self.resolve_node(to)) {
            if u == v {
                self.errors.push(format!("self-loop edge at {from:?}"));
            } else if self.edges.insert((u, v), cost).is_some() {
                self.errors.push(format!("duplicate edge ({from:?}, {to:?})"));
            }
        }
        self
    }

    /// Both directions with the same cost.
    pub fn sym_edge(&mut self, a: &str, b: &str, cost: f64) -> &mut Self {
        self.edge(a, b, cost).edge(b, a, cost)
    }

    pub fn server(&mut self, item: &str, node: &str) -> &mut Self {
        if let (Some(i), Some(s)) = (self.resolve_item(item), self.resolve_node(node)) {
            let list = self.servers.entry(i).or_default();
            if list.contains(&s) {
                self.errors
                    .push(format!("node {node:?} listed twice as server of item {item:?}"));
            } else {
                list.push(s);
            }
        }
        self
    }

    pub fn rate(&mut self, node: &str, item: &str, lambda: f64) -> &mut Self {
        if let (Some(s), Some(i)) = (self.resolve_node(node), self.resolve_item(item)) {
            if self.rates.insert((s, i), lambda).is_some() {
                self.errors
                    .push(format!("duplicate rate for ({node:?}, {item:?})"));
            }
        }
        self
    }

    pub fn path<'a>(
        &mut self,
        node: &str,
        item: &str,
        nodes: impl IntoIterator<Item = &'a str>,
    ) -> &mut Self {
        let resolved: Vec<Option<usize>> = nodes.into_iter().map(|n| self.resolve_node(n)).collect();
        if let (Some(s), Some(i)) = (self.resolve_node(node), self.resolve_item(item)) {
            if resolved.is_empty() {
                self.errors
                    .push(format!("empty path for ({node:?}, {item:?})"));
            } else if let Some(seq) = resolved.into_iter().collect::<Option<Vec<usize>>>() {
                if self.paths.insert((s, i), seq).is_some() {
                    self.errors
                        .push(format!("duplicate path for ({node:?}, {item:?})"));
                }
            }
        }
        self
    }

    /// Fill in every missing (node, item) path with a cheapest route to the
    /// nearest designated server, measured by content-transfer cost. Ties
    /// break toward the lexicographically smallest node sequence. Requires
    /// strictly positive edge costs; fails if a positive-rate request stays
    /// unroutable.
    pub fn synthesize_missing_paths(&mut self) -> &mut Self {
        self.synthesize = true;
        self
    }

    fn resolve_node(&mut self, name: &str) -> Option<usize> {
        match self.node_idx.get(name) {
            Some(&s) => Some(s),
            None => {
                self.errors.push(format!("unknown node {name:?}"));
                None
            }
        }
    }

    fn resolve_item(&mut self, name: &str) -> Option<usize> {
        match self.item_idx.get(name) {
            Some(&i) => Some(i),
            None => {
                self.errors.push(format!("unknown item {name:?}"));
                None
            }
        }
    }

    pub fn build(&mut self) -> Result<CachingNetwork> {
        if let Some(e) = self.errors.first() {
            return Err(Error::InvalidParameter(e.clone()));
        }
        let n = self.nodes.len();
        let m = self.items.len();
        let mut servers = vec![Vec::new(); m];
        for (i, list) in &self.servers {
            let mut list = list.clone();
            list.sort_unstable();
            servers[*i] = list;
        }
        let mut parts = NetworkParts {
            node_names: self.nodes.clone(),
            item_names: self.items.clone(),
            item_sizes: self.sizes.clone(),
            capacities: (0..n)
                .map(|s| self.capacities.get(&s).copied().unwrap_or(0.0))
                .collect(),
            edges: self.edges.clone(),
            servers,
            rates: self.rates.clone(),
            paths: self.paths.clone(),
        };
        if self.synthesize {
            synthesize_paths(&mut parts)?;
        }
        CachingNetwork::from_parts(parts)
    }
}

/// Cheapest-route synthesis toward each item's nearest server. A request step
/// (a, b) is usable only when both (a, b) and the content edge (b, a) exist;
/// its weight is the content cost w(b, a).
pub(crate) fn synthesize_paths(parts: &mut NetworkParts) -> Result<()> {
    let n = parts.node_names.len();
    for (&(u, v), &w) in &parts.edges {
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "path synthesis needs strictly positive edge costs; edge ({}, {}) has {w}",
                parts.node_names[u], parts.node_names[v]
            )));
        }
    }
    // rev_adj[b] = (a, w(b, a)) for every usable request step (a, b).
    let mut rev_adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(a, b), _) in &parts.edges {
        if let Some(&w_back) = parts.edges.get(&(b, a)) {
            rev_adj[b].push((a, w_back));
        }
    }
    for (i, servers) in parts.servers.iter().enumerate() {
        if servers.is_empty() {
            continue;
        }
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for &d in servers {
            dist[d] = 0.0;
            heap.push(HeapEntry { cost: 0.0, node: d });
        }
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(a, w) in &rev_adj[node] {
                let cand = cost + w;
                if cand < dist[a] {
                    dist[a] = cand;
                    heap.push(HeapEntry { cost: cand, node: a });
                }
            }
        }
        for s in 0..n {
            if parts.paths.contains_key(&(s, i)) {
                continue;
            }
            if dist[s].is_infinite() {
                if parts.rates.get(&(s, i)).copied().unwrap_or(0.0) > 0.0 {
                    return Err(Error::MissingPath {
                        node: parts.node_names[s].clone(),
                        item: parts.item_names[i].clone(),
                    });
                }
                continue;
            }
            // Walk downhill; the smallest qualifying neighbor gives the
            // lexicographically smallest cheapest node sequence.
            let mut seq = vec![s];
            let mut cur = s;
            while dist[cur] > 0.0 {
                let mut next = None;
                for v in 0..n {
                    if let Some(&w_back) = parts.edges.get(&(v, cur)) {
                        if parts.edges.contains_key(&(cur, v)) && w_back + dist[v] == dist[cur] {
                            next = Some(v);
                            break;
                        }
                    }
                }
                match next {
                    Some(v) => {
                        seq.push(v);
                        cur = v;
                    }
                    None => {
                        return Err(Error::InvalidParameter(format!(
                            "path synthesis failed to reconstruct a route for ({}, {})",
                            parts.node_names[s], parts.item_names[i]
                        )))
                    }
                }
            }
            parts.paths.insert((s, i), seq);
        }
    }
    Ok(())
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap by cost, then by node index for determinism.
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap()
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A structural defect found by `validate_network`. Violations are data, not
/// failures; identifiers are reported by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPositiveItemSize { item: String, size: String },
    NoDesignatedServer { item: String },
    NegativeCapacity { node: String, capacity: String },
    BadEdgeCost { from: String, to: String, cost: String },
    NegativeRate { node: String, item: String, rate: String },
    PathWrongSource { node: String, item: String },
    PathWrongTerminal { node: String, item: String },
    PathNotSimple { node: String, item: String },
    PathMissingEdge { node: String, item: String, from: String, to: String },
    PathMissingReverseEdge { node: String, item: String, from: String, to: String },
    PathInteriorServer { node: String, item: String, via: String },
    MissingPathForPositiveRate { node: String, item: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use Violation::*;
        match self {
            NonPositiveItemSize { item, size } => {
                write!(f, "item {item}: size {size} is not positive")
            }
            NoDesignatedServer { item } => write!(f, "item {item}: no designated server"),
            NegativeCapacity { node, capacity } => {
                write!(f, "node {node}: capacity {capacity} is negative or not finite")
            }
            BadEdgeCost { from, to, cost } => {
                write!(f, "edge ({from}, {to}): cost {cost} is negative or not finite")
            }
            NegativeRate { node, item, rate } => {
                write!(f, "request ({node}, {item}): rate {rate} is negative or not finite")
            }
            PathWrongSource { node, item } => {
                write!(f, "path for ({node}, {item}) does not start at {node}")
            }
            PathWrongTerminal { node, item } => write!(
                f,
                "path for ({node}, {item}) does not end at a designated server of {item}"
            ),
            PathNotSimple { node, item } => {
                write!(f, "path for ({node}, {item}) repeats a node")
            }
            PathMissingEdge { node, item, from, to } => write!(
                f,
                "path for ({node}, {item}) uses missing edge ({from}, {to})"
            ),
            PathMissingReverseEdge { node, item, from, to } => write!(
                f,
                "path for ({node}, {item}) needs the content edge ({from}, {to}), which is missing"
            ),
            PathInteriorServer { node, item, via } => write!(
                f,
                "path for ({node}, {item}) passes the designated server {via} without stopping"
            ),
            MissingPathForPositiveRate { node, item } => write!(
                f,
                "request ({node}, {item}) has a positive rate but no forwarding path"
            ),
        }
    }
}

/// Checks a network against the structural rules of the model and returns
/// every violation found, in a deterministic order. An empty list means the
/// network is valid.
pub fn validate_network(net: &CachingNetwork) -> Vec<Violation> {
    let mut out = Vec::new();
    let name = |s: usize| net.node_name(s).to_string();
    let iname = |i: usize| net.item_name(i).to_string();

    for i in 0..net.item_count() {
        let l = net.item_size(i);
        if !(l > 0.0) || !l.is_finite() {
            out.push(Violation::NonPositiveItemSize {
                item: iname(i),
                size: format!("{l}"),
            });
        }
        if net.servers(i).is_empty() {
            out.push(Violation::NoDesignatedServer { item: iname(i) });
        }
    }
    for s in 0..net.node_count() {
        let c = net.capacity(s);
        if c < 0.0 || !c.is_finite() {
            out.push(Violation::NegativeCapacity {
                node: name(s),
                capacity: format!("{c}"),
            });
        }
    }
    for (u, v, w) in net.edges() {
        if w < 0.0 || !w.is_finite() {
            out.push(Violation::BadEdgeCost {
                from: name(u),
                to: name(v),
                cost: format!("{w}"),
            });
        }
    }
    for s in 0..net.node_count() {
        for i in 0..net.item_count() {
            let lambda = net.rate(s, i);
            if lambda < 0.0 || !lambda.is_finite() {
                out.push(Violation::NegativeRate {
                    node: name(s),
                    item: iname(i),
                    rate: format!("{lambda}"),
                });
            }
            let Some(p) = net.path(s, i) else {
                if lambda > 0.0 {
                    out.push(Violation::MissingPathForPositiveRate {
                        node: name(s),
                        item: iname(i),
                    });
                }
                continue;
            };
            let seq = p.nodes();
            if seq[0] != s {
                out.push(Violation::PathWrongSource { node: name(s), item: iname(i) });
            }
            let last = *seq.last().unwrap();
            if !net.is_server(last, i) {
                out.push(Violation::PathWrongTerminal { node: name(s), item: iname(i) });
            }
            let mut seen = vec![false; net.node_count()];
            let mut simple = true;
            for &v in seq {
                if seen[v] {
                    simple = false;
                }
                seen[v] = true;
            }
            if !simple {
                out.push(Violation::PathNotSimple { node: name(s), item: iname(i) });
            }
            for k in 0..seq.len() - 1 {
                let (a, b) = (seq[k], seq[k + 1]);
                if net.edge_cost(a, b).is_none() {
                    out.push(Violation::PathMissingEdge {
                        node: name(s),
                        item: iname(i),
                        from: name(a),
                        to: name(b),
                    });
                }
                if net.edge_cost(b, a).is_none() {
                    out.push(Violation::PathMissingReverseEdge {
                        node: name(s),
                        item: iname(i),
                        from: name(b),
                        to: name(a),
                    });
                }
            }
            for &v in &seq[..seq.len() - 1] {
                if v != last && net.is_server(v, i) {
                    out.push(Violation::PathInteriorServer {
                        node: name(s),
                        item: iname(i),
                        via: name(v),
                    });
                }
            }
        }
    }
    out
}
