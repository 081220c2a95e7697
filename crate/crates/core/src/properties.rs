//! Structural property detection: mixed request loops, request homogeneity,
//! path overlap, the cloud (single shared server) shape, and the path-length
//! scale factor alpha. These gate which equilibrium existence and efficiency
//! guarantees apply to an instance.

use std::collections::BTreeSet;

use crate::network::CachingNetwork;

/// First request/on-path node pair whose paths fail to nest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapWitness {
    pub request_node: usize,
    pub on_path_node: usize,
    pub item: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    /// Simple directed cycle of length >= 3 in the traversed-edge subgraph.
    pub has_mixed_request_loop: bool,
    /// Witness cycle as node indices, first node repeated at the end.
    pub loop_witness: Option<Vec<usize>>,
    /// Directed 2-cycles in the traversed subgraph, (u, v) with u < v. Not
    /// counted as mixed request loops, but worth a warning.
    pub traversed_two_cycles: Vec<(usize, usize)>,
    /// Every node requests each item at the same rate.
    pub homogeneous_requests: bool,
    /// Every suffix of a request path is itself the forwarding path of the
    /// node it starts at.
    pub path_overlap: bool,
    pub overlap_witness: Option<OverlapWitness>,
    /// One server node holds everything and each node forwards all items
    /// along one common path.
    pub cloud_property: bool,
    pub cloud_server: Option<usize>,
    /// Longest positive-rate request path, in edges.
    pub alpha: usize,
    /// Intermediate nodes over all positive-rate requests of each node.
    pub intermediate_sets: Vec<Vec<usize>>,
    /// Tier of each node: the size of its intermediate set.
    pub tiers: Vec<usize>,
}

/// Intermediate nodes of the (s, i) request path: everything strictly
/// between source and terminal. Empty when there is no path.
pub fn request_intermediates(net: &CachingNetwork, s: usize, i: usize) -> Vec<usize> {
    match net.path(s, i) {
        Some(p) if p.nodes().len() > 2 => p.nodes()[1..p.nodes().len() - 1].to_vec(),
        _ => Vec::new(),
    }
}

/// Edges traversed by at least one positive-rate request, in the request
/// direction.
fn traversed_edges(net: &CachingNetwork) -> BTreeSet<(usize, usize)> {
    let mut t = BTreeSet::new();
    for &(s, i) in net.positive_requests() {
        if let Some(p) = net.path(s, i) {
            let nodes = p.nodes();
            for k in 0..nodes.len() - 1 {
                t.insert((nodes[k], nodes[k + 1]));
            }
        }
    }
    t
}

/// Shortest path from `from` to `to` that never takes the direct edge
/// (from, to). Neighbors expand in ascending order, so the result is the
/// deterministic BFS witness.
fn bfs_avoiding_direct(
    t: &BTreeSet<(usize, usize)>,
    n: usize,
    from: usize,
    to: usize,
) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    parent[from] = from;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if parent[v] != usize::MAX || !t.contains(&(u, v)) {
                continue;
            }
            if u == from && v == to {
                continue;
            }
            parent[v] = u;
            if v == to {
                let mut path = vec![v];
                let mut cur = v;
                while cur != from {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(v);
        }
    }
    None
}

/// Looks for a simple directed cycle of length >= 3 among traversed edges.
///
/// Such a cycle exists iff some traversed edge (v, u) can be closed by a
/// u-to-v path that avoids the direct edge (u, v): that path has >= 2 edges
/// and the BFS shortest path is simple, so the closed walk is a simple cycle
/// of length >= 3. Returns the witness as (u, ..., v, u).
pub fn detect_mixed_request_loop(net: &CachingNetwork) -> (bool, Option<Vec<usize>>) {
    let t = traversed_edges(net);
    let n = net.node_count();
    for u in 0..n {
        for v in 0..n {
            if !t.contains(&(v, u)) {
                continue;
            }
            if let Some(mut path) = bfs_avoiding_direct(&t, n, u, v) {
                path.push(u);
                return (true, Some(path));
            }
        }
    }
    (false, None)
}

fn two_cycles(t: &BTreeSet<(usize, usize)>) -> Vec<(usize, usize)> {
    t.iter()
        .filter(|&&(u, v)| u < v && t.contains(&(v, u)))
        .map(|&(u, v)| (u, v))
        .collect()
}

fn homogeneous_requests(net: &CachingNetwork) -> bool {
    // Exact comparison on stored rates: these are inputs, not computed.
    (0..net.item_count()).all(|i| {
        let r0 = net.rate(0, i);
        (1..net.node_count()).all(|s| net.rate(s, i) == r0)
    })
}

fn path_overlap(net: &CachingNetwork) -> (bool, Option<OverlapWitness>) {
    for &(v, i) in net.positive_requests() {
        let Some(p) = net.path(v, i) else { continue };
        let nodes = p.nodes();
        for (k, &s) in nodes.iter().enumerate().take(nodes.len() - 1).skip(1) {
            let suffix = &nodes[k..];
            let ok = match net.path(s, i) {
                Some(ps) => ps.nodes() == suffix,
                None => false,
            };
            if !ok {
                return (
                    false,
                    Some(OverlapWitness {
                        request_node: v,
                        on_path_node: s,
                        item: i,
                    }),
                );
            }
        }
    }
    (true, None)
}

fn cloud_property(net: &CachingNetwork) -> (bool, Option<usize>) {
    let mut shared = None;
    for i in 0..net.item_count() {
        let servers = net.servers(i);
        if servers.len() != 1 {
            return (false, None);
        }
        match shared {
            None => shared = Some(servers[0]),
            Some(d) if d != servers[0] => return (false, None),
            _ => {}
        }
    }
    let Some(d) = shared else { return (false, None) };
    // Each node must forward every item it has a path for along one route.
    for s in 0..net.node_count() {
        let mut common: Option<&[usize]> = None;
        for i in 0..net.item_count() {
            if let Some(p) = net.path(s, i) {
                match common {
                    None => common = Some(p.nodes()),
                    Some(c) if c != p.nodes() => return (false, None),
                    _ => {}
                }
            }
        }
    }
    (true, Some(d))
}

/// Computes every property flag for a validated network.
pub fn check_properties(net: &CachingNetwork) -> PropertyReport {
    let t = traversed_edges(net);
    let (has_loop, loop_witness) = detect_mixed_request_loop(net);
    let (overlap, overlap_witness) = path_overlap(net);
    let (cloud, cloud_server) = cloud_property(net);
    let mut alpha = 0;
    let mut intermediate_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); net.node_count()];
    for &(s, i) in net.positive_requests() {
        if let Some(p) = net.path(s, i) {
            alpha = alpha.max(p.hops());
            intermediate_sets[s].extend(request_intermediates(net, s, i));
        }
    }
    let intermediate_sets: Vec<Vec<usize>> = intermediate_sets
        .into_iter()
        .map(|set| set.into_iter().collect())
        .collect();
    let tiers = intermediate_sets.iter().map(Vec::len).collect();
    PropertyReport {
        has_mixed_request_loop: has_loop,
        loop_witness,
        traversed_two_cycles: two_cycles(&t),
        homogeneous_requests: homogeneous_requests(net),
        path_overlap: overlap,
        overlap_witness,
        cloud_property: cloud,
        cloud_server,
        alpha,
        intermediate_sets,
        tiers,
    }
}
