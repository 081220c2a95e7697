//! JSON description of a caching network. The schema is strict: unknown
//! keys are rejected, items default to size 1, capacities default to 0, and
//! paths are optional (they can be synthesized on request). Export is
//! deterministic, so a parse/export round trip is byte-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{CachingNetwork, NetworkBuilder};

fn default_size() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemSpec {
    id: String,
    #[serde(default = "default_size")]
    size: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeSpec {
    from: String,
    to: String,
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateSpec {
    node: String,
    item: String,
    lambda: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathSpec {
    node: String,
    item: String,
    path: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: Vec<String>,
    items: Vec<ItemSpec>,
    edges: Vec<EdgeSpec>,
    #[serde(default)]
    capacities: BTreeMap<String, f64>,
    #[serde(default)]
    servers: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    rates: Vec<RateSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    paths: Vec<PathSpec>,
    /// Fill in missing paths by cheapest-route synthesis after loading.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    synthesize_paths: bool,
}

/// Parses a network from its JSON description.
pub fn parse_network(json: &str) -> Result<CachingNetwork> {
    let file: NetworkFile =
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    let mut b = NetworkBuilder::new();
    for n in &file.nodes {
        b.node(n);
    }
    for it in &file.items {
        b.item(&it.id, it.size);
    }
    for e in &file.edges {
        b.edge(&e.from, &e.to, e.cost);
    }
    for (node, c) in &file.capacities {
        b.capacity(node, *c);
    }
    for (item, nodes) in &file.servers {
        for node in nodes {
            b.server(item, node);
        }
    }
    for r in &file.rates {
        b.rate(&r.node, &r.item, r.lambda);
    }
    for p in &file.paths {
        b.path(&p.node, &p.item, p.path.iter().map(String::as_str));
    }
    if file.synthesize_paths {
        b.synthesize_missing_paths();
    }
    b.build()
}

/// Serializes a network to pretty JSON. All paths are written explicitly,
/// including synthesized ones; zero rates are omitted.
pub fn network_to_json(net: &CachingNetwork) -> String {
    let mut capacities = BTreeMap::new();
    for s in 0..net.node_count() {
        if net.capacity(s) != 0.0 {
            capacities.insert(net.node_name(s).to_string(), net.capacity(s));
        }
    }
    let mut servers = BTreeMap::new();
    for i in 0..net.item_count() {
        servers.insert(
            net.item_name(i).to_string(),
            net.servers(i)
                .iter()
                .map(|&s| net.node_name(s).to_string())
                .collect(),
        );
    }
    let mut rates = Vec::new();
    let mut paths = Vec::new();
    for s in 0..net.node_count() {
        for i in 0..net.item_count() {
            let lambda = net.rate(s, i);
            if lambda != 0.0 {
                rates.push(RateSpec {
                    node: net.node_name(s).to_string(),
                    item: net.item_name(i).to_string(),
                    lambda,
                });
            }
            if let Some(p) = net.path(s, i) {
                paths.push(PathSpec {
                    node: net.node_name(s).to_string(),
                    item: net.item_name(i).to_string(),
                    path: p.nodes().iter().map(|&v| net.node_name(v).to_string()).collect(),
                });
            }
        }
    }
    let file = NetworkFile {
        nodes: net.node_names().to_vec(),
        items: (0..net.item_count())
            .map(|i| ItemSpec { id: net.item_name(i).to_string(), size: net.item_size(i) })
            .collect(),
        edges: net
            .edges()
            .map(|(u, v, w)| EdgeSpec {
                from: net.node_name(u).to_string(),
                to: net.node_name(v).to_string(),
                cost: w,
            })
            .collect(),
        capacities,
        servers,
        rates,
        paths,
        synthesize_paths: false,
    };
    serde_json::to_string_pretty(&file).expect("network serialization cannot fail")
}
