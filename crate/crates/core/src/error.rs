use thiserror::Error;

/// Operational errors. Structural problems with a network description are not
/// errors; `validate_network` reports those as data.
#[derive(Debug, Error)]
pub enum Error {
    #[error("request ({node}, {item}) has a positive rate but no forwarding path")]
    MissingPath { node: String, item: String },

    #[error("path for request ({node}, {item}) crosses edge ({from}, {to}) whose reverse cost is undefined")]
    MissingReverseEdge {
        node: String,
        item: String,
        from: String,
        to: String,
    },

    #[error("operation requires unit item sizes; use the approximate-game operations for sized items")]
    UnequalSizes,

    #[error("node {node} has non-integer capacity {capacity}; the unit-size game needs integer capacities")]
    NonIntegerCapacity { node: String, capacity: f64 },

    #[error("state-graph search exceeded the arc budget of {budget} ({arcs} arcs traversed){}",
        match .loop_witness {
            Some(w) => format!("; suspected mixed request loop: {}", w.join(" -> ")),
            None => String::from("; no mixed request loop detected, raise the budget"),
        })]
    NonTermination {
        arcs: u64,
        budget: u64,
        loop_witness: Option<Vec<String>>,
    },

    #[error("search space of {size} profiles exceeds the limit of {limit}")]
    SearchSpaceExceeded { size: u128, limit: u64 },

    #[error("exact knapsack limited to 30 items without integer sizes; got {items}")]
    KnapsackTooLarge { items: usize },

    #[error("invalid knapsack input: {0}")]
    InvalidKnapsack(String),

    #[error("network does not satisfy the {property} property: {witness}")]
    PropertyViolation { property: &'static str, witness: String },

    #[error("networks with more than 64 items are not supported: got {items}")]
    TooManyItems { items: usize },

    #[error("linear program: {0}")]
    Lp(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
