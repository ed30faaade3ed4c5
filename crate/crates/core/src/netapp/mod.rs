//! Dominating-set targeting on social graphs: edge-list ingestion, node-group
//! hypothesis classes and the corresponding instances.

mod classes;
mod graph;

use std::sync::Arc;

pub use classes::{
    gen_balls, gen_clusters_class, gen_expanded_clusters, gen_noisy_variants, partition_clusters, HypothesisClass,
    DEFAULT_CLUSTER_SIZES,
};
pub(crate) use classes::rng_for;
pub use graph::{parse_edge_list, parse_edge_list_str, sbm_graph, Graph};

use crate::error::{NetError, ObjectiveError};
use crate::instance::{Instance, ResponseSet};
use crate::model::{Cost, ResponseId};
use crate::objectives::{Dominating, DominatingSpec, Objective};

/// `F_h(s)`: members of group `h` that were sent an ad or neighbor a node
/// that was, plus `|V ∖ V_h|`. Query `q` sends an ad to `query_node[q]`
/// (node `q` when no map is given).
pub fn dominating_set_objective(
    g: &Graph,
    hc: &HypothesisClass,
    query_node: Option<Vec<u32>>,
) -> Result<Objective, ObjectiveError> {
    let spec = DominatingSpec {
        nodes: g.node_count() as u32,
        edges: g.edges().collect(),
        groups: hc.groups.clone(),
        query_node,
    };
    Ok(Objective::DominatingSet(Arc::new(Dominating::try_from(spec)?)))
}

/// One query per node; the answer is 1 when the node belongs to the target
/// group and 0 otherwise. `α = |V|`, unit costs unless given.
pub fn build_dominating_instance(
    g: &Graph,
    hc: &HypothesisClass,
    costs: Option<Vec<Cost>>,
) -> Result<Instance, NetError> {
    if hc.is_empty() {
        return Err(NetError::Parameter("hypothesis class is empty".into()));
    }
    let n = g.node_count();
    let costs = costs.unwrap_or_else(|| vec![Cost::integer(1); n]);
    if costs.len() != n {
        return Err(NetError::Parameter(format!("{} costs for {n} nodes", costs.len())));
    }
    let objective = dominating_set_objective(g, hc, None).map_err(|e| NetError::Parameter(e.to_string()))?;
    let valid = (0..n as u32)
        .map(|v| {
            hc.groups
                .iter()
                .map(|grp| ResponseSet::single(ResponseId(u32::from(grp.binary_search(&v).is_ok()))))
                .collect()
        })
        .collect();
    Instance::from_parts(hc.len(), 2, costs, valid, n as u64, objective)
        .map_err(|e| NetError::Parameter(e.to_string()))
}
