//! Edge-removal surgeries, proper backdoor graphs and extended graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{GraphError, Result};
use crate::graph::{Admg, ExtendedOrigin, Vertex, VertexSet, EXTENDED_INFIX};

/// Copy of `g` without directed edges into `w`.
pub fn remove_incoming(g: &Admg, w: &VertexSet) -> Result<Admg> {
    g.check_set(w)?;
    Ok(g.without_directed(|_, h| w.contains(&h)))
}

/// Copy of `g` without directed edges out of `w`.
pub fn remove_outgoing(g: &Admg, w: &VertexSet) -> Result<Admg> {
    g.check_set(w)?;
    Ok(g.without_directed(|t, _| w.contains(&t)))
}

/// Copy of `g` without the first edge of every proper causal path from `x`
/// to `y`.
pub fn proper_backdoor_graph(g: &Admg, x: &VertexSet, y: &VertexSet) -> Result<Admg> {
    let first = g.first_edges(x, y)?;
    Ok(g.without_directed(|t, h| first.contains(&(t, h))))
}

/// A graph whose first edges `X_i -> W` of proper causal paths are
/// intercepted by deterministic nodes `X_i -> X_i__e__W -> W`.
#[derive(Clone, Debug)]
pub struct ExtendedGraph {
    graph: Admg,
    exposure: VertexSet,
    outcome: VertexSet,
    extended_nodes: BTreeMap<(Vertex, Vertex), Vertex>,
}

impl ExtendedGraph {
    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn into_graph(self) -> Admg {
        self.graph
    }

    /// Map from intercepted first edge `(X_i, W)` to its extended node.
    pub fn extended_nodes(&self) -> &BTreeMap<(Vertex, Vertex), Vertex> {
        &self.extended_nodes
    }

    pub fn node_for(&self, source: Vertex, head: Vertex) -> Option<Vertex> {
        self.extended_nodes.get(&(source, head)).copied()
    }

    /// Extended nodes on direct edges `X_i -> Y_j`, keyed by `(X_i, Y_j)`.
    pub fn y_nodes(&self) -> BTreeMap<(Vertex, Vertex), Vertex> {
        self.extended_nodes
            .iter()
            .filter(|((_, h), _)| self.outcome.contains(h))
            .map(|(&k, &v)| (k, v))
            .collect()
    }

    /// All extended nodes, the exposure set `X^e` of the extended graph.
    pub fn exposure_nodes(&self) -> VertexSet {
        self.extended_nodes.values().copied().collect()
    }

    pub fn exposure(&self) -> &VertexSet {
        &self.exposure
    }

    pub fn outcome(&self) -> &VertexSet {
        &self.outcome
    }

    /// Removes the extended nodes and restores the intercepted edges.
    pub fn contract(&self) -> Admg {
        contract_extended(&self.graph)
    }
}

pub fn extend_graph(g: &Admg, x: &VertexSet, y: &VertexSet) -> Result<ExtendedGraph> {
    let first = g.first_edges(x, y)?;
    let mut names = g.names().to_vec();
    let mut directed: BTreeSet<(Vertex, Vertex)> = g.directed_edges().into_iter().collect();
    let mut extended = g.extended_map().clone();
    let mut nodes = BTreeMap::new();
    for &(src, head) in &first {
        let name = format!("{}{EXTENDED_INFIX}{}", g.name(src), g.name(head));
        if names.contains(&name) {
            return Err(GraphError::NameCollision(name));
        }
        let node = Vertex(names.len());
        names.push(name);
        directed.remove(&(src, head));
        directed.insert((src, node));
        directed.insert((node, head));
        extended.insert(node, ExtendedOrigin { source: src, head });
        nodes.insert((src, head), node);
    }
    let graph = Admg::assemble(
        names,
        directed,
        g.bidirected_edges().into_iter().collect(),
        g.selection(),
        extended,
    );
    Ok(ExtendedGraph {
        graph,
        exposure: x.clone(),
        outcome: y.clone(),
        extended_nodes: nodes,
    })
}

/// Drops every extended node of `g`, reconnecting `source -> head` when the
/// node still carries both of its edges. Remaining vertices keep their
/// relative order.
pub fn contract_extended(g: &Admg) -> Admg {
    let keep: Vec<Vertex> = g.vertices().filter(|v| g.extended_origin(*v).is_none()).collect();
    let mut remap = vec![None; g.n()];
    for (i, &v) in keep.iter().enumerate() {
        remap[v.0] = Some(Vertex(i));
    }
    let mut directed = BTreeSet::new();
    for (t, h) in g.directed_edges() {
        if let (Some(t2), Some(h2)) = (remap[t.0], remap[h.0]) {
            directed.insert((t2, h2));
        }
    }
    for (v, origin) in g.extended_nodes() {
        if g.has_directed(origin.source, v) && g.has_directed(v, origin.head) {
            if let (Some(t2), Some(h2)) = (remap[origin.source.0], remap[origin.head.0]) {
                directed.insert((t2, h2));
            }
        }
    }
    let bidirected = g
        .bidirected_edges()
        .into_iter()
        .filter_map(|(a, b)| Some((remap[a.0]?, remap[b.0]?)))
        .collect();
    Admg::assemble(
        keep.iter().map(|&v| g.name(v).to_string()).collect(),
        directed,
        bidirected,
        g.selection().and_then(|s| remap[s.0]),
        BTreeMap::new(),
    )
}
