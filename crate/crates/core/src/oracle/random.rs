//! Random mixed graphs and queries for property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::criteria::AdmissiblePair;
use crate::graph::{Admg, AdmgBuilder, Vertex, VertexSet};
use crate::separation::SeparationQuery;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomGraphConfig {
    /// Ordinary vertices, not counting the selection vertex.
    pub vertices: usize,
    pub directed: f64,
    pub bidirected: f64,
    /// Adds a selection sink `S` with at least one parent.
    pub selection: bool,
    pub selection_parent: f64,
}

impl Default for RandomGraphConfig {
    fn default() -> Self {
        RandomGraphConfig { vertices: 6, directed: 0.35, bidirected: 0.15, selection: true, selection_parent: 0.3 }
    }
}

/// Vertices are `V0, V1, ...`; directed edges only go from lower to
/// higher index, so the result is acyclic.
pub fn random_admg<R: Rng>(rng: &mut R, cfg: &RandomGraphConfig) -> Admg {
    let names: Vec<String> = (0..cfg.vertices).map(|i| format!("V{i}")).collect();
    let mut b = AdmgBuilder::new().vertices(names.iter().map(String::as_str));
    for i in 0..cfg.vertices {
        for j in i + 1..cfg.vertices {
            if rng.random::<f64>() < cfg.directed {
                b = b.directed(&names[i], &names[j]);
            }
            if rng.random::<f64>() < cfg.bidirected {
                b = b.bidirected(&names[i], &names[j]);
            }
        }
    }
    if cfg.selection && cfg.vertices > 0 {
        b = b.vertex("S").selection("S");
        let mut any = false;
        for name in &names {
            if rng.random::<f64>() < cfg.selection_parent {
                b = b.directed(name, "S");
                any = true;
            }
        }
        if !any {
            b = b.directed(&names[rng.random_range(0..cfg.vertices)], "S");
        }
    }
    b.build().expect("generated graphs are valid")
}

/// Each vertex of `pool` independently with probability `p`.
pub fn random_subset<R: Rng>(rng: &mut R, pool: &[Vertex], p: f64) -> VertexSet {
    pool.iter().copied().filter(|_| rng.random::<f64>() < p).collect()
}

/// Nonempty disjoint `a` and `b` with a random conditioning set from the
/// remaining vertices (the selection vertex included).
pub fn random_separation_query<R: Rng>(rng: &mut R, g: &Admg) -> SeparationQuery {
    let mut vs: Vec<Vertex> = g.vertices().collect();
    vs.shuffle(rng);
    let na = rng.random_range(1..=vs.len().saturating_sub(1).clamp(1, 2));
    let nb = rng.random_range(1..=(vs.len() - na).clamp(1, 2));
    let a: VertexSet = vs[..na].iter().copied().collect();
    let b: VertexSet = vs[na..na + nb].iter().copied().collect();
    let z = random_subset(rng, &vs[na + nb..], 0.4);
    SeparationQuery::new(a, b, z)
}

/// An exposure and an outcome joined by at least one proper causal path,
/// with an arbitrary pair `ZT ⊆ Z` drawn from the other ordinary vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjustmentInstance {
    pub x: VertexSet,
    pub y: VertexSet,
    pub pair: AdmissiblePair,
}

/// Returns `None` when the graph has no directed edge between ordinary
/// vertices.
pub fn random_adjustment_instance<R: Rng>(rng: &mut R, g: &Admg) -> Option<AdjustmentInstance> {
    let s = g.selection();
    let ordinary: Vec<Vertex> = g.vertices().filter(|&v| Some(v) != s).collect();
    let mut candidates = Vec::new();
    for &x in &ordinary {
        let desc = g.descendants(&VertexSet::from([x])).ok()?;
        for &y in &ordinary {
            if y != x && desc.contains(&y) {
                candidates.push((x, y));
            }
        }
    }
    let &(x, y) = candidates.get(rng.random_range(0..candidates.len().max(1)))?;
    let rest: Vec<Vertex> = ordinary.iter().copied().filter(|&v| v != x && v != y).collect();
    let z = random_subset(rng, &rest, 0.4);
    let zt: VertexSet = z.iter().copied().filter(|_| rng.random::<f64>() < 0.6).collect();
    let pair = AdmissiblePair::new(z, zt).expect("zt drawn from z");
    Some(AdjustmentInstance { x: VertexSet::from([x]), y: VertexSet::from([y]), pair })
}
