//! m-separation on ADMGs.
//!
//! A path is blocked by `Z` when some non-collider on it lies in `Z`, or
//! some collider on it is neither in `Z` nor an ancestor of `Z`. The fast
//! engine walks `(vertex, arrowhead-at-vertex)` states; the oracle
//! enumerates simple paths and applies the blocking rule to each.

use std::collections::VecDeque;

use crate::error::{GraphError, Result};
use crate::graph::{Admg, Mark, Path, Vertex, VertexSet};

/// Largest graph the path-enumeration oracle accepts.
pub const ORACLE_VERTEX_LIMIT: usize = 16;

/// Upper bound on DFS steps spent looking for a witness path.
const WITNESS_STEP_BUDGET: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationQuery {
    pub a: VertexSet,
    pub b: VertexSet,
    pub z: VertexSet,
}

impl SeparationQuery {
    pub fn new(a: VertexSet, b: VertexSet, z: VertexSet) -> Self {
        SeparationQuery { a, b, z }
    }

    /// Resolves vertex names against `g`.
    pub fn from_names<S: AsRef<str>>(g: &Admg, a: &[S], b: &[S], z: &[S]) -> Result<Self> {
        Ok(SeparationQuery {
            a: g.vertex_set(a)?,
            b: g.vertex_set(b)?,
            z: g.vertex_set(z)?,
        })
    }

    fn validate(&self, g: &Admg) -> Result<()> {
        g.check_disjoint(&self.a, &self.b)?;
        g.check_disjoint(&self.a, &self.z)?;
        g.check_disjoint(&self.b, &self.z)
    }
}

/// Every edge incident to `v`, as `(neighbour, mark from v to neighbour)`.
pub(crate) fn incident(g: &Admg, v: Vertex) -> impl Iterator<Item = (Vertex, Mark)> + '_ {
    let out = g.children(v).iter().map(|&c| (c, Mark::Forward));
    let inc = g.parents(v).iter().map(|&p| (p, Mark::Backward));
    let bi = g.spouses(v).iter().map(|&s| (s, Mark::Bidirected));
    out.chain(inc).chain(bi)
}

/// Whether a step with mark `m` has an arrowhead at its far end.
fn head_at_far(m: Mark) -> bool {
    matches!(m, Mark::Forward | Mark::Bidirected)
}

/// Whether a step with mark `m` has an arrowhead at its near end.
fn head_at_near(m: Mark) -> bool {
    matches!(m, Mark::Backward | Mark::Bidirected)
}

pub fn m_separated(g: &Admg, q: &SeparationQuery) -> Result<bool> {
    q.validate(g)?;
    if q.a.is_empty() || q.b.is_empty() {
        return Ok(true);
    }
    let an_z = g.ancestors(&q.z)?;
    // visited[v][h]: v reached with (h == 1) an arrowhead at v.
    let mut visited = vec![[false; 2]; g.n()];
    let mut queue = VecDeque::new();
    for &a in &q.a {
        for (w, m) in incident(g, a) {
            let h = head_at_far(m) as usize;
            if !visited[w.0][h] {
                visited[w.0][h] = true;
                queue.push_back((w, h == 1));
            }
        }
    }
    while let Some((v, arrived_head)) = queue.pop_front() {
        if q.b.contains(&v) {
            return Ok(false);
        }
        if q.a.contains(&v) {
            continue;
        }
        for (w, m) in incident(g, v) {
            let collider = arrived_head && head_at_near(m);
            let passes = if collider { an_z.contains(&v) } else { !q.z.contains(&v) };
            if !passes {
                continue;
            }
            let h = head_at_far(m) as usize;
            if !visited[w.0][h] {
                visited[w.0][h] = true;
                queue.push_back((w, h == 1));
            }
        }
    }
    Ok(true)
}

/// A simple m-connecting path between `A` and `B` given `Z`, if one exists.
///
/// Returns `Ok(None)` when the sets are separated, and also when the search
/// budget runs out on very large graphs.
pub fn m_connecting_path(g: &Admg, q: &SeparationQuery) -> Result<Option<Path>> {
    if m_separated(g, q)? {
        return Ok(None);
    }
    let an_z = g.ancestors(&q.z)?;
    let mut search = WitnessSearch {
        g,
        q,
        an_z: &an_z,
        on_path: vec![false; g.n()],
        vertices: Vec::new(),
        marks: Vec::new(),
        budget: WITNESS_STEP_BUDGET,
    };
    let mut starts: Vec<Vertex> = q.a.iter().copied().collect();
    starts.sort_by(|&x, &y| g.name(x).cmp(g.name(y)));
    for a in starts {
        search.vertices = vec![a];
        search.on_path[a.0] = true;
        let found = search.extend();
        search.on_path[a.0] = false;
        if found {
            return Ok(Some(Path::new(search.vertices, search.marks)));
        }
    }
    Ok(None)
}

struct WitnessSearch<'a> {
    g: &'a Admg,
    q: &'a SeparationQuery,
    an_z: &'a VertexSet,
    on_path: Vec<bool>,
    vertices: Vec<Vertex>,
    marks: Vec<Mark>,
    budget: usize,
}

impl WitnessSearch<'_> {
    fn extend(&mut self) -> bool {
        let at = *self.vertices.last().expect("non-empty");
        let mut steps: Vec<(Vertex, Mark)> = incident(self.g, at).collect();
        steps.sort_by(|x, y| self.g.name(x.0).cmp(self.g.name(y.0)).then(x.1.cmp(&y.1)));
        for (w, m) in steps {
            if self.budget == 0 {
                return false;
            }
            self.budget -= 1;
            if self.on_path[w.0] || self.q.a.contains(&w) {
                continue;
            }
            if let Some(&prev) = self.marks.last() {
                let collider = head_at_far(prev) && head_at_near(m);
                let passes = if collider { self.an_z.contains(&at) } else { !self.q.z.contains(&at) };
                if !passes {
                    continue;
                }
            }
            self.vertices.push(w);
            self.marks.push(m);
            if self.q.b.contains(&w) {
                return true;
            }
            self.on_path[w.0] = true;
            if self.extend() {
                return true;
            }
            self.on_path[w.0] = false;
            self.vertices.pop();
            self.marks.pop();
        }
        false
    }
}

/// All simple m-connecting paths between `A` and `B` given `Z`, found by
/// exhaustive enumeration. Paths run from a vertex of `A` to a vertex of
/// `B` with no other `A` or `B` vertex in between.
pub fn open_paths_oracle(g: &Admg, q: &SeparationQuery) -> Result<Vec<Path>> {
    if g.n() > ORACLE_VERTEX_LIMIT {
        return Err(GraphError::GraphTooLarge {
            vertices: g.n(),
            limit: ORACLE_VERTEX_LIMIT,
        });
    }
    q.validate(g)?;
    let an_z = naive_ancestors(g, &q.z);
    let mut out = Vec::new();
    for &a in &q.a {
        let mut trail = vec![a];
        let mut marks = Vec::new();
        enumerate(g, q, &mut trail, &mut marks, &mut out);
    }
    out.retain(|p| path_is_open(p, &q.z, &an_z));
    out.sort_by(|x, y| g.cmp_sequences(x.vertices(), y.vertices()).then(x.marks().cmp(y.marks())));
    Ok(out)
}

fn enumerate(g: &Admg, q: &SeparationQuery, trail: &mut Vec<Vertex>, marks: &mut Vec<Mark>, out: &mut Vec<Path>) {
    let at = *trail.last().expect("non-empty");
    for (w, m) in incident(g, at) {
        if trail.contains(&w) || q.a.contains(&w) {
            continue;
        }
        trail.push(w);
        marks.push(m);
        if q.b.contains(&w) {
            out.push(Path::new(trail.clone(), marks.clone()));
        } else {
            enumerate(g, q, trail, marks, out);
        }
        trail.pop();
        marks.pop();
    }
}

/// Direct application of the blocking rule to one path.
fn path_is_open(p: &Path, z: &VertexSet, an_z: &VertexSet) -> bool {
    let vs = p.vertices();
    let ms = p.marks();
    (1..vs.len() - 1).all(|k| {
        let collider = head_at_far(ms[k - 1]) && head_at_near(ms[k]);
        if collider {
            an_z.contains(&vs[k])
        } else {
            !z.contains(&vs[k])
        }
    })
}

/// Fixpoint ancestor computation over the edge list, kept independent of
/// [`Admg::ancestors`] so the oracle does not share code with the engine.
fn naive_ancestors(g: &Admg, z: &VertexSet) -> VertexSet {
    let edges = g.directed_edges();
    let mut out = z.clone();
    loop {
        let before = out.len();
        for &(t, h) in &edges {
            if out.contains(&h) {
                out.insert(t);
            }
        }
        if out.len() == before {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AdmgBuilder;

    fn fig1a() -> Admg {
        AdmgBuilder::new()
            .vertices(["X", "M", "Y"])
            .directed("X", "M")
            .directed("M", "Y")
            .directed("X", "Y")
            .build()
            .unwrap()
    }

    fn fig1b() -> Admg {
        AdmgBuilder::new()
            .vertices(["X", "M", "Y", "C", "S"])
            .directed("X", "M")
            .directed("M", "Y")
            .directed("X", "Y")
            .directed("C", "M")
            .directed("C", "Y")
            .directed("C", "S")
            .selection("S")
            .build()
            .unwrap()
    }

    fn q(g: &Admg, a: &[&str], b: &[&str], z: &[&str]) -> SeparationQuery {
        SeparationQuery::from_names(g, a, b, z).unwrap()
    }

    #[test]
    fn exposure_and_selection_separated_marginally() {
        let g = fig1b();
        assert!(m_separated(&g, &q(&g, &["X"], &["S"], &[])).unwrap());
        assert!(open_paths_oracle(&g, &q(&g, &["X"], &["S"], &[])).unwrap().is_empty());
    }

    #[test]
    fn confounder_blocks_outcome_selection_path() {
        let g = fig1b();
        assert!(m_separated(&g, &q(&g, &["Y"], &["S"], &["C"])).unwrap());
        let open = q(&g, &["Y"], &["S"], &[]);
        assert!(!m_separated(&g, &open).unwrap());
        let witness = m_connecting_path(&g, &open).unwrap().unwrap();
        assert_eq!(witness.render(&g), "Y ← C → S");
        let rendered: Vec<_> = open_paths_oracle(&g, &open).unwrap().iter().map(|p| p.render(&g)).collect();
        assert!(rendered.contains(&"Y ← C → S".to_string()));
    }

    #[test]
    fn oracle_lists_only_direct_edge_given_mediator() {
        let g = fig1a();
        let paths = open_paths_oracle(&g, &q(&g, &["X"], &["Y"], &["M"])).unwrap();
        let rendered: Vec<_> = paths.iter().map(|p| p.render(&g)).collect();
        assert_eq!(rendered, ["X → Y"]);
    }

    #[test]
    fn disconnected_sets_are_separated() {
        let g = AdmgBuilder::new().vertices(["A", "B"]).build().unwrap();
        let query = q(&g, &["A"], &["B"], &[]);
        assert!(m_separated(&g, &query).unwrap());
        assert!(open_paths_oracle(&g, &query).unwrap().is_empty());
        assert_eq!(m_connecting_path(&g, &query).unwrap(), None);
    }

    #[test]
    fn conditioning_on_descendant_opens_collider() {
        let g = AdmgBuilder::new()
            .vertices(["A", "B", "C", "D"])
            .directed("A", "C")
            .directed("B", "C")
            .directed("C", "D")
            .build()
            .unwrap();
        assert!(m_separated(&g, &q(&g, &["A"], &["B"], &[])).unwrap());
        assert!(!m_separated(&g, &q(&g, &["A"], &["B"], &["D"])).unwrap());
    }

    #[test]
    fn bidirected_collider() {
        let g = AdmgBuilder::new()
            .vertices(["A", "B", "C"])
            .bidirected("A", "B")
            .bidirected("B", "C")
            .build()
            .unwrap();
        assert!(m_separated(&g, &q(&g, &["A"], &["C"], &[])).unwrap());
        let open = q(&g, &["A"], &["C"], &["B"]);
        assert!(!m_separated(&g, &open).unwrap());
        assert_eq!(m_connecting_path(&g, &open).unwrap().unwrap().render(&g), "A ↔ B ↔ C");
    }

    #[test]
    fn rejects_overlap_and_large_oracle_input() {
        let g = fig1a();
        let err = m_separated(&g, &q(&g, &["X"], &["Y"], &["X"])).unwrap_err();
        assert_eq!(err, GraphError::OverlapError("X".into()));
        let names: Vec<String> = (0..17).map(|i| format!("V{i}")).collect();
        let big = AdmgBuilder::new().vertices(names.iter().map(String::as_str)).build().unwrap();
        let err = open_paths_oracle(&big, &q(&big, &["V0"], &["V1"], &[])).unwrap_err();
        assert!(matches!(err, GraphError::GraphTooLarge { vertices: 17, .. }));
    }

    #[test]
    fn empty_side_is_separated() {
        let g = fig1a();
        assert!(m_separated(&g, &q(&g, &[], &["Y"], &[])).unwrap());
    }
}
