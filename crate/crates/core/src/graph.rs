//! Acyclic directed mixed graphs with an optional selection vertex.
//!
//! Vertices are addressed by [`Vertex`] handles that index into the graph's
//! name table. Handles are stable under the edge-removal surgeries and under
//! extended-graph construction (new vertices are appended), so a set computed
//! on a graph can be reused on any graph derived from it.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GraphError, Result};

/// Infix reserved for generated extended-node names (`X__e__M`).
pub const EXTENDED_INFIX: &str = "__e__";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub(crate) usize);

impl Vertex {
    pub fn index(self) -> usize {
        self.0
    }
}

pub type VertexSet = BTreeSet<Vertex>;

/// On-disk graph description. Keys match the JSON schema exactly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub directed: Vec<[String; 2]>,
    #[serde(default)]
    pub bidirected: Vec<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<String>,
}

/// Where an extended node sits: it intercepts the edge `source -> head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtendedOrigin {
    pub source: Vertex,
    pub head: Vertex,
}

#[derive(Clone, Debug)]
pub struct Admg {
    names: Vec<String>,
    index: HashMap<String, Vertex>,
    children: Vec<VertexSet>,
    parents: Vec<VertexSet>,
    spouses: Vec<VertexSet>,
    selection: Option<Vertex>,
    extended: BTreeMap<Vertex, ExtendedOrigin>,
}

impl PartialEq for Admg {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.children == other.children
            && self.spouses == other.spouses
            && self.selection == other.selection
            && self.extended == other.extended
    }
}

/// Incremental construction of a validated [`Admg`].
#[derive(Clone, Debug, Default)]
pub struct AdmgBuilder {
    spec: GraphSpec,
}

impl AdmgBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, name: &str) -> Self {
        self.spec.vertices.push(name.to_string());
        self
    }

    pub fn vertices<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.spec.vertices.extend(names.into_iter().map(str::to_string));
        self
    }

    pub fn directed(mut self, tail: &str, head: &str) -> Self {
        self.spec.directed.push([tail.to_string(), head.to_string()]);
        self
    }

    pub fn bidirected(mut self, a: &str, b: &str) -> Self {
        self.spec.bidirected.push([a.to_string(), b.to_string()]);
        self
    }

    pub fn selection(mut self, name: &str) -> Self {
        self.spec.selection = Some(name.to_string());
        self
    }

    pub fn build(self) -> Result<Admg> {
        Admg::from_spec(&self.spec)
    }
}

impl Admg {
    /// Validates a graph description and builds the graph.
    pub fn from_spec(spec: &GraphSpec) -> Result<Self> {
        let mut index = HashMap::with_capacity(spec.vertices.len());
        for (i, name) in spec.vertices.iter().enumerate() {
            if name.is_empty() {
                return Err(GraphError::EmptyName);
            }
            if index.insert(name.clone(), Vertex(i)).is_some() {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
        };

        let mut directed = BTreeSet::new();
        for [tail, head] in &spec.directed {
            let (t, h) = (lookup(tail)?, lookup(head)?);
            if t == h {
                return Err(GraphError::SelfLoop(tail.clone()));
            }
            if !directed.insert((t, h)) {
                return Err(GraphError::DuplicateEdge(format!("{tail} -> {head}")));
            }
        }
        let mut bidirected = BTreeSet::new();
        for [a, b] in &spec.bidirected {
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            if !bidirected.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(format!("{a} <-> {b}")));
            }
        }
        let selection = spec.selection.as_deref().map(lookup).transpose()?;

        let mut graph = Admg::assemble(
            spec.vertices.clone(),
            directed,
            bidirected,
            selection,
            BTreeMap::new(),
        );
        graph.check_acyclic()?;

        if let Some(s) = selection {
            if !graph.children[s.0].is_empty() {
                return Err(GraphError::SelectionHasChildren(graph.name(s).to_string()));
            }
            if !graph.spouses[s.0].is_empty() {
                return Err(GraphError::SelectionBidirected(graph.name(s).to_string()));
            }
        }

        // Reserved names are only accepted when they describe a well-formed
        // extended node, which is what `transform` writes out.
        for v in (0..graph.n()).map(Vertex) {
            let name = graph.name(v);
            if !name.contains(EXTENDED_INFIX) {
                continue;
            }
            let origin = name
                .split_once(EXTENDED_INFIX)
                .and_then(|(src, head)| Some((index.get(src)?, index.get(head)?)))
                .map(|(&source, &head)| ExtendedOrigin { source, head });
            let well_formed = origin.is_some_and(|o| {
                Some(v) != selection
                    && graph.parents[v.0].iter().all(|&p| p == o.source)
                    && graph.children[v.0].iter().all(|&c| c == o.head)
                    && graph.spouses[v.0].is_empty()
            });
            match origin {
                Some(o) if well_formed => {
                    graph.extended.insert(v, o);
                }
                _ => return Err(GraphError::ReservedName(graph.names[v.0].clone())),
            }
        }
        Ok(graph)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: GraphSpec =
            serde_json::from_str(text).map_err(|e| GraphError::Invalid(format!("graph JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> GraphSpec {
        let pair = |a: Vertex, b: Vertex| [self.name(a).to_string(), self.name(b).to_string()];
        let mut directed: Vec<_> = self.directed_edges().into_iter().map(|(a, b)| pair(a, b)).collect();
        directed.sort();
        let mut bidirected: Vec<_> = self
            .bidirected_edges()
            .into_iter()
            .map(|(a, b)| {
                let mut p = pair(a, b);
                p.sort();
                p
            })
            .collect();
        bidirected.sort();
        GraphSpec {
            vertices: self.names.clone(),
            directed,
            bidirected,
            selection: self.selection.map(|s| self.name(s).to_string()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("graph spec serializes")
    }

    /// Builds adjacency from already-validated parts.
    pub(crate) fn assemble(
        names: Vec<String>,
        directed: BTreeSet<(Vertex, Vertex)>,
        bidirected: BTreeSet<(Vertex, Vertex)>,
        selection: Option<Vertex>,
        extended: BTreeMap<Vertex, ExtendedOrigin>,
    ) -> Self {
        let n = names.len();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), Vertex(i)))
            .collect();
        let mut children = vec![VertexSet::new(); n];
        let mut parents = vec![VertexSet::new(); n];
        let mut spouses = vec![VertexSet::new(); n];
        for (t, h) in directed {
            children[t.0].insert(h);
            parents[h.0].insert(t);
        }
        for (a, b) in bidirected {
            spouses[a.0].insert(b);
            spouses[b.0].insert(a);
        }
        Admg {
            names,
            index,
            children,
            parents,
            spouses,
            selection,
            extended,
        }
    }

    /// Copy of the graph with every directed edge matching `drop` removed.
    pub(crate) fn without_directed(&self, drop: impl Fn(Vertex, Vertex) -> bool) -> Self {
        let directed = self
            .directed_edges()
            .into_iter()
            .filter(|&(t, h)| !drop(t, h))
            .collect();
        Admg::assemble(
            self.names.clone(),
            directed,
            self.bidirected_edges().into_iter().collect(),
            self.selection,
            self.extended.clone(),
        )
    }

    fn check_acyclic(&self) -> Result<()> {
        let mut indegree: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut stack: Vec<Vertex> = self.vertices().filter(|v| indegree[v.0] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for &c in &self.children[v.0] {
                indegree[c.0] -= 1;
                if indegree[c.0] == 0 {
                    stack.push(c);
                }
            }
        }
        if seen == self.n() {
            return Ok(());
        }
        // Every leftover vertex has a leftover parent, so walking parents
        // must revisit a vertex.
        let mut at = self.vertices().find(|v| indegree[v.0] > 0).expect("leftover vertex");
        let mut trail = vec![at];
        loop {
            at = *self.parents[at.0]
                .iter()
                .find(|p| indegree[p.0] > 0)
                .expect("leftover parent");
            if let Some(pos) = trail.iter().position(|&v| v == at) {
                let mut cycle: Vec<String> =
                    trail[pos..].iter().rev().map(|&v| self.name(v).to_string()).collect();
                cycle.push(self.name(at).to_string());
                return Err(GraphError::CycleError(cycle));
            }
            trail.push(at);
        }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.n()).map(Vertex)
    }

    pub fn name(&self, v: Vertex) -> &str {
        &self.names[v.0]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.0 < self.n()
    }

    pub fn vertex(&self, name: &str) -> Result<Vertex> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    /// Resolves a list of names into a vertex set.
    pub fn vertex_set<I, S>(&self, names: I) -> Result<VertexSet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        names.into_iter().map(|n| self.vertex(n.as_ref())).collect()
    }

    /// Names of a set, sorted lexicographically.
    pub fn names_of<'a>(&self, set: impl IntoIterator<Item = &'a Vertex>) -> Vec<String> {
        let mut out: Vec<String> = set.into_iter().map(|&v| self.name(v).to_string()).collect();
        out.sort();
        out
    }

    pub(crate) fn check_set(&self, set: &VertexSet) -> Result<()> {
        match set.iter().find(|v| !self.contains(**v)) {
            Some(v) => Err(GraphError::UnknownVertex(format!("#{}", v.0))),
            None => Ok(()),
        }
    }

    pub fn children(&self, v: Vertex) -> &VertexSet {
        &self.children[v.0]
    }

    pub fn parents(&self, v: Vertex) -> &VertexSet {
        &self.parents[v.0]
    }

    pub fn spouses(&self, v: Vertex) -> &VertexSet {
        &self.spouses[v.0]
    }

    pub fn has_directed(&self, tail: Vertex, head: Vertex) -> bool {
        self.children[tail.0].contains(&head)
    }

    pub fn has_bidirected(&self, a: Vertex, b: Vertex) -> bool {
        self.spouses[a.0].contains(&b)
    }

    pub fn directed_edges(&self) -> Vec<(Vertex, Vertex)> {
        self.vertices()
            .flat_map(|t| self.children[t.0].iter().map(move |&h| (t, h)))
            .collect()
    }

    /// Bidirected edges as `(a, b)` with `a < b`.
    pub fn bidirected_edges(&self) -> Vec<(Vertex, Vertex)> {
        self.vertices()
            .flat_map(|a| self.spouses[a.0].iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn selection(&self) -> Option<Vertex> {
        self.selection
    }

    pub fn extended_origin(&self, v: Vertex) -> Option<ExtendedOrigin> {
        self.extended.get(&v).copied()
    }

    pub fn extended_nodes(&self) -> impl Iterator<Item = (Vertex, ExtendedOrigin)> + '_ {
        self.extended.iter().map(|(&v, &o)| (v, o))
    }

    pub(crate) fn names(&self) -> &[String] {
        &self.names
    }

    pub(crate) fn extended_map(&self) -> &BTreeMap<Vertex, ExtendedOrigin> {
        &self.extended
    }

    /// Reflexive-transitive closure against edge direction.
    pub fn ancestors(&self, set: &VertexSet) -> Result<VertexSet> {
        self.check_set(set)?;
        Ok(self.closure(set, |v| &self.parents[v.0], |_| true))
    }

    /// Reflexive-transitive closure along edge direction.
    pub fn descendants(&self, set: &VertexSet) -> Result<VertexSet> {
        self.check_set(set)?;
        Ok(self.closure(set, |v| &self.children[v.0], |_| true))
    }

    /// Closure from `seeds` through `step`, only entering vertices accepted
    /// by `allowed`. Seeds are always included.
    pub(crate) fn closure<'a>(
        &'a self,
        seeds: &VertexSet,
        step: impl Fn(Vertex) -> &'a VertexSet,
        allowed: impl Fn(Vertex) -> bool,
    ) -> VertexSet {
        let mut out = seeds.clone();
        let mut stack: Vec<Vertex> = seeds.iter().copied().collect();
        while let Some(v) = stack.pop() {
            for &w in step(v) {
                if allowed(w) && out.insert(w) {
                    stack.push(w);
                }
            }
        }
        out
    }

    /// Bidirected-connected components, each sorted, ordered by their
    /// lexicographically smallest member.
    pub fn districts(&self) -> Vec<VertexSet> {
        self.districts_within(&self.vertices().collect())
    }

    /// Districts of the subgraph induced by `within`.
    pub(crate) fn districts_within(&self, within: &VertexSet) -> Vec<VertexSet> {
        let mut assigned = VertexSet::new();
        let mut cells = Vec::new();
        for &v in within {
            if assigned.contains(&v) {
                continue;
            }
            let cell = self.closure(
                &VertexSet::from([v]),
                |u| &self.spouses[u.0],
                |u| within.contains(&u),
            );
            assigned.extend(cell.iter().copied());
            cells.push(cell);
        }
        cells.sort_by(|a, b| self.min_name(a).cmp(self.min_name(b)));
        cells
    }

    fn min_name(&self, set: &VertexSet) -> &str {
        set.iter().map(|&v| self.name(v)).min().unwrap_or("")
    }

    /// Vertices from which `targets` can be reached by a directed path that
    /// avoids `blocked` (targets themselves included unless blocked).
    pub(crate) fn ancestors_avoiding(&self, targets: &VertexSet, blocked: &VertexSet) -> VertexSet {
        let seeds: VertexSet = targets.difference(blocked).copied().collect();
        self.closure(&seeds, |v| &self.parents[v.0], |u| !blocked.contains(&u))
    }

    /// First edges `x -> w` of proper causal paths from `x_set` to `y_set`.
    ///
    /// An edge qualifies iff `w` lies outside `x_set` and reaches `y_set`
    /// through vertices outside `x_set`.
    pub fn first_edges(&self, x_set: &VertexSet, y_set: &VertexSet) -> Result<BTreeSet<(Vertex, Vertex)>> {
        self.check_disjoint(x_set, y_set)?;
        let reach = self.ancestors_avoiding(y_set, x_set);
        Ok(x_set
            .iter()
            .flat_map(|&x| self.children[x.0].iter().map(move |&w| (x, w)))
            .filter(|(_, w)| reach.contains(w))
            .collect())
    }

    pub(crate) fn check_disjoint(&self, a: &VertexSet, b: &VertexSet) -> Result<()> {
        self.check_set(a)?;
        self.check_set(b)?;
        match a.intersection(b).next() {
            Some(&v) => Err(GraphError::OverlapError(self.name(v).to_string())),
            None => Ok(()),
        }
    }

    /// All simple directed paths from `x_set` to `y_set` meeting `x_set`
    /// only at their source, in lexicographic order of vertex names.
    pub fn proper_causal_paths(&self, x_set: &VertexSet, y_set: &VertexSet) -> Result<PathSetPi> {
        self.check_disjoint(x_set, y_set)?;
        let reach = self.ancestors_avoiding(y_set, x_set);
        let mut paths = Vec::new();
        let mut on_path = vec![false; self.n()];
        for &x in x_set {
            let mut trail = vec![x];
            on_path[x.0] = true;
            self.causal_dfs(&mut trail, &mut on_path, &reach, y_set, &mut paths);
            on_path[x.0] = false;
        }
        let mut set = PathSetPi {
            exposure: x_set.clone(),
            outcome: y_set.clone(),
            paths: paths.into_iter().map(Path::directed).collect(),
        };
        set.sort(self);
        Ok(set)
    }

    fn causal_dfs(
        &self,
        trail: &mut Vec<Vertex>,
        on_path: &mut [bool],
        reach: &VertexSet,
        y_set: &VertexSet,
        out: &mut Vec<Vec<Vertex>>,
    ) {
        let at = *trail.last().expect("non-empty trail");
        for &c in &self.children[at.0] {
            if on_path[c.0] || !reach.contains(&c) {
                continue;
            }
            trail.push(c);
            on_path[c.0] = true;
            if y_set.contains(&c) {
                out.push(trail.clone());
            }
            self.causal_dfs(trail, on_path, reach, y_set, out);
            on_path[c.0] = false;
            trail.pop();
        }
    }

    /// Topological order with lexicographic tie-breaking.
    pub fn topological_order(&self) -> Vec<Vertex> {
        let mut indegree: Vec<usize> = self.parents.iter().map(BTreeSet::len).collect();
        let mut ready: BinaryHeap<Reverse<(&str, Vertex)>> = self
            .vertices()
            .filter(|v| indegree[v.0] == 0)
            .map(|v| Reverse((self.name(v), v)))
            .collect();
        let mut order = Vec::with_capacity(self.n());
        while let Some(Reverse((_, v))) = ready.pop() {
            order.push(v);
            for &c in &self.children[v.0] {
                indegree[c.0] -= 1;
                if indegree[c.0] == 0 {
                    ready.push(Reverse((self.name(c), c)));
                }
            }
        }
        order
    }

    /// Compares two vertex sequences by their names.
    pub(crate) fn cmp_sequences(&self, a: &[Vertex], b: &[Vertex]) -> Ordering {
        a.iter().map(|&v| self.name(v)).cmp(b.iter().map(|&v| self.name(v)))
    }
}

/// Edge kind traversed between consecutive path vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mark {
    /// `a -> b`
    Forward,
    /// `a <- b`
    Backward,
    /// `a <-> b`
    Bidirected,
}

impl Mark {
    pub fn arrow(self) -> &'static str {
        match self {
            Mark::Forward => "→",
            Mark::Backward => "←",
            Mark::Bidirected => "↔",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    vertices: Vec<Vertex>,
    marks: Vec<Mark>,
}

impl Path {
    pub fn new(vertices: Vec<Vertex>, marks: Vec<Mark>) -> Self {
        assert_eq!(vertices.len(), marks.len() + 1, "one mark per step");
        Path { vertices, marks }
    }

    pub fn directed(vertices: Vec<Vertex>) -> Self {
        let marks = vec![Mark::Forward; vertices.len().saturating_sub(1)];
        Path { vertices, marks }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    pub fn source(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn target(&self) -> Vertex {
        *self.vertices.last().expect("non-empty path")
    }

    pub fn first_edge(&self) -> Option<(Vertex, Vertex)> {
        (self.vertices.len() > 1).then(|| (self.vertices[0], self.vertices[1]))
    }

    pub fn is_directed(&self) -> bool {
        self.marks.iter().all(|&m| m == Mark::Forward)
    }

    /// True when every step is an edge of `g` and no vertex repeats.
    pub fn is_valid_in(&self, g: &Admg) -> bool {
        if self.vertices.is_empty() || self.vertices.iter().any(|&v| !g.contains(v)) {
            return false;
        }
        let distinct: VertexSet = self.vertices.iter().copied().collect();
        if distinct.len() != self.vertices.len() {
            return false;
        }
        self.vertices.windows(2).zip(&self.marks).all(|(w, m)| match m {
            Mark::Forward => g.has_directed(w[0], w[1]),
            Mark::Backward => g.has_directed(w[1], w[0]),
            Mark::Bidirected => g.has_bidirected(w[0], w[1]),
        })
    }

    pub fn names(&self, g: &Admg) -> Vec<String> {
        self.vertices.iter().map(|&v| g.name(v).to_string()).collect()
    }

    /// Human-readable form such as `Y ← C → S`.
    pub fn render(&self, g: &Admg) -> String {
        let mut out = g.name(self.vertices[0]).to_string();
        for (v, m) in self.vertices[1..].iter().zip(&self.marks) {
            out.push(' ');
            out.push_str(m.arrow());
            out.push(' ');
            out.push_str(g.name(*v));
        }
        out
    }
}

/// A set of proper causal paths from `exposure` to `outcome`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSetPi {
    exposure: VertexSet,
    outcome: VertexSet,
    paths: Vec<Path>,
}

impl PathSetPi {
    /// Validates that every path is a proper causal path in `g`.
    pub fn new(g: &Admg, exposure: VertexSet, outcome: VertexSet, paths: Vec<Path>) -> Result<Self> {
        g.check_disjoint(&exposure, &outcome)?;
        for p in &paths {
            if !is_proper_causal(g, p, &exposure, &outcome) {
                let text = if p.is_valid_in(g) { p.render(g) } else { format!("{:?}", p.names(g)) };
                return Err(GraphError::NotProperPath(text));
            }
        }
        let mut set = PathSetPi { exposure, outcome, paths };
        set.sort(g);
        Ok(set)
    }

    /// Builds a path set from vertex-name sequences.
    pub fn from_names(g: &Admg, exposure: VertexSet, outcome: VertexSet, paths: &[Vec<String>]) -> Result<Self> {
        let paths = paths
            .iter()
            .map(|names| {
                if names.len() < 2 {
                    return Err(GraphError::NotProperPath(names.join(" → ")));
                }
                Ok(Path::directed(g.vertex_set_ordered(names)?))
            })
            .collect::<Result<Vec<_>>>()?;
        PathSetPi::new(g, exposure, outcome, paths)
    }

    /// All proper causal paths whose first edge is in `edges`.
    pub fn from_first_edges(
        g: &Admg,
        exposure: VertexSet,
        outcome: VertexSet,
        edges: &BTreeSet<(Vertex, Vertex)>,
    ) -> Result<Self> {
        let all = g.proper_causal_paths(&exposure, &outcome)?;
        let valid = g.first_edges(&exposure, &outcome)?;
        if let Some(&(a, b)) = edges.iter().find(|e| !valid.contains(e)) {
            return Err(GraphError::NotProperPath(format!("{} → {}", g.name(a), g.name(b))));
        }
        let paths = all
            .paths
            .into_iter()
            .filter(|p| p.first_edge().is_some_and(|e| edges.contains(&e)))
            .collect();
        Ok(PathSetPi { exposure, outcome, paths })
    }

    fn sort(&mut self, g: &Admg) {
        self.paths.sort_by(|a, b| g.cmp_sequences(&a.vertices, &b.vertices));
        self.paths.dedup();
    }

    pub fn exposure(&self) -> &VertexSet {
        &self.exposure
    }

    pub fn outcome(&self) -> &VertexSet {
        &self.outcome
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn contains(&self, path: &Path) -> bool {
        self.paths.iter().any(|p| p.vertices == path.vertices)
    }

    /// Distinct first edges of the member paths.
    pub fn first_edges(&self) -> BTreeSet<(Vertex, Vertex)> {
        self.paths.iter().filter_map(Path::first_edge).collect()
    }

    pub fn rendered(&self, g: &Admg) -> Vec<String> {
        self.paths.iter().map(|p| p.render(g)).collect()
    }
}

impl Admg {
    /// Resolves names keeping their order (for paths).
    pub fn vertex_set_ordered<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Vertex>> {
        names.iter().map(|n| self.vertex(n.as_ref())).collect()
    }
}

pub(crate) fn is_proper_causal(g: &Admg, p: &Path, exposure: &VertexSet, outcome: &VertexSet) -> bool {
    p.vertices.len() >= 2
        && p.is_directed()
        && p.is_valid_in(g)
        && exposure.contains(&p.source())
        && outcome.contains(&p.target())
        && p.vertices[1..].iter().all(|v| !exposure.contains(v))
}

impl fmt::Display for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let spec = self.to_spec();
        let mut parts: Vec<String> = spec.directed.iter().map(|[a, b]| format!("{a} → {b}")).collect();
        parts.extend(spec.bidirected.iter().map(|[a, b]| format!("{a} ↔ {b}")));
        write!(f, "ADMG[{}]{{{}}}", spec.vertices.join(", "), parts.join(", "))
    }
}
