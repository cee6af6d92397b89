//! Identification criteria: backdoor, generalized adjustment with a
//! selection vertex, the extended-graph equivalence, mediation and
//! path-specific conditions, edge consistency and recanting districts.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{GraphError, Result};
use crate::graph::{is_proper_causal, Admg, Path, PathSetPi, Vertex, VertexSet};
use crate::separation::{m_connecting_path, m_separated, SeparationQuery};
use crate::surgery::{extend_graph, proper_backdoor_graph, remove_incoming, ExtendedGraph};

/// Largest `2^|candidates| * 2^max_size` accepted by [`find_admissible_pairs`].
pub const SEARCH_SPACE_LIMIT: u128 = 1 << 20;

/// Covariate set `Z` and its externally observed subset `ZT`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissiblePair {
    pub z: VertexSet,
    pub zt: VertexSet,
}

impl AdmissiblePair {
    pub fn new(z: VertexSet, zt: VertexSet) -> Result<Self> {
        if let Some(v) = zt.difference(&z).next() {
            return Err(GraphError::ZtNotSubset(format!("#{}", v.index())));
        }
        Ok(AdmissiblePair { z, zt })
    }

    pub fn from_names<S: AsRef<str>>(g: &Admg, z: &[S], zt: &[S]) -> Result<Self> {
        let z_set = g.vertex_set(z)?;
        let zt_set = g.vertex_set(zt)?;
        match zt_set.difference(&z_set).next() {
            Some(&v) => Err(GraphError::ZtNotSubset(g.name(v).to_string())),
            None => Ok(AdmissiblePair { z: z_set, zt: zt_set }),
        }
    }

    pub fn empty() -> Self {
        AdmissiblePair { z: VertexSet::new(), zt: VertexSet::new() }
    }

    pub fn describe(&self, g: &Admg) -> (Vec<String>, Vec<String>) {
        (g.names_of(&self.z), g.names_of(&self.zt))
    }
}

/// Evidence attached to a failed condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// An open path between the two sides of a separation statement.
    Path { vertices: Vec<String>, rendered: String },
    /// A vertex that violates a membership constraint.
    Vertex { name: String, reason: String },
    /// A recanting district with one path in π and one outside it.
    District {
        members: Vec<String>,
        in_pi: String,
        not_in_pi: String,
    },
}

impl Witness {
    fn path(g: &Admg, p: &Path) -> Self {
        Witness::Path { vertices: p.names(g), rendered: p.render(g) }
    }

    pub fn rendered(&self) -> String {
        match self {
            Witness::Path { rendered, .. } => rendered.clone(),
            Witness::Vertex { name, reason } => format!("{name}: {reason}"),
            Witness::District { members, in_pi, not_in_pi } => {
                format!("{{{}}} via {in_pi} and {not_in_pi}", members.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub label: String,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub verdict: bool,
    pub conditions: Vec<Condition>,
}

impl CriterionReport {
    fn from_conditions(conditions: Vec<Condition>) -> Self {
        CriterionReport {
            verdict: conditions.iter().all(|c| c.passed),
            conditions,
        }
    }

    pub fn condition(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.passed)
    }
}

/// A path-specific effect query: a set of proper causal paths together with
/// the labels of the active and reference exposure levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseQuery {
    pub pi: PathSetPi,
    pub x_active: String,
    pub x_reference: String,
}

impl PseQuery {
    pub fn new(pi: PathSetPi) -> Self {
        PseQuery { pi, x_active: "1".into(), x_reference: "0".into() }
    }

    pub fn exposure(&self) -> &VertexSet {
        self.pi.exposure()
    }

    pub fn outcome(&self) -> &VertexSet {
        self.pi.outcome()
    }
}

/// Result of partitioning proper causal paths by first edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeConsistency {
    pub consistent: bool,
    /// First edges whose cells lie wholly in π (they receive the active level).
    pub active: BTreeSet<(Vertex, Vertex)>,
    /// A first edge whose cell is split by π, when inconsistent.
    pub split: Option<(Vertex, Vertex)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecantingDistrict {
    pub district: VertexSet,
    pub in_pi: Path,
    pub not_in_pi: Path,
}

fn separation_condition(g: &Admg, label: String, a: VertexSet, b: VertexSet, z: VertexSet) -> Result<Condition> {
    let q = SeparationQuery::new(a, b, z);
    let passed = m_separated(g, &q)?;
    let witness = if passed {
        None
    } else {
        m_connecting_path(g, &q)?.map(|p| Witness::path(g, &p))
    };
    Ok(Condition { label, passed, witness })
}

fn selection_vertex(g: &Admg) -> Result<Vertex> {
    g.selection().ok_or(GraphError::NoSelectionVertex)
}

/// Vertices outside `x` lying on some proper causal path from `x` to `y`.
pub fn causal_path_vertices(g: &Admg, x: &VertexSet, y: &VertexSet) -> Result<VertexSet> {
    g.check_disjoint(x, y)?;
    let seeds: VertexSet = x
        .iter()
        .flat_map(|&v| g.children(v).iter().copied())
        .filter(|c| !x.contains(c))
        .collect();
    let forward = g.closure(&seeds, |v| g.children(v), |u| !x.contains(&u));
    let backward = g.ancestors_avoiding(y, x);
    Ok(forward.intersection(&backward).copied().collect())
}

/// Mediators: vertices on proper causal paths from `x` to `y` outside both.
pub fn mediators(g: &Admg, x: &VertexSet, y: &VertexSet) -> Result<VertexSet> {
    let mut cn = causal_path_vertices(g, x, y)?;
    cn.retain(|v| !y.contains(v));
    Ok(cn)
}

/// Mediators listed in topological order.
pub fn ordered_mediators(g: &Admg, x: &VertexSet, y: &VertexSet) -> Result<Vec<Vertex>> {
    let m = mediators(g, x, y)?;
    Ok(g.topological_order().into_iter().filter(|v| m.contains(v)).collect())
}

fn check_sets(g: &Admg, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<()> {
    g.check_disjoint(x, y)?;
    g.check_disjoint(x, z)?;
    g.check_disjoint(y, z)
}

/// Backdoor criterion: (a) no `Z` is a descendant of `X`; (b) `Z` blocks
/// every path between `X` and `Y` in the proper backdoor graph.
pub fn backdoor_admissible(g: &Admg, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<CriterionReport> {
    check_sets(g, x, y, z)?;
    let de_x = g.descendants(x)?;
    let offending = z.iter().find(|v| de_x.contains(v));
    let a = Condition {
        label: "backdoor.a".into(),
        passed: offending.is_none(),
        witness: offending.map(|&v| Witness::Vertex {
            name: g.name(v).to_string(),
            reason: "descendant of the exposure".into(),
        }),
    };
    let pbd = proper_backdoor_graph(g, x, y)?;
    let b = separation_condition(&pbd, "backdoor.b".into(), x.clone(), y.clone(), z.clone())?;
    Ok(CriterionReport::from_conditions(vec![a, b]))
}

fn gac_conditions(g: &Admg, x: &VertexSet, y: &VertexSet, pair: &AdmissiblePair) -> Result<Vec<Condition>> {
    let s = selection_vertex(g)?;
    check_sets(g, x, y, &pair.z)?;
    if let Some(&v) = pair.zt.difference(&pair.z).next() {
        return Err(GraphError::ZtNotSubset(g.name(v).to_string()));
    }
    let s_set = VertexSet::from([s]);
    for set in [x, y, &pair.z] {
        g.check_disjoint(set, &s_set)?;
    }

    let cn = causal_path_vertices(g, x, y)?;
    let forbidden = g.closure(&cn, |v| g.children(v), |u| !x.contains(&u));
    let mut offending: Vec<Vertex> = pair.z.iter().copied().filter(|v| forbidden.contains(v)).collect();
    offending.sort_by(|a, b| g.name(*a).cmp(g.name(*b)));
    let c1 = Condition {
        label: "gac.1".into(),
        passed: offending.is_empty(),
        witness: offending.first().map(|&v| Witness::Vertex {
            name: g.name(v).to_string(),
            reason: "descendant of a vertex on a proper causal path".into(),
        }),
    };

    let pbd = proper_backdoor_graph(g, x, y)?;
    let mut zs = pair.z.clone();
    zs.insert(s);
    let c2 = separation_condition(&pbd, "gac.2".into(), x.clone(), y.clone(), zs)?;
    let c3 = separation_condition(&pbd, "gac.3".into(), y.clone(), s_set, pair.zt.clone())?;
    Ok(vec![c1, c2, c3])
}

/// Generalized adjustment criterion with a selection vertex and external
/// data on `ZT`.
pub fn gac_admissible(g: &Admg, x: &VertexSet, y: &VertexSet, pair: &AdmissiblePair) -> Result<CriterionReport> {
    Ok(CriterionReport::from_conditions(gac_conditions(g, x, y, pair)?))
}

/// Verdicts of the adjustment criterion on a graph and on its extended
/// graph with the extended nodes as exposure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GacSides {
    pub original: bool,
    pub extended: bool,
}

impl GacSides {
    pub fn agree(&self) -> bool {
        self.original == self.extended
    }
}

/// Requires every exposure vertex to have a proper causal path to `y`;
/// otherwise that vertex has no counterpart in the extended exposure.
pub fn gac_extended_equivalence(g: &Admg, x: &VertexSet, y: &VertexSet, pair: &AdmissiblePair) -> Result<GacSides> {
    let first = g.first_edges(x, y)?;
    if let Some(&v) = x.iter().find(|v| !first.iter().any(|(s, _)| s == *v)) {
        return Err(GraphError::NoCausalPath(g.name(v).to_string()));
    }
    let original = gac_admissible(g, x, y, pair)?.verdict;
    let ext = extend_graph(g, x, y)?;
    let extended = gac_admissible(ext.graph(), &ext.exposure_nodes(), y, pair)?.verdict;
    Ok(GacSides { original, extended })
}

fn validate_pi(g: &Admg, pi: &PathSetPi) -> Result<()> {
    g.check_disjoint(pi.exposure(), pi.outcome())?;
    for p in pi.paths() {
        if !is_proper_causal(g, p, pi.exposure(), pi.outcome()) {
            return Err(GraphError::NotProperPath(format!("{:?}", p.vertices())));
        }
    }
    Ok(())
}

/// Edge consistency: π must be a union of whole first-edge cells of the
/// proper causal paths.
pub fn edge_consistent(g: &Admg, q: &PseQuery) -> Result<EdgeConsistency> {
    validate_pi(g, &q.pi)?;
    let all = g.proper_causal_paths(q.exposure(), q.outcome())?;
    let touched = q.pi.first_edges();
    let split = all
        .paths()
        .iter()
        .find(|p| p.first_edge().is_some_and(|e| touched.contains(&e)) && !q.pi.contains(p))
        .and_then(Path::first_edge);
    Ok(EdgeConsistency {
        consistent: split.is_none(),
        active: if split.is_none() { touched } else { BTreeSet::new() },
        split,
    })
}

/// Districts of the subgraph on ancestors of `Y` in `G[V \ X]` that hold the
/// second vertices of a path in π and a path outside π from the same
/// exposure vertex.
pub fn recanting_districts(g: &Admg, q: &PseQuery) -> Result<Vec<RecantingDistrict>> {
    validate_pi(g, &q.pi)?;
    let x = q.exposure();
    let all = g.proper_causal_paths(x, q.outcome())?;
    let scope = g.ancestors_avoiding(q.outcome(), x);
    let mut by_length: Vec<&Path> = all.paths().iter().collect();
    by_length.sort_by_key(|p| p.vertices().len());
    let (inside, outside): (Vec<&Path>, Vec<&Path>) = by_length.into_iter().partition(|p| q.pi.contains(p));
    let mut found = Vec::new();
    for district in g.districts_within(&scope) {
        let pair = inside.iter().find_map(|p| {
            if !district.contains(&p.vertices()[1]) {
                return None;
            }
            outside
                .iter()
                .find(|o| o.source() == p.source() && district.contains(&o.vertices()[1]))
                .map(|o| ((*p).clone(), (*o).clone()))
        });
        if let Some((in_pi, not_in_pi)) = pair {
            found.push(RecantingDistrict { district, in_pi, not_in_pi });
        }
    }
    Ok(found)
}

fn mediator_condition(g: &Admg, x: &VertexSet, m: Vertex, y: &VertexSet, z: &VertexSet, s: Vertex) -> Result<Condition> {
    let label = format!("mediator.{}", g.name(m));
    if z.contains(&m) {
        return Ok(Condition {
            label,
            passed: false,
            witness: Some(Witness::Vertex {
                name: g.name(m).to_string(),
                reason: "mediator is in the adjustment set".into(),
            }),
        });
    }
    let mut sources = x.clone();
    sources.insert(m);
    let pbd = proper_backdoor_graph(g, &sources, y)?;
    let mut zs = z.clone();
    zs.insert(s);
    separation_condition(&pbd, label, VertexSet::from([m]), y.clone(), zs)
}

/// Conditions for the selected mediation formula with one mediator.
pub fn theorem2_check(g: &Admg, x: Vertex, m: Vertex, y: Vertex, pair: &AdmissiblePair) -> Result<CriterionReport> {
    let s = selection_vertex(g)?;
    let expected: Vec<Vertex> = g.children(x).intersection(g.parents(y)).copied().collect();
    if expected != [m] {
        return Err(GraphError::MediatorMismatch {
            given: vec![g.name(m).to_string()],
            expected: g.names_of(&expected),
        });
    }
    let (xs, ys) = (VertexSet::from([x]), VertexSet::from([y]));
    let mut conditions = gac_conditions(g, &xs, &ys, pair)?;
    conditions.push(mediator_condition(g, &xs, m, &ys, &pair.z, s)?);
    Ok(CriterionReport::from_conditions(conditions))
}

/// Conditions for the path-specific adjustment formula.
pub fn theorem3_check(g: &Admg, q: &PseQuery, pair: &AdmissiblePair) -> Result<CriterionReport> {
    let s = selection_vertex(g)?;
    let consistency = edge_consistent(g, q)?;
    if let Some((a, b)) = consistency.split {
        return Err(GraphError::EdgeInconsistent(format!("{} → {}", g.name(a), g.name(b))));
    }
    let (x, y) = (q.exposure(), q.outcome());
    let mut conditions = gac_conditions(g, x, y, pair)?;
    for m in ordered_mediators(g, x, y)? {
        conditions.push(mediator_condition(g, x, m, y, &pair.z, s)?);
    }
    let recanting = recanting_districts(g, q)?;
    conditions.push(Condition {
        label: "recanting_district".into(),
        passed: recanting.is_empty(),
        witness: recanting.first().map(|r| Witness::District {
            members: g.names_of(&r.district),
            in_pi: r.in_pi.render(g),
            not_in_pi: r.not_in_pi.render(g),
        }),
    });
    Ok(CriterionReport::from_conditions(conditions))
}

/// All pairs `(Z, ZT)` with `Z` drawn from `candidates`, `|Z| <= max_size`
/// and `ZT ⊆ Z` that satisfy the adjustment criterion, ordered by
/// `(|Z|, |ZT|, names)`.
pub fn find_admissible_pairs(
    g: &Admg,
    x: &VertexSet,
    y: &VertexSet,
    candidates: &VertexSet,
    max_size: usize,
) -> Result<Vec<AdmissiblePair>> {
    let s = selection_vertex(g)?;
    g.check_disjoint(candidates, x)?;
    g.check_disjoint(candidates, y)?;
    g.check_disjoint(candidates, &VertexSet::from([s]))?;
    let k = candidates.len();
    let size = 1u128
        .checked_shl((k + max_size.min(k)) as u32)
        .unwrap_or(u128::MAX);
    if size > SEARCH_SPACE_LIMIT {
        return Err(GraphError::SearchSpaceTooLarge { size, limit: SEARCH_SPACE_LIMIT });
    }
    let mut pool: Vec<Vertex> = candidates.iter().copied().collect();
    pool.sort_by(|a, b| g.name(*a).cmp(g.name(*b)));
    let subsets = |items: &[Vertex], limit: usize| -> Vec<Vec<Vertex>> {
        (0u64..1 << items.len())
            .filter(|mask| mask.count_ones() as usize <= limit)
            .map(|mask| (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i]).collect())
            .collect()
    };
    let mut found = Vec::new();
    for z in subsets(&pool, max_size) {
        for zt in subsets(&z, z.len()) {
            let pair = AdmissiblePair { z: z.iter().copied().collect(), zt: zt.iter().copied().collect() };
            if gac_admissible(g, x, y, &pair)?.verdict {
                found.push((z.clone(), zt, pair));
            }
        }
    }
    found.sort_by(|(za, ta, _), (zb, tb, _)| {
        za.len()
            .cmp(&zb.len())
            .then(ta.len().cmp(&tb.len()))
            .then_with(|| g.cmp_sequences(za, zb))
            .then_with(|| g.cmp_sequences(ta, tb))
    });
    Ok(found.into_iter().map(|(_, _, p)| p).collect())
}

/// Outcome of one separation statement from the mediator lemma suite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaConclusion {
    pub mediator: Vertex,
    /// Letter `a` to `h`.
    pub item: char,
    /// `None` when the required extended nodes do not exist.
    pub holds: Option<bool>,
}

/// Which hypotheses qualify a graph for the mediator lemma suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaPremises {
    /// Only the two separations the lemma states: `X ⊥ Y | Z, S` in the
    /// proper backdoor graph and the mediator condition for every mediator.
    Separations,
    /// The full hypotheses of the theorems that use the lemma: every
    /// adjustment criterion condition plus the mediator conditions.
    Theorem,
}

/// Separation statements in the extended graph implied by the adjustment
/// and mediator conditions.
///
/// Returns `Ok(None)` when the chosen premises fail. Item (e) conditions
/// on all mediators.
///
/// Under `Separations` alone items (g) and (h) can fail when `S` descends
/// from `Y`: the path `M -> Y <- X^e_y` is then opened by conditioning on
/// `S`. The third adjustment condition rules that out.
pub fn lemma2_conclusions(
    g: &Admg,
    x: &VertexSet,
    y: &VertexSet,
    pair: &AdmissiblePair,
    premises: LemmaPremises,
) -> Result<Option<Vec<LemmaConclusion>>> {
    let s = selection_vertex(g)?;
    let conditions = gac_conditions(g, x, y, pair)?;
    let qualifies = match premises {
        LemmaPremises::Separations => conditions[1].passed,
        LemmaPremises::Theorem => conditions.iter().all(|c| c.passed),
    };
    if !qualifies {
        return Ok(None);
    }
    let meds = ordered_mediators(g, x, y)?;
    for &m in &meds {
        if !mediator_condition(g, x, m, y, &pair.z, s)?.passed {
            return Ok(None);
        }
    }
    let mut zs = pair.z.clone();
    zs.insert(s);
    let med_set: VertexSet = meds.iter().copied().collect();

    let ext = extend_graph(g, x, y)?;
    let ge = ext.graph();
    let xe = ext.exposure_nodes();
    let sep = |h: &Admg, a: VertexSet, b: &VertexSet, cond: VertexSet| m_separated(h, &SeparationQuery::new(a, b.clone(), cond));
    let with = |base: &VertexSet, v: Vertex| {
        let mut out = base.clone();
        out.insert(v);
        out
    };

    let a_holds = sep(&proper_backdoor_graph(ge, x, y)?, x.clone(), y, zs.clone())?;
    let b_holds = sep(&proper_backdoor_graph(ge, &xe, y)?, xe.clone(), y, zs.clone())?;
    let mut out = Vec::new();
    for &m in &meds {
        let mset = VertexSet::from([m]);
        let pa_m: VertexSet = g.parents(m).intersection(&med_set).copied().collect();
        let mut pa_zs = zs.clone();
        pa_zs.extend(pa_m.iter().copied());

        let pbd_xe_m = proper_backdoor_graph(ge, &with(&xe, m), y)?;
        let c = sep(&pbd_xe_m, mset.clone(), y, zs.clone())?;
        let d = sep(&proper_backdoor_graph(ge, &with(x, m), y)?, mset.clone(), y, zs.clone())?;
        let e = lemma2_item_e(&ext, x, m, y, &med_set, &zs)?;
        let f = sep(&pbd_xe_m, mset.clone(), y, pa_zs.clone())?;
        let pbd_to_m = proper_backdoor_graph(ge, &xe, &mset)?;
        let gg = sep(&pbd_to_m, mset.clone(), &xe, zs.clone())?;
        let h = sep(&pbd_to_m, mset.clone(), &xe, pa_zs)?;
        let items = [
            ('a', Some(a_holds)),
            ('b', Some(b_holds)),
            ('c', Some(c)),
            ('d', Some(d)),
            ('e', e),
            ('f', Some(f)),
            ('g', Some(gg)),
            ('h', Some(h)),
        ];
        out.extend(items.into_iter().map(|(item, holds)| LemmaConclusion { mediator: m, item, holds }));
    }
    Ok(Some(out))
}

fn lemma2_item_e(
    ext: &ExtendedGraph,
    x: &VertexSet,
    m: Vertex,
    y: &VertexSet,
    mediators: &VertexSet,
    zs: &VertexSet,
) -> Result<Option<bool>> {
    let mut item = None;
    for &xi in x {
        for &yj in y {
            let (Some(xe_m), Some(xe_y)) = (ext.node_for(xi, m), ext.node_for(xi, yj)) else {
                continue;
            };
            let cut = remove_incoming(ext.graph(), &VertexSet::from([xe_y]))?;
            let pbd = proper_backdoor_graph(&cut, &VertexSet::from([xe_m]), y)?;
            let mut cond = zs.clone();
            cond.insert(xe_y);
            cond.extend(mediators.iter().copied());
            let holds = m_separated(&pbd, &SeparationQuery::new(VertexSet::from([xe_m]), y.clone(), cond))?;
            item = Some(item.unwrap_or(true) && holds);
        }
    }
    Ok(item)
}
