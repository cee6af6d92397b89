//! Identification formulas evaluated exactly on an SCM's joint distribution.

use std::collections::BTreeMap;

use super::scm::{Assignment, Joint};
use crate::criteria::{edge_consistent, ordered_mediators, AdmissiblePair, PseQuery};
use crate::error::OracleError;
use crate::graph::{Admg, Vertex, VertexSet};

type Result<T> = std::result::Result<T, OracleError>;

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    /// Back-door adjustment without selection: `sum_z E[Y|x,z] p(z)`.
    Eq3 { x: usize },
    /// Adjustment with selection and external `zt`.
    Eq4 { x: usize },
    /// Mediation formula without selection.
    Eq5 { x: usize, x_prime: usize },
    /// Selected mediation formula.
    Eq6 { x: usize, x_prime: usize },
    /// Path-specific adjustment formula for `q` with active level `x` and
    /// reference level `x_prime`.
    Thm3 { q: PseQuery, x: usize, x_prime: usize },
}

/// Roles shared by every formula.
#[derive(Clone, Debug, PartialEq)]
pub struct FormulaArgs {
    pub exposure: Vertex,
    pub outcome: Vertex,
    /// Single mediator for Eq5/Eq6.
    pub mediator: Option<Vertex>,
    pub pair: AdmissiblePair,
}

/// Conditioning event: positions in the joint and required values.
type Event = Vec<(usize, usize)>;

struct Evaluator<'a> {
    joint: &'a Joint,
    g: &'a Admg,
}

impl Evaluator<'_> {
    fn pos(&self, v: Vertex) -> Result<usize> {
        self.joint
            .position(v)
            .ok_or_else(|| OracleError::InvalidConfig(format!("`{}` is not an observed vertex", self.g.name(v))))
    }

    fn describe(&self, event: &Event, selected: bool) -> String {
        let mut parts: Vec<String> = event.iter().map(|&(k, v)| format!("{}={v}", self.joint.names[k])).collect();
        if selected {
            parts.push("S=1".into());
        }
        parts.join(", ")
    }

    /// `P(event)` in the population or jointly with `S = 1`.
    fn prob(&self, event: &Event, selected: bool) -> f64 {
        self.joint
            .cells()
            .filter(|(values, _, _)| event.iter().all(|&(k, v)| values[k] == v))
            .map(|(_, p, s)| if selected { p * s } else { p })
            .sum()
    }

    /// `E[target | event]` (optionally also given `S = 1`).
    fn mean(&self, target: usize, event: &Event, selected: bool) -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for (values, p, s) in self.joint.cells() {
            if event.iter().all(|&(k, v)| values[k] == v) {
                let w = if selected { p * s } else { p };
                num += w * values[target] as f64;
                den += w;
            }
        }
        if den <= 0.0 {
            return Err(OracleError::ZeroProbabilityConditioning(self.describe(event, selected)));
        }
        Ok(num / den)
    }

    fn conditional(&self, target: usize, value: usize, event: &Event, selected: bool) -> Result<f64> {
        let den = self.prob(event, selected);
        if den <= 0.0 {
            return Err(OracleError::ZeroProbabilityConditioning(self.describe(event, selected)));
        }
        let mut joint_event = event.clone();
        joint_event.push((target, value));
        Ok(self.prob(&joint_event, selected) / den)
    }

    /// Every value combination of `vars`.
    fn combos(&self, vars: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &k in vars {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..self.joint.cards[k]).map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// `sum_z f(z) w(z)` where `w(z) = p(z)` without selection or
    /// `p(z \ zt | zt, S=1) p(zt)` with it. Terms with zero weight are skipped.
    fn outer(&self, pair: &AdmissiblePair, with_selection: bool, mut f: impl FnMut(&Event) -> Result<f64>) -> Result<f64> {
        let z: Vec<usize> = pair.z.iter().map(|&v| self.pos(v)).collect::<Result<_>>()?;
        let zt: Vec<usize> = pair.zt.iter().map(|&v| self.pos(v)).collect::<Result<_>>()?;
        let mut total = 0.0;
        for values in self.combos(&z) {
            let event: Event = z.iter().copied().zip(values).collect();
            let weight = if with_selection {
                let zt_event: Event = event.iter().filter(|(k, _)| zt.contains(k)).copied().collect();
                let p_zt = self.prob(&zt_event, false);
                if p_zt == 0.0 {
                    continue;
                }
                let p_zt_sel = self.prob(&zt_event, true);
                if p_zt_sel <= 0.0 {
                    return Err(OracleError::ZeroProbabilityConditioning(self.describe(&zt_event, true)));
                }
                self.prob(&event, true) / p_zt_sel * p_zt
            } else {
                self.prob(&event, false)
            };
            if weight == 0.0 {
                continue;
            }
            total += weight * f(&event)?;
        }
        Ok(total)
    }
}

/// Evaluates `formula` exactly on `joint` (the observed distribution of an
/// SCM on `g`).
pub fn evaluate(g: &Admg, joint: &Joint, formula: &Formula, args: &FormulaArgs) -> Result<f64> {
    let ev = Evaluator { joint, g };
    let xk = ev.pos(args.exposure)?;
    let yk = ev.pos(args.outcome)?;
    let pair = &args.pair;
    let mediator = || -> Result<usize> {
        let m = args.mediator.ok_or_else(|| OracleError::InvalidConfig("the mediation formulas need a mediator".into()))?;
        ev.pos(m)
    };
    match formula {
        Formula::Eq3 { x } | Formula::Eq4 { x } => {
            let selected = matches!(formula, Formula::Eq4 { .. });
            ev.outer(pair, selected, |z| {
                let mut e = z.clone();
                e.push((xk, *x));
                ev.mean(yk, &e, selected)
            })
        }
        Formula::Eq5 { x, x_prime } | Formula::Eq6 { x, x_prime } => {
            let selected = matches!(formula, Formula::Eq6 { .. });
            let mk = mediator()?;
            ev.outer(pair, selected, |z| {
                let mut total = 0.0;
                for m in 0..joint.cards[mk] {
                    let mut em = z.clone();
                    em.push((xk, *x_prime));
                    let pm = ev.conditional(mk, m, &em, selected)?;
                    if pm == 0.0 {
                        continue;
                    }
                    let mut ey = z.clone();
                    ey.push((xk, *x));
                    ey.push((mk, m));
                    total += pm * ev.mean(yk, &ey, selected)?;
                }
                Ok(total)
            })
        }
        Formula::Thm3 { q, x, x_prime } => thm3(&ev, g, args, q, *x, *x_prime),
    }
}

fn thm3(ev: &Evaluator<'_>, g: &Admg, args: &FormulaArgs, q: &PseQuery, x: usize, x_prime: usize) -> Result<f64> {
    let consistency = edge_consistent(g, q)?;
    if let Some((a, b)) = consistency.split {
        return Err(crate::GraphError::EdgeInconsistent(format!("{} → {}", g.name(a), g.name(b))).into());
    }
    let (xv, yv) = (args.exposure, args.outcome);
    let xs: VertexSet = [xv].into();
    let ys: VertexSet = [yv].into();
    let mediators = ordered_mediators(g, &xs, &ys)?;
    let level = |head: Vertex| if consistency.active.contains(&(xv, head)) { x } else { x_prime };
    let xk = ev.pos(xv)?;
    let yk = ev.pos(yv)?;
    let mk: Vec<usize> = mediators.iter().map(|&m| ev.pos(m)).collect::<Result<_>>()?;
    ev.outer(&args.pair, true, |z| {
        let mut total = 0.0;
        'combo: for m in ev.combos(&mk) {
            let mut weight = 1.0;
            for (i, &mi) in mediators.iter().enumerate() {
                let mut e = z.clone();
                if g.parents(mi).contains(&xv) {
                    e.push((xk, level(mi)));
                }
                for (j, &mj) in mediators.iter().enumerate() {
                    if g.parents(mi).contains(&mj) {
                        e.push((mk[j], m[j]));
                    }
                }
                weight *= ev.conditional(mk[i], m[i], &e, true)?;
                if weight == 0.0 {
                    continue 'combo;
                }
            }
            let mut e = z.clone();
            if g.parents(yv).contains(&xv) {
                e.push((xk, level(yv)));
            }
            e.extend(mk.iter().copied().zip(m.iter().copied()));
            total += weight * ev.mean(yk, &e, true)?;
        }
        Ok(total)
    })
}

/// The counterfactual assignment matching a path-specific query: first
/// edges in π carry `x`, the others `x_prime`.
pub fn pse_assignment(g: &Admg, q: &PseQuery, x: usize, x_prime: usize) -> Result<Assignment> {
    let consistency = edge_consistent(g, q)?;
    let edges = g.first_edges(q.exposure(), q.outcome())?;
    Ok(edges
        .into_iter()
        .map(|e| (e, if consistency.active.contains(&e) { x } else { x_prime }))
        .collect::<BTreeMap<_, _>>())
}

/// `E[Y(x)]` by truncated factorisation of the joint of a DAG:
/// `sum_v prod_{V != X} p(v | pa(v)) [X = x] y`.
pub fn truncated_factorisation(g: &Admg, joint: &Joint, exposure: Vertex, outcome: Vertex, x: usize) -> Result<f64> {
    if !g.bidirected_edges().is_empty() {
        return Err(OracleError::InvalidConfig("truncated factorisation needs a graph without bidirected edges".into()));
    }
    let ev = Evaluator { joint, g };
    let xk = ev.pos(exposure)?;
    let yk = ev.pos(outcome)?;
    // Conditional tables p(v | pa(v)) keyed by (position, parent values, value).
    let parents: Vec<Vec<usize>> = joint
        .vars
        .iter()
        .map(|&v| g.parents(v).iter().map(|&p| ev.pos(p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for (values, _, _) in joint.cells() {
        if values[xk] != x {
            continue;
        }
        let mut prob = 1.0;
        for (k, pa) in parents.iter().enumerate() {
            if k == xk {
                continue;
            }
            let event: Event = pa.iter().map(|&p| (p, values[p])).collect();
            if ev.prob(&event, false) == 0.0 {
                prob = 0.0;
                break;
            }
            prob *= ev.conditional(k, values[k], &event, false)?;
            if prob == 0.0 {
                break;
            }
        }
        total += prob * values[yk] as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AdmgBuilder;
    use crate::oracle::scm::{uniform_assignment, DiscreteScm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

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

    fn args(g: &Admg, z: &[&str]) -> FormulaArgs {
        FormulaArgs {
            exposure: g.vertex("X").unwrap(),
            outcome: g.vertex("Y").unwrap(),
            mediator: Some(g.vertex("M").unwrap()),
            pair: AdmissiblePair::from_names(g, z, z).unwrap(),
        }
    }

    #[test]
    fn selected_mediation_formula_matches_counterfactual() {
        let g = fig1b();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (x, m, y) = (g.vertex("X").unwrap(), g.vertex("M").unwrap(), g.vertex("Y").unwrap());
        for _ in 0..10 {
            let scm = DiscreteScm::random(&g, &mut rng).unwrap();
            let joint = scm.joint().unwrap();
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let value = evaluate(&g, &joint, &Formula::Eq6 { x: a, x_prime: b }, &args(&g, &["C"])).unwrap();
                let truth = scm.counterfactual_mean(&[((x, y), a), ((x, m), b)].into(), y).unwrap();
                assert!((value - truth).abs() < 1e-12, "{value} vs {truth}");
            }
        }
    }

    #[test]
    fn unit_selection_reduces_to_plain_mediation_formula() {
        let g = fig1b();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let scm = DiscreteScm::random(&g, &mut rng).unwrap();
        let mut joint = scm.joint().unwrap();
        joint.selected.iter_mut().for_each(|s| *s = 0.5);
        let a = args(&g, &["C"]);
        let eq5 = evaluate(&g, &joint, &Formula::Eq5 { x: 1, x_prime: 0 }, &a).unwrap();
        let eq6 = evaluate(&g, &joint, &Formula::Eq6 { x: 1, x_prime: 0 }, &a).unwrap();
        assert!((eq5 - eq6).abs() < 1e-12);
    }

    #[test]
    fn truncated_factorisation_agrees_with_enumeration() {
        let g = fig1b();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (x, y) = (g.vertex("X").unwrap(), g.vertex("Y").unwrap());
        let scm = DiscreteScm::random(&g, &mut rng).unwrap();
        let joint = scm.joint().unwrap();
        for v in 0..2 {
            let a = scm.counterfactual_mean(&uniform_assignment(&g, x, y, v).unwrap(), y).unwrap();
            let b = truncated_factorisation(&g, &joint, x, y, v).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_probability_conditioning_is_reported() {
        let g = fig1b();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let scm = DiscreteScm::random(&g, &mut rng).unwrap();
        let mut joint = scm.joint().unwrap();
        let xk = joint.position(g.vertex("X").unwrap()).unwrap();
        let cells: Vec<Vec<usize>> = joint.cells().map(|c| c.0).collect();
        for (c, values) in cells.iter().enumerate() {
            if values[xk] == 1 {
                joint.probs[c] = 0.0;
            }
        }
        let err = evaluate(&g, &joint, &Formula::Eq4 { x: 1 }, &args(&g, &["C"])).unwrap_err();
        assert!(matches!(err, OracleError::ZeroProbabilityConditioning(_)));
    }
}
