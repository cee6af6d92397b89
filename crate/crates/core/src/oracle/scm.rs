//! Discrete structural causal models with finite noise, evaluated exactly by
//! enumerating every joint noise configuration.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::OracleError;
use crate::estimate::{Column, ColumnKind, Dataset};
use crate::graph::{Admg, Vertex};

type Result<T> = std::result::Result<T, OracleError>;

/// Largest number of joint noise configurations enumerated.
pub const STATE_SPACE_LIMIT: u128 = 10_000_000;

/// Structural function of one vertex, stored as a lookup table.
///
/// Inputs are, in order: parent values (parents sorted by vertex index),
/// the latent bits of the vertex's bidirected edges (in edge order) and the
/// vertex's own noise value. The table is indexed in mixed radix with the
/// last input varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexModel {
    pub cardinality: usize,
    pub noise: Vec<f64>,
    pub table: Vec<usize>,
}

/// `logit P(S=1 | pa) = intercept + sum_j coefficients[j] * pa_j`, parents
/// sorted by vertex index.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl SelectionModel {
    pub fn probability(&self, parents: &[usize]) -> f64 {
        let eta = self.intercept + self.coefficients.iter().zip(parents).map(|(b, &v)| b * v as f64).sum::<f64>();
        crate::estimate::glm::sigmoid(eta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteScm {
    graph: Admg,
    order: Vec<Vertex>,
    /// Indexed by vertex index; `None` for the selection vertex.
    models: Vec<Option<VertexModel>>,
    /// One binary latent per bidirected edge: `(a, b, P(U=1))`.
    latents: Vec<(Vertex, Vertex, f64)>,
    selection: Option<SelectionModel>,
}

/// First-edge value overrides: a child reads `value` in place of the tail's
/// value along edge `(tail, head)`.
pub type Assignment = BTreeMap<(Vertex, Vertex), usize>;

impl DiscreteScm {
    pub fn new(
        graph: Admg,
        models: BTreeMap<Vertex, VertexModel>,
        latent_probs: Vec<f64>,
        selection: Option<SelectionModel>,
    ) -> Result<Self> {
        let bidirected = graph.bidirected_edges();
        if latent_probs.len() != bidirected.len() {
            return Err(OracleError::InvalidScm(format!(
                "{} latent probabilities for {} bidirected edges",
                latent_probs.len(),
                bidirected.len()
            )));
        }
        let latents: Vec<(Vertex, Vertex, f64)> = bidirected.iter().zip(&latent_probs).map(|(&(a, b), &p)| (a, b, p)).collect();
        let mut slots = vec![None; graph.n()];
        for v in graph.vertices() {
            if Some(v) == graph.selection() {
                if models.contains_key(&v) {
                    return Err(OracleError::InvalidScm("the selection vertex uses the selection model".into()));
                }
                continue;
            }
            let Some(model) = models.get(&v) else {
                return Err(OracleError::InvalidScm(format!("no model for `{}`", graph.name(v))));
            };
            slots[v.index()] = Some(model.clone());
        }
        let scm = DiscreteScm { order: graph.topological_order(), graph, models: slots, latents, selection };
        scm.validate()?;
        Ok(scm)
    }

    /// Replaces the selection model.
    pub fn with_selection(mut self, selection: SelectionModel) -> Result<Self> {
        self.selection = Some(selection);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for v in self.graph.vertices() {
            let Some(m) = &self.models[v.index()] else { continue };
            let name = self.graph.name(v);
            if m.cardinality == 0 || m.noise.is_empty() {
                return Err(OracleError::InvalidScm(format!("`{name}` has an empty support")));
            }
            let total: f64 = m.noise.iter().sum();
            if (total - 1.0).abs() > 1e-12 || m.noise.iter().any(|p| *p < 0.0) {
                return Err(OracleError::InvalidScm(format!("noise probabilities of `{name}` sum to {total}")));
            }
            let inputs: usize = self.input_radix(v).iter().product();
            if m.table.len() != inputs {
                return Err(OracleError::InvalidScm(format!("table of `{name}` has {} entries, expected {inputs}", m.table.len())));
            }
            if m.table.iter().any(|&o| o >= m.cardinality) {
                return Err(OracleError::InvalidScm(format!("table of `{name}` leaves its support")));
            }
        }
        for &(_, _, p) in &self.latents {
            if !(0.0..=1.0).contains(&p) {
                return Err(OracleError::InvalidScm(format!("latent probability {p} outside [0, 1]")));
            }
        }
        match (self.graph.selection(), &self.selection) {
            (Some(s), Some(sel)) if sel.coefficients.len() != self.graph.parents(s).len() => Err(OracleError::InvalidScm(format!(
                "selection model has {} coefficients for {} parents",
                sel.coefficients.len(),
                self.graph.parents(s).len()
            ))),
            (Some(_), None) => Err(OracleError::InvalidScm("the graph has a selection vertex but no selection model".into())),
            (None, Some(_)) => Err(OracleError::InvalidScm("selection model without a selection vertex".into())),
            _ => Ok(()),
        }
    }

    fn latents_of(&self, v: Vertex) -> Vec<usize> {
        self.latents
            .iter()
            .enumerate()
            .filter(|(_, (a, b, _))| *a == v || *b == v)
            .map(|(i, _)| i)
            .collect()
    }

    fn input_radix(&self, v: Vertex) -> Vec<usize> {
        let mut radix: Vec<usize> = self.graph.parents(v).iter().map(|p| self.cardinality(*p)).collect();
        radix.extend(self.latents_of(v).iter().map(|_| 2));
        radix.push(self.models[v.index()].as_ref().map_or(1, |m| m.noise.len()));
        radix
    }

    pub fn graph(&self) -> &Admg {
        &self.graph
    }

    pub fn model(&self, v: Vertex) -> Option<&VertexModel> {
        self.models[v.index()].as_ref()
    }

    pub fn selection_model(&self) -> Option<&SelectionModel> {
        self.selection.as_ref()
    }

    pub fn cardinality(&self, v: Vertex) -> usize {
        self.models[v.index()].as_ref().map_or(2, |m| m.cardinality)
    }

    /// Vertices other than the selection vertex, in index order.
    pub fn observed(&self) -> Vec<Vertex> {
        self.graph.vertices().filter(|&v| Some(v) != self.graph.selection()).collect()
    }

    /// Number of joint noise configurations (own noise and latents).
    pub fn state_space(&self) -> u128 {
        let own: u128 = self.models.iter().flatten().map(|m| m.noise.len() as u128).product();
        own.saturating_mul(1u128 << self.latents.len().min(100))
    }

    /// Visits every joint noise configuration with its probability and the
    /// resulting vertex values under `assignment`.
    fn enumerate(&self, assignment: &Assignment, mut visit: impl FnMut(f64, &[usize])) -> Result<()> {
        let size = self.state_space();
        if size > STATE_SPACE_LIMIT {
            return Err(OracleError::StateSpaceTooLarge { size, limit: STATE_SPACE_LIMIT });
        }
        let observed = self.observed();
        let latent_n = self.latents.len();
        let mut noise_idx = vec![0usize; observed.len()];
        let mut latent = vec![0usize; latent_n];
        let inputs: Vec<(Vec<Vertex>, Vec<usize>, Vec<usize>)> = self
            .graph
            .vertices()
            .map(|v| (self.graph.parents(v).iter().copied().collect(), self.latents_of(v), self.input_radix(v)))
            .collect();
        let mut k_index = vec![usize::MAX; self.graph.n()];
        for (k, v) in observed.iter().enumerate() {
            k_index[v.index()] = k;
        }
        let mut values = vec![0usize; self.graph.n()];
        loop {
            let mut prob = 1.0;
            for (i, &u) in latent.iter().enumerate() {
                let p = self.latents[i].2;
                prob *= if u == 1 { p } else { 1.0 - p };
            }
            for (k, &v) in observed.iter().enumerate() {
                prob *= self.models[v.index()].as_ref().expect("observed").noise[noise_idx[k]];
            }
            if prob > 0.0 {
                for &v in &self.order {
                    if Some(v) == self.graph.selection() {
                        continue;
                    }
                    let (parents, lat, radix) = &inputs[v.index()];
                    let mut index = 0;
                    for (j, &p) in parents.iter().enumerate() {
                        let value = assignment.get(&(p, v)).copied().unwrap_or(values[p.index()]);
                        index = index * radix[j] + value;
                    }
                    for &l in lat {
                        index = index * 2 + latent[l];
                    }
                    index = index * radix[radix.len() - 1] + noise_idx[k_index[v.index()]];
                    values[v.index()] = self.models[v.index()].as_ref().expect("observed").table[index];
                }
                visit(prob, &values);
            }
            // Advance: latents, then own noises.
            let mut carried = true;
            for u in latent.iter_mut() {
                *u += 1;
                if *u < 2 {
                    carried = false;
                    break;
                }
                *u = 0;
            }
            if carried {
                for (k, &v) in observed.iter().enumerate() {
                    noise_idx[k] += 1;
                    if noise_idx[k] < self.models[v.index()].as_ref().expect("observed").noise.len() {
                        carried = false;
                        break;
                    }
                    noise_idx[k] = 0;
                }
            }
            if carried {
                return Ok(());
            }
        }
    }

    /// Exact population mean of `outcome` when each edge in `assignment`
    /// carries the assigned value instead of its tail's value.
    pub fn counterfactual_mean(&self, assignment: &Assignment, outcome: Vertex) -> Result<f64> {
        if Some(outcome) == self.graph.selection() {
            return Err(OracleError::InvalidConfig("the outcome cannot be the selection vertex".into()));
        }
        for (&(a, b), &value) in assignment {
            if !self.graph.has_directed(a, b) {
                return Err(OracleError::InvalidConfig(format!("no edge {} → {}", self.graph.name(a), self.graph.name(b))));
            }
            if value >= self.cardinality(a) {
                return Err(OracleError::InvalidConfig(format!("value {value} outside the support of `{}`", self.graph.name(a))));
            }
        }
        let mut mean = 0.0;
        self.enumerate(assignment, |p, values| mean += p * values[outcome.index()] as f64)?;
        Ok(mean)
    }

    /// Joint distribution of the observed vertices with the selection
    /// probability of every cell.
    pub fn joint(&self) -> Result<Joint> {
        let vars = self.observed();
        let cards: Vec<usize> = vars.iter().map(|&v| self.cardinality(v)).collect();
        let cells: usize = cards.iter().product();
        let mut probs = vec![0.0; cells];
        self.enumerate(&Assignment::new(), |p, values| {
            let mut index = 0;
            for (k, &v) in vars.iter().enumerate() {
                index = index * cards[k] + values[v.index()];
            }
            probs[index] += p;
        })?;
        let selected = match (self.graph.selection(), &self.selection) {
            (Some(s), Some(model)) => {
                let parents: Vec<usize> = self
                    .graph
                    .parents(s)
                    .iter()
                    .map(|p| vars.iter().position(|v| v == p).expect("parent is observed"))
                    .collect();
                (0..cells)
                    .map(|cell| {
                        let values = decode(cell, &cards);
                        model.probability(&parents.iter().map(|&k| values[k]).collect::<Vec<_>>())
                    })
                    .collect()
            }
            _ => vec![1.0; cells],
        };
        Ok(Joint {
            names: vars.iter().map(|&v| self.graph.name(v).to_string()).collect(),
            vars,
            cards,
            probs,
            selected,
            selection_name: self.graph.selection().map(|s| self.graph.name(s).to_string()),
        })
    }

    /// Draws `n` units by forward simulation (observed values and `S`).
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<(Vec<usize>, bool)> {
        self.sample_under(&Assignment::new(), n, rng)
    }

    /// Forward simulation with each edge in `assignment` carrying the
    /// assigned value, the sampling counterpart of `counterfactual_mean`.
    pub fn sample_under<R: Rng>(&self, assignment: &Assignment, n: usize, rng: &mut R) -> Vec<(Vec<usize>, bool)> {
        let observed = self.observed();
        let parents_of = |v: Vertex| -> Vec<Vertex> { self.graph.parents(v).iter().copied().collect() };
        let mut out = Vec::with_capacity(n);
        let mut values = vec![0usize; self.graph.n()];
        for _ in 0..n {
            let latent: Vec<usize> = self.latents.iter().map(|l| usize::from(rng.random::<f64>() < l.2)).collect();
            for &v in &self.order {
                if Some(v) == self.graph.selection() {
                    continue;
                }
                let model = self.models[v.index()].as_ref().expect("observed");
                let radix = self.input_radix(v);
                let mut index = 0;
                for (j, p) in parents_of(v).into_iter().enumerate() {
                    index = index * radix[j] + assignment.get(&(p, v)).copied().unwrap_or(values[p.index()]);
                }
                for l in self.latents_of(v) {
                    index = index * 2 + latent[l];
                }
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut noise = model.noise.len() - 1;
                for (k, &p) in model.noise.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        noise = k;
                        break;
                    }
                }
                values[v.index()] = model.table[index * model.noise.len() + noise];
            }
            let selected = match (self.graph.selection(), &self.selection) {
                (Some(s), Some(model)) => {
                    let pa: Vec<usize> = parents_of(s).iter().map(|p| values[p.index()]).collect();
                    rng.random::<f64>() < model.probability(&pa)
                }
                _ => true,
            };
            out.push((observed.iter().map(|v| values[v.index()]).collect(), selected));
        }
        out
    }

    /// A random binary model on `graph`. Each vertex is
    /// `g(parents, latents) XOR noise` with a random truth table `g` and
    /// `P(noise = 1)` uniform on `[0.1, 0.9]`, so every conditional is
    /// bounded away from 0 and 1. Latent and selection parameters are drawn
    /// the same way (selection logit coefficients uniform on `[-2, 2]`).
    pub fn random<R: Rng>(graph: &Admg, rng: &mut R) -> Result<Self> {
        let mut models = BTreeMap::new();
        let bidirected = graph.bidirected_edges();
        for v in graph.vertices() {
            if Some(v) == graph.selection() {
                continue;
            }
            let inputs = graph.parents(v).len() + bidirected.iter().filter(|(a, b)| *a == v || *b == v).count();
            let p1 = rng.random_range(0.1..0.9);
            let mut table = Vec::with_capacity(2usize << inputs);
            for _ in 0..(1usize << inputs) {
                let g = usize::from(rng.random::<bool>());
                table.push(g);
                table.push(1 - g);
            }
            models.insert(v, VertexModel { cardinality: 2, noise: vec![1.0 - p1, p1], table });
        }
        let latent_probs = bidirected.iter().map(|_| rng.random_range(0.1..0.9)).collect();
        let selection = graph.selection().map(|s| SelectionModel {
            intercept: rng.random_range(-1.0..1.0),
            coefficients: graph.parents(s).iter().map(|_| rng.random_range(-2.0..2.0)).collect(),
        });
        DiscreteScm::new(graph.clone(), models, latent_probs, selection)
    }
}

fn decode(mut cell: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for k in (0..cards.len()).rev() {
        out[k] = cell % cards[k];
        cell /= cards[k];
    }
    out
}

/// Exact joint table of the observed vertices (selection vertex excluded)
/// plus `P(S=1 | cell)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub vars: Vec<Vertex>,
    pub names: Vec<String>,
    pub cards: Vec<usize>,
    pub probs: Vec<f64>,
    pub selected: Vec<f64>,
    pub selection_name: Option<String>,
}

impl Joint {
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, f64, f64)> + '_ {
        (0..self.probs.len()).map(|c| (decode(c, &self.cards), self.probs[c], self.selected[c]))
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.vars.iter().position(|&u| u == v)
    }

    /// `P(S = 1)`.
    pub fn p_selected(&self) -> f64 {
        self.probs.iter().zip(&self.selected).map(|(p, s)| p * s).sum()
    }

    /// The exact distribution as a frequency-weighted dataset: every cell
    /// appears once with `S = 1` and once with `S = 0`, weighted by its
    /// probability. Zero-probability rows are dropped.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let sel_name = self.selection_name.clone().unwrap_or_else(|| "S".to_string());
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); self.vars.len() + 1];
        let mut freq = Vec::new();
        for (values, p, s) in self.cells() {
            for (sel, w) in [(1.0, p * s), (0.0, p * (1.0 - s))] {
                if w <= 0.0 {
                    continue;
                }
                for (k, &v) in values.iter().enumerate() {
                    cols[k].push(v as f64);
                }
                cols[self.vars.len()].push(sel);
                freq.push(w);
            }
        }
        let mut columns: Vec<Column> = self
            .names
            .iter()
            .zip(&self.cards)
            .zip(&cols)
            .map(|((name, &card), values)| {
                let kind = if card == 2 { ColumnKind::Binary } else { ColumnKind::Categorical };
                Column::dense(name, kind, values)
            })
            .collect();
        columns.push(Column::dense(&sel_name, ColumnKind::Binary, &cols[self.vars.len()]));
        Ok(Dataset::new(columns, &sel_name)?.with_frequencies(freq)?)
    }
}

/// Every first edge from `x` towards `y` assigned `value`.
pub fn uniform_assignment(g: &Admg, x: Vertex, y: Vertex, value: usize) -> Result<Assignment> {
    let edges = g.first_edges(&[x].into(), &[y].into())?;
    Ok(edges.into_iter().map(|e| (e, value)).collect())
}
