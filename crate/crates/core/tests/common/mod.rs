//! Graphs from the worked examples, shared by the integration tests.
#![allow(dead_code)]

use selmed::criteria::{AdmissiblePair, PseQuery};
use selmed::{Admg, AdmgBuilder, PathSetPi};

pub fn fig1a() -> Admg {
    AdmgBuilder::new().vertices(["X", "M", "Y"]).directed("X", "M").directed("M", "Y").directed("X", "Y").build().unwrap()
}

pub fn fig1b() -> Admg {
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

fn fig3a_builder() -> AdmgBuilder {
    AdmgBuilder::new()
        .vertices(["X", "M1", "M2", "Y"])
        .directed("X", "M1")
        .directed("X", "M2")
        .directed("X", "Y")
        .directed("M1", "M2")
        .directed("M1", "Y")
        .directed("M2", "Y")
}

pub fn fig3a() -> Admg {
    fig3a_builder().build().unwrap()
}

pub fn fig3a_bidirected() -> Admg {
    fig3a_builder().bidirected("M1", "M2").build().unwrap()
}

/// The two-mediator graph with a confounder `C` of both mediators, the
/// outcome and selection.
pub fn fig3a_confounded() -> Admg {
    fig3a_builder()
        .vertices(["C", "S"])
        .directed("C", "M1")
        .directed("C", "M2")
        .directed("C", "Y")
        .directed("C", "S")
        .selection("S")
        .build()
        .unwrap()
}

/// `fig3a_confounded` without `M1 -> Y`.
pub fn chain_confounded() -> Admg {
    AdmgBuilder::new()
        .vertices(["X", "M1", "M2", "Y", "C", "S"])
        .directed("X", "M1")
        .directed("X", "M2")
        .directed("X", "Y")
        .directed("M1", "M2")
        .directed("M2", "Y")
        .directed("C", "M1")
        .directed("C", "M2")
        .directed("C", "Y")
        .directed("C", "S")
        .selection("S")
        .build()
        .unwrap()
}

/// Every proper causal path leaving `X` through `X -> M1`.
pub fn through_m1(g: &Admg) -> PseQuery {
    let x = g.vertex("X").unwrap();
    let m1 = g.vertex("M1").unwrap();
    let xs = g.vertex_set(["X"]).unwrap();
    let ys = g.vertex_set(["Y"]).unwrap();
    let pi = PathSetPi::from_first_edges(g, xs, ys, &[(x, m1)].into()).unwrap();
    PseQuery::new(pi)
}

pub fn c_pair(g: &Admg) -> AdmissiblePair {
    AdmissiblePair::from_names(g, &["C"], &["C"]).unwrap()
}

/// `n` forward-simulated units as a dataset whose selection column is the
/// drawn indicator. Unselected rows keep every value.
pub fn sample_dataset<R: rand::Rng>(scm: &selmed::oracle::DiscreteScm, n: usize, rng: &mut R) -> selmed::estimate::Dataset {
    use selmed::estimate::{Column, ColumnKind, Dataset};
    let g = scm.graph();
    let observed = scm.observed();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); observed.len() + 1];
    let mut left = n;
    while left > 0 {
        let chunk = left.min(100_000);
        for (values, selected) in scm.sample(chunk, rng) {
            for (k, v) in values.into_iter().enumerate() {
                cols[k].push(v as f64);
            }
            cols[observed.len()].push(f64::from(u8::from(selected)));
        }
        left -= chunk;
    }
    let s = g.name(g.selection().expect("selection vertex"));
    let mut columns: Vec<Column> = observed
        .iter()
        .zip(&cols)
        .map(|(&v, values)| {
            let kind = if scm.cardinality(v) == 2 { ColumnKind::Binary } else { ColumnKind::Categorical };
            Column::dense(g.name(v), kind, values)
        })
        .collect();
    columns.push(Column::dense(s, ColumnKind::Binary, &cols[observed.len()]));
    Dataset::new(columns, s).unwrap()
}
