//! Design matrices for the nuisance regressions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::data::{ColumnKind, Dataset};
use crate::error::EstimateError;

type Result<T> = std::result::Result<T, EstimateError>;

/// Interaction structure shared by every nuisance model.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interactions {
    /// Main effects plus any forced pairs.
    #[default]
    None,
    /// All pairwise products of regressors.
    Pairwise,
    /// One parameter per observed cell of the regressors (all discrete).
    Saturated,
}

impl std::str::FromStr for Interactions {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Interactions::None),
            "pairwise" => Ok(Interactions::Pairwise),
            "saturated" => Ok(Interactions::Saturated),
            other => Err(format!("unknown interaction mode `{other}` (none|pairwise|saturated)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Encoding {
    Numeric,
    /// Dummy indicators for every level after the first.
    Levels(Vec<f64>),
}

impl Encoding {
    fn width(&self) -> usize {
        match self {
            Encoding::Numeric => 1,
            Encoding::Levels(l) => l.len().saturating_sub(1),
        }
    }

    fn block(&self, v: f64) -> Vec<f64> {
        match self {
            Encoding::Numeric => vec![v],
            Encoding::Levels(l) => l[1..].iter().map(|&k| f64::from(u8::from(k == v))).collect(),
        }
    }
}

/// Maps regressor values (in `vars` order) to a feature row with a leading
/// intercept.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    vars: Vec<String>,
    encodings: Vec<Encoding>,
    mode: Interactions,
    pairs: Vec<(usize, usize)>,
    cells: BTreeMap<Vec<u64>, usize>,
    names: Vec<String>,
}

impl Design {
    /// Learns encodings (and cells, when saturated) from `rows`.
    /// `forced` lists regressor pairs always given a product term.
    pub fn learn(
        data: &Dataset,
        rows: &[usize],
        vars: &[String],
        mode: Interactions,
        forced: &[(String, String)],
    ) -> Result<Design> {
        let mut encodings = Vec::with_capacity(vars.len());
        for v in vars {
            let col = data.column(v)?;
            encodings.push(match col.kind {
                ColumnKind::Categorical => Encoding::Levels(data.levels(v, rows)?),
                _ => Encoding::Numeric,
            });
        }
        let pos = |name: &str| vars.iter().position(|v| v == name);
        let mut pairs = Vec::new();
        match mode {
            Interactions::Pairwise => {
                for i in 0..vars.len() {
                    for j in (i + 1)..vars.len() {
                        pairs.push((i, j));
                    }
                }
            }
            _ => {
                for (a, b) in forced {
                    let (Some(i), Some(j)) = (pos(a), pos(b)) else {
                        return Err(EstimateError::InvalidSpec(format!("interaction {a}×{b} names a missing regressor")));
                    };
                    pairs.push((i.min(j), i.max(j)));
                }
                pairs.sort();
                pairs.dedup();
            }
        }

        let mut cells = BTreeMap::new();
        if mode == Interactions::Saturated {
            for v in vars {
                if data.column(v)?.kind == ColumnKind::Continuous {
                    return Err(EstimateError::InvalidSpec(format!(
                        "saturated models need discrete regressors; `{v}` is continuous"
                    )));
                }
            }
            let cols: Vec<usize> = vars.iter().map(|v| data.column_index(v)).collect::<Result<_>>()?;
            let mut keys = Vec::new();
            for &r in rows {
                let key = cols.iter().map(|&c| data.value(c, r).map(f64::to_bits)).collect::<Result<Vec<_>>>()?;
                keys.push(key);
            }
            keys.sort();
            keys.dedup();
            cells = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
        }

        let mut design = Design {
            vars: vars.to_vec(),
            encodings,
            mode,
            pairs,
            cells,
            names: Vec::new(),
        };
        design.names = design.term_names();
        Ok(design)
    }

    fn term_names(&self) -> Vec<String> {
        let mut names = vec!["(intercept)".to_string()];
        if self.mode == Interactions::Saturated {
            for key in self.cells.keys().skip(1) {
                let parts: Vec<String> = self
                    .vars
                    .iter()
                    .zip(key)
                    .map(|(v, bits)| format!("{v}={}", f64::from_bits(*bits)))
                    .collect();
                names.push(format!("[{}]", parts.join(",")));
            }
            return names;
        }
        let block_names = |i: usize| -> Vec<String> {
            match &self.encodings[i] {
                Encoding::Numeric => vec![self.vars[i].clone()],
                Encoding::Levels(l) => l[1..].iter().map(|k| format!("{}={k}", self.vars[i])).collect(),
            }
        };
        for i in 0..self.vars.len() {
            names.extend(block_names(i));
        }
        for &(i, j) in &self.pairs {
            for a in block_names(i) {
                for b in block_names(j) {
                    names.push(format!("{a}×{b}"));
                }
            }
        }
        names
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    /// Writes the feature row for regressor `values` into `out`.
    pub fn features_into(&self, values: &[f64], out: &mut Vec<f64>) -> Result<()> {
        debug_assert_eq!(values.len(), self.vars.len());
        out.clear();
        out.push(1.0);
        if self.mode == Interactions::Saturated {
            let key: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
            let Some(&cell) = self.cells.get(&key) else {
                let parts: Vec<String> = self.vars.iter().zip(values).map(|(n, v)| format!("{n}={v}")).collect();
                return Err(EstimateError::UnseenCell(parts.join(",")));
            };
            out.extend((1..self.cells.len()).map(|c| f64::from(u8::from(c == cell))));
            return Ok(());
        }
        let blocks: Vec<Vec<f64>> = self.encodings.iter().zip(values).map(|(e, &v)| e.block(v)).collect();
        for b in &blocks {
            out.extend_from_slice(b);
        }
        for &(i, j) in &self.pairs {
            for a in &blocks[i] {
                for b in &blocks[j] {
                    out.push(a * b);
                }
            }
        }
        debug_assert_eq!(out.len(), self.width());
        Ok(())
    }

    pub fn features(&self, values: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.width());
        self.features_into(values, &mut out)?;
        Ok(out)
    }

    /// Regressor values of a data row.
    pub fn row_values(&self, data: &Dataset, row: usize) -> Result<Vec<f64>> {
        self.vars
            .iter()
            .map(|v| data.value(data.column_index(v)?, row))
            .collect()
    }

    /// Design matrix over `rows`.
    pub fn matrix(&self, data: &Dataset, rows: &[usize]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(rows.len(), self.width());
        let mut buf = Vec::with_capacity(self.width());
        for (i, &r) in rows.iter().enumerate() {
            self.features_into(&self.row_values(data, r)?, &mut buf)?;
            for (j, &v) in buf.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// Number of encoded columns of a single regressor (exposed for tests).
    pub fn block_width(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var).map(|i| self.encodings[i].width())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::data::Column;

    fn data() -> Dataset {
        Dataset::new(
            vec![
                Column::dense("S", ColumnKind::Binary, &[1.0, 1.0, 1.0, 1.0]),
                Column::dense("X", ColumnKind::Binary, &[0.0, 1.0, 0.0, 1.0]),
                Column::dense("G", ColumnKind::Categorical, &[0.0, 1.0, 2.0, 2.0]),
                Column::dense("C", ColumnKind::Continuous, &[0.1, 0.2, 0.3, 0.4]),
            ],
            "S",
        )
        .unwrap()
    }

    fn vars(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn main_effects_with_dummies() {
        let d = data();
        let design = Design::learn(&d, &[0, 1, 2, 3], &vars(&["X", "G"]), Interactions::None, &[]).unwrap();
        assert_eq!(design.names(), ["(intercept)", "X", "G=1", "G=2"]);
        assert_eq!(design.features(&[1.0, 2.0]).unwrap(), vec![1.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn forced_and_pairwise_products() {
        let d = data();
        let forced = [("X".to_string(), "C".to_string())];
        let design = Design::learn(&d, &[0, 1, 2, 3], &vars(&["X", "C"]), Interactions::None, &forced).unwrap();
        assert_eq!(design.features(&[1.0, 0.5]).unwrap(), vec![1.0, 1.0, 0.5, 0.5]);
        let all = Design::learn(&d, &[0, 1, 2, 3], &vars(&["X", "G", "C"]), Interactions::Pairwise, &[]).unwrap();
        assert_eq!(all.width(), 1 + 1 + 2 + 1 + 2 + 1 + 2);
    }

    #[test]
    fn saturated_cells() {
        let d = data();
        let design = Design::learn(&d, &[0, 1, 2, 3], &vars(&["X", "G"]), Interactions::Saturated, &[]).unwrap();
        assert_eq!(design.width(), 4);
        assert_eq!(design.features(&[0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(design.features(&[1.0, 0.0]), Err(EstimateError::UnseenCell(_))));
        let err = Design::learn(&d, &[0, 1], &vars(&["C"]), Interactions::Saturated, &[]).unwrap_err();
        assert!(matches!(err, EstimateError::InvalidSpec(_)));
    }

    #[test]
    fn matrix_rows_follow_data() {
        let d = data();
        let design = Design::learn(&d, &[0, 1, 2, 3], &vars(&["C"]), Interactions::None, &[]).unwrap();
        let m = design.matrix(&d, &[3, 0]).unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m[(0, 1)], 0.4);
        assert_eq!(m[(1, 1)], 0.1);
    }
}
