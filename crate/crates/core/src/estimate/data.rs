//! Column-typed tables with a selection indicator.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;

use crate::error::EstimateError;

type Result<T> = std::result::Result<T, EstimateError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Binary,
    Categorical,
    Continuous,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<Option<f64>>,
    /// Original labels for categorical columns read from text; value `k`
    /// stands for `labels[k]`.
    pub labels: Option<Vec<String>>,
}

impl Column {
    pub fn new(name: &str, kind: ColumnKind, values: Vec<Option<f64>>) -> Self {
        Column { name: name.to_string(), kind, values, labels: None }
    }

    /// A column with no missing cells.
    pub fn dense(name: &str, kind: ColumnKind, values: &[f64]) -> Self {
        Column::new(name, kind, values.iter().map(|&v| Some(v)).collect())
    }

    fn infer_kind(values: &[Option<f64>]) -> ColumnKind {
        if values.iter().flatten().all(|&v| v == 0.0 || v == 1.0) {
            ColumnKind::Binary
        } else {
            ColumnKind::Continuous
        }
    }
}

/// A table whose rows are referred units. Rows with `selection = 1` (and,
/// when a subsample column is set, `subsample = 1`) form the analysis
/// sample; the remaining rows only need the externally recorded columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    index: HashMap<String, usize>,
    selection: usize,
    subsample: Option<usize>,
    frequencies: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, selection: &str) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, c) in columns.iter().enumerate() {
            if index.insert(c.name.clone(), i).is_some() {
                return Err(EstimateError::DuplicateColumn(c.name.clone()));
            }
        }
        let rows = columns.first().map_or(0, |c| c.values.len());
        if let Some(c) = columns.iter().find(|c| c.values.len() != rows) {
            return Err(EstimateError::Csv(format!("column `{}` has {} rows, expected {rows}", c.name, c.values.len())));
        }
        let selection = *index
            .get(selection)
            .ok_or_else(|| EstimateError::UnknownColumn(selection.to_string()))?;
        let data = Dataset { columns, index, selection, subsample: None, frequencies: None };
        data.check_indicator(selection)?;
        Ok(data)
    }

    /// Reads a CSV table with a header row. Empty cells are missing.
    /// Columns named in `categorical` are coded as categorical; text columns
    /// are always categorical.
    pub fn from_csv<R: Read>(reader: R, selection: &str, categorical: &[String]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| EstimateError::Csv(e.to_string()))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut raw: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        for record in rdr.records() {
            let record = record.map_err(|e| EstimateError::Csv(e.to_string()))?;
            for (j, cell) in record.iter().enumerate() {
                raw[j].push(cell.trim().to_string());
            }
        }
        let columns = headers
            .iter()
            .zip(raw)
            .map(|(name, cells)| parse_column(name, &cells, categorical.contains(name)))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(columns, selection)
    }

    pub fn from_csv_path(path: &std::path::Path, selection: &str, categorical: &[String]) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| EstimateError::Csv(format!("{}: {e}", path.display())))?;
        Dataset::from_csv(file, selection, categorical)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str())).expect("in-memory write");
        for r in 0..self.n_rows() {
            let row: Vec<String> = self
                .columns
                .iter()
                .map(|c| match (c.values[r], &c.labels) {
                    (None, _) => String::new(),
                    (Some(v), Some(labels)) => labels[v as usize].clone(),
                    (Some(v), None) => format!("{v}"),
                })
                .collect();
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    fn check_indicator(&self, col: usize) -> Result<()> {
        let c = &self.columns[col];
        for (row, v) in c.values.iter().enumerate() {
            match v {
                Some(x) if *x == 0.0 || *x == 1.0 => {}
                Some(_) => return Err(EstimateError::NotBinary { column: c.name.clone(), row }),
                None => return Err(EstimateError::MissingValue { column: c.name.clone(), row }),
            }
        }
        Ok(())
    }

    /// Marks a 0/1 column whose ones, together with `selection = 1`,
    /// define the analysis sample.
    pub fn with_subsample(mut self, column: &str) -> Result<Self> {
        let col = self.column_index(column)?;
        self.check_indicator(col)?;
        self.subsample = Some(col);
        Ok(self)
    }

    /// Attaches non-negative per-row frequency weights.
    pub fn with_frequencies(mut self, freq: Vec<f64>) -> Result<Self> {
        if freq.len() != self.n_rows() {
            return Err(EstimateError::Csv(format!("{} frequencies for {} rows", freq.len(), self.n_rows())));
        }
        if freq.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(EstimateError::Csv("frequency weights must be finite and non-negative".into()));
        }
        self.frequencies = Some(freq);
        Ok(self)
    }

    /// Uses a numeric column as frequency weights.
    pub fn with_frequency_column(self, column: &str) -> Result<Self> {
        let c = self.column(column)?;
        let freq = c
            .values
            .iter()
            .enumerate()
            .map(|(row, v)| v.ok_or(EstimateError::MissingValue { column: column.to_string(), row }))
            .collect::<Result<Vec<_>>>()?;
        self.with_frequencies(freq)
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| EstimateError::UnknownColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn selection_name(&self) -> &str {
        &self.columns[self.selection].name
    }

    pub fn selected(&self, row: usize) -> bool {
        self.columns[self.selection].values[row] == Some(1.0)
    }

    /// Whether a row belongs to the analysis sample.
    pub fn analysed(&self, row: usize) -> bool {
        self.selected(row) && self.subsample.is_none_or(|c| self.columns[c].values[row] == Some(1.0))
    }

    /// Analysis rows with positive frequency.
    pub fn analysis_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.analysed(r) && self.frequency(r) > 0.0).collect()
    }

    pub fn frequency(&self, row: usize) -> f64 {
        self.frequencies.as_ref().map_or(1.0, |f| f[row])
    }

    pub fn frequencies(&self) -> Option<&[f64]> {
        self.frequencies.as_deref()
    }

    /// Value at `(column, row)`, failing on a missing cell.
    pub fn value(&self, col: usize, row: usize) -> Result<f64> {
        self.columns[col].values[row].ok_or_else(|| EstimateError::MissingValue {
            column: self.columns[col].name.clone(),
            row,
        })
    }

    /// Fails on the first missing cell of `names` among `rows`.
    pub fn require_complete(&self, names: &[String], rows: &[usize]) -> Result<()> {
        for name in names {
            let col = self.column_index(name)?;
            for &r in rows {
                self.value(col, r)?;
            }
        }
        Ok(())
    }

    /// Distinct observed values of a column among `rows`, ascending.
    pub fn levels(&self, name: &str, rows: &[usize]) -> Result<Vec<f64>> {
        let col = self.column_index(name)?;
        let mut seen = BTreeSet::new();
        for &r in rows {
            seen.insert(self.value(col, r)?.to_bits());
        }
        let mut levels: Vec<f64> = seen.into_iter().map(f64::from_bits).collect();
        levels.sort_by(f64::total_cmp);
        Ok(levels)
    }

    /// A new dataset made of the given rows, in order.
    pub fn take_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                values: rows.iter().map(|&r| c.values[r]).collect(),
                ..c.clone()
            })
            .collect();
        Dataset {
            columns,
            index: self.index.clone(),
            selection: self.selection,
            subsample: self.subsample,
            frequencies: self.frequencies.as_ref().map(|f| rows.iter().map(|&r| f[r]).collect()),
        }
    }
}

fn parse_column(name: &str, cells: &[String], force_categorical: bool) -> Result<Column> {
    let numeric: Option<Vec<Option<f64>>> = cells
        .iter()
        .map(|c| if c.is_empty() { Some(None) } else { c.parse::<f64>().ok().map(Some) })
        .collect();
    match numeric {
        Some(values) => {
            let kind = if force_categorical { ColumnKind::Categorical } else { Column::infer_kind(&values) };
            Ok(Column::new(name, kind, values))
        }
        None => {
            let mut labels: Vec<String> = cells.iter().filter(|c| !c.is_empty()).cloned().collect();
            labels.sort();
            labels.dedup();
            let values = cells
                .iter()
                .map(|c| (!c.is_empty()).then(|| labels.binary_search(c).expect("label present") as f64))
                .collect();
            Ok(Column {
                name: name.to_string(),
                kind: ColumnKind::Categorical,
                values,
                labels: Some(labels),
            })
        }
    }
}
