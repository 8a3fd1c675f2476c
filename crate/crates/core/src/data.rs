//! Column-typed tables of continuous and categorical variables.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::density::{MixedPoint, SupportSignature};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    /// Category labels in index order; empty for continuous columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

/// Rectangular table. Categorical cells hold their 0-based category index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedDataset {
    columns: Vec<ColumnMeta>,
    rows: Vec<Vec<f64>>,
    /// Rows discarded for missing cells at ingestion.
    #[serde(default)]
    pub dropped_count: usize,
}

const MISSING: [&str; 6] = ["", "NA", "N/A", "NaN", "nan", "null"];

impl MixedDataset {
    pub fn new(columns: Vec<ColumnMeta>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut names = std::collections::HashSet::new();
        for c in &columns {
            if !names.insert(c.name.as_str()) {
                return Err(Error::arg(format!("duplicate column name '{}'", c.name)));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::shape(format!("row {r} has {} cells, expected {}", row.len(), columns.len())));
            }
            for (v, c) in row.iter().zip(&columns) {
                let ok = match c.kind {
                    ColumnKind::Continuous => v.is_finite(),
                    ColumnKind::Categorical => {
                        v.fract() == 0.0 && *v >= 0.0 && (*v as usize) < c.categories.len()
                    }
                };
                if !ok {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: c.name.clone(),
                        message: format!("value {v} is invalid for a {:?} column", c.kind),
                    });
                }
            }
        }
        Ok(Self {
            columns,
            rows,
            dropped_count: 0,
        })
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::arg(format!("unknown column '{name}'")))
    }

    pub fn column(&self, name: &str) -> Result<&ColumnMeta> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn continuous_column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        if self.columns[j].kind != ColumnKind::Continuous {
            return Err(Error::arg(format!("column '{name}' is not continuous")));
        }
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn categorical_column(&self, name: &str) -> Result<Vec<usize>> {
        let j = self.column_index(name)?;
        if self.columns[j].kind != ColumnKind::Categorical {
            return Err(Error::arg(format!("column '{name}' is not categorical")));
        }
        Ok(self.rows.iter().map(|r| r[j] as usize).collect())
    }

    /// Same rows, only the named columns (in the given order).
    pub fn select_columns(&self, names: &[&str]) -> Result<Self> {
        let idx = names.iter().map(|n| self.column_index(n)).collect::<Result<Vec<_>>>()?;
        let columns = idx.iter().map(|&j| self.columns[j].clone()).collect();
        let rows = self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect();
        Ok(Self {
            columns,
            rows,
            dropped_count: self.dropped_count,
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            columns: self.columns.clone(),
            rows: rows.iter().map(|&i| self.rows[i].clone()).collect(),
            dropped_count: 0,
        }
    }

    /// Names of continuous columns followed by categorical ones: the variable
    /// order used by density models built from this table.
    pub fn variable_order(&self) -> Vec<&str> {
        let cont = self.columns.iter().filter(|c| c.kind == ColumnKind::Continuous);
        let cat = self.columns.iter().filter(|c| c.kind == ColumnKind::Categorical);
        cont.chain(cat).map(|c| c.name.as_str()).collect()
    }

    pub fn signature(&self) -> Result<SupportSignature> {
        let p = self.columns.iter().filter(|c| c.kind == ColumnKind::Continuous).count();
        let cards = self
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Categorical)
            .map(|c| c.categories.len())
            .collect();
        SupportSignature::new(p, cards)
    }

    /// Rows as mixed points in [`Self::variable_order`].
    pub fn points(&self) -> Vec<MixedPoint> {
        let cont: Vec<usize> = (0..self.columns.len())
            .filter(|&j| self.columns[j].kind == ColumnKind::Continuous)
            .collect();
        let cat: Vec<usize> = (0..self.columns.len())
            .filter(|&j| self.columns[j].kind == ColumnKind::Categorical)
            .collect();
        self.rows
            .iter()
            .map(|r| MixedPoint {
                continuous: cont.iter().map(|&j| r[j]).collect(),
                categorical: cat.iter().map(|&j| r[j] as usize).collect(),
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for r in &self.rows {
            out.write_record(r.iter().zip(&self.columns).map(|(v, c)| match c.kind {
                ColumnKind::Continuous => format!("{v}"),
                ColumnKind::Categorical => c.categories[*v as usize].clone(),
            }))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Parses CSV text with a header row. Declared columns use their declared
    /// kind; undeclared columns are continuous when every present cell parses
    /// as a number and categorical otherwise. Rows with a missing cell are
    /// dropped and counted. Category dictionaries follow first appearance.
    pub fn from_csv_reader<R: Read>(reader: R, schema: &BTreeMap<String, ColumnKind>) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
        let headers: Vec<String> = rd.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(Error::arg("CSV has no header row"));
        }
        for name in schema.keys() {
            if !headers.contains(name) {
                return Err(Error::arg(format!("declared column '{name}' not found in header")));
            }
        }
        let mut raw: Vec<Vec<String>> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            raw.push(rec.iter().map(|c| c.trim().to_string()).collect());
        }
        if raw.is_empty() {
            return Err(Error::arg("CSV has no data rows"));
        }
        let is_missing = |s: &str| MISSING.contains(&s);
        let kinds: Vec<ColumnKind> = headers
            .iter()
            .enumerate()
            .map(|(j, h)| {
                schema.get(h).copied().unwrap_or_else(|| {
                    let numeric = raw
                        .iter()
                        .map(|r| r[j].as_str())
                        .filter(|c| !is_missing(c))
                        .all(|c| c.parse::<f64>().is_ok());
                    if numeric {
                        ColumnKind::Continuous
                    } else {
                        ColumnKind::Categorical
                    }
                })
            })
            .collect();
        let mut dicts: Vec<HashMap<String, usize>> = vec![HashMap::new(); headers.len()];
        let mut categories: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
        let mut rows = Vec::with_capacity(raw.len());
        let mut dropped = 0;
        for (r, cells) in raw.iter().enumerate() {
            if cells.iter().any(|c| is_missing(c)) {
                dropped += 1;
                continue;
            }
            let mut row = Vec::with_capacity(cells.len());
            for (j, cell) in cells.iter().enumerate() {
                match kinds[j] {
                    ColumnKind::Continuous => {
                        let v: f64 = cell.parse().map_err(|_| Error::Parse {
                            row: r + 1,
                            column: headers[j].clone(),
                            message: format!("'{cell}' is not a number"),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::Parse {
                                row: r + 1,
                                column: headers[j].clone(),
                                message: format!("'{cell}' is not finite"),
                            });
                        }
                        row.push(v);
                    }
                    ColumnKind::Categorical => {
                        let next = dicts[j].len();
                        let idx = *dicts[j].entry(cell.clone()).or_insert_with(|| {
                            categories[j].push(cell.clone());
                            next
                        });
                        row.push(idx as f64);
                    }
                }
            }
            rows.push(row);
        }
        if dropped > 0 {
            log::info!("dropped {dropped} rows with missing cells");
        }
        let columns = headers
            .into_iter()
            .zip(kinds)
            .zip(categories)
            .map(|((name, kind), categories)| ColumnMeta { name, kind, categories })
            .collect();
        let mut ds = Self::new(columns, rows)?;
        ds.dropped_count = dropped;
        Ok(ds)
    }
}

/// Reads a typed dataset from a CSV file.
pub fn ingest_csv(path: impl AsRef<Path>, schema: &BTreeMap<String, ColumnKind>) -> Result<MixedDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    if file.metadata()?.len() == 0 {
        return Err(Error::arg(format!("{} is empty", path.display())));
    }
    MixedDataset::from_csv_reader(file, schema)
}
