use std::io::Read;
use std::path::Path;

use super::schema::{FeatureKind, RowFilter, Schema};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

impl RawColumn {
    pub fn len(&self) -> usize {
        match self {
            RawColumn::Numeric(v) => v.len(),
            RawColumn::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Schema columns of the rows that survived filtering, typed per schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub names: Vec<String>,
    pub columns: Vec<RawColumn>,
    /// Rows dropped because a schema column was empty.
    pub dropped_missing: usize,
    /// Rows rejected by a row filter.
    pub dropped_filtered: usize,
}

impl RawTable {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, RawColumn::len)
    }

    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, filters: &[RowFilter]) -> Result<RawTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, filters)
}

/// Same as [`load_csv`] over any reader. Duplicate header names resolve to
/// their first occurrence.
pub fn read_csv<R: Read>(reader: R, schema: &Schema, filters: &[RowFilter]) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let spec_pos = schema
        .specs()
        .iter()
        .map(|s| position(&s.name))
        .collect::<Result<Vec<_>>>()?;
    let filter_pos = filters
        .iter()
        .map(|f| position(&f.column))
        .collect::<Result<Vec<_>>>()?;

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); spec_pos.len()];
    let mut dropped_missing = 0;
    let mut dropped_filtered = 0;
    for record in rdr.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        if filters
            .iter()
            .zip(&filter_pos)
            .any(|(f, &i)| !f.matches(field(i)))
        {
            dropped_filtered += 1;
            continue;
        }
        if spec_pos.iter().any(|&i| field(i).is_empty()) {
            dropped_missing += 1;
            continue;
        }
        for (col, &i) in cells.iter_mut().zip(&spec_pos) {
            col.push(field(i).to_string());
        }
    }
    if cells[0].is_empty() {
        return Err(Error::EmptyTable);
    }

    let mut columns = Vec::with_capacity(cells.len());
    for (spec, raw) in schema.specs().iter().zip(cells) {
        columns.push(match spec.kind {
            FeatureKind::Binary => RawColumn::Text(raw),
            FeatureKind::Continuous => RawColumn::Numeric(
                raw.iter()
                    .enumerate()
                    .map(|(row, v)| {
                        v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                            Error::Parse {
                                column: spec.name.clone(),
                                value: v.clone(),
                                row,
                            }
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        });
    }
    Ok(RawTable {
        names: schema.specs().iter().map(|s| s.name.clone()).collect(),
        columns,
        dropped_missing,
        dropped_filtered,
    })
}
