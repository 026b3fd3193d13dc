// SPDX-License-Identifier: Apache-2.0

use super::dataset::HistogramDataset;
use super::domain::Domain;
use super::schema::{AttrKind, Attribute, Schema};
use crate::error::{Error, Result};
use crate::Label;
use std::collections::HashMap;
use std::io::{Read, Write};

/// Header plus string records of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Reads UTF-8 comma-separated input with a mandatory header row.
pub fn read_csv<R: Read>(input: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Config("CSV header row is missing".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(CsvTable { header, rows })
}

impl CsvTable {
    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Schema from observed values: categorical columns coded in first-seen
    /// order, columns named in `integer_cols` coded by numeric rank.
    pub fn infer_codes(&self, integer_cols: &[&str]) -> Result<Schema> {
        for c in integer_cols {
            if !self.header.iter().any(|h| h == c) {
                return Err(Error::Config(format!("no column named `{c}`")));
            }
        }
        let mut attrs = Vec::with_capacity(self.header.len());
        for (ci, name) in self.header.iter().enumerate() {
            let column = self.rows.iter().enumerate().map(|(ri, r)| {
                r.get(ci)
                    .map(String::as_str)
                    .ok_or_else(|| Error::RowOutsideDomain {
                        row: ri + 1,
                        reason: "missing field".into(),
                    })
            });
            if integer_cols.contains(&name.as_str()) {
                let mut vals = Vec::new();
                for (ri, v) in column.enumerate() {
                    let v = v?;
                    vals.push(v.parse::<i64>().map_err(|_| Error::RowOutsideDomain {
                        row: ri + 1,
                        reason: format!("`{v}` in integer column `{name}`"),
                    })?);
                }
                attrs.push(Attribute::integer(name, vals)?);
            } else {
                let mut order: Vec<String> = Vec::new();
                let mut seen: HashMap<&str, ()> = HashMap::new();
                for v in column {
                    let v = v?;
                    if seen.insert(v, ()).is_none() {
                        order.push(v.to_string());
                    }
                }
                attrs.push(Attribute::with_values(name, AttrKind::Categorical, order)?);
            }
        }
        Schema::new(attrs)
    }
}

/// Result of loading records into a domain.
#[derive(Debug, Clone)]
pub struct LoadReport {
    pub dataset: HistogramDataset,
    pub rows: usize,
    pub duplicates: usize,
}

/// Maps each row to its label. Columns are matched to attributes by name.
pub fn load_dataset(table: &CsvTable, domain: &Domain) -> Result<LoadReport> {
    let attrs = domain.schema().attributes();
    let mut col_of = Vec::with_capacity(attrs.len());
    for a in attrs {
        let ci = table
            .header
            .iter()
            .position(|h| h == a.name())
            .ok_or_else(|| Error::Config(format!("CSV lacks column `{}`", a.name())))?;
        col_of.push(ci);
    }
    if table.header.len() != attrs.len() {
        return Err(Error::Config(format!(
            "CSV has {} columns, schema has {}",
            table.header.len(),
            attrs.len()
        )));
    }
    let mut labels: Vec<Label> = Vec::with_capacity(table.rows.len());
    let mut vals = Vec::with_capacity(attrs.len());
    for (ri, row) in table.rows.iter().enumerate() {
        vals.clear();
        for &ci in &col_of {
            vals.push(row.get(ci).map(String::as_str).unwrap_or(""));
        }
        let l = domain
            .label_of_values(&vals)
            .map_err(|e| Error::RowOutsideDomain {
                row: ri + 1,
                reason: e.to_string(),
            })?;
        labels.push(l);
    }
    let dataset = HistogramDataset::from_labels(domain.size(), labels.iter().copied())?;
    Ok(LoadReport {
        duplicates: labels.len() - dataset.len(),
        rows: labels.len(),
        dataset,
    })
}

/// One row per set label, in label order.
pub fn dataset_to_table(ds: &HistogramDataset, domain: &Domain) -> CsvTable {
    let attrs = domain.schema().attributes();
    CsvTable {
        header: attrs.iter().map(|a| a.name().to_string()).collect(),
        rows: ds
            .labels()
            .into_iter()
            .map(|l| {
                let t = domain.tuple_of_label(l).expect("label in domain");
                attrs
                    .iter()
                    .zip(t)
                    .map(|(a, c)| a.value_of(c).expect("code in range"))
                    .collect()
            })
            .collect(),
    }
}
