// SPDX-License-Identifier: Apache-2.0

//! Public label domains, histogram datasets and their file formats.
//!
//! A domain enumerates record types (labels) in a fixed public order. Labels
//! are 0-based internally; user-facing output adds one where it matters.

mod dataset;
mod domain;
mod ingest;
mod manifest;
mod schema;

pub use dataset::{
    random_permutation, sample_background, synth_dataset, BackgroundKnowledge, HistogramDataset,
    Permutation,
};
pub use domain::{build_domain, Domain};
pub use ingest::{dataset_to_table, load_dataset, read_csv, CsvTable, LoadReport};
pub use manifest::{read_manifest, write_manifest};
pub use schema::{AttrKind, Attribute, Schema};
