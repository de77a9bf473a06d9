//! Completion-prior files and label-similarity tables.
//!
//! Prior file: `{"vocabulary": [..], "occupancy": [..], "cooccurrence": [[..]], "half_extents": [[x, y, z], ..]}`
//! with all arrays indexed like `vocabulary`.
//!
//! Synonym table: `{"classes": {"drinkware": ["cup", "mug"], ...}}`. A label may belong to
//! one class only.
//!
//! Embedding table: `{"cup": [0.1, 0.3, ...], ...}`; all vectors share one dimension.

use std::collections::BTreeMap;
use std::path::Path;

use activesg_core::math::Vec3;
use activesg_core::planner::CompletionPrior;
use serde::{Deserialize, Serialize};

use crate::error::{parse, read, FileError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorFile {
    vocabulary: Vec<String>,
    occupancy: Vec<f64>,
    cooccurrence: Vec<Vec<f64>>,
    half_extents: Vec<[f64; 3]>,
}

pub fn parse_prior(path: &Path, text: &str) -> Result<CompletionPrior, FileError> {
    let f: PriorFile = parse(path, text)?;
    if f.vocabulary.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FileError::invalid(path, "vocabulary must be sorted and free of duplicates"));
    }
    let half = f.half_extents.into_iter().map(Vec3::from_array).collect();
    CompletionPrior::new(f.vocabulary, f.occupancy, f.cooccurrence, half).map_err(|e| FileError::invalid(path, e.to_string()))
}

pub fn load_prior(path: &Path) -> Result<CompletionPrior, FileError> {
    parse_prior(path, &read(path)?)
}

pub fn prior_to_string(prior: &CompletionPrior) -> String {
    let f = PriorFile {
        vocabulary: prior.vocabulary.clone(),
        occupancy: prior.occupancy.clone(),
        cooccurrence: prior.cooccurrence.clone(),
        half_extents: prior.half_extents.iter().map(|h| h.to_array()).collect(),
    };
    let mut s = serde_json::to_string_pretty(&f).expect("prior serializes");
    s.push('\n');
    s
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynonymFile {
    classes: BTreeMap<String, Vec<String>>,
}

/// Label to class name.
pub fn load_synonyms(path: &Path) -> Result<BTreeMap<String, String>, FileError> {
    let f: SynonymFile = parse(path, &read(path)?)?;
    let mut out = BTreeMap::new();
    for (class, labels) in f.classes {
        for label in labels {
            if let Some(prev) = out.insert(label.clone(), class.clone()) {
                return Err(FileError::invalid(path, format!("label `{label}` is in both `{prev}` and `{class}`")));
            }
        }
    }
    Ok(out)
}

pub fn load_embeddings(path: &Path) -> Result<BTreeMap<String, Vec<f64>>, FileError> {
    let table: BTreeMap<String, Vec<f64>> = parse(path, &read(path)?)?;
    let mut dims = table.values().map(Vec::len);
    if let Some(d) = dims.next() {
        if d == 0 || dims.any(|e| e != d) {
            return Err(FileError::invalid(path, "embedding vectors must share one nonzero dimension"));
        }
    }
    Ok(table)
}
