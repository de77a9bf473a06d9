use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Label similarity backend.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SimilarityMode {
    #[default]
    Exact,
    /// Label to synonym-class name.
    Synonyms(BTreeMap<String, String>),
    /// Label to embedding vector.
    Embedding(BTreeMap<String, Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityConfig {
    pub mode: SimilarityMode,
    /// Minimum similarity for a semantic match.
    pub tau_sem: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self { mode: SimilarityMode::Exact, tau_sem: 0.75 }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau_sem) {
            return Err(Error::InvalidConfig(String::from("similarity.tau_sem must be in [0, 1]")));
        }
        if let SimilarityMode::Embedding(table) = &self.mode {
            let mut dims = table.values().map(Vec::len);
            if let Some(d) = dims.next() {
                if d == 0 || dims.any(|e| e != d) {
                    return Err(Error::InvalidConfig(String::from("embedding vectors must share one nonzero dimension")));
                }
            }
        }
        Ok(())
    }
}

/// Similarity in [0, 1]. Identical labels always score 1. Synonym mode scores 1 for a
/// shared class. Embedding mode maps cosine similarity to `(1 + cos) / 2`; a label missing
/// from the table scores 0 and is reported once per call with a warning.
pub fn semantic_similarity(a: &str, b: &str, cfg: &SimilarityConfig) -> f64 {
    if a == b {
        return 1.0;
    }
    match &cfg.mode {
        SimilarityMode::Exact => 0.0,
        SimilarityMode::Synonyms(classes) => match (classes.get(a), classes.get(b)) {
            (Some(x), Some(y)) if x == y => 1.0,
            _ => 0.0,
        },
        SimilarityMode::Embedding(table) => match (table.get(a), table.get(b)) {
            (Some(x), Some(y)) => {
                let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
                let nx = sqrt(x.iter().map(|v| v * v).sum());
                let ny = sqrt(y.iter().map(|v| v * v).sum());
                if nx == 0.0 || ny == 0.0 {
                    return 0.0;
                }
                ((1.0 + dot / (nx * ny)) / 2.0).clamp(0.0, 1.0)
            }
            _ => {
                let missing = if table.contains_key(a) { b } else { a };
                log::warn!("label `{missing}` has no embedding; similarity 0");
                0.0
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_mode() {
        let cfg = SimilarityConfig::default();
        assert_eq!(semantic_similarity("cup", "cup", &cfg), 1.0);
        assert_eq!(semantic_similarity("cup", "table", &cfg), 0.0);
    }

    #[test]
    fn synonym_mode() {
        let classes: BTreeMap<String, String> =
            [("cup", "drinkware"), ("mug", "drinkware"), ("table", "table")].into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let cfg = SimilarityConfig { mode: SimilarityMode::Synonyms(classes), tau_sem: 0.5 };
        assert_eq!(semantic_similarity("cup", "mug", &cfg), 1.0);
        assert_eq!(semantic_similarity("cup", "table", &cfg), 0.0);
        assert_eq!(semantic_similarity("cup", "sofa", &cfg), 0.0);
    }

    #[test]
    fn embedding_mode() {
        let table: BTreeMap<String, Vec<f64>> =
            [("a", alloc::vec![1.0, 0.0]), ("b", alloc::vec![2.0, 0.0]), ("c", alloc::vec![-1.0, 0.0]), ("d", alloc::vec![0.0, 3.0])]
                .into_iter()
                .map(|(k, v)| (k.into(), v))
                .collect();
        let cfg = SimilarityConfig { mode: SimilarityMode::Embedding(table), tau_sem: 0.5 };
        assert_eq!(semantic_similarity("a", "b", &cfg), 1.0);
        assert_eq!(semantic_similarity("a", "c", &cfg), 0.0);
        assert!((semantic_similarity("a", "d", &cfg) - 0.5).abs() < 1e-12);
        assert_eq!(semantic_similarity("a", "zzz", &cfg), 0.0);
        assert!(cfg.validate().is_ok());
    }
}
