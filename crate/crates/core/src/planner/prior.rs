use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::world::WorldSpec;

/// Statistics the completion sampler draws phantom objects from.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionPrior {
    /// Sorted, unique labels.
    pub vocabulary: Vec<String>,
    /// Probability that an anchor voxel holds the base of an object of each label.
    pub occupancy: Vec<f64>,
    /// Nonnegative affinity between label pairs, `cooccurrence[l][m]`.
    pub cooccurrence: Vec<Vec<f64>>,
    /// Mean half extents per label, m.
    pub half_extents: Vec<Vec3>,
}

impl CompletionPrior {
    pub fn new(vocabulary: Vec<String>, occupancy: Vec<f64>, cooccurrence: Vec<Vec<f64>>, half_extents: Vec<Vec3>) -> Result<Self> {
        let p = Self { vocabulary, occupancy, cooccurrence, half_extents };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vocabulary.len();
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if n == 0 {
            return bad(String::from("prior vocabulary is empty"));
        }
        if self.vocabulary.windows(2).any(|w| w[0] >= w[1]) {
            return bad(String::from("prior vocabulary must be sorted and unique"));
        }
        if self.occupancy.len() != n || self.half_extents.len() != n || self.cooccurrence.len() != n || self.cooccurrence.iter().any(|r| r.len() != n) {
            return bad(format!("prior tables must all cover the {n} vocabulary labels"));
        }
        if let Some(r) = self.occupancy.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return bad(format!("prior occupancy rate {r} is outside [0, 1]"));
        }
        if self.cooccurrence.iter().flatten().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return bad(String::from("prior co-occurrence weights must be nonnegative"));
        }
        if self.half_extents.iter().any(|h| !(h.x > 0.0 && h.y > 0.0 && h.z > 0.0)) {
            return bad(String::from("prior sizes must be positive"));
        }
        Ok(())
    }

    /// Equal rates summing to `total_rate`, flat co-occurrence and one shared size.
    pub fn uniform(vocabulary: &[String], total_rate: f64, half: Vec3) -> Self {
        let mut vocab = vocabulary.to_vec();
        vocab.sort();
        vocab.dedup();
        let n = vocab.len();
        Self {
            vocabulary: vocab,
            occupancy: alloc::vec![total_rate / n.max(1) as f64; n],
            cooccurrence: alloc::vec![alloc::vec![1.0; n]; n],
            half_extents: alloc::vec![half; n],
        }
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.vocabulary.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    /// Empirical prior from example worlds.
    ///
    /// Rates are object counts per floor voxel of the navigable grid's extent. The
    /// co-occurrence of `(l, m)` is the lift of finding an `m` within `radius` of an `l`:
    /// observed close pairs over the count expected if labels were placed independently,
    /// with add-one smoothing.
    pub fn from_worlds(worlds: &[WorldSpec], voxel: f64, radius: f64) -> Result<Self> {
        let mut counts: BTreeMap<&str, (usize, Vec3)> = BTreeMap::new();
        let mut floor_voxels = 0.0;
        for w in worlds {
            let g = w.navigable();
            floor_voxels += g.width as f64 * g.height as f64 * g.resolution * g.resolution / (voxel * voxel);
            for o in w.objects() {
                let e = counts.entry(o.label.as_str()).or_insert((0, Vec3::ZERO));
                e.0 += 1;
                e.1 += o.bbox.half_extents;
            }
        }
        let vocabulary: Vec<String> = counts.keys().map(|l| String::from(*l)).collect();
        let n = vocabulary.len();
        if n == 0 || floor_voxels <= 0.0 {
            return Err(Error::InvalidConfig(String::from("cannot derive a prior from empty worlds")));
        }
        let index = |l: &str| vocabulary.binary_search_by(|v| v.as_str().cmp(l)).expect("label was counted");
        let mut pairs = alloc::vec![alloc::vec![0.0; n]; n];
        let mut total_pairs = 0.0;
        for w in worlds {
            let objs = w.objects();
            for (i, a) in objs.iter().enumerate() {
                for b in &objs[i + 1..] {
                    if a.bbox.center.distance(b.bbox.center) <= radius {
                        let (ia, ib) = (index(&a.label), index(&b.label));
                        pairs[ia][ib] += 1.0;
                        pairs[ib][ia] += 1.0;
                        total_pairs += 2.0;
                    }
                }
            }
        }
        let total: f64 = counts.values().map(|c| c.0 as f64).sum();
        let freq: Vec<f64> = counts.values().map(|c| c.0 as f64 / total).collect();
        let cooccurrence = (0..n)
            .map(|l| (0..n).map(|m| (pairs[l][m] + 1.0) / (total_pairs * freq[l] * freq[m] + 1.0)).collect())
            .collect();
        let occupancy = counts.values().map(|c| (c.0 as f64 / floor_voxels).min(1.0)).collect();
        let half_extents = counts.values().map(|c| c.1 / c.0 as f64).collect();
        Self::new(vocabulary, occupancy, cooccurrence, half_extents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::generate::{generate, Family};

    #[test]
    fn validation_catches_bad_tables() {
        let ok = CompletionPrior::uniform(&["b".into(), "a".into()], 0.1, Vec3::new(0.1, 0.1, 0.1));
        assert!(ok.validate().is_ok());
        assert_eq!(ok.vocabulary, alloc::vec![String::from("a"), String::from("b")]);
        let mut bad = ok.clone();
        bad.occupancy[0] = 1.5;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.cooccurrence[1][0] = -1.0;
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.half_extents.pop();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn family_prior_links_same_room_labels() {
        let worlds: Vec<WorldSpec> = (100..104).map(|s| generate(Family::Apartment, s).unwrap()).collect();
        let p = CompletionPrior::from_worlds(&worlds, 0.25, 2.0).unwrap();
        let (bed, pillow, stove) = (p.label_index("bed").unwrap(), p.label_index("pillow").unwrap(), p.label_index("stove").unwrap());
        assert!(p.cooccurrence[bed][pillow] > p.cooccurrence[bed][stove]);
        let total: f64 = p.occupancy.iter().sum();
        assert!(total > 0.0 && total < 1.0);
    }
}
