use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DatakitError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            train: 1500,
            valid: 133,
            test: 300,
        }
    }
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }

    /// Scales `self` down to `n` records by largest remainder; sizes that
    /// already fit are returned unchanged.
    pub fn proportional(&self, n: usize) -> Self {
        let total = self.total();
        if n >= total || total == 0 {
            return *self;
        }
        let parts = [self.train, self.valid, self.test];
        let mut sizes = parts.map(|p| p * n / total);
        let mut rest: Vec<(usize, usize)> = parts.iter().enumerate().map(|(i, p)| (p * n % total, i)).collect();
        // Largest remainder first; earlier split wins ties.
        rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let missing = n - sizes.iter().sum::<usize>();
        for &(_, i) in rest.iter().take(missing) {
            sizes[i] += 1;
        }
        Self {
            train: sizes[0],
            valid: sizes[1],
            test: sizes[2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
    /// Accepted ids left over when the sizes sum to less than the corpus.
    #[serde(default)]
    pub unassigned: Vec<String>,
}

impl SplitManifest {
    pub fn splits(&self) -> [(&'static str, &[String]); 3] {
        [("train", &self.train), ("valid", &self.valid), ("test", &self.test)]
    }
}

/// Seeded shuffle of the sorted ids, then consecutive partition.
pub fn make_splits(accepted_ids: &[String], sizes: SplitSizes, seed: u64) -> Result<SplitManifest, DatakitError> {
    if sizes.total() > accepted_ids.len() {
        return Err(DatakitError::InsufficientRecords {
            requested: sizes.total(),
            available: accepted_ids.len(),
        });
    }
    let mut ids = accepted_ids.to_vec();
    ids.sort();
    ids.dedup();
    if ids.len() != accepted_ids.len() {
        return Err(DatakitError::Precondition("accepted ids contain duplicates".into()));
    }
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut it = ids.into_iter();
    let mut take = |k: usize| it.by_ref().take(k).collect::<Vec<_>>();
    let train = take(sizes.train);
    let valid = take(sizes.valid);
    let test = take(sizes.test);
    let unassigned = take(usize::MAX);
    Ok(SplitManifest {
        schema_version: 1,
        seed,
        train,
        valid,
        test,
        unassigned,
    })
}
