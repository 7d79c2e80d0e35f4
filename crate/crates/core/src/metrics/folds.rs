use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fold index for every item, in the input order of the ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    entries: Vec<(String, usize)>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[(String, usize)] {
        &self.entries
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.entries.iter().find(|(i, _)| i == id).map(|(_, f)| *f)
    }

    /// Ids in fold `f`, in input order.
    pub fn fold(&self, f: usize) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, g)| *g == f)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for (_, f) in &self.entries {
            sizes[*f] += 1;
        }
        sizes
    }

    /// `(train, test)` ids when fold `f` is held out.
    pub fn split(&self, f: usize) -> (Vec<&str>, Vec<&str>) {
        let (test, train): (Vec<_>, Vec<_>) = self.entries.iter().partition(|(_, g)| *g == f);
        (
            train.into_iter().map(|(id, _)| id.as_str()).collect(),
            test.into_iter().map(|(id, _)| id.as_str()).collect(),
        )
    }
}

/// Seeded shuffle followed by round-robin assignment to `k` folds.
pub fn kfold_split<S: AsRef<str>>(ids: &[S], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::param("k", format!("need at least 2 folds, got {k}")));
    }
    if ids.len() < k {
        return Err(Error::param(
            "k",
            format!("{k} folds requested for {} items", ids.len()),
        ));
    }
    let mut seen = std::collections::HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_ref()) {
            return Err(Error::param(
                "ids",
                format!("duplicate id `{}`", id.as_ref()),
            ));
        }
    }

    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; ids.len()];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    Ok(FoldAssignment {
        k,
        entries: ids
            .iter()
            .zip(fold)
            .map(|(id, f)| (id.as_ref().to_owned(), f))
            .collect(),
    })
}
