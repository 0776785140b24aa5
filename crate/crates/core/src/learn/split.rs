use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{MetaphorClass, MetaphorItem};

pub const ITEMS_PER_CLASS: usize = 12;
pub const TRAIN_PER_CLASS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainTestSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

impl TrainTestSplit {
    /// Items of `all` whose ids are in `ids`, in dataset order.
    pub fn select<'a>(all: &'a [MetaphorItem], ids: &[String]) -> Vec<&'a MetaphorItem> {
        all.iter().filter(|m| ids.contains(&m.id)).collect()
    }

    pub fn train_items<'a>(&self, all: &'a [MetaphorItem]) -> Vec<&'a MetaphorItem> {
        Self::select(all, &self.train)
    }

    pub fn test_items<'a>(&self, all: &'a [MetaphorItem]) -> Vec<&'a MetaphorItem> {
        Self::select(all, &self.test)
    }
}

/// Stratified 18/6 split of the 24 items (9+9 train, 3+3 test).
pub fn make_split(items: &[MetaphorItem], seed: u64) -> Result<TrainTestSplit> {
    if items.len() != 2 * ITEMS_PER_CLASS {
        return Err(Error::InvalidArgument(format!(
            "split needs {} items, got {}",
            2 * ITEMS_PER_CLASS,
            items.len()
        )));
    }
    for class in [MetaphorClass::VehicleInherent, MetaphorClass::NonVehicleInherent] {
        let count = items.iter().filter(|m| m.class == class).count();
        if count != ITEMS_PER_CLASS {
            return Err(Error::InvalidArgument(format!(
                "split needs {ITEMS_PER_CLASS} {class} items, got {count}"
            )));
        }
    }
    stratified_split(items, seed, TRAIN_PER_CLASS)
}

/// Shuffle each class with a seeded ChaCha stream and take the first
/// `train_per_class` items of each for training. Output lists keep dataset
/// order.
pub fn stratified_split(items: &[MetaphorItem], seed: u64, train_per_class: usize) -> Result<TrainTestSplit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; items.len()];
    for class in [MetaphorClass::VehicleInherent, MetaphorClass::NonVehicleInherent] {
        let mut members: Vec<usize> = (0..items.len()).filter(|&i| items[i].class == class).collect();
        if members.len() < train_per_class {
            return Err(Error::InvalidArgument(format!(
                "only {} {class} items for {train_per_class} training slots",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for &i in &members[..train_per_class] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) = items.iter().zip(&in_train).partition(|(_, &t)| t);
    Ok(TrainTestSplit {
        train: train.into_iter().map(|(m, _)| m.id.clone()).collect(),
        test: test.into_iter().map(|(m, _)| m.id.clone()).collect(),
        seed,
    })
}
