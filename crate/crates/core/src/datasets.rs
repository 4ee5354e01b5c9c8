//! Bundled data.

use crate::outbreak::RemovalDataset;

/// Removal times (days) of the 30 smallpox cases in the Abakaliki outbreak,
/// population 120. The first removal is at time 0.
pub const ABAKALIKI_REMOVALS: [f64; 30] = [
    0.0, 13.0, 20.0, 22.0, 25.0, 25.0, 25.0, 26.0, 30.0, 35.0, 38.0, 40.0, 40.0, 42.0, 42.0, 47.0, 50.0, 51.0, 55.0,
    55.0, 56.0, 57.0, 58.0, 60.0, 60.0, 61.0, 66.0, 66.0, 71.0, 76.0,
];

pub const ABAKALIKI_POPULATION: usize = 120;

pub fn abakaliki() -> RemovalDataset {
    RemovalDataset::new(ABAKALIKI_REMOVALS.to_vec(), ABAKALIKI_POPULATION, "abakaliki").expect("valid bundled data")
}
