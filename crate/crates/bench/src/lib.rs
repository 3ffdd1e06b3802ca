//! Fixed workloads shared by the benchmarks.

use tmcm::{DistanceKind, Label, Labeling, Model, SyntheticSpec};

/// Lattice instance with `side * side` variables and 5x5 windows.
pub fn lattice(side: usize, labels: usize, truncation: u64, max_pairs: usize) -> Model {
    SyntheticSpec {
        side,
        labels,
        window: 5.min(side),
        truncation,
        max_pairs,
        dist: DistanceKind::Linear,
        seed: 2024,
        ..SyntheticSpec::default()
    }
    .generate(0)
}

/// A non-constant starting point so moves see mixed retained labels.
pub fn striped(model: &Model) -> Labeling {
    let h = model.num_labels() as Label;
    Labeling(
        (0..model.num_vars())
            .map(|a| (a as Label % h) + 1)
            .collect(),
    )
}
