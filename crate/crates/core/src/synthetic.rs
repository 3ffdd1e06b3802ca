//! Seeded synthetic instances: square lattices whose cliques are every
//! `window x window` sub-square (stride 1), plus a family of tiny random
//! models small enough for exhaustive checks.
//!
//! Instance `i` of a spec with seed `s` draws from `ChaCha8Rng::seed_from_u64(s + i)`
//! (wrapping), which is portable across platforms.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{Clique, DistanceKind, DistanceSpec, Energy, Model};
use crate::solver::{run, SolveError, SolverConfig};

pub fn instance_rng(seed: u64, instance: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(instance))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub side: usize,
    pub labels: usize,
    pub window: usize,
    pub unary_lo: Energy,
    pub unary_hi: Energy,
    pub weight: Energy,
    pub dist: DistanceKind,
    pub truncation: Energy,
    pub max_pairs: usize,
    pub seed: u64,
    pub instances: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            side: 30,
            labels: 8,
            window: 5,
            unary_lo: 1,
            unary_hi: 100,
            weight: 5,
            dist: DistanceKind::Linear,
            truncation: 5,
            max_pairs: 1,
            seed: 0,
            instances: 1,
        }
    }
}

impl SyntheticSpec {
    pub fn clique_count(&self) -> usize {
        let per_axis = self.side + 1 - self.window;
        per_axis * per_axis
    }

    pub fn distance(&self) -> DistanceSpec {
        DistanceSpec::new(self.dist.clone(), self.truncation, self.max_pairs)
    }

    /// Model for instance `instance` of this spec.
    pub fn generate(&self, instance: u64) -> Model {
        assert!(
            self.window >= 1 && self.window <= self.side,
            "window must fit the lattice"
        );
        let mut rng = instance_rng(self.seed, instance);
        let n = self.side * self.side;
        let unary: Vec<Energy> = (0..n * self.labels)
            .map(|_| rng.gen_range(self.unary_lo..=self.unary_hi))
            .collect();
        let per_axis = self.side + 1 - self.window;
        let mut cliques = Vec::with_capacity(per_axis * per_axis);
        for top in 0..per_axis {
            for left in 0..per_axis {
                let members = (top..top + self.window)
                    .flat_map(|r| (left..left + self.window).map(move |c| r * self.side + c))
                    .collect::<Vec<_>>();
                if members.len() >= 2 {
                    cliques.push(Clique::new(members, self.weight));
                }
            }
        }
        Model::new(n, self.labels, unary, cliques, self.distance())
            .expect("synthetic spec produces a valid model")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub interval_len: usize,
    pub truncation: Energy,
    pub max_pairs: usize,
    pub weight: Energy,
    pub mean_energy: f64,
    pub mean_seconds: f64,
    pub instances: usize,
    pub seed: u64,
    pub energies: Vec<Energy>,
}

pub const SWEEP_CSV_HEADER: &str = "h_prime,M,m,omega,mean_energy,mean_seconds,instances,seed0";

impl SweepRow {
    pub fn csv_row(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{},{},{},{},{:.3},{:.6},{},{}",
            self.interval_len,
            self.truncation,
            self.max_pairs,
            self.weight,
            self.mean_energy,
            self.mean_seconds,
            self.instances,
            self.seed
        );
        out
    }
}

/// Runs every instance of `spec` at each interval length and averages the
/// final energies and run times. Instances run in parallel; results are
/// gathered in instance order.
pub fn sweep(spec: &SyntheticSpec, interval_lens: &[usize]) -> Result<Vec<SweepRow>, SolveError> {
    let models: Vec<Model> = (0..spec.instances.max(1) as u64)
        .into_par_iter()
        .map(|i| spec.generate(i))
        .collect();
    let mut rows = Vec::with_capacity(interval_lens.len());
    for &len in interval_lens {
        let config = SolverConfig {
            interval_len: Some(len),
            seed: spec.seed,
            ..SolverConfig::default()
        };
        let results: Vec<(Energy, f64)> = models
            .par_iter()
            .map(|model| {
                run(model, &config).map(|(x, log)| (model.energy(&x), log.total_seconds()))
            })
            .collect::<Result<_, _>>()?;
        let count = results.len() as f64;
        rows.push(SweepRow {
            interval_len: len,
            truncation: spec.truncation,
            max_pairs: spec.max_pairs,
            weight: spec.weight,
            mean_energy: results.iter().map(|r| r.0 as f64).sum::<f64>() / count,
            mean_seconds: results.iter().map(|r| r.1).sum::<f64>() / count,
            instances: results.len(),
            seed: spec.seed,
            energies: results.iter().map(|r| r.0).collect(),
        });
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

/// Ranges for random models small enough to enumerate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TinyFamily {
    pub max_vars: usize,
    pub max_labels: usize,
    pub max_clique: usize,
    pub max_cliques: usize,
    pub max_pairs: usize,
    pub truncations: Vec<Energy>,
    pub max_weight: Energy,
    pub max_unary: Energy,
    pub dist: DistanceKind,
}

impl Default for TinyFamily {
    fn default() -> Self {
        TinyFamily {
            max_vars: 6,
            max_labels: 5,
            max_clique: 4,
            max_cliques: 3,
            max_pairs: 2,
            truncations: vec![1, 2, 3],
            max_weight: 5,
            max_unary: 100,
            dist: DistanceKind::Linear,
        }
    }
}

impl TinyFamily {
    pub fn sample(&self, rng: &mut impl Rng) -> Model {
        let n = rng.gen_range(2..=self.max_vars.max(2));
        let h = rng.gen_range(2..=self.max_labels.max(2));
        let unary: Vec<Energy> = (0..n * h)
            .map(|_| rng.gen_range(0..=self.max_unary))
            .collect();
        let count = rng.gen_range(1..=self.max_cliques.max(1));
        let cliques = (0..count)
            .map(|_| {
                let size = rng.gen_range(2..=self.max_clique.clamp(2, n));
                let mut members = sample(rng, n, size).into_vec();
                members.sort_unstable();
                Clique::new(members, rng.gen_range(0..=self.max_weight))
            })
            .collect();
        let truncation = self.truncations[rng.gen_range(0..self.truncations.len())];
        let pairs = rng.gen_range(1..=self.max_pairs.max(1));
        let dist = match &self.dist {
            DistanceKind::Table(t) => DistanceKind::Table(t.clone()),
            other => other.clone(),
        };
        Model::new(
            n,
            h,
            unary,
            cliques,
            DistanceSpec::new(dist, truncation, pairs),
        )
        .expect("tiny family produces valid models")
    }
}
