//! Range expansion: sweep label intervals, solve each move by min-cut and keep
//! a move only when it strictly lowers the true energy.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::graph::{labeling_from_cut, GraphError, MoveGraph};
use crate::model::{DistanceKind, Energy, Label, Labeling, Model, ModelError};
use crate::overestimate::{IntervalProblem, MoveError, MoveLabeling};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("interval length {len} is outside 1..={labels}")]
    IntervalLength { len: usize, labels: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum InitPolicy {
    /// Every variable starts at label 1.
    #[default]
    Constant,
    UnaryArgmin,
    Provided(Labeling),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolverConfig {
    /// `h'`; `None` picks [`default_interval_len`].
    pub interval_len: Option<usize>,
    pub init: InitPolicy,
    /// `None` runs until a sweep makes no change.
    pub max_sweeps: Option<usize>,
    /// Recorded in logs only; the solver is deterministic.
    pub seed: u64,
}

/// Interval length that balances the two terms of the max-of-linear bound:
/// `max(round(((2 - C + sqrt(C^2 + 4)) / C) * M), M)` for linear distances,
/// `round(sqrt(M))` for quadratic ones and `M` otherwise, clamped to `1..=h`.
/// `C` is the largest clique size (2 without cliques).
pub fn default_interval_len(model: &Model) -> usize {
    let m = model.dist().truncation as f64;
    let raw = match model.dist().kind {
        DistanceKind::Linear => {
            let c = model.max_clique_size().max(2) as f64;
            let balanced = ((2.0 - c + (c * c + 4.0).sqrt()) / c) * m;
            balanced.round().max(m)
        }
        DistanceKind::Quadratic => m.sqrt().round(),
        DistanceKind::Table(_) => m,
    };
    (raw as usize).clamp(1, model.num_labels())
}

/// Intervals `[max(i_m, 1), min(i_m + h' - 1, h)]` for `i_m` from `2 - h'` to
/// `h`, paired with their `i_m`.
pub fn interval_sweep_order(labels: usize, len: usize) -> Vec<(i64, Label, Label)> {
    let h = labels as i64;
    let len = len as i64;
    (2 - len..=h)
        .map(|start| {
            let first = start.max(1);
            let last = (start + len - 1).min(h);
            (start, first as Label, last as Label)
        })
        .collect()
}

/// Result of one interval move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub moves: MoveLabeling,
    pub labeling: Labeling,
    /// Min-cut value in scaled capacity units.
    pub cut_scaled: u64,
    pub scale: u64,
    /// Constant separating the cut from `E'`, in energy units.
    pub constant: Energy,
}

impl Expansion {
    /// Cut value in energy units; fractional when retained counts exceed
    /// `c - m_c` in some clique with `m_c >= 2`.
    pub fn cut_value(&self) -> f64 {
        self.cut_scaled as f64 / self.scale as f64
    }
}

/// Minimizes the move energy of one interval by min-cut.
pub fn expand(problem: &IntervalProblem<'_>) -> Result<Expansion, SolveError> {
    let graph = MoveGraph::build(problem)?;
    let cut = graph.solve()?;
    let moves = labeling_from_cut(&graph.layout, &cut)?;
    let labeling = problem.map_to_full(&moves);
    Ok(Expansion {
        moves,
        labeling,
        cut_scaled: cut.value,
        scale: graph.layout.scale(),
        constant: graph.layout.constant(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub sweep: usize,
    pub start: i64,
    pub first: Label,
    pub last: Label,
    pub cut_value: f64,
    pub accepted: bool,
    /// Energy of the current labeling after this move was decided.
    pub energy: Energy,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub interval_len: usize,
    pub initial_energy: Energy,
    pub records: Vec<LogRecord>,
}

impl RunLog {
    pub const CSV_HEADER: &'static str = "sweep,i_m,f,l,cut_value,accepted,energy,seconds";

    pub fn final_energy(&self) -> Energy {
        self.records
            .last()
            .map_or(self.initial_energy, |r| r.energy)
    }

    /// Energies right after each accepted move, starting with the initial one.
    pub fn accepted_energies(&self) -> Vec<Energy> {
        std::iter::once(self.initial_energy)
            .chain(self.records.iter().filter(|r| r.accepted).map(|r| r.energy))
            .collect()
    }

    pub fn sweeps(&self) -> usize {
        self.records.last().map_or(0, |r| r.sweep + 1)
    }

    pub fn total_seconds(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.seconds)
    }

    /// CSV rows (with header, without comment lines).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{:.6}",
                r.sweep,
                r.start,
                r.first,
                r.last,
                r.cut_value,
                u8::from(r.accepted),
                r.energy,
                r.seconds
            );
        }
        out
    }
}

fn initial_labeling(model: &Model, init: &InitPolicy) -> Result<Labeling, SolveError> {
    let x = match init {
        InitPolicy::Constant => Labeling::constant(model.num_vars(), 1),
        InitPolicy::UnaryArgmin => model.unary_argmin(),
        InitPolicy::Provided(x) => x.clone(),
    };
    model.check_labeling(&x)?;
    Ok(x)
}

/// Runs range expansion to convergence (or `max_sweeps`).
pub fn run(model: &Model, config: &SolverConfig) -> Result<(Labeling, RunLog), SolveError> {
    let len = config
        .interval_len
        .unwrap_or_else(|| default_interval_len(model));
    if len == 0 || len > model.num_labels() {
        return Err(SolveError::IntervalLength {
            len,
            labels: model.num_labels(),
        });
    }
    let mut current = initial_labeling(model, &config.init)?;
    let mut energy = model.energy(&current);
    let mut log = RunLog {
        interval_len: len,
        initial_energy: energy,
        records: Vec::new(),
    };
    let intervals = interval_sweep_order(model.num_labels(), len);
    let clock = Instant::now();
    let mut sweep = 0;
    loop {
        if config.max_sweeps.is_some_and(|max| sweep >= max) {
            break;
        }
        let mut changed = false;
        for &(start, first, last) in &intervals {
            let problem = IntervalProblem::new(model, &current, first, last)?;
            let step = expand(&problem)?;
            let candidate = model.energy(&step.labeling);
            let accepted = candidate < energy;
            if accepted {
                current = step.labeling.clone();
                energy = candidate;
                changed = true;
            }
            log.records.push(LogRecord {
                sweep,
                start,
                first,
                last,
                cut_value: step.cut_value(),
                accepted,
                energy,
                seconds: clock.elapsed().as_secs_f64(),
            });
        }
        sweep += 1;
        if !changed {
            break;
        }
    }
    Ok((current, log))
}

/// True when no single interval move of length `len` strictly lowers the
/// energy of `x`.
pub fn is_local_optimum(model: &Model, x: &Labeling, len: usize) -> Result<bool, SolveError> {
    let energy = model.energy(x);
    for (_, first, last) in interval_sweep_order(model.num_labels(), len) {
        let problem = IntervalProblem::new(model, x, first, last)?;
        if model.energy(&expand(&problem)?.labeling) < energy {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Clique, DistanceSpec};

    #[test]
    fn sweep_order_small() {
        let got: Vec<(Label, Label)> = interval_sweep_order(5, 2)
            .into_iter()
            .map(|(_, f, l)| (f, l))
            .collect();
        assert_eq!(got, vec![(1, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 5)]);
        let starts: Vec<i64> = interval_sweep_order(5, 2).iter().map(|t| t.0).collect();
        assert_eq!(starts, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn unit_intervals_are_singletons() {
        let got: Vec<(Label, Label)> = interval_sweep_order(4, 1)
            .into_iter()
            .map(|(_, f, l)| (f, l))
            .collect();
        assert_eq!(got, vec![(1, 1), (2, 2), (3, 3), (4, 4)]);
    }

    #[test]
    fn full_length_contains_everything() {
        let got = interval_sweep_order(4, 4);
        assert!(got.iter().any(|&(_, f, l)| f == 1 && l == 4));
        assert!(got.iter().all(|&(_, f, l)| f >= 1 && l <= 4 && f <= l));
    }

    #[test]
    fn default_lengths() {
        let pair = |m: u64| {
            Model::new(
                2,
                20,
                vec![0; 40],
                vec![Clique::new(vec![0, 1], 1)],
                DistanceSpec::linear(m, 1),
            )
            .unwrap()
        };
        // sqrt(2) * 3 = 4.24
        assert_eq!(default_interval_len(&pair(3)), 4);
        assert_eq!(default_interval_len(&pair(10)), 14);
        let quad = Model::new(1, 20, vec![0; 20], vec![], DistanceSpec::quadratic(10, 1)).unwrap();
        assert_eq!(default_interval_len(&quad), 3);
        let big = Model::new(
            4,
            20,
            vec![0; 80],
            vec![Clique::new(vec![0, 1, 2, 3], 1)],
            DistanceSpec::linear(5, 1),
        )
        .unwrap();
        assert_eq!(default_interval_len(&big), 5);
        let clamped = Model::new(1, 3, vec![0; 3], vec![], DistanceSpec::linear(50, 1)).unwrap();
        assert_eq!(default_interval_len(&clamped), 3);
    }

    #[test]
    fn zero_weight_gives_unary_argmin() {
        let unary = vec![5, 1, 9, 0, 7, 7, 3, 2, 8];
        let model = Model::new(
            3,
            3,
            unary,
            vec![Clique::new(vec![0, 1, 2], 0)],
            DistanceSpec::linear(2, 1),
        )
        .unwrap();
        let config = SolverConfig {
            interval_len: Some(1),
            ..SolverConfig::default()
        };
        let (x, log) = run(&model, &config).unwrap();
        assert_eq!(x, model.unary_argmin());
        assert_eq!(x, Labeling(vec![2, 1, 2]));
        // one improving sweep plus one confirming sweep
        assert_eq!(log.sweeps(), 2);
    }

    #[test]
    fn already_optimal_move_is_rejected() {
        let model = Model::new(
            2,
            3,
            vec![0, 5, 5, 0, 5, 5],
            vec![Clique::new(vec![0, 1], 3)],
            DistanceSpec::linear(2, 1),
        )
        .unwrap();
        let current = Labeling(vec![1, 1]);
        let problem = IntervalProblem::new(&model, &current, 2, 3).unwrap();
        let step = expand(&problem).unwrap();
        assert_eq!(model.energy(&step.labeling), model.energy(&current));
    }

    #[test]
    fn bad_interval_length() {
        let model = Model::new(1, 3, vec![0; 3], vec![], DistanceSpec::linear(1, 1)).unwrap();
        let config = SolverConfig {
            interval_len: Some(4),
            ..SolverConfig::default()
        };
        assert!(matches!(
            run(&model, &config),
            Err(SolveError::IntervalLength { .. })
        ));
    }

    #[test]
    fn log_csv_shape() {
        let model = Model::new(1, 2, vec![3, 1], vec![], DistanceSpec::linear(1, 1)).unwrap();
        let (_, log) = run(&model, &SolverConfig::default()).unwrap();
        let csv = log.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(RunLog::CSV_HEADER));
        assert!(lines.all(|l| l.split(',').count() == 8));
        assert_eq!(log.final_energy(), 1);
    }
}
