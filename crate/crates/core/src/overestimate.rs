//! The move-space energy `E'` for one interval move.
//!
//! A move labeling `y` assigns each variable a value in `0..=h'`: `0` keeps the
//! current label, `i >= 1` takes label `first + i - 1`. Clique terms replace the
//! truncated distance by the pairwise surrogate [`delta`], which is submodular
//! in `y` and never smaller than the truncated distance it replaces.

use thiserror::Error;

use crate::model::{Clique, DistanceSpec, Energy, Label, Labeling, Model, ModelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("interval [{first}, {last}] is not inside 1..={labels}")]
    InvalidInterval {
        first: Label,
        last: Label,
        labels: usize,
    },
    #[error("move label {value} of variable {var} exceeds interval length {len}")]
    MoveLabelOutOfRange { var: usize, value: u32, len: usize },
    #[error("move labeling has length {got}, expected {expected}")]
    MoveLabelingLength { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Move labeling over `{0, ..., h'}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MoveLabeling(pub Vec<u32>);

impl MoveLabeling {
    pub fn retain_all(n: usize) -> Self {
        MoveLabeling(vec![0; n])
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Current labeling plus the interval `[first, last]` offered to every variable.
#[derive(Debug, Clone, Copy)]
pub struct IntervalProblem<'a> {
    model: &'a Model,
    current: &'a Labeling,
    first: Label,
    last: Label,
}

impl<'a> IntervalProblem<'a> {
    pub fn new(
        model: &'a Model,
        current: &'a Labeling,
        first: Label,
        last: Label,
    ) -> Result<Self, MoveError> {
        model.check_labeling(current)?;
        if first == 0 || first > last || last as usize > model.num_labels() {
            return Err(MoveError::InvalidInterval {
                first,
                last,
                labels: model.num_labels(),
            });
        }
        Ok(IntervalProblem {
            model,
            current,
            first,
            last,
        })
    }

    pub fn model(&self) -> &'a Model {
        self.model
    }

    pub fn current(&self) -> &'a Labeling {
        self.current
    }

    pub fn first(&self) -> Label {
        self.first
    }

    pub fn last(&self) -> Label {
        self.last
    }

    /// `h' = last - first + 1`
    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check_move(&self, y: &MoveLabeling) -> Result<(), MoveError> {
        if y.len() != self.model.num_vars() {
            return Err(MoveError::MoveLabelingLength {
                expected: self.model.num_vars(),
                got: y.len(),
            });
        }
        let len = self.len();
        for (var, &value) in y.0.iter().enumerate() {
            if value as usize > len {
                return Err(MoveError::MoveLabelOutOfRange { var, value, len });
            }
        }
        Ok(())
    }

    /// Full label of `var` under move label `value`.
    pub fn label_for(&self, var: usize, value: u32) -> Label {
        if value == 0 {
            self.current.get(var)
        } else {
            value + self.first - 1
        }
    }

    pub fn map_to_full(&self, y: &MoveLabeling) -> Labeling {
        Labeling(
            y.0.iter()
                .enumerate()
                .map(|(a, &value)| self.label_for(a, value))
                .collect(),
        )
    }

    /// `theta'_a(y_a)`; the unary shift is zero because model unaries are
    /// already non-negative.
    pub fn unary(&self, var: usize, value: u32) -> Energy {
        self.model.unary(var, self.label_for(var, value))
    }

    /// Clique members ordered by move label; retained members (label 0) are
    /// further ordered by their current label, then by variable id.
    pub fn sorted_members(&self, clique: &Clique, y: &MoveLabeling) -> Vec<usize> {
        let mut order = clique.members.clone();
        order.sort_by_key(|&a| {
            let value = y.get(a);
            let held = if value == 0 { self.current.get(a) } else { 0 };
            (value, held, a)
        });
        order
    }

    /// `theta'_c(y_c) = w_c * sum_{i=1..m_c} delta(y_{q_i}, y_{q_{c-i+1}})`
    pub fn clique(&self, clique: &Clique, y: &MoveLabeling) -> Energy {
        if clique.weight == 0 {
            return 0;
        }
        let dist = self.model.dist();
        let order = self.sorted_members(clique, y);
        let c = order.len();
        let sum: Energy = (0..dist.pairs_for(c))
            .map(|i| {
                let (a, b) = (order[i], order[c - 1 - i]);
                delta(
                    y.get(a),
                    y.get(b),
                    self.current.get(a),
                    self.current.get(b),
                    dist,
                )
            })
            .sum();
        clique.weight * sum
    }

    /// `E'(y)`.
    pub fn energy(&self, y: &MoveLabeling) -> Energy {
        let unary: Energy =
            y.0.iter()
                .enumerate()
                .map(|(a, &value)| self.unary(a, value))
                .sum();
        let cliques: Energy = self.model.cliques().iter().map(|c| self.clique(c, y)).sum();
        unary + cliques
    }
}

/// Pairwise surrogate of `min(d(x_a - x_b), M)` in move space.
///
/// `held_a`, `held_b` are the current labels, used only when both variables
/// retain them.
pub fn delta(y_a: u32, y_b: u32, held_a: Label, held_b: Label, dist: &DistanceSpec) -> Energy {
    match (y_a, y_b) {
        (0, 0) => dist.truncated(held_a as i64 - held_b as i64),
        (0, b) => dist.truncation + dist.distance(b as i64 - 1),
        (a, 0) => dist.truncation + dist.distance(a as i64 - 1),
        (a, b) => dist.distance(a as i64 - b as i64),
    }
}
