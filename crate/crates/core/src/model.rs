//! Truncated max-of-convex energy functions.
//!
//! A [`Model`] holds non-negative integer unary tables, a list of cliques and a
//! single [`DistanceSpec`]. Each clique contributes
//! `weight * sum_{i=1..m_c} min(d(p_{c-i+1} - p_i), M)` where `p` is the
//! ascending sort of the clique's labels and `m_c = min(m, floor(c / 2))`.

use std::fmt;

use thiserror::Error;

/// Energies are exact non-negative integers.
pub type Energy = u64;

/// Labels are 1-based: a model with `h` labels uses `1..=h`.
pub type Label = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("distance table is not convex at y = {0}")]
    ConvexityViolation(usize),
    #[error("distance table must start with d(0) = 0")]
    NonZeroOrigin,
    #[error("distance table has {len} entries but the model has {labels} labels")]
    TableTooShort { len: usize, labels: usize },
    #[error("model needs at least one label")]
    NoLabels,
    #[error("unary table has {got} entries, expected {expected}")]
    UnaryShape { expected: usize, got: usize },
    #[error("clique {clique} has {size} members; cliques need at least 2")]
    CliqueTooSmall { clique: usize, size: usize },
    #[error("clique {clique} references variable {var} but the model has {n} variables")]
    MemberOutOfRange { clique: usize, var: usize, n: usize },
    #[error("clique {clique} lists variable {var} twice")]
    DuplicateMember { clique: usize, var: usize },
    #[error("labeling has length {got}, expected {expected}")]
    LabelingLength { expected: usize, got: usize },
    #[error("label {label} of variable {var} is outside 1..={labels}")]
    LabelOutOfRange {
        var: usize,
        label: Label,
        labels: usize,
    },
    #[error("energy overflows 64 bits")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceKind {
    /// `d(y) = |y|`
    Linear,
    /// `d(y) = y^2`
    Quadratic,
    /// `d(y) = table[|y|]`, defined for `|y| < table.len()`.
    Table(Vec<Energy>),
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceKind::Linear => write!(f, "linear"),
            DistanceKind::Quadratic => write!(f, "quadratic"),
            DistanceKind::Table(values) => {
                write!(f, "table:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::str::FromStr for DistanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(DistanceKind::Linear),
            "quadratic" => Ok(DistanceKind::Quadratic),
            _ => s
                .strip_prefix("table:")
                .ok_or_else(|| format!("unknown distance '{s}'"))?
                .split(',')
                .map(|v| v.trim().parse::<Energy>())
                .collect::<Result<Vec<_>, _>>()
                .map(DistanceKind::Table)
                .map_err(|_| format!("bad distance table '{s}'")),
        }
    }
}

/// Convex distance `d`, truncation `M` and the number of extreme pairs `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceSpec {
    pub kind: DistanceKind,
    pub truncation: Energy,
    pub max_pairs: usize,
}

impl DistanceSpec {
    pub fn new(kind: DistanceKind, truncation: Energy, max_pairs: usize) -> Self {
        DistanceSpec {
            kind,
            truncation,
            max_pairs,
        }
    }

    pub fn linear(truncation: Energy, max_pairs: usize) -> Self {
        Self::new(DistanceKind::Linear, truncation, max_pairs)
    }

    pub fn quadratic(truncation: Energy, max_pairs: usize) -> Self {
        Self::new(DistanceKind::Quadratic, truncation, max_pairs)
    }

    pub fn table(values: Vec<Energy>, truncation: Energy, max_pairs: usize) -> Self {
        Self::new(DistanceKind::Table(values), truncation, max_pairs)
    }

    /// Checks `d(0) = 0` and non-negative second differences. Linear and
    /// quadratic distances are convex by construction.
    pub fn validate(&self) -> Result<(), ModelError> {
        let DistanceKind::Table(values) = &self.kind else {
            return Ok(());
        };
        if values.first().copied().unwrap_or(0) != 0 {
            return Err(ModelError::NonZeroOrigin);
        }
        // Symmetry supplies d(-1) = d(1), so the first second difference is
        // 2 d(1) - 2 d(0) >= 0, which holds for any non-negative table.
        for y in 1..values.len().saturating_sub(1) {
            let second = values[y + 1] as i128 - 2 * values[y] as i128 + values[y - 1] as i128;
            if second < 0 {
                return Err(ModelError::ConvexityViolation(y));
            }
        }
        Ok(())
    }

    /// `d(y)`, or `None` when `|y|` lies beyond a table distance.
    pub fn try_distance(&self, y: i64) -> Option<Energy> {
        let y = y.unsigned_abs();
        match &self.kind {
            DistanceKind::Linear => Some(y),
            DistanceKind::Quadratic => y.checked_mul(y),
            DistanceKind::Table(values) => {
                usize::try_from(y).ok().and_then(|i| values.get(i).copied())
            }
        }
    }

    /// `d(y)`.
    ///
    /// Panics if `|y|` is outside a table distance. Models validate that the
    /// table covers every label difference, so this never fires for labels of
    /// a valid model.
    pub fn distance(&self, y: i64) -> Energy {
        self.try_distance(y)
            .unwrap_or_else(|| panic!("distance queried at {y}, outside the table"))
    }

    /// `min(d(y), M)`
    pub fn truncated(&self, y: i64) -> Energy {
        self.distance(y).min(self.truncation)
    }

    /// Second difference `d(k+1) + d(k-1) - 2 d(k)`.
    pub fn second_difference(&self, k: i64) -> Energy {
        let value = self.distance(k + 1) as i128 + self.distance(k - 1) as i128
            - 2 * self.distance(k) as i128;
        debug_assert!(value >= 0, "non-convex distance at {k}");
        value.max(0) as Energy
    }

    /// `m_c = min(m, floor(c / 2))` for a clique of `size` members.
    pub fn pairs_for(&self, size: usize) -> usize {
        self.max_pairs.min(size / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clique {
    pub members: Vec<usize>,
    pub weight: Energy,
}

impl Clique {
    pub fn new(members: Vec<usize>, weight: Energy) -> Self {
        Clique { members, weight }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Clique potential of a labeled clique: the weighted sum of the `m_c`
/// largest truncated distances over disjoint extreme pairs.
pub fn clique_potential(labels: &[Label], dist: &DistanceSpec, weight: Energy) -> Energy {
    if weight == 0 {
        return 0;
    }
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    let c = sorted.len();
    let sum: Energy = (0..dist.pairs_for(c))
        .map(|i| dist.truncated(sorted[c - 1 - i] as i64 - sorted[i] as i64))
        .sum();
    weight * sum
}

/// One label per variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling(pub Vec<Label>);

impl Labeling {
    pub fn constant(n: usize, label: Label) -> Self {
        Labeling(vec![label; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn get(&self, var: usize) -> Label {
        self.0[var]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    num_vars: usize,
    num_labels: usize,
    unary: Vec<Energy>,
    cliques: Vec<Clique>,
    dist: DistanceSpec,
    /// Sum over variables of the constant added to make each unary row
    /// non-negative. Raw energy = energy - unary_shift.
    unary_shift: i64,
    /// Factor the energies were pre-multiplied by. Informational.
    scale: u64,
}

impl Model {
    /// Builds a model from a row-major `num_vars x num_labels` unary table.
    pub fn new(
        num_vars: usize,
        num_labels: usize,
        unary: Vec<Energy>,
        cliques: Vec<Clique>,
        dist: DistanceSpec,
    ) -> Result<Self, ModelError> {
        if num_labels == 0 {
            return Err(ModelError::NoLabels);
        }
        let expected = num_vars
            .checked_mul(num_labels)
            .ok_or(ModelError::Overflow)?;
        if unary.len() != expected {
            return Err(ModelError::UnaryShape {
                expected,
                got: unary.len(),
            });
        }
        dist.validate()?;
        if let DistanceKind::Table(values) = &dist.kind {
            if values.len() < num_labels {
                return Err(ModelError::TableTooShort {
                    len: values.len(),
                    labels: num_labels,
                });
            }
        }
        for (ci, clique) in cliques.iter().enumerate() {
            if clique.size() < 2 {
                return Err(ModelError::CliqueTooSmall {
                    clique: ci,
                    size: clique.size(),
                });
            }
            let mut seen = clique.members.clone();
            seen.sort_unstable();
            for w in seen.windows(2) {
                if w[0] == w[1] {
                    return Err(ModelError::DuplicateMember {
                        clique: ci,
                        var: w[0],
                    });
                }
            }
            if let Some(&var) = seen.last().filter(|&&v| v >= num_vars) {
                return Err(ModelError::MemberOutOfRange {
                    clique: ci,
                    var,
                    n: num_vars,
                });
            }
        }
        let model = Model {
            num_vars,
            num_labels,
            unary,
            cliques,
            dist,
            unary_shift: 0,
            scale: 1,
        };
        model.max_energy().ok_or(ModelError::Overflow)?;
        Ok(model)
    }

    /// Builds a model from signed unaries, shifting every row up by
    /// `-min(row)` when that minimum is negative.
    pub fn with_signed_unary(
        num_vars: usize,
        num_labels: usize,
        unary: Vec<i64>,
        cliques: Vec<Clique>,
        dist: DistanceSpec,
    ) -> Result<Self, ModelError> {
        if num_labels == 0 {
            return Err(ModelError::NoLabels);
        }
        let expected = num_vars.saturating_mul(num_labels);
        if unary.len() != expected {
            return Err(ModelError::UnaryShape {
                expected,
                got: unary.len(),
            });
        }
        let mut shift: i64 = 0;
        let mut shifted = Vec::with_capacity(unary.len());
        for row in unary.chunks(num_labels) {
            let lowest = row.iter().copied().min().unwrap_or(0);
            let kappa = if lowest < 0 { -(lowest as i128) } else { 0 };
            shift = shift
                .checked_add(i64::try_from(kappa).map_err(|_| ModelError::Overflow)?)
                .ok_or(ModelError::Overflow)?;
            for &v in row {
                let value = v as i128 + kappa;
                shifted.push(Energy::try_from(value).map_err(|_| ModelError::Overflow)?);
            }
        }
        let mut model = Self::new(num_vars, num_labels, shifted, cliques, dist)?;
        model.unary_shift = shift;
        Ok(model)
    }

    pub fn with_scale(mut self, scale: u64) -> Self {
        self.scale = scale.max(1);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn dist(&self) -> &DistanceSpec {
        &self.dist
    }

    pub fn unary_shift(&self) -> i64 {
        self.unary_shift
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Unary row of `var`, indexed by `label - 1`.
    pub fn unary_row(&self, var: usize) -> &[Energy] {
        &self.unary[var * self.num_labels..(var + 1) * self.num_labels]
    }

    pub fn unary(&self, var: usize, label: Label) -> Energy {
        self.unary[var * self.num_labels + label as usize - 1]
    }

    /// Largest clique size, or 0 without cliques.
    pub fn max_clique_size(&self) -> usize {
        self.cliques.iter().map(Clique::size).max().unwrap_or(0)
    }

    /// Largest effective pair count `m_c` over all cliques.
    pub fn max_pairs_used(&self) -> usize {
        self.cliques
            .iter()
            .map(|c| self.dist.pairs_for(c.size()))
            .max()
            .unwrap_or(0)
    }

    /// Upper bound on any energy, `None` on overflow.
    fn max_energy(&self) -> Option<Energy> {
        let mut total: Energy = 0;
        for row in self.unary.chunks(self.num_labels.max(1)) {
            total = total.checked_add(row.iter().copied().max().unwrap_or(0))?;
        }
        for clique in &self.cliques {
            let pairs = self.dist.pairs_for(clique.size()) as Energy;
            let ceiling = clique
                .weight
                .checked_mul(pairs)?
                .checked_mul(self.dist.truncation)?;
            total = total.checked_add(ceiling)?;
        }
        Some(total)
    }

    pub fn check_labeling(&self, x: &Labeling) -> Result<(), ModelError> {
        if x.len() != self.num_vars {
            return Err(ModelError::LabelingLength {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        for (var, &label) in x.labels().iter().enumerate() {
            if label == 0 || label as usize > self.num_labels {
                return Err(ModelError::LabelOutOfRange {
                    var,
                    label,
                    labels: self.num_labels,
                });
            }
        }
        Ok(())
    }

    pub fn clique_labels(&self, clique: &Clique, x: &Labeling) -> Vec<Label> {
        clique.members.iter().map(|&a| x.get(a)).collect()
    }

    pub fn clique_energy_of(&self, clique: &Clique, x: &Labeling) -> Energy {
        clique_potential(&self.clique_labels(clique, x), &self.dist, clique.weight)
    }

    pub fn unary_energy(&self, x: &Labeling) -> Energy {
        x.labels()
            .iter()
            .enumerate()
            .map(|(a, &label)| self.unary(a, label))
            .sum()
    }

    pub fn clique_energy(&self, x: &Labeling) -> Energy {
        self.cliques
            .iter()
            .map(|c| self.clique_energy_of(c, x))
            .sum()
    }

    /// `E(x)`. The labeling must be valid for this model.
    pub fn energy(&self, x: &Labeling) -> Energy {
        self.unary_energy(x) + self.clique_energy(x)
    }

    /// Labeling that minimizes each unary independently, lowest label on ties.
    pub fn unary_argmin(&self) -> Labeling {
        Labeling(
            (0..self.num_vars)
                .map(|a| {
                    let row = self.unary_row(a);
                    let best = (0..row.len()).min_by_key(|&i| (row[i], i)).unwrap_or(0);
                    best as Label + 1
                })
                .collect(),
        )
    }
}
