//! Energy minimization for truncated max-of-convex models.
//!
//! A model assigns each of `n` variables one of `h` ordered labels. Its energy
//! is a sum of unary terms and clique terms; a clique charges the `m` largest
//! truncated convex distances between disjoint pairs of its labels. The
//! [`solver`] minimizes such energies by range expansion: each step offers every
//! variable an interval of consecutive labels and solves the resulting move
//! exactly on a surrogate energy by st-mincut.
//!
//! ```
//! use tmcm::{run, Clique, DistanceSpec, Model, SolverConfig};
//!
//! let unary = vec![0, 9, 9, /**/ 9, 0, 9, /**/ 9, 9, 0];
//! let cliques = vec![Clique::new(vec![0, 1, 2], 4)];
//! let model = Model::new(3, 3, unary, cliques, DistanceSpec::linear(2, 1)).unwrap();
//! let (labels, log) = run(&model, &SolverConfig::default()).unwrap();
//! assert_eq!(model.energy(&labels), log.final_energy());
//! ```

pub mod flow;
pub mod graph;
pub mod io;
pub mod model;
pub mod oracle;
pub mod overestimate;
pub mod solver;
pub mod synthetic;

pub use flow::{CutResult, FlowError, FlowNetwork};
pub use graph::{labeling_from_cut, GraphError, GraphLayout, MoveGraph};
pub use model::{
    clique_potential, Clique, DistanceKind, DistanceSpec, Energy, Label, Labeling, Model,
    ModelError,
};
pub use oracle::{audit_bound, bound_factor, brute_force_min, BoundReport, OracleError};
pub use overestimate::{delta, IntervalProblem, MoveError, MoveLabeling};
pub use solver::{
    default_interval_len, expand, interval_sweep_order, run, InitPolicy, RunLog, SolveError,
    SolverConfig,
};
pub use synthetic::{SyntheticSpec, TinyFamily};
