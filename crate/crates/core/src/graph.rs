//! Flow network for one interval move.
//!
//! Every variable `a` gets a chain `s -> V_1 -> ... -> V_{h'} -> t`; the chain
//! arc that a finite cut severs encodes the move label `y_a`. Each clique adds
//! a family of convex gadgets (auxiliary pair `U_ij`, `W_ij` per label pair)
//! modelling the untruncated max-of-convex term, and one truncation gadget
//! (`U`, `W` tied to the terminals) accounting for retained labels and the
//! truncation `M`.
//!
//! All capacities are multiplied by [`GraphLayout::scale`], an even multiple
//! of every clique's pair count, so halves and `theta_c / m_c` stay integral.

use std::ops::Range;

use thiserror::Error;

use crate::flow::{Capacity, CutResult, FlowError, FlowNetwork, NodeId};
use crate::model::Energy;
use crate::overestimate::{IntervalProblem, MoveLabeling};

pub const SOURCE: NodeId = 0;
pub const SINK: NodeId = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("clique {clique}: current potential exceeds its truncation ceiling")]
    CapacityNegative { clique: usize },
    #[error("cut crosses variable {var}'s chain {crossings} times")]
    MalformedCut { var: usize, crossings: usize },
    #[error("capacities overflow 64 bits")]
    Overflow,
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    /// Label pair `(i, j)`, `2 <= i <= j <= h'`, of a clique's convex part.
    Convex {
        clique: usize,
        i: usize,
        j: usize,
    },
    Truncation {
        clique: usize,
    },
}

impl GadgetKind {
    pub fn clique(&self) -> usize {
        match *self {
            GadgetKind::Convex { clique, .. } | GadgetKind::Truncation { clique } => clique,
        }
    }
}

/// Auxiliary node pair plus the contiguous block of arcs touching it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub kind: GadgetKind,
    pub u: NodeId,
    pub w: NodeId,
    pub arcs: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphLayout {
    num_vars: usize,
    interval_len: usize,
    scale: u64,
    /// `sum_c kappa_c` in energy units.
    constant: Energy,
    chain_arcs: Range<usize>,
    gadgets: Vec<Gadget>,
}

impl GraphLayout {
    /// Node `V_i^a`, `i` in `1..=h'`.
    pub fn chain_node(&self, var: usize, i: usize) -> NodeId {
        debug_assert!((1..=self.interval_len).contains(&i));
        2 + var * self.interval_len + (i - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn interval_len(&self) -> usize {
        self.interval_len
    }

    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn constant(&self) -> Energy {
        self.constant
    }

    pub fn gadgets(&self) -> &[Gadget] {
        &self.gadgets
    }

    pub fn chain_arcs(&self) -> Range<usize> {
        self.chain_arcs.clone()
    }

    /// Source-side flags for the chain nodes implied by `y`; auxiliary
    /// nodes are left on the sink side.
    pub fn chain_sides(&self, num_nodes: usize, y: &MoveLabeling) -> Vec<bool> {
        let mut side = vec![false; num_nodes];
        side[SOURCE] = true;
        for a in 0..self.num_vars {
            for i in 1..=y.get(a) as usize {
                side[self.chain_node(a, i)] = true;
            }
        }
        side
    }
}

/// Network plus layout for one interval move.
#[derive(Debug, Clone)]
pub struct MoveGraph {
    pub network: FlowNetwork,
    pub layout: GraphLayout,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Even multiple of every `m_c` in the model.
fn capacity_scale(problem: &IntervalProblem<'_>) -> u64 {
    let dist = problem.model().dist();
    let lcm = problem
        .model()
        .cliques()
        .iter()
        .map(|c| dist.pairs_for(c.size()) as u64)
        .filter(|&m| m > 0)
        .fold(1u64, |acc, m| acc / gcd(acc, m) * m);
    2 * lcm
}

fn mul(a: u64, b: u64) -> Result<u64, GraphError> {
    a.checked_mul(b).ok_or(GraphError::Overflow)
}

impl MoveGraph {
    pub fn build(problem: &IntervalProblem<'_>) -> Result<Self, GraphError> {
        let model = problem.model();
        let n = model.num_vars();
        let len = problem.len();
        let scale = capacity_scale(problem);
        let mut net = FlowNetwork::new(2 + n * len, SOURCE, SINK)?;
        let mut layout = GraphLayout {
            num_vars: n,
            interval_len: len,
            scale,
            constant: 0,
            chain_arcs: 0..0,
            gadgets: Vec::new(),
        };

        for a in 0..n {
            build_unary_chain(problem, &layout, &mut net, a)?;
        }
        layout.chain_arcs = 0..net.arcs().len();

        for ci in 0..model.cliques().len() {
            build_convex_gadget(problem, &mut layout, &mut net, ci)?;
            build_truncation_gadget(problem, &mut layout, &mut net, ci)?;
        }
        net.infinity()?;
        Ok(MoveGraph {
            network: net,
            layout,
        })
    }

    pub fn solve(&self) -> Result<CutResult, GraphError> {
        Ok(self.network.min_cut()?)
    }

    /// Cheapest cut that places the chains according to `y`, in scaled
    /// capacity units. Each gadget's auxiliary pair is placed independently
    /// on whichever sides minimize its own arcs.
    pub fn canonical_cut_cost(&self, y: &MoveLabeling) -> Result<u64, GraphError> {
        let net = &self.network;
        let inf = net.infinity()?;
        let mut side = self.layout.chain_sides(net.num_nodes(), y);
        let arc_cost = |range: Range<usize>, side: &[bool]| -> u64 {
            net.arcs()[range]
                .iter()
                .filter(|arc| side[arc.tail] && !side[arc.head])
                .map(|arc| match arc.cap {
                    Capacity::Finite(c) => c,
                    Capacity::Infinite => inf,
                })
                .sum()
        };
        let mut total = arc_cost(self.layout.chain_arcs(), &side);
        for gadget in &self.layout.gadgets {
            total += self.best_gadget_cost(gadget, &mut side, &arc_cost);
        }
        Ok(total)
    }

    /// Minimum contribution of every gadget given chain placement `y`, in
    /// scaled units.
    pub fn gadget_costs(&self, y: &MoveLabeling) -> Result<Vec<(GadgetKind, u64)>, GraphError> {
        let net = &self.network;
        let inf = net.infinity()?;
        let mut side = self.layout.chain_sides(net.num_nodes(), y);
        let arc_cost = |range: Range<usize>, side: &[bool]| -> u64 {
            net.arcs()[range]
                .iter()
                .filter(|arc| side[arc.tail] && !side[arc.head])
                .map(|arc| match arc.cap {
                    Capacity::Finite(c) => c,
                    Capacity::Infinite => inf,
                })
                .sum()
        };
        Ok(self
            .layout
            .gadgets
            .iter()
            .map(|g| (g.kind, self.best_gadget_cost(g, &mut side, &arc_cost)))
            .collect())
    }

    fn best_gadget_cost(
        &self,
        gadget: &Gadget,
        side: &mut [bool],
        arc_cost: &dyn Fn(Range<usize>, &[bool]) -> u64,
    ) -> u64 {
        let mut best = u64::MAX;
        for placement in 0..4u8 {
            side[gadget.u] = placement & 1 != 0;
            side[gadget.w] = placement & 2 != 0;
            best = best.min(arc_cost(gadget.arcs.clone(), side));
        }
        side[gadget.u] = false;
        side[gadget.w] = false;
        best
    }
}

/// Chain arcs of one variable: `s -> V_1` at the current label's unary,
/// `V_i -> V_{i+1}` at label `first + i - 1`, `V_{h'} -> t` at `last`, and an
/// infinite reverse arc along every chain link.
pub fn build_unary_chain(
    problem: &IntervalProblem<'_>,
    layout: &GraphLayout,
    net: &mut FlowNetwork,
    var: usize,
) -> Result<(), GraphError> {
    let len = problem.len();
    let scale = layout.scale;
    let theta = |label: u32| mul(scale, problem.model().unary(var, label));
    net.add_arc(
        SOURCE,
        layout.chain_node(var, 1),
        theta(problem.current().get(var))?,
    );
    for i in 1..len {
        let label = problem.first() + i as u32 - 1;
        net.add_arc(
            layout.chain_node(var, i),
            layout.chain_node(var, i + 1),
            theta(label)?,
        );
        net.add_infinite_arc(layout.chain_node(var, i + 1), layout.chain_node(var, i));
    }
    net.add_arc(layout.chain_node(var, len), SINK, theta(problem.last())?);
    Ok(())
}

/// Scaled `r_ij`: `w * dbar(i, j) / 2` on the diagonal, `w * dbar(i, j)` off it.
fn convex_capacity(
    problem: &IntervalProblem<'_>,
    weight: Energy,
    scale: u64,
    i: usize,
    j: usize,
) -> Result<u64, GraphError> {
    let dbar = problem
        .model()
        .dist()
        .second_difference(i as i64 - j as i64);
    let r = mul(mul(scale, weight)?, dbar)?;
    Ok(if i == j { r / 2 } else { r })
}

/// Convex part of clique `ci`: for each label pair `2 <= i <= j <= h'` with a
/// positive `r_ij`, arcs `U_ij -> V_i^a` and `V_j^a -> W_ij` (capacity `r_ij`)
/// for every member, and `W_ij -> U_ij` (capacity `m_c * r_ij`). The pair's
/// cheapest contribution is `r_ij * min(#{y_a < i}, #{y_a >= j}, m_c)`.
///
/// Pairs with `i = 1` are left out: with every member moved they contribute
/// nothing, and leaving them out makes retained members count as if they sat at
/// move label 1, which is what the mixed cases of `delta` charge.
pub fn build_convex_gadget(
    problem: &IntervalProblem<'_>,
    layout: &mut GraphLayout,
    net: &mut FlowNetwork,
    ci: usize,
) -> Result<(), GraphError> {
    let clique = &problem.model().cliques()[ci];
    let pairs = problem.model().dist().pairs_for(clique.size()) as u64;
    if pairs == 0 || clique.weight == 0 {
        return Ok(());
    }
    let len = problem.len();
    for i in 2..=len {
        for j in i..=len {
            let r = convex_capacity(problem, clique.weight, layout.scale, i, j)?;
            if r == 0 {
                continue;
            }
            let u = net.add_nodes(1);
            let w = net.add_nodes(1);
            let start = net.arcs().len();
            for &a in &clique.members {
                net.add_arc(u, layout.chain_node(a, i), r);
                net.add_arc(layout.chain_node(a, j), w, r);
            }
            net.add_arc(w, u, mul(pairs, r)?);
            layout.gadgets.push(Gadget {
                kind: GadgetKind::Convex { clique: ci, i, j },
                u,
                w,
                arcs: start..net.arcs().len(),
            });
        }
    }
    Ok(())
}

/// Truncation part of clique `ci` with `A = w M` and
/// `B = w M - theta_c(current) / m_c`: arcs `s -> U` (`m_c A`), `U -> V_1^a`
/// (`A`), `V_1^a -> W` (`B`) and `W -> t` (`m_c B`). Its cheapest contribution
/// is `A min(#retained, m_c) + B min(#moved, m_c)`. Also accumulates
/// `kappa_c = w m_c M - theta_c(current)` into the layout constant.
pub fn build_truncation_gadget(
    problem: &IntervalProblem<'_>,
    layout: &mut GraphLayout,
    net: &mut FlowNetwork,
    ci: usize,
) -> Result<(), GraphError> {
    let model = problem.model();
    let clique = &model.cliques()[ci];
    let pairs = model.dist().pairs_for(clique.size()) as u64;
    if pairs == 0 || clique.weight == 0 {
        return Ok(());
    }
    let current = model.clique_energy_of(clique, problem.current());
    let ceiling = mul(mul(clique.weight, pairs)?, model.dist().truncation)?;
    let kappa = ceiling
        .checked_sub(current)
        .ok_or(GraphError::CapacityNegative { clique: ci })?;
    layout.constant = layout
        .constant
        .checked_add(kappa)
        .ok_or(GraphError::Overflow)?;
    let a_cap = mul(mul(layout.scale, clique.weight)?, model.dist().truncation)?;
    if a_cap == 0 {
        return Ok(());
    }
    // scale is a multiple of m_c, so this is exact.
    let b_cap = a_cap - mul(layout.scale / pairs, current)?;
    let u = net.add_nodes(1);
    let w = net.add_nodes(1);
    let start = net.arcs().len();
    net.add_arc(SOURCE, u, mul(pairs, a_cap)?);
    for &a in &clique.members {
        let first = layout.chain_node(a, 1);
        net.add_arc(u, first, a_cap);
        net.add_arc(first, w, b_cap);
    }
    net.add_arc(w, SINK, mul(pairs, b_cap)?);
    layout.gadgets.push(Gadget {
        kind: GadgetKind::Truncation { clique: ci },
        u,
        w,
        arcs: start..net.arcs().len(),
    });
    Ok(())
}

/// Reads the move labeling off a cut: `y_a` is the number of `a`'s chain
/// nodes on the source side, which must form a prefix of the chain.
pub fn labeling_from_cut(
    layout: &GraphLayout,
    cut: &CutResult,
) -> Result<MoveLabeling, GraphError> {
    let mut y = Vec::with_capacity(layout.num_vars);
    for a in 0..layout.num_vars {
        let sides: Vec<bool> = (1..=layout.interval_len)
            .map(|i| cut.is_source_side(layout.chain_node(a, i)))
            .collect();
        // Forward chain arcs s -> V_1 -> ... -> V_h' -> t that leave the
        // source side; a finite cut crosses exactly one of them.
        let mut walk = Vec::with_capacity(sides.len() + 2);
        walk.push(true);
        walk.extend_from_slice(&sides);
        walk.push(false);
        let crossings = walk.windows(2).filter(|w| w[0] && !w[1]).count();
        if crossings != 1 {
            return Err(GraphError::MalformedCut { var: a, crossings });
        }
        y.push(sides.iter().take_while(|&&s| s).count() as u32);
    }
    Ok(MoveLabeling(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Clique, DistanceSpec, Labeling, Model};

    fn model(dist: DistanceSpec, cliques: Vec<Clique>, n: usize, h: usize) -> Model {
        let unary = (0..n * h).map(|v| 1 + (v as u64 * 5) % 9).collect();
        Model::new(n, h, unary, cliques, dist).unwrap()
    }

    #[test]
    fn binary_chain() {
        let m = model(DistanceSpec::linear(2, 1), vec![], 1, 4);
        let current = Labeling(vec![4]);
        let problem = IntervalProblem::new(&m, &current, 2, 2).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let s = graph.layout.scale();
        let arcs = graph.network.arcs();
        assert_eq!(arcs.len(), 2);
        assert_eq!(arcs[0].cap, Capacity::Finite(s * m.unary(0, 4)));
        assert_eq!(arcs[1].cap, Capacity::Finite(s * m.unary(0, 2)));
    }

    #[test]
    fn three_label_chain() {
        let m = model(DistanceSpec::linear(2, 1), vec![], 1, 5);
        let current = Labeling(vec![1]);
        let problem = IntervalProblem::new(&m, &current, 2, 4).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let s = graph.layout.scale();
        let finite: Vec<u64> = graph
            .network
            .arcs()
            .iter()
            .filter_map(|a| match a.cap {
                Capacity::Finite(c) => Some(c / s),
                Capacity::Infinite => None,
            })
            .collect();
        assert_eq!(
            finite,
            vec![m.unary(0, 1), m.unary(0, 2), m.unary(0, 3), m.unary(0, 4)]
        );
        let infinite = graph
            .network
            .arcs()
            .iter()
            .filter(|a| a.cap == Capacity::Infinite)
            .count();
        assert_eq!(infinite, 2);
    }

    #[test]
    fn linear_convex_gadget_is_diagonal() {
        let m = model(
            DistanceSpec::linear(10, 1),
            vec![Clique::new(vec![0, 1, 2], 3)],
            3,
            6,
        );
        let current = Labeling(vec![1, 1, 1]);
        let problem = IntervalProblem::new(&m, &current, 1, 5).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let convex: Vec<_> = graph
            .layout
            .gadgets()
            .iter()
            .filter_map(|g| match g.kind {
                GadgetKind::Convex { i, j, .. } => Some((i, j)),
                _ => None,
            })
            .collect();
        assert_eq!(convex, vec![(2, 2), (3, 3), (4, 4), (5, 5)]);
    }

    #[test]
    fn quadratic_convex_gadget_is_full() {
        let m = model(
            DistanceSpec::quadratic(10, 1),
            vec![Clique::new(vec![0, 1], 2)],
            2,
            4,
        );
        let current = Labeling(vec![1, 1]);
        let problem = IntervalProblem::new(&m, &current, 1, 4).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let s = graph.layout.scale();
        for g in graph.layout.gadgets() {
            if let GadgetKind::Convex { i, j, .. } = g.kind {
                let r = match graph.network.arcs()[g.arcs.start].cap {
                    Capacity::Finite(c) => c,
                    Capacity::Infinite => unreachable!(),
                };
                let expected = if i == j { 2 } else { 4 };
                assert_eq!(r, s * expected, "pair ({i}, {j})");
            }
        }
    }

    #[test]
    fn truncation_gadget_constant_clique() {
        let m = model(
            DistanceSpec::linear(3, 1),
            vec![Clique::new(vec![0, 1], 2)],
            2,
            5,
        );
        let current = Labeling(vec![4, 4]);
        let problem = IntervalProblem::new(&m, &current, 1, 2).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let s = graph.layout.scale();
        let g = graph
            .layout
            .gadgets()
            .iter()
            .find(|g| matches!(g.kind, GadgetKind::Truncation { .. }))
            .unwrap();
        let caps: Vec<u64> = graph.network.arcs()[g.arcs.clone()]
            .iter()
            .map(|a| match a.cap {
                Capacity::Finite(c) => c / s,
                Capacity::Infinite => unreachable!(),
            })
            .collect();
        // s->U, (U->V, V->W) per member, W->t
        assert_eq!(caps, vec![6, 6, 6, 6, 6, 6]);
        assert_eq!(graph.layout.constant(), 6);
    }

    #[test]
    fn all_retained_cut_is_current_energy_plus_constant() {
        let m = model(
            DistanceSpec::linear(3, 2),
            vec![Clique::new(vec![0, 1, 2, 3], 2)],
            4,
            6,
        );
        let current = Labeling(vec![1, 6, 2, 4]);
        let problem = IntervalProblem::new(&m, &current, 2, 4).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let cost = graph
            .canonical_cut_cost(&MoveLabeling::retain_all(4))
            .unwrap();
        assert_eq!(
            cost,
            graph.layout.scale() * (m.energy(&current) + graph.layout.constant())
        );
    }

    #[test]
    fn node_count_formula() {
        let m = model(
            DistanceSpec::quadratic(5, 1),
            vec![Clique::new(vec![0, 1, 2], 1), Clique::new(vec![1, 2], 4)],
            3,
            6,
        );
        let current = Labeling(vec![1, 2, 3]);
        let problem = IntervalProblem::new(&m, &current, 2, 5).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let len = 4;
        // pairs 2 <= i <= j <= 4, all with positive r for a quadratic
        let pairs = 6;
        assert_eq!(graph.network.num_nodes(), 2 + 3 * len + 2 * (2 * pairs + 2));
    }

    #[test]
    fn malformed_cut_is_rejected() {
        let m = model(DistanceSpec::linear(2, 1), vec![], 1, 4);
        let current = Labeling(vec![1]);
        let problem = IntervalProblem::new(&m, &current, 1, 3).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let mut side = vec![false; graph.network.num_nodes()];
        side[SOURCE] = true;
        side[graph.layout.chain_node(0, 2)] = true;
        let cut = CutResult {
            value: 0,
            source_side: side,
        };
        assert!(matches!(
            labeling_from_cut(&graph.layout, &cut),
            Err(GraphError::MalformedCut { var: 0, .. })
        ));
    }

    #[test]
    fn cut_prefix_decodes() {
        let m = model(DistanceSpec::linear(2, 1), vec![], 2, 4);
        let current = Labeling(vec![1, 1]);
        let problem = IntervalProblem::new(&m, &current, 1, 3).unwrap();
        let graph = MoveGraph::build(&problem).unwrap();
        let y = MoveLabeling(vec![1, 0]);
        let cut = CutResult {
            value: 0,
            source_side: graph.layout.chain_sides(graph.network.num_nodes(), &y),
        };
        assert_eq!(labeling_from_cut(&graph.layout, &cut).unwrap(), y);
    }
}
