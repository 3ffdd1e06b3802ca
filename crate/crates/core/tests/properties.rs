use proptest::prelude::*;
use tmcm::oracle::{
    brute_force_min_overestimate, reference_energy, reference_move_energy, DEFAULT_BUDGET,
};
use tmcm::synthetic::{instance_rng, TinyFamily};
use tmcm::{
    clique_potential, expand, Clique, DistanceKind, DistanceSpec, Energy, IntervalProblem, Label,
    Labeling, Model, MoveLabeling,
};

fn dist_kind() -> impl Strategy<Value = DistanceKind> {
    prop_oneof![Just(DistanceKind::Linear), Just(DistanceKind::Quadratic)]
}

fn clique_labels() -> impl Strategy<Value = Vec<Label>> {
    prop::collection::vec(1u32..=9, 2..=9)
}

proptest! {
    #[test]
    fn potential_ignores_member_order(mut labels in clique_labels(), kind in dist_kind(), m in 1usize..=4, trunc in 0u64..=20, w in 0u64..=5) {
        let dist = DistanceSpec::new(kind, trunc, m);
        let before = clique_potential(&labels, &dist, w);
        labels.reverse();
        prop_assert_eq!(before, clique_potential(&labels, &dist, w));
        labels.sort_unstable();
        prop_assert_eq!(before, clique_potential(&labels, &dist, w));
    }

    #[test]
    fn potential_is_capped_by_truncation(labels in clique_labels(), kind in dist_kind(), m in 1usize..=4, trunc in 0u64..=20, w in 0u64..=5) {
        let dist = DistanceSpec::new(kind, trunc, m);
        let pairs = dist.pairs_for(labels.len()) as Energy;
        prop_assert!(clique_potential(&labels, &dist, w) <= w * pairs * trunc);
    }

    #[test]
    fn potential_grows_with_pair_count(labels in clique_labels(), kind in dist_kind(), m in 1usize..=3, trunc in 0u64..=20) {
        let fewer = clique_potential(&labels, &DistanceSpec::new(kind.clone(), trunc, m), 1);
        let more = clique_potential(&labels, &DistanceSpec::new(kind, trunc, m + 1), 1);
        prop_assert!(fewer <= more);
    }

    #[test]
    fn single_pair_is_truncated_spread(labels in clique_labels(), kind in dist_kind(), trunc in 0u64..=20) {
        let dist = DistanceSpec::new(kind, trunc, 1);
        let lo = *labels.iter().min().unwrap() as i64;
        let hi = *labels.iter().max().unwrap() as i64;
        prop_assert_eq!(clique_potential(&labels, &dist, 3), 3 * dist.truncated(hi - lo));
    }

    #[test]
    fn pairwise_clique_is_truncated_convex(a in 1u32..=9, b in 1u32..=9, kind in dist_kind(), trunc in 0u64..=20) {
        let dist = DistanceSpec::new(kind, trunc, 3);
        prop_assert_eq!(clique_potential(&[a, b], &dist, 2), 2 * dist.truncated(a as i64 - b as i64));
    }

    #[test]
    fn energy_matches_reference(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 0);
        let model = TinyFamily { dist: DistanceKind::Quadratic, ..TinyFamily::default() }.sample(&mut rng);
        let x = Labeling((0..model.num_vars()).map(|a| (seed as usize + a) as Label % model.num_labels() as Label + 1).collect());
        prop_assert_eq!(model.energy(&x), reference_energy(&model, &x));
    }

    #[test]
    fn move_energy_overestimates_and_anchors(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 1);
        let model = TinyFamily { max_pairs: 1, ..TinyFamily::default() }.sample(&mut rng);
        let h = model.num_labels() as Label;
        let n = model.num_vars();
        let current = Labeling((0..n).map(|a| (seed >> (a % 32)) as Label % h + 1).collect());
        let first = (seed % h as u64) as Label + 1;
        let last = first + ((seed >> 8) % (h - first + 1) as u64) as Label;
        let problem = IntervalProblem::new(&model, &current, first, last).unwrap();
        let retain = MoveLabeling::retain_all(n);
        prop_assert_eq!(problem.energy(&retain), model.energy(&current));
        let len = problem.len() as u64 + 1;
        for k in 0..len.pow(n as u32).min(2000) {
            let y = MoveLabeling((0..n).map(|a| (k / len.pow(a as u32) % len) as u32).collect());
            let e = problem.energy(&y);
            prop_assert_eq!(e, reference_move_energy(&problem, &y));
            prop_assert!(e >= model.energy(&problem.map_to_full(&y)));
        }
    }

    #[test]
    fn min_cut_is_deterministic(seed in any::<u64>()) {
        let mut rng = instance_rng(seed, 2);
        let model = TinyFamily::default().sample(&mut rng);
        let current = Labeling::constant(model.num_vars(), 1);
        let problem = IntervalProblem::new(&model, &current, 1, model.num_labels() as Label).unwrap();
        let a = expand(&problem).unwrap();
        let b = expand(&problem).unwrap();
        prop_assert_eq!(a.moves, b.moves);
        prop_assert_eq!(a.cut_scaled, b.cut_scaled);
    }
}

/// Brute-force robust-P^n style count: with linear distance and unit
/// truncation each charged pair costs one unless its two labels agree.
fn robust_count(labels: &[Label], m: usize) -> Energy {
    let mut p = labels.to_vec();
    p.sort_unstable();
    let pairs = m.min(p.len() / 2);
    (0..pairs).filter(|&i| p[p.len() - 1 - i] != p[i]).count() as Energy
}

#[test]
fn unit_truncation_counts_disagreeing_pairs() {
    for c in 2..=4usize {
        for h in 1..=4u32 {
            for m in 1..=2usize {
                let dist = DistanceSpec::linear(1, m);
                for code in 0..h.pow(c as u32) {
                    let labels: Vec<Label> =
                        (0..c).map(|i| code / h.pow(i as u32) % h + 1).collect();
                    assert_eq!(
                        clique_potential(&labels, &dist, 1),
                        robust_count(&labels, m),
                        "{labels:?} m={m}"
                    );
                }
            }
        }
    }
}

#[test]
fn expand_is_optimal_on_the_move_energy_for_single_pairs() {
    let family = TinyFamily {
        max_pairs: 1,
        max_vars: 5,
        ..TinyFamily::default()
    };
    for seed in 0..150 {
        let mut rng = instance_rng(seed, 3);
        let model = family.sample(&mut rng);
        let h = model.num_labels() as Label;
        let current = Labeling(
            (0..model.num_vars())
                .map(|a| (a as Label + seed as Label) % h + 1)
                .collect(),
        );
        for first in 1..=h {
            for last in first..=h.min(first + 2) {
                let problem = IntervalProblem::new(&model, &current, first, last).unwrap();
                let step = expand(&problem).unwrap();
                let (_, best) = brute_force_min_overestimate(&problem, DEFAULT_BUDGET).unwrap();
                assert_eq!(
                    problem.energy(&step.moves),
                    best,
                    "seed {seed} [{first}, {last}]"
                );
                assert_eq!(step.cut_scaled, step.scale * (best + step.constant));
            }
        }
    }
}

#[test]
fn zero_weight_cliques_reduce_to_unary_argmin() {
    let unary: Vec<Energy> = vec![5, 1, 7, 2, 8, 0, 3, 3, 1];
    let model = Model::new(
        3,
        3,
        unary,
        vec![Clique::new(vec![0, 1, 2], 0)],
        DistanceSpec::linear(2, 1),
    )
    .unwrap();
    let (x, _) = tmcm::run(&model, &tmcm::SolverConfig::default()).unwrap();
    assert_eq!(model.energy(&x), model.energy(&model.unary_argmin()));
}

#[test]
fn two_pair_move_energy_can_undercut_true_energy() {
    // Retained members sort ahead of moved ones, so with two charged pairs the
    // inner pair can join two retained labels that are not extreme.
    let model = Model::new(
        4,
        4,
        vec![0; 16],
        vec![Clique::new(vec![0, 1, 2, 3], 1)],
        DistanceSpec::linear(3, 2),
    )
    .unwrap();
    let current = Labeling(vec![3, 4, 4, 2]);
    let problem = IntervalProblem::new(&model, &current, 1, 1).unwrap();
    let y = MoveLabeling(vec![1, 0, 0, 0]);
    assert_eq!(problem.energy(&y), 3);
    assert_eq!(model.energy(&problem.map_to_full(&y)), 5);
}
