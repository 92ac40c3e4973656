use cannings::ancestral::transition_matrix;
use cannings::laws::{check_consistency, check_natural_coupling};
use cannings::partition::{partition_count, partition_count_series};
use cannings::tensor::SlotSymmetry;
use cannings::{CanningsModel, LabeledPartition, MergeTensor};
use proptest::prelude::*;

/// Labeled partition from a restricted-growth string and block labels.
fn build(n: usize, d: usize, raw: &[usize], labels: &[usize]) -> LabeledPartition {
    let mut rgs = Vec::with_capacity(n);
    let mut next = 0;
    for &r in raw.iter().take(n) {
        let b = r % (next + 1);
        if b == next {
            next += 1;
        }
        rgs.push(b);
    }
    let blocks = (0..next)
        .map(|b| ((0..n).filter(|&e| rgs[e] == b).collect(), labels[b] % d))
        .collect();
    LabeledPartition::new(n, d, blocks).unwrap()
}

fn partition() -> impl Strategy<Value = LabeledPartition> {
    (1usize..=6, 1usize..=3).prop_flat_map(|(n, d)| {
        (prop::collection::vec(0usize..8, n), prop::collection::vec(0usize..8, n))
            .prop_map(move |(raw, labels)| build(n, d, &raw, &labels))
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

/// Merges the blocks of `pi` along a random set partition of its blocks and
/// relabels the merged blocks.
fn coarsen(pi: &LabeledPartition, raw: &[usize], labels: &[usize]) -> LabeledPartition {
    let groups = build(pi.num_blocks(), pi.d(), raw, labels);
    let blocks = groups
        .blocks()
        .iter()
        .map(|g| {
            let elems = g.elements().iter().flat_map(|&b| pi.blocks()[b].elements().to_vec()).collect();
            (elems, g.label())
        })
        .collect();
    LabeledPartition::new(pi.n(), pi.d(), blocks).unwrap()
}

/// Wright-Fisher counts: each column `l` splits `N_l` over the parent types.
fn wf_model() -> impl Strategy<Value = CanningsModel> {
    (1usize..=3)
        .prop_flat_map(|d| (prop::collection::vec(3usize..=5, d), prop::collection::vec(0usize..100, d * d)))
        .prop_filter_map("parents of every type", |(sizes, raw)| {
            let d = sizes.len();
            let mut counts = vec![vec![0; d]; d];
            for l in 0..d {
                let weights: Vec<usize> = (0..d).map(|k| raw[k * d + l] + 1).collect();
                let total: usize = weights.iter().sum();
                let mut left = sizes[l];
                for k in 0..d {
                    let share = if k + 1 == d { left } else { (sizes[l] * weights[k] / total).min(left) };
                    counts[k][l] = share;
                    left -= share;
                }
            }
            CanningsModel::wright_fisher(sizes, counts).ok()
        })
}

/// Mutation counts from a random matching of individuals to mutant types, so
/// that rows and columns both sum to `N`.
fn mutation_model() -> impl Strategy<Value = CanningsModel> {
    (1usize..=3)
        .prop_flat_map(|d| prop::collection::vec(1usize..=4, d))
        .prop_filter("room for three samples", |s| s.iter().sum::<usize>() >= 3)
        .prop_flat_map(|sizes| {
            let total: usize = sizes.iter().sum();
            (Just(sizes), Just((0..total).collect::<Vec<_>>()).prop_shuffle())
        })
        .prop_map(|(sizes, sigma)| {
            let d = sizes.len();
            let type_of: Vec<usize> = sizes.iter().enumerate().flat_map(|(k, &n)| std::iter::repeat_n(k, n)).collect();
            let mut counts = vec![vec![0; d]; d];
            for (i, &s) in sigma.iter().enumerate() {
                counts[type_of[i]][type_of[s]] += 1;
            }
            CanningsModel::mutation(sizes, counts).unwrap()
        })
}

proptest! {
    #[test]
    fn restriction_composes(pi in partition(), a in 0usize..6, b in 0usize..6) {
        let m = 1 + a % pi.n();
        let m2 = 1 + b % m;
        prop_assert_eq!(pi.restrict(m).unwrap().restrict(m2).unwrap(), pi.restrict(m2).unwrap());
        prop_assert_eq!(pi.restrict(pi.n()).unwrap(), pi.clone());
    }

    #[test]
    fn permutations_compose(
        (pi, s, t) in partition().prop_flat_map(|pi| {
            let n = pi.n();
            (Just(pi), permutation(n), permutation(n))
        })
    ) {
        let ts: Vec<usize> = s.iter().map(|&e| t[e]).collect();
        let lhs = pi.apply_permutation(&s).unwrap().apply_permutation(&t).unwrap();
        prop_assert_eq!(lhs, pi.apply_permutation(&ts).unwrap());
        let mut inv = vec![0; s.len()];
        for (e, &img) in s.iter().enumerate() {
            inv[img] = e;
        }
        prop_assert_eq!(pi.apply_permutation(&s).unwrap().apply_permutation(&inv).unwrap(), pi.clone());
        prop_assert_eq!(pi.apply_permutation(&s).unwrap().block_counts(), pi.block_counts());
    }

    #[test]
    fn text_form_round_trips(pi in partition()) {
        let text = pi.to_string();
        prop_assert_eq!(LabeledPartition::parse(&text, pi.d()).unwrap(), pi.clone());
        // block order in the input does not matter
        let reversed: Vec<(Vec<usize>, usize)> =
            pi.blocks().iter().rev().map(|b| (b.elements().to_vec(), b.label())).collect();
        prop_assert_eq!(LabeledPartition::new(pi.n(), pi.d(), reversed).unwrap(), pi);
    }

    #[test]
    fn merge_structure_margins(
        (pi, raw, labels) in partition().prop_flat_map(|pi| {
            let k = pi.num_blocks();
            (Just(pi), prop::collection::vec(0usize..8, k), prop::collection::vec(0usize..8, k))
        })
    ) {
        let coarse = coarsen(&pi, &raw, &labels);
        let t = pi.merge_structure(&coarse).unwrap().expect("coarsening is finer");
        prop_assert_eq!(t.total(), pi.num_blocks());
        prop_assert_eq!(t.lineage_counts(), pi.block_counts());
        prop_assert_eq!(t.j().to_vec(), coarse.block_counts());
        prop_assert!(!t.has_empty_slot());
        if coarse.num_blocks() < pi.num_blocks() {
            prop_assert!(coarse.merge_structure(&pi).unwrap().is_none());
        }
    }

    #[test]
    fn tensor_extensions(
        (pi, raw, labels, k, l) in partition().prop_flat_map(|pi| {
            let b = pi.num_blocks();
            let d = pi.d();
            (Just(pi), prop::collection::vec(0usize..8, b), prop::collection::vec(0usize..8, b), 0..d, 0..d)
        })
    ) {
        let t = pi.merge_structure(&coarsen(&pi, &raw, &labels)).unwrap().unwrap();
        let ext = t.coalescence_extension(k, l).unwrap();
        prop_assert_eq!(ext.j()[k], t.j()[k] + 1);
        prop_assert_eq!(ext.total(), t.total() + 1);
        prop_assert_eq!(ext.lineage_count(l), t.lineage_count(l) + 1);
        prop_assert!(t.tensor_leq(&ext).unwrap());
        for s in 0..t.j()[k] {
            let inc = t.increment(k, l, s).unwrap();
            prop_assert_eq!(inc.j(), t.j());
            prop_assert_eq!(inc.slot_total(k, s), t.slot_total(k, s) + 1);
            prop_assert!(t.tensor_leq(&inc).unwrap());
        }
        for sym in [SlotSymmetry::PerEntry, SlotSymmetry::PerRow] {
            let c = t.canonical(sym);
            prop_assert_eq!(c.canonical(sym), c.clone());
            prop_assert!(t.equivalent(&c, sym));
        }
        prop_assert_eq!(MergeTensor::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn dobinski_series(n in 1usize..=12, d in 1usize..=4) {
        let exact = partition_count(n, d) as f64;
        prop_assert!((partition_count_series(n, d) - exact).abs() <= 1e-9 * exact);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wright_fisher_laws(m in wf_model()) {
        for n in 1..=3 {
            prop_assert!(transition_matrix(&m, n).unwrap().is_stochastic());
        }
        let r = check_consistency(&m, 3).unwrap();
        prop_assert!(r.passed(), "{}", r);
    }

    #[test]
    fn mutation_laws(m in mutation_model()) {
        for n in 1..=3 {
            prop_assert!(transition_matrix(&m, n).unwrap().is_stochastic());
        }
        let r = check_consistency(&m, 3).unwrap();
        prop_assert!(r.passed(), "{}", r);
    }

    /// Restriction n -> m -> m' agrees with n -> m' because every step is an
    /// exact lumping.
    #[test]
    fn coupling_composes(m in wf_model()) {
        for (n, k) in [(3, 2), (2, 1), (3, 1)] {
            let r = check_natural_coupling(&m, n, k).unwrap();
            prop_assert!(r.passed(), "{}", r);
        }
    }
}
