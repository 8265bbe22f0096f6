//! Seeded random generators for trees, processes, forests and
//! normal-form grammars; used by the self-check suites and tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::compress::{compress, CompressorChoice};
use crate::entropy::{Distribution, ProcessRow, TreeProcess};
use crate::trees::{Alphabet, Label, LabelDegree, Tree};
use crate::tslp::NormalTslp;
use crate::unranked::{UnrankedForest, UnrankedTree};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random full binary tree with exactly `leaves` leaves over labels
/// 0..sigma.
pub fn random_tree(rng: &mut ChaCha8Rng, leaves: u64, sigma: usize) -> Tree {
    assert!(leaves >= 1 && sigma >= 1);
    if leaves == 1 {
        return Tree::Leaf(rng.gen_range(0..sigma));
    }
    let left = rng.gen_range(1..leaves);
    let l = random_tree(rng, left, sigma);
    let r = random_tree(rng, leaves - left, sigma);
    Tree::node(rng.gen_range(0..sigma), l, r)
}

fn random_distribution(rng: &mut ChaCha8Rng, sigma: usize) -> Distribution<LabelDegree> {
    // full support over all (label, degree) pairs
    let mut items: Vec<(LabelDegree, f64)> = Vec::with_capacity(2 * sigma);
    let mut total = 0.0;
    for a in 0..sigma {
        for d in [0u8, 2u8] {
            let w: f64 = rng.gen_range(0.05..1.0);
            items.push(((a, d), w));
            total += w;
        }
    }
    for item in &mut items {
        item.1 /= total;
    }
    Distribution::new(items).expect("weights normalized")
}

/// Random k-th order process with full support on every history.
pub fn random_process(rng: &mut ChaCha8Rng, k: usize, alphabet: &Alphabet) -> TreeProcess {
    let rows = crate::entropy::all_k_histories(k, alphabet)
        .into_iter()
        .map(|z| (z, ProcessRow::Dist(random_distribution(rng, alphabet.size()))))
        .collect();
    TreeProcess { k, box_label: alphabet.box_label(), rows }
}

/// Random unranked tree with exactly `nodes` labelled nodes.
pub fn random_unranked(rng: &mut ChaCha8Rng, nodes: u64, sigma: usize) -> UnrankedTree {
    assert!(nodes >= 1);
    let label: Label = rng.gen_range(0..sigma);
    let mut remaining = nodes - 1;
    let mut children = Vec::new();
    while remaining > 0 {
        let take = rng.gen_range(1..=remaining);
        children.push(random_unranked(rng, take, sigma));
        remaining -= take;
    }
    UnrankedTree::new(label, children)
}

/// Random forest with `nodes` labelled nodes in total.
pub fn random_forest(rng: &mut ChaCha8Rng, nodes: u64, sigma: usize) -> UnrankedForest {
    let mut forest = Vec::new();
    let mut remaining = nodes;
    while remaining > 0 {
        let take = rng.gen_range(1..=remaining);
        forest.push(random_unranked(rng, take, sigma));
        remaining -= take;
    }
    forest
}

/// Random normal-form grammar, obtained by compressing a random tree.
pub fn random_normal_grammar(
    rng: &mut ChaCha8Rng,
    max_leaves: u64,
    sigma: usize,
) -> NormalTslp {
    let leaves = rng.gen_range(1..=max_leaves);
    let t = random_tree(rng, leaves, sigma);
    let choice = if rng.gen_bool(0.5) {
        CompressorChoice::Dag
    } else {
        CompressorChoice::Digram
    };
    compress(&t, choice).expect("compression of a generated tree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unranked::forest_size;

    #[test]
    fn generators_are_deterministic() {
        let t1 = random_tree(&mut rng_from_seed(7), 50, 3);
        let t2 = random_tree(&mut rng_from_seed(7), 50, 3);
        assert_eq!(t1, t2);
        assert_eq!(t1.size(), 50);
    }

    #[test]
    fn random_process_has_full_support() {
        let al = Alphabet::from_labels(vec!["a".into(), "b".into()]).unwrap();
        let p = random_process(&mut rng_from_seed(1), 2, &al);
        assert_eq!(p.rows.len(), 16);
        for z in crate::entropy::all_k_histories(2, &al) {
            let d = p.row(&z).unwrap();
            for (_, prob) in d.items() {
                assert!(*prob > 0.0);
            }
        }
    }

    #[test]
    fn random_forest_sizes() {
        for seed in 0..20 {
            let f = random_forest(&mut rng_from_seed(seed), 30, 4);
            assert_eq!(forest_size(&f), 30);
        }
    }

    #[test]
    fn random_grammars_are_normal() {
        let mut rng = rng_from_seed(42);
        for _ in 0..50 {
            let g = random_normal_grammar(&mut rng, 40, 4);
            assert!(g.is_normal_form(), "{:?}", g.normal_form_violations());
        }
    }
}
