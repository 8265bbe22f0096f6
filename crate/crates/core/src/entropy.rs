//! Shannon entropy, empirical distributions, k-th order tree processes
//! and the k-th order empirical tree entropy H_k(t).

use std::collections::HashMap;
use std::hash::Hash;

use thiserror::Error;

use crate::trees::{
    k_history, label_degree, node_set, Alphabet, KHistory, Label, LabelDegree, Tree,
    TreeOrContext,
};

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("probabilities must be nonnegative and sum to 1 (got {0})")]
    NotADistribution(f64),
    #[error("KL divergence undefined: q is zero on the support of p")]
    AbsoluteContinuity,
}

const DIST_TOL: f64 = 1e-9;

/// Finite probability distribution over outcomes of type `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    items: Vec<(T, f64)>,
}

impl<T: Clone + Eq + Hash> Distribution<T> {
    pub fn new(items: Vec<(T, f64)>) -> Result<Self, EntropyError> {
        let mut sum = KahanSum::new();
        for (_, p) in &items {
            if *p < 0.0 || !p.is_finite() {
                return Err(EntropyError::NotADistribution(*p));
            }
            sum.add(*p);
        }
        if (sum.value() - 1.0).abs() > DIST_TOL {
            return Err(EntropyError::NotADistribution(sum.value()));
        }
        Ok(Distribution { items })
    }

    pub fn uniform(outcomes: Vec<T>) -> Self {
        let p = 1.0 / outcomes.len() as f64;
        Distribution { items: outcomes.into_iter().map(|o| (o, p)).collect() }
    }

    pub fn point_mass(outcome: T) -> Self {
        Distribution { items: vec![(outcome, 1.0)] }
    }

    /// Empirical distribution of a tuple of outcomes.
    pub fn empirical(tuple: &[T]) -> Self {
        let mut counts: HashMap<&T, u64> = HashMap::new();
        for a in tuple {
            *counts.entry(a).or_insert(0) += 1;
        }
        let n = tuple.len() as f64;
        let mut items: Vec<(T, f64)> = counts
            .into_iter()
            .map(|(a, c)| (a.clone(), c as f64 / n))
            .collect();
        // fix an order for reproducible iteration; outcomes are hashable
        // but not necessarily ordered, so sort by first appearance
        let pos: HashMap<&T, usize> = {
            let mut m = HashMap::new();
            for (i, a) in tuple.iter().enumerate() {
                m.entry(a).or_insert(i);
            }
            m
        };
        items.sort_by_key(|(a, _)| pos[a]);
        Distribution { items }
    }

    pub fn items(&self) -> &[(T, f64)] {
        &self.items
    }

    pub fn prob(&self, outcome: &T) -> f64 {
        self.items
            .iter()
            .find(|(a, _)| a == outcome)
            .map(|(_, p)| *p)
            .unwrap_or(0.0)
    }
}

/// Compensated (Kahan) accumulator for entropy sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Shannon entropy in bits, with the convention 0·log 0 = 0.
pub fn shannon_entropy<T: Clone + Eq + Hash>(p: &Distribution<T>) -> f64 {
    let mut acc = KahanSum::new();
    for (_, pr) in p.items() {
        if *pr > 0.0 {
            acc.add(-pr * pr.log2());
        }
    }
    acc.value()
}

/// Kullback-Leibler divergence D(p || q) in bits.
pub fn kl_divergence<T: Clone + Eq + Hash>(
    p: &Distribution<T>,
    q: &Distribution<T>,
) -> Result<f64, EntropyError> {
    let mut acc = KahanSum::new();
    for (a, pa) in p.items() {
        if *pa > 0.0 {
            let qa = q.prob(a);
            if qa <= 0.0 {
                return Err(EntropyError::AbsoluteContinuity);
            }
            acc.add(pa * (pa / qa).log2());
        }
    }
    Ok(acc.value())
}

/// Unnormalized empirical entropy n·H(p_ā) = −Σᵢ log₂ p_ā(aᵢ);
/// the empty tuple has entropy 0.
pub fn unnormalized_empirical_entropy<T: Clone + Eq + Hash>(tuple: &[T]) -> f64 {
    if tuple.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&T, u64> = HashMap::new();
    for a in tuple {
        *counts.entry(a).or_insert(0) += 1;
    }
    let n = tuple.len() as f64;
    let mut acc = KahanSum::new();
    for (_, c) in counts {
        let p = c as f64 / n;
        acc.add(-(c as f64) * p.log2());
    }
    acc.value()
}

/// Per-history node census of a tree: m_z and the per-(label, degree)
/// counts m_{z,ã}.
#[derive(Debug, Clone, Default)]
pub struct HistogramByHistory {
    pub rows: HashMap<KHistory, HistoryRow>,
}

#[derive(Debug, Clone, Default)]
pub struct HistoryRow {
    pub total: u64,
    pub counts: HashMap<LabelDegree, u64>,
}

/// Exact per-history counts for all nodes of `t`.
pub fn history_histogram(t: &Tree, k: usize, box_label: Label) -> HistogramByHistory {
    let mut rows: HashMap<KHistory, HistoryRow> = HashMap::new();
    let mut stack: Vec<(&Tree, KHistory)> = Vec::new();
    let root_hist = KHistory(vec![(box_label, 0); k]);
    stack.push((t, root_hist));
    while let Some((node, hist)) = stack.pop() {
        let ld: LabelDegree = match node {
            Tree::Leaf(a) => (*a, 0),
            Tree::Node(a, _, _) => (*a, 2),
        };
        let row = rows.entry(hist.clone()).or_default();
        row.total += 1;
        *row.counts.entry(ld).or_insert(0) += 1;
        if let Tree::Node(a, l, r) = node {
            for (child, dir) in [(l, 0u8), (r, 1u8)] {
                let mut h = hist.0.clone();
                if k > 0 {
                    h.remove(0);
                    h.push((*a, dir));
                }
                stack.push((child, KHistory(h)));
            }
        }
    }
    HistogramByHistory { rows }
}

/// Row of a k-th order tree process: either a concrete distribution or
/// an unconstrained placeholder for a history the source tree never saw.
#[derive(Debug, Clone, PartialEq)]
pub enum ProcessRow {
    Dist(Distribution<LabelDegree>),
    Arbitrary,
}

/// k-th order tree process: distributions on (label, degree) indexed by
/// k-history.
#[derive(Debug, Clone)]
pub struct TreeProcess {
    pub k: usize,
    pub box_label: Label,
    pub rows: HashMap<KHistory, ProcessRow>,
}

impl TreeProcess {
    pub fn row(&self, z: &KHistory) -> Option<&Distribution<LabelDegree>> {
        match self.rows.get(z) {
            Some(ProcessRow::Dist(d)) => Some(d),
            _ => None,
        }
    }

    /// Probability the process assigns to the pair at history `z`;
    /// unseen / arbitrary rows count as probability 0.
    pub fn prob_at(&self, z: &KHistory, ld: &LabelDegree) -> f64 {
        self.row(z).map(|d| d.prob(ld)).unwrap_or(0.0)
    }
}

/// Empirical k-th order tree process P^t of `t`.
pub fn empirical_tree_process(t: &Tree, k: usize, box_label: Label) -> TreeProcess {
    let hist = history_histogram(t, k, box_label);
    let mut rows = HashMap::new();
    for (z, row) in hist.rows {
        let items: Vec<(LabelDegree, f64)> = {
            let mut v: Vec<_> = row.counts.iter().collect();
            v.sort();
            v.into_iter()
                .map(|(ld, c)| (*ld, *c as f64 / row.total as f64))
                .collect()
        };
        rows.insert(z, ProcessRow::Dist(Distribution { items }));
    }
    TreeProcess { k, box_label, rows }
}

/// The k-th order empirical tree entropy H_k(t) = Σ_z m_z · H(P^t_z).
pub fn tree_entropy(t: &Tree, k: usize, box_label: Label) -> f64 {
    let hist = history_histogram(t, k, box_label);
    let mut acc = KahanSum::new();
    for row in hist.rows.values() {
        let m = row.total as f64;
        for c in row.counts.values() {
            let p = *c as f64 / m;
            acc.add(-(*c as f64) * p.log2());
        }
    }
    acc.value()
}

/// −log₂ Prob_P(s), summed term by term. Returns +∞ if any factor is 0.
pub fn information_content(process: &TreeProcess, s: &TreeOrContext) -> f64 {
    let mut acc = KahanSum::new();
    for v in node_set(s) {
        let ld = label_degree(s, &v).expect("address from node_set");
        let z = k_history(s, &v, process.k, process.box_label).expect("address from node_set");
        let p = process.prob_at(&z, &ld);
        if p <= 0.0 {
            return f64::INFINITY;
        }
        acc.add(-p.log2());
    }
    acc.value()
}

/// Prob_P(s) as an actual product; fine at oracle scale where the
/// product does not underflow.
pub fn process_probability(process: &TreeProcess, s: &TreeOrContext) -> f64 {
    let mut prob = 1.0;
    for v in node_set(s) {
        let ld = label_degree(s, &v).expect("address from node_set");
        let z = k_history(s, &v, process.k, process.box_label).expect("address from node_set");
        prob *= process.prob_at(&z, &ld);
    }
    prob
}

/// All k-histories over the alphabet (σ·2)^k of them.
pub fn all_k_histories(k: usize, alphabet: &Alphabet) -> Vec<KHistory> {
    let mut out = vec![KHistory(Vec::new())];
    for _ in 0..k {
        let mut next = Vec::new();
        for h in &out {
            for a in 0..alphabet.size() {
                for dir in [0u8, 1u8] {
                    let mut pairs = h.0.clone();
                    pairs.push((a, dir));
                    next.push(KHistory(pairs));
                }
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_tree;

    fn fig1() -> (Tree, Alphabet) {
        parse_tree("a(b(b(a,b),a),a(b,a))").unwrap()
    }

    #[test]
    fn shannon_basics() {
        let u: Distribution<u8> = Distribution::uniform(vec![0, 1]);
        assert!((shannon_entropy(&u) - 1.0).abs() < 1e-12);
        let pm: Distribution<u8> = Distribution::point_mass(0);
        assert_eq!(shannon_entropy(&pm), 0.0);
        // (2/3, 1/3): closed form (2/3)log2(3/2) + (1/3)log2(3)
        let p = Distribution::new(vec![(0u8, 2.0 / 3.0), (1u8, 1.0 / 3.0)]).unwrap();
        let expect = (2.0 / 3.0) * (1.5f64).log2() + (1.0 / 3.0) * 3f64.log2();
        assert!((shannon_entropy(&p) - expect).abs() < 1e-12);
        assert!((shannon_entropy(&p) - 0.9182958340544896).abs() < 1e-12);
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![(0u8, 0.5), (1, 0.6)]).is_err());
        assert!(Distribution::new(vec![(0u8, -0.1), (1, 1.1)]).is_err());
    }

    #[test]
    fn kl_basics() {
        let p = Distribution::new(vec![(0u8, 0.5), (1, 0.5)]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let point = Distribution::new(vec![(0u8, 1.0), (1, 0.0)]).unwrap();
        let half = Distribution::new(vec![(0u8, 0.5), (1, 0.5)]).unwrap();
        assert!((kl_divergence(&point, &half).unwrap() - 1.0).abs() < 1e-12);
        assert!(kl_divergence(&half, &point).is_err());
    }

    #[test]
    fn unnormalized_entropy_examples() {
        // "aab" -> 3·H(2/3,1/3)
        let h = unnormalized_empirical_entropy(&[b'a', b'a', b'b']);
        let expect = 3.0 * ((2.0 / 3.0) * (1.5f64).log2() + (1.0 / 3.0) * 3f64.log2());
        assert!((h - expect).abs() < 1e-12);
        assert!((h - 2.754887502163468).abs() < 1e-9);
        assert_eq!(unnormalized_empirical_entropy(&[b'a'; 4]), 0.0);
        assert_eq!(unnormalized_empirical_entropy::<u8>(&[]), 0.0);
        // omega of the worked grammar: 6 symbols with counts 2,2,1,1
        let omega = [0u8, 1, 2, 3, 3, 0]; // a A3 A4 b b a
        let direct = -(2.0 * (2.0f64 / 6.0).log2()
            + 2.0 * (2.0f64 / 6.0).log2()
            + (1.0f64 / 6.0).log2()
            + (1.0f64 / 6.0).log2());
        let h = unnormalized_empirical_entropy(&omega);
        assert!((h - direct).abs() < 1e-12);
        assert!((h - 11.509775004326936).abs() < 1e-9);
    }

    #[test]
    fn histogram_fig1() {
        let (t, al) = fig1();
        let a = al.index_of("a").unwrap();
        let b = al.index_of("b").unwrap();
        let hist = history_histogram(&t, 1, a);
        let m = |z: KHistory| hist.rows.get(&z).map(|r| r.total).unwrap_or(0);
        assert_eq!(m(KHistory(vec![(a, 0)])), 3);
        assert_eq!(m(KHistory(vec![(a, 1)])), 2);
        assert_eq!(m(KHistory(vec![(b, 0)])), 2);
        assert_eq!(m(KHistory(vec![(b, 1)])), 2);
        // k = 0: one empty history covering all nodes
        let h0 = history_histogram(&t, 0, a);
        assert_eq!(h0.rows.len(), 1);
        assert_eq!(h0.rows[&KHistory(vec![])].total, t.node_count());
        // single leaf, k = 1: root history is pure padding
        let leaf = Tree::Leaf(a);
        let hl = history_histogram(&leaf, 1, a);
        assert_eq!(hl.rows[&KHistory(vec![(a, 0)])].total, 1);
    }

    #[test]
    fn empirical_process_rows() {
        let (t, al) = fig1();
        let a = al.index_of("a").unwrap();
        let b = al.index_of("b").unwrap();
        let p = empirical_tree_process(&t, 1, a);
        let row = p.row(&KHistory(vec![(a, 0)])).unwrap();
        // uniform over {(a,2),(b,2),(b,0)}
        assert!((shannon_entropy(row) - 3f64.log2()).abs() < 1e-12);
        for ld in [(a, 2u8), (b, 2), (b, 0)] {
            assert!((row.prob(&ld) - 1.0 / 3.0).abs() < 1e-12);
        }
        // leaf, k = 0: point mass
        let leaf = Tree::Leaf(a);
        let pl = empirical_tree_process(&leaf, 0, a);
        assert_eq!(pl.row(&KHistory(vec![])).unwrap().prob(&(a, 0)), 1.0);
        // a(b,b), k = 0
        let (t2, al2) = parse_tree("a(b,b)").unwrap();
        let a2 = al2.index_of("a").unwrap();
        let b2 = al2.index_of("b").unwrap();
        let p2 = empirical_tree_process(&t2, 0, al2.box_label());
        let row = p2.row(&KHistory(vec![])).unwrap();
        assert!((row.prob(&(a2, 2)) - 1.0 / 3.0).abs() < 1e-12);
        assert!((row.prob(&(b2, 0)) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tree_entropy_golden() {
        let (t, al) = fig1();
        let a = al.index_of("a").unwrap();
        let h1 = tree_entropy(&t, 1, a);
        assert!((h1 - (3.0 * 3f64.log2() + 6.0)).abs() < 1e-9);
        assert_eq!(tree_entropy(&Tree::Leaf(a), 3, a), 0.0);
    }

    #[test]
    fn entropy_monotone_in_k() {
        let (t, al) = fig1();
        let box_label = al.box_label();
        let mut prev = f64::INFINITY;
        for k in 0..5 {
            let h = tree_entropy(&t, k, box_label);
            assert!(h <= prev + 1e-9);
            assert!(h >= 0.0);
            assert!(h <= t.node_count() as f64 * (2.0 * al.size() as f64).log2() + 1e-9);
            prev = h;
        }
    }

    #[test]
    fn alternative_form_equality() {
        // H_k(t) = sum_z H(w(t,z)) where w(t,z) is the (label,degree) word
        let (t, al) = fig1();
        for k in 0..4 {
            let hist = history_histogram(&t, k, al.box_label());
            let mut acc = KahanSum::new();
            for row in hist.rows.values() {
                let mut word: Vec<LabelDegree> = Vec::new();
                for (ld, c) in &row.counts {
                    for _ in 0..*c {
                        word.push(*ld);
                    }
                }
                acc.add(unnormalized_empirical_entropy(&word));
            }
            assert!((acc.value() - tree_entropy(&t, k, al.box_label())).abs() < 1e-9);
        }
    }

    #[test]
    fn information_content_examples() {
        let (t, al) = fig1();
        let box_label = al.box_label();
        for k in 0..3 {
            let p = empirical_tree_process(&t, k, box_label);
            let ic = information_content(&p, &TreeOrContext::Tree(t.clone()));
            let hk = tree_entropy(&t, k, box_label);
            assert!((ic - hk).abs() < 1e-9);
        }
        // sigma = 1, uniform (1/2, 1/2) process: each node contributes 1 bit
        let (t1, al1) = parse_tree("a(a(a,a),a)").unwrap();
        let a = al1.index_of("a").unwrap();
        let rows = HashMap::from([(
            KHistory(vec![]),
            ProcessRow::Dist(Distribution::new(vec![((a, 0u8), 0.5), ((a, 2), 0.5)]).unwrap()),
        )]);
        let p = TreeProcess { k: 0, box_label: a, rows };
        let ic = information_content(&p, &TreeOrContext::Tree(t1.clone()));
        assert!((ic - t1.node_count() as f64).abs() < 1e-12);
        // zero-probability pair -> infinity signal
        let rows = HashMap::from([(
            KHistory(vec![]),
            ProcessRow::Dist(Distribution::new(vec![((a, 0u8), 1.0), ((a, 2), 0.0)]).unwrap()),
        )]);
        let p = TreeProcess { k: 0, box_label: a, rows };
        assert!(information_content(&p, &TreeOrContext::Tree(t1)).is_infinite());
    }

    #[test]
    fn perfect_tree_entropy_approaches_two_bits_per_leaf() {
        // unlabelled perfect tree of height 10, k = 2
        fn perfect(h: usize) -> Tree {
            if h == 0 {
                Tree::Leaf(0)
            } else {
                Tree::node(0, perfect(h - 1), perfect(h - 1))
            }
        }
        let t = perfect(10);
        let h2 = tree_entropy(&t, 2, 0);
        let n = t.size() as f64;
        // per-leaf rate approaches 2 bits as height grows
        assert!(h2 / n > 1.8 && h2 / n <= 2.0);
    }
}
