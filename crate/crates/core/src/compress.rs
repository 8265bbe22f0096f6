//! Tree compressors producing normal-form TSLPs, and the normalization
//! of general TSLPs into the restricted rule shapes.

use std::collections::HashMap;

use crate::codec;
use crate::entropy::tree_entropy;
use crate::trees::{Alphabet, Label, Tree};
use crate::tslp::{Atom, Fingerprint, GTerm, GeneralTslp, NormalTslp, Rule, TslpError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompressorChoice {
    Dag,
    Digram,
}

// Pool of normal rules deduplicated by the fingerprint of their value,
// so val-equal nonterminals are merged as they are created.
#[derive(Default)]
struct Pool {
    rules: Vec<Rule>,
    fps: Vec<Fingerprint>,
    by_fp: HashMap<(u8, Fingerprint), usize>,
}

impl Pool {
    fn atom_fp(&self, a: Atom) -> Fingerprint {
        match a {
            Atom::Term(l) => Fingerprint::leaf(l),
            Atom::Nt(j) => self.fps[j],
        }
    }

    fn intern(&mut self, rule: Rule) -> usize {
        let fp = match &rule {
            Rule::Singleton(a) => Fingerprint::leaf(*a),
            Rule::Apply { ctx, arg } => self.fps[*ctx].apply(&self.atom_fp(*arg)),
            Rule::Compose { outer, inner } => self.fps[*outer].compose(&self.fps[*inner]),
            Rule::ArgLeft { label, arg } => {
                Fingerprint::hole_ctx(*label, &self.atom_fp(*arg), false)
            }
            Rule::ArgRight { label, arg } => {
                Fingerprint::hole_ctx(*label, &self.atom_fp(*arg), true)
            }
        };
        let rank = crate::tslp::rule_rank(&rule);
        *self.by_fp.entry((rank, fp)).or_insert_with(|| {
            self.rules.push(rule);
            self.fps.push(fp);
            self.rules.len() - 1
        })
    }
}

// A resolved general nonterminal: rank 0 becomes an atom; rank 1 becomes
// a pool context, where `None` is the identity context x.
#[derive(Clone, Copy)]
enum Resolved {
    Tree(Atom),
    Ctx(Option<usize>),
}

fn contains_param(t: &GTerm) -> bool {
    match t {
        GTerm::Param => true,
        GTerm::Leaf(_) | GTerm::Nt(_) => false,
        GTerm::Node(_, l, r) => contains_param(l) || contains_param(r),
        GTerm::Apply(_, s) => contains_param(s),
    }
}

fn atomize_tree(t: &GTerm, pool: &mut Pool, resolved: &[Option<Resolved>]) -> Atom {
    match t {
        GTerm::Leaf(a) => Atom::Term(*a),
        GTerm::Nt(i) => match resolved[*i] {
            Some(Resolved::Tree(a)) => a,
            _ => unreachable!("rank mismatch survived validation"),
        },
        GTerm::Node(a, l, r) => {
            let right = atomize_tree(r, pool, resolved);
            let ctx = pool.intern(Rule::ArgRight { label: *a, arg: right });
            let left = atomize_tree(l, pool, resolved);
            Atom::Nt(pool.intern(Rule::Apply { ctx, arg: left }))
        }
        GTerm::Apply(i, sub) => {
            let arg = atomize_tree(sub, pool, resolved);
            match resolved[*i] {
                Some(Resolved::Ctx(None)) => arg,
                Some(Resolved::Ctx(Some(c))) => {
                    Atom::Nt(pool.intern(Rule::Apply { ctx: c, arg }))
                }
                _ => unreachable!("rank mismatch survived validation"),
            }
        }
        GTerm::Param => unreachable!("parameter in a rank-0 term"),
    }
}

fn compose_opt(outer: Option<usize>, inner: Option<usize>, pool: &mut Pool) -> Option<usize> {
    match (outer, inner) {
        (None, c) | (c, None) => c,
        (Some(o), Some(i)) => Some(pool.intern(Rule::Compose { outer: o, inner: i })),
    }
}

fn atomize_ctx(t: &GTerm, pool: &mut Pool, resolved: &[Option<Resolved>]) -> Option<usize> {
    match t {
        GTerm::Param => None,
        GTerm::Node(a, l, r) => {
            if contains_param(l) {
                let arg = atomize_tree(r, pool, resolved);
                let outer = pool.intern(Rule::ArgRight { label: *a, arg });
                let inner = atomize_ctx(l, pool, resolved);
                compose_opt(Some(outer), inner, pool)
            } else {
                let arg = atomize_tree(l, pool, resolved);
                let outer = pool.intern(Rule::ArgLeft { label: *a, arg });
                let inner = atomize_ctx(r, pool, resolved);
                compose_opt(Some(outer), inner, pool)
            }
        }
        GTerm::Apply(i, sub) => {
            let inner = atomize_ctx(sub, pool, resolved);
            match resolved[*i] {
                Some(Resolved::Ctx(outer)) => compose_opt(outer, inner, pool),
                _ => unreachable!("rank mismatch survived validation"),
            }
        }
        _ => unreachable!("parameter-free term in a rank-1 position"),
    }
}

/// Renumbers reachable pool rules so the first occurrences in ρ_G appear
/// in index order (breadth-first from the start rule).
fn renumber(pool: &Pool, start: usize) -> NormalTslp {
    let mut map: HashMap<usize, usize> = HashMap::new();
    map.insert(start, 0);
    let mut order = vec![start];
    let mut head = 0;
    while head < order.len() {
        let rule = &pool.rules[order[head]];
        head += 1;
        let refs: Vec<usize> = match rule {
            Rule::Singleton(_) => vec![],
            Rule::Apply { ctx, arg } => {
                let mut v = vec![*ctx];
                if let Atom::Nt(j) = arg {
                    v.push(*j);
                }
                v
            }
            Rule::Compose { outer, inner } => vec![*outer, *inner],
            Rule::ArgLeft { arg, .. } | Rule::ArgRight { arg, .. } => {
                if let Atom::Nt(j) = arg {
                    vec![*j]
                } else {
                    vec![]
                }
            }
        };
        for j in refs {
            if !map.contains_key(&j) {
                map.insert(j, order.len());
                order.push(j);
            }
        }
    }
    let remap_atom = |a: Atom| match a {
        Atom::Term(l) => Atom::Term(l),
        Atom::Nt(j) => Atom::Nt(map[&j]),
    };
    let rules = order
        .iter()
        .map(|&i| match pool.rules[i] {
            Rule::Singleton(a) => Rule::Singleton(a),
            Rule::Apply { ctx, arg } => Rule::Apply { ctx: map[&ctx], arg: remap_atom(arg) },
            Rule::Compose { outer, inner } => {
                Rule::Compose { outer: map[&outer], inner: map[&inner] }
            }
            Rule::ArgLeft { label, arg } => Rule::ArgLeft { label, arg: remap_atom(arg) },
            Rule::ArgRight { label, arg } => Rule::ArgRight { label, arg: remap_atom(arg) },
        })
        .collect();
    NormalTslp { rules }
}

/// Transforms a general TSLP into a normal-form TSLP with the same value.
pub fn normalize(g: &GeneralTslp) -> Result<NormalTslp, TslpError> {
    let order = g.topo_order()?;
    let mut pool = Pool::default();
    let mut resolved: Vec<Option<Resolved>> = vec![None; g.len()];
    for i in order {
        resolved[i] = Some(if g.ranks[i] == 0 {
            Resolved::Tree(atomize_tree(&g.rhs[i], &mut pool, &resolved))
        } else {
            Resolved::Ctx(atomize_ctx(&g.rhs[i], &mut pool, &resolved))
        });
    }
    match resolved[0] {
        Some(Resolved::Tree(Atom::Term(a))) => {
            Ok(NormalTslp { rules: vec![Rule::Singleton(a)] })
        }
        Some(Resolved::Tree(Atom::Nt(start))) => Ok(renumber(&pool, start)),
        _ => Err(TslpError::RankMismatch(0)),
    }
}

/// Minimal-DAG sharing: one general rule per distinct subtree of `t`.
fn dag_tslp(t: &Tree) -> GeneralTslp {
    struct Cons {
        ids: HashMap<(Label, usize, usize), usize>,
        rhs: Vec<GTerm>,
    }
    const LEAF: usize = usize::MAX;
    fn cons(t: &Tree, c: &mut Cons) -> usize {
        let (key, rhs) = match t {
            Tree::Leaf(a) => ((*a, LEAF, LEAF), GTerm::Leaf(*a)),
            Tree::Node(a, l, r) => {
                let li = cons(l, c);
                let ri = cons(r, c);
                // rule indices are shifted by one to leave room for A0
                ((*a, li, ri), GTerm::Node(*a, Box::new(GTerm::Nt(li + 1)), Box::new(GTerm::Nt(ri + 1))))
            }
        };
        if let Some(&id) = c.ids.get(&key) {
            return id;
        }
        let id = c.rhs.len();
        c.ids.insert(key, id);
        c.rhs.push(rhs);
        id
    }
    let mut c = Cons { ids: HashMap::new(), rhs: Vec::new() };
    let root = cons(t, &mut c);
    let mut rhs = vec![GTerm::Nt(root + 1)];
    rhs.extend(c.rhs);
    let ranks = vec![0; rhs.len()];
    GeneralTslp::new(ranks, rhs).expect("dag grammar is well-formed by construction")
}

// ---------------------------------------------------------------------------
// Digram compressor. The working term has binary terminal nodes, leaf
// atoms (terminals or introduced rank-0 nonterminals) and unary nodes
// (introduced rank-1 nonterminals applied to a subterm). A digram is a
// parent together with one child it can be fused with; every replacement
// introduces at most one new rule and shrinks the term.
// ---------------------------------------------------------------------------

enum Sk {
    Atom(Atom),
    Bin(Label, Box<Sk>, Box<Sk>),
    Un(usize, Box<Sk>),
}

type AtomKey = (u8, usize);

fn atom_key(a: Atom) -> AtomKey {
    match a {
        Atom::Term(l) => (0, l),
        Atom::Nt(j) => (1, j),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Digram {
    /// Binary node with the given label whose child `dir` is a leaf atom.
    BinAtom(Label, u8, AtomKey),
    /// Unary node directly above another unary node.
    UnUn(usize, usize),
    /// Unary node directly above a leaf atom.
    UnAtom(usize, AtomKey),
}

fn count_digrams(t: &Sk, counts: &mut HashMap<Digram, u64>, chain_prev: Option<usize>) {
    match t {
        Sk::Atom(_) => {}
        Sk::Bin(a, l, r) => {
            if let Sk::Atom(x) = &**l {
                *counts.entry(Digram::BinAtom(*a, 0, atom_key(*x))).or_insert(0) += 1;
            }
            if let Sk::Atom(x) = &**r {
                *counts.entry(Digram::BinAtom(*a, 1, atom_key(*x))).or_insert(0) += 1;
            }
            count_digrams(l, counts, None);
            count_digrams(r, counts, None);
        }
        Sk::Un(nt, child) => {
            match &**child {
                Sk::Un(inner, _) => {
                    // greedy along unary chains: a counted pair of the
                    // same digram ending at this node blocks this pair
                    let overlaps = chain_prev == Some(*nt) && *nt == *inner;
                    if !overlaps {
                        *counts.entry(Digram::UnUn(*nt, *inner)).or_insert(0) += 1;
                        count_digrams(child, counts, Some(*nt));
                        return;
                    }
                }
                Sk::Atom(x) => {
                    *counts.entry(Digram::UnAtom(*nt, atom_key(*x))).or_insert(0) += 1;
                }
                _ => {}
            }
            count_digrams(child, counts, None);
        }
    }
}

struct DigramState {
    rules: Vec<Rule>,
    /// The rule introduced for the digram of the current round.
    new_rule: Option<usize>,
}

impl DigramState {
    fn rule_for(&mut self, make: impl FnOnce() -> Rule) -> usize {
        if let Some(i) = self.new_rule {
            return i;
        }
        self.rules.push(make());
        let i = self.rules.len() - 1;
        self.new_rule = Some(i);
        i
    }
}

fn replace_digram(t: Sk, d: Digram, st: &mut DigramState) -> Sk {
    match t {
        Sk::Atom(a) => Sk::Atom(a),
        Sk::Bin(a, l, r) => {
            if let Digram::BinAtom(pl, dir, child) = d {
                if pl == a {
                    if dir == 0 {
                        if matches!(&*l, Sk::Atom(x) if atom_key(*x) == child) {
                            let Sk::Atom(x) = *l else { unreachable!() };
                            let nt = st.rule_for(|| Rule::ArgLeft { label: a, arg: x });
                            return Sk::Un(nt, Box::new(replace_digram(*r, d, st)));
                        }
                    } else if matches!(&*r, Sk::Atom(x) if atom_key(*x) == child) {
                        let Sk::Atom(x) = *r else { unreachable!() };
                        let nt = st.rule_for(|| Rule::ArgRight { label: a, arg: x });
                        return Sk::Un(nt, Box::new(replace_digram(*l, d, st)));
                    }
                }
            }
            Sk::Bin(
                a,
                Box::new(replace_digram(*l, d, st)),
                Box::new(replace_digram(*r, d, st)),
            )
        }
        Sk::Un(nt, child) => match (d, *child) {
            (Digram::UnUn(p, q), Sk::Un(inner, gchild)) if p == nt && q == inner => {
                let fused = st.rule_for(|| Rule::Compose { outer: p, inner: q });
                Sk::Un(fused, Box::new(replace_digram(*gchild, d, st)))
            }
            (Digram::UnAtom(p, ck), Sk::Atom(x)) if p == nt && atom_key(x) == ck => {
                let fused = st.rule_for(|| Rule::Apply { ctx: p, arg: x });
                Sk::Atom(Atom::Nt(fused))
            }
            (_, other) => Sk::Un(nt, Box::new(replace_digram(other, d, st))),
        },
    }
}

fn tree_to_sk(t: &Tree) -> Sk {
    match t {
        Tree::Leaf(a) => Sk::Atom(Atom::Term(*a)),
        Tree::Node(a, l, r) => Sk::Bin(*a, Box::new(tree_to_sk(l)), Box::new(tree_to_sk(r))),
    }
}

fn sk_to_gterm(t: &Sk) -> GTerm {
    match t {
        Sk::Atom(Atom::Term(l)) => GTerm::Leaf(*l),
        Sk::Atom(Atom::Nt(j)) => GTerm::Nt(j + 1),
        Sk::Bin(a, l, r) => GTerm::Node(*a, Box::new(sk_to_gterm(l)), Box::new(sk_to_gterm(r))),
        Sk::Un(nt, child) => GTerm::Apply(nt + 1, Box::new(sk_to_gterm(child))),
    }
}

fn rule_to_gterm(r: &Rule) -> GTerm {
    let gatom = |a: Atom| match a {
        Atom::Term(l) => GTerm::Leaf(l),
        Atom::Nt(j) => GTerm::Nt(j + 1),
    };
    match r {
        Rule::Singleton(a) => GTerm::Leaf(*a),
        Rule::Apply { ctx, arg } => GTerm::Apply(ctx + 1, Box::new(gatom(*arg))),
        Rule::Compose { outer, inner } => GTerm::Apply(
            outer + 1,
            Box::new(GTerm::Apply(inner + 1, Box::new(GTerm::Param))),
        ),
        Rule::ArgLeft { label, arg } => {
            GTerm::Node(*label, Box::new(gatom(*arg)), Box::new(GTerm::Param))
        }
        Rule::ArgRight { label, arg } => {
            GTerm::Node(*label, Box::new(GTerm::Param), Box::new(gatom(*arg)))
        }
    }
}

fn digram_tslp(t: &Tree) -> GeneralTslp {
    let mut sk = tree_to_sk(t);
    let mut st = DigramState { rules: Vec::new(), new_rule: None };
    loop {
        let mut counts = HashMap::new();
        count_digrams(&sk, &mut counts, None);
        // most frequent digram, smallest descriptor on ties
        let best = counts
            .iter()
            .filter(|&(_, &c)| c >= 2)
            .max_by(|(d1, c1), (d2, c2)| c1.cmp(c2).then(d2.cmp(d1)))
            .map(|(&d, _)| d);
        let Some(d) = best else { break };
        st.new_rule = None;
        sk = replace_digram(sk, d, &mut st);
    }
    let mut rhs = vec![sk_to_gterm(&sk)];
    let mut ranks = vec![0u8];
    for r in &st.rules {
        rhs.push(rule_to_gterm(r));
        ranks.push(crate::tslp::rule_rank(r));
    }
    GeneralTslp::new(ranks, rhs).expect("digram grammar is well-formed by construction")
}

/// Compresses `t` into a normal-form TSLP with `val(G) = t`.
pub fn compress(t: &Tree, choice: CompressorChoice) -> Result<NormalTslp, TslpError> {
    if let Tree::Leaf(a) = t {
        return Ok(NormalTslp { rules: vec![Rule::Singleton(*a)] });
    }
    let general = match choice {
        CompressorChoice::Dag => dag_tslp(t),
        CompressorChoice::Digram => digram_tslp(t),
    };
    normalize(&general)
}

/// Size, code length and entropy figures for one tree.
#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub size: u64,
    pub sigma: usize,
    pub grammar_size: usize,
    pub code_bits: usize,
    pub grammar_entropy: f64,
    /// (k, H_k(t)) for each requested k.
    pub entropies: Vec<(usize, f64)>,
}

pub fn measure(
    t: &Tree,
    alphabet: &Alphabet,
    ks: &[usize],
    choice: CompressorChoice,
) -> Result<MeasureReport, TslpError> {
    let g = compress(t, choice)?;
    let bits = codec::encode(&g, alphabet.size())
        .expect("compress output is in normal form");
    let entropies = ks
        .iter()
        .map(|&k| (k, tree_entropy(t, k, alphabet.box_label())))
        .collect();
    Ok(MeasureReport {
        size: t.size(),
        sigma: alphabet.size(),
        grammar_size: g.len(),
        code_bits: bits.len(),
        grammar_entropy: g.grammar_entropy(),
        entropies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::parse_tree;
    use crate::tslp::DEFAULT_EXPANSION_BUDGET;

    fn example_general() -> GeneralTslp {
        GeneralTslp::new(
            vec![0, 0, 1],
            vec![
                GTerm::Node(
                    0,
                    Box::new(GTerm::Nt(1)),
                    Box::new(GTerm::Apply(2, Box::new(GTerm::Leaf(1)))),
                ),
                GTerm::Apply(2, Box::new(GTerm::Apply(2, Box::new(GTerm::Leaf(1))))),
                GTerm::Node(1, Box::new(GTerm::Param), Box::new(GTerm::Leaf(0))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn normalize_example() {
        let g = example_general();
        let n = normalize(&g).unwrap();
        assert!(n.is_normal_form());
        assert_eq!(
            n.val(DEFAULT_EXPANSION_BUDGET).unwrap(),
            g.val(DEFAULT_EXPANSION_BUDGET).unwrap()
        );
    }

    #[test]
    fn normalize_is_idempotent_up_to_renumbering() {
        let g = example_general();
        let n1 = normalize(&g).unwrap();
        // feed the normal grammar back in as a general one
        let general = GeneralTslp::new(
            (0..n1.len()).map(|i| n1.rank(i)).collect(),
            n1.rules.iter().map(rule_to_gterm_noshift).collect(),
        )
        .unwrap();
        let n2 = normalize(&general).unwrap();
        assert_eq!(n1.len(), n2.len());
        assert_eq!(
            n1.val(DEFAULT_EXPANSION_BUDGET).unwrap(),
            n2.val(DEFAULT_EXPANSION_BUDGET).unwrap()
        );
    }

    fn rule_to_gterm_noshift(r: &Rule) -> GTerm {
        let gatom = |a: Atom| match a {
            Atom::Term(l) => GTerm::Leaf(l),
            Atom::Nt(j) => GTerm::Nt(j),
        };
        match r {
            Rule::Singleton(a) => GTerm::Leaf(*a),
            Rule::Apply { ctx, arg } => GTerm::Apply(*ctx, Box::new(gatom(*arg))),
            Rule::Compose { outer, inner } => {
                GTerm::Apply(*outer, Box::new(GTerm::Apply(*inner, Box::new(GTerm::Param))))
            }
            Rule::ArgLeft { label, arg } => {
                GTerm::Node(*label, Box::new(gatom(*arg)), Box::new(GTerm::Param))
            }
            Rule::ArgRight { label, arg } => {
                GTerm::Node(*label, Box::new(GTerm::Param), Box::new(gatom(*arg)))
            }
        }
    }

    #[test]
    fn compress_leaf() {
        let t = Tree::Leaf(0);
        for choice in [CompressorChoice::Dag, CompressorChoice::Digram] {
            let g = compress(&t, choice).unwrap();
            assert_eq!(g.rules, vec![Rule::Singleton(0)]);
        }
    }

    #[test]
    fn compress_roundtrips() {
        let cases = [
            "a(b(b(b,a),a),b(b,a))",
            "a(a,a)",
            "f(g(a,b),g(a,b))",
            "a(b(c,d),e)",
        ];
        for src in cases {
            let (t, _) = parse_tree(src).unwrap();
            for choice in [CompressorChoice::Dag, CompressorChoice::Digram] {
                let g = compress(&t, choice).unwrap();
                assert!(g.is_normal_form(), "{src} {choice:?}: {:?}", g.normal_form_violations());
                assert_eq!(g.val(DEFAULT_EXPANSION_BUDGET).unwrap(), t, "{src} {choice:?}");
            }
        }
    }

    fn perfect(h: usize) -> Tree {
        if h == 0 {
            Tree::Leaf(0)
        } else {
            let sub = perfect(h - 1);
            Tree::node(0, sub.clone(), sub)
        }
    }

    #[test]
    fn dag_on_perfect_tree_is_logarithmic() {
        let t = perfect(16);
        assert_eq!(t.size(), 1 << 16);
        let g = compress(&t, CompressorChoice::Dag).unwrap();
        assert!(g.is_normal_form());
        assert!(g.len() <= 64, "got {} rules", g.len());
        // check by value sizes rather than expanding 65536 leaves eagerly
        assert_eq!(g.val_sizes(1 << 20).unwrap()[0], 1 << 16);
        assert_eq!(g.val(1 << 20).unwrap(), t);
    }

    #[test]
    fn digram_on_repetitive_tree_shrinks() {
        // t = caterpillar of 64 identical a(b, .) steps
        let mut t = Tree::Leaf(1);
        for _ in 0..64 {
            t = Tree::node(0, Tree::Leaf(1), t);
        }
        let g = compress(&t, CompressorChoice::Digram).unwrap();
        assert!(g.is_normal_form());
        assert_eq!(g.val(DEFAULT_EXPANSION_BUDGET).unwrap(), t);
        // 64 steps should compress to O(log) rules via chain doubling
        assert!(g.len() <= 16, "got {} rules", g.len());
    }

    #[test]
    fn measure_reports_consistent_fields() {
        let (t, al) = parse_tree("a(b(b(b,a),a),b(b,a))").unwrap();
        let rep = measure(&t, &al, &[0, 1], CompressorChoice::Dag).unwrap();
        assert_eq!(rep.size, 5);
        assert_eq!(rep.sigma, 2);
        assert_eq!(rep.entropies.len(), 2);
        assert!(rep.code_bits > 0);
        assert!(rep.entropies[0].1 >= rep.entropies[1].1);
    }
}
