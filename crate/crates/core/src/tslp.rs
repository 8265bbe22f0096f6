//! Tree straight-line programs: the general model, the normal form with
//! its restricted rule shapes, evaluation, the words ρ_G and ω_G,
//! grammar entropy, derivation trees and normal-form diagnostics.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::entropy::unnormalized_empirical_entropy;
use crate::trees::{Alphabet, Context, Label, NodeAddr, Tree, TreeOrContext};

pub const DEFAULT_EXPANSION_BUDGET: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum TslpError {
    #[error("expansion budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("nonterminal index {0} out of range")]
    BadIndex(usize),
    #[error("grammar is cyclic at nonterminal A{0}")]
    Cyclic(usize),
    #[error("rule for A{0} has inconsistent ranks")]
    RankMismatch(usize),
    #[error("grammar parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("grammar is not in normal form: {0:?}")]
    NotNormalForm(Vec<String>),
}

/// α ∈ V₀ ∪ Σ: a terminal label or a rank-0 nonterminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    Term(Label),
    Nt(usize),
}

/// Symbol of the words ρ_G / ω_G.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Term(Label),
    Nt(usize),
}

/// Right-hand side of a normal-form rule.
///
/// Shapes: `A_j(α)` for rank-0 nonterminals; `A_j(A_k(x))`, `a(α,x)`
/// or `a(x,α)` for rank-1; plus the singleton grammar `A₀ → a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// `A₀ → a`, only allowed when the grammar has a single rule.
    Singleton(Label),
    /// rank 0: `A_i → A_j(α)` with `A_j` of rank 1.
    Apply { ctx: usize, arg: Atom },
    /// rank 1: `A_i → A_j(A_k(x))`, composition of two rank-1 nonterminals.
    Compose { outer: usize, inner: usize },
    /// rank 1, type 2: `A_i → a(α, x)`.
    ArgLeft { label: Label, arg: Atom },
    /// rank 1, type 3: `A_i → a(x, α)`.
    ArgRight { label: Label, arg: Atom },
}

/// TSLP in normal form; `rules[i]` is the rule of `A_i`, `A_0` is the start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalTslp {
    pub rules: Vec<Rule>,
}

/// Rank of a nonterminal as implied by its rule shape.
pub fn rule_rank(rule: &Rule) -> u8 {
    match rule {
        Rule::Singleton(_) | Rule::Apply { .. } => 0,
        _ => 1,
    }
}

impl NormalTslp {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rank(&self, i: usize) -> u8 {
        rule_rank(&self.rules[i])
    }

    fn atom_symbols(rule: &Rule) -> Vec<Symbol> {
        match rule {
            Rule::Singleton(a) => vec![Symbol::Term(*a)],
            Rule::Apply { ctx, arg } => vec![Symbol::Nt(*ctx), atom_symbol(*arg)],
            Rule::Compose { outer, inner } => vec![Symbol::Nt(*outer), Symbol::Nt(*inner)],
            Rule::ArgLeft { label, arg } | Rule::ArgRight { label, arg } => {
                vec![Symbol::Term(*label), atom_symbol(*arg)]
            }
        }
    }

    /// ρ_G: concatenation of the two-symbol words ρ(A_i) in index order.
    pub fn rho(&self) -> Vec<Symbol> {
        self.rules.iter().flat_map(Self::atom_symbols).collect()
    }

    /// ω_G: ρ_G with the first occurrence of every nonterminal removed.
    pub fn omega(&self) -> Vec<Symbol> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for sym in self.rho() {
            if let Symbol::Nt(i) = sym {
                if !seen[i] {
                    seen[i] = true;
                    continue;
                }
            }
            out.push(sym);
        }
        out
    }

    /// H(G): unnormalized empirical entropy of ω_G.
    pub fn grammar_entropy(&self) -> f64 {
        unnormalized_empirical_entropy(&self.omega())
    }

    /// Leaf count of `val(A_i)` (trees) or `|val(A_i)|` (contexts),
    /// computed without expansion. Errors if any size exceeds the budget.
    pub fn val_sizes(&self, budget: u64) -> Result<Vec<u64>, TslpError> {
        self.check_refs()?;
        let order = self.topo_order()?;
        let mut sizes = vec![0u64; self.len()];
        for i in order {
            let atom_size = |a: Atom, sizes: &[u64]| -> u64 {
                match a {
                    Atom::Term(_) => 1,
                    Atom::Nt(j) => sizes[j],
                }
            };
            let s = match &self.rules[i] {
                Rule::Singleton(_) => 1,
                // |c[t]| = |c| + |t|
                Rule::Apply { ctx, arg } => sizes[*ctx]
                    .checked_add(atom_size(*arg, &sizes))
                    .ok_or(TslpError::BudgetExceeded(budget))?,
                Rule::Compose { outer, inner } => sizes[*outer]
                    .checked_add(sizes[*inner])
                    .ok_or(TslpError::BudgetExceeded(budget))?,
                Rule::ArgLeft { arg, .. } | Rule::ArgRight { arg, .. } => {
                    atom_size(*arg, &sizes)
                }
            };
            if s > budget {
                return Err(TslpError::BudgetExceeded(budget));
            }
            sizes[i] = s;
        }
        Ok(sizes)
    }

    fn check_refs(&self) -> Result<(), TslpError> {
        for rule in &self.rules {
            for sym in Self::atom_symbols(rule) {
                if let Symbol::Nt(j) = sym {
                    if j >= self.len() {
                        return Err(TslpError::BadIndex(j));
                    }
                }
            }
        }
        Ok(())
    }

    /// Nonterminals in dependency order (referenced before referencing).
    fn topo_order(&self) -> Result<Vec<usize>, TslpError> {
        let mut state = vec![0u8; self.len()]; // 0 new, 1 active, 2 done
        let mut order = Vec::with_capacity(self.len());
        // iterative DFS
        for start in 0..self.len() {
            if state[start] == 2 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            while let Some((node, child_idx)) = stack.pop() {
                if child_idx == 0 {
                    if state[node] == 2 {
                        continue;
                    }
                    if state[node] == 1 {
                        return Err(TslpError::Cyclic(node));
                    }
                    state[node] = 1;
                }
                let deps: Vec<usize> = Self::atom_symbols(&self.rules[node])
                    .into_iter()
                    .filter_map(|s| match s {
                        Symbol::Nt(j) => Some(j),
                        _ => None,
                    })
                    .collect();
                if child_idx < deps.len() {
                    stack.push((node, child_idx + 1));
                    let dep = deps[child_idx];
                    if state[dep] == 1 {
                        return Err(TslpError::Cyclic(dep));
                    }
                    if state[dep] == 0 {
                        stack.push((dep, 0));
                    }
                } else {
                    state[node] = 2;
                    order.push(node);
                }
            }
        }
        Ok(order)
    }

    fn atom_tree(&self, a: Atom, budget: &mut u64) -> Result<Tree, TslpError> {
        match a {
            Atom::Term(l) => {
                spend(budget, 1)?;
                Ok(Tree::Leaf(l))
            }
            Atom::Nt(j) => self.build_tree(j, budget),
        }
    }

    // Top-down expansion: total work is linear in the output size.
    fn build_tree(&self, i: usize, budget: &mut u64) -> Result<Tree, TslpError> {
        match &self.rules[i] {
            Rule::Singleton(a) => {
                spend(budget, 1)?;
                Ok(Tree::Leaf(*a))
            }
            Rule::Apply { ctx, arg } => {
                let sub = self.atom_tree(*arg, budget)?;
                self.apply_ctx(*ctx, sub, budget)
            }
            _ => Err(TslpError::RankMismatch(i)),
        }
    }

    fn apply_ctx(&self, i: usize, hole: Tree, budget: &mut u64) -> Result<Tree, TslpError> {
        match &self.rules[i] {
            Rule::Compose { outer, inner } => {
                let t = self.apply_ctx(*inner, hole, budget)?;
                self.apply_ctx(*outer, t, budget)
            }
            Rule::ArgLeft { label, arg } => {
                spend(budget, 1)?;
                let l = self.atom_tree(*arg, budget)?;
                Ok(Tree::node(*label, l, hole))
            }
            Rule::ArgRight { label, arg } => {
                spend(budget, 1)?;
                let r = self.atom_tree(*arg, budget)?;
                Ok(Tree::node(*label, hole, r))
            }
            _ => Err(TslpError::RankMismatch(i)),
        }
    }

    fn build_context(&self, i: usize, budget: &mut u64) -> Result<Context, TslpError> {
        match &self.rules[i] {
            Rule::Compose { outer, inner } => {
                let inner_c = self.build_context(*inner, budget)?;
                let outer_c = self.build_context(*outer, budget)?;
                Ok(crate::trees::compose(&outer_c, &inner_c))
            }
            Rule::ArgLeft { label, arg } => {
                spend(budget, 1)?;
                let l = self.atom_tree(*arg, budget)?;
                Ok(Context::HoleRight(*label, Box::new(l), Box::new(Context::Param)))
            }
            Rule::ArgRight { label, arg } => {
                spend(budget, 1)?;
                let r = self.atom_tree(*arg, budget)?;
                Ok(Context::HoleLeft(*label, Box::new(Context::Param), Box::new(r)))
            }
            _ => Err(TslpError::RankMismatch(i)),
        }
    }

    /// `val(G)`: the unique tree derived from `A_0`.
    pub fn val(&self, budget: u64) -> Result<Tree, TslpError> {
        self.val_sizes(budget)?; // cheap overflow / cycle / budget check first
        let mut b = budget.saturating_mul(2);
        self.build_tree(0, &mut b)
    }

    /// `val(A_i)`: a tree for rank-0 nonterminals, a context for rank-1.
    pub fn val_of(&self, i: usize, budget: u64) -> Result<TreeOrContext, TslpError> {
        if i >= self.len() {
            return Err(TslpError::BadIndex(i));
        }
        self.val_sizes(budget)?;
        let mut b = budget.saturating_mul(2);
        if self.rank(i) == 0 {
            Ok(TreeOrContext::Tree(self.build_tree(i, &mut b)?))
        } else {
            Ok(TreeOrContext::Context(self.build_context(i, &mut b)?))
        }
    }

    /// Fingerprints of all `val(A_i)`, computed bottom-up without
    /// expansion; equal fingerprints identify equal values.
    pub fn fingerprints(&self) -> Result<Vec<Fingerprint>, TslpError> {
        self.check_refs()?;
        let order = self.topo_order()?;
        let mut fps: Vec<Fingerprint> = vec![Fingerprint::default(); self.len()];
        for i in order {
            let atom_fp = |a: Atom, fps: &[Fingerprint]| match a {
                Atom::Term(l) => Fingerprint::leaf(l),
                Atom::Nt(j) => fps[j],
            };
            fps[i] = match &self.rules[i] {
                Rule::Singleton(a) => Fingerprint::leaf(*a),
                Rule::Apply { ctx, arg } => fps[*ctx].apply(&atom_fp(*arg, &fps)),
                Rule::Compose { outer, inner } => fps[*outer].compose(&fps[*inner]),
                Rule::ArgLeft { label, arg } => {
                    Fingerprint::hole_ctx(*label, &atom_fp(*arg, &fps), false)
                }
                Rule::ArgRight { label, arg } => {
                    Fingerprint::hole_ctx(*label, &atom_fp(*arg, &fps), true)
                }
            };
        }
        Ok(fps)
    }

    /// The full derivation tree T_G; its leaf count is `2|val(G)| - 1`.
    pub fn derivation_tree(&self, budget: u64) -> Result<DerivationTree, TslpError> {
        self.val_sizes(budget)?;
        let mut b = budget.saturating_mul(4);
        self.build_derivation(0, &mut b)
    }

    fn build_derivation(&self, i: usize, budget: &mut u64) -> Result<DerivationTree, TslpError> {
        spend(budget, 1)?;
        let child = |sym: Symbol, budget: &mut u64| -> Result<DerivationTree, TslpError> {
            match sym {
                Symbol::Term(a) => {
                    spend(budget, 1)?;
                    Ok(DerivationTree::Term(a))
                }
                Symbol::Nt(j) => self.build_derivation(j, budget),
            }
        };
        if let Rule::Singleton(a) = self.rules[i] {
            // derivation tree of the singleton grammar is a single leaf
            return Ok(DerivationTree::Term(a));
        }
        let syms = Self::atom_symbols(&self.rules[i]);
        let left = child(syms[0], budget)?;
        let right = child(syms[1], budget)?;
        Ok(DerivationTree::Nt(i, Box::new(left), Box::new(right)))
    }

    /// Checks `2|val(G)| >= Σ |s_v|` over the leaves of the initial
    /// subtree obtained by pruning strict descendants of `prune` nodes.
    pub fn check_initial_subtree_bound(
        &self,
        prune: &[NodeAddr],
        budget: u64,
    ) -> Result<bool, TslpError> {
        let sizes = self.val_sizes(budget)?;
        let deriv = self.derivation_tree(budget)?;
        let mut leaf_sum: u64 = 0;
        let mut stack: Vec<(&DerivationTree, Vec<u8>)> = vec![(&deriv, Vec::new())];
        while let Some((node, addr)) = stack.pop() {
            let pruned_here = prune.iter().any(|p| p.0 == addr);
            match node {
                DerivationTree::Term(_) => {
                    leaf_sum += 1; // |s_v| = 1 for a terminal leaf
                }
                DerivationTree::Nt(i, l, r) => {
                    if pruned_here {
                        leaf_sum += sizes[*i];
                    } else {
                        let mut la = addr.clone();
                        la.push(0);
                        let mut ra = addr;
                        ra.push(1);
                        stack.push((l, la));
                        stack.push((r, ra));
                    }
                }
            }
        }
        Ok(2 * sizes[0] >= leaf_sum)
    }

    /// Normal-form diagnostics; an empty list means the grammar passes.
    pub fn normal_form_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rules.is_empty() {
            out.push("grammar has no rules".to_string());
            return out;
        }
        if self.check_refs().is_err() {
            out.push("rule references a nonterminal out of range".to_string());
            return out;
        }
        if self.topo_order().is_err() {
            out.push("nonterminal dependencies are cyclic".to_string());
            return out;
        }
        let m = self.len();
        // singleton form only for m = 1; A0 must have rank 0
        for (i, rule) in self.rules.iter().enumerate() {
            if matches!(rule, Rule::Singleton(_)) && (m != 1 || i != 0) {
                out.push(format!("singleton rule at A{i} in a grammar of size {m}"));
            }
        }
        if self.rank(0) != 0 {
            out.push("start nonterminal A0 must derive a tree".to_string());
        }
        // rank consistency of references
        for (i, rule) in self.rules.iter().enumerate() {
            let want: Vec<(usize, u8)> = match rule {
                Rule::Singleton(_) => vec![],
                Rule::Apply { ctx, arg } => {
                    let mut v = vec![(*ctx, 1)];
                    if let Atom::Nt(j) = arg {
                        v.push((*j, 0));
                    }
                    v
                }
                Rule::Compose { outer, inner } => vec![(*outer, 1), (*inner, 1)],
                Rule::ArgLeft { arg, .. } | Rule::ArgRight { arg, .. } => {
                    if let Atom::Nt(j) = arg {
                        vec![(*j, 0)]
                    } else {
                        vec![]
                    }
                }
            };
            for (j, rank) in want {
                if j < m && self.rank(j) != rank {
                    out.push(format!("A{i} uses A{j} at rank {rank} but A{j} has rank {}", self.rank(j)));
                }
            }
        }
        // the first-occurrence ordering of rho_G
        if m > 1 {
            let rho = self.rho();
            let mut intro = 0usize;
            for (pos, sym) in rho.iter().enumerate() {
                if let Symbol::Nt(j) = sym {
                    if *j == 0 {
                        out.push("A0 occurs in a right-hand side".to_string());
                    } else if *j == intro + 1 {
                        intro += 1;
                    } else if *j > intro + 1 {
                        out.push(format!(
                            "first occurrence of A{j} at position {pos} of rho_G is out of order"
                        ));
                        break;
                    }
                }
            }
            if intro != m - 1 && out.is_empty() {
                out.push(format!("only {intro} of {} nonterminals occur in rho_G", m - 1));
            }
        }
        // pairwise distinct values, via fingerprints
        if out.is_empty() {
            if let Ok(fps) = self.fingerprints() {
                let mut seen: HashMap<(u8, Fingerprint), usize> = HashMap::new();
                for (i, fp) in fps.iter().enumerate() {
                    let key = (self.rank(i), *fp);
                    if let Some(j) = seen.insert(key, i) {
                        out.push(format!("val(A{j}) = val(A{i})"));
                    }
                }
            }
        }
        out
    }

    pub fn is_normal_form(&self) -> bool {
        self.normal_form_violations().is_empty()
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut s = String::new();
        let atom = |a: Atom| match a {
            Atom::Term(l) => alphabet.name(l).to_string(),
            Atom::Nt(j) => format!("A{j}"),
        };
        for (i, rule) in self.rules.iter().enumerate() {
            let rhs = match rule {
                Rule::Singleton(a) => alphabet.name(*a).to_string(),
                Rule::Apply { ctx, arg } => format!("A{ctx}({})", atom(*arg)),
                Rule::Compose { outer, inner } => format!("A{outer}(A{inner}(x))"),
                Rule::ArgLeft { label, arg } => {
                    format!("{}({},x)", alphabet.name(*label), atom(*arg))
                }
                Rule::ArgRight { label, arg } => {
                    format!("{}(x,{})", alphabet.name(*label), atom(*arg))
                }
            };
            s.push_str(&format!("A{i} -> {rhs}\n"));
        }
        s
    }

    pub fn from_text(src: &str, alphabet: &Alphabet) -> Result<Self, TslpError> {
        let mut rules: HashMap<usize, Rule> = HashMap::new();
        for (lineno, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| TslpError::Parse { line: lineno + 1, msg: msg.to_string() };
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| err("missing '->'"))?;
            let lhs = lhs.trim();
            let idx: usize = lhs
                .strip_prefix('A')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("left-hand side must be A<n>"))?;
            let rule = parse_rule(rhs.trim(), alphabet)
                .ok_or_else(|| err("unrecognized rule shape"))?;
            if rules.insert(idx, rule).is_some() {
                return Err(err("duplicate rule"));
            }
        }
        let m = rules.keys().max().map(|k| k + 1).unwrap_or(0);
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            out.push(*rules.get(&i).ok_or(TslpError::Parse {
                line: 0,
                msg: format!("missing rule for A{i}"),
            })?);
        }
        Ok(NormalTslp { rules: out })
    }
}

fn atom_symbol(a: Atom) -> Symbol {
    match a {
        Atom::Term(l) => Symbol::Term(l),
        Atom::Nt(j) => Symbol::Nt(j),
    }
}

fn spend(budget: &mut u64, amount: u64) -> Result<(), TslpError> {
    if *budget < amount {
        return Err(TslpError::BudgetExceeded(*budget));
    }
    *budget -= amount;
    Ok(())
}

fn parse_rule(rhs: &str, alphabet: &Alphabet) -> Option<Rule> {
    let parse_atom = |s: &str| -> Option<Atom> {
        let s = s.trim();
        if let Some(n) = s.strip_prefix('A') {
            if let Ok(j) = n.parse() {
                return Some(Atom::Nt(j));
            }
        }
        alphabet.index_of(s).map(Atom::Term)
    };
    let rhs = rhs.trim();
    let Some(open) = rhs.find('(') else {
        // bare label: singleton rule
        return alphabet.index_of(rhs).map(Rule::Singleton);
    };
    if !rhs.ends_with(')') {
        return None;
    }
    let head = rhs[..open].trim();
    let inner = &rhs[open + 1..rhs.len() - 1];
    if let Some(n) = head.strip_prefix('A') {
        let outer: usize = n.parse().ok()?;
        // A_j(A_k(x)) or A_j(alpha)
        if let Some(iopen) = inner.find('(') {
            if inner.ends_with(')') && inner[iopen + 1..inner.len() - 1].trim() == "x" {
                let k: usize = inner[..iopen].trim().strip_prefix('A')?.parse().ok()?;
                return Some(Rule::Compose { outer, inner: k });
            }
            return None;
        }
        return Some(Rule::Apply { ctx: outer, arg: parse_atom(inner)? });
    }
    let label = alphabet.index_of(head)?;
    let (left, right) = inner.split_once(',')?;
    match (left.trim(), right.trim()) {
        ("x", r) => Some(Rule::ArgRight { label, arg: parse_atom(r)? }),
        (l, "x") => Some(Rule::ArgLeft { label, arg: parse_atom(l)? }),
        _ => None,
    }
}

/// Derivation tree node: interior nodes carry nonterminal indices,
/// leaves carry terminal labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivationTree {
    Term(Label),
    Nt(usize, Box<DerivationTree>, Box<DerivationTree>),
}

impl DerivationTree {
    pub fn leaf_count(&self) -> u64 {
        match self {
            DerivationTree::Term(_) => 1,
            DerivationTree::Nt(_, l, r) => l.leaf_count() + r.leaf_count(),
        }
    }
}

// ---------------------------------------------------------------------------
// Compositional fingerprints. A tree hashes to a scalar; a context, having
// exactly one hole, hashes to an affine map x -> M·x + K applied to the
// hash of whatever fills the hole. Composition and substitution are then
// O(1), so distinctness of val(A_i) never needs expansion. Two independent
// 61-bit Mersenne-prime channels keep collisions negligible.
// ---------------------------------------------------------------------------

const P: u128 = (1 << 61) - 1;

fn mmul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P) as u64
}

fn madd(a: u64, b: u64) -> u64 {
    ((a as u128 + b as u128) % P) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Channel {
    alpha: u64,
    beta: u64,
    gamma: u64,
    delta: u64,
}

const CHANNELS: [Channel; 2] = [
    Channel {
        alpha: 0x16a0_9e66_7f3b_cc90,
        beta: 0x1bb6_7ae8_584c_aa73,
        gamma: 0x1398_8e14_0971_2c02,
        delta: 0x1e37_79b9_7f4a_7c15,
    },
    Channel {
        alpha: 0x1f83_d9ab_fb41_bd6b,
        beta: 0x05be_0cd1_9137_e217,
        gamma: 0x110e_527f_ade6_82d1,
        delta: 0x09b0_5688_c2b3_e6c1,
    },
];

/// Tree value (`mul = 1, add = h`) or context affine map per channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    mul: [u64; 2],
    add: [u64; 2],
    is_ctx: bool,
}

impl Default for Fingerprint {
    fn default() -> Self {
        Fingerprint { mul: [1, 1], add: [0, 0], is_ctx: false }
    }
}

impl Fingerprint {
    pub fn leaf(label: Label) -> Fingerprint {
        let mut add = [0u64; 2];
        for (i, ch) in CHANNELS.iter().enumerate() {
            add[i] = mmul(ch.delta, label as u64 + 1);
        }
        Fingerprint { mul: [0, 0], add, is_ctx: false }
    }

    // h = (h_left + α)·(h_right + β) + γ·(label+1): bilinear in the two
    // children, so sibling subtrees mix multiplicatively while each
    // single child still enters affinely (which contexts rely on).
    pub fn node(label: Label, left: &Fingerprint, right: &Fingerprint) -> Fingerprint {
        debug_assert!(!left.is_ctx && !right.is_ctx);
        let mut add = [0u64; 2];
        for (i, ch) in CHANNELS.iter().enumerate() {
            let h = mmul(madd(left.add[i], ch.alpha), madd(right.add[i], ch.beta));
            add[i] = madd(h, mmul(ch.gamma, label as u64 + 1));
        }
        Fingerprint { mul: [0, 0], add, is_ctx: false }
    }

    pub fn param() -> Fingerprint {
        Fingerprint { mul: [1, 1], add: [0, 0], is_ctx: true }
    }

    /// `a(x, arg)` when `hole_left`, otherwise `a(arg, x)`.
    pub fn hole_ctx(label: Label, arg: &Fingerprint, hole_left: bool) -> Fingerprint {
        let mut mul = [0u64; 2];
        let mut add = [0u64; 2];
        for (i, ch) in CHANNELS.iter().enumerate() {
            // substituting x for the hole child in the node hash gives
            // (x + α)·m + γ(label+1) or m·(x + β) + γ(label+1)
            let (m, shift) = if hole_left {
                (madd(arg.add[i], ch.beta), ch.alpha)
            } else {
                (madd(arg.add[i], ch.alpha), ch.beta)
            };
            mul[i] = m;
            add[i] = madd(mmul(shift, m), mmul(ch.gamma, label as u64 + 1));
        }
        Fingerprint { mul, add, is_ctx: true }
    }

    /// Context applied to a tree: the resulting tree's value.
    pub fn apply(&self, arg: &Fingerprint) -> Fingerprint {
        debug_assert!(self.is_ctx && !arg.is_ctx);
        let mut add = [0u64; 2];
        for i in 0..2 {
            add[i] = madd(mmul(self.mul[i], arg.add[i]), self.add[i]);
        }
        Fingerprint { mul: [0, 0], add, is_ctx: false }
    }

    /// `self[inner]`: composition of two contexts.
    pub fn compose(&self, inner: &Fingerprint) -> Fingerprint {
        debug_assert!(self.is_ctx && inner.is_ctx);
        let mut mul = [0u64; 2];
        let mut add = [0u64; 2];
        for i in 0..2 {
            mul[i] = mmul(self.mul[i], inner.mul[i]);
            add[i] = madd(mmul(self.mul[i], inner.add[i]), self.add[i]);
        }
        Fingerprint { mul, add, is_ctx: true }
    }

    pub fn of_tree(t: &Tree) -> Fingerprint {
        match t {
            Tree::Leaf(a) => Fingerprint::leaf(*a),
            Tree::Node(a, l, r) => {
                Fingerprint::node(*a, &Fingerprint::of_tree(l), &Fingerprint::of_tree(r))
            }
        }
    }

    pub fn of_context(c: &Context) -> Fingerprint {
        match c {
            Context::Param => Fingerprint::param(),
            Context::HoleLeft(a, c0, t1) => {
                let outer = Fingerprint::hole_ctx(*a, &Fingerprint::of_tree(t1), true);
                outer.compose(&Fingerprint::of_context(c0))
            }
            Context::HoleRight(a, t0, c1) => {
                let outer = Fingerprint::hole_ctx(*a, &Fingerprint::of_tree(t0), false);
                outer.compose(&Fingerprint::of_context(c1))
            }
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Term(l) => write!(f, "t{l}"),
            Symbol::Nt(i) => write!(f, "A{i}"),
        }
    }
}

/// Right-hand sides of general TSLPs: trees/contexts over Σ ∪ V ∪ {x}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GTerm {
    Leaf(Label),
    Node(Label, Box<GTerm>, Box<GTerm>),
    /// Rank-0 nonterminal occurrence.
    Nt(usize),
    /// Rank-1 nonterminal applied to a subterm.
    Apply(usize, Box<GTerm>),
    Param,
}

impl GTerm {
    fn param_count(&self) -> usize {
        match self {
            GTerm::Param => 1,
            GTerm::Leaf(_) | GTerm::Nt(_) => 0,
            GTerm::Node(_, l, r) => l.param_count() + r.param_count(),
            GTerm::Apply(_, s) => s.param_count(),
        }
    }

    fn referenced(&self, out: &mut Vec<usize>) {
        match self {
            GTerm::Nt(i) => out.push(*i),
            GTerm::Apply(i, s) => {
                out.push(*i);
                s.referenced(out);
            }
            GTerm::Node(_, l, r) => {
                l.referenced(out);
                r.referenced(out);
            }
            _ => {}
        }
    }
}

/// General TSLP: nonterminals of rank 0 or 1 with unrestricted
/// tree/context right-hand sides; `A_0` is the start symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralTslp {
    pub ranks: Vec<u8>,
    pub rhs: Vec<GTerm>,
}

impl GeneralTslp {
    pub fn new(ranks: Vec<u8>, rhs: Vec<GTerm>) -> Result<Self, TslpError> {
        let g = GeneralTslp { ranks, rhs };
        g.validate()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    fn validate(&self) -> Result<(), TslpError> {
        if self.ranks.len() != self.rhs.len() || self.rhs.is_empty() {
            return Err(TslpError::BadIndex(self.rhs.len()));
        }
        if self.ranks[0] != 0 {
            return Err(TslpError::RankMismatch(0));
        }
        for (i, term) in self.rhs.iter().enumerate() {
            let params = term.param_count();
            let want = self.ranks[i] as usize;
            if params != want {
                return Err(TslpError::RankMismatch(i));
            }
            let mut refs = Vec::new();
            term.referenced(&mut refs);
            for j in refs {
                if j >= self.rhs.len() {
                    return Err(TslpError::BadIndex(j));
                }
            }
            // rank-1 occurrences must be Apply; rank-0 must be Nt
            if !self.check_occurrence_ranks(term) {
                return Err(TslpError::RankMismatch(i));
            }
        }
        self.topo_order()?;
        Ok(())
    }

    fn check_occurrence_ranks(&self, t: &GTerm) -> bool {
        match t {
            GTerm::Nt(i) => self.ranks[*i] == 0,
            GTerm::Apply(i, s) => self.ranks[*i] == 1 && self.check_occurrence_ranks(s),
            GTerm::Node(_, l, r) => {
                self.check_occurrence_ranks(l) && self.check_occurrence_ranks(r)
            }
            _ => true,
        }
    }

    pub fn topo_order(&self) -> Result<Vec<usize>, TslpError> {
        let mut state = vec![0u8; self.len()];
        let mut order = Vec::new();
        fn visit(
            g: &GeneralTslp,
            i: usize,
            state: &mut [u8],
            order: &mut Vec<usize>,
        ) -> Result<(), TslpError> {
            if state[i] == 2 {
                return Ok(());
            }
            if state[i] == 1 {
                return Err(TslpError::Cyclic(i));
            }
            state[i] = 1;
            let mut refs = Vec::new();
            g.rhs[i].referenced(&mut refs);
            for j in refs {
                visit(g, j, state, order)?;
            }
            state[i] = 2;
            order.push(i);
            Ok(())
        }
        for i in 0..self.len() {
            visit(self, i, &mut state, &mut order)?;
        }
        Ok(order)
    }

    /// Leaf counts of all val(A_i) without expansion.
    pub fn val_sizes(&self, budget: u64) -> Result<Vec<u64>, TslpError> {
        let order = self.topo_order()?;
        let mut sizes = vec![0u64; self.len()];
        for i in order {
            sizes[i] = self.term_size(&self.rhs[i], &sizes, budget)?;
        }
        Ok(sizes)
    }

    fn term_size(&self, t: &GTerm, sizes: &[u64], budget: u64) -> Result<u64, TslpError> {
        let over = || TslpError::BudgetExceeded(budget);
        let s = match t {
            GTerm::Leaf(_) => 1,
            GTerm::Param => 0,
            GTerm::Nt(i) => sizes[*i],
            GTerm::Apply(i, sub) => sizes[*i]
                .checked_add(self.term_size(sub, sizes, budget)?)
                .ok_or_else(over)?,
            GTerm::Node(_, l, r) => self
                .term_size(l, sizes, budget)?
                .checked_add(self.term_size(r, sizes, budget)?)
                .ok_or_else(over)?,
        };
        if s > budget {
            return Err(over());
        }
        Ok(s)
    }

    /// `val(G)`.
    pub fn val(&self, budget: u64) -> Result<Tree, TslpError> {
        self.val_sizes(budget)?;
        let mut b = budget.saturating_mul(2);
        match self.eval_term(&self.rhs[0], None, &mut b)? {
            TreeOrContext::Tree(t) => Ok(t),
            TreeOrContext::Context(_) => Err(TslpError::RankMismatch(0)),
        }
    }

    // Evaluates a term; `hole` carries the already-evaluated tree that
    // fills the parameter, so contexts never get materialized.
    fn eval_term(
        &self,
        t: &GTerm,
        hole: Option<&Tree>,
        budget: &mut u64,
    ) -> Result<TreeOrContext, TslpError> {
        match t {
            GTerm::Leaf(a) => {
                spend(budget, 1)?;
                Ok(TreeOrContext::Tree(Tree::Leaf(*a)))
            }
            GTerm::Param => match hole {
                Some(tree) => Ok(TreeOrContext::Tree(tree.clone())),
                None => Ok(TreeOrContext::Context(Context::Param)),
            },
            GTerm::Nt(i) => self.eval_term(&self.rhs[*i], None, budget),
            GTerm::Apply(i, sub) => {
                let arg = self.eval_term(sub, hole, budget)?;
                match arg {
                    TreeOrContext::Tree(arg_t) => {
                        self.eval_term(&self.rhs[*i], Some(&arg_t), budget)
                    }
                    TreeOrContext::Context(arg_c) => {
                        // materialize the context of A_i, then compose
                        let ctx = match self.eval_term(&self.rhs[*i], None, budget)? {
                            TreeOrContext::Context(c) => c,
                            TreeOrContext::Tree(_) => return Err(TslpError::RankMismatch(*i)),
                        };
                        Ok(TreeOrContext::Context(crate::trees::compose(&ctx, &arg_c)))
                    }
                }
            }
            GTerm::Node(a, l, r) => {
                spend(budget, 1)?;
                let lv = self.eval_term(l, hole, budget)?;
                let rv = self.eval_term(r, hole, budget)?;
                match (lv, rv) {
                    (TreeOrContext::Tree(lt), TreeOrContext::Tree(rt)) => {
                        Ok(TreeOrContext::Tree(Tree::node(*a, lt, rt)))
                    }
                    (TreeOrContext::Context(lc), TreeOrContext::Tree(rt)) => {
                        Ok(TreeOrContext::Context(Context::HoleLeft(
                            *a,
                            Box::new(lc),
                            Box::new(rt),
                        )))
                    }
                    (TreeOrContext::Tree(lt), TreeOrContext::Context(rc)) => {
                        Ok(TreeOrContext::Context(Context::HoleRight(
                            *a,
                            Box::new(lt),
                            Box::new(rc),
                        )))
                    }
                    _ => Err(TslpError::RankMismatch(0)),
                }
            }
        }
    }
}
