//! Labelled full binary trees, contexts with a single parameter leaf,
//! node addressing by bit strings, k-histories and small-scale enumerators.

use std::fmt;

use thiserror::Error;

/// Index into an [`Alphabet`].
pub type Label = usize;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("alphabet labels must be distinct and non-empty")]
    BadAlphabet,
    #[error("box index {0} out of range")]
    BadBoxIndex(usize),
    #[error("address {0} not in tree")]
    AddressNotInTree(NodeAddr),
    #[error("enumeration budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Ordered label set with a designated padding symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    box_index: usize,
}

impl Alphabet {
    pub fn new(labels: Vec<String>, box_index: usize) -> Result<Self, TreeError> {
        if labels.is_empty() {
            return Err(TreeError::BadAlphabet);
        }
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(TreeError::BadAlphabet);
            }
        }
        if box_index >= labels.len() {
            return Err(TreeError::BadBoxIndex(box_index));
        }
        Ok(Alphabet { labels, box_index })
    }

    /// Padding symbol defaults to the first label in the ordering.
    pub fn from_labels(labels: Vec<String>) -> Result<Self, TreeError> {
        Alphabet::new(labels, 0)
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn box_label(&self) -> Label {
        self.box_index
    }

    pub fn set_box(&mut self, idx: usize) -> Result<(), TreeError> {
        if idx >= self.labels.len() {
            return Err(TreeError::BadBoxIndex(idx));
        }
        self.box_index = idx;
        Ok(())
    }

    pub fn name(&self, l: Label) -> &str {
        &self.labels[l]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, name: &str) -> Option<Label> {
        self.labels.iter().position(|l| l == name)
    }
}

/// Full binary tree; every node carries a label, internal nodes have
/// exactly two children. Size `|t|` counts leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf(Label),
    Node(Label, Box<Tree>, Box<Tree>),
}

/// Binary tree with exactly one parameter leaf. The variant tells on
/// which side of the root the parameter lives, so the invariant is
/// structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Context {
    Param,
    /// `a(c, t)` — parameter in the left subtree.
    HoleLeft(Label, Box<Context>, Box<Tree>),
    /// `a(t, c)` — parameter in the right subtree.
    HoleRight(Label, Box<Tree>, Box<Context>),
}

impl Tree {
    pub fn leaf(l: Label) -> Tree {
        Tree::Leaf(l)
    }

    pub fn node(l: Label, left: Tree, right: Tree) -> Tree {
        Tree::Node(l, Box::new(left), Box::new(right))
    }

    /// Number of leaves.
    pub fn size(&self) -> u64 {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node(_, l, r) => l.size() + r.size(),
        }
    }

    /// Total node count, `2|t| - 1`.
    pub fn node_count(&self) -> u64 {
        2 * self.size() - 1
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }
}

impl Context {
    /// Leaf count excluding the parameter; `|c| = |c[a]| - 1`.
    pub fn size(&self) -> u64 {
        match self {
            Context::Param => 0,
            Context::HoleLeft(_, c, t) => c.size() + t.size(),
            Context::HoleRight(_, t, c) => t.size() + c.size(),
        }
    }
}

/// Path from the root as a bit string: 0 = left, 1 = right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeAddr(pub Vec<u8>);

impl NodeAddr {
    pub fn root() -> NodeAddr {
        NodeAddr(Vec::new())
    }

    pub fn from_bits(bits: &[u8]) -> NodeAddr {
        NodeAddr(bits.to_vec())
    }

    pub fn child(&self, dir: u8) -> NodeAddr {
        let mut bits = self.0.clone();
        bits.push(dir);
        NodeAddr(bits)
    }
}

impl fmt::Display for NodeAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// A node's label together with its child count (0 or 2).
pub type LabelDegree = (Label, u8);

/// Exactly `k` (label, direction) steps, left-padded with `(□, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KHistory(pub Vec<(Label, u8)>);

/// Either a tree or a context, for operations defined on both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeOrContext {
    Tree(Tree),
    Context(Context),
}

fn collect_tree_addrs(t: &Tree, prefix: &mut Vec<u8>, out: &mut Vec<NodeAddr>) {
    out.push(NodeAddr(prefix.clone()));
    if let Tree::Node(_, l, r) = t {
        prefix.push(0);
        collect_tree_addrs(l, prefix, out);
        prefix.pop();
        prefix.push(1);
        collect_tree_addrs(r, prefix, out);
        prefix.pop();
    }
}

fn collect_ctx_addrs(c: &Context, prefix: &mut Vec<u8>, out: &mut Vec<NodeAddr>) {
    match c {
        Context::Param => {}
        Context::HoleLeft(_, c0, t1) => {
            out.push(NodeAddr(prefix.clone()));
            prefix.push(0);
            collect_ctx_addrs(c0, prefix, out);
            prefix.pop();
            prefix.push(1);
            collect_tree_addrs(t1, prefix, out);
            prefix.pop();
        }
        Context::HoleRight(_, t0, c1) => {
            out.push(NodeAddr(prefix.clone()));
            prefix.push(0);
            collect_tree_addrs(t0, prefix, out);
            prefix.pop();
            prefix.push(1);
            collect_ctx_addrs(c1, prefix, out);
            prefix.pop();
        }
    }
}

/// The node set `V(s)` in preorder. For a context the parameter address
/// is excluded.
pub fn node_set(s: &TreeOrContext) -> Vec<NodeAddr> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    match s {
        TreeOrContext::Tree(t) => collect_tree_addrs(t, &mut prefix, &mut out),
        TreeOrContext::Context(c) => collect_ctx_addrs(c, &mut prefix, &mut out),
    }
    out
}

pub fn tree_node_set(t: &Tree) -> Vec<NodeAddr> {
    node_set(&TreeOrContext::Tree(t.clone()))
}

/// Label and degree of the node at `v`.
pub fn label_degree(s: &TreeOrContext, v: &NodeAddr) -> Result<LabelDegree, TreeError> {
    fn go_tree(t: &Tree, bits: &[u8]) -> Option<LabelDegree> {
        match (t, bits) {
            (Tree::Leaf(a), []) => Some((*a, 0)),
            (Tree::Node(a, _, _), []) => Some((*a, 2)),
            (Tree::Node(_, l, r), [b, rest @ ..]) => {
                go_tree(if *b == 0 { l } else { r }, rest)
            }
            _ => None,
        }
    }
    fn go_ctx(c: &Context, bits: &[u8]) -> Option<LabelDegree> {
        match (c, bits) {
            (Context::Param, _) => None,
            (Context::HoleLeft(a, _, _), []) | (Context::HoleRight(a, _, _), []) => {
                Some((*a, 2))
            }
            (Context::HoleLeft(_, c0, t1), [b, rest @ ..]) => {
                if *b == 0 { go_ctx(c0, rest) } else { go_tree(t1, rest) }
            }
            (Context::HoleRight(_, t0, c1), [b, rest @ ..]) => {
                if *b == 0 { go_tree(t0, rest) } else { go_ctx(c1, rest) }
            }
        }
    }
    let res = match s {
        TreeOrContext::Tree(t) => go_tree(t, &v.0),
        TreeOrContext::Context(c) => go_ctx(c, &v.0),
    };
    res.ok_or_else(|| TreeError::AddressNotInTree(v.clone()))
}

/// The address `ω(c)` of the parameter leaf.
pub fn param_addr(c: &Context) -> NodeAddr {
    let mut bits = Vec::new();
    let mut cur = c;
    loop {
        match cur {
            Context::Param => return NodeAddr(bits),
            Context::HoleLeft(_, c0, _) => {
                bits.push(0);
                cur = c0;
            }
            Context::HoleRight(_, _, c1) => {
                bits.push(1);
                cur = c1;
            }
        }
    }
}

/// Replace the parameter of `c` by the tree `t`; `|c[t]| = |c| + |t|`.
pub fn substitute(c: &Context, t: &Tree) -> Tree {
    match c {
        Context::Param => t.clone(),
        Context::HoleLeft(a, c0, t1) => {
            Tree::node(*a, substitute(c0, t), (**t1).clone())
        }
        Context::HoleRight(a, t0, c1) => {
            Tree::node(*a, (**t0).clone(), substitute(c1, t))
        }
    }
}

/// Replace the parameter of `c` by another context, yielding `c[c']`.
pub fn compose(c: &Context, inner: &Context) -> Context {
    match c {
        Context::Param => inner.clone(),
        Context::HoleLeft(a, c0, t1) => Context::HoleLeft(
            *a,
            Box::new(compose(c0, inner)),
            t1.clone(),
        ),
        Context::HoleRight(a, t0, c1) => Context::HoleRight(
            *a,
            t0.clone(),
            Box::new(compose(c1, inner)),
        ),
    }
}

/// Substitute on a tree-or-context value.
pub fn substitute_any(c: &Context, s: &TreeOrContext) -> TreeOrContext {
    match s {
        TreeOrContext::Tree(t) => TreeOrContext::Tree(substitute(c, t)),
        TreeOrContext::Context(inner) => TreeOrContext::Context(compose(c, inner)),
    }
}

/// Full (unpadded) history of the node `v`: the (label, direction) pairs
/// along the root-to-`v` path. `v` may be the parameter address of a context.
pub fn history(s: &TreeOrContext, v: &NodeAddr) -> Result<Vec<(Label, u8)>, TreeError> {
    let mut out = Vec::with_capacity(v.0.len());
    for i in 0..v.0.len() {
        let prefix = NodeAddr(v.0[..i].to_vec());
        let (label, deg) = label_degree(s, &prefix)?;
        if deg != 2 {
            return Err(TreeError::AddressNotInTree(v.clone()));
        }
        out.push((label, v.0[i]));
    }
    // the node itself must exist (or be the parameter of a context)
    match s {
        TreeOrContext::Tree(_) => {
            label_degree(s, v)?;
        }
        TreeOrContext::Context(c) => {
            if label_degree(s, v).is_err() && param_addr(c) != *v {
                return Err(TreeError::AddressNotInTree(v.clone()));
            }
        }
    }
    Ok(out)
}

/// The k-history `h_k(v)`: last `k` pairs of the path, left-padded
/// with `(□, 0)`.
pub fn k_history(
    s: &TreeOrContext,
    v: &NodeAddr,
    k: usize,
    box_label: Label,
) -> Result<KHistory, TreeError> {
    let h = history(s, v)?;
    let mut pairs = Vec::with_capacity(k);
    if h.len() >= k {
        pairs.extend_from_slice(&h[h.len() - k..]);
    } else {
        for _ in 0..k - h.len() {
            pairs.push((box_label, 0));
        }
        pairs.extend_from_slice(&h);
    }
    Ok(KHistory(pairs))
}

/// All trees with exactly `n` leaves over `alphabet`; count is
/// `σ^{2n-1} C_{n-1}`. Intended as a test oracle for small `n`.
pub fn enumerate_trees(n: u64, alphabet: &Alphabet, budget: u64) -> Result<Vec<Tree>, TreeError> {
    let sigma = alphabet.size();
    let mut out = Vec::new();
    enum_trees_into(n, sigma, budget, &mut out)?;
    Ok(out)
}

fn enum_trees_into(n: u64, sigma: usize, budget: u64, out: &mut Vec<Tree>) -> Result<(), TreeError> {
    if n == 1 {
        for a in 0..sigma {
            if out.len() as u64 >= budget {
                return Err(TreeError::BudgetExceeded(budget));
            }
            out.push(Tree::Leaf(a));
        }
        return Ok(());
    }
    for left_n in 1..n {
        let mut lefts = Vec::new();
        enum_trees_into(left_n, sigma, budget, &mut lefts)?;
        let mut rights = Vec::new();
        enum_trees_into(n - left_n, sigma, budget, &mut rights)?;
        for a in 0..sigma {
            for l in &lefts {
                for r in &rights {
                    if out.len() as u64 >= budget {
                        return Err(TreeError::BudgetExceeded(budget));
                    }
                    out.push(Tree::node(a, l.clone(), r.clone()));
                }
            }
        }
    }
    Ok(())
}

/// All contexts `c` with `|c| = n`, each exactly once.
pub fn enumerate_contexts(
    n: u64,
    alphabet: &Alphabet,
    budget: u64,
) -> Result<Vec<Context>, TreeError> {
    let sigma = alphabet.size();
    let mut out = Vec::new();
    enum_ctx_into(n, sigma, budget, &mut out)?;
    Ok(out)
}

fn enum_ctx_into(n: u64, sigma: usize, budget: u64, out: &mut Vec<Context>) -> Result<(), TreeError> {
    if n == 0 {
        if out.len() as u64 >= budget {
            return Err(TreeError::BudgetExceeded(budget));
        }
        out.push(Context::Param);
        return Ok(());
    }
    // |a(c,t)| = |a(t,c)| = |c| + |t| with |t| >= 1
    for tree_n in 1..=n {
        let ctx_n = n - tree_n;
        let mut trees = Vec::new();
        enum_trees_into(tree_n, sigma, budget, &mut trees)?;
        let mut ctxs = Vec::new();
        enum_ctx_into(ctx_n, sigma, budget, &mut ctxs)?;
        for a in 0..sigma {
            for c in &ctxs {
                for t in &trees {
                    if out.len() as u64 + 1 > budget {
                        return Err(TreeError::BudgetExceeded(budget));
                    }
                    out.push(Context::HoleLeft(a, Box::new(c.clone()), Box::new(t.clone())));
                    if out.len() as u64 + 1 > budget {
                        return Err(TreeError::BudgetExceeded(budget));
                    }
                    out.push(Context::HoleRight(a, Box::new(t.clone()), Box::new(c.clone())));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Term syntax: `a` for leaves, `a(L,R)` for internal nodes, `x` for the
// parameter. Labels match [A-Za-z_][A-Za-z0-9_]*; whitespace-insensitive.
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    labels: Vec<String>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src: src.as_bytes(), pos: 0, labels: Vec::new() }
    }

    fn err<T>(&self, msg: &str) -> Result<T, TreeError> {
        Err(TreeError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<(), TreeError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected '{}'", b as char))
        }
    }

    fn ident(&mut self) -> Result<String, TreeError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphabetic() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
        } else {
            self.err("expected identifier")
        }
    }

    fn intern(&mut self, name: String) -> usize {
        match self.labels.iter().position(|l| *l == name) {
            Some(i) => i,
            None => {
                self.labels.push(name);
                self.labels.len() - 1
            }
        }
    }

    // Parses a term that may contain the parameter `x`.
    fn term(&mut self) -> Result<RawTerm, TreeError> {
        let name = self.ident()?;
        if name == "x" {
            return Ok(RawTerm::Param);
        }
        let label = self.intern(name);
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let left = self.term()?;
            self.expect(b',')?;
            let right = self.term()?;
            self.expect(b')')?;
            Ok(RawTerm::Node(label, Box::new(left), Box::new(right)))
        } else {
            Ok(RawTerm::Leaf(label))
        }
    }

    fn finish(&mut self) -> Result<(), TreeError> {
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.err("trailing input");
        }
        Ok(())
    }
}

enum RawTerm {
    Param,
    Leaf(usize),
    Node(usize, Box<RawTerm>, Box<RawTerm>),
}

fn raw_to_tree(r: &RawTerm, remap: &[usize]) -> Result<Tree, TreeError> {
    match r {
        RawTerm::Param => Err(TreeError::Parse { pos: 0, msg: "unexpected parameter x in tree".into() }),
        RawTerm::Leaf(l) => Ok(Tree::Leaf(remap[*l])),
        RawTerm::Node(l, a, b) => Ok(Tree::node(
            remap[*l],
            raw_to_tree(a, remap)?,
            raw_to_tree(b, remap)?,
        )),
    }
}

fn raw_to_ctx(r: &RawTerm, remap: &[usize]) -> Result<Context, TreeError> {
    fn param_count(r: &RawTerm) -> usize {
        match r {
            RawTerm::Param => 1,
            RawTerm::Leaf(_) => 0,
            RawTerm::Node(_, a, b) => param_count(a) + param_count(b),
        }
    }
    match r {
        RawTerm::Param => Ok(Context::Param),
        RawTerm::Leaf(_) => Err(TreeError::Parse { pos: 0, msg: "context must contain x".into() }),
        RawTerm::Node(l, a, b) => match (param_count(a), param_count(b)) {
            (1, 0) => Ok(Context::HoleLeft(
                remap[*l],
                Box::new(raw_to_ctx(a, remap)?),
                Box::new(raw_to_tree(b, remap)?),
            )),
            (0, 1) => Ok(Context::HoleRight(
                remap[*l],
                Box::new(raw_to_tree(a, remap)?),
                Box::new(raw_to_ctx(b, remap)?),
            )),
            _ => Err(TreeError::Parse { pos: 0, msg: "context must contain exactly one x".into() }),
        },
    }
}

/// Remap from first-occurrence label order to sorted alphabet order; the
/// sorted ordering makes later codec output independent of term layout.
fn sorted_remap(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut sorted: Vec<String> = labels.to_vec();
    sorted.sort();
    let remap: Vec<usize> = labels
        .iter()
        .map(|l| sorted.iter().position(|s| s == l).unwrap())
        .collect();
    (sorted, remap)
}

/// Parse a tree in term syntax; labels are collected into a fresh
/// alphabet in sorted order, `□` defaulting to the first label.
pub fn parse_tree(src: &str) -> Result<(Tree, Alphabet), TreeError> {
    let mut p = Parser::new(src);
    let raw = p.term()?;
    p.finish()?;
    let (sorted, remap) = sorted_remap(&p.labels);
    let tree = raw_to_tree(&raw, &remap)?;
    Ok((tree, Alphabet::from_labels(sorted)?))
}

/// Parse a tree against an existing alphabet; unknown labels are an error.
pub fn parse_tree_with(src: &str, alphabet: &Alphabet) -> Result<Tree, TreeError> {
    let mut p = Parser::new(src);
    let raw = p.term()?;
    p.finish()?;
    let remap: Vec<usize> = p
        .labels
        .iter()
        .map(|l| alphabet.index_of(l).ok_or_else(|| TreeError::Parse {
            pos: 0,
            msg: format!("label '{l}' not in alphabet"),
        }))
        .collect::<Result<_, _>>()?;
    raw_to_tree(&raw, &remap)
}

/// Parse a context (exactly one `x`) collecting a fresh alphabet.
pub fn parse_context(src: &str) -> Result<(Context, Alphabet), TreeError> {
    let mut p = Parser::new(src);
    let raw = p.term()?;
    p.finish()?;
    let (sorted, remap) = sorted_remap(&p.labels);
    let ctx = raw_to_ctx(&raw, &remap)?;
    if sorted.is_empty() {
        // context `x` over an empty label set; give it a dummy alphabet
        return Ok((ctx, Alphabet::from_labels(vec!["a".into()])?));
    }
    Ok((ctx, Alphabet::from_labels(sorted)?))
}

pub fn tree_to_string(t: &Tree, alphabet: &Alphabet) -> String {
    match t {
        Tree::Leaf(a) => alphabet.name(*a).to_string(),
        Tree::Node(a, l, r) => format!(
            "{}({},{})",
            alphabet.name(*a),
            tree_to_string(l, alphabet),
            tree_to_string(r, alphabet)
        ),
    }
}

pub fn context_to_string(c: &Context, alphabet: &Alphabet) -> String {
    match c {
        Context::Param => "x".to_string(),
        Context::HoleLeft(a, c0, t1) => format!(
            "{}({},{})",
            alphabet.name(*a),
            context_to_string(c0, alphabet),
            tree_to_string(t1, alphabet)
        ),
        Context::HoleRight(a, t0, c1) => format!(
            "{}({},{})",
            alphabet.name(*a),
            tree_to_string(t0, alphabet),
            context_to_string(c1, alphabet)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> (Tree, Alphabet) {
        parse_tree("a(b(b(a,b),a),a(b,a))").unwrap()
    }

    #[test]
    fn node_set_of_example_tree() {
        let (t, _) = fig1();
        let addrs = tree_node_set(&t);
        let expect: Vec<NodeAddr> = ["", "0", "00", "000", "001", "01", "1", "10", "11"]
            .iter()
            .map(|s| NodeAddr(s.bytes().map(|b| b - b'0').collect()))
            .collect();
        let mut got = addrs.clone();
        got.sort();
        let mut want = expect.clone();
        want.sort();
        assert_eq!(got, want);
        // preorder: root first
        assert_eq!(addrs[0], NodeAddr::root());
        assert_eq!(addrs.len(), 9);
    }

    #[test]
    fn node_set_trivia() {
        let (leaf, _) = parse_tree("a").unwrap();
        assert_eq!(tree_node_set(&leaf), vec![NodeAddr::root()]);
        let (cx, _) = parse_context("x").unwrap();
        assert!(node_set(&TreeOrContext::Context(cx)).is_empty());
    }

    #[test]
    fn label_degree_reads() {
        let (t, al) = fig1();
        let a = al.index_of("a").unwrap();
        let s = TreeOrContext::Tree(t);
        assert_eq!(label_degree(&s, &NodeAddr::root()).unwrap(), (a, 2));
        assert_eq!(label_degree(&s, &NodeAddr::from_bits(&[0, 0, 0])).unwrap(), (a, 0));
        assert!(label_degree(&s, &NodeAddr::from_bits(&[0, 0, 0, 0])).is_err());
        let (leaf, al2) = parse_tree("a").unwrap();
        assert_eq!(
            label_degree(&TreeOrContext::Tree(leaf), &NodeAddr::root()).unwrap(),
            (al2.index_of("a").unwrap(), 0)
        );
    }

    #[test]
    fn param_addr_examples() {
        let (c, _) = parse_context("a(b(b(a,b),x),a(b,a))").unwrap();
        assert_eq!(param_addr(&c), NodeAddr::from_bits(&[0, 1]));
        let (c, _) = parse_context("x").unwrap();
        assert_eq!(param_addr(&c), NodeAddr::root());
        let (c, _) = parse_context("a(x,b)").unwrap();
        assert_eq!(param_addr(&c), NodeAddr::from_bits(&[0]));
    }

    #[test]
    fn substitute_examples() {
        // c=f(a,x), t=g(a,b) -> f(a,g(a,b))
        let shared = Alphabet::from_labels(
            vec!["a".into(), "b".into(), "f".into(), "g".into()],
        )
        .unwrap();
        let c = Context::HoleRight(
            shared.index_of("f").unwrap(),
            Box::new(Tree::Leaf(shared.index_of("a").unwrap())),
            Box::new(Context::Param),
        );
        let t = parse_tree_with("g(a,b)", &shared).unwrap();
        let got = substitute(&c, &t);
        let want = parse_tree_with("f(a,g(a,b))", &shared).unwrap();
        assert_eq!(got, want);
        assert_eq!(got.size(), c.size() + t.size());
        // identity context
        assert_eq!(substitute(&Context::Param, &t), t);
        // context into context
        let (ca, ala) = parse_context("a(x,b)").unwrap();
        let (cb, _) = parse_context("b(x,a)").unwrap();
        let composed = compose(&ca, &cb);
        let want = parse_context("a(b(x,a),b)").unwrap().0;
        assert_eq!(context_to_string(&composed, &ala), context_to_string(&want, &ala));
    }

    #[test]
    fn k_history_examples() {
        let (t, al) = fig1();
        let a = al.index_of("a").unwrap();
        let b = al.index_of("b").unwrap();
        let s = TreeOrContext::Tree(t);
        // (t, v=10, k=1, box=a) -> (a,0)
        assert_eq!(
            k_history(&s, &NodeAddr::from_bits(&[1, 0]), 1, a).unwrap(),
            KHistory(vec![(a, 0)])
        );
        // root with k=2 is pure padding
        assert_eq!(
            k_history(&s, &NodeAddr::root(), 2, a).unwrap(),
            KHistory(vec![(a, 0), (a, 0)])
        );
        // (t, 001, k=1) -> (b,1)
        assert_eq!(
            k_history(&s, &NodeAddr::from_bits(&[0, 0, 1]), 1, a).unwrap(),
            KHistory(vec![(b, 1)])
        );
    }

    #[test]
    fn k_history_truncation_property() {
        let (t, al) = fig1();
        let s = TreeOrContext::Tree(t);
        let box_label = al.box_label();
        for v in node_set(&s) {
            for k in 0..4usize {
                let hk = k_history(&s, &v, k, box_label).unwrap();
                let hk1 = k_history(&s, &v, k + 1, box_label).unwrap();
                assert_eq!(&hk1.0[1..], &hk.0[..]);
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        let a2 = Alphabet::from_labels(vec!["a".into(), "b".into()]).unwrap();
        let a1 = Alphabet::from_labels(vec!["a".into()]).unwrap();
        assert_eq!(enumerate_trees(2, &a2, 1_000_000).unwrap().len(), 8);
        assert_eq!(enumerate_trees(1, &a1, 1_000_000).unwrap().len(), 1);
        assert_eq!(enumerate_trees(3, &a1, 1_000_000).unwrap().len(), 2);
        // sigma^{2n-1} * C_{n-1} for n <= 5, sigma <= 2
        let catalan = [1u64, 1, 2, 5, 14];
        for (alphabet, sigma) in [(&a1, 1u64), (&a2, 2u64)] {
            for n in 1..=5u64 {
                let count = enumerate_trees(n, alphabet, 10_000_000).unwrap().len() as u64;
                assert_eq!(count, sigma.pow((2 * n - 1) as u32) * catalan[(n - 1) as usize]);
            }
        }
    }

    #[test]
    fn context_enumeration() {
        let a1 = Alphabet::from_labels(vec!["a".into()]).unwrap();
        let a2 = Alphabet::from_labels(vec!["a".into(), "b".into()]).unwrap();
        let c0 = enumerate_contexts(0, &a2, 1000).unwrap();
        assert_eq!(c0, vec![Context::Param]);
        assert_eq!(enumerate_contexts(1, &a1, 1000).unwrap().len(), 2);
        assert_eq!(enumerate_contexts(1, &a2, 1000).unwrap().len(), 8);
    }

    #[test]
    fn enumeration_budget() {
        let a2 = Alphabet::from_labels(vec!["a".into(), "b".into()]).unwrap();
        assert!(matches!(
            enumerate_trees(4, &a2, 10),
            Err(TreeError::BudgetExceeded(10))
        ));
    }

    #[test]
    fn sibling_property() {
        let a2 = Alphabet::from_labels(vec!["a".into(), "b".into()]).unwrap();
        for t in enumerate_trees(3, &a2, 100_000).unwrap() {
            let addrs = tree_node_set(&t);
            for w in &addrs {
                if !w.0.is_empty() {
                    let mut sib = w.0.clone();
                    let last = sib.pop().unwrap();
                    sib.push(1 - last);
                    assert!(addrs.contains(&NodeAddr(sib)));
                }
            }
        }
    }

    #[test]
    fn substituted_leaf_node_set() {
        let (c, _) = parse_context("a(b(b(a,b),x),a(b,a))").unwrap();
        let sub = substitute(&c, &Tree::Leaf(0));
        let mut vs = node_set(&TreeOrContext::Context(c.clone()));
        vs.push(param_addr(&c));
        vs.sort();
        let mut vt = tree_node_set(&sub);
        vt.sort();
        assert_eq!(vs, vt);
    }

    #[test]
    fn roundtrip_term_syntax() {
        let src = "a(b(b(a,b),a),a(b,a))";
        let (t, al) = parse_tree(src).unwrap();
        assert_eq!(tree_to_string(&t, &al), src);
    }
}
