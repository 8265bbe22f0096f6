//! Unranked labelled trees and forests, the first-child/next-sibling
//! encoding into full binary trees, entropy of unranked trees, XML
//! structure ingestion and Table-1-style profiling.

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

use crate::entropy::tree_entropy;
use crate::trees::{Alphabet, Label, Tree};

/// Reserved padding label for the fcns encoding.
pub const BOX: &str = "\u{25a1}";

#[derive(Debug, Error)]
pub enum UnrankedError {
    #[error("XML error: {0}")]
    Xml(String),
    #[error("document has no element")]
    Empty,
    #[error("unknown entity reference &{0};")]
    UnknownEntity(String),
    #[error("fcns shape violation: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnrankedTree {
    pub label: Label,
    pub children: Vec<UnrankedTree>,
}

pub type UnrankedForest = Vec<UnrankedTree>;

impl UnrankedTree {
    pub fn new(label: Label, children: Vec<UnrankedTree>) -> Self {
        UnrankedTree { label, children }
    }

    pub fn leaf(label: Label) -> Self {
        UnrankedTree { label, children: Vec::new() }
    }

    /// Number of labelled nodes.
    pub fn size(&self) -> u64 {
        1 + self.children.iter().map(UnrankedTree::size).sum::<u64>()
    }
}

pub fn forest_size(f: &[UnrankedTree]) -> u64 {
    f.iter().map(UnrankedTree::size).sum()
}

/// First-child/next-sibling encoding: fcns(ε) = □ and
/// fcns(a(f)·g) = a(fcns(f), fcns(g)).
pub fn fcns(f: &[UnrankedTree], box_label: Label) -> Tree {
    match f.split_first() {
        None => Tree::Leaf(box_label),
        Some((head, tail)) => Tree::node(
            head.label,
            fcns(&head.children, box_label),
            fcns(tail, box_label),
        ),
    }
}

/// Inverse of [`fcns`]; requires every □ to be a leaf and every non-□
/// node to be internal.
pub fn inverse_fcns(t: &Tree, box_label: Label) -> Result<UnrankedForest, UnrankedError> {
    match t {
        Tree::Leaf(l) if *l == box_label => Ok(Vec::new()),
        Tree::Leaf(l) => Err(UnrankedError::Shape(format!(
            "non-padding leaf with label index {l}"
        ))),
        Tree::Node(l, _, _) if *l == box_label => {
            Err(UnrankedError::Shape("padding label on an internal node".into()))
        }
        Tree::Node(l, first_child, siblings) => {
            let children = inverse_fcns(first_child, box_label)?;
            let mut forest = vec![UnrankedTree::new(*l, children)];
            forest.extend(inverse_fcns(siblings, box_label)?);
            Ok(forest)
        }
    }
}

/// H_k of an unranked tree, defined as H_k(fcns(t)) with □ padding.
pub fn unranked_entropy(t: &UnrankedTree, k: usize, box_label: Label) -> f64 {
    let binary = fcns(std::slice::from_ref(t), box_label);
    tree_entropy(&binary, k, box_label)
}

fn check_entities(text: &[u8]) -> Result<(), UnrankedError> {
    let mut i = 0;
    while i < text.len() {
        if text[i] == b'&' {
            let end = text[i + 1..]
                .iter()
                .position(|&b| b == b';')
                .map(|p| i + 1 + p);
            let name = match end {
                Some(e) => String::from_utf8_lossy(&text[i + 1..e]).into_owned(),
                None => String::from_utf8_lossy(&text[i + 1..]).into_owned(),
            };
            let builtin = matches!(name.as_str(), "amp" | "lt" | "gt" | "apos" | "quot")
                || name.starts_with('#');
            if !builtin {
                return Err(UnrankedError::UnknownEntity(name));
            }
            i = end.map(|e| e + 1).unwrap_or(text.len());
        } else {
            i += 1;
        }
    }
    Ok(())
}

/// Parses the element structure of an XML document: labels are tag
/// names as written; text, attributes, comments, PIs and the
/// declaration are discarded.
pub fn ingest_xml(bytes: &[u8]) -> Result<(UnrankedTree, Alphabet), UnrankedError> {
    struct PNode {
        label: String,
        children: Vec<PNode>,
    }
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().check_end_names = true;
    let mut stack: Vec<PNode> = Vec::new();
    let mut root: Option<PNode> = None;
    let mut buf = Vec::new();
    loop {
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| UnrankedError::Xml(e.to_string()))?;
        match ev {
            Event::Start(e) => {
                let label = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                stack.push(PNode { label, children: Vec::new() });
            }
            Event::Empty(e) => {
                let label = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                let node = PNode { label, children: Vec::new() };
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None if root.is_none() => root = Some(node),
                    None => return Err(UnrankedError::Xml("multiple root elements".into())),
                }
            }
            Event::End(_) => {
                let node = stack
                    .pop()
                    .ok_or_else(|| UnrankedError::Xml("unmatched end tag".into()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None if root.is_none() => root = Some(node),
                    None => return Err(UnrankedError::Xml("multiple root elements".into())),
                }
            }
            Event::Text(t) => check_entities(&t)?,
            Event::CData(_) | Event::Comment(_) | Event::Decl(_) | Event::PI(_)
            | Event::DocType(_) => {}
            Event::Eof => break,
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(UnrankedError::Xml("unclosed element".into()));
    }
    let root = root.ok_or(UnrankedError::Empty)?;
    // alphabet: sorted distinct tag names, then the reserved padding label
    let mut names = Vec::new();
    fn collect(n: &PNode, names: &mut Vec<String>) {
        names.push(n.label.clone());
        for c in &n.children {
            collect(c, names);
        }
    }
    collect(&root, &mut names);
    names.sort();
    names.dedup();
    let box_index = names.len();
    names.push(BOX.to_string());
    let alphabet = Alphabet::new(names, box_index)
        .map_err(|e| UnrankedError::Xml(e.to_string()))?;
    fn convert(n: &PNode, al: &Alphabet) -> UnrankedTree {
        UnrankedTree::new(
            al.index_of(&n.label).expect("label collected above"),
            n.children.iter().map(|c| convert(c, al)).collect(),
        )
    }
    Ok((convert(&root, &alphabet), alphabet))
}

/// One profile row: entropy of the document at a single order k.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub n: u64,
    /// Distinct source labels, excluding □.
    pub sigma: usize,
    /// Worst-case size w = (2 + log₂σ)·n in bits.
    pub w_bits: f64,
    pub k: usize,
    pub hk_bits: f64,
    pub quotient_pct: f64,
}

/// Table-1-style profile of a document for the requested orders.
pub fn profile(t: &UnrankedTree, alphabet: &Alphabet, ks: &[usize]) -> Vec<ProfileRow> {
    let n = t.size();
    let sigma = alphabet.size() - 1;
    let w_bits = (2.0 + (sigma as f64).log2()) * n as f64;
    ks.iter()
        .map(|&k| {
            let hk = unranked_entropy(t, k, alphabet.box_label());
            let quotient = if w_bits > 0.0 { 100.0 * hk / w_bits } else { 0.0 };
            ProfileRow { n, sigma, w_bits, k, hk_bits: hk, quotient_pct: quotient }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::tree_to_string;

    /// Forest a(bc)d(e) over labels a..e (indices 0..4).
    fn example_forest() -> UnrankedForest {
        vec![
            UnrankedTree::new(0, vec![UnrankedTree::leaf(1), UnrankedTree::leaf(2)]),
            UnrankedTree::new(3, vec![UnrankedTree::leaf(4)]),
        ]
    }

    #[test]
    fn fcns_examples() {
        let box_label = 5;
        let t = fcns(&example_forest(), box_label);
        // a(b(□, c(□,□)), d(e(□,□), □))
        let al = Alphabet::new(
            ["a", "b", "c", "d", "e", "#"].iter().map(|s| s.to_string()).collect(),
            5,
        )
        .unwrap();
        assert_eq!(tree_to_string(&t, &al), "a(b(#,c(#,#)),d(e(#,#),#))");
        assert_eq!(fcns(&[], 0), Tree::Leaf(0));
        assert_eq!(
            fcns(&[UnrankedTree::leaf(0)], 1),
            Tree::node(0, Tree::Leaf(1), Tree::Leaf(1))
        );
    }

    #[test]
    fn fcns_size_relation() {
        // single tree with n nodes -> n + 1 leaves in the binary encoding
        let t = example_forest().remove(0);
        let n = t.size();
        let b = fcns(std::slice::from_ref(&t), 9);
        assert_eq!(b.size(), n + 1);
    }

    #[test]
    fn inverse_fcns_roundtrip() {
        let f = example_forest();
        let b = fcns(&f, 7);
        assert_eq!(inverse_fcns(&b, 7).unwrap(), f);
        assert_eq!(inverse_fcns(&Tree::Leaf(7), 7).unwrap(), Vec::new());
        // shape violations
        assert!(inverse_fcns(&Tree::Leaf(0), 7).is_err());
        assert!(inverse_fcns(&Tree::node(7, Tree::Leaf(7), Tree::Leaf(7)), 7).is_err());
    }

    #[test]
    fn entropy_of_small_documents() {
        // single node a: every history row is a point distribution
        let t = UnrankedTree::leaf(0);
        assert_eq!(unranked_entropy(&t, 1, 1), 0.0);
        // chain a -> a -> a, k = 1: brute force over the fcns tree
        let chain = UnrankedTree::new(
            0,
            vec![UnrankedTree::new(0, vec![UnrankedTree::leaf(0)])],
        );
        let b = fcns(std::slice::from_ref(&chain), 1);
        let direct = tree_entropy(&b, 1, 1);
        assert!((unranked_entropy(&chain, 1, 1) - direct).abs() < 1e-12);
        // k = 0 equals the (label, degree) multiset entropy of fcns(t)
        let h0 = unranked_entropy(&chain, 0, 1);
        // fcns(chain) = a(a(a(□,□),□),□): pairs (a,2) x3 and (□,0) x4
        let expected: f64 = 3.0 * (7f64 / 3.0).log2() + 4.0 * (7f64 / 4.0).log2();
        assert!((h0 - expected).abs() < 1e-9);
    }

    #[test]
    fn ingest_xml_examples() {
        let (t, al) = ingest_xml(b"<a><b/><c/></a>").unwrap();
        assert_eq!(al.labels(), ["a", "b", "c", BOX]);
        assert_eq!(al.box_label(), 3);
        assert_eq!(
            t,
            UnrankedTree::new(0, vec![UnrankedTree::leaf(1), UnrankedTree::leaf(2)])
        );
        let (t2, al2) = ingest_xml(b"<a>text</a>").unwrap();
        assert_eq!(t2, UnrankedTree::leaf(0));
        assert_eq!(al2.size(), 2);
        let (t3, _) = ingest_xml(br#"<a b="1"><a/></a>"#).unwrap();
        assert_eq!(t3, UnrankedTree::new(0, vec![UnrankedTree::leaf(0)]));
    }

    #[test]
    fn ingest_xml_rejections() {
        assert!(ingest_xml(b"<a><b></a>").is_err());
        assert!(ingest_xml(b"").is_err());
        assert!(matches!(
            ingest_xml(b"<a>&unknown;</a>"),
            Err(UnrankedError::UnknownEntity(_))
        ));
        // the five built-ins and character references pass
        assert!(ingest_xml(b"<a>&amp;&#65;</a>").is_ok());
    }

    #[test]
    fn profile_values() {
        let (t, al) = ingest_xml(b"<a><b/></a>").unwrap();
        let rows = profile(&t, &al, &[0, 1]);
        assert_eq!(rows[0].n, 2);
        assert_eq!(rows[0].sigma, 2);
        assert!((rows[0].w_bits - 6.0).abs() < 1e-12);
        // quotients are non-increasing in k
        assert!(rows[1].quotient_pct <= rows[0].quotient_pct + 1e-12);
        // single-node document: zero entropy for every positive order
        let (single, al1) = ingest_xml(b"<a/>").unwrap();
        for row in profile(&single, &al1, &[1, 2, 3]) {
            assert_eq!(row.hk_bits, 0.0);
            assert_eq!(row.quotient_pct, 0.0);
        }
    }
}
