//! Binary coding of normal-form TSLPs: the prefix-free code word
//! B(G) = w₀w₁w₂w₃w₄, enumerative multiset ranking for w₄, and a
//! byte-exact container format carrying the alphabet out of band.

use std::io::{self, Read, Write};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::trees::Alphabet;
use crate::tslp::{Atom, NormalTslp, Rule, Symbol};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("grammar is not in normal form: {0:?}")]
    NotNormalForm(Vec<String>),
    #[error("malformed code word: {0}")]
    Malformed(String),
    #[error("symbol multiplicities do not match the counts")]
    MultiplicityMismatch,
    #[error("rank {0} out of range for the given counts")]
    RankOutOfRange(BigUint),
    #[error("container format error: {0}")]
    Container(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Bit sequence with MSB-first byte packing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        BitString::default()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn extend(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn push_zeros(&mut self, n: usize) {
        self.bits.extend(std::iter::repeat(false).take(n));
    }

    /// Appends `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: &BigUint, width: usize) {
        for i in (0..width).rev() {
            self.bits.push(value.bit(i as u64));
        }
    }

    pub fn starts_with(&self, prefix: &BitString) -> bool {
        self.len() >= prefix.len() && self.bits[..prefix.len()] == prefix.bits[..]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; (self.len() + 7) / 8];
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], bit_len: usize) -> Option<Self> {
        if bit_len > bytes.len() * 8 {
            return None;
        }
        let bits = (0..bit_len)
            .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
            .collect();
        Some(BitString { bits })
    }

    pub fn from_str01(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(|bits| BitString { bits })
    }
}

impl std::fmt::Display for BitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Sequential bit reader over a `BitString`.
struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bits: &'a BitString) -> Self {
        BitReader { bits, pos: 0 }
    }

    fn next(&mut self) -> Result<bool, CodecError> {
        let b = self
            .bits
            .get(self.pos)
            .ok_or_else(|| CodecError::Malformed("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(b)
    }

    /// Reads zeros up to and including the terminating 1; returns the
    /// number of zeros.
    fn zeros_until_one(&mut self) -> Result<usize, CodecError> {
        let mut n = 0;
        while !self.next()? {
            n += 1;
        }
        Ok(n)
    }

    fn uint(&mut self, width: usize) -> Result<BigUint, CodecError> {
        let mut v = BigUint::zero();
        for _ in 0..width {
            v <<= 1u8;
            if self.next()? {
                v |= BigUint::one();
            }
        }
        Ok(v)
    }
}

/// Type of a normal-form rule: 0 for `A_j(α)`, 1 for `A_j(A_k(x))`,
/// 2 for `a(α,x)`, 3 for `a(x,α)`. The singleton rule has no type.
pub fn rule_type(rule: &Rule) -> Option<u8> {
    match rule {
        Rule::Singleton(_) => None,
        Rule::Apply { .. } => Some(0),
        Rule::Compose { .. } => Some(1),
        Rule::ArgLeft { .. } => Some(2),
        Rule::ArgRight { .. } => Some(3),
    }
}

/// Multiplicities η over the ordered alphabet a₁…a_σ, A₁…A_{m−1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolCounts {
    pub sigma: usize,
    /// η(a₁)…η(a_σ) followed by η(A₁)…η(A_{m−1}).
    pub counts: Vec<u64>,
}

impl SymbolCounts {
    pub fn of_word(word: &[Symbol], sigma: usize, m: usize) -> SymbolCounts {
        let mut counts = vec![0u64; sigma + m.saturating_sub(1)];
        for sym in word {
            match sym {
                Symbol::Term(l) => counts[*l] += 1,
                Symbol::Nt(i) => counts[sigma + i - 1] += 1,
            }
        }
        SymbolCounts { sigma, counts }
    }

    fn slot(&self, sym: &Symbol) -> Option<usize> {
        match sym {
            Symbol::Term(l) if *l < self.sigma => Some(*l),
            Symbol::Nt(i) if *i >= 1 && self.sigma + i - 1 < self.counts.len() => {
                Some(self.sigma + i - 1)
            }
            _ => None,
        }
    }

    fn symbol(&self, slot: usize) -> Symbol {
        if slot < self.sigma {
            Symbol::Term(slot)
        } else {
            Symbol::Nt(slot - self.sigma + 1)
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// |S| = n! / Π η(·)! : the number of distinct arrangements.
    pub fn arrangements(&self) -> BigUint {
        let mut num = BigUint::one();
        let mut placed = 0u64;
        // incremental multinomial: choose positions for each symbol class
        for &c in &self.counts {
            for j in 1..=c {
                placed += 1;
                num = num * placed / j;
            }
        }
        num
    }
}

/// Rank of `word` in the lexicographic enumeration of all arrangements
/// of `counts` (smallest arrangement has rank 0).
pub fn multiset_rank(word: &[Symbol], counts: &SymbolCounts) -> Result<BigUint, CodecError> {
    let mut remaining = counts.clone();
    {
        let check = SymbolCounts::of_word(
            word,
            counts.sigma,
            counts.counts.len() - counts.sigma + 1,
        );
        if check.counts != counts.counts {
            return Err(CodecError::MultiplicityMismatch);
        }
    }
    let mut rank = BigUint::zero();
    for sym in word {
        let slot = remaining
            .slot(sym)
            .ok_or(CodecError::MultiplicityMismatch)?;
        for smaller in 0..slot {
            if remaining.counts[smaller] > 0 {
                remaining.counts[smaller] -= 1;
                rank += remaining.arrangements();
                remaining.counts[smaller] += 1;
            }
        }
        remaining.counts[slot] -= 1;
    }
    Ok(rank)
}

/// Inverse of [`multiset_rank`].
pub fn multiset_unrank(rank: &BigUint, counts: &SymbolCounts) -> Result<Vec<Symbol>, CodecError> {
    if *rank >= counts.arrangements() {
        return Err(CodecError::RankOutOfRange(rank.clone()));
    }
    let mut remaining = counts.clone();
    let mut r = rank.clone();
    let n = counts.total() as usize;
    let mut word = Vec::with_capacity(n);
    for _ in 0..n {
        for slot in 0..remaining.counts.len() {
            if remaining.counts[slot] == 0 {
                continue;
            }
            remaining.counts[slot] -= 1;
            let below = remaining.arrangements();
            if r < below {
                word.push(remaining.symbol(slot));
                break;
            }
            r -= below;
            remaining.counts[slot] += 1;
        }
    }
    Ok(word)
}

fn ceil_log2(n: &BigUint) -> usize {
    if n <= &BigUint::one() {
        return 0;
    }
    let minus_one = n - BigUint::one();
    minus_one.bits() as usize
}

/// Component lengths of B(G), with log₂|S| and H(G) for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthReport {
    pub m: usize,
    pub sigma: usize,
    pub w0: usize,
    pub w1: usize,
    pub w2: usize,
    pub w3: usize,
    pub w4: usize,
    pub total: usize,
    pub log2_arrangements: f64,
    pub grammar_entropy: f64,
}

/// Encodes a normal-form grammar over an alphabet of σ labels.
pub fn encode(g: &NormalTslp, sigma: usize) -> Result<BitString, CodecError> {
    let violations = g.normal_form_violations();
    if !violations.is_empty() {
        return Err(CodecError::NotNormalForm(violations));
    }
    let m = g.len();
    let mut out = BitString::new();
    // w0 = 0^{m-1} 1
    out.push_zeros(m - 1);
    out.push(true);
    if m == 1 {
        // singleton grammar A0 -> a: the label index in ceil(log2 sigma) bits
        let Rule::Singleton(a) = g.rules[0] else {
            return Err(CodecError::Malformed("m = 1 without singleton rule".into()));
        };
        out.push_uint(&BigUint::from(a), ceil_log2(&BigUint::from(sigma)));
        return Ok(out);
    }
    // w1: two bits per rule
    for rule in &g.rules {
        let t = rule_type(rule).expect("no singleton rules when m > 1");
        out.push(t & 2 != 0);
        out.push(t & 1 != 0);
    }
    // w2: rho = A1 u1 A2 u2 ... A_{m-1} u_{m-1}; emit 1 0^{|u_i|} per factor
    let rho = g.rho();
    let mut next_first = 1usize;
    for sym in &rho {
        if matches!(sym, Symbol::Nt(i) if *i == next_first) {
            out.push(true);
            next_first += 1;
        } else {
            out.push(false);
        }
    }
    // w3: 0^{eta(A_i)} 1 for each nonterminal, then 0^{eta(a_j)} 1 per label
    let omega = g.omega();
    let counts = SymbolCounts::of_word(&omega, sigma, m);
    for i in 0..m - 1 {
        out.push_zeros(counts.counts[sigma + i] as usize);
        out.push(true);
    }
    for j in 0..sigma {
        out.push_zeros(counts.counts[j] as usize);
        out.push(true);
    }
    // w4: the rank of omega in ceil(log2 |S|) bits
    let rank = multiset_rank(&omega, &counts)?;
    out.push_uint(&rank, ceil_log2(&counts.arrangements()));
    Ok(out)
}

/// Decodes one code word from the front of `bits`; returns the grammar
/// and the number of bits consumed. Trailing bits are ignored.
pub fn decode(bits: &BitString, sigma: usize) -> Result<(NormalTslp, usize), CodecError> {
    let mut r = BitReader::new(bits);
    let m = r.zeros_until_one()? + 1;
    if m == 1 {
        let idx = r.uint(ceil_log2(&BigUint::from(sigma)))?;
        let a: usize = idx
            .try_into()
            .map_err(|_| CodecError::Malformed("label index overflow".into()))?;
        if a >= sigma {
            return Err(CodecError::Malformed(format!(
                "label index {a} out of range for sigma = {sigma}"
            )));
        }
        return Ok((NormalTslp { rules: vec![Rule::Singleton(a)] }, r.pos));
    }
    // w1
    let mut types = Vec::with_capacity(m);
    for _ in 0..m {
        let hi = r.next()? as u8;
        let lo = r.next()? as u8;
        types.push(hi << 1 | lo);
    }
    // w2: positions of the first occurrences inside rho (length 2m)
    let mut is_first = Vec::with_capacity(2 * m);
    for _ in 0..2 * m {
        is_first.push(r.next()?);
    }
    if is_first.iter().filter(|&&b| b).count() != m - 1 {
        return Err(CodecError::Malformed(
            "w2 must mark exactly m-1 first occurrences".into(),
        ));
    }
    // w3: eta(A_1) ... eta(A_{m-1}), then eta(a_1) ... eta(a_sigma)
    let mut counts = SymbolCounts { sigma, counts: vec![0; sigma + m - 1] };
    for i in 0..m - 1 {
        counts.counts[sigma + i] = r.zeros_until_one()? as u64;
    }
    for j in 0..sigma {
        counts.counts[j] = r.zeros_until_one()? as u64;
    }
    if counts.total() != (m + 1) as u64 {
        return Err(CodecError::Malformed(format!(
            "w3 multiplicities sum to {}, expected {}",
            counts.total(),
            m + 1
        )));
    }
    // w4
    let rank = r.uint(ceil_log2(&counts.arrangements()))?;
    let omega = multiset_unrank(&rank, &counts)?;
    // interleave omega with the first occurrences to rebuild rho
    let mut rho = Vec::with_capacity(2 * m);
    let mut omega_it = omega.into_iter();
    let mut next_first = 1usize;
    for &first in &is_first {
        if first {
            rho.push(Symbol::Nt(next_first));
            next_first += 1;
        } else {
            rho.push(
                omega_it
                    .next()
                    .ok_or_else(|| CodecError::Malformed("rho shorter than 2m".into()))?,
            );
        }
    }
    // split rho into per-rule pairs and rebuild the rules from the types
    let mut rules = Vec::with_capacity(m);
    for (i, pair) in rho.chunks(2).enumerate() {
        let bad = |msg: &str| CodecError::Malformed(format!("rule A{i}: {msg}"));
        let atom = |s: Symbol| match s {
            Symbol::Term(l) => Atom::Term(l),
            Symbol::Nt(j) => Atom::Nt(j),
        };
        let rule = match (types[i], pair[0], pair[1]) {
            (0, Symbol::Nt(j), arg) => Rule::Apply { ctx: j, arg: atom(arg) },
            (1, Symbol::Nt(j), Symbol::Nt(k)) => Rule::Compose { outer: j, inner: k },
            (2, Symbol::Term(a), arg) => Rule::ArgLeft { label: a, arg: atom(arg) },
            (3, Symbol::Term(a), arg) => Rule::ArgRight { label: a, arg: atom(arg) },
            _ => return Err(bad("symbols do not fit the rule type")),
        };
        rules.push(rule);
    }
    let g = NormalTslp { rules };
    let violations = g.normal_form_violations();
    if !violations.is_empty() {
        return Err(CodecError::NotNormalForm(violations));
    }
    Ok((g, r.pos))
}

pub fn encoded_length_report(g: &NormalTslp, sigma: usize) -> Result<LengthReport, CodecError> {
    let violations = g.normal_form_violations();
    if !violations.is_empty() {
        return Err(CodecError::NotNormalForm(violations));
    }
    let m = g.len();
    if m == 1 {
        let w4 = ceil_log2(&BigUint::from(sigma));
        return Ok(LengthReport {
            m,
            sigma,
            w0: 1,
            w1: 0,
            w2: 0,
            w3: 0,
            w4,
            total: 1 + w4,
            log2_arrangements: 0.0,
            grammar_entropy: 0.0,
        });
    }
    let omega = g.omega();
    let counts = SymbolCounts::of_word(&omega, sigma, m);
    let arrangements = counts.arrangements();
    let w4 = ceil_log2(&arrangements);
    let log2_s: f64 = {
        // exact enough: |S| fits in f64 for any grammar we can enumerate,
        // and for huge |S| the bit count gives 52+ correct leading bits
        let bits = arrangements.bits();
        if bits <= 53 {
            let v: u64 = (&arrangements).try_into().unwrap();
            (v as f64).log2()
        } else {
            let shift = bits - 53;
            let top: u64 = (&arrangements >> shift).try_into().unwrap();
            (top as f64).log2() + shift as f64
        }
    };
    Ok(LengthReport {
        m,
        sigma,
        w0: m,
        w1: 2 * m,
        w2: 2 * m,
        w3: 2 * m + sigma,
        w4,
        total: m + 2 * m + 2 * m + (2 * m + sigma) + w4,
        log2_arrangements: log2_s,
        grammar_entropy: g.grammar_entropy(),
    })
}

fn write_leb128(out: &mut impl Write, mut v: u64) -> io::Result<()> {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.write_all(&[byte])?;
            return Ok(());
        }
        out.write_all(&[byte | 0x80])?;
    }
}

fn read_leb128(inp: &mut impl Read) -> Result<u64, CodecError> {
    let mut v: u64 = 0;
    let mut shift = 0;
    loop {
        let mut byte = [0u8; 1];
        inp.read_exact(&mut byte)?;
        if shift >= 64 {
            return Err(CodecError::Container("LEB128 value overflows u64".into()));
        }
        v |= ((byte[0] & 0x7f) as u64) << shift;
        if byte[0] & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
    }
}

const MAGIC: &[u8; 4] = b"TSLP";
const VERSION: u8 = 1;

/// Writes the container: magic, version, alphabet, box index, then B(G).
pub fn write_container(
    out: &mut impl Write,
    alphabet: &Alphabet,
    bits: &BitString,
) -> Result<(), CodecError> {
    out.write_all(MAGIC)?;
    out.write_all(&[VERSION])?;
    write_leb128(out, alphabet.size() as u64)?;
    for label in alphabet.labels() {
        write_leb128(out, label.len() as u64)?;
        out.write_all(label.as_bytes())?;
    }
    write_leb128(out, alphabet.box_label() as u64)?;
    write_leb128(out, bits.len() as u64)?;
    out.write_all(&bits.to_bytes())?;
    Ok(())
}

/// Reads a container written by [`write_container`].
pub fn read_container(inp: &mut impl Read) -> Result<(Alphabet, BitString), CodecError> {
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CodecError::Container("bad magic".into()));
    }
    let mut version = [0u8; 1];
    inp.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(CodecError::Container(format!(
            "unsupported format version {}",
            version[0]
        )));
    }
    let sigma = read_leb128(inp)? as usize;
    if sigma == 0 {
        return Err(CodecError::Container("empty alphabet".into()));
    }
    let mut labels = Vec::with_capacity(sigma);
    for _ in 0..sigma {
        let len = read_leb128(inp)? as usize;
        let mut buf = vec![0u8; len];
        inp.read_exact(&mut buf)?;
        labels.push(
            String::from_utf8(buf)
                .map_err(|_| CodecError::Container("label is not UTF-8".into()))?,
        );
    }
    let box_index = read_leb128(inp)? as usize;
    let bit_len = read_leb128(inp)? as usize;
    let mut packed = vec![0u8; (bit_len + 7) / 8];
    inp.read_exact(&mut packed)?;
    let bits = BitString::from_bytes(&packed, bit_len)
        .ok_or_else(|| CodecError::Container("truncated bit payload".into()))?;
    let mut alphabet = Alphabet::from_labels(labels)
        .map_err(|e| CodecError::Container(e.to_string()))?;
    alphabet
        .set_box(box_index)
        .map_err(|e| CodecError::Container(e.to_string()))?;
    Ok((alphabet, bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tslp::Atom;

    fn example_grammar() -> NormalTslp {
        NormalTslp {
            rules: vec![
                Rule::Apply { ctx: 1, arg: Atom::Nt(2) },
                Rule::ArgRight { label: 0, arg: Atom::Nt(3) },
                Rule::Apply { ctx: 4, arg: Atom::Nt(3) },
                Rule::Apply { ctx: 4, arg: Atom::Term(1) },
                Rule::ArgRight { label: 1, arg: Atom::Term(0) },
            ],
        }
    }

    #[test]
    fn golden_encoding() {
        let bits = encode(&example_grammar(), 2).unwrap();
        let want = "00001_0011000011_1101100000_110101001001_00101111".replace('_', "");
        assert_eq!(bits.to_string(), want);
        assert_eq!(bits.len(), 45);
    }

    #[test]
    fn golden_rank() {
        let g = example_grammar();
        let omega = g.omega();
        let counts = SymbolCounts::of_word(&omega, 2, g.len());
        assert_eq!(counts.arrangements(), BigUint::from(180u32));
        assert_eq!(multiset_rank(&omega, &counts).unwrap(), BigUint::from(47u32));
        assert_eq!(
            multiset_unrank(&BigUint::from(47u32), &counts).unwrap(),
            omega
        );
    }

    #[test]
    fn rank_bijection_small() {
        // all arrangements of a:2, b:1, A1:1 -> 4!/2! = 12 words
        let counts = SymbolCounts { sigma: 2, counts: vec![2, 1, 1] };
        let total: u64 = (&counts.arrangements()).try_into().unwrap();
        assert_eq!(total, 12);
        let mut seen = Vec::new();
        for i in 0..total {
            let w = multiset_unrank(&BigUint::from(i), &counts).unwrap();
            assert_eq!(multiset_rank(&w, &counts).unwrap(), BigUint::from(i));
            seen.push(w);
        }
        // lexicographic order
        for pair in seen.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        assert!(multiset_unrank(&BigUint::from(total), &counts).is_err());
        assert_eq!(
            multiset_unrank(&BigUint::zero(), &counts).unwrap(),
            vec![
                Symbol::Term(0),
                Symbol::Term(0),
                Symbol::Term(1),
                Symbol::Nt(1)
            ]
        );
    }

    #[test]
    fn rank_rejects_mismatch() {
        let counts = SymbolCounts { sigma: 1, counts: vec![2] };
        let word = vec![Symbol::Term(0)];
        assert!(matches!(
            multiset_rank(&word, &counts),
            Err(CodecError::MultiplicityMismatch)
        ));
    }

    #[test]
    fn decode_inverts_encode() {
        let g = example_grammar();
        let bits = encode(&g, 2).unwrap();
        let (back, used) = decode(&bits, 2).unwrap();
        assert_eq!(back, g);
        assert_eq!(used, bits.len());
        // junk after the code word is ignored and not consumed
        let mut extended = bits.clone();
        extended.push(true);
        extended.push(false);
        let (back2, used2) = decode(&extended, 2).unwrap();
        assert_eq!(back2, g);
        assert_eq!(used2, bits.len());
    }

    #[test]
    fn two_rule_roundtrip() {
        let g = NormalTslp {
            rules: vec![
                Rule::Apply { ctx: 1, arg: Atom::Term(0) },
                Rule::ArgRight { label: 0, arg: Atom::Term(0) },
            ],
        };
        let bits = encode(&g, 1).unwrap();
        let (back, used) = decode(&bits, 1).unwrap();
        assert_eq!(back, g);
        assert_eq!(used, bits.len());
    }

    #[test]
    fn singleton_encoding() {
        // sigma = 1: zero index bits
        let g = NormalTslp { rules: vec![Rule::Singleton(0)] };
        let bits = encode(&g, 1).unwrap();
        assert_eq!(bits.to_string(), "1");
        let (back, used) = decode(&bits, 1).unwrap();
        assert_eq!(back, g);
        assert_eq!(used, 1);
        // sigma = 3: two index bits
        let g2 = NormalTslp { rules: vec![Rule::Singleton(2)] };
        let bits2 = encode(&g2, 3).unwrap();
        assert_eq!(bits2.to_string(), "110");
        let (back2, _) = decode(&bits2, 3).unwrap();
        assert_eq!(back2, g2);
    }

    #[test]
    fn length_report_values() {
        let rep = encoded_length_report(&example_grammar(), 2).unwrap();
        assert_eq!((rep.w0, rep.w1, rep.w2, rep.w3, rep.w4), (5, 10, 10, 12, 8));
        assert_eq!(rep.total, 45);
        assert!((rep.log2_arrangements - 180f64.log2()).abs() < 1e-9);
        // enumerative bound: log2 |S| <= H(G)
        assert!(rep.log2_arrangements <= rep.grammar_entropy + 1e-9);
    }

    #[test]
    fn malformed_inputs_rejected() {
        // truncated golden word
        let bits = encode(&example_grammar(), 2).unwrap();
        let mut short = BitString::new();
        for i in 0..bits.len() - 3 {
            short.push(bits.get(i).unwrap());
        }
        assert!(decode(&short, 2).is_err());
        // all-zero word never terminates w0
        let zeros = BitString::from_str01("0000000000").unwrap();
        assert!(decode(&zeros, 2).is_err());
    }

    #[test]
    fn container_roundtrip() {
        let alphabet =
            Alphabet::from_labels(vec!["a".into(), "b".into()]).unwrap();
        let bits = encode(&example_grammar(), 2).unwrap();
        let mut buf = Vec::new();
        write_container(&mut buf, &alphabet, &bits).unwrap();
        assert_eq!(&buf[..4], b"TSLP");
        assert_eq!(buf[4], 1);
        let (al2, bits2) = read_container(&mut buf.as_slice()).unwrap();
        assert_eq!(al2.labels(), alphabet.labels());
        assert_eq!(bits2, bits);
        // corrupted magic
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_container(&mut bad.as_slice()).is_err());
    }

    #[test]
    fn bitstring_bytes_roundtrip() {
        let b = BitString::from_str01("101000001").unwrap();
        let bytes = b.to_bytes();
        assert_eq!(bytes, vec![0b10100000, 0b10000000]);
        assert_eq!(BitString::from_bytes(&bytes, 9).unwrap(), b);
        assert!(BitString::from_bytes(&bytes, 17).is_none());
    }
}
