//! k-th order empirical entropy of strings, straight-line programs for
//! strings, and the S_n family: strings with tiny grammars whose
//! entropy stays exponentially large.

use std::collections::HashMap;

use crate::entropy::unnormalized_empirical_entropy;

/// w(α): the characters immediately following each occurrence of α,
/// in order of occurrence.
pub fn following_string(w: &[u8], alpha: &[u8]) -> Vec<u8> {
    assert!(!alpha.is_empty(), "context must be non-empty");
    let mut out = Vec::new();
    if w.len() < alpha.len() {
        return out;
    }
    for i in 0..=w.len() - alpha.len() {
        if &w[i..i + alpha.len()] == alpha {
            if let Some(&c) = w.get(i + alpha.len()) {
                out.push(c);
            }
        }
    }
    out
}

/// H_k(w) = Σ_{α ∈ Σ^k} H(w(α)), with H(ε) = 0; k = 0 gives H(w).
pub fn string_entropy(w: &[u8], k: usize) -> f64 {
    if k == 0 {
        return unnormalized_empirical_entropy(w);
    }
    if w.len() <= k {
        return 0.0;
    }
    // group following characters by their length-k left context
    let mut groups: HashMap<&[u8], Vec<u8>> = HashMap::new();
    for i in 0..w.len() - k {
        groups.entry(&w[i..i + k]).or_default().push(w[i + k]);
    }
    groups
        .values()
        .map(|s| unnormalized_empirical_entropy(s))
        .sum()
}

/// S₁ = baa, S_n = b·S_{n−1}·S_{n−1}; |S_n| = 2^{n+1} − 1.
pub fn gen_s(n: u32) -> Vec<u8> {
    assert!(n >= 1);
    assert!(n <= 40, "S_{n} does not fit the memory budget");
    let mut s = b"baa".to_vec();
    for _ in 1..n {
        let mut next = Vec::with_capacity(2 * s.len() + 1);
        next.push(b'b');
        next.extend_from_slice(&s);
        next.extend_from_slice(&s);
        s = next;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrSym {
    Term(u8),
    /// Index into [`StringSLP::rules`]; must reference an earlier rule.
    Nt(usize),
}

/// SLP for strings: `rules[i]` is the word of nonterminal i, the last
/// rule is the start symbol. Size = total right-hand-side length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringSLP {
    pub rules: Vec<Vec<StrSym>>,
}

impl StringSLP {
    pub fn size(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    pub fn expand(&self) -> Vec<u8> {
        let mut values: Vec<Vec<u8>> = Vec::with_capacity(self.rules.len());
        for rule in &self.rules {
            let mut v = Vec::new();
            for sym in rule {
                match sym {
                    StrSym::Term(c) => v.push(*c),
                    StrSym::Nt(j) => v.extend_from_slice(&values[*j]),
                }
            }
            values.push(v);
        }
        values.pop().unwrap_or_default()
    }
}

/// The size-3n SLP deriving S_n: X₁ → baa, X_i → b X_{i−1} X_{i−1}.
pub fn slp_s(n: u32) -> StringSLP {
    assert!(n >= 1);
    let mut rules = vec![vec![
        StrSym::Term(b'b'),
        StrSym::Term(b'a'),
        StrSym::Term(b'a'),
    ]];
    for i in 1..n as usize {
        rules.push(vec![StrSym::Term(b'b'), StrSym::Nt(i - 1), StrSym::Nt(i - 1)]);
    }
    StringSLP { rules }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_s_small_values() {
        assert_eq!(gen_s(1), b"baa");
        assert_eq!(gen_s(2), b"bbaabaa");
        assert_eq!(gen_s(10).len(), 2047);
        for n in 1..=12u32 {
            assert_eq!(gen_s(n).len() as u64, (1u64 << (n + 1)) - 1);
        }
    }

    #[test]
    fn slp_s_sizes_and_expansion() {
        assert_eq!(slp_s(1).size(), 3);
        let g5 = slp_s(5);
        assert_eq!(g5.size(), 15);
        assert_eq!(g5.expand().len(), 63);
        for n in 1..=16u32 {
            let g = slp_s(n);
            assert_eq!(g.size(), 3 * n as usize);
            assert_eq!(g.expand(), gen_s(n));
        }
    }

    #[test]
    fn following_string_examples() {
        // S1 = baa: S1(b) = "a"
        assert_eq!(following_string(b"baa", b"b"), b"a");
        // S3(b^2) has length 2^{3-2+1} - 1 = 3
        assert_eq!(following_string(&gen_s(3), b"bb").len(), 3);
        // S4(b^3) contains exactly 2^{4-3} = 2 occurrences of 'a'
        let s = following_string(&gen_s(4), b"bbb");
        assert_eq!(s.iter().filter(|&&c| c == b'a').count(), 2);
        assert_eq!(following_string(b"abc", b"zzz"), b"");
        // suffix occurrence contributes no character
        assert_eq!(following_string(b"abab", b"ab"), b"a");
    }

    #[test]
    fn sn_statistics() {
        for n in 1..=12u32 {
            let s = gen_s(n);
            for m in 1..=n {
                let ctx: Vec<u8> = vec![b'b'; m as usize];
                let f = following_string(&s, &ctx);
                assert_eq!(f.len() as u64, (1u64 << (n - m + 1)) - 1, "n={n} m={m}");
                let a_count = f.iter().filter(|&&c| c == b'a').count() as u64;
                assert_eq!(a_count, 1u64 << (n - m), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn string_entropy_examples() {
        assert_eq!(string_entropy(b"aaaa", 0), 0.0);
        assert_eq!(string_entropy(b"aaaa", 2), 0.0);
        // abab, k=1: w(a) = bb, w(b) = a, both zero-entropy
        assert!(string_entropy(b"abab", 1).abs() < 1e-12);
        // "aab": H = 2 log2(3/2) + log2 3
        let want = 2.0 * 1.5f64.log2() + 3f64.log2();
        assert!((string_entropy(b"aab", 0) - want).abs() < 1e-12);
        // k >= |w| gives 0
        assert_eq!(string_entropy(b"ab", 5), 0.0);
    }

    #[test]
    fn sn_entropy_bounds() {
        for n in 2..=12u32 {
            let s = gen_s(n);
            // H(S_n) >= 0.9 |S_n|
            assert!(string_entropy(&s, 0) >= 0.9 * s.len() as f64, "n={n}");
            for k in 1..n {
                let hk = string_entropy(&s, k as usize);
                assert!(hk >= (1u64 << (n - k)) as f64, "n={n} k={k}: H_k={hk}");
            }
        }
    }

    #[test]
    fn entropy_groups_match_following_strings() {
        // the grouped computation agrees with the explicit w(alpha) sum
        let w = gen_s(5);
        for k in 1..=3usize {
            let mut contexts: Vec<Vec<u8>> = (0..w.len() - k)
                .map(|i| w[i..i + k].to_vec())
                .collect();
            contexts.sort();
            contexts.dedup();
            let direct: f64 = contexts
                .iter()
                .map(|a| unnormalized_empirical_entropy(&following_string(&w, a)))
                .sum();
            assert!((string_entropy(&w, k) - direct).abs() < 1e-9);
        }
    }
}
