//! Self-check suites: fast invariant sweeps over the whole library,
//! runnable from the CLI. `Quick` covers the codec and entropy
//! plumbing; `Full` adds the probability-mass enumerations and the
//! S_n table.

use num_bigint::BigUint;

use crate::codec::{decode, encode, multiset_rank, multiset_unrank, SymbolCounts};
use crate::entropy::{process_probability, tree_entropy};
use crate::gen::{random_normal_grammar, random_process, random_tree, rng_from_seed};
use crate::strings::{gen_s, slp_s, string_entropy};
use crate::trees::{enumerate_contexts, enumerate_trees, Alphabet, TreeOrContext};
use crate::tslp::DEFAULT_EXPANSION_BUDGET;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: u64,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult { name, checks: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(msg());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn suite_enumerative() -> SuiteResult {
    let mut s = SuiteResult::new("enumerative-coding");
    // exhaustive bijection over a spread of small count vectors
    let vectors: [(usize, Vec<u64>); 5] = [
        (1, vec![3, 2]),
        (2, vec![2, 2, 1, 1]),
        (2, vec![1, 1, 2]),
        (3, vec![2, 0, 1, 3]),
        (1, vec![5, 1]),
    ];
    for (sigma, counts) in vectors {
        let counts = SymbolCounts { sigma, counts };
        let total: u64 = (&counts.arrangements()).try_into().unwrap();
        let mut prev = None;
        for i in 0..total {
            let w = match multiset_unrank(&BigUint::from(i), &counts) {
                Ok(w) => w,
                Err(e) => {
                    s.check(false, || format!("unrank({i}) failed: {e}"));
                    continue;
                }
            };
            s.check(
                multiset_rank(&w, &counts).map(|r| r == BigUint::from(i)).unwrap_or(false),
                || format!("rank(unrank({i})) != {i}"),
            );
            if let Some(p) = prev {
                s.check(p < w, || format!("order violated at rank {i}"));
            }
            prev = Some(w);
        }
    }
    s
}

fn suite_codec_roundtrip(cases: u64) -> SuiteResult {
    let mut s = SuiteResult::new("codec-roundtrip");
    let mut rng = rng_from_seed(0x5eed);
    for i in 0..cases {
        let sigma = 1 + (i as usize % 8);
        let g = random_normal_grammar(&mut rng, 60, sigma);
        let bits = match encode(&g, sigma) {
            Ok(b) => b,
            Err(e) => {
                s.check(false, || format!("case {i}: encode failed: {e}"));
                continue;
            }
        };
        match decode(&bits, sigma) {
            Ok((back, used)) => {
                s.check(back == g && used == bits.len(), || {
                    format!("case {i}: decode mismatch")
                });
            }
            Err(e) => s.check(false, || format!("case {i}: decode failed: {e}")),
        }
    }
    s
}

fn suite_entropy_monotonicity(cases: u64) -> SuiteResult {
    let mut s = SuiteResult::new("entropy-monotonicity");
    let mut rng = rng_from_seed(0xe417);
    for i in 0..cases {
        let sigma = 1 + (i as usize % 4);
        let t = random_tree(&mut rng, 2 + (i % 60), sigma);
        let mut prev = f64::INFINITY;
        for k in 0..4 {
            let h = tree_entropy(&t, k, 0);
            s.check(h <= prev + 1e-9, || {
                format!("case {i}: H_{k} = {h} exceeds H_{} = {prev}", k - 1)
            });
            prev = h;
        }
    }
    s
}

fn suite_probability_mass() -> SuiteResult {
    let mut s = SuiteResult::new("probability-mass");
    for sigma in 1..=2usize {
        let labels = (0..sigma).map(|i| format!("l{i}")).collect();
        let alphabet = Alphabet::from_labels(labels).unwrap();
        let mut rng = rng_from_seed(0x10af + sigma as u64);
        for k in 0..=2usize {
            for _ in 0..10 {
                let p = random_process(&mut rng, k, &alphabet);
                // trees of size <= 4: the total mass must stay below 1
                let mut tree_mass = 0.0;
                for n in 1..=4u64 {
                    for t in enumerate_trees(n, &alphabet, DEFAULT_EXPANSION_BUDGET).unwrap() {
                        tree_mass += process_probability(&p, &TreeOrContext::Tree(t));
                    }
                }
                s.check(tree_mass <= 1.0 + 1e-9, || {
                    format!("sigma={sigma} k={k}: tree mass {tree_mass} > 1")
                });
                // contexts of size n: mass bounded by n + 1
                for n in 1..=4u64 {
                    let mut ctx_mass = 0.0;
                    for c in enumerate_contexts(n, &alphabet, DEFAULT_EXPANSION_BUDGET).unwrap()
                    {
                        ctx_mass += process_probability(&p, &TreeOrContext::Context(c));
                    }
                    s.check(ctx_mass <= (n + 1) as f64 + 1e-9, || {
                        format!("sigma={sigma} k={k} n={n}: context mass {ctx_mass}")
                    });
                }
            }
        }
    }
    s
}

fn suite_sn_table() -> SuiteResult {
    let mut s = SuiteResult::new("sn-table");
    for n in 1..=16u32 {
        let w = gen_s(n);
        s.check(w.len() as u64 == (1u64 << (n + 1)) - 1, || {
            format!("|S_{n}| wrong")
        });
        let slp = slp_s(n);
        s.check(slp.size() == 3 * n as usize, || format!("SLP size for n={n}"));
        s.check(slp.expand() == w, || format!("SLP expansion for n={n}"));
        for k in 1..n {
            let hk = string_entropy(&w, k as usize);
            s.check(hk >= (1u64 << (n - k)) as f64, || {
                format!("H_{k}(S_{n}) = {hk} below 2^{}", n - k)
            });
        }
        s.check(string_entropy(&w, 0) >= 0.9 * w.len() as f64, || {
            format!("H(S_{n}) below 0.9|S_{n}|")
        });
    }
    s
}

/// Runs the selected suites; `inject_failure` appends an always-failing
/// suite (a negative control for the exit-code plumbing).
pub fn run(level: Level, inject_failure: bool) -> Vec<SuiteResult> {
    let mut out = vec![
        suite_enumerative(),
        suite_codec_roundtrip(if level == Level::Full { 500 } else { 100 }),
        suite_entropy_monotonicity(if level == Level::Full { 200 } else { 50 }),
    ];
    if level == Level::Full {
        out.push(suite_probability_mass());
        out.push(suite_sn_table());
    }
    if inject_failure {
        let mut s = SuiteResult::new("injected-failure");
        s.check(false, || "deliberately failing control check".to_string());
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for suite in run(Level::Quick, false) {
            assert!(suite.passed(), "{}: {:?}", suite.name, suite.failures);
            assert!(suite.checks > 0);
        }
    }

    #[test]
    fn injected_failure_is_reported() {
        let results = run(Level::Quick, true);
        assert!(results.iter().any(|s| !s.passed()));
    }

    #[test]
    fn full_only_suites_pass() {
        assert!(suite_probability_mass().passed());
        assert!(suite_sn_table().passed());
    }
}
