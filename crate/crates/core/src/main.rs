//! Batch CLI for tree entropy measurement, grammar compression and the
//! binary codec. Exit codes: 0 success, 1 self-check failure, 2 parse
//! error, 3 codec error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};

use treentropy::codec;
use treentropy::compress::{compress, CompressorChoice};
use treentropy::entropy::tree_entropy;
use treentropy::selfcheck;
use treentropy::strings::{gen_s, string_entropy};
use treentropy::trees::{parse_tree, tree_to_string};
use treentropy::tslp::DEFAULT_EXPANSION_BUDGET;
use treentropy::unranked::{ingest_xml, profile};

const EXIT_SELFCHECK: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CODEC: u8 = 3;

#[derive(Parser)]
#[command(name = "treentropy", version, about = "Grammar-based tree compression and empirical tree entropy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Dag,
    Digram,
}

impl From<Method> for CompressorChoice {
    fn from(m: Method) -> Self {
        match m {
            Method::Dag => CompressorChoice::Dag,
            Method::Digram => CompressorChoice::Digram,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Level {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// k-th order empirical entropy of a tree in term syntax
    Entropy {
        /// Input file containing one tree term, e.g. a(b,a(a,b))
        input: PathBuf,
        /// Orders to evaluate, comma separated
        #[arg(long, short, value_delimiter = ',', default_value = "0,1,2")]
        k: Vec<usize>,
        /// Padding label for short histories (default: first label)
        #[arg(long = "box")]
        box_label: Option<String>,
    },
    /// Compress a tree term into a TSLP container
    Compress {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "dag")]
        method: Method,
    },
    /// Decompress a TSLP container back into a tree term
    Decompress {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Entropy profile of the element structure of XML documents
    XmlProfile {
        paths: Vec<PathBuf>,
        #[arg(long, short, value_delimiter = ',', default_value = "1,2,4,8")]
        k: Vec<usize>,
        /// Worker threads for processing documents
        #[arg(long, default_value = "1")]
        jobs: usize,
    },
    /// Entropy table of the S_n string family
    SnTable {
        #[arg(long, default_value = "16")]
        max_n: u32,
    },
    /// Run the library invariant suites
    Selfcheck {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
        /// Negative control: adds a suite that always fails
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
}

fn expansion_budget() -> u64 {
    std::env::var("TREENTROPY_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_EXPANSION_BUDGET)
}

fn cmd_entropy(input: &PathBuf, ks: &[usize], box_label: Option<&str>) -> Result<(), u8> {
    let src = fs::read_to_string(input).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", input.display());
        EXIT_PARSE
    })?;
    let (tree, mut alphabet) = parse_tree(src.trim()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })?;
    if let Some(name) = box_label {
        let idx = alphabet.index_of(name).ok_or_else(|| {
            eprintln!("error: box label {name:?} does not occur in the tree");
            EXIT_PARSE
        })?;
        alphabet.set_box(idx).expect("index from lookup");
    }
    println!("k,Hk_bits");
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        println!("{k},{:.6}", tree_entropy(&tree, k, alphabet.box_label()));
    }
    Ok(())
}

fn cmd_compress(input: &PathBuf, output: &PathBuf, method: Method) -> Result<(), u8> {
    let src = fs::read_to_string(input).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", input.display());
        EXIT_PARSE
    })?;
    let (tree, alphabet) = parse_tree(src.trim()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })?;
    let grammar = compress(&tree, method.into()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CODEC
    })?;
    let bits = codec::encode(&grammar, alphabet.size()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CODEC
    })?;
    let mut out = Vec::new();
    codec::write_container(&mut out, &alphabet, &bits).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CODEC
    })?;
    fs::write(output, out).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", output.display());
        EXIT_CODEC
    })?;
    Ok(())
}

fn cmd_decompress(input: &PathBuf, output: &PathBuf) -> Result<(), u8> {
    let bytes = fs::read(input).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", input.display());
        EXIT_CODEC
    })?;
    let (alphabet, bits) = codec::read_container(&mut bytes.as_slice()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CODEC
    })?;
    let (grammar, _) = codec::decode(&bits, alphabet.size()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CODEC
    })?;
    let tree = grammar.val(expansion_budget()).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CODEC
    })?;
    let term = tree_to_string(&tree, &alphabet);
    fs::write(output, format!("{term}\n")).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", output.display());
        EXIT_CODEC
    })?;
    Ok(())
}

fn profile_one(path: &PathBuf, ks: &[usize]) -> Result<Vec<String>, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (tree, alphabet) =
        ingest_xml(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(profile(&tree, &alphabet, ks)
        .into_iter()
        .map(|row| {
            format!(
                "{name},{},{},{:.0},{},{:.6},{:.4}",
                row.n, row.sigma, row.w_bits, row.k, row.hk_bits, row.quotient_pct
            )
        })
        .collect())
}

fn cmd_xml_profile(paths: &[PathBuf], ks: &[usize], jobs: usize) -> Result<(), u8> {
    if paths.is_empty() {
        eprintln!("error: no input files");
        return Err(EXIT_PARSE);
    }
    let jobs = jobs.max(1).min(paths.len());
    let results: Vec<Option<Result<Vec<String>, String>>> = {
        let slots: Vec<Mutex<Option<Result<Vec<String>, String>>>> =
            paths.iter().map(|_| Mutex::new(None)).collect();
        let next = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= paths.len() {
                        break;
                    }
                    *slots[i].lock().unwrap() = Some(profile_one(&paths[i], ks));
                });
            }
        });
        slots.into_iter().map(|m| m.into_inner().unwrap()).collect()
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "document,n,sigma,w_bits,k,Hk_bits,quotient_pct").unwrap();
    let mut any_ok = false;
    for result in results.into_iter().flatten() {
        match result {
            Ok(rows) => {
                any_ok = true;
                for row in rows {
                    writeln!(out, "{row}").unwrap();
                }
            }
            Err(e) => eprintln!("error: {e}"),
        }
    }
    if any_ok {
        Ok(())
    } else {
        Err(EXIT_PARSE)
    }
}

fn cmd_sn_table(max_n: u32) -> Result<(), u8> {
    println!("n,k,Hk_bits,bound_bits");
    for n in 1..=max_n {
        let s = gen_s(n);
        for k in 1..n {
            let hk = string_entropy(&s, k as usize);
            let bound = (1u64 << (n - k)) as f64;
            println!("{n},{k},{hk:.6},{bound:.0}");
        }
    }
    Ok(())
}

fn cmd_selfcheck(level: Level, inject_failure: bool) -> Result<(), u8> {
    let level = match level {
        Level::Quick => selfcheck::Level::Quick,
        Level::Full => selfcheck::Level::Full,
    };
    let results = selfcheck::run(level, inject_failure);
    let mut all_ok = true;
    for suite in &results {
        let status = if suite.passed() { "pass" } else { "FAIL" };
        println!(
            "{status} {} ({} checks, {} failures)",
            suite.name,
            suite.checks,
            suite.failures.len()
        );
        for f in suite.failures.iter().take(5) {
            println!("  - {f}");
        }
        all_ok &= suite.passed();
    }
    if all_ok {
        Ok(())
    } else {
        Err(EXIT_SELFCHECK)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Entropy { input, k, box_label } => {
            cmd_entropy(input, k, box_label.as_deref())
        }
        Command::Compress { input, output, method } => cmd_compress(input, output, *method),
        Command::Decompress { input, output } => cmd_decompress(input, output),
        Command::XmlProfile { paths, k, jobs } => cmd_xml_profile(paths, k, *jobs),
        Command::SnTable { max_n } => cmd_sn_table(*max_n),
        Command::Selfcheck { level, inject_failure } => cmd_selfcheck(*level, *inject_failure),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
