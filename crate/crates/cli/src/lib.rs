//! Command-line front end: manifest ingestion, invariants, hypothesis checks,
//! certificates and oracle runs.
//!
//! Exit status: 0 certified or pass, 1 refuted or fail, 2 undecidable at the
//! sampling depth, 3 input error.

pub mod document;
pub mod manifest;

use std::ffi::OsString;
use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};

use document::{normalize_timestamp, timestamp_from_epoch, CertificateDocument};
use manifest::{load, Loaded};
use sumleaf::blocks::Block;
use sumleaf::criteria::{
    check_non_periodic, check_non_repeating, check_theorem_a, check_theorem_b, check_theorem_c, Certificate, Mode,
    Status, Verdict, Witness, DEFAULT_DEPTH,
};
use sumleaf::oracle::{
    counting_consistency, random_suite, stacked_presentation_check, truncation_convergence, OracleReport,
};
use sumleaf::pattern::{Pattern, SumManifold};

pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sumleaf", version, about = "Invariants and non-leaf certificates for tree-patterned connected sums")]
struct Cli {
    /// Manifest file (JSON).
    #[arg(short, long, global = true)]
    manifest: Option<String>,
    /// Number of family members sampled. Overrides the manifest.
    #[arg(long, global = true, env = "SUMLEAF_DEPTH")]
    depth: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Catalog operations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Print π₁ and H_r of the manifold.
    Invariants {
        #[arg(long)]
        r: u32,
    },
    /// Check one criterion.
    Check {
        #[command(subcommand)]
        check: CheckCommand,
    },
    /// Check every hypothesis of a theorem and emit a certificate.
    Certify {
        theorem: TheoremArg,
        /// Degree for the non-periodic hypothesis of theorem-b.
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, default_value_t = Mode::Homotopy, value_parser = parse_mode)]
        mode: Mode,
        /// Write the certificate document here.
        #[arg(long)]
        out: Option<String>,
        /// Timestamp recorded in the document, as epoch seconds or RFC 3339; defaults
        /// to SOURCE_DATE_EPOCH, else none.
        #[arg(long)]
        timestamp: Option<String>,
    },
    /// Brute-force oracle checks.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    /// Load the manifest and report the catalog.
    Validate,
}

#[derive(Debug, Subcommand)]
enum CheckCommand {
    /// The catalog is a non-repeating set.
    NonRepeating,
    /// π_k (or H_k) is non-periodic.
    NonPeriodic {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = Mode::Homotopy, value_parser = parse_mode)]
        mode: Mode,
    },
}

#[derive(Debug, Subcommand)]
enum OracleAction {
    /// Seeded random checks, plus checks on the manifest if one is given.
    Run {
        /// Overrides the manifest seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Print every report, not only failures.
        #[arg(long)]
        verbose: bool,
        /// Write the reports as a certificate document.
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TheoremArg {
    TheoremA,
    TheoremB,
    TheoremC,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

/// Exit status and the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input_error(message: impl std::fmt::Display) -> Self {
        Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Certified => 0,
        Status::Refuted => 1,
        Status::UndecidableAtDepth => 2,
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: text },
            };
        }
    };
    match execute(&cli) {
        Ok(outcome) => outcome,
        Err(message) => Outcome::input_error(message),
    }
}

fn require_manifest(cli: &Cli) -> Result<Loaded, String> {
    let path = cli.manifest.as_deref().ok_or("this command needs --manifest")?;
    load(path).map_err(|e| e.to_string())
}

fn depth_for(cli: &Cli, loaded: Option<&Loaded>) -> Result<usize, String> {
    let depth = cli.depth.or_else(|| loaded.and_then(|l| l.manifest.options.depth)).unwrap_or(DEFAULT_DEPTH);
    if depth == 0 {
        return Err("sampling depth must be positive".into());
    }
    Ok(depth)
}

fn execute(cli: &Cli) -> Result<Outcome, String> {
    match &cli.command {
        Command::Catalog { action: CatalogAction::Validate } => {
            let loaded = require_manifest(cli)?;
            let depth = depth_for(cli, Some(&loaded))?;
            Ok(Outcome { code: 0, stdout: catalog_report(&loaded, depth), stderr: String::new() })
        }
        Command::Invariants { r } => {
            let loaded = require_manifest(cli)?;
            let depth = depth_for(cli, Some(&loaded))?;
            invariants_report(&loaded.manifold, *r, depth).map(|stdout| Outcome {
                code: 0,
                stdout,
                stderr: String::new(),
            })
        }
        Command::Check { check } => {
            let loaded = require_manifest(cli)?;
            let depth = depth_for(cli, Some(&loaded))?;
            let (title, verdict) = match check {
                CheckCommand::NonRepeating => {
                    ("non-repeating".to_string(), check_non_repeating(loaded.manifold.catalog(), depth))
                }
                CheckCommand::NonPeriodic { k, mode } => (
                    format!("non-periodic in {mode}, k = {k}"),
                    check_non_periodic(&loaded.manifold, *k, *mode, depth).map_err(|e| e.to_string())?,
                ),
            };
            let mut out = String::new();
            writeln!(out, "check {title}: {}", verdict.status).unwrap();
            writeln!(out, "  manifest: {} ({})", loaded.manifest.name, loaded.manifold.describe()).unwrap();
            writeln!(out, "  depth: {depth}").unwrap();
            write_verdict(&mut out, &verdict, "  ");
            Ok(Outcome { code: exit_code(verdict.status), stdout: out, stderr: String::new() })
        }
        Command::Certify { theorem, k, mode, out, timestamp } => {
            let loaded = require_manifest(cli)?;
            let depth = depth_for(cli, Some(&loaded))?;
            let w = &loaded.manifold;
            let certificate = match theorem {
                TheoremArg::TheoremA => check_theorem_a(w, depth),
                TheoremArg::TheoremB => check_theorem_b(w, *k, *mode, depth),
                TheoremArg::TheoremC => check_theorem_c(w, w.catalog(), depth),
            }
            .map_err(|e| e.to_string())?;
            let reports = manifest_reports(&loaded, None)?;
            let timestamp = match timestamp {
                Some(t) => Some(normalize_timestamp(t)?),
                None => std::env::var("SOURCE_DATE_EPOCH").ok().map(|s| timestamp_from_epoch(&s)).transpose()?,
            };
            let mut text = certificate_report(&certificate);
            write_reports(&mut text, &reports, false);
            if let Some(path) = out {
                let doc = CertificateDocument::new(
                    &loaded.manifest.name,
                    &loaded.digest,
                    loaded.manifest.options.seed,
                    depth,
                    timestamp,
                )
                .with_certificate(certificate.clone())
                .with_reports(reports);
                let json = doc.to_json().map_err(|e| format!("certificate failed its own schema: {e}"))?;
                std::fs::write(path, json).map_err(|e| format!("cannot write {path}: {e}"))?;
                writeln!(text, "certificate written to {path}").unwrap();
            }
            Ok(Outcome { code: exit_code(certificate.status), stdout: text, stderr: String::new() })
        }
        Command::Oracle { action: OracleAction::Run { seed, verbose, out } } => {
            let loaded = match &cli.manifest {
                Some(_) => Some(require_manifest(cli)?),
                None => None,
            };
            let options = loaded.as_ref().map(|l| l.manifest.options.clone()).unwrap_or_default();
            let seed = seed.unwrap_or(options.seed);
            let mut reports =
                random_suite(seed, &options.oracle.caps(), &options.oracle.sizes()).map_err(|e| e.to_string())?;
            if let Some(loaded) = &loaded {
                reports.extend(manifest_reports(loaded, Some(seed))?);
            }
            let mut text = String::new();
            writeln!(text, "oracle run, seed {seed}").unwrap();
            write_reports(&mut text, &reports, *verbose);
            let pass = reports.iter().all(|r| r.pass);
            if let Some(path) = out {
                let (name, digest) = match &loaded {
                    Some(l) => (l.manifest.name.clone(), l.digest.clone()),
                    None => ("random-suite".to_string(), manifest::digest("")),
                };
                let depth = depth_for(cli, loaded.as_ref())?;
                let doc = CertificateDocument::new(&name, &digest, seed, depth, None).with_reports(reports);
                let json = doc.to_json().map_err(|e| format!("report document failed its own schema: {e}"))?;
                std::fs::write(path, json).map_err(|e| format!("cannot write {path}: {e}"))?;
                writeln!(text, "reports written to {path}").unwrap();
            }
            Ok(Outcome { code: if pass { 0 } else { 1 }, stdout: text, stderr: String::new() })
        }
    }
}

/// Oracle checks specific to the manifest: truncation convergence for trees,
/// stacked presentations and counting consistency for finite patterns.
fn manifest_reports(loaded: &Loaded, scramble: Option<u64>) -> Result<Vec<OracleReport>, String> {
    let w = &loaded.manifold;
    let mut reports = Vec::new();
    match w.pattern() {
        Pattern::Tree { .. } => {
            let depths = &loaded.manifest.options.truncation_depths;
            reports.push(truncation_convergence(w, depths).map_err(|e| e.to_string())?);
        }
        Pattern::Finite(_) => {
            for r in 2..w.dim() {
                reports.push(stacked_presentation_check(w, r, scramble).map_err(|e| e.to_string())?);
            }
            for b in w.catalog().blocks().values().filter(|b| !b.is_trivial()) {
                reports.push(counting_consistency(w, b).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(reports)
}

/// Witnesses shown per verdict in text output; documents carry all of them.
const SHOWN_WITNESSES: usize = 6;

fn write_witnesses(out: &mut String, witnesses: &[Witness], indent: &str) {
    for w in witnesses.iter().take(SHOWN_WITNESSES) {
        writeln!(out, "{indent}- {w}").unwrap();
    }
    if witnesses.len() > SHOWN_WITNESSES {
        writeln!(out, "{indent}- ... {} more", witnesses.len() - SHOWN_WITNESSES).unwrap();
    }
}

fn write_verdict(out: &mut String, verdict: &Verdict, indent: &str) {
    if !verdict.witnesses.is_empty() {
        writeln!(out, "{indent}witnesses:").unwrap();
        write_witnesses(out, &verdict.witnesses, &format!("{indent}  "));
    }
    if !verdict.assumptions.is_empty() {
        writeln!(out, "{indent}assumptions:").unwrap();
        for a in &verdict.assumptions {
            writeln!(out, "{indent}  - {a}").unwrap();
        }
    }
}

fn write_reports(out: &mut String, reports: &[OracleReport], verbose: bool) {
    if reports.is_empty() {
        return;
    }
    // per check: (passed, total)
    let mut tally: std::collections::BTreeMap<&str, (usize, usize)> = std::collections::BTreeMap::new();
    for r in reports {
        let entry = tally.entry(r.check.as_str()).or_default();
        entry.0 += r.pass as usize;
        entry.1 += 1;
    }
    writeln!(out, "oracle:").unwrap();
    for (check, (passed, total)) in &tally {
        writeln!(out, "  {check}: {passed}/{total} pass").unwrap();
    }
    for r in reports.iter().filter(|r| verbose || !r.pass) {
        writeln!(out, "  {r}").unwrap();
    }
}

pub fn certificate_report(c: &Certificate) -> String {
    let mut out = String::new();
    writeln!(out, "{}: {}", c.theorem, c.status).unwrap();
    writeln!(out, "  manifold: {}", c.manifold).unwrap();
    writeln!(out, "  depth: {}", c.depth).unwrap();
    if let Some(h) = &c.decided_by {
        writeln!(out, "  decided by: {h}").unwrap();
    }
    if let Some(conclusion) = &c.conclusion {
        writeln!(out, "  conclusion: W is {conclusion}").unwrap();
    }
    writeln!(out, "  hypotheses:").unwrap();
    for h in &c.hypotheses {
        writeln!(out, "    [{}] {}: {}", h.verdict.status, h.name, h.statement).unwrap();
        write_witnesses(&mut out, &h.verdict.witnesses, "      ");
    }
    if !c.assumptions.is_empty() {
        writeln!(out, "  assumptions:").unwrap();
        for a in &c.assumptions {
            writeln!(out, "    - {a}").unwrap();
        }
    }
    writeln!(out, "  model limitations:").unwrap();
    for l in &c.model_limitations {
        writeln!(out, "    - {l}").unwrap();
    }
    out
}

/// Pairs of blocks with equal signatures, named blocks first.
pub fn signature_collisions(blocks: &[Block]) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            if a.signature() == b.signature() {
                out.push((a.name().to_string(), b.name().to_string(), a.signature().to_string()));
            }
        }
    }
    out
}

fn catalog_report(loaded: &Loaded, depth: usize) -> String {
    let w = &loaded.manifold;
    let catalog = w.catalog();
    let mut out = String::new();
    writeln!(out, "manifest {}: valid", loaded.manifest.name).unwrap();
    writeln!(out, "  pattern: {}", w.describe()).unwrap();
    if !catalog.blocks().is_empty() {
        writeln!(out, "  blocks:").unwrap();
    }
    for b in catalog.blocks().values() {
        let filled = if b.duality_filled() { " (duality filled)" } else { "" };
        writeln!(out, "    {}: {}{filled}", b.name(), b.signature()).unwrap();
    }
    if let Some(f) = catalog.family() {
        let guarantees: Vec<&str> = f.guarantees().iter().map(|g| g.as_str()).collect();
        writeln!(out, "  family {}: primes from {}, guarantees [{}]", f.name(), f.primes_from(), guarantees.join(", "))
            .unwrap();
        let first = f.first_prime();
        if let Ok(m) = f.member(first) {
            writeln!(out, "    {}: {}", m.name(), m.signature()).unwrap();
        }
    }
    if !catalog.declared_usages().is_empty() {
        writeln!(out, "  usage:").unwrap();
        for (name, count) in catalog.declared_usages() {
            writeln!(out, "    {name}: {count}").unwrap();
        }
    }
    let mut pool: Vec<Block> = catalog.blocks().values().cloned().collect();
    if let Some(f) = catalog.family() {
        pool.extend(f.sample(depth).into_iter().map(|(_, b)| b));
    }
    let collisions = signature_collisions(&pool);
    if !collisions.is_empty() {
        writeln!(out, "  indistinguishable in this model:").unwrap();
        for (a, b, sig) in collisions {
            writeln!(out, "    {a} and {b} have the same signature {sig}").unwrap();
        }
    }
    out
}

fn invariants_report(w: &SumManifold, r: u32, depth: usize) -> Result<String, String> {
    let mut out = String::new();
    writeln!(out, "manifold: {}", w.describe()).unwrap();
    let pi1 = w.fundamental_group().map_err(|e| e.to_string())?;
    writeln!(out, "pi1: {pi1}").unwrap();
    let h = w.homology(r).map_err(|e| e.to_string())?;
    writeln!(out, "H_{r}: {h}").unwrap();
    writeln!(out, "  rank: {}", h.rank()).unwrap();
    writeln!(out, "  {:<14} multiplicity", "prime power").unwrap();
    for (q, c) in h.head() {
        writeln!(out, "  {:<14} {c}", format!("{}^{}", q.prime(), q.exponent())).unwrap();
    }
    if let Some(tail) = h.tail() {
        writeln!(out, "  tail from family {} (first {depth} entries):", tail.family().name()).unwrap();
        for (q, c) in h.tail_entries().take(depth) {
            writeln!(out, "  {:<14} {c}", format!("{}^{}", q.prime(), q.exponent())).unwrap();
        }
    }
    match w.homotopy(r) {
        Ok(_) => writeln!(out, "pi_{r} = H_{r} (Hurewicz: tree pattern, blocks {}-connected)", r - 1).unwrap(),
        Err(e) => writeln!(out, "pi_{r} not computed: {e}").unwrap(),
    }
    Ok(out)
}
