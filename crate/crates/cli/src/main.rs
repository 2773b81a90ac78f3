//! Command-line front end: oracles, tables, conversion, simulation,
//! verification sweeps and size statistics.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use svcomp::annot::AnnotationSpec;
use svcomp::automaton::{annotated_index, Alphabet, AnnotatedWord, Automaton, Letter};
use svcomp::cg1::{self, Cg1Options};
use svcomp::cg2::{self, Cg2Options};
use svcomp::exec::{self, Limits, Outcome, DEFAULT_CAP};
use svcomp::format;
use svcomp::tables::{self, normalize_restart, render_bits, Relation};
use svcomp::verify::{self, Construction, Malformed, SweepReport};

#[derive(Parser, Debug)]
#[command(name = "svcomp", version, about = "Self-verifying complementation of one-way and two-way NFAs")]
struct Cli {
    /// Maximum number of configurations a single search may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed of every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Cg1,
    Cg2,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Cg1 => "cg1",
            Mode::Cg2 => "cg2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableOp {
    Ltable,
    Qx,
    Sstar,
    T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    /// An explicit two-way NFA over the annotated alphabet.
    Explicit,
    /// The annotation of a word.
    Annotation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Cg1,
    Cg2,
    Tables,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Membership of a word, by brute force on the automaton itself.
    Oracle {
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long, default_value = "")]
        word: String,
    },
    /// Tables and reachable sets of a prefix.
    Tables {
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long, default_value = "")]
        prefix: String,
        #[arg(long, value_enum)]
        op: TableOp,
        /// Number of crossings for `t`.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Letter under the head for `sstar` and `t`: a symbol, `<` or `>`.
        #[arg(long, default_value = ">")]
        letter: String,
        /// Use the machine extended with the restart state.
        #[arg(long)]
        normalized: bool,
    },
    /// Builds the self-verifying machine of an automaton.
    Convert {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        automaton: PathBuf,
        #[arg(long, value_enum, default_value = "explicit")]
        emit: Emit,
        /// Word to annotate with `--emit annotation`.
        #[arg(long, default_value = "")]
        word: String,
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
    /// Runs a constructed machine on an annotated word.
    Simulate {
        /// An explicit machine written by `convert`.
        #[arg(long, conflicts_with_all = ["automaton", "mode"])]
        machine: Option<PathBuf>,
        /// A source automaton, run through the interpreted machine.
        #[arg(long, requires = "mode")]
        automaton: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value = "")]
        word: String,
        /// `auto` or a file holding an annotated word (`a/0 b/1 ...`).
        #[arg(long, default_value = "auto")]
        annot: String,
        /// Run the two-way construction with its crossing clock.
        #[arg(long)]
        clocked: bool,
    },
    /// Sweeps a construction or the table identities against the oracles.
    Verify {
        #[arg(long, value_enum)]
        mode: VerifyMode,
        /// Source automaton; without it, `--random` seeded automata are used.
        #[arg(long)]
        automaton: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        random: usize,
        /// Largest state count of random automata.
        #[arg(long, default_value_t = 2)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Longest prefix for `--mode tables`.
        #[arg(long, default_value_t = 4)]
        max_prefix: usize,
        /// Every track is tried for words up to this length.
        #[arg(long, default_value_t = 6)]
        exhaustive_up_to: usize,
        /// Random tracks for longer words, on top of single flips.
        #[arg(long, default_value_t = 4)]
        random_tracks: usize,
        /// Skip malformed annotations.
        #[arg(long)]
        no_malformed: bool,
        /// Disable the block check (mutation experiment).
        #[arg(long)]
        disable_check: bool,
    },
    /// Field cardinalities, structural bounds and reachable state counts.
    Stats {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Inclusive range of source sizes, `A..B`.
        #[arg(long, default_value = "1..3")]
        n_range: String,
        /// Random sources per size for reachable counts.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

const SOURCE_TAG: &str = "# cg-source ";

fn read_automaton(path: &Path) -> Result<Automaton> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let a = format::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(problem) = a.validate().into_iter().next() {
        bail!("{}: {problem}", path.display());
    }
    Ok(a)
}

fn alphabet_of(a: &Automaton) -> &Alphabet {
    match a {
        Automaton::OneWay(a) => a.alphabet(),
        Automaton::TwoWay(a) => a.alphabet(),
    }
}

fn parse_word(a: &Automaton, text: &str) -> Result<Vec<svcomp::Symbol>> {
    alphabet_of(a).parse_word(text).map_err(|e| anyhow!(e))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render_rel(r: &Relation) -> String {
    let pairs: Vec<String> = r.iter().map(|(p, q)| format!("({},{})", p.0, q.0)).collect();
    format!("{{{}}}", pairs.join(", "))
}

fn verdict(o: Outcome) -> &'static str {
    match (o.accept_path, o.reject_path) {
        (true, false) => "ACCEPT",
        (false, true) => "REJECT",
        (false, false) => "NEITHER",
        (true, true) => "BOTH",
    }
}

fn build(mode: Mode, a: &Automaton, clocked: bool, check: bool) -> Result<Construction> {
    verify::build(
        mode.name(),
        a,
        Cg1Options { check_annot: check, ..Default::default() },
        Cg2Options { clocked, check_table: check, ..Default::default() },
    )
    .map_err(|e| anyhow!(e))
}

fn cmd_oracle(cli: &Cli, automaton: &Path, word: &str) -> Result<ExitCode> {
    let a = read_automaton(automaton)?;
    let w = parse_word(&a, word)?;
    let member = verify::oracle_membership(&a, &w, Limits { cap: cli.cap })?;
    if cli.json {
        println!("{}", json!({ "word": word, "member": member }));
    } else {
        println!("{member}");
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_letter(al: &Alphabet, text: &str) -> Result<Letter> {
    match text {
        "<" => Ok(Letter::LeftEnd),
        ">" => Ok(Letter::RightEnd),
        s => al.lookup(s).map(Letter::Sym).ok_or_else(|| anyhow!("unknown letter `{s}`")),
    }
}

fn cmd_tables(cli: &Cli, automaton: &Path, prefix: &str, op: TableOp, k: usize, letter: &str, normalized: bool) -> Result<ExitCode> {
    let a = read_automaton(automaton)?;
    let u = parse_word(&a, prefix)?;
    let limits = Limits { cap: cli.cap };
    if op == TableOp::Qx {
        let set = match &a {
            Automaton::OneWay(a) => tables::qx_1nfa(a, &u),
            Automaton::TwoWay(a) => tables::qx_2nfa(a, &u, limits)?,
        };
        let bits = render_bits(&tables::encode_set(&set, a.n()));
        let states: Vec<usize> = set.iter().map(|s| s.0).collect();
        if cli.json {
            println!("{}", json!({ "op": "qx", "prefix": prefix, "states": states, "encoding": bits }));
        } else {
            println!("{states:?}\n{bits}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let Automaton::TwoWay(mut m) = a else { bail!("crossing tables need a two-way automaton") };
    if normalized {
        m = normalize_restart(&m).inner;
    }
    let tau = parse_letter(m.alphabet(), letter)?;
    let (name, rel) = match op {
        TableOp::Ltable => ("ltable", tables::ltable(&m, &u, limits)?),
        TableOp::Sstar => ("sstar", tables::s_star(&m, &u, tau, limits)?),
        TableOp::T => ("t", tables::t_rel(&m, &u, tau, k, limits)?),
        TableOp::Qx => unreachable!(),
    };
    let bits = render_bits(&tables::encode_rel(&rel, m.n()));
    if cli.json {
        let pairs: Vec<[usize; 2]> = rel.iter().map(|(p, q)| [p.0, q.0]).collect();
        println!("{}", json!({ "op": name, "prefix": prefix, "states": m.n(), "pairs": pairs, "encoding": bits }));
    } else {
        println!("{}\n{bits}", render_rel(&rel));
    }
    Ok(ExitCode::SUCCESS)
}

fn explicit_text(mode: Mode, a: &Automaton, cap: usize) -> Result<(String, usize)> {
    let limits = Limits { cap };
    let nfa = match (mode, a) {
        (Mode::Cg1, Automaton::OneWay(src)) => {
            cg1::compile_explicit(&cg1::build_cg1(src).map_err(|e| anyhow!(e))?, limits)?.nfa
        }
        (Mode::Cg2, Automaton::TwoWay(src)) => {
            cg2::compile_explicit(&cg2::build_cg2(src).map_err(|e| anyhow!(e))?, limits)?.nfa
        }
        _ => bail!("mode {} does not match the automaton type", mode.name()),
    };
    let states = nfa.n();
    let mut text = format!("{SOURCE_TAG}mode {}\n", mode.name());
    for line in format::serialize(a).lines() {
        text.push_str(&format!("{SOURCE_TAG}{line}\n"));
    }
    text.push_str(&format::serialize(&Automaton::TwoWay(nfa)));
    Ok((text, states))
}

fn cmd_convert(cli: &Cli, mode: Mode, automaton: &Path, emit: Emit, word: &str, output: Option<&Path>) -> Result<ExitCode> {
    let a = read_automaton(automaton)?;
    match emit {
        Emit::Explicit => {
            let (text, states) = explicit_text(mode, &a, cli.cap)?;
            write_output(output, &text)?;
            if output.is_some() {
                if cli.json {
                    println!("{}", json!({ "mode": mode.name(), "states": states }));
                } else {
                    println!("states {states}");
                }
            }
        }
        Emit::Annotation => {
            let b = build(mode, &a, false, true)?;
            let w = parse_word(&a, word)?;
            let x = b.annotation().annotate(&w);
            let text = if cli.json {
                json!({ "word": word, "track": render_bits(&x.bits()), "annotated": x.render(alphabet_of(&a)) }).to_string()
            } else {
                x.render(alphabet_of(&a))
            };
            write_output(output, &format!("{text}\n"))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Source automaton and mode recorded in an explicit machine.
fn embedded_source(text: &str) -> Result<(Mode, Automaton)> {
    let mut mode = None;
    let mut src = String::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix(SOURCE_TAG) else { continue };
        match rest.strip_prefix("mode ") {
            Some("cg1") => mode = Some(Mode::Cg1),
            Some("cg2") => mode = Some(Mode::Cg2),
            Some(other) => bail!("unknown embedded mode `{other}`"),
            None => {
                src.push_str(rest);
                src.push('\n');
            }
        }
    }
    let mode = mode.ok_or_else(|| anyhow!("the machine does not record its source"))?;
    Ok((mode, format::parse(&src).context("parsing the embedded source")?))
}

fn annotated_input(a: &Automaton, spec: &AnnotationSpec, word: &str, annot: &str) -> Result<AnnotatedWord> {
    if annot == "auto" {
        return Ok(spec.annotate(&parse_word(a, word)?));
    }
    let text = fs::read_to_string(annot).with_context(|| format!("reading {annot}"))?;
    AnnotatedWord::parse(&text, alphabet_of(a)).map_err(|e| anyhow!(e))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    machine: Option<&Path>,
    automaton: Option<&Path>,
    mode: Option<Mode>,
    word: &str,
    annot: &str,
    clocked: bool,
) -> Result<ExitCode> {
    let limits = Limits { cap: cli.cap };
    let (x, outcome, alphabet) = match (machine, automaton, mode) {
        (Some(path), _, _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let (mode, src) = embedded_source(&text)?;
            let Automaton::TwoWay(nfa) = format::parse(&text)? else { bail!("an explicit machine is a 2nfa") };
            let b = build(mode, &src, false, true)?;
            let x = annotated_input(&src, &b.annotation(), word, annot)?;
            let tape: Vec<_> = x.0.iter().map(|&s| annotated_index(s)).collect();
            (x, exec::decide(&nfa, &tape, limits)?, alphabet_of(&src).clone())
        }
        (None, Some(path), Some(mode)) => {
            let src = read_automaton(path)?;
            let b = build(mode, &src, clocked, true)?;
            let x = annotated_input(&src, &b.annotation(), word, annot)?;
            (x.clone(), b.decide(&x, limits)?.0, alphabet_of(&src).clone())
        }
        _ => bail!("give --machine, or --automaton with --mode"),
    };
    if cli.json {
        println!(
            "{}",
            json!({
                "annotated": x.render(&alphabet),
                "accept_path": outcome.accept_path,
                "reject_path": outcome.reject_path,
                "verdict": verdict(outcome),
            })
        );
    } else {
        println!("{}", verdict(outcome));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_report(cli: &Cli, r: &SweepReport) {
    if !cli.json {
        println!(
            "{} {} {}: words {} accept {} reject {} malformed {}/{} silent checks {} failures {} ({} ms)",
            if r.passed() { "PASS" } else { "FAIL" },
            r.mode,
            r.automaton,
            r.words,
            r.accept_agreements,
            r.reject_agreements,
            r.malformed_silent,
            r.malformed_samples,
            r.checks,
            r.failures.len(),
            r.elapsed_ms
        );
        for f in r.failures.iter().take(10) {
            println!("  {:?} {} {} {}", f.kind, f.word, f.track.as_deref().unwrap_or("-"), f.detail);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    cli: &Cli,
    mode: VerifyMode,
    automaton: Option<&Path>,
    random: usize,
    max_n: usize,
    max_len: usize,
    max_prefix: usize,
    malformed: Malformed,
    disable_check: bool,
) -> Result<ExitCode> {
    let limits = Limits { cap: cli.cap };
    let mut sources: Vec<(String, Automaton)> = Vec::new();
    if let Some(p) = automaton {
        sources.push((p.display().to_string(), read_automaton(p)?));
    }
    let want_two_way = mode != VerifyMode::Cg1;
    if want_two_way {
        for (i, a) in verify::random_2nfas(cli.seed, random, max_n, 2).into_iter().enumerate() {
            sources.push((format!("random-{}-{i}", cli.seed), Automaton::TwoWay(a)));
        }
    } else {
        for (i, a) in verify::random_1nfas(cli.seed, random, max_n, 2).into_iter().enumerate() {
            sources.push((format!("random-{}-{i}", cli.seed), Automaton::OneWay(a)));
        }
    }
    if sources.is_empty() {
        bail!("give --automaton or --random");
    }
    let mut reports = Vec::new();
    for (id, a) in &sources {
        let r = match mode {
            VerifyMode::Tables => {
                let Automaton::TwoWay(a) = a else { bail!("{id}: tables need a two-way automaton") };
                verify::check_tables_suite(a, id, max_prefix, max_len, limits)?
            }
            VerifyMode::Cg1 | VerifyMode::Cg2 => {
                let m = if mode == VerifyMode::Cg1 { Mode::Cg1 } else { Mode::Cg2 };
                let b = build(m, a, false, !disable_check)?;
                verify::check_property_d(&b, id, max_len, malformed, limits)?
            }
        };
        print_report(cli, &r);
        reports.push(r);
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    }
    Ok(if reports.iter().all(SweepReport::passed) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text.split_once("..").ok_or_else(|| anyhow!("expected A..B, got `{text}`"))?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if a == 0 || a > b {
        bail!("empty or invalid range `{text}`");
    }
    Ok((a, b))
}

fn cmd_stats(cli: &Cli, mode: Mode, n_range: &str, samples: usize, report: Option<&Path>) -> Result<ExitCode> {
    let (lo, hi) = parse_range(n_range)?;
    let mut out = Vec::new();
    for n in lo..=hi {
        let r = verify::state_space_report(mode.name(), n, samples, cli.seed, Limits { cap: cli.cap })
            .map_err(|e| anyhow!(e))?;
        if !cli.json {
            let reach = r.reachable.map_or_else(|| "over cap".to_string(), |v| v.to_string());
            match r.structural_bound_core {
                Some(core) => println!(
                    "{} n={} n'={} structural={} core={} reachable={reach}",
                    r.mode, r.n, r.normalized_n, r.structural_bound, core
                ),
                None => println!("{} n={} structural={} reachable={reach}", r.mode, r.n, r.structural_bound),
            }
        }
        out.push(r);
    }
    let text = serde_json::to_string_pretty(&out)?;
    if let Some(p) = report {
        fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
    }
    if cli.json {
        println!("{text}");
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    if let Some(j) = cli.jobs {
        verify::set_jobs(j.max(1));
    }
    match &cli.command {
        Command::Oracle { automaton, word } => cmd_oracle(cli, automaton, word),
        Command::Tables { automaton, prefix, op, k, letter, normalized } => {
            cmd_tables(cli, automaton, prefix, *op, *k, letter, *normalized)
        }
        Command::Convert { mode, automaton, emit, word, output } => {
            cmd_convert(cli, *mode, automaton, *emit, word, output.as_deref())
        }
        Command::Simulate { machine, automaton, mode, word, annot, clocked } => {
            cmd_simulate(cli, machine.as_deref(), automaton.as_deref(), *mode, word, annot, *clocked)
        }
        Command::Verify {
            mode,
            automaton,
            random,
            max_n,
            max_len,
            max_prefix,
            exhaustive_up_to,
            random_tracks,
            no_malformed,
            disable_check,
        } => {
            let malformed = if *no_malformed {
                Malformed::NONE
            } else {
                Malformed { exhaustive_up_to: *exhaustive_up_to, random_tracks: *random_tracks, seed: cli.seed }
            };
            cmd_verify(cli, *mode, automaton.as_deref(), *random, *max_n, *max_len, *max_prefix, malformed, *disable_check)
        }
        Command::Stats { mode, n_range, samples, report } => cmd_stats(cli, *mode, n_range, *samples, report.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
