//! Brute-force oracles and the sweeps that check both constructions
//! against them.
//!
//! Nothing here goes through the constructions' own logic: membership comes
//! from subset simulation (one-way) or configuration search on the source
//! (two-way), and tables are checked against position-restricted searches.

use std::collections::{BTreeSet, VecDeque};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annot::AnnotationSpec;
use crate::automaton::{Alphabet, AnnotatedWord, Automaton, Dir, Letter, OneWayNfa, StateId, Symbol, TwoWayNfa, Word};
use crate::cg1::{Cg1Machine, Cg1Options};
use crate::cg2::{Cg2Machine, Cg2Options};
use crate::exec::{self, ExecError, Limits, Outcome};
use crate::tables::{self, encode_rel, normalize_restart, Relation};

/// Exact membership, computed without any construction code.
pub fn oracle_membership(a: &Automaton, w: &[Symbol], limits: Limits) -> Result<bool, ExecError> {
    match a {
        Automaton::OneWay(a) => {
            let mut cur: BTreeSet<StateId> = [a.start()].into();
            for &s in w {
                cur = cur.iter().flat_map(|&p| a.delta(p, s).iter().copied()).collect();
            }
            Ok(cur.contains(&a.accept()))
        }
        Automaton::TwoWay(a) => Ok(exec::decide(a, w, limits)?.accept_path),
    }
}

/// `S^k` on `⊢uτ` by direct search: pairs `(p, q)` such that the machine,
/// started in `p` on `τ`, is back on `τ` in `q` after at most `k` excursions
/// into `⊢u`, each starting with a left move.
pub fn s_oracle(a: &TwoWayNfa, u: &[Symbol], tau: Letter, k: usize) -> Relation {
    let home = u.len() + 1;
    let letter = |pos: usize| match pos {
        0 => Letter::LeftEnd,
        p if p == home => tau,
        p => Letter::Sym(u[p - 1]),
    };
    let mut out = Relation::new();
    for p0 in 0..a.n() {
        // (state, position, excursions started)
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([(StateId(p0), home, 0usize)]);
        seen.insert((StateId(p0), home, 0));
        while let Some((p, pos, e)) = queue.pop_front() {
            if pos == home {
                out.insert((StateId(p0), p));
                if e == k {
                    continue;
                }
            }
            for &(q, d) in a.delta(p, letter(pos)) {
                let next = match (d, pos) {
                    (Dir::L, 0) => continue,
                    (Dir::L, p) if p == home => (q, p - 1, e + 1),
                    (Dir::L, p) => (q, p - 1, e),
                    (Dir::R, p) if p == home => continue,
                    (Dir::R, p) => (q, p + 1, e),
                };
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    out
}

/// Uniform random one-way NFA: every `(state, symbol)` gets 0–2 transitions.
pub fn random_1nfa(rng: &mut impl Rng, n: usize, sigma: usize) -> OneWayNfa {
    let start = StateId(rng.gen_range(0..n));
    let accept = StateId(rng.gen_range(0..n));
    let mut a = OneWayNfa::new(n, Alphabet::letters(sigma), start, accept);
    for p in 0..n {
        for s in 0..sigma {
            for _ in 0..rng.gen_range(0..=2) {
                a.add_transition(StateId(p), Symbol(s as u16), StateId(rng.gen_range(0..n)));
            }
        }
    }
    a
}

/// Uniform random two-way NFA: every `(state, letter)` gets 0–2 transitions
/// with uniform direction. Moves off the tape are never taken.
pub fn random_2nfa(rng: &mut impl Rng, n: usize, sigma: usize) -> TwoWayNfa {
    let start = StateId(rng.gen_range(0..n));
    let accept = StateId(rng.gen_range(0..n));
    let mut a = TwoWayNfa::new(n, Alphabet::letters(sigma), start, accept, None);
    let letters: Vec<Letter> = std::iter::once(Letter::LeftEnd)
        .chain((0..sigma).map(|s| Letter::Sym(Symbol(s as u16))))
        .chain(std::iter::once(Letter::RightEnd))
        .collect();
    for p in 0..n {
        for &l in &letters {
            for _ in 0..rng.gen_range(0..=2) {
                let d = if rng.gen() { Dir::L } else { Dir::R };
                a.add_transition(StateId(p), l, StateId(rng.gen_range(0..n)), d);
            }
        }
    }
    a
}

/// `count` seeded random automata with sizes cycling through `1..=max_n`.
pub fn random_1nfas(seed: u64, count: usize, max_n: usize, sigma: usize) -> Vec<OneWayNfa> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_1nfa(&mut rng, 1 + i % max_n, sigma)).collect()
}

pub fn random_2nfas(seed: u64, count: usize, max_n: usize, sigma: usize) -> Vec<TwoWayNfa> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_2nfa(&mut rng, 1 + i % max_n, sigma)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    /// Wrong outcome on a well-annotated word.
    Verdict,
    MalformedAccept,
    MalformedReject,
    /// A table identity does not hold.
    Tables,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub word: String,
    /// Annotation track, when the failure concerns an annotated word.
    pub track: Option<String>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub automaton: String,
    pub mode: String,
    pub max_len: usize,
    pub words: usize,
    pub accept_agreements: usize,
    pub reject_agreements: usize,
    pub malformed_samples: usize,
    pub malformed_silent: usize,
    pub checks: usize,
    pub max_configurations: usize,
    pub elapsed_ms: u128,
    pub failures: Vec<Failure>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn absorb(&mut self, o: SweepReport) {
        self.words += o.words;
        self.accept_agreements += o.accept_agreements;
        self.reject_agreements += o.reject_agreements;
        self.malformed_samples += o.malformed_samples;
        self.malformed_silent += o.malformed_silent;
        self.checks += o.checks;
        self.max_configurations = self.max_configurations.max(o.max_configurations);
        self.failures.extend(o.failures);
    }

    pub fn has_failure(&self, kind: FailureKind) -> bool {
        self.failures.iter().any(|f| f.kind == kind)
    }
}

/// A built construction together with its source.
#[derive(Clone, Debug)]
pub enum Construction {
    Cg1(Cg1Machine),
    Cg2(Cg2Machine),
}

impl Construction {
    pub fn cg1(a: &OneWayNfa, options: Cg1Options) -> Result<Self, String> {
        crate::cg1::build_cg1_with(a, options).map(Self::Cg1).map_err(|e| e.to_string())
    }

    pub fn cg2(a: &TwoWayNfa, options: Cg2Options) -> Result<Self, String> {
        crate::cg2::build_cg2_with(a, options).map(Self::Cg2).map_err(|e| e.to_string())
    }

    pub fn mode(&self) -> &'static str {
        match self {
            Self::Cg1(_) => "cg1",
            Self::Cg2(_) => "cg2",
        }
    }

    pub fn source(&self) -> Automaton {
        match self {
            Self::Cg1(b) => Automaton::OneWay(b.source().clone()),
            Self::Cg2(b) => Automaton::TwoWay(b.original().clone()),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Self::Cg1(b) => b.source().alphabet(),
            Self::Cg2(b) => b.source().inner.alphabet(),
        }
    }

    pub fn annotation(&self) -> AnnotationSpec {
        match self {
            Self::Cg1(b) => AnnotationSpec::cg1(b.source()),
            Self::Cg2(b) => AnnotationSpec::cg2_normalized(b.source().clone()),
        }
    }

    pub fn decide(&self, x: &AnnotatedWord, limits: Limits) -> Result<(Outcome, usize), ExecError> {
        let (o, stats) = match self {
            Self::Cg1(b) => exec::decide_with_stats(b, &x.0, limits)?,
            Self::Cg2(b) => exec::decide_with_stats(b, &x.0, limits)?,
        };
        Ok((o, stats.configurations))
    }
}

/// Which malformed annotations are tried for each word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Malformed {
    /// Every track is tried for words up to this length.
    pub exhaustive_up_to: usize,
    /// Random tracks tried for longer words, on top of all single flips.
    pub random_tracks: usize,
    pub seed: u64,
}

impl Default for Malformed {
    fn default() -> Self {
        Self { exhaustive_up_to: 6, random_tracks: 4, seed: 0 }
    }
}

impl Malformed {
    pub const NONE: Malformed = Malformed { exhaustive_up_to: 0, random_tracks: 0, seed: 0 };

    /// Only single-bit flips.
    pub const FLIPS: Malformed = Malformed { exhaustive_up_to: 0, random_tracks: 0, seed: 1 };

    pub fn is_none(&self) -> bool {
        *self == Self::NONE
    }

    fn tracks(&self, good: &[bool], word_index: usize) -> Vec<Vec<bool>> {
        let len = good.len();
        if self.is_none() || len == 0 {
            return Vec::new();
        }
        let mut out: BTreeSet<Vec<bool>> = BTreeSet::new();
        if len <= self.exhaustive_up_to {
            for mask in 0u32..(1 << len) {
                out.insert((0..len).map(|i| mask >> i & 1 == 1).collect());
            }
        } else {
            for i in 0..len {
                let mut t = good.to_vec();
                t[i] = !t[i];
                out.insert(t);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (word_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            for _ in 0..self.random_tracks {
                out.insert((0..len).map(|_| rng.gen()).collect());
            }
        }
        out.remove(good);
        out.into_iter().collect()
    }
}

fn render_track(bits: &[bool]) -> String {
    tables::render_bits(bits)
}

fn check_word(
    b: &Construction,
    source: &Automaton,
    w: &Word,
    index: usize,
    malformed: Malformed,
    limits: Limits,
) -> Result<SweepReport, ExecError> {
    let mut r = SweepReport { words: 1, ..Default::default() };
    let alphabet = b.alphabet();
    let spec = b.annotation();
    let good = spec.track(w);
    let member = oracle_membership(source, w, limits)?;
    let (o, configs) = b.decide(&AnnotatedWord::zip(w, &good), limits)?;
    r.max_configurations = configs;
    let want = if member { Outcome::ACCEPT } else { Outcome::REJECT };
    if o == want {
        if member {
            r.accept_agreements += 1;
        } else {
            r.reject_agreements += 1;
        }
    } else {
        r.failures.push(Failure {
            kind: FailureKind::Verdict,
            word: alphabet.render_word(w),
            track: Some(render_track(&good)),
            detail: format!("expected {want:?}, got {o:?}"),
        });
    }
    for track in malformed.tracks(&good, index) {
        r.malformed_samples += 1;
        let (o, configs) = b.decide(&AnnotatedWord::zip(w, &track), limits)?;
        r.max_configurations = r.max_configurations.max(configs);
        if o == Outcome::NEITHER {
            r.malformed_silent += 1;
            continue;
        }
        for (hit, kind) in [(o.accept_path, FailureKind::MalformedAccept), (o.reject_path, FailureKind::MalformedReject)] {
            if hit {
                r.failures.push(Failure {
                    kind,
                    word: alphabet.render_word(w),
                    track: Some(render_track(&track)),
                    detail: format!("malformed annotation admits {o:?}"),
                });
            }
        }
    }
    Ok(r)
}

/// Runs `b` on the given words, well-annotated and malformed. Words are
/// checked in parallel; the report lists failures in word order.
pub fn check_words(
    b: &Construction,
    id: &str,
    words: &[Word],
    malformed: Malformed,
    limits: Limits,
) -> Result<SweepReport, ExecError> {
    let start = Instant::now();
    let source = b.source();
    let parts: Vec<Result<SweepReport, ExecError>> =
        words.par_iter().enumerate().map(|(i, w)| check_word(b, &source, w, i, malformed, limits)).collect();
    let mut report = SweepReport {
        automaton: id.to_string(),
        mode: b.mode().to_string(),
        max_len: words.iter().map(Vec::len).max().unwrap_or(0),
        ..Default::default()
    };
    for p in parts {
        report.absorb(p?);
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Every word up to `max_len`: outcomes must match the oracle on the
/// annotated word and be silent on malformed annotations.
pub fn check_property_d(
    b: &Construction,
    id: &str,
    max_len: usize,
    malformed: Malformed,
    limits: Limits,
) -> Result<SweepReport, ExecError> {
    let words = b.alphabet().words_up_to(max_len);
    check_words(b, id, &words, malformed, limits)
}

fn tables_failure(r: &mut SweepReport, alphabet: &Alphabet, u: &[Symbol], detail: String) {
    r.failures.push(Failure { kind: FailureKind::Tables, word: alphabet.render_word(u), track: None, detail });
}

fn letter_name(alphabet: &Alphabet, l: Letter) -> String {
    match l {
        Letter::LeftEnd => "⊢".into(),
        Letter::Sym(s) => alphabet.name(s).into(),
        Letter::RightEnd => "⊣".into(),
    }
}

fn check_prefix(a: &TwoWayNfa, u: &[Symbol], limits: Limits) -> Result<SweepReport, ExecError> {
    let mut r = SweepReport::default();
    let al = a.alphabet();
    let norm = normalize_restart(a);
    let a1 = &norm.inner;
    let n = a1.n();
    let table = tables::ltable(a1, u, limits)?;

    r.checks += 1;
    let by_updates = tables::ltable_by_updates(a1, u);
    if by_updates != table {
        tables_failure(&mut r, al, u, format!("iterated updates give {by_updates:?}, search gives {table:?}"));
    }

    for s in al.symbols() {
        r.checks += 1;
        let mut us = u.to_vec();
        us.push(s);
        let next = tables::ltable(a1, &us, limits)?;
        let updated = tables::update_ltable(&table, s, a1);
        if next != updated {
            tables_failure(&mut r, al, &us, format!("update gives {updated:?}, search gives {next:?}"));
        }
    }

    r.checks += 1;
    let restart = norm.restart;
    let row: BTreeSet<StateId> = table.iter().filter(|&&(p, _)| p == restart).map(|&(_, q)| q).collect();
    let qx = tables::qx_2nfa(a, u, limits)?;
    if row != qx {
        tables_failure(&mut r, al, u, format!("restart row {row:?} differs from first-visit states {qx:?}"));
    }
    if table.iter().any(|&(_, q)| q == restart) {
        tables_failure(&mut r, al, u, "restart is the target of a pair".into());
    }

    let cutoff = tables::s_star_cutoff(n);
    let letters: Vec<Letter> = al.symbols().map(Letter::Sym).chain(std::iter::once(Letter::RightEnd)).collect();
    for &tau in &letters {
        let name = letter_name(al, tau);
        r.checks += 1;
        if tables::t_from_table(a1, &table, tau, 0) != (0..n).map(|p| (StateId(p), StateId(p))).collect() {
            tables_failure(&mut r, al, u, format!("T⁰ on {name} is not the identity"));
        }
        let mut prev = Relation::new();
        for k in 0..=cutoff + n {
            r.checks += 1;
            let s = tables::s_from_table(a1, &table, tau, k);
            let direct = s_oracle(a1, u, tau, k);
            if s != direct {
                tables_failure(&mut r, al, u, format!("S^{k} on {name}: tables {s:?}, search {direct:?}"));
            }
            if !prev.is_subset(&s) {
                tables_failure(&mut r, al, u, format!("S^{k} on {name} shrinks"));
            }
            if k > cutoff && s != prev {
                tables_failure(&mut r, al, u, format!("S^{k} on {name} still grows past {cutoff}"));
            }
            prev = s;
        }
    }
    Ok(r)
}

/// Table identities on every prefix up to `max_prefix`, block annotations
/// against searched tables, and membership from tables against search on
/// every word up to `max_word`.
pub fn check_tables_suite(
    a: &TwoWayNfa,
    id: &str,
    max_prefix: usize,
    max_word: usize,
    limits: Limits,
) -> Result<SweepReport, ExecError> {
    let start = Instant::now();
    let al = a.alphabet();
    let mut report =
        SweepReport { automaton: id.to_string(), mode: "tables".into(), max_len: max_word, ..Default::default() };
    let prefixes = al.words_up_to(max_prefix);
    let parts: Vec<Result<SweepReport, ExecError>> = prefixes.par_iter().map(|u| check_prefix(a, u, limits)).collect();
    for p in parts {
        report.absorb(p?);
    }

    let norm = normalize_restart(a);
    let spec = AnnotationSpec::cg2_normalized(norm.clone());
    let words = al.words_up_to(max_word);
    let parts: Vec<Result<SweepReport, ExecError>> = words
        .par_iter()
        .map(|w| {
            let mut r = SweepReport { words: 1, ..Default::default() };
            r.checks += 2;
            let member = exec::decide(a, w, limits)?.accept_path;
            let normalized = exec::decide(&norm.inner, w, limits)?.accept_path;
            let via_tables = tables::accepts_via_ltables(&norm, w);
            if member != via_tables || normalized != member {
                tables_failure(
                    &mut r,
                    al,
                    w,
                    format!("search {member}, normalized search {normalized}, tables {via_tables}"),
                );
            }
            let bs = spec.block_size;
            let mut expect = Vec::new();
            for end in (bs..=w.len()).step_by(bs) {
                expect.extend(encode_rel(&tables::ltable(&norm.inner, &w[..end], limits)?, norm.n()));
            }
            expect.resize(w.len(), false);
            if spec.track(w) != expect {
                tables_failure(&mut r, al, w, "annotation differs from searched tables".into());
            }
            Ok(r)
        })
        .collect();
    for p in parts {
        report.absorb(p?);
    }
    report.elapsed_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Sets the worker count of the global pool. Only the first call has an
/// effect.
pub fn set_jobs(jobs: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
}

/// Builds a construction, rejecting sources that do not fit the packed state.
pub fn build(mode: &str, a: &Automaton, cg1: Cg1Options, cg2: Cg2Options) -> Result<Construction, String> {
    match (mode, a) {
        ("cg1", Automaton::OneWay(a)) => Construction::cg1(a, cg1),
        ("cg2", Automaton::TwoWay(a)) => Construction::cg2(a, cg2),
        ("cg2", Automaton::OneWay(_)) => Err("cg2 expects a two-way automaton".into()),
        ("cg1", Automaton::TwoWay(_)) => Err("cg1 expects a one-way automaton".into()),
        _ => Err(format!("unknown mode `{mode}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures::{a1, a2};

    #[test]
    fn oracle_on_a1() {
        let a = Automaton::OneWay(a1());
        let w = a1().alphabet().parse_word("ba").unwrap();
        assert!(oracle_membership(&a, &w, Limits::default()).unwrap());
        assert!(!oracle_membership(&a, &[], Limits::default()).unwrap());
    }

    #[test]
    fn generators_are_reproducible() {
        assert_eq!(random_2nfas(3, 4, 2, 2), random_2nfas(3, 4, 2, 2));
        assert_eq!(random_1nfas(3, 4, 3, 2), random_1nfas(3, 4, 3, 2));
        assert_ne!(random_1nfas(3, 4, 3, 2), random_1nfas(4, 4, 3, 2));
    }

    #[test]
    fn malformed_tracks_exclude_the_good_one() {
        let m = Malformed::default();
        let good = vec![true, false, false];
        let t = m.tracks(&good, 0);
        assert_eq!(t.len(), 7);
        assert!(!t.contains(&good));
        let long = vec![false; 8];
        assert!(Malformed::FLIPS.tracks(&long, 0).len() == 8);
    }

    #[test]
    fn s_oracle_matches_tables_on_a2() {
        let a = normalize_restart(&a2()).inner;
        for u in a.alphabet().words_up_to(3) {
            let table = tables::ltable(&a, &u, Limits::default()).unwrap();
            for k in 0..4 {
                assert_eq!(s_oracle(&a, &u, Letter::RightEnd, k), tables::s_from_table(&a, &table, Letter::RightEnd, k));
            }
        }
    }

    #[test]
    fn source_round_trips_through_cg2() {
        let b = Construction::cg2(&a2(), Cg2Options::default()).unwrap();
        assert_eq!(b.source(), Automaton::TwoWay(a2()));
    }

    #[test]
    fn a1_sweep_passes() {
        let b = Construction::cg1(&a1(), Cg1Options::default()).unwrap();
        let r = check_property_d(&b, "a1", 5, Malformed::default(), Limits::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.words, 63);
    }
}

/// Sizes of one construction for a source with `n` states.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpaceReport {
    pub mode: String,
    pub n: usize,
    pub normalized_n: usize,
    pub structural_bound: u128,
    /// Two-way construction only: the product without the window counter
    /// and the clock.
    pub structural_bound_core: Option<u128>,
    /// Control states reachable from the initial one when every cell may be
    /// scanned at every step, maximized over seeded random sources with `n`
    /// states. `None` when some count exceeds the cap.
    pub reachable: Option<usize>,
    pub per_field_cardinalities: Vec<(String, u128)>,
}

pub fn state_space_report(
    mode: &str,
    n: usize,
    samples: usize,
    seed: u64,
    limits: Limits,
) -> Result<StateSpaceReport, String> {
    let fields = |v: Vec<(&'static str, u128)>| v.into_iter().map(|(f, c)| (f.to_string(), c)).collect();
    let capped = |counts: Vec<Result<usize, ExecError>>| -> Result<Option<usize>, String> {
        let mut best = 0;
        for r in counts {
            match r {
                Ok(v) => best = best.max(v),
                Err(ExecError::CapExceeded { .. }) => return Ok(None),
            }
        }
        Ok(Some(best))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        "cg1" => {
            let mut counts = Vec::new();
            for _ in 0..samples {
                let b = crate::cg1::build_cg1(&random_1nfa(&mut rng, n, 2)).map_err(|e| e.to_string())?;
                counts.push(crate::cg1::reachable_states(&b, limits));
            }
            Ok(StateSpaceReport {
                mode: mode.into(),
                n,
                normalized_n: n,
                structural_bound: crate::cg1::structural_bound(n),
                structural_bound_core: None,
                reachable: capped(counts)?,
                per_field_cardinalities: fields(crate::cg1::field_cardinalities(n)),
            })
        }
        "cg2" => {
            let mut counts = Vec::new();
            for _ in 0..samples {
                let b = crate::cg2::build_cg2(&random_2nfa(&mut rng, n, 2)).map_err(|e| e.to_string())?;
                counts.push(crate::cg2::reachable_states(&b, limits));
            }
            Ok(StateSpaceReport {
                mode: mode.into(),
                n,
                normalized_n: n + 1,
                structural_bound: crate::cg2::structural_bound(n),
                structural_bound_core: Some(crate::cg2::structural_bound_core(n)),
                reachable: capped(counts)?,
                per_field_cardinalities: fields(crate::cg2::field_cardinalities(n)),
            })
        }
        _ => Err(format!("unknown mode `{mode}`")),
    }
}
