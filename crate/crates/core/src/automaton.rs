//! One-way and two-way nondeterministic finite automata over a finite
//! alphabet of string tokens, plus the annotated alphabet `Σ × {0,1}`.
//!
//! States are dense indices `0..n`. Symbols are indices into the ordered
//! alphabet of the owning automaton; the endmarkers are not alphabet
//! members and are represented by [`Letter::LeftEnd`] / [`Letter::RightEnd`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a state in `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index of a symbol in the owning automaton's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol(pub u16);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A word over an alphabet, as symbol indices.
pub type Word = Vec<Symbol>;

/// A tape letter: an input symbol or one of the two endmarkers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    LeftEnd,
    Sym(Symbol),
    RightEnd,
}

/// Head direction of a two-way transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    L,
    R,
}

/// An ordered alphabet of whitespace-free tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self { names: names.into_iter().map(Into::into).collect() }
    }

    /// `a`, `b`, `c`, ... of the given size.
    pub fn letters(size: usize) -> Self {
        Self::new((0..size).map(|i| ((b'a' + i as u8) as char).to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.names.iter().position(|n| n == name).map(|i| Symbol(i as u16))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.names.len()).map(|i| Symbol(i as u16))
    }

    /// Parses a whitespace-separated word; the empty string is ε.
    pub fn parse_word(&self, text: &str) -> Result<Word, String> {
        text.split_whitespace()
            .flat_map(|tok| {
                // Single-character alphabets may be written without spaces.
                if self.lookup(tok).is_none() && self.names.iter().all(|n| n.chars().count() == 1) {
                    tok.chars().map(|c| c.to_string()).collect::<Vec<_>>()
                } else {
                    vec![tok.to_string()]
                }
            })
            .map(|tok| self.lookup(&tok).ok_or_else(|| format!("unknown symbol `{tok}`")))
            .collect()
    }

    pub fn render_word(&self, w: &[Symbol]) -> String {
        let single = self.names.iter().all(|n| n.chars().count() == 1);
        let parts: Vec<&str> = w.iter().map(|&s| self.name(s)).collect();
        if single {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    /// Every word of length exactly `len`, in lexicographic symbol order.
    pub fn words_of_len(&self, len: usize) -> Vec<Word> {
        let k = self.len();
        if k == 0 {
            return if len == 0 { vec![Vec::new()] } else { Vec::new() };
        }
        let total = k.pow(len as u32);
        (0..total)
            .map(|mut code| {
                let mut w = vec![Symbol(0); len];
                for slot in w.iter_mut().rev() {
                    *slot = Symbol((code % k) as u16);
                    code /= k;
                }
                w
            })
            .collect()
    }

    /// Every word of length at most `max_len`, shortest first.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        (0..=max_len).flat_map(|l| self.words_of_len(l)).collect()
    }
}

/// A symbol of the annotated alphabet `Σ × {0,1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotatedSymbol {
    pub input: Symbol,
    pub bit: bool,
}

/// A word over `Σ × {0,1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AnnotatedWord(pub Vec<AnnotatedSymbol>);

impl AnnotatedWord {
    pub fn zip(input: &[Symbol], bits: &[bool]) -> Self {
        assert_eq!(input.len(), bits.len(), "tracks must have equal length");
        Self(input.iter().zip(bits).map(|(&input, &bit)| AnnotatedSymbol { input, bit }).collect())
    }

    /// Input track π1.
    pub fn input(&self) -> Word {
        self.0.iter().map(|s| s.input).collect()
    }

    /// Annotation track π2.
    pub fn bits(&self) -> Vec<bool> {
        self.0.iter().map(|s| s.bit).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.0
            .iter()
            .map(|s| format!("{}/{}", alphabet.name(s.input), u8::from(s.bit)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, String> {
        text.split_whitespace()
            .map(|tok| {
                let (sym, bit) = tok
                    .rsplit_once('/')
                    .ok_or_else(|| format!("annotated symbol `{tok}` lacks `/0` or `/1`"))?;
                let input = alphabet.lookup(sym).ok_or_else(|| format!("unknown symbol `{sym}`"))?;
                let bit = match bit {
                    "0" => false,
                    "1" => true,
                    other => return Err(format!("annotation bit must be 0 or 1, got `{other}`")),
                };
                Ok(AnnotatedSymbol { input, bit })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

/// Alphabet of annotated symbols `a/0 a/1 b/0 b/1 ...`, in that order.
pub fn annotated_alphabet(alphabet: &Alphabet) -> Alphabet {
    Alphabet::new(alphabet.names().iter().flat_map(|n| [format!("{n}/0"), format!("{n}/1")]))
}

/// Position of an annotated symbol inside [`annotated_alphabet`].
pub fn annotated_index(s: AnnotatedSymbol) -> Symbol {
    Symbol(s.input.0 * 2 + u16::from(s.bit))
}

/// A one-way NFA `⟨Q, Σ, δ, q_start, q_fin⟩` with a single accepting state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneWayNfa {
    n: usize,
    alphabet: Alphabet,
    start: StateId,
    accept: StateId,
    transitions: BTreeSet<(StateId, Symbol, StateId)>,
    // rows[p * |Σ| + a], only in-range entries
    rows: Vec<Vec<StateId>>,
}

impl OneWayNfa {
    pub fn new(n: usize, alphabet: Alphabet, start: StateId, accept: StateId) -> Self {
        let rows = vec![Vec::new(); n * alphabet.len()];
        Self { n, alphabet, start, accept, transitions: BTreeSet::new(), rows }
    }

    /// Builds the single-accept form of an NFA with an accepting set by adding a
    /// fresh accepting sink entered alongside every transition into the set.
    pub fn with_accept_set(
        n: usize,
        alphabet: Alphabet,
        start: StateId,
        accepts: &BTreeSet<StateId>,
        transitions: &[(StateId, Symbol, StateId)],
    ) -> Result<Self, String> {
        if accepts.len() == 1 {
            let mut a = Self::new(n, alphabet, start, *accepts.iter().next().unwrap());
            for &(p, s, q) in transitions {
                a.add_transition(p, s, q);
            }
            return Ok(a);
        }
        if accepts.contains(&start) {
            return Err("an accepting start state has no single-accept equivalent without ε-moves".into());
        }
        let sink = StateId(n);
        let mut a = Self::new(n + 1, alphabet, start, sink);
        for &(p, s, q) in transitions {
            a.add_transition(p, s, q);
            if accepts.contains(&q) {
                a.add_transition(p, s, sink);
            }
        }
        Ok(a)
    }

    pub fn add_transition(&mut self, from: StateId, sym: Symbol, to: StateId) {
        if !self.transitions.insert((from, sym, to)) {
            return;
        }
        if from.0 < self.n && to.0 < self.n && sym.index() < self.alphabet.len() {
            let row = &mut self.rows[from.0 * self.alphabet.len() + sym.index()];
            let at = row.binary_search(&to).unwrap_or_else(|i| i);
            row.insert(at, to);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn accept(&self) -> StateId {
        self.accept
    }

    pub fn transitions(&self) -> impl Iterator<Item = &(StateId, Symbol, StateId)> {
        self.transitions.iter()
    }

    /// `δ(p, a)` in ascending order.
    pub fn delta(&self, p: StateId, a: Symbol) -> &[StateId] {
        &self.rows[p.0 * self.alphabet.len() + a.index()]
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alphabet.is_empty() {
            out.push("alphabet nonempty".to_string());
        }
        if self.n == 0 {
            out.push("at least one state required".to_string());
        }
        if self.start.0 >= self.n {
            out.push(format!("start {} out of range", self.start));
        }
        if self.accept.0 >= self.n {
            out.push(format!("accept {} out of range", self.accept));
        }
        for &(p, s, q) in &self.transitions {
            if p.0 >= self.n {
                out.push(format!("source out of range: {p}"));
            }
            if q.0 >= self.n {
                out.push(format!("target out of range: {q}"));
            }
            if s.index() >= self.alphabet.len() {
                out.push(format!("symbol out of range: {}", s.0));
            }
        }
        out
    }
}

/// A two-way NFA over `⊢ Σ* ⊣` with single accepting state and optional
/// rejecting state. Acceptance means reaching `accept` with the head on `⊣`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoWayNfa {
    n: usize,
    alphabet: Alphabet,
    start: StateId,
    accept: StateId,
    reject: Option<StateId>,
    transitions: BTreeSet<(StateId, Letter, StateId, Dir)>,
    // rows[p * (|Σ|+2) + slot], slot 0 = ⊢, 1..=|Σ| symbols, |Σ|+1 = ⊣
    rows: Vec<Vec<(StateId, Dir)>>,
}

impl TwoWayNfa {
    pub fn new(n: usize, alphabet: Alphabet, start: StateId, accept: StateId, reject: Option<StateId>) -> Self {
        let rows = vec![Vec::new(); n * (alphabet.len() + 2)];
        Self { n, alphabet, start, accept, reject, transitions: BTreeSet::new(), rows }
    }

    fn slot(&self, letter: Letter) -> Option<usize> {
        match letter {
            Letter::LeftEnd => Some(0),
            Letter::Sym(s) if s.index() < self.alphabet.len() => Some(s.index() + 1),
            Letter::Sym(_) => None,
            Letter::RightEnd => Some(self.alphabet.len() + 1),
        }
    }

    pub fn add_transition(&mut self, from: StateId, letter: Letter, to: StateId, dir: Dir) {
        if !self.transitions.insert((from, letter, to, dir)) {
            return;
        }
        if let Some(slot) = self.slot(letter) {
            if from.0 < self.n && to.0 < self.n {
                let row = &mut self.rows[from.0 * (self.alphabet.len() + 2) + slot];
                let at = row.binary_search(&(to, dir)).unwrap_or_else(|i| i);
                row.insert(at, (to, dir));
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn accept(&self) -> StateId {
        self.accept
    }

    pub fn reject(&self) -> Option<StateId> {
        self.reject
    }

    pub fn transitions(&self) -> impl Iterator<Item = &(StateId, Letter, StateId, Dir)> {
        self.transitions.iter()
    }

    /// `δ(p, letter)` in ascending `(target, dir)` order.
    pub fn delta(&self, p: StateId, letter: Letter) -> &[(StateId, Dir)] {
        match self.slot(letter) {
            Some(slot) if p.0 < self.n => &self.rows[p.0 * (self.alphabet.len() + 2) + slot],
            _ => &[],
        }
    }

    /// Whether `(to, dir) ∈ δ(p, letter)`.
    pub fn has_move(&self, p: StateId, letter: Letter, to: StateId, dir: Dir) -> bool {
        self.delta(p, letter).binary_search(&(to, dir)).is_ok()
    }

    /// Copy of this machine with every transition on `⊢` removed.
    pub(crate) fn without_left_end_moves(&self) -> Self {
        let mut out = Self::new(self.n, self.alphabet.clone(), self.start, self.accept, self.reject);
        for &(p, l, q, d) in &self.transitions {
            if l != Letter::LeftEnd {
                out.add_transition(p, l, q, d);
            }
        }
        out
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alphabet.is_empty() {
            out.push("alphabet nonempty".to_string());
        }
        if self.n == 0 {
            out.push("at least one state required".to_string());
        }
        if self.start.0 >= self.n {
            out.push(format!("start {} out of range", self.start));
        }
        if self.accept.0 >= self.n {
            out.push(format!("accept {} out of range", self.accept));
        }
        if let Some(r) = self.reject {
            if r.0 >= self.n {
                out.push(format!("reject {r} out of range"));
            }
            if r == self.accept {
                out.push("accept equals reject".to_string());
            }
        }
        for &(p, l, q, _) in &self.transitions {
            if p.0 >= self.n {
                out.push(format!("source out of range: {p}"));
            }
            if q.0 >= self.n {
                out.push(format!("target out of range: {q}"));
            }
            if self.slot(l).is_none() {
                out.push("symbol out of range".to_string());
            }
        }
        out
    }
}

/// Either kind of source automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Automaton {
    OneWay(OneWayNfa),
    TwoWay(TwoWayNfa),
}

impl Automaton {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Automaton::OneWay(a) => a.alphabet(),
            Automaton::TwoWay(a) => a.alphabet(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Automaton::OneWay(a) => a.n(),
            Automaton::TwoWay(a) => a.n(),
        }
    }

    pub fn validate(&self) -> Vec<String> {
        match self {
            Automaton::OneWay(a) => a.validate(),
            Automaton::TwoWay(a) => a.validate(),
        }
    }
}

/// Reference machines used across tests and docs.
pub mod fixtures {
    use super::*;

    /// Two states over `{a, b}`; accepts the words ending in `a`.
    pub fn a1() -> OneWayNfa {
        let mut a = OneWayNfa::new(2, Alphabet::new(["a", "b"]), StateId(0), StateId(1));
        a.add_transition(StateId(0), Symbol(0), StateId(0));
        a.add_transition(StateId(0), Symbol(0), StateId(1));
        a.add_transition(StateId(0), Symbol(1), StateId(0));
        a
    }

    /// Two states over `{a}`: sweeps right in state 0, turns on `⊣` into
    /// state 1 and sweeps back left.
    pub fn a2() -> TwoWayNfa {
        let mut a = TwoWayNfa::new(2, Alphabet::new(["a"]), StateId(0), StateId(1), None);
        a.add_transition(StateId(0), Letter::LeftEnd, StateId(0), Dir::R);
        a.add_transition(StateId(0), Letter::Sym(Symbol(0)), StateId(0), Dir::R);
        a.add_transition(StateId(0), Letter::RightEnd, StateId(1), Dir::L);
        a.add_transition(StateId(1), Letter::Sym(Symbol(0)), StateId(1), Dir::L);
        a
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        assert!(a1().validate().is_empty());
        assert!(a2().validate().is_empty());
    }

    #[test]
    fn out_of_range_target_is_reported() {
        let mut a = OneWayNfa::new(2, Alphabet::new(["a"]), StateId(0), StateId(1));
        a.add_transition(StateId(0), Symbol(0), StateId(5));
        assert_eq!(a.validate(), vec!["target out of range: 5".to_string()]);
        assert!(a.delta(StateId(0), Symbol(0)).is_empty());
    }

    #[test]
    fn accept_equal_to_reject_is_reported() {
        let a = TwoWayNfa::new(2, Alphabet::new(["a"]), StateId(0), StateId(1), Some(StateId(1)));
        assert_eq!(a.validate(), vec!["accept equals reject".to_string()]);
    }

    #[test]
    fn accept_set_normalizer_adds_sink() {
        let accepts: BTreeSet<_> = [StateId(1), StateId(2)].into();
        let t = [(StateId(0), Symbol(0), StateId(1)), (StateId(0), Symbol(1), StateId(2))];
        let a = OneWayNfa::with_accept_set(3, Alphabet::letters(2), StateId(0), &accepts, &t).unwrap();
        assert_eq!(a.n(), 4);
        assert_eq!(a.accept(), StateId(3));
        assert_eq!(a.delta(StateId(0), Symbol(1)), &[StateId(2), StateId(3)]);
        let bad: BTreeSet<_> = [StateId(0), StateId(2)].into();
        assert!(OneWayNfa::with_accept_set(3, Alphabet::letters(2), StateId(0), &bad, &t).is_err());
    }

    #[test]
    fn words_enumerate_in_order() {
        let al = Alphabet::letters(2);
        let ws = al.words_up_to(2);
        assert_eq!(ws.len(), 7);
        assert_eq!(al.render_word(&ws[6]), "bb");
        assert_eq!(al.parse_word("ab").unwrap(), vec![Symbol(0), Symbol(1)]);
        assert!(al.parse_word("ac").is_err());
    }

    #[test]
    fn annotated_words_round_trip_through_text() {
        let al = Alphabet::letters(2);
        let x = AnnotatedWord::zip(&[Symbol(0), Symbol(1)], &[true, false]);
        assert_eq!(x.render(&al), "a/1 b/0");
        assert_eq!(AnnotatedWord::parse("a/1 b/0", &al).unwrap(), x);
        assert!(AnnotatedWord::parse("a/2", &al).is_err());
    }
}
