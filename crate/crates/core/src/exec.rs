//! Exhaustive search over the configuration graph of a nondeterministic
//! two-way machine.
//!
//! A configuration is a control state plus a head position on `⊢ w ⊣`
//! (positions `0..=|w|+1`). The graph is finite, so a visited-set search
//! decides exactly whether an accepting or a rejecting configuration is
//! reachable.

use std::collections::VecDeque;
use std::hash::Hash;

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::automaton::{Alphabet, Dir, Letter, StateId, Symbol, TwoWayNfa};

/// Default bound on the number of configurations a single search may visit.
pub const DEFAULT_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("configuration space exceeds the cap of {cap}")]
    CapExceeded { cap: usize },
}

/// What the head is scanning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cell<S> {
    LeftEnd,
    Sym(S),
    RightEnd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Stay,
    Right,
}

impl From<Dir> for Move {
    fn from(d: Dir) -> Self {
        match d {
            Dir::L => Move::Left,
            Dir::R => Move::Right,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Accepting,
    Rejecting,
    Aborting,
    Live,
}

/// Uniform interface for plain automata and the constructed machines.
///
/// Machines are position-oblivious: a step only sees the control state and
/// the scanned cell. Terminal statuses (anything but `Live`) have no
/// successors.
pub trait TwoWayMachine {
    type State: Clone + Eq + Hash;
    type Symbol: Copy + Eq;

    /// Control state of the initial configuration (head on position 1).
    fn initial(&self) -> Self::State;

    fn step(&self, state: &Self::State, scanned: Cell<Self::Symbol>, out: &mut Vec<(Self::State, Move)>);

    fn classify(&self, state: &Self::State, scanned: Cell<Self::Symbol>) -> Status;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration<Q> {
    pub state: Q,
    pub pos: usize,
}

/// Result of a nondeterministic run: which verdicts some path reaches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Outcome {
    pub accept_path: bool,
    pub reject_path: bool,
}

impl Outcome {
    pub const NEITHER: Outcome = Outcome { accept_path: false, reject_path: false };
    pub const ACCEPT: Outcome = Outcome { accept_path: true, reject_path: false };
    pub const REJECT: Outcome = Outcome { accept_path: false, reject_path: true };
}

/// Search limits shared by every entry point.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP }
    }
}

/// The tape `⊢ w ⊣`.
pub struct Tape<'w, S> {
    word: &'w [S],
}

impl<'w, S: Copy> Tape<'w, S> {
    pub fn new(word: &'w [S]) -> Self {
        Self { word }
    }

    /// Position of `⊣`.
    pub fn right_end(&self) -> usize {
        self.word.len() + 1
    }

    pub fn cell(&self, pos: usize) -> Cell<S> {
        if pos == 0 {
            Cell::LeftEnd
        } else if pos <= self.word.len() {
            Cell::Sym(self.word[pos - 1])
        } else {
            Cell::RightEnd
        }
    }
}

fn apply(pos: usize, mv: Move, right_end: usize) -> Option<usize> {
    match mv {
        Move::Left => pos.checked_sub(1),
        Move::Stay => Some(pos),
        Move::Right => (pos < right_end).then_some(pos + 1),
    }
}

/// Result of a bounded exploration.
pub struct Exploration<Q> {
    /// Every configuration reached at a position `≤ bound`.
    pub visited: FxHashSet<Configuration<Q>>,
    /// States with which the head first crossed beyond `bound`.
    pub exits: FxHashSet<Q>,
}

/// Forward closure from `starts`, never expanding configurations whose
/// position exceeds `bound`; those are collected as exits instead.
pub fn explore<M: TwoWayMachine>(
    machine: &M,
    word: &[M::Symbol],
    starts: impl IntoIterator<Item = Configuration<M::State>>,
    bound: usize,
    limits: Limits,
) -> Result<Exploration<M::State>, ExecError> {
    let tape = Tape::new(word);
    let mut visited = FxHashSet::default();
    let mut exits = FxHashSet::default();
    let mut queue = VecDeque::new();
    for c in starts {
        if c.pos > bound {
            exits.insert(c.state);
        } else if visited.insert(c.clone()) {
            queue.push_back(c);
        }
    }
    let mut buf = Vec::new();
    while let Some(c) = queue.pop_front() {
        let cell = tape.cell(c.pos);
        if machine.classify(&c.state, cell) != Status::Live {
            continue;
        }
        buf.clear();
        machine.step(&c.state, cell, &mut buf);
        for (state, mv) in buf.drain(..) {
            let Some(pos) = apply(c.pos, mv, tape.right_end()) else { continue };
            if pos > bound {
                exits.insert(state);
                continue;
            }
            let next = Configuration { state, pos };
            if !visited.contains(&next) {
                if visited.len() >= limits.cap {
                    return Err(ExecError::CapExceeded { cap: limits.cap });
                }
                visited.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(Exploration { visited, exits })
}

/// Every configuration reachable from the initial one on `⊢ word ⊣`.
pub fn reachable_configs<M: TwoWayMachine>(
    machine: &M,
    word: &[M::Symbol],
    limits: Limits,
) -> Result<FxHashSet<Configuration<M::State>>, ExecError> {
    let start = Configuration { state: machine.initial(), pos: 1 };
    Ok(explore(machine, word, [start], usize::MAX, limits)?.visited)
}

/// Statistics of a [`decide`] call.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchStats {
    pub configurations: usize,
}

/// Whether some path from the initial configuration reaches an accepting
/// (resp. rejecting) configuration.
pub fn decide<M: TwoWayMachine>(machine: &M, word: &[M::Symbol], limits: Limits) -> Result<Outcome, ExecError> {
    decide_with_stats(machine, word, limits).map(|(o, _)| o)
}

pub fn decide_with_stats<M: TwoWayMachine>(
    machine: &M,
    word: &[M::Symbol],
    limits: Limits,
) -> Result<(Outcome, SearchStats), ExecError> {
    let tape = Tape::new(word);
    let start = Configuration { state: machine.initial(), pos: 1 };
    let mut visited = FxHashSet::default();
    let mut stack = vec![start.clone()];
    visited.insert(start);
    let mut outcome = Outcome::NEITHER;
    let mut buf = Vec::new();
    while let Some(c) = stack.pop() {
        let cell = tape.cell(c.pos);
        match machine.classify(&c.state, cell) {
            Status::Accepting => outcome.accept_path = true,
            Status::Rejecting => outcome.reject_path = true,
            Status::Aborting => {}
            Status::Live => {
                buf.clear();
                machine.step(&c.state, cell, &mut buf);
                for (state, mv) in buf.drain(..) {
                    let Some(pos) = apply(c.pos, mv, tape.right_end()) else { continue };
                    let next = Configuration { state, pos };
                    if !visited.contains(&next) {
                        if visited.len() >= limits.cap {
                            return Err(ExecError::CapExceeded { cap: limits.cap });
                        }
                        visited.insert(next.clone());
                        stack.push(next);
                    }
                }
            }
        }
        if outcome.accept_path && outcome.reject_path {
            break;
        }
    }
    Ok((outcome, SearchStats { configurations: visited.len() }))
}

/// A plain two-way NFA: accepting in `accept` on `⊣`, rejecting in `reject`
/// on `⊣`.
impl TwoWayMachine for TwoWayNfa {
    type State = StateId;
    type Symbol = Symbol;

    fn initial(&self) -> StateId {
        self.start()
    }

    fn step(&self, state: &StateId, scanned: Cell<Symbol>, out: &mut Vec<(StateId, Move)>) {
        let letter = letter_of(scanned);
        out.extend(self.delta(*state, letter).iter().map(|&(q, d)| (q, Move::from(d))));
    }

    fn classify(&self, state: &StateId, scanned: Cell<Symbol>) -> Status {
        if scanned == Cell::RightEnd {
            if *state == self.accept() {
                return Status::Accepting;
            }
            if Some(*state) == self.reject() {
                return Status::Rejecting;
            }
        }
        Status::Live
    }
}

pub fn letter_of(cell: Cell<Symbol>) -> Letter {
    match cell {
        Cell::LeftEnd => Letter::LeftEnd,
        Cell::Sym(s) => Letter::Sym(s),
        Cell::RightEnd => Letter::RightEnd,
    }
}

/// A position-oblivious machine flattened into a [`TwoWayNfa`].
pub struct Compiled<Q> {
    pub nfa: TwoWayNfa,
    /// Control state behind each explicit state; the last two explicit
    /// states are the accept and reject stubs and have no entry here.
    pub states: Vec<Q>,
}

/// Enumerates the control states reachable from the initial state when any
/// cell may be scanned at any step, and emits them as an explicit machine.
///
/// `Stay` steps are folded into the following move. A control state whose
/// stay-closure on `⊣` reaches an accepting (rejecting) status moves left into
/// a stub that steps back onto `⊣` in the explicit accept (reject) state.
pub fn compile<M: TwoWayMachine>(
    machine: &M,
    alphabet: Alphabet,
    symbols: &[M::Symbol],
    limits: Limits,
) -> Result<Compiled<M::State>, ExecError> {
    let mut cells: Vec<Cell<M::Symbol>> = vec![Cell::LeftEnd];
    cells.extend(symbols.iter().map(|&s| Cell::Sym(s)));
    cells.push(Cell::RightEnd);

    let mut index: FxHashMap<M::State, usize> = FxHashMap::default();
    let mut states = vec![machine.initial()];
    index.insert(machine.initial(), 0);
    // (from, cell index, to, dir) over explicit indices; usize::MAX marks the stubs
    let mut edges: Vec<(usize, usize, usize, Dir)> = Vec::new();
    const ACC: usize = usize::MAX;
    const REJ: usize = usize::MAX - 1;

    let mut next = 0;
    let mut buf = Vec::new();
    while next < states.len() {
        let from = next;
        next += 1;
        for (ci, &cell) in cells.iter().enumerate() {
            // stay-closure on this cell
            let mut seen: FxHashSet<M::State> = FxHashSet::default();
            let mut work = vec![states[from].clone()];
            seen.insert(states[from].clone());
            let mut moves: Vec<(M::State, Dir)> = Vec::new();
            let (mut acc, mut rej) = (false, false);
            while let Some(s) = work.pop() {
                match machine.classify(&s, cell) {
                    Status::Accepting => acc = true,
                    Status::Rejecting => rej = true,
                    Status::Aborting => {}
                    Status::Live => {
                        buf.clear();
                        machine.step(&s, cell, &mut buf);
                        for (t, mv) in buf.drain(..) {
                            match mv {
                                Move::Stay => {
                                    if seen.insert(t.clone()) {
                                        work.push(t);
                                    }
                                }
                                Move::Left if cell != Cell::LeftEnd => moves.push((t, Dir::L)),
                                Move::Right if cell != Cell::RightEnd => moves.push((t, Dir::R)),
                                _ => {}
                            }
                        }
                    }
                }
            }
            if cell == Cell::RightEnd {
                if acc {
                    edges.push((from, ci, ACC, Dir::L));
                }
                if rej {
                    edges.push((from, ci, REJ, Dir::L));
                }
            }
            for (t, d) in moves {
                let to = match index.get(&t) {
                    Some(&i) => i,
                    None => {
                        if states.len() >= limits.cap {
                            return Err(ExecError::CapExceeded { cap: limits.cap });
                        }
                        states.push(t.clone());
                        index.insert(t, states.len() - 1);
                        states.len() - 1
                    }
                };
                edges.push((from, ci, to, d));
            }
        }
    }

    let n_live = states.len();
    // stubs: pre-accept, pre-reject, accept, reject
    let (pre_acc, pre_rej, acc, rej) = (n_live, n_live + 1, n_live + 2, n_live + 3);
    let mut nfa = TwoWayNfa::new(n_live + 4, alphabet, StateId(0), StateId(acc), Some(StateId(rej)));
    let letter = |ci: usize| -> Letter {
        if ci == 0 {
            Letter::LeftEnd
        } else if ci == cells.len() - 1 {
            Letter::RightEnd
        } else {
            Letter::Sym(Symbol((ci - 1) as u16))
        }
    };
    for (from, ci, to, d) in edges {
        let to = match to {
            ACC => pre_acc,
            REJ => pre_rej,
            t => t,
        };
        nfa.add_transition(StateId(from), letter(ci), StateId(to), d);
    }
    for ci in 0..cells.len() - 1 {
        nfa.add_transition(StateId(pre_acc), letter(ci), StateId(acc), Dir::R);
        nfa.add_transition(StateId(pre_rej), letter(ci), StateId(rej), Dir::R);
    }
    Ok(Compiled { nfa, states })
}

/// Number of control states reachable from the initial state when any cell
/// may be scanned at any step (stay steps included).
pub fn reachable_control_states<M: TwoWayMachine>(
    machine: &M,
    symbols: &[M::Symbol],
    limits: Limits,
) -> Result<usize, ExecError> {
    let mut cells: Vec<Cell<M::Symbol>> = vec![Cell::LeftEnd];
    cells.extend(symbols.iter().map(|&s| Cell::Sym(s)));
    cells.push(Cell::RightEnd);
    let mut seen: FxHashSet<M::State> = FxHashSet::default();
    let mut work = vec![machine.initial()];
    seen.insert(machine.initial());
    let mut buf = Vec::new();
    while let Some(s) = work.pop() {
        for &cell in &cells {
            if machine.classify(&s, cell) != Status::Live {
                continue;
            }
            buf.clear();
            machine.step(&s, cell, &mut buf);
            for (t, _) in buf.drain(..) {
                if !seen.contains(&t) {
                    if seen.len() >= limits.cap {
                        return Err(ExecError::CapExceeded { cap: limits.cap });
                    }
                    seen.insert(t.clone());
                    work.push(t);
                }
            }
        }
    }
    Ok(seen.len())
}

/// Runs a fragment of a machine in isolation: the head first walks right to
/// `anchor`, then `start` takes over. Values reported by `emit` on entered
/// states are accumulated per run, so terminal configurations carry the
/// sequence their run produced.
pub struct Probe<'m, M: TwoWayMachine, F> {
    pub machine: &'m M,
    pub anchor: usize,
    pub start: M::State,
    pub emit: F,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProbeState<Q> {
    Walk(usize),
    Run(Q, Vec<u32>),
}

impl<M, F> TwoWayMachine for Probe<'_, M, F>
where
    M: TwoWayMachine,
    F: Fn(&M::State) -> Option<u32>,
{
    type State = ProbeState<M::State>;
    type Symbol = M::Symbol;

    fn initial(&self) -> Self::State {
        if self.anchor <= 1 {
            ProbeState::Run(self.start.clone(), Vec::new())
        } else {
            ProbeState::Walk(1)
        }
    }

    fn step(&self, state: &Self::State, scanned: Cell<M::Symbol>, out: &mut Vec<(Self::State, Move)>) {
        match state {
            ProbeState::Walk(k) if k + 1 >= self.anchor => {
                out.push((ProbeState::Run(self.start.clone(), Vec::new()), Move::Right))
            }
            ProbeState::Walk(k) => out.push((ProbeState::Walk(k + 1), Move::Right)),
            ProbeState::Run(s, hist) => {
                let mut inner = Vec::new();
                self.machine.step(s, scanned, &mut inner);
                for (t, mv) in inner {
                    let mut h = hist.clone();
                    h.extend((self.emit)(&t));
                    out.push((ProbeState::Run(t, h), mv));
                }
            }
        }
    }

    fn classify(&self, state: &Self::State, scanned: Cell<M::Symbol>) -> Status {
        match state {
            ProbeState::Walk(_) => Status::Live,
            ProbeState::Run(s, _) => self.machine.classify(s, scanned),
        }
    }
}

/// Terminal configurations reached by a probe, with their status, position
/// and emitted sequence.
pub fn probe_terminals<M, F>(
    probe: &Probe<'_, M, F>,
    word: &[M::Symbol],
    limits: Limits,
) -> Result<Vec<(M::State, Status, usize, Vec<u32>)>, ExecError>
where
    M: TwoWayMachine,
    F: Fn(&M::State) -> Option<u32>,
{
    let tape = Tape::new(word);
    let mut out = Vec::new();
    for c in reachable_configs(probe, word, limits)? {
        if let ProbeState::Run(s, hist) = c.state {
            let status = probe.machine.classify(&s, tape.cell(c.pos));
            if status != Status::Live {
                out.push((s, status, c.pos, hist));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures::a2;

    fn a(k: usize) -> Vec<Symbol> {
        vec![Symbol(0); k]
    }

    #[test]
    fn a2_language_is_empty_on_short_words() {
        for k in 0..6 {
            assert_eq!(decide(&a2(), &a(k), Limits::default()).unwrap(), Outcome::NEITHER);
        }
    }

    #[test]
    fn a2_reachable_configs_on_a() {
        let got = reachable_configs(&a2(), &a(1), Limits::default()).unwrap();
        let mut got: Vec<_> = got.into_iter().map(|c| (c.state.0, c.pos)).collect();
        got.sort();
        // 0@1 -> 0@2 (⊣) -> 1@1 -> 1@0 (⊢, stuck)
        assert_eq!(got, vec![(0, 1), (0, 2), (1, 0), (1, 1)]);
    }

    #[test]
    fn machine_without_transitions_stays_put() {
        let m = TwoWayNfa::new(2, Alphabet::letters(1), StateId(0), StateId(1), None);
        let got = reachable_configs(&m, &a(3), Limits::default()).unwrap();
        assert_eq!(got.len(), 1);
        assert!(got.contains(&Configuration { state: StateId(0), pos: 1 }));
    }

    #[test]
    fn initial_accepting_configuration_accepts() {
        // start == accept and ε puts the head on ⊣ immediately
        let m = TwoWayNfa::new(1, Alphabet::letters(1), StateId(0), StateId(0), None);
        assert!(decide(&m, &[], Limits::default()).unwrap().accept_path);
        assert!(!decide(&m, &a(1), Limits::default()).unwrap().accept_path);
    }

    #[test]
    fn cap_is_enforced() {
        let r = reachable_configs(&a2(), &a(5), Limits { cap: 3 });
        assert_eq!(r.unwrap_err(), ExecError::CapExceeded { cap: 3 });
    }

    #[test]
    fn bounded_exploration_reports_exits() {
        // from state 0 at ⊢ with bound 1 on "a": 0@0 -> 0@1 -> exits at 2 in state 0
        let ex = explore(&a2(), &a(1), [Configuration { state: StateId(0), pos: 0 }], 1, Limits::default()).unwrap();
        assert_eq!(ex.exits.into_iter().collect::<Vec<_>>(), vec![StateId(0)]);
        assert_eq!(ex.visited.len(), 2);
    }

    #[test]
    fn compiling_a_plain_machine_preserves_decisions() {
        let c = compile(&a2(), Alphabet::letters(1), &[Symbol(0)], Limits::default()).unwrap();
        for k in 0..5 {
            assert_eq!(
                decide(&c.nfa, &a(k), Limits::default()).unwrap(),
                decide(&a2(), &a(k), Limits::default()).unwrap()
            );
        }
    }
}
