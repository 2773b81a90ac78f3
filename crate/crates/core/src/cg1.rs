//! Self-verifying two-way machine for the complement of a one-way NFA.
//!
//! The machine reads `x ∈ (Σ × {0,1})*` and carries `m = |Q^X(u)|` for the
//! prefix `u` left of its driver cell. To move from `u` to `uσ` it counts,
//! for each state `p`, whether some `r ∈ Q^X(u)` has `p ∈ δ(r, σ)`. The states
//! of `Q^X(u)` are enumerated in ascending order by `m` nondeterministic
//! simulations, each of which picks a 1-bit in the annotation of the last
//! complete block and replays the automaton from there. Knowing `m` exactly
//! makes every enumeration certifiable, so the final test for the accepting
//! state yields either an accepting or a rejecting run, never both.
//!
//! At the end of each block the annotation is checked against the set it
//! should encode; any mismatch kills every run.

use crate::annot::annotated_symbols;
use crate::automaton::{annotated_alphabet, AnnotatedSymbol, AnnotatedWord, OneWayNfa, StateId};
use crate::exec::{self, Cell, Compiled, ExecError, Limits, Move, Outcome, Probe, Status, TwoWayMachine};

/// Value of `q_prev` before the first state of an enumeration.
pub const NONE: u8 = u8::MAX;

/// Largest source automaton the packed state supports.
pub const MAX_STATES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctl {
    /// At the driver cell, about to process it.
    Drive,
    /// Start enumerating `Q^X` for candidate `p`.
    CountNext,
    /// Counting is finished; `m` holds the new cardinality.
    CountDone,
    /// Start of the next simulation of an enumeration, or its end.
    EnumNext,
    /// Walking left to the end of the last complete block.
    Seek,
    /// Scanning that block right to left for a 1-bit to select.
    Scan,
    /// Returning right from the selected cell to the block end.
    ToSim,
    /// Direct simulation towards the anchor.
    Sim,
    /// A simulation finished with `q_cur`.
    Got,
    /// Reporting `q_cur` to a probe.
    Emit,
    ChkStart,
    /// Counting the block's 1-bits leftwards against `m_next`.
    ChkCount,
    ChkCountBack,
    /// Walking left to the bit of `q_cur`.
    ChkSeekBit,
    ChkBitBack,
    /// Verifying that the incomplete last block carries only zeros.
    Tail,
    TailBack,
    MemberStart,
    Halt,
    Acc,
    Rej,
    Abort,
}

impl Ctl {
    pub const COUNT: usize = 22;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Caller {
    Count,
    Check,
    Member,
    Probe,
}

impl Caller {
    pub const COUNT: usize = 4;
}

/// Control state of the machine. Fields that are dead in the current phase
/// are kept at zero (`q_prev` at [`NONE`]).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cg1State {
    pub ctl: Ctl,
    pub caller: Caller,
    /// `|Q^X|` of the current prefix.
    pub m: u8,
    /// Running count in `CountNext`, scratch counter in `ChkCount`.
    pub m_next: u8,
    /// Candidate state being counted, or the target of a membership test.
    pub p: u8,
    /// Number of states enumerated so far.
    pub i: u8,
    pub q_prev: u8,
    /// Simulated state, then the state returned by the simulation.
    pub q_cur: u8,
    /// Head position minus one, modulo `n`.
    pub posmod: u8,
    /// Driver cell minus head position.
    pub dist: u8,
}

impl Cg1State {
    fn zero(ctl: Ctl) -> Self {
        Self { ctl, caller: Caller::Count, m: 0, m_next: 0, p: 0, i: 0, q_prev: NONE, q_cur: 0, posmod: 0, dist: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cg1Options {
    /// Run the block check at the end of every complete block. Disabling it
    /// breaks the construction and exists for mutation testing.
    pub check_annot: bool,
    /// Halt after the first fragment instead of continuing the driver.
    pub probe: bool,
}

impl Default for Cg1Options {
    fn default() -> Self {
        Self { check_annot: true, probe: false }
    }
}

#[derive(Clone, Debug)]
pub struct Cg1Machine {
    source: OneWayNfa,
    options: Cg1Options,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("automata with more than {MAX_STATES} states are not supported")]
    TooLarge,
}

pub fn build_cg1(a: &OneWayNfa) -> Result<Cg1Machine, BuildError> {
    build_cg1_with(a, Cg1Options::default())
}

pub fn build_cg1_with(a: &OneWayNfa, options: Cg1Options) -> Result<Cg1Machine, BuildError> {
    if let Some(v) = a.validate().into_iter().next() {
        return Err(BuildError::Invalid(v));
    }
    if a.n() > MAX_STATES {
        return Err(BuildError::TooLarge);
    }
    Ok(Cg1Machine { source: a.clone(), options })
}

type Out = Vec<(Cg1State, Move)>;

impl Cg1Machine {
    pub fn source(&self) -> &OneWayNfa {
        &self.source
    }

    pub fn options(&self) -> Cg1Options {
        self.options
    }

    fn n(&self) -> u8 {
        self.source.n() as u8
    }

    fn delta(&self, q: u8, a: AnnotatedSymbol) -> impl Iterator<Item = u8> + '_ {
        self.source.delta(StateId(q as usize), a.input).iter().map(|q| q.0 as u8)
    }

    /// Left move; `dist` never reaches `2n`.
    fn push_left(&self, mut s: Cg1State, out: &mut Out) {
        if u16::from(s.dist) + 1 < 2 * u16::from(self.n()) {
            s.dist += 1;
            s.posmod = (s.posmod + self.n() - 1) % self.n();
            out.push((s, Move::Left));
        }
    }

    /// Right move towards the driver cell.
    fn push_right(&self, mut s: Cg1State, out: &mut Out) {
        if s.dist > 0 {
            s.dist -= 1;
            s.posmod = (s.posmod + 1) % self.n();
            out.push((s, Move::Right));
        }
    }

    fn stay(s: Cg1State) -> (Cg1State, Move) {
        (s, Move::Stay)
    }

    fn goto(s: Cg1State, ctl: Ctl) -> (Cg1State, Move) {
        Self::stay(Cg1State { ctl, ..s })
    }

    fn terminal(ctl: Ctl) -> (Cg1State, Move) {
        Self::stay(Cg1State::zero(ctl))
    }

    fn begin_enum(s: Cg1State, caller: Caller) -> (Cg1State, Move) {
        Self::stay(Cg1State { ctl: Ctl::EnumNext, caller, i: 0, q_prev: NONE, q_cur: 0, ..s })
    }

    fn end_enum(s: Cg1State) -> Cg1State {
        Cg1State { i: 0, q_prev: NONE, q_cur: 0, ..s }
    }

    fn next_candidate(&self, s: Cg1State) -> (Cg1State, Move) {
        let s = Self::end_enum(s);
        if s.p + 1 == self.n() {
            Self::stay(Cg1State { ctl: Ctl::CountDone, m: s.m_next, m_next: 0, p: 0, ..s })
        } else {
            Self::stay(Cg1State { ctl: Ctl::CountNext, p: s.p + 1, ..s })
        }
    }

    fn advance(&self, s: Cg1State) -> (Cg1State, Move) {
        let t = Cg1State { posmod: (s.posmod + 1) % self.n(), m: s.m, ..Cg1State::zero(Ctl::Drive) };
        (t, Move::Right)
    }

    fn after_check(&self, s: Cg1State) -> (Cg1State, Move) {
        if self.options.probe {
            Self::goto(Self::end_enum(s), Ctl::Halt)
        } else {
            self.advance(s)
        }
    }

    /// Scan step on a cell of the selected block.
    fn scan(&self, s: Cg1State, a: AnnotatedSymbol, out: &mut Out) {
        if a.bit {
            let ctl = if s.posmod == self.n() - 1 { Ctl::Sim } else { Ctl::ToSim };
            self.push_right(Cg1State { ctl, q_cur: s.posmod, ..s }, out);
        }
        if s.posmod > 0 {
            self.push_left(Cg1State { ctl: Ctl::Scan, ..s }, out);
        }
    }

    fn on_yield(&self, s: Cg1State, cell: Cell<AnnotatedSymbol>, out: &mut Out) {
        match s.caller {
            Caller::Count => {
                let Cell::Sym(a) = cell else { return };
                if self.delta(s.q_cur, a).any(|q| q == s.p) {
                    out.push(self.next_candidate(Cg1State { m_next: s.m_next + 1, ..s }));
                } else {
                    out.push(Self::goto(s, Ctl::EnumNext));
                }
            }
            Caller::Check => out.push(Self::goto(s, Ctl::ChkSeekBit)),
            Caller::Member => {
                if s.q_cur == s.p {
                    out.push(Self::terminal(Ctl::Acc));
                } else {
                    out.push(Self::goto(s, Ctl::EnumNext));
                }
            }
            Caller::Probe => out.push(Self::goto(s, Ctl::Emit)),
        }
    }

    fn on_enum_done(&self, s: Cg1State, out: &mut Out) {
        match s.caller {
            Caller::Count => out.push(self.next_candidate(s)),
            Caller::Check => out.push(self.after_check(s)),
            Caller::Member => out.push(Self::terminal(Ctl::Rej)),
            Caller::Probe => out.push(Self::goto(Self::end_enum(s), Ctl::Halt)),
        }
    }

    fn step_into(&self, s: Cg1State, cell: Cell<AnnotatedSymbol>, out: &mut Out) {
        let n = self.n();
        match s.ctl {
            Ctl::Drive => match cell {
                Cell::RightEnd => out.push(Self::goto(s, Ctl::Tail)),
                Cell::Sym(_) => out.push(Self::goto(Cg1State { m_next: 0, p: 0, ..s }, Ctl::CountNext)),
                Cell::LeftEnd => {}
            },
            Ctl::CountNext => out.push(Self::begin_enum(s, Caller::Count)),
            Ctl::CountDone => {
                if self.options.probe {
                    out.push(Self::goto(s, Ctl::Halt));
                } else if s.posmod == n - 1 && self.options.check_annot {
                    out.push(Self::goto(s, Ctl::ChkStart));
                } else {
                    out.push(self.advance(s));
                }
            }
            Ctl::EnumNext => {
                if s.i == s.m {
                    self.on_enum_done(s, out);
                } else {
                    self.push_left(Cg1State { ctl: Ctl::Seek, q_cur: 0, ..s }, out);
                }
            }
            Ctl::Seek => match cell {
                Cell::LeftEnd => {
                    let start = self.source.start().0 as u8;
                    self.push_right(Cg1State { ctl: Ctl::Sim, q_cur: start, ..s }, out);
                }
                Cell::Sym(a) if s.posmod == n - 1 => self.scan(s, a, out),
                Cell::Sym(_) => self.push_left(s, out),
                Cell::RightEnd => {}
            },
            Ctl::Scan => {
                if let Cell::Sym(a) = cell {
                    self.scan(s, a, out);
                }
            }
            Ctl::ToSim => {
                let ctl = if s.posmod == n - 1 { Ctl::Sim } else { Ctl::ToSim };
                self.push_right(Cg1State { ctl, ..s }, out);
            }
            Ctl::Sim => {
                if s.dist == 0 {
                    match (s.caller, cell) {
                        (Caller::Check, Cell::Sym(a)) => {
                            for q in self.delta(s.q_cur, a) {
                                out.push(Self::goto(Cg1State { q_cur: q, ..s }, Ctl::Got));
                            }
                        }
                        (Caller::Check, _) => {}
                        _ => out.push(Self::goto(s, Ctl::Got)),
                    }
                } else if let Cell::Sym(a) = cell {
                    for q in self.delta(s.q_cur, a) {
                        self.push_right(Cg1State { q_cur: q, ..s }, out);
                    }
                }
            }
            Ctl::Got => {
                if s.q_prev != NONE && s.q_cur <= s.q_prev {
                    out.push(Self::terminal(Ctl::Abort));
                } else {
                    self.on_yield(Cg1State { q_prev: s.q_cur, i: s.i + 1, ..s }, cell, out);
                }
            }
            Ctl::Emit => out.push(Self::goto(s, Ctl::EnumNext)),
            Ctl::ChkStart => out.push(Self::goto(Cg1State { m_next: s.m, ..s }, Ctl::ChkCount)),
            Ctl::ChkCount => {
                let Cell::Sym(a) = cell else { return };
                let mut t = s;
                if a.bit {
                    if t.m_next == 0 {
                        out.push(Self::terminal(Ctl::Abort));
                        return;
                    }
                    t.m_next -= 1;
                }
                if t.posmod > 0 {
                    self.push_left(t, out);
                } else if t.m_next != 0 {
                    out.push(Self::terminal(Ctl::Abort));
                } else {
                    out.push(Self::goto(t, Ctl::ChkCountBack));
                }
            }
            Ctl::ChkCountBack => {
                if s.dist == 0 {
                    out.push(Self::begin_enum(s, Caller::Check));
                } else {
                    self.push_right(s, out);
                }
            }
            Ctl::ChkSeekBit => {
                let Cell::Sym(a) = cell else { return };
                if s.posmod != s.q_cur {
                    self.push_left(s, out);
                } else if a.bit {
                    out.push(Self::goto(s, Ctl::ChkBitBack));
                } else {
                    out.push(Self::terminal(Ctl::Abort));
                }
            }
            Ctl::ChkBitBack => {
                if s.dist == 0 {
                    out.push(Self::goto(s, Ctl::EnumNext));
                } else {
                    self.push_right(s, out);
                }
            }
            Ctl::Tail => match cell {
                Cell::Sym(a) if a.bit => out.push(Self::terminal(Ctl::Abort)),
                _ if s.posmod == 0 && cell == Cell::RightEnd => out.push(Self::goto(s, Ctl::MemberStart)),
                Cell::Sym(_) if s.posmod == 0 => out.push(Self::goto(s, Ctl::TailBack)),
                Cell::LeftEnd => {}
                _ => self.push_left(s, out),
            },
            Ctl::TailBack => match cell {
                Cell::RightEnd => out.push(Self::goto(s, Ctl::MemberStart)),
                _ => self.push_right(s, out),
            },
            Ctl::MemberStart => {
                let target = self.source.accept().0 as u8;
                out.push(Self::begin_enum(Cg1State { p: target, ..s }, Caller::Member));
            }
            Ctl::Halt | Ctl::Acc | Ctl::Rej | Ctl::Abort => {}
        }
    }

    /// State in which a fragment starts when the head is on position `pos`.
    pub fn fragment_state(&self, pos: usize, ctl: Ctl, caller: Caller, m: u8, p: u8) -> Cg1State {
        let posmod = ((pos + self.source.n() - 1) % self.source.n()) as u8;
        Cg1State { ctl, caller, m, p, posmod, ..Cg1State::zero(ctl) }
    }
}

impl TwoWayMachine for Cg1Machine {
    type State = Cg1State;
    type Symbol = AnnotatedSymbol;

    fn initial(&self) -> Cg1State {
        Cg1State { m: 1, ..Cg1State::zero(Ctl::Drive) }
    }

    fn step(&self, state: &Cg1State, scanned: Cell<AnnotatedSymbol>, out: &mut Out) {
        self.step_into(*state, scanned, out)
    }

    fn classify(&self, state: &Cg1State, _scanned: Cell<AnnotatedSymbol>) -> Status {
        match state.ctl {
            Ctl::Acc => Status::Accepting,
            Ctl::Rej => Status::Rejecting,
            Ctl::Abort | Ctl::Halt => Status::Aborting,
            _ => Status::Live,
        }
    }
}

pub fn decide_cg1(b: &Cg1Machine, x: &AnnotatedWord, limits: Limits) -> Result<Outcome, ExecError> {
    exec::decide(b, &x.0, limits)
}

/// A fragment run in isolation by [`run_fragment`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    /// One simulation towards the cell left of the start cell.
    Nsimul,
    /// Enumeration of `Q^X` of the prefix left of the start cell.
    EnumQx { m: u8 },
    MemberQx { target: StateId, m: u8 },
    /// Counting `Q^X(uσ)` with `σ` under the start cell.
    CountNextQx { m: u8 },
    /// Checking the block that ends at the start cell.
    CheckAnnot { m: u8 },
}

/// What one successful run of a fragment produced.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FragmentResult {
    /// A simulated state or a count.
    Value(u8),
    /// The states an enumeration yielded, in order.
    Sequence(Vec<u8>),
    Member(bool),
    Passed,
}

/// Results of every successful run of `fragment` started with the head on
/// position `pos` of `⊢ x ⊣`. Runs that abort or get stuck contribute
/// nothing; each result is paired with the head position it ended on.
pub fn run_fragment(
    b: &Cg1Machine,
    x: &AnnotatedWord,
    pos: usize,
    fragment: Fragment,
    limits: Limits,
) -> Result<Vec<(FragmentResult, usize)>, ExecError> {
    let probe = Cg1Machine { source: b.source.clone(), options: Cg1Options { probe: true, ..b.options } };
    let start = match fragment {
        Fragment::Nsimul => {
            let s = probe.fragment_state(pos, Ctl::EnumNext, Caller::Probe, 1, 0);
            Cg1State { i: 0, ..s }
        }
        Fragment::EnumQx { m } => probe.fragment_state(pos, Ctl::EnumNext, Caller::Probe, m, 0),
        Fragment::MemberQx { target, m } => {
            probe.fragment_state(pos, Ctl::EnumNext, Caller::Member, m, target.0 as u8)
        }
        Fragment::CountNextQx { m } => probe.fragment_state(pos, Ctl::CountNext, Caller::Count, m, 0),
        Fragment::CheckAnnot { m } => probe.fragment_state(pos, Ctl::ChkStart, Caller::Check, m, 0),
    };
    let runner = Probe {
        machine: &probe,
        anchor: pos,
        start,
        emit: |s: &Cg1State| (s.ctl == Ctl::Emit).then_some(u32::from(s.q_cur)),
    };
    let mut out = Vec::new();
    for (s, status, at, hist) in exec::probe_terminals(&runner, &x.0, limits)? {
        let r = match (fragment, s.ctl, status) {
            (Fragment::Nsimul, Ctl::Halt, _) => FragmentResult::Value(hist[0] as u8),
            (Fragment::EnumQx { .. }, Ctl::Halt, _) => {
                FragmentResult::Sequence(hist.iter().map(|&q| q as u8).collect())
            }
            (Fragment::MemberQx { .. }, Ctl::Acc, _) => FragmentResult::Member(true),
            (Fragment::MemberQx { .. }, Ctl::Rej, _) => FragmentResult::Member(false),
            (Fragment::CountNextQx { .. }, Ctl::Halt, _) => FragmentResult::Value(s.m),
            (Fragment::CheckAnnot { .. }, Ctl::Halt, _) => FragmentResult::Passed,
            _ => continue,
        };
        out.push((r, at));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Field cardinalities of [`Cg1State`] for a source with `n` states.
pub fn field_cardinalities(n: usize) -> Vec<(&'static str, u128)> {
    let n = n as u128;
    vec![
        ("ctl", Ctl::COUNT as u128),
        ("caller", Caller::COUNT as u128),
        ("m", n + 1),
        ("m_next", n + 1),
        ("p", n),
        ("i", n + 1),
        ("q_prev", n + 1),
        ("q_cur", n),
        ("posmod", n),
        ("dist", 2 * n),
    ]
}

/// Product of the field cardinalities: an upper bound on the number of
/// control states.
pub fn structural_bound(n: usize) -> u128 {
    field_cardinalities(n).into_iter().map(|(_, c)| c).product()
}

/// Number of control states reachable from the initial state.
pub fn reachable_states(b: &Cg1Machine, limits: Limits) -> Result<usize, ExecError> {
    exec::reachable_control_states(b, &annotated_symbols(b.source.alphabet()), limits)
}

/// The machine as an explicit two-way NFA over `Σ × {0,1}`.
pub fn compile_explicit(b: &Cg1Machine, limits: Limits) -> Result<Compiled<Cg1State>, ExecError> {
    let alphabet = annotated_alphabet(b.source.alphabet());
    exec::compile(b, alphabet, &annotated_symbols(b.source.alphabet()), limits)
}
