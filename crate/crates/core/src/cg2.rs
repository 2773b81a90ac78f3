//! Self-verifying two-way machine for the complement of a two-way NFA.
//!
//! The source is first normalized with a restart state (see
//! [`normalize_restart`]); `n` below is the normalized state count and
//! `N = n²` the block size. The machine keeps a counter `hp ∈ [0, 2N)` that
//! follows head moves, wraps from `2N-1` to `N` on right moves and never goes
//! below zero. It thereby sees a window of two blocks: the left one carries
//! the encoded table of the prefix ending there, the right one contains the
//! driver cell.
//!
//! For each cell the machine turns `|τ(v)|` into `|τ(vσ)|` through three
//! counting steps (`S¹`, `S*` by doubling, then `τ`), each of which certifies
//! memberships by enumerating a relation of known size in ascending order.
//! Single crossings are replayed from the annotation of the left block by
//! [`Ctl::NsDirect`]/[`Ctl::NsScan`]/[`Ctl::NsWalk`]; sequences of them by
//! [`Ctl::SRound`]. Completed blocks are checked against the table they must
//! encode, the tail of the input must carry zeros, and the verdict tests
//! `(restart, accept) ∈ S*` at `⊣`.

use crate::annot::annotated_symbols;
use crate::automaton::{annotated_alphabet, AnnotatedSymbol, AnnotatedWord, Dir, Letter, StateId, TwoWayNfa};
use crate::exec::{self, Cell, Compiled, ExecError, Limits, Move, Outcome, Probe, Status, TwoWayMachine};
use crate::tables::{ltable_empty, normalize_restart, NormalizedTwoWayNfa};

pub const NONE: u8 = u8::MAX;

/// Largest source automaton (before normalization) the packed state supports.
pub const MAX_STATES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ctl {
    Drive,
    /// Start the candidate loop of the current step.
    StepStart,
    /// Start the inner search for the current candidate.
    CandStart,
    EnumNext,
    /// One optional round of a crossing sequence: a left move over the
    /// driver cell followed by a crossing.
    SRound,
    /// Crossing, direct simulation.
    NsDirect,
    /// Crossing, scanning the left block for a selectable bit.
    NsScan,
    /// Crossing, walking back to the first cell of the right block.
    NsWalk,
    SDone,
    Got,
    Emit,
    ChkStart,
    ChkCount,
    ChkCountBack,
    ChkSeekBit,
    ChkBitBack,
    Tail,
    TailScan,
    TailBack,
    Halt,
    Acc,
    Rej,
    Abort,
}

impl Ctl {
    pub const COUNT: usize = 23;
}

/// Which procedure owns the current enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// `|S¹(vσ)|` from `|τ(v)|`.
    S1,
    /// `|S^{2j}|` from `|S^j|`, one doubling round.
    SNext,
    /// `|τ(vσ)|` from `|S*(vσ)|`.
    T,
    Check,
    Member,
    Probe,
}

impl Step {
    pub const COUNT: usize = 6;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EnumKind {
    /// Pairs of `τ(v)` for the prefix `v` left of the driver cell.
    TBefore,
    /// Pairs of `τ(vσ)`, the prefix through the driver cell.
    TThrough,
    /// Pairs of `S^j(vσ)`.
    S,
}

impl EnumKind {
    pub const COUNT: usize = 3;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cg2State {
    pub ctl: Ctl,
    pub step: Step,
    pub kind: EnumKind,
    pub hp: u8,
    pub m: u8,
    pub m_next: u8,
    /// Candidate pair.
    pub p: u8,
    pub q: u8,
    /// Middle state of a doubling candidate.
    pub r: u8,
    /// Whether the doubling candidate is at its second membership test.
    pub second: bool,
    /// Doubling round, from 1.
    pub round: u8,
    /// Length bound of the enumerated `S^j`.
    pub j: u8,
    pub k: u8,
    pub p_prev: u8,
    pub q_prev: u8,
    pub p_next: u8,
    /// Simulated state during a crossing, then the enumerated second
    /// component.
    pub q_next: u8,
    /// `hp` of the driver cell minus `N`.
    pub i: u8,
    /// Remaining rounds of a crossing sequence.
    pub jc: u8,
    pub clock: u16,
}

impl Cg2State {
    fn zero(ctl: Ctl) -> Self {
        Self {
            ctl,
            step: Step::S1,
            kind: EnumKind::TBefore,
            hp: 0,
            m: 0,
            m_next: 0,
            p: 0,
            q: 0,
            r: 0,
            second: false,
            round: 0,
            j: 0,
            k: 0,
            p_prev: NONE,
            q_prev: NONE,
            p_next: 0,
            q_next: 0,
            i: 0,
            jc: 0,
            clock: 0,
        }
    }
}

/// Where a probe halts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeStop {
    /// After the first completed counting step, block check or enumeration.
    Step,
    /// After the first completed doubling round.
    Round,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cg2Options {
    /// Bound every crossing by `2n³ - 1` head moves.
    pub clocked: bool,
    /// Check every completed block. Disabling it breaks the construction and
    /// exists for mutation testing.
    pub check_table: bool,
    pub probe: Option<ProbeStop>,
}

impl Default for Cg2Options {
    fn default() -> Self {
        Self { clocked: false, check_table: true, probe: None }
    }
}

#[derive(Clone, Debug)]
pub struct Cg2Machine {
    original: TwoWayNfa,
    source: NormalizedTwoWayNfa,
    options: Cg2Options,
    n: u8,
    block: u8,
    rounds: u8,
    initial_m: u8,
    clock_limit: u16,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("automata with more than {MAX_STATES} states are not supported")]
    TooLarge,
}

/// Number of doubling rounds: `max(1, 2⌈log₂ n⌉)`.
pub fn doubling_rounds(n: usize) -> usize {
    let mut log = 0;
    while (1usize << log) < n {
        log += 1;
    }
    (2 * log).max(1)
}

pub fn build_cg2(a: &TwoWayNfa) -> Result<Cg2Machine, BuildError> {
    build_cg2_with(a, Cg2Options::default())
}

pub fn build_cg2_with(a: &TwoWayNfa, options: Cg2Options) -> Result<Cg2Machine, BuildError> {
    if let Some(v) = a.validate().into_iter().next() {
        return Err(BuildError::Invalid(v));
    }
    if a.n() > MAX_STATES {
        return Err(BuildError::TooLarge);
    }
    let source = normalize_restart(a);
    let n = source.n();
    Ok(Cg2Machine {
        n: n as u8,
        block: (n * n) as u8,
        rounds: doubling_rounds(n) as u8,
        initial_m: ltable_empty(&source.inner).len() as u8,
        clock_limit: (2 * n * n * n - 1) as u16,
        source,
        original: a.clone(),
        options,
    })
}

type Out = Vec<(Cg2State, Move)>;

fn letter(cell: Cell<AnnotatedSymbol>) -> Letter {
    match cell {
        Cell::LeftEnd => Letter::LeftEnd,
        Cell::Sym(a) => Letter::Sym(a.input),
        Cell::RightEnd => Letter::RightEnd,
    }
}

impl Cg2Machine {
    /// The automaton the machine was built from.
    pub fn original(&self) -> &TwoWayNfa {
        &self.original
    }

    /// Its normalized form, which the machine simulates.
    pub fn source(&self) -> &NormalizedTwoWayNfa {
        &self.source
    }

    pub fn options(&self) -> Cg2Options {
        self.options
    }

    /// Normalized state count.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn block_size(&self) -> usize {
        self.block as usize
    }

    pub fn rounds(&self) -> usize {
        self.rounds as usize
    }

    pub fn clock_limit(&self) -> usize {
        self.clock_limit as usize
    }

    fn delta(&self, p: u8, cell: Cell<AnnotatedSymbol>) -> &[(StateId, Dir)] {
        self.source.inner.delta(StateId(p as usize), letter(cell))
    }

    fn has_move(&self, p: u8, cell: Cell<AnnotatedSymbol>, q: u8, d: Dir) -> bool {
        self.source.inner.has_move(StateId(p as usize), letter(cell), StateId(q as usize), d)
    }

    fn round_j(&self, round: u8) -> u8 {
        let j = 1u32 << (round.saturating_sub(1)).min(16);
        j.min(u32::from(self.block)) as u8
    }

    fn push_left(&self, mut s: Cg2State, out: &mut Out) {
        if s.hp > 0 {
            s.hp -= 1;
            out.push((s, Move::Left));
        }
    }

    fn push_right(&self, mut s: Cg2State, out: &mut Out) {
        s.hp = if s.hp + 1 == 2 * self.block { self.block } else { s.hp + 1 };
        out.push((s, Move::Right));
    }

    /// Head move inside a crossing, counted against the clock.
    fn push_sim(&self, mut s: Cg2State, d: Dir, out: &mut Out) {
        if self.options.clocked {
            if s.clock >= self.clock_limit {
                out.push(Self::terminal(Ctl::Abort));
                return;
            }
            s.clock += 1;
        }
        match d {
            Dir::L => self.push_left(s, out),
            Dir::R => self.push_right(s, out),
        }
    }

    fn stay(s: Cg2State) -> (Cg2State, Move) {
        (s, Move::Stay)
    }

    fn goto(s: Cg2State, ctl: Ctl) -> (Cg2State, Move) {
        Self::stay(Cg2State { ctl, ..s })
    }

    fn terminal(ctl: Ctl) -> (Cg2State, Move) {
        Self::stay(Cg2State::zero(ctl))
    }

    fn probe_halt(s: Cg2State) -> (Cg2State, Move) {
        Self::goto(Self::clear_enum(s), Ctl::Halt)
    }

    fn clear_enum(s: Cg2State) -> Cg2State {
        Cg2State { k: 0, p_prev: NONE, q_prev: NONE, p_next: 0, q_next: 0, jc: 0, clock: 0, ..s }
    }

    fn begin_enum(s: Cg2State, kind: EnumKind, j: u8) -> (Cg2State, Move) {
        Self::goto(Cg2State { kind, j, ..Self::clear_enum(s) }, Ctl::EnumNext)
    }

    /// First candidate pair of a step.
    fn first_pair(&self, step: Step) -> (u8, u8) {
        if step == Step::S1 {
            (0, 1)
        } else {
            (0, 0)
        }
    }

    fn next_pair(&self, step: Step, p: u8, q: u8) -> Option<(u8, u8)> {
        let (mut p, mut q) = (p, q + 1);
        loop {
            if q == self.n {
                p += 1;
                q = 0;
            }
            if p == self.n {
                return None;
            }
            if step == Step::S1 && p == q {
                q += 1;
                continue;
            }
            return Some((p, q));
        }
    }

    fn start_step(&self, s: Cg2State, step: Step) -> (Cg2State, Move) {
        let (p, q) = self.first_pair(step);
        let m_next = if step == Step::S1 { self.n } else { 0 };
        let s = Cg2State { step, p, q, r: 0, second: false, m_next, ..Self::clear_enum(s) };
        Self::goto(s, Ctl::CandStart)
    }

    fn start_round(&self, s: Cg2State, round: u8) -> (Cg2State, Move) {
        let (st, mv) = self.start_step(Cg2State { round, ..s }, Step::SNext);
        (Cg2State { j: self.round_j(round), ..st }, mv)
    }

    /// The candidate loop of the current step moves on; `witnessed` tells
    /// whether the candidate just left belongs to the counted relation.
    fn next_candidate(&self, s: Cg2State, witnessed: bool, cell: Cell<AnnotatedSymbol>, out: &mut Out) {
        let m_next = s.m_next + u8::from(witnessed);
        let s = Cg2State { m_next, r: 0, second: false, ..Self::clear_enum(s) };
        match self.next_pair(s.step, s.p, s.q) {
            Some((p, q)) => out.push(Self::goto(Cg2State { p, q, ..s }, Ctl::CandStart)),
            None => self.step_done(Cg2State { m: m_next, m_next: 0, p: 0, q: 0, ..s }, cell, out),
        }
    }

    fn step_done(&self, s: Cg2State, cell: Cell<AnnotatedSymbol>, out: &mut Out) {
        match s.step {
            Step::S1 => {
                if self.options.probe == Some(ProbeStop::Step) {
                    out.push(Self::probe_halt(s));
                } else {
                    out.push(self.start_round(s, 1));
                }
            }
            Step::SNext => {
                if self.options.probe == Some(ProbeStop::Round) {
                    out.push(Self::probe_halt(s));
                } else if s.round < self.rounds {
                    out.push(self.start_round(s, s.round + 1));
                } else if self.options.probe == Some(ProbeStop::Step) {
                    out.push(Self::probe_halt(Cg2State { round: 0, j: 0, ..s }));
                } else {
                    let s = Cg2State { round: 0, j: 0, ..s };
                    if cell == Cell::RightEnd {
                        let target = Cg2State {
                            step: Step::Member,
                            p: self.source.restart.0 as u8,
                            q: self.source.inner.accept().0 as u8,
                            ..s
                        };
                        out.push(Self::begin_enum(target, EnumKind::S, self.block));
                    } else {
                        out.push(self.start_step(s, Step::T));
                    }
                }
            }
            Step::T => {
                if self.options.probe == Some(ProbeStop::Step) {
                    out.push(Self::probe_halt(s));
                } else if s.hp == 2 * self.block - 1 && self.options.check_table {
                    out.push(Self::goto(s, Ctl::ChkStart));
                } else {
                    self.advance(s, out);
                }
            }
            Step::Check | Step::Member | Step::Probe => unreachable!("not a counting step"),
        }
    }

    fn advance(&self, s: Cg2State, out: &mut Out) {
        let t = Cg2State { hp: s.hp, m: s.m, ..Cg2State::zero(Ctl::Drive) };
        self.push_right(t, out);
    }

    /// Start of the inner search of the current candidate.
    fn cand_start(&self, s: Cg2State) -> (Cg2State, Move) {
        match s.step {
            Step::S1 => Self::begin_enum(s, EnumKind::TBefore, 0),
            Step::SNext => Self::begin_enum(s, EnumKind::S, s.j),
            Step::T => Self::begin_enum(s, EnumKind::S, self.block),
            Step::Check | Step::Member | Step::Probe => unreachable!("no candidate loop"),
        }
    }

    fn on_yield(&self, s: Cg2State, cell: Cell<AnnotatedSymbol>, out: &mut Out) {
        let (pn, qn) = (s.p_next, s.q_next);
        match s.step {
            Step::S1 => {
                if qn == s.q && self.has_move(s.p, cell, pn, Dir::L) {
                    self.next_candidate(s, true, cell, out);
                } else {
                    out.push(Self::goto(s, Ctl::EnumNext));
                }
            }
            Step::T => {
                if pn == s.p && self.has_move(qn, cell, s.q, Dir::R) {
                    self.next_candidate(s, true, cell, out);
                } else {
                    out.push(Self::goto(s, Ctl::EnumNext));
                }
            }
            Step::SNext => {
                let target = if s.second { (s.r, s.q) } else { (s.p, s.r) };
                if (pn, qn) != target {
                    out.push(Self::goto(s, Ctl::EnumNext));
                } else if s.second {
                    self.next_candidate(s, true, cell, out);
                } else {
                    out.push(Self::begin_enum(Cg2State { second: true, ..s }, EnumKind::S, s.j));
                }
            }
            Step::Member => {
                if (pn, qn) == (s.p, s.q) {
                    out.push(Self::terminal(Ctl::Acc));
                } else {
                    out.push(Self::goto(s, Ctl::EnumNext));
                }
            }
            Step::Check => out.push(Self::goto(s, Ctl::ChkSeekBit)),
            Step::Probe => out.push(Self::goto(s, Ctl::Emit)),
        }
    }

    fn on_enum_done(&self, s: Cg2State, cell: Cell<AnnotatedSymbol>, out: &mut Out) {
        match s.step {
            Step::S1 | Step::T => self.next_candidate(s, false, cell, out),
            Step::SNext => {
                if s.r + 1 < self.n {
                    let t = Cg2State { r: s.r + 1, second: false, ..s };
                    out.push(Self::begin_enum(t, EnumKind::S, s.j));
                } else {
                    self.next_candidate(s, false, cell, out);
                }
            }
            Step::Member => out.push(Self::terminal(Ctl::Rej)),
            Step::Check => {
                if self.options.probe.is_some() {
                    out.push(Self::probe_halt(s));
                } else {
                    self.advance(s, out);
                }
            }
            Step::Probe => out.push(Self::probe_halt(s)),
        }
    }

    /// The crossing returns once the head is back on the driver cell.
    fn crossing_done(&self, s: Cg2State) -> (Cg2State, Move) {
        let s = Cg2State { clock: 0, ..s };
        match s.kind {
            EnumKind::TBefore => Self::goto(s, Ctl::Got),
            EnumKind::TThrough | EnumKind::S => Self::goto(s, Ctl::SRound),
        }
    }

    fn scan(&self, s: Cg2State, a: AnnotatedSymbol, out: &mut Out) {
        let lo = u16::from(s.q_next) * u16::from(self.n);
        let hp = u16::from(s.hp);
        if a.bit && lo <= hp && hp < lo + u16::from(self.n) {
            let t = Cg2State { ctl: Ctl::NsWalk, q_next: s.hp % self.n, ..s };
            self.push_sim(t, Dir::R, out);
        }
        if s.hp > 0 {
            self.push_sim(Cg2State { ctl: Ctl::NsScan, ..s }, Dir::L, out);
        }
    }

    fn step_into(&self, s: Cg2State, cell: Cell<AnnotatedSymbol>, out: &mut Out) {
        let n = self.n;
        let nb = self.block;
        match s.ctl {
            Ctl::Drive => match cell {
                Cell::RightEnd => out.push(Self::goto(s, Ctl::Tail)),
                Cell::Sym(_) => out.push(Self::goto(Cg2State { i: s.hp - nb, ..s }, Ctl::StepStart)),
                Cell::LeftEnd => {}
            },
            Ctl::StepStart => out.push(self.start_step(s, Step::S1)),
            Ctl::CandStart => out.push(self.cand_start(s)),
            Ctl::EnumNext => {
                if s.k == s.m {
                    self.on_enum_done(s, cell, out);
                    return;
                }
                for pn in 0..n {
                    let t = Cg2State { p_next: pn, q_next: pn, ..s };
                    match s.kind {
                        EnumKind::TBefore => self.push_left(Cg2State { ctl: Ctl::NsDirect, clock: 0, ..t }, out),
                        EnumKind::TThrough => out.push(Self::goto(Cg2State { jc: nb, ..t }, Ctl::SRound)),
                        EnumKind::S => out.push(Self::goto(Cg2State { jc: s.j, ..t }, Ctl::SRound)),
                    }
                }
            }
            Ctl::SRound => {
                out.push(Self::goto(Cg2State { jc: 0, ..s }, Ctl::SDone));
                if s.jc > 0 {
                    for &(q, d) in self.delta(s.q_next, cell) {
                        if d == Dir::L {
                            let t = Cg2State { ctl: Ctl::NsDirect, q_next: q.0 as u8, jc: s.jc - 1, clock: 0, ..s };
                            self.push_left(t, out);
                        }
                    }
                }
            }
            Ctl::NsDirect => {
                if s.hp == nb + s.i {
                    out.push(self.crossing_done(s));
                } else if s.hp >= nb || cell == Cell::LeftEnd {
                    for &(q, d) in self.delta(s.q_next, cell) {
                        if d == Dir::L && cell == Cell::LeftEnd {
                            continue;
                        }
                        self.push_sim(Cg2State { q_next: q.0 as u8, ..s }, d, out);
                    }
                } else if let Cell::Sym(a) = cell {
                    self.scan(s, a, out);
                }
            }
            Ctl::NsScan => {
                if let Cell::Sym(a) = cell {
                    self.scan(s, a, out);
                }
            }
            Ctl::NsWalk => {
                if s.hp == nb + s.i {
                    out.push(self.crossing_done(s));
                } else if s.hp >= nb {
                    out.push(Self::goto(s, Ctl::NsDirect));
                } else {
                    self.push_sim(s, Dir::R, out);
                }
            }
            Ctl::SDone => {
                if s.kind == EnumKind::TThrough {
                    for &(q, d) in self.delta(s.q_next, cell) {
                        if d == Dir::R {
                            out.push(Self::goto(Cg2State { q_next: q.0 as u8, ..s }, Ctl::Got));
                        }
                    }
                } else {
                    out.push(Self::goto(s, Ctl::Got));
                }
            }
            Ctl::Got => {
                if s.p_prev != NONE && (s.p_next, s.q_next) <= (s.p_prev, s.q_prev) {
                    out.push(Self::terminal(Ctl::Abort));
                } else {
                    let t = Cg2State { p_prev: s.p_next, q_prev: s.q_next, k: s.k + 1, ..s };
                    self.on_yield(t, cell, out);
                }
            }
            Ctl::Emit => out.push(Self::goto(s, Ctl::EnumNext)),
            Ctl::ChkStart => out.push(Self::goto(Cg2State { step: Step::Check, m_next: s.m, ..s }, Ctl::ChkCount)),
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
                if t.hp > nb {
                    self.push_left(t, out);
                } else if t.m_next != 0 {
                    out.push(Self::terminal(Ctl::Abort));
                } else {
                    out.push(Self::goto(t, Ctl::ChkCountBack));
                }
            }
            Ctl::ChkCountBack => {
                if s.hp == 2 * nb - 1 {
                    out.push(Self::begin_enum(s, EnumKind::TThrough, 0));
                } else {
                    self.push_right(s, out);
                }
            }
            Ctl::ChkSeekBit => {
                let Cell::Sym(a) = cell else { return };
                let target = nb + s.p_next * n + s.q_next;
                if s.hp > target {
                    self.push_left(s, out);
                } else if a.bit {
                    out.push(Self::goto(s, Ctl::ChkBitBack));
                } else {
                    out.push(Self::terminal(Ctl::Abort));
                }
            }
            Ctl::ChkBitBack => {
                if s.hp == 2 * nb - 1 {
                    out.push(Self::goto(s, Ctl::EnumNext));
                } else {
                    self.push_right(s, out);
                }
            }
            Ctl::Tail => {
                if s.hp == nb {
                    out.push(self.start_step(Cg2State { i: 0, ..s }, Step::S1));
                } else {
                    self.push_left(Cg2State { ctl: Ctl::TailScan, ..s }, out);
                }
            }
            Ctl::TailScan => match cell {
                Cell::Sym(a) if a.bit => out.push(Self::terminal(Ctl::Abort)),
                Cell::Sym(_) if s.hp == nb => out.push(Self::goto(s, Ctl::TailBack)),
                Cell::Sym(_) => self.push_left(s, out),
                _ => {}
            },
            Ctl::TailBack => match cell {
                Cell::RightEnd => {
                    let i = s.hp - nb;
                    out.push(self.start_step(Cg2State { i, ..s }, Step::S1));
                }
                _ => self.push_right(s, out),
            },
            Ctl::Halt | Ctl::Acc | Ctl::Rej | Ctl::Abort => {}
        }
    }

    /// Fragment start state with the head on position `pos`.
    pub fn fragment_state(&self, pos: usize, m: u8) -> Cg2State {
        let nb = self.block as usize;
        let i = (pos + nb - 1) % nb;
        Cg2State { hp: (nb + i) as u8, i: i as u8, m, ..Cg2State::zero(Ctl::Drive) }
    }
}

impl TwoWayMachine for Cg2Machine {
    type State = Cg2State;
    type Symbol = AnnotatedSymbol;

    fn initial(&self) -> Cg2State {
        Cg2State { hp: self.block, m: self.initial_m, ..Cg2State::zero(Ctl::Drive) }
    }

    fn step(&self, state: &Cg2State, scanned: Cell<AnnotatedSymbol>, out: &mut Out) {
        self.step_into(*state, scanned, out)
    }

    fn classify(&self, state: &Cg2State, _scanned: Cell<AnnotatedSymbol>) -> Status {
        match state.ctl {
            Ctl::Acc => Status::Accepting,
            Ctl::Rej => Status::Rejecting,
            Ctl::Abort | Ctl::Halt => Status::Aborting,
            _ => Status::Live,
        }
    }
}

pub fn decide_cg2(b: &Cg2Machine, x: &AnnotatedWord, limits: Limits) -> Result<Outcome, ExecError> {
    exec::decide(b, &x.0, limits)
}

/// A fragment run in isolation by [`run_fragment`], started on a driver
/// cell `D`. `v` is the prefix left of `D` and `σ` the letter under `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    /// One crossing of `v`: endpoints are the pairs of `τ(v)`.
    NsimulT,
    /// One crossing sequence of at most `j` rounds: pairs of `S^j(vσ)`.
    NsimulS { j: u8 },
    EnumT { m: u8 },
    EnumS { m: u8, j: u8 },
    S1FromT { m: u8 },
    /// One doubling round, from `|S^j|` with `j = min(2^(round-1), N)`.
    SNextFromSPrev { m: u8, round: u8 },
    SStarFromS1 { m: u8 },
    TFromSStar { m: u8 },
    /// Check of the block ending at `D`, given `m = |τ(vσ)|`.
    CheckTable { m: u8 },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FragmentResult {
    Pair(u8, u8),
    Sequence(Vec<(u8, u8)>),
    Value(u8),
    Passed,
}

/// Results of every successful run of `fragment` with the head starting on
/// position `pos`, each paired with the position the run ended on.
pub fn run_fragment(
    b: &Cg2Machine,
    x: &AnnotatedWord,
    pos: usize,
    fragment: Fragment,
    limits: Limits,
) -> Result<Vec<(FragmentResult, usize)>, ExecError> {
    let stop = match fragment {
        Fragment::SNextFromSPrev { .. } => ProbeStop::Round,
        _ => ProbeStop::Step,
    };
    let probe = Cg2Machine { options: Cg2Options { probe: Some(stop), ..b.options }, ..b.clone() };
    let enum_start = |m: u8, kind: EnumKind, j: u8| {
        let s = Cg2State { step: Step::Probe, ..probe.fragment_state(pos, m) };
        Cg2Machine::begin_enum(s, kind, j).0
    };
    let start = match fragment {
        Fragment::NsimulT => enum_start(1, EnumKind::TBefore, 0),
        Fragment::NsimulS { j } => enum_start(1, EnumKind::S, j),
        Fragment::EnumT { m } => enum_start(m, EnumKind::TBefore, 0),
        Fragment::EnumS { m, j } => enum_start(m, EnumKind::S, j),
        Fragment::S1FromT { m } => probe.start_step(probe.fragment_state(pos, m), Step::S1).0,
        Fragment::SNextFromSPrev { m, round } => probe.start_round(probe.fragment_state(pos, m), round).0,
        Fragment::SStarFromS1 { m } => probe.start_round(probe.fragment_state(pos, m), 1).0,
        Fragment::TFromSStar { m } => probe.start_step(probe.fragment_state(pos, m), Step::T).0,
        Fragment::CheckTable { m } => Cg2State { ctl: Ctl::ChkStart, ..probe.fragment_state(pos, m) },
    };
    let runner = Probe {
        machine: &probe,
        anchor: pos,
        start,
        emit: |s: &Cg2State| (s.ctl == Ctl::Emit).then_some(u32::from(s.p_next) << 8 | u32::from(s.q_next)),
    };
    let mut out = Vec::new();
    for (s, status, at, hist) in exec::probe_terminals(&runner, &x.0, limits)? {
        if status != Status::Aborting || s.ctl != Ctl::Halt {
            continue;
        }
        let pairs: Vec<(u8, u8)> = hist.iter().map(|&v| ((v >> 8) as u8, v as u8)).collect();
        let r = match fragment {
            Fragment::NsimulT | Fragment::NsimulS { .. } => FragmentResult::Pair(pairs[0].0, pairs[0].1),
            Fragment::EnumT { .. } | Fragment::EnumS { .. } => FragmentResult::Sequence(pairs),
            Fragment::CheckTable { .. } => FragmentResult::Passed,
            _ => FragmentResult::Value(s.m),
        };
        out.push((r, at));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Field cardinalities of [`Cg2State`] for a source with `n` states
/// (normalized count `n + 1`).
pub fn field_cardinalities(n: usize) -> Vec<(&'static str, u128)> {
    let n1 = (n + 1) as u128;
    let nb = n1 * n1;
    vec![
        ("ctl", Ctl::COUNT as u128),
        ("step", Step::COUNT as u128),
        ("kind", EnumKind::COUNT as u128),
        ("hp", 2 * nb),
        ("m", nb + 1),
        ("m_next", nb + 1),
        ("p", n1),
        ("q", n1),
        ("r", n1),
        ("second", 2),
        ("round", doubling_rounds(n + 1) as u128 + 1),
        ("k", nb + 1),
        ("p_prev", n1 + 1),
        ("q_prev", n1 + 1),
        ("p_next", n1),
        ("q_next", n1),
        ("i", nb),
        ("jc", nb + 1),
        ("clock", 2 * n1 * n1 * n1),
    ]
}

/// Product of all field cardinalities. The bound `j` of an enumerated
/// relation is a function of `round` and the step, so it adds no factor.
pub fn structural_bound(n: usize) -> u128 {
    field_cardinalities(n).into_iter().map(|(_, c)| c).product()
}

/// Same product without `hp` and `clock`: the size of the machine when the
/// window counter is taken for granted and crossings are not clocked.
pub fn structural_bound_core(n: usize) -> u128 {
    field_cardinalities(n).into_iter().filter(|(f, _)| *f != "hp" && *f != "clock").map(|(_, c)| c).product()
}

pub fn reachable_states(b: &Cg2Machine, limits: Limits) -> Result<usize, ExecError> {
    exec::reachable_control_states(b, &annotated_symbols(b.source.inner.alphabet()), limits)
}

pub fn compile_explicit(b: &Cg2Machine, limits: Limits) -> Result<Compiled<Cg2State>, ExecError> {
    let alphabet = b.source.inner.alphabet();
    exec::compile(b, annotated_alphabet(alphabet), &annotated_symbols(alphabet), limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annot::AnnotationSpec;
    use crate::automaton::fixtures::a2;
    use crate::automaton::Symbol;

    #[test]
    fn doubling_round_counts() {
        assert_eq!(doubling_rounds(1), 1);
        assert_eq!(doubling_rounds(2), 2);
        assert_eq!(doubling_rounds(3), 4);
        assert_eq!(doubling_rounds(4), 4);
    }

    #[test]
    fn a2_rejects_short_words() {
        let b = build_cg2(&a2()).unwrap();
        let spec = AnnotationSpec::cg2(&a2());
        for k in 0..3 {
            let x = spec.annotate(&vec![Symbol(0); k]);
            assert_eq!(decide_cg2(&b, &x, Limits::default()).unwrap(), Outcome::REJECT, "length {k}");
        }
    }

    #[test]
    fn initial_table_size_is_precomputed() {
        let b = build_cg2(&a2()).unwrap();
        // restart → start on ⊢, and 0 → 0
        assert_eq!(b.initial().m, 2);
        assert_eq!(b.initial().hp, 9);
    }
}
