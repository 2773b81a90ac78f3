//! Crossing tables of two-way NFAs and reachable sets of one-way NFAs.
//!
//! For a prefix `u`, the table `τ(u)` collects the pairs `(p, q)` such that
//! the machine, started in `p` on the last cell of `⊢u`, can leave `⊢u` to the
//! right in state `q` without ever looking past it. Tables can be updated one
//! letter at a time without access to `u`, which is what both the annotation
//! and the constructed machine rely on.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::automaton::{Dir, Letter, OneWayNfa, StateId, Symbol, TwoWayNfa};
use crate::exec::{explore, Configuration, ExecError, Limits};

pub type StateSet = BTreeSet<StateId>;
pub type Relation = BTreeSet<(StateId, StateId)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TablesError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("expected a bitstring of length {expected}, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("invalid bit `{0}`")]
    BadBit(char),
}

/// `δ(start, w)` of a one-way NFA.
pub fn qx_1nfa(a: &OneWayNfa, w: &[Symbol]) -> StateSet {
    let mut cur: StateSet = [a.start()].into();
    for &s in w {
        cur = cur.iter().flat_map(|&p| a.delta(p, s).iter().copied()).collect();
    }
    cur
}

/// States in which the first visit of `⊣` can happen on input `u`.
pub fn qx_2nfa(a: &TwoWayNfa, u: &[Symbol], limits: Limits) -> Result<StateSet, ExecError> {
    let start = Configuration { state: a.start(), pos: 1 };
    let ex = explore(a, u, [start], u.len(), limits)?;
    Ok(ex.exits.into_iter().collect())
}

/// The crossing table `τ(u)`.
pub fn ltable(a: &TwoWayNfa, u: &[Symbol], limits: Limits) -> Result<Relation, ExecError> {
    let mut out = Relation::new();
    for p in 0..a.n() {
        let start = Configuration { state: StateId(p), pos: u.len() };
        let ex = explore(a, u, [start], u.len(), limits)?;
        out.extend(ex.exits.into_iter().map(|q| (StateId(p), q)));
    }
    Ok(out)
}

/// A two-way NFA extended with an inaccessible state whose table row is
/// the reachable set at `⊣`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedTwoWayNfa {
    pub inner: TwoWayNfa,
    pub restart: StateId,
}

impl NormalizedTwoWayNfa {
    pub fn n(&self) -> usize {
        self.inner.n()
    }
}

/// Adds `restart = n`: it sweeps left over `Σ ∪ {⊣}` and re-enters `start`
/// from `⊢`.
pub fn normalize_restart(a: &TwoWayNfa) -> NormalizedTwoWayNfa {
    let n = a.n();
    let restart = StateId(n);
    let mut out = TwoWayNfa::new(n + 1, a.alphabet().clone(), a.start(), a.accept(), a.reject());
    for &(p, l, q, d) in a.transitions() {
        out.add_transition(p, l, q, d);
    }
    for s in a.alphabet().symbols() {
        out.add_transition(restart, Letter::Sym(s), restart, Dir::L);
    }
    out.add_transition(restart, Letter::RightEnd, restart, Dir::L);
    out.add_transition(restart, Letter::LeftEnd, a.start(), Dir::R);
    NormalizedTwoWayNfa { inner: out, restart }
}

/// `A` with its `⊢` transitions replaced by `p → (q, R)` for `(p, q) ∈ r`.
pub fn with_left_table(a: &TwoWayNfa, r: &Relation) -> TwoWayNfa {
    let mut out = a.without_left_end_moves();
    for &(p, q) in r {
        out.add_transition(p, Letter::LeftEnd, q, Dir::R);
    }
    out
}

/// `T¹` on `uτ` from `τ(u)`.
pub fn t1_from_table(a: &TwoWayNfa, table: &Relation, tau: Letter) -> Relation {
    let mut out = Relation::new();
    for p in 0..a.n() {
        let p = StateId(p);
        for &(r, d) in a.delta(p, tau) {
            if d == Dir::L {
                out.extend(table.range((r, StateId(0))..=(r, StateId(usize::MAX))).map(|&(_, q)| (p, q)));
            }
        }
    }
    out
}

fn compose(x: &Relation, y: &Relation) -> Relation {
    let mut out = Relation::new();
    for &(p, q) in x {
        out.extend(y.range((q, StateId(0))..=(q, StateId(usize::MAX))).map(|&(_, r)| (p, r)));
    }
    out
}

fn identity(n: usize) -> Relation {
    (0..n).map(|p| (StateId(p), StateId(p))).collect()
}

/// `T^k` on `uτ` from `τ(u)`.
pub fn t_from_table(a: &TwoWayNfa, table: &Relation, tau: Letter, k: usize) -> Relation {
    let t1 = t1_from_table(a, table, tau);
    let mut t = identity(a.n());
    for _ in 0..k {
        t = compose(&t, &t1);
    }
    t
}

/// `S^k = T⁰ ∪ … ∪ T^k` on `uτ` from `τ(u)`.
pub fn s_from_table(a: &TwoWayNfa, table: &Relation, tau: Letter, k: usize) -> Relation {
    let t1 = t1_from_table(a, table, tau);
    let mut t = identity(a.n());
    let mut s = t.clone();
    for _ in 0..k {
        t = compose(&t, &t1);
        if t.is_empty() {
            break;
        }
        s.extend(t.iter().copied());
    }
    s
}

/// Cutoff after which `S^k` no longer grows.
pub fn s_star_cutoff(n: usize) -> usize {
    n * n.saturating_sub(1)
}

pub fn s_star_from_table(a: &TwoWayNfa, table: &Relation, tau: Letter) -> Relation {
    s_from_table(a, table, tau, s_star_cutoff(a.n()))
}

pub fn t_rel(a: &TwoWayNfa, u: &[Symbol], tau: Letter, k: usize, limits: Limits) -> Result<Relation, ExecError> {
    Ok(t_from_table(a, &ltable(a, u, limits)?, tau, k))
}

pub fn s_rel(a: &TwoWayNfa, u: &[Symbol], tau: Letter, k: usize, limits: Limits) -> Result<Relation, ExecError> {
    Ok(s_from_table(a, &ltable(a, u, limits)?, tau, k))
}

pub fn s_star(a: &TwoWayNfa, u: &[Symbol], tau: Letter, limits: Limits) -> Result<Relation, ExecError> {
    Ok(s_star_from_table(a, &ltable(a, u, limits)?, tau))
}

/// `τ(uσ)` from `τ(u)`.
pub fn update_ltable(prev: &Relation, sigma: Symbol, a: &TwoWayNfa) -> Relation {
    let tau = Letter::Sym(sigma);
    let star = s_star_from_table(a, prev, tau);
    let mut out = Relation::new();
    for &(p, r) in &star {
        for &(q, d) in a.delta(r, tau) {
            if d == Dir::R {
                out.insert((p, q));
            }
        }
    }
    out
}

/// `τ(ε)`, read off the `⊢` row.
pub fn ltable_empty(a: &TwoWayNfa) -> Relation {
    let mut out = Relation::new();
    for p in 0..a.n() {
        for &(q, d) in a.delta(StateId(p), Letter::LeftEnd) {
            if d == Dir::R {
                out.insert((StateId(p), q));
            }
        }
    }
    out
}

/// `τ(w)` by iterated updates from `τ(ε)`.
pub fn ltable_by_updates(a: &TwoWayNfa, w: &[Symbol]) -> Relation {
    w.iter().fold(ltable_empty(a), |t, &s| update_ltable(&t, s, a))
}

/// Membership decided from tables alone: `(restart, accept) ∈ S*` on `w⊣`.
pub fn accepts_via_ltables(a: &NormalizedTwoWayNfa, w: &[Symbol]) -> bool {
    let table = ltable_by_updates(&a.inner, w);
    s_star_from_table(&a.inner, &table, Letter::RightEnd).contains(&(a.restart, a.inner.accept()))
}

/// Bit `p` set iff `p ∈ s`.
pub fn encode_set(s: &StateSet, n: usize) -> Vec<bool> {
    (0..n).map(|p| s.contains(&StateId(p))).collect()
}

pub fn decode_set(bits: &[bool], n: usize) -> Result<StateSet, TablesError> {
    if bits.len() != n {
        return Err(TablesError::WrongLength { expected: n, got: bits.len() });
    }
    Ok((0..n).filter(|&p| bits[p]).map(StateId).collect())
}

/// Bit `p·n + q` set iff `(p, q) ∈ r`.
pub fn encode_rel(r: &Relation, n: usize) -> Vec<bool> {
    let mut bits = vec![false; n * n];
    for &(p, q) in r {
        bits[p.0 * n + q.0] = true;
    }
    bits
}

pub fn decode_rel(bits: &[bool], n: usize) -> Result<Relation, TablesError> {
    if bits.len() != n * n {
        return Err(TablesError::WrongLength { expected: n * n, got: bits.len() });
    }
    Ok((0..n * n).filter(|&i| bits[i]).map(|i| (StateId(i / n), StateId(i % n))).collect())
}

pub fn render_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(text: &str) -> Result<Vec<bool>, TablesError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            c => Err(TablesError::BadBit(c)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures::{a1, a2};

    fn ids(xs: &[usize]) -> StateSet {
        xs.iter().map(|&p| StateId(p)).collect()
    }

    fn rel(xs: &[(usize, usize)]) -> Relation {
        xs.iter().map(|&(p, q)| (StateId(p), StateId(q))).collect()
    }

    #[test]
    fn qx_of_a1() {
        assert_eq!(qx_1nfa(&a1(), &[]), ids(&[0]));
        assert_eq!(qx_1nfa(&a1(), &[Symbol(0)]), ids(&[0, 1]));
        assert_eq!(qx_1nfa(&a1(), &[Symbol(0), Symbol(1)]), ids(&[0]));
    }

    #[test]
    fn a2_tables() {
        let l = Limits::default();
        assert_eq!(ltable(&a2(), &[], l).unwrap(), rel(&[(0, 0)]));
        assert_eq!(ltable(&a2(), &[Symbol(0)], l).unwrap(), rel(&[(0, 0)]));
        assert_eq!(qx_2nfa(&a2(), &[], l).unwrap(), ids(&[0]));
        assert_eq!(qx_2nfa(&a2(), &[Symbol(0)], l).unwrap(), ids(&[0]));
    }

    #[test]
    fn normalized_a2_shape() {
        let n = normalize_restart(&a2());
        assert_eq!(n.n(), 3);
        assert_eq!(n.restart, StateId(2));
        assert_eq!(n.inner.delta(n.restart, Letter::RightEnd), &[(StateId(2), Dir::L)]);
        assert_eq!(n.inner.delta(n.restart, Letter::LeftEnd), &[(StateId(0), Dir::R)]);
    }

    #[test]
    fn left_table_override() {
        let a = a2();
        assert_eq!(with_left_table(&a, &ltable_empty(&a)), a);
        let r = rel(&[(0, 1), (1, 1)]);
        assert_eq!(ltable(&with_left_table(&a, &r), &[], Limits::default()).unwrap(), r);
    }

    #[test]
    fn t_zero_is_identity() {
        let a = normalize_restart(&a2()).inner;
        assert_eq!(t_from_table(&a, &Relation::new(), Letter::RightEnd, 0), rel(&[(0, 0), (1, 1), (2, 2)]));
    }

    #[test]
    fn empty_table_without_right_moves_updates_to_empty() {
        let mut a = TwoWayNfa::new(2, crate::automaton::Alphabet::letters(1), StateId(0), StateId(1), None);
        a.add_transition(StateId(0), Letter::Sym(Symbol(0)), StateId(1), Dir::L);
        assert!(update_ltable(&Relation::new(), Symbol(0), &a).is_empty());
    }

    #[test]
    fn encodings() {
        assert_eq!(render_bits(&encode_set(&ids(&[0, 2]), 3)), "101");
        assert_eq!(render_bits(&encode_rel(&rel(&[(0, 1)]), 2)), "0100");
        assert_eq!(decode_rel(&parse_bits("0100").unwrap(), 2).unwrap(), rel(&[(0, 1)]));
        assert_eq!(decode_set(&[true], 2), Err(TablesError::WrongLength { expected: 2, got: 1 }));
        assert_eq!(parse_bits("01x"), Err(TablesError::BadBit('x')));
    }

    #[test]
    fn star_cutoff() {
        assert_eq!(s_star_cutoff(1), 0);
        assert_eq!(s_star_cutoff(3), 6);
    }
}
