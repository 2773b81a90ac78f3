//! The unique annotation certified by each construction.
//!
//! The input is cut into blocks of a fixed size. The annotation of each
//! complete block encodes the reachable set (one-way mode) or the crossing
//! table of the normalized machine (two-way mode) of the prefix ending with
//! that block. A trailing incomplete block is annotated with zeros.

use crate::automaton::{Alphabet, AnnotatedSymbol, AnnotatedWord, OneWayNfa, Symbol, TwoWayNfa};
use crate::tables::{encode_rel, encode_set, ltable_empty, normalize_restart, qx_1nfa, update_ltable, NormalizedTwoWayNfa};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cg1,
    Cg2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    OneWay(OneWayNfa),
    TwoWay(NormalizedTwoWayNfa),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationSpec {
    pub mode: Mode,
    pub block_size: usize,
    pub source: Source,
}

impl AnnotationSpec {
    /// Blocks of `n` cells carrying reachable sets.
    pub fn cg1(a: &OneWayNfa) -> Self {
        Self { mode: Mode::Cg1, block_size: a.n(), source: Source::OneWay(a.clone()) }
    }

    /// Blocks of `(n+1)²` cells carrying tables of the normalized machine.
    pub fn cg2(a: &TwoWayNfa) -> Self {
        Self::cg2_normalized(normalize_restart(a))
    }

    pub fn cg2_normalized(a: NormalizedTwoWayNfa) -> Self {
        let n = a.n();
        Self { mode: Mode::Cg2, block_size: n * n, source: Source::TwoWay(a) }
    }

    /// Annotation track of `w`.
    pub fn track(&self, w: &[Symbol]) -> Vec<bool> {
        let b = self.block_size;
        let mut bits = Vec::with_capacity(w.len());
        match &self.source {
            Source::OneWay(a) => {
                for end in (b..=w.len()).step_by(b) {
                    bits.extend(encode_set(&qx_1nfa(a, &w[..end]), a.n()));
                }
            }
            Source::TwoWay(a) => {
                let mut table = ltable_empty(&a.inner);
                for (i, &s) in w.iter().enumerate() {
                    table = update_ltable(&table, s, &a.inner);
                    if (i + 1) % b == 0 {
                        bits.extend(encode_rel(&table, a.n()));
                    }
                }
            }
        }
        bits.resize(w.len(), false);
        bits
    }

    pub fn annotate(&self, w: &[Symbol]) -> AnnotatedWord {
        AnnotatedWord::zip(w, &self.track(w))
    }

    pub fn is_well_annotated(&self, x: &AnnotatedWord) -> bool {
        self.track(&x.input()) == x.bits()
    }
}

/// Every annotated symbol, in the order of the annotated alphabet.
pub fn annotated_symbols(alphabet: &Alphabet) -> Vec<AnnotatedSymbol> {
    alphabet.symbols().flat_map(|input| [false, true].map(|bit| AnnotatedSymbol { input, bit })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::fixtures::{a1, a2};
    use crate::tables::render_bits;

    fn word(s: &str) -> Vec<Symbol> {
        a1().alphabet().parse_word(s).unwrap()
    }

    #[test]
    fn cg1_examples() {
        let spec = AnnotationSpec::cg1(&a1());
        assert!(spec.annotate(&[]).is_empty());
        assert_eq!(render_bits(&spec.track(&word("ab"))), "10");
        assert_eq!(render_bits(&spec.track(&word("aba"))), "100");
        assert_eq!(render_bits(&spec.track(&word("abaa"))), "1011");
    }

    #[test]
    fn cg2_block_size_uses_normalized_machine() {
        let spec = AnnotationSpec::cg2(&a2());
        assert_eq!(spec.block_size, 9);
        assert_eq!(spec.track(&vec![Symbol(0); 8]), vec![false; 8]);
        assert!(spec.track(&vec![Symbol(0); 9]).iter().any(|&b| b));
    }

    #[test]
    fn short_words_need_zero_tracks() {
        let spec = AnnotationSpec::cg1(&a1());
        let mut x = spec.annotate(&word("a"));
        assert!(spec.is_well_annotated(&x));
        x.0[0].bit = true;
        assert!(!spec.is_well_annotated(&x));
    }
}
