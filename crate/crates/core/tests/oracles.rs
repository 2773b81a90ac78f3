//! Reference values recomputed by independent means and frozen.

use std::collections::BTreeSet;

use svcomp::annot::AnnotationSpec;
use svcomp::automaton::fixtures::{a1, a2};
use svcomp::automaton::{annotated_index, AnnotatedSymbol, AnnotatedWord, Automaton, Letter, StateId, Symbol};
use svcomp::cg1::{self, build_cg1, Fragment, FragmentResult};
use svcomp::cg2::{self, build_cg2};
use svcomp::exec::{decide, Limits, Outcome};
use svcomp::tables::{self, encode_rel, normalize_restart, render_bits};
use svcomp::verify::{oracle_membership, random_2nfas};

fn w1(s: &str) -> Vec<Symbol> {
    a1().alphabet().parse_word(s).unwrap()
}

fn set(v: &[usize]) -> BTreeSet<StateId> {
    v.iter().map(|&p| StateId(p)).collect()
}

#[test]
fn a1_language_is_words_ending_in_a() {
    let a = Automaton::OneWay(a1());
    for w in a1().alphabet().words_up_to(6) {
        let ends_in_a = w.last() == Some(&Symbol(0));
        assert_eq!(oracle_membership(&a, &w, Limits::default()).unwrap(), ends_in_a);
    }
    assert!(oracle_membership(&a, &w1("ba"), Limits::default()).unwrap());
    assert!(!oracle_membership(&a, &[], Limits::default()).unwrap());
}

#[test]
fn a2_accepts_nothing() {
    let a = Automaton::TwoWay(a2());
    for w in a2().alphabet().words_up_to(4) {
        assert!(!oracle_membership(&a, &w, Limits::default()).unwrap());
    }
}

#[test]
fn a1_reachable_sets() {
    assert_eq!(tables::qx_1nfa(&a1(), &[]), set(&[0]));
    assert_eq!(tables::qx_1nfa(&a1(), &w1("a")), set(&[0, 1]));
    assert_eq!(tables::qx_1nfa(&a1(), &w1("ab")), set(&[0]));
}

#[test]
fn a2_normalized_tables() {
    let a = normalize_restart(&a2()).inner;
    let aa = vec![Symbol(0); 2];
    let t = tables::ltable(&a, &aa, Limits::default()).unwrap();
    assert_eq!(render_bits(&encode_rel(&t, 3)), "100000100");
    assert_eq!(tables::ltable(&a, &[], Limits::default()).unwrap(), [(StateId(0), StateId(0)), (StateId(2), StateId(0))].into());
}

#[test]
fn cg1_annotations() {
    let spec = AnnotationSpec::cg1(&a1());
    assert!(spec.annotate(&[]).is_empty());
    assert_eq!(render_bits(&spec.track(&w1("ab"))), "10");
    assert_eq!(render_bits(&spec.track(&w1("aba"))), "100");
}

fn cg1_results(x: &AnnotatedWord, pos: usize, f: Fragment) -> Vec<FragmentResult> {
    let b = build_cg1(&a1()).unwrap();
    cg1::run_fragment(&b, x, pos, f, Limits::default()).unwrap().into_iter().map(|(r, _)| r).collect()
}

#[test]
fn cg1_fragments_on_a1() {
    let spec = AnnotationSpec::cg1(&a1());
    let ab = spec.annotate(&w1("ab"));
    assert_eq!(cg1_results(&ab, 3, Fragment::Nsimul), vec![FragmentResult::Value(0)]);
    assert_eq!(cg1_results(&ab, 1, Fragment::Nsimul), vec![FragmentResult::Value(0)]);
    assert_eq!(cg1_results(&ab, 2, Fragment::EnumQx { m: 2 }), vec![FragmentResult::Sequence(vec![0, 1])]);
    assert_eq!(cg1_results(&ab, 1, Fragment::EnumQx { m: 1 }), vec![FragmentResult::Sequence(vec![0])]);
    assert!(cg1_results(&ab, 2, Fragment::EnumQx { m: 3 }).is_empty());
    assert_eq!(
        cg1_results(&ab, 2, Fragment::MemberQx { target: StateId(1), m: 2 }),
        vec![FragmentResult::Member(true)]
    );
    assert_eq!(
        cg1_results(&ab, 3, Fragment::MemberQx { target: StateId(1), m: 1 }),
        vec![FragmentResult::Member(false)]
    );
    assert_eq!(cg1_results(&ab, 1, Fragment::CountNextQx { m: 1 }), vec![FragmentResult::Value(2)]);
    assert_eq!(cg1_results(&ab, 2, Fragment::CountNextQx { m: 2 }), vec![FragmentResult::Value(1)]);
    assert_eq!(cg1_results(&ab, 2, Fragment::CheckAnnot { m: 1 }), vec![FragmentResult::Passed]);
    let mut flipped = ab.clone();
    flipped.0[1].bit = true;
    assert!(cg1_results(&flipped, 2, Fragment::CheckAnnot { m: 1 }).is_empty());
}

#[test]
fn cg1_nsimul_needs_a_set_bit() {
    let x = AnnotatedWord::zip(&w1("abab"), &[false; 4]);
    assert!(cg1_results(&x, 4, Fragment::Nsimul).is_empty());
}

#[test]
fn cg1_explicit_machine_agrees_with_interpreter() {
    let b = build_cg1(&a1()).unwrap();
    let c = cg1::compile_explicit(&b, Limits::default()).unwrap();
    let symbols: Vec<AnnotatedSymbol> =
        a1().alphabet().symbols().flat_map(|input| [false, true].map(|bit| AnnotatedSymbol { input, bit })).collect();
    let mut words: Vec<Vec<AnnotatedSymbol>> = vec![vec![]];
    for len in 1..=4 {
        let prev: Vec<_> = words.iter().filter(|w| w.len() == len - 1).cloned().collect();
        for w in prev {
            for &s in &symbols {
                let mut v = w.clone();
                v.push(s);
                words.push(v);
            }
        }
    }
    assert_eq!(words.len(), 1 + 4 + 16 + 64 + 256);
    for x in words {
        let vm = decide(&b, &x, Limits::default()).unwrap();
        let tape: Vec<Symbol> = x.iter().map(|&s| annotated_index(s)).collect();
        assert_eq!(decide(&c.nfa, &tape, Limits::default()).unwrap(), vm, "{x:?}");
    }
}

#[test]
fn cg2_first_window_crossing_on_a2() {
    let b = build_cg2(&a2()).unwrap();
    let x = AnnotationSpec::cg2(&a2()).annotate(&[Symbol(0), Symbol(0)]);
    let got: BTreeSet<(u8, u8)> = cg2::run_fragment(&b, &x, 2, cg2::Fragment::NsimulT, Limits::default())
        .unwrap()
        .into_iter()
        .map(|(r, _)| match r {
            cg2::FragmentResult::Pair(p, q) => (p, q),
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(got, [(0, 0), (2, 0)].into());
}

#[test]
fn cg2_empty_input_verdict_comes_from_the_initial_size() {
    for a in std::iter::once(a2()).chain(random_2nfas(2, 6, 2, 2)) {
        let b = build_cg2(&a).unwrap();
        let norm = normalize_restart(&a);
        let want = tables::accepts_via_ltables(&norm, &[]);
        let o = cg2::decide_cg2(&b, &AnnotatedWord::default(), Limits::default()).unwrap();
        assert_eq!(o, if want { Outcome::ACCEPT } else { Outcome::REJECT });
        let s = tables::s_star(&norm.inner, &[], Letter::RightEnd, Limits::default()).unwrap();
        assert_eq!(want, s.contains(&(norm.restart, norm.inner.accept())));
    }
}

#[test]
fn cg2_explicit_machine_agrees_with_interpreter_for_one_state_sources() {
    for a in random_2nfas(9, 2, 1, 1) {
        let b = build_cg2(&a).unwrap();
        let c = cg2::compile_explicit(&b, Limits::default()).unwrap();
        for w in a.alphabet().words_up_to(3) {
            for mask in 0..(1u32 << w.len()) {
                let bits: Vec<bool> = (0..w.len()).map(|i| mask >> i & 1 == 1).collect();
                let x = AnnotatedWord::zip(&w, &bits);
                let vm = cg2::decide_cg2(&b, &x, Limits::default()).unwrap();
                let tape: Vec<Symbol> = x.0.iter().map(|&s| annotated_index(s)).collect();
                assert_eq!(decide(&c.nfa, &tape, Limits::default()).unwrap(), vm);
            }
        }
    }
}
