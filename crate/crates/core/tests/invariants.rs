//! Invariants checked on every reachable configuration.

use svcomp::annot::AnnotationSpec;
use svcomp::automaton::fixtures::{a1, a2};
use svcomp::automaton::{AnnotatedWord, OneWayNfa, Symbol, TwoWayNfa};
use svcomp::cg1::{self, build_cg1};
use svcomp::cg2::{self, build_cg2};
use svcomp::exec::{decide, reachable_configs, Limits};
use svcomp::tables::{ltable, normalize_restart, qx_1nfa};
use svcomp::verify::{random_1nfas, random_2nfas};

fn all_tracks(w: &[Symbol]) -> Vec<AnnotatedWord> {
    (0..1u32 << w.len())
        .map(|mask| AnnotatedWord::zip(w, &(0..w.len()).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>()))
        .collect()
}

/// Whether every complete block ending before `pos` carries its true
/// annotation.
fn blocks_correct(spec: &AnnotationSpec, x: &AnnotatedWord, pos: usize) -> bool {
    let bs = spec.block_size;
    let w = x.input();
    let good = spec.track(&w);
    let done = (pos - 1) / bs * bs;
    x.bits()[..done] == good[..done]
}

fn check_cg1(a: &OneWayNfa, max_len: usize) {
    let b = build_cg1(a).unwrap();
    let spec = AnnotationSpec::cg1(a);
    let n = a.n();
    for w in a.alphabet().words_up_to(max_len) {
        for x in all_tracks(&w) {
            let o = decide(&b, &x.0, Limits::default()).unwrap();
            assert!(!(o.accept_path && o.reject_path));
            for c in reachable_configs(&b, &x.0, Limits::default()).unwrap() {
                let s = c.state;
                if matches!(s.ctl, cg1::Ctl::Acc | cg1::Ctl::Rej | cg1::Ctl::Abort | cg1::Ctl::Halt) {
                    continue;
                }
                assert_eq!(s.posmod as usize, (c.pos + n - 1) % n, "{s:?} at {}", c.pos);
                assert!((s.dist as usize) < 2 * n);
                if s.ctl == cg1::Ctl::Drive {
                    assert_eq!(s.m as usize, qx_1nfa(a, &w[..c.pos - 1]).len());
                    assert!(blocks_correct(&spec, &x, c.pos));
                }
            }
        }
    }
}

#[test]
fn cg1_counts_and_positions() {
    check_cg1(&a1(), 6);
    for a in random_1nfas(21, 6, 3, 2) {
        check_cg1(&a, 4);
    }
}

fn check_cg2(a: &TwoWayNfa, xs: Vec<AnnotatedWord>) {
    let b = build_cg2(a).unwrap();
    let norm = normalize_restart(a);
    let spec = AnnotationSpec::cg2(a);
    let nb = b.block_size();
    for x in xs {
        let w = x.input();
        let o = decide(&b, &x.0, Limits::default()).unwrap();
        assert!(!(o.accept_path && o.reject_path));
        for c in reachable_configs(&b, &x.0, Limits::default()).unwrap() {
            let s = c.state;
            if matches!(s.ctl, cg2::Ctl::Acc | cg2::Ctl::Rej | cg2::Ctl::Abort | cg2::Ctl::Halt) {
                continue;
            }
            let hp = s.hp as usize;
            assert!(hp < 2 * nb);
            if hp >= nb {
                assert_eq!((hp - nb) % nb, (c.pos + nb - 1) % nb, "{s:?} at {}", c.pos);
            }
            if matches!(s.ctl, cg2::Ctl::NsDirect | cg2::Ctl::NsScan | cg2::Ctl::NsWalk) {
                assert!(hp <= nb + s.i as usize);
            }
            if s.ctl == cg2::Ctl::Drive {
                assert_eq!(s.m as usize, ltable(&norm.inner, &w[..c.pos - 1], Limits::default()).unwrap().len());
                assert!(blocks_correct(&spec, &x, c.pos));
            }
        }
    }
}

#[test]
fn cg2_counts_and_window() {
    let mut sources = vec![a2()];
    sources.extend(random_2nfas(23, 4, 2, 2));
    for a in &sources {
        let xs = a.alphabet().words_up_to(3).iter().flat_map(|w| all_tracks(w)).collect();
        check_cg2(a, xs);
    }
    let spec = AnnotationSpec::cg2(&a2());
    let w = vec![Symbol(0); 10];
    let good = spec.annotate(&w);
    let mut xs = vec![good.clone()];
    for i in [0, 4, 6, 9] {
        let mut y = good.clone();
        y.0[i].bit = !y.0[i].bit;
        xs.push(y);
    }
    check_cg2(&a2(), xs);
}
