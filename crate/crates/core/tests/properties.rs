use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use svcomp::annot::AnnotationSpec;
use svcomp::automaton::{AnnotatedWord, Automaton, Letter, StateId, Symbol};
use svcomp::cg1::build_cg1;
use svcomp::cg2::build_cg2;
use svcomp::exec::{decide, Limits, Outcome};
use svcomp::format;
use svcomp::tables::{self, normalize_restart, Relation, StateSet};
use svcomp::verify::{oracle_membership, random_1nfa, random_2nfa};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn word(max_len: usize, sigma: u16) -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec((0..sigma).prop_map(Symbol), 0..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn relation_encoding_is_a_bijection(n in 1usize..=5, bits in prop::collection::vec(any::<bool>(), 25)) {
        let bits = &bits[..n * n];
        let r = tables::decode_rel(bits, n).unwrap();
        prop_assert_eq!(tables::encode_rel(&r, n), bits.to_vec());
        prop_assert_eq!(tables::decode_rel(&tables::encode_rel(&r, n), n).unwrap(), r);
        let s: StateSet = tables::decode_set(&bits[..n], n).unwrap();
        prop_assert_eq!(tables::encode_set(&s, n), bits[..n].to_vec());
    }

    #[test]
    fn wrong_lengths_are_rejected(n in 1usize..=4, extra in 1usize..3) {
        prop_assert!(tables::decode_rel(&vec![false; n * n + extra], n).is_err());
        prop_assert!(tables::decode_set(&vec![false; n + extra], n).is_err());
    }

    #[test]
    fn table_update_matches_search(seed in any::<u64>(), n in 1usize..=3, u in word(4, 2), s in 0u16..2) {
        let a = random_2nfa(&mut rng(seed), n, 2);
        let t = tables::ltable(&a, &u, Limits::default()).unwrap();
        let mut us = u.clone();
        us.push(Symbol(s));
        prop_assert_eq!(tables::update_ltable(&t, Symbol(s), &a), tables::ltable(&a, &us, Limits::default()).unwrap());
    }

    #[test]
    fn crossing_sequences_grow_then_stabilize(seed in any::<u64>(), n in 1usize..=3, u in word(3, 2), s in 0u16..3) {
        let a = random_2nfa(&mut rng(seed), n, 2);
        let tau = if s == 2 { Letter::RightEnd } else { Letter::Sym(Symbol(s)) };
        let t = tables::ltable(&a, &u, Limits::default()).unwrap();
        let cutoff = tables::s_star_cutoff(n);
        let mut prev = Relation::new();
        for k in 0..=cutoff + 3 {
            let cur = tables::s_from_table(&a, &t, tau, k);
            prop_assert!(prev.is_subset(&cur));
            if k > cutoff {
                prop_assert_eq!(&cur, &prev);
            }
            prev = cur;
        }
        let id: Relation = (0..n).map(|p| (StateId(p), StateId(p))).collect();
        prop_assert_eq!(tables::t_from_table(&a, &t, tau, 0), id);
    }

    #[test]
    fn restart_row_is_the_first_visit_set(seed in any::<u64>(), n in 1usize..=3, u in word(4, 2)) {
        let a = random_2nfa(&mut rng(seed), n, 2);
        let norm = normalize_restart(&a);
        let t = tables::ltable(&norm.inner, &u, Limits::default()).unwrap();
        let row: StateSet = t.iter().filter(|p| p.0 == norm.restart).map(|p| p.1).collect();
        prop_assert_eq!(row, tables::qx_2nfa(&a, &u, Limits::default()).unwrap());
        prop_assert!(t.iter().all(|p| p.1 != norm.restart));
    }

    #[test]
    fn tables_decide_membership(seed in any::<u64>(), n in 1usize..=3, w in word(6, 2)) {
        let a = random_2nfa(&mut rng(seed), n, 2);
        let norm = normalize_restart(&a);
        prop_assert_eq!(tables::accepts_via_ltables(&norm, &w), decide(&a, &w, Limits::default()).unwrap().accept_path);
    }

    #[test]
    fn annotation_is_unique_and_prefix_coherent(seed in any::<u64>(), n in 1usize..=2, w in word(12, 2), flip in any::<prop::sample::Index>()) {
        let a = random_2nfa(&mut rng(seed), n, 2);
        let spec = AnnotationSpec::cg2(&a);
        let x = spec.annotate(&w);
        prop_assert!(spec.is_well_annotated(&x));
        let bs = spec.block_size;
        let whole = w.len() / bs * bs;
        prop_assert_eq!(&spec.track(&w)[..whole], &spec.track(&w[..whole])[..]);
        if !w.is_empty() {
            let mut y = x.clone();
            let i = flip.index(w.len());
            y.0[i].bit = !y.0[i].bit;
            prop_assert!(!spec.is_well_annotated(&y));
        }
    }

    #[test]
    fn format_round_trips(seed in any::<u64>(), n in 1usize..=4, two_way in any::<bool>()) {
        let a = if two_way {
            Automaton::TwoWay(random_2nfa(&mut rng(seed), n, 3))
        } else {
            Automaton::OneWay(random_1nfa(&mut rng(seed), n, 3))
        };
        prop_assert_eq!(format::parse(&format::serialize(&a)).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn cg1_decides_annotated_words(seed in any::<u64>(), n in 1usize..=3, w in word(7, 2), noise in prop::collection::vec(any::<bool>(), 7)) {
        let a = random_1nfa(&mut rng(seed), n, 2);
        let b = build_cg1(&a).unwrap();
        let spec = AnnotationSpec::cg1(&a);
        let member = oracle_membership(&Automaton::OneWay(a.clone()), &w, Limits::default()).unwrap();
        let o = decide(&b, &spec.annotate(&w).0, Limits::default()).unwrap();
        prop_assert_eq!(o, if member { Outcome::ACCEPT } else { Outcome::REJECT });
        let y = AnnotatedWord::zip(&w, &noise[..w.len()]);
        if !spec.is_well_annotated(&y) {
            prop_assert_eq!(decide(&b, &y.0, Limits::default()).unwrap(), Outcome::NEITHER);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn cg2_decides_annotated_words(seed in any::<u64>(), w in word(5, 2), noise in prop::collection::vec(any::<bool>(), 5)) {
        let a = random_2nfa(&mut rng(seed), 1, 2);
        let b = build_cg2(&a).unwrap();
        let spec = AnnotationSpec::cg2(&a);
        let member = decide(&a, &w, Limits::default()).unwrap().accept_path;
        let o = decide(&b, &spec.annotate(&w).0, Limits::default()).unwrap();
        prop_assert_eq!(o, if member { Outcome::ACCEPT } else { Outcome::REJECT });
        let y = AnnotatedWord::zip(&w, &noise[..w.len()]);
        if !spec.is_well_annotated(&y) {
            prop_assert_eq!(decide(&b, &y.0, Limits::default()).unwrap(), Outcome::NEITHER);
        }
    }
}
