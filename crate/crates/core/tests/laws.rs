use heaplogic::algebra::{
    apply_join, apply_split, cancel, distribute, equiv, invert, join_rule, normalize, split_rule,
    NormalForm,
};
use heaplogic::env::Env;
use heaplogic::graph::build_graph;
use heaplogic::term::{parse_heap, HeapTerm, Heaplet};
use proptest::prelude::*;

const NAMES: &[&str] = &["a", "b", "c", "d", "e"];

fn heaplet() -> impl Strategy<Value = Heaplet> {
    (0..NAMES.len(), 0..NAMES.len()).prop_map(|(s, t)| Heaplet::simple(NAMES[s], NAMES[t]))
}

fn chain(max: usize) -> impl Strategy<Value = HeapTerm> {
    prop::collection::vec(heaplet(), 1..=max)
        .prop_map(|hs| HeapTerm::conj_all(hs.into_iter().map(HeapTerm::from)))
}

fn term() -> impl Strategy<Value = HeapTerm> {
    heaplet()
        .prop_map(HeapTerm::from)
        .prop_recursive(3, 8, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| HeapTerm::conj(l, r)),
                (inner.clone(), inner).prop_map(|(l, r)| HeapTerm::disj(l, r)),
            ]
        })
}

fn nf(t: &HeapTerm) -> NormalForm {
    normalize(t, &Env::default()).unwrap()
}

use HeapTerm as T;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn conj_is_associative_and_commutative(a in term(), b in term(), c in term()) {
        let left = T::conj(T::conj(a.clone(), b.clone()), c.clone());
        let right = T::conj(a.clone(), T::conj(b.clone(), c));
        prop_assert_eq!(nf(&left), nf(&right));
        prop_assert_eq!(nf(&T::conj(a.clone(), b.clone())), nf(&T::conj(b, a)));
    }

    #[test]
    fn disj_is_associative_and_commutative(a in term(), b in term(), c in term()) {
        let left = T::disj(T::disj(a.clone(), b.clone()), c.clone());
        let right = T::disj(a.clone(), T::disj(b.clone(), c));
        prop_assert_eq!(nf(&left), nf(&right));
        prop_assert_eq!(nf(&T::disj(a.clone(), b.clone())), nf(&T::disj(b, a)));
    }

    #[test]
    fn build_outcome_survives_reassociation(hs in prop::collection::vec(heaplet(), 1..=8)) {
        let items: Vec<T> = hs.into_iter().map(T::from).collect();
        let left = T::conj_all(items.clone());
        let right = items.into_iter().rev().reduce(|acc, x| T::conj(x, acc)).unwrap();
        let env = Env::default();
        let (l, r) = (build_graph(&left, &env), build_graph(&right, &env));
        prop_assert_eq!(l.is_ok(), r.is_ok());
        if let (Ok(l), Ok(r)) = (l, r) {
            prop_assert_eq!(l, r);
        }
    }

    #[test]
    fn emp_is_the_identity(a in term()) {
        prop_assert_eq!(nf(&T::conj(T::Emp, a.clone())), nf(&a));
        prop_assert_eq!(nf(&T::conj(a.clone(), T::Emp)), nf(&a));
    }

    #[test]
    fn heap_times_its_inverse_is_emp(h in chain(8)) {
        prop_assert!(nf(&T::conj(h.clone(), invert(&h))).is_emp());
        prop_assert_eq!(cancel(&T::conj(h.clone(), invert(&h))).unwrap(), T::Emp);
    }

    #[test]
    fn invert_is_a_homomorphism(a in term(), b in term()) {
        prop_assert_eq!(invert(&T::conj(a.clone(), b.clone())), T::conj(invert(&a), invert(&b)));
        prop_assert_eq!(invert(&T::disj(a.clone(), b.clone())), T::disj(invert(&a), invert(&b)));
        prop_assert_eq!(invert(&invert(&a)), a);
    }

    #[test]
    fn conj_distributes_over_disj(a in term(), b in term(), c in term()) {
        let bc = T::disj(b.clone(), c.clone());
        prop_assert_eq!(
            nf(&T::conj(a.clone(), bc.clone())),
            nf(&T::disj(T::conj(a.clone(), b.clone()), T::conj(a.clone(), c.clone())))
        );
        prop_assert_eq!(
            nf(&T::conj(bc, a.clone())),
            nf(&T::disj(T::conj(b, a.clone()), T::conj(c, a)))
        );
    }

    #[test]
    fn distribute_preserves_the_normal_form(t in term()) {
        prop_assert_eq!(nf(&distribute(&t).unwrap()), nf(&t));
    }

    #[test]
    fn normalization_is_idempotent(t in term()) {
        let once = nf(&t);
        prop_assert_eq!(nf(&once.to_term()), once.clone());
        prop_assert!(equiv(&t, &once.to_term(), &Env::default()).unwrap());
    }

    #[test]
    fn print_parse_round_trip(t in term()) {
        let inv = T::conj(t.clone(), T::inv(t.clone()));
        for x in [t, inv] {
            prop_assert_eq!(parse_heap(&x.to_string()).unwrap(), x);
        }
    }

    #[test]
    fn join_and_split_compose(u in chain(3), b in heaplet(), c in heaplet()) {
        let env = Env::default();
        if let (Ok(joined), Ok(split)) =
            (join_rule(&u, &b, &c, &env), split_rule(&u, &b, &c, &env))
        {
            let sjs = apply_split(&apply_join(&apply_split(&joined, &env).unwrap(), &env).unwrap(), &env).unwrap();
            prop_assert_eq!(nf(&sjs), nf(&split));
            let jsj = apply_join(&apply_split(&apply_join(&split, &env).unwrap(), &env).unwrap(), &env).unwrap();
            prop_assert_eq!(nf(&jsj), nf(&joined));
        }
    }
}
