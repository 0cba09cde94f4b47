use heaplogic::algebra::{detect_repetition, normalize};
use heaplogic::env::{check_repetition_stack, compare_denotation, unfold, RepetitionVerdict};
use heaplogic::term::{parse_heap, parse_term};
use heaplogic::workspace::{load, Workspace};

const DECLS: &str = "
class A { f1, g1, g2 }
obj a : A;
pred p(o) := true(o);
pred tree(l) := nil \\/ exists x, y: l |-> (left: x, right: y) * tree(x) * tree(y);
pred twice(o) := o |-> z * o |-> z;
";

fn ws() -> Workspace {
    load(DECLS).unwrap()
}

/// Binary trees of height at most `h`.
fn trees(h: usize) -> usize {
    if h == 0 {
        1
    } else {
        1 + trees(h - 1).pow(2)
    }
}

#[test]
fn tree_unfolding_enumerates_bounded_trees() {
    let ws = ws();
    let call = parse_heap("tree(l)").unwrap();
    for depth in 0..4 {
        let out = unfold(&call, &ws.env, depth).unwrap();
        assert_eq!(out.alternatives.len(), trees(depth), "depth {depth}");
        for alt in &out.alternatives {
            assert_eq!(detect_repetition(alt), None, "{alt}");
            assert!(normalize(alt, &ws.env).unwrap().satisfiable, "{alt}");
        }
    }
}

#[test]
fn partial_specifications_compare_by_denotation() {
    let ws = ws();
    let same = |x: &str, y: &str| {
        compare_denotation(&parse_term(x).unwrap(), &parse_term(y).unwrap(), &ws.env, 4).unwrap()
    };
    let full = "a.f1 * a.g1 * a.g2";
    assert!(same("a.f1 |-> x * true(a)", full));
    assert!(same("true(a) * a.f1 |-> x", full));
    assert!(!same("true(a) * a.f1 |-> x", "p(a) * a.f1 |-> x"));
    assert!(same("true(a) * true(a)", "a.f1 * a.g1 * a.g2 * emp(a)"));
}

#[test]
fn repetition_across_predicate_boundaries() {
    let ws = ws();
    let verdict = |s: &str| check_repetition_stack(&parse_term(s).unwrap(), &ws.env, 4).unwrap();
    assert!(matches!(
        verdict("twice(r)"),
        RepetitionVerdict::Witness { .. }
    ));
    assert!(matches!(
        verdict("r |-> q * tree(r)"),
        RepetitionVerdict::Witness { .. }
    ));
    assert_eq!(verdict("tree(r)"), RepetitionVerdict::Clean);
}
