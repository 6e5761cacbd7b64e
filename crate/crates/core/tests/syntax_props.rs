mod common;

use common::*;
use manyval_core::syntax::{match_formula, parse_formula, Formula, Substitution};
use proptest::prelude::*;

/// Depth of `f` under `s` computed without building the instance.
fn depth_under(f: &Formula, s: &Substitution) -> usize {
    match f {
        Formula::Var(x) => s.get(*x).map_or(0, |g| g.depth()),
        Formula::App(_, args) if args.is_empty() => 0,
        Formula::App(_, args) => 1 + args.iter().map(|a| depth_under(a, s)).max().unwrap(),
    }
}

fn depth_law(f: &Formula, s: &Substitution) -> usize {
    f.vars()
        .into_iter()
        .map(|x| f.max_var_depth(x).unwrap() + s.get(x).map_or(0, |g| g.depth()))
        .fold(f.depth(), usize::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn round_trip_prefix_and_sugar(
        (name, f) in prop_oneof![Just("ipc"), Just("kcalc"), Just("impbot"), Just("modal"), Just("neq")]
            .prop_flat_map(|n| (Just(n), formula(&sig(n), 3, 5)))
    ) {
        let s = sig(name);
        let plain = f.display(&s).to_string();
        prop_assert_eq!(parse_formula(&plain, &s).unwrap(), f.clone());
        let sugared = f.display_sugared(&s).to_string();
        prop_assert_eq!(parse_formula(&sugared, &s).unwrap(), f);
    }

    #[test]
    fn substitution_composes(
        f in formula(&sig("ipc"), 3, 4),
        s in substitution(&sig("ipc"), 3, 2),
        t in substitution(&sig("ipc"), 3, 2),
    ) {
        prop_assert_eq!(f.substitute(&s).substitute(&t), f.substitute(&s.compose(&t)));
    }

    #[test]
    fn depth_law_matches_recursion(
        f in formula(&sig("kcalc"), 3, 5),
        s in substitution(&sig("kcalc"), 3, 3),
    ) {
        let inst = f.substitute(&s);
        prop_assert_eq!(inst.depth(), depth_under(&f, &s));
        prop_assert_eq!(inst.depth(), depth_law(&f, &s));
    }

    #[test]
    fn matching_an_instance_succeeds(
        p in formula(&sig("ipc"), 3, 3),
        s in substitution(&sig("ipc"), 3, 2),
    ) {
        let target = p.substitute(&s);
        let found = match_formula(&p, &target);
        prop_assert!(found.is_some());
        prop_assert_eq!(p.substitute(&found.unwrap()), target);
    }

    #[test]
    fn matches_are_sound(p in formula(&sig("impbot"), 2, 3), target in formula(&sig("impbot"), 2, 4)) {
        if let Some(s) = match_formula(&p, &target) {
            prop_assert_eq!(p.substitute(&s), target);
        }
    }
}
