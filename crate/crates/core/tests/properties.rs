use amortise_core::annot::{AnnotatedDecl, AnnotatedSignature, AnnotatedType, ResourceVec};
use amortise_core::constraints::{solve_feasible, solve_minimize, ConstraintSystem, LinExpr, Optimum, Rel, Solution};
use amortise_core::engine::{dheight, normalise, Strategy, DEFAULT_FUEL};
use amortise_core::interp::{derive_interpretation, interpret_ground};
use amortise_core::rational::{int, ratio};
use amortise_core::syntax::{parse_sig, parse_trs, print_sig, print_trs};
use amortise_core::terms::{apply_subst, basic_terms, check_structure, match_pattern, Enumerator, Substitution, Term, Trs};
use amortise_core::Rational;
use proptest::prelude::*;

const QUEUE_TRS: &str = include_str!("../../cli/fixtures/queue.trs");
const QUEUE_SIG: &str = include_str!("../../cli/fixtures/queue.sig");

fn queue() -> (Trs, AnnotatedSignature) {
    let trs = parse_trs(QUEUE_TRS).unwrap();
    let sig = parse_sig(QUEUE_SIG, &trs.signature).unwrap();
    (trs, sig)
}

fn value_pool(trs: &Trs, max: usize) -> Vec<Term> {
    let mut en = Enumerator::new(&trs.signature);
    trs.signature.types().iter().flat_map(|t| en.values_up_to(t, max)).collect()
}

/// Replaces the subterms picked by `cut` with fresh variables, giving a
/// linear pattern that matches `t`.
fn abstract_term(trs: &Trs, t: &Term, cut: &mut impl Iterator<Item = bool>, next: &mut usize) -> Term {
    if cut.next().unwrap_or(false) {
        *next += 1;
        return Term::var(&format!("x{next}"), &trs.signature.type_of(t).unwrap());
    }
    match t {
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| abstract_term(trs, a, cut, next)).collect()),
        Term::Var(_) => t.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matching_inverts_instantiation(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), cut in prop::collection::vec(any::<bool>(), 0..16)) {
        let (trs, _) = queue();
        let pool = value_pool(&trs, 7);
        let subject = i.get(&pool);
        let pattern = abstract_term(&trs, subject, &mut cut.into_iter(), &mut 0);
        let s = match_pattern(&pattern, subject).expect("abstraction matches its source");
        prop_assert_eq!(&apply_subst(&pattern, &s).unwrap(), subject);

        let other = j.get(&pool);
        if let Some(s) = match_pattern(&pattern, other) {
            prop_assert_eq!(&apply_subst(&pattern, &s).unwrap(), other);
        }
    }

    #[test]
    fn instantiation_size(i in any::<prop::sample::Index>(), picks in prop::collection::vec(any::<prop::sample::Index>(), 8), cut in prop::collection::vec(any::<bool>(), 0..16)) {
        let (trs, _) = queue();
        let pool = value_pool(&trs, 6);
        let t = abstract_term(&trs, i.get(&pool), &mut cut.into_iter(), &mut 0);
        prop_assume!(t.is_linear());
        let mut en = Enumerator::new(&trs.signature);
        let mut s = Substitution::new();
        let mut extra = 0i64;
        for (v, p) in t.vars().iter().zip(&picks) {
            let vals = en.values_up_to(&v.ty, 5);
            let val = p.get(&vals).clone();
            extra += val.size() as i64 - 1;
            s = s.with(v.name.as_str(), val);
        }
        prop_assert_eq!(apply_subst(&t, &s).unwrap().size() as i64, t.size() as i64 + extra);
    }

    #[test]
    fn structure_check_ignores_rule_order(keys in prop::collection::vec(any::<u32>(), 12)) {
        let (trs, _) = queue();
        let mut perm: Vec<usize> = (0..12).collect();
        perm.sort_by_key(|&k| keys[k]);
        let rules: Vec<(Term, Term)> = perm.iter().map(|&k| (trs.rules()[k].lhs.clone(), trs.rules()[k].rhs.clone())).collect();
        let shuffled = Trs::new(trs.signature.clone(), rules).unwrap();
        let a = check_structure(&trs);
        let b = check_structure(&shuffled);
        prop_assert!(a.passes() && b.passes());
        prop_assert_eq!(a.overlaps.len(), b.overlaps.len());
    }

    #[test]
    fn solver_is_deterministic(rows in prop::collection::vec((prop::collection::vec(-3i64..4, 3), 0usize..3, -4i64..8), 1..6)) {
        let build = || {
            let mut sys = ConstraintSystem::new();
            let vars: Vec<LinExpr> = (0..3).map(|k| sys.fresh(format!("v{k}"))).collect();
            for (k, (coeffs, rel, b)) in rows.iter().enumerate() {
                let mut e = LinExpr::zero();
                for (v, c) in vars.iter().zip(coeffs) {
                    e.add_assign(&v.scale(&int(*c)));
                }
                sys.add(e, [Rel::Eq, Rel::Le, Rel::Ge][*rel], LinExpr::constant(ratio(*b, 2)), format!("row {k}"));
            }
            (sys, LinExpr::sum(vars.iter()))
        };
        let (s1, obj) = build();
        let (s2, _) = build();
        match (solve_feasible(&s1), solve_feasible(&s2)) {
            (Solution::Feasible(a), Solution::Feasible(b)) => {
                prop_assert!(s1.validate(&a));
                prop_assert_eq!(a, b);
            }
            (Solution::Infeasible(a), Solution::Infeasible(b)) => {
                prop_assert!(a.verify(&s1));
                prop_assert_eq!(a.provenance(&s1), b.provenance(&s2));
            }
            _ => prop_assert!(false, "verdicts differ"),
        }
        if let (Optimum::Optimal { assignment: a, .. }, Optimum::Optimal { assignment: b, .. }) = (solve_minimize(&s1, &obj), solve_minimize(&s2, &obj)) {
            prop_assert!(s1.validate(&a));
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn signatures_round_trip(entries in prop::collection::vec((0i64..9, 1i64..4), 7 * 4)) {
        let (trs, base) = queue();
        let mut sig = AnnotatedSignature::new(trs.signature.clone());
        for s in base.schemes().values() {
            sig.set_scheme(s.clone()).unwrap();
        }
        let mut it = entries.into_iter().map(|(n, d)| ratio(n, d));
        let mut pick = |len: usize| ResourceVec::new((0..len).map(|_| it.next().unwrap_or_else(|| int(0))).collect()).unwrap();
        for (f, d) in trs.signature.defined_symbols() {
            let args = d.args.iter().map(|a| AnnotatedType::new(a.clone(), pick(1))).collect();
            let result = AnnotatedType::new(d.result.clone(), pick(2));
            let cost = pick(1).first();
            sig.add_decl(f.name.as_str(), AnnotatedDecl { args, result, cost }).unwrap();
        }
        let text = print_sig(&sig);
        let back = parse_sig(&text, &trs.signature).unwrap();
        prop_assert_eq!(back.all_decls(), sig.all_decls());
        prop_assert_eq!(print_sig(&back), text);
    }
}

#[test]
fn canonical_trs_fixture() {
    assert_eq!(print_trs(&queue().0), QUEUE_TRS);
}

#[test]
fn basic_and_value_are_exclusive() {
    let (trs, _) = queue();
    let mut en = Enumerator::new(&trs.signature);
    let mut seen = 0;
    for t in trs.signature.types().iter().flat_map(|ty| en.ground_up_to(ty, 6)) {
        seen += 1;
        assert!(!(t.is_basic() && t.is_value()), "{t}");
    }
    assert!(seen > 1000);
}

#[test]
fn innermost_strategies_agree() {
    let (trs, _) = queue();
    for t in basic_terms(&trs.signature, 7) {
        let li = normalise(&trs, &t, Strategy::LeftmostInnermost, DEFAULT_FUEL).unwrap();
        let ri = normalise(&trs, &t, Strategy::RightmostInnermost, DEFAULT_FUEL).unwrap();
        assert_eq!(li, ri, "{t}");
    }
}

#[test]
fn interpretation_bounds_derivations() {
    let (trs, sig) = queue();
    let interp = derive_interpretation(&sig);
    for t in basic_terms(&trs.signature, 7) {
        let f = &t.root().unwrap().name;
        let dh = Rational::from_integer(dheight(&trs, &t, DEFAULT_FUEL).unwrap().into());
        for d in sig.decls(f) {
            assert!(dh <= interpret_ground(&t, &d.result, &interp).unwrap(), "{t} at {}", d.result);
        }
    }
}
