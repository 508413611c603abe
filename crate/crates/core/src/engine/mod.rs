//! Instrumented operational semantics: innermost rewriting, big-step and
//! small-step evaluation with step counters, derivation height and the
//! runtime-complexity oracle.

use alloc::vec::Vec;

use thiserror::Error;

use crate::terms::{basic_terms, match_pattern, Name, Rule, Substitution, Term, TermError, Trs};

mod bigstep;
mod smallstep;

pub use bigstep::{bigstep, BigStepResult};
pub use smallstep::{smallstep_closure, SmallStep, SmallStepTrace};

pub const DEFAULT_FUEL: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[default]
    LeftmostInnermost,
    RightmostInnermost,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("stuck after {partial} steps: no rule applies to `{term}`")]
    Stuck { term: Term, partial: u64 },
    #[error("divergence suspected: fuel exhausted after {partial} steps")]
    DivergenceSuspected { partial: u64 },
    #[error("substitution is not normalised at `{0}`")]
    NotNormalised(Name),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// One innermost rewrite step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    /// 1-based index of the applied rule.
    pub rule: usize,
    /// Argument path from the root to the contracted redex.
    pub position: Vec<usize>,
    pub result: Term,
}

/// Locates the innermost redex chosen by `strategy`: a defined symbol applied
/// to values that matches some rule.
pub fn find_redex<'a>(
    trs: &'a Trs,
    t: &Term,
    strategy: Strategy,
) -> Option<(Vec<usize>, &'a Rule, Substitution)> {
    let mut path = Vec::new();
    let (rule, s) = find_in(trs, t, strategy, &mut path)?;
    path.reverse();
    Some((path, rule, s))
}

fn find_in<'a>(
    trs: &'a Trs,
    t: &Term,
    strategy: Strategy,
    path: &mut Vec<usize>,
) -> Option<(&'a Rule, Substitution)> {
    let Term::App(f, args) = t else {
        return None;
    };
    let order: Vec<usize> = match strategy {
        Strategy::LeftmostInnermost => (0..args.len()).collect(),
        Strategy::RightmostInnermost => (0..args.len()).rev().collect(),
    };
    for i in order {
        if let Some(hit) = find_in(trs, &args[i], strategy, path) {
            path.push(i);
            return Some(hit);
        }
    }
    if f.is_defined() && args.iter().all(Term::is_value) {
        return find_rule(trs, t);
    }
    None
}

/// First rule, in listing order, whose left-hand side matches `t`.
pub fn find_rule<'a>(trs: &'a Trs, t: &Term) -> Option<(&'a Rule, Substitution)> {
    let f = t.root()?;
    trs.rules_for(&f.name)
        .find_map(|r| match_pattern(&r.lhs, t).map(|s| (r, s)))
}

fn replace_at(t: &Term, path: &[usize], new: Term) -> Term {
    match path.split_first() {
        None => new,
        Some((&i, rest)) => match t {
            Term::App(f, args) => {
                let mut out = args[..i].to_vec();
                out.push(replace_at(&args[i], rest, new));
                out.extend_from_slice(&args[i + 1..]);
                Term::App(f.clone(), out)
            }
            Term::Var(_) => unreachable!("paths only descend through applications"),
        },
    }
}

/// Contracts the innermost redex selected by `strategy`; `None` on normal
/// forms.
pub fn rewrite_step(trs: &Trs, t: &Term, strategy: Strategy) -> Option<Step> {
    let (position, rule, s) = find_redex(trs, t, strategy)?;
    let contractum = crate::terms::apply_subst(&rule.rhs, &s).expect("Var(rhs) ⊆ Var(lhs)");
    Some(Step {
        rule: rule.index,
        result: replace_at(t, &position, contractum),
        position,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalised {
    pub term: Term,
    pub steps: u64,
}

/// Rewrites `t` to normal form, counting steps.
pub fn normalise(trs: &Trs, t: &Term, strategy: Strategy, fuel: u64) -> Result<Normalised, EngineError> {
    let mut cur = t.clone();
    let mut steps = 0u64;
    while let Some(step) = rewrite_step(trs, &cur, strategy) {
        if steps == fuel {
            return Err(EngineError::DivergenceSuspected { partial: steps });
        }
        steps += 1;
        cur = step.result;
    }
    Ok(Normalised { term: cur, steps })
}

/// Number of innermost steps from `t` to its normal form.
pub fn dheight(trs: &Trs, t: &Term, fuel: u64) -> Result<u64, EngineError> {
    normalise(trs, t, Strategy::LeftmostInnermost, fuel).map(|n| n.steps)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RcResult {
    pub value: u64,
    pub witness: Option<Term>,
}

/// `rc(n)`: the maximal derivation height over basic terms of size at most
/// `n`, with the first maximising term in enumeration order.
pub fn rc_oracle(trs: &Trs, n: usize, fuel: u64) -> Result<RcResult, EngineError> {
    let mut best = RcResult {
        value: 0,
        witness: None,
    };
    for t in basic_terms(&trs.signature, n) {
        let dh = dheight(trs, &t, fuel)?;
        if best.witness.is_none() || dh > best.value {
            best = RcResult {
                value: dh,
                witness: Some(t),
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::fixtures::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn single_steps() {
        let trs = queue_trs();
        let b = B(&trs.signature);
        let step = rewrite_step(&trs, &b.f("enq", vec![b.c("zero")]), Strategy::default()).unwrap();
        assert_eq!(step.result.to_string(), "queue(nil, nil)");
        assert_eq!(step.rule, 7);

        let q = b.f("queue", vec![b.c("nil"), b.c("nil")]);
        let step = rewrite_step(&trs, &b.f("snoc", vec![q.clone(), b.c("zero")]), Strategy::default()).unwrap();
        assert_eq!(step.result.to_string(), "checkF(queue(nil, cons(zero, nil)))");
        assert_eq!(step.rule, 4);

        assert!(rewrite_step(&trs, &q, Strategy::default()).is_none());
    }

    #[test]
    fn derivation_heights() {
        let trs = queue_trs();
        let b = B(&trs.signature);
        assert_eq!(dheight(&trs, &b.f("enq", vec![b.c("zero")]), DEFAULT_FUEL).unwrap(), 1);
        assert_eq!(dheight(&trs, &b.f("enq", vec![b.num(1)]), DEFAULT_FUEL).unwrap(), 7);
        let q = b.f("queue", vec![b.c("nil"), b.c("nil")]);
        assert_eq!(dheight(&trs, &q, DEFAULT_FUEL).unwrap(), 0);
    }

    #[test]
    fn innermost_order() {
        let trs = queue_trs();
        let b = B(&trs.signature);
        let t = b.f(
            "rev'",
            vec![b.f("rev", vec![b.c("nil")]), b.f("rev", vec![b.list(&[0])])],
        );
        let li = rewrite_step(&trs, &t, Strategy::LeftmostInnermost).unwrap();
        assert_eq!(li.position, vec![0]);
        let ri = rewrite_step(&trs, &t, Strategy::RightmostInnermost).unwrap();
        assert_eq!(ri.position, vec![1]);
    }

    #[test]
    fn fuel_exhaustion_is_reported() {
        let trs = queue_trs();
        let b = B(&trs.signature);
        let err = dheight(&trs, &b.f("enq", vec![b.num(1)]), 3).unwrap_err();
        assert_eq!(err, EngineError::DivergenceSuspected { partial: 3 });
    }

    #[test]
    fn rc_small() {
        let trs = queue_trs();
        assert_eq!(rc_oracle(&trs, 0, DEFAULT_FUEL).unwrap().value, 0);
        assert_eq!(rc_oracle(&trs, 1, DEFAULT_FUEL).unwrap().value, 0);
        let two = rc_oracle(&trs, 2, DEFAULT_FUEL).unwrap();
        assert_eq!(two.value, 2);
        assert_eq!(two.witness.unwrap().to_string(), "rev(nil)");
        let three = rc_oracle(&trs, 3, DEFAULT_FUEL).unwrap();
        assert_eq!(three.value, 7);
        assert_eq!(three.witness.unwrap().to_string(), "enq(s(zero))");
    }
}
