//! Typed polynomial interpretations read off a well-typing: every
//! declaration `⟨A1 × … × An → C, p⟩` becomes `γ(f, C)(x1, …, xn) = x1 + … + xn + p`.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::annot::{AnnotError, AnnotatedSignature, AnnotatedType, ConstructorScheme, ResourceVec};
use crate::engine::{rewrite_step, EngineError, Strategy};
use crate::potential::{phi_subst, Context, PotentialError};
use crate::rational::{render, Rational};
use crate::terms::{apply_subst, basic_terms, Enumerator, Name, Substitution, Term, TermError, Trs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("no interpretation of `{symbol}` at result annotation {result}")]
    Missing { symbol: Name, result: ResourceVec },
    #[error("`{0}` is not ground")]
    NotGround(alloc::string::String),
    #[error(transparent)]
    Annot(#[from] AnnotError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// `γ(f, C)`: the argument types it is evaluated at and its constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Affine {
    pub symbol: Name,
    pub args: Vec<AnnotatedType>,
    pub result: AnnotatedType,
    pub constant: Rational,
}

impl Affine {
    pub fn apply(&self, xs: &[Rational]) -> Rational {
        xs.iter().fold(self.constant.clone(), |acc, x| acc + x)
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "γ({}, {})(", self.symbol, self.result)?;
        for i in 1..=self.args.len() {
            write!(f, "{}x{i}", if i == 1 { "" } else { ", " })?;
        }
        f.write_str(") = ")?;
        for i in 1..=self.args.len() {
            write!(f, "x{i} + ")?;
        }
        f.write_str(&render(&self.constant))
    }
}

/// Affine maps for every defined declaration; constructors are read from
/// their schemes at whatever annotation is requested.
#[derive(Clone, Debug)]
pub struct Interpretation {
    defined: BTreeMap<Name, Vec<Affine>>,
    schemes: BTreeMap<Name, ConstructorScheme>,
}

pub fn derive_interpretation(sig: &AnnotatedSignature) -> Interpretation {
    let defined = sig
        .all_decls()
        .iter()
        .map(|(f, ds)| {
            let maps = ds
                .iter()
                .map(|d| Affine {
                    symbol: f.clone(),
                    args: d.args.clone(),
                    result: d.result.clone(),
                    constant: d.cost.clone(),
                })
                .collect();
            (f.clone(), maps)
        })
        .collect();
    Interpretation {
        defined,
        schemes: sig.schemes().clone(),
    }
}

impl Interpretation {
    /// The table for defined symbols, one entry per declaration.
    pub fn entries(&self) -> impl Iterator<Item = &Affine> {
        self.defined.values().flatten()
    }

    /// `γ(f, C)` at `result`. A defined symbol without an entry at exactly
    /// `result` uses its cheapest entry whose result dominates it.
    pub fn gamma(&self, f: &Name, result: &ResourceVec) -> Result<Affine, InterpError> {
        if let Some(s) = self.schemes.get(f) {
            let d = s.instantiate(result)?;
            return Ok(Affine {
                symbol: f.clone(),
                args: d.args,
                result: d.result,
                constant: d.cost,
            });
        }
        let missing = || InterpError::Missing {
            symbol: f.clone(),
            result: result.clone(),
        };
        let entries = self.defined.get(f).ok_or_else(missing)?;
        if let Some(e) = entries.iter().find(|e| &e.result.annot == result) {
            return Ok(e.clone());
        }
        entries
            .iter()
            .filter(|e| result.leq(&e.result.annot))
            .min_by(|a, b| a.constant.cmp(&b.constant))
            .cloned()
            .ok_or_else(missing)
    }
}

/// `⟦f(t1, …, tn) : C⟧ = γ(f, C)(⟦t1 : A1⟧, …, ⟦tn : An⟧)`.
pub fn interpret_ground(t: &Term, at: &AnnotatedType, interp: &Interpretation) -> Result<Rational, InterpError> {
    let Term::App(f, args) = t else {
        return Err(InterpError::NotGround(t.to_string()));
    };
    let g = interp.gamma(&f.name, &at.annot)?;
    let xs = args
        .iter()
        .zip(&g.args)
        .map(|(a, ty)| interpret_ground(a, ty, interp))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(g.apply(&xs))
}

/// A rule instance `lσ → rσ` that is not strictly decreasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleViolation {
    pub rule: usize,
    pub at: AnnotatedType,
    pub sigma: Substitution,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// An innermost step `t → u` with `⟦t⟧ ≤ ⟦u⟧`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepViolation {
    pub start: Term,
    pub at: AnnotatedType,
    pub from: Term,
    pub to: Term,
    pub before: Rational,
    pub after: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrientationReport {
    /// Substitution values range over sizes up to this bound.
    pub subst_bound: usize,
    /// Start terms range over sizes up to this bound.
    pub term_bound: usize,
    pub rule_checks: usize,
    pub step_checks: usize,
    pub rule_violations: Vec<RuleViolation>,
    pub step_violations: Vec<StepViolation>,
}

impl OrientationReport {
    pub fn passes(&self) -> bool {
        self.rule_violations.is_empty() && self.step_violations.is_empty()
    }
}

fn substitutions(en: &mut Enumerator<'_>, l: &Term, bound: usize) -> Vec<Substitution> {
    let vars = l.vars();
    let types: Vec<_> = vars.iter().map(|v| v.ty.clone()).collect();
    let pools: Vec<Vec<Term>> = types.iter().map(|t| en.values_up_to(t, bound)).collect();
    let mut out = alloc::vec![Substitution::new()];
    for (v, pool) in vars.iter().zip(pools) {
        let mut next = Vec::with_capacity(out.len() * pool.len());
        for s in &out {
            for val in &pool {
                next.push(s.clone().with(v.name.as_str(), val.clone()));
            }
        }
        out = next;
    }
    out
}

/// Checks `⟦lσ⟧ > ⟦rσ⟧` for every rule, every declaration of its root and
/// every substitution with values of size at most `subst_bound`; then
/// follows the innermost derivation of every basic term of size at most
/// `term_bound` and checks strict decrease at each step.
pub fn check_orientation(
    trs: &Trs,
    sig: &AnnotatedSignature,
    subst_bound: usize,
    term_bound: usize,
    fuel: u64,
) -> Result<OrientationReport, InterpError> {
    let interp = derive_interpretation(sig);
    let mut rep = OrientationReport {
        subst_bound,
        term_bound,
        ..OrientationReport::default()
    };
    let mut en = Enumerator::new(&trs.signature);
    for rule in trs.rules() {
        let sigmas = substitutions(&mut en, &rule.lhs, subst_bound);
        for d in sig.decls(&rule.root().name) {
            for s in &sigmas {
                rep.rule_checks += 1;
                let lhs = interpret_ground(&apply_subst(&rule.lhs, s)?, &d.result, &interp)?;
                let rhs = interpret_ground(&apply_subst(&rule.rhs, s)?, &d.result, &interp)?;
                if lhs <= rhs {
                    rep.rule_violations.push(RuleViolation {
                        rule: rule.index,
                        at: d.result.clone(),
                        sigma: s.clone(),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    for t in basic_terms(&trs.signature, term_bound) {
        let f = &t.root().expect("basic").name;
        for d in sig.decls(f) {
            let mut cur = t.clone();
            let mut before = interpret_ground(&cur, &d.result, &interp)?;
            let mut steps = 0u64;
            while let Some(step) = rewrite_step(trs, &cur, Strategy::LeftmostInnermost) {
                if steps == fuel {
                    return Err(EngineError::DivergenceSuspected { partial: steps }.into());
                }
                steps += 1;
                rep.step_checks += 1;
                let after = interpret_ground(&step.result, &d.result, &interp)?;
                if after >= before {
                    rep.step_violations.push(StepViolation {
                        start: t.clone(),
                        at: d.result.clone(),
                        from: cur.clone(),
                        to: step.result.clone(),
                        before: before.clone(),
                        after: after.clone(),
                    });
                }
                cur = step.result;
                before = after;
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRow {
    pub n: usize,
    pub rc: u64,
    /// `max` over basic terms of size `≤ n` of `min` over declarations of
    /// `Φ(σ:Γ) + p`; `None` if some start term has no declaration.
    pub bound: Option<Rational>,
    pub rc_witness: Option<Term>,
    pub bound_witness: Option<Term>,
}

impl BoundRow {
    pub fn holds(&self) -> bool {
        self.bound
            .as_ref()
            .is_some_and(|b| Rational::from_integer(self.rc.into()) <= *b)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(BoundRow::holds)
    }
}

/// The potential bound of a basic term: the least `Φ(σ:Γ) + p` over the
/// declarations of its root.
pub fn term_bound(sig: &AnnotatedSignature, t: &Term) -> Result<Option<Rational>, InterpError> {
    let Term::App(f, args) = t else {
        return Err(InterpError::NotGround(t.to_string()));
    };
    let mut best: Option<Rational> = None;
    for d in sig.decls(&f.name) {
        let mut sigma = Substitution::new();
        let mut ctx = Context::new();
        for (i, (a, ty)) in args.iter().zip(&d.args).enumerate() {
            let x = alloc::format!("x{}", i + 1);
            sigma = sigma.with(&x, a.clone());
            ctx.insert(Name::new(&x), ty.clone());
        }
        let b = phi_subst(sig, &sigma, &ctx)? + &d.cost;
        if best.as_ref().is_none_or(|c| b < *c) {
            best = Some(b);
        }
    }
    Ok(best)
}

/// Compares `rc(n)` with the potential bound for `n = 0, …, n_max`.
pub fn bound_report(trs: &Trs, sig: &AnnotatedSignature, n_max: usize, fuel: u64) -> Result<BoundReport, InterpError> {
    let terms = basic_terms(&trs.signature, n_max);
    let mut rows = Vec::with_capacity(n_max + 1);
    let mut row = BoundRow {
        n: 0,
        rc: 0,
        bound: Some(Rational::zero()),
        rc_witness: None,
        bound_witness: None,
    };
    let mut it = terms.iter().peekable();
    for n in 0..=n_max {
        row.n = n;
        while let Some(t) = it.next_if(|t| t.size() <= n) {
            let mut cur = t.clone();
            let mut dh = 0u64;
            while let Some(step) = rewrite_step(trs, &cur, Strategy::LeftmostInnermost) {
                if dh == fuel {
                    return Err(EngineError::DivergenceSuspected { partial: dh }.into());
                }
                dh += 1;
                cur = step.result;
            }
            if row.rc_witness.is_none() || dh > row.rc {
                row.rc = dh;
                row.rc_witness = Some(t.clone());
            }
            match (term_bound(sig, t)?, &row.bound) {
                (None, _) => row.bound = None,
                (Some(b), Some(cur)) if row.bound_witness.is_none() || b > *cur => {
                    row.bound = Some(b);
                    row.bound_witness = Some(t.clone());
                }
                _ => {}
            }
        }
        rows.push(row.clone());
    }
    Ok(BoundReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annot::fixtures::*;
    use crate::annot::Preset;
    use crate::engine::{rc_oracle, DEFAULT_FUEL};
    use crate::potential::phi_ground;
    use crate::rational::int;
    use crate::terms::fixtures::*;
    use alloc::vec;

    #[test]
    fn table_matches_declarations() {
        let sig = queue_annotated();
        let i = derive_interpretation(&sig);
        assert_eq!(i.entries().count(), 7);
        let snoc = i.gamma(&Name::new("snoc"), &ResourceVec::from_ints(&[0, 1])).unwrap();
        assert_eq!(snoc.to_string(), "γ(snoc, Queue[0 1])(x1, x2) = x1 + x2 + 5");
        assert_eq!(snoc.apply(&[int(2), int(3)]), int(10));
        let cons = i.gamma(&Name::new("cons"), &ResourceVec::from_ints(&[4])).unwrap();
        assert_eq!(cons.constant, int(4));
        let zero = i.gamma(&Name::new("zero"), &ResourceVec::from_ints(&[1, 1])).unwrap_err();
        assert!(matches!(zero, InterpError::Annot(AnnotError::DegreeExceeded { .. })));
        let zero = i.gamma(&Name::new("zero"), &ResourceVec::from_ints(&[])).unwrap();
        assert!(zero.constant.is_zero());
        let q = i.gamma(&Name::new("queue"), &ResourceVec::from_ints(&[0, 1])).unwrap();
        assert_eq!(q.to_string(), "γ(queue, Queue[0 1])(x1, x2) = x1 + x2 + 0");
    }

    #[test]
    fn all_zero_signature() {
        let mut sig = AnnotatedSignature::new(queue_signature());
        for c in ["zero", "errorHead", "nil", "errorTail", "s", "cons", "queue"] {
            sig.set_preset(c, Preset::Zero, 1).unwrap();
        }
        sig.add_decl("rev", decl(&[ty(list(), &[])], ty(list(), &[]), 0)).unwrap();
        let i = derive_interpretation(&sig);
        assert!(i.entries().all(|e| e.constant.is_zero()));
    }

    #[test]
    fn checkf_valuation() {
        let sig = queue_annotated();
        let i = derive_interpretation(&sig);
        let b = B(&sig.simple);
        for n in 0..5 {
            let r = b.list(&vec![0; n]);
            let t = b.f("checkF", vec![b.f("queue", vec![b.c("nil"), r.clone()])]);
            let lhs = interpret_ground(&t, &ty(queue(), &[0, 1]), &i).unwrap();
            let rr = interpret_ground(&r, &ty(list(), &[1]), &i).unwrap();
            assert_eq!(rr, int(n as i64));
            assert_eq!(lhs, rr + int(3));
        }
    }

    #[test]
    fn agrees_with_potential() {
        let sig = queue_annotated();
        let i = derive_interpretation(&sig);
        let mut en = Enumerator::new(&sig.simple);
        for (base, annots) in [
            (queue(), vec![vec![0, 1], vec![]]),
            (list(), vec![vec![], vec![1]]),
            (nat(), vec![vec![], vec![6]]),
        ] {
            for t in en.ground_up_to(&base, 6) {
                for a in &annots {
                    let at = ty(base.clone(), a);
                    match (interpret_ground(&t, &at, &i), phi_ground(&sig, &t, &at)) {
                        (Ok(x), Ok(y)) => assert_eq!(x, y, "{t} : {at}"),
                        (Err(_), Err(_)) => {}
                        (x, y) => panic!("{t} : {at}: {x:?} vs {y:?}"),
                    }
                }
            }
        }
    }

    #[test]
    fn queue_orientation() {
        let rep = check_orientation(&queue_trs(), &queue_annotated(), 4, 6, DEFAULT_FUEL).unwrap();
        assert!(rep.passes(), "{:?} {:?}", rep.rule_violations.first(), rep.step_violations.first());
        assert!(rep.rule_checks > 100 && rep.step_checks > 100);
    }

    #[test]
    fn weak_signature_breaks_orientation() {
        let mut sig = queue_annotated();
        sig.set_preset("cons", Preset::Zero, 1).unwrap();
        let rep = check_orientation(&queue_trs(), &sig, 3, 3, DEFAULT_FUEL).unwrap();
        assert!(rep.rule_violations.iter().any(|v| v.rule == 5));
    }

    #[test]
    fn queue_bounds() {
        let trs = queue_trs();
        let rep = bound_report(&trs, &queue_annotated(), 6, DEFAULT_FUEL).unwrap();
        assert!(rep.passes());
        assert_eq!(rep.rows[0].bound, Some(int(0)));
        assert_eq!(rep.rows[0].rc, 0);
        for row in &rep.rows {
            assert_eq!(row.rc, rc_oracle(&trs, row.n, DEFAULT_FUEL).unwrap().value);
            let want = match row.n {
                0 | 1 => 0,
                2 => 4,
                n => 6 * (n as i64 - 2) + 1,
            };
            assert_eq!(row.bound, Some(int(want)), "n = {}", row.n);
        }
        assert_eq!(rep.rows[3].rc, 7);
    }

    #[test]
    fn quadratic_reverse() {
        let trs = queue_trs();
        let mut sig = AnnotatedSignature::new(trs.signature.clone());
        for c in ["zero", "errorHead", "nil"] {
            sig.set_preset(c, Preset::Zero, 2).unwrap();
        }
        sig.set_preset("errorTail", Preset::Zero, 2).unwrap();
        sig.set_preset("s", Preset::Shift, 2).unwrap();
        sig.set_preset("cons", Preset::Shift, 2).unwrap();
        sig.set_preset("queue", Preset::Interleave, 4).unwrap();
        sig.add_decl("rev'", decl(&[ty(list(), &[1, 1]), ty(list(), &[])], ty(list(), &[]), 1)).unwrap();
        let rep = crate::typecheck::check_trs(&trs, &sig);
        assert!(rep.verdicts.iter().filter(|v| v.symbol.as_str() == "rev'").all(|v| v.is_well_typed()));
        let b = B(&trs.signature);
        let mut prev = int(0);
        for n in 0..6 {
            let t = b.f("rev'", vec![b.list(&vec![0; n]), b.c("nil")]);
            let bound = term_bound(&sig, &t).unwrap().unwrap();
            assert_eq!(bound, int(1 + n as i64 + (n * n.saturating_sub(1) / 2) as i64));
            assert!(crate::engine::dheight(&trs, &t, DEFAULT_FUEL).unwrap() as i64 <= n as i64 + 1);
            assert!(bound >= prev);
            prev = bound;
        }
    }
}
