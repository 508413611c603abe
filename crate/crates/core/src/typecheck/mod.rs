//! The annotated type system in algorithmic form. Typing judgements compile
//! to linear constraint systems; checking a concrete signature and inferring
//! one from a degree template share the same constraint generator.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::annot::{AnnotError, AnnotatedDecl, AnnotatedSignature, AnnotatedType, ConstructorScheme, ResourceVec};
use crate::constraints::{solve_feasible, Assignment, ConstraintSystem, LinExpr, Solution};
use crate::rational::Rational;
use crate::terms::{BaseType, Name, Rule, Term, Trs};

mod infer;
mod soundness;

pub use infer::{infer, DegreeTemplate, InferOptions, InferOutcome, Objective};
pub use soundness::{check_soundness_inequality, InequalityViolation, SoundnessError, SoundnessReport, StepViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error(transparent)]
    Annot(#[from] AnnotError),
    #[error("`{term}` has simple type {found}, expected {expected}")]
    Mismatch {
        term: String,
        expected: BaseType,
        found: BaseType,
    },
    #[error("pattern `{0}` is not a linear constructor term")]
    Pattern(String),
    #[error("variable `{0}` is not in the context")]
    Unbound(Name),
    #[error("call to `{0}` demands a non-constant annotation in check mode")]
    Symbolic(Name),
    #[error("degree must be at least 1")]
    ZeroDegree,
}

/// An annotation vector whose entries may mention unknowns. Missing
/// trailing entries read as zero.
pub type SymVec = Vec<LinExpr>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymType {
    pub base: BaseType,
    pub annot: SymVec,
}

impl SymType {
    pub fn concrete(t: &AnnotatedType) -> Self {
        SymType {
            base: t.base.clone(),
            annot: t.annot.entries().iter().cloned().map(LinExpr::constant).collect(),
        }
    }

    /// `len` fresh unknowns named `origin[1]`, `origin[2]`, ….
    pub fn fresh(sys: &mut ConstraintSystem, base: &BaseType, len: usize, origin: &str) -> Self {
        SymType {
            base: base.clone(),
            annot: (1..=len).map(|j| sys.fresh(format!("{origin}[{j}]"))).collect(),
        }
    }

    fn entry(&self, j: usize) -> LinExpr {
        self.annot.get(j).cloned().unwrap_or_default()
    }

    /// The concrete vector, if no entry mentions an unknown.
    pub fn as_constant(&self) -> Option<ResourceVec> {
        if !self.annot.iter().all(LinExpr::is_constant) {
            return None;
        }
        ResourceVec::new(self.annot.iter().map(|e| e.constant.clone()).collect()).ok()
    }

    pub fn eval(&self, a: &Assignment) -> Result<AnnotatedType, AnnotError> {
        let v = ResourceVec::new(self.annot.iter().map(|e| e.eval(a)).collect())?;
        Ok(AnnotatedType::new(self.base.clone(), v))
    }
}

/// A declaration `⟨A1 × … × An → C, p⟩` over possibly unknown annotations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymDecl {
    pub args: Vec<SymType>,
    pub result: SymType,
    pub cost: LinExpr,
}

impl From<&AnnotatedDecl> for SymDecl {
    fn from(d: &AnnotatedDecl) -> Self {
        SymDecl {
            args: d.args.iter().map(SymType::concrete).collect(),
            result: SymType::concrete(&d.result),
            cost: LinExpr::constant(d.cost.clone()),
        }
    }
}

impl SymDecl {
    pub fn eval(&self, a: &Assignment) -> Result<AnnotatedDecl, AnnotError> {
        Ok(AnnotatedDecl {
            args: self.args.iter().map(|t| t.eval(a)).collect::<Result<_, _>>()?,
            result: self.result.eval(a)?,
            cost: self.cost.eval(a),
        })
    }
}

/// `Γ ⊢_p t : A`.
#[derive(Clone, Debug)]
pub struct Judgement {
    pub context: BTreeMap<Name, SymType>,
    pub budget: LinExpr,
    pub subject: Term,
    pub result: SymType,
}

/// The bindings `B_j` and cost `k` of the canonical derivation of a pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternTyping {
    pub bindings: BTreeMap<Name, SymType>,
    pub cost: LinExpr,
}

/// Where declarations for defined symbols come from during constraint
/// generation.
pub trait DeclSource {
    fn signature(&self) -> &AnnotatedSignature;

    /// The declaration serving a call of `f` whose result is demanded at
    /// `demand`; may emit constraints linking the two.
    fn call(
        &mut self,
        sys: &mut ConstraintSystem,
        f: &Name,
        demand: &SymType,
        prov: &str,
    ) -> Result<SymDecl, TypeError>;
}

/// Declarations drawn from a concrete signature via
/// [`AnnotatedSignature::select_decl`].
pub struct Fixed<'a>(pub &'a AnnotatedSignature);

impl DeclSource for Fixed<'_> {
    fn signature(&self) -> &AnnotatedSignature {
        self.0
    }

    fn call(&mut self, _: &mut ConstraintSystem, f: &Name, demand: &SymType, _: &str) -> Result<SymDecl, TypeError> {
        let want = demand.as_constant().ok_or_else(|| TypeError::Symbolic(f.clone()))?;
        Ok(SymDecl::from(self.0.select_decl(f, &want)?))
    }
}

/// `Σ_j result_j · basis(e_j)` with symbolic result entries. Entries past the
/// scheme's degree must vanish.
pub fn instantiate_scheme(
    sys: &mut ConstraintSystem,
    scheme: &ConstructorScheme,
    result: &SymType,
    prov: &str,
) -> Result<SymDecl, TypeError> {
    if scheme.decl.result != result.base {
        return Err(TypeError::Mismatch {
            term: scheme.symbol.to_string(),
            expected: result.base.clone(),
            found: scheme.decl.result.clone(),
        });
    }
    for e in result.annot.iter().skip(scheme.degree()) {
        if e.is_constant() {
            if !e.constant.is_zero() {
                return Err(AnnotError::DegreeExceeded {
                    symbol: scheme.symbol.clone(),
                    degree: scheme.degree(),
                    length: result.annot.len(),
                }
                .into());
            }
        } else {
            sys.eq(e.clone(), LinExpr::zero(), format!("{prov}: degree of {}", scheme.symbol));
        }
    }
    let n = scheme.decl.arity();
    let mut args: Vec<SymVec> = vec![Vec::new(); n];
    let mut cost = LinExpr::zero();
    for (e, b) in result.annot.iter().zip(&scheme.basis) {
        for (acc, u) in args.iter_mut().zip(&b.args) {
            if acc.len() < u.len() {
                acc.resize(u.len(), LinExpr::zero());
            }
            for (slot, c) in acc.iter_mut().zip(u.entries()) {
                slot.add_assign(&e.scale(c));
            }
        }
        cost.add_assign(&e.scale(&b.cost));
    }
    Ok(SymDecl {
        args: args
            .into_iter()
            .zip(&scheme.decl.args)
            .map(|(annot, base)| SymType {
                base: base.clone(),
                annot,
            })
            .collect(),
        result: result.clone(),
        cost,
    })
}

fn scheme_of<'s>(sig: &'s AnnotatedSignature, c: &Name) -> Result<&'s ConstructorScheme, TypeError> {
    sig.scheme(c).ok_or_else(|| AnnotError::MissingScheme(c.clone()).into())
}

/// Walks `pattern` top-down, instantiating each constructor at the
/// annotation reached and binding variables where the walk ends.
pub fn pattern_typing(
    sys: &mut ConstraintSystem,
    sig: &AnnotatedSignature,
    pattern: &Term,
    at: &SymType,
    prov: &str,
) -> Result<PatternTyping, TypeError> {
    let mut bindings = BTreeMap::new();
    let mut cost = LinExpr::zero();
    let mut stack = vec![(pattern, at.clone())];
    while let Some((t, at)) = stack.pop() {
        match t {
            Term::Var(v) => {
                if v.ty != at.base {
                    return Err(TypeError::Mismatch {
                        term: v.name.to_string(),
                        expected: at.base,
                        found: v.ty.clone(),
                    });
                }
                if bindings.insert(v.name.clone(), at).is_some() {
                    return Err(TypeError::Pattern(pattern.to_string()));
                }
            }
            Term::App(c, args) => {
                if !c.is_constructor() {
                    return Err(TypeError::Pattern(pattern.to_string()));
                }
                let d = instantiate_scheme(sys, scheme_of(sig, &c.name)?, &at, prov)?;
                cost.add_assign(&d.cost);
                stack.extend(args.iter().zip(d.args));
            }
        }
    }
    Ok(PatternTyping { bindings, cost })
}

struct RhsTyper<'a, 'b> {
    sys: &'a mut ConstraintSystem,
    src: &'a mut dyn DeclSource,
    prov: &'b str,
    occurrences: BTreeMap<Name, Vec<(usize, SymVec)>>,
    fresh: usize,
}

impl RhsTyper<'_, '_> {
    /// Emits constraints for `t : demand` and returns the cost it consumes.
    /// Each argument position stands for a fresh intermediate `$k`.
    fn term(&mut self, t: &Term, demand: &SymType) -> Result<LinExpr, TypeError> {
        let here = self.fresh;
        self.fresh += 1;
        match t {
            Term::Var(v) => {
                if v.ty != demand.base {
                    return Err(TypeError::Mismatch {
                        term: t.to_string(),
                        expected: demand.base.clone(),
                        found: v.ty.clone(),
                    });
                }
                self.occurrences
                    .entry(v.name.clone())
                    .or_default()
                    .push((here, demand.annot.clone()));
                Ok(LinExpr::zero())
            }
            Term::App(f, args) => {
                let prov = format!("{}: ${here} = {}", self.prov, f);
                let d = if f.is_constructor() {
                    let scheme = scheme_of(self.src.signature(), &f.name)?;
                    instantiate_scheme(self.sys, scheme, demand, &prov)?
                } else {
                    self.src.call(self.sys, &f.name, demand, &prov)?
                };
                if d.result.base != demand.base {
                    return Err(TypeError::Mismatch {
                        term: t.to_string(),
                        expected: demand.base.clone(),
                        found: d.result.base,
                    });
                }
                let mut cost = d.cost;
                for (a, ty) in args.iter().zip(&d.args) {
                    cost.add_assign(&self.term(a, ty)?);
                }
                Ok(cost)
            }
        }
    }
}

/// Emits the constraints of `Γ ⊢_p t : A`: the application rule through
/// fresh intermediates, one sharing split per variable occurrence with
/// subtyping slack at the leaves, weakening for unused variables, and
/// relaxation `p ≥ Σ costs`.
pub fn type_term(
    sys: &mut ConstraintSystem,
    src: &mut dyn DeclSource,
    j: &Judgement,
    prov: &str,
) -> Result<(), TypeError> {
    let found = src
        .signature()
        .simple
        .type_of(&j.subject)
        .map_err(|_| TypeError::Pattern(j.subject.to_string()))?;
    if found != j.result.base {
        return Err(TypeError::Mismatch {
            term: j.subject.to_string(),
            expected: j.result.base.clone(),
            found,
        });
    }
    let mut typer = RhsTyper {
        sys,
        src,
        prov,
        occurrences: BTreeMap::new(),
        fresh: 0,
    };
    let cost = typer.term(&j.subject, &j.result)?;
    let occurrences = core::mem::take(&mut typer.occurrences);
    for (x, occs) in occurrences {
        let avail = j.context.get(&x).ok_or_else(|| TypeError::Unbound(x.clone()))?;
        let width = occs.iter().map(|(_, d)| d.len()).chain([avail.annot.len()]).max().unwrap_or(0);
        let mut total: SymVec = vec![LinExpr::zero(); width];
        for (k, demand) in &occs {
            let split = SymType::fresh(sys, &avail.base, width, &format!("{prov}: ${k} ⊑ {x}"));
            for (i, s) in split.annot.iter().enumerate() {
                let d = demand.get(i).cloned().unwrap_or_default();
                sys.ge(s.clone(), d, format!("{prov}: subtype ${k} ⊑ {x}[{}]", i + 1));
                total[i].add_assign(s);
            }
        }
        for (i, t) in total.into_iter().enumerate() {
            sys.le(t, avail.entry(i), format!("{prov}: share {x}[{}]", i + 1));
        }
    }
    sys.ge(j.budget.clone(), cost, format!("{prov}: relax"));
    Ok(())
}

/// Emits everything for `rule` against `decl` and returns the budget
/// `p − 1 + Σ k_i` released by the left-hand side.
pub(crate) fn emit_rule(
    sys: &mut ConstraintSystem,
    src: &mut dyn DeclSource,
    rule: &Rule,
    decl: &SymDecl,
    prov: &str,
) -> Result<LinExpr, TypeError> {
    let mut context = BTreeMap::new();
    let mut budget = &decl.cost - &LinExpr::constant(Rational::one());
    for (l, a) in rule.lhs.args().iter().zip(&decl.args) {
        let pt = pattern_typing(sys, src.signature(), l, a, &format!("{prov}: pattern"))?;
        budget.add_assign(&pt.cost);
        for (x, ty) in pt.bindings {
            if context.insert(x, ty).is_some() {
                return Err(TypeError::Pattern(rule.lhs.to_string()));
            }
        }
    }
    let j = Judgement {
        context,
        budget: budget.clone(),
        subject: rule.rhs.clone(),
        result: decl.result.clone(),
    };
    type_term(sys, src, &j, prov)?;
    Ok(budget)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    WellTyped,
    /// The rhs does not fit the budget; the provenance lines of a Farkas
    /// certificate.
    Infeasible(Vec<String>),
    NegativeBudget(Rational),
    Error(TypeError),
}

#[derive(Clone, Debug)]
pub struct RuleVerdict {
    pub rule: usize,
    pub symbol: Name,
    pub decl: AnnotatedDecl,
    pub verdict: Verdict,
    pub system: ConstraintSystem,
    /// A satisfying assignment of the split unknowns, when well-typed.
    pub assignment: Option<Assignment>,
}

impl RuleVerdict {
    pub fn is_well_typed(&self) -> bool {
        self.verdict == Verdict::WellTyped
    }
}

/// Checks `⊢_{p − 1 + Σ k_i} r : C` for one rule against one declaration.
pub fn check_rule(rule: &Rule, decl: &AnnotatedDecl, sig: &AnnotatedSignature) -> RuleVerdict {
    let mut system = ConstraintSystem::new();
    let prov = format!("rule {}", rule.index);
    let emitted = emit_rule(&mut system, &mut Fixed(sig), rule, &SymDecl::from(decl), &prov);
    let mut assignment = None;
    let verdict = match emitted {
        Err(e) => Verdict::Error(e),
        Ok(b) if b.is_constant() && b.constant < Rational::zero() => Verdict::NegativeBudget(b.constant),
        Ok(_) => match solve_feasible(&system) {
            Solution::Feasible(a) => {
                assignment = Some(a);
                Verdict::WellTyped
            }
            Solution::Infeasible(cert) => {
                Verdict::Infeasible(cert.provenance(&system).into_iter().map(String::from).collect())
            }
        },
    };
    RuleVerdict {
        rule: rule.index,
        symbol: rule.root().name.clone(),
        decl: decl.clone(),
        verdict,
        system,
        assignment,
    }
}

#[derive(Clone, Debug, Default)]
pub struct TrsReport {
    pub verdicts: Vec<RuleVerdict>,
}

impl TrsReport {
    pub fn is_well_typed(&self) -> bool {
        self.verdicts.iter().all(RuleVerdict::is_well_typed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RuleVerdict> {
        self.verdicts.iter().filter(|v| !v.is_well_typed())
    }
}

/// Checks every rule against every declaration of its root.
pub fn check_trs(trs: &Trs, sig: &AnnotatedSignature) -> TrsReport {
    let mut verdicts = Vec::new();
    for rule in trs.rules() {
        for decl in sig.decls(&rule.root().name) {
            verdicts.push(check_rule(rule, decl, sig));
        }
    }
    TrsReport { verdicts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annot::fixtures::*;
    use crate::annot::Preset;
    use crate::rational::int;
    use crate::terms::fixtures::*;
    use proptest::prelude::*;

    fn ctx(entries: &[(&str, AnnotatedType)]) -> BTreeMap<Name, SymType> {
        entries.iter().map(|(x, t)| (Name::new(x), SymType::concrete(t))).collect()
    }

    fn judge(sig: &AnnotatedSignature, context: &[(&str, AnnotatedType)], budget: i64, t: Term, at: AnnotatedType) -> bool {
        let mut sys = ConstraintSystem::new();
        let j = Judgement {
            context: ctx(context),
            budget: LinExpr::constant(int(budget)),
            subject: t,
            result: SymType::concrete(&at),
        };
        type_term(&mut sys, &mut Fixed(sig), &j, "test").unwrap();
        matches!(solve_feasible(&sys), Solution::Feasible(_))
    }

    #[test]
    fn variable_subtyping() {
        let sig = queue_annotated();
        let x = Term::var("x", &nat());
        assert!(judge(&sig, &[("x", ty(nat(), &[3]))], 0, x.clone(), ty(nat(), &[2])));
        assert!(!judge(&sig, &[("x", ty(nat(), &[1]))], 0, x, ty(nat(), &[2])));
    }

    #[test]
    fn successor_releases_six() {
        let sig = queue_annotated();
        let b = B(&sig.simple);
        let n = Term::var("n", &nat());
        let t = b.f("s", vec![n]);
        assert!(judge(&sig, &[("n", ty(nat(), &[6]))], 6, t.clone(), ty(nat(), &[6])));
        assert!(!judge(&sig, &[("n", ty(nat(), &[6]))], 5, t, ty(nat(), &[6])));
    }

    #[test]
    fn snoc_of_enq() {
        let sig = queue_annotated();
        let b = B(&sig.simple);
        let (n1, n2) = (Term::var("n1", &nat()), Term::var("n2", &nat()));
        let t = b.f("snoc", vec![b.f("enq", vec![n1]), n2]);
        let c = [("n1", ty(nat(), &[6])), ("n2", ty(nat(), &[]))];
        assert!(judge(&sig, &c, 6, t.clone(), ty(queue(), &[0, 1])));
        assert!(!judge(&sig, &c, 5, t, ty(queue(), &[0, 1])));
    }

    #[test]
    fn shared_variable_splits() {
        let sig = queue_annotated();
        let b = B(&sig.simple);
        let n = Term::var("n", &nat());
        let t = b.f("snoc", vec![b.f("enq", vec![n.clone()]), n]);
        assert!(judge(&sig, &[("n", ty(nat(), &[6]))], 6, t.clone(), ty(queue(), &[0, 1])));
        let l = Term::var("l", &list());
        let pair = b.f("queue", vec![l.clone(), l]);
        assert!(judge(&sig, &[("l", ty(list(), &[3]))], 0, pair.clone(), ty(queue(), &[1, 2])));
        assert!(!judge(&sig, &[("l", ty(list(), &[2]))], 0, pair, ty(queue(), &[1, 2])));
    }

    #[test]
    fn patterns() {
        let sig = queue_annotated();
        let b = B(&sig.simple);
        let mut sys = ConstraintSystem::new();
        let r = Term::var("r", &list());
        let p = b.f("queue", vec![b.c("nil"), r]);
        let pt = pattern_typing(&mut sys, &sig, &p, &SymType::concrete(&ty(queue(), &[0, 1])), "p").unwrap();
        assert_eq!(pt.bindings[&Name::new("r")].as_constant().unwrap(), ResourceVec::from_ints(&[1]));
        assert!(pt.cost.is_zero());

        let p = b.f("cons", vec![Term::var("x", &nat()), Term::var("xs", &list())]);
        let pt = pattern_typing(&mut sys, &sig, &p, &SymType::concrete(&ty(list(), &[4])), "p").unwrap();
        assert_eq!(pt.bindings[&Name::new("x")].as_constant().unwrap(), ResourceVec::zero());
        assert_eq!(pt.bindings[&Name::new("xs")].as_constant().unwrap(), ResourceVec::from_ints(&[4]));
        assert_eq!(pt.cost, LinExpr::constant(int(4)));

        let x = Term::var("x", &nat());
        let pt = pattern_typing(&mut sys, &sig, &x, &SymType::concrete(&ty(nat(), &[2])), "p").unwrap();
        assert_eq!(pt.bindings.len(), 1);
        assert!(pt.cost.is_zero());

        let err = pattern_typing(&mut sys, &sig, &p, &SymType::concrete(&ty(list(), &[1, 1])), "p");
        assert!(matches!(err, Err(TypeError::Annot(AnnotError::DegreeExceeded { .. }))));
        assert!(sys.constraints().is_empty());
    }

    #[test]
    fn queue_rules_well_typed() {
        let trs = queue_trs();
        let sig = queue_annotated();
        let rep = check_trs(&trs, &sig);
        assert_eq!(rep.verdicts.len(), 12);
        for v in &rep.verdicts {
            assert!(v.is_well_typed(), "rule {}: {:?}", v.rule, v.verdict);
            assert!(v.system.validate(v.assignment.as_ref().unwrap()));
        }
    }

    fn with_snoc_cost(cost: i64) -> AnnotatedSignature {
        let mut sig = AnnotatedSignature::new(queue_signature());
        let full = queue_annotated();
        for s in full.schemes().values() {
            sig.set_scheme(s.clone()).unwrap();
        }
        for (f, ds) in full.all_decls() {
            for d in ds {
                let mut d = d.clone();
                if f.as_str() == "snoc" {
                    d.cost = int(cost);
                }
                sig.add_decl(f.as_str(), d).unwrap();
            }
        }
        sig
    }

    #[test]
    fn cheap_snoc_rejected() {
        let trs = queue_trs();
        let rep = check_trs(&trs, &with_snoc_cost(0));
        let bad: Vec<_> = rep.failures().map(|v| v.rule).collect();
        assert_eq!(bad, vec![4]);
        assert_eq!(rep.failures().next().unwrap().verdict, Verdict::NegativeBudget(int(-1)));

        let rep = check_trs(&trs, &with_snoc_cost(4));
        let bad: Vec<_> = rep.failures().collect();
        assert_eq!(bad.len(), 1);
        let Verdict::Infeasible(lines) = &bad[0].verdict else { panic!("{:?}", bad[0].verdict) };
        assert!(lines.iter().any(|l| l.contains("rule 4") && l.contains("relax")));
    }

    #[test]
    fn empty_trs_vacuous() {
        let trs = Trs::new(queue_signature(), vec![]).unwrap();
        assert!(check_trs(&trs, &queue_annotated()).is_well_typed());
    }

    #[test]
    fn zero_cons_cannot_pay_recursion() {
        let trs = queue_trs();
        let mut sig = queue_annotated();
        sig.set_preset("cons", Preset::Zero, 1).unwrap();
        let rep = check_trs(&trs, &sig);
        let r5 = rep.verdicts.iter().find(|v| v.rule == 5).unwrap();
        assert!(matches!(r5.verdict, Verdict::Infeasible(_)));
    }

    proptest! {
        #[test]
        fn budgets_are_monotone(extra in 0i64..4, rule in 1usize..=12) {
            let trs = queue_trs();
            let sig = queue_annotated();
            let r = trs.rule(rule).unwrap();
            let decl = sig.decls(&r.root().name)[0].clone();
            prop_assume!(check_rule(r, &decl, &sig).is_well_typed());
            let mut more = decl.clone();
            more.cost += int(extra);
            prop_assert!(check_rule(r, &more, &sig).is_well_typed());
        }
    }
}
