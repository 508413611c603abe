use alloc::format;
use alloc::vec::Vec;

use thiserror::Error;

use crate::annot::{AnnotatedDecl, AnnotatedSignature};
use crate::engine::{bigstep, smallstep_closure, EngineError};
use crate::potential::{phi_ground, phi_subst, phi_value, Context, PotentialError};
use crate::rational::Rational;
use crate::terms::{apply_subst, basic_terms, Substitution, Term, TermError, Trs};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SoundnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// `Φ(σ:Γ) + p − Φ(v:A) < m` for a start term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityViolation {
    pub term: Term,
    pub decl: AnnotatedDecl,
    pub phi_args: Rational,
    pub phi_value: Rational,
    pub steps: u64,
}

/// A small step whose ground potential drops by less than its cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepViolation {
    pub term: Term,
    pub decl: AnnotatedDecl,
    /// 1-based position in the trace.
    pub step: usize,
    pub cost: u64,
    pub before: Rational,
    pub after: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SoundnessReport {
    pub size_bound: usize,
    /// Basic terms enumerated.
    pub terms: usize,
    /// Of those, the ones whose evaluation got stuck; they are skipped.
    pub stuck: usize,
    /// (term, declaration) pairs checked.
    pub checks: usize,
    /// Checks where the inequality holds with equality.
    pub tight: usize,
    pub step_checks: usize,
    pub violations: Vec<InequalityViolation>,
    pub step_violations: Vec<StepViolation>,
}

impl SoundnessReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty() && self.step_violations.is_empty()
    }
}

/// Sweeps every basic term of size at most `size_bound` and every
/// declaration of its root: the big-step inequality
/// `Φ(σ:Γ) + p − Φ(v:A) ≥ m`, and along the small-step trace a drop of the
/// ground potential by at least the cost of each step.
pub fn check_soundness_inequality(
    trs: &Trs,
    sig: &AnnotatedSignature,
    size_bound: usize,
    fuel: u64,
) -> Result<SoundnessReport, SoundnessError> {
    let mut rep = SoundnessReport {
        size_bound,
        ..SoundnessReport::default()
    };
    for t in basic_terms(&trs.signature, size_bound) {
        rep.terms += 1;
        let f = t.root().expect("basic terms are applications").clone();
        let decl_shape = &trs.signature.defined()[&f.name];
        let mut sigma = Substitution::new();
        let mut xs = Vec::new();
        for (i, (a, ty)) in t.args().iter().zip(&decl_shape.args).enumerate() {
            let name = format!("x{}", i + 1);
            xs.push(Term::var(&name, ty));
            sigma = sigma.with(&name, a.clone());
        }
        let start = Term::App(f.clone(), xs.clone());
        let big = match bigstep(trs, &sigma, &start, fuel) {
            Ok(r) => r,
            Err(EngineError::Stuck { .. }) => {
                rep.stuck += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let trace = smallstep_closure(trs, &sigma, &start, fuel)?;
        let substs = trace.substs();
        for decl in sig.decls(&f.name) {
            rep.checks += 1;
            let ctx: Context = xs
                .iter()
                .zip(&decl.args)
                .map(|(x, a)| match x {
                    Term::Var(v) => (v.name.clone(), a.clone()),
                    Term::App(..) => unreachable!(),
                })
                .collect();
            let phi_args = phi_subst(sig, &sigma, &ctx)?;
            let phi_v = phi_value(sig, &big.value, &decl.result)?;
            let lhs = &phi_args + &decl.cost - &phi_v;
            let m = Rational::from_integer(big.count.into());
            if lhs < m {
                rep.violations.push(InequalityViolation {
                    term: t.clone(),
                    decl: decl.clone(),
                    phi_args,
                    phi_value: phi_v,
                    steps: big.count,
                });
            } else if lhs == m {
                rep.tight += 1;
            }

            let mut before = phi_ground(sig, &apply_subst(&start, &substs[0])?, &decl.result)?;
            for (i, s) in trace.steps.iter().enumerate() {
                rep.step_checks += 1;
                let after = phi_ground(sig, &apply_subst(&s.term, &substs[i + 1])?, &decl.result)?;
                if &before - &after < Rational::from_integer(s.cost.into()) {
                    rep.step_violations.push(StepViolation {
                        term: t.clone(),
                        decl: decl.clone(),
                        step: i + 1,
                        cost: s.cost,
                        before: before.clone(),
                        after: after.clone(),
                    });
                }
                before = after;
            }
        }
    }
    Ok(rep)
}
