use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{find_rule, EngineError};
use crate::terms::{Name, Substitution, Term, TermError, Trs, Var};

/// One transition `⟨t, σ⟩ →^cost ⟨term, σ ⊎ delta⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallStep {
    pub term: Term,
    pub delta: Substitution,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallStepTrace {
    pub start: Term,
    pub initial: Substitution,
    pub steps: Vec<SmallStep>,
    pub total: u64,
}

impl SmallStepTrace {
    pub fn last_term(&self) -> &Term {
        self.steps.last().map_or(&self.start, |s| &s.term)
    }

    /// The substitution reached after all steps.
    pub fn final_subst(&self) -> Substitution {
        self.substs().pop().expect("at least the initial substitution")
    }

    /// The substitution before the first step and after each step.
    pub fn substs(&self) -> Vec<Substitution> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut cur = self.initial.clone();
        out.push(cur.clone());
        for s in &self.steps {
            cur = cur.union(&s.delta).expect("deltas bind fresh names only");
            out.push(cur.clone());
        }
        out
    }
}

enum Outcome {
    Value,
    Stepped(Term, Vec<(Name, Term)>, u64),
}

struct Machine<'a> {
    trs: &'a Trs,
    sigma: Substitution,
    fresh: usize,
}

impl Machine<'_> {
    fn lookup(&self, x: &Var) -> Result<Term, EngineError> {
        self.sigma
            .get(&x.name)
            .cloned()
            .ok_or_else(|| TermError::Unbound(x.name.clone()).into())
    }

    fn fresh_name(&mut self, base: Option<&str>) -> Name {
        self.fresh += 1;
        let mut s = String::from(base.unwrap_or(""));
        s.push_str(&format!("${}", self.fresh));
        Name::new(&s)
    }

    fn step(&mut self, t: &Term, partial: u64) -> Result<Outcome, EngineError> {
        let (f, args) = match t {
            Term::Var(x) => return Ok(Outcome::Stepped(self.lookup(x)?, Vec::new(), 0)),
            Term::App(f, args) => (f, args),
        };
        if f.is_constructor() && args.is_empty() {
            return Ok(Outcome::Value);
        }
        if args.iter().all(Term::is_var) {
            let vals = args
                .iter()
                .map(|a| match a {
                    Term::Var(x) => self.lookup(x),
                    Term::App(..) => unreachable!(),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let instance = Term::App(f.clone(), vals);
            if f.is_constructor() {
                return Ok(Outcome::Stepped(instance, Vec::new(), 0));
            }
            let Some((rule, tau)) = find_rule(self.trs, &instance) else {
                return Err(EngineError::Stuck {
                    term: instance,
                    partial,
                });
            };
            self.fresh += 1;
            let suffix = format!("${}", self.fresh);
            let delta = tau
                .iter()
                .map(|(k, v)| {
                    let mut name = String::from(k.as_str());
                    name.push_str(&suffix);
                    (Name::new(&name), v.clone())
                })
                .collect();
            return Ok(Outcome::Stepped(rule.rhs.rename(&suffix), delta, 1));
        }
        for (i, a) in args.iter().enumerate() {
            if let Outcome::Stepped(u, delta, cost) = self.step(a, partial)? {
                let mut args = args.clone();
                args[i] = u;
                return Ok(Outcome::Stepped(Term::App(f.clone(), args), delta, cost));
            }
        }
        if f.is_constructor() {
            return Ok(Outcome::Value);
        }
        let decl = self
            .trs
            .signature
            .decl(f)
            .ok_or_else(|| EngineError::from(TermError::UnknownSymbol(f.name.clone())))?;
        let mut delta = Vec::with_capacity(args.len());
        let mut vars = Vec::with_capacity(args.len());
        for (v, ty) in args.iter().zip(&decl.args) {
            let name = self.fresh_name(None);
            vars.push(Term::Var(Var {
                name: name.clone(),
                ty: ty.clone(),
            }));
            delta.push((name, v.clone()));
        }
        Ok(Outcome::Stepped(Term::App(f.clone(), vars), delta, 0))
    }
}

/// Applies small-step transitions from `⟨t, σ⟩` until a value is reached.
///
/// Variables resolve at cost 0, constructors on variables resolve at cost 0,
/// a defined symbol on values is frozen into fresh variables at cost 0, a
/// defined symbol on variables applies its rule at cost 1, and otherwise the
/// leftmost non-value argument takes a step whose cost propagates.
pub fn smallstep_closure(
    trs: &Trs,
    sigma: &Substitution,
    t: &Term,
    fuel: u64,
) -> Result<SmallStepTrace, EngineError> {
    for (x, v) in sigma.iter() {
        if !v.is_value() {
            return Err(EngineError::NotNormalised(x.clone()));
        }
    }
    let mut m = Machine {
        trs,
        sigma: sigma.clone(),
        fresh: 0,
    };
    let mut steps = Vec::new();
    let mut total = 0u64;
    let mut cur = t.clone();
    while let Outcome::Stepped(next, delta, cost) = m.step(&cur, total)? {
        if cost > 0 && total == fuel {
            return Err(EngineError::DivergenceSuspected { partial: total });
        }
        total += cost;
        let mut d = Substitution::new();
        for (k, v) in delta {
            m.sigma.bind(k.clone(), v.clone())?;
            d.bind(k, v)?;
        }
        cur = next;
        steps.push(SmallStep {
            term: cur.clone(),
            delta: d,
            cost,
        });
    }
    Ok(SmallStepTrace {
        start: t.clone(),
        initial: sigma.clone(),
        steps,
        total,
    })
}
