use alloc::format;
use alloc::rc::Rc;
use alloc::vec::Vec;

use super::{find_rule, EngineError};
use crate::terms::{Name, Substitution, Term, TermError, Trs, Var};

/// Outcome of `σ ⊢^m t ⇒ v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigStepResult {
    pub value: Term,
    /// Number of rule applications `m`.
    pub count: u64,
    /// Number of judgements in the derivation tree.
    pub derivation_size: u64,
}

/// A persistent environment: `σ ⊎ τ` pushes a frame without copying `σ`.
#[derive(Clone)]
struct Env(Option<Rc<Frame>>);

struct Frame {
    bindings: Vec<(Name, Term)>,
    parent: Env,
}

impl Env {
    fn extend(&self, bindings: Vec<(Name, Term)>) -> Env {
        Env(Some(Rc::new(Frame {
            bindings,
            parent: self.clone(),
        })))
    }

    fn lookup(&self, name: &Name) -> Option<&Term> {
        let mut cur = self.0.as_ref();
        while let Some(frame) = cur {
            if let Some((_, t)) = frame.bindings.iter().find(|(n, _)| n == name) {
                return Some(t);
            }
            cur = frame.parent.0.as_ref();
        }
        None
    }
}

enum Task {
    Eval(Term, Env),
    /// Pops `n` argument values, binds them to fresh variables and evaluates
    /// the symbol applied to those variables.
    Apply(Term, usize, Env),
}

/// Evaluates `t` under `σ` following the big-step rules: variable lookup and
/// constructors on variables cost nothing, rule application costs one, and
/// any other application is decomposed through fresh variables.
pub fn bigstep(trs: &Trs, sigma: &Substitution, t: &Term, fuel: u64) -> Result<BigStepResult, EngineError> {
    for (x, v) in sigma.iter() {
        if !v.is_value() {
            return Err(EngineError::NotNormalised(x.clone()));
        }
    }
    for v in t.vars() {
        if !sigma.contains(&v.name) {
            return Err(TermError::Unbound(v.name).into());
        }
    }
    let root = Env(None).extend(sigma.iter().map(|(k, v)| (k.clone(), v.clone())).collect());

    let mut fresh = 0usize;
    let mut count = 0u64;
    let mut size = 0u64;
    let mut tasks = alloc::vec![Task::Eval(t.clone(), root)];
    let mut values: Vec<Term> = Vec::new();

    while let Some(task) = tasks.pop() {
        match task {
            Task::Eval(Term::Var(x), env) => {
                size += 1;
                let v = env
                    .lookup(&x.name)
                    .cloned()
                    .ok_or_else(|| EngineError::from(TermError::Unbound(x.name.clone())))?;
                values.push(v);
            }
            Task::Eval(Term::App(f, args), env) if args.iter().all(Term::is_var) => {
                size += 1;
                let vals = args
                    .iter()
                    .map(|a| {
                        let Term::Var(x) = a else { unreachable!() };
                        env.lookup(&x.name)
                            .cloned()
                            .ok_or_else(|| EngineError::from(TermError::Unbound(x.name.clone())))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let instance = Term::App(f.clone(), vals);
                if f.is_constructor() {
                    values.push(instance);
                    continue;
                }
                let Some((rule, tau)) = find_rule(trs, &instance) else {
                    return Err(EngineError::Stuck {
                        term: instance,
                        partial: count,
                    });
                };
                if count == fuel {
                    return Err(EngineError::DivergenceSuspected { partial: count });
                }
                count += 1;
                fresh += 1;
                let suffix = format!("${fresh}");
                let renamed = tau
                    .iter()
                    .map(|(k, v)| {
                        let mut name = alloc::string::String::from(k.as_str());
                        name.push_str(&suffix);
                        (Name::new(&name), v.clone())
                    })
                    .collect();
                tasks.push(Task::Eval(rule.rhs.rename(&suffix), env.extend(renamed)));
            }
            Task::Eval(app @ Term::App(..), env) => {
                size += 1;
                let args = app.args();
                tasks.push(Task::Apply(app.clone(), args.len(), env.clone()));
                for a in args.iter().rev() {
                    tasks.push(Task::Eval(a.clone(), env.clone()));
                }
            }
            Task::Apply(app, n, env) => {
                let Term::App(f, _) = &app else { unreachable!() };
                let decl = trs
                    .signature
                    .decl(f)
                    .ok_or_else(|| EngineError::from(TermError::UnknownSymbol(f.name.clone())))?;
                let vals = values.split_off(values.len() - n);
                let mut rho = Vec::with_capacity(n);
                let mut vars = Vec::with_capacity(n);
                for (v, ty) in vals.into_iter().zip(&decl.args) {
                    fresh += 1;
                    let name = Name::new(&format!("${fresh}"));
                    vars.push(Term::Var(Var {
                        name: name.clone(),
                        ty: ty.clone(),
                    }));
                    rho.push((name, v));
                }
                tasks.push(Task::Eval(Term::App(f.clone(), vars), env.extend(rho)));
            }
        }
    }
    let value = values.pop().expect("evaluation leaves exactly one value");
    debug_assert!(values.is_empty());
    Ok(BigStepResult {
        value,
        count,
        derivation_size: size,
    })
}
