use amortise_core::annot::AnnotatedSignature;
use amortise_core::engine::{bigstep, dheight, normalise, rc_oracle, EngineError, Strategy};
use amortise_core::interp::{bound_report, check_orientation, InterpError};
use amortise_core::potential::{phi_ground, PotentialError};
use amortise_core::rational::{render, Rational};
use amortise_core::syntax::print_sig;
use amortise_core::terms::Trs;
use amortise_core::typecheck::{
    check_soundness_inequality, check_trs, infer, InferOptions, InferOutcome, Objective, SoundnessError, TypeError,
    Verdict,
};
use serde_json::json;
use thiserror::Error;

use crate::config::{Command, Common, Typed};
use crate::load::{self, InputError};
use crate::report::{Report, Status};

/// Failures that end a run with exit status 1.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Soundness(#[from] SoundnessError),
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Debug, Error)]
pub enum Failure {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Run(#[from] RunError),
}

macro_rules! run_err {
    ($e:expr) => {
        $e.map_err(|e| Failure::Run(e.into()))?
    };
}

fn q(r: &Rational) -> String {
    render(r)
}

fn typed(t: &Typed) -> Result<(Trs, AnnotatedSignature), Failure> {
    let trs = load::trs(&t.trs)?;
    let sig = load::sig(&t.sig, &trs)?;
    Ok((trs, sig))
}

pub fn run(cmd: &Command, common: &Common) -> Result<Report, Failure> {
    let fuel = common.fuel;
    match cmd {
        Command::Check(t) => {
            let (trs, sig) = typed(t)?;
            Ok(check(&trs, &sig, common.verbose))
        }
        Command::Infer {
            trs,
            deg,
            minimize,
            max_decls,
        } => {
            let trs = load::trs(trs)?;
            let objective = match minimize {
                None => None,
                Some(s) => Some(Objective::parse(s).ok_or_else(|| {
                    InputError::Usage(format!("--minimize: expected `total-cost` or `cost:<symbol>`, got `{s}`"))
                })?),
            };
            if let Some(Objective::Cost(f)) = &objective {
                if !trs.signature.defined().contains_key(f) {
                    return Err(InputError::Usage(format!("--minimize: `{f}` is not a defined symbol")).into());
                }
            }
            let opts = InferOptions {
                degree: *deg as usize,
                max_decls: *max_decls as usize,
                objective,
            };
            Ok(run_infer(&trs, &opts, common.verbose)?)
        }
        Command::Eval {
            trs,
            term,
            subst,
            strategy,
        } => {
            let trs = load::trs(trs)?;
            let mut rep = Report::new(Status::Pass);
            match subst {
                Some(s) => {
                    let t = load::term(term, &trs, false)?;
                    let sigma = load::subst(s, &t, &trs)?;
                    let r = run_err!(bigstep(&trs, &sigma, &t, fuel));
                    rep.line(format!("value: {}", r.value));
                    rep.line(format!("steps: {}", r.count));
                    rep.record(json!({"command": "eval", "term": t.to_string(), "value": r.value.to_string(), "steps": r.count}));
                }
                None => {
                    let t = load::term(term, &trs, true)?;
                    let n = run_err!(normalise(&trs, &t, Strategy::from(*strategy), fuel));
                    let value = n.term.is_value();
                    rep.status = Status::from_bool(value);
                    rep.line(format!("normal form: {}", n.term));
                    rep.line(format!("steps: {}", n.steps));
                    if !value {
                        rep.line("stuck: the normal form is not a value");
                    }
                    rep.record(json!({"command": "eval", "term": t.to_string(), "normal_form": n.term.to_string(), "steps": n.steps, "value": value}));
                }
            }
            Ok(rep)
        }
        Command::Dheight { trs, term } => {
            let trs = load::trs(trs)?;
            let t = load::term(term, &trs, true)?;
            let h = run_err!(dheight(&trs, &t, fuel));
            let mut rep = Report::new(Status::Pass);
            rep.line(h.to_string());
            rep.record(json!({"command": "dheight", "term": t.to_string(), "dheight": h}));
            Ok(rep)
        }
        Command::Rc { trs, max_size } => {
            let trs = load::trs(trs)?;
            let mut rep = Report::new(Status::Pass);
            for n in 0..=*max_size as usize {
                let r = run_err!(rc_oracle(&trs, n, fuel));
                let w = r.witness.map(|w| w.to_string());
                rep.line(format!("rc({n}) = {}{}", r.value, w.as_ref().map(|w| format!("  [{w}]")).unwrap_or_default()));
                rep.record(json!({"command": "rc", "n": n, "rc": r.value, "witness": w}));
            }
            Ok(rep)
        }
        Command::Phi { typed: t, term, at } => {
            let (trs, sig) = typed(t)?;
            let tm = load::term(term, &trs, true)?;
            let at = load::annotated_type(at, &trs)?;
            let have = trs.signature.type_of(&tm).map_err(|e| InputError::Usage(format!("--term: {e}")))?;
            if have != at.base {
                return Err(InputError::Usage(format!("--type: `{tm}` has type {have}, not {}", at.base)).into());
            }
            let phi = run_err!(phi_ground(&sig, &tm, &at));
            let mut rep = Report::new(Status::Pass);
            rep.line(q(&phi));
            rep.record(json!({"command": "phi", "term": tm.to_string(), "type": at.to_string(), "phi": q(&phi)}));
            Ok(rep)
        }
        Command::Orient {
            typed: t,
            max_size,
            subst_size,
        } => {
            let (trs, sig) = typed(t)?;
            let r = run_err!(check_orientation(&trs, &sig, *subst_size as usize, *max_size as usize, fuel));
            let mut rep = Report::new(Status::from_bool(r.passes()));
            for v in &r.rule_violations {
                rep.line(format!(
                    "rule {} at {} under {}: {} <= {}",
                    v.rule,
                    v.at,
                    v.sigma,
                    q(&v.lhs),
                    q(&v.rhs)
                ));
                rep.record(json!({"command": "orient", "kind": "rule", "rule": v.rule, "type": v.at.to_string(), "sigma": v.sigma.to_string(), "lhs": q(&v.lhs), "rhs": q(&v.rhs)}));
            }
            for v in &r.step_violations {
                rep.line(format!(
                    "step {} -> {} at {} (from {}): {} <= {}",
                    v.from,
                    v.to,
                    v.at,
                    v.start,
                    q(&v.before),
                    q(&v.after)
                ));
                rep.record(json!({"command": "orient", "kind": "step", "start": v.start.to_string(), "from": v.from.to_string(), "to": v.to.to_string(), "type": v.at.to_string(), "before": q(&v.before), "after": q(&v.after)}));
            }
            rep.line(format!(
                "{}: {} rule instances (values of size <= {}), {} steps (start terms of size <= {}), {} violations",
                if r.passes() { "oriented" } else { "not oriented" },
                r.rule_checks,
                r.subst_bound,
                r.step_checks,
                r.term_bound,
                r.rule_violations.len() + r.step_violations.len()
            ));
            rep.record(json!({"command": "orient", "kind": "summary", "pass": r.passes(), "rule_checks": r.rule_checks, "step_checks": r.step_checks}));
            Ok(rep)
        }
        Command::Bound { typed: t, n_max } => {
            let (trs, sig) = typed(t)?;
            let r = run_err!(bound_report(&trs, &sig, *n_max as usize, fuel));
            let mut rep = Report::new(Status::from_bool(r.passes()));
            for row in &r.rows {
                let bound = row.bound.as_ref().map(q);
                rep.line(format!(
                    "n = {}: rc = {}, bound = {}{}",
                    row.n,
                    row.rc,
                    bound.clone().unwrap_or_else(|| "none".into()),
                    if row.holds() { "" } else { "  VIOLATED" }
                ));
                rep.record(json!({"command": "bound", "n": row.n, "rc": row.rc, "bound": bound, "holds": row.holds(),
                    "rc_witness": row.rc_witness.as_ref().map(ToString::to_string),
                    "bound_witness": row.bound_witness.as_ref().map(ToString::to_string)}));
            }
            Ok(rep)
        }
        Command::Soundness { typed: t, max_size } => {
            let (trs, sig) = typed(t)?;
            let r = run_err!(check_soundness_inequality(&trs, &sig, *max_size as usize, fuel));
            let mut rep = Report::new(Status::from_bool(r.passes()));
            for v in &r.violations {
                rep.line(format!(
                    "{} at {}: Φ(σ) + p − Φ(v) = {} + {} − {} < {}",
                    v.term,
                    v.decl,
                    q(&v.phi_args),
                    q(&v.decl.cost),
                    q(&v.phi_value),
                    v.steps
                ));
                rep.record(json!({"command": "soundness", "kind": "inequality", "term": v.term.to_string(), "decl": v.decl.to_string(), "phi_args": q(&v.phi_args), "phi_value": q(&v.phi_value), "steps": v.steps}));
            }
            for v in &r.step_violations {
                rep.line(format!(
                    "{} at {}: step {} of cost {} drops {} to {}",
                    v.term,
                    v.decl,
                    v.step,
                    v.cost,
                    q(&v.before),
                    q(&v.after)
                ));
                rep.record(json!({"command": "soundness", "kind": "step", "term": v.term.to_string(), "decl": v.decl.to_string(), "step": v.step, "cost": v.cost, "before": q(&v.before), "after": q(&v.after)}));
            }
            rep.line(format!(
                "{}: {} basic terms of size <= {} ({} stuck, skipped), {} checks ({} tight), {} step checks",
                if r.passes() { "sound" } else { "violated" },
                r.terms,
                r.size_bound,
                r.stuck,
                r.checks,
                r.tight,
                r.step_checks
            ));
            rep.record(json!({"command": "soundness", "kind": "summary", "pass": r.passes(), "terms": r.terms, "stuck": r.stuck, "checks": r.checks, "tight": r.tight, "step_checks": r.step_checks}));
            Ok(rep)
        }
    }
}

fn check(trs: &Trs, sig: &AnnotatedSignature, verbose: bool) -> Report {
    let r = check_trs(trs, sig);
    let mut rep = Report::new(Status::from_bool(r.is_well_typed()));
    for v in &r.verdicts {
        let (word, detail): (&str, Vec<String>) = match &v.verdict {
            Verdict::WellTyped => ("well-typed", Vec::new()),
            Verdict::Infeasible(p) => ("infeasible", p.clone()),
            Verdict::NegativeBudget(b) => ("negative budget", vec![format!("budget {}", q(b))]),
            Verdict::Error(e) => ("error", vec![e.to_string()]),
        };
        rep.line(format!("rule {} ({}) at {}: {word}", v.rule, v.symbol, v.decl));
        for d in &detail {
            rep.line(format!("  {d}"));
        }
        if verbose {
            for l in v.system.dump().lines() {
                rep.line(format!("    {l}"));
            }
        }
        rep.record(json!({"command": "check", "rule": v.rule, "symbol": v.symbol.to_string(), "decl": v.decl.to_string(),
            "verdict": word, "detail": detail}));
    }
    for (f, _) in trs.signature.defined_symbols() {
        if trs.rules_for(&f.name).next().is_some() && sig.decls(&f.name).is_empty() {
            rep.line(format!("note: no declaration for {}; its rules are not checked", f.name));
        }
    }
    let failed = r.failures().count();
    rep.line(if failed == 0 {
        "well-typed".to_string()
    } else {
        format!("not well-typed: {failed} of {} checks failed", r.verdicts.len())
    });
    rep
}

fn run_infer(trs: &Trs, opts: &InferOptions, verbose: bool) -> Result<Report, RunError> {
    match infer(trs, opts)? {
        InferOutcome::Feasible {
            signature,
            system,
            assignment,
        } => {
            let text = print_sig(&signature);
            let mut rep = Report::new(Status::Pass);
            rep.line(format!(
                "feasible at degree {}: {} unknowns, {} constraints",
                opts.degree,
                system.vars().len(),
                system.constraints().len()
            ));
            rep.lines.extend(text.lines().map(String::from));
            if verbose {
                for (v, x) in system.vars().iter().zip(&assignment.0) {
                    rep.line(format!("  {} = {}", v.origin, q(x)));
                }
            }
            rep.record(json!({"command": "infer", "degree": opts.degree, "feasible": true, "signature": text}));
            rep.artifact = Some(text);
            Ok(rep)
        }
        InferOutcome::Infeasible {
            system, provenance, ..
        } => {
            let mut rep = Report::new(Status::Fail);
            rep.line(format!(
                "infeasible at degree {}: {} unknowns, {} constraints; a Farkas certificate combines",
                opts.degree,
                system.vars().len(),
                system.constraints().len()
            ));
            for p in &provenance {
                rep.line(format!("  {p}"));
            }
            rep.record(json!({"command": "infer", "degree": opts.degree, "feasible": false, "certificate": provenance}));
            Ok(rep)
        }
    }
}
