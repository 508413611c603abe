use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{emit_rule, DeclSource, SymDecl, SymType, TypeError};
use crate::annot::{AnnotatedDecl, AnnotatedSignature, Preset};
use crate::constraints::{
    solve_feasible, solve_minimize, Assignment, ConstraintSystem, FarkasCertificate, LinExpr, Optimum, Solution,
};
use crate::rational::int;
use crate::terms::{BaseType, Name, SimpleSignature, Term, Trs};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Declared costs plus argument annotations, later entries weighted more.
    TotalCost,
    /// The declared costs of one symbol.
    Cost(Name),
}

impl Objective {
    /// `total-cost` or `cost:<symbol>`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "total-cost" => Some(Objective::TotalCost),
            _ => s.strip_prefix("cost:").filter(|f| !f.is_empty()).map(|f| Objective::Cost(Name::new(f))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct InferOptions {
    pub degree: usize,
    /// Upper bound on declarations per defined symbol.
    pub max_decls: usize,
    pub objective: Option<Objective>,
}

impl Default for InferOptions {
    fn default() -> Self {
        InferOptions {
            degree: 2,
            max_decls: 4,
            objective: None,
        }
    }
}

/// Shape of the unknowns: annotation lengths per base type, the preset
/// chosen for each constructor, and the declaration slots of each defined
/// symbol. Slot 0 serves start terms and any caller past the cap; the others
/// serve one calling symbol each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeTemplate {
    pub degree: usize,
    pub lengths: BTreeMap<BaseType, usize>,
    pub presets: BTreeMap<Name, Preset>,
    pub slots: BTreeMap<Name, Vec<Option<Name>>>,
}

fn is_recursive(sig: &SimpleSignature, c: &Name) -> bool {
    let d = &sig.constructors()[c];
    d.args.contains(&d.result)
}

impl DegreeTemplate {
    pub fn new(trs: &Trs, degree: usize, max_decls: usize) -> Result<Self, TypeError> {
        if degree == 0 {
            return Err(TypeError::ZeroDegree);
        }
        let sig = &trs.signature;
        let mut presets = BTreeMap::new();
        for (c, d) in sig.constructors() {
            let p = if is_recursive(sig, c) {
                Preset::Shift
            } else if d.args.is_empty() {
                Preset::Zero
            } else {
                Preset::Interleave
            };
            presets.insert(c.clone(), p);
        }
        let mut lengths: BTreeMap<BaseType, usize> = sig.types().iter().map(|t| (t.clone(), degree)).collect();
        let packed: Vec<&BaseType> = sig
            .types()
            .iter()
            .filter(|t| {
                let cs = sig.constructors_of(t);
                cs.iter().all(|(c, _)| presets[&c.name] != Preset::Shift)
                    && cs.iter().any(|(c, _)| presets[&c.name] == Preset::Interleave)
            })
            .collect();
        loop {
            let mut changed = false;
            for t in &packed {
                let mut want = degree;
                for (c, d) in sig.constructors_of(t) {
                    if presets[&c.name] == Preset::Interleave {
                        let widest = d.args.iter().map(|a| lengths[a]).max().unwrap_or(0);
                        want = want.max(d.arity() * widest);
                    }
                }
                let want = want.min(4 * degree);
                if lengths[*t] != want {
                    lengths.insert((*t).clone(), want);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let max_decls = max_decls.max(1);
        let mut callers: BTreeMap<Name, BTreeSet<(usize, Name)>> = BTreeMap::new();
        for rule in trs.rules() {
            let f = &rule.root().name;
            let mut stack = alloc::vec![&rule.rhs];
            while let Some(t) = stack.pop() {
                if let Term::App(g, args) = t {
                    if g.is_defined() && &g.name != f {
                        callers.entry(g.name.clone()).or_default().insert((sig.defined()[f].arity(), f.clone()));
                    }
                    stack.extend(args);
                }
            }
        }
        let mut slots = BTreeMap::new();
        for (g, _) in sig.defined_symbols() {
            let mut list = alloc::vec![None];
            if let Some(cs) = callers.get(&g.name) {
                list.extend(cs.iter().take(max_decls - 1).map(|(_, f)| Some(f.clone())));
            }
            slots.insert(g.name.clone(), list);
        }
        Ok(DegreeTemplate {
            degree,
            lengths,
            presets,
            slots,
        })
    }

    /// The signature carrying the preset schemes and no declarations.
    pub fn schemes(&self, sig: &SimpleSignature) -> AnnotatedSignature {
        let mut out = AnnotatedSignature::new(sig.clone());
        for (c, p) in &self.presets {
            let d = &sig.constructors()[c];
            out.set_preset(c.as_str(), *p, self.lengths[&d.result])
                .expect("constructor of the same signature");
        }
        out
    }

    fn slot_index(&self, g: &Name, caller: &Name) -> usize {
        self.slots[g].iter().position(|s| s.as_ref() == Some(caller)).unwrap_or(0)
    }
}

fn slot_label(g: &Name, s: &Option<Name>) -> String {
    match s {
        None => format!("{g}@main"),
        Some(f) => format!("{g}@{f}"),
    }
}

struct Slots<'a> {
    sig: &'a AnnotatedSignature,
    template: &'a DegreeTemplate,
    decls: &'a BTreeMap<Name, Vec<SymDecl>>,
    current: (Name, usize),
}

impl DeclSource for Slots<'_> {
    fn signature(&self) -> &AnnotatedSignature {
        self.sig
    }

    fn call(&mut self, sys: &mut ConstraintSystem, f: &Name, demand: &SymType, prov: &str) -> Result<SymDecl, TypeError> {
        let idx = if f == &self.current.0 {
            self.current.1
        } else {
            self.template.slot_index(f, &self.current.0)
        };
        let d = self.decls[f][idx].clone();
        let width = d.result.annot.len().max(demand.annot.len());
        for j in 0..width {
            sys.eq(
                d.result.entry(j),
                demand.entry(j),
                format!("{prov}: {}[{}]", slot_label(f, &self.template.slots[f][idx]), j + 1),
            );
        }
        Ok(d)
    }
}

#[derive(Clone, Debug)]
pub enum InferOutcome {
    Feasible {
        signature: AnnotatedSignature,
        system: ConstraintSystem,
        assignment: Assignment,
    },
    Infeasible {
        system: ConstraintSystem,
        certificate: FarkasCertificate,
        /// Provenance of the constraints the certificate combines.
        provenance: Vec<String>,
    },
}

enum Solved {
    Point(Assignment),
    Refuted(FarkasCertificate),
}

fn solve(sys: &ConstraintSystem, objective: Option<&LinExpr>) -> Solved {
    match objective {
        Some(obj) => match solve_minimize(sys, obj) {
            Optimum::Optimal { assignment, .. } => Solved::Point(assignment),
            Optimum::Infeasible(c) => Solved::Refuted(c),
            Optimum::Unbounded => solve(sys, None),
        },
        None => match solve_feasible(sys) {
            Solution::Feasible(a) => Solved::Point(a),
            Solution::Infeasible(c) => Solved::Refuted(c),
        },
    }
}

/// Builds one constraint system over the template, solves it and reads back
/// a concrete signature. Slots of one symbol that land on the same result
/// annotation with different declarations are forced equal and the system is
/// solved again.
pub fn infer(trs: &Trs, opts: &InferOptions) -> Result<InferOutcome, TypeError> {
    let template = DegreeTemplate::new(trs, opts.degree, opts.max_decls)?;
    let sig = template.schemes(&trs.signature);
    let mut sys = ConstraintSystem::new();
    let mut decls: BTreeMap<Name, Vec<SymDecl>> = BTreeMap::new();
    for (g, slots) in &template.slots {
        let simple = &trs.signature.defined()[g];
        let list = slots
            .iter()
            .map(|s| {
                let label = slot_label(g, s);
                SymDecl {
                    args: simple
                        .args
                        .iter()
                        .enumerate()
                        .map(|(i, a)| SymType::fresh(&mut sys, a, template.lengths[a], &format!("{label}.arg{}", i + 1)))
                        .collect(),
                    result: SymType::fresh(
                        &mut sys,
                        &simple.result,
                        template.lengths[&simple.result],
                        &format!("{label}.result"),
                    ),
                    cost: sys.fresh(format!("{label}.cost")),
                }
            })
            .collect();
        decls.insert(g.clone(), list);
    }

    for (g, slots) in &template.slots {
        for (idx, s) in slots.iter().enumerate() {
            let mut src = Slots {
                sig: &sig,
                template: &template,
                decls: &decls,
                current: (g.clone(), idx),
            };
            let d = decls[g][idx].clone();
            for rule in trs.rules_for(g) {
                let prov = format!("rule {} @ {}", rule.index, slot_label(g, s));
                let budget = emit_rule(&mut sys, &mut src, rule, &d, &prov)?;
                sys.ge(budget, LinExpr::zero(), format!("{prov}: budget"));
            }
        }
    }

    let objective = opts.objective.as_ref().map(|o| {
        let mut e = LinExpr::zero();
        for (g, list) in &decls {
            if let Objective::Cost(f) = o {
                if f != g {
                    continue;
                }
            }
            for d in list {
                e.add_assign(&d.cost);
                if *o == Objective::TotalCost {
                    for a in &d.args {
                        for (j, x) in a.annot.iter().enumerate() {
                            e.add_assign(&x.scale(&int(j as i64 + 1)));
                        }
                    }
                }
            }
        }
        e
    });

    loop {
        let assignment = match solve(&sys, objective.as_ref()) {
            Solved::Point(a) => a,
            Solved::Refuted(certificate) => {
                let provenance = certificate.provenance(&sys).into_iter().map(String::from).collect();
                return Ok(InferOutcome::Infeasible {
                    system: sys,
                    certificate,
                    provenance,
                });
            }
        };
        let mut tied = false;
        let mut signature = sig.clone();
        for (g, list) in &decls {
            let concrete: Vec<AnnotatedDecl> = list.iter().map(|d| d.eval(&assignment)).collect::<Result<_, _>>()?;
            for (i, d) in concrete.iter().enumerate() {
                match concrete[..i].iter().position(|e| e.result.annot == d.result.annot) {
                    Some(k) if concrete[k] != *d => {
                        tie(&mut sys, &list[k], &list[i], &format!("{g}: equal results"));
                        tied = true;
                    }
                    Some(_) => {}
                    None => signature.add_decl(g.as_str(), d.clone())?,
                }
            }
        }
        if !tied {
            return Ok(InferOutcome::Feasible {
                signature,
                system: sys,
                assignment,
            });
        }
    }
}

fn tie(sys: &mut ConstraintSystem, a: &SymDecl, b: &SymDecl, prov: &str) {
    let pairs = a.args.iter().zip(&b.args).chain([(&a.result, &b.result)]);
    for (x, y) in pairs {
        for j in 0..x.annot.len().max(y.annot.len()) {
            sys.eq(x.entry(j), y.entry(j), String::from(prov));
        }
    }
    sys.eq(a.cost.clone(), b.cost.clone(), String::from(prov));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{rc_oracle, DEFAULT_FUEL};
    use crate::terms::fixtures::*;
    use crate::terms::SimpleDecl;
    use crate::typecheck::check_trs;
    use alloc::vec;

    fn exp_trs() -> Trs {
        let n = nat();
        let mut sig = SimpleSignature::new(vec![n.clone()]).unwrap();
        sig.add_constructor("zero", SimpleDecl::new(vec![], n.clone())).unwrap();
        sig.add_constructor("s", SimpleDecl::new(vec![n.clone()], n.clone())).unwrap();
        sig.add_defined("d", SimpleDecl::new(vec![n.clone()], n.clone())).unwrap();
        sig.add_defined("e", SimpleDecl::new(vec![n.clone()], n.clone())).unwrap();
        let b = B(&sig);
        let x = Term::var("x", &n);
        let rules = vec![
            (b.f("d", vec![b.f("s", vec![x.clone()])]), b.f("s", vec![b.f("s", vec![b.f("d", vec![x.clone()])])])),
            (b.f("d", vec![b.c("zero")]), b.c("zero")),
            (b.f("e", vec![b.f("s", vec![x.clone()])]), b.f("d", vec![b.f("e", vec![x])])),
            (b.f("e", vec![b.c("zero")]), b.f("s", vec![b.c("zero")])),
        ];
        Trs::new(sig, rules).unwrap()
    }

    #[test]
    fn template_shape() {
        let t = DegreeTemplate::new(&queue_trs(), 2, 4).unwrap();
        assert_eq!(t.lengths[&list()], 2);
        assert_eq!(t.lengths[&queue()], 4);
        assert_eq!(t.presets[&Name::new("cons")], Preset::Shift);
        assert_eq!(t.presets[&Name::new("queue")], Preset::Interleave);
        assert_eq!(t.presets[&Name::new("nil")], Preset::Zero);
        let checkf = &t.slots[&Name::new("checkF")];
        assert_eq!(checkf, &vec![None, Some(Name::new("tail")), Some(Name::new("snoc"))]);
        let t = DegreeTemplate::new(&queue_trs(), 2, 2).unwrap();
        assert_eq!(t.slots[&Name::new("checkF")].len(), 2);
        assert!(DegreeTemplate::new(&queue_trs(), 0, 4).is_err());
    }

    #[test]
    fn queue_inferred_and_checked() {
        let trs = queue_trs();
        for objective in [None, Some(Objective::TotalCost), Some(Objective::Cost(Name::new("enq")))] {
            let opts = InferOptions {
                objective: objective.clone(),
                ..InferOptions::default()
            };
            let InferOutcome::Feasible { signature, system, assignment } = infer(&trs, &opts).unwrap() else {
                panic!("queue system should be typable at degree 2");
            };
            assert!(system.validate(&assignment));
            let rep = check_trs(&trs, &signature);
            assert!(rep.is_well_typed(), "{objective:?}: {:?}", rep.failures().next().map(|v| (&v.rule, &v.verdict)));
            if objective.is_some() {
                let enq = &signature.decls(&Name::new("enq"))[0];
                assert!(enq.cost <= int(1), "{enq}");
            }
        }
    }

    #[test]
    fn exponential_system_infeasible() {
        let trs = exp_trs();
        for degree in [1, 2, 3] {
            let opts = InferOptions {
                degree,
                ..InferOptions::default()
            };
            let InferOutcome::Infeasible { system, certificate, provenance } = infer(&trs, &opts).unwrap() else {
                panic!("degree {degree} should be infeasible");
            };
            assert!(certificate.verify(&system));
            assert!(!provenance.is_empty());
        }
        let rc = rc_oracle(&trs, 6, DEFAULT_FUEL).unwrap();
        assert!(rc.value >= 16);
    }

    #[test]
    fn empty_system_all_zero() {
        let trs = Trs::new(queue_signature(), vec![]).unwrap();
        let opts = InferOptions {
            degree: 1,
            objective: Some(Objective::TotalCost),
            ..InferOptions::default()
        };
        let InferOutcome::Feasible { signature, .. } = infer(&trs, &opts).unwrap() else { panic!() };
        for ds in signature.all_decls().values() {
            for d in ds {
                assert!(d.cost == int(0) && d.args.iter().all(|a| a.annot.is_zero()) && d.result.annot.is_zero());
            }
        }
    }

    #[test]
    fn objectives_parse() {
        assert_eq!(Objective::parse("total-cost"), Some(Objective::TotalCost));
        assert_eq!(Objective::parse("cost:enq"), Some(Objective::Cost(Name::new("enq"))));
        assert_eq!(Objective::parse("cost:"), None);
        assert_eq!(Objective::parse("speed"), None);
    }
}
