use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{Enumerator, Name, Term, Trs};
use crate::engine::{normalise, EngineError, Strategy};

/// Verdicts of the syntactic restrictions. Each list holds offending rule
/// indices; overlaps are unordered pairs `(i, j)` with `i ≤ j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructureReport {
    pub not_constructor: Vec<usize>,
    pub not_left_linear: Vec<usize>,
    pub overlaps: Vec<(usize, usize)>,
}

impl StructureReport {
    pub fn is_constructor_trs(&self) -> bool {
        self.not_constructor.is_empty()
    }

    pub fn is_left_linear(&self) -> bool {
        self.not_left_linear.is_empty()
    }

    pub fn is_non_overlapping(&self) -> bool {
        self.overlaps.is_empty()
    }

    pub fn passes(&self) -> bool {
        self.is_constructor_trs() && self.is_left_linear() && self.is_non_overlapping()
    }
}

pub fn check_structure(trs: &Trs) -> StructureReport {
    let mut report = StructureReport::default();
    for r in trs.rules() {
        if !r.lhs.args().iter().all(Term::is_constructor_term) {
            report.not_constructor.push(r.index);
        }
        if !r.lhs.is_linear() {
            report.not_left_linear.push(r.index);
        }
    }
    let mut overlaps = BTreeSet::new();
    for a in trs.rules() {
        let la = a.lhs.rename("$a");
        for b in trs.rules() {
            let lb = b.lhs.rename("$b");
            if a.index < b.index && unifiable(&la, &lb) {
                overlaps.insert((a.index, b.index));
            }
            if la.proper_subterms().iter().any(|s| unifiable(s, &lb)) {
                overlaps.insert((a.index.min(b.index), a.index.max(b.index)));
            }
        }
    }
    report.overlaps = overlaps.into_iter().collect();
    report
}

fn resolve<'a>(t: &'a Term, s: &'a BTreeMap<Name, Term>) -> &'a Term {
    let mut cur = t;
    while let Term::Var(v) = cur {
        match s.get(&v.name) {
            Some(next) => cur = next,
            None => break,
        }
    }
    cur
}

fn occurs(x: &Name, t: &Term, s: &BTreeMap<Name, Term>) -> bool {
    match resolve(t, s) {
        Term::Var(v) => &v.name == x,
        Term::App(_, args) => args.iter().any(|a| occurs(x, a, s)),
    }
}

/// Syntactic unification with occurs check.
pub(crate) fn unifiable(a: &Term, b: &Term) -> bool {
    let mut s = BTreeMap::new();
    let mut stack = alloc::vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = resolve(&x, &s).clone();
        let y = resolve(&y, &s).clone();
        match (&x, &y) {
            (Term::Var(u), Term::Var(v)) if u.name == v.name => {}
            (Term::Var(u), t) | (t, Term::Var(u)) => {
                if occurs(&u.name, t, &s) {
                    return false;
                }
                s.insert(u.name.clone(), t.clone());
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                stack.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletenessReport {
    pub size_bound: usize,
    pub checked: usize,
    /// Ground terms whose normal form is not a value, with that normal form.
    pub counterexamples: Vec<(Term, Term)>,
}

impl CompletenessReport {
    pub fn passes(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Normalises every ground term of size at most `size_bound` and collects
/// those whose normal form is not a value.
pub fn check_completely_defined(
    trs: &Trs,
    size_bound: usize,
    fuel: u64,
) -> Result<CompletenessReport, EngineError> {
    let mut en = Enumerator::new(&trs.signature);
    let mut checked = 0;
    let mut counterexamples = Vec::new();
    for ty in trs.signature.types() {
        for t in en.ground_up_to(ty, size_bound) {
            checked += 1;
            let nf = normalise(trs, &t, Strategy::LeftmostInnermost, fuel)?;
            if !nf.term.is_value() {
                counterexamples.push((t, nf.term));
            }
        }
    }
    Ok(CompletenessReport {
        size_bound,
        checked,
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{SimpleDecl, SimpleSignature};
    use super::*;
    use crate::engine::DEFAULT_FUEL;
    use alloc::string::ToString;
    use alloc::vec;

    fn nat_sig(defined: &[(&str, usize)]) -> SimpleSignature {
        let n = nat();
        let mut sig = SimpleSignature::new(vec![n.clone()]).unwrap();
        sig.add_constructor("zero", SimpleDecl::new(vec![], n.clone())).unwrap();
        sig.add_constructor("s", SimpleDecl::new(vec![n.clone()], n.clone())).unwrap();
        for (f, arity) in defined {
            sig.add_defined(f, SimpleDecl::new(vec![n.clone(); *arity], n.clone())).unwrap();
        }
        sig
    }

    #[test]
    fn queue_structure_passes() {
        assert!(check_structure(&queue_trs()).passes());
    }

    #[test]
    fn overlap_detected() {
        let sig = nat_sig(&[("f", 1)]);
        let b = B(&sig);
        let x = Term::var("x", &nat());
        let trs = Trs::new(
            sig.clone(),
            vec![
                (b.f("f", vec![x.clone()]), x),
                (b.f("f", vec![b.c("zero")]), b.c("zero")),
            ],
        )
        .unwrap();
        let r = check_structure(&trs);
        assert_eq!(r.overlaps, vec![(1, 2)]);
        assert!(r.is_left_linear() && r.is_constructor_trs());
    }

    #[test]
    fn non_linear_detected() {
        let sig = nat_sig(&[("g", 2)]);
        let b = B(&sig);
        let x = Term::var("x", &nat());
        let trs = Trs::new(sig.clone(), vec![(b.f("g", vec![x.clone(), x.clone()]), x)]).unwrap();
        let r = check_structure(&trs);
        assert_eq!(r.not_left_linear, vec![1]);
    }

    #[test]
    fn non_constructor_and_nested_overlap() {
        let sig = nat_sig(&[("f", 1), ("h", 1)]);
        let b = B(&sig);
        let x = Term::var("x", &nat());
        let trs = Trs::new(
            sig.clone(),
            vec![
                (b.f("f", vec![b.f("h", vec![x.clone()])]), x.clone()),
                (b.f("h", vec![b.c("zero")]), b.c("zero")),
            ],
        )
        .unwrap();
        let r = check_structure(&trs);
        assert_eq!(r.not_constructor, vec![1]);
        assert_eq!(r.overlaps, vec![(1, 2)]);
    }

    #[test]
    fn occurs_check() {
        let sig = nat_sig(&[]);
        let b = B(&sig);
        let x = Term::var("x", &nat());
        assert!(!unifiable(&x, &b.f("s", vec![x.clone()])));
        assert!(unifiable(&x, &b.num(2)));
    }

    #[test]
    fn partial_function_reported() {
        let sig = nat_sig(&[("f", 1)]);
        let b = B(&sig);
        let x = Term::var("x", &nat());
        let trs = Trs::new(sig.clone(), vec![(b.f("f", vec![b.f("s", vec![x.clone()])]), x)]).unwrap();
        let r = check_completely_defined(&trs, 2, DEFAULT_FUEL).unwrap();
        assert!(!r.passes());
        assert_eq!(r.counterexamples[0].1.to_string(), "f(zero)");

        let empty = Trs::new(sig, vec![]).unwrap();
        let r = check_completely_defined(&empty, 2, DEFAULT_FUEL).unwrap();
        assert_eq!(r.counterexamples[0].0.to_string(), "f(zero)");
    }

    #[test]
    fn queue_error_constants_leave_stuck_terms() {
        let r = check_completely_defined(&queue_trs(), 3, DEFAULT_FUEL).unwrap();
        let stuck: Vec<_> = r.counterexamples.iter().map(|(_, nf)| nf.to_string()).collect();
        assert!(stuck.contains(&"enq(errorHead)".to_string()));
        assert!(stuck.contains(&"checkF(errorTail)".to_string()));
    }
}
