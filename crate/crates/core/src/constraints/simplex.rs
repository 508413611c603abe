use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{Assignment, ConstraintSystem, LinExpr, Rel};
use crate::rational::Rational;

/// Multipliers `y_i` on the constraints such that, writing each constraint as
/// `a_i·x rel b_i`, the combination `Σ y_i a_i` is componentwise nonnegative
/// while `Σ y_i b_i < 0`; with `y_i ≥ 0` on `≤` rows and `y_i ≤ 0` on `≥`
/// rows this contradicts `x ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<(usize, Rational)>,
}

impl FarkasCertificate {
    /// Exact re-verification against `sys`.
    pub fn verify(&self, sys: &ConstraintSystem) -> bool {
        let mut combo = LinExpr::zero();
        let mut bound = Rational::zero();
        for (i, y) in &self.multipliers {
            let Some(c) = sys.constraints().get(*i) else {
                return false;
            };
            let sign_ok = match c.rel {
                Rel::Eq => true,
                Rel::Le => !y.is_negative(),
                Rel::Ge => !y.is_positive(),
            };
            if !sign_ok {
                return false;
            }
            let (e, b) = c.normal_form();
            combo.add_assign(&e.scale(y));
            bound += y * b;
        }
        combo.terms().values().all(|c| !c.is_negative()) && bound.is_negative()
    }

    /// Provenance tags of the constraints taking part in the contradiction.
    pub fn provenance<'a>(&self, sys: &'a ConstraintSystem) -> Vec<&'a str> {
        self.multipliers
            .iter()
            .map(|(i, _)| sys.constraints()[*i].provenance.as_str())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Feasible(Assignment),
    Infeasible(FarkasCertificate),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Optimum {
    Optimal { assignment: Assignment, value: Rational },
    Infeasible(FarkasCertificate),
    Unbounded,
}

type Row = BTreeMap<usize, Rational>;

struct Tableau {
    rows: Vec<Row>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs of the current objective.
    obj: Row,
    value: Rational,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, q: usize) {
        let p = self.rows[r][&q].clone();
        if !p.is_one() {
            for v in self.rows[r].values_mut() {
                *v /= &p;
            }
            self.rhs[r] /= &p;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let Some(a) = self.rows[i].get(&q).cloned() else {
                continue;
            };
            axpy(&mut self.rows[i], &a, &prow);
            self.rhs[i] -= &a * &prhs;
        }
        if let Some(d) = self.obj.get(&q).cloned() {
            axpy(&mut self.obj, &d, &prow);
            self.value += &d * &prhs;
        }
        self.basis[r] = q;
    }

    /// Bland's rule over columns `< limit`.
    fn run(&mut self, limit: usize) -> Outcome {
        loop {
            let Some(q) = self
                .obj
                .iter()
                .find(|(j, d)| **j < limit && d.is_negative())
                .map(|(j, _)| *j)
            else {
                return Outcome::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let Some(a) = self.rows[i].get(&q) else {
                    continue;
                };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((b, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*b]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Outcome::Unbounded;
            };
            self.pivot(r, q);
        }
    }
}

/// `row -= a·prow`, dropping entries that cancel.
fn axpy(row: &mut Row, a: &Rational, prow: &Row) {
    for (j, v) in prow {
        let delta = a * v;
        match row.get_mut(j) {
            Some(e) => {
                *e -= delta;
                if e.is_zero() {
                    row.remove(j);
                }
            }
            None => {
                row.insert(*j, -delta);
            }
        }
    }
}

struct Phase1 {
    tab: Tableau,
    /// Number of structural columns (variables and slacks).
    width: usize,
}

fn phase1(sys: &ConstraintSystem) -> Result<Phase1, FarkasCertificate> {
    let nv = sys.vars().len();
    let cons = sys.constraints();
    let slacks = cons.iter().filter(|c| c.rel != Rel::Eq).count();
    let width = nv + slacks;
    let mut rows = Vec::with_capacity(cons.len());
    let mut rhs = Vec::with_capacity(cons.len());
    let mut signs = Vec::with_capacity(cons.len());
    let mut next_slack = nv;
    for (i, c) in cons.iter().enumerate() {
        let (e, b) = c.normal_form();
        let mut row: Row = e.terms().iter().map(|(v, q)| (*v, q.clone())).collect();
        match c.rel {
            Rel::Eq => {}
            Rel::Le => {
                row.insert(next_slack, Rational::one());
                next_slack += 1;
            }
            Rel::Ge => {
                row.insert(next_slack, -Rational::one());
                next_slack += 1;
            }
        }
        let flip = b.is_negative();
        if flip {
            for v in row.values_mut() {
                *v = -v.clone();
            }
        }
        row.insert(width + i, Rational::one());
        rhs.push(if flip { -b } else { b });
        rows.push(row);
        signs.push(flip);
    }
    let mut obj = Row::new();
    let mut value = Rational::zero();
    for (row, b) in rows.iter().zip(&rhs) {
        for (j, a) in row {
            if *j < width {
                let e = obj.entry(*j).or_insert_with(Rational::zero);
                *e -= a;
            }
        }
        value += b;
    }
    obj.retain(|_, v| !v.is_zero());
    let basis = (0..rows.len()).map(|i| width + i).collect();
    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        obj,
        value,
    };
    let limit = width + cons.len();
    tab.run(limit);
    if tab.value.is_positive() {
        let multipliers = (0..cons.len())
            .filter_map(|i| {
                let d = tab.obj.get(&(width + i)).cloned().unwrap_or_else(Rational::zero);
                let pi = Rational::one() - d;
                let y = if signs[i] { pi } else { -pi };
                (!y.is_zero()).then_some((i, y))
            })
            .collect();
        return Err(FarkasCertificate { multipliers });
    }
    Ok(Phase1 { tab, width })
}

fn read_assignment(tab: &Tableau, nv: usize) -> Assignment {
    let mut a = Assignment(alloc::vec![Rational::zero(); nv]);
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < nv {
            a.set(b, tab.rhs[i].clone());
        }
    }
    a
}

/// Phase-1 simplex: a point satisfying every constraint with all variables
/// nonnegative, or a Farkas certificate of infeasibility.
pub fn solve_feasible(sys: &ConstraintSystem) -> Solution {
    match phase1(sys) {
        Ok(p) => Solution::Feasible(read_assignment(&p.tab, sys.vars().len())),
        Err(cert) => Solution::Infeasible(cert),
    }
}

/// Minimises `objective` over the feasible region.
pub fn solve_minimize(sys: &ConstraintSystem, objective: &LinExpr) -> Optimum {
    let Phase1 { mut tab, width } = match phase1(sys) {
        Ok(p) => p,
        Err(cert) => return Optimum::Infeasible(cert),
    };
    // Drive remaining artificials out of the basis; rows that cannot pivot
    // are redundant.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= width {
            match tab.rows[i].keys().find(|j| **j < width).copied() {
                Some(q) => tab.pivot(i, q),
                None => {
                    tab.rows.remove(i);
                    tab.rhs.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    for row in &mut tab.rows {
        row.retain(|j, _| *j < width);
    }
    let cost = |j: usize| objective.coeff(j);
    let mut obj: Row = objective
        .terms()
        .iter()
        .filter(|(j, _)| **j < width)
        .map(|(j, c)| (*j, c.clone()))
        .collect();
    let mut value = Rational::zero();
    for (row, (&b, r)) in tab.rows.iter().zip(tab.basis.iter().zip(&tab.rhs)) {
        let cb = cost(b);
        if cb.is_zero() {
            continue;
        }
        axpy(&mut obj, &cb, row);
        value += &cb * r;
    }
    tab.obj = obj;
    tab.value = value;
    match tab.run(width) {
        Outcome::Unbounded => Optimum::Unbounded,
        Outcome::Optimal => {
            let assignment = read_assignment(&tab, sys.vars().len());
            let value = objective.eval(&assignment);
            Optimum::Optimal { assignment, value }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn c(q: i64) -> LinExpr {
        LinExpr::constant(int(q))
    }

    #[test]
    fn feasible_point() {
        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        let y = sys.fresh("y");
        sys.eq(&x + &y, c(3), "sum");
        sys.ge(x.clone(), c(1), "x");
        sys.ge(y.clone(), c(1), "y");
        let Solution::Feasible(a) = solve_feasible(&sys) else {
            panic!("expected feasible")
        };
        assert!(sys.validate(&a));
    }

    #[test]
    fn infeasible_with_certificate() {
        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        sys.le(x.clone(), c(1), "upper");
        sys.ge(x, c(2), "lower");
        let Solution::Infeasible(cert) = solve_feasible(&sys) else {
            panic!("expected infeasible")
        };
        assert!(cert.verify(&sys));
        assert_eq!(cert.provenance(&sys), alloc::vec!["upper", "lower"]);
    }

    #[test]
    fn constant_contradiction() {
        let mut sys = ConstraintSystem::new();
        sys.eq(c(0), c(3), "bad");
        let Solution::Infeasible(cert) = solve_feasible(&sys) else {
            panic!()
        };
        assert!(cert.verify(&sys));
    }

    #[test]
    fn minimisation() {
        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        sys.ge(x.clone(), c(5), "x");
        match solve_minimize(&sys, &x) {
            Optimum::Optimal { value, .. } => assert_eq!(value, int(5)),
            o => panic!("{o:?}"),
        }

        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        let y = sys.fresh("y");
        sys.ge(&x + &y.scale(&int(2)), c(4), "cover");
        match solve_minimize(&sys, &(&x + &y)) {
            Optimum::Optimal { value, assignment } => {
                assert_eq!(value, int(2));
                assert_eq!(assignment.0, alloc::vec![int(0), int(2)]);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn unbounded_reported() {
        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        sys.ge(x.clone(), c(1), "x");
        assert_eq!(solve_minimize(&sys, &(-&x)), Optimum::Unbounded);
    }

    #[test]
    fn perturbed_tight_point_fails_validation() {
        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        let y = sys.fresh("y");
        sys.eq(&x + &y, c(3), "sum");
        let Solution::Feasible(mut a) = solve_feasible(&sys) else {
            panic!()
        };
        let bumped = a.get(0) + int(1);
        a.set(0, bumped);
        assert!(!sys.validate(&a));
    }

    #[test]
    fn redundant_equalities() {
        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        let y = sys.fresh("y");
        sys.eq(&x + &y, c(2), "a");
        sys.eq(&x.scale(&int(2)) + &y.scale(&int(2)), c(4), "b");
        match solve_minimize(&sys, &(&x - &y)) {
            Optimum::Optimal { value, assignment } => {
                assert_eq!(value, int(-2));
                assert!(sys.validate(&assignment));
            }
            o => panic!("{o:?}"),
        }
    }

    fn arb_system() -> impl Strategy<Value = ConstraintSystem> {
        let row = (
            prop::collection::vec(-3i64..4, 3),
            0usize..3,
            -4i64..8,
            1i64..3,
        );
        prop::collection::vec(row, 1..6).prop_map(|rows| {
            let mut sys = ConstraintSystem::new();
            let vars: Vec<_> = (0..3).map(|i| sys.fresh(alloc::format!("v{i}"))).collect();
            for (k, (coeffs, rel, b, d)) in rows.into_iter().enumerate() {
                let mut e = LinExpr::zero();
                for (v, q) in vars.iter().zip(coeffs) {
                    e.add_assign(&v.scale(&int(q)));
                }
                let rel = [Rel::Eq, Rel::Le, Rel::Ge][rel];
                sys.add(e, rel, LinExpr::constant(ratio(b, d)), alloc::format!("row {k}"));
            }
            sys
        })
    }

    proptest! {
        #[test]
        fn verdicts_are_certified(sys in arb_system()) {
            match solve_feasible(&sys) {
                Solution::Feasible(a) => prop_assert!(sys.validate(&a)),
                Solution::Infeasible(cert) => prop_assert!(cert.verify(&sys)),
            }
            prop_assert_eq!(solve_feasible(&sys), solve_feasible(&sys));
        }

        #[test]
        fn optima_are_feasible_and_no_worse_than_phase1(sys in arb_system(), w in prop::collection::vec(0i64..4, 3)) {
            let mut obj = LinExpr::zero();
            for (i, q) in w.iter().enumerate() {
                obj.add_term(i, &int(*q));
            }
            match (solve_minimize(&sys, &obj), solve_feasible(&sys)) {
                (Optimum::Optimal { assignment, value }, Solution::Feasible(p)) => {
                    prop_assert!(sys.validate(&assignment));
                    prop_assert!(value <= obj.eval(&p));
                }
                (Optimum::Infeasible(c), Solution::Infeasible(_)) => prop_assert!(c.verify(&sys)),
                (o, s) => prop_assert!(false, "disagreement: {:?} vs {:?}", o, s),
            }
        }
    }
}
