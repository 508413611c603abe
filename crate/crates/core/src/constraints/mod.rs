//! Linear constraints over nonnegative annotation unknowns and an exact
//! rational simplex solver.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{render, Rational};

mod simplex;

pub use simplex::{solve_feasible, solve_minimize, FarkasCertificate, Optimum, Solution};

pub type VarId = usize;

/// An unknown, always constrained to be nonnegative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotVar {
    pub id: VarId,
    pub origin: String,
}

/// `constant + Σ coeff·var`, never storing zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub constant: Rational,
    terms: BTreeMap<VarId, Rational>,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: Rational) -> Self {
        LinExpr {
            constant: q,
            terms: BTreeMap::new(),
        }
    }

    pub fn var(id: VarId) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(id, Rational::one());
        LinExpr {
            constant: Rational::zero(),
            terms,
        }
    }

    pub fn terms(&self) -> &BTreeMap<VarId, Rational> {
        &self.terms
    }

    pub fn coeff(&self, id: VarId) -> Rational {
        self.terms.get(&id).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    pub fn add_term(&mut self, id: VarId, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(id).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&id);
        }
    }

    pub fn add_assign(&mut self, other: &LinExpr) {
        self.constant += &other.constant;
        for (v, c) in &other.terms {
            self.add_term(*v, c);
        }
    }

    pub fn scale(&self, k: &Rational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
        }
    }

    pub fn eval(&self, a: &Assignment) -> Rational {
        let mut total = self.constant.clone();
        for (v, c) in &self.terms {
            total += c * a.get(*v);
        }
        total
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a LinExpr>) -> LinExpr {
        let mut out = LinExpr::zero();
        for e in items {
            out.add_assign(e);
        }
        out
    }
}

impl From<Rational> for LinExpr {
    fn from(q: Rational) -> Self {
        LinExpr::constant(q)
    }
}

impl Add<&LinExpr> for &LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub<&LinExpr> for &LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: &LinExpr) -> LinExpr {
        self + &(-rhs)
    }
}

impl Neg for &LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Rational) -> LinExpr {
        self.scale(k)
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let neg = c < &Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            match (first, neg) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if !mag.is_one() {
                write!(f, "{}*", render(&mag))?;
            }
            write!(f, "x{v}")?;
            first = false;
        }
        if first {
            return f.write_str(&render(&self.constant));
        }
        if !self.constant.is_zero() {
            let neg = self.constant < Rational::zero();
            let mag = if neg { -self.constant.clone() } else { self.constant.clone() };
            write!(f, " {} {}", if neg { "-" } else { "+" }, render(&mag))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub lhs: LinExpr,
    pub rel: Rel,
    pub rhs: LinExpr,
    pub provenance: String,
}

impl Constraint {
    pub fn holds(&self, a: &Assignment) -> bool {
        let (l, r) = (self.lhs.eval(a), self.rhs.eval(a));
        match self.rel {
            Rel::Eq => l == r,
            Rel::Le => l <= r,
            Rel::Ge => l >= r,
        }
    }

    /// `lhs − rhs` split into its variable part and the right-hand constant:
    /// the constraint reads `expr rel bound`.
    pub fn normal_form(&self) -> (LinExpr, Rational) {
        let mut e = &self.lhs - &self.rhs;
        let bound = -core::mem::take(&mut e.constant);
        (e, bound)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}  # {}", self.lhs, self.rel, self.rhs, self.provenance)
    }
}

/// Values for every variable of a system, indexed by id.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Assignment(pub Vec<Rational>);

impl Assignment {
    pub fn get(&self, id: VarId) -> Rational {
        self.0.get(id).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, id: VarId, q: Rational) {
        if self.0.len() <= id {
            self.0.resize(id + 1, Rational::zero());
        }
        self.0[id] = q;
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConstraintSystem {
    vars: Vec<AnnotVar>,
    constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a fresh nonnegative unknown.
    pub fn fresh(&mut self, origin: impl Into<String>) -> LinExpr {
        let id = self.vars.len();
        self.vars.push(AnnotVar {
            id,
            origin: origin.into(),
        });
        LinExpr::var(id)
    }

    pub fn vars(&self) -> &[AnnotVar] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn add(&mut self, lhs: LinExpr, rel: Rel, rhs: LinExpr, provenance: impl Into<String>) {
        debug_assert!(lhs
            .terms()
            .keys()
            .chain(rhs.terms().keys())
            .all(|v| *v < self.vars.len()));
        self.constraints.push(Constraint {
            lhs,
            rel,
            rhs,
            provenance: provenance.into(),
        });
    }

    pub fn eq(&mut self, lhs: LinExpr, rhs: LinExpr, provenance: impl Into<String>) {
        self.add(lhs, Rel::Eq, rhs, provenance);
    }

    pub fn le(&mut self, lhs: LinExpr, rhs: LinExpr, provenance: impl Into<String>) {
        self.add(lhs, Rel::Le, rhs, provenance);
    }

    pub fn ge(&mut self, lhs: LinExpr, rhs: LinExpr, provenance: impl Into<String>) {
        self.add(lhs, Rel::Ge, rhs, provenance);
    }

    /// Appends `other`, shifting its variable ids past ours.
    pub fn extend(&mut self, other: &ConstraintSystem) {
        let off = self.vars.len();
        let shift = |e: &LinExpr| {
            let mut out = LinExpr::constant(e.constant.clone());
            for (v, c) in e.terms() {
                out.add_term(v + off, c);
            }
            out
        };
        for v in &other.vars {
            self.vars.push(AnnotVar {
                id: v.id + off,
                origin: v.origin.clone(),
            });
        }
        for c in &other.constraints {
            self.constraints.push(Constraint {
                lhs: shift(&c.lhs),
                rel: c.rel,
                rhs: shift(&c.rhs),
                provenance: c.provenance.clone(),
            });
        }
    }

    /// Indices of constraints the assignment violates, including negative
    /// variable values (reported as `usize::MAX`).
    pub fn violations(&self, a: &Assignment) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.holds(a))
            .map(|(i, _)| i)
            .collect();
        if (0..self.vars.len()).any(|v| a.get(v) < Rational::zero()) {
            out.push(usize::MAX);
        }
        out
    }

    /// Independent exact re-evaluation of every constraint.
    pub fn validate(&self, a: &Assignment) -> bool {
        self.violations(a).is_empty()
    }

    /// One constraint per line: `<lin-expr> <rel> <lin-expr>  # provenance`.
    pub fn dump(&self) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        for c in &self.constraints {
            let _ = writeln!(s, "{c}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use alloc::string::ToString;

    #[test]
    fn expressions() {
        let x = LinExpr::var(0);
        let y = LinExpr::var(1);
        let e = &(&x + &y.scale(&int(2))) - &LinExpr::constant(int(3));
        assert_eq!(e.to_string(), "x0 + 2*x1 - 3");
        assert_eq!((&e - &e).to_string(), "0");
        assert!((&x - &x).is_zero());
        assert_eq!((-&x).to_string(), "-x0");
    }

    #[test]
    fn dump_and_validate() {
        let mut sys = ConstraintSystem::new();
        let x = sys.fresh("x");
        let y = sys.fresh("y");
        sys.eq(&x + &y, LinExpr::constant(int(3)), "sum");
        sys.ge(x.clone(), LinExpr::constant(int(1)), "lower x");
        assert_eq!(sys.dump(), "x0 + x1 = 3  # sum\nx0 >= 1  # lower x\n");
        let good = Assignment(alloc::vec![int(1), int(2)]);
        assert!(sys.validate(&good));
        let bad = Assignment(alloc::vec![int(2), int(2)]);
        assert_eq!(sys.violations(&bad), alloc::vec![0]);
        let neg = Assignment(alloc::vec![int(4), int(-1)]);
        assert!(!sys.validate(&neg));
    }
}
