//! Resource annotations: nonnegative rational vectors, annotated types and
//! declarations, and constructor annotation schemes closed under
//! superposition.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{render, Rational};
use crate::terms::{BaseType, Name, SimpleDecl, SimpleSignature, SymbolKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotError {
    #[error("annotation entries must be nonnegative, found {0}")]
    Negative(String),
    #[error("constructor `{symbol}` has degree {degree}, cannot instantiate an annotation of length {length}")]
    DegreeExceeded {
        symbol: Name,
        degree: usize,
        length: usize,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Name),
    #[error("`{0}` is not a constructor")]
    NotConstructor(Name),
    #[error("`{0}` is not a defined symbol")]
    NotDefined(Name),
    #[error("no annotation scheme for constructor `{0}`")]
    MissingScheme(Name),
    #[error("declaration of `{symbol}` does not match its simple type")]
    Shape { symbol: Name },
    #[error("`{symbol}` already has a declaration with result annotation {result}")]
    DuplicateResult { symbol: Name, result: ResourceVec },
    #[error("no declaration of `{symbol}` covers result annotation {result}")]
    NoDecl { symbol: Name, result: ResourceVec },
}

/// A vector of nonnegative rationals, kept with trailing zeros trimmed so
/// that `()` and `(0)` coincide.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ResourceVec(Vec<Rational>);

impl ResourceVec {
    pub fn new(entries: Vec<Rational>) -> Result<Self, AnnotError> {
        if let Some(bad) = entries.iter().find(|e| e < &&Rational::zero()) {
            return Err(AnnotError::Negative(render(bad)));
        }
        let mut v = ResourceVec(entries);
        v.trim();
        Ok(v)
    }

    pub fn zero() -> Self {
        ResourceVec(Vec::new())
    }

    /// Panics on negative entries; for literals.
    pub fn from_ints(entries: &[i64]) -> Self {
        Self::new(entries.iter().map(|&e| Rational::from_integer(e.into())).collect())
            .expect("nonnegative literal")
    }

    /// The unit vector `e_j = (0, …, 0, 1)` of length `j ≥ 1`.
    pub fn unit(j: usize) -> Self {
        assert!(j >= 1);
        let mut v = vec![Rational::zero(); j];
        v[j - 1] = Rational::one();
        ResourceVec(v)
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    /// Length after trimming.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// The `i`-th entry, 0-based, reading zero past the end.
    pub fn get(&self, i: usize) -> Rational {
        self.0.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        let mut v = ResourceVec((0..n).map(|i| self.get(i) + other.get(i)).collect());
        v.trim();
        v
    }

    pub fn scale(&self, lambda: &Rational) -> Result<Self, AnnotError> {
        if lambda < &Rational::zero() {
            return Err(AnnotError::Negative(render(lambda)));
        }
        let mut v = ResourceVec(self.0.iter().map(|e| e * lambda).collect());
        v.trim();
        Ok(v)
    }

    pub fn leq(&self, other: &Self) -> bool {
        (0..self.len().max(other.len())).all(|i| self.get(i) <= other.get(i))
    }

    /// The additive shift `◁(p1, …, pk) = (p1 + p2, …, p(k-1) + pk, pk)`.
    pub fn shift(&self) -> Self {
        let k = self.len();
        ResourceVec((0..k).map(|i| self.get(i) + self.get(i + 1)).collect())
    }

    /// `(p1, q1, p2, q2, …)`.
    pub fn interleave(&self, other: &Self) -> Self {
        let n = self.len().max(other.len());
        let mut v = Vec::with_capacity(2 * n);
        for i in 0..n {
            v.push(self.get(i));
            v.push(other.get(i));
        }
        let mut v = ResourceVec(v);
        v.trim();
        v
    }

    /// `⋄p = p1`.
    pub fn first(&self) -> Rational {
        self.get(0)
    }

    pub fn max_entry(&self) -> Rational {
        self.0.iter().max().cloned().unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for ResourceVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&render(e))?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for ResourceVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AnnotatedType {
    pub base: BaseType,
    pub annot: ResourceVec,
}

impl AnnotatedType {
    pub fn new(base: BaseType, annot: ResourceVec) -> Self {
        AnnotatedType { base, annot }
    }
}

impl fmt::Display for AnnotatedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.base, self.annot)
    }
}

/// `⟨A1^u1 × … × An^un → C^v, p⟩`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AnnotatedDecl {
    pub args: Vec<AnnotatedType>,
    pub result: AnnotatedType,
    pub cost: Rational,
}

impl AnnotatedDecl {
    pub fn simple(&self) -> SimpleDecl {
        SimpleDecl::new(
            self.args.iter().map(|a| a.base.clone()).collect(),
            self.result.base.clone(),
        )
    }
}

impl fmt::Display for AnnotatedDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.args.iter().enumerate() {
            f.write_str(if i == 0 { "" } else { " × " })?;
            a.fmt(f)?;
        }
        if !self.args.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "→ {}, {}", self.result, render(&self.cost))
    }
}

/// The annotation of a constructor at unit result `e_j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BasisEntry {
    pub args: Vec<ResourceVec>,
    pub cost: Rational,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Preset {
    /// Recursive arguments receive `◁p`, the others `()`, cost `⋄p`.
    Shift,
    /// Every annotation and cost is zero.
    Zero,
    /// The result annotation is dealt round-robin onto the arguments, cost 0.
    Interleave,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Shift => "shift",
            Preset::Zero => "zero",
            Preset::Interleave => "interleave",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "shift" => Some(Preset::Shift),
            "zero" => Some(Preset::Zero),
            "interleave" => Some(Preset::Interleave),
            _ => None,
        }
    }
}

/// A family of constructor declarations determined by its values at the
/// unit result annotations `e_1, …, e_K`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConstructorScheme {
    pub symbol: Name,
    pub decl: SimpleDecl,
    pub basis: Vec<BasisEntry>,
}

impl ConstructorScheme {
    pub fn new(symbol: Name, decl: SimpleDecl, basis: Vec<BasisEntry>) -> Result<Self, AnnotError> {
        for b in &basis {
            if b.args.len() != decl.arity() {
                return Err(AnnotError::Shape { symbol });
            }
            if b.cost < Rational::zero() {
                return Err(AnnotError::Negative(render(&b.cost)));
            }
        }
        Ok(ConstructorScheme { symbol, decl, basis })
    }

    pub fn preset(preset: Preset, symbol: Name, decl: SimpleDecl, degree: usize) -> Self {
        let n = decl.arity();
        let basis = (1..=degree)
            .map(|j| match preset {
                Preset::Zero => BasisEntry {
                    args: vec![ResourceVec::zero(); n],
                    cost: Rational::zero(),
                },
                Preset::Shift => BasisEntry {
                    args: decl
                        .args
                        .iter()
                        .map(|a| {
                            if a == &decl.result {
                                ResourceVec::unit(j).shift()
                            } else {
                                ResourceVec::zero()
                            }
                        })
                        .collect(),
                    cost: if j == 1 { Rational::one() } else { Rational::zero() },
                },
                Preset::Interleave => {
                    let mut args = vec![ResourceVec::zero(); n];
                    if let Some(slot) = (j - 1).checked_rem(n) {
                        args[slot] = ResourceVec::unit((j - 1) / n + 1);
                    }
                    BasisEntry {
                        args,
                        cost: Rational::zero(),
                    }
                }
            })
            .collect();
        ConstructorScheme { symbol, decl, basis }
    }

    pub fn degree(&self) -> usize {
        self.basis.len()
    }

    /// `Σ_j result_j · basis(e_j)`.
    pub fn instantiate(&self, result: &ResourceVec) -> Result<AnnotatedDecl, AnnotError> {
        if result.len() > self.degree() {
            return Err(AnnotError::DegreeExceeded {
                symbol: self.symbol.clone(),
                degree: self.degree(),
                length: result.len(),
            });
        }
        let mut args = vec![ResourceVec::zero(); self.decl.arity()];
        let mut cost = Rational::zero();
        for (j, r) in result.entries().iter().enumerate() {
            let b = &self.basis[j];
            for (acc, u) in args.iter_mut().zip(&b.args) {
                *acc = acc.add(&u.scale(r).expect("entries are nonnegative"));
            }
            cost += r * &b.cost;
        }
        Ok(AnnotatedDecl {
            args: args
                .into_iter()
                .zip(&self.decl.args)
                .map(|(a, t)| AnnotatedType::new(t.clone(), a))
                .collect(),
            result: AnnotatedType::new(self.decl.result.clone(), result.clone()),
            cost,
        })
    }
}

/// The annotated lifting of a simple signature.
#[derive(Clone, Debug)]
pub struct AnnotatedSignature {
    pub simple: SimpleSignature,
    schemes: BTreeMap<Name, ConstructorScheme>,
    decls: BTreeMap<Name, Vec<AnnotatedDecl>>,
}

impl AnnotatedSignature {
    pub fn new(simple: SimpleSignature) -> Self {
        AnnotatedSignature {
            simple,
            schemes: BTreeMap::new(),
            decls: BTreeMap::new(),
        }
    }

    pub fn set_scheme(&mut self, scheme: ConstructorScheme) -> Result<(), AnnotError> {
        match self.simple.lookup(scheme.symbol.as_str()) {
            Some((SymbolKind::Constructor, d)) if d == &scheme.decl => {}
            Some((SymbolKind::Constructor, _)) => {
                return Err(AnnotError::Shape {
                    symbol: scheme.symbol,
                })
            }
            Some(_) => return Err(AnnotError::NotConstructor(scheme.symbol)),
            None => return Err(AnnotError::UnknownSymbol(scheme.symbol)),
        }
        self.schemes.insert(scheme.symbol.clone(), scheme);
        Ok(())
    }

    /// Installs `preset` at `degree` for constructor `name`.
    pub fn set_preset(&mut self, name: &str, preset: Preset, degree: usize) -> Result<(), AnnotError> {
        let decl = match self.simple.lookup(name) {
            Some((SymbolKind::Constructor, d)) => d.clone(),
            Some(_) => return Err(AnnotError::NotConstructor(Name::new(name))),
            None => return Err(AnnotError::UnknownSymbol(Name::new(name))),
        };
        self.set_scheme(ConstructorScheme::preset(preset, Name::new(name), decl, degree))
    }

    pub fn add_decl(&mut self, name: &str, decl: AnnotatedDecl) -> Result<(), AnnotError> {
        let symbol = Name::new(name);
        match self.simple.lookup(name) {
            Some((SymbolKind::Defined, d)) if d == &decl.simple() => {}
            Some((SymbolKind::Defined, _)) => return Err(AnnotError::Shape { symbol }),
            Some(_) => return Err(AnnotError::NotDefined(symbol)),
            None => return Err(AnnotError::UnknownSymbol(symbol)),
        }
        if decl.cost < Rational::zero() {
            return Err(AnnotError::Negative(render(&decl.cost)));
        }
        let list = self.decls.entry(symbol.clone()).or_default();
        if list.iter().any(|d| d.result.annot == decl.result.annot) {
            return Err(AnnotError::DuplicateResult {
                symbol,
                result: decl.result.annot,
            });
        }
        list.push(decl);
        Ok(())
    }

    pub fn scheme(&self, name: &Name) -> Option<&ConstructorScheme> {
        self.schemes.get(name)
    }

    pub fn schemes(&self) -> &BTreeMap<Name, ConstructorScheme> {
        &self.schemes
    }

    pub fn decls(&self, name: &Name) -> &[AnnotatedDecl] {
        self.decls.get(name).map_or(&[], Vec::as_slice)
    }

    pub fn all_decls(&self) -> &BTreeMap<Name, Vec<AnnotatedDecl>> {
        &self.decls
    }

    /// The unique declaration of constructor `c` at `result`.
    pub fn instantiate(&self, c: &Name, result: &ResourceVec) -> Result<AnnotatedDecl, AnnotError> {
        self.schemes
            .get(c)
            .ok_or_else(|| AnnotError::MissingScheme(c.clone()))?
            .instantiate(result)
    }

    /// The declaration of defined `f` with exactly this result annotation.
    pub fn decl_for(&self, f: &Name, result: &ResourceVec) -> Option<&AnnotatedDecl> {
        self.decls(f).iter().find(|d| &d.result.annot == result)
    }

    /// The declaration of `f` serving a demand for `result`: the exact match,
    /// otherwise the cheapest declaration whose result dominates it.
    pub fn select_decl(&self, f: &Name, result: &ResourceVec) -> Result<&AnnotatedDecl, AnnotError> {
        if let Some(d) = self.decl_for(f, result) {
            return Ok(d);
        }
        let mut best: Option<&AnnotatedDecl> = None;
        for d in self.decls(f) {
            if result.leq(&d.result.annot) && best.is_none_or(|b| d.cost < b.cost) {
                best = Some(d);
            }
        }
        best.ok_or_else(|| AnnotError::NoDecl {
            symbol: f.clone(),
            result: result.clone(),
        })
    }

    /// Constructors lacking a scheme.
    pub fn missing_schemes(&self) -> Vec<Name> {
        self.simple
            .constructors()
            .keys()
            .filter(|c| !self.schemes.contains_key(*c))
            .cloned()
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::terms::fixtures::*;

    pub fn ty(base: BaseType, annot: &[i64]) -> AnnotatedType {
        AnnotatedType::new(base, ResourceVec::from_ints(annot))
    }

    pub fn decl(args: &[AnnotatedType], result: AnnotatedType, cost: i64) -> AnnotatedDecl {
        AnnotatedDecl {
            args: args.to_vec(),
            result,
            cost: Rational::from_integer(cost.into()),
        }
    }

    /// The queue signature annotated with linear potential.
    pub fn queue_annotated() -> AnnotatedSignature {
        let mut sig = AnnotatedSignature::new(queue_signature());
        for c in ["zero", "errorHead", "nil"] {
            sig.set_preset(c, Preset::Zero, 1).unwrap();
        }
        sig.set_preset("errorTail", Preset::Zero, 2).unwrap();
        sig.set_preset("s", Preset::Shift, 1).unwrap();
        sig.set_preset("cons", Preset::Shift, 1).unwrap();
        sig.set_preset("queue", Preset::Interleave, 2).unwrap();
        let q01 = || ty(queue(), &[0, 1]);
        sig.add_decl("checkF", decl(&[q01()], q01(), 3)).unwrap();
        sig.add_decl("tail", decl(&[q01()], q01(), 4)).unwrap();
        sig.add_decl("head", decl(&[q01()], ty(nat(), &[]), 1)).unwrap();
        sig.add_decl("rev'", decl(&[ty(list(), &[1]), ty(list(), &[])], ty(list(), &[]), 1))
            .unwrap();
        sig.add_decl("rev", decl(&[ty(list(), &[1])], ty(list(), &[]), 2)).unwrap();
        sig.add_decl("snoc", decl(&[q01(), ty(nat(), &[])], q01(), 5)).unwrap();
        sig.add_decl("enq", decl(&[ty(nat(), &[6])], q01(), 1)).unwrap();
        sig
    }
}
