//! Types, signatures, terms, substitutions and rules of typed constructor
//! rewrite systems.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

mod enumerate;
mod structure;

pub use enumerate::{basic_terms, Enumerator};
pub use structure::{
    check_completely_defined, check_structure, CompletenessReport, StructureReport,
};

/// An identifier: symbol, variable or type name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Names carrying a `$` are reserved for machine-generated variables.
    pub fn is_reserved(&self) -> bool {
        self.0.contains('$')
    }
}

impl core::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A data type from the finite set of base types.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BaseType(pub Name);

impl BaseType {
    pub fn new(s: &str) -> Self {
        BaseType(Name::new(s))
    }

    pub fn name(&self) -> &Name {
        &self.0
    }
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `A1 × … × An → C` without annotations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimpleDecl {
    pub args: Vec<BaseType>,
    pub result: BaseType,
}

impl SimpleDecl {
    pub fn new(args: Vec<BaseType>, result: BaseType) -> Self {
        SimpleDecl { args, result }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SymbolKind {
    Constructor,
    Defined,
}

/// A function symbol together with its kind, so that terms are
/// self-describing without a signature lookup.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Symbol {
    pub name: Name,
    pub kind: SymbolKind,
}

impl Symbol {
    pub fn is_constructor(&self) -> bool {
        self.kind == SymbolKind::Constructor
    }

    pub fn is_defined(&self) -> bool {
        self.kind == SymbolKind::Defined
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.name.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("unknown type `{0}`")]
    UnknownType(Name),
    #[error("duplicate type `{0}`")]
    DuplicateType(Name),
    #[error("the set of types is empty")]
    NoTypes,
    #[error("symbol `{0}` is declared twice")]
    DuplicateSymbol(Name),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(Name),
    #[error("symbol `{symbol}` expects {expected} arguments, got {found}")]
    Arity {
        symbol: Name,
        expected: usize,
        found: usize,
    },
    #[error("type mismatch at `{at}`: expected {expected}, found {found}")]
    TypeMismatch {
        at: String,
        expected: BaseType,
        found: BaseType,
    },
    #[error("variable `{0}` is unbound")]
    Unbound(Name),
    #[error("variable `{0}` is bound twice")]
    AlreadyBound(Name),
    #[error("rule {index}: {reason}")]
    BadRule { index: usize, reason: String },
}

/// The simple signature `F` over the base types `S`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimpleSignature {
    types: Vec<BaseType>,
    constructors: BTreeMap<Name, SimpleDecl>,
    defined: BTreeMap<Name, SimpleDecl>,
}

impl SimpleSignature {
    pub fn new(types: Vec<BaseType>) -> Result<Self, TermError> {
        if types.is_empty() {
            return Err(TermError::NoTypes);
        }
        let mut seen = BTreeSet::new();
        for ty in &types {
            if !seen.insert(ty.clone()) {
                return Err(TermError::DuplicateType(ty.0.clone()));
            }
        }
        Ok(SimpleSignature {
            types,
            ..Default::default()
        })
    }

    pub fn types(&self) -> &[BaseType] {
        &self.types
    }

    pub fn has_type(&self, ty: &BaseType) -> bool {
        self.types.contains(ty)
    }

    fn check_decl(&self, name: &Name, decl: &SimpleDecl) -> Result<(), TermError> {
        if self.constructors.contains_key(name) || self.defined.contains_key(name) {
            return Err(TermError::DuplicateSymbol(name.clone()));
        }
        for ty in decl.args.iter().chain(core::iter::once(&decl.result)) {
            if !self.has_type(ty) {
                return Err(TermError::UnknownType(ty.0.clone()));
            }
        }
        Ok(())
    }

    pub fn add_constructor(&mut self, name: &str, decl: SimpleDecl) -> Result<(), TermError> {
        let name = Name::new(name);
        self.check_decl(&name, &decl)?;
        self.constructors.insert(name, decl);
        Ok(())
    }

    pub fn add_defined(&mut self, name: &str, decl: SimpleDecl) -> Result<(), TermError> {
        let name = Name::new(name);
        self.check_decl(&name, &decl)?;
        self.defined.insert(name, decl);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<(SymbolKind, &SimpleDecl)> {
        if let Some(d) = self.constructors.get(name) {
            Some((SymbolKind::Constructor, d))
        } else {
            self.defined.get(name).map(|d| (SymbolKind::Defined, d))
        }
    }

    pub fn decl(&self, sym: &Symbol) -> Option<&SimpleDecl> {
        match sym.kind {
            SymbolKind::Constructor => self.constructors.get(&sym.name),
            SymbolKind::Defined => self.defined.get(&sym.name),
        }
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.lookup(name).map(|(kind, _)| Symbol {
            name: Name::new(name),
            kind,
        })
    }

    pub fn constructors(&self) -> &BTreeMap<Name, SimpleDecl> {
        &self.constructors
    }

    pub fn defined(&self) -> &BTreeMap<Name, SimpleDecl> {
        &self.defined
    }

    /// Constructors with result type `ty`, ordered by `(arity, name)`.
    pub fn constructors_of(&self, ty: &BaseType) -> Vec<(Symbol, &SimpleDecl)> {
        let mut out: Vec<_> = self
            .constructors
            .iter()
            .filter(|(_, d)| &d.result == ty)
            .map(|(n, d)| {
                (
                    Symbol {
                        name: n.clone(),
                        kind: SymbolKind::Constructor,
                    },
                    d,
                )
            })
            .collect();
        out.sort_by(|a, b| (a.1.arity(), &a.0.name).cmp(&(b.1.arity(), &b.0.name)));
        out
    }

    /// Defined symbols ordered by `(arity, name)`.
    pub fn defined_symbols(&self) -> Vec<(Symbol, &SimpleDecl)> {
        let mut out: Vec<_> = self
            .defined
            .iter()
            .map(|(n, d)| {
                (
                    Symbol {
                        name: n.clone(),
                        kind: SymbolKind::Defined,
                    },
                    d,
                )
            })
            .collect();
        out.sort_by(|a, b| (a.1.arity(), &a.0.name).cmp(&(b.1.arity(), &b.0.name)));
        out
    }

    /// Builds `name(args)`, checking arity and argument types.
    pub fn app(&self, name: &str, args: Vec<Term>) -> Result<Term, TermError> {
        let sym = self
            .symbol(name)
            .ok_or_else(|| TermError::UnknownSymbol(Name::new(name)))?;
        let t = Term::App(sym, args);
        self.type_of(&t)?;
        Ok(t)
    }

    pub fn constant(&self, name: &str) -> Result<Term, TermError> {
        self.app(name, Vec::new())
    }

    /// Simple type of `t`; fails on arity or argument type mismatches.
    pub fn type_of(&self, t: &Term) -> Result<BaseType, TermError> {
        match t {
            Term::Var(v) => {
                if self.has_type(&v.ty) {
                    Ok(v.ty.clone())
                } else {
                    Err(TermError::UnknownType(v.ty.0.clone()))
                }
            }
            Term::App(sym, args) => {
                let decl = self
                    .decl(sym)
                    .ok_or_else(|| TermError::UnknownSymbol(sym.name.clone()))?;
                if decl.arity() != args.len() {
                    return Err(TermError::Arity {
                        symbol: sym.name.clone(),
                        expected: decl.arity(),
                        found: args.len(),
                    });
                }
                for (arg, expected) in args.iter().zip(&decl.args) {
                    let found = self.type_of(arg)?;
                    if &found != expected {
                        return Err(TermError::TypeMismatch {
                            at: arg.to_string(),
                            expected: expected.clone(),
                            found,
                        });
                    }
                }
                Ok(decl.result.clone())
            }
        }
    }
}

/// A typed variable; its type is intrinsic (typed variable pools).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var {
    pub name: Name,
    pub ty: BaseType,
}

impl Var {
    pub fn new(name: &str, ty: &BaseType) -> Self {
        Var {
            name: Name::new(name),
            ty: ty.clone(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str, ty: &BaseType) -> Self {
        Term::Var(Var::new(name, ty))
    }

    /// Number of symbols (variable and function occurrences).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Ground constructor term.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(f, args) => f.is_constructor() && args.iter().all(Term::is_value),
        }
    }

    /// Constructor term, possibly with variables.
    pub fn is_constructor_term(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(f, args) => f.is_constructor() && args.iter().all(Term::is_constructor_term),
        }
    }

    /// Defined root applied to constructor terms.
    pub fn is_basic(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(f, args) => f.is_defined() && args.iter().all(Term::is_constructor_term),
        }
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out, false);
        out
    }

    /// Every variable occurrence, left to right.
    pub fn var_occurrences(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out, true);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>, all: bool) {
        match self {
            Term::Var(v) => {
                if all || !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out, all)),
        }
    }

    pub fn is_linear(&self) -> bool {
        let occ = self.var_occurrences();
        let distinct: BTreeSet<_> = occ.iter().map(|v| &v.name).collect();
        distinct.len() == occ.len()
    }

    /// Renames every variable `x` to `x<suffix>`.
    pub fn rename(&self, suffix: &str) -> Term {
        match self {
            Term::Var(v) => {
                let mut name = String::from(v.name.as_str());
                name.push_str(suffix);
                Term::Var(Var {
                    name: Name::new(&name),
                    ty: v.ty.clone(),
                })
            }
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(suffix)).collect()),
        }
    }

    /// Proper non-variable subterms, in pre-order.
    pub fn proper_subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        for a in self.args() {
            a.collect_subterms(&mut out);
        }
        out
    }

    fn collect_subterms<'a>(&'a self, out: &mut Vec<&'a Term>) {
        if let Term::App(_, args) = self {
            out.push(self);
            for a in args {
                a.collect_subterms(out);
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => v.name.fmt(f),
            Term::App(sym, args) => {
                sym.fmt(f)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        a.fmt(f)?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

/// A finite map from variable names to terms.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Substitution {
    bindings: BTreeMap<Name, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &Name) -> Option<&Term> {
        self.bindings.get(name)
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.bindings.contains_key(name)
    }

    /// Adds a binding; the domain must stay disjoint.
    pub fn bind(&mut self, name: Name, t: Term) -> Result<(), TermError> {
        if self.bindings.contains_key(&name) {
            return Err(TermError::AlreadyBound(name));
        }
        self.bindings.insert(name, t);
        Ok(())
    }

    pub fn with(mut self, name: &str, t: Term) -> Self {
        self.bindings.insert(Name::new(name), t);
        self
    }

    /// Disjoint union `self ⊎ other`.
    pub fn union(&self, other: &Substitution) -> Result<Substitution, TermError> {
        let mut out = self.clone();
        for (k, v) in &other.bindings {
            out.bind(k.clone(), v.clone())?;
        }
        Ok(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn is_normalised(&self) -> bool {
        self.bindings.values().all(Term::is_value)
    }

    /// `true` if `self` agrees with `other` on all of `other`'s domain.
    pub fn extends(&self, other: &Substitution) -> bool {
        other
            .bindings
            .iter()
            .all(|(k, v)| self.bindings.get(k) == Some(v))
    }

    pub fn restrict(&self, names: &[Name]) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(k, _)| names.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} ↦ {v}")?;
        }
        f.write_str("}")
    }
}

/// `t·s`; every variable of `t` must be bound.
pub fn apply_subst(t: &Term, s: &Substitution) -> Result<Term, TermError> {
    match t {
        Term::Var(v) => s
            .get(&v.name)
            .cloned()
            .ok_or_else(|| TermError::Unbound(v.name.clone())),
        Term::App(f, args) => Ok(Term::App(
            f.clone(),
            args.iter()
                .map(|a| apply_subst(a, s))
                .collect::<Result<_, _>>()?,
        )),
    }
}

/// Matches `pattern` against `subject`; the result binds exactly the
/// variables of `pattern`.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    match_into(pattern, subject, &mut s).then_some(s)
}

pub(crate) fn match_into(pattern: &Term, subject: &Term, s: &mut Substitution) -> bool {
    match (pattern, subject) {
        (Term::Var(v), _) => match s.bindings.get(&v.name) {
            Some(bound) => bound == subject,
            None => {
                s.bindings.insert(v.name.clone(), subject.clone());
                true
            }
        },
        (Term::App(f, ps), Term::App(g, ts)) => {
            f == g
                && ps.len() == ts.len()
                && ps.iter().zip(ts).all(|(p, t)| match_into(p, t, s))
        }
        _ => false,
    }
}

/// A typed rewrite rule `lhs → rhs`; `index` is 1-based.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
    pub index: usize,
}

impl Rule {
    pub fn root(&self) -> &Symbol {
        self.lhs.root().expect("rule lhs is an application")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// A typed term rewrite system.
#[derive(Clone, Debug)]
pub struct Trs {
    pub signature: SimpleSignature,
    rules: Vec<Rule>,
    by_root: BTreeMap<Name, Vec<usize>>,
}

impl Trs {
    /// Validates the typing conditions on every rule: the root of the lhs is
    /// defined, both sides have the same type and `Var(lhs) ⊇ Var(rhs)`.
    /// Left-linearity and the constructor discipline are reported by
    /// [`check_structure`] instead of being rejected here.
    pub fn new(signature: SimpleSignature, rules: Vec<(Term, Term)>) -> Result<Self, TermError> {
        let mut out = Vec::with_capacity(rules.len());
        let mut by_root: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
        for (i, (lhs, rhs)) in rules.into_iter().enumerate() {
            let index = i + 1;
            let bad = |reason: &str| TermError::BadRule {
                index,
                reason: String::from(reason),
            };
            match lhs.root() {
                Some(f) if f.is_defined() => {}
                _ => return Err(bad("the root of the left-hand side must be a defined symbol")),
            }
            let lt = signature.type_of(&lhs)?;
            let rt = signature.type_of(&rhs)?;
            if lt != rt {
                return Err(TermError::TypeMismatch {
                    at: rhs.to_string(),
                    expected: lt,
                    found: rt,
                });
            }
            let lvars = lhs.vars();
            for v in rhs.vars() {
                if !lvars.iter().any(|w| w.name == v.name) {
                    return Err(bad("right-hand side variable missing from the left-hand side"));
                }
            }
            for v in &lvars {
                if lvars.iter().any(|w| w.name == v.name && w.ty != v.ty) {
                    return Err(bad("variable used at two different types"));
                }
            }
            let root = lhs.root().unwrap().name.clone();
            by_root.entry(root).or_default().push(out.len());
            out.push(Rule { lhs, rhs, index });
        }
        Ok(Trs {
            signature,
            rules: out,
            by_root,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, index: usize) -> Option<&Rule> {
        self.rules.get(index.checked_sub(1)?)
    }

    /// Rules whose left-hand side is rooted at `f`, in listing order.
    pub fn rules_for(&self, f: &Name) -> impl Iterator<Item = &Rule> {
        self.by_root
            .get(f)
            .into_iter()
            .flat_map(move |ix| ix.iter().map(move |&i| &self.rules[i]))
    }
}
