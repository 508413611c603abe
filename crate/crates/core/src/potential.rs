//! Potentials of values, ground terms and substitutions, plus the checks
//! behind sharing and the polynomial-bound criterion.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::annot::{AnnotError, AnnotatedSignature, AnnotatedType, ResourceVec};
use crate::rational::Rational;
use crate::terms::{BaseType, Enumerator, Name, Substitution, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PotentialError {
    #[error("`{term}` does not have type {expected}")]
    TypeMismatch { term: String, expected: BaseType },
    #[error("`{0}` is not a value")]
    NotValue(String),
    #[error("`{0}` is not ground")]
    NotGround(String),
    #[error("variable `{0}` is not bound by the substitution")]
    Unbound(Name),
    #[error("annotations do not add up: {p1} + {p2} ≠ {p}")]
    BadSplit {
        p: ResourceVec,
        p1: ResourceVec,
        p2: ResourceVec,
    },
    #[error(transparent)]
    Annot(#[from] AnnotError),
}

/// A typing context `Γ`.
pub type Context = BTreeMap<Name, AnnotatedType>;

/// `Φ(v : A)` for a value `v`.
pub fn phi_value(sig: &AnnotatedSignature, v: &Term, at: &AnnotatedType) -> Result<Rational, PotentialError> {
    if !v.is_value() {
        return Err(PotentialError::NotValue(v.to_string()));
    }
    phi_ground(sig, v, at)
}

/// `Φ(t : A)` for a ground term: the declared cost of the root at `A` plus
/// the potentials of the arguments at the declared argument types. Defined
/// symbols use the declaration chosen by [`AnnotatedSignature::select_decl`].
pub fn phi_ground(sig: &AnnotatedSignature, t: &Term, at: &AnnotatedType) -> Result<Rational, PotentialError> {
    let mut total = Rational::zero();
    let mut stack: Vec<(&Term, AnnotatedType)> = alloc::vec![(t, at.clone())];
    while let Some((t, at)) = stack.pop() {
        let Term::App(f, args) = t else {
            return Err(PotentialError::NotGround(t.to_string()));
        };
        let decl = if f.is_constructor() {
            sig.instantiate(&f.name, &at.annot)?
        } else {
            sig.select_decl(&f.name, &at.annot)?.clone()
        };
        if decl.result.base != at.base || decl.args.len() != args.len() {
            return Err(PotentialError::TypeMismatch {
                term: t.to_string(),
                expected: at.base,
            });
        }
        total += &decl.cost;
        for (a, ty) in args.iter().zip(decl.args) {
            if !(ty.annot.is_zero() && a.is_value()) {
                stack.push((a, ty));
            }
        }
    }
    Ok(total)
}

/// `Φ(σ : Γ) = Σ_{x ∈ dom Γ} Φ(xσ : Γ(x))`.
pub fn phi_subst(sig: &AnnotatedSignature, sigma: &Substitution, ctx: &Context) -> Result<Rational, PotentialError> {
    let mut total = Rational::zero();
    for (x, ty) in ctx {
        let v = sigma.get(x).ok_or_else(|| PotentialError::Unbound(x.clone()))?;
        total += phi_value(sig, v, ty)?;
    }
    Ok(total)
}

/// Whether `Φ(v : A^p) = Φ(v : A^p1) + Φ(v : A^p2)`; requires `p1 + p2 = p`.
pub fn check_sharing(
    sig: &AnnotatedSignature,
    v: &Term,
    base: &BaseType,
    p: &ResourceVec,
    p1: &ResourceVec,
    p2: &ResourceVec,
) -> Result<bool, PotentialError> {
    if &p1.add(p2) != p {
        return Err(PotentialError::BadSplit {
            p: p.clone(),
            p1: p1.clone(),
            p2: p2.clone(),
        });
    }
    let phi = |q: &ResourceVec| phi_value(sig, v, &AnnotatedType::new(base.clone(), q.clone()));
    Ok(phi(p)? == phi(p1)? + phi(p2)?)
}

/// Why a constructor fails the polynomial-bound premise at `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PremiseFailure {
    /// The scheme cannot be instantiated at `w`.
    Degree { constructor: Name, error: AnnotError },
    /// The cost exceeds `max w`.
    Cost { constructor: Name, cost: Rational },
    /// The forced witness `r` for argument `arg` is too long or too large.
    Witness {
        constructor: Name,
        arg: usize,
        witness: ResourceVec,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundViolation {
    pub value: Term,
    pub phi: Rational,
    pub bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolytReport {
    pub base: BaseType,
    pub w: ResourceVec,
    /// `max w`.
    pub r: Rational,
    /// `|w|`.
    pub k: usize,
    pub premise_failures: Vec<PremiseFailure>,
    pub values_checked: usize,
    pub violations: Vec<BoundViolation>,
}

impl PolytReport {
    pub fn premise_holds(&self) -> bool {
        self.premise_failures.is_empty()
    }

    pub fn bound_holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the premise of the polynomial-bound criterion for every
/// constructor of `base` at `w`, then validates `Φ(v : base^w) ≤ r·|v|^k`
/// on all values up to `size_bound`, where `r = max w` and `k = |w|`.
///
/// The witness for argument `i` is forced: `r_ij = max(u_ij − w_j, 0)` is
/// the least vector with `u_i ≤ w + r_i`, and both side conditions are
/// monotone in `r_i`.
pub fn check_polyt(
    sig: &AnnotatedSignature,
    w: &ResourceVec,
    base: &BaseType,
    size_bound: usize,
) -> Result<PolytReport, PotentialError> {
    let r = w.max_entry();
    let k = w.len();
    let mut premise_failures = Vec::new();
    if k > 0 {
        for (c, _) in sig.simple.constructors_of(base) {
            let decl = match sig.instantiate(&c.name, w) {
                Ok(d) => d,
                Err(error) => {
                    premise_failures.push(PremiseFailure::Degree {
                        constructor: c.name.clone(),
                        error,
                    });
                    continue;
                }
            };
            if decl.cost > r {
                premise_failures.push(PremiseFailure::Cost {
                    constructor: c.name.clone(),
                    cost: decl.cost.clone(),
                });
            }
            for (i, u) in decl.args.iter().enumerate() {
                let n = u.annot.len().max(k);
                let forced = (0..n)
                    .map(|j| {
                        let d = u.annot.get(j) - w.get(j);
                        if d > Rational::zero() {
                            d
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect();
                let witness = ResourceVec::new(forced)?;
                if witness.len() >= k || witness.max_entry() > r {
                    premise_failures.push(PremiseFailure::Witness {
                        constructor: c.name.clone(),
                        arg: i + 1,
                        witness,
                    });
                }
            }
        }
    }
    let at = AnnotatedType::new(base.clone(), w.clone());
    let mut en = Enumerator::new(&sig.simple);
    let mut values_checked = 0;
    let mut violations = Vec::new();
    for v in en.values_up_to(base, size_bound) {
        values_checked += 1;
        let phi = phi_value(sig, &v, &at)?;
        let size = BigInt::from(v.size());
        let mut pow = BigInt::one();
        for _ in 0..k {
            pow *= &size;
        }
        let bound = &r * Rational::from_integer(pow);
        if phi > bound {
            violations.push(BoundViolation { value: v, phi, bound });
        }
    }
    Ok(PolytReport {
        base: base.clone(),
        w: w.clone(),
        r,
        k,
        premise_failures,
        values_checked,
        violations,
    })
}
