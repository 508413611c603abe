use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{BaseType, SimpleSignature, Symbol, SymbolKind, Term};

/// Enumerates values and ground terms by exact size, memoised per
/// `(type, size)`.
pub struct Enumerator<'a> {
    sig: &'a SimpleSignature,
    values: BTreeMap<(BaseType, usize), Vec<Term>>,
    ground: BTreeMap<(BaseType, usize), Vec<Term>>,
}

impl<'a> Enumerator<'a> {
    pub fn new(sig: &'a SimpleSignature) -> Self {
        Enumerator {
            sig,
            values: BTreeMap::new(),
            ground: BTreeMap::new(),
        }
    }

    /// Values of type `ty` with exactly `size` symbols.
    pub fn values_of_size(&mut self, ty: &BaseType, size: usize) -> Vec<Term> {
        self.exact(ty, size, false)
    }

    /// Ground terms (defined symbols allowed) of exactly `size` symbols.
    pub fn ground_of_size(&mut self, ty: &BaseType, size: usize) -> Vec<Term> {
        self.exact(ty, size, true)
    }

    pub fn values_up_to(&mut self, ty: &BaseType, max: usize) -> Vec<Term> {
        (1..=max).flat_map(|n| self.values_of_size(ty, n)).collect()
    }

    pub fn ground_up_to(&mut self, ty: &BaseType, max: usize) -> Vec<Term> {
        (1..=max).flat_map(|n| self.ground_of_size(ty, n)).collect()
    }

    fn exact(&mut self, ty: &BaseType, size: usize, with_defined: bool) -> Vec<Term> {
        if size == 0 {
            return Vec::new();
        }
        let key = (ty.clone(), size);
        let memo = if with_defined { &self.ground } else { &self.values };
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let mut heads: Vec<(Symbol, Vec<BaseType>)> = self
            .sig
            .constructors_of(ty)
            .into_iter()
            .map(|(s, d)| (s, d.args.clone()))
            .collect();
        if with_defined {
            heads.extend(
                self.sig
                    .defined_symbols()
                    .into_iter()
                    .filter(|(_, d)| &d.result == ty)
                    .map(|(s, d)| (s, d.args.clone())),
            );
        }
        let mut out = Vec::new();
        for (sym, args) in heads {
            for tuple in self.tuples(&args, size - 1, with_defined) {
                out.push(Term::App(sym.clone(), tuple));
            }
        }
        let memo = if with_defined {
            &mut self.ground
        } else {
            &mut self.values
        };
        memo.insert(key, out.clone());
        out
    }

    /// All argument tuples of the given types whose sizes sum to `total`.
    fn tuples(&mut self, types: &[BaseType], total: usize, with_defined: bool) -> Vec<Vec<Term>> {
        match types.split_first() {
            None => {
                if total == 0 {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                }
            }
            Some((first, rest)) => {
                let mut out = Vec::new();
                if total < types.len() {
                    return out;
                }
                for n in 1..=total - rest.len() {
                    let heads = self.exact(first, n, with_defined);
                    if heads.is_empty() {
                        continue;
                    }
                    let tails = self.tuples(rest, total - n, with_defined);
                    for h in &heads {
                        for t in &tails {
                            let mut v = Vec::with_capacity(types.len());
                            v.push(h.clone());
                            v.extend(t.iter().cloned());
                            out.push(v);
                        }
                    }
                }
                out
            }
        }
    }

    /// Argument tuples of values with total size at most `max`.
    pub fn value_tuples_up_to(&mut self, types: &[BaseType], max: usize) -> Vec<Vec<Term>> {
        (types.len()..=max)
            .flat_map(|n| self.tuples(types, n, false))
            .collect()
    }
}

/// Basic terms `f(v1, …, vn)` with values `vi` and total size at most `max`,
/// ordered by size, then by symbol `(arity, name)`.
pub fn basic_terms(sig: &SimpleSignature, max: usize) -> Vec<Term> {
    let mut en = Enumerator::new(sig);
    let mut out = Vec::new();
    let defined = sig.defined_symbols();
    for size in 1..=max {
        for (sym, decl) in &defined {
            debug_assert_eq!(sym.kind, SymbolKind::Defined);
            for args in en.tuples(&decl.args, size - 1, false) {
                out.push(Term::App(sym.clone(), args));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn nat_values_one_per_size() {
        let sig = queue_signature();
        let mut en = Enumerator::new(&sig);
        // zero and errorHead at size 1, then s applied to each.
        for n in 1..8 {
            assert_eq!(en.values_of_size(&nat(), n).len(), 2);
        }
    }

    #[test]
    fn list_counts_match_direct_count() {
        // Lists over a two-element-per-size Nat: count by direct recursion.
        fn lists(n: usize) -> usize {
            if n == 1 {
                return 1;
            }
            (1..n - 1).map(|k| 2 * lists(n - 1 - k)).sum()
        }
        let sig = queue_signature();
        let mut en = Enumerator::new(&sig);
        for n in 1..9 {
            assert_eq!(en.values_of_size(&list(), n).len(), lists(n), "size {n}");
        }
    }

    #[test]
    fn sizes_are_exact_and_values_are_values() {
        let sig = queue_signature();
        let mut en = Enumerator::new(&sig);
        for ty in [nat(), list(), queue()] {
            for n in 1..7 {
                for v in en.values_of_size(&ty, n) {
                    assert_eq!(v.size(), n);
                    assert!(v.is_value());
                    assert_eq!(sig.type_of(&v).unwrap(), ty);
                }
                for g in en.ground_of_size(&ty, n) {
                    assert_eq!(g.size(), n);
                    assert!(g.is_ground());
                }
            }
        }
    }

    #[test]
    fn basic_terms_small() {
        let sig = queue_signature();
        let b = basic_terms(&sig, 2);
        let shown: Vec<_> = b.iter().map(alloc::string::ToString::to_string).collect();
        assert_eq!(
            shown,
            vec![
                "checkF(errorTail)",
                "enq(errorHead)",
                "enq(zero)",
                "head(errorTail)",
                "rev(nil)",
                "tail(errorTail)",
            ]
        );
        for t in basic_terms(&sig, 6) {
            assert!(t.is_basic() && t.is_ground() && t.size() <= 6);
        }
    }
}
