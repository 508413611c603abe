use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{generic, lines, Cursor, SyntaxError, Tok};
use crate::terms::{BaseType, Name, SimpleDecl, SimpleSignature, SymbolKind, Term, Trs, Var};

fn type_list(cur: &mut Cursor, sig: &SimpleSignature) -> Result<SimpleDecl, SyntaxError> {
    cur.expect(&Tok::Colon)?;
    let mut args = Vec::new();
    while !matches!(cur.peek(), Some(Tok::Arrow) | None) {
        args.push(known_type(cur, sig)?);
    }
    cur.expect(&Tok::Arrow)?;
    let result = known_type(cur, sig)?;
    cur.finish()?;
    Ok(SimpleDecl::new(args, result))
}

pub(crate) fn known_type(cur: &mut Cursor, sig: &SimpleSignature) -> Result<BaseType, SyntaxError> {
    let (t, col) = cur.ident()?;
    let ty = BaseType::new(&t);
    if !sig.has_type(&ty) {
        return Err(cur.error_at(col, format!("unknown type `{t}`")));
    }
    Ok(ty)
}

struct RuleParser<'a> {
    sig: &'a SimpleSignature,
    vars: BTreeMap<String, BaseType>,
}

impl RuleParser<'_> {
    fn term(&mut self, cur: &mut Cursor, expected: Option<&BaseType>, lhs: bool) -> Result<Term, SyntaxError> {
        let (name, col) = cur.ident()?;
        match self.sig.symbol(&name) {
            Some(sym) => {
                let decl = self.sig.decl(&sym).expect("declared").clone();
                if let Some(e) = expected {
                    if e != &decl.result {
                        return Err(cur.error_at(col, format!("`{name}` has type {}, expected {e}", decl.result)));
                    }
                }
                let mut args = Vec::new();
                if cur.eat(&Tok::LParen) && !cur.eat(&Tok::RParen) {
                    loop {
                        if args.len() >= decl.arity() {
                            return Err(cur.error(format!("`{name}` takes {} arguments", decl.arity())));
                        }
                        let t = self.term(cur, Some(&decl.args[args.len()]), lhs)?;
                        args.push(t);
                        if cur.eat(&Tok::RParen) {
                            break;
                        }
                        cur.expect(&Tok::Comma)?;
                    }
                }
                if args.len() != decl.arity() {
                    return Err(cur.error_at(
                        col,
                        format!("`{name}` takes {} arguments, given {}", decl.arity(), args.len()),
                    ));
                }
                Ok(Term::App(sym, args))
            }
            None => {
                if cur.peek() == Some(&Tok::LParen) {
                    return Err(cur.error_at(col, format!("unknown symbol `{name}`")));
                }
                let Some(ty) = expected else {
                    return Err(cur.error_at(col, format!("cannot determine the type of variable `{name}`")));
                };
                match self.vars.get(&name) {
                    Some(t) if t != ty => {
                        return Err(cur.error_at(col, format!("variable `{name}` used at {t} and {ty}")));
                    }
                    None if !lhs => {
                        return Err(cur.error_at(col, format!("variable `{name}` does not occur on the left-hand side")));
                    }
                    _ => {}
                }
                self.vars.insert(name.clone(), ty.clone());
                Ok(Term::Var(Var::new(&name, ty)))
            }
        }
    }

    fn rule(&mut self, cur: &mut Cursor) -> Result<(Term, Term), SyntaxError> {
        let col = cur.column();
        let lhs = self.term(cur, None, true)?;
        match lhs.root() {
            Some(f) if f.is_defined() => {}
            _ => return Err(cur.error_at(col, "the left-hand side must be rooted at a defined symbol")),
        }
        cur.expect(&Tok::Arrow)?;
        let ty = self.sig.type_of(&lhs).expect("parsed at known types");
        let rhs = self.term(cur, Some(&ty), false)?;
        cur.finish()?;
        Ok((lhs, rhs))
    }
}

/// Parses a `.trs` file: `types`, `ctor`, `fn` and `rule` lines, `#`
/// comments. Rules may precede the symbols they use.
pub fn parse_trs(src: &str) -> Result<Trs, SyntaxError> {
    let mut sig: Option<SimpleSignature> = None;
    let mut rules = Vec::new();
    for (lineno, line) in lines(src) {
        let mut cur = Cursor::new(line, lineno)?;
        if cur.is_empty() {
            continue;
        }
        let (kw, col) = cur.ident()?;
        match kw.as_str() {
            "types" => {
                if sig.is_some() {
                    return Err(cur.error_at(col, "`types` given twice"));
                }
                let mut types = Vec::new();
                while !cur.at_end() {
                    types.push(BaseType::new(&cur.ident()?.0));
                }
                sig = Some(SimpleSignature::new(types).map_err(|e| cur.error_at(col, e.to_string()))?);
            }
            "ctor" | "fn" => {
                let s = sig
                    .as_mut()
                    .ok_or_else(|| cur.error_at(col, "symbols must follow the `types` line"))?;
                let (name, ncol) = cur.ident()?;
                let decl = type_list(&mut cur, s)?;
                let added = if kw == "ctor" {
                    s.add_constructor(&name, decl)
                } else {
                    s.add_defined(&name, decl)
                };
                added.map_err(|e| cur.error_at(ncol, e.to_string()))?;
            }
            "rule" => rules.push((lineno, line)),
            other => return Err(cur.error_at(col, format!("unknown directive `{other}`"))),
        }
    }
    let sig = sig.ok_or_else(|| generic(1, "missing `types` line"))?;
    let mut parsed = Vec::with_capacity(rules.len());
    for (lineno, line) in rules {
        let mut cur = Cursor::new(line, lineno)?;
        cur.keyword("rule")?;
        let mut p = RuleParser {
            sig: &sig,
            vars: BTreeMap::new(),
        };
        let (l, r) = p.rule(&mut cur)?;
        Trs::new(sig.clone(), alloc::vec![(l.clone(), r.clone())]).map_err(|e| generic(lineno, e))?;
        parsed.push((l, r));
    }
    Trs::new(sig, parsed).map_err(|e| generic(1, e))
}

/// Parses a single term on one line. Variables are allowed below the root
/// and take the type of their position; `expected` fixes the root type.
pub fn parse_term(src: &str, sig: &SimpleSignature, expected: Option<&BaseType>) -> Result<Term, SyntaxError> {
    let mut cur = Cursor::new(src, 1)?;
    let mut p = RuleParser {
        sig,
        vars: BTreeMap::new(),
    };
    let t = p.term(&mut cur, expected, true)?;
    cur.finish()?;
    Ok(t)
}

fn decl_line(out: &mut String, kw: &str, name: &Name, d: &SimpleDecl) {
    let _ = write!(out, "{kw} {name} :");
    for a in &d.args {
        let _ = write!(out, " {a}");
    }
    let _ = writeln!(out, " -> {}", d.result);
}

/// Constructors grouped by result type in declaration order of the types,
/// each group sorted by `(arity, name)`.
pub(crate) fn constructor_order(sig: &SimpleSignature) -> Vec<(Name, SimpleDecl)> {
    let mut out = Vec::new();
    for t in sig.types() {
        for (c, d) in sig.constructors_of(t) {
            out.push((c.name, d.clone()));
        }
    }
    out
}

/// The canonical text of `trs`.
pub fn print_trs(trs: &Trs) -> String {
    let sig = &trs.signature;
    let mut out = String::from("types");
    for t in sig.types() {
        let _ = write!(out, " {t}");
    }
    out.push_str("\n\n");
    for (c, d) in constructor_order(sig) {
        decl_line(&mut out, "ctor", &c, &d);
    }
    out.push('\n');
    for (f, d) in sig.defined_symbols() {
        debug_assert_eq!(f.kind, SymbolKind::Defined);
        decl_line(&mut out, "fn", &f.name, d);
    }
    if !trs.rules().is_empty() {
        out.push('\n');
    }
    for r in trs.rules() {
        let _ = writeln!(out, "rule {r}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::fixtures::*;

    #[test]
    fn queue_round_trip() {
        let trs = queue_trs();
        let text = print_trs(&trs);
        assert!(text.starts_with("types Nat List Queue\n\nctor errorHead : -> Nat\nctor zero : -> Nat\nctor s : Nat -> Nat\n"));
        assert!(text.contains("\nrule checkF(queue(nil, r)) -> queue(rev(r), nil)\n"));
        let back = parse_trs(&text).unwrap();
        assert_eq!(back.rules(), trs.rules());
        assert_eq!(back.signature, trs.signature);
        assert_eq!(print_trs(&back), text);
    }

    #[test]
    fn free_layout() {
        let src = "# queue fragment\n\
                   rule  rev(xs) -> rev'(xs, nil())   # deferred\n\
                   types Nat List\n\
                   ctor  zero  :            -> Nat\n\
                   ctor  nil   :            -> List\n\
                   ctor  cons  : Nat List   -> List\n\
                   fn    rev'  : List List  -> List\n\
                   fn    rev   : List       -> List\n";
        let trs = parse_trs(src).unwrap();
        assert_eq!(trs.rules().len(), 1);
        assert_eq!(trs.rules()[0].to_string(), "rev(xs) -> rev'(xs, nil)");
    }

    fn err(src: &str) -> SyntaxError {
        let head = "types Nat\nctor zero : -> Nat\nctor s : Nat -> Nat\nfn f : Nat -> Nat\nfn g : Nat Nat -> Nat\n";
        parse_trs(&format!("{head}{src}\n")).unwrap_err()
    }

    #[test]
    fn single_terms() {
        let sig = queue_signature();
        let t = parse_term("snoc(queue(nil, cons(zero, r)), s(zero))", &sig, None).unwrap();
        assert_eq!(t.to_string(), "snoc(queue(nil, cons(zero, r)), s(zero))");
        assert_eq!(t.vars().len(), 1);
        assert!(parse_term("s(zero)", &sig, Some(&nat())).unwrap().is_value());
        let e = parse_term("s(nil)", &sig, None).unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        assert!(parse_term("s(zero)", &sig, Some(&list())).is_err());
        assert!(parse_term("x", &sig, None).is_err());
        assert_eq!(parse_term("zero zero", &sig, None).unwrap_err().column, 6);
    }

    #[test]
    fn positioned_errors() {
        let e = err("rule f(x -> x");
        assert_eq!((e.line, e.column), (6, 10));
        assert!(e.message.contains("expected"));
        let e = err("rule f(x, x) -> x");
        assert_eq!((e.line, e.column), (6, 11));
        let e = err("rule h(x) -> x");
        assert_eq!((e.line, e.column), (6, 6));
        assert!(e.message.contains("unknown symbol"));
        let e = err("rule f(x) -> y");
        assert_eq!((e.line, e.column), (6, 14));
        let e = err("rule x -> x");
        assert_eq!(e.column, 6);
        let e = err("rule g(x) -> x");
        assert!(e.message.contains("takes 2 arguments"));
        let e = err("ctor t : Nat -> Bool");
        assert_eq!((e.line, e.column), (6, 17));
        let e = err("frob");
        assert!(e.message.contains("unknown directive"));
        let e = err("rule s(x) -> x");
        assert!(e.message.contains("defined symbol"));
        assert_eq!(e.to_string(), "6:6: the left-hand side must be rooted at a defined symbol");
    }
}
