use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::trs::{constructor_order, known_type};
use super::{lines, Cursor, SyntaxError, Tok};
use crate::annot::{AnnotatedDecl, AnnotatedSignature, AnnotatedType, BasisEntry, ConstructorScheme, Preset, ResourceVec};
use crate::rational::render;
use crate::terms::{Name, SimpleSignature, SymbolKind};

fn annotation(cur: &mut Cursor) -> Result<ResourceVec, SyntaxError> {
    let col = cur.column();
    cur.expect(&Tok::LBracket)?;
    let mut entries = Vec::new();
    while !cur.eat(&Tok::RBracket) {
        entries.push(cur.rational()?);
    }
    ResourceVec::new(entries).map_err(|e| cur.error_at(col, e.to_string()))
}

fn annotated_type(cur: &mut Cursor, sig: &SimpleSignature) -> Result<AnnotatedType, SyntaxError> {
    let base = known_type(cur, sig)?;
    Ok(AnnotatedType::new(base, annotation(cur)?))
}

/// `T [..] , T [..] , …` up to (not including) `stop`, possibly empty.
fn type_seq(cur: &mut Cursor, sig: &SimpleSignature, stop: &str) -> Result<Vec<AnnotatedType>, SyntaxError> {
    let mut out = Vec::new();
    let at_stop = |c: &Cursor| match c.peek() {
        Some(Tok::Ident(s)) => s == stop,
        Some(Tok::Arrow) => stop == "->",
        _ => false,
    };
    if at_stop(cur) {
        return Ok(out);
    }
    loop {
        out.push(annotated_type(cur, sig)?);
        if !cur.eat(&Tok::Comma) {
            break;
        }
    }
    Ok(out)
}

/// Parses `T [..]` on one line.
pub fn parse_annotated_type(src: &str, sig: &SimpleSignature) -> Result<AnnotatedType, SyntaxError> {
    let mut cur = Cursor::new(src, 1)?;
    let t = annotated_type(&mut cur, sig)?;
    cur.finish()?;
    Ok(t)
}

struct Pending {
    name: Name,
    column: usize,
    line: usize,
    degree: usize,
    basis: Vec<BasisEntry>,
}

/// Parses a `.sig` file against the simple signature it annotates.
///
/// ```text
/// scheme cons deg 2
///   basis 1 : Nat [] , List [1] cost 1
///   basis 2 : Nat [] , List [1 1] cost 0
/// scheme s preset shift deg 1
/// fn snoc : Queue [0 1] , Nat [] -> Queue [0 1] cost 5
/// ```
pub fn parse_sig(src: &str, simple: &SimpleSignature) -> Result<AnnotatedSignature, SyntaxError> {
    let mut sig = AnnotatedSignature::new(simple.clone());
    let mut pending: Option<Pending> = None;
    let close = |p: Pending, sig: &mut AnnotatedSignature| -> Result<(), SyntaxError> {
        let err = |m: String| SyntaxError {
            line: p.line,
            column: p.column,
            message: m,
        };
        if p.basis.len() != p.degree {
            return Err(err(format!("scheme `{}` declares degree {} but lists {} basis entries", p.name, p.degree, p.basis.len())));
        }
        let decl = simple.constructors()[&p.name].clone();
        let scheme = ConstructorScheme::new(p.name, decl, p.basis).map_err(|e| err(e.to_string()))?;
        sig.set_scheme(scheme).map_err(|e| err(e.to_string()))
    };
    for (lineno, line) in lines(src) {
        let mut cur = Cursor::new(line, lineno)?;
        if cur.is_empty() {
            continue;
        }
        let (kw, col) = cur.ident()?;
        if kw == "basis" {
            let p = pending
                .as_mut()
                .ok_or_else(|| cur.error_at(col, "`basis` outside a `scheme` block"))?;
            let jcol = cur.column();
            let j = cur.natural()?;
            if j != p.basis.len() + 1 {
                return Err(cur.error_at(jcol, format!("expected basis {}", p.basis.len() + 1)));
            }
            cur.expect(&Tok::Colon)?;
            let args_col = cur.column();
            let args = type_seq(&mut cur, simple, "cost")?;
            let want = &simple.constructors()[&p.name];
            if args.len() != want.arity() || args.iter().zip(&want.args).any(|(a, b)| &a.base != b) {
                return Err(cur.error_at(args_col, format!("basis types do not match `{}`", p.name)));
            }
            cur.keyword("cost")?;
            let cost = cur.rational()?;
            cur.finish()?;
            p.basis.push(BasisEntry {
                args: args.into_iter().map(|a| a.annot).collect(),
                cost,
            });
            continue;
        }
        if let Some(p) = pending.take() {
            close(p, &mut sig)?;
        }
        match kw.as_str() {
            "scheme" => {
                let (name, ncol) = cur.ident()?;
                match simple.lookup(&name) {
                    Some((SymbolKind::Constructor, _)) => {}
                    Some(_) => return Err(cur.error_at(ncol, format!("`{name}` is not a constructor"))),
                    None => return Err(cur.error_at(ncol, format!("unknown symbol `{name}`"))),
                }
                if sig.scheme(&Name::new(&name)).is_some() {
                    return Err(cur.error_at(ncol, format!("second scheme for `{name}`")));
                }
                let preset = if matches!(cur.peek(), Some(Tok::Ident(s)) if s == "preset") {
                    cur.keyword("preset")?;
                    let (p, pcol) = cur.ident()?;
                    Some(Preset::from_name(&p).ok_or_else(|| cur.error_at(pcol, format!("unknown preset `{p}`")))?)
                } else {
                    None
                };
                cur.keyword("deg")?;
                let degree = cur.natural()?;
                cur.finish()?;
                match preset {
                    Some(p) => sig.set_preset(&name, p, degree).map_err(|e| cur.error_at(ncol, e.to_string()))?,
                    None => {
                        pending = Some(Pending {
                            name: Name::new(&name),
                            column: ncol,
                            line: lineno,
                            degree,
                            basis: Vec::new(),
                        })
                    }
                }
            }
            "fn" => {
                let (name, ncol) = cur.ident()?;
                cur.expect(&Tok::Colon)?;
                let args = type_seq(&mut cur, simple, "->")?;
                cur.expect(&Tok::Arrow)?;
                let result = annotated_type(&mut cur, simple)?;
                cur.keyword("cost")?;
                let cost = cur.rational()?;
                cur.finish()?;
                sig.add_decl(&name, AnnotatedDecl { args, result, cost })
                    .map_err(|e| cur.error_at(ncol, e.to_string()))?;
            }
            other => return Err(cur.error_at(col, format!("unknown directive `{other}`"))),
        }
    }
    if let Some(p) = pending.take() {
        close(p, &mut sig)?;
    }
    Ok(sig)
}

fn preset_of(s: &ConstructorScheme) -> Option<Preset> {
    [Preset::Zero, Preset::Shift, Preset::Interleave]
        .into_iter()
        .find(|p| ConstructorScheme::preset(*p, s.symbol.clone(), s.decl.clone(), s.degree()) == *s)
}

fn write_types(out: &mut String, tys: impl Iterator<Item = (String, ResourceVec)>) {
    for (i, (b, a)) in tys.enumerate() {
        let _ = write!(out, "{}{b} {a}", if i == 0 { " " } else { " , " });
    }
}

/// The canonical text of `sig`: schemes in constructor order (presets
/// collapsed to one line), then declarations by symbol.
pub fn print_sig(sig: &AnnotatedSignature) -> String {
    let mut out = String::new();
    for (c, _) in constructor_order(&sig.simple) {
        let Some(s) = sig.scheme(&c) else { continue };
        if let Some(p) = preset_of(s) {
            let _ = writeln!(out, "scheme {c} preset {} deg {}", p.name(), s.degree());
            continue;
        }
        let _ = writeln!(out, "scheme {c} deg {}", s.degree());
        for (j, b) in s.basis.iter().enumerate() {
            let _ = write!(out, "  basis {} :", j + 1);
            write_types(&mut out, b.args.iter().zip(&s.decl.args).map(|(a, t)| (t.to_string(), a.clone())));
            let _ = writeln!(out, " cost {}", render(&b.cost));
        }
    }
    for (f, _) in sig.simple.defined_symbols() {
        for d in sig.decls(&f.name) {
            let _ = write!(out, "fn {} :", f.name);
            write_types(&mut out, d.args.iter().map(|a| (a.base.to_string(), a.annot.clone())));
            let _ = writeln!(out, " -> {} {} cost {}", d.result.base, d.result.annot, render(&d.cost));
        }
    }
    out
}
