use std::fs;
use std::path::{Path, PathBuf};

use amortise_core::annot::{AnnotatedSignature, AnnotatedType};
use amortise_core::syntax::{parse_annotated_type, parse_sig, parse_term, parse_trs, SyntaxError};
use amortise_core::terms::{BaseType, Substitution, Term, Trs};
use thiserror::Error;

/// Failures that end a run with exit status 2.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{}", path.display(), source)]
    Syntax { path: PathBuf, source: SyntaxError },
    #[error("{flag}:{source}")]
    Flag { flag: &'static str, source: SyntaxError },
    #[error("{0}")]
    Usage(String),
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn trs(path: &Path) -> Result<Trs, InputError> {
    parse_trs(&read(path)?).map_err(|source| InputError::Syntax {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sig(path: &Path, trs: &Trs) -> Result<AnnotatedSignature, InputError> {
    let sig = parse_sig(&read(path)?, &trs.signature).map_err(|source| InputError::Syntax {
        path: path.to_path_buf(),
        source,
    })?;
    let missing = sig.missing_schemes();
    if !missing.is_empty() {
        let names: Vec<String> = missing.iter().map(ToString::to_string).collect();
        return Err(InputError::Usage(format!(
            "{}: no scheme for constructor(s) {}",
            path.display(),
            names.join(", ")
        )));
    }
    Ok(sig)
}

pub fn term(src: &str, trs: &Trs, ground: bool) -> Result<Term, InputError> {
    let t = parse_term(src, &trs.signature, None).map_err(|source| InputError::Flag { flag: "--term", source })?;
    if ground && !t.is_ground() {
        return Err(InputError::Usage(format!("--term: `{t}` is not ground")));
    }
    Ok(t)
}

pub fn annotated_type(src: &str, trs: &Trs) -> Result<AnnotatedType, InputError> {
    parse_annotated_type(src, &trs.signature).map_err(|source| InputError::Flag { flag: "--type", source })
}

/// `x=value; y=value`, each value parsed at the type `x` has in `t`.
pub fn subst(src: &str, t: &Term, trs: &Trs) -> Result<Substitution, InputError> {
    let vars = t.vars();
    let mut out = Substitution::new();
    for part in src.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| InputError::Usage(format!("--subst: expected `x=value`, got `{part}`")))?;
        let name = name.trim();
        let ty: &BaseType = &vars
            .iter()
            .find(|v| v.name.as_str() == name)
            .ok_or_else(|| InputError::Usage(format!("--subst: `{name}` does not occur in the term")))?
            .ty;
        let v = parse_term(value.trim(), &trs.signature, Some(ty))
            .map_err(|source| InputError::Flag { flag: "--subst", source })?;
        if !v.is_value() {
            return Err(InputError::Usage(format!("--subst: `{v}` is not a value")));
        }
        out = out.with(name, v);
    }
    for v in &vars {
        if !out.contains(&v.name) {
            return Err(InputError::Usage(format!("--subst: no value for `{}`", v.name)));
        }
    }
    Ok(out)
}
