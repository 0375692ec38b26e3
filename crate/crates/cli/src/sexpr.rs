//! S-expression syntax for formulas.
//!
//! ```text
//! φ ::= (top) | (and φ φ) | (or φ φ) | (tensor "u" φ) | (homs "u" φ)
//!     | (m dia [a] φ) | (m o [φ]) | (m box_sup φ) | (m box_arrow φ)
//!     | (m exp [a] φ) | (m wgt a "r" φ)
//!     | (let ((d0 φ) ...) φ) | (ref d0)
//! ```

use std::collections::BTreeMap;

use qhm_core::engine::{Formula, FormulaRef};
use qhm_core::quantale::Quantale;
use qhm_core::systems::Modality;

use crate::error::CliError;
use crate::format::parse_rat_text;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    Str(String),
    List(Vec<Sexp>),
}

fn err(msg: impl Into<String>) -> CliError {
    CliError::Parse(msg.into())
}

pub fn read(text: &str) -> Result<Sexp, CliError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let value = read_at(&chars, &mut pos)?;
    skip_ws(&chars, &mut pos);
    if pos != chars.len() {
        return Err(err(format!("trailing input at offset {pos}")));
    }
    Ok(value)
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn read_at(chars: &[char], pos: &mut usize) -> Result<Sexp, CliError> {
    skip_ws(chars, pos);
    match chars.get(*pos) {
        None => Err(err("unexpected end of input")),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    None => return Err(err("unclosed `(`")),
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read_at(chars, pos)?),
                }
            }
        }
        Some(')') => Err(err(format!("unexpected `)` at offset {pos}"))),
        Some('"') => {
            *pos += 1;
            let start = *pos;
            while *pos < chars.len() && chars[*pos] != '"' {
                *pos += 1;
            }
            if *pos == chars.len() {
                return Err(err("unterminated string"));
            }
            let s: String = chars[start..*pos].iter().collect();
            *pos += 1;
            Ok(Sexp::Str(s))
        }
        Some(_) => {
            let start = *pos;
            while *pos < chars.len() && !chars[*pos].is_whitespace() && chars[*pos] != '(' && chars[*pos] != ')' {
                *pos += 1;
            }
            Ok(Sexp::Atom(chars[start..*pos].iter().collect()))
        }
    }
}

/// Parses a formula; constants are read against `q`.
pub fn parse_formula(text: &str, q: &Quantale) -> Result<FormulaRef, CliError> {
    let sexp = read(text)?;
    build(&sexp, q, &BTreeMap::new())
}

fn atom(s: &Sexp) -> Option<&str> {
    match s {
        Sexp::Atom(a) => Some(a),
        _ => None,
    }
}

fn build(s: &Sexp, q: &Quantale, env: &BTreeMap<String, FormulaRef>) -> Result<FormulaRef, CliError> {
    let items = match s {
        Sexp::List(items) if !items.is_empty() => items,
        _ => return Err(err("expected a parenthesised formula")),
    };
    let head = atom(&items[0]).ok_or_else(|| err("formula head must be a symbol"))?;
    let arity = |n: usize| -> Result<(), CliError> {
        if items.len() == n + 1 {
            Ok(())
        } else {
            Err(err(format!("`{head}` takes {n} argument(s)")))
        }
    };
    let constant = |s: &Sexp| -> Result<_, CliError> {
        match s {
            Sexp::Str(t) | Sexp::Atom(t) => Ok(q.parse_value(t)?),
            _ => Err(err("expected a constant")),
        }
    };
    match head {
        "top" => {
            arity(0)?;
            Ok(Formula::top())
        }
        "and" | "or" => {
            arity(2)?;
            let (a, b) = (build(&items[1], q, env)?, build(&items[2], q, env)?);
            Ok(if head == "and" { Formula::and(a, b) } else { Formula::or(a, b) })
        }
        "tensor" | "homs" => {
            arity(2)?;
            let u = constant(&items[1])?;
            let a = build(&items[2], q, env)?;
            Ok(if head == "tensor" { Formula::tensor(u, a) } else { Formula::hom_s(u, a) })
        }
        "ref" => {
            arity(1)?;
            let name = atom(&items[1]).ok_or_else(|| err("`ref` takes a name"))?;
            env.get(name).cloned().ok_or_else(|| err(format!("unbound reference `{name}`")))
        }
        "let" => {
            arity(2)?;
            let bindings = match &items[1] {
                Sexp::List(b) => b,
                _ => return Err(err("`let` bindings must be a list")),
            };
            let mut scope = env.clone();
            for b in bindings {
                match b {
                    Sexp::List(pair) if pair.len() == 2 => {
                        let name = atom(&pair[0]).ok_or_else(|| err("binding name must be a symbol"))?;
                        let value = build(&pair[1], q, &scope)?;
                        scope.insert(name.to_string(), value);
                    }
                    _ => return Err(err("each binding is (name formula)")),
                }
            }
            build(&items[2], q, &scope)
        }
        "m" => build_modal(&items[1..], q, env),
        other => Err(err(format!("unknown operator `{other}`"))),
    }
}

fn build_modal(args: &[Sexp], q: &Quantale, env: &BTreeMap<String, FormulaRef>) -> Result<FormulaRef, CliError> {
    let kw = args.first().and_then(atom).ok_or_else(|| err("`m` needs a modality name"))?;
    let rest = &args[1..];
    let labelled = |make: fn(Option<String>) -> Modality| -> Result<FormulaRef, CliError> {
        match rest {
            [body] => Ok(Formula::modal(make(None), build(body, q, env)?)),
            [label, body] => {
                let l = atom(label).ok_or_else(|| err("label must be a symbol"))?;
                Ok(Formula::modal(make(Some(l.to_string())), build(body, q, env)?))
            }
            _ => Err(err(format!("`{kw}` takes an optional label and a formula"))),
        }
    };
    match kw {
        "dia" => labelled(Modality::Dia),
        "exp" => labelled(Modality::Exp),
        "o" => match rest {
            [] => Ok(Formula::modal(Modality::O, Formula::top())),
            [body] => Ok(Formula::modal(Modality::O, build(body, q, env)?)),
            _ => Err(err("`o` takes at most one argument")),
        },
        "box_sup" | "box_arrow" => match rest {
            [body] => {
                let m = if kw == "box_sup" { Modality::BoxSup } else { Modality::BoxArrow };
                Ok(Formula::modal(m, build(body, q, env)?))
            }
            _ => Err(err(format!("`{kw}` takes one formula"))),
        },
        "wgt" => match rest {
            [label, Sexp::Str(r) | Sexp::Atom(r), body] => {
                let l = atom(label).ok_or_else(|| err("label must be a symbol"))?;
                Ok(Formula::modal(Modality::Wgt(l.to_string(), parse_rat_text(r)?), build(body, q, env)?))
            }
            _ => Err(err("`wgt` takes a label, an offset and a formula")),
        },
        other => Err(err(format!("unknown modality `{other}`"))),
    }
}
