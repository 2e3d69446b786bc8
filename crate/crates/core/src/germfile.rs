//! Line-oriented germ description files.
//!
//! ```text
//! field Q                 # or: field Fp 5
//! source x, y
//! source_ideal x*y        # optional, generators separated by ';'
//! target u, v
//! map u = x; v = y^3 + x*y
//! map2 u = x; v = y^3 + x*y + x^5
//! automorphism x = x + x^2; y = y
//! derivation x = x^2      # coefficient of d/dx
//! lift_ideal x
//! lift_power 4
//! ```

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::field::{CoefficientField, Scalar};
use crate::gb::LocalIdeal;
use crate::germ::{GermMap, ValidationNotes};
use crate::ring::{parse_poly, Polynomial, Ring, RingError};

/// Parse or validation failure at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct GermFileError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for GermFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

fn fail<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, GermFileError> {
    Err(GermFileError { line, column, message: message.into() })
}

const DIRECTIVES: [&str; 11] = [
    "field",
    "source",
    "source_ideal",
    "target",
    "target_ideal",
    "map",
    "map2",
    "automorphism",
    "derivation",
    "lift_ideal",
    "lift_power",
];

const REPEATABLE: [&str; 3] = ["source_ideal", "target_ideal", "lift_ideal"];

/// Directive argument with its position.
#[derive(Clone, Debug)]
struct Arg {
    line: usize,
    column: usize,
    text: String,
}

impl Arg {
    /// Splits on `sep`, keeping the column of each trimmed piece.
    fn split(&self, sep: char) -> Vec<Arg> {
        let mut out = Vec::new();
        let mut start = 0;
        let chars: Vec<char> = self.text.chars().collect();
        for i in 0..=chars.len() {
            if i == chars.len() || chars[i] == sep {
                let piece: String = chars[start..i].iter().collect();
                let lead = piece.chars().take_while(|c| c.is_whitespace()).count();
                out.push(Arg { line: self.line, column: self.column + start + lead, text: piece.trim().to_string() });
                start = i + 1;
            }
        }
        out
    }
}

fn scan(text: &str) -> Result<HashMap<&'static str, Vec<Arg>>, GermFileError> {
    let mut found: HashMap<&'static str, Vec<Arg>> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let lead = body.chars().take_while(|c| c.is_whitespace()).count();
        let rest: String = body.chars().skip(lead).collect();
        if rest.trim().is_empty() {
            continue;
        }
        let word: String = rest.chars().take_while(|c| !c.is_whitespace()).collect();
        let Some(&key) = DIRECTIVES.iter().find(|d| **d == word) else {
            return fail(line, lead + 1, format!("unknown directive `{word}`"));
        };
        let after = rest.chars().skip(word.chars().count()).collect::<String>();
        let pad = after.chars().take_while(|c| c.is_whitespace()).count();
        let arg = Arg { line, column: lead + word.chars().count() + pad + 1, text: after.trim().to_string() };
        if arg.text.is_empty() {
            return fail(line, arg.column, format!("`{key}` needs an argument"));
        }
        let slot = found.entry(key).or_default();
        if !slot.is_empty() && !REPEATABLE.contains(&key) {
            return fail(line, lead + 1, format!("duplicate `{key}` directive (first on line {})", slot[0].line));
        }
        slot.push(arg);
    }
    Ok(found)
}

fn parse_field(arg: &Arg) -> Result<CoefficientField, GermFileError> {
    let parts: Vec<Arg> = arg.split(' ').into_iter().filter(|a| !a.text.is_empty()).collect();
    match parts.iter().map(|a| a.text.as_str()).collect::<Vec<_>>().as_slice() {
        ["Q"] => Ok(CoefficientField::Rationals),
        ["Fp", p] => {
            let Ok(p) = p.parse::<u64>() else { return fail(arg.line, parts[1].column, "characteristic must be an integer") };
            CoefficientField::prime(p).or_else(|e| fail(arg.line, parts[1].column, e.to_string()))
        }
        _ => fail(arg.line, arg.column, "expected `Q` or `Fp <prime>`"),
    }
}

/// Reads only the `field` directive; `Q` when absent.
pub fn read_field(text: &str) -> Result<CoefficientField, GermFileError> {
    let found = scan(text)?;
    match found.get("field") {
        Some(args) => parse_field(&args[0]),
        None => Ok(CoefficientField::Rationals),
    }
}

fn parse_vars(arg: &Arg, field: CoefficientField) -> Result<Arc<Ring>, GermFileError> {
    let names: Vec<Arg> = arg.split(',');
    for n in &names {
        let ok = n.text.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && n.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok {
            return fail(n.line, n.column, format!("`{}` is not a variable name", n.text));
        }
    }
    let texts: Vec<&str> = names.iter().map(|n| n.text.as_str()).collect();
    Ring::new(&texts, field).or_else(|e| {
        let col = match &e {
            RingError::DuplicateVariable(v) => names.iter().rev().find(|n| n.text == *v).map_or(arg.column, |n| n.column),
            _ => arg.column,
        };
        fail(arg.line, col, e.to_string())
    })
}

fn parse_poly_at<F: Scalar>(arg: &Arg, ring: &Arc<Ring>) -> Result<Polynomial<F>, GermFileError> {
    parse_poly(&arg.text, ring).or_else(|e| match e {
        RingError::Parse { column, message } => fail(arg.line, arg.column + column - 1, message),
        other => fail(arg.line, arg.column, other.to_string()),
    })
}

fn parse_ideal<F: Scalar>(args: &[Arg], ring: &Arc<Ring>) -> Result<LocalIdeal<F>, GermFileError> {
    let mut gens = Vec::new();
    for a in args {
        for piece in a.split(';') {
            if piece.text.is_empty() {
                continue;
            }
            gens.push(parse_poly_at(&piece, ring)?);
        }
    }
    Ok(LocalIdeal::new(ring, gens))
}

/// What an unassigned variable maps to.
#[derive(Clone, Copy)]
enum Unassigned {
    Error,
    Identity,
    Zero,
}

/// `name = poly; …` with one entry per variable of `names`.
fn parse_assignments<F: Scalar>(
    arg: &Arg,
    names: &Arc<Ring>,
    ring: &Arc<Ring>,
    unassigned: Unassigned,
) -> Result<Vec<Polynomial<F>>, GermFileError> {
    let mut out: Vec<Option<Polynomial<F>>> = vec![None; names.nvars()];
    for piece in arg.split(';') {
        if piece.text.is_empty() {
            continue;
        }
        let Some(eq) = piece.text.find('=') else { return fail(piece.line, piece.column, "expected `name = polynomial`") };
        let lhs = piece.text[..eq].trim();
        let Ok(i) = names.index_of(lhs) else {
            return fail(piece.line, piece.column, format!("`{lhs}` is not one of {}", names.names().join(", ")));
        };
        if out[i].is_some() {
            return fail(piece.line, piece.column, format!("`{lhs}` assigned twice"));
        }
        let rhs_text = &piece.text[eq + 1..];
        let pad = rhs_text.chars().take_while(|c| c.is_whitespace()).count();
        let rhs = Arg {
            line: piece.line,
            column: piece.column + piece.text[..eq + 1].chars().count() + pad,
            text: rhs_text.trim().to_string(),
        };
        out[i] = Some(parse_poly_at(&rhs, ring)?);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, p)| match (p, unassigned) {
            (Some(p), _) => Ok(p),
            (None, Unassigned::Identity) => Ok(Polynomial::var(ring, i)),
            (None, Unassigned::Zero) => Ok(Polynomial::zero(ring)),
            (None, Unassigned::Error) => fail(arg.line, arg.column, format!("no assignment for `{}`", names.names()[i])),
        })
        .collect()
}

/// Parsed germ file; optional blocks are `None` when absent.
#[derive(Clone, Debug)]
pub struct GermFile<F: Scalar> {
    pub field: CoefficientField,
    pub source_ideal: LocalIdeal<F>,
    pub target_ideal: Option<LocalIdeal<F>>,
    pub map: Option<GermMap<F>>,
    pub map2: Option<GermMap<F>>,
    pub notes: ValidationNotes,
    /// Images of the source variables; unassigned variables stay fixed.
    pub automorphism: Option<Vec<Polynomial<F>>>,
    /// Coefficients of `∂_x`; unassigned ones are zero.
    pub derivation: Option<Vec<Polynomial<F>>>,
    pub lift_ideal: Option<LocalIdeal<F>>,
    pub lift_power: Option<u32>,
}

impl<F: Scalar> GermFile<F> {
    pub fn source(&self) -> &Arc<Ring> {
        self.source_ideal.ring()
    }

    pub fn parse(text: &str) -> Result<Self, GermFileError> {
        let found = scan(text)?;
        let first = |k: &str| found.get(k).map(|v| &v[0]);
        let field = match first("field") {
            Some(a) => parse_field(a)?,
            None => CoefficientField::Rationals,
        };
        if !F::supports(&field) {
            return fail(first("field").map_or(1, |a| a.line), 1, format!("scalar type cannot represent {field}"));
        }
        let Some(src_arg) = first("source") else { return fail(1, 1, "missing `source` directive") };
        let source = parse_vars(src_arg, field)?;
        let source_ideal = parse_ideal(found.get("source_ideal").map_or(&[][..], |v| v), &source)?;
        let target = first("target").map(|a| parse_vars(a, field)).transpose()?;
        let target_ideal = match (&target, found.get("target_ideal")) {
            (Some(t), args) => Some(parse_ideal(args.map_or(&[][..], |v| v), t)?),
            (None, Some(args)) => return fail(args[0].line, 1, "`target_ideal` without `target`"),
            (None, None) => None,
        };
        let mut notes = ValidationNotes::default();
        let mut build_map = |key: &str| -> Result<Option<GermMap<F>>, GermFileError> {
            let Some(arg) = first(key) else { return Ok(None) };
            let (Some(t), Some(ti)) = (&target, &target_ideal) else { return fail(arg.line, 1, format!("`{key}` without `target`")) };
            let comps = parse_assignments(arg, t, &source, Unassigned::Error)?;
            let g = GermMap::new(source_ideal.clone(), ti.clone(), comps).or_else(|e| fail(arg.line, arg.column, e.to_string()))?;
            let n = g.validate().or_else(|e| fail(arg.line, arg.column, e.to_string()))?;
            for s in n.non_minimal_embedding {
                if !notes.non_minimal_embedding.contains(&s) {
                    notes.non_minimal_embedding.push(s);
                }
            }
            Ok(Some(g))
        };
        let map = build_map("map")?;
        let map2 = build_map("map2")?;
        let automorphism = first("automorphism").map(|a| parse_assignments(a, &source, &source, Unassigned::Identity)).transpose()?;
        let derivation = first("derivation").map(|a| parse_assignments(a, &source, &source, Unassigned::Zero)).transpose()?;
        let lift_ideal = found.get("lift_ideal").map(|args| parse_ideal(args, &source)).transpose()?;
        let lift_power = match first("lift_power") {
            Some(a) => match a.text.parse::<u32>() {
                Ok(n) if n >= 1 => Some(n),
                _ => return fail(a.line, a.column, "expected a positive integer"),
            },
            None => None,
        };
        Ok(GermFile { field, source_ideal, target_ideal, map, map2, notes, automorphism, derivation, lift_ideal, lift_power })
    }
}
