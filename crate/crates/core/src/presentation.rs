//! Finite presentations and their text format.
//!
//! ```text
//! gens: a b c d
//! rel: [a,b][c,d]
//! oracle: dehn
//! ```
//!
//! Lines may also be separated by `;`. `rels:` takes a comma separated list,
//! `(none)` for no relators. Words are juxtapositions of generator tokens,
//! `g^-1` and `g^k` powers, and commutators `[u,v] = u v u^-1 v^-1`.

use crate::word::{Alphabet, Letter, Word};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    Free,
    Dehn,
    Table(PathBuf),
}

impl OracleKind {
    pub fn label(&self) -> &'static str {
        match self {
            OracleKind::Free => "free",
            OracleKind::Dehn => "dehn",
            OracleKind::Table(_) => "table",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresentationError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown generator `{name}` on line {line}")]
    UnknownGenerator { line: usize, name: String },
    #[error("relator `{0}` is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error("relators given but oracle is `free`")]
    FreeWithRelators,
    #[error("presentation is not C'(1/6): piece `{piece}` of relator `{relator}` has length {len} >= {relator_len}/6")]
    NotSmallCancellation { piece: String, relator: String, len: usize, relator_len: usize },
    #[error("no generators declared")]
    NoGenerators,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPresentation {
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
    pub oracle: OracleKind,
}

/// Longest piece found by the small-cancellation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PieceReport {
    pub max_ratio_num: usize,
    pub max_ratio_den: usize,
    pub piece: Word,
    pub relator: Word,
}

impl GroupPresentation {
    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        Self::parse_with_base(text, None)
    }

    /// `base` resolves a relative table path.
    pub fn parse_with_base(text: &str, base: Option<&Path>) -> Result<Self, PresentationError> {
        let mut gens_line: Option<(usize, String)> = None;
        let mut rel_lines: Vec<(usize, String)> = Vec::new();
        let mut oracle: Option<OracleKind> = None;

        for (lineno, raw) in split_statements(text) {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, rest)) = line.split_once(':') else {
                return Err(PresentationError::Syntax { line: lineno, msg: format!("expected `key: value`, got `{line}`") });
            };
            let rest = rest.trim();
            match key.trim() {
                "gens" | "generators" => gens_line = Some((lineno, rest.to_string())),
                "rel" => rel_lines.push((lineno, rest.to_string())),
                "rels" | "relators" => {
                    if rest != "(none)" && !rest.is_empty() {
                        for part in split_top_level(rest, ',') {
                            rel_lines.push((lineno, part));
                        }
                    }
                }
                "oracle" => {
                    let mut it = rest.split_whitespace();
                    oracle = Some(match it.next() {
                        Some("free") => OracleKind::Free,
                        Some("dehn") => OracleKind::Dehn,
                        Some("table") => {
                            let p = it.next().ok_or(PresentationError::Syntax {
                                line: lineno,
                                msg: "table oracle needs a path".into(),
                            })?;
                            let p = PathBuf::from(p);
                            OracleKind::Table(match base {
                                Some(b) if p.is_relative() => b.join(p),
                                _ => p,
                            })
                        }
                        other => {
                            return Err(PresentationError::Syntax {
                                line: lineno,
                                msg: format!("unknown oracle {other:?}"),
                            })
                        }
                    });
                }
                other => {
                    return Err(PresentationError::Syntax { line: lineno, msg: format!("unknown key `{other}`") })
                }
            }
        }

        let (gl, gtext) = gens_line.ok_or(PresentationError::NoGenerators)?;
        let alphabet = parse_generators(gl, &gtext)?;
        let mut relators = Vec::new();
        for (l, r) in &rel_lines {
            let w = parse_word(&alphabet, r, *l)?;
            if w.is_empty() {
                continue;
            }
            if !alphabet.is_cyclically_reduced(w.letters()) {
                return Err(PresentationError::NotCyclicallyReduced(alphabet.render(w.letters())));
            }
            relators.push(w);
        }
        let oracle = match oracle {
            Some(o) => o,
            None if relators.is_empty() => OracleKind::Free,
            None => OracleKind::Dehn,
        };
        let p = GroupPresentation { alphabet, relators, oracle };
        match p.oracle {
            OracleKind::Free if !p.relators.is_empty() => return Err(PresentationError::FreeWithRelators),
            OracleKind::Dehn => {
                let rep = p.piece_report();
                if let Some(rep) = rep {
                    if 6 * rep.max_ratio_num >= rep.max_ratio_den {
                        return Err(PresentationError::NotSmallCancellation {
                            piece: p.alphabet.render(rep.piece.letters()),
                            relator: p.alphabet.render(rep.relator.letters()),
                            len: rep.max_ratio_num,
                            relator_len: rep.max_ratio_den,
                        });
                    }
                }
            }
            _ => {}
        }
        Ok(p)
    }

    pub fn generator_count(&self) -> usize {
        self.alphabet.len() / 2
    }

    /// All cyclic conjugates of the relators and their inverses, deduplicated,
    /// in a fixed order.
    pub fn symmetrized(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for r in &self.relators {
            for w in [r.clone(), self.alphabet.inverse_word(r.letters())] {
                let n = w.len();
                for k in 0..n {
                    let mut c = w.letters()[k..].to_vec();
                    c.extend_from_slice(&w.letters()[..k]);
                    let c = Word(c);
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// The piece with the largest length-to-relator ratio, if any piece exists.
    pub fn piece_report(&self) -> Option<PieceReport> {
        let sym = self.symmetrized();
        let mut best: Option<PieceReport> = None;
        for (i, r1) in sym.iter().enumerate() {
            for (j, r2) in sym.iter().enumerate() {
                if i == j {
                    continue;
                }
                let l = r1.letters().iter().zip(r2.letters()).take_while(|(a, b)| a == b).count();
                if l == 0 {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => l * b.max_ratio_den > b.max_ratio_num * r1.len(),
                };
                if better {
                    best = Some(PieceReport {
                        max_ratio_num: l,
                        max_ratio_den: r1.len(),
                        piece: Word(r1.letters()[..l].to_vec()),
                        relator: r1.clone(),
                    });
                }
            }
        }
        best
    }

    /// Canonical text; equal presentations give equal strings.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("gens: {}\n", self.alphabet.names().join(" "));
        for r in &self.relators {
            s.push_str(&format!("rel: {}\n", self.alphabet.render(r.letters())));
        }
        match &self.oracle {
            OracleKind::Table(p) => s.push_str(&format!("oracle: table {}\n", p.display())),
            o => s.push_str(&format!("oracle: {}\n", o.label())),
        }
        s
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, PresentationError> {
        parse_word(&self.alphabet, text, 0)
    }
}

fn split_statements(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(k) => &line[..k],
            None => line,
        };
        for part in split_top_level(line, ';') {
            out.push((i + 1, part));
        }
    }
    out
}

fn split_top_level(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_generators(line: usize, text: &str) -> Result<Alphabet, PresentationError> {
    let tokens: Vec<&str> = text.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).collect();
    if tokens.is_empty() {
        return Err(PresentationError::NoGenerators);
    }
    // (base name, inverted?) in listed order
    let mut listed: Vec<(String, bool)> = Vec::new();
    for t in tokens {
        let (base, inv) = match t.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (t, false),
        };
        if base.is_empty() || !base.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(PresentationError::Syntax { line, msg: format!("bad generator token `{t}`") });
        }
        if listed.iter().any(|(b, i)| b == base && *i == inv) {
            return Err(PresentationError::Syntax { line, msg: format!("generator `{t}` listed twice") });
        }
        listed.push((base.to_string(), inv));
    }
    let mut order: Vec<(String, bool)> = Vec::new();
    for (b, inv) in &listed {
        if order.contains(&(b.clone(), *inv)) {
            continue;
        }
        order.push((b.clone(), *inv));
        let partner = (b.clone(), !inv);
        if !listed.contains(&partner) {
            order.push(partner);
        }
    }
    let names: Vec<String> = order
        .iter()
        .map(|(b, inv)| if *inv { format!("{b}^-1") } else { b.clone() })
        .collect();
    let inverse: Vec<Letter> = order
        .iter()
        .map(|(b, inv)| order.iter().position(|(b2, i2)| b2 == b && i2 != inv).unwrap() as Letter)
        .collect();
    if names.len() > 64 {
        return Err(PresentationError::Syntax { line, msg: "at most 32 generators are supported".into() });
    }
    Ok(Alphabet::new(names, inverse))
}

fn parse_word(alpha: &Alphabet, text: &str, line: usize) -> Result<Word, PresentationError> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let w = parse_seq(alpha, &chars, &mut pos, line)?;
    skip_ws(&chars, &mut pos);
    if pos != chars.len() {
        return Err(PresentationError::Syntax { line, msg: format!("unexpected `{}` in word", chars[pos]) });
    }
    Ok(alpha.free_reduce(&w))
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_seq(alpha: &Alphabet, chars: &[char], pos: &mut usize, line: usize) -> Result<Vec<Letter>, PresentationError> {
    let mut out = Vec::new();
    loop {
        skip_ws(chars, pos);
        if *pos >= chars.len() || chars[*pos] == ',' || chars[*pos] == ']' {
            return Ok(out);
        }
        let item: Vec<Letter> = if chars[*pos] == '[' {
            *pos += 1;
            let u = parse_seq(alpha, chars, pos, line)?;
            skip_ws(chars, pos);
            if *pos >= chars.len() || chars[*pos] != ',' {
                return Err(PresentationError::Syntax { line, msg: "commutator needs `[u,v]`".into() });
            }
            *pos += 1;
            let v = parse_seq(alpha, chars, pos, line)?;
            skip_ws(chars, pos);
            if *pos >= chars.len() || chars[*pos] != ']' {
                return Err(PresentationError::Syntax { line, msg: "unclosed `[`".into() });
            }
            *pos += 1;
            let mut c = u.clone();
            c.extend_from_slice(&v);
            c.extend(alpha.inverse_word(&u).0);
            c.extend(alpha.inverse_word(&v).0);
            c
        } else {
            // longest generator name at this position
            let rest: String = chars[*pos..].iter().collect();
            let mut best: Option<(usize, Letter)> = None;
            for (i, n) in alpha.names().iter().enumerate() {
                if n.contains('^') {
                    continue;
                }
                if rest.starts_with(n.as_str()) && best.map_or(true, |(l, _)| n.chars().count() > l) {
                    best = Some((n.chars().count(), i as Letter));
                }
            }
            let Some((l, letter)) = best else {
                let name: String = chars[*pos..].iter().take_while(|c| c.is_alphanumeric() || **c == '_').collect();
                return Err(PresentationError::UnknownGenerator { line, name: if name.is_empty() { chars[*pos].to_string() } else { name } });
            };
            *pos += l;
            vec![letter]
        };
        let exp = parse_exponent(chars, pos, line)?;
        let base = if exp < 0 { alpha.inverse_word(&item).0 } else { item };
        for _ in 0..exp.unsigned_abs() {
            out.extend_from_slice(&base);
        }
    }
}

fn parse_exponent(chars: &[char], pos: &mut usize, line: usize) -> Result<i64, PresentationError> {
    if *pos < chars.len() && chars[*pos] == '^' {
        *pos += 1;
        let start = *pos;
        if *pos < chars.len() && chars[*pos] == '-' {
            *pos += 1;
        }
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        let s: String = chars[start..*pos].iter().collect();
        return s.parse().map_err(|_| PresentationError::Syntax { line, msg: format!("bad exponent `^{s}`") });
    }
    Ok(1)
}
