//! Tokenizer and expression grammar shared by the scenario parser:
//! polynomial expressions over named generators, affine forms over
//! family parameters, and linear constraints.

use super::ScenarioError;
use crate::base::{rat, Rat};
use crate::graded::family::{Constraint, LinForm};
use num::{One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Sym(char),
    Arrow,    // ->
    Le,       // <=
    Ge,       // >=
    EqEq,     // ==
    DotDot,   // ..
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub col: usize,
}

pub fn err(line: usize, col: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Tokenizes one logical line (comments already stripped).
pub fn lex(line: &str, lineno: usize) -> Result<Vec<Token>, ScenarioError> {
    let mut out = vec![];
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                s.push(chars[i]);
                i += 1;
            }
            if i == chars.len() {
                return Err(err(lineno, col, "unterminated string"));
            }
            i += 1;
            out.push(Token { tok: Tok::Str(s), col });
            continue;
        }
        if c.is_ascii_digit() {
            let mut n = 0i64;
            while i < chars.len() && chars[i].is_ascii_digit() {
                n = n * 10 + (chars[i] as i64 - '0' as i64);
                i += 1;
            }
            out.push(Token { tok: Tok::Int(n), col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(s), col });
            continue;
        }
        if c == '-' && i + 1 < chars.len() && chars[i + 1] == '>' {
            out.push(Token { tok: Tok::Arrow, col });
            i += 2;
            continue;
        }
        if c == '<' && i + 1 < chars.len() && chars[i + 1] == '=' {
            out.push(Token { tok: Tok::Le, col });
            i += 2;
            continue;
        }
        if c == '>' && i + 1 < chars.len() && chars[i + 1] == '=' {
            out.push(Token { tok: Tok::Ge, col });
            i += 2;
            continue;
        }
        if c == '=' && i + 1 < chars.len() && chars[i + 1] == '=' {
            out.push(Token { tok: Tok::EqEq, col });
            i += 2;
            continue;
        }
        if c == '.' && i + 1 < chars.len() && chars[i + 1] == '.' {
            out.push(Token { tok: Tok::DotDot, col });
            i += 2;
            continue;
        }
        if "+-*/^()[],:;={}".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
            continue;
        }
        return Err(err(lineno, col, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

/// A stream cursor over one line's tokens.
pub struct Cursor<'a> {
    pub toks: &'a [Token],
    pub pos: usize,
    pub line: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], line: usize) -> Self {
        Cursor { toks, pos: 0, line }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.col)
    }

    pub fn next(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, c: char) -> Result<(), ScenarioError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(err(self.line, self.col(), format!("expected `{c}`")))
        }
    }

    pub fn eat_ident(&mut self, s: &str) -> bool {
        if self.peek() == Some(&Tok::Ident(s.to_string())) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ScenarioError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(err(self.line, self.col(), "expected identifier")),
        }
    }

    pub fn expect_int(&mut self) -> Result<i64, ScenarioError> {
        let neg = self.eat_sym('-');
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            _ => Err(err(self.line, self.col(), "expected integer")),
        }
    }

    pub fn expect_str(&mut self) -> Result<String, ScenarioError> {
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(err(self.line, self.col(), "expected string literal")),
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn expect_end(&self) -> Result<(), ScenarioError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(err(self.line, self.col(), "unexpected trailing tokens"))
        }
    }
}

/// Multivariate polynomial values used while folding expressions:
/// monomials over named symbols with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPoly {
    /// term = (coeff, sorted [(symbol, exponent)])
    pub terms: Vec<(Rat, Vec<(String, i64)>)>,
}

impl SymPoly {
    fn zero() -> Self {
        SymPoly { terms: vec![] }
    }

    fn constant(c: Rat) -> Self {
        if c.is_zero() {
            return SymPoly::zero();
        }
        SymPoly {
            terms: vec![(c, vec![])],
        }
    }

    fn var(name: &str) -> Self {
        SymPoly {
            terms: vec![(Rat::one(), vec![(name.to_string(), 1)])],
        }
    }

    fn add(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.terms.clone();
        for (c, m) in &other.terms {
            if let Some(slot) = out.iter_mut().find(|(_, mm)| mm == m) {
                slot.0 += c;
            } else {
                out.push((c.clone(), m.clone()));
            }
        }
        out.retain(|(c, _)| !c.is_zero());
        out.sort_by(|a, b| a.1.cmp(&b.1));
        SymPoly { terms: out }
    }

    fn neg(&self) -> SymPoly {
        SymPoly {
            terms: self.terms.iter().map(|(c, m)| (-c, m.clone())).collect(),
        }
    }

    fn mul(&self, other: &SymPoly) -> SymPoly {
        let mut out = SymPoly::zero();
        for (ca, ma) in &self.terms {
            for (cb, mb) in &other.terms {
                let mut m = ma.clone();
                for (s, e) in mb {
                    if let Some(slot) = m.iter_mut().find(|(ss, _)| ss == s) {
                        slot.1 += e;
                    } else {
                        m.push((s.clone(), *e));
                    }
                }
                m.retain(|(_, e)| *e != 0);
                m.sort();
                out = out.add(&SymPoly {
                    terms: vec![(ca * cb, m)],
                });
            }
        }
        out
    }

    fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 if self.terms[0].1.is_empty() => Some(self.terms[0].0.clone()),
            _ => None,
        }
    }
}

/// Parses a `+`/`-` chain of products; standard precedence with `^` for
/// integer powers and `/` restricted to constant divisors.
pub fn parse_sympoly(cur: &mut Cursor) -> Result<SymPoly, ScenarioError> {
    let mut acc = parse_product(cur)?;
    loop {
        if cur.eat_sym('+') {
            let rhs = parse_product(cur)?;
            acc = acc.add(&rhs);
        } else if cur.eat_sym('-') {
            let rhs = parse_product(cur)?;
            acc = acc.add(&rhs.neg());
        } else {
            break;
        }
    }
    Ok(acc)
}

fn parse_product(cur: &mut Cursor) -> Result<SymPoly, ScenarioError> {
    let mut acc = parse_power(cur)?;
    loop {
        if cur.eat_sym('*') {
            let rhs = parse_power(cur)?;
            acc = acc.mul(&rhs);
        } else if cur.eat_sym('/') {
            let rhs = parse_power(cur)?;
            let c = rhs.as_constant().filter(|c| !c.is_zero()).ok_or_else(|| {
                err(cur.line, cur.col(), "division only by nonzero constants")
            })?;
            acc = acc.mul(&SymPoly::constant(c.recip()));
        } else {
            break;
        }
    }
    Ok(acc)
}

fn parse_power(cur: &mut Cursor) -> Result<SymPoly, ScenarioError> {
    let base = parse_atom(cur)?;
    if cur.eat_sym('^') {
        let neg = cur.eat_sym('-');
        let e = match cur.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                cur.pos += 1;
                n
            }
            _ => return Err(err(cur.line, cur.col(), "expected integer exponent")),
        };
        let e = if neg { -e } else { e };
        if e < 0 {
            // negative powers only for single variables
            if base.terms.len() == 1 && base.terms[0].0.is_one() && base.terms[0].1.len() == 1 {
                let (name, k) = &base.terms[0].1[0];
                return Ok(SymPoly {
                    terms: vec![(Rat::one(), vec![(name.clone(), k * e)])],
                });
            }
            return Err(err(
                cur.line,
                cur.col(),
                "negative exponents only on single generators",
            ));
        }
        let mut acc = SymPoly::constant(Rat::one());
        for _ in 0..e {
            acc = acc.mul(&base);
        }
        return Ok(acc);
    }
    Ok(base)
}

fn parse_atom(cur: &mut Cursor) -> Result<SymPoly, ScenarioError> {
    if cur.eat_sym('(') {
        let inner = parse_sympoly(cur)?;
        cur.expect_sym(')')?;
        return Ok(inner);
    }
    if cur.eat_sym('-') {
        let inner = parse_power(cur)?;
        return Ok(inner.neg());
    }
    match cur.peek().cloned() {
        Some(Tok::Int(n)) => {
            cur.pos += 1;
            Ok(SymPoly::constant(rat(n)))
        }
        Some(Tok::Ident(s)) => {
            cur.pos += 1;
            Ok(SymPoly::var(&s))
        }
        _ => Err(err(cur.line, cur.col(), "expected a term")),
    }
}

/// Lowers a symbolic polynomial to an affine form over `params`.
pub fn sympoly_to_linform(
    p: &SymPoly,
    params: &[String],
    line: usize,
) -> Result<LinForm, ScenarioError> {
    let mut form = LinForm::constant(params.len(), Rat::zero());
    for (c, mono) in &p.terms {
        match mono.len() {
            0 => form.konst += c,
            1 if mono[0].1 == 1 => {
                let idx = params
                    .iter()
                    .position(|q| q == &mono[0].0)
                    .ok_or_else(|| err(line, 1, format!("unknown parameter `{}`", mono[0].0)))?;
                form.coeffs[idx] += c;
            }
            _ => {
                return Err(err(line, 1, "expression must be affine in the parameters"));
            }
        }
    }
    Ok(form)
}

/// Lowers to a named-generator polynomial (coefficients must be scalar).
pub fn sympoly_to_exprpoly(p: &SymPoly) -> super::model::ExprPoly {
    super::model::ExprPoly {
        terms: p
            .terms
            .iter()
            .map(|(c, m)| (c.clone(), m.clone()))
            .collect(),
    }
}

/// Parses a `where` constraint list:
/// `expr >= int`, `expr <= int`, `expr == int mod k`, comma-separated.
pub fn parse_constraints(
    cur: &mut Cursor,
    params: &[String],
) -> Result<Vec<Constraint>, ScenarioError> {
    let mut out = vec![];
    loop {
        let lhs = parse_sympoly(cur)?;
        let lhs = sympoly_to_linform(&lhs, params, cur.line)?;
        match cur.next().map(|t| t.tok.clone()) {
            Some(Tok::Ge) => {
                let bound = cur.expect_int()?;
                let mut f = lhs;
                f.konst -= rat(bound);
                out.push(Constraint::ge0(f));
            }
            Some(Tok::Le) => {
                let bound = cur.expect_int()?;
                let mut f = lhs.scale(&rat(-1));
                f.konst += rat(bound);
                out.push(Constraint::ge0(f));
            }
            Some(Tok::EqEq) => {
                let residue = cur.expect_int()?;
                if !cur.eat_ident("mod") {
                    return Err(err(cur.line, cur.col(), "expected `mod`"));
                }
                let modulus = cur.expect_int()?;
                if !lhs.coeffs.iter().all(|c| c.is_integer())
                    || !lhs.konst.is_integer()
                {
                    return Err(err(cur.line, cur.col(), "mod constraints need integer forms"));
                }
                out.push(Constraint::mod_eq(lhs, modulus, residue));
            }
            _ => return Err(err(cur.line, cur.col(), "expected `>=`, `<=` or `==`")),
        }
        if !cur.eat_sym(',') {
            break;
        }
    }
    Ok(out)
}
