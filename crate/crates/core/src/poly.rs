//! Exact model of bounded Diophantine systems.
//!
//! A system is `n` integer variables, each a `w`-bit two's complement value in
//! `[-2^(w-1), 2^(w-1) - 1]`, and `m` polynomials `f_j` with integer
//! coefficients, each read as the equation `f_j(x) = 0`. All arithmetic here is
//! checked `i128`; construction rejects systems whose magnitude bound
//! `sum |c| N^|alpha|` does not fit, so evaluation over the domain never wraps.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, ParseErrorKind, Result};

/// Exact coefficient type.
pub type Coeff = i128;

pub const MAX_BITS: u32 = 32;
pub const MAX_DEGREE: u32 = 16;
pub const MAX_VARS: usize = 64;
/// Default cap on the number of points `brute_force_solve` will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coefficient: Coeff,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// Expands the multi-index into a list of variable indices with
    /// multiplicity, e.g. `x0^2 x2` becomes `[0, 0, 2]`.
    pub fn occurrences(&self) -> Vec<usize> {
        self.exponents
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
            .collect()
    }
}

/// Graded lexicographic order: higher total degree first, then the
/// lexicographically larger exponent vector first (so `x` precedes `y`).
pub fn grlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

/// A polynomial in canonical form: merged monomials, no zero coefficients,
/// sorted in graded lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: usize,
    monomials: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            monomials: Vec::new(),
        }
    }

    /// Builds the canonical polynomial from `(coefficient, exponents)` pairs.
    pub fn new<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Coeff, Vec<u32>)>,
    {
        let mut merged: Vec<Monomial> = Vec::new();
        for (coefficient, exponents) in terms {
            if exponents.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: exponents.len(),
                });
            }
            match merged.iter_mut().find(|m| m.exponents == exponents) {
                Some(existing) => {
                    existing.coefficient = existing
                        .coefficient
                        .checked_add(coefficient)
                        .ok_or(Error::Overflow("merging monomials"))?;
                }
                None => merged.push(Monomial {
                    coefficient,
                    exponents,
                }),
            }
        }
        merged.retain(|m| m.coefficient != 0);
        merged.sort_by(|a, b| grlex_cmp(&a.exponents, &b.exponents));
        Ok(Polynomial {
            n,
            monomials: merged,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> Coeff {
        self.monomials
            .iter()
            .find(|m| m.is_constant())
            .map_or(0, |m| m.coefficient)
    }

    pub fn negated(&self) -> Self {
        Polynomial {
            n: self.n,
            monomials: self
                .monomials
                .iter()
                .map(|m| Monomial {
                    coefficient: -m.coefficient,
                    exponents: m.exponents.clone(),
                })
                .collect(),
        }
    }

    /// Exact value at `a`. Fails on dimension mismatch or `i128` overflow.
    pub fn evaluate(&self, a: &Assignment) -> Result<Coeff> {
        if a.values.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: a.values.len(),
            });
        }
        let mut total: Coeff = 0;
        for m in &self.monomials {
            let mut term = m.coefficient;
            for (&v, &e) in a.values.iter().zip(&m.exponents) {
                for _ in 0..e {
                    term = term
                        .checked_mul(v as Coeff)
                        .ok_or(Error::Overflow("evaluating a monomial"))?;
                }
            }
            total = total
                .checked_add(term)
                .ok_or(Error::Overflow("summing monomials"))?;
        }
        Ok(total)
    }

    /// `sum |c| * base^|alpha|`; with `base = N` this is the Table-style
    /// accumulator bound, with `base = N/2` it is the exact magnitude bound
    /// over the two's complement domain.
    pub fn magnitude_bound(&self, base: Coeff) -> Result<Coeff> {
        let mut total: Coeff = 0;
        for m in &self.monomials {
            let mut term = m.coefficient.checked_abs().ok_or(Error::Overflow("|c|"))?;
            for _ in 0..m.degree() {
                term = term
                    .checked_mul(base)
                    .ok_or(Error::Overflow("magnitude bound"))?;
            }
            total = total
                .checked_add(term)
                .ok_or(Error::Overflow("magnitude bound"))?;
        }
        Ok(total)
    }
}

/// A point of the search domain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment {
    pub values: Vec<i64>,
}

impl Assignment {
    pub fn new(values: Vec<i64>) -> Self {
        Assignment { values }
    }
}

impl From<Vec<i64>> for Assignment {
    fn from(values: Vec<i64>) -> Self {
        Assignment { values }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiophantineSystem {
    var_names: Vec<String>,
    equations: Vec<Polynomial>,
    bits: u32,
}

impl DiophantineSystem {
    pub fn new(var_names: Vec<String>, equations: Vec<Polynomial>, bits: u32) -> Result<Self> {
        let n = var_names.len();
        if n == 0 || n > MAX_VARS {
            return Err(Error::InvalidArgument(format!(
                "variable count must be in 1..={MAX_VARS}, got {n}"
            )));
        }
        if equations.is_empty() {
            return Err(Error::InvalidArgument("a system needs at least one equation".into()));
        }
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::InvalidArgument(format!(
                "bits per variable must be in 1..={MAX_BITS}, got {bits}"
            )));
        }
        let n_len: Coeff = 1 << bits;
        for eq in &equations {
            if eq.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: eq.n(),
                });
            }
            if eq.degree() > MAX_DEGREE {
                return Err(Error::InvalidArgument(format!(
                    "degree {} exceeds the limit of {MAX_DEGREE}",
                    eq.degree()
                )));
            }
            // Also guarantees that evaluation over the domain cannot overflow.
            eq.magnitude_bound(n_len)?;
        }
        Ok(DiophantineSystem {
            var_names,
            equations,
            bits,
        })
    }

    pub fn n(&self) -> usize {
        self.var_names.len()
    }

    pub fn m(&self) -> usize {
        self.equations.len()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    /// Interval length `N = 2^w`.
    pub fn interval_len(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn domain_min(&self) -> i64 {
        -(1i64 << (self.bits - 1))
    }

    pub fn domain_max(&self) -> i64 {
        (1i64 << (self.bits - 1)) - 1
    }

    /// `|D| = N^n`, or `None` when it does not fit in `u128`.
    pub fn domain_size(&self) -> Option<u128> {
        let total_bits = self.bits as usize * self.n();
        (total_bits < 128).then(|| 1u128 << total_bits)
    }

    pub fn degree(&self) -> u32 {
        self.equations.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn contains(&self, a: &Assignment) -> bool {
        a.values.len() == self.n()
            && a
                .values
                .iter()
                .all(|&v| v >= self.domain_min() && v <= self.domain_max())
    }

    pub fn check_assignment(&self, a: &Assignment) -> Result<()> {
        if a.values.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: a.values.len(),
            });
        }
        if let Some(&v) = a
            .values
            .iter()
            .find(|&&v| v < self.domain_min() || v > self.domain_max())
        {
            return Err(Error::OutOfRange {
                value: v as i128,
                width: self.bits,
            });
        }
        Ok(())
    }

    /// Classical verification of a candidate.
    pub fn is_solution(&self, a: &Assignment) -> Result<bool> {
        self.check_assignment(a)?;
        for eq in &self.equations {
            if eq.evaluate(a)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Number of equations the candidate satisfies.
    pub fn satisfied_count(&self, a: &Assignment) -> Result<usize> {
        let mut count = 0;
        for eq in &self.equations {
            if eq.evaluate(a)? == 0 {
                count += 1;
            }
        }
        Ok(count)
    }

    /// Domain point with lexicographic rank `index` (first variable most
    /// significant, values ascending).
    pub fn assignment_at(&self, mut index: u128) -> Assignment {
        let n_len = self.interval_len() as u128;
        let mut values = vec![0i64; self.n()];
        for slot in values.iter_mut().rev() {
            *slot = (index % n_len) as i64 + self.domain_min();
            index /= n_len;
        }
        Assignment { values }
    }

    pub fn lambda_penalty(&self) -> u64 {
        lambda_penalty(self)
    }
}

pub fn hamming_weight(c: Coeff) -> u32 {
    c.unsigned_abs().count_ones()
}

/// `sum over all monomials of all equations of |alpha| + w_H(|c|)`.
pub fn lambda_penalty(sys: &DiophantineSystem) -> u64 {
    sys.equations
        .iter()
        .flat_map(|eq| eq.monomials())
        .map(|m| (m.degree() + hamming_weight(m.coefficient)) as u64)
        .sum()
}

/// Classical verification cost estimate: the bit width `q_cl` (taken equal to
/// the reversible layout's qubit count) and the order `q_cl^2 * Lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassicalCost {
    pub q_cl: usize,
    pub cost_order: u128,
}

pub fn classical_cost_estimate(sys: &DiophantineSystem) -> ClassicalCost {
    let q_cl = crate::encoding::plan_registers(sys).total_qubits();
    let q = q_cl as u128;
    ClassicalCost {
        q_cl,
        cost_order: q * q * lambda_penalty(sys) as u128,
    }
}

/// Every satisfying assignment, in lexicographic order, by exhaustive search.
pub fn brute_force_solve(sys: &DiophantineSystem) -> Result<Vec<Assignment>> {
    brute_force_solve_capped(sys, DEFAULT_ENUMERATION_CAP)
}

pub fn brute_force_solve_capped(sys: &DiophantineSystem, cap: u128) -> Result<Vec<Assignment>> {
    let size = match sys.domain_size() {
        Some(size) if size <= cap => size,
        Some(size) => return Err(Error::DomainTooLarge { size, cap }),
        None => {
            return Err(Error::DomainTooLarge {
                size: u128::MAX,
                cap,
            })
        }
    };
    let hits: Vec<Option<Assignment>> = (0..size as u64)
        .into_par_iter()
        .map(|idx| {
            let a = sys.assignment_at(idx as u128);
            match sys.is_solution(&a) {
                Ok(true) => Ok(Some(a)),
                Ok(false) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    Ok(hits.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Coeff),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Equals,
}

fn perr(line: usize, column: usize, kind: ParseErrorKind) -> Error {
    Error::Parse { line, column, kind }
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        match c {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1;
            }
            '=' => {
                out.push((Tok::Equals, col));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let value = digits.parse::<Coeff>().map_err(|_| {
                    perr(
                        line,
                        col,
                        ParseErrorKind::LimitExceeded(format!("integer {digits} is too large")),
                    )
                })?;
                out.push((Tok::Num(value), col));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            other => {
                return Err(perr(
                    line,
                    col,
                    ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                ))
            }
        }
    }
    Ok(out)
}

/// Splits an identifier into declared variable names, preferring an exact
/// match and otherwise the longest prefix first.
fn segment(name: &str, vars: &[String]) -> Option<Vec<usize>> {
    if name.is_empty() {
        return Some(Vec::new());
    }
    let mut candidates: Vec<usize> = (0..vars.len()).filter(|&i| name.starts_with(vars[i].as_str())).collect();
    candidates.sort_by_key(|&i| std::cmp::Reverse(vars[i].len()));
    candidates.into_iter().find_map(|i| {
        let mut rest = segment(&name[vars[i].len()..], vars)?;
        rest.insert(0, i);
        Some(rest)
    })
}

struct EqParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
    vars: &'a [String],
}

impl EqParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        perr(self.line, self.col(), ParseErrorKind::Syntax(msg.into()))
    }

    fn exponent(&mut self) -> Result<u32> {
        if self.peek() != Some(&Tok::Caret) {
            return Ok(1);
        }
        self.pos += 1;
        match self.peek() {
            Some(Tok::Num(k)) => {
                let k = *k;
                if k > MAX_DEGREE as Coeff {
                    return Err(perr(
                        self.line,
                        self.col(),
                        ParseErrorKind::LimitExceeded(format!(
                            "exponent {k} exceeds the degree limit {MAX_DEGREE}"
                        )),
                    ));
                }
                self.pos += 1;
                Ok(k as u32)
            }
            _ => Err(self.err("expected an exponent after `^`")),
        }
    }

    /// term := factor ( ['*'] factor )*, factor := NUM | IDENT ['^' NUM]
    fn term(&mut self, sign: Coeff) -> Result<(Coeff, Vec<u32>)> {
        let mut coeff = sign;
        let mut exps = vec![0u32; self.vars.len()];
        let mut factors = 0;
        loop {
            let expect_factor = if self.peek() == Some(&Tok::Star) {
                if factors == 0 {
                    return Err(self.err("`*` without a left operand"));
                }
                self.pos += 1;
                true
            } else {
                false
            };
            match self.peek().cloned() {
                Some(Tok::Num(v)) => {
                    self.pos += 1;
                    coeff = coeff.checked_mul(v).ok_or_else(|| {
                        perr(
                            self.line,
                            self.col(),
                            ParseErrorKind::LimitExceeded("coefficient overflow".into()),
                        )
                    })?;
                }
                Some(Tok::Ident(name)) => {
                    let col = self.col();
                    self.pos += 1;
                    // `xy` with declared `x` and `y` reads as a product
                    let parts = segment(&name, self.vars)
                        .ok_or_else(|| perr(self.line, col, ParseErrorKind::UnknownVariable(name)))?;
                    let (&last, init) = parts.split_last().expect("segmentation is non-empty");
                    for &idx in init {
                        exps[idx] += 1;
                    }
                    exps[last] += self.exponent()?;
                }
                _ => {
                    if expect_factor || factors == 0 {
                        return Err(self.err("expected a number or a variable"));
                    }
                    break;
                }
            }
            factors += 1;
        }
        if exps.iter().sum::<u32>() > MAX_DEGREE {
            return Err(perr(
                self.line,
                self.col(),
                ParseErrorKind::LimitExceeded(format!("monomial degree exceeds {MAX_DEGREE}")),
            ));
        }
        Ok((coeff, exps))
    }

    fn equation(&mut self) -> Result<Polynomial> {
        let n = self.vars.len();
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    1
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    -1
                }
                Some(Tok::Equals) if !first => break,
                _ if first => 1,
                _ => return Err(self.err("expected `+`, `-` or `=`")),
            };
            terms.push(self.term(sign)?);
            first = false;
        }
        // `=` then a signed integer
        self.pos += 1;
        let sign = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -1
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        let rhs = match self.peek() {
            Some(Tok::Num(v)) => *v * sign,
            _ => return Err(self.err("expected an integer right-hand side")),
        };
        self.pos += 1;
        if self.pos < self.toks.len() {
            return Err(self.err("trailing input after the right-hand side"));
        }
        terms.push((-rhs, vec![0; n]));
        Polynomial::new(n, terms).map_err(|e| match e {
            Error::Overflow(what) => perr(
                self.line,
                1,
                ParseErrorKind::LimitExceeded(format!("overflow while {what}")),
            ),
            other => other,
        })
    }
}

/// Parses the line-oriented `.dioph` format:
///
/// ```text
/// # comment
/// vars x y z
/// bits 3
/// eq 3x^2 + 2y^2 + 5z^2 = 40
/// ```
///
/// `size <N>` may replace `bits <w>` when `N` is a power of two.
pub fn parse_system(text: &str) -> Result<DiophantineSystem> {
    let mut vars: Option<Vec<String>> = None;
    let mut bits: Option<u32> = None;
    let mut pending: Vec<(usize, usize, String)> = Vec::new();
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let (keyword, rest) = match trimmed.find(char::is_whitespace) {
            Some(p) => (&trimmed[..p], &trimmed[p..]),
            None => (trimmed, ""),
        };
        let rest_col = indent + keyword.len() + 1;
        match keyword {
            "vars" => {
                if vars.is_some() {
                    return Err(perr(line, indent + 1, ParseErrorKind::Syntax("duplicate `vars` line".into())));
                }
                let mut names: Vec<String> = Vec::new();
                for (tok, col) in tokenize(rest, line, rest_col)? {
                    match tok {
                        Tok::Ident(name) => {
                            if names.contains(&name) {
                                return Err(perr(line, col, ParseErrorKind::DuplicateVariable(name)));
                            }
                            names.push(name);
                        }
                        _ => {
                            return Err(perr(
                                line,
                                col,
                                ParseErrorKind::Syntax("expected a variable name".into()),
                            ))
                        }
                    }
                }
                if names.is_empty() {
                    return Err(perr(line, indent + 1, ParseErrorKind::Missing("variable names")));
                }
                if names.len() > MAX_VARS {
                    return Err(perr(
                        line,
                        indent + 1,
                        ParseErrorKind::LimitExceeded(format!("more than {MAX_VARS} variables")),
                    ));
                }
                vars = Some(names);
            }
            "bits" | "size" => {
                if bits.is_some() {
                    return Err(perr(line, indent + 1, ParseErrorKind::Syntax("duplicate width line".into())));
                }
                let toks = tokenize(rest, line, rest_col)?;
                let (value, col) = match toks.as_slice() {
                    [(Tok::Num(v), col)] => (*v, *col),
                    _ => {
                        return Err(perr(
                            line,
                            rest_col,
                            ParseErrorKind::Syntax(format!("`{keyword}` takes one integer")),
                        ))
                    }
                };
                let w = if keyword == "bits" {
                    value
                } else {
                    let n_len = value as u128;
                    if n_len < 2 || !n_len.is_power_of_two() {
                        return Err(perr(line, col, ParseErrorKind::NotPowerOfTwo(n_len)));
                    }
                    n_len.trailing_zeros() as Coeff
                };
                if w < 1 || w > MAX_BITS as Coeff {
                    return Err(perr(
                        line,
                        col,
                        ParseErrorKind::LimitExceeded(format!("bit width must be in 1..={MAX_BITS}")),
                    ));
                }
                bits = Some(w as u32);
            }
            "eq" => pending.push((line, rest_col, rest.to_string())),
            other => {
                return Err(perr(
                    line,
                    indent + 1,
                    ParseErrorKind::Syntax(format!("unknown directive `{other}`")),
                ))
            }
        }
    }

    let vars = vars.ok_or_else(|| perr(last_line.max(1), 1, ParseErrorKind::Missing("`vars` line")))?;
    let bits = bits.ok_or_else(|| perr(last_line.max(1), 1, ParseErrorKind::Missing("`bits` line")))?;
    if pending.is_empty() {
        return Err(perr(last_line.max(1), 1, ParseErrorKind::Missing("`eq` line")));
    }
    let mut equations = Vec::with_capacity(pending.len());
    for (line, col, text) in &pending {
        let toks = tokenize(text, *line, *col)?;
        let mut p = EqParser {
            end_col: col + text.len(),
            toks,
            pos: 0,
            line: *line,
            vars: &vars,
        };
        equations.push(p.equation()?);
    }
    DiophantineSystem::new(vars, equations, bits).map_err(|e| match e {
        Error::Overflow(what) => perr(
            pending[0].0,
            1,
            ParseErrorKind::LimitExceeded(format!("magnitude bound overflows ({what})")),
        ),
        other => other,
    })
}

impl FromStr for DiophantineSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_system(s)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, m: &Monomial, names: &[String]) -> fmt::Result {
    let mag = m.coefficient.unsigned_abs();
    let mut parts: Vec<String> = Vec::new();
    if mag != 1 {
        parts.push(mag.to_string());
    }
    for (name, &e) in names.iter().zip(&m.exponents) {
        match e {
            0 => {}
            1 => parts.push(name.clone()),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    write!(f, "{}", parts.join(" "))
}

impl fmt::Display for DiophantineSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars {}", self.var_names.join(" "))?;
        writeln!(f, "bits {}", self.bits)?;
        for eq in &self.equations {
            write!(f, "eq ")?;
            let mut first = true;
            for m in eq.monomials().iter().filter(|m| !m.is_constant()) {
                match (first, m.coefficient < 0) {
                    (true, true) => write!(f, "-")?,
                    (true, false) => {}
                    (false, true) => write!(f, " - ")?,
                    (false, false) => write!(f, " + ")?,
                }
                write_term(f, m, &self.var_names)?;
                first = false;
            }
            if first {
                write!(f, "0")?;
            }
            writeln!(f, " = {}", -eq.constant_term())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const THREE_QUADRATICS: &str = "\
# strongly coupled quadratic benchmark
vars x y z
bits 3
eq 3x^2 + 2y^2 + 5z^2 = 40
eq 2xy - 4yz + 3xz = 13
eq -x^2 + 5y - 7z = -6
";

    fn three_quadratics() -> DiophantineSystem {
        parse_system(THREE_QUADRATICS).unwrap()
    }

    #[test]
    fn parses_simple_linear_equation() {
        let sys = parse_system("vars x; bits 3; eq 2 x = 4".replace("; ", "\n").as_str()).unwrap();
        assert_eq!(sys.n(), 1);
        assert_eq!(sys.bits(), 3);
        let eq = &sys.equations()[0];
        assert_eq!(
            eq.monomials(),
            &[
                Monomial { coefficient: 2, exponents: vec![1] },
                Monomial { coefficient: -4, exponents: vec![0] },
            ]
        );
    }

    #[test]
    fn parses_three_quadratics_system() {
        let sys = three_quadratics();
        assert_eq!((sys.n(), sys.m(), sys.degree()), (3, 3, 2));
        assert_eq!(sys.equations()[0].monomials().len(), 4);
        assert_eq!(sys.equations()[1].constant_term(), -13);
        assert_eq!(sys.equations()[2].constant_term(), 6);
    }

    #[test]
    fn merges_like_terms() {
        let sys = parse_system("vars x\nbits 3\neq x + x = 0\n").unwrap();
        assert_eq!(
            sys.equations()[0].monomials(),
            &[Monomial { coefficient: 2, exponents: vec![1] }]
        );
        let sys = parse_system("vars x\nbits 3\neq x - x = 0\n").unwrap();
        assert!(sys.equations()[0].is_zero());
    }

    #[test]
    fn explicit_star_and_spacing_variants_agree() {
        let a = parse_system("vars x y\nbits 3\neq 2*x*y^2 - y = 1").unwrap();
        let b = parse_system("vars x y\nbits 3\neq 2 x y^2 - 1 y = 1").unwrap();
        let c = parse_system("vars x y\nbits 3\neq -y + 2xy^2 = +1").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_system("vars x\nbits 3\neq 2 w = 1\n").unwrap_err();
        match err {
            Error::Parse { line, column, kind } => {
                assert_eq!(line, 3);
                assert_eq!(column, 6);
                assert_eq!(kind, ParseErrorKind::UnknownVariable("w".into()));
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_system("vars x\nbits 3\neq 2 x + = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, kind: ParseErrorKind::Syntax(_), .. }));
        let err = parse_system("vars x\nsize 6\neq x = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, kind: ParseErrorKind::NotPowerOfTwo(6), .. }));
        let err = parse_system("vars x\nbits 40\neq x = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { kind: ParseErrorKind::LimitExceeded(_), .. }));
        let err = parse_system("vars x\nbits 3\neq x^17 = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { kind: ParseErrorKind::LimitExceeded(_), .. }));
        let err = parse_system("vars x\nbits 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { kind: ParseErrorKind::Missing(_), .. }));
    }

    #[test]
    fn size_directive_matches_bits() {
        let a = parse_system("vars x\nsize 8\neq x = 1").unwrap();
        let b = parse_system("vars x\nbits 3\neq x = 1").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn evaluates_three_quadratics_equations_at_the_solution() {
        let sys = three_quadratics();
        let sol = Assignment::new(vec![3, 2, 1]);
        for eq in sys.equations() {
            assert_eq!(eq.evaluate(&sol).unwrap(), 0);
        }
        // -x^2 + 5y - 7z + 6 at (3, 2, 1) = -9 + 10 - 7 + 6
        let third = &sys.equations()[2];
        assert_eq!(third.evaluate(&sol).unwrap(), -9 + 10 - 7 + 6);
    }

    #[test]
    fn evaluate_at_origin_is_constant_term() {
        let sys = three_quadratics();
        let origin = Assignment::new(vec![0, 0, 0]);
        for eq in sys.equations() {
            assert_eq!(eq.evaluate(&origin).unwrap(), eq.constant_term());
        }
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let sys = three_quadratics();
        let err = sys.equations()[0].evaluate(&Assignment::new(vec![1, 2])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2 }));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_solve(&three_quadratics()).unwrap(), vec![Assignment::new(vec![3, 2, 1])]);
        let sys = parse_system("vars x\nbits 3\neq x = 0").unwrap();
        assert_eq!(brute_force_solve(&sys).unwrap(), vec![Assignment::new(vec![0])]);
        let sys = parse_system("vars x\nbits 3\neq x^2 = 4").unwrap();
        let expected: Vec<Assignment> = (-4i64..=3)
            .filter(|x| x * x == 4)
            .map(|x| Assignment::new(vec![x]))
            .collect();
        assert_eq!(expected, vec![Assignment::new(vec![-2]), Assignment::new(vec![2])]);
        assert_eq!(brute_force_solve(&sys).unwrap(), expected);
    }

    #[test]
    fn brute_force_respects_cap() {
        let err = brute_force_solve_capped(&three_quadratics(), 100).unwrap_err();
        assert!(matches!(err, Error::DomainTooLarge { size: 512, cap: 100 }));
    }

    #[test]
    fn hamming_weight_examples() {
        assert_eq!(hamming_weight(3), 2);
        assert_eq!(hamming_weight(0), 0);
        assert_eq!(hamming_weight(-12), 2);
    }

    #[test]
    fn lambda_penalty_examples() {
        let sys = parse_system("vars x\nbits 3\neq 2x = 4").unwrap();
        assert_eq!(lambda_penalty(&sys), 2 + 1);
        let sys = parse_system("vars x\nbits 3\neq 0 = 0").unwrap();
        assert_eq!(lambda_penalty(&sys), 0);
        // by hand: eq1 (2+2)+(2+1)+(2+2)+(0+2) = 13,
        // eq2 (2+1)+(2+1)+(2+2)+(0+3) = 13, eq3 (2+1)+(1+2)+(1+3)+(0+2) = 12
        assert_eq!(lambda_penalty(&three_quadratics()), 38);
    }

    #[test]
    fn display_round_trips() {
        let sys = three_quadratics();
        let printed = sys.to_string();
        assert_eq!(parse_system(&printed).unwrap(), sys);
        assert!(printed.contains("eq 3 x^2 + 2 y^2 + 5 z^2 = 40"));
        let zero = parse_system("vars x\nbits 2\neq 0 = 3").unwrap();
        assert_eq!(parse_system(&zero.to_string()).unwrap(), zero);
    }

    #[test]
    fn assignment_order_is_lexicographic() {
        let sys = parse_system("vars x y\nbits 2\neq x = 0").unwrap();
        let all: Vec<Assignment> = (0..16).map(|i| sys.assignment_at(i)).collect();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[0].values, vec![-2, -2]);
        assert_eq!(all[15].values, vec![1, 1]);
    }
}
