//! Recursive-descent parser for cleaned defining-formula LaTeX.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! equation := expr '=' expr
//! expr     := ['+' | '-'] term (('+' | '-') term)*
//! term     := factor (('*' | '/')? factor)*        juxtaposition multiplies
//! factor   := '-' factor | postfix
//! postfix  := primary ['^' script]
//! primary  := number | letter [sub] | greek [sub] | '(' expr ')' | '{' expr '}'
//!           | \frac{..}{..} | \sqrt[n]{..} | \sum_{i=a}^{b} term
//!           | \deriv{x}{y} | \sin .. (named functions) | \pi
//! ```

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use crate::expr::{Equation, Expression, Symbol};

const MAX_DEPTH: usize = 128;

const GREEK: &[&str] = &[
    "alpha",
    "beta",
    "gamma",
    "delta",
    "epsilon",
    "varepsilon",
    "zeta",
    "eta",
    "theta",
    "vartheta",
    "iota",
    "kappa",
    "lambda",
    "mu",
    "nu",
    "xi",
    "rho",
    "varrho",
    "sigma",
    "varsigma",
    "tau",
    "upsilon",
    "phi",
    "varphi",
    "chi",
    "psi",
    "omega",
    "Gamma",
    "Delta",
    "Theta",
    "Lambda",
    "Xi",
    "Pi",
    "Sigma",
    "Upsilon",
    "Phi",
    "Psi",
    "Omega",
    "ell",
    "hbar",
];

const FUNCTIONS: &[&str] = &[
    "sin", "cos", "tan", "cot", "sec", "csc", "sinh", "cosh", "tanh", "arcsin", "arccos", "arctan", "exp", "ln", "log",
];

/// Named constants that are not identifiers.
const CONSTANTS: &[&str] = &["pi"];

pub fn is_greek(name: &str) -> bool {
    GREEK.contains(&name)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unsupported LaTeX command `\\{0}`")]
    UnsupportedMacro(String),
    #[error("malformed formula at offset {position}: {message}")]
    Malformed { position: usize, message: String },
    #[error("formula has no equality sign")]
    MissingEqualitySign,
    #[error("formula has {0} equality signs; exactly one is required")]
    MultipleEqualitySigns(usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Number(String),
    Letter(char),
    Command(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Underscore,
    Equals,
    Comma,
    Other(char),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    start: usize,
    end: usize,
}

fn tokenize(input: &str) -> Vec<Spanned> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some((start, c)) = chars.next() {
        let tok = match c {
            c if c.is_whitespace() => continue,
            '\\' => {
                let mut name = String::new();
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_ascii_alphabetic() {
                        name.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    match chars.next() {
                        Some((_, n)) => Tok::Command(n.to_string()),
                        None => Tok::Other('\\'),
                    }
                } else {
                    Tok::Command(name)
                }
            }
            '0'..='9' | '.' => {
                let mut text = String::from(c);
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_ascii_digit() || n == '.' {
                        text.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                Tok::Number(text)
            }
            c if c.is_ascii_alphabetic() => Tok::Letter(c),
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '+' => Tok::Plus,
            '-' | '−' => Tok::Minus,
            '*' | '·' | '×' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '_' => Tok::Underscore,
            '=' => Tok::Equals,
            ',' => Tok::Comma,
            other => Tok::Other(other),
        };
        let end = chars.peek().map(|&(i, _)| i).unwrap_or(input.len());
        out.push(Spanned { tok, start, end });
    }
    out
}

/// Parses a cleaned defining formula into an [`Equation`].
pub fn parse_latex(latex: &str) -> Result<Equation, ParseError> {
    let tokens = tokenize(latex);
    // `=` inside braces belongs to summation bounds
    let mut depth = 0i32;
    let mut equals = 0;
    for t in &tokens {
        match t.tok {
            Tok::LBrace => depth += 1,
            Tok::RBrace => depth -= 1,
            Tok::Equals if depth == 0 => equals += 1,
            _ => {}
        }
    }
    if equals > 1 {
        return Err(ParseError::MultipleEqualitySigns(equals));
    }
    let mut parser = Parser { source: latex, tokens, pos: 0, depth: 0 };
    if equals == 0 {
        // still report unsupported constructs before the missing sign
        parser.expression()?;
        parser.expect_end()?;
        return Err(ParseError::MissingEqualitySign);
    }
    let lhs = parser.expression()?;
    parser.expect(&Tok::Equals, "expected `=`")?;
    let rhs = parser.expression()?;
    parser.expect_end()?;
    Ok(Equation::new(lhs, rhs))
}

/// Parses a cleaned LaTeX expression without an equality sign.
pub fn parse_latex_expression(latex: &str) -> Result<Expression, ParseError> {
    let mut parser = Parser { source: latex, tokens: tokenize(latex), pos: 0, depth: 0 };
    let expr = parser.expression()?;
    parser.expect_end()?;
    Ok(expr)
}

struct Parser<'a> {
    source: &'a str,
    tokens: Vec<Spanned>,
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map(|t| t.start).unwrap_or(self.source.len())
    }

    fn malformed(&self, message: &str) -> ParseError {
        ParseError::Malformed { position: self.offset(), message: message.to_owned() }
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, tok: &Tok, message: &str) -> Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.malformed(message))
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(Tok::Command(name)) => Err(ParseError::UnsupportedMacro(name.clone())),
            Some(_) => Err(self.malformed("unexpected trailing input")),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.malformed("nesting too deep"));
        }
        Ok(())
    }

    fn expression(&mut self) -> Result<Expression, ParseError> {
        self.enter()?;
        let mut terms = Vec::new();
        let first = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Expression::neg(self.term()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        terms.push(first);
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.push(Expression::neg(self.term()?));
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(Expression::add(terms))
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expression::mul(alloc::vec![acc, rhs]);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expression::div(acc, rhs);
                }
                Some(tok) if starts_factor(tok) => {
                    let rhs = self.postfix()?;
                    acc = Expression::mul(alloc::vec![acc, rhs]);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            self.enter()?;
            let inner = self.factor()?;
            self.depth -= 1;
            return Ok(Expression::neg(inner));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expression, ParseError> {
        let base = self.primary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let exponent = self.script()?;
        if self.peek() == Some(&Tok::Caret) {
            return Err(self.malformed("double superscript"));
        }
        Ok(Expression::pow(base, exponent))
    }

    /// A superscript argument: a braced group or a single token.
    fn script(&mut self) -> Result<Expression, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LBrace) => self.braced(),
            Some(Tok::Number(text)) => {
                // `c^23` is c² · 3
                self.pos += 1;
                let mut chars = text.chars();
                let first = chars.next().expect("non-empty number");
                let rest: String = chars.collect();
                if !rest.is_empty() {
                    self.pos -= 1;
                    let start = self.tokens[self.pos].start + first.len_utf8();
                    self.tokens[self.pos].tok = Tok::Number(rest);
                    self.tokens[self.pos].start = start;
                }
                self.number(&first.to_string())
            }
            Some(Tok::Letter(_)) | Some(Tok::Command(_)) => self.primary(),
            Some(Tok::Minus) => {
                self.pos += 1;
                self.enter()?;
                let inner = self.script()?;
                self.depth -= 1;
                Ok(Expression::neg(inner))
            }
            _ => Err(self.malformed("expected a superscript")),
        }
    }

    fn braced(&mut self) -> Result<Expression, ParseError> {
        self.expect(&Tok::LBrace, "expected `{`")?;
        let inner = self.expression()?;
        self.expect(&Tok::RBrace, "expected `}`")?;
        Ok(inner)
    }

    fn number(&self, text: &str) -> Result<Expression, ParseError> {
        let malformed = || self.malformed("malformed number");
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
            return Err(malformed());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| malformed())?;
        let denom = Pow::pow(BigInt::from(10), frac_part.len() as u32);
        Ok(Expression::number(BigRational::new(numer, denom)))
    }

    fn primary(&mut self) -> Result<Expression, ParseError> {
        self.enter()?;
        let start = self.offset();
        let result = match self.bump() {
            Some(Tok::Number(text)) => self.number(&text),
            Some(Tok::Letter(c)) => self.identifier(c.to_string()),
            Some(Tok::LParen) => {
                let inner = self.expression()?;
                self.expect(&Tok::RParen, "expected `)`")?;
                Ok(inner)
            }
            Some(Tok::LBracket) => {
                let inner = self.expression()?;
                self.expect(&Tok::RBracket, "expected `]`")?;
                Ok(inner)
            }
            Some(Tok::LBrace) => {
                let inner = self.expression()?;
                self.expect(&Tok::RBrace, "expected `}`")?;
                Ok(inner)
            }
            Some(Tok::Command(name)) => self.command(&name),
            Some(_) => Err(ParseError::Malformed { position: start, message: "unexpected token".into() }),
            None => Err(self.malformed("unexpected end of formula")),
        };
        self.depth -= 1;
        result
    }

    fn identifier(&mut self, base: String) -> Result<Expression, ParseError> {
        let subscript = if self.peek() == Some(&Tok::Underscore) {
            self.pos += 1;
            Some(self.subscript_text()?)
        } else {
            None
        };
        let symbol = Symbol::try_new(base, subscript).map_err(|e| self.malformed(&e.to_string()))?;
        Ok(Expression::Identifier(symbol))
    }

    /// Raw subscript text with whitespace and backslashes removed.
    fn subscript_text(&mut self) -> Result<String, ParseError> {
        let Some(first) = self.tokens.get(self.pos).cloned() else {
            return Err(self.malformed("expected a subscript"));
        };
        let raw = match first.tok {
            Tok::LBrace => {
                let mut depth = 0usize;
                let mut end = None;
                for (i, t) in self.tokens.iter().enumerate().skip(self.pos) {
                    match t.tok {
                        Tok::LBrace => depth += 1,
                        Tok::RBrace => {
                            depth -= 1;
                            if depth == 0 {
                                end = Some(i);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let end = end.ok_or_else(|| self.malformed("unbalanced subscript braces"))?;
                let text = &self.source[first.end..self.tokens[end].start];
                self.pos = end + 1;
                text.to_owned()
            }
            Tok::Number(ref text) => {
                // `x_12` subscripts only the first digit
                let c = text.chars().next().expect("non-empty number");
                if text.len() > 1 {
                    self.tokens[self.pos].tok = Tok::Number(text[1..].to_owned());
                    self.tokens[self.pos].start += 1;
                } else {
                    self.pos += 1;
                }
                c.to_string()
            }
            Tok::Letter(c) => {
                self.pos += 1;
                c.to_string()
            }
            Tok::Command(ref name) if is_greek(name) => {
                self.pos += 1;
                name.clone()
            }
            Tok::Command(ref name) => return Err(ParseError::UnsupportedMacro(name.clone())),
            _ => return Err(self.malformed("expected a subscript")),
        };
        let cleaned: String = raw.chars().filter(|c| !c.is_whitespace() && *c != '\\').collect();
        if cleaned.is_empty() || cleaned.contains(['{', '}']) {
            return Err(self.malformed("unsupported subscript"));
        }
        Ok(cleaned)
    }

    fn command(&mut self, name: &str) -> Result<Expression, ParseError> {
        match name {
            n if is_greek(n) => self.identifier(n.to_owned()),
            n if CONSTANTS.contains(&n) => Ok(Expression::Function { name: n.to_owned(), args: Vec::new() }),
            "frac" => {
                let numerator = self.braced_or_token()?;
                let denominator = self.braced_or_token()?;
                Ok(Expression::div(numerator, denominator))
            }
            "sqrt" => {
                let degree = if self.peek() == Some(&Tok::LBracket) {
                    self.pos += 1;
                    let degree = self.expression()?;
                    self.expect(&Tok::RBracket, "expected `]`")?;
                    Some(degree)
                } else {
                    None
                };
                let radicand = self.braced_or_token()?;
                Ok(match degree {
                    None => Expression::sqrt(radicand),
                    Some(d) => Expression::pow(radicand, Expression::div(Expression::int(1), d)),
                })
            }
            "sum" => self.sum(),
            "deriv" => {
                let dependent = self.braced_symbol()?;
                let independent = self.braced_symbol()?;
                Ok(Expression::Derivative { dependent, independent })
            }
            "cdot" | "times" | "ast" => Err(self.malformed("dangling multiplication")),
            n if FUNCTIONS.contains(&n) => {
                let arg = if self.peek() == Some(&Tok::LParen) { self.primary()? } else { self.postfix()? };
                Ok(Expression::Function { name: n.to_owned(), args: alloc::vec![arg] })
            }
            other => Err(ParseError::UnsupportedMacro(other.to_owned())),
        }
    }

    /// `\frac12` style arguments are single tokens.
    fn braced_or_token(&mut self) -> Result<Expression, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LBrace) => self.braced(),
            Some(Tok::Number(_)) => self.script(),
            Some(Tok::Letter(_)) | Some(Tok::Command(_)) => self.primary(),
            _ => Err(self.malformed("expected an argument")),
        }
    }

    fn braced_symbol(&mut self) -> Result<Symbol, ParseError> {
        match self.braced()? {
            Expression::Identifier(symbol) => Ok(symbol),
            _ => Err(self.malformed("derivative operands must be identifiers")),
        }
    }

    /// `\sum_{i=a}^{b} body`, where the body is one multiplicative term.
    fn sum(&mut self) -> Result<Expression, ParseError> {
        self.expect(&Tok::Underscore, "expected `_` after \\sum")?;
        self.expect(&Tok::LBrace, "expected `{` after \\sum_")?;
        let index = match self.bump() {
            Some(Tok::Letter(c)) => Symbol::new(c.to_string()),
            Some(Tok::Command(name)) if is_greek(&name) => Symbol::new(name),
            _ => return Err(self.malformed("expected a summation index")),
        };
        self.expect(&Tok::Equals, "expected `=` in summation bounds")?;
        let lower = self.expression()?;
        self.expect(&Tok::RBrace, "expected `}`")?;
        self.expect(&Tok::Caret, "expected `^` after summation bounds")?;
        let upper = self.script()?;
        let body = self.term()?;
        Ok(Expression::Sum { index, lower: Box::new(lower), upper: Box::new(upper), body: Box::new(body) })
    }
}

fn starts_factor(tok: &Tok) -> bool {
    match tok {
        Tok::Number(_) | Tok::Letter(_) | Tok::LParen | Tok::LBrace | Tok::LBracket => true,
        Tok::Command(name) => !matches!(name.as_str(), "cdot" | "times" | "ast"),
        _ => false,
    }
}
