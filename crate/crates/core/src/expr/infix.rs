//! Parser for the plain-text infix form produced by [`super::render_infix`].

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;

use super::{Equation, Expression, Symbol};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InfixError {
    #[error("unexpected character `{0}` at offset {1}")]
    UnexpectedChar(char, usize),
    #[error("unexpected token at position {0}")]
    UnexpectedToken(usize),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("malformed identifier `{0}`")]
    BadIdentifier(String),
    #[error("`{0}` expects {1} argument(s)")]
    Arity(String, usize),
    #[error("expected a single `=`")]
    NotAnEquation,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(BigRational),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Equals,
}

fn tokenize(input: &str) -> Result<Vec<Token>, InfixError> {
    let chars: Vec<(usize, char)> = input.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '+' => push(&mut tokens, Token::Plus, &mut i),
            '-' => push(&mut tokens, Token::Minus, &mut i),
            '*' => push(&mut tokens, Token::Star, &mut i),
            '/' => push(&mut tokens, Token::Slash, &mut i),
            '^' => push(&mut tokens, Token::Caret, &mut i),
            '(' => push(&mut tokens, Token::LParen, &mut i),
            ')' => push(&mut tokens, Token::RParen, &mut i),
            ',' => push(&mut tokens, Token::Comma, &mut i),
            '=' => push(&mut tokens, Token::Equals, &mut i),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let mut fraction_digits = 0u32;
                if i + 1 < chars.len() && chars[i].1 == '.' && chars[i + 1].1.is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                        fraction_digits += 1;
                    }
                }
                let digits: String = chars[start..i].iter().map(|&(_, c)| c).filter(|c| *c != '.').collect();
                let numer: BigInt = digits.parse().map_err(|_| InfixError::UnexpectedChar(c, offset))?;
                let denom = Pow::pow(BigInt::from(10), fraction_digits);
                tokens.push(Token::Number(BigRational::new(numer, denom)));
            }
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].1.is_alphanumeric() {
                    i += 1;
                }
                if i < chars.len() && chars[i].1 == '_' {
                    i += 1;
                    if i < chars.len() && chars[i].1 == '{' {
                        while i < chars.len() && chars[i].1 != '}' {
                            i += 1;
                        }
                        if i == chars.len() {
                            return Err(InfixError::UnexpectedEnd);
                        }
                        i += 1;
                    } else {
                        while i < chars.len() && chars[i].1.is_alphanumeric() {
                            i += 1;
                        }
                    }
                }
                let name: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                tokens.push(Token::Name(name));
            }
            other => return Err(InfixError::UnexpectedChar(other, offset)),
        }
    }
    Ok(tokens)
}

fn push(tokens: &mut Vec<Token>, token: Token, i: &mut usize) {
    tokens.push(token);
    *i += 1;
}

/// Parses an infix expression.
pub fn parse_infix(input: &str) -> Result<Expression, InfixError> {
    let mut parser = Parser { tokens: tokenize(input)?, pos: 0 };
    let expr = parser.expression()?;
    parser.finish()?;
    Ok(expr)
}

/// Parses `lhs = rhs` in infix form.
pub fn parse_equation_infix(input: &str) -> Result<Equation, InfixError> {
    let mut parser = Parser { tokens: tokenize(input)?, pos: 0 };
    let lhs = parser.expression()?;
    if parser.next() != Some(Token::Equals) {
        return Err(InfixError::NotAnEquation);
    }
    let rhs = parser.expression()?;
    parser.finish()?;
    Ok(Equation::new(lhs, rhs))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    fn expect(&mut self, expected: Token) -> Result<(), InfixError> {
        match self.next() {
            Some(t) if t == expected => Ok(()),
            Some(_) => Err(InfixError::UnexpectedToken(self.pos - 1)),
            None => Err(InfixError::UnexpectedEnd),
        }
    }

    fn finish(&self) -> Result<(), InfixError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(InfixError::UnexpectedToken(self.pos))
        }
    }

    // expression := ['-'] term (('+' | '-') term)*
    fn expression(&mut self) -> Result<Expression, InfixError> {
        let mut terms = Vec::new();
        let first = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                Expression::neg(self.term()?)
            }
            _ => self.term()?,
        };
        terms.push(first);
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    terms.push(Expression::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expression::add(terms))
    }

    fn term(&mut self) -> Result<Expression, InfixError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = Expression::mul(alloc::vec![acc, rhs]);
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = Expression::div(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expression, InfixError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(Expression::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, InfixError> {
        let base = self.primary()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let exponent = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            Expression::neg(self.primary()?)
        } else {
            self.primary()?
        };
        Ok(Expression::pow(base, exponent))
    }

    fn primary(&mut self) -> Result<Expression, InfixError> {
        match self.next() {
            Some(Token::Number(value)) => Ok(Expression::number(value)),
            Some(Token::LParen) => {
                let inner = self.expression()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(Token::Name(name)) => {
                if self.peek() == Some(&Token::LParen) {
                    self.pos += 1;
                    let args = self.arguments()?;
                    call(name, args)
                } else {
                    let symbol: Symbol = name.parse().map_err(|_| InfixError::BadIdentifier(name.clone()))?;
                    Ok(Expression::Identifier(symbol))
                }
            }
            Some(_) => Err(InfixError::UnexpectedToken(self.pos - 1)),
            None => Err(InfixError::UnexpectedEnd),
        }
    }

    fn arguments(&mut self) -> Result<Vec<Expression>, InfixError> {
        let mut args = Vec::new();
        if self.peek() == Some(&Token::RParen) {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.expression()?);
            match self.next() {
                Some(Token::Comma) => continue,
                Some(Token::RParen) => return Ok(args),
                Some(_) => return Err(InfixError::UnexpectedToken(self.pos - 1)),
                None => return Err(InfixError::UnexpectedEnd),
            }
        }
    }
}

fn call(name: String, mut args: Vec<Expression>) -> Result<Expression, InfixError> {
    let as_symbol = |e: &Expression| match e {
        Expression::Identifier(s) => Ok(s.clone()),
        _ => Err(InfixError::BadIdentifier(name.clone())),
    };
    match name.as_str() {
        "sqrt" => {
            if args.len() != 1 {
                return Err(InfixError::Arity(name, 1));
            }
            Ok(Expression::sqrt(args.remove(0)))
        }
        "Derivative" => {
            if args.len() != 2 {
                return Err(InfixError::Arity(name, 2));
            }
            Ok(Expression::Derivative { dependent: as_symbol(&args[0])?, independent: as_symbol(&args[1])? })
        }
        "Sum" => {
            if args.len() != 4 {
                return Err(InfixError::Arity(name, 4));
            }
            let index = as_symbol(&args[1])?;
            let upper = args.remove(3);
            let lower = args.remove(2);
            let body = args.remove(0);
            Ok(Expression::Sum { index, lower: Box::new(lower), upper: Box::new(upper), body: Box::new(body) })
        }
        _ => {
            if name.contains('_') || name.is_empty() {
                return Err(InfixError::BadIdentifier(name.to_owned()));
            }
            Ok(Expression::Function { name, args })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::render_infix;
    use alloc::vec;

    #[test]
    fn parses_rendered_forms() {
        let e = parse_infix("s / t").unwrap();
        assert_eq!(e, Expression::div(Expression::var("s"), Expression::var("t")));
        let e = parse_infix("m * c^2").unwrap();
        assert_eq!(
            e,
            Expression::mul(vec![Expression::var("m"), Expression::pow(Expression::var("c"), Expression::int(2))])
        );
        let e = parse_infix("a - b").unwrap();
        assert_eq!(e, Expression::Add(vec![Expression::var("a"), Expression::neg(Expression::var("b"))]));
    }

    #[test]
    fn subscripts_and_calls() {
        let e = parse_infix("p_{tot,1} + m_i * sqrt(x)").unwrap();
        assert_eq!(render_infix(&e), "p_{tot,1} + m_i * sqrt(x)");
        let e = parse_infix("Derivative(v, t)").unwrap();
        assert!(matches!(e, Expression::Derivative { .. }));
    }

    #[test]
    fn decimals_become_rationals() {
        assert_eq!(parse_infix("2.5").unwrap(), Expression::Rational(BigRational::new(5.into(), 2.into())));
    }

    #[test]
    fn equation() {
        let eq = parse_equation_infix("v = s / t").unwrap();
        assert_eq!(eq.lhs, Expression::var("v"));
        assert!(parse_equation_infix("v + s").is_err());
    }

    #[test]
    fn errors() {
        assert!(parse_infix("s / ").is_err());
        assert!(parse_infix("(a + b").is_err());
        assert!(parse_infix("a $ b").is_err());
        assert!(parse_infix("sqrt(a, b)").is_err());
    }
}
