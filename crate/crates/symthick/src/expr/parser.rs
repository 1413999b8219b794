//! Recursive-descent parser for the coefficient expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := number | ident | '(' expr ')'
//!         | ('sin' | 'cos' | 'exp') '(' expr ')' | '-' atom
//! ```
//!
//! Numbers are unsigned integer or decimal literals and are kept as exact
//! rationals. Identifiers must be coordinate names of the supplied chart.
//! Errors carry the byte offset of the offending token.

use num::{BigInt, BigRational};

use super::{Expr, ExprError};
use crate::chart::Chart;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Number(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let b = self.bytes[self.pos];
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.pos += 1;
                }
                b'+' => {
                    self.pos += 1;
                    out.push((Tok::Plus, start));
                }
                b'-' => {
                    self.pos += 1;
                    out.push((Tok::Minus, start));
                }
                b'*' => {
                    self.pos += 1;
                    out.push((Tok::Star, start));
                }
                b'^' => {
                    self.pos += 1;
                    out.push((Tok::Caret, start));
                }
                b'(' => {
                    self.pos += 1;
                    out.push((Tok::LParen, start));
                }
                b')' => {
                    self.pos += 1;
                    out.push((Tok::RParen, start));
                }
                b'0'..=b'9' => {
                    out.push((self.number(start)?, start));
                }
                _ if b.is_ascii_alphabetic() || b == b'_' => {
                    while self.pos < self.bytes.len()
                        && (self.bytes[self.pos].is_ascii_alphanumeric()
                            || self.bytes[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    out.push((Tok::Ident(self.text[start..self.pos].to_string()), start));
                }
                _ => {
                    return Err(ExprError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", self.text[start..].chars().next().unwrap()),
                    });
                }
            }
        }
        Ok(out)
    }

    fn number(&mut self, start: usize) -> Result<Tok, ExprError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let mut frac_digits = 0usize;
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_digits = self.pos - frac_start;
            if frac_digits == 0 {
                return Err(ExprError::Syntax {
                    offset: self.pos.saturating_sub(1),
                    message: "expected digits after decimal point".to_string(),
                });
            }
        }
        let digits: String = self.text[start..self.pos]
            .chars()
            .filter(|c| *c != '.')
            .collect();
        let numer: BigInt = digits.parse().expect("digit string");
        let denom = BigInt::from(10).pow(frac_digits as u32);
        Ok(Tok::Number(BigRational::new(numer, denom)))
    }
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    chart: &'a Chart,
    end_offset: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, o)| *o)
            .unwrap_or(self.end_offset)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        match self.bump() {
            Some((t, _)) if t == tok => Ok(()),
            Some((_, o)) => Err(ExprError::Syntax {
                offset: o,
                message: format!("expected {what}"),
            }),
            None => Err(ExprError::Syntax {
                offset: self.end_offset,
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let first = self.term()?;
        let mut terms = vec![first];
        loop {
            match self.peek() {
                Some((Tok::Plus, _)) => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Some((Tok::Minus, _)) => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(Expr::Neg(Box::new(t)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let first = self.factor()?;
        let mut factors = vec![first];
        while matches!(self.peek(), Some((Tok::Star, _))) {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some((Tok::Caret, _))) {
            self.bump();
            let off = self.offset();
            match self.bump() {
                Some((Tok::Number(q), _)) if q.is_integer() && !num::Signed::is_negative(&q) => {
                    let exp = num::ToPrimitive::to_u32(q.numer()).ok_or(ExprError::Syntax {
                        offset: off,
                        message: "exponent too large".to_string(),
                    })?;
                    Ok(Expr::Power(Box::new(base), exp))
                }
                _ => Err(ExprError::Syntax {
                    offset: off,
                    message: "expected unsigned integer exponent".to_string(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let off = self.offset();
        match self.bump() {
            Some((Tok::Number(q), _)) => Ok(Expr::Constant(q)),
            Some((Tok::Ident(name), o)) => {
                if matches!(name.as_str(), "sin" | "cos" | "exp") {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(Box::new(arg)),
                        "cos" => Expr::Cos(Box::new(arg)),
                        _ => Expr::Exp(Box::new(arg)),
                    })
                } else {
                    match self.chart.index_of(&name) {
                        Some(i) => Ok(Expr::Coord(i)),
                        None => Err(ExprError::UnknownIdentifier { name, offset: o }),
                    }
                }
            }
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some((Tok::Minus, _)) => {
                let inner = self.atom()?;
                Ok(Expr::Neg(Box::new(inner)))
            }
            Some((_, o)) => Err(ExprError::Syntax {
                offset: o,
                message: "expected number, coordinate, `(`, function call, or `-`".to_string(),
            }),
            None => Err(ExprError::Syntax {
                offset: off,
                message: "unexpected end of input".to_string(),
            }),
        }
    }
}

/// Parse `text` against the coordinate names of `chart`.
pub fn parse(text: &str, chart: &Chart) -> Result<Expr, ExprError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut p = Parser {
        tokens,
        pos: 0,
        chart,
        end_offset: text.len(),
    };
    let e = p.expr()?;
    if let Some((_, o)) = p.peek() {
        return Err(ExprError::Syntax {
            offset: *o,
            message: "trailing input after expression".to_string(),
        });
    }
    Ok(e)
}
