//! Surface syntax for gwi expressions.
//!
//! ```text
//! expr      := [sign] term { sign term }      sign := '+' | '-'
//! term      := rational [monomial] | monomial
//! rational  := integer [ '/' positive-integer ]
//! monomial  := bracket { bracket }
//! bracket   := '<' insertion { insertion } '>' [ '_' natural ]
//! insertion := label [ ':' natural ]
//! label     := letter { letter | digit }
//! ```
//!
//! The lone expression `0` is the empty sum.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::term::{Bracket, GwiExpr, GwiMonomial, Insertion, Label, Q};

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn found(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(c) => format!("{c:?}"),
        }
    }

    fn error(&self, expected: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            expected: expected.into(),
            found: self.found(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let rest = self.rest();
        let n = rest.bytes().take_while(u8::is_ascii_digit).count();
        if n == 0 {
            return None;
        }
        self.pos += n;
        Some(&rest[..n])
    }

    fn natural(&mut self, what: &str) -> Result<u32> {
        let start = self.pos;
        let d = self.digits().ok_or_else(|| self.error(what))?;
        d.parse().map_err(|_| Error::Syntax {
            position: start,
            expected: format!("{what} that fits in 32 bits"),
            found: d.into(),
        })
    }

    fn rational(&mut self) -> Result<Option<Q>> {
        let Some(num) = self.digits() else {
            return Ok(None);
        };
        let num: BigInt = num.parse().expect("digits");
        if !self.eat('/') {
            return Ok(Some(Q::from_integer(num)));
        }
        let at = self.pos;
        let den: BigInt = self
            .digits()
            .ok_or_else(|| self.error("denominator"))?
            .parse()
            .expect("digits");
        if den.is_zero() {
            return Err(Error::Syntax {
                position: at,
                expected: "positive denominator".into(),
                found: "0".into(),
            });
        }
        Ok(Some(Q::new(num, den)))
    }

    fn label(&mut self) -> Result<Label> {
        let rest = self.rest();
        let n = rest
            .char_indices()
            .take_while(|&(k, c)| {
                if k == 0 {
                    c.is_ascii_alphabetic()
                } else {
                    c.is_ascii_alphanumeric()
                }
            })
            .count();
        if n == 0 {
            return Err(self.error("label"));
        }
        self.pos += n;
        Label::new(&rest[..n])
    }

    fn bracket(&mut self) -> Result<Bracket> {
        if !self.eat('<') {
            return Err(self.error("'<'"));
        }
        let mut insertions = Vec::new();
        loop {
            self.skip_ws();
            if self.eat('>') {
                break;
            }
            let label = self.label()?;
            let psi = if self.eat(':') { self.natural("psi power")? } else { 0 };
            insertions.push(Insertion::new(label, psi));
        }
        if insertions.is_empty() {
            return Err(Error::Syntax {
                position: self.pos - 1,
                expected: "insertion".into(),
                found: "'>'".into(),
            });
        }
        let genus = if self.eat('_') { self.natural("genus")? } else { 0 };
        Bracket::new(genus, insertions)
    }

    fn monomial(&mut self) -> Result<GwiMonomial> {
        let mut brackets = vec![self.bracket()?];
        loop {
            self.skip_ws();
            if self.peek() != Some('<') {
                break;
            }
            brackets.push(self.bracket()?);
        }
        GwiMonomial::new(brackets)
    }

    fn expr(&mut self) -> Result<GwiExpr> {
        let mut out = GwiExpr::zero();
        self.skip_ws();
        let mut first = true;
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                if first {
                    return Err(self.error("term"));
                }
                break;
            }
            let mut sign = Q::one();
            if self.eat('-') {
                sign = -sign;
            } else if !self.eat('+') && !first {
                return Err(self.error("'+' or '-'"));
            }
            self.skip_ws();
            let coeff = self.rational()?;
            self.skip_ws();
            let coeff = coeff.map(|c| c * &sign);
            match (coeff, self.peek()) {
                (c, Some('<')) => {
                    let m = self.monomial()?;
                    out.add_term(c.unwrap_or(sign), m);
                }
                (Some(c), _) if c.is_zero() && first => {
                    // a bare `0` is the empty sum
                    self.skip_ws();
                    if self.peek().is_some() {
                        return Err(self.error("end of input after 0"));
                    }
                    return Ok(out);
                }
                _ => return Err(self.error("'<'")),
            }
            first = false;
        }
        Ok(out)
    }
}

/// Parse a gwi expression into canonical form.
pub fn parse_expr(text: &str) -> Result<GwiExpr> {
    Parser::new(text).expr()
}

/// Parse a single monomial (no coefficient).
pub fn parse_monomial(text: &str) -> Result<GwiMonomial> {
    let mut p = Parser::new(text);
    p.skip_ws();
    let m = p.monomial()?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.error("end of monomial"));
    }
    Ok(m)
}

/// Parse an exact rational such as `-13/240`.
pub fn parse_rational(text: &str) -> Result<Q> {
    let mut p = Parser::new(text.trim());
    let neg = p.eat('-');
    if !neg {
        p.eat('+');
    }
    let r = p.rational()?.ok_or_else(|| p.error("rational"))?;
    if p.peek().is_some() {
        return Err(p.error("end of rational"));
    }
    Ok(if neg { -r } else { r })
}

pub fn print_rational(r: &Q) -> String {
    r.to_string()
}

/// Print in canonical form; `parse_expr` inverts this exactly.
pub fn print_expr(e: &GwiExpr) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (n, (m, c)) in e.iter().enumerate() {
        let neg = c.is_negative();
        match (n, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let a = c.abs();
        if !a.is_one() {
            out.push_str(&a.to_string());
            out.push(' ');
        }
        out.push_str(&m.to_string());
    }
    out
}
