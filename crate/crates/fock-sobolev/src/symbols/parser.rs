//! Text grammar for symbols (whitespace-insensitive):
//!
//! ```text
//! symbol  := term { "+" term } ;
//! term    := factor { "*" factor } ;
//! factor  := "z^" int | "z" | "exp(" cnum ")" | "ker(" cnum ")" | cnum ;
//! cnum    := "(" real "," real ")" | real ;
//! real    := decimal [ "pi" ] | "-" real ;
//! ```
//!
//! A real with the `pi` suffix is scaled by pi; a parenthesized pair whose
//! non-zero components all carry the suffix stays symbolically pi-scaled
//! (so resonance tests on exp arguments remain exact). Numeric factors
//! multiply into the term coefficient, repeated z factors add their powers,
//! exp factors merge by adding arguments. Products of two kernel atoms, or
//! of a kernel atom with a non-trivial exponential, are rejected.

use crate::numerics::{float_from_decimal, Ctx, PrecComplex};
use crate::symbols::{Atom, HoloSymbol};
use crate::{Error, Result};

use rug::Float;

pub fn parse_symbol(ctx: &Ctx, text: &str) -> Result<HoloSymbol> {
    let mut p = Parser { ctx, bytes: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos == p.bytes.len() {
        return Err(p.err("empty symbol"));
    }
    let mut terms = Vec::new();
    terms.push(p.parse_term()?);
    loop {
        p.skip_ws();
        if p.peek() == Some(b'+') {
            p.pos += 1;
            terms.push(p.parse_term()?);
        } else {
            break;
        }
    }
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    HoloSymbol::from_terms(ctx, terms)
}

struct Parser<'a> {
    ctx: &'a Ctx,
    bytes: &'a [u8],
    pos: usize,
}

enum Factor {
    Z(u64),
    Num(PrecComplex),
    Exp(PrecComplex),
    Ker(PrecComplex),
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.peek().map_or(false, |b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        if self.bytes[self.pos..].starts_with(kw.as_bytes()) {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn parse_term(&mut self) -> Result<(PrecComplex, Atom)> {
        let mut coef = self.ctx.one();
        let mut power: u64 = 0;
        let mut exp_param: Option<PrecComplex> = None;
        let mut ker_param: Option<PrecComplex> = None;
        loop {
            self.skip_ws();
            match self.parse_factor()? {
                Factor::Z(p) => power += p,
                Factor::Num(c) => coef = coef.mul(&c),
                Factor::Exp(a) => {
                    if !a.is_zero() {
                        exp_param = Some(match exp_param {
                            None => a,
                            Some(e) => e.add(&a),
                        });
                    }
                }
                Factor::Ker(a) => {
                    if !a.is_zero() {
                        if ker_param.is_some() {
                            return Err(Error::UnsupportedProduct(
                                "product of two kernel atoms".to_string(),
                            ));
                        }
                        ker_param = Some(a);
                    }
                }
            }
            self.skip_ws();
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        if let Some(e) = &exp_param {
            if e.is_zero() {
                exp_param = None;
            }
        }
        if power > u64::from(self.ctx.power_cap()) {
            return Err(Error::PowerCap { power, cap: self.ctx.power_cap() });
        }
        let power = power as u32;
        let atom = match (ker_param, exp_param) {
            (Some(_), Some(_)) => {
                return Err(Error::UnsupportedProduct(
                    "kernel atom times non-trivial exponential".to_string(),
                ))
            }
            (Some(k), None) => Atom::ker(power, k),
            (None, Some(e)) => Atom::exp(power, e),
            (None, None) => Atom::poly(power),
        };
        Ok((coef, atom))
    }

    fn parse_factor(&mut self) -> Result<Factor> {
        self.skip_ws();
        if self.eat_keyword("exp") {
            self.expect(b'(')?;
            let c = self.parse_cnum()?;
            self.expect(b')')?;
            return Ok(Factor::Exp(c));
        }
        if self.eat_keyword("ker") {
            self.expect(b'(')?;
            let c = self.parse_cnum()?;
            self.expect(b')')?;
            return Ok(Factor::Ker(c));
        }
        if self.eat_keyword("z") {
            self.skip_ws();
            if self.peek() == Some(b'^') {
                self.pos += 1;
                self.skip_ws();
                let n = self.parse_uint()?;
                return Ok(Factor::Z(n));
            }
            return Ok(Factor::Z(1));
        }
        match self.peek() {
            Some(b'(') | Some(b'-') | Some(b'0'..=b'9') => Ok(Factor::Num(self.parse_cnum()?)),
            _ => Err(self.err("expected a factor: z, z^k, exp(..), ker(..) or a number")),
        }
    }

    fn parse_uint(&mut self) -> Result<u64> {
        let start = self.pos;
        let mut v: u64 = 0;
        while let Some(b @ b'0'..=b'9') = self.peek() {
            v = v
                .checked_mul(10)
                .and_then(|x| x.checked_add(u64::from(b - b'0')))
                .ok_or_else(|| Error::PowerCap {
                    power: u64::MAX,
                    cap: self.ctx.power_cap(),
                })?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        Ok(v)
    }

    /// real := decimal ["pi"] | "-" real; returns the magnitude and whether
    /// the pi suffix was present.
    fn parse_real(&mut self) -> Result<(Float, bool)> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let (v, pi) = self.parse_real()?;
            return Ok((-v, pi));
        }
        let v = self.parse_decimal()?;
        let pi = self.eat_keyword("pi");
        Ok((v, pi))
    }

    fn parse_decimal(&mut self) -> Result<Float> {
        self.skip_ws();
        let start = self.pos;
        while let Some(b'0'..=b'9') = self.peek() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a decimal number"));
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while let Some(b'0'..=b'9') = self.peek() {
                self.pos += 1;
            }
        }
        // Exponent marker, only when an actual exponent follows.
        if let Some(b'e') | Some(b'E') = self.peek() {
            let mark = self.pos;
            self.pos += 1;
            if let Some(b'+') | Some(b'-') = self.peek() {
                self.pos += 1;
            }
            let digits_at = self.pos;
            while let Some(b'0'..=b'9') = self.peek() {
                self.pos += 1;
            }
            if self.pos == digits_at {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        float_from_decimal(self.ctx.prec(), text)
            .ok_or_else(|| self.err("unreadable decimal number"))
    }

    /// cnum := "(" real "," real ")" | real. A pair stays symbolically
    /// pi-scaled when every non-zero component carries the suffix.
    fn parse_cnum(&mut self) -> Result<PrecComplex> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let (re, re_pi) = self.parse_real()?;
            self.expect(b',')?;
            let (im, im_pi) = self.parse_real()?;
            self.expect(b')')?;
            let symbolic = (re_pi || im_pi)
                && (re_pi || re.is_zero())
                && (im_pi || im.is_zero());
            if symbolic {
                return Ok(PrecComplex::pi_scaled(re, im));
            }
            let re = if re_pi { numerize_pi(self.ctx, re) } else { re };
            let im = if im_pi { numerize_pi(self.ctx, im) } else { im };
            return Ok(PrecComplex::from_floats(re, im));
        }
        let (re, re_pi) = self.parse_real()?;
        if re_pi {
            return Ok(PrecComplex::pi_scaled(re, Float::new(self.ctx.prec())));
        }
        Ok(PrecComplex::from_real(re))
    }
}

fn numerize_pi(ctx: &Ctx, v: Float) -> Float {
    use rug::float::Constant;
    v * Float::with_val(ctx.prec(), Constant::Pi)
}
