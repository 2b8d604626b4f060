//! Symbol data model: finite linear combinations of atoms z^a, z^a e^{Az}
//! and z^a K_m(z, A), with a canonical form, a text grammar (see `parser`),
//! pointwise evaluation and truncated power-series views.

mod parser;

pub use parser::parse_symbol;

use crate::numerics::{float_to_decimal, kernel, Ctx, PrecComplex};
use crate::{Error, Result};

use rug::Integer;
use std::cmp::Ordering;

/// Multiplicative factor attached to a monomial z^a.
///
/// `Ker(A)` stores A exactly as written; the conjugation demanded by the
/// kernel series K_m(z,A) = sum_k m!/(k+m)! (z conj(A))^k is applied at
/// evaluation and expansion time, nowhere else.
#[derive(Clone, Debug)]
pub enum AtomKind {
    Poly,
    Exp(PrecComplex),
    Ker(PrecComplex),
}

#[derive(Clone, Debug)]
pub struct Atom {
    pub power: u32,
    pub kind: AtomKind,
}

impl Atom {
    pub fn poly(power: u32) -> Atom {
        Atom { power, kind: AtomKind::Poly }
    }

    pub fn exp(power: u32, a: PrecComplex) -> Atom {
        Atom { power, kind: AtomKind::Exp(a) }
    }

    pub fn ker(power: u32, a: PrecComplex) -> Atom {
        Atom { power, kind: AtomKind::Ker(a) }
    }

    /// Kind with a zero parameter degrades to the plain monomial: Exp(0) is
    /// z^a and Ker(0) is z^a for every m.
    fn normalized(self) -> Atom {
        match &self.kind {
            AtomKind::Exp(a) | AtomKind::Ker(a) if a.is_zero() => Atom::poly(self.power),
            _ => self,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self.kind {
            AtomKind::Poly => 0,
            AtomKind::Exp(_) => 1,
            AtomKind::Ker(_) => 2,
        }
    }

    pub fn param(&self) -> Option<&PrecComplex> {
        match &self.kind {
            AtomKind::Poly => None,
            AtomKind::Exp(a) | AtomKind::Ker(a) => Some(a),
        }
    }

    pub fn repr_eq(&self, other: &Atom) -> bool {
        if self.power != other.power || self.kind_rank() != other.kind_rank() {
            return false;
        }
        match (self.param(), other.param()) {
            (None, None) => true,
            (Some(a), Some(b)) => a.repr_eq(b),
            _ => false,
        }
    }

    fn cmp_canonical(&self, other: &Atom) -> Ordering {
        self.kind_rank()
            .cmp(&other.kind_rank())
            .then(self.power.cmp(&other.power))
            .then_with(|| match (self.param(), other.param()) {
                (Some(a), Some(b)) => a.repr_cmp(b),
                _ => Ordering::Equal,
            })
    }
}

/// Finite linear combination of atoms in canonical form: zero coefficients
/// dropped, identical atoms merged, terms sorted by (kind, power, parameter).
#[derive(Clone, Debug)]
pub struct HoloSymbol {
    terms: Vec<(PrecComplex, Atom)>,
}

impl HoloSymbol {
    pub fn zero() -> HoloSymbol {
        HoloSymbol { terms: Vec::new() }
    }

    pub fn constant(c: PrecComplex) -> HoloSymbol {
        if c.is_zero() {
            return HoloSymbol::zero();
        }
        HoloSymbol { terms: vec![(c, Atom::poly(0))] }
    }

    pub fn one(ctx: &Ctx) -> HoloSymbol {
        HoloSymbol::constant(ctx.one())
    }

    /// Builds the canonical form, enforcing the context's power and term
    /// caps.
    pub fn from_terms(ctx: &Ctx, terms: Vec<(PrecComplex, Atom)>) -> Result<HoloSymbol> {
        let mut norm: Vec<(PrecComplex, Atom)> = Vec::with_capacity(terms.len());
        for (coef, atom) in terms {
            if u64::from(atom.power) > u64::from(ctx.power_cap()) {
                return Err(Error::PowerCap { power: u64::from(atom.power), cap: ctx.power_cap() });
            }
            norm.push((coef, atom.normalized()));
        }
        norm.sort_by(|x, y| x.1.cmp_canonical(&y.1));
        let mut merged: Vec<(PrecComplex, Atom)> = Vec::with_capacity(norm.len());
        for (coef, atom) in norm {
            match merged.last_mut() {
                Some((c, a)) if a.repr_eq(&atom) => *c = c.add(&coef),
                _ => merged.push((coef, atom)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        if merged.len() > ctx.term_cap() {
            return Err(Error::TermCap { count: merged.len(), cap: ctx.term_cap() });
        }
        Ok(HoloSymbol { terms: merged })
    }

    pub fn terms(&self) -> &[(PrecComplex, Atom)] {
        &self.terms
    }

    /// True iff the symbol is a complex constant (possibly zero).
    pub fn is_constant(&self) -> bool {
        match self.terms.as_slice() {
            [] => true,
            [(_, atom)] => atom.power == 0 && matches!(atom.kind, AtomKind::Poly),
            _ => false,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.iter().all(|(_, a)| matches!(a.kind, AtomKind::Poly))
    }

    /// Degree when the symbol is a pure polynomial in z.
    pub fn poly_degree(&self) -> Option<u32> {
        if !self.is_polynomial() {
            return None;
        }
        Some(self.terms.iter().map(|(_, a)| a.power).max().unwrap_or(0))
    }

    pub fn max_power(&self) -> u32 {
        self.terms.iter().map(|(_, a)| a.power).max().unwrap_or(0)
    }

    /// Distinct non-zero exponential/kernel frequency parameters, in
    /// canonical order.
    pub fn frequencies(&self) -> Vec<PrecComplex> {
        let mut out: Vec<PrecComplex> = Vec::new();
        for (_, atom) in &self.terms {
            if let Some(a) = atom.param() {
                if !out.iter().any(|x| x.repr_eq(a)) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    /// Pointwise value at z; kernel atoms need the space order m.
    pub fn eval(&self, ctx: &Ctx, z: &PrecComplex, m: u32) -> PrecComplex {
        let mut sum = ctx.zero();
        for (coef, atom) in &self.terms {
            let mut v = coef.mul(&z.powu(atom.power));
            match &atom.kind {
                AtomKind::Poly => {}
                AtomKind::Exp(a) => v = v.mul(&a.mul(z).exp()),
                AtomKind::Ker(a) => v = v.mul(&kernel(ctx, z, a, m)),
            }
            sum = sum.add(&v);
        }
        sum
    }

    /// Representation-level equality of canonical forms.
    pub fn canonical_eq(&self, other: &HoloSymbol) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((c, a), (d, b))| c.repr_eq(d) && a.repr_eq(b))
    }

    /// Canonical text form; `parse_symbol` reads it back to an equal symbol.
    pub fn print(&self) -> String {
        if self.terms.is_empty() {
            return "(0,0)".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(coef, atom)| {
                let mut s = fmt_cnum(coef);
                if atom.power == 1 {
                    s.push_str("*z");
                } else if atom.power > 1 {
                    s.push_str(&format!("*z^{}", atom.power));
                }
                match &atom.kind {
                    AtomKind::Poly => {}
                    AtomKind::Exp(a) => s.push_str(&format!("*exp({})", fmt_cnum(a))),
                    AtomKind::Ker(a) => s.push_str(&format!("*ker({})", fmt_cnum(a))),
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
}

fn fmt_cnum(c: &PrecComplex) -> String {
    let suffix = if c.is_pi_scaled() { "pi" } else { "" };
    format!(
        "({}{},{}{})",
        float_to_decimal(c.raw_re()),
        suffix,
        float_to_decimal(c.raw_im()),
        suffix
    )
}

/// Product f(w) * conj(g(w)) of two holomorphic symbols, the shape every
/// Toeplitz-style sesquilinear computation consumes.
#[derive(Clone, Debug)]
pub struct SesquiSymbol {
    pub f: HoloSymbol,
    pub g: HoloSymbol,
}

impl SesquiSymbol {
    pub fn new(f: HoloSymbol, g: HoloSymbol) -> SesquiSymbol {
        SesquiSymbol { f, g }
    }

    pub fn eval(&self, ctx: &Ctx, w: &PrecComplex, m: u32) -> PrecComplex {
        self.f.eval(ctx, w, m).mul(&self.g.eval(ctx, w, m).conj())
    }
}

/// Truncated power-series coefficients of a symbol: coeffs[k] multiplies z^k.
#[derive(Clone, Debug)]
pub struct SeriesView {
    coeffs: Vec<PrecComplex>,
}

impl SeriesView {
    pub fn coeff(&self, k: usize) -> &PrecComplex {
        &self.coeffs[k]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[PrecComplex] {
        &self.coeffs
    }
}

/// Power-series coefficients of s up to degree d at space order m.
///
/// Exp(A) with monomial power a contributes coef*A^k/k! to c_{a+k}; Ker(A)
/// contributes coef*m!*conj(A)^k/(k+m)!.
pub fn series_coefficients(ctx: &Ctx, s: &HoloSymbol, m: u32, d: usize) -> SeriesView {
    let mut coeffs = vec![ctx.zero(); d + 1];
    for (coef, atom) in s.terms() {
        let a = atom.power as usize;
        if a > d {
            continue;
        }
        match &atom.kind {
            AtomKind::Poly => coeffs[a] = coeffs[a].add(coef),
            AtomKind::Exp(p) => {
                let mut t = coef.clone();
                coeffs[a] = coeffs[a].add(&t);
                for k in 1..=(d - a) {
                    t = t.mul(p).div_int(&Integer::from(k));
                    coeffs[a + k] = coeffs[a + k].add(&t);
                }
            }
            AtomKind::Ker(p) => {
                let pbar = p.conj();
                let mut t = coef.clone();
                coeffs[a] = coeffs[a].add(&t);
                for k in 1..=(d - a) {
                    t = t.mul(&pbar).div_int(&Integer::from(k as u64 + u64::from(m)));
                    coeffs[a + k] = coeffs[a + k].add(&t);
                }
            }
        }
    }
    SeriesView { coeffs }
}
