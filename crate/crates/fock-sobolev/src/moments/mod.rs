//! Gaussian moment engine: I_{j,k}(A, Bbar) = (1/pi) ∫ z^j conj(z)^k
//! e^{Az + Bbar*conj(z) - |z|^2} dA(z), with three independent evaluation
//! paths (closed form, power series, quadrature) and the sesquilinear
//! atom-pair moments every matrix entry and Berezin value reduces to.

pub(crate) mod quadrature;

pub use quadrature::{moment_quadrature, sesqui_moment_quadrature};

use crate::numerics::{Ctx, PrecComplex, SeriesSum};
use crate::symbols::{Atom, AtomKind};
use crate::{Error, Result};

use rug::{Float, Integer};

#[derive(Clone, Debug)]
pub struct MomentQuery {
    pub j: usize,
    pub k: usize,
    pub a: PrecComplex,
    pub bbar: PrecComplex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    ClosedForm,
    Series,
    Quadrature,
}

impl Path {
    pub fn name(&self) -> &'static str {
        match self {
            Path::ClosedForm => "closed",
            Path::Series => "series",
            Path::Quadrature => "quad",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MomentResult {
    pub value: PrecComplex,
    pub path: Path,
    pub err_estimate: Float,
}

/// Closed form: I_{j,k} = e^{A*Bbar} * sum_{t=0}^{min(j,k)}
/// binom(j,t) binom(k,t) t! A^{k-t} Bbar^{j-t}.
///
/// The coefficient sum is exact (integer coefficients, finitely many terms);
/// when A*Bbar is a symbolic integer multiple of 2 pi i the exponential
/// factor is exactly one, so resonant moments carry no rounding from it.
pub fn moment_closed(ctx: &Ctx, q: &MomentQuery) -> MomentResult {
    let expf = q.a.mul(&q.bbar).exp();
    let tmax = q.j.min(q.k);
    let mut apow = Vec::with_capacity(q.k + 1);
    apow.push(ctx.one());
    for _ in 0..q.k {
        let last = apow.last().unwrap().mul(&q.a);
        apow.push(last);
    }
    let mut bpow = Vec::with_capacity(q.j + 1);
    bpow.push(ctx.one());
    for _ in 0..q.j {
        let last = bpow.last().unwrap().mul(&q.bbar);
        bpow.push(last);
    }
    let fact = ctx.fact();
    let mut sum = ctx.zero();
    for t in 0..=tmax {
        let coeff = fact.binom(q.j, t) * fact.binom(q.k, t) * fact.factorial(t);
        let term = apow[q.k - t].mul(&bpow[q.j - t]).scale_int(&coeff);
        sum = sum.add(&term);
    }
    MomentResult {
        value: expf.mul(&sum),
        path: Path::ClosedForm,
        err_estimate: Float::new(ctx.prec()),
    }
}

/// Closed-form moment value without the result wrapper.
pub fn moment_value(
    ctx: &Ctx,
    j: usize,
    k: usize,
    a: &PrecComplex,
    bbar: &PrecComplex,
) -> PrecComplex {
    moment_closed(ctx, &MomentQuery { j, k, a: a.clone(), bbar: bbar.clone() }).value
}

/// Series route: I_{j,k} = sum_{s >= max(j,k)} s! A^{s-j} Bbar^{s-k} /
/// ((s-j)!(s-k)!), an independent oracle for the closed form. The tail
/// bound in err_estimate comes from the ratio test at the stopping index.
pub fn moment_series(ctx: &Ctx, q: &MomentQuery) -> Result<MomentResult> {
    let (j, k) = (q.j, q.k);
    let a = q.a.numerize();
    let bbar = q.bbar.numerize();
    let x = a.mul(&bbar);
    let s0 = j.max(k);
    let c0 = if j >= k { ctx.fact().ratio(j, j - k) } else { ctx.fact().ratio(k, k - j) };
    let base = if j >= k { bbar.powu((j - k) as u32) } else { a.powu((k - j) as u32) };
    let mut term = base.scale_int(&c0);
    let mut acc = SeriesSum::new(ctx);
    let mut s = s0;
    loop {
        if acc.push(&term) {
            break;
        }
        let num = Integer::from(s as u64 + 1);
        let den = Integer::from(((s + 1 - j) * (s + 1 - k)) as u64);
        term = term.mul(&x).scale_int(&num).div_int(&den);
        s += 1;
    }
    if !acc.converged() {
        return Err(Error::NonConvergence { terms: acc.terms() });
    }
    let ratio_next =
        x.abs().to_f64() * (s as f64 + 1.0) / (((s + 1 - j) * (s + 1 - k)) as f64);
    let last = acc.last_mag().to_f64();
    let err = if ratio_next < 1.0 {
        last * ratio_next / (1.0 - ratio_next)
    } else {
        last
    };
    Ok(MomentResult {
        value: acc.value(),
        path: Path::Series,
        err_estimate: ctx.float(err),
    })
}

fn exp_param(ctx: &Ctx, atom: &Atom) -> PrecComplex {
    match &atom.kind {
        AtomKind::Exp(a) => a.clone(),
        _ => ctx.zero(),
    }
}

/// Moment of a monomial-weighted atom pair: (1/pi) ∫ w^{j0+af} conj(w)^{k0+ag}
/// phi_f(w) conj(phi_g(w)) e^{-|w|^2} dA, where phi is 1, e^{Aw} or
/// K_m(w, A) according to the atom kind.
///
/// Exponential/monomial pairs reduce to one closed-form moment. Kernel atoms
/// are expanded through their power series and summed adaptively; the leading
/// structurally-zero stretch (moments with mismatched degrees vanish exactly)
/// is skipped so the truncation rule only ever sees the live tail.
pub fn sesqui_atom_moment(
    ctx: &Ctx,
    m: u32,
    j_base: usize,
    k_base: usize,
    f: &Atom,
    g: &Atom,
) -> Result<PrecComplex> {
    let j0 = j_base + f.power as usize;
    let k0 = k_base + g.power as usize;
    let mfact = ctx.fact().factorial(m as usize);
    match (&f.kind, &g.kind) {
        (AtomKind::Ker(pf), AtomKind::Ker(pg)) => {
            // Both sides expanded: only degree-matched moments survive,
            // leaving a single sum over s with t = j0 + s - k0.
            let pfbar = pf.conj();
            let s_min = k0.saturating_sub(j0);
            let t_min = j0 + s_min - k0;
            let mut cs = pfbar
                .powu(s_min as u32)
                .scale_int(&mfact)
                .div_int(&ctx.fact().factorial(s_min + m as usize));
            let mut dt = pg
                .powu(t_min as u32)
                .scale_int(&mfact)
                .div_int(&ctx.fact().factorial(t_min + m as usize));
            let mut acc = SeriesSum::new(ctx);
            let mut s = s_min;
            loop {
                let moment = ctx.factorial_f(j0 + s);
                let term = cs.mul(&dt).scale(&moment);
                if acc.push(&term) {
                    break;
                }
                let t = j0 + s - k0;
                cs = cs.mul(&pfbar).div_int(&Integer::from((s + 1 + m as usize) as u64));
                dt = dt.mul(pg).div_int(&Integer::from((t + 1 + m as usize) as u64));
                s += 1;
            }
            if !acc.converged() {
                return Err(Error::NonConvergence { terms: acc.terms() });
            }
            Ok(acc.value())
        }
        (AtomKind::Ker(pf), _) => {
            let bbar = exp_param(ctx, g).conj();
            let a0 = ctx.zero();
            let pfbar = pf.conj();
            // I_{j0+s, k0}(0, Bbar) vanishes exactly while j0 + s < k0.
            let s_min = k0.saturating_sub(j0);
            let mut cs = pfbar
                .powu(s_min as u32)
                .scale_int(&mfact)
                .div_int(&ctx.fact().factorial(s_min + m as usize));
            let mut acc = SeriesSum::new(ctx);
            let mut s = s_min;
            loop {
                let term = cs.mul(&moment_value(ctx, j0 + s, k0, &a0, &bbar));
                if acc.push(&term) {
                    break;
                }
                cs = cs.mul(&pfbar).div_int(&Integer::from((s + 1 + m as usize) as u64));
                s += 1;
            }
            if !acc.converged() {
                return Err(Error::NonConvergence { terms: acc.terms() });
            }
            Ok(acc.value())
        }
        (_, AtomKind::Ker(pg)) => {
            let a = exp_param(ctx, f);
            let b0 = ctx.zero();
            // I_{j0, k0+t}(A, 0) vanishes exactly while k0 + t < j0.
            let t_min = j0.saturating_sub(k0);
            let mut dt = pg
                .powu(t_min as u32)
                .scale_int(&mfact)
                .div_int(&ctx.fact().factorial(t_min + m as usize));
            let mut acc = SeriesSum::new(ctx);
            let mut t = t_min;
            loop {
                let term = dt.mul(&moment_value(ctx, j0, k0 + t, &a, &b0));
                if acc.push(&term) {
                    break;
                }
                dt = dt.mul(pg).div_int(&Integer::from((t + 1 + m as usize) as u64));
                t += 1;
            }
            if !acc.converged() {
                return Err(Error::NonConvergence { terms: acc.terms() });
            }
            Ok(acc.value())
        }
        (_, _) => {
            let a = exp_param(ctx, f);
            let bbar = exp_param(ctx, g).conj();
            Ok(moment_value(ctx, j0, k0, &a, &bbar))
        }
    }
}

/// One application of (d/du + gamma) to a polynomial in u.
fn displacement_op(ctx: &Ctx, v: &[PrecComplex], gamma: &PrecComplex) -> Vec<PrecComplex> {
    let mut out = vec![ctx.zero(); v.len().max(1)];
    for (i, vi) in v.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        if i >= 1 {
            out[i - 1] = out[i - 1].add(&vi.scale_int(&Integer::from(i as u64)));
        }
        out[i] = out[i].add(&vi.mul(gamma));
    }
    out
}

fn poly_eval(ctx: &Ctx, p: &[PrecComplex], z: &PrecComplex) -> PrecComplex {
    let mut acc = ctx.zero();
    for c in p.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}

/// Gaussian moment of p(w) conj(q(w)) against the displaced weight
/// e^{(A+zbar)w + (Bbar+z)conj(w) - |w|^2}, expanded into closed-form
/// monomial moments. Reference side of the displacement identity.
pub fn displaced_moment_by_expansion(
    ctx: &Ctx,
    p: &[PrecComplex],
    q: &[PrecComplex],
    a: &PrecComplex,
    b: &PrecComplex,
    z: &PrecComplex,
) -> PrecComplex {
    let aa = a.add(&z.conj());
    let bb = b.conj().add(z);
    let mut sum = ctx.zero();
    for (i, pi) in p.iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        for (l, ql) in q.iter().enumerate() {
            if ql.is_zero() {
                continue;
            }
            let mval = moment_value(ctx, i, l, &aa, &bb);
            sum = sum.add(&pi.mul(&ql.conj()).mul(&mval));
        }
    }
    sum
}

/// The same moment via the operator identity
///
///   e^{gamma u} q*(d/du + gamma) p(u)  at  u = Bbar + z,  gamma = A + zbar,
///
/// where q* is the coefficient-conjugated polynomial. The identity follows
/// by writing conj(q(w)) = q*(conj(w)), producing each conj(w)^b under the
/// integral as a u-derivative of the reproducing identity
/// (1/pi) ∫ p(w) e^{gamma w + u conj(w) - |w|^2} dA = p(u) e^{gamma u}.
/// Operator powers are expanded by iterated application.
pub fn displaced_moment_by_operator(
    ctx: &Ctx,
    p: &[PrecComplex],
    q: &[PrecComplex],
    a: &PrecComplex,
    b: &PrecComplex,
    z: &PrecComplex,
) -> PrecComplex {
    let gamma = a.add(&z.conj());
    let u = b.conj().add(z);
    let mut result: Vec<PrecComplex> = Vec::new();
    let mut cur = p.to_vec();
    for (bidx, qb) in q.iter().enumerate() {
        if !qb.is_zero() {
            let qc = qb.conj();
            if result.len() < cur.len() {
                result.resize(cur.len(), ctx.zero());
            }
            for (i, ci) in cur.iter().enumerate() {
                result[i] = result[i].add(&ci.mul(&qc));
            }
        }
        if bidx + 1 < q.len() {
            cur = displacement_op(ctx, &cur, &gamma);
        }
    }
    let rval = poly_eval(ctx, &result, &u);
    let pref = gamma.mul(&u).exp();
    pref.mul(&rval)
}
