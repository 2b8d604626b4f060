//! Berezin transforms of sesquiholomorphic symbols: closed form for
//! exponential symbols, kernel-series expansion for general atoms, a
//! quadrature oracle, the semi-commutant Berezin identity, and the defect
//! function built from squared Hankel norms.

use crate::moments::quadrature::{angle_table, laguerre_rule, DEFAULT_ANGLES, DEFAULT_NODES};
use crate::moments::{moment_value, sesqui_atom_moment};
use crate::numerics::{kernel, kernel_closed, linalg, q_m, Ctx, PrecComplex};
use crate::operators::{coherent_vector, semicommutant};
use crate::symbols::{AtomKind, HoloSymbol, SesquiSymbol};
use crate::{Error, Result};

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Closed,
    Series,
    Quadrature,
    Matrix,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Closed => "closed",
            Route::Series => "series",
            Route::Quadrature => "quad",
            Route::Matrix => "matrix",
        }
    }
}

#[derive(Clone, Debug)]
pub struct BerezinSample {
    pub z: PrecComplex,
    pub value: PrecComplex,
    pub route: Route,
}

/// Berezin transform of e^{Aw} conj(e^{Bw}) with Bbar = conj(B), assembled
/// from displaced Gaussian integrals:
///
///   [ e^{(A+zb)(Bb+z)} - e^{Bb(A+zb)} q_m(zA+|z|^2)
///     - e^{A(Bb+z)} q_m(zb Bb+|z|^2) + p(z,zb) ] / (e^{|z|^2} - q_m(|z|^2)),
///
/// p(z,zb) = sum_{k,l<m} zb^k z^l/(k! l!) I_{k,l}(A,Bb). The assembly divides
/// by z^m implicitly, so z = 0 is rejected (the series route covers it).
pub fn berezin_exp_closed(
    ctx: &Ctx,
    a: &PrecComplex,
    bbar: &PrecComplex,
    m: u32,
    z: &PrecComplex,
) -> Result<PrecComplex> {
    if z.is_zero() {
        return Err(Error::DegenerateZ);
    }
    let zbar = z.conj();
    let zsq = PrecComplex::from_real(z.abs_sq());
    let a_sh = a.add(&zbar);
    let b_sh = bbar.add(z);

    let t1 = a_sh.mul(&b_sh).exp();
    let t2 = bbar
        .mul(&a_sh)
        .exp()
        .mul(&q_m(ctx, &z.mul(a).add(&zsq), m));
    let t3 = a
        .mul(&b_sh)
        .exp()
        .mul(&q_m(ctx, &zbar.mul(bbar).add(&zsq), m));

    let mut p = ctx.zero();
    for k in 0..m as usize {
        for l in 0..m as usize {
            let i_kl = moment_value(ctx, k, l, a, bbar);
            let term = zbar
                .powu(k as u32)
                .mul(&z.powu(l as u32))
                .div_int(&ctx.fact().factorial(k))
                .div_int(&ctx.fact().factorial(l))
                .mul(&i_kl);
            p = p.add(&term);
        }
    }

    let denom = zsq.exp().sub(&q_m(ctx, &zsq, m));
    Ok(t1.sub(&t2).sub(&t3).add(&p).div(&denom))
}

/// True when every atom on both sides is a power-zero exponential or
/// constant, i.e. the symbol is a finite sum of pure exponential pairs.
pub fn closed_route_eligible(s: &SesquiSymbol) -> bool {
    s.f.terms()
        .iter()
        .chain(s.g.terms().iter())
        .all(|(_, at)| at.power == 0 && !matches!(at.kind, AtomKind::Ker(_)))
}

fn atom_frequency(ctx: &Ctx, at: &AtomKind) -> PrecComplex {
    match at {
        AtomKind::Exp(a) => a.clone(),
        _ => ctx.zero(),
    }
}

fn berezin_closed(ctx: &Ctx, s: &SesquiSymbol, m: u32, z: &PrecComplex) -> Result<PrecComplex> {
    let mut total = ctx.zero();
    for (cf, af) in s.f.terms() {
        for (cg, ag) in s.g.terms() {
            let a = atom_frequency(ctx, &af.kind);
            let bbar = atom_frequency(ctx, &ag.kind).conj();
            let v = berezin_exp_closed(ctx, &a, &bbar, m, z)?;
            total = total.add(&cf.mul(&cg.conj()).mul(&v));
        }
    }
    Ok(total)
}

const BEREZIN_BORDER_CAP: usize = 400;

/// Kernel-series route: expand both kernel factors of |k_m(w,z)|^2 and reduce
/// the transform to the double sum
///
///   (1/K_m(z,z)) sum_{k,l} m!/((k+m)!(l+m)!) zb^k z^l M(k+m, l+m),
///
/// with M the symbol moment against w^{k+m} conj(w)^{l+m}. The square
/// truncation grows one border at a time; stopping is deferred past the
/// polynomial band offset so structurally-zero borders cannot fake
/// convergence.
pub fn berezin_series(ctx: &Ctx, s: &SesquiSymbol, m: u32, z: &PrecComplex) -> Result<PrecComplex> {
    let mu = m as usize;
    let zbar = z.conj();
    let mfact = ctx.factorial_f(mu);
    let pairs: Vec<(PrecComplex, &crate::symbols::Atom, &crate::symbols::Atom)> = s
        .f
        .terms()
        .iter()
        .flat_map(|(cf, af)| {
            s.g.terms()
                .iter()
                .map(move |(cg, ag)| (cf.mul(&cg.conj()), af, ag))
        })
        .collect();

    let term_at = |k: usize, l: usize, zb_pow: &PrecComplex, z_pow: &PrecComplex| -> Result<PrecComplex> {
        let mut mom = ctx.zero();
        for (c, af, ag) in &pairs {
            mom = mom.add(&c.mul(&sesqui_atom_moment(ctx, m, k + mu, l + mu, af, ag)?));
        }
        let w = mfact.clone() / (ctx.factorial_f(k + mu) * ctx.factorial_f(l + mu));
        Ok(mom.mul(zb_pow).mul(z_pow).scale(&w))
    };

    let k_min = (s.f.max_power() + s.g.max_power()) as usize + 4;
    let mut zb_pows = vec![ctx.one()];
    let mut z_pows = vec![ctx.one()];
    let mut total = ctx.zero();
    let mut below = 0usize;
    let mut converged = false;
    for kk in 0..=BEREZIN_BORDER_CAP {
        if kk > 0 {
            zb_pows.push(zb_pows[kk - 1].mul(&zbar));
            z_pows.push(z_pows[kk - 1].mul(z));
        }
        let mut border = ctx.zero();
        for l in 0..=kk {
            border = border.add(&term_at(kk, l, &zb_pows[kk], &z_pows[l])?);
        }
        for k in 0..kk {
            border = border.add(&term_at(k, kk, &zb_pows[k], &z_pows[kk])?);
        }
        total = total.add(&border);
        let mut thr = total.abs();
        thr *= ctx.rel_tol();
        if kk >= k_min && border.abs() <= thr {
            below += 1;
        } else {
            below = 0;
        }
        if below >= 3 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { terms: BEREZIN_BORDER_CAP });
    }
    Ok(total.div(&kernel(ctx, z, z, m)))
}

fn kernel_fast(ctx: &Ctx, z: &PrecComplex, w: &PrecComplex, m: u32) -> PrecComplex {
    kernel_closed(ctx, z, w, m).unwrap_or_else(|| kernel(ctx, z, w, m))
}

fn berezin_quad_at(
    ctx: &Ctx,
    s: &SesquiSymbol,
    m: u32,
    z: &PrecComplex,
    n_nodes: usize,
    n_angles: usize,
) -> PrecComplex {
    let prec = ctx.prec();
    let rule = laguerre_rule(prec, n_nodes);
    let ang = angle_table(prec, n_angles);
    let mut outer = ctx.zero();
    for i in 0..n_nodes {
        let r = &rule.sqrt_nodes[i];
        let mut inner = ctx.zero();
        for p in 0..n_angles {
            let w = PrecComplex::from_floats(
                r.clone() * &ang.cos[p],
                r.clone() * &ang.sin[p],
            );
            let phi = s.eval(ctx, &w, m);
            let k = kernel_fast(ctx, &w, z, m);
            inner = inner.add(&phi.scale(&k.abs_sq()));
        }
        let mut factor = rule.weights[i].clone();
        factor *= rule.nodes[i].clone().pow(m);
        factor /= Float::with_val(prec, n_angles as u32);
        outer = outer.add(&inner.scale(&factor));
    }
    let norm = ctx.factorial_f(m as usize) * kernel(ctx, z, z, m).re();
    let inv = Float::with_val(prec, 1) / norm;
    outer.scale(&inv)
}

/// Polar Gauss-Laguerre x trapezoid oracle; the error estimate is the
/// disagreement against the half-resolution rule.
pub fn berezin_quadrature(
    ctx: &Ctx,
    s: &SesquiSymbol,
    m: u32,
    z: &PrecComplex,
) -> (PrecComplex, Float) {
    let full = berezin_quad_at(ctx, s, m, z, DEFAULT_NODES, DEFAULT_ANGLES);
    let half = berezin_quad_at(ctx, s, m, z, DEFAULT_NODES / 2, DEFAULT_ANGLES / 2);
    let err = full.sub(&half).abs();
    (full, err)
}

/// Route dispatch: z = 0 always goes through the series (the closed assembly
/// divides by z^m); pure exponential symbols use the closed form; everything
/// else uses the series.
pub fn berezin(ctx: &Ctx, s: &SesquiSymbol, m: u32, z: &PrecComplex) -> Result<BerezinSample> {
    let (value, route) = if !z.is_zero() && closed_route_eligible(s) {
        (berezin_closed(ctx, s, m, z)?, Route::Closed)
    } else {
        (berezin_series(ctx, s, m, z)?, Route::Series)
    };
    Ok(BerezinSample { z: z.clone(), value, route })
}

pub fn berezin_with_route(
    ctx: &Ctx,
    s: &SesquiSymbol,
    m: u32,
    z: &PrecComplex,
    route: Route,
) -> Result<BerezinSample> {
    let value = match route {
        Route::Closed => {
            if !closed_route_eligible(s) {
                return Err(Error::Hypothesis(
                    "closed route requires pure exponential symbols".into(),
                ));
            }
            berezin_closed(ctx, s, m, z)?
        }
        Route::Series => berezin_series(ctx, s, m, z)?,
        Route::Quadrature => berezin_quadrature(ctx, s, m, z).0,
        Route::Matrix => {
            return Err(Error::Hypothesis(
                "matrix route needs a truncation size; use semicommutant_berezin_matrix".into(),
            ))
        }
    };
    Ok(BerezinSample { z: z.clone(), value, route })
}

/// Berezin(f conj(g))(z) - f(z) conj(g(z)): the Berezin transform of the
/// semi-commutant, zero exactly when the transform fixes f conj(g).
pub fn semicommutant_berezin(
    ctx: &Ctx,
    f: &HoloSymbol,
    g: &HoloSymbol,
    m: u32,
    z: &PrecComplex,
) -> Result<PrecComplex> {
    let s = SesquiSymbol::new(f.clone(), g.clone());
    let full = berezin(ctx, &s, m, z)?.value;
    let point = f.eval(ctx, z, m).mul(&g.eval(ctx, z, m).conj());
    Ok(full.sub(&point))
}

/// Matrix route for the same quantity: <S_N v_z, v_z> with the truncated
/// semi-commutant and the coherent vector. Returns the value and the
/// coherent-vector tail mass so callers can check N was large enough.
pub fn semicommutant_berezin_matrix(
    ctx: &Ctx,
    f: &HoloSymbol,
    g: &HoloSymbol,
    m: u32,
    z: &PrecComplex,
    n: usize,
) -> Result<(PrecComplex, Float)> {
    let s = semicommutant(ctx, f, g, m, n)?;
    let v = coherent_vector(ctx, z, m, n);
    Ok((s.quadratic_form(&v.coeffs), v.tail_mass))
}

const FACTOR_CLAMP: f64 = -1e-20;

/// Squared Hankel norm ||H_conj(h) k_z||^2 = Berezin(|h|^2)(z) - |h(z)|^2,
/// clamped at zero for roundoff-scale negatives.
pub fn hankel_factor(ctx: &Ctx, h: &HoloSymbol, m: u32, z: &PrecComplex) -> Result<Float> {
    let full = berezin(ctx, &SesquiSymbol::new(h.clone(), h.clone()), m, z)?.value;
    let point = berezin(ctx, &SesquiSymbol::new(h.clone(), HoloSymbol::one(ctx)), m, z)?.value;
    let factor = full.re() - point.abs_sq();
    if factor < 0 {
        if factor.to_f64() < FACTOR_CLAMP {
            return Err(Error::NegativeFactor { value: factor.to_f64() });
        }
        return Ok(Float::new(ctx.prec()));
    }
    Ok(factor)
}

/// D(f,g)(z): product of the two Hankel factors.
pub fn defect(ctx: &Ctx, f: &HoloSymbol, g: &HoloSymbol, m: u32, z: &PrecComplex) -> Result<Float> {
    let ff = hankel_factor(ctx, f, m, z)?;
    let fg = hankel_factor(ctx, g, m, z)?;
    Ok(ff * fg)
}

/// Polynomial in z and conj(z) with complex coefficients.
#[derive(Clone, Debug)]
pub struct BivariatePoly {
    pub deg_z: usize,
    pub deg_zbar: usize,
    coeffs: Vec<Vec<PrecComplex>>,
}

impl BivariatePoly {
    pub fn coeff(&self, k: usize, l: usize) -> &PrecComplex {
        &self.coeffs[k][l]
    }

    pub fn eval(&self, ctx: &Ctx, z: &PrecComplex) -> PrecComplex {
        let zbar = z.conj();
        let mut zb_pows = vec![ctx.one()];
        for l in 1..=self.deg_zbar {
            zb_pows.push(zb_pows[l - 1].mul(&zbar));
        }
        let mut total = ctx.zero();
        let mut z_pow = ctx.one();
        for k in 0..=self.deg_z {
            if k > 0 {
                z_pow = z_pow.mul(z);
            }
            for (l, zb) in zb_pows.iter().enumerate() {
                total = total.add(&self.coeffs[k][l].mul(&z_pow).mul(zb));
            }
        }
        total
    }
}

/// Fit the Berezin transform of a polynomial pair as a polynomial of degree
/// (deg f) in z and (deg g) in conj(z), by exact DFT over a tensor grid of
/// angles and a radial Vandermonde solve per Fourier mode. The fit makes no
/// residual claim on its own; callers verify it at independent points.
pub fn berezin_polynomial_fit(ctx: &Ctx, s: &SesquiSymbol, m: u32) -> Result<BivariatePoly> {
    let dz = s
        .f
        .poly_degree()
        .ok_or_else(|| Error::Hypothesis("polynomial fit needs polynomial symbols".into()))?
        as usize;
    let dzb = s
        .g
        .poly_degree()
        .ok_or_else(|| Error::Hypothesis("polynomial fit needs polynomial symbols".into()))?
        as usize;
    let prec = ctx.prec();
    let t_angles = dz + dzb + 1;
    let n_rad = dz.min(dzb) + 1;
    let radii: Vec<Float> = (0..n_rad)
        .map(|j| Float::with_val(prec, 1) / 2u32 + Float::with_val(prec, j as u32) / (2 * n_rad as u32))
        .collect();

    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let unit: Vec<PrecComplex> = (0..t_angles)
        .map(|t| {
            let theta = two_pi.clone() * Float::with_val(prec, t as u32)
                / Float::with_val(prec, t_angles as u32);
            let (s_t, c_t) = theta.sin_cos(Float::new(prec));
            PrecComplex::from_floats(c_t, s_t)
        })
        .collect();

    let grid: Vec<(usize, usize)> = (0..n_rad)
        .flat_map(|j| (0..t_angles).map(move |t| (j, t)))
        .collect();
    let samples: Vec<PrecComplex> = grid
        .par_iter()
        .map(|&(j, t)| {
            let z = unit[t].scale(&radii[j]);
            Ok(berezin_series(ctx, s, m, &z)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let sample = |j: usize, t: usize| &samples[j * t_angles + t];

    let inv_t = Float::with_val(prec, 1) / Float::with_val(prec, t_angles as u32);
    let mut coeffs = vec![vec![ctx.zero(); dzb + 1]; dz + 1];
    for mode in -(dzb as i64)..=(dz as i64) {
        let l_lo = 0.max(-mode) as usize;
        let l_hi = dzb.min((dz as i64 - mode) as usize);
        let count = l_hi - l_lo + 1;
        // Fourier coefficient of e^{i mode theta} at each radius.
        let g_vals: Vec<PrecComplex> = (0..count)
            .map(|row| {
                let j = row;
                let mut acc = ctx.zero();
                for t in 0..t_angles {
                    let idx = ((mode * t as i64).rem_euclid(t_angles as i64)) as usize;
                    acc = acc.add(&sample(j, t).mul(&unit[idx].conj()));
                }
                acc.scale(&inv_t)
            })
            .collect();
        // g_mode(r) = sum over l of beta[l+mode][l] r^{mode+2l}.
        let vand: Vec<Vec<PrecComplex>> = (0..count)
            .map(|row| {
                (0..count)
                    .map(|cix| {
                        let l = l_lo + cix;
                        let k = (l as i64 + mode) as usize;
                        let p = radii[row].clone().pow((k + l) as u32);
                        PrecComplex::from_real(p)
                    })
                    .collect()
            })
            .collect();
        let beta = linalg::solve(ctx, &vand, &g_vals)
            .ok_or_else(|| Error::Hypothesis("radial interpolation matrix is singular".into()))?;
        for (cix, b) in beta.into_iter().enumerate() {
            let l = l_lo + cix;
            let k = (l as i64 + mode) as usize;
            coeffs[k][l] = b;
        }
    }
    Ok(BivariatePoly { deg_z: dz, deg_zbar: dzb, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol;

    fn ctx() -> Ctx {
        Ctx::new(256)
    }

    fn sym(c: &Ctx, s: &str) -> HoloSymbol {
        parse_symbol(c, s).unwrap()
    }

    fn pair(c: &Ctx, f: &str, g: &str) -> SesquiSymbol {
        SesquiSymbol::new(sym(c, f), sym(c, g))
    }

    #[test]
    fn closed_form_of_constant_pair_is_one() {
        let c = ctx();
        for m in 0..=3 {
            for (re, im) in [(0.5, 0.0), (-1.0, 2.0), (0.0, 3.0)] {
                let z = c.complex(re, im);
                let v = berezin_exp_closed(&c, &c.zero(), &c.zero(), m, &z).unwrap();
                assert!(v.rel_diff(&c.one()) < 1e-60, "m={} z=({},{})", m, re, im);
            }
        }
    }

    #[test]
    fn closed_form_reduces_to_translation_at_order_zero() {
        let c = ctx();
        let a = c.complex(0.7, -0.3);
        let bbar = c.complex(-0.2, 1.1);
        let z = c.complex(0.4, 0.9);
        let got = berezin_exp_closed(&c, &a, &bbar, 0, &z).unwrap();
        let want = a
            .mul(&bbar)
            .exp()
            .mul(&a.mul(&z).add(&bbar.mul(&z.conj())).exp());
        assert!(got.rel_diff(&want) < 1e-70);
    }

    #[test]
    fn zero_frequency_polynomial_block_matches_truncated_exponential() {
        // With A = 0 the correction polynomial collapses to
        // q_m(conj(z)(z + Bbar)).
        let c = ctx();
        let m = 3u32;
        let bbar = c.complex(0.8, -0.6);
        let z = c.complex(-0.5, 1.2);
        let zbar = z.conj();
        let mut p = c.zero();
        for k in 0..m as usize {
            for l in 0..m as usize {
                let i_kl = moment_value(&c, k, l, &c.zero(), &bbar);
                p = p.add(
                    &zbar
                        .powu(k as u32)
                        .mul(&z.powu(l as u32))
                        .div_int(&c.fact().factorial(k))
                        .div_int(&c.fact().factorial(l))
                        .mul(&i_kl),
                );
            }
        }
        let want = q_m(&c, &zbar.mul(&z.add(&bbar)), m);
        assert!(p.rel_diff(&want) < 1e-70);
    }

    #[test]
    fn series_matches_closed_for_exponential_pairs() {
        let c = ctx();
        let cases = [
            (0u32, (0.9, 0.0), (0.5, -0.5), (1.0, 0.5)),
            (1, (0.7, -0.3), (-0.2, 1.1), (0.4, 0.9)),
            (2, (-0.4, 0.8), (1.0, 0.25), (-1.5, 0.3)),
        ];
        for (m, a, b, zz) in cases {
            let f = format!("exp(({},{}))", a.0, a.1);
            // conj-side frequency: g = exp(conj(Bbar)).
            let g = format!("exp(({},{}))", b.0, -b.1);
            let s = pair(&c, &f, &g);
            let z = c.complex(zz.0, zz.1);
            let closed = berezin_closed(&c, &s, m, &z).unwrap();
            let series = berezin_series(&c, &s, m, &z).unwrap();
            assert!(
                closed.rel_diff(&series).to_f64() < 1e-25,
                "m={} rel={:?}",
                m,
                closed.rel_diff(&series).to_f64()
            );
        }
    }

    #[test]
    fn series_reference_values_at_origin() {
        let c = ctx();
        let s = pair(&c, "z", "z");
        let v = berezin_series(&c, &s, 0, &c.zero()).unwrap();
        assert!(v.rel_diff(&c.one()) < 1e-70);

        let s = pair(&c, "1", "1");
        for m in 0..=2 {
            for z in [c.zero(), c.complex(1.5, -0.5)] {
                let v = berezin_series(&c, &s, m, &z).unwrap();
                assert!(v.rel_diff(&c.one()) < 1e-60);
            }
        }
    }

    #[test]
    fn holomorphic_symbols_are_fixed_points() {
        let c = ctx();
        let z = c.complex(0.8, -1.1);
        for m in [0u32, 2] {
            for text in ["z^2", "z^3 + (0,1)*z", "ker((0.5,0.25))"] {
                let f = sym(&c, text);
                let s = SesquiSymbol::new(f.clone(), HoloSymbol::one(&c));
                let v = berezin_series(&c, &s, m, &z).unwrap();
                let want = f.eval(&c, &z, m);
                assert!(
                    v.rel_diff(&want).to_f64() < 1e-35,
                    "m={} {} rel={:?}",
                    m,
                    text,
                    v.rel_diff(&want).to_f64()
                );
            }
        }
    }

    #[test]
    fn quadrature_agrees_with_series() {
        let c = ctx();
        let s = pair(&c, "exp((0.5,0.5))", "z*exp((0.25,-0.5))");
        let z = c.complex(1.0, -0.5);
        let series = berezin_series(&c, &s, 1, &z).unwrap();
        let (quad, err) = berezin_quadrature(&c, &s, 1, &z);
        let rel = series.rel_diff(&quad).to_f64();
        assert!(rel < 1e-9, "rel={}", rel);
        assert!(err.to_f64() < 1e-8);
    }

    #[test]
    fn route_dispatch_follows_symbol_shape() {
        let c = ctx();
        let exp_pair = pair(&c, "exp((1,0))", "exp((0,1))");
        let z = c.complex(0.5, 0.5);
        assert_eq!(berezin(&c, &exp_pair, 1, &z).unwrap().route, Route::Closed);
        assert_eq!(
            berezin(&c, &exp_pair, 1, &c.zero()).unwrap().route,
            Route::Series
        );
        let poly_pair = pair(&c, "z", "exp((0,1))");
        assert_eq!(berezin(&c, &poly_pair, 1, &z).unwrap().route, Route::Series);
        assert!(berezin_with_route(&c, &poly_pair, 1, &z, Route::Closed).is_err());
    }

    #[test]
    fn semicommutant_berezin_witness_values() {
        let c = ctx();
        let f = sym(&c, "exp((1,0))");
        let g = sym(&c, "exp((0,-2pi))");
        // order zero: resonance makes the transform fix f conj(g)
        for z in [c.zero(), c.complex(0.7, -0.4)] {
            let v = semicommutant_berezin(&c, &f, &g, 0, &z).unwrap();
            assert!(v.abs().to_f64() < 1e-60, "m=0 z got {:?}", v.abs().to_f64());
        }
        // order one at z=0: the witness entry 2 pi i
        let v = semicommutant_berezin(&c, &f, &g, 1, &c.zero()).unwrap();
        let two_pi = c.float(2.0) * Float::with_val(256, Constant::Pi);
        assert!(v.re().to_f64().abs() < 1e-60);
        assert!((v.im() - &two_pi).abs().to_f64() < 1e-60);

        // constant factor: fixed point, zero at every order (series route,
        // so accuracy is capped by the truncation rule)
        let h = sym(&c, "(2,-1)");
        let k = sym(&c, "z^2*exp((0.5,0))");
        for m in 0..=2 {
            let v = semicommutant_berezin(&c, &h, &k, m, &c.complex(0.3, 0.2)).unwrap();
            assert!(v.abs().to_f64() < 1e-35);
        }
    }

    #[test]
    fn matrix_route_matches_analytic_route() {
        let c = ctx();
        let f = sym(&c, "exp((1,0))");
        let g = sym(&c, "exp((0,-2pi))");
        let z = c.complex(0.6, -0.3);
        let analytic = semicommutant_berezin(&c, &f, &g, 1, &z).unwrap();
        let (matrix, tail) = semicommutant_berezin_matrix(&c, &f, &g, 1, &z, 40).unwrap();
        assert!(tail.to_f64() < 1e-20, "tail={}", tail.to_f64());
        let diff = analytic.sub(&matrix).abs().to_f64();
        assert!(diff < 1e-10, "diff={}", diff);
    }

    #[test]
    fn defect_reference_behaviour() {
        let c = ctx();
        let constant = sym(&c, "(2,1)");
        let g = sym(&c, "exp((1,0))");
        let z = c.complex(1.0, 0.0);
        let d = defect(&c, &constant, &g, 1, &z).unwrap();
        assert!(d.to_f64().abs() < 1e-40);

        // f = g: defect is the square of one factor
        let d = defect(&c, &g, &g, 1, &z).unwrap();
        let factor = hankel_factor(&c, &g, 1, &z).unwrap();
        let want = factor.clone() * &factor;
        assert!((d - &want).abs() / want < 1e-60);

        // counterexample pair grows along the real axis
        let f = sym(&c, "exp((0,2pi))");
        let d1 = defect(&c, &f, &g, 1, &c.complex(1.0, 0.0)).unwrap();
        let d2 = defect(&c, &f, &g, 1, &c.complex(2.0, 0.0)).unwrap();
        assert!(d2 > d1);
        assert!(d1 > 0);
    }

    #[test]
    fn polynomial_fit_reference_coefficients() {
        // Coefficient accuracy is bounded by the series truncation rule
        // feeding the samples, not by the working precision.
        let c = ctx();
        // holomorphic z: fit is exactly z
        let fit = berezin_polynomial_fit(&c, &pair(&c, "z", "1"), 1).unwrap();
        assert!(fit.coeff(1, 0).rel_diff(&c.one()) < 1e-35);
        assert!(fit.coeff(0, 0).abs().to_f64() < 1e-35);

        // |w|^2 at order zero: z zbar + 1
        let fit = berezin_polynomial_fit(&c, &pair(&c, "z", "z"), 0).unwrap();
        assert!(fit.coeff(1, 1).rel_diff(&c.one()) < 1e-35);
        assert!(fit.coeff(0, 0).rel_diff(&c.one()) < 1e-35);
        assert!(fit.coeff(1, 0).abs().to_f64() < 1e-35);
        assert!(fit.coeff(0, 1).abs().to_f64() < 1e-35);
    }

    #[test]
    fn polynomial_fit_interpolates_at_independent_points() {
        // Exactness of the polynomial fit is an order-zero property; see
        // transform_of_polynomials_is_not_polynomial_at_higher_order.
        let c = ctx();
        for (f, g) in [("z^2 + (0,1)", "z"), ("z^3", "z^2 + z")] {
            let s = pair(&c, f, g);
            let fit = berezin_polynomial_fit(&c, &s, 0).unwrap();
            for (re, im) in [(0.9, 0.4), (-0.7, 0.2), (0.1, -1.3)] {
                let z = c.complex(re, im);
                let direct = berezin_series(&c, &s, 0, &z).unwrap();
                let interp = fit.eval(&c, &z);
                let rel = direct.rel_diff(&interp).to_f64();
                assert!(rel < 1e-25, "f={} g={} rel={}", f, g, rel);
            }
        }
    }

    #[test]
    fn transform_of_polynomials_is_not_polynomial_at_higher_order() {
        // At order one the transform of w^2 conj(w) evaluates to
        // z (2 + x e^x/(e^x - 1)) with x = |z|^2: the correction decays like
        // a polynomial times e^{-x} but never vanishes, so no polynomial
        // reproduces it. The closed form doubles as a series-route oracle.
        let c = ctx();
        let s = pair(&c, "z^2", "z");
        for (re, im) in [(0.8, 0.0), (0.5, -0.7), (1.3, 0.4)] {
            let z = c.complex(re, im);
            let got = berezin_series(&c, &s, 1, &z).unwrap();
            let x = z.abs_sq();
            let ex = x.clone().exp();
            let ratio = x.clone() * &ex / (ex - 1u32);
            let want = z.scale(&(ratio + 2u32));
            assert!(
                got.rel_diff(&want).to_f64() < 1e-35,
                "z=({},{}) rel={}",
                re,
                im,
                got.rel_diff(&want).to_f64()
            );
        }
        // and the degree-(2,1) fit cannot reach it
        let fit = berezin_polynomial_fit(&c, &s, 1).unwrap();
        let z = c.complex(0.9, 0.4);
        let direct = berezin_series(&c, &s, 1, &z).unwrap();
        let rel = direct.rel_diff(&fit.eval(&c, &z)).to_f64();
        assert!(rel > 1e-8, "unexpectedly polynomial: rel={}", rel);
    }
}

