//! Truncated Toeplitz matrices in the orthonormal monomial basis
//! e_k = z^k / sqrt((k+m)!/m!), semi-commutant assembly, power-iteration
//! norm estimates and norm-growth scans.

use crate::moments::sesqui_atom_moment;
use crate::numerics::{kernel, Ctx, PrecComplex};
use crate::symbols::{HoloSymbol, SesquiSymbol};
use crate::Result;

use rayon::prelude::*;
use rug::Float;

/// (N+1) x (N+1) matrix of a Toeplitz-type operator against the orthonormal
/// basis; entry[r][c] = <T e_c, e_r>.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    pub m: u32,
    pub n: usize,
    entries: Vec<Vec<PrecComplex>>,
}

impl TruncatedOperator {
    pub fn from_entries(m: u32, n: usize, entries: Vec<Vec<PrecComplex>>) -> TruncatedOperator {
        assert_eq!(entries.len(), n + 1);
        TruncatedOperator { m, n, entries }
    }

    pub fn zero(ctx: &Ctx, m: u32, n: usize) -> TruncatedOperator {
        let entries = vec![vec![ctx.zero(); n + 1]; n + 1];
        TruncatedOperator { m, n, entries }
    }

    pub fn size(&self) -> usize {
        self.n + 1
    }

    pub fn entry(&self, r: usize, c: usize) -> &PrecComplex {
        &self.entries[r][c]
    }

    pub fn rows(&self) -> &[Vec<PrecComplex>] {
        &self.entries
    }

    pub fn sub(&self, other: &TruncatedOperator) -> TruncatedOperator {
        assert_eq!(self.n, other.n);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| a.sub(b)).collect())
            .collect();
        TruncatedOperator { m: self.m, n: self.n, entries }
    }

    pub fn matmul(&self, other: &TruncatedOperator) -> TruncatedOperator {
        assert_eq!(self.n, other.n);
        let dim = self.size();
        let entries: Vec<Vec<PrecComplex>> = (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| {
                        let mut s = self.entries[r][0].mul(&other.entries[0][c]);
                        for l in 1..dim {
                            s = s.add(&self.entries[r][l].mul(&other.entries[l][c]));
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        TruncatedOperator { m: self.m, n: self.n, entries }
    }

    pub fn conj_transpose(&self) -> TruncatedOperator {
        let dim = self.size();
        let entries: Vec<Vec<PrecComplex>> = (0..dim)
            .map(|r| (0..dim).map(|c| self.entries[c][r].conj()).collect())
            .collect();
        TruncatedOperator { m: self.m, n: self.n, entries }
    }

    /// (T + T^H)/2.
    pub fn hermitian_part(&self, ctx: &Ctx) -> TruncatedOperator {
        let half = ctx.float(0.5);
        let dim = self.size();
        let entries: Vec<Vec<PrecComplex>> = (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| {
                        self.entries[r][c]
                            .add(&self.entries[c][r].conj())
                            .scale(&half)
                    })
                    .collect()
            })
            .collect();
        TruncatedOperator { m: self.m, n: self.n, entries }
    }

    pub fn apply(&self, v: &[PrecComplex]) -> Vec<PrecComplex> {
        self.entries
            .iter()
            .map(|row| {
                let mut s = row[0].mul(&v[0]);
                for (e, x) in row.iter().zip(v).skip(1) {
                    s = s.add(&e.mul(x));
                }
                s
            })
            .collect()
    }

    /// <T v, v> = v^H T v.
    pub fn quadratic_form(&self, v: &[PrecComplex]) -> PrecComplex {
        let tv = self.apply(v);
        let mut s = v[0].conj().mul(&tv[0]);
        for (x, y) in v.iter().zip(&tv).skip(1) {
            s = s.add(&x.conj().mul(y));
        }
        s
    }

    pub fn max_entry_magnitude(&self) -> Float {
        let mut best = Float::new(53);
        for row in &self.entries {
            for e in row {
                let a = e.abs();
                if a > best {
                    best = a;
                }
            }
        }
        best
    }

    pub fn frobenius_norm(&self, ctx: &Ctx) -> Float {
        let mut s = Float::new(ctx.prec());
        for row in &self.entries {
            for e in row {
                s += e.abs_sq();
            }
        }
        s.sqrt()
    }
}

/// Truncated matrix of the Toeplitz operator with symbol f * conj(g).
///
/// entry[r][c] = sum over atom pairs of
///   coef_f conj(coef_g) I_{c+m+a_f, r+m+a_g}(A_f, conj(A_g))
///     / sqrt((c+m)!(r+m)!),
/// where the 1/m! of the inner product cancels against the basis norms.
/// Truncation selects which rows and columns exist; it never changes an
/// entry's value.
pub fn toeplitz_matrix(
    ctx: &Ctx,
    s: &SesquiSymbol,
    m: u32,
    n: usize,
) -> Result<TruncatedOperator> {
    let mu = m as usize;
    ctx.fact().warm(2 * (n + mu) + 4);
    let inv_norm: Vec<Float> = (0..=n)
        .map(|k| {
            let f = ctx.factorial_f(k + mu).sqrt();
            Float::with_val(ctx.prec(), 1) / f
        })
        .collect();
    let entries: Vec<Vec<PrecComplex>> = (0..=n)
        .into_par_iter()
        .map(|r| {
            let mut row = Vec::with_capacity(n + 1);
            for c in 0..=n {
                let mut sum = ctx.zero();
                for (cf, af) in s.f.terms() {
                    for (cg, ag) in s.g.terms() {
                        let mval = sesqui_atom_moment(ctx, m, c + mu, r + mu, af, ag)?;
                        sum = sum.add(&cf.mul(&cg.conj()).mul(&mval));
                    }
                }
                let scale = inv_norm[c].clone() * &inv_norm[r];
                row.push(sum.scale(&scale));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncatedOperator { m, n, entries })
}

/// M(T_{f conj(g)}) - M(T_f) M(T_conj(g)) at truncation N.
///
/// The product of the truncated factors equals the truncation of the product
/// operator: conj-side symbols only lower degree (column c of T_conj(g) is
/// supported on rows <= c) and holomorphic symbols only raise it, so the
/// inner index of the matrix product never exceeds the truncation. Entries
/// are therefore free of truncation error for all r, c <= N.
pub fn semicommutant(
    ctx: &Ctx,
    f: &HoloSymbol,
    g: &HoloSymbol,
    m: u32,
    n: usize,
) -> Result<TruncatedOperator> {
    let product = toeplitz_matrix(ctx, &SesquiSymbol::new(f.clone(), g.clone()), m, n)?;
    let tf = toeplitz_matrix(ctx, &SesquiSymbol::new(f.clone(), HoloSymbol::one(ctx)), m, n)?;
    let tg = toeplitz_matrix(ctx, &SesquiSymbol::new(HoloSymbol::one(ctx), g.clone()), m, n)?;
    Ok(product.sub(&tf.matmul(&tg)))
}

#[derive(Clone, Debug)]
pub struct NormEstimate {
    pub value: Float,
    pub converged: bool,
    pub iterations: usize,
}

const NORM_REL_TOL: f64 = 1e-12;
const NORM_ITER_CAP: usize = 1000;

fn vec_norm(ctx: &Ctx, v: &[PrecComplex]) -> Float {
    let mut s = Float::new(ctx.prec());
    for x in v {
        s += x.abs_sq();
    }
    s.sqrt()
}

/// Deterministic power iteration for the largest eigenvalue of a Hermitian
/// positive semidefinite map given by `matvec`. Seed: all-ones, normalized.
fn power_iteration<F>(ctx: &Ctx, dim: usize, matvec: F) -> NormEstimate
where
    F: Fn(&[PrecComplex]) -> Vec<PrecComplex>,
{
    let seed = ctx.float(1.0 / (dim as f64).sqrt());
    let mut v: Vec<PrecComplex> = (0..dim).map(|_| ctx.one().scale(&seed)).collect();
    let mut lambda = Float::new(ctx.prec());
    for it in 1..=NORM_ITER_CAP {
        let w = matvec(&v);
        // Rayleigh quotient; real for Hermitian maps.
        let mut rq = Float::new(ctx.prec());
        for (x, y) in v.iter().zip(&w) {
            rq += x.conj().mul(y).re();
        }
        let wn = vec_norm(ctx, &w);
        if wn < *ctx.zero_tol() {
            return NormEstimate { value: Float::new(ctx.prec()), converged: true, iterations: it };
        }
        let inv = Float::with_val(ctx.prec(), 1) / &wn;
        for x in v.iter_mut() {
            *x = x.scale(&inv);
        }
        let mut v_next: Vec<PrecComplex> = w.iter().map(|x| x.scale(&inv)).collect();
        std::mem::swap(&mut v, &mut v_next);
        let diff = (rq.clone() - &lambda).abs();
        let scale = rq.clone().abs().max(&Float::with_val(ctx.prec(), 1e-300));
        lambda = rq;
        if it > 1 && diff / scale < NORM_REL_TOL {
            return NormEstimate { value: lambda, converged: true, iterations: it };
        }
    }
    NormEstimate { value: lambda, converged: false, iterations: NORM_ITER_CAP }
}

/// Largest singular value via power iteration on T^H T.
pub fn operator_norm(ctx: &Ctx, t: &TruncatedOperator) -> NormEstimate {
    if t.max_entry_magnitude() < *ctx.zero_tol() {
        return NormEstimate { value: Float::new(ctx.prec()), converged: true, iterations: 0 };
    }
    let w = t.conj_transpose().matmul(t);
    let est = power_iteration(ctx, t.size(), |v| w.apply(v));
    NormEstimate {
        value: est.value.max(&Float::new(ctx.prec())).sqrt(),
        converged: est.converged,
        iterations: est.iterations,
    }
}

/// Smallest eigenvalue of the Hermitian part of T, via power iteration on
/// sigma I - H with sigma the Frobenius norm (an upper bound on the spectral
/// radius, so the shifted map is positive semidefinite).
pub fn min_eig_hermitian(ctx: &Ctx, t: &TruncatedOperator) -> NormEstimate {
    let h = t.hermitian_part(ctx);
    let sigma = h.frobenius_norm(ctx);
    if sigma < *ctx.zero_tol() {
        return NormEstimate { value: Float::new(ctx.prec()), converged: true, iterations: 0 };
    }
    let est = power_iteration(ctx, h.size(), |v| {
        let hv = h.apply(v);
        v.iter()
            .zip(&hv)
            .map(|(x, y)| x.scale(&sigma).sub(y))
            .collect()
    });
    NormEstimate {
        value: sigma - est.value,
        converged: est.converged,
        iterations: est.iterations,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    Plateau,
    Growing,
    Inconclusive,
}

impl Growth {
    pub fn name(&self) -> &'static str {
        match self {
            Growth::Plateau => "plateau",
            Growth::Growing => "growing",
            Growth::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub n: usize,
    pub norm: Float,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct NormScan {
    pub points: Vec<ScanPoint>,
    pub classification: Growth,
}

const PLATEAU_EPS: f64 = 0.02;
const GROWTH_EPS: f64 = 0.05;

fn classify(ctx: &Ctx, points: &[ScanPoint]) -> Growth {
    if points.iter().any(|p| !p.converged) {
        return Growth::Inconclusive;
    }
    if points.iter().all(|p| p.norm < *ctx.zero_tol()) {
        return Growth::Plateau;
    }
    if points.len() < 2 {
        return Growth::Inconclusive;
    }
    let floor = Float::with_val(ctx.prec(), 1e-300);
    let ratios: Vec<f64> = points
        .windows(2)
        .map(|w| {
            let prev = w[0].norm.clone().max(&floor);
            (w[1].norm.clone() / prev).to_f64()
        })
        .collect();
    if *ratios.last().unwrap() < 1.0 + PLATEAU_EPS {
        return Growth::Plateau;
    }
    if ratios.iter().all(|r| *r > 1.0 + GROWTH_EPS) {
        return Growth::Growing;
    }
    Growth::Inconclusive
}

/// Semi-commutant norm versus truncation size; Ns must be increasing.
pub fn norm_scan(
    ctx: &Ctx,
    f: &HoloSymbol,
    g: &HoloSymbol,
    m: u32,
    ns: &[usize],
) -> Result<NormScan> {
    assert!(ns.windows(2).all(|w| w[0] < w[1]), "truncation sizes must increase");
    let points: Vec<ScanPoint> = ns
        .par_iter()
        .map(|&n| {
            let s = semicommutant(ctx, f, g, m, n)?;
            let est = operator_norm(ctx, &s);
            Ok(ScanPoint { n, norm: est.value, converged: est.converged })
        })
        .collect::<Result<Vec<_>>>()?;
    let classification = classify(ctx, &points);
    Ok(NormScan { points, classification })
}

#[derive(Clone, Debug)]
pub struct CoherentVector {
    pub coeffs: Vec<PrecComplex>,
    /// 1 - |truncated K_m(., z)|^2 / K_m(z, z): mass lost to truncation.
    pub tail_mass: Float,
}

/// Coefficients of the normalized reproducing kernel at z in the orthonormal
/// basis: v_k proportional to conj(z)^k sqrt(m!/(k+m)!), scaled to unit
/// length.
pub fn coherent_vector(ctx: &Ctx, z: &PrecComplex, m: u32, n: usize) -> CoherentVector {
    let mu = m as usize;
    let mfact = ctx.factorial_f(mu);
    let zbar = z.conj();
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut pow = ctx.one();
    let mut norm_sq = Float::new(ctx.prec());
    for k in 0..=n {
        if k > 0 {
            pow = pow.mul(&zbar);
        }
        let w = (mfact.clone() / ctx.factorial_f(k + mu)).sqrt();
        let vk = pow.scale(&w);
        norm_sq += vk.abs_sq();
        coeffs.push(vk);
    }
    let kzz = kernel(ctx, z, z, m);
    let tail_mass = Float::with_val(ctx.prec(), 1) - norm_sq.clone() / kzz.re();
    let inv = Float::with_val(ctx.prec(), 1) / norm_sq.sqrt();
    for c in coeffs.iter_mut() {
        *c = c.scale(&inv);
    }
    CoherentVector { coeffs, tail_mass }
}
