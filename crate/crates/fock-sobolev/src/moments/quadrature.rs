//! Quadrature oracle for Gaussian moments: generalized Gauss-Laguerre in
//! t = r^2 crossed with a uniform trapezoid rule in the angle. Node sets and
//! angle tables are computed at working precision once per (precision, size)
//! pair and cached process-wide.

use super::{MomentQuery, MomentResult, Path};
use crate::numerics::{kernel, Ctx, PrecComplex};
use crate::symbols::{Atom, AtomKind};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub const DEFAULT_NODES: usize = 64;
pub const DEFAULT_ANGLES: usize = 256;

pub(crate) struct LaguerreRule {
    pub(crate) nodes: Vec<Float>,
    pub(crate) sqrt_nodes: Vec<Float>,
    pub(crate) weights: Vec<Float>,
}

pub(crate) struct AngleTable {
    pub(crate) cos: Vec<Float>,
    pub(crate) sin: Vec<Float>,
}

static RULES: OnceLock<Mutex<HashMap<(u32, usize), Arc<LaguerreRule>>>> = OnceLock::new();
static ANGLES: OnceLock<Mutex<HashMap<(u32, usize), Arc<AngleTable>>>> = OnceLock::new();

/// L_n(x) and L_{n-1}(x) by the three-term recurrence
/// (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}.
fn laguerre_pair(prec: u32, n: usize, x: &Float) -> (Float, Float) {
    let mut p0 = Float::with_val(prec, 1);
    if n == 0 {
        return (p0, Float::with_val(prec, 0));
    }
    let mut p1 = Float::with_val(prec, 1) - x;
    for k in 1..n {
        let a = Float::with_val(prec, 2 * k as u64 + 1) - x;
        let mut next = a * &p1;
        next -= Float::with_val(prec, k as u64) * &p0;
        next /= (k as u64 + 1) as u32;
        p0 = p1;
        p1 = next;
    }
    (p1, p0)
}

fn laguerre_pair_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    if n == 0 {
        return (p0, 0.0);
    }
    let mut p1 = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = next;
    }
    (p1, p0)
}

/// Root guesses and double-precision polish, then Newton at working
/// precision. The i-th guess extrapolates from the previous two roots.
fn laguerre_nodes(prec: u32, n: usize) -> Vec<Float> {
    let nf = n as f64;
    let mut roots64: Vec<f64> = Vec::with_capacity(n);
    let mut z = 0.0f64;
    for i in 0..n {
        if i == 0 {
            z = 3.0 / (1.0 + 2.4 * nf);
        } else if i == 1 {
            z += 15.0 / (1.0 + 2.5 * nf);
        } else {
            let ai = (i - 1) as f64;
            z += ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - roots64[i - 2]);
        }
        for _ in 0..100 {
            let (ln, lnm1) = laguerre_pair_f64(n, z);
            let deriv = nf * (ln - lnm1) / z;
            let dz = ln / deriv;
            z -= dz;
            if dz.abs() <= 1e-14 * z.abs() {
                break;
            }
        }
        roots64.push(z);
    }
    roots64
        .into_iter()
        .map(|g| {
            let mut x = Float::with_val(prec, g);
            for _ in 0..64 {
                let (ln, lnm1) = laguerre_pair(prec, n, &x);
                let mut deriv = ln.clone() - &lnm1;
                deriv *= n as u32;
                deriv /= &x;
                let dx = ln / deriv;
                x -= &dx;
                let thr = x.clone().abs() >> (prec - 4);
                if dx.abs() < thr {
                    break;
                }
            }
            x
        })
        .collect()
}

pub(crate) fn laguerre_rule(prec: u32, n: usize) -> Arc<LaguerreRule> {
    let map = RULES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = map.lock().unwrap().get(&(prec, n)) {
        return Arc::clone(r);
    }
    let nodes = laguerre_nodes(prec, n);
    let sqrt_nodes: Vec<Float> = nodes.iter().map(|x| x.clone().sqrt()).collect();
    // w_i = x_i / ((n+1)^2 L_{n+1}(x_i)^2)
    let weights: Vec<Float> = nodes
        .iter()
        .map(|x| {
            let (lnp1, _) = laguerre_pair(prec, n + 1, x);
            let mut den = lnp1.square();
            den *= ((n as u64 + 1) * (n as u64 + 1)) as u32;
            x.clone() / den
        })
        .collect();
    let rule = Arc::new(LaguerreRule { nodes, sqrt_nodes, weights });
    map.lock().unwrap().insert((prec, n), Arc::clone(&rule));
    rule
}

pub(crate) fn angle_table(prec: u32, m: usize) -> Arc<AngleTable> {
    let map = ANGLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = map.lock().unwrap().get(&(prec, m)) {
        return Arc::clone(t);
    }
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let mut cos = Vec::with_capacity(m);
    let mut sin = Vec::with_capacity(m);
    for p in 0..m {
        let theta = two_pi.clone() * p as u64 / m as u32;
        let (s, c) = theta.sin_cos(Float::new(prec));
        cos.push(c);
        sin.push(s);
    }
    let table = Arc::new(AngleTable { cos, sin });
    map.lock().unwrap().insert((prec, m), Arc::clone(&table));
    table
}

/// One evaluation of the polar product rule at the given sizes.
fn quad_eval(ctx: &Ctx, q: &MomentQuery, n: usize, m_ang: usize) -> PrecComplex {
    let prec = ctx.prec();
    let rule = laguerre_rule(prec, n);
    let ang = angle_table(prec, m_ang);
    let a = q.a.numerize();
    let b = q.bbar.numerize();
    let diff = q.j as i64 - q.k as i64;
    let mut total = ctx.zero();
    for i in 0..n {
        let u = &rule.sqrt_nodes[i];
        let mut s = ctx.zero();
        for p in 0..m_ang {
            let e = PrecComplex::from_floats(ang.cos[p].clone(), ang.sin[p].clone());
            let arg = a.mul(&e).add(&b.mul(&e.conj())).scale(u);
            let mut v = arg.exp();
            let idx = (diff * p as i64).rem_euclid(m_ang as i64) as usize;
            let phase = PrecComplex::from_floats(ang.cos[idx].clone(), ang.sin[idx].clone());
            v = v.mul(&phase);
            s = s.add(&v);
        }
        let mut factor = rule.weights[i].clone();
        factor *= u.clone().pow((q.j + q.k) as u32);
        s = s.scale(&factor).div_int(&Integer::from(m_ang as u64));
        total = total.add(&s);
    }
    total
}

/// Quadrature route with the error estimated by halving both node counts.
pub fn moment_quadrature(ctx: &Ctx, q: &MomentQuery) -> MomentResult {
    let full = quad_eval(ctx, q, DEFAULT_NODES, DEFAULT_ANGLES);
    let half = quad_eval(ctx, q, DEFAULT_NODES / 2, DEFAULT_ANGLES / 2);
    let err = full.sub(&half).abs();
    MomentResult { value: full, path: Path::Quadrature, err_estimate: err }
}

fn atom_value(ctx: &Ctx, atom: &Atom, w: &PrecComplex, m: u32) -> PrecComplex {
    match &atom.kind {
        AtomKind::Poly => ctx.one(),
        AtomKind::Exp(a) => a.mul(w).exp(),
        AtomKind::Ker(a) => kernel(ctx, w, a, m),
    }
}

/// Pointwise quadrature of (1/pi) ∫ w^{j+af} conj(w)^{k+ag} phi_f(w)
/// conj(phi_g(w)) e^{-|w|^2} dA, evaluating atom factors at each node.
/// Oracle for the expansion-based sesquilinear moments.
pub fn sesqui_moment_quadrature(
    ctx: &Ctx,
    m: u32,
    j: usize,
    k: usize,
    f: &Atom,
    g: &Atom,
) -> PrecComplex {
    let prec = ctx.prec();
    let n = DEFAULT_NODES;
    let m_ang = DEFAULT_ANGLES;
    let rule = laguerre_rule(prec, n);
    let ang = angle_table(prec, m_ang);
    let jj = j + f.power as usize;
    let kk = k + g.power as usize;
    let diff = jj as i64 - kk as i64;
    let mut total = ctx.zero();
    for i in 0..n {
        let u = &rule.sqrt_nodes[i];
        let mut s = ctx.zero();
        for p in 0..m_ang {
            let e = PrecComplex::from_floats(ang.cos[p].clone(), ang.sin[p].clone());
            let w = e.scale(u);
            let mut v = atom_value(ctx, f, &w, m).mul(&atom_value(ctx, g, &w, m).conj());
            let idx = (diff * p as i64).rem_euclid(m_ang as i64) as usize;
            let phase = PrecComplex::from_floats(ang.cos[idx].clone(), ang.sin[idx].clone());
            v = v.mul(&phase);
            s = s.add(&v);
        }
        let mut factor = rule.weights[i].clone();
        factor *= u.clone().pow((jj + kk) as u32);
        s = s.scale(&factor).div_int(&Integer::from(m_ang as u64));
        total = total.add(&s);
    }
    total
}
