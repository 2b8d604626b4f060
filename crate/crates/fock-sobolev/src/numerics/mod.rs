mod complex;
pub mod linalg;

pub use complex::{float_from_decimal, float_to_decimal, PrecComplex};

use std::sync::RwLock;

use rug::ops::Pow;
use rug::{Complete, Float, Integer};

pub const DEFAULT_PRECISION_BITS: u32 = 256;
pub const MIN_PRECISION_BITS: u32 = 64;

/// Exact-integer factorial table with derived quotients.
///
/// Internally synchronized so a shared `Ctx` can be used from parallel
/// sections without pre-warming (pre-warming still avoids lock churn).
pub struct FactorialCache {
    table: RwLock<Vec<Integer>>,
}

impl FactorialCache {
    pub fn new() -> Self {
        FactorialCache { table: RwLock::new(vec![Integer::from(1)]) }
    }

    pub fn warm(&self, up_to: usize) {
        let mut t = self.table.write().unwrap();
        while t.len() <= up_to {
            let n = t.len();
            let next = (t.last().unwrap() * n as u64).complete();
            t.push(next);
        }
    }

    pub fn factorial(&self, n: usize) -> Integer {
        {
            let t = self.table.read().unwrap();
            if n < t.len() {
                return t[n].clone();
            }
        }
        self.warm(n);
        self.table.read().unwrap()[n].clone()
    }

    /// n!/d! as an exact integer; requires n >= d.
    pub fn ratio(&self, n: usize, d: usize) -> Integer {
        assert!(n >= d, "factorial ratio {}!/{}! is not an integer", n, d);
        let num = self.factorial(n);
        let den = self.factorial(d);
        num.div_exact(&den)
    }

    /// (k+m)!/m!, the squared norm of z^k in the space of order m.
    pub fn rising(&self, k: usize, m: usize) -> Integer {
        self.ratio(k + m, m)
    }

    pub fn binom(&self, n: usize, k: usize) -> Integer {
        if k > n {
            return Integer::new();
        }
        let num = self.factorial(n);
        let den = self.factorial(k) * self.factorial(n - k);
        num.div_exact(&den)
    }
}

impl Default for FactorialCache {
    fn default() -> Self {
        Self::new()
    }
}

/// Shared evaluation context: precision, tolerances, caps, factorial table.
/// Immutable after construction apart from the synchronized caches.
pub struct Ctx {
    prec: u32,
    rel_tol: Float,
    zero_tol: Float,
    power_cap: u32,
    term_cap: usize,
    adaptive_cap: usize,
    fact: FactorialCache,
}

impl Ctx {
    pub fn new(prec: u32) -> Self {
        let prec = prec.max(MIN_PRECISION_BITS);
        // Everything below 10^-(digits-10) is treated as an exact zero.
        let digits = (f64::from(prec) * std::f64::consts::LOG10_2).floor() as i32;
        let zero_tol = Float::with_val(prec, 10).pow((10 - digits).min(-30));
        Ctx {
            prec,
            rel_tol: Float::with_val(prec, 1e-40),
            zero_tol,
            power_cap: 64,
            term_cap: 64,
            adaptive_cap: 4000,
            fact: FactorialCache::new(),
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Relative series truncation tolerance (default 1e-40).
    pub fn rel_tol(&self) -> &Float {
        &self.rel_tol
    }

    /// Threshold below which a computed magnitude counts as zero.
    pub fn zero_tol(&self) -> &Float {
        &self.zero_tol
    }

    pub fn power_cap(&self) -> u32 {
        self.power_cap
    }

    pub fn term_cap(&self) -> usize {
        self.term_cap
    }

    /// Safety cap on adaptive series summation.
    pub fn adaptive_cap(&self) -> usize {
        self.adaptive_cap
    }

    pub fn fact(&self) -> &FactorialCache {
        &self.fact
    }

    pub fn float(&self, v: f64) -> Float {
        Float::with_val(self.prec, v)
    }

    pub fn int_float(&self, n: &Integer) -> Float {
        Float::with_val(self.prec, n)
    }

    pub fn factorial_f(&self, n: usize) -> Float {
        self.int_float(&self.fact.factorial(n))
    }

    pub fn complex(&self, re: f64, im: f64) -> PrecComplex {
        PrecComplex::new(self.prec, re, im)
    }

    pub fn zero(&self) -> PrecComplex {
        PrecComplex::zero(self.prec)
    }

    pub fn one(&self) -> PrecComplex {
        PrecComplex::one(self.prec)
    }
}

impl Default for Ctx {
    fn default() -> Self {
        Self::new(DEFAULT_PRECISION_BITS)
    }
}

/// Series accumulator with the shared truncation rule: stop once three
/// consecutive terms fall below rel_tol * |partial sum| (guards against
/// accidental zero terms).
pub struct SeriesSum {
    sum: PrecComplex,
    rel_tol: Float,
    below: u32,
    terms: usize,
    cap: usize,
    converged: bool,
    last_mag: Float,
}

impl SeriesSum {
    pub fn new(ctx: &Ctx) -> Self {
        Self::with_cap(ctx, ctx.adaptive_cap())
    }

    pub fn with_cap(ctx: &Ctx, cap: usize) -> Self {
        SeriesSum {
            sum: ctx.zero(),
            rel_tol: ctx.rel_tol().clone(),
            below: 0,
            terms: 0,
            cap,
            converged: false,
            last_mag: ctx.float(0.0),
        }
    }

    /// Adds one term; returns true when summation should stop.
    pub fn push(&mut self, term: &PrecComplex) -> bool {
        self.sum = self.sum.add(term);
        self.terms += 1;
        self.last_mag = term.abs();
        let mut thr = self.sum.abs();
        thr *= &self.rel_tol;
        if self.last_mag <= thr {
            self.below += 1;
        } else {
            self.below = 0;
        }
        if self.below >= 3 {
            self.converged = true;
            return true;
        }
        self.terms >= self.cap
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn last_mag(&self) -> &Float {
        &self.last_mag
    }

    pub fn value(self) -> PrecComplex {
        self.sum
    }

    pub fn current(&self) -> &PrecComplex {
        &self.sum
    }
}

/// q_m(x) = sum_{k<m} x^k/k!, the Taylor polynomial of exp of order m-1;
/// q_0 = 0.
pub fn q_m(ctx: &Ctx, x: &PrecComplex, m: u32) -> PrecComplex {
    let mut sum = ctx.zero();
    let mut term = ctx.one();
    for k in 0..m {
        if k > 0 {
            term = term.mul(x).div_int(&Integer::from(k));
        }
        sum = sum.add(&term);
    }
    sum
}

/// Reproducing kernel K_m(z,w) = sum_k m!/(k+m)! (z conj(w))^k, summed by the
/// shared truncation rule. The k=0 term is 1, so K_m(z,0) = 1.
pub fn kernel(ctx: &Ctx, z: &PrecComplex, w: &PrecComplex, m: u32) -> PrecComplex {
    let x = z.mul(&w.conj());
    kernel_of_product(ctx, &x, m)
}

/// Kernel series evaluated at x = z*conj(w).
pub fn kernel_of_product(ctx: &Ctx, x: &PrecComplex, m: u32) -> PrecComplex {
    let mut acc = SeriesSum::new(ctx);
    let mut term = ctx.one();
    let mut k: u64 = 0;
    loop {
        if acc.push(&term) {
            break;
        }
        k += 1;
        term = term.mul(x).div_int(&Integer::from(k + u64::from(m)));
    }
    acc.value()
}

/// Closed form m!(e^x - q_m(x))/x^m at x = z*conj(w); undefined at x = 0
/// (removable singularity, the series handles it).
pub fn kernel_closed(ctx: &Ctx, z: &PrecComplex, w: &PrecComplex, m: u32) -> Option<PrecComplex> {
    let x = z.mul(&w.conj());
    if x.is_zero() {
        return None;
    }
    let num = x.exp().sub(&q_m(ctx, &x, m)).scale_int(&ctx.fact().factorial(m as usize));
    Some(num.div(&x.powu(m)))
}

/// Growth estimate e^{|z|^2}/(1+|z|^{2m}) for K_m(z,z); a sanity oracle only.
pub fn kernel_diag_estimate(ctx: &Ctx, z: &PrecComplex, m: u32) -> Float {
    let prec = ctx.prec();
    let r2 = z.abs_sq();
    let denom = Float::with_val(prec, 1) + r2.clone().pow(m);
    r2.exp() / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Ctx {
        Ctx::new(256)
    }

    #[test]
    fn factorial_table_recurrence() {
        let f = FactorialCache::new();
        f.warm(30);
        assert_eq!(f.factorial(0), 1);
        for k in 1..=30usize {
            assert_eq!(f.factorial(k), f.factorial(k - 1) * k as u64);
        }
        assert_eq!(f.rising(3, 2), 2 * 3 * 4 * 5 / 2); // 5!/2!
        assert_eq!(f.binom(10, 4), 210);
    }

    #[test]
    fn q_m_small_cases() {
        let c = ctx();
        let x = c.complex(5.0, 2.0);
        assert!(q_m(&c, &x, 0).is_zero());
        let one = q_m(&c, &x, 1);
        assert!(one.rel_diff(&c.one()) < 1e-70);
        // q_3(1) = 1 + 1 + 1/2
        let q3 = q_m(&c, &c.one(), 3);
        assert!(q3.rel_diff(&c.complex(2.5, 0.0)) < 1e-70);
    }

    #[test]
    fn kernel_at_zero_and_order_zero() {
        let c = ctx();
        let z = c.complex(1.7, -0.3);
        let k = kernel(&c, &z, &c.zero(), 5);
        assert!(k.rel_diff(&c.one()) < 1e-70);
        // m = 0 reduces to exp(z*conj(w)); series truncation caps accuracy
        // near the configured rel_tol.
        let w = c.complex(0.4, 1.1);
        let k0 = kernel(&c, &z, &w, 0);
        let e = z.mul(&w.conj()).exp();
        assert!(k0.rel_diff(&e) < 1e-35);
    }

    #[test]
    fn kernel_value_at_one_one_order_one() {
        // sum_k 1/(k+1)! = e - 1
        let c = ctx();
        let k = kernel(&c, &c.one(), &c.one(), 1);
        let e_minus_1 = c.one().exp().sub(&c.one());
        assert!(k.rel_diff(&e_minus_1) < 1e-35);
    }

    #[test]
    fn kernel_series_matches_closed_form() {
        let c = ctx();
        let z = c.complex(2.3, -1.1);
        let w = c.complex(-0.7, 0.9);
        for m in 0..=3 {
            let s = kernel(&c, &z, &w, m);
            let cl = kernel_closed(&c, &z, &w, m).unwrap();
            assert!(s.rel_diff(&cl).to_f64() < 1e-35);
        }
    }

    #[test]
    fn diag_estimate_reference_points() {
        let c = ctx();
        assert!((kernel_diag_estimate(&c, &c.zero(), 4) - 1f64).to_f64().abs() < 1e-70);
        // m=0, z=1: e/(1+1)
        let est = kernel_diag_estimate(&c, &c.one(), 0);
        let expect = c.float(1.0).exp() / 2u32;
        assert!((est - expect).to_f64().abs() < 1e-70);
    }

    #[test]
    fn series_rule_stops_on_three_small_terms() {
        let c = ctx();
        let mut s = SeriesSum::new(&c);
        assert!(!s.push(&c.one()));
        // An isolated zero term must not stop the sum.
        assert!(!s.push(&c.zero()));
        assert!(!s.push(&c.one()));
        let tiny = c.complex(1e-60, 0.0);
        assert!(!s.push(&tiny));
        assert!(!s.push(&tiny));
        assert!(s.push(&tiny));
        assert!(s.converged());
    }
}
