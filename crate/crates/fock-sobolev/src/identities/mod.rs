//! Exact combinatorial identities behind the rigidity results: the
//! falling-factorial expansion of shifted factorial products, the resonant
//! obstruction series with its rearranged form, and series-coefficient row
//! matrices whose nonsingularity forces a polynomial factor to be constant.

use crate::numerics::{linalg, Ctx, PrecComplex, SeriesSum};
use crate::symbols::{series_coefficients, HoloSymbol};
use crate::{Error, Result};

use rug::{Complete, Float, Integer, Rational};

fn int_factorial(n: usize) -> Integer {
    Integer::factorial(n as u32).complete()
}

fn int_binom(n: usize, k: usize) -> Integer {
    let num = int_factorial(n);
    let den = int_factorial(k) * int_factorial(n - k);
    num / den
}

/// rho(k) = prod_{i=1}^{l} (k+m+i) written in the falling-factorial basis
/// rho(k) = C_0 + sum_{i=1}^{l} C_i k(k-1)...(k-i+1), with exact integer
/// coefficients and C_l = 1.
#[derive(Clone, Debug)]
pub struct FallingExpansion {
    pub l: usize,
    pub m: usize,
    c: Vec<Integer>,
}

pub fn falling_expand(l: usize, m: usize) -> FallingExpansion {
    assert!((1..=30).contains(&l), "degree outside the supported window");
    // Newton forward differences: C_i = Delta^i rho(0) / i!, exact because
    // rho is integer-valued on the integers.
    let mut vals: Vec<Integer> = (0..=l as u64)
        .map(|k| rho_product(k, l, m))
        .collect();
    let mut c = Vec::with_capacity(l + 1);
    for i in 0..=l {
        let fact = int_factorial(i);
        debug_assert!(vals[0].is_divisible(&fact));
        c.push(vals[0].clone() / fact);
        for j in 0..l - i {
            vals[j] = (&vals[j + 1] - &vals[j]).complete();
        }
        vals.truncate(l - i);
    }
    FallingExpansion { l, m, c }
}

fn rho_product(k: u64, l: usize, m: usize) -> Integer {
    let mut p = Integer::from(1);
    for i in 1..=l as u64 {
        p *= k + m as u64 + i;
    }
    p
}

impl FallingExpansion {
    pub fn coeff(&self, i: usize) -> &Integer {
        &self.c[i]
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.c
    }

    pub fn rho(&self, k: u64) -> Integer {
        rho_product(k, self.l, self.m)
    }

    /// Evaluate the falling-factorial form at integer k.
    pub fn reconstruct(&self, k: u64) -> Integer {
        let mut total = self.c[0].clone();
        let mut falling = Integer::from(1);
        for i in 1..=self.l {
            let step = k as i64 - (i as i64 - 1);
            falling *= Integer::from(step);
            total += (&self.c[i] * &falling).complete();
        }
        total
    }

    /// rho(l) = sum_i C_i l!/(l-i)!, the identity used to collapse the
    /// obstruction coefficient.
    pub fn identity_at_l(&self) -> (Integer, Integer) {
        let l = self.l;
        let mut rhs = Integer::new();
        for i in 0..=l {
            let ratio = int_factorial(l) / int_factorial(l - i);
            rhs += &self.c[i] * ratio;
        }
        (self.rho(l as u64), rhs)
    }
}

/// Closed form of the obstruction coefficient: d_l = 1 - (l+m)!/(l! m!).
/// Zero for all l exactly when m = 0.
pub fn obstruction_coefficient_closed(l: usize, m: usize) -> Rational {
    Rational::from(1) - Rational::from(int_binom(l + m, l))
}

/// The same coefficient assembled from the falling-factorial expansion:
/// binom(2l+m, l) - binom(l+m, l) - sum_{i<l} C_i/(l-i)!. Agreement with the
/// closed form is an exact rational identity.
pub fn obstruction_coefficient_expansion(l: usize, m: usize) -> Rational {
    let exp = falling_expand(l, m);
    let mut acc = Rational::from(int_binom(2 * l + m, l)) - Rational::from(int_binom(l + m, l));
    for i in 0..l {
        acc -= Rational::from((exp.coeff(i).clone(), int_factorial(l - i)));
    }
    acc
}

fn resonant_product(a: &PrecComplex, b: &PrecComplex) -> Result<PrecComplex> {
    let x = a.conj().mul(&b.conj());
    if !x.is_multiple_of_two_pi_i() {
        return Err(Error::Hypothesis(
            "resonance requires exp(conj(A) conj(B)) = 1 symbolically".into(),
        ));
    }
    Ok(x)
}

/// Defining form of the obstruction series at x = conj(A) conj(B):
///
///   sum_{k>=0} (m!/k!) (k+l+m)!/(k+m)! x^k
///   - sum_{k=0}^{l} (m!/k!) (l+m)!/(k+m)! (l+m)!/(l-k+m)! x^k.
///
/// Only valid under the resonance hypothesis e^x = 1 (checked symbolically);
/// the infinite sum is truncated by the shared stopping rule.
pub fn resonant_series_defining(
    ctx: &Ctx,
    a: &PrecComplex,
    b: &PrecComplex,
    l: usize,
    m: u32,
) -> Result<PrecComplex> {
    let x = resonant_product(a, b)?;
    let mu = m as usize;
    let mfact = int_factorial(mu);

    let mut head = SeriesSum::with_cap(ctx, ctx.adaptive_cap());
    let mut pow = ctx.one();
    let mut k = 0usize;
    loop {
        let num = &mfact * ctx.fact().ratio(k + l + mu, k + mu);
        let term = pow.scale_int(&num).div_int(&ctx.fact().factorial(k));
        if head.push(&term) {
            break;
        }
        k += 1;
        pow = pow.mul(&x);
    }
    if !head.converged() {
        return Err(Error::NonConvergence { terms: head.terms() });
    }

    let mut tail = ctx.zero();
    let mut pow = ctx.one();
    for k in 0..=l {
        if k > 0 {
            pow = pow.mul(&x);
        }
        let num =
            (&mfact * ctx.fact().ratio(l + mu, k + mu)) * ctx.fact().ratio(l + mu, l - k + mu);
        tail = tail.add(&pow.scale_int(&num).div_int(&ctx.fact().factorial(k)));
    }
    Ok(head.value().sub(&tail))
}

/// Rearranged form of the same series under resonance:
///
///   sum_{k=1}^{l-1} (m!/k!) [ (k+l+m)!/(k+m)! - (l+m)!^2/((k+m)!(l-k+m)!) ] x^k
///   - sum_{i=0}^{l-2} m! C_i [ sum_{k=1}^{l-i-1} x^k/k! ] x^i
///   + m! d_l x^l,
///
/// with C_i the falling-factorial coefficients and d_l the closed-form
/// obstruction coefficient.
pub fn resonant_series_rearranged(
    ctx: &Ctx,
    a: &PrecComplex,
    b: &PrecComplex,
    l: usize,
    m: u32,
) -> Result<PrecComplex> {
    let x = resonant_product(a, b)?;
    let mu = m as usize;
    let mfact = int_factorial(mu);
    let mut pows = vec![ctx.one()];
    for k in 1..=l {
        pows.push(pows[k - 1].mul(&x));
    }

    let mut d2 = ctx.zero();
    for k in 1..l {
        let first = ctx.fact().ratio(k + l + mu, k + mu);
        let second = ctx.fact().ratio(l + mu, k + mu) * ctx.fact().ratio(l + mu, l - k + mu);
        let bracket = &mfact * (first - second);
        d2 = d2.add(&pows[k].scale_int(&bracket).div_int(&ctx.fact().factorial(k)));
    }

    let expansion = falling_expand(l, mu);
    let mut d3 = ctx.zero();
    if l >= 2 {
        for i in 0..=l - 2 {
            let mut inner = ctx.zero();
            for k in 1..=l - i - 1 {
                inner = inner.add(&pows[k].div_int(&ctx.fact().factorial(k)));
            }
            let scaled = inner
                .mul(&pows[i])
                .scale_int(&(&mfact * expansion.coeff(i)).complete());
            d3 = d3.add(&scaled);
        }
    }

    let d_l = obstruction_coefficient_closed(l, mu);
    let d_l_f = Float::with_val(ctx.prec(), &d_l);
    let tail = pows[l].scale_int(&mfact).scale(&d_l_f);
    Ok(d2.sub(&d3).add(&tail))
}

/// Row selection produced by the nonsingularity search.
#[derive(Clone, Debug)]
pub struct RowSelection {
    pub lambdas: Vec<usize>,
    pub det: PrecComplex,
    /// true when the greedy upper-triangular construction succeeded;
    /// false when a consecutive window was used instead.
    pub triangular: bool,
}

/// Matrix B[k][i] = b_{lambda_k + i} (lambda_k + i + m)!/(lambda_k + m)!,
/// i = 1..n1, from the series coefficients b_j of f.
pub fn coefficient_row_matrix(
    ctx: &Ctx,
    f: &HoloSymbol,
    m: u32,
    n1: usize,
    lambdas: &[usize],
) -> Vec<Vec<PrecComplex>> {
    assert_eq!(lambdas.len(), n1);
    let mu = m as usize;
    let depth = lambdas.iter().max().copied().unwrap_or(0) + n1 + 1;
    let view = series_coefficients(ctx, f, m, depth);
    lambdas
        .iter()
        .map(|&lam| {
            (1..=n1)
                .map(|i| {
                    view.coeff(lam + i)
                        .scale_int(&ctx.fact().ratio(lam + i + mu, lam + mu))
                })
                .collect()
        })
        .collect()
}

pub fn row_matrix_determinant(
    ctx: &Ctx,
    f: &HoloSymbol,
    m: u32,
    n1: usize,
    lambdas: &[usize],
) -> PrecComplex {
    linalg::determinant(ctx, &coefficient_row_matrix(ctx, f, m, n1, lambdas))
}

/// Search for rows making the coefficient matrix nonsingular. First the
/// greedy upper-triangular construction (exact zero tests on the leading
/// coefficients); if the coefficient pattern has no zeros to exploit, scan
/// consecutive windows and accept the first determinant above the zero
/// threshold. Failure is reported, not fatal: for a polynomial f no
/// selection exists.
pub fn find_nonsingular_rows(
    ctx: &Ctx,
    f: &HoloSymbol,
    m: u32,
    n1: usize,
    probe_bound: usize,
) -> Result<RowSelection> {
    let depth = probe_bound + n1 + 1;
    let view = series_coefficients(ctx, f, m, depth);
    let coeff_zero = |j: usize| view.coeff(j).is_zero();

    // greedy: lambda_j needs b_{lambda_j+i} = 0 for i < j and != 0 at i = j
    let mut lambdas: Vec<usize> = Vec::with_capacity(n1);
    'next_row: for j in 1..=n1 {
        for lam in 0..=probe_bound {
            if lambdas.contains(&lam) {
                continue;
            }
            if (1..j).all(|i| coeff_zero(lam + i)) && !coeff_zero(lam + j) {
                lambdas.push(lam);
                continue 'next_row;
            }
        }
        lambdas.clear();
        break;
    }
    if lambdas.len() == n1 {
        let det = row_matrix_determinant(ctx, f, m, n1, &lambdas);
        if !det.is_zero() {
            return Ok(RowSelection { lambdas, det, triangular: true });
        }
    }

    for start in 0..=probe_bound.saturating_sub(n1.saturating_sub(1)) {
        let lambdas: Vec<usize> = (start..start + n1).collect();
        let det = row_matrix_determinant(ctx, f, m, n1, &lambdas);
        if det.abs() > *ctx.zero_tol() {
            return Ok(RowSelection { lambdas, det, triangular: false });
        }
    }
    Err(Error::RowSearchFailed { bound: probe_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_symbol;

    #[test]
    fn falling_expansion_reference_coefficients() {
        for m in 0..=4 {
            let e = falling_expand(1, m);
            assert_eq!(*e.coeff(0), Integer::from(m as u32 + 1));
            assert_eq!(*e.coeff(1), Integer::from(1));
        }
        let e = falling_expand(2, 1);
        assert_eq!(e.coeffs(), &[Integer::from(6), Integer::from(6), Integer::from(1)]);
        // rho(2) = 4*5 = 20 = 6 + 6*2 + 1*2
        assert_eq!(e.reconstruct(2), Integer::from(20));
    }

    #[test]
    fn falling_expansion_reconstructs_pointwise() {
        for l in 1..=8 {
            for m in 0..=3 {
                let e = falling_expand(l, m);
                assert_eq!(*e.coeff(l), Integer::from(1), "leading coefficient");
                for k in 0..=(2 * l as u64) {
                    assert_eq!(e.reconstruct(k), e.rho(k), "l={} m={} k={}", l, m, k);
                }
                let (lhs, rhs) = e.identity_at_l();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn obstruction_coefficient_reference_values() {
        // order zero kills the coefficient for every degree
        for l in 1..=20 {
            assert_eq!(obstruction_coefficient_closed(l, 0), Rational::from(0));
        }
        // d_2 at order one: 1 - binom(3,2) = -2
        assert_eq!(obstruction_coefficient_closed(2, 1), Rational::from(-2));
        for l in 1..=20 {
            for m in 0..=5 {
                let closed = obstruction_coefficient_closed(l, m);
                let expanded = obstruction_coefficient_expansion(l, m);
                assert_eq!(closed, expanded, "l={} m={}", l, m);
                if m >= 1 {
                    assert_ne!(closed, Rational::from(0), "l={} m={}", l, m);
                }
            }
        }
    }

    #[test]
    fn resonant_series_forms_agree() {
        let ctx = Ctx::new(256);
        // conj(A) conj(B) = 2 pi i kappa, built symbolically
        let cases = [(1usize, 0u32, 1i32, 1.0f64), (2, 1, 1, 2.0), (3, 2, -2, 0.5), (6, 3, 3, 4.0)];
        for (l, m, kappa, t) in cases {
            let a = ctx.complex(t, 0.0);
            let bbar_im = 2.0 * kappa as f64 / t;
            let b = PrecComplex::pi_scaled(ctx.float(0.0), ctx.float(bbar_im)).conj();
            let defining = resonant_series_defining(&ctx, &a, &b, l, m).unwrap();
            let rearranged = resonant_series_rearranged(&ctx, &a, &b, l, m).unwrap();
            // scale floored at 1: the l=1 m=0 case is exactly zero on both
            // sides, where a plain relative test is vacuous
            let diff = defining.sub(&rearranged).abs().to_f64();
            let scale = defining.abs().to_f64().max(rearranged.abs().to_f64()).max(1.0);
            assert!(diff / scale < 1e-30, "l={} m={} diff={}", l, m, diff);
        }
    }

    #[test]
    fn resonance_hypothesis_is_enforced() {
        let ctx = Ctx::new(256);
        let a = ctx.complex(1.0, 0.0);
        let b = ctx.complex(0.0, -6.28);
        assert!(matches!(
            resonant_series_defining(&ctx, &a, &b, 2, 1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn row_matrix_reference_entries_at_order_one() {
        let ctx = Ctx::new(256);
        let f = parse_symbol(&ctx, "exp((1,0))").unwrap();
        let b = coefficient_row_matrix(&ctx, &f, 1, 2, &[0, 1]);
        // b_j = 1/j!, entries b_{lam+i} (lam+i+1)!/(lam+1)!
        let expect = [[2.0, 3.0], [1.5, 2.0]];
        for r in 0..2 {
            for c in 0..2 {
                assert!((b[r][c].re().to_f64() - expect[r][c]).abs() < 1e-70);
            }
        }
        let det = row_matrix_determinant(&ctx, &f, 1, 2, &[0, 1]);
        assert!((det.re().to_f64() + 0.5).abs() < 1e-70);
    }

    #[test]
    fn row_matrix_is_singular_at_order_zero_for_the_exponential() {
        // At order zero the rows are proportional (b_{lam+i} (lam+i)!/lam! =
        // 1/lam! for e^z), so no selection is nonsingular: this degeneracy is
        // the coefficient-level face of the resonant pairs that exist on the
        // plain Fock space but not at higher orders.
        let ctx = Ctx::new(256);
        let f = parse_symbol(&ctx, "exp((1,0))").unwrap();
        let det = row_matrix_determinant(&ctx, &f, 0, 2, &[0, 1]);
        assert!(det.abs().to_f64() < 1e-70);
        assert!(matches!(
            find_nonsingular_rows(&ctx, &f, 0, 2, 12),
            Err(Error::RowSearchFailed { .. })
        ));
    }

    #[test]
    fn row_search_window_tracks_the_order_for_the_exponential() {
        // For f = e^z the entry b_{lam+i}(lam+i+m)!/(lam+m)! equals
        // P(lam+i)/(lam+m)! with P of degree m, so every selection has rank
        // at most m+1: the search succeeds exactly when n1 <= m+1.
        let ctx = Ctx::new(256);
        let f = parse_symbol(&ctx, "exp((1,0))").unwrap();
        for n1 in 1..=2 {
            let sel = find_nonsingular_rows(&ctx, &f, 1, n1, 24).unwrap();
            assert!(sel.det.abs().to_f64().abs() > 1e-30);
        }
        assert!(matches!(
            find_nonsingular_rows(&ctx, &f, 1, 3, 24),
            Err(Error::RowSearchFailed { .. })
        ));
        for n1 in 1..=6 {
            let sel = find_nonsingular_rows(&ctx, &f, 5, n1, 24).unwrap();
            assert!(sel.det.abs().to_f64().abs() > 1e-30, "n1={}", n1);
        }
    }

    #[test]
    fn greedy_search_exploits_zero_coefficients() {
        let ctx = Ctx::new(256);
        // b_j = 0 for j < 3: the greedy construction finds a triangular
        // selection by descending shifts
        let f = parse_symbol(&ctx, "z^3*exp((1,0))").unwrap();
        let sel = find_nonsingular_rows(&ctx, &f, 1, 3, 24).unwrap();
        assert!(sel.triangular);
        assert_eq!(sel.lambdas, vec![2, 1, 0]);
        assert!(!sel.det.is_zero());
    }

    #[test]
    fn polynomial_rows_beyond_degree_vanish() {
        let ctx = Ctx::new(256);
        let f = parse_symbol(&ctx, "z^2 + z").unwrap();
        let b = coefficient_row_matrix(&ctx, &f, 1, 2, &[2, 5]);
        for row in &b {
            for e in row {
                assert!(e.is_zero());
            }
        }
        let det = row_matrix_determinant(&ctx, &f, 1, 2, &[2, 5]);
        assert!(det.is_zero());
    }
}
