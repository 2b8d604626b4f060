//! Property tests: parser algebra (whitespace, commutativity, power merging,
//! exact pi literals) and cross-route agreement of the Berezin transform on
//! randomized exponential symbols.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use fock_sobolev::berezin::{berezin_quadrature, berezin_series, berezin_with_route, Route};
use fock_sobolev::operators::semicommutant;
use fock_sobolev::symbols::{parse_symbol, SesquiSymbol};
use fock_sobolev::{Ctx, PrecComplex};

fn ctx() -> Ctx {
    Ctx::new(256)
}

fn close(a: &PrecComplex, b: &PrecComplex, tol: f64) -> bool {
    let scale = a.abs().to_f64().max(b.abs().to_f64()).max(1.0);
    a.sub(b).abs().to_f64() / scale <= tol
}

// ---------------------------------------------------------------------------
// grammar generators: only legal factor combinations (at most one kernel or
// exponential atom per term, since mixed products are rejected by design)

fn decimal() -> impl Strategy<Value = String> {
    (-12i32..=12, prop_oneof![Just(1u32), Just(2), Just(4)])
        .prop_map(|(n, d)| {
            let v = n as f64 / d as f64;
            if v == v.trunc() {
                format!("{}", v as i64)
            } else {
                format!("{v}")
            }
        })
}

fn real_literal() -> impl Strategy<Value = String> {
    (decimal(), any::<bool>()).prop_map(|(d, pi)| if pi { format!("{d}pi") } else { d })
}

fn cnum() -> impl Strategy<Value = String> {
    prop_oneof![
        decimal(),
        (real_literal(), real_literal()).prop_map(|(a, b)| format!("({a},{b})")),
    ]
}

fn term() -> impl Strategy<Value = Vec<String>> {
    // constants and powers of z combine freely; at most one transcendental atom
    let plain = prop_oneof![
        Just("z".to_string()),
        (1u32..=3).prop_map(|k| format!("z^{k}")),
        cnum(),
    ];
    let atom = prop_oneof![
        cnum().prop_map(|c| format!("exp({c})")),
        cnum().prop_map(|c| format!("ker({c})")),
    ];
    (
        proptest::collection::vec(plain, 1..=3),
        proptest::option::of(atom),
    )
        .prop_map(|(mut fs, a)| {
            if let Some(a) = a {
                fs.push(a);
            }
            fs
        })
}

fn symbol_terms() -> impl Strategy<Value = Vec<Vec<String>>> {
    proptest::collection::vec(term(), 1..=3)
}

fn render(terms: &[Vec<String>]) -> String {
    terms
        .iter()
        .map(|t| t.join("*"))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn eval_points(c: &Ctx) -> Vec<PrecComplex> {
    vec![c.complex(0.7, -0.4), c.complex(-1.1, 0.3)]
}

proptest! {
    #[test]
    fn whitespace_does_not_change_a_symbol(terms in symbol_terms()) {
        let c = ctx();
        let text = render(&terms);
        // Spaces may not split multi-character tokens, so pad separators only.
        let padded_text = text
            .replace('+', "  +  ")
            .replace('*', " * ")
            .replace('(', " ( ")
            .replace(',', " , ");
        let base = parse_symbol(&c, &text).expect("generated symbol parses");
        let padded = parse_symbol(&c, &padded_text).expect("padded symbol parses");
        for z in eval_points(&c) {
            let a = base.eval(&c, &z, 1);
            let b = padded.eval(&c, &z, 1);
            prop_assert!(close(&a, &b, 1e-70), "{text}");
        }
    }

    #[test]
    fn term_order_does_not_change_a_symbol(terms in symbol_terms()) {
        let c = ctx();
        let text = render(&terms);
        let mut rotated = terms.clone();
        if rotated.len() > 1 {
            rotated.rotate_left(1);
        }
        let a = parse_symbol(&c, &text).expect("generated symbol parses");
        let b = parse_symbol(&c, &render(&rotated)).expect("rotated symbol parses");
        for z in eval_points(&c) {
            prop_assert!(close(&a.eval(&c, &z, 2), &b.eval(&c, &z, 2), 1e-65), "{text}");
        }
    }

    #[test]
    fn factor_order_does_not_change_a_term(factors in term()) {
        let c = ctx();
        let text = factors.join("*");
        let mut reversed = factors.clone();
        reversed.reverse();
        let a = parse_symbol(&c, &text).expect("generated term parses");
        let b = parse_symbol(&c, &reversed.join("*")).expect("reversed term parses");
        for z in eval_points(&c) {
            prop_assert!(close(&a.eval(&c, &z, 1), &b.eval(&c, &z, 1), 1e-65), "{text}");
        }
    }

    #[test]
    fn repeated_powers_merge(a in 1u32..=4, b in 1u32..=4) {
        let c = ctx();
        let split = parse_symbol(&c, &format!("z^{a}*z^{b}")).unwrap();
        let merged = parse_symbol(&c, &format!("z^{}", a + b)).unwrap();
        let z = c.complex(1.3, -0.8);
        prop_assert!(close(&split.eval(&c, &z, 0), &merged.eval(&c, &z, 0), 1e-70));
    }

    #[test]
    fn exponential_factors_merge_by_adding_frequencies(
        ar in -8i32..=8, ai in -8i32..=8, br in -8i32..=8, bi in -8i32..=8,
    ) {
        let c = ctx();
        // Quarter-integer frequencies keep both routes free of decimal rounding.
        let q = |n: i32| n as f64 * 0.25;
        let split = parse_symbol(
            &c,
            &format!("exp(({},{}))*exp(({},{}))", q(ar), q(ai), q(br), q(bi)),
        )
        .unwrap();
        let merged =
            parse_symbol(&c, &format!("exp(({},{}))", q(ar + br), q(ai + bi))).unwrap();
        let z = c.complex(0.4, 0.9);
        prop_assert!(close(&split.eval(&c, &z, 0), &merged.eval(&c, &z, 0), 1e-70));
    }

    #[test]
    fn even_pi_multiples_evaluate_to_exactly_one(k in -6i32..=6) {
        let c = ctx();
        let sym = parse_symbol(&c, &format!("exp((0,{}pi))", 2 * k)).unwrap();
        let at_one = sym.eval(&c, &c.complex(1.0, 0.0), 0);
        // Resonance is symbolic: the value is exactly 1 with no rounding.
        prop_assert!(at_one.sub(&c.one()).is_zero());
    }
}

// ---------------------------------------------------------------------------
// randomized numeric cross-checks

fn random_disk(ctx: &Ctx, rng: &mut ChaCha8Rng, r: f64) -> PrecComplex {
    loop {
        let re = rng.gen_range(-r..=r);
        let im = rng.gen_range(-r..=r);
        if re * re + im * im <= r * r {
            return ctx.complex(re, im);
        }
    }
}

#[test]
fn berezin_routes_agree_on_random_exponential_symbols() {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(0xBE5E);
    let cases: Vec<(SesquiSymbol, u32, PrecComplex)> = (0..50)
        .map(|i| {
            let a = random_disk(&c, &mut rng, 2.0);
            let b = random_disk(&c, &mut rng, 2.0);
            let f = format!("exp(({},{}))", a.re().to_f64(), a.im().to_f64());
            let g = format!("exp(({},{}))", b.re().to_f64(), b.im().to_f64());
            let s = SesquiSymbol::new(
                parse_symbol(&c, &f).unwrap(),
                parse_symbol(&c, &g).unwrap(),
            );
            let z = loop {
                let z = random_disk(&c, &mut rng, 3.0);
                if z.abs().to_f64() > 0.05 {
                    break z;
                }
            };
            (s, (i % 3) as u32, z)
        })
        .collect();
    let (worst_series, worst_quad) = cases
        .par_iter()
        .map(|(s, m, z)| {
            let closed = berezin_with_route(&c, s, *m, z, Route::Closed)
                .expect("closed route")
                .value;
            let series = berezin_series(&c, s, *m, z).expect("series route");
            let (quad, _err) = berezin_quadrature(&c, s, *m, z);
            (
                closed.rel_diff(&series).to_f64(),
                series.rel_diff(&quad).to_f64(),
            )
        })
        .reduce(|| (0.0, 0.0), |x, y| (x.0.max(y.0), x.1.max(y.1)));
    assert!(worst_series <= 1e-25, "closed vs series: {worst_series:.3e}");
    assert!(worst_quad <= 1e-9, "series vs quadrature: {worst_quad:.3e}");
}

#[test]
fn swapping_the_pair_transposes_the_semicommutant() {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(0xADAD);
    for i in 0..8 {
        let m = (i % 3) as u32;
        let a = random_disk(&c, &mut rng, 1.5);
        let b = random_disk(&c, &mut rng, 1.5);
        let f = parse_symbol(
            &c,
            &format!("exp(({},{}))", a.re().to_f64(), a.im().to_f64()),
        )
        .unwrap();
        let g = parse_symbol(
            &c,
            &format!("z + exp(({},{}))", b.re().to_f64(), b.im().to_f64()),
        )
        .unwrap();
        let fg = semicommutant(&c, &f, &g, m, 10).unwrap();
        let gf = semicommutant(&c, &g, &f, m, 10).unwrap();
        let defect = gf.conj_transpose().sub(&fg).max_entry_magnitude().to_f64();
        let scale = 1.0 + fg.max_entry_magnitude().to_f64();
        assert!(defect / scale < 1e-70, "adjoint defect {defect:.3e}");
    }
}
