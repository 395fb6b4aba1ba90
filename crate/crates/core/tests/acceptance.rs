//! Acceptance criteria. Each prints one PASS/FAIL line; the process exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float, Rational};

use mlspectrum::intertwine::{
    decode_omega0, encode, isolated_point_check, matrix_identity_window_defect, orbit_sample, reconstruct_epsilon,
    OmegaSequence, Tail, XiElement,
};
use mlspectrum::numeric::{Precision, Verdict};
use mlspectrum::poly::{power_to_f, IntPolynomial, Limits, RecurrenceSpec};
use mlspectrum::rho::{build_rho_table, convolution_identity_defect, rho_expansive, RhoKernel, RhoTable};
use mlspectrum::roots::{analyze, RootClassification};
use mlspectrum::spectrum::coding::{omega_prefix, series_coding_mismatch};
use mlspectrum::spectrum::conditions::check_conditions;
use mlspectrum::spectrum::discrete_spectrum;
use mlspectrum::spectrum::homsym::{hom_sym, hom_sym_lagrange};
use mlspectrum::spectrum::realize::realize_near_half;
use mlspectrum::spectrum::series::SeriesKind;
use mlspectrum::spectrum::weights::hom_sym_at_inverse_roots;

const QUADRATIC: [i64; 3] = [82, -20, 1];
const CUBIC: [i64; 4] = [-2, 6, 2, 1];

struct Setup {
    spec: RecurrenceSpec,
    class: RootClassification,
    kernel: RhoKernel,
}

fn setup(c: &[i64], k: u32) -> Setup {
    let p = IntPolynomial::from_i64(c).unwrap();
    let spec = power_to_f(&p, k, &Limits::default()).unwrap();
    let class = analyze(&p, Precision::DEFAULT).unwrap().with_k(k);
    let kernel = RhoKernel::new(&spec, &class).unwrap();
    Setup { spec, class, kernel }
}

fn table(s: &Setup, lo: i64, hi: i64) -> RhoTable {
    build_rho_table(&s.kernel, lo, hi).unwrap()
}

fn abs_diff(a: &Float, b: &Float) -> Float {
    Float::with_val(a.prec().max(b.prec()), a - b).abs()
}

fn sci(x: &Float) -> String {
    format!("{:.3e}", x.to_f64())
}

type Outcome = (bool, String);

fn roots_reproduce() -> Outcome {
    let s = setup(&CUBIC, 0);
    let printed = [(-1.1495, 2.3165), (-1.1495, -2.3165), (0.2991, 0.0)];
    let mut worst: f64 = 0.0;
    for (re, im) in printed {
        let best = s
            .class
            .roots
            .iter()
            .map(|r| {
                let dr = r.value.real().to_f64() - re;
                let di = r.value.imag().to_f64() - im;
                dr.abs().max(di.abs())
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    let q = setup(&QUADRATIC, 0);
    let bits = q.class.bits() + 64;
    let r18 = Float::with_val(bits, 18).sqrt();
    let expected = [Float::with_val(bits, 10 + r18.clone()), Float::with_val(bits, 10 - r18)];
    let mut qworst = Float::new(bits);
    for e in &expected {
        let d = q
            .class
            .roots
            .iter()
            .map(|r| Float::with_val(bits, Complex::with_val(bits, &r.value - e).abs().real()))
            .fold(Float::with_val(bits, f64::INFINITY), |a, b| a.min(&b));
        qworst = qworst.max(&d);
    }
    let ok = worst < 5e-5 && qworst < 1e-40;
    (ok, format!("cubic max deviation {worst:.2e}, quadratic {}", sci(&qworst)))
}

fn convolution_identity() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (c, k) in [(&QUADRATIC[..], 0), (&CUBIC[..], 0), (&CUBIC[..], 1)] {
        let s = setup(c, k);
        let t = table(&s, -110, 110);
        let d = convolution_identity_defect(&t, -100, 100).unwrap();
        ok &= d < 1e-45;
        parts.push(format!("{}(k={k}) {}", s.spec.base, sci(&d)));
    }
    (ok, parts.join(", "))
}

fn windowed_inverse() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [&QUADRATIC[..], &CUBIC[..]] {
        let s = setup(c, 0);
        let t = table(&s, -205, 205);
        let (ab, ba) = matrix_identity_window_defect(&t, -100, 100).unwrap();
        ok &= ab < 1e-45 && ba < 1e-45;
        parts.push(format!("{}: AB {}, BA {}", s.spec.base, sci(&ab), sci(&ba)));
    }
    (ok, parts.join("; "))
}

fn random_xi(class: &RootClassification, rng: &mut ChaCha8Rng) -> XiElement {
    let n = class.r1 + 2 * class.r2;
    let params: Vec<Float> = (0..n).map(|_| Float::with_val(64, rng.gen_range(-1.0..1.0))).collect();
    XiElement::from_parameters(class, 0, &params).unwrap()
}

fn roundtrip() -> Outcome {
    let mut ok = true;
    let mut worst_err = 0.0f64;
    let mut checked = 0;
    for c in [&QUADRATIC[..], &CUBIC[..]] {
        let s = setup(c, 0);
        let t = table(&s, -220, 220);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
        for _ in 0..25 {
            let g = random_xi(&s.class, &mut rng);
            let enc = encode(&s.spec, &s.class, &g, 140).unwrap();
            for m in 0..=60 {
                let (v, e) = reconstruct_epsilon(&t, &enc.sequence, m, None).unwrap();
                let eps = enc.sample.eps_at(m).unwrap();
                let allowed = Float::with_val(v.prec(), &e + &enc.sample.x_error[(m - enc.sample.n_lo) as usize]);
                ok &= abs_diff(&v, eps) <= allowed && e < 1e-25;
                worst_err = worst_err.max(e.to_f64());
                checked += 1;
            }
        }
    }
    (ok, format!("{checked} comparisons, largest error bound {worst_err:.2e}"))
}

fn random_word(rng: &mut ChaCha8Rng, lo: i64, hi: i64, len: usize, amp: i64) -> OmegaSequence {
    let start = rng.gen_range(lo..=hi);
    let mut head: Vec<i64> = (0..len).map(|_| rng.gen_range(-amp..=amp)).collect();
    head[0] = if head[0] == 0 { 1 } else { head[0] };
    OmegaSequence::from_i64(start, &head, Tail::Zero)
}

fn decode_words() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for c in [&QUADRATIC[..], &CUBIC[..]] {
        let s = setup(c, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
        for _ in 0..10 {
            let t = random_word(&mut rng, -5, 5, 6, 3);
            let d = decode_omega0(&s.kernel, &t).unwrap();
            ok &= d.defect < 1e-20;
            worst = worst.max(d.defect.to_f64());
        }
    }
    (ok, format!("20 words, largest defect {worst:.2e}"))
}

fn expansive_closed_form() -> Outcome {
    let s = setup(&QUADRATIC, 0);
    let mut worst = Float::new(s.kernel.bits());
    let mut exact_worst = Float::new(s.kernel.bits());
    // exact oracle: rho_{-m} = -a_0^{-1} H^(m)(1/alpha) from the power series of a_0/P
    let h = hom_sym_at_inverse_roots(&s.spec.base, 200);
    for n in -200..=0i64 {
        let a = s.kernel.rho(n).unwrap();
        let b = rho_expansive(&s.spec.base, n, &s.class).unwrap();
        worst = worst.max(&abs_diff(&a, &b));
        let exact = -Rational::from(&h[(-n) as usize] / 82u32);
        exact_worst = exact_worst.max(&abs_diff(&a, &Float::with_val(a.prec(), &exact)));
    }
    let (r0, e0) = s.kernel.rho_with_error(0).unwrap();
    let (r1, e1) = s.kernel.rho_with_error(-1).unwrap();
    let t0 = Float::with_val(r0.prec(), Rational::from((-1, 82)));
    let t1 = Float::with_val(r1.prec(), Rational::from((-10, 3362)));
    let exact_ok = abs_diff(&r0, &t0) <= e0 && abs_diff(&r1, &t1) <= e1;
    let ok = worst < 1e-45 && exact_worst < 1e-45 && exact_ok;
    (
        ok,
        format!(
            "residue vs closed form {}, vs exact series {}, rho_0/rho_-1 exact within {}",
            sci(&worst),
            sci(&exact_worst),
            sci(&e0.max(&e1))
        ),
    )
}

fn condition_319() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [&QUADRATIC[..], &CUBIC[..]] {
        let s = setup(c, 0);
        let t = table(&s, -200, 200);
        let cond = check_conditions(&s.spec, &s.class, &t).unwrap();
        ok &= cond.eqn319.verdict == Verdict::Holds;
        let v = cond.eqn319.value.clone().unwrap();
        if c == QUADRATIC {
            let target = Float::with_val(v.mid().prec(), Rational::from((1, 21)));
            let d = abs_diff(&v.mid(), &target);
            ok &= d < 1e-30;
            parts.push(format!("{}: {} (|value - 1/21| = {})", s.spec.base, cond.eqn319.verdict, sci(&d)));
        } else {
            parts.push(format!("{}: {} (value {:.6})", s.spec.base, cond.eqn319.verdict, v.mid().to_f64()));
        }
    }
    (ok, parts.join("; "))
}

fn discrete_values() -> Outcome {
    let s = setup(&QUADRATIC, 0);
    let t = table(&s, -100, 100);
    let cond = check_conditions(&s.spec, &s.class, &t).unwrap();
    // sum 1/alpha from the two roots, against the exact 10/41
    let inv_sum = s
        .class
        .roots
        .iter()
        .fold(Float::new(s.class.bits()), |acc, r| acc + Float::with_val(s.class.bits(), r.value.real().recip_ref()));
    let target = Float::with_val(s.class.bits(), Rational::from((10, 41)));
    let cor_ok = cond.cor.verdict == Verdict::Holds && abs_diff(&inv_sum, &target) < 1e-40;
    let ds = discrete_spectrum(&s.kernel, &t, 6, 200, &Limits::default()).unwrap();
    let mut ok = cor_ok;
    for w in ds.e_k.windows(2) {
        ok &= w[0].strictly_below(&w[1]);
    }
    for x in &ds.e_k {
        ok &= *x.hi() < 0.5;
    }
    ok &= *ds.e.hi() < 0.5;
    let gap6 = Float::with_val(200, ds.e.lo() - ds.e_k[6].hi());
    let gap0 = Float::with_val(200, ds.e.lo() - ds.e_k[0].hi());
    ok &= gap6 < gap0 && gap6 >= 0;
    (
        ok,
        format!(
            "cor {}, e = {:.12}, e_0 = {:.12}, e - e_6 = {}",
            cond.cor.verdict,
            ds.e.mid().to_f64(),
            ds.e_k[0].mid().to_f64(),
            sci(&Float::with_val(400, ds.e.mid() - ds.e_k[6].mid()))
        ),
    )
}

fn coding_identities() -> Outcome {
    let l = Limits::default();
    let w: String = omega_prefix(11, &l).unwrap().iter().map(|b| char::from(b'0' + b)).collect();
    let mut ok = w == "10011100100";
    ok &= series_coding_mismatch(SeriesKind::E, 200, &l).unwrap().is_none();
    for k in 0..=4 {
        ok &= series_coding_mismatch(SeriesKind::Ek(k), 200, &l).unwrap().is_none();
    }
    let s = setup(&QUADRATIC, 0);
    let t = table(&s, -100, 100);
    let ds = discrete_spectrum(&s.kernel, &t, 4, 200, &l).unwrap();
    let mut worst = abs_diff(&ds.e.mid(), &ds.phi_omega.mid());
    for (a, b) in ds.e_k.iter().zip(&ds.phi_ak) {
        worst = worst.max(&abs_diff(&a.mid(), &b.mid()));
    }
    ok &= worst < 1e-15;
    (ok, format!("omega prefix {w}, exact identities to order 200, numeric {}", sci(&worst)))
}

fn isolated_point() -> Outcome {
    let s = setup(&QUADRATIC, 0);
    let t = table(&s, -260, 260);
    let fine = s.kernel.boosted(300).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    let mut orbits: Vec<XiElement> = Vec::new();
    // integer multiples of the trace orbit
    for c in 1..=3 {
        let params = vec![Float::with_val(64, c); 2];
        orbits.push(XiElement::from_parameters(&s.class, 0, &params).unwrap());
    }
    // decoded words supported left of 0
    for _ in 0..4 {
        let w = random_word(&mut rng, -20, -8, 6, 3);
        orbits.push(decode_omega0(&fine, &w).unwrap().h);
    }
    // generic orbits
    for _ in 0..4 {
        orbits.push(random_xi(&s.class, &mut rng));
    }
    let mut ok = true;
    let mut applicable = 0;
    for g in &orbits {
        let sample = orbit_sample(&s.spec, &s.class, g, 0, 200).unwrap();
        let r = isolated_point_check(&s.spec, &t, &sample).unwrap();
        if r.below_threshold {
            applicable += 1;
            ok &= r.interior_symbols_zero && r.limsup_contains_zero;
        }
    }
    ok &= applicable > 0;
    (ok, format!("{} orbits, {applicable} below 1/206, all with zero symbols and limsup 0", orbits.len()))
}

fn accumulation_at_half() -> Outcome {
    let s = setup(&QUADRATIC, 0);
    let mut values = Vec::new();
    for r in [10, 20, 40] {
        values.push(realize_near_half(&s.kernel, r, 40, 40).unwrap());
    }
    let mut ok = values.iter().all(|v| v.below_half && *v.value.lo() > 0.45 && *v.value.hi() < 0.5);
    for w in values.windows(2) {
        ok &= w[0].value.strictly_below(&w[1].value);
    }
    let gaps: Vec<String> = values
        .iter()
        .map(|v| sci(&Float::with_val(v.value.hi().prec(), 0.5 - v.value.hi())))
        .collect();
    (ok, format!("1/2 - value for R = 10, 20, 40: {}", gaps.join(", ")))
}

/// `H_r^(m)` by enumerating all exponent vectors.
fn brute_force_h(m: usize, xs: &[Rational]) -> Rational {
    fn go(m: usize, xs: &[Rational], acc: Rational, out: &mut Rational) {
        if xs.len() == 1 {
            let mut p = acc;
            for _ in 0..m {
                p *= &xs[0];
            }
            *out += p;
            return;
        }
        let mut p = acc;
        for i in 0..=m {
            go(m - i, &xs[1..], p.clone(), out);
            p *= &xs[0];
        }
    }
    let mut out = Rational::new();
    go(m, xs, Rational::from(1), &mut out);
    out
}

fn h_identity() -> Outcome {
    let points: Vec<Rational> = [(1, 2), (-3, 5), (2, 1), (7, 3)].iter().map(|&p| Rational::from(p)).collect();
    let mut ok = true;
    let mut count = 0;
    for r in 1..=4 {
        let xs = &points[..r];
        for m in 0..=8 {
            let brute = brute_force_h(m, xs);
            ok &= hom_sym_lagrange(m, xs) == brute && hom_sym(m, xs) == brute;
            count += 1;
        }
    }
    (ok, format!("{count} exact comparisons"))
}

fn interval_bound() -> Outcome {
    let s = setup(&CUBIC, 0);
    let t = table(&s, -200, 200);
    let three = Float::with_val(t.bits(), 3);
    let scaled = t.abs_sum.scale(&three);
    let ok = *scaled.hi() < 0.5;
    (ok, format!("3 * sum |rho_n| in [{:.6}, {:.6}], needs < 0.5", scaled.lo().to_f64(), scaled.hi().to_f64()))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("root reproduction", roots_reproduce),
        ("convolution identity", convolution_identity),
        ("windowed inverse", windowed_inverse),
        ("encode/reconstruct roundtrip", roundtrip),
        ("decode finite words", decode_words),
        ("expansive closed form", expansive_closed_form),
        ("scaled absolute sum below 1/2", condition_319),
        ("real-root hypothesis and discrete values", discrete_values),
        ("coding identities", coding_identities),
        ("isolated point", isolated_point),
        ("accumulation at 1/2", accumulation_at_half),
        ("homogeneous symmetric identity", h_identity),
        ("interval bound: 3 * sum |rho| < 1/2", interval_bound),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(o) => o,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} ({secs:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
