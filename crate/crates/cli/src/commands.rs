//! One function per subcommand. Each returns a JSON result, an optional CSV
//! rendering and the exit status.

use std::fs;

use anyhow::{anyhow, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde_json::{json, Value};

use mlspectrum::intertwine::{
    decode_omega0, encode, isolated_point_check, matrix_identity_window_defect, orbit_sample, reconstruct_epsilon,
    vandermonde_nonvanishing, OmegaSequence, Tail, XiElement,
};
use mlspectrum::numeric::{decimal, Precision, Verdict};
use mlspectrum::poly::{parse_polynomial, power_to_f, validate_assumptions, IntPolynomial, Limits, RecurrenceSpec};
use mlspectrum::rho::{
    build_rho_table, convolution_identity_defect, residue_at_infinity_integrality, rho_expansive, RhoKernel, RhoTable,
};
use mlspectrum::roots::{analyze, vieta_defect, RootClassification};
use mlspectrum::spectrum::coding::series_coding_mismatch;
use mlspectrum::spectrum::conditions::check_conditions;
use mlspectrum::spectrum::realize::realize_near_half;
use mlspectrum::spectrum::series::SeriesKind;
use mlspectrum::spectrum::subsum::{subsum_interval_check, Side};
use mlspectrum::spectrum::{applicable_theorems, discrete_spectrum};

use crate::{Command, Format, RunConfig, XiArgs, EXIT_ERROR, EXIT_HYPOTHESIS, EXIT_UNDECIDED};

struct Output {
    name: &'static str,
    result: Value,
    csv: Option<String>,
    /// Command-specific provenance entries.
    extra: Value,
    code: u8,
}

impl Output {
    fn new(name: &'static str, result: Value) -> Self {
        Output {
            name,
            result,
            csv: None,
            extra: json!({}),
            code: 0,
        }
    }
}

struct Setup {
    spec: RecurrenceSpec,
    class: RootClassification,
    kernel: RhoKernel,
}

fn poly_of(cfg: &RunConfig) -> Result<IntPolynomial> {
    let text = cfg.poly.as_deref().ok_or_else(|| anyhow!("--poly is required for this command"))?;
    Ok(parse_polynomial(text)?)
}

fn setup_for(p: &IntPolynomial, k: u32, digits: u32) -> Result<Setup> {
    let spec = power_to_f(p, k, &Limits::default())?;
    let class = analyze(p, Precision::digits(digits))?.with_k(k);
    let kernel = RhoKernel::new(&spec, &class)?;
    Ok(Setup { spec, class, kernel })
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    setup_for(&poly_of(cfg)?, cfg.k, cfg.precision)
}

fn window(cfg: &RunConfig, default: (i64, i64)) -> (i64, i64) {
    cfg.window.unwrap_or(default)
}

fn table(s: &Setup, lo: i64, hi: i64) -> Result<RhoTable> {
    Ok(build_rho_table(&s.kernel, lo.min(0), hi.max(0))?)
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<u8> {
    let out = match command {
        Command::Validate => validate(cfg)?,
        Command::Roots => roots(cfg)?,
        Command::Rho => rho(cfg)?,
        Command::Identities => identities(cfg)?,
        Command::Orbit(xi) => orbit(cfg, xi)?,
        Command::Encode(xi) => encode_cmd(cfg, xi)?,
        Command::Decode { word } => decode(cfg, word)?,
        Command::Spectrum => spectrum(cfg)?,
        Command::Conditions { subsum_a } => conditions(cfg, *subsum_a)?,
        Command::Realize { r, a, b } => realize(cfg, r, *a, *b)?,
        Command::Selftest => selftest(cfg)?,
    };
    emit(cfg, out)
}

fn emit(cfg: &RunConfig, out: Output) -> Result<u8> {
    let text = match cfg.format {
        Format::Json => {
            let poly = cfg.poly.as_deref().map(parse_polynomial).transpose()?.map(|p| p.to_string());
            let mut provenance = json!({
                "tool": "mlspectrum",
                "version": env!("CARGO_PKG_VERSION"),
                "poly": poly,
                "k": cfg.k,
                "precision_digits": cfg.precision,
                "working_bits": Precision::digits(cfg.precision).bits(),
                "window": cfg.window.map(|(lo, hi)| vec![lo, hi]),
                "order": cfg.order,
                "K": cfg.k_max,
                "seed": cfg.seed,
            });
            if let (Some(p), Some(extra)) = (provenance.as_object_mut(), out.extra.as_object()) {
                for (key, v) in extra {
                    p.insert(key.clone(), v.clone());
                }
            }
            let doc = json!({
                "command": out.name,
                "exit_code": out.code,
                "provenance": provenance,
                "result": out.result,
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv => out
            .csv
            .ok_or_else(|| anyhow!("csv output is not available for `{}`", out.name))?,
    };
    match &cfg.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(out.code)
}

fn validate(cfg: &RunConfig) -> Result<Output> {
    let p = poly_of(cfg)?;
    let report = validate_assumptions(&p, None);
    let mut result = serde_json::to_value(&report)?;
    result["usable"] = json!(report.usable());
    if report.usable() {
        // hyperbolicity needs the roots
        match analyze(&p, Precision::digits(cfg.precision)) {
            Ok(class) => {
                result["hyperbolic"] = json!(class.hyperbolic);
                result["expansive"] = json!(class.expansive);
            }
            Err(e) => result["root_error"] = json!(e.to_string()),
        }
    }
    let mut out = Output::new("validate", result);
    if !report.usable() {
        out.code = EXIT_HYPOTHESIS;
    }
    Ok(out)
}

fn roots(cfg: &RunConfig) -> Result<Output> {
    let p = poly_of(cfg)?;
    let class = analyze(&p, Precision::digits(cfg.precision))?.with_k(cfg.k);
    let mut result = serde_json::to_value(class.report())?;
    result["vieta_defect"] = json!(decimal(&vieta_defect(&p, &class.roots), 6));
    let mut csv = String::from("index,re,im,modulus,class,error_exponent\n");
    for (i, r) in class.roots.iter().enumerate() {
        let rep = r.report(cfg.precision);
        let class_name = serde_json::to_value(rep.class)?;
        csv.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            rep.re,
            rep.im,
            rep.modulus,
            class_name.as_str().unwrap_or_default(),
            rep.error_exponent.map(|e| e.to_string()).unwrap_or_default()
        ));
    }
    let mut out = Output::new("roots", result);
    out.csv = Some(csv);
    Ok(out)
}

fn rho(cfg: &RunConfig) -> Result<Output> {
    let s = setup(cfg)?;
    let (lo, hi) = window(cfg, (-100, 100));
    let t = table(&s, lo, hi)?;
    let digits = cfg.precision;
    let values: Vec<Value> = (t.n_min..=t.n_max)
        .map(|n| {
            json!({
                "n": n,
                "rho": decimal(t.get(n).expect("inside the table"), digits),
                "error": decimal(t.error(n).expect("inside the table"), 6),
            })
        })
        .collect();
    let mut out = Output::new("rho", json!({ "table": t.report(), "values": values }));
    out.csv = Some(t.to_csv());
    Ok(out)
}

fn identities(cfg: &RunConfig) -> Result<Output> {
    let s = setup(cfg)?;
    let (lo, hi) = window(cfg, (-100, 100));
    let big_d = s.spec.degree as i64;
    let span = hi - lo;
    let t = table(&s, lo.min(-span - big_d), (hi + big_d).max(span + big_d))?;
    let conv = convolution_identity_defect(&t, lo, hi)?;
    let (ab, ba) = matrix_identity_window_defect(&t, lo, hi)?;
    let (vdm, vdm_ok) = vandermonde_nonvanishing(&s.class, s.spec.k);
    let mut result = json!({
        "convolution_defect": decimal(&conv, 6),
        "window_inverse_defect_ab": decimal(&ab, 6),
        "window_inverse_defect_ba": decimal(&ba, 6),
        "vandermonde_abs_det": decimal(&vdm, 6),
        "vandermonde_nonzero": vdm_ok,
        "table": t.report(),
    });
    if s.class.expansive && s.spec.k == 0 {
        let mut worst = Float::new(t.bits());
        for n in lo.min(0)..=0 {
            let closed = rho_expansive(&s.spec.base, n, &s.class)?;
            let d = Float::with_val(t.bits(), t.rho(n)? - &closed).abs();
            worst = worst.max(&d);
        }
        result["expansive_closed_form_defect"] = json!(decimal(&worst, 6));
    }
    if s.spec.monic {
        let mut integral = true;
        for n in 0..=2 * big_d + 10 {
            integral &= residue_at_infinity_integrality(&s.kernel, n)?.1;
        }
        result["residue_at_infinity_integral"] = json!(integral);
    }
    Ok(Output::new("identities", result))
}

fn xi_element(cfg: &RunConfig, class: &RootClassification, xi: &XiArgs) -> Result<XiElement> {
    let bits = class.bits();
    let params: Vec<Float> = match &xi.params {
        Some(list) => list
            .iter()
            .map(|v| {
                Float::parse(v.trim())
                    .map(|p| Float::with_val(bits, p))
                    .map_err(|e| anyhow!("parameter `{v}`: {e}"))
            })
            .collect::<Result<_>>()?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            random_params(class, cfg.k, &mut rng)
        }
    };
    Ok(XiElement::from_parameters(class, cfg.k, &params)?)
}

fn random_params(class: &RootClassification, k: u32, rng: &mut ChaCha8Rng) -> Vec<Float> {
    let n = (k as usize + 1) * (class.r1 + 2 * class.r2);
    (0..n).map(|_| Float::with_val(64, rng.gen_range(-1.0..1.0))).collect()
}

fn orbit(cfg: &RunConfig, xi: &XiArgs) -> Result<Output> {
    let s = setup(cfg)?;
    let (lo, hi) = window(cfg, (0, 100));
    let g = xi_element(cfg, &s.class, xi)?;
    let sample = orbit_sample(&s.spec, &s.class, &g, lo, hi)?;
    let digits = sample.precision.get();
    let big_d = s.spec.degree as i64;
    let reach = hi - lo + big_d + 20;
    let t = table(&s, -reach, reach)?;
    let isolated = isolated_point_check(&s.spec, &t, &sample)?;
    let result = json!({
        "g": g.report(cfg.precision),
        "n_lo": sample.n_lo,
        "n_hi": sample.n_hi,
        "x": sample.x.iter().map(|v| decimal(v, digits)).collect::<Vec<_>>(),
        "eps": sample.eps.iter().map(|v| decimal(v, digits)).collect::<Vec<_>>(),
        "u": sample.u.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "s": sample.s.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "max_norm": decimal(&sample.max_norm(lo, hi), digits),
        "rounding_margin": decimal(&sample.rounding_margin, 6),
        "exact_half": sample.exact_half,
        "recurrence_defect": decimal(&sample.recurrence_defect, 6),
        "coding_defect": decimal(&sample.coding_defect, 6),
        "isolated_point": isolated,
    });
    let mut out = Output::new("orbit", result);
    out.csv = Some(sample.to_csv());
    out.extra = json!({ "orbit_precision_digits": digits });
    Ok(out)
}

fn encode_cmd(cfg: &RunConfig, xi: &XiArgs) -> Result<Output> {
    let s = setup(cfg)?;
    let (lo, hi) = window(cfg, (0, 100));
    let g = xi_element(cfg, &s.class, xi)?;
    let enc = encode(&s.spec, &s.class, &g, hi)?;
    let start = enc.sequence.support_start;
    let reach = hi - start + s.spec.degree as i64 + 10;
    let t = table(&s, -reach, reach)?;
    let bits = t.bits();
    let mut worst = Float::new(bits);
    let mut worst_bound = Float::new(bits);
    let mut consistent = true;
    for m in lo.max(start)..=hi {
        let (v, e) = reconstruct_epsilon(&t, &enc.sequence, m, None)?;
        let eps = enc.sample.eps_at(m).expect("inside the sample");
        let d = Float::with_val(bits, &v - eps).abs();
        let allowed = Float::with_val(bits, &e + &enc.sample.x_error[(m - enc.sample.n_lo) as usize]);
        consistent &= d <= allowed;
        worst = worst.max(&d);
        worst_bound = worst_bound.max(&e);
    }
    let result = json!({
        "g": g.report(cfg.precision),
        "sequence": enc.sequence.to_string(),
        "support_start": start,
        "zero_below": enc.zero_below,
        "symbols": enc.sequence.head.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "reconstruction": {
            "from": lo.max(start),
            "to": hi,
            "max_difference": decimal(&worst, 6),
            "max_error_bound": decimal(&worst_bound, 6),
            "consistent": consistent,
        },
    });
    let mut out = Output::new("encode", result);
    out.csv = Some(enc.sample.to_csv());
    Ok(out)
}

fn decode(cfg: &RunConfig, word: &str) -> Result<Output> {
    let s = setup(cfg)?;
    let t: OmegaSequence = word.parse()?;
    let d = decode_omega0(&s.kernel, &t)?;
    let result = json!({
        "word": t.to_string(),
        "h": d.h.report(cfg.precision),
        "defect": decimal(&d.defect, 6),
        "verification_window": [d.window.0, d.window.1],
    });
    let mut out = Output::new("decode", result);
    out.extra = json!({ "decode_precision_digits": d.precision.get() });
    Ok(out)
}

fn spectrum(cfg: &RunConfig) -> Result<Output> {
    let s = setup(cfg)?;
    let (lo, hi) = window(cfg, (-100, 100));
    let t = table(&s, lo, hi)?;
    let ds = discrete_spectrum(&s.kernel, &t, cfg.k_max, cfg.order, &Limits::default())?;
    let mut out = Output::new("spectrum", serde_json::to_value(ds.report(cfg.precision))?);
    out.csv = Some(ds.to_csv(cfg.precision));
    out.extra = json!({ "series_order_used": ds.order, "table": t.report() });
    if !ds.ordered {
        out.code = EXIT_UNDECIDED;
    }
    Ok(out)
}

fn conditions(cfg: &RunConfig, subsum_a: Option<u32>) -> Result<Output> {
    let s = setup(cfg)?;
    let (lo, hi) = window(cfg, (-200, 200));
    let t = table(&s, lo, hi)?;
    let c = check_conditions(&s.spec, &s.class, &t)?;
    let all = [&c.assum_disc1, &c.cor, &c.eqn319, &c.newbeta, &c.suff];
    let mut result = serde_json::to_value(c.report(cfg.precision))?;
    result["flags"] = json!({
        "assum_disc1": c.assum_disc1.verdict.holds(),
        "cor": c.cor.verdict.holds(),
        "eqn319": c.eqn319.verdict.holds(),
        "newbeta": c.newbeta.verdict.holds(),
        "suff": c.suff.verdict.holds(),
    });
    result["applicable_theorems"] = json!(applicable_theorems(&s.spec, &s.class, &c));
    if let Some(a) = subsum_a {
        let mut sides = serde_json::Map::new();
        for (name, side) in [("left", Side::Left), ("right", Side::Right)] {
            let v = match subsum_interval_check(&s.kernel, &t, a, side, 0) {
                Ok(r) => serde_json::to_value(r.report(cfg.precision))?,
                Err(e) => json!({ "error": e.to_string() }),
            };
            sides.insert(name.to_string(), v);
        }
        result["subsum"] = Value::Object(sides);
    }
    let mut out = Output::new("conditions", result);
    out.extra = json!({ "table": t.report() });
    if all.iter().any(|c| c.verdict == Verdict::Undecided) {
        out.code = EXIT_UNDECIDED;
    }
    Ok(out)
}

fn realize(cfg: &RunConfig, rs: &[u32], a: u32, b: u32) -> Result<Output> {
    let s = setup(cfg)?;
    let mut reports = Vec::new();
    let mut csv = String::from("R,value_lo,value_hi,gap_to_half\n");
    let mut values = Vec::new();
    for &r in rs {
        let real = realize_near_half(&s.kernel, r, a, b)?;
        let rep = real.report(cfg.precision);
        csv.push_str(&format!("{r},{},{},{}\n", rep.value[0], rep.value[1], rep.gap_to_half));
        reports.push(rep);
        values.push(real.value);
    }
    let increasing = values.windows(2).all(|w| w[0].strictly_below(&w[1]));
    let mut out = Output::new("realize", json!({ "realizations": reports, "strictly_increasing": increasing }));
    out.csv = Some(csv);
    Ok(out)
}

struct Check {
    name: String,
    value: String,
    threshold: String,
    pass: bool,
}

impl Check {
    fn below(name: String, value: &Float, threshold: f64) -> Check {
        Check {
            name,
            value: decimal(value, 6),
            threshold: format!("{threshold:e}"),
            pass: *value < threshold,
        }
    }

    fn flag(name: String, pass: bool, value: String) -> Check {
        Check {
            name,
            value,
            threshold: "true".into(),
            pass,
        }
    }
}

fn selftest(cfg: &RunConfig) -> Result<Output> {
    let digits = cfg.precision;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    for text in ["X^2-20X+82", "X^3+2X^2+6X-2"] {
        let p = parse_polynomial(text)?;
        let ks: &[u32] = if p.degree() == 3 { &[0, 1] } else { &[0] };
        for &k in ks {
            let s = setup_for(&p, k, digits)?;
            let t = table(&s, -120, 120)?;
            let d = convolution_identity_defect(&t, -50, 50)?;
            checks.push(Check::below(format!("{p} k={k}: convolution identity"), &d, 1e-45));
        }
        let s = setup_for(&p, 0, digits)?;
        let t = table(&s, -120, 120)?;
        let (ab, ba) = matrix_identity_window_defect(&t, -50, 50)?;
        checks.push(Check::below(format!("{p}: windowed inverse"), &Float::with_val(t.bits(), ab.max(&ba)), 1e-45));

        let mut worst = Float::new(t.bits());
        let mut consistent = true;
        for _ in 0..5 {
            let params = random_params(&s.class, 0, &mut rng);
            let g = XiElement::from_parameters(&s.class, 0, &params)?;
            let enc = encode(&s.spec, &s.class, &g, 120)?;
            for m in 0..=40 {
                let (v, e) = reconstruct_epsilon(&t, &enc.sequence, m, None)?;
                let diff = Float::with_val(t.bits(), &v - enc.sample.eps_at(m).expect("inside the sample")).abs();
                consistent &= diff <= Float::with_val(t.bits(), &e + &enc.sample.x_error[(m - enc.sample.n_lo) as usize]);
                worst = worst.max(&e);
            }
        }
        checks.push(Check::flag(format!("{p}: encode/reconstruct roundtrip"), consistent && worst < 1e-25, decimal(&worst, 6)));

        let mut worst = Float::new(t.bits());
        for _ in 0..3 {
            let start = rng.gen_range(-5..=5i64);
            let head: Vec<i64> = (0..5).map(|i| if i == 0 { 1 } else { rng.gen_range(-2..=2) }).collect();
            let w = OmegaSequence::from_i64(start, &head, Tail::Zero);
            let dec = decode_omega0(&s.kernel, &w)?;
            worst = worst.max(&dec.defect);
        }
        checks.push(Check::below(format!("{p}: decode finite words"), &worst, 1e-20));

        if s.class.expansive {
            let mut worst = Float::new(t.bits());
            for n in -100..=0 {
                let closed = rho_expansive(&p, n, &s.class)?;
                worst = worst.max(&Float::with_val(t.bits(), t.rho(n)? - &closed).abs());
            }
            checks.push(Check::below(format!("{p}: expansive closed form"), &worst, 1e-45));
            let ds = discrete_spectrum(&s.kernel, &t, 6, 200, &Limits::default())?;
            checks.push(Check::flag(format!("{p}: e_0 < ... < e_6 < e < 1/2"), ds.ordered, ds.e.to_strings(20)[1].clone()));
        }
        let c = check_conditions(&s.spec, &s.class, &t)?;
        checks.push(Check::flag(format!("{p}: eqn319"), c.eqn319.verdict.holds(), c.eqn319.verdict.to_string()));
    }
    let limits = Limits::default();
    let mut coding_ok = series_coding_mismatch(SeriesKind::E, 200, &limits)?.is_none();
    for k in 0..=4 {
        coding_ok &= series_coding_mismatch(SeriesKind::Ek(k), 200, &limits)?.is_none();
    }
    checks.push(Check::flag("series coefficients match their codings to order 200".into(), coding_ok, coding_ok.to_string()));

    let failed = checks.iter().filter(|c| !c.pass).count();
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "value": c.value, "threshold": c.threshold, "pass": c.pass }))
        .collect();
    let mut csv = String::from("name,value,threshold,pass\n");
    for c in &checks {
        csv.push_str(&format!("\"{}\",{},{},{}\n", c.name, c.value, c.threshold, c.pass));
    }
    let mut out = Output::new("selftest", json!({ "checks": rows, "failed": failed }));
    out.csv = Some(csv);
    if failed > 0 {
        out.code = EXIT_ERROR;
    }
    Ok(out)
}
