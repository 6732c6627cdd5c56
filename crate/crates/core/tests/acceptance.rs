//! Acceptance criteria A1 to A8. Prints one PASS/FAIL line per criterion
//! and exits non-zero when any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use bnf_core::bnf::{normal_form, torus_average, BnfOptions};
use bnf_core::model::{check_nonresonance, random_spec, NonResonance, PotentialSpec, DEFAULT_RESONANCE_EPS};
use bnf_core::oracle::{oracle_resonances, OracleConfig};
use bnf_core::recovery::{averaging_coefficient, recover_taylor, RecoveryOptions};
use bnf_core::resonance::{generate_resonances, invert_from_resonances, InvertOptions};
use bnf_core::{Basis, Coeff, Exact, MultiIndex, PhasePolynomial, Real};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn barrier_top() -> Outcome {
    let h = 0.01;
    let spec = PotentialSpec::quadratic(1, 1, Real::int(1), vec![Real::int(1)]).map_err(|e| e.to_string())?;
    let (nf, _) = normal_form::<Exact>(&spec, 3, &BnfOptions::default()).map_err(|e| e.to_string())?;
    let gen = generate_resonances(&nf, h, 8).map_err(|e| e.to_string())?;
    let gen_err = gen
        .labeled()
        .map(|(k, v)| (v - Complex64::new(1.0, -((2 * k[0] + 1) as f64) * h)).norm())
        .fold(0.0, f64::max);
    let mut cfg = OracleConfig::new(80, h);
    cfg.stability_tol = 1e-8;
    let oracle = oracle_resonances(&spec, &cfg).map_err(|e| e.to_string())?;
    if oracle.len() < 9 {
        return Err(format!("only {} stable oracle values", oracle.len()));
    }
    let oracle_err = gen.values.iter().zip(&oracle.values).map(|(g, o)| (g - o).norm()).fold(0.0, f64::max);
    check(
        gen_err < 1e-14 && oracle_err < 1e-8,
        format!("generator vs formula {gen_err:.1e}, oracle vs generator {oracle_err:.1e} (k <= 8)"),
    )
}

fn order_of_accuracy() -> Outcome {
    let spec = PotentialSpec::new(1, 0, Real::zero(), vec![Real::int(1)], [(vec![2], Real::ratio(1, 10))])
        .map_err(|e| e.to_string())?;
    let (nf, _) = normal_form::<Exact>(&spec, 4, &BnfOptions::default()).map_err(|e| e.to_string())?;
    let mut errs = Vec::new();
    for h in [0.02, 0.01] {
        let gen = generate_resonances(&nf, h, 3).map_err(|e| e.to_string())?;
        let mut cfg = OracleConfig::new(80, h);
        cfg.stability_tol = 1e-10;
        let oracle = oracle_resonances(&spec, &cfg).map_err(|e| e.to_string())?;
        let err = gen.values.iter().zip(&oracle.values).map(|(g, o)| (g - o).norm()).fold(0.0, f64::max);
        errs.push(err);
    }
    let ratio = errs[0] / errs[1];
    check(
        (3.0..=5.0).contains(&ratio),
        format!("errors {:.3e} (h=0.02), {:.3e} (h=0.01), ratio {ratio:.3}", errs[0], errs[1]),
    )
}

fn roundtrip_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let shapes = [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2)];
    let mut failures = Vec::new();
    for i in 0..50 {
        let (n, d) = shapes[i % shapes.len()];
        let spec = random_spec(&mut rng, n, d, 4).map_err(|e| e.to_string())?;
        let result = normal_form::<Exact>(&spec, 4, &BnfOptions::default())
            .and_then(|(nf, _)| recover_taylor(&nf, 4, &RecoveryOptions::default()));
        match result {
            Ok(back) if back == spec => {}
            Ok(_) => failures.push(format!("spec {i}: coefficients differ")),
            Err(e) => failures.push(format!("spec {i}: {e}")),
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "50 random specs (n <= 2, all d, |alpha| <= 4) recovered bit-exactly".into()
        } else {
            failures.join("; ")
        },
    )
}

fn averaging_map() -> Outcome {
    const M: usize = 24;
    let mut worst: f64 = 0.0;
    let mut engine_ok = true;
    let mut count = 0;
    for n in 1..=3usize {
        for deg in 0..=5u32 {
            for alpha in MultiIndex::all_of_degree(n, deg) {
                // trapezoid rule on the torus, exact for these trigonometric degrees
                let mut total = 0.0;
                let mut idx = vec![0usize; n];
                loop {
                    let term: f64 = idx
                        .iter()
                        .zip(alpha.exps())
                        .map(|(&t, &a)| (2.0 * std::f64::consts::PI * t as f64 / M as f64).cos().powi(2 * a as i32))
                        .product();
                    total += term;
                    let mut j = 0;
                    while j < n {
                        idx[j] += 1;
                        if idx[j] < M {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == n {
                        break;
                    }
                }
                let quad = total / (M as f64).powi(n as i32);
                let exact = averaging_coefficient(alpha.exps()).to_f64().unwrap_or(f64::NAN);
                worst = worst.max((quad - exact).abs());
                // the engine's torus average of x^{2α} carries the same coefficient
                let mut exps: Vec<u32> = alpha.exps().iter().map(|a| 2 * a).collect();
                exps.resize(2 * n, 0);
                let x = PhasePolynomial::monomial(Basis::Real, n, exps, <Exact as Coeff>::one());
                let (avg, _) = torus_average(&x.to_complex().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
                engine_ok &= avg.coeff(alpha.exps()) == Exact::from_rational(&averaging_coefficient(alpha.exps()));
                count += 1;
            }
        }
    }
    check(
        worst < 1e-10 && engine_ok,
        format!("{count} multi-indices, max quadrature deviation {worst:.1e}, engine average agrees: {engine_ok}"),
    )
}

fn transform_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n_max = 3;
    let h = common::random_float(&mut rng, 2, &[2, 4], 12);
    let g = common::random_float(&mut rng, 2, &[4], 8);
    use rand::Rng;
    let dirs: Vec<Vec<f64>> = (0..6).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let d1 = common::lie_flow_discrepancy(&h, &g, n_max, &dirs, 0.2);
    let d2 = common::lie_flow_discrepancy(&h, &g, n_max, &dirs, 0.1);
    let need = 2f64.powi(2 * n_max as i32 + 1);
    check(
        d1 / d2 >= need,
        format!("N_max = {n_max}: discrepancy {d1:.2e} at r=0.2, {d2:.2e} at r=0.1, ratio {:.1} (need {need})", d1 / d2),
    )
}

fn end_to_end() -> Outcome {
    let spec = PotentialSpec::new(1, 1, Real::int(1), vec![Real::int(1)], [(vec![2], Real::ratio(1, 5))])
        .map_err(|e| e.to_string())?;
    let mut lists = Vec::new();
    for h in [0.02, 0.01, 0.005] {
        let mut cfg = OracleConfig::new(120, h);
        cfg.increment = 20;
        cfg.stability_tol = 1e-8;
        lists.push(oracle_resonances(&spec, &cfg).map_err(|e| e.to_string())?);
    }
    let mut opts = InvertOptions::default();
    opts.label.k_max = Some(10);
    opts.fit_degree = Some(4);
    let out = invert_from_resonances(&lists, 2, &opts).map_err(|e| e.to_string())?;
    let e0_err = (out.spec.e0.to_f64() - 1.0).abs();
    let u_err = (out.spec.u[0].to_f64() - 1.0).abs();
    let c = out.spec.coeff(&[2]).to_f64();
    let c_rel = (c - 0.2).abs() / 0.2;
    check(
        e0_err < 1e-4 && u_err < 1e-3 && c_rel < 0.05,
        format!(
            "E0 error {e0_err:.1e}, u error {u_err:.1e}, quartic {c:.6} ({:.3}% off), {} data points",
            100.0 * c_rel,
            out.report.data_points
        ),
    )
}

fn nonresonance_gate() -> Outcome {
    let bad = check_nonresonance(&[Real::int(1), Real::int(2)], 0, 6, DEFAULT_RESONANCE_EPS);
    let good = check_nonresonance(&[Real::int(1), Real::int(1)], 1, 6, DEFAULT_RESONANCE_EPS);
    let spec = PotentialSpec::new(
        2,
        1,
        Real::zero(),
        vec![Real::int(1), Real::int(1)],
        [(vec![2, 0], Real::int(1)), (vec![1, 1], Real::int(-1)), (vec![0, 2], Real::ratio(1, 2))],
    )
    .map_err(|e| e.to_string())?;
    let runs = normal_form::<Exact>(&spec, 6, &BnfOptions::default()).is_ok();
    check(
        bad == NonResonance::Fail(vec![2, -1]) && good == NonResonance::Pass && runs,
        format!("u=(1,2), d=0: {bad:?}; u=(1,1), d=1: {good:?}, order-6 normal form computed: {runs}"),
    )
}

fn structural_invariants() -> Outcome {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut notes = Vec::new();
    for _ in 0..20 {
        let basis = if rng.gen_bool(0.5) { Basis::Real } else { Basis::Complex };
        let f = common::random_exact(&mut rng, basis, 2, &[1, 2, 3], 4);
        let g = common::random_exact(&mut rng, basis, 2, &[1, 2, 3], 4);
        let k = common::random_exact(&mut rng, basis, 2, &[1, 2], 3);
        let br = |a: &PhasePolynomial<Exact>, b: &PhasePolynomial<Exact>| a.poisson_bracket(b).unwrap();
        let jac = br(&f, &br(&g, &k)).add(&br(&g, &br(&k, &f))).unwrap().add(&br(&k, &br(&f, &g))).unwrap();
        let anti = br(&f, &g).add(&br(&g, &f)).unwrap();
        let leib = br(&f, &g.mul(&k).unwrap())
            .sub(&br(&f, &g).mul(&k).unwrap())
            .unwrap()
            .sub(&g.mul(&br(&f, &k)).unwrap())
            .unwrap();
        if !(jac.is_zero() && anti.is_zero() && leib.is_zero()) {
            notes.push("bracket axiom violated".to_string());
            break;
        }
    }
    for (n, d) in [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2)] {
        let spec = random_spec(&mut rng, n, d, 3).map_err(|e| e.to_string())?;
        let (nf, chain) = normal_form::<Exact>(&spec, 3, &BnfOptions::default()).map_err(|e| e.to_string())?;
        let h1 = nf.linear_part().to_phase();
        for (i, h) in nf.actions.iter().enumerate() {
            if !h1.poisson_bracket(&h.to_phase()).unwrap().is_zero() {
                notes.push(format!("{{H1, h_{}}} != 0 for n={n}, d={d}", i + 2));
            }
        }
        for g in &chain.generators {
            if g.check_even("generator").is_err() {
                notes.push(format!("odd generator for n={n}, d={d}"));
            }
        }
        let quad = PotentialSpec::quadratic(n, d, spec.e0.clone(), spec.u.clone()).unwrap();
        let (qnf, _) = normal_form::<Exact>(&quad, 2, &BnfOptions::default()).unwrap();
        let list = generate_resonances(&qnf, 0.01, 4).unwrap();
        let ok = if d >= 1 {
            list.values.iter().all(|v| v.im < 0.0)
        } else {
            list.values.iter().all(|v| v.im == 0.0)
        };
        if !ok {
            notes.push(format!("half-plane property fails for n={n}, d={d}"));
        }
    }
    check(
        notes.is_empty(),
        if notes.is_empty() {
            "Jacobi/Leibniz/antisymmetry, {H1,h_N}=0, even generators, lower half plane: all exact".into()
        } else {
            notes.join("; ")
        },
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 8] = [
        ("A1", "barrier-top exactness", barrier_top),
        ("A2", "order of accuracy", order_of_accuracy),
        ("A3", "roundtrip recovery", roundtrip_recovery),
        ("A4", "averaging map", averaging_map),
        ("A5", "canonical transform consistency", transform_consistency),
        ("A6", "end-to-end inversion", end_to_end),
        ("A7", "non-resonance gate", nonresonance_gate),
        ("A8", "structural invariants", structural_invariants),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
