use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bnf_core::bnf::{normal_form, BnfOptions, NormalForm, NormalFormJson};
use bnf_core::model::{random_spec as make_random_spec, PotentialSpec, PotentialSpecJson};
use bnf_core::oracle::{oracle_resonances, OracleConfig};
use bnf_core::recovery::{recover_taylor, RecoveryOptions};
use bnf_core::resonance::{
    generate_resonances, implied_delta, invert_from_resonances, InvertOptions, LabelOptions, ResonanceList,
    ResonanceListJson, StructureOptions,
};
use bnf_core::{Coeff, Exact, Float, MultiIndex, Real};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::io::{emit, read_json, read_value, with_manifest, CliError, CliResult, Manifest};
use crate::{BnfArgs, InvertArgs, Mode, OracleArgs, RandomSpecArgs, ResonancesArgs, RoundtripArgs};

const MAX_TERMS_VAR: &str = "BNF_MAX_TERMS";

fn bnf_options(eps: f64) -> CliResult<BnfOptions> {
    let max_terms = match std::env::var(MAX_TERMS_VAR) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{MAX_TERMS_VAR} must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    Ok(BnfOptions { eps, max_terms })
}

fn load_spec(path: &Path) -> CliResult<PotentialSpec> {
    let json: PotentialSpecJson = read_json(path)?;
    Ok(PotentialSpec::from_json(&json)?)
}

/// A bare normal form, or the `normal_form` entry of a `bnf` output.
fn load_normal_form(path: &Path) -> CliResult<NormalForm<Float>> {
    let mut value = read_value(path)?;
    if let Some(inner) = value.get_mut("normal_form") {
        value = inner.take();
    }
    let json: NormalFormJson = serde_json::from_value(value).map_err(|e| CliError::Json(path.to_path_buf(), e))?;
    Ok(NormalForm::from_json(&json)?)
}

/// A single list, or every entry of a `lists` bundle.
fn load_lists(path: &Path) -> CliResult<Vec<ResonanceList>> {
    let value = read_value(path)?;
    let parse = |v: Value| -> CliResult<ResonanceList> {
        let json: ResonanceListJson = serde_json::from_value(v).map_err(|e| CliError::Json(path.to_path_buf(), e))?;
        Ok(ResonanceList::from_json(&json)?)
    };
    match value.get("lists") {
        Some(Value::Array(items)) => items.iter().cloned().map(parse).collect(),
        _ => Ok(vec![parse(value)?]),
    }
}

fn outputs(paths: &[Option<&PathBuf>]) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.map_or_else(|| "-".to_string(), |p| p.display().to_string()))
        .collect()
}

pub fn bnf(a: &BnfArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    let opts = bnf_options(a.eps)?;
    let body = match a.mode {
        Mode::Exact => bnf_body::<Exact>(&spec, a.order, &opts)?,
        Mode::Float => bnf_body::<Float>(&spec, a.order, &opts)?,
    };
    let mut m = Manifest::new(
        "bnf",
        std::slice::from_ref(&a.spec),
        json!({"order": a.order, "mode": mode_name(a.mode), "eps": a.eps, "max_terms": opts.max_terms}),
    );
    m.outputs = outputs(&[a.out.as_ref()]);
    emit(a.out.as_deref(), &with_manifest(&m, body))
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => Exact::MODE,
        Mode::Float => Float::MODE,
    }
}

fn bnf_body<C: Coeff>(spec: &PotentialSpec, order: u32, opts: &BnfOptions) -> CliResult<Value> {
    let (nf, chain) = normal_form::<C>(spec, order, opts)?;
    let unscaled = nf.unscale(1e-9)?;
    Ok(json!({
        "mode": C::MODE,
        "normal_form": nf.to_json(),
        "unscaled": unscaled.to_json(),
        "chain": chain.to_json(),
    }))
}

fn h_tag(h: f64) -> String {
    format!("resonances_h{h}.json")
}

pub fn resonances(a: &ResonancesArgs) -> CliResult<()> {
    if a.h.is_empty() {
        return Err(CliError::Usage("at least one --h value is required".into()));
    }
    let nf = load_normal_form(&a.normal_form)?;
    let lists = a
        .h
        .iter()
        .map(|&h| generate_resonances(&nf, h, a.kmax))
        .collect::<bnf_core::Result<Vec<_>>>()?;
    let params = |h: Value| {
        json!({"h": h, "kmax": a.kmax, "implied_delta": match &h {
            Value::Number(x) => json!(implied_delta(x.as_f64().unwrap_or(f64::NAN), a.kmax)),
            _ => Value::Null,
        }})
    };
    let inputs = std::slice::from_ref(&a.normal_form);
    match &a.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
            for list in &lists {
                let path = dir.join(h_tag(list.h));
                let mut m = Manifest::new("resonances", inputs, params(json!(list.h)));
                m.outputs = vec![path.display().to_string()];
                emit(Some(&path), &with_manifest(&m, list.to_json()))?;
            }
            Ok(())
        }
        None => {
            let mut m = Manifest::new("resonances", inputs, params(json!(a.h)));
            m.outputs = outputs(&[None]);
            let body = json!({"lists": lists.iter().map(ResonanceList::to_json).collect::<Vec<_>>()});
            emit(None, &with_manifest(&m, body))
        }
    }
}

pub fn invert(a: &InvertArgs) -> CliResult<()> {
    let mut lists = Vec::new();
    for path in &a.inputs {
        lists.extend(load_lists(path)?);
    }
    let opts = InvertOptions {
        structure: StructureOptions {
            n: a.n,
            ..Default::default()
        },
        label: LabelOptions {
            tol_factor: a.tol_factor,
            k_max: a.kmax,
        },
        fit_degree: a.fit_degree,
        imag_tol: a.imag_tol,
        ..Default::default()
    };
    let result = invert_from_resonances(&lists, a.order, &opts)?;
    let params = json!({
        "order": a.order, "fit_degree": a.fit_degree, "kmax": a.kmax,
        "tol_factor": a.tol_factor, "n": a.n, "imag_tol": a.imag_tol,
    });
    let mut m = Manifest::new("invert", &a.inputs, params);
    m.outputs = outputs(&[a.out.as_ref(), a.report.as_ref()]);
    emit(a.out.as_deref(), &with_manifest(&m, result.spec.to_json()))?;
    if let Some(path) = &a.report {
        let s = &result.structure;
        let body = json!({
            "structure": {"n": s.n, "d": s.d, "E0": s.e0, "u": s.u},
            "fit": result.report,
            "normal_form": result.normal_form.to_json(),
            "unmatched": result.unmatched,
        });
        emit(Some(path), &with_manifest(&m, body))?;
    }
    Ok(())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleConfigJson {
    basis: Option<usize>,
    h: Option<f64>,
    re_window: Option<f64>,
    im_window: Option<f64>,
    stability_tol: Option<f64>,
    increment: Option<usize>,
    max_dim: Option<usize>,
}

pub fn oracle(a: &OracleArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    let file: OracleConfigJson = match &a.config {
        Some(p) => read_json(p)?,
        None => OracleConfigJson::default(),
    };
    let h = a
        .h
        .or(file.h)
        .ok_or_else(|| CliError::Usage("--h is required (flag or config)".into()))?;
    let mut cfg = OracleConfig::new(a.basis.or(file.basis).unwrap_or(80), h);
    if let Some(v) = a.increment.or(file.increment) {
        cfg.increment = v;
    }
    if let Some(v) = a.re_window.or(file.re_window) {
        cfg.re_window = v;
    }
    if let Some(v) = a.im_window.or(file.im_window) {
        cfg.im_window = v;
    }
    if let Some(v) = a.stability_tol.or(file.stability_tol) {
        cfg.stability_tol = v;
    }
    if let Some(v) = a.max_dim.or(file.max_dim) {
        cfg.max_dim = v;
    }
    let list = oracle_resonances(&spec, &cfg)?;
    let mut inputs = vec![a.spec.clone()];
    inputs.extend(a.config.clone());
    let params = json!({
        "basis": cfg.basis, "h": cfg.h, "increment": cfg.increment, "re_window": cfg.re_window,
        "im_window": cfg.im_window, "stability_tol": cfg.stability_tol, "max_dim": cfg.max_dim,
    });
    let mut m = Manifest::new("oracle", &inputs, params);
    m.outputs = outputs(&[a.out.as_ref()]);
    emit(a.out.as_deref(), &with_manifest(&m, list.to_json()))
}

pub fn roundtrip(a: &RoundtripArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec)?;
    let opts = bnf_options(1e-9)?;
    let body = match a.mode {
        Mode::Exact => roundtrip_body::<Exact>(&spec, a.order, &opts)?,
        Mode::Float => roundtrip_body::<Float>(&spec, a.order, &opts)?,
    };
    let mut m = Manifest::new(
        "roundtrip",
        std::slice::from_ref(&a.spec),
        json!({"order": a.order, "mode": mode_name(a.mode)}),
    );
    m.outputs = outputs(&[a.out.as_ref()]);
    emit(a.out.as_deref(), &with_manifest(&m, body))
}

fn roundtrip_body<C: Coeff>(spec: &PotentialSpec, order: u32, opts: &BnfOptions) -> CliResult<Value> {
    let (nf, _) = normal_form::<C>(spec, order, opts)?;
    let back = recover_taylor(&nf, order, &RecoveryOptions::default())?;
    let want = spec.truncated(order);
    let alphas: BTreeSet<&MultiIndex> = want.coeffs.keys().chain(back.coeffs.keys()).collect();
    let mut rows = Vec::new();
    let mut max_diff = Real::zero();
    for alpha in alphas {
        let (a, b) = (want.coeff(alpha.exps()), back.coeff(alpha.exps()));
        let diff = if C::EXACT {
            Real::Exact(b.to_rational()).abs_diff(&Real::Exact(a.to_rational()))
        } else {
            Real::Float(b.to_f64()).abs_diff(&a)
        };
        if diff.to_f64() > max_diff.to_f64() || (!diff.is_zero() && max_diff.is_zero()) {
            max_diff = diff.clone();
        }
        rows.push(json!({
            "alpha": alpha.exps(),
            "original": a.to_json(),
            "recovered": b.to_json(),
            "diff": diff.to_json(),
        }));
    }
    Ok(json!({
        "mode": C::MODE,
        "order": order,
        "max_diff": max_diff.to_json(),
        "identical": max_diff.is_zero(),
        "coefficients": rows,
    }))
}

pub fn random_spec(a: &RandomSpecArgs) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let spec = make_random_spec(&mut rng, a.n, a.d, a.max_degree)?;
    let mut m = Manifest::new(
        "random-spec",
        &[],
        json!({"seed": a.seed, "n": a.n, "d": a.d, "max_degree": a.max_degree}),
    );
    m.outputs = outputs(&[a.out.as_ref()]);
    emit(a.out.as_deref(), &with_manifest(&m, spec.to_json()))
}
