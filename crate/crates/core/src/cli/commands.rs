//! One function per subcommand, each turning resolved parameters into an [`Output`].

use serde_json::{json, Value};

use super::output::{num, opt_num, Output};
use super::params::*;
use crate::enumeration::{
    check_moment_bounds, check_block_submult, check_sign_weighted, enumerate_moments, ratio_string, Status, Verdict,
};
use crate::error::{Error, Result};
use crate::model::WalkModel;
use crate::occupation::{lambda_from, local_time_scalars};
use crate::poisson::{paired_mean_check, poissonized_replicas, Weights};
use crate::rates::{
    default_grid, geometric_schedule, lil_trace, model_constants, tail_curve, weak_convergence_study,
    GaussianConstants, RateConstants, TailSpec, TailStatistic, RHO1_BAR_D1_P1,
};
use crate::rng::SeedStreams;
use crate::simulate::{replica_measures, replica_path};
use crate::spectral::{mean_local_time, second_moment_local_time, QuadratureSpec};
use crate::variational::{
    indicator_test_f, indicator_test_fbar, spatial_identity_check, rho1, rho2, rho_of_f, AscentOptions, FrequencyGrid,
    KernelOptions, Psi,
};

/// Unwraps a field that `merged` always fills.
fn get<T: Clone>(x: &Option<T>) -> T {
    x.clone().expect("parameter resolved with a default")
}

fn build_model(name: &Option<String>, d: &Option<usize>) -> Result<WalkModel> {
    WalkModel::from_name(&get(name), get(d))
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable result")
}

pub fn simulate(a: &SimulateParams, seed: u64) -> Result<Output> {
    let model = build_model(&a.model, &a.d)?;
    let (p, n, replicas) = (get(&a.p), get(&a.n), get(&a.replicas));
    crate::simulate::check_p(p)?;
    model.check_range(n, p)?;
    let streams = SeedStreams::new(seed);
    let d = model.dim();
    let mut columns = vec!["replica", "walk", "k"];
    columns.extend(["x1", "x2", "x3"].iter().take(d));
    let mut rows = Vec::new();
    for r in 0..replicas {
        for j in 0..p {
            for (k, &key) in replica_path(&model, n, &streams, r, j).iter().enumerate() {
                let mut row = vec![r.to_string(), j.to_string(), k.to_string()];
                row.extend(model.lattice().unpack(key).iter().map(|x| x.to_string()));
                rows.push(row);
            }
        }
    }
    let json = json!({
        "columns": columns,
        "rows": rows.iter().map(|r| r.iter().map(|v| v.parse::<i64>().unwrap_or_default()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    Ok(Output::table(columns, rows, json))
}

pub fn localtime(a: &LocaltimeParams, seed: u64) -> Result<Output> {
    use rayon::prelude::*;
    let model = build_model(&a.model, &a.d)?;
    let (p, n, replicas) = (get(&a.p), get(&a.n), get(&a.replicas));
    crate::simulate::check_p(p)?;
    model.check_range(n, p)?;
    let streams = SeedStreams::new(seed);
    let scalars: Vec<(u64, u128, u128)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let (l0, l2) = local_time_scalars(&replica_measures(&model, p, n, &streams, r))?;
            Ok((l0, l2, lambda_from(l2, n, p)?))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<String>> = scalars
        .iter()
        .enumerate()
        .map(|(r, (l0, l2, lam))| vec![r.to_string(), n.to_string(), p.to_string(), l0.to_string(), l2.to_string(), lam.to_string()])
        .collect();
    let json = json!(scalars
        .iter()
        .enumerate()
        .map(|(r, (l0, l2, lam))| json!({"replica": r, "n": n, "p": p, "l0": l0, "l2sum": l2.to_string(), "lambda": lam.to_string()}))
        .collect::<Vec<_>>());
    Ok(Output::table(vec!["replica", "n", "p", "l0", "l2sum", "lambda"], rows, json))
}

pub fn fourier(a: &FourierParams) -> Result<Output> {
    let model = build_model(&a.model, &a.d)?;
    let (p, n, moment) = (get(&a.p), get(&a.n), get(&a.moment));
    crate::simulate::check_p(p)?;
    let quad = QuadratureSpec::new(get(&a.points))?;
    let m = match moment {
        1 => mean_local_time(&model, n, p, quad)?,
        2 => second_moment_local_time(&model, n, p, quad)?,
        other => return Err(Error::InvalidParameter(format!("--moment must be 1 or 2, got {other}"))),
    };
    let row = vec![
        moment.to_string(),
        num(m.value),
        m.points.to_string(),
        num(m.refined),
        num(m.refinement_delta),
        m.exact.to_string(),
        m.converged.to_string(),
    ];
    let mut json = to_json(&m);
    json["moment"] = json!(moment);
    Ok(Output::table(vec!["moment", "value", "points", "refined", "refinement_delta", "exact", "converged"], vec![row], json))
}

pub fn oracle(a: &OracleParams) -> Result<Output> {
    let model = build_model(&a.model, &a.d)?;
    let (p, n, m_max, check) = (get(&a.p), get(&a.n), get(&a.mmax), get(&a.check));
    crate::simulate::check_p(p)?;
    let exact = enumerate_moments(&model, p, n, m_max)?;
    let mut verdicts: Vec<Verdict> = Vec::new();
    let l41 = matches!(check.as_str(), "l41" | "all");
    let l42 = matches!(check.as_str(), "l42" | "all");
    let l44 = matches!(check.as_str(), "l44" | "all");
    if !(l41 || l42 || l44 || check == "moments") {
        return Err(Error::InvalidParameter(format!("--check must be moments, l41, l42, l44 or all, got `{check}`")));
    }
    if l41 {
        verdicts.extend(check_moment_bounds(&model, p, n, m_max)?);
    }
    if l42 {
        if n == 0 {
            return Err(Error::InvalidParameter("the block check needs n ≥ 1".into()));
        }
        for n1 in 0..n {
            verdicts.extend(check_block_submult(&model, p, n1, n - 1 - n1, m_max)?);
        }
    }
    if l44 {
        verdicts.extend(check_sign_weighted(&model, p, n, m_max)?);
    }
    let violation = verdicts.iter().any(|v| v.status == Status::Violated);
    let rows = verdicts
        .iter()
        .map(|v| {
            vec![
                v.check.clone(),
                v.m.to_string(),
                v.split.map(|(a, b)| format!("{a}+{b}")).unwrap_or_default(),
                v.lhs.clone(),
                v.rhs.clone(),
                num(v.margin),
                to_json(&v.status).as_str().unwrap_or_default().to_string(),
            ]
        })
        .collect();
    let json = json!({
        "params": {"model": model.kind().to_string(), "d": model.dim(), "p": p, "n": n, "mmax": m_max, "check": check},
        "exact_values": exact,
        "verdicts": verdicts,
        "margins": verdicts.iter().map(|v| v.margin).collect::<Vec<_>>(),
    });
    let mut out = Output::table(vec!["check", "m", "split", "lhs", "rhs", "margin", "status"], rows, json);
    out.notes = (0..=m_max)
        .map(|m| format!("E l^{m} = {}, E (sum l^2)^{m} = {}", ratio_string(&exact.l0[m]), ratio_string(&exact.l2sum[m])))
        .collect();
    out.violation = violation;
    Ok(out)
}

pub fn rho(a: &RhoParams) -> Result<Output> {
    let (which, p, d, tol) = (get(&a.which), get(&a.p), get(&a.d), get(&a.tol));
    let psi: Psi = get(&a.psi).parse()?;
    let (points, cutoff) = (get(&a.grid), get(&a.cutoff));
    let grid = FrequencyGrid::new(d, cutoff, points)?;
    if which == "a1" {
        let r = spatial_identity_check(&indicator_test_f, &indicator_test_fbar, &psi, grid)?;
        let row = vec![num(r.rho), num(r.m_value), num(r.residual), r.monotone.to_string(), r.nonnegative.to_string()];
        let mut out = Output::table(vec!["rho", "m_value", "residual", "monotone", "nonnegative"], vec![row], to_json(&r));
        out.violation = !(r.monotone && r.nonnegative);
        return Ok(out);
    }
    let r = match which.as_str() {
        "rho1" | "rho2" => {
            let opts = AscentOptions { tol, extrapolate: get(&a.extrapolate), ..Default::default() };
            if which == "rho1" {
                rho1(&psi, p, grid, &opts)?
            } else {
                rho2(&psi, p, grid, &opts)?
            }
        }
        "rho_f" => rho_of_f(&indicator_test_f, &psi, grid, &KernelOptions { tol: tol.min(1e-12), ..Default::default() })?,
        other => {
            return Err(Error::InvalidParameter(format!("--which must be rho1, rho2, rho_f or a1, got `{other}`")))
        }
    };
    let row = vec![
        r.which.clone(),
        r.psi.clone(),
        r.p.to_string(),
        d.to_string(),
        points.to_string(),
        num(cutoff),
        num(r.value),
        num(r.raw_value),
        opt_num(r.doubled_value),
        opt_num(r.cutoff_delta),
        r.iterations.to_string(),
        num(r.grad_norm),
        r.converged.to_string(),
    ];
    let columns = vec![
        "which",
        "psi",
        "p",
        "d",
        "grid",
        "cutoff",
        "value",
        "raw_value",
        "doubled_value",
        "cutoff_delta",
        "iterations",
        "grad_norm",
        "converged",
    ];
    let mut out = Output::table(columns, vec![row], to_json(&r));
    if r.cutoff_warning {
        out.notes.push("warning: cutoff extrapolation moved the value by more than 0.5%".into());
    }
    Ok(out)
}

/// Rate constants for the theory columns, or `None` when the solver does not
/// cover the dimension.
fn theory_constants(model: &WalkModel, p: usize, wanted: bool, notes: &mut Vec<String>) -> Result<Option<RateConstants>> {
    if !wanted {
        return Ok(None);
    }
    crate::model::check_criticality(model.dim(), model.alpha(), p)?;
    if model.dim() > 2 {
        notes.push("theory column empty: variational solver covers d ≤ 2".into());
        return Ok(None);
    }
    model_constants(model, p, default_grid(model.dim())?).map(Some)
}

pub fn tails(a: &TailsParams, seed: u64) -> Result<Output> {
    let model = build_model(&a.model, &a.d)?;
    let (p, n, replicas) = (get(&a.p), get(&a.n), get(&a.replicas));
    let statistic = match get(&a.stat).as_str() {
        "l0" => TailStatistic::L0,
        "l2" => TailStatistic::L2,
        other => return Err(Error::InvalidParameter(format!("--stat must be l0 or l2, got `{other}`"))),
    };
    let b_n = get(&a.bn);
    let lambdas = get(&a.lambdas);
    let mut notes = Vec::new();
    let constants = theory_constants(&model, p, get(&a.theory), &mut notes)?;
    let spec = TailSpec { model: &model, p, n, b_n, statistic, lambdas: &lambdas, replicas, seed };
    let curve = tail_curve(&spec, constants.as_ref())?;
    notes.push(format!("b_n = {}, threshold scale = {}", num(b_n), num(curve.scale)));
    let censored: Vec<String> = curve.rows.iter().filter(|r| r.censored).map(|r| num(r.lambda)).collect();
    if !censored.is_empty() {
        notes.push(format!("censored (no hits, norm_logp is a lower bound) at lambda = {}", censored.join(" ")));
    }
    let rows = curve
        .rows
        .iter()
        .map(|r| vec![num(r.lambda), num(r.p_hat), num(r.ci_lo), num(r.ci_hi), num(r.norm_logp), opt_num(r.theory)])
        .collect();
    let mut json = to_json(&curve);
    json["fit"] = to_json(&curve.fit_exponent(f64::NEG_INFINITY, f64::INFINITY));
    let mut out = Output::table(vec!["lambda", "p_hat", "ci_lo", "ci_hi", "norm_logp", "theory"], rows, json);
    out.notes = notes;
    Ok(out)
}

pub fn lil(a: &LilParams, seed: u64) -> Result<Output> {
    let model = build_model(&a.model, &a.d)?;
    let (p, n) = (get(&a.p), get(&a.n));
    let schedule = geometric_schedule(get(&a.start), n, get(&a.per_octave))?;
    let mut notes = Vec::new();
    let theory = theory_constants(&model, p, get(&a.theory), &mut notes)?.map(|c| c.lil_l0());
    let trace = lil_trace(&model, p, &schedule, seed, theory)?;
    let rows = trace
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.stat_l0), num(r.stat_l2), num(r.stat_lambda), num(r.runmax_l0), opt_num(theory)])
        .collect();
    let mut out = Output::table(vec!["n", "stat_l0", "stat_l2", "stat_lambda", "runmax_l0", "theory_l0"], rows, to_json(&trace));
    if let Some((lo, hi)) = trace.corridor() {
        notes.push(format!("runmax_l0 / theory_l0 ranges over [{}, {}]", num(lo), num(hi)));
    }
    out.notes = notes;
    Ok(out)
}

pub fn poisson(a: &PoissonParams, seed: u64) -> Result<Output> {
    let model = build_model(&a.model, &a.d)?;
    let (p, n, replicas) = (get(&a.p), get(&a.n), get(&a.replicas));
    if let Some(levels) = &a.levels {
        let report = paired_mean_check(&model, p, levels, replicas, seed)?;
        let rows = report
            .levels
            .iter()
            .map(|l| vec![l.n.to_string(), num(l.b_n), num(l.scale), num(l.diff.mean), num(l.diff.std_err), num(l.norm_sd)])
            .collect();
        let mut out = Output::table(vec!["n", "b_n", "scale", "mean_diff", "se_diff", "norm_sd"], rows, to_json(&report));
        out.notes.push(format!("spread shrinks: {}", report.spread_shrinks()));
        return Ok(out);
    }
    let fields = poissonized_replicas(&model, p, n, replicas, seed, Weights::Exponential)?;
    let rows = fields
        .iter()
        .map(|f| vec![f.replica.to_string(), num(f.l0_weighted), f.l0.to_string(), num(f.diff())])
        .collect();
    Ok(Output::table(vec!["replica", "L0_weighted", "l0", "diff"], rows, to_json(&fields)))
}

pub fn weak(a: &WeakParams, seed: u64) -> Result<Output> {
    let model = build_model(&a.model, &a.d)?;
    let (p, levels, replicas) = (get(&a.p), get(&a.levels), get(&a.replicas));
    let report = weak_convergence_study(&model, p, &levels, replicas, seed, false)?;
    let rows = report
        .levels
        .iter()
        .enumerate()
        .map(|(k, l)| {
            let mut row = vec![l.n.to_string(), num(l.scale_l0), num(l.l0.mean), num(l.l0.std_err)];
            row.extend(l.quantiles_l0.iter().map(|&q| num(q)));
            row.push(if k == 0 { String::new() } else { num(report.ks_l0[k - 1]) });
            row
        })
        .collect();
    let columns = vec!["n", "scale", "mean", "std_err", "q10", "q25", "q50", "q75", "q90", "ks_prev"];
    let mut out = Output::table(columns, rows, to_json(&report));
    out.notes.push(format!("inversions: {}", report.inversions_l0()));
    Ok(out)
}

fn report_row(rows: &mut Vec<Vec<String>>, item: String, value: f64, target: f64, tol: f64, relative: bool) -> bool {
    let err = if relative { (value - target).abs() / target.abs() } else { (value - target).abs() };
    let pass = err <= tol;
    rows.push(vec![item, num(value), num(target), num(tol), pass.to_string()]);
    pass
}

pub fn report(a: &ReportParams) -> Result<Output> {
    let nmax = get(&a.nmax);
    let mut rows = Vec::new();
    let mut ok = true;
    let g = GaussianConstants::new(1, 1, 1.0, RHO1_BAR_D1_P1, 1.0)?;
    ok &= report_row(&mut rows, "gauss_md_l0(1)".into(), g.md_l0(1.0)?, -0.5, 1e-12, false);
    ok &= report_row(&mut rows, "gauss_lil_l0".into(), g.lil_l0(), 2f64.sqrt(), 1e-12, false);
    let grid = FrequencyGrid::new(1, 40.0, 512)?;
    let r1 = rho1(&Psi::Gaussian { sigma: 1.0 }, 1, grid, &AscentOptions::default())?;
    ok &= report_row(&mut rows, "rho1 gaussian d=1 p=1".into(), r1.value, RHO1_BAR_D1_P1, 1e-2, true);
    let a1 = spatial_identity_check(&indicator_test_f, &indicator_test_fbar, &Psi::Gaussian { sigma: 1.0 }, FrequencyGrid::new(1, 40.0, 1000)?)?;
    ok &= report_row(&mut rows, "spatial identity M_f(1/rho)".into(), a1.m_value, 1.0, 5e-3, false);
    for d in 1..=2 {
        let model = WalkModel::from_name("lazy-simple", d)?;
        for p in 1..=2 {
            for n in 0..=nmax {
                let exact = enumerate_moments(&model, p, n, 2)?;
                let quad = QuadratureSpec::exact_for(&model, n, p);
                let m1 = mean_local_time(&model, n, p, quad)?.value;
                let m2 = second_moment_local_time(&model, n, p, quad)?.value;
                ok &= report_row(&mut rows, format!("E l d={d} p={p} n={n}"), m1, exact.l0_f64(1), 1e-10, true);
                ok &= report_row(&mut rows, format!("E l^2 d={d} p={p} n={n}"), m2, exact.l0_f64(2), 1e-10, true);
            }
        }
    }
    let json = json!(rows
        .iter()
        .map(|r| json!({"item": r[0], "value": r[1].parse::<f64>().ok(), "target": r[2].parse::<f64>().ok(), "tolerance": r[3].parse::<f64>().ok(), "pass": r[4] == "true"}))
        .collect::<Vec<_>>());
    let mut out = Output::table(vec!["item", "value", "target", "tolerance", "pass"], rows, json);
    out.violation = !ok;
    Ok(out)
}
