//! Acceptance run: one line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL like any other
//! but do not fail the target unless ADDWALK_ACCEPTANCE_STRICT=1.

use std::time::Instant;

use addwalk::enumeration::{check_moment_bounds, check_block_submult, check_sign_weighted, enumerate_moments, Status};
use addwalk::occupation::{diagonal_count, evaluate_at_zero, l2_via_autocorrelation, local_time_field};
use addwalk::poisson::{poissonized_local_time, Weights};
use addwalk::rates::{
    default_bn, default_grid, geometric_schedule, lil_trace, model_constants, tail_curve, weak_convergence_study,
    GaussianConstants, TailSpec, TailStatistic, RHO1_BAR_D1_P1,
};
use addwalk::rng::SeedStreams;
use addwalk::simulate::{monte_carlo_moments, replica_measures};
use addwalk::spectral::{mean_local_time, second_moment_local_time, QuadratureSpec};
use addwalk::variational::{
    indicator_test_f, indicator_test_fbar, spatial_identity_check, rho1, AscentOptions, FrequencyGrid, Psi,
};
use addwalk::WalkModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2007;

/// Criteria that fail at the default seed; see the README.
const KNOWN_FAILURES: [usize; 3] = [6, 7, 8];

type Check = Result<(bool, String), String>;

fn lazy(d: usize) -> WalkModel {
    WalkModel::from_name("lazy-simple", d).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn oracle_triangle() -> Check {
    let mut worst_rel: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut cases = 0;
    for d in 1..=2 {
        let model = lazy(d);
        for p in 1..=2 {
            for n in 0..=6 {
                let exact = enumerate_moments(&model, p, n, 2).map_err(|e| e.to_string())?;
                let quad = QuadratureSpec::exact_for(&model, n, p);
                let m1 = mean_local_time(&model, n, p, quad).map_err(|e| e.to_string())?.value;
                let m2 = second_moment_local_time(&model, n, p, quad).map_err(|e| e.to_string())?.value;
                worst_rel = worst_rel.max(rel(m1, exact.l0_f64(1))).max(rel(m2, exact.l0_f64(2)));
                let mc = monte_carlo_moments(&model, p, n, 100_000, SEED).map_err(|e| e.to_string())?;
                worst_z = worst_z.max(mc.first.z_score(exact.l0_f64(1))).max(mc.second.z_score(exact.l0_f64(2)));
                cases += 1;
            }
        }
    }
    Ok((
        worst_rel <= 1e-10 && worst_z <= 4.0,
        format!("{cases} cases, max rel(spectral, exact) {worst_rel:.1e}, max MC z {worst_z:.2}"),
    ))
}

fn rho1_anchor() -> Check {
    let grid = FrequencyGrid::new(1, 40.0, 512).unwrap();
    let opts = AscentOptions::default();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for sigma in [1.0, 0.5, 2.0] {
        let v = rho1(&Psi::Gaussian { sigma }, 1, grid, &opts).map_err(|e| e.to_string())?.value;
        let target = RHO1_BAR_D1_P1 / sigma;
        worst = worst.max(rel(v, target));
        parts.push(format!("sigma {sigma}: {v:.5} vs {target:.5}"));
    }
    Ok((worst <= 0.01, format!("{}; max rel {worst:.2e}", parts.join(", "))))
}

fn rate_anchors() -> Check {
    let g = GaussianConstants::new(1, 1, 1.0, RHO1_BAR_D1_P1, 1.0).map_err(|e| e.to_string())?;
    let md = g.md_l0(1.0).map_err(|e| e.to_string())?;
    let lil = g.lil_l0();
    let ok = (md + 0.5).abs() <= 1e-12 && (lil - 2f64.sqrt()).abs() <= 1e-12;
    Ok((ok, format!("md_l0(1) = {md}, lil_l0 = {lil}")))
}

fn inequality_suite() -> Check {
    let (mut holds, mut skipped, mut bad) = (0, 0, Vec::new());
    for d in 1..=2 {
        let model = lazy(d);
        for p in 1..=2 {
            for n in 0..=6 {
                let mut v = check_moment_bounds(&model, p, n, 3).map_err(|e| e.to_string())?;
                for n1 in 0..n {
                    v.extend(check_block_submult(&model, p, n1, n - 1 - n1, 3).map_err(|e| e.to_string())?);
                }
                v.extend(check_sign_weighted(&model, p, n, 3).map_err(|e| e.to_string())?);
                for x in v {
                    match x.status {
                        Status::Holds => holds += 1,
                        Status::Skipped => skipped += 1,
                        Status::Violated | Status::Tight => bad.push(format!("{} d={d} p={p} n={n} m={} {:?}", x.check, x.m, x.status)),
                    }
                }
            }
        }
    }
    Ok((bad.is_empty(), format!("{holds} hold, {skipped} over budget, {} not holding {:?}", bad.len(), bad)))
}

fn structural_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..1000u64 {
        let d = rng.random_range(1..=2);
        let p = rng.random_range(1..=3);
        let n = rng.random_range(0..=200);
        let seed = rng.random::<u64>();
        let model = lazy(d);
        let ms = replica_measures(&model, p, n, &SeedStreams::new(seed), i);
        let f = local_time_field(&ms).map_err(|e| e.to_string())?;
        let diag = diagonal_count(n, p).map_err(|e| e.to_string())?;
        let wide: Vec<_> = ms.iter().map(|m| m.wide()).collect();
        let unit = poissonized_local_time(&model, p, n, seed, i, Weights::Unit).map_err(|e| e.to_string())?;
        let ok = f.mass() == diag
            && f.l2sum == 2 * f.lambda + diag
            && l2_via_autocorrelation(&ms).map_err(|e| e.to_string())? == f.l2sum
            && evaluate_at_zero(&wide) == f.l0 as u128
            && unit.l0 == f.l0
            && unit.l0_weighted == f.l0 as f64;
        if !ok {
            return Ok((false, format!("field {i} (d={d}, p={p}, n={n}, seed={seed}) breaks an identity")));
        }
    }
    Ok((true, "1000 random fields: mass, square sum, both routes, unit weights exact".into()))
}

fn deviation_exponent() -> Check {
    let model = lazy(1);
    let n = 10_000;
    let lambdas: Vec<f64> = (0..=10).map(|k| 1.0 + 0.1 * k as f64).collect();
    let spec = TailSpec {
        model: &model,
        p: 1,
        n,
        b_n: default_bn(n),
        statistic: TailStatistic::L0,
        lambdas: &lambdas,
        replicas: 100_000,
        seed: SEED,
    };
    let c = tail_curve(&spec, None).map_err(|e| e.to_string())?;
    let hits: Vec<u64> = c.rows.iter().map(|r| r.hits).collect();
    let censored = c.rows.iter().filter(|r| r.censored).count();
    Ok(match c.fit_exponent(1.0, 2.0) {
        Some(fit) => (
            (fit.slope - 2.0).abs() <= 0.4,
            format!("slope {:.3} ± {:.3} over {} points", fit.slope, fit.std_err, fit.points),
        ),
        None => (
            false,
            format!("no fit: {censored}/{} λ cells censored, hits {hits:?} (threshold λ·{:.0})", lambdas.len(), c.scale),
        ),
    })
}

fn weak_trend() -> Check {
    let levels: Vec<usize> = (8..=13).map(|k| 1usize << k).collect();
    let r = weak_convergence_study(&lazy(1), 2, &levels, 10_000, SEED, false).map_err(|e| e.to_string())?;
    let ks: Vec<String> = r.ks_l0.iter().map(|x| format!("{x:.4}")).collect();
    Ok((r.inversions_l0() <= 1, format!("KS [{}], {} inversions", ks.join(", "), r.inversions_l0())))
}

fn lil_corridor() -> Check {
    let model = lazy(1);
    let theory = model_constants(&model, 1, default_grid(1).unwrap()).map_err(|e| e.to_string())?.lil_l0();
    let schedule = geometric_schedule(16, 10_000_000, 8).map_err(|e| e.to_string())?;
    let t = lil_trace(&model, 1, &schedule, SEED, Some(theory)).map_err(|e| e.to_string())?;
    let (lo, hi) = t.corridor().unwrap();
    let ok = t.runmax_nondecreasing() && lo >= 0.3 && hi <= 1.5;
    Ok((ok, format!("theory {theory:.4}, runmax/theory in [{lo:.3}, {hi:.3}], nondecreasing {}", t.runmax_nondecreasing())))
}

fn spatial_identity() -> Check {
    let grid = FrequencyGrid::new(1, 40.0, 1000).unwrap();
    let r = spatial_identity_check(&indicator_test_f, &indicator_test_fbar, &Psi::Gaussian { sigma: 1.0 }, grid)
        .map_err(|e| e.to_string())?;
    Ok((r.residual <= 5e-3, format!("rho(f) = {:.5}, M_f(1/rho) = {:.6}, residual {:.2e}", r.rho, r.m_value, r.residual)))
}

fn cli(args: &[&str]) -> Result<String, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("addwalk").chain(args.iter().copied());
    let code = addwalk::cli::run_with(argv, &mut out, &mut err);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    String::from_utf8(out).map_err(|e| e.to_string())
}

fn without_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.starts_with("# timestamp:")).collect::<Vec<_>>().join("\n")
}

fn header_value<'a>(s: &'a str, key: &str) -> Option<&'a str> {
    s.lines().find_map(|l| l.strip_prefix(&format!("# {key}: ")))
}

/// Re-runs from nothing but the manifest header, via a config file.
fn replay(first: &str, dir: &std::path::Path) -> Result<String, String> {
    let sub = header_value(first, "subcommand").ok_or("no subcommand line")?;
    let seed = header_value(first, "seed").ok_or("no seed line")?;
    let params: serde_json::Value = serde_json::from_str(header_value(first, "params").ok_or("no params line")?)
        .map_err(|e| e.to_string())?;
    let mut doc = toml::Table::new();
    doc.insert("seed".into(), toml::Value::Integer(seed.parse().map_err(|_| "bad seed")?));
    doc.insert(sub.into(), toml::Value::try_from(params).map_err(|e| e.to_string())?);
    let path = dir.join(format!("{sub}.toml"));
    std::fs::write(&path, toml::to_string(&doc).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    cli(&[sub, "--format", "csv", "--config", path.to_str().unwrap()])
}

fn determinism() -> Check {
    let runs: [&[&str]; 9] = [
        &["simulate", "--d", "2", "--p", "2", "--n", "30", "--replicas", "3"],
        &["localtime", "--p", "2", "--n", "400", "--replicas", "64"],
        &["fourier", "--p", "2", "--n", "8", "--moment", "2"],
        &["oracle", "--p", "2", "--n", "3", "--check", "all"],
        &["rho", "--which", "rho2", "--p", "1", "--grid", "256"],
        &["tails", "--n", "3000", "--replicas", "3000", "--lambdas", "0.2,0.4,0.6"],
        &["lil", "--n", "200000", "--p", "2", "--theory", "false"],
        &["poisson", "--p", "2", "--n", "150", "--replicas", "40"],
        &["weak", "--levels", "64,128,256", "--replicas", "600"],
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for args in runs {
        let mut reference: Option<String> = None;
        for jobs in ["1", "2", "4"] {
            let mut a: Vec<&str> = args.to_vec();
            a.extend(["--format", "csv", "--seed", "31", "--jobs", jobs]);
            let body = without_timestamp(&cli(&a)?);
            match &reference {
                None => reference = Some(body),
                Some(r) if *r != body => return Ok((false, format!("{} differs at --jobs {jobs}", args[0]))),
                Some(_) => {}
            }
            checked += 1;
        }
        let r = reference.unwrap();
        if without_timestamp(&replay(&r, dir.path())?) != r {
            return Ok((false, format!("{} not reproduced from its manifest", args[0])));
        }
        checked += 1;
    }
    Ok((true, format!("{checked} runs over 9 subcommands byte-identical across --jobs 1/2/4 and manifest replay")))
}

struct Criterion {
    id: usize,
    name: &'static str,
    budget_secs: f64,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "exact oracle triangle", budget_secs: 120.0, run: oracle_triangle },
        Criterion { id: 2, name: "closed-form rho1 anchor and scaling", budget_secs: 60.0, run: rho1_anchor },
        Criterion { id: 3, name: "rate-constant anchors", budget_secs: 1.0, run: rate_anchors },
        Criterion { id: 4, name: "moment inequality suite", budget_secs: 300.0, run: inequality_suite },
        Criterion { id: 5, name: "structural identities", budget_secs: 60.0, run: structural_identities },
        Criterion { id: 6, name: "moderate-deviation exponent", budget_secs: 600.0, run: deviation_exponent },
        Criterion { id: 7, name: "weak-convergence KS trend", budget_secs: 900.0, run: weak_trend },
        Criterion { id: 8, name: "LIL corridor", budget_secs: 300.0, run: lil_corridor },
        Criterion { id: 9, name: "spatial-side identity", budget_secs: 60.0, run: spatial_identity },
        Criterion { id: 10, name: "determinism", budget_secs: 600.0, run: determinism },
    ];
    let strict = std::env::var("ADDWALK_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for c in &criteria {
        let t = Instant::now();
        let (ok, detail) = match (c.run)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = t.elapsed().as_secs_f64();
        let pass = ok && secs <= c.budget_secs;
        let known = KNOWN_FAILURES.contains(&c.id);
        let tag = match (pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {:>2} {tag}: {}: {detail} [{secs:.1}s of {}s]", c.id, c.name, c.budget_secs);
        if pass {
            passed += 1;
        } else if strict || !known {
            unexpected.push(c.id);
        }
    }
    println!("acceptance: {passed}/{} criteria pass", criteria.len());
    if !unexpected.is_empty() {
        eprintln!("failing criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
