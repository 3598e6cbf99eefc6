//! Acceptance criteria. Runs without the test harness so that the criteria
//! execute one after another (the timed ones get the CPU to themselves) and
//! each prints a PASS/FAIL line. Arguments filter criteria by name.

mod common;

use std::sync::atomic::AtomicBool;
use std::time::{Duration, Instant};

use gapdecomp::cli::{decomposition_table, format_contribution, format_percent, run, RunConfig};
use gapdecomp::dataio::{encode_design, DesignMatrix, Stars};
use gapdecomp::decomp::{
    bootstrap, decompose, fairlie_detailed, oaxaca_blinder, BlockContribution, DecompConfig, DecompositionResult,
    FitDiagnostics, Ordering, UnexplainedBasis,
};
use gapdecomp::probit::{fit, fit_with_link, gradient, hessian, FitOptions, LinkFunction};
use gapdecomp::rng::{self, Domain};
use gapdecomp::synth::{generate, oracle_decompose, BetaSpec, DgpSpec, WeightScheme};
use gapdecomp::Error;
use common::{group, normal, three_block_dgp};
use rand::RngExt;

static VERDICT_FAILED: AtomicBool = AtomicBool::new(false);

fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    println!("[{}] criterion {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        VERDICT_FAILED.store(true, std::sync::atomic::Ordering::SeqCst);
    }
}

// 1 -----------------------------------------------------------------------

fn fixture_column() -> DecompositionResult {
    // published column: (block, estimate, se, stars)
    let rows = [
        ("Age", 0.003, 0.000, Stars::One),
        ("Female", 0.000, 0.000, Stars::Ten),
        ("Education", 0.035, 0.001, Stars::One),
        ("Log(income)", 0.070, 0.002, Stars::One),
        ("Place of residence", 0.027, 0.002, Stars::One),
        ("Occupation", 0.009, 0.001, Stars::One),
        ("State", -0.005, 0.002, Stars::Five),
    ];
    let contributions = rows
        .iter()
        .map(|&(block, estimate, se, stars)| BlockContribution {
            block: block.into(),
            variables: vec![block.into()],
            estimate,
            se: Some(se),
            stars,
            pct_explained: None,
            iteration_sd: 0.0,
        })
        .collect();
    DecompositionResult {
        outcome: "COR".into(),
        reference_group: "Others".into(),
        comparison_group: "ST".into(),
        n_reference: 0,
        n_comparison: 0,
        mean_reference: 0.207,
        mean_comparison: 0.055,
        total_gap: 0.153,
        total_gap_se: None,
        model_gap: None,
        explained_total: 0.139,
        explained_total_se: None,
        explained_stars: Stars::None,
        unexplained_total: 0.014,
        unexplained_basis: UnexplainedBasis::RawGap,
        total_pct_explained: None,
        contributions,
        aggregate_a_weighted: None,
        aggregate_d_weighted: None,
        coefficient_fit: FitDiagnostics { converged: true, iterations: 0, loglik: 0.0, gradient_norm: 0.0 },
        bootstrap: None,
        config: DecompConfig::default(),
    }
}

fn c01_arithmetic_fidelity() {
    let t = Instant::now();
    let fixture = fixture_column();
    let table = decomposition_table(&[&fixture]);
    let printed = [
        ("Age", 2.0),
        ("Female", 0.0),
        ("Education", 22.9),
        ("Log(income)", 45.8),
        ("Place of residence", 17.7),
        ("Occupation", 5.9),
        ("State", -3.3),
    ];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (block, want) in printed {
        let cell = table.cell(block, 1).expect("row present");
        let shown: f64 = cell.split_whitespace().last().unwrap().parse().unwrap();
        worst = worst.max((shown - want).abs());
        ok &= (shown - want).abs() <= 0.1 + 1e-9;
    }
    let text = table.to_string();
    ok &= text.contains("0.070*** (0.002)  45.8");
    ok &= format_contribution(&fixture.contributions[3], fixture.total_gap) == "0.070*** (0.002)  45.8";
    ok &= table.cell("Gap in COR (pp)", 1) == Some("15.3");
    // the headline share is quoted as a whole percent
    let total = 100.0 * fixture.explained_total / fixture.total_gap;
    let total_shown = format_percent(Some(total), 0);
    ok &= total_shown == "91";
    let summed: f64 = fixture.contributions.iter().map(|c| c.estimate).sum();
    ok &= (summed - fixture.explained_total).abs() < 1e-12;
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    verdict(
        1,
        "arithmetic fidelity",
        ok,
        format!("max |shown - printed| = {worst:.3} pp, total {total:.2}% shown as {total_shown}%, {elapsed:?}"),
    );
}

// 2 -----------------------------------------------------------------------

/// Independent weighted probit log-likelihood.
fn reference_loglik(beta: &[f64], x: &[Vec<f64>], y: &[f64], w: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(w)
        .map(|((row, &yi), &wi)| {
            let z: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            let q = 2.0 * yi - 1.0;
            wi * (0.5 * libm::erfc(-q * z / std::f64::consts::SQRT_2)).ln()
        })
        .sum()
}

fn c02_gradient_hessian_finite_differences() {
    let mut worst_g: f64 = 0.0;
    let mut worst_h: f64 = 0.0;
    for inst in 0..100u64 {
        let mut r = rng::stream(0xC02, Domain::SynthRow, inst);
        let n = r.random_range(10..=50);
        let p = r.random_range(1..=6);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut row = vec![1.0];
                row.extend((1..p).map(|_| r.random_range(-2.0..2.0)));
                row
            })
            .collect();
        let y: Vec<f64> = (0..n).map(|_| if r.random::<f64>() < 0.5 { 1.0 } else { 0.0 }).collect();
        let w: Vec<f64> = (0..n).map(|_| r.random_range(0.2..3.0)).collect();
        let beta: Vec<f64> = (0..p).map(|_| r.random_range(-0.8..0.8)).collect();
        let dm = DesignMatrix::from_numeric(x.concat(), p, y.clone(), w.clone()).unwrap();

        let g = gradient(&beta, &dm).unwrap();
        let h = hessian(&beta, &dm).unwrap();
        let step = 1e-5;
        let mut fd_g = vec![0.0; p];
        let mut fd_h = vec![vec![0.0; p]; p];
        for j in 0..p {
            let mut up = beta.clone();
            let mut dn = beta.clone();
            up[j] += step;
            dn[j] -= step;
            fd_g[j] = (reference_loglik(&up, &x, &y, &w) - reference_loglik(&dn, &x, &y, &w)) / (2.0 * step);
            let gu = gradient(&up, &dm).unwrap();
            let gd = gradient(&dn, &dm).unwrap();
            for k in 0..p {
                fd_h[k][j] = (gu[k] - gd[k]) / (2.0 * step);
            }
        }
        let norm = |v: &mut dyn Iterator<Item = f64>| v.fold(0.0f64, |m, x| m.max(x.abs()));
        let eg = norm(&mut g.iter().zip(&fd_g).map(|(a, b)| a - b)) / norm(&mut fd_g.iter().copied()).max(1e-12);
        let eh = norm(&mut (0..p).flat_map(|j| (0..p).map(move |k| (j, k))).map(|(j, k)| h[(j, k)] - fd_h[j][k]))
            / norm(&mut fd_h.iter().flatten().copied()).max(1e-12);
        worst_g = worst_g.max(eg);
        worst_h = worst_h.max(eh);
    }
    verdict(
        2,
        "gradient/Hessian vs finite differences",
        worst_g <= 1e-6 && worst_h <= 1e-6,
        format!("max relative error: score {worst_g:.2e}, Hessian {worst_h:.2e} over 100 instances"),
    );
}

// 3 -----------------------------------------------------------------------

fn c03_probit_recovery() {
    let truth = [-0.3, 0.5, -0.8, 0.25];
    let mut covered = 0;
    let mut slowest = Duration::ZERO;
    for run in 0..100u64 {
        let spec = DgpSpec {
            seed: 3_000 + run,
            outcome: "y".into(),
            group_column: "group".into(),
            weight_column: None,
            link: LinkFunction::Probit,
            numeric: vec!["x1".into(), "x2".into(), "x3".into()],
            categorical: vec![],
            beta: BetaSpec { intercept: truth[0], numeric: truth[1..].to_vec(), categorical: vec![] },
            groups: vec![
                group("a", 100_000, vec![normal(0.0, 1.0), normal(0.5, 1.0), normal(-1.0, 2.0)], vec![]),
                group("b", 100_000, vec![normal(0.0, 1.0), normal(0.5, 1.0), normal(-1.0, 2.0)], vec![]),
            ],
        };
        let ds = generate(&spec).unwrap();
        let dm = encode_design(&ds, &spec.model_spec("a", "b"), None).unwrap();
        let t = Instant::now();
        let m = fit(&dm, &FitOptions::default()).unwrap();
        slowest = slowest.max(t.elapsed());
        let se = m.robust_se();
        if (0..4).all(|j| (m.beta[j] - truth[j]).abs() <= 3.0 * se[j]) {
            covered += 1;
        }
    }
    verdict(
        3,
        "probit recovery",
        covered >= 95 && slowest < Duration::from_secs(5),
        format!("{covered}/100 runs with every coefficient within 3 SE; slowest fit {slowest:?} (n = 200000, p = 4)"),
    );
}

// 4 -----------------------------------------------------------------------

fn c04_telescoping() {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for inst in 0..20u64 {
        let mut r = rng::stream(0xC04, Domain::SynthRow, inst);
        let n_a = r.random_range(40..400);
        let n_d = r.random_range(40..400);
        let spec = three_block_dgp(400 + inst, n_a, n_d);
        let ds = generate(&spec).unwrap();
        let ms = spec.model_spec("a", "d");
        let pooled = encode_design(&ds, &ms, None).unwrap();
        let pos_a: Vec<usize> = (0..n_a).collect();
        let pos_d: Vec<usize> = (n_a..n_a + n_d).collect();
        let model = fit(&pooled, &FitOptions::default()).unwrap();
        let cfg = DecompConfig { iterations: 50, seed: inst, bootstrap_reps: 0, ..Default::default() };
        let det = fairlie_detailed(&model, &pooled.select(&pos_a), &pooled.select(&pos_d), &cfg).unwrap();
        for it in &det.iterations {
            let s: f64 = it.contributions.iter().sum();
            worst = worst.max((s - it.matched_explained).abs());
            checked += 1;
        }
    }
    verdict(
        4,
        "telescoping exactness",
        worst <= 1e-12,
        format!("max |sum of contributions - matched aggregate| = {worst:.2e} over {checked} iterations"),
    );
}

// 5 -----------------------------------------------------------------------

fn c05_linear_reduction() {
    let mut worst: f64 = 0.0;
    let mut orders = std::collections::BTreeSet::new();
    for inst in 0..10u64 {
        let n = 150 + 10 * inst as usize;
        let spec = three_block_dgp(500 + inst, n, n);
        let ds = generate(&spec).unwrap();
        let pooled = encode_design(&ds, &spec.model_spec("a", "d"), None).unwrap();
        let dm_a = pooled.select(&(0..n).collect::<Vec<_>>());
        let dm_d = pooled.select(&(n..2 * n).collect::<Vec<_>>());
        let model = fit_with_link(&pooled, LinkFunction::Identity, &FitOptions::default()).unwrap();
        let ob = oaxaca_blinder(&dm_a, &dm_d, &model.beta, &model.beta).unwrap();
        let cfg = DecompConfig {
            iterations: 60,
            seed: inst,
            bootstrap_reps: 0,
            link: LinkFunction::Identity,
            ordering: Ordering::Randomized,
            ..Default::default()
        };
        let det = fairlie_detailed(&model, &dm_a, &dm_d, &cfg).unwrap();
        for it in &det.iterations {
            orders.insert(it.order.clone());
            for (b, block) in det.blocks.iter().enumerate() {
                let want: f64 = block.columns.iter().map(|&j| ob.explained_by_column[j]).sum();
                worst = worst.max((it.contributions[b] - want).abs());
            }
        }
    }
    verdict(
        5,
        "linear reduction",
        worst <= 1e-12 && orders.len() == 6,
        format!("max |block - Oaxaca-Blinder component| = {worst:.2e}; {} of 6 orderings exercised", orders.len()),
    );
}

// 6 -----------------------------------------------------------------------

fn c06_oracle_equivalence() {
    let iterations = 400;
    let mut worst_z: f64 = 0.0;
    let mut ok = true;
    for seed in 0..20u64 {
        // alternate census (equal sizes) and subsampled instances
        let (n_a, n_d) = if seed % 2 == 0 { (120, 120) } else { (30, 28) };
        let spec = three_block_dgp(600 + seed, n_a, n_d);
        let ds = generate(&spec).unwrap();
        let ms = spec.model_spec("a", "d");
        let cfg = DecompConfig { iterations, seed, bootstrap_reps: 0, ..Default::default() };
        let engine = decompose(&ds, &ms, &cfg).unwrap();
        let oracle = oracle_decompose(&ds, &ms, &cfg).unwrap();
        for (e, o) in engine.contributions.iter().zip(&oracle.contributions) {
            assert_eq!(e.block, o.block);
            let sigma = o.iteration_sd / (iterations as f64).sqrt();
            let diff = (e.estimate - o.estimate).abs();
            if sigma == 0.0 {
                ok &= diff <= 1e-12;
            } else {
                worst_z = worst_z.max(diff / sigma);
                ok &= diff <= 3.0 * sigma;
            }
        }
    }
    verdict(6, "oracle equivalence", ok, format!("max |engine - oracle| / MC sigma = {worst_z:.2} across 20 seeds"));
}

// 7 -----------------------------------------------------------------------

/// Only x1's distribution differs. The other blocks enter the index with
/// small coefficients: under rank matching a block whose distribution is the
/// same in both groups still picks up a curvature term of order
/// coefficient^2, which is what the 2% bound is about.
fn engineered_dgp(seed: u64) -> DgpSpec {
    let mut spec = three_block_dgp(seed, 25_000, 25_000);
    spec.beta = BetaSpec { intercept: 0.0, numeric: vec![1.0, 0.2], categorical: vec![vec![0.0, 0.2, -0.2]] };
    spec.groups[0].numeric = vec![normal(0.5, 1.0), normal(0.0, 1.0)];
    spec.groups[1].numeric = vec![normal(-0.5, 1.0), normal(0.0, 1.0)];
    spec.groups[1].categorical = spec.groups[0].categorical.clone();
    spec
}

fn c07_engineered_gap() {
    let mut min_share = f64::INFINITY;
    let mut max_other: f64 = 0.0;
    for seed in 0..5u64 {
        let spec = engineered_dgp(700 + seed);
        let ds = generate(&spec).unwrap();
        let cfg = DecompConfig { iterations: 100, seed, bootstrap_reps: 0, ..Default::default() };
        let r = decompose(&ds, &spec.model_spec("a", "d"), &cfg).unwrap();
        let x1 = r.contributions.iter().find(|c| c.block == "x1").unwrap().estimate;
        min_share = min_share.min(x1 / r.explained_total);
        for c in r.contributions.iter().filter(|c| c.block != "x1") {
            max_other = max_other.max((c.estimate / r.total_gap).abs());
        }
    }
    verdict(
        7,
        "engineered-gap attribution",
        min_share >= 0.95 && max_other <= 0.02,
        format!(
            "over 5 datasets of 50000 rows: x1 carries >= {:.1}% of explained; largest other block {:.2}% of the gap",
            100.0 * min_share,
            100.0 * max_other
        ),
    );
}

// 8 -----------------------------------------------------------------------

fn c08_bootstrap_sanity() {
    let (n_a, n_d) = (1500, 1200);
    let mut r = rng::stream(0xC08, Domain::SynthRow, 0);
    let y_a: Vec<f64> = (0..n_a).map(|_| if r.random::<f64>() < 0.35 { 1.0 } else { 0.0 }).collect();
    let y_d: Vec<f64> = (0..n_d).map(|_| if r.random::<f64>() < 0.2 { 1.0 } else { 0.0 }).collect();
    let all: Vec<f64> = y_a.iter().chain(&y_d).copied().collect();
    let mean = |rows: &[usize]| rows.iter().map(|&i| all[i]).sum::<f64>() / rows.len() as f64;
    let rows_a: Vec<usize> = (0..n_a).collect();
    let rows_d: Vec<usize> = (n_a..n_a + n_d).collect();
    let summary = bootstrap(&[&rows_a, &rows_d], 1000, 8, |res, _| Ok(vec![mean(&res[0]) - mean(&res[1])])).unwrap();
    let var = |m: f64, n: usize| m * (1.0 - m) / n as f64;
    let analytic = (var(mean(&rows_a), n_a) + var(mean(&rows_d), n_d)).sqrt();
    let ratio = summary.se[0] / analytic;

    // zero-variance fixture: every resample has the same mean
    let flat = [0.25; 50];
    let idx: Vec<usize> = (0..50).collect();
    let zero = bootstrap(&[&idx, &idx], 1000, 9, |res, _| {
        let m = |rows: &[usize]| rows.iter().map(|&i| flat[i]).sum::<f64>() / rows.len() as f64;
        Ok(vec![m(&res[0]) - m(&res[1]), m(&res[0])])
    })
    .unwrap();
    verdict(
        8,
        "bootstrap sanity",
        (ratio - 1.0).abs() <= 0.10 && zero.se.iter().all(|&s| s == 0.0),
        format!("bootstrap/analytic SE = {ratio:.4} at B = 1000; zero-variance SEs {:?}", zero.se),
    );
}

// 9 -----------------------------------------------------------------------

fn write_run_fixture(dir: &std::path::Path, n: usize) -> RunConfig {
    let mut spec = three_block_dgp(900, n, n);
    spec.weight_column = Some("wt".into());
    for g in &mut spec.groups {
        g.weights = WeightScheme::Uniform { min: 0.5, max: 2.5 };
    }
    let mut third = spec.groups[1].clone();
    third.label = "e".into();
    third.n = n / 2;
    spec.groups.push(third);
    generate(&spec).unwrap().save_csv(dir.join("data.csv")).unwrap();
    RunConfig::parse(
        r#"
data = "data.csv"
[model]
outcome = "y"
group = "group"
reference_group = "a"
comparison_groups = ["d", "e"]
weight = "wt"
covariates = [{ name = "x1" }, { name = "x2" }, { name = "c", kind = "categorical", reference = "u" }]
[decomp]
iterations = 40
seed = 99
bootstrap_reps = 20
[output]
format = "json"
"#,
    )
    .map(|mut c| {
        c.data = dir.join("data.csv");
        c
    })
    .unwrap()
}

fn c09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_run_fixture(dir.path(), 600);
    let json_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run(&cfg).unwrap().to_json())
    };
    let one = json_with(1);
    let eight = json_with(8);
    let again = json_with(1);
    verdict(
        9,
        "determinism",
        one == eight && one == again,
        format!("json exports of {} bytes identical at 1 and 8 threads and across reruns", one.len()),
    );
}

// 10 ----------------------------------------------------------------------

fn separated_design() -> DesignMatrix {
    let xs: Vec<f64> = (0..40).map(|i| i as f64 / 4.0 - 5.0).collect();
    let x: Vec<f64> = xs.iter().flat_map(|&v| [1.0, v]).collect();
    let y: Vec<f64> = xs.iter().map(|&v| if v > 0.1 { 1.0 } else { 0.0 }).collect();
    DesignMatrix::from_numeric(x, 2, y, vec![1.0; 40]).unwrap()
}

fn c10_robustness_and_scale() {
    let mut ok = true;
    let mut notes = Vec::new();

    let sep = fit(&separated_design(), &FitOptions::default());
    ok &= matches!(sep, Err(Error::QuasiSeparation { .. }));
    notes.push(format!("separation -> {}", sep.map(|_| "fit".to_string()).unwrap_or_else(|e| e.to_string())));

    // x3 = x1 + x2
    let rows: Vec<[f64; 4]> = (0..30).map(|i| {
        let (a, b) = ((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos());
        [1.0, a, b, a + b]
    }).collect();
    let y: Vec<f64> = (0..30).map(|i| (i % 3 == 0) as u8 as f64).collect();
    let dm = DesignMatrix::from_numeric(rows.concat(), 4, y, vec![1.0; 30]).unwrap();
    let col = fit(&dm, &FitOptions::default());
    ok &= matches!(&col, Err(Error::CollinearDesign(c)) if c == &vec!["x3".to_string()]);
    notes.push(format!("collinear -> {}", col.map(|_| "fit".to_string()).unwrap_or_else(|e| e.to_string())));

    // paper-scale run through the binary
    let dir = tempfile::tempdir().unwrap();
    let dgp = scale_dgp();
    generate(&dgp).unwrap().save_csv(dir.path().join("data.csv")).unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, SCALE_CONFIG).unwrap();
    let bin = env!("CARGO_BIN_EXE_gapdecomp");
    let t = Instant::now();
    let v = std::process::Command::new(bin).args(["validate", "--config"]).arg(&config).output().unwrap();
    ok &= v.status.success();
    let out = dir.path().join("report.json");
    let r = std::process::Command::new(bin)
        .args(["run", "--iterations", "100", "--bootstrap", "50", "--format", "json", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let elapsed = t.elapsed();
    ok &= r.status.success();
    if !r.status.success() {
        notes.push(String::from_utf8_lossy(&r.stderr).into_owned());
    }
    let report = gapdecomp::cli::Report::from_json(&std::fs::read_to_string(&out).unwrap_or_default());
    let rows_used = report.as_ref().map_or(0, |r| r.rows_used);
    ok &= report.as_ref().is_ok_and(|r| r.decompositions.len() == 3 && r.rows_used >= 340_000);
    ok &= elapsed < Duration::from_secs(600);
    notes.push(format!("validate + run on {rows_used} rows, 3 comparisons: {elapsed:.1?}"));
    verdict(10, "robustness and scale", ok, notes.join("; "));
}

const SCALE_CONFIG: &str = r#"
data = "data.csv"
[model]
outcome = "computer"
group = "caste"
reference_group = "Others"
comparison_groups = ["ST", "SC", "OBC"]
weight = "weight"
covariates = [
    { name = "age" },
    { name = "female", kind = "categorical", reference = "0" },
    { name = "education" },
    { name = "log_income" },
    { name = "sector", kind = "categorical", reference = "Rural" },
    { name = "occupation", kind = "categorical", reference = "SEA" },
    { name = "state", kind = "categorical" },
]
[[model.filters]]
column = "age"
min = 15
max = 59
[decomp]
seed = 2017
"#;

/// Four groups of the published sizes with covariate distributions loosely
/// shaped on the published descriptive table.
fn scale_dgp() -> DgpSpec {
    let states: Vec<String> = (1..=20).map(|i| format!("S{i:02}")).collect();
    let state_beta: Vec<f64> = (0..20).map(|i| ((i % 5) as f64 - 2.0) * 0.05).collect();
    let occ = |p: [f64; 6]| p.to_vec();
    let g = |label: &str, n, edu: f64, inc: f64, urban: f64, o: [f64; 6]| {
        let mut gr = group(
            label,
            n,
            vec![normal(34.5, 11.0), normal(edu, 4.5), normal(inc, 0.6)],
            vec![vec![0.49, 0.51], vec![1.0 - urban, urban], occ(o), vec![0.05; 20]],
        );
        gr.weights = WeightScheme::Uniform { min: 0.2, max: 3.0 };
        gr
    };
    DgpSpec {
        seed: 349_914,
        outcome: "computer".into(),
        group_column: "caste".into(),
        weight_column: Some("weight".into()),
        link: LinkFunction::Probit,
        numeric: vec!["age".into(), "education".into(), "log_income".into()],
        categorical: vec![
            gapdecomp::synth::CategoricalVar { name: "female".into(), levels: vec!["0".into(), "1".into()] },
            gapdecomp::synth::CategoricalVar { name: "sector".into(), levels: vec!["Rural".into(), "Urban".into()] },
            gapdecomp::synth::CategoricalVar {
                name: "occupation".into(),
                levels: ["SEA", "SENA", "RSW", "CWA", "CWNA", "OW"].map(String::from).to_vec(),
            },
            gapdecomp::synth::CategoricalVar { name: "state".into(), levels: states },
        ],
        beta: BetaSpec {
            intercept: -8.5,
            numeric: vec![0.004, 0.08, 0.85],
            categorical: vec![
                vec![0.0, 0.05],
                vec![0.0, 0.3],
                vec![0.0, 0.25, 0.3, -0.2, -0.2, 0.15],
                state_beta,
            ],
        },
        groups: vec![
            g("Others", 108_700, 9.6, 7.8, 0.44, [0.27, 0.29, 0.25, 0.06, 0.08, 0.05]),
            g("ST", 50_400, 6.4, 7.26, 0.12, [0.40, 0.12, 0.09, 0.18, 0.17, 0.04]),
            g("SC", 59_000, 7.0, 7.4, 0.23, [0.22, 0.16, 0.16, 0.20, 0.22, 0.04]),
            g("OBC", 144_900, 7.9, 7.5, 0.30, [0.32, 0.24, 0.16, 0.09, 0.14, 0.05]),
        ],
    }
}

fn main() {
    let criteria: [(&str, fn()); 10] = [
        ("c01_arithmetic_fidelity", c01_arithmetic_fidelity),
        ("c02_gradient_hessian_finite_differences", c02_gradient_hessian_finite_differences),
        ("c03_probit_recovery", c03_probit_recovery),
        ("c04_telescoping", c04_telescoping),
        ("c05_linear_reduction", c05_linear_reduction),
        ("c06_oracle_equivalence", c06_oracle_equivalence),
        ("c07_engineered_gap", c07_engineered_gap),
        ("c08_bootstrap_sanity", c08_bootstrap_sanity),
        ("c09_determinism", c09_determinism),
        ("c10_robustness_and_scale", c10_robustness_and_scale),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for (name, f) in criteria {
        if !filters.is_empty() && !filters.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        ran += 1;
        let t = Instant::now();
        VERDICT_FAILED.store(false, std::sync::atomic::Ordering::SeqCst);
        if std::panic::catch_unwind(f).is_err() {
            println!("[FAIL] {name} did not complete");
            failed.push(name);
        } else if VERDICT_FAILED.load(std::sync::atomic::Ordering::SeqCst) {
            failed.push(name);
        }
        println!("       ({name}: {:.1?})", t.elapsed());
    }
    println!("\nacceptance: {} of {ran} criteria passed", ran - failed.len());
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
