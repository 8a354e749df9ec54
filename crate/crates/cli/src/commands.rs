use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use meandim_core::config::{load_versioned, parse_versioned, LoadedSystem, MeasureSpec, PotentialConfig, PsiConfig, Scenario, SystemConfig};
use meandim_core::covering::{pressure_profile, CoverOptions, SearchMode};
use meandim_core::harness::{
    example_hilbert, hilbert_eps_grid, selftest, verify_chain, CheckStatus, ChainReport, HarnessOptions,
};
use meandim_core::hausdorff::{mean_hausdorff_profile, ContentOptions, MetricKind};
use meandim_core::info::{rate_distortion, rdim_estimate, BaOptions, Codebook};
use meandim_core::measures::{frostman_measure, measure_to_json, FrostmanFamily};
use meandim_core::nerve::{mdim_inf_rates, mdim_profile};
use meandim_core::tiling::{equivariance_check_exact, tiling_for};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::output::{manifest_path, write_csv, write_json, Manifest, Status};
use crate::{CodebookArg, Command, FamilyArg, Global, MetricArg, Mode, VariantArg};

/// Largest Frostman constraint violation and duality gap accepted as a pass.
const LP_TOLERANCE: f64 = 1e-9;
/// Bounds checked by `example-hilbert`: slope ceiling and pressure-ratio window.
const HILBERT_SLOPE_MAX: f64 = 1.1;
const HILBERT_RATIO: (f64, f64) = (1.6, 2.3);

pub fn run(global: &Global, command: &Command) -> Result<Status> {
    match command {
        Command::Cover { system, phi, eps, n, mode, out } => cover(global, system, phi, eps, *n, *mode, out.as_deref()),
        Command::Hausdorff { system, phi, eps, n, metric, grain, mode, out } => {
            hausdorff(global, system, phi, eps, *n, *metric, grain, *mode, out.as_deref())
        }
        Command::Widim { system, phi, eps, n, variant, exhaustive_sets, out } => {
            widim(global, system, phi, eps, *n, *variant, *exhaustive_sets, out.as_deref())
        }
        Command::Rd { system, measure, n, eps, codebook, codebook_file, out } => {
            rd(global, system, measure, n, eps, *codebook, codebook_file.as_deref(), out.as_deref())
        }
        Command::Frostman { system, s, delta, grain, family, out } => {
            frostman(global, system, *s, *delta, *grain, *family, out.as_deref())
        }
        Command::Tiling { system, psi, point, horizon, shift, out } => {
            tiling(global, system, psi, point, *horizon, *shift, out.as_deref())
        }
        Command::VerifyChain { scenario, n, eps, out_dir } => verify(global, scenario, *n, *eps, out_dir.as_deref()),
        Command::ExampleHilbert { levels, period, window, k, grid, out_dir } => {
            hilbert(*levels, *period, *window, k, *grid, out_dir)
        }
        Command::Selftest { out } => run_selftest(global, out.as_deref()),
    }
}

fn load_config<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let parsed = if arg.trim_start().starts_with('{') {
        parse_versioned(arg)
    } else {
        load_versioned(Path::new(arg))
    };
    parsed.with_context(|| format!("loading {what} config {arg:?}"))
}

fn load_system(global: &Global, arg: &str) -> Result<(SystemConfig, LoadedSystem)> {
    let cfg: SystemConfig = load_config(arg, "system")?;
    let loaded = cfg.build(global.budget)?;
    Ok((cfg, loaded))
}

fn search_mode(mode: Mode) -> SearchMode {
    match mode {
        Mode::Exact => SearchMode::Exact,
        Mode::Greedy => SearchMode::Greedy,
    }
}

fn finish(manifest: &mut Manifest, out: Option<&Path>) -> Result<Status> {
    if let Some(p) = out {
        let name = p.file_name().map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into_owned());
        manifest.outputs.insert(0, name);
        manifest.write(&manifest_path(p))?;
    }
    Ok(manifest.status)
}

#[derive(Serialize)]
struct CoverRow {
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    log_cov_bits: f64,
    rate: f64,
    mode: &'static str,
}

fn cover(global: &Global, system: &str, phi: &str, eps: &[f64], n: usize, mode: Mode, out: Option<&Path>) -> Result<Status> {
    let (sys_cfg, loaded) = load_system(global, system)?;
    let phi_cfg: PotentialConfig = load_config(phi, "potential")?;
    let potential = phi_cfg.build(&loaded)?;
    let opts = CoverOptions { mode: search_mode(mode), ..CoverOptions::default() };
    let mut profile = pressure_profile(&loaded.system, &potential, eps, n, &opts)?;
    profile.rows.sort_by(|a, b| a.n.cmp(&b.n).then(b.eps.total_cmp(&a.eps)));
    let label = if mode == Mode::Exact { "exact" } else { "greedy" };
    let rows: Vec<CoverRow> = profile
        .rows
        .iter()
        .map(|r| CoverRow { n: r.n, eps: r.eps, log_cov_bits: r.log_cov, rate: r.rate, mode: label })
        .collect();
    write_csv(out, &rows)?;
    let summary: Vec<Value> = profile
        .eps_values()
        .into_iter()
        .map(|e| json!({"eps": e, "inf_rate": profile.inf_rate(e), "last_rate": profile.last_rate(e), "saturated": profile.saturated(e)}))
        .collect();
    let mut m = Manifest::new("cover", json!({"system": sys_cfg, "potential": phi_cfg, "eps": eps, "N": n, "mode": label}));
    m.summary = json!({"pressure": summary});
    finish(&mut m, out)
}

#[derive(Serialize)]
struct HausdorffCsvRow {
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    metric: MetricKind,
    grain: f64,
    dim: f64,
    rate: f64,
    exact: bool,
}

#[allow(clippy::too_many_arguments)]
fn hausdorff(
    global: &Global,
    system: &str,
    phi: &str,
    eps: &[f64],
    n: usize,
    metric: MetricArg,
    grain: &str,
    mode: Mode,
    out: Option<&Path>,
) -> Result<Status> {
    let (sys_cfg, loaded) = load_system(global, system)?;
    let phi_cfg: PotentialConfig = load_config(phi, "potential")?;
    let potential = phi_cfg.build(&loaded)?;
    let grain = match grain {
        "auto" => None,
        g => Some(g.parse::<f64>().with_context(|| format!("grain {g:?} is neither a number nor `auto`"))?),
    };
    let kind = match metric {
        MetricArg::Max => MetricKind::Max,
        MetricArg::Avg => MetricKind::Average,
    };
    let opts = ContentOptions { mode: search_mode(mode), ..ContentOptions::default() };
    let mut rows = mean_hausdorff_profile(&loaded.system, &potential, eps, n, kind, grain, &opts)?;
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(b.eps.total_cmp(&a.eps)));
    let csv_rows: Vec<HausdorffCsvRow> = rows
        .iter()
        .map(|r| HausdorffCsvRow { n: r.n, eps: r.eps, metric: r.metric, grain: r.grain, dim: r.dim, rate: r.rate, exact: r.exact })
        .collect();
    write_csv(out, &csv_rows)?;
    let mut m = Manifest::new(
        "hausdorff",
        json!({"system": sys_cfg, "potential": phi_cfg, "eps": eps, "N": n, "metric": kind, "grain": grain, "mode": search_mode(mode)}),
    );
    m.summary = json!({"grain_used": rows.first().map(|r| r.grain)});
    finish(&mut m, out)
}

#[derive(Serialize)]
struct WidimRow {
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    variant: &'static str,
    widim: f64,
    rate: f64,
}

#[allow(clippy::too_many_arguments)]
fn widim(
    global: &Global,
    system: &str,
    phi: &str,
    eps: &[f64],
    n: usize,
    variant: VariantArg,
    exhaustive_sets: usize,
    out: Option<&Path>,
) -> Result<Status> {
    let (sys_cfg, loaded) = load_system(global, system)?;
    let phi_cfg: PotentialConfig = load_config(phi, "potential")?;
    let potential = phi_cfg.build(&loaded)?;
    let mut rows = mdim_profile(&loaded.system, &potential, eps, n, exhaustive_sets)?;
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(b.eps.total_cmp(&a.eps)));
    let small = variant == VariantArg::Small;
    let label = if small { "small" } else { "standard" };
    let csv_rows: Vec<WidimRow> = rows
        .iter()
        .map(|r| {
            let (w, rate) = if small { (r.small, r.small_rate) } else { (r.standard, r.standard_rate) };
            WidimRow { n: r.n, eps: r.eps, variant: label, widim: w, rate }
        })
        .collect();
    write_csv(out, &csv_rows)?;
    let inf: Vec<Value> = mdim_inf_rates(&rows)
        .into_iter()
        .map(|(e, s, t)| json!({"eps": e, "inf_rate": if small { s } else { t }}))
        .collect();
    let mut m = Manifest::new(
        "widim",
        json!({"system": sys_cfg, "potential": phi_cfg, "eps": eps, "N": n, "variant": label, "exhaustive_sets": exhaustive_sets}),
    );
    m.summary = json!({"upper_bound": true, "inf_rates": inf});
    finish(&mut m, out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    tuples: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct RdRow {
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    rate: f64,
    distortion: f64,
    slope_param: f64,
    iterations: usize,
    converged: bool,
}

#[allow(clippy::too_many_arguments)]
fn rd(
    global: &Global,
    system: &str,
    measure: &str,
    ns: &[usize],
    eps: &[f64],
    codebook: CodebookArg,
    codebook_file: Option<&Path>,
    out: Option<&Path>,
) -> Result<Status> {
    let (sys_cfg, loaded) = load_system(global, system)?;
    let spec: MeasureSpec = load_config(measure, "measure")?;
    let mu = spec.build(&loaded)?;
    let sys = &loaded.system;
    let explicit = match (codebook, codebook_file) {
        (CodebookArg::File, Some(p)) => {
            let f: CodebookFile = load_versioned(p).with_context(|| format!("loading codebook {}", p.display()))?;
            let tuples = f
                .tuples
                .iter()
                .map(|t| t.iter().map(|id| sys.index_of(id).with_context(|| format!("unknown point id {id:?}"))).collect())
                .collect::<Result<Vec<Vec<usize>>>>()?;
            Some(tuples)
        }
        (CodebookArg::File, None) => bail!("--codebook file needs --codebook-file"),
        (_, Some(_)) => bail!("--codebook-file is only used with --codebook file"),
        _ => None,
    };
    let book = match codebook {
        CodebookArg::Orbit => Codebook::Orbit,
        CodebookArg::Full => Codebook::Full,
        CodebookArg::File => Codebook::Explicit(explicit.unwrap_or_default()),
    };
    let opts = BaOptions::default();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut ok = true;
    for &n in ns {
        let curve = rate_distortion(sys, &mu, n, eps, &book, &opts)?;
        // An infinite rate marks a target below the least achievable distortion, not a failure.
        ok &= curve.rows.iter().all(|r| r.converged || r.rate == f64::INFINITY);
        let est = rdim_estimate(&curve).ok();
        summary.push(json!({"N": n, "rdim": est}));
        for r in curve.rows.iter().rev() {
            rows.push(RdRow {
                n,
                eps: r.eps,
                rate: r.rate,
                distortion: r.distortion,
                slope_param: r.slope_param,
                iterations: r.iterations,
                converged: r.converged,
            });
        }
    }
    write_csv(out, &rows)?;
    let book_label = match codebook {
        CodebookArg::Orbit => "orbit",
        CodebookArg::Full => "full",
        CodebookArg::File => "file",
    };
    let mut m = Manifest::new(
        "rd",
        json!({"system": sys_cfg, "measure": spec, "N": ns, "eps": eps, "codebook": book_label, "codebook_file": codebook_file}),
    );
    m.status = Status::from_ok(ok);
    m.summary = json!({"all_converged": ok, "curves": summary});
    finish(&mut m, out)
}

fn frostman(
    global: &Global,
    system: &str,
    s: f64,
    delta: f64,
    grain: f64,
    family: FamilyArg,
    out: Option<&Path>,
) -> Result<Status> {
    let (sys_cfg, loaded) = load_system(global, system)?;
    let sys = &loaded.system;
    let fam = match family {
        FamilyArg::Balls => FrostmanFamily::Balls,
        FamilyArg::Subsets => FrostmanFamily::Subsets,
    };
    let r = frostman_measure(sys.dist(), s, delta, grain, fam)?;
    let ok = r.max_violation <= LP_TOLERANCE && r.duality_gap() <= LP_TOLERANCE;
    let ids = sys.ids();
    let constraints: Vec<Value> = r
        .constraint_sets
        .iter()
        .zip(&r.cover_weights)
        .filter(|(_, w)| **w > 0.0)
        .map(|(set, w)| json!({"set": set.iter().map(|&i| &ids[i]).collect::<Vec<_>>(), "weight": w}))
        .collect();
    let mass: serde_json::Map<String, Value> = ids.iter().cloned().zip(r.mass.iter().map(|&v| json!(v))).collect();
    let body = json!({
        "s": s,
        "delta": delta,
        "grain": grain,
        "family": fam,
        "lp_value": r.lp_value,
        "dual_cover_value": r.dual_cover_value,
        "duality_gap": r.duality_gap(),
        "max_violation": r.max_violation,
        "normalizable": r.normalizable,
        "mass": mass,
        "measure": r.measure.as_ref().map(|mu| measure_to_json(sys, mu)).transpose()?,
        "dual_cover": constraints,
        "constraints": r.constraint_sets.len(),
    });
    match out {
        Some(p) => write_json(p, &body)?,
        None => println!("{}", serde_json::to_string_pretty(&body)?),
    }
    let mut m = Manifest::new("frostman", json!({"system": sys_cfg, "s": s, "delta": delta, "grain": grain, "family": fam}));
    m.status = Status::from_ok(ok);
    m.summary = json!({"lp_value": r.lp_value, "duality_gap": r.duality_gap(), "max_violation": r.max_violation});
    finish(&mut m, out)
}

fn tiling(
    global: &Global,
    system: &str,
    psi: &str,
    point: &str,
    horizon: i64,
    shift: Option<i64>,
    out: Option<&Path>,
) -> Result<Status> {
    let (sys_cfg, loaded) = load_system(global, system)?;
    let psi_cfg: PsiConfig = load_config(psi, "marker")?;
    let marker = psi_cfg.build(&loaded)?;
    let sys = &loaded.system;
    let x = sys.index_of(point).with_context(|| format!("unknown point id {point:?}"))?;
    let chart = tiling_for(sys, &marker, x, horizon)?;
    let equivariance = shift.map(|n| equivariance_check_exact(sys, &marker, x, n, horizon)).transpose()?;
    let ok = equivariance.as_ref().is_none_or(|e| e.exact_match);
    let body = json!({"point_id": point, "chart": chart, "equivariance": equivariance});
    match out {
        Some(p) => write_json(p, &body)?,
        None => println!("{}", serde_json::to_string_pretty(&body)?),
    }
    let mut m = Manifest::new("tiling", json!({"system": sys_cfg, "psi": psi_cfg, "point": point, "horizon": horizon, "shift": shift}));
    m.status = Status::from_ok(ok);
    m.summary = json!({
        "intervals": chart.intervals.len(),
        "certified_window": chart.certified_window,
        "equivariant": equivariance.as_ref().map(|e| e.exact_match),
    });
    finish(&mut m, out)
}

#[derive(Serialize)]
struct CellRow {
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    pressure_ratio: Option<f64>,
    pressure_exact: bool,
    hausdorff: Option<f64>,
    hausdorff_exact: bool,
    widim_small: Option<f64>,
    widim_standard: Option<f64>,
    variation: Option<f64>,
}

#[derive(Serialize)]
struct CheckRow<'a> {
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    name: &'a str,
    lhs: f64,
    rhs: f64,
    defect: f64,
    tolerance: f64,
    guaranteed: bool,
    status: CheckStatus,
    repro: &'a str,
}

#[derive(Serialize)]
struct MeasureRow<'a> {
    #[serde(rename = "N")]
    n: usize,
    eps: f64,
    measure: &'a str,
    integral: f64,
    rate: f64,
    rdim_plus_integral: f64,
}

#[derive(Serialize)]
struct RdimRow<'a> {
    measure: &'a str,
    #[serde(rename = "N")]
    n: usize,
    integral: f64,
    upper: Option<f64>,
    lower: Option<f64>,
    fit_slope: Option<f64>,
}

fn restrict(report: &mut ChainReport, n: Option<usize>) {
    if let Some(n) = n {
        report.cells.retain(|c| c.n == n);
        report.rdim.retain(|r| r.n == n);
        report.pressure_inf = report
            .pressure_inf
            .iter()
            .filter_map(|&(e, _)| {
                report.cells.iter().filter(|c| c.eps == e).filter_map(|c| c.pressure_ratio).reduce(f64::min).map(|p| (e, p))
            })
            .collect();
    }
}

fn verify(global: &Global, scenario: &Path, n: Option<usize>, eps: Option<f64>, out_dir: Option<&Path>) -> Result<Status> {
    let mut sc = Scenario::load_resolved(scenario, global.budget)
        .with_context(|| format!("loading scenario {}", scenario.display()))?;
    if let Some(seed) = global.seed {
        sc.seed = seed;
    }
    if let Some(n) = n {
        if n == 0 {
            bail!("--N must be positive");
        }
        sc.n_max = n;
    }
    if let Some(e) = eps {
        if !(e > 0.0) {
            bail!("--eps must be positive");
        }
        sc.eps = vec![e];
    }
    let opts = HarnessOptions { point_budget: global.budget, ..HarnessOptions::default() };
    let mut report = verify_chain(&sc, &opts)?;
    restrict(&mut report, n);

    let dir: PathBuf = out_dir.map_or_else(|| sc.output_dir.clone(), Path::to_path_buf);
    let cells: Vec<CellRow> = report
        .cells
        .iter()
        .map(|c| CellRow {
            n: c.n,
            eps: c.eps,
            pressure_ratio: c.pressure_ratio,
            pressure_exact: c.pressure_exact,
            hausdorff: c.hausdorff,
            hausdorff_exact: c.hausdorff_exact,
            widim_small: c.widim_small,
            widim_standard: c.widim_standard,
            variation: c.variation,
        })
        .collect();
    let checks: Vec<CheckRow> = report
        .cells
        .iter()
        .flat_map(|c| {
            c.checks.iter().map(move |k| CheckRow {
                n: c.n,
                eps: c.eps,
                name: &k.name,
                lhs: k.lhs,
                rhs: k.rhs,
                defect: k.defect,
                tolerance: k.tolerance,
                guaranteed: k.guaranteed,
                status: k.status,
                repro: &k.repro,
            })
        })
        .collect();
    let measures: Vec<MeasureRow> = report
        .cells
        .iter()
        .flat_map(|c| {
            c.measures.iter().map(move |m| MeasureRow {
                n: c.n,
                eps: c.eps,
                measure: &m.name,
                integral: m.integral,
                rate: m.rate,
                rdim_plus_integral: m.rdim_plus_integral,
            })
        })
        .collect();
    let rdim: Vec<RdimRow> = report
        .rdim
        .iter()
        .map(|r| RdimRow {
            measure: &r.measure,
            n: r.n,
            integral: r.integral,
            upper: r.estimate.as_ref().map(|e| e.upper),
            lower: r.estimate.as_ref().map(|e| e.lower),
            fit_slope: r.estimate.as_ref().map(|e| e.fit_slope),
        })
        .collect();

    let files = ["cells.csv", "checks.csv", "measures.csv", "rdim.csv", "report.json"];
    write_csv(Some(&dir.join(files[0])), &cells)?;
    write_csv(Some(&dir.join(files[1])), &checks)?;
    write_csv(Some(&dir.join(files[2])), &measures)?;
    write_csv(Some(&dir.join(files[3])), &rdim)?;
    write_json(&dir.join(files[4]), &report)?;

    let failures = report.failures();
    for k in report.checks().filter(|k| k.status == CheckStatus::Failure) {
        println!("FAILURE {} lhs={} rhs={} defect={}: {}", k.name, k.lhs, k.rhs, k.defect, k.repro);
    }
    let total = report.checks().count();
    println!("{}: {total} checks, {failures} failures, {} slack", report.scenario, report.slack());

    let mut m = Manifest::new(
        "verify-chain",
        json!({
            "scenario": scenario.display().to_string(),
            "seed": sc.seed,
            "system": sc.system_config,
            "potential": sc.potential_config,
            "measures": sc.measures.iter().map(|(name, _)| name).collect::<Vec<_>>(),
            "eps": sc.eps,
            "n_max": sc.n_max,
            "N_filter": n,
            "modules": sc.modules,
        }),
    );
    m.outputs = files.iter().map(|f| f.to_string()).collect();
    m.status = Status::from_ok(failures == 0);
    m.summary = json!({"checks": total, "failures": failures, "slack": report.slack(), "pressure_inf": report.pressure_inf});
    m.write(&dir.join("manifest.json"))?;
    Ok(m.status)
}

#[derive(Serialize)]
struct HilbertCsvRow {
    k: usize,
    integral: f64,
    expected_integral: f64,
    bias: f64,
    within_bias: bool,
    rdim_slope: f64,
    rdim_upper: f64,
    sum: f64,
    target: f64,
}

#[derive(Serialize)]
struct CurveRow {
    k: usize,
    eps: f64,
    rate: f64,
    distortion: f64,
    converged: bool,
}

fn hilbert(levels: usize, period: usize, window: usize, ks: &[usize], grid: usize, dir: &Path) -> Result<Status> {
    let eps_grid = hilbert_eps_grid(levels, grid);
    let report = example_hilbert(levels, period, window, ks, &eps_grid, &BaOptions::default())?;
    let rows: Vec<HilbertCsvRow> = report
        .rows
        .iter()
        .map(|r| HilbertCsvRow {
            k: r.k,
            integral: r.integral,
            expected_integral: r.expected_integral,
            bias: r.bias,
            within_bias: r.within_bias,
            rdim_slope: r.rdim.fit_slope,
            rdim_upper: r.rdim.upper,
            sum: r.sum,
            target: r.target,
        })
        .collect();
    let curves: Vec<CurveRow> = report
        .rows
        .iter()
        .flat_map(|r| {
            r.curve.rows.iter().map(move |c| CurveRow { k: r.k, eps: c.eps, rate: c.rate, distortion: c.distortion, converged: c.converged })
        })
        .collect();
    let files = ["hilbert.csv", "rd_curves.csv", "report.json"];
    write_csv(Some(&dir.join(files[0])), &rows)?;
    write_csv(Some(&dir.join(files[1])), &curves)?;
    write_json(&dir.join(files[2]), &report)?;

    let bias_ok = report.rows.iter().all(|r| r.within_bias);
    let slope_ok = report.rows.iter().all(|r| r.rdim.fit_slope <= HILBERT_SLOPE_MAX);
    let ratio = report.pressure.ratio;
    let ratio_ok = (HILBERT_RATIO.0..=HILBERT_RATIO.1).contains(&ratio);
    for r in &report.rows {
        println!(
            "k={}: integral {:.6} (expected {:.6}), rdim slope {:.4}, sum {:.4} (target {:.4})",
            r.k, r.integral, r.expected_integral, r.rdim.fit_slope, r.sum, r.target
        );
    }
    println!("pressure ratio at eps={}: {ratio:.4}", report.pressure.eps);

    let mut m = Manifest::new(
        "example-hilbert",
        json!({"levels": levels, "period": period, "window": window, "k": ks, "eps_grid": eps_grid}),
    );
    m.outputs = files.iter().map(|f| f.to_string()).collect();
    m.status = Status::from_ok(bias_ok && slope_ok && ratio_ok);
    m.summary = json!({
        "integrals_within_bias": bias_ok,
        "slopes_below": {"bound": HILBERT_SLOPE_MAX, "ok": slope_ok},
        "pressure_ratio": {"value": ratio, "range": [HILBERT_RATIO.0, HILBERT_RATIO.1], "ok": ratio_ok},
    });
    m.write(&dir.join("manifest.json"))?;
    Ok(m.status)
}

fn run_selftest(global: &Global, out: Option<&Path>) -> Result<Status> {
    let seed = global.seed.unwrap_or(0);
    let items = selftest(seed)?;
    for it in &items {
        println!("{} {}: {}", if it.pass { "PASS" } else { "FAIL" }, it.name, it.detail);
    }
    let ok = items.iter().all(|i| i.pass);
    if let Some(p) = out {
        write_json(p, &items)?;
    }
    let mut m = Manifest::new("selftest", json!({"seed": seed}));
    m.status = Status::from_ok(ok);
    m.summary = json!({"items": items.len(), "failed": items.iter().filter(|i| !i.pass).count()});
    finish(&mut m, out)
}
