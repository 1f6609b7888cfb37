//! Command-line front end. All entropies and logarithms are natural (nats).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::entropy::{
    cutoff_time, entropic_time, entropy_of, h_asymptotic, multinomial_diff_pmf, normal_set_member, bulk_set_member,
    sample_normal, srw_entropy, varentropy_of, y_pmf_exact, NormalSetParams, PmfTable,
};
use crate::error::{Error, Result};
use crate::exact::{collision_exact, tv_curve, EvolveOptions, Evolver, DistVector, step_measure};
use crate::group::{sample_generator_set, GeneratorSet, GroupParams};
use crate::harness::{
    gcd_uniformity_check, parse_profile_csv, profile_csv, profile_json, regime_report, run_cutoff_scan,
    verify_cutoff, write_atomic, ExperimentConfig, VerifyParams,
};
use crate::rng::{derive_seed, stream};
use crate::walk::{ji_law_check, trajectory_rows, TRAJECTORY_CSV_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CELLS_FAILED: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DOMAIN: i32 = 65;
pub const EXIT_IO: i32 = 74;

/// Default directory for `cutoff-scan` output when `--out` is absent.
pub const OUT_DIR_ENV: &str = "DIHEDRAL_CUTOFF_OUT";

const TAG_CLI_GENERATORS: u64 = 0x636c_6967;
const LN2: f64 = std::f64::consts::LN_2;

#[derive(Parser, Debug)]
#[command(
    name = "dihedral-cutoff",
    version,
    about = "Random walks on dihedral groups D_n driven by random generator sets",
    long_about = "Random walks on dihedral groups D_n driven by random generator sets.\n\
                  All entropies and logarithms are natural (nats); --bits converts the display only."
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Emit one JSON document instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Upper bound on worker threads; results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress timing lines
    #[arg(long, global = true)]
    deterministic: bool,
    /// Show entropies in bits instead of nats (display only)
    #[arg(long, global = true)]
    bits: bool,
    /// Master seed (default 0; for cutoff-scan, overrides the config seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the walk and its auxiliary process; CSV trajectory statistics
    Simulate(SimulateArgs),
    /// Exact d_TV to uniform at one time by uniformization
    TvExact(TvExactArgs),
    /// Exact d_TV curve over a time grid
    TvCurve(TvCurveArgs),
    /// Exact entropies (nats) of SRW, Y or multinomial-difference laws
    Entropy(EntropyArgs),
    /// Solve k·h(t/k) = log N for t (natural log)
    EntropicTime(EntropicTimeArgs),
    /// Cutoff time t₀(k, |G|) and its regime
    CutoffTime(CutoffTimeArgs),
    /// Run a cutoff profile scan from a JSON config
    CutoffScan(CutoffScanArgs),
    /// Pass/fail reading of a cutoff profile CSV
    Verify(VerifyArgs),
    /// Binomial-law check of the step-usage counts |J_i|
    JiStats(JiStatsArgs),
    /// Uniformity of v·U mod n on the subgroup gcd(v, n)·Z_n
    GcdCheck(GcdCheckArgs),
    /// Normal-approximation set W^Normal and bulk set A
    NormalSet(NormalSetArgs),
}

#[derive(Args, Debug, Serialize)]
struct GensArgs {
    /// Rotation order n (group size 2n)
    #[arg(long)]
    n: Option<u64>,
    /// Number of generators, sampled from the seed
    #[arg(long)]
    k: Option<usize>,
    /// Generator set JSON; takes the place of --n/--k
    #[arg(long)]
    gens_file: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    gens: GensArgs,
    /// Horizon t
    /// Time t
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 1)]
    replicates: u64,
    /// Check X(t) against its auxiliary representation for every replicate
    #[arg(long)]
    check_identity: bool,
    /// Write the CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TvExactArgs {
    #[command(flatten)]
    gens: GensArgs,
    /// Time t
    #[arg(long)]
    t: f64,
    /// Truncated Poisson tail mass
    #[arg(long, default_value_t = crate::exact::spectral::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = crate::exact::spectral::DEFAULT_STEP_BUDGET)]
    step_budget: u64,
    /// Binary dump of the distribution at t
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct TvCurveArgs {
    #[command(flatten)]
    gens: GensArgs,
    /// Comma-separated strictly increasing times
    #[arg(long, value_delimiter = ',', conflicts_with = "alphas")]
    t_grid: Vec<f64>,
    /// Comma-separated multiples of the cutoff time t₀
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[arg(long, default_value_t = crate::exact::spectral::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = crate::exact::spectral::DEFAULT_STEP_BUDGET)]
    step_budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum EntropyMode {
    /// Continuous-time simple random walk on Z at time s
    Srw,
    /// Y after a number of steps, k_S coordinates
    Y,
    /// Difference of two independent Multinomial(N; uniform on d)
    Multidiff,
}

#[derive(Args, Debug, Serialize)]
struct EntropyArgs {
    #[arg(long, value_enum)]
    mode: EntropyMode,
    /// SRW time (mode srw)
    #[arg(long)]
    s: Option<f64>,
    /// Number of coordinates k_S (mode y)
    #[arg(long)]
    ks: Option<usize>,
    /// Number of reflection steps (mode y)
    #[arg(long)]
    steps: Option<usize>,
    /// Dimension (mode multidiff)
    #[arg(long)]
    d: Option<usize>,
    /// Multinomial trials (mode multidiff)
    #[arg(long = "N")]
    trials: Option<usize>,
    /// Write the pmf table as JSON (modes y, multidiff)
    #[arg(long)]
    pmf_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EntropicTimeArgs {
    #[arg(long)]
    k: u64,
    /// log N in nats
    #[arg(long = "logN", allow_negative_numbers = true)]
    log_n: f64,
    #[arg(long, default_value_t = crate::entropy::times::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct CutoffTimeArgs {
    #[arg(long)]
    k: u64,
    /// |G| = 2n
    #[arg(long)]
    group_size: u64,
}

#[derive(Args, Debug, Serialize)]
struct CutoffScanArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $DIHEDRAL_CUTOFF_OUT)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Sets both --eta-lo and --eta-hi
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eta_lo: Option<f64>,
    #[arg(long)]
    eta_hi: Option<f64>,
    #[arg(long, default_value_t = crate::harness::verify::DEFAULT_QUOTA)]
    quota: f64,
}

#[derive(Args, Debug, Serialize)]
struct JiStatsArgs {
    #[arg(long)]
    k: usize,
    /// Time t
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 2000)]
    trajectories: u64,
    #[arg(long, default_value_t = 3)]
    max_i: u64,
}

#[derive(Args, Debug, Serialize)]
struct GcdCheckArgs {
    #[arg(long)]
    n: u64,
    /// Comma-separated coefficients
    #[arg(long, value_delimiter = ',', required = true)]
    v: Vec<u64>,
    /// Monte Carlo draws; exhaustive enumeration when absent
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct NormalSetArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: f64,
    #[arg(long, default_value_t = crate::entropy::typical::DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    /// Comma-separated point to test for membership
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    point: Vec<f64>,
}

/// A finished subcommand: structured result, text body and exit code.
struct Report {
    result: Value,
    text: String,
    code: i32,
    /// Seed actually used, when it differs from the global flag.
    seed: Option<u64>,
}

impl Report {
    fn ok(result: Value, text: String) -> Self {
        Self {
            result,
            text,
            code: EXIT_OK,
            seed: None,
        }
    }
}

struct Ctx {
    seed: u64,
    bits: bool,
}

impl Ctx {
    fn nats(&self, x: f64) -> f64 {
        if self.bits {
            x / LN2
        } else {
            x
        }
    }

    fn unit(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_DOMAIN,
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn resolve_gens(args: &GensArgs, seed: u64) -> Result<(GroupParams, GeneratorSet)> {
    if let Some(path) = &args.gens_file {
        return GeneratorSet::from_json(&read_file(path)?);
    }
    let (Some(n), Some(k)) = (args.n, args.k) else {
        return Err(Error::Domain("need --gens-file or both --n and --k".into()));
    };
    let p = GroupParams::new(n)?;
    let gseed = derive_seed(seed, TAG_CLI_GENERATORS, 0);
    let gs = sample_generator_set(&p, k, &mut stream(gseed, 0))?.with_seed(gseed);
    Ok((p, gs))
}

fn kv(lines: &mut String, key: &str, value: impl std::fmt::Display) {
    lines.push_str(&format!("{key}={value}\n"));
}

fn run_simulate(a: &SimulateArgs, ctx: &Ctx) -> Result<Report> {
    let (p, gs) = resolve_gens(&a.gens, ctx.seed)?;
    let rows = trajectory_rows(&gs, &p, a.t, a.replicates, ctx.seed)?;
    let passed = rows.iter().filter(|r| r.identity_ok).count();
    let mut csv = format!("{TRAJECTORY_CSV_HEADER}\n");
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    let mut text = String::new();
    kv(&mut text, "n", p.n());
    kv(&mut text, "gens_hash", gs.content_hash());
    if let Some(out) = &a.out {
        write_atomic(out, csv.as_bytes())?;
        kv(&mut text, "csv", out.display());
    } else {
        text.push_str(&csv);
    }
    let mut result = json!({
        "n": p.n(),
        "k": gs.k(),
        "gens_hash": gs.content_hash(),
        "replicates": a.replicates,
        "rows": rows,
    });
    let mut code = EXIT_OK;
    if a.check_identity {
        kv(&mut text, "identity_check_passed", format!("{passed}/{}", rows.len()));
        result["identity_passed"] = json!(passed);
        if passed != rows.len() {
            code = EXIT_DOMAIN;
        }
    }
    Ok(Report {
        result,
        text,
        code,
        seed: None,
    })
}

fn evolve_opts(tol: f64, step_budget: u64) -> Result<EvolveOptions> {
    let opts = EvolveOptions { tol, step_budget };
    opts.check()?;
    Ok(opts)
}

fn run_tv_exact(a: &TvExactArgs, ctx: &Ctx) -> Result<Report> {
    let (p, gs) = resolve_gens(&a.gens, ctx.seed)?;
    let opts = evolve_opts(a.tol, a.step_budget)?;
    let ev = Evolver::new(&DistVector::identity(&p), &step_measure(&gs, &p), &p);
    let out = ev.evolve(a.t, opts)?;
    let tv = crate::exact::tv_exact(&out.dist);
    let coll = collision_exact(&out.dist);
    if let Some(path) = &a.dump {
        let mut buf = Vec::new();
        out.dist.write_dump(&mut buf).map_err(|e| Error::io(path, e))?;
        write_atomic(path, &buf)?;
    }
    let mut text = String::new();
    kv(&mut text, "n", p.n());
    kv(&mut text, "gens_hash", gs.content_hash());
    kv(&mut text, "t", a.t);
    kv(&mut text, "tv", tv);
    kv(&mut text, "collision", coll);
    kv(&mut text, "tail_mass", out.tail_mass);
    kv(&mut text, "steps_used", out.steps_used);
    kv(&mut text, "mass_deficit", out.mass_deficit);
    Ok(Report::ok(
        json!({
            "n": p.n(),
            "k": gs.k(),
            "gens_hash": gs.content_hash(),
            "t": a.t,
            "tv": tv,
            "collision": coll,
            "tail_mass": out.tail_mass,
            "steps_used": out.steps_used,
            "mass_deficit": out.mass_deficit,
        }),
        text,
    ))
}

fn run_tv_curve(a: &TvCurveArgs, ctx: &Ctx) -> Result<Report> {
    let (p, gs) = resolve_gens(&a.gens, ctx.seed)?;
    let opts = evolve_opts(a.tol, a.step_budget)?;
    let grid: Vec<f64> = if !a.alphas.is_empty() {
        let t0 = cutoff_time(gs.k() as u64, p.size())?.t0;
        a.alphas.iter().map(|x| x * t0).collect()
    } else if !a.t_grid.is_empty() {
        a.t_grid.clone()
    } else {
        return Err(Error::Domain("need --t-grid or --alphas".into()));
    };
    let curve = tv_curve(&gs, &p, &grid, opts)?;
    let mut csv = String::from("t,tv,tail_mass,steps_used\n");
    for c in &curve {
        csv.push_str(&format!("{},{},{},{}\n", c.t, c.tv, c.tail_mass, c.steps_used));
    }
    let mut text = String::new();
    kv(&mut text, "n", p.n());
    kv(&mut text, "gens_hash", gs.content_hash());
    if let Some(out) = &a.out {
        write_atomic(out, csv.as_bytes())?;
        kv(&mut text, "csv", out.display());
    } else {
        text.push_str(&csv);
    }
    Ok(Report::ok(
        json!({ "n": p.n(), "k": gs.k(), "gens_hash": gs.content_hash(), "curve": curve }),
        text,
    ))
}

fn pmf_summary(pmf: &PmfTable, ctx: &Ctx, out: Option<&PathBuf>) -> Result<(Value, String)> {
    let h = entropy_of(pmf);
    let v = varentropy_of(pmf);
    if let Some(path) = out {
        let body = serde_json::to_string_pretty(&pmf.to_json())?;
        write_atomic(path, body.as_bytes())?;
    }
    let mut text = String::new();
    kv(&mut text, "entropy", ctx.nats(h));
    kv(&mut text, "varentropy", ctx.nats(ctx.nats(v)));
    kv(&mut text, "support", pmf.len());
    kv(&mut text, "unit", ctx.unit());
    Ok((
        json!({
            "entropy": ctx.nats(h),
            "varentropy": ctx.nats(ctx.nats(v)),
            "support": pmf.len(),
            "exact": pmf.is_exact(),
            "unit": ctx.unit(),
        }),
        text,
    ))
}

fn need<T: Copy>(x: Option<T>, flag: &str, mode: &str) -> Result<T> {
    x.ok_or_else(|| Error::Domain(format!("--mode {mode} needs {flag}")))
}

fn run_entropy(a: &EntropyArgs, ctx: &Ctx) -> Result<Report> {
    let (mut result, mut text) = match a.mode {
        EntropyMode::Srw => {
            let s = need(a.s, "--s", "srw")?;
            if !(s >= 0.0) || !s.is_finite() {
                return Err(Error::Domain(format!("s must be finite and >= 0, got {s}")));
            }
            let e = srw_entropy(s);
            let asym = h_asymptotic(s);
            let mut text = String::new();
            kv(&mut text, "entropy", ctx.nats(e.value));
            kv(&mut text, "asymptotic", ctx.nats(asym.value));
            kv(&mut text, "truncation_error", ctx.nats(e.truncation_error));
            kv(&mut text, "unit", ctx.unit());
            (
                json!({
                    "entropy": ctx.nats(e.value),
                    "asymptotic": ctx.nats(asym.value),
                    "truncation_error": ctx.nats(e.truncation_error),
                    "unit": ctx.unit(),
                }),
                text,
            )
        }
        EntropyMode::Y => {
            let pmf = y_pmf_exact(need(a.ks, "--ks", "y")?, need(a.steps, "--steps", "y")?)?;
            pmf_summary(&pmf, ctx, a.pmf_out.as_ref())?
        }
        EntropyMode::Multidiff => {
            let pmf = multinomial_diff_pmf(need(a.d, "--d", "multidiff")?, need(a.trials, "--N", "multidiff")?)?;
            pmf_summary(&pmf, ctx, a.pmf_out.as_ref())?
        }
    };
    result["mode"] = json!(a.mode);
    text.insert_str(0, &format!("mode={}\n", serde_json::to_value(a.mode)?.as_str().unwrap_or("")));
    Ok(Report::ok(result, text))
}

fn run_entropic_time(a: &EntropicTimeArgs) -> Result<Report> {
    let t = entropic_time(a.k, a.log_n, a.tol)?;
    let mut text = String::new();
    kv(&mut text, "t", t);
    Ok(Report::ok(json!({ "t": t, "k": a.k, "log_n": a.log_n }), text))
}

fn run_cutoff_time(a: &CutoffTimeArgs) -> Result<Report> {
    let ct = cutoff_time(a.k, a.group_size)?;
    let mut text = String::new();
    kv(&mut text, "t0", ct.t0);
    kv(&mut text, "regime", ct.label);
    kv(&mut text, "ratio", ct.ratio);
    for b in &ct.near_threshold {
        kv(&mut text, &format!("branch_{}", b.regime.label()), b.t0);
    }
    let mut result = serde_json::to_value(&ct)?;
    if a.group_size % 2 == 0 && crate::group::is_prime(a.group_size / 2) {
        result["regime_report"] = serde_json::to_value(regime_report(a.k, a.group_size / 2)?)?;
    }
    Ok(Report::ok(result, text))
}

fn run_scan(a: &CutoffScanArgs, ctx: &Ctx, explicit_seed: bool, threads: Option<usize>) -> Result<Report> {
    let mut cfg = ExperimentConfig::from_json(&read_file(&a.config)?)?;
    if explicit_seed {
        cfg.seed = ctx.seed;
    }
    let dir = match &a.out {
        Some(d) => d.clone(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .ok_or_else(|| Error::Domain(format!("need --out or ${OUT_DIR_ENV}")))?,
    };
    let profile = run_cutoff_scan(&cfg, threads)?;
    let csv_path = dir.join("profile.csv");
    let json_path = dir.join("profile.json");
    write_atomic(&csv_path, profile_csv(&profile, &cfg).as_bytes())?;
    write_atomic(&json_path, profile_json(&profile, &cfg).as_bytes())?;
    let mut text = String::new();
    kv(&mut text, "config_hash", &profile.config_hash);
    kv(&mut text, "rows", profile.rows.len());
    kv(&mut text, "failed_cells", profile.failed_cells);
    kv(&mut text, "rejections", profile.rejections);
    kv(&mut text, "csv", csv_path.display());
    kv(&mut text, "json", json_path.display());
    let code = if profile.failed_cells > 0 {
        EXIT_CELLS_FAILED
    } else {
        EXIT_OK
    };
    Ok(Report {
        result: json!({
            "config_hash": profile.config_hash,
            "config_seed": cfg.seed,
            "rows": profile.rows.len(),
            "failed_cells": profile.failed_cells,
            "rejections": profile.rejections,
            "csv": csv_path,
            "json": json_path,
        }),
        text,
        code,
        seed: Some(cfg.seed),
    })
}

fn run_verify(a: &VerifyArgs) -> Result<Report> {
    let rows = parse_profile_csv(&read_file(&a.profile)?)?;
    let mut params = VerifyParams {
        eps: a.eps,
        quota: a.quota,
        ..VerifyParams::default()
    };
    if let Some(eta) = a.eta {
        params.eta_lo = eta;
        params.eta_hi = eta;
    }
    params.eta_lo = a.eta_lo.unwrap_or(params.eta_lo);
    params.eta_hi = a.eta_hi.unwrap_or(params.eta_hi);
    let report = match verify_cutoff(&rows, params) {
        Ok(r) => r,
        Err(Error::MissingGrid(msg)) => {
            return Ok(Report {
                result: json!({ "pass": false, "missing_grid": msg, "cells": [] }),
                text: format!("pass=false\nmissing_grid={msg}\n"),
                code: EXIT_VERIFY_FAILED,
                seed: None,
            })
        }
        Err(e) => return Err(e),
    };
    let mut text = String::from("n,k,replicates,passed,pass,alpha_lo,alpha_hi,nearest_used,median_tv_lo,median_tv_hi\n");
    for c in &report.cells {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            c.n,
            c.k,
            c.replicates,
            c.passed,
            c.pass,
            c.alpha_lo,
            c.alpha_hi,
            c.nearest_used,
            c.median_tv_lo,
            c.median_tv_hi
        ));
    }
    kv(&mut text, "pass", report.pass);
    let code = if report.pass { EXIT_OK } else { EXIT_VERIFY_FAILED };
    Ok(Report {
        result: serde_json::to_value(&report)?,
        text,
        code,
        seed: None,
    })
}

fn run_ji_stats(a: &JiStatsArgs, ctx: &Ctx) -> Result<Report> {
    if a.k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let checks = ji_law_check(a.k, a.t, a.trajectories, a.max_i, ctx.seed)?;
    let mut text = String::from("i,probability,mean_observed,mean_expected,p_value,dof\n");
    for c in &checks {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.i, c.probability, c.mean_observed, c.mean_expected, c.p_value, c.dof
        ));
    }
    Ok(Report::ok(json!({ "checks": checks }), text))
}

fn run_gcd_check(a: &GcdCheckArgs, ctx: &Ctx) -> Result<Report> {
    let p = GroupParams::new(a.n)?;
    let r = gcd_uniformity_check(&p, &a.v, a.samples, ctx.seed)?;
    let mut text = String::new();
    kv(&mut text, "gamma", r.gamma);
    kv(&mut text, "exact", r.exact);
    kv(&mut text, "uniform", r.uniform);
    if let Some(pv) = r.p_value {
        kv(&mut text, "p_value", pv);
    }
    let counts: Vec<String> = r.counts.iter().map(u64::to_string).collect();
    kv(&mut text, "counts", counts.join(","));
    let code = if r.uniform { EXIT_OK } else { EXIT_DOMAIN };
    Ok(Report {
        result: serde_json::to_value(&r)?,
        text,
        code,
        seed: None,
    })
}

fn run_normal_set(a: &NormalSetArgs, ctx: &Ctx) -> Result<Report> {
    let params = NormalSetParams::new(a.d, a.m, a.delta)?;
    let mut rng = stream(ctx.seed, 0);
    let (mut in_w, mut in_a) = (0usize, 0usize);
    for _ in 0..a.draws {
        let x = sample_normal(&params, &mut rng);
        in_w += normal_set_member(&params, &x) as usize;
        in_a += bulk_set_member(&params, &x) as usize;
    }
    let frac = |c: usize| if a.draws == 0 { f64::NAN } else { c as f64 / a.draws as f64 };
    let (lo, hi) = params.log_density_bounds();
    let mut text = String::new();
    kv(&mut text, "log_det", params.log_det());
    kv(&mut text, "log_density_lo", lo);
    kv(&mut text, "log_density_hi", hi);
    kv(&mut text, "bulk_radius", params.bulk_radius());
    kv(&mut text, "frac_normal_set", frac(in_w));
    kv(&mut text, "frac_bulk_set", frac(in_a));
    let mut result = json!({
        "d": a.d,
        "m": a.m,
        "delta": a.delta,
        "log_det": params.log_det(),
        "log_density_bounds": [lo, hi],
        "bulk_radius": params.bulk_radius(),
        "draws": a.draws,
        "frac_normal_set": frac(in_w),
        "frac_bulk_set": frac(in_a),
    });
    if !a.point.is_empty() {
        if a.point.len() != a.d {
            return Err(Error::Domain(format!("--point has {} coordinates, d = {}", a.point.len(), a.d)));
        }
        let w = normal_set_member(&params, &a.point);
        let b = bulk_set_member(&params, &a.point);
        kv(&mut text, "point_in_normal_set", w);
        kv(&mut text, "point_in_bulk_set", b);
        result["point"] = json!({ "in_normal_set": w, "in_bulk_set": b });
    }
    Ok(Report::ok(result, text))
}

fn v<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("arguments serialize")
}

fn command_parts(cmd: &Command) -> (&'static str, Value) {
    match cmd {
        Command::Simulate(a) => ("simulate", v(a)),
        Command::TvExact(a) => ("tv-exact", v(a)),
        Command::TvCurve(a) => ("tv-curve", v(a)),
        Command::Entropy(a) => ("entropy", v(a)),
        Command::EntropicTime(a) => ("entropic-time", v(a)),
        Command::CutoffTime(a) => ("cutoff-time", v(a)),
        Command::CutoffScan(a) => ("cutoff-scan", v(a)),
        Command::Verify(a) => ("verify", v(a)),
        Command::JiStats(a) => ("ji-stats", v(a)),
        Command::GcdCheck(a) => ("gcd-check", v(a)),
        Command::NormalSet(a) => ("normal-set", v(a)),
    }
}

/// Everything a run writes: stdout, stderr and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() {
                (String::new(), rendered)
            } else {
                (rendered, String::new())
            };
            return Outcome { stdout, stderr, code };
        }
    };
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            return Outcome {
                stdout: String::new(),
                stderr: "error: --threads must be positive\n".into(),
                code: EXIT_USAGE,
            };
        }
        // a second build in the same process fails harmlessly
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let ctx = Ctx {
        seed: g.seed.unwrap_or(0),
        bits: g.bits,
    };
    let (name, args) = command_parts(&cli.command);
    let start = Instant::now();
    let report = match &cli.command {
        Command::Simulate(a) => run_simulate(a, &ctx),
        Command::TvExact(a) => run_tv_exact(a, &ctx),
        Command::TvCurve(a) => run_tv_curve(a, &ctx),
        Command::Entropy(a) => run_entropy(a, &ctx),
        Command::EntropicTime(a) => run_entropic_time(a),
        Command::CutoffTime(a) => run_cutoff_time(a),
        Command::CutoffScan(a) => run_scan(a, &ctx, g.seed.is_some(), g.threads),
        Command::Verify(a) => run_verify(a),
        Command::JiStats(a) => run_ji_stats(a, &ctx),
        Command::GcdCheck(a) => run_gcd_check(a, &ctx),
        Command::NormalSet(a) => run_normal_set(a, &ctx),
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            return Outcome {
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
                code: exit_code(&e),
            }
        }
    };
    let config = json!({ "args": args, "bits": g.bits });
    let seed = report.seed.unwrap_or(ctx.seed);
    let stdout = if g.json {
        let mut doc = json!({
            "command": name,
            "seed": seed,
            "config": config,
            "exit_code": report.code,
            "result": report.result,
        });
        if !g.deterministic {
            doc["elapsed_ms"] = json!(elapsed_ms);
        }
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    } else {
        let mut s = format!("# dihedral-cutoff {name} seed={seed} config={config}\n");
        s.push_str(&report.text);
        if !g.deterministic {
            s.push_str(&format!("# elapsed_ms={elapsed_ms:.1}\n"));
        }
        s
    };
    Outcome {
        stdout,
        stderr: String::new(),
        code: report.code,
    }
}
