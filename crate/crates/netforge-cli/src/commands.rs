//! Subcommand implementations.

use crate::config::{env_seed, load, FileConfig};
use crate::verify;
use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use netforge::builder::{build_solution_net, BuildOptions, BuildReport};
use netforge::bounds::{
    apriori_moment_bound, combined_weak_bound, euler_weak_bound, gronwall_bound, mc_error_bound,
    BoundParams,
};
use netforge::family::{ApproximationFamily, FamilyConstants};
use netforge::fit::loglog_slope;
use netforge::json;
use netforge::lp::lp_error_uniform_cube;
use netforge::network::Activation;
use netforge::scheduler::SchemeConfig;
use netforge::sde::{reference_solution, Drift, Payoff};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const RELU: Activation<f64> = Activation::Relu;

/// Bundled family, or one wrapped around the nets of a problem file.
fn family_for(problem: &str) -> Result<(ApproximationFamily<f64>, f64, bool)> {
    if let Some(family) = ApproximationFamily::bundled(problem) {
        return Ok((family, 1.0, true));
    }
    let path = Path::new(problem);
    if !path.exists() {
        bail!("unknown problem {problem:?}: expected heat_abs, ou_abs, or a problem JSON path");
    }
    let spec = json::load_problem(path).with_context(|| format!("loading {problem}"))?;
    let d0 = spec.dim();
    let horizon = spec.horizon();
    let drift = spec.drift().clone();
    let payoff = spec.payoff().clone();
    let payoff_probe = match &payoff {
        Payoff::SumAbs => netforge::builder::sum_abs_net::<f64>(d0),
        Payoff::Net(n) => n.clone(),
    };
    let drift_probe = match &drift {
        Drift::Zero => netforge::builder::zero_drift_net::<f64>(d0),
        Drift::NegIdentity => netforge::builder::neg_identity_net::<f64>(d0),
        Drift::Net(n) => n.clone(),
    };
    // generous caps so registration accepts whatever the file declares
    let kappa = 7.0_f64
        .max(payoff_probe.param_count() as f64)
        .max(drift_probe.param_count() as f64);
    let constants = FamilyConstants {
        kappa,
        theta: 1.0,
        e: 0.0,
        d1: 0.5,
        d2: 0.0,
        d3: 4.0,
        d4: 0.0,
        d5: 0.0,
        d6: 0.5,
    };
    let scale = spec.diffusion()[(0, 0)];
    let family = ApproximationFamily::with_probe(
        spec.id().to_string(),
        constants,
        scale,
        Box::new(move |d, _| match &payoff {
            Payoff::SumAbs => netforge::builder::sum_abs_net(d),
            Payoff::Net(n) => n.clone(),
        }),
        Box::new(move |d, _| match &drift {
            Drift::Zero => netforge::builder::zero_drift_net(d),
            Drift::NegIdentity => netforge::builder::neg_identity_net(d),
            Drift::Net(n) => n.clone(),
        }),
        &[d0],
    )
    .map_err(|e| anyhow!("problem file nets rejected: {e}"))?;
    let has_reference = reference_solution(spec.id(), d0, horizon, &vec![0.0; d0]).is_ok();
    Ok((family, horizon, has_reference))
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // negated form rejects NaN
fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        bail!("eps = {eps} violates the (0, 1] constraint");
    }
    Ok(())
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Inject a weight corruption as a negative control.
    #[arg(long)]
    corrupt: bool,
}

pub fn run_verify(args: VerifyArgs) -> Result<ExitCode> {
    let rows = verify::run_suites(args.corrupt);
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    let mut failures = 0;
    for (name, ok) in &rows {
        println!("{name:width$}  {}", if *ok { "pass" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    }
    println!("{} suites, {} failed", rows.len(), failures);
    Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Args)]
pub struct BuildArgs {
    /// Problem id (heat_abs, ou_abs) or a problem JSON path.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate this many consecutive seeds, keep the lowest-error one.
    #[arg(long)]
    best_of: Option<usize>,
    /// Error exponent for the best-of selection.
    #[arg(long)]
    p: Option<f64>,
    /// Quadrature points for the best-of selection.
    #[arg(long)]
    quad_points: Option<usize>,
    /// Output prefix; writes <out>.net.json and <out>.report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time horizon (bundled problems only; files carry their own).
    #[arg(long)]
    t: Option<f64>,
    /// Scheduler scale constant.
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn run_build(args: BuildArgs) -> Result<ExitCode> {
    let file: FileConfig = load(args.config.as_deref())?;
    let problem = args
        .problem
        .or(file.problem)
        .ok_or_else(|| anyhow!("--problem is required"))?;
    let d = args.d.or_else(|| file.d.as_ref().and_then(|v| v.first().copied())).unwrap_or(2);
    let eps =
        args.eps.or_else(|| file.eps.as_ref().and_then(|v| v.first().copied())).unwrap_or(0.5);
    check_eps(eps)?;
    let seed = args.seed.or(file.seed).unwrap_or_else(env_seed);
    let out = args.out.or(file.out).ok_or_else(|| anyhow!("--out is required"))?;
    let scale = args.scale.or(file.scale).unwrap_or(0.8);
    let (family, default_t, has_reference) = family_for(&problem)?;
    let horizon = args.t.or(file.t).unwrap_or(default_t);
    let schedule = SchemeConfig::desk(scale);

    let best_of = args.best_of.or(file.best_of).unwrap_or(1).max(1);
    let p = args.p.or(file.p).unwrap_or(2.0);
    let q = args.quad_points.or(file.quad_points).unwrap_or(1 << 14);
    if best_of > 1 && !has_reference {
        bail!("--best-of needs a problem with a closed-form reference (heat_abs or ou_abs)");
    }

    let mut chosen: Option<(netforge::NeuralNet, BuildReport, f64)> = None;
    for k in 0..best_of as u64 {
        let (net, report) =
            build_solution_net(&family, &schedule, d, eps, horizon, seed + k, &BuildOptions::default())?;
        let err = if best_of > 1 {
            let id = family.name().to_string();
            lp_error_uniform_cube(
                &net,
                &RELU,
                move |x| reference_solution(&id, d, horizon, x).unwrap(),
                d,
                p,
                q,
                seed + k,
            )
            .value
        } else {
            f64::NAN
        };
        if chosen.as_ref().is_none_or(|(_, _, best)| err < *best) {
            chosen = Some((net, report, err));
        }
    }
    let (net, report, _) = chosen.expect("at least one seed is built");

    let net_path = out.with_extension("net.json");
    let report_path = out.with_extension("report.json");
    json::save_network(&net_path, &net, &RELU)?;
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("writing {}", report_path.display()))?;
    println!(
        "wrote {} ({} parameters, N = {}) and {}",
        net_path.display(),
        report.param_count,
        report.steps,
        report_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct EvalArgs {
    /// Network JSON path.
    #[arg(long)]
    net: PathBuf,
    /// CSV of input points, one comma-separated point per line.
    #[arg(long)]
    points: PathBuf,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run_eval(args: EvalArgs) -> Result<ExitCode> {
    let (net, act) = json::load_network::<f64>(&args.net)
        .with_context(|| format!("loading network {}", args.net.display()))?;
    let text = std::fs::read_to_string(&args.points)
        .with_context(|| format!("reading points {}", args.points.display()))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| anyhow!("line {}: {tok:?}: {e}", lineno + 1))
            })
            .collect::<Result<_>>()?;
        if x.len() != net.input_dim() {
            bail!("line {}: expected {} coordinates, found {}", lineno + 1, net.input_dim(), x.len());
        }
        let y = net.realize(&act, &x)?;
        rows.push((x, y));
    }
    let mut out_text = String::new();
    for (x, y) in rows {
        let xs: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
        let ys: Vec<String> = y.iter().map(|v| format!("{v}")).collect();
        out_text.push_str(&format!("{},{}\n", xs.join(","), ys.join(",")));
    }
    match args.out {
        Some(path) => std::fs::write(&path, out_text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{out_text}"),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct SweepArgs {
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Comma-separated accuracies in (0, 1].
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Error exponent p.
    #[arg(long)]
    p: Option<f64>,
    /// Lp integration points (>= 100).
    #[arg(long)]
    quad_points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    t: Option<f64>,
    /// Scheduler scale constant.
    #[arg(long)]
    scale: Option<f64>,
    /// Concurrent cells.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

struct SweepRow {
    d: usize,
    eps: f64,
    seed: u64,
    steps: usize,
    eps_inner: f64,
    param_count: usize,
    bound: f64,
    lp_error: f64,
    lp_stderr: f64,
}

pub fn run_sweep(args: SweepArgs) -> Result<ExitCode> {
    let file = load(args.config.as_deref())?;
    let problem = args
        .problem
        .or(file.problem)
        .ok_or_else(|| anyhow!("--problem is required"))?;
    let ds = args.d.or(file.d).unwrap_or_else(|| vec![1, 2]);
    let epss = args.eps.or(file.eps).unwrap_or_else(|| vec![0.5, 0.25]);
    let seeds = args
        .seeds
        .or(file.seeds)
        .unwrap_or_else(|| vec![env_seed()]);
    let p = args.p.or(file.p).unwrap_or(2.0);
    let q = args.quad_points.or(file.quad_points).unwrap_or(1 << 14);
    let out = args.out.or(file.out).ok_or_else(|| anyhow!("--out is required"))?;
    let scale = args.scale.or(file.scale).unwrap_or(0.25);

    for &eps in &epss {
        check_eps(eps)?;
    }
    if ds.iter().any(|&d| d < 1) {
        bail!("dimensions must be at least 1");
    }
    if q < 100 {
        bail!("quad-points = {q} violates the >= 100 constraint");
    }

    let (family, default_t, has_reference) = family_for(&problem)?;
    if !has_reference {
        bail!("sweep needs a problem with a closed-form reference (heat_abs or ou_abs)");
    }
    let horizon = args.t.or(file.t).unwrap_or(default_t);
    let schedule = SchemeConfig::desk(scale);

    if let Some(jobs) = args.jobs.or(file.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .ok();
    }

    // cells run concurrently; rows come back in (d, eps, seed) order
    // because the parallel collect preserves the cell list order
    let mut cells = Vec::new();
    for &d in &ds {
        for &eps in &epss {
            for &seed in &seeds {
                cells.push((d, eps, seed));
            }
        }
    }
    use rayon::prelude::*;
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(d, eps, seed)| -> Result<SweepRow> {
            let (net, report) = build_solution_net(
                &family,
                &schedule,
                d,
                eps,
                horizon,
                seed,
                &BuildOptions::default(),
            )?;
            let id = family.name().to_string();
            let est = lp_error_uniform_cube(
                &net,
                &RELU,
                move |x| reference_solution(&id, d, horizon, x).unwrap(),
                d,
                p,
                q,
                seed,
            );
            Ok(SweepRow {
                d,
                eps,
                seed,
                steps: report.steps,
                eps_inner: report.eps_inner,
                param_count: report.param_count,
                bound: report.bound,
                lp_error: est.value,
                lp_stderr: est.stderr,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut text = String::from("d,eps,seed,N,eps_inner,param_count,bound,lp_error,lp_stderr\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.d, r.eps, r.seed, r.steps, r.eps_inner, r.param_count, r.bound, r.lp_error, r.lp_stderr
        ));
    }

    // summary: exponents fitted on log-log points, with residual norms.
    // Accuracy slopes fix the smallest dimension; dimension slopes fix
    // the smallest accuracy cell count.
    text.push_str(&format!("# cells,{}\n", rows.len()));
    let d_fixed = *ds.iter().min().unwrap();
    let at_d: Vec<&SweepRow> = rows.iter().filter(|r| r.d == d_fixed && r.seed == seeds[0]).collect();
    if at_d.len() >= 2 {
        let inv_eps: Vec<f64> = at_d.iter().map(|r| 1.0 / r.eps).collect();
        let params: Vec<f64> = at_d.iter().map(|r| r.param_count as f64).collect();
        let fit = loglog_slope(&inv_eps, &params);
        text.push_str(&format!(
            "# slope_logP_vs_log_inv_eps,{},residual,{}\n",
            fit.slope, fit.residual_norm
        ));
        let errs: Vec<f64> = at_d.iter().map(|r| r.lp_error.max(1e-300)).collect();
        let ms: Vec<f64> = at_d.iter().map(|r| r.steps as f64).collect();
        if ms.iter().any(|&m| m != ms[0]) {
            let fit_m = loglog_slope(&ms, &errs);
            text.push_str(&format!(
                "# slope_log_error_vs_log_M,{},residual,{}\n",
                fit_m.slope, fit_m.residual_norm
            ));
            let hs: Vec<f64> = at_d.iter().map(|r| horizon / r.steps as f64).collect();
            let fit_h = loglog_slope(&hs, &errs);
            text.push_str(&format!(
                "# slope_log_error_vs_log_h,{},residual,{}\n",
                fit_h.slope, fit_h.residual_norm
            ));
        }
    }
    let eps_fixed = epss.iter().copied().fold(f64::INFINITY, f64::min);
    let at_eps: Vec<&SweepRow> =
        rows.iter().filter(|r| r.eps == eps_fixed && r.seed == seeds[0]).collect();
    if at_eps.len() >= 2 {
        let dims: Vec<f64> = at_eps.iter().map(|r| r.d as f64).collect();
        let params: Vec<f64> = at_eps.iter().map(|r| r.param_count as f64).collect();
        if dims.iter().any(|&v| v != dims[0]) {
            let fit = loglog_slope(&dims, &params);
            text.push_str(&format!(
                "# slope_logP_vs_log_d,{},residual,{}\n",
                fit.slope, fit.residual_norm
            ));
        }
    }

    std::fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} ({} rows)", out.display(), rows.len());
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    e: f64,
    #[arg(long, default_value_t = 0.0)]
    d0: f64,
    #[arg(long, default_value_t = 0.0)]
    d1: f64,
    #[arg(long, default_value_t = 0.0)]
    d2: f64,
    #[arg(long, default_value_t = 0.0)]
    d3: f64,
    #[arg(long, default_value_t = 0.0)]
    d4: f64,
    #[arg(long, default_value_t = 0.0)]
    d5: f64,
    #[arg(long, default_value_t = 0.0)]
    d6: f64,
    #[arg(long, default_value_t = 0.5)]
    n0: f64,
    #[arg(long, default_value_t = 0.0)]
    n1: f64,
    #[arg(long, default_value_t = 2.0)]
    n2: f64,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Start-point norm fed to the pathwise weak bound.
    #[arg(long, default_value_t = 0.0)]
    xi: f64,
}

pub fn run_bounds(args: BoundsArgs) -> Result<ExitCode> {
    let params = BoundParams {
        kappa: args.kappa,
        theta: args.theta,
        p: args.p,
        e: args.e,
        d0: args.d0,
        d1: args.d1,
        d2: args.d2,
        d3: args.d3,
        d4: args.d4,
        d5: args.d5,
        d6: args.d6,
        n0: args.n0,
        n1: args.n1,
        n2: args.n2,
    }
    .validated()
    .map_err(|e| anyhow!("{e}"))?;

    let dd = args.d as f64;
    let steps = (args.t / args.h).round().max(1.0);
    let alpha = 1.0 + params.kappa * args.h / args.t;
    let beta = params.kappa * args.h;
    let trace = params.kappa * dd.powf(2.0 * params.d1);
    let (gronwall_geom, gronwall_exp) = gronwall_bound(alpha, beta, 1.0, steps as u32);
    let apriori = apriori_moment_bound(
        alpha,
        beta,
        dd.powf(params.theta * (params.d1 + params.d2)),
        1.0,
        (trace * args.h).sqrt(),
        steps as u32,
    );
    let weak = euler_weak_bound(
        params.kappa * dd.powf(params.d0),
        params.kappa,
        params.theta,
        args.t,
        args.h,
        trace,
        args.xi,
        params.kappa * dd.powf(params.d1),
    )
    .map_err(|e| anyhow!("{e}"))?;
    let mc = mc_error_bound(&params, args.d, args.t, args.m).map_err(|e| anyhow!("{e}"))?;
    let combined =
        combined_weak_bound(&params, args.d, args.t, args.h, args.m).map_err(|e| anyhow!("{e}"))?;

    let doc = serde_json::json!({
        "inputs": {
            "d": args.d, "T": args.t, "h": args.h, "M": args.m,
            "steps": steps, "alpha": alpha, "beta": beta, "trace": trace,
        },
        "gronwall": { "geometric": gronwall_geom, "exponential": gronwall_exp },
        "apriori_moment": apriori,
        "euler_weak": weak,
        "mc_error": mc,
        "combined_weak": combined,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(ExitCode::SUCCESS)
}
