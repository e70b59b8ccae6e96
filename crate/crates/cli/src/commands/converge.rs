//! `rbffd converge`: spatial convergence studies for the diffusion
//! problems, BDF4 in time.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rbffd::geometry::NodeSet;
use rbffd::operator::{assemble_laplacian, EpsilonStrategy, SparseOperator};
use rbffd::problems::{
    torus_intrinsic_coords, ForcedSphereSolution, ForcedTorusSolution, SphereHeatSolution,
};
use rbffd::shape_param::EpsilonReport;
use rbffd::timestepping::{bdf4_integrate, DiffusionProblem, IntegratorConfig, Scheme, StepTrace};

use crate::commands::{pick, pick_required};
use crate::config::{write_manifest, KeyValueFile};
use crate::output::{attach_orders, relative_errors, write_convergence_csv, ConvergenceRow};
use crate::surfaces::SurfaceSpec;

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    /// key=value configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem: sphere_heat, forced_sphere or forced_torus.
    #[arg(long)]
    pub problem: Option<String>,
    /// Comma-separated resolutions: sphere levels, or torus m values.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Vec<usize>,
    /// Stencil size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Shape strategy: growing (default) or fixed.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Cap on the growing target condition number.
    #[arg(long)]
    pub kappa_cap: Option<f64>,
    /// Fixed target condition number (strategy fixed).
    #[arg(long)]
    pub kappa_target: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Defaults to 0.5 for sphere_heat and 0.2 for the forced problems.
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Seed for the manufactured solutions' random centers.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Target condition number at the coarsest resolution of a growing-kappa
/// study.
pub const GROWING_KAPPA_START: f64 = 1e5;

/// The growing-kappa schedule fixes the mean shape parameter while `N`
/// grows: given the mean epsilon induced at the coarsest resolution, the
/// target for a finer node set is the typical condition number that same
/// epsilon induces on its stencils (geometric median over a sample),
/// truncated at the cap.
pub fn growing_kappa(
    nodes: &NodeSet,
    stencil_size: usize,
    reference_epsilon: f64,
    cap: f64,
) -> Result<f64> {
    use rbffd::rbf::{
        condition_number_sym, interpolation_matrix_from_distances, pairwise_distances, Kernel,
    };
    let stencils = rbffd::geometry::build_stencils(nodes, stencil_size)?;
    let kernel = Kernel::imq(reference_epsilon)?;
    let sample_stride = (nodes.len() / 32).max(1);
    let mut log_kappas: Vec<f64> = Vec::new();
    for k in (0..nodes.len()).step_by(sample_stride) {
        let points: Vec<_> = stencils.row(k).iter().map(|&i| nodes.points()[i]).collect();
        let a = interpolation_matrix_from_distances(&pairwise_distances(&points)?, &kernel);
        let kappa = condition_number_sym(&a);
        if kappa.is_finite() {
            log_kappas.push(kappa.ln());
        }
    }
    anyhow::ensure!(!log_kappas.is_empty(), "no finite condition numbers sampled");
    log_kappas.sort_by(f64::total_cmp);
    let median = log_kappas[log_kappas.len() / 2].exp();
    Ok(median.min(cap))
}

struct ResolvedProblem<'a> {
    initial: Vec<f64>,
    exact: Box<dyn Fn(f64, usize) -> f64 + Sync + 'a>,
    forcing: Option<Box<dyn Fn(f64, usize) -> f64 + Sync + 'a>>,
}

/// Default diffusion coefficient of the convergence studies.
const DELTA: f64 = 1.0;

fn setup_problem<'a>(
    problem: &str,
    nodes: &'a NodeSet,
    seed: u64,
) -> Result<ResolvedProblem<'a>> {
    match problem {
        "sphere_heat" => {
            let heat = SphereHeatSolution::default();
            let points = nodes.points();
            let initial: Vec<f64> = points.iter().map(|p| heat.value(0.0, p)).collect();
            let exact = move |t: f64, k: usize| heat.value(t, &points[k]);
            Ok(ResolvedProblem {
                initial,
                exact: Box::new(exact),
                forcing: None,
            })
        }
        "forced_sphere" => {
            let solution = ForcedSphereSolution::new(seed);
            let bumps: Vec<f64> = nodes.points().iter().map(|p| solution.bump_sum(p)).collect();
            let lap: Vec<f64> = nodes
                .points()
                .iter()
                .map(|p| solution.bump_laplacian(p))
                .collect();
            let initial = bumps.clone();
            let exact_bumps = bumps.clone();
            let exact = move |t: f64, k: usize| (-5.0 * t).exp() * exact_bumps[k];
            let forcing = move |t: f64, k: usize| {
                (-5.0 * t).exp() * (-5.0 * bumps[k] - DELTA * lap[k])
            };
            Ok(ResolvedProblem {
                initial,
                exact: Box::new(exact),
                forcing: Some(Box::new(forcing)),
            })
        }
        "forced_torus" => {
            let solution = ForcedTorusSolution::new(seed);
            let angles: Vec<(f64, f64)> = nodes
                .points()
                .iter()
                .map(torus_intrinsic_coords)
                .collect::<Result<_, _>>()?;
            let bumps: Vec<f64> = angles
                .iter()
                .map(|&(phi, lambda)| solution.bump_sum(phi, lambda))
                .collect();
            let lap: Vec<f64> = angles
                .iter()
                .map(|&(phi, lambda)| solution.bump_laplacian(phi, lambda))
                .collect();
            let initial = bumps.clone();
            let exact_bumps = bumps.clone();
            let exact = move |t: f64, k: usize| (-5.0 * t).exp() * exact_bumps[k];
            let forcing = move |t: f64, k: usize| {
                (-5.0 * t).exp() * (-5.0 * bumps[k] - DELTA * lap[k])
            };
            Ok(ResolvedProblem {
                initial,
                exact: Box::new(exact),
                forcing: Some(Box::new(forcing)),
            })
        }
        other => anyhow::bail!("unknown problem `{other}`"),
    }
}

/// Assembles and integrates one resolution; shared with the acceptance
/// tooling through the CLI.
fn run_resolution(
    problem: &str,
    nodes: &NodeSet,
    op: &SparseOperator,
    seed: u64,
    dt: f64,
    t_final: f64,
) -> Result<(ConvergenceRow, StepTrace)> {
    let resolved = setup_problem(problem, nodes, seed)?;
    let diffusion = DiffusionProblem {
        operator: op,
        delta: DELTA,
        forcing: resolved.forcing,
        initial: resolved.initial,
        exact: Some(resolved.exact),
    };
    let config = IntegratorConfig::new(dt, t_final, Scheme::Bdf4Bicgstab);
    let (state, trace) = bdf4_integrate(&diffusion, &config)?;

    let steps = (t_final / dt).round();
    let t_end = steps * dt;
    let exact_final: Vec<f64> = (0..nodes.len())
        .map(|k| (diffusion.exact.as_ref().unwrap())(t_end, k))
        .collect();
    let (l2, linf) = relative_errors(&state, &exact_final);
    Ok((
        ConvergenceRow {
            n_nodes: nodes.len(),
            l2,
            linf,
            order_l2: f64::NAN,
            order_linf: f64::NAN,
        },
        trace,
    ))
}

pub fn run(args: &ConvergeArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => KeyValueFile::load(path)?,
        None => KeyValueFile::default(),
    };
    let problem = pick_required(
        args.problem.clone(),
        cfg.get("problem").map(String::from),
        "problem",
    )?;
    let resolutions = if args.resolutions.is_empty() {
        cfg.get("resolutions")
            .map(|v| {
                v.split(',')
                    .map(|t| t.trim().parse::<usize>().context("bad resolution"))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?
            .unwrap_or_default()
    } else {
        args.resolutions.clone()
    };
    anyhow::ensure!(!resolutions.is_empty(), "no resolutions given");
    let n = pick_required(args.n, cfg.get_usize("n")?, "n")?;
    let strategy = pick(
        args.strategy.clone(),
        cfg.get("strategy").map(String::from),
        "growing".into(),
    );
    let kappa_cap = pick(args.kappa_cap, cfg.get_f64("kappa_cap")?, 1e14);
    let dt = pick(args.dt, cfg.get_f64("dt")?, 1e-4);
    let default_t_final = if problem == "sphere_heat" { 0.5 } else { 0.2 };
    let t_final = pick(args.t_final, cfg.get_f64("t_final")?, default_t_final);
    let seed = pick(args.seed, cfg.get_usize("seed")?.map(|v| v as u64), 2024);

    std::fs::create_dir_all(&args.out_dir)?;

    let is_torus = problem == "forced_torus";
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    let mut reference_epsilon: Option<f64> = None;
    for &resolution in &resolutions {
        let spec = if is_torus {
            SurfaceSpec::Torus { m: resolution }
        } else {
            SurfaceSpec::Sphere {
                level: resolution as u32,
            }
        };
        let nodes = spec.build()?;
        let n_nodes = nodes.len();
        let eps_strategy = match strategy.as_str() {
            "growing" => {
                let kappa = match reference_epsilon {
                    None => GROWING_KAPPA_START.min(kappa_cap),
                    Some(eps) => growing_kappa(&nodes, n, eps, kappa_cap)?,
                };
                EpsilonStrategy::PerStencilKappa(kappa)
            }
            "fixed" => EpsilonStrategy::PerStencilKappa(pick_required(
                args.kappa_target,
                cfg.get_f64("kappa_target")?,
                "kappa_target",
            )?),
            other => anyhow::bail!("unknown strategy `{other}`"),
        };

        let outcome = assemble_laplacian(&nodes, n, eps_strategy)
            .map_err(anyhow::Error::from)
            .and_then(|(op, report): (SparseOperator, EpsilonReport)| {
                if reference_epsilon.is_none() {
                    reference_epsilon = Some(report.mean_epsilon());
                }
                let (row, trace) = run_resolution(&problem, &nodes, &op, seed, dt, t_final)?;
                trace.write_csv(&args.out_dir.join(format!("trace_N{n_nodes}.csv")))?;
                report.save(&args.out_dir.join(format!("epsilons_N{n_nodes}.txt")))?;
                Ok(row)
            });
        match outcome {
            Ok(row) => {
                println!(
                    "N={:>6}  l2={:.3e}  linf={:.3e}  (kappa_T {})",
                    row.n_nodes,
                    row.l2,
                    row.linf,
                    match eps_strategy {
                        EpsilonStrategy::PerStencilKappa(k) => format!("{k:.3e}"),
                        EpsilonStrategy::FixedEpsilon(e) => format!("eps={e}"),
                    }
                );
                rows.push(row);
            }
            Err(err) => {
                // Record and continue with the remaining resolutions.
                eprintln!("resolution {resolution} failed: {err:#}");
                failures.push(format!("{resolution}: {err:#}"));
                rows.push(ConvergenceRow {
                    n_nodes,
                    l2: f64::NAN,
                    linf: f64::NAN,
                    order_l2: f64::NAN,
                    order_linf: f64::NAN,
                });
            }
        }
    }

    attach_orders(&mut rows);
    write_convergence_csv(&args.out_dir.join("convergence.csv"), &rows)?;
    if !failures.is_empty() {
        std::fs::write(args.out_dir.join("failures.txt"), failures.join("\n"))?;
    }

    let mut manifest = cfg;
    manifest.set("problem", &problem);
    manifest.set(
        "resolutions",
        resolutions
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.set("n", n);
    manifest.set("strategy", &strategy);
    manifest.set("kappa_cap", format!("{kappa_cap:e}"));
    manifest.set("dt", dt);
    manifest.set("t_final", t_final);
    manifest.set("seed", seed);
    manifest.set("delta", DELTA);
    write_manifest(&args.out_dir.join("manifest.txt"), &manifest)?;

    for row in &rows {
        println!(
            "N={:>6}  order_l2={:+.2}  order_linf={:+.2}",
            row.n_nodes, row.order_l2, row.order_linf
        );
    }
    anyhow::ensure!(failures.is_empty(), "{} resolution(s) failed", failures.len());
    Ok(())
}
