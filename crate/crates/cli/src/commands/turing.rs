//! `rbffd turing`: two-species reaction-diffusion runs with SBDF2 and
//! snapshot output.

use std::collections::VecDeque;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbffd::geometry::NodeSet;
use rbffd::operator::{assemble_laplacian, rcm_order, EpsilonStrategy};
use rbffd::problems::{turing_reaction, TuringParams};
use rbffd::timestepping::{sbdf2_integrate_with, IntegratorConfig, ReactionDiffusionProblem, Scheme};

use crate::commands::pick;
use crate::config::{write_manifest, KeyValueFile};
use crate::output::{write_snapshot_csv, write_snapshot_vtk};
use crate::surfaces::SurfaceSpec;

/// Built-in presets; the same files ship in the repository's `presets/`
/// directory.
const PRESETS: &[(&str, &str)] = &[
    ("rbc/spots", include_str!("../../../../presets/rbc_spots.txt")),
    ("rbc/stripes", include_str!("../../../../presets/rbc_stripes.txt")),
    (
        "bumpy-sphere/spots",
        include_str!("../../../../presets/bumpy_sphere_spots.txt"),
    ),
    (
        "bumpy-sphere/stripes",
        include_str!("../../../../presets/bumpy_sphere_stripes.txt"),
    ),
    (
        "double-torus/spots",
        include_str!("../../../../presets/double_torus_spots.txt"),
    ),
    (
        "double-torus/stripes",
        include_str!("../../../../presets/double_torus_stripes.txt"),
    ),
    ("frog/spots", include_str!("../../../../presets/frog_spots.txt")),
    ("bunny/stripes", include_str!("../../../../presets/bunny_stripes.txt")),
    ("sphere/spots", include_str!("../../../../presets/sphere_spots.txt")),
    ("torus/spots", include_str!("../../../../presets/torus_spots.txt")),
];

#[derive(Debug, Args)]
pub struct TuringArgs {
    /// Built-in preset name, e.g. rbc/spots.
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset file in key=value form (same schema as the built-ins).
    #[arg(long)]
    pub preset_file: Option<PathBuf>,
    /// Point cloud path for `surface=file` presets.
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Surface override: sphere, rbc, torus or file.
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kappa_target: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Initial-condition seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Snapshot cadence in steps.
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Replace the reaction terms with zero (diffusion only).
    #[arg(long)]
    pub zero_reaction: bool,
    /// Constant initial data instead of seeded noise.
    #[arg(long)]
    pub constant_ic: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &TuringArgs) -> Result<()> {
    let preset = match (&args.preset, &args.preset_file) {
        (Some(name), _) => {
            let text = PRESETS
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, t)| *t)
                .ok_or_else(|| {
                    anyhow::anyhow!(
                        "unknown preset `{name}` (available: {})",
                        PRESETS
                            .iter()
                            .map(|(n, _)| *n)
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                })?;
            KeyValueFile::parse(text)?
        }
        (None, Some(path)) => KeyValueFile::load(path)?,
        (None, None) => KeyValueFile::default(),
    };

    let surface = pick(
        args.surface.clone(),
        preset.get("surface").map(String::from),
        "sphere".into(),
    );
    let n_hint = preset.get_usize("N")?;
    let n = pick(args.n, preset.get_usize("n")?, 31);
    let kappa_target = pick(args.kappa_target, preset.get_f64("kappa_target")?, 1e12);
    let dt = pick(args.dt, preset.get_f64("dt")?, 0.01);
    let seed = pick(args.seed, None, 7u64);
    let snapshot_every = pick(args.snapshot_every, preset.get_usize("snapshot_every")?, 1000);

    let params = TuringParams {
        delta_u: 0.516 * preset.get_f64("delta_v")?.unwrap_or(4.5e-3),
        delta_v: preset.get_f64("delta_v")?.unwrap_or(4.5e-3),
        alpha: preset.get_f64("alpha")?.unwrap_or(0.899),
        beta: preset.get_f64("beta")?.unwrap_or(-0.91),
        gamma: preset.get_f64("gamma")?.unwrap_or(-0.899),
        tau1: preset.get_f64("tau1")?.unwrap_or(0.02),
        tau2: preset.get_f64("tau2")?.unwrap_or(0.2),
        final_time: preset.get_f64("t_final")?.unwrap_or(800.0),
    };
    let t_final = pick(args.t_final, Some(params.final_time), 800.0);

    // Validate the reaction once; the step closure then cannot fail.
    turing_reaction(0.0, 0.0, &params)?;

    let spec = SurfaceSpec::resolve(&surface, args.level, args.m, n_hint, args.path.as_deref())?;
    let nodes = spec.build()?;
    std::fs::create_dir_all(args.out_dir.join("snapshots"))?;

    eprintln!(
        "assembling {} (N={}), n={n}, kappa_T={kappa_target:.1e}",
        spec.describe(),
        nodes.len()
    );
    let (op, eps_report) =
        assemble_laplacian(&nodes, n, EpsilonStrategy::PerStencilKappa(kappa_target))?;
    eps_report.save(&args.out_dir.join("epsilons.txt"))?;

    // Reorder operator and nodes together: the reduced bandwidth keeps the
    // LU factors sparse across the long time loop.
    let perm = rcm_order(&op);
    let op = op.apply_permutation(&perm);
    let nodes = {
        let points = perm.iter().map(|&old| nodes.points()[old]).collect();
        let normals = perm.iter().map(|&old| nodes.normals()[old]).collect();
        NodeSet::new(points, normals, nodes.label())?
    };

    let initial = |offset: u64| -> Vec<f64> {
        match args.constant_ic {
            Some(c) => vec![c; nodes.len()],
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(offset));
                (0..nodes.len()).map(|_| rng.random::<f64>() - 0.5).collect()
            }
        }
    };
    let initial_u = initial(0);
    let initial_v = initial(1);

    let zero_reaction = args.zero_reaction;
    let reaction_params = params.clone();
    let problem = ReactionDiffusionProblem {
        operator: &op,
        delta_u: params.delta_u,
        delta_v: params.delta_v,
        reaction: move |_t: f64, u: f64, v: f64| {
            if zero_reaction {
                (0.0, 0.0)
            } else {
                turing_reaction(u, v, &reaction_params).expect("reaction params were validated")
            }
        },
        initial_u: initial_u.clone(),
        initial_v: initial_v.clone(),
    };

    let mut config = IntegratorConfig::new(dt, t_final, Scheme::Sbdf2Lu);
    config.trace_every = 100;
    let total_steps = (t_final / dt).round() as usize;

    // Ring buffer of recent activator states for the steadiness metric
    // max|u^m - u^{m-100}| / (100 dt).
    let steadiness_lag = 100usize;
    let mut recent: VecDeque<Vec<f64>> = VecDeque::with_capacity(steadiness_lag + 1);
    recent.push_back(initial_u.clone());
    let mut steadiness = f64::NAN;

    write_snapshot_csv(
        &args.out_dir.join("snapshots/snap_00000000.csv"),
        &nodes,
        &initial_u,
        &initial_v,
    )?;

    let observe = |step: usize, _t: f64, u: &[f64], v: &[f64]| {
        if recent.len() > steadiness_lag {
            recent.pop_front();
        }
        recent.push_back(u.to_vec());
        if recent.len() == steadiness_lag + 1 && step == total_steps {
            let old = recent.front().unwrap();
            let diff = u
                .iter()
                .zip(old)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            steadiness = diff / (steadiness_lag as f64 * dt);
        }
        if step % snapshot_every == 0 || step == total_steps {
            let csv = args
                .out_dir
                .join(format!("snapshots/snap_{step:08}.csv"));
            let vtk = args
                .out_dir
                .join(format!("snapshots/snap_{step:08}.vtk"));
            // Snapshot failures abort the run via the panic path; the last
            // good snapshot stays on disk.
            write_snapshot_csv(&csv, &nodes, u, v).expect("snapshot write failed");
            write_snapshot_vtk(&vtk, "turing fields", &nodes, u, v).expect("snapshot write failed");
        }
    };

    let result = sbdf2_integrate_with(&problem, &config, observe);
    let ((u, v), trace) = match result {
        Ok(ok) => ok,
        Err(err) => {
            eprintln!("integration aborted: {err}");
            return Err(err.into());
        }
    };
    trace.write_csv(&args.out_dir.join("trace.csv"))?;

    let max_abs = |f: &[f64]| f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let stddev = |f: &[f64]| {
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        (f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / f.len() as f64).sqrt()
    };
    let summary = format!(
        "surface={}\nN={}\nn={n}\nkappa_target={kappa_target:e}\ndt={dt}\nt_final={t_final}\n\
         steps={total_steps}\nseed={seed}\nmax_abs_u={:e}\nmax_abs_v={:e}\nstddev_u={:e}\n\
         stddev_v={:e}\nsteadiness={:e}\nmean_epsilon={:.12e}\n",
        spec.describe(),
        nodes.len(),
        max_abs(&u),
        max_abs(&v),
        stddev(&u),
        stddev(&v),
        steadiness,
        eps_report.mean_epsilon(),
    );
    std::fs::write(args.out_dir.join("summary.txt"), &summary)?;
    print!("{summary}");

    let mut manifest = preset;
    manifest.set("surface", spec.describe());
    manifest.set("n", n);
    manifest.set("kappa_target", format!("{kappa_target:e}"));
    manifest.set("dt", dt);
    manifest.set("t_final", t_final);
    manifest.set("seed", seed);
    manifest.set("snapshot_every", snapshot_every);
    manifest.set("zero_reaction", zero_reaction);
    write_manifest(&args.out_dir.join("manifest.txt"), &manifest)
        .context("writing manifest")?;
    Ok(())
}
