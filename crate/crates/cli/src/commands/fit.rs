//! `rbffd fit-heuristic`: regenerate the shape-parameter seed model from
//! sphere data.
//!
//! For each subdivision level and each target condition number, exact
//! shape parameters are computed on a sample of stencils; the cubic model
//! is then refit by least squares and written in the ten-line
//! `pow_r pow_l coefficient` format.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rbffd::geometry::{build_stencils, icosahedral_sphere_nodes, stencil_min_spacing};
use rbffd::rbf::KernelFamily;
use rbffd::shape_param::{
    fit_heuristic, heuristic_epsilon, optimize_epsilon, HeuristicModel, OptimizerConfig,
};
use rbffd::Vec3;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sphere subdivision levels to sample.
    #[arg(long, value_delimiter = ',', default_values_t = vec![3u32, 4, 5])]
    pub levels: Vec<u32>,
    /// Target condition numbers.
    #[arg(long, value_delimiter = ',',
          default_values_t = vec![1e4, 1e6, 1e8, 1e10, 1e12, 1e14])]
    pub kappa_list: Vec<f64>,
    /// Stencils sampled per (level, kappa) pair.
    #[arg(long, default_value_t = 200)]
    pub samples_per_level: usize,
    /// Stencil size.
    #[arg(long, default_value_t = 17)]
    pub n: usize,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &FitArgs) -> Result<()> {
    let seed_model = HeuristicModel::default();
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();

    for &level in &args.levels {
        let nodes = icosahedral_sphere_nodes(level)?;
        let stencils = build_stencils(&nodes, args.n)?;
        let fill = stencil_min_spacing(&nodes, &stencils)?;
        let stride = (nodes.len() / args.samples_per_level).max(1);
        for &kappa_target in &args.kappa_list {
            let config = OptimizerConfig::new(kappa_target);
            for k in (0..nodes.len()).step_by(stride) {
                let points: Vec<Vec3> =
                    stencils.row(k).iter().map(|&i| nodes.points()[i]).collect();
                let h_min = fill.h_min_per_stencil[k];
                let seed = heuristic_epsilon(h_min, kappa_target, &seed_model);
                let record = optimize_epsilon(&points, KernelFamily::Imq, &config, seed)?;
                if !record.clamped {
                    samples.push((h_min, kappa_target, record.epsilon));
                }
            }
        }
        eprintln!("level {level}: {} samples so far", samples.len());
    }

    // Hold out every fifth sample to measure predictive residual.
    let train: Vec<(f64, f64, f64)> = samples
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 5 != 0)
        .map(|(_, s)| *s)
        .collect();
    let holdout: Vec<(f64, f64, f64)> = samples
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 5 == 0)
        .map(|(_, s)| *s)
        .collect();

    let (model, train_rms) = fit_heuristic(&train)?;
    let holdout_rms = {
        let sq: f64 = holdout
            .iter()
            .map(|&(h, kappa, eps)| {
                let predicted = model.evaluate(1.0 / h, kappa.ln());
                (predicted - eps.ln()).powi(2)
            })
            .sum();
        (sq / holdout.len() as f64).sqrt()
    };

    model.save(&args.out)?;
    println!(
        "fit {} samples: train RMS {train_rms:.4}, holdout RMS {holdout_rms:.4} (log epsilon)",
        samples.len()
    );
    println!("model written to {}", args.out.display());
    Ok(())
}
