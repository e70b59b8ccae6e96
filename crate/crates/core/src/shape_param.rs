//! Per-stencil shape-parameter selection.
//!
//! The shape parameter of each stencil is chosen so that the local
//! interpolation matrix attains a prescribed target condition number: the
//! root of `F(eps) = ln(kappa(A(eps)) / kappa_target)`, found by geometric
//! bracketing from a seed followed by bisection. The seed comes from a
//! bivariate cubic model in `(1/h_min, ln kappa_target)` that can be refit
//! from regenerated data.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::rbf::{
    condition_number_sym, interpolation_matrix_from_distances, pairwise_distances, Kernel,
    KernelFamily, RbfError,
};
use crate::Vec3;

#[derive(Debug, Error)]
pub enum ShapeParamError {
    #[error("seed shape parameter must be positive, got {0}")]
    BadSeed(f64),
    #[error("target condition number must exceed 1, got {0}")]
    BadTarget(f64),
    #[error("exceeded {max_iterations} iterations; last bracket [{lo}, {hi}]")]
    MaxIterations {
        max_iterations: usize,
        lo: f64,
        hi: f64,
    },
    #[error("need at least {need} samples spanning more than one target condition number")]
    TooFewSamples { need: usize },
    #[error("regression design matrix is rank deficient (rank {rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },
    #[error("{path}: {message}")]
    ModelFile { path: String, message: String },
    #[error(transparent)]
    Rbf(#[from] RbfError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Monomial exponents of the cubic model, in the order the coefficients are
/// stored: rows of (power of r, power of l_kappa).
pub const MODEL_POWERS: [(u32, u32); 10] = [
    (3, 0),
    (2, 1),
    (2, 0),
    (1, 2),
    (1, 1),
    (1, 0),
    (0, 3),
    (0, 2),
    (0, 1),
    (0, 0),
];

/// Default coefficients of the seed model.
const DEFAULT_COEFFICIENTS: [f64; 10] = [
    1.1012e-4, -7.1270e-5, -0.0071, 7.0963e-5, 0.0011, 0.2112, -7.9245e-5, 0.0028, -0.2005,
    1.1472,
];

/// Bivariate cubic in `(r, l) = (1/h_min, ln kappa_target)` predicting
/// `ln(epsilon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicModel {
    pub coefficients: [f64; 10],
}

impl Default for HeuristicModel {
    fn default() -> Self {
        HeuristicModel {
            coefficients: DEFAULT_COEFFICIENTS,
        }
    }
}

impl HeuristicModel {
    /// Evaluates the polynomial `s(r, l)`.
    pub fn evaluate(&self, r: f64, l: f64) -> f64 {
        MODEL_POWERS
            .iter()
            .zip(&self.coefficients)
            .map(|(&(pr, pl), &c)| c * r.powi(pr as i32) * l.powi(pl as i32))
            .sum()
    }

    /// Writes the model as ten `pow_r pow_l coefficient` lines.
    pub fn save(&self, path: &Path) -> Result<(), ShapeParamError> {
        let mut out = BufWriter::new(File::create(path)?);
        for (&(pr, pl), c) in MODEL_POWERS.iter().zip(&self.coefficients) {
            writeln!(out, "{pr} {pl} {c:e}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ShapeParamError> {
        let file_error = |message: String| ShapeParamError::ModelFile {
            path: path.display().to_string(),
            message,
        };
        let reader = BufReader::new(File::open(path)?);
        let mut coefficients = [f64::NAN; 10];
        let mut seen = [false; 10];
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(file_error(format!("line {lineno}: expected 3 fields")));
            }
            let pr: u32 = tokens[0]
                .parse()
                .map_err(|_| file_error(format!("line {lineno}: bad power `{}`", tokens[0])))?;
            let pl: u32 = tokens[1]
                .parse()
                .map_err(|_| file_error(format!("line {lineno}: bad power `{}`", tokens[1])))?;
            let c: f64 = tokens[2]
                .parse()
                .map_err(|_| file_error(format!("line {lineno}: bad coefficient `{}`", tokens[2])))?;
            let slot = MODEL_POWERS
                .iter()
                .position(|&p| p == (pr, pl))
                .ok_or_else(|| file_error(format!("line {lineno}: unknown term r^{pr} l^{pl}")))?;
            coefficients[slot] = c;
            seen[slot] = true;
        }
        if !seen.iter().all(|&s| s) {
            return Err(file_error("model file is missing terms".into()));
        }
        Ok(HeuristicModel { coefficients })
    }
}

/// Seed shape parameter `exp(s(1/h_min, ln kappa_target))`; positive by
/// construction.
pub fn heuristic_epsilon(h_min: f64, kappa_target: f64, model: &HeuristicModel) -> f64 {
    model.evaluate(1.0 / h_min, kappa_target.ln()).exp()
}

/// Root-finder settings for the condition-number target.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub kappa_target: f64,
    /// Absolute tolerance on the epsilon bracket width.
    pub abs_tol: f64,
    pub max_iterations: usize,
    pub bracket_growth: f64,
}

impl OptimizerConfig {
    pub fn new(kappa_target: f64) -> Self {
        OptimizerConfig {
            kappa_target,
            abs_tol: 1e-4,
            max_iterations: 100,
            bracket_growth: 2.0,
        }
    }
}

/// Smallest shape parameter probed before declaring the target unreachable.
pub const EPSILON_FLOOR: f64 = 1e-3;
/// Largest condition number trusted from a double-precision eigensolve.
pub const KAPPA_STABLE_MAX: f64 = 1e16;

/// Outcome of one per-stencil optimization.
#[derive(Debug, Clone, Copy)]
pub struct EpsilonRecord {
    pub epsilon: f64,
    pub achieved_kappa: f64,
    /// Root-finder iterations (bracket expansions plus bisections).
    pub iterations: usize,
    pub clamped: bool,
}

/// Finds the stencil shape parameter inducing `kappa_target`, starting from
/// `seed`.
///
/// The condition number of the interpolation matrix grows monotonically as
/// epsilon shrinks, so the root is bracketed by geometric expansion away
/// from the seed and then bisected until the bracket is narrower than
/// `abs_tol`. If the target is unreachable in double precision (kappa still
/// below target at [`EPSILON_FLOOR`], or only reachable past
/// [`KAPPA_STABLE_MAX`]), the epsilon with the largest stably computed
/// kappa is returned with `clamped` set.
pub fn optimize_epsilon(
    points: &[Vec3],
    family: KernelFamily,
    config: &OptimizerConfig,
    seed: f64,
) -> Result<EpsilonRecord, ShapeParamError> {
    if !(seed > 0.0) {
        return Err(ShapeParamError::BadSeed(seed));
    }
    if !(config.kappa_target > 1.0) {
        return Err(ShapeParamError::BadTarget(config.kappa_target));
    }
    let distances = pairwise_distances(points)?;
    let kappa_of = |eps: f64| -> f64 {
        let kernel = Kernel { family, epsilon: eps };
        condition_number_sym(&interpolation_matrix_from_distances(&distances, &kernel))
    };
    let log_target = config.kappa_target.ln();
    let f_of = |kappa: f64| kappa.ln() - log_target;

    let mut iterations = 0usize;
    let seed_kappa = kappa_of(seed);
    let f_seed = f_of(seed_kappa);
    if f_seed.abs() < 1.0001f64.ln() {
        return Ok(EpsilonRecord {
            epsilon: seed,
            achieved_kappa: seed_kappa,
            iterations: 0,
            clamped: false,
        });
    }

    // Track the best stably-computed kappa in case the target is unreachable.
    let mut best_stable = if seed_kappa <= KAPPA_STABLE_MAX {
        Some((seed, seed_kappa))
    } else {
        None
    };
    let note_stable = |eps: f64, kappa: f64, best: &mut Option<(f64, f64)>| {
        if kappa <= KAPPA_STABLE_MAX && best.map_or(true, |(_, k)| kappa > k) {
            *best = Some((eps, kappa));
        }
    };

    // Bracket: F decreases with epsilon, so a positive F means the root lies
    // at larger epsilon and vice versa.
    let growth = config.bracket_growth;
    let (mut lo, mut hi); // invariant: F(lo) > 0 > F(hi), lo < hi
    if f_seed > 0.0 {
        lo = seed;
        let mut eps = seed;
        loop {
            eps *= growth;
            iterations += 1;
            if iterations > config.max_iterations {
                return Err(ShapeParamError::MaxIterations {
                    max_iterations: config.max_iterations,
                    lo,
                    hi: eps,
                });
            }
            let kappa = kappa_of(eps);
            note_stable(eps, kappa, &mut best_stable);
            if f_of(kappa) < 0.0 {
                hi = eps;
                break;
            }
            lo = eps;
        }
    } else {
        hi = seed;
        let mut eps = seed;
        loop {
            eps /= growth;
            iterations += 1;
            if iterations > config.max_iterations {
                return Err(ShapeParamError::MaxIterations {
                    max_iterations: config.max_iterations,
                    lo: eps,
                    hi,
                });
            }
            let kappa = kappa_of(eps);
            note_stable(eps, kappa, &mut best_stable);
            if f_of(kappa) > 0.0 {
                // Sign change: even if this probe overshot past the stable
                // range, the bisection homes in on the crossing, which for
                // a representable target lies in stable territory.
                lo = eps;
                break;
            }
            // Still below target: a probe beyond the trustworthy range or
            // the epsilon floor means the target is unreachable in double
            // precision.
            if eps < EPSILON_FLOOR || kappa > KAPPA_STABLE_MAX {
                let (epsilon, achieved_kappa) = best_stable.unwrap_or((eps, kappa));
                return Ok(EpsilonRecord {
                    epsilon,
                    achieved_kappa,
                    iterations,
                    clamped: true,
                });
            }
        }
    }

    // Bisection on the epsilon interval.
    while hi - lo > config.abs_tol {
        iterations += 1;
        if iterations > config.max_iterations {
            return Err(ShapeParamError::MaxIterations {
                max_iterations: config.max_iterations,
                lo,
                hi,
            });
        }
        let mid = 0.5 * (lo + hi);
        let kappa = kappa_of(mid);
        note_stable(mid, kappa, &mut best_stable);
        if f_of(kappa) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let epsilon = 0.5 * (lo + hi);
    Ok(EpsilonRecord {
        epsilon,
        achieved_kappa: kappa_of(epsilon),
        iterations,
        clamped: false,
    })
}

/// Per-stencil optimization results for a whole operator assembly.
#[derive(Debug, Clone, Default)]
pub struct EpsilonReport {
    pub records: Vec<EpsilonRecord>,
}

impl EpsilonReport {
    pub fn mean_epsilon(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().map(|r| r.epsilon).sum::<f64>() / self.records.len() as f64
    }

    pub fn clamped_count(&self) -> usize {
        self.records.iter().filter(|r| r.clamped).count()
    }

    /// Plain-text sidecar: one `k epsilon kappa iterations clamped` line per
    /// stencil.
    pub fn save(&self, path: &Path) -> Result<(), ShapeParamError> {
        let mut out = BufWriter::new(File::create(path)?);
        for (k, r) in self.records.iter().enumerate() {
            writeln!(
                out,
                "{k} {} {} {} {}",
                r.epsilon,
                r.achieved_kappa,
                r.iterations,
                if r.clamped { 1 } else { 0 }
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Least-squares fit of `ln(epsilon)` against the ten cubic monomials in
/// `(1/h_min, ln kappa_target)`. Returns the model and the RMS residual of
/// the fit.
pub fn fit_heuristic(
    samples: &[(f64, f64, f64)],
) -> Result<(HeuristicModel, f64), ShapeParamError> {
    if samples.len() < 10 {
        return Err(ShapeParamError::TooFewSamples { need: 10 });
    }
    let distinct_targets = {
        let mut targets: Vec<f64> = samples.iter().map(|s| s.1).collect();
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        targets.len()
    };
    if distinct_targets < 2 {
        return Err(ShapeParamError::TooFewSamples { need: 10 });
    }

    let rows = samples.len();
    let mut design = DMatrix::zeros(rows, 10);
    let mut rhs = DVector::zeros(rows);
    for (s, &(h_min, kappa_target, epsilon)) in samples.iter().enumerate() {
        let r = 1.0 / h_min;
        let l = kappa_target.ln();
        for (t, &(pr, pl)) in MODEL_POWERS.iter().enumerate() {
            design[(s, t)] = r.powi(pr as i32) * l.powi(pl as i32);
        }
        rhs[s] = epsilon.ln();
    }

    let svd = design.clone().svd(true, true);
    let tol = svd.singular_values.max() * f64::EPSILON * rows.max(10) as f64;
    let rank = svd.rank(tol);
    if rank < 10 {
        return Err(ShapeParamError::RankDeficient { rank, cols: 10 });
    }
    let solution = svd
        .solve(&rhs, tol)
        .map_err(|_| ShapeParamError::RankDeficient { rank, cols: 10 })?;

    let residual = (&design * &solution - &rhs).norm() / (rows as f64).sqrt();
    let mut coefficients = [0.0; 10];
    for (c, v) in coefficients.iter_mut().zip(solution.iter()) {
        *c = *v;
    }
    Ok((HeuristicModel { coefficients }, residual))
}
