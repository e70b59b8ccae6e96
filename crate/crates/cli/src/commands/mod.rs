//! Subcommand implementations.

pub mod converge;
pub mod diagnose;
pub mod fit;
pub mod nodes;
pub mod turing;

use anyhow::Result;
use rbffd::operator::EpsilonStrategy;

/// Picks a value by priority: explicit flag, config-file entry, default.
pub fn pick<T: Clone>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

pub fn pick_required<T>(flag: Option<T>, config: Option<T>, what: &str) -> Result<T> {
    flag.or(config)
        .ok_or_else(|| anyhow::anyhow!("missing required option `{what}`"))
}

/// Renders the strategy for manifests and reports.
pub fn describe_strategy(strategy: &EpsilonStrategy) -> String {
    match strategy {
        EpsilonStrategy::PerStencilKappa(k) => format!("per-stencil-kappa {k:e}"),
        EpsilonStrategy::FixedEpsilon(e) => format!("fixed-epsilon {e}"),
    }
}
