//! Checks of the quantitative statements: decay rates, nodal structure,
//! symmetry, shape comparisons, the Pohozaev identity and the `p -> 2` limit.

mod compare;
mod decay;
mod nodal;
mod pohozaev;
mod sweep;
mod symmetry;

use serde::Serialize;

use crate::discretize::{Grid, ScalarField};

pub use compare::{faber_krahn, hks_sequence, lambda1_estimate, second_eig_bound, HksStep, Lambda1Estimate, ShapeSolver};
pub use decay::{fit_linear_decay, fit_semilinear_decay, comparison_constant_cp, FitModel, FitReport};
pub use nodal::count_nodal_domains;
pub use pohozaev::{pohozaev_residual, Nonlinearity, PohozaevTerms};
pub use sweep::{limit_constant, multistart_uniqueness, p_sweep, permute_field, SweepOptions, SweepReport, SweepRow, UniquenessReport};
pub use symmetry::{check_foliated_schwarz, check_radial, FoliatedReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    FaberKrahn,
    Hks,
    SecondBound,
    Scaling,
    Monotonicity,
}

/// An inequality `lhs >= rhs` (or equality) checked with an explicit tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub kind: ComparisonKind,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub verdict: bool,
    /// Set when the inputs satisfy the equality case of the inequality.
    pub equality: Option<bool>,
}

impl ComparisonReport {
    /// Strict inequality `lhs > rhs` with margin beyond `tolerance`.
    pub fn strict(kind: ComparisonKind, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        ComparisonReport { kind, lhs, rhs, margin: lhs - rhs, tolerance, verdict: lhs - rhs > tolerance, equality: None }
    }
}

/// Verdict document for the `verify` command.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub inputs: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

/// Nodes grouped into spherical shells of width `width` about `center`.
pub(crate) struct Shell {
    pub r_mean: f64,
    pub nodes: Vec<(usize, f64)>,
}

pub(crate) fn shells(field: &ScalarField, center: &[f64], width: f64, r_max: f64) -> Vec<Shell> {
    let mut bins: Vec<Vec<(usize, f64)>> = vec![Vec::new(); (r_max / width).ceil() as usize + 1];
    for i in 0..field.values.len() {
        let r = field.grid.radius_of(i, center);
        if r <= r_max {
            bins[(r / width).round() as usize].push((i, r));
        }
    }
    bins.into_iter()
        .filter(|b| !b.is_empty())
        .map(|nodes| Shell { r_mean: nodes.iter().map(|n| n.1).sum::<f64>() / nodes.len() as f64, nodes })
        .collect()
}

/// Largest radius such that every node at that distance from `center` is
/// at least `buffer` inside the grid.
pub(crate) fn safe_radius(grid: &Grid, center: &[f64], buffer: f64) -> f64 {
    match grid {
        Grid::Box(g) => {
            let off = center.iter().map(|c| c.abs()).fold(0.0, f64::max);
            g.half_width - off - buffer
        }
        Grid::Radial(g) => g.r_max - buffer,
    }
}
