use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{BoxGrid, Discretization, Grid};
use crate::eigensolve::{solve, SolveOptions};
use crate::error::{invalid, Result};
use crate::geometry::SignedPerm;
use crate::linearized::{assemble_linearized, default_kernel_tol, spectrum_near_zero};
use crate::semilinear::{critical_exponent, ground_state, GroundState, Init, MinimizeOptions};

/// `exp(-½ Σ d φ² ln φ²)` for `φ` normalized by `Σ d φ² = 1`.
pub fn limit_constant(disc: &Discretization, phi1: &[f64]) -> f64 {
    let s: f64 = phi1
        .iter()
        .zip(&disc.d)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, d)| d * v * v * (v * v).ln())
        .sum();
    (-0.5 * s).exp()
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub minimize: MinimizeOptions,
    /// Defaults to the spacing-based threshold.
    pub kernel_tol: Option<f64>,
    /// Eigenvalues requested from the linearized operator.
    pub window: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { minimize: MinimizeOptions::default(), kernel_tol: None, window: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub alpha_p: f64,
    pub gap_to_lambda1: f64,
    pub const_estimate: f64,
    pub sup_pow: f64,
    pub ln_sup: f64,
    /// `None` below `p = 2`, where the linearization is not defined.
    pub min_abs_lin_eig: Option<f64>,
    pub approx_kernel_dim: Option<usize>,
    pub negative_count: Option<usize>,
    pub residual: f64,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(p: f64, e: String) -> Self {
        SweepRow {
            p,
            alpha_p: f64::NAN,
            gap_to_lambda1: f64::NAN,
            const_estimate: f64::NAN,
            sup_pow: f64::NAN,
            ln_sup: f64::NAN,
            min_abs_lin_eig: None,
            approx_kernel_dim: None,
            negative_count: None,
            residual: f64::NAN,
            error: Some(e),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.alpha_p, self.gap_to_lambda1, self.const_estimate, self.sup_pow, self.ln_sup].iter().all(|v| v.is_finite())
            && self.min_abs_lin_eig.is_none_or(f64::is_finite)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub lambda1: f64,
    pub target_constant: f64,
    pub rows: Vec<SweepRow>,
}

fn sweep_row(disc: &Discretization, p: f64, lambda1: f64, phi1: &[f64], opts: &SweepOptions) -> Result<(SweepRow, GroundState)> {
    let s = ground_state(disc, p, Init::Field(phi1.to_vec()), &opts.minimize)?;
    let sup = s.sup_norm_scaling();
    let mut row = SweepRow {
        p,
        alpha_p: s.alpha_p,
        gap_to_lambda1: s.alpha_p - lambda1,
        const_estimate: ((lambda1 / s.alpha_p).ln() / (2.0 - p)).exp(),
        sup_pow: sup.m_pow,
        ln_sup: sup.ln_m,
        min_abs_lin_eig: None,
        approx_kernel_dim: None,
        negative_count: None,
        residual: s.residual,
        error: None,
    };
    if p > 2.0 {
        let tol = opts.kernel_tol.unwrap_or_else(|| default_kernel_tol(disc.spacing()));
        let w = spectrum_near_zero(&assemble_linearized(disc, &s)?, opts.window, tol)?;
        row.min_abs_lin_eig = Some(w.min_abs);
        row.approx_kernel_dim = Some(w.approx_kernel_dim);
        row.negative_count = Some(w.negative_count);
    }
    Ok((row, s))
}

/// Ground states along `p_list` started from `φ_1`; failures are recorded in
/// their row and the sweep continues.
pub fn p_sweep(disc: &Discretization, p_list: &[f64], opts: &SweepOptions) -> Result<SweepReport> {
    if p_list.is_empty() {
        return invalid("sweep needs at least one exponent");
    }
    let crit = critical_exponent(disc.grid.dim());
    if let Some(p) = p_list.iter().find(|p| !(**p > 1.0 && **p < crit) || (**p - 2.0).abs() < 1e-12) {
        return invalid(format!("exponent {p} must lie in (1, {crit}) and differ from 2"));
    }
    let basis = solve(disc, &SolveOptions::new(1))?;
    let lambda1 = basis.lambda(1);
    let phi1 = &basis.phi(1).values;
    let rows = p_list
        .iter()
        .map(|&p| match sweep_row(disc, p, lambda1, phi1, opts) {
            Ok((row, _)) => row,
            Err(e) => SweepRow::failed(p, e.to_string()),
        })
        .collect();
    Ok(SweepReport { lambda1, target_constant: limit_constant(disc, phi1), rows })
}

/// `w ∘ g` on a box grid symmetric about the origin.
pub fn permute_field(g: &BoxGrid, values: &[f64], sp: &SignedPerm) -> Vec<f64> {
    let n = g.n;
    let mut out = vec![0.0; values.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let (i, j, k) = g.unindex(idx);
        let src = [i, j, k];
        let t: [usize; 3] = std::array::from_fn(|b| {
            let s = src[sp.perm[b]];
            if sp.sign[b] > 0.0 {
                s
            } else {
                n - 1 - s
            }
        });
        *o = values[g.index(t[0], t[1], t[2])];
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub p: f64,
    pub n_starts: usize,
    pub n_failed: usize,
    /// Runs whose `α` is within the tolerance of the best.
    pub n_least: usize,
    pub best_alpha: f64,
    /// Clusters of least-energy runs modulo the domain's symmetry group.
    pub n_distinct: usize,
    /// Clusters without the symmetry quotient.
    pub raw_clusters: usize,
    pub max_pairwise_dist: f64,
    pub alphas: Vec<f64>,
    /// Linearized `min |λ|` at the best run.
    pub min_abs_lin_eig: Option<f64>,
}

pub const CLUSTER_DIST: f64 = 1e-6;
pub const ALPHA_TOL: f64 = 1e-8;

fn rel_dist(disc: &Discretization, a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).zip(&disc.mass).map(|((x, y), m)| m * (x - y) * (x - y)).sum();
    let n: f64 = a.iter().zip(&disc.mass).map(|(x, m)| m * x * x).sum();
    (d / n).sqrt()
}

fn cluster_count(disc: &Discretization, fields: &[&Vec<f64>], images: &dyn Fn(&[f64]) -> Vec<Vec<f64>>) -> (usize, f64) {
    let orbits: Vec<Vec<Vec<f64>>> = fields.iter().map(|f| images(f)).collect();
    let dist = |i: usize, j: usize| orbits[j].iter().map(|w| rel_dist(disc, fields[i], w)).fold(f64::INFINITY, f64::min);
    let mut reps: Vec<usize> = Vec::new();
    let mut max_d = 0.0f64;
    for i in 0..fields.len() {
        for j in 0..i {
            max_d = max_d.max(dist(i, j));
        }
        if !reps.iter().any(|&r| dist(i, r) <= CLUSTER_DIST) {
            reps.push(i);
        }
    }
    (reps.len(), max_d)
}

/// Least-energy solutions from `φ_1` and `n_starts - 1` random bumps,
/// clustered modulo the symmetries of the domain.
pub fn multistart_uniqueness(
    disc: &Discretization,
    p: f64,
    n_starts: usize,
    seed: u64,
    opts: &MinimizeOptions,
) -> Result<UniquenessReport> {
    if n_starts == 0 {
        return invalid("n_starts must be at least 1");
    }
    if !(p > 2.0 && p <= 2.5) {
        return invalid(format!("uniqueness runs need p in (2, 2.5], got {p}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs: Vec<GroundState> = Vec::new();
    let mut n_failed = 0;
    for i in 0..n_starts {
        let init = if i == 0 { Init::Eigenfunction } else { Init::Bump(rng.next_u64()) };
        match ground_state(disc, p, init, opts) {
            Ok(s) => runs.push(s),
            Err(_) => n_failed += 1,
        }
    }
    let alphas: Vec<f64> = runs.iter().map(|s| s.alpha_p).collect();
    let best = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let least: Vec<&GroundState> = runs.iter().filter(|s| s.alpha_p - best <= ALPHA_TOL * best).collect();
    let fields: Vec<&Vec<f64>> = least.iter().map(|s| &s.v.values).collect();
    let group = match &disc.grid {
        Grid::Box(_) => disc.domain.symmetry_group(),
        Grid::Radial(_) => vec![SignedPerm::identity()],
    };
    let orbit = |v: &[f64]| -> Vec<Vec<f64>> {
        match &disc.grid {
            Grid::Box(g) => group.iter().map(|sp| permute_field(g, v, sp)).collect(),
            Grid::Radial(_) => vec![v.to_vec()],
        }
    };
    let (n_distinct, max_d) = cluster_count(disc, &fields, &orbit);
    let (raw, _) = cluster_count(disc, &fields, &|v: &[f64]| vec![v.to_vec()]);
    let min_abs = match least.first() {
        Some(s) => {
            let op = assemble_linearized(disc, s)?;
            Some(spectrum_near_zero(&op, 1, default_kernel_tol(disc.spacing()))?.min_abs)
        }
        None => None,
    };
    Ok(UniquenessReport {
        p,
        n_starts,
        n_failed,
        n_least: least.len(),
        best_alpha: best,
        n_distinct,
        raw_clusters: raw,
        max_pairwise_dist: max_d,
        alphas,
        min_abs_lin_eig: min_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{RadialGrid, ScalarField};
    use crate::geometry::DomainSpec;

    #[test]
    fn permutation_matches_pointwise_definition() {
        let g = BoxGrid::new(1.0, 9).unwrap();
        let f = ScalarField::from_fn(Grid::Box(g.clone()), |x| x[0] + 10.0 * x[1] + 100.0 * x[2] * x[2]);
        let sp = SignedPerm { perm: [2, 0, 1], sign: [-1.0, 1.0, -1.0] };
        let out = permute_field(&g, &f.values, &sp);
        for idx in [0, 17, 300, 728] {
            let y = sp.apply(&g.point(idx));
            let want = y[0] + 10.0 * y[1] + 100.0 * y[2] * y[2];
            assert!((out[idx] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_validation_and_rows() {
        let b = DomainSpec::ball3(1.0).unwrap();
        let disc = Discretization::radial(RadialGrid::new(3, 15.0, 1500).unwrap(), &b).unwrap();
        assert!(p_sweep(&disc, &[], &SweepOptions::default()).is_err());
        assert!(p_sweep(&disc, &[2.0], &SweepOptions::default()).is_err());
        assert!(p_sweep(&disc, &[6.5], &SweepOptions::default()).is_err());
        let rep = p_sweep(&disc, &[2.2, 1.8], &SweepOptions::default()).unwrap();
        assert!(rep.rows.iter().all(|r| r.is_finite() && r.error.is_none()), "{:?}", rep.rows);
        assert_eq!(rep.rows[0].negative_count, Some(1));
        assert!(rep.rows[1].min_abs_lin_eig.is_none());
        // v_p above and below 2 bracket φ_1: α_p - Λ_1 changes sign
        assert!(rep.rows[0].gap_to_lambda1 * rep.rows[1].gap_to_lambda1 < 0.0);
    }

    #[test]
    fn single_start_is_unique() {
        let b = DomainSpec::ball3(1.0).unwrap();
        let disc = Discretization::radial(RadialGrid::new(3, 15.0, 1500).unwrap(), &b).unwrap();
        let rep = multistart_uniqueness(&disc, 2.1, 1, 3, &MinimizeOptions::default()).unwrap();
        assert_eq!((rep.n_distinct, rep.n_failed), (1, 0));
        let rep = multistart_uniqueness(&disc, 2.2, 4, 3, &MinimizeOptions::default()).unwrap();
        assert_eq!(rep.n_distinct, 1, "{rep:?}");
        assert!(multistart_uniqueness(&disc, 2.6, 4, 3, &MinimizeOptions::default()).is_err());
    }
}
