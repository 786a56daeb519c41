//! Positive eigenvalues `Λ_1 < Λ_2 <= ...` of the pencil `(A, D)` and their
//! eigenfunctions, normalized by `φ^T D φ = 1`.
//!
//! Positive eigenvalues are reciprocals of the positive eigenvalues `μ` of
//! `C = L^{-1} D L^{-T}` with `A = L L^T`. On box grids `L` is replaced by the
//! exact sine-transform square root of `A`, and reflection-symmetric weights
//! are split into parity sectors.

pub mod lanczos;
pub mod radial;

use serde::Serialize;

use crate::discretize::{BoxGrid, Discretization, Grid, Parity, ScalarField, SectorSpace, SparseOperator};
use crate::error::{invalid, Error, Result};
use crate::geometry::DomainSpec;
use crate::linalg::{cg, dot, BandCholesky, TridiagLdl};

pub use lanczos::{lanczos, Eigs, LanczosConfig, Problem, Which};
pub use radial::{matching_function, radial_shoot, radial_shoot_ell, RadialProfile};

/// Relative width of an eigenvalue cluster counted as one eigenspace.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub k: usize,
    pub lambda: f64,
    pub phi: ScalarField,
    /// Symmetry sector label (`EEO`, `FFF`, ...) or `radial`.
    pub sector: String,
}

#[derive(Clone, Debug)]
pub struct EigenBasis {
    pub pairs: Vec<EigenPair>,
    pub gram_a: Vec<Vec<f64>>,
    pub gram_d: Vec<Vec<f64>>,
    /// Size of the eigenvalue cluster containing each pair.
    pub multiplicity: Vec<usize>,
    /// `|φ^T A φ - Λ φ^T D φ| / φ^T A φ`.
    pub rayleigh_residual: Vec<f64>,
    pub matvecs: usize,
}

/// One row of the `eig` report.
#[derive(Clone, Debug, Serialize)]
pub struct EigRow {
    pub k: usize,
    pub lambda: f64,
    pub rayleigh_residual: f64,
    pub gram_offdiag_max: f64,
}

impl EigenBasis {
    pub fn lambdas(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.pairs[k - 1].lambda
    }

    pub fn phi(&self, k: usize) -> &ScalarField {
        &self.pairs[k - 1].phi
    }

    /// Largest scaled off-diagonal Gram entry in row `i` (0-based).
    pub fn gram_offdiag_row(&self, i: usize) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.pairs.len() {
            if i != j {
                let s = (self.pairs[i].lambda * self.pairs[j].lambda).sqrt();
                m = m.max(self.gram_a[i][j].abs() / s).max(self.gram_d[i][j].abs());
            }
        }
        m
    }

    pub fn gram_offdiag_max(&self) -> f64 {
        (0..self.pairs.len()).map(|i| self.gram_offdiag_row(i)).fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<EigRow> {
        (0..self.pairs.len())
            .map(|i| EigRow {
                k: i + 1,
                lambda: self.pairs[i].lambda,
                rayleigh_residual: self.rayleigh_residual[i],
                gram_offdiag_max: self.gram_offdiag_row(i),
            })
            .collect()
    }

    fn build(
        grid: &Grid,
        found: Vec<(f64, Vec<f64>, String)>,
        k_max: usize,
        apply_a: &dyn Fn(&[f64], &mut [f64]),
        d: &[f64],
        anchor: Option<usize>,
        matvecs: usize,
    ) -> Result<EigenBasis> {
        let all: Vec<f64> = found.iter().map(|f| f.0).collect();
        if found.len() < k_max {
            return Err(Error::PartialResult { found: found.len(), requested: k_max });
        }
        let mut pairs = Vec::with_capacity(k_max);
        for (i, (lambda, mut v, sector)) in found.into_iter().take(k_max).enumerate() {
            fix_sign(&mut v, if i == 0 { anchor } else { None });
            pairs.push(EigenPair { k: i + 1, lambda, phi: ScalarField { grid: grid.clone(), values: v }, sector });
        }
        let n = grid.len();
        let av: Vec<Vec<f64>> = pairs
            .iter()
            .map(|p| {
                let mut y = vec![0.0; n];
                apply_a(&p.phi.values, &mut y);
                y
            })
            .collect();
        let wform = |x: &[f64], y: &[f64]| x.iter().zip(y).zip(d).map(|((a, b), c)| a * b * c).sum::<f64>();
        let gram_a: Vec<Vec<f64>> =
            pairs.iter().map(|p| av.iter().map(|a| dot(&p.phi.values, a)).collect()).collect();
        let gram_d: Vec<Vec<f64>> =
            pairs.iter().map(|p| pairs.iter().map(|q| wform(&p.phi.values, &q.phi.values)).collect()).collect();
        let rayleigh_residual =
            (0..k_max).map(|i| (gram_a[i][i] - pairs[i].lambda * gram_d[i][i]).abs() / gram_a[i][i].abs()).collect();
        let multiplicity = pairs
            .iter()
            .map(|p| all.iter().filter(|l| (*l - p.lambda).abs() <= CLUSTER_TOL * p.lambda).count())
            .collect();
        Ok(EigenBasis { pairs, gram_a, gram_d, multiplicity, rayleigh_residual, matvecs })
    }
}

/// Positive at `anchor` if given, otherwise at the first non-negligible node.
fn fix_sign(v: &mut [f64], anchor: Option<usize>) {
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let s = match anchor {
        Some(i) if v[i].abs() > 1e-8 * sup => v[i],
        _ => v.iter().copied().find(|x| x.abs() > 1e-8 * sup).unwrap_or(1.0),
    };
    if s < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Groups sorted eigenvalues into clusters of relative width `CLUSTER_TOL`.
pub fn cluster_sizes(lambdas: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < lambdas.len() {
        let mut j = i + 1;
        while j < lambdas.len() && (lambdas[j] - lambdas[i]).abs() <= CLUSTER_TOL * lambdas[i].abs() {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub k_max: usize,
    pub tol: f64,
    pub seed: u64,
    /// Split reflection-symmetric weights into parity sectors.
    pub use_symmetry: bool,
}

impl SolveOptions {
    pub fn new(k_max: usize) -> Self {
        SolveOptions { k_max, tol: 1e-10, seed: 0x5eed, use_symmetry: true }
    }
}

/// Generic path: `k_max` smallest positive eigenvalues of `A φ = Λ D φ` for
/// assembled matrices, returned as fields on `grid`.
pub fn solve_pencil(grid: &Grid, a: &SparseOperator, d: &SparseOperator, k_max: usize, tol: f64) -> Result<EigenBasis> {
    if k_max == 0 {
        return invalid("k_max must be at least 1");
    }
    if a.dim != d.dim || a.dim != grid.len() {
        return invalid("operator dimensions do not match the grid");
    }
    let dd = d.diag();
    let n = a.dim;
    let mut cfg = LanczosConfig::new(k_max, Which::Largest);
    cfg.tol = tol;
    cfg.floor = Some(0.0);
    let mut found = Vec::new();
    let matvecs;
    if let Some((diag, off)) = a.tridiagonal() {
        let chol = TridiagLdl::new(&diag, &off).map_err(|e| Error::Assembly(e.to_string()))?;
        if !chol.is_positive() {
            return Err(Error::Assembly("stiffness is not positive definite".into()));
        }
        let op = |x: &[f64], y: &mut [f64]| {
            y.copy_from_slice(x);
            chol.chol_upper_solve(y);
            y.iter_mut().zip(&dd).for_each(|(v, w)| *v *= w);
            chol.chol_lower_solve(y);
        };
        let e = lanczos(&Problem { dim: n, op: &op, metric: None }, &cfg);
        matvecs = e.matvecs;
        for (mu, mut y) in e.values.into_iter().zip(e.vectors) {
            chol.chol_upper_solve(&mut y);
            y.iter_mut().for_each(|v| *v /= mu.sqrt());
            found.push((1.0 / mu, y, "pencil".to_string()));
        }
    } else if a.bandwidth().saturating_mul(n) <= 50_000_000 {
        let chol = BandCholesky::new(a)?;
        let op = |x: &[f64], y: &mut [f64]| {
            y.copy_from_slice(x);
            chol.upper_solve(y);
            y.iter_mut().zip(&dd).for_each(|(v, w)| *v *= w);
            chol.lower_solve(y);
        };
        let e = lanczos(&Problem { dim: n, op: &op, metric: None }, &cfg);
        matvecs = e.matvecs;
        for (mu, mut y) in e.values.into_iter().zip(e.vectors) {
            chol.upper_solve(&mut y);
            y.iter_mut().for_each(|v| *v /= mu.sqrt());
            found.push((1.0 / mu, y, "pencil".to_string()));
        }
    } else {
        let jac: Vec<f64> = a.diag().iter().map(|v| 1.0 / v).collect();
        let op = |x: &[f64], y: &mut [f64]| {
            let b: Vec<f64> = x.iter().zip(&dd).map(|(u, w)| u * w).collect();
            y.iter_mut().for_each(|v| *v = 0.0);
            cg(
                |u, v| a.apply(u, v),
                |u, v| v.iter_mut().zip(u).zip(&jac).for_each(|((o, i), j)| *o = i * j),
                &b,
                y,
                1e-13,
                20 * n,
            );
        };
        let met = |x: &[f64], y: &mut [f64]| a.apply(x, y);
        let e = lanczos(&Problem { dim: n, op: &op, metric: Some(&met) }, &cfg);
        matvecs = e.matvecs;
        for (mu, mut y) in e.values.into_iter().zip(e.vectors) {
            y.iter_mut().for_each(|v| *v /= mu.sqrt());
            found.push((1.0 / mu, y, "pencil".to_string()));
        }
    }
    found.retain(|f| f.0 > 0.0);
    EigenBasis::build(grid, found, k_max, &|x, y| a.apply(x, y), &dd, None, matvecs)
}

/// Whether `q` is exactly symmetric under `x_axis -> -x_axis`.
fn reflection_symmetric(g: &BoxGrid, q: &[f64], axis: usize) -> bool {
    let n = g.n;
    (0..g.len()).all(|idx| {
        let (i, j, k) = g.unindex(idx);
        let mut c = [i, j, k];
        c[axis] = n - 1 - c[axis];
        q[idx] == q[g.index(c[0], c[1], c[2])]
    })
}

/// Parity sectors of a box weight, all-even first.
pub fn box_sectors(g: &BoxGrid, q: &[f64], use_symmetry: bool) -> Vec<[Parity; 3]> {
    let sym: Vec<bool> = (0..3).map(|a| use_symmetry && reflection_symmetric(g, q, a)).collect();
    let mut out = vec![[Parity::Full; 3]];
    for a in 0..3 {
        if sym[a] {
            let mut next = Vec::new();
            for s in &out {
                for p in [Parity::Even, Parity::Odd] {
                    let mut t = *s;
                    t[a] = p;
                    next.push(t);
                }
            }
            out = next;
        }
    }
    out.sort_by_key(|s| s.iter().filter(|p| **p == Parity::Odd).count());
    out
}

/// Sector operator `x -> Λ^{-1/2} S^T q S Λ^{-1/2} x` in sine coordinates.
struct SectorOp {
    space: SectorSpace,
    q: Vec<f64>,
    isq: Vec<f64>,
}

impl SectorOp {
    fn new(g: &BoxGrid, parity: [Parity; 3], q_full: &[f64]) -> Self {
        let space = SectorSpace::new(g, parity);
        let q = space.restrict_diag(q_full);
        let isq = space.lap.iter().map(|l| 1.0 / l.sqrt()).collect();
        SectorOp { space, q, isq }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((o, i), s) in y.iter_mut().zip(x).zip(&self.isq) {
            *o = i * s;
        }
        self.space.inverse(y);
        y.iter_mut().zip(&self.q).for_each(|(v, q)| *v *= q);
        self.space.forward(y);
        y.iter_mut().zip(&self.isq).for_each(|(v, s)| *v *= s);
    }

    /// Full-grid field `φ` with `φ^T D φ = 1` from a unit eigenvector.
    fn field(&self, y: &[f64], mu: f64, h3: f64) -> Vec<f64> {
        let mut z: Vec<f64> = y.iter().zip(&self.isq).map(|(a, b)| a * b).collect();
        self.space.inverse(&mut z);
        let c = 1.0 / (h3 * mu.abs()).sqrt();
        z.iter_mut().for_each(|v| *v *= c);
        self.space.scatter(&z)
    }
}

fn nearest_node(grid: &Grid, c: &[f64]) -> usize {
    match grid {
        Grid::Box(g) => {
            let pick = |x: f64| (((x + g.half_width) / g.h - 1.0).round().clamp(0.0, g.n as f64 - 1.0)) as usize;
            g.index(pick(c[0]), pick(c[1]), pick(c[2]))
        }
        Grid::Radial(_) => 0,
    }
}

/// The `k_max` smallest positive eigenvalues on a discretization.
pub fn solve(disc: &Discretization, opts: &SolveOptions) -> Result<EigenBasis> {
    if opts.k_max == 0 {
        return invalid("k_max must be at least 1");
    }
    let anchor = Some(nearest_node(&disc.grid, &disc.domain.centroid()));
    match &disc.grid {
        Grid::Radial(_) => {
            let (_, _, chol) = disc.radial_bands().expect("radial discretization");
            let d = &disc.d;
            let op = |x: &[f64], y: &mut [f64]| {
                y.copy_from_slice(x);
                chol.chol_upper_solve(y);
                y.iter_mut().zip(d).for_each(|(v, w)| *v *= w);
                chol.chol_lower_solve(y);
            };
            let mut cfg = LanczosConfig::new(opts.k_max, Which::Largest);
            cfg.tol = opts.tol;
            cfg.seed = opts.seed;
            cfg.floor = Some(0.0);
            let e = lanczos(&Problem { dim: disc.len(), op: &op, metric: None }, &cfg);
            let found = e
                .values
                .iter()
                .zip(e.vectors)
                .filter(|(mu, _)| **mu > 0.0)
                .map(|(mu, mut y)| {
                    chol.chol_upper_solve(&mut y);
                    y.iter_mut().for_each(|v| *v /= mu.sqrt());
                    (1.0 / mu, y, "radial".to_string())
                })
                .collect();
            EigenBasis::build(&disc.grid, found, opts.k_max, &|x, y| disc.apply_a(x, y), &disc.d, anchor, e.matvecs)
        }
        Grid::Box(g) => {
            let mut sectors = box_sectors(g, &disc.q, opts.use_symmetry);
            if opts.k_max == 1 {
                sectors.truncate(1);
            }
            let h3 = g.cell_volume();
            let mut mus: Vec<(f64, Vec<f64>, String)> = Vec::new();
            let mut matvecs = 0;
            for parity in sectors {
                let sop = SectorOp::new(g, parity, &disc.q);
                let mut cfg = LanczosConfig::new(opts.k_max, Which::Largest);
                cfg.tol = opts.tol;
                cfg.seed = opts.seed;
                let floor = if mus.len() >= opts.k_max { mus[opts.k_max - 1].0 * (1.0 - CLUSTER_TOL) } else { 0.0 };
                cfg.floor = Some(floor);
                cfg.basis = cfg.basis.min(sop.space.len());
                let op = |x: &[f64], y: &mut [f64]| sop.apply(x, y);
                let e = lanczos(&Problem { dim: sop.space.len(), op: &op, metric: None }, &cfg);
                matvecs += e.matvecs;
                for (mu, y) in e.values.iter().zip(&e.vectors) {
                    if *mu > floor {
                        mus.push((*mu, sop.field(y, *mu, h3), sop.space.label()));
                    }
                }
                mus.sort_by(|a, b| b.0.total_cmp(&a.0));
                if mus.len() > opts.k_max {
                    let cut = mus[opts.k_max - 1].0 * (1.0 - CLUSTER_TOL);
                    mus.retain(|m| m.0 > cut);
                }
            }
            let found = mus.into_iter().map(|(mu, v, s)| (1.0 / mu, v, s)).collect();
            EigenBasis::build(&disc.grid, found, opts.k_max, &|x, y| disc.apply_a(x, y), &disc.d, anchor, matvecs)
        }
    }
}

/// Convenience wrapper: box grid of half width `l` and `n` nodes per axis.
pub fn solve_box(domain: &DomainSpec, l: f64, n: usize, k_max: usize) -> Result<EigenBasis> {
    let disc = Discretization::box_grid(BoxGrid::new(l, n)?, domain)?;
    solve(&disc, &SolveOptions::new(k_max))
}

/// Negative eigenvalue of smallest magnitude and its eigenfunction, if any.
pub fn negative_eigenvalue(disc: &Discretization) -> Result<Option<(f64, ScalarField)>> {
    let mut cfg = LanczosConfig::new(1, Which::Smallest);
    cfg.confirm = false;
    match &disc.grid {
        Grid::Box(g) => {
            let parity = box_sectors(g, &disc.q, true)[0];
            let sop = SectorOp::new(g, parity, &disc.q);
            let op = |x: &[f64], y: &mut [f64]| sop.apply(x, y);
            let e = lanczos(&Problem { dim: sop.space.len(), op: &op, metric: None }, &cfg);
            match e.values.first() {
                Some(mu) if *mu < 0.0 => {
                    let v = sop.field(&e.vectors[0], *mu, g.cell_volume());
                    Ok(Some((1.0 / mu, disc.field(v))))
                }
                _ => Ok(None),
            }
        }
        Grid::Radial(_) => {
            let (_, _, chol) = disc.radial_bands().expect("radial discretization");
            let d = &disc.d;
            let op = |x: &[f64], y: &mut [f64]| {
                y.copy_from_slice(x);
                chol.chol_upper_solve(y);
                y.iter_mut().zip(d).for_each(|(v, w)| *v *= w);
                chol.chol_lower_solve(y);
            };
            let e = lanczos(&Problem { dim: disc.len(), op: &op, metric: None }, &cfg);
            match e.values.first() {
                Some(mu) if *mu < 0.0 => {
                    let mut y = e.vectors[0].clone();
                    chol.chol_upper_solve(&mut y);
                    y.iter_mut().for_each(|v| *v /= mu.abs().sqrt());
                    Ok(Some((1.0 / mu, disc.field(y))))
                }
                _ => Ok(None),
            }
        }
    }
}

/// `(L, Λ_-(L))` for each box half width in `l_list` at `n` nodes per axis.
pub fn negative_spectrum_scan(domain: &DomainSpec, l_list: &[f64], n: usize) -> Result<Vec<(f64, f64)>> {
    if l_list.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("box half widths must be strictly ascending");
    }
    let mut out = Vec::new();
    for &l in l_list {
        let disc = Discretization::box_grid(BoxGrid::new(l, n)?, domain)?;
        let lam = negative_eigenvalue(&disc)?.map(|x| x.0).unwrap_or(f64::NEG_INFINITY);
        out.push((l, lam));
    }
    Ok(out)
}
