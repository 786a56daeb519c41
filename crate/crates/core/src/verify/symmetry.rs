use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{BoxGrid, Grid, ScalarField};
use crate::error::{invalid, Error, Result};
use crate::geometry::DomainSpec;

use super::shells;

/// Number of random directions in the reflection test.
pub const REFLECTION_DIRECTIONS: usize = 20;
const LEGENDRE_DEGREE: usize = 6;
const RADIAL_DEGREE: usize = 2;

fn require_centered(domain: &DomainSpec) -> Result<()> {
    if !domain.is_centered_radial() {
        return invalid(format!("symmetry checks need a centered ball or annulus, got {}", domain.label()));
    }
    Ok(())
}

/// Least squares coefficients; `None` when the system is rank deficient.
fn lsq(rows: &[Vec<f64>], y: &[f64]) -> Option<DVector<f64>> {
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return None;
    }
    svd.solve(&DVector::from_column_slice(y), 0.0).ok()
}

fn spread(r: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = r.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

fn shell_limit(g: &BoxGrid) -> f64 {
    g.half_width - 2.0 * g.h
}

fn equal_radius_spread(nodes: &[(usize, f64)], values: &[f64]) -> f64 {
    let mut sorted: Vec<(f64, f64)> = nodes.iter().map(|(i, r)| (*r, values[*i])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted
        .chunk_by(|a, b| (a.0 - b.0).abs() <= 1e-9 * b.0.max(1.0))
        .map(|c| spread(c.iter().map(|v| v.1)))
        .fold(0.0, f64::max)
}

/// Largest within-shell variation of `φ` about a quadratic radial trend,
/// relative to `sup|φ|`, over shells of width `h`.
pub fn check_radial(phi: &ScalarField, domain: &DomainSpec) -> Result<f64> {
    require_centered(domain)?;
    let g = match &phi.grid {
        Grid::Radial(_) => return Ok(0.0),
        Grid::Box(g) => g,
    };
    let sup = phi.sup_abs();
    if sup == 0.0 {
        return Ok(0.0);
    }
    let mut dev = 0.0f64;
    for s in shells(phi, &[0.0; 3], g.h, shell_limit(g)) {
        let rows: Vec<Vec<f64>> = s.nodes.iter().map(|(_, r)| (0..=RADIAL_DEGREE).map(|a| (r - s.r_mean).powi(a as i32)).collect()).collect();
        let y: Vec<f64> = s.nodes.iter().map(|(i, _)| phi.values[*i]).collect();
        let d = match lsq(&rows, &y) {
            Some(c) => spread(rows.iter().zip(&y).map(|(row, v)| v - row.iter().zip(c.iter()).map(|(a, b)| a * b).sum::<f64>())),
            // too few distinct radii for the trend: compare equal radii only
            None => equal_radius_spread(&s.nodes, &phi.values),
        };
        dev = dev.max(d);
    }
    Ok(dev / sup)
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliatedReport {
    pub axis: [f64; 3],
    /// Largest within-shell deviation from an axially symmetric model.
    pub axial_dev: f64,
    /// Largest increase of the axial profile along the polar angle.
    pub monotonicity_violation: f64,
    /// Largest over sampled directions `e` of the smaller of the two one-sided
    /// reflection violations on the half space `{x·e > 0}`.
    pub reflection_violation: f64,
    pub directions: usize,
}

impl FoliatedReport {
    /// Consistent with foliated Schwarz symmetry at relative level `tol`;
    /// the random-direction test can falsify but not certify.
    pub fn consistent(&self, tol: f64) -> bool {
        self.axial_dev < tol && self.monotonicity_violation < tol && self.reflection_violation < tol
    }
}

fn legendre(t: f64) -> [f64; LEGENDRE_DEGREE + 1] {
    let mut p = [0.0; LEGENDRE_DEGREE + 1];
    p[0] = 1.0;
    p[1] = t;
    for l in 1..LEGENDRE_DEGREE {
        let lf = l as f64;
        p[l + 1] = ((2.0 * lf + 1.0) * t * p[l] - lf * p[l - 1]) / (lf + 1.0);
    }
    p
}

fn axial_row(dr: f64, t: f64) -> Vec<f64> {
    let pl = legendre(t);
    let mut row = Vec::with_capacity((RADIAL_DEGREE + 1) * (LEGENDRE_DEGREE + 1));
    for a in 0..=RADIAL_DEGREE {
        for p in pl {
            row.push(dr.powi(a as i32) * p);
        }
    }
    row
}

fn find_axis(phi: &ScalarField, g: &BoxGrid) -> Result<[f64; 3]> {
    let mut m = [0.0; 3];
    let mut scale = 0.0;
    for (i, v) in phi.values.iter().enumerate() {
        let x = g.point(i);
        for a in 0..3 {
            m[a] += x[a] * v;
        }
        scale += (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() * v.abs();
    }
    let nm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if nm > 1e-6 * scale {
        return Ok(m.map(|c| c / nm));
    }
    let imax = (0..phi.values.len()).max_by(|&a, &b| phi.values[a].abs().total_cmp(&phi.values[b].abs())).unwrap_or(0);
    let x = g.point(imax);
    let nx = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if nx > 0.5 * g.h {
        let s = phi.values[imax].signum();
        return Ok(x.map(|c| s * c / nx));
    }
    let exact = shells(phi, &[0.0; 3], g.h, g.half_width * 3f64.sqrt())
        .iter()
        .map(|s| equal_radius_spread(&s.nodes, &phi.values))
        .fold(0.0, f64::max);
    if exact <= 1e-9 * phi.sup_abs() {
        return Ok([1.0, 0.0, 0.0]);
    }
    Err(Error::AxisUndetermined)
}

/// Tensor cubic Lagrange interpolation; `None` when the stencil leaves the grid.
fn cubic(phi: &[f64], g: &BoxGrid, x: &[f64; 3]) -> Option<f64> {
    let mut base = [0usize; 3];
    let mut w = [[0.0; 4]; 3];
    for a in 0..3 {
        let s = (x[a] + g.half_width) / g.h - 1.0;
        let b = s.floor() as isize - 1;
        if b < 0 || b + 3 >= g.n as isize {
            return None;
        }
        base[a] = b as usize;
        let t = s - b as f64;
        let nodes = [0.0, 1.0, 2.0, 3.0];
        for j in 0..4 {
            let mut l = 1.0;
            for k in 0..4 {
                if k != j {
                    l *= (t - nodes[k]) / (nodes[j] - nodes[k]);
                }
            }
            w[a][j] = l;
        }
    }
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let wij = w[0][i] * w[1][j];
            for k in 0..4 {
                acc += wij * w[2][k] * phi[g.index(base[0] + i, base[1] + j, base[2] + k)];
            }
        }
    }
    Some(acc)
}

fn reflection_violation(phi: &ScalarField, g: &BoxGrid, r_cut: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sup = phi.sup_abs();
    let nodes: Vec<usize> = (0..g.len()).filter(|&i| phi.grid.radius_of(i, &[0.0; 3]) <= r_cut).collect();
    let mut worst = 0.0f64;
    for _ in 0..REFLECTION_DIRECTIONS {
        let z: f64 = rng.random_range(-1.0..1.0);
        let az: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let s = (1.0 - z * z).sqrt();
        let e = [s * az.cos(), s * az.sin(), z];
        let (mut up, mut down) = (0.0f64, 0.0f64);
        for &i in &nodes {
            let x = g.point(i);
            let xe = x[0] * e[0] + x[1] * e[1] + x[2] * e[2];
            if xe <= 0.0 {
                continue;
            }
            let y = [x[0] - 2.0 * xe * e[0], x[1] - 2.0 * xe * e[1], x[2] - 2.0 * xe * e[2]];
            if let Some(v) = cubic(&phi.values, g, &y) {
                let d = phi.values[i] - v;
                up = up.max(-d);
                down = down.max(d);
            }
        }
        worst = worst.max(up.min(down));
    }
    worst / sup
}

/// Foliated Schwarz symmetry diagnostics about the first-moment axis.
pub fn check_foliated_schwarz(phi: &ScalarField, domain: &DomainSpec, seed: u64) -> Result<FoliatedReport> {
    require_centered(domain)?;
    let g = match &phi.grid {
        Grid::Radial(_) => {
            return Ok(FoliatedReport {
                axis: [1.0, 0.0, 0.0],
                axial_dev: 0.0,
                monotonicity_violation: 0.0,
                reflection_violation: 0.0,
                directions: 0,
            })
        }
        Grid::Box(g) => g,
    };
    let sup = phi.sup_abs();
    if sup == 0.0 {
        return Err(Error::AxisUndetermined);
    }
    let axis = find_axis(phi, g)?;
    let limit = shell_limit(g);
    let (mut axial, mut mono) = (0.0f64, 0.0f64);
    let mut r_cut = 0.0f64;
    for s in shells(phi, &[0.0; 3], g.h, limit) {
        if s.nodes.iter().any(|(i, _)| phi.values[*i].abs() >= 1e-3 * sup) {
            r_cut = r_cut.max(s.r_mean + g.h);
        }
        let cos_of = |i: usize, r: f64| {
            let x = g.point(i);
            if r == 0.0 {
                0.0
            } else {
                (x[0] * axis[0] + x[1] * axis[1] + x[2] * axis[2]) / r
            }
        };
        let rows: Vec<Vec<f64>> = s.nodes.iter().map(|&(i, r)| axial_row(r - s.r_mean, cos_of(i, r))).collect();
        let y: Vec<f64> = s.nodes.iter().map(|(i, _)| phi.values[*i]).collect();
        if rows.len() <= 2 * rows[0].len() {
            continue;
        }
        let Some(c) = lsq(&rows, &y) else { continue };
        let fit = |row: &[f64]| row.iter().zip(c.iter()).map(|(a, b)| a * b).sum::<f64>();
        axial = axial.max(spread(rows.iter().zip(&y).map(|(row, v)| v - fit(row))));
        let mut running_min = f64::INFINITY;
        for j in 0..=180 {
            let t = (std::f64::consts::PI * j as f64 / 180.0).cos();
            let val = fit(&axial_row(0.0, t));
            running_min = running_min.min(val);
            mono = mono.max(val - running_min);
        }
    }
    let r_cut = r_cut.min(limit - g.h);
    Ok(FoliatedReport {
        axis,
        axial_dev: axial / sup,
        monotonicity_violation: mono / sup,
        reflection_violation: reflection_violation(phi, g, r_cut, seed),
        directions: REFLECTION_DIRECTIONS,
    })
}
