use crate::error::{invalid, Result};
use crate::geometry::{DomainKind, DomainSpec};

use super::grid::{BoxGrid, Grid, RadialGrid};
use super::sparse::SparseOperator;

/// Subcell offsets in units of `h` for the 4x4x4 midpoint rule.
const SUB: [f64; 4] = [-0.375, -0.125, 0.125, 0.375];

/// Discrete Dirichlet form: `u^T A u` approximates `∫|∇u|^2`.
pub fn assemble_stiffness(grid: &Grid) -> SparseOperator {
    match grid {
        Grid::Box(g) => box_stiffness(g),
        Grid::Radial(g) => {
            let (d, e) = radial_stiffness_bands(g);
            let m = g.m;
            let rows = (0..m)
                .map(|i| {
                    let mut r = vec![(i, d[i])];
                    if i > 0 {
                        r.push((i - 1, e[i - 1]));
                    }
                    if i + 1 < m {
                        r.push((i + 1, e[i]));
                    }
                    r
                })
                .collect();
            SparseOperator::from_rows(rows)
        }
    }
}

fn box_stiffness(g: &BoxGrid) -> SparseOperator {
    let n = g.n;
    let len = g.len();
    let h = g.h;
    let mut indptr = Vec::with_capacity(len + 1);
    let mut indices = Vec::with_capacity(7 * len);
    let mut values = Vec::with_capacity(7 * len);
    indptr.push(0);
    for idx in 0..len {
        let (i, j, k) = g.unindex(idx);
        let mut push = |c: usize, v: f64| {
            indices.push(c);
            values.push(v);
        };
        if i > 0 {
            push(idx - n * n, -h);
        }
        if j > 0 {
            push(idx - n, -h);
        }
        if k > 0 {
            push(idx - 1, -h);
        }
        push(idx, 6.0 * h);
        if k + 1 < n {
            push(idx + 1, -h);
        }
        if j + 1 < n {
            push(idx + n, -h);
        }
        if i + 1 < n {
            push(idx + n * n, -h);
        }
        indptr.push(indices.len());
    }
    SparseOperator { dim: len, indptr, indices, values }
}

/// Diagonal and off-diagonal of the radial finite-volume stiffness.
pub fn radial_stiffness_bands(g: &RadialGrid) -> (Vec<f64>, Vec<f64>) {
    let m = g.m;
    let area = g.sphere_area();
    let kappa: Vec<f64> = (0..m)
        .map(|i| area * ((i as f64 + 0.5) * g.delta).powi(g.dim as i32 - 1) / g.delta)
        .collect();
    let d = (0..m).map(|i| kappa[i] + if i > 0 { kappa[i - 1] } else { 0.0 }).collect();
    let e = kappa[..m - 1].iter().map(|k| -k).collect();
    (d, e)
}

/// Quadrature weight of each node: `h^3` or the shell volume.
pub fn mass_weights(grid: &Grid) -> Vec<f64> {
    match grid {
        Grid::Box(g) => vec![g.cell_volume(); g.len()],
        Grid::Radial(g) => (0..g.m).map(|i| g.shell_volume(i)).collect(),
    }
}

/// Signed cell average `q_i ∈ [-1, 1]` of the weight.
pub fn weight_fractions(grid: &Grid, domain: &DomainSpec) -> Result<Vec<f64>> {
    match grid {
        Grid::Box(g) => {
            if domain.dim != 3 {
                return invalid(format!("box grids need a 3-dimensional domain, got {}", domain.dim));
            }
            let (lo, hi) = domain.bounding_box();
            if lo.iter().chain(&hi).any(|v| v.abs() >= g.half_width) {
                return invalid(format!("domain {} escapes the box of half width {}", domain.label(), g.half_width));
            }
            let reach = 0.5 * 3f64.sqrt() * g.h;
            Ok((0..g.len())
                .map(|idx| {
                    let p = g.point(idx);
                    let sd = domain.signed_distance(&p);
                    if sd <= -reach {
                        1.0
                    } else if sd >= reach {
                        -1.0
                    } else {
                        subcell_average(domain, &p, g.h)
                    }
                })
                .collect())
        }
        Grid::Radial(g) => {
            let shells: Vec<(f64, f64)> = match &domain.kind {
                DomainKind::Ball { radius, .. } if domain.is_centered_radial() => vec![(0.0, *radius)],
                DomainKind::Annulus { r_in, r_out, .. } if domain.is_centered_radial() => vec![(*r_in, *r_out)],
                _ => return invalid(format!("radial grids need a centered ball or annulus, got {}", domain.label())),
            };
            if domain.dim != g.dim {
                return invalid(format!("domain dimension {} differs from grid dimension {}", domain.dim, g.dim));
            }
            if domain.char_radius() >= g.r_max {
                return invalid(format!("domain radius {} reaches r_max = {}", domain.char_radius(), g.r_max));
            }
            let n = g.dim as i32;
            Ok((0..g.m)
                .map(|i| {
                    let lo = (g.r(i) - 0.5 * g.delta).max(0.0);
                    let hi = g.r(i) + 0.5 * g.delta;
                    let total = hi.powi(n) - lo.powi(n);
                    let inside: f64 = shells
                        .iter()
                        .map(|&(a, b)| {
                            let (x, y) = (lo.max(a), hi.min(b));
                            if y > x {
                                y.powi(n) - x.powi(n)
                            } else {
                                0.0
                            }
                        })
                        .sum();
                    (2.0 * inside / total - 1.0).clamp(-1.0, 1.0)
                })
                .collect())
        }
    }
}

fn subcell_average(domain: &DomainSpec, p: &[f64; 3], h: f64) -> f64 {
    let mut s = 0i32;
    for a in SUB {
        for b in SUB {
            for c in SUB {
                s += domain.indicator(&[p[0] + a * h, p[1] + b * h, p[2] + c * h]) as i32;
            }
        }
    }
    s as f64 / 64.0
}

/// Diagonal `D = diag(q_i w_i)`, so `u^T D v` approximates `∫Q u v`.
pub fn assemble_weight(grid: &Grid, domain: &DomainSpec) -> Result<SparseOperator> {
    let q = weight_fractions(grid, domain)?;
    let w = mass_weights(grid);
    let d: Vec<f64> = q.iter().zip(&w).map(|(a, b)| a * b).collect();
    Ok(SparseOperator::diagonal(&d))
}
