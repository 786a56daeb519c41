use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::unit_ball_volume;

/// Uniform tensor grid of interior nodes on `[-L, L]^3` with Dirichlet data on
/// the box boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub n: usize,
    pub half_width: f64,
    pub h: f64,
}

impl BoxGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return invalid(format!("grid half width must be positive, got {half_width}"));
        }
        if n < 8 {
            return invalid(format!("grid needs at least 8 nodes per axis, got {n}"));
        }
        Ok(BoxGrid { n, half_width, h: 2.0 * half_width / (n as f64 + 1.0) })
    }

    /// Grid with spacing at most `h` on `[-L, L]^3`.
    pub fn with_spacing(half_width: f64, h: f64) -> Result<Self> {
        let n = (2.0 * half_width / h - 1.0 - 1e-9).ceil().max(8.0) as usize;
        Self::new(half_width, n)
    }

    pub fn dim(&self) -> usize {
        3
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along any axis; exactly antisymmetric under
    /// `i -> n - 1 - i`.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (2.0 * i as f64 + 1.0 - self.n as f64) * (0.5 * self.h)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.unindex(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Cell volume `h^3`.
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }
}

/// Uniform radial mesh `r_i = i * delta`, `i = 0..m`, with a Dirichlet node
/// at `r_max` and the regularity condition at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub dim: usize,
    pub r_max: f64,
    pub m: usize,
    pub delta: f64,
}

impl RadialGrid {
    pub fn new(dim: usize, r_max: f64, m: usize) -> Result<Self> {
        if dim < 3 {
            return invalid(format!("radial dimension must be at least 3, got {dim}"));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return invalid(format!("r_max must be positive, got {r_max}"));
        }
        if m < 8 {
            return invalid(format!("radial grid needs at least 8 nodes, got {m}"));
        }
        Ok(RadialGrid { dim, r_max, m, delta: r_max / m as f64 })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.delta
    }

    /// Surface measure of the unit sphere in `R^dim`.
    pub fn sphere_area(&self) -> f64 {
        self.dim as f64 * unit_ball_volume(self.dim)
    }

    /// Volume of the shell cell `[r_i - delta/2, r_i + delta/2]` (clipped at 0).
    pub fn shell_volume(&self, i: usize) -> f64 {
        let n = self.dim as i32;
        let lo = (self.r(i) - 0.5 * self.delta).max(0.0);
        let hi = self.r(i) + 0.5 * self.delta;
        unit_ball_volume(self.dim) * (hi.powi(n) - lo.powi(n))
    }
}

/// Either kind of mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Box(BoxGrid),
    Radial(RadialGrid),
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Box(g) => g.len(),
            Grid::Radial(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Characteristic spacing.
    pub fn spacing(&self) -> f64 {
        match self {
            Grid::Box(g) => g.h,
            Grid::Radial(g) => g.delta,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Box(_) => 3,
            Grid::Radial(g) => g.dim,
        }
    }

    /// Distance of node `idx` from the point `c` (radial grids ignore `c`).
    pub fn radius_of(&self, idx: usize, c: &[f64]) -> f64 {
        match self {
            Grid::Box(g) => {
                let p = g.point(idx);
                ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
            }
            Grid::Radial(g) => g.r(idx),
        }
    }

    /// Outer extent (box half width or `r_max`).
    pub fn extent(&self) -> f64 {
        match self {
            Grid::Box(g) => g.half_width,
            Grid::Radial(g) => g.r_max,
        }
    }
}

/// Grid function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("field has {} values for {} nodes", values.len(), grid.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("field contains non-finite values");
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        ScalarField { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = match &grid {
            Grid::Box(g) => (0..g.len()).map(|i| f(&g.point(i))).collect(),
            Grid::Radial(g) => (0..g.len()).map(|i| f(&[g.r(i)])).collect(),
        };
        ScalarField { grid, values }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at an arbitrary point by trilinear (box) or linear (radial)
    /// interpolation; zero outside the mesh.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        match &self.grid {
            Grid::Box(g) => {
                let n = g.n as isize;
                let mut base = [0isize; 3];
                let mut frac = [0.0; 3];
                for a in 0..3 {
                    let s = (x[a] + g.half_width) / g.h - 1.0;
                    let f = s.floor();
                    base[a] = f as isize;
                    frac[a] = s - f;
                }
                let at = |i: isize, j: isize, k: isize| -> f64 {
                    if i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n {
                        0.0
                    } else {
                        self.values[g.index(i as usize, j as usize, k as usize)]
                    }
                };
                let mut acc = 0.0;
                for di in 0..2 {
                    for dj in 0..2 {
                        for dk in 0..2 {
                            let w = (if di == 1 { frac[0] } else { 1.0 - frac[0] })
                                * (if dj == 1 { frac[1] } else { 1.0 - frac[1] })
                                * (if dk == 1 { frac[2] } else { 1.0 - frac[2] });
                            if w != 0.0 {
                                acc += w * at(base[0] + di, base[1] + dj, base[2] + dk);
                            }
                        }
                    }
                }
                acc
            }
            Grid::Radial(g) => {
                let r = if x.len() == 1 { x[0].abs() } else { x.iter().map(|v| v * v).sum::<f64>().sqrt() };
                let s = r / g.delta;
                let i = s.floor() as usize;
                let f = s - i as f64;
                let at = |i: usize| if i < g.m { self.values[i] } else { 0.0 };
                (1.0 - f) * at(i) + f * at(i + 1)
            }
        }
    }

    /// CSV with header `x,y,z,value` (box) or `r,value` (radial).
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match &self.grid {
            Grid::Box(g) => {
                s.push_str("x,y,z,value\n");
                for (idx, v) in self.values.iter().enumerate() {
                    let p = g.point(idx);
                    let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{:.17e}", p[0], p[1], p[2], v);
                }
            }
            Grid::Radial(g) => {
                s.push_str("r,value\n");
                for (i, v) in self.values.iter().enumerate() {
                    let _ = writeln!(s, "{:.17e},{:.17e}", g.r(i), v);
                }
            }
        }
        s
    }
}
