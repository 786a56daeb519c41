//! Meshes, discrete operators and quadrature.

mod assemble;
mod grid;
mod sparse;
mod spectral;
mod surface;

use std::sync::Arc;

pub use assemble::{assemble_stiffness, assemble_weight, mass_weights, radial_stiffness_bands, weight_fractions};
pub use grid::{BoxGrid, Grid, RadialGrid, ScalarField};
pub use sparse::SparseOperator;
pub use spectral::{neg_laplace_7pt, Parity, SectorSpace};
pub use surface::{gauss_legendre, surface_integral, surface_quadrature};

use crate::error::{invalid, Result};
use crate::geometry::DomainSpec;
use crate::linalg::TridiagLdl;

/// Builds a box grid, checking `n >= 8` and `L > 0`.
pub fn build_box_grid(half_width: f64, n: usize) -> Result<BoxGrid> {
    BoxGrid::new(half_width, n)
}

#[derive(Clone)]
enum Solver {
    Box(Arc<SectorSpace>),
    Radial { diag: Vec<f64>, off: Vec<f64>, chol: TridiagLdl },
}

/// A grid, a domain and everything assembled from them: stiffness action
/// and inverse, quadrature weights and the signed weight diagonal.
#[derive(Clone)]
pub struct Discretization {
    pub grid: Grid,
    pub domain: DomainSpec,
    /// Signed cell averages of the weight.
    pub q: Vec<f64>,
    /// Quadrature weights.
    pub mass: Vec<f64>,
    /// `q * mass`.
    pub d: Vec<f64>,
    solver: Solver,
}

impl Discretization {
    pub fn new(grid: Grid, domain: &DomainSpec) -> Result<Self> {
        let q = weight_fractions(&grid, domain)?;
        Self::with_fractions(grid, domain, q)
    }

    /// Uses the given signed cell averages instead of sampling the domain.
    pub fn with_fractions(grid: Grid, domain: &DomainSpec, q: Vec<f64>) -> Result<Self> {
        if q.len() != grid.len() {
            return invalid(format!("weight has {} entries for {} nodes", q.len(), grid.len()));
        }
        let mass = mass_weights(&grid);
        let d = q.iter().zip(&mass).map(|(a, b)| a * b).collect();
        let solver = match &grid {
            Grid::Box(g) => Solver::Box(Arc::new(SectorSpace::full(g))),
            Grid::Radial(g) => {
                let (diag, off) = radial_stiffness_bands(g);
                let chol = TridiagLdl::new(&diag, &off)?;
                Solver::Radial { diag, off, chol }
            }
        };
        Ok(Discretization { grid, domain: domain.clone(), q, mass, d, solver })
    }

    pub fn box_grid(grid: BoxGrid, domain: &DomainSpec) -> Result<Self> {
        Self::new(Grid::Box(grid), domain)
    }

    pub fn radial(grid: RadialGrid, domain: &DomainSpec) -> Result<Self> {
        Self::new(Grid::Radial(grid), domain)
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// `y = A x`.
    pub fn apply_a(&self, x: &[f64], y: &mut [f64]) {
        match (&self.solver, &self.grid) {
            (Solver::Box(_), Grid::Box(g)) => {
                neg_laplace_7pt(g, x, y);
                let h3 = g.cell_volume();
                y.iter_mut().for_each(|v| *v *= h3);
            }
            (Solver::Radial { diag, off, .. }, _) => {
                let m = diag.len();
                for i in 0..m {
                    let mut s = diag[i] * x[i];
                    if i > 0 {
                        s += off[i - 1] * x[i - 1];
                    }
                    if i + 1 < m {
                        s += off[i] * x[i + 1];
                    }
                    y[i] = s;
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn mul_a(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.apply_a(x, &mut y);
        y
    }

    /// `b <- A^{-1} b`.
    pub fn solve_a(&self, b: &mut [f64]) {
        match (&self.solver, &self.grid) {
            (Solver::Box(s), Grid::Box(g)) => {
                s.solve_laplace(b);
                let ih3 = 1.0 / g.cell_volume();
                b.iter_mut().for_each(|v| *v *= ih3);
            }
            (Solver::Radial { chol, .. }, _) => chol.solve(b),
            _ => unreachable!(),
        }
    }

    /// Diagonal of `A`.
    pub fn a_diag(&self) -> Vec<f64> {
        match (&self.solver, &self.grid) {
            (Solver::Box(_), Grid::Box(g)) => vec![6.0 * g.h; g.len()],
            (Solver::Radial { diag, .. }, _) => diag.clone(),
            _ => unreachable!(),
        }
    }

    /// `x^T A x`.
    pub fn energy(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(x, &self.mul_a(x))
    }

    /// `x^T D y`.
    pub fn weight_form(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).zip(&self.d).map(|((a, b), c)| a * b * c).sum()
    }

    /// `x^T M y` with the plain quadrature weights.
    pub fn mass_form(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).zip(&self.mass).map(|((a, b), c)| a * b * c).sum()
    }

    /// Assembled stiffness matrix.
    pub fn stiffness(&self) -> SparseOperator {
        assemble_stiffness(&self.grid)
    }

    /// Assembled weight diagonal.
    pub fn weight(&self) -> SparseOperator {
        SparseOperator::diagonal(&self.d)
    }

    /// Radial stiffness bands and their factorization.
    pub fn radial_bands(&self) -> Option<(&[f64], &[f64], &TridiagLdl)> {
        match &self.solver {
            Solver::Radial { diag, off, chol } => Some((diag, off, chol)),
            _ => None,
        }
    }

    pub fn field(&self, values: Vec<f64>) -> ScalarField {
        ScalarField { grid: self.grid.clone(), values }
    }

    /// Measure of the domain as seen by the sampled weight.
    pub fn sampled_volume(&self) -> f64 {
        self.q.iter().zip(&self.mass).map(|(q, m)| 0.5 * (q + 1.0) * m).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_inverts_apply() {
        let dom = DomainSpec::ball3(1.0).unwrap();
        let d = Discretization::box_grid(BoxGrid::new(2.0, 15).unwrap(), &dom).unwrap();
        let x: Vec<f64> = (0..d.len()).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let mut y = d.mul_a(&x);
        d.solve_a(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
        let a = d.stiffness();
        let y1 = a.mul(&x);
        let y2 = d.mul_a(&x);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() < 1e-12);
        }
        let r = Discretization::radial(RadialGrid::new(3, 4.0, 50).unwrap(), &dom).unwrap();
        let x: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let mut y = r.mul_a(&x);
        r.solve_a(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
