//! The linearized operator `L_u = -Δ - Q_Ω (p-1) u^{p-2}` at a ground state
//! and the part of its spectrum nearest zero.

use serde::Serialize;

use crate::discretize::{Discretization, SparseOperator};
use crate::eigensolve::{lanczos, LanczosConfig, Problem, Which};
use crate::error::{Error, Result};
use crate::linalg::{norm2, TridiagLdl};
use crate::semilinear::{jacobian_matrix, jacobian_solve, linearized_potential, GroundState};

/// `L_u` as a matrix together with the mass weights of its pencil.
#[derive(Clone)]
pub struct LinearizedOperator {
    pub matrix: SparseOperator,
    pub mass: Vec<f64>,
    disc: Discretization,
}

impl LinearizedOperator {
    /// `A - diag(potential)` on the given discretization.
    pub fn from_potential(disc: &Discretization, potential: &[f64]) -> Self {
        LinearizedOperator { matrix: jacobian_matrix(disc, potential), mass: disc.mass.clone(), disc: disc.clone() }
    }

    /// `A - Λ D`, which has an exact kernel when `Λ` is an eigenvalue.
    pub fn shifted_pencil(disc: &Discretization, lambda: f64) -> Self {
        let pot: Vec<f64> = disc.d.iter().map(|d| lambda * d).collect();
        Self::from_potential(disc, &pot)
    }
}

/// Builds `L_u` at a ground state; identical to the Newton Jacobian there.
pub fn assemble_linearized(disc: &Discretization, state: &GroundState) -> Result<LinearizedOperator> {
    if state.p <= 2.0 {
        return Err(Error::Unsupported(format!("linearization is implemented for p > 2, got {}", state.p)));
    }
    let pot = linearized_potential(disc, &state.v.values, state.alpha_p, state.p);
    Ok(LinearizedOperator::from_potential(disc, &pot))
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralWindow {
    pub center: f64,
    /// Eigenvalues of `L h = λ M h` sorted by magnitude.
    pub eigenvalues: Vec<f64>,
    pub min_abs: f64,
    pub approx_kernel_dim: usize,
    /// Negative eigenvalues of the whole pencil when the inertia is known,
    /// otherwise those inside the window.
    pub negative_count: usize,
    pub residuals: Vec<f64>,
    /// The factorization hit an exact zero pivot.
    pub singular: bool,
}

/// Default kernel threshold for spacing `h`.
pub fn default_kernel_tol(h: f64) -> f64 {
    1e-3 * h
}

/// The `count` eigenvalues of smallest magnitude by shift-invert Lanczos at 0.
pub fn spectrum_near_zero(op: &LinearizedOperator, count: usize, kernel_tol: f64) -> Result<SpectralWindow> {
    let n = op.matrix.dim;
    let mass = &op.mass;
    let mut inertia = None;
    let ldl = match op.matrix.tridiagonal() {
        Some((d, e)) => match TridiagLdl::new(&d, &e) {
            Ok(f) => {
                inertia = Some(f.negative_count());
                Some(f)
            }
            Err(_) => {
                return Ok(SpectralWindow {
                    center: 0.0,
                    eigenvalues: vec![0.0],
                    min_abs: 0.0,
                    approx_kernel_dim: 1,
                    negative_count: 0,
                    residuals: vec![0.0],
                    singular: true,
                })
            }
        },
        None => None,
    };
    let failure = std::cell::Cell::new(None);
    let inv = |x: &[f64], y: &mut [f64]| {
        let b: Vec<f64> = x.iter().zip(mass).map(|(a, m)| a * m).collect();
        match &ldl {
            Some(f) => {
                y.copy_from_slice(&b);
                f.solve(y);
            }
            None => match jacobian_solve(&op.disc, &op.matrix, &b, 1e-13) {
                Ok(s) => y.copy_from_slice(&s),
                Err(e) => {
                    failure.set(Some(e));
                    y.iter_mut().for_each(|v| *v = 0.0);
                }
            },
        }
    };
    let met = |x: &[f64], y: &mut [f64]| {
        y.iter_mut().zip(x).zip(mass).for_each(|((o, a), m)| *o = a * m);
    };
    let mut cfg = LanczosConfig::new(count, Which::Magnitude);
    cfg.tol = 1e-10;
    cfg.confirm = false;
    let e = lanczos(&Problem { dim: n, op: &inv, metric: Some(&met) }, &cfg);
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let mut pairs: Vec<(f64, Vec<f64>)> =
        e.values.iter().zip(e.vectors).map(|(t, v)| (1.0 / t, v)).collect();
    pairs.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let residuals = pairs
        .iter()
        .map(|(l, h)| {
            let lh = op.matrix.mul(h);
            let r: Vec<f64> = lh.iter().zip(h).zip(mass).map(|((a, x), m)| a - l * m * x).collect();
            let mh: Vec<f64> = h.iter().zip(mass).map(|(x, m)| x * m).collect();
            norm2(&r) / (norm2(&lh) + l.abs() * norm2(&mh)).max(f64::MIN_POSITIVE)
        })
        .collect();
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let min_abs = eigenvalues.first().map(|v| v.abs()).unwrap_or(f64::INFINITY);
    Ok(SpectralWindow {
        center: 0.0,
        approx_kernel_dim: eigenvalues.iter().filter(|v| v.abs() < kernel_tol).count(),
        negative_count: inertia.unwrap_or_else(|| eigenvalues.iter().filter(|v| **v < 0.0).count()),
        min_abs,
        eigenvalues,
        residuals,
        singular: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{BoxGrid, RadialGrid};
    use crate::eigensolve::{solve, SolveOptions};
    use crate::geometry::DomainSpec;
    use crate::semilinear::{ground_state, Init, MinimizeOptions};

    fn radial(r: f64) -> Discretization {
        Discretization::radial(RadialGrid::new(3, 12.0, 600).unwrap(), &DomainSpec::ball3(r).unwrap()).unwrap()
    }

    #[test]
    fn spd_case_matches_smallest_eigenvalue() {
        let disc = radial(1.0);
        let op = LinearizedOperator::from_potential(&disc, &vec![0.0; disc.len()]);
        let w = spectrum_near_zero(&op, 2, 1e-4).unwrap();
        assert!(w.min_abs > 0.0 && w.negative_count == 0);
        // smallest Dirichlet eigenvalue of -Δ on the radial ball of radius 12
        let want = (std::f64::consts::PI / 12.0).powi(2);
        assert!((w.eigenvalues[0] - want).abs() < 1e-3 * want, "{:?}", w.eigenvalues);
    }

    #[test]
    fn known_kernel_is_detected() {
        let disc = radial(1.0);
        let lam = solve(&disc, &SolveOptions::new(1)).unwrap().lambda(1);
        let w = spectrum_near_zero(&LinearizedOperator::shifted_pencil(&disc, lam), 3, default_kernel_tol(disc.spacing())).unwrap();
        assert!(w.approx_kernel_dim >= 1, "{:?}", w.eigenvalues);
    }

    #[test]
    fn ground_state_is_nondegenerate() {
        let disc = radial(1.0);
        let s = ground_state(&disc, 2.2, Init::Eigenfunction, &MinimizeOptions::default()).unwrap();
        let op = assemble_linearized(&disc, &s).unwrap();
        let w = spectrum_near_zero(&op, 3, default_kernel_tol(disc.spacing())).unwrap();
        assert!(w.min_abs > 1e-2 && w.approx_kernel_dim == 0, "{w:?}");
        assert_eq!(w.negative_count, 1);
        assert!(w.residuals.iter().all(|r| *r < 1e-8));
        let mut s1 = s.clone();
        s1.p = 1.5;
        assert!(assemble_linearized(&disc, &s1).is_err());
    }

    #[test]
    fn box_window_matches_newton_jacobian() {
        let dom = DomainSpec::ball3(1.0).unwrap();
        let disc = Discretization::box_grid(BoxGrid::new(3.0, 23).unwrap(), &dom).unwrap();
        let s = ground_state(&disc, 2.5, Init::Eigenfunction, &MinimizeOptions::default()).unwrap();
        let op = assemble_linearized(&disc, &s).unwrap();
        let jm = jacobian_matrix(&disc, &linearized_potential(&disc, &s.v.values, s.alpha_p, 2.5));
        assert_eq!(op.matrix, jm);
        let w = spectrum_near_zero(&op, 2, default_kernel_tol(disc.spacing())).unwrap();
        assert!(w.min_abs > 1e-2 && w.eigenvalues.iter().filter(|v| **v < 0.0).count() == 1, "{w:?}");
    }
}
