use serde::Serialize;

use crate::discretize::{surface_integral, Discretization, Grid, ScalarField};
use crate::error::{invalid, Error, Result};
use crate::geometry::unit_ball_volume;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `F(s) = |s|^p / p`.
    Power(f64),
    /// `F(s) = Λ s^2 / 2`.
    Eigen(f64),
}

impl Nonlinearity {
    pub fn primitive(self, s: f64) -> f64 {
        match self {
            Nonlinearity::Power(p) => s.abs().powf(p) / p,
            Nonlinearity::Eigen(l) => 0.5 * l * s * s,
        }
    }
}

/// The three terms of `(1/2*)∫|∇u|^2 - ∫Q F(u) + (2/N)∮ F(u) ζ·ν`.
#[derive(Clone, Debug, Serialize)]
pub struct PohozaevTerms {
    pub gradient_term: f64,
    pub potential_term: f64,
    pub boundary_term: f64,
    pub residual: f64,
    /// Residual over the sum of the term magnitudes.
    pub relative: f64,
}

/// Pohozaev balance of `u` on the discretization's domain, whose boundary
/// must be made of spheres.
pub fn pohozaev_residual(u: &ScalarField, nl: Nonlinearity, disc: &Discretization) -> Result<PohozaevTerms> {
    if u.values.len() != disc.len() {
        return invalid("field does not live on the discretization grid");
    }
    let n = disc.grid.dim() as f64;
    let crit = 2.0 * n / (n - 2.0);
    let gradient_term = disc.energy(&u.values) / crit;
    let potential_term: f64 = u.values.iter().zip(&disc.d).map(|(s, d)| d * nl.primitive(*s)).sum();
    let flux = match &disc.grid {
        Grid::Box(_) => {
            let n_theta = (8.0 * disc.domain.char_radius() / disc.grid.spacing()).ceil().clamp(32.0, 256.0) as usize;
            surface_integral(&disc.domain, n_theta, |x, zn| nl.primitive(u.interpolate(x)) * zn)?
        }
        Grid::Radial(_) => {
            if !disc.domain.is_centered_radial() {
                return Err(Error::Unsupported("radial grids need a centered ball or annulus".into()));
            }
            let area = n * unit_ball_volume(disc.grid.dim());
            disc.domain
                .spheres()?
                .into_iter()
                .map(|(_, rho, outward)| {
                    let zn = if outward { rho } else { -rho };
                    nl.primitive(u.interpolate(&[rho])) * zn * area * rho.powf(n - 1.0)
                })
                .sum()
        }
    };
    let boundary_term = 2.0 / n * flux;
    let residual = gradient_term - potential_term + boundary_term;
    let scale = gradient_term.abs() + potential_term.abs() + boundary_term.abs();
    Ok(PohozaevTerms {
        gradient_term,
        potential_term,
        boundary_term,
        residual,
        relative: if scale > 0.0 { residual.abs() / scale } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{BoxGrid, RadialGrid};
    use crate::eigensolve::{solve, SolveOptions};
    use crate::geometry::DomainSpec;

    #[test]
    fn zero_field() {
        let b = DomainSpec::ball3(1.0).unwrap();
        let disc = Discretization::box_grid(BoxGrid::new(2.0, 19).unwrap(), &b).unwrap();
        let t = pohozaev_residual(&ScalarField::zeros(disc.grid.clone()), Nonlinearity::Eigen(1.0), &disc).unwrap();
        assert_eq!((t.gradient_term, t.potential_term, t.boundary_term, t.residual), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn radial_eigenpair_converges() {
        let b = DomainSpec::ball3(1.0).unwrap();
        let mut prev = f64::INFINITY;
        for m in [500, 1000, 2000] {
            let disc = Discretization::radial(RadialGrid::new(3, 10.0, m).unwrap(), &b).unwrap();
            let e = solve(&disc, &SolveOptions::new(1)).unwrap();
            let t = pohozaev_residual(e.phi(1), Nonlinearity::Eigen(e.lambda(1)), &disc).unwrap();
            assert!(t.boundary_term > 0.0);
            assert!(t.relative < 0.6 * prev, "{t:?}");
            prev = t.relative;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn boxes_are_unsupported() {
        let b = DomainSpec::boxed(vec![0.0; 3], vec![1.0; 3]).unwrap();
        let disc = Discretization::box_grid(BoxGrid::new(2.0, 19).unwrap(), &b).unwrap();
        let f = ScalarField::from_fn(disc.grid.clone(), |_| 1.0);
        assert!(pohozaev_residual(&f, Nonlinearity::Eigen(1.0), &disc).is_err());
    }
}
