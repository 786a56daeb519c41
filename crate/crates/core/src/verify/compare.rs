use serde::Serialize;

use crate::discretize::{BoxGrid, Discretization, Grid, RadialGrid, ScalarField};
use crate::eigensolve::{radial_shoot, solve, SolveOptions};
use crate::error::{invalid, Result};
use crate::geometry::{unit_ball_volume, DomainSpec};

use super::{ComparisonKind, ComparisonReport};

/// Grid choices for comparisons that need a three-dimensional solve.
#[derive(Clone, Debug)]
pub struct ShapeSolver {
    pub h: f64,
    /// Distance from the domain to the truncation boundary.
    pub pad: f64,
    pub radial_m: usize,
}

impl Default for ShapeSolver {
    fn default() -> Self {
        ShapeSolver { h: 0.1, pad: 3.0, radial_m: 4000 }
    }
}

impl ShapeSolver {
    pub fn half_width(&self, domain: &DomainSpec) -> f64 {
        let (lo, hi) = domain.bounding_box();
        lo.iter().chain(&hi).fold(0.0f64, |m, v| m.max(v.abs())) + self.pad
    }

    pub fn box_disc(&self, domain: &DomainSpec, h: f64) -> Result<Discretization> {
        if domain.dim != 3 {
            return invalid("three-dimensional solves need a domain in R^3");
        }
        Discretization::box_grid(BoxGrid::with_spacing(self.half_width(domain), h)?, domain)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lambda1Estimate {
    pub value: f64,
    /// Discretization error estimate.
    pub error: f64,
    pub method: &'static str,
}

/// `Λ_1` by shooting for centered balls and annuli, otherwise by box solves
/// at `h` and `2h` whose difference is the error estimate.
pub fn lambda1_estimate(domain: &DomainSpec, solver: &ShapeSolver) -> Result<Lambda1Estimate> {
    if domain.is_centered_radial() {
        let shot = radial_shoot(domain, domain.dim, 1, None)?.lambda;
        let r_max = domain.char_radius() + 20.0 / shot.sqrt();
        let disc = Discretization::radial(RadialGrid::new(domain.dim, r_max, solver.radial_m)?, domain)?;
        let grid = solve(&disc, &SolveOptions::new(1))?.lambda(1);
        return Ok(Lambda1Estimate { value: shot, error: (shot - grid).abs(), method: "radial" });
    }
    let fine = solve(&solver.box_disc(domain, solver.h)?, &SolveOptions::new(1))?.lambda(1);
    let coarse = solve(&solver.box_disc(domain, 2.0 * solver.h)?, &SolveOptions::new(1))?.lambda(1);
    Ok(Lambda1Estimate { value: fine, error: (fine - coarse).abs(), method: "box" })
}

/// `Λ_1(Ω) >= Λ_1(Ω*)` with `Ω*` the centered ball of equal volume; the
/// tolerance is three times the discretization error estimate.
pub fn faber_krahn(domain: &DomainSpec, solver: &ShapeSolver) -> Result<ComparisonReport> {
    let lhs = lambda1_estimate(domain, solver)?;
    let star = domain.schwarz_ball()?;
    let rhs = radial_shoot(&star, star.dim, 1, None)?.lambda;
    let tolerance = (3.0 * lhs.error).max(1e-8 * rhs);
    let margin = lhs.value - rhs;
    Ok(ComparisonReport {
        kind: ComparisonKind::FaberKrahn,
        lhs: lhs.value,
        rhs,
        margin,
        tolerance,
        verdict: margin >= -tolerance,
        equality: domain.is_ball().then_some(margin.abs() <= tolerance),
    })
}

/// `Λ_2 > max(Λ_1(Ω_+), Λ_1(Ω_-))` where `Ω_±` keep the weight of `disc` on
/// the nodes where `±φ_2 > 0` and are exterior elsewhere. An empty nodal set
/// gives an infinite right-hand side and a failing verdict.
pub fn second_eig_bound(disc: &Discretization, phi2: &ScalarField, lambda2: f64) -> Result<ComparisonReport> {
    if phi2.values.len() != disc.len() {
        return invalid("eigenfunction does not live on the discretization grid");
    }
    let mut best = f64::NEG_INFINITY;
    for s in [1.0, -1.0] {
        let q: Vec<f64> = disc.q.iter().zip(&phi2.values).map(|(q, v)| if s * v > 0.0 { *q } else { -1.0 }).collect();
        if !q.iter().any(|v| *v > 0.0) {
            best = f64::INFINITY;
            break;
        }
        let sub = Discretization::with_fractions(disc.grid.clone(), &disc.domain, q)?;
        best = best.max(solve(&sub, &SolveOptions::new(1))?.lambda(1));
    }
    Ok(ComparisonReport::strict(ComparisonKind::SecondBound, lambda2, best, 1e-9 * lambda2))
}

/// One separation of the two-ball sequence.
#[derive(Clone, Debug, Serialize)]
pub struct HksStep {
    pub separation: f64,
    pub lambda2: f64,
    /// `Λ_1` of one ball at the same grid position.
    pub lambda1_ball: f64,
    /// Closed-form `Λ_1` of one ball.
    pub lambda1_exact: f64,
    /// `Λ_2(Ω_d) - Λ_1(B)` against the matched discrete ball.
    pub gap: f64,
    pub lower_bound: ComparisonReport,
    pub second_bound: ComparisonReport,
}

/// Two balls of total volume `c` with centers `±(d/2) e_1` on one fixed grid
/// of spacing `h` large enough for the widest separation.
pub fn hks_sequence(c: f64, separations: &[f64], h: f64) -> Result<Vec<HksStep>> {
    if !(c > 0.0 && h > 0.0) {
        return invalid("volume and spacing must be positive");
    }
    if separations.is_empty() || separations.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("separations must be nonempty and strictly ascending");
    }
    let r = (c / (2.0 * unit_ball_volume(3))).cbrt();
    if separations[0] <= 2.0 * r {
        return invalid(format!("separation {} does not give disjoint balls of radius {r}", separations[0]));
    }
    let ball = DomainSpec::ball3(r)?;
    let exact = radial_shoot(&ball, 3, 1, None)?.lambda;
    let d_max = separations[separations.len() - 1];
    let grid = Grid::Box(BoxGrid::with_spacing(0.5 * d_max + r + 2.5, h)?);
    let mut out = Vec::new();
    for &d in separations {
        let dom = DomainSpec::two_balls(d, r)?;
        let disc = Discretization::new(grid.clone(), &dom)?;
        let basis = solve(&disc, &SolveOptions::new(2))?;
        let lambda2 = basis.lambda(2);
        let single = DomainSpec::ball(vec![0.5 * d, 0.0, 0.0], r)?;
        let lambda1_ball = solve(&Discretization::new(grid.clone(), &single)?, &SolveOptions::new(1))?.lambda(1);
        out.push(HksStep {
            separation: d,
            lambda2,
            lambda1_ball,
            lambda1_exact: exact,
            gap: lambda2 - lambda1_ball,
            lower_bound: ComparisonReport::strict(ComparisonKind::Hks, lambda2, lambda1_ball, 1e-9 * lambda2),
            second_bound: second_eig_bound(&disc, basis.phi(2), lambda2)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_beats_ball() {
        let a = DomainSpec::annulus(vec![0.0; 3], 1.0, 2.0).unwrap();
        let rep = faber_krahn(&a, &ShapeSolver::default()).unwrap();
        assert!(rep.verdict && rep.margin > 3.0 * rep.tolerance, "{rep:?}");
        assert_eq!(rep.equality, None);
    }

    #[test]
    fn centered_ball_is_equality_case() {
        let b = DomainSpec::ball3(1.5).unwrap();
        let rep = faber_krahn(&b, &ShapeSolver::default()).unwrap();
        assert!(rep.verdict && rep.equality == Some(true), "{rep:?}");
    }

    #[test]
    fn hks_rejects_bad_input() {
        let c = 2.0 * unit_ball_volume(3);
        assert!(hks_sequence(c, &[0.0], 0.3).is_err());
        assert!(hks_sequence(c, &[4.0, 3.0], 0.3).is_err());
        assert!(hks_sequence(c, &[], 0.3).is_err());
    }

    #[test]
    fn second_bound_radial_and_sign_flip() {
        let b = DomainSpec::ball3(1.0).unwrap();
        let disc = Discretization::radial(RadialGrid::new(3, 12.0, 1200).unwrap(), &b).unwrap();
        let basis = solve(&disc, &SolveOptions::new(2)).unwrap();
        let rep = second_eig_bound(&disc, basis.phi(2), basis.lambda(2)).unwrap();
        assert!(rep.verdict, "{rep:?}");
        let mut flipped = basis.phi(2).clone();
        flipped.values.iter_mut().for_each(|v| *v = -*v);
        let rep2 = second_eig_bound(&disc, &flipped, basis.lambda(2)).unwrap();
        assert_eq!(rep.rhs, rep2.rhs);
        let rep3 = second_eig_bound(&disc, basis.phi(1), basis.lambda(2)).unwrap();
        assert!(!rep3.verdict && rep3.rhs.is_infinite());
    }
}
