//! Quadrature over sphere-bounded domain boundaries.

use crate::error::{invalid, Result};
use crate::geometry::DomainSpec;

use super::grid::ScalarField;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `∮_{∂Ω} g(ζ, ζ·ν) dζ` for a domain bounded by spheres in `R^3`, with
/// `n_theta` Gauss nodes in `cos θ` and `2 n_theta` uniform azimuths.
pub fn surface_integral(domain: &DomainSpec, n_theta: usize, g: impl Fn(&[f64; 3], f64) -> f64) -> Result<f64> {
    if domain.dim != 3 {
        return invalid("surface quadrature is implemented in three dimensions");
    }
    let spheres = domain.spheres()?;
    let (t, wt) = gauss_legendre(n_theta);
    let n_phi = 2 * n_theta;
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    let mut total = 0.0;
    for (c, rho, outward) in spheres {
        let sgn = if outward { 1.0 } else { -1.0 };
        let mut acc = 0.0;
        for (ti, wi) in t.iter().zip(&wt) {
            let st = (1.0 - ti * ti).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = (k as f64 + 0.5) * dphi;
                let om = [st * phi.cos(), st * phi.sin(), *ti];
                let x = [c[0] + rho * om[0], c[1] + rho * om[1], c[2] + rho * om[2]];
                let zn = sgn * (rho + c[0] * om[0] + c[1] * om[1] + c[2] * om[2]);
                acc += wi * g(&x, zn);
            }
        }
        total += acc * dphi * rho * rho;
    }
    Ok(total)
}

/// `∮_{∂Ω} f (ζ·ν) dζ` with `f` interpolated from the grid.
pub fn surface_quadrature(domain: &DomainSpec, f: &ScalarField) -> Result<f64> {
    let n_theta = (8.0 * domain.char_radius() / f.grid.spacing()).ceil().clamp(32.0, 256.0) as usize;
    surface_integral(domain, n_theta, |x, zn| f.interpolate(x) * zn)
}
