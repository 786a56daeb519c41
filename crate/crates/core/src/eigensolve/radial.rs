//! Shooting solver for radial and single-harmonic eigenfunctions.
//!
//! The interior solution is integrated outward from the regular series at the
//! origin; the decaying exterior is represented by its log-derivative, which
//! is integrated inward from far away where it is attracting. Eigenvalues are
//! zeros of the normalized Wronskian at the outer boundary.

use crate::discretize::{RadialGrid, ScalarField};
use crate::error::{invalid, Error, Result};
use crate::geometry::{unit_ball_volume, DomainKind, DomainSpec};

use super::EigenPair;

/// Number of samples in the scan for sign changes.
pub const SCAN_STEPS: usize = 200;
const MAX_DOUBLINGS: usize = 12;

#[derive(Clone, Debug)]
struct Shells {
    /// Breakpoints in increasing order; the weight is `+1` on `[b[2i], b[2i+1]]`.
    inside: Vec<(f64, f64)>,
    outer: f64,
}

impl Shells {
    fn of(domain: &DomainSpec) -> Result<Self> {
        if !domain.is_centered_radial() {
            return invalid(format!("shooting needs a centered ball or annulus, got {}", domain.label()));
        }
        match &domain.kind {
            DomainKind::Ball { radius, .. } => Ok(Shells { inside: vec![(0.0, *radius)], outer: *radius }),
            DomainKind::Annulus { r_in, r_out, .. } => Ok(Shells { inside: vec![(*r_in, *r_out)], outer: *r_out }),
            _ => unreachable!(),
        }
    }

    fn q(&self, r: f64) -> f64 {
        if self.inside.iter().any(|&(a, b)| r >= a && r < b) {
            1.0
        } else {
            -1.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.inside.iter().flat_map(|&(a, b)| [a, b]).filter(|v| *v > 0.0).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

/// Samples of a solution `(r, u, u')` along the integration path.
#[derive(Clone, Debug, Default)]
pub struct RadialProfile {
    pub dim: usize,
    pub ell: usize,
    pub lambda: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl RadialProfile {
    /// Cubic Hermite interpolation; decays with the last log-derivative
    /// beyond the sampled range.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.r.len();
        if r <= self.r[0] {
            // regular behaviour near the origin
            let s = r / self.r[0];
            return self.u[0] * s.powi(self.ell as i32);
        }
        if r >= self.r[n - 1] {
            let y = self.du[n - 1] / self.u[n - 1];
            return self.u[n - 1] * (y * (r - self.r[n - 1])).exp();
        }
        let i = match self.r.binary_search_by(|v| v.total_cmp(&r)) {
            Ok(i) => return self.u[i],
            Err(i) => i - 1,
        };
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t),
            t * (1.0 - t) * (1.0 - t),
            t * t * (3.0 - 2.0 * t),
            t * t * (t - 1.0),
        );
        h00 * self.u[i] + h10 * h * self.du[i] + h01 * self.u[i + 1] + h11 * h * self.du[i + 1]
    }

    fn scale(&mut self, c: f64) {
        self.u.iter_mut().for_each(|v| *v *= c);
        self.du.iter_mut().for_each(|v| *v *= c);
    }

    /// `∫ g(r, u(r)) |S^{N-1}| r^{N-1} dr` over the sampled range by Simpson's
    /// rule with Hermite midpoints.
    pub fn integrate(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        let area = self.dim as f64 * unit_ball_volume(self.dim);
        let p = self.dim as i32 - 1;
        let f = |r: f64, u: f64| g(r, u) * r.powi(p);
        let mut s = 0.0;
        for i in 0..self.r.len() - 1 {
            let (a, b) = (self.r[i], self.r[i + 1]);
            let m = 0.5 * (a + b);
            s += (b - a) / 6.0 * (f(a, self.u[i]) + 4.0 * f(m, self.eval(m)) + f(b, self.u[i + 1]));
        }
        area * s
    }

    /// Samples the profile on a radial grid.
    pub fn to_field(&self, grid: &RadialGrid) -> ScalarField {
        ScalarField { grid: crate::discretize::Grid::Radial(grid.clone()), values: (0..grid.m).map(|i| self.eval(grid.r(i))).collect() }
    }
}

struct Shooter<'a> {
    shells: &'a Shells,
    dim: f64,
    ell: f64,
}

impl Shooter<'_> {
    fn centrifugal(&self) -> f64 {
        self.ell * (self.ell + self.dim - 2.0)
    }

    fn rhs(&self, r: f64, q: f64, lambda: f64, u: f64, du: f64) -> (f64, f64) {
        (du, -(self.dim - 1.0) / r * du + self.centrifugal() / (r * r) * u - lambda * q * u)
    }

    fn step_size(&self, lambda: f64) -> f64 {
        (self.shells.outer / 4000.0).min(0.02 / lambda.abs().sqrt().max(1e-3))
    }

    /// Regular solution from the origin up to the outer boundary.
    fn interior(&self, lambda: f64, record: bool) -> (f64, f64, Vec<(f64, f64, f64)>) {
        let q0 = self.shells.q(0.0);
        let c = lambda * q0;
        let r0 = (0.02 * self.shells.breakpoints()[0]).min(0.05 / c.abs().sqrt().max(1e-6));
        // u = r^ell sum a_j r^{2j}
        let (mut u, mut du) = (0.0, 0.0);
        let mut a = 1.0;
        for j in 0..16 {
            let p = self.ell + 2.0 * j as f64;
            if j > 0 {
                let jj = j as f64;
                a *= -c / (2.0 * jj * (2.0 * self.ell + 2.0 * jj + self.dim - 2.0));
            }
            u += a * r0.powf(p);
            if p > 0.0 {
                du += a * p * r0.powf(p - 1.0);
            }
        }
        let mut out = Vec::new();
        if record {
            out.push((r0, u, du));
        }
        let hmax = self.step_size(lambda);
        let mut r = r0;
        for b in self.shells.breakpoints() {
            let q = self.shells.q(0.5 * (r + b));
            let steps = ((b - r) / hmax).ceil().max(1.0) as usize;
            let h = (b - r) / steps as f64;
            for s in 0..steps {
                let r1 = r + h * s as f64;
                let (k1u, k1v) = self.rhs(r1, q, lambda, u, du);
                let (k2u, k2v) = self.rhs(r1 + 0.5 * h, q, lambda, u + 0.5 * h * k1u, du + 0.5 * h * k1v);
                let (k3u, k3v) = self.rhs(r1 + 0.5 * h, q, lambda, u + 0.5 * h * k2u, du + 0.5 * h * k2v);
                let (k4u, k4v) = self.rhs(r1 + h, q, lambda, u + h * k3u, du + h * k3v);
                u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
                du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
                if record {
                    out.push((r1 + h, u, du));
                }
            }
            r = b;
        }
        (u, du, out)
    }

    /// Log-derivative of the decaying exterior solution at the outer boundary,
    /// with samples `(r, y, ln u - ln u(R))` when recording.
    fn exterior(&self, lambda: f64, record: bool) -> (f64, Vec<(f64, f64, f64)>) {
        let k = lambda.max(0.0).sqrt();
        let rr = self.shells.outer;
        let span = (30.0 / k.max(1e-3)).clamp(2.0, 200.0 * rr.max(1.0));
        let r_far = rr + span;
        let n1 = self.dim - 1.0;
        let f = |r: f64, y: f64| lambda + self.centrifugal() / (r * r) - n1 / r * y - y * y;
        let mut y = -k - n1 / (2.0 * r_far);
        if k < 1e-6 {
            y = -(self.dim - 2.0 + self.ell) / r_far;
        }
        let hmax = (0.01f64).min(0.1 / k.max(1e-3)).min(rr / 200.0);
        let steps = (span / hmax).ceil() as usize;
        let h = -span / steps as f64;
        let mut lnu = 0.0;
        let mut out = Vec::new();
        if record {
            out.push((r_far, y, 0.0));
        }
        for s in 0..steps {
            let r = r_far + h * s as f64;
            let k1 = f(r, y);
            let k2 = f(r + 0.5 * h, y + 0.5 * h * k1);
            let k3 = f(r + 0.5 * h, y + 0.5 * h * k2);
            let k4 = f(r + h, y + h * k3);
            // d(ln u)/dr = y, integrated alongside with the same stages
            let y1 = y + 0.5 * h * k1;
            let y2 = y + 0.5 * h * k2;
            let y3 = y + h * k3;
            lnu += h / 6.0 * (y + 2.0 * y1 + 2.0 * y2 + y3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if record {
                out.push((r + h, y, lnu));
            }
        }
        if record {
            for e in out.iter_mut() {
                e.2 -= lnu;
            }
            out.reverse();
        }
        (y, out)
    }

    fn mismatch(&self, lambda: f64) -> f64 {
        let (u, du, _) = self.interior(lambda, false);
        let (y, _) = self.exterior(lambda, false);
        (du - y * u) / ((u * u + du * du) * (1.0 + y * y)).sqrt()
    }
}

/// Normalized Wronskian of the interior and exterior solutions; its zeros are
/// the eigenvalues of the harmonic `ell`.
pub fn matching_function(domain: &DomainSpec, dim: usize, ell: usize, lambda: f64) -> Result<f64> {
    let shells = Shells::of(domain)?;
    Ok(Shooter { shells: &shells, dim: dim as f64, ell: ell as f64 }.mismatch(lambda))
}

/// The `k`-th eigenvalue of the harmonic `ell` with its profile normalized
/// to `∫ Q φ^2 = 1` (radial measure, angular factor excluded).
pub fn radial_shoot_ell(
    domain: &DomainSpec,
    dim: usize,
    ell: usize,
    k: usize,
    bracket: Option<(f64, f64)>,
) -> Result<(f64, RadialProfile)> {
    if k == 0 {
        return invalid("eigenvalue index starts at 1");
    }
    if dim < 3 || dim != domain.dim {
        return invalid(format!("dimension {dim} does not match the domain"));
    }
    let shells = Shells::of(domain)?;
    let sh = Shooter { shells: &shells, dim: dim as f64, ell: ell as f64 };
    let (mut lo, mut hi) = match bracket {
        Some((a, b)) => {
            if !(a > 0.0 && b > a) {
                return invalid(format!("bracket [{a}, {b}] must be a positive interval"));
            }
            if sh.mismatch(a).signum() == sh.mismatch(b).signum() {
                return Err(Error::Bracket { lo: a, hi: b });
            }
            (a, b)
        }
        None => {
            // scan upward, doubling the range until the k-th sign change appears
            let mut cap = 50.0 / (domain.char_radius() * domain.char_radius());
            let start = cap / SCAN_STEPS as f64;
            let mut prev = (start, sh.mismatch(start));
            let mut found = 0;
            let mut br = None;
            let mut from = start;
            for _ in 0..MAX_DOUBLINGS {
                for j in 1..=SCAN_STEPS {
                    let l = from + (cap - from) * j as f64 / SCAN_STEPS as f64;
                    let m = sh.mismatch(l);
                    if m.signum() != prev.1.signum() {
                        found += 1;
                        if found == k {
                            br = Some((prev.0, l));
                            break;
                        }
                    }
                    prev = (l, m);
                }
                if br.is_some() {
                    break;
                }
                from = cap;
                cap *= 2.0;
            }
            br.ok_or(Error::Bracket { lo: start, hi: cap })?
        }
    };
    let mut flo = sh.mismatch(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = sh.mismatch(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    if sh.mismatch(lambda).abs() > 1e-10 {
        return Err(Error::Convergence(format!("matching residual {} at Λ = {lambda}", sh.mismatch(lambda))));
    }
    let (u_r, _, inner) = sh.interior(lambda, true);
    let (_, outer) = sh.exterior(lambda, true);
    let mut prof = RadialProfile { dim, ell, lambda, ..Default::default() };
    for (r, u, du) in inner {
        prof.r.push(r);
        prof.u.push(u);
        prof.du.push(du);
    }
    for (r, y, lnu) in outer.into_iter().skip(1) {
        let u = u_r * lnu.exp();
        prof.r.push(r);
        prof.u.push(u);
        prof.du.push(y * u);
    }
    let norm = prof.integrate(|r, u| shells.q(r) * u * u);
    if norm <= 0.0 {
        return Err(Error::Convergence("profile has nonpositive weighted norm".into()));
    }
    let mut c = 1.0 / norm.sqrt();
    if prof.u.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m }) < 0.0 {
        c = -c;
    }
    prof.scale(c);
    Ok((lambda, prof))
}

/// Radial shooting for the `k`-th radial eigenpair.
pub fn radial_shoot(domain: &DomainSpec, dim: usize, k: usize, bracket: Option<(f64, f64)>) -> Result<EigenPair> {
    let (lambda, prof) = radial_shoot_ell(domain, dim, 0, k, bracket)?;
    let r_max = domain.char_radius() + 20.0 / lambda.sqrt();
    let grid = RadialGrid::new(dim, r_max, 4000)?;
    Ok(EigenPair { k, lambda, phi: prof.to_field(&grid), sector: "radial".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Independent root of `cos k + sin k = 0` on `[2, 3]`.
    fn cot_root() -> f64 {
        let (mut a, mut b) = (2.0f64, 3.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (a.cos() + a.sin()).signum() == (m.cos() + m.sin()).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn unit_ball_first_eigenvalue() {
        let d = DomainSpec::ball3(1.0).unwrap();
        let p = radial_shoot(&d, 3, 1, None).unwrap();
        let k = cot_root();
        assert!((p.lambda - k * k).abs() < 1e-8, "{} {}", p.lambda, k * k);
        assert!((p.lambda - 9.0 * PI * PI / 16.0).abs() < 1e-8);
    }

    #[test]
    fn calibration_ball_has_unit_eigenvalue() {
        let d = DomainSpec::ball3(0.75 * PI).unwrap();
        let p = radial_shoot(&d, 3, 1, None).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-8);
    }

    #[test]
    fn profile_is_normalized_and_matches_closed_form() {
        let d = DomainSpec::ball3(1.0).unwrap();
        let (l, prof) = radial_shoot_ell(&d, 3, 0, 1, None).unwrap();
        let k = l.sqrt();
        let c = prof.eval(0.5) / ((k * 0.5).sin() / 0.5);
        for r in [0.1, 0.7, 0.99, 1.5, 3.0] {
            let want = if r < 1.0 { (k * r).sin() / r } else { k.sin() * (-k * (r - 1.0)).exp() / r };
            assert!((prof.eval(r) - c * want).abs() < 1e-7 * c.abs(), "r={r}");
        }
        let q = prof.integrate(|r, u| if r < 1.0 { u * u } else { -u * u });
        assert!((q - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bracket_errors() {
        let d = DomainSpec::ball3(1.0).unwrap();
        assert!(matches!(radial_shoot(&d, 3, 1, Some((1.0, 2.0))), Err(Error::Bracket { .. })));
        assert!(radial_shoot(&d, 3, 1, Some((5.0, 6.0))).is_ok());
        let off = DomainSpec::ball(vec![0.5, 0.0, 0.0], 1.0).unwrap();
        assert!(radial_shoot(&off, 3, 1, None).is_err());
    }

    #[test]
    fn annulus_exceeds_equal_volume_ball() {
        let a = DomainSpec::annulus(vec![0.0; 3], 1.0, 2.0).unwrap();
        let b = a.schwarz_ball().unwrap();
        let la = radial_shoot(&a, 3, 1, None).unwrap().lambda;
        let lb = radial_shoot(&b, 3, 1, None).unwrap().lambda;
        assert!(la > lb * 1.01);
    }

    #[test]
    fn dipole_branch_in_three_dimensions() {
        // ell = 1: interior j_1(kr), exterior k_1 ~ e^{-kr}(1/r + 1/(k r^2))
        let d = DomainSpec::ball3(1.0).unwrap();
        let (l, _) = radial_shoot_ell(&d, 3, 1, 1, None).unwrap();
        let k = l.sqrt();
        let j1 = |x: f64| x.sin() / (x * x) - x.cos() / x;
        let h = 1e-6;
        let lin = (j1(k * (1.0 + h)) - j1(k * (1.0 - h))) / (2.0 * h) / j1(k);
        let ext = |r: f64| (-k * r).exp() * (1.0 / r + 1.0 / (k * r * r));
        let lex = (ext(1.0 + h) - ext(1.0 - h)) / (2.0 * h) / ext(1.0);
        assert!((lin - lex).abs() < 1e-6, "{lin} {lex}");
    }

    #[test]
    fn scaling_law() {
        let d1 = DomainSpec::ball3(1.0).unwrap();
        let d2 = DomainSpec::ball3(2.0).unwrap();
        let l1 = radial_shoot(&d1, 3, 1, None).unwrap().lambda;
        let l2 = radial_shoot(&d2, 3, 1, None).unwrap().lambda;
        assert!((4.0 * l2 - l1).abs() < 1e-8);
        let d5 = DomainSpec::ball(vec![0.0; 5], 1.0).unwrap();
        assert!(radial_shoot(&d5, 5, 1, None).unwrap().lambda > l1);
    }
}
