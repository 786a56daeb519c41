//! Dense vector kernels and the small set of solvers the discretizations need.

use crate::error::{Error, Result};

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += a x`.
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
pub fn scale(a: f64, x: &mut [f64]) {
    for v in x.iter_mut() {
        *v *= a;
    }
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Outcome of an iterative solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveInfo {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for SPD `a`.
pub fn cg(
    a: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> SolveInfo {
    let n = b.len();
    let bnorm = norm2(b).max(f64::MIN_POSITIVE);
    let mut r = vec![0.0; n];
    a(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm2(&r) / bnorm;
    let mut it = 0;
    while it < max_iter && res > rtol {
        a(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        res = norm2(&r) / bnorm;
        it += 1;
        if res <= rtol {
            break;
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    SolveInfo { iterations: it, rel_residual: res, converged: res <= rtol }
}

/// Preconditioned MINRES for symmetric (possibly indefinite) `a` with an SPD
/// preconditioner. Starts from `x = 0`.
pub fn minres(
    a: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> SolveInfo {
    let n = b.len();
    x.iter_mut().for_each(|v| *v = 0.0);
    let mut r1 = b.to_vec();
    let mut y = vec![0.0; n];
    precond(&r1, &mut y);
    let beta1 = dot(&r1, &y);
    if beta1 <= 0.0 {
        return SolveInfo { iterations: 0, rel_residual: 0.0, converged: beta1 == 0.0 };
    }
    let beta1 = beta1.sqrt();
    let (mut oldb, mut beta, mut dbar, mut epsln) = (0.0, beta1, 0.0, 0.0);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut r2 = r1.clone();
    let mut v = vec![0.0; n];
    let mut it = 0;
    let mut rel = 1.0;
    while it < max_iter {
        it += 1;
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        a(&v, &mut y);
        if it >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precond(&r2, &mut y);
        oldb = beta;
        let bb = dot(&r2, &y);
        if bb < 0.0 {
            break;
        }
        beta = bb.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let denom = 1.0 / gamma;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
        }
        axpy(phi, &w, x);
        rel = phibar / beta1;
        if rel < rtol || beta == 0.0 {
            break;
        }
    }
    SolveInfo { iterations: it, rel_residual: rel, converged: rel < rtol }
}

/// Symmetric tridiagonal `L D L^T` factorization without pivoting.
#[derive(Clone, Debug)]
pub struct TridiagLdl {
    pub d: Vec<f64>,
    pub l: Vec<f64>,
}

impl TridiagLdl {
    /// Factors the matrix with diagonal `diag` and off-diagonal `off`.
    pub fn new(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let scale = diag.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        d[0] = diag[0];
        for i in 0..n - 1 {
            if d[i].abs() <= 1e-300 * scale || !d[i].is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {i}")));
            }
            l[i] = off[i] / d[i];
            d[i + 1] = diag[i + 1] - l[i] * off[i];
        }
        if d[n - 1].abs() <= 1e-300 * scale || !d[n - 1].is_finite() {
            return Err(Error::Singular(format!("zero pivot at row {}", n - 1)));
        }
        Ok(TridiagLdl { d, l })
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 1..n {
            b[i] -= self.l[i - 1] * b[i - 1];
        }
        for i in 0..n {
            b[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.l[i] * b[i + 1];
        }
    }

    /// Number of negative pivots, equal to the number of negative eigenvalues.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|v| **v < 0.0).count()
    }

    /// Smallest pivot magnitude relative to the largest one.
    pub fn pivot_ratio(&self) -> f64 {
        let mx = self.d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mn = self.d.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        mn / mx
    }

    pub fn is_positive(&self) -> bool {
        self.d.iter().all(|v| *v > 0.0)
    }

    /// `x <- L^{-1} x` for the Cholesky factor `L = L_unit D^{1/2}`.
    pub fn chol_lower_solve(&self, x: &mut [f64]) {
        let n = self.d.len();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i].sqrt();
        }
    }

    /// `x <- L^{-T} x` for the Cholesky factor.
    pub fn chol_upper_solve(&self, x: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n {
            x[i] /= self.d[i].sqrt();
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
    }
}

/// Dense-band Cholesky `A = L L^T` for SPD matrices of small bandwidth.
#[derive(Clone, Debug)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    /// `band[i * (bw + 1) + (i - j)] = L[i][j]` for `i - bw <= j <= i`.
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn new(a: &crate::discretize::SparseOperator) -> Result<Self> {
        let n = a.dim;
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    band[i * w + (i - j)] = v;
                }
            }
        }
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut s = band[i * w + (i - j)];
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    s -= band[i * w + (i - k)] * band[j * w + (j - k)];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Assembly(format!("matrix is not positive definite at row {i}")));
                    }
                    band[i * w] = s.sqrt();
                } else {
                    band[i * w + (i - j)] = s / band[j * w];
                }
            }
        }
        Ok(BandCholesky { n, bw, band })
    }

    /// `x <- L^{-1} x`.
    pub fn lower_solve(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let mut s = x[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.band[i * w + (i - k)] * x[k];
            }
            x[i] = s / self.band[i * w];
        }
    }

    /// `x <- L^{-T} x`.
    pub fn upper_solve(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        for i in (0..self.n).rev() {
            x[i] /= self.band[i * w];
            let xi = x[i];
            for k in i.saturating_sub(self.bw)..i {
                x[k] -= self.band[i * w + (i - k)] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::SparseOperator;

    fn lap1d(n: usize, shift: f64) -> SparseOperator {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0 + shift)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        SparseOperator::from_rows(rows)
    }

    #[test]
    fn cg_and_minres_solve_spd_system() {
        let a = lap1d(50, 0.1);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut x = vec![0.0; 50];
        let info = cg(|u, v| a.apply(u, v), |u, v| v.copy_from_slice(u), &b, &mut x, 1e-12, 500);
        assert!(info.converged);
        let r: Vec<f64> = a.mul(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-10);
        let mut y = vec![0.0; 50];
        let info = minres(|u, v| a.apply(u, v), |u, v| v.copy_from_slice(u), &b, &mut y, 1e-12, 500);
        assert!(info.converged);
        let r: Vec<f64> = a.mul(&y).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-9);
    }

    #[test]
    fn minres_handles_indefinite_with_preconditioner() {
        let a = lap1d(60, -0.5);
        let p = lap1d(60, 0.0);
        let pc = BandCholesky::new(&p).unwrap();
        let b: Vec<f64> = (0..60).map(|i| 1.0 + (i as f64).cos()).collect();
        let mut x = vec![0.0; 60];
        let info = minres(
            |u, v| a.apply(u, v),
            |u, v| {
                v.copy_from_slice(u);
                pc.lower_solve(v);
                pc.upper_solve(v);
            },
            &b,
            &mut x,
            1e-12,
            500,
        );
        assert!(info.converged);
        let r: Vec<f64> = a.mul(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-8 * norm2(&b));
    }

    #[test]
    fn tridiagonal_ldl_inertia_and_solve() {
        let a = lap1d(30, -0.3);
        let (d, e) = a.tridiagonal().unwrap();
        let f = TridiagLdl::new(&d, &e).unwrap();
        let neg = (1..=30)
            .filter(|k| 2.0 - 0.3 - 2.0 * (std::f64::consts::PI * *k as f64 / 31.0).cos() < 0.0)
            .count();
        assert_eq!(f.negative_count(), neg);
        let b: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let mut x = b.clone();
        f.solve(&mut x);
        let r: Vec<f64> = a.mul(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-9 * norm2(&b));
    }

    #[test]
    fn band_and_tridiagonal_cholesky_agree() {
        let a = lap1d(20, 0.2);
        let bc = BandCholesky::new(&a).unwrap();
        let (d, e) = a.tridiagonal().unwrap();
        let tc = TridiagLdl::new(&d, &e).unwrap();
        let x0: Vec<f64> = (0..20).map(|i| (i as f64 + 0.5).ln()).collect();
        let mut x1 = x0.clone();
        let mut x2 = x0.clone();
        bc.lower_solve(&mut x1);
        tc.chol_lower_solve(&mut x2);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-12);
        }
        bc.upper_solve(&mut x1);
        tc.chol_upper_solve(&mut x2);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
