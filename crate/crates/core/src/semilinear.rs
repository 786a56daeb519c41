//! Least energy solutions of `-Δu = Q_Ω |u|^{p-2} u`.
//!
//! The minimizer `v_p` of `R_p(v) = v^T A v / (Σ d_i |v_i|^p)^{2/p}` is found
//! by Sobolev-preconditioned descent restricted to `v >= 0`, then refined by
//! damped Newton on the Euler-Lagrange system. The solution is stored as
//! `u_p = exp(log_amp) v_p` and never exponentiated unless that is safe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::discretize::{Discretization, Grid, RadialGrid, ScalarField, SparseOperator};
use crate::eigensolve::{solve, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::geometry::DomainSpec;
use crate::linalg::{dot, minres, norm2, TridiagLdl};

/// `|log_amp|` above which `u_p` is only reported through its logarithm.
pub const LOG_AMP_LIMIT: f64 = 500.0;

/// Sharp Sobolev constant `S_N` in `S_N |u|_{2^*}^2 <= |∇u|_2^2`.
pub fn sobolev_constant(dim: usize) -> f64 {
    let n = dim as f64;
    let gamma = |x: f64| ln_gamma(x).exp();
    std::f64::consts::PI * n * (n - 2.0) * (gamma(n / 2.0) / gamma(n)).powf(2.0 / n)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Critical exponent `2N/(N-2)`.
pub fn critical_exponent(dim: usize) -> f64 {
    2.0 * dim as f64 / (dim as f64 - 2.0)
}

/// Serrin exponent `(2N-2)/(N-2)`.
pub fn serrin_exponent(dim: usize) -> f64 {
    (2.0 * dim as f64 - 2.0) / (dim as f64 - 2.0)
}

fn check_exponent(p: f64, dim: usize) -> Result<()> {
    if !(p > 1.0 && p < critical_exponent(dim)) || (p - 2.0).abs() < 1e-12 {
        return invalid(format!("exponent p = {p} must lie in (1, {}) and differ from 2", critical_exponent(dim)));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub p: f64,
    pub alpha_p: f64,
    /// Minimizer with `Σ d_i v_i^p = 1`, nonnegative.
    pub v: ScalarField,
    /// `ln(α_p)/(p-2)`, so that `u_p = exp(log_amp) v_p`.
    pub log_amp: f64,
    /// `|A v - α_p D v^{p-1}| / |A v|`.
    pub residual: f64,
    pub descent_iterations: usize,
    pub newton_iterations: usize,
    pub restarts: usize,
}

/// `|u_p|_∞` in overflow-safe form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SupNorm {
    pub ln_m: f64,
    /// `None` when `|ln M|` is too large to exponentiate.
    pub m: Option<f64>,
    /// `M^{p-2}`.
    pub m_pow: f64,
}

impl GroundState {
    pub fn sup_norm_scaling(&self) -> SupNorm {
        let vmax = self.v.values.iter().fold(0.0f64, |m, x| m.max(*x));
        let ln_m = self.log_amp + vmax.ln();
        SupNorm { ln_m, m: (ln_m.abs() < LOG_AMP_LIMIT).then(|| ln_m.exp()), m_pow: ((self.p - 2.0) * ln_m).exp() }
    }

    /// Nodal values of `u_p`, if representable.
    pub fn u(&self) -> Option<Vec<f64>> {
        if self.log_amp.abs() >= LOG_AMP_LIMIT {
            return None;
        }
        let c = self.log_amp.exp();
        Some(self.v.values.iter().map(|x| c * x).collect())
    }

    /// `u_p^{p-2} = α_p v_p^{p-2}`, finite for any amplitude.
    pub fn u_pow(&self) -> Vec<f64> {
        self.v.values.iter().map(|x| pos_pow(*x, self.p - 2.0) * self.alpha_p).collect()
    }
}

/// Report row for the `semilinear` command.
#[derive(Clone, Debug, Serialize)]
pub struct GroundStateSummary {
    pub p: f64,
    pub alpha_p: f64,
    pub log_amp: f64,
    pub residual: f64,
    pub sup_norm_pow: f64,
}

impl From<&GroundState> for GroundStateSummary {
    fn from(s: &GroundState) -> Self {
        GroundStateSummary {
            p: s.p,
            alpha_p: s.alpha_p,
            log_amp: s.log_amp,
            residual: s.residual,
            sup_norm_pow: s.sup_norm_scaling().m_pow,
        }
    }
}

#[inline]
fn pos_pow(x: f64, e: f64) -> f64 {
    if x > 0.0 {
        x.powf(e)
    } else {
        0.0
    }
}

/// `Σ d_i |v_i|^p`.
pub fn constraint_integral(disc: &Discretization, v: &[f64], p: f64) -> f64 {
    v.iter().zip(&disc.d).map(|(x, d)| d * x.abs().powf(p)).sum()
}

/// `R_p(v)`; infinite when the constraint integral is not positive.
pub fn quotient(disc: &Discretization, v: &[f64], p: f64) -> f64 {
    let g = constraint_integral(disc, v, p);
    if g <= 0.0 {
        return f64::INFINITY;
    }
    disc.energy(v) / g.powf(2.0 / p)
}

/// Euclidean gradient of `R_p` at `v`.
pub fn quotient_gradient(disc: &Discretization, v: &[f64], p: f64) -> Vec<f64> {
    let g = constraint_integral(disc, v, p);
    let av = disc.mul_a(v);
    let num = dot(v, &av);
    let s = 2.0 * g.powf(-2.0 / p);
    av.iter()
        .zip(v)
        .zip(&disc.d)
        .map(|((a, x), d)| s * (a - num / g * d * x.abs().powf(p - 2.0) * x))
        .collect()
}

/// Largest relative mismatch between `∇R_p(v)·e` and the centered
/// difference quotient with step `eps`, over `n_dirs` random directions
/// `e = ξ ⊙ v`, `ξ_i` uniform in `[-1, 1]`.
pub fn gradient_check(disc: &Discretization, v: &[f64], p: f64, n_dirs: usize, eps: f64, seed: u64) -> f64 {
    let g = quotient_gradient(disc, v, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_dirs {
        let e: Vec<f64> = v.iter().map(|x| rng.random_range(-1.0..1.0) * x).collect();
        let plus: Vec<f64> = v.iter().zip(&e).map(|(a, b)| a + eps * b).collect();
        let minus: Vec<f64> = v.iter().zip(&e).map(|(a, b)| a - eps * b).collect();
        let fd = (quotient(disc, &plus, p) - quotient(disc, &minus, p)) / (2.0 * eps);
        let an = dot(&g, &e);
        worst = worst.max((fd - an).abs() / an.abs().max(f64::MIN_POSITIVE));
    }
    worst
}

/// Lower and upper bounds `a_0 <= α_p <= a_1` for every `p` in `[1, 2^*]`:
/// Hölder-Sobolev from below, a fixed interior bump from above.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlphaBounds {
    pub a0: f64,
    pub a1: f64,
}

pub fn alpha_bounds(disc: &Discretization) -> Result<AlphaBounds> {
    let dim = disc.grid.dim();
    let vol = disc.domain.volume()?;
    let crit = critical_exponent(dim);
    let s = sobolev_constant(dim);
    let ps: Vec<f64> = (0..=200).map(|i| 1.0 + (crit - 1.0) * i as f64 / 200.0).collect();
    let a0 = ps
        .iter()
        .map(|p| s * vol.powf(2.0 * (p - crit) / (crit * p)))
        .fold(f64::INFINITY, f64::min);
    let rho = bump(disc, None)?;
    let a1 = ps.iter().map(|p| quotient(disc, &rho, *p)).fold(0.0, f64::max);
    Ok(AlphaBounds { a0, a1 })
}

/// Deepest node of the domain on the grid and its depth.
fn deepest(disc: &Discretization) -> (Vec<f64>, f64) {
    match &disc.grid {
        Grid::Box(g) => {
            let mut best = (vec![0.0; 3], f64::NEG_INFINITY);
            for i in 0..g.len() {
                let x = g.point(i);
                let depth = -disc.domain.signed_distance(&x);
                if depth > best.1 {
                    best = (x.to_vec(), depth);
                }
            }
            best
        }
        Grid::Radial(g) => {
            let mut best = (vec![0.0], f64::NEG_INFINITY);
            for i in 0..g.m {
                let x = [g.r(i), 0.0, 0.0];
                let depth = -disc.domain.signed_distance(&x[..disc.domain.dim.min(3)]);
                if depth > best.1 {
                    best = (vec![g.r(i)], depth);
                }
            }
            best
        }
    }
}

/// Compactly supported bump `(1 - |x-c|^2/ρ^2)_+^2` inside the domain; a
/// random location when `rng` is given, the deepest point otherwise.
pub fn bump(disc: &Discretization, rng: Option<&mut ChaCha8Rng>) -> Result<Vec<f64>> {
    let h = disc.spacing();
    let (mut c, depth) = deepest(disc);
    if depth < 1.5 * h {
        return invalid(format!("domain {} is not resolved by spacing {h}", disc.domain.label()));
    }
    let mut rho = 0.9 * depth;
    if let Some(rng) = rng {
        let (lo, hi) = disc.domain.bounding_box();
        let radial = matches!(disc.grid, Grid::Radial(_));
        for _ in 0..10_000 {
            let x: Vec<f64> = if radial {
                vec![rng.random_range(0.0..hi[0].max(1e-12) + disc.domain.centroid()[0].abs()), 0.0, 0.0]
            } else {
                (0..3).map(|a| rng.random_range(lo[a]..hi[a])).collect()
            };
            let dd = -disc.domain.signed_distance(&x[..disc.domain.dim.min(3)]);
            if dd >= 1.5 * h {
                let frac = rng.random_range(0.5..0.95);
                rho = (frac * dd).max(1.5 * h);
                c = if radial { vec![x[0]] } else { x };
                break;
            }
        }
    }
    let vals = match &disc.grid {
        Grid::Box(g) => (0..g.len())
            .map(|i| {
                let x = g.point(i);
                let r2: f64 = (0..3).map(|a| (x[a] - c[a]).powi(2)).sum();
                (1.0 - r2 / (rho * rho)).max(0.0).powi(2)
            })
            .collect(),
        Grid::Radial(g) => (0..g.m).map(|i| (1.0 - ((g.r(i) - c[0]) / rho).powi(2)).max(0.0).powi(2)).collect(),
    };
    Ok(vals)
}

/// Starting point of the descent.
#[derive(Clone, Debug)]
pub enum Init {
    /// First eigenfunction of the pencil on the same discretization.
    Eigenfunction,
    /// Random interior bump from the given seed.
    Bump(u64),
    Field(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Relative quotient decrease that ends the descent.
    pub rtol: f64,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { max_iter: 20_000, rtol: 1e-12, max_restarts: 3, seed: 0x5eed }
    }
}

/// Normalizes `v >= 0` onto `Σ d v^p = 1`; `None` if the integral is not positive.
fn normalize(disc: &Discretization, v: &mut [f64], p: f64) -> Option<()> {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let g = constraint_integral(disc, v, p);
    if !(g > 0.0 && g.is_finite()) {
        return None;
    }
    let s = g.powf(-1.0 / p);
    v.iter_mut().for_each(|x| *x *= s);
    Some(())
}

/// Outcome of one descent run.
struct Descent {
    v: Vec<f64>,
    r: f64,
    iterations: usize,
}

fn descend(disc: &Discretization, p: f64, mut v: Vec<f64>, opts: &MinimizeOptions) -> Result<Descent> {
    normalize(disc, &mut v, p).ok_or_else(|| Error::Convergence("initial constraint integral is not positive".into()))?;
    let n = v.len();
    let mut av = disc.mul_a(&v);
    let mut r = dot(&v, &av);
    // g = v - R A^{-1}(d v^{p-1}) is the A-preconditioned gradient on the constraint set
    let precond_grad = |v: &[f64], av: &[f64], r: f64| {
        let b: Vec<f64> = v.iter().zip(&disc.d).map(|(x, d)| d * pos_pow(*x, p - 1.0)).collect();
        let mut z = b.clone();
        disc.solve_a(&mut z);
        let g: Vec<f64> = v.iter().zip(&z).map(|(x, z)| x - r * z).collect();
        let ag: Vec<f64> = av.iter().zip(&b).map(|(a, b)| a - r * b).collect();
        (g, ag)
    };
    let (mut g, mut ag) = precond_grad(&v, &av, r);
    let mut tau = 1.0;
    let mut small = 0;
    let mut it = 0;
    while it < opts.max_iter {
        it += 1;
        let mut accepted = None;
        let mut t = tau;
        for _ in 0..60 {
            let mut trial: Vec<f64> = v.iter().zip(&g).map(|(x, gi)| x - t * gi).collect();
            if normalize(disc, &mut trial, p).is_some() {
                let at = disc.mul_a(&trial);
                let rt = dot(&trial, &at);
                if rt <= r {
                    accepted = Some((trial, at, rt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((vn, avn, rn)) = accepted else {
            break;
        };
        let (gn, agn) = precond_grad(&vn, &avn, rn);
        let s: Vec<f64> = vn.iter().zip(&v).map(|(a, b)| a - b).collect();
        let sas: f64 = (0..n).map(|i| s[i] * (avn[i] - av[i])).sum();
        let say: f64 = (0..n).map(|i| s[i] * (agn[i] - ag[i])).sum();
        tau = if say > 0.0 && sas > 0.0 { (sas / say).clamp(1e-6, 1e3) } else { (2.0 * t).min(1.0) };
        let dec = (r - rn) / r;
        v = vn;
        av = avn;
        g = gn;
        ag = agn;
        r = rn;
        if dec < opts.rtol {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    Ok(Descent { v, r, iterations: it })
}

/// Minimizes `R_p` over nonnegative grid functions.
pub fn minimize_alpha(disc: &Discretization, p: f64, init: Init, opts: &MinimizeOptions) -> Result<GroundState> {
    check_exponent(p, disc.grid.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start = match init {
        Init::Eigenfunction => solve(disc, &SolveOptions::new(1))?.pairs.remove(0).phi.values,
        Init::Bump(seed) => bump(disc, Some(&mut ChaCha8Rng::seed_from_u64(seed)))?,
        Init::Field(v) => {
            if v.len() != disc.len() {
                return invalid("initial field does not match the grid");
            }
            v
        }
    };
    let mut restarts = 0;
    loop {
        let ok = constraint_integral(disc, &start.iter().map(|x| x.max(0.0)).collect::<Vec<_>>(), p) > 0.0;
        if ok {
            let d = descend(disc, p, start, opts)?;
            let vf = disc.field(d.v);
            let mut st = GroundState {
                p,
                alpha_p: d.r,
                v: vf,
                log_amp: d.r.ln() / (p - 2.0),
                residual: 0.0,
                descent_iterations: d.iterations,
                newton_iterations: 0,
                restarts,
            };
            st.residual = el_residual(disc, &st.v.values, st.alpha_p, p);
            return Ok(st);
        }
        restarts += 1;
        if restarts > opts.max_restarts {
            return Err(Error::Convergence(format!("constraint integral stayed nonpositive after {} restarts", opts.max_restarts)));
        }
        start = bump(disc, Some(&mut rng))?;
    }
}

/// `|A v - α D v_+^{p-1}| / |A v|`.
pub fn el_residual(disc: &Discretization, v: &[f64], alpha: f64, p: f64) -> f64 {
    let av = disc.mul_a(v);
    let f: Vec<f64> = av.iter().zip(v).zip(&disc.d).map(|((a, x), d)| a - alpha * d * pos_pow(*x, p - 1.0)).collect();
    norm2(&f) / norm2(&av)
}

/// Diagonal `(p-1) d_i u_i^{p-2}` with `u^{p-2} = α v^{p-2}`; the Newton
/// Jacobian and the linearized operator are `A - diag(potential)`.
pub fn linearized_potential(disc: &Discretization, v: &[f64], alpha: f64, p: f64) -> Vec<f64> {
    v.iter().zip(&disc.d).map(|(x, d)| (p - 1.0) * d * alpha * pos_pow(*x, p - 2.0)).collect()
}

/// Assembled Jacobian `A - diag(pot)`.
pub fn jacobian_matrix(disc: &Discretization, pot: &[f64]) -> SparseOperator {
    disc.stiffness().minus_diagonal(pot)
}

/// Solves `J x = b` for the symmetric, possibly indefinite Jacobian
/// `J = A - diag(pot)`: tridiagonal `L D L^T` on radial grids, MINRES
/// preconditioned by `A^{-1}` on box grids.
pub fn jacobian_solve(disc: &Discretization, j: &SparseOperator, b: &[f64], rtol: f64) -> Result<Vec<f64>> {
    if let Some((diag, off)) = j.tridiagonal() {
        let f = TridiagLdl::new(&diag, &off)?;
        let mut x = b.to_vec();
        f.solve(&mut x);
        return Ok(x);
    }
    let mut x = vec![0.0; b.len()];
    let info = minres(
        |u, y| j.apply(u, y),
        |u, y| {
            y.copy_from_slice(u);
            disc.solve_a(y);
        },
        b,
        &mut x,
        rtol,
        4000,
    );
    if !info.rel_residual.is_finite() {
        return Err(Error::Singular("MINRES breakdown".into()));
    }
    Ok(x)
}

#[derive(Clone, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-11, max_iter: 60, max_halvings: 5 }
    }
}

/// Damped Newton on `A w = α_0 D w_+^{p-1}` with `α_0` frozen, so that
/// `u_p = α_0^{1/(p-2)} w`.
pub fn newton_refine(disc: &Discretization, state: &GroundState, opts: &NewtonOptions) -> Result<GroundState> {
    let p = state.p;
    if state.v.values.iter().all(|x| *x == 0.0) {
        return invalid("cannot refine the zero state");
    }
    if !(state.residual < 1.0) {
        return invalid(format!("state residual {} is outside the Newton basin", state.residual));
    }
    let a0 = state.alpha_p;
    let mut w = state.v.values.clone();
    let adiag = disc.a_diag();
    // rounding floor of the residual: |A||w| with the M-matrix identity |A| = 2 diag(A) - A
    let floor = |w: &[f64], aw: &[f64]| {
        let mut t = disc.mul_a(&w.iter().map(|x| x.abs()).collect::<Vec<_>>());
        t.iter_mut().zip(w).zip(&adiag).for_each(|((o, x), a)| *o = 2.0 * a * x.abs() - *o);
        64.0 * f64::EPSILON * norm2(&t) / norm2(aw)
    };
    let resid = |w: &[f64]| {
        let aw = disc.mul_a(w);
        let f: Vec<f64> = aw.iter().zip(w).zip(&disc.d).map(|((a, x), d)| a - a0 * d * pos_pow(*x, p - 1.0)).collect();
        let rel = norm2(&f) / norm2(&aw);
        (f, rel)
    };
    let (mut f, mut rel) = resid(&w);
    let tol = opts.tol.max(floor(&w, &disc.mul_a(&w)));
    let mut it = 0;
    while rel >= tol {
        if it >= opts.max_iter {
            return Err(Error::Convergence(format!("Newton stalled at residual {rel:e}")));
        }
        it += 1;
        let jm = jacobian_matrix(disc, &linearized_potential(disc, &w, a0, p));
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let dx = jacobian_solve(disc, &jm, &rhs, (0.1 * rel * tol.sqrt()).clamp(1e-14, 1e-6))?;
        let mut t = 1.0;
        let mut halvings = 0;
        loop {
            let trial: Vec<f64> = w.iter().zip(&dx).map(|(a, b)| a + t * b).collect();
            let (ft, rt) = resid(&trial);
            if rt < rel {
                w = trial;
                f = ft;
                rel = rt;
                break;
            }
            if halvings == opts.max_halvings {
                return Err(Error::LineSearch { halvings });
            }
            halvings += 1;
            t *= 0.5;
        }
    }
    normalize(disc, &mut w, p).ok_or_else(|| Error::Convergence("refined state left the constraint set".into()))?;
    let alpha = disc.energy(&w);
    let residual = el_residual(disc, &w, alpha, p);
    Ok(GroundState {
        p,
        alpha_p: alpha,
        v: disc.field(w),
        log_amp: alpha.ln() / (p - 2.0),
        residual,
        descent_iterations: state.descent_iterations,
        newton_iterations: it,
        restarts: state.restarts,
    })
}

/// Descent followed by Newton refinement. Below `p = 2` the nonlinearity is
/// not differentiable at zero and the descent result is returned as is.
pub fn ground_state(disc: &Discretization, p: f64, init: Init, opts: &MinimizeOptions) -> Result<GroundState> {
    let s = minimize_alpha(disc, p, init, opts)?;
    if p < 2.0 {
        return Ok(s);
    }
    newton_refine(disc, &s, &NewtonOptions::default())
}

/// Ground state on a radial grid of `m` nodes up to `r_max`.
pub fn radial_ground_state(domain: &DomainSpec, dim: usize, p: f64, m: usize, r_max: f64) -> Result<(Discretization, GroundState)> {
    if !domain.is_centered_radial() {
        return invalid(format!("radial ground states need a centered ball or annulus, got {}", domain.label()));
    }
    let disc = Discretization::radial(RadialGrid::new(dim, r_max, m)?, domain)?;
    let s = ground_state(&disc, p, Init::Eigenfunction, &MinimizeOptions::default())?;
    Ok((disc, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::BoxGrid;
    use std::f64::consts::PI;

    fn radial_disc(r: f64, rmax: f64, m: usize) -> Discretization {
        Discretization::radial(RadialGrid::new(3, rmax, m).unwrap(), &DomainSpec::ball3(r).unwrap()).unwrap()
    }

    #[test]
    fn talenti_constant() {
        assert!((sobolev_constant(3) - 3.0 * (PI / 2.0).powf(4.0 / 3.0)).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn quotient_is_scale_invariant() {
        let disc = radial_disc(1.0, 8.0, 200);
        let v = bump(&disc, None).unwrap();
        let v2: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        let (a, b) = (quotient(&disc, &v, 2.5), quotient(&disc, &v2, 2.5));
        assert!((a - b).abs() < 1e-13 * a);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let disc = radial_disc(1.0, 8.0, 200);
        let v = bump(&disc, None).unwrap();
        for p in [2.01, 2.5, 1.5] {
            let err = gradient_check(&disc, &v, p, 20, 1e-5, 3);
            assert!(err < 1e-5, "p={p} {err}");
        }
    }

    #[test]
    fn newton_reaches_tolerance_and_agrees_with_descent() {
        let disc = radial_disc(1.0, 10.0, 400);
        let s = minimize_alpha(&disc, 2.5, Init::Eigenfunction, &MinimizeOptions::default()).unwrap();
        let r = newton_refine(&disc, &s, &NewtonOptions::default()).unwrap();
        assert!(r.residual < 1e-9, "{}", r.residual);
        assert!((r.alpha_p - s.alpha_p).abs() < 1e-6 * s.alpha_p, "{} {}", r.alpha_p, s.alpha_p);
        assert!((constraint_integral(&disc, &r.v.values, 2.5) - 1.0).abs() < 1e-10);
        assert!(r.v.values.iter().all(|x| *x >= 0.0));
        let b = alpha_bounds(&disc).unwrap();
        assert!(b.a0 <= r.alpha_p && r.alpha_p <= b.a1, "{b:?} {}", r.alpha_p);
    }

    #[test]
    fn seeds_agree() {
        let disc = radial_disc(1.0, 10.0, 300);
        let a = ground_state(&disc, 2.5, Init::Bump(1), &MinimizeOptions::default()).unwrap();
        let b = ground_state(&disc, 2.5, Init::Bump(9), &MinimizeOptions::default()).unwrap();
        assert!((a.alpha_p - b.alpha_p).abs() < 1e-8 * a.alpha_p);
    }

    #[test]
    fn alpha_tends_to_lambda_one() {
        let disc = radial_disc(0.75 * PI, 20.0, 800);
        let lam = solve(&disc, &SolveOptions::new(1)).unwrap().lambda(1);
        let mut prev = f64::INFINITY;
        for p in [2.4, 2.2, 2.1] {
            let s = ground_state(&disc, p, Init::Eigenfunction, &MinimizeOptions::default()).unwrap();
            let gap = (s.alpha_p - lam).abs();
            assert!(gap < prev);
            prev = gap;
            assert!(s.sup_norm_scaling().m_pow.is_finite());
        }
    }

    #[test]
    fn overflow_safe_amplitude() {
        let disc = radial_disc(1.0, 10.0, 300);
        let s = ground_state(&disc, 2.01, Init::Eigenfunction, &MinimizeOptions::default()).unwrap();
        let sn = s.sup_norm_scaling();
        assert!(s.log_amp > 100.0 && sn.m_pow.is_finite() && sn.ln_m.is_finite());
        assert!(s.u_pow().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn box_and_radial_agree() {
        let dom = DomainSpec::ball3(1.0).unwrap();
        let (_, r) = radial_ground_state(&dom, 3, 2.5, 600, 12.0).unwrap();
        let disc = Discretization::box_grid(BoxGrid::new(4.0, 39).unwrap(), &dom).unwrap();
        let b = ground_state(&disc, 2.5, Init::Eigenfunction, &MinimizeOptions::default()).unwrap();
        assert!(b.residual < 1e-9);
        assert!((b.alpha_p - r.alpha_p).abs() < 0.05 * r.alpha_p, "{} {}", b.alpha_p, r.alpha_p);
    }

    #[test]
    fn rejects_bad_exponents() {
        let disc = radial_disc(1.0, 8.0, 100);
        for p in [1.0, 2.0, 6.0, 7.0] {
            assert!(minimize_alpha(&disc, p, Init::Eigenfunction, &MinimizeOptions::default()).is_err());
        }
    }
}
