//! Thick-restart Lanczos with full reorthogonalization and locking.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{axpy, dot};

/// Which end of the spectrum to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Largest,
    Smallest,
    Magnitude,
}

impl Which {
    fn score(self, v: f64) -> f64 {
        match self {
            Which::Largest => v,
            Which::Smallest => -v,
            Which::Magnitude => v.abs(),
        }
    }
}

/// A symmetric operator, self-adjoint in the metric `M` if one is given.
pub struct Problem<'a> {
    pub dim: usize,
    pub op: &'a dyn Fn(&[f64], &mut [f64]),
    pub metric: Option<&'a dyn Fn(&[f64], &mut [f64])>,
}

#[derive(Clone, Debug)]
pub struct LanczosConfig {
    pub nev: usize,
    pub which: Which,
    /// Relative residual tolerance `|r| <= tol |θ|`.
    pub tol: f64,
    pub basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
    /// Converged values with score at or below this end the search.
    pub floor: Option<f64>,
    /// Re-probe from a fresh start to catch missed copies of repeated values.
    pub confirm: bool,
}

impl LanczosConfig {
    pub fn new(nev: usize, which: Which) -> Self {
        LanczosConfig {
            nev,
            which,
            tol: 1e-10,
            basis: (3 * nev + 25).max(30),
            max_restarts: 400,
            seed: 0x5eed,
            floor: None,
            confirm: true,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Eigs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub matvecs: usize,
    pub restarts: usize,
    /// All requested values converged (or the floor was reached).
    pub converged: bool,
}

struct Locked {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
}

struct Run<'a, 'b> {
    p: &'b Problem<'a>,
    cfg: &'b LanczosConfig,
    rng: ChaCha8Rng,
    matvecs: usize,
    restarts: usize,
}

enum PhaseEnd {
    Done,
    Floor,
    Exhausted,
}

impl<'a, 'b> Run<'a, 'b> {
    fn image(&self, x: &[f64]) -> Vec<f64> {
        match self.p.metric {
            Some(m) => {
                let mut y = vec![0.0; x.len()];
                m(x, &mut y);
                y
            }
            None => x.to_vec(),
        }
    }

    fn orth_locked(&self, w: &mut [f64], locked: &Locked) {
        for _ in 0..2 {
            for (v, mv) in locked.vectors.iter().zip(&locked.images) {
                let c = dot(mv, w);
                axpy(-c, v, w);
            }
        }
    }

    fn random_start(&mut self, locked: &Locked, basis: &[Vec<f64>], images: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
        for _ in 0..5 {
            let mut v: Vec<f64> = (0..self.p.dim).map(|_| self.rng.random_range(-1.0..1.0)).collect();
            self.orth_locked(&mut v, locked);
            for _ in 0..2 {
                for (b, mb) in basis.iter().zip(images) {
                    let c = dot(mb, &v);
                    axpy(-c, b, &mut v);
                }
            }
            let mv = self.image(&v);
            let nrm = dot(&v, &mv).max(0.0).sqrt();
            if nrm > 1e-8 * (self.p.dim as f64).sqrt() {
                return Some((v.iter().map(|x| x / nrm).collect(), mv.iter().map(|x| x / nrm).collect()));
            }
        }
        None
    }

    /// Runs restarted cycles until `target` values are locked in total.
    fn phase(&mut self, locked: &mut Locked, target: usize) -> PhaseEnd {
        let n = self.p.dim;
        let cfg = self.cfg;
        let m = cfg.basis.min(n.saturating_sub(locked.vectors.len())).max(1);
        let Some((v0, mv0)) = self.random_start(locked, &[], &[]) else {
            return PhaseEnd::Exhausted;
        };
        let mut basis = vec![v0];
        let mut images = vec![mv0];
        let mut h = DMatrix::<f64>::zeros(m, m);
        let mut j = 0usize;
        let mut w = vec![0.0; n];
        loop {
            let mut beta_res = 0.0;
            let mut exhausted = false;
            while j < basis.len() {
                (self.p.op)(&basis[j], &mut w);
                self.matvecs += 1;
                self.orth_locked(&mut w, locked);
                let mut c = vec![0.0; basis.len()];
                for _ in 0..2 {
                    for (i, mb) in images.iter().enumerate() {
                        let ci = dot(mb, &w);
                        c[i] += ci;
                        axpy(-ci, &basis[i], &mut w);
                    }
                }
                for (i, ci) in c.iter().enumerate() {
                    h[(i, j)] = *ci;
                    h[(j, i)] = *ci;
                }
                let mw = self.image(&w);
                let beta = dot(&w, &mw).max(0.0).sqrt();
                let scale = c[j].abs().max(h.diagonal().amax()).max(f64::MIN_POSITIVE);
                if basis.len() == m {
                    beta_res = beta;
                    break;
                }
                if beta <= 1e-12 * scale {
                    match self.random_start(locked, &basis, &images) {
                        Some((v, mv)) => {
                            basis.push(v);
                            images.push(mv);
                        }
                        None => {
                            exhausted = true;
                            break;
                        }
                    }
                } else {
                    basis.push(w.iter().map(|x| x / beta).collect());
                    images.push(mw.iter().map(|x| x / beta).collect());
                    h[(j + 1, j)] = beta;
                    h[(j, j + 1)] = beta;
                }
                j += 1;
            }
            let k = basis.len();
            let hk = h.view((0, 0), (k, k)).into_owned();
            let eig = SymmetricEigen::new(hk);
            let theta = eig.eigenvalues;
            let y = eig.eigenvectors;
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| cfg.which.score(theta[b]).total_cmp(&cfg.which.score(theta[a])));
            let spread = theta.amax().max(f64::MIN_POSITIVE);
            let converged = |i: usize| beta_res * y[(k - 1, i)].abs() <= cfg.tol * theta[i].abs().max(1e-3 * spread);
            let mut taken = vec![false; k];
            let mut stop = None;
            for &i in &order {
                if locked.vectors.len() >= target || !converged(i) {
                    break;
                }
                if let Some(f) = cfg.floor {
                    if cfg.which.score(theta[i]) <= f {
                        stop = Some(PhaseEnd::Floor);
                        break;
                    }
                }
                let mut x = vec![0.0; n];
                let mut mx = vec![0.0; n];
                for r in 0..k {
                    axpy(y[(r, i)], &basis[r], &mut x);
                    if self.p.metric.is_some() {
                        axpy(y[(r, i)], &images[r], &mut mx);
                    }
                }
                if self.p.metric.is_none() {
                    mx.copy_from_slice(&x);
                }
                let nrm = dot(&x, &mx).sqrt();
                x.iter_mut().for_each(|v| *v /= nrm);
                mx.iter_mut().for_each(|v| *v /= nrm);
                locked.values.push(theta[i]);
                locked.vectors.push(x);
                locked.images.push(mx);
                taken[i] = true;
            }
            if let Some(s) = stop {
                return s;
            }
            if locked.vectors.len() >= target {
                return PhaseEnd::Done;
            }
            if exhausted {
                return PhaseEnd::Exhausted;
            }
            self.restarts += 1;
            if self.restarts > cfg.max_restarts {
                return PhaseEnd::Exhausted;
            }
            let want = target - locked.vectors.len();
            let keep_n = (want + 6).max(k / 3).min(m.saturating_sub(2)).max(1);
            let keep: Vec<usize> = order.iter().copied().filter(|i| !taken[*i]).take(keep_n).collect();
            let mut nb = Vec::with_capacity(m);
            let mut ni = Vec::with_capacity(m);
            for &i in &keep {
                let mut x = vec![0.0; n];
                for r in 0..k {
                    axpy(y[(r, i)], &basis[r], &mut x);
                }
                let mx = if self.p.metric.is_some() {
                    let mut mx = vec![0.0; n];
                    for r in 0..k {
                        axpy(y[(r, i)], &images[r], &mut mx);
                    }
                    mx
                } else {
                    x.clone()
                };
                nb.push(x);
                ni.push(mx);
            }
            h.fill(0.0);
            let p = keep.len();
            for (a, &i) in keep.iter().enumerate() {
                h[(a, a)] = theta[i];
            }
            if beta_res > 1e-12 * spread {
                let mw = self.image(&w);
                for (a, &i) in keep.iter().enumerate() {
                    let b = beta_res * y[(k - 1, i)];
                    h[(p, a)] = b;
                    h[(a, p)] = b;
                }
                nb.push(w.iter().map(|x| x / beta_res).collect());
                ni.push(mw.iter().map(|x| x / beta_res).collect());
            } else {
                match self.random_start(locked, &nb, &ni) {
                    Some((v, mv)) => {
                        nb.push(v);
                        ni.push(mv);
                    }
                    None => return PhaseEnd::Exhausted,
                }
            }
            // re-orthogonalize the kept block against newly locked vectors
            for x in nb.iter_mut().take(p) {
                self.orth_locked(x, locked);
            }
            basis = nb;
            images = ni;
            j = p;
        }
    }
}

/// Extreme eigenpairs of a symmetric operator.
pub fn lanczos(problem: &Problem, cfg: &LanczosConfig) -> Eigs {
    let mut run = Run { p: problem, cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), matvecs: 0, restarts: 0 };
    let mut locked = Locked { values: vec![], vectors: vec![], images: vec![] };
    let nev = cfg.nev.min(problem.dim);
    let mut end = run.phase(&mut locked, nev);
    if cfg.confirm && matches!(end, PhaseEnd::Done) {
        loop {
            let worst = locked
                .values
                .iter()
                .map(|v| cfg.which.score(*v))
                .fold(f64::INFINITY, f64::min);
            let before = locked.values.len();
            if before >= problem.dim {
                break;
            }
            match run.phase(&mut locked, before + 1) {
                PhaseEnd::Done => {
                    let s = cfg.which.score(locked.values[before]);
                    if s < worst - 1e2 * cfg.tol * worst.abs().max(f64::MIN_POSITIVE) {
                        locked.values.pop();
                        locked.vectors.pop();
                        locked.images.pop();
                        break;
                    }
                }
                _ => break,
            }
        }
    }
    if matches!(end, PhaseEnd::Floor) {
        end = PhaseEnd::Done;
    }
    let mut idx: Vec<usize> = (0..locked.values.len()).collect();
    idx.sort_by(|&a, &b| cfg.which.score(locked.values[b]).total_cmp(&cfg.which.score(locked.values[a])));
    Eigs {
        values: idx.iter().map(|&i| locked.values[i]).collect(),
        vectors: idx.iter().map(|&i| std::mem::take(&mut locked.vectors[i])).collect(),
        matvecs: run.matvecs,
        restarts: run.restarts,
        converged: matches!(end, PhaseEnd::Done),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_problem(d: &[f64]) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x: &[f64], y: &mut [f64]| {
            for i in 0..d.len() {
                y[i] = d[i] * x[i];
            }
        }
    }

    #[test]
    fn finds_largest_and_repeated_values() {
        let mut d: Vec<f64> = (0..400).map(|i| 1.0 / (1.0 + i as f64)).collect();
        d[7] = 0.5; // copy of d[1]
        d[9] = 0.5;
        let op = diag_problem(&d);
        let p = Problem { dim: d.len(), op: &op, metric: None };
        let mut cfg = LanczosConfig::new(4, Which::Largest);
        cfg.tol = 1e-12;
        let e = lanczos(&p, &cfg);
        assert!(e.converged);
        assert!((e.values[0] - 1.0).abs() < 1e-10);
        let halves = e.values.iter().filter(|v| (**v - 0.5).abs() < 1e-10).count();
        assert_eq!(halves, 3, "{:?}", e.values);
        for (i, u) in e.vectors.iter().enumerate() {
            for (j, v) in e.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(u, v) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn smallest_and_magnitude() {
        let d: Vec<f64> = (0..300).map(|i| (i as f64 - 100.5) / 10.0).collect();
        let op = diag_problem(&d);
        let p = Problem { dim: d.len(), op: &op, metric: None };
        let e = lanczos(&p, &LanczosConfig::new(2, Which::Smallest));
        assert!((e.values[0] + 10.05).abs() < 1e-9 && (e.values[1] + 9.95).abs() < 1e-9);
        let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
        let op = diag_problem(&inv);
        let p = Problem { dim: d.len(), op: &op, metric: None };
        let e = lanczos(&p, &LanczosConfig::new(2, Which::Magnitude));
        assert!((e.values[0].abs() - 20.0).abs() < 1e-8, "{:?}", e.values);
        assert!((e.values[1].abs() - 20.0).abs() < 1e-8);
    }

    #[test]
    fn floor_stops_early() {
        let d: Vec<f64> = (0..200).map(|i| 2.0 - i as f64 / 50.0).collect();
        let op = diag_problem(&d);
        let p = Problem { dim: d.len(), op: &op, metric: None };
        let mut cfg = LanczosConfig::new(10, Which::Largest);
        cfg.floor = Some(1.95);
        let e = lanczos(&p, &cfg);
        assert!(e.values.iter().all(|v| *v > 1.95));
        assert_eq!(e.values.len(), 3);
    }

    #[test]
    fn metric_inner_product() {
        // generalized problem K x = μ M x as M^{-1} K, self-adjoint in M
        let m: Vec<f64> = (0..150).map(|i| 1.0 + (i % 7) as f64).collect();
        let k: Vec<f64> = (0..150).map(|i| (i as f64).sqrt()).collect();
        let op = |x: &[f64], y: &mut [f64]| {
            for i in 0..150 {
                y[i] = k[i] / m[i] * x[i];
            }
        };
        let met = |x: &[f64], y: &mut [f64]| {
            for i in 0..150 {
                y[i] = m[i] * x[i];
            }
        };
        let p = Problem { dim: 150, op: &op, metric: Some(&met) };
        let e = lanczos(&p, &LanczosConfig::new(3, Which::Largest));
        let mut want: Vec<f64> = (0..150).map(|i| k[i] / m[i]).collect();
        want.sort_by(|a, b| b.total_cmp(a));
        for t in 0..3 {
            assert!((e.values[t] - want[t]).abs() < 1e-9);
        }
    }
}
