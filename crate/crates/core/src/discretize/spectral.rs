//! Exact diagonalization of the 7-point Dirichlet Laplacian by sine transforms,
//! restricted to reflection-symmetry sectors of the box.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::BoxGrid;

/// Behaviour of a sector under the reflection `x_a -> -x_a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Full,
    Even,
    Odd,
}

impl Parity {
    pub fn label(self) -> char {
        match self {
            Parity::Full => 'F',
            Parity::Even => 'E',
            Parity::Odd => 'O',
        }
    }
}

/// Orthonormal DST-I of length `n`, restricted to one parity class.
struct LineTransform {
    n: usize,
    nodes: Vec<usize>,
    /// `(full index, factor)` entries realising the orthonormal embedding of
    /// each reduced node.
    orbit: Vec<Vec<(usize, f64)>>,
    modes: Vec<usize>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl LineTransform {
    fn new(n: usize, parity: Parity, planner: &mut FftPlanner<f64>) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (nodes, orbit, modes): (Vec<usize>, Vec<Vec<(usize, f64)>>, Vec<usize>) = match parity {
            Parity::Full => ((0..n).collect(), (0..n).map(|i| vec![(i, 1.0)]).collect(), (1..=n).collect()),
            Parity::Even => {
                let nodes: Vec<usize> = (n / 2..n).collect();
                let orbit = nodes
                    .iter()
                    .map(|&i| if n - 1 - i == i { vec![(i, 1.0)] } else { vec![(i, s), (n - 1 - i, s)] })
                    .collect();
                (nodes, orbit, (1..=n).step_by(2).collect())
            }
            Parity::Odd => {
                let nodes: Vec<usize> = (n / 2..n).filter(|&i| n - 1 - i != i).collect();
                let orbit = nodes.iter().map(|&i| vec![(i, s), (n - 1 - i, -s)]).collect();
                (nodes, orbit, (2..=n).step_by(2).collect())
            }
        };
        debug_assert_eq!(nodes.len(), modes.len());
        LineTransform {
            n,
            nodes,
            orbit,
            modes,
            norm: (2.0 / (n as f64 + 1.0)).sqrt(),
            fft: planner.plan_fft_forward(2 * n + 2),
        }
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Full-length DST of `a` and `b` in place using one complex FFT.
    fn dst_pair(&self, a: &mut [f64], b: &mut [f64], buf: &mut [Complex<f64>], scratch: &mut [Complex<f64>]) {
        let n = self.n;
        buf[0] = Complex::new(0.0, 0.0);
        buf[n + 1] = Complex::new(0.0, 0.0);
        for j in 0..n {
            buf[1 + j] = Complex::new(a[j], b[j]);
            buf[2 * n + 1 - j] = Complex::new(-a[j], -b[j]);
        }
        self.fft.process_with_scratch(buf, scratch);
        let c = 0.5 * self.norm;
        for k in 0..n {
            let z = buf[k + 1];
            a[k] = -z.im * c;
            b[k] = z.re * c;
        }
    }

    fn embed_nodes(&self, y: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (t, orb) in self.orbit.iter().enumerate() {
            for &(i, f) in orb {
                x[i] = f * y[t];
            }
        }
    }

    fn restrict_nodes(&self, x: &[f64], y: &mut [f64]) {
        for (t, orb) in self.orbit.iter().enumerate() {
            y[t] = orb.iter().map(|&(i, f)| f * x[i]).sum();
        }
    }

    fn embed_modes(&self, c: &[f64], s: &mut [f64]) {
        s.iter_mut().for_each(|v| *v = 0.0);
        for (t, &j) in self.modes.iter().enumerate() {
            s[j - 1] = c[t];
        }
    }

    fn restrict_modes(&self, s: &[f64], c: &mut [f64]) {
        for (t, &j) in self.modes.iter().enumerate() {
            c[t] = s[j - 1];
        }
    }
}

/// Sine-transform coordinates on one symmetry sector of a box grid.
///
/// Sector vectors have shape `shape` in both node and coefficient space; the
/// node-to-coefficient map is orthonormal and diagonalizes `-Δ_h`.
pub struct SectorSpace {
    pub grid: BoxGrid,
    pub parity: [Parity; 3],
    pub shape: [usize; 3],
    /// Eigenvalue of `-Δ_h` at each coefficient entry.
    pub lap: Vec<f64>,
    lines: [LineTransform; 3],
}

impl SectorSpace {
    pub fn new(grid: &BoxGrid, parity: [Parity; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let lines = parity.map(|p| LineTransform::new(grid.n, p, &mut planner));
        let shape = [lines[0].len(), lines[1].len(), lines[2].len()];
        let n = grid.n as f64;
        let h2 = grid.h * grid.h;
        let eig = |j: usize| 4.0 / h2 * (std::f64::consts::PI * j as f64 / (2.0 * (n + 1.0))).sin().powi(2);
        let e: Vec<Vec<f64>> = lines.iter().map(|l| l.modes.iter().map(|&j| eig(j)).collect()).collect();
        let mut lap = Vec::with_capacity(shape[0] * shape[1] * shape[2]);
        for a in &e[0] {
            for b in &e[1] {
                for c in &e[2] {
                    lap.push(a + b + c);
                }
            }
        }
        SectorSpace { grid: grid.clone(), parity, shape, lap, lines }
    }

    /// The whole grid as a single sector.
    pub fn full(grid: &BoxGrid) -> Self {
        Self::new(grid, [Parity::Full; 3])
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1] * self.shape[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self) -> String {
        self.parity.iter().map(|p| p.label()).collect()
    }

    fn transform(&self, data: &mut [f64], forward: bool) {
        let n = self.grid.n;
        let m = 2 * n + 2;
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.lines.iter().map(|l| l.fft.get_inplace_scratch_len()).max().unwrap_or(0)];
        let mut xa = vec![0.0; n];
        let mut xb = vec![0.0; n];
        let strides = [self.shape[1] * self.shape[2], self.shape[2], 1];
        for axis in 0..3 {
            let line = &self.lines[axis];
            let len = self.shape[axis];
            let stride = strides[axis];
            let mut starts = Vec::new();
            for i in 0..self.shape[0] {
                for j in 0..self.shape[1] {
                    for k in 0..self.shape[2] {
                        let c = [i, j, k];
                        if c[axis] == 0 {
                            starts.push(i * strides[0] + j * strides[1] + k);
                        }
                    }
                }
            }
            let mut ya = vec![0.0; len];
            let mut yb = vec![0.0; len];
            for pair in starts.chunks(2) {
                let s0 = pair[0];
                for t in 0..len {
                    ya[t] = data[s0 + t * stride];
                }
                if pair.len() == 2 {
                    for t in 0..len {
                        yb[t] = data[pair[1] + t * stride];
                    }
                } else {
                    yb.iter_mut().for_each(|v| *v = 0.0);
                }
                if forward {
                    line.embed_nodes(&ya, &mut xa);
                    line.embed_nodes(&yb, &mut xb);
                } else {
                    line.embed_modes(&ya, &mut xa);
                    line.embed_modes(&yb, &mut xb);
                }
                line.dst_pair(&mut xa, &mut xb, &mut buf, &mut scratch);
                if forward {
                    line.restrict_modes(&xa, &mut ya);
                    line.restrict_modes(&xb, &mut yb);
                } else {
                    line.restrict_nodes(&xa, &mut ya);
                    line.restrict_nodes(&xb, &mut yb);
                }
                for t in 0..len {
                    data[s0 + t * stride] = ya[t];
                }
                if pair.len() == 2 {
                    for t in 0..len {
                        data[pair[1] + t * stride] = yb[t];
                    }
                }
            }
        }
    }

    /// Node values to sine coefficients, in place.
    pub fn forward(&self, data: &mut [f64]) {
        self.transform(data, true);
    }

    /// Sine coefficients to node values, in place.
    pub fn inverse(&self, data: &mut [f64]) {
        self.transform(data, false);
    }

    /// Full-grid index of the representative node of each sector entry.
    pub fn nodes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        for &i in &self.lines[0].nodes {
            for &j in &self.lines[1].nodes {
                for &k in &self.lines[2].nodes {
                    out.push(self.grid.index(i, j, k));
                }
            }
        }
        out
    }

    /// Values of a full-grid diagonal at the sector's representative nodes.
    pub fn restrict_diag(&self, q: &[f64]) -> Vec<f64> {
        self.nodes().into_iter().map(|i| q[i]).collect()
    }

    fn for_each_orbit(&self, mut f: impl FnMut(usize, usize, f64)) {
        let mut t = 0;
        for o0 in &self.lines[0].orbit {
            for o1 in &self.lines[1].orbit {
                for o2 in &self.lines[2].orbit {
                    for &(i, a) in o0 {
                        for &(j, b) in o1 {
                            for &(k, c) in o2 {
                                f(t, self.grid.index(i, j, k), a * b * c);
                            }
                        }
                    }
                    t += 1;
                }
            }
        }
    }

    /// Orthonormal projection of a full-grid vector onto the sector.
    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.len()];
        self.for_each_orbit(|t, idx, f| y[t] += f * full[idx]);
        y
    }

    /// Adds the full-grid image of a sector vector into `full`.
    pub fn scatter_add(&self, y: &[f64], full: &mut [f64]) {
        self.for_each_orbit(|t, idx, f| full[idx] += f * y[t]);
    }

    pub fn scatter(&self, y: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.grid.len()];
        self.scatter_add(y, &mut full);
        full
    }

    /// `b <- (-Δ_h)^{-1} b` on the sector.
    pub fn solve_laplace(&self, b: &mut [f64]) {
        self.forward(b);
        for (v, l) in b.iter_mut().zip(&self.lap) {
            *v /= l;
        }
        self.inverse(b);
    }

    /// `b <- (-Δ_h) b` on the sector.
    pub fn apply_laplace(&self, b: &mut [f64]) {
        self.forward(b);
        for (v, l) in b.iter_mut().zip(&self.lap) {
            *v *= l;
        }
        self.inverse(b);
    }
}

/// `y = -Δ_h x` with the 7-point stencil on the full grid.
pub fn neg_laplace_7pt(grid: &BoxGrid, x: &[f64], y: &mut [f64]) {
    let n = grid.n;
    let ih2 = 1.0 / (grid.h * grid.h);
    for i in 0..n {
        for j in 0..n {
            let base = grid.index(i, j, 0);
            for k in 0..n {
                let idx = base + k;
                let mut s = 6.0 * x[idx];
                if i > 0 {
                    s -= x[idx - n * n];
                }
                if i + 1 < n {
                    s -= x[idx + n * n];
                }
                if j > 0 {
                    s -= x[idx - n];
                }
                if j + 1 < n {
                    s -= x[idx + n];
                }
                if k > 0 {
                    s -= x[idx - 1];
                }
                if k + 1 < n {
                    s -= x[idx + 1];
                }
                y[idx] = s * ih2;
            }
        }
    }
}
