/// Square sparse matrix in compressed row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseOperator {
    /// Builds from per-row `(col, value)` lists; columns are sorted.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut indptr = Vec::with_capacity(dim + 1);
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        SparseOperator { dim, indptr, indices, values }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SparseOperator {
            dim: d.len(),
            indptr: (0..=d.len()).collect(),
            indices: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |p| (self.indices[p], self.values[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map(|e| e.1).unwrap_or(0.0)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            let mut s = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[p] * x[self.indices[p]];
            }
            *yi = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply(x, &mut y);
        y
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `x^T A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, xi) in x.iter().enumerate().take(self.dim) {
            let mut r = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                r += self.values[p] * y[self.indices[p]];
            }
            s += xi * r;
        }
        s
    }

    /// `max |A - A^T|` over stored entries and their mirrors.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m = m.max((v - self.get(j, i)).abs());
            }
        }
        m
    }

    /// `self - diag(d)`.
    pub fn minus_diagonal(&self, d: &[f64]) -> SparseOperator {
        let mut out = self.clone();
        for (i, di) in d.iter().enumerate().take(self.dim) {
            let mut found = false;
            for p in out.indptr[i]..out.indptr[i + 1] {
                if out.indices[p] == i {
                    out.values[p] -= di;
                    found = true;
                }
            }
            assert!(found, "structural diagonal missing in row {i}");
        }
        out
    }

    /// Half bandwidth `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.dim {
            for (j, _) in self.row(i) {
                b = b.max(i.abs_diff(j));
            }
        }
        b
    }

    /// Tridiagonal bands `(diag, off)` if the bandwidth is at most one.
    pub fn tridiagonal(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.bandwidth() > 1 {
            return None;
        }
        let d = self.diag();
        let off = (0..self.dim.saturating_sub(1)).map(|i| self.get(i, i + 1)).collect();
        Some((d, off))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.dim]; self.dim];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] += v;
            }
        }
        a
    }
}
