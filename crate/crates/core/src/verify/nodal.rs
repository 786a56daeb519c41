use std::collections::VecDeque;

use crate::discretize::{Grid, ScalarField};

/// Number of connected components of `{φ > θ}` and `{φ < -θ}` with
/// `θ = threshold_rel · sup|φ|` (6-connectivity on box grids).
pub fn count_nodal_domains(phi: &ScalarField, threshold_rel: f64) -> usize {
    let theta = threshold_rel * phi.sup_abs();
    let sign = |v: f64| -> i8 {
        if v > theta {
            1
        } else if v < -theta {
            -1
        } else {
            0
        }
    };
    match &phi.grid {
        Grid::Radial(_) => {
            let mut count = 0;
            let mut prev = 0i8;
            for &v in &phi.values {
                let s = sign(v);
                if s != 0 && s != prev {
                    count += 1;
                }
                if s != 0 || prev != 0 {
                    prev = s;
                }
            }
            count
        }
        Grid::Box(g) => {
            let n = g.n;
            let mut label = vec![false; g.len()];
            let mut count = 0;
            let mut queue = VecDeque::new();
            for start in 0..g.len() {
                let s = sign(phi.values[start]);
                if s == 0 || label[start] {
                    continue;
                }
                count += 1;
                label[start] = true;
                queue.push_back(start);
                while let Some(idx) = queue.pop_front() {
                    let (i, j, k) = g.unindex(idx);
                    let mut visit = |a: usize, b: usize, c: usize| {
                        let m = g.index(a, b, c);
                        if !label[m] && sign(phi.values[m]) == s {
                            label[m] = true;
                            queue.push_back(m);
                        }
                    };
                    if i > 0 {
                        visit(i - 1, j, k);
                    }
                    if i + 1 < n {
                        visit(i + 1, j, k);
                    }
                    if j > 0 {
                        visit(i, j - 1, k);
                    }
                    if j + 1 < n {
                        visit(i, j + 1, k);
                    }
                    if k > 0 {
                        visit(i, j, k - 1);
                    }
                    if k + 1 < n {
                        visit(i, j, k + 1);
                    }
                }
            }
            count
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{BoxGrid, RadialGrid};

    #[test]
    fn simple_fields() {
        let g = Grid::Box(BoxGrid::new(2.0, 19).unwrap());
        let c = ScalarField::from_fn(g.clone(), |_| 1.0);
        assert_eq!(count_nodal_domains(&c, 1e-3), 1);
        let odd = ScalarField::from_fn(g.clone(), |x| x[0] * (-x[0] * x[0]).exp());
        assert_eq!(count_nodal_domains(&odd, 1e-3), 2);
        let quad = ScalarField::from_fn(g.clone(), |x| x[0] * x[1]);
        assert_eq!(count_nodal_domains(&quad, 1e-3), 4);
        let shells = ScalarField::from_fn(g, |x| (2.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()).cos());
        assert_eq!(count_nodal_domains(&shells, 1e-3), 3);
    }

    #[test]
    fn radial_runs_ignore_small_values() {
        let g = Grid::Radial(RadialGrid::new(3, 10.0, 200).unwrap());
        let f = ScalarField::from_fn(g.clone(), |x| (x[0]).cos() * (-0.1 * x[0]).exp());
        assert_eq!(count_nodal_domains(&f, 1e-3), 4);
        let tiny = ScalarField::from_fn(g, |x| if x[0] < 5.0 { 1.0 } else { -1e-5 });
        assert_eq!(count_nodal_domains(&tiny, 1e-3), 1);
    }
}
