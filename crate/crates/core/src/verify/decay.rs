use serde::Serialize;

use crate::discretize::ScalarField;
use crate::error::{invalid, Error, Result};
use crate::semilinear::{serrin_exponent, GroundState};

use super::{safe_radius, shells};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    LinearExp,
    Power,
    SerrinLog,
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub model: FitModel,
    pub fitted_rate: f64,
    pub reference_rate: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub n_samples: usize,
    /// Intercept of the fitted line.
    pub intercept: f64,
}

impl FitReport {
    pub fn rel_error(&self) -> f64 {
        (self.fitted_rate - self.reference_rate).abs() / self.reference_rate.abs()
    }
}

const MIN_SHELLS: usize = 10;

/// Least squares `y = a + b x`; returns `(a, b, r^2)`.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let r2 = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 0.0 };
    (my - b * mx, b, r2)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Shell medians `(r, |f|)` inside `[r_lo, r_hi]`, skipping values below the
/// rounding floor.
fn shell_samples(f: &ScalarField, center: &[f64], window: (f64, f64)) -> Vec<(f64, f64)> {
    let sup = f.sup_abs();
    let width = f.grid.spacing();
    shells(f, center, width, window.1)
        .into_iter()
        .filter(|s| s.r_mean >= window.0 && s.r_mean <= window.1)
        .filter_map(|s| {
            let mut vals: Vec<f64> = s.nodes.iter().map(|(i, _)| f.values[*i].abs()).collect();
            let m = median(&mut vals);
            (m > 1e2 * f64::EPSILON * sup).then_some((s.r_mean, m))
        })
        .collect()
}

fn check_window(window: (f64, f64), floor: f64, ceiling: f64) -> Result<()> {
    if !(window.0 >= floor - 1e-12 && window.1 > window.0) {
        return invalid(format!("fit window [{}, {}] must start at or beyond {floor}", window.0, window.1));
    }
    if window.1 > ceiling + 1e-12 {
        return invalid(format!("fit window end {} reaches the truncation layer (limit {ceiling})", window.1));
    }
    Ok(())
}

/// Exponential rate of `|φ| |x|^{(N-1)/2}` on shells about `center`; the
/// default window runs from `R_Ω + 1` to where the truncation boundary's
/// reflected tail drops below `e^{-14}`.
pub fn fit_linear_decay(
    phi: &ScalarField,
    lambda: f64,
    center: &[f64],
    circumradius: f64,
    window: Option<(f64, f64)>,
) -> Result<FitReport> {
    let k = lambda.sqrt();
    let h = phi.grid.spacing();
    let ceiling = safe_radius(&phi.grid, center, 5.0 * h);
    let window = window.unwrap_or((circumradius + 1.0, ceiling.min(safe_radius(&phi.grid, center, 0.0) - 7.0 / k)));
    check_window(window, 1.0, ceiling)?;
    let samples = shell_samples(phi, center, window);
    if samples.len() < MIN_SHELLS {
        return Err(Error::InsufficientWindow { shells: samples.len(), needed: MIN_SHELLS });
    }
    let e = 0.5 * (phi.grid.dim() as f64 - 1.0);
    let x: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.ln() + e * s.0.ln()).collect();
    let (a, b, r2) = line_fit(&x, &y);
    Ok(FitReport {
        model: FitModel::LinearExp,
        fitted_rate: -b,
        reference_rate: k,
        window,
        r_squared: r2,
        n_samples: samples.len(),
        intercept: a,
    })
}

/// `C_p = ((4p - 2N(p-2) - 4)/(p-2)^2)^{1/(p-2)}`, the amplitude of the
/// singular exterior solution `C_p |x|^{-2/(p-2)}`.
pub fn comparison_constant_cp(p: f64, dim: usize) -> f64 {
    let n = dim as f64;
    ((4.0 * p - 2.0 * n * (p - 2.0) - 4.0) / (p - 2.0).powi(2)).powf(1.0 / (p - 2.0))
}

/// Power-law decay of a ground state: the slope of `ln v_p` against `ln|x|`,
/// or against `ln(|x| sqrt(ln|x|))` at the Serrin exponent.
pub fn fit_semilinear_decay(state: &GroundState, center: &[f64], window: (f64, f64)) -> Result<FitReport> {
    let dim = state.v.grid.dim();
    let p = state.p;
    let ps = serrin_exponent(dim);
    if p <= 2.0 {
        return invalid(format!("decay law needs p > 2, got {p}"));
    }
    if p > ps + 1e-9 {
        return Err(Error::Unsupported(format!("no decay model for p = {p} above the Serrin exponent {ps}")));
    }
    let serrin = (p - ps).abs() <= 1e-9;
    let h = state.v.grid.spacing();
    let ceiling = safe_radius(&state.v.grid, center, 5.0 * h);
    check_window(window, if serrin { 1.0 + 1e-9 } else { 1.0 }, ceiling)?;
    if serrin && window.0 <= 1.0 {
        return invalid("the Serrin model needs r_lo > 1");
    }
    let samples = shell_samples(&state.v, center, window);
    if samples.len() < MIN_SHELLS {
        return Err(Error::InsufficientWindow { shells: samples.len(), needed: MIN_SHELLS });
    }
    let x: Vec<f64> = samples
        .iter()
        .map(|s| if serrin { s.0.ln() + 0.5 * s.0.ln().ln() } else { s.0.ln() })
        .collect();
    let y: Vec<f64> = samples.iter().map(|s| s.1.ln() + state.log_amp).collect();
    let (a, b, r2) = line_fit(&x, &y);
    let (model, reference) = if serrin {
        (FitModel::SerrinLog, 2.0 - dim as f64)
    } else {
        (FitModel::Power, -2.0 / (p - 2.0))
    };
    Ok(FitReport { model, fitted_rate: b, reference_rate: reference, window, r_squared: r2, n_samples: samples.len(), intercept: a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{BoxGrid, Grid, RadialGrid};

    #[test]
    fn exact_exponential_profile() {
        let g = RadialGrid::new(3, 20.0, 2000).unwrap();
        let f = ScalarField::from_fn(Grid::Radial(g), |x| (-2.0 * x[0]).exp() / x[0].max(1e-3));
        let r = fit_linear_decay(&f, 4.0, &[0.0; 3], 1.0, None).unwrap();
        assert!(r.rel_error() < 1e-6 && r.r_squared > 0.999999, "{r:?}");
    }

    #[test]
    fn constant_field_is_rejected() {
        let g = BoxGrid::new(6.0, 59).unwrap();
        let f = ScalarField::from_fn(Grid::Box(g), |_| 1.0);
        let r = fit_linear_decay(&f, 1.0, &[0.0; 3], 1.0, Some((2.0, 5.0))).unwrap();
        assert!(r.r_squared < 0.5 || r.rel_error() > 0.5, "{r:?}");
    }

    #[test]
    fn window_guards() {
        let g = RadialGrid::new(3, 10.0, 100).unwrap();
        let f = ScalarField::from_fn(Grid::Radial(g), |x| (-x[0]).exp());
        assert!(matches!(fit_linear_decay(&f, 1.0, &[0.0; 3], 1.0, Some((2.0, 2.5))), Err(Error::InsufficientWindow { .. })));
        assert!(fit_linear_decay(&f, 1.0, &[0.0; 3], 1.0, Some((0.5, 5.0))).is_err());
        assert!(fit_linear_decay(&f, 1.0, &[0.0; 3], 1.0, Some((2.0, 9.9))).is_err());
    }

    #[test]
    fn cp_matches_singular_solution() {
        // -w'' - 2w'/r = -w^{p-1} for w = C r^{-2/(p-2)}
        for p in [2.5, 3.0, 3.5] {
            let c = comparison_constant_cp(p, 3);
            let s = 2.0 / (p - 2.0);
            let lhs = -c * s * (s + 1.0) + 2.0 * c * s;
            assert!((lhs + c.powf(p - 1.0)).abs() < 1e-9 * c.powf(p - 1.0));
        }
    }
}
