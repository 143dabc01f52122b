//! Discrete error norms and convergence-order fits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::ScalarField;

/// `sqrt(sum (u - u*)^2 * dx^dim)`.
pub fn error_l2(u: &ScalarField, u_star: &ScalarField) -> Result<f64> {
    u.same_grid(u_star)?;
    let grid = u.grid();
    let weight = grid.dx().powi(grid.dim() as i32);
    let sum: f64 = u
        .values()
        .iter()
        .zip(u_star.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sum * weight).sqrt())
}

/// `max |u - u*|`.
pub fn error_linf(u: &ScalarField, u_star: &ScalarField) -> Result<f64> {
    u.same_grid(u_star)?;
    Ok(u.sup_distance(u_star))
}

/// Errors measured on a sequence of refinements.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<usize>,
    pub dx: Vec<f64>,
    pub errors_l2: Vec<f64>,
    pub errors_linf: Vec<f64>,
}

/// Fitted orders; `None` when the fit is degenerate (zero errors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedOrders {
    pub l2: Option<f64>,
    pub linf: Option<f64>,
}

impl ConvergenceStudy {
    pub fn push(&mut self, cells: usize, dx: f64, l2: f64, linf: f64) {
        self.levels.push(cells);
        self.dx.push(dx);
        self.errors_l2.push(l2);
        self.errors_linf.push(linf);
    }

    /// `log2(e_k / e_{k+1})` between consecutive levels.
    pub fn pairwise_orders(errors: &[f64], dx: &[f64]) -> Vec<f64> {
        errors
            .windows(2)
            .zip(dx.windows(2))
            .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            .collect()
    }

    /// Orders between the coarsest and finest level.
    pub fn fitted(&self) -> FittedOrders {
        FittedOrders {
            l2: endpoint_slope(&self.dx, &self.errors_l2).ok(),
            linf: endpoint_slope(&self.dx, &self.errors_linf).ok(),
        }
    }

    /// Least-squares slopes over all levels.
    pub fn least_squares(&self) -> FittedOrders {
        FittedOrders {
            l2: slope(&self.dx, &self.errors_l2).ok(),
            linf: slope(&self.dx, &self.errors_linf).ok(),
        }
    }
}

/// Observed orders `(l2, linf)`: slope of `log(error)` against `log(dx)`
/// between the coarsest and the finest level.
pub fn fit_order(study: &ConvergenceStudy) -> Result<(f64, f64)> {
    Ok((
        endpoint_slope(&study.dx, &study.errors_l2)?,
        endpoint_slope(&study.dx, &study.errors_linf)?,
    ))
}

fn check_positive_pairs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "levels",
            value: x.len() as f64,
            reason: "need at least two levels with matching errors",
        });
    }
    if let Some(&bad) = y.iter().chain(x).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "error",
            value: bad,
            reason: "order fit needs positive finite values",
        });
    }
    Ok(())
}

/// `ln(y_0 / y_n) / ln(x_0 / x_n)`.
pub fn endpoint_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    check_positive_pairs(x, y)?;
    let n = x.len() - 1;
    Ok((y[0] / y[n]).ln() / (x[0] / x[n]).ln())
}

/// Least-squares slope of `log y` on `log x`.
pub fn slope(x: &[f64], y: &[f64]) -> Result<f64> {
    check_positive_pairs(x, y)?;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (s, _, _) = linear_fit(&lx, &ly);
    Ok(s)
}

/// Ordinary least squares `y = a*x + b`; returns `(a, b, r^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (a, b, r2)
}
