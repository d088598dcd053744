use crate::error::{Error, Result};

/// Log-uniform grid on `[lo, hi]` with `per_decade` intervals per factor of ten.
/// Both endpoints are included exactly.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::Usage(format!(
            "log grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if per_decade == 0 {
        return Err(Error::Usage("grid density must be positive".into()));
    }
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let step = (hi / lo).ln() / n as f64;
    let mut grid: Vec<f64> = (0..=n).map(|i| lo * (step * i as f64).exp()).collect();
    grid[0] = lo;
    grid[n] = hi;
    Ok(grid)
}

/// `base · 2^j` for `j = 0..=levels`.
pub fn dyadic_radii(base: f64, levels: usize) -> Vec<f64> {
    (0..=levels).map(|j| base * 2f64.powi(j as i32)).collect()
}
