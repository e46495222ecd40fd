//! Locally weighted scatterplot smoothing: local linear fits with tricube
//! neighborhood weights, robustified by bisquare reweighting of residuals.

use crate::error::{Error, Result};

/// Smooths `ys` against strictly increasing `xs`.
///
/// Each fitted value is a weighted linear regression over the nearest
/// ceil(span * n) points, tricube-weighted by distance; `iterations`
/// rounds of bisquare reweighting against the residuals follow. A constant
/// or affine input is reproduced exactly.
pub fn lowess(xs: &[f64], ys: &[f64], span: f64, iterations: usize) -> Result<Vec<f64>> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "lowess needs matching lengths, got {n} xs and {} ys",
            ys.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "lowess needs at least 2 points".into(),
        ));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lowess span must lie in (0, 1], got {span}"
        )));
    }
    for w in xs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "lowess xs must be strictly increasing".into(),
            ));
        }
    }
    let r = ((span * n as f64).ceil() as usize).clamp(2, n);
    let mut robustness = vec![1.0; n];
    let mut fitted = vec![0.0; n];
    for round in 0..=iterations {
        for i in 0..n {
            let (lo, hi) = nearest_window(xs, i, r);
            let d_max = (xs[i] - xs[lo]).max(xs[hi] - xs[i]);
            let mut sw = 0.0;
            let mut swx = 0.0;
            let mut swy = 0.0;
            let mut swxx = 0.0;
            let mut swxy = 0.0;
            for k in lo..=hi {
                let w = tricube((xs[k] - xs[i]).abs() / d_max) * robustness[k];
                sw += w;
                swx += w * xs[k];
                swy += w * ys[k];
                swxx += w * xs[k] * xs[k];
                swxy += w * xs[k] * ys[k];
            }
            if sw == 0.0 {
                // Robustness zeroed the whole window; fall back to the
                // unweighted local mean.
                fitted[i] = ys[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
                continue;
            }
            let mean_x = swx / sw;
            let mean_y = swy / sw;
            let var_x = swxx / sw - mean_x * mean_x;
            let cov_xy = swxy / sw - mean_x * mean_y;
            fitted[i] = if var_x > 1e-12 * (xs[hi] - xs[lo]).powi(2) {
                mean_y + cov_xy / var_x * (xs[i] - mean_x)
            } else {
                mean_y
            };
        }
        if round == iterations {
            break;
        }
        let mut abs_res: Vec<f64> = ys.iter().zip(&fitted).map(|(y, f)| (y - f).abs()).collect();
        abs_res.sort_by(|a, b| a.partial_cmp(b).expect("finite residuals"));
        let s = median_of_sorted(&abs_res);
        if s == 0.0 {
            break;
        }
        for (rob, (y, f)) in robustness.iter_mut().zip(ys.iter().zip(&fitted)) {
            *rob = bisquare((y - f) / (6.0 * s));
        }
    }
    Ok(fitted)
}

/// Indices [lo, hi] of the `r` points nearest to `xs[i]`, grown greedily
/// one side at a time.
fn nearest_window(xs: &[f64], i: usize, r: usize) -> (usize, usize) {
    let mut lo = i;
    let mut hi = i;
    while hi - lo + 1 < r {
        if lo == 0 {
            hi += 1;
        } else if hi == xs.len() - 1 || xs[i] - xs[lo - 1] <= xs[hi + 1] - xs[i] {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    (lo, hi)
}

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u * u;
        t * t * t
    }
}

fn bisquare(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let t = 1.0 - u * u;
        t * t
    }
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
