//! LOWESS on an equally spaced series: tricube-weighted local linear fits
//! over the ceil(frac * n) nearest points, then one bisquare robustness pass.

use crate::error::{Error, Result};

fn tricube(u: f64) -> f64 {
    if u < 1.0 {
        let t = 1.0 - u * u * u;
        t * t * t
    } else {
        0.0
    }
}

fn bisquare(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let t = 1.0 - u * u;
        t * t
    } else {
        0.0
    }
}

/// Weighted linear fit over `lo..hi`, evaluated at `i`.
fn local_fit(y: &[f64], i: usize, lo: usize, hi: usize, h: f64, robust: Option<&[f64]>) -> Option<f64> {
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    let mut w = Vec::with_capacity(hi - lo);
    for j in lo..hi {
        let d = (j as f64 - i as f64).abs();
        let mut wj = if h > 0.0 { tricube(d / h) } else { 1.0 };
        if let Some(r) = robust {
            wj *= r[j];
        }
        w.push(wj);
        sw += wj;
        sx += wj * j as f64;
        sy += wj * y[j];
    }
    if sw <= 0.0 {
        return None;
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (k, j) in (lo..hi).enumerate() {
        let dx = j as f64 - mx;
        sxx += w[k] * dx * dx;
        sxy += w[k] * dx * (y[j] - my);
    }
    if sxx <= 1e-12 * sw {
        return Some(my);
    }
    Some(my + sxy / sxx * (i as f64 - mx))
}

fn pass(y: &[f64], k: usize, robust: Option<&[f64]>) -> Vec<Option<f64>> {
    let n = y.len();
    let mut lo = 0usize;
    (0..n)
        .map(|i| {
            // Slide the k-point window right while that brings it closer to i.
            while lo + k < n && (lo + k) as f64 - (i as f64) < i as f64 - lo as f64 {
                lo += 1;
            }
            let h = (i - lo).max(lo + k - 1 - i) as f64; // window always contains i
            local_fit(y, i, lo, lo + k, h, robust)
        })
        .collect()
}

pub fn smooth_trend(series: &[f64], frac: f64) -> Result<Vec<f64>> {
    if series.len() < 3 {
        return Err(Error::Domain(format!("LOWESS needs at least 3 points, got {}", series.len())));
    }
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::Domain(format!("LOWESS frac {frac} outside (0, 1]")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("LOWESS input contains a non-finite value".into()));
    }
    let n = series.len();
    let k = ((frac * n as f64).ceil() as usize).clamp(2, n);
    let first: Vec<f64> = pass(series, k, None).into_iter().map(|v| v.expect("tricube weights are positive inside the window")).collect();

    let mut abs_res: Vec<f64> = series.iter().zip(&first).map(|(y, f)| (y - f).abs()).collect();
    abs_res.sort_by(f64::total_cmp);
    let s = if n % 2 == 1 { abs_res[n / 2] } else { 0.5 * (abs_res[n / 2 - 1] + abs_res[n / 2]) };
    let robust: Vec<f64> = if s > 0.0 {
        series.iter().zip(&first).map(|(y, f)| bisquare((y - f) / (6.0 * s))).collect()
    } else {
        vec![1.0; n]
    };
    Ok(pass(series, k, Some(&robust)).into_iter().zip(first).map(|(r, f)| r.unwrap_or(f)).collect())
}
