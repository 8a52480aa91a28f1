use crate::error::{Error, Result};
use crate::series::{Source, TimeSeries};

/// Span used when none is given on the command line.
pub const DEFAULT_SPAN: f64 = 0.3;

fn tricube(u: f64) -> f64 {
    if u >= 1.0 {
        0.0
    } else {
        let c = 1.0 - u * u * u;
        c * c * c
    }
}

/// Local linear smoother with tricube weights, evaluated at every observed
/// year.
///
/// Each local window holds the `floor(span * n)` nearest years. The bandwidth
/// is the distance to the farthest of them, widened by a relative `1e-6` so
/// that every point in the window carries positive weight. No robustness
/// iterations.
pub fn loess_smooth(s: &TimeSeries, span: f64) -> Result<TimeSeries> {
    let n = s.len();
    if n < 5 {
        return Err(Error::input(format!(
            "loess needs at least 5 points, got {n}"
        )));
    }
    if !(span > 0.0 && span <= 1.0) {
        return Err(Error::input(format!("span must lie in (0, 1], got {span}")));
    }
    let window = (span * n as f64).floor() as usize;
    if window < 3 {
        return Err(Error::input(format!(
            "span {span} leaves {window} points per window, need at least 3"
        )));
    }

    let x: Vec<f64> = s.years().iter().map(|&y| f64::from(y)).collect();
    let y = s.values();
    let mut dist = vec![0.0; n];
    let mut smoothed = Vec::with_capacity(n);
    for &x0 in &x {
        for (d, &xi) in dist.iter_mut().zip(&x) {
            *d = (xi - x0).abs();
        }
        let mut sorted = dist.clone();
        sorted.select_nth_unstable_by(window - 1, f64::total_cmp);
        let h = sorted[window - 1] * (1.0 + 1e-6);

        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        let weights: Vec<f64> = dist.iter().map(|&d| tricube(d / h)).collect();
        for i in 0..n {
            sw += weights[i];
            sx += weights[i] * x[i];
            sy += weights[i] * y[i];
        }
        let (mx, my) = (sx / sw, sy / sw);
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for i in 0..n {
            let dx = x[i] - mx;
            sxx += weights[i] * dx * dx;
            sxy += weights[i] * dx * (y[i] - my);
        }
        let fitted = if sxx > 0.0 {
            my + sxy / sxx * (x0 - mx)
        } else {
            my
        };
        smoothed.push(fitted);
    }

    TimeSeries::new(
        format!("{}_loess", s.id()),
        s.years().to_vec(),
        smoothed,
        Source::Derived {
            from: s.id().to_string(),
            note: format!("loess span {span}"),
        },
    )
}
