//! ARMA building blocks: the stationarity-preserving parameter transform,
//! the state-space form and the exact Gaussian likelihood by Kalman
//! filtering.
//!
//! Sign conventions: the AR polynomial is `1 - phi_1 B - ... - phi_p B^p` and
//! the MA polynomial is `1 + theta_1 B + ... + theta_q B^q`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Search bounds on the ARIMA orders.
pub const MAX_P: usize = 5;
pub const MAX_Q: usize = 5;
pub const MAX_D: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if p > MAX_P || q > MAX_Q || d > MAX_D {
            return Err(Error::input(format!(
                "order ({p},{d},{q}) outside bounds p<={MAX_P}, d<={MAX_D}, q<={MAX_Q}"
            )));
        }
        Ok(ArimaOrder { p, d, q })
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

/// `d`-fold first differences.
pub fn difference(s: &[f64], d: usize) -> Result<Vec<f64>> {
    if s.len() <= d {
        return Err(Error::input(format!(
            "cannot difference {} values {d} times",
            s.len()
        )));
    }
    let mut out = s.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Largest magnitude a partial autocorrelation may take after transform.
const PACF_LIMIT: f64 = 1.0 - 1e-9;

/// Maps unconstrained reals to coefficients of a stationary AR polynomial:
/// `tanh` onto partial autocorrelations, then Durbin-Levinson.
pub fn pacf_to_ar(unconstrained: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = unconstrained
        .iter()
        .map(|u| u.tanh().clamp(-PACF_LIMIT, PACF_LIMIT))
        .collect();
    partials_to_coefficients(&pacf)
}

/// Durbin-Levinson recursion from partial autocorrelations to AR
/// coefficients.
pub fn partials_to_coefficients(pacf: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &r) in pacf.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    phi
}

/// Inverse Durbin-Levinson. Returns `None` when the polynomial is not
/// stationary (some partial autocorrelation has magnitude >= 1).
pub fn coefficients_to_partials(ar: &[f64]) -> Option<Vec<f64>> {
    let mut phi = ar.to_vec();
    let mut pacf = vec![0.0; ar.len()];
    for k in (0..ar.len()).rev() {
        let r = phi[k];
        if !(r.abs() < 1.0) {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = (prev[j] + r * prev[k - 1 - j]) / denom;
        }
        phi.truncate(k);
    }
    Some(pacf)
}

/// Inverse of [`pacf_to_ar`].
pub fn ar_to_unconstrained(ar: &[f64]) -> Option<Vec<f64>> {
    coefficients_to_partials(ar).map(|p| p.into_iter().map(f64::atanh).collect())
}

/// True when all roots of `1 - sum a_j z^j` lie strictly outside the unit
/// circle.
pub fn is_stationary(ar: &[f64]) -> bool {
    coefficients_to_partials(ar).is_some()
}

/// True when all roots of `1 + sum b_j z^j` lie strictly outside the unit
/// circle.
pub fn is_invertible(ma: &[f64]) -> bool {
    let neg: Vec<f64> = ma.iter().map(|b| -b).collect();
    is_stationary(&neg)
}

/// Smallest root modulus of `1 - sum a_j z^j`; infinite for a constant
/// polynomial. Use `-theta` for an MA polynomial.
pub fn min_root_modulus(a: &[f64]) -> f64 {
    let degree = a.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    if degree == 0 {
        return f64::INFINITY;
    }
    // Companion eigenvalues are the reciprocal roots.
    let companion = DMatrix::from_fn(degree, degree, |i, j| {
        if i == 0 {
            a[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let largest = companion
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max);
    1.0 / largest
}

/// Unconstrained reals to invertible MA coefficients.
pub fn unconstrained_to_ma(u: &[f64]) -> Vec<f64> {
    pacf_to_ar(u).into_iter().map(|a| -a).collect()
}

pub fn ma_to_unconstrained(ma: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<f64> = ma.iter().map(|b| -b).collect();
    ar_to_unconstrained(&neg)
}

/// Harvey's state-space form of a stationary ARMA(p, q) with unit
/// innovation variance.
#[derive(Debug, Clone)]
pub struct ArmaStateSpace {
    dim: usize,
    /// First column of the transition matrix (the AR coefficients, padded).
    phi: Vec<f64>,
    /// Disturbance loading `(1, theta_1, ..., theta_{r-1})`.
    loading: Vec<f64>,
    /// Stationary state covariance, row-major.
    p0: Vec<f64>,
}

impl ArmaStateSpace {
    pub fn new(ar: &[f64], ma: &[f64]) -> Result<Self> {
        if !is_stationary(ar) {
            return Err(Error::input("AR polynomial is not stationary"));
        }
        let dim = ar.len().max(ma.len() + 1);
        let mut phi = vec![0.0; dim];
        phi[..ar.len()].copy_from_slice(ar);
        let mut loading = vec![0.0; dim];
        loading[0] = 1.0;
        loading[1..=ma.len()].copy_from_slice(ma);
        let p0 = stationary_covariance(&phi, &loading)?;
        Ok(ArmaStateSpace {
            dim,
            phi,
            loading,
            p0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Applies `T` to a state vector in place.
    fn transition(&self, a: &mut [f64]) {
        let r = self.dim;
        let head = a[0];
        for i in 0..r {
            let next = if i + 1 < r { a[i + 1] } else { 0.0 };
            a[i] = self.phi[i] * head + next;
        }
    }

    /// `P <- T P T' + R R'`.
    fn propagate(&self, p: &mut [f64], scratch: &mut [f64]) {
        let r = self.dim;
        // scratch = T P
        for j in 0..r {
            let head = p[j];
            for i in 0..r {
                let next = if i + 1 < r { p[(i + 1) * r + j] } else { 0.0 };
                scratch[i * r + j] = self.phi[i] * head + next;
            }
        }
        // p = scratch T'  (row i of scratch times T')
        for i in 0..r {
            let head = scratch[i * r];
            for j in 0..r {
                let next = if j + 1 < r {
                    scratch[i * r + j + 1]
                } else {
                    0.0
                };
                p[i * r + j] = self.phi[j] * head + next + self.loading[i] * self.loading[j];
            }
        }
    }
}

/// Solves `P = T P T' + R R'` through the vectorised linear system.
fn stationary_covariance(phi: &[f64], loading: &[f64]) -> Result<Vec<f64>> {
    let r = phi.len();
    let t = DMatrix::from_fn(r, r, |i, j| {
        if j == 0 {
            phi[i]
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    });
    let kron = t.kronecker(&t);
    let system = DMatrix::identity(r * r, r * r) - kron;
    // Column-major vec of R R'.
    let rhs = DVector::from_fn(r * r, |k, _| loading[k % r] * loading[k / r]);
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::input("stationary covariance system is singular"))?;
    let mut p0 = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            // Symmetrise against rounding.
            p0[i * r + j] = 0.5 * (sol[j * r + i] + sol[i * r + j]);
        }
    }
    Ok(p0)
}

/// Output of filtering one or more data columns through the same ARMA model.
#[derive(Debug, Clone)]
pub struct Innovations {
    /// Standardised one-step prediction errors `v_t / sqrt(F_t)`, one vector
    /// per input column.
    pub standardized: Vec<Vec<f64>>,
    /// `sum_t ln F_t`.
    pub log_det: f64,
}

/// Runs the Kalman filter over each column. The gains and prediction
/// variances do not depend on the data, so all columns share one pass.
pub fn filter_columns(model: &ArmaStateSpace, columns: &[&[f64]]) -> Result<Innovations> {
    let r = model.dim;
    let n = columns.first().map_or(0, |c| c.len());
    let m = columns.len();
    let mut p = model.p0.clone();
    let mut scratch = vec![0.0; r * r];
    let mut states = vec![vec![0.0; r]; m];
    let mut standardized = vec![Vec::with_capacity(n); m];
    let mut log_det = 0.0;
    let mut gain = vec![0.0; r];

    for t in 0..n {
        let f = p[0];
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::input(format!(
                "non-positive prediction variance at step {t}"
            )));
        }
        log_det += f.ln();
        let sf = f.sqrt();
        for i in 0..r {
            gain[i] = p[i * r] / f;
        }
        for (k, col) in columns.iter().enumerate() {
            let a = &mut states[k];
            let v = col[t] - a[0];
            standardized[k].push(v / sf);
            for i in 0..r {
                a[i] += gain[i] * v;
            }
            model.transition(a);
        }
        // P <- P - P[:,0] P[0,:] / F
        let row0: Vec<f64> = (0..r).map(|j| p[j]).collect();
        for i in 0..r {
            let pi0 = p[i * r];
            for j in 0..r {
                p[i * r + j] -= pi0 * row0[j] / f;
            }
        }
        model.propagate(&mut p, &mut scratch);
    }

    Ok(Innovations {
        standardized,
        log_det,
    })
}

/// Exact Gaussian log-likelihood of a zero-mean ARMA series with innovation
/// variance `sigma2`.
pub fn arma_loglik(w: &[f64], ar: &[f64], ma: &[f64], sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::input("sigma2 must be positive"));
    }
    let model = ArmaStateSpace::new(ar, ma)?;
    let inn = filter_columns(&model, &[w])?;
    let n = w.len() as f64;
    let ssq: f64 = inn.standardized[0].iter().map(|e| e * e).sum();
    Ok(-0.5 * (n * (2.0 * std::f64::consts::PI * sigma2).ln() + inn.log_det + ssq / sigma2))
}
