//! Regression with ARIMA errors by exact maximum likelihood.
//!
//! The model is `y_t = x_t' beta + u_t` where `u_t` differenced `d` times is a
//! stationary, invertible ARMA(p, q). Response and regressors are differenced
//! together, the regression coefficients and the innovation variance are
//! profiled out of the likelihood (GLS on the filtered innovations), and the
//! remaining ARMA parameters are optimised in the unconstrained
//! partial-autocorrelation coordinates.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::arma::{
    difference, filter_columns, is_invertible, is_stationary, pacf_to_ar, unconstrained_to_ma,
    ArimaOrder, ArmaStateSpace,
};
use super::optim::{bfgs, hessian, nelder_mead, OptimOptions, OptimResult};
use crate::error::{Error, Result};

/// Named exogenous regressors, one column per covariate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Regressors {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Regressors {
    pub fn empty() -> Self {
        Regressors::default()
    }

    pub fn with(mut self, label: impl Into<String>, values: Vec<f64>) -> Self {
        self.labels.push(label.into());
        self.columns.push(values);
        self
    }

    pub fn single(label: impl Into<String>, values: Vec<f64>) -> Self {
        Regressors::empty().with(label, values)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Add a constant when `d == 0`.
    pub include_mean: bool,
    /// Add a constant to the differenced model when `d >= 1`.
    pub include_drift: bool,
    /// Randomised restarts allowed after a non-converged first attempt.
    pub max_restarts: usize,
    pub seed: u64,
    pub optim: OptimOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            include_mean: true,
            include_drift: false,
            max_restarts: 5,
            seed: 0x5eed,
            optim: OptimOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdErrorSource {
    /// Inverse of the numerically differentiated observed information.
    Hessian,
    /// GLS covariance conditional on the ARMA parameters; used when the
    /// Hessian is not positive definite.
    Gls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    /// Regression coefficients; a leading `intercept` or `drift` entry when
    /// a constant is included.
    pub beta: Vec<f64>,
    pub beta_labels: Vec<String>,
    pub se_beta: Vec<f64>,
    pub se_source: StdErrorSource,
    pub sigma2: f64,
    pub loglik: f64,
    pub aicc: f64,
    pub n_effective: usize,
    pub has_constant: bool,
    pub converged: bool,
}

impl ArimaFit {
    /// Parameter count used for AICc: ARMA terms, regressors, constant and
    /// the innovation variance.
    pub fn n_params(&self) -> usize {
        self.order.p + self.order.q + self.beta.len() + 1
    }
}

/// Small-sample corrected AIC. Infinite when `n <= k + 1`.
pub fn aicc(loglik: f64, k: usize, n: usize) -> f64 {
    let (k, n) = (k as f64, n as f64);
    if n - k - 1.0 <= 0.0 {
        return f64::INFINITY;
    }
    -2.0 * loglik + 2.0 * k + 2.0 * k * (k + 1.0) / (n - k - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefTest {
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub p_two_sided: f64,
}

/// Two-sided Gaussian P-value for `z`.
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

impl CoefTest {
    pub fn new(estimate: f64, se: f64) -> Result<Self> {
        if !(se > 0.0 && se.is_finite()) {
            return Err(Error::input(format!(
                "standard error must be positive, got {se}"
            )));
        }
        let z = estimate / se;
        Ok(CoefTest {
            estimate,
            se,
            z,
            p_two_sided: normal_two_sided(z),
        })
    }
}

/// Wald z-test of one regression coefficient.
pub fn coef_test(fit: &ArimaFit, which: &str) -> Result<CoefTest> {
    let i = fit
        .beta_labels
        .iter()
        .position(|l| l == which)
        .ok_or_else(|| Error::input(format!("no coefficient named {which:?}")))?;
    CoefTest::new(fit.beta[i], fit.se_beta[i])
}

/// Differenced data and design shared by every likelihood evaluation.
struct Problem {
    order: ArimaOrder,
    w: Vec<f64>,
    x: Vec<Vec<f64>>,
    labels: Vec<String>,
    has_constant: bool,
}

struct Profile {
    loglik: f64,
    beta: Vec<f64>,
    sigma2: f64,
    /// GLS `(X~' X~)^{-1}`, unscaled.
    xtx_inv: Option<DMatrix<f64>>,
}

impl Problem {
    fn n(&self) -> usize {
        self.w.len()
    }

    fn arma(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.order.p;
        (pacf_to_ar(&u[..p]), unconstrained_to_ma(&u[p..]))
    }

    fn filtered(&self, u: &[f64]) -> Result<(Vec<Vec<f64>>, f64)> {
        let (ar, ma) = self.arma(u);
        let model = ArmaStateSpace::new(&ar, &ma)?;
        let mut cols: Vec<&[f64]> = vec![&self.w];
        cols.extend(self.x.iter().map(Vec::as_slice));
        let inn = filter_columns(&model, &cols)?;
        Ok((inn.standardized, inn.log_det))
    }

    fn concentrated(&self, ssq: f64, log_det: f64) -> f64 {
        let n = self.n() as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI * ssq / n).ln() + 1.0) - 0.5 * log_det
    }

    /// Log-likelihood with `beta` and `sigma2` profiled out.
    fn profile(&self, u: &[f64]) -> Result<Profile> {
        let (cols, log_det) = self.filtered(u)?;
        let n = self.n();
        let k = self.x.len();
        if k == 0 {
            let ssq: f64 = cols[0].iter().map(|e| e * e).sum();
            return Ok(Profile {
                loglik: self.concentrated(ssq, log_det),
                beta: Vec::new(),
                sigma2: ssq / n as f64,
                xtx_inv: None,
            });
        }
        let xm = DMatrix::from_fn(n, k, |i, j| cols[j + 1][i]);
        let yv = DVector::from_column_slice(&cols[0]);
        let qr = xm.clone().qr();
        let r = qr.r();
        let mut qty = yv.clone();
        qr.q_tr_mul(&mut qty);
        let beta = r
            .solve_upper_triangular(&qty.rows(0, k).into_owned())
            .ok_or_else(|| Error::input("singular regressors after filtering"))?;
        let resid = &yv - &xm * &beta;
        let ssq = resid.norm_squared();
        let rinv = r
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::input("singular regressors after filtering"))?;
        let xtx_inv = &rinv * rinv.transpose();
        Ok(Profile {
            loglik: self.concentrated(ssq, log_det),
            beta: beta.iter().copied().collect(),
            sigma2: ssq / n as f64,
            xtx_inv: Some(xtx_inv),
        })
    }

    /// Log-likelihood at `(u, beta)` with only `sigma2` profiled out.
    fn loglik_at(&self, u: &[f64], beta: &[f64]) -> Result<f64> {
        let (cols, log_det) = self.filtered(u)?;
        let ssq: f64 = (0..self.n())
            .map(|t| {
                let fit: f64 = beta
                    .iter()
                    .enumerate()
                    .map(|(j, b)| b * cols[j + 1][t])
                    .sum();
                (cols[0][t] - fit).powi(2)
            })
            .sum();
        Ok(self.concentrated(ssq, log_det))
    }
}

fn build_problem(
    y: &[f64],
    order: ArimaOrder,
    xreg: &Regressors,
    opts: &FitOptions,
) -> Result<Problem> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite response value"));
    }
    for (label, col) in xreg.labels().iter().zip(xreg.columns()) {
        if col.len() != y.len() {
            return Err(Error::input(format!(
                "regressor {label} has {} rows, response has {}",
                col.len(),
                y.len()
            )));
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "regressor {label} has non-finite values"
            )));
        }
    }
    let w = difference(y, order.d)?;
    let n = w.len();
    let needed = order.p + order.q + xreg.len() + 2;
    if n <= needed {
        return Err(Error::input(format!(
            "{n} observations after differencing; order {order} with {} regressors needs more than {needed}",
            xreg.len()
        )));
    }

    let mut labels = Vec::new();
    let mut x = Vec::new();
    let has_constant = if order.d == 0 {
        opts.include_mean
    } else {
        opts.include_drift
    };
    if has_constant {
        labels.push(if order.d == 0 { "intercept" } else { "drift" }.to_string());
        x.push(vec![1.0; n]);
    }
    for (label, col) in xreg.labels().iter().zip(xreg.columns()) {
        labels.push(label.clone());
        x.push(difference(col, order.d)?);
    }

    if !x.is_empty() {
        check_full_rank(&x, &labels)?;
    }
    Ok(Problem {
        order,
        w,
        x,
        labels,
        has_constant,
    })
}

fn check_full_rank(x: &[Vec<f64>], labels: &[String]) -> Result<()> {
    let n = x[0].len();
    let mut m = DMatrix::from_fn(n, x.len(), |i, j| x[j][i]);
    for (j, label) in labels.iter().enumerate().take(x.len()) {
        let norm = m.column(j).norm();
        if !(norm > 0.0) {
            return Err(Error::input(format!(
                "singular regressors: {label} is identically zero after differencing"
            )));
        }
        m.column_mut(j).scale_mut(1.0 / norm);
    }
    let r = m.qr().r();
    let max = (0..x.len()).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if let Some(j) = (0..x.len()).find(|&j| r[(j, j)].abs() <= 1e-10 * max) {
        return Err(Error::input(format!(
            "singular regressors: {} is collinear with earlier columns",
            labels[j]
        )));
    }
    Ok(())
}

/// Fits regression with ARIMA(p, d, q) errors using default options.
pub fn fit_arima(y: &[f64], order: ArimaOrder, xreg: &Regressors) -> Result<ArimaFit> {
    fit_arima_with(y, order, xreg, &FitOptions::default())
}

pub fn fit_arima_with(
    y: &[f64],
    order: ArimaOrder,
    xreg: &Regressors,
    opts: &FitOptions,
) -> Result<ArimaFit> {
    let problem = build_problem(y, order, xreg, opts)?;
    let dim = order.p + order.q;

    let mut objective = |u: &[f64]| match problem.profile(u) {
        Ok(p) if p.loglik.is_finite() => -p.loglik,
        _ => f64::INFINITY,
    };

    let (best, converged) = if dim == 0 {
        let fx = objective(&[]);
        (
            OptimResult {
                x: Vec::new(),
                fx,
                converged: fx.is_finite(),
                iterations: 0,
            },
            fx.is_finite(),
        )
    } else {
        optimise(&mut objective, dim, opts)
    };

    if !best.fx.is_finite() {
        return Err(Error::Estimation {
            message: format!("likelihood could not be evaluated for order {order}"),
            best_loglik: None,
        });
    }
    if !converged {
        return Err(Error::Estimation {
            message: format!(
                "optimiser did not converge for order {order} after {} restarts",
                opts.max_restarts
            ),
            best_loglik: Some(-best.fx),
        });
    }

    let u = best.x;
    let profile = problem.profile(&u)?;
    let (ar, ma) = problem.arma(&u);
    debug_assert!(is_stationary(&ar) && is_invertible(&ma));

    let (se_beta, se_source) = standard_errors(&problem, &u, &profile);
    let n = problem.n();
    let k = dim + problem.x.len() + 1;

    Ok(ArimaFit {
        order,
        ar,
        ma,
        beta: profile.beta,
        beta_labels: problem.labels.clone(),
        se_beta,
        se_source,
        sigma2: profile.sigma2,
        loglik: profile.loglik,
        aicc: aicc(profile.loglik, k, n),
        n_effective: n,
        has_constant: problem.has_constant,
        converged,
    })
}

/// BFGS from the origin, a second start for mixed models, then randomised
/// restarts while nothing has converged.
fn optimise(
    f: &mut dyn FnMut(&[f64]) -> f64,
    dim: usize,
    opts: &FitOptions,
) -> (OptimResult, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = bfgs(f, &vec![0.0; dim], &opts.optim);
    let mut any_converged = best.converged;

    let consider = |best: &mut OptimResult, any: &mut bool, r: OptimResult| {
        if r.converged {
            *any = true;
        }
        let better = r.fx < best.fx - 1e-10;
        let rescues = r.converged && !best.converged && r.fx <= best.fx + 1e-6;
        if better || rescues {
            let converged = r.converged || (best.converged && (r.fx - best.fx).abs() < 1e-6);
            *best = OptimResult { converged, ..r };
        }
    };

    if dim >= 2 {
        let start: Vec<f64> = (0..dim)
            .map(|i| if i % 2 == 0 { 0.5 } else { -0.3 })
            .collect();
        let r = bfgs(f, &start, &opts.optim);
        consider(&mut best, &mut any_converged, r);
    }

    let mut restarts = 0;
    while !best.converged && restarts < opts.max_restarts {
        restarts += 1;
        let start: Vec<f64> = best
            .x
            .iter()
            .map(|x| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (0.5 * x + 0.7 * z).clamp(-3.0, 3.0)
            })
            .collect();
        let nm = nelder_mead(f, &start, &opts.optim);
        let polished = bfgs(f, &nm.x, &opts.optim);
        let r = if polished.fx <= nm.fx { polished } else { nm };
        consider(&mut best, &mut any_converged, r);
    }
    let converged = best.converged;
    (best, converged)
}

fn standard_errors(problem: &Problem, u: &[f64], profile: &Profile) -> (Vec<f64>, StdErrorSource) {
    let k = problem.x.len();
    if k == 0 {
        return (Vec::new(), StdErrorSource::Hessian);
    }
    let gls: Vec<f64> = match &profile.xtx_inv {
        Some(inv) => (0..k)
            .map(|j| (profile.sigma2 * inv[(j, j)]).max(0.0).sqrt())
            .collect(),
        None => vec![f64::NAN; k],
    };

    let dim = u.len();
    let mut x0: Vec<f64> = u.to_vec();
    x0.extend_from_slice(&profile.beta);
    let mut steps = vec![1e-4; dim];
    steps.extend(gls.iter().map(|s| {
        if s.is_finite() && *s > 0.0 {
            0.05 * s
        } else {
            1e-4
        }
    }));
    let mut negll = |theta: &[f64]| match problem.loglik_at(&theta[..dim], &theta[dim..]) {
        Ok(v) if v.is_finite() => -v,
        _ => f64::NAN,
    };
    let h = hessian(&mut negll, &x0, &steps);
    let m = dim + k;
    let hm = DMatrix::from_fn(m, m, |i, j| h[i][j]);
    if hm.iter().all(|v| v.is_finite()) {
        if let Some(chol) = hm.cholesky() {
            let inv = chol.inverse();
            let se: Vec<f64> = (dim..m).map(|j| inv[(j, j)].sqrt()).collect();
            if se.iter().all(|s| s.is_finite() && *s > 0.0) {
                return (se, StdErrorSource::Hessian);
            }
        }
    }
    (gls, StdErrorSource::Gls)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coef_test_identities() {
        let t = CoefTest::new(0.0, 0.7).unwrap();
        assert_eq!(t.p_two_sided, 1.0);
        let t = CoefTest::new(1.959963984540054 * 0.3, 0.3).unwrap();
        assert!((t.p_two_sided - 0.05).abs() < 1e-9, "{}", t.p_two_sided);
        assert!(CoefTest::new(1.0, 0.0).is_err());
    }

    #[test]
    fn aicc_formula() {
        assert!((aicc(-10.0, 2, 20) - (20.0 + 4.0 + 12.0 / 17.0)).abs() < 1e-12);
        assert!(aicc(-10.0, 5, 6).is_infinite());
    }

    #[test]
    fn rejects_short_and_singular_inputs() {
        let y: Vec<f64> = (0..6).map(f64::from).collect();
        let order = ArimaOrder::new(2, 0, 2).unwrap();
        assert!(fit_arima(&y, order, &Regressors::empty()).is_err());

        let y: Vec<f64> = (0..40).map(|t| f64::from(t % 7)).collect();
        let x = Regressors::single("const", vec![1.0; 40]);
        let r = fit_arima(&y, ArimaOrder::new(0, 0, 0).unwrap(), &x);
        assert!(matches!(r, Err(Error::Input(_))));
        let x = Regressors::single("short", vec![1.0; 10]);
        assert!(fit_arima(&y, ArimaOrder::new(0, 0, 0).unwrap(), &x).is_err());
    }

    #[test]
    fn unknown_coefficient_label() {
        let y: Vec<f64> = (0..30).map(|t| f64::from((t * 7) % 11)).collect();
        let fit = fit_arima(&y, ArimaOrder::new(0, 0, 0).unwrap(), &Regressors::empty()).unwrap();
        assert!(coef_test(&fit, "tightness").is_err());
        assert!(coef_test(&fit, "intercept").is_ok());
    }
}
