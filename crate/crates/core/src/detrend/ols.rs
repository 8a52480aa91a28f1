use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regression design: named columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
    has_intercept: bool,
}

impl Design {
    /// Design holding only the intercept column.
    pub fn intercept(rows: usize) -> Self {
        Design {
            labels: vec!["intercept".into()],
            columns: vec![vec![1.0; rows]],
            has_intercept: true,
        }
    }

    /// Design without an intercept.
    pub fn empty() -> Self {
        Design {
            labels: Vec::new(),
            columns: Vec::new(),
            has_intercept: false,
        }
    }

    pub fn with_column(mut self, label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if let Some(first) = self.columns.first() {
            if first.len() != values.len() {
                return Err(Error::input(format!(
                    "column length {} does not match {}",
                    values.len(),
                    first.len()
                )));
            }
        }
        self.labels.push(label.into());
        self.columns.push(values);
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn has_intercept(&self) -> bool {
        self.has_intercept
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows(), self.cols(), |i, j| self.columns[j][i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// One per design column, in design order (intercept first when present).
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub design_labels: Vec<String>,
}

/// Least squares by Householder QR on column-equilibrated data.
pub fn ols_fit(y: &[f64], design: &Design) -> Result<OlsFit> {
    let (n, k) = (design.rows(), design.cols());
    if k == 0 {
        return Err(Error::input("design has no columns"));
    }
    if n != y.len() {
        return Err(Error::input(format!(
            "design has {n} rows but response has {} values",
            y.len()
        )));
    }
    if n <= k {
        return Err(Error::input(format!(
            "need more rows than columns, got {n} rows for {k} columns"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite response value"));
    }

    // Equilibrate columns so the rank test is scale-free (years vs intercept).
    let mut x = design.to_matrix();
    let mut scales = Vec::with_capacity(k);
    for j in 0..k {
        let norm = x.column(j).norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::SingularDesign(format!(
                "column {} is zero or non-finite",
                design.labels()[j]
            )));
        }
        x.column_mut(j).scale_mut(1.0 / norm);
        scales.push(norm);
    }

    let qr = x.qr();
    let r = qr.r();
    let max_diag = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    for j in 0..k {
        if r[(j, j)].abs() <= 1e-10 * max_diag {
            return Err(Error::SingularDesign(format!(
                "column {} is (nearly) collinear with earlier columns",
                design.labels()[j]
            )));
        }
    }

    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let head = qty.rows(0, k).into_owned();
    let b = r
        .solve_upper_triangular(&head)
        .ok_or_else(|| Error::SingularDesign("triangular solve failed".into()))?;

    let coefficients: Vec<f64> = b.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let residuals: Vec<f64> = (0..n)
        .map(|i| {
            let fitted: f64 = (0..k).map(|j| design.column(j)[i] * coefficients[j]).sum();
            y[i] - fitted
        })
        .collect();

    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let sst: f64 = if design.has_intercept() {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean).powi(2)).sum()
    } else {
        y.iter().map(|v| v * v).sum()
    };
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(OlsFit {
        coefficients,
        residuals,
        r_squared,
        design_labels: design.labels().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_affine_fit() {
        let t: Vec<f64> = (1900..1950).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|v| 3.0 - 0.25 * v).collect();
        let d = Design::intercept(t.len()).with_column("year", t).unwrap();
        let fit = ols_fit(&y, &d).unwrap();
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-10));
        assert!((fit.coefficients[1] + 0.25).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn intercept_only_demeans() {
        let y = [1.0, 4.0, -2.0, 5.0, 7.0];
        let fit = ols_fit(&y, &Design::intercept(5)).unwrap();
        let mean = y.iter().sum::<f64>() / 5.0;
        for (r, v) in fit.residuals.iter().zip(y) {
            assert!((r - (v - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_and_short_designs() {
        let t: Vec<f64> = (0..10).map(f64::from).collect();
        let twice: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
        let d = Design::intercept(10)
            .with_column("t", t.clone())
            .unwrap()
            .with_column("2t", twice)
            .unwrap();
        assert!(matches!(ols_fit(&t, &d), Err(Error::SingularDesign(_))));

        let d = Design::intercept(2)
            .with_column("t", vec![0.0, 1.0])
            .unwrap();
        assert!(matches!(ols_fit(&[1.0, 2.0], &d), Err(Error::Input(_))));
        assert!(Design::intercept(3).with_column("x", vec![1.0]).is_err());
    }
}
