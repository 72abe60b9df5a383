//! Single-response PLS regression and an OLS fitter.
//!
//! [`fit_simpls`] is the fast path used throughout the search: SIMPLS with
//! modified Gram-Schmidt orthogonalization of the loading basis, producing
//! the whole coefficient path for 1..=A components in one pass.
//! [`fit_pls_oracle`] is a slower orthogonal-scores (NIPALS-style)
//! implementation kept as an independent cross-check.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative weight-norm threshold below which the component iteration is
/// considered degenerate and the path is truncated.
const STABILITY_EPS: f64 = 1e-12;

/// Which PLS implementation to fit with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlsFitter {
    /// SIMPLS with MGS orthogonalization; optional second orthogonalization
    /// pass (off by default, it roughly doubles the per-component cost).
    Simpls { reorthogonalize: bool },
    /// Orthogonal-scores reference implementation.
    Nipals,
}

impl PlsFitter {
    pub fn fit(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, a_max: usize) -> Result<PlsModel> {
        match *self {
            PlsFitter::Simpls { reorthogonalize } => fit_simpls(x, y, a_max, reorthogonalize),
            PlsFitter::Nipals => fit_pls_oracle(x, y, a_max),
        }
    }
}

/// A centered PLS fit holding regression coefficients for every component
/// count 1..=a_max.
#[derive(Debug, Clone)]
pub struct PlsModel {
    x_means: Array1<f64>,
    y_mean: f64,
    /// q × a_max; column a-1 holds the coefficients of the a-component model
    /// on centered data.
    coef_path: Array2<f64>,
    a_max: usize,
    requested_a_max: usize,
}

impl PlsModel {
    /// Number of components actually fitted.
    pub fn a_max(&self) -> usize {
        self.a_max
    }

    /// True when the iteration became numerically degenerate before
    /// reaching the requested component count.
    pub fn truncated(&self) -> bool {
        self.a_max < self.requested_a_max
    }

    /// Coefficients of the `a`-component model on centered predictors.
    pub fn coefficients(&self, a: usize) -> Result<ArrayView1<'_, f64>> {
        if a < 1 || a > self.a_max {
            return Err(Error::InvalidComponents {
                a,
                a_max: self.a_max,
            });
        }
        Ok(self.coef_path.column(a - 1))
    }

    /// Intercept of the `a`-component model for predictions on raw
    /// (uncentered) predictors.
    pub fn intercept(&self, a: usize) -> Result<f64> {
        let coef = self.coefficients(a)?;
        Ok(self.y_mean - self.x_means.dot(&coef))
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    /// Predict the response for new rows with the `a`-component model.
    pub fn predict(&self, x_new: ArrayView2<f64>, a: usize) -> Result<Array1<f64>> {
        let coef = self.coefficients(a)?;
        if x_new.ncols() != self.x_means.len() {
            return Err(Error::ShapeMismatch(format!(
                "prediction rows have {} columns, model has {}",
                x_new.ncols(),
                self.x_means.len()
            )));
        }
        let mut out = Array1::zeros(x_new.nrows());
        for (i, row) in x_new.outer_iter().enumerate() {
            let mut acc = self.y_mean;
            for j in 0..row.len() {
                acc += (row[j] - self.x_means[j]) * coef[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }
}

/// An ordinary least squares fit with intercept.
#[derive(Debug, Clone)]
pub struct OlsModel {
    /// Intercept first, then one coefficient per column.
    pub coefficients: Array1<f64>,
    /// Residual sum of squares of the fit.
    pub rss: f64,
}

impl OlsModel {
    pub fn predict(&self, x_new: ArrayView2<f64>) -> Array1<f64> {
        let mut out = Array1::from_elem(x_new.nrows(), self.coefficients[0]);
        for (i, row) in x_new.outer_iter().enumerate() {
            for j in 0..row.len() {
                out[i] += row[j] * self.coefficients[j + 1];
            }
        }
        out
    }
}

fn check_fit_preconditions(n: usize, q: usize, a_max: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewObservations(n, 2));
    }
    let bound = q.min(n - 1);
    if a_max < 1 || a_max > bound {
        return Err(Error::InvalidComponents { a: a_max, a_max: bound });
    }
    Ok(())
}

fn center(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
) -> (Array2<f64>, Array1<f64>, Array1<f64>, f64) {
    let x_means = x.mean_axis(Axis(0)).expect("n >= 2");
    let y_mean = y.mean().expect("n >= 2");
    let xc = &x - &x_means;
    let yc = y.mapv(|v| v - y_mean);
    (xc, yc, x_means, y_mean)
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Fit a single-response SIMPLS model on mean-centered data, producing the
/// coefficient path for 1..=a_max components.
///
/// The loading basis is kept orthogonal with modified Gram-Schmidt; when a
/// score norm collapses below `STABILITY_EPS` relative to the first
/// component the path is truncated there instead of producing NaNs.
pub fn fit_simpls(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    a_max: usize,
    reorthogonalize: bool,
) -> Result<PlsModel> {
    let (n, q) = x.dim();
    check_fit_preconditions(n, q, a_max)?;
    let (xc, yc, x_means, y_mean) = center(x, y);

    // s is the X'y cross-covariance, deflated after every component.
    let mut s: Array1<f64> = xc.t().dot(&yc);
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(a_max);
    let mut coef_path = Array2::zeros((q, a_max));
    let mut coef = Array1::zeros(q);
    let mut fitted = 0usize;
    let mut first_norm: Option<f64> = None;

    for a in 0..a_max {
        let r = s.clone();
        let t = xc.dot(&r);
        let norm_t = norm(&t);
        match first_norm {
            None => {
                if norm_t == 0.0 || !norm_t.is_finite() {
                    // no covariance at all: intercept-only model
                    coef_path.column_mut(0).fill(0.0);
                    fitted = 1;
                    break;
                }
                first_norm = Some(norm_t);
            }
            Some(f) => {
                if norm_t <= STABILITY_EPS * f {
                    break;
                }
            }
        }
        let t = t / norm_t;
        let r = r / norm_t;
        let q_a = yc.dot(&t);
        let mut v = xc.t().dot(&t);
        for b in &basis {
            let proj = b.dot(&v);
            v.scaled_add(-proj, b);
        }
        if reorthogonalize {
            for b in &basis {
                let proj = b.dot(&v);
                v.scaled_add(-proj, b);
            }
        }
        let norm_v = norm(&v);
        if norm_v <= STABILITY_EPS * first_norm.unwrap_or(1.0) {
            break;
        }
        let v = v / norm_v;
        let proj = v.dot(&s);
        s.scaled_add(-proj, &v);

        coef.scaled_add(q_a, &r);
        coef_path.column_mut(a).assign(&coef);
        basis.push(v);
        fitted = a + 1;
    }

    if fitted == 0 {
        // first component was unstable; keep a zero one-component model
        fitted = 1;
    }
    Ok(PlsModel {
        x_means,
        y_mean,
        coef_path: coef_path.slice_axis(Axis(1), (0..fitted).into()).to_owned(),
        a_max: fitted,
        requested_a_max: a_max,
    })
}

// Solve a small dense system with partial pivoting; used to assemble the
// oracle's coefficient path.
fn solve_small(mut m: Array2<f64>, mut b: Array1<f64>) -> Result<Array1<f64>> {
    let n = m.nrows();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if m[[r, col]].abs() > m[[pivot, col]].abs() {
                pivot = r;
            }
        }
        if m[[pivot, col]].abs() < 1e-300 {
            return Err(Error::SingularDesign);
        }
        if pivot != col {
            for c in 0..n {
                m.swap([pivot, c], [col, c]);
            }
            b.swap(pivot, col);
        }
        for r in col + 1..n {
            let f = m[[r, col]] / m[[col, col]];
            for c in col..n {
                m[[r, c]] -= f * m[[col, c]];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = Array1::zeros(n);
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= m[[r, c]] * x[c];
        }
        x[r] = acc / m[[r, r]];
    }
    Ok(x)
}

/// Orthogonal-scores PLS reference fit.
///
/// Deliberately conservative: the residual matrices are deflated explicitly
/// and each point of the coefficient path is assembled from its own small
/// linear solve. Used in tests and in the verification pass.
pub fn fit_pls_oracle(x: ArrayView2<f64>, y: ArrayView1<f64>, a_max: usize) -> Result<PlsModel> {
    let (n, q) = x.dim();
    check_fit_preconditions(n, q, a_max)?;
    let (xc, yc, x_means, y_mean) = center(x, y);

    let mut e = xc;
    let mut f = yc;
    let mut weights: Vec<Array1<f64>> = Vec::new();
    let mut loadings: Vec<Array1<f64>> = Vec::new();
    let mut y_loadings: Vec<f64> = Vec::new();
    let mut coef_path = Array2::zeros((q, a_max));
    let mut fitted = 0usize;
    let mut first_norm: Option<f64> = None;

    for a in 0..a_max {
        let w = e.t().dot(&f);
        let norm_w = norm(&w);
        match first_norm {
            None => {
                if norm_w == 0.0 || !norm_w.is_finite() {
                    coef_path.column_mut(0).fill(0.0);
                    fitted = 1;
                    break;
                }
                first_norm = Some(norm_w);
            }
            Some(fst) => {
                if norm_w <= STABILITY_EPS * fst {
                    break;
                }
            }
        }
        let w = w / norm_w;
        let t = e.dot(&w);
        let tt = t.dot(&t);
        if tt <= 0.0 || !tt.is_finite() {
            break;
        }
        let p = e.t().dot(&t) / tt;
        let q_a = f.dot(&t) / tt;
        // deflate
        for (mut row, &ti) in e.outer_iter_mut().zip(t.iter()) {
            row.scaled_add(-ti, &p);
        }
        f.scaled_add(-q_a, &t);

        weights.push(w);
        loadings.push(p);
        y_loadings.push(q_a);
        fitted = a + 1;

        // B_a = W (P'W)^-1 q over the first a components
        let k = fitted;
        let mut pw = Array2::zeros((k, k));
        for i in 0..k {
            for j in 0..k {
                pw[[i, j]] = loadings[i].dot(&weights[j]);
            }
        }
        let beta = solve_small(pw, Array1::from_vec(y_loadings.clone()))?;
        let mut col = Array1::zeros(q);
        for (j, w) in weights.iter().enumerate() {
            col.scaled_add(beta[j], w);
        }
        coef_path.column_mut(a).assign(&col);
    }

    if fitted == 0 {
        fitted = 1;
    }
    Ok(PlsModel {
        x_means,
        y_mean,
        coef_path: coef_path.slice_axis(Axis(1), (0..fitted).into()).to_owned(),
        a_max: fitted,
        requested_a_max: a_max,
    })
}

/// Ordinary least squares with intercept via Householder QR.
///
/// Rank deficiency (including perfectly collinear column pairs) is reported
/// as [`Error::SingularDesign`]; callers inside the search treat that as an
/// infeasible chromosome rather than an abort.
pub fn fit_ols(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<OlsModel> {
    let (n, q) = x.dim();
    if n < q + 2 {
        return Err(Error::Infeasible(format!(
            "least squares needs at least {} rows for {} variables, got {n}",
            q + 2,
            q
        )));
    }
    let m = q + 1;
    // design matrix [1 | X]
    let mut a = Array2::ones((n, m));
    a.slice_mut(ndarray::s![.., 1..]).assign(&x);
    let mut rhs = y.to_owned();

    // Householder QR, applying reflections to rhs as we go.
    for col in 0..m {
        let mut alpha = 0.0f64;
        for r in col..n {
            alpha += a[[r, col]] * a[[r, col]];
        }
        alpha = alpha.sqrt();
        if a[[col, col]] > 0.0 {
            alpha = -alpha;
        }
        let mut v = Array1::zeros(n - col);
        for r in col..n {
            v[r - col] = a[[r, col]];
        }
        v[0] -= alpha;
        let vnorm2 = v.dot(&v);
        if vnorm2 > 0.0 {
            for c in col..m {
                let mut dot = 0.0;
                for r in col..n {
                    dot += v[r - col] * a[[r, c]];
                }
                let f = 2.0 * dot / vnorm2;
                for r in col..n {
                    a[[r, c]] -= f * v[r - col];
                }
            }
            let mut dot = 0.0;
            for r in col..n {
                dot += v[r - col] * rhs[r];
            }
            let f = 2.0 * dot / vnorm2;
            for r in col..n {
                rhs[r] -= f * v[r - col];
            }
        }
        a[[col, col]] = alpha;
    }

    let max_diag = (0..m).map(|i| a[[i, i]].abs()).fold(0.0f64, f64::max);
    let tol = f64::EPSILON * (n.max(m) as f64) * max_diag;
    if (0..m).any(|i| a[[i, i]].abs() <= tol) {
        return Err(Error::SingularDesign);
    }

    let mut coefficients = Array1::zeros(m);
    for r in (0..m).rev() {
        let mut acc = rhs[r];
        for c in r + 1..m {
            acc -= a[[r, c]] * coefficients[c];
        }
        coefficients[r] = acc / a[[r, r]];
    }

    let model = OlsModel {
        coefficients,
        rss: 0.0,
    };
    let fitted_vals = model.predict(x);
    let rss = y
        .iter()
        .zip(fitted_vals.iter())
        .map(|(yi, fi)| (yi - fi) * (yi - fi))
        .sum();
    Ok(OlsModel { rss, ..model })
}
