//! The double truncated geometric distribution.
//!
//! Governs how many genes of an offspring mutate: the law of the difference
//! `G_u - G_{-l}` of two truncated geometric variables, where `1 - p` is the
//! mutation probability, `u >= 0` the upper and `l <= 0` the lower
//! truncation point. Truncation keeps the subset size inside its bounds.

use rand::Rng;

use crate::error::{Error, Result};

/// Double truncated geometric law on the integer support `[l, u]`.
#[derive(Debug, Clone)]
pub struct DtGeom {
    p: f64,
    lower: i64,
    upper: i64,
    /// Cumulative masses over the support, for inverse-CDF sampling.
    cdf: Vec<f64>,
}

impl DtGeom {
    /// Build the distribution. `p` is the success parameter in (0, 1];
    /// `lower <= 0 <= upper`. The degenerate case `lower = upper = 0` is
    /// allowed and puts all mass on zero.
    pub fn new(p: f64, lower: i64, upper: i64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::DistributionParams(format!(
                "success parameter must be in (0, 1], got {p}"
            )));
        }
        if lower > 0 || upper < 0 {
            return Err(Error::DistributionParams(format!(
                "truncation points must satisfy l <= 0 <= u, got l={lower}, u={upper}"
            )));
        }
        let mut dist = Self {
            p,
            lower,
            upper,
            cdf: Vec::new(),
        };
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity((upper - lower + 1) as usize);
        for k in lower..=upper {
            acc += dist.pmf(k);
            cdf.push(acc);
        }
        dist.cdf = cdf;
        Ok(dist)
    }

    pub fn lower(&self) -> i64 {
        self.lower
    }

    pub fn upper(&self) -> i64 {
        self.upper
    }

    /// Probability mass at `k`; zero outside the support.
    pub fn pmf(&self, k: i64) -> f64 {
        if k < self.lower || k > self.upper {
            return 0.0;
        }
        let p = self.p;
        if p == 1.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let l = self.lower;
        let u = self.upper;
        let q = 1.0 - p;
        let e1 = 2 + k + l - 2 * l.max(k - u);
        let e2 = k + l - 2 * 0i64.min(k);
        let num = p * (powi64(q, e1) - powi64(q, e2));
        let den = (p - 2.0) * (1.0 - powi64(q, 1 + u)) * (p - 1.0 + powi64(q, l));
        let g = num / den;
        if g.is_finite() {
            g
        } else {
            // the closed form overflows for extreme truncation points;
            // fall back to the defining difference construction
            self.convolved_pmf(k)
        }
    }

    fn convolved_pmf(&self, k: i64) -> f64 {
        let up = truncated_geometric(self.p, self.upper);
        let down = truncated_geometric(self.p, -self.lower);
        let mut mass = 0.0;
        for (i, pi) in up.iter().enumerate() {
            let j = i as i64 - k;
            if j >= 0 && (j as usize) < down.len() {
                mass += pi * down[j as usize];
            }
        }
        mass
    }

    /// Inverse-CDF draw over the finite support.
    pub fn sample(&self, rng: &mut impl Rng) -> i64 {
        let x: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c < x);
        self.lower + (idx.min(self.cdf.len() - 1)) as i64
    }
}

/// Geometric(p) restricted to `{0..=t}` and renormalized.
fn truncated_geometric(p: f64, t: i64) -> Vec<f64> {
    let q = 1.0 - p;
    let mut masses: Vec<f64> = (0..=t).map(|k| p * q.powi(k as i32)).collect();
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m /= total;
    }
    masses
}

fn powi64(base: f64, exp: i64) -> f64 {
    base.powi(exp as i32)
}
