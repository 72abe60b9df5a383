//! The validation criteria driving the search, and the shared prediction
//! metrics.
//!
//! All four criteria are minimized. The resampling criteria (rdCV and srCV)
//! estimate prediction power by repeatedly refitting on one part of the
//! data and predicting the rest; the BIC criteria are cheap fit-based
//! baselines. Every criterion is a deterministic function of
//! (data, subset, config, seed).

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_segments, split_random, Dataset};
use crate::error::{Error, Result};
use crate::model_selection::{choose_components, cv_msep, default_a_max};
use crate::pls::{fit_ols, PlsFitter};
use crate::seeds;

/// RSS is floored at `N * RSS_FLOOR_PER_OBS` before entering the BIC so a
/// perfectly interpolating fit cannot produce negative infinity.
const RSS_FLOOR_PER_OBS: f64 = 1e-24;

/// Which validation criterion scores a variable subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Repeated double cross-validation SEP.
    SepRdcv,
    /// Simple repeated cross-validation SEP.
    SepSrcv,
    /// BIC of a PLS model fit to the entire data.
    BicPls,
    /// BIC of an OLS model fit to the entire data.
    BicOls,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::SepRdcv => "rdcv",
            Criterion::SepSrcv => "srcv",
            Criterion::BicPls => "bic-pls",
            Criterion::BicOls => "bic-ols",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rdcv" => Ok(Criterion::SepRdcv),
            "srcv" => Ok(Criterion::SepSrcv),
            "bic-pls" => Ok(Criterion::BicPls),
            "bic-ols" => Ok(Criterion::BicOls),
            other => Err(Error::Config(format!(
                "unknown criterion '{other}' (expected rdcv|srcv|bic-pls|bic-ols)"
            ))),
        }
    }
}

/// Tunables shared by the criteria.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitnessConfig {
    /// Segments of the inner cross-validation loop (component choice).
    pub inner_segments: usize,
    /// Segments of the outer loop; rdCV only.
    pub outer_segments: usize,
    /// Replications of the resampling criteria.
    pub replications: usize,
    /// Calibration fraction of the random split; srCV only.
    pub calibration_ratio: f64,
    /// Upper cap on the number of PLS components searched.
    pub a_max_cap: usize,
    /// Second orthogonalization pass in the SIMPLS fit.
    pub reorthogonalize: bool,
    /// Penalize the PLS BIC by the number of components instead of the
    /// number of selected variables.
    pub bic_component_penalty: bool,
}

impl Default for FitnessConfig {
    fn default() -> Self {
        Self {
            inner_segments: 10,
            outer_segments: 4,
            replications: 30,
            calibration_ratio: 0.6,
            a_max_cap: 30,
            reorthogonalize: false,
            bic_component_penalty: false,
        }
    }
}

impl FitnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inner_segments < 2 {
            return Err(Error::Config("inner-segments must be at least 2".into()));
        }
        if self.outer_segments < 2 {
            return Err(Error::Config("outer-segments must be at least 2".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.calibration_ratio > 0.0 && self.calibration_ratio < 1.0) {
            return Err(Error::Config(
                "calibration-ratio must be strictly between 0 and 1".into(),
            ));
        }
        if self.a_max_cap < 1 {
            return Err(Error::Config("a-max-cap must be at least 1".into()));
        }
        Ok(())
    }

    fn fitter(&self) -> PlsFitter {
        PlsFitter::Simpls {
            reorthogonalize: self.reorthogonalize,
        }
    }
}

/// The score of one subset under one criterion. Lower mean is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessValue {
    pub criterion: Criterion,
    /// Per-replication criterion values (length 1 for the BIC criteria).
    pub replicates: Vec<f64>,
    /// Arithmetic mean of the replicates; the objective the search minimizes.
    pub mean: f64,
    /// Sample standard deviation of the replicates; zero for a single one.
    pub sd: f64,
    /// Chosen component counts, one inner vector per replicate (rdCV stores
    /// the per-outer-fold multiset; BIC over OLS stores nothing).
    pub a_opt: Vec<Vec<usize>>,
    /// Evaluation failed; the value stands in as worst possible.
    pub infeasible: bool,
    /// The RSS floor was applied in a BIC computation.
    pub rss_floored: bool,
}

impl FitnessValue {
    fn from_replicates(criterion: Criterion, replicates: Vec<f64>, a_opt: Vec<Vec<usize>>) -> Self {
        let r = replicates.len();
        let mean = replicates.iter().sum::<f64>() / r as f64;
        let sd = if r >= 2 {
            let ss: f64 = replicates.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (r - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            criterion,
            replicates,
            mean,
            sd,
            a_opt,
            infeasible: false,
            rss_floored: false,
        }
    }

    /// Worst-possible placeholder for a subset that cannot be evaluated.
    pub fn infeasible(criterion: Criterion) -> Self {
        Self {
            criterion,
            replicates: Vec::new(),
            mean: f64::INFINITY,
            sd: 0.0,
            a_opt: Vec::new(),
            infeasible: true,
            rss_floored: false,
        }
    }
}

/// Standard error of prediction and bias of a prediction vector:
/// the bias-corrected standard deviation of the residuals.
pub fn sep(y: ArrayView1<f64>, y_hat: ArrayView1<f64>) -> Result<(f64, f64)> {
    let n = y.len();
    if n != y_hat.len() {
        return Err(Error::Metric(format!(
            "length mismatch: {n} observed vs {} predicted",
            y_hat.len()
        )));
    }
    if n < 2 {
        return Err(Error::Metric(
            "SEP needs at least 2 observations".to_string(),
        ));
    }
    let bias = y
        .iter()
        .zip(y_hat.iter())
        .map(|(yi, hi)| yi - hi)
        .sum::<f64>()
        / n as f64;
    let ss: f64 = y
        .iter()
        .zip(y_hat.iter())
        .map(|(yi, hi)| {
            let d = yi - hi - bias;
            d * d
        })
        .sum();
    Ok(((ss / (n - 1) as f64).sqrt(), bias))
}

/// Root mean squared error of prediction.
pub fn rmsep(y: ArrayView1<f64>, y_hat: ArrayView1<f64>) -> Result<f64> {
    let n = y.len();
    if n != y_hat.len() {
        return Err(Error::Metric(format!(
            "length mismatch: {n} observed vs {} predicted",
            y_hat.len()
        )));
    }
    if n == 0 {
        return Err(Error::Metric("RMSEP needs at least 1 observation".into()));
    }
    let ss: f64 = y
        .iter()
        .zip(y_hat.iter())
        .map(|(yi, hi)| (yi - hi) * (yi - hi))
        .sum();
    Ok((ss / n as f64).sqrt())
}

/// One srCV replication: random calibration/test split, inner CV for the
/// component count, refit on the calibration set, SEP on the test set.
pub(crate) fn srcv_replicate(
    data: &Dataset,
    genes: &[usize],
    cfg: &FitnessConfig,
    fitter: &PlsFitter,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, usize)> {
    let split = split_random(data.n(), cfg.calibration_ratio, rng)?;
    let (x_cal, y_cal) = data.rows(&split.calibration_idx, genes);
    let n_cal = x_cal.nrows();
    let seg = make_segments(n_cal, cfg.inner_segments.min(n_cal), rng)?;
    let a_max = default_a_max(n_cal, genes.len(), seg.k(), cfg.a_max_cap);
    if a_max < 1 {
        return Err(Error::Infeasible(
            "calibration folds admit no components".into(),
        ));
    }
    let curve = cv_msep(x_cal.view(), y_cal.view(), &seg, a_max, fitter)?;
    let choice = choose_components(&curve);
    let model = fitter.fit(x_cal.view(), y_cal.view(), choice.a_opt)?;
    let a_use = choice.a_opt.min(model.a_max());
    let (x_test, y_test) = data.rows(&split.test_idx, genes);
    let y_hat = model.predict(x_test.view(), a_use)?;
    let (value, _bias) = sep(y_test.view(), y_hat.view())?;
    Ok((value, choice.a_opt))
}

/// One rdCV replication: outer segmentation, per-fold inner CV and refit,
/// SEP over the pooled out-of-fold predictions of all N observations.
pub(crate) fn rdcv_replicate(
    data: &Dataset,
    genes: &[usize],
    cfg: &FitnessConfig,
    fitter: &PlsFitter,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, Vec<usize>)> {
    let n = data.n();
    let outer = make_segments(n, cfg.outer_segments.min(n), rng)?;
    let mut y_hat_all = Array1::zeros(n);
    let mut a_opts = Vec::with_capacity(outer.k());
    for fold in 0..outer.k() {
        let cal_idx = outer.complement(fold);
        let test_idx = &outer.segments()[fold];
        let (x_cal, y_cal) = data.rows(&cal_idx, genes);
        let n_cal = x_cal.nrows();
        let seg = make_segments(n_cal, cfg.inner_segments.min(n_cal), rng)?;
        let a_max = default_a_max(n_cal, genes.len(), seg.k(), cfg.a_max_cap);
        if a_max < 1 {
            return Err(Error::Infeasible(
                "outer calibration folds admit no components".into(),
            ));
        }
        let curve = cv_msep(x_cal.view(), y_cal.view(), &seg, a_max, fitter)?;
        let choice = choose_components(&curve);
        let model = fitter.fit(x_cal.view(), y_cal.view(), choice.a_opt)?;
        let a_use = choice.a_opt.min(model.a_max());
        let (x_test, _) = data.rows(test_idx, genes);
        let y_hat = model.predict(x_test.view(), a_use)?;
        for (pos, &row) in test_idx.iter().enumerate() {
            y_hat_all[row] = y_hat[pos];
        }
        a_opts.push(choice.a_opt);
    }
    let (value, _bias) = sep(data.y(), y_hat_all.view())?;
    Ok((value, a_opts))
}

/// srCV fitness: the mean SEP over replications with fresh random splits
/// and fresh inner segmentations.
pub fn fitness_srcv(
    data: &Dataset,
    genes: &[usize],
    cfg: &FitnessConfig,
    rng: &mut ChaCha8Rng,
) -> FitnessValue {
    if genes.is_empty() {
        return FitnessValue::infeasible(Criterion::SepSrcv);
    }
    let base: u64 = rng.gen();
    let fitter = cfg.fitter();
    let mut replicates = Vec::with_capacity(cfg.replications);
    let mut a_opt = Vec::with_capacity(cfg.replications);
    for r in 0..cfg.replications {
        let mut rep_rng = seeds::rng(base, &[seeds::REPLICATE, r as u64]);
        match srcv_replicate(data, genes, cfg, &fitter, &mut rep_rng) {
            Ok((v, a)) if v.is_finite() => {
                replicates.push(v);
                a_opt.push(vec![a]);
            }
            _ => return FitnessValue::infeasible(Criterion::SepSrcv),
        }
    }
    FitnessValue::from_replicates(Criterion::SepSrcv, replicates, a_opt)
}

/// rdCV fitness: the mean over replications of the SEP of the pooled
/// outer-loop predictions.
pub fn fitness_rdcv(
    data: &Dataset,
    genes: &[usize],
    cfg: &FitnessConfig,
    rng: &mut ChaCha8Rng,
) -> FitnessValue {
    if genes.is_empty() {
        return FitnessValue::infeasible(Criterion::SepRdcv);
    }
    let base: u64 = rng.gen();
    let fitter = cfg.fitter();
    let mut replicates = Vec::with_capacity(cfg.replications);
    let mut a_opt = Vec::with_capacity(cfg.replications);
    for r in 0..cfg.replications {
        let mut rep_rng = seeds::rng(base, &[seeds::REPLICATE, r as u64]);
        match rdcv_replicate(data, genes, cfg, &fitter, &mut rep_rng) {
            Ok((v, a)) if v.is_finite() => {
                replicates.push(v);
                a_opt.push(a);
            }
            _ => return FitnessValue::infeasible(Criterion::SepRdcv),
        }
    }
    FitnessValue::from_replicates(Criterion::SepRdcv, replicates, a_opt)
}

fn bic(n: usize, rss: f64, penalty_count: usize) -> (f64, bool) {
    let floor = n as f64 * RSS_FLOOR_PER_OBS;
    let (rss_eff, floored) = if rss < floor { (floor, true) } else { (rss, false) };
    let n = n as f64;
    (n * (rss_eff / n).ln() + penalty_count as f64 * n.ln(), floored)
}

/// BIC of a PLS model fit to the entire data, with the component count
/// chosen by inner cross-validation.
pub fn fitness_bic_pls(
    data: &Dataset,
    genes: &[usize],
    cfg: &FitnessConfig,
    rng: &mut ChaCha8Rng,
) -> FitnessValue {
    if genes.is_empty() {
        return FitnessValue::infeasible(Criterion::BicPls);
    }
    let base: u64 = rng.gen();
    let mut rep_rng = seeds::rng(base, &[seeds::REPLICATE, 0]);
    let n = data.n();
    let fitter = cfg.fitter();
    let result = (|| -> Result<(f64, usize, bool)> {
        let seg = make_segments(n, cfg.inner_segments.min(n), &mut rep_rng)?;
        let a_max = default_a_max(n, genes.len(), seg.k(), cfg.a_max_cap);
        if a_max < 1 {
            return Err(Error::Infeasible("folds admit no components".into()));
        }
        let x = data.columns(genes);
        let curve = cv_msep(x.view(), data.y(), &seg, a_max, &fitter)?;
        let choice = choose_components(&curve);
        let model = fitter.fit(x.view(), data.y(), choice.a_opt)?;
        let a_use = choice.a_opt.min(model.a_max());
        let y_hat = model.predict(x.view(), a_use)?;
        let rss: f64 = data
            .y()
            .iter()
            .zip(y_hat.iter())
            .map(|(yi, hi)| (yi - hi) * (yi - hi))
            .sum();
        let penalty = if cfg.bic_component_penalty {
            choice.a_opt
        } else {
            genes.len()
        };
        let (value, floored) = bic(n, rss, penalty);
        Ok((value, choice.a_opt, floored))
    })();
    match result {
        Ok((value, a, floored)) if value.is_finite() => {
            let mut fv =
                FitnessValue::from_replicates(Criterion::BicPls, vec![value], vec![vec![a]]);
            fv.rss_floored = floored;
            fv
        }
        _ => FitnessValue::infeasible(Criterion::BicPls),
    }
}

/// BIC of an ordinary least squares fit to the entire data. A singular
/// design (for example perfectly collinear variables) makes the subset
/// infeasible rather than aborting the search.
pub fn fitness_bic_ols(data: &Dataset, genes: &[usize], cfg: &FitnessConfig) -> FitnessValue {
    if genes.is_empty() || data.n() < genes.len() + 2 {
        return FitnessValue::infeasible(Criterion::BicOls);
    }
    let x = data.columns(genes);
    match fit_ols(x.view(), data.y()) {
        Ok(model) => {
            let penalty = genes.len();
            let (value, floored) = bic(data.n(), model.rss, penalty);
            if !value.is_finite() {
                return FitnessValue::infeasible(Criterion::BicOls);
            }
            let mut fv = FitnessValue::from_replicates(Criterion::BicOls, vec![value], Vec::new());
            fv.rss_floored = floored;
            fv
        }
        Err(_) => FitnessValue::infeasible(Criterion::BicOls),
    }
}

/// Evaluate one subset under the chosen criterion with an explicit seed.
pub fn evaluate_criterion(
    data: &Dataset,
    genes: &[usize],
    criterion: Criterion,
    cfg: &FitnessConfig,
    seed: u64,
) -> FitnessValue {
    let mut rng = seeds::rng(seed, &[]);
    match criterion {
        Criterion::SepRdcv => fitness_rdcv(data, genes, cfg, &mut rng),
        Criterion::SepSrcv => fitness_srcv(data, genes, cfg, &mut rng),
        Criterion::BicPls => fitness_bic_pls(data, genes, cfg, &mut rng),
        Criterion::BicOls => fitness_bic_ols(data, genes, cfg),
    }
}
