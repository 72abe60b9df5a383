//! Inner cross-validation: MSEP per component count, its standard error,
//! and the one-standard-error choice of the model complexity.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::dataset::CvSegmentation;
use crate::error::{Error, Result};
use crate::pls::PlsFitter;

/// Cross-validated mean squared error of prediction per component count.
///
/// `msep[a-1]` is the unweighted mean over segments of the segment-mean
/// squared prediction errors, exactly the double average even when segment
/// sizes differ by one.
#[derive(Debug, Clone)]
pub struct MsepCurve {
    msep: Array1<f64>,
    /// K × a_max matrix of per-segment mean squared errors.
    per_segment: Array2<f64>,
    k: usize,
    a_max: usize,
}

impl MsepCurve {
    pub fn from_per_segment(per_segment: Array2<f64>) -> Result<Self> {
        let (k, a_max) = per_segment.dim();
        if k < 2 || a_max < 1 {
            return Err(Error::Config(
                "MSEP curve needs K >= 2 segments and at least one component".into(),
            ));
        }
        let msep = per_segment.mean_axis(Axis(0)).expect("k >= 2");
        Ok(Self {
            msep,
            per_segment,
            k,
            a_max,
        })
    }

    pub fn msep(&self) -> ArrayView1<'_, f64> {
        self.msep.view()
    }

    pub fn per_segment(&self) -> ArrayView2<'_, f64> {
        self.per_segment.view()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn a_max(&self) -> usize {
        self.a_max
    }
}

/// The chosen number of components.
#[derive(Debug, Clone)]
pub struct ComponentChoice {
    /// One-standard-error choice.
    pub a_opt: usize,
    /// Smallest component count attaining the minimal MSEP.
    pub a_min: usize,
    /// Standard error of the MSEP per component count.
    pub se: Array1<f64>,
}

/// Largest component count the cross-validation geometry admits: the
/// smallest training fold must keep one more row than components, and the
/// user cap bounds the search.
pub fn default_a_max(n_cal: usize, q: usize, k: usize, cap: usize) -> usize {
    if k == 0 || n_cal == 0 {
        return 0;
    }
    let largest_segment = n_cal.div_ceil(k);
    let smallest_train = n_cal.saturating_sub(largest_segment);
    q.min(smallest_train.saturating_sub(1)).min(cap)
}

/// K-fold cross-validated MSEP for component counts 1..=a_max.
///
/// For every segment the model is fitted once on the remaining K-1
/// segments and the held-out rows are predicted for every component count
/// along the path. Should a fold truncate its path early, the curve is
/// shortened to the component range all folds support.
pub fn cv_msep(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    seg: &CvSegmentation,
    a_max: usize,
    fitter: &PlsFitter,
) -> Result<MsepCurve> {
    let n = x.nrows();
    if seg.n_total() != n {
        return Err(Error::ShapeMismatch(format!(
            "segmentation covers {} rows, data has {n}",
            seg.n_total()
        )));
    }
    let k = seg.k();
    let largest_segment = seg.segments().iter().map(Vec::len).max().unwrap_or(0);
    if a_max < 1 || n - largest_segment < a_max + 1 {
        return Err(Error::InvalidComponents {
            a: a_max,
            a_max: (n - largest_segment).saturating_sub(1),
        });
    }

    let mut fold_errors: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut effective = a_max;
    for fold in 0..k {
        let train_idx = seg.complement(fold);
        let test_idx = &seg.segments()[fold];
        let x_train = x.select(Axis(0), &train_idx);
        let y_train = y.select(Axis(0), &train_idx);
        let x_test = x.select(Axis(0), test_idx);
        let y_test = y.select(Axis(0), test_idx);

        let model = fitter.fit(x_train.view(), y_train.view(), a_max)?;
        effective = effective.min(model.a_max());
        let mut errs = Vec::with_capacity(model.a_max());
        for a in 1..=model.a_max() {
            let y_hat = model.predict(x_test.view(), a)?;
            let mse = y_test
                .iter()
                .zip(y_hat.iter())
                .map(|(yi, hi)| (yi - hi) * (yi - hi))
                .sum::<f64>()
                / y_test.len() as f64;
            errs.push(mse);
        }
        fold_errors.push(errs);
    }

    if effective < 1 {
        return Err(Error::Infeasible(
            "every cross-validation fold degenerated before one component".into(),
        ));
    }
    let mut per_segment = Array2::zeros((k, effective));
    for (fold, errs) in fold_errors.iter().enumerate() {
        for a in 0..effective {
            per_segment[[fold, a]] = errs[a];
        }
    }
    MsepCurve::from_per_segment(per_segment)
}

/// Standard error of the MSEP at each component count:
/// `SE_a = sqrt( 1/(K-1) * sum_k (MSEP_a - segmean_{k,a})^2 )`.
pub fn se_of_msep(curve: &MsepCurve) -> Array1<f64> {
    let k = curve.k() as f64;
    let mut se = Array1::zeros(curve.a_max());
    for a in 0..curve.a_max() {
        let m = curve.msep()[a];
        let ss: f64 = curve
            .per_segment()
            .column(a)
            .iter()
            .map(|v| (m - v) * (m - v))
            .sum();
        se[a] = (ss / (k - 1.0)).sqrt();
    }
    se
}

/// One-standard-error rule: the smallest component count whose MSEP lies
/// below the minimal MSEP plus `SE_m / sqrt(K)`. Ties in the argmin go to
/// the smaller model.
pub fn choose_components(curve: &MsepCurve) -> ComponentChoice {
    let se = se_of_msep(curve);
    let msep = curve.msep();
    let mut a_min = 0usize;
    for a in 1..curve.a_max() {
        if msep[a] < msep[a_min] {
            a_min = a;
        }
    }
    let threshold = msep[a_min] + se[a_min] / (curve.k() as f64).sqrt();
    let mut a_opt = a_min;
    for a in 0..=a_min {
        if msep[a] <= threshold {
            a_opt = a;
            break;
        }
    }
    ComponentChoice {
        a_opt: a_opt + 1,
        a_min: a_min + 1,
        se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::make_segments;
    use crate::pls::fit_simpls;
    use ndarray::Array;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SIMPLS: PlsFitter = PlsFitter::Simpls {
        reorthogonalize: false,
    };

    fn random_problem(
        rng: &mut ChaCha8Rng,
        n: usize,
        q: usize,
        noise: f64,
    ) -> (Array2<f64>, Array1<f64>) {
        let x = Array::from_shape_fn((n, q), |_| rng.gen::<f64>() * 2.0 - 1.0);
        let beta = Array::from_shape_fn(q, |_| rng.gen::<f64>() * 2.0 - 1.0);
        let e = Array::from_shape_fn(n, |_| noise * (rng.gen::<f64>() - 0.5));
        let y = x.dot(&beta) + e;
        (x, y)
    }

    // Brute-force oracle: refit one model per (fold, component-count) pair.
    fn refit_oracle(
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        seg: &CvSegmentation,
        a_max: usize,
    ) -> Array2<f64> {
        let k = seg.k();
        let mut per_segment = Array2::zeros((k, a_max));
        for fold in 0..k {
            let train_idx = seg.complement(fold);
            let test_idx = &seg.segments()[fold];
            let x_train = x.select(Axis(0), &train_idx);
            let y_train = y.select(Axis(0), &train_idx);
            let x_test = x.select(Axis(0), test_idx);
            let y_test = y.select(Axis(0), test_idx);
            for a in 1..=a_max {
                let model = fit_simpls(x_train.view(), y_train.view(), a, false).unwrap();
                let y_hat = model.predict(x_test.view(), a).unwrap();
                let mse = y_test
                    .iter()
                    .zip(y_hat.iter())
                    .map(|(yi, hi)| (yi - hi) * (yi - hi))
                    .sum::<f64>()
                    / y_test.len() as f64;
                per_segment[[fold, a - 1]] = mse;
            }
        }
        per_segment
    }

    #[test]
    fn noiseless_single_variable_msep_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let x = Array::from_shape_fn((16, 1), |_| rng.gen::<f64>());
        let y = x.column(0).mapv(|v| 3.0 * v);
        let var_y = {
            let m = y.mean().unwrap();
            y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (y.len() - 1) as f64
        };
        let seg = make_segments(16, 4, &mut rng).unwrap();
        let curve = cv_msep(x.view(), y.view(), &seg, 1, &SIMPLS).unwrap();
        assert!(curve.msep()[0] < 1e-16 * var_y);
    }

    #[test]
    fn matches_per_fold_refit_oracle_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (x, y) = random_problem(&mut rng, 20, 5, 0.5);
        let seg = make_segments(20, 4, &mut rng).unwrap();
        let curve = cv_msep(x.view(), y.view(), &seg, 3, &SIMPLS).unwrap();
        let oracle = refit_oracle(x.view(), y.view(), &seg, 3);
        assert_eq!(curve.per_segment(), oracle.view());
        for a in 0..3 {
            let mean = oracle.column(a).mean().unwrap();
            assert_eq!(curve.msep()[a], mean);
        }
    }

    #[test]
    fn oracle_agreement_on_more_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let n = rng.gen_range(14..30usize);
            let q = rng.gen_range(2..6usize);
            let k = rng.gen_range(2..5usize);
            let (x, y) = random_problem(&mut rng, n, q, 1.0);
            let seg = make_segments(n, k, &mut rng).unwrap();
            let a_max = default_a_max(n, q, k, 4).max(1);
            let curve = cv_msep(x.view(), y.view(), &seg, a_max, &SIMPLS).unwrap();
            let oracle = refit_oracle(x.view(), y.view(), &seg, a_max);
            assert_eq!(curve.per_segment(), oracle.view());
        }
    }

    #[test]
    fn unequal_halves_average_segment_means_not_pooled() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let (x, y) = random_problem(&mut rng, 11, 3, 1.0);
        let seg = make_segments(11, 2, &mut rng).unwrap();
        let curve = cv_msep(x.view(), y.view(), &seg, 2, &SIMPLS).unwrap();
        let m = (curve.per_segment()[[0, 0]] + curve.per_segment()[[1, 0]]) / 2.0;
        assert_eq!(curve.msep()[0], m);
    }

    #[test]
    fn fold_too_small_for_components_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let (x, y) = random_problem(&mut rng, 8, 6, 1.0);
        let seg = make_segments(8, 2, &mut rng).unwrap();
        assert!(matches!(
            cv_msep(x.view(), y.view(), &seg, 5, &SIMPLS),
            Err(Error::InvalidComponents { .. })
        ));
    }

    #[test]
    fn se_zero_when_segment_means_equal() {
        let per = Array2::from_shape_vec((3, 1), vec![2.0, 2.0, 2.0]).unwrap();
        let curve = MsepCurve::from_per_segment(per).unwrap();
        assert_eq!(se_of_msep(&curve)[0], 0.0);
    }

    #[test]
    fn se_hand_computed_two_segments() {
        let per = Array2::from_shape_vec((2, 1), vec![1.0, 3.0]).unwrap();
        let curve = MsepCurve::from_per_segment(per).unwrap();
        assert_eq!(curve.msep()[0], 2.0);
        assert!((se_of_msep(&curve)[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn se_scales_with_squared_response_scale() {
        let per = Array2::from_shape_vec((3, 2), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let scaled = per.mapv(|v| 9.0 * v); // y scaled by 3 scales MSEP by 9
        let se_base = se_of_msep(&MsepCurve::from_per_segment(per).unwrap());
        let se_scaled = se_of_msep(&MsepCurve::from_per_segment(scaled).unwrap());
        for a in 0..2 {
            assert!((se_scaled[a] - 9.0 * se_base[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn strictly_decreasing_curve_with_zero_se_picks_last() {
        let mut per = Array2::zeros((3, 4));
        for a in 0..4 {
            per.column_mut(a).fill(4.0 - a as f64);
        }
        let curve = MsepCurve::from_per_segment(per).unwrap();
        let choice = choose_components(&curve);
        assert_eq!(choice.a_opt, 4);
        assert_eq!(choice.a_min, 4);
    }

    #[test]
    fn one_se_rule_hand_constructed() {
        // msep = [4.0, 2.0, 1.9, 1.95], K = 4, SE_3/sqrt(4) = 0.15
        // => threshold 2.05, a_opt = 2, a_min = 3.
        let d = 0.27f64.sqrt() / 2.0; // makes SE_3 = 0.3
        let mut per = Array2::zeros((4, 4));
        per.column_mut(0).fill(4.0);
        per.column_mut(1).fill(2.0);
        let col3 = [1.9 + d, 1.9 - d, 1.9 + d, 1.9 - d];
        for (k, v) in col3.iter().enumerate() {
            per[[k, 2]] = *v;
        }
        per.column_mut(3).fill(1.95);
        let curve = MsepCurve::from_per_segment(per).unwrap();
        let se = se_of_msep(&curve);
        assert!((se[2] - 0.3).abs() < 1e-12);
        let choice = choose_components(&curve);
        assert_eq!(choice.a_min, 3);
        assert_eq!(choice.a_opt, 2);
    }

    #[test]
    fn constant_curve_picks_first() {
        let per = Array2::from_elem((4, 5), 2.5);
        let choice = choose_components(&MsepCurve::from_per_segment(per).unwrap());
        assert_eq!(choice.a_opt, 1);
        assert_eq!(choice.a_min, 1);
    }

    #[test]
    fn a_opt_never_exceeds_a_min_on_random_curves() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..500 {
            let k = rng.gen_range(2..8usize);
            let a = rng.gen_range(1..10usize);
            let per = Array2::from_shape_fn((k, a), |_| rng.gen::<f64>() * 5.0);
            let curve = MsepCurve::from_per_segment(per).unwrap();
            let choice = choose_components(&curve);
            assert!(choice.a_opt <= choice.a_min);
            assert!(choice.a_min <= a);
        }
    }

    #[test]
    fn permuting_segments_leaves_curve_and_choice_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let per = Array2::from_shape_fn((5, 4), |_| rng.gen::<f64>() * 3.0);
        let permuted = per.select(Axis(0), &[3, 1, 4, 0, 2]);
        let c1 = MsepCurve::from_per_segment(per).unwrap();
        let c2 = MsepCurve::from_per_segment(permuted).unwrap();
        for a in 0..4 {
            assert!((c1.msep()[a] - c2.msep()[a]).abs() < 1e-15);
        }
        assert_eq!(choose_components(&c1).a_opt, choose_components(&c2).a_opt);
    }

    #[test]
    fn default_a_max_respects_fold_geometry() {
        // n=10, K=4: largest segment 3, smallest training fold 7 -> 6 comps
        assert_eq!(default_a_max(10, 20, 4, 30), 6);
        assert_eq!(default_a_max(10, 3, 4, 30), 3);
        assert_eq!(default_a_max(10, 20, 4, 2), 2);
        assert_eq!(default_a_max(4, 20, 4, 30), 2);
    }
}
