//! Data container, CSV ingestion and random partitioning.

use std::collections::HashSet;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Minimum number of observations a data set must have.
pub const MIN_OBSERVATIONS: usize = 4;

/// An immutable regression data set: an N×p predictor matrix and a
/// length-N response. Safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array1<f64>,
    variable_names: Vec<String>,
    observation_ids: Vec<String>,
}

impl Dataset {
    /// Build a data set from parts, checking all invariants.
    pub fn new(
        x: Array2<f64>,
        y: Array1<f64>,
        variable_names: Vec<String>,
        observation_ids: Vec<String>,
    ) -> Result<Self> {
        let (n, p) = x.dim();
        if n < MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations(n, MIN_OBSERVATIONS));
        }
        if p == 0 {
            return Err(Error::Config("data set has no predictor columns".into()));
        }
        if y.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "response length {} does not match {} rows",
                y.len(),
                n
            )));
        }
        if variable_names.len() != p || observation_ids.len() != n {
            return Err(Error::ShapeMismatch(
                "name/id counts do not match matrix dimensions".into(),
            ));
        }
        let mut seen = HashSet::new();
        for name in &variable_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateVariable(name.clone()));
            }
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("data contains non-finite entries".into()));
        }
        Ok(Self {
            x,
            y,
            variable_names,
            observation_ids,
        })
    }

    /// Read a data set from a CSV file with a header row.
    ///
    /// The `response_column` becomes the response; every other column is
    /// parsed as a numeric predictor, except the optional `id_column`
    /// which supplies observation labels. Row order is preserved.
    pub fn from_csv(
        path: impl AsRef<Path>,
        response_column: &str,
        id_column: Option<&str>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let path_str = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Csv {
                path: path_str.clone(),
                source: e,
            })?;

        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Csv {
                path: path_str.clone(),
                source: e,
            })?
            .iter()
            .map(|h| h.to_string())
            .collect();

        let response_idx = headers
            .iter()
            .position(|h| h == response_column)
            .ok_or_else(|| Error::MissingColumn(response_column.to_string()))?;
        let id_idx = match id_column {
            Some(name) => {
                let idx = headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
                if idx == response_idx {
                    return Err(Error::Config(format!(
                        "id column and response column are both '{name}'"
                    )));
                }
                Some(idx)
            }
            None => None,
        };

        let predictor_idx: Vec<usize> = (0..headers.len())
            .filter(|&i| i != response_idx && Some(i) != id_idx)
            .collect();
        let variable_names: Vec<String> =
            predictor_idx.iter().map(|&i| headers[i].clone()).collect();

        let parse_cell = |row: usize, col: usize, value: &str| -> Result<f64> {
            match value.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    row,
                    column: headers[col].clone(),
                    value: value.to_string(),
                }),
            }
        };

        let mut rows: Vec<f64> = Vec::new();
        let mut y: Vec<f64> = Vec::new();
        let mut ids: Vec<String> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Csv {
                path: path_str.clone(),
                source: e,
            })?;
            let data_row = i + 1; // 1-based, header not counted
            if record.len() != headers.len() {
                return Err(Error::Config(format!(
                    "data row {data_row} has {} fields, header has {}",
                    record.len(),
                    headers.len()
                )));
            }
            y.push(parse_cell(data_row, response_idx, &record[response_idx])?);
            for &c in &predictor_idx {
                rows.push(parse_cell(data_row, c, &record[c])?);
            }
            ids.push(match id_idx {
                Some(c) => record[c].to_string(),
                None => data_row.to_string(),
            });
        }

        let n = y.len();
        if n < MIN_OBSERVATIONS {
            return Err(Error::TooFewObservations(n, MIN_OBSERVATIONS));
        }
        let p = predictor_idx.len();
        if p == 0 {
            return Err(Error::Config("data set has no predictor columns".into()));
        }
        let x = Array2::from_shape_vec((n, p), rows)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(x, Array1::from_vec(y), variable_names, ids)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> ArrayView2<'_, f64> {
        self.x.view()
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.y.view()
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn observation_ids(&self) -> &[String] {
        &self.observation_ids
    }

    /// Copy of the predictor columns named by `cols`, in the given order.
    pub fn columns(&self, cols: &[usize]) -> Array2<f64> {
        self.x.select(Axis(1), cols)
    }

    /// Copy of the rows named by `idx`: predictors restricted to `cols`
    /// plus the matching response values.
    pub fn rows(&self, idx: &[usize], cols: &[usize]) -> (Array2<f64>, Array1<f64>) {
        let x = self.x.select(Axis(0), idx).select(Axis(1), cols);
        let y = self.y.select(Axis(0), idx);
        (x, y)
    }

    /// A new data set containing only the rows named by `idx`.
    pub fn subset_rows(&self, idx: &[usize]) -> Result<Self> {
        let x = self.x.select(Axis(0), idx);
        let y = self.y.select(Axis(0), idx);
        let ids = idx
            .iter()
            .map(|&i| self.observation_ids[i].clone())
            .collect();
        Self::new(x, y, self.variable_names.clone(), ids)
    }

    /// FNV-1a hash over the numeric content; used to fingerprint runs.
    pub fn content_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: f64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        self.x.iter().copied().for_each(&mut eat);
        self.y.iter().copied().for_each(&mut eat);
        h
    }
}

/// A partition of `{0..n_total}` into K disjoint, almost equally sized
/// segments.
#[derive(Debug, Clone)]
pub struct CvSegmentation {
    segments: Vec<Vec<usize>>,
    n_total: usize,
}

impl CvSegmentation {
    pub fn k(&self) -> usize {
        self.segments.len()
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn segments(&self) -> &[Vec<usize>] {
        &self.segments
    }

    /// All indices not in segment `k`, in ascending order.
    pub fn complement(&self, k: usize) -> Vec<usize> {
        let held: HashSet<usize> = self.segments[k].iter().copied().collect();
        (0..self.n_total).filter(|i| !held.contains(i)).collect()
    }
}

/// Split `0..n` into K almost equally sized segments, uniformly at random.
///
/// Segment sizes differ by at most one; the first `n % K` segments get the
/// extra element.
pub fn make_segments(n: usize, k: usize, rng: &mut impl Rng) -> Result<CvSegmentation> {
    if k < 2 || k > n {
        return Err(Error::InvalidSegmentation { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let base = n / k;
    let extra = n % k;
    let mut segments = Vec::with_capacity(k);
    let mut start = 0;
    for s in 0..k {
        let len = base + usize::from(s < extra);
        let mut seg: Vec<usize> = order[start..start + len].to_vec();
        seg.sort_unstable();
        segments.push(seg);
        start += len;
    }
    Ok(CvSegmentation {
        segments,
        n_total: n,
    })
}

/// A random calibration/test split of `0..n`.
#[derive(Debug, Clone)]
pub struct Split {
    pub calibration_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub ratio: f64,
}

/// Draw a uniformly random calibration set of size round(ratio·n); the
/// remaining rows form the test set. Both sides must keep at least 2 rows.
pub fn split_random(n: usize, ratio: f64, rng: &mut impl Rng) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidSplit { n, ratio });
    }
    // round half up
    let n_cal = (ratio * n as f64 + 0.5).floor() as usize;
    if n_cal < 2 || n - n_cal < 2 {
        return Err(Error::InvalidSplit { n, ratio });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut calibration_idx: Vec<usize> = order[..n_cal].to_vec();
    let mut test_idx: Vec<usize> = order[n_cal..].to_vec();
    calibration_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(Split {
        calibration_idx,
        test_idx,
        ratio,
    })
}
