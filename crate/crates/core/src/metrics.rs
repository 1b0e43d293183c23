//! Quality and property measures of a trained time map.
//!
//! Per-time sequences are indexed by the 0-based time position; the
//! structural-change sequence starts at the second time label.

use std::io::Write;

use serde::Serialize;

use crate::error::{Result, SotmError};
use crate::model::{SotmModel, UnitArray};
use crate::panel::{PanelDataset, Slice};
use crate::scalar::{dist, sq_dist, Scalar};
use crate::trainer::{bmu_unchecked, neighborhood_weight};

/// Aggregate and per-time quality measures.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct QualityReport<F: Scalar> {
    pub qe_total: F,
    pub dm_total: F,
    pub te_total: F,
    pub sc_total: F,
    pub qe_t: Vec<F>,
    pub dm_t: Vec<F>,
    pub te_t: Vec<F>,
    /// Structural change for time positions `1..T`.
    pub sc_t: Vec<F>,
}

fn mean<F: Scalar>(v: &[F]) -> F {
    if v.is_empty() {
        return F::zero();
    }
    v.iter().copied().sum::<F>() / F::cast(v.len() as f64)
}

fn check<F: Scalar>(model: &SotmModel<F>, panel: &PanelDataset<F>) -> Result<()> {
    if model.dim() != panel.dim() {
        return Err(SotmError::MismatchedPanel(format!(
            "model has {} variables, panel has {}",
            model.dim(),
            panel.dim()
        )));
    }
    if model.times() != panel.times() {
        return Err(SotmError::MismatchedPanel(
            "time labels differ between model and panel".into(),
        ));
    }
    if let Some(t) = panel.slices().iter().position(Slice::is_empty) {
        return Err(SotmError::EmptySlice(panel.times()[t].to_string()));
    }
    Ok(())
}

/// Mean distance of each row of `slice` to its BMU in `array`.
pub fn slice_quantization_error<F: Scalar>(array: &UnitArray<F>, slice: &Slice<F>) -> F {
    let total: F = slice.rows().map(|x| bmu_unchecked(x, array).1.sqrt()).sum();
    total / F::cast(slice.len() as f64)
}

/// Neighborhood-weighted mean squared distance to all units of `array`.
pub fn slice_distortion<F: Scalar>(array: &UnitArray<F>, slice: &Slice<F>, sigma: F) -> F {
    let m = array.len();
    let weights: Vec<Vec<F>> = (0..m)
        .map(|c| (0..m).map(|i| neighborhood_weight(i, c, sigma)).collect())
        .collect();
    let mut total = F::zero();
    for x in slice.rows() {
        let (c, _) = bmu_unchecked(x, array);
        for (i, u) in array.units().enumerate() {
            total = total + weights[c][i] * sq_dist(x, u);
        }
    }
    total / (F::cast(slice.len() as f64) * F::cast(m as f64))
}

/// First and second BMU of `x`; the second excludes the first, lowest index on ties.
pub fn two_nearest<F: Scalar>(x: &[F], array: &UnitArray<F>) -> (usize, usize) {
    let (c1, _) = bmu_unchecked(x, array);
    let mut c2 = usize::MAX;
    let mut best = F::infinity();
    for (i, u) in array.units().enumerate() {
        if i == c1 {
            continue;
        }
        let d = sq_dist(x, u);
        if d < best || c2 == usize::MAX {
            c2 = i;
            best = d;
        }
    }
    (c1, c2)
}

/// Fraction of rows whose two nearest units are not adjacent.
pub fn slice_topographic_error<F: Scalar>(array: &UnitArray<F>, slice: &Slice<F>) -> F {
    let errors = slice
        .rows()
        .filter(|x| {
            let (c1, c2) = two_nearest(x, array);
            c1.abs_diff(c2) > 1
        })
        .count();
    F::cast(errors as f64) / F::cast(slice.len() as f64)
}

/// Mean distance between same-index units of two arrays.
pub fn array_change<F: Scalar>(prev: &UnitArray<F>, next: &UnitArray<F>) -> F {
    let total: F = prev
        .units()
        .zip(next.units())
        .map(|(a, b)| dist(a, b))
        .sum();
    total / F::cast(prev.len() as f64)
}

pub fn quantization_error<F: Scalar>(
    model: &SotmModel<F>,
    panel: &PanelDataset<F>,
) -> Result<(F, Vec<F>)> {
    check(model, panel)?;
    let per_t: Vec<F> = model
        .arrays()
        .iter()
        .zip(panel.slices())
        .map(|(a, s)| slice_quantization_error(a, s))
        .collect();
    Ok((mean(&per_t), per_t))
}

/// Distortion with the model's own radius.
pub fn distortion<F: Scalar>(model: &SotmModel<F>, panel: &PanelDataset<F>) -> Result<(F, Vec<F>)> {
    distortion_with_sigma(model, panel, model.sigma())
}

pub fn distortion_with_sigma<F: Scalar>(
    model: &SotmModel<F>,
    panel: &PanelDataset<F>,
    sigma: F,
) -> Result<(F, Vec<F>)> {
    check(model, panel)?;
    let per_t: Vec<F> = model
        .arrays()
        .iter()
        .zip(panel.slices())
        .map(|(a, s)| slice_distortion(a, s, sigma))
        .collect();
    Ok((mean(&per_t), per_t))
}

pub fn topographic_error<F: Scalar>(
    model: &SotmModel<F>,
    panel: &PanelDataset<F>,
) -> Result<(F, Vec<F>)> {
    check(model, panel)?;
    let per_t: Vec<F> = model
        .arrays()
        .iter()
        .zip(panel.slices())
        .map(|(a, s)| slice_topographic_error(a, s))
        .collect();
    Ok((mean(&per_t), per_t))
}

/// Structural change between consecutive arrays; `(0, [])` for a single array.
pub fn structural_change<F: Scalar>(model: &SotmModel<F>) -> (F, Vec<F>) {
    let per_t: Vec<F> = model
        .arrays()
        .windows(2)
        .map(|w| array_change(&w[0], &w[1]))
        .collect();
    (mean(&per_t), per_t)
}

pub fn quality<F: Scalar>(
    model: &SotmModel<F>,
    panel: &PanelDataset<F>,
) -> Result<QualityReport<F>> {
    let (qe_total, qe_t) = quantization_error(model, panel)?;
    let (dm_total, dm_t) = distortion(model, panel)?;
    let (te_total, te_t) = topographic_error(model, panel)?;
    let (sc_total, sc_t) = structural_change(model);
    Ok(QualityReport {
        qe_total,
        dm_total,
        te_total,
        sc_total,
        qe_t,
        dm_t,
        te_t,
        sc_t,
    })
}

impl<F: Scalar> QualityReport<F> {
    pub fn n_times(&self) -> usize {
        self.qe_t.len()
    }

    /// Writes `t,qe,dm,te,sc` rows, `t` being the time label (`sc` blank at
    /// the first time), followed by a `total` row.
    pub fn write_csv<W: Write>(&self, writer: W, times: &[crate::panel::TimeLabel]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "qe", "dm", "te", "sc"])?;
        for t in 0..self.n_times() {
            let sc = if t == 0 {
                String::new()
            } else {
                self.sc_t[t - 1].to_string()
            };
            let time = times
                .get(t)
                .map_or_else(|| (t + 1).to_string(), ToString::to_string);
            w.write_record([
                time,
                self.qe_t[t].to_string(),
                self.dm_t[t].to_string(),
                self.te_t[t].to_string(),
                sc,
            ])?;
        }
        w.write_record([
            "total".to_owned(),
            self.qe_total.to_string(),
            self.dm_total.to_string(),
            self.te_total.to_string(),
            self.sc_total.to_string(),
        ])?;
        w.flush().map_err(|e| SotmError::io("<quality csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TrainConfig;
    use crate::panel::TimeLabel;
    use crate::scale::Scaler;

    fn model(arrays: Vec<Vec<Vec<f64>>>, sigma: f64) -> SotmModel<f64> {
        let d = arrays[0][0].len();
        let m = arrays[0].len();
        SotmModel::new(
            arrays
                .iter()
                .map(|a| UnitArray::from_units(a).unwrap())
                .collect(),
            TrainConfig::new(m, sigma),
            Scaler {
                means: vec![0.0; d],
                stds: vec![1.0; d],
            },
            (1..=arrays.len() as i64).map(TimeLabel::Int).collect(),
            (0..d).map(|k| format!("v{k}")).collect(),
        )
        .unwrap()
    }

    fn panel(slices: Vec<Vec<Vec<f64>>>) -> PanelDataset<f64> {
        let d = slices[0][0].len();
        let records = slices.into_iter().enumerate().flat_map(|(t, rows)| {
            rows.into_iter()
                .enumerate()
                .map(move |(j, r)| (format!("e{j}"), TimeLabel::Int(t as i64 + 1), r))
        });
        PanelDataset::from_records((0..d).map(|k| format!("v{k}")).collect(), records).unwrap()
    }

    #[test]
    fn exact_coverage_has_zero_error() {
        let m = model(vec![vec![vec![0.0], vec![1.0]]], 1.0);
        let p = panel(vec![vec![vec![0.0], vec![1.0]]]);
        let (qe, qe_t) = quantization_error(&m, &p).unwrap();
        assert_eq!(qe, 0.0);
        assert_eq!(qe_t, vec![0.0]);
        let (te, _) = topographic_error(&m, &p).unwrap();
        assert_eq!(te, 0.0);
    }

    #[test]
    fn distortion_vanishes_for_tiny_sigma_on_exact_coverage() {
        let m = model(vec![vec![vec![0.0], vec![1.0], vec![3.0]]], 0.05);
        let p = panel(vec![vec![vec![0.0], vec![1.0], vec![3.0]]]);
        let (dm, _) = distortion(&m, &p).unwrap();
        assert!(dm < 1e-20);
    }

    #[test]
    fn two_units_never_have_topographic_error() {
        let m = model(vec![vec![vec![0.0, 0.0], vec![5.0, 1.0]]], 1.0);
        let p = panel(vec![vec![vec![9.0, -3.0], vec![-4.0, 2.0], vec![2.5, 0.5]]]);
        assert_eq!(topographic_error(&m, &p).unwrap().0, 0.0);
    }

    #[test]
    fn folded_array_counts_errors() {
        // units 0 and 2 both sit near x=0
        let m = model(vec![vec![vec![0.0], vec![5.0], vec![0.1]]], 1.0);
        let p = panel(vec![vec![vec![0.02], vec![5.0]]]);
        let (te, te_t) = topographic_error(&m, &p).unwrap();
        assert_eq!(te_t, vec![0.5]);
        assert_eq!(te, 0.5);
    }

    #[test]
    fn second_bmu_ties_take_lowest_index() {
        let a = UnitArray::from_units(&[vec![1.0], vec![0.0], vec![-1.0], vec![1.0]]).unwrap();
        assert_eq!(two_nearest(&[0.0], &a), (1, 0));
        assert_eq!(two_nearest(&[1.0], &a), (0, 3));
    }

    #[test]
    fn structural_change_of_translation() {
        let delta = [0.3, -0.4];
        let base = [vec![0.0, 0.0], vec![1.0, 2.0], vec![-1.0, 0.5]];
        let arrays: Vec<Vec<Vec<f64>>> = (0..4)
            .map(|t| {
                base.iter()
                    .map(|u| vec![u[0] + delta[0] * t as f64, u[1] + delta[1] * t as f64])
                    .collect()
            })
            .collect();
        let (sc, sc_t) = structural_change(&model(arrays, 1.0));
        assert_eq!(sc_t.len(), 3);
        for v in sc_t {
            assert!((v - 0.5).abs() < 1e-12);
        }
        assert!((sc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_arrays_have_no_change_and_single_array_is_zero() {
        let a = vec![vec![0.0], vec![1.0]];
        let (sc, sc_t) = structural_change(&model(vec![a.clone(), a.clone(), a.clone()], 1.0));
        assert_eq!((sc, sc_t), (0.0, vec![0.0, 0.0]));
        let (sc, sc_t) = structural_change(&model(vec![a], 1.0));
        assert_eq!(sc, 0.0);
        assert!(sc_t.is_empty());
    }

    #[test]
    fn mismatched_panel_rejected() {
        let m = model(vec![vec![vec![0.0], vec![1.0]]], 1.0);
        let p = panel(vec![vec![vec![0.0, 1.0]]]);
        assert!(matches!(
            quality(&m, &p),
            Err(SotmError::MismatchedPanel(_))
        ));
        let p2 = panel(vec![vec![vec![0.0]], vec![vec![1.0]]]);
        assert!(matches!(
            quality(&m, &p2),
            Err(SotmError::MismatchedPanel(_))
        ));
    }

    #[test]
    fn csv_has_one_row_per_time_plus_total() {
        let m = model(
            vec![vec![vec![0.0], vec![1.0]], vec![vec![0.5], vec![1.5]]],
            1.0,
        );
        let p = panel(vec![vec![vec![0.2]], vec![vec![0.9]]]);
        let r = quality(&m, &p).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, m.times()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,qe,dm,te,sc");
        assert!(lines[1].starts_with("1,"));
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(','));
        assert!(lines[3].starts_with("total,"));
    }
}
