//! Batch training of the time-ordered unit arrays.
//!
//! The first array is laid out along the first principal component of the
//! first slice and trained to convergence. Every later array starts as a copy
//! of its trained predecessor and receives a fixed number of batch cycles on
//! its own slice. The neighborhood radius is the same for every slice.

use serde::Serialize;

use crate::error::{Result, SotmError};
use crate::linalg::principal_axis;
use crate::metrics::{quality, QualityReport};
use crate::model::{SotmModel, TrainConfig, UnitArray};
use crate::panel::{PanelDataset, Slice};
use crate::scalar::{sq_dist, Scalar};
use crate::scale::Scaler;

/// Linear initialization along the slice's first principal component.
///
/// Units sit at `mean + s_i * v` with `s_i` evenly spaced over
/// `[-2λ, 2λ]`, where `λ` is the (population) standard deviation of the
/// projections onto `v`.
pub fn pca_init<F: Scalar>(slice: &Slice<F>, units: usize) -> Result<UnitArray<F>> {
    if units < 2 {
        return Err(SotmError::InvalidConfig(format!(
            "unit count must be at least 2, got {units}"
        )));
    }
    if slice.is_empty() {
        return Err(SotmError::EmptySlice("<init>".into()));
    }
    let axis = principal_axis(slice.rows(), slice.dim()).ok_or(SotmError::DegenerateSlice)?;
    let n = F::cast(axis.scores.len() as f64);
    let lambda = (axis.scores.iter().map(|&s| s * s).sum::<F>() / n).sqrt();
    if !(lambda > F::zero()) {
        return Err(SotmError::DegenerateSlice);
    }
    let span = F::cast(2.0) * lambda;
    let last = F::cast((units - 1) as f64);
    let mut values = Vec::with_capacity(units * slice.dim());
    for i in 0..units {
        let s = -span + F::cast(2.0) * span * F::cast(i as f64) / last;
        values.extend(
            axis.mean
                .iter()
                .zip(&axis.direction)
                .map(|(&m, &v)| m + s * v),
        );
    }
    UnitArray::new(slice.dim(), values)
}

#[inline]
pub(crate) fn bmu_unchecked<F: Scalar>(x: &[F], array: &UnitArray<F>) -> (usize, F) {
    let mut best = 0;
    let mut best_d = F::infinity();
    for (i, u) in array.units().enumerate() {
        let d = sq_dist(x, u);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    (best, best_d)
}

/// Best-matching unit of `x`: the nearest reference vector in Euclidean
/// distance, lowest index on ties. Returns the index and the distance.
pub fn find_bmu<F: Scalar>(x: &[F], array: &UnitArray<F>) -> Result<(usize, F)> {
    if x.len() != array.dim() {
        return Err(SotmError::DimensionMismatch {
            expected: array.dim(),
            got: x.len(),
        });
    }
    let (c, d2) = bmu_unchecked(x, array);
    Ok((c, d2.sqrt()))
}

/// Gaussian neighborhood on the integer array positions.
#[inline]
pub fn neighborhood_weight<F: Scalar>(i: usize, c: usize, sigma: F) -> F {
    let d = F::cast(i.abs_diff(c) as f64);
    (-(d * d) / (F::cast(2.0) * sigma * sigma)).exp()
}

/// One batch update: BMUs of every row are fixed against the input array,
/// then each unit moves to its neighborhood-weighted centroid of the slice.
pub fn batch_cycle<F: Scalar>(
    array: &UnitArray<F>,
    slice: &Slice<F>,
    sigma: F,
) -> Result<UnitArray<F>> {
    if slice.is_empty() {
        return Err(SotmError::EmptySlice("<batch>".into()));
    }
    if slice.dim() != array.dim() {
        return Err(SotmError::DimensionMismatch {
            expected: array.dim(),
            got: slice.dim(),
        });
    }
    let m = array.len();
    let d = array.dim();

    // Per-BMU sums and counts; the quotient only depends on these.
    let mut sums = vec![F::zero(); m * d];
    let mut counts = vec![0usize; m];
    for x in slice.rows() {
        let (c, _) = bmu_unchecked(x, array);
        counts[c] += 1;
        for (s, &v) in sums[c * d..(c + 1) * d].iter_mut().zip(x) {
            *s = *s + v;
        }
    }
    let hit: Vec<usize> = (0..m).filter(|&c| counts[c] > 0).collect();
    let two_s2 = F::cast(2.0) * sigma * sigma;

    let mut out = array.clone();
    for i in 0..m {
        // Weights are rescaled by the largest one so tiny radii do not
        // underflow to 0/0; the quotient is unchanged by a common factor.
        let nearest = hit.iter().map(|&c| i.abs_diff(c).pow(2)).min().unwrap_or(0);
        let mut num = vec![F::zero(); d];
        let mut den = F::zero();
        for &c in &hit {
            let r2 = F::cast((i.abs_diff(c).pow(2) - nearest) as f64);
            let w = (-r2 / two_s2).exp();
            if w == F::zero() {
                continue;
            }
            for (acc, &s) in num.iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                *acc = *acc + w * s;
            }
            den = den + w * F::cast(counts[c] as f64);
        }
        for (dst, &n) in out.unit_mut(i).iter_mut().zip(&num) {
            *dst = n / den;
        }
    }
    Ok(out)
}

/// Result of training one array with its per-cycle displacements.
#[derive(Clone, Debug)]
pub struct SliceTrace<F: Scalar> {
    pub array: UnitArray<F>,
    /// Largest per-component move of each cycle that ran.
    pub displacements: Vec<F>,
}

impl<F: Scalar> SliceTrace<F> {
    pub fn cycles_run(&self) -> usize {
        self.displacements.len()
    }
}

/// Runs up to `cycles` batch updates, stopping after the first cycle whose
/// largest per-component displacement is below `tol`.
pub fn train_slice<F: Scalar>(
    init: &UnitArray<F>,
    slice: &Slice<F>,
    sigma: F,
    cycles: usize,
    tol: F,
) -> Result<UnitArray<F>> {
    train_slice_traced(init, slice, sigma, cycles, tol).map(|t| t.array)
}

pub fn train_slice_traced<F: Scalar>(
    init: &UnitArray<F>,
    slice: &Slice<F>,
    sigma: F,
    cycles: usize,
    tol: F,
) -> Result<SliceTrace<F>> {
    if slice.is_empty() {
        return Err(SotmError::EmptySlice("<train>".into()));
    }
    let mut array = init.clone();
    let mut displacements = Vec::new();
    for _ in 0..cycles {
        let next = batch_cycle(&array, slice, sigma)?;
        let moved = next.max_displacement(&array);
        array = next;
        displacements.push(moved);
        if moved < tol {
            break;
        }
    }
    Ok(SliceTrace {
        array,
        displacements,
    })
}

/// Trains a full time map on a standardized panel.
///
/// `scaler` is the transform that produced `panel`; it is stored with the
/// model so feature planes can be shown in original units.
pub fn train_sotm<F: Scalar>(
    panel: &PanelDataset<F>,
    scaler: &Scaler<F>,
    config: &TrainConfig,
) -> Result<SotmModel<F>> {
    config.validate()?;
    if scaler.dim() != panel.dim() {
        return Err(SotmError::DimensionMismatch {
            expected: panel.dim(),
            got: scaler.dim(),
        });
    }
    if let Some(t) = panel.slices().iter().position(Slice::is_empty) {
        return Err(SotmError::EmptySlice(panel.times()[t].to_string()));
    }
    let sigma = F::cast(config.sigma);
    let tol = F::cast(config.first_slice_tol);
    let mut arrays = Vec::with_capacity(panel.n_times());

    let first = panel.slice(0);
    let init = pca_init(first, config.units)?;
    arrays.push(train_slice(
        &init,
        first,
        sigma,
        config.first_slice_max_cycles,
        tol,
    )?);

    for slice in &panel.slices()[1..] {
        let prev = arrays.last().expect("first array pushed");
        // fixed cycle count: a zero tolerance never stops early
        let next = train_slice(prev, slice, sigma, config.cycles_per_slice, F::zero())?;
        arrays.push(next);
    }

    SotmModel::new(
        arrays,
        config.clone(),
        scaler.clone(),
        panel.times().to_vec(),
        panel.variables().to_vec(),
    )
}

/// One-dimensional SOM over the pooled data with time ignored, trained with
/// the first-slice settings of `config`.
pub fn train_pooled_baseline<F: Scalar>(
    panel: &PanelDataset<F>,
    config: &TrainConfig,
) -> Result<UnitArray<F>> {
    config.validate()?;
    let pooled = panel.pooled();
    if pooled.is_empty() {
        return Err(SotmError::EmptySlice("<pooled>".into()));
    }
    let init = pca_init(&pooled, config.units)?;
    train_slice(
        &init,
        &pooled,
        F::cast(config.sigma),
        config.first_slice_max_cycles,
        F::cast(config.first_slice_tol),
    )
}

/// One row of a radius sweep.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct SweepRow<F: Scalar> {
    pub sigma: f64,
    pub report: QualityReport<F>,
}

/// Trains one map per radius, all other settings from `base`, and measures each.
pub fn sigma_sweep<F: Scalar>(
    panel: &PanelDataset<F>,
    scaler: &Scaler<F>,
    base: &TrainConfig,
    sigmas: &[f64],
) -> Result<Vec<SweepRow<F>>> {
    if sigmas.is_empty() {
        return Err(SotmError::InvalidConfig("empty sigma list".into()));
    }
    if sigmas.windows(2).any(|w| w[0] > w[1]) {
        return Err(SotmError::InvalidConfig("sigma list must be sorted".into()));
    }
    sigmas
        .iter()
        .map(|&sigma| {
            let config = TrainConfig {
                sigma,
                ..base.clone()
            };
            let model = train_sotm(panel, scaler, &config)?;
            Ok(SweepRow {
                sigma,
                report: quality(&model, panel)?,
            })
        })
        .collect()
}
