//! Pooled z-score standardization.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SotmError};
use crate::panel::PanelDataset;
use crate::scalar::Scalar;

/// Per-variable mean and sample standard deviation over the pooled panel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Scaler<F: Scalar> {
    pub means: Vec<F>,
    pub stds: Vec<F>,
}

impl<F: Scalar> Scaler<F> {
    /// Fits mean and sample std (denominator `N - 1`) of every variable over
    /// all rows of all slices.
    pub fn fit(panel: &PanelDataset<F>) -> Result<Self> {
        let n = panel.n_rows();
        if n < 2 {
            return Err(SotmError::TooFewRows(n));
        }
        let d = panel.dim();
        let nf = F::cast(n as f64);
        let mut means = vec![F::zero(); d];
        for row in panel.pooled_rows() {
            for (m, &v) in means.iter_mut().zip(row) {
                *m = *m + v;
            }
        }
        means.iter_mut().for_each(|m| *m = *m / nf);

        let mut ss = vec![F::zero(); d];
        for row in panel.pooled_rows() {
            for k in 0..d {
                let c = row[k] - means[k];
                ss[k] = ss[k] + c * c;
            }
        }
        let denom = F::cast((n - 1) as f64);
        let stds: Vec<F> = ss.into_iter().map(|s| (s / denom).sqrt()).collect();
        if let Some(k) = stds.iter().position(|s| !(*s > F::zero())) {
            return Err(SotmError::ZeroVarianceVariable(
                panel.variables()[k].clone(),
            ));
        }
        Ok(Scaler { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn standardize(&self, v: &[F]) -> Result<Vec<F>> {
        self.check(v.len())?;
        Ok(v.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect())
    }

    pub fn destandardize(&self, v: &[F]) -> Result<Vec<F>> {
        self.check(v.len())?;
        Ok(v.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&z, (&m, &s))| z * s + m)
            .collect())
    }

    /// Maps a panel in original units into standardized space.
    pub fn apply(&self, panel: &PanelDataset<F>) -> Result<PanelDataset<F>> {
        self.check(panel.dim())?;
        Ok(panel.map_values(|k, x| (x - self.means[k]) / self.stds[k]))
    }

    fn check(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(SotmError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

/// Standardizes every variable to pooled mean 0 and sample std 1.
pub fn standardize<F: Scalar>(panel: &PanelDataset<F>) -> Result<(PanelDataset<F>, Scaler<F>)> {
    let scaler = Scaler::fit(panel)?;
    let out = scaler.apply(panel)?;
    Ok((out, scaler))
}

pub fn destandardize<F: Scalar>(v: &[F], scaler: &Scaler<F>) -> Result<Vec<F>> {
    scaler.destandardize(v)
}
