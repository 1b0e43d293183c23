//! Unit arrays, training configuration and the trained map with its JSON file form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SotmError};
use crate::panel::TimeLabel;
use crate::scalar::Scalar;
use crate::scale::Scaler;

pub const MODEL_SCHEMA_VERSION: u32 = 1;
const MODEL_FORMAT: &str = "sotm-model";

/// One-dimensional array of `M` reference vectors, stored row-major `M × D`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitArray<F> {
    dim: usize,
    values: Vec<F>,
}

impl<F: Scalar> UnitArray<F> {
    pub fn new(dim: usize, values: Vec<F>) -> Result<Self> {
        if dim == 0 || values.is_empty() || !values.len().is_multiple_of(dim) {
            return Err(SotmError::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        Ok(UnitArray { dim, values })
    }

    pub fn from_units(units: &[Vec<F>]) -> Result<Self> {
        let dim = units.first().map_or(0, Vec::len);
        if let Some(u) = units.iter().find(|u| u.len() != dim) {
            return Err(SotmError::DimensionMismatch {
                expected: dim,
                got: u.len(),
            });
        }
        UnitArray::new(dim, units.iter().flatten().copied().collect())
    }

    /// Number of units `M`.
    #[inline]
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn unit(&self, i: usize) -> &[F] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub(crate) fn unit_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn units(&self) -> std::slice::ChunksExact<'_, F> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn to_units(&self) -> Vec<Vec<F>> {
        self.units().map(<[F]>::to_vec).collect()
    }

    /// Largest absolute per-component difference to `other`.
    pub fn max_displacement(&self, other: &UnitArray<F>) -> F {
        self.values
            .iter()
            .zip(&other.values)
            .fold(F::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Settings for one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Vertical unit count `M`.
    pub units: usize,
    /// Gaussian neighborhood radius, constant over time.
    pub sigma: f64,
    pub first_slice_max_cycles: usize,
    /// Convergence threshold on the largest per-component displacement of the first array.
    pub first_slice_tol: f64,
    pub cycles_per_slice: usize,
    /// Recorded for provenance; training itself draws no random numbers.
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(units: usize, sigma: f64) -> Self {
        TrainConfig {
            units,
            sigma,
            first_slice_max_cycles: 100,
            first_slice_tol: 1e-6,
            cycles_per_slice: 10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SotmError::InvalidConfig(m));
        if self.units < 2 {
            return bad(format!("unit count must be at least 2, got {}", self.units));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!(
                "sigma must be finite and positive, got {}",
                self.sigma
            ));
        }
        if self.first_slice_max_cycles < 1 || self.cycles_per_slice < 1 {
            return bad("cycle counts must be at least 1".into());
        }
        if !(self.first_slice_tol.is_finite() && self.first_slice_tol > 0.0) {
            return bad(format!(
                "first-slice tolerance must be positive, got {}",
                self.first_slice_tol
            ));
        }
        Ok(())
    }
}

/// A trained Self-Organizing Time Map: one unit array per time label, in
/// ascending time order, all in standardized space.
#[derive(Clone, Debug, PartialEq)]
pub struct SotmModel<F: Scalar> {
    arrays: Vec<UnitArray<F>>,
    config: TrainConfig,
    scaler: Scaler<F>,
    times: Vec<TimeLabel>,
    variables: Vec<String>,
}

impl<F: Scalar> SotmModel<F> {
    pub fn new(
        arrays: Vec<UnitArray<F>>,
        config: TrainConfig,
        scaler: Scaler<F>,
        times: Vec<TimeLabel>,
        variables: Vec<String>,
    ) -> Result<Self> {
        let model = SotmModel {
            arrays,
            config,
            scaler,
            times,
            variables,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(SotmError::InvalidPanel(m));
        if self.arrays.is_empty() {
            return invalid("model has no unit arrays".into());
        }
        if self.arrays.len() != self.times.len() {
            return invalid(format!(
                "{} arrays for {} time labels",
                self.arrays.len(),
                self.times.len()
            ));
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("time labels must be ascending".into());
        }
        let d = self.variables.len();
        if self.scaler.dim() != d || self.scaler.stds.len() != d {
            return Err(SotmError::DimensionMismatch {
                expected: d,
                got: self.scaler.dim(),
            });
        }
        let m = self.config.units;
        if m < 2 {
            return invalid(format!("unit count must be at least 2, got {m}"));
        }
        for a in &self.arrays {
            if a.dim() != d || a.len() != m {
                return invalid(format!(
                    "array of {}x{} units, expected {m}x{d}",
                    a.len(),
                    a.dim()
                ));
            }
            if !a.is_finite() {
                return invalid("non-finite reference vector".into());
            }
        }
        Ok(())
    }

    pub fn arrays(&self) -> &[UnitArray<F>] {
        &self.arrays
    }

    /// A(t) for the `t`-th time label (0-based).
    pub fn array(&self, t: usize) -> &UnitArray<F> {
        &self.arrays[t]
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn scaler(&self) -> &Scaler<F> {
        &self.scaler
    }

    pub fn times(&self) -> &[TimeLabel] {
        &self.times
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn units(&self) -> usize {
        self.config.units
    }

    pub fn n_times(&self) -> usize {
        self.arrays.len()
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn sigma(&self) -> F {
        F::cast(self.config.sigma)
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            schema_version: MODEL_SCHEMA_VERSION,
            config: self.config.clone(),
            variables: self.variables.clone(),
            times: self.times.clone(),
            scaler: ScalerFile {
                means: self
                    .scaler
                    .means
                    .iter()
                    .map(|v| v.to_f64_lossless())
                    .collect(),
                stds: self
                    .scaler
                    .stds
                    .iter()
                    .map(|v| v.to_f64_lossless())
                    .collect(),
            },
            arrays: self
                .arrays
                .iter()
                .map(|a| {
                    a.units()
                        .map(|u| u.iter().map(|v| v.to_f64_lossless()).collect())
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| SotmError::CorruptFile(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let probe: VersionProbe =
            serde_json::from_str(s).map_err(|e| SotmError::CorruptFile(e.to_string()))?;
        if probe.format.as_deref() != Some(MODEL_FORMAT) {
            return Err(SotmError::CorruptFile("not a sotm model file".into()));
        }
        match probe.schema_version {
            Some(MODEL_SCHEMA_VERSION) => {}
            Some(found) => {
                return Err(SotmError::SchemaVersionMismatch {
                    found,
                    expected: MODEL_SCHEMA_VERSION,
                })
            }
            None => return Err(SotmError::CorruptFile("missing schema_version".into())),
        }
        let file: ModelFile =
            serde_json::from_str(s).map_err(|e| SotmError::CorruptFile(e.to_string()))?;
        let cast = |v: &[f64]| v.iter().map(|&x| F::cast(x)).collect::<Vec<F>>();
        let arrays = file
            .arrays
            .iter()
            .map(|a| {
                let units: Vec<Vec<F>> = a.iter().map(|u| cast(u)).collect();
                UnitArray::from_units(&units)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| SotmError::CorruptFile(e.to_string()))?;
        SotmModel::new(
            arrays,
            file.config,
            Scaler {
                means: cast(&file.scaler.means),
                stds: cast(&file.scaler.stds),
            },
            file.times,
            file.variables,
        )
        .map_err(|e| SotmError::CorruptFile(e.to_string()))
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        let s = self.to_json()?;
        w.write_all(s.as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| SotmError::io("<model>", e))
    }

    pub fn read_json<R: Read>(mut r: R) -> Result<Self> {
        let mut s = String::new();
        r.read_to_string(&mut s)
            .map_err(|e| SotmError::io("<model>", e))?;
        Self::from_json(&s)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s).map_err(|e| SotmError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| SotmError::io(path, e))?;
        Self::from_json(&s)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format: Option<String>,
    schema_version: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct ScalerFile {
    means: Vec<f64>,
    stds: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    schema_version: u32,
    config: TrainConfig,
    variables: Vec<String>,
    times: Vec<TimeLabel>,
    scaler: ScalerFile,
    /// `[t][i][k]`: time, unit, variable.
    arrays: Vec<Vec<Vec<f64>>>,
}
