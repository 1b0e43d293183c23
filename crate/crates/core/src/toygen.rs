//! Synthetic grouped panels with known trends and shocks.
//!
//! Every value is a logistic of a group trend plus shocks:
//!
//! ```text
//! E(r,g,t)   = w1(r) e1(g) + w2(r) e2(g) t + w3(r) e3(g,t)
//! x(r,g,j,t) = logistic(E(r,g,t) + w4(r,g) e4(r,t) + w5(r,g) e5(r,j,t))
//! ```
//!
//! with `e2 ~ U(0,1)` and every other shock standard normal. Shocks are drawn
//! once per index combination, so entities of one group share `e1`, `e2`,
//! `e3`, and every entity shares `e4` at a given variable and period.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SotmError};
use crate::panel::{PanelDataset, TimeLabel};
use crate::scalar::Scalar;

/// Weights of one generated variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyVariable {
    pub name: String,
    /// w1: spread of group intercepts.
    pub intercept: f64,
    /// w2: group slope over time. May be negative for a downward trend.
    pub slope: f64,
    /// w3: group-specific shocks per period.
    pub group_shock: f64,
    /// w4 per group: weight of the period shock common to all entities.
    pub time_shock: Vec<f64>,
    /// w5 per group: weight of the per-entity shock.
    pub entity_shock: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyWeights {
    pub groups: usize,
    pub per_group: usize,
    pub periods: usize,
    pub variables: Vec<ToyVariable>,
    pub seed: u64,
}

impl ToyWeights {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SotmError::InvalidConfig(m));
        if self.groups == 0 || self.per_group == 0 || self.periods == 0 || self.variables.is_empty()
        {
            return bad(
                "groups, entities per group, periods and variables must be at least 1".into(),
            );
        }
        for v in &self.variables {
            if v.time_shock.len() != self.groups || v.entity_shock.len() != self.groups {
                return bad(format!(
                    "variable `{}` needs one time and entity shock weight per group",
                    v.name
                ));
            }
            let magnitudes = [v.intercept, v.group_shock]
                .into_iter()
                .chain(v.time_shock.iter().copied())
                .chain(v.entity_shock.iter().copied());
            if !v.slope.is_finite() || magnitudes.clone().any(|w| !(w.is_finite() && w >= 0.0)) {
                return bad(format!("variable `{}` has an invalid weight", v.name));
            }
        }
        Ok(())
    }

    pub fn n_entities(&self) -> usize {
        self.groups * self.per_group
    }
}

/// Four variables over 5 groups of 20 entities and 10 periods.
///
/// The weights are hand-tuned so the generated variables show the intended
/// shapes: `x1` small intercept spread with a rising trend, `x2` large spread
/// with a falling trend and minor shocks, `x3` large spread and a flat trend,
/// `x4` large spread with large period shocks common to all entities.
/// These are tuned values, not published ones.
pub fn default_preset() -> ToyWeights {
    let groups = 5;
    let var = |name: &str, intercept, slope, group_shock, time_shock, entity_shock| ToyVariable {
        name: name.to_owned(),
        intercept,
        slope,
        group_shock,
        time_shock: vec![time_shock; groups],
        entity_shock: vec![entity_shock; groups],
    };
    ToyWeights {
        groups,
        per_group: 20,
        periods: 10,
        variables: vec![
            var("x1", 0.45, 0.7, 0.1, 0.1, 0.08),
            var("x2", 3.5, -0.6, 0.2, 0.1, 0.16),
            var("x3", 2.5, 0.0, 0.0, 0.05, 0.04),
            var("x4", 2.0, 0.0, 0.1, 1.3, 0.08),
        ],
        seed: 37,
    }
}

/// Generated panel plus the group of every entity.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyPanel<F: Scalar> {
    pub panel: PanelDataset<F>,
    /// Group index (0-based) per entity, aligned with `panel.entities()`.
    pub groups: Vec<usize>,
}

#[inline]
fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn generate_toy<F: Scalar>(w: &ToyWeights) -> Result<ToyPanel<F>> {
    w.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(w.seed);
    let (g_n, t_n, r_n, j_n) = (w.groups, w.periods, w.variables.len(), w.n_entities());

    let e1: Vec<f64> = (0..g_n).map(|_| rng.sample(StandardNormal)).collect();
    let e2: Vec<f64> = (0..g_n).map(|_| rng.random::<f64>()).collect();
    let mut normals =
        |n: usize| -> Vec<f64> { (0..n).map(|_| rng.sample(StandardNormal)).collect() };
    let e3: Vec<Vec<f64>> = (0..g_n).map(|_| normals(t_n)).collect();
    let e4: Vec<Vec<f64>> = (0..r_n).map(|_| normals(t_n)).collect();
    let e5: Vec<Vec<Vec<f64>>> = (0..r_n)
        .map(|_| (0..j_n).map(|_| normals(t_n)).collect())
        .collect();

    let entities: Vec<String> = (0..j_n).map(|j| format!("e{:03}", j + 1)).collect();
    let groups: Vec<usize> = (0..j_n).map(|j| j / w.per_group).collect();
    let mut records = Vec::with_capacity(j_n * t_n);
    for t in 0..t_n {
        let period = (t + 1) as f64;
        for j in 0..j_n {
            let g = groups[j];
            let row = w
                .variables
                .iter()
                .enumerate()
                .map(|(r, v)| {
                    let trend =
                        v.intercept * e1[g] + v.slope * e2[g] * period + v.group_shock * e3[g][t];
                    let z = trend + v.time_shock[g] * e4[r][t] + v.entity_shock[g] * e5[r][j][t];
                    F::cast(logistic(z))
                })
                .collect();
            records.push((entities[j].clone(), TimeLabel::Int(t as i64 + 1), row));
        }
    }
    let variables = w.variables.iter().map(|v| v.name.clone()).collect();
    Ok(ToyPanel {
        panel: PanelDataset::from_records(variables, records)?,
        groups,
    })
}

impl<F: Scalar> ToyPanel<F> {
    /// Writes the `entity,group` sidecar (groups numbered from 1).
    pub fn write_groups_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["entity", "group"])?;
        for (e, g) in self.panel.entities().iter().zip(&self.groups) {
            w.write_record([e.clone(), (g + 1).to_string()])?;
        }
        w.flush().map_err(|e| SotmError::io("<groups csv>", e))?;
        Ok(())
    }

    pub fn write_groups_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| SotmError::io(path, e))?;
        self.write_groups_csv(std::io::BufWriter::new(file))
    }
}

/// Reads an `entity,group` sidecar into `(entity, group label)` pairs.
pub fn read_groups_csv(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| SotmError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(SotmError::InvalidPanel(
                "group file rows need `entity,group`".into(),
            ));
        }
        out.push((rec[0].to_owned(), rec[1].to_owned()));
    }
    Ok(out)
}
