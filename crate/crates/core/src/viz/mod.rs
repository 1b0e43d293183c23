//! Visual summaries of a trained map.
//!
//! Everything here is laid out on the `M × T` unit grid: row `i` is the unit
//! position on the vertical (data) axis, column `t` the time position.

mod color;
mod render;
mod sammon;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Result, SotmError};
use crate::metrics::{quality, two_nearest, QualityReport};
use crate::model::SotmModel;
use crate::panel::{PanelDataset, TimeLabel};
use crate::scalar::Scalar;
use crate::trainer::bmu_unchecked;

pub use color::{
    b_star, blue_yellow, hex, lab_to_srgb, lab_to_srgb_unit, sequential_blue, Rgb, BLUES9,
    IDLE_GREY, UNIT_B_RANGE, UNIT_LIGHTNESS,
};
pub use render::{render_report, RenderOptions};
pub use sammon::{sammon, sammon_stress, SammonParams, SammonResult};

/// Row-major `rows × cols` matrix; serialized with its shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Grid {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for t in 0..cols {
                data.push(f(i, t));
            }
        }
        Grid { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize) -> &T {
        &self.data[i * self.cols + t]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, t: usize) -> &mut T {
        &mut self.data[i * self.cols + t]
    }

    pub fn column(&self, t: usize) -> impl Iterator<Item = &T> {
        (0..self.rows).map(move |i| self.get(i, t))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Serialize> Serialize for Grid<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let nested: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        let mut st = s.serialize_struct("Grid", 2)?;
        st.serialize_field("shape", &[self.rows, self.cols])?;
        st.serialize_field("values", &nested)?;
        st.end()
    }
}

fn check_panel<F: Scalar>(model: &SotmModel<F>, panel: &PanelDataset<F>) -> Result<()> {
    if model.dim() != panel.dim() || model.times() != panel.times() {
        return Err(SotmError::MismatchedPanel(
            "panel variables or time labels differ from the model".into(),
        ));
    }
    Ok(())
}

/// 1-D Sammon coordinates of all `M·T` units plus the final stress and trace.
pub fn sammon_1d<F: Scalar>(
    model: &SotmModel<F>,
    params: &SammonParams,
) -> Result<(Grid<F>, SammonResult<F>)> {
    let m = model.units();
    // point index = t * M + i
    let points: Vec<&[F]> = model.arrays().iter().flat_map(|a| a.units()).collect();
    let res = sammon(&points, params)?;
    let grid = Grid::from_fn(m, model.n_times(), |i, t| res.coords[t * m + i]);
    Ok((grid, res))
}

/// Blue-to-yellow colours from one global scale over all coordinates.
pub fn cielab_unit_colors<F: Scalar>(coords: &Grid<F>) -> Grid<Rgb> {
    let (lo, hi) = min_max(coords.iter().map(|v| v.to_f64_lossless()));
    coords.map(|v| blue_yellow(v.to_f64_lossless(), lo, hi))
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// One variable's values on the grid in original units, with its colours.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct FeaturePlane<F: Scalar> {
    pub variable: String,
    pub values: Grid<F>,
    pub min: F,
    pub max: F,
    pub colors: Grid<Rgb>,
}

pub fn feature_planes<F: Scalar>(model: &SotmModel<F>) -> Result<Vec<FeaturePlane<F>>> {
    let m = model.units();
    let t_n = model.n_times();
    let scaler = model.scaler();
    let original: Vec<Vec<Vec<F>>> = model
        .arrays()
        .iter()
        .map(|a| a.units().map(|u| scaler.destandardize(u)).collect())
        .collect::<Result<_>>()?;
    Ok(model
        .variables()
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let values = Grid::from_fn(m, t_n, |i, t| original[t][i][k]);
            let min = values.iter().copied().fold(F::infinity(), F::min);
            let max = values.iter().copied().fold(F::neg_infinity(), F::max);
            let (lo, hi) = (min.to_f64_lossless(), max.to_f64_lossless());
            let colors = values.map(|v| sequential_blue(v.to_f64_lossless(), lo, hi));
            FeaturePlane {
                variable: name.clone(),
                values,
                min,
                max,
                colors,
            }
        })
        .collect())
}

/// BMU hit counts per unit and time, with the idle (zero-hit) flags.
pub fn frequency_plane<F: Scalar>(
    model: &SotmModel<F>,
    panel: &PanelDataset<F>,
) -> Result<(Grid<usize>, Grid<bool>)> {
    check_panel(model, panel)?;
    let mut counts = Grid::filled(model.units(), model.n_times(), 0usize);
    for (t, (a, s)) in model.arrays().iter().zip(panel.slices()).enumerate() {
        for x in s.rows() {
            *counts.get_mut(bmu_unchecked(x, a).0, t) += 1;
        }
    }
    let idle = counts.map(|&c| c == 0);
    Ok((counts, idle))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    /// Time position (0-based).
    pub t: usize,
    pub time: TimeLabel,
    pub bmu: usize,
}

/// An entity's BMU in each slice where it is present; absent slices are gaps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub entity: String,
    pub group: Option<String>,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    /// Maximal runs of consecutive time positions.
    pub fn segments(&self) -> Vec<&[TrajectoryPoint]> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.points.len() {
            if k == self.points.len() || self.points[k].t != self.points[k - 1].t + 1 {
                out.push(&self.points[start..k]);
                start = k;
            }
        }
        out.retain(|s| !s.is_empty());
        out
    }
}

pub fn trajectories<F: Scalar>(
    model: &SotmModel<F>,
    panel: &PanelDataset<F>,
    entities: &[String],
) -> Result<Vec<Trajectory>> {
    check_panel(model, panel)?;
    entities
        .iter()
        .map(|name| {
            let e = panel
                .entity_index(name)
                .ok_or_else(|| SotmError::UnknownEntity(name.clone()))?;
            let points = panel
                .slices()
                .iter()
                .enumerate()
                .filter_map(|(t, s)| {
                    let j = s.entities().iter().position(|&x| x == e)?;
                    Some(TrajectoryPoint {
                        t,
                        time: panel.times()[t].clone(),
                        bmu: bmu_unchecked(s.row(j), model.array(t)).0,
                    })
                })
                .collect();
            Ok(Trajectory {
                entity: name.clone(),
                group: None,
                points,
            })
        })
        .collect()
}

/// A data point whose two nearest units are not adjacent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopographicEvent {
    pub t: usize,
    pub entity: String,
    pub first: usize,
    pub second: usize,
}

pub fn topographic_events<F: Scalar>(
    model: &SotmModel<F>,
    panel: &PanelDataset<F>,
) -> Result<Vec<TopographicEvent>> {
    check_panel(model, panel)?;
    let mut out = Vec::new();
    for (t, (a, s)) in model.arrays().iter().zip(panel.slices()).enumerate() {
        for (&e, x) in s.entities().iter().zip(s.rows()) {
            let (first, second) = two_nearest(x, a);
            if first.abs_diff(second) > 1 {
                out.push(TopographicEvent {
                    t,
                    entity: panel.entities()[e].clone(),
                    first,
                    second,
                });
            }
        }
    }
    Ok(out)
}

/// Units taking part in any topographic error event.
pub fn topographic_marks(m: usize, t_n: usize, events: &[TopographicEvent]) -> Grid<bool> {
    let mut g = Grid::filled(m, t_n, false);
    for ev in events {
        *g.get_mut(ev.first, ev.t) = true;
        *g.get_mut(ev.second, ev.t) = true;
    }
    g
}

/// All numeric arrays behind the rendered report.
#[derive(Clone, Debug)]
pub struct VizBundle<F: Scalar> {
    pub units: usize,
    pub times: Vec<TimeLabel>,
    pub variables: Vec<String>,
    pub sigma: f64,
    pub sammon_y: Grid<F>,
    pub sammon_stress: F,
    pub sammon_trace: Vec<F>,
    pub unit_colors: Grid<Rgb>,
    pub feature_planes: Vec<FeaturePlane<F>>,
    pub frequency: Grid<usize>,
    pub idle: Grid<bool>,
    pub topographic_events: Vec<TopographicEvent>,
    pub trajectories: Vec<Trajectory>,
    pub quality: QualityReport<F>,
}

impl<F: Scalar> Serialize for VizBundle<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let colors = self.unit_colors.map(|&c| hex(c));
        let mut st = s.serialize_struct("VizBundle", 15)?;
        st.serialize_field("shape", &[self.units, self.times.len()])?;
        st.serialize_field("times", &self.times)?;
        st.serialize_field("variables", &self.variables)?;
        st.serialize_field("sigma", &self.sigma)?;
        st.serialize_field("sammon_y", &self.sammon_y)?;
        st.serialize_field("sammon_stress", &self.sammon_stress)?;
        st.serialize_field("sammon_trace", &self.sammon_trace)?;
        st.serialize_field("unit_colors", &colors)?;
        st.serialize_field("feature_planes", &self.feature_planes)?;
        st.serialize_field("frequency", &self.frequency)?;
        st.serialize_field("idle", &self.idle)?;
        st.serialize_field("topographic_events", &self.topographic_events)?;
        st.serialize_field("trajectories", &self.trajectories)?;
        st.serialize_field("quality", &self.quality)?;
        st.end()
    }
}

impl<F: Scalar> VizBundle<F> {
    /// Computes every display for `model` on the standardized `panel`.
    ///
    /// `groups` optionally labels entities (e.g. from a toy group sidecar)
    /// for trajectory colouring.
    pub fn build(
        model: &SotmModel<F>,
        panel: &PanelDataset<F>,
        entities: &[String],
        groups: Option<&[(String, String)]>,
    ) -> Result<Self> {
        check_panel(model, panel)?;
        let (sammon_y, res) = sammon_1d(model, &SammonParams::default())?;
        let unit_colors = cielab_unit_colors(&sammon_y);
        let (frequency, idle) = frequency_plane(model, panel)?;
        let mut trajectories = trajectories(model, panel, entities)?;
        if let Some(groups) = groups {
            for tr in &mut trajectories {
                tr.group = groups
                    .iter()
                    .find(|(e, _)| *e == tr.entity)
                    .map(|(_, g)| g.clone());
            }
        }
        Ok(VizBundle {
            units: model.units(),
            times: model.times().to_vec(),
            variables: model.variables().to_vec(),
            sigma: model.config().sigma,
            sammon_y,
            sammon_stress: res.stress,
            sammon_trace: res.trace,
            unit_colors,
            feature_planes: feature_planes(model)?,
            frequency,
            idle,
            topographic_events: topographic_events(model, panel)?,
            trajectories,
            quality: quality(model, panel)?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SotmError::CorruptFile(e.to_string()))
    }
}
