//! Entity × time × variable panels and their CSV form.
//!
//! A panel is held as one [`Slice`] per time label, each a row-major
//! `N(t) × D` block. Entities may be absent from whole slices.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SotmError};
use crate::scalar::Scalar;

/// A sortable time label: either an integer period or an ISO `YYYY-MM-DD` date.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TimeLabel {
    Int(i64),
    Date(NaiveDate),
}

impl Ord for TimeLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (TimeLabel::Int(a), TimeLabel::Int(b)) => a.cmp(b),
            (TimeLabel::Date(a), TimeLabel::Date(b)) => a.cmp(b),
            (TimeLabel::Int(_), TimeLabel::Date(_)) => Ordering::Less,
            (TimeLabel::Date(_), TimeLabel::Int(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for TimeLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeLabel::Int(v) => write!(f, "{v}"),
            TimeLabel::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
        }
    }
}

impl FromStr for TimeLabel {
    type Err = SotmError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            return Ok(TimeLabel::Int(v));
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .map(TimeLabel::Date)
            .map_err(|_| SotmError::InvalidPanel(format!("unparseable time label `{s}`")))
    }
}

impl Serialize for TimeLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every observation at one time label: rows of length `D` plus the entity
/// index each row belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice<F> {
    dim: usize,
    entities: Vec<usize>,
    values: Vec<F>,
}

impl<F: Scalar> Slice<F> {
    pub fn new(dim: usize, entities: Vec<usize>, values: Vec<F>) -> Result<Self> {
        if dim == 0 {
            return Err(SotmError::InvalidPanel(
                "dimension must be at least 1".into(),
            ));
        }
        if values.len() != entities.len() * dim {
            return Err(SotmError::DimensionMismatch {
                expected: entities.len() * dim,
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(SotmError::InvalidPanel(format!("non-finite value {v}")));
        }
        Ok(Slice {
            dim,
            entities,
            values,
        })
    }

    /// Builds a slice from anonymous rows; entity indices are `0..rows.len()`.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != dim) {
            return Err(SotmError::DimensionMismatch {
                expected: dim,
                got: r.len(),
            });
        }
        Slice::new(
            dim,
            (0..rows.len()).collect(),
            rows.iter().flatten().copied().collect(),
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.entities.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, j: usize) -> &[F] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, F> {
        self.values.chunks_exact(self.dim)
    }

    /// Entity index (into [`PanelDataset::entities`]) of each row.
    pub fn entities(&self) -> &[usize] {
        &self.entities
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub(crate) fn map_values(&self, mut f: impl FnMut(usize, F) -> F) -> Slice<F> {
        let dim = self.dim;
        Slice {
            dim,
            entities: self.entities.clone(),
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| f(k % dim, v))
                .collect(),
        }
    }
}

/// How empty CSV cells are treated on ingestion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MissingPolicy {
    #[default]
    Reject,
    /// Fill each missing cell with the pooled mean of its variable.
    ImputeMean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PanelDataset<F> {
    entities: Vec<String>,
    times: Vec<TimeLabel>,
    variables: Vec<String>,
    slices: Vec<Slice<F>>,
}

impl<F: Scalar> PanelDataset<F> {
    pub fn new(
        entities: Vec<String>,
        times: Vec<TimeLabel>,
        variables: Vec<String>,
        slices: Vec<Slice<F>>,
    ) -> Result<Self> {
        if variables.is_empty() {
            return Err(SotmError::InvalidPanel("no variables".into()));
        }
        if times.is_empty() {
            return Err(SotmError::InvalidPanel("no time slices".into()));
        }
        if times.len() != slices.len() {
            return Err(SotmError::InvalidPanel(format!(
                "{} time labels but {} slices",
                times.len(),
                slices.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SotmError::InvalidPanel(
                "time labels must be unique and ascending".into(),
            ));
        }
        for (t, s) in times.iter().zip(&slices) {
            if s.is_empty() {
                return Err(SotmError::EmptySlice(t.to_string()));
            }
            if s.dim() != variables.len() {
                return Err(SotmError::DimensionMismatch {
                    expected: variables.len(),
                    got: s.dim(),
                });
            }
            if let Some(&e) = s.entities().iter().find(|&&e| e >= entities.len()) {
                return Err(SotmError::InvalidPanel(format!(
                    "entity index {e} out of range at time {t}"
                )));
            }
            let mut seen = s.entities().to_vec();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(SotmError::InvalidPanel(format!(
                    "duplicate entity at time {t}"
                )));
            }
        }
        Ok(PanelDataset {
            entities,
            times,
            variables,
            slices,
        })
    }

    /// Assembles a panel from `(entity, time, row)` records in any order.
    ///
    /// Entities are indexed in order of first appearance; rows within a slice
    /// keep their record order.
    pub fn from_records<I>(variables: Vec<String>, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, TimeLabel, Vec<F>)>,
    {
        let dim = variables.len();
        let mut entity_ix: HashMap<String, usize> = HashMap::new();
        let mut entities = Vec::new();
        let mut by_time: BTreeMap<TimeLabel, (Vec<usize>, Vec<F>)> = BTreeMap::new();
        for (entity, time, row) in records {
            if row.len() != dim {
                return Err(SotmError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            let e = *entity_ix.entry(entity.clone()).or_insert_with(|| {
                entities.push(entity);
                entities.len() - 1
            });
            let (ents, vals) = by_time.entry(time).or_default();
            ents.push(e);
            vals.extend(row);
        }
        if let (Some(a), Some(b)) = (by_time.keys().next(), by_time.keys().last()) {
            if std::mem::discriminant(a) != std::mem::discriminant(b) {
                return Err(SotmError::InvalidPanel(
                    "time column mixes integer and date labels".into(),
                ));
            }
        }
        let (times, slices): (Vec<_>, Vec<_>) = by_time.into_iter().unzip();
        let slices = slices
            .into_iter()
            .map(|(ents, vals)| Slice::new(dim, ents, vals))
            .collect::<Result<Vec<_>>>()?;
        PanelDataset::new(entities, times, variables, slices)
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn times(&self) -> &[TimeLabel] {
        &self.times
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn slices(&self) -> &[Slice<F>] {
        &self.slices
    }

    /// Ω(t) for the `t`-th time label (0-based).
    pub fn slice(&self, t: usize) -> &Slice<F> {
        &self.slices[t]
    }

    /// Number of time slices `T`.
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// Number of variables `D`.
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Pooled row count `N = Σ_t N(t)`.
    pub fn n_rows(&self) -> usize {
        self.slices.iter().map(Slice::len).sum()
    }

    pub fn entity_index(&self, name: &str) -> Option<usize> {
        self.entities.iter().position(|e| e == name)
    }

    /// All rows of all slices, in time order.
    pub fn pooled_rows(&self) -> impl Iterator<Item = &[F]> {
        self.slices.iter().flat_map(Slice::rows)
    }

    /// The pooled data Ω as a single slice (time ignored).
    pub fn pooled(&self) -> Slice<F> {
        Slice {
            dim: self.dim(),
            entities: self
                .slices
                .iter()
                .flat_map(|s| s.entities.iter().copied())
                .collect(),
            values: self
                .slices
                .iter()
                .flat_map(|s| s.values.iter().copied())
                .collect(),
        }
    }

    /// Applies `f(variable, value)` to every cell.
    pub(crate) fn map_values(&self, mut f: impl FnMut(usize, F) -> F) -> PanelDataset<F> {
        PanelDataset {
            entities: self.entities.clone(),
            times: self.times.clone(),
            variables: self.variables.clone(),
            slices: self.slices.iter().map(|s| s.map_values(&mut f)).collect(),
        }
    }

    pub fn read_csv<R: Read>(reader: R, policy: MissingPolicy) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 3
            || !header[0].eq_ignore_ascii_case("entity")
            || !header[1].eq_ignore_ascii_case("time")
        {
            return Err(SotmError::InvalidPanel(
                "header must be `entity,time,<var1>,...`".into(),
            ));
        }
        let variables: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();
        let dim = variables.len();

        let mut raw: Vec<(String, TimeLabel, Vec<Option<f64>>)> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != dim + 2 {
                return Err(SotmError::InvalidPanel(format!(
                    "data row {} has {} fields, expected {}",
                    line + 1,
                    rec.len(),
                    dim + 2
                )));
            }
            let time: TimeLabel = rec[1].parse()?;
            let mut row = Vec::with_capacity(dim);
            for (k, cell) in rec.iter().skip(2).enumerate() {
                if cell.is_empty() {
                    if policy == MissingPolicy::Reject {
                        return Err(SotmError::MissingValue {
                            entity: rec[0].to_owned(),
                            time: time.to_string(),
                            variable: variables[k].clone(),
                        });
                    }
                    row.push(None);
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| {
                    SotmError::InvalidPanel(format!(
                        "non-numeric value `{cell}` for `{}` in data row {}",
                        variables[k],
                        line + 1
                    ))
                })?;
                if !v.is_finite() {
                    return Err(SotmError::InvalidPanel(format!(
                        "non-finite value for `{}` in data row {}",
                        variables[k],
                        line + 1
                    )));
                }
                row.push(Some(v));
            }
            raw.push((rec[0].to_owned(), time, row));
        }

        let mut fill = vec![0.0; dim];
        if policy == MissingPolicy::ImputeMean {
            for (k, slot) in fill.iter_mut().enumerate() {
                let present: Vec<f64> = raw.iter().filter_map(|r| r.2[k]).collect();
                if present.is_empty() {
                    return Err(SotmError::InvalidPanel(format!(
                        "variable `{}` has no observed values",
                        variables[k]
                    )));
                }
                *slot = present.iter().sum::<f64>() / present.len() as f64;
            }
        }

        let mut seen = std::collections::HashSet::new();
        for (e, t, _) in &raw {
            if !seen.insert((e.as_str(), t)) {
                return Err(SotmError::InvalidPanel(format!(
                    "duplicate row for entity `{e}` at time `{t}`"
                )));
            }
        }

        let records = raw.into_iter().map(|(e, t, row)| {
            let row = row
                .into_iter()
                .enumerate()
                .map(|(k, v)| F::cast(v.unwrap_or(fill[k])))
                .collect();
            (e, t, row)
        });
        PanelDataset::from_records(variables, records)
    }

    pub fn read_csv_path(path: impl AsRef<Path>, policy: MissingPolicy) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| SotmError::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), policy)
    }

    /// Writes the panel in `entity,time,<vars>` form, one row per observation,
    /// ordered by time then by slice row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["entity".to_owned(), "time".to_owned()];
        header.extend(self.variables.iter().cloned());
        w.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.slices) {
            let time = t.to_string();
            for (&e, row) in s.entities().iter().zip(s.rows()) {
                let mut rec = vec![self.entities[e].clone(), time.clone()];
                rec.extend(row.iter().map(|v| v.to_f64_lossless().to_string()));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| SotmError::io("<csv>", e))?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| SotmError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<PanelDataset<f64>> {
        PanelDataset::read_csv(s.as_bytes(), MissingPolicy::Reject)
    }

    #[test]
    fn reads_and_sorts_integer_times() {
        let p = parse("entity,time,a,b\nx,2001,1,2\ny,2000,3,4\nx,2000,5,6\n").unwrap();
        assert_eq!(p.times(), &[TimeLabel::Int(2000), TimeLabel::Int(2001)]);
        assert_eq!(p.entities(), &["x", "y"]);
        assert_eq!(p.slice(0).len(), 2);
        assert_eq!(p.slice(0).row(0), &[3.0, 4.0]);
        assert_eq!(p.slice(1).row(0), &[1.0, 2.0]);
        assert_eq!(p.n_rows(), 3);
    }

    #[test]
    fn iso_dates_compare_chronologically() {
        let p = parse("entity,time,a\nx,2010-02-01,1\nx,2009-12-31,2\n").unwrap();
        assert_eq!(p.times()[0].to_string(), "2009-12-31");
        assert!(p.times()[0] < p.times()[1]);
    }

    #[test]
    fn mixed_time_kinds_rejected() {
        assert!(parse("entity,time,a\nx,2010-02-01,1\nx,3,2\n").is_err());
    }

    #[test]
    fn missing_cell_rejected_by_default() {
        let err = parse("entity,time,a,b\nx,1,1,\ny,1,2,3\n").unwrap_err();
        assert!(matches!(err, SotmError::MissingValue { ref variable, .. } if variable == "b"));
    }

    #[test]
    fn missing_cell_mean_imputed_when_asked() {
        let p: PanelDataset<f64> = PanelDataset::read_csv(
            "entity,time,a,b\nx,1,1,\ny,1,2,3\nz,1,4,5\n".as_bytes(),
            MissingPolicy::ImputeMean,
        )
        .unwrap();
        assert_eq!(p.slice(0).row(0), &[1.0, 4.0]);
    }

    #[test]
    fn duplicate_entity_time_rejected() {
        assert!(parse("entity,time,a\nx,1,1\nx,1,2\n").is_err());
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse("id,time,a\nx,1,1\n").is_err());
        assert!(parse("entity,time\nx,1\n").is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(parse("entity,time,a\nx,1,NaN\n").is_err());
        assert!(parse("entity,time,a\nx,1,inf\n").is_err());
    }

    #[test]
    fn unbalanced_panel_keeps_present_rows() {
        let p = parse("entity,time,a\nx,1,1\ny,1,2\nx,2,3\n").unwrap();
        assert_eq!(p.slice(1).len(), 1);
        assert_eq!(p.slice(1).entities(), &[0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p =
            parse("entity,time,a,b\nx,1,0.1,2e-7\ny,1,-3.3333333333333335,4\nx,2,5,6\n").unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = PanelDataset::<f64>::read_csv(buf.as_slice(), MissingPolicy::Reject).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn pooled_union_of_slices() {
        let p = parse("entity,time,a\nx,1,1\ny,1,2\nx,2,3\ny,3,4\n").unwrap();
        let pooled = p.pooled();
        assert_eq!(pooled.len(), p.n_rows());
        let mut from_slices: Vec<f64> = p
            .slices()
            .iter()
            .flat_map(|s| s.values().to_vec())
            .collect();
        let mut all = pooled.values().to_vec();
        from_slices.sort_by(f64::total_cmp);
        all.sort_by(f64::total_cmp);
        assert_eq!(from_slices, all);
    }
}
