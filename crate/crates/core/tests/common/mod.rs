// Brute-force reference implementations and fixtures shared by the
// integration tests. Written from the definitions, deliberately naive:
// full distance tables, raw Gaussian weights, no shared code with the crate.
#![allow(dead_code)]

use rand::Rng;
use sotm::{Panel, Scaler, TimeLabel};

pub type Units = Vec<Vec<f64>>;

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn gauss(i: usize, c: usize, sigma: f64) -> f64 {
    let d = i as f64 - c as f64;
    (-d * d / (2.0 * sigma * sigma)).exp()
}

/// Index of the nearest unit; the first one wins ties.
pub fn bmu(x: &[f64], units: &Units) -> usize {
    let d: Vec<f64> = units.iter().map(|u| sq(x, u)).collect();
    let mut best = 0;
    for i in 1..d.len() {
        if d[i] < d[best] {
            best = i;
        }
    }
    best
}

/// Nearest and second-nearest unit, by a stable sort on distance.
pub fn first_two(x: &[f64], units: &Units) -> (usize, usize) {
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by(|&a, &b| sq(x, &units[a]).partial_cmp(&sq(x, &units[b])).unwrap());
    (order[0], order[1])
}

pub fn batch(units: &Units, rows: &Units, sigma: f64) -> Units {
    let c: Vec<usize> = rows.iter().map(|x| bmu(x, units)).collect();
    (0..units.len())
        .map(|i| {
            let d = units[i].len();
            let mut num = vec![0.0; d];
            let mut den = 0.0;
            for (x, &cx) in rows.iter().zip(&c) {
                let h = gauss(i, cx, sigma);
                for k in 0..d {
                    num[k] += h * x[k];
                }
                den += h;
            }
            num.iter().map(|v| v / den).collect()
        })
        .collect()
}

pub fn qe(units: &Units, rows: &Units) -> f64 {
    rows.iter()
        .map(|x| sq(x, &units[bmu(x, units)]).sqrt())
        .sum::<f64>()
        / rows.len() as f64
}

pub fn dm(units: &Units, rows: &Units, sigma: f64) -> f64 {
    let mut total = 0.0;
    for x in rows {
        let c = bmu(x, units);
        for (i, u) in units.iter().enumerate() {
            total += gauss(i, c, sigma) * sq(x, u);
        }
    }
    total / (rows.len() * units.len()) as f64
}

pub fn te(units: &Units, rows: &Units) -> f64 {
    let bad = rows
        .iter()
        .filter(|x| {
            let (a, b) = first_two(x, units);
            (a as i64 - b as i64).abs() != 1
        })
        .count();
    bad as f64 / rows.len() as f64
}

pub fn sc(arrays: &[Units]) -> Vec<f64> {
    (1..arrays.len())
        .map(|t| {
            let m = arrays[t].len();
            (0..m)
                .map(|i| sq(&arrays[t][i], &arrays[t - 1][i]).sqrt())
                .sum::<f64>()
                / m as f64
        })
        .collect()
}

pub fn random_units(rng: &mut impl Rng, m: usize, d: usize) -> Units {
    (0..m)
        .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

/// Panel with integer times `1..=T`; `rows[t][j]` belongs to entity `j`.
pub fn panel(rows: &[Units]) -> Panel {
    let d = rows[0][0].len();
    let vars = (1..=d).map(|k| format!("v{k}")).collect();
    let records = rows.iter().enumerate().flat_map(|(t, slice)| {
        slice
            .iter()
            .enumerate()
            .map(move |(j, r)| (format!("e{j:03}"), TimeLabel::Int(t as i64 + 1), r.clone()))
    });
    Panel::from_records(vars, records).unwrap()
}

/// Identity scaler for panels that are already on the working scale.
pub fn identity_scaler(d: usize) -> Scaler<f64> {
    Scaler {
        means: vec![0.0; d],
        stds: vec![1.0; d],
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
