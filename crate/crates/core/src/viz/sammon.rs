//! One-dimensional Sammon projection of all map units.

use serde::Serialize;

use crate::error::{Result, SotmError};
use crate::linalg::principal_axis;
use crate::scalar::{dist, Scalar};

/// Tuning for [`sammon`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SammonParams {
    pub max_iter: usize,
    /// Initial step ("magic factor"); halved whenever a step would raise the stress.
    pub step: f64,
    /// Stop once the relative stress decrease of an accepted step falls below this.
    pub rel_tol: f64,
    /// Substitute for zero input distances.
    pub eps: f64,
}

impl Default for SammonParams {
    fn default() -> Self {
        SammonParams {
            max_iter: 500,
            step: 0.3,
            rel_tol: 1e-9,
            eps: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct SammonResult<F: Scalar> {
    pub coords: Vec<F>,
    pub stress: F,
    /// Stress at the start and after every accepted step.
    pub trace: Vec<F>,
}

struct Problem<F> {
    n: usize,
    /// Input distances, upper triangle row-major.
    dstar: Vec<F>,
    scale: F,
    eps: F,
}

impl<F: Scalar> Problem<F> {
    #[inline]
    fn pair(&self, p: usize, q: usize) -> usize {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        p * self.n - p * (p + 1) / 2 + (q - p - 1)
    }

    fn stress(&self, y: &[F]) -> F {
        let mut acc = F::zero();
        let mut k = 0;
        for p in 0..self.n {
            for q in p + 1..self.n {
                let ds = self.dstar[k];
                let d = (y[p] - y[q]).abs();
                let e = ds - d;
                acc = acc + e * e / ds;
                k += 1;
            }
        }
        acc / self.scale
    }

    /// Pseudo-Newton direction `-g / |h|` per coordinate.
    fn direction(&self, y: &[F]) -> Vec<F> {
        let two = F::cast(2.0);
        (0..self.n)
            .map(|p| {
                let mut grad = F::zero();
                let mut hess = F::zero();
                for q in (0..self.n).filter(|&q| q != p) {
                    let ds = self.dstar[self.pair(p, q)];
                    let diff = y[p] - y[q];
                    let d = diff.abs().max(self.eps);
                    grad = grad + (ds - d) / (ds * d) * diff;
                    // in one dimension the second derivative reduces to 1/d*
                    hess = hess + F::one() / ds;
                }
                let grad = -two / self.scale * grad;
                let hess = two / self.scale * hess;
                -grad / hess
            })
            .collect()
    }
}

/// Sammon stress of the embedding `y` of `points`.
pub fn sammon_stress<F: Scalar>(points: &[&[F]], y: &[F], eps: F) -> Result<F> {
    Ok(problem(points, eps)?.stress(y))
}

fn problem<F: Scalar>(points: &[&[F]], eps: F) -> Result<Problem<F>> {
    let n = points.len();
    let mut dstar = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut any = false;
    for p in 0..n {
        for q in p + 1..n {
            let d = dist(points[p], points[q]);
            any |= d > F::zero();
            dstar.push(if d > F::zero() { d } else { eps });
        }
    }
    if !any {
        return Err(SotmError::AllUnitsIdentical);
    }
    let scale = dstar.iter().copied().sum();
    Ok(Problem {
        n,
        dstar,
        scale,
        eps,
    })
}

/// Embeds `points` on a line by minimizing Sammon stress, starting from
/// their first-principal-component scores.
pub fn sammon<F: Scalar>(points: &[&[F]], params: &SammonParams) -> Result<SammonResult<F>> {
    let dim = points.first().map_or(0, |p| p.len());
    let eps = F::cast(params.eps);
    let prob = problem(points, eps)?;
    let axis = principal_axis(points.iter().copied(), dim).ok_or(SotmError::AllUnitsIdentical)?;
    let mut y = axis.scores;
    let mut stress = prob.stress(&y);
    let mut trace = vec![stress];
    let min_step = F::cast(params.step) * F::cast(2f64.powi(-40));

    for _ in 0..params.max_iter {
        if stress == F::zero() {
            break;
        }
        let dir = prob.direction(&y);
        let mut step = F::cast(params.step);
        let accepted = loop {
            let cand: Vec<F> = y.iter().zip(&dir).map(|(&v, &d)| v + step * d).collect();
            let s = prob.stress(&cand);
            if s <= stress {
                break Some((cand, s));
            }
            step = step / F::cast(2.0);
            if step < min_step {
                break None;
            }
        };
        let Some((cand, s)) = accepted else { break };
        let rel = (stress - s) / stress;
        y = cand;
        stress = s;
        trace.push(stress);
        if rel < F::cast(params.rel_tol) {
            break;
        }
    }
    Ok(SammonResult {
        coords: y,
        stress,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_embed_exactly() {
        let pts: [&[f64]; 2] = [&[0.0, 0.0], &[3.0, 4.0]];
        let r = sammon(&pts, &SammonParams::default()).unwrap();
        assert!(((r.coords[0] - r.coords[1]).abs() - 5.0).abs() < 1e-12);
        assert!(r.stress < 1e-20);
    }

    #[test]
    fn collinear_points_have_no_stress() {
        let raw: Vec<Vec<f64>> = (0..12)
            .map(|k| {
                let s = (k as f64).powf(1.3);
                vec![1.0 + 2.0 * s, -1.0 + s, 0.5 - 0.5 * s]
            })
            .collect();
        let pts: Vec<&[f64]> = raw.iter().map(Vec::as_slice).collect();
        let r = sammon(&pts, &SammonParams::default()).unwrap();
        assert!(r.stress <= 1e-6);
        // order along the line is preserved (up to reflection)
        let inc = r.coords.windows(2).all(|w| w[1] > w[0]);
        let dec = r.coords.windows(2).all(|w| w[1] < w[0]);
        assert!(inc || dec);
    }

    #[test]
    fn stress_never_increases() {
        // a ring does not embed in one dimension
        let raw: Vec<Vec<f64>> = (0..20)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 20.0;
                vec![a.cos(), a.sin(), 0.1 * (3.0 * a).sin()]
            })
            .collect();
        let pts: Vec<&[f64]> = raw.iter().map(Vec::as_slice).collect();
        let r = sammon(&pts, &SammonParams::default()).unwrap();
        assert!(r.trace.len() > 1);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.stress < r.trace[0]);
        assert!((sammon_stress(&pts, &r.coords, 1e-12).unwrap() - r.stress).abs() < 1e-15);
    }

    #[test]
    fn identical_points_rejected() {
        let pts: [&[f64]; 3] = [&[1.0], &[1.0], &[1.0]];
        assert!(matches!(
            sammon(&pts, &SammonParams::default()),
            Err(SotmError::AllUnitsIdentical)
        ));
    }

    #[test]
    fn duplicate_points_are_tolerated() {
        let pts: [&[f64]; 4] = [&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], &[0.0, 2.0]];
        let r = sammon(&pts, &SammonParams::default()).unwrap();
        assert!(r.coords.iter().all(|c| c.is_finite()));
        assert!(r.stress.is_finite());
    }
}
