//! Small dense symmetric eigensolver and principal-axis helper.

use crate::scalar::Scalar;

/// Eigen-decomposition of a symmetric `n × n` row-major matrix by cyclic
/// Jacobi rotations. Returns eigenvalues and eigenvectors (as rows of the
/// second result), sorted by descending eigenvalue.
pub(crate) fn symmetric_eigen<F: Scalar>(a: &[F], n: usize) -> (Vec<F>, Vec<Vec<F>>) {
    assert_eq!(a.len(), n * n);
    let mut a = a.to_vec();
    let mut v = vec![F::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = F::one();
    }
    let two = F::cast(2.0);
    for _sweep in 0..100 {
        let off: F = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        let scale: F = a.iter().map(|&x| x * x).sum();
        if off <= F::epsilon() * F::epsilon() * scale || off == F::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    (values, vectors)
}

/// First principal axis of a set of rows.
pub(crate) struct PrincipalAxis<F> {
    pub mean: Vec<F>,
    /// Unit-norm direction, signed so its largest-magnitude loading is positive.
    pub direction: Vec<F>,
    /// Projection of each row onto `direction`, centered.
    pub scores: Vec<F>,
}

/// Returns `None` when all rows coincide (zero covariance).
pub(crate) fn principal_axis<'a, F: Scalar>(
    rows: impl Iterator<Item = &'a [F]> + Clone,
    dim: usize,
) -> Option<PrincipalAxis<F>> {
    let n = rows.clone().count();
    if n == 0 {
        return None;
    }
    let nf = F::cast(n as f64);
    let mut mean = vec![F::zero(); dim];
    for r in rows.clone() {
        for (m, &x) in mean.iter_mut().zip(r) {
            *m = *m + x;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m / nf);

    let mut cov = vec![F::zero(); dim * dim];
    for r in rows.clone() {
        for p in 0..dim {
            let cp = r[p] - mean[p];
            for q in p..dim {
                cov[p * dim + q] = cov[p * dim + q] + cp * (r[q] - mean[q]);
            }
        }
    }
    for p in 0..dim {
        for q in p..dim {
            let c = cov[p * dim + q] / nf;
            cov[p * dim + q] = c;
            cov[q * dim + p] = c;
        }
    }
    if cov.iter().all(|&c| c == F::zero()) {
        return None;
    }

    let (_, vectors) = symmetric_eigen(&cov, dim);
    let mut direction = vectors.into_iter().next()?;
    let norm = direction.iter().map(|&x| x * x).sum::<F>().sqrt();
    direction.iter_mut().for_each(|x| *x = *x / norm);
    let lead = direction.iter().enumerate().fold(0, |best, (k, x)| {
        if x.abs() > direction[best].abs() {
            k
        } else {
            best
        }
    });
    if direction[lead] < F::zero() {
        direction.iter_mut().for_each(|x| *x = -*x);
    }
    let scores = rows
        .map(|r| {
            r.iter()
                .zip(&mean)
                .zip(&direction)
                .map(|((&x, &m), &v)| (x - m) * v)
                .sum()
        })
        .collect();
    Some(PrincipalAxis {
        mean,
        direction,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    #[test]
    fn jacobi_matches_nalgebra() {
        let a = [4.0, 1.0, -2.0, 1.0, 3.0, 0.5, -2.0, 0.5, 5.0];
        let (vals, vecs) = symmetric_eigen(&a, 3);
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(3, 3, &a));
        let mut ref_vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ref_vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in vals.iter().zip(&ref_vals) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        // A v = λ v
        for (l, v) in vals.iter().zip(&vecs) {
            for r in 0..3 {
                let av: f64 = (0..3).map(|c| a[r * 3 + c] * v[c]).sum();
                assert!((av - l * v[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_is_already_solved() {
        let (vals, _) = symmetric_eigen(&[1.0, 0.0, 0.0, 3.0], 2);
        assert_eq!(vals, vec![3.0, 1.0]);
    }

    #[test]
    fn axis_sign_is_fixed() {
        let rows = [vec![1.0f64, -2.0], vec![-1.0, 2.0], vec![0.5, -1.0]];
        let ax = principal_axis(rows.iter().map(Vec::as_slice), 2).unwrap();
        let lead = if ax.direction[0].abs() > ax.direction[1].abs() {
            0
        } else {
            1
        };
        assert!(ax.direction[lead] > 0.0);
        assert!((ax.direction[1] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn identical_rows_have_no_axis() {
        let rows = [vec![1.0, 2.0], vec![1.0, 2.0]];
        assert!(principal_axis::<f64>(rows.iter().map(Vec::as_slice), 2).is_none());
    }
}
