//! Small dense helpers over generic scalars.
//!
//! Chart dimensions stay at four or below, so vectors are plain `Vec<S>` and
//! the one linear solve (metric inversion inside the Levi-Civita formula) is
//! Gaussian elimination with partial pivoting on the value lane. The solve
//! must run over tangent scalars (a connector evaluated through two extra
//! tangent levels still inverts the metric), which rules out off-the-shelf
//! f64 linear algebra here.

use crate::scalar::Scalar;
use crate::{Error, Result};

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<S: Scalar>(c: S, a: &[S]) -> Vec<S> {
    a.iter().map(|&x| c * x).collect()
}

pub fn neg<S: Scalar>(a: &[S]) -> Vec<S> {
    a.iter().map(|&x| -x).collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Bottom (real) values of a generic vector.
pub fn values<S: Scalar>(a: &[S]) -> Vec<f64> {
    a.iter().map(|x| x.value()).collect()
}

pub fn zeros<S: Scalar>(len: usize) -> Vec<S> {
    vec![S::zero(); len]
}

pub fn from_f64s<S: Scalar>(a: &[f64]) -> Vec<S> {
    a.iter().map(|&x| S::constant(x)).collect()
}

/// Euclidean norm of a real vector.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Solve `a x = b` in place by Gaussian elimination, pivoting on the largest
/// value-lane magnitude. `a` is consumed as the augmented system.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));

    let mut scale_max = 0.0f64;
    for row in &a {
        for e in row {
            scale_max = scale_max.max(e.value().abs());
        }
    }

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                a[r][col]
                    .value()
                    .abs()
                    .total_cmp(&a[s][col].value().abs())
            })
            .expect("non-empty");
        let pivot = a[pivot_row][col].value().abs();
        if pivot <= 1e-13 * scale_max || pivot == 0.0 {
            return Err(Error::SingularMatrix { pivot });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);

        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let t = factor * a[col][k];
                a[row][k] = a[row][k] - t;
            }
            let t = factor * b[col];
            b[row] = b[row] - t;
        }
    }

    let mut x = zeros::<S>(n);
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{seed, Tangent};

    #[test]
    fn solve_plain_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = vec![5.0, 10.0];
        let x = solve(a, b).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = vec![1.0, 2.0];
        assert!(matches!(solve(a, b), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn solve_differentiates_through() {
        // a(t) x(t) = b with a = [[1 + t, 0], [0, 2]]: x0(t) = 1/(1+t),
        // so dx0/dt at t = 0 is -1.
        let one = Tangent::constant(1.0);
        let t = seed(0.0, 1.0);
        let a = vec![
            vec![one + t, Tangent::constant(0.0)],
            vec![Tangent::constant(0.0), Tangent::constant(2.0)],
        ];
        let b = vec![one, Tangent::constant(4.0)];
        let x = solve(a, b).unwrap();
        assert!((x[0].val - 1.0).abs() < 1e-14);
        assert!((x[0].dot + 1.0).abs() < 1e-14);
        assert!((x[1].val - 2.0).abs() < 1e-14);
        assert_eq!(x[1].dot, 0.0);
    }

    #[test]
    fn solve_pivots_on_value_lane() {
        // Leading zero forces a row swap.
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let b = vec![3.0, 4.0];
        let x = solve(a, b).unwrap();
        assert_eq!(x, vec![4.0, 3.0]);
    }
}
