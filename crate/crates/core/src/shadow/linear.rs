//! Minimum-norm corrections for the linearized orbit equation
//! `d_{j+1} - A_j d_j = b_j` through the block-tridiagonal normal equations.

use std::ops::{Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};

fn inv(m: &Mat3) -> Result<Mat3> {
    m.try_inverse().ok_or(Error::SingularRestriction(0.0))
}

/// Block LU of a symmetric positive definite block-tridiagonal matrix with
/// diagonal `diag` and sub-diagonal `lower` (`lower[j]` couples `j+1` to `j`).
struct TriFactor {
    dinv: Vec<Mat3>,
    /// `lower[j-1] * dinv[j-1]`, for `j >= 1`.
    w: Vec<Mat3>,
    upper: Vec<Mat3>,
}

impl TriFactor {
    fn new(diag: &[Mat3], lower: &[Mat3]) -> Result<Self> {
        let n = diag.len();
        let mut dinv = Vec::with_capacity(n);
        let mut w = Vec::with_capacity(n.saturating_sub(1));
        let upper: Vec<Mat3> = lower.iter().map(|l| l.transpose()).collect();
        dinv.push(inv(&diag[0])?);
        for j in 1..n {
            let wj = lower[j - 1] * dinv[j - 1];
            dinv.push(inv(&(diag[j] - wj * upper[j - 1]))?);
            w.push(wj);
        }
        Ok(TriFactor { dinv, w, upper })
    }

    fn solve<S>(&self, rhs: &mut [S])
    where
        S: Copy + Sub<Output = S>,
        Mat3: Mul<S, Output = S>,
    {
        let n = rhs.len();
        for j in 1..n {
            rhs[j] = rhs[j] - self.w[j - 1] * rhs[j - 1];
        }
        rhs[n - 1] = self.dinv[n - 1] * rhs[n - 1];
        for j in (0..n - 1).rev() {
            rhs[j] = self.dinv[j] * (rhs[j] - self.upper[j] * rhs[j + 1]);
        }
    }
}

/// Solves `J d = b` with `J` the operator `(J d)_j = d_{j+1} - A_j d_j`,
/// `j = 0..q-1` for `q = a.len()`.
///
/// Open windows have `q + 1` unknowns and get the minimum-norm solution;
/// periodic windows identify `d_q` with `d_0` and have a unique solution.
/// Blocks are padded 3x3 matrices whose unused rows and columns are zero.
pub(crate) fn solve_orbit_correction(a: &[Mat3], b: &[Vec3], periodic: bool) -> Result<Vec<Vec3>> {
    let q = a.len();
    assert_eq!(q, b.len());
    assert!(q > 0);
    if periodic && q <= 2 {
        return dense_periodic(a, b);
    }
    // Normal equations J J^T y = b; blocks (j,j) = A_j A_j^T + I,
    // (j+1, j) = -A_{j+1}, and the corner (0, q-1) = -A_0 when periodic.
    let diag: Vec<Mat3> = a.iter().map(|m| m * m.transpose() + Mat3::identity()).collect();
    let y = if periodic {
        let n = q - 1;
        let lower: Vec<Mat3> = a[1..n].iter().map(|m| -m).collect();
        let t = TriFactor::new(&diag[..n], &lower)?;
        // Border column: rows 0 and n-1 of block column n.
        let mut border = vec![Mat3::zeros(); n];
        border[0] = -a[0];
        border[n - 1] += -a[n].transpose();
        let mut u: Vec<Vec3> = b[..n].to_vec();
        t.solve(&mut border);
        t.solve(&mut u);
        let bt0 = -a[0].transpose();
        let btn = -a[n];
        let s = diag[n] - (bt0 * border[0] + btn * border[n - 1]);
        let rhs = b[n] - (bt0 * u[0] + btn * u[n - 1]);
        let last = inv(&s)? * rhs;
        let mut y: Vec<Vec3> = u.iter().zip(&border).map(|(u, x)| u - x * last).collect();
        y.push(last);
        y
    } else {
        let lower: Vec<Mat3> = a[1..].iter().map(|m| -m).collect();
        let t = TriFactor::new(&diag, &lower)?;
        let mut y = b.to_vec();
        t.solve(&mut y);
        y
    };
    // d = J^T y: d_c = y_{c-1} - A_c^T y_c.
    let count = if periodic { q } else { q + 1 };
    Ok((0..count)
        .map(|c| {
            let prev = if c > 0 {
                y[c - 1]
            } else if periodic {
                y[q - 1]
            } else {
                Vec3::zeros()
            };
            let own = if c < q { a[c].transpose() * y[c] } else { Vec3::zeros() };
            prev - own
        })
        .collect())
}

fn dense_periodic(a: &[Mat3], b: &[Vec3]) -> Result<Vec<Vec3>> {
    let q = a.len();
    let n = 3 * q;
    let mut j = DMatrix::<f64>::zeros(n, n);
    let mut rhs = nalgebra::DVector::<f64>::zeros(n);
    for k in 0..q {
        let next = (k + 1) % q;
        for r in 0..3 {
            j[(3 * k + r, 3 * next + r)] += 1.0;
            for c in 0..3 {
                j[(3 * k + r, 3 * k + c)] -= a[k][(r, c)];
            }
            rhs[3 * k + r] = b[k][r];
        }
    }
    let sol = j.lu().solve(&rhs).ok_or(Error::SingularRestriction(0.0))?;
    Ok((0..q).map(|k| Vec3::new(sol[3 * k], sol[3 * k + 1], sol[3 * k + 2])).collect())
}
