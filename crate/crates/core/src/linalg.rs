//! Small dense linear algebra on tangent spaces of dimension at most three.
//!
//! Every matrix is a stack-allocated `3x3` padded with zeros outside its
//! logical shape, so products of restricted maps never touch the heap.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

/// Relative threshold below which a Gram-Schmidt column counts as dependent.
const RANK_TOL: f64 = 1e-12;

/// Leading `n x n` block of a padded matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub m: Mat3,
    pub n: usize,
}

impl Block {
    pub fn new(m: Mat3, n: usize) -> Self {
        debug_assert!(n >= 1 && n <= MAX_DIM);
        Block { m, n }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat3::zeros();
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        Block { m, n }
    }

    pub fn scalar(a: f64) -> Self {
        let mut m = Mat3::zeros();
        m[(0, 0)] = a;
        Block { m, n: 1 }
    }

    /// `self * rhs`.
    #[inline]
    pub fn mul(&self, rhs: &Block) -> Block {
        debug_assert_eq!(self.n, rhs.n);
        match self.n {
            1 => Block::scalar(self.m[(0, 0)] * rhs.m[(0, 0)]),
            2 => {
                let (a, b, c, d) = (self.m[(0, 0)], self.m[(0, 1)], self.m[(1, 0)], self.m[(1, 1)]);
                let (e, f, g, h) = (rhs.m[(0, 0)], rhs.m[(0, 1)], rhs.m[(1, 0)], rhs.m[(1, 1)]);
                let mut m = Mat3::zeros();
                m[(0, 0)] = a * e + b * g;
                m[(0, 1)] = a * f + b * h;
                m[(1, 0)] = c * e + d * g;
                m[(1, 1)] = c * f + d * h;
                Block { m, n: 2 }
            }
            _ => Block {
                m: self.m * rhs.m,
                n: self.n,
            },
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self.n {
            1 => self.m[(0, 0)].abs(),
            2 => self.m[(0, 0)]
                .abs()
                .max(self.m[(0, 1)].abs())
                .max(self.m[(1, 0)].abs())
                .max(self.m[(1, 1)].abs()),
            _ => self.m.amax(),
        }
    }

    pub fn determinant(&self) -> f64 {
        match self.n {
            1 => self.m[(0, 0)],
            2 => self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)],
            _ => self.m.determinant(),
        }
    }

    /// Largest and smallest singular values.
    #[inline]
    pub fn sigma_extremes(&self) -> (f64, f64) {
        match self.n {
            1 => {
                let a = self.m[(0, 0)].abs();
                (a, a)
            }
            2 => sigma2(
                self.m[(0, 0)],
                self.m[(0, 1)],
                self.m[(1, 0)],
                self.m[(1, 1)],
            ),
            _ => {
                let s = self.m.singular_values();
                (s.max(), s.min())
            }
        }
    }

    #[inline]
    pub fn sigma_max(&self) -> f64 {
        match self.n {
            1 => self.m[(0, 0)].abs(),
            2 => {
                let (a, b, c, d) = (self.m[(0, 0)], self.m[(0, 1)], self.m[(1, 0)], self.m[(1, 1)]);
                if b == 0.0 && c == 0.0 {
                    return a.abs().max(d.abs());
                }
                let m = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
                if (1e-150..=1e150).contains(&m) {
                    let s1 = ((a + d) * (a + d) + (c - b) * (c - b)).sqrt();
                    let s2 = ((a - d) * (a - d) + (b + c) * (b + c)).sqrt();
                    0.5 * (s1 + s2)
                } else {
                    sigma2(a, b, c, d).0
                }
            }
            _ => self.sigma_extremes().0,
        }
    }

    #[inline]
    pub fn sigma_min(&self) -> f64 {
        self.sigma_extremes().1
    }

    pub fn inverse(&self) -> Option<Block> {
        match self.n {
            1 => {
                let a = self.m[(0, 0)];
                (a != 0.0).then(|| Block::scalar(1.0 / a))
            }
            2 => {
                let (a, b, c, d) = (
                    self.m[(0, 0)],
                    self.m[(0, 1)],
                    self.m[(1, 0)],
                    self.m[(1, 1)],
                );
                let det = a * d - b * c;
                if det == 0.0 {
                    return None;
                }
                let mut m = Mat3::zeros();
                m[(0, 0)] = d / det;
                m[(0, 1)] = -b / det;
                m[(1, 0)] = -c / det;
                m[(1, 1)] = a / det;
                Some(Block { m, n: 2 })
            }
            _ => self.m.try_inverse().map(|m| Block { m, n: 3 }),
        }
    }
}

/// Singular values of `[[a, b], [c, d]]`, largest first.
#[inline]
fn sigma2(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let m = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if !(1e-150..=1e150).contains(&m) {
        if m == 0.0 || !m.is_finite() {
            return (m, m);
        }
        let (x, y) = sigma2(a / m, b / m, c / m, d / m);
        return (x * m, y * m);
    }
    let s1 = ((a + d) * (a + d) + (c - b) * (c - b)).sqrt();
    let s2 = ((a - d) * (a - d) + (b + c) * (b + c)).sqrt();
    let smax = 0.5 * (s1 + s2);
    (smax, (a * d - b * c).abs() / smax)
}

const RESCALE_HI: f64 = 1e64;
const RESCALE_LO: f64 = 1e-64;

/// Running product of blocks kept near unit scale, with the scale carried in log form.
#[derive(Clone, Copy, Debug)]
pub struct LogProduct {
    pub p: Block,
    pub log_scale: f64,
}

impl LogProduct {
    pub fn identity(n: usize) -> Self {
        LogProduct {
            p: Block::identity(n),
            log_scale: 0.0,
        }
    }

    /// `P <- b * P`
    #[inline]
    pub fn push_left(&mut self, b: &Block) {
        self.p = b.mul(&self.p);
        self.renormalize();
    }

    /// `P <- P * b`
    #[inline]
    pub fn push_right(&mut self, b: &Block) {
        self.p = self.p.mul(b);
        self.renormalize();
    }

    #[inline]
    fn renormalize(&mut self) {
        let s = self.p.max_abs();
        if !(RESCALE_LO..=RESCALE_HI).contains(&s) && s > 0.0 && s.is_finite() {
            self.p.m /= s;
            self.log_scale += s.ln();
        }
    }

    #[inline]
    pub fn log_sigma_max(&self) -> f64 {
        self.p.sigma_max().ln() + self.log_scale
    }
}

/// Modified Gram-Schmidt (with one reorthogonalization pass) of the first
/// `rank` columns. Returns the orthonormal factor and the `rank x rank`
/// triangular factor.
pub fn thin_qr(cols: &Mat3, rank: usize) -> Result<(Mat3, Block)> {
    let mut q = Mat3::zeros();
    let mut r = Mat3::zeros();
    for j in 0..rank {
        let orig: Vec3 = cols.column(j).into_owned();
        let orig_norm = orig.norm();
        let mut v = orig;
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let c = qi.dot(&v);
                v -= qi * c;
                r[(i, j)] += c;
            }
        }
        let nv = v.norm();
        if !(nv > RANK_TOL * orig_norm) || nv == 0.0 {
            return Err(Error::RankDeficient(rank));
        }
        r[(j, j)] = nv;
        q.set_column(j, &(v / nv));
    }
    Ok((q, Block::new(r, rank.max(1))))
}

/// Singular values (descending) of the leading `rows x cols` block.
pub fn singular_values(m: &Mat3, rows: usize, cols: usize) -> Vec<f64> {
    let mut padded = Mat3::zeros();
    for i in 0..rows {
        for j in 0..cols {
            padded[(i, j)] = m[(i, j)];
        }
    }
    let mut s: Vec<f64> = padded.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.truncate(rows.min(cols));
    s
}

/// A linear subspace of `R^ambient` given by an orthonormal basis stored in
/// the first `rank` columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subspace {
    basis: Mat3,
    ambient: usize,
    rank: usize,
}

impl Subspace {
    /// Orthonormalizes the given spanning vectors.
    pub fn from_vectors(vectors: &[Vec<f64>], ambient: usize) -> Result<Self> {
        if ambient == 0 || ambient > MAX_DIM {
            return Err(Error::UnsupportedDimension(ambient));
        }
        if vectors.is_empty() || vectors.len() > ambient {
            return Err(Error::InvalidParameter(format!(
                "subspace of R^{ambient} needs between 1 and {ambient} spanning vectors, got {}",
                vectors.len()
            )));
        }
        let mut cols = Mat3::zeros();
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: v.len(),
                });
            }
            for (i, x) in v.iter().enumerate() {
                cols[(i, j)] = *x;
            }
        }
        Self::from_columns(&cols, ambient, vectors.len())
    }

    pub fn from_columns(cols: &Mat3, ambient: usize, rank: usize) -> Result<Self> {
        let (q, _) = thin_qr(cols, rank)?;
        Ok(Subspace {
            basis: q,
            ambient,
            rank,
        })
    }

    pub fn basis(&self) -> &Mat3 {
        &self.basis
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        (0..self.ambient).map(|k| self.basis[(k, i)]).collect()
    }

    /// Image under `j` together with the restricted map expressed in the two
    /// orthonormal bases (upper triangular).
    pub fn push_forward(&self, j: &Mat3) -> Result<(Subspace, Block)> {
        let img = j * self.basis;
        let (q, r) = thin_qr(&img, self.rank)?;
        Ok((
            Subspace {
                basis: q,
                ambient: self.ambient,
                rank: self.rank,
            },
            r,
        ))
    }

    /// Matrix of `j` restricted to `self` with values read in `target`'s basis.
    #[inline]
    pub fn restrict_into(&self, j: &Mat3, target: &Subspace) -> Block {
        debug_assert_eq!(self.rank, target.rank);
        // Hand-unrolled for ranks 1 and 2: this sits in the innermost loop of
        // every orbit window. Storage is column-major.
        let jc = &j.data.0;
        let bc = &self.basis.data.0;
        let tc = &target.basis.data.0;
        #[inline(always)]
        fn apply(j: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
            [
                j[0][0] * v[0] + j[1][0] * v[1] + j[2][0] * v[2],
                j[0][1] * v[0] + j[1][1] * v[1] + j[2][1] * v[2],
                j[0][2] * v[0] + j[1][2] * v[1] + j[2][2] * v[2],
            ]
        }
        #[inline(always)]
        fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
            a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
        }
        if self.rank == 1 {
            return Block::scalar(dot(&tc[0], &apply(jc, &bc[0])));
        }
        if self.rank == 2 {
            let (u, v) = (apply(jc, &bc[0]), apply(jc, &bc[1]));
            let mut m = Mat3::zeros();
            m[(0, 0)] = dot(&tc[0], &u);
            m[(0, 1)] = dot(&tc[0], &v);
            m[(1, 0)] = dot(&tc[1], &u);
            m[(1, 1)] = dot(&tc[1], &v);
            return Block::new(m, 2);
        }
        Block::new(target.basis.transpose() * j * self.basis, self.rank)
    }

    /// Orthogonal projection residual `(I - P_self) other`, as columns.
    fn residual_of(&self, other: &Subspace) -> Mat3 {
        let q = &self.basis;
        let coeffs = q.transpose() * other.basis;
        other.basis - q * coeffs
    }

    /// Cosines of the principal angles (descending), `min(rank)` of them.
    pub fn principal_cosines(&self, other: &Subspace) -> Vec<f64> {
        let m = self.basis.transpose() * other.basis;
        singular_values(&m, self.rank, other.rank)
            .into_iter()
            .map(|c| c.min(1.0))
            .collect()
    }

    /// Smallest principal angle, accurate near zero.
    pub fn min_principal_angle(&self, other: &Subspace) -> f64 {
        let cos_max = self.principal_cosines(other)[0];
        let (low, high) = if self.rank <= other.rank {
            (self, other)
        } else {
            (other, self)
        };
        let res = high.residual_of(low);
        let sins = singular_values(&res, high.ambient, low.rank);
        let sin_min = sins.last().copied().unwrap_or(0.0);
        sin_min.atan2(cos_max)
    }

    /// Largest principal angle between equal-rank subspaces.
    pub fn max_principal_angle(&self, other: &Subspace) -> f64 {
        let cos_min = *self.principal_cosines(other).last().unwrap_or(&1.0);
        let res = other.residual_of(self);
        let sin_max = singular_values(&res, self.ambient, self.rank)[0];
        sin_max.atan2(cos_min)
    }
}

/// Chord length `|u - v|` between unit vectors at angle `theta`.
#[inline]
pub fn chord(theta: f64) -> f64 {
    2.0 * (0.5 * theta).sin()
}

pub fn mat_from_rows(rows: &[Vec<f64>]) -> Result<Mat3> {
    let n = rows.len();
    if n == 0 || n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut m = Mat3::zeros();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: r.len(),
            });
        }
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = *x;
        }
    }
    Ok(m)
}
