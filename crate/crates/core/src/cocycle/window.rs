use crate::dynsys::{Splitting, StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{Block, LogProduct, Mat3, Subspace};

/// Relative residual allowed when checking that a caller-declared constant
/// splitting is mapped into itself by the derivative.
const INVARIANCE_TOL: f64 = 1e-9;

/// Largest log error amplification accepted when pushing E forward: relative
/// accuracy of the transported E stays near `1e-6`.
const MAX_TRANSPORT_AMPLIFICATION: f64 = 22.0;

/// Where the splitting along an orbit comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum SplittingField {
    /// The system's analytic splitting (cat map and product system).
    Reference,
    /// A constant splitting declared invariant by the caller; checked step by step.
    Fixed(Splitting),
    /// A splitting at the base point pushed forward by the derivative. Only
    /// forward windows are available, so backward conditions cannot be checked,
    /// and windows end with [`Error::PrecisionLoss`] once domination has
    /// amplified rounding errors in E beyond about `1e-6`.
    Transported(Splitting),
}

impl SplittingField {
    pub fn supports_backward(&self) -> bool {
        !matches!(self, SplittingField::Transported(_))
    }

    /// The splitting at the base point.
    pub fn at(&self, system: &SystemSpec, x: &StatePoint) -> Result<Splitting> {
        match self {
            SplittingField::Reference => system.reference_splitting(x),
            SplittingField::Fixed(s) | SplittingField::Transported(s) => {
                if s.ambient() != system.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: system.dim(),
                        got: s.ambient(),
                    });
                }
                Ok(*s)
            }
        }
    }
}

/// Derivative cocycle restricted to `E` and `F` along the orbit window
/// `f^{-back}(x), ..., f^{forward}(x)`.
///
/// Block `i` is the map from time `i - back` to `i - back + 1`, written in
/// orthonormal bases of the subspaces at both ends.
#[derive(Clone, Debug)]
pub struct OrbitCocycle {
    back: usize,
    forward: usize,
    points: Vec<StatePoint>,
    e: Vec<Block>,
    f: Vec<Block>,
    /// Inverses of the F blocks; empty when F is one-dimensional.
    f_inv: Vec<Block>,
    /// Prefix sums of `log |block|` for a one-dimensional E.
    e_cum: Option<Vec<f64>>,
    /// Prefix sums of `log |block|` for a one-dimensional F.
    f_cum: Option<Vec<f64>>,
    dims: (usize, usize),
}

fn log_prefix(blocks: &[Block]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(blocks.len() + 1);
    let mut acc = 0.0;
    out.push(acc);
    for b in blocks {
        let v = b.m[(0, 0)];
        if v == 0.0 || !v.is_finite() {
            return Err(Error::SingularRestriction(v.abs()));
        }
        acc += v.abs().ln();
        out.push(acc);
    }
    Ok(out)
}

pub(crate) fn check_invariant(j: &Mat3, s: &Subspace) -> Result<()> {
    let q = s.basis();
    let img = j * q;
    let res = img - q * (q.transpose() * img);
    let scale = img.norm().max(f64::MIN_POSITIVE);
    let rel = res.norm() / scale;
    if rel > INVARIANCE_TOL {
        return Err(Error::InvalidParameter(format!(
            "declared splitting is not invariant (relative residual {rel:e})"
        )));
    }
    Ok(())
}

pub(crate) fn invert(b: &Block) -> Result<Block> {
    match b.inverse() {
        Some(inv) if inv.m.iter().all(|v| v.is_finite()) => Ok(inv),
        _ => Err(Error::SingularRestriction(b.sigma_min())),
    }
}

impl OrbitCocycle {
    pub fn build(
        system: &SystemSpec,
        x: &StatePoint,
        field: &SplittingField,
        back: usize,
        forward: usize,
    ) -> Result<Self> {
        system.check(x)?;
        if back > 0 && !field.supports_backward() {
            return Err(Error::InvalidParameter(
                "a forward-transported splitting has no backward window".into(),
            ));
        }
        if back > 0 && !system.has_inverse() {
            return Err(Error::InverseUnavailable(system.name()));
        }
        let s0 = field.at(system, x)?;
        let dims = s0.dims();
        let total = back + forward;
        let mut points = Vec::with_capacity(total + 1);
        let mut cur = *x;
        let mut past = Vec::with_capacity(back);
        let mut past_jac = Vec::with_capacity(back);
        for _ in 0..back {
            let (prev, j) = system.inverse_jac_raw(&cur)?;
            past.push(prev);
            past_jac.push(j);
            cur = prev;
        }
        points.extend(past.into_iter().rev());
        points.push(*x);

        let mut e = Vec::with_capacity(total);
        let mut f = Vec::with_capacity(total);
        let check = matches!(field, SplittingField::Fixed(_));
        match field {
            SplittingField::Reference | SplittingField::Fixed(_) => {
                // Constant splitting: backward part uses forward derivatives at past points.
                for j in past_jac.iter().rev() {
                    if check {
                        check_invariant(j, s0.e())?;
                        check_invariant(j, s0.f())?;
                    }
                    e.push(s0.e().restrict_into(j, s0.e()));
                    f.push(s0.f().restrict_into(j, s0.f()));
                }
                let mut cur = *x;
                for _ in 0..forward {
                    let (next, j) = system.step_jac_raw(&cur)?;
                    if check {
                        check_invariant(&j, s0.e())?;
                        check_invariant(&j, s0.f())?;
                    }
                    e.push(s0.e().restrict_into(&j, s0.e()));
                    f.push(s0.f().restrict_into(&j, s0.f()));
                    points.push(next);
                    cur = next;
                }
            }
            SplittingField::Transported(_) => {
                let (mut es, mut fs) = (*s0.e(), *s0.f());
                let mut cur = *x;
                let mut pe = LogProduct::identity(dims.0);
                let mut pf_inv = LogProduct::identity(dims.1);
                for step in 0..forward {
                    let (next, j) = system.step_jac_raw(&cur)?;
                    let (ne, re) = es.push_forward(&j)?;
                    let (nf, rf) = fs.push_forward(&j)?;
                    // Rounding errors in E grow like m(Df^n|F) / |Df^n|E|.
                    pe.push_left(&re);
                    pf_inv.push_right(&invert(&rf)?);
                    let amplification = -pf_inv.log_sigma_max() - pe.log_sigma_max();
                    if amplification > MAX_TRANSPORT_AMPLIFICATION {
                        return Err(Error::PrecisionLoss { steps: step + 1 });
                    }
                    e.push(re);
                    f.push(rf);
                    points.push(next);
                    (es, fs, cur) = (ne, nf, next);
                }
            }
        }
        let f_cum = (dims.1 == 1).then(|| log_prefix(&f)).transpose()?;
        let f_inv = if f_cum.is_some() {
            Vec::new()
        } else {
            f.iter().map(invert).collect::<Result<Vec<_>>>()?
        };
        let e_cum = (dims.0 == 1).then(|| log_prefix(&e)).transpose()?;
        if e_cum.is_none() {
            for b in &e {
                if b.determinant() == 0.0 {
                    return Err(Error::SingularRestriction(0.0));
                }
            }
        }
        Ok(OrbitCocycle {
            back,
            forward,
            points,
            e,
            f,
            f_inv,
            e_cum,
            f_cum,
            dims,
        })
    }

    pub fn back(&self) -> usize {
        self.back
    }

    pub fn forward(&self) -> usize {
        self.forward
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// `f^t(x)` for `-back <= t <= forward`.
    pub fn point(&self, t: i64) -> &StatePoint {
        &self.points[self.index(t)]
    }

    #[inline]
    fn index(&self, t: i64) -> usize {
        let i = t + self.back as i64;
        debug_assert!(i >= 0 && (i as usize) <= self.back + self.forward);
        i as usize
    }

    #[inline]
    fn check_range(&self, start: i64, len: usize) {
        assert!(
            start >= -(self.back as i64) && start + len as i64 <= self.forward as i64,
            "cocycle window [{}, {}] does not contain [{start}, {}]",
            -(self.back as i64),
            self.forward,
            start + len as i64
        );
    }

    /// Restricted block for the step `f^t(x) -> f^{t+1}(x)` on E.
    pub fn e_block(&self, t: i64) -> &Block {
        &self.e[self.index(t)]
    }

    pub fn f_block(&self, t: i64) -> &Block {
        &self.f[self.index(t)]
    }

    /// `log |Df^len restricted to E(f^start x)|`.
    pub fn log_norm_e(&self, start: i64, len: usize) -> f64 {
        self.check_range(start, len);
        if len == 0 {
            return 0.0;
        }
        let i0 = self.index(start);
        if let Some(c) = &self.e_cum {
            return c[i0 + len] - c[i0];
        }
        if len == 1 {
            return self.e[i0].sigma_max().ln();
        }
        let mut p = LogProduct::identity(self.dims.0);
        for b in &self.e[i0..i0 + len] {
            p.push_left(b);
        }
        p.log_sigma_max()
    }

    /// `log m(Df^len restricted to F(f^start x))`.
    pub fn log_conorm_f(&self, start: i64, len: usize) -> f64 {
        self.check_range(start, len);
        if len == 0 {
            return 0.0;
        }
        let i0 = self.index(start);
        if let Some(c) = &self.f_cum {
            return c[i0 + len] - c[i0];
        }
        let mut p = LogProduct::identity(self.dims.1);
        for b in &self.f_inv[i0..i0 + len] {
            p.push_right(b);
        }
        -p.log_sigma_max()
    }

    /// `log |Df^n|E(f^start x)|` for every `n` in `0..=max_len`.
    pub fn running_log_norm_e(&self, start: i64, max_len: usize) -> Vec<f64> {
        self.check_range(start, max_len);
        let i0 = self.index(start);
        if let Some(c) = &self.e_cum {
            return c[i0..=i0 + max_len].iter().map(|v| v - c[i0]).collect();
        }
        let mut out = Vec::with_capacity(max_len + 1);
        out.push(0.0);
        let mut p = LogProduct::identity(self.dims.0);
        for b in &self.e[i0..i0 + max_len] {
            p.push_left(b);
            out.push(p.log_sigma_max());
        }
        out
    }

    /// `log m(Df^n|F(f^start x))` for every `n` in `0..=max_len`.
    pub fn running_log_conorm_f(&self, start: i64, max_len: usize) -> Vec<f64> {
        self.check_range(start, max_len);
        let i0 = self.index(start);
        if let Some(c) = &self.f_cum {
            return c[i0..=i0 + max_len].iter().map(|v| v - c[i0]).collect();
        }
        let mut out = Vec::with_capacity(max_len + 1);
        out.push(0.0);
        let mut p = LogProduct::identity(self.dims.1);
        for b in &self.f_inv[i0..i0 + max_len] {
            p.push_right(b);
            out.push(-p.log_sigma_max());
        }
        out
    }

    /// `log |Df^len|E(f^s x)|` for consecutive starts `s = first, first+1, ...`,
    /// `count` of them.
    pub fn sliding_log_norm_e(&self, first: i64, len: usize, count: usize) -> Vec<f64> {
        if count == 0 {
            return Vec::new();
        }
        self.check_range(first, len + count - 1);
        (0..count)
            .map(|k| self.log_norm_e(first + k as i64, len))
            .collect()
    }

    pub fn sliding_log_conorm_f(&self, first: i64, len: usize, count: usize) -> Vec<f64> {
        if count == 0 {
            return Vec::new();
        }
        self.check_range(first, len + count - 1);
        (0..count)
            .map(|k| self.log_conorm_f(first + k as i64, len))
            .collect()
    }
}
