use serde::{Deserialize, Serialize};

use crate::cocycle::{check_invariant, invert, OrbitCocycle, SplittingField};
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::linalg::{Block, LogProduct};

/// Minimum number of blocks the horizon must extend past `k`.
pub const MIN_HORIZON_MARGIN: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PesinParams {
    /// Block size `K`.
    #[serde(rename = "K")]
    pub k_block: usize,
    pub zeta: f64,
    /// Block index `k`.
    pub k: usize,
}

impl PesinParams {
    pub fn new(k_block: usize, zeta: f64, k: usize) -> Result<Self> {
        let p = PesinParams { k_block, zeta, k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_block == 0 || self.k == 0 {
            return Err(Error::InvalidParameter("K and k must be >= 1".into()));
        }
        if !(self.zeta > 0.0) || !self.zeta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "zeta must be positive, got {}",
                self.zeta
            )));
        }
        Ok(())
    }
}

/// Worst signed slack of each block condition at finite horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockCertificate {
    pub params: PesinParams,
    pub horizon: usize,
    /// Contraction on E along forward blocks, `l` in `[k, L]`.
    pub margin_a: f64,
    /// Expansion on F along backward blocks; `None` when no backward window exists.
    pub margin_b: Option<f64>,
    /// Domination at the head (length `kK + r`).
    pub margin_c_head: f64,
    /// Domination per block at every raw time in `[kK, LK]`.
    pub margin_c_tail: f64,
    pub margin_c: f64,
    /// Backward condition not evaluated.
    pub partial: bool,
    pub pass: bool,
}

impl BlockCertificate {
    pub fn min_margin(&self) -> f64 {
        let m = self.margin_a.min(self.margin_c);
        self.margin_b.map_or(m, |b| m.min(b))
    }
}

/// All finite-horizon block quantities at one point, independent of `zeta`
/// and of `k`. Certificates for any `(zeta, k)` are read off in O(K).
#[derive(Clone, Debug)]
pub struct BlockProfile {
    k_block: usize,
    horizon: usize,
    /// `a_sup[l]` = max over `l' >= l`, all `r`, of the E average in condition (a).
    a_sup: Vec<f64>,
    /// `b_inf[l]` = min over `l' >= l`, all `r`, of the F average in condition (b).
    b_inf: Option<Vec<f64>>,
    /// `tail_sup[s]` = max over raw `s' in [s, LK]` of the per-block log ratio / K.
    tail_sup: Vec<f64>,
    /// Head log ratio per step at length `n`, index `n` in `0..(L+1)K`.
    head_ratio: Vec<f64>,
}

fn suffix_max(v: &mut [f64]) {
    for i in (0..v.len().saturating_sub(1)).rev() {
        v[i] = v[i].max(v[i + 1]);
    }
}

fn suffix_min(v: &mut [f64]) {
    for i in (0..v.len().saturating_sub(1)).rev() {
        v[i] = v[i].min(v[i + 1]);
    }
}

/// Prefix sums of per-step logs for a one-dimensional bundle, or the blocks
/// themselves.
enum Track {
    /// Prefix sums, with the last block value and its log (constant cocycles
    /// repeat the same value).
    Scalar(Vec<f64>, f64, f64),
    Blocks(Vec<Block>),
}

impl Track {
    fn new(dim: usize, cap: usize) -> Self {
        if dim == 1 {
            let mut v = Vec::with_capacity(cap + 1);
            v.push(0.0);
            Track::Scalar(v, f64::NAN, f64::NAN)
        } else {
            Track::Blocks(Vec::with_capacity(cap))
        }
    }

    /// Appends a block; `inverse` stores its inverse instead (for minimal norms).
    fn push(&mut self, b: Block, inverse: bool) -> Result<()> {
        match self {
            Track::Scalar(cum, last_v, last_log) => {
                let v = b.m[(0, 0)].abs();
                if v != *last_v {
                    if v == 0.0 || !v.is_finite() {
                        return Err(Error::SingularRestriction(v));
                    }
                    (*last_v, *last_log) = (v, v.ln());
                }
                let acc = *cum.last().unwrap();
                cum.push(acc + *last_log);
            }
            Track::Blocks(bs) => {
                if inverse {
                    bs.push(invert(&b)?);
                } else {
                    if b.determinant() == 0.0 {
                        return Err(Error::SingularRestriction(0.0));
                    }
                    bs.push(b);
                }
            }
        }
        Ok(())
    }

    /// Log norm (or log minimal norm, for inverse tracks) of the product of
    /// entries `i0..i0 + len` taken in storage order.
    fn window(&self, i0: usize, len: usize, dim: usize, inverse: bool) -> f64 {
        match self {
            Track::Scalar(cum, ..) => cum[i0 + len] - cum[i0],
            Track::Blocks(bs) => {
                let mut p = LogProduct::identity(dim);
                for b in &bs[i0..i0 + len] {
                    if inverse {
                        p.push_right(b);
                    } else {
                        p.push_left(b);
                    }
                }
                if inverse {
                    -p.log_sigma_max()
                } else {
                    p.log_sigma_max()
                }
            }
        }
    }
}

impl BlockProfile {
    pub fn build(
        system: &SystemSpec,
        x: &StatePoint,
        field: &SplittingField,
        k_block: usize,
        horizon: usize,
    ) -> Result<Self> {
        if k_block == 0 || horizon == 0 {
            return Err(Error::InvalidParameter("K and horizon must be >= 1".into()));
        }
        let span = (horizon + 1) * k_block;
        if let SplittingField::Transported(_) = field {
            let cyc = OrbitCocycle::build(system, x, field, 0, span)?;
            return Self::from_cocycle(&cyc, k_block, horizon);
        }
        system.check(x)?;
        if !system.has_inverse() {
            return Err(Error::InverseUnavailable(system.name()));
        }
        let s0 = field.at(system, x)?;
        let (de, df) = s0.dims();
        let (se, sf) = (s0.e(), s0.f());
        let check = matches!(field, SplittingField::Fixed(_));
        let kk = k_block;
        let raw_last = horizon * kk;

        // Forward blocks at times 0..span; backward F blocks at times -1, -2,
        // ..., -(span - 1), stored in that order. The two orbits are advanced
        // in the same loop so that their dependency chains overlap.
        let mut b_track = Track::new(df, span);
        let mut back = *x;
        let mut e_track = Track::new(de, span);
        let mut f_track = Track::new(df, span);
        let mut head_e = Vec::with_capacity(span);
        let mut head_f = Vec::with_capacity(span);
        let mut a_single = Vec::new();
        let mut pe = LogProduct::identity(de);
        let mut pf_inv = LogProduct::identity(df);
        head_e.push(0.0);
        head_f.push(0.0);
        let mut cur = *x;
        for t in 0..span {
            let (next, j) = system.step_jac_raw(&cur)?;
            if t + 1 < span {
                let (prev, jb) = system.inverse_jac_raw(&back)?;
                if check {
                    check_invariant(&jb, se)?;
                    check_invariant(&jb, sf)?;
                }
                b_track.push(sf.restrict_into(&jb, sf), true)?;
                back = prev;
            }
            if check {
                check_invariant(&j, se)?;
                check_invariant(&j, sf)?;
            }
            let eb = se.restrict_into(&j, se);
            let fb = sf.restrict_into(&j, sf);
            if de > 1 {
                if kk == 1 && t <= raw_last {
                    a_single.push(eb.sigma_max().ln());
                }
                if t + 1 < span {
                    pe.push_left(&eb);
                    head_e.push(pe.log_sigma_max());
                }
            }
            if de == 1 || kk > 1 {
                e_track.push(eb, false)?;
            } else if eb.determinant() == 0.0 {
                return Err(Error::SingularRestriction(0.0));
            }
            if df > 1 && t + 1 < span {
                pf_inv.push_right(&invert(&fb)?);
                head_f.push(-pf_inv.log_sigma_max());
            }
            f_track.push(fb, true)?;
            cur = next;
        }
        if let Track::Scalar(cum, ..) = &e_track {
            head_e = cum[..span].to_vec();
        }
        if let Track::Scalar(cum, ..) = &f_track {
            head_f = cum[..span].to_vec();
        }
        let a_fwd: Vec<f64> = if de > 1 && kk == 1 {
            a_single
        } else {
            (0..=raw_last).map(|s| e_track.window(s, kk, de, false)).collect()
        };
        let f_fwd: Vec<f64> = (0..=raw_last).map(|s| f_track.window(s, kk, df, true)).collect();

        // Log minimal norm over the times -a, ..., -a + len - 1.
        let back_conorm = |a: usize, len: usize| -> f64 {
            if len == 0 {
                return 0.0;
            }
            match &b_track {
                Track::Scalar(cum, ..) => cum[a] - cum[a - len],
                Track::Blocks(bs) => {
                    let mut p = LogProduct::identity(df);
                    for i in (a - len..a).rev() {
                        p.push_right(&bs[i]);
                    }
                    -p.log_sigma_max()
                }
            }
        };
        let mut b = vec![f64::INFINITY; horizon + 1];
        let mut acc = 0.0;
        for l in 1..=horizon {
            acc += back_conorm(l * kk, kk);
            for r in 0..kk {
                let avg = (back_conorm(l * kk + r, r) + acc) / (l * kk + r) as f64;
                b[l] = b[l].min(avg);
            }
        }
        suffix_min(&mut b[1..]);

        Ok(Self::assemble(kk, horizon, &a_fwd, &f_fwd, &head_e, &head_f, Some(b)))
    }

    /// Profile from an orbit window covering `(L + 1) K` steps forward and,
    /// when present, backward.
    pub fn from_cocycle(cyc: &OrbitCocycle, k_block: usize, horizon: usize) -> Result<Self> {
        let kk = k_block;
        let span = (horizon + 1) * kk;
        if kk == 0 || horizon == 0 || cyc.forward() < span {
            return Err(Error::InvalidParameter(format!(
                "orbit window of {} steps is shorter than (L + 1) K = {span}",
                cyc.forward()
            )));
        }
        let raw_last = horizon * kk;
        let a_fwd = cyc.sliding_log_norm_e(0, kk, raw_last + 1);
        let f_fwd = cyc.sliding_log_conorm_f(0, kk, raw_last + 1);
        let head_e = cyc.running_log_norm_e(0, span - 1);
        let head_f = cyc.running_log_conorm_f(0, span - 1);

        let b_inf = (cyc.back() >= span).then(|| {
            let mut b = vec![f64::INFINITY; horizon + 1];
            let mut acc = 0.0;
            for l in 1..=horizon {
                acc += cyc.log_conorm_f(-((l * kk) as i64), kk);
                for r in 0..kk {
                    let rem = cyc.log_conorm_f(-((l * kk + r) as i64), r);
                    let avg = (rem + acc) / (l * kk + r) as f64;
                    b[l] = b[l].min(avg);
                }
            }
            suffix_min(&mut b[1..]);
            b
        });
        Ok(Self::assemble(kk, horizon, &a_fwd, &f_fwd, &head_e, &head_f, b_inf))
    }

    fn assemble(
        kk: usize,
        horizon: usize,
        a_fwd: &[f64],
        f_fwd: &[f64],
        head_e: &[f64],
        head_f: &[f64],
        b_inf: Option<Vec<f64>>,
    ) -> Self {
        // (a): for each r, prefix sums over blocks starting at jK + r.
        let mut a_sup = vec![f64::NEG_INFINITY; horizon + 1];
        for r in 0..kk {
            let mut acc = head_e[r];
            for l in 1..=horizon {
                acc += a_fwd[(l - 1) * kk + r];
                let avg = acc / (l * kk + r) as f64;
                a_sup[l] = a_sup[l].max(avg);
            }
        }
        suffix_max(&mut a_sup[1..]);

        let mut tail_sup: Vec<f64> = a_fwd
            .iter()
            .zip(f_fwd)
            .map(|(a, f)| (a - f) / kk as f64)
            .collect();
        suffix_max(&mut tail_sup);

        let head_ratio = head_e
            .iter()
            .zip(head_f)
            .enumerate()
            .map(|(n, (e, f))| if n == 0 { 0.0 } else { (e - f) / n as f64 })
            .collect();

        BlockProfile {
            k_block: kk,
            horizon,
            a_sup,
            b_inf,
            tail_sup,
            head_ratio,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn k_block(&self) -> usize {
        self.k_block
    }

    /// Certificate at block index `k <= L`.
    pub fn certificate(&self, zeta: f64, k: usize) -> BlockCertificate {
        assert!(k >= 1 && k <= self.horizon, "block index {k} outside [1, {}]", self.horizon);
        let kk = self.k_block;
        let margin_a = -zeta - self.a_sup[k];
        let margin_b = self.b_inf.as_ref().map(|b| b[k] - zeta);
        let head = (0..kk)
            .map(|r| self.head_ratio[k * kk + r])
            .fold(f64::NEG_INFINITY, f64::max);
        let margin_c_head = -2.0 * zeta - head;
        let margin_c_tail = -2.0 * zeta - self.tail_sup[k * kk];
        let margin_c = margin_c_head.min(margin_c_tail);
        let pass = margin_a >= 0.0 && margin_c >= 0.0 && margin_b.is_none_or(|b| b >= 0.0);
        BlockCertificate {
            params: PesinParams {
                k_block: kk,
                zeta,
                k,
            },
            horizon: self.horizon,
            margin_a,
            margin_b,
            margin_c_head,
            margin_c_tail,
            margin_c,
            partial: margin_b.is_none(),
            pass,
        }
    }

    pub fn passes(&self, zeta: f64, k: usize) -> bool {
        self.certificate(zeta, k).pass
    }

    /// Smallest `k <= L/2` whose certificate passes.
    pub fn min_block_index(&self, zeta: f64) -> Option<usize> {
        (1..=self.horizon / 2).find(|&k| self.passes(zeta, k))
    }
}

/// Checks conditions (a), (b), (c) at `x` for `l` up to the horizon `L` (in blocks).
pub fn check_block_membership(
    system: &SystemSpec,
    x: &StatePoint,
    field: &SplittingField,
    params: &PesinParams,
    horizon: usize,
) -> Result<BlockCertificate> {
    params.validate()?;
    if horizon < params.k + MIN_HORIZON_MARGIN {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must be at least k + {MIN_HORIZON_MARGIN} = {}",
            params.k + MIN_HORIZON_MARGIN
        )));
    }
    let profile = BlockProfile::build(system, x, field, params.k_block, horizon)?;
    Ok(profile.certificate(params.zeta, params.k))
}

/// Smallest block index `k <= horizon / 2` for which `x` is certified, if any.
pub fn min_block_index(
    system: &SystemSpec,
    x: &StatePoint,
    field: &SplittingField,
    k_block: usize,
    zeta: f64,
    horizon: usize,
) -> Result<Option<usize>> {
    PesinParams::new(k_block, zeta, 1)?;
    let profile = BlockProfile::build(system, x, field, k_block, horizon)?;
    Ok(profile.min_block_index(zeta))
}
