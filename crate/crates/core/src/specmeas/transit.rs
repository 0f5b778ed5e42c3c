use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::cover::Cover;
use crate::dynsys::{StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::shadow::random_point;

/// Observed transit from `U_j` into `U_i`: a sampled point `y` in `U_j`
/// whose `n`-th iterate lies in `U_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transit {
    pub n: usize,
    pub witness: StatePoint,
    pub orbit: usize,
    pub time: usize,
}

/// `X_{i,j}`: least observed transit time `n >= min_n` from `U_j` into `U_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionTable {
    pub min_n: usize,
    pub horizon: usize,
    /// `entries[i][j]`, `None` when no transit was observed.
    pub entries: Vec<Vec<Option<Transit>>>,
    pub x1: Option<usize>,
    pub x2: Option<usize>,
    /// Pairs `(i, j)` without an observed transit.
    pub unresolved: Vec<(usize, usize)>,
}

impl TransitionTable {
    pub fn get(&self, i: usize, j: usize) -> Option<&Transit> {
        self.entries.get(i)?.get(j)?.as_ref()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,X,resolved\n");
        for (i, row) in self.entries.iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                match t {
                    Some(t) => out.push_str(&format!("{i},{j},{},1\n", t.n)),
                    None => out.push_str(&format!("{i},{j},,0\n")),
                }
            }
        }
        out
    }
}

/// Starting points of the orbits sampled for transits.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitSampling {
    pub starts: Vec<StatePoint>,
    pub orbit_len: usize,
}

impl TransitSampling {
    /// `orbits` uniformly random starts; orbit `i` uses stream `i` of the seed.
    pub fn random(dim: usize, orbits: usize, orbit_len: usize, seed: u64) -> Self {
        let starts = (0..orbits)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                random_point(&mut rng, dim)
            })
            .collect();
        TransitSampling { starts, orbit_len }
    }
}

/// Iterates the sampled orbits and records transits between cover elements.
pub fn transition_times(
    system: &SystemSpec,
    cover: &Cover,
    min_n: usize,
    horizon: usize,
    sampling: &TransitSampling,
) -> Result<TransitionTable> {
    let orbits = sampling
        .starts
        .par_iter()
        .map(|x| Ok(system.iterate(x, sampling.orbit_len)?.into_points()))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[StatePoint]> = orbits.iter().map(|o| o.as_slice()).collect();
    transition_times_along(cover, min_n, horizon, &refs)
}

/// Transits observed along given orbits (consecutive points are iterates).
///
/// Ties between orbits go to the lowest orbit index, then the earliest time.
pub fn transition_times_along(
    cover: &Cover,
    min_n: usize,
    horizon: usize,
    orbits: &[&[StatePoint]],
) -> Result<TransitionTable> {
    if min_n == 0 || horizon < min_n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= min_n <= horizon, got {min_n} and {horizon}"
        )));
    }
    let r = cover.len();
    let tables: Vec<Vec<Option<(usize, usize)>>> = orbits
        .par_iter()
        .map(|orbit| scan_orbit(cover, min_n, horizon, orbit))
        .collect();
    let mut best: Vec<Option<(usize, usize, usize)>> = vec![None; r * r];
    for (o, t) in tables.iter().enumerate() {
        for (slot, cand) in best.iter_mut().zip(t) {
            if let Some((n, time)) = *cand {
                if slot.is_none_or(|(bn, _, _)| n < bn) {
                    *slot = Some((n, o, time));
                }
            }
        }
    }
    let mut entries = vec![vec![None; r]; r];
    let mut unresolved = Vec::new();
    let (mut x1, mut x2) = (None::<usize>, None::<usize>);
    for i in 0..r {
        for j in 0..r {
            match best[i * r + j] {
                Some((n, o, time)) => {
                    entries[i][j] = Some(Transit { n, witness: orbits[o][time], orbit: o, time });
                    x1 = Some(x1.map_or(n, |v| v.min(n)));
                    x2 = Some(x2.map_or(n, |v| v.max(n)));
                }
                None => unresolved.push((i, j)),
            }
        }
    }
    Ok(TransitionTable { min_n, horizon, entries, x1, x2, unresolved })
}

/// Best `(n, time)` per pair `i * r + j` along one orbit.
fn scan_orbit(cover: &Cover, min_n: usize, horizon: usize, orbit: &[StatePoint]) -> Vec<Option<(usize, usize)>> {
    let r = cover.len();
    let labels: Vec<Vec<usize>> = orbit.iter().map(|p| cover.containing(p)).collect();
    let mut best: Vec<Option<(usize, usize)>> = vec![None; r * r];
    // Per source element: how many targets are resolved and the largest
    // resolved time; once all are resolved no longer transit can improve.
    let mut resolved = vec![0usize; r];
    let mut worst = vec![0usize; r];
    for t in 0..orbit.len() {
        for &j in &labels[t] {
            let cap = if resolved[j] == r { worst[j].saturating_sub(1) } else { horizon };
            let last = cap.min(orbit.len() - 1 - t);
            for n in min_n..=last {
                for &i in &labels[t + n] {
                    let slot = &mut best[i * r + j];
                    match slot {
                        Some((bn, _)) if *bn <= n => {}
                        _ => {
                            if slot.is_none() {
                                resolved[j] += 1;
                            }
                            *slot = Some((n, t));
                        }
                    }
                }
            }
            if resolved[j] == r {
                worst[j] = (0..r).map(|i| best[i * r + j].unwrap().0).max().unwrap();
            }
        }
    }
    best
}
