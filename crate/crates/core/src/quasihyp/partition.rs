use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition `0 = t_0 < t_1 < ... < t_m = n` of an orbit segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScheme {
    pub times: Vec<usize>,
    /// `(k, K, l, q)` with `n = lK + q` when built by [`canonical_partition`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<(usize, usize, usize, usize)>,
}

impl PartitionScheme {
    /// Validates an arbitrary partition.
    pub fn from_times(times: Vec<usize>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0 {
            return Err(Error::InvalidParameter(
                "a partition starts at 0 and has at least one piece".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "partition times must increase strictly: {times:?}"
            )));
        }
        Ok(PartitionScheme {
            times,
            canonical: None,
        })
    }

    pub fn n(&self) -> usize {
        *self.times.last().unwrap()
    }

    /// Number of pieces.
    pub fn m(&self) -> usize {
        self.times.len() - 1
    }

    pub fn gaps(&self) -> impl Iterator<Item = usize> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_gap(&self) -> usize {
        self.gaps().max().unwrap_or(0)
    }

    /// Union of this partition with `other` shifted to start at `self.n()`.
    pub fn concat(&self, other: &PartitionScheme) -> PartitionScheme {
        let n = self.n();
        let mut times = self.times.clone();
        times.extend(other.times[1..].iter().map(|t| t + n));
        PartitionScheme {
            times,
            canonical: None,
        }
    }
}

/// With `n = lK + q`: `t_i = (k + i - 1)K + q` for `0 < i < m = l - 2k + 2`.
///
/// `q = n mod K`, except for `K = 1` where `q = 1` whenever `l >= 2k` still
/// holds, so the first piece has length `k + 1` as for larger `K`.
pub fn canonical_partition(n: usize, k: usize, k_block: usize) -> Result<PartitionScheme> {
    if k == 0 || k_block == 0 {
        return Err(Error::InvalidParameter("k and K must be >= 1".into()));
    }
    if n < 2 * k * k_block {
        return Err(Error::InvalidParameter(format!(
            "segment length {n} is below 2kK = {}",
            2 * k * k_block
        )));
    }
    let (l, q) = if k_block == 1 && n > 2 * k {
        (n - 1, 1)
    } else {
        (n / k_block, n % k_block)
    };
    let m = l - 2 * k + 2;
    let mut times = Vec::with_capacity(m + 1);
    times.push(0);
    times.extend((1..m).map(|i| (k + i - 1) * k_block + q));
    times.push(n);
    Ok(PartitionScheme {
        times,
        canonical: Some((k, k_block, l, q)),
    })
}
