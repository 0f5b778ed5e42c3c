use crate::dynsys::{torus_distance, StatePoint, SystemSpec};
use crate::error::{Error, Result};
use crate::format::fmt_row;

/// `c_i`: time at which segment `i` starts, for a window of lengths
/// `n_list` whose first entry has index `first_index`.
///
/// `c_0 = 0`, `c_i = n_0 + ... + n_{i-1}` and `c_{-i} = -(n_{-i} + ... + n_{-1})`.
/// `i` may be one past the last index (the end of the window).
pub fn cumulative_times(n_list: &[usize], first_index: i64, i: i64) -> Result<i64> {
    let last = first_index + n_list.len() as i64 - 1;
    let needed = if i >= 0 { (0, i - 1) } else { (i, -1) };
    let in_window = i >= first_index && i <= last + 1;
    if !in_window || (needed.0 <= needed.1 && (needed.0 < first_index || needed.1 > last)) {
        return Err(Error::InvalidParameter(format!(
            "index {i} outside the window {first_index}..={last}"
        )));
    }
    let n = |j: i64| n_list[(j - first_index) as usize] as i64;
    Ok(if i >= 0 {
        (0..i).map(n).sum()
    } else {
        -(i..0).map(n).sum::<i64>()
    })
}

/// A finite window of a `delta`-pseudo-orbit: orbit pieces `x_i, ..., f^{n_i}(x_i)`
/// with `rho(f^{n_i} x_i, x_{i+1}) < delta`. When periodic, the window is one
/// period and the last piece connects back to the first.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoOrbit {
    segments: Vec<Vec<StatePoint>>,
    first_index: i64,
    periodic: bool,
    delta: f64,
    dim: usize,
}

impl PseudoOrbit {
    /// Each segment lists its `n_i + 1` points.
    pub fn new(segments: Vec<Vec<StatePoint>>, periodic: bool, delta: f64) -> Result<Self> {
        let dim = segments
            .first()
            .and_then(|s| s.first())
            .map(|p| p.dim())
            .ok_or_else(|| Error::InvalidParameter("a pseudo-orbit needs at least one segment".into()))?;
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        for (i, s) in segments.iter().enumerate() {
            if s.len() < 2 {
                return Err(Error::InvalidParameter(format!("segment {i} has length 0")));
            }
            if let Some(p) = s.iter().find(|p| p.dim() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
        }
        let po = PseudoOrbit {
            segments,
            first_index: 0,
            periodic,
            delta,
            dim,
        };
        let gaps = po.gaps();
        if let Some(i) = gaps.iter().position(|g| !(*g < delta)) {
            return Err(Error::InvalidParameter(format!(
                "gap {i} is {:e}, not below delta = {delta:e}",
                gaps[i]
            )));
        }
        Ok(po)
    }

    /// Pieces of true orbits starting at the given points.
    pub fn from_starts(
        system: &SystemSpec,
        starts: &[(StatePoint, usize)],
        periodic: bool,
        delta: f64,
    ) -> Result<Self> {
        let segments = starts
            .iter()
            .map(|(x, n)| {
                if *n == 0 {
                    return Err(Error::InvalidParameter("segment lengths must be >= 1".into()));
                }
                Ok(system.iterate(x, *n)?.into_points())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(segments, periodic, delta)
    }

    pub fn with_first_index(mut self, first_index: i64) -> Self {
        self.first_index = first_index;
        self
    }

    pub fn segments(&self) -> &[Vec<StatePoint>] {
        &self.segments
    }

    pub fn n_list(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.len() - 1).collect()
    }

    /// `p`, the sum of the segment lengths.
    pub fn total_length(&self) -> usize {
        self.segments.iter().map(|s| s.len() - 1).sum()
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn first_index(&self) -> i64 {
        self.first_index
    }

    pub fn cumulative_time(&self, i: i64) -> Result<i64> {
        cumulative_times(&self.n_list(), self.first_index, i)
    }

    /// Start of each segment relative to the start of the window.
    pub fn offsets(&self) -> Vec<usize> {
        let mut c = 0;
        self.segments
            .iter()
            .map(|s| {
                let o = c;
                c += s.len() - 1;
                o
            })
            .collect()
    }

    /// `rho(f^{n_i} x_i, x_{i+1})`, wrapping around when periodic.
    pub fn gaps(&self) -> Vec<f64> {
        let m = self.segments.len();
        let count = if self.periodic { m } else { m - 1 };
        (0..count)
            .map(|i| {
                let end = self.segments[i].last().unwrap();
                let next = &self.segments[(i + 1) % m][0];
                torus_distance(end, next).unwrap()
            })
            .collect()
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps().into_iter().fold(0.0, f64::max)
    }

    /// Text form: a `PSEUDO` header, then `SEG n=` blocks of `n + 1` points.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "PSEUDO d={} periodic={} delta={}\n",
            self.dim,
            u8::from(self.periodic),
            crate::format::fmt_f64(self.delta)
        );
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("SEG n={}\n", s.len() - 1));
            for p in s {
                out.push_str(&fmt_row(p.coords(), " "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let fields = parse_header(hline, header)?;
        let get = |key: &str| {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::Parse { line: hline, msg: format!("missing {key}=") })
        };
        let bad = |msg: String| Error::Parse { line: hline, msg };
        let dim: usize = get("d")?.parse().map_err(|e| bad(format!("d: {e}")))?;
        let periodic = match get("periodic")? {
            "0" => false,
            "1" => true,
            v => return Err(bad(format!("periodic must be 0 or 1, got {v}"))),
        };
        let delta: f64 = get("delta")?.parse().map_err(|e| bad(format!("delta: {e}")))?;

        let mut segments = Vec::new();
        while let Some((line, l)) = lines.next() {
            let n: usize = l
                .strip_prefix("SEG n=")
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line, msg: format!("expected 'SEG n=<int>', got '{l}'") })?;
            let mut pts = Vec::with_capacity(n + 1);
            for _ in 0..=n {
                let (line, l) = lines
                    .next()
                    .ok_or(Error::Parse { line, msg: format!("segment needs {} points", n + 1) })?;
                let coords = l
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
                if coords.len() != dim {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected {dim} coordinates, got {}", coords.len()),
                    });
                }
                pts.push(StatePoint::new(&coords).map_err(|e| Error::Parse { line, msg: e.to_string() })?);
            }
            segments.push(pts);
        }
        Self::new(segments, periodic, delta)
    }
}

fn parse_header(line: usize, header: &str) -> Result<Vec<(String, String)>> {
    let mut words = header.split_whitespace();
    if words.next() != Some("PSEUDO") {
        return Err(Error::Parse { line, msg: "expected a PSEUDO header".into() });
    }
    words
        .map(|w| {
            w.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse { line, msg: format!("malformed field '{w}'") })
        })
        .collect()
}
