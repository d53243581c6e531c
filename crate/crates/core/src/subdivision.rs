//! Subdivisions of the interval between `s` and `t`.
//!
//! A subdivision is either regular (stored as `k`, points generated on demand
//! so that very fine dyadic levels cost no memory) or an explicit point list.
//! Points run monotonically from `s` to `t`, decreasing when `s > t`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Repr {
    Regular { k: u64 },
    Explicit(Vec<f64>),
}

#[derive(Clone)]
pub struct Subdivision {
    start: f64,
    end: f64,
    repr: Repr,
}

impl Subdivision {
    /// Subdivision `(s, interior…, t)`. Interior points must be strictly
    /// monotone in the direction from `s` to `t` and lie strictly inside.
    pub fn new(start: f64, end: f64, interior: &[f64]) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::Domain("endpoints must be finite".into()));
        }
        let mut points = Vec::with_capacity(interior.len() + 2);
        points.push(start);
        points.extend_from_slice(interior);
        points.push(end);
        Self::from_points(points)
    }

    /// Full point list including both endpoints.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("a subdivision needs both endpoints".into()));
        }
        let start = points[0];
        let end = *points.last().unwrap();
        if start == end {
            if points.iter().any(|&p| p != start) {
                return Err(Error::Domain("degenerate interval with distinct points".into()));
            }
            return Ok(Subdivision {
                start,
                end,
                repr: Repr::Explicit(vec![start, end]),
            });
        }
        let dir = (end - start).signum();
        if points.iter().any(|p| !p.is_finite())
            || points.windows(2).any(|w| (w[1] - w[0]) * dir <= 0.0)
        {
            return Err(Error::Domain(format!(
                "points must be strictly monotone from {start} to {end}"
            )));
        }
        Ok(Subdivision {
            start,
            end,
            repr: Repr::Explicit(points),
        })
    }

    pub fn trivial(start: f64, end: f64) -> Self {
        Subdivision {
            start,
            end,
            repr: Repr::Explicit(vec![start, end]),
        }
    }

    /// `k` equal intervals. `t_j = s + (t - s) j / k`, with `t_k = t` exactly.
    pub fn regular(start: f64, end: f64, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("regular subdivision needs k >= 1".into()));
        }
        if start == end {
            return Ok(Self::trivial(start, end));
        }
        Ok(Subdivision {
            start,
            end,
            repr: Repr::Regular { k },
        })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Number of intervals `k`.
    pub fn intervals(&self) -> u64 {
        match &self.repr {
            Repr::Regular { k } => *k,
            Repr::Explicit(p) => (p.len() - 1) as u64,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.intervals() == 1
    }

    /// Point `t_j` for `0 <= j <= k`.
    pub fn point(&self, j: u64) -> f64 {
        match &self.repr {
            Repr::Regular { k } => {
                if j == 0 {
                    self.start
                } else if j == *k {
                    self.end
                } else {
                    self.start + (self.end - self.start) * (j as f64 / *k as f64)
                }
            }
            Repr::Explicit(p) => p[j as usize],
        }
    }

    pub fn points(&self) -> impl DoubleEndedIterator<Item = f64> + ExactSizeIterator + '_ {
        (0..self.intervals() as usize + 1).map(move |j| self.point(j as u64))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }

    /// Largest gap `max_j |t_j - t_{j-1}|`.
    pub fn mesh(&self) -> f64 {
        match &self.repr {
            Repr::Regular { k } => (self.end - self.start).abs() / *k as f64,
            Repr::Explicit(p) => p
                .windows(2)
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max),
        }
    }

    /// Inserts every interval midpoint `(a + b) / 2`.
    pub fn dyadic_refine(&self) -> Subdivision {
        if self.start == self.end {
            return self.clone();
        }
        match &self.repr {
            Repr::Regular { k } => Subdivision {
                start: self.start,
                end: self.end,
                repr: Repr::Regular { k: 2 * k },
            },
            Repr::Explicit(p) => {
                let mut out = Vec::with_capacity(2 * p.len() - 1);
                for w in p.windows(2) {
                    out.push(w[0]);
                    out.push((w[0] + w[1]) / 2.0);
                }
                out.push(self.end);
                Subdivision {
                    start: self.start,
                    end: self.end,
                    repr: Repr::Explicit(out),
                }
            }
        }
    }

    /// Coarsest common refinement: the sorted union of both point sets.
    pub fn joint(&self, other: &Subdivision) -> Result<Subdivision> {
        self.check_endpoints(other)?;
        let (a, b) = (self.to_vec(), other.to_vec());
        let dir = if self.end >= self.start { 1.0 } else { -1.0 };
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), Some(&y)) if (x - y) * dir < 0.0 => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            if out.last() != Some(&next) {
                out.push(next);
            }
        }
        Subdivision::from_points(out)
    }

    /// True when every point of `coarser` is a point of `self`.
    pub fn refines(&self, coarser: &Subdivision) -> bool {
        if self.start != coarser.start || self.end != coarser.end {
            return false;
        }
        let dir = if self.end >= self.start { 1.0 } else { -1.0 };
        let mut fine = self.points().peekable();
        'outer: for c in coarser.points() {
            while let Some(&f) = fine.peek() {
                if f == c {
                    continue 'outer;
                }
                if (f - c) * dir > 0.0 {
                    return false;
                }
                fine.next();
            }
            return false;
        }
        true
    }

    /// Removes the interior point `t_j` whose two adjacent blocks have the
    /// smallest total length. Ties go to the smallest `j`. Returns the
    /// coarser subdivision and `j`.
    pub fn coarsen_minimal_pair(&self) -> Result<(Subdivision, usize)> {
        let points = self.to_vec();
        if points.len() < 3 {
            return Err(Error::CannotCoarsen);
        }
        let pair = |j: usize| (points[j] - points[j - 1]).abs() + (points[j + 1] - points[j]).abs();
        let min = (1..points.len() - 1).map(pair).fold(f64::INFINITY, f64::min);
        let slack = 1e-12 * (self.end - self.start).abs();
        let j = (1..points.len() - 1)
            .find(|&j| pair(j) <= min + slack)
            .expect("non-empty interior");
        let mut rest = points;
        rest.remove(j);
        Ok((Subdivision::from_points(rest)?, j))
    }

    /// Same points, traversed from `t` back to `s`.
    pub fn reverse(&self) -> Subdivision {
        // Regular points are generated from the start, so an exact reversal
        // has to materialise them.
        Subdivision {
            start: self.end,
            end: self.start,
            repr: Repr::Explicit(self.points().rev().collect()),
        }
    }

    /// `self` on `[s, u]` followed by `tail` on `[u, t]`.
    pub fn concat(&self, tail: &Subdivision) -> Result<Subdivision> {
        if self.end != tail.start {
            return Err(Error::EndpointMismatch(self.start, self.end, tail.start, tail.end));
        }
        let mut pts = self.to_vec();
        pts.extend(tail.points().skip(1));
        Subdivision::from_points(pts)
    }

    fn check_endpoints(&self, other: &Subdivision) -> Result<()> {
        if self.start != other.start || self.end != other.end {
            return Err(Error::EndpointMismatch(
                self.start, self.end, other.start, other.end,
            ));
        }
        Ok(())
    }
}

impl PartialEq for Subdivision {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start
            && self.end == other.end
            && self.intervals() == other.intervals()
            && self.points().zip(other.points()).all(|(a, b)| a == b)
    }
}

impl fmt::Debug for Subdivision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals() <= 16 {
            f.debug_tuple("Subdivision").field(&self.to_vec()).finish()
        } else {
            write!(
                f,
                "Subdivision({} .. {}, {} intervals)",
                self.start,
                self.end,
                self.intervals()
            )
        }
    }
}
