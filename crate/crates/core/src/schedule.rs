// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant time schedules and evaluation grids.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Segment boundaries of a piecewise-constant schedule.
#[derive(Debug, Clone)]
pub struct SegmentClock {
    bounds: Vec<f64>,
}

impl SegmentClock {
    pub fn new(durations: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut bounds = vec![0.0];
        for d in durations {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "segment durations must be positive and finite, got {d}"
                )));
            }
            bounds.push(bounds.last().unwrap() + d);
        }
        if bounds.len() == 1 {
            return Err(Error::EmptySchedule);
        }
        Ok(SegmentClock { bounds })
    }

    pub fn total(&self) -> f64 {
        *self.bounds.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn eps(&self) -> f64 {
        1e-12 * self.total().max(1.0)
    }

    /// Index of the segment active at `t`. Segments are right-continuous:
    /// a boundary time belongs to the following segment, except the final
    /// endpoint which belongs to the last one.
    pub fn index_at(&self, t: f64) -> Result<usize> {
        let eps = self.eps();
        if t < -eps || t > self.total() + eps {
            return Err(Error::TimeOutOfSchedule {
                t,
                total: self.total(),
            });
        }
        let idx = self.bounds[1..]
            .iter()
            .position(|&end| t < end - eps)
            .unwrap_or(self.len() - 1);
        Ok(idx)
    }

    /// Splits `[t0, t1]` at segment boundaries into `(segment, length)` pieces.
    pub fn split(&self, t0: f64, t1: f64) -> Result<Vec<(usize, f64)>> {
        let eps = self.eps();
        if t1 < t0 {
            return Err(Error::InvalidInput(format!(
                "interval [{t0}, {t1}] is reversed"
            )));
        }
        if t1 > self.total() + eps {
            return Err(Error::TimeOutOfSchedule {
                t: t1,
                total: self.total(),
            });
        }
        let mut pieces = Vec::new();
        let mut t = t0;
        while t < t1 - eps {
            let idx = self.index_at(t)?;
            let end = self.bounds[idx + 1].min(t1);
            let end = if end <= t + eps { t1 } else { end };
            pieces.push((idx, end - t));
            t = end;
        }
        Ok(pieces)
    }
}

/// Uniform evaluation grid `0, dt, 2dt, …, t_max`. The last interval is
/// shortened when `t_max` is not a multiple of `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_max: f64,
    pub dt: f64,
}

impl TimeGrid {
    pub fn new(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max >= 0.0) || !(dt > 0.0) || !t_max.is_finite() || !dt.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid needs t_max >= 0 and dt > 0, got t_max = {t_max}, dt = {dt}"
            )));
        }
        Ok(TimeGrid { t_max, dt })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt - 1e-9).ceil().max(0.0) as usize;
        let mut pts: Vec<f64> = (0..n).map(|k| k as f64 * self.dt).collect();
        pts.push(self.t_max);
        pts
    }
}
