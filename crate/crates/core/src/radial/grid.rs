use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest interval count accepted by [`RadialGrid::new`].
pub const MIN_INTERVALS: usize = 16;

/// Uniform grid `r_i = i R / N`, `i = 0..=N`, on the truncated radial domain `[0, R]`.
///
/// Only `R` and `N` are stored; the spacing and nodes are derived, so
/// `r_0 = 0` and `r_N = R` hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    radius: f64,
    intervals: usize,
}

impl RadialGrid {
    pub fn new(radius: f64, intervals: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if intervals < MIN_INTERVALS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_INTERVALS} intervals, got {intervals}"
            )));
        }
        Ok(Self { radius, intervals })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.intervals as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals {
            self.radius
        } else {
            i as f64 * self.radius / self.intervals as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    /// Same domain, `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.radius, self.intervals * factor)
    }

    /// Composite Simpson weights on `[0, R]` (3/8 rule on the last three
    /// intervals when `N` is odd). All weights are positive.
    pub fn simpson_weights(&self) -> Vec<f64> {
        simpson_weights(self.len(), self.spacing())
    }

    /// Simpson weights with the volume element `4 pi r^2` folded in.
    pub fn volume_weights(&self) -> Vec<f64> {
        self.simpson_weights()
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                let r = self.node(i);
                4.0 * PI * r * r * w
            })
            .collect()
    }

    /// Trapezoid volume weights `4 pi r_i^2 h` (half weight at `R`).
    ///
    /// These carry the discrete energy functional. Radial integrands of smooth
    /// fields are even in `r` and decay at `R`, so the trapezoid rule is
    /// spectrally accurate for them, and its uniform weights make the discrete
    /// L2 gradient a plain pointwise expression.
    pub fn energy_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.len())
            .map(|i| {
                let r = self.node(i);
                let w = if i == self.intervals { 0.5 * h } else { h };
                4.0 * PI * r * r * w
            })
            .collect()
    }
}

/// Simpson weights for `n` equispaced samples with spacing `h`.
pub(crate) fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    let intervals = n - 1;
    if intervals == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let (simpson_end, tail) = if intervals.is_multiple_of(2) {
        (intervals, false)
    } else {
        (intervals - 3, true)
    };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if tail {
        let s = simpson_end;
        let c = 3.0 * h / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w
}

/// Composite Simpson integral of equispaced samples.
pub(crate) fn simpson(f: &[f64], h: f64) -> f64 {
    let w = simpson_weights(f.len(), h);
    crate::sum::sum(f.iter().zip(&w).map(|(a, b)| a * b))
}
