//! Monotone piecewise-cubic Hermite interpolation on a uniform grid.
//!
//! Node slopes come from fourth-order central differences (even reflection at
//! the origin) and are then limited so the interpolant is monotone wherever
//! the data are; at discrete extrema the slope is zero. Interpolating
//! nonnegative data therefore never produces negative values.

pub(crate) struct MonotoneCubic<'a> {
    values: &'a [f64],
    slopes: Vec<f64>,
}

impl<'a> MonotoneCubic<'a> {
    /// `values` sampled at `x_i = i` (slopes are per unit index).
    pub(crate) fn new(values: &'a [f64]) -> Self {
        let n = values.len();
        assert!(n >= 5, "monotone cubic needs at least five samples");
        let at = |k: isize| -> f64 {
            // even reflection about the origin
            values[k.unsigned_abs()]
        };
        let last = n - 1;
        let mut slopes = vec![0.0; n];
        for (i, slope) in slopes.iter_mut().enumerate() {
            let k = i as isize;
            *slope = if i + 2 <= last {
                (8.0 * (at(k + 1) - at(k - 1)) - (at(k + 2) - at(k - 2))) / 12.0
            } else if i + 1 == last {
                (values[last] - values[last - 2]) / 2.0
            } else {
                (3.0 * values[last] - 4.0 * values[last - 1] + values[last - 2]) / 2.0
            };
        }
        for i in 0..n {
            let left = if i == 0 { values[0] - values[1] } else { values[i] - values[i - 1] };
            let right = if i == last { values[i] - values[i - 1] } else { values[i + 1] - values[i] };
            let m = slopes[i];
            slopes[i] = if left * right <= 0.0 || m * right <= 0.0 {
                0.0
            } else {
                m.signum() * m.abs().min(3.0 * left.abs().min(right.abs()))
            };
        }
        Self { values, slopes }
    }

    /// Evaluates at fractional index `xi` in `[0, n-1]`; returns 0 beyond.
    pub(crate) fn eval(&self, xi: f64) -> f64 {
        let last = self.values.len() - 1;
        if xi > last as f64 {
            return 0.0;
        }
        let xi = xi.max(0.0);
        let k = (xi.floor() as usize).min(last - 1);
        let s = xi - k as f64;
        if s == 0.0 {
            return self.values[k];
        }
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[k] + h10 * self.slopes[k] + h01 * self.values[k + 1] + h11 * self.slopes[k + 1]
    }
}
