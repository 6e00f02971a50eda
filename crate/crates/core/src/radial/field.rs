use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::grid::RadialGrid;

/// A real radial function sampled at every node of a [`RadialGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the nodes. Panics if `f` returns a non-finite value.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values).expect("sampled function must be finite")
    }

    /// Samples `f` and pins the truncation value `u(R) = 0`.
    pub fn from_fn_dirichlet(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        let mut field = Self::from_fn(grid, f);
        field.values[grid.intervals()] = 0.0;
        field
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: RadialGrid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// H1-class fields satisfy the Dirichlet truncation `u(R) = 0`.
    pub fn is_h1_class(&self) -> bool {
        self.values[self.grid.intervals()] == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn ensure_same_grid(&self, other: &RadialField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Node-wise combination `f(r_i, self_i)`.
    pub fn map_with_r(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(self.grid.node(i), v))
            .collect();
        Self { grid: self.grid, values }
    }

    pub fn scaled(&self, t: f64) -> Self {
        self.map(|v| t * v)
    }

    pub fn zip_with(&self, other: &RadialField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &RadialField) -> Result<Self> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes the `r,value` CSV dump with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "r,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.grid.node(i), v)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Reads an `r,value` dump. The node positions must match a uniform grid
    /// starting at 0.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == "r,value" => {}
            _ => return Err(Error::Config("field csv must start with header `r,value`".into())),
        }
        let mut rs = Vec::new();
        let mut vs = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Config(format!("csv row {}: missing column", n + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("csv row {}: {e}", n + 2)))
            };
            rs.push(parse(parts.next())?);
            vs.push(parse(parts.next())?);
        }
        if rs.len() < 2 {
            return Err(Error::Config("field csv has fewer than two rows".into()));
        }
        let radius = *rs.last().unwrap();
        let grid = RadialGrid::new(radius, rs.len() - 1)?;
        let h = grid.spacing();
        for (i, r) in rs.iter().enumerate() {
            if (r - grid.node(i)).abs() > 1e-9 * radius.max(1.0) + 1e-12 * h {
                return Err(Error::Config(format!("csv node {i} at r={r} is not on a uniform grid")));
            }
        }
        Self::new(grid, vs)
    }
}
