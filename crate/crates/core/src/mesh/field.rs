use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::Grid;

/// One value per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::LayoutMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.node_count()] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at the node coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let n = grid.dim();
        let values = (0..grid.node_count()).map(|i| f(&grid.coord(i)[..n])).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
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

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Text snapshot: a `lvl <n> <M>` header followed by one value per line.
    pub fn to_snapshot(&self) -> String {
        let mut s = format!("lvl {} {}\n", self.grid.dim(), self.grid.resolution());
        for v in &self.values {
            writeln!(s, "{v}").expect("writing to a String");
        }
        s
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (dim, m) = match parts.as_slice() {
            ["lvl", n, m] => (
                n.parse().map_err(|_| Error::Parse(format!("bad dimension `{n}`")))?,
                m.parse().map_err(|_| Error::Parse(format!("bad resolution `{m}`")))?,
            ),
            _ => return Err(Error::Parse(format!("bad snapshot header `{header}`"))),
        };
        let grid = Grid::new(dim, m)?;
        let values = lines
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value on line {}: `{l}`", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        ScalarField::new(grid, values)
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_snapshot()).map_err(|e| Error::io(path, e))
    }

    pub fn read_snapshot(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_snapshot(&text)
    }
}

/// Where the vectors of a [`VectorField`] live.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// One vector per node (finite differences).
    PerNode,
    /// One vector per Kuhn simplex (P1/P0 finite elements).
    PerElement,
}

/// `n`-vectors stored contiguously, entry `i` at `data[n i .. n (i + 1)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    layout: Layout,
    dim: usize,
    data: Vec<f64>,
}

impl VectorField {
    pub fn zeros(layout: Layout, dim: usize, entries: usize) -> Self {
        VectorField { layout, dim, data: vec![0.0; dim * entries] }
    }

    pub fn from_data(layout: Layout, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::LayoutMismatch(format!(
                "{} components do not split into {dim}-vectors",
                data.len()
            )));
        }
        Ok(VectorField { layout, dim, data })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[self.dim * i..self.dim * (i + 1)]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[self.dim * i..self.dim * (i + 1)]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}
