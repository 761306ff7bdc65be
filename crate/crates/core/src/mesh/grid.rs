use crate::error::{Error, Result};

/// Uniform grid of `(M + 1)ⁿ` nodes on `[−½, ½]ⁿ`.
///
/// Nodes are numbered row-major with axis 1 fastest: the multi-index `(i₁, …, i_n)` has index
/// `i₁ + (M + 1) i₂ + (M + 1)² i₃` and sits at `i_k/M − ½`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    dim: usize,
    m: usize,
}

impl Grid {
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("grid resolution must be at least 1".into()));
        }
        Ok(Grid { dim, m })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of cells per axis, `M`.
    pub fn resolution(&self) -> usize {
        self.m
    }

    /// `Δx = 1/M`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn node_count(&self) -> usize {
        (self.m + 1).pow(self.dim as u32)
    }

    pub fn cell_count(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    /// Nodes per axis, padded with 1 beyond `dim`.
    pub fn extents(&self) -> [usize; 3] {
        let mut e = [1; 3];
        e[..self.dim].fill(self.m + 1);
        e
    }

    /// Cells per axis, padded with 1 beyond `dim`.
    pub fn cell_extents(&self) -> [usize; 3] {
        let mut e = [1; 3];
        e[..self.dim].fill(self.m);
        e
    }

    pub fn strides(&self) -> [usize; 3] {
        let n = self.m + 1;
        match self.dim {
            1 => [1, 0, 0],
            2 => [1, n, 0],
            _ => [1, n, n * n],
        }
    }

    pub fn index(&self, i: &[usize]) -> usize {
        let s = self.strides();
        i.iter().zip(s).map(|(a, b)| a * b).sum()
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let n = self.m + 1;
        let mut out = [0; 3];
        for o in out.iter_mut().take(self.dim) {
            *o = idx % n;
            idx /= n;
        }
        out
    }

    pub fn coord(&self, idx: usize) -> [f64; 3] {
        let i = self.multi_index(idx);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = i[k] as f64 / self.m as f64 - 0.5;
        }
        x
    }
}
