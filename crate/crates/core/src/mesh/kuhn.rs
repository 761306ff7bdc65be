use crate::error::{Error, Result};

use super::Grid;

/// One simplex of the reference cell `[0, 1]ⁿ`.
///
/// Vertices are `ξ₁ = 0` and `ξ_{j+1} = ξ_j + e_{perm[j]}`, stored as bitmasks with bit `k` set
/// when the `k`-th coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    pub perm: Vec<usize>,
    pub vertices: Vec<u8>,
}

impl Simplex {
    pub fn vertex_coords(&self) -> Vec<Vec<f64>> {
        let n = self.perm.len();
        self.vertices
            .iter()
            .map(|&b| (0..n).map(|k| f64::from(b >> k & 1)).collect())
            .collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// The `n!` Kuhn simplices of the unit cube in lexicographic permutation order.
pub fn kuhn_tessellate(n: usize) -> Result<Vec<Simplex>> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(permutations(n)
        .into_iter()
        .map(|perm| {
            let mut vertices = vec![0u8];
            let mut bits = 0u8;
            for &k in &perm {
                bits |= 1 << k;
                vertices.push(bits);
            }
            Simplex { perm, vertices }
        })
        .collect())
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// The Kuhn tessellation of a [`Grid`] into `n!·Mⁿ` simplices.
///
/// Element `e` is simplex `e % n!` of cell `e / n!`; cells are numbered like nodes, axis 1
/// fastest, with `M` cells per axis.
#[derive(Clone, Debug)]
pub struct KuhnMesh {
    grid: Grid,
    reference: Vec<Simplex>,
    /// Node index offsets of the vertices of each reference simplex from the cell's low corner.
    offsets: Vec<[usize; 4]>,
}

impl KuhnMesh {
    pub fn new(grid: Grid) -> Result<Self> {
        let reference = kuhn_tessellate(grid.dim())?;
        let strides = grid.strides();
        let offsets = reference
            .iter()
            .map(|s| {
                let mut o = [0; 4];
                for (j, &b) in s.vertices.iter().enumerate() {
                    o[j] = (0..grid.dim()).filter(|k| b >> k & 1 == 1).map(|k| strides[k]).sum();
                }
                o
            })
            .collect();
        Ok(KuhnMesh { grid, reference, offsets })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn reference(&self) -> &[Simplex] {
        &self.reference
    }

    pub fn simplices_per_cell(&self) -> usize {
        self.reference.len()
    }

    pub fn element_count(&self) -> usize {
        self.grid.cell_count() * self.reference.len()
    }

    /// `Δxⁿ/n!`.
    pub fn element_volume(&self) -> f64 {
        self.grid.spacing().powi(self.grid.dim() as i32) / self.reference.len() as f64
    }

    /// Node offsets of the vertices of reference simplex `s` relative to the cell corner.
    pub fn vertex_offsets(&self, s: usize) -> &[usize] {
        &self.offsets[s][..=self.grid.dim()]
    }

    pub fn cell_corner(&self, cell: usize) -> usize {
        let m = self.grid.resolution();
        let strides = self.grid.strides();
        let mut c = cell;
        let mut base = 0;
        for s in strides.iter().take(self.grid.dim()) {
            base += (c % m) * s;
            c /= m;
        }
        base
    }

    pub fn element_nodes(&self, e: usize) -> Vec<usize> {
        let per = self.reference.len();
        let base = self.cell_corner(e / per);
        self.vertex_offsets(e % per).iter().map(|o| base + o).collect()
    }

    /// Calls `f(cell, corner)` for every cell in element order.
    pub fn for_each_cell(&self, mut f: impl FnMut(usize, usize)) {
        let ext = self.grid.cell_extents();
        let strides = self.grid.strides();
        let mut cell = 0;
        for i2 in 0..ext[2] {
            for i1 in 0..ext[1] {
                let row = i2 * strides[2] + i1 * strides[1];
                for i0 in 0..ext[0] {
                    f(cell, row + i0);
                    cell += 1;
                }
            }
        }
    }

    /// Locates `x` (clamped to the domain) and returns the element together with its vertex
    /// nodes and barycentric weights.
    pub fn locate(&self, x: &[f64]) -> (usize, [usize; 4], [f64; 4]) {
        let n = self.grid.dim();
        let m = self.grid.resolution();
        let mut cell = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..n {
            let t = ((x[k] + 0.5) * m as f64).clamp(0.0, m as f64);
            let c = (t.floor() as usize).min(m - 1);
            cell[k] = c;
            frac[k] = (t - c as f64).clamp(0.0, 1.0);
        }
        let mut perm = [0usize, 1, 2];
        perm[..n].sort_by(|&a, &b| frac[b].total_cmp(&frac[a]).then(a.cmp(&b)));
        let s = self
            .reference
            .iter()
            .position(|r| r.perm[..] == perm[..n])
            .expect("every permutation is a reference simplex");
        let mut cell_index = 0;
        let mut corner = 0;
        let strides = self.grid.strides();
        for k in (0..n).rev() {
            cell_index = cell_index * m + cell[k];
            corner += cell[k] * strides[k];
        }
        let mut nodes = [0; 4];
        let mut weights = [0.0; 4];
        for (j, o) in self.vertex_offsets(s).iter().enumerate() {
            nodes[j] = corner + o;
        }
        weights[0] = 1.0 - frac[perm[0]];
        for j in 1..n {
            weights[j] = frac[perm[j - 1]] - frac[perm[j]];
        }
        weights[n] = frac[perm[n - 1]];
        (cell_index * self.reference.len() + s, nodes, weights)
    }
}
