//! Discrete gradients, divergences and the `(μ − λΔ)` Gauss–Seidel smoother.
//!
//! Both pairs are adjoint for the inner products `⟨u, v⟩ = Δxⁿ Σ uᵢvᵢ` on nodes and
//! `⟨d, e⟩ = w Σ d_j·e_j` on vectors, with `w = Δxⁿ` per node (finite differences) or
//! `w = Δxⁿ/n!` per simplex (finite elements), so that `⟨div d, v⟩ = −⟨d, ∇v⟩`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::kuhn::factorial;
use super::{Grid, KuhnMesh, Layout, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Discretization {
    /// Forward difference gradient, adjoint backward divergence, per-node vectors.
    #[default]
    Fdm,
    /// P1 gradient on the Kuhn mesh, per-element vectors, lumped mass.
    Fem,
}

impl FromStr for Discretization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fdm" => Ok(Discretization::Fdm),
            "fem" => Ok(Discretization::Fem),
            _ => Err(Error::Parse(format!("unknown discretization `{s}` (expected fdm or fem)"))),
        }
    }
}

impl fmt::Display for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discretization::Fdm => "fdm",
            Discretization::Fem => "fem",
        })
    }
}

/// Per-element P1 gradient.
pub fn grad_p1(v: &ScalarField, mesh: &KuhnMesh) -> VectorField {
    let n = mesh.grid().dim();
    let mut out = VectorField::zeros(Layout::PerElement, n, mesh.element_count());
    fem_grad(mesh, v.values(), out.data_mut());
    out
}

/// Negative adjoint of [`grad_p1`].
pub fn div_p0(d: &VectorField, mesh: &KuhnMesh) -> Result<ScalarField> {
    if d.layout() != Layout::PerElement || d.entries() != mesh.element_count() {
        return Err(Error::LayoutMismatch("div_p0 needs one vector per element".into()));
    }
    let mut out = ScalarField::zeros(*mesh.grid());
    fem_div(mesh, d.data(), out.values_mut());
    Ok(out)
}

/// Per-node forward differences, zero across the high boundary.
pub fn grad_fdm(v: &ScalarField) -> VectorField {
    let grid = *v.grid();
    let mut out = VectorField::zeros(Layout::PerNode, grid.dim(), grid.node_count());
    fdm_grad(&grid, v.values(), out.data_mut());
    out
}

/// Negative adjoint of [`grad_fdm`].
pub fn div_fdm(d: &VectorField, grid: &Grid) -> Result<ScalarField> {
    if d.layout() != Layout::PerNode || d.entries() != grid.node_count() {
        return Err(Error::LayoutMismatch("div_fdm needs one vector per node".into()));
    }
    let mut out = ScalarField::zeros(*grid);
    fdm_div(grid, d.data(), out.values_mut());
    Ok(out)
}

fn fem_grad(mesh: &KuhnMesh, v: &[f64], out: &mut [f64]) {
    let n = mesh.grid().dim();
    let inv_dx = 1.0 / mesh.grid().spacing();
    let per = mesh.simplices_per_cell();
    let perms: Vec<Vec<usize>> = mesh.reference().iter().map(|s| s.perm.clone()).collect();
    let offsets: Vec<Vec<usize>> = (0..per).map(|s| mesh.vertex_offsets(s).to_vec()).collect();
    mesh.for_each_cell(|cell, corner| {
        for s in 0..per {
            let g = &mut out[(cell * per + s) * n..(cell * per + s + 1) * n];
            let off = &offsets[s];
            for j in 0..n {
                g[perms[s][j]] = (v[corner + off[j + 1]] - v[corner + off[j]]) * inv_dx;
            }
        }
    });
}

fn fem_div(mesh: &KuhnMesh, d: &[f64], out: &mut [f64]) {
    let n = mesh.grid().dim();
    let per = mesh.simplices_per_cell();
    let c = 1.0 / (per as f64 * mesh.grid().spacing());
    let perms: Vec<Vec<usize>> = mesh.reference().iter().map(|s| s.perm.clone()).collect();
    let offsets: Vec<Vec<usize>> = (0..per).map(|s| mesh.vertex_offsets(s).to_vec()).collect();
    out.fill(0.0);
    mesh.for_each_cell(|cell, corner| {
        for s in 0..per {
            let g = &d[(cell * per + s) * n..(cell * per + s + 1) * n];
            let off = &offsets[s];
            for j in 0..n {
                let flux = c * g[perms[s][j]];
                out[corner + off[j + 1]] -= flux;
                out[corner + off[j]] += flux;
            }
        }
    });
}

fn fdm_grad(grid: &Grid, v: &[f64], out: &mut [f64]) {
    let n = grid.dim();
    let m = grid.resolution();
    let inv_dx = 1.0 / grid.spacing();
    let ext = grid.extents();
    let st = grid.strides();
    for i2 in 0..ext[2] {
        for i1 in 0..ext[1] {
            let base = i1 * st[1] + i2 * st[2];
            let up = [true, i1 < m, i2 < m];
            // every node but the last in the row has all forward neighbours it needs
            match (n, up[1] && up[2]) {
                (2, true) => grad_row::<2>(v, out, base, m, st, inv_dx),
                (3, true) => grad_row::<3>(v, out, base, m, st, inv_dx),
                _ => {
                    for idx in base..base + m {
                        for k in 0..n {
                            out[idx * n + k] = if up[k] { (v[idx + st[k]] - v[idx]) * inv_dx } else { 0.0 };
                        }
                    }
                }
            }
            let idx = base + m;
            out[idx * n] = 0.0;
            for k in 1..n {
                out[idx * n + k] = if up[k] { (v[idx + st[k]] - v[idx]) * inv_dx } else { 0.0 };
            }
        }
    }
}

fn fdm_div(grid: &Grid, d: &[f64], out: &mut [f64]) {
    let n = grid.dim();
    let m = grid.resolution();
    let inv_dx = 1.0 / grid.spacing();
    let ext = grid.extents();
    let st = grid.strides();
    let node = |idx: usize, i: [usize; 3]| {
        let mut acc = 0.0;
        for k in 0..n {
            if i[k] < m {
                acc += d[idx * n + k];
            }
            if i[k] > 0 {
                acc -= d[(idx - st[k]) * n + k];
            }
        }
        acc * inv_dx
    };
    for i2 in 0..ext[2] {
        for i1 in 0..ext[1] {
            let base = i1 * st[1] + i2 * st[2];
            let inner = (n < 2 || (i1 > 0 && i1 < m)) && (n < 3 || (i2 > 0 && i2 < m));
            out[base] = node(base, [0, i1, i2]);
            if inner {
                match n {
                    2 => div_row::<2>(d, out, base, m, st, inv_dx),
                    3 => div_row::<3>(d, out, base, m, st, inv_dx),
                    _ => div_row::<1>(d, out, base, m, st, inv_dx),
                }
            } else {
                for i0 in 1..m {
                    out[base + i0] = node(base + i0, [i0, i1, i2]);
                }
            }
            if m > 0 {
                out[base + m] = node(base + m, [m, i1, i2]);
            }
        }
    }
}

/// Forward differences on nodes `base..base + m` whose forward neighbours all exist.
fn grad_row<const N: usize>(v: &[f64], out: &mut [f64], base: usize, m: usize, st: [usize; 3], inv_dx: f64) {
    let out = &mut out[base * N..(base + m) * N];
    for (j, o) in out.chunks_exact_mut(N).enumerate() {
        let idx = base + j;
        let c = v[idx];
        for k in 0..N {
            o[k] = (v[idx + st[k]] - c) * inv_dx;
        }
    }
}

/// Backward-difference divergence on the interior nodes `base + 1..base + m` of a row.
fn div_row<const N: usize>(d: &[f64], out: &mut [f64], base: usize, m: usize, st: [usize; 3], inv_dx: f64) {
    for idx in base + 1..base + m {
        let mut acc = 0.0;
        for k in 0..N {
            acc += d[idx * N + k] - d[(idx - st[k]) * N + k];
        }
        out[idx] = acc * inv_dx;
    }
}

/// Position of a node along one axis.
fn side(i: usize, m: usize) -> usize {
    if i == 0 {
        0
    } else if i == m {
        2
    } else {
        1
    }
}

/// Laplacian weights `w_ij` of the axis neighbours, indexed by the node's boundary pattern
/// `Σ side_k 3^k` and by direction `2k` (towards `−e_k`) or `2k + 1` (towards `+e_k`).
fn laplace_table(grid: &Grid, disc: Discretization) -> Vec<[f64; 6]> {
    let n = grid.dim();
    let inv_dx2 = 1.0 / (grid.spacing() * grid.spacing());
    let nf = factorial(n) as f64;
    let patterns = 3usize.pow(n as u32);
    let mut table = vec![[0.0; 6]; patterns];
    for (code, row) in table.iter_mut().enumerate() {
        let sides: Vec<usize> = (0..n).map(|k| code / 3usize.pow(k as u32) % 3).collect();
        for k in 0..n {
            for (dir, exists) in [(2 * k, sides[k] != 0), (2 * k + 1, sides[k] != 2)] {
                if !exists {
                    continue;
                }
                row[dir] = match disc {
                    Discretization::Fdm => inv_dx2,
                    Discretization::Fem => {
                        // The edge is a chain edge `S → S ∪ {k}` of |S|!(n−1−|S|)! simplices in
                        // each adjacent cell, where S marks the axes on which the cell lies
                        // below the edge.
                        let others: Vec<usize> = (0..n).filter(|&j| j != k).collect();
                        let mut count = 0usize;
                        for mask in 0..1usize << others.len() {
                            let valid = others.iter().enumerate().all(|(b, &j)| {
                                if mask >> b & 1 == 1 {
                                    sides[j] != 0
                                } else {
                                    sides[j] != 2
                                }
                            });
                            if valid {
                                let s = mask.count_ones() as usize;
                                count += factorial(s) * factorial(n - 1 - s);
                            }
                        }
                        count as f64 / nf * inv_dx2
                    }
                };
            }
        }
    }
    table
}

/// Discrete operators for one grid and discretization.
#[derive(Clone, Debug)]
pub struct Operators {
    disc: Discretization,
    mesh: KuhnMesh,
    laplace: Vec<[f64; 6]>,
}

impl Operators {
    pub fn new(grid: Grid, disc: Discretization) -> Result<Self> {
        let mesh = KuhnMesh::new(grid)?;
        let laplace = laplace_table(&grid, disc);
        Ok(Operators { disc, mesh, laplace })
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    pub fn grid(&self) -> &Grid {
        self.mesh.grid()
    }

    pub fn mesh(&self) -> &KuhnMesh {
        &self.mesh
    }

    pub fn layout(&self) -> Layout {
        match self.disc {
            Discretization::Fdm => Layout::PerNode,
            Discretization::Fem => Layout::PerElement,
        }
    }

    /// Number of vectors in a gradient field.
    pub fn vector_entries(&self) -> usize {
        match self.disc {
            Discretization::Fdm => self.grid().node_count(),
            Discretization::Fem => self.mesh.element_count(),
        }
    }

    /// Weight of one vector entry relative to one node in the inner products.
    pub fn vector_weight(&self) -> f64 {
        match self.disc {
            Discretization::Fdm => 1.0,
            Discretization::Fem => 1.0 / self.mesh.simplices_per_cell() as f64,
        }
    }

    pub fn zero_vectors(&self) -> VectorField {
        VectorField::zeros(self.layout(), self.grid().dim(), self.vector_entries())
    }

    pub fn grad_into(&self, v: &[f64], out: &mut [f64]) {
        match self.disc {
            Discretization::Fdm => fdm_grad(self.grid(), v, out),
            Discretization::Fem => fem_grad(&self.mesh, v, out),
        }
    }

    pub fn div_into(&self, d: &[f64], out: &mut [f64]) {
        match self.disc {
            Discretization::Fdm => fdm_div(self.grid(), d, out),
            Discretization::Fem => fem_div(&self.mesh, d, out),
        }
    }

    pub fn grad(&self, v: &ScalarField) -> VectorField {
        let mut out = self.zero_vectors();
        self.grad_into(v.values(), out.data_mut());
        out
    }

    pub fn div(&self, d: &VectorField) -> ScalarField {
        let mut out = ScalarField::zeros(*self.grid());
        self.div_into(d.data(), out.values_mut());
        out
    }

    /// `Δv = div ∇v`, assembled from the neighbour weights.
    pub fn laplacian_into(&self, v: &[f64], out: &mut [f64]) {
        self.visit_rows(|idx, row, st| {
            let mut acc = 0.0;
            for k in 0..3 {
                if row[2 * k] != 0.0 {
                    acc += row[2 * k] * (v[idx - st[k]] - v[idx]);
                }
                if row[2 * k + 1] != 0.0 {
                    acc += row[2 * k + 1] * (v[idx + st[k]] - v[idx]);
                }
            }
            out[idx] = acc;
        });
    }

    /// One lexicographic Gauss–Seidel pass for `(μ − λΔ)v = rhs`.
    pub fn gauss_seidel(&self, v: &mut [f64], rhs: &[f64], mu: f64, lambda: f64) {
        let grid = *self.grid();
        let n = grid.dim();
        let m = grid.resolution();
        let ext = grid.extents();
        let st = grid.strides();
        // interior nodes all carry the same weight on their 2n axis neighbours
        let interior = &self.laplace[(0..n).map(|k| 3usize.pow(k as u32)).sum::<usize>()];
        let w = lambda * interior[0];
        let inv = 1.0 / (mu + 2.0 * n as f64 * w);
        let c = w * inv;
        let generic = |v: &mut [f64], idx: usize, row: &[f64; 6]| {
            let mut diag = 0.0;
            let mut acc = 0.0;
            for k in 0..n {
                let (wl, wh) = (row[2 * k], row[2 * k + 1]);
                if wl != 0.0 {
                    diag += wl;
                    acc += wl * v[idx - st[k]];
                }
                if wh != 0.0 {
                    diag += wh;
                    acc += wh * v[idx + st[k]];
                }
            }
            v[idx] = (rhs[idx] + lambda * acc) / (mu + lambda * diag);
        };
        for i2 in 0..ext[2] {
            let c2 = if n > 2 { 9 * side(i2, m) } else { 0 };
            for i1 in 0..ext[1] {
                let c1 = if n > 1 { 3 * side(i1, m) } else { 0 };
                let base = i1 * st[1] + i2 * st[2];
                let inner_row = (n < 2 || side(i1, m) == 1) && (n < 3 || side(i2, m) == 1);
                if !inner_row || m < 2 {
                    for i0 in 0..ext[0] {
                        generic(v, base + i0, &self.laplace[c2 + c1 + side(i0, m)]);
                    }
                    continue;
                }
                generic(v, base, &self.laplace[c2 + c1]);
                // only `c · v[idx − 1]` sits on the dependency chain
                let mut prev = v[base];
                for idx in base + 1..base + m {
                    let others = match n {
                        1 => v[idx + 1],
                        2 => v[idx + 1] + v[idx - st[1]] + v[idx + st[1]],
                        _ => {
                            v[idx + 1]
                                + v[idx - st[1]]
                                + v[idx + st[1]]
                                + v[idx - st[2]]
                                + v[idx + st[2]]
                        }
                    };
                    prev = rhs[idx] * inv + c * others + c * prev;
                    v[idx] = prev;
                }
                generic(v, base + m, &self.laplace[c2 + c1 + 2]);
            }
        }
    }

    fn visit_rows(&self, mut f: impl FnMut(usize, &[f64; 6], &[usize; 3])) {
        let grid = self.grid();
        let m = grid.resolution();
        let ext = grid.extents();
        let st = grid.strides();
        let n = grid.dim();
        let mut idx = 0;
        for i2 in 0..ext[2] {
            let c2 = if n > 2 { 9 * side(i2, m) } else { 0 };
            for i1 in 0..ext[1] {
                let c1 = if n > 1 { 3 * side(i1, m) } else { 0 };
                for i0 in 0..ext[0] {
                    let row = &self.laplace[c2 + c1 + side(i0, m)];
                    f(idx, row, &st);
                    idx += 1;
                }
            }
        }
    }
}
