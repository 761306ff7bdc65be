//! Zero level set extraction and Hausdorff-type distances between surfaces.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::anisotropy::Anisotropy;
use crate::error::{Error, Result};
use crate::exact::SelfSimilarSolution;
use crate::flow::Trajectory;
use crate::mesh::{Grid, KuhnMesh, ScalarField};
use crate::redistance::Redistancer;

/// A polyline (n = 2) or triangle surface (n = 3) with per-facet measures.
///
/// Facets are oriented so that their normal points out of `{v ≤ 0}`: segments `(a, b)` have
/// outer normal `(b − a)` rotated clockwise, triangles follow the right-hand rule.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceMesh {
    dim: usize,
    vertices: Vec<[f64; 3]>,
    facets: Vec<[usize; 3]>,
    measures: Vec<f64>,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn lerp(a: &[f64; 3], b: &[f64; 3], t: f64) -> [f64; 3] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

impl SurfaceMesh {
    pub fn empty(dim: usize) -> Self {
        SurfaceMesh { dim, ..Default::default() }
    }

    /// Builds a mesh from vertices and facets, computing measures. Segments use the first two
    /// facet entries.
    pub fn new(dim: usize, vertices: Vec<[f64; 3]>, facets: Vec<[usize; 3]>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let k = dim;
        if let Some(bad) = facets.iter().find(|f| f[..k].iter().any(|&i| i >= vertices.len())) {
            return Err(Error::Parse(format!("facet {bad:?} refers to a missing vertex")));
        }
        let mut mesh = SurfaceMesh { dim, vertices, facets, measures: Vec::new() };
        mesh.measures = (0..mesh.facets.len()).map(|f| mesh.compute_measure(f)).collect();
        Ok(mesh)
    }

    fn compute_measure(&self, f: usize) -> f64 {
        let fa = self.facets[f];
        let a = &self.vertices[fa[0]];
        let b = &self.vertices[fa[1]];
        if self.dim == 2 {
            norm(&sub(b, a))
        } else {
            0.5 * norm(&cross(&sub(b, a), &sub(&self.vertices[fa[2]], a)))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    /// Vertex indices per facet; the third entry is unused for segments.
    pub fn facets(&self) -> &[[usize; 3]] {
        &self.facets
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    pub fn facet_vertices(&self, f: usize) -> impl Iterator<Item = &[f64; 3]> {
        self.facets[f][..self.dim].iter().map(move |&i| &self.vertices[i])
    }

    /// Wavefront-style text: `v x y z` lines, then `l i j` or `f i j k` with 1-based indices.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {:e} {:e} {:e}", v[0], v[1], v[2]);
        }
        for f in &self.facets {
            if self.dim == 2 {
                let _ = writeln!(s, "l {} {}", f[0] + 1, f[1] + 1);
            } else {
                let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
            }
        }
        s
    }

    /// Parses [`SurfaceMesh::to_obj`] output. The dimension cannot be read from an empty or
    /// vertex-only file, so it is passed in.
    pub fn from_obj(text: &str, dim: usize) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut facets = Vec::new();
        let want = if dim == 2 { "l" } else { "f" };
        for (no, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(tag) = parts.next() else { continue };
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", no + 1));
            match tag {
                "v" => {
                    let c: Vec<f64> = parts
                        .map(f64::from_str)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| bad(&e.to_string()))?;
                    if c.len() != 3 {
                        return Err(bad("expected three coordinates"));
                    }
                    vertices.push([c[0], c[1], c[2]]);
                }
                t if t == want => {
                    let idx: Vec<usize> = parts
                        .map(usize::from_str)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| bad(&e.to_string()))?;
                    if idx.len() != dim || idx.contains(&0) {
                        return Err(bad("bad facet indices"));
                    }
                    let mut f = [0; 3];
                    for (k, i) in idx.iter().enumerate() {
                        f[k] = i - 1;
                    }
                    facets.push(f);
                }
                "#" => {}
                other => return Err(bad(&format!("unexpected record `{other}`"))),
            }
        }
        SurfaceMesh::new(dim, vertices, facets)
    }

    pub fn write_obj(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_obj()).map_err(|e| Error::io(path, e))
    }

    pub fn read_obj(path: &Path, dim: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SurfaceMesh::from_obj(&text, dim)
    }

    /// Quadrature points of facet `f` with weights summing to its measure: Simpson's rule on
    /// segments, edge midpoints on triangles. Both are exact for quadratics.
    fn quadrature(&self, f: usize, out: &mut Vec<([f64; 3], f64)>) {
        out.clear();
        let fa = self.facets[f];
        let m = self.measures[f];
        let a = &self.vertices[fa[0]];
        let b = &self.vertices[fa[1]];
        if self.dim == 2 {
            out.push((*a, m / 6.0));
            out.push((*b, m / 6.0));
            out.push((lerp(a, b, 0.5), 2.0 * m / 3.0));
        } else {
            let c = &self.vertices[fa[2]];
            out.push((*a, 0.0));
            out.push((*b, 0.0));
            out.push((*c, 0.0));
            out.push((lerp(a, b, 0.5), m / 3.0));
            out.push((lerp(b, c, 0.5), m / 3.0));
            out.push((lerp(c, a, 0.5), m / 3.0));
        }
    }
}

/// Marching triangles/tetrahedra over the Kuhn mesh with `v ≤ 0` counted as inside.
pub fn extract_surface(v: &ScalarField, mesh: &KuhnMesh) -> SurfaceMesh {
    let grid = *mesh.grid();
    let n = grid.dim();
    let vals = v.values();
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut facets = Vec::new();
    let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
    let mut crossing = |i: usize, j: usize, vertices: &mut Vec<[f64; 3]>| -> usize {
        // i inside, j outside
        *lookup.entry((i, j)).or_insert_with(|| {
            let (a, b) = (vals[i], vals[j]);
            let t = a / (a - b);
            vertices.push(lerp(&grid.coord(i), &grid.coord(j), t));
            vertices.len() - 1
        })
    };
    let per = mesh.simplices_per_cell();
    let mut nodes = [0usize; 4];
    mesh.for_each_cell(|_, corner| {
        for s in 0..per {
            let offs = mesh.vertex_offsets(s);
            let mut inside = 0u8;
            for (k, o) in offs.iter().enumerate() {
                nodes[k] = corner + o;
                if vals[nodes[k]] <= 0.0 {
                    inside |= 1 << k;
                }
            }
            let count = inside.count_ones() as usize;
            if count == 0 || count == n + 1 {
                continue;
            }
            let ins: Vec<usize> = (0..=n).filter(|k| inside >> k & 1 == 1).map(|k| nodes[k]).collect();
            let outs: Vec<usize> = (0..=n).filter(|k| inside >> k & 1 == 0).map(|k| nodes[k]).collect();
            // direction of increasing v, for orientation
            let grad = simplex_gradient(&grid, &nodes[..=n], vals);
            let mut emit = |mut f: [usize; 3], vertices: &mut Vec<[f64; 3]>| {
                let a = vertices[f[0]];
                let b = vertices[f[1]];
                let normal = if n == 2 {
                    let e = sub(&b, &a);
                    [e[1], -e[0], 0.0]
                } else {
                    cross(&sub(&b, &a), &sub(&vertices[f[2]], &a))
                };
                if dot(&normal, &grad) < 0.0 {
                    f.swap(0, 1);
                }
                facets.push(f);
            };
            if n == 2 {
                let (p, q) = if ins.len() == 1 {
                    (crossing(ins[0], outs[0], &mut vertices), crossing(ins[0], outs[1], &mut vertices))
                } else {
                    (crossing(ins[0], outs[0], &mut vertices), crossing(ins[1], outs[0], &mut vertices))
                };
                emit([p, q, 0], &mut vertices);
            } else if ins.len() == 1 || outs.len() == 1 {
                let (one, many, one_inside) =
                    if ins.len() == 1 { (ins[0], &outs, true) } else { (outs[0], &ins, false) };
                let e: Vec<usize> = many
                    .iter()
                    .map(|&o| {
                        if one_inside {
                            crossing(one, o, &mut vertices)
                        } else {
                            crossing(o, one, &mut vertices)
                        }
                    })
                    .collect();
                emit([e[0], e[1], e[2]], &mut vertices);
            } else {
                // quadrilateral p00 p01 p11 p10 in cyclic order, split along one diagonal
                let p00 = crossing(ins[0], outs[0], &mut vertices);
                let p01 = crossing(ins[0], outs[1], &mut vertices);
                let p11 = crossing(ins[1], outs[1], &mut vertices);
                let p10 = crossing(ins[1], outs[0], &mut vertices);
                emit([p00, p01, p11], &mut vertices);
                emit([p00, p11, p10], &mut vertices);
            }
        }
    });
    let mut mesh = SurfaceMesh::new(n, vertices, facets).expect("valid indices");
    // crossings through nodes with v = 0 can leave facets of zero measure
    let keep: Vec<bool> = mesh.measures.iter().map(|&m| m > 0.0).collect();
    if keep.iter().any(|k| !k) {
        let mut k = keep.iter();
        mesh.facets.retain(|_| *k.next().unwrap());
        mesh.measures.retain(|&m| m > 0.0);
    }
    mesh
}

fn simplex_gradient(grid: &Grid, nodes: &[usize], vals: &[f64]) -> [f64; 3] {
    // Kuhn simplices have vertex j+1 = vertex j + Δx e_{perm j}
    let mut g = [0.0; 3];
    for w in nodes.windows(2) {
        let a = grid.coord(w[0]);
        let b = grid.coord(w[1]);
        let k = (0..grid.dim()).find(|&k| (b[k] - a[k]).abs() > 0.5 * grid.spacing()).unwrap();
        g[k] = (vals[w[1]] - vals[w[0]]) / (b[k] - a[k]);
    }
    g
}

/// Euclidean distance from `p` to segment `ab`.
pub fn point_segment_distance(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 { (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    norm(&sub(p, &lerp(a, b, t)))
}

/// Euclidean distance from `p` to triangle `abc` (closest point by Voronoi regions).
pub fn point_triangle_distance(p: &[f64; 3], a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return norm(&ap);
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return norm(&bp);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return point_segment_distance(p, a, b);
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return norm(&cp);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return point_segment_distance(p, a, c);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0 {
        return point_segment_distance(p, b, c);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q = [
        a[0] + ab[0] * v + ac[0] * w,
        a[1] + ab[1] * v + ac[1] * w,
        a[2] + ab[2] * v + ac[2] * w,
    ];
    norm(&sub(p, &q))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HausdorffMode {
    L2,
    Inf,
}

impl FromStr for HausdorffMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(HausdorffMode::L2),
            "inf" => Ok(HausdorffMode::Inf),
            other => Err(Error::Parse(format!("metric must be l2 or inf, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for HausdorffMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HausdorffMode::L2 => "l2",
            HausdorffMode::Inf => "inf",
        })
    }
}

/// Both distances between a pair of surfaces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceDistances {
    pub h2: f64,
    pub hinf: f64,
}

impl SurfaceDistances {
    pub fn get(&self, mode: HausdorffMode) -> f64 {
        match mode {
            HausdorffMode::L2 => self.h2,
            HausdorffMode::Inf => self.hinf,
        }
    }
}

/// Distance fields and extraction on one grid, reused across many surface pairs.
#[derive(Clone, Debug)]
pub struct SurfaceMetric {
    redist: Redistancer,
}

impl SurfaceMetric {
    pub fn new(grid: Grid) -> Result<Self> {
        Ok(SurfaceMetric { redist: Redistancer::new(grid, Anisotropy::isotropic(grid.dim()))? })
    }

    pub fn grid(&self) -> &Grid {
        self.redist.grid()
    }

    pub fn mesh(&self) -> &KuhnMesh {
        self.redist.mesh()
    }

    pub fn extract(&self, v: &ScalarField) -> SurfaceMesh {
        extract_surface(v, self.mesh())
    }

    fn cell_range(&self, lo: f64, hi: f64, pad: isize) -> (usize, usize) {
        let dx = self.grid().spacing();
        let m = self.grid().resolution() as isize;
        let a = (((lo + 0.5) / dx).floor() as isize - pad).clamp(0, m - 1) as usize;
        let b = (((hi + 0.5) / dx).floor() as isize + pad).clamp(0, m - 1) as usize;
        (a, b)
    }

    /// Facets listed under every cell their bounding box touches.
    fn bucket(&self, surf: &SurfaceMesh) -> HashMap<usize, Vec<usize>> {
        let n = self.grid().dim();
        let m = self.grid().resolution();
        let mut buckets: HashMap<usize, Vec<usize>> = HashMap::new();
        for f in 0..surf.facet_count() {
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            for k in 0..n {
                let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
                for v in surf.facet_vertices(f) {
                    a = a.min(v[k]);
                    b = b.max(v[k]);
                }
                (lo[k], hi[k]) = self.cell_range(a, b, 0);
            }
            for c2 in lo[2]..=hi[2] {
                for c1 in lo[1]..=hi[1] {
                    for c0 in lo[0]..=hi[0] {
                        buckets.entry(c0 + m * (c1 + m * c2)).or_default().push(f);
                    }
                }
            }
        }
        buckets
    }

    /// Exact distance from `x` to the facets bucketed in the cells around it; a facet within
    /// `Δx` of `x` always shows up there.
    fn near_distance(
        &self,
        surf: &SurfaceMesh,
        buckets: &HashMap<usize, Vec<usize>>,
        x: &[f64; 3],
    ) -> f64 {
        let n = self.grid().dim();
        let m = self.grid().resolution();
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for k in 0..n {
            (lo[k], hi[k]) = self.cell_range(x[k], x[k], 1);
        }
        let mut best = f64::INFINITY;
        for c2 in lo[2]..=hi[2] {
            for c1 in lo[1]..=hi[1] {
                for c0 in lo[0]..=hi[0] {
                    let Some(list) = buckets.get(&(c0 + m * (c1 + m * c2))) else { continue };
                    for &f in list {
                        let fa = surf.facets[f];
                        let (a, b) = (&surf.vertices[fa[0]], &surf.vertices[fa[1]]);
                        let d = if n == 2 {
                            point_segment_distance(x, a, b)
                        } else {
                            point_triangle_distance(x, a, b, &surf.vertices[fa[2]])
                        };
                        best = best.min(d);
                    }
                }
            }
        }
        best
    }

    /// Unsigned Euclidean distance to `surf` at every node: exact within one cell of the
    /// surface, fast sweeping elsewhere.
    pub fn distance_field(&self, surf: &SurfaceMesh) -> Vec<f64> {
        let buckets = self.bucket(surf);
        self.field_from_buckets(surf, &buckets)
    }

    fn field_from_buckets(&self, surf: &SurfaceMesh, buckets: &HashMap<usize, Vec<usize>>) -> Vec<f64> {
        let grid = *self.grid();
        let n = grid.dim();
        let m = grid.resolution();
        let dx = grid.spacing();
        let st = grid.strides();
        let mut d = vec![f64::INFINITY; grid.node_count()];
        // nodes at the corners of occupied cells and their neighbours
        let mut seen = vec![false; grid.node_count()];
        for &cell in buckets.keys() {
            let c = [cell % m, cell / m % m, cell / (m * m)];
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            for k in 0..n {
                lo[k] = c[k].saturating_sub(1);
                hi[k] = (c[k] + 2).min(m);
            }
            for i2 in lo[2]..=hi[2] {
                for i1 in lo[1]..=hi[1] {
                    for i0 in lo[0]..=hi[0] {
                        let idx = i0 * st[0] + i1 * st[1] + i2 * st[2];
                        if !seen[idx] {
                            seen[idx] = true;
                            d[idx] = self.near_distance(surf, buckets, &grid.coord(idx));
                        }
                    }
                }
            }
        }
        let frozen: Vec<bool> = d.iter().map(|&x| x <= dx).collect();
        self.redist.sweep(&mut d, &frozen, None);
        d
    }

    /// Distance to the surface behind `d` and `buckets`: exact when some facet is within `Δx`,
    /// otherwise the piecewise linear interpolant of the swept field.
    fn evaluate(
        &self,
        surf: &SurfaceMesh,
        buckets: &HashMap<usize, Vec<usize>>,
        d: &[f64],
        x: &[f64; 3],
    ) -> f64 {
        let near = self.near_distance(surf, buckets, x);
        if near <= self.grid().spacing() {
            return near;
        }
        let n = self.grid().dim();
        let (_, nodes, w) = self.mesh().locate(&x[..n]);
        (0..=n).map(|k| w[k] * d[nodes[k]]).sum()
    }

    /// `(∫_Γ d², max_Γ d)` for the distance `d` to the other surface `other`.
    fn one_sided(
        &self,
        surf: &SurfaceMesh,
        other: &SurfaceMesh,
        buckets: &HashMap<usize, Vec<usize>>,
        d: &[f64],
    ) -> (f64, f64) {
        let mut pts = Vec::new();
        let mut integral = 0.0;
        let mut max: f64 = 0.0;
        for f in 0..surf.facet_count() {
            surf.quadrature(f, &mut pts);
            for (x, w) in &pts {
                let val = self.evaluate(other, buckets, d, x);
                integral += w * val * val;
                max = max.max(val);
            }
        }
        (integral, max)
    }

    pub fn distances(&self, a: &SurfaceMesh, b: &SurfaceMesh) -> SurfaceDistances {
        match (a.is_empty(), b.is_empty()) {
            (true, true) => return SurfaceDistances { h2: 0.0, hinf: 0.0 },
            (true, false) | (false, true) => {
                return SurfaceDistances { h2: f64::INFINITY, hinf: f64::INFINITY }
            }
            _ => {}
        }
        let ba = self.bucket(a);
        let bb = self.bucket(b);
        let da = self.field_from_buckets(a, &ba);
        let db = self.field_from_buckets(b, &bb);
        let (ia, ma) = self.one_sided(a, b, &bb, &db);
        let (ib, mb) = self.one_sided(b, a, &ba, &da);
        SurfaceDistances { h2: (ia + ib).sqrt(), hinf: ma.max(mb) }
    }

    pub fn hausdorff(&self, a: &SurfaceMesh, b: &SurfaceMesh, mode: HausdorffMode) -> f64 {
        self.distances(a, b).get(mode)
    }
}

/// `dist_{H,2}` or `dist_{H,∞}` between two surfaces, using distance fields on `grid`.
pub fn hausdorff(a: &SurfaceMesh, b: &SurfaceMesh, grid: Grid, mode: HausdorffMode) -> Result<f64> {
    Ok(SurfaceMetric::new(grid)?.hausdorff(a, b, mode))
}

/// One row of a benchmark error table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRow {
    pub t: f64,
    pub h2: f64,
    pub hinf: f64,
    /// Whether the row counts towards the maximum.
    pub counted: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    /// Largest counted error, `None` without counted rows.
    pub fn max(&self, mode: HausdorffMode) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.counted)
            .map(|r| match mode {
                HausdorffMode::L2 => r.h2,
                HausdorffMode::Inf => r.hinf,
            })
            .reduce(f64::max)
    }

    /// CSV with header `t,dist_h2,dist_hinf`; infinite values are written as `inf`.
    pub fn to_csv(&self) -> String {
        let fmt = |x: f64| if x.is_infinite() { "inf".to_string() } else { format!("{x:.9e}") };
        let mut s = String::from("t,dist_h2,dist_hinf\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.6},{},{}", r.t, fmt(r.h2), fmt(r.hinf));
        }
        s
    }
}

/// Times whose exact shape is smaller than this many cells are left out of the maximum.
pub const WINDOW_CELLS: f64 = 4.0;

/// Compares every snapshot in `window` with the exact surface. Rows where the exact solution
/// is extinct or thinner than [`WINDOW_CELLS`] cells are reported but not counted.
pub fn benchmark_error(
    traj: &Trajectory,
    exact: &SelfSimilarSolution,
    metric: &SurfaceMetric,
    window: (f64, f64),
) -> ErrorTable {
    let grid = *metric.grid();
    let min_scale = WINDOW_CELLS * grid.spacing();
    let eps = 1e-9;
    let mut table = ErrorTable::default();
    for (t, v) in &traj.snapshots {
        let t = *t;
        if t < window.0 - eps || t > window.1 + eps {
            continue;
        }
        match exact.feature_scale(t) {
            None => table.rows.push(ErrorRow {
                t,
                h2: f64::INFINITY,
                hinf: f64::INFINITY,
                counted: false,
            }),
            Some(scale) => {
                let num = metric.extract(v);
                let ex = metric.extract(&exact.exact_level_set(t, grid));
                let d = metric.distances(&num, &ex);
                table.rows.push(ErrorRow { t, h2: d.h2, hinf: d.hinf, counted: scale >= min_scale });
            }
        }
    }
    table
}
