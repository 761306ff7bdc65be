//! Surface energy densities and mobilities.
//!
//! An [`Anisotropy`] is a convex, positively one-homogeneous function `σ` on `Rⁿ`. Every kind
//! supported here is described by its Wulff shape `W = {σ° ≤ 1}`:
//!
//! - `σ(p)` is the support function of `W`, `max_{x ∈ W} x·p`,
//! - `σ°(x)` is the gauge of `W`, `min {t ≥ 0 : x ∈ tW}`,
//! - the shrink operator is `ξ ↦ ξ − P_{sW}(ξ)` with `P` the Euclidean projection.
//!
//! Polytopal Wulff shapes are stored by their vertices and facets, so that `σ` is a maximum of
//! linear functions over the vertices and `σ°` a maximum over the scaled facet normals.
//!
//! Hexagons have circumradius 1 (edge length 1) with a vertex at angle 0. The triangle has
//! circumradius 1 with a vertex at angle 90°, so it is *not* even: `σ(−p) ≠ σ(p)`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Which anisotropy this is. Used for parsing, display and dispatch in tests.
#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Isotropic,
    Cubic,
    Hexagon2D,
    HexagonalPrism,
    TrianglePrism,
    Cylindrical { base: Box<Anisotropy>, axial_weight: f64 },
}

/// Convex polygon in the plane, counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
struct Polygon {
    vertices: Vec<[f64; 2]>,
    /// Outward unit normals, `normals[k]` belongs to the edge `vertices[k] → vertices[k + 1]`.
    normals: Vec<[f64; 2]>,
    /// Support values `normals[k] · vertices[k]`.
    offsets: Vec<f64>,
}

impl Polygon {
    fn regular(count: usize, circumradius: f64, first_angle: f64) -> Self {
        let vertices: Vec<[f64; 2]> = (0..count)
            .map(|k| {
                let a = first_angle + 2.0 * PI * k as f64 / count as f64;
                [circumradius * a.cos(), circumradius * a.sin()]
            })
            .collect();
        let mut normals = Vec::with_capacity(count);
        let mut offsets = Vec::with_capacity(count);
        for k in 0..count {
            let a = vertices[k];
            let b = vertices[(k + 1) % count];
            let e = [b[0] - a[0], b[1] - a[1]];
            let len = e[0].hypot(e[1]);
            let n = [e[1] / len, -e[0] / len];
            offsets.push(n[0] * a[0] + n[1] * a[1]);
            normals.push(n);
        }
        Polygon { vertices, normals, offsets }
    }

    fn support(&self, p: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0] * p[0] + v[1] * p[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, c)| (n[0] * x[0] + n[1] * x[1]) / c)
            .fold(0.0, f64::max)
    }

    fn project(&self, x: &[f64], s: f64, out: &mut [f64]) {
        let inside = self
            .normals
            .iter()
            .zip(&self.offsets)
            .all(|(n, c)| n[0] * x[0] + n[1] * x[1] <= s * c);
        if inside {
            out[0] = x[0];
            out[1] = x[1];
            return;
        }
        let mut best = f64::INFINITY;
        let count = self.vertices.len();
        for k in 0..count {
            let a = self.vertices[k];
            let b = self.vertices[(k + 1) % count];
            let a = [s * a[0], s * a[1]];
            let e = [s * b[0] - a[0], s * b[1] - a[1]];
            let t = ((x[0] - a[0]) * e[0] + (x[1] - a[1]) * e[1]) / (e[0] * e[0] + e[1] * e[1]);
            let t = t.clamp(0.0, 1.0);
            let y = [a[0] + t * e[0], a[1] + t * e[1]];
            let dist = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
            if dist < best {
                best = dist;
                out[0] = y[0];
                out[1] = y[1];
            }
        }
    }
}

/// Geometry of the Wulff shape.
#[derive(Clone, Debug, PartialEq)]
enum Shape {
    /// Euclidean unit ball.
    Ball,
    /// `[−1, 1]ⁿ`.
    Box,
    Polygon(Polygon),
    /// `base × [−half_height, half_height]`, base in the first `n − 1` coordinates.
    Prism { base: Box<Shape>, half_height: f64 },
}

impl Shape {
    fn support(&self, p: &[f64]) -> f64 {
        match self {
            Shape::Ball => p.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Shape::Box => p.iter().map(|x| x.abs()).sum(),
            Shape::Polygon(poly) => poly.support(p),
            Shape::Prism { base, half_height } => {
                let n = p.len();
                base.support(&p[..n - 1]) + half_height * p[n - 1].abs()
            }
        }
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        match self {
            Shape::Ball => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Shape::Box => x.iter().fold(0.0, |m, v| f64::max(m, v.abs())),
            Shape::Polygon(poly) => poly.gauge(x),
            Shape::Prism { base, half_height } => {
                let n = x.len();
                f64::max(base.gauge(&x[..n - 1]), x[n - 1].abs() / half_height)
            }
        }
    }

    fn project(&self, x: &[f64], s: f64, out: &mut [f64]) {
        match self {
            Shape::Ball => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let scale = if norm > s { s / norm } else { 1.0 };
                for (o, v) in out.iter_mut().zip(x) {
                    *o = scale * v;
                }
            }
            Shape::Box => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = v.clamp(-s, s);
                }
            }
            Shape::Polygon(poly) => poly.project(x, s, out),
            Shape::Prism { base, half_height } => {
                let n = x.len();
                base.project(&x[..n - 1], s, &mut out[..n - 1]);
                out[n - 1] = x[n - 1].clamp(-s * half_height, s * half_height);
            }
        }
    }

    fn vertices(&self, dim: usize) -> Option<Vec<Vec<f64>>> {
        match self {
            Shape::Ball => None,
            Shape::Box => Some(
                (0..1usize << dim)
                    .map(|bits| {
                        (0..dim)
                            .map(|k| if bits >> k & 1 == 1 { 1.0 } else { -1.0 })
                            .collect()
                    })
                    .collect(),
            ),
            Shape::Polygon(poly) => Some(poly.vertices.iter().map(|v| v.to_vec()).collect()),
            Shape::Prism { base, half_height } => {
                let base_vertices = base.vertices(dim - 1)?;
                let mut out = Vec::with_capacity(2 * base_vertices.len());
                for sign in [-1.0, 1.0] {
                    for v in &base_vertices {
                        let mut w = v.clone();
                        w.push(sign * half_height);
                        out.push(w);
                    }
                }
                Some(out)
            }
        }
    }

    fn polar_rows(&self, dim: usize) -> Option<Vec<Vec<f64>>> {
        match self {
            Shape::Ball => None,
            Shape::Box => Some(
                (0..dim)
                    .flat_map(|k| {
                        [1.0, -1.0].into_iter().map(move |sign| {
                            let mut row = vec![0.0; dim];
                            row[k] = sign;
                            row
                        })
                    })
                    .collect(),
            ),
            Shape::Polygon(poly) => Some(
                poly.normals
                    .iter()
                    .zip(&poly.offsets)
                    .map(|(n, c)| vec![n[0] / c, n[1] / c])
                    .collect(),
            ),
            Shape::Prism { base, half_height } => {
                let mut rows: Vec<Vec<f64>> = base
                    .polar_rows(dim - 1)?
                    .into_iter()
                    .map(|mut r| {
                        r.push(0.0);
                        r
                    })
                    .collect();
                for sign in [1.0, -1.0] {
                    let mut row = vec![0.0; dim];
                    row[dim - 1] = sign / half_height;
                    rows.push(row);
                }
                Some(rows)
            }
        }
    }
}

/// A convex, positively one-homogeneous surface energy density (or mobility).
#[derive(Clone, Debug, PartialEq)]
pub struct Anisotropy {
    dim: usize,
    kind: Kind,
    shape: Shape,
}

impl Anisotropy {
    pub fn isotropic(dim: usize) -> Self {
        Anisotropy { dim, kind: Kind::Isotropic, shape: Shape::Ball }
    }

    /// `σ(p) = ‖p‖₁`, Wulff shape `[−1, 1]ⁿ`.
    pub fn cubic(dim: usize) -> Self {
        Anisotropy { dim, kind: Kind::Cubic, shape: Shape::Box }
    }

    /// Regular hexagon of circumradius 1, vertices at angles `k · 60°`.
    pub fn hexagon() -> Self {
        Anisotropy {
            dim: 2,
            kind: Kind::Hexagon2D,
            shape: Shape::Polygon(Polygon::regular(6, 1.0, 0.0)),
        }
    }

    /// Hexagon × `[−1, 1]`.
    pub fn hexagonal_prism() -> Self {
        let base = Anisotropy::hexagon();
        Anisotropy {
            dim: 3,
            kind: Kind::HexagonalPrism,
            shape: Shape::Prism { base: Box::new(base.shape), half_height: 1.0 },
        }
    }

    /// Equilateral triangle with circumradius 1 and a vertex at 90°; in three dimensions the
    /// prism triangle × `[−1, 1]`.
    pub fn triangle_prism(dim: usize) -> Result<Self> {
        let triangle = Shape::Polygon(Polygon::regular(3, 1.0, PI / 2.0));
        let shape = match dim {
            2 => triangle,
            3 => Shape::Prism { base: Box::new(triangle), half_height: 1.0 },
            _ => return Err(Error::UnsupportedDimension(dim)),
        };
        Ok(Anisotropy { dim, kind: Kind::TrianglePrism, shape })
    }

    /// `σ(p) = σ̃(p′) + μ_a |p_n|` for a planar base anisotropy `σ̃`.
    pub fn cylindrical(base: Anisotropy, axial_weight: f64) -> Result<Self> {
        if base.dim != 2 {
            return Err(Error::InvalidAnisotropy(format!(
                "cylindrical base must be two-dimensional, got dimension {}",
                base.dim
            )));
        }
        if !(axial_weight > 0.0 && axial_weight.is_finite()) {
            return Err(Error::InvalidAnisotropy(format!(
                "axial weight must be positive, got {axial_weight}"
            )));
        }
        let shape = Shape::Prism { base: Box::new(base.shape.clone()), half_height: axial_weight };
        Ok(Anisotropy {
            dim: 3,
            kind: Kind::Cylindrical { base: Box::new(base), axial_weight },
            shape,
        })
    }

    /// Parses the command line names `iso`, `l1`, `hex`, `hexprism`, `triprism`, `cyl:l1`,
    /// `cyl:hex`, `cyl:iso`. Cylindrical kinds accept a trailing `:mu=<float>`.
    pub fn parse(name: &str, dim: usize) -> Result<Self> {
        let bad = || Error::InvalidAnisotropy(format!("`{name}` in dimension {dim}"));
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut parts = name.split(':');
        let head = parts.next().unwrap_or_default();
        match head {
            "iso" | "l1" | "hex" | "hexprism" | "triprism" => {
                if parts.next().is_some() {
                    return Err(bad());
                }
                match (head, dim) {
                    ("iso", _) => Ok(Anisotropy::isotropic(dim)),
                    ("l1", _) => Ok(Anisotropy::cubic(dim)),
                    ("hex", 2) => Ok(Anisotropy::hexagon()),
                    ("hex" | "hexprism", 3) => Ok(Anisotropy::hexagonal_prism()),
                    ("triprism", _) => Anisotropy::triangle_prism(dim),
                    _ => Err(bad()),
                }
            }
            "cyl" => {
                if dim != 3 {
                    return Err(bad());
                }
                let base = match parts.next() {
                    Some("l1") => Anisotropy::cubic(2),
                    Some("hex") => Anisotropy::hexagon(),
                    Some("iso") => Anisotropy::isotropic(2),
                    Some("triprism") => Anisotropy::triangle_prism(2)?,
                    _ => return Err(bad()),
                };
                let mut mu = 1.0;
                if let Some(opt) = parts.next() {
                    let value = opt.strip_prefix("mu=").ok_or_else(bad)?;
                    mu = value.parse().map_err(|_| bad())?;
                }
                if parts.next().is_some() {
                    return Err(bad());
                }
                Anisotropy::cylindrical(base, mu)
            }
            _ => Err(bad()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    /// Surface energy density `σ(p)`.
    pub fn sigma(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.dim);
        self.shape.support(p)
    }

    /// Polar `σ°(x) = sup {x·p : σ(p) ≤ 1}`.
    pub fn polar(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.shape.gauge(x)
    }

    /// Euclidean projection of `x` onto `sW`.
    pub fn wulff_project(&self, x: &[f64], s: f64) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.project_into(x, s, &mut out);
        out
    }

    pub fn project_into(&self, x: &[f64], s: f64, out: &mut [f64]) {
        debug_assert!(s > 0.0);
        self.shape.project(x, s, out);
    }

    /// `(I − P_{sW})(ξ)`, the proximal map of `s·σ`.
    pub fn shrink(&self, xi: &[f64], s: f64) -> Vec<f64> {
        let mut out = vec![0.0; xi.len()];
        self.shrink_into(xi, s, &mut out);
        out
    }

    pub fn shrink_into(&self, xi: &[f64], s: f64, out: &mut [f64]) {
        self.shape.project(xi, s, out);
        for (o, x) in out.iter_mut().zip(xi) {
            *o = x - *o;
        }
    }

    /// Whether `z ∈ ∂σ(p)` up to `tol`, via `σ°(z) ≤ 1` and `z·p ≥ σ(p)`.
    pub fn in_subdifferential(&self, z: &[f64], p: &[f64], tol: f64) -> bool {
        let zp: f64 = z.iter().zip(p).map(|(a, b)| a * b).sum();
        self.polar(z) <= 1.0 + tol && zp >= self.sigma(p) - tol
    }

    /// Vertices of the Wulff shape, `None` for smooth kinds.
    pub fn wulff_vertices(&self) -> Option<Vec<Vec<f64>>> {
        self.shape.vertices(self.dim)
    }

    /// Rows `a_j` with `σ°(x) = max_j a_j·x`, `None` for smooth kinds.
    pub fn polar_rows(&self) -> Option<Vec<Vec<f64>>> {
        self.shape.polar_rows(self.dim)
    }

    /// A gradient of `σ°` at `x`: the active facet row for polytopes, `x/|x|` for the ball part.
    pub fn polar_gradient(&self, x: &[f64]) -> Vec<f64> {
        fn walk(shape: &Shape, x: &[f64]) -> Vec<f64> {
            match shape {
                Shape::Ball => {
                    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    x.iter().map(|v| v / norm).collect()
                }
                Shape::Prism { base, half_height } => {
                    let n = x.len();
                    let g_base = base.gauge(&x[..n - 1]);
                    let g_axial = x[n - 1].abs() / half_height;
                    if g_base >= g_axial {
                        let mut g = walk(base, &x[..n - 1]);
                        g.push(0.0);
                        g
                    } else {
                        let mut g = vec![0.0; n];
                        g[n - 1] = x[n - 1].signum() / half_height;
                        g
                    }
                }
                _ => {
                    let rows = shape.polar_rows(x.len()).expect("polytope");
                    rows.into_iter()
                        .max_by(|a, b| {
                            let da: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                            let db: f64 = b.iter().zip(x).map(|(p, q)| p * q).sum();
                            da.total_cmp(&db)
                        })
                        .expect("nonempty")
                }
            }
        }
        walk(&self.shape, x)
    }
}

impl fmt::Display for Anisotropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Isotropic => write!(f, "iso"),
            Kind::Cubic => write!(f, "l1"),
            Kind::Hexagon2D => write!(f, "hex"),
            Kind::HexagonalPrism => write!(f, "hexprism"),
            Kind::TrianglePrism => write!(f, "triprism"),
            Kind::Cylindrical { base, axial_weight } => write!(f, "cyl:{base}:mu={axial_weight}"),
        }
    }
}
