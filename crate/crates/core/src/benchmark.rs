//! Registered benchmark problems: anisotropy, mobility, initial set and reference solution.

use crate::anisotropy::Anisotropy;
use crate::error::{Error, Result};
use crate::exact::{SelfSimilarSolution, SpongeParams};
use crate::flow::Flow;
use crate::mesh::{Grid, ScalarField};

pub const NAMES: [&str; 7] = ["cube2d", "cube3d", "hex2d", "hexprism", "torus-l1", "torus-hex", "sponge"];

/// Initial ratio of the sponge benchmark, above the self-similar value so the holes close.
pub const SPONGE_XI: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Benchmark {
    pub name: &'static str,
    pub sigma: Anisotropy,
    pub beta: Anisotropy,
    /// Reference evolution; its initial set is the benchmark's initial set.
    pub exact: SelfSimilarSolution,
    /// Default error window.
    pub window: (f64, f64),
    /// Default final time.
    pub t_max: f64,
}

impl Benchmark {
    pub fn get(name: &str) -> Result<Self> {
        let cyl = |base: Anisotropy, w: f64| Anisotropy::cylindrical(base, w).expect("positive weight");
        let wulff = |name, shape: Anisotropy, window, t_max| Benchmark {
            name,
            sigma: shape.clone(),
            beta: shape.clone(),
            exact: SelfSimilarSolution::Wulff { shape, scale0: 0.4 },
            window,
            t_max,
        };
        let torus = |name, base: Anisotropy| Benchmark {
            name,
            sigma: cyl(base.clone(), 1.0),
            beta: cyl(base.clone(), 0.5),
            exact: SelfSimilarSolution::Torus { base, big_r0: 0.4, axial: 0.5 },
            window: (0.0, 0.02),
            t_max: 0.05,
        };
        Ok(match name {
            // the square and cube of side 0.8 are the ℓ¹ Wulff shapes of scale 0.4
            "cube2d" => wulff("cube2d", Anisotropy::cubic(2), (0.0, 0.05), 0.05),
            "cube3d" => wulff("cube3d", Anisotropy::cubic(3), (0.0, 0.05), 0.1),
            "hex2d" => wulff("hex2d", Anisotropy::hexagon(), (0.0, 0.06), 0.1),
            "hexprism" => wulff("hexprism", Anisotropy::hexagonal_prism(), (0.0, 0.03), 0.05),
            "torus-l1" => torus("torus-l1", Anisotropy::cubic(2)),
            "torus-hex" => torus("torus-hex", Anisotropy::hexagon()),
            "sponge" => {
                let params = SpongeParams::from_ratio(0.4, SPONGE_XI).expect("valid ratio");
                let exact = SelfSimilarSolution::sponge(params);
                let t_ext = exact.extinction_time();
                Benchmark {
                    name: "sponge",
                    sigma: Anisotropy::cubic(3),
                    beta: Anisotropy::cubic(3),
                    exact,
                    window: (0.0, t_ext),
                    t_max: 1.25 * t_ext,
                }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown benchmark `{other}`; expected one of {}",
                    NAMES.join(", ")
                )))
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    /// The exact `β`-signed distance of the initial set.
    pub fn initial_field(&self, grid: Grid) -> ScalarField {
        self.exact.initial_distance(grid)
    }
}

/// Watches the node at the origin, which sits in the sponge's removed tunnels until the holes
/// close.
#[derive(Clone, Debug, Default)]
pub struct HoleWatch {
    closed: Option<f64>,
}

impl HoleWatch {
    /// Returns the closing time the first time the origin is inside a nonempty set.
    pub fn observe(&mut self, flow: &Flow) -> Option<f64> {
        if self.closed.is_some() || flow.is_extinct() {
            return None;
        }
        let grid = flow.grid();
        let m = grid.resolution();
        let centre = grid.index(&vec![m / 2; grid.dim()]);
        if flow.field().values()[centre] <= 0.0 {
            self.closed = Some(flow.time());
            return self.closed;
        }
        None
    }

    pub fn closed(&self) -> Option<f64> {
        self.closed
    }
}
