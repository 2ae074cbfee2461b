//! Scenario files: one JSON object per run.

use std::path::{Path, PathBuf};

use dbar_core::grid::{ComplexGrid, Domain};
use dbar_core::removability::{AlmostComplexStructure, PolarSetSpec, TestDisc};
use dbar_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::input::FieldInput;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Module {
    Transform,
    Factor,
    Zeros,
    Removability,
    Verify,
    Counterexample,
}

impl Module {
    pub fn name(self) -> &'static str {
        match self {
            Module::Transform => "transform",
            Module::Factor => "factor",
            Module::Zeros => "zeros",
            Module::Removability => "removability",
            Module::Verify => "verify",
            Module::Counterexample => "counterexample",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GridSpec {
    pub domain: Domain,
    /// Nodes per real axis.
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Nodes per real axis, one entry per axis; overrides `resolution`.
    #[serde(default)]
    pub shape: Option<Vec<usize>>,
}

impl GridSpec {
    pub fn build(&self) -> Result<ComplexGrid> {
        match (&self.shape, self.resolution) {
            (Some(s), _) => Ok(ComplexGrid::build_with_shape(self.domain.clone(), s)?),
            (None, Some(r)) => Ok(ComplexGrid::build(self.domain.clone(), r)?),
            (None, None) => Err(CliError::Config("grid needs `resolution` or `shape`".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub count: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_p() -> f64 {
    4.0
}

fn default_scale() -> f64 {
    0.06
}

fn default_seeds() -> u64 {
    4
}

fn default_res() -> usize {
    64
}

/// Every operation reachable from the command line, tagged by `op`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Operation {
    // transform
    Cauchy {
        input: FieldInput,
        /// Evaluate on the lattice padded by this many cells.
        #[serde(default)]
        pad: usize,
    },
    Beurling {
        input: FieldInput,
        #[serde(default)]
        pad: usize,
    },
    Newton {
        input: FieldInput,
        #[serde(default)]
        pad: usize,
    },
    Dbar { input: FieldInput },
    Mollify { input: FieldInput, delta: f64 },
    Beltrami {
        alpha: FieldInput,
        g: FieldInput,
        #[serde(default)]
        holomorphic_dz: Option<FieldInput>,
        #[serde(default)]
        r: Option<f64>,
    },
    Estimates {
        input: FieldInput,
        p: f64,
        #[serde(default)]
        deltas: Option<Vec<f64>>,
    },
    /// `T` of the unit-disc indicator against `z̄` inside and `1/z` outside.
    DiscPotential {
        #[serde(default)]
        pad: Option<usize>,
    },
    // factor
    ScalarFactor {
        f: FieldInput,
        a: FieldInput,
        #[serde(default = "default_p")]
        p: f64,
    },
    MatrixFactor {
        f: FieldInput,
        a: Vec<FieldInput>,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default)]
        tiled: bool,
    },
    /// Seeded triangular system with known solution and zeros.
    Manufactured {
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "default_p")]
        p: f64,
    },
    TrivialExtension {
        f: FieldInput,
        #[serde(default = "default_p")]
        p: f64,
        m: f64,
    },
    IsolatedZeros {
        f: FieldInput,
        #[serde(default)]
        factor: Option<FieldInput>,
    },
    // zeros
    SliceCount { f: FieldInput, eps0: f64 },
    Winding { f: FieldInput, center: C64, radius: f64 },
    TrackZeros { f: FieldInput, eps0: f64 },
    Weierstrass { f: FieldInput, eps0: f64 },
    GraphDistance { f: FieldInput, eps0: f64 },
    Closedness {
        f: FieldInput,
        eps0: f64,
        /// The two `dz̄_j` coefficients of the form.
        b: [FieldInput; 2],
        eps: Vec<f64>,
        #[serde(default = "default_seeds")]
        seeds: u64,
    },
    VanishingOrder { f: FieldInput, point: [C64; 2] },
    // removability
    Rado { v: FieldInput, e: PolarSetSpec },
    Poisson {
        u: FieldInput,
        e: PolarSetSpec,
        center: C64,
        radius: f64,
    },
    Riesz { g: FieldInput, e: PolarSetSpec },
    Chirka {
        center: Vec<C64>,
        a: f64,
        #[serde(default)]
        discs: Vec<TestDisc>,
        #[serde(default)]
        family: Option<FamilySpec>,
        #[serde(default = "default_res")]
        resolution: usize,
    },
    Jhol {
        v: FieldInput,
        structure: AlmostComplexStructure,
    },
    Pipeline {
        u: FieldInput,
        e: PolarSetSpec,
        structure: AlmostComplexStructure,
    },
    // verify
    FieldRoundtrip { path: PathBuf },
    /// `‖∂̄Tf − f‖₂ / ‖f‖₂` for seeded smooth `f` over several resolutions.
    DbarInverse {
        resolutions: Vec<usize>,
        seeds: Vec<u64>,
        #[serde(default)]
        tolerance: Option<f64>,
    },
    // counterexample
    Counterexample {
        k: usize,
        #[serde(default)]
        p: Option<f64>,
    },
}

impl Operation {
    pub fn module(&self) -> Module {
        use Operation::*;
        match self {
            Cauchy { .. } | Beurling { .. } | Newton { .. } | Dbar { .. } | Mollify { .. }
            | Beltrami { .. } | Estimates { .. } | DiscPotential { .. } => Module::Transform,
            ScalarFactor { .. } | MatrixFactor { .. } | Manufactured { .. }
            | TrivialExtension { .. } | IsolatedZeros { .. } => Module::Factor,
            SliceCount { .. } | Winding { .. } | TrackZeros { .. } | Weierstrass { .. }
            | GraphDistance { .. } | Closedness { .. } | VanishingOrder { .. } => Module::Zeros,
            Rado { .. } | Poisson { .. } | Riesz { .. } | Chirka { .. } | Jhol { .. }
            | Pipeline { .. } => Module::Removability,
            FieldRoundtrip { .. } | DbarInverse { .. } => Module::Verify,
            Counterexample { .. } => Module::Counterexample,
        }
    }

    pub fn name(&self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.get("op").and_then(|o| o.as_str()).map(str::to_owned))
            .unwrap_or_default()
    }

    fn inputs(&self) -> Vec<&FieldInput> {
        use Operation::*;
        match self {
            Cauchy { input, .. } | Beurling { input, .. } | Newton { input, .. } | Dbar { input }
            | Mollify { input, .. } | Estimates { input, .. } => vec![input],
            Beltrami { alpha, g, holomorphic_dz, .. } => {
                let mut v = vec![alpha, g];
                v.extend(holomorphic_dz.iter());
                v
            }
            ScalarFactor { f, a, .. } => vec![f, a],
            MatrixFactor { f, a, .. } => std::iter::once(f).chain(a.iter()).collect(),
            TrivialExtension { f, .. } | SliceCount { f, .. } | Winding { f, .. }
            | TrackZeros { f, .. } | Weierstrass { f, .. } | GraphDistance { f, .. }
            | VanishingOrder { f, .. } => vec![f],
            IsolatedZeros { f, factor } => std::iter::once(f).chain(factor.iter()).collect(),
            Closedness { f, b, .. } => vec![f, &b[0], &b[1]],
            Rado { v, .. } | Jhol { v, .. } => vec![v],
            Poisson { u, .. } | Pipeline { u, .. } => vec![u],
            Riesz { g, .. } => vec![g],
            DiscPotential { .. } | Manufactured { .. } | Chirka { .. } | FieldRoundtrip { .. }
            | DbarInverse { .. } | Counterexample { .. } => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Also write 8-bit PGM heatmaps of `|f|`.
    #[serde(default)]
    pub pgm: bool,
    pub op: Operation,
}

impl ScenarioConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("{origin}: line {} column {}: {e}", e.line(), e.column()))
        })
    }

    /// Checks that need the config as a whole; the operations validate
    /// their own numeric preconditions.
    pub fn validate(&self, module: Module, base_dir: &Path) -> Result<()> {
        if self.op.module() != module {
            return Err(CliError::Config(format!(
                "operation `{}` belongs to `{}`, not `{}`",
                self.op.name(),
                self.op.module().name(),
                module.name()
            )));
        }
        if self.scenario.trim().is_empty() {
            return Err(CliError::Config("`scenario` must not be empty".into()));
        }
        for input in self.op.inputs() {
            for p in input.files() {
                let full = if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };
                if !full.exists() {
                    return Err(CliError::Config(format!("input file {} does not exist", full.display())));
                }
            }
        }
        if let Operation::FieldRoundtrip { path } = &self.op {
            let full = base_dir.join(path);
            if !full.exists() {
                return Err(CliError::Config(format!("field file {} does not exist", full.display())));
            }
        }
        let needs_grid = !self.op.inputs().is_empty()
            || matches!(self.op, Operation::Manufactured { .. });
        if needs_grid && self.grid.is_none() {
            return Err(CliError::Config(format!("operation `{}` needs a `grid`", self.op.name())));
        }
        Ok(())
    }
}
