//! Field inputs: DBF1 files or small closed-form generators.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use dbar_core::grid::format::read_field;
use dbar_core::grid::{ComplexGrid, Field};
use dbar_core::transforms::smooth_test_function;
use dbar_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// `c · z1^a z̄1^b z2^c z̄2^d`; `powers` holds two or four exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub c: C64,
    pub powers: Vec<u32>,
}

impl Term {
    fn eval(&self, p: &[C64; 2]) -> C64 {
        let mut v = self.c;
        for (k, &e) in self.powers.iter().enumerate() {
            let z = p[k / 2];
            let base = if k % 2 == 0 { z } else { z.conj() };
            v *= base.powu(e);
        }
        v
    }
}

fn poly(terms: &[Term], p: &[C64; 2]) -> C64 {
    terms.iter().map(|t| t.eval(p)).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldInput {
    /// DBF1 file; relative paths resolve against the config's directory.
    File { path: PathBuf },
    Constant { value: C64 },
    /// `P · exp(Q)` for polynomials `P = terms`, `Q = exp`.
    Polynomial {
        terms: Vec<Term>,
        #[serde(default)]
        exp: Vec<Term>,
    },
    /// Seeded smooth bump times a quadratic in `z, z̄`.
    Smooth {
        #[serde(default)]
        seed: Option<u64>,
    },
    DiscIndicator { center: C64, radius: f64 },
    /// `max(log|z − center|, floor)`.
    LogModulus {
        center: C64,
        #[serde(default)]
        floor: Option<f64>,
    },
    /// `(z − center)^{−order}`.
    Pole { center: C64, order: u32 },
    Real { of: Box<FieldInput> },
    /// Row-major matrix of scalar inputs.
    Stack {
        rows: usize,
        cols: usize,
        entries: Vec<FieldInput>,
    },
}

/// What generators need besides the grid.
pub struct Context {
    pub base_dir: PathBuf,
    pub seed: u64,
}

impl Context {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

impl FieldInput {
    /// Paths of every file this input reads.
    pub fn files(&self) -> Vec<&Path> {
        match self {
            FieldInput::File { path } => vec![path.as_path()],
            FieldInput::Real { of } => of.files(),
            FieldInput::Stack { entries, .. } => entries.iter().flat_map(|e| e.files()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, grid: &Arc<ComplexGrid>, ctx: &Context) -> Result<Field> {
        let nv = grid.nvars();
        let field = match self {
            FieldInput::File { path } => {
                let (f, _) = read_field(&ctx.resolve(path))?;
                if f.grid().shape() != grid.shape() {
                    return Err(CliError::Config(format!(
                        "{}: shape {:?} does not match the scenario grid {:?}",
                        path.display(),
                        f.grid().shape(),
                        grid.shape()
                    )));
                }
                f.with_grid(grid.clone())?
            }
            FieldInput::Constant { value } => Field::constant(grid.clone(), *value),
            FieldInput::Polynomial { terms, exp } => {
                for t in terms.iter().chain(exp) {
                    if t.powers.len() > 2 * nv {
                        return Err(CliError::Config(format!(
                            "term has {} exponents but the grid has {nv} variable(s)",
                            t.powers.len()
                        )));
                    }
                }
                let (terms, exp) = (terms.clone(), exp.clone());
                Field::from_fn(grid.clone(), move |p| poly(&terms, &p) * poly(&exp, &p).exp())
            }
            FieldInput::Smooth { seed } => {
                one_variable(grid, "smooth")?;
                smooth_test_function(grid, seed.unwrap_or(ctx.seed))
            }
            FieldInput::DiscIndicator { center, radius } => {
                Field::disc_indicator(grid.clone(), *center, *radius)
            }
            FieldInput::LogModulus { center, floor } => {
                let (c, lo) = (*center, floor.unwrap_or(f64::NEG_INFINITY));
                Field::from_fn(grid.clone(), move |p| C64::new((p[0] - c).norm().ln().max(lo), 0.0))
            }
            FieldInput::Pole { center, order } => {
                let (c, k) = (*center, *order as i32);
                Field::from_fn(grid.clone(), move |p| (p[0] - c).powi(-k))
            }
            FieldInput::Real { of } => of.eval(grid, ctx)?.map(|v| C64::new(v.re, 0.0)),
            FieldInput::Stack { rows, cols, entries } => {
                if entries.len() != rows * cols {
                    return Err(CliError::Config(format!(
                        "stack of {rows}x{cols} needs {} entries, got {}",
                        rows * cols,
                        entries.len()
                    )));
                }
                let parts = entries
                    .iter()
                    .map(|e| e.eval(grid, ctx))
                    .collect::<Result<Vec<_>>>()?;
                Field::from_components(*rows, *cols, &parts)?
            }
        };
        Ok(field)
    }
}

fn one_variable(grid: &ComplexGrid, what: &str) -> Result<()> {
    if grid.nvars() != 1 {
        return Err(CliError::Config(format!("{what} inputs need a one-variable grid")));
    }
    Ok(())
}
