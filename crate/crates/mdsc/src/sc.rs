//! Spatial coupling: cutting a circulant matrix into memory components and
//! chaining `l` replicas into a coupled parity-check matrix.
//!
//! The underlying code is a full `gamma x kappa` grid of circulants. A
//! partitioning matrix assigns each grid position to one of `m + 1`
//! components `H_0 .. H_m`; replica `d` (1-based) of the coupled chain puts
//! component `H_t` at block-row offset `(d - 1 + t) * gamma` and occupies
//! block columns `(d - 1) * kappa .. d * kappa`.

use std::fmt::Write as _;

use crate::block::{BlockMatrix, CodeParams};
use crate::error::{Error, Result};

/// Dense rectangular grid of small unsigned integers with a plain-text
/// serialization (`n_rows n_cols` header followed by the rows).
///
/// Used for partitioning matrices, circulant power matrices, and relocation
/// mappings.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    n_rows: usize,
    n_cols: usize,
    values: Vec<usize>,
}

/// Grid role alias: entry `(i, j)` names the component index of circulant
/// `(i, j)`.
pub type PartitioningMatrix = Grid;
/// Grid role alias: entry `(i, j)` is the circulant power of position
/// `(i, j)`.
pub type PowerMatrix = Grid;

impl Grid {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<usize>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Validation("grid dimensions must be positive".into()));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Validation(format!(
                "grid needs {} values for {n_rows}x{n_cols}, got {}",
                n_rows * n_cols,
                values.len()
            )));
        }
        Ok(Grid {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Validation("grid rows have unequal lengths".into()));
        }
        Grid::new(n_rows, n_cols, rows.concat())
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self> {
        Grid::new(n_rows, n_cols, vec![0; n_rows * n_cols])
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.values[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: usize) {
        self.values[i * self.n_cols + j] = v;
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn max_value(&self) -> usize {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> {
        self.values.chunks(self.n_cols)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_rows, self.n_cols);
        for row in self.rows() {
            let line = row
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(out, "{line}");
        }
        out
    }

    /// Parse the text form. Ignores blank lines and `#` comments. Extra
    /// non-grid trailing lines are rejected; use [`Grid::from_text_with_rest`]
    /// for formats that append data after the grid body.
    pub fn from_text(text: &str) -> Result<Self> {
        let (grid, rest) = Grid::from_text_with_rest(text)?;
        if let Some(line) = rest.first() {
            return Err(Error::Parse(format!("unexpected trailing line `{line}`")));
        }
        Ok(grid)
    }

    /// Parse a grid and return any remaining content lines after its rows.
    pub fn from_text_with_rest(text: &str) -> Result<(Self, Vec<&str>)> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let dims = parse_row(header)?;
        if dims.len() != 2 {
            return Err(Error::Parse(format!(
                "grid header must be `n_rows n_cols`, got `{header}`"
            )));
        }
        let (n_rows, n_cols) = (dims[0], dims[1]);
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for _ in 0..n_rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("grid file truncated".into()))?;
            let row = parse_row(line)?;
            if row.len() != n_cols {
                return Err(Error::Parse(format!(
                    "grid row has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            values.extend(row);
        }
        Ok((Grid::new(n_rows, n_cols, values)?, lines.collect()))
    }
}

fn parse_row(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("expected unsigned integer, got `{tok}`")))
        })
        .collect()
}

/// Cut the full circulant grid into `m + 1` component block matrices.
/// Component `t` keeps exactly the circulants with partition value `t`.
pub fn partition(pm: &Grid, cm: &Grid, params: &CodeParams) -> Result<Vec<BlockMatrix>> {
    validate_grids(pm, cm, params)?;
    let mut components = Vec::with_capacity(params.m + 1);
    for t in 0..=params.m {
        let mut c = BlockMatrix::new(params.gamma, params.kappa, params.z)?;
        for i in 0..params.gamma {
            for j in 0..params.kappa {
                if pm.get(i, j) == t {
                    c.insert(i, j, cm.get(i, j))?;
                }
            }
        }
        components.push(c);
    }
    Ok(components)
}

fn validate_grids(pm: &Grid, cm: &Grid, params: &CodeParams) -> Result<()> {
    params.validate()?;
    for (grid, name) in [(pm, "partitioning"), (cm, "power")] {
        if grid.n_rows() != params.gamma || grid.n_cols() != params.kappa {
            return Err(Error::Validation(format!(
                "{name} matrix is {}x{}, expected {}x{}",
                grid.n_rows(),
                grid.n_cols(),
                params.gamma,
                params.kappa
            )));
        }
    }
    if let Some(bad) = pm.values().iter().find(|&&v| v > params.m) {
        return Err(Error::Validation(format!(
            "partitioning entry {bad} exceeds memory m = {}",
            params.m
        )));
    }
    if let Some(bad) = cm.values().iter().find(|&&v| v >= params.z) {
        return Err(Error::Validation(format!(
            "circulant power {bad} out of range for z = {}",
            params.z
        )));
    }
    Ok(())
}

/// Summary statistics of an assembled code.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CodeStats {
    pub bit_length: usize,
    pub n_checks: usize,
    pub design_rate: f64,
    pub n_block_rows: usize,
    pub n_block_cols: usize,
}

/// A spatially-coupled code: parameters, its defining grids, and the
/// assembled coupled block matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScCode {
    pub params: CodeParams,
    pub pm: Grid,
    pub cm: Grid,
    pub h_sc: BlockMatrix,
}

/// Serializable description of an [`ScCode`]; the coupled matrix itself is
/// reassembled on load.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScCodeDescriptor {
    pub params: CodeParams,
    pub pm: Vec<Vec<usize>>,
    pub cm: Vec<Vec<usize>>,
}

impl ScCode {
    /// Validate the grids and assemble the coupled chain.
    pub fn new(params: CodeParams, pm: Grid, cm: Grid) -> Result<Self> {
        validate_grids(&pm, &cm, &params)?;
        let mut h_sc = BlockMatrix::new(params.sc_block_rows(), params.sc_block_cols(), params.z)?;
        for d in 0..params.l {
            for i in 0..params.gamma {
                for j in 0..params.kappa {
                    let row = (d + pm.get(i, j)) * params.gamma + i;
                    let col = d * params.kappa + j;
                    h_sc.insert(row, col, cm.get(i, j))?;
                }
            }
        }
        Ok(ScCode {
            params,
            pm,
            cm,
            h_sc,
        })
    }

    /// 1-based replica index owning block column `col_group`.
    pub fn replica_of(&self, col_group: usize) -> usize {
        col_group / self.params.kappa + 1
    }

    /// The middle replica `ceil(l / 2)` used to anchor relocation searches.
    pub fn middle_replica(&self) -> usize {
        self.params.l.div_ceil(2)
    }

    /// Fold a coupled-matrix block position onto the `gamma x kappa` base
    /// grid of the underlying matrix.
    pub fn fold(&self, pos: (usize, usize)) -> (usize, usize) {
        (pos.0 % self.params.gamma, pos.1 % self.params.kappa)
    }

    pub fn stats(&self) -> CodeStats {
        CodeStats {
            bit_length: self.params.bit_length(),
            n_checks: self.params.sc_block_rows() * self.params.z,
            design_rate: self.params.design_rate(),
            n_block_rows: self.params.sc_block_rows(),
            n_block_cols: self.params.sc_block_cols(),
        }
    }

    pub fn to_descriptor(&self) -> ScCodeDescriptor {
        ScCodeDescriptor {
            params: self.params,
            pm: self.pm.rows().map(<[usize]>::to_vec).collect(),
            cm: self.cm.rows().map(<[usize]>::to_vec).collect(),
        }
    }

    pub fn from_descriptor(d: &ScCodeDescriptor) -> Result<Self> {
        ScCode::new(d.params, Grid::from_rows(&d.pm)?, Grid::from_rows(&d.cm)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_descriptor()).expect("descriptor serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: ScCodeDescriptor = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("code descriptor: {e}")))?;
        ScCode::from_descriptor(&d)
    }
}
