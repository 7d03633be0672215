//! Circulant block matrices and their binary expansion.
//!
//! A circulant-based parity-check matrix is an `n_block_rows x n_block_cols`
//! grid in which each cell is either structurally zero or holds a circulant
//! permutation block `sigma^f` of size `z x z`. The convention used
//! throughout the crate: `sigma^f` has a one at `(r, (r + f) mod z)`, so
//! `sigma^0` is the identity.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Position of a block inside the block grid: `(block_row, block_col)`.
pub type BlockPos = (usize, usize);

/// Parameters of a spatially-coupled circulant code family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CodeParams {
    /// Block rows of the underlying (uncoupled) matrix; column weight.
    pub gamma: usize,
    /// Block columns of the underlying matrix; row weight.
    pub kappa: usize,
    /// Circulant size.
    pub z: usize,
    /// Coupling memory: the underlying matrix is cut into `m + 1` components.
    pub m: usize,
    /// Coupling length: number of replicas in the coupled chain.
    pub l: usize,
}

impl CodeParams {
    pub fn new(gamma: usize, kappa: usize, z: usize, m: usize, l: usize) -> Result<Self> {
        let p = CodeParams {
            gamma,
            kappa,
            z,
            m,
            l,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma == 0 || self.kappa == 0 || self.z == 0 || self.l == 0 {
            return Err(Error::Validation(format!(
                "gamma, kappa, z, l must all be positive (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Block rows of the coupled matrix: `(l + m) * gamma`.
    pub fn sc_block_rows(&self) -> usize {
        (self.l + self.m) * self.gamma
    }

    /// Block columns of the coupled matrix: `l * kappa`.
    pub fn sc_block_cols(&self) -> usize {
        self.l * self.kappa
    }

    /// Code length in bits.
    pub fn bit_length(&self) -> usize {
        self.sc_block_cols() * self.z
    }

    /// Design rate `1 - ((l + m) * gamma) / (l * kappa)`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.sc_block_rows() as f64 / self.sc_block_cols() as f64
    }
}

/// Sparse matrix of circulant permutation blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMatrix {
    n_block_rows: usize,
    n_block_cols: usize,
    z: usize,
    /// Dense cell table storing `power + 1`; `0` means structurally zero.
    cells: Vec<u32>,
    /// Per block row: `(block_col, power)` sorted by column.
    rows: Vec<Vec<(u32, u32)>>,
    /// Per block column: `(block_row, power)` sorted by row.
    cols: Vec<Vec<(u32, u32)>>,
    n_blocks: usize,
}

impl BlockMatrix {
    pub fn new(n_block_rows: usize, n_block_cols: usize, z: usize) -> Result<Self> {
        if n_block_rows == 0 || n_block_cols == 0 || z == 0 {
            return Err(Error::Validation(format!(
                "block matrix dimensions and z must be positive (got {n_block_rows}x{n_block_cols}, z={z})"
            )));
        }
        Ok(BlockMatrix {
            n_block_rows,
            n_block_cols,
            z,
            cells: vec![0; n_block_rows * n_block_cols],
            rows: vec![Vec::new(); n_block_rows],
            cols: vec![Vec::new(); n_block_cols],
            n_blocks: 0,
        })
    }

    pub fn from_entries(
        n_block_rows: usize,
        n_block_cols: usize,
        z: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self> {
        let mut bm = BlockMatrix::new(n_block_rows, n_block_cols, z)?;
        for (i, j, f) in entries {
            bm.insert(i, j, f)?;
        }
        Ok(bm)
    }

    /// Place the circulant `sigma^power` at block position `(i, j)`.
    /// Fails if the position is out of range, already occupied, or the power
    /// is not in `0..z`.
    pub fn insert(&mut self, i: usize, j: usize, power: usize) -> Result<()> {
        if i >= self.n_block_rows || j >= self.n_block_cols {
            return Err(Error::Validation(format!(
                "block position ({i}, {j}) outside {}x{} grid",
                self.n_block_rows, self.n_block_cols
            )));
        }
        if power >= self.z {
            return Err(Error::Validation(format!(
                "circulant power {power} out of range for z = {}",
                self.z
            )));
        }
        let cell = &mut self.cells[i * self.n_block_cols + j];
        if *cell != 0 {
            return Err(Error::Validation(format!(
                "duplicate block at position ({i}, {j})"
            )));
        }
        *cell = power as u32 + 1;
        let row = &mut self.rows[i];
        let pos = row.partition_point(|&(c, _)| c < j as u32);
        row.insert(pos, (j as u32, power as u32));
        let col = &mut self.cols[j];
        let pos = col.partition_point(|&(r, _)| r < i as u32);
        col.insert(pos, (i as u32, power as u32));
        self.n_blocks += 1;
        Ok(())
    }

    pub fn n_block_rows(&self) -> usize {
        self.n_block_rows
    }

    pub fn n_block_cols(&self) -> usize {
        self.n_block_cols
    }

    pub fn z(&self) -> usize {
        self.z
    }

    /// Number of nonzero blocks.
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Power of the block at `(i, j)`, or `None` for a structurally zero cell.
    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        let cell = self.cells[i * self.n_block_cols + j];
        (cell != 0).then(|| cell as usize - 1)
    }

    pub(crate) fn cell_table(&self) -> &[u32] {
        &self.cells
    }

    /// Nonzero blocks of one block row as `(block_col, power)`, sorted.
    pub fn row_blocks(&self, i: usize) -> &[(u32, u32)] {
        &self.rows[i]
    }

    /// Nonzero blocks of one block column as `(block_row, power)`, sorted.
    pub fn col_blocks(&self, j: usize) -> &[(u32, u32)] {
        &self.cols[j]
    }

    /// All nonzero blocks in row-major order as `(i, j, power)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, f)| (i, j as usize, f as usize)))
    }

    /// Per-block-row and per-block-column counts of nonzero blocks.
    pub fn block_degrees(&self) -> (Vec<usize>, Vec<usize>) {
        (
            self.rows.iter().map(Vec::len).collect(),
            self.cols.iter().map(Vec::len).collect(),
        )
    }

    /// Expand every circulant block into its `z x z` binary form.
    pub fn expand(&self) -> BinaryMatrix {
        let z = self.z;
        let n_rows = self.n_block_rows * z;
        let n_cols = self.n_block_cols * z;
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n_rows];
        for (i, j, f) in self.entries() {
            for r in 0..z {
                rows[i * z + r].push((j * z + (r + f) % z) as u32);
            }
        }
        for row in &mut rows {
            row.sort_unstable();
        }
        BinaryMatrix::from_rows(n_rows, n_cols, rows)
    }

    /// Serialize to the plain text block format:
    /// a `n_block_rows n_block_cols z` header followed by one `i j power`
    /// line per nonzero block in row-major order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.n_block_rows, self.n_block_cols, self.z
        );
        for (i, j, f) in self.entries() {
            let _ = writeln!(out, "{i} {j} {f}");
        }
        out
    }

    /// Parse the plain text block format produced by [`BlockMatrix::to_text`].
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty block matrix file".into()))?;
        let dims = parse_ints(header)?;
        if dims.len() != 3 {
            return Err(Error::Parse(format!(
                "block matrix header must be `n_block_rows n_block_cols z`, got `{header}`"
            )));
        }
        let mut bm = BlockMatrix::new(dims[0], dims[1], dims[2])?;
        for line in lines {
            let entry = parse_ints(line)?;
            if entry.len() != 3 {
                return Err(Error::Parse(format!(
                    "block entry must be `i j power`, got `{line}`"
                )));
            }
            bm.insert(entry[0], entry[1], entry[2])?;
        }
        Ok(bm)
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_ints(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse(format!("expected unsigned integer, got `{tok}`")))
        })
        .collect()
}

/// Sparse binary matrix with both row- and column-adjacency views, used for
/// expanded parity-check matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl BinaryMatrix {
    pub fn from_rows(n_rows: usize, n_cols: usize, rows: Vec<Vec<u32>>) -> Self {
        debug_assert_eq!(rows.len(), n_rows);
        let mut cols: Vec<Vec<u32>> = vec![Vec::new(); n_cols];
        for (r, row) in rows.iter().enumerate() {
            for &c in row {
                cols[c as usize].push(r as u32);
            }
        }
        BinaryMatrix {
            n_rows,
            n_cols,
            rows,
            cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Column indices of the ones in `row`, sorted.
    pub fn row(&self, row: usize) -> &[u32] {
        &self.rows[row]
    }

    /// Row indices of the ones in `col`, sorted.
    pub fn col(&self, col: usize) -> &[u32] {
        &self.cols[col]
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.rows[row].binary_search(&(col as u32)).is_ok()
    }

    /// Total number of ones.
    pub fn ones(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Serialize in alist format (columns first, 1-based indices, entries
    /// padded with zeros to the maximum weight).
    pub fn to_alist(&self) -> String {
        let max_col_w = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row_w = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_cols, self.n_rows);
        let _ = writeln!(out, "{max_col_w} {max_row_w}");
        let weights = |v: &[Vec<u32>]| {
            v.iter()
                .map(|l| l.len().to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "{}", weights(&self.cols));
        let _ = writeln!(out, "{}", weights(&self.rows));
        let lists = |out: &mut String, v: &[Vec<u32>], width: usize| {
            for l in v {
                let mut items: Vec<String> = l.iter().map(|&x| (x + 1).to_string()).collect();
                items.resize(width, "0".into());
                let _ = writeln!(out, "{}", items.join(" "));
            }
        };
        lists(&mut out, &self.cols, max_col_w);
        lists(&mut out, &self.rows, max_row_w);
        out
    }

    /// Parse alist format. Accepts both the zero-padded and unpadded
    /// variants; validates that the row and column adjacency lists describe
    /// the same matrix.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let mut next_ints = |what: &str| -> Result<Vec<usize>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("alist truncated before {what}")))?;
            parse_ints(line)
        };
        let dims = next_ints("dimensions")?;
        if dims.len() != 2 {
            return Err(Error::Parse("alist header must be `n_cols n_rows`".into()));
        }
        let (n_cols, n_rows) = (dims[0], dims[1]);
        let _max_weights = next_ints("maximum weights")?;
        let col_weights = next_ints("column weights")?;
        let row_weights = next_ints("row weights")?;
        if col_weights.len() != n_cols || row_weights.len() != n_rows {
            return Err(Error::Parse(
                "alist weight list lengths do not match header".into(),
            ));
        }
        let read_lists = |lines: &mut dyn Iterator<Item = &str>,
                          weights: &[usize],
                          bound: usize,
                          what: &str|
         -> Result<Vec<Vec<u32>>> {
            weights
                .iter()
                .enumerate()
                .map(|(idx, &w)| {
                    let line = lines
                        .next()
                        .ok_or_else(|| Error::Parse(format!("alist truncated in {what} lists")))?;
                    let mut items: Vec<u32> = Vec::with_capacity(w);
                    for tok in parse_ints(line)? {
                        if tok == 0 {
                            continue; // padding
                        }
                        if tok > bound {
                            return Err(Error::Parse(format!(
                                "alist {what} list {idx}: index {tok} out of range"
                            )));
                        }
                        items.push(tok as u32 - 1);
                    }
                    if items.len() != w {
                        return Err(Error::Parse(format!(
                            "alist {what} list {idx}: expected {w} entries, got {}",
                            items.len()
                        )));
                    }
                    items.sort_unstable();
                    Ok(items)
                })
                .collect()
        };
        let cols = read_lists(&mut lines, &col_weights, n_rows, "column")?;
        let rows = read_lists(&mut lines, &row_weights, n_cols, "row")?;
        let rebuilt = BinaryMatrix::from_rows(n_rows, n_cols, rows);
        if rebuilt.cols != cols {
            return Err(Error::Parse(
                "alist row and column adjacency lists are inconsistent".into(),
            ));
        }
        Ok(rebuilt)
    }
}
