//! Bundled reference designs: partitioning/power grids for two coupled
//! code families, relocation mappings for their multi-dimensional
//! variants, and an adjusted-power grid exercised by the power-optimizer
//! regression checks.
//!
//! Family 1 couples a `gamma = 4`, `kappa = z = 17` block code with
//! memory 1; family 2 couples a `gamma = 3`, `kappa = 19`, `z = 23`
//! block code with memory 2. The named code fixtures pair a family with
//! a coupling length.

use crate::block::CodeParams;
use crate::md::{assemble_md, MdCode, MdMapping};
use crate::sc::{Grid, ScCode};
use crate::{Error, Result};
use std::collections::BTreeMap;

const FAMILY1_PARTITION: &str = include_str!("../fixtures/family1_partition.txt");
const FAMILY1_POWERS: &str = include_str!("../fixtures/family1_powers.txt");
const FAMILY1_MAPPING: &str = include_str!("../fixtures/family1_mapping.txt");
const FAMILY1_ADJUSTED_POWERS: &str = include_str!("../fixtures/family1_adjusted_powers.txt");
const FAMILY2_PARTITION: &str = include_str!("../fixtures/family2_partition.txt");
const FAMILY2_POWERS: &str = include_str!("../fixtures/family2_powers.txt");
const FAMILY2_MAPPING: &str = include_str!("../fixtures/family2_mapping.txt");

fn grid(text: &str, what: &str) -> Grid {
    Grid::from_text(text).unwrap_or_else(|e| panic!("bundled {what} grid is malformed: {e}"))
}

/// Partitioning and power grids of family 1.
pub fn family1_grids() -> (Grid, Grid) {
    (
        grid(FAMILY1_PARTITION, "family-1 partition"),
        grid(FAMILY1_POWERS, "family-1 power"),
    )
}

/// Partitioning and power grids of family 2.
pub fn family2_grids() -> (Grid, Grid) {
    (
        grid(FAMILY2_PARTITION, "family-2 partition"),
        grid(FAMILY2_POWERS, "family-2 power"),
    )
}

/// Relocation mapping grid for the multi-dimensional variant of family 1.
pub fn family1_mapping_grid() -> Grid {
    grid(FAMILY1_MAPPING, "family-1 mapping")
}

/// Relocation mapping grid for the multi-dimensional variant of family 2.
pub fn family2_mapping_grid() -> Grid {
    grid(FAMILY2_MAPPING, "family-2 mapping")
}

/// Adjusted power grid recorded alongside the family-1 relocation mapping;
/// it differs from the family-1 power grid exactly on relocated positions.
pub fn family1_adjusted_power_grid() -> Grid {
    grid(FAMILY1_ADJUSTED_POWERS, "family-1 adjusted power")
}

fn coupled(family: usize, l: usize) -> ScCode {
    let ((pm, cm), z, m) = match family {
        1 => (family1_grids(), 17, 1),
        2 => (family2_grids(), 23, 2),
        _ => unreachable!("unknown fixture family"),
    };
    let params = CodeParams::new(pm.n_rows(), pm.n_cols(), z, m, l)
        .unwrap_or_else(|e| panic!("bundled family-{family} parameters invalid: {e}"));
    ScCode::new(params, pm, cm)
        .unwrap_or_else(|e| panic!("bundled family-{family} code invalid: {e}"))
}

/// Family-1 coupled code with coupling length 10 (2,890 bits).
pub fn sc_code_1() -> ScCode {
    coupled(1, 10)
}

/// Family-2 coupled code with coupling length 10 (4,370 bits).
pub fn sc_code_2() -> ScCode {
    coupled(2, 10)
}

/// Family-1 coupled code with coupling length 30 (8,670 bits).
pub fn sc_code_3() -> ScCode {
    coupled(1, 30)
}

/// Family-2 coupled code with coupling length 30 (13,110 bits).
pub fn sc_code_4() -> ScCode {
    coupled(2, 30)
}

fn mapping(family: usize) -> MdMapping {
    let grid = match family {
        1 => family1_mapping_grid(),
        2 => family2_mapping_grid(),
        _ => unreachable!("unknown fixture family"),
    };
    MdMapping::new(grid, BTreeMap::new())
        .unwrap_or_else(|e| panic!("bundled family-{family} mapping invalid: {e}"))
}

/// Relocation mapping of family 1 (15 relocated positions, no power
/// overrides).
pub fn mapping_1() -> MdMapping {
    mapping(1)
}

/// Relocation mapping of family 2 (12 relocated positions, no power
/// overrides).
pub fn mapping_2() -> MdMapping {
    mapping(2)
}

/// Power overrides recorded by the family-1 adjusted power grid: the
/// positions where it differs from the family-1 power grid, with the
/// adjusted values.
pub fn family1_power_overrides() -> BTreeMap<(usize, usize), usize> {
    let (_, cm) = family1_grids();
    let adj = family1_adjusted_power_grid();
    let mut overrides = BTreeMap::new();
    for i in 0..cm.n_rows() {
        for j in 0..cm.n_cols() {
            if adj.get(i, j) != cm.get(i, j) {
                overrides.insert((i, j), adj.get(i, j));
            }
        }
    }
    overrides
}

/// Multi-dimensional code built from [`sc_code_1`] and [`mapping_1`].
pub fn md_sc_code_1() -> MdCode {
    assemble_md(&sc_code_1(), &mapping_1())
        .unwrap_or_else(|e| panic!("bundled md-sc-code-1 invalid: {e}"))
}

/// Multi-dimensional code built from [`sc_code_2`] and [`mapping_2`].
pub fn md_sc_code_2() -> MdCode {
    assemble_md(&sc_code_2(), &mapping_2())
        .unwrap_or_else(|e| panic!("bundled md-sc-code-2 invalid: {e}"))
}

/// Multi-dimensional code recorded as the power-adjusted variant of
/// family 2. The bundled adjusted-power grid is 4x17, which matches
/// family 1's shape and not the 3x19 family-2 grids it is filed with, so
/// the fixture cannot be assembled as recorded; this returns the
/// dimensional mismatch as an error rather than guessing an intent.
pub fn md_sc_code_3() -> Result<MdCode> {
    let adj = family1_adjusted_power_grid();
    let (pm2, _) = family2_grids();
    Err(Error::Validation(format!(
        "adjusted power grid is {}x{} but the family-2 grids are {}x{}; \
         the recorded combination is dimensionally inconsistent",
        adj.n_rows(),
        adj.n_cols(),
        pm2.n_rows(),
        pm2.n_cols(),
    )))
}

/// Family-1 multi-dimensional code with the recorded adjusted powers
/// applied as overrides on its relocated positions.
pub fn md_code_1_with_adjusted_powers() -> MdCode {
    let mapping = MdMapping::new(family1_mapping_grid(), family1_power_overrides())
        .unwrap_or_else(|e| panic!("bundled family-1 adjusted mapping invalid: {e}"));
    assemble_md(&sc_code_1(), &mapping)
        .unwrap_or_else(|e| panic!("bundled adjusted md code invalid: {e}"))
}
