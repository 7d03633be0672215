//! Multi-dimensional coupling: relocation mappings, cycle-preservation
//! analysis, majority-voting mapping construction, assembly of the
//! three-chain parity-check matrix, and post-processing circulant power
//! optimization.
//!
//! Three copies of a coupled chain are themselves coupled by relocating a
//! subset of base-grid circulants from the in-chain matrix into two
//! auxiliary matrices that connect neighbouring copies cyclically. A
//! base-grid cycle class survives the relocation exactly when its
//! alternating mapping sum vanishes mod 3; the classes that fail merge
//! across the three copies into one cycle of triple length.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::block::{BlockMatrix, BlockPos};
use crate::cycles::{
    canonical_walk, count_cycles, cycles_through_replica, eval_long_walk, eval_walk, exact_scale,
    girth, stream_pointed, validate_len, walk_classes, BlockCycle, FoldedDomain, GirthResult,
    PlainDomain, WalkGrid,
};
use crate::sc::{Grid, ScCode, ScCodeDescriptor};
use crate::{Error, Result};

/// Number of chain copies coupled by the second dimension.
pub const N_CHAINS: usize = 3;

/// Mapping value for circulants kept in the in-chain matrix.
pub const KEEP: usize = 0;
/// Mapping value for circulants relocated to the first auxiliary matrix.
pub const TO_P: usize = 1;
/// Mapping value for circulants relocated to the second auxiliary matrix.
pub const TO_Q: usize = 2;

/// Relocation mapping over the base grid: every base position carries a
/// value in `{0, 1, 2}` (keep, relocate to P, relocate to Q), and relocated
/// positions may optionally override their circulant power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdMapping {
    grid: Grid,
    overrides: BTreeMap<BlockPos, usize>,
}

impl MdMapping {
    /// The all-keep mapping (no relocations).
    pub fn all_keep(gamma: usize, kappa: usize) -> Result<Self> {
        Ok(MdMapping {
            grid: Grid::zeros(gamma, kappa)?,
            overrides: BTreeMap::new(),
        })
    }

    pub fn new(grid: Grid, overrides: BTreeMap<BlockPos, usize>) -> Result<Self> {
        if grid.max_value() > TO_Q {
            return Err(Error::Validation(format!(
                "mapping values must be 0 (keep), 1, or 2; found {}",
                grid.max_value()
            )));
        }
        for &(i, j) in overrides.keys() {
            if i >= grid.n_rows() || j >= grid.n_cols() {
                return Err(Error::Validation(format!(
                    "power override at ({i}, {j}) outside the {}x{} grid",
                    grid.n_rows(),
                    grid.n_cols()
                )));
            }
            if grid.get(i, j) == KEEP {
                return Err(Error::Validation(format!(
                    "power override at ({i}, {j}) targets a kept circulant; only \
                     relocated circulants may change power"
                )));
            }
        }
        Ok(MdMapping { grid, overrides })
    }

    pub fn gamma(&self) -> usize {
        self.grid.n_rows()
    }

    pub fn kappa(&self) -> usize {
        self.grid.n_cols()
    }

    /// Mapping value at a base position.
    pub fn value(&self, i: usize, j: usize) -> usize {
        self.grid.get(i, j)
    }

    /// Mapping value of an arbitrary chain position, read through the
    /// replica-periodic fold onto the base grid.
    pub fn folded_value(&self, pos: BlockPos) -> usize {
        self.grid.get(pos.0 % self.gamma(), pos.1 % self.kappa())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn overrides(&self) -> &BTreeMap<BlockPos, usize> {
        &self.overrides
    }

    /// Number of relocated base positions.
    pub fn n_relocated(&self) -> usize {
        self.grid.values().iter().filter(|&&v| v != KEEP).count()
    }

    /// Relocated base positions in row-major order.
    pub fn relocated_positions(&self) -> Vec<BlockPos> {
        let mut out = Vec::new();
        for i in 0..self.gamma() {
            for j in 0..self.kappa() {
                if self.grid.get(i, j) != KEEP {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Chain-displacement table indexed by `i * kappa + j`.
    pub(crate) fn chain_table(&self) -> Vec<i64> {
        self.grid.values().iter().map(|&v| v as i64).collect()
    }

    /// Effective circulant power per base position: the base power grid with
    /// overrides applied on relocated positions.
    pub(crate) fn effective_powers(&self, cm: &Grid) -> Vec<i64> {
        let mut powers: Vec<i64> = cm.values().iter().map(|&f| f as i64).collect();
        for (&(i, j), &f) in &self.overrides {
            powers[i * self.kappa() + j] = f as i64;
        }
        powers
    }

    /// Serialize as text: a grid (dimension header plus rows) followed by
    /// one `i j power` line per power override.
    pub fn to_text(&self) -> String {
        let mut out = self.grid.to_text();
        for (&(i, j), &f) in &self.overrides {
            out.push_str(&format!("{i} {j} {f}\n"));
        }
        out
    }

    /// Parse the text form produced by [`MdMapping::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let (grid, rest) = Grid::from_text_with_rest(text)?;
        let mut overrides = BTreeMap::new();
        for line in rest {
            let fields: Vec<usize> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| {
                        Error::Parse(format!("expected unsigned integer, got `{tok}`"))
                    })
                })
                .collect::<Result<_>>()?;
            if fields.len() != 3 {
                return Err(Error::Parse(format!(
                    "power override lines have the form `row col power`, got `{line}`"
                )));
            }
            if overrides
                .insert((fields[0], fields[1]), fields[2])
                .is_some()
            {
                return Err(Error::Parse(format!(
                    "duplicate power override for position ({}, {})",
                    fields[0], fields[1]
                )));
            }
        }
        MdMapping::new(grid, overrides)
    }
}

/// Effect of a relocation mapping on one cycle class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RelocationOutcome {
    /// Common horizontal/vertical chain displacement accumulated around the
    /// cycle, in `{0, 1, 2}`.
    pub delta: u8,
    /// Whether the cycle survives in each chain copy (`delta == 0`).
    pub preserved: bool,
}

/// Alternating mapping sum of a walk, folded onto the base grid: slots at
/// even positions add their mapping value, slots at odd positions subtract
/// it; the result is reduced mod 3.
fn walk_delta(positions: &[BlockPos], mapping: &MdMapping) -> u8 {
    let mut sum = 0i64;
    for (t, &pos) in positions.iter().enumerate() {
        let m = mapping.folded_value(pos) as i64;
        sum += if t % 2 == 0 { m } else { -m };
    }
    sum.rem_euclid(3) as u8
}

/// Decide whether a cycle class survives the relocation described by
/// `mapping`: it does exactly when its alternating mapping sum vanishes
/// mod 3; otherwise the three per-copy cycles merge into one cycle of
/// triple length.
pub fn relocation_effect(cycle: &BlockCycle, mapping: &MdMapping) -> RelocationOutcome {
    let delta = walk_delta(cycle.positions(), mapping);
    RelocationOutcome {
        delta,
        preserved: delta == 0,
    }
}

/// Votes cast on one candidate circulant by the cycle classes through it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct VoteTally {
    /// Lifted cycles destroyed by relocating the candidate to P.
    pub to_p: u64,
    /// Lifted cycles destroyed by relocating the candidate to Q.
    pub to_q: u64,
    /// Lifted cycles destroyed by keeping the candidate in place (i.e.
    /// currently removed cycles that a relocation would resurrect).
    pub keep: u64,
}

/// Collect votes on relocating `target` (a base-grid position). Every class
/// casts its lifted-cycle weight for each action in `{to P, to Q, keep}`
/// that makes the class's alternating mapping sum nonzero, i.e. destroys
/// it. Classes that do not touch `target` are skipped.
pub fn collect_votes(target: BlockPos, classes: &[BlockCycle], mapping: &MdMapping) -> VoteTally {
    let gamma = mapping.gamma();
    let kappa = mapping.kappa();
    let mut tally = VoteTally::default();
    for class in classes {
        // Signed appearance count of `target` and the alternating sum of all
        // other slots; the class delta under action `a` on the target is
        // `others + a * signed` mod 3.
        let mut signed = 0i64;
        let mut others = 0i64;
        let mut touches = false;
        for (t, &(i, j)) in class.positions().iter().enumerate() {
            let sign = if t % 2 == 0 { 1 } else { -1 };
            if (i % gamma, j % kappa) == target {
                signed += sign;
                touches = true;
            } else {
                others += sign * mapping.folded_value((i, j)) as i64;
            }
        }
        if !touches {
            continue;
        }
        let weight = class.lifted_cycles();
        if (others + TO_P as i64 * signed).rem_euclid(3) != 0 {
            tally.to_p += weight;
        }
        if (others + TO_Q as i64 * signed).rem_euclid(3) != 0 {
            tally.to_q += weight;
        }
        if others.rem_euclid(3) != 0 {
            tally.keep += weight;
        }
    }
    tally
}

/// Why the majority-voting loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    /// Keeping the best candidate beat both relocation actions.
    KeepMajority,
    /// Every cycle of interest was already removed.
    NoActiveCycles,
    /// The relocation budget was exhausted.
    RelocationCap,
    /// No kept circulant participates in a surviving cycle.
    NoCandidate,
}

/// One accepted relocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RelocationStep {
    pub target: BlockPos,
    pub votes: VoteTally,
    /// `TO_P` or `TO_Q`.
    pub action: usize,
    /// Lifted cycles still surviving after this relocation.
    pub active_after: u64,
}

/// Result of the majority-voting mapping construction.
#[derive(Debug, Clone)]
pub struct RelocationRun {
    pub mapping: MdMapping,
    pub steps: Vec<RelocationStep>,
    pub stopped: StopReason,
    /// Whether the requested budget exceeded the grid size and was clamped.
    pub clamped: bool,
    /// Lifted cycles in the census universe (through the middle replica)
    /// before any relocation.
    pub initial_active: u64,
}

/// Construct a relocation mapping by majority voting.
///
/// The census universe is the set of length-`k` cycle classes through the
/// middle replica of `sc`. Each round targets the kept base position with
/// the highest participation among surviving classes, lets every class
/// through that position vote on `{to P, to Q, keep}`, and either performs
/// the winning relocation or stops when keeping wins outright. At most
/// `t_max` relocations are performed (clamped to the base grid size).
pub fn majority_vote_relocate(sc: &ScCode, k: usize, t_max: usize) -> Result<RelocationRun> {
    validate_len(k)?;
    let gamma = sc.params.gamma;
    let kappa = sc.params.kappa;
    let census = cycles_through_replica(sc, k, sc.middle_replica())?;
    let classes = census.classes.as_deref().unwrap_or(&[]);
    let mut mapping = MdMapping::all_keep(gamma, kappa)?;
    let clamped = t_max > gamma * kappa;
    let budget = t_max.min(gamma * kappa);
    let mut steps = Vec::new();

    let active_weight = |mapping: &MdMapping| -> u64 {
        classes
            .iter()
            .filter(|c| relocation_effect(c, mapping).preserved)
            .map(BlockCycle::lifted_cycles)
            .sum()
    };
    let initial_active = active_weight(&mapping);

    let stopped = loop {
        if steps.len() >= budget {
            break StopReason::RelocationCap;
        }
        // Participation of kept base positions in surviving classes, one
        // count per visit, weighted by lifted cycles.
        let mut participation: BTreeMap<BlockPos, u64> = BTreeMap::new();
        let mut any_active = false;
        for class in classes {
            if !relocation_effect(class, &mapping).preserved {
                continue;
            }
            any_active = true;
            for &(i, j) in class.positions() {
                let base = (i % gamma, j % kappa);
                if mapping.value(base.0, base.1) == KEEP {
                    *participation.entry(base).or_insert(0) += class.lifted_cycles();
                }
            }
        }
        if !any_active {
            break StopReason::NoActiveCycles;
        }
        // Highest participation wins; ascending map order plus a strict
        // comparison sends ties to the lexicographically smallest position.
        let mut best: Option<(BlockPos, u64)> = None;
        for (&pos, &w) in &participation {
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((pos, w));
            }
        }
        let Some((target, _)) = best else {
            break StopReason::NoCandidate;
        };
        let votes = collect_votes(target, classes, &mapping);
        if votes.keep > votes.to_p.max(votes.to_q) {
            break StopReason::KeepMajority;
        }
        // Ties between the two destinations go to P.
        let action = if votes.to_p >= votes.to_q { TO_P } else { TO_Q };
        mapping.grid.set(target.0, target.1, action);
        let active_after = active_weight(&mapping);
        steps.push(RelocationStep {
            target,
            votes,
            action,
            active_after,
        });
    };

    Ok(RelocationRun {
        mapping,
        steps,
        stopped,
        clamped,
        initial_active,
    })
}

/// A coupled chain coupled again across three chain copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdCode {
    pub base: ScCode,
    pub mapping: MdMapping,
    /// Kept circulants (in-chain component).
    pub h_in: BlockMatrix,
    /// First auxiliary component (mapping value 1).
    pub p: BlockMatrix,
    /// Second auxiliary component (mapping value 2).
    pub q: BlockMatrix,
    /// The full three-copy parity-check matrix.
    pub h_md: BlockMatrix,
}

/// Split the chain matrix of `sc` by `mapping` and assemble the three-copy
/// matrix: copy row `r` carries the in-chain component on its diagonal
/// block column, Q one step to the right (cyclically), and P two steps.
pub fn assemble_md(sc: &ScCode, mapping: &MdMapping) -> Result<MdCode> {
    if mapping.gamma() != sc.params.gamma || mapping.kappa() != sc.params.kappa {
        return Err(Error::Validation(format!(
            "mapping is {}x{} but the base grid is {}x{}",
            mapping.gamma(),
            mapping.kappa(),
            sc.params.gamma,
            sc.params.kappa
        )));
    }
    let z = sc.params.z;
    for (&(i, j), &f) in mapping.overrides() {
        if f >= z {
            return Err(Error::Validation(format!(
                "power override {f} at ({i}, {j}) is not below z = {z}"
            )));
        }
    }
    let rows = sc.h_sc.n_block_rows();
    let cols = sc.h_sc.n_block_cols();
    let mut h_in = BlockMatrix::new(rows, cols, z)?;
    let mut p = BlockMatrix::new(rows, cols, z)?;
    let mut q = BlockMatrix::new(rows, cols, z)?;
    for (i, j, f) in sc.h_sc.entries() {
        let base = (i % sc.params.gamma, j % sc.params.kappa);
        let value = mapping.value(base.0, base.1);
        let eff = *mapping.overrides().get(&base).unwrap_or(&f);
        match value {
            KEEP => h_in.insert(i, j, f)?,
            TO_P => p.insert(i, j, eff)?,
            TO_Q => q.insert(i, j, eff)?,
            other => unreachable!("validated mapping value {other}"),
        }
    }
    let mut h_md = BlockMatrix::new(N_CHAINS * rows, N_CHAINS * cols, z)?;
    for copy in 0..N_CHAINS {
        for (offset, component) in [(0, &h_in), (1, &q), (2, &p)] {
            let col_copy = (copy + offset) % N_CHAINS;
            for (i, j, f) in component.entries() {
                h_md.insert(copy * rows + i, col_copy * cols + j, f)?;
            }
        }
    }
    Ok(MdCode {
        base: sc.clone(),
        mapping: mapping.clone(),
        h_in,
        p,
        q,
        h_md,
    })
}

impl MdCode {
    /// Dimensions and design rate of the three-copy code.
    pub fn stats(&self) -> crate::sc::CodeStats {
        let base = self.base.stats();
        crate::sc::CodeStats {
            bit_length: N_CHAINS * base.bit_length,
            n_checks: N_CHAINS * base.n_checks,
            design_rate: base.design_rate,
            n_block_rows: N_CHAINS * base.n_block_rows,
            n_block_cols: N_CHAINS * base.n_block_cols,
        }
    }

    pub fn to_descriptor(&self) -> MdCodeDescriptor {
        MdCodeDescriptor {
            base: self.base.to_descriptor(),
            mapping: self.mapping.grid().rows().map(|r| r.to_vec()).collect(),
            power_overrides: self
                .mapping
                .overrides()
                .iter()
                .map(|(&(i, j), &f)| [i, j, f])
                .collect(),
        }
    }

    pub fn from_descriptor(d: &MdCodeDescriptor) -> Result<Self> {
        let base = ScCode::from_descriptor(&d.base)?;
        let grid = Grid::from_rows(&d.mapping)?;
        let overrides = d
            .power_overrides
            .iter()
            .map(|&[i, j, f]| ((i, j), f))
            .collect();
        let mapping = MdMapping::new(grid, overrides)?;
        assemble_md(&base, &mapping)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_descriptor()).expect("descriptor serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: MdCodeDescriptor =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad code JSON: {e}")))?;
        MdCode::from_descriptor(&d)
    }
}

/// Serializable description of a three-copy code: the base chain plus the
/// mapping grid and its power overrides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MdCodeDescriptor {
    pub base: ScCodeDescriptor,
    pub mapping: Vec<Vec<usize>>,
    #[serde(default)]
    pub power_overrides: Vec<[usize; 3]>,
}

/// Count length-`k` cycles of the three-copy matrix by walking the base
/// chain through the mapping fold, without assembling the product matrix.
/// Every surviving base walk accounts for one cycle per copy.
pub fn md_cycle_count_projected(code: &MdCode, k: usize) -> Result<u64> {
    validate_len(k)?;
    let grid = WalkGrid::new(&code.base.h_sc);
    let chain = code.mapping.chain_table();
    let power = code.mapping.effective_powers(&code.base.cm);
    let domain = FoldedDomain {
        gamma: code.base.params.gamma,
        kappa: code.base.params.kappa,
        chain: &chain,
        power: &power,
    };
    let (pointed, _) = stream_pointed(&grid, k, &domain);
    exact_scale(pointed, (N_CHAINS * code.base.params.z) as u64, k as u64)
}

/// Count length-`k` cycles of the three-copy matrix by direct enumeration
/// on the assembled matrix.
pub fn md_cycle_count_direct(code: &MdCode, k: usize) -> Result<u64> {
    Ok(count_cycles(&code.h_md, k)?.total)
}

/// Count length-`k` cycles of the three-copy matrix twice — projected
/// through the mapping fold and directly on the assembled matrix — and
/// insist the two agree.
pub fn md_cycle_count(code: &MdCode, k: usize) -> Result<u64> {
    let projected = md_cycle_count_projected(code, k)?;
    let direct = md_cycle_count_direct(code, k)?;
    if projected != direct {
        return Err(Error::Inconsistency(format!(
            "cycle-{k} count mismatch: projected {projected}, direct {direct}"
        )));
    }
    Ok(projected)
}

/// A removed base cycle class together with the explicit tripled cycle it
/// becomes in the three-copy matrix.
#[derive(Debug, Clone, Serialize)]
pub struct TripledCycleWitness {
    /// Canonical walk of the removed base class.
    pub base_walk: Vec<BlockPos>,
    /// Chain displacement of the class (1 or 2).
    pub delta: u8,
    /// The induced closed walk of triple length on the assembled matrix.
    pub md_walk: Vec<BlockPos>,
    /// Whether the tripled walk lifts to at least one binary cycle.
    pub lifts: bool,
}

/// Girth comparison between a chain and its three-copy coupling.
#[derive(Debug, Clone, Serialize)]
pub struct GirthReport {
    pub base_girth: GirthResult,
    pub md_girth: GirthResult,
    /// The coupled girth is no smaller than the base girth.
    pub bound_holds: bool,
    /// A removed base-girth cycle and its tripled image, when one exists.
    pub witness: Option<TripledCycleWitness>,
}

/// Probe the girths of the base chain and the three-copy matrix (up to
/// `probe_max`), check the coupled girth does not drop, and — when some
/// base cycle of the base girth is removed by the mapping — exhibit the
/// tripled cycle it becomes.
pub fn girth_bound_check(code: &MdCode, probe_max: usize) -> Result<GirthReport> {
    let base_girth = girth(&code.base.h_sc, probe_max)?;
    let md_girth = girth(&code.h_md, probe_max)?;
    let bound_holds = md_girth.lower_bound() >= base_girth.lower_bound();
    let witness = match base_girth {
        GirthResult::Girth(g) => find_tripled_witness(code, g)?,
        GirthResult::AtLeast(_) => None,
    };
    Ok(GirthReport {
        base_girth,
        md_girth,
        bound_holds,
        witness,
    })
}

/// Find one length-`k` base class that the mapping removes (nonzero delta,
/// still closing under the effective powers) and build its tripled image.
fn find_tripled_witness(code: &MdCode, k: usize) -> Result<Option<TripledCycleWitness>> {
    validate_len(k)?;
    let grid = WalkGrid::new(&code.base.h_sc);
    let chain = code.mapping.chain_table();
    let power = code.mapping.effective_powers(&code.base.cm);
    let domain = FoldedDomain {
        gamma: code.base.params.gamma,
        kappa: code.base.params.kappa,
        chain: &chain,
        power: &power,
    };
    let z = code.base.params.z as i64;
    // Removed classes: simple and closing under effective powers, but with a
    // nonzero chain displacement.
    let removed = walk_classes(&grid, k, |walk| {
        let ev = eval_walk(walk, z, &domain);
        ev.closes && ev.simple && ev.chain_defect != 0
    });
    let Some(walk) = removed.first() else {
        return Ok(None);
    };
    let ev = eval_walk(walk, z, &domain);
    let delta = ev.chain_defect as u8;
    let md_walk = tripled_walk(code, walk);
    let md_grid = WalkGrid::new(&code.h_md);
    let lifts = {
        let w: Vec<(u32, u32)> = md_walk.iter().map(|&(i, j)| (i as u32, j as u32)).collect();
        eval_long_walk(&w, z, &PlainDomain(&md_grid)).is_cycle()
    };
    Ok(Some(TripledCycleWitness {
        base_walk: walk
            .iter()
            .map(|&(i, j)| (i as usize, j as usize))
            .collect(),
        delta,
        md_walk,
        lifts,
    }))
}

/// Trace a removed base walk three times around the chain copies, producing
/// the closed walk of triple length it induces on the assembled matrix.
fn tripled_walk(code: &MdCode, walk: &[(u32, u32)]) -> Vec<BlockPos> {
    let rows = code.base.h_sc.n_block_rows();
    let cols = code.base.h_sc.n_block_cols();
    let k = walk.len();
    let m = |pos: (u32, u32)| code.mapping.folded_value((pos.0 as usize, pos.1 as usize)) as i64;
    let mut out = Vec::with_capacity(N_CHAINS * k);
    let mut c = 0i64; // chain copy of the current slot's row
    for t in 0..N_CHAINS * k {
        let pos = walk[t % k];
        let row_copy = c.rem_euclid(3) as usize;
        let col_copy = (c - m(pos)).rem_euclid(3) as usize;
        out.push((
            row_copy * rows + pos.0 as usize,
            col_copy * cols + pos.1 as usize,
        ));
        // Row-share steps (even t) keep the chain copy; column-share steps
        // move it by the mapping difference.
        if t % 2 == 1 {
            let next = walk[(t + 1) % k];
            c += m(next) - m(pos);
        }
    }
    out
}

/// One accepted power change during post-processing optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PowerChange {
    pub position: BlockPos,
    pub from: usize,
    pub to: usize,
    /// Cycle count of the optimized length after this change.
    pub count_after: u64,
}

/// Result of the post-processing circulant power optimization.
#[derive(Debug, Clone)]
pub struct PpCpoRun {
    /// The input mapping with updated power overrides.
    pub mapping: MdMapping,
    pub initial_count: u64,
    pub final_count: u64,
    pub changes: Vec<PowerChange>,
    pub passes: usize,
}

/// Length of one stored closed-walk class in `ClassTable`.
struct StoredClass {
    walk: Box<[(u16, u16)]>,
    orbit: u8,
}

/// All closed-walk classes of one length whose alternating mapping sum
/// vanishes (the only classes that can ever lift to cycles in the
/// three-copy matrix, under any choice of circulant powers).
struct ClassTable {
    k: usize,
    classes: Vec<StoredClass>,
    /// Class indices touching each relocated base position.
    touching: BTreeMap<BlockPos, Vec<u32>>,
}

impl ClassTable {
    fn build(grid: &WalkGrid, k: usize, mapping: &MdMapping) -> ClassTable {
        let gamma = mapping.gamma();
        let kappa = mapping.kappa();
        let chain = mapping.chain_table();
        let canonicals = walk_classes(grid, k, |walk| {
            let mut sum = 0i64;
            for (t, &(i, j)) in walk.iter().enumerate() {
                let m = chain[(i as usize % gamma) * kappa + j as usize % kappa];
                sum += if t % 2 == 0 { m } else { -m };
            }
            sum.rem_euclid(3) == 0
        });
        let mut classes = Vec::with_capacity(canonicals.len());
        let mut touching: BTreeMap<BlockPos, Vec<u32>> = BTreeMap::new();
        let relocated: std::collections::BTreeSet<BlockPos> =
            mapping.relocated_positions().into_iter().collect();
        for walk in canonicals {
            let (_, orbit) = canonical_walk(&walk);
            let idx = classes.len() as u32;
            let mut seen = std::collections::BTreeSet::new();
            for &(i, j) in &walk {
                let base = (i as usize % gamma, j as usize % kappa);
                if relocated.contains(&base) && seen.insert(base) {
                    touching.entry(base).or_default().push(idx);
                }
            }
            classes.push(StoredClass {
                walk: walk.iter().map(|&(i, j)| (i as u16, j as u16)).collect(),
                orbit: orbit as u8,
            });
        }
        ClassTable {
            k,
            classes,
            touching,
        }
    }

    /// Lifted cycles of one class under the given effective powers (per
    /// chain copy; multiply by `N_CHAINS` for the full matrix).
    fn class_lifted(&self, class: &StoredClass, z: i64, domain: &FoldedDomain) -> Result<u64> {
        let walk: Vec<(u32, u32)> = class
            .walk
            .iter()
            .map(|&(i, j)| (u32::from(i), u32::from(j)))
            .collect();
        let ev = eval_walk(&walk, z, domain);
        if ev.is_cycle() {
            exact_scale(u64::from(class.orbit), z as u64, self.k as u64)
        } else {
            Ok(0)
        }
    }

    /// Per-copy lifted-cycle total under the given effective powers.
    fn total(&self, z: i64, domain: &FoldedDomain) -> Result<u64> {
        let mut sum = 0u64;
        for class in &self.classes {
            sum += self.class_lifted(class, z, domain)?;
        }
        Ok(sum)
    }

    /// Per-copy lifted-cycle total restricted to classes touching `pos`.
    fn total_touching(&self, pos: BlockPos, z: i64, domain: &FoldedDomain) -> Result<u64> {
        let mut sum = 0u64;
        if let Some(indices) = self.touching.get(&pos) {
            for &idx in indices {
                sum += self.class_lifted(&self.classes[idx as usize], z, domain)?;
            }
        }
        Ok(sum)
    }
}

/// Post-processing circulant power optimization: sweep the relocated
/// positions (most cycle-implicated first) and greedily adopt the power
/// that lowers the length-`k` cycle count of the three-copy matrix without
/// raising any shorter count. Repeats until a full pass accepts nothing,
/// capping the number of passes.
pub fn pp_cpo(code: &MdCode, k: usize) -> Result<PpCpoRun> {
    validate_len(k)?;
    let mapping = &code.mapping;
    if mapping.n_relocated() == 0 {
        let count = md_cycle_count_projected(code, k)?;
        return Ok(PpCpoRun {
            mapping: mapping.clone(),
            initial_count: count,
            final_count: count,
            changes: Vec::new(),
            passes: 0,
        });
    }
    const MAX_PASSES: usize = 10;
    let params = &code.base.params;
    let gamma = params.gamma;
    let kappa = params.kappa;
    let z = params.z as i64;
    let grid = WalkGrid::new(&code.base.h_sc);
    let chain = mapping.chain_table();
    fn fold_domain<'a>(
        gamma: usize,
        kappa: usize,
        chain: &'a [i64],
        power: &'a [i64],
    ) -> FoldedDomain<'a> {
        FoldedDomain {
            gamma,
            kappa,
            chain,
            power,
        }
    }

    // Closed-walk classes with vanishing mapping sum for every length up to
    // k. Their support does not depend on circulant powers, so they are
    // enumerated once and re-scored per candidate power.
    let tables: Vec<ClassTable> = (4..=k)
        .step_by(2)
        .map(|len| ClassTable::build(&grid, len, mapping))
        .collect();
    let (target_table, shorter_tables) = tables.split_last().expect("k >= 4");

    let mut powers = mapping.effective_powers(&code.base.cm);
    let mut current_k = target_table.total(z, &fold_domain(gamma, kappa, &chain, &powers))?;
    let initial_count = current_k
        .checked_mul(N_CHAINS as u64)
        .ok_or_else(|| Error::Inconsistency("cycle count overflow".into()))?;

    let mut changes = Vec::new();
    let mut passes = 0;
    loop {
        passes += 1;
        let mut changed = false;
        // Sweep order: descending participation of relocated positions in
        // currently-lifted classes of the optimized length.
        let mut order: Vec<(u64, BlockPos)> = Vec::new();
        for &pos in target_table.touching.keys() {
            let d = fold_domain(gamma, kappa, &chain, &powers);
            order.push((target_table.total_touching(pos, z, &d)?, pos));
        }
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

        for (_, pos) in order {
            let slot = pos.0 * kappa + pos.1;
            let incumbent = powers[slot];
            let d = fold_domain(gamma, kappa, &chain, &powers);
            let inc_k = target_table.total_touching(pos, z, &d)?;
            let inc_shorter: Vec<u64> = shorter_tables
                .iter()
                .map(|t| t.total_touching(pos, z, &d))
                .collect::<Result<_>>()?;
            let mut best: Option<(u64, usize)> = None;
            for candidate in 0..z {
                if candidate == incumbent {
                    continue;
                }
                powers[slot] = candidate;
                let d = fold_domain(gamma, kappa, &chain, &powers);
                let cand_k = target_table.total_touching(pos, z, &d)?;
                // Only classes touching `pos` change, so the optimized-length
                // count strictly drops iff `cand_k < inc_k`, and no shorter
                // count rises iff each restricted total stays put or drops.
                let mut acceptable = cand_k < inc_k;
                if acceptable {
                    for (t, &inc) in shorter_tables.iter().zip(&inc_shorter) {
                        if t.total_touching(pos, z, &d)? > inc {
                            acceptable = false;
                            break;
                        }
                    }
                }
                powers[slot] = incumbent;
                if acceptable && best.is_none_or(|(bk, _)| cand_k < bk) {
                    best = Some((cand_k, candidate as usize));
                }
            }
            if let Some((cand_k, candidate)) = best {
                powers[slot] = candidate as i64;
                current_k = current_k - inc_k + cand_k;
                changes.push(PowerChange {
                    position: pos,
                    from: incumbent as usize,
                    to: candidate,
                    count_after: current_k * N_CHAINS as u64,
                });
                changed = true;
            }
        }
        if !changed || passes >= MAX_PASSES {
            break;
        }
    }

    // Rebuild the override set: relocated positions whose final power
    // differs from the base power grid.
    let mut overrides = BTreeMap::new();
    for pos in mapping.relocated_positions() {
        let final_power = powers[pos.0 * params.kappa + pos.1] as usize;
        if final_power != code.base.cm.get(pos.0, pos.1) {
            overrides.insert(pos, final_power);
        }
    }
    let optimized = MdMapping::new(mapping.grid().clone(), overrides)?;
    Ok(PpCpoRun {
        mapping: optimized,
        initial_count,
        final_count: current_k * N_CHAINS as u64,
        changes,
        passes,
    })
}
