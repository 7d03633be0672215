//! Exact enumeration of short cycles in circulant block matrices.
//!
//! A length-`k` cycle in the binary Tanner graph of an expanded block matrix
//! projects onto the block grid as a closed walk through `k` nonzero blocks
//! that alternately share a block row and a block column and never stay on
//! the same block twice in a row. Conversely, such a block walk lifts to
//! binary cycles exactly when its alternating sum of circulant powers
//! vanishes modulo `z` and the binary check and variable nodes it visits are
//! pairwise distinct. All counting therefore happens on the block level; the
//! expanded matrix is never materialized.
//!
//! Walks that differ only by rotation or reversal describe the same cycles;
//! such walks form an equivalence class whose *orbit size* (the number of
//! distinct pointed walks in the class, a divisor of `k`) determines how many
//! binary cycles the class contributes: `z * orbit / k`, which is exactly `z`
//! for asymmetric classes and less for self-symmetric ones. Summed over all
//! pointed walks this gives the streaming identity used by [`count_cycles`]:
//! the number of binary cycles is `z / k` times the number of valid pointed
//! walks.
//!
//! Two modes are provided: a streaming count that totals cycles and
//! per-position participation without storing walks, and a census that
//! returns one canonical representative per equivalence class.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::block::{BlockMatrix, BlockPos};
use crate::error::{Error, Result};
use crate::sc::ScCode;

/// Longest supported cycle length (inclusive).
pub const MAX_CYCLE_LEN: usize = 16;

pub(crate) fn validate_len(k: usize) -> Result<()> {
    if !(4..=MAX_CYCLE_LEN).contains(&k) || !k.is_multiple_of(2) {
        return Err(Error::Validation(format!(
            "cycle length must be an even number in 4..={MAX_CYCLE_LEN}, got {k}"
        )));
    }
    Ok(())
}

pub(crate) fn exact_scale(pointed: u64, z: u64, k: u64) -> Result<u64> {
    let prod = u128::from(pointed) * u128::from(z);
    if prod % u128::from(k) != 0 {
        return Err(Error::Inconsistency(format!(
            "pointed walk count {pointed} times z = {z} is not divisible by k = {k}"
        )));
    }
    Ok((prod / u128::from(k)) as u64)
}

/// Flat adjacency view of a block matrix tuned for the walk search.
pub(crate) struct WalkGrid {
    n_block_cols: usize,
    z: usize,
    /// Per block row: sorted block columns of its nonzero blocks.
    rows: Vec<Vec<u32>>,
    /// Per block column: sorted block rows of its nonzero blocks.
    cols: Vec<Vec<u32>>,
    /// Dense `power + 1` table, `0` for structurally zero cells.
    cells: Vec<u32>,
    /// All nonzero blocks in row-major order; the walk seeds.
    blocks: Vec<(u32, u32)>,
}

impl WalkGrid {
    pub(crate) fn new(bm: &BlockMatrix) -> Self {
        let rows = (0..bm.n_block_rows())
            .map(|i| bm.row_blocks(i).iter().map(|&(j, _)| j).collect())
            .collect();
        let cols = (0..bm.n_block_cols())
            .map(|j| bm.col_blocks(j).iter().map(|&(i, _)| i).collect())
            .collect();
        let blocks = bm.entries().map(|(i, j, _)| (i as u32, j as u32)).collect();
        WalkGrid {
            n_block_cols: bm.n_block_cols(),
            z: bm.z(),
            rows,
            cols,
            cells: bm.cell_table().to_vec(),
            blocks,
        }
    }

    #[inline]
    fn enc(&self, i: u32, j: u32) -> u32 {
        i * self.n_block_cols as u32 + j
    }

    #[inline]
    fn has(&self, i: u32, j: u32) -> bool {
        self.cells[i as usize * self.n_block_cols + j as usize] != 0
    }

    #[inline]
    fn power(&self, i: u32, j: u32) -> i64 {
        i64::from(self.cells[i as usize * self.n_block_cols + j as usize]) - 1
    }
}

/// How walk evaluation reads circulant powers and (for matrices coupled a
/// second time across chains) chain displacements.
pub(crate) trait WalkDomain: Sync {
    fn power(&self, pos: (u32, u32)) -> i64;
    fn chain(&self, pos: (u32, u32)) -> i64;
}

/// Plain evaluation: powers straight from the grid, no chain dimension.
pub(crate) struct PlainDomain<'a>(pub(crate) &'a WalkGrid);

impl WalkDomain for PlainDomain<'_> {
    #[inline]
    fn power(&self, (i, j): (u32, u32)) -> i64 {
        self.0.power(i, j)
    }

    #[inline]
    fn chain(&self, _pos: (u32, u32)) -> i64 {
        0
    }
}

/// Evaluation through a `gamma x kappa` fold: block position `(i, j)` reads
/// its circulant power and chain displacement from tables indexed by
/// `(i mod gamma, j mod kappa)`. This is how walks on a coupled chain are
/// scored against a relocation mapping and its power overrides without
/// assembling the chained-matrix product.
pub(crate) struct FoldedDomain<'a> {
    pub(crate) gamma: usize,
    pub(crate) kappa: usize,
    /// Chain displacement per base position, values in `0..3`.
    pub(crate) chain: &'a [i64],
    /// Effective circulant power per base position.
    pub(crate) power: &'a [i64],
}

impl FoldedDomain<'_> {
    #[inline]
    fn fold(&self, (i, j): (u32, u32)) -> usize {
        (i as usize % self.gamma) * self.kappa + (j as usize % self.kappa)
    }
}

impl WalkDomain for FoldedDomain<'_> {
    #[inline]
    fn power(&self, pos: (u32, u32)) -> i64 {
        self.power[self.fold(pos)]
    }

    #[inline]
    fn chain(&self, pos: (u32, u32)) -> i64 {
        self.chain[self.fold(pos)]
    }
}

/// Outcome of evaluating one pointed walk.
pub(crate) struct WalkEval {
    /// The alternating power sum vanishes mod `z`.
    pub(crate) closes: bool,
    /// The alternating chain displacement sum mod 3 (`0` when the walk stays
    /// on one chain copy; always `0` in a plain domain).
    pub(crate) chain_defect: i64,
    /// All visited check nodes are pairwise distinct, and likewise all
    /// variable nodes.
    pub(crate) simple: bool,
}

impl WalkEval {
    /// The walk lifts to binary cycles.
    pub(crate) fn is_cycle(&self) -> bool {
        self.closes && self.chain_defect == 0 && self.simple
    }
}

/// Evaluate one pointed walk: accumulate the running row shift `a` and chain
/// offset `c`, record every visited check node `(block_row, a mod z, c mod 3)`
/// and variable node `(block_col, (a + f) mod z, (c - chain) mod 3)`, and test
/// closure plus node distinctness.
pub(crate) fn eval_walk<D: WalkDomain>(walk: &[(u32, u32)], z: i64, d: &D) -> WalkEval {
    let k = walk.len();
    debug_assert!(k.is_multiple_of(2) && k <= MAX_CYCLE_LEN);
    let mut cn = [(0u32, 0i64, 0i64); MAX_CYCLE_LEN / 2];
    let mut vn = [(0u32, 0i64, 0i64); MAX_CYCLE_LEN / 2];
    let mut a = 0i64;
    let mut c = 0i64;
    for t in 0..k {
        let pos = walk[t];
        if t % 2 == 0 {
            cn[t / 2] = (pos.0, a.rem_euclid(z), c.rem_euclid(3));
        } else {
            let f = d.power(pos);
            let m = d.chain(pos);
            vn[t / 2] = (pos.1, (a + f).rem_euclid(z), (c - m).rem_euclid(3));
            if t + 1 < k {
                let next = walk[t + 1];
                a += f - d.power(next);
                c += d.chain(next) - m;
            }
        }
    }
    let closes = (a + d.power(walk[k - 1]) - d.power(walk[0])).rem_euclid(z) == 0;
    let chain_defect = (c - d.chain(walk[k - 1]) + d.chain(walk[0])).rem_euclid(3);
    let h = k / 2;
    let mut simple = true;
    'pairs: for x in 0..h {
        for y in x + 1..h {
            if cn[x] == cn[y] || vn[x] == vn[y] {
                simple = false;
                break 'pairs;
            }
        }
    }
    WalkEval {
        closes,
        chain_defect,
        simple,
    }
}

/// Heap-allocated variant of [`eval_walk`] without the length cap, used to
/// verify witnesses longer than `MAX_CYCLE_LEN` (such as the tripled cycles
/// produced by chain coupling).
pub(crate) fn eval_long_walk<D: WalkDomain>(walk: &[(u32, u32)], z: i64, d: &D) -> WalkEval {
    let k = walk.len();
    debug_assert!(k.is_multiple_of(2) && k >= 4);
    let mut cn = vec![(0u32, 0i64, 0i64); k / 2];
    let mut vn = vec![(0u32, 0i64, 0i64); k / 2];
    let mut a = 0i64;
    let mut c = 0i64;
    for t in 0..k {
        let pos = walk[t];
        if t % 2 == 0 {
            cn[t / 2] = (pos.0, a.rem_euclid(z), c.rem_euclid(3));
        } else {
            let f = d.power(pos);
            let m = d.chain(pos);
            vn[t / 2] = (pos.1, (a + f).rem_euclid(z), (c - m).rem_euclid(3));
            if t + 1 < k {
                let next = walk[t + 1];
                a += f - d.power(next);
                c += d.chain(next) - m;
            }
        }
    }
    let closes = (a + d.power(walk[k - 1]) - d.power(walk[0])).rem_euclid(z) == 0;
    let chain_defect = (c - d.chain(walk[k - 1]) + d.chain(walk[0])).rem_euclid(3);
    cn.sort_unstable();
    vn.sort_unstable();
    let simple = cn.windows(2).all(|w| w[0] != w[1]) && vn.windows(2).all(|w| w[0] != w[1]);
    WalkEval {
        closes,
        chain_defect,
        simple,
    }
}

/// Canonical form of a pointed walk plus its orbit size: among the `k`
/// pointed variants (`k/2` rotations by one row/column pair of the walk and
/// of its reversal) returns the lexicographically smallest and the number of
/// distinct ones.
pub(crate) fn canonical_walk(walk: &[(u32, u32)]) -> (Vec<(u32, u32)>, usize) {
    let k = walk.len();
    let mut variants: BTreeSet<Vec<(u32, u32)>> = BTreeSet::new();
    let mut add_rotations = |base: &[(u32, u32)]| {
        for t in 0..k / 2 {
            let mut v = Vec::with_capacity(k);
            v.extend_from_slice(&base[2 * t..]);
            v.extend_from_slice(&base[..2 * t]);
            variants.insert(v);
        }
    };
    add_rotations(walk);
    let reversed: Vec<(u32, u32)> = walk.iter().rev().copied().collect();
    add_rotations(&reversed);
    let orbit = variants.len();
    let canonical = variants.into_iter().next().expect("nonempty orbit");
    (canonical, orbit)
}

/// Depth-first enumeration of pointed walks of length `k` starting at
/// `seq[0]`: even-to-odd steps stay on the block row, odd-to-even steps on
/// the block column, consecutive blocks differ, and the final block both
/// shares the row of its predecessor and closes the column back to the first
/// block. Positions encoding below `min_enc` are pruned (used by the census
/// to anchor each class at its smallest position).
fn dfs<V: FnMut(&[(u32, u32)])>(
    grid: &WalkGrid,
    k: usize,
    min_enc: u32,
    seq: &mut [(u32, u32); MAX_CYCLE_LEN],
    slot: usize,
    visit: &mut V,
) {
    if slot == k - 1 {
        let (i, pj) = seq[k - 2];
        let j0 = seq[0].1;
        if pj == j0 || i == seq[0].0 {
            return;
        }
        if grid.enc(i, j0) < min_enc || !grid.has(i, j0) {
            return;
        }
        seq[k - 1] = (i, j0);
        visit(&seq[..k]);
        return;
    }
    let (pi, pj) = seq[slot - 1];
    if slot % 2 == 1 {
        for &j in &grid.rows[pi as usize] {
            if j == pj || grid.enc(pi, j) < min_enc {
                continue;
            }
            seq[slot] = (pi, j);
            dfs(grid, k, min_enc, seq, slot + 1, visit);
        }
    } else {
        for &i in &grid.cols[pj as usize] {
            if i == pi || grid.enc(i, pj) < min_enc {
                continue;
            }
            seq[slot] = (i, pj);
            dfs(grid, k, min_enc, seq, slot + 1, visit);
        }
    }
}

/// Early-exit variant of [`dfs`]: true as soon as one walk evaluates to a
/// cycle.
fn dfs_exists<D: WalkDomain>(
    grid: &WalkGrid,
    k: usize,
    seq: &mut [(u32, u32); MAX_CYCLE_LEN],
    slot: usize,
    d: &D,
) -> bool {
    if slot == k - 1 {
        let (i, pj) = seq[k - 2];
        let j0 = seq[0].1;
        if pj == j0 || i == seq[0].0 || !grid.has(i, j0) {
            return false;
        }
        seq[k - 1] = (i, j0);
        return eval_walk(&seq[..k], grid.z as i64, d).is_cycle();
    }
    let (pi, pj) = seq[slot - 1];
    if slot % 2 == 1 {
        for &j in &grid.rows[pi as usize] {
            if j == pj {
                continue;
            }
            seq[slot] = (pi, j);
            if dfs_exists(grid, k, seq, slot + 1, d) {
                return true;
            }
        }
    } else {
        for &i in &grid.cols[pj as usize] {
            if i == pi {
                continue;
            }
            seq[slot] = (i, pj);
            if dfs_exists(grid, k, seq, slot + 1, d) {
                return true;
            }
        }
    }
    false
}

/// Stream all pointed walks of length `k`, returning the number that lift to
/// cycles and, per block position, how many of those walks visit it (with
/// multiplicity). Deterministic for any worker count: partial results are
/// integer sums.
pub(crate) fn stream_pointed<D: WalkDomain>(grid: &WalkGrid, k: usize, d: &D) -> (u64, Vec<u64>) {
    let n_cells = grid.rows.len() * grid.n_block_cols;
    let z = grid.z as i64;
    grid.blocks
        .par_iter()
        .fold(
            || (0u64, vec![0u64; n_cells]),
            |mut acc, &seed| {
                let mut seq = [(0u32, 0u32); MAX_CYCLE_LEN];
                seq[0] = seed;
                dfs(grid, k, 0, &mut seq, 1, &mut |walk| {
                    if eval_walk(walk, z, d).is_cycle() {
                        acc.0 += 1;
                        for &(i, j) in walk {
                            acc.1[grid.enc(i, j) as usize] += 1;
                        }
                    }
                });
                acc
            },
        )
        .reduce(
            || (0u64, vec![0u64; n_cells]),
            |mut a, b| {
                a.0 += b.0;
                for (x, y) in a.1.iter_mut().zip(b.1) {
                    *x += y;
                }
                a
            },
        )
}

/// True if the matrix seen through `d` has at least one length-`k` cycle.
pub(crate) fn any_cycle<D: WalkDomain>(grid: &WalkGrid, k: usize, d: &D) -> bool {
    grid.blocks.par_iter().any(|&seed| {
        let mut seq = [(0u32, 0u32); MAX_CYCLE_LEN];
        seq[0] = seed;
        dfs_exists(grid, k, &mut seq, 1, d)
    })
}

/// Enumerate one canonical pointed walk per equivalence class of closed
/// length-`k` walks satisfying `keep`, sorted lexicographically. Each class
/// is anchored at its smallest block position, so no cross-seed
/// deduplication is needed.
pub(crate) fn walk_classes<F>(grid: &WalkGrid, k: usize, keep: F) -> Vec<Vec<(u32, u32)>>
where
    F: Fn(&[(u32, u32)]) -> bool + Sync,
{
    let mut classes: Vec<Vec<(u32, u32)>> = grid
        .blocks
        .par_iter()
        .flat_map_iter(|&seed| {
            let mut found: BTreeSet<Vec<(u32, u32)>> = BTreeSet::new();
            let mut seq = [(0u32, 0u32); MAX_CYCLE_LEN];
            seq[0] = seed;
            dfs(
                grid,
                k,
                grid.enc(seed.0, seed.1),
                &mut seq,
                1,
                &mut |walk| {
                    if keep(walk) {
                        found.insert(canonical_walk(walk).0);
                    }
                },
            );
            found.into_iter()
        })
        .collect();
    classes.sort_unstable();
    classes
}

/// One equivalence class of closed block walks that lifts to binary cycles.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BlockCycle {
    seq: Vec<BlockPos>,
    orbit: usize,
    lifted: u64,
}

impl BlockCycle {
    fn from_canonical(grid: &WalkGrid, walk: &[(u32, u32)]) -> Result<BlockCycle> {
        let (_, orbit) = canonical_walk(walk);
        let ev = eval_walk(walk, grid.z as i64, &PlainDomain(grid));
        let lifted = if ev.is_cycle() {
            exact_scale(orbit as u64, grid.z as u64, walk.len() as u64)?
        } else {
            0
        };
        Ok(BlockCycle {
            seq: walk
                .iter()
                .map(|&(i, j)| (i as usize, j as usize))
                .collect(),
            orbit,
            lifted,
        })
    }

    /// The canonical pointed walk: block positions in traversal order.
    pub fn positions(&self) -> &[BlockPos] {
        &self.seq
    }

    /// Walk length `k`.
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Number of distinct pointed walks in the class (a divisor of `k`).
    pub fn orbit_size(&self) -> usize {
        self.orbit
    }

    /// Number of binary cycles the class lifts to: `z * orbit / k`.
    pub fn lifted_cycles(&self) -> u64 {
        self.lifted
    }
}

/// Aggregate cycle statistics for one length.
#[derive(Debug, Clone)]
pub struct CycleCensus {
    pub k: usize,
    /// Total binary cycles of length `k`.
    pub total: u64,
    /// Binary cycles visiting each block position, counted with multiplicity
    /// (one count per visit, so the values sum to `k * total`). For
    /// replica-anchored censuses the positions are folded onto the base grid.
    pub participation: BTreeMap<BlockPos, u64>,
    /// Canonical class representatives, when the census enumerated them.
    pub classes: Option<Vec<BlockCycle>>,
}

/// Count binary length-`k` cycles of the expanded matrix without enumerating
/// classes. Exact, streaming, and parallel.
pub fn count_cycles(bm: &BlockMatrix, k: usize) -> Result<CycleCensus> {
    validate_len(k)?;
    let grid = WalkGrid::new(bm);
    let (pointed, visits) = stream_pointed(&grid, k, &PlainDomain(&grid));
    let z = bm.z() as u64;
    let total = exact_scale(pointed, z, k as u64)?;
    let mut participation = BTreeMap::new();
    for (idx, &v) in visits.iter().enumerate() {
        if v > 0 {
            let pos = (idx / bm.n_block_cols(), idx % bm.n_block_cols());
            participation.insert(pos, exact_scale(v, z, k as u64)?);
        }
    }
    Ok(CycleCensus {
        k,
        total,
        participation,
        classes: None,
    })
}

/// Enumerate all length-`k` cycle classes of the expanded matrix, sorted by
/// canonical walk.
pub fn enumerate_block_cycles(bm: &BlockMatrix, k: usize) -> Result<Vec<BlockCycle>> {
    validate_len(k)?;
    let grid = WalkGrid::new(bm);
    let z = grid.z as i64;
    let plain = PlainDomain(&grid);
    let canonicals = walk_classes(&grid, k, |walk| eval_walk(walk, z, &plain).is_cycle());
    canonicals
        .iter()
        .map(|walk| BlockCycle::from_canonical(&grid, walk))
        .collect()
}

/// Number of binary cycles a single closed block walk lifts to. Validates
/// the walk shape: even length in range, alternating row/column shares
/// (closing column-wise back to the start), consecutive blocks distinct, all
/// blocks structurally nonzero.
pub fn lifted_count(bm: &BlockMatrix, walk: &[BlockPos]) -> Result<u64> {
    let k = walk.len();
    validate_len(k)?;
    for t in 0..k {
        let (i, j) = walk[t];
        if i >= bm.n_block_rows() || j >= bm.n_block_cols() {
            return Err(Error::Validation(format!(
                "walk position ({i}, {j}) outside the block grid"
            )));
        }
        if bm.get(i, j).is_none() {
            return Err(Error::Validation(format!(
                "walk visits structurally zero block ({i}, {j})"
            )));
        }
        let (ni, nj) = walk[(t + 1) % k];
        if (i, j) == (ni, nj) {
            return Err(Error::Validation(format!(
                "walk stays on block ({i}, {j}) for two consecutive slots"
            )));
        }
        if t % 2 == 0 && i != ni {
            return Err(Error::Validation(format!(
                "walk slots {t} and {} must share a block row",
                t + 1
            )));
        }
        if t % 2 == 1 && j != nj {
            return Err(Error::Validation(format!(
                "walk slots {t} and {} must share a block column",
                (t + 1) % k
            )));
        }
    }
    let grid = WalkGrid::new(bm);
    let w: Vec<(u32, u32)> = walk.iter().map(|&(i, j)| (i as u32, j as u32)).collect();
    if !eval_walk(&w, grid.z as i64, &PlainDomain(&grid)).is_cycle() {
        return Ok(0);
    }
    let (_, orbit) = canonical_walk(&w);
    exact_scale(orbit as u64, grid.z as u64, k as u64)
}

/// Girth probe result: either the exact girth, or a lower bound when no
/// cycle of length up to the probe limit exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum GirthResult {
    Girth(usize),
    AtLeast(usize),
}

impl GirthResult {
    pub fn exact(&self) -> Option<usize> {
        match *self {
            GirthResult::Girth(g) => Some(g),
            GirthResult::AtLeast(_) => None,
        }
    }

    /// Smallest cycle length consistent with the probe.
    pub fn lower_bound(&self) -> usize {
        match *self {
            GirthResult::Girth(g) | GirthResult::AtLeast(g) => g,
        }
    }
}

/// Find the girth of the expanded matrix by probing even lengths up to
/// `max_len`; returns `AtLeast(max_len + 2)` if none is found.
pub fn girth(bm: &BlockMatrix, max_len: usize) -> Result<GirthResult> {
    validate_len(max_len)?;
    let grid = WalkGrid::new(bm);
    for k in (4..=max_len).step_by(2) {
        if any_cycle(&grid, k, &PlainDomain(&grid)) {
            return Ok(GirthResult::Girth(k));
        }
    }
    Ok(GirthResult::AtLeast(max_len + 2))
}

/// Census of the length-`k` cycles that visit a given replica (1-based) of a
/// coupled chain. Classes are filtered to those with at least one lifted
/// cycle; participation is folded onto the `gamma x kappa` base grid and
/// weighted by lifted count, one count per visit.
pub fn cycles_through_replica(sc: &ScCode, k: usize, replica: usize) -> Result<CycleCensus> {
    validate_len(k)?;
    if replica == 0 || replica > sc.params.l {
        return Err(Error::Validation(format!(
            "replica {replica} out of range 1..={}",
            sc.params.l
        )));
    }
    let lo = (replica - 1) * sc.params.kappa;
    let hi = replica * sc.params.kappa;
    let mut classes = Vec::new();
    let mut participation: BTreeMap<BlockPos, u64> = BTreeMap::new();
    let mut total = 0u64;
    for class in enumerate_block_cycles(&sc.h_sc, k)? {
        if class.lifted == 0 || !class.seq.iter().any(|&(_, j)| j >= lo && j < hi) {
            continue;
        }
        total += class.lifted;
        for &pos in &class.seq {
            *participation.entry(sc.fold(pos)).or_insert(0) += class.lifted;
        }
        classes.push(class);
    }
    Ok(CycleCensus {
        k,
        total,
        participation,
        classes: Some(classes),
    })
}
