//! Shared test oracles, deliberately independent of the library's
//! internals: an exhaustive depth-first simple-cycle counter over the
//! explicit bipartite adjacency of an expanded binary matrix, a dense
//! GF(2) syndrome reference, and a seeded random block-matrix generator.
//!
//! The cycle oracle works on plain adjacency lists and never touches the
//! block/circulant structure, so agreement with the algebraic counter is
//! meaningful evidence rather than a tautology.

#![allow(dead_code)]

use mdsc::block::{BinaryMatrix, BlockMatrix, CodeParams};
use mdsc::md::MdMapping;
use mdsc::sc::{Grid, ScCode};
use rand::rngs::StdRng;
use rand::Rng;
use std::collections::BTreeMap;

/// Explicit bipartite graph: `check_adj[c]` lists variable neighbours of
/// check `c`, `var_adj[v]` lists check neighbours of variable `v`.
pub struct BipartiteGraph {
    pub check_adj: Vec<Vec<usize>>,
    pub var_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn from_binary(m: &BinaryMatrix) -> Self {
        let mut check_adj = vec![Vec::new(); m.n_rows()];
        let mut var_adj = vec![Vec::new(); m.n_cols()];
        for (r, adj) in check_adj.iter_mut().enumerate() {
            for &c in m.row(r) {
                adj.push(c as usize);
                var_adj[c as usize].push(r);
            }
        }
        BipartiteGraph { check_adj, var_adj }
    }

    pub fn complete(n_checks: usize, n_vars: usize) -> Self {
        BipartiteGraph {
            check_adj: vec![(0..n_vars).collect(); n_checks],
            var_adj: vec![(0..n_checks).collect(); n_vars],
        }
    }
}

/// Count simple cycles of length `k` (`k/2` checks and `k/2` variables,
/// all distinct) by exhaustive alternating DFS.
///
/// Each cycle is counted exactly once: the walk is rooted at the cycle's
/// minimum-index check and oriented so that the first variable has a
/// smaller index than the closing variable.
pub fn count_simple_cycles(g: &BipartiteGraph, k: usize) -> u64 {
    assert!(
        k >= 4 && k.is_multiple_of(2),
        "cycle length must be even and >= 4"
    );
    let half = k / 2;
    let mut total = 0u64;
    let mut used_checks = vec![false; g.check_adj.len()];
    let mut used_vars = vec![false; g.var_adj.len()];
    for root in 0..g.check_adj.len() {
        used_checks[root] = true;
        total += paths_from(
            g,
            root,
            root,
            1,
            half,
            usize::MAX,
            &mut used_checks,
            &mut used_vars,
        );
        used_checks[root] = false;
    }
    total
}

/// Extend an alternating path that currently ends at check `at` and has
/// consumed `depth` checks; returns the number of completions into cycles.
#[allow(clippy::too_many_arguments)]
fn paths_from(
    g: &BipartiteGraph,
    root: usize,
    at: usize,
    depth: usize,
    half: usize,
    first_var: usize,
    used_checks: &mut [bool],
    used_vars: &mut [bool],
) -> u64 {
    let mut total = 0u64;
    for &v in &g.check_adj[at] {
        if used_vars[v] {
            continue;
        }
        if depth == half {
            // Closing variable: must connect back to the root and keep the
            // orientation canonical (first variable < closing variable).
            if first_var < v && g.var_adj[v].contains(&root) {
                total += 1;
            }
            continue;
        }
        used_vars[v] = true;
        let fv = if depth == 1 { v } else { first_var };
        for &c in &g.var_adj[v] {
            // Root stays the minimum-index check of the whole cycle.
            if used_checks[c] || c <= root {
                continue;
            }
            used_checks[c] = true;
            total += paths_from(g, root, c, depth + 1, half, fv, used_checks, used_vars);
            used_checks[c] = false;
        }
        used_vars[v] = false;
    }
    total
}

/// Oracle girth: smallest even `k <= probe_max` with a cycle, if any.
pub fn oracle_girth(g: &BipartiteGraph, probe_max: usize) -> Option<usize> {
    (4..=probe_max)
        .step_by(2)
        .find(|&k| count_simple_cycles(g, k) > 0)
}

/// Dense GF(2) syndrome: one parity bit per matrix row.
pub fn dense_syndrome(m: &BinaryMatrix, word: &[u8]) -> Vec<u8> {
    assert_eq!(word.len(), m.n_cols());
    (0..m.n_rows())
        .map(|r| {
            m.row(r)
                .iter()
                .fold(0u8, |acc, &c| acc ^ (word[c as usize] & 1))
        })
        .collect()
}

/// Seeded random block matrix with the given fill probability; guaranteed
/// to contain at least one block.
pub fn random_block_matrix(
    rng: &mut StdRng,
    n_block_rows: usize,
    n_block_cols: usize,
    z: usize,
    fill: f64,
) -> BlockMatrix {
    loop {
        let mut entries = Vec::new();
        for i in 0..n_block_rows {
            for j in 0..n_block_cols {
                if rng.gen_bool(fill) {
                    entries.push((i, j, rng.gen_range(0..z)));
                }
            }
        }
        if !entries.is_empty() {
            return BlockMatrix::from_entries(n_block_rows, n_block_cols, z, entries).unwrap();
        }
    }
}

#[test]
fn oracle_agrees_with_complete_bipartite_closed_forms() {
    // K_{2,3}: choose both checks and any 2 of 3 variables -> 3 quadrilaterals,
    // and no 6-cycles (only two checks exist).
    let k23 = BipartiteGraph::complete(2, 3);
    assert_eq!(count_simple_cycles(&k23, 4), 3);
    assert_eq!(count_simple_cycles(&k23, 6), 0);

    // K_{3,3}: 9 quadrilaterals (3 choose 2 squared), 6 hexagons
    // ((3-1)! * 3! / 2), and no 8-cycles.
    let k33 = BipartiteGraph::complete(3, 3);
    assert_eq!(count_simple_cycles(&k33, 4), 9);
    assert_eq!(count_simple_cycles(&k33, 6), 6);
    assert_eq!(count_simple_cycles(&k33, 8), 0);

    // K_{4,4}: (4 choose 2)^2 = 36 quadrilaterals; (4 choose 3)^2 * 6 = 96
    // hexagons; Hamiltonian cycles of K_{n,n} number n! (n-1)! / 2, so 72
    // octagons.
    let k44 = BipartiteGraph::complete(4, 4);
    assert_eq!(count_simple_cycles(&k44, 4), 36);
    assert_eq!(count_simple_cycles(&k44, 6), 96);
    assert_eq!(count_simple_cycles(&k44, 8), 72);
}

#[test]
fn oracle_girth_spots_the_shortest_cycle() {
    let k33 = BipartiteGraph::complete(3, 3);
    assert_eq!(oracle_girth(&k33, 8), Some(4));
    let k23 = BipartiteGraph::complete(2, 3);
    assert_eq!(oracle_girth(&k23, 8), Some(4));
}

#[test]
fn dense_syndrome_matches_hand_example() {
    let m = BinaryMatrix::from_rows(3, 3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]);
    assert_eq!(dense_syndrome(&m, &[1, 0, 0]), vec![1, 0, 1]);
    assert_eq!(dense_syndrome(&m, &[1, 1, 0]), vec![0, 1, 1]);
    assert_eq!(dense_syndrome(&m, &[1, 1, 1]), vec![0, 0, 0]);
}

/// Seeded random coupled chain small enough for exhaustive oracles.
pub fn random_sc_code(rng: &mut StdRng) -> ScCode {
    loop {
        let gamma = rng.gen_range(2..=3);
        let kappa = rng.gen_range(gamma..=4);
        let z = rng.gen_range(2..=5);
        let m = rng.gen_range(0..=1usize);
        let l = rng.gen_range(2..=3);
        let pm_rows: Vec<Vec<usize>> = (0..gamma)
            .map(|_| (0..kappa).map(|_| rng.gen_range(0..=m)).collect())
            .collect();
        let cm_rows: Vec<Vec<usize>> = (0..gamma)
            .map(|_| (0..kappa).map(|_| rng.gen_range(0..z)).collect())
            .collect();
        let params = match CodeParams::new(gamma, kappa, z, m, l) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let pm = Grid::from_rows(&pm_rows).unwrap();
        let cm = Grid::from_rows(&cm_rows).unwrap();
        if let Ok(code) = ScCode::new(params, pm, cm) {
            return code;
        }
    }
}

/// Seeded random relocation mapping over a `gamma x kappa` grid.
pub fn random_mapping(rng: &mut StdRng, gamma: usize, kappa: usize) -> MdMapping {
    let rows: Vec<Vec<usize>> = (0..gamma)
        .map(|_| (0..kappa).map(|_| rng.gen_range(0..3)).collect())
        .collect();
    MdMapping::new(Grid::from_rows(&rows).unwrap(), BTreeMap::new()).unwrap()
}

/// Swap the two auxiliary destinations of a mapping (1 <-> 2).
pub fn swapped_mapping(mapping: &MdMapping) -> MdMapping {
    let grid = mapping.grid();
    let rows: Vec<Vec<usize>> = (0..grid.n_rows())
        .map(|i| {
            (0..grid.n_cols())
                .map(|j| match grid.get(i, j) {
                    1 => 2,
                    2 => 1,
                    v => v,
                })
                .collect()
        })
        .collect();
    MdMapping::new(Grid::from_rows(&rows).unwrap(), BTreeMap::new()).unwrap()
}
