//! Quick development check: cycle counts and girths of the bundled codes.

use mdsc::cycles::{count_cycles, girth};
use mdsc::fixtures;
use mdsc::md::md_cycle_count;
use std::time::Instant;

fn main() {
    for (name, code, k) in [
        ("sc-code-1", fixtures::sc_code_1(), 6),
        ("sc-code-2", fixtures::sc_code_2(), 8),
        ("sc-code-3", fixtures::sc_code_3(), 6),
        ("sc-code-4", fixtures::sc_code_4(), 8),
    ] {
        let t = Instant::now();
        let census = count_cycles(&code.h_sc, k).unwrap();
        let g = girth(&code.h_sc, 8).unwrap();
        println!(
            "{name}: girth {g:?}, cycles-{k} = {} ({:.2?})",
            census.total,
            t.elapsed()
        );
    }

    for (name, code, k) in [
        ("md-sc-code-1", fixtures::md_sc_code_1(), 6),
        ("md-sc-code-2", fixtures::md_sc_code_2(), 8),
        (
            "md-code-1-adjusted",
            fixtures::md_code_1_with_adjusted_powers(),
            6,
        ),
    ] {
        let t = Instant::now();
        let n = md_cycle_count(&code, k).unwrap();
        let g = girth(&code.h_md, 8).unwrap();
        println!(
            "{name}: girth {g:?}, cycles-{k} = {n} ({:.2?})",
            t.elapsed()
        );
    }
}
