//! File handling shared by the subcommands: code loading (bundled name or
//! file path), sweep parsing, and curve output.

use mdsc::ber::BerPoint;
use mdsc::block::BlockMatrix;
use mdsc::fixtures;
use mdsc::md::{MdCode, MdCodeDescriptor};
use mdsc::sc::{ScCode, ScCodeDescriptor};
use std::path::Path;

/// A code argument resolves to either one coupled chain or a three-copy
/// code; subcommands that need a specific kind unwrap accordingly.
// One short-lived value per invocation, so the variant size gap is moot.
#[allow(clippy::large_enum_variant)]
pub enum LoadedCode {
    Sc(ScCode),
    Md(MdCode),
}

impl LoadedCode {
    pub fn matrix(&self) -> &BlockMatrix {
        match self {
            LoadedCode::Sc(c) => &c.h_sc,
            LoadedCode::Md(c) => &c.h_md,
        }
    }

    pub fn stats(&self) -> mdsc::sc::CodeStats {
        match self {
            LoadedCode::Sc(c) => c.stats(),
            LoadedCode::Md(c) => c.stats(),
        }
    }
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum AnyDescriptor {
    Md(MdCodeDescriptor),
    Sc(ScCodeDescriptor),
}

/// Bundled design names accepted wherever a code file is expected.
pub const BUNDLED: [&str; 7] = [
    "sc-code-1",
    "sc-code-2",
    "sc-code-3",
    "sc-code-4",
    "md-sc-code-1",
    "md-sc-code-2",
    "md-sc-code-3",
];

fn load_bundled(name: &str) -> Option<Result<LoadedCode, String>> {
    Some(match name {
        "sc-code-1" => Ok(LoadedCode::Sc(fixtures::sc_code_1())),
        "sc-code-2" => Ok(LoadedCode::Sc(fixtures::sc_code_2())),
        "sc-code-3" => Ok(LoadedCode::Sc(fixtures::sc_code_3())),
        "sc-code-4" => Ok(LoadedCode::Sc(fixtures::sc_code_4())),
        "md-sc-code-1" => Ok(LoadedCode::Md(fixtures::md_sc_code_1())),
        "md-sc-code-2" => Ok(LoadedCode::Md(fixtures::md_sc_code_2())),
        "md-sc-code-3" => Err(format!(
            "bundled md-sc-code-3 cannot be built: {}",
            fixtures::md_sc_code_3().unwrap_err()
        )),
        _ => return None,
    })
}

/// Resolve `arg` as a bundled design name first, then as a JSON code file.
pub fn load_code(arg: &str) -> Result<LoadedCode, String> {
    if let Some(result) = load_bundled(arg) {
        return result;
    }
    let text = std::fs::read_to_string(arg).map_err(|e| {
        format!(
            "cannot read {arg}: {e} (bundled names: {})",
            BUNDLED.join(", ")
        )
    })?;
    let descriptor: AnyDescriptor = serde_json::from_str(&text).map_err(|_| {
        format!("{arg} is neither a bundled design name nor a recognizable code file")
    })?;
    match descriptor {
        AnyDescriptor::Md(d) => MdCode::from_descriptor(&d)
            .map(LoadedCode::Md)
            .map_err(|e| format!("{arg}: {e}")),
        AnyDescriptor::Sc(d) => ScCode::from_descriptor(&d)
            .map(LoadedCode::Sc)
            .map_err(|e| format!("{arg}: {e}")),
    }
}

pub fn load_sc(arg: &str) -> Result<ScCode, String> {
    match load_code(arg)? {
        LoadedCode::Sc(code) => Ok(code),
        LoadedCode::Md(_) => Err(format!(
            "{arg} is a three-copy code; this command needs a single coupled chain"
        )),
    }
}

pub fn load_md(arg: &str) -> Result<MdCode, String> {
    match load_code(arg)? {
        LoadedCode::Md(code) => Ok(code),
        LoadedCode::Sc(_) => Err(format!(
            "{arg} is a single coupled chain; this command needs a three-copy code \
             (see md-assemble)"
        )),
    }
}

/// Parse `START` or `START:STEP:END` (inclusive) into sweep points.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number {t:?} in sweep {s:?}"))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a] => Ok(vec![num(a)?]),
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if step.is_nan() || step <= 0.0 {
                return Err(format!("sweep step must be positive, got {step}"));
            }
            if b < a {
                return Err(format!("sweep end {b} precedes start {a}"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(format!("sweep {s:?} must be START or START:STEP:END")),
    }
}

const CSV_HEADER: [&str; 8] = [
    "snr_db",
    "frames",
    "bit_errors",
    "frame_errors",
    "ber",
    "fer",
    "ci_low",
    "ci_high",
];

/// Write curve points as CSV; the confidence interval is the 95% Wilson
/// interval on the frame-error rate.
pub fn write_curve_csv(path: &Path, points: &[BerPoint]) -> Result<(), String> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    let fail = |e: csv::Error| format!("cannot write {}: {e}", path.display());
    writer.write_record(CSV_HEADER).map_err(fail)?;
    for p in points {
        let (lo, hi) = p.fer_interval();
        writer
            .write_record(&[
                p.snr_db.to_string(),
                p.frames.to_string(),
                p.bit_errors.to_string(),
                p.frame_errors.to_string(),
                p.ber.to_string(),
                p.fer.to_string(),
                lo.to_string(),
                hi.to_string(),
            ])
            .map_err(fail)?;
    }
    writer
        .flush()
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Render the same table for the terminal.
pub fn print_curve(points: &[BerPoint]) {
    println!(
        "{:>7} {:>7} {:>10} {:>12} {:>10} {:>10} {:>21}",
        "snr_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "fer 95% interval"
    );
    for p in points {
        let (lo, hi) = p.fer_interval();
        println!(
            "{:>7} {:>7} {:>10} {:>12} {:>10.3e} {:>10.3e} [{:.3e}, {:.3e}]",
            p.snr_db, p.frames, p.bit_errors, p.frame_errors, p.ber, p.fer, lo, hi
        );
    }
}
