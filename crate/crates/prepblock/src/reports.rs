//! Reproduction harness: rebuilds the bundled reference tables and worked
//! examples from constructions, fixtures and enumeration, compares the
//! results against embedded reference values, and reports row-by-row
//! pass/fail. Rows whose subdesign comes from an unprinted external catalog
//! are marked as requiring a user-supplied design file instead of being
//! invented.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::construct::{egd_design, linked_block, modify, square_lattice, Edit, EgdSpec};
use crate::criteria::{a_eff, k_thresholds, mv_eff, mv_thresholds, KTable};
use crate::enumerate::{best_binary, Criterion};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{BlockDesign, FullDesignSpec};

/// Rounds half away from zero at the given number of decimal places.
pub fn round_to(x: f64, places: i32) -> f64 {
    let scale = 10f64.powi(places);
    (x * scale).round() / scale
}

/// Threshold row of a subdesign at the standard levels 0.90, 0.95, 0.98
/// with the block-size cap 20.
pub fn standard_k_row(d: &BlockDesign) -> Result<KTable> {
    k_thresholds(d, &[0.90, 0.95, 0.98], 20)
}

/// (A-efficiency, MV-efficiency) of the full design at block size k, the MV
/// part through the closed-form bound; defined only for k >= k*.
pub fn efficiency_pair(d: &BlockDesign, k: usize) -> Result<(f64, f64)> {
    let thresholds = mv_thresholds(d)?;
    if k < thresholds.k_star {
        return Err(Error::Usage(format!(
            "the efficiency pair needs k >= k* = {}, got k = {k}",
            thresholds.k_star
        )));
    }
    let spec = FullDesignSpec::new(d.clone(), k)?;
    Ok((a_eff(&spec)?, mv_eff(&spec, None)?))
}

/// A five-block subdesign with sizes (12, 12, 13, 12, 11): a linked block
/// design with one treatment shifted from the fifth block into the third.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftedLinkedBlock {
    pub design: BlockDesign,
    pub block_sizes: Vec<usize>,
    pub a_eff_at_30: f64,
    /// Spread of the k = 30 A-efficiency over every eligible shift choice;
    /// tiny spread means the fixed lowest-label choice is immaterial.
    pub choice_spread: f64,
}

/// Builds the shifted design, always moving the lowest-labeled treatment
/// that appears in block 5 but not in block 3, and evaluates every other
/// eligible choice as a robustness check.
pub fn shifted_linked_block() -> Result<ShiftedLinkedBlock> {
    let base = linked_block(3, 5)?;
    let block5 = &base.blocks()[4];
    let block3 = &base.blocks()[2];
    let eligible: Vec<u32> = block5
        .iter()
        .copied()
        .filter(|t| !block3.contains(t))
        .collect();
    let mut chosen: Option<(BlockDesign, f64)> = None;
    let mut effs = Vec::with_capacity(eligible.len());
    for &label in &eligible {
        let moved = modify(
            &base,
            &[Edit::MoveTreatment {
                label,
                from: 5,
                to: 3,
            }],
        )?;
        let eff = a_eff(&FullDesignSpec::new(moved.clone(), 30)?)?;
        if chosen.is_none() {
            chosen = Some((moved, eff));
        }
        effs.push(eff);
    }
    let (design, a_eff_at_30) =
        chosen.ok_or_else(|| Error::Usage("no treatment lies in block 5 but not 3".into()))?;
    let spread = effs.iter().fold(f64::NEG_INFINITY, |a, &x| a.max(x))
        - effs.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let block_sizes = design.blocks().iter().map(|b| b.len()).collect();
    Ok(ShiftedLinkedBlock {
        design,
        block_sizes,
        a_eff_at_30,
        choice_spread: spread,
    })
}

/// Subdesign of the large EGD(7,3) row: the EGD design augmented by seven
/// extra pair blocks, dualized. 91 treatments in 21 blocks.
pub fn egd_7_3_augmented_dual() -> Result<BlockDesign> {
    let mut blocks = egd_design(&EgdSpec::new(vec![7, 3])?).blocks().to_vec();
    for [a, c] in [
        [1u32, 5],
        [4, 8],
        [7, 11],
        [10, 14],
        [13, 17],
        [16, 20],
        [19, 2],
    ] {
        blocks.push(vec![a.min(c), a.max(c)]);
    }
    Ok(BlockDesign::new(blocks)?.dual())
}

/// Subdesign of the large EGD(3,4,4) row: the EGD design with blocks {1,2}
/// and {32,48} removed, dualized. 190 treatments in 48 blocks.
pub fn egd_3_4_4_trimmed_dual() -> Result<BlockDesign> {
    let mut blocks = egd_design(&EgdSpec::new(vec![3, 4, 4])?).blocks().to_vec();
    for target in [vec![1u32, 2], vec![32, 48]] {
        let pos = blocks
            .iter()
            .position(|b| *b == target)
            .ok_or_else(|| Error::Usage(format!("EGD(3,4,4) has no block {target:?}")))?;
        blocks.remove(pos);
    }
    Ok(BlockDesign::new(blocks)?.dual())
}

/// Subdesign of the EGD(2,3,5) row: the dual of the EGD design itself.
/// 105 treatments in 30 blocks.
pub fn egd_2_3_5_dual() -> Result<BlockDesign> {
    Ok(egd_design(&EgdSpec::new(vec![2, 3, 5])?).dual())
}

/// Subdesign of the guideline walkthrough: EGD(3,3,3) extended by blocks
/// {1,18} and {10,27}, dualized. 83 treatments in 27 blocks.
pub fn egd_3_3_3_extended_dual() -> Result<BlockDesign> {
    let mut blocks = egd_design(&EgdSpec::new(vec![3, 3, 3])?).blocks().to_vec();
    blocks.push(vec![1, 18]);
    blocks.push(vec![10, 27]);
    Ok(BlockDesign::new(blocks)?.dual())
}

/// Outcome of one reproduced table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Mismatch,
    /// The source design is not bundled; supply it as a .blocks file.
    ExternalRequired,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Ok => "ok",
            RowStatus::Mismatch => "MISMATCH",
            RowStatus::ExternalRequired => "external design required",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub key: String,
    pub design: String,
    /// CLI invocation that rebuilds this row.
    pub command: String,
    pub computed: Option<Vec<String>>,
    /// Unrounded numeric cells, where the row has any.
    pub raw: Vec<f64>,
    pub target: Vec<String>,
    pub status: RowStatus,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub what: String,
    pub title: String,
    pub rows: Vec<TableRow>,
}

impl TableReport {
    /// (ok, mismatched, external) row counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for row in &self.rows {
            match row.status {
                RowStatus::Ok => c.0 += 1,
                RowStatus::Mismatch => c.1 += 1,
                RowStatus::ExternalRequired => c.2 += 1,
            }
        }
        c
    }
}

impl fmt::Display for TableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        for row in &self.rows {
            let computed = match &row.computed {
                Some(cells) => format!("({})", cells.join(", ")),
                None => "-".to_string(),
            };
            write!(
                f,
                "  {:<12} {:<34} computed {:<22} target ({})  {}",
                row.key,
                row.design,
                computed,
                row.target.join(", "),
                row.status
            )?;
            if let Some(note) = &row.note {
                write!(f, "  [{note}]")?;
            }
            writeln!(f)?;
        }
        let (ok, mismatch, external) = self.counts();
        write!(
            f,
            "  {} ok, {} mismatched, {} awaiting external designs",
            ok, mismatch, external
        )
    }
}

/// Regenerates one of the bundled reference tables ("table1", "table2",
/// "table3", "tableA1") or the worked examples ("examples"). `designs_dir`
/// supplies .blocks files for rows based on designs not bundled here.
pub fn reproduce(what: &str, designs_dir: Option<&Path>) -> Result<TableReport> {
    match what {
        "table1" => table1_report(),
        "table2" => table2_report(designs_dir),
        "table3" => table3_report(designs_dir),
        "tableA1" | "tablea1" => table_a1_report(designs_dir),
        "examples" => examples_report(),
        other => Err(Error::Usage(format!(
            "unknown report '{other}' (expected table1, table2, table3, tableA1 or examples)"
        ))),
    }
}

fn threshold_cells(table: &KTable) -> Vec<String> {
    std::iter::once(table.k0.to_string())
        .chain(table.thresholds.iter().map(|t| match t {
            Some(k) => k.to_string(),
            None => "X".to_string(),
        }))
        .collect()
}

/// Efficiency display: "1" marks exact attainment of the bound; anything
/// strictly below caps at "0.999" so near-misses are not mistaken for
/// optimality; otherwise plain 3 d.p.
fn fmt_eff3(x: f64) -> String {
    if (x - 1.0).abs() < 1e-9 {
        return "1".to_string();
    }
    let r = round_to(x, 3);
    if r >= 1.0 {
        "0.999".to_string()
    } else {
        format!("{r:.3}")
    }
}

/// Threshold targets for the enumerated catalog-class subdesigns,
/// u, b >= 4 with u + b <= 16.
const TABLE1: &[(usize, usize, [&str; 4])] = &[
    (4, 4, ["3", "3", "4", "X"]),
    (5, 4, ["3", "3", "6", "X"]),
    (6, 4, ["4", "4", "4", "4"]),
    (7, 4, ["4", "4", "4", "6"]),
    (8, 4, ["5", "5", "5", "6"]),
    (9, 4, ["5", "5", "5", "7"]),
    (10, 4, ["6", "6", "6", "6"]),
    (11, 4, ["6", "6", "6", "7"]),
    (12, 4, ["7", "7", "7", "7"]),
    (4, 5, ["4", "X", "X", "X"]),
    (5, 5, ["3", "7", "X", "X"]),
    (6, 5, ["3", "4", "X", "X"]),
    (7, 5, ["3", "4", "7", "X"]),
    (8, 5, ["4", "4", "5", "X"]),
    (9, 5, ["4", "4", "5", "9"]),
    (10, 5, ["5", "5", "5", "5"]),
    (11, 5, ["5", "5", "5", "7"]),
    (5, 6, ["5", "X", "X", "X"]),
    (6, 6, ["3", "X", "X", "X"]),
    (7, 6, ["3", "9", "X", "X"]),
    (8, 6, ["3", "5", "X", "X"]),
    (9, 6, ["4", "4", "5", "X"]),
    (10, 6, ["4", "4", "6", "X"]),
    (6, 7, ["6", "X", "X", "X"]),
    (7, 7, ["3", "X", "X", "X"]),
    (8, 7, ["3", "X", "X", "X"]),
    (9, 7, ["3", "11", "X", "X"]),
    (7, 8, ["7", "X", "X", "X"]),
    (8, 8, ["3", "X", "X", "X"]),
];

/// Picks the enumerated subdesign that minimizes the total-variance
/// criterion simultaneously at k = 10, 15 and 20 (first in canonical order);
/// falls back to the k = 10 winner if no design wins at all three.
fn enumerated_a_subdesign(u: usize, b: usize) -> Result<BlockDesign> {
    let at_10 = best_binary(u, b, 10, Criterion::A)?.optimizers;
    let at_15 = best_binary(u, b, 15, Criterion::A)?.optimizers;
    let at_20 = best_binary(u, b, 20, Criterion::A)?.optimizers;
    Ok(at_10
        .iter()
        .find(|d| at_15.contains(d) && at_20.contains(d))
        .unwrap_or(&at_10[0])
        .clone())
}

fn table1_report() -> Result<TableReport> {
    let mut rows = Vec::with_capacity(TABLE1.len());
    for &(u, b, target) in TABLE1 {
        let d = enumerated_a_subdesign(u, b)?;
        let cells = threshold_cells(&standard_k_row(&d)?);
        let target: Vec<String> = target.iter().map(|s| s.to_string()).collect();
        let status = if cells == target {
            RowStatus::Ok
        } else {
            RowStatus::Mismatch
        };
        rows.push(TableRow {
            key: format!("({u}, {b})"),
            design: "enumerated A-optimal subdesign".to_string(),
            command: format!("enumerate --u {u} --b {b} --k 10 --criterion a"),
            computed: Some(cells),
            raw: Vec::new(),
            target,
            status,
            note: None,
        });
    }
    Ok(TableReport {
        what: "table1".to_string(),
        title: "Catalog-class subdesign thresholds (k0, k0.90, k0.95, k0.98)".to_string(),
        rows,
    })
}

enum SourceDesign {
    Bundled(fn() -> BlockDesign),
    External(&'static str),
}

/// The twelve association-scheme-based subdesigns: bundled where the design
/// is printed in this repository's fixtures, external otherwise.
const PBIB_ROWS: &[(usize, usize, &str, SourceDesign, [&str; 4], f64, &str)] = &[
    // (u, b, display, source, threshold row targets, (k*, mv_eff) targets)
    (14, 4, "dual of R6", SourceDesign::External("dual-of-r6"), ["8", "8", "8", "8"], 0.991, "10"),
    (16, 4, "dual of R10", SourceDesign::External("dual-of-r10"), ["9", "9", "9", "9"], 0.990, "11"),
    (20, 4, "dual of R16", SourceDesign::External("dual-of-r16"), ["11", "11", "11", "11"], 0.996, "14"),
    (15, 5, "dual of C6", SourceDesign::External("dual-of-c6"), ["7", "7", "7", "8"], 0.981, "8"),
    (25, 5, "dual of C9", SourceDesign::External("dual-of-c9"), ["11", "11", "11", "11"], 0.993, "13"),
    (12, 6, "dual of R18", SourceDesign::External("dual-of-r18"), ["5", "5", "5", "7"], 0.944, "5"),
    (18, 6, "dual of R19", SourceDesign::Bundled(fixtures::dual_r19), ["7", "7", "7", "8"], 0.989, "8"),
    (21, 6, "dual of R20", SourceDesign::External("dual-of-r20"), ["8", "8", "8", "10"], 0.983, "9"),
    (24, 6, "dual of R24", SourceDesign::External("dual-of-r24"), ["9", "9", "9", "10"], 0.989, "10"),
    (16, 8, "LS28 (4x4 lattice)", SourceDesign::Bundled(fixtures::ls28), ["5", "5", "5", "13"], 0.958, "5"),
    (18, 9, "dual of LS1", SourceDesign::External("dual-of-ls1"), ["5", "5", "8", "X"], 0.929, "5"),
    (15, 10, "dual of T2", SourceDesign::External("dual-of-t2"), ["4", "6", "X", "X"], 0.889, "4"),
];

enum Resolved {
    Design(BlockDesign, String),
    Missing(String),
    Bad(String),
}

fn resolve(source: &SourceDesign, u: usize, b: usize, dir: Option<&Path>) -> Resolved {
    match source {
        SourceDesign::Bundled(build) => {
            Resolved::Design(build(), "bundled design".to_string())
        }
        SourceDesign::External(slug) => {
            let file = format!("{slug}.blocks");
            let Some(dir) = dir else {
                return Resolved::Missing(file);
            };
            let path = dir.join(&file);
            let text = match fs::read_to_string(&path) {
                Ok(text) => text,
                Err(_) => return Resolved::Missing(file),
            };
            match BlockDesign::parse(&text) {
                Err(e) => Resolved::Bad(format!("{file}: {e}")),
                Ok(d) => {
                    if d.num_treatments() != u || d.num_blocks() != b {
                        Resolved::Bad(format!(
                            "{file} holds {} treatments in {} blocks; expected {u} in {b}",
                            d.num_treatments(),
                            d.num_blocks()
                        ))
                    } else {
                        Resolved::Design(d, format!("loaded from {file}"))
                    }
                }
            }
        }
    }
}

fn pbib_row(
    u: usize,
    b: usize,
    display: &str,
    resolved: Resolved,
    target: Vec<String>,
    compute: impl Fn(&BlockDesign) -> Result<(Vec<String>, Vec<f64>)>,
    command: String,
) -> Result<TableRow> {
    let (computed, raw, status, note) = match resolved {
        Resolved::Design(d, provenance) => {
            let (cells, raw) = compute(&d)?;
            let status = if cells == target {
                RowStatus::Ok
            } else {
                RowStatus::Mismatch
            };
            (Some(cells), raw, status, Some(provenance))
        }
        Resolved::Missing(file) => (
            None,
            Vec::new(),
            RowStatus::ExternalRequired,
            Some(format!("supply {file} via --designs DIR")),
        ),
        Resolved::Bad(msg) => (None, Vec::new(), RowStatus::Mismatch, Some(msg)),
    };
    Ok(TableRow {
        key: format!("({u}, {b})"),
        design: display.to_string(),
        command,
        computed,
        raw,
        target,
        status,
        note,
    })
}

fn table2_report(dir: Option<&Path>) -> Result<TableReport> {
    let mut rows = Vec::with_capacity(PBIB_ROWS.len());
    for (u, b, display, source, target, _, _) in PBIB_ROWS {
        let target: Vec<String> = target.iter().map(|s| s.to_string()).collect();
        rows.push(pbib_row(
            *u,
            *b,
            display,
            resolve(source, *u, *b, dir),
            target,
            |d| Ok((threshold_cells(&standard_k_row(d)?), Vec::new())),
            format!("katable --design {}.blocks", slug_of(source, display)),
        )?);
    }
    Ok(TableReport {
        what: "table2".to_string(),
        title: "Association-scheme subdesign thresholds (k0, k0.90, k0.95, k0.98)".to_string(),
        rows,
    })
}

fn table_a1_report(dir: Option<&Path>) -> Result<TableReport> {
    let mut rows = Vec::with_capacity(PBIB_ROWS.len());
    for (u, b, display, source, _, mv_target, k_star_target) in PBIB_ROWS {
        let target = vec![k_star_target.to_string(), format!("{mv_target:.3}")];
        rows.push(pbib_row(
            *u,
            *b,
            display,
            resolve(source, *u, *b, dir),
            target,
            |d| {
                let k_star = mv_thresholds(d)?.k_star;
                let spec = FullDesignSpec::new(d.clone(), k_star)?;
                let eff = mv_eff(&spec, None)?;
                Ok((
                    vec![k_star.to_string(), format!("{:.3}", round_to(eff, 3))],
                    vec![eff],
                ))
            },
            format!(
                "eval --design {}.blocks --k <k*> --criteria mv",
                slug_of(source, display)
            ),
        )?);
    }
    Ok(TableReport {
        what: "tableA1".to_string(),
        title: "Association-scheme subdesigns: k* and MV-efficiency for k >= k*".to_string(),
        rows,
    })
}

fn slug_of(source: &SourceDesign, display: &str) -> String {
    match source {
        SourceDesign::External(slug) => (*slug).to_string(),
        SourceDesign::Bundled(_) => display
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
            .collect::<String>()
            .trim_matches('-')
            .to_string(),
    }
}

enum LargeSource {
    Lb(usize, usize),
    Sl(usize),
    EgdAug73,
    EgdTrim344,
    Egd235,
    Egd333Plus,
    External(&'static str),
}

const TABLE3: &[(&str, usize, usize, usize, &str, LargeSource, (f64, f64))] = &[
    ("(a)", 91, 14, 105, "linked block (1, 14)", LargeSource::Lb(1, 14), (0.999, 1.0)),
    ("(b)", 190, 20, 120, "linked block (1, 20)", LargeSource::Lb(1, 20), (0.999, 1.0)),
    ("(c)", 105, 21, 80, "dual of T8", LargeSource::External("dual-of-t8"), (0.993, 0.987)),
    ("(d)", 100, 20, 80, "square lattice 10 (LS137)", LargeSource::Sl(10), (0.996, 0.992)),
    ("(e)", 100, 25, 64, "dual of LS5", LargeSource::External("dual-of-ls5"), (0.979, 0.969)),
    ("(f)", 36, 12, 90, "square lattice 6 (LS74)", LargeSource::Sl(6), (0.991, 0.979)),
    ("(g)", 40, 16, 67, "dual of M1", LargeSource::External("dual-of-m1"), (0.971, 0.956)),
    ("(a*)", 91, 21, 70, "augmented EGD(7,3) dual", LargeSource::EgdAug73, (0.979, 0.956)),
    ("(b*)", 190, 48, 50, "trimmed EGD(3,4,4) dual", LargeSource::EgdTrim344, (0.968, 0.933)),
    ("(c*)", 105, 30, 56, "EGD(2,3,5) dual", LargeSource::Egd235, (0.961, 0.938)),
    ("guideline", 83, 27, 42, "extended EGD(3,3,3) dual", LargeSource::Egd333Plus, (0.961, 0.933)),
    ("large-u", 435, 30, 80, "linked block (1, 30)", LargeSource::Lb(1, 30), (0.999, 1.0)),
];

fn table3_report(dir: Option<&Path>) -> Result<TableReport> {
    let mut rows = Vec::with_capacity(TABLE3.len());
    for (key, u, b, k, display, source, (a_target, mv_target)) in TABLE3 {
        let (resolved, command) = match source {
            LargeSource::Lb(lambda, bb) => (
                Resolved::Design(linked_block(*lambda, *bb)?, "constructed".to_string()),
                format!("construct linked-block --lambda {lambda} --b {bb}"),
            ),
            LargeSource::Sl(n) => (
                Resolved::Design(square_lattice(*n)?, "constructed".to_string()),
                format!("construct square-lattice --n {n}"),
            ),
            LargeSource::EgdAug73 => (
                Resolved::Design(egd_7_3_augmented_dual()?, "constructed".to_string()),
                "construct egd --m 7,3, augment 7 pair blocks, then dual".to_string(),
            ),
            LargeSource::EgdTrim344 => (
                Resolved::Design(egd_3_4_4_trimmed_dual()?, "constructed".to_string()),
                "construct egd --m 3,4,4, drop blocks {1,2} {32,48}, then dual".to_string(),
            ),
            LargeSource::Egd235 => (
                Resolved::Design(egd_2_3_5_dual()?, "constructed".to_string()),
                "construct egd --m 2,3,5, then dual".to_string(),
            ),
            LargeSource::Egd333Plus => (
                Resolved::Design(egd_3_3_3_extended_dual()?, "constructed".to_string()),
                "construct egd --m 3,3,3, add blocks {1,18} {10,27}, then dual".to_string(),
            ),
            LargeSource::External(slug) => (
                resolve(&SourceDesign::External(slug), *u, *b, dir),
                format!("eval --design {slug}.blocks --k {k}"),
            ),
        };
        let target = vec![fmt_eff3(*a_target), fmt_eff3(*mv_target)];
        let (computed, raw, status, note) = match resolved {
            Resolved::Design(d, provenance) => {
                let (a, mv) = efficiency_pair(&d, *k)?;
                let cells = vec![fmt_eff3(a), fmt_eff3(mv)];
                let status = if cells == target {
                    RowStatus::Ok
                } else {
                    RowStatus::Mismatch
                };
                // The trimmed EGD(3,4,4) reference pair is internally
                // inconsistent: no two-block deletion reproduces both cells.
                let note = if *key == "(b*)" && status == RowStatus::Mismatch {
                    "reference pair mixes two trims: the stated blocks give \
                     (0.968, 0.932); deleting {1,2},{47,48} gives (0.969, 0.933)"
                        .to_string()
                } else {
                    provenance
                };
                (Some(cells), vec![a, mv], status, Some(note))
            }
            Resolved::Missing(file) => (
                None,
                Vec::new(),
                RowStatus::ExternalRequired,
                Some(format!("supply {file} via --designs DIR")),
            ),
            Resolved::Bad(msg) => (None, Vec::new(), RowStatus::Mismatch, Some(msg)),
        };
        rows.push(TableRow {
            key: (*key).to_string(),
            design: (*display).to_string(),
            command,
            computed,
            raw,
            target,
            status,
            note,
        });
    }
    Ok(TableReport {
        what: "table3".to_string(),
        title: "Large full designs: (A-efficiency, MV-efficiency) at the stated k".to_string(),
        rows,
    })
}

fn examples_report() -> Result<TableReport> {
    let mut rows: Vec<TableRow> = Vec::new();
    let mut push = |key: &str,
                    design: &str,
                    command: String,
                    computed: Vec<String>,
                    raw: Vec<f64>,
                    target: Vec<&str>| {
        let target: Vec<String> = target.into_iter().map(|s| s.to_string()).collect();
        let status = if computed == target {
            RowStatus::Ok
        } else {
            RowStatus::Mismatch
        };
        rows.push(TableRow {
            key: key.to_string(),
            design: design.to_string(),
            command,
            computed: Some(computed),
            raw,
            target,
            status,
            note: None,
        });
    };

    let eff_at = |d: &BlockDesign, k: usize| -> Result<f64> {
        a_eff(&FullDesignSpec::new(d.clone(), k)?)
    };
    let eff_cells = |d: &BlockDesign, ks: &[usize]| -> Result<(Vec<String>, Vec<f64>)> {
        let mut cells = Vec::new();
        let mut raw = Vec::new();
        for &k in ks {
            let e = eff_at(d, k)?;
            cells.push(format!("{:.3}", round_to(e, 3)));
            raw.push(e);
        }
        Ok((cells, raw))
    };
    let mv_at = |d: &BlockDesign, k: usize| -> Result<f64> {
        mv_eff(&FullDesignSpec::new(d.clone(), k)?, None)
    };

    // The smallest linked block design is exactly A-optimal at every k.
    let lb13 = fixtures::lb_1_3();
    let worst = (3..=20)
        .map(|k| eff_at(&lb13, k))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    push(
        "lb(1,3)",
        "smallest linked block, min A-eff over k = 3..20",
        "construct linked-block --lambda 1 --b 3".to_string(),
        vec![format!("{:.3}", round_to(worst, 3))],
        vec![worst],
        vec!["1.000"],
    );

    let lb24 = linked_block(2, 4)?;
    let (cells, raw) = eff_cells(&lb24, &[7])?;
    push(
        "lb(2,4)",
        "linked block, A-eff at k = 7",
        "construct linked-block --lambda 2 --b 4".to_string(),
        cells,
        raw,
        vec!["0.986"],
    );

    let trim = fixtures::lb15_trim13();
    let (cells, raw) = eff_cells(&trim, &[5, 6, 7])?;
    push(
        "(13, 6) A",
        "trimmed linked block, A-eff at k = 5, 6, 7",
        "eval --design lb15-trim13.blocks --k 5".to_string(),
        cells,
        raw,
        vec!["0.952", "0.971", "0.978"],
    );
    push(
        "(13, 6) row",
        "trimmed linked block thresholds",
        "katable --design lb15-trim13.blocks".to_string(),
        threshold_cells(&standard_k_row(&trim)?),
        Vec::new(),
        vec!["5", "5", "5", "8"],
    );

    let aug = fixtures::lb15_aug17();
    let (cells, raw) = eff_cells(&aug, &[6, 7])?;
    push(
        "(17, 6) A",
        "augmented linked block, A-eff at k = 6, 7",
        "eval --design lb15-aug17.blocks --k 6".to_string(),
        cells,
        raw,
        vec!["0.952", "0.974"],
    );

    let near = fixtures::near_lb_8_4();
    let (cells, raw) = eff_cells(&near, &[5])?;
    push(
        "(8, 4) A",
        "nearly linked block, A-eff at k = 5",
        "eval --design near-lb-8-4.blocks --k 5".to_string(),
        cells,
        raw,
        vec!["0.975"],
    );

    push(
        "(36, 12) row",
        "square lattice 6 thresholds",
        "construct square-lattice --n 6".to_string(),
        threshold_cells(&standard_k_row(&square_lattice(6)?)?),
        Vec::new(),
        vec!["7", "7", "7", "11"],
    );
    push(
        "(20, 6) row",
        "augmented dual of R19 thresholds",
        "katable --design dual-r19-aug20.blocks".to_string(),
        threshold_cells(&standard_k_row(&fixtures::dual_r19_aug20())?),
        Vec::new(),
        vec!["7", "7", "7", "9"],
    );
    push(
        "(20, 8) row",
        "augmented 4x4 lattice thresholds",
        "katable --design ls28-aug20.blocks".to_string(),
        threshold_cells(&standard_k_row(&fixtures::ls28_aug20())?),
        Vec::new(),
        vec!["6", "6", "6", "10"],
    );

    for (key, d, at_k, target) in [
        ("(13, 6) MV", fixtures::lb15_trim13(), 6, "0.923"),
        ("(17, 6) MV", fixtures::lb15_aug17(), 7, "0.971"),
        ("(36, 12) MV", square_lattice(6)?, 7, "0.979"),
        ("(20, 6) MV", fixtures::dual_r19_aug20(), 8, "0.968"),
        ("(20, 8) MV", fixtures::ls28_aug20(), 6, "0.953"),
    ] {
        let e = mv_at(&d, at_k)?;
        push(
            key,
            "MV-efficiency at its stated threshold",
            format!("eval --design ... --k {at_k} --criteria mv"),
            vec![format!("{:.3}", round_to(e, 3))],
            vec![e],
            vec![target],
        );
    }

    let shifted = shifted_linked_block()?;
    push(
        "shift sizes",
        "shifted linked block (3, 5) block sizes",
        "construct linked-block --lambda 3 --b 5, then move one treatment".to_string(),
        shifted.block_sizes.iter().map(|s| s.to_string()).collect(),
        Vec::new(),
        vec!["12", "12", "13", "12", "11"],
    );
    push(
        "shift A-eff",
        "shifted linked block (3, 5), A-eff at k = 30",
        "eval --design shifted.blocks --k 30".to_string(),
        vec![format!("{:.4}", round_to(shifted.a_eff_at_30, 4))],
        vec![shifted.a_eff_at_30],
        vec!["0.9983"],
    );

    Ok(TableReport {
        what: "examples".to_string(),
        title: "Worked examples".to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_rows_for_bundled_designs() {
        let row = |d: &BlockDesign| threshold_cells(&standard_k_row(d).unwrap());
        assert_eq!(row(&square_lattice(6).unwrap()), ["7", "7", "7", "11"]);
        assert_eq!(row(&fixtures::ls28()), ["5", "5", "5", "13"]);
        assert_eq!(row(&fixtures::ls28_aug20()), ["6", "6", "6", "10"]);
        assert_eq!(row(&fixtures::dual_r19()), ["7", "7", "7", "8"]);
        assert_eq!(row(&fixtures::dual_r19_aug20()), ["7", "7", "7", "9"]);
    }

    #[test]
    fn efficiency_pairs_for_medium_rows() {
        let (a, mv) = efficiency_pair(&square_lattice(6).unwrap(), 90).unwrap();
        assert_eq!((fmt_eff3(a), fmt_eff3(mv)), ("0.991".into(), "0.979".into()));

        let guide = egd_3_3_3_extended_dual().unwrap();
        let (a, mv) = efficiency_pair(&guide, 42).unwrap();
        assert_eq!((fmt_eff3(a), fmt_eff3(mv)), ("0.961".into(), "0.933".into()));

        // Below k* the pair is undefined.
        assert!(efficiency_pair(&square_lattice(10).unwrap(), 10).is_err());
    }

    #[test]
    fn egd_variant_shapes() {
        let aug = egd_7_3_augmented_dual().unwrap();
        assert_eq!((aug.num_treatments(), aug.num_blocks()), (91, 21));
        let trim = egd_3_4_4_trimmed_dual().unwrap();
        assert_eq!((trim.num_treatments(), trim.num_blocks()), (190, 48));
        let plain = egd_2_3_5_dual().unwrap();
        assert_eq!((plain.num_treatments(), plain.num_blocks()), (105, 30));
        let guide = egd_3_3_3_extended_dual().unwrap();
        assert_eq!((guide.num_treatments(), guide.num_blocks()), (83, 27));
        for d in [&aug, &trim, &plain, &guide] {
            assert!(d.replications().iter().all(|&r| r == 2));
            assert!(d.is_connected());
        }
    }

    #[test]
    fn shifted_design_matches_expectations() {
        let shifted = shifted_linked_block().unwrap();
        assert_eq!(shifted.block_sizes, vec![12, 12, 13, 12, 11]);
        assert_eq!(round_to(shifted.a_eff_at_30, 4), 0.9983);
        // Symmetry makes every eligible shift equivalent.
        assert!(shifted.choice_spread < 1e-9, "{}", shifted.choice_spread);
    }

    #[test]
    fn enumerated_rows_match_reference_values() {
        let d = enumerated_a_subdesign(6, 4).unwrap();
        assert_eq!(threshold_cells(&standard_k_row(&d).unwrap()), ["4", "4", "4", "4"]);
        let d = enumerated_a_subdesign(4, 4).unwrap();
        assert_eq!(threshold_cells(&standard_k_row(&d).unwrap()), ["3", "3", "4", "X"]);
    }

    #[test]
    fn pbib_tables_mark_external_rows() {
        let report = reproduce("table2", None).unwrap();
        assert_eq!(report.rows.len(), 12);
        let (ok, mismatch, external) = report.counts();
        assert_eq!((ok, mismatch, external), (2, 0, 10));
        for row in &report.rows {
            if row.status == RowStatus::ExternalRequired {
                assert!(row.note.as_ref().unwrap().contains(".blocks"));
                assert!(row.computed.is_none());
            }
        }

        let a1 = reproduce("tableA1", None).unwrap();
        let (ok, mismatch, external) = a1.counts();
        assert_eq!((ok, mismatch, external), (2, 0, 10));
        let r19 = a1.rows.iter().find(|r| r.key == "(18, 6)").unwrap();
        assert_eq!(r19.computed.as_ref().unwrap(), &["8", "0.989"]);
        let ls28 = a1.rows.iter().find(|r| r.key == "(16, 8)").unwrap();
        assert_eq!(ls28.computed.as_ref().unwrap(), &["5", "0.958"]);
    }

    #[test]
    fn external_designs_fill_their_rows() {
        let dir = std::env::temp_dir().join("prepblock-report-test");
        fs::create_dir_all(&dir).unwrap();
        // A deliberately wrong-shaped file is reported, not silently used.
        fs::write(dir.join("dual-of-t2.blocks"), "1 2\n1 2\n").unwrap();
        // A plausible candidate for the (14, 4) row from our own search.
        let candidate = enumerated_a_subdesign(14, 4).unwrap();
        fs::write(dir.join("dual-of-r6.blocks"), candidate.to_blocks_string()).unwrap();

        let report = reproduce("table2", Some(&dir)).unwrap();
        let t2 = report.rows.iter().find(|r| r.key == "(15, 10)").unwrap();
        assert_eq!(t2.status, RowStatus::Mismatch);
        assert!(t2.note.as_ref().unwrap().contains("expected 15 in 10"));

        // The searched design reproduces the reference row exactly.
        let r6 = report.rows.iter().find(|r| r.key == "(14, 4)").unwrap();
        assert_eq!(r6.status, RowStatus::Ok);
        assert_eq!(r6.computed.as_ref().unwrap(), &["8", "8", "8", "8"]);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn worked_examples_all_pass() {
        let report = reproduce("examples", None).unwrap();
        let (ok, mismatch, external) = report.counts();
        assert_eq!(mismatch, 0, "{report}");
        assert_eq!(external, 0);
        assert_eq!(ok, report.rows.len());
    }

    #[test]
    fn unknown_report_kind_is_an_error() {
        let err = reproduce("table9", None).unwrap_err().to_string();
        assert!(err.contains("table1"));
    }

    #[test]
    fn report_serializes_with_statuses() {
        let report = reproduce("table2", None).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        let statuses: Vec<&str> = json["rows"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["status"].as_str().unwrap())
            .collect();
        assert!(statuses.contains(&"external_required"));
        assert!(statuses.contains(&"ok"));
    }
}
