//! Constructors for the subdesign families used throughout: linked block
//! designs, EGD pair designs, square lattices, and a small edit language for
//! deriving one design from another.

use crate::error::{Error, Result};
use crate::model::BlockDesign;

/// Linked block design: the dual of the design whose blocks are all pairs
/// {j, j*}, 1 <= j < j* <= b, each repeated `lambda` times (pairs in
/// lexicographic order, copies consecutive). The result has
/// u = lambda*b(b-1)/2 treatments in b blocks of constant size
/// lambda*(b-1), every treatment replicated twice.
pub fn linked_block(lambda: usize, b: usize) -> Result<BlockDesign> {
    if lambda < 1 {
        return Err(Error::Usage("linked_block requires lambda >= 1".into()));
    }
    if b < 3 {
        return Err(Error::Usage("linked_block requires b >= 3".into()));
    }
    let mut pair_blocks = Vec::with_capacity(lambda * b * (b - 1) / 2);
    for j in 1..=b as u32 {
        for jj in (j + 1)..=b as u32 {
            for _ in 0..lambda {
                pair_blocks.push(vec![j, jj]);
            }
        }
    }
    Ok(BlockDesign::new(pair_blocks)?.dual())
}

/// Dimensions of an EGD pair design: p >= 2 factors, each with at least two
/// levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgdSpec {
    m: Vec<usize>,
}

impl EgdSpec {
    pub fn new(m: Vec<usize>) -> Result<Self> {
        if m.len() < 2 {
            return Err(Error::Usage("EGD requires at least two dimensions".into()));
        }
        if m.iter().any(|&mi| mi < 2) {
            return Err(Error::Usage("every EGD dimension must be at least 2".into()));
        }
        Ok(EgdSpec { m })
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }

    /// Number of cells, i.e. treatments of the design.
    pub fn num_cells(&self) -> usize {
        self.m.iter().product()
    }
}

/// EGD pair design on the cells of an m_1 x ... x m_p hyper-rectangle.
///
/// Cells are labeled 1.. in lexicographic order of their coordinates (the
/// last coordinate varying fastest). The blocks are all unordered pairs of
/// cells that agree in every coordinate but one; slices along the last
/// dimension come first, then the next-to-last, down to the first, each
/// family in lexicographic order of the fixed coordinates and each slice
/// contributing its pairs in lexicographic order.
pub fn egd_design(spec: &EgdSpec) -> BlockDesign {
    let m = spec.m();
    let p = m.len();
    // stride[i]: label distance between consecutive levels of coordinate i.
    let mut stride = vec![1usize; p];
    for i in (0..p - 1).rev() {
        stride[i] = stride[i + 1] * m[i + 1];
    }

    let mut blocks = Vec::new();
    for dim in (0..p).rev() {
        // Enumerate the fixed coordinates (all but `dim`) in lex order.
        let fixed: Vec<usize> = (0..p).filter(|&i| i != dim).collect();
        let mut counters = vec![0usize; fixed.len()];
        loop {
            let base: usize = fixed
                .iter()
                .zip(&counters)
                .map(|(&i, &c)| c * stride[i])
                .sum();
            let slice: Vec<u32> = (0..m[dim])
                .map(|level| (base + level * stride[dim] + 1) as u32)
                .collect();
            for a in 0..slice.len() {
                for bb in (a + 1)..slice.len() {
                    blocks.push(vec![slice[a], slice[bb]]);
                }
            }
            // Advance the mixed-radix counter over the fixed coordinates.
            let mut pos = fixed.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                counters[pos] += 1;
                if counters[pos] < m[fixed[pos]] {
                    break;
                }
                counters[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    BlockDesign::new(blocks).expect("EGD blocks are nonempty pairs")
}

/// Square (simple) lattice: n^2 treatments arranged row-major in an n x n
/// array; the 2n blocks are the n rows followed by the n columns.
pub fn square_lattice(n: usize) -> Result<BlockDesign> {
    if n < 2 {
        return Err(Error::Usage("square_lattice requires n >= 2".into()));
    }
    let mut blocks = Vec::with_capacity(2 * n);
    for row in 0..n {
        blocks.push((1..=n).map(|c| (row * n + c) as u32).collect());
    }
    for col in 1..=n {
        blocks.push((0..n).map(|r| (r * n + col) as u32).collect());
    }
    Ok(BlockDesign::new(blocks)?)
}

/// One step of the design edit language. Block indices are 1-based and always
/// refer to the design as it stands when the edit is applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edit {
    /// Append `label` to each listed block.
    AddTreatment { label: u32, blocks: Vec<usize> },
    /// Remove every occurrence of `label`.
    DeleteTreatment { label: u32 },
    /// Append a new block with the given contents.
    AddBlock { treatments: Vec<u32> },
    /// Remove the block at `index`; later blocks shift down by one.
    DeleteBlock { index: usize },
    /// Move one occurrence of `label` from block `from` to block `to`.
    MoveTreatment { label: u32, from: usize, to: usize },
}

/// Applies edits in order. Labels are never renamed implicitly; normalize
/// separately if canonical labels are wanted. An edit that would leave an
/// empty block is rejected (delete the block explicitly instead).
pub fn modify(d: &BlockDesign, edits: &[Edit]) -> Result<BlockDesign> {
    let mut blocks: Vec<Vec<u32>> = d.blocks().to_vec();
    for edit in edits {
        match edit {
            Edit::AddTreatment { label, blocks: targets } => {
                if *label == 0 {
                    return Err(Error::Usage("treatment labels must be positive".into()));
                }
                for &idx in targets {
                    let block = block_mut(&mut blocks, idx)?;
                    block.push(*label);
                }
            }
            Edit::DeleteTreatment { label } => {
                if !blocks.iter().flatten().any(|t| t == label) {
                    return Err(Error::Usage(format!(
                        "delete_treatment: no treatment {label} in the design"
                    )));
                }
                for (j, block) in blocks.iter_mut().enumerate() {
                    block.retain(|t| t != label);
                    if block.is_empty() {
                        return Err(Error::Usage(format!(
                            "delete_treatment {label} would empty block {}; delete the block instead",
                            j + 1
                        )));
                    }
                }
            }
            Edit::AddBlock { treatments } => {
                if treatments.is_empty() {
                    return Err(Error::Usage("add_block: a block must be nonempty".into()));
                }
                if treatments.contains(&0) {
                    return Err(Error::Usage("treatment labels must be positive".into()));
                }
                blocks.push(treatments.clone());
            }
            Edit::DeleteBlock { index } => {
                block_mut(&mut blocks, *index)?;
                blocks.remove(index - 1);
                if blocks.is_empty() {
                    return Err(Error::Usage(
                        "delete_block removed the last block of the design".into(),
                    ));
                }
            }
            Edit::MoveTreatment { label, from, to } => {
                block_mut(&mut blocks, *to)?;
                let source = block_mut(&mut blocks, *from)?;
                let Some(pos) = source.iter().position(|t| t == label) else {
                    return Err(Error::Usage(format!(
                        "move_treatment: treatment {label} does not occur in block {from}"
                    )));
                };
                if source.len() == 1 {
                    return Err(Error::Usage(format!(
                        "move_treatment {label} would empty block {from}; delete the block instead"
                    )));
                }
                source.remove(pos);
                blocks[to - 1].push(*label);
            }
        }
    }
    BlockDesign::new(blocks)
}

fn block_mut(blocks: &mut [Vec<u32>], index: usize) -> Result<&mut Vec<u32>> {
    if index == 0 || index > blocks.len() {
        return Err(Error::Usage(format!(
            "block index {index} out of range 1..={}",
            blocks.len()
        )));
    }
    Ok(&mut blocks[index - 1])
}

/// Parses a line-oriented edit script. `#` starts a comment; each non-blank
/// line is one command:
///
/// ```text
/// add_treatment LABEL BLOCK [BLOCK ...]
/// delete_treatment LABEL
/// add_block LABEL [LABEL ...]
/// delete_block INDEX
/// move_treatment LABEL FROM TO
/// ```
pub fn parse_edit_script(text: &str) -> Result<Vec<Edit>> {
    let mut edits = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let line = lineno + 1;
        let parse_num = |token: &str| -> Result<usize> {
            token.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("`{token}` is not a positive integer"),
            })
        };
        let edit = match tokens[0] {
            "add_treatment" => {
                if tokens.len() < 3 {
                    return Err(Error::Parse {
                        line,
                        msg: "add_treatment needs a label and at least one block index".into(),
                    });
                }
                let label = parse_num(tokens[1])? as u32;
                let blocks = tokens[2..]
                    .iter()
                    .map(|t| parse_num(t))
                    .collect::<Result<Vec<_>>>()?;
                Edit::AddTreatment { label, blocks }
            }
            "delete_treatment" => {
                if tokens.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "delete_treatment needs exactly one label".into(),
                    });
                }
                Edit::DeleteTreatment {
                    label: parse_num(tokens[1])? as u32,
                }
            }
            "add_block" => {
                if tokens.len() < 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "add_block needs at least one label".into(),
                    });
                }
                let treatments = tokens[1..]
                    .iter()
                    .map(|t| parse_num(t).map(|x| x as u32))
                    .collect::<Result<Vec<_>>>()?;
                Edit::AddBlock { treatments }
            }
            "delete_block" => {
                if tokens.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        msg: "delete_block needs exactly one block index".into(),
                    });
                }
                Edit::DeleteBlock {
                    index: parse_num(tokens[1])?,
                }
            }
            "move_treatment" => {
                if tokens.len() != 4 {
                    return Err(Error::Parse {
                        line,
                        msg: "move_treatment needs a label, a source block and a target block"
                            .into(),
                    });
                }
                Edit::MoveTreatment {
                    label: parse_num(tokens[1])? as u32,
                    from: parse_num(tokens[2])?,
                    to: parse_num(tokens[3])?,
                }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown edit command `{other}`"),
                })
            }
        };
        edits.push(edit);
    }
    Ok(edits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FullDesignSpec;

    #[test]
    fn linked_block_smallest() {
        let d = linked_block(1, 3).unwrap();
        assert_eq!(d.blocks(), &[vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn linked_block_b6_is_the_fifteen_treatment_design() {
        let d = linked_block(1, 6).unwrap();
        assert_eq!(
            d.blocks(),
            &[
                vec![1, 2, 3, 4, 5],
                vec![1, 6, 7, 8, 9],
                vec![2, 6, 10, 11, 12],
                vec![3, 7, 10, 13, 14],
                vec![4, 8, 11, 13, 15],
                vec![5, 9, 12, 14, 15],
            ]
        );
    }

    #[test]
    fn linked_block_parameters() {
        let d = linked_block(2, 4).unwrap();
        assert_eq!(d.num_treatments(), 12);
        assert_eq!(d.num_blocks(), 4);
        assert!(d.block_sizes().iter().all(|&s| s == 6));
        assert!(d.replications().iter().all(|&r| r == 2));
        assert!(d.is_connected());

        assert!(linked_block(1, 2).is_err());
        assert!(linked_block(0, 3).is_err());
    }

    #[test]
    fn linked_block_dual_is_balanced() {
        for (lambda, b) in [(1, 4), (2, 4), (3, 5)] {
            let d = linked_block(lambda, b).unwrap();
            let dual = d.dual();
            // Every pair of the b dual treatments co-occurs lambda times.
            for x in 1..=b as u32 {
                for y in (x + 1)..=b as u32 {
                    let count: usize = dual
                        .blocks()
                        .iter()
                        .filter(|bl| bl.contains(&x) && bl.contains(&y))
                        .count();
                    assert_eq!(count, lambda, "pair ({x},{y}) in lb({lambda},{b})");
                }
            }
            // Dual information matrix (lambda b / 2)(I - J/b) for any valid k.
            let k = d.k_max() + 1;
            let spec = FullDesignSpec::new(d, k).unwrap();
            let ct = spec.info_ctilde();
            let scale = lambda as f64 * b as f64 / 2.0;
            for j in 0..b {
                for jj in 0..b {
                    let want = scale * (if j == jj { 1.0 } else { 0.0 } - 1.0 / b as f64);
                    assert!((ct.get(j, jj) - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn egd_two_by_two() {
        let spec = EgdSpec::new(vec![2, 2]).unwrap();
        let d = egd_design(&spec);
        assert_eq!(
            d.blocks(),
            &[vec![1, 2], vec![3, 4], vec![1, 3], vec![2, 4]]
        );
        // Coincides with the smallest square lattice, block for block.
        assert_eq!(d.blocks(), square_lattice(2).unwrap().blocks());
    }

    #[test]
    fn egd_two_two_three_slices() {
        let spec = EgdSpec::new(vec![2, 2, 3]).unwrap();
        let d = egd_design(&spec);
        assert_eq!(d.num_treatments(), 12);
        assert_eq!(d.num_blocks(), 24);
        let mut expect = Vec::new();
        // Slices along the last dimension: {1,2,3}+3a for a = 0..3.
        for a in 0..4u32 {
            for (x, y) in [(1, 2), (1, 3), (2, 3)] {
                expect.push(vec![x + 3 * a, y + 3 * a]);
            }
        }
        // Middle dimension: {1+a, 4+a} for a in {0,1,2,6,7,8}.
        for a in [0u32, 1, 2, 6, 7, 8] {
            expect.push(vec![1 + a, 4 + a]);
        }
        // First dimension: {1+a, 7+a} for a = 0..5.
        for a in 0..6u32 {
            expect.push(vec![1 + a, 7 + a]);
        }
        assert_eq!(d.blocks(), &expect[..]);
    }

    #[test]
    fn egd_counts_and_replication() {
        let spec = EgdSpec::new(vec![7, 3]).unwrap();
        let d = egd_design(&spec);
        assert_eq!(d.num_treatments(), 21);
        // 7 rows give C(3,2) = 3 pairs each, 3 columns give C(7,2) = 21 each:
        // 21 + 63 = 84 = 21*(7 + 3 - 2)/2.
        assert_eq!(d.num_blocks(), 84);
        assert!(d.block_sizes().iter().all(|&s| s == 2));
        // Replication = sum of (m_i - 1).
        assert!(d.replications().iter().all(|&r| r == 8));

        assert!(EgdSpec::new(vec![5]).is_err());
        assert!(EgdSpec::new(vec![2, 1]).is_err());
    }

    #[test]
    fn square_lattice_four() {
        let d = square_lattice(4).unwrap();
        assert_eq!(
            d.blocks(),
            &[
                vec![1, 2, 3, 4],
                vec![5, 6, 7, 8],
                vec![9, 10, 11, 12],
                vec![13, 14, 15, 16],
                vec![1, 5, 9, 13],
                vec![2, 6, 10, 14],
                vec![3, 7, 11, 15],
                vec![4, 8, 12, 16],
            ]
        );
    }

    #[test]
    fn square_lattice_structure() {
        let d = square_lattice(6).unwrap();
        assert_eq!(d.num_treatments(), 36);
        assert_eq!(d.num_blocks(), 12);
        // Rows partition the treatments; so do columns.
        let rows: Vec<u32> = d.blocks()[..6].iter().flatten().copied().collect();
        let cols: Vec<u32> = d.blocks()[6..].iter().flatten().copied().collect();
        for mut flat in [rows, cols] {
            flat.sort_unstable();
            assert_eq!(flat, (1..=36).collect::<Vec<u32>>());
        }
        // Any two treatments co-occur at most once.
        for x in 1..=36u32 {
            for y in (x + 1)..=36 {
                let count = d
                    .blocks()
                    .iter()
                    .filter(|bl| bl.contains(&x) && bl.contains(&y))
                    .count();
                assert!(count <= 1);
            }
        }
        assert!(square_lattice(1).is_err());
    }

    #[test]
    fn modify_trims_and_augments() {
        let lb15 = linked_block(1, 6).unwrap();
        let trimmed = modify(
            &lb15,
            &[
                Edit::DeleteTreatment { label: 1 },
                Edit::DeleteTreatment { label: 15 },
            ],
        )
        .unwrap();
        assert_eq!(trimmed.num_treatments(), 13);
        assert!(trimmed.block_sizes().iter().all(|&s| s == 4 || s == 5));

        let augmented = modify(
            &lb15,
            &[
                Edit::AddTreatment { label: 16, blocks: vec![1, 2] },
                Edit::AddTreatment { label: 17, blocks: vec![5, 6] },
            ],
        )
        .unwrap();
        assert_eq!(augmented.num_treatments(), 17);
        assert_eq!(augmented.block_sizes(), vec![6, 6, 5, 5, 6, 6]);
        assert!(augmented.replications().iter().all(|&r| r == 2));
    }

    #[test]
    fn modify_block_edits() {
        let d = egd_design(&EgdSpec::new(vec![2, 2]).unwrap());
        let extended = modify(&d, &[Edit::AddBlock { treatments: vec![1, 4] }]).unwrap();
        assert_eq!(extended.num_blocks(), 5);
        assert_eq!(extended.blocks()[4], vec![1, 4]);

        let shrunk = modify(&extended, &[Edit::DeleteBlock { index: 1 }]).unwrap();
        assert_eq!(shrunk.blocks()[0], vec![3, 4]);

        let moved = modify(
            &d,
            &[Edit::MoveTreatment { label: 2, from: 1, to: 2 }],
        )
        .unwrap();
        assert_eq!(moved.blocks()[0], vec![1]);
        assert_eq!(moved.blocks()[1], vec![2, 3, 4]);
    }

    #[test]
    fn modify_rejects_dangling_references() {
        let d = linked_block(1, 3).unwrap();
        assert!(modify(&d, &[Edit::DeleteTreatment { label: 9 }]).is_err());
        assert!(modify(&d, &[Edit::AddTreatment { label: 4, blocks: vec![7] }]).is_err());
        assert!(modify(&d, &[Edit::DeleteBlock { index: 0 }]).is_err());
        assert!(modify(&d, &[Edit::MoveTreatment { label: 1, from: 3, to: 1 }]).is_err());
        // Emptying a block is refused.
        let tiny = BlockDesign::new(vec![vec![1], vec![1, 2, 2]]).unwrap();
        assert!(modify(&tiny, &[Edit::DeleteTreatment { label: 1 }]).is_err());
        assert!(modify(&tiny, &[Edit::MoveTreatment { label: 1, from: 1, to: 2 }]).is_err());
    }

    #[test]
    fn edit_script_round_trip() {
        let script = "\
# thin out, then extend
delete_treatment 15
add_treatment 16 1 2
add_block 3 9
delete_block 4
move_treatment 16 1 3
";
        let edits = parse_edit_script(script).unwrap();
        assert_eq!(
            edits,
            vec![
                Edit::DeleteTreatment { label: 15 },
                Edit::AddTreatment { label: 16, blocks: vec![1, 2] },
                Edit::AddBlock { treatments: vec![3, 9] },
                Edit::DeleteBlock { index: 4 },
                Edit::MoveTreatment { label: 16, from: 1, to: 3 },
            ]
        );

        match parse_edit_script("add_treatment 4\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_edit_script("delete_treatment 1\nshuffle 2\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
