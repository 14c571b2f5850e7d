//! Block-design data model: incidence, duals, connectivity, validation of
//! two-replicate subdesigns, full-design assembly, and the information
//! matrices of a subdesign and its dual.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// A block design: an ordered list of blocks, each a multiset of positive
/// treatment labels. The treatment universe is exactly the set of labels that
/// occur. Serves as the subdesign `d`, its dual, and the full design alike.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct BlockDesign {
    /// Each block sorted ascending; duplicates encode multiplicity.
    blocks: Vec<Vec<u32>>,
    /// Sorted distinct labels.
    treatments: Vec<u32>,
}

impl BlockDesign {
    /// Builds a design from raw blocks. Rejects an empty design, empty
    /// blocks, and zero labels. Block contents are stored sorted.
    pub fn new(blocks: Vec<Vec<u32>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Usage("design has no blocks".into()));
        }
        let mut sorted_blocks = Vec::with_capacity(blocks.len());
        for (idx, block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Usage(format!("block {} is empty", idx + 1)));
            }
            if block.contains(&0) {
                return Err(Error::Usage(format!(
                    "block {} contains label 0; labels must be positive",
                    idx + 1
                )));
            }
            let mut b = block;
            b.sort_unstable();
            sorted_blocks.push(b);
        }
        let mut treatments: Vec<u32> = sorted_blocks.iter().flatten().copied().collect();
        treatments.sort_unstable();
        treatments.dedup();
        Ok(BlockDesign {
            blocks: sorted_blocks,
            treatments,
        })
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Sorted distinct treatment labels.
    pub fn treatments(&self) -> &[u32] {
        &self.treatments
    }

    pub fn num_treatments(&self) -> usize {
        self.treatments.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    pub fn k_max(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).max().unwrap()
    }

    pub fn has_constant_block_size(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == self.blocks[0].len())
    }

    /// Number of plots carrying `label` across all blocks.
    pub fn replication(&self, label: u32) -> usize {
        self.blocks
            .iter()
            .map(|b| b.iter().filter(|&&t| t == label).count())
            .sum()
    }

    /// Replication numbers aligned with `treatments()`.
    pub fn replications(&self) -> Vec<usize> {
        let index: HashMap<u32, usize> = self
            .treatments
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i))
            .collect();
        let mut reps = vec![0usize; self.treatments.len()];
        for block in &self.blocks {
            for t in block {
                reps[index[t]] += 1;
            }
        }
        reps
    }

    /// True when no treatment occurs more than once in any block.
    pub fn is_binary(&self) -> bool {
        self.blocks.iter().all(|b| b.windows(2).all(|w| w[0] != w[1]))
    }

    /// Incidence matrix: rows follow `treatments()` order, columns follow
    /// block order, entry = multiplicity.
    pub fn incidence(&self) -> Vec<Vec<u32>> {
        let index: HashMap<u32, usize> = self
            .treatments
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i))
            .collect();
        let mut n = vec![vec![0u32; self.blocks.len()]; self.treatments.len()];
        for (j, block) in self.blocks.iter().enumerate() {
            for t in block {
                n[index[t]][j] += 1;
            }
        }
        n
    }

    /// The design with transposed incidence: one block per treatment of
    /// `self` (in `treatments()` order) listing the 1-based indices of the
    /// blocks that treatment occupies, with multiplicity.
    pub fn dual(&self) -> BlockDesign {
        let index: HashMap<u32, usize> = self
            .treatments
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i))
            .collect();
        let mut dual_blocks = vec![Vec::new(); self.treatments.len()];
        for (j, block) in self.blocks.iter().enumerate() {
            for t in block {
                dual_blocks[index[t]].push((j + 1) as u32);
            }
        }
        BlockDesign::new(dual_blocks).expect("dual of a valid design is valid")
    }

    /// Connectivity of the treatment-block bipartite graph.
    pub fn is_connected(&self) -> bool {
        let index: HashMap<u32, usize> = self
            .treatments
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, i))
            .collect();
        // Vertices: blocks 0..b, then treatments b..b+t.
        let b = self.blocks.len();
        let total = b + self.treatments.len();
        let mut seen = vec![false; total];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut blocks_of: Vec<Vec<usize>> = vec![Vec::new(); self.treatments.len()];
        for (j, block) in self.blocks.iter().enumerate() {
            for t in block {
                blocks_of[index[t]].push(j);
            }
        }
        while let Some(vertex) = stack.pop() {
            if vertex < b {
                for t in &self.blocks[vertex] {
                    let ti = b + index[t];
                    if !seen[ti] {
                        seen[ti] = true;
                        stack.push(ti);
                    }
                }
            } else {
                for &j in &blocks_of[vertex - b] {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Monotone relabeling: the sorted distinct labels become 1..t. The
    /// incidence matrix is unchanged because its rows already follow sorted
    /// label order.
    pub fn normalize(&self) -> BlockDesign {
        let map: HashMap<u32, u32> = self
            .treatments
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, (i + 1) as u32))
            .collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|t| map[t]).collect())
            .collect();
        BlockDesign::new(blocks).expect("relabeling preserves validity")
    }

    /// Parses the `.blocks` text format: `#` starts a comment, each
    /// non-blank line is one block of whitespace-separated positive integers,
    /// repetition encodes multiplicity.
    ///
    /// The parsed design always has treatments exactly 1..t: labels that
    /// already form that set are kept as written, anything else is relabeled
    /// to 1..t in first-occurrence order of the raw tokens.
    pub fn parse(text: &str) -> Result<BlockDesign> {
        let mut raw_blocks: Vec<(usize, Vec<u32>)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            let mut block = Vec::new();
            for token in line.split_whitespace() {
                let label: u32 = token.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("`{token}` is not a positive integer"),
                })?;
                if label == 0 {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        msg: "treatment labels must be positive".into(),
                    });
                }
                block.push(label);
            }
            if !block.is_empty() {
                raw_blocks.push((lineno + 1, block));
            }
        }
        if raw_blocks.is_empty() {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: "no blocks found".into(),
            });
        }
        let mut distinct: Vec<u32> = raw_blocks.iter().flat_map(|(_, b)| b).copied().collect();
        distinct.sort_unstable();
        distinct.dedup();
        let already_canonical = distinct
            .iter()
            .enumerate()
            .all(|(i, &t)| t == (i + 1) as u32);
        if already_canonical {
            return BlockDesign::new(raw_blocks.into_iter().map(|(_, b)| b).collect());
        }
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut next = 1u32;
        for (_, block) in &raw_blocks {
            for &t in block {
                map.entry(t).or_insert_with(|| {
                    let id = next;
                    next += 1;
                    id
                });
            }
        }
        BlockDesign::new(
            raw_blocks
                .into_iter()
                .map(|(_, block)| block.into_iter().map(|t| map[&t]).collect())
                .collect(),
        )
    }

    /// Renders the design in the `.blocks` format: one line per block.
    pub fn to_blocks_string(&self) -> String {
        let mut out = String::new();
        for block in &self.blocks {
            let line: Vec<String> = block.iter().map(|t| t.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// One violated requirement of a two-replicate subdesign paired with a block
/// size `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecViolation {
    /// Treatment `label` occurs `replication` times instead of twice.
    NotTwiceReplicated { label: u32, replication: usize },
    /// Fewer twice-replicated treatments than blocks minus one.
    TooFewTreatments { u: usize, b: usize },
    /// Block `index` (1-based) has more plots than the full design allows.
    OversizedBlock { index: usize, size: usize, k: usize },
    /// The full design would have no singly replicated treatments.
    NoSinglyReplicated { w: i64 },
    /// The treatment-block bipartite graph is disconnected.
    Disconnected,
}

impl fmt::Display for SpecViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecViolation::NotTwiceReplicated { label, replication } => write!(
                f,
                "treatment {label} is replicated {replication} times; every treatment of the subdesign must appear exactly twice"
            ),
            SpecViolation::TooFewTreatments { u, b } => {
                write!(f, "u = {u} treatments but {b} blocks; u >= b - 1 is required for connectivity")
            }
            SpecViolation::OversizedBlock { index, size, k } => {
                write!(f, "block {index} has size {size} > k = {k}")
            }
            SpecViolation::NoSinglyReplicated { w } => {
                write!(f, "w = b*k - 2u = {w}; at least one singly replicated treatment is required")
            }
            SpecViolation::Disconnected => write!(f, "subdesign is disconnected"),
        }
    }
}

/// Outcome of checking a (subdesign, k) pair, with the derived parameters
/// reported even when validation fails.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<SpecViolation>,
    /// Number of distinct treatments of the subdesign.
    pub u: usize,
    /// Number of blocks.
    pub b: usize,
    /// Requested full-design block size.
    pub k: usize,
    /// Singly replicated count b*k - 2u (may be negative when invalid).
    pub w: i64,
    /// Total treatments of the full design, u + w.
    pub v: i64,
    /// Fraction of singly replicated treatments, w/v.
    pub f: f64,
    /// Per-block counts of singly replicated treatments, k - |block j|.
    pub s: Vec<i64>,
    /// Whether the subdesign (equivalently the full design) is binary.
    pub binary: bool,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "valid: {}  (u={}, b={}, k={}, w={}, v={}, f={:.4}, binary={})",
            self.valid, self.u, self.b, self.k, self.w, self.v, self.f, self.binary
        )?;
        let s: Vec<String> = self.s.iter().map(|x| x.to_string()).collect();
        writeln!(f, "s = ({})", s.join(", "))?;
        for violation in &self.violations {
            writeln!(f, "  - {violation}")?;
        }
        Ok(())
    }
}

/// Checks every requirement on a (subdesign, k) pair and reports the derived
/// parameters alongside any violations.
pub fn validate_design(sub: &BlockDesign, k: usize) -> ValidationReport {
    let u = sub.num_treatments();
    let b = sub.num_blocks();
    let w = (b * k) as i64 - 2 * u as i64;
    let v = u as i64 + w;
    let f = if v > 0 { w as f64 / v as f64 } else { f64::NAN };
    let s: Vec<i64> = sub.blocks().iter().map(|bl| k as i64 - bl.len() as i64).collect();

    let mut violations = Vec::new();
    let reps = sub.replications();
    for (i, &r) in reps.iter().enumerate() {
        if r != 2 {
            violations.push(SpecViolation::NotTwiceReplicated {
                label: sub.treatments()[i],
                replication: r,
            });
        }
    }
    if u + 1 < b {
        violations.push(SpecViolation::TooFewTreatments { u, b });
    }
    for (j, block) in sub.blocks().iter().enumerate() {
        if block.len() > k {
            violations.push(SpecViolation::OversizedBlock {
                index: j + 1,
                size: block.len(),
                k,
            });
        }
    }
    if w < 1 {
        violations.push(SpecViolation::NoSinglyReplicated { w });
    }
    if !sub.is_connected() {
        violations.push(SpecViolation::Disconnected);
    }

    ValidationReport {
        valid: violations.is_empty(),
        violations,
        u,
        b,
        k,
        w,
        v,
        f,
        s,
        binary: sub.is_binary(),
    }
}

/// A validated subdesign `d` together with the common block size `k` of the
/// full design. Fixes u, b, w, the s vector and the full design up to the
/// naming of the singly replicated treatments.
///
/// The subdesign is normalized on construction so its treatments are exactly
/// 1..u; the fresh singly replicated labels are then u+1..u+w.
#[derive(Debug, Clone)]
pub struct FullDesignSpec {
    sub: BlockDesign,
    k: usize,
    s: Vec<usize>,
    w: usize,
}

impl FullDesignSpec {
    /// Validates the pair; on failure the error carries the full report.
    pub fn new(sub: BlockDesign, k: usize) -> Result<FullDesignSpec> {
        let report = validate_design(&sub, k);
        if !report.valid {
            return Err(Error::InvalidSpec(report));
        }
        let sub = sub.normalize();
        let s = sub.blocks().iter().map(|b| k - b.len()).collect();
        let w = report.w as usize;
        Ok(FullDesignSpec { sub, k, s, w })
    }

    pub fn sub(&self) -> &BlockDesign {
        &self.sub
    }

    /// Consumes the spec, returning the subdesign.
    pub fn into_sub(self) -> BlockDesign {
        self.sub
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn u(&self) -> usize {
        self.sub.num_treatments()
    }

    pub fn b(&self) -> usize {
        self.sub.num_blocks()
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn v(&self) -> usize {
        self.u() + self.w
    }

    /// Fraction of singly replicated treatments, w/v.
    pub fn f(&self) -> f64 {
        self.w as f64 / self.v() as f64
    }

    /// Per-block counts of singly replicated treatments.
    pub fn s(&self) -> &[usize] {
        &self.s
    }

    /// 0-based block index that each singly replicated treatment u+1..u+w
    /// lands in, following the block-order label assignment.
    pub fn w_blocks(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.w);
        for (j, &sj) in self.s.iter().enumerate() {
            out.extend(std::iter::repeat(j).take(sj));
        }
        out
    }

    /// Information matrix of the subdesign: C = 2I - N (kI - S)^{-1} N'.
    pub fn info_c(&self) -> SymMatrix {
        let n = self.sub.incidence();
        let sizes: Vec<f64> = self.sub.blocks().iter().map(|b| b.len() as f64).collect();
        let u = self.u();
        SymMatrix::from_fn(u, |i, ii| {
            let cross: f64 = (0..self.b())
                .map(|j| n[i][j] as f64 * n[ii][j] as f64 / sizes[j])
                .sum();
            if i == ii {
                2.0 - cross
            } else {
                -cross
            }
        })
    }

    /// Information matrix of the dual: C~ = kI - S - (1/2) N'N.
    pub fn info_ctilde(&self) -> SymMatrix {
        let n = self.sub.incidence();
        let b = self.b();
        let u = self.u();
        SymMatrix::from_fn(b, |j, jj| {
            let cross: f64 = (0..u).map(|i| n[i][j] as f64 * n[i][jj] as f64).sum();
            let diag = if j == jj {
                (self.k - self.s[j]) as f64
            } else {
                0.0
            };
            diag - 0.5 * cross
        })
    }

    /// The full design: block j is block j of the subdesign plus s_j fresh
    /// singly replicated labels, assigned in block order as u+1..u+w.
    pub fn full_design(&self) -> BlockDesign {
        let u = self.u() as u32;
        let mut next = u + 1;
        let blocks = self
            .sub
            .blocks()
            .iter()
            .zip(&self.s)
            .map(|(block, &sj)| {
                let mut full = block.clone();
                for _ in 0..sj {
                    full.push(next);
                    next += 1;
                }
                full
            })
            .collect();
        BlockDesign::new(blocks).expect("full design of a valid spec is valid")
    }
}

/// Generic intrablock information matrix R - N K^{-1} N' of any block design,
/// with R the replication diagonal and K the block-size diagonal. Rows and
/// columns follow `treatments()` order.
pub fn c_matrix(d: &BlockDesign) -> SymMatrix {
    let n = d.incidence();
    let reps = d.replications();
    let sizes: Vec<f64> = d.blocks().iter().map(|b| b.len() as f64).collect();
    let t = d.num_treatments();
    SymMatrix::from_fn(t, |i, ii| {
        let cross: f64 = (0..d.num_blocks())
            .map(|j| n[i][j] as f64 * n[ii][j] as f64 / sizes[j])
            .sum();
        let diag = if i == ii { reps[i] as f64 } else { 0.0 };
        diag - cross
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, eigen_sym};

    fn lb13() -> BlockDesign {
        BlockDesign::new(vec![vec![1, 2], vec![1, 3], vec![2, 3]]).unwrap()
    }

    #[test]
    fn incidence_basics() {
        let d = BlockDesign::new(vec![vec![1, 2], vec![1, 2]]).unwrap();
        assert_eq!(d.incidence(), vec![vec![1, 1], vec![1, 1]]);

        let m = BlockDesign::new(vec![vec![1, 1]]).unwrap();
        assert_eq!(m.incidence(), vec![vec![2]]);
        assert!(!m.is_binary());

        let lb = lb13();
        let n = lb.incidence();
        for row in &n {
            assert_eq!(row.iter().sum::<u32>(), 2);
        }
        for j in 0..3 {
            assert_eq!(n.iter().map(|r| r[j]).sum::<u32>(), 2);
        }
    }

    #[test]
    fn construction_rejects_bad_blocks() {
        assert!(BlockDesign::new(vec![]).is_err());
        assert!(BlockDesign::new(vec![vec![]]).is_err());
        assert!(BlockDesign::new(vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn dual_transposes_incidence() {
        let d = BlockDesign::new(vec![vec![1, 2], vec![1, 2]]).unwrap();
        assert_eq!(d.dual().blocks(), d.blocks());

        let lb = lb13();
        let dual = lb.dual();
        // Dual of the smallest linked block design: all pairs {j, j*}.
        assert_eq!(
            dual.blocks(),
            &[vec![1, 2], vec![1, 3], vec![2, 3]]
        );

        let n = lb.incidence();
        let nd = dual.incidence();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(n[i][j], nd[j][i]);
            }
        }
    }

    #[test]
    fn dual_involution_restores_incidence() {
        for d in [
            lb13(),
            BlockDesign::new(vec![vec![4, 9], vec![4, 7, 7], vec![9, 2]]).unwrap(),
        ] {
            assert_eq!(d.dual().dual().incidence(), d.incidence());
        }
    }

    #[test]
    fn connectivity() {
        assert!(BlockDesign::new(vec![vec![1, 2], vec![2, 3]]).unwrap().is_connected());
        assert!(!BlockDesign::new(vec![vec![1, 2], vec![3, 4]]).unwrap().is_connected());
    }

    #[test]
    fn validation_of_smallest_linked_block() {
        let report = validate_design(&lb13(), 3);
        assert!(report.valid);
        assert_eq!((report.u, report.b, report.w), (3, 3, 3));
        assert_eq!(report.s, vec![1, 1, 1]);
        assert!(report.binary);

        // k = 2 leaves no room for singly replicated treatments.
        let report = validate_design(&lb13(), 2);
        assert!(!report.valid);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SpecViolation::NoSinglyReplicated { w: 0 })));
    }

    #[test]
    fn validation_flags_each_violation() {
        // treatment 3 once, treatment 1 three times, disconnected pieces.
        let d = BlockDesign::new(vec![vec![1, 1], vec![1, 2], vec![2, 3, 4, 4]]).unwrap();
        let report = validate_design(&d, 3);
        assert!(!report.valid);
        assert!(report.violations.iter().any(
            |v| matches!(v, SpecViolation::NotTwiceReplicated { label: 3, replication: 1 })
        ));
        assert!(report.violations.iter().any(
            |v| matches!(v, SpecViolation::NotTwiceReplicated { label: 1, replication: 3 })
        ));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, SpecViolation::OversizedBlock { index: 3, size: 4, k: 3 })));

        let split = BlockDesign::new(vec![vec![1, 2], vec![1, 2], vec![3, 4], vec![3, 4]]).unwrap();
        let report = validate_design(&split, 3);
        assert!(report.violations.contains(&SpecViolation::Disconnected));
    }

    #[test]
    fn spec_normalizes_labels() {
        let d = BlockDesign::new(vec![vec![10, 30], vec![10, 50], vec![30, 50]]).unwrap();
        let spec = FullDesignSpec::new(d, 3).unwrap();
        assert_eq!(spec.sub().treatments(), &[1, 2, 3]);
        assert_eq!(spec.sub().blocks(), lb13().blocks());
    }

    #[test]
    fn info_matrices_of_smallest_linked_block() {
        let spec = FullDesignSpec::new(lb13(), 3).unwrap();

        // C~ = (3/2)(I - J/3)
        let ct = spec.info_ctilde();
        for j in 0..3 {
            for jj in 0..3 {
                let want = if j == jj { 1.0 } else { -0.5 };
                assert!((ct.get(j, jj) - want).abs() < 1e-12);
            }
        }

        // C has eigenvalues 3/2, 3/2, 0 and zero row sums.
        let c = spec.info_c();
        for i in 0..3 {
            let row_sum: f64 = (0..3).map(|j| c.get(i, j)).sum();
            assert!(row_sum.abs() < 1e-10);
        }
        let eig = eigen_sym(&c).unwrap();
        assert!((eig.values[0] - 1.5).abs() < 1e-10);
        assert!((eig.values[1] - 1.5).abs() < 1e-10);
        assert!(eig.values[2].abs() < 1e-10);
    }

    #[test]
    fn full_design_assembly() {
        let spec = FullDesignSpec::new(lb13(), 3).unwrap();
        let d0 = spec.full_design();
        assert_eq!(
            d0.blocks(),
            &[vec![1, 2, 4], vec![1, 3, 5], vec![2, 3, 6]]
        );
        let reps = d0.replications();
        assert_eq!(reps, vec![2, 2, 2, 1, 1, 1]);
        assert!(d0.is_connected());
        assert_eq!(spec.w_blocks(), vec![0, 1, 2]);
    }

    #[test]
    fn trace_bounds_and_dual_rank() {
        let designs = [
            lb13(),
            BlockDesign::new(vec![vec![1, 2, 3], vec![1, 4], vec![2, 4], vec![3]]).unwrap(),
            BlockDesign::new(vec![vec![1, 1], vec![2, 3], vec![2, 3]]).unwrap(),
        ];
        for d in designs {
            let k = d.k_max() + 2;
            let Ok(spec) = FullDesignSpec::new(d, k) else {
                continue;
            };
            let (u, b) = (spec.u() as f64, spec.b() as f64);
            let c = spec.info_c();
            assert!(c.trace() <= 2.0 * u - b + 1e-10);
            let ct = spec.info_ctilde();
            assert!(ct.trace() <= u + 1e-10);
            if spec.sub().is_binary() {
                assert!((ct.trace() - u).abs() < 1e-10);
            } else {
                assert!(ct.trace() < u - 1e-10);
            }
            assert_eq!(linalg::rank(&ct, 1e-9).unwrap(), spec.b() - 1);
        }
    }

    #[test]
    fn generic_c_matrix_matches_spec_matrices() {
        // For the subdesign itself (all replications 2), c_matrix must agree
        // with info_c; for a size-2-block design it is the half-Laplacian.
        let spec = FullDesignSpec::new(lb13(), 3).unwrap();
        let generic = c_matrix(spec.sub());
        let c = spec.info_c();
        for i in 0..3 {
            for j in 0..3 {
                assert!((generic.get(i, j) - c.get(i, j)).abs() < 1e-12);
            }
        }

        let pairs = BlockDesign::new(vec![vec![1, 2], vec![1, 2], vec![2, 3]]).unwrap();
        let cm = c_matrix(&pairs);
        // Multigraph Laplacian / 2: degrees (2, 3, 1).
        assert!((cm.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((cm.get(1, 1) - 1.5).abs() < 1e-12);
        assert!((cm.get(2, 2) - 0.5).abs() < 1e-12);
        assert!((cm.get(0, 1) + 1.0).abs() < 1e-12);
        assert!((cm.get(1, 2) + 0.5).abs() < 1e-12);
        assert!((cm.get(0, 2) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn parse_and_render() {
        let text = "# comment line\n1 2   # trailing comment\n\n1 3\n2 3\n";
        let d = BlockDesign::parse(text).unwrap();
        assert_eq!(d.blocks(), lb13().blocks());
        assert_eq!(d.to_blocks_string(), "1 2\n1 3\n2 3\n");

        // Multiplicity by repetition.
        let m = BlockDesign::parse("4 4\n4 5").unwrap();
        assert_eq!(m.blocks(), &[vec![1, 1], vec![1, 2]]);

        // Non-canonical labels normalize in first-occurrence order of the
        // raw tokens; a file already labeled 1..t is kept as written.
        let n = BlockDesign::parse("7 3\n3 9\n9 7").unwrap();
        assert_eq!(n.blocks(), &[vec![1, 2], vec![2, 3], vec![1, 3]]);
        let canonical = BlockDesign::parse("2 1 3\n3 1 2").unwrap();
        assert_eq!(canonical.blocks(), &[vec![1, 2, 3], vec![1, 2, 3]]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match BlockDesign::parse("1 2\nx 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        match BlockDesign::parse("1 2\n2 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(BlockDesign::parse("# only comments\n").is_err());
    }
}
