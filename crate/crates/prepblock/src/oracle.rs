//! Independent verification path for every criterion formula: pairwise BLUE
//! variances computed directly from the full design's own information matrix
//! (nothing shared with the subdesign reductions), the closed-form per-pair
//! predictions they are checked against, and a seeded generator of random
//! valid specs for fuzzing the equivalence.

use rand::Rng;
use serde::Serialize;

use crate::criteria::{self, MvComponent};
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::model::{BlockDesign, FullDesignSpec};

/// Information matrix of a constant-block-size design, computed from first
/// principles: the replication diagonal minus the treatment concurrence
/// matrix divided by the common block size. Rows and columns sum to zero.
pub fn full_info_c0(d0: &BlockDesign, k: usize) -> Result<SymMatrix> {
    if let Some(bad) = d0.blocks().iter().find(|blk| blk.len() != k) {
        return Err(Error::Usage(format!(
            "the oracle handles constant block size only: expected every block \
             to have size {k}, found one of size {}",
            bad.len()
        )));
    }
    let n = d0.incidence();
    let reps = d0.replications();
    let v = d0.num_treatments();
    let b = d0.num_blocks();
    Ok(SymMatrix::from_fn(v, |i, j| {
        let conc: u32 = (0..b).map(|l| n[i][l] * n[j][l]).sum();
        let r = if i == j { reps[i] as f64 } else { 0.0 };
        r - conc as f64 / k as f64
    }))
}

/// Pairwise BLUE variance matrix of a connected constant-block-size design:
/// entry (t, t') is the variance of the estimated contrast between
/// treatments t+1 and t'+1, in units of the plot variance. Symmetric with
/// zero diagonal.
pub fn oracle_variances(d0: &BlockDesign, k: usize) -> Result<SymMatrix> {
    if !d0.is_connected() {
        return Err(Error::Usage(
            "pairwise variances need a connected design".into(),
        ));
    }
    let p = linalg::pinv_default(&full_info_c0(d0, k)?)?;
    let v = d0.num_treatments();
    Ok(SymMatrix::from_fn(v, |i, j| {
        if i == j {
            0.0
        } else {
            p.get(i, i) + p.get(j, j) - 2.0 * p.get(i, j)
        }
    }))
}

/// The same variance matrix predicted by the closed per-pair forms driven by
/// the subdesign alone: twice-replicated pairs through the subdesign's
/// information matrix, singly replicated pairs through the dual's (same
/// block: exactly 2; different blocks: 2 plus a dual quadratic form), and
/// mixed pairs through 3/2 plus a dual quadratic form.
///
/// Treatment labels match `FullDesignSpec::full_design`: 1..=u are the
/// twice-replicated treatments, u+1..=v the singly replicated ones in block
/// order.
pub fn predicted_variances(spec: &FullDesignSpec) -> Result<SymMatrix> {
    let (u, v, b) = (spec.u(), spec.v(), spec.b());
    let c_plus = linalg::pinv_default(&spec.info_c())?;
    let m = linalg::pinv_default(&spec.info_ctilde())?;
    let n = spec.sub().incidence();
    let w_block = spec.w_blocks();

    // Per twice-replicated treatment i: the row n_i M and the quadratic form
    // n_i M n_i', reused across all mixed pairs involving i.
    let mut ni_m = vec![vec![0.0f64; b]; u];
    let mut self_quad = vec![0.0f64; u];
    for i in 0..u {
        for j in 0..b {
            ni_m[i][j] = (0..b).map(|l| n[i][l] as f64 * m.get(l, j)).sum();
        }
        self_quad[i] = (0..b).map(|l| n[i][l] as f64 * ni_m[i][l]).sum();
    }

    let mut out = SymMatrix::zeros(v);
    for i in 0..v {
        for ii in (i + 1)..v {
            let var = match (i < u, ii < u) {
                (true, true) => {
                    c_plus.get(i, i) + c_plus.get(ii, ii) - 2.0 * c_plus.get(i, ii)
                }
                (true, false) => {
                    let j = w_block[ii - u];
                    1.5 + m.get(j, j) - ni_m[i][j] + 0.25 * self_quad[i]
                }
                (false, false) => {
                    let j = w_block[i - u];
                    let jj = w_block[ii - u];
                    if j == jj {
                        2.0
                    } else {
                        2.0 + m.get(j, j) + m.get(jj, jj) - 2.0 * m.get(j, jj)
                    }
                }
                (false, true) => unreachable!("ii > i"),
            };
            out.set(i, ii, var);
        }
    }
    Ok(out)
}

/// Criterion values recomputed from the oracle's variance matrix alone:
/// category sums and maxima over the explicit pair partition.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub v: usize,
    pub a_total: f64,
    pub a_uu: f64,
    pub a_ww: f64,
    pub a_uw: f64,
    pub mv_total: f64,
    pub mv_uu: f64,
    pub mv_ww: Option<f64>,
    pub mv_uw: f64,
    pub mv_component: MvComponent,
}

/// Summarizes the oracle's variance matrix for a spec's full design.
pub fn oracle_report(spec: &FullDesignSpec) -> Result<OracleReport> {
    let (u, v) = (spec.u(), spec.v());
    let vars = oracle_variances(&spec.full_design(), spec.k())?;

    let (mut a_uu, mut a_ww, mut a_uw) = (0.0, 0.0, 0.0);
    let mut mv_uu = f64::NEG_INFINITY;
    let mut mv_ww = f64::NEG_INFINITY;
    let mut mv_uw = f64::NEG_INFINITY;
    for i in 0..v {
        for ii in (i + 1)..v {
            let x = vars.get(i, ii);
            match (i < u, ii < u) {
                (true, true) => {
                    a_uu += x;
                    mv_uu = mv_uu.max(x);
                }
                (false, false) => {
                    a_ww += x;
                    mv_ww = mv_ww.max(x);
                }
                _ => {
                    a_uw += x;
                    mv_uw = mv_uw.max(x);
                }
            }
        }
    }
    let mv_ww = (spec.w() >= 2).then_some(mv_ww);
    let mut mv_total = mv_uu;
    let mut mv_component = MvComponent::Uu;
    if let Some(x) = mv_ww {
        if x > mv_total {
            mv_total = x;
            mv_component = MvComponent::Ww;
        }
    }
    if mv_uw > mv_total {
        mv_total = mv_uw;
        mv_component = MvComponent::Uw;
    }
    Ok(OracleReport {
        v,
        a_total: a_uu + a_ww + a_uw,
        a_uu,
        a_ww,
        a_uw,
        mv_total,
        mv_uu,
        mv_ww,
        mv_uw,
        mv_component,
    })
}

/// Cross-check of the reduction formulas against the oracle for one spec:
/// the largest entrywise gap between predicted and direct variance matrices,
/// and the criterion-level gaps.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub max_variance_discrepancy: f64,
    pub a_total_formula: f64,
    pub a_total_oracle: f64,
    pub a_component_discrepancy: f64,
    pub mv_total_formula: f64,
    pub mv_total_oracle: f64,
    /// True when every discrepancy is at most 1e-6.
    pub ok: bool,
}

pub fn check_spec(spec: &FullDesignSpec) -> Result<CheckReport> {
    let predicted = predicted_variances(spec)?;
    let direct = oracle_variances(&spec.full_design(), spec.k())?;
    let v = spec.v();
    let mut max_gap = 0.0f64;
    for i in 0..v {
        for ii in (i + 1)..v {
            max_gap = max_gap.max((predicted.get(i, ii) - direct.get(i, ii)).abs());
        }
    }
    let a = criteria::a_value(spec)?;
    let mv = criteria::mv_value(spec)?;
    let report = oracle_report(spec)?;
    let a_component_discrepancy = (a.uu - report.a_uu)
        .abs()
        .max((a.ww - report.a_ww).abs())
        .max((a.uw - report.a_uw).abs());
    let ok = max_gap <= 1e-6
        && (a.total - report.a_total).abs() <= 1e-6 * report.a_total.abs().max(1.0)
        && a_component_discrepancy <= 1e-6 * report.a_total.abs().max(1.0)
        && (mv.total - report.mv_total).abs() <= 1e-6;
    Ok(CheckReport {
        max_variance_discrepancy: max_gap,
        a_total_formula: a.total,
        a_total_oracle: report.a_total,
        a_component_discrepancy,
        mv_total_formula: mv.total,
        mv_total_oracle: report.mv_total,
        ok,
    })
}

/// Draws a random valid spec for fuzzing: b in [3,6] blocks, u in [b-1,12]
/// twice-replicated treatments. The subdesign is built as a random connected
/// multigraph dual (spanning tree plus extra edges; occasionally a treatment
/// lands twice in one block, exercising non-binary designs), then a feasible
/// k in [k_max+1, 12] is chosen. Draws that cannot fit k <= 12 are rejected
/// and retried.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R) -> FullDesignSpec {
    loop {
        let b: usize = rng.random_range(3..=6);
        let u: usize = rng.random_range((b - 1)..=12);
        let mut blocks: Vec<Vec<u32>> = vec![Vec::new(); b];
        let mut t: u32 = 1;
        for j in 1..b {
            let other = rng.random_range(0..j);
            blocks[j].push(t);
            blocks[other].push(t);
            t += 1;
        }
        for _ in 0..(u - (b - 1)) {
            let j = rng.random_range(0..b);
            if rng.random_bool(0.1) {
                blocks[j].push(t);
                blocks[j].push(t);
            } else {
                let jj = loop {
                    let x = rng.random_range(0..b);
                    if x != j {
                        break x;
                    }
                };
                blocks[j].push(t);
                blocks[jj].push(t);
            }
            t += 1;
        }
        let d = BlockDesign::new(blocks).expect("every block holds at least one treatment");
        if d.k_max() + 1 > 12 {
            continue;
        }
        let k = rng.random_range((d.k_max() + 1)..=12);
        if let Ok(spec) = FullDesignSpec::new(d, k) {
            return spec;
        }
    }
}
