//! Criterion values for full designs built from a two-replicate subdesign:
//! the A-criterion and its decomposition, the MV-criterion and its pieces,
//! the restricted A1/A2 criteria, the design-independent lower bounds with
//! their applicability thresholds, and the resulting efficiencies.
//!
//! Everything here is driven by the subdesign alone: the variance totals over
//! all v(v-1)/2 pairwise contrasts of the full design reduce to traces and
//! quadratic forms of the subdesign's information matrix C and its dual's
//! matrix C~, which stay small even when the full design is large.

use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix, DEFAULT_PINV_TOL};
use crate::model::{c_matrix, BlockDesign, FullDesignSpec};

/// A-criterion total and its decomposition by contrast type: pairs within
/// the twice-replicated set U, pairs within the singly replicated set W, and
/// mixed pairs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AValue {
    pub total: f64,
    pub uu: f64,
    pub ww: f64,
    pub uw: f64,
}

/// Sum of BLUE variances over all pairwise contrasts of the full design,
/// with the U-U / W-W / U-W split. The three components sum to the total.
pub fn a_value(spec: &FullDesignSpec) -> Result<AValue> {
    let (u, b, k, w) = dims(spec);
    let tr_c_plus = linalg::trace_pinv(&spec.info_c(), DEFAULT_PINV_TOL)?;
    let ct_plus = linalg::pinv_default(&spec.info_ctilde())?;
    let s: Vec<f64> = spec.s().iter().map(|&x| x as f64).collect();

    let tr_ct_plus = ct_plus.trace();
    let tr_ct_plus_s: f64 = (0..spec.b()).map(|j| s[j] * ct_plus.get(j, j)).sum();
    let s_quad = linalg::quad_form(&ct_plus, &s)?;

    let total = 0.5 * w * (3.0 * u + 2.0 * w - b - 1.0)
        + u * tr_c_plus
        + 0.5 * k * (w * tr_ct_plus + b * tr_ct_plus_s);
    let uu = u * tr_c_plus;
    let ww = w * (w - 1.0) + w * tr_ct_plus_s - s_quad;
    let uw = 1.5 * u * w - 0.5 * w * (b - 1.0)
        + (u - 0.5 * w) * tr_ct_plus_s
        + s_quad
        + 0.5 * w * k * tr_ct_plus;
    Ok(AValue { total, uu, ww, uw })
}

/// Design-independent lower bound on the A-criterion total over all
/// connected full designs with the given u, b, k.
pub fn a_bound(u: usize, b: usize, k: usize) -> Result<f64> {
    if b < 3 {
        return Err(Error::Usage(format!("a_bound requires b >= 3, got b = {b}")));
    }
    if u + 1 < b {
        return Err(Error::Usage(format!(
            "a_bound requires u >= b - 1, got u = {u}, b = {b}"
        )));
    }
    let w = b as i64 * k as i64 - 2 * u as i64;
    if w < 1 {
        return Err(Error::Usage(format!(
            "a_bound requires w = b*k - 2u >= 1, got w = {w}"
        )));
    }
    let (uf, bf, kf, wf) = (u as f64, b as f64, k as f64, w as f64);
    Ok(0.5 * wf * (3.0 * uf + 2.0 * wf - bf - 1.0)
        + uf * (uf - 1.0).powi(2) / (2.0 * uf - bf)
        + kf * wf * (bf - 1.0).powi(2) / uf)
}

/// A-efficiency: the lower bound divided by the achieved total.
pub fn a_eff(spec: &FullDesignSpec) -> Result<f64> {
    Ok(a_bound(spec.u(), spec.b(), spec.k())? / a_value(spec)?.total)
}

/// Smallest feasible full-design block size for a subdesign: one more than
/// the largest block when all blocks have equal size (otherwise no treatment
/// would be singly replicated), else the largest block size itself.
pub fn k0(d: &BlockDesign) -> usize {
    if d.has_constant_block_size() {
        d.k_max() + 1
    } else {
        d.k_max()
    }
}

/// A-efficiency thresholds of a subdesign: for each level alpha, the
/// smallest k at which the efficiency reaches alpha and stays there through
/// the cap (`None` rendered as X when it never does).
#[derive(Debug, Clone, Serialize)]
pub struct KTable {
    pub k0: usize,
    pub cap: usize,
    pub alphas: Vec<f64>,
    pub thresholds: Vec<Option<usize>>,
    /// A-efficiency at each k in k0..=cap.
    pub efficiencies: Vec<f64>,
}

impl fmt::Display for KTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = std::iter::once("k0".to_string())
            .chain(self.alphas.iter().map(|a| format!("k{a:.2}")))
            .collect();
        let values: Vec<String> = std::iter::once(self.k0.to_string())
            .chain(self.thresholds.iter().map(|t| match t {
                Some(k) => k.to_string(),
                None => "X".to_string(),
            }))
            .collect();
        write!(f, "({}) = ({})", labels.join(", "), values.join(", "))
    }
}

/// Scans every k in [k0, cap] and reports, per alpha, the smallest k whose
/// whole suffix keeps the A-efficiency at or above alpha. The suffix is
/// checked exhaustively rather than assuming monotone growth.
pub fn k_thresholds(d: &BlockDesign, alphas: &[f64], cap: usize) -> Result<KTable> {
    let k0 = k0(d);
    if cap < k0 {
        return Err(Error::Usage(format!(
            "cap {cap} is below the smallest feasible block size {k0}"
        )));
    }
    let mut efficiencies = Vec::with_capacity(cap - k0 + 1);
    for k in k0..=cap {
        let spec = FullDesignSpec::new(d.clone(), k)?;
        efficiencies.push(a_eff(&spec)?);
    }
    // suffix_min[i] = min efficiency over k0+i ..= cap.
    let mut suffix_min = efficiencies.clone();
    for i in (0..suffix_min.len().saturating_sub(1)).rev() {
        suffix_min[i] = suffix_min[i].min(suffix_min[i + 1]);
    }
    let thresholds = alphas
        .iter()
        .map(|&alpha| {
            suffix_min
                .iter()
                .position(|&m| m >= alpha)
                .map(|i| k0 + i)
        })
        .collect();
    Ok(KTable {
        k0,
        cap,
        alphas: alphas.to_vec(),
        thresholds,
        efficiencies,
    })
}

/// Which contrast category attains the MV maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MvComponent {
    Uu,
    Ww,
    Uw,
}

/// MV-criterion (largest BLUE variance over all pairwise contrasts) with its
/// per-category pieces.
#[derive(Debug, Clone, Serialize)]
pub struct MvValue {
    pub total: f64,
    /// Largest variance among U-U pairs.
    pub uu: f64,
    /// Largest variance among W-W pairs in distinct populated blocks; `None`
    /// when fewer than two blocks hold singly replicated treatments.
    pub ww: Option<f64>,
    /// Largest variance among U-W pairs; `None` when no block holds a singly
    /// replicated treatment (impossible for a valid spec).
    pub uw: Option<f64>,
    /// True when some block holds two or more singly replicated treatments;
    /// every such same-block pair has variance exactly 2, a candidate for the
    /// maximum even when `ww` is undefined.
    pub same_block_pair: bool,
    /// Category attaining `total` (a same-block pair counts as Ww).
    pub component: MvComponent,
}

/// Largest pairwise BLUE variance of the full design, split by category.
pub fn mv_value(spec: &FullDesignSpec) -> Result<MvValue> {
    if spec.b() < 3 {
        return Err(Error::Usage(format!(
            "mv_value requires b >= 3, got b = {}",
            spec.b()
        )));
    }
    let c_plus = linalg::pinv_default(&spec.info_c())?;
    let uu = max_pair_quad(&c_plus);

    let m = linalg::pinv_default(&spec.info_ctilde())?;
    let populated: Vec<usize> = (0..spec.b()).filter(|&j| spec.s()[j] >= 1).collect();

    let ww = if populated.len() >= 2 {
        let mut best = f64::NEG_INFINITY;
        for (a, &j) in populated.iter().enumerate() {
            for &jj in &populated[a + 1..] {
                let q = m.get(j, j) + m.get(jj, jj) - 2.0 * m.get(j, jj);
                best = best.max(q);
            }
        }
        Some(2.0 + best)
    } else {
        None
    };

    let uw = if populated.is_empty() {
        None
    } else {
        let n = spec.sub().incidence();
        let mut best = f64::NEG_INFINITY;
        for i in 0..spec.u() {
            // For xi = e~_j - (1/2) N' e_i: the quadratic form in M is
            // M_jj - (n_i M)_j + (1/4) n_i M n_i'.
            let ni_m: Vec<f64> = (0..spec.b())
                .map(|j| (0..spec.b()).map(|l| n[i][l] as f64 * m.get(l, j)).sum())
                .collect();
            let self_quad: f64 = (0..spec.b()).map(|l| n[i][l] as f64 * ni_m[l]).sum();
            for &j in &populated {
                let q = m.get(j, j) - ni_m[j] + 0.25 * self_quad;
                best = best.max(q);
            }
        }
        Some(1.5 + best)
    };

    let same_block_pair = spec.s().iter().any(|&sj| sj >= 2);

    let mut total = uu;
    let mut component = MvComponent::Uu;
    if same_block_pair && 2.0 > total {
        total = 2.0;
        component = MvComponent::Ww;
    }
    if let Some(x) = ww {
        if x > total {
            total = x;
            component = MvComponent::Ww;
        }
    }
    if let Some(x) = uw {
        if x > total {
            total = x;
            component = MvComponent::Uw;
        }
    }
    Ok(MvValue {
        total,
        uu,
        ww,
        uw,
        same_block_pair,
        component,
    })
}

/// Applicability thresholds of the MV lower bounds, all independent of k.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MvThresholds {
    /// Least k with w >= k, from which on at least two blocks are populated.
    pub k_sharp: usize,
    /// 2(u+1) - b; from this k on, every block is populated.
    pub k_plus: usize,
    /// max(k_sharp, largest subdesign block + 1): the MV value and the first
    /// efficiency form are both stable from here on.
    pub k_star: usize,
}

/// Computes k#, k+ and k* for a two-replicate subdesign.
pub fn mv_thresholds(d: &BlockDesign) -> Result<MvThresholds> {
    let u = d.num_treatments();
    let b = d.num_blocks();
    if b < 3 {
        return Err(Error::Usage(format!("mv thresholds require b >= 3, got b = {b}")));
    }
    if u + 1 < b {
        return Err(Error::Usage(format!(
            "mv thresholds require u >= b - 1, got u = {u}, b = {b}"
        )));
    }
    if d.replications().iter().any(|&r| r != 2) {
        return Err(Error::Usage(
            "mv thresholds require a two-replicate subdesign".into(),
        ));
    }
    let k_sharp = (2 * u).div_ceil(b - 1);
    let k_plus = 2 * (u + 1) - b;
    let k_star = k_sharp.max(d.k_max() + 1);
    // Both hold for every two-replicate subdesign with u >= b - 1.
    assert!(k_plus > k_sharp, "k+ = {k_plus} must exceed k# = {k_sharp}");
    assert!(k_plus >= k_star, "k+ = {k_plus} must be at least k* = {k_star}");
    Ok(MvThresholds {
        k_sharp,
        k_plus,
        k_star,
    })
}

/// MV-efficiency: a design-independent lower bound divided by the achieved
/// MV value.
///
/// With `mv_min` (the best MV value among block-size-2 designs with b
/// treatments and u blocks, from the enumeration module) and k >= k+, the
/// sharper bound 2 + mv_min is used; otherwise the closed-form bound
/// 2 + 2(b-1)/u applies for k >= k*. Below the applicable threshold this is
/// an error, because neither bound is valid there.
pub fn mv_eff(spec: &FullDesignSpec, mv_min: Option<f64>) -> Result<f64> {
    let thresholds = mv_thresholds(spec.sub())?;
    let total = mv_value(spec)?.total;
    if let Some(min) = mv_min {
        if spec.k() >= thresholds.k_plus {
            let bound = 2.0 + min;
            if bound > total + 1e-8 {
                return Err(Error::Usage(format!(
                    "supplied mv-min {min} gives bound {bound} above the design's MV value {total}; \
                     it cannot be the class minimum"
                )));
            }
            return Ok(bound / total);
        }
    }
    if spec.k() < thresholds.k_star {
        return Err(Error::Usage(format!(
            "MV-efficiency needs k >= k* = {} (or mv-min together with k >= k+ = {}); got k = {}",
            thresholds.k_star,
            thresholds.k_plus,
            spec.k()
        )));
    }
    let bound = 2.0 + 2.0 * (spec.b() as f64 - 1.0) / spec.u() as f64;
    assert!(
        bound <= total + 1e-8,
        "closed-form MV bound {bound} exceeds achieved MV {total}"
    );
    Ok(bound / total)
}

/// A1- and A2-criteria: variance totals restricted to W-W pairs (a1) and to
/// W-W plus U-W pairs (sum), with the lower bound and efficiency for the
/// latter. No design-independent bound on a1 alone exists; it is reported
/// raw and explored by enumeration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct A2Value {
    /// A1-criterion: the W-W variance total.
    pub a1: f64,
    /// A2-criterion: the W-W plus U-W variance total.
    pub sum: f64,
    pub bound: f64,
    pub eff: f64,
}

pub fn a2_value(spec: &FullDesignSpec) -> Result<A2Value> {
    let (u, b, k, w) = dims(spec);
    let ct_plus = linalg::pinv_default(&spec.info_ctilde())?;
    let s: Vec<f64> = spec.s().iter().map(|&x| x as f64).collect();
    let tr_ct_plus = ct_plus.trace();
    let tr_ct_plus_s: f64 = (0..spec.b()).map(|j| s[j] * ct_plus.get(j, j)).sum();
    let s_quad = linalg::quad_form(&ct_plus, &s)?;

    let a1 = w * (w - 1.0) + w * tr_ct_plus_s - s_quad;
    let sum = 0.5 * w * (3.0 * u + 2.0 * w - b - 1.0)
        + 0.5 * k * (w * tr_ct_plus + b * tr_ct_plus_s);
    let bound = 0.5 * w * (3.0 * u + 2.0 * w - b - 1.0) + k * w * (b - 1.0).powi(2) / u;
    Ok(A2Value {
        a1,
        sum,
        bound,
        eff: bound / sum,
    })
}

/// Outcome of checking the trace inequality that drives every bound here:
/// tr(C~ D) tr(C~+ D) >= {tr(D) - (1/b) 1'D1}^2 for nonnegative definite D,
/// plus the diagonal-case upper bound on tr(C~ D).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceInequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// For exactly diagonal D: (tr(C~ D), (1/2) sum (k - s_j) d_j, holds).
    pub diagonal: Option<(f64, f64, bool)>,
}

pub fn trace_inequality_check(spec: &FullDesignSpec, delta: &SymMatrix) -> Result<TraceInequalityCheck> {
    let b = spec.b();
    if delta.order() != b {
        return Err(Error::Usage(format!(
            "delta has order {}, expected b = {b}",
            delta.order()
        )));
    }
    let eig = linalg::eigen_sym(delta)?;
    let lam_max = eig.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let min = *eig.values.last().unwrap();
    if min < -1e-8 * lam_max.max(1.0) {
        return Err(Error::Usage(format!(
            "delta is not nonnegative definite (eigenvalue {min})"
        )));
    }

    let ct = spec.info_ctilde();
    let ct_plus = linalg::pinv_default(&ct)?;
    let lhs = linalg::trace_product(&ct, delta)? * linalg::trace_product(&ct_plus, delta)?;
    let centered = delta.trace() - delta.grand_sum() / b as f64;
    let rhs = centered * centered;
    let holds = lhs >= rhs - 1e-8 * rhs.abs().max(1.0);

    let exactly_diagonal = (0..b).all(|i| (0..b).all(|j| i == j || delta.get(i, j) == 0.0));
    let diagonal = exactly_diagonal.then(|| {
        let lhs_d = linalg::trace_product(&ct, delta).expect("orders match");
        let rhs_d: f64 = (0..b)
            .map(|j| 0.5 * (spec.k() - spec.s()[j]) as f64 * delta.get(j, j))
            .sum();
        (lhs_d, rhs_d, lhs_d <= rhs_d + 1e-8 * rhs_d.abs().max(1.0))
    });

    Ok(TraceInequalityCheck {
        lhs,
        rhs,
        holds,
        diagonal,
    })
}

/// MV-criterion of an arbitrary connected block design, taken directly from
/// its own information matrix: the largest pairwise BLUE variance among its
/// treatments. Used for duals (block-size-2 designs) and enumeration.
pub fn block_design_mv(d: &BlockDesign) -> Result<f64> {
    if d.num_treatments() < 2 {
        return Err(Error::Usage(
            "MV-criterion needs at least two treatments".into(),
        ));
    }
    if !d.is_connected() {
        return Err(Error::Usage("MV-criterion needs a connected design".into()));
    }
    let p = linalg::pinv_default(&c_matrix(d))?;
    Ok(max_pair_quad(&p))
}

/// Largest value of P_ii + P_jj - 2 P_ij over pairs i < j.
fn max_pair_quad(p: &SymMatrix) -> f64 {
    let n = p.order();
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max(p.get(i, i) + p.get(j, j) - 2.0 * p.get(i, j));
        }
    }
    best
}

fn dims(spec: &FullDesignSpec) -> (f64, f64, f64, f64) {
    (
        spec.u() as f64,
        spec.b() as f64,
        spec.k() as f64,
        spec.w() as f64,
    )
}

/// Everything the `eval` command reports for one (subdesign, k) pair.
#[derive(Debug, Clone, Serialize)]
pub struct CriteriaReport {
    pub u: usize,
    pub b: usize,
    pub k: usize,
    pub w: usize,
    pub v: usize,
    pub f: f64,
    pub a_total: f64,
    pub a_uu: f64,
    pub a_ww: f64,
    pub a_uw: f64,
    pub a_bound: f64,
    pub a_eff: f64,
    pub mv_total: f64,
    pub mv_uu: f64,
    pub mv_ww: Option<f64>,
    pub mv_uw: Option<f64>,
    /// Closed-form MV bound 2 + 2(b-1)/u, valid for k >= k#.
    pub mv_bound_a: f64,
    /// Enumeration-based MV bound 2 + mv_min, valid for k >= k+; present
    /// only when mv_min was supplied.
    pub mv_bound_b: Option<f64>,
    /// MV-efficiency; absent when k is below every applicable threshold.
    pub mv_eff: Option<f64>,
    pub k0: usize,
    pub k_sharp: usize,
    pub k_plus: usize,
    pub k_star: usize,
    pub a2_sum: f64,
    pub a2_bound: f64,
    pub a2_eff: f64,
}

/// Builds the full report. `mv_min`, when given, enables the sharper MV
/// bound for k >= k+.
pub fn criteria_report(spec: &FullDesignSpec, mv_min: Option<f64>) -> Result<CriteriaReport> {
    let a = a_value(spec)?;
    let bound = a_bound(spec.u(), spec.b(), spec.k())?;
    let mv = mv_value(spec)?;
    let thresholds = mv_thresholds(spec.sub())?;
    let a2 = a2_value(spec)?;

    let sharp_bound_applies = mv_min.is_some() && spec.k() >= thresholds.k_plus;
    let mv_eff = if sharp_bound_applies || spec.k() >= thresholds.k_star {
        Some(mv_eff(spec, mv_min)?)
    } else {
        None
    };

    Ok(CriteriaReport {
        u: spec.u(),
        b: spec.b(),
        k: spec.k(),
        w: spec.w(),
        v: spec.v(),
        f: spec.f(),
        a_total: a.total,
        a_uu: a.uu,
        a_ww: a.ww,
        a_uw: a.uw,
        a_bound: bound,
        a_eff: bound / a.total,
        mv_total: mv.total,
        mv_uu: mv.uu,
        mv_ww: mv.ww,
        mv_uw: mv.uw,
        mv_bound_a: 2.0 + 2.0 * (spec.b() as f64 - 1.0) / spec.u() as f64,
        mv_bound_b: mv_min.map(|m| 2.0 + m),
        mv_eff,
        k0: k0(spec.sub()),
        k_sharp: thresholds.k_sharp,
        k_plus: thresholds.k_plus,
        k_star: thresholds.k_star,
        a2_sum: a2.sum,
        a2_bound: a2.bound,
        a2_eff: a2.eff,
    })
}

impl fmt::Display for CriteriaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "design: u = {}, b = {}, k = {}, w = {}, v = {}, f = {:.2}",
            self.u, self.b, self.k, self.w, self.v, self.f
        )?;
        writeln!(
            f,
            "A:  total = {:.4} (UU {:.4} + WW {:.4} + UW {:.4})",
            self.a_total, self.a_uu, self.a_ww, self.a_uw
        )?;
        writeln!(
            f,
            "    bound = {:.4}, efficiency = {:.3}",
            self.a_bound, self.a_eff
        )?;
        let opt = |x: Option<f64>| match x {
            Some(v) => format!("{v:.4}"),
            None => "undefined".to_string(),
        };
        writeln!(
            f,
            "MV: total = {:.4} (UU {:.4}, WW {}, UW {})",
            self.mv_total,
            self.mv_uu,
            opt(self.mv_ww),
            opt(self.mv_uw)
        )?;
        let eff = match self.mv_eff {
            Some(e) => format!("{e:.3}"),
            None => format!("needs k >= {}", self.k_star),
        };
        writeln!(
            f,
            "    bound = {:.4}{}, efficiency = {}",
            self.mv_bound_a,
            match self.mv_bound_b {
                Some(b) => format!(" (with enumeration: {b:.4})"),
                None => String::new(),
            },
            eff
        )?;
        writeln!(
            f,
            "A2: total = {:.4}, bound = {:.4}, efficiency = {:.3}; A1 (raw): {:.4}",
            self.a2_sum, self.a2_bound, self.a2_eff, self.a_ww
        )?;
        write!(
            f,
            "thresholds: k0 = {}, k# = {}, k+ = {}, k* = {}",
            self.k0, self.k_sharp, self.k_plus, self.k_star
        )
    }
}
