//! Exhaustive search over connected binary subdesigns with every treatment
//! replicated twice. Such subdesigns correspond one-to-one with connected
//! loop-free multigraphs: vertices are the blocks, and each treatment is an
//! edge joining the two blocks containing it. Enumerating multigraphs up to
//! isomorphism therefore enumerates subdesigns up to relabeling, which is
//! all any label-invariant criterion can distinguish.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::criteria::{self, block_design_mv};
use crate::error::{Error, Result};
use crate::model::{BlockDesign, FullDesignSpec};

/// Keeps the b! canonicalization scans and the search tree affordable.
const SIZE_CAP: usize = 18;

/// Which criterion a search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    /// Total pairwise variance.
    A,
    /// Largest pairwise variance.
    Mv,
    /// Variance total over singly replicated pairs only.
    A1,
    /// Variance total over singly replicated plus mixed pairs.
    A2,
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Criterion::A),
            "mv" => Ok(Criterion::Mv),
            "a1" => Ok(Criterion::A1),
            "a2" => Ok(Criterion::A2),
            other => Err(Error::Usage(format!(
                "unknown criterion '{other}' (expected a, mv, a1 or a2)"
            ))),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Criterion::A => "A",
            Criterion::Mv => "MV",
            Criterion::A1 => "A1",
            Criterion::A2 => "A2",
        };
        f.write_str(s)
    }
}

/// Outcome of an exhaustive search over one subdesign class.
#[derive(Debug, Clone, Serialize)]
pub struct EnumerationResult {
    pub u: usize,
    pub b: usize,
    pub k: usize,
    pub criterion: Criterion,
    /// Smallest criterion value across the class.
    pub optimum: f64,
    /// All subdesigns attaining the optimum (ties within 1e-9 relative),
    /// in the enumeration's canonical order.
    pub optimizers: Vec<BlockDesign>,
    /// Non-isomorphic candidates generated.
    pub classes_examined: usize,
    /// Candidates whose block sizes fit the requested k.
    pub feasible: usize,
}

type Edge = (u8, u8);

fn cap_check(b: usize, u: usize) -> Result<()> {
    if b < 2 || u + 1 < b {
        return Err(Error::Usage(format!(
            "enumeration needs b >= 2 and u >= b - 1, got b = {b}, u = {u}"
        )));
    }
    if u + b > SIZE_CAP {
        return Err(Error::Usage(format!(
            "u + b = {} exceeds the enumeration cap of {SIZE_CAP}",
            u + b
        )));
    }
    Ok(())
}

/// One representative per isomorphism class of connected loop-free
/// multigraphs on b vertices with u edges, returned as block designs with
/// b treatments and u blocks of size two, sorted by canonical form.
pub fn enum_duals(b: usize, u: usize) -> Result<Vec<BlockDesign>> {
    cap_check(b, u)?;
    let mut seen: HashSet<Vec<Edge>> = HashSet::new();
    let mut classes: Vec<Vec<Edge>> = Vec::new();

    // Non-increasing degree sequences fix vertex order, so isomorphic graphs
    // can only recur within one sequence; the canonical form catches those.
    let mut degrees = vec![0usize; b];
    degree_sequences(&mut degrees, 0, 2 * u, u, &mut |deg| {
        let mut edges: Vec<Edge> = Vec::with_capacity(u);
        let mut residual = deg.to_vec();
        assign_vertex(0, b, &mut residual, &mut edges, &mut |edges| {
            let canon = canonical_form(deg, edges);
            if seen.insert(canon.clone()) {
                classes.push(canon);
            }
        });
    });

    classes.sort();
    Ok(classes
        .into_iter()
        .map(|edges| {
            let blocks = edges
                .iter()
                .map(|&(a, c)| vec![a as u32 + 1, c as u32 + 1])
                .collect();
            BlockDesign::new(blocks).expect("edges are valid blocks")
        })
        .collect())
}

/// Emits every non-increasing sequence of positive degrees summing to 2u
/// with no vertex exceeding u (a loop-free multigraph cannot put more than
/// half the endpoint count on one vertex).
fn degree_sequences(
    degrees: &mut [usize],
    pos: usize,
    remaining: usize,
    max_deg: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    let left = degrees.len() - pos;
    if left == 0 {
        if remaining == 0 {
            visit(degrees);
        }
        return;
    }
    let hi = remaining.saturating_sub(left - 1).min(max_deg);
    let lo = remaining.div_ceil(left).max(1);
    for d in (lo..=hi).rev() {
        degrees[pos] = d;
        degree_sequences(degrees, pos + 1, remaining - d, d, visit);
    }
}

/// Distributes vertex i's residual degree over edges to later vertices,
/// then recurses. Prunes any branch in which some finished component can no
/// longer reach the rest of the graph.
fn assign_vertex(
    i: usize,
    b: usize,
    residual: &mut [usize],
    edges: &mut Vec<Edge>,
    visit: &mut impl FnMut(&[Edge]),
) {
    if i == b {
        if residual.iter().all(|&r| r == 0) && connected(b, edges) {
            visit(edges);
        }
        return;
    }
    if i > 0 && sealed_component_is_proper(b, edges, residual) {
        return;
    }
    distribute(i, i + 1, b, residual[i], residual, edges, visit);
}

/// Chooses the multiplicity of edge (i, j) for each j > i so the choices
/// sum to vertex i's residual degree.
#[allow(clippy::too_many_arguments)]
fn distribute(
    i: usize,
    j: usize,
    b: usize,
    need: usize,
    residual: &mut [usize],
    edges: &mut Vec<Edge>,
    visit: &mut impl FnMut(&[Edge]),
) {
    if need == 0 {
        let saved = residual[i];
        residual[i] = 0;
        assign_vertex(i + 1, b, residual, edges, visit);
        residual[i] = saved;
        return;
    }
    if j == b {
        return;
    }
    let cap: usize = need.min(residual[j]);
    // Feasibility: later vertices must be able to absorb what remains.
    let later: usize = residual[j + 1..].iter().sum();
    for m in (0..=cap).rev() {
        if need - m > later {
            continue;
        }
        residual[j] -= m;
        for _ in 0..m {
            edges.push((i as u8, j as u8));
        }
        distribute(i, j + 1, b, need - m, residual, edges, visit);
        for _ in 0..m {
            edges.pop();
        }
        residual[j] += m;
    }
}

fn components(b: usize, edges: &[Edge]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..b).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        if parent[x] != x {
            parent[x] = find(parent, parent[x]);
        }
        parent[x]
    }
    for &(a, c) in edges {
        let (ra, rc) = (find(&mut parent, a as usize), find(&mut parent, c as usize));
        if ra != rc {
            parent[ra] = rc;
        }
    }
    (0..b).map(|x| find(&mut parent, x)).collect()
}

fn connected(b: usize, edges: &[Edge]) -> bool {
    let roots = components(b, edges);
    roots.iter().all(|&r| r == roots[0])
}

/// True when some component has exhausted every member's residual degree
/// yet does not span all vertices: no future edge can ever reach it.
fn sealed_component_is_proper(b: usize, edges: &[Edge], residual: &[usize]) -> bool {
    let roots = components(b, edges);
    for root in 0..b {
        let members: Vec<usize> = (0..b).filter(|&x| roots[x] == root).collect();
        if members.is_empty() || members.len() == b {
            continue;
        }
        if members.iter().all(|&x| residual[x] == 0) {
            return true;
        }
    }
    false
}

/// Lexicographically least relabeled edge list over all vertex relabelings
/// that preserve the degree sequence. Degrees are non-increasing, so only
/// permutations within runs of equal degree can map the graph to itself or
/// to an isomorphic labeling.
fn canonical_form(degrees: &[usize], edges: &[Edge]) -> Vec<Edge> {
    let b = degrees.len();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=b {
        if i == b || degrees[i] != degrees[start] {
            runs.push((start, i));
            start = i;
        }
    }

    let mut perm: Vec<usize> = (0..b).collect();
    let mut best: Option<Vec<Edge>> = None;
    permute_runs(&runs, 0, &mut perm, &mut |perm| {
        let mut relabeled: Vec<Edge> = edges
            .iter()
            .map(|&(a, c)| {
                let (x, y) = (perm[a as usize] as u8, perm[c as usize] as u8);
                (x.min(y), x.max(y))
            })
            .collect();
        relabeled.sort_unstable();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
    });
    best.expect("at least the identity relabeling")
}

/// Applies every combination of permutations of the index runs.
fn permute_runs(
    runs: &[(usize, usize)],
    idx: usize,
    perm: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if idx == runs.len() {
        visit(perm);
        return;
    }
    let (lo, hi) = runs[idx];
    let mut order: Vec<usize> = (lo..hi).collect();
    heap_permutations(&mut order, &mut |order| {
        for (offset, &target) in order.iter().enumerate() {
            perm[lo + offset] = target;
        }
        permute_runs(runs, idx + 1, perm, visit);
    });
    for x in lo..hi {
        perm[x] = x;
    }
}

fn heap_permutations(items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    fn rec(n: usize, items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
        if n <= 1 {
            visit(items);
            return;
        }
        for i in 0..n {
            rec(n - 1, items, visit);
            if n % 2 == 0 {
                items.swap(i, n - 1);
            } else {
                items.swap(0, n - 1);
            }
        }
    }
    rec(items.len(), items, visit);
}

/// Minimizes the requested criterion of the full design over every
/// enumerated subdesign class that fits block size k. Ties within 1e-9
/// relative are all reported.
pub fn best_binary(u: usize, b: usize, k: usize, criterion: Criterion) -> Result<EnumerationResult> {
    let duals = enum_duals(b, u)?;
    let classes_examined = duals.len();
    if (b * k) as i64 - 2 * u as i64 <= 0 {
        return Err(Error::Usage(format!(
            "no singly replicated treatments: b*k - 2u = {} must be positive",
            (b * k) as i64 - 2 * u as i64
        )));
    }

    let mut evaluated: Vec<(f64, BlockDesign)> = Vec::new();
    for dual in duals {
        let sub = dual.dual();
        if sub.k_max() > k {
            continue;
        }
        let spec = FullDesignSpec::new(sub, k)?;
        let value = match criterion {
            Criterion::A => criteria::a_value(&spec)?.total,
            Criterion::Mv => criteria::mv_value(&spec)?.total,
            Criterion::A1 => criteria::a2_value(&spec)?.a1,
            Criterion::A2 => criteria::a2_value(&spec)?.sum,
        };
        evaluated.push((value, spec.into_sub()));
    }
    let feasible = evaluated.len();
    let optimum = evaluated
        .iter()
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    if !optimum.is_finite() {
        return Err(Error::Usage(format!(
            "no candidate subdesign fits block size k = {k}"
        )));
    }
    let optimizers = evaluated
        .into_iter()
        .filter(|(v, _)| *v <= optimum + 1e-9 * optimum.abs())
        .map(|(_, d)| d)
        .collect();
    Ok(EnumerationResult {
        u,
        b,
        k,
        criterion,
        optimum,
        optimizers,
        classes_examined,
        feasible,
    })
}

/// Smallest largest-pairwise-variance over all connected designs with b
/// treatments in u blocks of size two: the yardstick behind the sharper
/// MV bound.
pub fn mv_min(b: usize, u: usize) -> Result<f64> {
    let duals = enum_duals(b, u)?;
    let mut best = f64::INFINITY;
    for dual in duals {
        best = best.min(block_design_mv(&dual)?);
    }
    Ok(best)
}
