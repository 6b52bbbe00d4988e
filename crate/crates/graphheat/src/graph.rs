//! Infinite weighted graphs represented through pure neighbor oracles,
//! plus the finite materializations (balls with a one-edge boundary layer)
//! on which every Dirichlet problem in this crate is posed.
//!
//! The built-in families are the integer lattice, spherically symmetric
//! rooted trees, and anti-trees (consecutive spheres fully bipartitely
//! connected). Explicit finite graphs are supported for testing and for
//! fault injection. Only balls are ever materialized; a search budget
//! bounds every BFS so a bad query reports an error instead of exhausting
//! memory.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on materialized vertices; the CLI overrides it from
/// `GRAPHHEAT_MAX_VERTICES`.
pub const DEFAULT_MAX_VERTICES: usize = 200_000;

/// Hard cap on a single neighbor list and on declared family depths;
/// rules that blow past it are rejected instead of allocating.
pub const MAX_NEIGHBOR_LIST: u64 = 1_000_000;
const MAX_DEPTH: u32 = 100_000;

/// Vertex identifier. Lattice vertices carry their integer coordinates;
/// vertices of radial families carry (shell, ordinal within shell).
///
/// The derived `Ord` gives the deterministic orderings the region
/// contract requires: lexicographic for lattices, (shell, ordinal) for
/// radial families.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum VertexId {
    Lattice(Vec<i64>),
    Radial { shell: u32, ordinal: u64 },
}

impl VertexId {
    pub fn lattice(coords: &[i64]) -> Self {
        VertexId::Lattice(coords.to_vec())
    }

    pub fn radial(shell: u32, ordinal: u64) -> Self {
        VertexId::Radial { shell, ordinal }
    }

    /// Lattice coordinates, if this is a lattice vertex.
    pub fn coords(&self) -> Option<&[i64]> {
        match self {
            VertexId::Lattice(c) => Some(c),
            _ => None,
        }
    }

    /// Shell index, if this is a radial-family vertex.
    pub fn shell(&self) -> Option<u32> {
        match self {
            VertexId::Radial { shell, .. } => Some(*shell),
            _ => None,
        }
    }

    /// Squared euclidean norm of a lattice vertex.
    pub fn norm_sq(&self) -> Option<f64> {
        self.coords()
            .map(|c| c.iter().map(|&x| (x as f64) * (x as f64)).sum())
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Lattice(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join("_"))
            }
            VertexId::Radial { shell, ordinal } => write!(f, "s{}_{}", shell, ordinal),
        }
    }
}

/// Shell-indexed integer rule, used for tree branching numbers and
/// anti-tree sphere sizes. Parsed from descriptors like `const:2` and
/// `affine:1,1` (slope,offset: `m ↦ slope*m + offset`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShellRule {
    Const(u64),
    Affine { slope: u64, offset: u64 },
}

impl ShellRule {
    pub fn eval(&self, m: u32) -> Result<u64> {
        match self {
            ShellRule::Const(v) => Ok(*v),
            ShellRule::Affine { slope, offset } => slope
                .checked_mul(m as u64)
                .and_then(|v| v.checked_add(*offset))
                .ok_or(Error::OrdinalOverflow { shell: m }),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad shell rule {s:?}; expected const:<k> or affine:<a>,<b>"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "const" => {
                let v: u64 = rest.trim().parse().map_err(|_| bad())?;
                Ok(ShellRule::Const(v))
            }
            "affine" => {
                let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                let slope: u64 = a.trim().parse().map_err(|_| bad())?;
                let offset: u64 = b.trim().parse().map_err(|_| bad())?;
                Ok(ShellRule::Affine { slope, offset })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for ShellRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShellRule::Const(v) => write!(f, "const:{v}"),
            ShellRule::Affine { slope, offset } => write!(f, "affine:{slope},{offset}"),
        }
    }
}

/// The two documented readings of the anti-tree degree convention.
///
/// Under convention `B` the measure is identically one, so the oracle
/// yields outer degree `s(m+1)` and inner degree `s(m-1)` on shell `m`.
/// Under convention `A` the measure is rescaled per shell
/// (`mu = s(m+1)/s(m-1)` for `m >= 1`) so that the outer degree becomes
/// `s(m-1)`. No vertex measure can simultaneously realize inner degree
/// `s(m+1)` on the fully bipartite structure (the sign of `D+ - D-` is
/// measure-invariant), so the barrier layer works with the nominal
/// per-convention degrees; see `antitree_nominal_degrees`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AntitreeConvention {
    A,
    B,
}

impl fmt::Display for AntitreeConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AntitreeConvention::A => write!(f, "A"),
            AntitreeConvention::B => write!(f, "B"),
        }
    }
}

/// Finite explicit graph: adjacency and measure maps. Used for tests,
/// randomized property suites, and fault injection.
#[derive(Clone, Debug, Default)]
pub struct ExplicitGraph {
    pub adjacency: BTreeMap<VertexId, Vec<(VertexId, f64)>>,
    pub measure: BTreeMap<VertexId, f64>,
}

impl ExplicitGraph {
    /// Insert the undirected edge (x, y) with weight `w` into both lists.
    pub fn add_edge(&mut self, x: VertexId, y: VertexId, w: f64) {
        self.adjacency.entry(x.clone()).or_default().push((y.clone(), w));
        self.adjacency.entry(y).or_default().push((x, w));
    }

    pub fn set_measure(&mut self, x: VertexId, mu: f64) {
        self.measure.insert(x, mu);
    }

    /// Perturb one direction of one edge weight. Breaks symmetry on
    /// purpose; the identity suite must detect it.
    pub fn corrupt_one_directed_weight(&mut self) {
        if let Some((_, list)) = self.adjacency.iter_mut().next() {
            if let Some(entry) = list.first_mut() {
                entry.1 *= 1.5;
            }
        }
    }
}

#[derive(Clone, Debug)]
enum GraphKind {
    Lattice { dim: usize },
    Tree { branching: ShellRule, depth: u32 },
    AntiTree { sphere: ShellRule, convention: AntitreeConvention, depth: u32 },
    Explicit(ExplicitGraph),
}

/// An infinite weighted graph behind a pure, deterministic neighbor
/// oracle. Immutable after construction; safe to share across threads.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    kind: GraphKind,
}

impl WeightedGraph {
    /// n-dimensional integer lattice: unit edge weights along the axes,
    /// constant measure `2n`.
    pub fn lattice(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("lattice dimension must be >= 1".into()));
        }
        Ok(WeightedGraph { kind: GraphKind::Lattice { dim } })
    }

    /// Rooted tree where every vertex in shell `m` has `branching(m)`
    /// children; unit weights, unit measure.
    pub fn tree(branching: ShellRule, depth: u32) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "tree depth must be in 1..={MAX_DEPTH}"
            )));
        }
        for m in 0..=depth {
            let b = branching.eval(m)?;
            if b == 0 {
                return Err(Error::InvalidParameter(format!(
                    "branching rule returns 0 at shell {m}"
                )));
            }
            if b > MAX_NEIGHBOR_LIST {
                return Err(Error::InvalidParameter(format!(
                    "branching number {b} at shell {m} exceeds the neighbor-list cap"
                )));
            }
        }
        Ok(WeightedGraph { kind: GraphKind::Tree { branching, depth } })
    }

    /// Anti-tree with the given sphere-size rule: every vertex of shell
    /// `m` is adjacent (weight 1) to every vertex of shell `m+1`.
    pub fn antitree(sphere: ShellRule, convention: AntitreeConvention, depth: u32) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::InvalidParameter(format!(
                "anti-tree depth must be in 1..={MAX_DEPTH}"
            )));
        }
        if sphere.eval(0)? != 1 {
            return Err(Error::InvalidParameter("anti-tree sphere rule must have s(0) = 1".into()));
        }
        for m in 0..=depth.saturating_add(1) {
            let s = sphere.eval(m)?;
            if s == 0 {
                return Err(Error::InvalidParameter(format!(
                    "sphere rule returns 0 at shell {m}"
                )));
            }
            if s > MAX_NEIGHBOR_LIST {
                return Err(Error::InvalidParameter(format!(
                    "sphere size {s} at shell {m} exceeds the neighbor-list cap"
                )));
            }
        }
        Ok(WeightedGraph { kind: GraphKind::AntiTree { sphere, convention, depth } })
    }

    pub fn explicit(graph: ExplicitGraph) -> Self {
        WeightedGraph { kind: GraphKind::Explicit(graph) }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self.kind, GraphKind::Lattice { .. })
    }

    pub fn lattice_dim(&self) -> Option<usize> {
        match &self.kind {
            GraphKind::Lattice { dim } => Some(*dim),
            _ => None,
        }
    }

    pub fn is_antitree(&self) -> bool {
        matches!(self.kind, GraphKind::AntiTree { .. })
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.kind, GraphKind::Tree { .. })
    }

    /// Branching rule of a tree family.
    pub fn tree_branching(&self) -> Option<&ShellRule> {
        match &self.kind {
            GraphKind::Tree { branching, .. } => Some(branching),
            _ => None,
        }
    }

    /// Root vertex of a radial family, or the lattice origin.
    pub fn origin(&self) -> VertexId {
        match &self.kind {
            GraphKind::Lattice { dim } => VertexId::Lattice(vec![0; *dim]),
            GraphKind::Tree { .. } | GraphKind::AntiTree { .. } => VertexId::radial(0, 0),
            GraphKind::Explicit(g) => g
                .adjacency
                .keys()
                .next()
                .cloned()
                .unwrap_or(VertexId::Lattice(vec![])),
        }
    }

    /// Family descriptor used in reports.
    pub fn family_tag(&self) -> String {
        match &self.kind {
            GraphKind::Lattice { dim } => format!("lattice({dim})"),
            GraphKind::Tree { branching, .. } => format!("tree({branching})"),
            GraphKind::AntiTree { sphere, convention, .. } => {
                format!("antitree({sphere},{convention})")
            }
            GraphKind::Explicit(_) => "custom".into(),
        }
    }

    /// Neighbor oracle: finite list of `(neighbor, weight)` pairs in a
    /// deterministic order. Weights are strictly positive; absent edges
    /// are simply not listed.
    pub fn neighbors(&self, x: &VertexId) -> Result<Vec<(VertexId, f64)>> {
        match &self.kind {
            GraphKind::Lattice { dim } => {
                let c = x.coords().ok_or_else(|| {
                    Error::InvalidParameter(format!("{x} is not a lattice vertex"))
                })?;
                if c.len() != *dim {
                    return Err(Error::DimensionMismatch { expected: *dim, got: c.len() });
                }
                let mut out = Vec::with_capacity(2 * dim);
                for k in 0..*dim {
                    for delta in [-1i64, 1] {
                        let mut y = c.to_vec();
                        y[k] += delta;
                        out.push((VertexId::Lattice(y), 1.0));
                    }
                }
                Ok(out)
            }
            GraphKind::Tree { branching, depth } => {
                let (m, i) = radial_parts(x)?;
                if m >= *depth {
                    return Err(Error::DepthExceeded { shell: m, depth: *depth });
                }
                let mut out = Vec::new();
                if m >= 1 {
                    let b_parent = branching.eval(m - 1)?;
                    out.push((VertexId::radial(m - 1, i / b_parent), 1.0));
                }
                let b = branching.eval(m)?;
                let base = i
                    .checked_mul(b)
                    .ok_or(Error::OrdinalOverflow { shell: m + 1 })?;
                for k in 0..b {
                    let ord = base
                        .checked_add(k)
                        .ok_or(Error::OrdinalOverflow { shell: m + 1 })?;
                    out.push((VertexId::radial(m + 1, ord), 1.0));
                }
                Ok(out)
            }
            GraphKind::AntiTree { sphere, depth, .. } => {
                let (m, _i) = radial_parts(x)?;
                if m >= *depth {
                    return Err(Error::DepthExceeded { shell: m, depth: *depth });
                }
                let mut out = Vec::new();
                if m >= 1 {
                    for k in 0..sphere.eval(m - 1)? {
                        out.push((VertexId::radial(m - 1, k), 1.0));
                    }
                }
                for k in 0..sphere.eval(m + 1)? {
                    out.push((VertexId::radial(m + 1, k), 1.0));
                }
                Ok(out)
            }
            GraphKind::Explicit(g) => g
                .adjacency
                .get(x)
                .cloned()
                .ok_or_else(|| Error::MissingValue { vertex: x.to_string() }),
        }
    }

    /// Vertex measure `mu(x) > 0`.
    pub fn measure(&self, x: &VertexId) -> Result<f64> {
        match &self.kind {
            GraphKind::Lattice { dim } => Ok(2.0 * *dim as f64),
            GraphKind::Tree { .. } => Ok(1.0),
            GraphKind::AntiTree { sphere, convention, .. } => {
                let (m, _) = radial_parts(x)?;
                match convention {
                    AntitreeConvention::B => Ok(1.0),
                    AntitreeConvention::A => {
                        if m == 0 {
                            Ok(1.0)
                        } else {
                            let up = sphere.eval(m + 1)? as f64;
                            let down = sphere.eval(m - 1)? as f64;
                            Ok(up / down)
                        }
                    }
                }
            }
            GraphKind::Explicit(g) => g
                .measure
                .get(x)
                .copied()
                .ok_or_else(|| Error::MissingValue { vertex: x.to_string() }),
        }
    }

    /// deg(x) = sum of incident edge weights.
    pub fn degree(&self, x: &VertexId) -> Result<f64> {
        Ok(self.neighbors(x)?.iter().map(|(_, w)| w).sum())
    }

    /// Deg(x) = deg(x) / mu(x).
    pub fn weighted_degree(&self, x: &VertexId) -> Result<f64> {
        Ok(self.degree(x)? / self.measure(x)?)
    }

    /// Nominal per-convention radial degrees `(D+, D-)` of an anti-tree
    /// shell. These are the degrees the convention declares, not the
    /// oracle sums (which cannot realize convention A's inner degree).
    pub fn antitree_nominal_degrees(&self, m: u32) -> Result<(f64, f64)> {
        match &self.kind {
            GraphKind::AntiTree { sphere, convention, .. } => {
                let up = sphere.eval(m + 1)? as f64;
                if m == 0 {
                    return Ok((sphere.eval(1)? as f64, 0.0));
                }
                let down = sphere.eval(m - 1)? as f64;
                match convention {
                    AntitreeConvention::A => Ok((down, up)),
                    AntitreeConvention::B => Ok((up, down)),
                }
            }
            _ => Err(Error::UnsupportedFamily("nominal degrees exist only for anti-trees".into())),
        }
    }

    /// Exact radial profile of a built-in radial family, computed from
    /// the family rules without materializing any shell.
    pub fn family_radial_profile(&self, max_shell: u32) -> Result<RadialProfile> {
        match &self.kind {
            GraphKind::Tree { branching, .. } => {
                let m_len = max_shell as usize + 1;
                let mut d_plus = Vec::with_capacity(m_len);
                let mut d_minus = Vec::with_capacity(m_len);
                let mut card = Vec::with_capacity(m_len);
                let mut sm = Vec::with_capacity(m_len);
                let mut deg = Vec::with_capacity(m_len);
                let mut c = 1.0f64;
                for m in 0..=max_shell {
                    let b = branching.eval(m)? as f64;
                    d_plus.push(b);
                    d_minus.push(if m == 0 { 0.0 } else { 1.0 });
                    card.push(c);
                    sm.push(c);
                    deg.push(if m == 0 { b } else { b + 1.0 });
                    c *= b;
                }
                Ok(RadialProfile { d_plus, d_minus, shell_measure: sm, shell_card: card, deg: deg.into_iter().map(Some).collect() })
            }
            GraphKind::AntiTree { sphere, convention, .. } => {
                let m_len = max_shell as usize + 1;
                let mut d_plus = Vec::with_capacity(m_len);
                let mut d_minus = Vec::with_capacity(m_len);
                let mut card = Vec::with_capacity(m_len);
                let mut sm = Vec::with_capacity(m_len);
                let mut deg = Vec::with_capacity(m_len);
                for m in 0..=max_shell {
                    let s_here = sphere.eval(m)? as f64;
                    let s_up = sphere.eval(m + 1)? as f64;
                    let s_down = if m == 0 { 0.0 } else { sphere.eval(m - 1)? as f64 };
                    let mu = match convention {
                        AntitreeConvention::B => 1.0,
                        AntitreeConvention::A => {
                            if m == 0 {
                                1.0
                            } else {
                                s_up / s_down
                            }
                        }
                    };
                    d_plus.push(s_up / mu);
                    d_minus.push(s_down / mu);
                    card.push(s_here);
                    sm.push(s_here * mu);
                    deg.push((s_up + s_down) / mu);
                }
                Ok(RadialProfile { d_plus, d_minus, shell_measure: sm, shell_card: card, deg: deg.into_iter().map(Some).collect() })
            }
            _ => Err(Error::UnsupportedFamily(
                "family radial profile exists only for trees and anti-trees".into(),
            )),
        }
    }
}

fn radial_parts(x: &VertexId) -> Result<(u32, u64)> {
    match x {
        VertexId::Radial { shell, ordinal } => Ok((*shell, *ordinal)),
        _ => Err(Error::InvalidParameter(format!("{x} is not a radial-family vertex"))),
    }
}

/// Metric used for balls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Combinatorial,
    Euclidean,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Combinatorial => write!(f, "combinatorial"),
            Metric::Euclidean => write!(f, "euclidean"),
        }
    }
}

/// Breadth-first levels from a seed set, up to `max_level` (inclusive),
/// bounded by `budget` visited vertices.
pub fn bfs_levels(
    g: &WeightedGraph,
    seed: &[VertexId],
    max_level: Option<u32>,
    budget: usize,
) -> Result<HashMap<VertexId, u32>> {
    let mut levels: HashMap<VertexId, u32> = HashMap::new();
    let mut queue: VecDeque<VertexId> = VecDeque::new();
    for s in seed {
        if levels.insert(s.clone(), 0).is_none() {
            queue.push_back(s.clone());
        }
    }
    while let Some(x) = queue.pop_front() {
        let lx = levels[&x];
        if let Some(cap) = max_level {
            if lx >= cap {
                continue;
            }
        }
        for (y, _w) in g.neighbors(&x)? {
            if !levels.contains_key(&y) {
                if levels.len() >= budget {
                    return Err(Error::BudgetExceeded { budget, visited: levels.len() });
                }
                levels.insert(y.clone(), lx + 1);
                queue.push_back(y);
            }
        }
    }
    Ok(levels)
}

/// Combinatorial graph distance from the seed set, by BFS. Errors with
/// `NotReached` if `x` is not found within the budget.
pub fn combinatorial_distance(
    g: &WeightedGraph,
    seed: &[VertexId],
    x: &VertexId,
    budget: usize,
) -> Result<u32> {
    if seed.contains(x) {
        return Ok(0);
    }
    let mut levels: HashMap<VertexId, u32> = HashMap::new();
    let mut queue: VecDeque<VertexId> = VecDeque::new();
    for s in seed {
        if levels.insert(s.clone(), 0).is_none() {
            queue.push_back(s.clone());
        }
    }
    while let Some(v) = queue.pop_front() {
        let lv = levels[&v];
        for (y, _) in g.neighbors(&v)? {
            if !levels.contains_key(&y) {
                if levels.len() >= budget {
                    return Err(Error::NotReached);
                }
                if y == *x {
                    return Ok(lv + 1);
                }
                levels.insert(y.clone(), lv + 1);
                queue.push_back(y);
            }
        }
    }
    Err(Error::NotReached)
}

/// Outer and inner degrees `(D+, D-)` of `x` with respect to the seed
/// set: normalized edge mass into the next and previous combinatorial
/// sphere.
pub fn outer_inner_degree(
    g: &WeightedGraph,
    seed: &[VertexId],
    x: &VertexId,
    budget: usize,
) -> Result<(f64, f64)> {
    let r = combinatorial_distance(g, seed, x, budget)?;
    let levels = bfs_levels(g, seed, Some(r + 1), budget)?;
    let mut up = 0.0;
    let mut down = 0.0;
    for (y, w) in g.neighbors(x)? {
        match levels.get(&y) {
            Some(&ly) if ly == r + 1 => up += w,
            Some(&ly) if r >= 1 && ly == r - 1 => down += w,
            _ => {}
        }
    }
    let mu = g.measure(x)?;
    Ok((up / mu, down / mu))
}

/// Per-shell data of a weakly spherically symmetric graph.
///
/// `shell_measure(m)` is the total measure of sphere `m`; `deg(m)` is the
/// weighted degree when it happens to be radial (always for the built-in
/// families).
#[derive(Clone, Debug)]
pub struct RadialProfile {
    d_plus: Vec<f64>,
    d_minus: Vec<f64>,
    shell_measure: Vec<f64>,
    shell_card: Vec<f64>,
    deg: Vec<Option<f64>>,
}

impl RadialProfile {
    pub fn max_shell(&self) -> u32 {
        (self.d_plus.len() - 1) as u32
    }

    pub fn d_plus(&self, m: u32) -> f64 {
        self.d_plus[m as usize]
    }

    pub fn d_minus(&self, m: u32) -> f64 {
        self.d_minus[m as usize]
    }

    pub fn shell_measure(&self, m: u32) -> f64 {
        self.shell_measure[m as usize]
    }

    pub fn shell_card(&self, m: u32) -> f64 {
        self.shell_card[m as usize]
    }

    /// Weighted degree of shell `m`; errors if it was not radial during
    /// extraction.
    pub fn weighted_degree(&self, m: u32) -> Result<f64> {
        self.deg[m as usize].ok_or_else(|| {
            Error::NotRadiallySymmetric {
                shell: m,
                detail: "weighted degree varies within the shell".into(),
            }
        })
    }

    /// Max relative violation of the detailed-balance identity
    /// `d_plus(m) * shell_measure(m) = d_minus(m+1) * shell_measure(m+1)`.
    pub fn detailed_balance_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.max_shell() {
            let lhs = self.d_plus(m) * self.shell_measure(m);
            let rhs = self.d_minus(m + 1) * self.shell_measure(m + 1);
            let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        worst
    }
}

/// Extract the radial profile of `g` around the seed set by materializing
/// shells `0..=max_shell` (plus one look-ahead shell for the outer
/// degrees). Fails with a shell-naming error when two vertices of one
/// shell disagree on `(D+, D-)`, i.e. the graph is not weakly
/// spherically symmetric with respect to the seed.
pub fn extract_radial_profile(
    g: &WeightedGraph,
    seed: &[VertexId],
    max_shell: u32,
    budget: usize,
) -> Result<RadialProfile> {
    const TOL: f64 = 1e-12;
    let levels = bfs_levels(g, seed, Some(max_shell + 1), budget)?;
    let mut shells: Vec<Vec<&VertexId>> = vec![Vec::new(); max_shell as usize + 2];
    for (v, &l) in &levels {
        shells[l as usize].push(v);
    }
    for (m, shell) in shells.iter().enumerate().take(max_shell as usize + 1) {
        if shell.is_empty() {
            return Err(Error::InvalidParameter(format!("shell {m} is empty")));
        }
    }
    let mut d_plus = Vec::new();
    let mut d_minus = Vec::new();
    let mut sm = Vec::new();
    let mut card = Vec::new();
    let mut deg = Vec::new();
    for m in 0..=max_shell {
        let mut ref_pair: Option<(f64, f64)> = None;
        let mut ref_deg: Option<f64> = None;
        let mut deg_radial = true;
        let mut measure_sum = 0.0;
        for &x in &shells[m as usize] {
            let mu = g.measure(x)?;
            if mu <= 0.0 {
                return Err(Error::NonPositiveWeight { vertex: x.to_string(), value: mu });
            }
            measure_sum += mu;
            let mut up = 0.0;
            let mut down = 0.0;
            let mut total = 0.0;
            for (y, w) in g.neighbors(x)? {
                total += w;
                match levels.get(&y) {
                    Some(&ly) if ly == m + 1 => up += w,
                    Some(&ly) if m >= 1 && ly + 1 == m => down += w,
                    _ => {}
                }
            }
            let pair = (up / mu, down / mu);
            let dg = total / mu;
            match ref_pair {
                None => {
                    ref_pair = Some(pair);
                    ref_deg = Some(dg);
                }
                Some(p) => {
                    let close = |a: f64, b: f64| {
                        (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
                    };
                    if !close(p.0, pair.0) || !close(p.1, pair.1) {
                        return Err(Error::NotRadiallySymmetric {
                            shell: m,
                            detail: format!(
                                "vertex {x} has (D+, D-) = ({:.6}, {:.6}) but shell started with ({:.6}, {:.6})",
                                pair.0, pair.1, p.0, p.1
                            ),
                        });
                    }
                    if !close(ref_deg.unwrap(), dg) {
                        deg_radial = false;
                    }
                }
            }
        }
        let p = ref_pair.unwrap();
        d_plus.push(p.0);
        d_minus.push(p.1);
        sm.push(measure_sum);
        card.push(shells[m as usize].len() as f64);
        deg.push(if deg_radial { ref_deg } else { None });
    }
    Ok(RadialProfile { d_plus, d_minus, shell_measure: sm, shell_card: card, deg })
}

/// A finite interior plus its one-edge boundary layer; the domain of all
/// Dirichlet problems. Closure indexing is `0..n_interior` for interior
/// vertices and `n_interior..n_closure` for boundary vertices, each part
/// sorted by `VertexId`.
#[derive(Clone, Debug)]
pub struct FiniteRegion {
    graph: Arc<WeightedGraph>,
    interior: Vec<VertexId>,
    boundary: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    levels: Vec<u32>,
    measures: Vec<f64>,
    adj: Vec<Vec<(usize, f64)>>,
    seed: Vec<VertexId>,
    metric: Metric,
    radius: f64,
}

impl FiniteRegion {
    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_closure(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    pub fn interior(&self) -> &[VertexId] {
        &self.interior
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn closure_vertex(&self, i: usize) -> &VertexId {
        if i < self.interior.len() {
            &self.interior[i]
        } else {
            &self.boundary[i - self.interior.len()]
        }
    }

    pub fn index_of(&self, x: &VertexId) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn is_interior_index(&self, i: usize) -> bool {
        i < self.interior.len()
    }

    /// Combinatorial BFS level of closure vertex `i` from the seed set.
    pub fn level(&self, i: usize) -> u32 {
        self.levels[i]
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measures[i]
    }

    /// Cached adjacency of interior vertex `i`: `(closure index, weight)`
    /// pairs. Every neighbor of an interior vertex lies in the closure.
    pub fn adjacency(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|(_, w)| w).sum()
    }

    pub fn graph(&self) -> &Arc<WeightedGraph> {
        &self.graph
    }

    pub fn seed(&self) -> &[VertexId] {
        &self.seed
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Graph Laplacian at interior vertex `i` of a dense closure vector.
    pub fn laplacian_at(&self, values: &[f64], i: usize) -> f64 {
        let vx = values[i];
        let mut acc = 0.0;
        for &(j, w) in &self.adj[i] {
            acc += (values[j] - vx) * w;
        }
        acc / self.measures[i]
    }

    /// Descriptor for reports.
    pub fn descriptor(&self) -> String {
        format!(
            "{} ball radius {} ({} metric, {} interior + {} boundary vertices)",
            self.graph.family_tag(),
            self.radius,
            self.metric,
            self.n_interior(),
            self.boundary.len()
        )
    }
}

/// Materialize the ball of radius `radius` around the seed set, together
/// with its one-edge boundary layer. Balls use the strict inequality
/// `d < radius`. The euclidean metric is only available on lattices with
/// a single seed vertex.
pub fn materialize_ball(
    g: &Arc<WeightedGraph>,
    seed: &[VertexId],
    radius: f64,
    metric: Metric,
    budget: usize,
) -> Result<FiniteRegion> {
    if radius < 1.0 {
        return Err(Error::InvalidParameter("ball radius must be >= 1".into()));
    }
    if seed.is_empty() {
        return Err(Error::InvalidParameter("seed set must be non-empty".into()));
    }
    let (mut interior_set, levels_map) = match metric {
        Metric::Combinatorial => {
            let cap = (radius.ceil() as u32).max(1);
            let levels = bfs_levels(g, seed, Some(cap), budget)?;
            let interior: Vec<VertexId> = levels
                .iter()
                .filter(|(_, &l)| (l as f64) < radius)
                .map(|(v, _)| v.clone())
                .collect();
            (interior, levels)
        }
        Metric::Euclidean => {
            if !g.is_lattice() {
                return Err(Error::UnsupportedFamily(
                    "euclidean balls are only defined on lattices".into(),
                ));
            }
            if seed.len() != 1 {
                return Err(Error::InvalidParameter(
                    "euclidean balls require a single seed vertex".into(),
                ));
            }
            let center = seed[0]
                .coords()
                .ok_or_else(|| Error::InvalidParameter("seed is not a lattice vertex".into()))?
                .to_vec();
            let r_sq = radius * radius;
            let inside = |v: &VertexId| -> bool {
                let c = v.coords().unwrap();
                let d: f64 = c
                    .iter()
                    .zip(&center)
                    .map(|(&a, &b)| ((a - b) as f64) * ((a - b) as f64))
                    .sum();
                d < r_sq
            };
            // BFS restricted to the ball; euclidean lattice balls are
            // connected through coordinate-monotone paths.
            let mut levels: HashMap<VertexId, u32> = HashMap::new();
            let mut queue: VecDeque<VertexId> = VecDeque::new();
            levels.insert(seed[0].clone(), 0);
            queue.push_back(seed[0].clone());
            while let Some(x) = queue.pop_front() {
                let lx = levels[&x];
                for (y, _) in g.neighbors(&x)? {
                    if inside(&y) && !levels.contains_key(&y) {
                        if levels.len() >= budget {
                            return Err(Error::BudgetExceeded { budget, visited: levels.len() });
                        }
                        levels.insert(y.clone(), lx + 1);
                        queue.push_back(y);
                    }
                }
            }
            let interior: Vec<VertexId> = levels.keys().cloned().collect();
            (interior, levels)
        }
    };
    interior_set.sort();
    let interior = interior_set;
    let interior_lookup: HashMap<&VertexId, ()> = interior.iter().map(|v| (v, ())).collect();

    let mut boundary: Vec<VertexId> = Vec::new();
    let mut seen_boundary: HashMap<VertexId, u32> = HashMap::new();
    for x in &interior {
        let lx = levels_map.get(x).copied().unwrap_or(0);
        for (y, _) in g.neighbors(x)? {
            if !interior_lookup.contains_key(&y) && !seen_boundary.contains_key(&y) {
                if interior.len() + seen_boundary.len() >= budget {
                    return Err(Error::BudgetExceeded {
                        budget,
                        visited: interior.len() + seen_boundary.len(),
                    });
                }
                let ly = levels_map.get(&y).copied().unwrap_or(lx + 1);
                seen_boundary.insert(y.clone(), ly);
                boundary.push(y);
            }
        }
    }
    boundary.sort();

    let mut index = HashMap::with_capacity(interior.len() + boundary.len());
    for (i, v) in interior.iter().enumerate() {
        index.insert(v.clone(), i);
    }
    for (i, v) in boundary.iter().enumerate() {
        index.insert(v.clone(), interior.len() + i);
    }

    let n_closure = interior.len() + boundary.len();
    let mut levels = Vec::with_capacity(n_closure);
    let mut measures = Vec::with_capacity(n_closure);
    for v in interior.iter().chain(boundary.iter()) {
        let l = levels_map
            .get(v)
            .copied()
            .or_else(|| seen_boundary.get(v).copied())
            .unwrap_or(0);
        levels.push(l);
        let mu = g.measure(v)?;
        if mu <= 0.0 {
            return Err(Error::NonPositiveWeight { vertex: v.to_string(), value: mu });
        }
        measures.push(mu);
    }

    let mut adj = Vec::with_capacity(interior.len());
    for x in &interior {
        let mut row = Vec::new();
        for (y, w) in g.neighbors(x)? {
            if w <= 0.0 {
                return Err(Error::NonPositiveWeight { vertex: y.to_string(), value: w });
            }
            let j = index[&y];
            row.push((j, w));
        }
        adj.push(row);
    }

    Ok(FiniteRegion {
        graph: Arc::clone(g),
        interior,
        boundary,
        index,
        levels,
        measures,
        adj,
        seed: seed.to_vec(),
        metric,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn arc(g: WeightedGraph) -> Arc<WeightedGraph> {
        Arc::new(g)
    }

    #[test]
    fn lattice_neighbors_and_measure() {
        let g = WeightedGraph::lattice(2).unwrap();
        let nb = g.neighbors(&VertexId::lattice(&[0, 0])).unwrap();
        assert_eq!(nb.len(), 4);
        let set: Vec<Vec<i64>> = nb.iter().map(|(v, _)| v.coords().unwrap().to_vec()).collect();
        for expect in [[-1, 0], [1, 0], [0, -1], [0, 1]] {
            assert!(set.contains(&expect.to_vec()));
        }
        assert!(nb.iter().all(|(_, w)| *w == 1.0));
        assert_eq!(g.measure(&VertexId::lattice(&[3, -2])).unwrap(), 4.0);
    }

    #[test]
    fn lattice_dim_one_axis_neighbors() {
        let g = WeightedGraph::lattice(1).unwrap();
        let nb = g.neighbors(&VertexId::lattice(&[5])).unwrap();
        let coords: Vec<i64> = nb.iter().map(|(v, _)| v.coords().unwrap()[0]).collect();
        assert_eq!(coords, vec![4, 6]);
    }

    #[test]
    fn lattice_weighted_degree_is_one() {
        let g = WeightedGraph::lattice(3).unwrap();
        let x = VertexId::lattice(&[7, -1, 2]);
        assert_eq!(g.degree(&x).unwrap(), 6.0);
        assert_eq!(g.weighted_degree(&x).unwrap(), 1.0);
    }

    #[test]
    fn lattice_rejects_dimension_zero() {
        assert!(WeightedGraph::lattice(0).is_err());
    }

    #[test]
    fn binary_tree_shell_cardinalities() {
        let g = WeightedGraph::tree(ShellRule::Const(2), 12).unwrap();
        let profile = g.family_radial_profile(10).unwrap();
        for m in 0..=10u32 {
            assert_eq!(profile.shell_card(m), (2f64).powi(m as i32));
        }
    }

    #[test]
    fn unary_tree_is_half_line() {
        let g = WeightedGraph::tree(ShellRule::Const(1), 10).unwrap();
        let nb = g.neighbors(&VertexId::radial(4, 0)).unwrap();
        assert_eq!(nb.len(), 2);
        let root_nb = g.neighbors(&VertexId::radial(0, 0)).unwrap();
        assert_eq!(root_nb.len(), 1);
    }

    #[test]
    fn tree_outer_inner_degree() {
        let g = WeightedGraph::tree(ShellRule::Const(2), 10).unwrap();
        let seed = [VertexId::radial(0, 0)];
        let x = VertexId::radial(3, 5);
        let (dp, dm) = outer_inner_degree(&g, &seed, &x, 10_000).unwrap();
        assert_eq!((dp, dm), (2.0, 1.0));
    }

    #[test]
    fn tree_rejects_zero_branching() {
        assert!(WeightedGraph::tree(ShellRule::Const(0), 5).is_err());
    }

    #[test]
    fn antitree_convention_b_degrees() {
        // s(m) = m+1, vertex in shell 2: oracle sums give D+ = s(3) = 4,
        // D- = s(1) = 2 under measure 1.
        let g = WeightedGraph::antitree(
            ShellRule::Affine { slope: 1, offset: 1 },
            AntitreeConvention::B,
            10,
        )
        .unwrap();
        let seed = [VertexId::radial(0, 0)];
        let x = VertexId::radial(2, 0);
        let (dp, dm) = outer_inner_degree(&g, &seed, &x, 10_000).unwrap();
        assert_eq!((dp, dm), (4.0, 2.0));
    }

    #[test]
    fn antitree_convention_a_outer_degree() {
        let g = WeightedGraph::antitree(
            ShellRule::Affine { slope: 1, offset: 1 },
            AntitreeConvention::A,
            10,
        )
        .unwrap();
        let seed = [VertexId::radial(0, 0)];
        let x = VertexId::radial(2, 0);
        // mu = s(3)/s(1) = 2, so the oracle realizes D+ = s(1) = 2.
        assert_eq!(g.measure(&x).unwrap(), 2.0);
        let (dp, _dm) = outer_inner_degree(&g, &seed, &x, 10_000).unwrap();
        assert_eq!(dp, 2.0);
        // The nominal convention degrees swap the readings.
        assert_eq!(g.antitree_nominal_degrees(2).unwrap(), (2.0, 4.0));
    }

    #[test]
    fn antitree_constant_sphere_is_path_like() {
        let g = WeightedGraph::antitree(ShellRule::Const(1), AntitreeConvention::B, 10).unwrap();
        let seed = [VertexId::radial(0, 0)];
        for m in 1..=5u32 {
            let (dp, dm) = outer_inner_degree(&g, &seed, &VertexId::radial(m, 0), 1000).unwrap();
            assert_eq!((dp, dm), (1.0, 1.0));
        }
    }

    #[test]
    fn antitree_rejects_bad_root_sphere() {
        assert!(WeightedGraph::antitree(ShellRule::Const(2), AntitreeConvention::B, 5).is_err());
    }

    #[test]
    fn combinatorial_distance_on_lattice_is_l1() {
        let g = WeightedGraph::lattice(2).unwrap();
        let seed = [VertexId::lattice(&[0, 0])];
        let d = combinatorial_distance(&g, &seed, &VertexId::lattice(&[2, -1]), 10_000).unwrap();
        assert_eq!(d, 3);
        assert_eq!(
            combinatorial_distance(&g, &seed, &VertexId::lattice(&[0, 0]), 10_000).unwrap(),
            0
        );
    }

    #[test]
    fn combinatorial_distance_on_tree_is_shell() {
        let g = WeightedGraph::tree(ShellRule::Const(2), 8).unwrap();
        let seed = [VertexId::radial(0, 0)];
        let d = combinatorial_distance(&g, &seed, &VertexId::radial(4, 7), 10_000).unwrap();
        assert_eq!(d, 4);
    }

    #[test]
    fn distance_budget_reports_not_reached() {
        let g = WeightedGraph::lattice(2).unwrap();
        let seed = [VertexId::lattice(&[0, 0])];
        let far = VertexId::lattice(&[500, 500]);
        match combinatorial_distance(&g, &seed, &far, 100) {
            Err(Error::NotReached) => {}
            other => panic!("expected NotReached, got {other:?}"),
        }
    }

    #[test]
    fn path_ball_uses_strict_inequality() {
        let g = arc(WeightedGraph::lattice(1).unwrap());
        let region =
            materialize_ball(&g, &[VertexId::lattice(&[0])], 3.0, Metric::Combinatorial, 1000)
                .unwrap();
        let interior: Vec<i64> = region.interior().iter().map(|v| v.coords().unwrap()[0]).collect();
        assert_eq!(interior, vec![-2, -1, 0, 1, 2]);
        let boundary: Vec<i64> = region.boundary().iter().map(|v| v.coords().unwrap()[0]).collect();
        assert_eq!(boundary, vec![-3, 3]);
    }

    #[test]
    fn euclidean_ball_z2_radius_two() {
        let g = arc(WeightedGraph::lattice(2).unwrap());
        let region =
            materialize_ball(&g, &[VertexId::lattice(&[0, 0])], 2.0, Metric::Euclidean, 1000)
                .unwrap();
        // center + 4 at distance 1 + 4 at distance sqrt(2)
        assert_eq!(region.n_interior(), 9);
    }

    #[test]
    fn tree_ball_counts_shells() {
        let g = arc(WeightedGraph::tree(ShellRule::Const(2), 10).unwrap());
        let region =
            materialize_ball(&g, &[VertexId::radial(0, 0)], 3.0, Metric::Combinatorial, 1000)
                .unwrap();
        assert_eq!(region.n_interior(), 1 + 2 + 4);
        assert_eq!(region.boundary().len(), 8);
    }

    #[test]
    fn euclidean_ball_rejected_off_lattice() {
        let g = arc(WeightedGraph::tree(ShellRule::Const(2), 10).unwrap());
        let err =
            materialize_ball(&g, &[VertexId::radial(0, 0)], 2.0, Metric::Euclidean, 1000);
        assert!(err.is_err());
    }

    #[test]
    fn materialization_budget_is_enforced() {
        let g = arc(WeightedGraph::lattice(3).unwrap());
        let err = materialize_ball(
            &g,
            &[VertexId::lattice(&[0, 0, 0])],
            20.0,
            Metric::Combinatorial,
            500,
        );
        match err {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn lattice_outer_inner_degree_example() {
        let g = WeightedGraph::lattice(2).unwrap();
        let seed = [VertexId::lattice(&[0, 0])];
        let (dp, dm) = outer_inner_degree(&g, &seed, &VertexId::lattice(&[1, 0]), 10_000).unwrap();
        assert_eq!((dp, dm), (0.75, 0.25));
    }

    #[test]
    fn shell_degrees_sum_to_weighted_degree_on_bipartite_families() {
        let g = WeightedGraph::tree(ShellRule::Const(3), 8).unwrap();
        let seed = [VertexId::radial(0, 0)];
        let x = VertexId::radial(2, 4);
        let (dp, dm) = outer_inner_degree(&g, &seed, &x, 10_000).unwrap();
        assert!((dp + dm - g.weighted_degree(&x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn binary_tree_profile() {
        let g = WeightedGraph::tree(ShellRule::Const(2), 10).unwrap();
        let p = extract_radial_profile(&g, &[VertexId::radial(0, 0)], 6, 10_000).unwrap();
        for m in 0..=6u32 {
            assert_eq!(p.d_plus(m), 2.0);
            assert_eq!(p.d_minus(m), if m == 0 { 0.0 } else { 1.0 });
            assert_eq!(p.shell_card(m), (2f64).powi(m as i32));
        }
        assert!(p.detailed_balance_residual() < 1e-12);
    }

    #[test]
    fn lattice_profile_fails_at_shell_two() {
        let g = WeightedGraph::lattice(2).unwrap();
        let err = extract_radial_profile(&g, &[VertexId::lattice(&[0, 0])], 2, 10_000);
        match err {
            Err(Error::NotRadiallySymmetric { shell, .. }) => assert_eq!(shell, 2),
            other => panic!("expected shell-2 symmetry failure, got {other:?}"),
        }
    }

    #[test]
    fn antitree_profile_detailed_balance() {
        for convention in [AntitreeConvention::A, AntitreeConvention::B] {
            let g = WeightedGraph::antitree(
                ShellRule::Affine { slope: 1, offset: 1 },
                convention,
                12,
            )
            .unwrap();
            let p = extract_radial_profile(&g, &[VertexId::radial(0, 0)], 8, 10_000).unwrap();
            assert!(p.detailed_balance_residual() < 1e-12, "convention {convention}");
            let fam = g.family_radial_profile(8).unwrap();
            for m in 0..=8u32 {
                assert!((p.d_plus(m) - fam.d_plus(m)).abs() < 1e-12);
                assert!((p.d_minus(m) - fam.d_minus(m)).abs() < 1e-12);
                assert!((p.shell_measure(m) - fam.shell_measure(m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn family_profile_matches_extraction_for_trees() {
        let g = WeightedGraph::tree(ShellRule::Affine { slope: 1, offset: 1 }, 8).unwrap();
        let p = extract_radial_profile(&g, &[VertexId::radial(0, 0)], 5, 100_000).unwrap();
        let fam = g.family_radial_profile(5).unwrap();
        for m in 0..=5u32 {
            assert_eq!(p.d_plus(m), fam.d_plus(m));
            assert_eq!(p.d_minus(m), fam.d_minus(m));
            assert_eq!(p.shell_card(m), fam.shell_card(m));
        }
    }

    #[test]
    fn symmetry_audit_random_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let graphs = vec![
            WeightedGraph::lattice(2).unwrap(),
            WeightedGraph::tree(ShellRule::Const(2), 12).unwrap(),
            WeightedGraph::antitree(
                ShellRule::Affine { slope: 1, offset: 1 },
                AntitreeConvention::A,
                12,
            )
            .unwrap(),
        ];
        for g in &graphs {
            let g = arc(g.clone());
            let seed = vec![g.origin()];
            let region = materialize_ball(&g, &seed, 6.0, Metric::Combinatorial, 100_000).unwrap();
            for _ in 0..1000 {
                let i = rng.gen_range(0..region.n_interior());
                let x = region.closure_vertex(i).clone();
                let nb = g.neighbors(&x).unwrap();
                let (y, w) = nb[rng.gen_range(0..nb.len())].clone();
                let back = g.neighbors(&y).unwrap();
                let w_back = back
                    .iter()
                    .find(|(z, _)| *z == x)
                    .map(|(_, w)| *w)
                    .expect("edge must be symmetric");
                assert_eq!(w, w_back);
            }
        }
    }

    #[test]
    fn sphere_partition_and_unit_jumps() {
        for g in [
            WeightedGraph::tree(ShellRule::Const(2), 10).unwrap(),
            WeightedGraph::antitree(
                ShellRule::Affine { slope: 1, offset: 1 },
                AntitreeConvention::B,
                10,
            )
            .unwrap(),
        ] {
            let g = arc(g);
            let region =
                materialize_ball(&g, &[g.origin()], 5.0, Metric::Combinatorial, 100_000).unwrap();
            for i in 0..region.n_interior() {
                let li = region.level(i) as i64;
                for &(j, _) in region.adjacency(i) {
                    let lj = region.level(j) as i64;
                    assert!((li - lj).abs() <= 1, "edge jumps more than one shell");
                }
            }
        }
    }

    #[test]
    fn bfs_distance_matches_l1_on_lattices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3] {
            let g = WeightedGraph::lattice(n).unwrap();
            let seed = [g.origin()];
            for _ in 0..20 {
                let coords: Vec<i64> = (0..n).map(|_| rng.gen_range(-4..=4)).collect();
                let l1: u32 = coords.iter().map(|c| c.unsigned_abs() as u32).sum();
                let d = combinatorial_distance(&g, &seed, &VertexId::lattice(&coords), 500_000)
                    .unwrap();
                assert_eq!(d, l1);
            }
        }
    }

    #[test]
    fn region_ordering_is_deterministic() {
        let g = arc(WeightedGraph::lattice(2).unwrap());
        let a = materialize_ball(&g, &[g.origin()], 4.0, Metric::Combinatorial, 10_000).unwrap();
        let b = materialize_ball(&g, &[g.origin()], 4.0, Metric::Combinatorial, 10_000).unwrap();
        assert_eq!(a.interior(), b.interior());
        assert_eq!(a.boundary(), b.boundary());
        assert!(a.interior().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn shell_rule_parsing() {
        assert_eq!(ShellRule::parse("const:2").unwrap(), ShellRule::Const(2));
        assert_eq!(
            ShellRule::parse("affine:1,1").unwrap(),
            ShellRule::Affine { slope: 1, offset: 1 }
        );
        assert!(ShellRule::parse("poly:2").is_err());
        assert!(ShellRule::parse("const:x").is_err());
        assert!(ShellRule::parse("affine:1").is_err());
    }
}
