//! The discrete differential calculus: difference operator, (weighted)
//! graph Laplacian, its radial reduction on weakly symmetric graphs, and
//! the summation identities used as verification oracles.
//!
//! Identity checks return residuals, not booleans; tests apply the
//! tolerances so numeric policy lives in one place.

use crate::error::{Error, Result};
use crate::graph::{FiniteRegion, RadialProfile, VertexId, WeightedGraph};

/// Graph Laplacian at `x`: `(1/mu(x)) * sum_y [f(y) - f(x)] w(x,y)`.
///
/// `f` must be evaluable at `x` and every neighbor; a missing value is an
/// explicit error, never a silent zero.
pub fn laplacian<F>(g: &WeightedGraph, f: F, x: &VertexId) -> Result<f64>
where
    F: Fn(&VertexId) -> Option<f64>,
{
    let fx = f(x).ok_or_else(|| Error::MissingValue { vertex: x.to_string() })?;
    let mut acc = 0.0;
    for (y, w) in g.neighbors(x)? {
        let fy = f(&y).ok_or_else(|| Error::MissingValue { vertex: y.to_string() })?;
        acc += (fy - fx) * w;
    }
    Ok(acc / g.measure(x)?)
}

/// Weighted Laplacian `(1/w(x)) * laplacian(f)(x)`; with `w = rho` this is
/// the density-weighted operator driving every solver here.
pub fn weighted_laplacian<F, W>(g: &WeightedGraph, w: W, f: F, x: &VertexId) -> Result<f64>
where
    F: Fn(&VertexId) -> Option<f64>,
    W: Fn(&VertexId) -> Option<f64>,
{
    let wx = w(x).ok_or_else(|| Error::MissingValue { vertex: x.to_string() })?;
    if wx <= 0.0 {
        return Err(Error::NonPositiveWeight { vertex: x.to_string(), value: wx });
    }
    Ok(laplacian(g, f, x)? / wx)
}

/// Radial Laplacian of a shell function on a weakly symmetric graph:
/// `D+(m)[f(m+1) - f(m)] + D-(m)[f(m-1) - f(m)]` for `m >= 1`, and the
/// one-sided variant `D+(0)[f(1) - f(0)]` at the root shell.
pub fn radial_laplacian<F>(profile: &RadialProfile, f: F, m: u32) -> Result<f64>
where
    F: Fn(u32) -> f64,
{
    if m > profile.max_shell() {
        return Err(Error::InvalidParameter(format!(
            "shell {m} outside profile (max {})",
            profile.max_shell()
        )));
    }
    if m == 0 {
        return Ok(profile.d_plus(0) * (f(1) - f(0)));
    }
    Ok(profile.d_plus(m) * (f(m + 1) - f(m)) + profile.d_minus(m) * (f(m - 1) - f(m)))
}

/// Difference operator along an edge.
pub fn gradient(f_x: f64, f_y: f64) -> f64 {
    f_y - f_x
}

/// Residual of the integration-by-parts identity on a region:
/// `| sum_x Lap(f)(x) g(x) mu(x) + (1/2) sum_{x,y} (grad f)(grad g) w |`,
/// both sums over the region closure. `f` and `g` are dense closure
/// vectors; `f` must vanish on the boundary layer (finite support inside
/// the interior).
pub fn check_integration_by_parts(
    region: &FiniteRegion,
    f: &[f64],
    g: &[f64],
) -> Result<f64> {
    let n_closure = region.n_closure();
    if f.len() != n_closure || g.len() != n_closure {
        return Err(Error::DimensionMismatch { expected: n_closure, got: f.len().min(g.len()) });
    }
    for i in region.n_interior()..n_closure {
        if f[i] != 0.0 {
            return Err(Error::SupportViolation {
                vertex: region.closure_vertex(i).to_string(),
            });
        }
    }
    // sum over the closure: Lap f vanishes outside it because f is
    // supported in the interior. Boundary vertices need the oracle since
    // only interior adjacency is cached; f is zero one edge further out.
    let graph = region.graph().clone();
    let mut lhs = 0.0;
    for i in 0..n_closure {
        let lap = if region.is_interior_index(i) {
            region.laplacian_at(f, i)
        } else {
            let x = region.closure_vertex(i);
            let mut acc = 0.0;
            for (y, w) in graph.neighbors(x)? {
                let fy = region.index_of(&y).map(|j| f[j]).unwrap_or(0.0);
                acc += (fy - f[i]) * w;
            }
            acc / region.measure(i)
        };
        lhs += lap * g[i] * region.measure(i);
    }
    let mut rhs = 0.0;
    // ordered pairs (x, y) with x in closure; edges leaving the closure
    // carry zero gradient of f.
    for i in 0..n_closure {
        if region.is_interior_index(i) {
            for &(j, w) in region.adjacency(i) {
                rhs += (f[j] - f[i]) * (g[j] - g[i]) * w;
            }
        } else {
            let x = region.closure_vertex(i);
            for (y, w) in graph.neighbors(x)? {
                if let Some(j) = region.index_of(&y) {
                    rhs += (f[j] - f[i]) * (g[j] - g[i]) * w;
                }
                // else: both f values are 0 out there, gradient of f = 0
            }
        }
    }
    Ok((lhs + 0.5 * rhs).abs())
}

/// Total edge mass of the closure (ordered pairs), the natural scale for
/// integration-by-parts residuals.
pub fn closure_edge_mass(region: &FiniteRegion) -> f64 {
    let mut total = 0.0;
    for i in 0..region.n_interior() {
        total += region.degree(i);
    }
    // boundary rows: count via oracle-free approximation from the cached
    // interior adjacency (each interior-boundary edge appears once above
    // and once below).
    for i in 0..region.n_interior() {
        for &(j, w) in region.adjacency(i) {
            if !region.is_interior_index(j) {
                total += w;
            }
        }
    }
    total
}

/// Exact neighbor sums of squared euclidean norms on the lattice:
/// `S1 = sum_{y~x} (|y|^2 - |x|^2)` and `S2 = sum_{y~x} (|y|^2 - |x|^2)^2`,
/// computed by enumeration in integer arithmetic.
pub fn lattice_neighbor_sums(x: &VertexId) -> Result<(i64, i64)> {
    let c = x
        .coords()
        .ok_or_else(|| Error::InvalidParameter(format!("{x} is not a lattice vertex")))?;
    let mut s1: i64 = 0;
    let mut s2: i64 = 0;
    for k in 0..c.len() {
        for delta in [-1i64, 1] {
            // |y|^2 - |x|^2 = 2*delta*x_k + 1
            let d = 2 * delta * c[k] + 1;
            s1 += d;
            s2 += d * d;
        }
    }
    Ok((s1, s2))
}

/// Report of the compactly-supported Laplacian bound: per sampled vertex,
/// `lhs = |Lap u(x)| / rho(x)` against
/// `rhs = max|u| * max_{ball(r+2s)}(Deg/rho) * indicator_{ball(r+2s)}(x)`,
/// with closed balls for the maxima.
#[derive(Clone, Debug)]
pub struct SupportBoundReport {
    pub samples: Vec<(VertexId, f64, f64)>,
    pub max_violation: f64,
}

/// Evaluate both sides of the bound for `u` compactly supported in the
/// ball of radius `r` around `o` (combinatorial metric, jump size 1).
/// `sample` lists the vertices to check; each must have its full
/// neighborhood evaluable through `u` (zero off the region).
pub fn compact_support_laplacian_bound<U, R>(
    g: &WeightedGraph,
    rho: R,
    u: U,
    o: &VertexId,
    r: u32,
    sample: &[VertexId],
    budget: usize,
) -> Result<SupportBoundReport>
where
    U: Fn(&VertexId) -> f64,
    R: Fn(&VertexId) -> f64,
{
    let levels = crate::graph::bfs_levels(g, std::slice::from_ref(o), Some(r + 2), budget)?;
    // verify support
    for (v, &l) in &levels {
        if l >= r && u(v) != 0.0 {
            return Err(Error::SupportViolation { vertex: v.to_string() });
        }
    }
    let mut m_max = 0.0f64;
    let mut deg_rho_max = 0.0f64;
    for (v, &l) in &levels {
        if l < r {
            m_max = m_max.max(u(v).abs());
        }
        if l <= r + 2 {
            deg_rho_max = deg_rho_max.max(g.weighted_degree(v)? / rho(v));
        }
    }
    let rhs_cap = m_max * deg_rho_max;
    let mut samples = Vec::with_capacity(sample.len());
    let mut max_violation = 0.0f64;
    for x in sample {
        let lap = laplacian(g, |v| Some(u(v)), x)?;
        let lhs = lap.abs() / rho(x);
        let in_ball = levels.get(x).map(|&l| l <= r + 2).unwrap_or(false);
        let rhs = if in_ball { rhs_cap } else { 0.0 };
        max_violation = max_violation.max(lhs - rhs);
        samples.push((x.clone(), lhs, rhs));
    }
    Ok(SupportBoundReport { samples, max_violation })
}
