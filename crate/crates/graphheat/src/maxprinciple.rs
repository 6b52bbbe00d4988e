//! Weak-maximum-principle verification and the ball-comparison machinery
//! behind the Phragmen-Lindelof argument.
//!
//! The module verifies rather than proves: the conclusion `u <= 0` is
//! asserted only after the hypotheses (subsolution inequality, boundary
//! sign, initial sign) have been numerically confirmed, and hypothesis
//! failures are reported distinctly from conclusion failures.

use std::collections::VecDeque;

use crate::cauchy::{HeatProblem, HeatSolution};
use crate::error::{Error, Result};
use crate::graph::{FiniteRegion, VertexId};

/// Absolute comparison tolerance after scaling data to unit sup-norm.
pub const WMP_TOL: f64 = 1e-10;

/// Space-time data on a region closure over a stored time grid.
pub struct SpaceTimeData<'a> {
    pub region: &'a FiniteRegion,
    pub times: &'a [f64],
    /// `values[k][i]`: time node `k`, closure vertex `i`.
    pub values: &'a [Vec<f64>],
}

impl<'a> SpaceTimeData<'a> {
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

/// How the subsolution hypothesis is established.
pub enum SubsolutionEvidence {
    /// Sampled values of `L u` on interior x times[1..]:
    /// `samples[k-1][i]`.
    Sampled(Vec<Vec<f64>>),
    /// The inequality holds by an externally supplied certificate (used
    /// for differences of a checked subsolution and a certified
    /// barrier); the string records the provenance.
    Certified(String),
}

#[derive(Clone, Debug)]
pub enum HypothesisFailure {
    Subsolution { max: f64, vertex: VertexId, t: f64 },
    Boundary { max: f64, vertex: VertexId, t: f64 },
    Initial { max: f64, vertex: VertexId },
}

#[derive(Clone, Debug)]
pub enum WmpOutcome {
    /// hypotheses and conclusion hold; `max_value` is the largest
    /// interior value on the open time interval (clamped at 0)
    Holds { max_value: f64 },
    /// hypotheses hold but the conclusion fails; diagnostics carry the
    /// argmax and a max-propagation path toward the boundary
    Violated { violation: f64, argmax: (VertexId, f64), max_path: Vec<VertexId> },
    HypothesisFailed(HypothesisFailure),
}

/// Result of a comparison run.
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub tolerance: f64,
    pub scale: f64,
    pub samples: usize,
    pub outcome: WmpOutcome,
}

impl ComparisonReport {
    pub fn holds(&self) -> bool {
        matches!(self.outcome, WmpOutcome::Holds { .. })
    }

    /// Max conclusion violation (0 when the conclusion holds).
    pub fn violation(&self) -> f64 {
        match &self.outcome {
            WmpOutcome::Holds { max_value } => max_value.max(0.0),
            WmpOutcome::Violated { violation, .. } => *violation,
            WmpOutcome::HypothesisFailed(_) => 0.0,
        }
    }
}

/// Verify the weak maximum principle on sampled data: if `L u <= 0` on
/// the interior, `u <= 0` on the boundary layer at all times and at the
/// initial time, then `u <= 0` everywhere. Hypothesis failures short-
/// circuit with the failing hypothesis named; the conclusion is never
/// asserted in that case.
pub fn verify_wmp(
    data: &SpaceTimeData,
    evidence: &SubsolutionEvidence,
    tol: f64,
) -> ComparisonReport {
    let region = data.region;
    let n = region.n_interior();
    let n_closure = region.n_closure();
    let scale = data.sup_norm().max(1e-300);
    let threshold = tol * scale;
    let mut samples = 0usize;

    if let SubsolutionEvidence::Sampled(lu) = evidence {
        let mut worst = f64::NEG_INFINITY;
        let mut where_ = None;
        for (k, row) in lu.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                samples += 1;
                if v > worst {
                    worst = v;
                    where_ = Some((i, k + 1));
                }
            }
        }
        if let Some((i, k)) = where_ {
            if worst > threshold {
                return ComparisonReport {
                    tolerance: threshold,
                    scale,
                    samples,
                    outcome: WmpOutcome::HypothesisFailed(HypothesisFailure::Subsolution {
                        max: worst,
                        vertex: region.closure_vertex(i).clone(),
                        t: data.times[k.min(data.times.len() - 1)],
                    }),
                };
            }
        }
    }

    for (k, slice) in data.values.iter().enumerate() {
        for i in n..n_closure {
            samples += 1;
            if slice[i] > threshold {
                return ComparisonReport {
                    tolerance: threshold,
                    scale,
                    samples,
                    outcome: WmpOutcome::HypothesisFailed(HypothesisFailure::Boundary {
                        max: slice[i],
                        vertex: region.closure_vertex(i).clone(),
                        t: data.times[k],
                    }),
                };
            }
        }
    }
    for i in 0..n {
        samples += 1;
        if data.values[0][i] > threshold {
            return ComparisonReport {
                tolerance: threshold,
                scale,
                samples,
                outcome: WmpOutcome::HypothesisFailed(HypothesisFailure::Initial {
                    max: data.values[0][i],
                    vertex: region.closure_vertex(i).clone(),
                }),
            };
        }
    }

    let mut max_value = f64::NEG_INFINITY;
    let mut argmax = (0usize, 1usize);
    for k in 1..data.values.len() {
        for i in 0..n {
            samples += 1;
            let v = data.values[k][i];
            if v > max_value {
                max_value = v;
                argmax = (i, k);
            }
        }
    }
    if max_value > threshold {
        let (i, k) = argmax;
        let path = trace_max_path(region, &data.values[k], i, threshold);
        ComparisonReport {
            tolerance: threshold,
            scale,
            samples,
            outcome: WmpOutcome::Violated {
                violation: max_value,
                argmax: (region.closure_vertex(i).clone(), data.times[k]),
                max_path: path,
            },
        }
    } else {
        ComparisonReport {
            tolerance: threshold,
            scale,
            samples,
            outcome: WmpOutcome::Holds { max_value },
        }
    }
}

/// An interior positive max of a residual-zero subsolution propagates at
/// its own level along edges; locate a path from the argmax toward the
/// boundary layer through vertices within `slack` of the max value.
/// Returns the (possibly partial) path; its last vertex lies in the
/// boundary layer whenever the level set reaches it.
pub fn trace_max_path(
    region: &FiniteRegion,
    slice: &[f64],
    start: usize,
    slack: f64,
) -> Vec<VertexId> {
    let n = region.n_interior();
    let level = slice[start] - slack.max(1e-300) * 10.0 - 1e-14;
    let mut prev: Vec<Option<usize>> = vec![None; region.n_closure()];
    let mut seen = vec![false; region.n_closure()];
    let mut queue = VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    let mut hit: Option<usize> = None;
    while let Some(i) = queue.pop_front() {
        if i >= n {
            hit = Some(i);
            break;
        }
        for &(j, _) in region.adjacency(i) {
            if !seen[j] && slice[j] >= level {
                seen[j] = true;
                prev[j] = Some(i);
                queue.push_back(j);
            }
        }
    }
    let mut path = Vec::new();
    let mut cursor = hit.or(Some(start));
    while let Some(i) = cursor {
        path.push(region.closure_vertex(i).clone());
        cursor = prev[i];
    }
    path.reverse();
    path
}

/// Convenience wrapper: check a solver output against the hypotheses of
/// the weak maximum principle, using the scheme residual plus the source
/// as the sampled `L u`.
pub fn verify_wmp_solution(
    solution: &HeatSolution,
    problem: &HeatProblem,
    tol: f64,
) -> Result<ComparisonReport> {
    let n = problem.n_interior();
    let times = solution.times();
    let mut lu = Vec::with_capacity(times.len() - 1);
    for k in 1..times.len() {
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let r = solution.scheme_residual(problem, i, k)?;
            row.push(r + problem.source_value(i, times[k]));
        }
        lu.push(row);
    }
    let values: Vec<Vec<f64>> = (0..times.len()).map(|k| solution.slice(k).to_vec()).collect();
    let data = SpaceTimeData { region: &problem.region, times, values: &values };
    Ok(verify_wmp(&data, &SubsolutionEvidence::Sampled(lu), tol))
}

/// Per-radius outcome of the Phragmen-Lindelof comparison.
#[derive(Clone, Debug)]
pub struct RadiusComparison {
    pub radius: u32,
    /// smallest epsilon in the grid for which the sphere and initial
    /// comparisons hold
    pub achieved_eps: Option<f64>,
    /// whether `u <= eps Z` was confirmed inside at that epsilon (the
    /// conclusion the maximum principle guarantees for genuine
    /// subsolution data)
    pub confirmed: bool,
    /// max of `u - eps Z` inside at the achieved epsilon
    pub margin: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PhragmenReport {
    pub per_radius: Vec<RadiusComparison>,
    pub tolerance: f64,
}

/// For each comparison radius and each epsilon (ascending), compare `u`
/// against `eps * Z` on the sphere of that radius and at the initial
/// time; where both comparisons hold, confirm `u <= eps Z` inside.
/// `z` evaluates the barrier at `(closure index, time)` and must arrive
/// certified; an uncertified barrier is refused outright.
pub fn phragmen_lindelof_check<Z>(
    data: &SpaceTimeData,
    z: Z,
    z_certified: bool,
    radii: &[u32],
    eps_grid: &[f64],
    tol: f64,
) -> Result<PhragmenReport>
where
    Z: Fn(usize, f64) -> f64,
{
    if !z_certified {
        return Err(Error::Uncertified(
            "barrier must carry a passing certificate before comparison".into(),
        ));
    }
    let region = data.region;
    let n = region.n_interior();
    let scale = data.sup_norm().max(1e-300);
    let threshold = tol * scale;
    let mut per_radius = Vec::with_capacity(radii.len());
    for &radius in radii {
        let sphere: Vec<usize> =
            (0..region.n_closure()).filter(|&i| region.level(i) == radius).collect();
        let inside: Vec<usize> = (0..n).filter(|&i| region.level(i) < radius).collect();
        if sphere.is_empty() || inside.is_empty() {
            per_radius.push(RadiusComparison {
                radius,
                achieved_eps: None,
                confirmed: false,
                margin: None,
            });
            continue;
        }
        let mut achieved = None;
        let mut confirmed = false;
        let mut margin = None;
        let mut eps_sorted = eps_grid.to_vec();
        eps_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for &eps in &eps_sorted {
            let boundary_ok = sphere.iter().all(|&i| {
                data.times
                    .iter()
                    .enumerate()
                    .all(|(k, &t)| data.values[k][i] <= eps * z(i, t) + threshold)
            });
            if !boundary_ok {
                continue;
            }
            let t0 = data.times[0];
            let initial_ok =
                inside.iter().all(|&i| data.values[0][i] <= eps * z(i, t0) + threshold);
            if !initial_ok {
                continue;
            }
            let mut worst = f64::NEG_INFINITY;
            for (k, &t) in data.times.iter().enumerate().skip(1) {
                for &i in &inside {
                    worst = worst.max(data.values[k][i] - eps * z(i, t));
                }
            }
            achieved = Some(eps);
            confirmed = worst <= threshold;
            margin = Some(worst);
            break;
        }
        per_radius.push(RadiusComparison { radius, achieved_eps: achieved, confirmed, margin });
    }
    Ok(PhragmenReport { per_radius, tolerance: threshold })
}
