//! Explicit supersolution (barrier) families, parameter-threshold
//! selection, and numeric certification of the defining inequalities
//! `rho dZ/dt - Lap Z >= 0` (parabolic) and `Lap Z <= rho` /
//! `Lap h <= -rho` (elliptic).
//!
//! Every family carries a closed-form time derivative of `log Z`;
//! certification never differentiates numerically in time. Evaluation is
//! in log space throughout: `Lap Z / Z` is computed from log-differences,
//! so barriers reaching `e^{200+}` stay finite, and raw residuals are
//! compared through their logarithms.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{FiniteRegion, Metric, RadialProfile, VertexId, WeightedGraph};
use crate::linalg::{conjugate_gradient, Cholesky, CsrMatrix, SymMatrix};

/// Relative certification tolerance.
pub const CERT_TOL: f64 = 1e-12;
/// Geometric search cap for implicit-constant thresholds.
pub const Q_SEARCH_CAP: f64 = 1e6;

/// Density families. The lower-bound (uniqueness side) families are
/// `OuterDegreeScaled` and `LogPower`; `PowerDecay` appears on both
/// sides with its metric spelled out.
#[derive(Clone, Debug)]
pub enum DensitySpec {
    /// `coeff * (1 + d)^(-alpha)` with `d` the metric distance
    PowerDecay { coeff: f64, alpha: f64, metric: Metric },
    /// `rho0 * D+(x) / (r+1)`
    OuterDegreeScaled { rho0: f64 },
    /// `(D+(x) / (r+1)) * exp(rho0 * log^beta(r+2))`
    LogPower { rho0: f64, beta: f64 },
    Constant { value: f64 },
}

impl DensitySpec {
    /// Radial evaluation on a profiled shell.
    pub fn eval_radial(&self, profile: &RadialProfile, m: u32) -> f64 {
        let r = m as f64;
        match self {
            DensitySpec::PowerDecay { coeff, alpha, .. } => coeff * (1.0 + r).powf(-alpha),
            DensitySpec::OuterDegreeScaled { rho0 } => rho0 * profile.d_plus(m) / (r + 1.0),
            DensitySpec::LogPower { rho0, beta } => {
                profile.d_plus(m) / (r + 1.0) * (rho0 * (r + 2.0).ln().powf(*beta)).exp()
            }
            DensitySpec::Constant { value } => *value,
        }
    }

    /// Per-interior-vertex evaluation on a region.
    pub fn eval_on_region(&self, region: &FiniteRegion) -> Result<Vec<f64>> {
        let n = region.n_interior();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let v = match self {
                DensitySpec::PowerDecay { coeff, alpha, metric } => {
                    let d = match metric {
                        Metric::Combinatorial => region.level(i) as f64,
                        Metric::Euclidean => region
                            .closure_vertex(i)
                            .norm_sq()
                            .ok_or_else(|| {
                                Error::UnsupportedFamily(
                                    "euclidean density on a non-lattice vertex".into(),
                                )
                            })?
                            .sqrt(),
                    };
                    coeff * (1.0 + d).powf(-alpha)
                }
                DensitySpec::OuterDegreeScaled { rho0 } => {
                    let r = region.level(i) as f64;
                    rho0 * outer_degree_at(region, i) / (r + 1.0)
                }
                DensitySpec::LogPower { rho0, beta } => {
                    let r = region.level(i) as f64;
                    outer_degree_at(region, i) / (r + 1.0)
                        * (rho0 * (r + 2.0).ln().powf(*beta)).exp()
                }
                DensitySpec::Constant { value } => *value,
            };
            if v <= 0.0 {
                return Err(Error::NonPositiveWeight {
                    vertex: region.closure_vertex(i).to_string(),
                    value: v,
                });
            }
            out.push(v);
        }
        Ok(out)
    }

    /// `(c0, alpha)` when this density has the power-decay upper-bound
    /// form required on the non-uniqueness side.
    pub fn upper_bound_power(&self) -> Option<(f64, f64)> {
        match self {
            DensitySpec::PowerDecay { coeff, alpha, .. } => Some((*coeff, *alpha)),
            DensitySpec::Constant { value } => Some((*value, 0.0)),
            _ => None,
        }
    }

    pub fn tag(&self) -> String {
        match self {
            DensitySpec::PowerDecay { coeff, alpha, metric } => {
                format!("power_decay({coeff},{alpha},{metric})")
            }
            DensitySpec::OuterDegreeScaled { rho0 } => format!("outer_degree_scaled({rho0})"),
            DensitySpec::LogPower { rho0, beta } => format!("log_power({rho0},{beta})"),
            DensitySpec::Constant { value } => format!("constant({value})"),
        }
    }
}

fn outer_degree_at(region: &FiniteRegion, i: usize) -> f64 {
    let level = region.level(i);
    let mut up = 0.0;
    for &(j, w) in region.adjacency(i) {
        if region.level(j) == level + 1 {
            up += w;
        }
    }
    up / region.measure(i)
}

/// Evaluation site of a barrier: combinatorial radius or squared
/// euclidean norm.
#[derive(Clone, Copy, Debug)]
pub enum EvalSite {
    Radial(f64),
    Lattice { norm_sq: f64 },
}

/// Static (elliptic) barrier families.
#[derive(Clone, Debug)]
pub enum StaticBarrier {
    /// `K * log(log(|x|^2 + 4))` on the 2-d lattice
    Z2LogLog { k: f64 },
    /// `K r + 1` on anti-trees
    AntitreeLinear { k: f64 },
}

impl StaticBarrier {
    pub fn eval(&self, site: EvalSite) -> f64 {
        match (self, site) {
            (StaticBarrier::Z2LogLog { k }, EvalSite::Lattice { norm_sq }) => {
                k * (norm_sq + 4.0).ln().ln()
            }
            (StaticBarrier::AntitreeLinear { k }, EvalSite::Radial(r)) => k * r + 1.0,
            _ => f64::NAN,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            StaticBarrier::Z2LogLog { .. } => "z2_loglog",
            StaticBarrier::AntitreeLinear { .. } => "antitree_linear",
        }
    }
}

/// Parametric space-time barrier families, evaluated through
/// `log Z(site, t)` and its closed-form time derivative.
#[derive(Clone, Debug)]
pub enum BarrierForm {
    /// `exp(A (1 + Q t) (r+1))`
    Thm34 { a: f64, q: f64 },
    /// `exp(A (1 + Q t) (r+1) log^beta(r+1))`
    Thm35 { a: f64, q: f64, beta: f64 },
    /// `exp(A (1 + Q t) (1 + |x|^2)^beta)`
    LatticeSub2 { a: f64, q: f64, beta: f64 },
    /// `exp(A (1 + Q t) log^2(2 + |x|^2))`
    LatticeCrit { a: f64, q: f64 },
    /// `exp(gamma t) * Z(x)` for a certified static barrier
    Lifted { gamma: f64, base: StaticBarrier },
}

#[derive(Clone, Debug)]
pub struct BarrierSpec {
    pub form: BarrierForm,
    pub metric: Metric,
}

impl BarrierSpec {
    pub fn log_z(&self, site: EvalSite, t: f64) -> f64 {
        match (&self.form, site) {
            (BarrierForm::Thm34 { a, q }, EvalSite::Radial(r)) => a * (1.0 + q * t) * (r + 1.0),
            (BarrierForm::Thm35 { a, q, beta }, EvalSite::Radial(r)) => {
                a * (1.0 + q * t) * (r + 1.0) * (r + 1.0).ln().powf(*beta)
            }
            (BarrierForm::LatticeSub2 { a, q, beta }, EvalSite::Lattice { norm_sq }) => {
                a * (1.0 + q * t) * (1.0 + norm_sq).powf(*beta)
            }
            (BarrierForm::LatticeCrit { a, q }, EvalSite::Lattice { norm_sq }) => {
                let l = (2.0 + norm_sq).ln();
                a * (1.0 + q * t) * l * l
            }
            (BarrierForm::Lifted { gamma, base }, site) => gamma * t + base.eval(site).ln(),
            _ => f64::NAN,
        }
    }

    /// Closed-form `d/dt log Z`.
    pub fn dt_log_z(&self, site: EvalSite, _t: f64) -> f64 {
        match (&self.form, site) {
            (BarrierForm::Thm34 { a, q }, EvalSite::Radial(r)) => a * q * (r + 1.0),
            (BarrierForm::Thm35 { a, q, beta }, EvalSite::Radial(r)) => {
                a * q * (r + 1.0) * (r + 1.0).ln().powf(*beta)
            }
            (BarrierForm::LatticeSub2 { a, q, beta }, EvalSite::Lattice { norm_sq }) => {
                a * q * (1.0 + norm_sq).powf(*beta)
            }
            (BarrierForm::LatticeCrit { a, q }, EvalSite::Lattice { norm_sq }) => {
                let l = (2.0 + norm_sq).ln();
                a * q * l * l
            }
            (BarrierForm::Lifted { gamma, .. }, _) => *gamma,
            _ => f64::NAN,
        }
    }

    pub fn family_tag(&self) -> &'static str {
        match &self.form {
            BarrierForm::Thm34 { .. } => "thm34",
            BarrierForm::Thm35 { .. } => "thm35",
            BarrierForm::LatticeSub2 { .. } => "lattice_sub2",
            BarrierForm::LatticeCrit { .. } => "lattice_crit",
            BarrierForm::Lifted { .. } => "lifted",
        }
    }

    pub fn q(&self) -> Option<f64> {
        match &self.form {
            BarrierForm::Thm34 { q, .. }
            | BarrierForm::Thm35 { q, .. }
            | BarrierForm::LatticeSub2 { q, .. }
            | BarrierForm::LatticeCrit { q, .. } => Some(*q),
            BarrierForm::Lifted { .. } => None,
        }
    }

    pub fn with_q(&self, q_new: f64) -> Self {
        let form = match &self.form {
            BarrierForm::Thm34 { a, .. } => BarrierForm::Thm34 { a: *a, q: q_new },
            BarrierForm::Thm35 { a, beta, .. } => {
                BarrierForm::Thm35 { a: *a, q: q_new, beta: *beta }
            }
            BarrierForm::LatticeSub2 { a, beta, .. } => {
                BarrierForm::LatticeSub2 { a: *a, q: q_new, beta: *beta }
            }
            BarrierForm::LatticeCrit { a, .. } => BarrierForm::LatticeCrit { a: *a, q: q_new },
            BarrierForm::Lifted { gamma, base } => {
                BarrierForm::Lifted { gamma: *gamma, base: base.clone() }
            }
        };
        BarrierSpec { form, metric: self.metric }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match &self.form {
            BarrierForm::Thm34 { a, q } => vec![("a", *a), ("q", *q)],
            BarrierForm::Thm35 { a, q, beta } => vec![("a", *a), ("q", *q), ("beta", *beta)],
            BarrierForm::LatticeSub2 { a, q, beta } => {
                vec![("a", *a), ("q", *q), ("beta", *beta)]
            }
            BarrierForm::LatticeCrit { a, q } => vec![("a", *a), ("q", *q)],
            BarrierForm::Lifted { gamma, base } => {
                let k = match base {
                    StaticBarrier::Z2LogLog { k } => *k,
                    StaticBarrier::AntitreeLinear { k } => *k,
                };
                vec![("gamma", *gamma), ("k", k)]
            }
        }
    }
}

/// Explicit threshold of the exponential-radial family:
/// `Q = (e^{2A} - 1) / (rho0 A)`.
pub fn thm34_q_threshold(a: f64, rho0: f64) -> f64 {
    ((2.0 * a).exp() - 1.0) / (rho0 * a)
}

/// Exponential-in-radius barrier with linear time ramp. `q = None`
/// selects the explicit threshold from `rho0`.
pub fn barrier_thm34(a: f64, q: Option<f64>, rho0: f64) -> Result<BarrierSpec> {
    if a <= 0.0 || rho0 <= 0.0 {
        return Err(Error::InvalidParameter("requires a > 0 and rho0 > 0".into()));
    }
    let q = match q {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::InvalidParameter(format!("q must be positive, got {v}"))),
        None => thm34_q_threshold(a, rho0),
    };
    Ok(BarrierSpec { form: BarrierForm::Thm34 { a, q }, metric: Metric::Combinatorial })
}

/// Radius-times-log-power barrier. Admissible only for `0 < beta <= 1`
/// and `0 < a <= rho0/2`; the threshold constant is implicit, so `q` is
/// normally found by certified search.
pub fn barrier_thm35(a: f64, q: f64, beta: f64, rho0: f64) -> Result<BarrierSpec> {
    if !(0.0 < beta && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta must be in (0, 1], got {beta}")));
    }
    if a <= 0.0 || a > rho0 / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "a must satisfy 0 < a <= rho0/2 = {}, got {a}",
            rho0 / 2.0
        )));
    }
    if q <= 0.0 {
        return Err(Error::InvalidParameter("q must be positive".into()));
    }
    Ok(BarrierSpec { form: BarrierForm::Thm35 { a, q, beta }, metric: Metric::Combinatorial })
}

/// Lattice barrier for density decay exponent `alpha` in [0, 2]: the
/// subcritical power form with `beta = min(1/2, 1 - alpha/2)`, switching
/// to the squared-log form at `alpha = 2`.
pub fn barrier_lattice(alpha: f64, a: f64, q: f64) -> Result<BarrierSpec> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must be in [0, 2], got {alpha}")));
    }
    if a <= 0.0 || q <= 0.0 {
        return Err(Error::InvalidParameter("requires a > 0 and q > 0".into()));
    }
    let form = if alpha < 2.0 {
        let beta = 0.5f64.min(1.0 - alpha / 2.0);
        BarrierForm::LatticeSub2 { a, q, beta }
    } else {
        BarrierForm::LatticeCrit { a, q }
    };
    Ok(BarrierSpec { form, metric: Metric::Euclidean })
}

/// Exact Laplacian of `z -> log(log(4 + |z|^2))` at a 2-d lattice point,
/// by direct neighbor evaluation.
pub fn z2_loglog_delta(x: &[i64]) -> f64 {
    let phi = |s: f64| (4.0 + s).ln().ln();
    let norm_sq = |c: &[i64]| -> f64 { c.iter().map(|&v| (v as f64) * (v as f64)).sum() };
    let s0 = norm_sq(x);
    let mut acc = 0.0;
    for k in 0..x.len() {
        for delta in [-1i64, 1] {
            let mut y = x.to_vec();
            y[k] += delta;
            acc += phi(norm_sq(&y)) - phi(s0);
        }
    }
    acc / (2.0 * x.len() as f64)
}

/// Auto-scaled double-log barrier on the 2-d lattice. The returned `k`
/// realizes the two-regime argument on the region: outside the radius
/// where the double-log Laplacian turns negative any positive `k` works;
/// inside, `k` is shrunk until `k * max|Lap| <= min rho`.
pub fn barrier_z2_static(
    k: Option<f64>,
    rho: &[f64],
    region: &FiniteRegion,
) -> Result<(StaticBarrier, f64)> {
    if region.graph().lattice_dim() != Some(2) {
        return Err(Error::UnsupportedFamily(
            "double-log barrier is defined on the 2-d lattice".into(),
        ));
    }
    let n = region.n_interior();
    if rho.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.len() });
    }
    let k = match k {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::InvalidParameter(format!("k must be positive, got {v}"))),
        None => {
            // core radius: largest |x| with nonnegative double-log
            // Laplacian on the region
            let mut r0_sq = 0.0f64;
            for i in 0..n {
                let v = region.closure_vertex(i);
                if z2_loglog_delta(v.coords().unwrap()) >= 0.0 {
                    r0_sq = r0_sq.max(v.norm_sq().unwrap());
                }
            }
            let mut max_lap = 0.0f64;
            let mut min_rho = f64::INFINITY;
            for i in 0..n {
                let v = region.closure_vertex(i);
                if v.norm_sq().unwrap() <= r0_sq {
                    max_lap = max_lap.max(z2_loglog_delta(v.coords().unwrap()).abs());
                    min_rho = min_rho.min(rho[i]);
                }
            }
            if max_lap == 0.0 {
                1.0
            } else {
                min_rho / max_lap
            }
        }
    };
    Ok((StaticBarrier::Z2LogLog { k }, k))
}

/// Linear radial anti-tree barrier `K r + 1`.
pub fn barrier_antitree(k: f64, graph: &WeightedGraph) -> Result<StaticBarrier> {
    if !graph.is_antitree() {
        return Err(Error::UnsupportedFamily("linear barrier is defined on anti-trees".into()));
    }
    if k <= 0.0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    Ok(StaticBarrier::AntitreeLinear { k })
}

/// Per-shell radial Laplacian of the linear anti-tree barrier under the
/// convention's nominal degrees: `K * (D+ - D-)`.
pub fn antitree_linear_delta(graph: &WeightedGraph, k: f64, m: u32) -> Result<f64> {
    let (dp, dm) = graph.antitree_nominal_degrees(m)?;
    Ok(k * (dp - dm))
}

/// Direction of an elliptic certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EllipticDirection {
    /// `Lap Z <= rho`
    BarrierBelowDensity,
    /// `Lap h <= -rho`
    PotentialDecay,
}

/// Elliptic certificate: max signed residual of the direction inequality
/// over the checked sites, plus the minimum of the function (the `c0`
/// needed for time lifts).
#[derive(Clone, Debug)]
pub struct EllipticReport {
    pub direction: EllipticDirection,
    pub pass: bool,
    pub max_residual: f64,
    pub max_abs_residual: f64,
    pub argmax: String,
    pub min_value: f64,
    pub tolerance: f64,
    pub sites: usize,
}

/// Certify an elliptic inequality on the interior of a region from dense
/// closure values of the function.
pub fn certify_elliptic_region(
    region: &FiniteRegion,
    values: &[f64],
    rho: &[f64],
    direction: EllipticDirection,
) -> Result<EllipticReport> {
    let n = region.n_interior();
    if values.len() != region.n_closure() || rho.len() != n {
        return Err(Error::DimensionMismatch { expected: region.n_closure(), got: values.len() });
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_abs = 0.0f64;
    let mut argmax = String::new();
    let mut min_value = f64::INFINITY;
    let mut pass = true;
    for i in 0..n {
        let lap = region.laplacian_at(values, i);
        let residual = match direction {
            EllipticDirection::BarrierBelowDensity => lap - rho[i],
            EllipticDirection::PotentialDecay => lap + rho[i],
        };
        let scale = lap.abs() + rho[i];
        if residual > CERT_TOL * scale {
            pass = false;
        }
        if residual > worst {
            worst = residual;
            argmax = region.closure_vertex(i).to_string();
        }
        worst_abs = worst_abs.max(residual.abs());
        min_value = min_value.min(values[i]);
    }
    Ok(EllipticReport {
        direction,
        pass,
        max_residual: worst,
        max_abs_residual: worst_abs,
        argmax,
        min_value,
        tolerance: CERT_TOL,
        sites: n,
    })
}

/// Certify an elliptic inequality on shells `min_shell..=max_shell` of a
/// radial profile from shell values `h[0..=max_shell+1]`.
pub fn certify_elliptic_radial(
    profile: &RadialProfile,
    h: &[f64],
    rho: &[f64],
    min_shell: u32,
    max_shell: u32,
    direction: EllipticDirection,
) -> Result<EllipticReport> {
    if h.len() <= max_shell as usize + 1 || rho.len() <= max_shell as usize {
        return Err(Error::DimensionMismatch { expected: max_shell as usize + 2, got: h.len() });
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_abs = 0.0f64;
    let mut argmax = String::new();
    let mut min_value = f64::INFINITY;
    let mut pass = true;
    for m in min_shell..=max_shell {
        let lap = crate::calculus::radial_laplacian(profile, |r| h[r as usize], m)?;
        let residual = match direction {
            EllipticDirection::BarrierBelowDensity => lap - rho[m as usize],
            EllipticDirection::PotentialDecay => lap + rho[m as usize],
        };
        let scale = lap.abs() + rho[m as usize];
        if residual > CERT_TOL * scale {
            pass = false;
        }
        if residual > worst {
            worst = residual;
            argmax = format!("shell {m}");
        }
        worst_abs = worst_abs.max(residual.abs());
        min_value = min_value.min(h[m as usize]);
    }
    Ok(EllipticReport {
        direction,
        pass,
        max_residual: worst,
        max_abs_residual: worst_abs,
        argmax,
        min_value,
        tolerance: CERT_TOL,
        sites: (max_shell - min_shell + 1) as usize,
    })
}

/// Time-lift a certified static barrier: `exp(gamma t) Z(x)` is a
/// parabolic supersolution provided `Lap Z <= rho` holds, `Z >= c0 > 0`,
/// and `gamma > 1/c0` strictly.
pub fn lift_static(
    base: StaticBarrier,
    gamma: f64,
    certificate: &EllipticReport,
    metric: Metric,
) -> Result<BarrierSpec> {
    if !certificate.pass || certificate.direction != EllipticDirection::BarrierBelowDensity {
        return Err(Error::Uncertified(
            "static barrier must carry a passing elliptic certificate".into(),
        ));
    }
    let c0 = certificate.min_value;
    if c0 <= 0.0 {
        return Err(Error::InvalidParameter(
            "static barrier must be bounded below by c0 > 0".into(),
        ));
    }
    if gamma <= 1.0 / c0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must exceed 1/c0 = {} strictly, got {gamma}",
            1.0 / c0
        )));
    }
    Ok(BarrierSpec { form: BarrierForm::Lifted { gamma, base }, metric })
}

/// Certification domain of a parabolic barrier.
pub enum CertifyDomain<'a> {
    /// All interior vertices of a materialized region.
    Region(&'a FiniteRegion),
    /// Shells `min_shell..=max_shell` of a weakly symmetric profile;
    /// the profile must extend one shell past `max_shell`.
    Radial { profile: &'a RadialProfile, min_shell: u32, max_shell: u32 },
}

impl<'a> CertifyDomain<'a> {
    fn describe(&self) -> String {
        match self {
            CertifyDomain::Region(r) => r.descriptor(),
            CertifyDomain::Radial { min_shell, max_shell, .. } => {
                format!("shells {min_shell}..={max_shell}")
            }
        }
    }
}

/// Parabolic certificate report.
#[derive(Clone, Debug)]
pub struct ParabolicReport {
    pub family: String,
    pub params: Vec<(&'static str, f64)>,
    pub domain: String,
    pub pass: bool,
    /// min over sites and time nodes of the normalized residual
    /// `(rho dt log Z - Lap Z / Z) / (|rho dt log Z| + |Lap Z / Z|)`
    pub min_normalized_residual: f64,
    pub argmin_site: String,
    pub argmin_t: f64,
    pub tolerance: f64,
    pub sites: usize,
}

struct ResidualScan {
    pass: bool,
    min_norm: f64,
    argmin_site: String,
    argmin_t: f64,
    worst_raw_key: f64,
    raw_argmin: Option<(String, f64)>,
}

impl ResidualScan {
    fn new() -> Self {
        ResidualScan {
            pass: true,
            min_norm: f64::INFINITY,
            argmin_site: String::new(),
            argmin_t: 0.0,
            worst_raw_key: f64::NEG_INFINITY,
            raw_argmin: None,
        }
    }

    /// Record one site/time residual: `q = rho dt(logZ) - LapZ/Z`, with
    /// `log_here = log Z` for raw-size comparison of violations.
    fn record(&mut self, site_name: &str, t: f64, q_val: f64, scale: f64, log_here: f64) {
        let normalized = if scale > 0.0 { q_val / scale } else { 0.0 };
        if normalized < -CERT_TOL {
            self.pass = false;
            let raw_key = log_here + (-q_val).ln();
            if raw_key > self.worst_raw_key {
                self.worst_raw_key = raw_key;
                self.raw_argmin = Some((site_name.to_string(), t));
            }
        }
        if normalized < self.min_norm {
            self.min_norm = normalized;
            self.argmin_site = site_name.to_string();
            self.argmin_t = t;
        }
    }

    fn finish(
        self,
        spec: &BarrierSpec,
        domain: &CertifyDomain,
        sites: usize,
    ) -> ParabolicReport {
        let (argmin_site, argmin_t) = match self.raw_argmin {
            Some((s, t)) => (s, t),
            None => (self.argmin_site, self.argmin_t),
        };
        ParabolicReport {
            family: spec.family_tag().to_string(),
            params: spec.params(),
            domain: domain.describe(),
            pass: self.pass,
            min_normalized_residual: self.min_norm,
            argmin_site,
            argmin_t,
            tolerance: CERT_TOL,
            sites,
        }
    }
}

/// Certify `rho dZ/dt - Lap Z >= 0` on the domain at uniformly spaced
/// time nodes over `[0, t_end]`. Pass/fail is decided per site against
/// the local residual scale; the reported argmin is raw-residual-ordered
/// through logarithms, so overflow cannot occur.
pub fn certify_parabolic(
    spec: &BarrierSpec,
    rho: &DensitySpec,
    domain: &CertifyDomain,
    t_end: f64,
    time_nodes: usize,
) -> Result<ParabolicReport> {
    if time_nodes < 2 {
        return Err(Error::InvalidParameter("need at least two time nodes".into()));
    }
    let times: Vec<f64> =
        (0..time_nodes).map(|k| t_end * (k as f64) / ((time_nodes - 1) as f64)).collect();
    let mut scan = ResidualScan::new();
    let mut sites = 0usize;

    match domain {
        CertifyDomain::Radial { profile, min_shell, max_shell } => {
            if profile.max_shell() <= *max_shell {
                return Err(Error::InvalidParameter(format!(
                    "profile must extend past shell {max_shell}"
                )));
            }
            for m in *min_shell..=*max_shell {
                sites += 1;
                let site = EvalSite::Radial(m as f64);
                let up = EvalSite::Radial(m as f64 + 1.0);
                let down = EvalSite::Radial(m as f64 - 1.0);
                let rho_x = rho.eval_radial(profile, m);
                let name = format!("shell {m}");
                for &t in &times {
                    let log_here = spec.log_z(site, t);
                    let mut lap_over_z =
                        profile.d_plus(m) * ((spec.log_z(up, t) - log_here).exp() - 1.0);
                    if m >= 1 {
                        lap_over_z +=
                            profile.d_minus(m) * ((spec.log_z(down, t) - log_here).exp() - 1.0);
                    }
                    let dt_log = spec.dt_log_z(site, t);
                    let q_val = rho_x * dt_log - lap_over_z;
                    let scale = (rho_x * dt_log).abs() + lap_over_z.abs();
                    scan.record(&name, t, q_val, scale, log_here);
                }
            }
        }
        CertifyDomain::Region(region) => {
            let rho_values = rho.eval_on_region(region)?;
            let site_of = |v: &VertexId, level: u32| -> Result<EvalSite> {
                match spec.metric {
                    Metric::Euclidean => v
                        .norm_sq()
                        .map(|norm_sq| EvalSite::Lattice { norm_sq })
                        .ok_or_else(|| {
                            Error::UnsupportedFamily(
                                "lattice barrier on a non-lattice vertex".into(),
                            )
                        }),
                    Metric::Combinatorial => Ok(EvalSite::Radial(level as f64)),
                }
            };
            for i in 0..region.n_interior() {
                sites += 1;
                let v = region.closure_vertex(i);
                let site = site_of(v, region.level(i))?;
                let mu = region.measure(i);
                let mut neighbor_sites = Vec::with_capacity(region.adjacency(i).len());
                for &(j, w) in region.adjacency(i) {
                    let y = region.closure_vertex(j);
                    neighbor_sites.push((w / mu, site_of(y, region.level(j))?));
                }
                let name = v.to_string();
                for &t in &times {
                    let log_here = spec.log_z(site, t);
                    let mut lap_over_z = 0.0;
                    for &(w_mu, nsite) in &neighbor_sites {
                        lap_over_z += w_mu * ((spec.log_z(nsite, t) - log_here).exp() - 1.0);
                    }
                    let dt_log = spec.dt_log_z(site, t);
                    let q_val = rho_values[i] * dt_log - lap_over_z;
                    let scale = (rho_values[i] * dt_log).abs() + lap_over_z.abs();
                    scan.record(&name, t, q_val, scale, log_here);
                }
            }
        }
    }
    Ok(scan.finish(spec, domain, sites))
}

/// Scan a geometric grid of ramp rates (factor 2, capped) and return the
/// minimal one whose certificate passes, with that certificate. Each
/// candidate is checked on `[0, 1/q]`.
pub fn search_minimal_q(
    spec_template: &BarrierSpec,
    rho: &DensitySpec,
    domain: &CertifyDomain,
    time_nodes: usize,
) -> Result<(f64, ParabolicReport)> {
    let mut q = 1.0;
    while q <= Q_SEARCH_CAP {
        let candidate = spec_template.with_q(q);
        let report = certify_parabolic(&candidate, rho, domain, 1.0 / q, time_nodes)?;
        if report.pass {
            return Ok((q, report));
        }
        q *= 2.0;
    }
    Err(Error::InvalidParameter(format!(
        "no ramp rate up to {Q_SEARCH_CAP} certifies the family"
    )))
}

/// Outcome of the automated compact-core enlargement: the ramp rate that
/// certifies shells >= 1, and, when attainable, the enlarged rate under
/// which the seed shell passes too.
#[derive(Clone, Debug)]
pub struct CoreAdjustedCertificate {
    pub interior_q: f64,
    pub interior_report: ParabolicReport,
    /// rate at which the seed shell also certifies, if one exists below
    /// the search cap
    pub full_q: Option<f64>,
    pub full_report: Option<ParabolicReport>,
}

/// Certify on shells >= 1 at the given rate (searching upward if it
/// fails), then enlarge the rate geometrically until the seed shell
/// passes as well. The seed shell of the log-power family never
/// certifies (its time derivative vanishes there against a positive
/// Laplacian); `full_q = None` records that honestly.
pub fn certify_with_core_adjustment(
    spec: &BarrierSpec,
    rho: &DensitySpec,
    profile: &RadialProfile,
    max_shell: u32,
    time_nodes: usize,
) -> Result<CoreAdjustedCertificate> {
    let interior = CertifyDomain::Radial { profile, min_shell: 1, max_shell };
    let q0 = spec.q().ok_or_else(|| {
        Error::InvalidParameter("core adjustment applies to ramped families".into())
    })?;
    let first = certify_parabolic(spec, rho, &interior, 1.0 / q0, time_nodes)?;
    let (interior_q, interior_report) = if first.pass {
        (q0, first)
    } else {
        search_minimal_q(spec, rho, &interior, time_nodes)?
    };
    let full = CertifyDomain::Radial { profile, min_shell: 0, max_shell };
    let mut q = interior_q;
    while q <= Q_SEARCH_CAP {
        let candidate = spec.with_q(q);
        let report = certify_parabolic(&candidate, rho, &full, 1.0 / q, time_nodes)?;
        if report.pass {
            return Ok(CoreAdjustedCertificate {
                interior_q,
                interior_report,
                full_q: Some(q),
                full_report: Some(report),
            });
        }
        q *= 2.0;
    }
    Ok(CoreAdjustedCertificate { interior_q, interior_report, full_q: None, full_report: None })
}

/// Tail summability report of the radial flux construction.
#[derive(Clone, Debug)]
pub struct FluxTailReport {
    /// last included term `S(M)/W(M)`
    pub last_term: f64,
    /// estimated remainder of the untruncated series
    pub estimated_remainder: f64,
    /// fitted decay exponent of the terms (when polynomial)
    pub fitted_exponent: Option<f64>,
}

/// Solve the radial Poisson equation in flux form:
/// `h(m) = sum_{k >= m} S(k)/W(k)` with `W(m) = D+(m) * shell_measure(m)`
/// and `S(m)` the cumulative density mass through shell `m`. The
/// telescoping makes `Lap h = -rho` exact on interior shells. Errors
/// when the flux terms are not summable (the regime in which no such
/// potential exists).
pub fn construct_radial_h(
    profile: &RadialProfile,
    rho: &[f64],
    max_shell: u32,
    tail_tol: f64,
) -> Result<(Vec<f64>, FluxTailReport)> {
    let m_len = max_shell as usize + 1;
    if profile.max_shell() < max_shell || rho.len() < m_len {
        return Err(Error::DimensionMismatch { expected: m_len, got: rho.len() });
    }
    let mut terms = Vec::with_capacity(m_len);
    let mut cumulative = 0.0f64;
    for (m, &rho_m) in rho.iter().enumerate().take(m_len) {
        let mu = m as u32;
        if rho_m <= 0.0 {
            return Err(Error::NonPositiveWeight { vertex: format!("shell {m}"), value: rho_m });
        }
        cumulative += profile.shell_measure(mu) * rho_m;
        let flux = profile.d_plus(mu) * profile.shell_measure(mu);
        terms.push(cumulative / flux);
    }
    // summability: geometric tail when the term ratios stay below 1 with
    // a margin, polynomial tail when the fitted exponent exceeds 1
    let window = (m_len / 4).clamp(4, 16).min(m_len - 1);
    let start = m_len - window;
    let mut max_ratio = 0.0f64;
    for k in start..m_len {
        max_ratio = max_ratio.max(terms[k] / terms[k - 1]);
    }
    let last_term = terms[m_len - 1];
    let (estimated_remainder, fitted_exponent) = if max_ratio <= 0.9 {
        (last_term * max_ratio / (1.0 - max_ratio), None)
    } else {
        // fit terms ~ c * k^(-p) over the window
        let mut p_min = f64::INFINITY;
        for k in start.max(2)..m_len {
            let p = -(terms[k] / terms[k - 1]).ln() / ((k as f64) / (k as f64 - 1.0)).ln();
            p_min = p_min.min(p);
        }
        if p_min <= 1.05 {
            return Err(Error::DivergentTail(format!(
                "flux terms decay like k^(-{p_min:.3}) over the last {window} shells \
                 (ratio up to {max_ratio:.4}); the series does not converge"
            )));
        }
        (last_term * (m_len as f64) / (p_min - 1.0), Some(p_min))
    };
    if last_term > tail_tol {
        return Err(Error::DivergentTail(format!(
            "last flux term {last_term:.3e} exceeds the declared tail tolerance {tail_tol:.3e}; \
             extend the profile"
        )));
    }
    let mut h = vec![0.0; m_len];
    let mut acc = 0.0;
    for m in (0..m_len).rev() {
        acc += terms[m];
        h[m] = acc;
    }
    Ok((h, FluxTailReport { last_term, estimated_remainder, fitted_exponent }))
}

/// Solve `Lap h = -rho` on the ball interior with zero boundary data,
/// through the Dirichlet operator. Returns dense closure values (zeros
/// on the boundary layer); interior positivity is checked.
pub fn construct_ball_h(region: &FiniteRegion, rho: &[f64]) -> Result<Vec<f64>> {
    let n = region.n_interior();
    if rho.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.len() });
    }
    for (i, &r) in rho.iter().enumerate() {
        if r <= 0.0 {
            return Err(Error::NonPositiveWeight {
                vertex: region.closure_vertex(i).to_string(),
                value: r,
            });
        }
    }
    // rows scaled by mu: (deg) h(x) - sum_w h(y) = mu(x) rho(x)
    let b: Vec<f64> = (0..n).map(|i| region.measure(i) * rho[i]).collect();
    let h_int = if n <= 700 {
        let mut mat = SymMatrix::zeros(n);
        for i in 0..n {
            let mut diag = 0.0;
            for &(j, w) in region.adjacency(i) {
                diag += w;
                if j < n {
                    let cur = mat.get(i, j);
                    mat.set(i, j, cur - w);
                }
            }
            mat.set(i, i, diag);
        }
        Cholesky::factor(&mat)?.solve(&b)
    } else {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, out_row) in rows.iter_mut().enumerate() {
            let mut diag = 0.0;
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &(j, w) in region.adjacency(i) {
                diag += w;
                if j < n {
                    row.push((j, -w));
                }
            }
            row.push((i, diag));
            row.sort_by_key(|&(j, _)| j);
            *out_row = row;
        }
        let csr = CsrMatrix::from_rows(&rows);
        conjugate_gradient(&csr, &b, None, 1e-14, 60 * n + 400)?
    };
    for (i, &v) in h_int.iter().enumerate() {
        if v <= 0.0 {
            return Err(Error::LinearSolve(format!(
                "ball potential not positive at {} ({v:.3e})",
                region.closure_vertex(i)
            )));
        }
    }
    let mut out = vec![0.0; region.n_closure()];
    out[..n].copy_from_slice(&h_int);
    Ok(out)
}

/// Audit: relative gap between the closed-form time derivative of
/// `log Z` and a central finite difference.
pub fn time_derivative_audit(spec: &BarrierSpec, site: EvalSite, t: f64, dt: f64) -> f64 {
    let exact = spec.dt_log_z(site, t);
    let fd = (spec.log_z(site, t + dt) - spec.log_z(site, t - dt)) / (2.0 * dt);
    (exact - fd).abs() / exact.abs().max(1e-300)
}

/// Min/max of a closure vector along BFS levels, for decay inspection of
/// ball potentials.
pub fn radial_envelope_of(region: &FiniteRegion, values: &[f64]) -> Vec<(u32, f64, f64)> {
    let mut per_level: std::collections::BTreeMap<u32, (f64, f64)> = Default::default();
    for i in 0..region.n_interior() {
        let e = per_level
            .entry(region.level(i))
            .or_insert((f64::INFINITY, f64::NEG_INFINITY));
        e.0 = e.0.min(values[i]);
        e.1 = e.1.max(values[i]);
    }
    per_level.into_iter().map(|(l, (lo, hi))| (l, lo, hi)).collect()
}

pub type SharedRegion = Arc<FiniteRegion>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{materialize_ball, AntitreeConvention, ShellRule};

    fn binary_tree_profile(max: u32) -> RadialProfile {
        WeightedGraph::tree(ShellRule::Const(2), max + 4)
            .unwrap()
            .family_radial_profile(max)
            .unwrap()
    }

    #[test]
    fn thm34_threshold_matches_formula() {
        let q = thm34_q_threshold(1.0, 1.0);
        assert!((q - (std::f64::consts::E.powi(2) - 1.0)).abs() < 1e-12);
        let spec = barrier_thm34(1.0, None, 1.0).unwrap();
        assert!((spec.q().unwrap() - q).abs() < 1e-15);
        // scaling rho0 by c scales the threshold by 1/c
        let c = 10.0;
        assert!((thm34_q_threshold(1.0, c) - q / c).abs() < 1e-12);
    }

    #[test]
    fn thm34_evaluation() {
        let spec = barrier_thm34(1.0, Some(2.0), 1.0).unwrap();
        let z0 = spec.log_z(EvalSite::Radial(0.0), 0.0).exp();
        assert!((z0 - std::f64::consts::E).abs() < 1e-12);
        // growth class: log Z(x, 0) / (r+1) = A
        let r = 250.0;
        assert!((spec.log_z(EvalSite::Radial(r), 0.0) / (r + 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thm35_admissibility() {
        assert!(barrier_thm35(0.5, 1.0, 1.0, 1.0).is_ok());
        assert!(barrier_thm35(0.6, 1.0, 1.0, 1.0).is_err());
        assert!(barrier_thm35(0.5, 1.0, 1.5, 1.0).is_err());
        assert!(barrier_thm35(0.5, 1.0, 0.0, 1.0).is_err());
        // unit value on the seed sphere
        let spec = barrier_thm35(0.5, 3.0, 1.0, 1.0).unwrap();
        assert_eq!(spec.log_z(EvalSite::Radial(0.0), 0.7), 0.0);
    }

    #[test]
    fn thm35_growth_class() {
        let a = 0.5;
        let spec = barrier_thm35(a, 2.0, 0.5, 1.0).unwrap();
        let r = 1000.0;
        let ratio = spec.log_z(EvalSite::Radial(r), 0.0) / ((r + 1.0) * (r + 2.0).ln().sqrt());
        assert!(ratio > 0.4 * a && ratio < 1.1 * a, "ratio {ratio}");
    }

    #[test]
    fn lattice_beta_selection() {
        let spec = barrier_lattice(1.0, 1.0, 1.0).unwrap();
        match spec.form {
            BarrierForm::LatticeSub2 { beta, .. } => assert_eq!(beta, 0.5),
            _ => panic!("expected power form"),
        }
        let spec = barrier_lattice(0.0, 1.0, 1.0).unwrap();
        match spec.form {
            BarrierForm::LatticeSub2 { beta, .. } => assert_eq!(beta, 0.5),
            _ => panic!("expected power form"),
        }
        let spec = barrier_lattice(1.5, 1.0, 1.0).unwrap();
        match spec.form {
            BarrierForm::LatticeSub2 { beta, .. } => assert_eq!(beta, 0.25),
            _ => panic!("expected power form"),
        }
        let spec = barrier_lattice(2.0, 1.0, 1.0).unwrap();
        assert!(matches!(spec.form, BarrierForm::LatticeCrit { .. }));
        let z = spec.log_z(EvalSite::Lattice { norm_sq: 0.0 }, 0.0).exp();
        assert!((z - (2f64.ln() * 2f64.ln()).exp()).abs() < 1e-12);
        assert!(barrier_lattice(2.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn loglog_laplacian_sign_change() {
        // positive at the origin (the compact regime exists), negative
        // far out
        assert!(z2_loglog_delta(&[0, 0]) > 0.0);
        assert!(z2_loglog_delta(&[1000, 0]) < 0.0);
        assert!(z2_loglog_delta(&[700, 700]) < 0.0);
    }

    #[test]
    fn loglog_laplacian_far_field_value() {
        // frozen from the exact neighbor evaluation; the second-order
        // expansion phi'*S1/4 + phi''*S2/8 predicts about -5.24e-9 here
        let v = z2_loglog_delta(&[1000, 0]);
        assert!(v > -5.5e-9 && v < -5.0e-9, "{v:.6e}");
    }

    #[test]
    fn certify_thm34_on_tree_at_threshold_and_below() {
        let profile = binary_tree_profile(62);
        let rho = DensitySpec::OuterDegreeScaled { rho0: 1.0 };
        let spec = barrier_thm34(1.0, None, 1.0).unwrap();
        let q = spec.q().unwrap();
        let report = certify_parabolic(
            &spec,
            &rho,
            &CertifyDomain::Radial { profile: &profile, min_shell: 0, max_shell: 60 },
            1.0 / q,
            5,
        )
        .unwrap();
        assert!(report.pass, "threshold certificate failed: {report:?}");

        let half = spec.with_q(q / 2.0);
        let report = certify_parabolic(
            &half,
            &rho,
            &CertifyDomain::Radial { profile: &profile, min_shell: 0, max_shell: 60 },
            2.0 / q,
            5,
        )
        .unwrap();
        assert!(!report.pass);
        // raw argmin deep in the exponential regime
        let shell: u32 = report
            .argmin_site
            .strip_prefix("shell ")
            .and_then(|s| s.parse().ok())
            .expect("radial argmin");
        assert!(shell >= 1, "argmin at {}", report.argmin_site);
    }

    #[test]
    fn core_adjustment_on_threshold_family() {
        let profile = binary_tree_profile(62);
        let rho = DensitySpec::OuterDegreeScaled { rho0: 1.0 };
        let spec = barrier_thm34(1.0, None, 1.0).unwrap();
        let cert = certify_with_core_adjustment(&spec, &rho, &profile, 60, 5).unwrap();
        // the explicit threshold already covers the seed shell here
        assert_eq!(cert.full_q, Some(cert.interior_q));
    }

    #[test]
    fn antitree_linear_delta_signs() {
        let s = ShellRule::Affine { slope: 1, offset: 1 };
        let a = WeightedGraph::antitree(s.clone(), AntitreeConvention::A, 20).unwrap();
        let b = WeightedGraph::antitree(s, AntitreeConvention::B, 20).unwrap();
        let k = 0.7;
        for m in 1..=8u32 {
            let da = antitree_linear_delta(&a, k, m).unwrap();
            let db = antitree_linear_delta(&b, k, m).unwrap();
            assert!((da + 2.0 * k).abs() < 1e-12, "convention A at {m}: {da}");
            assert!((db - 2.0 * k).abs() < 1e-12, "convention B at {m}: {db}");
        }
        // constant sphere size: exactly zero off the seed
        let c = WeightedGraph::antitree(ShellRule::Const(1), AntitreeConvention::A, 20).unwrap();
        for m in 3..=8u32 {
            assert_eq!(antitree_linear_delta(&c, k, m).unwrap(), 0.0);
        }
    }

    #[test]
    fn z2_static_auto_k_certifies() {
        let g = Arc::new(WeightedGraph::lattice(2).unwrap());
        let region = Arc::new(
            materialize_ball(
                &g,
                &[VertexId::lattice(&[0, 0])],
                12.0,
                Metric::Euclidean,
                100_000,
            )
            .unwrap(),
        );
        let rho: Vec<f64> = (0..region.n_interior())
            .map(|i| {
                let d = region.closure_vertex(i).norm_sq().unwrap().sqrt();
                (1.0 + d).powi(-5)
            })
            .collect();
        let (barrier, k) = barrier_z2_static(None, &rho, &region).unwrap();
        assert!(k > 0.0);
        let values: Vec<f64> = (0..region.n_closure())
            .map(|i| {
                barrier.eval(EvalSite::Lattice {
                    norm_sq: region.closure_vertex(i).norm_sq().unwrap(),
                })
            })
            .collect();
        let report = certify_elliptic_region(
            &region,
            &values,
            &rho,
            EllipticDirection::BarrierBelowDensity,
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
        // rho = 1: any k at the scaling bound certifies as well
        let rho_one = vec![1.0; region.n_interior()];
        let (_b2, k2) = barrier_z2_static(None, &rho_one, &region).unwrap();
        assert!(k2 > 0.0);
    }

    #[test]
    fn lift_requires_certificate_and_strict_gamma() {
        let g = Arc::new(WeightedGraph::lattice(2).unwrap());
        let region = Arc::new(
            materialize_ball(&g, &[VertexId::lattice(&[0, 0])], 8.0, Metric::Euclidean, 100_000)
                .unwrap(),
        );
        let rho = vec![1.0; region.n_interior()];
        let (barrier, _k) = barrier_z2_static(None, &rho, &region).unwrap();
        let values: Vec<f64> = (0..region.n_closure())
            .map(|i| {
                barrier.eval(EvalSite::Lattice {
                    norm_sq: region.closure_vertex(i).norm_sq().unwrap(),
                })
            })
            .collect();
        let cert = certify_elliptic_region(
            &region,
            &values,
            &rho,
            EllipticDirection::BarrierBelowDensity,
        )
        .unwrap();
        assert!(cert.pass);
        let c0 = cert.min_value;
        assert!(c0 > 0.0);
        // strictness: gamma = 1/c0 is rejected
        assert!(lift_static(barrier.clone(), 1.0 / c0, &cert, Metric::Euclidean).is_err());
        let lifted = lift_static(barrier.clone(), 2.0 / c0, &cert, Metric::Euclidean).unwrap();
        let report = certify_parabolic(
            &lifted,
            &DensitySpec::Constant { value: 1.0 },
            &CertifyDomain::Region(&region),
            1.0,
            4,
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
        // an uncertified (failed) report is refused
        let mut bad = cert.clone();
        bad.pass = false;
        assert!(lift_static(barrier, 2.0 / c0, &bad, Metric::Euclidean).is_err());
    }

    #[test]
    fn radial_h_on_binary_tree() {
        let profile = binary_tree_profile(80);
        let rho: Vec<f64> = (0..=80).map(|m| (1.0 + m as f64).powi(-2)).collect();
        let (h, tail) = construct_radial_h(&profile, &rho, 80, 1e-3).unwrap();
        for m in 0..80 {
            assert!(h[m] > h[m + 1]);
            assert!(h[m] > 0.0);
        }
        assert!(tail.last_term <= 1e-3);
        // exact telescoping: Lap h = -rho on interior shells
        let report = certify_elliptic_radial(
            &profile,
            &h,
            &rho,
            1,
            78,
            EllipticDirection::PotentialDecay,
        )
        .unwrap();
        assert!(report.pass);
        assert!(report.max_abs_residual <= 1e-12, "{}", report.max_abs_residual);
    }

    #[test]
    fn radial_h_divergent_cases() {
        let profile = binary_tree_profile(60);
        let rho_one = vec![1.0; 61];
        match construct_radial_h(&profile, &rho_one, 60, 1e-3) {
            Err(Error::DivergentTail(_)) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
        // half-line with quadratic decay: terms approach a constant
        let half = WeightedGraph::tree(ShellRule::Const(1), 80)
            .unwrap()
            .family_radial_profile(70)
            .unwrap();
        let rho: Vec<f64> = (0..=70).map(|m| (1.0 + m as f64).powi(-2)).collect();
        match construct_radial_h(&half, &rho, 70, 1e-3) {
            Err(Error::DivergentTail(_)) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn ball_h_positive_and_exact() {
        let g = Arc::new(WeightedGraph::lattice(3).unwrap());
        let region = Arc::new(
            materialize_ball(
                &g,
                &[VertexId::lattice(&[0, 0, 0])],
                6.0,
                Metric::Euclidean,
                100_000,
            )
            .unwrap(),
        );
        let rho: Vec<f64> = (0..region.n_interior())
            .map(|i| (1.0 + region.closure_vertex(i).norm_sq().unwrap().sqrt()).powi(-3))
            .collect();
        let h = construct_ball_h(&region, &rho).unwrap();
        for i in 0..region.n_interior() {
            assert!(h[i] > 0.0);
        }
        let report =
            certify_elliptic_region(&region, &h, &rho, EllipticDirection::PotentialDecay).unwrap();
        assert!(report.pass);
        assert!(report.max_abs_residual <= 1e-10, "{}", report.max_abs_residual);
        assert!(construct_ball_h(&region, &vec![0.0; region.n_interior()]).is_err());
    }

    #[test]
    fn nested_ball_potentials_are_monotone() {
        let g = Arc::new(WeightedGraph::lattice(2).unwrap());
        let small = Arc::new(
            materialize_ball(&g, &[VertexId::lattice(&[0, 0])], 5.0, Metric::Euclidean, 100_000)
                .unwrap(),
        );
        let large = Arc::new(
            materialize_ball(&g, &[VertexId::lattice(&[0, 0])], 8.0, Metric::Euclidean, 100_000)
                .unwrap(),
        );
        let rho_of = |v: &VertexId| (1.0 + v.norm_sq().unwrap().sqrt()).powi(-3);
        let rho_small: Vec<f64> =
            (0..small.n_interior()).map(|i| rho_of(small.closure_vertex(i))).collect();
        let rho_large: Vec<f64> =
            (0..large.n_interior()).map(|i| rho_of(large.closure_vertex(i))).collect();
        let h_small = construct_ball_h(&small, &rho_small).unwrap();
        let h_large = construct_ball_h(&large, &rho_large).unwrap();
        for i in 0..small.n_interior() {
            let v = small.closure_vertex(i);
            let j = large.index_of(v).unwrap();
            assert!(h_large[j] >= h_small[i] - 1e-10);
        }
    }

    #[test]
    fn derivative_audit_all_families() {
        let specs = vec![
            barrier_thm34(1.0, Some(3.0), 1.0).unwrap(),
            barrier_thm35(0.5, 2.0, 1.0, 1.0).unwrap(),
            barrier_lattice(1.0, 0.7, 2.0).unwrap(),
            barrier_lattice(2.0, 0.7, 2.0).unwrap(),
        ];
        for spec in specs {
            let site = match spec.metric {
                Metric::Combinatorial => EvalSite::Radial(7.0),
                Metric::Euclidean => EvalSite::Lattice { norm_sq: 50.0 },
            };
            let gap = time_derivative_audit(&spec, site, 0.2, 1e-6);
            assert!(gap <= 1e-6, "audit gap {gap}");
        }
    }

    #[test]
    fn q_search_finds_lattice_certificates() {
        let g = Arc::new(WeightedGraph::lattice(3).unwrap());
        let region = Arc::new(
            materialize_ball(
                &g,
                &[VertexId::lattice(&[0, 0, 0])],
                8.0,
                Metric::Euclidean,
                200_000,
            )
            .unwrap(),
        );
        for alpha in [0.0, 1.0, 2.0] {
            let spec = barrier_lattice(alpha, 1.0, 1.0).unwrap();
            let rho = DensitySpec::PowerDecay { coeff: 1.0, alpha, metric: Metric::Euclidean };
            let (q, report) =
                search_minimal_q(&spec, &rho, &CertifyDomain::Region(&region), 4).unwrap();
            assert!(report.pass);
            assert!(q <= 1e4, "alpha {alpha} needed q {q}");
        }
    }
}
