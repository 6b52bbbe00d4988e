//! Dirichlet spectral theory of the weighted Laplacian on a finite
//! region: operator assembly in the measure-orthonormal coordinates,
//! dense symmetric eigendecomposition, and the tridiagonal radial
//! reduction for weakly symmetric graphs.
//!
//! Regions are capped at [`SPECTRAL_CAP`] interior vertices for the dense
//! eigen path; larger problems must use the time-stepping solver.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{FiniteRegion, RadialProfile};
use crate::linalg::{sym_eigen, SymMatrix};

/// Dense eigensolve cap on the interior size.
pub const SPECTRAL_CAP: usize = 4000;

/// Dirichlet eigenpairs of the weighted operator on a region interior,
/// orthonormal under the inner product weighted by `mu_hat = w * mu`.
/// Eigenvectors are stored over the interior; the zero extension to the
/// boundary layer is implicit in the region contract.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    region: Arc<FiniteRegion>,
    eigenvalues: Vec<f64>,
    /// `eigenvectors[k][i]` = k-th eigenfunction at interior vertex `i`.
    eigenvectors: Vec<Vec<f64>>,
    mu_hat: Vec<f64>,
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn region(&self) -> &Arc<FiniteRegion> {
        &self.region
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k]
    }

    pub fn mu_hat(&self) -> &[f64] {
        &self.mu_hat
    }

    /// Inner product under `mu_hat` of two interior vectors.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.mu_hat)
            .map(|((a, b), m)| a * b * m)
            .sum()
    }

    /// Expansion coefficients of an interior vector in the basis.
    pub fn coefficients(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: f.len() });
        }
        Ok(self.eigenvectors.iter().map(|phi| self.inner(f, phi)).collect())
    }

    /// Reconstruct an interior vector from coefficients.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: coeffs.len() });
        }
        let n = self.len();
        let mut out = vec![0.0; n];
        for (k, phi) in self.eigenvectors.iter().enumerate() {
            let c = coeffs[k];
            if c != 0.0 {
                for i in 0..n {
                    out[i] += c * phi[i];
                }
            }
        }
        Ok(out)
    }

    /// Apply the negative weighted Laplacian to a zero-extended interior
    /// vector, restricted to the interior.
    pub fn apply_operator(&self, f: &[f64]) -> Vec<f64> {
        apply_neg_weighted_laplacian(&self.region, &self.mu_hat, f)
    }

    /// Max orthonormality defect `max(|<phi_i, phi_j>| - delta_ij)`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let ip = self.inner(&self.eigenvectors[i], &self.eigenvectors[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// Max eigen-residual `||(-Lap_w phi_k)|interior - lambda_k phi_k||_inf`.
    pub fn eigen_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.len() {
            let lam = self.eigenvalues[k];
            let applied = self.apply_operator(&self.eigenvectors[k]);
            for (i, a) in applied.iter().enumerate() {
                worst = worst.max((a - lam * self.eigenvectors[k][i]).abs() / lam.abs().max(1.0));
            }
        }
        worst
    }
}

fn apply_neg_weighted_laplacian(region: &FiniteRegion, mu_hat: &[f64], f: &[f64]) -> Vec<f64> {
    let n = region.n_interior();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let fi = f[i];
        let mut acc = 0.0;
        for &(j, w) in region.adjacency(i) {
            let fj = if j < n { f[j] } else { 0.0 };
            acc += (fj - fi) * w;
        }
        out[i] = -acc / mu_hat[i];
    }
    out
}

/// Assemble the Dirichlet operator in measure-orthonormal coordinates:
/// the symmetric matrix with entries `A_ij / sqrt(mu_hat_i mu_hat_j)`
/// where `A` is the matrix of the negative Laplacian with boundary
/// columns dropped, plus the `mu_hat = w * mu` weight vector.
pub fn assemble_dirichlet_operator(
    region: &FiniteRegion,
    w: &[f64],
) -> Result<(SymMatrix, Vec<f64>)> {
    let n = region.n_interior();
    if n == 0 {
        return Err(Error::InvalidParameter("empty interior".into()));
    }
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.len() });
    }
    let mut mu_hat = Vec::with_capacity(n);
    for i in 0..n {
        if w[i] <= 0.0 {
            return Err(Error::NonPositiveWeight {
                vertex: region.closure_vertex(i).to_string(),
                value: w[i],
            });
        }
        mu_hat.push(w[i] * region.measure(i));
    }
    let sqrt_mu: Vec<f64> = mu_hat.iter().map(|m| m.sqrt()).collect();
    let mut mat = SymMatrix::zeros(n);
    for i in 0..n {
        let mut diag = 0.0;
        for &(j, weight) in region.adjacency(i) {
            diag += weight;
            if j < n {
                let v = -weight / (sqrt_mu[i] * sqrt_mu[j]);
                // accumulate: multigraph-free families give one entry per
                // neighbor, explicit graphs may repeat
                let cur = mat.get(i, j);
                mat.set(i, j, cur + v);
            }
        }
        let cur = mat.get(i, i);
        mat.set(i, i, cur + diag / mu_hat[i]);
    }
    Ok((mat, mu_hat))
}

/// Full Dirichlet eigendecomposition of the weighted operator on the
/// region. Eigenvalues ascend and are strictly positive; eigenvectors
/// are `mu_hat`-orthonormal with the sign convention that the first
/// entry above the gauge threshold (in region vertex order) is positive.
pub fn dirichlet_spectrum(region: &Arc<FiniteRegion>, w: &[f64]) -> Result<SpectralBasis> {
    let n = region.n_interior();
    if n > SPECTRAL_CAP {
        // larger problems must use the time-stepping path, or the shell
        // reduction when the graph is weakly symmetric
        return Err(Error::SpectralCapExceeded { n, cap: SPECTRAL_CAP });
    }
    let (mat, mu_hat) = assemble_dirichlet_operator(region, w)?;
    let (eigenvalues, raw_vectors) = sym_eigen(&mat)?;
    let sqrt_mu: Vec<f64> = mu_hat.iter().map(|m| m.sqrt()).collect();
    let mut eigenvectors = Vec::with_capacity(n);
    for v in raw_vectors {
        let mut phi: Vec<f64> = v.iter().zip(&sqrt_mu).map(|(x, s)| x / s).collect();
        fix_sign(&mut phi);
        eigenvectors.push(phi);
    }
    Ok(SpectralBasis { region: Arc::clone(region), eigenvalues, eigenvectors, mu_hat })
}

fn fix_sign(phi: &mut [f64]) {
    let max = phi.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let threshold = 1e-12 * max;
    for &v in phi.iter() {
        if v.abs() > threshold {
            if v < 0.0 {
                for x in phi.iter_mut() {
                    *x = -*x;
                }
            }
            return;
        }
    }
}

/// Dirichlet eigenpairs of the tridiagonal radial operator on shells
/// `0..J-1` with a zero condition at shell `J`, under the shell weight
/// `rho(m) * shell_measure(m)`. Eigenvalues coincide with the
/// radial-sector eigenvalues of the full ball problem.
#[derive(Clone, Debug)]
pub struct RadialSpectralBasis {
    eigenvalues: Vec<f64>,
    /// `eigenvectors[k][m]` = k-th radial eigenfunction at shell `m`.
    eigenvectors: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl RadialSpectralBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), m)| a * b * m).sum()
    }

    pub fn coefficients(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: f.len() });
        }
        Ok(self.eigenvectors.iter().map(|phi| self.inner(f, phi)).collect())
    }
}

/// Assemble and decompose the radial Dirichlet operator through shell
/// `dirichlet_shell - 1` from the profile and the radial density.
pub fn radial_dirichlet_spectrum(
    profile: &RadialProfile,
    rho: &[f64],
    dirichlet_shell: u32,
) -> Result<RadialSpectralBasis> {
    let j = dirichlet_shell as usize;
    if j == 0 {
        return Err(Error::InvalidParameter("radial region needs at least one shell".into()));
    }
    if profile.max_shell() < dirichlet_shell {
        return Err(Error::InvalidParameter(format!(
            "profile covers shells up to {} but Dirichlet shell is {}",
            profile.max_shell(),
            dirichlet_shell
        )));
    }
    if rho.len() < j {
        return Err(Error::DimensionMismatch { expected: j, got: rho.len() });
    }
    let mut weights = Vec::with_capacity(j);
    for (m, &r) in rho.iter().enumerate().take(j) {
        if r <= 0.0 {
            return Err(Error::NonPositiveWeight { vertex: format!("shell {m}"), value: r });
        }
        weights.push(r * profile.shell_measure(m as u32));
    }
    // weighted operator rows scaled to symmetric form: the coupling mass
    // between shells m and m+1 is d_plus(m) * shell_measure(m), which by
    // detailed balance equals d_minus(m+1) * shell_measure(m+1).
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut mat = SymMatrix::zeros(j);
    for m in 0..j {
        let mu = m as u32;
        let diag = (profile.d_plus(mu) + profile.d_minus(mu)) * profile.shell_measure(mu);
        mat.set(m, m, diag / (sqrt_w[m] * sqrt_w[m]));
        if m + 1 < j {
            let coupling = -profile.d_plus(mu) * profile.shell_measure(mu);
            let v = coupling / (sqrt_w[m] * sqrt_w[m + 1]);
            mat.set(m, m + 1, v);
            mat.set(m + 1, m, v);
        }
    }
    let (eigenvalues, raw_vectors) = sym_eigen(&mat)?;
    let mut eigenvectors = Vec::with_capacity(j);
    for v in raw_vectors {
        let mut phi: Vec<f64> = v.iter().zip(&sqrt_w).map(|(x, s)| x / s).collect();
        fix_sign(&mut phi);
        eigenvectors.push(phi);
    }
    Ok(RadialSpectralBasis { eigenvalues, eigenvectors, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        materialize_ball, ExplicitGraph, Metric, ShellRule, VertexId, WeightedGraph,
    };
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn line_region(radius: f64) -> Arc<FiniteRegion> {
        let g = Arc::new(WeightedGraph::lattice(1).unwrap());
        Arc::new(
            materialize_ball(&g, &[VertexId::lattice(&[0])], radius, Metric::Combinatorial, 1000)
                .unwrap(),
        )
    }

    #[test]
    fn single_vertex_operator() {
        let g = Arc::new(WeightedGraph::lattice(1).unwrap());
        let region = Arc::new(
            materialize_ball(&g, &[VertexId::lattice(&[0])], 1.0, Metric::Combinatorial, 100)
                .unwrap(),
        );
        assert_eq!(region.n_interior(), 1);
        let (mat, _) = assemble_dirichlet_operator(&region, &[1.0]).unwrap();
        assert!((mat.get(0, 0) - 1.0).abs() < 1e-15);
        let basis = dirichlet_spectrum(&region, &[1.0]).unwrap();
        assert!((basis.eigenvalue(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_vertex_z3() {
        let g = Arc::new(WeightedGraph::lattice(3).unwrap());
        let region = Arc::new(
            materialize_ball(&g, &[VertexId::lattice(&[0, 0, 0])], 1.0, Metric::Combinatorial, 100)
                .unwrap(),
        );
        let basis = dirichlet_spectrum(&region, &[1.0]).unwrap();
        // lambda_1 = Deg/rho = (6/6)/1
        assert!((basis.eigenvalue(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_vertex_line_matrix_and_spectrum() {
        let g = Arc::new(WeightedGraph::lattice(1).unwrap());
        // interior {0, 1}: seed both vertices, radius 1
        let region = Arc::new(
            materialize_ball(
                &g,
                &[VertexId::lattice(&[0]), VertexId::lattice(&[1])],
                1.0,
                Metric::Combinatorial,
                100,
            )
            .unwrap(),
        );
        assert_eq!(region.n_interior(), 2);
        let (mat, _) = assemble_dirichlet_operator(&region, &[1.0, 1.0]).unwrap();
        assert!((mat.get(0, 0) - 1.0).abs() < 1e-14);
        assert!((mat.get(0, 1) + 0.5).abs() < 1e-14);
        assert!(mat.asymmetry() < 1e-14);
        let basis = dirichlet_spectrum(&region, &[1.0, 1.0]).unwrap();
        assert!((basis.eigenvalue(0) - 0.5).abs() < 1e-10);
        assert!((basis.eigenvalue(1) - 1.5).abs() < 1e-10);
    }

    #[test]
    fn operator_is_symmetric() {
        let region = line_region(6.0);
        let w: Vec<f64> = (0..region.n_interior()).map(|i| 0.5 + 0.1 * i as f64).collect();
        let (mat, _) = assemble_dirichlet_operator(&region, &w).unwrap();
        assert_eq!(mat.asymmetry(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_weight_and_empty_interior() {
        let region = line_region(3.0);
        let mut w = vec![1.0; region.n_interior()];
        w[1] = 0.0;
        assert!(assemble_dirichlet_operator(&region, &w).is_err());
    }

    fn random_explicit_region(rng: &mut ChaCha8Rng) -> (Arc<FiniteRegion>, Vec<f64>) {
        // random connected graph: spanning path + extra chords
        let n = rng.gen_range(4..24usize);
        let mut eg = ExplicitGraph::default();
        let ids: Vec<VertexId> = (0..n as i64 + 2).map(|i| VertexId::lattice(&[i])).collect();
        for i in 0..n + 1 {
            eg.add_edge(ids[i].clone(), ids[i + 1].clone(), rng.gen_range(0.5..2.0));
        }
        for _ in 0..n / 2 {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a.abs_diff(b) > 1 {
                eg.add_edge(ids[a].clone(), ids[b].clone(), rng.gen_range(0.5..2.0));
            }
        }
        for id in &ids {
            eg.set_measure(id.clone(), rng.gen_range(0.5..2.0));
        }
        let g = Arc::new(WeightedGraph::explicit(eg));
        let seed: Vec<VertexId> = ids[..n].to_vec();
        let region =
            Arc::new(materialize_ball(&g, &seed, 1.0, Metric::Combinatorial, 10_000).unwrap());
        let w: Vec<f64> = (0..region.n_interior()).map(|_| rng.gen_range(0.3..3.0)).collect();
        (region, w)
    }

    #[test]
    fn randomized_spectra_are_positive_orthonormal_and_accurate() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let (region, w) = random_explicit_region(&mut rng);
            let basis = dirichlet_spectrum(&region, &w).unwrap();
            assert!(basis.eigenvalue(0) > 0.0, "lambda_1 must be positive");
            assert!(basis.orthonormality_defect() <= 1e-10);
            assert!(basis.eigen_residual() <= 1e-9);
            // completeness: random interior vector reconstructs
            let f: Vec<f64> =
                (0..region.n_interior()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let coeffs = basis.coefficients(&f).unwrap();
            let back = basis.reconstruct(&coeffs).unwrap();
            let f_inf = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            for i in 0..f.len() {
                assert!((back[i] - f[i]).abs() <= 1e-9 * f_inf.max(1.0));
            }
        }
    }

    #[test]
    fn scale_covariance_in_w() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let region = line_region(6.0);
        let w: Vec<f64> = (0..region.n_interior()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let c = 3.0;
        let w_scaled: Vec<f64> = w.iter().map(|x| c * x).collect();
        let a = dirichlet_spectrum(&region, &w).unwrap();
        let b = dirichlet_spectrum(&region, &w_scaled).unwrap();
        let n = a.len();
        for k in 0..n {
            assert!((b.eigenvalue(k) - a.eigenvalue(k) / c).abs() < 1e-10);
        }
        // span comparison through projectors onto eigenvalue groups
        let groups = group_indices(a.eigenvalues());
        for group in groups {
            let pa = group_projector(&a, &group);
            // matching group in b: same indices (order preserved under scaling)
            let pb = group_projector(&b, &group);
            for i in 0..n {
                for j in 0..n {
                    assert!((pa[i][j] - pb[i][j]).abs() < 1e-8);
                }
            }
        }
    }

    fn group_indices(vals: &[f64]) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, &v) in vals.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if (v - vals[g[0]]).abs() <= 1e-9 * v.abs().max(1.0) => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        groups
    }

    /// mu_hat-weighted projector onto the span of a group of eigenvectors.
    fn group_projector(basis: &SpectralBasis, group: &[usize]) -> Vec<Vec<f64>> {
        let n = basis.len();
        let mut p = vec![vec![0.0; n]; n];
        for &k in group {
            let phi = basis.eigenvector(k);
            for i in 0..n {
                for j in 0..n {
                    p[i][j] += phi[i] * phi[j] * basis.mu_hat()[j];
                }
            }
        }
        p
    }

    #[test]
    fn sign_convention_is_stable() {
        let region = line_region(5.0);
        let w = vec![1.0; region.n_interior()];
        let a = dirichlet_spectrum(&region, &w).unwrap();
        let b = dirichlet_spectrum(&region, &w).unwrap();
        for k in 0..a.len() {
            assert_eq!(a.eigenvector(k), b.eigenvector(k));
            let first = a
                .eigenvector(k)
                .iter()
                .find(|v| v.abs() > 1e-9)
                .copied()
                .unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn radial_half_line_two_shells() {
        let g = WeightedGraph::tree(ShellRule::Const(1), 10).unwrap();
        let p = g.family_radial_profile(4).unwrap();
        let basis = radial_dirichlet_spectrum(&p, &[1.0, 1.0], 2).unwrap();
        let expected_low = (3.0 - 5f64.sqrt()) / 2.0;
        let expected_high = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((basis.eigenvalue(0) - expected_low).abs() < 1e-12);
        assert!((basis.eigenvalue(1) - expected_high).abs() < 1e-12);
    }

    #[test]
    fn radial_eigenvalues_embed_into_full_ball_spectrum() {
        let g = Arc::new(WeightedGraph::tree(ShellRule::Const(2), 8).unwrap());
        let region = Arc::new(
            materialize_ball(&g, &[VertexId::radial(0, 0)], 4.0, Metric::Combinatorial, 10_000)
                .unwrap(),
        );
        let rho_vertex: Vec<f64> = (0..region.n_interior())
            .map(|i| 1.0 / (1.0 + region.level(i) as f64))
            .collect();
        let full = dirichlet_spectrum(&region, &rho_vertex).unwrap();
        let p = g.family_radial_profile(4).unwrap();
        let rho_shell: Vec<f64> = (0..4).map(|m| 1.0 / (1.0 + m as f64)).collect();
        let radial = radial_dirichlet_spectrum(&p, &rho_shell, 4).unwrap();
        for k in 0..radial.len() {
            let lam = radial.eigenvalue(k);
            let found = full
                .eigenvalues()
                .iter()
                .any(|&l| (l - lam).abs() <= 1e-9 * lam.max(1.0));
            assert!(found, "radial eigenvalue {lam} missing from the full spectrum");
        }
    }

    #[test]
    fn radial_density_scaling() {
        let g = WeightedGraph::tree(ShellRule::Const(2), 10).unwrap();
        let p = g.family_radial_profile(6).unwrap();
        let rho: Vec<f64> = (0..6).map(|m| 1.0 / (1.0 + m as f64)).collect();
        let c = 2.5;
        let rho_scaled: Vec<f64> = rho.iter().map(|r| c * r).collect();
        let a = radial_dirichlet_spectrum(&p, &rho, 6).unwrap();
        let b = radial_dirichlet_spectrum(&p, &rho_scaled, 6).unwrap();
        for k in 0..a.len() {
            assert!((b.eigenvalue(k) - a.eigenvalue(k) / c).abs() < 1e-10);
        }
    }

    #[test]
    fn radial_profile_too_short_errors() {
        let g = WeightedGraph::tree(ShellRule::Const(2), 10).unwrap();
        let p = g.family_radial_profile(3).unwrap();
        assert!(radial_dirichlet_spectrum(&p, &[1.0; 8], 8).is_err());
    }

    #[test]
    fn spectral_cap_is_enforced() {
        let g = Arc::new(WeightedGraph::lattice(3).unwrap());
        let region = Arc::new(
            materialize_ball(
                &g,
                &[VertexId::lattice(&[0, 0, 0])],
                14.0,
                Metric::Euclidean,
                200_000,
            )
            .unwrap(),
        );
        assert!(region.n_interior() > SPECTRAL_CAP);
        let w = vec![1.0; region.n_interior()];
        match dirichlet_spectrum(&region, &w) {
            Err(Error::SpectralCapExceeded { .. }) => {}
            other => panic!("expected cap error, got {:?}", other.map(|_| ())),
        }
    }
}
