//! Generalized symmetric eigensolvers, f-index counting, f-harmonic 1-form
//! extraction, and Künneth composition of product spectra.

mod lanczos;
mod sharp;

pub use sharp::sharp_vectors;

use nalgebra::{DMatrix, DVector};

use crate::discretize::{Hodge1Assembly, OperatorAssembly, SurfaceMesh};
use crate::error::{Error, Result};
use crate::immersion::Immersion;
use crate::linalg::Csr;

/// Relative zero threshold: eigenvalues within KERNEL_TAU times the spectral
/// scale of zero are classified as zero.
pub const KERNEL_TAU: f64 = 1e-8;

/// Problems up to this size use the dense reduction path; larger ones use
/// shift-invert Lanczos. (Dense O(n^3) work above this size breaks the
/// per-check time budget on desk hardware.)
pub const DENSE_LIMIT: usize = 1500;

/// Eigenpairs of a generalized symmetric problem A v = mu M v, ascending.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Ascending eigenvalues (all of them on the dense path, the requested
    /// window on the iterative path).
    pub eigenvalues: Vec<f64>,
    /// M-orthonormal eigenvector columns for the first `eigenvalues.len()`
    /// pairs (dense) or the computed window (iterative).
    pub eigenvectors: Option<DMatrix<f64>>,
    /// Eigenvalues below -threshold.
    pub neg_count: usize,
    /// Eigenvalues within threshold of zero.
    pub zero_count: usize,
    /// Absolute zero threshold used (KERNEL_TAU x spectral scale).
    pub threshold: f64,
    /// Spectral scale: largest |eigenvalue| (dense) or a Gershgorin bound.
    pub scale: f64,
    /// Worst relative eigenpair residual ||A v - mu M v|| / ||v||_M.
    pub max_residual: f64,
    /// Whether the full spectrum was computed (dense path).
    pub complete: bool,
}

impl SpectralResult {
    fn classify(&mut self) {
        self.neg_count = self.eigenvalues.iter().filter(|&&x| x < -self.threshold).count();
        self.zero_count =
            self.eigenvalues.iter().filter(|&&x| x.abs() <= self.threshold).count();
    }
}

/// Count report with the distance from the counting threshold to the nearest
/// computed eigenvalue (a small distance flags an ambiguous count).
#[derive(Debug, Clone)]
pub struct CountReport {
    pub count: usize,
    pub distance_to_threshold: f64,
}

/// Lowest eigenpairs of the weighted Jacobi problem (S_f - P, M_f).
pub fn eigensolve(asm: &OperatorAssembly, count: usize) -> Result<SpectralResult> {
    let a = asm.jacobi_matrix();
    // A >= -pot_max M, so this shift brackets the spectrum from below
    let sigma = -(asm.pot_max.max(0.0) + 1.0);
    eigensolve_pair(&a, &asm.m_f, count, sigma)
}

/// Lowest eigenpairs of A v = mu M v with M symmetric positive definite and
/// `sigma` a strict lower bound on the spectrum (so A - sigma M is SPD).
pub fn eigensolve_pair(a: &Csr, m: &Csr, count: usize, sigma: f64) -> Result<SpectralResult> {
    let n = a.nrows;
    if m.nrows != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows });
    }
    let mut result = if n <= DENSE_LIMIT {
        dense_path(a, m)?
    } else {
        lanczos::shift_invert(a, m, count.min(n), sigma)?
    };
    result.classify();
    Ok(result)
}

fn dense_path(a: &Csr, m: &Csr) -> Result<SpectralResult> {
    let ad = a.to_dense();
    let md = m.to_dense();
    let chol = nalgebra::Cholesky::new(md.clone())
        .ok_or_else(|| Error::IllConditionedMass("Cholesky factorization failed".into()))?;
    let l = chol.l();
    // B = L^-1 A L^-T, symmetric
    let la = l
        .solve_lower_triangular(&ad)
        .ok_or_else(|| Error::IllConditionedMass("singular mass factor".into()))?;
    let b = l
        .solve_lower_triangular(&la.transpose())
        .ok_or_else(|| Error::IllConditionedMass("singular mass factor".into()))?;
    let b = (&b + b.transpose()) * 0.5;
    let eig = b.symmetric_eigen();
    let n = ad.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    // x = L^-T y, M-orthonormal by construction
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let y = eig.eigenvectors.column(i).into_owned();
        let x = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::IllConditionedMass("singular mass factor".into()))?;
        vectors.set_column(k, &x);
    }
    let scale = eigenvalues
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let mut max_residual = 0.0f64;
    for k in 0..n.min(32) {
        let x = vectors.column(k).into_owned();
        let r = a.mul_vec(&x) - eigenvalues[k] * m.mul_vec(&x);
        // ||v||_M = 1 by construction; scale by the spectral magnitude
        max_residual = max_residual.max(r.norm() / scale);
    }
    Ok(SpectralResult {
        eigenvalues,
        eigenvectors: Some(vectors),
        neg_count: 0,
        zero_count: 0,
        threshold: KERNEL_TAU * scale,
        scale,
        max_residual,
        complete: true,
    })
}

/// Number of negative eigenvalues of the Jacobi operator (the f-index).
/// Errors unless the computed window demonstrably contains all of them.
pub fn f_index(result: &SpectralResult) -> Result<usize> {
    count_below(result, 0.0).map(|r| r.count)
}

/// Number of eigenvalues strictly below `eta`, with the relative zero
/// threshold applied at eta. Errors when the computed window is too small to
/// bracket the count.
pub fn count_below(result: &SpectralResult, eta: f64) -> Result<CountReport> {
    let last = *result.eigenvalues.last().ok_or_else(|| {
        Error::BracketNotEstablished("no eigenvalues computed".into())
    })?;
    if !result.complete && last <= eta + result.threshold {
        return Err(Error::BracketNotEstablished(format!(
            "largest computed eigenvalue {last} does not exceed the bound {eta}"
        )));
    }
    let count = result
        .eigenvalues
        .iter()
        .filter(|&&x| x < eta - result.threshold)
        .count();
    let distance = result
        .eigenvalues
        .iter()
        .map(|&x| (x - eta).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(CountReport { count, distance_to_threshold: distance })
}

/// Basis of discrete f-harmonic 1-forms (kernel of the weighted 1-form
/// Laplacian), with residuals and pointwise reconstructions.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    /// Edge-valued kernel forms, star1-orthonormal.
    pub forms: Vec<DVector<f64>>,
    pub b1: usize,
    /// Per-form (||d omega||, ||delta_f omega||) relative to the form norm.
    pub residuals: Vec<(f64, f64)>,
    /// Per-form, per-vertex sharp reconstruction in R^d.
    pub sharp: Vec<Vec<DVector<f64>>>,
    /// Ratio of the first non-kernel eigenvalue to the zero threshold; a
    /// ratio below 10 marks the kernel split as ambiguous.
    pub gap_ratio: f64,
    pub ambiguous: bool,
    /// Condition number of the weighted Gram matrix of the basis.
    pub gram_condition: f64,
}

/// Extract the kernel of the weighted 1-form Laplacian; its dimension is the
/// first Betti number.
pub fn harmonic_basis(mesh: &SurfaceMesh, hodge: &Hodge1Assembly) -> Result<HarmonicBasis> {
    let a1 = hodge.laplacian_matrix();
    let m1 = Csr::from_diag(&hodge.star1);
    let ne = hodge.n_edges();
    // the 1-form Laplacian is PSD; any negative shift brackets it
    let scale = gershgorin_scale(&a1, &hodge.star1);
    let count = 8.min(ne);
    let result = eigensolve_pair(&a1, &m1, count, -0.05 * scale.max(1e-300))?;
    let thr = result.threshold;
    let kernel_idx: Vec<usize> = result
        .eigenvalues
        .iter()
        .enumerate()
        .take_while(|(_, &x)| x <= thr)
        .map(|(i, _)| i)
        .collect();
    let b1 = kernel_idx.len();
    if !result.complete && b1 + 1 > count {
        return Err(Error::BracketNotEstablished(
            "kernel dimension reaches the computed window".into(),
        ));
    }
    let first_nonkernel = result.eigenvalues.get(b1).copied().unwrap_or(f64::INFINITY);
    let gap_ratio = if thr > 0.0 { first_nonkernel / thr } else { f64::INFINITY };
    let vectors = result
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Internal("kernel extraction needs eigenvectors".into()))?;
    let mut forms = Vec::with_capacity(b1);
    let mut residuals = Vec::with_capacity(b1);
    let mut sharp = Vec::with_capacity(b1);
    for &k in &kernel_idx {
        let w = vectors.column(k).into_owned();
        let norm = weighted_norm(&w, &hodge.star1);
        let dw = hodge.exterior_derivative(&w);
        let d_res = weighted_norm(&dw, &hodge.star2) / norm;
        let delta = hodge.codifferential(&w);
        let c_res = weighted_norm(&delta, &hodge.star0) / norm;
        residuals.push((d_res, c_res));
        sharp.push(sharp_vectors(mesh, &w)?);
        forms.push(w);
    }
    // Gram condition in the star1 inner product
    let gram_condition = if b1 > 0 {
        let mut g = DMatrix::zeros(b1, b1);
        for i in 0..b1 {
            for j in 0..b1 {
                g[(i, j)] = weighted_dot(&forms[i], &forms[j], &hodge.star1);
            }
        }
        let ev = g.symmetric_eigen().eigenvalues;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &x in ev.iter() {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    } else {
        1.0
    };
    Ok(HarmonicBasis {
        forms,
        b1,
        residuals,
        sharp,
        gap_ratio,
        ambiguous: gap_ratio < 10.0,
        gram_condition,
    })
}

fn weighted_dot(a: &DVector<f64>, b: &DVector<f64>, w: &DVector<f64>) -> f64 {
    (0..a.len()).map(|i| a[i] * w[i] * b[i]).sum()
}

fn weighted_norm(a: &DVector<f64>, w: &DVector<f64>) -> f64 {
    weighted_dot(a, a, w).sqrt()
}

/// Gershgorin-type upper bound on |eigenvalues| of (A, diag(m)).
fn gershgorin_scale(a: &Csr, m_diag: &DVector<f64>) -> f64 {
    let mut bound = 0.0f64;
    for i in 0..a.nrows {
        let (_, vals) = a.row(i);
        let row_sum: f64 = vals.iter().map(|v| v.abs()).sum();
        if m_diag[i] > 0.0 {
            bound = bound.max(row_sum / m_diag[i]);
        }
    }
    bound
}

/// Verify that the Jacobi potential of an immersion is constant; returns the
/// constant or a composition-not-applicable error.
pub fn check_constant_potential(imm: &Immersion, samples: usize, seed: u64) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut first = 0.0;
    for k in 0..samples.max(2) {
        let q = imm.random_param(&mut rng);
        let pot = imm.point_geometry(&q)?.potential;
        if k == 0 {
            first = pot;
        }
        lo = lo.min(pot);
        hi = hi.max(pot);
    }
    if hi - lo > 1e-9 * first.abs().max(1.0) {
        return Err(Error::CompositionNotApplicable(format!(
            "potential varies over the surface: range [{lo}, {hi}]"
        )));
    }
    Ok(first)
}

/// Künneth composition for product immersions with constant potential:
/// eigenvalues are all sums of factor Laplacian eigenvalues minus the
/// potential, truncated to the provably complete window; b1 adds up.
pub fn compose_product(
    factor_spectra: &[SpectralResult],
    factor_b1: &[usize],
    constant_potential: f64,
) -> Result<(SpectralResult, usize)> {
    if factor_spectra.is_empty() || factor_spectra.len() != factor_b1.len() {
        return Err(Error::CompositionNotApplicable(
            "factor spectra and Betti lists must be non-empty and aligned".into(),
        ));
    }
    for r in factor_spectra {
        if r.eigenvalues.is_empty() {
            return Err(Error::CompositionNotApplicable("empty factor spectrum".into()));
        }
    }
    // all sums of one eigenvalue per factor
    let mut sums = vec![0.0f64];
    for r in factor_spectra {
        let mut next = Vec::with_capacity(sums.len() * r.eigenvalues.len());
        for &s in &sums {
            for &x in &r.eigenvalues {
                next.push(s + x);
            }
        }
        sums = next;
    }
    // completeness bound: any omitted sum exceeds, for some factor, that
    // factor's computed max plus the other factors' minima
    let mins: Vec<f64> = factor_spectra
        .iter()
        .map(|r| r.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
        .collect();
    let total_min: f64 = mins.iter().sum();
    let mut cutoff = f64::INFINITY;
    let mut all_complete = true;
    for (k, r) in factor_spectra.iter().enumerate() {
        if r.complete {
            continue;
        }
        all_complete = false;
        let max_k = r.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        cutoff = cutoff.min(max_k + (total_min - mins[k]));
    }
    sums.sort_by(f64::total_cmp);
    let eigenvalues: Vec<f64> = sums
        .into_iter()
        .filter(|&s| s <= cutoff)
        .map(|s| s - constant_potential)
        .collect();
    let scale = factor_spectra.iter().map(|r| r.scale).fold(0.0f64, f64::max)
        + constant_potential.abs();
    let threshold = KERNEL_TAU * scale.max(f64::MIN_POSITIVE);
    let max_residual = factor_spectra.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let mut out = SpectralResult {
        eigenvalues,
        eigenvectors: None,
        neg_count: 0,
        zero_count: 0,
        threshold,
        scale,
        max_residual,
        complete: all_complete,
    };
    out.classify();
    Ok((out, factor_b1.iter().sum()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient;
    use crate::discretize::{assemble, assemble_hodge1, icosphere_mesh, torus_grid_mesh};
    use crate::immersion::Immersion;
    use std::sync::Arc;

    fn shrinker() -> Immersion {
        let amb = Arc::new(ambient::make_gaussian_euclidean(3, 1.0).unwrap());
        Immersion::shrinker_sphere(amb).unwrap()
    }

    fn zero_potential(asm: &OperatorAssembly) -> OperatorAssembly {
        let mut out = asm.clone();
        out.p = Csr::from_diag(&DVector::zeros(asm.dim()));
        out.pot_max = 0.0;
        out
    }

    #[test]
    fn unit_sphere_laplacian_spectrum() {
        let amb = Arc::new(ambient::make_sphere_cylinder(2, 1, 1.0).unwrap());
        let imm = Immersion::slice_sphere(amb).unwrap();
        let mesh = icosphere_mesh(&imm, 3).unwrap();
        let asm = zero_potential(&assemble(&mesh, &imm).unwrap());
        let r = eigensolve(&asm, 10).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-10, "mu0 = {}", r.eigenvalues[0]);
        let expected = [0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0];
        for (k, &e) in expected.iter().enumerate().skip(1) {
            let got = r.eigenvalues[k];
            assert!((got - e).abs() / e < 0.02, "mu_{k} = {got}, want {e}");
        }
        assert!(r.max_residual < 1e-8);
    }

    #[test]
    fn shrinker_sphere_index_four() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 3).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let r = eigensolve(&asm, 12).unwrap();
        let expected = [-2.0, -1.0, -1.0, -1.0];
        for (k, &e) in expected.iter().enumerate() {
            let got = r.eigenvalues[k];
            assert!((got - e).abs() / e.abs() < 0.02, "mu_{k} = {got}");
        }
        assert!(r.eigenvalues[4] > 0.0);
        assert_eq!(f_index(&r).unwrap(), 4);
    }

    #[test]
    fn iterative_matches_dense() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 2).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let a = asm.jacobi_matrix();
        let sigma = -(asm.pot_max + 1.0);
        let dense = dense_path(&a, &asm.m_f).unwrap();
        let iter = super::lanczos::shift_invert(&a, &asm.m_f, 8, sigma).unwrap();
        for k in 0..8 {
            assert!(
                (dense.eigenvalues[k] - iter.eigenvalues[k]).abs() < 1e-8 * dense.scale,
                "k={k}: dense {} vs lanczos {}",
                dense.eigenvalues[k],
                iter.eigenvalues[k]
            );
        }
        assert!(iter.max_residual < 1e-8);
    }

    #[test]
    fn index_invariant_under_weight_shift() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 2).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let r1 = eigensolve(&asm, 8).unwrap();
        // shifting f by +c scales every matrix by e^{-c}
        let c: f64 = 0.7;
        let s = (-c).exp();
        let scaled = OperatorAssembly {
            m_f: asm.m_f.add_scaled(&asm.m_f, s - 1.0),
            s_f: asm.s_f.add_scaled(&asm.s_f, s - 1.0),
            p: asm.p.add_scaled(&asm.p, s - 1.0),
            vol_f: asm.vol_f * s,
            pot_max: asm.pot_max,
        };
        let r2 = eigensolve(&scaled, 8).unwrap();
        for k in 0..8 {
            assert!((r1.eigenvalues[k] - r2.eigenvalues[k]).abs() < 1e-10 * r1.scale);
        }
        assert_eq!(f_index(&r1).unwrap(), f_index(&r2).unwrap());
    }

    #[test]
    fn count_below_monotone_and_bracketed() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 2).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let r = eigensolve(&asm, 8).unwrap();
        let mut prev = 0;
        for eta in [-3.0, -1.5, 0.0, 0.5, 2.0] {
            let c = count_below(&r, eta).unwrap().count;
            assert!(c >= prev, "count_below not monotone at {eta}");
            prev = c;
        }
    }

    #[test]
    fn bracket_error_when_window_too_small() {
        let r = SpectralResult {
            eigenvalues: vec![-2.0, -1.0],
            eigenvectors: None,
            neg_count: 2,
            zero_count: 0,
            threshold: 1e-8,
            scale: 2.0,
            max_residual: 0.0,
            complete: false,
        };
        assert!(matches!(f_index(&r), Err(Error::BracketNotEstablished(_))));
    }

    #[test]
    fn sphere_has_no_harmonic_forms() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 2).unwrap();
        let h = assemble_hodge1(&mesh, &imm).unwrap();
        let basis = harmonic_basis(&mesh, &h).unwrap();
        assert_eq!(basis.b1, 0);
        assert!(basis.forms.is_empty());
    }

    #[test]
    fn flat_torus_has_two_exact_harmonic_forms() {
        let imm = Immersion::flat_torus(1.0, 1.0);
        let mesh = torus_grid_mesh(&imm, 16, 16).unwrap();
        let h = assemble_hodge1(&mesh, &imm).unwrap();
        let basis = harmonic_basis(&mesh, &h).unwrap();
        assert_eq!(basis.b1, 2);
        assert!(!basis.ambiguous, "gap ratio {}", basis.gap_ratio);
        for &(dr, cr) in &basis.residuals {
            assert!(dr < 1e-10 && cr < 1e-10, "residuals {dr} {cr}");
        }
    }

    #[test]
    fn weighted_torus_of_revolution_has_b1_two() {
        let amb = Arc::new(ambient::make_gaussian_euclidean(3, 1.0).unwrap());
        let imm = Immersion::torus_revolution(amb, 2.0, 0.5).unwrap();
        let mesh = torus_grid_mesh(&imm, 16, 16).unwrap();
        let h = assemble_hodge1(&mesh, &imm).unwrap();
        let basis = harmonic_basis(&mesh, &h).unwrap();
        assert_eq!(basis.b1, 2);
        for &(dr, cr) in &basis.residuals {
            assert!(dr < 1e-6 && cr < 1e-6, "residuals {dr} {cr}");
        }
    }

    #[test]
    fn compose_product_closed_form() {
        let sphere = SpectralResult {
            eigenvalues: vec![0.0, 2.0, 2.0, 2.0, 6.0],
            eigenvectors: None,
            neg_count: 0,
            zero_count: 1,
            threshold: 1e-8,
            scale: 6.0,
            max_residual: 0.0,
            complete: false,
        };
        let circle = SpectralResult {
            eigenvalues: vec![0.0, 1.0, 1.0, 4.0, 4.0],
            eigenvectors: None,
            neg_count: 0,
            zero_count: 1,
            threshold: 1e-8,
            scale: 4.0,
            max_residual: 0.0,
            complete: false,
        };
        let (r, b1) = compose_product(&[sphere, circle], &[0, 1], 2.0).unwrap();
        assert_eq!(b1, 1);
        let want = [-2.0, -1.0, -1.0, 0.0, 0.0, 0.0];
        for (k, &e) in want.iter().enumerate() {
            assert!((r.eigenvalues[k] - e).abs() < 1e-12, "k={k}: {}", r.eigenvalues[k]);
        }
        assert_eq!(r.neg_count, 3);
    }

    #[test]
    fn compose_single_factor_identity() {
        let r0 = SpectralResult {
            eigenvalues: vec![0.0, 1.0, 3.0],
            eigenvectors: None,
            neg_count: 0,
            zero_count: 1,
            threshold: 1e-8,
            scale: 3.0,
            max_residual: 0.0,
            complete: true,
        };
        let (r, b1) = compose_product(&[r0.clone()], &[2], 0.0).unwrap();
        assert_eq!(b1, 2);
        assert_eq!(r.eigenvalues, r0.eigenvalues);
    }

    #[test]
    fn nonconstant_potential_rejected() {
        let amb = Arc::new(ambient::make_gaussian_euclidean(3, 1.0).unwrap());
        let imm = Immersion::torus_revolution(amb, 2.0, 0.5).unwrap();
        let err = check_constant_potential(&imm, 20, 3).unwrap_err();
        assert!(matches!(err, Error::CompositionNotApplicable(_)));
        let shr = shrinker();
        let pot = check_constant_potential(&shr, 20, 3).unwrap();
        assert!((pot - 2.0).abs() < 1e-10);
    }
}
