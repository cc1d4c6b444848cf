//! Shift-invert Lanczos for large generalized symmetric eigenproblems.
//!
//! For A v = mu M v with sigma a strict lower bound of the spectrum,
//! K = A - sigma M is SPD and the M-self-adjoint operator T = K^{-1} M has
//! eigenvalues 1/(mu - sigma); its largest ones correspond to the smallest
//! mu. Inner solves use Jacobi-preconditioned CG; the Lanczos basis is kept
//! M-orthonormal with full reorthogonalization, so results are deterministic.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SpectralResult, KERNEL_TAU};
use crate::error::{Error, Result};
use crate::linalg::{pcg, Csr};

const RESIDUAL_TOL: f64 = 1e-8;

pub fn shift_invert(a: &Csr, m: &Csr, count: usize, sigma: f64) -> Result<SpectralResult> {
    let n = a.nrows;
    let k_mat = a.add_scaled(m, -sigma);
    let scale = spectral_scale(a, m);
    let mut steps = (2 * count + 40).clamp(60, n);
    loop {
        let (eigenvalues, vectors, max_residual) =
            run_lanczos(a, m, &k_mat, count, sigma, steps, scale)?;
        if max_residual <= RESIDUAL_TOL || steps >= n {
            return Ok(SpectralResult {
                eigenvalues,
                eigenvectors: Some(vectors),
                neg_count: 0,
                zero_count: 0,
                threshold: KERNEL_TAU * scale,
                scale,
                max_residual,
                complete: false,
            });
        }
        steps = (steps * 2).min(n);
    }
}

fn run_lanczos(
    a: &Csr,
    m: &Csr,
    k_mat: &Csr,
    count: usize,
    sigma: f64,
    steps: usize,
    scale: f64,
) -> Result<(Vec<f64>, DMatrix<f64>, f64)> {
    let n = a.nrows;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut v = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5);
    let mut mv = m.mul_vec(&v);
    let nv = v.dot(&mv).sqrt();
    v /= nv;
    mv /= nv;
    let mut basis: Vec<DVector<f64>> = vec![v.clone()];
    let mut m_basis: Vec<DVector<f64>> = vec![mv];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for j in 0..steps {
        let (mut w, rel) = pcg(k_mat, &m_basis[j], 1e-13, 40 * n);
        if rel > 1e-9 {
            return Err(Error::Internal(format!(
                "inner CG stalled at relative residual {rel:e}"
            )));
        }
        let alpha = w.dot(&m_basis[j]);
        alphas.push(alpha);
        // full reorthogonalization in the M-inner product (twice)
        for _ in 0..2 {
            for (vb, mvb) in basis.iter().zip(&m_basis) {
                let c = w.dot(mvb);
                w -= c * vb;
            }
        }
        let mw = m.mul_vec(&w);
        let beta = w.dot(&mw).sqrt();
        if !beta.is_finite() || beta < 1e-14 {
            break;
        }
        if j + 1 < steps {
            betas.push(beta);
            basis.push(&w / beta);
            m_basis.push(&mw / beta);
        }
    }
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    // largest theta <-> smallest mu
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let keep = count.min(k);
    let mut eigenvalues = Vec::with_capacity(keep);
    let mut vectors = DMatrix::zeros(n, keep);
    let mut max_residual = 0.0f64;
    for (col, &i) in order.iter().take(keep).enumerate() {
        let theta = eig.eigenvalues[i];
        if theta <= 0.0 {
            return Err(Error::Internal(
                "shift-invert operator produced a non-positive Ritz value".into(),
            ));
        }
        let mu = sigma + 1.0 / theta;
        let y = eig.eigenvectors.column(i);
        let mut x = DVector::zeros(n);
        for (j, vb) in basis.iter().enumerate() {
            x += y[j] * vb;
        }
        // M-normalize
        let mx = m.mul_vec(&x);
        let nx = x.dot(&mx).sqrt();
        x /= nx;
        let r = a.mul_vec(&x) - mu * m.mul_vec(&x);
        max_residual = max_residual.max(r.norm() / scale);
        eigenvalues.push(mu);
        vectors.set_column(col, &x);
    }
    Ok((eigenvalues, vectors, max_residual))
}

/// Gershgorin-type bound on |mu| with a lumped mass diagonal.
fn spectral_scale(a: &Csr, m: &Csr) -> f64 {
    let ones = DVector::from_element(m.ncols, 1.0);
    let lumped = m.mul_vec(&ones);
    let mut bound = 0.0f64;
    for i in 0..a.nrows {
        let (_, vals) = a.row(i);
        let row_sum: f64 = vals.iter().map(|v| v.abs()).sum();
        if lumped[i] > 0.0 {
            bound = bound.max(row_sum / lumped[i]);
        }
    }
    bound.max(f64::MIN_POSITIVE)
}
