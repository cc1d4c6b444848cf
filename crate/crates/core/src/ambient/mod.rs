//! Weighted ambient spaces realized as explicit submanifolds of R^d.
//!
//! Three families are provided: the Gaussian weighted Euclidean space, round
//! sphere cylinders S^k x R^j, and projective cylinders (CP^n or HP^p times a
//! Euclidean factor). Every geometric quantity downstream code consumes is an
//! oracle evaluated on raw R^d coordinates: weight f, its gradient and
//! Hessian, the tangent projector of M, the second fundamental form of M in
//! R^d, the curvature tensor, and the Bakry-Emery Ricci tensor.

mod projective;

pub use projective::{Family, ProjectiveOps};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quat::QMatrix;

/// Finite-difference step for the projective second fundamental form; one
/// Richardson level is applied on top of central differences.
const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub enum AmbientKind {
    Gaussian { n: usize },
    SphereCylinder { k: usize, j: usize },
    ProjectiveCylinder { ops: ProjectiveOps, j: usize },
}

#[derive(Debug, Clone)]
pub struct AmbientSpace {
    pub kind: AmbientKind,
    /// Soliton constant: Ric_f = lambda g.
    pub lambda: f64,
    /// Dimension m+1 of M.
    pub dim_m_plus_1: usize,
    /// Dimension d of the Euclidean container.
    pub embed_dim_d: usize,
}

/// Construct the Gaussian shrinking soliton (R^n, lambda |x|^2 / 2).
pub fn make_gaussian_euclidean(n: usize, lambda: f64) -> Result<AmbientSpace> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "Gaussian space needs n >= 2, got {n}"
        )));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidDimension("lambda must be positive".into()));
    }
    Ok(AmbientSpace {
        kind: AmbientKind::Gaussian { n },
        lambda,
        dim_m_plus_1: n,
        embed_dim_d: n,
    })
}

/// Construct S^k(sqrt((k-1)/lambda)) x R^j embedded in R^{k+1+j}, with
/// weight lambda |t|^2 / 2 on the Euclidean factor.
pub fn make_sphere_cylinder(k: usize, j: usize, lambda: f64) -> Result<AmbientSpace> {
    if k < 2 {
        return Err(Error::InvalidDimension(format!(
            "sphere factor needs k >= 2, got {k}"
        )));
    }
    if j < 1 {
        return Err(Error::InvalidDimension("Euclidean factor needs j >= 1".into()));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidDimension("lambda must be positive".into()));
    }
    Ok(AmbientSpace {
        kind: AmbientKind::SphereCylinder { k, j },
        lambda,
        dim_m_plus_1: k + j,
        embed_dim_d: k + 1 + j,
    })
}

/// Construct (CP^n or HP^p) x R^j with the projection-matrix embedding.
/// lambda is forced to the Einstein constant of the projective factor.
pub fn make_projective_cylinder(family: Family, rank: usize, j: usize) -> Result<AmbientSpace> {
    if rank < 1 {
        return Err(Error::InvalidDimension("projective rank must be >= 1".into()));
    }
    let ops = ProjectiveOps::new(family, rank);
    let k = ops.manifold_dim();
    let lambda = ops.einstein_constant();
    let q = ops.q;
    Ok(AmbientSpace {
        kind: AmbientKind::ProjectiveCylinder { ops, j },
        lambda,
        dim_m_plus_1: k + j,
        embed_dim_d: q + j,
    })
}

impl AmbientSpace {
    /// Offset of the flat (t) coordinate block inside R^d. For the Gaussian
    /// space every coordinate is a t coordinate.
    pub fn euclid_offset(&self) -> usize {
        match &self.kind {
            AmbientKind::Gaussian { .. } => 0,
            AmbientKind::SphereCylinder { k, .. } => k + 1,
            AmbientKind::ProjectiveCylinder { ops, .. } => ops.q,
        }
    }

    pub fn sphere_radius(&self) -> Option<f64> {
        match &self.kind {
            AmbientKind::SphereCylinder { k, .. } => {
                Some(((*k as f64 - 1.0) / self.lambda).sqrt())
            }
            _ => None,
        }
    }

    /// For CP^n the conventional container dimension quoted with the index
    /// bound (m + 2 + 2 n^2) differs from the embedding-derived q + j; both
    /// are reported and the embedding value is used for computations.
    pub fn stated_embed_dim(&self) -> usize {
        match &self.kind {
            AmbientKind::ProjectiveCylinder { ops, .. } => {
                let m = self.dim_m_plus_1 - 1;
                match ops.family {
                    Family::Complex => m + 2 + 2 * ops.rank * ops.rank,
                    Family::Quaternionic => {
                        let p = ops.rank;
                        m + 2 + 2 * p * p - p
                    }
                }
            }
            _ => self.embed_dim_d,
        }
    }

    // ---- weight oracles -------------------------------------------------

    pub fn weight(&self, x: &DVector<f64>) -> f64 {
        let off = self.euclid_offset();
        let t = x.rows(off, x.len() - off);
        0.5 * self.lambda * t.norm_squared()
    }

    pub fn grad_weight(&self, x: &DVector<f64>) -> DVector<f64> {
        let off = self.euclid_offset();
        let mut g = DVector::zeros(x.len());
        for i in off..x.len() {
            g[i] = self.lambda * x[i];
        }
        g
    }

    /// Hess^M f (u, v); equal to the Euclidean Hessian restricted to the
    /// flat block since the t factor is totally geodesic and flat.
    pub fn hess_weight(&self, _x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let off = self.euclid_offset();
        let mut acc = 0.0;
        for i in off..u.len() {
            acc += u[i] * v[i];
        }
        self.lambda * acc
    }

    // ---- constraint and retraction --------------------------------------

    pub fn constraint_residual(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            AmbientKind::Gaussian { .. } => 0.0,
            AmbientKind::SphereCylinder { k, .. } => {
                let r = self.sphere_radius().unwrap();
                (x.rows(0, k + 1).norm() - r).abs()
            }
            AmbientKind::ProjectiveCylinder { ops, .. } => {
                let rho = ops.vec_to_mat(&x.rows(0, ops.q).into_owned());
                let idem = rho.matmul(&rho).sub(&rho).frobenius_sq().sqrt();
                let tr: f64 = (0..ops.nmat).map(|i| rho.get(i, i).w).sum();
                idem + (tr - 1.0).abs()
            }
        }
    }

    pub fn retract(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.kind {
            AmbientKind::Gaussian { .. } => x.clone(),
            AmbientKind::SphereCylinder { k, .. } => {
                let r = self.sphere_radius().unwrap();
                let mut y = x.clone();
                let s = x.rows(0, k + 1);
                let n = s.norm();
                for i in 0..=*k {
                    y[i] = x[i] * r / n;
                }
                y
            }
            AmbientKind::ProjectiveCylinder { ops, .. } => {
                let a = ops.vec_to_mat(&x.rows(0, ops.q).into_owned());
                let seed = ops.seed_from(&a);
                let rho = ops.retract_mat(&a, &seed);
                let mut y = x.clone();
                y.rows_mut(0, ops.q).copy_from(&ops.mat_to_vec(&rho));
                y
            }
        }
    }

    // ---- tangent structure ----------------------------------------------

    /// Symmetric idempotent projector onto T_x M, as a d x d matrix.
    pub fn tangent_projector(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.embed_dim_d;
        match &self.kind {
            AmbientKind::Gaussian { .. } => DMatrix::identity(d, d),
            AmbientKind::SphereCylinder { k, .. } => {
                let mut p = DMatrix::identity(d, d);
                let s = x.rows(0, k + 1);
                let nu = s / s.norm();
                for a in 0..=*k {
                    for b in 0..=*k {
                        p[(a, b)] -= nu[a] * nu[b];
                    }
                }
                p
            }
            AmbientKind::ProjectiveCylinder { ops, j } => {
                let rho = ops.vec_to_mat(&x.rows(0, ops.q).into_owned());
                let mut p = DMatrix::zeros(d, d);
                for a in 0..ops.q {
                    let mut e = DVector::zeros(ops.q);
                    e[a] = 1.0;
                    let col =
                        ops.mat_to_vec(&ops.tangent_project_mat(&rho, &ops.vec_to_mat(&e)));
                    for b in 0..ops.q {
                        p[(b, a)] = col[b];
                    }
                }
                for a in 0..*j {
                    p[(ops.q + a, ops.q + a)] = 1.0;
                }
                p
            }
        }
    }

    /// Orthonormal basis of T_x M (m+1 vectors).
    pub fn tangent_frame(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let p = self.tangent_projector(x);
        let d = self.embed_dim_d;
        let mut frame: Vec<DVector<f64>> = Vec::new();
        for a in 0..d {
            let mut v = p.column(a).into_owned();
            for u in &frame {
                let c = u.dot(&v);
                v -= c * u;
            }
            for u in &frame {
                let c = u.dot(&v);
                v -= c * u;
            }
            let n = v.norm();
            if n > 1e-8 {
                frame.push(v / n);
            }
            if frame.len() == self.dim_m_plus_1 {
                break;
            }
        }
        frame
    }

    // ---- second fundamental form of M in R^d ----------------------------

    /// II(u, v) as a vector in R^d, normal to M.
    pub fn second_fundamental(
        &self,
        x: &DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> DVector<f64> {
        match &self.kind {
            AmbientKind::Gaussian { .. } => DVector::zeros(self.embed_dim_d),
            AmbientKind::SphereCylinder { k, .. } => {
                let r = self.sphere_radius().unwrap();
                let mut us = 0.0;
                for a in 0..=*k {
                    us += u[a] * v[a];
                }
                // II(u,v) = -<u_s, v_s> x_s / r^2  (curvature vector points
                // toward the sphere's center)
                let mut out = DVector::zeros(self.embed_dim_d);
                for a in 0..=*k {
                    out[a] = -us * x[a] / (r * r);
                }
                out
            }
            AmbientKind::ProjectiveCylinder { .. } => {
                if (u - v).norm() < 1e-15 {
                    self.ii_fd_single(x, u)
                } else {
                    // polarization: II(u,v) = (II(u+v,u+v) - II(u-v,u-v)) / 4
                    let a = self.ii_fd_single(x, &(u + v));
                    let b = self.ii_fd_single(x, &(u - v));
                    (a - b) / 4.0
                }
            }
        }
    }

    /// Finite-difference II(v, v) for the projective embedding: central
    /// second difference of the retracted curve, one Richardson level, then
    /// projection onto the normal space.
    fn ii_fd_single(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let (ops, _j) = match &self.kind {
            AmbientKind::ProjectiveCylinder { ops, j } => (ops, j),
            _ => unreachable!(),
        };
        let q = ops.q;
        let x_mat = x.rows(0, q).into_owned();
        let v_mat = v.rows(0, q).into_owned();
        let base = ops.vec_to_mat(&x_mat);
        let seed = ops.seed_from(&base);
        let eval = |s: f64| -> DVector<f64> {
            let a = ops.vec_to_mat(&(&x_mat + s * &v_mat));
            ops.mat_to_vec(&ops.retract_mat(&a, &seed))
        };
        let c0 = eval(0.0);
        let second = |h: f64| (eval(h) + eval(-h) - 2.0 * &c0) / (h * h);
        let d_h = second(FD_STEP);
        let d_h2 = second(FD_STEP / 2.0);
        let acc = (4.0 * d_h2 - d_h) / 3.0;
        // embed into R^d (the flat block of the curve is linear) and strip
        // the tangential acceleration of the retraction curve
        let mut full = DVector::zeros(self.embed_dim_d);
        full.rows_mut(0, q).copy_from(&acc);
        let p = self.tangent_projector(x);
        &full - p * full.clone()
    }

    // ---- curvature oracles -----------------------------------------------

    /// Full curvature 4-tensor <R(x,y)z,w>. Sign convention: on a round
    /// sphere 2-plane the (x,y,x,y) value is positive.
    pub fn riemann(
        &self,
        p: &DVector<f64>,
        a: &DVector<f64>,
        b: &DVector<f64>,
        c: &DVector<f64>,
        e: &DVector<f64>,
    ) -> f64 {
        match &self.kind {
            AmbientKind::Gaussian { .. } => 0.0,
            AmbientKind::SphereCylinder { k, .. } => {
                let r2 = self.sphere_radius().unwrap().powi(2);
                let dot_s = |u: &DVector<f64>, v: &DVector<f64>| -> f64 {
                    (0..=*k).map(|i| u[i] * v[i]).sum()
                };
                (dot_s(a, c) * dot_s(b, e) - dot_s(a, e) * dot_s(b, c)) / r2
            }
            AmbientKind::ProjectiveCylinder { .. } => {
                // Gauss equation in the flat container
                let ii_ac = self.second_fundamental(p, a, c);
                let ii_be = self.second_fundamental(p, b, e);
                let ii_ae = self.second_fundamental(p, a, e);
                let ii_bc = self.second_fundamental(p, b, c);
                ii_ac.dot(&ii_be) - ii_ae.dot(&ii_bc)
            }
        }
    }

    /// <R(x,y)x,y> with non-tangent inputs projected (a warning is emitted).
    pub fn riemann_sectional_numerator(
        &self,
        p: &DVector<f64>,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> f64 {
        let proj = self.tangent_projector(p);
        let px = &proj * x;
        let py = &proj * y;
        if (&px - x).norm() > 1e-8 * x.norm().max(1.0)
            || (&py - y).norm() > 1e-8 * y.norm().max(1.0)
        {
            eprintln!("warning: non-tangent input to riemann_sectional_numerator; projected");
        }
        self.riemann(p, &px, &py, &px, &py)
    }

    /// Ricci tensor of M.
    pub fn ricci(&self, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match &self.kind {
            AmbientKind::Gaussian { .. } => 0.0,
            AmbientKind::SphereCylinder { k, .. } => {
                let mut dot_s = 0.0;
                for i in 0..=*k {
                    dot_s += u[i] * v[i];
                }
                // (k-1)/r^2 = lambda on the sphere block
                self.lambda * dot_s
            }
            AmbientKind::ProjectiveCylinder { .. } => {
                // frame sum over T_p M via the Gauss equation
                let frame = self.tangent_frame(p);
                let ii_uv = self.second_fundamental(p, u, v);
                let mut acc = 0.0;
                for e in &frame {
                    let ii_ee = self.second_fundamental(p, e, e);
                    let ii_ue = self.second_fundamental(p, u, e);
                    let ii_ve = self.second_fundamental(p, v, e);
                    acc += ii_uv.dot(&ii_ee) - ii_ue.dot(&ii_ve);
                }
                acc
            }
        }
    }

    /// Bakry-Emery Ricci tensor Ric + Hess f.
    pub fn ric_f(&self, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.ricci(p, u, v) + self.hess_weight(p, u, v)
    }

    /// Complex structure J acting on tangent vectors (complex projective
    /// cylinders only; the flat block is annihilated).
    pub fn complex_structure(&self, p: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        match &self.kind {
            AmbientKind::ProjectiveCylinder { ops, .. } if ops.family == Family::Complex => {
                let rho = ops.vec_to_mat(&p.rows(0, ops.q).into_owned());
                let x = ops.vec_to_mat(&v.rows(0, ops.q).into_owned());
                let jx = ops.complex_structure_mat(&rho, &x);
                let mut out = DVector::zeros(self.embed_dim_d);
                out.rows_mut(0, ops.q).copy_from(&ops.mat_to_vec(&jx));
                Some(out)
            }
            _ => None,
        }
    }

    pub fn projective_ops(&self) -> Option<&ProjectiveOps> {
        match &self.kind {
            AmbientKind::ProjectiveCylinder { ops, .. } => Some(ops),
            _ => None,
        }
    }

    pub fn euclid_factor_dim(&self) -> usize {
        match &self.kind {
            AmbientKind::Gaussian { n } => *n,
            AmbientKind::SphereCylinder { j, .. } => *j,
            AmbientKind::ProjectiveCylinder { j, .. } => *j,
        }
    }

    // ---- sampling ---------------------------------------------------------

    pub fn random_point<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        match &self.kind {
            AmbientKind::Gaussian { n } => DVector::from_fn(*n, |_, _| gaussian(rng)),
            AmbientKind::SphereCylinder { k, j } => {
                let r = self.sphere_radius().unwrap();
                let mut s = DVector::from_fn(k + 1, |_, _| gaussian(rng));
                s *= r / s.norm();
                let mut x = DVector::zeros(self.embed_dim_d);
                x.rows_mut(0, k + 1).copy_from(&s);
                for a in 0..*j {
                    x[k + 1 + a] = gaussian(rng);
                }
                x
            }
            AmbientKind::ProjectiveCylinder { ops, j } => {
                let z = ops.random_unit_column(rng);
                let rho = crate::quat::rank_one_projection(&z);
                let mut x = DVector::zeros(self.embed_dim_d);
                x.rows_mut(0, ops.q).copy_from(&ops.mat_to_vec(&rho));
                for a in 0..*j {
                    x[ops.q + a] = gaussian(rng);
                }
                x
            }
        }
    }

    /// Random unit tangent vector at x.
    pub fn random_tangent<R: Rng>(&self, rng: &mut R, x: &DVector<f64>) -> DVector<f64> {
        let p = self.tangent_projector(x);
        loop {
            let raw = DVector::from_fn(self.embed_dim_d, |_, _| gaussian(rng));
            let v = &p * raw;
            let n = v.norm();
            if n > 1e-6 {
                return v / n;
            }
        }
    }

    /// Randomized self-test of all oracles.
    pub fn ambient_report(&self, samples: usize, seed: u64) -> SolitonReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rep = SolitonReport {
            samples,
            seed,
            lambda: self.lambda,
            embed_dim_d: self.embed_dim_d,
            stated_embed_dim: self.stated_embed_dim(),
            ..SolitonReport::default()
        };
        for _ in 0..samples.max(1) {
            let x = self.random_point(&mut rng);
            rep.max_constraint_residual = rep
                .max_constraint_residual
                .max(self.constraint_residual(&x));
            let u = self.random_tangent(&mut rng, &x);
            let v = self.random_tangent(&mut rng, &x);
            // soliton identity Ric_f = lambda g
            let soliton = (self.ric_f(&x, &u, &v) - self.lambda * u.dot(&v)).abs();
            rep.max_soliton_residual = rep.max_soliton_residual.max(soliton);
            // tangent projector: symmetric idempotent of rank m+1
            let p = self.tangent_projector(&x);
            let idem = (&p * &p - &p).abs().max();
            let sym = (&p - p.transpose()).abs().max();
            let rank = (p.trace() - self.dim_m_plus_1 as f64).abs();
            rep.max_projector_residual = rep.max_projector_residual.max(idem.max(sym).max(rank));
            // Gauss-equation consistency between R and II oracles
            let gauss = {
                let lhs = self.riemann(&x, &u, &v, &u, &v);
                let ii_uu = self.second_fundamental(&x, &u, &u);
                let ii_vv = self.second_fundamental(&x, &v, &v);
                let ii_uv = self.second_fundamental(&x, &u, &v);
                let rhs = ii_uu.dot(&ii_vv) - ii_uv.norm_squared();
                (lhs - rhs).abs()
            };
            rep.max_gauss_residual = rep.max_gauss_residual.max(gauss);
            // symmetry of oracles
            let ric_sym = (self.ric_f(&x, &u, &v) - self.ric_f(&x, &v, &u)).abs();
            let ii_sym = (self.second_fundamental(&x, &u, &v)
                - self.second_fundamental(&x, &v, &u))
            .norm();
            rep.max_symmetry_residual = rep.max_symmetry_residual.max(ric_sym.max(ii_sym));
            // weight gradient vs directional finite difference
            let h = 1e-5;
            let df = (self.weight(&(&x + h * &u)) - self.weight(&(&x - h * &u))) / (2.0 * h);
            rep.max_weight_fd_residual = rep
                .max_weight_fd_residual
                .max((df - self.grad_weight(&x).dot(&u)).abs());
        }
        rep
    }

    /// Hermitian container matrix for a projective point (test helper).
    pub fn point_matrix(&self, x: &DVector<f64>) -> Option<QMatrix> {
        self.projective_ops()
            .map(|ops| ops.vec_to_mat(&x.rows(0, ops.q).into_owned()))
    }
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Max residuals over the sampled self-tests of an ambient's oracles.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolitonReport {
    pub samples: usize,
    pub seed: u64,
    pub lambda: f64,
    pub embed_dim_d: usize,
    pub stated_embed_dim: usize,
    pub max_constraint_residual: f64,
    pub max_soliton_residual: f64,
    pub max_projector_residual: f64,
    pub max_gauss_residual: f64,
    pub max_symmetry_residual: f64,
    pub max_weight_fd_residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_space_basics() {
        assert!(make_gaussian_euclidean(1, 1.0).is_err());
        let a = make_gaussian_euclidean(3, 2.0).unwrap();
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!((a.weight(&x) - 1.0).abs() < 1e-15);
        let u = DVector::from_vec(vec![0.3, -0.4, 0.5]);
        // Hess f = lambda id, flat curvature
        assert!((a.hess_weight(&x, &u, &u) - 2.0 * u.norm_squared()).abs() < 1e-14);
        assert_eq!(a.riemann_sectional_numerator(&x, &u, &x), 0.0);
        // soliton identity holds exactly
        assert!((a.ric_f(&x, &u, &u) - 2.0 * u.norm_squared()).abs() < 1e-14);
    }

    #[test]
    fn sphere_cylinder_closed_forms() {
        assert!(make_sphere_cylinder(1, 1, 1.0).is_err());
        let a = make_sphere_cylinder(2, 1, 1.0).unwrap();
        assert_eq!(a.embed_dim_d, 4);
        assert!((a.sphere_radius().unwrap() - 1.0).abs() < 1e-15);
        // point on the sphere equator, tangent to the sphere factor
        let x = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.7]);
        let u = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        assert!((a.ric_f(&x, &u, &u) - 1.0).abs() < 1e-14);
        // orthonormal sphere 2-plane has curvature 1 (unit sphere)
        let v = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        assert!((a.riemann_sectional_numerator(&x, &u, &v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sphere_cylinder_ii_magnitude() {
        // k=3, j=2, lambda=1: |II(V,V)| = sqrt(lambda/(k-1)) for unit sphere
        // tangent V
        let a = make_sphere_cylinder(3, 2, 1.0).unwrap();
        let r = a.sphere_radius().unwrap();
        assert!((r - 2.0f64.sqrt()).abs() < 1e-15);
        let mut x = DVector::zeros(6);
        x[0] = r;
        x[5] = 0.3;
        let v = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let ii = a.second_fundamental(&x, &v, &v);
        assert!((ii.norm() - (0.5f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_report_clean() {
        let a = make_gaussian_euclidean(3, 1.0).unwrap();
        let rep = a.ambient_report(100, 1);
        assert!(rep.max_soliton_residual < 1e-12);
        assert!(rep.max_projector_residual < 1e-12);
        assert!(rep.max_gauss_residual < 1e-12);
    }

    #[test]
    fn sphere_cylinder_report_clean() {
        let a = make_sphere_cylinder(2, 1, 1.0).unwrap();
        let rep = a.ambient_report(100, 2);
        assert!(rep.max_soliton_residual < 1e-10, "{:?}", rep);
        assert!(rep.max_projector_residual < 1e-10);
        assert!(rep.max_gauss_residual < 1e-10);
        assert!(rep.max_weight_fd_residual < 1e-8);
    }

    #[test]
    fn projective_einstein_constants() {
        let cp2 = make_projective_cylinder(Family::Complex, 2, 1).unwrap();
        assert!((cp2.lambda - 6.0).abs() < 1e-15);
        assert_eq!(cp2.embed_dim_d, 10);
        let hp1 = make_projective_cylinder(Family::Quaternionic, 1, 0).unwrap();
        assert!((hp1.lambda - 12.0).abs() < 1e-15);
        assert_eq!(hp1.embed_dim_d, 6);
        assert!(make_projective_cylinder(Family::Complex, 0, 0).is_err());
    }

    #[test]
    fn cp1_is_round_sphere_of_curvature_four() {
        let a = make_projective_cylinder(Family::Complex, 1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let x = a.random_point(&mut rng);
            let u = a.random_tangent(&mut rng, &x);
            let mut v = a.random_tangent(&mut rng, &x);
            // orthonormalize the 2-plane
            v -= u.dot(&v) * &u;
            v /= v.norm();
            let sec = a.riemann_sectional_numerator(&x, &u, &v);
            assert!((sec - 4.0).abs() < 1e-5, "sec = {sec}");
        }
    }

    #[test]
    fn projective_soliton_identity() {
        let a = make_projective_cylinder(Family::Complex, 2, 1).unwrap();
        let rep = a.ambient_report(20, 3);
        assert!(rep.max_soliton_residual < 1e-5, "{:?}", rep);
        assert!(rep.max_projector_residual < 1e-10);
        assert!(rep.max_constraint_residual < 1e-10);
    }
}
