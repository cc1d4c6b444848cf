//! Minimal quaternion arithmetic and small quaternionic Hermitian matrices.
//!
//! Both projective families are driven through this backbone: complex scalars
//! are the quaternions with vanishing j/k parts, so rank-one projection
//! matrices over C and H share one implementation. Matrices are tiny
//! ((rank+1) square), so no attempt is made at being clever.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ZERO: Quat = Quat { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ONE: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: Quat = Quat { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn real(w: f64) -> Self {
        Quat { w, x: 0.0, y: 0.0, z: 0.0 }
    }

    pub fn conj(self) -> Self {
        Quat { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn scale(self, s: f64) -> Self {
        Quat { w: self.w * s, x: self.x * s, y: self.y * s, z: self.z * s }
    }

    pub fn is_complex(self, tol: f64) -> bool {
        self.y.abs() < tol && self.z.abs() < tol
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, o: Quat) -> Quat {
        Quat::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, o: Quat) -> Quat {
        Quat::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quat {
    type Output = Quat;
    fn mul(self, o: Quat) -> Quat {
        Quat::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

/// Dense square matrix of quaternions, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix {
    pub n: usize,
    pub data: Vec<Quat>,
}

impl QMatrix {
    pub fn zeros(n: usize) -> Self {
        QMatrix { n, data: vec![Quat::ZERO; n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> Quat {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Quat) {
        self.data[i * self.n + j] = v;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> QMatrix {
        let mut out = QMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn hermitize(&self) -> QMatrix {
        let adj = self.adjoint();
        let mut out = QMatrix::zeros(self.n);
        for i in 0..self.n * self.n {
            out.data[i] = (self.data[i] + adj.data[i]).scale(0.5);
        }
        out
    }

    pub fn add(&self, o: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(self.n);
        for i in 0..self.n * self.n {
            out.data[i] = self.data[i] + o.data[i];
        }
        out
    }

    pub fn sub(&self, o: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(self.n);
        for i in 0..self.n * self.n {
            out.data[i] = self.data[i] - o.data[i];
        }
        out
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        let mut out = QMatrix::zeros(self.n);
        for i in 0..self.n * self.n {
            out.data[i] = self.data[i].scale(s);
        }
        out
    }

    pub fn matmul(&self, o: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = Quat::ZERO;
                for k in 0..self.n {
                    acc = acc + self.get(i, k) * o.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// A v with v a quaternion column vector.
    pub fn mul_qvec(&self, v: &[Quat]) -> Vec<Quat> {
        let mut out = vec![Quat::ZERO; self.n];
        for i in 0..self.n {
            let mut acc = Quat::ZERO;
            for j in 0..self.n {
                acc = acc + self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Re tr(A B): the real part of the trace of the product.
    pub fn re_trace_prod(&self, o: &QMatrix) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for k in 0..self.n {
                acc += (self.get(i, k) * o.get(k, i)).w;
            }
        }
        acc
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sq()).sum()
    }
}

/// Rank-one Hermitian projection z z* from a unit column z.
pub fn rank_one_projection(z: &[Quat]) -> QMatrix {
    let n = z.len();
    let mut p = QMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            p.set(i, j, z[i] * z[j].conj());
        }
    }
    p
}

pub fn normalize_qvec(v: &mut [Quat]) {
    let n: f64 = v.iter().map(|q| q.norm_sq()).sum::<f64>().sqrt();
    for q in v.iter_mut() {
        *q = q.scale(1.0 / n);
    }
}

/// Dominant-eigenvector power iteration started from `seed`. The matrices we
/// feed in are small perturbations of rank-one projections, so the spectral
/// gap is close to 1 and convergence takes a handful of sweeps.
pub fn top_eigenvector(a: &QMatrix, seed: &[Quat]) -> Vec<Quat> {
    let mut v: Vec<Quat> = seed.to_vec();
    normalize_qvec(&mut v);
    let mut prev = rank_one_projection(&v);
    for _ in 0..200 {
        let mut w = a.mul_qvec(&v);
        normalize_qvec(&mut w);
        let proj = rank_one_projection(&w);
        let delta = proj.sub(&prev).frobenius_sq().sqrt();
        v = w;
        if delta < 1e-15 {
            break;
        }
        prev = proj;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_algebra() {
        let i = Quat::new(0.0, 1.0, 0.0, 0.0);
        let j = Quat::new(0.0, 0.0, 1.0, 0.0);
        let k = Quat::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(i * i, Quat::real(-1.0));
        let q = Quat::new(1.0, 2.0, 3.0, 4.0);
        let p = (q * q.conj()).w;
        assert!((p - q.norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn power_iteration_recovers_projector() {
        // perturb a projection and re-project
        let mut z = vec![Quat::real(1.0), Quat::new(0.3, 0.2, 0.0, 0.0)];
        normalize_qvec(&mut z);
        let p = rank_one_projection(&z);
        let mut noise = QMatrix::zeros(2);
        noise.set(0, 1, Quat::new(1e-5, -2e-5, 0.0, 0.0));
        let a = p.add(&noise).hermitize();
        let v = top_eigenvector(&a, &z);
        let q = rank_one_projection(&v);
        // q is an exact projection
        let idem = q.matmul(&q).sub(&q).frobenius_sq().sqrt();
        assert!(idem < 1e-14);
        // and close to p
        assert!(q.sub(&p).frobenius_sq().sqrt() < 1e-4);
    }
}
