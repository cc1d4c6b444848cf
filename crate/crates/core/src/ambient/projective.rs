//! Projection-matrix embeddings of the complex and quaternionic projective
//! spaces.
//!
//! Points of P are rank-one Hermitian projections rho = z z* over C or H,
//! living in the real vector space of Hermitian matrices equipped with the
//! inner product g(A, B) = (1/2) Re tr(A B). With this normalization the
//! induced metric has sectional curvatures in [1, 4] (P^1 is a round sphere
//! of radius 1/2) and the embedding is isotropic with |II(X,X)| = 2|X|^2.

use nalgebra::DVector;
use rand::Rng;

use crate::quat::{normalize_qvec, rank_one_projection, top_eigenvector, QMatrix, Quat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Complex,
    Quaternionic,
}

/// Coordinate chart between the Hermitian-matrix container and R^q.
#[derive(Debug, Clone)]
pub struct ProjectiveOps {
    pub family: Family,
    /// n for CP^n, p for HP^p.
    pub rank: usize,
    /// Matrix size rank + 1.
    pub nmat: usize,
    /// Real dimension of the Hermitian container.
    pub q: usize,
    /// g-orthonormal basis of the container.
    basis: Vec<QMatrix>,
}

impl ProjectiveOps {
    pub fn new(family: Family, rank: usize) -> Self {
        let nmat = rank + 1;
        let units: &[Quat] = match family {
            Family::Complex => &[Quat::ONE, Quat::I],
            Family::Quaternionic => &[
                Quat::ONE,
                Quat::I,
                Quat::new(0.0, 0.0, 1.0, 0.0),
                Quat::new(0.0, 0.0, 0.0, 1.0),
            ],
        };
        let mut basis = Vec::new();
        let s = std::f64::consts::SQRT_2;
        for i in 0..nmat {
            let mut e = QMatrix::zeros(nmat);
            e.set(i, i, Quat::real(s));
            basis.push(e);
        }
        for i in 0..nmat {
            for j in (i + 1)..nmat {
                for &u in units {
                    let mut e = QMatrix::zeros(nmat);
                    e.set(i, j, u);
                    e.set(j, i, u.conj());
                    basis.push(e);
                }
            }
        }
        let q = basis.len();
        debug_assert_eq!(
            q,
            match family {
                Family::Complex => nmat * nmat,
                Family::Quaternionic => nmat * (2 * nmat - 1),
            }
        );
        ProjectiveOps { family, rank, nmat, q, basis }
    }

    /// Real dimension k of P.
    pub fn manifold_dim(&self) -> usize {
        match self.family {
            Family::Complex => 2 * self.rank,
            Family::Quaternionic => 4 * self.rank,
        }
    }

    /// Einstein constant of the [1,4]-pinched metric.
    pub fn einstein_constant(&self) -> f64 {
        let k = self.manifold_dim() as f64;
        match self.family {
            Family::Complex => k + 2.0,
            Family::Quaternionic => k + 8.0,
        }
    }

    pub fn mat_to_vec(&self, a: &QMatrix) -> DVector<f64> {
        DVector::from_iterator(self.q, self.basis.iter().map(|e| 0.5 * a.re_trace_prod(e)))
    }

    pub fn vec_to_mat(&self, x: &DVector<f64>) -> QMatrix {
        let mut a = QMatrix::zeros(self.nmat);
        for (c, e) in x.iter().zip(&self.basis) {
            for idx in 0..a.data.len() {
                a.data[idx] = a.data[idx] + e.data[idx].scale(*c);
            }
        }
        a
    }

    /// Nearest rank-one projection: hermitize, then spectral projection onto
    /// the dominant eigenvector.
    pub fn retract_mat(&self, a: &QMatrix, seed: &[Quat]) -> QMatrix {
        let h = a.hermitize();
        let z = top_eigenvector(&h, seed);
        rank_one_projection(&z)
    }

    /// Seed for the power iteration: the column of largest norm of a matrix
    /// that is close to a rank-one projection.
    pub fn seed_from(&self, a: &QMatrix) -> Vec<Quat> {
        let mut best = 0usize;
        let mut best_norm = -1.0;
        for j in 0..self.nmat {
            let n: f64 = (0..self.nmat).map(|i| a.get(i, j).norm_sq()).sum();
            if n > best_norm {
                best_norm = n;
                best = j;
            }
        }
        let mut z: Vec<Quat> = (0..self.nmat).map(|i| a.get(i, best)).collect();
        if best_norm < 1e-12 {
            z[0] = Quat::ONE;
        }
        normalize_qvec(&mut z);
        z
    }

    pub fn random_unit_column<R: Rng>(&self, rng: &mut R) -> Vec<Quat> {
        let mut z: Vec<Quat> = (0..self.nmat)
            .map(|_| match self.family {
                Family::Complex => Quat::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, 0.0, 0.0),
                Family::Quaternionic => Quat::new(
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                    rng.gen::<f64>() - 0.5,
                ),
            })
            .collect();
        normalize_qvec(&mut z);
        z
    }

    /// Projection of a Hermitian matrix onto the tangent space of P at rho.
    pub fn tangent_project_mat(&self, rho: &QMatrix, x: &QMatrix) -> QMatrix {
        // rho X + X rho - 2 rho X rho
        let rx = rho.matmul(x);
        let xr = x.matmul(rho);
        let rxr = rho.matmul(&xr);
        rx.add(&xr).sub(&rxr.scale(2.0))
    }

    /// Complex structure J on tangent vectors at rho (complex family only):
    /// for X = w z* + z w*, JX replaces w by i w.
    pub fn complex_structure_mat(&self, rho: &QMatrix, x: &QMatrix) -> QMatrix {
        // J X = i (X rho - rho X), with i acting by left multiplication
        let xr = x.matmul(rho);
        let rx = rho.matmul(x);
        let mut d = xr.sub(&rx);
        for v in d.data.iter_mut() {
            *v = Quat::I * *v;
        }
        d
    }
}
