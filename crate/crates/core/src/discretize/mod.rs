//! Meshes and weighted discrete operators: piecewise-linear FEM matrices for
//! the Jacobi operator on functions, and lowest-order DEC blocks for the
//! weighted Hodge Laplacian on edge 1-forms.

mod mesh;
mod off;

pub use mesh::{icosphere, icosphere_mesh, icosphere_params, torus_grid_mesh, SurfaceMesh};
pub use off::{load_off, save_csv, save_matrix_coordinate};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::immersion::Immersion;
use crate::linalg::{Csr, Triplets};

/// Weighted FEM matrices for functions on mesh vertices.
///
/// The weak Jacobi form is Q_f(u, u) = u^T (S_f - P) u against the weighted
/// mass M_f; the generalized eigenproblem (S_f - P) v = mu M_f v discretizes
/// L_f = Delta_f - (Ric_f(N,N) + |A|^2).
#[derive(Debug, Clone)]
pub struct OperatorAssembly {
    /// Weighted mass: integral of u v e^{-f}.
    pub m_f: Csr,
    /// Weighted stiffness: integral of <grad u, grad v> e^{-f}.
    pub s_f: Csr,
    /// Potential term: integral of (Ric_f(N,N) + |A|^2) u v e^{-f}.
    pub p: Csr,
    /// Weighted volume of the surface.
    pub vol_f: f64,
    /// Largest potential sample (used for spectral shift heuristics).
    pub pot_max: f64,
}

impl OperatorAssembly {
    pub fn dim(&self) -> usize {
        self.m_f.nrows
    }

    /// The assembled Jacobi matrix S_f - P.
    pub fn jacobi_matrix(&self) -> Csr {
        self.s_f.add_scaled(&self.p, -1.0)
    }
}

/// DEC blocks of the weighted 1-form Laplacian.
///
/// Edge values represent the integrals of a 1-form along oriented edges.
/// The weighted Hodge Laplacian quadratic form is
/// A_1 = d1^T *2 d1 + *1 d0 *0^{-1} d0^T *1 against the mass *1;
/// its kernel dimension is the first Betti number.
#[derive(Debug, Clone)]
pub struct Hodge1Assembly {
    /// Vertex-to-edge difference (E x V).
    pub d0: Csr,
    /// Edge-to-face circulation (F x E).
    pub d1: Csr,
    /// Weighted dual 0-star (vertex areas), diagonal.
    pub star0: DVector<f64>,
    /// Weighted dual 1-star (edge weights), diagonal.
    pub star1: DVector<f64>,
    /// Weighted dual 2-star (inverse face areas), diagonal.
    pub star2: DVector<f64>,
    /// True when barycentric duals replaced circumcentric ones
    /// (some cotangent weight was non-positive).
    pub barycentric_fallback: bool,
}

impl Hodge1Assembly {
    pub fn n_edges(&self) -> usize {
        self.star1.len()
    }

    /// Stiffness-like operator of the weighted 1-form Laplacian
    /// (to be paired with the diagonal mass *1).
    pub fn laplacian_matrix(&self) -> Csr {
        let ne = self.star1.len();
        let nf = self.star2.len();
        let nv = self.star0.len();
        // d1^T *2 d1
        let mut t = Triplets::new(ne, ne);
        accumulate_weighted_gram(&mut t, &self.d1, &self.star2, nf);
        // *1 d0 *0^{-1} d0^T *1: rows of d0 scaled by star1 give columns of
        // the co-boundary; assemble (B^T W B) with B = d0^T scaled
        let d0t_rows = transpose_rows(&self.d0, nv);
        // entry (e, e') = sum_v star0^{-1}[v] (star1[e] d0[e,v]) (star1[e'] d0[e',v])
        for (v, row) in d0t_rows.iter().enumerate() {
            let wv = 1.0 / self.star0[v];
            for &(e1, a1) in row {
                for &(e2, a2) in row {
                    t.push(e1, e2, wv * a1 * self.star1[e1] * a2 * self.star1[e2]);
                }
            }
        }
        t.to_csr()
    }

    /// Weighted codifferential delta_f of an edge form, as vertex values.
    pub fn codifferential(&self, omega: &DVector<f64>) -> DVector<f64> {
        let w = DVector::from_fn(omega.len(), |e, _| self.star1[e] * omega[e]);
        let mut out = self.d0.mul_transpose_vec(&w);
        for v in 0..out.len() {
            out[v] /= self.star0[v];
        }
        out
    }

    /// Exterior derivative residual d omega per face, normalized by *2.
    pub fn exterior_derivative(&self, omega: &DVector<f64>) -> DVector<f64> {
        self.d1.mul_vec(omega)
    }
}

/// B^T diag(w) B accumulated into triplets, with B given as CSR (rows x cols).
fn accumulate_weighted_gram(t: &mut Triplets, b: &Csr, w: &DVector<f64>, nrows: usize) {
    for r in 0..nrows {
        let (cols, vals) = b.row(r);
        for (i, &c1) in cols.iter().enumerate() {
            for (k, &c2) in cols.iter().enumerate() {
                t.push(c1, c2, w[r] * vals[i] * vals[k]);
            }
        }
    }
}

/// Rows of the transpose of a CSR matrix, as (row index in transpose) lists.
fn transpose_rows(a: &Csr, ncols: usize) -> Vec<Vec<(usize, f64)>> {
    let mut rows = vec![Vec::new(); ncols];
    for r in 0..a.nrows {
        let (cols, vals) = a.row(r);
        for (c, v) in cols.iter().zip(vals) {
            rows[*c].push((r, *v));
        }
    }
    rows
}

/// Per-triangle sample of the immersion at the barycenter.
struct ElementSample {
    weight: f64,
    potential: f64,
}

fn element_sample(mesh: &SurfaceMesh, imm: &Immersion, t: usize) -> Result<ElementSample> {
    if mesh.chartless {
        // user meshes: weight from the ambient at the barycenter, no potential
        let [a, b, c] = mesh.triangles[t];
        let x = (&mesh.positions[a] + &mesh.positions[b] + &mesh.positions[c]) / 3.0;
        let w = if imm.zero_weight { 1.0 } else { (-imm.ambient.weight(&x)).exp() };
        return Ok(ElementSample { weight: w, potential: 0.0 });
    }
    let q = mesh.barycenter_param(t);
    let geo = imm.point_geometry(&q)?;
    let w = if imm.zero_weight { 1.0 } else { (-geo.f_value).exp() };
    Ok(ElementSample { weight: w, potential: geo.potential })
}

/// Piecewise-linear FEM assembly of the weighted mass, stiffness and
/// potential matrices, with e^{-f} and the Jacobi potential sampled at
/// element barycenters.
pub fn assemble(mesh: &SurfaceMesh, imm: &Immersion) -> Result<OperatorAssembly> {
    mesh.validate()?;
    let nv = mesh.params.len();
    let mut tm = Triplets::new(nv, nv);
    let mut ts = Triplets::new(nv, nv);
    let mut tp = Triplets::new(nv, nv);
    let mut vol_f = 0.0;
    let mut pot_max = f64::NEG_INFINITY;
    for t in 0..mesh.triangles.len() {
        let idx = mesh.triangles[t];
        let uv = &mesh.corner_uv[t];
        let area = triangle_area(uv);
        if area <= 0.0 {
            return Err(Error::DegenerateElement { element: t, area });
        }
        let grads = barycentric_gradients(uv, area);
        let s = element_sample(mesh, imm, t)?;
        pot_max = pot_max.max(s.potential);
        let wa = s.weight * area;
        vol_f += wa;
        // consistent mass: area/12 * [[2,1,1],[1,2,1],[1,1,2]]
        for a in 0..3 {
            for b in 0..3 {
                let mass = wa / 12.0 * if a == b { 2.0 } else { 1.0 };
                tm.push(idx[a], idx[b], mass);
                tp.push(idx[a], idx[b], s.potential * mass);
                let st = wa
                    * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                ts.push(idx[a], idx[b], st);
            }
        }
    }
    Ok(OperatorAssembly {
        m_f: tm.to_csr(),
        s_f: ts.to_csr(),
        p: tp.to_csr(),
        vol_f,
        pot_max: if pot_max.is_finite() { pot_max } else { 0.0 },
    })
}

fn triangle_area(uv: &[[f64; 2]; 3]) -> f64 {
    let (a, b, c) = (uv[0], uv[1], uv[2]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

/// Gradients of the three barycentric hat functions in the local 2D frame.
fn barycentric_gradients(uv: &[[f64; 2]; 3], area: f64) -> [[f64; 2]; 3] {
    let mut g = [[0.0; 2]; 3];
    for a in 0..3 {
        let p1 = uv[(a + 1) % 3];
        let p2 = uv[(a + 2) % 3];
        // gradient is perpendicular to the opposite edge, magnitude 1/height
        let e = [p2[0] - p1[0], p2[1] - p1[1]];
        let n = [-e[1], e[0]];
        let pa = uv[a];
        let s = (pa[0] - p1[0]) * n[0] + (pa[1] - p1[1]) * n[1];
        let scale = 1.0 / (2.0 * area) * s.signum();
        g[a] = [n[0] * scale, n[1] * scale];
    }
    g
}

/// DEC assembly of the weighted 1-form blocks: incidence operators plus
/// diagonal Hodge stars scaled by e^{-f} at element barycenters. Circumcentric
/// dual edge weights (cotangent formula) are used unless some weight would be
/// non-positive, in which case barycentric duals are used throughout.
pub fn assemble_hodge1(mesh: &SurfaceMesh, imm: &Immersion) -> Result<Hodge1Assembly> {
    mesh.validate()?;
    let nv = mesh.params.len();
    let ne = mesh.edges.len();
    let nf = mesh.triangles.len();
    // incidence matrices
    let mut td0 = Triplets::new(ne, nv);
    for (e, &[v0, v1]) in mesh.edges.iter().enumerate() {
        td0.push(e, v1, 1.0);
        td0.push(e, v0, -1.0);
    }
    let d0 = td0.to_csr();
    let mut td1 = Triplets::new(nf, ne);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let (e, sign) = mesh.edge_lookup(a, b)?;
            td1.push(t, e, sign);
        }
    }
    let d1 = td1.to_csr();
    // per-triangle weights and geometry
    let mut weights = Vec::with_capacity(nf);
    let mut areas = Vec::with_capacity(nf);
    for t in 0..nf {
        let s = element_sample(mesh, imm, t)?;
        weights.push(s.weight);
        let area = triangle_area(&mesh.corner_uv[t]);
        if area <= 0.0 {
            return Err(Error::DegenerateElement { element: t, area });
        }
        areas.push(area);
    }
    // star0: weighted barycentric vertex areas
    let mut star0 = DVector::zeros(nv);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &v in tri {
            star0[v] += weights[t] * areas[t] / 3.0;
        }
    }
    // star1: cotangent weights, with barycentric fallback
    let cotan = star1_cotan(mesh, &weights);
    let (star1, barycentric_fallback) = match cotan {
        Some(s) => (s, false),
        None => (star1_barycentric(mesh, &weights), true),
    };
    // star2: weighted inverse areas
    let star2 = DVector::from_fn(nf, |t, _| weights[t] / areas[t]);
    Ok(Hodge1Assembly { d0, d1, star0, star1, star2, barycentric_fallback })
}

/// Cotangent edge stars; None if any edge total is non-positive.
fn star1_cotan(mesh: &SurfaceMesh, weights: &[f64]) -> Option<DVector<f64>> {
    let ne = mesh.edges.len();
    let mut star1 = DVector::zeros(ne);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let uv = &mesh.corner_uv[t];
        for k in 0..3 {
            // edge opposite corner k
            let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let (e, _) = mesh.edge_lookup(a, b).ok()?;
            let pa = uv[(k + 1) % 3];
            let pb = uv[(k + 2) % 3];
            let pk = uv[k];
            let u = [pa[0] - pk[0], pa[1] - pk[1]];
            let v = [pb[0] - pk[0], pb[1] - pk[1]];
            let dot = u[0] * v[0] + u[1] * v[1];
            let cross = (u[0] * v[1] - u[1] * v[0]).abs();
            if cross < 1e-300 {
                return None;
            }
            star1[e] += 0.5 * weights[t] * dot / cross;
        }
    }
    if star1.iter().all(|&w| w > 0.0) {
        Some(star1)
    } else {
        None
    }
}

/// Barycentric edge stars: dual segment length (midpoint to barycenter)
/// over primal edge length, always positive.
fn star1_barycentric(mesh: &SurfaceMesh, weights: &[f64]) -> DVector<f64> {
    let ne = mesh.edges.len();
    let mut star1 = DVector::zeros(ne);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let uv = &mesh.corner_uv[t];
        let bary = [
            (uv[0][0] + uv[1][0] + uv[2][0]) / 3.0,
            (uv[0][1] + uv[1][1] + uv[2][1]) / 3.0,
        ];
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let (e, _) = mesh.edge_lookup(a, b).expect("validated mesh");
            let pa = uv[k];
            let pb = uv[(k + 1) % 3];
            let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
            let dual = ((bary[0] - mid[0]).powi(2) + (bary[1] - mid[1]).powi(2)).sqrt();
            let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
            star1[e] += weights[t] * dual / len;
        }
    }
    star1
}

/// One-dimensional periodic FEM for a circle of given radius with constant
/// weight: returns (mass, stiffness), n nodes at uniform angles.
pub fn circle_fem(n: usize, radius: f64, weight: f64) -> (Csr, Csr) {
    let h = std::f64::consts::TAU * radius / n as f64;
    let mut tm = Triplets::new(n, n);
    let mut ts = Triplets::new(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        let wm = weight * h / 6.0;
        tm.push(i, i, 2.0 * wm);
        tm.push(j, j, 2.0 * wm);
        tm.push(i, j, wm);
        tm.push(j, i, wm);
        let ws = weight / h;
        ts.push(i, i, ws);
        ts.push(j, j, ws);
        ts.push(i, j, -ws);
        ts.push(j, i, -ws);
    }
    (tm.to_csr(), ts.to_csr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient;
    use crate::immersion::Immersion;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn shrinker() -> Immersion {
        let amb = Arc::new(ambient::make_gaussian_euclidean(3, 1.0).unwrap());
        Immersion::shrinker_sphere(amb).unwrap()
    }

    #[test]
    fn icosphere_counts_and_area() {
        let m0 = icosphere(0, 1.0);
        assert_eq!(m0.params.len(), 12);
        assert_eq!(m0.triangles.len(), 20);
        assert_eq!(m0.euler_characteristic(), 2);
        let m3 = icosphere(3, 2.0f64.sqrt());
        assert_eq!(m3.params.len(), 642);
        let area: f64 = (0..m3.triangles.len())
            .map(|t| triangle_area(&m3.corner_uv[t]))
            .sum();
        let exact = 8.0 * std::f64::consts::PI;
        assert!((area - exact).abs() / exact < 0.005, "area {area}");
        let m4 = icosphere(4, 1.0);
        assert_eq!(m4.params.len(), 2562);
        assert_eq!(m4.euler_characteristic(), 2);
    }

    #[test]
    fn torus_grid_counts() {
        let imm = Immersion::flat_torus(1.0, 1.0);
        let m = torus_grid_mesh(&imm, 3, 3).unwrap();
        assert_eq!(m.params.len(), 9);
        assert_eq!(m.triangles.len(), 18);
        assert_eq!(m.euler_characteristic(), 0);
        let m = torus_grid_mesh(&imm, 4, 3).unwrap();
        assert_eq!(m.params.len(), 12);
        assert_eq!(m.euler_characteristic(), 0);
    }

    #[test]
    fn assembly_symmetry_and_constants() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 3).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        assert!(asm.m_f.max_abs_asymmetry() < 1e-12 * asm.vol_f);
        assert!(asm.s_f.max_abs_asymmetry() < 1e-12);
        assert!(asm.p.max_abs_asymmetry() < 1e-12 * asm.vol_f);
        // stiffness annihilates constants
        let ones = DVector::from_element(asm.dim(), 1.0);
        let r = asm.s_f.mul_vec(&ones);
        let scale = asm.s_f.diag().amax();
        assert!(r.amax() < 1e-12 * scale);
        // total weighted volume: 8 pi e^{-1}
        let exact = 8.0 * std::f64::consts::PI * (-1.0f64).exp();
        assert!((asm.vol_f - exact).abs() / exact < 0.01, "vol_f {}", asm.vol_f);
        // mass row-sum total equals vol_f
        let total: f64 = (0..asm.dim()).map(|i| asm.m_f.mul_vec(&ones)[i]).sum();
        assert!((total - asm.vol_f).abs() < 1e-10 * asm.vol_f);
    }

    #[test]
    fn constant_rayleigh_on_slice_sphere() {
        let amb = Arc::new(ambient::make_sphere_cylinder(2, 1, 1.0).unwrap());
        let imm = Immersion::slice_sphere(amb).unwrap();
        let mesh = icosphere_mesh(&imm, 3).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let ones = DVector::from_element(asm.dim(), 1.0);
        let j = asm.jacobi_matrix();
        let q = ones.dot(&j.mul_vec(&ones));
        let exact = -4.0 * std::f64::consts::PI;
        assert!((q - exact).abs() / exact.abs() < 0.01, "Q(1) = {q}");
    }

    #[test]
    fn weighted_adjointness_of_d_and_codifferential() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 2).unwrap();
        let h = assemble_hodge1(&mesh, &imm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let u = DVector::from_fn(mesh.params.len(), |_, _| rng.gen::<f64>() - 0.5);
            let w = DVector::from_fn(mesh.edges.len(), |_, _| rng.gen::<f64>() - 0.5);
            let du = h.d0.mul_vec(&u);
            let lhs: f64 = (0..du.len()).map(|e| du[e] * h.star1[e] * w[e]).sum();
            let delta = h.codifferential(&w);
            let rhs: f64 = (0..u.len()).map(|v| u[v] * h.star0[v] * delta[v]).sum();
            assert!(
                (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-30),
                "lhs {lhs} rhs {rhs}"
            );
        }
    }

    #[test]
    fn hodge_laplacian_is_symmetric_positive() {
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 2).unwrap();
        let h = assemble_hodge1(&mesh, &imm).unwrap();
        let a1 = h.laplacian_matrix();
        assert!(a1.max_abs_asymmetry() < 1e-12 * a1.diag().amax());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let w = DVector::from_fn(h.n_edges(), |_, _| rng.gen::<f64>() - 0.5);
            let q = w.dot(&a1.mul_vec(&w));
            assert!(q > -1e-12, "quadratic form not PSD: {q}");
        }
    }

    #[test]
    fn flat_torus_falls_back_to_positive_stars() {
        let imm = Immersion::flat_torus(1.0, 1.0);
        let mesh = torus_grid_mesh(&imm, 8, 8).unwrap();
        let h = assemble_hodge1(&mesh, &imm).unwrap();
        // diagonal edges of the right-triangle grid have zero cotangent
        // weight, so the positive barycentric duals must kick in
        assert!(h.barycentric_fallback);
        assert!(h.star1.iter().all(|&w| w > 0.0));
        let a1 = h.laplacian_matrix();
        assert!(a1.max_abs_asymmetry() < 1e-12);
    }

    #[test]
    fn circle_fem_mass_total() {
        let (m, s) = circle_fem(32, 1.0, 2.0);
        let ones = DVector::from_element(32, 1.0);
        let total = ones.dot(&m.mul_vec(&ones));
        assert!((total - 2.0 * std::f64::consts::TAU).abs() < 1e-12);
        assert!(s.mul_vec(&ones).amax() < 1e-12);
    }

    #[test]
    fn refinement_convergence_of_volume() {
        let imm = shrinker();
        let v3 = assemble(&icosphere_mesh(&imm, 3).unwrap(), &imm).unwrap().vol_f;
        let v4 = assemble(&icosphere_mesh(&imm, 4).unwrap(), &imm).unwrap().vol_f;
        let exact = 8.0 * std::f64::consts::PI * (-1.0f64).exp();
        assert!((v4 - exact).abs() < 0.3 * (v3 - exact).abs());
    }
}
