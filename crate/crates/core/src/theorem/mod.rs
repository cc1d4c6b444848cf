//! Wedge test functions, the weighted stability form, pointwise identity
//! checks, curvature-gap evaluation for cylindric and projective-cylinder
//! ambients, and the index lower bound arithmetic.

use std::sync::Arc;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambient::AmbientSpace;
use crate::discretize::{OperatorAssembly, SurfaceMesh};
use crate::error::{Error, Result};
use crate::immersion::{FormEval, Immersion, ImmersionKind, PointGeometry};

/// Scalar fields u_ij = N_i w_j - N_j w_i sampled over a point stream, one
/// field per coordinate 2-form e_i ^ e_j of the Euclidean container.
#[derive(Debug, Clone)]
pub struct TestFunctionFamily {
    pub dim_d: usize,
    /// Index pairs (i, j) with i < j, in lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    /// values[s][p]: value of the pair `p` field at sample `s`.
    pub values: Vec<Vec<f64>>,
}

impl TestFunctionFamily {
    /// Max |sum_{i<j} u_ij^2 - |w|^2| over samples, given |w|^2 per sample.
    /// Zero (to roundoff) whenever N is unit and w is orthogonal to N.
    pub fn lagrange_residual(&self, omega_norm2: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(omega_norm2)
            .map(|(row, &w2)| {
                let s: f64 = row.iter().map(|u| u * u).sum();
                (s - w2).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Build the wedge fields from per-sample (unit normal, form pushforward)
/// pairs, both as vectors in the Euclidean container.
pub fn wedge_test_functions(points: &[(DVector<f64>, DVector<f64>)]) -> Result<TestFunctionFamily> {
    let dim_d = points
        .first()
        .map(|(n, _)| n.len())
        .ok_or_else(|| Error::InvalidDimension("empty point stream".into()))?;
    let mut pairs = Vec::new();
    for i in 0..dim_d {
        for j in (i + 1)..dim_d {
            pairs.push((i, j));
        }
    }
    let mut values = Vec::with_capacity(points.len());
    for (n, w) in points {
        if (n.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::DegenerateImmersion(format!(
                "wedge fields need a unit normal, got |N| = {}",
                n.norm()
            )));
        }
        if n.len() != dim_d || w.len() != dim_d {
            return Err(Error::DimensionMismatch { expected: dim_d, got: w.len().max(n.len()) });
        }
        let row: Vec<f64> = pairs.iter().map(|&(i, j)| n[i] * w[j] - n[j] * w[i]).collect();
        values.push(row);
    }
    Ok(TestFunctionFamily { dim_d, pairs, values })
}

/// Weighted stability form Q_f(u, u) = u^T (S_f - P) u.
pub fn q_form(asm: &OperatorAssembly, u: &DVector<f64>) -> Result<f64> {
    if u.len() != asm.dim() {
        return Err(Error::DimensionMismatch { expected: asm.dim(), got: u.len() });
    }
    Ok(u.dot(&asm.s_f.mul_vec(u)) - u.dot(&asm.p.mul_vec(u)))
}

// ---------------------------------------------------------------------------
// Pointwise derivative identity for the wedge fields
// ---------------------------------------------------------------------------

/// Residual of the pointwise identity
///   sum_{i<j} |grad u_ij|^2 = |grad w|^2 - |A w|^2 + |A|^2 |w|^2
///                             + sum_k |II(e_k, w)|^2 + sum_k |II(e_k,N)|^2 |w|^2,
/// with the left side obtained by direct differentiation of the u_ij in the
/// Euclidean container. Requires the analytic normal-derivative oracle.
pub fn identity5_residual(
    ambient: &AmbientSpace,
    geo: &PointGeometry,
    form: &FormEval,
) -> Result<f64> {
    let d_normal = geo.d_normal_frame.as_ref().ok_or_else(|| {
        Error::UnsupportedForUserChart(
            "the pointwise derivative identity needs analytic normal derivatives".into(),
        )
    })?;
    let d = geo.normal.len();
    let m = geo.tangent_frame.len();
    let w = &form.omega;
    // left side: |grad u_ij|^2 summed over pairs, via D_{e_k} u_ij
    let mut lhs = 0.0;
    for k in 0..m {
        let dn = &d_normal[k];
        let dw = &form.d_omega_frame[k];
        for i in 0..d {
            for j in (i + 1)..d {
                let du = dn[i] * w[j] + geo.normal[i] * dw[j]
                    - dn[j] * w[i]
                    - geo.normal[j] * dw[i];
                lhs += du * du;
            }
        }
    }
    // right side from the geometric quantities
    let w2 = w.norm_squared();
    let mut grad_w2 = 0.0;
    for k in 0..m {
        for e in &geo.tangent_frame {
            let c = form.d_omega_frame[k].dot(e);
            grad_w2 += c * c;
        }
    }
    let w_coords = DVector::from_fn(m, |l, _| w.dot(&geo.tangent_frame[l]));
    let aw = &geo.shape_operator * &w_coords;
    let a_frob2: f64 = geo.shape_operator.iter().map(|x| x * x).sum();
    let mut ii_terms = 0.0;
    for e in &geo.tangent_frame {
        ii_terms += ambient.second_fundamental(&geo.position, e, w).norm_squared();
        ii_terms += ambient.second_fundamental(&geo.position, e, &geo.normal).norm_squared() * w2;
    }
    let rhs = grad_w2 - aw.norm_squared() + a_frob2 * w2 + ii_terms;
    Ok((lhs - rhs).abs())
}

// ---------------------------------------------------------------------------
// Quadratures carrying geometry and form samples
// ---------------------------------------------------------------------------

/// One quadrature node: weight includes the volume element and e^{-f}.
#[derive(Debug, Clone)]
pub struct GapSample {
    pub weight: f64,
    pub geo: PointGeometry,
    /// Form pushforwards at this node, one per basis form.
    pub omegas: Vec<DVector<f64>>,
    /// Euclidean derivatives of each form along the frame, when analytic.
    pub d_omegas: Option<Vec<Vec<DVector<f64>>>>,
}

/// Weighted quadrature over the hypersurface with per-node geometry and a
/// set of 1-form samples.
#[derive(Debug, Clone)]
pub struct GapQuadrature {
    pub samples: Vec<GapSample>,
    pub ambient: Arc<AmbientSpace>,
    /// Abstract reference surfaces carry no ambient curvature or weight.
    pub abstract_surface: bool,
}

/// Tensor quadrature for the sphere x circle product: icosphere triangle
/// barycenters crossed with uniform circle midpoints, using the analytic
/// circle form.
pub fn product_quadrature(imm: &Immersion, subdiv: usize, n_circle: usize) -> Result<GapQuadrature> {
    let (sphere_radius, circle_radius) = match imm.kind {
        ImmersionKind::ProductSphereCircle { sphere_radius, circle_radius } => {
            (sphere_radius, circle_radius)
        }
        _ => {
            return Err(Error::CompositionNotApplicable(
                "tensor quadrature is defined for the sphere x circle product".into(),
            ))
        }
    };
    let (units, faces) = crate::discretize::icosphere_params(subdiv);
    let arc = std::f64::consts::TAU * circle_radius / n_circle as f64;
    let mut samples = Vec::with_capacity(faces.len() * n_circle);
    for f in &faces {
        let pts: Vec<DVector<f64>> = f.iter().map(|&v| sphere_radius * &units[v]).collect();
        let e1 = &pts[1] - &pts[0];
        let e2 = &pts[2] - &pts[0];
        let g11 = e1.dot(&e1);
        let g12 = e1.dot(&e2);
        let g22 = e2.dot(&e2);
        let area = 0.5 * (g11 * g22 - g12 * g12).max(0.0).sqrt();
        let mut bary = (&units[f[0]] + &units[f[1]] + &units[f[2]]) / 3.0;
        bary /= bary.norm();
        for i in 0..n_circle {
            let psi = (i as f64 + 0.5) * std::f64::consts::TAU / n_circle as f64;
            let mut q = DVector::zeros(4);
            q.rows_mut(0, 3).copy_from(&bary);
            q[3] = psi;
            let geo = imm.point_geometry(&q)?;
            let form = imm.analytic_form(&q, &geo).ok_or_else(|| {
                Error::CompositionNotApplicable("product immersion lost its form oracle".into())
            })?;
            let weight = area * arc * (-geo.f_value).exp();
            samples.push(GapSample {
                weight,
                geo,
                omegas: vec![form.omega.clone()],
                d_omegas: Some(vec![form.d_omega_frame]),
            });
        }
    }
    Ok(GapQuadrature {
        samples,
        ambient: imm.ambient.clone(),
        abstract_surface: imm.abstract_surface,
    })
}

/// Barycenter quadrature over a triangle mesh with vertex-sampled form
/// pushforwards (e.g. sharp reconstructions of a harmonic basis); the same
/// sampling rule as the operator assembly.
pub fn mesh_quadrature(
    mesh: &SurfaceMesh,
    imm: &Immersion,
    vertex_forms: &[Vec<DVector<f64>>],
) -> Result<GapQuadrature> {
    let mut samples = Vec::with_capacity(mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let q = mesh.barycenter_param(t);
        let geo = imm.point_geometry(&q)?;
        let uv = &mesh.corner_uv[t];
        let area = 0.5 * (uv[1][0] * uv[2][1]).abs();
        let weight = area * (-geo.f_value).exp();
        let mut omegas = Vec::with_capacity(vertex_forms.len());
        for form in vertex_forms {
            let mut w = (&form[tri[0]] + &form[tri[1]] + &form[tri[2]]) / 3.0;
            // enforce tangency at the barycenter
            let mut proj = DVector::zeros(w.len());
            for e in &geo.tangent_frame {
                proj += w.dot(e) * e;
            }
            w = proj;
            omegas.push(w);
        }
        samples.push(GapSample { weight, geo, omegas, d_omegas: None });
    }
    Ok(GapQuadrature {
        samples,
        ambient: imm.ambient.clone(),
        abstract_surface: imm.abstract_surface,
    })
}

/// Barycenter quadrature over a triangle mesh using the immersion's analytic
/// form oracle (with derivatives), for immersions that carry one.
pub fn analytic_mesh_quadrature(mesh: &SurfaceMesh, imm: &Immersion) -> Result<GapQuadrature> {
    let mut samples = Vec::with_capacity(mesh.triangles.len());
    for t in 0..mesh.triangles.len() {
        let q = mesh.barycenter_param(t);
        let geo = imm.point_geometry(&q)?;
        let form = imm.analytic_form(&q, &geo).ok_or_else(|| {
            Error::UnsupportedForUserChart("this immersion has no analytic form oracle".into())
        })?;
        let uv = &mesh.corner_uv[t];
        let area = 0.5 * (uv[1][0] * uv[2][1]).abs();
        let weight = area * (-geo.f_value).exp();
        samples.push(GapSample {
            weight,
            geo,
            omegas: vec![form.omega.clone()],
            d_omegas: Some(vec![form.d_omega_frame]),
        });
    }
    Ok(GapQuadrature {
        samples,
        ambient: imm.ambient.clone(),
        abstract_surface: imm.abstract_surface,
    })
}

// ---------------------------------------------------------------------------
// Hypothesis inequality and the curvature gap
// ---------------------------------------------------------------------------

/// Definitional curvature gap
///   R(X, N) = sum_i (|II(e_i, X)|^2 + |II(e_i, N)|^2 |X|^2)
///             + <R(X,N)X,N> - Ric_f(N,N)|X|^2 - Ric_f(X,X)
/// with {e_i} an orthonormal frame of the orthogonal complement of N.
pub fn gap_value(
    ambient: &AmbientSpace,
    position: &DVector<f64>,
    frame: &[DVector<f64>],
    normal: &DVector<f64>,
    x: &DVector<f64>,
) -> f64 {
    let x2 = x.norm_squared();
    let mut acc = 0.0;
    for e in frame {
        acc += ambient.second_fundamental(position, e, x).norm_squared();
        acc += ambient.second_fundamental(position, e, normal).norm_squared() * x2;
    }
    acc + ambient.riemann(position, x, normal, x, normal)
        - ambient.ric_f(position, normal, normal) * x2
        - ambient.ric_f(position, x, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Vacuous,
}

/// Integrated check of the spectral-threshold inequality for a sampled set
/// of forms: every candidate must satisfy LHS < RHS.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub eta: f64,
    pub verdict: Verdict,
    /// Smallest RHS - LHS over all candidates (None when vacuous).
    pub min_margin: Option<f64>,
    /// Per-candidate integrals (basis elements first, then combinations).
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margins: Vec<f64>,
    /// Pointwise curvature-gap values for the first basis form.
    pub gap_values: Vec<f64>,
    pub combinations: usize,
    pub seed: u64,
    /// Margins with absolute value below this are inconclusive (quadrature
    /// noise floor).
    pub noise_floor: f64,
}

/// Verify the inequality
///   int (sum_k |II(e_k,w)|^2 + sum_k |II(e_k,N)|^2 |w|^2) e^{-f}
///     < int (Ric_f(N,N)|w|^2 + Ric_f(w,w) - <R(w,N)w,N>) e^{-f} + eta int |w|^2 e^{-f}
/// on each basis form and on seeded random unit-norm combinations (the
/// inequality is quadratic in w but not a quadratic form across both sides,
/// so the sampling is explicit and deterministic).
pub fn hypothesis_check(
    quad: &GapQuadrature,
    eta: f64,
    combinations: usize,
    seed: u64,
) -> Result<GapReport> {
    let q = quad.samples.first().map(|s| s.omegas.len()).unwrap_or(0);
    if q == 0 {
        return Ok(GapReport {
            eta,
            verdict: Verdict::Vacuous,
            min_margin: None,
            lhs: vec![],
            rhs: vec![],
            margins: vec![],
            gap_values: vec![],
            combinations,
            seed,
            noise_floor: 0.0,
        });
    }
    let mut candidates: Vec<Vec<f64>> = (0..q)
        .map(|i| (0..q).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..combinations {
        loop {
            let c: Vec<f64> = (0..q).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                candidates.push(c.iter().map(|x| x / n).collect());
                break;
            }
        }
    }
    let mut lhs_all = Vec::with_capacity(candidates.len());
    let mut rhs_all = Vec::with_capacity(candidates.len());
    let mut margins = Vec::with_capacity(candidates.len());
    let mut scale = 0.0f64;
    for c in &candidates {
        let mut lhs = 0.0;
        let mut rhs_curv = 0.0;
        let mut norm2 = 0.0;
        for s in &quad.samples {
            let mut w = DVector::zeros(s.omegas[0].len());
            for (cf, of) in c.iter().zip(&s.omegas) {
                w += *cf * of;
            }
            let w2 = w.norm_squared();
            norm2 += s.weight * w2;
            if !quad.abstract_surface {
                let p = &s.geo.position;
                let n = &s.geo.normal;
                let mut ii = 0.0;
                for e in &s.geo.tangent_frame {
                    ii += quad.ambient.second_fundamental(p, e, &w).norm_squared();
                    ii += quad.ambient.second_fundamental(p, e, n).norm_squared() * w2;
                }
                lhs += s.weight * ii;
                rhs_curv += s.weight
                    * (quad.ambient.ric_f(p, n, n) * w2 + quad.ambient.ric_f(p, &w, &w)
                        - quad.ambient.riemann(p, &w, n, &w, n));
            }
        }
        let rhs = rhs_curv + eta * norm2;
        scale = scale.max(lhs.abs() + rhs_curv.abs() + eta.abs() * norm2 + norm2);
        lhs_all.push(lhs);
        rhs_all.push(rhs);
        margins.push(rhs - lhs);
    }
    let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let noise_floor = 1e-9 * scale.max(f64::MIN_POSITIVE);
    let verdict = if min_margin.abs() <= noise_floor {
        Verdict::Inconclusive
    } else if min_margin > 0.0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let gap_values = quad
        .samples
        .iter()
        .map(|s| {
            if quad.abstract_surface {
                0.0
            } else {
                gap_value(
                    &quad.ambient,
                    &s.geo.position,
                    &s.geo.tangent_frame,
                    &s.geo.normal,
                    &s.omegas[0],
                )
            }
        })
        .collect();
    Ok(GapReport {
        eta,
        verdict,
        min_margin: Some(min_margin),
        lhs: lhs_all,
        rhs: rhs_all,
        margins,
        gap_values,
        combinations,
        seed,
        noise_floor,
    })
}

/// Integrated Bochner residual per form:
///   |int (|grad w|^2 + Ric_f(w,w) - <R(w,N)w,N> - |A w|^2) e^{-f}| / ||w||^2.
/// Requires analytic form derivatives on the quadrature.
pub fn bochner_residual(quad: &GapQuadrature) -> Result<Vec<f64>> {
    let q = quad.samples.first().map(|s| s.omegas.len()).unwrap_or(0);
    let mut out = Vec::with_capacity(q);
    for f in 0..q {
        let mut integral = 0.0;
        let mut norm2 = 0.0;
        for s in &quad.samples {
            let w = &s.omegas[f];
            let d_omega = s
                .d_omegas
                .as_ref()
                .ok_or_else(|| {
                    Error::UnsupportedForUserChart(
                        "the Bochner check needs analytic form derivatives".into(),
                    )
                })?
                .get(f)
                .ok_or_else(|| Error::Internal("form derivative list too short".into()))?;
            let m = s.geo.tangent_frame.len();
            let mut grad_w2 = 0.0;
            for k in 0..m {
                for e in &s.geo.tangent_frame {
                    let c = d_omega[k].dot(e);
                    grad_w2 += c * c;
                }
            }
            let w_coords = DVector::from_fn(m, |l, _| w.dot(&s.geo.tangent_frame[l]));
            let aw2 = (&s.geo.shape_operator * &w_coords).norm_squared();
            let curv = if quad.abstract_surface {
                0.0
            } else {
                let p = &s.geo.position;
                let n = &s.geo.normal;
                quad.ambient.ric_f(p, w, w) - quad.ambient.riemann(p, w, n, w, n)
            };
            integral += s.weight * (grad_w2 + curv - aw2);
            norm2 += s.weight * w.norm_squared();
        }
        out.push(integral.abs() / norm2.max(f64::MIN_POSITIVE));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Cylindric ambients: closed-form curvature gap
// ---------------------------------------------------------------------------

/// Euclidean-factor decomposition of a tangent configuration (X, N):
/// |X|, |pi_R X|, |pi_R N|, <pi_R N, pi_R X>.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct XDecomposition {
    pub x_norm: f64,
    pub pi_r_x: f64,
    pub pi_r_n: f64,
    pub dot: f64,
}

/// Read the decomposition off explicit vectors using the ambient's flat
/// coordinate block.
pub fn euclid_decomposition(
    ambient: &AmbientSpace,
    x: &DVector<f64>,
    n: &DVector<f64>,
) -> XDecomposition {
    let off = ambient.euclid_offset();
    let len = x.len() - off;
    let xr = x.rows(off, len);
    let nr = n.rows(off, len);
    XDecomposition {
        x_norm: x.norm(),
        pi_r_x: xr.norm(),
        pi_r_n: nr.norm(),
        dot: xr.dot(&nr),
    }
}

/// Closed-form curvature gap on the sphere-cylinder S^k x R^j:
///   R(X,N) = -2 lambda (k-2)/(k-1) |X|^2
///            - lambda/(k-1) (|X|^2 |pi_R N|^4 + |pi_R X|^2 (2 - |pi_R N|^2)
///                            + 2 <pi_R N, pi_R X>^2).
/// Strictly negative for k >= 3 and nonzero X; for k = 2 it vanishes exactly
/// when the normal has no Euclidean component.
pub fn cylinder_gap(k: usize, lambda: f64, d: &XDecomposition) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidDimension("cylinder gap needs k >= 2".into()));
    }
    let tol = 1e-9 * (1.0 + d.x_norm);
    if d.pi_r_x > d.x_norm + tol
        || d.pi_r_n > 1.0 + tol
        || d.dot.abs() > d.pi_r_x * d.pi_r_n + tol
        || d.pi_r_x < 0.0
        || d.pi_r_n < 0.0
    {
        return Err(Error::InconsistentDecomposition(format!(
            "|X|={}, |pi_R X|={}, |pi_R N|={}, dot={}",
            d.x_norm, d.pi_r_x, d.pi_r_n, d.dot
        )));
    }
    let km1 = (k - 1) as f64;
    let x2 = d.x_norm * d.x_norm;
    let nr2 = d.pi_r_n * d.pi_r_n;
    let xr2 = d.pi_r_x * d.pi_r_x;
    Ok(-2.0 * lambda * (k as f64 - 2.0) / km1 * x2
        - lambda / km1 * (x2 * nr2 * nr2 + xr2 * (2.0 - nr2) + 2.0 * d.dot * d.dot))
}

// ---------------------------------------------------------------------------
// Projective cylinders: embedding identities and the gap bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CrossIdentityReport {
    /// | |II(X,X)|^2 - 4|X|^4 | on unit X.
    pub res_ii_diag: f64,
    /// Polarized identity <II(X,X),II(Y,Y)> + 2|II(X,Y)|^2 = 4(|X|^2|Y|^2 + 2<X,Y>^2).
    pub res_ii_polar: f64,
    /// Mixed-norm identity via the Gauss equation.
    pub res_ii_mixed: f64,
    /// Frame-summed identity sum_h |II(e_h,U)|^2 over the complement of N.
    pub res_frame_sum: f64,
    pub sectional_min: f64,
    pub sectional_max: f64,
    pub einstein_expected: f64,
    pub einstein_residual: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Randomized residual check of the projective-embedding curvature
/// identities, the sectional range, and the Einstein constant.
pub fn cross_identity_check(
    ambient: &AmbientSpace,
    samples: usize,
    seed: u64,
) -> Result<CrossIdentityReport> {
    let ops = ambient.projective_ops().ok_or_else(|| {
        Error::Config("embedding identities need a projective-cylinder ambient".into())
    })?;
    let k = ops.manifold_dim();
    let q = ops.q;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut res7 = 0.0f64;
    let mut res8 = 0.0f64;
    let mut res9 = 0.0f64;
    let mut res11 = 0.0f64;
    let mut sec_min = f64::INFINITY;
    let mut sec_max = f64::NEG_INFINITY;
    let mut einstein_res = 0.0f64;
    for _ in 0..samples {
        let p = ambient.random_point(&mut rng);
        // tangents to the projective factor: zero the flat block
        let proj_tangent = |rng: &mut ChaCha8Rng| -> DVector<f64> {
            loop {
                let mut v = ambient.random_tangent(rng, &p);
                for a in q..v.len() {
                    v[a] = 0.0;
                }
                let n = v.norm();
                if n > 1e-6 {
                    return v / n;
                }
            }
        };
        let x = proj_tangent(&mut rng);
        let y = proj_tangent(&mut rng);
        let ii_xx = ambient.second_fundamental(&p, &x, &x);
        let ii_yy = ambient.second_fundamental(&p, &y, &y);
        let ii_xy = ambient.second_fundamental(&p, &x, &y);
        let xy = x.dot(&y);
        res7 = res7.max((ii_xx.norm_squared() - 4.0).abs());
        res8 = res8
            .max((ii_xx.dot(&ii_yy) + 2.0 * ii_xy.norm_squared() - 4.0 * (1.0 + 2.0 * xy * xy)).abs());
        let r_xyxy = ambient.riemann(&p, &x, &y, &x, &y);
        res9 = res9.max(
            (ii_xy.norm_squared() - (4.0 / 3.0) * (1.0 + 2.0 * xy * xy) + r_xyxy / 3.0).abs(),
        );
        let denom = 1.0 - xy * xy;
        if denom > 1e-4 {
            let sec = r_xyxy / denom;
            sec_min = sec_min.min(sec);
            sec_max = sec_max.max(sec);
        }
        einstein_res = einstein_res.max((ambient.ricci(&p, &x, &x) - ambient.lambda).abs());
        // frame-summed identity with a random hypersurface normal and a
        // random full tangent direction
        let n_vec = ambient.random_tangent(&mut rng, &p);
        let u = ambient.random_tangent(&mut rng, &p);
        let frame = complement_frame(ambient, &p, &n_vec);
        let mut lhs = 0.0;
        let mut r_sum = 0.0;
        for e in &frame {
            lhs += ambient.second_fundamental(&p, e, &u).norm_squared();
            r_sum += ambient.riemann(&p, e, &u, e, &u);
        }
        let up2: f64 = (0..q).map(|i| u[i] * u[i]).sum();
        let np2: f64 = (0..q).map(|i| n_vec[i] * n_vec[i]).sum();
        let up_np: f64 = (0..q).map(|i| u[i] * n_vec[i]).sum();
        let rhs = (4.0 / 3.0) * (up2 * (k as f64 + 2.0 - np2) - 2.0 * up_np * up_np)
            - r_sum / 3.0;
        res11 = res11.max((lhs - rhs).abs());
    }
    Ok(CrossIdentityReport {
        res_ii_diag: res7,
        res_ii_polar: res8,
        res_ii_mixed: res9,
        res_frame_sum: res11,
        sectional_min: sec_min,
        sectional_max: sec_max,
        einstein_expected: ambient.lambda,
        einstein_residual: einstein_res,
        samples,
        seed,
    })
}

/// Orthonormal frame of the orthogonal complement of `n` inside T_p M.
pub fn complement_frame(
    ambient: &AmbientSpace,
    p: &DVector<f64>,
    n: &DVector<f64>,
) -> Vec<DVector<f64>> {
    let full = ambient.tangent_frame(p);
    let m = full.len() - 1;
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(m);
    for v in full {
        let mut w = &v - v.dot(n) * n;
        for e in &frame {
            w -= w.dot(e) * e;
        }
        let norm = w.norm();
        if norm > 1e-8 && frame.len() < m {
            frame.push(w / norm);
        }
    }
    frame
}

/// Exact curvature-gap value (projective cylinder) and its closed-form upper
/// bound, with the non-negative remainder and the equality-case diagnostics
/// of the complex case.
#[derive(Debug, Clone, Serialize)]
pub struct CrossGapReport {
    /// Exact gap value from the pointwise decomposition.
    pub value: f64,
    /// Closed-form upper bound.
    pub bound: f64,
    /// Non-negative remainder 8<w^P,N^P>^2 + lambda |N^R|^2 |w|^2 + lambda |w^R|^2.
    pub eta_remainder: f64,
    pub omega_r_norm: f64,
    pub n_r_norm: f64,
    /// Deviation of w from the span of J N (complex projective factor only).
    pub j_deviation: Option<f64>,
}

/// Evaluate the gap value and its bound at a point of a projective cylinder
/// from explicit tangent data (w = form pushforward, n = unit hypersurface
/// normal).
pub fn cross_gap_bound(
    ambient: &AmbientSpace,
    p: &DVector<f64>,
    w: &DVector<f64>,
    n: &DVector<f64>,
) -> Result<CrossGapReport> {
    let ops = ambient.projective_ops().ok_or_else(|| {
        Error::Config("the gap bound needs a projective-cylinder ambient".into())
    })?;
    let k = ops.manifold_dim() as f64;
    let q = ops.q;
    let lambda = ambient.lambda;
    let w2 = w.norm_squared();
    let wp2: f64 = (0..q).map(|i| w[i] * w[i]).sum();
    let np2: f64 = (0..q).map(|i| n[i] * n[i]).sum();
    let wr2 = w2 - wp2;
    let nr2 = n.norm_squared() - np2;
    let dot: f64 = (0..q).map(|i| w[i] * n[i]).sum();
    let r_term = ambient.riemann(p, w, n, w, n);
    let value = (4.0 / 3.0)
        * (w2 * np2 * (k + 2.0 - 3.0 * np2) + wp2 * (k + 2.0 - np2)
            - 2.0 * dot * dot
            - lambda * np2 * w2
            - lambda * wp2
            + r_term)
        - lambda * nr2 * w2
        - lambda * wr2;
    let eta_remainder = 8.0 * dot * dot + lambda * nr2 * w2 + lambda * wr2;
    let bound = (4.0 / 3.0)
        * (w2 * np2 * (k + 4.0 - lambda - 3.0 * np2) + wp2 * (k + 4.0 - lambda - np2))
        - eta_remainder;
    let j_deviation = ambient.complex_structure(p, n).map(|jn| {
        let jn2 = jn.norm_squared();
        if jn2 > 1e-14 {
            (w - (w.dot(&jn) / jn2) * &jn).norm()
        } else {
            w.norm()
        }
    });
    Ok(CrossGapReport {
        value,
        bound,
        eta_remainder,
        omega_r_norm: wr2.max(0.0).sqrt(),
        n_r_norm: nr2.max(0.0).sqrt(),
        j_deviation,
    })
}

// ---------------------------------------------------------------------------
// Index bound arithmetic and the pinching test
// ---------------------------------------------------------------------------

/// Exact rational lower bound 2 b1 / (d (d-1)) and its integer ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexBound {
    pub numerator: i64,
    pub denominator: i64,
    pub ceiling: i64,
}

pub fn index_lower_bound(d: usize, b1: usize) -> Result<IndexBound> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "index bound needs container dimension >= 2, got {d}"
        )));
    }
    let num = 2 * b1 as i64;
    let den = (d as i64) * (d as i64 - 1);
    let g = gcd(num, den);
    let ceiling = (num + den - 1) / den;
    Ok(IndexBound { numerator: num / g, denominator: den / g, ceiling })
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[derive(Debug, Clone, Serialize)]
pub struct PinchingReport {
    pub pass: bool,
    pub ratio: f64,
    pub threshold: f64,
    pub reason: Option<String>,
}

/// Convexity pinching test: all principal curvatures positive and
/// k_{m+1} / k_1 < sqrt((m+1)/2).
pub fn pinching_check(principal_curvatures: &[f64], m: usize) -> Result<PinchingReport> {
    if principal_curvatures.len() != m + 1 {
        return Err(Error::DimensionMismatch { expected: m + 1, got: principal_curvatures.len() });
    }
    if principal_curvatures.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("principal curvatures must be ascending".into()));
    }
    let threshold = ((m as f64 + 1.0) / 2.0).sqrt();
    if principal_curvatures[0] <= 0.0 {
        return Ok(PinchingReport {
            pass: false,
            ratio: f64::NAN,
            threshold,
            reason: Some("not convex".into()),
        });
    }
    let ratio = principal_curvatures[m] / principal_curvatures[0];
    Ok(PinchingReport {
        pass: ratio < threshold,
        ratio,
        threshold,
        reason: if ratio < threshold { None } else { Some("pinching ratio too large".into()) },
    })
}

// ---------------------------------------------------------------------------
// Proof-chain consistency on the product example
// ---------------------------------------------------------------------------

/// Direct finite-element evaluation of sum_{i<j} Q_f(u_ij, u_ij) on the
/// sphere x circle product. The wedge fields of the circle form are constant
/// along the sphere factor, so the product form separates into the weighted
/// sphere area times a periodic 1-D finite-element form on the circle.
pub fn product_wedge_q_sum(imm: &Immersion, subdiv: usize, n_circle: usize) -> Result<f64> {
    let (sphere_radius, circle_radius) = match imm.kind {
        ImmersionKind::ProductSphereCircle { sphere_radius, circle_radius } => {
            (sphere_radius, circle_radius)
        }
        _ => {
            return Err(Error::CompositionNotApplicable(
                "the separated wedge form is defined for the sphere x circle product".into(),
            ))
        }
    };
    // weighted sphere-factor area from the same polyhedral quadrature the
    // assembly uses (the weight is 1 there: f lives on the flat block)
    let (units, faces) = crate::discretize::icosphere_params(subdiv);
    let mut area_s = 0.0;
    for f in &faces {
        let pts: Vec<DVector<f64>> = f.iter().map(|&v| sphere_radius * &units[v]).collect();
        let e1 = &pts[1] - &pts[0];
        let e2 = &pts[2] - &pts[0];
        let g11 = e1.dot(&e1);
        let g12 = e1.dot(&e2);
        let g22 = e2.dot(&e2);
        area_s += 0.5 * (g11 * g22 - g12 * g12).max(0.0).sqrt();
    }
    // wedge fields sampled at circle nodes (they depend only on the angle)
    let node_param = |psi: f64| {
        let mut p = DVector::zeros(4);
        p[2] = 1.0;
        p[3] = psi;
        p
    };
    let mut points = Vec::with_capacity(n_circle);
    for i in 0..n_circle {
        let psi = i as f64 * std::f64::consts::TAU / n_circle as f64;
        let qp = node_param(psi);
        let geo = imm.point_geometry(&qp)?;
        let form = imm.analytic_form(&qp, &geo).ok_or_else(|| {
            Error::CompositionNotApplicable("product immersion lost its form oracle".into())
        })?;
        let sphere_part: f64 = (0..3).map(|a| geo.normal[a].abs() + form.omega[a].abs()).sum();
        if sphere_part > 1e-12 {
            return Err(Error::CompositionNotApplicable(
                "wedge fields are not constant along the sphere factor".into(),
            ));
        }
        points.push((geo.normal.clone(), form.omega.clone()));
    }
    let family = wedge_test_functions(&points)?;
    // periodic 1-D finite elements on the circle with the Jacobi potential
    let h = std::f64::consts::TAU * circle_radius / n_circle as f64;
    let mut total = 0.0;
    for i in 0..n_circle {
        let j = (i + 1) % n_circle;
        let psi_mid = (i as f64 + 0.5) * std::f64::consts::TAU / n_circle as f64;
        let geo = imm.point_geometry(&node_param(psi_mid))?;
        let wgt = (-geo.f_value).exp();
        for pidx in 0..family.pairs.len() {
            let ua = family.values[i][pidx];
            let ub = family.values[j][pidx];
            let stiff = wgt / h * (ub - ua) * (ub - ua);
            let mass = wgt * h / 6.0 * (2.0 * ua * ua + 2.0 * ua * ub + 2.0 * ub * ub);
            total += stiff - geo.potential * mass;
        }
    }
    Ok(area_s * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{make_gaussian_euclidean, make_projective_cylinder, make_sphere_cylinder, Family};
    use crate::discretize::{assemble, icosphere_mesh, torus_grid_mesh};
    use crate::immersion::Immersion;
    use nalgebra::DMatrix;

    fn shrinker() -> Immersion {
        let amb = Arc::new(make_gaussian_euclidean(3, 1.0).unwrap());
        Immersion::shrinker_sphere(amb).unwrap()
    }

    fn slice_sphere() -> Immersion {
        let amb = Arc::new(make_sphere_cylinder(2, 1, 1.0).unwrap());
        Immersion::slice_sphere(amb).unwrap()
    }

    fn product() -> Immersion {
        let amb = Arc::new(make_sphere_cylinder(2, 2, 1.0).unwrap());
        Immersion::product_s2xs1(amb).unwrap()
    }

    #[test]
    fn wedge_fields_coordinate_example() {
        let n = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let w = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let fam = wedge_test_functions(&[(n, w)]).unwrap();
        assert_eq!(fam.pairs, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(fam.values[0], vec![1.0, 0.0, 0.0]);
        assert!(fam.lagrange_residual(&[1.0]) < 1e-15);
    }

    #[test]
    fn wedge_fields_lagrange_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let imm = product();
        let mut points = Vec::new();
        let mut norms = Vec::new();
        for _ in 0..50 {
            let q = imm.random_param(&mut rng);
            let geo = imm.point_geometry(&q).unwrap();
            let form = imm.analytic_form(&q, &geo).unwrap();
            norms.push(form.omega.norm_squared());
            points.push((geo.normal, form.omega));
        }
        let fam = wedge_test_functions(&points).unwrap();
        assert!(fam.lagrange_residual(&norms) < 1e-10);
    }

    #[test]
    fn wedge_fields_reject_non_unit_normal() {
        let n = DVector::from_vec(vec![2.0, 0.0]);
        let w = DVector::from_vec(vec![0.0, 1.0]);
        assert!(matches!(
            wedge_test_functions(&[(n, w)]),
            Err(Error::DegenerateImmersion(_))
        ));
    }

    #[test]
    fn stability_form_of_constants() {
        // slice sphere: potential 1, weight 1, area 4 pi
        let imm = slice_sphere();
        let mesh = icosphere_mesh(&imm, 3).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let ones = DVector::from_element(asm.dim(), 1.0);
        let q = q_form(&asm, &ones).unwrap();
        let expect = -4.0 * std::f64::consts::PI;
        assert!((q - expect).abs() < 0.01 * expect.abs(), "{q} vs {expect}");

        // shrinker sphere: potential 2, weighted area 8 pi e^{-1}
        let imm = shrinker();
        let mesh = icosphere_mesh(&imm, 3).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let ones = DVector::from_element(asm.dim(), 1.0);
        let q = q_form(&asm, &ones).unwrap();
        let expect = -2.0 * 8.0 * std::f64::consts::PI * (-1.0f64).exp();
        assert!((q - expect).abs() < 0.01 * expect.abs(), "{q} vs {expect}");
    }

    #[test]
    fn stability_form_is_the_rayleigh_quotient_on_eigenvectors() {
        let imm = slice_sphere();
        let mesh = icosphere_mesh(&imm, 2).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let spec = crate::spectral::eigensolve(&asm, 6).unwrap();
        let v = spec.eigenvectors.as_ref().unwrap().column(0).into_owned();
        let q = q_form(&asm, &v).unwrap();
        // eigenvectors are mass-orthonormal, so Q_f(v, v) = lambda_1
        assert!((q - spec.eigenvalues[0]).abs() < 1e-8, "{q}");
    }

    #[test]
    fn stability_form_rejects_wrong_dimension() {
        let imm = slice_sphere();
        let mesh = icosphere_mesh(&imm, 1).unwrap();
        let asm = assemble(&mesh, &imm).unwrap();
        let u = DVector::zeros(asm.dim() + 1);
        assert!(matches!(q_form(&asm, &u), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn derivative_identity_on_the_product() {
        let imm = product();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let q = imm.random_param(&mut rng);
            let geo = imm.point_geometry(&q).unwrap();
            let form = imm.analytic_form(&q, &geo).unwrap();
            let r = identity5_residual(&imm.ambient, &geo, &form).unwrap();
            assert!(r < 1e-8, "residual {r}");
        }
    }

    #[test]
    fn derivative_identity_flat_totally_geodesic() {
        // plane through the origin in the Gaussian space: A = 0, ambient flat
        let amb = make_gaussian_euclidean(3, 1.0).unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let geo = PointGeometry {
            position: DVector::from_vec(vec![0.3, -0.1, 0.0]),
            tangent_frame: vec![e1, e2],
            normal: DVector::from_vec(vec![0.0, 0.0, 1.0]),
            shape_operator: DMatrix::zeros(2, 2),
            h: 0.0,
            h_f: 0.0,
            f_value: 0.05,
            potential: 1.0,
            d_normal_frame: Some(vec![DVector::zeros(3), DVector::zeros(3)]),
            frame_coeffs: DMatrix::identity(2, 2),
            area_factor: 1.0,
        };
        let form = FormEval {
            omega: DVector::from_vec(vec![0.7, -0.2, 0.0]),
            d_omega_frame: vec![
                DVector::from_vec(vec![0.1, 0.4, 0.0]),
                DVector::from_vec(vec![-0.3, 0.2, 0.0]),
            ],
        };
        let r = identity5_residual(&amb, &geo, &form).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn derivative_identity_needs_the_oracle() {
        let imm = product();
        let q = imm.random_param(&mut ChaCha8Rng::seed_from_u64(0));
        let mut geo = imm.point_geometry(&q).unwrap();
        let form = imm.analytic_form(&q, &geo).unwrap();
        geo.d_normal_frame = None;
        assert!(matches!(
            identity5_residual(&imm.ambient, &geo, &form),
            Err(Error::UnsupportedForUserChart(_))
        ));
    }

    #[test]
    fn bochner_integral_vanishes_on_the_product() {
        let imm = product();
        let quad = product_quadrature(&imm, 2, 16).unwrap();
        let res = bochner_residual(&quad).unwrap();
        assert!(res[0] < 1e-6, "residual {}", res[0]);
    }

    #[test]
    fn bochner_integral_vanishes_on_the_flat_torus() {
        let imm = Immersion::flat_torus(std::f64::consts::TAU, std::f64::consts::TAU);
        let mesh = torus_grid_mesh(&imm, 12, 12).unwrap();
        let quad = analytic_mesh_quadrature(&mesh, &imm).unwrap();
        let res = bochner_residual(&quad).unwrap();
        assert!(res[0] < 1e-10, "residual {}", res[0]);
    }

    #[test]
    fn hypothesis_margin_on_the_product() {
        let imm = product();
        let quad = product_quadrature(&imm, 2, 16).unwrap();
        let report = hypothesis_check(&quad, 0.0, 8, 42).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let expect = 16.0 * std::f64::consts::PI.powi(2) * (-0.5f64).exp();
        let margin = report.min_margin.unwrap();
        assert!((margin - expect).abs() < 0.02 * expect, "{margin} vs {expect}");
        // pointwise gap is -2 lambda |omega|^2 = -2 on the whole surface
        for g in &report.gap_values {
            assert!((g + 2.0).abs() < 1e-8, "gap {g}");
        }
    }

    #[test]
    fn hypothesis_fails_for_large_negative_threshold() {
        let imm = product();
        let quad = product_quadrature(&imm, 1, 8).unwrap();
        let report = hypothesis_check(&quad, -1000.0, 4, 1).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
    }

    #[test]
    fn hypothesis_vacuous_without_forms() {
        let imm = slice_sphere();
        let mesh = icosphere_mesh(&imm, 1).unwrap();
        let quad = mesh_quadrature(&mesh, &imm, &[]).unwrap();
        let report = hypothesis_check(&quad, 0.0, 4, 0).unwrap();
        assert_eq!(report.verdict, Verdict::Vacuous);
        assert!(report.min_margin.is_none());
    }

    #[test]
    fn cylinder_gap_closed_form_examples() {
        // the product configuration: X in the flat block, |pi_R N| = 1
        let d = XDecomposition { x_norm: 1.0, pi_r_x: 1.0, pi_r_n: 1.0, dot: 0.0 };
        assert!((cylinder_gap(2, 1.0, &d).unwrap() + 2.0).abs() < 1e-14);
        // k = 3, X tangent to the sphere factor, N flat
        let d = XDecomposition { x_norm: 1.0, pi_r_x: 0.0, pi_r_n: 1.0, dot: 0.0 };
        assert!((cylinder_gap(3, 1.0, &d).unwrap() + 1.5).abs() < 1e-14);
        // X = 0
        let d = XDecomposition { x_norm: 0.0, pi_r_x: 0.0, pi_r_n: 0.5, dot: 0.0 };
        assert_eq!(cylinder_gap(4, 1.0, &d).unwrap(), 0.0);
    }

    #[test]
    fn cylinder_gap_rejects_inconsistent_decompositions() {
        let d = XDecomposition { x_norm: 1.0, pi_r_x: 2.0, pi_r_n: 0.5, dot: 0.0 };
        assert!(matches!(
            cylinder_gap(3, 1.0, &d),
            Err(Error::InconsistentDecomposition(_))
        ));
        let d = XDecomposition { x_norm: 1.0, pi_r_x: 0.5, pi_r_n: 0.5, dot: 0.4 };
        assert!(matches!(
            cylinder_gap(3, 1.0, &d),
            Err(Error::InconsistentDecomposition(_))
        ));
    }

    #[test]
    fn cylinder_gap_matches_the_definitional_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for k in [2usize, 3, 4] {
            let lambda = 0.5 + 1.5 * rng.gen::<f64>();
            let amb = make_sphere_cylinder(k, 2, lambda).unwrap();
            for _ in 0..100 {
                let p = amb.random_point(&mut rng);
                let n = amb.random_tangent(&mut rng, &p);
                let mut x = amb.random_tangent(&mut rng, &p);
                x -= x.dot(&n) * &n;
                let frame = complement_frame(&amb, &p, &n);
                let direct = gap_value(&amb, &p, &frame, &n, &x);
                let closed =
                    cylinder_gap(k, lambda, &euclid_decomposition(&amb, &x, &n)).unwrap();
                assert!((direct - closed).abs() < 1e-8, "k={k}: {direct} vs {closed}");
                if k >= 3 && x.norm() > 1e-6 {
                    assert!(closed < 0.0, "k={k} gap {closed} not negative");
                }
            }
        }
    }

    #[test]
    fn projective_identities_on_cp1() {
        let amb = make_projective_cylinder(Family::Complex, 1, 1).unwrap();
        let report = cross_identity_check(&amb, 25, 7).unwrap();
        assert!(report.res_ii_diag < 1e-5, "(7): {}", report.res_ii_diag);
        assert!(report.res_ii_polar < 1e-4, "(8): {}", report.res_ii_polar);
        assert!(report.res_ii_mixed < 1e-4, "(9): {}", report.res_ii_mixed);
        assert!(report.res_frame_sum < 1e-4, "(11): {}", report.res_frame_sum);
        // CP^1 is the round 2-sphere of curvature 4 with Einstein constant 4
        assert!((report.einstein_expected - 4.0).abs() < 1e-12);
        assert!(report.einstein_residual < 1e-4);
        assert!(report.sectional_min > 4.0 - 1e-3 && report.sectional_max < 4.0 + 1e-3);
    }

    #[test]
    fn projective_identities_need_a_projective_ambient() {
        let amb = make_gaussian_euclidean(3, 1.0).unwrap();
        assert!(cross_identity_check(&amb, 2, 0).is_err());
    }

    #[test]
    fn gap_bound_all_euclidean_data() {
        let amb = make_projective_cylinder(Family::Complex, 1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = amb.random_point(&mut rng);
        let q = amb.projective_ops().unwrap().q;
        let mut n = DVector::zeros(amb.embed_dim_d);
        n[q] = 1.0;
        let mut w = DVector::zeros(amb.embed_dim_d);
        w[q + 1] = 0.8;
        let report = cross_gap_bound(&amb, &p, &w, &n).unwrap();
        let lambda = amb.lambda;
        let expect = -lambda * (w.norm_squared() + w.norm_squared());
        assert!((report.value - expect).abs() < 1e-12, "{} vs {expect}", report.value);
        assert!(report.value <= report.bound + 1e-12);
        assert!(report.eta_remainder >= 0.0);
    }

    #[test]
    fn gap_bound_dominates_the_value_at_random_data() {
        let amb = make_projective_cylinder(Family::Complex, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p = amb.random_point(&mut rng);
            let n = amb.random_tangent(&mut rng, &p);
            let mut w = amb.random_tangent(&mut rng, &p);
            w -= w.dot(&n) * &n;
            let report = cross_gap_bound(&amb, &p, &w, &n).unwrap();
            assert!(
                report.value <= report.bound + 1e-4,
                "value {} exceeds bound {}",
                report.value,
                report.bound
            );
            assert!(report.eta_remainder >= -1e-12);
            assert!(report.j_deviation.is_some());
        }
    }

    #[test]
    fn gap_bound_zero_form() {
        let amb = make_projective_cylinder(Family::Quaternionic, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = amb.random_point(&mut rng);
        let n = amb.random_tangent(&mut rng, &p);
        let w = DVector::zeros(amb.embed_dim_d);
        let report = cross_gap_bound(&amb, &p, &w, &n).unwrap();
        assert_eq!(report.value, 0.0);
        assert!(report.bound >= -1e-12);
        assert_eq!(report.omega_r_norm, 0.0);
    }

    #[test]
    fn index_bound_arithmetic() {
        assert_eq!(
            index_lower_bound(5, 1).unwrap(),
            IndexBound { numerator: 1, denominator: 10, ceiling: 1 }
        );
        assert_eq!(
            index_lower_bound(4, 0).unwrap(),
            IndexBound { numerator: 0, denominator: 1, ceiling: 0 }
        );
        assert_eq!(
            index_lower_bound(10, 90).unwrap(),
            IndexBound { numerator: 2, denominator: 1, ceiling: 2 }
        );
        assert!(index_lower_bound(1, 3).is_err());
    }

    #[test]
    fn pinching_examples() {
        let r = pinching_check(&[1.0, 1.0, 1.0], 2).unwrap();
        assert!(r.pass);
        let r = pinching_check(&[1.0, 1.0, 1.3], 2).unwrap();
        assert!(!r.pass);
        let r = pinching_check(&[0.5, 1.0], 1).unwrap();
        assert!(!r.pass);
        let r = pinching_check(&[-0.5, 1.0], 1).unwrap();
        assert!(!r.pass);
        assert_eq!(r.reason.as_deref(), Some("not convex"));
        assert!(pinching_check(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn wedge_stability_sum_matches_the_oracle_margin() {
        let imm = product();
        let q_sum = product_wedge_q_sum(&imm, 3, 64).unwrap();
        let quad = product_quadrature(&imm, 3, 32).unwrap();
        let margin = hypothesis_check(&quad, 0.0, 0, 0).unwrap().min_margin.unwrap();
        let exact = -16.0 * std::f64::consts::PI.powi(2) * (-0.5f64).exp();
        assert!((q_sum - exact).abs() < 0.02 * exact.abs(), "{q_sum} vs {exact}");
        assert!((q_sum + margin).abs() < 0.02 * margin.abs(), "{q_sum} vs -{margin}");
    }
}
