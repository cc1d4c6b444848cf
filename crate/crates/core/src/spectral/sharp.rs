//! Reconstruction of pointwise vector proxies ("sharp" fields) from
//! discrete 1-forms: per triangle the constant tangent vector whose
//! circulations best match the edge values, averaged per vertex with
//! area weights.

use nalgebra::{DVector, Matrix2, Vector2};

use crate::discretize::SurfaceMesh;
use crate::error::{Error, Result};

/// One ambient-space vector per vertex approximating the metric sharp of
/// the edge-based 1-form `form` (one value per mesh edge).
pub fn sharp_vectors(mesh: &SurfaceMesh, form: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    if form.len() != mesh.edges.len() {
        return Err(Error::DimensionMismatch {
            expected: mesh.edges.len(),
            got: form.len(),
        });
    }
    let dim = mesh.positions[0].len();
    let nv = mesh.positions.len();
    let mut accum = vec![DVector::zeros(dim); nv];
    let mut weight = vec![0.0f64; nv];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let uv = &mesh.corner_uv[t];
        // normal-equations fit: sum_e g_e g_e^T w = sum_e g_e * omega(e)
        let mut gram = Matrix2::zeros();
        let mut rhs = Vector2::zeros();
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let g = Vector2::new(
                uv[(k + 1) % 3][0] - uv[k][0],
                uv[(k + 1) % 3][1] - uv[k][1],
            );
            let (edge, sign) = mesh.edge_lookup(a, b)?;
            let val = sign * form[edge];
            gram += g * g.transpose();
            rhs += g * val;
        }
        let w = gram.lu().solve(&rhs).ok_or_else(|| {
            Error::DegenerateElement {
                element: t,
                area: 0.0,
            }
        })?;
        // push forward through the isometric corner frame: with local
        // coordinates [0,0], [a,0], [x,y] the frame is e1 = (p1-p0)/a,
        // e2 = (p2 - p0 - x e1)/y.
        let p0 = &mesh.corner_positions[t][0];
        let p1 = &mesh.corner_positions[t][1];
        let p2 = &mesh.corner_positions[t][2];
        let a_len = uv[1][0];
        let (x, y) = (uv[2][0], uv[2][1]);
        let e1 = DVector::from_fn(dim, |i, _| (p1[i] - p0[i]) / a_len);
        let e2 = DVector::from_fn(dim, |i, _| (p2[i] - p0[i] - x * e1[i]) / y);
        let vec = w[0] * &e1 + w[1] * e2;
        let area = 0.5 * (a_len * y).abs();
        for &v in tri {
            accum[v] += area * &vec;
            weight[v] += area;
        }
    }
    for (acc, w) in accum.iter_mut().zip(&weight) {
        if *w > 0.0 {
            *acc /= *w;
        }
    }
    Ok(accum)
}
