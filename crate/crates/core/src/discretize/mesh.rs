//! Triangle meshes over chart parameter domains: icosphere subdivision,
//! periodic torus grids, and topology validation.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::immersion::{Immersion, ImmersionKind};

/// Closed oriented triangle mesh sampling an immersion.
///
/// Vertices carry both a parameter-domain point and its R^d image. Each
/// triangle additionally stores *unwrapped* per-corner parameters (so
/// periodic charts stay single-valued element-wise) and flat 2D corner
/// coordinates isometric to the embedded triangle, which every downstream
/// assembly uses for element geometry.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub params: Vec<DVector<f64>>,
    pub positions: Vec<DVector<f64>>,
    pub triangles: Vec<[usize; 3]>,
    /// Unwrapped corner parameters per triangle.
    pub corner_params: Vec<[DVector<f64>; 3]>,
    /// Unwrapped corner positions in R^d per triangle (single-valued even
    /// across periodic chart seams).
    pub corner_positions: Vec<[DVector<f64>; 3]>,
    /// Local isometric 2D coordinates of each triangle's corners.
    pub corner_uv: Vec<[[f64; 2]; 3]>,
    /// Oriented edges (v0 < v1).
    pub edges: Vec<[usize; 2]>,
    edge_map: HashMap<(usize, usize), usize>,
    /// Expected Euler characteristic, checked by validate().
    pub declared_euler: Option<i64>,
    /// True for meshes loaded without a chart (OFF input): no parameter
    /// domain, operators assembled from positions only.
    pub chartless: bool,
}

impl SurfaceMesh {
    /// Assemble the derived structures (edges, corner frames) and check the
    /// topology invariants.
    pub fn build(
        params: Vec<DVector<f64>>,
        positions: Vec<DVector<f64>>,
        triangles: Vec<[usize; 3]>,
        corner_params: Vec<[DVector<f64>; 3]>,
        corner_positions: Vec<[DVector<f64>; 3]>,
        declared_euler: Option<i64>,
        chartless: bool,
    ) -> Result<SurfaceMesh> {
        let corner_uv = corner_positions.iter().map(local_frame).collect();
        let (edges, edge_map) = collect_edges(&triangles, params.len())?;
        let mesh = SurfaceMesh {
            params,
            positions,
            triangles,
            corner_params,
            corner_positions,
            corner_uv,
            edges,
            edge_map,
            declared_euler,
            chartless,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.params.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Edge index and orientation sign of the directed edge (a, b).
    pub fn edge_lookup(&self, a: usize, b: usize) -> Result<(usize, f64)> {
        let key = (a.min(b), a.max(b));
        let &e = self
            .edge_map
            .get(&key)
            .ok_or_else(|| Error::Topology(format!("edge ({a},{b}) not found")))?;
        Ok((e, if a < b { 1.0 } else { -1.0 }))
    }

    /// Canonicalized parameter of a triangle barycenter. Unwrapped corner
    /// parameters keep this single-valued across periodic charts.
    pub fn barycenter_param(&self, t: usize) -> DVector<f64> {
        let c = &self.corner_params[t];
        (&c[0] + &c[1] + &c[2]) / 3.0
    }

    pub fn validate(&self) -> Result<()> {
        // closed + orientable: every edge in exactly two triangles, with
        // opposite directed orientations
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let key = (tri[k], tri[(k + 1) % 3]);
                *directed.entry(key).or_insert(0) += 1;
            }
        }
        let mut bad = Vec::new();
        for (&(a, b), &cnt) in &directed {
            let back = directed.get(&(b, a)).copied().unwrap_or(0);
            if cnt != 1 || back != 1 {
                bad.push((a, b));
            }
        }
        if !bad.is_empty() {
            bad.sort_unstable();
            bad.truncate(8);
            return Err(Error::Topology(format!(
                "mesh is not a closed oriented surface; offending edges: {bad:?}"
            )));
        }
        if let Some(chi) = self.declared_euler {
            let got = self.euler_characteristic();
            if got != chi {
                return Err(Error::Topology(format!(
                    "Euler characteristic {got}, expected {chi}"
                )));
            }
        }
        // degenerate triangles
        let areas: Vec<f64> = self
            .corner_uv
            .iter()
            .map(|uv| {
                0.5 * ((uv[1][0] - uv[0][0]) * (uv[2][1] - uv[0][1])
                    - (uv[2][0] - uv[0][0]) * (uv[1][1] - uv[0][1]))
                    .abs()
            })
            .collect();
        let mean = areas.iter().sum::<f64>() / areas.len().max(1) as f64;
        for (t, &a) in areas.iter().enumerate() {
            if a <= 1e-12 * mean {
                return Err(Error::DegenerateElement { element: t, area: a });
            }
        }
        Ok(())
    }
}

/// Flat 2D coordinates of a triangle isometric to its R^d embedding.
fn local_frame(p: &[DVector<f64>; 3]) -> [[f64; 2]; 3] {
    let e1 = &p[1] - &p[0];
    let e2 = &p[2] - &p[0];
    let a = e1.norm();
    let x = if a > 0.0 { e1.dot(&e2) / a } else { 0.0 };
    let y = (e2.norm_squared() - x * x).max(0.0).sqrt();
    [[0.0, 0.0], [a, 0.0], [x, y]]
}

fn collect_edges(
    triangles: &[[usize; 3]],
    nv: usize,
) -> Result<(Vec<[usize; 2]>, HashMap<(usize, usize), usize>)> {
    let mut edge_map = HashMap::new();
    let mut edges = Vec::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if a >= nv || b >= nv || a == b {
                return Err(Error::Topology(format!("invalid triangle corner pair ({a},{b})")));
            }
            let key = (a.min(b), a.max(b));
            if !edge_map.contains_key(&key) {
                edge_map.insert(key, edges.len());
                edges.push([key.0, key.1]);
            }
        }
    }
    Ok((edges, edge_map))
}

/// Icosahedron vertex/face lists (unit sphere).
fn icosahedron() -> (Vec<DVector<f64>>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let verts: Vec<DVector<f64>> = raw
        .iter()
        .map(|v| {
            let p = DVector::from_vec(v.to_vec());
            let n = p.norm();
            p / n
        })
        .collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (verts, faces)
}

/// Unit-sphere vertex parameters and faces after `subdiv` 1:4 subdivisions.
pub fn icosphere_params(subdiv: usize) -> (Vec<DVector<f64>>, Vec<[usize; 3]>) {
    let (mut verts, mut faces) = icosahedron();
    for _ in 0..subdiv {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mids = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mids[k] = *midpoint.entry(key).or_insert_with(|| {
                    let p = (&verts[a] + &verts[b]) / 2.0;
                    let n = p.norm();
                    verts.push(p / n);
                    verts.len() - 1
                });
            }
            new_faces.push([f[0], mids[0], mids[2]]);
            new_faces.push([f[1], mids[1], mids[0]]);
            new_faces.push([f[2], mids[2], mids[1]]);
            new_faces.push([mids[0], mids[1], mids[2]]);
        }
        faces = new_faces;
    }
    (verts, faces)
}

/// Plain round sphere mesh in R^3 (no immersion attached).
pub fn icosphere(subdiv: usize, radius: f64) -> SurfaceMesh {
    let (params, faces) = icosphere_params(subdiv);
    let positions: Vec<DVector<f64>> = params.iter().map(|p| radius * p).collect();
    let corner_params: Vec<[DVector<f64>; 3]> = faces
        .iter()
        .map(|f| [params[f[0]].clone(), params[f[1]].clone(), params[f[2]].clone()])
        .collect();
    let corner_positions: Vec<[DVector<f64>; 3]> = faces
        .iter()
        .map(|f| {
            [
                positions[f[0]].clone(),
                positions[f[1]].clone(),
                positions[f[2]].clone(),
            ]
        })
        .collect();
    SurfaceMesh::build(
        params,
        positions,
        faces,
        corner_params,
        corner_positions,
        Some(2),
        false,
    )
    .expect("icosphere construction is always valid")
}

/// Icosphere mesh over a sphere-like chart (parameter domain: unit vectors
/// in R^3) of the given immersion.
pub fn icosphere_mesh(imm: &Immersion, subdiv: usize) -> Result<SurfaceMesh> {
    if imm.surface_dim() != 2 {
        return Err(Error::InvalidDimension(format!(
            "icosphere mesh needs a 2-dimensional surface, got {}",
            imm.surface_dim()
        )));
    }
    let (params, faces) = icosphere_params(subdiv);
    let positions: Vec<DVector<f64>> =
        params.iter().map(|p| imm.chart.position(p)).collect();
    let corner_params: Vec<[DVector<f64>; 3]> = faces
        .iter()
        .map(|f| [params[f[0]].clone(), params[f[1]].clone(), params[f[2]].clone()])
        .collect();
    let corner_positions: Vec<[DVector<f64>; 3]> = faces
        .iter()
        .map(|f| {
            [
                positions[f[0]].clone(),
                positions[f[1]].clone(),
                positions[f[2]].clone(),
            ]
        })
        .collect();
    SurfaceMesh::build(
        params,
        positions,
        faces,
        corner_params,
        corner_positions,
        Some(2),
        false,
    )
}

/// Periodic grid mesh over a torus chart (flat torus or torus of revolution).
pub fn torus_grid_mesh(imm: &Immersion, n_u: usize, n_v: usize) -> Result<SurfaceMesh> {
    if n_u < 3 || n_v < 3 {
        return Err(Error::InvalidDimension(
            "torus grids need at least 3 subdivisions per direction".into(),
        ));
    }
    let (pu, pv) = match imm.kind {
        ImmersionKind::FlatTorus { len_u, len_v } => (len_u, len_v),
        ImmersionKind::TorusRevolution { .. } => {
            (std::f64::consts::TAU, std::f64::consts::TAU)
        }
        _ => {
            return Err(Error::Config(
                "torus grid meshing needs a torus immersion".into(),
            ))
        }
    };
    let (hu, hv) = (pu / n_u as f64, pv / n_v as f64);
    let vid = |i: usize, j: usize| (i % n_u) * n_v + (j % n_v);
    let mut params = Vec::with_capacity(n_u * n_v);
    for i in 0..n_u {
        for j in 0..n_v {
            params.push(DVector::from_vec(vec![i as f64 * hu, j as f64 * hv]));
        }
    }
    let positions: Vec<DVector<f64>> =
        params.iter().map(|q| imm.chart.position(q)).collect();
    let mut faces = Vec::with_capacity(2 * n_u * n_v);
    let mut corner_params = Vec::with_capacity(2 * n_u * n_v);
    let uq = |i: usize, j: usize| DVector::from_vec(vec![i as f64 * hu, j as f64 * hv]);
    for i in 0..n_u {
        for j in 0..n_v {
            // counterclockwise quad split, unwrapped corner parameters
            faces.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
            corner_params.push([uq(i, j), uq(i + 1, j), uq(i + 1, j + 1)]);
            faces.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            corner_params.push([uq(i, j), uq(i + 1, j + 1), uq(i, j + 1)]);
        }
    }
    let corner_positions: Vec<[DVector<f64>; 3]> = corner_params
        .iter()
        .map(|c| {
            [
                imm.chart.position(&c[0]),
                imm.chart.position(&c[1]),
                imm.chart.position(&c[2]),
            ]
        })
        .collect();
    SurfaceMesh::build(
        params,
        positions,
        faces,
        corner_params,
        corner_positions,
        Some(0),
        false,
    )
}
