//! Product immersions: combine factor hypersurfaces/slices living in disjoint
//! coordinate blocks. Exactly one factor must carry the unit normal.

use std::sync::Arc;

use nalgebra::DVector;

use super::charts::{Chart, ChartDerivs, CircleChart, SphereChart};
use super::{Immersion, ImmersionKind};
use crate::ambient::AmbientSpace;
use crate::error::{Error, Result};

/// Declarative factor of a product immersion inside a fixed ambient.
#[derive(Debug, Clone)]
pub enum FactorSpec {
    /// The entire round factor S^k(r) occupying a coordinate block
    /// (contributes no normal direction).
    FullSphere { radius: f64, offset: usize, block: usize },
    /// Round circle of radius r inside a flat 2-coordinate block; carries
    /// the product normal (outward radial).
    CircleInPlane { radius: f64, offset: usize },
    /// Dimension-zero slice {0} of a flat coordinate carrying the normal
    /// along the given axis.
    SliceNormal { axis: usize },
}

impl FactorSpec {
    fn carries_normal(&self) -> bool {
        matches!(self, FactorSpec::CircleInPlane { .. } | FactorSpec::SliceNormal { .. })
    }
}

/// Sum of block charts over disjoint coordinate blocks; the parameter vector
/// is the concatenation of the factor parameters and the normal comes from
/// the single carrier factor.
#[derive(Debug)]
pub struct ProductChart {
    parts: Vec<Arc<dyn Chart>>,
    /// Length of each part's parameter segment.
    param_lens: Vec<usize>,
    carrier: usize,
    embed_dim: usize,
}

impl ProductChart {
    fn split<'a>(&self, q: &'a DVector<f64>) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(self.parts.len());
        let mut at = 0;
        for &len in &self.param_lens {
            out.push(q.rows(at, len).into_owned());
            at += len;
        }
        out
    }
}

impl Chart for ProductChart {
    fn surface_dim(&self) -> usize {
        self.parts.iter().map(|p| p.surface_dim()).sum()
    }

    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn canonicalize(&self, q: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(q.len());
        let mut at = 0;
        for (part, piece) in self.parts.iter().zip(self.split(q)) {
            let c = part.canonicalize(&piece);
            out.rows_mut(at, c.len()).copy_from(&c);
            at += c.len();
        }
        out
    }

    fn position(&self, q: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.embed_dim);
        for (part, piece) in self.parts.iter().zip(self.split(q)) {
            x += part.position(&piece);
        }
        x
    }

    fn derivs(&self, q: &DVector<f64>) -> ChartDerivs {
        let pieces = self.split(q);
        let part_derivs: Vec<ChartDerivs> =
            self.parts.iter().zip(&pieces).map(|(p, q)| p.derivs(q)).collect();
        let m = self.surface_dim();
        let d = self.embed_dim;
        let mut position = DVector::zeros(d);
        for pd in &part_derivs {
            position += &pd.position;
        }
        let mut jacobian = Vec::with_capacity(m);
        // offsets of each part's direction range
        let mut dir_offsets = Vec::with_capacity(self.parts.len());
        for pd in &part_derivs {
            dir_offsets.push(jacobian.len());
            jacobian.extend(pd.jacobian.iter().cloned());
        }
        let zero = DVector::zeros(d);
        let mut second = vec![vec![zero.clone(); m]; m];
        for (pi, pd) in part_derivs.iter().enumerate() {
            let off = dir_offsets[pi];
            for a in 0..pd.jacobian.len() {
                for b in 0..pd.jacobian.len() {
                    second[off + a][off + b] = pd.second[a][b].clone();
                }
            }
        }
        // the carrier normal depends only on the carrier's own parameters
        let cd = &part_derivs[self.carrier];
        let normal = cd.normal.clone();
        let normal_partials = cd.normal_partials.as_ref().map(|parts| {
            let mut full = vec![zero.clone(); m];
            let off = dir_offsets[self.carrier];
            for (a, dn) in parts.iter().enumerate() {
                full[off + a] = dn.clone();
            }
            full
        });
        ChartDerivs { position, jacobian, second, normal, normal_partials }
    }
}

/// Assemble a product immersion from factor specs inside one ambient.
/// Exactly one factor must carry the normal direction.
pub fn product_immersion(
    ambient: Arc<AmbientSpace>,
    factors: Vec<FactorSpec>,
) -> Result<Immersion> {
    if factors.is_empty() {
        return Err(Error::InvalidProduct("no factors given".into()));
    }
    let carriers = factors.iter().filter(|f| f.carries_normal()).count();
    if carriers != 1 {
        return Err(Error::InvalidProduct(format!(
            "exactly one factor must carry the normal direction, found {carriers}"
        )));
    }
    let d = ambient.embed_dim_d;
    let mut parts: Vec<Arc<dyn Chart>> = Vec::new();
    let mut param_lens = Vec::new();
    let mut carrier = 0usize;
    let mut sphere: Option<(f64, usize)> = None; // (radius, block)
    let mut circle: Option<f64> = None;
    let mut slice_axis: Option<usize> = None;
    for spec in &factors {
        match *spec {
            FactorSpec::FullSphere { radius, offset, block } => {
                if offset + block > d {
                    return Err(Error::InvalidProduct("sphere block exceeds ambient".into()));
                }
                parts.push(Arc::new(SphereChart {
                    radius,
                    embed_dim: d,
                    offset,
                    block,
                    fixed: vec![0.0; d - block],
                    normal_axis: None,
                }));
                param_lens.push(block);
                sphere = Some((radius, block));
            }
            FactorSpec::CircleInPlane { radius, offset } => {
                if offset + 2 > d {
                    return Err(Error::InvalidProduct("circle block exceeds ambient".into()));
                }
                carrier = parts.len();
                parts.push(Arc::new(CircleChart {
                    radius,
                    embed_dim: d,
                    offset,
                    fixed: vec![0.0; d - 2],
                }));
                param_lens.push(1);
                circle = Some(radius);
            }
            FactorSpec::SliceNormal { axis } => {
                if axis >= d {
                    return Err(Error::InvalidProduct("slice axis exceeds ambient".into()));
                }
                slice_axis = Some(axis);
            }
        }
    }
    // degenerate layouts collapse to a single closed-form chart
    if let Some(axis) = slice_axis {
        let (radius, block) = sphere.ok_or_else(|| {
            Error::InvalidProduct("a slice normal needs a positive-dimensional factor".into())
        })?;
        if parts.len() != 1 {
            return Err(Error::InvalidProduct(
                "slice normals combine with exactly one sphere factor".into(),
            ));
        }
        let chart = SphereChart {
            radius,
            embed_dim: d,
            offset: 0,
            block,
            fixed: vec![0.0; d - block],
            normal_axis: Some(axis),
        };
        return Ok(Immersion {
            ambient,
            chart: Arc::new(chart),
            kind: ImmersionKind::SliceSphere { radius },
            zero_weight: false,
            abstract_surface: false,
            flip_normal: false,
        });
    }
    let kind = match (sphere, circle) {
        (Some((sr, _)), Some(cr)) => {
            ImmersionKind::ProductSphereCircle { sphere_radius: sr, circle_radius: cr }
        }
        (None, Some(cr)) => ImmersionKind::Circle { radius: cr },
        _ => ImmersionKind::Custom,
    };
    let chart: Arc<dyn Chart> = if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Arc::new(ProductChart { parts, param_lens, carrier, embed_dim: d })
    };
    Ok(Immersion {
        ambient,
        chart,
        kind,
        zero_weight: false,
        abstract_surface: false,
        flip_normal: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient;

    #[test]
    fn rejects_zero_or_two_normal_carriers() {
        let amb = Arc::new(ambient::make_sphere_cylinder(2, 2, 1.0).unwrap());
        let err = product_immersion(
            amb.clone(),
            vec![FactorSpec::FullSphere { radius: 1.0, offset: 0, block: 3 }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidProduct(_)));
        let err = product_immersion(
            amb,
            vec![
                FactorSpec::CircleInPlane { radius: 1.0, offset: 3 },
                FactorSpec::SliceNormal { axis: 4 },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidProduct(_)));
    }

    #[test]
    fn lone_circle_in_gaussian_plane() {
        let amb = Arc::new(ambient::make_gaussian_euclidean(2, 1.0).unwrap());
        let imm = product_immersion(
            amb,
            vec![FactorSpec::CircleInPlane { radius: 1.0, offset: 0 }],
        )
        .unwrap();
        assert!(imm.f_minimality_residual(10, 1).unwrap() < 1e-12);
    }
}
