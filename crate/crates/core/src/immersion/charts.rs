//! Parametric charts with analytic derivatives up to second order.
//!
//! A chart maps a reference parameter point (a unit vector for sphere-like
//! domains, angles for tori and circles) into the ambient container R^d.
//! `ChartDerivs` carries everything point geometry needs: position, first and
//! second partials along a local parameter basis, the oriented unit normal of
//! the hypersurface within T M, and the derivatives of the normal. Built-in
//! charts are closed-form; `FdChart` wraps a bare position map with central
//! differences for user-supplied immersions.

use nalgebra::DVector;

/// Local derivative data of a chart at one parameter point.
#[derive(Debug, Clone)]
pub struct ChartDerivs {
    /// Image point in R^d.
    pub position: DVector<f64>,
    /// First partials X_a along the local parameter directions (m columns).
    pub jacobian: Vec<DVector<f64>>,
    /// Second partials X_ab, row-major upper data (full m x m, symmetric).
    pub second: Vec<Vec<DVector<f64>>>,
    /// Oriented unit normal of Sigma inside T_x M.
    pub normal: DVector<f64>,
    /// Partials of the normal along the same parameter directions, when the
    /// chart provides them analytically.
    pub normal_partials: Option<Vec<DVector<f64>>>,
}

pub trait Chart: Send + Sync + std::fmt::Debug {
    /// Hypersurface dimension m.
    fn surface_dim(&self) -> usize;
    /// Container dimension d.
    fn embed_dim(&self) -> usize;
    fn position(&self, q: &DVector<f64>) -> DVector<f64>;
    fn derivs(&self, q: &DVector<f64>) -> ChartDerivs;
    /// Snap a raw parameter point onto the reference domain (e.g. normalize
    /// a near-unit vector).
    fn canonicalize(&self, q: &DVector<f64>) -> DVector<f64> {
        q.clone()
    }
}

/// Local orthonormal tangent basis of the unit sphere at p (|p| = 1),
/// deterministic in p.
pub fn unit_sphere_tangent_basis(p: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = p.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    for a in 0..n {
        let mut v = DVector::zeros(n);
        v[a] = 1.0;
        v -= p.dot(&v) * p;
        for u in &basis {
            let c: f64 = u.dot(&v);
            v -= c * u;
        }
        let nv = v.norm();
        if nv > 1e-6 {
            basis.push(v / nv);
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    basis
}

/// Round sphere S^m(r) occupying a coordinate block, remaining coordinates
/// pinned to fixed values. Parameter domain: unit vectors in R^{m+1}.
///
/// Covers the Gaussian shrinker sphere (block = everything) and cylinder
/// slices S^k x {t0}.
#[derive(Debug, Clone)]
pub struct SphereChart {
    pub radius: f64,
    pub embed_dim: usize,
    /// Offset of the sphere block.
    pub offset: usize,
    /// Dimension m+1 of the sphere block.
    pub block: usize,
    /// Fixed values for coordinates outside the block.
    pub fixed: Vec<f64>,
    /// Normal direction: `None` means radial (outward), `Some(i)` means the
    /// fixed coordinate axis i (slice normal, e.g. a t direction).
    pub normal_axis: Option<usize>,
}

impl SphereChart {
    fn embed(&self, s: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.embed_dim);
        let mut fixed_it = self.fixed.iter();
        for i in 0..self.embed_dim {
            if i >= self.offset && i < self.offset + self.block {
                x[i] = s[i - self.offset];
            } else {
                x[i] = *fixed_it.next().expect("fixed coordinate list too short");
            }
        }
        x
    }

    fn embed_dir(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.embed_dim);
        for i in 0..self.block {
            x[self.offset + i] = v[i];
        }
        x
    }
}

impl Chart for SphereChart {
    fn surface_dim(&self) -> usize {
        self.block - 1
    }

    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn canonicalize(&self, q: &DVector<f64>) -> DVector<f64> {
        q / q.norm()
    }

    fn position(&self, q: &DVector<f64>) -> DVector<f64> {
        self.embed(&(self.radius * q / q.norm()))
    }

    fn derivs(&self, q: &DVector<f64>) -> ChartDerivs {
        let p = q / q.norm();
        let basis = unit_sphere_tangent_basis(&p);
        let m = basis.len();
        // X(p(s)) with p(s) = normalize(p + s v): X_a = r v_a,
        // X_ab = -r delta_ab p
        let position = self.embed(&(self.radius * &p));
        let jacobian: Vec<_> = basis.iter().map(|v| self.embed_dir(&(self.radius * v))).collect();
        let mut second = vec![vec![DVector::zeros(self.embed_dim); m]; m];
        for a in 0..m {
            second[a][a] = self.embed_dir(&(-self.radius * &p));
        }
        let (normal, normal_partials) = match self.normal_axis {
            None => {
                // radial: N = p extended by zeros; dN/da = v_a
                let n = self.embed_dir(&p);
                let parts = basis.iter().map(|v| self.embed_dir(v)).collect();
                (n, Some(parts))
            }
            Some(axis) => {
                let mut n = DVector::zeros(self.embed_dim);
                n[axis] = 1.0;
                let parts = vec![DVector::zeros(self.embed_dim); m];
                (n, Some(parts))
            }
        };
        ChartDerivs { position, jacobian, second, normal, normal_partials }
    }
}

/// Circle S^1(r) in a 2-dimensional coordinate block; parameter is the angle.
#[derive(Debug, Clone)]
pub struct CircleChart {
    pub radius: f64,
    pub embed_dim: usize,
    pub offset: usize,
    pub fixed: Vec<f64>,
}

impl CircleChart {
    fn embed(&self, c: [f64; 2]) -> DVector<f64> {
        let mut x = DVector::zeros(self.embed_dim);
        let mut fixed_it = self.fixed.iter();
        for i in 0..self.embed_dim {
            if i == self.offset {
                x[i] = c[0];
            } else if i == self.offset + 1 {
                x[i] = c[1];
            } else {
                x[i] = *fixed_it.next().expect("fixed coordinate list too short");
            }
        }
        x
    }
}

impl Chart for CircleChart {
    fn surface_dim(&self) -> usize {
        1
    }

    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn position(&self, q: &DVector<f64>) -> DVector<f64> {
        let t = q[0];
        self.embed([self.radius * t.cos(), self.radius * t.sin()])
    }

    fn derivs(&self, q: &DVector<f64>) -> ChartDerivs {
        let t = q[0];
        let (c, s) = (t.cos(), t.sin());
        let r = self.radius;
        let position = self.embed([r * c, r * s]);
        // arc-length direction
        let jacobian = vec![self.embed([-s, c])];
        let second = vec![vec![self.embed([-c / r, -s / r])]];
        // outward radial normal
        let normal = self.embed([c, s]);
        let normal_partials = Some(vec![self.embed([-s / r, c / r])]);
        ChartDerivs { position, jacobian, second, normal, normal_partials }
    }
}

/// Torus of revolution in a 3-coordinate block: (u, v) -> standard doughnut.
#[derive(Debug, Clone)]
pub struct TorusRevolutionChart {
    pub big_r: f64,
    pub small_r: f64,
    pub embed_dim: usize,
}

impl Chart for TorusRevolutionChart {
    fn surface_dim(&self) -> usize {
        2
    }

    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn position(&self, q: &DVector<f64>) -> DVector<f64> {
        let (u, v) = (q[0], q[1]);
        let w = self.big_r + self.small_r * v.cos();
        let mut x = DVector::zeros(self.embed_dim);
        x[0] = w * u.cos();
        x[1] = w * u.sin();
        x[2] = self.small_r * v.sin();
        x
    }

    fn derivs(&self, q: &DVector<f64>) -> ChartDerivs {
        let (u, v) = (q[0], q[1]);
        let (cu, su, cv, sv) = (u.cos(), u.sin(), v.cos(), v.sin());
        let (rr, r) = (self.big_r, self.small_r);
        let w = rr + r * cv;
        let d = self.embed_dim;
        let vec3 = |a: f64, b: f64, c: f64| {
            let mut x = DVector::zeros(d);
            x[0] = a;
            x[1] = b;
            x[2] = c;
            x
        };
        let position = vec3(w * cu, w * su, r * sv);
        let xu = vec3(-w * su, w * cu, 0.0);
        let xv = vec3(-r * sv * cu, -r * sv * su, r * cv);
        let xuu = vec3(-w * cu, -w * su, 0.0);
        let xuv = vec3(r * sv * su, -r * sv * cu, 0.0);
        let xvv = vec3(-r * cv * cu, -r * cv * su, -r * sv);
        // outward normal of the tube
        let normal = vec3(cv * cu, cv * su, sv);
        ChartDerivs {
            position,
            jacobian: vec![xu, xv],
            second: vec![vec![xuu, xuv.clone()], vec![xuv, xvv]],
            normal,
            normal_partials: None,
        }
    }
}

/// Flat torus with unwrapped 2D coordinates: an abstract flat reference
/// surface used for pure Hodge-theory runs with zero weight. Positions are
/// the parameter coordinates themselves; no ambient constraint applies.
#[derive(Debug, Clone)]
pub struct FlatTorusChart {
    pub len_u: f64,
    pub len_v: f64,
}

impl Chart for FlatTorusChart {
    fn surface_dim(&self) -> usize {
        2
    }

    fn embed_dim(&self) -> usize {
        2
    }

    fn position(&self, q: &DVector<f64>) -> DVector<f64> {
        q.clone()
    }

    fn derivs(&self, q: &DVector<f64>) -> ChartDerivs {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        let z = DVector::zeros(2);
        ChartDerivs {
            position: q.clone(),
            jacobian: vec![e1, e2],
            second: vec![vec![z.clone(), z.clone()], vec![z.clone(), z.clone()]],
            // abstract surface: no meaningful normal; use a zero placeholder
            normal: DVector::zeros(2),
            normal_partials: Some(vec![z.clone(), z]),
        }
    }
}

/// Finite-difference wrapper for user charts: central differences with a
/// fixed relative step on the bare position map. The normal is resolved by
/// projecting out the tangent plane within the ambient tangent space, so the
/// caller supplies the ambient projector and an orientation hint.
pub struct FdChart<F, P, O>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    P: Fn(&DVector<f64>) -> nalgebra::DMatrix<f64> + Send + Sync,
    O: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    pub map: F,
    pub tangent_projector: P,
    pub orientation_hint: O,
    pub surface_dim: usize,
    pub embed_dim: usize,
    pub step: f64,
}

impl<F, P, O> std::fmt::Debug for FdChart<F, P, O>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    P: Fn(&DVector<f64>) -> nalgebra::DMatrix<f64> + Send + Sync,
    O: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FdChart(m={}, d={})", self.surface_dim, self.embed_dim)
    }
}

impl<F, P, O> Chart for FdChart<F, P, O>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
    P: Fn(&DVector<f64>) -> nalgebra::DMatrix<f64> + Send + Sync,
    O: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    fn surface_dim(&self) -> usize {
        self.surface_dim
    }

    fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn position(&self, q: &DVector<f64>) -> DVector<f64> {
        (self.map)(q)
    }

    fn derivs(&self, q: &DVector<f64>) -> ChartDerivs {
        let m = self.surface_dim;
        let h = self.step * q.norm().max(1.0);
        let shift = |a: usize, s: f64| {
            let mut p = q.clone();
            p[a] += s;
            (self.map)(&p)
        };
        let position = (self.map)(q);
        let mut jacobian = Vec::with_capacity(m);
        for a in 0..m {
            jacobian.push((shift(a, h) - shift(a, -h)) / (2.0 * h));
        }
        let mut second = vec![vec![DVector::zeros(self.embed_dim); m]; m];
        for a in 0..m {
            second[a][a] = (shift(a, h) + shift(a, -h) - 2.0 * &position) / (h * h);
        }
        for a in 0..m {
            for b in (a + 1)..m {
                let pp = {
                    let mut p = q.clone();
                    p[a] += h;
                    p[b] += h;
                    (self.map)(&p)
                };
                let pm = {
                    let mut p = q.clone();
                    p[a] += h;
                    p[b] -= h;
                    (self.map)(&p)
                };
                let mp = {
                    let mut p = q.clone();
                    p[a] -= h;
                    p[b] += h;
                    (self.map)(&p)
                };
                let mm = {
                    let mut p = q.clone();
                    p[a] -= h;
                    p[b] -= h;
                    (self.map)(&p)
                };
                let mixed = (pp - pm - mp + mm) / (4.0 * h * h);
                second[a][b] = mixed.clone();
                second[b][a] = mixed;
            }
        }
        // normal: ambient-tangent, orthogonal to the chart jacobian
        let proj = (self.tangent_projector)(&position);
        let mut n = &proj * (self.orientation_hint)(&position);
        // orthogonalize against the (projected) tangent plane
        let mut frame: Vec<DVector<f64>> = Vec::new();
        for j in &jacobian {
            let mut v = &proj * j;
            for u in &frame {
                let c = u.dot(&v);
                v -= c * u;
            }
            let nv = v.norm();
            if nv > 1e-12 {
                frame.push(v / nv);
            }
        }
        for _ in 0..2 {
            for u in &frame {
                let c = u.dot(&n);
                n -= c * u;
            }
        }
        let nn = n.norm();
        if nn > 1e-12 {
            n /= nn;
        }
        ChartDerivs {
            position,
            jacobian,
            second,
            normal: n,
            normal_partials: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_chart_derivatives() {
        let ch = SphereChart {
            radius: 2.0f64.sqrt(),
            embed_dim: 3,
            offset: 0,
            block: 3,
            fixed: vec![],
            normal_axis: None,
        };
        let q = DVector::from_vec(vec![1.0, 1.0, -0.5]);
        let q = ch.canonicalize(&q);
        let d = ch.derivs(&q);
        assert!((d.position.norm() - 2.0f64.sqrt()).abs() < 1e-14);
        // jacobian orthogonal to position, norm r
        for j in &d.jacobian {
            assert!(j.dot(&d.position).abs() < 1e-12);
            assert!((j.norm() - 2.0f64.sqrt()).abs() < 1e-12);
        }
        // FD cross-check of the second derivatives along direction 0
        let basis = unit_sphere_tangent_basis(&q);
        let h = 1e-5;
        let pos = |s: f64| ch.position(&(&q + s * &basis[0]));
        let fd = (pos(h) + pos(-h) - 2.0 * &d.position) / (h * h);
        assert!((fd - &d.second[0][0]).norm() < 1e-5);
    }

    #[test]
    fn torus_chart_normal_is_unit_and_orthogonal() {
        let ch = TorusRevolutionChart { big_r: 2.0, small_r: 0.5, embed_dim: 3 };
        let q = DVector::from_vec(vec![0.7, 1.9]);
        let d = ch.derivs(&q);
        assert!((d.normal.norm() - 1.0).abs() < 1e-14);
        for j in &d.jacobian {
            assert!(d.normal.dot(j).abs() < 1e-12);
        }
    }
}
