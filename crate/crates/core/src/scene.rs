//! Batch scene runner: JSON configurations in, machine-readable reports and
//! CSV tables out.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ambient::{
    make_gaussian_euclidean, make_projective_cylinder, make_sphere_cylinder, AmbientSpace,
    Family, SolitonReport,
};
use crate::discretize::{
    assemble, assemble_hodge1, circle_fem, icosphere_mesh, load_off, save_csv, torus_grid_mesh,
    SurfaceMesh,
};
use crate::error::{Error, Result};
use crate::immersion::{charts::FlatTorusChart, Immersion, ImmersionKind};
use crate::spectral::{
    check_constant_potential, compose_product, count_below, eigensolve, eigensolve_pair, f_index,
    harmonic_basis, SpectralResult,
};
use crate::theorem::{
    complement_frame, cross_identity_check, cylinder_gap, euclid_decomposition, gap_value,
    hypothesis_check, index_lower_bound, mesh_quadrature, product_quadrature,
    CrossIdentityReport, GapReport, IndexBound, Verdict,
};

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AmbientConfig {
    Gaussian { dim: usize, lambda: f64 },
    SphereCylinder { k: usize, j: usize, lambda: f64 },
    CpnCylinder { n: usize, j: usize },
    HppCylinder { p: usize, j: usize },
}

impl AmbientConfig {
    pub fn build(&self) -> Result<AmbientSpace> {
        match *self {
            AmbientConfig::Gaussian { dim, lambda } => make_gaussian_euclidean(dim, lambda),
            AmbientConfig::SphereCylinder { k, j, lambda } => make_sphere_cylinder(k, j, lambda),
            AmbientConfig::CpnCylinder { n, j } => {
                make_projective_cylinder(Family::Complex, n, j)
            }
            AmbientConfig::HppCylinder { p, j } => {
                make_projective_cylinder(Family::Quaternionic, p, j)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ImmersionConfig {
    ShrinkerSphere,
    SliceSphere,
    ProductS2xs1,
    TorusRevolution { big_r: f64, small_r: f64 },
    FlatTorus { len_u: f64, len_v: f64 },
    /// Mesh-only immersion for OFF inputs; the ambient supplies the weight.
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshConfig {
    Icosphere { subdivisions: usize },
    Grid { nu: usize, nv: usize },
    /// Tensor product of an icosphere quadrature and a uniform circle grid;
    /// spectra are composed rather than meshed.
    Composed { subdivisions: usize, circle_nodes: usize },
    Off { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Eigenpairs requested from the Jacobi solve (per factor for composed
    /// scenes).
    pub eigen_count: usize,
    pub seed: u64,
    /// Random unit-norm combinations sampled by the hypothesis check.
    pub combinations: usize,
    /// Icosphere subdivision level used for the 1-form solve; defaults to
    /// the scene mesh capped at 3 (the Betti number is resolution-stable).
    pub hodge_subdivisions: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { eigen_count: 16, seed: 42, combinations: 64, hodge_subdivisions: None }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Expectations {
    pub ind_f: Option<usize>,
    pub b1: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub index: bool,
    pub betti: bool,
    /// Threshold eta of the spectral-count hypothesis; None skips the check.
    pub hypothesis: Option<f64>,
    /// Ambient oracle self-test (and embedding identities when projective).
    pub identities: bool,
    /// Closed-form vs definitional curvature-gap consistency (cylinders).
    pub gap: bool,
    pub bound: bool,
    pub expect: Expectations,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Write the computed spectrum as one value per line.
    pub spectrum_csv: Option<String>,
    /// Write the harmonic basis forms (edge values, one form per column).
    pub forms_csv: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub name: String,
    pub ambient: AmbientConfig,
    pub immersion: ImmersionConfig,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<SceneConfig> {
        Ok(serde_json::from_str(text)?)
    }
}

// ---------------------------------------------------------------------------
// Report schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct GapConsistency {
    pub k: usize,
    pub samples: usize,
    pub max_deviation: f64,
    /// Strict negativity of the closed form on sampled nonzero X (k >= 3).
    pub all_negative: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityArtifacts {
    pub ambient_key: String,
    pub soliton: SolitonReport,
    pub cross: Option<CrossIdentityReport>,
    pub passed: bool,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ResidualSummary {
    pub f_minimality: Option<f64>,
    pub eigen_max: Option<f64>,
    /// Per harmonic form: (||d omega||, ||delta_f omega||) relative norms.
    pub harmonic_forms: Vec<(f64, f64)>,
    pub hodge_gap_ratio: Option<f64>,
    pub hodge_ambiguous: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundComparison {
    /// Dimension of the Euclidean container used for the bound.
    pub container_dim: usize,
    pub bound: IndexBound,
    /// For complex projective cylinders the conventional container dimension
    /// differs from the embedding's; both bounds are reported.
    pub stated_dim: Option<usize>,
    pub stated_bound: Option<IndexBound>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub threads: usize,
    pub config: SceneConfig,
    pub spectrum: Option<Vec<f64>>,
    pub spectrum_complete: Option<bool>,
    pub ind_f: Option<usize>,
    pub b1: Option<usize>,
    pub bound: Option<BoundComparison>,
    pub hypothesis: Option<GapReport>,
    /// Theorem conclusion when the hypothesis passes: eigenvalues below eta
    /// vs ceil(2 b1 / (d (d-1))).
    pub conclusion_count: Option<usize>,
    pub conclusion_holds: Option<bool>,
    pub identities: Option<IdentityArtifacts>,
    pub gap_consistency: Option<GapConsistency>,
    pub residuals: ResidualSummary,
    pub failures: Vec<String>,
    pub passed: bool,
    pub timings_ms: BTreeMap<String, f64>,
}

// ---------------------------------------------------------------------------
// Built-in scene registry
// ---------------------------------------------------------------------------

pub const SCENE_REGISTRY: &[(&str, &str)] = &[
    ("shrinker-sphere", "round sphere in the Gaussian shrinker, full index run"),
    ("slice-sphere", "totally geodesic slice of the round cylinder"),
    ("product-s2xs1", "sphere x circle hypersurface with composed spectra"),
    ("torus-hodge", "weighted Hodge run on a torus of revolution"),
];

pub fn builtin_scene_json(name: &str) -> Option<&'static str> {
    match name {
        "shrinker-sphere" => Some(include_str!("../../../scenes/shrinker-sphere.json")),
        "slice-sphere" => Some(include_str!("../../../scenes/slice-sphere.json")),
        "product-s2xs1" => Some(include_str!("../../../scenes/product-s2xs1.json")),
        "torus-hodge" => Some(include_str!("../../../scenes/torus-hodge.json")),
        _ => None,
    }
}

/// Effective thread cap from the FSPECTRA_THREADS environment variable.
/// All solvers here are single-threaded, so any positive cap is honored.
pub fn thread_cap() -> Result<usize> {
    match std::env::var("FSPECTRA_THREADS") {
        Ok(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| Error::Config(format!("FSPECTRA_THREADS is not a number: {v}")))?;
            if n == 0 {
                return Err(Error::Config("FSPECTRA_THREADS must be positive".into()));
            }
            Ok(n.min(1))
        }
        Err(_) => Ok(1),
    }
}

// ---------------------------------------------------------------------------
// Scene execution
// ---------------------------------------------------------------------------

struct Timer {
    timings: BTreeMap<String, f64>,
}

impl Timer {
    fn new() -> Self {
        Timer { timings: BTreeMap::new() }
    }
    fn record<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f();
        self.timings.insert(name.to_string(), t.elapsed().as_secs_f64() * 1e3);
        out
    }
}

fn build_immersion(cfg: &SceneConfig, ambient: Arc<AmbientSpace>) -> Result<Immersion> {
    match &cfg.immersion {
        ImmersionConfig::ShrinkerSphere => Immersion::shrinker_sphere(ambient),
        ImmersionConfig::SliceSphere => Immersion::slice_sphere(ambient),
        ImmersionConfig::ProductS2xs1 => Immersion::product_s2xs1(ambient),
        ImmersionConfig::TorusRevolution { big_r, small_r } => {
            Immersion::torus_revolution(ambient, *big_r, *small_r)
        }
        ImmersionConfig::FlatTorus { len_u, len_v } => Ok(Immersion::flat_torus(*len_u, *len_v)),
        ImmersionConfig::Custom => Ok(Immersion {
            ambient,
            chart: Arc::new(FlatTorusChart { len_u: 1.0, len_v: 1.0 }),
            kind: ImmersionKind::Custom,
            zero_weight: false,
            abstract_surface: true,
            flip_normal: false,
        }),
    }
}

fn build_mesh(cfg: &SceneConfig, imm: &Immersion) -> Result<Option<SurfaceMesh>> {
    match &cfg.mesh {
        MeshConfig::Icosphere { subdivisions } => Ok(Some(icosphere_mesh(imm, *subdivisions)?)),
        MeshConfig::Grid { nu, nv } => Ok(Some(torus_grid_mesh(imm, *nu, *nv)?)),
        MeshConfig::Off { path } => Ok(Some(load_off(Path::new(path))?)),
        MeshConfig::Composed { .. } => Ok(None),
    }
}

/// Plain (unit-weight) Laplace spectrum of the sphere factor, via the slice
/// hypersurface of the matching cylinder (its induced weight is 1).
fn sphere_factor_spectrum(lambda: f64, subdivisions: usize, count: usize) -> Result<SpectralResult> {
    let amb = Arc::new(make_sphere_cylinder(2, 1, lambda)?);
    let imm = Immersion::slice_sphere(amb)?;
    let mesh = icosphere_mesh(&imm, subdivisions)?;
    let asm = assemble(&mesh, &imm)?;
    eigensolve_pair(&asm.s_f, &asm.m_f, count, -1.0)
}

fn circle_factor_spectrum(radius: f64, weight: f64, nodes: usize, count: usize) -> Result<SpectralResult> {
    let (m, s) = circle_fem(nodes, radius, weight);
    eigensolve_pair(&s, &m, count.min(nodes), -1.0)
}

pub fn run_scene(cfg: &SceneConfig) -> Result<RunReport> {
    let threads = thread_cap()?;
    let mut timer = Timer::new();
    let mut failures: Vec<String> = Vec::new();

    let ambient = Arc::new(cfg.ambient.build()?);
    let imm = build_immersion(cfg, ambient.clone())?;
    let mesh = timer.record("mesh", || build_mesh(cfg, &imm))?;

    let mut residuals = ResidualSummary::default();
    if !imm.abstract_surface && !matches!(imm.kind, ImmersionKind::TorusRevolution { .. }) {
        let r = imm.f_minimality_residual(64, cfg.solver.seed)?;
        residuals.f_minimality = Some(r);
        if r > 1e-8 {
            failures.push(format!("f-minimality residual {r:e} above 1e-8"));
        }
    }

    // ---- spectrum and index ------------------------------------------------
    let mut spectrum: Option<Vec<f64>> = None;
    let mut spectrum_complete = None;
    let mut ind_f: Option<usize> = None;
    let mut b1: Option<usize> = None;
    let mut composed_spec: Option<SpectralResult> = None;

    if cfg.checks.index {
        let spec = match (&cfg.mesh, mesh.as_ref()) {
            (MeshConfig::Composed { subdivisions, circle_nodes }, _) => {
                let potential = check_constant_potential(&imm, 64, cfg.solver.seed)?;
                let circle_radius = match imm.kind {
                    ImmersionKind::ProductSphereCircle { circle_radius, .. } => circle_radius,
                    _ => {
                        return Err(Error::CompositionNotApplicable(
                            "composed meshes require the product immersion".into(),
                        ))
                    }
                };
                let count = cfg.solver.eigen_count;
                let sphere = timer.record("sphere-factor", || {
                    sphere_factor_spectrum(ambient.lambda, *subdivisions, count)
                })?;
                let circle_weight = (-ambient.lambda * circle_radius * circle_radius / 2.0).exp();
                let circle = timer.record("circle-factor", || {
                    circle_factor_spectrum(circle_radius, circle_weight, *circle_nodes, count)
                })?;
                let (spec, b1_sum) =
                    compose_product(&[sphere, circle], &[0, 1], potential)?;
                b1 = Some(b1_sum);
                spec
            }
            (_, Some(mesh)) => timer.record("index", || {
                let asm = assemble(mesh, &imm)?;
                eigensolve(&asm, cfg.solver.eigen_count)
            })?,
            (_, None) => unreachable!("non-composed meshes are always built"),
        };
        residuals.eigen_max = Some(spec.max_residual);
        ind_f = Some(f_index(&spec)?);
        spectrum = Some(spec.eigenvalues.clone());
        spectrum_complete = Some(spec.complete);
        composed_spec = Some(spec);
    }

    // ---- first Betti number -------------------------------------------------
    let mut basis_sharp: Option<Vec<Vec<nalgebra::DVector<f64>>>> = None;
    let mut basis_forms: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut hodge_mesh: Option<SurfaceMesh> = None;
    if cfg.checks.betti {
        match (&cfg.mesh, mesh.as_ref()) {
            (MeshConfig::Composed { .. }, _) => {
                // b1 of a product is the sum over factors (sphere 0, circle 1)
                b1 = Some(b1.unwrap_or(1));
            }
            (MeshConfig::Icosphere { subdivisions }, _) => {
                // 1-form solves are denser; run them at a capped resolution
                let level = cfg.solver.hodge_subdivisions.unwrap_or((*subdivisions).min(3));
                let hmesh = icosphere_mesh(&imm, level)?;
                let basis = timer.record("betti", || {
                    let hodge = assemble_hodge1(&hmesh, &imm)?;
                    harmonic_basis(&hmesh, &hodge)
                })?;
                b1 = Some(basis.b1);
                residuals.harmonic_forms = basis.residuals.clone();
                residuals.hodge_gap_ratio = Some(basis.gap_ratio);
                residuals.hodge_ambiguous = Some(basis.ambiguous);
                basis_sharp = Some(basis.sharp);
                basis_forms = basis.forms;
                hodge_mesh = Some(hmesh);
            }
            (_, Some(mesh)) => {
                let basis = timer.record("betti", || {
                    let hodge = assemble_hodge1(mesh, &imm)?;
                    harmonic_basis(mesh, &hodge)
                })?;
                b1 = Some(basis.b1);
                residuals.harmonic_forms = basis.residuals.clone();
                residuals.hodge_gap_ratio = Some(basis.gap_ratio);
                residuals.hodge_ambiguous = Some(basis.ambiguous);
                basis_sharp = Some(basis.sharp);
                basis_forms = basis.forms;
            }
            (_, None) => {}
        }
        if residuals.hodge_ambiguous == Some(true) {
            failures.push("harmonic kernel split is ambiguous".into());
        }
    }

    // ---- hypothesis and conclusion ------------------------------------------
    let mut hypothesis: Option<GapReport> = None;
    let mut conclusion_count = None;
    let mut conclusion_holds = None;
    if let Some(eta) = cfg.checks.hypothesis {
        let quad = match &cfg.mesh {
            MeshConfig::Composed { subdivisions, circle_nodes } => {
                product_quadrature(&imm, *subdivisions, *circle_nodes)?
            }
            _ => {
                let m = hodge_mesh.as_ref().or(mesh.as_ref()).ok_or_else(|| {
                    Error::Config("the hypothesis check needs a mesh".into())
                })?;
                let sharp = basis_sharp.clone().unwrap_or_default();
                mesh_quadrature(m, &imm, &sharp)?
            }
        };
        let report = timer.record("hypothesis", || {
            hypothesis_check(&quad, eta, cfg.solver.combinations, cfg.solver.seed)
        })?;
        match report.verdict {
            Verdict::Pass | Verdict::Vacuous => {}
            Verdict::Fail => failures.push("hypothesis inequality failed".into()),
            Verdict::Inconclusive => {
                failures.push("hypothesis inequality is inconclusive at this resolution".into())
            }
        }
        // Theorem conclusion: eigenvalue count below eta vs the Betti bound
        if report.verdict == Verdict::Pass {
            if let (Some(spec), Some(q)) = (&composed_spec, b1) {
                let d = ambient.embed_dim_d;
                let needed = index_lower_bound(d, q)?.ceiling as usize;
                let count = count_below(spec, eta)?;
                conclusion_count = Some(count.count);
                conclusion_holds = Some(count.count >= needed);
                if count.count < needed {
                    failures.push(format!(
                        "spectral count {} below the required {needed}",
                        count.count
                    ));
                }
            }
        }
        hypothesis = Some(report);
    }

    // ---- identities -----------------------------------------------------------
    let identities = if cfg.checks.identities {
        let art = timer.record("identities", || {
            run_identities(&ambient, &cfg.name, 50, cfg.solver.seed)
        })?;
        if !art.passed {
            failures.extend(art.failures.iter().cloned());
        }
        Some(art)
    } else {
        None
    };

    // ---- curvature-gap consistency ---------------------------------------------
    let gap_consistency = if cfg.checks.gap {
        match &ambient.kind {
            crate::ambient::AmbientKind::SphereCylinder { k, .. } => {
                let k = *k;
                let report = timer.record("gap", || {
                    gap_consistency_check(&ambient, k, 100, cfg.solver.seed)
                })?;
                if report.max_deviation > 1e-8 {
                    failures.push(format!(
                        "curvature-gap deviation {:e} above 1e-8",
                        report.max_deviation
                    ));
                }
                if report.all_negative == Some(false) {
                    failures.push("curvature gap not strictly negative".into());
                }
                Some(report)
            }
            _ => {
                return Err(Error::Config(
                    "the gap consistency check needs a sphere-cylinder ambient".into(),
                ))
            }
        }
    } else {
        None
    };

    // ---- bound ---------------------------------------------------------------
    let bound = if cfg.checks.bound {
        let (ind, q) = match (ind_f, b1) {
            (Some(i), Some(q)) => (i, q),
            _ => {
                return Err(Error::Config(
                    "the bound check needs both the index and betti checks".into(),
                ))
            }
        };
        let d = ambient.embed_dim_d;
        let bound = index_lower_bound(d, q)?;
        let stated_dim = (ambient.stated_embed_dim() != d).then(|| ambient.stated_embed_dim());
        let stated_bound = match stated_dim {
            Some(sd) => Some(index_lower_bound(sd, q)?),
            None => None,
        };
        let satisfied = ind as i64 >= bound.ceiling;
        if !satisfied {
            failures.push(format!("index {ind} below the bound {}", bound.ceiling));
        }
        Some(BoundComparison { container_dim: d, bound, stated_dim, stated_bound, satisfied })
    } else {
        None
    };

    // ---- expectations ----------------------------------------------------------
    if let Some(expect) = cfg.checks.expect.ind_f {
        if ind_f != Some(expect) {
            failures.push(format!("expected ind_f = {expect}, got {ind_f:?}"));
        }
    }
    if let Some(expect) = cfg.checks.expect.b1 {
        if b1 != Some(expect) {
            failures.push(format!("expected b1 = {expect}, got {b1:?}"));
        }
    }

    // ---- artifacts ---------------------------------------------------------------
    if let (Some(path), Some(vals)) = (&cfg.outputs.spectrum_csv, &spectrum) {
        save_csv(vals, Path::new(path))?;
    }
    if let Some(path) = &cfg.outputs.forms_csv {
        let flat: Vec<f64> =
            basis_forms.iter().flat_map(|f| f.iter().copied()).collect();
        save_csv(&flat, Path::new(path))?;
    }

    let passed = failures.is_empty();
    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        config: cfg.clone(),
        spectrum,
        spectrum_complete,
        ind_f,
        b1,
        bound,
        hypothesis,
        conclusion_count,
        conclusion_holds,
        identities,
        gap_consistency,
        residuals,
        failures,
        passed,
        timings_ms: timer.timings,
    })
}

/// Definitional vs closed-form curvature gap at random configurations.
pub fn gap_consistency_check(
    ambient: &AmbientSpace,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<GapConsistency> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0f64;
    let mut all_negative = true;
    for _ in 0..samples {
        let p = ambient.random_point(&mut rng);
        let n = ambient.random_tangent(&mut rng, &p);
        let mut x = ambient.random_tangent(&mut rng, &p);
        x -= x.dot(&n) * &n;
        let frame = complement_frame(ambient, &p, &n);
        let direct = gap_value(ambient, &p, &frame, &n, &x);
        let closed = cylinder_gap(k, ambient.lambda, &euclid_decomposition(ambient, &x, &n))?;
        max_dev = max_dev.max((direct - closed).abs());
        if x.norm() > 1e-6 && closed >= 0.0 {
            all_negative = false;
        }
    }
    Ok(GapConsistency {
        k,
        samples,
        max_deviation: max_dev,
        all_negative: (k >= 3).then_some(all_negative),
    })
}

// ---------------------------------------------------------------------------
// Identities front end
// ---------------------------------------------------------------------------

/// Parse an ambient key such as "gaussian:3", "sphere-cylinder:k=2,j=1",
/// "cpn-cylinder:n=1" or "hpp-cylinder:p=1,j=2".
pub fn parse_ambient_key(key: &str) -> Result<AmbientSpace> {
    let (head, tail) = match key.split_once(':') {
        Some((h, t)) => (h, t),
        None => (key, ""),
    };
    let mut params: BTreeMap<&str, f64> = BTreeMap::new();
    if !tail.is_empty() {
        for part in tail.split(',') {
            match part.split_once('=') {
                Some((name, value)) => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| Error::UnknownKey(format!("bad parameter in '{key}'")))?;
                    params.insert(name, v);
                }
                None => {
                    // bare number: dimension shorthand
                    let v: f64 = part
                        .parse()
                        .map_err(|_| Error::UnknownKey(format!("bad parameter in '{key}'")))?;
                    params.insert("", v);
                }
            }
        }
    }
    let get = |name: &str, default: Option<f64>| -> Result<f64> {
        params
            .get(name)
            .copied()
            .or(default)
            .ok_or_else(|| Error::UnknownKey(format!("'{key}' is missing parameter '{name}'")))
    };
    match head {
        "gaussian" => {
            let n = get("", None).or_else(|_| get("n", None))? as usize;
            make_gaussian_euclidean(n, get("lambda", Some(1.0))?)
        }
        "sphere-cylinder" => {
            let k = get("k", None)? as usize;
            let j = get("j", Some(1.0))? as usize;
            make_sphere_cylinder(k, j, get("lambda", Some(1.0))?)
        }
        "cpn-cylinder" => {
            let n = get("n", None).or_else(|_| get("", None))? as usize;
            make_projective_cylinder(Family::Complex, n, get("j", Some(1.0))? as usize)
        }
        "hpp-cylinder" => {
            let p = get("p", None).or_else(|_| get("", None))? as usize;
            make_projective_cylinder(Family::Quaternionic, p, get("j", Some(1.0))? as usize)
        }
        other => Err(Error::UnknownKey(format!("unknown ambient kind '{other}'"))),
    }
}

/// Ambient oracle self-test plus, for projective cylinders, the embedding
/// curvature identities.
pub fn run_identities(
    ambient: &AmbientSpace,
    key: &str,
    samples: usize,
    seed: u64,
) -> Result<IdentityArtifacts> {
    let soliton = ambient.ambient_report(samples, seed);
    let fd_based = matches!(ambient.kind, crate::ambient::AmbientKind::ProjectiveCylinder { .. });
    let soliton_tol = if fd_based { 1e-5 } else { 1e-10 };
    let mut failures = Vec::new();
    if soliton.max_soliton_residual > soliton_tol {
        failures.push(format!(
            "soliton identity residual {:e} above {soliton_tol:e}",
            soliton.max_soliton_residual
        ));
    }
    if soliton.max_constraint_residual > 1e-10 {
        failures.push(format!(
            "sampled points leave the manifold by {:e}",
            soliton.max_constraint_residual
        ));
    }
    let cross = if fd_based {
        let report = cross_identity_check(ambient, samples, seed)?;
        if report.res_ii_diag > 1e-5 {
            failures.push(format!("|II(X,X)|^2 identity residual {:e}", report.res_ii_diag));
        }
        for (name, v) in [
            ("polarized", report.res_ii_polar),
            ("mixed-norm", report.res_ii_mixed),
            ("frame-sum", report.res_frame_sum),
        ] {
            if v > 1e-4 {
                failures.push(format!("{name} identity residual {v:e}"));
            }
        }
        if report.einstein_residual > 1e-4 {
            failures.push(format!("Einstein constant residual {:e}", report.einstein_residual));
        }
        if report.sectional_min < 1.0 - 1e-3 || report.sectional_max > 4.0 + 1e-3 {
            failures.push(format!(
                "sectional range [{}, {}] outside [1, 4]",
                report.sectional_min, report.sectional_max
            ));
        }
        Some(report)
    } else {
        None
    };
    Ok(IdentityArtifacts {
        ambient_key: key.to_string(),
        soliton,
        cross,
        passed: failures.is_empty(),
        failures,
    })
}

pub fn identities_by_key(key: &str, samples: usize, seed: u64) -> Result<IdentityArtifacts> {
    let ambient = parse_ambient_key(key)?;
    run_identities(&ambient, key, samples, seed)
}
