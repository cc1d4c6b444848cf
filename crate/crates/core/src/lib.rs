//! Numerical laboratory for weighted spectral geometry of f-minimal
//! hypersurfaces.
//!
//! The crate constructs weighted ambient manifolds embedded in Euclidean
//! space, builds closed f-minimal hypersurfaces inside them, assembles the
//! weighted Jacobi operator and the weighted Hodge Laplacian on 1-forms,
//! counts instability directions (the f-index), extracts f-harmonic 1-form
//! bases (the first Betti number), and certifies the wedge test-function
//! machinery and curvature-gap inequalities that tie the two together.

pub mod ambient;
pub mod discretize;
pub mod error;
pub mod immersion;
pub mod linalg;
pub mod quat;
pub mod scene;
pub mod spectral;
pub mod theorem;

pub use error::{Error, Result};
