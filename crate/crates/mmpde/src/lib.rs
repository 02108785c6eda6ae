//! Unifying moving-mesh method for m-simplicial meshes embedded in R^d
//! (curves, surfaces, and bulk domains), driven by equidistribution and
//! alignment energy minimization under a Riemannian metric tensor.

/// Invoke a function generic over `<const M, const D>` for the supported
/// runtime (m, d) pairs.
macro_rules! dispatch_md {
    ($m:expr, $d:expr, $func:ident ( $($args:expr),* $(,)? )) => {
        match ($m, $d) {
            (1, 1) => $func::<1, 1>($($args),*),
            (1, 2) => $func::<1, 2>($($args),*),
            (1, 3) => $func::<1, 3>($($args),*),
            (2, 2) => $func::<2, 2>($($args),*),
            (2, 3) => $func::<2, 3>($($args),*),
            (3, 3) => $func::<3, 3>($($args),*),
            (m, d) => return Err($crate::error::Error::UnsupportedDims { m, d }),
        }
    };
}

pub mod config;
pub mod diffgeo;
pub mod energy;
pub mod error;
pub mod flow;
pub mod io;
pub mod mesh;
pub mod metric;
pub mod quality;
pub mod rng;
pub mod shapes;
pub mod simplex;
pub mod smallmat;

pub use error::{Error, Result};
pub use mesh::SimplicialMesh;
