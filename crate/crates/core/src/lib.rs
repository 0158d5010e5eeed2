//! Colocated finite-volume discretization of the 2D incompressible Navier-Stokes equations on
//! acute triangular meshes: piecewise-constant velocity and pressure, a BDF2 projection scheme,
//! and a verification harness for the discrete operator identities and stability bounds.

pub mod analytic;
pub mod fields;
pub mod mesh;
pub mod operators;
pub mod scheme;
pub mod solver;
pub mod sparse;
pub mod verify;
