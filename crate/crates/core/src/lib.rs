//! Mixed finite elements for the steady linearized R13 equations in 2D.
//!
//! The unknowns are heat flux `s`, temperature `theta`, deviatoric stress
//! `sigma`, velocity `u` and pressure `p`, discretized with Lagrange P1/P2
//! elements on triangles and stabilized by continuous interior penalty terms.

pub mod cases;
pub mod config;
pub mod driver;
pub mod exprlang;
pub mod fespace;
pub mod forms;
pub mod mesh;
pub mod postproc;
pub mod system;
pub mod tensorops;
