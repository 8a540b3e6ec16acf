//! Numerical toolkit for Neumann eigenproblems on planar domains with an
//! exact point symmetry `x ↦ -x`.
//!
//! The pipeline: describe a domain ([`geometry::DomainSpec`]), triangulate it
//! so the symmetry acts exactly on vertices ([`mesh`]), assemble P1 stiffness
//! and mass matrices ([`fem`]), solve the generalized eigenproblem
//! ([`eigensolve`]), classify eigenfunctions by parity ([`symmetry`]) and
//! count their nodal domains ([`nodal`]). Closed-form spectra for disks and
//! rectangles live in [`oracles`]; [`experiments`] wires everything into the
//! reproducible studies exposed by the CLI.

pub mod eigensolve;
pub mod experiments;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod nodal;
pub mod oracles;
pub mod symmetry;
