//! Rays in `(C²)^{⊗(N−1)}`: product rays `Ψ` built from qubit bases and the
//! entangled rays `F_π` given by the coefficient table `A_π(ξ)`.

pub mod bases;
pub mod coefficients;
pub mod system;

pub use bases::{build_u, BasisFile, QubitBasisFamily, Qubit, UMatrix};
pub use coefficients::{
    base_coefficient, base_coefficient_with, check_unitarity, coefficient, sign_coefficient,
    verify_reduced_system, CoefficientTable, Numbering,
};
pub use system::{product_state, DenseRay, FactoredRay, RaySystem, DENSE_MAX_POINTS};
