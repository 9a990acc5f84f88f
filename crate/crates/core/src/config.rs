//! Numerical tolerances used across the crate.

/// Every tolerance the crate relies on, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entrywise bound on `U U^† - I` for a matrix to count as unitary.
    pub unitarity: f64,
    /// Bound on `|det U - 1|` for special-unitary checks.
    pub determinant: f64,
    /// Round-trip and exact-identity reconstruction checks.
    pub reconstruction: f64,
    /// Inputs with a larger unitarity residual are rejected outright.
    pub input_residual: f64,
    /// Distance below which a square-root argument counts as `-I`.
    pub sqrt_branch: f64,
    /// Plan reassembly bound for controlled-gate decompositions.
    pub reassembly: f64,
    /// Smallest accepted search accuracy.
    pub epsilon_floor: f64,
    /// Commutator norm below which two letters commute.
    pub commutator: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    unitarity: 1e-10,
    determinant: 1e-10,
    reconstruction: 1e-12,
    input_residual: 1e-8,
    sqrt_branch: 1e-12,
    reassembly: 1e-9,
    epsilon_floor: 1e-9,
    commutator: 1e-12,
};
