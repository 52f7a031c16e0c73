//! Fixtures shared by the criterion benches.

use nskmp::linalg::linspace;
use nskmp::timing::synthetic_reference;
use nskmp::{KernelConfig, KmpModel, Matrix, NullSpaceReference, Vector, ViaPoint};

/// Reference lengths the benches sweep.
pub const SIZES: [usize; 4] = [50, 100, 200, 400];

/// Model over a smooth 2D reference of `n` points, with the usual hyperparameters.
pub fn model(n: usize) -> KmpModel {
    let reference = synthetic_reference(n, 2).expect("valid sweep size");
    KmpModel::fit(reference, 0.1, KernelConfig::new(0.125, 2).expect("valid kernel")).expect("fit succeeds")
}

/// `count` query inputs over `[0, 1]`.
pub fn queries(count: usize) -> Vec<Vector> {
    linspace(0.0, 1.0, count)
        .into_iter()
        .map(|t| Vector::from_element(1, t))
        .collect()
}

pub fn target() -> NullSpaceReference {
    NullSpaceReference::new(Vector::from_element(1, 0.43), Vector::from_vec(vec![400.0, -250.0]))
}

pub fn via_point() -> ViaPoint {
    let t = target();
    ViaPoint::new(t.input, t.target * 1e-3, Matrix::identity(2, 2) * 1e-6).expect("valid via-point")
}
