//! Kernelized movement primitives (KMP) with a soft null-space projector.
//!
//! A [`KmpModel`] is fitted to a reference trajectory distribution, usually
//! obtained from demonstrations with [`refdist::em_fit`] and
//! [`refdist::build_reference`]. Secondary targets modulate its predictions
//! through [`ns_predict`] without refactorizing the kernel system. ProMP
//! ([`promp`]) and GMM mean optimization serve as baselines in the
//! obstacle-avoidance replanning harness ([`planner`]).

pub mod error;
pub mod kernel;
pub mod kmp;
pub mod linalg;
pub mod model_io;
pub mod nskmp;
pub mod planner;
pub mod primal;
pub mod promp;
pub mod refdist;
pub mod timing;

pub use error::{Error, Result};
pub use kernel::{cross_vector, gram_matrix, kernel_eval, Kernel, KernelConfig};
pub use kmp::{KmpModel, ViaPoint};
pub use linalg::{Matrix, Vector};
pub use nskmp::{equivalent_via_point, ns_predict, Modulation, NullSpaceReference, QueryGrid};
pub use promp::PrompModel;
pub use refdist::{Demonstration, GaussianMixture, ReferenceTrajectoryDistribution};
