//! Core library for image-to-point-cloud registration.
//!
//! The crate estimates the rigid transform aligning a LiDAR point cloud's
//! projection with a camera image. It provides:
//!
//! - [`geometry`]: SE(3) poses, pinhole projection, and registration metrics.
//! - [`voxel`]: sparse voxelization and trilinear feature gathering.
//! - [`matching`]: cross-modal similarity, intersection masking, and
//!   2D-to-3D correspondence establishment.
//! - [`loss`]: the adaptive-weighted matching loss and the explicit pose
//!   loss, with analytic gradients.
//! - [`pnp`]: EPnP, RANSAC, Gauss-Newton refinement, and the Monte-Carlo
//!   pose posterior with its KL objective.
//! - [`synth`]: deterministic synthetic scenes with ground-truth poses,
//!   correspondences, and features for end-to-end validation.
//! - [`io`]: the file formats shared with external tooling.

pub mod geometry;
pub mod io;
pub mod loss;
pub mod matching;
pub mod pnp;
pub mod synth;
pub mod voxel;

pub use geometry::{CameraIntrinsics, PointCloud, Pose, RegistrationError};
pub use matching::{CorrespondenceSet, IntersectionScores};
pub use pnp::{PnpConfig, PosePosteriorSamples};
pub use synth::{SceneConfig, SyntheticScene};
pub use voxel::SparseVoxelGrid;
