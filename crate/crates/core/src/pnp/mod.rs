//! Pose estimation from 2D-3D correspondences.
pub struct PnpConfig;
pub struct PosePosteriorSamples;
