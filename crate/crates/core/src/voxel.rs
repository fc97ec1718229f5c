//! Sparse voxelization and trilinear feature gathering.
pub struct SparseVoxelGrid;
