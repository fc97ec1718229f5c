//! Matching and pose losses.
