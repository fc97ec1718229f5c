//! Cross-modal similarity and correspondence establishment.
pub struct CorrespondenceSet;
pub struct IntersectionScores;
