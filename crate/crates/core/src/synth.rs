//! Synthetic scene generation.
pub struct SceneConfig;
pub struct SyntheticScene;
