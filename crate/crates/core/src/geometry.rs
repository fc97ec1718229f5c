//! SE(3) poses, pinhole projection, and registration error metrics.
//!
//! Everything here is a pure function over immutable values; all types are
//! `Copy` or cheaply cloneable and safe to share across threads.

use nalgebra::{Matrix3, UnitQuaternion, Vector2, Vector3, Vector6};
use thiserror::Error;

/// Depth below which a point is considered behind (or on) the camera plane
/// and its projection invalid.
pub const MIN_DEPTH: f64 = 1e-6;

/// Tolerance for the rotation-matrix invariants (orthonormality, det = +1).
pub const ROTATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("rotation matrix is not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },
    #[error("rotation matrix determinant is {det:.12}, expected +1")]
    ImproperRotation { det: f64 },
    #[error("focal lengths must be positive, got fx={fx}, fy={fy}")]
    InvalidFocal { fx: f64, fy: f64 },
    #[error("principal point ({cx}, {cy}) lies outside the {width}x{height} image")]
    InvalidPrincipalPoint {
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
    },
    #[error("image extent must be positive, got {width}x{height}")]
    InvalidImageExtent { width: u32, height: u32 },
    #[error("point cloud must contain at least one point")]
    EmptyCloud,
    #[error("non-finite coordinate at point index {index}")]
    NonFinitePoint { index: usize },
    #[error("non-finite pose increment")]
    NonFiniteDelta,
    #[error("registration error list is empty")]
    NoErrors,
    #[error("invalid registration error: rte={rte}, rre={rre}")]
    InvalidRegistrationError { rte: f64, rre: f64 },
}

/// Skew-symmetric matrix such that `skew(a) * b == a.cross(&b)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Rotation-vector exponential (Rodrigues formula).
///
/// Uses the Taylor expansion of the coefficients near zero so the map is
/// smooth through the identity.
pub fn so3_exp(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let theta = theta2.sqrt();
    let k = skew(omega);
    let (a, b) = if theta < 1e-8 {
        // sin(t)/t = 1 - t^2/6, (1-cos t)/t^2 = 1/2 - t^2/24
        (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    Matrix3::identity() + k * a + k * k * b
}

/// Logarithm of a rotation matrix, returning the rotation vector.
///
/// Inverse of [`so3_exp`] on the domain where the rotation angle is < pi;
/// at exactly pi the axis sign is chosen deterministically.
pub fn so3_log(r: &Matrix3<f64>) -> Vector3<f64> {
    let cos_theta = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let theta = cos_theta.acos();
    if theta < 1e-10 {
        // R ~ I + skew(w); first-order recovery.
        return Vector3::new(
            (r[(2, 1)] - r[(1, 2)]) / 2.0,
            (r[(0, 2)] - r[(2, 0)]) / 2.0,
            (r[(1, 0)] - r[(0, 1)]) / 2.0,
        );
    }
    if (std::f64::consts::PI - theta) < 1e-6 {
        // Near pi the antisymmetric part vanishes; recover the axis from the
        // symmetric part R + I = 2 (I cos + (1-cos) n n^T)-ish diagonal.
        let m = (r + Matrix3::identity()) / 2.0;
        let mut axis = Vector3::new(m[(0, 0)].max(0.0).sqrt(), m[(1, 1)].max(0.0).sqrt(), m[(2, 2)].max(0.0).sqrt());
        // Fix relative signs using the largest component.
        let imax = if axis.x >= axis.y && axis.x >= axis.z {
            0
        } else if axis.y >= axis.z {
            1
        } else {
            2
        };
        if imax == 0 {
            axis.y = axis.y.copysign(m[(0, 1)]);
            axis.z = axis.z.copysign(m[(0, 2)]);
        } else if imax == 1 {
            axis.x = axis.x.copysign(m[(0, 1)]);
            axis.z = axis.z.copysign(m[(1, 2)]);
        } else {
            axis.x = axis.x.copysign(m[(0, 2)]);
            axis.y = axis.y.copysign(m[(1, 2)]);
        }
        if axis.norm() > 0.0 {
            axis = axis.normalize();
        }
        return axis * theta;
    }
    let w = Vector3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    w * (theta / (2.0 * theta.sin()))
}

/// Rigid transform `T = [R | t]`: `p -> R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    /// Builds a pose, validating that `rotation` is a proper rotation
    /// (orthonormal, det +1) within [`ROTATION_TOL`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        let dev = (rotation * rotation.transpose() - Matrix3::identity()).abs().max();
        if !dev.is_finite() || dev > ROTATION_TOL {
            return Err(GeometryError::NotOrthonormal { deviation: dev });
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(GeometryError::ImproperRotation { det });
        }
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::NonFiniteDelta);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Internal constructor for rotations valid by construction.
    pub(crate) fn from_parts_unchecked(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        debug_assert!(
            (rotation * rotation.transpose() - Matrix3::identity()).abs().max() < 1e-7,
            "rotation drifted off the manifold"
        );
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Rotation by `angle` radians about `axis` (need not be normalized),
    /// with the given translation.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64, translation: Vector3<f64>) -> Self {
        let n = axis.norm();
        let omega = if n > 0.0 {
            axis * (angle / n)
        } else {
            Vector3::zeros()
        };
        Self::from_parts_unchecked(so3_exp(&omega), translation)
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::from_parts_unchecked(rt, -(rt * self.translation))
    }

    /// Composition: `(a.compose(&b))(p) == a(b(p))`.
    pub fn compose(&self, other: &Pose) -> Self {
        Self::from_parts_unchecked(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn unit_quaternion(&self) -> UnitQuaternion<f64> {
        UnitQuaternion::from_matrix(&self.rotation)
    }

    /// Row-major rotation followed by translation, 12 numbers.
    pub fn to_flat12(&self) -> [f64; 12] {
        let r = &self.rotation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            self.translation.x,
            self.translation.y,
            self.translation.z,
        ]
    }

    pub fn from_flat12(v: &[f64; 12]) -> Result<Self, GeometryError> {
        let rotation = Matrix3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]);
        Self::new(rotation, Vector3::new(v[9], v[10], v[11]))
    }
}

impl serde::Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_flat12().serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = <[f64; 12]>::deserialize(deserializer)?;
        Pose::from_flat12(&v).map_err(serde::de::Error::custom)
    }
}

/// Pinhole camera intrinsics. No distortion model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        if width == 0 || height == 0 {
            return Err(GeometryError::InvalidImageExtent { width, height });
        }
        if !(fx > 0.0 && fy > 0.0) {
            return Err(GeometryError::InvalidFocal { fx, fy });
        }
        if !(0.0 <= cx && cx < width as f64 && 0.0 <= cy && cy < height as f64) {
            return Err(GeometryError::InvalidPrincipalPoint {
                cx,
                cy,
                width,
                height,
            });
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        })
    }

    pub fn contains(&self, pixel: &Vector2<f64>) -> bool {
        pixel.x >= 0.0 && pixel.x < self.width as f64 && pixel.y >= 0.0 && pixel.y < self.height as f64
    }

    /// Number of pixels `T = width * height`.
    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// A set of 3D points in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyCloud);
        }
        for (index, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(GeometryError::NonFinitePoint { index });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Applies `pose` to every point: output `i` is `R p_i + t`.
pub fn apply_pose(pose: &Pose, cloud: &PointCloud) -> PointCloud {
    PointCloud {
        points: cloud
            .points
            .iter()
            .map(|p| pose.transform_point(p))
            .collect(),
    }
}

/// Projection of one camera-frame point onto the image plane.
///
/// `valid` is false when the depth is at most [`MIN_DEPTH`] or the pixel
/// falls outside `[0, width) x [0, height)`; the pixel value is only
/// meaningful for points with valid depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelProjection {
    pub pixel: Vector2<f64>,
    pub valid: bool,
}

/// Pinhole projection of a camera-frame point, with bounds checking.
pub fn project_point(intrinsics: &CameraIntrinsics, p: &Vector3<f64>) -> PixelProjection {
    match project_depth_only(intrinsics, p) {
        Some(pixel) => PixelProjection {
            pixel,
            valid: intrinsics.contains(&pixel),
        },
        None => PixelProjection {
            pixel: Vector2::zeros(),
            valid: false,
        },
    }
}

/// Pinhole projection ignoring image bounds; `None` iff the depth is at
/// most [`MIN_DEPTH`]. This is the projection used inside reprojection
/// residuals, where an out-of-view pixel is still a smooth function of the
/// pose.
pub fn project_depth_only(intrinsics: &CameraIntrinsics, p: &Vector3<f64>) -> Option<Vector2<f64>> {
    if p.z <= MIN_DEPTH {
        return None;
    }
    Some(Vector2::new(
        intrinsics.fx * p.x / p.z + intrinsics.cx,
        intrinsics.fy * p.y / p.z + intrinsics.cy,
    ))
}

/// Projects every point of a camera-frame cloud. Invalid points are
/// flagged, never dropped, so indices stay aligned with the cloud.
pub fn project(intrinsics: &CameraIntrinsics, camera_points: &PointCloud) -> Vec<PixelProjection> {
    camera_points
        .points
        .iter()
        .map(|p| project_point(intrinsics, p))
        .collect()
}

/// Left Jacobian of SO(3), the `V` block of the SE(3) exponential.
fn so3_left_jacobian(omega: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = omega.norm_squared();
    let theta = theta2.sqrt();
    let k = skew(omega);
    let (b, c) = if theta < 1e-8 {
        (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        (
            (1.0 - theta.cos()) / theta2,
            (theta - theta.sin()) / (theta2 * theta),
        )
    };
    Matrix3::identity() + k * b + k * k * c
}

/// Left-multiplicative SE(3) update: `T' = Exp(delta) * T`.
///
/// `delta` holds the translation increment in components 0..3 and the
/// rotation vector in components 3..6; `Exp` is the SE(3) exponential, so
/// retracting by `delta` and then by `-delta` restores the pose exactly.
/// The rotation updates as `exp(dw) R` and the translation as
/// `V(dw) dt + exp(dw) t` with `V` the SO(3) left Jacobian (`V = I` when
/// the rotation increment vanishes).
pub fn se3_retract(pose: &Pose, delta: &Vector6<f64>) -> Result<Pose, GeometryError> {
    if !delta.iter().all(|c| c.is_finite()) {
        return Err(GeometryError::NonFiniteDelta);
    }
    let dt = Vector3::new(delta[0], delta[1], delta[2]);
    let dw = Vector3::new(delta[3], delta[4], delta[5]);
    let dr = so3_exp(&dw);
    Ok(Pose::from_parts_unchecked(
        dr * pose.rotation,
        so3_left_jacobian(&dw) * dt + dr * pose.translation,
    ))
}

/// Geodesic rotation distance in degrees: `acos((trace(Ra^T Rb) - 1) / 2)`,
/// clamped into [0, 180].
pub fn rotation_error_deg(r_pred: &Matrix3<f64>, r_gt: &Matrix3<f64>) -> f64 {
    let cos_theta = (((r_pred.transpose() * r_gt).trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    cos_theta.acos().to_degrees().clamp(0.0, 180.0)
}

/// Euclidean distance between translation vectors, in meters.
pub fn translation_error(t_pred: &Vector3<f64>, t_gt: &Vector3<f64>) -> f64 {
    (t_pred - t_gt).norm()
}

/// Relative translational error (m) and relative rotation error (deg) of a
/// predicted pose against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RegistrationError {
    pub rte: f64,
    pub rre: f64,
}

impl RegistrationError {
    pub fn new(rte: f64, rre: f64) -> Result<Self, GeometryError> {
        if !(rte >= 0.0) || !(0.0..=180.0).contains(&rre) {
            return Err(GeometryError::InvalidRegistrationError { rte, rre });
        }
        Ok(Self { rte, rre })
    }

    pub fn between(pred: &Pose, gt: &Pose) -> Self {
        Self {
            rte: translation_error(pred.translation(), gt.translation()),
            rre: rotation_error_deg(pred.rotation(), gt.rotation()),
        }
    }

    /// The fine-registration gate: RTE < 2 m and RRE < 5 deg, both strict.
    pub fn is_fine(&self) -> bool {
        self.rte < 2.0 && self.rre < 5.0
    }
}

/// Fraction of registrations passing the fine gate (RTE < 2 m, RRE < 5 deg).
pub fn registration_accuracy(errors: &[RegistrationError]) -> Result<f64, GeometryError> {
    if errors.is_empty() {
        return Err(GeometryError::NoErrors);
    }
    let fine = errors.iter().filter(|e| e.is_fine()).count();
    Ok(fine as f64 / errors.len() as f64)
}
