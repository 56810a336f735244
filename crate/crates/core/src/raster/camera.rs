use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Pose;

/// Pinhole camera. The pose maps camera coordinates to world coordinates;
/// in camera coordinates +Z looks forward, +X is image right and +Y is image
/// down. Pixel `(i, j)` has its center at `(u, v) = (i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub pose: Pose,
}

impl Camera {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32, pose: Pose) -> Result<Self> {
        let cam = Camera {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            pose,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::Invalid("focal lengths must be positive".into()));
        }
        if !(0.0 <= self.cx && self.cx < self.width as f64 && 0.0 <= self.cy && self.cy < self.height as f64) {
            return Err(Error::Invalid("principal point outside image".into()));
        }
        Ok(())
    }

    /// Square pixels, principal point at the image center.
    pub fn from_vertical_fov(width: u32, height: u32, vfov_deg: f64, pose: Pose) -> Result<Self> {
        let fy = (height as f64 / 2.0) / (vfov_deg.to_radians() / 2.0).tan();
        Self::new(
            fy,
            fy,
            (width as f64 - 1.0) / 2.0,
            (height as f64 - 1.0) / 2.0,
            width,
            height,
            pose,
        )
    }

    /// Pose looking from `eye` toward `target` with world +Z up.
    pub fn look_at_pose(eye: Vector3<f64>, target: Vector3<f64>) -> Result<Pose> {
        let fwd = target - eye;
        if fwd.norm() < 1e-9 {
            return Err(Error::Invalid("eye and target coincide".into()));
        }
        let fwd = fwd.normalize();
        let right = fwd.cross(&Vector3::z());
        if right.norm() < 1e-9 {
            return Err(Error::Invalid("view direction parallel to up".into()));
        }
        let right = right.normalize();
        let down = fwd.cross(&right);
        let m = Matrix3::from_columns(&[right, down, fwd]);
        let rot = Rotation3::from_matrix_unchecked(m);
        Ok(Pose::from_parts(eye, UnitQuaternion::from_rotation_matrix(&rot)))
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.pose.inverse_transform_point(p)
    }

    pub fn camera_to_world(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.pose.transform_point(p)
    }

    /// Direction of a camera axis in world coordinates.
    pub fn world_axis(&self, camera_axis: Vector3<f64>) -> Vector3<f64> {
        self.pose.orientation * camera_axis
    }

    pub fn contains_pixel(&self, u: f64, v: f64) -> bool {
        let (iu, iv) = (u.round(), v.round());
        iu >= 0.0 && iv >= 0.0 && iu < self.width as f64 && iv < self.height as f64
    }
}

/// World point to `(u, v, depth)`; depth is the camera-frame z.
pub fn project(p: &Vector3<f64>, cam: &Camera) -> Result<(f64, f64, f64)> {
    let c = cam.world_to_camera(p);
    if c.z <= 0.0 {
        return Err(Error::BehindCamera(c.z));
    }
    Ok((cam.fx * c.x / c.z + cam.cx, cam.fy * c.y / c.z + cam.cy, c.z))
}

/// Inverse of [`project`] for a known depth.
pub fn deproject(u: f64, v: f64, depth: f64, cam: &Camera) -> Result<Vector3<f64>> {
    if !(depth > 0.0) {
        return Err(Error::InvalidDepth(depth));
    }
    let c = Vector3::new((u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth);
    Ok(cam.camera_to_world(&c))
}
