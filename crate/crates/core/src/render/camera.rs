use crate::error::{Error, Result};
use crate::geometry::Ray;
use crate::math::Vec3;
use crate::seqplan::Resolution;

/// Pinhole camera at the origin looking down `-z` with `+y` up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub vfov_deg: f64,
    pub width: u32,
    pub height: u32,
    tan_half: f64,
    aspect: f64,
}

impl Camera {
    pub fn new(vfov_deg: f64, resolution: Resolution) -> Result<Camera> {
        if !(vfov_deg > 10.0 && vfov_deg < 120.0) {
            return Err(Error::InvalidArgument(format!(
                "vertical fov {vfov_deg} outside (10, 120)"
            )));
        }
        if resolution.width == 0 || resolution.height == 0 {
            return Err(Error::InvalidArgument("empty resolution".into()));
        }
        Ok(Camera {
            vfov_deg,
            width: resolution.width,
            height: resolution.height,
            tan_half: (vfov_deg.to_radians() * 0.5).tan(),
            aspect: resolution.width as f64 / resolution.height as f64,
        })
    }

    pub fn resolution(&self) -> Resolution {
        Resolution {
            width: self.width,
            height: self.height,
        }
    }

    /// Half width and half height of the view frustum at distance `depth`.
    pub fn half_extent_at(&self, depth: f64) -> (f64, f64) {
        let hh = depth * self.tan_half;
        (hh * self.aspect, hh)
    }

    /// Ray through the continuous image position `(px, py)`; pixel `(x, y)`
    /// covers `[x, x+1) x [y, y+1)`, so its center is `(x + 0.5, y + 0.5)`.
    #[inline]
    pub fn ray_through(&self, px: f64, py: f64) -> Ray {
        let sx = (2.0 * px / self.width as f64 - 1.0) * self.tan_half * self.aspect;
        let sy = (1.0 - 2.0 * py / self.height as f64) * self.tan_half;
        Ray::new(Vec3::ZERO, Vec3::new(sx, sy, -1.0).normalized())
    }

    pub fn pixel_center_ray(&self, x: u32, y: u32) -> Ray {
        self.ray_through(x as f64 + 0.5, y as f64 + 0.5)
    }

    /// Continuous image position of a point in front of the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        if p.z >= 0.0 {
            return None;
        }
        let depth = -p.z;
        let (hw, hh) = self.half_extent_at(depth);
        Some((
            (p.x / hw + 1.0) * 0.5 * self.width as f64,
            (1.0 - p.y / hh) * 0.5 * self.height as f64,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_ray_looks_down_negative_z() {
        let cam = Camera::new(50.0, Resolution { width: 4, height: 2 }).unwrap();
        let r = cam.ray_through(2.0, 1.0);
        assert!((r.direction - Vec3::new(0.0, 0.0, -1.0)).length() < 1e-15);
    }

    #[test]
    fn projection_inverts_ray_generation() {
        let cam = Camera::new(50.0, Resolution::default()).unwrap();
        for (x, y) in [(0, 0), (319, 179), (100, 37)] {
            let r = cam.pixel_center_ray(x, y);
            let p = r.at(7.0);
            let (px, py) = cam.project(p).unwrap();
            assert!((px - (x as f64 + 0.5)).abs() < 1e-9);
            assert!((py - (y as f64 + 0.5)).abs() < 1e-9);
        }
    }

    #[test]
    fn fov_is_checked() {
        assert!(Camera::new(10.0, Resolution::default()).is_err());
        assert!(Camera::new(120.0, Resolution::default()).is_err());
    }
}
