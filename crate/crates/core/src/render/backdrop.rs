use crate::geometry::Ray;
use crate::math::Rgb;
use crate::optics::Environment;
use crate::pnm::RgbImage;
use crate::seqplan::MOTION_FAR;

use super::Camera;

/// Distance of the backdrop plane: twice the far end of the motion volume.
pub const BACKDROP_DISTANCE: f64 = 2.0 * MOTION_FAR;

const MIN_DIR_Z: f64 = 1e-6;
const SNAP: f64 = 1e-6;

/// A background frame stretched over the camera frustum's footprint on the
/// plane `z = -distance`.
#[derive(Debug, Clone)]
pub struct Backdrop {
    pub image: RgbImage,
    pub distance: f64,
    half_width: f64,
    half_height: f64,
}

impl Backdrop {
    pub fn new(image: RgbImage, camera: &Camera) -> Backdrop {
        Backdrop::at_distance(image, camera, BACKDROP_DISTANCE)
    }

    pub fn at_distance(image: RgbImage, camera: &Camera, distance: f64) -> Backdrop {
        let (half_width, half_height) = camera.half_extent_at(distance);
        Backdrop {
            image,
            distance,
            half_width,
            half_height,
        }
    }

    /// Source pixel as linear radiance.
    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        Rgb::from_bytes(self.image.get(x, y))
    }

    /// Continuous image position where `ray` meets the plane. Rays that do
    /// not head toward the plane are tilted until they do.
    pub fn image_position(&self, ray: &Ray) -> (f64, f64) {
        let mut d = ray.direction;
        if d.z > -MIN_DIR_Z {
            d.z = -MIN_DIR_Z;
        }
        let t = ((-self.distance - ray.origin.z) / d.z).max(0.0);
        let p = ray.origin + d * t;
        let u = (p.x / self.half_width + 1.0) * 0.5 * self.image.width as f64;
        let v = (1.0 - p.y / self.half_height) * 0.5 * self.image.height as f64;
        (u, v)
    }

    /// Bilinear lookup at a continuous image position, clamped to the border.
    pub fn sample(&self, u: f64, v: f64) -> Rgb {
        let (x0, x1, fx) = bilinear_axis(u, self.image.width);
        let (y0, y1, fy) = bilinear_axis(v, self.image.height);
        let c00 = self.pixel(x0, y0);
        if fx == 0.0 && fy == 0.0 {
            return c00;
        }
        let c10 = self.pixel(x1, y0);
        let c01 = self.pixel(x0, y1);
        let c11 = self.pixel(x1, y1);
        let top = c00.scale(1.0 - fx) + c10.scale(fx);
        let bottom = c01.scale(1.0 - fx) + c11.scale(fx);
        top.scale(1.0 - fy) + bottom.scale(fy)
    }
}

/// Neighbouring texel indices and weight along one axis.
fn bilinear_axis(coord: f64, size: u32) -> (u32, u32, f64) {
    let max = (size - 1) as f64;
    let mut f = coord - 0.5;
    let r = f.round();
    if (f - r).abs() < SNAP {
        f = r;
    }
    if f.is_nan() || f <= 0.0 {
        return (0, 0, 0.0);
    }
    if f >= max {
        return (size - 1, size - 1, 0.0);
    }
    let i = f.floor();
    (i as u32, i as u32 + 1, f - i)
}

/// Radiance reaching the camera side along `ray` from the backdrop.
pub fn backdrop_radiance(ray: &Ray, backdrop: &Backdrop) -> Rgb {
    let (u, v) = backdrop.image_position(ray);
    backdrop.sample(u, v)
}

impl Environment for Backdrop {
    fn radiance(&self, ray: &Ray) -> Rgb {
        backdrop_radiance(ray, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::seqplan::Resolution;

    fn gradient(w: u32, h: u32) -> RgbImage {
        let mut img = RgbImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                img.set(x, y, [(x * 7 % 256) as u8, (y * 13 % 256) as u8, ((x + y) % 256) as u8]);
            }
        }
        img
    }

    #[test]
    fn primary_rays_return_their_pixel() {
        let res = Resolution {
            width: 64,
            height: 36,
        };
        let cam = Camera::new(50.0, res).unwrap();
        let bd = Backdrop::new(gradient(64, 36), &cam);
        for y in 0..36 {
            for x in 0..64 {
                let c = backdrop_radiance(&cam.pixel_center_ray(x, y), &bd);
                assert_eq!(c.to_bytes(), bd.image.get(x, y), "pixel {x},{y}");
            }
        }
    }

    #[test]
    fn off_frustum_rays_clamp_to_border() {
        let res = Resolution {
            width: 8,
            height: 4,
        };
        let cam = Camera::new(50.0, res).unwrap();
        let bd = Backdrop::new(gradient(8, 4), &cam);
        let far_right = Ray::new(Vec3::ZERO, Vec3::new(5.0, 0.0, -1.0).normalized());
        let (_, v) = bd.image_position(&far_right);
        let expect = bd.sample(1e9, v);
        assert_eq!(backdrop_radiance(&far_right, &bd), expect);
        let up = Ray::new(Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(backdrop_radiance(&up, &bd), bd.sample(4.0, -1e9));
    }

    #[test]
    fn uniform_background_is_uniform_for_any_ray() {
        let res = Resolution {
            width: 16,
            height: 9,
        };
        let cam = Camera::new(60.0, res).unwrap();
        let bd = Backdrop::new(RgbImage::filled(16, 9, [10, 200, 33]), &cam);
        for i in 0..200 {
            let a = i as f64 * 0.37;
            let dir = Vec3::new(a.sin(), (a * 1.7).cos(), -(a * 0.3).cos().abs() - 0.01).normalized();
            let ray = Ray::new(Vec3::new(0.3, -0.2, -5.0), dir);
            assert_eq!(backdrop_radiance(&ray, &bd).to_bytes(), [10, 200, 33]);
        }
    }
}
