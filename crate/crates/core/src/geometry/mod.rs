//! Triangle meshes, rays, rigid transforms and BVH-accelerated intersection.

mod bvh;
mod mesh;

pub use bvh::{intersect, Bvh, BvhNode, TraversalStats, BVH_BINS, BVH_LEAF_SIZE};
pub use mesh::{load_mesh, load_mesh_file, TriMesh};

use serde::{Deserialize, Serialize};

use crate::math::{Quat, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb3 {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb3 {
    pub const EMPTY: Aabb3 = Aabb3 {
        min: Vec3::splat(f64::INFINITY),
        max: Vec3::splat(f64::NEG_INFINITY),
    };

    pub fn new(min: Vec3, max: Vec3) -> Self {
        Aabb3 { min, max }
    }

    pub fn union(&self, o: &Aabb3) -> Aabb3 {
        Aabb3::new(self.min.min(o.min), self.max.max(o.max))
    }

    pub fn grow(&self, p: Vec3) -> Aabb3 {
        Aabb3::new(self.min.min(p), self.max.max(p))
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn contains_box(&self, o: &Aabb3) -> bool {
        (0..3).all(|i| self.min[i] <= o.min[i] && o.max[i] <= self.max[i])
    }

    pub fn surface_area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let e = self.max - self.min;
        2.0 * (e.x * e.y + e.y * e.z + e.z * e.x)
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Parametric overlap of the ray with the box, clipped to the ray's
    /// `[t_min, t_max]`.
    #[inline]
    pub fn hit_interval(&self, ray: &Ray, inv_dir: Vec3) -> Option<(f64, f64)> {
        let mut t0 = ray.t_min;
        let mut t1 = ray.t_max;
        for axis in 0..3 {
            let inv = inv_dir[axis];
            let mut near = (self.min[axis] - ray.origin[axis]) * inv;
            let mut far = (self.max[axis] - ray.origin[axis]) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // widen by a few ulps so rounding never culls a true hit;
            // NaN (origin on a slab plane of a parallel ray) leaves t0/t1 as is
            far *= 1.0 + 4.0 * f64::EPSILON;
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Ray {
        Ray {
            origin,
            direction,
            t_min: 0.0,
            t_max: f64::INFINITY,
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    pub fn inv_direction(&self) -> Vec3 {
        Vec3::new(
            1.0 / self.direction.x,
            1.0 / self.direction.y,
            1.0 / self.direction.z,
        )
    }
}

/// Which scene object a hit belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectId {
    Target,
    Distractor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3,
    /// Outward geometric normal.
    pub normal: Vec3,
    /// True when the ray arrives from outside, against the normal.
    pub front_face: bool,
    pub triangle: usize,
}

/// Moller-Trumbore test. Returns the ray parameter of a hit strictly inside
/// `(t_min, t_max)`.
#[inline]
pub fn intersect_triangle(ray: &Ray, corners: &[Vec3; 3]) -> Option<f64> {
    let [a, b, c] = *corners;
    let e1 = b - a;
    let e2 = c - a;
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = ray.origin - a;
    let u = s.dot(p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.direction.dot(q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    (t > ray.t_min && t < ray.t_max).then_some(t)
}

pub(crate) fn make_hit(mesh: &TriMesh, ray: &Ray, t: f64, triangle: usize) -> Hit {
    let normal = mesh.normals[triangle];
    Hit {
        t,
        point: ray.at(t),
        normal,
        front_face: ray.direction.dot(normal) < 0.0,
        triangle,
    }
}

/// Uniform scale, then rotation, then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub scale: f64,
    pub rotation: Quat,
    pub translation: Vec3,
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        scale: 1.0,
        rotation: Quat::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn point_to_world(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p * self.scale) + self.translation
    }

    pub fn vector_to_world(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    /// Object-space ray. The direction stays unit length, so object-space
    /// distances are world distances divided by `scale`.
    pub fn ray_to_local(&self, ray: &Ray) -> Ray {
        let inv = self.rotation.conjugate();
        Ray {
            origin: inv.rotate(ray.origin - self.translation) / self.scale,
            direction: inv.rotate(ray.direction),
            t_min: ray.t_min / self.scale,
            t_max: ray.t_max / self.scale,
        }
    }

    /// Intersects a mesh placed in the world by this transform. The returned
    /// hit is in world units.
    pub fn intersect(&self, bvh: &Bvh, mesh: &TriMesh, ray: &Ray) -> Option<Hit> {
        let local = self.ray_to_local(ray);
        bvh.intersect(mesh, &local).map(|h| Hit {
            t: h.t * self.scale,
            point: self.point_to_world(h.point),
            normal: self.vector_to_world(h.normal),
            front_face: h.front_face,
            triangle: h.triangle,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_hit_and_miss() {
        let tri = [Vec3::ZERO, Vec3::X, Vec3::Y];
        let ray = Ray::new(Vec3::new(0.2, 0.2, 1.0), -Vec3::Z);
        assert_eq!(intersect_triangle(&ray, &tri), Some(1.0));
        let miss = Ray::new(Vec3::new(0.8, 0.8, 1.0), -Vec3::Z);
        assert_eq!(intersect_triangle(&miss, &tri), None);
        let behind = Ray::new(Vec3::new(0.2, 0.2, -1.0), -Vec3::Z);
        assert_eq!(intersect_triangle(&behind, &tri), None);
    }

    #[test]
    fn box_interval_respects_ray_range() {
        let b = Aabb3::new(Vec3::splat(-1.0), Vec3::splat(1.0));
        let r = Ray::new(Vec3::new(0.0, 0.0, 5.0), -Vec3::Z);
        let (t0, t1) = b.hit_interval(&r, r.inv_direction()).unwrap();
        assert!((t0 - 4.0).abs() < 1e-12 && (t1 - 6.0).abs() < 1e-12);
        let short = Ray { t_max: 3.0, ..r };
        assert!(b.hit_interval(&short, short.inv_direction()).is_none());
    }
}
