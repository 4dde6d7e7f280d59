use std::sync::Arc;

use crate::geometry::{Bvh, Hit, ObjectId, Ray, Transform, TriMesh};
use crate::optics::{DielectricMaterial, SceneQuery};
use crate::trajectory::PoseTrack;

/// Relative ray offset for secondary rays, scaled by the scene size.
pub const RAY_EPSILON_SCALE: f64 = 1e-4;

/// One mesh with its acceleration structure, reusable across objects.
#[derive(Debug, Clone)]
pub struct MeshAsset {
    pub mesh: TriMesh,
    pub bvh: Bvh,
    /// Largest vertex distance from the mesh origin.
    pub radius: f64,
}

impl MeshAsset {
    pub fn new(mesh: TriMesh) -> crate::Result<MeshAsset> {
        let bvh = Bvh::build(&mesh)?;
        let radius = mesh.vertices.iter().map(|v| v.length()).fold(0.0, f64::max);
        Ok(MeshAsset { mesh, bvh, radius })
    }
}

#[derive(Debug, Clone)]
pub struct SceneObject {
    pub id: ObjectId,
    pub asset: Arc<MeshAsset>,
    pub material: DielectricMaterial,
    /// Uniform object-to-world scale.
    pub scale: f64,
    pub track: PoseTrack,
}

/// Objects with their pose tracks over a whole sequence.
#[derive(Debug, Clone, Default)]
pub struct SceneTrack {
    pub objects: Vec<SceneObject>,
}

impl SceneTrack {
    pub fn new(objects: Vec<SceneObject>) -> SceneTrack {
        SceneTrack { objects }
    }

    /// Rigid placement of every object at a fractional frame time.
    pub fn at(&self, time: f64) -> SceneSnapshot<'_> {
        let mut extent: f64 = 1.0;
        let placed = self
            .objects
            .iter()
            .map(|o| {
                let (translation, rotation) = o.track.pose_at(time);
                extent = extent.max(translation.length() + o.asset.radius * o.scale);
                PlacedObject {
                    object: o,
                    transform: Transform {
                        scale: o.scale,
                        rotation,
                        translation,
                    },
                    bound_radius: o.asset.radius * o.scale,
                }
            })
            .collect();
        SceneSnapshot {
            placed,
            epsilon: RAY_EPSILON_SCALE * extent,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlacedObject<'a> {
    pub object: &'a SceneObject,
    pub transform: Transform,
    bound_radius: f64,
}

impl PlacedObject<'_> {
    /// Cheap bounding-sphere rejection before the BVH.
    #[inline]
    fn may_hit(&self, ray: &Ray) -> bool {
        let oc = self.transform.translation - ray.origin;
        let along = oc.dot(ray.direction);
        let r2 = self.bound_radius * self.bound_radius * (1.0 + 1e-9);
        let d2 = oc.length_squared() - along * along;
        if d2 > r2 {
            return false;
        }
        // sphere entirely behind the ray start
        along + self.bound_radius >= ray.t_min
    }
}

/// Scene frozen at one instant; answers ray queries for the tracer.
#[derive(Debug, Clone)]
pub struct SceneSnapshot<'a> {
    pub placed: Vec<PlacedObject<'a>>,
    pub epsilon: f64,
}

impl SceneSnapshot<'_> {
    pub fn first_hit(&self, ray: &Ray) -> Option<(Hit, ObjectId)> {
        let mut best: Option<(Hit, ObjectId)> = None;
        let mut query = *ray;
        for p in &self.placed {
            if !p.may_hit(&query) {
                continue;
            }
            if let Some(h) = p.transform.intersect(&p.object.asset.bvh, &p.object.asset.mesh, &query) {
                query.t_max = h.t;
                best = Some((h, p.object.id));
            }
        }
        best
    }
}

impl SceneQuery for SceneSnapshot<'_> {
    fn intersect(&self, ray: &Ray) -> Option<(Hit, ObjectId)> {
        self.first_hit(ray)
    }

    fn material(&self, object: ObjectId) -> &DielectricMaterial {
        &self
            .placed
            .iter()
            .find(|p| p.object.id == object)
            .expect("hit object is in the scene")
            .object
            .material
    }

    fn ray_epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::procedural;

    #[test]
    fn nearest_object_wins() {
        let asset = Arc::new(MeshAsset::new(procedural::uv_sphere(16, 8)).unwrap());
        let obj = |id, z: f64| SceneObject {
            id,
            asset: asset.clone(),
            material: DielectricMaterial::default(),
            scale: 0.5,
            track: PoseTrack::fixed(Vec3::new(0.0, 0.0, z), 1),
        };
        let scene = SceneTrack::new(vec![obj(ObjectId::Distractor, -8.0), obj(ObjectId::Target, -5.0)]);
        let snap = scene.at(0.0);
        let (hit, id) = snap.first_hit(&Ray::new(Vec3::ZERO, -Vec3::Z)).unwrap();
        assert_eq!(id, ObjectId::Target);
        assert!((hit.t - 4.5).abs() < 1e-9);
        let miss = Ray::new(Vec3::ZERO, Vec3::new(1.0, 0.0, -1.0).normalized());
        assert!(snap.first_hit(&miss).is_none());
    }
}
