//! Dielectric light transport: Snell refraction, unpolarized Fresnel
//! reflectance and a deterministic splitting tracer that follows both the
//! reflected and the refracted branch at every interface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Hit, ObjectId, Ray};
use crate::math::{Rgb, Vec3};

/// Dielectric weight per transparency level 1..=4.
pub const TRANSPARENCY_WEIGHTS: [f64; 4] = [0.55, 0.75, 0.90, 0.99];
pub const DEFAULT_IOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DielectricMaterial {
    pub ior: f64,
    /// Share of the dielectric response; the rest is a flat gray surface.
    pub transparency_weight: f64,
    /// Multiplier applied on every transmission event.
    pub tint: Rgb,
}

impl Default for DielectricMaterial {
    fn default() -> Self {
        DielectricMaterial {
            ior: DEFAULT_IOR,
            transparency_weight: 1.0,
            tint: Rgb::WHITE,
        }
    }
}

impl DielectricMaterial {
    pub fn for_transparency_level(level: u8) -> Result<Self> {
        let weight = level
            .checked_sub(1)
            .and_then(|i| TRANSPARENCY_WEIGHTS.get(i as usize))
            .ok_or_else(|| Error::InvalidArgument(format!("transparency level {level}")))?;
        Ok(DielectricMaterial {
            transparency_weight: *weight,
            ..DielectricMaterial::default()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let tint_ok = [self.tint.r, self.tint.g, self.tint.b]
            .iter()
            .all(|c| (0.0..=1.0).contains(c));
        if self.ior > 1.0
            && self.transparency_weight > 0.0
            && self.transparency_weight <= 1.0
            && tint_ok
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid material {self:?}")))
        }
    }
}

/// Mirror direction of `incident` about `normal`.
#[inline]
pub fn reflect(incident: Vec3, normal: Vec3) -> Vec3 {
    incident - normal * (2.0 * incident.dot(normal))
}

/// Refracted direction for a unit `incident` hitting a surface whose unit
/// `normal` faces against it, with `eta_ratio = n_incident / n_transmitted`.
/// `None` on total internal reflection.
#[inline]
pub fn refract(incident: Vec3, normal: Vec3, eta_ratio: f64) -> Option<Vec3> {
    let cos_i = -incident.dot(normal);
    let sin2_t = eta_ratio * eta_ratio * (1.0 - cos_i * cos_i).max(0.0);
    if sin2_t > 1.0 {
        return None;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    Some(incident * eta_ratio + normal * (eta_ratio * cos_i - cos_t))
}

/// Unpolarized Fresnel reflectance going from index `n1` into `n2`.
/// Returns exactly 1 under total internal reflection.
pub fn fresnel_dielectric(cos_incident: f64, n1: f64, n2: f64) -> f64 {
    let cos_i = cos_incident.clamp(0.0, 1.0);
    let sin_i = (1.0 - cos_i * cos_i).max(0.0).sqrt();
    let sin_t = n1 / n2 * sin_i;
    if sin_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin_t * sin_t).max(0.0).sqrt();
    let r_s = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
    let r_p = (n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t);
    (0.5 * (r_s * r_s + r_p * r_p)).min(1.0)
}

/// Geometry the tracer can query.
pub trait SceneQuery: Sync {
    fn intersect(&self, ray: &Ray) -> Option<(Hit, ObjectId)>;
    fn material(&self, object: ObjectId) -> &DielectricMaterial;
    /// Offset applied to secondary ray origins along the surface normal.
    fn ray_epsilon(&self) -> f64;
}

/// Radiance arriving along rays that leave the objects.
pub trait Environment: Sync {
    fn radiance(&self, ray: &Ray) -> Rgb;
}

/// Constant radiance in every direction.
#[derive(Debug, Clone, Copy)]
pub struct UniformEnvironment(pub Rgb);

impl Environment for UniformEnvironment {
    fn radiance(&self, _ray: &Ray) -> Rgb {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportSettings {
    pub max_depth: u32,
    pub min_throughput: f64,
    pub gray_albedo: f64,
    pub ambient: f64,
}

impl Default for TransportSettings {
    fn default() -> Self {
        TransportSettings {
            max_depth: 6,
            min_throughput: 1e-3,
            gray_albedo: 0.5,
            ambient: 1.0,
        }
    }
}

/// Radiance along `ray`. At `max_depth` or below the throughput cutoff the
/// environment is looked up directly, ignoring any further surfaces.
pub fn trace<S: SceneQuery, E: Environment>(
    ray: &Ray,
    scene: &S,
    env: &E,
    depth: u32,
    throughput: f64,
    settings: &TransportSettings,
) -> Rgb {
    if depth >= settings.max_depth || throughput < settings.min_throughput {
        return env.radiance(ray);
    }
    match scene.intersect(ray) {
        Some((hit, object)) => {
            let material = *scene.material(object);
            shade_dielectric(&hit, ray, scene, env, &material, depth, throughput, settings)
        }
        None => env.radiance(ray),
    }
}

/// Radiance leaving a dielectric surface toward the ray origin:
/// `w * (R * L_reflected + (1 - R) * tint * L_refracted) + (1 - w) * gray * ambient`.
#[allow(clippy::too_many_arguments)]
pub fn shade_dielectric<S: SceneQuery, E: Environment>(
    hit: &Hit,
    ray: &Ray,
    scene: &S,
    env: &E,
    material: &DielectricMaterial,
    depth: u32,
    throughput: f64,
    settings: &TransportSettings,
) -> Rgb {
    let (n1, n2, normal) = if hit.front_face {
        (1.0, material.ior, hit.normal)
    } else {
        (material.ior, 1.0, -hit.normal)
    };
    let d = ray.direction;
    let cos_i = (-d.dot(normal)).clamp(0.0, 1.0);
    let reflectance = fresnel_dielectric(cos_i, n1, n2);
    let w = material.transparency_weight;
    let eps = scene.ray_epsilon();

    let reflected = Ray::new(hit.point + normal * eps, reflect(d, normal).normalized());
    let mut dielectric = trace(
        &reflected,
        scene,
        env,
        depth + 1,
        throughput * w * reflectance,
        settings,
    )
    .scale(reflectance);

    if reflectance < 1.0 {
        if let Some(dir) = refract(d, normal, n1 / n2) {
            let transmitted = 1.0 - reflectance;
            let refracted = Ray::new(hit.point - normal * eps, dir.normalized());
            let radiance = trace(
                &refracted,
                scene,
                env,
                depth + 1,
                throughput * w * transmitted * material.tint.max_channel(),
                settings,
            );
            dielectric += radiance.modulate(material.tint).scale(transmitted);
        }
    }

    dielectric.scale(w) + Rgb::gray((1.0 - w) * settings.gray_albedo * settings.ambient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bvh, Transform, TriMesh};
    use proptest::prelude::*;

    fn unit(theta_deg: f64) -> Vec3 {
        // direction hitting a +z-facing surface from above at angle theta
        let t = theta_deg.to_radians();
        Vec3::new(t.sin(), 0.0, -t.cos())
    }

    #[test]
    fn normal_incidence_passes_straight() {
        for eta in [0.5, 1.0 / 1.5, 1.0, 1.5] {
            let out = refract(-Vec3::Z, Vec3::Z, eta).unwrap();
            assert!((out + Vec3::Z).length() < 1e-15);
        }
    }

    #[test]
    fn glass_to_air_at_sixty_degrees_is_tir() {
        assert!(refract(unit(60.0), Vec3::Z, 1.5).is_none());
        assert_eq!(fresnel_dielectric(60f64.to_radians().cos(), 1.5, 1.0), 1.0);
    }

    #[test]
    fn snell_angle_at_forty_five_degrees() {
        let out = refract(unit(45.0), Vec3::Z, 1.0 / 1.5).unwrap();
        let sin_t = Vec3::new(out.x, out.y, 0.0).length();
        let angle = sin_t.asin().to_degrees();
        let expected = (45f64.to_radians().sin() / 1.5).asin().to_degrees();
        assert!((angle - expected).abs() < 1e-9);
        assert!((angle - 28.126).abs() < 1e-3);
        assert!((sin_t * 1.5 - 45f64.to_radians().sin()).abs() < 1e-12);
        assert!((out.length() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normal_incidence_reflectance_is_four_percent() {
        assert!((fresnel_dielectric(1.0, 1.0, 1.5) - 0.04).abs() < 1e-12);
        assert!((fresnel_dielectric(1.0, 1.5, 1.0) - 0.04).abs() < 1e-12);
    }

    #[test]
    fn grazing_incidence_reflects_everything() {
        assert!(fresnel_dielectric(1e-9, 1.0, 1.5) > 0.999_999);
        assert_eq!(fresnel_dielectric(0.0, 1.0, 1.5), 1.0);
    }

    #[test]
    fn reflectance_grows_toward_grazing() {
        let mut prev = fresnel_dielectric(1.0, 1.0, 1.5);
        for i in 1..1000 {
            let cos = 1.0 - i as f64 / 1000.0;
            let r = fresnel_dielectric(cos, 1.0, 1.5);
            assert!(r >= prev, "cos {cos}: {r} < {prev}");
            prev = r;
        }
    }

    proptest! {
        #[test]
        fn energy_split_sums_to_one(cos in 1e-6f64..=1.0, n1 in 1.0f64..2.5, n2 in 1.0f64..2.5) {
            let r = fresnel_dielectric(cos, n1, n2);
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert_eq!(r + (1.0 - r), 1.0);
        }

        #[test]
        fn refraction_is_reciprocal(theta in 0.0f64..89.0, phi in 0.0f64..std::f64::consts::TAU, eta in 0.4f64..2.5) {
            let t = theta.to_radians();
            let d = Vec3::new(t.sin() * phi.cos(), t.sin() * phi.sin(), -t.cos());
            if let Some(out) = refract(d, Vec3::Z, eta) {
                let back = refract(-out, -Vec3::Z, 1.0 / eta).expect("reverse path exists");
                prop_assert!((back + d).length() < 1e-9);
            }
        }
    }

    struct Slab {
        mesh: TriMesh,
        bvh: Bvh,
        material: DielectricMaterial,
    }

    impl Slab {
        fn new(material: DielectricMaterial) -> Slab {
            let mesh = crate::procedural::box_mesh(Vec3::new(2.0, 2.0, 0.1));
            let bvh = Bvh::build(&mesh).unwrap();
            Slab {
                mesh,
                bvh,
                material,
            }
        }
    }

    impl SceneQuery for Slab {
        fn intersect(&self, ray: &Ray) -> Option<(Hit, ObjectId)> {
            Transform::IDENTITY
                .intersect(&self.bvh, &self.mesh, ray)
                .map(|h| (h, ObjectId::Target))
        }
        fn material(&self, _: ObjectId) -> &DielectricMaterial {
            &self.material
        }
        fn ray_epsilon(&self) -> f64 {
            1e-6
        }
    }

    /// Backdrop color `c` for rays heading away from the viewer, black
    /// toward it.
    struct Backlight(Rgb);

    impl Environment for Backlight {
        fn radiance(&self, ray: &Ray) -> Rgb {
            if ray.direction.z < 0.0 {
                self.0
            } else {
                Rgb::BLACK
            }
        }
    }

    #[test]
    fn clear_glass_in_uniform_light_is_invisible() {
        let slab = Slab::new(DielectricMaterial::default());
        let c = Rgb::new(0.2, 0.5, 0.8);
        let ray = Ray::new(Vec3::new(0.1, 0.05, 1.0), -Vec3::Z);
        let out = trace(&ray, &slab, &UniformEnvironment(c), 0, 1.0, &TransportSettings::default());
        for (a, b) in [(out.r, c.r), (out.g, c.g), (out.b, c.b)] {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn slab_transmits_product_of_interface_transmittances() {
        let slab = Slab::new(DielectricMaterial::default());
        let c = Rgb::gray(0.8);
        let settings = TransportSettings {
            max_depth: 2,
            ..TransportSettings::default()
        };
        let ray = Ray::new(Vec3::new(0.1, 0.05, 1.0), -Vec3::Z);
        let out = trace(&ray, &slab, &Backlight(c), 0, 1.0, &settings);
        let expected = (1.0 - 0.04f64) * (1.0 - 0.04);
        assert!((expected - 0.9216).abs() < 1e-12);
        assert!((out.r / c.r - expected).abs() < 1e-9, "{}", out.r / c.r);
    }

    #[test]
    fn partial_weight_blends_toward_gray() {
        let material = DielectricMaterial::for_transparency_level(1).unwrap();
        let slab = Slab::new(material);
        let ray = Ray::new(Vec3::new(0.1, 0.05, 1.0), -Vec3::Z);
        let out = trace(
            &ray,
            &slab,
            &UniformEnvironment(Rgb::BLACK),
            0,
            1.0,
            &TransportSettings {
                max_depth: 1,
                ..TransportSettings::default()
            },
        );
        assert!((out.r - 0.45 * 0.5).abs() < 1e-12, "{}", out.r);
    }

    #[test]
    fn level_mapping_and_validation() {
        assert_eq!(
            DielectricMaterial::for_transparency_level(4).unwrap().transparency_weight,
            0.99
        );
        assert!(DielectricMaterial::for_transparency_level(0).is_err());
        assert!(DielectricMaterial::for_transparency_level(5).is_err());
        let bad = DielectricMaterial {
            ior: 0.9,
            ..DielectricMaterial::default()
        };
        assert!(bad.validate().is_err());
    }
}
