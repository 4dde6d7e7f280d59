//! Fresnel reflectance of a glass interface and a rendered glass sphere
//! over a checkerboard.
//!
//! ```text
//! cargo run --example glass_optics -- sphere.ppm
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use glasstrack::geometry::ObjectId;
use glasstrack::math::Vec3;
use glasstrack::optics::{fresnel_dielectric, DielectricMaterial, DEFAULT_IOR};
use glasstrack::procedural;
use glasstrack::render::{render_frame, Backdrop, Camera, FrameSettings, MeshAsset, SceneObject, SceneTrack};
use glasstrack::seqplan::Resolution;
use glasstrack::trajectory::PoseTrack;

fn main() -> glasstrack::Result<()> {
    println!("angle  R(air->glass)  R(glass->air)");
    for deg in (0..=85).step_by(5) {
        let cos = (deg as f64).to_radians().cos();
        println!(
            "{deg:>5}  {:>13.5}  {:>13.5}",
            fresnel_dielectric(cos, 1.0, DEFAULT_IOR),
            fresnel_dielectric(cos, DEFAULT_IOR, 1.0)
        );
    }

    let res = Resolution {
        width: 320,
        height: 180,
    };
    let camera = Camera::new(50.0, res)?;
    let backdrop = Backdrop::new(procedural::checker_frame(res.width, res.height, 0, 16), &camera);
    let scene = SceneTrack::new(vec![SceneObject {
        id: ObjectId::Target,
        asset: Arc::new(MeshAsset::new(procedural::uv_sphere(64, 32))?),
        material: DielectricMaterial::for_transparency_level(4)?,
        scale: 1.5,
        track: PoseTrack::fixed(Vec3::new(0.0, 0.0, -5.0), 1),
    }]);
    let frame = render_frame(
        &scene,
        &camera,
        &backdrop,
        0,
        &FrameSettings {
            spp: 9,
            ..FrameSettings::default()
        },
    );
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("glass_sphere.ppm"));
    glasstrack::pnm::write_ppm(&out, &frame.rgb)?;
    println!("{} sphere pixels -> {}", frame.target_mask.count(), out.display());
    Ok(())
}
