use rayon::prelude::*;

use crate::annotate::Mask;
use crate::geometry::ObjectId;
use crate::math::Rgb;
use crate::optics::{shade_dielectric, SceneQuery, TransportSettings};
use crate::pnm::RgbImage;
use crate::rng::{hash_words, PixelRng};

use super::{Backdrop, Camera, SceneSnapshot, SceneTrack};

/// Shutter fraction for blur levels 0..=3.
pub const BLUR_SHUTTER: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
/// Temporal samples per subpixel sample when the shutter is open.
pub const TEMPORAL_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBuffers {
    pub rgb: RgbImage,
    pub target_mask: Mask,
    pub distractor_mask: Mask,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSettings {
    pub spp: u32,
    /// Fraction of the inter-frame interval the shutter stays open.
    pub shutter_fraction: f64,
    pub transport: TransportSettings,
    /// Seed of the per-pixel jitter streams.
    pub seed: u64,
}

impl Default for FrameSettings {
    fn default() -> Self {
        FrameSettings {
            spp: 1,
            shutter_fraction: 0.0,
            transport: TransportSettings::default(),
            seed: 0,
        }
    }
}

/// Sample times for frame `k`, centred on `k` and spread over the shutter.
pub fn shutter_times(frame_index: usize, shutter_fraction: f64) -> Vec<f64> {
    let k = frame_index as f64;
    if shutter_fraction <= 0.0 {
        return vec![k];
    }
    let s = TEMPORAL_SAMPLES as f64;
    (0..TEMPORAL_SAMPLES)
        .map(|j| k + shutter_fraction * ((j as f64 + 0.5) / s - 0.5))
        .collect()
}

/// Offset inside the pixel of subpixel sample `s` out of `spp`: one jittered
/// point per cell of a near-square grid, the exact center for `spp == 1`.
fn subpixel_offset(s: u32, spp: u32, rng: &mut PixelRng) -> (f64, f64) {
    if spp <= 1 {
        return (0.5, 0.5);
    }
    let gx = (spp as f64).sqrt().ceil() as u32;
    let gy = spp.div_ceil(gx);
    let (cx, cy) = (s % gx, s / gx);
    let jx = rng.next_f64();
    let jy = rng.next_f64();
    (
        (cx as f64 + jx) / gx as f64,
        (cy as f64 + jy) / gy as f64,
    )
}

/// Renders frame `frame_index`: colour from the dielectric tracer averaged
/// over subpixel and shutter samples, masks from the sharp pixel-center ray.
///
/// Samples that miss every object take the background pixel directly, so
/// uncovered pixels keep their source colour at any sample count.
pub fn render_frame(
    scene: &SceneTrack,
    camera: &Camera,
    backdrop: &Backdrop,
    frame_index: usize,
    settings: &FrameSettings,
) -> FrameBuffers {
    let (w, h) = (camera.width, camera.height);
    let spp = settings.spp.max(1);
    let snapshots: Vec<SceneSnapshot> = shutter_times(frame_index, settings.shutter_fraction)
        .into_iter()
        .map(|t| scene.at(t))
        .collect();
    let sharp = scene.at(frame_index as f64);
    let norm = 1.0 / (spp as f64 * snapshots.len() as f64);
    let same_size = backdrop.image.width == w && backdrop.image.height == h;

    let rows: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut rgb = Vec::with_capacity(w as usize * 3);
            let mut target = Vec::with_capacity(w as usize);
            let mut distractor = Vec::with_capacity(w as usize);
            for x in 0..w {
                let background = if same_size {
                    backdrop.pixel(x, y)
                } else {
                    crate::render::backdrop_radiance(&camera.pixel_center_ray(x, y), backdrop)
                };
                let mut rng = PixelRng::new(hash_words(
                    settings.seed,
                    &[frame_index as u64, x as u64, y as u64],
                ));
                let mut sum = Rgb::BLACK;
                for s in 0..spp {
                    let (ox, oy) = subpixel_offset(s, spp, &mut rng);
                    let ray = camera.ray_through(x as f64 + ox, y as f64 + oy);
                    for snap in &snapshots {
                        sum += match snap.first_hit(&ray) {
                            Some((hit, id)) => shade_dielectric(
                                &hit,
                                &ray,
                                snap,
                                backdrop,
                                snap.material(id),
                                0,
                                1.0,
                                &settings.transport,
                            ),
                            None => background,
                        };
                    }
                }
                rgb.extend_from_slice(&sum.scale(norm).to_bytes());
                let id = sharp.first_hit(&camera.pixel_center_ray(x, y)).map(|(_, id)| id);
                target.push((id == Some(ObjectId::Target)) as u8);
                distractor.push((id == Some(ObjectId::Distractor)) as u8);
            }
            (rgb, target, distractor)
        })
        .collect();

    let mut buffers = FrameBuffers {
        rgb: RgbImage::new(w, h),
        target_mask: Mask::new(w, h),
        distractor_mask: Mask::new(w, h),
    };
    let (rw, mw) = (w as usize * 3, w as usize);
    for (y, (rgb, t, d)) in rows.into_iter().enumerate() {
        buffers.rgb.data[y * rw..(y + 1) * rw].copy_from_slice(&rgb);
        buffers.target_mask.data[y * mw..(y + 1) * mw].copy_from_slice(&t);
        buffers.distractor_mask.data[y * mw..(y + 1) * mw].copy_from_slice(&d);
    }
    buffers
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::math::Vec3;
    use crate::optics::DielectricMaterial;
    use crate::procedural;
    use crate::render::{MeshAsset, SceneObject};
    use crate::seqplan::Resolution;
    use crate::trajectory::PoseTrack;

    const RES: Resolution = Resolution {
        width: 96,
        height: 54,
    };

    fn setup(track: PoseTrack) -> (SceneTrack, Camera, Backdrop) {
        let camera = Camera::new(50.0, RES).unwrap();
        let backdrop = Backdrop::new(procedural::checker_frame(RES.width, RES.height, 0, 6), &camera);
        let asset = Arc::new(MeshAsset::new(procedural::box_mesh(Vec3::splat(1.0)).normalized()).unwrap());
        let scene = SceneTrack::new(vec![SceneObject {
            id: ObjectId::Target,
            asset,
            material: DielectricMaterial::for_transparency_level(1).unwrap(),
            scale: 0.8,
            track,
        }]);
        (scene, camera, backdrop)
    }

    #[test]
    fn empty_scene_passes_background_through() {
        let (_, camera, backdrop) = setup(PoseTrack::fixed(Vec3::new(0.0, 0.0, -5.0), 1));
        for spp in [1, 4] {
            let out = render_frame(
                &SceneTrack::default(),
                &camera,
                &backdrop,
                0,
                &FrameSettings {
                    spp,
                    ..FrameSettings::default()
                },
            );
            assert_eq!(out.rgb, backdrop.image);
            assert!(out.target_mask.is_empty() && out.distractor_mask.is_empty());
        }
    }

    #[test]
    fn masks_do_not_depend_on_spp() {
        let (scene, camera, backdrop) = setup(PoseTrack::fixed(Vec3::new(0.2, -0.1, -5.0), 1));
        let one = render_frame(&scene, &camera, &backdrop, 0, &FrameSettings::default());
        let many = render_frame(
            &scene,
            &camera,
            &backdrop,
            0,
            &FrameSettings {
                spp: 16,
                ..FrameSettings::default()
            },
        );
        assert_eq!(one.target_mask, many.target_mask);
        assert!(one.target_mask.count() > 50);
        // colour only changes next to the silhouette
        for y in 0..RES.height {
            for x in 0..RES.width {
                if one.rgb.get(x, y) != many.rgb.get(x, y) {
                    let near_edge = (-1i32..=1).any(|dy| {
                        (-1i32..=1).any(|dx| {
                            let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                            nx >= 0
                                && ny >= 0
                                && (nx as u32) < RES.width
                                && (ny as u32) < RES.height
                                && one.target_mask.get(nx as u32, ny as u32)
                                    != one.target_mask.get(x, y)
                        })
                    });
                    let inside = one.target_mask.get(x, y);
                    assert!(near_edge || inside, "pixel {x},{y} changed away from the object");
                }
            }
        }
    }

    #[test]
    fn shutter_times_are_centred() {
        assert_eq!(shutter_times(3, 0.0), vec![3.0]);
        let t = shutter_times(3, 1.0);
        assert_eq!(t.len(), TEMPORAL_SAMPLES);
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        assert!((mean - 3.0).abs() < 1e-12);
        assert!(t[0] > 2.5 && t[7] < 3.5);
    }

    #[test]
    fn stratified_offsets_cover_distinct_cells() {
        let mut rng = PixelRng::new(5);
        let cells: std::collections::BTreeSet<(u32, u32)> = (0..16)
            .map(|s| {
                let (x, y) = subpixel_offset(s, 16, &mut rng);
                ((x * 4.0) as u32, (y * 4.0) as u32)
            })
            .collect();
        assert_eq!(cells.len(), 16);
    }
}
