use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{self, FrameAnnotation, SequenceAttributes};
use crate::error::{read_json, write_json, Error, Result};
use crate::geometry::{load_mesh_file, ObjectId};
use crate::math::{Quat, Rgb, Vec3};
use crate::optics::{DielectricMaterial, TransportSettings};
use crate::pnm;
use crate::rng::{derive_seed, seeded};
use crate::seqplan::{BackgroundCorpus, CatalogEntry, ObjectCatalog, SequenceConfig};
use crate::trajectory::{
    constant_speed_params, lagged_track, ArcTable, PoseTrack, Spline, DISTRACTOR_LAG,
};

use super::{
    composite_occluder, render_frame, Backdrop, Camera, FrameSettings, MaskMode, MeshAsset,
    SceneObject, SceneTrack, StripeOccluder, BLUR_SHUTTER,
};

pub const META_FILE: &str = "meta.json";
pub const FRAMES_DIR: &str = "frames";
pub const TARGET_MASK_DIR: &str = "masks/target";
pub const DISTRACTOR_MASK_DIR: &str = "masks/distractor";
const META_FORMAT: &str = "glasstrack-sequence/1";

/// Distractor offset from the lagged target path, in target radii.
const DISTRACTOR_OFFSET_RADII: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSettings {
    pub spp: u32,
    pub mask_mode: MaskMode,
    pub transport: TransportSettings,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings {
            spp: 4,
            mask_mode: MaskMode::Amodal,
            transport: TransportSettings::default(),
        }
    }
}

/// Contents of `meta.json`, written once every other file of the sequence
/// is on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub format: String,
    pub config: SequenceConfig,
    pub render: RenderSettings,
    pub frames_written: usize,
}

pub fn frame_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(FRAMES_DIR).join(format!("{frame:06}.ppm"))
}

pub fn target_mask_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(TARGET_MASK_DIR).join(format!("{frame:06}.pgm"))
}

pub fn distractor_mask_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(DISTRACTOR_MASK_DIR).join(format!("{frame:06}.pgm"))
}

/// World-space radius of an object whose diameter spans `object_scale` of
/// the frame's shorter side at `depth`.
pub fn object_radius(camera: &Camera, object_scale: f64, depth: f64) -> f64 {
    let (hw, hh) = camera.half_extent_at(depth);
    object_scale * hw.min(hh)
}

fn material_for(entry: &CatalogEntry, transparency_level: u8) -> Result<DielectricMaterial> {
    let mut m = DielectricMaterial::for_transparency_level(transparency_level)?;
    if let Some(o) = &entry.material {
        if let Some(ior) = o.ior {
            m.ior = ior;
        }
        if let Some([r, g, b]) = o.tint {
            m.tint = Rgb::new(r, g, b);
        }
    }
    m.validate()?;
    Ok(m)
}

fn load_asset(catalog: &ObjectCatalog, entry: &CatalogEntry) -> Result<Arc<MeshAsset>> {
    let mesh = load_mesh_file(&catalog.mesh_path(entry))?;
    Ok(Arc::new(MeshAsset::new(mesh.normalized())?))
}

/// Builds the posed objects of a sequence: the target on its constant-speed
/// spline track, the distractor trailing it along the same curve.
pub fn build_scene(config: &SequenceConfig, catalog: &ObjectCatalog) -> Result<SceneTrack> {
    config.validate(catalog)?;
    let camera = Camera::new(config.vfov_deg, config.resolution)?;
    let spline = Spline::catmull_rom(config.control_points);
    let params = constant_speed_params(&spline, config.n_frames)?;
    let table = ArcTable::build(&spline);
    let midpoint = spline.eval(table.param_at(0.5 * table.total()))?;
    let radius = object_radius(&camera, config.object_scale, -midpoint.z);
    let speed = config.attributes.rotation_speed;

    let target_entry = catalog.instance(&config.object_instance_id)?;
    let positions: Vec<Vec3> = params
        .iter()
        .map(|&t| spline.eval(t))
        .collect::<Result<_>>()?;
    let mut objects = vec![SceneObject {
        id: ObjectId::Target,
        asset: load_asset(catalog, target_entry)?,
        material: material_for(target_entry, config.attributes.transparency_level)?,
        scale: radius,
        track: PoseTrack::new(positions, config.rotation_axis, speed, config.initial_orientation)?,
    }];

    if let Some(id) = &config.distractor_instance_id {
        let entry = catalog.instance(id)?;
        let mut rng = seeded(derive_seed(config.seed, 1));
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let offset = Vec3::new(angle.cos(), angle.sin(), 0.0) * (DISTRACTOR_OFFSET_RADII * radius);
        let spin = Quat::from_axis_angle(Vec3::Y, rng.gen_range(0.0..std::f64::consts::TAU));
        let positions = lagged_track(&spline, &params, DISTRACTOR_LAG, offset);
        objects.push(SceneObject {
            id: ObjectId::Distractor,
            asset: load_asset(catalog, entry)?,
            material: material_for(entry, config.attributes.transparency_level)?,
            scale: radius,
            track: PoseTrack::new(
                positions,
                config.rotation_axis,
                speed,
                spin * config.initial_orientation,
            )?,
        });
    }
    Ok(SceneTrack::new(objects))
}

/// Result of rendering one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutput {
    pub dir: PathBuf,
    pub annotations: Vec<FrameAnnotation>,
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Renders a sequence into `output_dir`, which receives `frames/`,
/// `masks/target/`, `masks/distractor/`, the ground-truth text files,
/// `attributes.json` and finally `meta.json`.
///
/// Frames render in parallel on the current rayon pool; the output does not
/// depend on the pool size.
pub fn render_sequence(
    config: &SequenceConfig,
    corpus: &BackgroundCorpus,
    catalog: &ObjectCatalog,
    output_dir: &Path,
    settings: &RenderSettings,
) -> Result<SequenceOutput> {
    if settings.spp == 0 {
        return Err(Error::InvalidArgument("spp must be at least 1".into()));
    }
    let entry = corpus.entry(&config.background_id)?;
    if config.n_frames > entry.frames {
        return Err(Error::FrameCountMismatch {
            sequence: format!("{} (background {})", config.id, entry.id),
            expected: config.n_frames,
            found: entry.frames,
        });
    }
    let background_frames: Vec<PathBuf> = (0..config.n_frames)
        .map(|k| corpus.frame_path(entry, k))
        .collect();
    if let Some(missing) = background_frames.iter().find(|p| !p.is_file()) {
        return Err(Error::MissingBackgroundFrame(missing.clone()));
    }
    let scene = build_scene(config, catalog)?;
    let camera = Camera::new(config.vfov_deg, config.resolution)?;
    let occluder = StripeOccluder::new(config.attributes.occlusion_stripes, config.resolution.width);
    let frame_settings = FrameSettings {
        spp: settings.spp,
        shutter_fraction: BLUR_SHUTTER[config.attributes.blur_level as usize],
        transport: settings.transport,
        seed: config.seed,
    };

    let meta_path = output_dir.join(META_FILE);
    if meta_path.exists() {
        std::fs::remove_file(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    }
    for sub in [FRAMES_DIR, TARGET_MASK_DIR, DISTRACTOR_MASK_DIR] {
        create_dir(&output_dir.join(sub))?;
    }

    let annotations = background_frames
        .par_iter()
        .enumerate()
        .map(|(k, bg_path)| {
            let image = pnm::read_ppm(bg_path)?;
            let backdrop = Backdrop::new(image, &camera);
            let mut buffers = render_frame(&scene, &camera, &backdrop, k, &frame_settings);
            composite_occluder(&mut buffers, &occluder, k, settings.mask_mode);
            pnm::write_ppm(&frame_path(output_dir, k), &buffers.rgb)?;
            pnm::write_pgm(&target_mask_path(output_dir, k), &buffers.target_mask.to_gray())?;
            pnm::write_pgm(
                &distractor_mask_path(output_dir, k),
                &buffers.distractor_mask.to_gray(),
            )?;
            Ok(FrameAnnotation::from_masks(
                k,
                &buffers.target_mask,
                &buffers.distractor_mask,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    annotate::write_groundtruth(&annotations, output_dir)?;
    annotate::write_attributes(
        output_dir,
        &SequenceAttributes::new(&config.id, &config.attributes, config.study),
    )?;
    write_json(
        &meta_path,
        &SequenceMeta {
            format: META_FORMAT.to_string(),
            config: config.clone(),
            render: *settings,
            frames_written: config.n_frames,
        },
    )?;
    Ok(SequenceOutput {
        dir: output_dir.to_path_buf(),
        annotations,
    })
}

/// True when `dir` holds a finished render of exactly this config: a
/// readable `meta.json` echoing it and every frame and mask file present.
pub fn is_complete(dir: &Path, config: &SequenceConfig, settings: &RenderSettings) -> bool {
    let Ok(meta) = read_json::<SequenceMeta>(&dir.join(META_FILE)) else {
        return false;
    };
    meta.format == META_FORMAT
        && &meta.config == config
        && &meta.render == settings
        && meta.frames_written == config.n_frames
        && (0..config.n_frames).all(|k| {
            frame_path(dir, k).is_file()
                && target_mask_path(dir, k).is_file()
                && distractor_mask_path(dir, k).is_file()
        })
        && dir.join(annotate::GROUNDTRUTH_FILE).is_file()
}

pub fn read_meta(dir: &Path) -> Result<SequenceMeta> {
    read_json(&dir.join(META_FILE))
}
