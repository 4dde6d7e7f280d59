//! Frame synthesis: camera rays, dielectric shading over a background video
//! frame, motion blur, stripe occluders, ID masks and on-disk sequences.

mod backdrop;
mod camera;
mod frame;
mod occluder;
mod scene;
mod sequence;

pub use backdrop::{backdrop_radiance, Backdrop, BACKDROP_DISTANCE};
pub use camera::Camera;
pub use frame::{render_frame, shutter_times, FrameBuffers, FrameSettings, BLUR_SHUTTER, TEMPORAL_SAMPLES};
pub use occluder::{
    composite_occluder, count_stripe_bands, MaskMode, StripeOccluder, STRIPE_PALETTE,
    STRIPE_VELOCITY,
};
pub use scene::{MeshAsset, PlacedObject, SceneObject, SceneSnapshot, SceneTrack, RAY_EPSILON_SCALE};
pub use sequence::{
    build_scene, distractor_mask_path, frame_path, is_complete, object_radius, read_meta,
    render_sequence, target_mask_path, RenderSettings, SequenceMeta, SequenceOutput,
    DISTRACTOR_MASK_DIR, FRAMES_DIR, META_FILE, TARGET_MASK_DIR,
};

/// Runs `f` on a dedicated pool of `workers` threads (all cores for 0).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> crate::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
