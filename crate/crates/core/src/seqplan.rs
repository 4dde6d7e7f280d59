//! Sequence recipes and dataset plans.
//!
//! A [`SequenceConfig`] fully describes one rendered sequence. Plans are
//! built from a background corpus manifest and an object catalog manifest;
//! both are JSON documents described on [`BackgroundCorpus`] and
//! [`ObjectCatalog`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{read_json, write_json, Error, Result};
use crate::math::{Quat, Vec3};
use crate::rng::{derive_seed, seeded};
use crate::trajectory::{sample_trajectory, Region};

/// Stripe counts of the four occlusion levels.
pub const STRIPE_LEVELS: [u32; 4] = [0, 7, 11, 20];
/// Rotation speeds of the four rotation levels, degrees per frame.
pub const ROTATION_LEVELS: [f64; 4] = [0.0, 1.3, 5.4, 10.6];
/// Transparency levels, 1 is the most visible.
pub const TRANSPARENCY_LEVELS: [u8; 4] = [1, 2, 3, 4];
/// Blur levels, 0 is no blur.
pub const BLUR_LEVELS: [u8; 4] = [0, 1, 2, 3];

pub const DEFAULT_N_FRAMES: usize = 51;
pub const DEFAULT_BLUR_PROBABILITY: f64 = 0.15;
pub const DEFAULT_OCCLUSION_PROBABILITY: f64 = 0.2;
pub const DEFAULT_DISTRACTOR_PROBABILITY: f64 = 0.3;

/// Number of background variations per (attribute, level) cell of the study.
pub const STUDY_VARIATIONS: usize = 5;
/// Transparency level used when transparency is not the studied attribute.
pub const STUDY_NEUTRAL_TRANSPARENCY: u8 = 2;

/// Batch mixing weights, transparent : opaque.
pub const TRANSPARENT_SHARE: u32 = 5;
pub const OPAQUE_SHARE: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeLevels {
    pub transparency_level: u8,
    pub blur_level: u8,
    pub occlusion_stripes: u32,
    /// Degrees per frame.
    pub rotation_speed: f64,
    pub distractor_present: bool,
}

impl AttributeLevels {
    pub fn validate(&self) -> Result<()> {
        if !TRANSPARENCY_LEVELS.contains(&self.transparency_level) {
            return Err(Error::InvalidArgument(format!(
                "transparency level {} not in 1..=4",
                self.transparency_level
            )));
        }
        if !BLUR_LEVELS.contains(&self.blur_level) {
            return Err(Error::InvalidArgument(format!(
                "blur level {} not in 0..=3",
                self.blur_level
            )));
        }
        if !STRIPE_LEVELS.contains(&self.occlusion_stripes) {
            return Err(Error::InvalidArgument(format!(
                "stripe count {} not in {STRIPE_LEVELS:?}",
                self.occlusion_stripes
            )));
        }
        if self.rotation_level().is_none() {
            return Err(Error::InvalidArgument(format!(
                "rotation speed {} not in {ROTATION_LEVELS:?}",
                self.rotation_speed
            )));
        }
        Ok(())
    }

    /// Index of the rotation speed in [`ROTATION_LEVELS`].
    pub fn rotation_level(&self) -> Option<usize> {
        ROTATION_LEVELS.iter().position(|&r| r == self.rotation_speed)
    }

    pub fn occlusion_level(&self) -> Option<usize> {
        STRIPE_LEVELS
            .iter()
            .position(|&s| s == self.occlusion_stripes)
    }

    /// Attribute tags used by per-attribute evaluation.
    pub fn tags(&self) -> Vec<String> {
        let mut tags = vec![format!("transparency-{}", self.transparency_level)];
        if self.blur_level > 0 {
            tags.push(format!("blur-{}", self.blur_level));
        }
        if let Some(level) = self.occlusion_level().filter(|&l| l > 0) {
            tags.push(format!("occlusion-{level}"));
        }
        if let Some(level) = self.rotation_level().filter(|&l| l > 0) {
            tags.push(format!("rotation-{level}"));
        }
        if self.distractor_present {
            tags.push("distractor".to_string());
        }
        tags
    }

    /// Every tag [`AttributeLevels::tags`] can produce.
    pub fn tag_vocabulary() -> Vec<String> {
        let mut v: Vec<String> = TRANSPARENCY_LEVELS
            .iter()
            .map(|l| format!("transparency-{l}"))
            .collect();
        v.extend((1..4).map(|l| format!("blur-{l}")));
        v.extend((1..4).map(|l| format!("occlusion-{l}")));
        v.extend((1..4).map(|l| format!("rotation-{l}")));
        v.push("distractor".to_string());
        v
    }
}

/// Attributes varied by the difficulty study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Transparency,
    Occlusion,
    Rotation,
    Blur,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [
        Attribute::Transparency,
        Attribute::Occlusion,
        Attribute::Rotation,
        Attribute::Blur,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Transparency => "transparency",
            Attribute::Occlusion => "occlusion",
            Attribute::Rotation => "rotation",
            Attribute::Blur => "blur",
        }
    }

    /// Attribute levels with this attribute at `level` (0..4) and the others
    /// pinned to their neutral value.
    pub fn levels_at(self, level: usize) -> AttributeLevels {
        let mut a = AttributeLevels {
            transparency_level: STUDY_NEUTRAL_TRANSPARENCY,
            blur_level: 0,
            occlusion_stripes: 0,
            rotation_speed: 0.0,
            distractor_present: false,
        };
        match self {
            Attribute::Transparency => a.transparency_level = TRANSPARENCY_LEVELS[level],
            Attribute::Occlusion => a.occlusion_stripes = STRIPE_LEVELS[level],
            Attribute::Rotation => a.rotation_speed = ROTATION_LEVELS[level],
            Attribute::Blur => a.blur_level = BLUR_LEVELS[level],
        }
        a
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Position of a study sequence in the attribute x level grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyCell {
    pub attribute: Attribute,
    pub level: usize,
    pub variation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            width: 320,
            height: 180,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub id: String,
    pub seed: u64,
    pub background_id: String,
    pub object_instance_id: String,
    pub distractor_instance_id: Option<String>,
    pub attributes: AttributeLevels,
    pub control_points: [Vec3; 4],
    /// Unit axis the rotation speed is applied about.
    pub rotation_axis: Vec3,
    pub initial_orientation: Quat,
    /// Object diameter as a fraction of the frame's shorter side, measured
    /// at the trajectory midpoint.
    pub object_scale: f64,
    pub n_frames: usize,
    pub resolution: Resolution,
    pub vfov_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyCell>,
}

impl SequenceConfig {
    pub fn validate(&self, catalog: &ObjectCatalog) -> Result<()> {
        self.attributes.validate()?;
        if self.n_frames < 2 {
            return Err(Error::InvalidArgument(format!(
                "{}: n_frames must be at least 2",
                self.id
            )));
        }
        if self.resolution.width == 0 || self.resolution.height == 0 {
            return Err(Error::InvalidArgument(format!("{}: empty resolution", self.id)));
        }
        if self.distractor_instance_id.is_some() != self.attributes.distractor_present {
            return Err(Error::InvalidArgument(format!(
                "{}: distractor flag disagrees with distractor instance",
                self.id
            )));
        }
        let target = catalog.instance(&self.object_instance_id)?;
        if let Some(d) = &self.distractor_instance_id {
            let distractor = catalog.instance(d)?;
            if distractor.type_id == target.type_id {
                return Err(Error::InvalidArgument(format!(
                    "{}: distractor shares object type {}",
                    self.id, target.type_id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundEntry {
    pub id: String,
    /// Directory of `%06d.ppm` frames, relative to the manifest.
    #[serde(default)]
    pub path: PathBuf,
    pub frames: usize,
}

/// Background corpus manifest:
///
/// ```json
/// { "version": "v1", "sequences": [ { "id": "bg0", "path": "bg0", "frames": 60 } ] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundCorpus {
    #[serde(default)]
    pub version: String,
    pub sequences: Vec<BackgroundEntry>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub root: PathBuf,
    #[serde(skip)]
    pub source: Option<PathBuf>,
}

impl BackgroundCorpus {
    pub fn load(path: &Path) -> Result<Self> {
        let mut corpus: BackgroundCorpus = read_json(path)?;
        corpus.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        corpus.source = Some(path.to_path_buf());
        corpus.check()?;
        Ok(corpus)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for s in &self.sequences {
            if !seen.insert(&s.id) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate background id {:?}",
                    s.id
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn entry(&self, id: &str) -> Result<&BackgroundEntry> {
        self.sequences
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownBackground(id.to_string()))
    }

    pub fn frame_path(&self, entry: &BackgroundEntry, frame: usize) -> PathBuf {
        self.root.join(&entry.path).join(format!("{frame:06}.ppm"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Volume {
    Full,
    Empty,
}

/// Per-instance material overrides.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MaterialOverride {
    pub ior: Option<f64>,
    pub tint: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub instance_id: String,
    pub type_id: String,
    pub mesh: PathBuf,
    pub volume: Volume,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialOverride>,
}

/// Object catalog manifest:
///
/// ```json
/// { "version": "v1", "instances": [
///   { "instance_id": "cup-a", "type_id": "cup", "mesh": "cup-a.obj", "volume": "empty" } ] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectCatalog {
    #[serde(default)]
    pub version: String,
    pub instances: Vec<CatalogEntry>,
    #[serde(skip)]
    pub root: PathBuf,
    #[serde(skip)]
    pub source: Option<PathBuf>,
}

impl ObjectCatalog {
    pub fn load(path: &Path) -> Result<Self> {
        let mut catalog: ObjectCatalog = read_json(path)?;
        catalog.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        catalog.source = Some(path.to_path_buf());
        catalog.check()?;
        Ok(catalog)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.instances {
            if !seen.insert(&e.instance_id) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate instance id {:?}",
                    e.instance_id
                )));
            }
        }
        Ok(())
    }

    pub fn instance(&self, id: &str) -> Result<&CatalogEntry> {
        self.instances
            .iter()
            .find(|e| e.instance_id == id)
            .ok_or_else(|| Error::UnknownInstance(id.to_string()))
    }

    pub fn mesh_path(&self, entry: &CatalogEntry) -> PathBuf {
        self.root.join(&entry.mesh)
    }

    /// Instances grouped by type, both in sorted order.
    pub fn by_type(&self) -> BTreeMap<&str, Vec<&CatalogEntry>> {
        let mut map: BTreeMap<&str, Vec<&CatalogEntry>> = BTreeMap::new();
        for e in &self.instances {
            map.entry(e.type_id.as_str()).or_default().push(e);
        }
        for v in map.values_mut() {
            v.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
        }
        map
    }

    pub fn type_count(&self) -> usize {
        self.by_type().len()
    }
}

/// Knobs of the sampling policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    pub n_frames: usize,
    pub resolution: Resolution,
    pub vfov_deg: f64,
    pub blur_probability: f64,
    pub occlusion_probability: f64,
    pub distractor_probability: f64,
    /// Range the object scale fraction is drawn from.
    pub scale_range: [f64; 2],
    pub safe_region: Region,
}

impl Default for GenerationParams {
    fn default() -> Self {
        let resolution = Resolution::default();
        let vfov_deg = 50.0;
        GenerationParams {
            n_frames: DEFAULT_N_FRAMES,
            resolution,
            vfov_deg,
            blur_probability: DEFAULT_BLUR_PROBABILITY,
            occlusion_probability: DEFAULT_OCCLUSION_PROBABILITY,
            distractor_probability: DEFAULT_DISTRACTOR_PROBABILITY,
            scale_range: [0.1, 0.3],
            safe_region: safe_region_for(resolution, vfov_deg, 0.3),
        }
    }
}

impl GenerationParams {
    /// Params for another resolution, with the safe region recomputed.
    pub fn with_resolution(mut self, resolution: Resolution) -> Self {
        self.resolution = resolution;
        self.safe_region = safe_region_for(resolution, self.vfov_deg, self.scale_range[1]);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !(prob_ok(self.blur_probability)
            && prob_ok(self.occlusion_probability)
            && prob_ok(self.distractor_probability))
        {
            return Err(Error::InvalidArgument("probabilities must be in [0, 1]".into()));
        }
        if self.n_frames < 2 {
            return Err(Error::InvalidArgument("n_frames must be at least 2".into()));
        }
        if !(self.scale_range[0] > 0.0 && self.scale_range[0] <= self.scale_range[1]) {
            return Err(Error::InvalidArgument(format!(
                "bad scale range {:?}",
                self.scale_range
            )));
        }
        if !(self.vfov_deg > 10.0 && self.vfov_deg < 120.0) {
            return Err(Error::InvalidArgument(format!(
                "vertical fov {} outside (10, 120)",
                self.vfov_deg
            )));
        }
        Ok(())
    }
}

/// Near and far depth of the motion volume in front of the camera.
pub const MOTION_NEAR: f64 = 4.0;
pub const MOTION_FAR: f64 = 6.0;
/// Margin for Catmull-Rom overshoot beyond the control-point hull.
const OVERSHOOT_MARGIN: f64 = 1.2;

/// Control-point region that keeps an object of scale fraction up to
/// `max_scale` inside the frame at every depth of the motion volume.
pub fn safe_region_for(resolution: Resolution, vfov_deg: f64, max_scale: f64) -> Region {
    let tan_half = (vfov_deg.to_radians() * 0.5).tan();
    let aspect = resolution.width as f64 / resolution.height as f64;
    let half_h = MOTION_NEAR * tan_half;
    let half_w = half_h * aspect;
    let shorter = 2.0 * MOTION_FAR * tan_half * aspect.min(1.0);
    let radius = 0.5 * max_scale * shorter;
    let ry = ((half_h - radius) / OVERSHOOT_MARGIN).max(0.05);
    let rx = ((half_w - radius) / OVERSHOOT_MARGIN).max(0.05);
    Region {
        min: Vec3::new(-rx, -ry, -MOTION_FAR),
        max: Vec3::new(rx, ry, -MOTION_NEAR),
    }
}

/// Unused backgrounds of a corpus; draws are without replacement.
#[derive(Debug, Clone)]
pub struct BackgroundPool<'a> {
    corpus: &'a BackgroundCorpus,
    remaining: Vec<usize>,
}

impl<'a> BackgroundPool<'a> {
    pub fn new(corpus: &'a BackgroundCorpus) -> Self {
        BackgroundPool {
            corpus,
            remaining: (0..corpus.sequences.len()).collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.remaining.len()
    }

    pub fn draw<R: Rng>(&mut self, rng: &mut R) -> Result<&'a BackgroundEntry> {
        if self.remaining.is_empty() {
            return Err(Error::BackgroundsDepleted);
        }
        let i = rng.gen_range(0..self.remaining.len());
        // swap_remove keeps the draw O(1) and stays deterministic
        let idx = self.remaining.swap_remove(i);
        Ok(&self.corpus.sequences[idx])
    }
}

fn uniform_unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Uniformly distributed rotation (Shoemake's subgroup algorithm).
fn uniform_rotation<R: Rng>(rng: &mut R) -> Quat {
    let u1: f64 = rng.gen();
    let u2 = rng.gen_range(0.0..std::f64::consts::TAU);
    let u3 = rng.gen_range(0.0..std::f64::consts::TAU);
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Quat {
        w: b * u3.cos(),
        x: a * u2.sin(),
        y: a * u2.cos(),
        z: b * u3.sin(),
    }
}

/// Uniform type, then uniform instance within it, so types are equiprobable.
fn sample_instance<'c, R: Rng>(
    rng: &mut R,
    by_type: &BTreeMap<&str, Vec<&'c CatalogEntry>>,
    exclude_type: Option<&str>,
) -> Option<&'c CatalogEntry> {
    let types: Vec<&Vec<&CatalogEntry>> = by_type
        .iter()
        .filter(|(t, _)| Some(**t) != exclude_type)
        .map(|(_, v)| v)
        .collect();
    if types.is_empty() {
        return None;
    }
    let group = types[rng.gen_range(0..types.len())];
    Some(group[rng.gen_range(0..group.len())])
}

/// Everything in a config that does not depend on attribute levels.
struct SharedDraw {
    background_id: String,
    object_instance_id: String,
    control_points: [Vec3; 4],
    rotation_axis: Vec3,
    initial_orientation: Quat,
    object_scale: f64,
}

fn draw_shared<R: Rng>(
    rng: &mut R,
    pool: &mut BackgroundPool,
    by_type: &BTreeMap<&str, Vec<&CatalogEntry>>,
    params: &GenerationParams,
) -> Result<(SharedDraw, String)> {
    let background = pool.draw(rng)?;
    let target = sample_instance(rng, by_type, None)
        .ok_or_else(|| Error::InvalidArgument("object catalog is empty".into()))?;
    let control_points = sample_trajectory(rng, &params.safe_region, params.n_frames)?;
    let rotation_axis = uniform_unit_vector(rng);
    let initial_orientation = uniform_rotation(rng);
    let [lo, hi] = params.scale_range;
    let object_scale = if hi > lo { rng.gen_range(lo..hi) } else { lo };
    Ok((
        SharedDraw {
            background_id: background.id.clone(),
            object_instance_id: target.instance_id.clone(),
            control_points,
            rotation_axis,
            initial_orientation,
            object_scale,
        },
        target.type_id.clone(),
    ))
}

/// Samples one sequence recipe under the dataset sampling policy.
///
/// All draws come from a generator seeded with `seed`, which is also stored
/// in the config and drives every later random choice (pixel jitter).
/// Transparency is uniform over levels 2..=4 and rotation uniform over the
/// three non-zero speeds; blur and occlusion are present with the configured
/// probabilities and uniform over their non-zero levels when present.
pub fn sample_sequence_config(
    seed: u64,
    id: impl Into<String>,
    pool: &mut BackgroundPool,
    catalog: &ObjectCatalog,
    params: &GenerationParams,
) -> Result<SequenceConfig> {
    params.validate()?;
    let by_type = catalog.by_type();
    if by_type.is_empty() {
        return Err(Error::InvalidArgument("object catalog is empty".into()));
    }
    if params.distractor_probability > 0.0 && by_type.len() < 2 {
        return Err(Error::NoDistractorType(by_type.len()));
    }
    if pool.remaining() == 0 {
        return Err(Error::BackgroundsDepleted);
    }

    let mut rng = seeded(seed);
    let (shared, target_type) = draw_shared(&mut rng, pool, &by_type, params)?;

    let distractor_present = rng.gen_bool(params.distractor_probability);
    let distractor_instance_id = if distractor_present {
        let d = sample_instance(&mut rng, &by_type, Some(&target_type))
            .ok_or(Error::NoDistractorType(by_type.len()))?;
        Some(d.instance_id.clone())
    } else {
        None
    };

    let transparency_level = TRANSPARENCY_LEVELS[rng.gen_range(1..4)];
    let blur_level = if rng.gen_bool(params.blur_probability) {
        BLUR_LEVELS[rng.gen_range(1..4)]
    } else {
        0
    };
    let occlusion_stripes = if rng.gen_bool(params.occlusion_probability) {
        STRIPE_LEVELS[rng.gen_range(1..4)]
    } else {
        0
    };
    let rotation_speed = ROTATION_LEVELS[rng.gen_range(1..4)];

    Ok(SequenceConfig {
        id: id.into(),
        seed,
        background_id: shared.background_id,
        object_instance_id: shared.object_instance_id,
        distractor_instance_id,
        attributes: AttributeLevels {
            transparency_level,
            blur_level,
            occlusion_stripes,
            rotation_speed,
            distractor_present,
        },
        control_points: shared.control_points,
        rotation_axis: shared.rotation_axis,
        initial_orientation: shared.initial_orientation,
        object_scale: shared.object_scale,
        n_frames: params.n_frames,
        resolution: params.resolution,
        vfov_deg: params.vfov_deg,
        study: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRef {
    pub path: Option<PathBuf>,
    pub version: String,
    pub entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanManifest {
    pub corpus: ManifestRef,
    pub catalog: ManifestRef,
    pub object_types: usize,
}

impl PlanManifest {
    fn new(corpus: &BackgroundCorpus, catalog: &ObjectCatalog) -> Self {
        PlanManifest {
            corpus: ManifestRef {
                path: corpus.source.clone(),
                version: corpus.version.clone(),
                entries: corpus.len(),
            },
            catalog: ManifestRef {
                path: catalog.source.clone(),
                version: catalog.version.clone(),
                entries: catalog.instances.len(),
            },
            object_types: catalog.type_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetPlan {
    pub global_seed: u64,
    pub manifest: PlanManifest,
    pub params: GenerationParams,
    pub sequences: Vec<SequenceConfig>,
}

impl DatasetPlan {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn total_frames(&self) -> usize {
        self.sequences.iter().map(|s| s.n_frames).sum()
    }
}

pub fn sequence_id(ordinal: usize) -> String {
    format!("seq_{ordinal:06}")
}

/// Samples `n_sequences` configs, each background used at most once.
pub fn build_dataset_plan(
    global_seed: u64,
    n_sequences: usize,
    corpus: &BackgroundCorpus,
    catalog: &ObjectCatalog,
    params: &GenerationParams,
) -> Result<DatasetPlan> {
    params.validate()?;
    if n_sequences > corpus.len() {
        return Err(Error::BackgroundsDepleted);
    }
    let mut pool = BackgroundPool::new(corpus);
    let sequences = (0..n_sequences)
        .map(|i| {
            sample_sequence_config(
                derive_seed(global_seed, i as u64),
                sequence_id(i),
                &mut pool,
                catalog,
                params,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetPlan {
        global_seed,
        manifest: PlanManifest::new(corpus, catalog),
        params: params.clone(),
        sequences,
    })
}

pub fn study_sequence_id(cell: &StudyCell) -> String {
    format!("{}_l{}_v{}", cell.attribute, cell.level, cell.variation)
}

/// Builds the 4 attributes x 4 levels x 5 variations difficulty study.
///
/// Each variation fixes background, object, trajectory, rotation axis and
/// scale; within it the sixteen configs differ only in the studied
/// attribute level. Distractors are disabled throughout.
pub fn build_attribute_study_plan(
    global_seed: u64,
    corpus: &BackgroundCorpus,
    catalog: &ObjectCatalog,
    params: &GenerationParams,
) -> Result<DatasetPlan> {
    params.validate()?;
    if corpus.len() < STUDY_VARIATIONS {
        return Err(Error::InsufficientBackgrounds {
            needed: STUDY_VARIATIONS,
            available: corpus.len(),
        });
    }
    let by_type = catalog.by_type();
    if by_type.is_empty() {
        return Err(Error::InvalidArgument("object catalog is empty".into()));
    }

    let mut pool = BackgroundPool::new(corpus);
    let variation_seed = derive_seed(global_seed, u64::MAX);
    let variations = (0..STUDY_VARIATIONS)
        .map(|v| {
            let mut rng = seeded(derive_seed(variation_seed, v as u64));
            draw_shared(&mut rng, &mut pool, &by_type, params).map(|(s, _)| s)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sequences = Vec::with_capacity(Attribute::ALL.len() * 4 * STUDY_VARIATIONS);
    for attribute in Attribute::ALL {
        for level in 0..4 {
            for (variation, shared) in variations.iter().enumerate() {
                let ordinal = sequences.len() as u64;
                let cell = StudyCell {
                    attribute,
                    level,
                    variation,
                };
                sequences.push(SequenceConfig {
                    id: study_sequence_id(&cell),
                    seed: derive_seed(global_seed, ordinal),
                    background_id: shared.background_id.clone(),
                    object_instance_id: shared.object_instance_id.clone(),
                    distractor_instance_id: None,
                    attributes: attribute.levels_at(level),
                    control_points: shared.control_points,
                    rotation_axis: shared.rotation_axis,
                    initial_orientation: shared.initial_orientation,
                    object_scale: shared.object_scale,
                    n_frames: params.n_frames,
                    resolution: params.resolution,
                    vfov_deg: params.vfov_deg,
                    study: Some(cell),
                });
            }
        }
    }
    Ok(DatasetPlan {
        global_seed,
        manifest: PlanManifest::new(corpus, catalog),
        params: params.clone(),
        sequences,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Transparent,
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub source: Source,
    pub sequence: usize,
    pub frame: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub entries: Vec<BatchEntry>,
}

impl BatchSpec {
    pub fn transparent_fraction(&self) -> f64 {
        let n = self
            .entries
            .iter()
            .filter(|e| e.source == Source::Transparent)
            .count();
        n as f64 / self.entries.len() as f64
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 48);
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("entry serializes"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedSequence {
    pub id: String,
    pub frames: usize,
}

/// Sequence index of a training source, `{ "sequences": [ {"id", "frames"} ] }`.
/// A background corpus manifest parses as one too.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleIndex {
    pub sequences: Vec<IndexedSequence>,
}

impl SampleIndex {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn from_plan(plan: &DatasetPlan) -> Self {
        SampleIndex {
            sequences: plan
                .sequences
                .iter()
                .map(|s| IndexedSequence {
                    id: s.id.clone(),
                    frames: s.n_frames,
                })
                .collect(),
        }
    }

    fn check(&self, side: &str) -> Result<()> {
        if self.sequences.is_empty() {
            return Err(Error::InvalidArgument(format!("{side} index is empty")));
        }
        if let Some(s) = self.sequences.iter().find(|s| s.frames == 0) {
            return Err(Error::InvalidArgument(format!(
                "{side} sequence {:?} has no frames",
                s.id
            )));
        }
        Ok(())
    }
}

/// Draws `batch_size` sample indices, each transparent with probability 5/8.
/// Sequences are uniform within the chosen source, frames uniform within
/// the chosen sequence.
pub fn mix_batches<R: Rng>(
    transparent: &SampleIndex,
    opaque: &SampleIndex,
    batch_size: usize,
    rng: &mut R,
) -> Result<BatchSpec> {
    transparent.check("transparent")?;
    opaque.check("opaque")?;
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    let total = TRANSPARENT_SHARE + OPAQUE_SHARE;
    let entries = (0..batch_size)
        .map(|_| {
            let (source, index) = if rng.gen_range(0..total) < TRANSPARENT_SHARE {
                (Source::Transparent, transparent)
            } else {
                (Source::Opaque, opaque)
            };
            let sequence = rng.gen_range(0..index.sequences.len());
            let frame = rng.gen_range(0..index.sequences[sequence].frames);
            BatchEntry {
                source,
                sequence,
                frame,
            }
        })
        .collect();
    Ok(BatchSpec { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn corpus(n: usize) -> BackgroundCorpus {
        BackgroundCorpus {
            version: "test".into(),
            sequences: (0..n)
                .map(|i| BackgroundEntry {
                    id: format!("bg{i:04}"),
                    path: format!("bg{i:04}").into(),
                    frames: 60,
                })
                .collect(),
            root: PathBuf::new(),
            source: None,
        }
    }

    pub(crate) fn catalog(types: usize, per_type: usize) -> ObjectCatalog {
        let mut instances = Vec::new();
        for t in 0..types {
            for i in 0..per_type {
                instances.push(CatalogEntry {
                    instance_id: format!("type{t}-{i}"),
                    type_id: format!("type{t}"),
                    mesh: format!("type{t}-{i}.obj").into(),
                    volume: if i % 2 == 0 { Volume::Full } else { Volume::Empty },
                    material: None,
                });
            }
        }
        ObjectCatalog {
            version: "test".into(),
            instances,
            root: PathBuf::new(),
            source: None,
        }
    }

    #[test]
    fn sampling_respects_exclusions_and_type_inequality() {
        let corpus = corpus(500);
        let catalog = catalog(5, 3);
        let mut pool = BackgroundPool::new(&corpus);
        let params = GenerationParams::default();
        for i in 0..500 {
            let c = sample_sequence_config(
                derive_seed(3, i),
                sequence_id(i as usize),
                &mut pool,
                &catalog,
                &params,
            )
            .unwrap();
            assert_ne!(c.attributes.transparency_level, 1);
            assert_ne!(c.attributes.rotation_speed, 0.0);
            c.validate(&catalog).unwrap();
        }
    }

    #[test]
    fn fourth_draw_from_three_backgrounds_is_depleted() {
        let corpus = corpus(3);
        let catalog = catalog(2, 1);
        let mut pool = BackgroundPool::new(&corpus);
        let params = GenerationParams::default();
        for i in 0..3 {
            sample_sequence_config(i, "s", &mut pool, &catalog, &params).unwrap();
        }
        let err = sample_sequence_config(3, "s", &mut pool, &catalog, &params).unwrap_err();
        assert!(matches!(err, Error::BackgroundsDepleted));
        assert!(err.to_string().contains("backgrounds depleted"));
    }

    #[test]
    fn single_type_catalog_cannot_supply_distractors() {
        let corpus = corpus(3);
        let catalog = catalog(1, 4);
        let mut pool = BackgroundPool::new(&corpus);
        let err = sample_sequence_config(0, "s", &mut pool, &catalog, &GenerationParams::default())
            .unwrap_err();
        assert!(matches!(err, Error::NoDistractorType(1)));
        assert!(err.to_string().contains("no valid distractor type"));

        let params = GenerationParams {
            distractor_probability: 0.0,
            ..GenerationParams::default()
        };
        let c = sample_sequence_config(0, "s", &mut pool, &catalog, &params).unwrap();
        assert!(c.distractor_instance_id.is_none());
    }

    #[test]
    fn object_types_are_equiprobable_despite_unequal_instance_counts() {
        let corpus = corpus(6000);
        let mut cat = catalog(2, 1);
        // type1 gets five extra instances
        for i in 1..6 {
            cat.instances.push(CatalogEntry {
                instance_id: format!("type1-{i}"),
                type_id: "type1".into(),
                mesh: "x.obj".into(),
                volume: Volume::Full,
                material: None,
            });
        }
        let params = GenerationParams::default();
        let plan = build_dataset_plan(11, 6000, &corpus, &cat, &params).unwrap();
        let type0 = plan
            .sequences
            .iter()
            .filter(|s| s.object_instance_id.starts_with("type0"))
            .count();
        let frac = type0 as f64 / 6000.0;
        assert!((frac - 0.5).abs() < 0.025, "type0 fraction {frac}");
    }

    #[test]
    fn plan_is_deterministic_and_exhausts_corpus() {
        let corpus = corpus(20);
        let catalog = catalog(3, 2);
        let params = GenerationParams::default();
        let a = build_dataset_plan(9, 20, &corpus, &catalog, &params).unwrap();
        let b = build_dataset_plan(9, 20, &corpus, &catalog, &params).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let used: BTreeSet<_> = a.sequences.iter().map(|s| &s.background_id).collect();
        assert_eq!(used.len(), 20);
        let seeds: BTreeSet<_> = a.sequences.iter().map(|s| s.seed).collect();
        assert_eq!(seeds.len(), 20);
    }

    #[test]
    fn empty_plan_is_valid() {
        let corpus = corpus(2);
        let catalog = catalog(2, 1);
        let plan = build_dataset_plan(1, 0, &corpus, &catalog, &GenerationParams::default())
            .unwrap();
        assert!(plan.sequences.is_empty());
        assert_eq!(plan.manifest.corpus.entries, 2);
        assert_eq!(plan.manifest.object_types, 2);
        let back: DatasetPlan = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(back, plan);
    }

    #[test]
    fn oversized_plan_is_rejected() {
        let corpus = corpus(2);
        let catalog = catalog(2, 1);
        assert!(build_dataset_plan(1, 3, &corpus, &catalog, &GenerationParams::default()).is_err());
    }

    #[test]
    fn study_plan_shape() {
        let corpus = corpus(7);
        let catalog = catalog(3, 2);
        let plan =
            build_attribute_study_plan(5, &corpus, &catalog, &GenerationParams::default()).unwrap();
        assert_eq!(plan.sequences.len(), 80);
        let mut per_bg: BTreeMap<&str, usize> = BTreeMap::new();
        for s in &plan.sequences {
            *per_bg.entry(&s.background_id).or_default() += 1;
        }
        assert_eq!(per_bg.len(), 5);
        assert!(per_bg.values().all(|&n| n == 16));

        for v in 0..STUDY_VARIATIONS {
            let group: Vec<_> = plan
                .sequences
                .iter()
                .filter(|s| s.study.unwrap().variation == v)
                .collect();
            assert_eq!(group.len(), 16);
            assert!(group
                .iter()
                .all(|s| s.control_points == group[0].control_points
                    && s.object_instance_id == group[0].object_instance_id
                    && s.background_id == group[0].background_id));
            let mut levels: Vec<u8> = group
                .iter()
                .filter(|s| s.study.unwrap().attribute == Attribute::Transparency)
                .map(|s| s.attributes.transparency_level)
                .collect();
            levels.sort();
            assert_eq!(levels, vec![1, 2, 3, 4]);
        }
        // non-studied attributes stay neutral
        for s in &plan.sequences {
            let cell = s.study.unwrap();
            let a = &s.attributes;
            if cell.attribute != Attribute::Transparency {
                assert_eq!(a.transparency_level, STUDY_NEUTRAL_TRANSPARENCY);
            }
            if cell.attribute != Attribute::Blur {
                assert_eq!(a.blur_level, 0);
            }
            if cell.attribute != Attribute::Occlusion {
                assert_eq!(a.occlusion_stripes, 0);
            }
            if cell.attribute != Attribute::Rotation {
                assert_eq!(a.rotation_speed, 0.0);
            }
            assert!(!a.distractor_present);
        }
    }

    #[test]
    fn study_needs_five_backgrounds() {
        let err = build_attribute_study_plan(
            5,
            &corpus(4),
            &catalog(2, 1),
            &GenerationParams::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientBackgrounds {
                needed: 5,
                available: 4
            }
        ));
    }

    fn index(n: usize, frames: usize) -> SampleIndex {
        SampleIndex {
            sequences: (0..n)
                .map(|i| IndexedSequence {
                    id: format!("s{i}"),
                    frames,
                })
                .collect(),
        }
    }

    #[test]
    fn unit_batch_and_empty_index() {
        let mut rng = seeded(1);
        let b = mix_batches(&index(3, 10), &index(2, 5), 1, &mut rng).unwrap();
        assert_eq!(b.entries.len(), 1);
        let e = b.entries[0];
        match e.source {
            Source::Transparent => assert!(e.sequence < 3 && e.frame < 10),
            Source::Opaque => assert!(e.sequence < 2 && e.frame < 5),
        }
        assert!(mix_batches(&index(3, 10), &index(0, 5), 4, &mut rng).is_err());
        assert!(mix_batches(&index(3, 10), &index(2, 5), 0, &mut rng).is_err());
    }

    #[test]
    fn attribute_validation_rejects_off_grid_levels() {
        let mut a = Attribute::Rotation.levels_at(2);
        assert!(a.validate().is_ok());
        a.rotation_speed = 2.0;
        assert!(a.validate().is_err());
        let mut b = Attribute::Occlusion.levels_at(1);
        b.occlusion_stripes = 8;
        assert!(b.validate().is_err());
    }

    #[test]
    fn tags_stay_in_vocabulary() {
        let vocab = AttributeLevels::tag_vocabulary();
        for attribute in Attribute::ALL {
            for level in 0..4 {
                for t in attribute.levels_at(level).tags() {
                    assert!(vocab.contains(&t), "{t}");
                }
            }
        }
    }
}
