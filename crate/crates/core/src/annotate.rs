//! Ground truth derived from ID masks: tight boxes, per-frame annotations
//! and their text serialization.
//!
//! Boxes use 0-indexed pixel coordinates with the origin at the top-left
//! corner. A box `(x, y, w, h)` covers pixel columns `x..x+w` and rows
//! `y..y+h`. `groundtruth.txt` holds one `x,y,w,h` line per frame, with
//! `nan,nan,nan,nan` for frames where the object is not visible.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{read_json, write_json, Error, Result};
use crate::seqplan::{AttributeLevels, StudyCell};

pub const GROUNDTRUTH_FILE: &str = "groundtruth.txt";
pub const DISTRACTOR_GROUNDTRUTH_FILE: &str = "groundtruth_distractor.txt";
pub const ATTRIBUTES_FILE: &str = "attributes.json";

/// Binary mask with one byte per pixel holding 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Mask {
        Mask {
            width,
            height,
            data: vec![0; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize] != 0
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        self.data[y as usize * self.width as usize + x as usize] = on as u8;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// 8-bit image with 255 for set pixels.
    pub fn to_gray(&self) -> crate::pnm::GrayImage {
        crate::pnm::GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v != 0 { 255 } else { 0 }).collect(),
        }
    }

    /// Inverse of [`Mask::to_gray`]; any nonzero value counts as set.
    pub fn from_gray(img: &crate::pnm::GrayImage) -> Mask {
        Mask {
            width: img.width,
            height: img.height,
            data: img.data.iter().map(|&v| (v != 0) as u8).collect(),
        }
    }
}

/// Integer pixel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aabb {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Aabb {
    pub fn contains(&self, px: u32, py: u32) -> bool {
        px >= self.x && px < self.x + self.w && py >= self.y && py < self.y + self.h
    }
}

/// Tightest box around the set pixels, `None` for an empty mask.
pub fn mask_to_bbox(mask: &Mask) -> Option<Aabb> {
    let w = mask.width as usize;
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0u32, 0u32);
    for (y, row) in mask.data.chunks_exact(w.max(1)).enumerate() {
        let Some(first) = row.iter().position(|&v| v != 0) else {
            continue;
        };
        let last = row.iter().rposition(|&v| v != 0).unwrap_or(first);
        x0 = x0.min(first as u32);
        x1 = x1.max(last as u32);
        y0 = y0.min(y as u32);
        y1 = y as u32;
    }
    (x0 != u32::MAX).then(|| Aabb {
        x: x0,
        y: y0,
        w: x1 - x0 + 1,
        h: y1 - y0 + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameAnnotation {
    pub frame_index: usize,
    pub target_box: Option<Aabb>,
    pub distractor_box: Option<Aabb>,
    pub target_visible: bool,
    pub distractor_visible: bool,
}

impl FrameAnnotation {
    pub fn from_masks(frame_index: usize, target: &Mask, distractor: &Mask) -> FrameAnnotation {
        let target_box = mask_to_bbox(target);
        let distractor_box = mask_to_bbox(distractor);
        FrameAnnotation {
            frame_index,
            target_box,
            distractor_box,
            target_visible: target_box.is_some(),
            distractor_visible: distractor_box.is_some(),
        }
    }
}

pub fn format_box(b: Option<Aabb>) -> String {
    match b {
        Some(b) => format!("{},{},{},{}", b.x, b.y, b.w, b.h),
        None => "nan,nan,nan,nan".to_string(),
    }
}

fn format_boxes(boxes: impl Iterator<Item = Option<Aabb>>) -> String {
    let mut out = String::new();
    for b in boxes {
        let _ = writeln!(out, "{}", format_box(b));
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `groundtruth.txt` and `groundtruth_distractor.txt`.
pub fn write_groundtruth(annotations: &[FrameAnnotation], dir: &Path) -> Result<()> {
    for (i, a) in annotations.iter().enumerate() {
        if a.frame_index != i {
            return Err(Error::InvalidArgument(format!(
                "annotation {i} has frame index {}",
                a.frame_index
            )));
        }
    }
    write_text(
        &dir.join(GROUNDTRUTH_FILE),
        &format_boxes(annotations.iter().map(|a| a.target_box)),
    )?;
    write_text(
        &dir.join(DISTRACTOR_GROUNDTRUTH_FILE),
        &format_boxes(annotations.iter().map(|a| a.distractor_box)),
    )
}

/// Parses `x,y,w,h` integer lines; `nan` boxes become `None`. Errors carry the
/// 1-based line number.
pub fn parse_groundtruth(text: &str) -> std::result::Result<Vec<Option<Aabb>>, (usize, String)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| parse_box_line(line).map_err(|m| (i + 1, m)))
        .collect()
}

fn parse_box_line(line: &str) -> std::result::Result<Option<Aabb>, String> {
    let fields: Vec<&str> = line.trim().split(',').map(str::trim).collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 comma-separated fields, got {}", fields.len()));
    }
    if fields.iter().all(|f| f.eq_ignore_ascii_case("nan")) {
        return Ok(None);
    }
    let mut v = [0u32; 4];
    for (slot, f) in v.iter_mut().zip(&fields) {
        *slot = f.parse().map_err(|_| format!("bad box field {f:?}"))?;
    }
    if v[2] == 0 || v[3] == 0 {
        return Err("box width and height must be at least 1".into());
    }
    Ok(Some(Aabb {
        x: v[0],
        y: v[1],
        w: v[2],
        h: v[3],
    }))
}

pub fn read_groundtruth(path: &Path) -> Result<Vec<Option<Aabb>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_groundtruth(&text).map_err(|(line, message)| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Reads both ground-truth files back into annotations.
pub fn read_annotations(dir: &Path) -> Result<Vec<FrameAnnotation>> {
    let target = read_groundtruth(&dir.join(GROUNDTRUTH_FILE))?;
    let distractor = read_groundtruth(&dir.join(DISTRACTOR_GROUNDTRUTH_FILE))?;
    if target.len() != distractor.len() {
        return Err(Error::FrameCountMismatch {
            sequence: dir.display().to_string(),
            expected: target.len(),
            found: distractor.len(),
        });
    }
    Ok(target
        .into_iter()
        .zip(distractor)
        .enumerate()
        .map(|(i, (t, d))| FrameAnnotation {
            frame_index: i,
            target_box: t,
            distractor_box: d,
            target_visible: t.is_some(),
            distractor_visible: d.is_some(),
        })
        .collect())
}

/// Contents of `attributes.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceAttributes {
    pub sequence_id: String,
    pub attributes: AttributeLevels,
    pub tags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyCell>,
}

impl SequenceAttributes {
    pub fn new(sequence_id: &str, attributes: &AttributeLevels, study: Option<StudyCell>) -> Self {
        SequenceAttributes {
            sequence_id: sequence_id.to_string(),
            attributes: attributes.clone(),
            tags: attributes.tags(),
            study,
        }
    }
}

pub fn write_attributes(dir: &Path, attributes: &SequenceAttributes) -> Result<()> {
    write_json(&dir.join(ATTRIBUTES_FILE), attributes)
}

pub fn read_attributes(dir: &Path) -> Result<SequenceAttributes> {
    read_json(&dir.join(ATTRIBUTES_FILE))
}
