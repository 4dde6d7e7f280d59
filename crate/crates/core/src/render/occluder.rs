use serde::{Deserialize, Serialize};

use super::FrameBuffers;

/// Horizontal stripe speed in pixels per frame.
pub const STRIPE_VELOCITY: i64 = 3;

pub const STRIPE_PALETTE: [[u8; 3]; 6] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
];

/// Whether masks keep pixels hidden behind the stripes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskMode {
    /// Full object silhouette regardless of stripes.
    #[default]
    Amodal,
    /// Only the pixels left visible by the stripes.
    Modal,
}

/// Opaque vertical stripes, evenly spaced across the frame and moving to
/// the right with wrap-around.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripeOccluder {
    pub stripe_count: u32,
    pub stripe_width: u32,
    pub velocity: i64,
    pub palette: Vec<[u8; 3]>,
    frame_width: u32,
}

impl StripeOccluder {
    /// Stripe width of 1/40 of the frame width, at least one pixel.
    pub fn new(stripe_count: u32, frame_width: u32) -> StripeOccluder {
        StripeOccluder {
            stripe_count,
            stripe_width: ((frame_width as f64 / 40.0).round() as u32).max(1),
            velocity: STRIPE_VELOCITY,
            palette: STRIPE_PALETTE.to_vec(),
            frame_width,
        }
    }

    /// Left column of stripe `i` at `frame_index`.
    pub fn stripe_start(&self, i: u32, frame_index: usize) -> u32 {
        let w = self.frame_width as i64;
        let base = (i as u64 * self.frame_width as u64 / self.stripe_count.max(1) as u64) as i64;
        (base + self.velocity * frame_index as i64).rem_euclid(w) as u32
    }

    /// Stripe index covering column `x`, if any.
    pub fn stripe_at(&self, x: u32, frame_index: usize) -> Option<u32> {
        (0..self.stripe_count).find(|&i| {
            let start = self.stripe_start(i, frame_index);
            (x + self.frame_width - start) % self.frame_width < self.stripe_width
        })
    }

    /// Per-column stripe index for one frame.
    pub fn column_map(&self, frame_index: usize) -> Vec<Option<u32>> {
        let mut cols = vec![None; self.frame_width as usize];
        for i in 0..self.stripe_count {
            let start = self.stripe_start(i, frame_index);
            for k in 0..self.stripe_width.min(self.frame_width) {
                cols[((start + k) % self.frame_width) as usize] = Some(i);
            }
        }
        cols
    }

    pub fn color(&self, stripe: u32) -> [u8; 3] {
        self.palette[stripe as usize % self.palette.len()]
    }
}

/// Paints the stripes of `frame_index` over the frame. Masks are left alone
/// in [`MaskMode::Amodal`] and cleared under the stripes in [`MaskMode::Modal`].
pub fn composite_occluder(
    buffers: &mut FrameBuffers,
    occluder: &StripeOccluder,
    frame_index: usize,
    mode: MaskMode,
) {
    if occluder.stripe_count == 0 {
        return;
    }
    let cols = occluder.column_map(frame_index);
    for (x, stripe) in cols.iter().enumerate() {
        let Some(stripe) = *stripe else { continue };
        let color = occluder.color(stripe);
        for y in 0..buffers.rgb.height {
            buffers.rgb.set(x as u32, y, color);
            if mode == MaskMode::Modal {
                buffers.target_mask.set(x as u32, y, false);
                buffers.distractor_mask.set(x as u32, y, false);
            }
        }
    }
}

/// Number of separate stripe runs along one image row, treating the row as
/// circular so a stripe split by the right edge counts once.
pub fn count_stripe_bands(row: &[bool]) -> usize {
    let n = row.len();
    if n == 0 || row.iter().all(|&b| b) {
        return usize::from(n > 0);
    }
    (0..n).filter(|&i| row[i] && !row[(i + n - 1) % n]).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::Mask;
    use crate::pnm::RgbImage;

    fn blank(w: u32, h: u32) -> FrameBuffers {
        FrameBuffers {
            rgb: RgbImage::filled(w, h, [1, 2, 3]),
            target_mask: Mask::new(w, h),
            distractor_mask: Mask::new(w, h),
        }
    }

    fn stripe_row(b: &FrameBuffers) -> Vec<bool> {
        (0..b.rgb.width).map(|x| b.rgb.get(x, 0) != [1, 2, 3]).collect()
    }

    #[test]
    fn zero_stripes_is_identity() {
        let mut b = blank(320, 10);
        let before = b.clone();
        composite_occluder(&mut b, &StripeOccluder::new(0, 320), 5, MaskMode::Amodal);
        assert_eq!(b, before);
    }

    #[test]
    fn configured_count_of_bands_in_every_frame() {
        for count in [7, 11, 20] {
            let occ = StripeOccluder::new(count, 320);
            for frame in 0..120 {
                let mut b = blank(320, 2);
                composite_occluder(&mut b, &occ, frame, MaskMode::Amodal);
                assert_eq!(count_stripe_bands(&stripe_row(&b)), count as usize, "{count} @ {frame}");
            }
        }
    }

    #[test]
    fn consecutive_frames_shift_by_velocity() {
        let occ = StripeOccluder::new(11, 320);
        let a = occ.column_map(4);
        let b = occ.column_map(5);
        // circular cross-correlation peak
        let score = |s: usize| (0..320).filter(|&x| a[x].is_some() && b[(x + s) % 320].is_some()).count();
        let best = (0..320).max_by_key(|&s| (score(s), std::cmp::Reverse(s))).unwrap();
        assert_eq!(best as i64, STRIPE_VELOCITY);
    }

    #[test]
    fn modal_masks_are_cut_by_stripes() {
        let occ = StripeOccluder::new(7, 80);
        let mut b = blank(80, 4);
        b.target_mask.data.fill(1);
        let mut modal = b.clone();
        composite_occluder(&mut b, &occ, 0, MaskMode::Amodal);
        composite_occluder(&mut modal, &occ, 0, MaskMode::Modal);
        assert_eq!(b.target_mask.count(), 320);
        assert_eq!(modal.target_mask.count(), 320 - 7 * 2 * 4);
        assert_eq!(occ.stripe_at(0, 0), Some(0));
    }
}
