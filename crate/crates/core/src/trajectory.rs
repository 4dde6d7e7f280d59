//! Target motion: a Catmull-Rom-tangent cubic Hermite spline through four
//! control points, resampled so that consecutive frames are equally far
//! apart, plus constant angular velocity about a fixed axis.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Quat, Vec3};

/// Axis-aligned box in world space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: Vec3,
    pub max: Vec3,
}

impl Region {
    pub fn volume(&self) -> f64 {
        let e = self.max - self.min;
        e.x.max(0.0) * e.y.max(0.0) * e.z.max(0.0)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// Four points, independent and uniform in `region`.
pub fn sample_control_points<R: Rng>(rng: &mut R, region: &Region) -> Result<[Vec3; 4]> {
    let extent = region.max - region.min;
    if !(extent.x > 0.0 && extent.y > 0.0 && extent.z > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate safe region {:?}..{:?}",
            region.min, region.max
        )));
    }
    let mut draw = || {
        Vec3::new(
            rng.gen_range(region.min.x..region.max.x),
            rng.gen_range(region.min.y..region.max.y),
            rng.gen_range(region.min.z..region.max.z),
        )
    };
    Ok([draw(), draw(), draw(), draw()])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spline {
    pub control_points: [Vec3; 4],
    /// Tangents in per-segment parameter units.
    pub tangents: [Vec3; 4],
}

impl Spline {
    /// Central differences at the interior points, one-sided at the ends.
    pub fn catmull_rom(p: [Vec3; 4]) -> Spline {
        Spline {
            control_points: p,
            tangents: [
                p[1] - p[0],
                (p[2] - p[0]) * 0.5,
                (p[3] - p[1]) * 0.5,
                p[3] - p[2],
            ],
        }
    }

    pub fn eval(&self, t: f64) -> Result<Vec3> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("spline parameter {t} outside [0, 1]")));
        }
        Ok(self.point(t))
    }

    /// Knots are uniform: segment `i` covers `t` in `[i/3, (i+1)/3]`.
    fn point(&self, t: f64) -> Vec3 {
        let u = t.clamp(0.0, 1.0) * 3.0;
        let seg = (u.floor() as usize).min(2);
        let s = u - seg as f64;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let p = &self.control_points;
        let m = &self.tangents;
        p[seg] * h00 + m[seg] * h10 + p[seg + 1] * h01 + m[seg + 1] * h11
    }

    /// Derivative `dP/dt`.
    pub fn derivative(&self, t: f64) -> Vec3 {
        let u = t.clamp(0.0, 1.0) * 3.0;
        let seg = (u.floor() as usize).min(2);
        let s = u - seg as f64;
        let s2 = s * s;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        let p = &self.control_points;
        let m = &self.tangents;
        (p[seg] * d00 + m[seg] * d10 + p[seg + 1] * d01 + m[seg + 1] * d11) * 3.0
    }

    /// Arc length by adaptive chord subdivision.
    pub fn arc_length(&self) -> f64 {
        ArcTable::build(self).total()
    }
}

pub fn eval_spline(spline: &Spline, t: f64) -> Result<Vec3> {
    spline.eval(t)
}

/// Cumulative arc length at the leaves of an adaptive subdivision, with
/// Gauss-Legendre quadrature of the speed inside each leaf.
#[derive(Debug, Clone)]
pub struct ArcTable {
    spline: Spline,
    params: Vec<f64>,
    lengths: Vec<f64>,
}

const LOCAL_TOLERANCE: f64 = 1e-5;
const MIN_DEPTH: u32 = 4;
const MAX_DEPTH: u32 = 28;

/// Five-point Gauss-Legendre nodes and weights on [-1, 1].
const GAUSS: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

impl ArcTable {
    pub fn build(spline: &Spline) -> ArcTable {
        let mut table = ArcTable {
            spline: *spline,
            params: vec![0.0],
            lengths: vec![0.0],
        };
        for seg in 0..3 {
            let a = seg as f64 / 3.0;
            let b = (seg + 1) as f64 / 3.0;
            table.subdivide(a, b, spline.point(a), spline.point(b), 0);
        }
        table
    }

    fn subdivide(&mut self, a: f64, b: f64, pa: Vec3, pb: Vec3, depth: u32) {
        let m = 0.5 * (a + b);
        let pm = self.spline.point(m);
        let chord = pa.distance(pb);
        let halves = pa.distance(pm) + pm.distance(pb);
        let converged = halves - chord <= LOCAL_TOLERANCE * halves.max(f64::MIN_POSITIVE);
        if depth >= MAX_DEPTH || (depth >= MIN_DEPTH && converged) {
            let total = self.total() + self.quadrature(a, b);
            self.params.push(b);
            self.lengths.push(total);
        } else {
            self.subdivide(a, m, pa, pm, depth + 1);
            self.subdivide(m, b, pm, pb, depth + 1);
        }
    }

    /// Arc length between parameters `a <= b` inside one leaf.
    fn quadrature(&self, a: f64, b: f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        GAUSS
            .iter()
            .map(|(x, w)| w * self.spline.derivative(mid + half * x).length())
            .sum::<f64>()
            * half
    }

    fn leaf_of(&self, t: f64) -> usize {
        self.params.partition_point(|&p| p <= t).clamp(1, self.params.len() - 1) - 1
    }

    pub fn total(&self) -> f64 {
        *self.lengths.last().expect("table is never empty")
    }

    /// Arc length from the start to parameter `t`.
    pub fn length_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return self.total();
        }
        let i = self.leaf_of(t);
        self.lengths[i] + self.quadrature(self.params[i], t)
    }

    /// Parameter at arc length `s`: table lookup refined by Newton steps
    /// inside the leaf.
    pub fn param_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.total() {
            return 1.0;
        }
        let hi = self.lengths.partition_point(|&v| v < s).clamp(1, self.lengths.len() - 1);
        let lo = hi - 1;
        let (a, b) = (self.params[lo], self.params[hi]);
        let mut t = interpolate(&self.lengths, &self.params, s);
        for _ in 0..8 {
            let err = self.lengths[lo] + self.quadrature(a, t) - s;
            let speed = self.spline.derivative(t).length();
            if speed <= 0.0 {
                break;
            }
            let next = (t - err / speed).clamp(a, b);
            if (next - t).abs() <= 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        t
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    let hi = xs.partition_point(|&v| v < x).clamp(1, last);
    let lo = hi - 1;
    let span = xs[hi] - xs[lo];
    if span <= 0.0 {
        return ys[hi];
    }
    ys[lo] + (ys[hi] - ys[lo]) * (x - xs[lo]) / span
}

/// Parameters of `n_frames` points along the spline, first and last at the
/// end control points, consecutive points an equal straight-line distance
/// apart.
///
/// Equal chords rather than equal arc increments: on curved stretches the two
/// differ by a curvature-dependent factor, and frame-to-frame displacement is
/// what the renderer sees as velocity.
pub fn constant_speed_params(spline: &Spline, n_frames: usize) -> Result<Vec<f64>> {
    if n_frames < 2 {
        return Err(Error::InvalidArgument(format!(
            "constant-speed track needs at least 2 frames, got {n_frames}"
        )));
    }
    let table = ArcTable::build(spline);
    let total = table.total();
    if n_frames == 2 || total <= 0.0 {
        return Ok((0..n_frames)
            .map(|i| i as f64 / (n_frames - 1) as f64)
            .collect());
    }

    let steps = n_frames - 1;
    // Newton on t_1..t_{n-2} and the common chord c, with t_0 = 0 and
    // t_{n-1} = 1 fixed, started from equal arc-length spacing. Each
    // residual couples neighbours only, so a forward sweep writes every
    // update as alpha + beta * dc.
    let mut t: Vec<f64> = (0..n_frames)
        .map(|i| table.param_at(total * i as f64 / steps as f64))
        .collect();
    t[steps] = 1.0;
    let mut c = total / steps as f64;
    let mut best = (f64::INFINITY, t.clone());
    for _ in 0..MAX_NEWTON_ROUNDS {
        let pts: Vec<Vec3> = t.iter().map(|&v| spline.point(v)).collect();
        let residual: Vec<f64> = pts.windows(2).map(|w| w[0].distance(w[1]) - c).collect();
        let err = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if err < best.0 {
            best = (err, t.clone());
        }
        if err <= NEWTON_TOLERANCE * c {
            break;
        }
        let (mut alpha, mut beta) = (0.0, 0.0);
        let mut coeffs = Vec::with_capacity(steps);
        for i in 0..steps {
            let u = (pts[i + 1] - pts[i]).normalized();
            let a = u.dot(spline.derivative(t[i]));
            if i + 1 < steps {
                let b = u.dot(spline.derivative(t[i + 1]));
                if b.abs() < 1e-12 {
                    return Ok(best.1);
                }
                alpha = (-residual[i] + a * alpha) / b;
                beta = (1.0 + a * beta) / b;
                coeffs.push((alpha, beta));
            } else {
                // Last residual, with dt_{n-1} = 0: -a dt_{n-2} - dc = -r.
                let dc = (residual[i] - a * alpha) / (a * beta + 1.0);
                let mut dt: Vec<f64> = coeffs.iter().map(|(al, be)| al + be * dc).collect();
                let largest = dt.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                let limit = 0.5 / steps as f64;
                let damp = if largest > limit { limit / largest } else { 1.0 };
                for d in &mut dt {
                    *d *= damp;
                }
                c += dc * damp;
                for (k, d) in dt.into_iter().enumerate() {
                    t[k + 1] = (t[k + 1] + d).clamp(0.0, 1.0);
                }
            }
        }
    }
    Ok(best.1)
}

const MAX_NEWTON_ROUNDS: usize = 60;
const NEWTON_TOLERANCE: f64 = 1e-13;

/// Largest deviation of a consecutive chord from the mean chord, relative to
/// the mean.
pub fn chord_spread(spline: &Spline, params: &[f64]) -> f64 {
    let chords: Vec<f64> = params
        .windows(2)
        .map(|w| spline.point(w[0]).distance(spline.point(w[1])))
        .collect();
    if chords.is_empty() {
        return 0.0;
    }
    let mean = chords.iter().sum::<f64>() / chords.len() as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    chords.iter().fold(0.0f64, |m, c| m.max((c - mean).abs())) / mean
}

/// Relative chord spread a sampled trajectory must reach.
pub const CHORD_TOLERANCE: f64 = 1e-9;
const MAX_TRAJECTORY_ATTEMPTS: usize = 64;

/// Draws control points whose spline resamples to `n_frames` equal chords.
///
/// Hairpins tighter than one frame step admit no equal-chord resampling;
/// such draws are discarded and redrawn.
pub fn sample_trajectory<R: Rng>(rng: &mut R, region: &Region, n_frames: usize) -> Result<[Vec3; 4]> {
    for _ in 0..MAX_TRAJECTORY_ATTEMPTS {
        let cps = sample_control_points(rng, region)?;
        let spline = Spline::catmull_rom(cps);
        let params = constant_speed_params(&spline, n_frames)?;
        if chord_spread(&spline, &params) <= CHORD_TOLERANCE {
            return Ok(cps);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no constant-speed trajectory found in {MAX_TRAJECTORY_ATTEMPTS} draws"
    )))
}

/// Positions of a constant-speed track along the spline.
pub fn constant_speed_track(spline: &Spline, n_frames: usize) -> Result<Vec<Vec3>> {
    Ok(constant_speed_params(spline, n_frames)?
        .into_iter()
        .map(|t| spline.point(t))
        .collect())
}

/// Arc-length lag of the distractor behind the target, as a fraction of the
/// total path length.
pub const DISTRACTOR_LAG: f64 = 0.15;

/// Track of an object following `target_params` along the same spline,
/// `lag_fraction` of the path length behind (held at the start until the
/// target is far enough ahead), displaced by a constant `offset`.
pub fn lagged_track(spline: &Spline, target_params: &[f64], lag_fraction: f64, offset: Vec3) -> Vec<Vec3> {
    let table = ArcTable::build(spline);
    let lag = lag_fraction * table.total();
    target_params
        .iter()
        .map(|&t| {
            let s = (table.length_at(t) - lag).max(0.0);
            spline.point(table.param_at(s)) + offset
        })
        .collect()
}

/// Orientation at frame `k`: the rotation by `k * speed` degrees about
/// `axis`, applied on top of `initial`.
pub fn orientation_track(
    axis: Vec3,
    speed_deg_per_frame: f64,
    n_frames: usize,
    initial: Quat,
) -> Result<Vec<Quat>> {
    check_axis(axis)?;
    Ok((0..n_frames)
        .map(|k| orientation_at(axis, speed_deg_per_frame, initial, k as f64))
        .collect())
}

fn check_axis(axis: Vec3) -> Result<()> {
    let len = axis.length();
    if len == 0.0 {
        return Err(Error::InvalidArgument("rotation axis is zero".into()));
    }
    if (len - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "rotation axis has length {len}, expected unit"
        )));
    }
    Ok(())
}

fn orientation_at(axis: Vec3, speed_deg: f64, initial: Quat, time: f64) -> Quat {
    Quat::from_axis_angle(axis, (speed_deg * time).to_radians()) * initial
}

/// Per-frame poses of one object, evaluable at fractional frame times for
/// motion blur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseTrack {
    pub positions: Vec<Vec3>,
    pub orientations: Vec<Quat>,
    pub axis: Vec3,
    pub speed_deg: f64,
    pub initial: Quat,
}

impl PoseTrack {
    pub fn new(positions: Vec<Vec3>, axis: Vec3, speed_deg: f64, initial: Quat) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("empty pose track".into()));
        }
        let orientations = orientation_track(axis, speed_deg, positions.len(), initial)?;
        Ok(PoseTrack {
            positions,
            orientations,
            axis,
            speed_deg,
            initial,
        })
    }

    /// A track that never moves or rotates.
    pub fn fixed(position: Vec3, n_frames: usize) -> Self {
        PoseTrack {
            positions: vec![position; n_frames.max(1)],
            orientations: vec![Quat::IDENTITY; n_frames.max(1)],
            axis: Vec3::Z,
            speed_deg: 0.0,
            initial: Quat::IDENTITY,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Pose at a fractional frame time. Positions are linearly interpolated
    /// between frames and extrapolated past either end.
    pub fn pose_at(&self, time: f64) -> (Vec3, Quat) {
        let n = self.positions.len();
        let position = if n == 1 {
            self.positions[0]
        } else {
            let k = (time.floor().max(0.0) as usize).min(n - 2);
            let f = time - k as f64;
            self.positions[k].lerp(self.positions[k + 1], f)
        };
        let orientation = if time.fract() == 0.0 && time >= 0.0 && (time as usize) < n {
            self.orientations[time as usize]
        } else {
            orientation_at(self.axis, self.speed_deg, self.initial, time)
        };
        (position, orientation)
    }
}
