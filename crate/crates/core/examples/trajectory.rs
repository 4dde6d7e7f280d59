//! Samples a target path, resamples it at constant speed and prints the
//! per-frame step lengths and the distractor's trailing path.

use glasstrack::math::{Quat, Vec3};
use glasstrack::rng::seeded;
use glasstrack::seqplan::GenerationParams;
use glasstrack::trajectory::{
    chord_spread, constant_speed_params, lagged_track, orientation_track, sample_trajectory, Spline, DISTRACTOR_LAG,
};

fn main() -> glasstrack::Result<()> {
    let region = GenerationParams::default().safe_region;
    let mut rng = seeded(3);
    let n = 12;
    let cps = sample_trajectory(&mut rng, &region, n)?;
    let spline = Spline::catmull_rom(cps);
    let params = constant_speed_params(&spline, n)?;
    let trail = lagged_track(&spline, &params, DISTRACTOR_LAG, Vec3::new(0.3, 0.0, 0.0));
    println!("arc length {:.4}, chord spread {:.1e}", spline.arc_length(), chord_spread(&spline, &params));
    let mut prev: Option<Vec3> = None;
    for (k, t) in params.iter().enumerate() {
        let p = spline.eval(*t)?;
        let step = prev.map_or(0.0, |q| q.distance(p));
        println!(
            "frame {k:2}  t={t:.4}  target ({:+.3},{:+.3},{:+.3})  step {step:.5}  distractor z {:+.3}",
            p.x, p.y, p.z, trail[k].z
        );
        prev = Some(p);
    }
    let spin = orientation_track(Vec3::new(0.0, 1.0, 0.0), 5.4, 11, Quat::IDENTITY)?;
    println!("after 10 frames at 5.4 deg/frame: {:.6} deg", spin[10].angle().to_degrees());
    Ok(())
}
