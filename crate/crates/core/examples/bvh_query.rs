//! Builds a BVH over a torus, casts a fan of rays and reports traversal cost
//! against a brute-force scan.
//!
//! ```text
//! cargo run --example bvh_query -- [mesh.obj]
//! ```

use glasstrack::geometry::{intersect_triangle, load_mesh_file, Bvh, Ray};
use glasstrack::math::Vec3;
use glasstrack::procedural;

fn main() -> glasstrack::Result<()> {
    let mesh = match std::env::args_os().nth(1) {
        Some(path) => load_mesh_file(path.as_ref())?.normalized(),
        None => procedural::torus(1.0, 0.35, 96, 48).normalized(),
    };
    let bvh = Bvh::build(&mesh)?;
    println!("{} triangles, {} leaves", mesh.triangle_count(), bvh.leaves().count());

    let origin = Vec3::new(0.0, 0.0, 3.0);
    let (mut hits, mut visited, mut tested) = (0usize, 0usize, 0usize);
    let n = 64;
    for i in 0..n {
        for j in 0..n {
            let target = Vec3::new(i as f64 / (n - 1) as f64 * 2.0 - 1.0, j as f64 / (n - 1) as f64 * 2.0 - 1.0, 0.0);
            let ray = Ray::new(origin, (target - origin).normalized());
            let (hit, stats) = bvh.intersect_with_stats(&mesh, &ray);
            let brute = (0..mesh.triangle_count())
                .filter_map(|t| intersect_triangle(&ray, &mesh.corners(t)))
                .fold(f64::INFINITY, f64::min);
            if let Some(h) = hit {
                hits += 1;
                assert!((h.t - brute).abs() < 1e-9);
            } else {
                assert!(brute.is_infinite());
            }
            visited += stats.nodes_visited;
            tested += stats.triangle_tests;
        }
    }
    let rays = (n * n) as f64;
    println!(
        "{hits} of {} rays hit; per ray {:.1} nodes and {:.1} triangle tests (brute force: {})",
        n * n,
        visited as f64 / rays,
        tested as f64 / rays,
        mesh.triangle_count()
    );
    Ok(())
}
