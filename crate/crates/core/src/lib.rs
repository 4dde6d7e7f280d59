//! Deterministic procedural generation of transparent-object tracking
//! sequences with exact box and mask ground truth, together with the
//! one-pass evaluation (OPE) tooling used to score trackers on them.
//!
//! The pipeline is split into small modules:
//!
//! * [`seqplan`] samples per-sequence recipes, dataset plans, the 80-sequence
//!   attribute study and training batch mixes.
//! * [`trajectory`] turns four control points into a constant-speed track
//!   and a constant-angular-velocity orientation track.
//! * [`geometry`] loads OBJ meshes and accelerates ray queries with a BVH.
//! * [`optics`] holds the dielectric transport (Snell, Fresnel, TIR).
//! * [`render`] renders frames over a background video and writes sequences.
//! * [`annotate`] derives and serializes boxes from masks.
//! * [`evalkit`] implements success/precision plots, AUC and per-attribute
//!   tables.
//! * [`cli`] wires everything into the `glasstrack` binary.
//!
//! Runnable walkthroughs of every capability live in the crate's `examples/`
//! directory.

pub mod annotate;
pub mod cli;
pub mod error;
pub mod evalkit;
pub mod geometry;
pub mod math;
pub mod optics;
pub mod pnm;
pub mod procedural;
pub mod render;
pub mod rng;
pub mod seqplan;
pub mod trajectory;

pub use error::{Error, Result};
