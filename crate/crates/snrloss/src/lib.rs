//! Experiment layer over `snrloss-core`: seeded parallel Monte-Carlo
//! runs, figure-data generation, acceptance verification, and the file
//! formats they publish.

pub mod figures;
pub mod mc;
pub mod verify;
