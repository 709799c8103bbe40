pub mod agree;
pub mod correlate;
pub mod detect;
pub mod reliability;
pub mod report;
pub mod score;
pub mod synth;
