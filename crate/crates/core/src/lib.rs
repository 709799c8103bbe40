//! Turn detection and measurement-validation statistics for smartphone IMU
//! recordings of the U-Turn Test.
//!
//! The crate is organised as a pipeline:
//!
//! * [`ingest`]: parse, validate, resample, and synchronize sensor streams
//!   and reference turn annotations; resolve wear-location roles.
//! * [`detect`]: segment U-turn bouts from the vertical rotational rate.
//! * [`measures`]: per-turn speed, per-test medians, participant aggregates.
//! * [`matching`]: TP/FP/FN classification of detected turns against
//!   reference annotations, with temporal-error statistics.
//! * [`stats`]: ICC, Bland-Altman, bootstrap CIs, test-retest reliability
//!   curves, Spearman correlation, and Mann-Whitney group tests.
//! * [`synth`]: seeded synthetic session and cohort generators with exact
//!   ground-truth annotations, used as the verification oracle.
//!
//! All operations are pure functions of their inputs. Every random process
//! is driven by an explicit seed, so whole-pipeline runs are bit-for-bit
//! reproducible.

pub mod detect;
pub mod filter;
pub mod ingest;
pub mod matching;
pub mod measures;
pub mod stats;
pub mod synth;
pub mod util;
