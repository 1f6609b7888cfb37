//! Cutoff experiments: scans over sampled generator sets, verification of
//! the predicted cutoff time, mixing windows and report output.

pub mod config;
pub mod emit;
pub mod gcd;
pub mod regime;
pub mod scan;
pub mod verify;
pub mod window;

pub use config::{ExperimentConfig, KRule, Method, Tolerances};
pub use emit::{parse_profile_csv, profile_csv, profile_json, write_atomic};
pub use gcd::{gcd_uniformity_check, GcdReport};
pub use regime::{regime_report, RegimeReport};
pub use scan::{run_cutoff_scan, tv_monte_carlo, CutoffProfile, ProfileRow};
pub use verify::{verify_cutoff, VerifyParams, VerifyReport};
pub use window::{window_locate, Window};
