//! Entropy of the SRW, of Y_n and multinomial differences, entropic and
//! cutoff times, and the typical-set calculus for C_S and Q_R.

pub mod normal;
pub mod pmf;
pub mod qr;
pub mod srw;
pub mod times;
pub mod typical;
pub mod varentropy;

pub use normal::{bulk_set_member, normal_density, normal_log_density, normal_set_member, sample_normal, NormalSetParams};
pub use pmf::{entropy_of, entropy_plugin, multinomial_diff_pmf, varentropy_of, y_pmf_exact, PluginEntropy, PmfTable};
pub use qr::{qr_concentration_experiment, qr_entropy_mean, QrConfig, QrReport};
pub use srw::{h_asymptotic, h_exact, srw_entropy, srw_pmf, EntropyMode, SrwEntropy, SrwPmf};
pub use times::{cutoff_time, cutoff_time_with, entropic_time, CutoffTime, Regime, RegimeThresholds};
pub use typical::{ws_member_mid_regime, ws_member_small_regime, MidRegimeSets, SetVariant};
pub use varentropy::{varentropy_bound_check, y_entropy_asymptotic, y_entropy_gap, VarentropyReport, YEntropyGap};
