//! Instance generators for the hardness reductions, plus small exhaustive
//! oracles for the source problems so the generated instances can be
//! checked end to end on desk-scale inputs.

mod bmcc;
mod formats;
mod mcc;
mod mwc3_alc;
mod rsa;

pub use bmcc::{bmcc_brute, bmcc_to_sdp_core, BmccInstance, GadgetParams};
pub use formats::{parse_source, write_alc, write_bmcc, write_mcc, write_mwc3, write_rsa, SourceInstance};
pub use mcc::{mcc_brute, mcc_to_sdp, MccInstance};
pub use mwc3_alc::{
    alc_brute, alc_to_vc3bipdp, mwc3_brute, mwc3_to_alc, AlcInstance, Mwc3Instance,
    VcThreeReduction,
};
pub use rsa::{rsa_brute, rsa_to_pdp, RsaInstance};
