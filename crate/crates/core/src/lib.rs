pub mod cavity;
pub mod config;
pub mod constants;
pub mod csvio;
pub mod error;
pub mod isolation;
pub mod quantum;
pub mod readout;
pub mod scenario;
pub mod spectra;
pub mod suspension;
pub mod tf;
pub mod thermal;

pub use error::{Error, Result};
pub use spectra::{FrequencyGrid, NoiseBudget, Spectrum, Unit};
