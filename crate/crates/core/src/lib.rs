pub mod cli;
pub mod dispersion;
pub mod momentum;
pub mod quadrature;
pub mod realspace;
pub mod special;
pub mod spectra;
pub mod units;
