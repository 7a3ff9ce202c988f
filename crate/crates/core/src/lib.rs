pub mod embed;
pub mod graph;
pub mod nomenclature;
pub mod reduce;
pub mod spectral;
pub mod matching;
pub mod synth;
pub mod cli;
