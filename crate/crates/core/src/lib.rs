pub mod chart;
pub mod config;
mod diag;
pub mod eval;
pub mod fs;
pub mod index;
pub mod lexicon;
pub mod resources;
pub mod runtime;
pub mod segment;
pub mod symbol;
pub mod tagset;
pub mod trainer;

pub use diag::{Diagnostic, Diagnostics};

pub use symbol::Symbol;

/// Short stable content hash used to tie index files to their inputs.
pub fn fingerprint(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}
