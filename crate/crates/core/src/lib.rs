//! Implementation and cryptanalysis of the mixed-transformed-Logistic-map
//! (MTLM) image cipher.
//!
//! - [`mtlm`]: the chaotic recurrence and its byte keystream.
//! - [`cipher`]: permutation, nonlinear and zigzag diffusion, and their inverses.
//! - [`addxor`]: candidate solving for `y = (alpha + x) ^ (beta + x) mod 256`.
//! - [`cpa`]: the two-image chosen-plaintext attack and the 87-image baseline.
//! - [`kpa`]: the two-pair known-plaintext attack.
//! - [`randomness`]: a subset of the NIST SP 800-22 tests.
//! - [`imgio`]: binary PPM and synthetic images.

pub mod addxor;
pub mod cipher;
pub mod cpa;
pub mod error;
pub mod imgio;
pub mod kpa;
pub mod mtlm;
pub mod randomness;

pub use addxor::CandidateSet;
pub use cipher::{decrypt, encrypt, RgbImage, SecretKey, ZigzagMap};
pub use cpa::{cpa_attack, EncryptionOracle, EquivalentKey};
pub use error::{Error, Result};
pub use kpa::{decrypt_with_equivalent_key, kpa_attack, pixel_accuracy, KnownPair, ScanMode};
pub use mtlm::{generate_keystream, Keystream};
