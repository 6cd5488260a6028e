//! Secret key and its text file format.
//!
//! Key files hold one `name = value` assignment per line for the twelve
//! fields `r1`..`r6`, `k1`..`k3`, `x0`, `y0`, `z0`, in any order:
//!
//! ```text
//! keyfile    := { line }
//! line       := ws* ( assignment | comment )? ws* newline
//! assignment := name ws* "=" ws* decimal
//! comment    := "#" any*
//! ```
//!
//! Every field must appear exactly once. `r` values are odd integers in
//! `[1, 255]`; `k` values obey the control-parameter bounds; the initial
//! state lies in `[0, 1)`.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mtlm::{ChaoticState, ControlParams, CONTROL_BOUNDS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecretKey {
    /// Permutation integers; `r[2c]` drives rows and `r[2c + 1]` columns of
    /// channel `c`.
    pub r: [u8; 6],
    pub params: ControlParams,
    pub init: ChaoticState,
}

const FIELDS: [&str; 12] = [
    "r1", "r2", "r3", "r4", "r5", "r6", "k1", "k2", "k3", "x0", "y0", "z0",
];

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl SecretKey {
    pub fn new(r: [u8; 6], params: ControlParams, init: ChaoticState) -> Result<Self> {
        if let Some(u) = r.iter().position(|v| v % 2 == 0) {
            return Err(Error::InvalidKey(format!(
                "r{} = {} must be odd",
                u + 1,
                r[u]
            )));
        }
        Ok(Self { r, params, init })
    }

    /// Fixed reference key for tests and examples.
    pub fn sample() -> Self {
        Self::new(
            [123, 57, 67, 89, 253, 221],
            ControlParams::new(38.583, 41.135, 39.846).unwrap(),
            ChaoticState::new(0.485, 0.913, 0.751).unwrap(),
        )
        .unwrap()
    }

    /// Draws odd `r` values uniformly, `|k|` uniformly in
    /// `(bound, bound + 20)` and the initial state uniformly in `[0, 1)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut r = [0u8; 6];
        for v in &mut r {
            *v = rng.gen::<u8>() | 1;
        }
        Self::with_random_chaos(r, rng)
    }

    /// Like [`random`](Self::random) but redraws each `r` until the key is
    /// usable on an `height x width` image. Fails when a dimension is a
    /// multiple of 31, for which no parameter is invertible.
    pub fn random_for<R: Rng + ?Sized>(height: usize, width: usize, rng: &mut R) -> Result<Self> {
        for (u, dim) in [(1, height), (2, width)] {
            if dim % 31 == 0 {
                return Err(Error::KeyDimensionIncompatible {
                    index: u,
                    value: 1,
                    dimension: dim,
                });
            }
        }
        let mut r = [0u8; 6];
        for (u, v) in r.iter_mut().enumerate() {
            let dim = if u % 2 == 0 { height } else { width };
            *v = loop {
                let cand = rng.gen::<u8>() | 1;
                if gcd(31 * cand as usize, dim) == 1 {
                    break cand;
                }
            };
        }
        Ok(Self::with_random_chaos(r, rng))
    }

    fn with_random_chaos<R: Rng + ?Sized>(r: [u8; 6], rng: &mut R) -> Self {
        let mut k = [0.0; 3];
        for (kv, bound) in k.iter_mut().zip(CONTROL_BOUNDS) {
            // open interval: gen::<f64>() can return 0.0
            *kv = bound + 20.0 * (1.0 - rng.gen::<f64>());
        }
        let params = ControlParams::new(k[0], k[1], k[2]).expect("sampled above the bounds");
        let init = ChaoticState::new(rng.gen(), rng.gen(), rng.gen()).expect("gen is in [0, 1)");
        Self { r, params, init }
    }

    /// Checks that every `r_u` yields a bijective permutation for the given
    /// dimensions, i.e. `gcd(31 * r_u, H) = 1` for row parameters and
    /// `gcd(31 * r_u, W) = 1` for column parameters.
    pub fn check_dimensions(&self, height: usize, width: usize) -> Result<()> {
        check_permutation(&self.r, height, width)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (u, v) in self.r.iter().enumerate() {
            writeln!(s, "r{} = {v}", u + 1).unwrap();
        }
        let p = &self.params;
        let i = &self.init;
        for (name, v) in [
            ("k1", p.k1),
            ("k2", p.k2),
            ("k3", p.k3),
            ("x0", i.x),
            ("y0", i.y),
            ("z0", i.z),
        ] {
            writeln!(s, "{name} = {v:?}").unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values: [Option<&str>; 12] = [None; 12];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Format(format!("key line {}: {msg}", lineno + 1));
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected `name = value`"))?;
            let (name, value) = (name.trim(), value.trim());
            let slot = FIELDS
                .iter()
                .position(|f| *f == name)
                .ok_or_else(|| bad(&format!("unknown field `{name}`")))?;
            if values[slot].replace(value).is_some() {
                return Err(bad(&format!("duplicate field `{name}`")));
            }
        }
        let missing: Vec<_> = FIELDS
            .iter()
            .zip(&values)
            .filter(|(_, v)| v.is_none())
            .map(|(f, _)| *f)
            .collect();
        if !missing.is_empty() {
            return Err(Error::Format(format!(
                "key is missing {}",
                missing.join(", ")
            )));
        }
        let vals: Vec<&str> = values.iter().map(|v| v.unwrap()).collect();

        let mut r = [0u8; 6];
        for (u, slot) in r.iter_mut().enumerate() {
            *slot = vals[u].parse().map_err(|_| {
                Error::InvalidKey(format!(
                    "r{} = `{}` is not an integer in [0, 255]",
                    u + 1,
                    vals[u]
                ))
            })?;
        }
        let mut reals = [0.0f64; 6];
        for (j, slot) in reals.iter_mut().enumerate() {
            let s = vals[6 + j];
            *slot = s.parse().map_err(|_| {
                Error::InvalidKey(format!("{} = `{s}` is not a decimal number", FIELDS[6 + j]))
            })?;
        }
        let params = ControlParams::new(reals[0], reals[1], reals[2])?;
        let init = ChaoticState::new(reals[3], reals[4], reals[5])?;
        Self::new(r, params, init)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub(crate) fn check_permutation(r: &[u8; 6], height: usize, width: usize) -> Result<()> {
    for (u, &v) in r.iter().enumerate() {
        let dim = if u % 2 == 0 { height } else { width };
        if gcd(31 * v as usize, dim) != 1 {
            return Err(Error::KeyDimensionIncompatible {
                index: u + 1,
                value: v,
                dimension: dim,
            });
        }
    }
    Ok(())
}
