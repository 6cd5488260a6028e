//! Mixed transformed Logistic map (MTLM) and its byte keystream.
//!
//! The map couples three coordinates; each update is reduced into `[0, 1)`:
//!
//! ```text
//! x' = (3.735 * k1 * (1 + x)^2 * sin(1 / (1 + y^2)))  mod 1
//! y' = (3.536 * k2 * x' * sin(x' * y) * (1 + z^2))    mod 1
//! z' = (3.838 * k3 * x' * (1 + y' * z))               mod 1
//! ```
//!
//! Arithmetic is binary64, evaluated left to right in the order above. The
//! orbit is chaotic, so keystreams are reproducible within one build but may
//! diverge across platforms whose `sin` differs in the last ulp.

use std::io::{self, Write};

use crate::cipher::SecretKey;
use crate::error::{Error, Result};

/// Lower bounds on `|k1|`, `|k2|`, `|k3|` (strict).
pub const CONTROL_BOUNDS: [f64; 3] = [37.7, 39.7, 37.2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaoticState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ChaoticState {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        for (name, v) in [("x0", x), ("y0", y), ("z0", z)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidKey(format!("{name} = {v} is outside [0, 1)")));
            }
        }
        Ok(Self { x, y, z })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl ControlParams {
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        for (i, (k, bound)) in [k1, k2, k3].into_iter().zip(CONTROL_BOUNDS).enumerate() {
            if !k.is_finite() || k.abs() <= bound {
                return Err(Error::InvalidKey(format!(
                    "k{} = {k} violates |k{}| > {bound}",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(Self { k1, k2, k3 })
    }
}

/// `v - floor(v)`, pinned into `[0, 1)`.
///
/// For tiny negative `v` the subtraction rounds up to exactly 1.0; that case
/// maps to the largest double below one.
#[inline]
fn frac(v: f64) -> f64 {
    let r = v - v.floor();
    if r < 1.0 {
        r
    } else {
        ONE_MINUS_ULP
    }
}

const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// One MTLM iteration.
pub fn mtlm_step(s: ChaoticState, k: &ControlParams) -> Result<ChaoticState> {
    let x = 3.735 * k.k1 * (1.0 + s.x) * (1.0 + s.x) * (1.0 / (1.0 + s.y * s.y)).sin();
    if !x.is_finite() {
        return Err(Error::ChaosNumeric { iteration: 0 });
    }
    let x = frac(x);
    let y = 3.536 * k.k2 * x * (x * s.y).sin() * (1.0 + s.z * s.z);
    if !y.is_finite() {
        return Err(Error::ChaosNumeric { iteration: 0 });
    }
    let y = frac(y);
    let z = 3.838 * k.k3 * x * (1.0 + y * s.z);
    if !z.is_finite() {
        return Err(Error::ChaosNumeric { iteration: 0 });
    }
    Ok(ChaoticState { x, y, z: frac(z) })
}

/// Iterator over the states after each step, starting from the step after
/// the initial state.
#[derive(Debug, Clone)]
pub struct Orbit {
    state: ChaoticState,
    params: ControlParams,
    steps: usize,
}

impl Orbit {
    pub fn new(init: ChaoticState, params: ControlParams) -> Self {
        Self {
            state: init,
            params,
            steps: 0,
        }
    }
}

impl Iterator for Orbit {
    type Item = Result<ChaoticState>;

    fn next(&mut self) -> Option<Self::Item> {
        self.steps += 1;
        match mtlm_step(self.state, &self.params) {
            Ok(next) => {
                self.state = next;
                Some(Ok(next))
            }
            Err(_) => Some(Err(Error::ChaosNumeric {
                iteration: self.steps,
            })),
        }
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    // v < 1 so 256 * v < 256; the min guards against a future caller passing 1.0
    ((256.0 * v).floor() as u32).min(255) as u8
}

/// The three byte streams `X`, `Y`, `Z` of a common length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keystream {
    x: Vec<u8>,
    y: Vec<u8>,
    z: Vec<u8>,
}

impl Keystream {
    pub fn from_parts(x: Vec<u8>, y: Vec<u8>, z: Vec<u8>) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() || x.len() != z.len() {
            return Err(Error::Shape(format!(
                "keystream parts must share a nonzero length (got {}, {}, {})",
                x.len(),
                y.len(),
                z.len()
            )));
        }
        Ok(Self { x, y, z })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[u8] {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn z(&self) -> &[u8] {
        &self.z
    }

    /// `X1, Y1, Z1, X2, Y2, Z2, ...`
    pub fn interleaved(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 * self.len());
        for i in 0..self.len() {
            out.extend_from_slice(&[self.x[i], self.y[i], self.z[i]]);
        }
        out
    }

    /// Raw binary dump of the interleaved bytes.
    pub fn write_raw<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.interleaved())
    }

    /// ASCII `0`/`1` dump of the interleaved bytes, most significant bit first.
    pub fn write_ascii_bits<W: Write>(&self, mut w: W) -> io::Result<()> {
        let mut line = Vec::with_capacity(8 * 3 * self.len());
        for b in self.interleaved() {
            for bit in (0..8).rev() {
                line.push(if (b >> bit) & 1 == 1 { b'1' } else { b'0' });
            }
        }
        w.write_all(&line)
    }
}

/// Iterates the map `len` times from the key's initial state and quantizes
/// each post-step state with `floor(256 * v)`.
pub fn generate_keystream(key: &SecretKey, len: usize) -> Result<Keystream> {
    if len == 0 {
        return Err(Error::Shape("keystream length must be at least 1".into()));
    }
    let mut x = Vec::with_capacity(len);
    let mut y = Vec::with_capacity(len);
    let mut z = Vec::with_capacity(len);
    for state in Orbit::new(key.init, key.params).take(len) {
        let s = state?;
        x.push(quantize(s.x));
        y.push(quantize(s.y));
        z.push(quantize(s.z));
    }
    Ok(Keystream { x, y, z })
}
