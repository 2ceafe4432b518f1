//! Numerical laboratory for fractional-BV spaces and weighted transfer
//! operators of piecewise expanding interval maps.
//!
//! The crate is organised by task:
//!
//! * [`map_model`]: maps, weights, the built-in catalog and validation.
//! * [`holder_space`]: grid densities, Hölder test norms and the dual norm.
//! * [`transfer`]: pointwise operator, weak pairing and the Ulam matrix.
//! * [`spectral`]: eigenvalues, invariant densities, spectral-radius bounds
//!   and correlation decay.
//! * [`ly_lab`]: admissibility, summability and Lasota-Yorke checks.
//! * [`cli`]: configuration, the command-line pipeline and report files.

pub mod cli;
pub mod error;
pub mod expr;
pub mod holder_space;
pub mod ly_lab;
pub mod map_model;
pub mod par;
pub mod quadrature;
pub mod spectral;
mod stats;
pub mod transfer;

pub use error::{Error, Result};

/// Serde adapter for `f64` fields that may be infinite or NaN.
///
/// JSON has no representation for non-finite numbers (serde_json would emit
/// `null`), so they are written as the strings `"inf"`, `"-inf"` and `"nan"`.
pub mod serde_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("not a number: `{other}`"))),
            },
        }
    }
}
