//! JSON tensor files.
//!
//! `A` tensors are stored as `entries[i][j][l]` with shape `4 x k x (2k+2)`.
//! `S` tensors are stored as `entries[pair][sym]` with shape
//! `k(k-1)/2 x 10`, pairs `(i, j)`, `i < j`, in lexicographic order and
//! symmetric indices `(l, p)`, `l <= p`, likewise.
//!
//! Rationals are strings `"p/q"` (or `"p"`), prime-field values are
//! strings of canonical residues, complex values are `[re, im]` pairs.

use std::fs;
use std::path::Path;

use instanton_core::scalar::{prime, set_prime};
use instanton_core::tensors::{a_dim, s_dim, ATensor, STensor};
use instanton_core::{Fp, Rational, Scalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::LabError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    ATensor,
    STensor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Field {
    Rational,
    Prime { p: u64 },
    Complex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub provenance: String,
    pub tool_version: String,
}

impl Metadata {
    pub fn new(seed: Option<u64>, provenance: impl Into<String>) -> Self {
        Metadata { seed, provenance: provenance.into(), tool_version: TOOL_VERSION.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub kind: Kind,
    pub k: usize,
    pub field: Field,
    pub entries: Value,
    pub metadata: Metadata,
}

/// Decoded entries.
#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Rational(Vec<Rational>),
    Prime(u64, Vec<Fp>),
    Complex(Vec<Complex64>),
}

fn shape(kind: Kind, k: usize) -> Vec<usize> {
    match kind {
        Kind::ATensor => vec![4, k, 2 * k + 2],
        Kind::STensor => vec![k * k.saturating_sub(1) / 2, 10],
    }
}

fn flat_len(kind: Kind, k: usize) -> usize {
    match kind {
        Kind::ATensor => a_dim(k),
        Kind::STensor => s_dim(k),
    }
}

fn nest(flat: Vec<Value>, dims: &[usize]) -> Value {
    if dims.len() == 1 {
        return Value::Array(flat);
    }
    let stride: usize = dims[1..].iter().product();
    let mut it = flat.into_iter();
    Value::Array((0..dims[0]).map(|_| nest(it.by_ref().take(stride).collect(), &dims[1..])).collect())
}

fn unnest<'a>(v: &'a Value, dims: &[usize], path: &str, out: &mut Vec<&'a Value>) -> Result<(), LabError> {
    let arr = v.as_array().ok_or_else(|| LabError::Input(format!("entries{path} is not an array")))?;
    if arr.len() != dims[0] {
        return Err(LabError::Input(format!("entries{path} has length {}, expected {}", arr.len(), dims[0])));
    }
    for (i, x) in arr.iter().enumerate() {
        if dims.len() == 1 {
            out.push(x);
        } else {
            unnest(x, &dims[1..], &format!("{path}[{i}]"), out)?;
        }
    }
    Ok(())
}

fn parse_rational(v: &Value) -> Result<Rational, LabError> {
    let s = v.as_str().ok_or_else(|| LabError::Input(format!("rational entry {v} is not a string")))?;
    s.trim().parse::<Rational>().map_err(|_| LabError::Input(format!("malformed rational {s:?}")))
}

fn parse_residue(v: &Value, p: u64) -> Result<Fp, LabError> {
    let s = v.as_str().ok_or_else(|| LabError::Input(format!("residue {v} is not a string")))?;
    let r: u64 = s.trim().parse().map_err(|_| LabError::Input(format!("malformed residue {s:?}")))?;
    if r >= p {
        return Err(LabError::Input(format!("residue {r} is not reduced modulo {p}")));
    }
    Ok(Fp::new(r))
}

fn parse_complex(v: &Value) -> Result<Complex64, LabError> {
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => match (re.as_f64(), im.as_f64()) {
            (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
            _ => Err(LabError::Input(format!("complex entry {v} is not numeric"))),
        },
        _ => Err(LabError::Input(format!("complex entry {v} is not a [re, im] pair"))),
    }
}

fn float_value(x: f64) -> Result<Value, LabError> {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .ok_or_else(|| LabError::Input(format!("non-finite value {x}")))
}

impl TensorFile {
    pub fn new(kind: Kind, k: usize, entries: &Entries, metadata: Metadata) -> Result<Self, LabError> {
        let (field, flat): (Field, Vec<Value>) = match entries {
            Entries::Rational(v) => (Field::Rational, v.iter().map(|x| Value::String(x.to_string())).collect()),
            Entries::Prime(p, v) => (Field::Prime { p: *p }, v.iter().map(|x| Value::String(x.value().to_string())).collect()),
            Entries::Complex(v) => (
                Field::Complex,
                v.iter()
                    .map(|z| Ok(Value::Array(vec![float_value(z.re)?, float_value(z.im)?])))
                    .collect::<Result<_, LabError>>()?,
            ),
        };
        if flat.len() != flat_len(kind, k) {
            return Err(LabError::Input(format!("{} entries for {kind:?} with k = {k}", flat.len())));
        }
        Ok(TensorFile { kind, k, field, entries: nest(flat, &shape(kind, k)), metadata })
    }

    pub fn from_a(a: &ATensor<Rational>, metadata: Metadata) -> Self {
        Self::new(Kind::ATensor, a.k(), &Entries::Rational(a.as_slice().to_vec()), metadata).expect("shape")
    }

    pub fn from_s(s: &STensor<Rational>, metadata: Metadata) -> Self {
        Self::new(Kind::STensor, s.k(), &Entries::Rational(s.as_slice().to_vec()), metadata).expect("shape")
    }

    /// Checks the header against the nested shape and decodes every entry.
    pub fn decode(&self) -> Result<Entries, LabError> {
        if self.k == 0 {
            return Err(LabError::Input("k must be at least 1".to_string()));
        }
        let mut flat = Vec::with_capacity(flat_len(self.kind, self.k));
        unnest(&self.entries, &shape(self.kind, self.k), "", &mut flat)?;
        match self.field {
            Field::Rational => Ok(Entries::Rational(flat.into_iter().map(parse_rational).collect::<Result<_, _>>()?)),
            Field::Prime { p } => {
                if p != prime() {
                    set_prime(p).map_err(|e| LabError::Input(e.to_string()))?;
                }
                Ok(Entries::Prime(p, flat.into_iter().map(|v| parse_residue(v, p)).collect::<Result<_, _>>()?))
            }
            Field::Complex => Ok(Entries::Complex(flat.into_iter().map(parse_complex).collect::<Result<_, _>>()?)),
        }
    }

    pub fn a_rational(&self) -> Result<ATensor<Rational>, LabError> {
        self.expect_kind(Kind::ATensor)?;
        match self.decode()? {
            Entries::Rational(v) => Ok(ATensor::from_vec(self.k, v)),
            _ => Err(LabError::Input("expected a rational A tensor".to_string())),
        }
    }

    pub fn s_rational(&self) -> Result<STensor<Rational>, LabError> {
        self.expect_kind(Kind::STensor)?;
        match self.decode()? {
            Entries::Rational(v) => Ok(STensor::from_vec(self.k, v)),
            _ => Err(LabError::Input("expected a rational S tensor".to_string())),
        }
    }

    /// Real float A tensor from a complex file with zero imaginary parts.
    pub fn a_real(&self) -> Result<ATensor<f64>, LabError> {
        self.expect_kind(Kind::ATensor)?;
        match self.decode()? {
            Entries::Complex(v) => {
                if v.iter().any(|z| z.im != 0.0) {
                    return Err(LabError::Input("complex A tensors with nonzero imaginary part are unsupported".to_string()));
                }
                Ok(ATensor::from_vec(self.k, v.iter().map(|z| z.re).collect()))
            }
            Entries::Rational(v) => Ok(ATensor::from_vec(self.k, v.iter().map(instanton_core::scalar::rational_to_f64).collect())),
            Entries::Prime(..) => Err(LabError::Input("prime-field files have no float reading".to_string())),
        }
    }

    fn expect_kind(&self, kind: Kind) -> Result<(), LabError> {
        if self.kind != kind {
            return Err(LabError::Input(format!("expected {kind:?}, file holds {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Parses and validates the shape.
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let f: TensorFile = serde_json::from_str(text).map_err(|e| LabError::Input(format!("malformed tensor file: {e}")))?;
        f.decode()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(|e| LabError::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), LabError> {
        fs::write(path, self.to_json()).map_err(|e| LabError::Input(format!("{}: {e}", path.display())))
    }
}

/// Values that appear inside reports.
pub trait ToJson {
    fn to_json(&self) -> Value;
}

impl ToJson for Rational {
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
}

impl ToJson for f64 {
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map(Value::Number).unwrap_or(Value::Null)
    }
}

impl ToJson for Complex64 {
    fn to_json(&self) -> Value {
        Value::Array(vec![self.re.to_json(), self.im.to_json()])
    }
}

impl ToJson for Fp {
    fn to_json(&self) -> Value {
        Value::String(self.value().to_string())
    }
}

pub fn vec_json<T: ToJson>(v: &[T]) -> Value {
    Value::Array(v.iter().map(ToJson::to_json).collect())
}

/// Zero tensor of the given kind as a rational file.
pub fn zeros(kind: Kind, k: usize) -> TensorFile {
    let n = flat_len(kind, k);
    TensorFile::new(kind, k, &Entries::Rational(vec![Rational::zero(); n]), Metadata::new(None, "zero")).expect("shape")
}
