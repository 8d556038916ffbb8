//! JSON file schema for sparse and master systems.
//!
//! Sparse: `{"variables": [..], "support": [[int, ..], ..], "coefficients": [["p/q", ..], ..]}`
//! with coefficient column 0 the constant term.
//! Master: `{"variables": [..], "forms": [{"constant": "p/q", "coeffs": ["p/q", ..]}, ..], "weights": [[int, ..], ..]}`.
//! Rationals travel as strings in lowest terms so nothing is rounded.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    normalize_support, AffineForm, Arrangement, MasterSystem, RawSparseSystem, SparseSystem,
    SystemError,
};
use crate::exactlat::IntMatrix;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("cannot tell the system kind: expected a \"support\" (sparse) or \"forms\" (master) field")]
    UnknownKind,
    #[error("{0}")]
    Invalid(#[from] SystemError),
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> SchemaError {
    SchemaError::Field {
        field: field.into(),
        message: message.into(),
    }
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim().parse::<BigInt>().ok()?, b.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

/// Canonical lowest-terms rendering, `"p/q"` or `"p"` when integral.
pub fn format_rational(q: &BigRational) -> String {
    q.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseJson {
    pub variables: Vec<String>,
    pub support: Vec<Vec<i64>>,
    pub coefficients: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormJson {
    pub constant: String,
    pub coeffs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MasterJson {
    pub variables: Vec<String>,
    pub forms: Vec<FormJson>,
    pub weights: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemFile {
    Sparse(SparseSystem),
    Master(MasterSystem),
}

fn rationals(field: &str, values: &[String]) -> Result<Vec<BigRational>, SchemaError> {
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            parse_rational(v).ok_or_else(|| field_err(format!("{field}[{k}]"), format!("invalid rational {v:?}")))
        })
        .collect()
}

impl SparseJson {
    pub fn to_system(&self) -> Result<SparseSystem, SchemaError> {
        let d = self.variables.len();
        for (k, e) in self.support.iter().enumerate() {
            if e.len() != d {
                return Err(field_err(
                    format!("support[{k}]"),
                    format!("has {} entries, expected {d} (one per variable)", e.len()),
                ));
            }
        }
        let mut exponents = vec![vec![BigInt::zero(); d]];
        exponents.extend(
            self.support
                .iter()
                .map(|e| e.iter().map(|&v| BigInt::from(v)).collect()),
        );
        let mut coefficients = Vec::new();
        for (i, row) in self.coefficients.iter().enumerate() {
            if row.len() != exponents.len() {
                return Err(field_err(
                    format!("coefficients[{i}]"),
                    format!(
                        "has {} entries, expected {} (constant plus one per support column)",
                        row.len(),
                        exponents.len()
                    ),
                ));
            }
            coefficients.push(rationals(&format!("coefficients[{i}]"), row)?);
        }
        if coefficients.is_empty() {
            return Err(field_err("coefficients", "no polynomials given"));
        }
        let raw = RawSparseSystem {
            variables: self.variables.clone(),
            exponents,
            coefficients,
        };
        Ok(normalize_support(&raw)?)
    }

    pub fn from_system(s: &SparseSystem) -> Self {
        let support = s
            .support()
            .matrix()
            .columns()
            .iter()
            .map(|c| c.iter().map(|v| v.to_i64().expect("exponent fits i64")).collect())
            .collect();
        let coefficients = s
            .coefficients()
            .row_vecs()
            .iter()
            .map(|r| r.iter().map(format_rational).collect())
            .collect();
        SparseJson {
            variables: s.variables().to_vec(),
            support,
            coefficients,
        }
    }
}

impl MasterJson {
    pub fn to_system(&self) -> Result<MasterSystem, SchemaError> {
        let d = self.variables.len();
        let mut forms = Vec::new();
        for (i, f) in self.forms.iter().enumerate() {
            let constant = parse_rational(&f.constant).ok_or_else(|| {
                field_err(format!("forms[{i}].constant"), format!("invalid rational {:?}", f.constant))
            })?;
            if f.coeffs.len() != d {
                return Err(field_err(
                    format!("forms[{i}].coeffs"),
                    format!("has {} entries, expected {d} (one per variable)", f.coeffs.len()),
                ));
            }
            let gradient = rationals(&format!("forms[{i}].coeffs"), &f.coeffs)?;
            forms.push(AffineForm::new(constant, gradient));
        }
        for (j, w) in self.weights.iter().enumerate() {
            if w.len() != forms.len() {
                return Err(field_err(
                    format!("weights[{j}]"),
                    format!("has {} entries, expected {} (one per form)", w.len(), forms.len()),
                ));
            }
        }
        if self.weights.is_empty() {
            return Err(field_err("weights", "no weights given"));
        }
        let arrangement = Arrangement::new(d, forms)?;
        let weights = IntMatrix::from_rows(&self.weights, self.forms.len());
        Ok(MasterSystem::new(self.variables.clone(), arrangement, weights)?)
    }

    pub fn from_system(ms: &MasterSystem) -> Self {
        let forms = ms
            .arrangement()
            .forms()
            .iter()
            .map(|f| FormJson {
                constant: format_rational(&f.constant),
                coeffs: f.gradient.iter().map(format_rational).collect(),
            })
            .collect();
        let weights = ms
            .weights()
            .matrix()
            .to_i64_rows()
            .expect("weights fit i64");
        MasterJson {
            variables: ms.variables().to_vec(),
            forms,
            weights,
        }
    }
}

/// Parse either schema, choosing by the fields present.
pub fn parse_system(text: &str) -> Result<SystemFile, SchemaError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value.as_object().ok_or(SchemaError::UnknownKind)?;
    if obj.contains_key("support") {
        let s: SparseJson = serde_json::from_value(value)?;
        Ok(SystemFile::Sparse(s.to_system()?))
    } else if obj.contains_key("forms") {
        let m: MasterJson = serde_json::from_value(value)?;
        Ok(SystemFile::Master(m.to_system()?))
    } else {
        Err(SchemaError::UnknownKind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::rat;

    const SPARSE: &str = r#"{
        "variables": ["x", "y"],
        "support": [[3, 2], [1, 2], [4, -1], [4, 1]],
        "coefficients": [["-1/2", "-3", "1", "2", "-4"], ["-1/2", "1", "-1", "0", "2"]]
    }"#;

    const MASTER: &str = r#"{
        "variables": ["s", "t"],
        "forms": [
            {"constant": "-1/2", "coeffs": ["1", "-1"]},
            {"constant": "-1", "coeffs": ["1", "1"]},
            {"constant": "0", "coeffs": ["1", "0"]},
            {"constant": "0", "coeffs": ["0", "1"]}
        ],
        "weights": [[-1, 3, 2, -2], [3, -1, 1, -3]]
    }"#;

    #[test]
    fn rationals_roundtrip() {
        assert_eq!(parse_rational("-2/4"), Some(rat(-1, 2)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(format_rational(&rat(6, -4)), "-3/2");
        assert_eq!(format_rational(&rat(3, 1)), "3");
    }

    #[test]
    fn parses_both_kinds() {
        match parse_system(SPARSE).unwrap() {
            SystemFile::Sparse(s) => {
                assert_eq!(s.dims(), (2, 0, 2));
                let back = SparseJson::from_system(&s);
                assert_eq!(back, serde_json::from_str::<SparseJson>(SPARSE).unwrap());
            }
            _ => panic!("expected a sparse system"),
        }
        match parse_system(MASTER).unwrap() {
            SystemFile::Master(m) => {
                assert_eq!(m.dims(), (2, 0, 2));
                let back = MasterJson::from_system(&m);
                assert_eq!(back, serde_json::from_str::<MasterJson>(MASTER).unwrap());
            }
            _ => panic!("expected a master system"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        let bad = SPARSE.replace("\"-3\"", "\"-3/x\"");
        let err = parse_system(&bad).unwrap_err().to_string();
        assert!(err.contains("coefficients[0][1]"), "{err}");

        let short = MASTER.replace("[3, -1, 1, -3]", "[3, -1, 1]");
        let err = parse_system(&short).unwrap_err().to_string();
        assert!(err.contains("weights[1]"), "{err}");

        assert!(matches!(parse_system("{\"variables\": []}"), Err(SchemaError::UnknownKind)));
        assert!(matches!(parse_system("{nope"), Err(SchemaError::Json(_))));
    }
}
