//! JSON operator specifications.
//!
//! ```json
//! {"domain": {"lower": 0, "upper": 1, "dim": 1},
//!  "coefficients": {"kind": "builtin", "name": "polynomial",
//!                   "params": {"a": [[1.0, 0.5]], "a0": [[0.0, 0.0, 2.0]]}}}
//! ```
//!
//! Builtin names: `constant` (`a`, `a0` numbers, `a` may be per-axis),
//! `linear` and `polynomial` (per-axis ascending coefficient lists; a single list for
//! `a` applies to every axis, a single list for `a0` is a polynomial in `x_1`).
//! `linear` lists hold at most two coefficients. Kind `inflation` builds the
//! Hermitized adjoint Fokker-Planck coefficients of a potential model.

use super::coefficients::{OperatorSpec, PolynomialCoefficients};
use super::grid::DomainBox;
use crate::error::{Error, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    domain: DomainBox,
    coefficients: CoefficientDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientDoc {
    kind: String,
    name: String,
    #[serde(default)]
    params: serde_json::Value,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Lists {
    Scalar(f64),
    One(Vec<f64>),
    PerAxis(Vec<Vec<f64>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyParams {
    a: Lists,
    #[serde(default)]
    a0: Option<Lists>,
}

fn diffusion_lists(l: Lists, d: usize) -> Result<Vec<Vec<f64>>> {
    match l {
        Lists::Scalar(v) => Ok(vec![vec![v]; d]),
        Lists::One(c) => Ok(vec![c; d]),
        Lists::PerAxis(v) if v.len() == d => Ok(v),
        Lists::PerAxis(v) => Err(Error::Config(format!("`a` needs {d} axis lists, got {}", v.len()))),
    }
}

fn potential_lists(l: Option<Lists>, d: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![vec![]; d];
    match l {
        None => {}
        Some(Lists::Scalar(v)) => out[0] = vec![v],
        Some(Lists::One(c)) => out[0] = c,
        Some(Lists::PerAxis(v)) if v.len() <= d => {
            for (i, c) in v.into_iter().enumerate() {
                out[i] = c;
            }
        }
        Some(Lists::PerAxis(v)) => {
            return Err(Error::Config(format!("`a0` has {} axis lists for dimension {d}", v.len())))
        }
    }
    Ok(out)
}

fn builtin(domain: DomainBox, name: &str, params: serde_json::Value) -> Result<OperatorSpec> {
    let d = domain.dim;
    let p: PolyParams = serde_json::from_value(params)
        .map_err(|e| Error::Config(format!("builtin `{name}` params: {e}")))?;
    let a = diffusion_lists(p.a, d)?;
    let a0 = potential_lists(p.a0, d)?;
    match name {
        "constant" => {
            if a.iter().chain(&a0).any(|c| c.len() > 1) {
                return Err(Error::Config("`constant` takes numbers, not lists".into()));
            }
        }
        "linear" => {
            if a.iter().chain(&a0).any(|c| c.len() > 2) {
                return Err(Error::Config("`linear` lists hold at most 2 coefficients".into()));
            }
        }
        "polynomial" => {}
        other => return Err(Error::Config(format!("unknown builtin coefficient kind `{other}`"))),
    }
    if a.iter().chain(&a0).flatten().any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite coefficient".into()));
    }
    let mut spec = OperatorSpec::polynomial(domain, PolynomialCoefficients { a0, a })?;
    spec.label = name.to_string();
    Ok(spec)
}

pub fn parse_operator_spec(text: &str) -> Result<OperatorSpec> {
    let doc: SpecDoc = serde_json::from_str(text)?;
    doc.domain.validate()?;
    match doc.coefficients.kind.as_str() {
        "builtin" => builtin(doc.domain, &doc.coefficients.name, doc.coefficients.params),
        "inflation" => crate::inflation::inflation_operator_spec(doc.domain, &doc.coefficients.name, doc.coefficients.params),
        other => Err(Error::Config(format!("unknown coefficient kind `{other}`"))),
    }
}

pub fn load_operator_spec(path: &Path) -> Result<OperatorSpec> {
    parse_operator_spec(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_document() {
        let s = parse_operator_spec(
            r#"{"domain":{"lower":0,"upper":1,"dim":2},
                "coefficients":{"kind":"builtin","name":"constant","params":{"a":1.0,"a0":0.0}}}"#,
        )
        .unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.a(1, &[0.3, 0.7]), 1.0);
        assert_eq!(s.a0(&[0.3, 0.7]), 0.0);
    }

    #[test]
    fn polynomial_and_linear() {
        let s = parse_operator_spec(
            r#"{"domain":{"lower":-1,"upper":1,"dim":2},
                "coefficients":{"kind":"builtin","name":"polynomial",
                  "params":{"a":[[1.0,0.0,0.5],[2.0]],"a0":[[0.0,1.0],[0.0,0.0,3.0]]}}}"#,
        )
        .unwrap();
        assert_eq!(s.a(0, &[0.5, 0.0]), 1.125);
        assert_eq!(s.a(1, &[0.5, 0.0]), 2.0);
        assert_eq!(s.a0(&[0.5, 2.0]), 12.5);
        let l = parse_operator_spec(
            r#"{"domain":{"lower":0,"upper":1,"dim":1},
                "coefficients":{"kind":"builtin","name":"linear","params":{"a":[1.0,1.0]}}}"#,
        )
        .unwrap();
        assert_eq!(l.a(0, &[0.5]), 1.5);
        assert_eq!(l.a0(&[0.5]), 0.0);
    }

    #[test]
    fn rejections() {
        for bad in [
            "{",
            r#"{"domain":{"lower":1,"upper":0,"dim":1},"coefficients":{"kind":"builtin","name":"constant","params":{"a":1}}}"#,
            r#"{"domain":{"lower":0,"upper":1,"dim":1},"coefficients":{"kind":"builtin","name":"cubic","params":{"a":1}}}"#,
            r#"{"domain":{"lower":0,"upper":1,"dim":1},"coefficients":{"kind":"magic","name":"constant","params":{"a":1}}}"#,
            r#"{"domain":{"lower":0,"upper":1,"dim":1},"coefficients":{"kind":"builtin","name":"linear","params":{"a":[1,2,3]}}}"#,
            r#"{"domain":{"lower":0,"upper":1,"dim":2},"coefficients":{"kind":"builtin","name":"polynomial","params":{"a":[[1],[1],[1]]}}}"#,
        ] {
            let e = parse_operator_spec(bad).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}: {e}");
        }
    }
}
