//! JSON description of a user-defined nested summation.
//!
//! ```json
//! {
//!   "q": 2, "r": 2, "dim": 1,
//!   "variables": [{ "name": "P", "kind": "sym", "rows": 1 }],
//!   "lyapunov": "P",
//!   "vertices": [
//!     { "index": [1, 1], "constant": ["-1"], "terms": { "P[1,1]": ["1/2"] } }
//!   ]
//! }
//! ```
//!
//! Rationals are strings (`"3"`, `"-7/4"`, `"0.25"`). Vertices may list
//! tuples shorter than `q`; trailing indices are then ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{format_rational, parse_rational, AffineSymMatrix, PlmiSpec, Rational, SymMatrix, VarKind, VarRegistry};
use crate::combinat::{all_tuples, IndexTuple};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    /// `"scalar"`, `"sym"` or `"mat"`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDecl {
    pub index: Vec<usize>,
    #[serde(default)]
    pub constant: Vec<String>,
    #[serde(default)]
    pub terms: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub q: usize,
    pub r: usize,
    pub dim: usize,
    pub variables: Vec<VariableDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<String>,
    pub vertices: Vec<VertexDecl>,
}

fn field_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

fn parse_matrix(path: &str, dim: usize, values: &[String]) -> Result<SymMatrix<Rational>> {
    if values.len() != dim * dim {
        return Err(field_err(
            path,
            format!("expected {} row-major entries, got {}", dim * dim, values.len()),
        ));
    }
    let parsed: Vec<Rational> = values
        .iter()
        .enumerate()
        .map(|(n, v)| parse_rational(v).map_err(|e| field_err(&format!("{path}[{n}]"), e)))
        .collect::<Result<_>>()?;
    SymMatrix::from_row_major(dim, &parsed).map_err(|e| field_err(path, e))
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("spec file, line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec file serializes")
    }

    fn registry(&self) -> Result<VarRegistry> {
        let mut reg = VarRegistry::new();
        for (n, v) in self.variables.iter().enumerate() {
            let path = format!("variables[{n}]");
            let res = match v.kind.as_str() {
                "scalar" => reg.add_scalar(&v.name).map(|_| ()),
                "sym" => {
                    let size = v
                        .rows
                        .or(v.cols)
                        .ok_or_else(|| field_err(&path, "`sym` needs `rows`"))?;
                    if v.cols.is_some_and(|c| c != size) {
                        return Err(field_err(&path, "`sym` must be square"));
                    }
                    reg.add_symmetric(&v.name, size).map(|_| ())
                }
                "mat" => {
                    let rows = v.rows.ok_or_else(|| field_err(&path, "`mat` needs `rows`"))?;
                    let cols = v.cols.ok_or_else(|| field_err(&path, "`mat` needs `cols`"))?;
                    reg.add_general(&v.name, rows, cols).map(|_| ())
                }
                other => {
                    return Err(field_err(
                        &format!("{path}.kind"),
                        format!("unknown kind `{other}` (scalar, sym, mat)"),
                    ))
                }
            };
            res.map_err(|e| field_err(&path, e))?;
        }
        Ok(reg)
    }

    /// Validates the document and builds the spec.
    pub fn to_spec(&self) -> Result<PlmiSpec> {
        if self.q == 0 || self.r == 0 || self.dim == 0 {
            return Err(Error::Parse("`q`, `r` and `dim` must be positive".into()));
        }
        let reg = Arc::new(self.registry()?);
        let id = reg.id();
        let significant = self.vertices.first().map_or(self.q, |v| v.index.len());
        if significant == 0 || significant > self.q {
            return Err(field_err(
                "vertices[0].index",
                format!("length must lie in 1..={}", self.q),
            ));
        }
        let mut table: BTreeMap<IndexTuple, AffineSymMatrix> = BTreeMap::new();
        for (n, v) in self.vertices.iter().enumerate() {
            let path = format!("vertices[{n}]");
            if v.index.len() != significant {
                return Err(field_err(
                    &format!("{path}.index"),
                    format!("expected length {significant} like vertices[0]"),
                ));
            }
            let tuple = IndexTuple::new(v.index.clone(), self.r).map_err(|e| field_err(&format!("{path}.index"), e))?;
            let constant = if v.constant.is_empty() {
                SymMatrix::zeros(self.dim)
            } else {
                parse_matrix(&format!("{path}.constant"), self.dim, &v.constant)?
            };
            let mut terms = Vec::new();
            for (entry, values) in &v.terms {
                let tpath = format!("{path}.terms.{entry}");
                let var = reg
                    .id_of(entry)
                    .ok_or_else(|| field_err(&tpath, "unknown variable entry"))?;
                terms.push((var, parse_matrix(&tpath, self.dim, values)?));
            }
            let expr = AffineSymMatrix::new(id, constant, terms)?;
            if table.insert(tuple.clone(), expr).is_some() {
                return Err(field_err(&format!("{path}.index"), format!("duplicate tuple {tuple}")));
            }
        }
        let mut entries = Vec::with_capacity(table.len());
        for t in all_tuples(self.r, significant) {
            entries.push(
                table
                    .remove(&t)
                    .ok_or_else(|| field_err("vertices", format!("missing tuple {t}")))?,
            );
        }
        let spec = PlmiSpec::from_table(self.q, self.r, self.dim, reg, significant, entries)?;
        match &self.lyapunov {
            Some(name) => spec.with_lyapunov(name),
            None => Ok(spec),
        }
    }

    /// Serializes an existing spec (its significant-index table).
    pub fn from_spec(spec: &PlmiSpec) -> Self {
        let reg = spec.registry();
        let variables = reg
            .blocks()
            .iter()
            .map(|b| match b.kind {
                VarKind::Scalar => VariableDecl {
                    name: b.name.clone(),
                    kind: "scalar".into(),
                    rows: None,
                    cols: None,
                },
                VarKind::Symmetric { n } => VariableDecl {
                    name: b.name.clone(),
                    kind: "sym".into(),
                    rows: Some(n),
                    cols: None,
                },
                VarKind::General { rows, cols } => VariableDecl {
                    name: b.name.clone(),
                    kind: "mat".into(),
                    rows: Some(rows),
                    cols: Some(cols),
                },
            })
            .collect();
        let fmt = |m: &SymMatrix<Rational>| m.to_row_major().iter().map(format_rational).collect::<Vec<_>>();
        let vertices = spec
            .table_entries()
            .map(|(t, e)| VertexDecl {
                index: t.entries().to_vec(),
                constant: fmt(e.constant_part()),
                terms: e
                    .terms()
                    .iter()
                    .map(|(&v, m)| (reg.scalars()[v].name.clone(), fmt(m)))
                    .collect(),
            })
            .collect();
        SpecFile {
            q: spec.q(),
            r: spec.r(),
            dim: spec.dim(),
            variables,
            lyapunov: spec.lyapunov().map(str::to_string),
            vertices,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matexpr::make_example_spec;

    const SMALL: &str = r#"{
      "q": 2, "r": 2, "dim": 1,
      "variables": [{ "name": "p", "kind": "scalar" }],
      "vertices": [
        { "index": [1, 1], "constant": ["-1"], "terms": { "p": ["1/2"] } },
        { "index": [1, 2], "constant": ["0.25"] },
        { "index": [2, 1], "terms": { "p": ["-3"] } },
        { "index": [2, 2], "constant": ["2"] }
      ]
    }"#;

    #[test]
    fn parses_small_document() {
        let spec = SpecFile::from_json(SMALL).unwrap().to_spec().unwrap();
        assert_eq!(spec.q(), 2);
        let v = spec.vertex(&IndexTuple::new(vec![1, 1], 2).unwrap());
        assert_eq!(v.eval(&[4.0]).unwrap()[(0, 0)], 1.0);
    }

    #[test]
    fn missing_tuple_is_named() {
        let text = SMALL.replace(
            r#"{ "index": [2, 2], "constant": ["2"] }"#,
            r#"{ "index": [2, 1], "constant": ["2"] }"#,
        );
        let err = SpecFile::from_json(&text).unwrap().to_spec().unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn bad_rational_reports_field() {
        let text = SMALL.replace("1/2", "one half");
        let err = SpecFile::from_json(&text).unwrap().to_spec().unwrap_err().to_string();
        assert!(err.contains("vertices[0].terms.p[0]"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = SpecFile::from_json("{\n \"q\": 2,\n oops }").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn example_round_trip() {
        let spec = make_example_spec(2.0, 3.0, 3).unwrap();
        let file = SpecFile::from_spec(&spec);
        let back = SpecFile::from_json(&file.to_json()).unwrap().to_spec().unwrap();
        assert_eq!(back.q(), 3);
        assert_eq!(back.significant(), 2);
        assert_eq!(back.lyapunov(), Some("Q"));
        for t in all_tuples(3, 3) {
            assert_eq!(back.vertex(&t), spec.vertex(&t));
        }
    }
}
