//! JSON schemas for matrices, subspaces, rings, charges, algebras and functionals, and a
//! canonical writer (sorted keys, floats with 17 significant digits).
//!
//! Complex numbers are `[re, im]` pairs. Matrices are `{"n": n, "data": [...]}` in row-major
//! order; subspace bases are column-major.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::charges::{Charge, SetRing};
use crate::error::{Error, Result};
use crate::functionals::{Fixture, Functional, StarAlgebra};
use crate::linalg::{c64, CMat, CVec, HermitianMatrix, Subspace, Tolerance, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub n: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let n = m.nrows();
        let data = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
            .collect();
        MatrixJson { n, data }
    }

    /// Square complex matrix without any symmetry requirement.
    pub fn to_matrix(&self) -> Result<CMat> {
        if self.data.len() != self.n * self.n {
            return Err(Error::Parse(format!(
                "matrix with n = {} needs {} entries, found {}",
                self.n,
                self.n * self.n,
                self.data.len()
            )));
        }
        Ok(CMat::from_fn(self.n, self.n, |r, c| {
            let [re, im] = self.data[r * self.n + c];
            c64(re, im)
        }))
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceJson {
    pub ambient: usize,
    pub k: usize,
    pub basis: Vec<[f64; 2]>,
}

impl SubspaceJson {
    pub fn to_subspace(&self) -> Result<Subspace> {
        if self.basis.len() != self.ambient * self.k {
            return Err(Error::Parse(format!(
                "subspace basis needs {} entries, found {}",
                self.ambient * self.k,
                self.basis.len()
            )));
        }
        Subspace::new(CMat::from_fn(self.ambient, self.k, |r, c| {
            let [re, im] = self.basis[c * self.ambient + r];
            c64(re, im)
        }))
    }

    pub fn from_subspace(s: &Subspace) -> Self {
        SubspaceJson {
            ambient: s.ambient_dim(),
            k: s.dim(),
            basis: s.basis().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingJson {
    pub universe: usize,
    pub members: Vec<u32>,
}

impl RingJson {
    pub fn to_ring(&self) -> Result<SetRing> {
        SetRing::new(self.universe, self.members.clone())
    }

    pub fn from_ring(r: &SetRing) -> Self {
        RingJson {
            universe: r.universe_size(),
            members: r.members().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeJson {
    pub ring: RingJson,
    pub values: Vec<f64>,
}

impl ChargeJson {
    /// `values` are matched to the members as listed in the file, which need not be sorted.
    pub fn to_charge(&self) -> Result<Charge> {
        if self.values.len() != self.ring.members.len() {
            return Err(Error::Parse(format!(
                "{} values for {} members",
                self.values.len(),
                self.ring.members.len()
            )));
        }
        let ring = Arc::new(self.ring.to_ring()?);
        let mut values = vec![f64::NAN; ring.members().len()];
        for (&m, &v) in self.ring.members.iter().zip(&self.values) {
            let i = ring.index_of(m).expect("listed members belong to the ring");
            if !values[i].is_nan() && values[i] != v {
                return Err(Error::InvalidCharge(format!("member {m:#b} listed twice with different values")));
            }
            values[i] = v;
        }
        Charge::new(ring, values)
    }

    pub fn from_charge(c: &Charge) -> Self {
        ChargeJson {
            ring: RingJson::from_ring(c.ring()),
            values: c.values().to_vec(),
        }
    }
}

/// Either an explicit algebra or a named fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraJson {
    Fixture {
        fixture: String,
        param: usize,
    },
    Explicit {
        dim: usize,
        structure: Vec<Vec<Vec<[f64; 2]>>>,
        involution: MatrixJson,
    },
}

impl AlgebraJson {
    pub fn to_algebra(&self) -> Result<StarAlgebra> {
        match self {
            AlgebraJson::Fixture { fixture, param } => Fixture::from_name(fixture)
                .ok_or_else(|| Error::Parse(format!("unknown fixture {fixture:?}")))?
                .build(*param),
            AlgebraJson::Explicit {
                dim,
                structure,
                involution,
            } => {
                if structure.len() != *dim {
                    return Err(Error::Parse(format!(
                        "structure has {} rows for dim {dim}",
                        structure.len()
                    )));
                }
                let structure = structure
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|coeffs| coeffs.iter().map(|&[re, im]| c64(re, im)).collect())
                            .collect()
                    })
                    .collect();
                StarAlgebra::new(structure, involution.to_matrix()?)
            }
        }
    }

    pub fn from_algebra(a: &StarAlgebra) -> Self {
        AlgebraJson::Explicit {
            dim: a.dim(),
            structure: a
                .structure()
                .iter()
                .map(|row| row.iter().map(|c| c.iter().map(|z| [z.re, z.im]).collect()).collect())
                .collect(),
            involution: MatrixJson::from_matrix(a.involution()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalJson {
    pub coeffs: Vec<[f64; 2]>,
}

impl FunctionalJson {
    pub fn to_functional(&self, algebra: Arc<StarAlgebra>, tol: &Tolerance) -> Result<Functional> {
        Functional::new(algebra, complex_vec(&self.coeffs), tol)
    }

    pub fn from_functional(f: &Functional) -> Self {
        FunctionalJson {
            coeffs: f.coeffs().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

pub fn complex_vec(pairs: &[[f64; 2]]) -> CVec {
    CVec::from_iterator(pairs.len(), pairs.iter().map(|&[re, im]| c64(re, im)))
}

pub fn complex_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("schema types serialize")
}

/// Pretty-printed JSON with sorted keys and floats as `d.dddddddddddddddde±x`.
/// Non-finite floats become strings.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let indent = |out: &mut String, d: usize| {
        out.push('\n');
        out.extend(std::iter::repeat_n("  ", d));
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                write_float(out, n.as_f64().expect("f64 number"));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            // arrays of scalars stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, depth + 1);
                }
                out.push(']');
                return;
            }
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(out, depth + 1);
                write_value(out, x, depth + 1);
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(out, depth + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*k], depth + 1);
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn write_float(out: &mut String, x: f64) {
    if x.is_finite() {
        // -0.0 prints as 0
        let x = if x == 0.0 { 0.0 } else { x };
        let _ = write!(out, "{x:.16e}");
    } else {
        let _ = write!(out, "\"{x}\"");
    }
}

/// A float that survives `serde_json::Value` even when not finite.
pub fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn matrix_round_trip() {
        let m = CMat::from_fn(2, 2, |r, c| c64(r as f64, c as f64 - r as f64));
        let j = MatrixJson::from_matrix(&m);
        assert_eq!(j.data[1], [0.0, 1.0]);
        assert_eq!(j.to_matrix().unwrap(), m);
    }

    #[test]
    fn matrix_length_checked() {
        let j: MatrixJson = parse(r#"{"n": 2, "data": [[1, 0]]}"#, "A").unwrap();
        assert!(matches!(j.to_matrix(), Err(Error::Parse(_))));
        assert!(parse::<MatrixJson>(r#"{"n": 2}"#, "A").is_err());
    }

    #[test]
    fn subspace_is_column_major() {
        let s: SubspaceJson = parse(r#"{"ambient": 2, "k": 1, "basis": [[0, 0], [1, 0]]}"#, "M").unwrap();
        let sub = s.to_subspace().unwrap();
        assert_eq!(sub.basis()[(1, 0)], c64(1.0, 0.0));
    }

    #[test]
    fn charge_values_follow_listed_order() {
        let c: ChargeJson = parse(
            r#"{"ring": {"universe": 2, "members": [3, 0, 2, 1]}, "values": [7, 0, 4, 3]}"#,
            "nu",
        )
        .unwrap();
        assert_eq!(c.to_charge().unwrap().atom_values(), vec![3.0, 4.0]);
    }

    #[test]
    fn algebra_fixture_selector() {
        let a: AlgebraJson = parse(r#"{"fixture": "matrix", "param": 2}"#, "alg").unwrap();
        assert_eq!(a.to_algebra().unwrap().dim(), 4);
        let a: AlgebraJson = parse(r#"{"fixture": "nope", "param": 2}"#, "alg").unwrap();
        assert!(a.to_algebra().is_err());
        let round = AlgebraJson::from_algebra(&crate::functionals::diagonal_algebra(2).unwrap());
        let back: AlgebraJson = parse(&serde_json::to_string(&round).unwrap(), "alg").unwrap();
        assert_eq!(back.to_algebra().unwrap().dim(), 2);
    }

    #[test]
    fn canonical_output() {
        let v = json!({"b": [1.5, 2], "a": {"z": true, "y": null}, "c": "x"});
        let s = canonical_json(&v);
        assert_eq!(
            s,
            "{\n  \"a\": {\n    \"y\": null,\n    \"z\": true\n  },\n  \"b\": [1.5000000000000000e0, 2],\n  \"c\": \"x\"\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][0], 1.5);
        assert_eq!(canonical_json(&float(-0.0)), "0.0000000000000000e0\n");
    }
}
