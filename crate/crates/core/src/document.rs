//! JSON documents for formulas and moment tables.
//!
//! Floats are written in shortest round-trip form, so reading a document
//! back reproduces every coordinate and weight bit for bit. Nested numeric
//! arrays (point rows, moment tables) are kept on one line.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::formula::{Counts, CubatureFormula, Target};
use crate::weights::{ProductWeight, Weight1D};

pub const FORMAT_VERSION: u32 = 1;

fn ser_half_width<S: Serializer>(h: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if h.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*h)
    }
}

fn de_half_width<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(x),
        Raw::Str(s) if s == "inf" || s == "infinity" => Ok(f64::INFINITY),
        Raw::Str(s) => Err(serde::de::Error::custom(format!("half_width must be a number or \"inf\", got {s:?}"))),
    }
}

/// A weight given by its even moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsFile {
    pub label: String,
    #[serde(serialize_with = "ser_half_width", deserialize_with = "de_half_width")]
    pub half_width: f64,
    /// m0, m2, m4, ...
    pub even_moments: Vec<f64>,
}

impl MomentsFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("moments file: {e}")))
    }

    pub fn to_json(&self) -> String {
        to_json_rows(self)
    }

    pub fn to_weight(&self) -> Result<Weight1D> {
        Weight1D::from_moments(self.label.clone(), self.half_width, self.even_moments.clone())
    }

    /// Table of `count` even moments of `w` (fewer if `w` has fewer).
    pub fn from_weight(w: &Weight1D, count: usize) -> Self {
        MomentsFile {
            label: w.label().to_string(),
            half_width: w.half_width(),
            even_moments: w.moment_table(count),
        }
    }
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

fn one() -> f64 {
    1.0
}

/// One coordinate factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Builtin {
        builtin: String,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        scale: f64,
    },
    Moments {
        moments: MomentsFile,
    },
}

/// Moments beyond any degree the constructions reach.
const SERIALISED_MOMENTS: usize = 12;

impl WeightSpec {
    pub fn from_weight(w: &Weight1D) -> Self {
        match w.builtin_parts() {
            Some((name, scale)) => WeightSpec::Builtin {
                builtin: name.to_string(),
                scale,
            },
            None => WeightSpec::Moments {
                moments: MomentsFile::from_weight(w, SERIALISED_MOMENTS),
            },
        }
    }

    pub fn to_weight(&self) -> Result<Weight1D> {
        match self {
            WeightSpec::Builtin { builtin, scale } => {
                let w = builtin_weight(builtin)?;
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Schema(format!("scale must be positive, got {scale}")));
                }
                Ok(if *scale == 1.0 { w } else { w.rescaled(*scale) })
            }
            WeightSpec::Moments { moments } => moments.to_weight(),
        }
    }
}

/// `lebesgue` or `gaussian`.
pub fn builtin_weight(name: &str) -> Result<Weight1D> {
    match name {
        "lebesgue" => Ok(Weight1D::lebesgue()),
        "gaussian" => Ok(Weight1D::gaussian()),
        _ => Err(Error::Schema(format!("unknown built-in weight {name:?}"))),
    }
}

/// The weight of a product target: one spec for all coordinates or one per
/// coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightDoc {
    Uniform(WeightSpec),
    Coordinates(Vec<WeightSpec>),
}

impl WeightDoc {
    pub fn from_product(w: &ProductWeight) -> Self {
        if w.fully_symmetric() {
            WeightDoc::Uniform(WeightSpec::from_weight(w.factor(0)))
        } else {
            WeightDoc::Coordinates(w.factors().iter().map(WeightSpec::from_weight).collect())
        }
    }

    pub fn to_product(&self, dim: usize) -> Result<ProductWeight> {
        match self {
            WeightDoc::Uniform(s) => Ok(ProductWeight::uniform(s.to_weight()?, dim)),
            WeightDoc::Coordinates(specs) => {
                if specs.len() != dim {
                    return Err(Error::Schema(format!("{} coordinate weights for dimension {dim}", specs.len())));
                }
                ProductWeight::new(specs.iter().map(|s| s.to_weight()).collect::<Result<_>>()?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDoc {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub construction: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
}

impl Provenance {
    pub fn new(construction: impl Into<String>) -> Self {
        Provenance {
            construction: construction.into(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsDoc {
    pub raw: usize,
    pub merged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaDocument {
    pub version: u32,
    pub dim: usize,
    pub degree: usize,
    pub target: TargetDoc,
    /// Present for product targets only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightDoc>,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub provenance: Provenance,
    pub counts: CountsDoc,
}

fn param_f64(params: &BTreeMap<String, Value>, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Schema(format!("target parameter `{key}` missing or not a number")))
}

impl FormulaDocument {
    pub fn from_formula(rule: &CubatureFormula, provenance: Provenance) -> Self {
        let (target, weight) = match rule.target() {
            Target::Product(w) => (
                TargetDoc {
                    kind: "product".into(),
                    params: BTreeMap::new(),
                },
                Some(WeightDoc::from_product(w)),
            ),
            Target::Sphere { radius } => (
                TargetDoc {
                    kind: "sphere".into(),
                    params: BTreeMap::from([("radius".to_string(), Value::from(*radius))]),
                },
                None,
            ),
            Target::Mdk { k, radius } => (
                TargetDoc {
                    kind: "mdk".into(),
                    params: BTreeMap::from([
                        ("k".to_string(), Value::from(*k)),
                        ("radius".to_string(), Value::from(*radius)),
                    ]),
                },
                None,
            ),
        };
        let counts = rule.counts();
        FormulaDocument {
            version: FORMAT_VERSION,
            dim: rule.dim(),
            degree: rule.degree(),
            target,
            weight,
            points: rule.points().map(|p| p.iter().map(|v| v + 0.0).collect()).collect(),
            weights: rule.weights().to_vec(),
            provenance,
            counts: CountsDoc {
                raw: counts.raw,
                merged: counts.merged,
            },
        }
    }

    pub fn target(&self) -> Result<Target> {
        match self.target.kind.as_str() {
            "product" => {
                let w = self
                    .weight
                    .as_ref()
                    .ok_or_else(|| Error::Schema("product target without `weight`".into()))?;
                Ok(Target::Product(w.to_product(self.dim)?))
            }
            "sphere" => Ok(Target::Sphere {
                radius: param_f64(&self.target.params, "radius")?,
            }),
            "mdk" => {
                let k = self
                    .target
                    .params
                    .get("k")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::Schema("target parameter `k` missing or not an integer".into()))?;
                Ok(Target::Mdk {
                    k: k as usize,
                    radius: param_f64(&self.target.params, "radius")?,
                })
            }
            other => Err(Error::Schema(format!("unknown target kind {other:?}"))),
        }
    }

    pub fn to_formula(&self) -> Result<CubatureFormula> {
        self.validate()?;
        let coords: Vec<f64> = self.points.iter().flatten().copied().collect();
        let f = CubatureFormula::new(self.dim, coords, self.weights.clone(), self.degree, self.target()?)?;
        Ok(f.with_counts(Counts {
            raw: self.counts.raw,
            merged: self.counts.merged,
        }))
    }

    fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        if self.dim == 0 {
            return Err(Error::Schema("dim must be positive".into()));
        }
        if self.points.len() != self.weights.len() {
            return Err(Error::Schema(format!(
                "{} points but {} weights",
                self.points.len(),
                self.weights.len()
            )));
        }
        if let Some((i, p)) = self.points.iter().enumerate().find(|(_, p)| p.len() != self.dim) {
            return Err(Error::Schema(format!("point {i} has {} coordinates, dim is {}", p.len(), self.dim)));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FormulaDocument = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        to_json_rows(self)
    }
}

/// Pretty JSON with arrays below the first nesting level kept inline.
pub fn to_json_rows<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, RowFormatter::default());
    value.serialize(&mut ser).expect("serialising plain data");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// Pretty printer that writes nested arrays on one line.
#[derive(Default)]
struct RowFormatter {
    indent: usize,
    /// Nesting of open arrays.
    arrays: usize,
    /// Inline depth: > 0 while inside an inline array.
    inline: usize,
    has_value: bool,
}

impl RowFormatter {
    fn newline<W: ?Sized + io::Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for RowFormatter {
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.arrays += 1;
        if self.arrays >= 2 || self.inline > 0 {
            self.inline += 1;
        } else {
            self.indent += 1;
        }
        self.has_value = false;
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.arrays -= 1;
        if self.inline > 0 {
            self.inline -= 1;
        } else {
            self.indent -= 1;
            if self.has_value {
                self.newline(w)?;
            }
        }
        self.has_value = true;
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if self.inline > 0 {
            if !first {
                w.write_all(b", ")?;
            }
            Ok(())
        } else {
            if !first {
                w.write_all(b",")?;
            }
            self.newline(w)
        }
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        if self.inline == 0 {
            self.indent += 1;
        }
        self.has_value = false;
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        if self.inline == 0 {
            self.indent -= 1;
            if self.has_value {
                self.newline(w)?;
            }
        }
        self.has_value = true;
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if self.inline > 0 {
            if !first {
                w.write_all(b", ")?;
            }
            Ok(())
        } else {
            if !first {
                w.write_all(b",")?;
            }
            self.newline(w)
        }
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compose::{build_deg5, build_general};

    #[test]
    fn round_trip_is_bit_exact() {
        let c = build_deg5(&Weight1D::gaussian(), 5).unwrap();
        let doc = FormulaDocument::from_formula(&c.formula, Provenance::new("build_deg5").with("dim", 5));
        let text = doc.to_json();
        let back = FormulaDocument::from_json(&text).unwrap();
        assert_eq!(back, doc);
        let f = back.to_formula().unwrap();
        assert_eq!(f.coords(), c.formula.coords());
        assert_eq!(f.weights(), c.formula.weights());
        assert_eq!(f.counts(), c.formula.counts());
        assert_eq!(f.target(), c.formula.target());
        assert_eq!(text, back.to_json());
    }

    #[test]
    fn rows_are_inline() {
        let c = build_deg5(&Weight1D::lebesgue(), 4).unwrap();
        let text = FormulaDocument::from_formula(&c.formula, Provenance::new("x")).to_json();
        assert!(text.contains("\n    [0.0, 0.0, 0.0, 0.0]"));
        assert!(text.contains("\"uniform\": {\n      \"builtin\": \"lebesgue\"\n    }"));
    }

    #[test]
    fn mixed_weights_round_trip() {
        let t = Weight1D::from_moments("t", 2.0, vec![1.0, 0.5, 0.4, 0.4, 0.45]).unwrap();
        let w = ProductWeight::new(vec![
            Weight1D::lebesgue(),
            Weight1D::gaussian().rescaled(0.5),
            t.clone(),
            t,
        ])
        .unwrap();
        let g = build_general(&w, 2).unwrap();
        let doc = FormulaDocument::from_formula(&g.formula, Provenance::new("general"));
        let f = FormulaDocument::from_json(&doc.to_json()).unwrap().to_formula().unwrap();
        assert_eq!(f.target(), g.formula.target());
    }

    #[test]
    fn moments_file_infinite_width() {
        let m = MomentsFile::from_json(r#"{"label": "g", "half_width": "inf", "even_moments": [1.0, 0.5, 0.75]}"#)
            .unwrap();
        assert!(m.half_width.is_infinite());
        assert!(m.to_json().contains("\"inf\""));
        assert_eq!(MomentsFile::from_json(&m.to_json()).unwrap(), m);
        assert!(m.to_weight().is_ok());
        assert!(matches!(
            MomentsFile::from_json(r#"{"label": "g", "half_width": "wide", "even_moments": [1.0]}"#),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn schema_errors() {
        let c = build_deg5(&Weight1D::lebesgue(), 4).unwrap();
        let mut doc = FormulaDocument::from_formula(&c.formula, Provenance::new("x"));
        doc.weights.pop();
        assert!(matches!(FormulaDocument::from_json(&doc.to_json()), Err(Error::Schema(_))));
        assert!(matches!(FormulaDocument::from_json("{\"version\": 1}"), Err(Error::Schema(_))));
        let mut doc = FormulaDocument::from_formula(&c.formula, Provenance::new("x"));
        doc.version = 9;
        assert!(matches!(FormulaDocument::from_json(&doc.to_json()), Err(Error::Schema(_))));
    }

    #[test]
    fn sphere_target() {
        let f = crate::sphere::product_deg5_sphere(5).unwrap();
        let doc = FormulaDocument::from_formula(&f, Provenance::new("sphere"));
        assert!(doc.weight.is_none());
        assert_eq!(doc.to_formula().unwrap().target(), &Target::Sphere { radius: 1.0 });
    }
}
