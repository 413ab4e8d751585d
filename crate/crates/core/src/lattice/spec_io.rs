//! JSON lattice documents. Matrix entries may be numbers, strings holding
//! a decimal or a rational `p/q`, or `[re, im]` pairs of either.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Covolume, ExcludedBall, Generator, LatticeError, LatticeSpec, Region};
use crate::geometry::{Isometry, Model, Point};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(Scalar),
    Complex([Scalar; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
struct RawGenerator {
    name: String,
    matrix: [[Entry; 2]; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBall {
    center: [f64; 2],
    radius: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRegion {
    x_range: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x2_range: Option<[f64; 2]>,
    floor: f64,
    #[serde(default)]
    excluded_balls: Vec<RawBall>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawCovolume {
    value: Scalar,
    #[serde(default)]
    source: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    model: String,
    generators: Vec<RawGenerator>,
    #[serde(default)]
    known_covolume: Option<RawCovolume>,
    #[serde(default)]
    known_rank: Option<u32>,
    region: RawRegion,
    basepoint: Vec<f64>,
}

fn parse_scalar(s: &Scalar) -> Result<f64, LatticeError> {
    let bad = |t: &str| LatticeError::InvalidSpec(format!("cannot parse entry `{t}`"));
    let v = match s {
        Scalar::Number(x) => *x,
        Scalar::Text(t) => {
            let t = t.trim();
            match t.split_once('/') {
                Some((p, q)) => {
                    let p: f64 = p.trim().parse().map_err(|_| bad(t))?;
                    let q: f64 = q.trim().parse().map_err(|_| bad(t))?;
                    if q == 0.0 {
                        return Err(bad(t));
                    }
                    p / q
                }
                None => t.parse().map_err(|_| bad(t))?,
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LatticeError::InvalidSpec("non-finite entry".into()))
    }
}

fn parse_entry(e: &Entry) -> Result<Complex64, LatticeError> {
    match e {
        Entry::Real(s) => Ok(Complex64::new(parse_scalar(s)?, 0.0)),
        Entry::Complex([re, im]) => Ok(Complex64::new(parse_scalar(re)?, parse_scalar(im)?)),
    }
}

impl LatticeSpec {
    pub fn from_json(text: &str) -> Result<Self, LatticeError> {
        let raw: RawSpec =
            serde_json::from_str(text).map_err(|e| LatticeError::InvalidSpec(e.to_string()))?;
        let model: Model = raw.model.parse().map_err(LatticeError::InvalidSpec)?;
        let generators = raw
            .generators
            .iter()
            .map(|g| {
                let [[a, b], [c, d]] = &g.matrix;
                let m = [
                    parse_entry(a)?,
                    parse_entry(b)?,
                    parse_entry(c)?,
                    parse_entry(d)?,
                ];
                Ok(Generator {
                    name: g.name.clone(),
                    element: Isometry::from_entries(model, m)?,
                })
            })
            .collect::<Result<Vec<_>, LatticeError>>()?;
        let known_covolume = raw
            .known_covolume
            .map(|c| {
                Ok::<_, LatticeError>(Covolume {
                    value: parse_scalar(&c.value)?,
                    source: c.source,
                })
            })
            .transpose()?;
        let region = Region {
            x_range: (raw.region.x_range[0], raw.region.x_range[1]),
            x2_range: raw.region.x2_range.map(|r| (r[0], r[1])),
            floor: raw.region.floor,
            excluded_balls: raw
                .region
                .excluded_balls
                .into_iter()
                .map(|b| ExcludedBall {
                    center: b.center,
                    radius: b.radius,
                })
                .collect(),
        };
        let basepoint = Point::from_coords(&raw.basepoint)?;
        if basepoint.model() != model {
            return Err(LatticeError::InvalidSpec(
                "basepoint dimension does not match model".into(),
            ));
        }
        LatticeSpec::new(
            raw.name,
            model,
            generators,
            known_covolume,
            raw.known_rank,
            region,
            basepoint,
        )
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, LatticeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LatticeError::InvalidSpec(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Serializes in the same document format that [`LatticeSpec::from_json`] reads.
    pub fn to_json(&self) -> String {
        let entry = |z: Complex64| match self.model {
            Model::H2 => Entry::Real(Scalar::Number(z.re)),
            Model::H3 => Entry::Complex([Scalar::Number(z.re), Scalar::Number(z.im)]),
        };
        let raw = RawSpec {
            name: self.name.clone(),
            model: self.model.to_string(),
            generators: self
                .generators
                .iter()
                .map(|g| {
                    let [a, b, c, d] = g.element.entries();
                    RawGenerator {
                        name: g.name.clone(),
                        matrix: [[entry(a), entry(b)], [entry(c), entry(d)]],
                    }
                })
                .collect(),
            known_covolume: self.known_covolume.as_ref().map(|c| RawCovolume {
                value: Scalar::Number(c.value),
                source: c.source.clone(),
            }),
            known_rank: self.known_rank,
            region: RawRegion {
                x_range: [self.region.x_range.0, self.region.x_range.1],
                x2_range: self.region.x2_range.map(|(a, b)| [a, b]),
                floor: self.region.floor,
                excluded_balls: self
                    .region
                    .excluded_balls
                    .iter()
                    .map(|b| RawBall {
                        center: b.center,
                        radius: b.radius,
                    })
                    .collect(),
            },
            basepoint: self.basepoint.coords(),
        };
        serde_json::to_string_pretty(&raw).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::super::bundled;
    use super::*;

    #[test]
    fn parses_rationals_and_pairs() {
        let text = r#"{
            "name": "toy", "model": "H3",
            "generators": [{"name": "U", "matrix": [[1, ["0", "1/2"]], [0, "1.0"]]}],
            "known_covolume": {"value": "3/2", "source": "made up"},
            "region": {"x_range": [-0.5, 0.5], "x2_range": [-0.25, 0.25], "floor": 1.0},
            "basepoint": [0.0, 0.0, 2.0]
        }"#;
        let l = LatticeSpec::from_json(text).unwrap();
        assert_eq!(l.known_covolume.as_ref().unwrap().value, 1.5);
        let b = l.generators[0].element.entries()[1];
        assert_eq!(b, Complex64::new(0.0, 0.5));
        assert_eq!(l.min_translation(), Some(0.5));
    }

    #[test]
    fn round_trips_bundled_specs() {
        for name in super::super::bundled_names() {
            let l = bundled(name).unwrap();
            let back = LatticeSpec::from_json(&l.to_json()).unwrap();
            assert_eq!(back.name, l.name);
            for (g, h) in l.generators.iter().zip(&back.generators) {
                assert!(g.element.projectively_eq(&h.element, 1e-15));
            }
            assert_eq!(back.region, l.region);
        }
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(LatticeSpec::from_json("{}").is_err());
        let text = r#"{"name": "x", "model": "H2",
            "generators": [{"name": "g", "matrix": [[1, "1/0"], [0, 1]]}],
            "region": {"x_range": [0, 1], "floor": 1}, "basepoint": [0, 1]}"#;
        assert!(LatticeSpec::from_json(text).is_err());
    }
}
