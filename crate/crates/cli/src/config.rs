//! Input schema: validation with JSON-pointer errors and construction of the operator.

use std::f64::consts::TAU;

use serde::Serialize;
use serde_json::{Map, Value};
use weyl_core::dirac::build_dirac;
use weyl_core::linalg::{c, CMat};
use weyl_core::trig::{Harmonic, Wave};
use weyl_core::{FrameBundle, OperatorSpec, TrigPoly};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum FrameInput {
    K3(i32),
    Harmonics(Vec<Harmonic>),
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub identity: f64,
    pub curvature_torsion: f64,
    pub unitary: f64,
    pub self_adjoint: f64,
    pub charge_conjugation: f64,
    pub closed_form: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { identity: 1e-8, curvature_torsion: 1e-6, unitary: 1e-6, self_adjoint: 1e-7, charge_conjugation: 1e-10, closed_form: 1e-8 }
    }
}

/// A validated input document.
#[derive(Clone, Debug)]
pub struct InputSpec {
    pub periods: [f64; 3],
    pub frame: FrameInput,
    pub potential: Vec<Harmonic>,
    pub half_density: bool,
    pub truncation: Option<usize>,
    pub quadrature: Option<(usize, usize)>,
    pub mollifier_t: Option<f64>,
    pub tolerances: Tolerances,
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Schema { pointer: pointer.into(), message: message.into() }
}

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| schema(at, "expected an object"))
}

fn only_keys(map: &Map<String, Value>, at: &str, allowed: &[&str]) -> Result<(), CliError> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{at}/{k}"), format!("unknown field (expected one of {})", allowed.join(", ")))),
        None => Ok(()),
    }
}

fn number(v: &Value, at: &str) -> Result<f64, CliError> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| schema(at, "expected a finite number"))
}

fn positive(v: &Value, at: &str) -> Result<f64, CliError> {
    let x = number(v, at)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(schema(at, "must be positive"))
    }
}

fn integer(v: &Value, at: &str) -> Result<i64, CliError> {
    v.as_i64().ok_or_else(|| schema(at, "expected an integer"))
}

fn index(v: &Value, at: &str, hi: i64) -> Result<usize, CliError> {
    let i = integer(v, at)?;
    if (1..=hi).contains(&i) {
        Ok(i as usize - 1)
    } else {
        Err(schema(at, format!("must be between 1 and {hi}")))
    }
}

fn required<'a>(map: &'a Map<String, Value>, at: &str, key: &str) -> Result<&'a Value, CliError> {
    map.get(key).ok_or_else(|| schema(format!("{at}/{key}"), "missing required field"))
}

fn wave(v: &Value, at: &str) -> Result<Wave, CliError> {
    let arr = v.as_array().filter(|a| a.len() == 3).ok_or_else(|| schema(at, "expected an array of three integers"))?;
    let mut w = [0; 3];
    for (i, e) in arr.iter().enumerate() {
        w[i] = i32::try_from(integer(e, &format!("{at}/{i}"))?).map_err(|_| schema(format!("{at}/{i}"), "wavenumber out of range"))?;
    }
    Ok(w)
}

/// Parses `[{"<row>":..,"<col>":..,"wave":[..],"re":..,"im":..}, ..]` into 0-based harmonics.
fn harmonics(v: &Value, at: &str, keys: (&str, &str), bounds: (i64, i64)) -> Result<Vec<Harmonic>, CliError> {
    let arr = v.as_array().ok_or_else(|| schema(at, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, h)| {
            let here = format!("{at}/{i}");
            let m = object(h, &here)?;
            only_keys(m, &here, &[keys.0, keys.1, "wave", "re", "im"])?;
            Ok(Harmonic {
                row: index(required(m, &here, keys.0)?, &format!("{here}/{}", keys.0), bounds.0)?,
                col: index(required(m, &here, keys.1)?, &format!("{here}/{}", keys.1), bounds.1)?,
                wave: wave(required(m, &here, "wave")?, &format!("{here}/wave"))?,
                re: m.get("re").map(|x| number(x, &format!("{here}/re"))).transpose()?.unwrap_or(0.0),
                im: m.get("im").map(|x| number(x, &format!("{here}/im"))).transpose()?.unwrap_or(0.0),
            })
        })
        .collect()
}

impl InputSpec {
    pub fn k3_preset(k: i32) -> Self {
        Self {
            periods: [TAU; 3],
            frame: FrameInput::K3(k),
            potential: Vec::new(),
            half_density: true,
            truncation: None,
            quadrature: None,
            mollifier_t: None,
            tolerances: Tolerances::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let doc: Value = serde_json::from_str(text).map_err(|e| schema("", format!("invalid JSON: {e}")))?;
        Self::from_value(&doc)
    }

    pub fn from_value(doc: &Value) -> Result<Self, CliError> {
        let top = object(doc, "")?;
        only_keys(top, "", &["manifold", "frame", "potential", "half_density", "truncation", "quadrature", "mollifier", "tolerances"])?;

        let mut periods = [TAU; 3];
        if let Some(m) = top.get("manifold") {
            let m = object(m, "/manifold")?;
            only_keys(m, "/manifold", &["type", "periods"])?;
            if let Some(t) = m.get("type") {
                if t.as_str() != Some("torus3") {
                    return Err(schema("/manifold/type", "only \"torus3\" is supported"));
                }
            }
            if let Some(p) = m.get("periods") {
                let arr = p.as_array().filter(|a| a.len() == 3).ok_or_else(|| schema("/manifold/periods", "expected three periods"))?;
                for (i, e) in arr.iter().enumerate() {
                    periods[i] = positive(e, &format!("/manifold/periods/{i}"))?;
                }
            }
        }

        let f = object(required(top, "", "frame")?, "/frame")?;
        let frame = match (f.get("preset"), f.get("harmonics")) {
            (Some(p), None) => {
                only_keys(f, "/frame", &["preset", "k3"])?;
                if p.as_str() != Some("k3") {
                    return Err(schema("/frame/preset", "only the \"k3\" preset is known"));
                }
                let k = integer(required(f, "/frame", "k3")?, "/frame/k3")?;
                let k = i32::try_from(k).map_err(|_| schema("/frame/k3", "out of range"))?;
                if periods != [TAU; 3] {
                    return Err(schema("/manifold/periods", "the k3 preset lives on the torus with periods 2 pi"));
                }
                FrameInput::K3(k)
            }
            (None, Some(h)) => {
                only_keys(f, "/frame", &["harmonics"])?;
                FrameInput::Harmonics(harmonics(h, "/frame/harmonics", ("j", "alpha"), (3, 3))?)
            }
            _ => return Err(schema("/frame", "expected exactly one of \"preset\" or \"harmonics\"")),
        };

        let mut potential = Vec::new();
        if let Some(p) = top.get("potential") {
            let p = object(p, "/potential")?;
            only_keys(p, "/potential", &["harmonics"])?;
            if let Some(h) = p.get("harmonics") {
                potential = harmonics(h, "/potential/harmonics", ("row", "col"), (2, 2))?;
            }
        }

        let half_density = match top.get("half_density") {
            Some(v) => v.as_bool().ok_or_else(|| schema("/half_density", "expected a boolean"))?,
            None => true,
        };

        let truncation = match top.get("truncation") {
            Some(t) => {
                let t = object(t, "/truncation")?;
                only_keys(t, "/truncation", &["K"])?;
                let k = integer(required(t, "/truncation", "K")?, "/truncation/K")?;
                if k < 1 {
                    return Err(schema("/truncation/K", "must be at least 1"));
                }
                Some(k as usize)
            }
            None => None,
        };

        let quadrature = match top.get("quadrature") {
            Some(q) => {
                let q = object(q, "/quadrature")?;
                only_keys(q, "/quadrature", &["polar", "azimuthal"])?;
                let get = |key: &str| -> Result<usize, CliError> {
                    let at = format!("/quadrature/{key}");
                    let v = integer(required(q, "/quadrature", key)?, &at)?;
                    if v < 2 {
                        return Err(schema(at, "must be at least 2"));
                    }
                    Ok(v as usize)
                };
                Some((get("polar")?, get("azimuthal")?))
            }
            None => None,
        };

        let mollifier_t = match top.get("mollifier") {
            Some(m) => {
                let m = object(m, "/mollifier")?;
                only_keys(m, "/mollifier", &["T"])?;
                Some(positive(required(m, "/mollifier", "T")?, "/mollifier/T")?)
            }
            None => None,
        };

        let mut tolerances = Tolerances::default();
        if let Some(t) = top.get("tolerances") {
            let t = object(t, "/tolerances")?;
            only_keys(
                t,
                "/tolerances",
                &["identity", "curvature_torsion", "unitary", "self_adjoint", "charge_conjugation", "closed_form"],
            )?;
            for (k, v) in t {
                let x = positive(v, &format!("/tolerances/{k}"))?;
                match k.as_str() {
                    "identity" => tolerances.identity = x,
                    "curvature_torsion" => tolerances.curvature_torsion = x,
                    "unitary" => tolerances.unitary = x,
                    "self_adjoint" => tolerances.self_adjoint = x,
                    "charge_conjugation" => tolerances.charge_conjugation = x,
                    _ => tolerances.closed_form = x,
                }
            }
        }

        Ok(Self { periods, frame, potential, half_density, truncation, quadrature, mollifier_t, tolerances })
    }

    pub fn bundle(&self) -> Result<FrameBundle, CliError> {
        match &self.frame {
            FrameInput::K3(k) => Ok(FrameBundle::k3(*k)),
            FrameInput::Harmonics(hs) => FrameBundle::new(TrigPoly::from_harmonics(3, 3, self.periods, hs))
                .map_err(|e| schema("/frame", format!("not a valid frame: {e}"))),
        }
    }

    pub fn potential_field(&self) -> TrigPoly {
        TrigPoly::from_harmonics(2, 2, self.periods, &self.potential)
    }

    /// The Dirac operator of the frame plus the potential.
    pub fn operator(&self) -> Result<OperatorSpec, CliError> {
        let op = build_dirac(&self.bundle()?, self.half_density).map_err(|e| schema("/frame", e.to_string()))?;
        Ok(op.with_potential(&self.potential_field()))
    }

    /// Whether the frame has no spatial dependence.
    pub fn constant_frame(&self) -> bool {
        match &self.frame {
            FrameInput::K3(k) => *k == 0,
            FrameInput::Harmonics(hs) => hs.iter().all(|h| h.wave == [0, 0, 0]),
        }
    }

    /// The potential as a constant matrix, if it is one.
    pub fn constant_potential(&self) -> Option<CMat> {
        if self.potential.iter().any(|h| h.wave != [0, 0, 0]) {
            return None;
        }
        let mut m = CMat::zeros(2, 2);
        for h in &self.potential {
            m[(h.row, h.col)] += c(h.re, h.im);
        }
        Some(m)
    }
}

/// Parses `k3=<int>`.
pub fn parse_preset(s: &str) -> Result<i32, String> {
    let v = s.strip_prefix("k3=").ok_or_else(|| format!("unknown preset {s:?}, expected k3=<int>"))?;
    v.parse().map_err(|_| format!("k3 must be an integer, got {v:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err_pointer(text: &str) -> String {
        match InputSpec::parse(text) {
            Err(CliError::Schema { pointer, .. }) => pointer,
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn pointers_name_the_offending_field() {
        assert_eq!(err_pointer(r#"{"frame":{"preset":"k3","k3":1},"truncation":{"K":0}}"#), "/truncation/K");
        assert_eq!(err_pointer(r#"{"frame":{"harmonics":[{"j":1,"alpha":4,"wave":[0,0,0],"re":1}]}}"#), "/frame/harmonics/0/alpha");
        assert_eq!(err_pointer(r#"{"frame":{"preset":"k3","k3":1},"extra":1}"#), "/extra");
        assert_eq!(err_pointer(r#"{"potential":{}}"#), "/frame");
        assert_eq!(err_pointer(r#"{"frame":{"preset":"k3","k3":1},"mollifier":{"T":-1}}"#), "/mollifier/T");
    }

    #[test]
    fn dependent_frame_is_rejected_at_frame() {
        let text = r#"{"frame":{"harmonics":[
            {"j":1,"alpha":1,"wave":[0,0,0],"re":1},
            {"j":2,"alpha":1,"wave":[0,0,0],"re":1},
            {"j":3,"alpha":3,"wave":[0,0,0],"re":1}]}}"#;
        let spec = InputSpec::parse(text).unwrap();
        match spec.operator() {
            Err(CliError::Schema { pointer, .. }) => assert_eq!(pointer, "/frame"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn presets_and_constants() {
        assert_eq!(parse_preset("k3=2"), Ok(2));
        assert!(parse_preset("k4=2").is_err());
        let spec =
            InputSpec::parse(r#"{"frame":{"preset":"k3","k3":0},"potential":{"harmonics":[{"row":1,"col":1,"wave":[0,0,0],"re":0.5}]}}"#)
                .unwrap();
        assert!(spec.constant_frame());
        assert_eq!(spec.constant_potential().unwrap()[(0, 0)], c(0.5, 0.0));
        assert!(spec.half_density);
    }
}
