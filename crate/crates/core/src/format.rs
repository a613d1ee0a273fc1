//! The JSON cocycle file format and the built-in demo cocycles.
//!
//! ```json
//! {
//!   "schema_version": "1.0",
//!   "alphabet": 2,
//!   "adjacency": [[1, 1], [1, 1]],
//!   "dim": 2,
//!   "radius": 0,
//!   "entries": [
//!     {"window": "0", "matrix": [[2.0, 0.0], [0.0, 0.5]]},
//!     {"window": "1", "matrix": [[0.0, -1.0], [1.0, 0.0]]}
//!   ]
//! }
//! ```
//!
//! Windows are strings of symbol digits of length `2·radius + 1`; matrices
//! are row-major.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::cocycle::WindowCocycle;
use crate::error::{Error, Result};
use crate::matnum::{diag, rotation2, rotation3, Mat};
use crate::sft::{Sft, Symbol};
use crate::SCHEMA_VERSION;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    window: String,
    matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CocycleFile {
    #[serde(default)]
    schema_version: Option<String>,
    alphabet: usize,
    adjacency: Vec<Vec<u8>>,
    dim: usize,
    radius: usize,
    entries: Vec<EntryFile>,
}

/// Line of the `nth` occurrence (0-based) of `"key":` in `text`, or 0.
fn line_of_key(text: &str, key: &str, nth: usize) -> usize {
    let pat = format!("\"{key}\"");
    let mut seen = 0;
    let mut from = 0;
    while let Some(i) = text[from..].find(&pat) {
        let at = from + i;
        from = at + pat.len();
        if text[from..].trim_start().starts_with(':') {
            if seen == nth {
                return text[..at].matches('\n').count() + 1;
            }
            seen += 1;
        }
    }
    0
}

fn schema(text: &str, field: &str, key: &str, nth: usize, message: impl Into<String>) -> Error {
    Error::Schema { line: line_of_key(text, key, nth), field: field.into(), message: message.into() }
}

fn digit(c: char, q: usize) -> Option<Symbol> {
    c.to_digit(10).filter(|&d| (d as usize) < q).map(|d| d as Symbol)
}

/// Parses a cocycle file, reporting schema violations with the offending
/// line and field.
pub fn parse_cocycle(text: &str) -> Result<WindowCocycle> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: CocycleFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Error::Schema { line: inner.line(), field, message: inner.to_string() }
    })?;
    if let Some(v) = &file.schema_version {
        if v.split('.').next() != SCHEMA_VERSION.split('.').next() {
            return Err(schema(text, "schema_version", "schema_version", 0, format!("unsupported version {v}")));
        }
    }
    let q = file.alphabet;
    if q == 0 || q > 10 {
        return Err(schema(text, "alphabet", "alphabet", 0, "alphabet size must be between 1 and 10"));
    }
    if file.adjacency.len() != q || file.adjacency.iter().any(|r| r.len() != q) {
        return Err(schema(text, "adjacency", "adjacency", 0, format!("adjacency must be {q}×{q}")));
    }
    if file.adjacency.iter().flatten().any(|&x| x > 1) {
        return Err(schema(text, "adjacency", "adjacency", 0, "entries must be 0 or 1"));
    }
    let base = Sft::from_01(&file.adjacency).map_err(|e| schema(text, "adjacency", "adjacency", 0, e.to_string()))?;
    if file.dim == 0 {
        return Err(schema(text, "dim", "dim", 0, "dimension must be positive"));
    }
    let width = 2 * file.radius + 1;
    let mut entries = Vec::with_capacity(file.entries.len());
    for (i, e) in file.entries.iter().enumerate() {
        let w: Option<Vec<Symbol>> = e.window.chars().map(|c| digit(c, q)).collect();
        let w = w.ok_or_else(|| {
            schema(text, &format!("entries[{i}].window"), "window", i, format!("`{}` is not a word over 0..{q}", e.window))
        })?;
        if w.len() != width {
            return Err(schema(
                text,
                &format!("entries[{i}].window"),
                "window",
                i,
                format!("window has length {} but radius {} needs {width}", w.len(), file.radius),
            ));
        }
        if e.matrix.len() != file.dim || e.matrix.iter().any(|r| r.len() != file.dim) {
            return Err(schema(
                text,
                &format!("entries[{i}].matrix"),
                "matrix",
                i,
                format!("matrix must be {d}×{d}", d = file.dim),
            ));
        }
        let m = Mat::from_fn(file.dim, file.dim, |r, c| e.matrix[r][c]);
        entries.push((w, m));
    }
    WindowCocycle::new(base, file.dim, file.radius, entries).map_err(|e| Error::Schema {
        line: line_of_key(text, "entries", 0),
        field: "entries".into(),
        message: e.to_string(),
    })
}

pub fn read_cocycle(path: &std::path::Path) -> Result<WindowCocycle> {
    parse_cocycle(&std::fs::read_to_string(path)?)
}

/// Pretty JSON in the file format; floats are written so that they
/// re-parse exactly.
pub fn cocycle_to_json(a: &WindowCocycle) -> String {
    let base = a.base();
    let file = CocycleFile {
        schema_version: Some(SCHEMA_VERSION.into()),
        alphabet: base.alphabet_size(),
        adjacency: base.adjacency().iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect(),
        dim: a.dim(),
        radius: a.radius(),
        entries: a
            .entries()
            .into_iter()
            .map(|(w, m)| EntryFile {
                window: w.iter().map(|s| char::from(b'0' + s)).collect(),
                matrix: (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("cocycle files serialize");
    s.push('\n');
    s
}

/// Names accepted by [`demo`].
pub const DEMO_NAMES: &[&str] = &[
    "typical2x2",
    "dominated2x2",
    "typical3x3",
    "golden2x2",
    "golden3x3",
    "radius1_2x2",
    "radius1_3x3",
    "rotation",
];

fn rot3() -> Mat {
    rotation3([1.0, 2.0, 3.0], 1.0)
}

/// A built-in example cocycle.
///
/// * `typical2x2`: `diag(2, 1/2)` and rotation by `π/4` on the full 2-shift.
/// * `dominated2x2`: `diag(2, 1/2)` and `[[2, 1], [1, 1]]`, a dominated pair.
/// * `typical3x3`: `diag(3, 1, 1/3)` and rotation by 1 rad about `(1, 2, 3)`.
/// * `golden2x2`, `golden3x3`: the typical pairs over the golden mean shift.
/// * `radius1_2x2`, `radius1_3x3`: radius-one perturbations of the typical
///   pairs whose matrices depend on both neighbours.
/// * `rotation`: two rotations, not typical.
pub fn demo(name: &str) -> Result<WindowCocycle> {
    let full = Sft::full_shift(2);
    match name {
        "typical2x2" => WindowCocycle::locally_constant(full, vec![diag(&[2.0, 0.5]), rotation2(FRAC_PI_4)]),
        "dominated2x2" => WindowCocycle::locally_constant(
            full,
            vec![diag(&[2.0, 0.5]), Mat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])],
        ),
        "typical3x3" => WindowCocycle::locally_constant(full, vec![diag(&[3.0, 1.0, 1.0 / 3.0]), rot3()]),
        "golden2x2" => {
            WindowCocycle::locally_constant(Sft::golden_mean(), vec![diag(&[2.0, 0.5]), rotation2(FRAC_PI_4)])
        }
        "golden3x3" => WindowCocycle::locally_constant(Sft::golden_mean(), vec![diag(&[3.0, 1.0, 1.0 / 3.0]), rot3()]),
        "radius1_2x2" => WindowCocycle::from_fn(full, 2, 1, |w| {
            let (a, c) = (w[0] as f64, w[2] as f64);
            let base = if w[1] == 0 { diag(&[2.0, 0.5]) } else { rotation2(0.8) };
            base * Mat::from_row_slice(2, 2, &[1.0, 0.2 * (a - c) + 0.1 * a, 0.15 * a * c - 0.1 * c, 1.0])
        }),
        "radius1_3x3" => WindowCocycle::from_fn(full, 3, 1, |w| {
            let (a, c) = (w[0] as f64, w[2] as f64);
            let base = if w[1] == 0 { diag(&[3.0, 1.0, 1.0 / 3.0]) } else { rot3() };
            let mut shear = Mat::identity(3, 3);
            shear[(0, 1)] = 0.2 * a - 0.1 * c;
            shear[(1, 2)] = 0.15 * c;
            shear[(2, 0)] = -0.1 * a * c;
            base * shear
        }),
        "rotation" => WindowCocycle::locally_constant(full, vec![rotation2(0.3), rotation2(1.1)]),
        _ => Err(Error::InvalidArgument(format!("unknown demo `{name}`; known: {}", DEMO_NAMES.join(", ")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        for name in DEMO_NAMES {
            let a = demo(name).unwrap();
            let b = parse_cocycle(&cocycle_to_json(&a)).unwrap();
            assert_eq!(a.radius(), b.radius());
            for ((wa, ma), (wb, mb)) in a.entries().into_iter().zip(b.entries()) {
                assert_eq!(wa, wb);
                assert_eq!(ma, mb, "{name}");
            }
        }
    }

    #[test]
    fn schema_errors_carry_line_and_field() {
        let text = "{\n  \"alphabet\": 2,\n  \"adjacency\": [[1,1],[1,1]],\n  \"dim\": 2,\n  \"radius\": 0,\n  \"entries\": [\n    {\"window\": \"0\", \"matrix\": [[1,0],[0,1]]},\n    {\"window\": \"2\", \"matrix\": [[1,0],[0,1]]}\n  ]\n}";
        match parse_cocycle(text) {
            Err(Error::Schema { line, field, .. }) => {
                assert_eq!(line, 8);
                assert_eq!(field, "entries[1].window");
            }
            other => panic!("{other:?}"),
        }
        let text = "{\n  \"alphabet\": 2,\n  \"adjacency\": [[1,1],[1,1]],\n  \"dim\": \"two\",\n  \"radius\": 0,\n  \"entries\": []\n}";
        match parse_cocycle(text) {
            Err(Error::Schema { line, field, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(field, "dim");
            }
            other => panic!("{other:?}"),
        }
        let text = "{\n  \"alphabet\": 2,\n  \"adjacency\": [[1,1],[1,1]],\n  \"dim\": 2,\n  \"radius\": 0,\n  \"entries\": [\n    {\"window\": \"0\", \"matrix\": [[1,0],[0,1]]}\n  ]\n}";
        assert!(matches!(parse_cocycle(text), Err(Error::Schema { ref field, .. }) if field == "entries"));
    }

    #[test]
    fn typical_demos_are_certified() {
        for name in ["typical2x2", "dominated2x2", "typical3x3", "golden2x2", "golden3x3", "radius1_2x2", "radius1_3x3"] {
            let a = demo(name).unwrap();
            let cert = crate::typicality::find_typical_pair(&a, 4, crate::DEFAULT_TOL).unwrap();
            assert!(cert.is_some_and(|c| c.passed), "{name}");
        }
        assert!(crate::typicality::find_typical_pair(&demo("rotation").unwrap(), 4, crate::DEFAULT_TOL).unwrap().is_none());
    }

    #[test]
    fn unknown_demo() {
        assert!(demo("nope").is_err());
    }
}
