//! JSON loading with JSON-pointer diagnostics, and the input shapes that only
//! exist at the command line.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use qgraph::strategy::TracialAncilla;
use qgraph::{CMatrix, ClassicalGraph, QuantumGraph, VnAlgebra};

use crate::Failure;

pub fn read_value(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::malformed(format!("{}: not JSON: {e}", path.display())))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    from_value(read_value(path)?, path, "")
}

/// Deserializes `value`, reporting the offending field as a JSON pointer
/// relative to the file root (`prefix` locates `value` inside the file).
pub fn from_value<T: DeserializeOwned>(value: Value, path: &Path, prefix: &str) -> Result<T, Failure> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = format!("{prefix}{}", pointer(e.path()));
        let at = if pointer.is_empty() { "/".to_string() } else { pointer };
        Failure::malformed(format!("{}: schema violation at {at}: {}", path.display(), e.into_inner()))
    })
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// A quantum graph file: the full form, `{"complete": <algebra>}` for
/// `(M_n, M, M_n)`, or `{"classical": <graph>}` for `(S_G, D_n, M_n)`.
pub fn load_graph(path: &Path) -> Result<QuantumGraph, Failure> {
    let mut value = read_value(path)?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(alg) = obj.remove("complete") {
            let alg: VnAlgebra = from_value(alg, path, "/complete")?;
            return Ok(QuantumGraph::complete(alg));
        }
        if let Some(g) = obj.remove("classical") {
            let g: ClassicalGraph = from_value(g, path, "/classical")?;
            return Ok(g.operator_system());
        }
    }
    from_value(value, path, "")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    pub ops: Vec<CMatrix>,
}

/// One POVM per classical input `x`, each on the same space.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalStrategy {
    pub families: Vec<Vec<CMatrix>>,
    #[serde(default)]
    pub ancilla: Option<TracialAncilla>,
}
