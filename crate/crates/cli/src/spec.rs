//! ChannelSpec ingestion: JSON documents describing an algebra shape and a
//! map constructor, validated with JSON-pointer error reporting.

use ergomix::shift_demo::{self, TraceMode};
use ergomix::superop::SuperOperator;
use ergomix::{AlgebraShape, Element};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

/// A rejected spec always points at the offending field.
#[derive(Debug)]
pub struct SpecError {
    pub pointer: String,
    pub message: String,
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid spec at {}: {}", self.pointer, self.message)
    }
}

impl std::error::Error for SpecError {}

fn err<T>(pointer: impl Into<String>, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError { pointer: pointer.into(), message: message.into() })
}

/// Analysis overrides carried alongside the channel definition.
#[derive(Clone, Debug, Default)]
pub struct AnalysisOverrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub n_max: Option<usize>,
    pub horizon: Option<usize>,
}

pub struct ParsedSpec {
    pub document: Value,
    pub operator: SuperOperator,
    pub analysis: AnalysisOverrides,
}

pub fn parse_spec(text: &str) -> Result<ParsedSpec, SpecError> {
    let document: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return err("/", format!("malformed JSON: {e}")),
    };
    let root = match document.as_object() {
        Some(o) => o,
        None => return err("/", "spec must be a JSON object"),
    };
    for key in root.keys() {
        if !matches!(key.as_str(), "algebra" | "map" | "analysis") {
            return err(format!("/{key}"), "unknown field");
        }
    }

    let map = match root.get("map") {
        Some(Value::Object(m)) => m,
        Some(_) => return err("/map", "must be an object"),
        None => return err("/map", "missing field"),
    };
    let kind = match map.get("kind") {
        Some(Value::String(s)) => s.as_str(),
        Some(_) => return err("/map/kind", "must be a string"),
        None => return err("/map/kind", "missing field"),
    };

    // classical and shift_demo define their own algebra; everything else
    // requires an explicit one.
    let shape = match root.get("algebra") {
        Some(v) => Some(parse_shape(v, "/algebra")?),
        None => None,
    };

    let operator = match kind {
        "kraus" => build_kraus(map, require_shape(&shape, kind)?)?,
        "transfer" => build_transfer(map, require_shape(&shape, kind)?)?,
        "classical" => build_classical(map, shape.as_ref())?,
        "depolarizing" => build_depolarizing(map, require_shape(&shape, kind)?)?,
        "rank_one" => build_rank_one(map, require_shape(&shape, kind)?)?,
        "shift_demo" => build_shift(map, shape.as_ref())?,
        other => {
            return err(
                "/map/kind",
                format!(
                    "unknown kind {other:?} (expected kraus, transfer, classical, \
                     depolarizing, rank_one, or shift_demo)"
                ),
            )
        }
    };

    let analysis = parse_analysis(root.get("analysis"))?;
    Ok(ParsedSpec { document, operator, analysis })
}

fn require_shape<'a>(
    shape: &'a Option<AlgebraShape>,
    kind: &str,
) -> Result<&'a AlgebraShape, SpecError> {
    match shape {
        Some(s) => Ok(s),
        None => err("/algebra", format!("missing field (required for kind {kind:?})")),
    }
}

fn parse_shape(v: &Value, ptr: &str) -> Result<AlgebraShape, SpecError> {
    let obj = match v.as_object() {
        Some(o) => o,
        None => return err(ptr, "must be an object"),
    };
    let blocks = match obj.get("blocks") {
        Some(Value::Array(a)) => a,
        Some(_) => return err(format!("{ptr}/blocks"), "must be an array"),
        None => return err(format!("{ptr}/blocks"), "missing field"),
    };
    let mut parsed = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let bptr = format!("{ptr}/blocks/{i}");
        let obj = match b.as_object() {
            Some(o) => o,
            None => return err(bptr, "must be an object"),
        };
        let dim = match obj.get("dim").and_then(Value::as_u64) {
            Some(d) if d >= 1 => d as usize,
            _ => return err(format!("{bptr}/dim"), "must be a positive integer"),
        };
        let weight = match obj.get("weight") {
            None => 1.0,
            Some(w) => match w.as_f64() {
                Some(w) if w > 0.0 => w,
                _ => return err(format!("{bptr}/weight"), "must be a positive number"),
            },
        };
        parsed.push((dim, weight));
    }
    match AlgebraShape::new(parsed) {
        Ok(s) => Ok(s),
        Err(e) => err(format!("{ptr}/blocks"), e.to_string()),
    }
}

fn parse_real_matrix(v: &Value, ptr: &str) -> Result<DMatrix<f64>, SpecError> {
    let rows = match v.as_array() {
        Some(a) if !a.is_empty() => a,
        _ => return err(ptr, "must be a non-empty array of rows"),
    };
    let ncols = match rows[0].as_array() {
        Some(r) if !r.is_empty() => r.len(),
        _ => return err(format!("{ptr}/0"), "must be a non-empty array of numbers"),
    };
    let mut data = Vec::with_capacity(rows.len() * ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = match row.as_array() {
            Some(r) if r.len() == ncols => r,
            _ => return err(format!("{ptr}/{i}"), format!("must be an array of {ncols} numbers")),
        };
        for (j, x) in row.iter().enumerate() {
            match x.as_f64() {
                Some(x) => data.push(x),
                None => return err(format!("{ptr}/{i}/{j}"), "must be a number"),
            }
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &data))
}

/// Complex matrix: rows of `[re, im]` pairs.
fn parse_complex_matrix(v: &Value, ptr: &str, dim: usize) -> Result<DMatrix<Complex64>, SpecError> {
    let rows = match v.as_array() {
        Some(a) if a.len() == dim => a,
        _ => return err(ptr, format!("must be an array of {dim} rows")),
    };
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        let row = match row.as_array() {
            Some(r) if r.len() == dim => r,
            _ => return err(format!("{ptr}/{i}"), format!("must be an array of {dim} entries")),
        };
        for (j, x) in row.iter().enumerate() {
            let eptr = format!("{ptr}/{i}/{j}");
            let pair = match x.as_array() {
                Some(p) if p.len() == 2 => p,
                _ => return err(eptr, "complex entries are [re, im] pairs"),
            };
            match (pair[0].as_f64(), pair[1].as_f64()) {
                (Some(re), Some(im)) => m[(i, j)] = Complex64::new(re, im),
                _ => return err(eptr, "complex entries are [re, im] pairs of numbers"),
            }
        }
    }
    Ok(m)
}

/// Element: one complex matrix per block.
fn parse_element(v: &Value, ptr: &str, shape: &AlgebraShape) -> Result<Element, SpecError> {
    let blocks = match v.as_array() {
        Some(a) if a.len() == shape.num_blocks() => a,
        _ => {
            return err(
                ptr,
                format!("must be an array of {} block matrices", shape.num_blocks()),
            )
        }
    };
    let mut parsed = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        parsed.push(parse_complex_matrix(b, &format!("{ptr}/{i}"), shape.blocks()[i].dim)?);
    }
    Element::from_blocks(shape.clone(), parsed)
        .map_err(|e| SpecError { pointer: ptr.into(), message: e.to_string() })
}

fn build_kraus(
    map: &serde_json::Map<String, Value>,
    shape: &AlgebraShape,
) -> Result<SuperOperator, SpecError> {
    let ops = match map.get("operators") {
        Some(Value::Array(a)) if !a.is_empty() => a,
        _ => return err("/map/operators", "must be a non-empty array of elements"),
    };
    let mut kraus = Vec::with_capacity(ops.len());
    for (i, op) in ops.iter().enumerate() {
        kraus.push(parse_element(op, &format!("/map/operators/{i}"), shape)?);
    }
    SuperOperator::from_kraus(shape, &kraus)
        .map_err(|e| SpecError { pointer: "/map/operators".into(), message: e.to_string() })
}

fn build_transfer(
    map: &serde_json::Map<String, Value>,
    shape: &AlgebraShape,
) -> Result<SuperOperator, SpecError> {
    let m = match map.get("matrix") {
        Some(v) => parse_real_matrix(v, "/map/matrix")?,
        None => return err("/map/matrix", "missing field"),
    };
    let n = shape.sa_dim();
    if m.nrows() != n || m.ncols() != n {
        return err(
            "/map/matrix",
            format!("transfer matrix must be {n}x{n} for this algebra, got {}x{}", m.nrows(), m.ncols()),
        );
    }
    SuperOperator::from_transfer(shape.clone(), m)
        .map_err(|e| SpecError { pointer: "/map/matrix".into(), message: e.to_string() })
}

fn build_classical(
    map: &serde_json::Map<String, Value>,
    shape: Option<&AlgebraShape>,
) -> Result<SuperOperator, SpecError> {
    let m = match map.get("matrix") {
        Some(v) => parse_real_matrix(v, "/map/matrix")?,
        None => return err("/map/matrix", "missing field"),
    };
    if let Some(s) = shape {
        let expect = AlgebraShape::classical(m.nrows())
            .map_err(|e| SpecError { pointer: "/map/matrix".into(), message: e.to_string() })?;
        if s != &expect {
            return err("/algebra", "a classical map lives on the diagonal algebra ⊕ Mat(1)");
        }
    }
    SuperOperator::from_classical(&m)
        .map_err(|e| SpecError { pointer: "/map/matrix".into(), message: e.to_string() })
}

fn build_depolarizing(
    map: &serde_json::Map<String, Value>,
    shape: &AlgebraShape,
) -> Result<SuperOperator, SpecError> {
    let lambda = match map.get("lambda").and_then(Value::as_f64) {
        Some(l) => l,
        None => return err("/map/lambda", "must be a number"),
    };
    if shape.num_blocks() != 1 {
        return err("/algebra/blocks", "depolarizing maps need a single block");
    }
    let d = shape.blocks()[0].dim;
    if (shape.blocks()[0].weight * d as f64 - 1.0).abs() > 1e-12 {
        return err("/algebra/blocks/0/weight", "depolarizing maps need τ(1) = 1, i.e. weight 1/dim");
    }
    SuperOperator::from_depolarizing(d, lambda)
        .map_err(|e| SpecError { pointer: "/map/lambda".into(), message: e.to_string() })
}

fn build_rank_one(
    map: &serde_json::Map<String, Value>,
    shape: &AlgebraShape,
) -> Result<SuperOperator, SpecError> {
    let y = match map.get("y") {
        Some(v) => parse_element(v, "/map/y", shape)?,
        None => return err("/map/y", "missing field"),
    };
    let z = match map.get("z") {
        Some(v) => parse_element(v, "/map/z", shape)?,
        None => Element::identity(shape),
    };
    SuperOperator::rank_one(&y, &z)
        .map_err(|e| SpecError { pointer: "/map".into(), message: e.to_string() })
}

fn build_shift(
    map: &serde_json::Map<String, Value>,
    shape: Option<&AlgebraShape>,
) -> Result<SuperOperator, SpecError> {
    let dim = match map.get("dim").and_then(Value::as_u64) {
        Some(d) if d >= 2 => d as usize,
        _ => return err("/map/dim", "must be an integer ≥ 2"),
    };
    let mode = match map.get("trace_mode") {
        None => TraceMode::UnitWeights,
        Some(Value::String(s)) => match s.as_str() {
            "unit_weights" => TraceMode::UnitWeights,
            "normalized" => TraceMode::Normalized,
            _ => return err("/map/trace_mode", "expected \"unit_weights\" or \"normalized\""),
        },
        Some(_) => return err("/map/trace_mode", "must be a string"),
    };
    let shift = shift_demo::build(dim, mode)
        .map_err(|e| SpecError { pointer: "/map/dim".into(), message: e.to_string() })?;
    if let Some(s) = shape {
        if s != shift.op.shape() {
            return err("/algebra", "algebra does not match the requested shift dimensions");
        }
    }
    Ok(shift.op)
}

fn parse_analysis(v: Option<&Value>) -> Result<AnalysisOverrides, SpecError> {
    let mut out = AnalysisOverrides::default();
    let obj = match v {
        None => return Ok(out),
        Some(Value::Object(o)) => o,
        Some(_) => return err("/analysis", "must be an object"),
    };
    for (key, val) in obj {
        let ptr = format!("/analysis/{key}");
        match key.as_str() {
            "seed" => match val.as_u64() {
                Some(s) => out.seed = Some(s),
                None => return err(ptr, "must be a non-negative integer"),
            },
            "tol" => match val.as_f64() {
                Some(t) if t > 0.0 => out.tol = Some(t),
                _ => return err(ptr, "must be a positive number"),
            },
            "n_max" => match val.as_u64() {
                Some(n) if n >= 1 => out.n_max = Some(n as usize),
                _ => return err(ptr, "must be a positive integer"),
            },
            "horizon" => match val.as_u64() {
                Some(h) => out.horizon = Some(h as usize),
                None => return err(ptr, "must be a non-negative integer"),
            },
            _ => return err(ptr, "unknown field"),
        }
    }
    Ok(out)
}
