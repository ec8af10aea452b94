//! Scenario serialization: the stable interchange surface.
//!
//! Scenarios are JSON documents (schema version "1", unknown fields
//! rejected). Complex scalars are two-element `[re, im]` arrays. Output is
//! canonical: object keys sorted, floats printed with 17 significant digits
//! (lossless for f64), so identical inputs serialize byte-identically and
//! golden files are honest.
//!
//! Parsing is two-phase: strict deserialization (syntax and schema errors
//! carry a JSON path), then validation by compiling every matrix through
//! the same validators the engine uses (errors carry a JSON pointer and the
//! offending residual).

use serde::{Deserialize, Serialize};

use crate::contexts::{Context, State};
use crate::error::{Error, Result};
use crate::histories::TimedContext;
use crate::linalg::{
    projector_from_vectors, CMatrix, CVector, ExplicitUnitary, Projector, Propagator, C64,
};

/// Schema version accepted by this build.
pub const SCHEMA_VERSION: &str = "1";

/// A complex scalar on the wire: `[re, im]`.
pub type ComplexPair = [f64; 2];
/// A complex vector on the wire.
pub type VectorSpec = Vec<ComplexPair>;
/// A complex matrix on the wire (row major).
pub type MatrixSpec = Vec<Vec<ComplexPair>>;

/// Serializable scenario bundle: dimension, initial state, dynamics, timed
/// contexts and queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: String,
    pub dimension: usize,
    pub state: StateSpec,
    pub dynamics: DynamicsSpec,
    pub reference_time: f64,
    pub contexts: Vec<ContextSpec>,
    #[serde(default)]
    pub queries: Vec<QuerySpec>,
}

/// Initial state: exactly one of `vector` (pure) or `matrix` (density).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vector: Option<VectorSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

/// Dynamics: `mode` is one of `trivial`, `hamiltonian`, `explicit`, with
/// the matching payload field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<MatrixSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<ExplicitUnitarySpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitUnitarySpec {
    pub t_from: f64,
    pub t_to: f64,
    pub matrix: MatrixSpec,
}

/// One timed context: its time and its atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub time: f64,
    pub atoms: Vec<AtomSpec>,
}

/// One atom: exactly one of spanning `vectors` or an explicit projector
/// `matrix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<VectorSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

/// A projector reference: by context/atom indices, or inline vectors with
/// an optional time (defaults to the reference time).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorRef {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<VectorSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}

/// A tagged query. `type` is one of `born`, `conditional`,
/// `gc_probability`, `ch_probability`, `retrodiction`; only the fields of
/// the matching kind may be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    #[serde(rename = "type")]
    pub kind: String,
    /// born: context index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<usize>,
    /// born: atom indices forming the property.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<usize>>,
    /// gc_probability: set of multi-indices over the product label set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<Vec<Vec<usize>>>,
    /// ch_probability: one multi-index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<usize>>,
    /// conditional and retrodiction: projector references.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<ProjectorRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<ProjectorRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<ProjectorRef>,
}

/// Runtime objects compiled from a validated scenario.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub dimension: usize,
    pub state: State,
    pub propagator: Propagator,
    pub reference_time: f64,
    pub contexts: Vec<TimedContext>,
}

fn err(path: impl Into<String>, detail: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        detail: detail.into(),
    }
}

fn to_cvector(v: &VectorSpec) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&[re, im]| C64::new(re, im)))
}

fn to_cmatrix(m: &MatrixSpec, dim: usize, path: &str) -> Result<CMatrix> {
    if m.len() != dim {
        return Err(err(path, format!("expected {dim} rows, found {}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != dim {
            return Err(err(
                format!("{path}/{i}"),
                format!("expected {dim} columns, found {}", row.len()),
            ));
        }
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        C64::new(m[i][j][0], m[i][j][1])
    }))
}

pub(crate) fn from_cmatrix(m: &CMatrix) -> MatrixSpec {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

impl Scenario {
    /// Validate the document and build the runtime objects.
    ///
    /// Every matrix passes the relevant engine validator; failures carry a
    /// JSON pointer to the offending element.
    pub fn compile(&self, tol: f64) -> Result<Compiled> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(err(
                "/schema_version",
                format!(
                    "unsupported schema version {:?} (this build reads {:?})",
                    self.schema_version, SCHEMA_VERSION
                ),
            ));
        }
        let dim = self.dimension;
        if dim == 0 {
            return Err(err("/dimension", "dimension must be positive"));
        }
        if !self.reference_time.is_finite() {
            return Err(err("/reference_time", "must be finite"));
        }

        let state = self.compile_state(dim, tol)?;
        let propagator = self.compile_dynamics(dim, tol)?;
        let contexts = self.compile_contexts(dim, tol)?;
        self.validate_queries(&contexts)?;

        Ok(Compiled {
            dimension: dim,
            state,
            propagator,
            reference_time: self.reference_time,
            contexts,
        })
    }

    fn compile_state(&self, dim: usize, tol: f64) -> Result<State> {
        match (&self.state.vector, &self.state.matrix) {
            (Some(v), None) => {
                if v.len() != dim {
                    return Err(err(
                        "/state/vector",
                        format!("expected {dim} entries, found {}", v.len()),
                    ));
                }
                let vec = to_cvector(v);
                let norm = vec.norm();
                if (norm - 1.0).abs() > tol {
                    return Err(err(
                        "/state/vector",
                        format!("state vector norm {norm} differs from 1"),
                    ));
                }
                State::pure(&vec, tol).map_err(|e| e.at_path("/state/vector"))
            }
            (None, Some(m)) => {
                let rho = to_cmatrix(m, dim, "/state/matrix")?;
                State::new(rho, tol).map_err(|e| e.at_path("/state/matrix"))
            }
            _ => Err(err("/state", "exactly one of `vector` or `matrix` required")),
        }
    }

    fn compile_dynamics(&self, dim: usize, tol: f64) -> Result<Propagator> {
        let d = &self.dynamics;
        match d.mode.as_str() {
            "trivial" => {
                if d.hamiltonian.is_some() || d.unitaries.is_some() {
                    return Err(err("/dynamics", "trivial mode takes no payload"));
                }
                Ok(Propagator::trivial(dim))
            }
            "hamiltonian" => {
                if d.unitaries.is_some() {
                    return Err(err("/dynamics/unitaries", "not allowed in hamiltonian mode"));
                }
                let m = d
                    .hamiltonian
                    .as_ref()
                    .ok_or_else(|| err("/dynamics", "hamiltonian mode requires `hamiltonian`"))?;
                let h = to_cmatrix(m, dim, "/dynamics/hamiltonian")?;
                Propagator::hamiltonian(h, tol).map_err(|e| e.at_path("/dynamics/hamiltonian"))
            }
            "explicit" => {
                if d.hamiltonian.is_some() {
                    return Err(err("/dynamics/hamiltonian", "not allowed in explicit mode"));
                }
                let specs = d
                    .unitaries
                    .as_ref()
                    .ok_or_else(|| err("/dynamics", "explicit mode requires `unitaries`"))?;
                let mut unitaries = Vec::with_capacity(specs.len());
                for (i, u) in specs.iter().enumerate() {
                    let path = format!("/dynamics/unitaries/{i}/matrix");
                    let m = to_cmatrix(&u.matrix, dim, &path)?;
                    unitaries.push(ExplicitUnitary {
                        t_from: u.t_from,
                        t_to: u.t_to,
                        matrix: m,
                    });
                }
                Propagator::explicit(dim, unitaries, tol)
                    .map_err(|e| e.at_path("/dynamics/unitaries"))
            }
            other => Err(err(
                "/dynamics/mode",
                format!("unknown mode {other:?} (expected trivial, hamiltonian or explicit)"),
            )),
        }
    }

    fn compile_contexts(&self, dim: usize, tol: f64) -> Result<Vec<TimedContext>> {
        let mut out = Vec::with_capacity(self.contexts.len());
        for (ci, cspec) in self.contexts.iter().enumerate() {
            let mut atoms = Vec::with_capacity(cspec.atoms.len());
            for (ai, aspec) in cspec.atoms.iter().enumerate() {
                let path = format!("/contexts/{ci}/atoms/{ai}");
                let projector = match (&aspec.vectors, &aspec.matrix) {
                    (Some(vs), None) => {
                        let mut cvecs = Vec::with_capacity(vs.len());
                        for (vi, v) in vs.iter().enumerate() {
                            if v.len() != dim {
                                return Err(err(
                                    format!("{path}/vectors/{vi}"),
                                    format!("expected {dim} entries, found {}", v.len()),
                                ));
                            }
                            cvecs.push(to_cvector(v));
                        }
                        projector_from_vectors(&cvecs, tol)
                            .map_err(|e| e.at_path(format!("{path}/vectors")))?
                    }
                    (None, Some(m)) => {
                        let mat = to_cmatrix(m, dim, &format!("{path}/matrix"))?;
                        Projector::new(mat, tol)
                            .map_err(|e| e.at_path(format!("{path}/matrix")))?
                    }
                    _ => {
                        return Err(err(
                            path,
                            "exactly one of `vectors` or `matrix` required",
                        ))
                    }
                };
                atoms.push(projector);
            }
            let ctx = Context::new(atoms, tol)
                .map_err(|e| e.at_path(format!("/contexts/{ci}/atoms")))?;
            if !cspec.time.is_finite() {
                return Err(err(format!("/contexts/{ci}/time"), "must be finite"));
            }
            out.push(TimedContext::new(cspec.time, ctx));
        }
        for i in 1..out.len() {
            if out[i].time <= out[i - 1].time {
                return Err(err(
                    format!("/contexts/{i}/time"),
                    "context times must be strictly increasing",
                ));
            }
        }
        Ok(out)
    }

    fn validate_queries(&self, contexts: &[TimedContext]) -> Result<()> {
        let shape: Vec<usize> = contexts.iter().map(|tc| tc.context.len()).collect();
        for (qi, q) in self.queries.iter().enumerate() {
            let path = format!("/queries/{qi}");
            let forbid = |cond: bool, field: &str| -> Result<()> {
                if cond {
                    Err(err(
                        format!("{path}/{field}"),
                        format!("not allowed for type {:?}", q.kind),
                    ))
                } else {
                    Ok(())
                }
            };
            match q.kind.as_str() {
                "born" => {
                    forbid(q.property.is_some(), "property")?;
                    forbid(q.history.is_some(), "history")?;
                    forbid(q.p.is_some(), "p")?;
                    forbid(q.q.is_some(), "q")?;
                    forbid(q.r.is_some(), "r")?;
                    let ci = q
                        .context
                        .ok_or_else(|| err(format!("{path}/context"), "required for born"))?;
                    if ci >= contexts.len() {
                        return Err(err(
                            format!("{path}/context"),
                            format!("context index {ci} out of range ({})", contexts.len()),
                        ));
                    }
                    let atoms = q
                        .atoms
                        .as_ref()
                        .ok_or_else(|| err(format!("{path}/atoms"), "required for born"))?;
                    for (k, &a) in atoms.iter().enumerate() {
                        if a >= shape[ci] {
                            return Err(err(
                                format!("{path}/atoms/{k}"),
                                format!("atom index {a} out of range ({})", shape[ci]),
                            ));
                        }
                    }
                }
                "conditional" => {
                    forbid(q.context.is_some(), "context")?;
                    forbid(q.atoms.is_some(), "atoms")?;
                    forbid(q.property.is_some(), "property")?;
                    forbid(q.history.is_some(), "history")?;
                    forbid(q.q.is_some(), "q")?;
                    self.validate_ref(q.p.as_ref(), contexts, &format!("{path}/p"))?;
                    self.validate_ref(q.r.as_ref(), contexts, &format!("{path}/r"))?;
                }
                "gc_probability" => {
                    forbid(q.context.is_some(), "context")?;
                    forbid(q.atoms.is_some(), "atoms")?;
                    forbid(q.history.is_some(), "history")?;
                    forbid(q.p.is_some(), "p")?;
                    forbid(q.q.is_some(), "q")?;
                    forbid(q.r.is_some(), "r")?;
                    let prop = q.property.as_ref().ok_or_else(|| {
                        err(format!("{path}/property"), "required for gc_probability")
                    })?;
                    for (mi, multi) in prop.iter().enumerate() {
                        check_multi(multi, &shape, &format!("{path}/property/{mi}"))?;
                    }
                }
                "ch_probability" => {
                    forbid(q.context.is_some(), "context")?;
                    forbid(q.atoms.is_some(), "atoms")?;
                    forbid(q.property.is_some(), "property")?;
                    forbid(q.p.is_some(), "p")?;
                    forbid(q.q.is_some(), "q")?;
                    forbid(q.r.is_some(), "r")?;
                    let h = q.history.as_ref().ok_or_else(|| {
                        err(format!("{path}/history"), "required for ch_probability")
                    })?;
                    check_multi(h, &shape, &format!("{path}/history"))?;
                }
                "retrodiction" => {
                    forbid(q.context.is_some(), "context")?;
                    forbid(q.atoms.is_some(), "atoms")?;
                    forbid(q.property.is_some(), "property")?;
                    forbid(q.history.is_some(), "history")?;
                    self.validate_ref(q.p.as_ref(), contexts, &format!("{path}/p"))?;
                    self.validate_ref(q.q.as_ref(), contexts, &format!("{path}/q"))?;
                    self.validate_ref(q.r.as_ref(), contexts, &format!("{path}/r"))?;
                }
                other => {
                    return Err(err(
                        format!("{path}/type"),
                        format!("unknown query type {other:?}"),
                    ))
                }
            }
        }
        Ok(())
    }

    fn validate_ref(
        &self,
        r: Option<&ProjectorRef>,
        contexts: &[TimedContext],
        path: &str,
    ) -> Result<()> {
        let r = r.ok_or_else(|| err(path, "projector reference required"))?;
        match (&r.context, &r.vectors) {
            (Some(ci), None) => {
                if r.time.is_some() {
                    return Err(err(
                        format!("{path}/time"),
                        "time is taken from the referenced context",
                    ));
                }
                if *ci >= contexts.len() {
                    return Err(err(
                        format!("{path}/context"),
                        format!("context index {ci} out of range ({})", contexts.len()),
                    ));
                }
                let atoms = r
                    .atoms
                    .as_ref()
                    .ok_or_else(|| err(format!("{path}/atoms"), "required with `context`"))?;
                for (k, &a) in atoms.iter().enumerate() {
                    if a >= contexts[*ci].context.len() {
                        return Err(err(
                            format!("{path}/atoms/{k}"),
                            format!(
                                "atom index {a} out of range ({})",
                                contexts[*ci].context.len()
                            ),
                        ));
                    }
                }
                Ok(())
            }
            (None, Some(vs)) => {
                if r.atoms.is_some() {
                    return Err(err(
                        format!("{path}/atoms"),
                        "atoms only apply with `context`",
                    ));
                }
                if vs.is_empty() {
                    return Err(err(format!("{path}/vectors"), "must be non-empty"));
                }
                for (vi, v) in vs.iter().enumerate() {
                    if v.len() != self.dimension {
                        return Err(err(
                            format!("{path}/vectors/{vi}"),
                            format!("expected {} entries, found {}", self.dimension, v.len()),
                        ));
                    }
                }
                Ok(())
            }
            _ => Err(err(
                path,
                "exactly one of `context` or `vectors` required",
            )),
        }
    }

    /// Resolve a projector reference to (projector, time).
    pub fn resolve_ref(
        &self,
        r: &ProjectorRef,
        contexts: &[TimedContext],
        tol: f64,
        path: &str,
    ) -> Result<(Projector, f64)> {
        if let Some(ci) = r.context {
            let tc = &contexts[ci];
            let atoms = r.atoms.as_ref().expect("validated");
            let mut m = CMatrix::zeros(self.dimension, self.dimension);
            for &a in atoms {
                m += tc.context.atoms()[a].matrix();
            }
            let p = Projector::new(m, 100.0 * tol).map_err(|e| e.at_path(path))?;
            Ok((p, tc.time))
        } else {
            let vs = r.vectors.as_ref().expect("validated");
            let cvecs: Vec<CVector> = vs.iter().map(to_cvector).collect();
            let p = projector_from_vectors(&cvecs, tol)
                .map_err(|e| e.at_path(format!("{path}/vectors")))?;
            Ok((p, r.time.unwrap_or(self.reference_time)))
        }
    }
}

fn check_multi(multi: &[usize], shape: &[usize], path: &str) -> Result<()> {
    if multi.len() != shape.len() {
        return Err(err(
            path,
            format!(
                "multi-index length {} does not match context count {}",
                multi.len(),
                shape.len()
            ),
        ));
    }
    for (pos, (&k, &s)) in multi.iter().zip(shape.iter()).enumerate() {
        if k >= s {
            return Err(err(
                format!("{path}/{pos}"),
                format!("atom index {k} out of range ({s})"),
            ));
        }
    }
    Ok(())
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str, tol: f64) -> Result<Scenario> {
    let mut de = serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        Error::Scenario {
            path: pointerize(e.path()),
            detail: e.inner().to_string(),
        }
    })?;
    de.end()
        .map_err(|e| err("/", format!("trailing content: {e}")))?;
    scenario.compile(tol)?;
    Ok(scenario)
}

fn pointerize(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            serde_path_to_error::Segment::Seq { index } => {
                out.push('/');
                out.push_str(&index.to_string());
            }
            serde_path_to_error::Segment::Map { key } => {
                out.push('/');
                out.push_str(key);
            }
            serde_path_to_error::Segment::Enum { variant } => {
                out.push('/');
                out.push_str(variant);
            }
            serde_path_to_error::Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Serialize a scenario canonically.
pub fn serialize_scenario(s: &Scenario) -> String {
    canonical_json(s)
}

/// Canonical JSON for any serializable value: sorted object keys, floats at
/// 17 significant digits, 2-space indentation, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &serde_json::Value, indent: usize) {
    use serde_json::Value;
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string escapes"));
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else if nesting_depth(v) <= 2 {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    push_indent(out, indent + 1);
                    write_value(out, item, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                push_indent(out, indent);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
            } else {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                out.push_str("{\n");
                for (i, key) in keys.iter().enumerate() {
                    push_indent(out, indent + 1);
                    out.push_str(&serde_json::to_string(key).expect("key escapes"));
                    out.push_str(": ");
                    write_value(out, &map[*key], indent + 1);
                    if i + 1 < keys.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                push_indent(out, indent);
                out.push('}');
            }
        }
    }
}

/// Arrays of scalars (depth 1) and of scalar arrays (depth 2, e.g. complex
/// pairs) print inline; deeper structures break one element per line.
fn nesting_depth(v: &serde_json::Value) -> usize {
    use serde_json::Value;
    match v {
        Value::Array(items) => 1 + items.iter().map(nesting_depth).max().unwrap_or(0),
        Value::Object(map) if map.is_empty() => 1,
        Value::Object(_) => usize::MAX / 2,
        _ => 0,
    }
}

fn push_indent(out: &mut String, levels: usize) {
    for _ in 0..levels {
        out.push_str("  ");
    }
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(u) = n.as_u64() {
        out.push_str(&u.to_string());
    } else if let Some(i) = n.as_i64() {
        out.push_str(&i.to_string());
    } else {
        let f = n.as_f64().expect("finite float");
        // 17 significant digits: lossless round-trip for f64
        out.push_str(&format!("{f:.16e}"));
    }
}
