//! Versioned JSON documents for groupoids, subgroupoids, measures,
//! representations and scenarios.
//!
//! Output is canonical: object keys sorted, objects indented, arrays inline,
//! floats written with 17 significant digits. References to other documents
//! are either inline objects, `"catalog:NAME"`, or a path relative to the
//! referring document.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::catalog;
use crate::induction::Factor;
use crate::groupoid::{CosetSpace, FiniteGroupoid, GroupoidError, WideSubgroupoid};
use crate::linalg::CMatrix;
use crate::measure::{EquivariantSystem, HaarSystem, MeasureError};
use crate::rep::{RepError, Representation};
use crate::C64;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{0}")]
    Format(String),
    #[error("unsupported document version {0}")]
    Version(u64),
    #[error("unknown document kind `{0}`")]
    UnknownKind(String),
    #[error("expected a {expected} document, found {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("no catalog entry named `{0}`")]
    UnknownCatalog(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Rep(#[from] RepError),
}

impl IoError {
    /// Whether the document is well formed but violates a mathematical
    /// requirement (as opposed to being unreadable or malformed).
    pub fn is_validation_failure(&self) -> bool {
        match self {
            IoError::Groupoid(e) => matches!(
                e,
                GroupoidError::Invalid(_)
                    | GroupoidError::NotAGroup(_)
                    | GroupoidError::NotAnAction(_)
                    | GroupoidError::NotWide(_)
                    | GroupoidError::NotClosedUnderProduct { .. }
                    | GroupoidError::NotClosedUnderInverse { .. }
            ),
            IoError::Measure(e) => matches!(
                e,
                MeasureError::Invalid(_) | MeasureError::NonPositive { .. } | MeasureError::NormalizationInfeasible { .. }
            ),
            IoError::Rep(e) => matches!(e, RepError::NotOrbitConstant { .. }),
            _ => false,
        }
    }
}

fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

/// What a measure or representation document lives on.
#[derive(Clone, Debug)]
pub enum Over {
    Groupoid(Arc<FiniteGroupoid>),
    Subgroupoid(WideSubgroupoid),
}

impl Over {
    /// The groupoid whose local ids index the data.
    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        match self {
            Over::Groupoid(g) => g,
            Over::Subgroupoid(h) => h.groupoid(),
        }
    }

    /// Document id of a local id.
    pub fn external(&self, local: usize) -> usize {
        match self {
            Over::Groupoid(_) => local,
            Over::Subgroupoid(h) => h.to_parent(local),
        }
    }

    /// Local id of a document id.
    pub fn local(&self, id: usize) -> Option<usize> {
        match self {
            Over::Groupoid(g) => (id < g.len()).then_some(id),
            Over::Subgroupoid(h) => h.to_local(id),
        }
    }

    fn to_value(&self) -> Value {
        match self {
            Over::Groupoid(g) => groupoid_value(g),
            Over::Subgroupoid(h) => subgroupoid_value(h),
        }
    }
}

/// A loaded document.
#[derive(Clone, Debug)]
pub enum Object {
    Groupoid(Arc<FiniteGroupoid>),
    Subgroupoid(WideSubgroupoid),
    Haar { over: Over, haar: HaarSystem },
    Equivariant(EquivariantSystem),
    Representation { over: Over, rep: Representation },
    /// Scenario body with references left unresolved, plus the directory
    /// relative paths are resolved against.
    Scenario { doc: Value, base: Option<PathBuf> },
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Groupoid(_) => "groupoid",
            Object::Subgroupoid(_) => "subgroupoid",
            Object::Haar { .. } => "haar",
            Object::Equivariant(_) => "equivariant",
            Object::Representation { .. } => "representation",
            Object::Scenario { .. } => "scenario",
        }
    }
}

fn header(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("kind".into(), json!(kind));
    m.insert("version".into(), json!(FORMAT_VERSION));
    m
}

fn groupoid_value(g: &FiniteGroupoid) -> Value {
    let mut m = header("groupoid");
    m.insert("n_elements".into(), json!(g.len()));
    m.insert("units".into(), json!(g.units()));
    m.insert("range".into(), json!(g.elements().map(|x| g.range(x)).collect::<Vec<_>>()));
    m.insert("domain".into(), json!(g.elements().map(|x| g.domain(x)).collect::<Vec<_>>()));
    m.insert("inverse".into(), json!(g.elements().map(|x| g.inverse(x)).collect::<Vec<_>>()));
    let product: Vec<[usize; 3]> = g
        .composable_pairs()
        .filter_map(|(x, y)| g.product(x, y).map(|xy| [x, y, xy]))
        .collect();
    m.insert("product".into(), json!(product));
    Value::Object(m)
}

fn subgroupoid_value(h: &WideSubgroupoid) -> Value {
    let mut m = header("subgroupoid");
    m.insert("parent".into(), groupoid_value(h.parent()));
    m.insert("members".into(), json!(h.members()));
    Value::Object(m)
}

fn complex_pairs(m: &CMatrix) -> Value {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(json!([m[(i, j)].re, m[(i, j)].im]));
        }
    }
    Value::Array(out)
}

/// The document for an object.
pub fn to_value(obj: &Object) -> Value {
    match obj {
        Object::Groupoid(g) => groupoid_value(g),
        Object::Subgroupoid(h) => subgroupoid_value(h),
        Object::Haar { over, haar } => {
            let mut m = header("haar");
            m.insert("over".into(), over.to_value());
            let c: BTreeMap<String, f64> = over
                .groupoid()
                .units()
                .iter()
                .map(|&u| (over.external(u).to_string(), haar.unit_weight(u)))
                .collect();
            m.insert("c".into(), json!(c));
            Value::Object(m)
        }
        Object::Equivariant(mu) => {
            let cs = mu.cosets();
            let mut m = header("equivariant");
            m.insert("over".into(), subgroupoid_value(cs.sub()));
            let weights: BTreeMap<String, f64> =
                (0..cs.len()).map(|c| (cs.members(c)[0].to_string(), mu.weight(c))).collect();
            m.insert("coset_weights".into(), json!(weights));
            if (0..cs.len()).any(|c| cs.representative(c) != cs.members(c)[0]) {
                m.insert("representatives".into(), json!(cs.representatives()));
            }
            Value::Object(m)
        }
        Object::Representation { over, rep } => {
            let g = over.groupoid();
            let mut m = header("representation");
            m.insert("over".into(), over.to_value());
            let dims: BTreeMap<String, usize> = g.units().iter().map(|&u| (over.external(u).to_string(), rep.dim(u))).collect();
            m.insert("dims".into(), json!(dims));
            let matrices: Map<String, Value> = g
                .elements()
                .map(|x| (over.external(x).to_string(), complex_pairs(rep.matrix(x))))
                .collect();
            m.insert("matrices".into(), Value::Object(matrices));
            Value::Object(m)
        }
        Object::Scenario { doc, .. } => doc.clone(),
    }
}

/// Pretty objects, inline arrays, floats with 17 significant digits.
struct CanonicalFormatter {
    depth: usize,
    has_key: Vec<bool>,
}

impl CanonicalFormatter {
    fn indent<W: ?Sized + Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.depth {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl serde_json::ser::Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        // −0 and +0 compare equal; print them the same
        let value = if value == 0.0 { 0.0 } else { value };
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, _: &mut W) -> std::io::Result<()> {
        Ok(())
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.depth += 1;
        self.has_key.push(false);
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.depth -= 1;
        if self.has_key.pop().unwrap_or(false) {
            self.indent(w)?;
        }
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        if let Some(top) = self.has_key.last_mut() {
            *top = true;
        }
        self.indent(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, _: &mut W) -> std::io::Result<()> {
        Ok(())
    }
}

/// Canonical text of any serializable value, newline-terminated.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    // through Value so that map keys come out sorted
    let value = serde_json::to_value(value).expect("serializable");
    let mut ser = serde_json::Serializer::with_formatter(Vec::new(), CanonicalFormatter { depth: 0, has_key: Vec::new() });
    value.serialize(&mut ser).expect("writing to memory");
    let mut out = String::from_utf8(ser.into_inner()).expect("JSON is UTF-8");
    out.push('\n');
    out
}

pub fn save(obj: &Object, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, to_canonical_string(&to_value(obj)))
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

pub fn load(path: &Path) -> Result<Object, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    load_str(&text, &path.display().to_string(), path.parent())
}

/// Parses a document; `base` is where relative references point.
pub fn load_str(text: &str, name: &str, base: Option<&Path>) -> Result<Object, IoError> {
    let value: Value = serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: name.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_value(&value, base)
}

/// Loads `catalog:NAME` or a path (relative to `base`), or reads an inline
/// document.
pub fn resolve(reference: &Value, base: Option<&Path>) -> Result<Object, IoError> {
    match reference {
        Value::String(s) => resolve_str(s, base),
        Value::Object(_) => from_value(reference, base),
        _ => Err(format_err("a reference must be a string or an inline document")),
    }
}

pub fn resolve_str(reference: &str, base: Option<&Path>) -> Result<Object, IoError> {
    if let Some(name) = reference.strip_prefix("catalog:") {
        return catalog::lookup(name).ok_or_else(|| IoError::UnknownCatalog(name.to_string()));
    }
    let path = match base {
        Some(b) => b.join(reference),
        None => PathBuf::from(reference),
    };
    load(&path)
}

fn field<'a>(m: &'a Map<String, Value>, key: &str) -> Result<&'a Value, IoError> {
    m.get(key).ok_or_else(|| format_err(format!("missing field `{key}`")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize, IoError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| format_err(format!("`{what}` must be a nonnegative integer")))
}

fn usize_array(v: &Value, what: &str) -> Result<Vec<usize>, IoError> {
    v.as_array()
        .ok_or_else(|| format_err(format!("`{what}` must be an array")))?
        .iter()
        .map(|x| as_usize(x, what))
        .collect()
}

fn as_f64(v: &Value, what: &str) -> Result<f64, IoError> {
    v.as_f64().ok_or_else(|| format_err(format!("`{what}` must be a number")))
}

fn keyed<'a>(m: &'a Map<String, Value>, key: &str) -> Result<Vec<(usize, &'a Value)>, IoError> {
    field(m, key)?
        .as_object()
        .ok_or_else(|| format_err(format!("`{key}` must be an object")))?
        .iter()
        .map(|(k, v)| {
            k.parse::<usize>()
                .map(|id| (id, v))
                .map_err(|_| format_err(format!("`{key}` key `{k}` is not an element id")))
        })
        .collect()
}

/// Reads a document.
pub fn from_value(value: &Value, base: Option<&Path>) -> Result<Object, IoError> {
    let m = value.as_object().ok_or_else(|| format_err("a document must be a JSON object"))?;
    let kind = field(m, "kind")?.as_str().ok_or_else(|| format_err("`kind` must be a string"))?;
    let version = field(m, "version")?.as_u64().ok_or_else(|| format_err("`version` must be an integer"))?;
    if version != FORMAT_VERSION {
        return Err(IoError::Version(version));
    }
    match kind {
        "groupoid" => Ok(Object::Groupoid(Arc::new(groupoid_from(m)?))),
        "subgroupoid" => Ok(Object::Subgroupoid(subgroupoid_from(m, base)?)),
        "haar" => {
            let over = over_from(field(m, "over")?, base)?;
            let g = over.groupoid().clone();
            let mut c = vec![f64::NAN; g.unit_count()];
            for (id, v) in keyed(m, "c")? {
                let u = over.local(id).filter(|&u| g.is_unit(u)).ok_or_else(|| format_err(format!("`c` key {id} is not a unit")))?;
                c[g.upos(u)] = as_f64(v, "c")?;
            }
            if let Some(p) = c.iter().position(|w| w.is_nan()) {
                return Err(format_err(format!("`c` has no weight for unit {}", over.external(g.units()[p]))));
            }
            let haar = HaarSystem::from_unit_weights(g, c)?;
            Ok(Object::Haar { over, haar })
        }
        "equivariant" => Ok(Object::Equivariant(equivariant_from(m, base)?)),
        "representation" => {
            let over = over_from(field(m, "over")?, base)?;
            let rep = representation_from(m, &over)?;
            Ok(Object::Representation { over, rep })
        }
        "scenario" => {
            field(m, "check")?.as_str().ok_or_else(|| format_err("`check` must be a string"))?;
            Ok(Object::Scenario { doc: value.clone(), base: base.map(Path::to_path_buf) })
        }
        other => Err(IoError::UnknownKind(other.to_string())),
    }
}

fn groupoid_from(m: &Map<String, Value>) -> Result<FiniteGroupoid, IoError> {
    let n = as_usize(field(m, "n_elements")?, "n_elements")?;
    let units = usize_array(field(m, "units")?, "units")?;
    let range = usize_array(field(m, "range")?, "range")?;
    let domain = usize_array(field(m, "domain")?, "domain")?;
    let inverse = usize_array(field(m, "inverse")?, "inverse")?;
    let triples = field(m, "product")?
        .as_array()
        .ok_or_else(|| format_err("`product` must be an array"))?
        .iter()
        .map(|t| {
            let t = usize_array(t, "product")?;
            match t.as_slice() {
                &[x, y, xy] => Ok((x, y, xy)),
                _ => Err(format_err("`product` entries must be [x, y, xy] triples")),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FiniteGroupoid::from_tables(n, &units, range, domain, inverse, &triples)?)
}

/// A groupoid reference used as a parent must satisfy the axioms.
fn valid_groupoid(reference: &Value, base: Option<&Path>) -> Result<Arc<FiniteGroupoid>, IoError> {
    match resolve(reference, base)? {
        Object::Groupoid(g) => {
            let report = g.validate();
            if report.passed() {
                Ok(g)
            } else {
                Err(GroupoidError::Invalid(Box::new(report)).into())
            }
        }
        other => Err(IoError::WrongKind { expected: "groupoid", found: other.kind() }),
    }
}

fn subgroupoid_from(m: &Map<String, Value>, base: Option<&Path>) -> Result<WideSubgroupoid, IoError> {
    let parent = valid_groupoid(field(m, "parent")?, base)?;
    let members = usize_array(field(m, "members")?, "members")?;
    Ok(WideSubgroupoid::new(parent, members)?)
}

fn over_from(reference: &Value, base: Option<&Path>) -> Result<Over, IoError> {
    match resolve(reference, base)? {
        Object::Groupoid(g) => {
            let report = g.validate();
            if !report.passed() {
                return Err(GroupoidError::Invalid(Box::new(report)).into());
            }
            Ok(Over::Groupoid(g))
        }
        Object::Subgroupoid(h) => Ok(Over::Subgroupoid(h)),
        other => Err(IoError::WrongKind { expected: "groupoid or subgroupoid", found: other.kind() }),
    }
}

/// A reference that must resolve to a subgroupoid.
pub fn resolve_subgroupoid(reference: &Value, base: Option<&Path>) -> Result<WideSubgroupoid, IoError> {
    match resolve(reference, base)? {
        Object::Subgroupoid(h) => Ok(h),
        other => Err(IoError::WrongKind { expected: "subgroupoid", found: other.kind() }),
    }
}

/// A reference that must resolve to a groupoid satisfying the axioms.
pub fn resolve_groupoid(reference: &Value, base: Option<&Path>) -> Result<Arc<FiniteGroupoid>, IoError> {
    valid_groupoid(reference, base)
}

/// A reference that must resolve to a representation.
pub fn resolve_representation(reference: &Value, base: Option<&Path>) -> Result<(Over, Representation), IoError> {
    match resolve(reference, base)? {
        Object::Representation { over, rep } => Ok((over, rep)),
        other => Err(IoError::WrongKind { expected: "representation", found: other.kind() }),
    }
}

fn equivariant_from(m: &Map<String, Value>, base: Option<&Path>) -> Result<EquivariantSystem, IoError> {
    let sub = resolve_subgroupoid(field(m, "over")?, base)?;
    let mut cs = CosetSpace::new(&sub);
    if let Some(reps) = m.get("representatives") {
        cs = cs.with_representatives(usize_array(reps, "representatives")?)?;
    }
    let cs = Arc::new(cs);
    let coset_by_key = |id: usize, what: &str| -> Result<usize, IoError> {
        (0..cs.len())
            .find(|&c| cs.members(c)[0] == id)
            .ok_or_else(|| format_err(format!("`{what}` key {id} is not the smallest element of a coset")))
    };
    match (m.get("coset_weights"), m.get("orbit_weights")) {
        (Some(_), None) => {
            let mut weight = vec![f64::NAN; cs.len()];
            for (id, v) in keyed(m, "coset_weights")? {
                weight[coset_by_key(id, "coset_weights")?] = as_f64(v, "coset_weights")?;
            }
            if let Some(c) = weight.iter().position(|w| w.is_nan()) {
                return Err(format_err(format!("`coset_weights` has no weight for coset {}", cs.members(c)[0])));
            }
            Ok(EquivariantSystem::from_coset_weights(cs, weight)?)
        }
        (None, Some(_)) => {
            let orbits = cs.orbits();
            let mut per_orbit = vec![f64::NAN; orbits.len()];
            for (id, v) in keyed(m, "orbit_weights")? {
                let c = coset_by_key(id, "orbit_weights")?;
                per_orbit[orbits.orbit_of[c]] = as_f64(v, "orbit_weights")?;
            }
            if let Some(o) = per_orbit.iter().position(|w| w.is_nan()) {
                return Err(format_err(format!("`orbit_weights` has no weight for the orbit of coset {}", cs.members(orbits.orbits[o][0])[0])));
            }
            Ok(crate::measure::solve_equivariant(cs, Some(&per_orbit))?)
        }
        _ => Err(format_err("exactly one of `coset_weights` and `orbit_weights` is required")),
    }
}

fn representation_from(m: &Map<String, Value>, over: &Over) -> Result<Representation, IoError> {
    let g = over.groupoid().clone();
    let mut dims = vec![0usize; g.unit_count()];
    for (id, v) in keyed(m, "dims")? {
        let u = over.local(id).filter(|&u| g.is_unit(u)).ok_or_else(|| format_err(format!("`dims` key {id} is not a unit")))?;
        dims[g.upos(u)] = as_usize(v, "dims")?;
    }
    let mut matrices: Vec<Option<CMatrix>> = vec![None; g.len()];
    for (id, v) in keyed(m, "matrices")? {
        let x = over.local(id).ok_or_else(|| format_err(format!("`matrices` key {id} is not an element")))?;
        let (rows, cols) = (dims[g.upos(g.range(x))], dims[g.upos(g.domain(x))]);
        let entries = v.as_array().ok_or_else(|| format_err("matrices must be arrays of [re, im] pairs"))?;
        if entries.len() != rows * cols {
            return Err(format_err(format!("matrix of element {id} has {} entries, expected {}", entries.len(), rows * cols)));
        }
        let values = entries
            .iter()
            .map(|e| match e.as_array().map(|a| a.as_slice()) {
                Some([re, im]) => Ok(C64::new(as_f64(re, "re")?, as_f64(im, "im")?)),
                _ => Err(format_err("matrix entries must be [re, im] pairs")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        matrices[x] = Some(CMatrix::from_row_slice(rows, cols, &values));
    }
    let matrices = matrices
        .into_iter()
        .enumerate()
        .map(|(x, m)| m.ok_or_else(|| format_err(format!("no matrix for element {}", over.external(x)))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Representation::new(g, dims, matrices)?)
}

/// A scenario with its references resolved.
#[derive(Clone, Debug)]
pub enum Scenario {
    Frobenius {
        sub: WideSubgroupoid,
        pi: Vec<(String, Representation)>,
        sigma: Vec<(String, Representation)>,
        expected: Option<Vec<Vec<usize>>>,
    },
    Stages {
        h: WideSubgroupoid,
        k: WideSubgroupoid,
        sigma: Representation,
        mu_g_orbits: Option<Vec<f64>>,
        mu_h_orbits: Option<Vec<f64>>,
    },
    Mackey {
        left: Factor,
        right: Factor,
        trials: usize,
        seed: u64,
    },
}

/// Default number of random generator pairs for the tensor-product check.
pub const MACKEY_TRIALS: usize = 20;
/// Default seed for the random generator pairs.
pub const MACKEY_SEED: u64 = 0x5eed;

impl Scenario {
    pub fn check(&self) -> &'static str {
        match self {
            Scenario::Frobenius { .. } => "frobenius",
            Scenario::Stages { .. } => "stages",
            Scenario::Mackey { .. } => "mackey",
        }
    }
}

fn label(reference: &Value) -> String {
    match reference {
        Value::String(s) => s.clone(),
        _ => "inline".to_string(),
    }
}

/// A representation reference that must live on `target`.
fn rep_on(reference: &Value, base: Option<&Path>, target: &FiniteGroupoid, what: &str) -> Result<Representation, IoError> {
    let (_, rep) = resolve_representation(reference, base)?;
    if rep.groupoid().as_ref() != target {
        return Err(format_err(format!("{what} `{}` is not a representation of the expected groupoid", label(reference))));
    }
    Ok(rep)
}

fn optional_weights(m: &Map<String, Value>, key: &str) -> Result<Option<Vec<f64>>, IoError> {
    m.get(key)
        .map(|v| {
            v.as_array()
                .ok_or_else(|| format_err(format!("`{key}` must be an array")))?
                .iter()
                .map(|w| as_f64(w, key))
                .collect()
        })
        .transpose()
}

fn factor_from(v: &Value, base: Option<&Path>, side: &str) -> Result<Factor, IoError> {
    let m = v.as_object().ok_or_else(|| format_err(format!("`{side}` must be an object")))?;
    let sub = resolve_subgroupoid(field(m, "subgroupoid")?, base)?;
    let sigma = rep_on(field(m, "sigma")?, base, sub.groupoid(), "sigma")?;
    Ok(Factor { sub, sigma, mu_orbits: optional_weights(m, "mu_orbits")? })
}

/// Resolves the references of a scenario document.
pub fn resolve_scenario(doc: &Value, base: Option<&Path>) -> Result<Scenario, IoError> {
    let m = doc.as_object().ok_or_else(|| format_err("a scenario must be a JSON object"))?;
    let check = field(m, "check")?.as_str().ok_or_else(|| format_err("`check` must be a string"))?;
    let list = |key: &str| -> Result<&Vec<Value>, IoError> {
        field(m, key)?.as_array().ok_or_else(|| format_err(format!("`{key}` must be an array")))
    };
    match check {
        "frobenius" => {
            let sub = resolve_subgroupoid(field(m, "subgroupoid")?, base)?;
            let pi = list("pi")?
                .iter()
                .map(|r| Ok((label(r), rep_on(r, base, sub.parent(), "pi")?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            let sigma = list("sigma")?
                .iter()
                .map(|r| Ok((label(r), rep_on(r, base, sub.groupoid(), "sigma")?)))
                .collect::<Result<Vec<_>, IoError>>()?;
            let expected = m
                .get("expected")
                .map(|rows| {
                    rows.as_array()
                        .ok_or_else(|| format_err("`expected` must be an array of rows"))?
                        .iter()
                        .map(|row| usize_array(row, "expected"))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            if let Some(e) = &expected {
                if e.len() != pi.len() || e.iter().any(|row| row.len() != sigma.len()) {
                    return Err(format_err("`expected` must have one row per pi and one column per sigma"));
                }
            }
            Ok(Scenario::Frobenius { sub, pi, sigma, expected })
        }
        "stages" => {
            let h = resolve_subgroupoid(field(m, "h")?, base)?;
            let k = resolve_subgroupoid(field(m, "k")?, base)?;
            let sigma = rep_on(field(m, "sigma")?, base, k.groupoid(), "sigma")?;
            Ok(Scenario::Stages {
                h,
                k,
                sigma,
                mu_g_orbits: optional_weights(m, "mu_g_orbits")?,
                mu_h_orbits: optional_weights(m, "mu_h_orbits")?,
            })
        }
        "mackey" => Ok(Scenario::Mackey {
            left: factor_from(field(m, "left")?, base, "left")?,
            right: factor_from(field(m, "right")?, base, "right")?,
            trials: m.get("trials").map(|v| as_usize(v, "trials")).transpose()?.unwrap_or(MACKEY_TRIALS),
            seed: m.get("seed").map(|v| v.as_u64().ok_or_else(|| format_err("`seed` must be an integer"))).transpose()?.unwrap_or(MACKEY_SEED),
        }),
        other => Err(format_err(format!("unknown check `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::pair_groupoid;
    use crate::measure::{counting_haar, solve_equivariant};

    fn round_trip(obj: &Object) {
        let text = to_canonical_string(&to_value(obj));
        let back = load_str(&text, "memory", None).unwrap();
        assert_eq!(to_canonical_string(&to_value(&back)), text);
    }

    #[test]
    fn catalog_round_trips() {
        for name in catalog::names() {
            round_trip(&catalog::lookup(name).unwrap());
        }
    }

    #[test]
    fn measures_round_trip() {
        let a3 = catalog::s3_a3();
        let cs = CosetSpace::new(&a3).with_representatives(vec![4, 5]).unwrap();
        let mu = solve_equivariant(Arc::new(cs), Some(&[0.1])).unwrap();
        round_trip(&Object::Equivariant(mu.clone()));
        let text = to_canonical_string(&to_value(&Object::Equivariant(mu)));
        match load_str(&text, "memory", None).unwrap() {
            Object::Equivariant(back) => {
                assert_eq!(back.cosets().representatives(), &[4, 5]);
                assert_eq!(back.weights(), &[0.1, 0.1]);
            }
            _ => panic!("wrong kind"),
        }
        let haar = counting_haar(a3.groupoid().clone(), true).unwrap();
        round_trip(&Object::Haar { over: Over::Subgroupoid(a3), haar });
    }

    #[test]
    fn canonical_text() {
        let g = pair_groupoid(1).unwrap();
        let text = to_canonical_string(&to_value(&Object::Groupoid(Arc::new(g))));
        assert_eq!(
            text,
            "{\n  \"domain\": [0],\n  \"inverse\": [0],\n  \"kind\": \"groupoid\",\n  \"n_elements\": 1,\n  \"product\": [[0, 0, 0]],\n  \"range\": [0],\n  \"units\": [0],\n  \"version\": 1\n}\n"
        );
        assert_eq!(to_canonical_string(&json!({"w": 0.1})), "{\n  \"w\": 1.0000000000000001e-1\n}\n");
        assert_eq!(to_canonical_string(&json!([-0.0])), "[0.0000000000000000e0]\n");
    }

    #[test]
    fn dangling_triple_is_named() {
        let doc = r#"{"kind": "groupoid", "version": 1, "n_elements": 1, "units": [0],
            "range": [0], "domain": [0], "inverse": [0], "product": [[0, 0, 0], [0, 4, 0]]}"#;
        let err = load_str(doc, "memory", None).unwrap_err();
        assert!(err.to_string().contains("[0, 4, 0]"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = load_str("{\n  \"kind\": }", "bad.json", None).unwrap_err();
        match err {
            IoError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
        let err = load_str(r#"{"kind": "groupoid", "version": 2}"#, "v2", None).unwrap_err();
        assert!(matches!(err, IoError::Version(2)));
    }

    #[test]
    fn representation_keys_are_parent_ids() {
        let text = to_canonical_string(&to_value(&catalog::lookup("a3-omega").unwrap()));
        let v: Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<&String> = v["matrices"].as_object().unwrap().keys().collect();
        assert_eq!(keys, vec!["0", "3", "4"]);
    }

    #[test]
    fn catalog_scenarios_resolve() {
        for (name, check) in [("s3-a3-full", "frobenius"), ("p2xs3-full", "frobenius"), ("s3-stages", "stages"), ("p2xs3-stages", "stages"), ("mackey-s3a3-p2", "mackey")] {
            let doc = catalog::scenario(name).unwrap();
            assert_eq!(resolve_scenario(&doc, None).unwrap().check(), check);
        }
        let mut doc = catalog::scenario("s3-a3-full").unwrap();
        doc["sigma"][0] = json!("catalog:s3-triv");
        assert!(matches!(resolve_scenario(&doc, None), Err(IoError::Format(_))));
    }

    #[test]
    fn invalid_weights_are_validation_failures() {
        let a3 = catalog::s3_a3();
        let mut doc = to_value(&Object::Equivariant(solve_equivariant(Arc::new(CosetSpace::new(&a3)), None).unwrap()));
        doc["coset_weights"]["1"] = json!(2.0);
        let err = from_value(&doc, None).unwrap_err();
        assert!(err.is_validation_failure(), "{err}");
    }
}
