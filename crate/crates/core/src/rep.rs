//! Unitary representations of finite groupoids on finite-dimensional bundles.

use std::sync::Arc;

use thiserror::Error;

use crate::groupoid::{product_groupoid, FiniteGroupoid, WideSubgroupoid};
use crate::linalg::{block_diag, max_abs, unitarity_defect, CMatrix};
use crate::report::ValidationReport;
use crate::tolerance::operator_tol;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("expected {expected} {what}, found {found}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    #[error("fiber at unit {0} has dimension zero")]
    ZeroFiber(usize),
    #[error("matrix of element {element} has shape {found:?}, expected {expected:?}")]
    Shape { element: usize, expected: (usize, usize), found: (usize, usize) },
    #[error("fiber dimensions differ across the orbit: unit {a} has {da}, unit {b} has {db}")]
    NotOrbitConstant { a: usize, da: usize, b: usize, db: usize },
    #[error("representations live on different groupoids")]
    GroupoidMismatch,
    #[error("fiber dimensions differ at unit {0}")]
    DimMismatch(usize),
    #[error("direct sum of an empty list")]
    EmptySum,
    #[error("the subgroupoid is not a subgroupoid of this representation's groupoid")]
    NotASubgroupoid,
}

/// `π`: a fiber dimension per unit and a matrix `dim r(x) × dim d(x)` per arrow.
#[derive(Clone, Debug, PartialEq)]
pub struct Representation {
    groupoid: Arc<FiniteGroupoid>,
    /// Indexed by unit position.
    dims: Vec<usize>,
    matrices: Vec<CMatrix>,
}

impl Representation {
    /// Checks shapes only; see [`validate_representation`] for the axioms.
    pub fn new(groupoid: Arc<FiniteGroupoid>, dims: Vec<usize>, matrices: Vec<CMatrix>) -> Result<Self, RepError> {
        if dims.len() != groupoid.unit_count() {
            return Err(RepError::LengthMismatch { what: "fiber dimensions", expected: groupoid.unit_count(), found: dims.len() });
        }
        if let Some(p) = dims.iter().position(|&d| d == 0) {
            return Err(RepError::ZeroFiber(groupoid.units()[p]));
        }
        if matrices.len() != groupoid.len() {
            return Err(RepError::LengthMismatch { what: "matrices", expected: groupoid.len(), found: matrices.len() });
        }
        for (x, m) in matrices.iter().enumerate() {
            let expected = (dims[groupoid.upos(groupoid.range(x))], dims[groupoid.upos(groupoid.domain(x))]);
            if m.shape() != expected {
                return Err(RepError::Shape { element: x, expected, found: m.shape() });
            }
        }
        Ok(Self { groupoid, dims, matrices })
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    /// Fiber dimension at the unit `u`.
    pub fn dim(&self, u: usize) -> usize {
        self.dims[self.groupoid.upos(u)]
    }

    /// Fiber dimensions by unit position.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self, x: usize) -> &CMatrix {
        &self.matrices[x]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// `tr π(x)` for arrows in isotropy, `None` otherwise.
    pub fn character(&self) -> Vec<Option<C64>> {
        self.groupoid
            .elements()
            .map(|x| (self.groupoid.range(x) == self.groupoid.domain(x)).then(|| self.matrices[x].trace()))
            .collect()
    }

    /// `x ↦ U_{r(x)} π(x) U_{d(x)}*` for unitaries `U_u` (by unit position).
    pub fn rebased(&self, unitaries: &[CMatrix]) -> Result<Self, RepError> {
        let g = &self.groupoid;
        if unitaries.len() != g.unit_count() {
            return Err(RepError::LengthMismatch { what: "unitaries", expected: g.unit_count(), found: unitaries.len() });
        }
        let matrices = g
            .elements()
            .map(|x| &unitaries[g.upos(g.range(x))] * &self.matrices[x] * unitaries[g.upos(g.domain(x))].adjoint())
            .collect();
        Self::new(g.clone(), self.dims.clone(), matrices)
    }
}

/// Exhaustive check of the representation axioms.
pub fn validate_representation(rep: &Representation) -> ValidationReport {
    let tol = operator_tol();
    let g = &rep.groupoid;
    let mut report = ValidationReport::new("representation");
    for orbit in g.unit_orbits() {
        let d0 = rep.dim(orbit[0]);
        for &u in &orbit[1..] {
            report.check(rep.dim(u) == d0, "fiber dimension constant on orbits", || {
                format!("unit {} has {d0}, unit {u} has {}", orbit[0], rep.dim(u))
            });
        }
    }
    for &u in g.units() {
        let d = rep.dim(u);
        report.measure(max_abs(&(rep.matrix(u) - CMatrix::identity(d, d))), tol, "π(u) = identity", || format!("unit {u}"));
    }
    for x in g.elements() {
        report.measure(unitarity_defect(rep.matrix(x)), tol, "π(x) unitary", || format!("element {x}"));
        let inv = rep.matrix(g.inverse(x));
        report.measure(max_abs(&(inv - rep.matrix(x).adjoint())), tol, "π(x⁻¹) = π(x)*", || format!("element {x}"));
    }
    for (x, y) in g.composable_pairs() {
        let xy = g.mul(x, y);
        let residual = max_abs(&(rep.matrix(x) * rep.matrix(y) - rep.matrix(xy)));
        report.measure(residual, tol, "π(x)π(y) = π(xy)", || format!("x = {x}, y = {y}"));
    }
    report
}

/// `k`-dimensional identity bundle; `dims` is given by unit position.
pub fn trivial_rep(groupoid: Arc<FiniteGroupoid>, dims: &[usize]) -> Result<Representation, RepError> {
    if dims.len() != groupoid.unit_count() {
        return Err(RepError::LengthMismatch { what: "fiber dimensions", expected: groupoid.unit_count(), found: dims.len() });
    }
    for orbit in groupoid.unit_orbits() {
        let a = orbit[0];
        let da = dims[groupoid.upos(a)];
        if let Some(&b) = orbit.iter().find(|&&b| dims[groupoid.upos(b)] != da) {
            return Err(RepError::NotOrbitConstant { a, da, b, db: dims[groupoid.upos(b)] });
        }
    }
    let matrices = groupoid
        .elements()
        .map(|x| {
            let d = dims[groupoid.upos(groupoid.domain(x))];
            CMatrix::identity(d, d)
        })
        .collect();
    Representation::new(groupoid, dims.to_vec(), matrices)
}

/// The trivial one-dimensional representation.
pub fn trivial_character(groupoid: Arc<FiniteGroupoid>) -> Representation {
    let ones = vec![1; groupoid.unit_count()];
    trivial_rep(groupoid, &ones).expect("constant dimensions")
}

/// Fiberwise direct sum with block-diagonal matrices.
pub fn direct_sum(reps: &[&Representation]) -> Result<Representation, RepError> {
    let first = reps.first().ok_or(RepError::EmptySum)?;
    if reps.iter().any(|r| r.groupoid.as_ref() != first.groupoid.as_ref()) {
        return Err(RepError::GroupoidMismatch);
    }
    let g = first.groupoid.clone();
    let dims = (0..g.unit_count()).map(|p| reps.iter().map(|r| r.dims[p]).sum()).collect();
    let matrices = g
        .elements()
        .map(|x| block_diag(&reps.iter().map(|r| &r.matrices[x]).collect::<Vec<_>>()))
        .collect();
    Representation::new(g, dims, matrices)
}

/// `σ̄`: entrywise complex conjugate matrices.
pub fn conjugate_rep(rep: &Representation) -> Representation {
    Representation {
        groupoid: rep.groupoid.clone(),
        dims: rep.dims.clone(),
        matrices: rep.matrices.iter().map(|m| m.map(|z| z.conj())).collect(),
    }
}

/// `π|_H` on the local ids of `H`.
pub fn restrict(rep: &Representation, h: &WideSubgroupoid) -> Result<Representation, RepError> {
    if h.parent().as_ref() != rep.groupoid.as_ref() {
        return Err(RepError::NotASubgroupoid);
    }
    let matrices = h.members().iter().map(|&x| rep.matrices[x].clone()).collect();
    Representation::new(h.groupoid().clone(), rep.dims.clone(), matrices)
}

/// `π₁ × π₂` on `G₁ × G₂`, tensor basis ordered row-major (`i·dim₂ + j`).
pub fn outer_tensor(a: &Representation, b: &Representation) -> Representation {
    let g = Arc::new(product_groupoid(&a.groupoid, &b.groupoid));
    outer_tensor_on(a, b, g).expect("shapes follow the product structure")
}

/// [`outer_tensor`] onto a given product groupoid, e.g. a shared one.
pub fn outer_tensor_on(a: &Representation, b: &Representation, g: Arc<FiniteGroupoid>) -> Result<Representation, RepError> {
    if g.as_ref() != &product_groupoid(&a.groupoid, &b.groupoid) {
        return Err(RepError::GroupoidMismatch);
    }
    let dims = (0..g.unit_count())
        .map(|p| {
            let (p1, p2) = (p / b.groupoid.unit_count(), p % b.groupoid.unit_count());
            a.dims[p1] * b.dims[p2]
        })
        .collect();
    let matrices = a
        .matrices
        .iter()
        .flat_map(|ma| b.matrices.iter().map(move |mb| ma.kronecker(mb)))
        .collect();
    Representation::new(g, dims, matrices)
}

/// Largest entrywise deviation between two representations.
pub fn rep_equal_report(a: &Representation, b: &Representation) -> Result<f64, RepError> {
    if a.groupoid.as_ref() != b.groupoid.as_ref() {
        return Err(RepError::GroupoidMismatch);
    }
    if let Some(p) = (0..a.dims.len()).find(|&p| a.dims[p] != b.dims[p]) {
        return Err(RepError::DimMismatch(a.groupoid.units()[p]));
    }
    Ok(a.matrices.iter().zip(&b.matrices).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max))
}

/// A family of linear maps `T_u: H^π_u → H^{π′}_u`, by unit position.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleMap {
    pub blocks: Vec<CMatrix>,
}

impl BundleMap {
    pub fn zero(source: &Representation, target: &Representation) -> Self {
        Self {
            blocks: source.dims.iter().zip(&target.dims).map(|(&s, &t)| CMatrix::zeros(t, s)).collect(),
        }
    }

    pub fn identity(rep: &Representation) -> Self {
        Self { blocks: rep.dims.iter().map(|&d| CMatrix::identity(d, d)).collect() }
    }

    /// `T_u` for a unit id.
    pub fn block(&self, g: &FiniteGroupoid, u: usize) -> &CMatrix {
        &self.blocks[g.upos(u)]
    }

    pub fn compose(&self, inner: &BundleMap) -> BundleMap {
        BundleMap { blocks: self.blocks.iter().zip(&inner.blocks).map(|(a, b)| a * b).collect() }
    }

    pub fn adjoint(&self) -> BundleMap {
        BundleMap { blocks: self.blocks.iter().map(|b| b.adjoint()).collect() }
    }

    pub fn scale(&self, z: C64) -> BundleMap {
        BundleMap { blocks: self.blocks.iter().map(|b| b * z).collect() }
    }

    pub fn add(&self, other: &BundleMap) -> BundleMap {
        BundleMap { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(max_abs).fold(0.0, f64::max)
    }

    /// Largest `|T_u* T_u − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks.iter().map(unitarity_defect).fold(0.0, f64::max)
    }

    /// Whether the block shapes match `source → target`.
    pub fn fits(&self, source: &Representation, target: &Representation) -> bool {
        self.blocks.len() == source.dims.len()
            && self.blocks.iter().enumerate().all(|(p, b)| b.shape() == (target.dims[p], source.dims[p]))
    }

    /// `max_x |T_{r(x)} π(x) − π′(x) T_{d(x)}|`; `∞` on shape mismatch.
    pub fn intertwining_residual(&self, source: &Representation, target: &Representation) -> f64 {
        if source.groupoid.as_ref() != target.groupoid.as_ref() || !self.fits(source, target) {
            return f64::INFINITY;
        }
        let g = &source.groupoid;
        g.elements()
            .map(|x| {
                let lhs = self.block(g, g.range(x)) * source.matrix(x);
                let rhs = target.matrix(x) * self.block(g, g.domain(x));
                max_abs(&(lhs - rhs))
            })
            .fold(0.0, f64::max)
    }
}
