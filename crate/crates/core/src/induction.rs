//! The induced representation `ind_H^G(σ, μ)` and its companion maps.
//!
//! The fiber over a unit `u` is realized in representative coordinates: an
//! `H`-equivariant function `f` on `G^u` is determined by its values at the
//! coset representatives, and is stored as the stacked vector
//! `(√μ(C)·f(x_C))_{C ∈ (G/H)^u}`. The √μ scaling makes the μ-weighted inner
//! product the standard one, so the matrices of `L(x)f(y) = f(x⁻¹y)` are
//! ordinary unitaries. Their only nonzero blocks are
//!
//! ```text
//! block (C′, x⁻¹·C′) = σ(h)*,   h = x_C⁻¹ · x⁻¹ · x_{C′} ∈ H.
//! ```

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::groupoid::{product_groupoid, CosetSpace, FiniteGroupoid, GroupoidError, WideSubgroupoid};
use crate::linalg::{inner, max_abs, max_abs_vec, random_scalar, random_vector, rank, CMatrix, CVector};
use crate::measure::{counting_haar, solve_equivariant, EquivariantSystem, HaarSystem, MeasureError};
use crate::rep::{conjugate_rep, outer_tensor_on, rep_equal_report, BundleMap, RepError, Representation};
use crate::report::ValidationReport;
use crate::tolerance::{operator_tol, NULLSPACE_REL_TOL};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InductionError {
    #[error("σ is not a representation of the subgroupoid H")]
    SigmaNotOnSub,
    #[error("the Haar system is not a Haar system of H")]
    HaarNotOnSub,
    #[error("representative bookkeeping failed: x_C⁻¹·x⁻¹·x_C′ = {h} is not in H (x = {x}, C′ = {coset})")]
    NotInSub { x: usize, coset: usize, h: usize },
    #[error("vector of length {found} does not fit a fiber of dimension {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("the factors of a product do not match")]
    FactorMismatch,
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// One coset block inside a fiber.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub coset: usize,
    pub offset: usize,
    pub dim: usize,
}

/// Ordered coset blocks of the fiber over one unit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberLayout {
    pub unit: usize,
    pub blocks: Vec<Block>,
    pub dim: usize,
}

impl FiberLayout {
    pub fn block_of(&self, coset: usize) -> Option<&Block> {
        self.blocks.iter().find(|b| b.coset == coset)
    }
}

/// A member of `F₀^σ(G)`: a vector in `H^σ_{d(x)}` for every arrow `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantFunction {
    pub values: Vec<CVector>,
}

impl EquivariantFunction {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(max_abs_vec).fold(0.0, f64::max)
    }
}

/// `(ind_H^G σ, μ)` with the data it was built from.
#[derive(Clone, Debug)]
pub struct InducedRep {
    base: Representation,
    sigma: Representation,
    mu: EquivariantSystem,
    h_haar: HaarSystem,
    layout: Vec<FiberLayout>,
}

/// Builds the induced representation; representatives are those of `mu`'s
/// coset space.
pub fn induce(sigma: &Representation, mu: &EquivariantSystem, h_haar: &HaarSystem) -> Result<InducedRep, InductionError> {
    let cs = mu.cosets();
    let sub = cs.sub();
    let g = cs.groupoid().clone();
    if sigma.groupoid().as_ref() != sub.groupoid().as_ref() {
        return Err(InductionError::SigmaNotOnSub);
    }
    if h_haar.groupoid().as_ref() != sub.groupoid().as_ref() {
        return Err(InductionError::HaarNotOnSub);
    }
    let sigma_dim = |x: usize| sigma.dims()[g.upos(g.domain(x))];
    let layout: Vec<FiberLayout> = g
        .units()
        .iter()
        .map(|&u| {
            let mut offset = 0;
            let blocks = cs
                .over(u)
                .iter()
                .map(|&c| {
                    let dim = sigma_dim(cs.representative(c));
                    let b = Block { coset: c, offset, dim };
                    offset += dim;
                    b
                })
                .collect();
            FiberLayout { unit: u, blocks, dim: offset }
        })
        .collect();
    let mut matrices = Vec::with_capacity(g.len());
    for x in g.elements() {
        let target = &layout[g.upos(g.range(x))];
        let source = &layout[g.upos(g.domain(x))];
        let xi = g.inverse(x);
        let mut m = CMatrix::zeros(target.dim, source.dim);
        for bt in &target.blocks {
            let c = cs.act(xi, bt.coset).expect("x⁻¹ acts on cosets over r(x)");
            let bs = source.block_of(c).expect("x⁻¹·C′ lies over d(x)");
            let rep_c = cs.representative(c);
            let h = g.mul(g.mul(g.inverse(rep_c), xi), cs.representative(bt.coset));
            let lh = sub.to_local(h).ok_or(InductionError::NotInSub { x, coset: bt.coset, h })?;
            m.view_mut((bt.offset, bs.offset), (bt.dim, bs.dim)).copy_from(&sigma.matrix(lh).adjoint());
        }
        matrices.push(m);
    }
    let dims = layout.iter().map(|l| l.dim).collect();
    let base = Representation::new(g, dims, matrices)?;
    Ok(InducedRep { base, sigma: sigma.clone(), mu: mu.clone(), h_haar: h_haar.clone(), layout })
}

impl InducedRep {
    /// The induced representation itself.
    pub fn base(&self) -> &Representation {
        &self.base
    }

    pub fn sigma(&self) -> &Representation {
        &self.sigma
    }

    pub fn mu(&self) -> &EquivariantSystem {
        &self.mu
    }

    pub fn h_haar(&self) -> &HaarSystem {
        &self.h_haar
    }

    pub fn cosets(&self) -> &Arc<CosetSpace> {
        self.mu.cosets()
    }

    pub fn sub(&self) -> &WideSubgroupoid {
        self.mu.cosets().sub()
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.base.groupoid()
    }

    /// Layout of the fiber over the unit `u`.
    pub fn layout(&self, u: usize) -> &FiberLayout {
        &self.layout[self.groupoid().upos(u)]
    }

    pub fn layouts(&self) -> &[FiberLayout] {
        &self.layout
    }

    /// `dim H^σ_{d(x)}`.
    pub fn sigma_dim_at(&self, x: usize) -> usize {
        let g = self.groupoid();
        self.sigma.dims()[g.upos(g.domain(x))]
    }

    /// `σ(h)` for a parent id `h ∈ H`.
    pub fn sigma_of(&self, h: usize) -> &CMatrix {
        self.sigma.matrix(self.sub().to_local(h).expect("element of H"))
    }

    pub fn zero_function(&self) -> EquivariantFunction {
        EquivariantFunction {
            values: self.groupoid().elements().map(|x| CVector::zeros(self.sigma_dim_at(x))).collect(),
        }
    }

    /// Largest `|f(xξ) − σ(ξ⁻¹) f(x)|` over `x ∈ G`, `ξ ∈ H^{d(x)}`.
    pub fn equivariance_defect(&self, f: &EquivariantFunction) -> f64 {
        let g = self.groupoid();
        let mut worst: f64 = 0.0;
        for x in g.elements() {
            for xi in self.sub().range_fiber(g.domain(x)) {
                let lhs = &f.values[g.mul(x, xi)];
                let rhs = self.sigma_of(g.inverse(xi)) * &f.values[x];
                worst = worst.max(max_abs_vec(&(lhs - rhs)));
            }
        }
        worst
    }

    /// `f_α(x) = Σ_{η ∈ H^{d(x)}} σ(η) α(xη) λ_H(η)`.
    pub fn smooth(&self, alpha: &EquivariantFunction) -> Result<EquivariantFunction, InductionError> {
        self.check_shape(alpha)?;
        let g = self.groupoid();
        let values = g
            .elements()
            .map(|x| {
                let mut acc = CVector::zeros(self.sigma_dim_at(x));
                for eta in self.sub().range_fiber(g.domain(x)) {
                    let w = self.h_haar.weight(self.sub().to_local(eta).unwrap());
                    acc += self.sigma_of(eta) * &alpha.values[g.mul(x, eta)] * C64::new(w, 0.0);
                }
                acc
            })
            .collect();
        Ok(EquivariantFunction { values })
    }

    /// `E(f, t)(x) = Σ_{h ∈ H^{d(x)}} f(xh) σ(h) t(d(h)) λ_H(h)`; `t` is indexed
    /// by unit position.
    pub fn generator(&self, f: &[C64], t: &[CVector]) -> Result<EquivariantFunction, InductionError> {
        let g = self.groupoid();
        if f.len() != g.len() {
            return Err(InductionError::LengthMismatch { expected: g.len(), found: f.len() });
        }
        for (p, v) in t.iter().enumerate() {
            if v.len() != self.sigma.dims()[p] {
                return Err(InductionError::LengthMismatch { expected: self.sigma.dims()[p], found: v.len() });
            }
        }
        if t.len() != g.unit_count() {
            return Err(InductionError::LengthMismatch { expected: g.unit_count(), found: t.len() });
        }
        let values = g
            .elements()
            .map(|x| {
                let mut acc = CVector::zeros(self.sigma_dim_at(x));
                for h in self.sub().range_fiber(g.domain(x)) {
                    let w = self.h_haar.weight(self.sub().to_local(h).unwrap());
                    let coeff = f[g.mul(x, h)] * w;
                    if coeff != C64::new(0.0, 0.0) {
                        acc += self.sigma_of(h) * &t[g.upos(g.domain(h))] * coeff;
                    }
                }
                acc
            })
            .collect();
        Ok(EquivariantFunction { values })
    }

    /// Rank, per unit position, of `{E(1_x, e_i)}` over all arrows `x` and
    /// basis vectors `e_i`; equals the fiber dimension when the generators
    /// are total.
    pub fn generator_span_rank(&self) -> Vec<usize> {
        let g = self.groupoid();
        let mut columns: Vec<Vec<CVector>> = vec![Vec::new(); g.unit_count()];
        for x in g.elements() {
            let mut f = vec![C64::new(0.0, 0.0); g.len()];
            f[x] = C64::new(1.0, 0.0);
            for p in 0..g.unit_count() {
                for i in 0..self.sigma.dims()[p] {
                    let mut t: Vec<CVector> = self.sigma.dims().iter().map(|&d| CVector::zeros(d)).collect();
                    t[p][i] = C64::new(1.0, 0.0);
                    let e = self.generator(&f, &t).expect("shapes are consistent");
                    for (q, &u) in g.units().iter().enumerate() {
                        columns[q].push(self.vector_of(&e, u));
                    }
                }
            }
        }
        columns
            .iter()
            .map(|cols| rank(&CMatrix::from_columns(cols), NULLSPACE_REL_TOL))
            .collect()
    }

    /// Coordinates `(√μ(C)·f(x_C))_C` of `f|_{G^u}` in the fiber over `u`.
    pub fn vector_of(&self, f: &EquivariantFunction, u: usize) -> CVector {
        let layout = self.layout(u);
        let mut v = CVector::zeros(layout.dim);
        for b in &layout.blocks {
            let scale = C64::new(self.mu.weight(b.coset).sqrt(), 0.0);
            v.rows_mut(b.offset, b.dim).copy_from(&(&f.values[self.cosets().representative(b.coset)] * scale));
        }
        v
    }

    /// The equivariant function on `G^u` with coordinates `v`, zero elsewhere:
    /// `f(x) = σ(h)*·v_C/√μ(C)` for `x = x_C h`.
    pub fn function_from_vector(&self, u: usize, v: &CVector) -> Result<EquivariantFunction, InductionError> {
        let layout = self.layout(u);
        if v.len() != layout.dim {
            return Err(InductionError::LengthMismatch { expected: layout.dim, found: v.len() });
        }
        let cs = self.cosets();
        let mut f = self.zero_function();
        for &x in self.groupoid().range_fiber(u) {
            let c = cs.coset_of(x);
            let b = layout.block_of(c).expect("coset over u");
            let h = cs.offset_in_sub(x);
            let scale = C64::new(1.0 / self.mu.weight(c).sqrt(), 0.0);
            f.values[x] = self.sigma_of(h).adjoint() * v.rows(b.offset, b.dim) * scale;
        }
        Ok(f)
    }

    /// `⟨f, g⟩(u) = Σ_{C ∈ (G/H)^u} μ(C)·⟨f(x_C), g(x_C)⟩`.
    pub fn inner_product(&self, f: &EquivariantFunction, g: &EquivariantFunction, u: usize) -> C64 {
        let cs = self.cosets();
        cs.over(u)
            .iter()
            .map(|&c| {
                let x = cs.representative(c);
                inner(&f.values[x], &g.values[x]) * self.mu.weight(c)
            })
            .sum()
    }

    /// `L(x) f (y) = f(x⁻¹ y)` on functions, for comparing with the matrices.
    pub fn translate(&self, x: usize, f: &EquivariantFunction) -> EquivariantFunction {
        let g = self.groupoid();
        let mut out = self.zero_function();
        for &y in g.range_fiber(g.range(x)) {
            out.values[y] = f.values[g.mul(g.inverse(x), y)].clone();
        }
        out
    }

    fn check_shape(&self, f: &EquivariantFunction) -> Result<(), InductionError> {
        let g = self.groupoid();
        if f.values.len() != g.len() {
            return Err(InductionError::LengthMismatch { expected: g.len(), found: f.values.len() });
        }
        for x in g.elements() {
            if f.values[x].len() != self.sigma_dim_at(x) {
                return Err(InductionError::LengthMismatch { expected: self.sigma_dim_at(x), found: f.values[x].len() });
            }
        }
        Ok(())
    }
}

/// Transport along an equivalence: for `V: σ → σ′` the map `f ↦ V∘f` in coordinates,
/// block-diagonal with `V_{d(x_C)}` on the block of `C`.
pub fn transport_equivalence(ind: &InducedRep, ind_prime: &InducedRep, v: &BundleMap) -> Result<BundleMap, InductionError> {
    if !v.fits(ind.sigma(), ind_prime.sigma()) {
        return Err(InductionError::FactorMismatch);
    }
    let g = ind.groupoid();
    let cs = ind.cosets();
    let blocks = g
        .units()
        .iter()
        .map(|&u| {
            let src = ind.layout(u);
            let dst = ind_prime.layout(u);
            let mut t = CMatrix::zeros(dst.dim, src.dim);
            for b in &src.blocks {
                let bp = dst.block_of(b.coset).expect("same cosets");
                let w = g.domain(cs.representative(b.coset));
                t.view_mut((bp.offset, b.offset), (bp.dim, b.dim)).copy_from(v.block(g, w));
            }
            t
        })
        .collect();
    Ok(BundleMap { blocks })
}

/// The block permutation `W: ind(⊕σᵢ) → ⊕ind(σᵢ)`.
pub fn direct_sum_unitary(sum: &InducedRep, parts: &[&InducedRep]) -> BundleMap {
    let g = sum.groupoid();
    let blocks = g
        .units()
        .iter()
        .map(|&u| {
            let src = sum.layout(u);
            let dim: usize = parts.iter().map(|p| p.layout(u).dim).sum();
            let mut w = CMatrix::zeros(dim, src.dim);
            for b in &src.blocks {
                let mut inner_offset = 0;
                let mut part_offset = 0;
                for p in parts {
                    let pb = p.layout(u).block_of(b.coset).expect("same cosets");
                    for j in 0..pb.dim {
                        w[(part_offset + pb.offset + j, b.offset + inner_offset + j)] = C64::new(1.0, 0.0);
                    }
                    inner_offset += pb.dim;
                    part_offset += p.layout(u).dim;
                }
            }
            w
        })
        .collect();
    BundleMap { blocks }
}

/// Comparison of `conj(ind σ)` with `ind σ̄` in representative coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugationReport {
    pub report: ValidationReport,
    pub max_deviation: f64,
}

pub fn conjugate_commutes(sigma: &Representation, mu: &EquivariantSystem, h_haar: &HaarSystem) -> Result<ConjugationReport, InductionError> {
    let lhs = conjugate_rep(induce(sigma, mu, h_haar)?.base());
    let rhs = induce(&conjugate_rep(sigma), mu, h_haar)?.base().clone();
    let max_deviation = rep_equal_report(&lhs, &rhs)?;
    let mut report = ValidationReport::new("conjugation commutes with induction");
    report.measure(max_deviation, operator_tol(), "conj(ind σ) = ind σ̄ entrywise", || "all elements".into());
    Ok(ConjugationReport { report, max_deviation })
}

/// `γ` on `G/K` from `μ_G` on `G/H` and `μ_H` on `H/K`:
/// `γ(x_C h_D K) = μ_G(C)·μ_H(D)`.
pub fn compose_measures(mu_g: &EquivariantSystem, mu_h: &EquivariantSystem, k: &WideSubgroupoid) -> Result<EquivariantSystem, InductionError> {
    let cs_gk = Arc::new(CosetSpace::new(k));
    check_chain(mu_g, mu_h, k)?;
    let weight = (0..cs_gk.len())
        .map(|e| composed_weight_at(mu_g, mu_h, cs_gk.representative(e)))
        .collect();
    Ok(EquivariantSystem::from_coset_weights(cs_gk, weight)?)
}

fn check_chain(mu_g: &EquivariantSystem, mu_h: &EquivariantSystem, k: &WideSubgroupoid) -> Result<(), InductionError> {
    let h = mu_g.cosets().sub();
    if k.parent().as_ref() != h.parent().as_ref() {
        return Err(GroupoidError::NotNested("K", "G").into());
    }
    let k_in_h = h.restrict_sub(k)?;
    let hk = mu_h.cosets().sub();
    if hk.parent().as_ref() != h.groupoid().as_ref() || hk.members() != k_in_h.members() {
        return Err(GroupoidError::NotNested("the system on H/K", "H").into());
    }
    Ok(())
}

/// The double-sum weight of the `K`-coset of `y`, computed from `y` itself.
pub fn composed_weight_at(mu_g: &EquivariantSystem, mu_h: &EquivariantSystem, y: usize) -> f64 {
    let cs_gh = mu_g.cosets();
    let h = cs_gh.sub();
    let c = cs_gh.coset_of(y);
    let inner_h = h.to_local(cs_gh.offset_in_sub(y)).unwrap();
    let d = mu_h.cosets().coset_of(inner_h);
    mu_g.weight(c) * mu_h.weight(d)
}

/// `(Φξ)(x) = (h ↦ ξ(xh))` as a vector in the fiber of `ρ = ind_K^H σ` over
/// `d(x)`; `inner` is `ρ` and `h` the middle subgroupoid in `G`.
pub fn stages_phi(inner_rep: &InducedRep, h: &WideSubgroupoid, xi: &EquivariantFunction) -> EquivariantFunction {
    let g = h.parent();
    let values = g
        .elements()
        .map(|x| {
            let w = g.domain(x);
            let mut local = inner_rep.zero_function();
            for hp in h.range_fiber(w) {
                local.values[h.to_local(hp).unwrap()] = xi.values[g.mul(x, hp)].clone();
            }
            inner_rep.vector_of(&local, h.to_local(w).unwrap())
        })
        .collect();
    EquivariantFunction { values }
}

/// Outcome of an induction-in-stages check.
#[derive(Clone, Debug, Serialize)]
pub struct StagesReport {
    pub report: ValidationReport,
    pub dims_direct: Vec<usize>,
    pub dims_staged: Vec<usize>,
    pub unitarity_defect: f64,
    pub intertwining_residual: f64,
    pub phi_equivariance_defect: f64,
    pub image_rank: Vec<usize>,
    #[serde(skip)]
    pub direct: Option<InducedRep>,
    #[serde(skip)]
    pub staged: Option<InducedRep>,
    #[serde(skip)]
    pub phi: Option<BundleMap>,
}

/// Induction in stages for `K ⊆ H ⊆ G`: builds `ind_K^G(σ, γ)` and
/// `ind_H^G(ind_K^H(σ, μ_H), μ_G)`, assembles `Φ` fiberwise from its action on
/// functions, and checks that it is a unitary intertwiner.
pub fn verify_stages(
    h: &WideSubgroupoid,
    k: &WideSubgroupoid,
    sigma: &Representation,
    mu_g_orbits: Option<&[f64]>,
    mu_h_orbits: Option<&[f64]>,
) -> Result<StagesReport, InductionError> {
    let tol = operator_tol();
    let k_in_h = h.restrict_sub(k)?;
    let mu_g = solve_equivariant(Arc::new(CosetSpace::new(h)), mu_g_orbits)?;
    let mu_h = solve_equivariant(Arc::new(CosetSpace::new(&k_in_h)), mu_h_orbits)?;
    let gamma = compose_measures(&mu_g, &mu_h, k)?;
    let haar_k = counting_haar(k.groupoid().clone(), false)?;
    let haar_h = counting_haar(h.groupoid().clone(), false)?;

    let rho = induce(sigma, &mu_h, &haar_k)?;
    let direct = induce(sigma, &gamma, &haar_k)?;
    let staged = induce(rho.base(), &mu_g, &haar_h)?;

    let g = h.parent();
    let mut report = ValidationReport::new("induction in stages");
    let mut blocks = Vec::with_capacity(g.unit_count());
    let mut image_rank = Vec::new();
    let mut phi_defect: f64 = 0.0;
    for &u in g.units() {
        let n = direct.layout(u).dim;
        let mut columns = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = CVector::zeros(n);
            e[i] = C64::new(1.0, 0.0);
            let xi = direct.function_from_vector(u, &e)?;
            let phi = stages_phi(&rho, h, &xi);
            phi_defect = phi_defect.max(staged.equivariance_defect(&phi));
            columns.push(staged.vector_of(&phi, u));
        }
        let block = if columns.is_empty() {
            CMatrix::zeros(staged.layout(u).dim, 0)
        } else {
            CMatrix::from_columns(&columns)
        };
        image_rank.push(rank(&block, NULLSPACE_REL_TOL));
        report.check(image_rank.last() == Some(&staged.layout(u).dim), "Φ onto", || format!("unit {u}"));
        blocks.push(block);
    }
    let phi = BundleMap { blocks };
    let unitarity_defect = phi.unitarity_defect();
    let intertwining_residual = phi.intertwining_residual(direct.base(), staged.base());
    report.measure(phi_defect, tol, "Φξ is H-equivariant", || "basis vectors".into());
    report.measure(unitarity_defect, tol, "Φ unitary", || "fiberwise".into());
    report.measure(intertwining_residual, tol, "Φ intertwines", || "all elements".into());
    let dims_direct: Vec<usize> = direct.layouts().iter().map(|l| l.dim).collect();
    let dims_staged: Vec<usize> = staged.layouts().iter().map(|l| l.dim).collect();
    report.check(dims_direct == dims_staged, "fiber dimensions agree", || format!("{dims_direct:?} vs {dims_staged:?}"));
    Ok(StagesReport {
        report,
        dims_direct,
        dims_staged,
        unitarity_defect,
        intertwining_residual,
        phi_equivariance_defect: phi_defect,
        image_rank,
        direct: Some(direct),
        staged: Some(staged),
        phi: Some(phi),
    })
}

/// One side of a tensor product: `H ⊆ G`, `σ` on `H`, orbit weights of `μ`.
#[derive(Clone, Debug)]
pub struct Factor {
    pub sub: WideSubgroupoid,
    pub sigma: Representation,
    pub mu_orbits: Option<Vec<f64>>,
}

/// Both sides of the tensor-product identity, fully built.
#[derive(Clone, Debug)]
pub struct MackeyData {
    pub left: InducedRep,
    pub right: InducedRep,
    /// `ind σ₁ × ind σ₂`.
    pub outer: Representation,
    /// `ind(σ₁ × σ₂)` with `μ₁ × μ₂`.
    pub product: InducedRep,
    /// `(C₁, C₂) ↦ C₁ × C₂` as coset indices.
    pub coset_pairs: Vec<Vec<usize>>,
}

impl MackeyData {
    pub fn build(left: &Factor, right: &Factor) -> Result<Self, InductionError> {
        let g1 = left.sub.parent();
        let g2 = right.sub.parent();
        let g = Arc::new(product_groupoid(g1, g2));
        let h = WideSubgroupoid::product(&left.sub, &right.sub, g.clone())?;
        let sigma = outer_tensor_on(&left.sigma, &right.sigma, h.groupoid().clone()).map_err(|_| InductionError::FactorMismatch)?;

        let cs1 = Arc::new(CosetSpace::new(&left.sub));
        let cs2 = Arc::new(CosetSpace::new(&right.sub));
        let mu1 = solve_equivariant(cs1.clone(), left.mu_orbits.as_deref())?;
        let mu2 = solve_equivariant(cs2.clone(), right.mu_orbits.as_deref())?;
        let haar1 = counting_haar(left.sub.groupoid().clone(), false)?;
        let haar2 = counting_haar(right.sub.groupoid().clone(), false)?;
        let ind1 = induce(&left.sigma, &mu1, &haar1)?;
        let ind2 = induce(&right.sigma, &mu2, &haar2)?;
        let outer = outer_tensor_on(ind1.base(), ind2.base(), g.clone())?;

        let cs = Arc::new(CosetSpace::new(&h));
        let n2 = g2.len();
        let coset_pairs: Vec<Vec<usize>> = (0..cs1.len())
            .map(|c1| (0..cs2.len()).map(|c2| cs.coset_of(cs1.representative(c1) * n2 + cs2.representative(c2))).collect())
            .collect();
        let mut weight = vec![0.0; cs.len()];
        for (c1, row) in coset_pairs.iter().enumerate() {
            for (c2, &c) in row.iter().enumerate() {
                weight[c] = mu1.weight(c1) * mu2.weight(c2);
            }
        }
        let mu = EquivariantSystem::from_coset_weights(cs, weight)?;
        let hc: Vec<f64> = haar1
            .unit_weights()
            .iter()
            .flat_map(|&a| haar2.unit_weights().iter().map(move |&b| a * b))
            .collect();
        let haar = HaarSystem::from_unit_weights(h.groupoid().clone(), hc)?;
        let product = induce(&sigma, &mu, &haar)?;
        Ok(Self { left: ind1, right: ind2, outer, product, coset_pairs })
    }

    /// `Φ(f₁ ⊗ f₂)(x₁, x₂) = f₁(x₁) ⊗ f₂(x₂)`.
    pub fn tensor_phi(&self, f1: &EquivariantFunction, f2: &EquivariantFunction) -> EquivariantFunction {
        let values = f1
            .values
            .iter()
            .flat_map(|a| f2.values.iter().map(move |b| a.kronecker(b)))
            .collect();
        EquivariantFunction { values }
    }

    /// `Φ` in coordinates, by unit position of `G₁ × G₂`.
    pub fn phi(&self) -> Result<BundleMap, InductionError> {
        let g1 = self.left.groupoid();
        let g2 = self.right.groupoid();
        let g = self.product.groupoid();
        let mut blocks = Vec::with_capacity(g.unit_count());
        for &u in g1.units() {
            for &v in g2.units() {
                let (d1, d2) = (self.left.layout(u).dim, self.right.layout(v).dim);
                let unit = u * g2.len() + v;
                let mut columns = Vec::with_capacity(d1 * d2);
                for a in 0..d1 {
                    let f1 = self.left.function_from_vector(u, &unit_vector(d1, a))?;
                    for b in 0..d2 {
                        let f2 = self.right.function_from_vector(v, &unit_vector(d2, b))?;
                        columns.push(self.product.vector_of(&self.tensor_phi(&f1, &f2), unit));
                    }
                }
                blocks.push(CMatrix::from_columns(&columns));
            }
        }
        Ok(BundleMap { blocks })
    }
}

fn unit_vector(n: usize, i: usize) -> CVector {
    let mut e = CVector::zeros(n);
    e[i] = C64::new(1.0, 0.0);
    e
}

/// Outcome of a tensor-product check.
#[derive(Clone, Debug, Serialize)]
pub struct MackeyReport {
    pub report: ValidationReport,
    pub dims_outer: Vec<usize>,
    pub dims_product: Vec<usize>,
    pub unitarity_defect: f64,
    pub intertwining_residual: f64,
    pub factorization_residual: f64,
    pub inner_product_residual: f64,
    pub trials: usize,
}

/// Checks `ind σ₁ × ind σ₂ ≅ ind(σ₁ × σ₂)`, plus the generator factorization
/// and inner-product identities on `trials` random inputs.
pub fn verify_mackey<R: Rng>(left: &Factor, right: &Factor, trials: usize, rng: &mut R) -> Result<MackeyReport, InductionError> {
    let tol = operator_tol();
    let data = MackeyData::build(left, right)?;
    let mut report = ValidationReport::new("tensor product of induced representations");

    let cs = data.product.cosets();
    let (cs1, cs2) = (data.left.cosets(), data.right.cosets());
    let n2 = data.right.groupoid().len();
    for (c1, row) in data.coset_pairs.iter().enumerate() {
        for (c2, &c) in row.iter().enumerate() {
            let mut expected: Vec<usize> = cs1
                .members(c1)
                .iter()
                .flat_map(|&a| cs2.members(c2).iter().map(move |&b| a * n2 + b))
                .collect();
            expected.sort_unstable();
            report.check(cs.members(c) == expected.as_slice(), "coset layouts (C₁, C₂) ↔ C₁ × C₂", || format!("C₁ = {c1}, C₂ = {c2}"));
            report.check(
                cs.representative(c) == cs1.representative(c1) * n2 + cs2.representative(c2),
                "product representatives",
                || format!("C₁ = {c1}, C₂ = {c2}"),
            );
        }
    }

    let phi = data.phi()?;
    let unitarity_defect = phi.unitarity_defect();
    let intertwining_residual = phi.intertwining_residual(&data.outer, data.product.base());
    report.measure(unitarity_defect, tol, "Φ unitary", || "fiberwise".into());
    report.measure(intertwining_residual, tol, "Φ intertwines", || "all elements".into());
    let dims_outer = data.outer.dims().to_vec();
    let dims_product: Vec<usize> = data.product.layouts().iter().map(|l| l.dim).collect();
    report.check(dims_outer == dims_product, "fiber dimensions agree", || format!("{dims_outer:?} vs {dims_product:?}"));

    let (g1, g2) = (data.left.groupoid().clone(), data.right.groupoid().clone());
    let mut factorization_residual: f64 = 0.0;
    let mut inner_product_residual: f64 = 0.0;
    for trial in 0..trials {
        let f1: Vec<C64> = g1.elements().map(|_| random_scalar(rng)).collect();
        let f2: Vec<C64> = g2.elements().map(|_| random_scalar(rng)).collect();
        let t1: Vec<CVector> = data.left.sigma().dims().iter().map(|&d| random_vector(d, rng)).collect();
        let t2: Vec<CVector> = data.right.sigma().dims().iter().map(|&d| random_vector(d, rng)).collect();
        let f: Vec<C64> = f1.iter().flat_map(|&a| f2.iter().map(move |&b| a * b)).collect();
        let t: Vec<CVector> = t1.iter().flat_map(|a| t2.iter().map(move |b| a.kronecker(b))).collect();
        let lhs = data.product.generator(&f, &t)?;
        let rhs = data.tensor_phi(&data.left.generator(&f1, &t1)?, &data.right.generator(&f2, &t2)?);
        let residual = lhs.values.iter().zip(&rhs.values).map(|(a, b)| max_abs_vec(&(a - b))).fold(0.0, f64::max);
        factorization_residual = factorization_residual.max(residual);
        report.measure(residual, tol, "E(f, t₁⊗t₂) = E(f₁, t₁) ⊗ E(f₂, t₂)", || format!("trial {trial}"));

        for &u in g1.units() {
            for &v in g2.units() {
                let (d1, d2) = (data.left.layout(u).dim, data.right.layout(v).dim);
                let a = data.left.function_from_vector(u, &random_vector(d1, rng))?;
                let a2 = data.left.function_from_vector(u, &random_vector(d1, rng))?;
                let b = data.right.function_from_vector(v, &random_vector(d2, rng))?;
                let b2 = data.right.function_from_vector(v, &random_vector(d2, rng))?;
                let unit = u * g2.len() + v;
                let lhs = data.product.inner_product(&data.tensor_phi(&a, &b), &data.tensor_phi(&a2, &b2), unit);
                let rhs = data.left.inner_product(&a, &a2, u) * data.right.inner_product(&b, &b2, v);
                let residual = (lhs - rhs).norm();
                inner_product_residual = inner_product_residual.max(residual);
                report.measure(residual, tol, "⟨Φ(f⊗g), Φ(f′⊗g′)⟩ = ⟨f, f′⟩⟨g, g′⟩", || format!("trial {trial}, unit ({u}, {v})"));
            }
        }
    }
    Ok(MackeyReport {
        report,
        dims_outer,
        dims_product,
        unitarity_defect,
        intertwining_residual,
        factorization_residual,
        inner_product_residual,
        trials,
    })
}

/// Largest entrywise deviation between two equivariant functions.
pub fn function_distance(a: &EquivariantFunction, b: &EquivariantFunction) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| max_abs_vec(&(x - y))).fold(0.0, f64::max)
}

/// Largest deviation of the induced matrices from the action on functions:
/// `L(x)` applied to the function of `e_i` compared with column `i` of the matrix.
pub fn translation_residual(ind: &InducedRep) -> f64 {
    let g = ind.groupoid();
    let mut worst: f64 = 0.0;
    for x in g.elements() {
        let d = g.domain(x);
        let n = ind.layout(d).dim;
        for i in 0..n {
            let f = ind.function_from_vector(d, &unit_vector(n, i)).unwrap();
            let moved = ind.vector_of(&ind.translate(x, &f), g.range(x));
            worst = worst.max(max_abs_vec(&(moved - ind.base().matrix(x).column(i))));
        }
    }
    worst
}

/// `max |M|` of a bundle map minus the identity.
pub fn identity_defect(t: &BundleMap) -> f64 {
    t.blocks
        .iter()
        .map(|b| if b.is_square() { max_abs(&(b - CMatrix::identity(b.nrows(), b.ncols()))) } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::pair_groupoid;
    use crate::measure::solve_equivariant;
    use crate::rep::{direct_sum, trivial_character, validate_representation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s3_a3_omega(normalize: bool) -> InducedRep {
        let a3 = catalog::s3_a3();
        let omega = catalog::a3_character(&a3, 1);
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&a3)), None).unwrap();
        let haar = counting_haar(a3.groupoid().clone(), normalize).unwrap();
        induce(&omega, &mu, &haar).unwrap()
    }

    fn random_alpha(ind: &InducedRep, rng: &mut ChaCha8Rng) -> EquivariantFunction {
        EquivariantFunction {
            values: ind.groupoid().elements().map(|x| random_vector(ind.sigma_dim_at(x), rng)).collect(),
        }
    }

    #[test]
    fn induced_character_on_s3() {
        let ind = s3_a3_omega(false);
        assert_eq!(ind.base().dims(), &[2]);
        assert!(validate_representation(ind.base()).passed());
        let chi: Vec<C64> = ind.base().character().into_iter().map(|z| z.unwrap()).collect();
        let expected = [2.0, 0.0, 0.0, -1.0, -1.0, 0.0];
        for (z, e) in chi.iter().zip(expected) {
            assert!((z - C64::new(e, 0.0)).norm() < 1e-12, "{chi:?}");
        }
    }

    #[test]
    fn matrices_agree_with_translation() {
        let ind = s3_a3_omega(false);
        assert!(translation_residual(&ind) < 1e-12);
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        let units = WideSubgroupoid::units_only(p2);
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&units)), None).unwrap();
        let haar = counting_haar(units.groupoid().clone(), false).unwrap();
        let ind = induce(&trivial_character(units.groupoid().clone()), &mu, &haar).unwrap();
        assert_eq!(ind.base().dims(), &[2, 2]);
        assert!(translation_residual(&ind) < 1e-12);
        assert!(validate_representation(ind.base()).passed());
    }

    #[test]
    fn smoothing_produces_equivariant_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ind = s3_a3_omega(false);
        let zero = ind.smooth(&ind.zero_function()).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let f = ind.smooth(&random_alpha(&ind, &mut rng)).unwrap();
        assert!(ind.equivariance_defect(&f) < 1e-12);
        // with normalized λ_H smoothing fixes equivariant functions
        let norm = s3_a3_omega(true);
        let g = norm.smooth(&f).unwrap();
        assert!(function_distance(&f, &g) < 1e-12);
        // and with counting λ_H it multiplies them by |H^{d(x)}|
        let tripled = ind.smooth(&f).unwrap();
        for (a, b) in f.values.iter().zip(&tripled.values) {
            assert!(max_abs_vec(&(a * C64::new(3.0, 0.0) - b)) < 1e-12);
        }
    }

    #[test]
    fn generators() {
        let ind = s3_a3_omega(false);
        let t = vec![CVector::from_element(1, C64::new(0.5, -1.0))];
        let zero = ind.generator(&[C64::new(0.0, 0.0); 6], &t).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let indicator: Vec<C64> = (0..6).map(|x| C64::new(if catalog::A3.contains(&x) { 1.0 } else { 0.0 }, 0.0)).collect();
        let e = ind.generator(&indicator, &t).unwrap();
        assert!(ind.equivariance_defect(&e) < 1e-12);
        for x in [1, 2, 5] {
            assert_eq!(max_abs_vec(&e.values[x]), 0.0);
        }
        let v = ind.vector_of(&e, 0);
        let layout = ind.layout(0);
        let other = layout.blocks.iter().find(|b| b.coset != ind.cosets().coset_of(0)).unwrap();
        assert_eq!(max_abs_vec(&v.rows(other.offset, other.dim).into_owned()), 0.0);
        assert_eq!(ind.generator_span_rank(), vec![2]);
    }

    #[test]
    fn generator_norm_bound() {
        // |E(g, t)(x)| ≤ ‖g‖∞‖t‖∞·λ_H(H^{d(x)}), hence
        // ⟨E, E⟩(u) ≤ (‖g‖∞‖t‖∞·sup λ_H-mass)²·μ^u(G/H)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ind = s3_a3_omega(false);
        for _ in 0..20 {
            let f: Vec<C64> = (0..6).map(|_| random_scalar(&mut rng)).collect();
            let t = vec![random_vector(1, &mut rng)];
            let e = ind.generator(&f, &t).unwrap();
            let sup_f = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let sup_t = max_abs_vec(&t[0]);
            let mass = 3.0;
            let mu_mass: f64 = ind.mu().weights().iter().sum();
            let bound = (sup_f * sup_t * mass).powi(2) * mu_mass;
            assert!(ind.inner_product(&e, &e, 0).re <= bound + 1e-12);
        }
    }

    #[test]
    fn coordinates_round_trip_and_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a3 = catalog::s3_a3();
        let omega = catalog::a3_character(&a3, 1);
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&a3)), Some(&[2.5])).unwrap();
        let haar = counting_haar(a3.groupoid().clone(), false).unwrap();
        let ind = induce(&omega, &mu, &haar).unwrap();
        assert_eq!(max_abs_vec(&ind.vector_of(&ind.zero_function(), 0)), 0.0);
        for _ in 0..10 {
            let f = ind.smooth(&random_alpha(&ind, &mut rng)).unwrap();
            let g = ind.smooth(&random_alpha(&ind, &mut rng)).unwrap();
            let (vf, vg) = (ind.vector_of(&f, 0), ind.vector_of(&g, 0));
            assert!((inner(&vf, &vg) - ind.inner_product(&f, &g, 0)).norm() < 1e-9);
            let back = ind.function_from_vector(0, &vf).unwrap();
            assert!(function_distance(&back, &f) < 1e-12);
        }
    }

    #[test]
    fn induction_from_the_whole_groupoid() {
        let g = Arc::new(catalog::s3());
        let full = WideSubgroupoid::full(g.clone());
        let std = catalog::s3_standard(full.groupoid().clone());
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&full)), None).unwrap();
        let haar = counting_haar(full.groupoid().clone(), false).unwrap();
        let ind = induce(&std, &mu, &haar).unwrap();
        // one coset with representative the unit: the matrices are σ(x⁻¹)* = σ(x)
        assert!(rep_equal_report(ind.base(), &catalog::s3_standard(g)).unwrap() < 1e-12);
    }

    #[test]
    fn composed_measures() {
        let g = Arc::new(catalog::s3());
        let a3 = WideSubgroupoid::new(g.clone(), catalog::A3).unwrap();
        let e = WideSubgroupoid::units_only(g.clone());
        let mu_g = solve_equivariant(Arc::new(CosetSpace::new(&a3)), None).unwrap();
        let e_in_a3 = a3.restrict_sub(&e).unwrap();
        let mu_h = solve_equivariant(Arc::new(CosetSpace::new(&e_in_a3)), None).unwrap();
        let gamma = compose_measures(&mu_g, &mu_h, &e).unwrap();
        assert_eq!(gamma.weights(), &[1.0; 6]);
        // K = H collapses the inner sum
        let a3_in_a3 = a3.restrict_sub(&a3).unwrap();
        let mu_h = solve_equivariant(Arc::new(CosetSpace::new(&a3_in_a3)), None).unwrap();
        let mu_g = solve_equivariant(Arc::new(CosetSpace::new(&a3)), Some(&[3.0])).unwrap();
        let gamma = compose_measures(&mu_g, &mu_h, &a3).unwrap();
        assert_eq!(gamma.weights(), mu_g.weights());
        // every member of a K-coset gives the same weight
        let cs = gamma.cosets();
        for c in 0..cs.len() {
            for &y in cs.members(c) {
                assert_eq!(composed_weight_at(&mu_g, &mu_h, y), gamma.weight(c));
            }
        }
        // K ⊄ H
        let other = WideSubgroupoid::new(g, [0, 1]).unwrap();
        assert!(compose_measures(&mu_g, &mu_h, &other).is_err());
    }

    #[test]
    fn stages_on_s3() {
        let g = Arc::new(catalog::s3());
        let a3 = WideSubgroupoid::new(g.clone(), catalog::A3).unwrap();
        let e = WideSubgroupoid::units_only(g);
        let out = verify_stages(&a3, &e, &trivial_character(e.groupoid().clone()), None, None).unwrap();
        assert!(out.report.passed(), "{}", out.report);
        assert_eq!(out.dims_direct, vec![6]);
    }

    #[test]
    fn stages_with_trivial_chain() {
        let g = Arc::new(catalog::s3());
        let full = WideSubgroupoid::full(g.clone());
        let std = catalog::s3_standard(full.groupoid().clone());
        let out = verify_stages(&full, &full, &std, Some(&[2.0]), None).unwrap();
        assert!(out.report.passed(), "{}", out.report);
        assert_eq!(out.dims_staged, vec![2]);
    }

    #[test]
    fn mackey_on_small_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c2 = Arc::new(catalog::c2());
        let full = WideSubgroupoid::full(c2.clone());
        let left = Factor { sub: full.clone(), sigma: catalog::cyclic_character(full.groupoid().clone(), 1), mu_orbits: None };
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        let units = WideSubgroupoid::units_only(p2);
        let right = Factor { sub: units.clone(), sigma: trivial_character(units.groupoid().clone()), mu_orbits: Some(vec![0.5, 2.0]) };
        let out = verify_mackey(&left, &right, 5, &mut rng).unwrap();
        assert!(out.report.passed(), "{}", out.report);
        assert_eq!(out.dims_product, vec![2, 2]);
    }

    #[test]
    fn conjugation_and_sums() {
        let a3 = catalog::s3_a3();
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&a3)), None).unwrap();
        let haar = counting_haar(a3.groupoid().clone(), false).unwrap();
        let omega = catalog::a3_character(&a3, 1);
        let out = conjugate_commutes(&omega, &mu, &haar).unwrap();
        assert!(out.report.passed());

        let one = catalog::a3_character(&a3, 0);
        let sum = induce(&direct_sum(&[&omega, &one]).unwrap(), &mu, &haar).unwrap();
        let parts = [induce(&omega, &mu, &haar).unwrap(), induce(&one, &mu, &haar).unwrap()];
        let target = direct_sum(&[parts[0].base(), parts[1].base()]).unwrap();
        let w = direct_sum_unitary(&sum, &[&parts[0], &parts[1]]);
        assert!(w.unitarity_defect() < 1e-12);
        assert!(w.intertwining_residual(sum.base(), &target) < 1e-12);
    }

    #[test]
    fn representation_error_paths() {
        let a3 = catalog::s3_a3();
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&a3)), None).unwrap();
        let haar = counting_haar(a3.groupoid().clone(), false).unwrap();
        let wrong = catalog::s3_standard(Arc::new(catalog::s3()));
        assert_eq!(induce(&wrong, &mu, &haar).unwrap_err(), InductionError::SigmaNotOnSub);
        let omega = catalog::a3_character(&a3, 1);
        let wrong_haar = counting_haar(Arc::new(catalog::s3()), false).unwrap();
        assert_eq!(induce(&omega, &mu, &wrong_haar).unwrap_err(), InductionError::HaarNotOnSub);
    }
}
