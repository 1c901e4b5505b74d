//! Haar systems on finite groupoids and equivariant measure systems on `G/H`.
//!
//! On a finite groupoid left invariance `λ(xy) = λ(y)` forces the weight of
//! an arrow to depend on its domain only, so a Haar system is stored as a
//! positive function `c` on units with `λ(x) = c(d(x))`. Likewise an
//! equivariant system on `G/H` is exactly an orbit-constant positive weight.

use std::sync::Arc;

use thiserror::Error;

use crate::groupoid::{CosetSpace, FiniteGroupoid};
use crate::report::ValidationReport;
use crate::tolerance::MEASURE_TOL;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("normalization infeasible: fiber mass residual {residual:e} at unit {unit}")]
    NormalizationInfeasible { unit: usize, residual: f64 },
    #[error("expected {expected} weights, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("weight {value} at index {index} is not a positive finite number")]
    NonPositive { index: usize, value: f64 },
    #[error("weights violate the invariance axioms: {}", .0.failed_axioms().join(", "))]
    Invalid(Box<ValidationReport>),
    #[error("the coset subset J is empty")]
    EmptySubset,
    #[error("coset {0} is out of range")]
    CosetOutOfRange(usize),
    #[error("the Haar system lives on a different groupoid")]
    WrongGroupoid,
    #[error("the coset spaces differ")]
    WrongCosetSpace,
}

fn check_positive(weights: &[f64]) -> Result<(), MeasureError> {
    match weights.iter().enumerate().find(|(_, &w)| !(w.is_finite() && w > 0.0)) {
        Some((index, &value)) => Err(MeasureError::NonPositive { index, value }),
        None => Ok(()),
    }
}

/// A left Haar system, `λ^u({x}) = c(d(x))` for `x ∈ G^u`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarSystem {
    groupoid: Arc<FiniteGroupoid>,
    /// Indexed by unit position.
    c: Vec<f64>,
    normalized: bool,
}

impl HaarSystem {
    /// From a positive function on units (indexed by unit position).
    pub fn from_unit_weights(groupoid: Arc<FiniteGroupoid>, c: Vec<f64>) -> Result<Self, MeasureError> {
        if c.len() != groupoid.unit_count() {
            return Err(MeasureError::LengthMismatch { expected: groupoid.unit_count(), found: c.len() });
        }
        check_positive(&c)?;
        let mut h = Self { groupoid, c, normalized: false };
        h.normalized = h.fiber_mass_residual() <= MEASURE_TOL;
        Ok(h)
    }

    /// From arbitrary per-arrow weights, which must pass [`validate_haar_weights`].
    pub fn from_element_weights(groupoid: Arc<FiniteGroupoid>, weights: &[f64]) -> Result<Self, MeasureError> {
        let report = validate_haar_weights(&groupoid, weights);
        if !report.passed() {
            return Err(MeasureError::Invalid(Box::new(report)));
        }
        let c = groupoid.units().iter().map(|&u| weights[u]).collect();
        Self::from_unit_weights(groupoid, c)
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    /// `c(u)` for a unit id.
    pub fn unit_weight(&self, u: usize) -> f64 {
        self.c[self.groupoid.upos(u)]
    }

    /// Unit weights by unit position.
    pub fn unit_weights(&self) -> &[f64] {
        &self.c
    }

    /// `λ^{r(x)}({x})`.
    pub fn weight(&self, x: usize) -> f64 {
        self.unit_weight(self.groupoid.domain(x))
    }

    pub fn weights(&self) -> Vec<f64> {
        self.groupoid.elements().map(|x| self.weight(x)).collect()
    }

    /// `λ^u(G^u)`.
    pub fn fiber_mass(&self, u: usize) -> f64 {
        self.groupoid.range_fiber(u).iter().map(|&x| self.weight(x)).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    fn fiber_mass_residual(&self) -> f64 {
        self.groupoid
            .units()
            .iter()
            .map(|&u| (self.fiber_mass(u) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Multiplies every weight by `t > 0`.
    pub fn scaled(&self, t: f64) -> Result<Self, MeasureError> {
        Self::from_unit_weights(self.groupoid.clone(), self.c.iter().map(|w| w * t).collect())
    }
}

/// Counting Haar system, or its normalization with unit fiber mass.
///
/// Normalization takes `c(v) = 1/|G^v|`: inside a transitivity class every
/// `G^u_v` has the isotropy order, so each fiber then has mass one.
pub fn counting_haar(groupoid: Arc<FiniteGroupoid>, normalize: bool) -> Result<HaarSystem, MeasureError> {
    let c: Vec<f64> = if normalize {
        groupoid.units().iter().map(|&v| 1.0 / groupoid.range_fiber(v).len() as f64).collect()
    } else {
        vec![1.0; groupoid.unit_count()]
    };
    let h = HaarSystem::from_unit_weights(groupoid, c)?;
    if normalize {
        for &u in h.groupoid.units() {
            let residual = (h.fiber_mass(u) - 1.0).abs();
            if residual > MEASURE_TOL {
                return Err(MeasureError::NormalizationInfeasible { unit: u, residual });
            }
        }
    }
    Ok(h)
}

/// Positivity and left invariance `λ(xy) = λ(y)` of raw per-arrow weights.
pub fn validate_haar_weights(g: &FiniteGroupoid, weights: &[f64]) -> ValidationReport {
    let mut rep = ValidationReport::new("Haar system");
    rep.check(weights.len() == g.len(), "one weight per element", || {
        format!("{} weights for {} elements", weights.len(), g.len())
    });
    if weights.len() != g.len() {
        return rep;
    }
    for x in g.elements() {
        let w = weights[x];
        rep.check(w.is_finite() && w > 0.0, "positivity", || format!("element {x} has weight {w}"));
    }
    for (x, y) in g.composable_pairs() {
        let xy = g.mul(x, y);
        rep.measure((weights[xy] - weights[y]).abs(), MEASURE_TOL, "left invariance λ(xy) = λ(y)", || {
            format!("x = {x}, y = {y}: λ(xy) = {}, λ(y) = {}", weights[xy], weights[y])
        });
    }
    rep
}

pub fn validate_haar(h: &HaarSystem) -> ValidationReport {
    let mut rep = validate_haar_weights(&h.groupoid, &h.weights());
    if h.normalized {
        for &u in h.groupoid.units() {
            let residual = (h.fiber_mass(u) - 1.0).abs();
            rep.measure(residual, MEASURE_TOL, "normalized fiber mass", || format!("unit {u}"));
        }
    }
    rep
}

/// An equivariant measure system on `G/H`: one positive weight per coset,
/// constant along `G`-orbits.
#[derive(Clone, Debug)]
pub struct EquivariantSystem {
    cosets: Arc<CosetSpace>,
    weight: Vec<f64>,
}

impl EquivariantSystem {
    /// From per-coset weights, which must pass [`validate_equivariant_weights`].
    pub fn from_coset_weights(cosets: Arc<CosetSpace>, weight: Vec<f64>) -> Result<Self, MeasureError> {
        if weight.len() != cosets.len() {
            return Err(MeasureError::LengthMismatch { expected: cosets.len(), found: weight.len() });
        }
        check_positive(&weight)?;
        let report = validate_equivariant_weights(&cosets, &weight);
        if !report.passed() {
            return Err(MeasureError::Invalid(Box::new(report)));
        }
        Ok(Self { cosets, weight })
    }

    pub fn cosets(&self) -> &Arc<CosetSpace> {
        &self.cosets
    }

    /// `μ^{moment(C)}({C})`.
    pub fn weight(&self, c: usize) -> f64 {
        self.weight[c]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// The same weights over the same cosets with other representatives.
    pub fn rebased(&self, cosets: Arc<CosetSpace>) -> Result<Self, MeasureError> {
        let same = cosets.len() == self.cosets.len()
            && cosets.sub().members() == self.cosets.sub().members()
            && cosets.groupoid() == self.cosets.groupoid()
            && (0..cosets.len()).all(|c| cosets.members(c) == self.cosets.members(c));
        if !same {
            return Err(MeasureError::WrongCosetSpace);
        }
        Ok(Self { cosets, weight: self.weight.clone() })
    }

    /// Multiplies the weights on one orbit by `t > 0`.
    pub fn scale_orbit(&self, orbit: usize, t: f64) -> Result<Self, MeasureError> {
        let orbits = self.cosets.orbits();
        let mut weight = self.weight.clone();
        for &c in &orbits.orbits[orbit] {
            weight[c] *= t;
        }
        Self::from_coset_weights(self.cosets.clone(), weight)
    }

    /// Weight per orbit, orbits ordered as in [`CosetSpace::orbits`].
    pub fn orbit_weights(&self) -> Vec<f64> {
        self.cosets.orbits().orbits.iter().map(|o| self.weight[o[0]]).collect()
    }
}

/// Orbit-constant system with the given orbit weights (default all ones).
pub fn solve_equivariant(cosets: Arc<CosetSpace>, orbit_weights: Option<&[f64]>) -> Result<EquivariantSystem, MeasureError> {
    let orbits = cosets.orbits();
    let per_orbit: Vec<f64> = match orbit_weights {
        Some(w) => {
            if w.len() != orbits.len() {
                return Err(MeasureError::LengthMismatch { expected: orbits.len(), found: w.len() });
            }
            check_positive(w)?;
            w.to_vec()
        }
        None => vec![1.0; orbits.len()],
    };
    let weight = orbits.orbit_of.iter().map(|&o| per_orbit[o]).collect();
    EquivariantSystem::from_coset_weights(cosets, weight)
}

/// Positivity and equivariance `μ(g·C) = μ(C)` of raw per-coset weights.
pub fn validate_equivariant_weights(cs: &CosetSpace, weight: &[f64]) -> ValidationReport {
    let mut rep = ValidationReport::new("equivariant system");
    rep.check(weight.len() == cs.len(), "one weight per coset", || {
        format!("{} weights for {} cosets", weight.len(), cs.len())
    });
    if weight.len() != cs.len() {
        return rep;
    }
    for (c, &w) in weight.iter().enumerate() {
        rep.check(w.is_finite() && w > 0.0, "positivity", || format!("coset {c} has weight {w}"));
    }
    let g = cs.groupoid();
    for x in g.elements() {
        for &c in cs.over(g.domain(x)) {
            let d = cs.act(x, c).expect("moment matches domain");
            rep.measure((weight[d] - weight[c]).abs(), MEASURE_TOL, "equivariance μ(g·C) = μ(C)", || {
                format!("g = {x}, C = {c}: μ(C) = {}, μ(g·C) = {}", weight[c], weight[d])
            });
        }
    }
    rep
}

pub fn validate_equivariant(mu: &EquivariantSystem) -> ValidationReport {
    validate_equivariant_weights(&mu.cosets, &mu.weight)
}

fn check_sub_haar(cs: &CosetSpace, h_haar: &HaarSystem) -> Result<(), MeasureError> {
    if h_haar.groupoid().as_ref() != cs.sub().groupoid().as_ref() {
        return Err(MeasureError::WrongGroupoid);
    }
    Ok(())
}

/// `Pf(C) = Σ_{ξ ∈ H^{d(x)}} f(xξ) λ_H(ξ)` evaluated at an arbitrary `x ∈ C`.
pub fn p_map_at(cs: &CosetSpace, h_haar: &HaarSystem, f: &[C64], x: usize) -> C64 {
    let g = cs.groupoid();
    let sub = cs.sub();
    sub.range_fiber(g.domain(x))
        .map(|xi| f[g.mul(x, xi)] * h_haar.weight(sub.to_local(xi).unwrap()))
        .sum()
}

/// The averaging map `P: C(G) → C(G/H)`, evaluated at the representatives.
pub fn p_map(cs: &CosetSpace, h_haar: &HaarSystem, f: &[C64]) -> Result<Vec<C64>, MeasureError> {
    check_sub_haar(cs, h_haar)?;
    if f.len() != cs.groupoid().len() {
        return Err(MeasureError::LengthMismatch { expected: cs.groupoid().len(), found: f.len() });
    }
    Ok((0..cs.len()).map(|c| p_map_at(cs, h_haar, f, cs.representative(c))).collect())
}

/// Largest change of `Pf` over all choices of representative.
pub fn p_map_representative_spread(cs: &CosetSpace, h_haar: &HaarSystem, f: &[C64]) -> f64 {
    let mut spread: f64 = 0.0;
    for c in 0..cs.len() {
        let base = p_map_at(cs, h_haar, f, cs.representative(c));
        for &x in cs.members(c) {
            spread = spread.max((p_map_at(cs, h_haar, f, x) - base).norm());
        }
    }
    spread
}

/// A nonnegative `f` on `G` with `Pf = 1` on the cosets `J` and `0` elsewhere.
pub fn section_of_unity(cs: &CosetSpace, j: &[usize], h_haar: &HaarSystem) -> Result<Vec<f64>, MeasureError> {
    check_sub_haar(cs, h_haar)?;
    if j.is_empty() {
        return Err(MeasureError::EmptySubset);
    }
    if let Some(&c) = j.iter().find(|&&c| c >= cs.len()) {
        return Err(MeasureError::CosetOutOfRange(c));
    }
    let g = cs.groupoid();
    let mut in_j = vec![false; cs.len()];
    for &c in j {
        in_j[c] = true;
    }
    // P1 on the coset of x is the λ_H-mass of H^{d(x)}
    let sub = cs.sub();
    let mass = |u: usize| -> f64 { sub.range_fiber(u).map(|xi| h_haar.weight(sub.to_local(xi).unwrap())).sum() };
    Ok(g.elements()
        .map(|x| if in_j[cs.coset_of(x)] { 1.0 / mass(g.domain(x)) } else { 0.0 })
        .collect())
}

/// The Haar system `∫ g dλ^u = ∫ Pg dμ^u` on `G`.
pub fn induced_haar(mu: &EquivariantSystem, h_haar: &HaarSystem) -> Result<HaarSystem, MeasureError> {
    let cs = mu.cosets();
    check_sub_haar(cs, h_haar)?;
    let g = cs.groupoid();
    let sub = cs.sub();
    let weights: Vec<f64> = g
        .elements()
        .map(|x| {
            let h = cs.offset_in_sub(x);
            mu.weight(cs.coset_of(x)) * h_haar.weight(sub.to_local(h).unwrap())
        })
        .collect();
    HaarSystem::from_element_weights(g.clone(), &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::{pair_groupoid, WideSubgroupoid};

    fn s3_a3() -> (Arc<CosetSpace>, HaarSystem) {
        let g = Arc::new(catalog::s3());
        let a3 = WideSubgroupoid::new(g, catalog::A3).unwrap();
        let haar = counting_haar(a3.groupoid().clone(), false).unwrap();
        (Arc::new(CosetSpace::new(&a3)), haar)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= MEASURE_TOL
    }

    #[test]
    fn counting_systems() {
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        let h = counting_haar(p2.clone(), false).unwrap();
        assert!(h.weights().iter().all(|&w| w == 1.0));
        assert_eq!(h.fiber_mass(p2.units()[0]), 2.0);
        let s3 = counting_haar(Arc::new(catalog::s3()), true).unwrap();
        assert!(close(s3.unit_weight(0), 1.0 / 6.0));
        let ps3 = Arc::new(catalog::p2xs3());
        let n = counting_haar(ps3.clone(), true).unwrap();
        for &u in ps3.units() {
            assert!(close(n.unit_weight(u), 1.0 / 12.0));
        }
        assert!(validate_haar(&n).passed());
        assert!(n.is_normalized());
    }

    #[test]
    fn non_invariant_weights_fail() {
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        // weight(x) = f(r(x)) with f non-constant
        let f = |u: usize| if u == 0 { 1.0 } else { 2.0 };
        let w: Vec<f64> = p2.elements().map(|x| f(p2.range(x))).collect();
        let report = validate_haar_weights(&p2, &w);
        assert!(!report.passed());
        assert!(HaarSystem::from_element_weights(p2.clone(), &w).is_err());
        // weight(x) = c(d(x)) for positive c passes
        let w: Vec<f64> = p2.elements().map(|x| f(p2.domain(x))).collect();
        assert!(validate_haar_weights(&p2, &w).passed());
        let h = HaarSystem::from_element_weights(p2, &w).unwrap();
        assert!(!h.is_normalized());
        assert!(validate_haar(&h).passed());
    }

    #[test]
    fn equivariant_systems() {
        let (cs, _) = s3_a3();
        let ones = solve_equivariant(cs.clone(), None).unwrap();
        assert_eq!(ones.weights(), &[1.0, 1.0]);
        let two = solve_equivariant(cs.clone(), Some(&[2.0])).unwrap();
        assert_eq!(two.weights(), &[2.0, 2.0]);
        assert!(validate_equivariant(&two).passed());
        assert!(solve_equivariant(cs.clone(), Some(&[0.0])).is_err());
        assert!(EquivariantSystem::from_coset_weights(cs, vec![1.0, 2.0]).is_err());

        let bundle = Arc::new(catalog::c2_bundle());
        let cs = Arc::new(CosetSpace::new(&WideSubgroupoid::units_only(bundle.clone())));
        let mu = solve_equivariant(cs.clone(), Some(&[1.0, 3.0])).unwrap();
        for c in 0..cs.len() {
            let component = bundle.upos(cs.moment(c));
            assert_eq!(mu.weight(c), [1.0, 3.0][component]);
        }
    }

    #[test]
    fn averaging_map() {
        let (cs, haar) = s3_a3();
        let ones = vec![C64::new(1.0, 0.0); 6];
        assert_eq!(p_map(&cs, &haar, &ones).unwrap(), vec![C64::new(3.0, 0.0); 2]);
        let indicator: Vec<C64> = (0..6).map(|x| C64::new(if catalog::A3.contains(&x) { 1.0 } else { 0.0 }, 0.0)).collect();
        assert_eq!(p_map(&cs, &haar, &indicator).unwrap(), vec![C64::new(3.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(p_map_representative_spread(&cs, &haar, &indicator) < MEASURE_TOL);
    }

    #[test]
    fn sections_of_unity() {
        let (cs, haar) = s3_a3();
        let f = section_of_unity(&cs, &[0, 1], &haar).unwrap();
        assert!(f.iter().all(|&v| close(v, 1.0 / 3.0)));
        let f = section_of_unity(&cs, &[0], &haar).unwrap();
        for x in 0..6 {
            let expected = if catalog::A3.contains(&x) { 1.0 / 3.0 } else { 0.0 };
            assert!(close(f[x], expected));
        }
        assert_eq!(section_of_unity(&cs, &[], &haar), Err(MeasureError::EmptySubset));
    }

    #[test]
    fn haar_from_measure_system() {
        let (cs, haar) = s3_a3();
        let mu = solve_equivariant(cs.clone(), None).unwrap();
        let lambda = induced_haar(&mu, &haar).unwrap();
        assert!(lambda.weights().iter().all(|&w| close(w, 1.0)));
        assert!(close(lambda.fiber_mass(0), 6.0));
        let scaled = induced_haar(&mu.scale_orbit(0, 2.5).unwrap(), &haar).unwrap();
        assert!(scaled.weights().iter().all(|&w| close(w, 2.5)));

        let p2 = Arc::new(pair_groupoid(2).unwrap());
        let units = WideSubgroupoid::units_only(p2.clone());
        let cs = Arc::new(CosetSpace::new(&units));
        let h = counting_haar(units.groupoid().clone(), false).unwrap();
        let lambda = induced_haar(&solve_equivariant(cs, None).unwrap(), &h).unwrap();
        assert_eq!(lambda, counting_haar(p2, false).unwrap());
    }
}
