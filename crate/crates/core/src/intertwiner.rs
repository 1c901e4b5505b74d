//! `Mor(π, π′)`, unitary equivalence, irreducibility on transitive groupoids,
//! and Frobenius reciprocity through evaluation at units.
//!
//! Intertwiners are computed as the nullspace of the stacked linear
//! constraints `T_{r(x)} π(x) − π′(x) T_{d(x)} = 0`, one block of rows per
//! arrow, with the blocks `T_u` vectorized column-major.
//!
//! On a transitive groupoid the self-intertwiners of `π` form a
//! finite-dimensional *-algebra; a proper invariant subbundle with nonzero
//! fibers gives a nontrivial projection in it and vice versa, so `π` is
//! irreducible exactly when that algebra is the scalars. Off transitive
//! groupoids an invariant subbundle may vanish on some orbits, and
//! irreducibility is not decided.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::induction::InducedRep;
use crate::linalg::{max_abs, nullspace, polar_unitary, random_scalar, CMatrix, CVector};
use crate::rep::{restrict, BundleMap, RepError, Representation};
use crate::report::ValidationReport;
use crate::tolerance::{operator_tol, NULLSPACE_REL_TOL};
use crate::C64;

/// Seed of the unitary-witness search.
pub const WITNESS_SEED: u64 = 0x1d0c_7e57;
/// Random combinations tried before giving up on a unitary witness.
pub const WITNESS_DRAWS: usize = 8;
/// `σ_min / σ_max` below which a combination counts as singular.
pub const INVERTIBILITY_RATIO: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntertwinerError {
    #[error("representations live on different groupoids")]
    GroupoidMismatch,
    #[error("the groupoid is not transitive")]
    NonTransitive,
    #[error("the subgroupoid H is not transitive")]
    SubNotTransitive,
    #[error("the Haar system of H is not normalized")]
    HaarNotNormalized,
    #[error("π is not irreducible")]
    PiReducible,
    #[error("σ is not irreducible")]
    SigmaReducible,
    #[error("not an intertwiner: residual {0:e}")]
    NotAnIntertwiner(f64),
    #[error("block shapes do not match the representations")]
    Shape,
    #[error(transparent)]
    Rep(#[from] RepError),
}

/// Orthonormal basis of `Mor(π, π′)` in stacked coordinates.
pub fn intertwiners(pi: &Representation, pi_prime: &Representation) -> Result<Vec<BundleMap>, IntertwinerError> {
    let g = pi.groupoid();
    if g.as_ref() != pi_prime.groupoid().as_ref() {
        return Err(IntertwinerError::GroupoidMismatch);
    }
    let units = g.unit_count();
    // column offset of vec(T_u); T_u is dim π′(u) × dim π(u)
    let mut offsets = Vec::with_capacity(units + 1);
    offsets.push(0);
    for p in 0..units {
        offsets.push(offsets[p] + pi_prime.dims()[p] * pi.dims()[p]);
    }
    let n = offsets[units];
    let rows: usize = g
        .elements()
        .map(|x| pi_prime.dim(g.range(x)) * pi.dim(g.domain(x)))
        .sum();
    let mut a = CMatrix::zeros(rows, n);
    let mut row = 0;
    for x in g.elements() {
        let (pr, pd) = (g.upos(g.range(x)), g.upos(g.domain(x)));
        let m_r = pi_prime.dims()[pr];
        let n_d = pi.dims()[pd];
        let block_rows = m_r * n_d;
        // vec(T_r π(x)) = (π(x)ᵀ ⊗ I) vec(T_r)
        let left = pi.matrix(x).transpose().kronecker(&CMatrix::identity(m_r, m_r));
        // vec(π′(x) T_d) = (I ⊗ π′(x)) vec(T_d)
        let right = CMatrix::identity(n_d, n_d).kronecker(pi_prime.matrix(x));
        let mut view = a.view_mut((row, offsets[pr]), (block_rows, left.ncols()));
        view += &left;
        let mut view = a.view_mut((row, offsets[pd]), (block_rows, right.ncols()));
        view -= &right;
        row += block_rows;
    }
    let basis = nullspace(&a, NULLSPACE_REL_TOL);
    Ok(basis
        .into_iter()
        .map(|v| BundleMap {
            blocks: (0..units)
                .map(|p| {
                    let (m, k) = (pi_prime.dims()[p], pi.dims()[p]);
                    CMatrix::from_column_slice(m, k, v.rows(offsets[p], m * k).as_slice())
                })
                .collect(),
        })
        .collect())
}

/// Result of the unitary-equivalence decision.
#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub intertwiner_dim: usize,
    pub draws: usize,
    /// Intertwining residual of the witness, when there is one.
    pub witness_residual: Option<f64>,
    pub witness_unitarity_defect: Option<f64>,
    #[serde(skip)]
    pub witness: Option<BundleMap>,
}

fn combination(basis: &[BundleMap], rng: &mut ChaCha8Rng) -> BundleMap {
    let mut t = basis[0].scale(random_scalar(rng));
    for b in &basis[1..] {
        t = t.add(&b.scale(random_scalar(rng)));
    }
    t
}

/// Decides `π ≅ π′`, returning the polar part of a random invertible
/// intertwiner as witness.
pub fn is_equivalent(pi: &Representation, pi_prime: &Representation) -> Result<Equivalence, IntertwinerError> {
    let basis = intertwiners(pi, pi_prime)?;
    let mut out = Equivalence {
        equivalent: false,
        intertwiner_dim: basis.len(),
        draws: 0,
        witness_residual: None,
        witness_unitarity_defect: None,
        witness: None,
    };
    if pi.dims() != pi_prime.dims() || basis.is_empty() {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
    for draw in 1..=WITNESS_DRAWS {
        out.draws = draw;
        let t = combination(&basis, &mut rng);
        let polar: Option<Vec<CMatrix>> = t.blocks.iter().map(|b| polar_unitary(b, INVERTIBILITY_RATIO)).collect();
        if let Some(blocks) = polar {
            let w = BundleMap { blocks };
            let residual = w.intertwining_residual(pi, pi_prime);
            let defect = w.unitarity_defect();
            out.witness_residual = Some(residual);
            out.witness_unitarity_defect = Some(defect);
            out.equivalent = residual <= operator_tol() && defect <= operator_tol();
            out.witness = Some(w);
            return Ok(out);
        }
    }
    Ok(out)
}

/// `dim Mor(π, π) = 1` on a transitive groupoid.
pub fn is_irreducible_transitive(pi: &Representation) -> Result<bool, IntertwinerError> {
    if !pi.groupoid().is_transitive() {
        return Err(IntertwinerError::NonTransitive);
    }
    Ok(intertwiners(pi, pi)?.len() == 1)
}

/// `E_u`: the value at the unit `u` of the function with coordinates `w`,
/// as a `dim σ(u) × dim F^u` matrix.
pub fn evaluation_at_unit(ind: &InducedRep, u: usize) -> CMatrix {
    let cs = ind.cosets();
    let layout = ind.layout(u);
    let c0 = cs.coset_of(u);
    let b = layout.block_of(c0).expect("uH lies over u");
    // u = x_{C₀}·h₀ with h₀ ∈ H, so f(u) = σ(h₀)*·f(x_{C₀})
    let h0 = cs.offset_in_sub(u);
    let scale = C64::new(1.0 / ind.mu().weight(c0).sqrt(), 0.0);
    let mut e = CMatrix::zeros(b.dim, layout.dim);
    e.view_mut((0, b.offset), (b.dim, b.dim)).copy_from(&(ind.sigma_of(h0).adjoint() * scale));
    e
}

fn check_intertwiner(t: &BundleMap, source: &Representation, target: &Representation) -> Result<(), IntertwinerError> {
    if !t.fits(source, target) {
        return Err(IntertwinerError::Shape);
    }
    let residual = t.intertwining_residual(source, target);
    if residual > operator_tol() {
        return Err(IntertwinerError::NotAnIntertwiner(residual));
    }
    Ok(())
}

/// `(ET)_u = E_u T_u` for `T ∈ Mor(π, ind σ)`, an element of `Mor(π|_H, σ)`.
pub fn evaluation_map(t: &BundleMap, pi: &Representation, ind: &InducedRep) -> Result<BundleMap, IntertwinerError> {
    check_intertwiner(t, pi, ind.base())?;
    let g = ind.groupoid();
    Ok(BundleMap {
        blocks: g.units().iter().map(|&u| evaluation_at_unit(ind, u) * t.block(g, u)).collect(),
    })
}

/// `[T_u v](x) = S_{d(x)} π(x⁻¹) v` for `S ∈ Mor(π|_H, σ)`; in coordinates the
/// block of `C` is `√μ(C)·S_{d(x_C)} π(x_C)*`.
pub fn coevaluation_map(s: &BundleMap, pi: &Representation, ind: &InducedRep) -> Result<BundleMap, IntertwinerError> {
    let restricted = restrict(pi, ind.sub())?;
    check_intertwiner(s, &restricted, ind.sigma())?;
    let g = ind.groupoid();
    let cs = ind.cosets();
    let blocks = g
        .units()
        .iter()
        .map(|&u| {
            let layout = ind.layout(u);
            let mut t = CMatrix::zeros(layout.dim, pi.dim(u));
            for b in &layout.blocks {
                let x = cs.representative(b.coset);
                let scale = C64::new(ind.mu().weight(b.coset).sqrt(), 0.0);
                let block = s.block(g, g.domain(x)) * pi.matrix(x).adjoint() * scale;
                t.view_mut((b.offset, 0), (b.dim, block.ncols())).copy_from(&block);
            }
            t
        })
        .collect();
    Ok(BundleMap { blocks })
}

/// Outcome of a Frobenius reciprocity check for one pair `(π, σ)`.
#[derive(Clone, Debug, Serialize)]
pub struct FrobeniusReport {
    pub report: ValidationReport,
    pub dim_induced: usize,
    pub dim_restricted: usize,
    /// Largest `|coE(E(T)) − T|` over the basis of `Mor(π, ind σ)`.
    pub round_trip_induced: f64,
    /// Largest `|E(coE(S)) − S|` over the basis of `Mor(π|_H, σ)`.
    pub round_trip_restricted: f64,
    /// Largest intertwining residual of the images.
    pub image_residual: f64,
}

/// Checks `Mor(π, ind σ) ≅ Mor(π|_H, σ)` with the maps `E` and `coE`.
pub fn verify_frobenius(pi: &Representation, ind: &InducedRep) -> Result<FrobeniusReport, IntertwinerError> {
    let tol = operator_tol();
    let g = ind.groupoid();
    if pi.groupoid().as_ref() != g.as_ref() {
        return Err(IntertwinerError::GroupoidMismatch);
    }
    if !g.is_transitive() {
        return Err(IntertwinerError::NonTransitive);
    }
    if !ind.sub().groupoid().is_transitive() {
        return Err(IntertwinerError::SubNotTransitive);
    }
    if !ind.h_haar().is_normalized() {
        return Err(IntertwinerError::HaarNotNormalized);
    }
    if !is_irreducible_transitive(pi)? {
        return Err(IntertwinerError::PiReducible);
    }
    if !is_irreducible_transitive(ind.sigma())? {
        return Err(IntertwinerError::SigmaReducible);
    }
    let restricted = restrict(pi, ind.sub())?;
    let mor_ind = intertwiners(pi, ind.base())?;
    let mor_res = intertwiners(&restricted, ind.sigma())?;
    let mut report = ValidationReport::new("Frobenius reciprocity");
    report.check(mor_ind.len() == mor_res.len(), "dim Mor(π, ind σ) = dim Mor(π|_H, σ)", || {
        format!("{} vs {}", mor_ind.len(), mor_res.len())
    });
    let mut round_trip_induced: f64 = 0.0;
    let mut image_residual: f64 = 0.0;
    for (i, t) in mor_ind.iter().enumerate() {
        let e = evaluation_map(t, pi, ind)?;
        let r = e.intertwining_residual(&restricted, ind.sigma());
        image_residual = image_residual.max(r);
        report.measure(r, tol, "E(T) intertwines π|_H and σ", || format!("basis element {i}"));
        let back = coevaluation_map(&e, pi, ind)?;
        let d = back.add(&t.scale(C64::new(-1.0, 0.0))).max_abs();
        round_trip_induced = round_trip_induced.max(d);
        report.measure(d, tol, "coE(E(T)) = T", || format!("basis element {i}"));
    }
    let mut round_trip_restricted: f64 = 0.0;
    for (i, s) in mor_res.iter().enumerate() {
        let t = coevaluation_map(s, pi, ind)?;
        let r = t.intertwining_residual(pi, ind.base());
        image_residual = image_residual.max(r);
        report.measure(r, tol, "coE(S) intertwines π and ind σ", || format!("basis element {i}"));
        let d = evaluation_map(&t, pi, ind)?.add(&s.scale(C64::new(-1.0, 0.0))).max_abs();
        round_trip_restricted = round_trip_restricted.max(d);
        report.measure(d, tol, "E(coE(S)) = S", || format!("basis element {i}"));
    }
    Ok(FrobeniusReport {
        report,
        dim_induced: mor_ind.len(),
        dim_restricted: mor_res.len(),
        round_trip_induced,
        round_trip_restricted,
        image_residual,
    })
}

/// Stacked coordinates of a bundle map, for rank computations.
pub fn flatten(t: &BundleMap) -> CVector {
    let data: Vec<C64> = t.blocks.iter().flat_map(|b| b.iter().copied()).collect();
    CVector::from_vec(data)
}

/// Largest intertwining residual over a basis.
pub fn basis_residual(basis: &[BundleMap], pi: &Representation, pi_prime: &Representation) -> f64 {
    basis.iter().map(|t| t.intertwining_residual(pi, pi_prime)).fold(0.0, f64::max)
}

/// Whether `T` vanishes, to the operator tolerance.
pub fn is_zero(t: &BundleMap) -> bool {
    t.blocks.iter().all(|b| max_abs(b) <= operator_tol())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::{pair_groupoid, CosetSpace};
    use crate::induction::induce;
    use crate::measure::{counting_haar, solve_equivariant};
    use crate::rep::{direct_sum, trivial_character};
    use std::sync::Arc;

    fn s3_reps() -> [Representation; 3] {
        let g = Arc::new(catalog::s3());
        [trivial_character(g.clone()), catalog::s3_sign(g.clone()), catalog::s3_standard(g)]
    }

    fn induced(k: usize) -> InducedRep {
        let a3 = catalog::s3_a3();
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&a3)), None).unwrap();
        let haar = counting_haar(a3.groupoid().clone(), true).unwrap();
        induce(&catalog::a3_character(&a3, k), &mu, &haar).unwrap()
    }

    #[test]
    fn schur_dimensions() {
        let [triv, sign, std] = s3_reps();
        let b = intertwiners(&std, &std).unwrap();
        assert_eq!(b.len(), 1);
        assert!(basis_residual(&b, &std, &std) < 1e-12);
        assert_eq!(intertwiners(&triv, &sign).unwrap().len(), 0);
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        let t = trivial_character(p2);
        assert_eq!(intertwiners(&t, &t).unwrap().len(), 1);
    }

    #[test]
    fn equivalence_decisions() {
        let [triv, sign, std] = s3_reps();
        let same = is_equivalent(&std, &std).unwrap();
        assert!(same.equivalent);
        let ind = induced(1);
        let eq = is_equivalent(ind.base(), &std).unwrap();
        assert!(eq.equivalent);
        assert!(eq.witness_residual.unwrap() < 1e-9);
        let no = is_equivalent(&triv, &sign).unwrap();
        assert!(!no.equivalent);
        assert_eq!(no.intertwiner_dim, 0);
    }

    #[test]
    fn irreducibility() {
        let [triv, sign, std] = s3_reps();
        assert!(is_irreducible_transitive(&std).unwrap());
        assert!(!is_irreducible_transitive(&direct_sum(&[&triv, &sign]).unwrap()).unwrap());
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        assert!(is_irreducible_transitive(&trivial_character(p2)).unwrap());
        let bundle = Arc::new(catalog::c2_bundle());
        assert_eq!(is_irreducible_transitive(&trivial_character(bundle)), Err(IntertwinerError::NonTransitive));
    }

    #[test]
    fn evaluation_and_back() {
        let std = catalog::s3_standard(Arc::new(catalog::s3()));
        let ind = induced(1);
        let zero = BundleMap::zero(&std, ind.base());
        assert!(is_zero(&evaluation_map(&zero, &std, &ind).unwrap()));
        let mor = intertwiners(&std, ind.base()).unwrap();
        assert_eq!(mor.len(), 1);
        let e = evaluation_map(&mor[0], &std, &ind).unwrap();
        assert!(!is_zero(&e));
        let restricted = restrict(&std, ind.sub()).unwrap();
        assert!(e.intertwining_residual(&restricted, ind.sigma()) < 1e-9);
        let back = coevaluation_map(&e, &std, &ind).unwrap();
        assert!(back.add(&mor[0].scale(C64::new(-1.0, 0.0))).max_abs() < 1e-9);
        let not = BundleMap::zero(&catalog::s3_sign(std.groupoid().clone()), ind.base());
        assert!(matches!(evaluation_map(&not, &std, &ind), Err(IntertwinerError::Shape)));
    }

    #[test]
    fn frobenius_matrix_for_s3() {
        let expected = [[1, 0, 0], [1, 0, 0], [0, 1, 1]];
        for (i, pi) in s3_reps().iter().enumerate() {
            for k in 0..3 {
                let out = verify_frobenius(pi, &induced(k)).unwrap();
                assert!(out.report.passed(), "{}", out.report);
                assert_eq!(out.dim_induced, expected[i][k]);
            }
        }
    }

    #[test]
    fn frobenius_preconditions() {
        let a3 = catalog::s3_a3();
        let mu = solve_equivariant(Arc::new(CosetSpace::new(&a3)), None).unwrap();
        let haar = counting_haar(a3.groupoid().clone(), false).unwrap();
        let ind = induce(&catalog::a3_character(&a3, 1), &mu, &haar).unwrap();
        let std = catalog::s3_standard(Arc::new(catalog::s3()));
        assert_eq!(verify_frobenius(&std, &ind).unwrap_err(), IntertwinerError::HaarNotNormalized);
        let [triv, sign, _] = s3_reps();
        let reducible = direct_sum(&[&triv, &sign]).unwrap();
        assert_eq!(verify_frobenius(&reducible, &induced(1)).unwrap_err(), IntertwinerError::PiReducible);
    }
}
