//! Built-in fixtures: small groupoids, subgroupoids, representations and
//! verification scenarios, addressable by name as `catalog:NAME`.
//!
//! `S3` is encoded by the permutations of `{0, 1, 2}` in lexicographic order
//! with `(στ)(i) = σ(τ(i))`:
//!
//! | id | 0 | 1 | 2 | 3 | 4 | 5 |
//! |----|---|---|---|---|---|---|
//! | perm | 012 | 021 | 102 | 120 | 201 | 210 |
//!
//! so `A3 = {0, 3, 4}` and the transpositions are `1, 2, 5`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::groupoid::{
    action_groupoid, disjoint_union, group_groupoid, pair_groupoid, product_groupoid, FiniteGroupoid, WideSubgroupoid,
};
use crate::io::{Object, Over};
use crate::linalg::CMatrix;
use crate::rep::{outer_tensor_on, trivial_character, Representation};
use crate::C64;

pub const S3_PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// `A3` inside `S3`, as element ids.
pub const A3: [usize; 3] = [0, 3, 4];

fn perm_id(p: [usize; 3]) -> usize {
    S3_PERMS.iter().position(|&q| q == p).unwrap()
}

pub fn s3_table() -> Vec<Vec<usize>> {
    S3_PERMS
        .iter()
        .map(|s| S3_PERMS.iter().map(|t| perm_id([s[t[0]], s[t[1]], s[t[2]]])).collect())
        .collect()
}

/// Addition table of `Z/n`.
pub fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
}

pub fn c2() -> FiniteGroupoid {
    group_groupoid(&cyclic_table(2)).unwrap()
}

pub fn c3() -> FiniteGroupoid {
    group_groupoid(&cyclic_table(3)).unwrap()
}

pub fn s3() -> FiniteGroupoid {
    group_groupoid(&s3_table()).unwrap()
}

/// `S3 ⋉ {0, 1, 2}` for the natural action.
pub fn s3_action() -> FiniteGroupoid {
    let action: Vec<Vec<usize>> = S3_PERMS.iter().map(|p| p.to_vec()).collect();
    action_groupoid(&s3_table(), &action).unwrap()
}

/// `P₂ × S3`; the arrow `((i, j), g)` has id `6·(2i + j) + g`.
pub fn p2xs3() -> FiniteGroupoid {
    product_groupoid(&pair_groupoid(2).unwrap(), &s3())
}

/// Two disjoint copies of `C2`.
pub fn c2_bundle() -> FiniteGroupoid {
    disjoint_union(&c2(), &c2())
}

/// Every catalog groupoid with its name.
pub fn groupoids() -> Vec<(&'static str, FiniteGroupoid)> {
    vec![
        ("pair-1", pair_groupoid(1).unwrap()),
        ("pair-2", pair_groupoid(2).unwrap()),
        ("pair-3", pair_groupoid(3).unwrap()),
        ("pair-4", pair_groupoid(4).unwrap()),
        ("c2", c2()),
        ("c3", c3()),
        ("s3", s3()),
        ("s3-action", s3_action()),
        ("p2xs3", p2xs3()),
        ("c2-bundle", c2_bundle()),
    ]
}

fn one_by_one(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

/// `j ↦ e^{2πi·jk/n}` on a cyclic group with the [`cyclic_table`] numbering.
pub fn cyclic_character(g: Arc<FiniteGroupoid>, k: usize) -> Representation {
    let n = g.len();
    let matrices = g.elements().map(|j| one_by_one(root_of_unity(j * k, n))).collect();
    Representation::new(g, vec![1], matrices).unwrap()
}

/// `e^{2πim/n}`, exact at quarter and third turns and conjugation-symmetric.
pub fn root_of_unity(m: usize, n: usize) -> C64 {
    let m = m % n;
    if 2 * m > n {
        return root_of_unity(n - m, n).conj();
    }
    if m == 0 {
        C64::new(1.0, 0.0)
    } else if 2 * m == n {
        C64::new(-1.0, 0.0)
    } else if 4 * m == n {
        C64::new(0.0, 1.0)
    } else if 3 * m == n {
        C64::new(-0.5, 3f64.sqrt() / 2.0)
    } else if 6 * m == n {
        C64::new(0.5, 3f64.sqrt() / 2.0)
    } else {
        C64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)
    }
}

fn parity(p: [usize; 3]) -> i32 {
    let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The sign character of `S3`.
pub fn s3_sign(g: Arc<FiniteGroupoid>) -> Representation {
    let matrices = S3_PERMS.iter().map(|&p| one_by_one(C64::new(parity(p) as f64, 0.0))).collect();
    Representation::new(g, vec![1], matrices).unwrap()
}

/// The real orthogonal 2-dimensional irreducible representation of `S3`:
/// the permutation action restricted to the plane orthogonal to `(1, 1, 1)`.
pub fn s3_standard(g: Arc<FiniteGroupoid>) -> Representation {
    let basis = [
        [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0],
        [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()],
    ];
    let matrices = S3_PERMS
        .iter()
        .map(|p| {
            CMatrix::from_fn(2, 2, |i, j| {
                // ⟨b_i, P b_j⟩ with (P b)_{p(k)} = b_k
                let v: f64 = (0..3).map(|k| basis[i][p[k]] * basis[j][k]).sum();
                // entries lie in {0, ±1/2, ±1, ±√3/2}; remove rounding noise
                let exact = [0.0, 0.5, 1.0, 3f64.sqrt() / 2.0]
                    .into_iter()
                    .find(|e| (v.abs() - e).abs() < 1e-12)
                    .expect("standard representation entry");
                C64::new(if exact == 0.0 { 0.0 } else { exact.copysign(v) }, 0.0)
            })
        })
        .collect();
    Representation::new(g, vec![2], matrices).unwrap()
}

/// `A3 ⊆ S3`.
pub fn s3_a3() -> WideSubgroupoid {
    WideSubgroupoid::new(Arc::new(s3()), A3).unwrap()
}

/// The character of `A3` sending the 3-cycle `3 = (0 1 2)` to `e^{2πik/3}`.
pub fn a3_character(a3: &WideSubgroupoid, k: usize) -> Representation {
    let power = |x: usize| match x {
        0 => 0,
        3 => 1,
        4 => 2,
        _ => unreachable!("not in A3"),
    };
    let matrices = a3
        .members()
        .iter()
        .map(|&x| one_by_one(root_of_unity(power(x) * k, 3)))
        .collect();
    Representation::new(a3.groupoid().clone(), vec![1], matrices).unwrap()
}

/// `P₂ × A3 ⊆ P₂ × S3`.
pub fn p2xs3_p2xa3() -> WideSubgroupoid {
    let p2 = Arc::new(pair_groupoid(2).unwrap());
    WideSubgroupoid::product(&WideSubgroupoid::full(p2), &s3_a3(), Arc::new(p2xs3())).unwrap()
}

/// A representation `ρ` of `S3` (or `A3`) lifted to `P₂ × S3` (or `P₂ × A3`)
/// as `trivial × ρ`.
pub fn lift_to_p2(rho: &Representation, target: Arc<FiniteGroupoid>) -> Representation {
    let p2 = Arc::new(pair_groupoid(2).unwrap());
    outer_tensor_on(&trivial_character(p2), rho, target).unwrap()
}

fn sub_object(sub: WideSubgroupoid) -> Object {
    Object::Subgroupoid(sub)
}

fn rep_over_groupoid(g: Arc<FiniteGroupoid>, rep: Representation) -> Object {
    Object::Representation { over: Over::Groupoid(g), rep }
}

fn rep_over_sub(sub: WideSubgroupoid, rep: Representation) -> Object {
    Object::Representation { over: Over::Subgroupoid(sub), rep }
}

/// Catalog names in listing order.
pub fn names() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = groupoids().into_iter().map(|(n, _)| n).collect();
    out.extend([
        "s3-a3",
        "s3-e",
        "p2-units",
        "p2xs3-p2xa3",
        "p2xs3-units",
        "s3-triv",
        "s3-sign",
        "s3-std",
        "c3-omega",
        "c3-omegabar",
        "a3-one",
        "a3-omega",
        "a3-omegabar",
        "e-triv",
        "p2-triv",
        "p2units-triv",
        "p2xs3-triv",
        "p2xs3-sign",
        "p2xs3-std",
        "p2xa3-one",
        "p2xa3-omega",
        "p2xa3-omegabar",
        "p2xs3units-triv",
        "s3-a3-full",
        "p2xs3-full",
        "s3-stages",
        "p2xs3-stages",
        "mackey-s3a3-p2",
    ]);
    out
}

/// The catalog entry called `name`.
pub fn lookup(name: &str) -> Option<Object> {
    if let Some((_, g)) = groupoids().into_iter().find(|(n, _)| *n == name) {
        return Some(Object::Groupoid(Arc::new(g)));
    }
    let s3g = || Arc::new(s3());
    let p2 = || Arc::new(pair_groupoid(2).unwrap());
    let ps3 = || Arc::new(p2xs3());
    let obj = match name {
        "s3-a3" => sub_object(s3_a3()),
        "s3-e" => sub_object(WideSubgroupoid::units_only(s3g())),
        "p2-units" => sub_object(WideSubgroupoid::units_only(p2())),
        "p2xs3-p2xa3" => sub_object(p2xs3_p2xa3()),
        "p2xs3-units" => sub_object(WideSubgroupoid::units_only(ps3())),
        "s3-triv" => rep_over_groupoid(s3g(), trivial_character(s3g())),
        "s3-sign" => rep_over_groupoid(s3g(), s3_sign(s3g())),
        "s3-std" => rep_over_groupoid(s3g(), s3_standard(s3g())),
        "c3-omega" => rep_over_groupoid(Arc::new(c3()), cyclic_character(Arc::new(c3()), 1)),
        "c3-omegabar" => rep_over_groupoid(Arc::new(c3()), cyclic_character(Arc::new(c3()), 2)),
        "a3-one" | "a3-omega" | "a3-omegabar" => {
            let k = ["a3-one", "a3-omega", "a3-omegabar"].iter().position(|&n| n == name).unwrap();
            let a3 = s3_a3();
            let rep = a3_character(&a3, k);
            rep_over_sub(a3, rep)
        }
        "e-triv" => {
            let e = WideSubgroupoid::units_only(s3g());
            rep_over_sub(e.clone(), trivial_character(e.groupoid().clone()))
        }
        "p2-triv" => rep_over_groupoid(p2(), trivial_character(p2())),
        "p2units-triv" => {
            let u = WideSubgroupoid::units_only(p2());
            rep_over_sub(u.clone(), trivial_character(u.groupoid().clone()))
        }
        "p2xs3-triv" => rep_over_groupoid(ps3(), trivial_character(ps3())),
        "p2xs3-sign" => rep_over_groupoid(ps3(), lift_to_p2(&s3_sign(s3g()), ps3())),
        "p2xs3-std" => rep_over_groupoid(ps3(), lift_to_p2(&s3_standard(s3g()), ps3())),
        "p2xa3-one" | "p2xa3-omega" | "p2xa3-omegabar" => {
            let k = ["p2xa3-one", "p2xa3-omega", "p2xa3-omegabar"].iter().position(|&n| n == name).unwrap();
            let h = p2xs3_p2xa3();
            let rep = lift_to_p2(&a3_character(&s3_a3(), k), h.groupoid().clone());
            rep_over_sub(h, rep)
        }
        "p2xs3units-triv" => {
            let u = WideSubgroupoid::units_only(ps3());
            rep_over_sub(u.clone(), trivial_character(u.groupoid().clone()))
        }
        _ => return scenario(name).map(|doc| Object::Scenario { doc, base: None }),
    };
    Some(obj)
}

/// Raw scenario documents; references are resolved by the loader.
pub fn scenario(name: &str) -> Option<Value> {
    let doc = match name {
        "s3-a3-full" => json!({
            "kind": "scenario", "version": 1, "check": "frobenius",
            "subgroupoid": "catalog:s3-a3",
            "pi": ["catalog:s3-triv", "catalog:s3-sign", "catalog:s3-std"],
            "sigma": ["catalog:a3-one", "catalog:a3-omega", "catalog:a3-omegabar"],
            "expected": [[1, 0, 0], [1, 0, 0], [0, 1, 1]],
        }),
        "p2xs3-full" => json!({
            "kind": "scenario", "version": 1, "check": "frobenius",
            "subgroupoid": "catalog:p2xs3-p2xa3",
            "pi": ["catalog:p2xs3-triv", "catalog:p2xs3-sign", "catalog:p2xs3-std"],
            "sigma": ["catalog:p2xa3-one", "catalog:p2xa3-omega", "catalog:p2xa3-omegabar"],
            "expected": [[1, 0, 0], [1, 0, 0], [0, 1, 1]],
        }),
        "s3-stages" => json!({
            "kind": "scenario", "version": 1, "check": "stages",
            "h": "catalog:s3-a3", "k": "catalog:s3-e", "sigma": "catalog:e-triv",
        }),
        "p2xs3-stages" => json!({
            "kind": "scenario", "version": 1, "check": "stages",
            "h": "catalog:p2xs3-p2xa3", "k": "catalog:p2xs3-units", "sigma": "catalog:p2xs3units-triv",
        }),
        "mackey-s3a3-p2" => json!({
            "kind": "scenario", "version": 1, "check": "mackey",
            "left": {"subgroupoid": "catalog:s3-a3", "sigma": "catalog:a3-omega"},
            "right": {"subgroupoid": "catalog:p2-units", "sigma": "catalog:p2units-triv"},
        }),
        _ => return None,
    };
    Some(doc)
}
