//! Finite groupoids, wide subgroupoids and coset spaces.
//!
//! Elements are dense ids `0..n`. Units are elements too; every per-unit
//! table in the crate is indexed by the *unit position*, i.e. the index of
//! the unit in the sorted unit list.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::report::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupoidError {
    #[error("a groupoid needs at least one unit")]
    NoUnits,
    #[error("table `{table}` has length {found}, expected {expected}")]
    LengthMismatch { table: &'static str, expected: usize, found: usize },
    #[error("table `{table}` entry {index} = {value} is out of range")]
    IndexOutOfRange { table: &'static str, index: usize, value: usize },
    #[error("table `{table}` maps element {element} to {value}, which is not a unit")]
    NotAUnit { table: &'static str, element: usize, value: usize },
    #[error("product triple [{x}, {y}, {xy}] is dangling: ({x}, {y}) is not a composable pair or an id is out of range")]
    DanglingProduct { x: usize, y: usize, xy: usize },
    #[error("product of ({x}, {y}) is given twice")]
    DuplicateProduct { x: usize, y: usize },
    #[error("groupoid axioms violated: {}", .0.failed_axioms().join(", "))]
    Invalid(Box<ValidationReport>),
    #[error("not a group table: {0}")]
    NotAGroup(String),
    #[error("not a group action: {0}")]
    NotAnAction(String),
    #[error("pair groupoid needs at least one unit")]
    EmptyPairGroupoid,
    #[error("subgroupoid member {0} is not an element of the parent")]
    MemberOutOfRange(usize),
    #[error("subgroupoid is not wide: unit {0} is missing")]
    NotWide(usize),
    #[error("subgroupoid is not closed under products: {x}·{y} = {xy} is missing")]
    NotClosedUnderProduct { x: usize, y: usize, xy: usize },
    #[error("subgroupoid is not closed under inverses: {x}⁻¹ = {inverse} is missing")]
    NotClosedUnderInverse { x: usize, inverse: usize },
    #[error("element {element} is not in coset {coset}")]
    BadRepresentative { coset: usize, element: usize },
    #[error("{0} is not a subgroupoid of {1}")]
    NotNested(&'static str, &'static str),
}

/// A finite groupoid given by lookup tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    units: Vec<usize>,
    unit_pos: Vec<Option<usize>>,
    range: Vec<usize>,
    domain: Vec<usize>,
    inverse: Vec<usize>,
    /// Row-major `n × n`, `None` off the composable pairs.
    product: Vec<Option<usize>>,
    /// `G^u` per unit position, ascending.
    range_fibers: Vec<Vec<usize>>,
    /// `G_u` per unit position, ascending.
    domain_fibers: Vec<Vec<usize>>,
}

impl FiniteGroupoid {
    /// Assembles a groupoid from raw tables, checking only that the tables
    /// are well formed. Use [`FiniteGroupoid::validate`] for the axioms.
    pub fn from_tables(
        n: usize,
        units: &[usize],
        range: Vec<usize>,
        domain: Vec<usize>,
        inverse: Vec<usize>,
        products: &[(usize, usize, usize)],
    ) -> Result<Self, GroupoidError> {
        for (table, len) in [("range", range.len()), ("domain", domain.len()), ("inverse", inverse.len())] {
            if len != n {
                return Err(GroupoidError::LengthMismatch { table, expected: n, found: len });
            }
        }
        let units: Vec<usize> = units.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        if units.is_empty() {
            return Err(GroupoidError::NoUnits);
        }
        if let Some((i, &u)) = units.iter().enumerate().find(|(_, &u)| u >= n) {
            return Err(GroupoidError::IndexOutOfRange { table: "units", index: i, value: u });
        }
        let mut unit_pos = vec![None; n];
        for (i, &u) in units.iter().enumerate() {
            unit_pos[u] = Some(i);
        }
        for (table, map) in [("range", &range), ("domain", &domain), ("inverse", &inverse)] {
            if let Some((i, &v)) = map.iter().enumerate().find(|(_, &v)| v >= n) {
                return Err(GroupoidError::IndexOutOfRange { table, index: i, value: v });
            }
        }
        for (table, map) in [("range", &range), ("domain", &domain)] {
            if let Some((i, &v)) = map.iter().enumerate().find(|(_, &v)| unit_pos[v].is_none()) {
                return Err(GroupoidError::NotAUnit { table, element: i, value: v });
            }
        }
        let mut product = vec![None; n * n];
        for &(x, y, xy) in products {
            if x >= n || y >= n || xy >= n || domain[x] != range[y] {
                return Err(GroupoidError::DanglingProduct { x, y, xy });
            }
            if product[x * n + y].replace(xy).is_some() {
                return Err(GroupoidError::DuplicateProduct { x, y });
            }
        }
        let mut range_fibers = vec![Vec::new(); units.len()];
        let mut domain_fibers = vec![Vec::new(); units.len()];
        for x in 0..n {
            range_fibers[unit_pos[range[x]].unwrap()].push(x);
            domain_fibers[unit_pos[domain[x]].unwrap()].push(x);
        }
        Ok(Self { units, unit_pos, range, domain, inverse, product, range_fibers, domain_fibers })
    }

    /// [`FiniteGroupoid::from_tables`] followed by a full axiom check.
    pub fn from_tables_validated(
        n: usize,
        units: &[usize],
        range: Vec<usize>,
        domain: Vec<usize>,
        inverse: Vec<usize>,
        products: &[(usize, usize, usize)],
    ) -> Result<Self, GroupoidError> {
        Self::from_tables(n, units, range, domain, inverse, products)?.into_validated()
    }

    fn into_validated(self) -> Result<Self, GroupoidError> {
        let report = self.validate();
        if report.passed() {
            Ok(self)
        } else {
            Err(GroupoidError::Invalid(Box::new(report)))
        }
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// Sorted unit ids.
    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn is_unit(&self, x: usize) -> bool {
        self.unit_pos[x].is_some()
    }

    /// Position of unit `u` in [`FiniteGroupoid::units`].
    pub fn unit_index(&self, u: usize) -> Option<usize> {
        self.unit_pos.get(u).copied().flatten()
    }

    /// Position of the unit `u`; panics if `u` is not a unit.
    pub fn upos(&self, u: usize) -> usize {
        self.unit_pos[u].unwrap_or_else(|| panic!("element {u} is not a unit"))
    }

    pub fn range(&self, x: usize) -> usize {
        self.range[x]
    }

    pub fn domain(&self, x: usize) -> usize {
        self.domain[x]
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn composable(&self, x: usize, y: usize) -> bool {
        self.domain[x] == self.range[y]
    }

    pub fn product(&self, x: usize, y: usize) -> Option<usize> {
        self.product[x * self.len() + y]
    }

    /// `x·y`; panics when the pair is not composable.
    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.product(x, y)
            .unwrap_or_else(|| panic!("elements {x} and {y} are not composable"))
    }

    /// `G^u`: arrows with range `u`.
    pub fn range_fiber(&self, u: usize) -> &[usize] {
        &self.range_fibers[self.upos(u)]
    }

    /// `G_u`: arrows with domain `u`.
    pub fn domain_fiber(&self, u: usize) -> &[usize] {
        &self.domain_fibers[self.upos(u)]
    }

    /// `G^u_v`.
    pub fn arrows(&self, u: usize, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.range_fiber(u).iter().copied().filter(move |&x| self.domain[x] == v)
    }

    /// All composable pairs in lexicographic order.
    pub fn composable_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.elements()
            .flat_map(move |x| self.range_fiber(self.domain[x]).iter().map(move |&y| (x, y)))
    }

    /// Exhaustive axiom check; never fails, reports witnesses instead.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new("groupoid");
        let n = self.len();
        for x in self.elements() {
            let xi = self.inverse[x];
            rep.check(self.inverse[xi] == x, "inverse involution", || {
                format!("element {x}: (x⁻¹)⁻¹ = {} ≠ {x}", self.inverse[xi])
            });
            rep.check(self.range[xi] == self.domain[x] && self.domain[xi] == self.range[x], "inverse swaps range and domain", || {
                format!("element {x} with inverse {xi}")
            });
            rep.check(self.product(x, xi) == Some(self.range[x]), "r(x) = x·x⁻¹", || {
                format!("element {x}: x·x⁻¹ = {:?}, r(x) = {}", self.product(x, xi), self.range[x])
            });
            rep.check(self.product(xi, x) == Some(self.domain[x]), "d(x) = x⁻¹·x", || {
                format!("element {x}: x⁻¹·x = {:?}, d(x) = {}", self.product(xi, x), self.domain[x])
            });
        }
        for &u in &self.units {
            rep.check(self.range[u] == u && self.domain[u] == u, "units are fixed by r and d", || {
                format!("unit {u}: r = {}, d = {}", self.range[u], self.domain[u])
            });
            rep.check(self.product(u, u) == Some(u), "units are idempotent", || format!("unit {u}"));
        }
        for x in 0..n {
            for y in 0..n {
                let defined = self.product(x, y).is_some();
                let composable = self.composable(x, y);
                if defined != composable {
                    rep.check(false, "product defined exactly on composable pairs", || {
                        format!("pair ({x}, {y}): defined = {defined}, composable = {composable}")
                    });
                }
            }
        }
        for (x, y) in self.composable_pairs() {
            let Some(xy) = self.product(x, y) else { continue };
            rep.check(self.range[xy] == self.range[x] && self.domain[xy] == self.domain[y], "r(xy) = r(x), d(xy) = d(y)", || {
                format!("pair ({x}, {y}) → {xy}")
            });
            let xi = self.inverse[x];
            rep.check(self.product(xi, xy) == Some(y), "x⁻¹(xy) = y", || {
                format!("pair ({x}, {y}): x⁻¹(xy) = {:?}", self.product(xi, xy))
            });
            let yi = self.inverse[y];
            rep.check(self.product(xy, yi) == Some(x), "(xy)y⁻¹ = x", || {
                format!("pair ({x}, {y}): (xy)y⁻¹ = {:?}", self.product(xy, yi))
            });
            if self.is_unit(x) {
                rep.check(xy == y, "unit law u·y = y", || format!("unit {x}, element {y}"));
            }
            if self.is_unit(y) {
                rep.check(xy == x, "unit law x·u = x", || format!("element {x}, unit {y}"));
            }
            for &z in self.range_fiber(self.domain[y]) {
                let left = self.product(xy, z);
                let right = self.product(y, z).and_then(|yz| self.product(x, yz));
                rep.check(left.is_some() && left == right, "associativity", || {
                    format!("({x}·{y})·{z} = {left:?}, {x}·({y}·{z}) = {right:?}")
                });
            }
        }
        rep
    }

    /// Partition of the unit space into transitivity classes (unit ids).
    pub fn unit_orbits(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.unit_count());
        for x in self.elements() {
            uf.union(self.upos(self.range[x]), self.upos(self.domain[x]));
        }
        uf.classes().into_iter().map(|c| c.into_iter().map(|p| self.units[p]).collect()).collect()
    }

    /// Whether every pair of units is joined by an arrow.
    pub fn is_transitive(&self) -> bool {
        self.unit_orbits().len() == 1
    }

    /// The isotropy group `G^u_u` at unit `u`.
    pub fn isotropy(&self, u: usize) -> Isotropy {
        let elements: Vec<usize> = self.arrows(u, u).collect();
        let local = |x: usize| elements.binary_search(&x).expect("isotropy is closed");
        let table: Vec<Vec<usize>> = elements
            .iter()
            .map(|&a| elements.iter().map(|&b| local(self.mul(a, b))).collect())
            .collect();
        let group = group_groupoid(&table).expect("isotropy of a valid groupoid is a group");
        Isotropy { elements, group }
    }
}

/// An isotropy group, re-indexed as a one-unit groupoid.
#[derive(Clone, Debug)]
pub struct Isotropy {
    /// Parent ids in ascending order; local id `i` is `elements[i]`.
    pub elements: Vec<usize>,
    pub group: FiniteGroupoid,
}

impl Isotropy {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Pair groupoid on `n` units: arrows `(i, j)` with id `i·n + j`.
pub fn pair_groupoid(n: usize) -> Result<FiniteGroupoid, GroupoidError> {
    if n == 0 {
        return Err(GroupoidError::EmptyPairGroupoid);
    }
    let id = |i: usize, j: usize| i * n + j;
    let units: Vec<usize> = (0..n).map(|i| id(i, i)).collect();
    let mut range = Vec::with_capacity(n * n);
    let mut domain = Vec::with_capacity(n * n);
    let mut inverse = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            range.push(id(i, i));
            domain.push(id(j, j));
            inverse.push(id(j, i));
        }
    }
    let mut products = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                products.push((id(i, j), id(j, k), id(i, k)));
            }
        }
    }
    FiniteGroupoid::from_tables(n * n, &units, range, domain, inverse, &products)
}

/// Checks a Cayley table and returns its identity element.
pub fn check_group_table(table: &[Vec<usize>]) -> Result<usize, GroupoidError> {
    let n = table.len();
    if n == 0 {
        return Err(GroupoidError::NotAGroup("empty table".into()));
    }
    for (a, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(GroupoidError::NotAGroup(format!("row {a} has length {}", row.len())));
        }
        if let Some(&v) = row.iter().find(|&&v| v >= n) {
            return Err(GroupoidError::NotAGroup(format!("row {a} contains {v}")));
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(GroupoidError::NotAGroup(format!("not associative at ({a}, {b}, {c})")));
                }
            }
        }
    }
    let e = (0..n)
        .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
        .ok_or_else(|| GroupoidError::NotAGroup("no identity".into()))?;
    for a in 0..n {
        if !(0..n).any(|b| table[a][b] == e && table[b][a] == e) {
            return Err(GroupoidError::NotAGroup(format!("element {a} has no inverse")));
        }
    }
    Ok(e)
}

fn group_inverses(table: &[Vec<usize>], e: usize) -> Vec<usize> {
    (0..table.len())
        .map(|a| (0..table.len()).find(|&b| table[a][b] == e).unwrap())
        .collect()
}

/// A finite group as a one-unit groupoid; ids are kept from the table.
pub fn group_groupoid(table: &[Vec<usize>]) -> Result<FiniteGroupoid, GroupoidError> {
    let e = check_group_table(table)?;
    let n = table.len();
    let inverse = group_inverses(table, e);
    let products: Vec<_> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .map(|(a, b)| (a, b, table[a][b]))
        .collect();
    FiniteGroupoid::from_tables(n, &[e], vec![e; n], vec![e; n], inverse, &products)
}

/// Transformation groupoid `Γ ⋉ X` of a group action `action[γ][x] = γ·x`.
///
/// The arrow `(γ, x)` has id `γ·|X| + x`, range `(e, γ·x)` and domain `(e, x)`.
pub fn action_groupoid(table: &[Vec<usize>], action: &[Vec<usize>]) -> Result<FiniteGroupoid, GroupoidError> {
    let e = check_group_table(table)?;
    let order = table.len();
    if action.len() != order {
        return Err(GroupoidError::NotAnAction(format!(
            "{} action rows for a group of order {order}",
            action.len()
        )));
    }
    let points = action[0].len();
    if points == 0 {
        return Err(GroupoidError::NotAnAction("empty set".into()));
    }
    for (g, row) in action.iter().enumerate() {
        if row.len() != points || row.iter().any(|&p| p >= points) {
            return Err(GroupoidError::NotAnAction(format!("row {g} is not a map of the {points}-point set")));
        }
    }
    if (0..points).any(|x| action[e][x] != x) {
        return Err(GroupoidError::NotAnAction("identity does not act trivially".into()));
    }
    for g in 0..order {
        for h in 0..order {
            for x in 0..points {
                if action[table[g][h]][x] != action[g][action[h][x]] {
                    return Err(GroupoidError::NotAnAction(format!("(g·h)·x ≠ g·(h·x) at g={g}, h={h}, x={x}")));
                }
            }
        }
    }
    let inv = group_inverses(table, e);
    let id = |g: usize, x: usize| g * points + x;
    let n = order * points;
    let units: Vec<usize> = (0..points).map(|x| id(e, x)).collect();
    let mut range = vec![0; n];
    let mut domain = vec![0; n];
    let mut inverse = vec![0; n];
    let mut products = Vec::new();
    for g in 0..order {
        for x in 0..points {
            let a = id(g, x);
            range[a] = id(e, action[g][x]);
            domain[a] = id(e, x);
            inverse[a] = id(inv[g], action[g][x]);
            // (g1, g2·x)·(g2, x) = (g1 g2, x)
            for g1 in 0..order {
                products.push((id(g1, action[g][x]), a, id(table[g1][g], x)));
            }
        }
    }
    FiniteGroupoid::from_tables(n, &units, range, domain, inverse, &products)
}

/// `G₁ × G₂` with component-wise structure; `(a, b)` has id `a·|G₂| + b`.
pub fn product_groupoid(g1: &FiniteGroupoid, g2: &FiniteGroupoid) -> FiniteGroupoid {
    let n2 = g2.len();
    let id = |a: usize, b: usize| a * n2 + b;
    let n = g1.len() * n2;
    let mut units = Vec::new();
    for &u in g1.units() {
        for &v in g2.units() {
            units.push(id(u, v));
        }
    }
    let mut range = Vec::with_capacity(n);
    let mut domain = Vec::with_capacity(n);
    let mut inverse = Vec::with_capacity(n);
    for a in g1.elements() {
        for b in g2.elements() {
            range.push(id(g1.range(a), g2.range(b)));
            domain.push(id(g1.domain(a), g2.domain(b)));
            inverse.push(id(g1.inverse(a), g2.inverse(b)));
        }
    }
    let mut products = Vec::new();
    for (a, c) in g1.composable_pairs() {
        let Some(ac) = g1.product(a, c) else { continue };
        for (b, d) in g2.composable_pairs() {
            if let Some(bd) = g2.product(b, d) {
                products.push((id(a, b), id(c, d), id(ac, bd)));
            }
        }
    }
    FiniteGroupoid::from_tables(n, &units, range, domain, inverse, &products)
        .expect("product of well-formed tables is well formed")
}

/// Disjoint union; ids of `g2` are shifted by `|g1|`.
pub fn disjoint_union(g1: &FiniteGroupoid, g2: &FiniteGroupoid) -> FiniteGroupoid {
    let s = g1.len();
    let n = s + g2.len();
    let units: Vec<usize> = g1.units().iter().copied().chain(g2.units().iter().map(|&u| u + s)).collect();
    let range = g1.elements().map(|x| g1.range(x)).chain(g2.elements().map(|x| g2.range(x) + s)).collect();
    let domain = g1.elements().map(|x| g1.domain(x)).chain(g2.elements().map(|x| g2.domain(x) + s)).collect();
    let inverse = g1.elements().map(|x| g1.inverse(x)).chain(g2.elements().map(|x| g2.inverse(x) + s)).collect();
    let products: Vec<_> = g1
        .composable_pairs()
        .filter_map(|(x, y)| g1.product(x, y).map(|xy| (x, y, xy)))
        .chain(g2.composable_pairs().filter_map(|(x, y)| g2.product(x, y).map(|xy| (x + s, y + s, xy + s))))
        .collect();
    FiniteGroupoid::from_tables(n, &units, range, domain, inverse, &products)
        .expect("disjoint union of well-formed tables is well formed")
}

/// A wide subgroupoid `H ⊆ G`, carried both as a member set of the parent and
/// as a groupoid in its own right.
///
/// Local ids follow the ascending order of parent ids, so unit positions of
/// `H` and `G` coincide.
#[derive(Clone, Debug)]
pub struct WideSubgroupoid {
    parent: Arc<FiniteGroupoid>,
    members: Vec<usize>,
    local: Vec<Option<usize>>,
    groupoid: Arc<FiniteGroupoid>,
}

impl WideSubgroupoid {
    pub fn new(parent: Arc<FiniteGroupoid>, members: impl IntoIterator<Item = usize>) -> Result<Self, GroupoidError> {
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&m) = members.iter().find(|&&m| m >= parent.len()) {
            return Err(GroupoidError::MemberOutOfRange(m));
        }
        if let Some(&u) = parent.units().iter().find(|u| !members.contains(u)) {
            return Err(GroupoidError::NotWide(u));
        }
        for &x in &members {
            let inverse = parent.inverse(x);
            if !members.contains(&inverse) {
                return Err(GroupoidError::NotClosedUnderInverse { x, inverse });
            }
        }
        for &x in &members {
            for &y in parent.range_fiber(parent.domain(x)) {
                if members.contains(&y) {
                    let xy = parent.mul(x, y);
                    if !members.contains(&xy) {
                        return Err(GroupoidError::NotClosedUnderProduct { x, y, xy });
                    }
                }
            }
        }
        let members: Vec<usize> = members.into_iter().collect();
        let mut local = vec![None; parent.len()];
        for (i, &m) in members.iter().enumerate() {
            local[m] = Some(i);
        }
        let l = |x: usize| local[x].unwrap();
        let units: Vec<usize> = parent.units().iter().map(|&u| l(u)).collect();
        let range = members.iter().map(|&x| l(parent.range(x))).collect();
        let domain = members.iter().map(|&x| l(parent.domain(x))).collect();
        let inverse = members.iter().map(|&x| l(parent.inverse(x))).collect();
        let mut products = Vec::new();
        for &x in &members {
            for &y in parent.range_fiber(parent.domain(x)) {
                if local[y].is_some() {
                    products.push((l(x), l(y), l(parent.mul(x, y))));
                }
            }
        }
        let groupoid = FiniteGroupoid::from_tables(members.len(), &units, range, domain, inverse, &products)?;
        Ok(Self { parent, members, local, groupoid: Arc::new(groupoid) })
    }

    /// `H = G⁰`.
    pub fn units_only(parent: Arc<FiniteGroupoid>) -> Self {
        let units = parent.units().to_vec();
        Self::new(parent, units).expect("the unit space is a wide subgroupoid")
    }

    /// `H = G`.
    pub fn full(parent: Arc<FiniteGroupoid>) -> Self {
        let all: Vec<usize> = parent.elements().collect();
        Self::new(parent, all).expect("G is a wide subgroupoid of itself")
    }

    pub fn parent(&self) -> &Arc<FiniteGroupoid> {
        &self.parent
    }

    /// `H` as a groupoid with local ids.
    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    /// Parent ids of the members, ascending; index = local id.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, x: usize) -> bool {
        self.local.get(x).copied().flatten().is_some()
    }

    pub fn to_local(&self, x: usize) -> Option<usize> {
        self.local.get(x).copied().flatten()
    }

    pub fn to_parent(&self, local: usize) -> usize {
        self.members[local]
    }

    /// `H^u` in parent ids, for a parent unit `u`.
    pub fn range_fiber(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        let lu = self.local[u].expect("wide subgroupoid contains every unit");
        self.groupoid.range_fiber(lu).iter().map(|&l| self.members[l])
    }

    /// Restricts a subgroupoid `K` of the same parent to a subgroupoid of `H`.
    pub fn restrict_sub(&self, k: &WideSubgroupoid) -> Result<WideSubgroupoid, GroupoidError> {
        if k.parent.as_ref() != self.parent.as_ref() {
            return Err(GroupoidError::NotNested("K", "the parent of H"));
        }
        let members = k
            .members
            .iter()
            .map(|&x| self.to_local(x).ok_or(GroupoidError::NotNested("K", "H")))
            .collect::<Result<Vec<_>, _>>()?;
        WideSubgroupoid::new(self.groupoid.clone(), members)
    }

    /// `H₁ × H₂` inside `G₁ × G₂`.
    pub fn product(a: &WideSubgroupoid, b: &WideSubgroupoid, parent: Arc<FiniteGroupoid>) -> Result<Self, GroupoidError> {
        let n2 = b.parent.len();
        let members = a.members.iter().flat_map(|&x| b.members.iter().map(move |&y| x * n2 + y));
        Self::new(parent, members)
    }
}

/// The left `G`-space `G/H` with a fixed representative per coset.
///
/// Cosets are numbered by ascending default representative (the smallest
/// element id in the coset); that numbering is kept when representatives are
/// changed with [`CosetSpace::with_representatives`].
#[derive(Clone, Debug)]
pub struct CosetSpace {
    sub: WideSubgroupoid,
    coset_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    representative: Vec<usize>,
    moment: Vec<usize>,
    over_unit: Vec<Vec<usize>>,
    /// Row-major `|G| × #cosets`.
    action: Vec<Option<usize>>,
}

impl CosetSpace {
    pub fn new(sub: &WideSubgroupoid) -> Self {
        let g = sub.parent().clone();
        let n = g.len();
        let mut coset_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for x in g.elements() {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let c = members.len();
            let mut coset: Vec<usize> = sub.range_fiber(g.domain(x)).map(|xi| g.mul(x, xi)).collect();
            coset.sort_unstable();
            for &y in &coset {
                coset_of[y] = c;
            }
            members.push(coset);
        }
        let representative: Vec<usize> = members.iter().map(|m| m[0]).collect();
        let moment: Vec<usize> = representative.iter().map(|&x| g.range(x)).collect();
        let mut over_unit = vec![Vec::new(); g.unit_count()];
        for (c, &u) in moment.iter().enumerate() {
            over_unit[g.upos(u)].push(c);
        }
        let k = members.len();
        let mut action = vec![None; n * k];
        for x in g.elements() {
            for c in 0..k {
                if g.domain(x) == moment[c] {
                    action[x * k + c] = Some(coset_of[g.mul(x, representative[c])]);
                }
            }
        }
        Self { sub: sub.clone(), coset_of, members, representative, moment, over_unit, action }
    }

    /// Same cosets, different representatives (`reps[c]` must lie in coset `c`).
    pub fn with_representatives(&self, reps: Vec<usize>) -> Result<Self, GroupoidError> {
        if reps.len() != self.len() {
            return Err(GroupoidError::LengthMismatch { table: "representatives", expected: self.len(), found: reps.len() });
        }
        for (c, &x) in reps.iter().enumerate() {
            if x >= self.coset_of.len() || self.coset_of[x] != c {
                return Err(GroupoidError::BadRepresentative { coset: c, element: x });
            }
        }
        Ok(Self { representative: reps, ..self.clone() })
    }

    pub fn sub(&self) -> &WideSubgroupoid {
        &self.sub
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.sub.parent()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `q_H(x)`.
    pub fn coset_of(&self, x: usize) -> usize {
        self.coset_of[x]
    }

    pub fn members(&self, c: usize) -> &[usize] {
        &self.members[c]
    }

    pub fn representative(&self, c: usize) -> usize {
        self.representative[c]
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representative
    }

    /// `r_{G⁰}(C)`.
    pub fn moment(&self, c: usize) -> usize {
        self.moment[c]
    }

    /// `(G/H)^u` in coset order.
    pub fn over(&self, u: usize) -> &[usize] {
        &self.over_unit[self.groupoid().upos(u)]
    }

    /// `g·C`, defined when `d(g) = moment(C)`.
    pub fn act(&self, g: usize, c: usize) -> Option<usize> {
        self.action[g * self.len() + c]
    }

    /// The element `x_C⁻¹·y ∈ H` for `y` in coset `C`.
    pub fn offset_in_sub(&self, y: usize) -> usize {
        let g = self.groupoid();
        let c = self.coset_of[y];
        let h = g.mul(g.inverse(self.representative[c]), y);
        debug_assert!(self.sub.contains(h));
        h
    }

    /// Partition of the cosets into `G`-orbits.
    pub fn orbits(&self) -> CosetOrbits {
        let k = self.len();
        let mut uf = UnionFind::new(k);
        for x in self.groupoid().elements() {
            for c in 0..k {
                if let Some(d) = self.act(x, c) {
                    uf.union(c, d);
                }
            }
        }
        let orbits = uf.classes();
        let mut orbit_of = vec![0; k];
        for (i, orbit) in orbits.iter().enumerate() {
            for &c in orbit {
                orbit_of[c] = i;
            }
        }
        CosetOrbits { orbits, orbit_of }
    }

    /// Exhaustive check of the coset-space invariants.
    pub fn validate(&self) -> ValidationReport {
        let g = self.groupoid().clone();
        let mut rep = ValidationReport::new("coset space");
        let mut seen = vec![0usize; g.len()];
        for m in &self.members {
            for &x in m {
                seen[x] += 1;
            }
        }
        for x in g.elements() {
            rep.check(seen[x] == 1, "cosets partition G", || format!("element {x} lies in {} cosets", seen[x]));
        }
        for c in 0..self.len() {
            let m = self.moment[c];
            rep.check(self.members[c].contains(&self.representative[c]), "representative lies in its coset", || format!("coset {c}"));
            rep.check(self.members[c].iter().all(|&x| g.range(x) == m), "moment well defined", || format!("coset {c}"));
            rep.check(self.act(m, c) == Some(c), "units act trivially", || format!("coset {c}"));
        }
        for (x, y) in g.composable_pairs() {
            let xy = g.mul(x, y);
            for &c in self.over(g.domain(y)) {
                let lhs = self.act(xy, c);
                let rhs = self.act(y, c).and_then(|d| self.act(x, d));
                rep.check(lhs.is_some() && lhs == rhs, "(g₁g₂)·C = g₁·(g₂·C)", || format!("g₁ = {x}, g₂ = {y}, C = {c}"));
            }
        }
        for x in g.elements() {
            let mut image: Vec<usize> = self.over(g.domain(x)).iter().filter_map(|&c| self.act(x, c)).collect();
            image.sort_unstable();
            rep.check(image == self.over(g.range(x)), "g acts bijectively between moment fibers", || format!("g = {x}"));
        }
        for x in g.elements() {
            for &y in g.range_fiber(g.range(x)) {
                let same = self.coset_of[x] == self.coset_of[y];
                let in_h = self.sub.contains(g.mul(g.inverse(x), y));
                rep.check(same == in_h, "q(x) = q(y) iff x⁻¹y ∈ H", || format!("x = {x}, y = {y}"));
            }
        }
        for (x, y) in g.composable_pairs() {
            let xy = g.mul(x, y);
            rep.check(self.act(x, self.coset_of[y]) == Some(self.coset_of[xy]), "q(g·y) = g·q(y)", || format!("g = {x}, y = {y}"));
        }
        rep
    }
}

/// Orbits of `G` on `G/H`, ordered by their smallest coset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetOrbits {
    pub orbits: Vec<Vec<usize>>,
    pub orbit_of: Vec<usize>,
}

impl CosetOrbits {
    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Classes sorted internally and by smallest member.
    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for a in 0..n {
            let r = self.find(a);
            by_root[r].push(a);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn s3() -> Arc<FiniteGroupoid> {
        Arc::new(catalog::s3())
    }

    #[test]
    fn pair_groupoid_shapes() {
        let p1 = pair_groupoid(1).unwrap();
        assert_eq!((p1.len(), p1.unit_count()), (1, 1));
        let p2 = pair_groupoid(2).unwrap();
        assert_eq!(p2.len(), 4);
        assert_eq!(p2.range_fiber(p2.units()[0]).len(), 2);
        assert!(p2.validate().passed());
        assert!(pair_groupoid(3).unwrap().validate().passed());
        assert_eq!(pair_groupoid(0), Err(GroupoidError::EmptyPairGroupoid));
    }

    #[test]
    fn corrupted_inverse_is_reported_with_witness() {
        let p2 = pair_groupoid(2).unwrap();
        // (0,1) has id 1; point its inverse at itself.
        let mut inverse: Vec<usize> = p2.elements().map(|x| p2.inverse(x)).collect();
        inverse[1] = 1;
        let products: Vec<_> = p2.composable_pairs().map(|(x, y)| (x, y, p2.mul(x, y))).collect();
        let bad = FiniteGroupoid::from_tables(
            4,
            p2.units(),
            p2.elements().map(|x| p2.range(x)).collect(),
            p2.elements().map(|x| p2.domain(x)).collect(),
            inverse,
            &products,
        )
        .unwrap();
        let report = bad.validate();
        assert!(!report.passed());
        let inv = report.violations.iter().find(|v| v.axiom == "inverse involution").unwrap();
        assert!(inv.witness.contains("element 2"), "{}", inv.witness);
    }

    #[test]
    fn group_tables() {
        let c2 = group_groupoid(&catalog::cyclic_table(2)).unwrap();
        assert_eq!((c2.len(), c2.unit_count()), (2, 1));
        let s3 = catalog::s3();
        assert_eq!(s3.len(), 6);
        assert!(s3.validate().passed());
        // a commutative but non-associative magma: a∘b = -(a+b) mod 3
        let magma: Vec<Vec<usize>> = (0..3).map(|a| (0..3).map(|b| (6 - a - b) % 3).collect()).collect();
        assert!(matches!(group_groupoid(&magma), Err(GroupoidError::NotAGroup(_))));
        let no_identity = vec![vec![0, 0], vec![0, 0]];
        assert!(matches!(group_groupoid(&no_identity), Err(GroupoidError::NotAGroup(_))));
    }

    #[test]
    fn action_groupoids() {
        let c2 = catalog::cyclic_table(2);
        let swap = action_groupoid(&c2, &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(swap.len(), 4);
        assert!(swap.is_transitive());
        assert!(swap.validate().passed());

        let trivial = action_groupoid(&[vec![0]], &[vec![0, 1, 2]]).unwrap();
        assert_eq!(trivial.len(), 3);
        assert_eq!(trivial.unit_count(), 3);

        let g = catalog::s3_action();
        assert_eq!(g.len(), 18);
        assert!(g.validate().passed());
        for &u in g.units() {
            assert_eq!(g.isotropy(u).order(), 2);
        }

        let broken = action_groupoid(&c2, &[vec![0, 1], vec![0, 0]]);
        assert!(matches!(broken, Err(GroupoidError::NotAnAction(_))));
    }

    #[test]
    fn product_groupoids() {
        let p2 = pair_groupoid(2).unwrap();
        let c3 = group_groupoid(&catalog::cyclic_table(3)).unwrap();
        let p = product_groupoid(&p2, &c3);
        assert_eq!((p.len(), p.unit_count()), (12, 2));
        let t = pair_groupoid(1).unwrap();
        assert_eq!(product_groupoid(&p2, &t), p2);
        let ps3 = catalog::p2xs3();
        assert!(ps3.validate().passed());
        assert!(ps3.is_transitive());
        for &u in ps3.units() {
            let iso = ps3.isotropy(u);
            assert_eq!(iso.order(), 6);
            // S3 is non-abelian
            let gi = &iso.group;
            assert!(gi.composable_pairs().any(|(a, b)| gi.mul(a, b) != gi.mul(b, a)));
        }
    }

    #[test]
    fn transitivity() {
        assert!(pair_groupoid(2).unwrap().is_transitive());
        assert_eq!(pair_groupoid(2).unwrap().isotropy(0).order(), 1);
        let bundle = catalog::c2_bundle();
        assert!(!bundle.is_transitive());
        assert_eq!(bundle.unit_orbits().len(), 2);
    }

    #[test]
    fn subgroupoids() {
        let g = s3();
        assert!(WideSubgroupoid::new(g.clone(), [0]).is_ok());
        let a3 = WideSubgroupoid::new(g.clone(), catalog::A3).unwrap();
        assert_eq!(a3.groupoid().len(), 3);
        // e, the transposition 1 and the 3-cycle 3
        let err = WideSubgroupoid::new(g.clone(), [0, 1, 3]).unwrap_err();
        assert!(matches!(err, GroupoidError::NotClosedUnderInverse { .. } | GroupoidError::NotClosedUnderProduct { .. }));
        assert_eq!(WideSubgroupoid::new(g.clone(), [3, 4]).unwrap_err(), GroupoidError::NotWide(0));
        assert_eq!(WideSubgroupoid::new(g, [0, 9]).unwrap_err(), GroupoidError::MemberOutOfRange(9));
    }

    #[test]
    fn cosets_s3_a3() {
        let g = s3();
        let a3 = WideSubgroupoid::new(g, catalog::A3).unwrap();
        let cs = CosetSpace::new(&a3);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.members(0), &[0, 3, 4]);
        assert_eq!(cs.members(1), &[1, 2, 5]);
        assert!(cs.validate().passed());
        let orbits = cs.orbits();
        assert_eq!(orbits.orbits, vec![vec![0, 1]]);
        assert_eq!(cs.act(1, 0), Some(1));
    }

    #[test]
    fn cosets_of_full_and_units() {
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        let full = CosetSpace::new(&WideSubgroupoid::full(p2.clone()));
        assert_eq!(full.len(), 2);
        for &u in p2.units() {
            assert_eq!(full.over(u).len(), 1);
        }
        let units = CosetSpace::new(&WideSubgroupoid::units_only(p2.clone()));
        assert_eq!(units.len(), 4);
        for &u in p2.units() {
            assert_eq!(units.over(u).len(), 2);
        }
        assert!(units.validate().passed());
    }

    #[test]
    fn orbits_of_group_bundle() {
        let g = Arc::new(catalog::c2_bundle());
        let cs = CosetSpace::new(&WideSubgroupoid::units_only(g));
        assert_eq!(cs.orbits().len(), 2);
        let p2 = Arc::new(pair_groupoid(2).unwrap());
        // orbits are labelled by the domain of the arrow
        assert_eq!(CosetSpace::new(&WideSubgroupoid::units_only(p2)).orbits().len(), 2);
    }

    #[test]
    fn representatives_can_be_replaced() {
        let a3 = WideSubgroupoid::new(s3(), catalog::A3).unwrap();
        let cs = CosetSpace::new(&a3);
        let moved = cs.with_representatives(vec![4, 5]).unwrap();
        assert_eq!(moved.representatives(), &[4, 5]);
        assert!(moved.validate().passed());
        assert_eq!(cs.with_representatives(vec![1, 5]).unwrap_err(), GroupoidError::BadRepresentative { coset: 0, element: 1 });
    }

    #[test]
    fn fixture_structure_laws() {
        for (name, g) in catalog::groupoids() {
            let report = g.validate();
            assert!(report.passed(), "{name}: {report}");
            // left translation G^{d(x)} → G^{r(x)} is a bijection
            for x in g.elements() {
                let mut image: Vec<usize> = g.range_fiber(g.domain(x)).iter().map(|&y| g.mul(x, y)).collect();
                image.sort_unstable();
                assert_eq!(image, g.range_fiber(g.range(x)), "{name}: x = {x}");
            }
        }
    }

    #[test]
    fn dangling_product_is_named() {
        let err = FiniteGroupoid::from_tables(1, &[0], vec![0], vec![0], vec![0], &[(0, 0, 0), (0, 3, 0)]).unwrap_err();
        assert_eq!(err, GroupoidError::DanglingProduct { x: 0, y: 3, xy: 0 });
        assert!(err.to_string().contains("[0, 3, 0]"));
    }
}
