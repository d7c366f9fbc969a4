//! Finite-web probabilistic coherence space algebra.
//!
//! Webs here are finite, ordered atom lists; vectors, matrices and
//! multiset-indexed (Kleisli) matrices are sparse maps with exact rational
//! entries. The exponential is degree-truncated: every operation takes an
//! explicit degree bound `d`, drops only monomials of degree `> d`, and is
//! exact on everything it retains (dropped contributions are nonnegative, so
//! retained values are simultaneously exact coordinates and lower bounds of
//! the untruncated objects).
//!
//! Membership predicates are provided for the concrete objects the evaluator
//! uses: the unit interval, the truncated naturals (sub-probability vectors),
//! and morphisms checked pointwise on sampled inputs. No general biorthogonal
//! closure is computed, and the dual-sup norm is only available where it has
//! a closed form (unit and truncated naturals).

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{One, Signed, Zero};

use crate::rat::{one, zero, Rat};

/// A finite multiset with atoms of type `A`. No zero multiplicities are
/// stored, so structural equality is multiset equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Multiset<A: Ord>(BTreeMap<A, u64>);

impl<A: Ord + Clone> Multiset<A> {
    pub fn empty() -> Self {
        Multiset(BTreeMap::new())
    }

    pub fn singleton(a: A) -> Self {
        Multiset::from_iter([a])
    }

    pub fn from_iter(items: impl IntoIterator<Item = A>) -> Self {
        let mut m = BTreeMap::new();
        for a in items {
            *m.entry(a).or_insert(0) += 1;
        }
        Multiset(m)
    }

    pub fn insert(&mut self, a: A, count: u64) {
        if count > 0 {
            *self.0.entry(a).or_insert(0) += count;
        }
    }

    pub fn multiplicity(&self, a: &A) -> u64 {
        self.0.get(a).copied().unwrap_or(0)
    }

    /// Total number of elements counted with multiplicity.
    pub fn degree(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn support(&self) -> impl Iterator<Item = &A> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&A, u64)> {
        self.0.iter().map(|(a, c)| (a, *c))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (a, c) in other.iter() {
            m.insert(a.clone(), c);
        }
        m
    }

    /// `prod_a m(a)!`
    pub fn factorial(&self) -> BigInt {
        self.0
            .values()
            .map(|&c| factorial(c))
            .fold(BigInt::one(), |acc, f| acc * f)
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `(#m)! / m!` — the number of distinct sequences presenting the multiset.
pub fn multinomial<A: Ord + Clone>(m: &Multiset<A>) -> BigInt {
    factorial(m.degree()) / m.factorial()
}

/// A finite web: distinct, ordered atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinWeb<A: Ord>(Vec<A>);

impl<A: Ord + Clone> FinWeb<A> {
    pub fn new(atoms: impl IntoIterator<Item = A>) -> Self {
        let atoms: Vec<A> = atoms.into_iter().collect();
        let mut seen = std::collections::BTreeSet::new();
        for a in &atoms {
            assert!(seen.insert(a.clone()), "duplicate atom in web");
        }
        FinWeb(atoms)
    }

    pub fn atoms(&self) -> &[A] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The truncated web of naturals `{0, ..., n-1}`.
pub fn nat_web(n: u64) -> FinWeb<u64> {
    FinWeb::new(0..n)
}

/// Sparse nonnegative vector over a web. Zero entries are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseVec<A: Ord>(BTreeMap<A, Rat>);

impl<A: Ord + Clone> SparseVec<A> {
    pub fn new() -> Self {
        SparseVec(BTreeMap::new())
    }

    pub fn unit(a: A) -> Self {
        let mut v = SparseVec::new();
        v.set(a, one());
        v
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (A, Rat)>) -> Self {
        let mut v = SparseVec::new();
        for (a, x) in entries {
            v.set(a, x);
        }
        v
    }

    pub fn set(&mut self, a: A, x: Rat) {
        assert!(!x.is_negative(), "vector entries must be nonnegative");
        if x.is_zero() {
            self.0.remove(&a);
        } else {
            self.0.insert(a, x);
        }
    }

    pub fn add_to(&mut self, a: A, x: &Rat) {
        let cur = self.get(&a) + x;
        self.set(a, cur);
    }

    pub fn get(&self, a: &A) -> Rat {
        self.0.get(a).cloned().unwrap_or_else(zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&A, &Rat)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Rat {
        self.0.values().fold(zero(), |acc, x| acc + x)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        SparseVec::from_entries(self.iter().map(|(a, x)| (a.clone(), x * c)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut v = self.clone();
        for (a, x) in other.iter() {
            v.add_to(a.clone(), x);
        }
        v
    }
}

/// `<u, u'> = sum_a u_a u'_a`.
pub fn pair<A: Ord + Clone>(u: &SparseVec<A>, v: &SparseVec<A>) -> Rat {
    u.iter().fold(zero(), |acc, (a, x)| acc + x * v.get(a))
}

/// Membership in the sub-probability object over the naturals: nonnegative
/// entries summing to at most 1. (Nonnegativity is a construction invariant
/// of [`SparseVec`].)
pub fn in_pcoh_nat<A: Ord + Clone>(u: &SparseVec<A>) -> bool {
    u.total() <= one()
}

/// Membership in the unit object: a single scalar in `[0, 1]`.
pub fn in_pcoh_one(x: &Rat) -> bool {
    !x.is_negative() && *x <= one()
}

/// Norm of a sub-probability vector over the naturals: the dual sup has the
/// closed form `sum_n u_n` there.
pub fn norm_nat<A: Ord + Clone>(u: &SparseVec<A>) -> Rat {
    u.total()
}

/// Sparse nonnegative matrix, entries indexed by `(input atom, output atom)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Mat<A: Ord, B: Ord>(BTreeMap<(A, B), Rat>);

impl<A: Ord + Clone, B: Ord + Clone> Mat<A, B> {
    pub fn new() -> Self {
        Mat(BTreeMap::new())
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (A, B, Rat)>) -> Self {
        let mut m = Mat::new();
        for (a, b, x) in entries {
            m.set(a, b, x);
        }
        m
    }

    pub fn identity(web: &FinWeb<A>) -> Mat<A, A> {
        Mat::from_entries(web.atoms().iter().map(|a| (a.clone(), a.clone(), one())))
    }

    pub fn set(&mut self, a: A, b: B, x: Rat) {
        assert!(!x.is_negative(), "matrix entries must be nonnegative");
        if x.is_zero() {
            self.0.remove(&(a, b));
        } else {
            self.0.insert((a, b), x);
        }
    }

    pub fn add_to(&mut self, a: A, b: B, x: &Rat) {
        let cur = self.get(&a, &b) + x;
        self.set(a, b, cur);
    }

    pub fn get(&self, a: &A, b: &B) -> Rat {
        self.0
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&A, &B, &Rat)> {
        self.0.iter().map(|((a, b), x)| (a, b, x))
    }

    /// Atoms with a nonzero row.
    pub fn row_support(&self) -> Vec<A> {
        let mut out: Vec<A> = self.0.keys().map(|(a, _)| a.clone()).collect();
        out.dedup();
        out
    }
}

/// `(t u)_b = sum_a t_{a,b} u_a`.
pub fn mat_apply<A: Ord + Clone, B: Ord + Clone>(t: &Mat<A, B>, u: &SparseVec<A>) -> SparseVec<B> {
    let mut out = SparseVec::new();
    for (a, b, x) in t.iter() {
        let ua = u.get(a);
        if !ua.is_zero() {
            out.add_to(b.clone(), &(x * ua));
        }
    }
    out
}

/// `u^m = prod_a u_a^{m(a)}`.
pub fn monomial<A: Ord + Clone>(u: &SparseVec<A>, m: &Multiset<A>) -> Rat {
    let mut acc = one();
    for (a, c) in m.iter() {
        let ua = u.get(a);
        if ua.is_zero() {
            return zero();
        }
        acc *= num::pow::pow(ua, c as usize);
    }
    acc
}

/// All multisets over `atoms` of degree at most `d`, in deterministic order.
pub fn multisets_up_to<A: Ord + Clone>(atoms: &[A], d: u64) -> Vec<Multiset<A>> {
    let mut out = Vec::new();
    let mut current = Multiset::empty();
    fn go<A: Ord + Clone>(
        atoms: &[A],
        idx: usize,
        remaining: u64,
        current: &mut Multiset<A>,
        out: &mut Vec<Multiset<A>>,
    ) {
        if idx == atoms.len() {
            out.push(current.clone());
            return;
        }
        for c in 0..=remaining {
            let mut next = current.clone();
            next.insert(atoms[idx].clone(), c);
            go(atoms, idx + 1, remaining - c, &mut next, out);
        }
    }
    go(atoms, 0, d, &mut current, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Promotion `!u`: the vector of all monomials `u^m`, truncated at degree `d`.
/// Entries at multisets not supported by `u` are zero and omitted.
pub fn prom<A: Ord + Clone>(u: &SparseVec<A>, d: u64) -> SparseVec<Multiset<A>> {
    let atoms: Vec<A> = u.iter().map(|(a, _)| a.clone()).collect();
    let mut out = SparseVec::new();
    for m in multisets_up_to(&atoms, d) {
        out.set(m.clone(), monomial(u, &m));
    }
    // The empty multiset always carries coefficient 1, even for u = 0.
    out.set(Multiset::empty(), one());
    out
}

/// The exponential of a matrix, truncated at degree `d`:
/// `(!t)_{m,n} = sum_{rho} n!/rho! t^rho` over contingency tables `rho`
/// with row marginals `m` and column marginals `n`. Entries vanish unless
/// `deg m = deg n`. Exponential in `d`; intended for desk-scale webs.
pub fn excl<A: Ord + Clone, B: Ord + Clone>(
    t: &Mat<A, B>,
    d: u64,
) -> Mat<Multiset<A>, Multiset<B>> {
    // Nonzero columns per row of t.
    let mut rows: BTreeMap<A, Vec<(B, Rat)>> = BTreeMap::new();
    for (a, b, x) in t.iter() {
        rows.entry(a.clone()).or_default().push((b.clone(), x.clone()));
    }
    let row_atoms: Vec<A> = rows.keys().cloned().collect();

    let mut out = Mat::new();
    out.set(Multiset::empty(), Multiset::empty(), one());

    for mu in multisets_up_to(&row_atoms, d) {
        if mu.is_empty() {
            continue;
        }
        // Enumerate tables row by row: distribute mu(a) over the nonzero
        // columns of row a, pruning rows as we go.
        let mu_rows: Vec<(&A, u64)> = mu.iter().collect();
        // state: (partial column marginal, t^rho so far, rho! so far)
        let mut states: Vec<(Multiset<B>, Rat, BigInt)> =
            vec![(Multiset::empty(), one(), BigInt::one())];
        for (a, count) in mu_rows {
            let cols = &rows[a];
            let splits = compositions(count, cols.len());
            let mut next = Vec::new();
            for (nu_part, weight, fct) in &states {
                for split in &splits {
                    let mut nu = nu_part.clone();
                    let mut w = weight.clone();
                    let mut fc = fct.clone();
                    for (slot, &k) in split.iter().enumerate() {
                        if k > 0 {
                            let (b, x) = &cols[slot];
                            nu.insert(b.clone(), k);
                            w *= num::pow::pow(x.clone(), k as usize);
                            fc *= factorial(k);
                        }
                    }
                    next.push((nu, w, fc));
                }
            }
            states = next;
        }
        for (nu, weight, rho_fact) in states {
            let coeff = Rat::from_integer(nu.factorial() / rho_fact);
            out.add_to(mu.clone(), nu, &(coeff * weight));
        }
    }
    out
}

/// All ways to write `total` as an ordered sum of `slots` naturals.
fn compositions(total: u64, slots: usize) -> Vec<Vec<u64>> {
    if slots == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, slots - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Dereliction: `(der)_{m,a} = 1` iff `m = [a]`.
pub fn der<A: Ord + Clone>(web: &FinWeb<A>) -> Mat<Multiset<A>, A> {
    Mat::from_entries(
        web.atoms()
            .iter()
            .map(|a| (Multiset::singleton(a.clone()), a.clone(), one())),
    )
}

/// Digging: `(digg)_{m, [m_1..m_k]} = 1` iff `m_1 + ... + m_k = m`. The outer
/// multiset is truncated to at most `d` parts, each of degree at most `d`
/// (parts may be empty, so the truncation is what keeps rows finite).
pub fn digg<A: Ord + Clone>(web: &FinWeb<A>, d: u64) -> Mat<Multiset<A>, Multiset<Multiset<A>>> {
    let parts = multisets_up_to(web.atoms(), d);
    let mut out = Mat::new();
    for outer in multisets_up_to(&parts, d) {
        let mut sum = Multiset::empty();
        for (part, count) in outer.iter() {
            for _ in 0..count {
                sum = sum.union(part);
            }
        }
        if sum.degree() <= d {
            out.set(sum, outer, one());
        }
    }
    out
}

/// A matrix indexed by `(multiset over the input web, output atom)`, acting
/// as the analytic function `u -> sum_m s_{m,b} u^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KleisliMat<A: Ord, B: Ord> {
    coeffs: BTreeMap<(Multiset<A>, B), Rat>,
    pub degree_bound: u64,
}

impl<A: Ord + Clone, B: Ord + Clone> KleisliMat<A, B> {
    pub fn new(degree_bound: u64) -> Self {
        KleisliMat {
            coeffs: BTreeMap::new(),
            degree_bound,
        }
    }

    pub fn from_entries(
        degree_bound: u64,
        entries: impl IntoIterator<Item = (Multiset<A>, B, Rat)>,
    ) -> Self {
        let mut s = KleisliMat::new(degree_bound);
        for (m, b, x) in entries {
            s.set(m, b, x);
        }
        s
    }

    /// The identity function as a Kleisli matrix (dereliction).
    pub fn der(web: &FinWeb<A>, degree_bound: u64) -> KleisliMat<A, A> {
        KleisliMat::from_entries(
            degree_bound,
            web.atoms()
                .iter()
                .map(|a| (Multiset::singleton(a.clone()), a.clone(), one())),
        )
    }

    pub fn set(&mut self, m: Multiset<A>, b: B, x: Rat) {
        assert!(!x.is_negative());
        assert!(
            m.degree() <= self.degree_bound,
            "key degree exceeds the bound"
        );
        if x.is_zero() {
            self.coeffs.remove(&(m, b));
        } else {
            self.coeffs.insert((m, b), x);
        }
    }

    pub fn get(&self, m: &Multiset<A>, b: &B) -> Rat {
        self.coeffs
            .get(&(m.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Multiset<A>, &B, &Rat)> {
        self.coeffs.iter().map(|((m, b), x)| (m, b, x))
    }
}

/// `Fun s(u) = s . !u`: evaluates the analytic function at `u`.
pub fn kleisli_apply<A: Ord + Clone, B: Ord + Clone>(
    s: &KleisliMat<A, B>,
    u: &SparseVec<A>,
) -> SparseVec<B> {
    let mut out = SparseVec::new();
    for (m, b, x) in s.iter() {
        let um = monomial(u, m);
        if !um.is_zero() {
            out.add_to(b.clone(), &(x * um));
        }
    }
    out
}

type Poly<A> = BTreeMap<Multiset<A>, Rat>;

fn poly_mul<A: Ord + Clone>(p: &Poly<A>, q: &Poly<A>, d: u64) -> Poly<A> {
    let mut out: Poly<A> = BTreeMap::new();
    for (m1, x1) in p {
        for (m2, x2) in q {
            if m1.degree() + m2.degree() <= d {
                let key = m1.union(m2);
                let entry = out.entry(key).or_insert_with(zero);
                *entry += x1 * x2;
            }
        }
    }
    out.retain(|_, x| !x.is_zero());
    out
}

fn poly_one<A: Ord + Clone>() -> Poly<A> {
    BTreeMap::from([(Multiset::empty(), one())])
}

/// Kleisli composition `g . !f`, truncated at degree `d`: the coefficients of
/// the composite power series `u -> Fun g(Fun f(u))`. Exact on every retained
/// key (a composite monomial of degree `<= d` only ever factors through
/// intermediate monomials of degree `<= d`).
pub fn kleisli_compose<A: Ord + Clone, B: Ord + Clone, C: Ord + Clone>(
    f: &KleisliMat<A, B>,
    g: &KleisliMat<B, C>,
    d: u64,
) -> KleisliMat<A, C> {
    // Coordinate functions of f as polynomials in the input monomials.
    let mut coords: BTreeMap<B, Poly<A>> = BTreeMap::new();
    for (m, b, x) in f.iter() {
        coords
            .entry(b.clone())
            .or_default()
            .insert(m.clone(), x.clone());
    }
    let mut out = KleisliMat::new(d);
    for (nu, c, gc) in g.iter() {
        let mut term = poly_one::<A>();
        let mut dead = false;
        for (b, count) in nu.iter() {
            match coords.get(b) {
                None => {
                    dead = true;
                    break;
                }
                Some(pb) => {
                    for _ in 0..count {
                        term = poly_mul(&term, pb, d);
                    }
                }
            }
        }
        if dead {
            continue;
        }
        for (m, x) in term {
            out.add_to_entry(m, c.clone(), &(gc * &x));
        }
    }
    out
}

impl<A: Ord + Clone, B: Ord + Clone> KleisliMat<A, B> {
    fn add_to_entry(&mut self, m: Multiset<A>, b: B, x: &Rat) {
        let cur = self.get(&m, &b) + x;
        self.set(m, b, cur);
    }
}

/// The coalgebra structure on the (truncated) naturals: `h_{n, m} = 1` iff
/// `m = k[n]` for some `k <= d`. It replicates evaluated numerals:
/// `h . e_n = !e_n` on the truncated supports.
pub fn nat_coalgebra(n_atoms: u64, d: u64) -> Mat<u64, Multiset<u64>> {
    let mut out = Mat::new();
    for n in 0..n_atoms {
        for k in 0..=d {
            let mut m = Multiset::empty();
            m.insert(n, k);
            out.set(n, m, one());
        }
    }
    out
}
