//! Compositional denotational evaluation.
//!
//! Ground-type meanings are sub-probability vectors over the truncated web
//! `{0, ..., N-1}`; arrow-type meanings are host function values. Fixpoints
//! are monotone iteration `f^K(0)` from the bottom element. Everything the
//! evaluator reports is an exact lower approximation of the untruncated
//! semantics, nondecreasing in both the truncation `N` and the iteration
//! budget `K`:
//!
//! - mass shifted past the truncation boundary (by `succ`, or a numeral
//!   literal `>= N`) is dropped and the total drop is tracked;
//! - the conditional's branch sum stops at scrutinee index `N-1`, which is
//!   no extra loss since the scrutinee vector carries no mass beyond it;
//! - `f^K(0) <= sup_k f^k(0)` pointwise, with the last iteration's ground
//!   delta reported as a convergence probe.
//!
//! Arithmetic is chosen by the scalar type: [`Rat`] for exact runs (the
//! default everywhere correctness matters), `f64` for quick estimates.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num::ToPrimitive;

use crate::rat::{one, zero, Rat};
use crate::syntax::{subst, typecheck, Term, Type, TypingContext};

/// Scalar arithmetic used by the evaluator.
pub trait Weight: Clone + PartialEq + PartialOrd + fmt::Debug + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn add(&self, other: &Self) -> Self;
    /// Difference; callers only subtract along monotone pairs.
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
}

impl Weight for Rat {
    fn zero() -> Self {
        zero()
    }
    fn one() -> Self {
        one()
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        num::Zero::is_zero(self)
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rat(r: &Rat) -> Self {
        r.to_f64().expect("rational out of f64 range")
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// Finite approximation policy: web truncation and fixpoint iteration budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalConfig {
    /// Ground web is `{0, ..., nat_trunc - 1}`; must be at least 1.
    pub nat_trunc: usize,
    /// Number of fixpoint iterations `K` (global, no per-site adaptivity).
    pub fix_iters: u64,
}

impl EvalConfig {
    pub fn new(nat_trunc: usize, fix_iters: u64) -> Self {
        assert!(nat_trunc >= 1, "ground web needs at least one point");
        EvalConfig {
            nat_trunc,
            fix_iters,
        }
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig::new(32, 100)
    }
}

/// A denotational value: a ground sub-probability vector or a function.
#[derive(Clone)]
pub enum SemValue<W: Weight> {
    Ground(Vec<W>),
    Func(FuncValue<W>),
}

/// Arrow-type value. The closure is monotone in its argument; the defining
/// term is retained for diagnostics only.
#[derive(Clone)]
pub struct FuncValue<W: Weight> {
    origin: Rc<str>,
    #[allow(clippy::type_complexity)]
    apply: Rc<dyn Fn(&SemValue<W>) -> SemValue<W>>,
}

impl<W: Weight> FuncValue<W> {
    pub fn new(origin: impl Into<String>, f: impl Fn(&SemValue<W>) -> SemValue<W> + 'static) -> Self {
        FuncValue {
            origin: Rc::from(origin.into()),
            apply: Rc::new(f),
        }
    }

    pub fn apply(&self, v: &SemValue<W>) -> SemValue<W> {
        (self.apply)(v)
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }
}

impl<W: Weight> fmt::Debug for SemValue<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemValue::Ground(v) => write!(f, "Ground({v:?})"),
            SemValue::Func(g) => write!(f, "<function {}>", g.origin),
        }
    }
}

// Equality is decidable only at ground type; function values always compare
// unequal. Used solely for the exact early exit of fixpoint iteration, where
// a false negative merely skips the shortcut.
impl<W: Weight> PartialEq for SemValue<W> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SemValue::Ground(a), SemValue::Ground(b)) => a == b,
            _ => false,
        }
    }
}

impl<W: Weight> SemValue<W> {
    pub fn as_ground(&self) -> &Vec<W> {
        match self {
            SemValue::Ground(v) => v,
            SemValue::Func(g) => panic!("expected a ground value, found function {}", g.origin),
        }
    }

    pub fn as_func(&self) -> &FuncValue<W> {
        match self {
            SemValue::Func(g) => g,
            SemValue::Ground(_) => panic!("expected a function value, found a ground vector"),
        }
    }

    pub fn apply(&self, v: &SemValue<W>) -> SemValue<W> {
        self.as_func().apply(v)
    }

    /// Ground vector of a unit mass at `n` (dropping it if `n >= N`).
    pub fn unit(n: u64, ctx: &EvalCtx<W>) -> Self {
        let mut v = vec![W::zero(); ctx.cfg.nat_trunc];
        if (n as usize) < ctx.cfg.nat_trunc {
            v[n as usize] = W::one();
        } else {
            ctx.record_drop(W::one());
        }
        SemValue::Ground(v)
    }
}

/// Environment: values and types for the free variables, kept in sync.
#[derive(Clone)]
pub struct Env<W: Weight> {
    vals: HashMap<String, SemValue<W>>,
    tys: TypingContext,
}

impl<W: Weight> Env<W> {
    pub fn empty() -> Self {
        Env {
            vals: HashMap::new(),
            tys: TypingContext::empty(),
        }
    }

    pub fn extended(&self, name: &str, val: SemValue<W>, ty: Type) -> Self {
        let mut vals = self.vals.clone();
        vals.insert(name.to_string(), val);
        let mut tys = TypingContext::empty();
        for (n, t) in self.tys.bindings() {
            if n != name {
                tys = tys.extended(n, t.clone());
            }
        }
        Env {
            vals,
            tys: tys.extended(name, ty),
        }
    }

    pub fn types(&self) -> &TypingContext {
        &self.tys
    }
}

/// Evaluation context: the configuration plus shared diagnostic accumulators.
#[derive(Clone)]
pub struct EvalCtx<W: Weight> {
    pub cfg: EvalConfig,
    dropped: Rc<RefCell<W>>,
    last_fix_delta: Rc<RefCell<W>>,
}

impl<W: Weight> EvalCtx<W> {
    pub fn new(cfg: EvalConfig) -> Self {
        EvalCtx {
            cfg,
            dropped: Rc::new(RefCell::new(W::zero())),
            last_fix_delta: Rc::new(RefCell::new(W::zero())),
        }
    }

    fn record_drop(&self, w: W) {
        if !w.is_zero() {
            let mut d = self.dropped.borrow_mut();
            *d = d.add(&w);
        }
    }

    fn record_fix_delta(&self, w: W) {
        let mut d = self.last_fix_delta.borrow_mut();
        if w > *d {
            *d = w;
        }
    }

    /// Total mass dropped at the truncation boundary so far (each distinct
    /// evaluation counted once). Zero means the reported ground coordinates
    /// lost nothing to truncation.
    pub fn dropped_mass(&self) -> W {
        self.dropped.borrow().clone()
    }

    /// Largest final-iteration ground delta over all fixpoints evaluated so
    /// far; raise `fix_iters` when this is not zero.
    pub fn last_fix_delta(&self) -> W {
        self.last_fix_delta.borrow().clone()
    }
}

/// The least element of a type: the zero vector at ground type, the constant
/// bottom function at arrow types.
pub fn bottom<W: Weight>(ty: &Type, n: usize) -> SemValue<W> {
    match ty {
        Type::Nat => SemValue::Ground(vec![W::zero(); n]),
        Type::Arrow(_, cod) => {
            let cod = cod.as_ref().clone();
            SemValue::Func(FuncValue::new("bottom", move |_| bottom(&cod, n)))
        }
    }
}

/// Linear combination of values of a common shape; coefficients must sum to
/// at most 1 for the result to stay in the model. At arrow types the
/// combination is formed pointwise, lazily.
pub fn lincomb<W: Weight>(pairs: Vec<(W, SemValue<W>)>) -> SemValue<W> {
    assert!(!pairs.is_empty(), "lincomb needs at least one value");
    match &pairs[0].1 {
        SemValue::Ground(first) => {
            let mut acc = vec![W::zero(); first.len()];
            for (c, v) in &pairs {
                if c.is_zero() {
                    continue;
                }
                for (slot, x) in acc.iter_mut().zip(v.as_ground()) {
                    *slot = slot.add(&c.mul(x));
                }
            }
            SemValue::Ground(acc)
        }
        SemValue::Func(_) => SemValue::Func(FuncValue::new("lincomb", move |arg| {
            lincomb(
                pairs
                    .iter()
                    .map(|(c, v)| (c.clone(), v.apply(arg)))
                    .collect(),
            )
        })),
    }
}

fn succ_ground<W: Weight>(v: &[W], ctx: &EvalCtx<W>) -> Vec<W> {
    let n = v.len();
    let mut out = vec![W::zero(); n];
    for i in 0..n.saturating_sub(1) {
        out[i + 1] = v[i].clone();
    }
    if n > 0 {
        ctx.record_drop(v[n - 1].clone());
    }
    out
}

// Fixpoint iterates are applied overwhelmingly at evaluated numerals (the
// conditional feeds its binder unit vectors), so each iterate caches its
// results at unit and zero ground arguments. Pure function, so caching is
// observationally transparent; it also avoids re-counting the same drop.
fn memoize_iterate<W: Weight>(g: SemValue<W>) -> SemValue<W> {
    match g {
        SemValue::Ground(_) => g,
        SemValue::Func(f) => {
            let cache: RefCell<HashMap<CacheKey, SemValue<W>>> = RefCell::new(HashMap::new());
            let origin = f.origin().to_string();
            SemValue::Func(FuncValue::new(origin, move |arg| {
                let key = cache_key(arg);
                if let Some(k) = &key {
                    if let Some(hit) = cache.borrow().get(k) {
                        return hit.clone();
                    }
                }
                let out = f.apply(arg);
                if let Some(k) = key {
                    cache.borrow_mut().insert(k, out.clone());
                }
                out
            }))
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum CacheKey {
    Zero,
    Unit(usize),
}

fn cache_key<W: Weight>(v: &SemValue<W>) -> Option<CacheKey> {
    let SemValue::Ground(g) = v else { return None };
    let mut unit = None;
    for (i, x) in g.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        if *x == W::one() && unit.is_none() {
            unit = Some(i);
        } else {
            return None;
        }
    }
    Some(match unit {
        None => CacheKey::Zero,
        Some(i) => CacheKey::Unit(i),
    })
}

/// Evaluates a term under an environment. The term must typecheck under the
/// environment's typing context; shape mismatches are caller bugs and panic.
pub fn eval<W: Weight>(m: &Term, env: &Env<W>, ctx: &EvalCtx<W>) -> SemValue<W> {
    match m {
        Term::Num(n) => SemValue::unit(*n, ctx),
        Term::Var(x) => match env.vals.get(x) {
            Some(v) => v.clone(),
            None => panic!("environment miss for variable `{x}`"),
        },
        Term::Coin(p) => {
            let n = ctx.cfg.nat_trunc;
            let mut v = vec![W::zero(); n];
            let p1 = W::from_rat(p);
            let p2 = W::from_rat(&(one() - p));
            v[0] = p1;
            if n > 1 {
                v[1] = p2;
            } else {
                ctx.record_drop(p2);
            }
            SemValue::Ground(v)
        }
        Term::Succ(b) => {
            let v = eval(b, env, ctx);
            SemValue::Ground(succ_ground(v.as_ground(), ctx))
        }
        Term::If {
            scrut,
            zero: zbr,
            var,
            succ: sbr,
        } => {
            let s = eval(scrut, env, ctx);
            let s = s.as_ground();
            let mut pairs = vec![(s[0].clone(), eval(zbr, env, ctx))];
            for idx in 1..s.len() {
                if s[idx].is_zero() {
                    continue;
                }
                let point = SemValue::unit((idx - 1) as u64, ctx);
                let inner = env.extended(var, point, Type::Nat);
                pairs.push((s[idx].clone(), eval(sbr, &inner, ctx)));
            }
            lincomb(pairs)
        }
        Term::App(f, a) => {
            let fv = eval(f, env, ctx);
            let av = eval(a, env, ctx);
            fv.apply(&av)
        }
        Term::Abs { var, annot, body } => {
            let env = env.clone();
            let ctx2 = ctx.clone();
            let var = var.clone();
            let annot = annot.clone();
            let body = body.as_ref().clone();
            let origin = format!("\\{var}:{annot}. ...");
            SemValue::Func(FuncValue::new(origin, move |arg| {
                let inner = env.extended(&var, arg.clone(), annot.clone());
                eval(&body, &inner, &ctx2)
            }))
        }
        Term::Fix(f) => {
            let fix_ty = match typecheck(env.types(), m) {
                Ok(t) => t,
                Err(e) => panic!("ill-typed fix body under evaluation: {e}"),
            };
            let fv = eval(f, env, ctx);
            let n = ctx.cfg.nat_trunc;
            let mut current = bottom::<W>(&fix_ty, n);
            let mut last_delta = W::zero();
            for _ in 0..ctx.cfg.fix_iters {
                let next = memoize_iterate(fv.apply(&current));
                if let (SemValue::Ground(old), SemValue::Ground(new)) = (&current, &next) {
                    let mut delta = W::zero();
                    for (a, b) in old.iter().zip(new) {
                        delta = delta.add(&b.sub(a));
                    }
                    last_delta = delta.clone();
                    if new == old {
                        current = next;
                        break;
                    }
                }
                current = next;
            }
            if matches!(current, SemValue::Ground(_)) {
                ctx.record_fix_delta(last_delta);
            }
            current
        }
    }
}

/// Full evaluation report for a closed ground-type term.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundReport<W: Weight> {
    pub dist: Vec<W>,
    pub dropped_mass: W,
    pub last_fix_delta: W,
}

impl<W: Weight> GroundReport<W> {
    pub fn total(&self) -> W {
        self.dist.iter().fold(W::zero(), |acc, x| acc.add(x))
    }
}

/// Evaluates a closed term of type `nat` to its truncated distribution,
/// together with the truncation/convergence diagnostics.
pub fn ground_report<W: Weight>(m: &Term, cfg: &EvalConfig) -> GroundReport<W> {
    let ctx = EvalCtx::new(cfg.clone());
    let v = eval(m, &Env::empty(), &ctx);
    GroundReport {
        dist: v.as_ground().clone(),
        dropped_mass: ctx.dropped_mass(),
        last_fix_delta: ctx.last_fix_delta(),
    }
}

/// Exact truncated distribution of a closed ground term.
pub fn ground_dist(m: &Term, cfg: &EvalConfig) -> Vec<Rat> {
    ground_report::<Rat>(m, cfg).dist
}

/// One-step invariance report: the distribution of `M` against the reduction-
/// weighted mixture of its successors' distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub lhs: Vec<Rat>,
    pub rhs: Vec<Rat>,
    pub max_abs_delta: Rat,
}

/// Compares `[[M]]` with `sum_{M'} Red(M, M') [[M']]` at the configured
/// resources. The discrepancy is exactly zero whenever nothing is dropped at
/// the truncation boundary and the fixpoint budget covers both sides.
pub fn check_invariance(m: &Term, cfg: &EvalConfig) -> InvarianceReport {
    let lhs = ground_dist(m, cfg);
    let branches = crate::operational::step(m).expect("closed well-typed term");
    let rhs = if branches.is_empty() {
        lhs.clone()
    } else {
        let mut acc = vec![zero(); cfg.nat_trunc];
        for b in &branches {
            let d = ground_dist(&b.target, cfg);
            for (slot, x) in acc.iter_mut().zip(&d) {
                *slot += &b.prob * x;
            }
        }
        acc
    };
    let mut max_abs = zero();
    for (a, b) in lhs.iter().zip(&rhs) {
        let d = if a >= b { a - b } else { b - a };
        if d > max_abs {
            max_abs = d;
        }
    }
    InvarianceReport {
        lhs,
        rhs,
        max_abs_delta: max_abs,
    }
}

/// The closed functional forms of the standard example programs, as functions
/// on truncated ground vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Pred,
    Add,
    Exp,
    Shift(u64),
    Cmp,
    Probe(u64),
    Pprod(u64),
    Pchoose(u64),
    Unif,
    Ran(Vec<Rat>),
}

impl Formula {
    pub fn arity(&self) -> usize {
        match self {
            Formula::Pred | Formula::Exp | Formula::Shift(_) | Formula::Probe(_) | Formula::Unif => 1,
            Formula::Add | Formula::Cmp => 2,
            Formula::Pprod(k) => *k as usize,
            Formula::Pchoose(k) => 1 + *k as usize,
            Formula::Ran(_) => 0,
        }
    }

    /// The term whose denotation the formula describes.
    pub fn term(&self) -> Term {
        use crate::stdlib;
        match self {
            Formula::Pred => stdlib::pred(),
            Formula::Add => stdlib::add(),
            Formula::Exp => stdlib::exp_(),
            Formula::Shift(k) => stdlib::shift(*k),
            Formula::Cmp => stdlib::cmp(),
            Formula::Probe(k) => stdlib::probe(*k),
            Formula::Pprod(k) => stdlib::pprod(*k),
            Formula::Pchoose(k) => stdlib::pchoose(*k, &Type::Nat),
            Formula::Unif => stdlib::unif(),
            Formula::Ran(ps) => stdlib::ran(ps).expect("valid weights"),
        }
    }

    /// Evaluates the closed form on truncated inputs, dropping exactly the
    /// mass the truncated evaluator drops.
    pub fn apply(&self, args: &[Vec<Rat>], n: usize) -> Vec<Rat> {
        let mut out = vec![zero(); n];
        match self {
            Formula::Pred => {
                let u = &args[0];
                if n >= 1 {
                    out[0] = u[0].clone() + u.get(1).cloned().unwrap_or_else(zero);
                }
                for i in 1..n.saturating_sub(1) {
                    out[i] = u[i + 1].clone();
                }
            }
            Formula::Add => {
                let (u, v) = (&args[0], &args[1]);
                for i in 0..n {
                    for j in 0..n - i {
                        out[i + j] += &u[i] * &v[j];
                    }
                }
            }
            Formula::Exp => {
                let u = &args[0];
                for (i, x) in u.iter().enumerate() {
                    let target = 1u128 << i.min(127);
                    if target < n as u128 {
                        out[target as usize] += x;
                    }
                }
            }
            Formula::Shift(k) => {
                let u = &args[0];
                for (i, x) in u.iter().enumerate() {
                    let t = i + *k as usize;
                    if t < n {
                        out[t] += x;
                    }
                }
            }
            Formula::Cmp => {
                let (u, v) = (&args[0], &args[1]);
                for i in 0..n {
                    for j in 0..n {
                        if i <= j {
                            out[0] += &u[i] * &v[j];
                        } else {
                            out[1] += &u[i] * &v[j];
                        }
                    }
                }
            }
            Formula::Probe(k) => {
                let u = &args[0];
                if let Some(x) = u.get(*k as usize) {
                    out[0] = x.clone();
                }
            }
            Formula::Pprod(_) => {
                let mut acc = one();
                for u in args {
                    acc *= &u[0];
                }
                out[0] = acc;
            }
            Formula::Pchoose(k) => {
                let u = &args[0];
                for i in 0..(*k as usize).min(u.len()) {
                    for (slot, x) in out.iter_mut().zip(&args[i + 1]) {
                        *slot += &u[i] * x;
                    }
                }
            }
            Formula::Unif => {
                let u = &args[0];
                for i in 0..n {
                    for (j, x) in u.iter().enumerate().skip(i) {
                        out[i] += x / crate::rat::rat_int((j + 1) as i64);
                    }
                }
            }
            Formula::Ran(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i < n {
                        out[i] = p.clone();
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormReport {
    pub cases: usize,
    pub max_abs_delta: Rat,
}

/// Evaluates the stdlib term denotationally on each sample argument tuple and
/// compares against the closed form, both restricted to the truncated web.
pub fn closed_form_check(
    formula: &Formula,
    samples: &[Vec<Vec<Rat>>],
    cfg: &EvalConfig,
) -> ClosedFormReport {
    let term = formula.term();
    let ctx = EvalCtx::new(cfg.clone());
    let base = eval(&term, &Env::empty(), &ctx);
    let mut max_abs = zero();
    for sample in samples {
        assert_eq!(sample.len(), formula.arity(), "wrong sample arity");
        let mut val = base.clone();
        for arg in sample {
            let mut padded = arg.clone();
            padded.resize(cfg.nat_trunc, zero());
            val = val.apply(&SemValue::Ground(padded));
        }
        let got = val.as_ground();
        let expected = formula.apply(sample, cfg.nat_trunc);
        for (a, b) in got.iter().zip(&expected) {
            let d = if a >= b { a - b } else { b - a };
            if d > max_abs {
                max_abs = d;
            }
        }
    }
    ClosedFormReport {
        cases: samples.len(),
        max_abs_delta: max_abs,
    }
}

/// Semantic substitution check at ground observations:
/// `[[M[P/x]]] = [[M]] with x bound to [[P]]`, exactly.
pub fn check_semantic_substitution(
    m: &Term,
    p: &Term,
    x: &str,
    x_ty: &Type,
    cfg: &EvalConfig,
) -> bool {
    let ctx = EvalCtx::new(cfg.clone());
    let pv = eval(p, &Env::empty(), &ctx);
    let env = Env::empty().extended(x, pv, x_ty.clone());
    let via_env = eval(m, &env, &ctx);
    let substituted = subst(m, p, x);
    let direct = eval(&substituted, &Env::empty(), &ctx);
    via_env.as_ground() == direct.as_ground()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};
    use crate::stdlib;
    use crate::syntax::{abs, app, apps, coin, ite, num, succ, var};

    fn cfg(n: usize, k: u64) -> EvalConfig {
        EvalConfig::new(n, k)
    }

    fn dist(m: &Term, c: &EvalConfig) -> Vec<Rat> {
        ground_dist(m, c)
    }

    fn unit_vec(n: usize, i: usize) -> Vec<Rat> {
        let mut v = vec![zero(); n];
        v[i] = one();
        v
    }

    #[test]
    fn coin_clause() {
        let d = dist(&coin(rat(1, 2)), &cfg(8, 10));
        assert_eq!(d[0], rat(1, 2));
        assert_eq!(d[1], rat(1, 2));
        assert!(d[2..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn numerals_and_succ() {
        let d = dist(&succ(num(2)), &cfg(8, 10));
        assert_eq!(d, unit_vec(8, 3));
        // Mass pushed past the boundary is dropped and reported.
        let r = ground_report::<Rat>(&succ(num(7)), &cfg(8, 10));
        assert!(r.dist.iter().all(|x| x.is_zero()));
        assert_eq!(r.dropped_mass, one());
        let r = ground_report::<Rat>(&num(9), &cfg(8, 10));
        assert_eq!(r.dropped_mass, one());
    }

    #[test]
    fn pred_of_two() {
        let d = dist(&app(stdlib::pred(), num(2)), &cfg(8, 20));
        assert_eq!(d, unit_vec(8, 1));
    }

    #[test]
    fn omega_is_bottom() {
        for k in [0, 1, 10, 100] {
            let d = dist(&stdlib::omega(&Type::Nat), &cfg(4, k));
            assert!(d.iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn add_of_two_coins_is_convolution() {
        let m = apps(stdlib::add(), [coin(rat(1, 2)), coin(rat(1, 2))]);
        let d = dist(&m, &cfg(8, 50));
        assert_eq!(d[0], rat(1, 4));
        assert_eq!(d[1], rat(1, 2));
        assert_eq!(d[2], rat(1, 4));
        assert!(d[3..].iter().all(|x| x.is_zero()));
    }

    #[test]
    fn ran_distribution() {
        let m = stdlib::ran(&[rat(1, 3), rat(2, 3)]).unwrap();
        let d = dist(&m, &cfg(8, 10));
        assert_eq!(d[0], rat(1, 3));
        assert_eq!(d[1], rat(2, 3));
    }

    #[test]
    fn unif_of_three_approaches_quarter_from_below() {
        // The retry loop is geometric: the K-th iterate is (1 - 2^-K)/4 on
        // each of 0..3, strictly below the limit 1/4 for every finite K.
        let m = app(stdlib::unif(), num(3));
        let c = cfg(16, 50);
        let d = dist(&m, &c);
        let tail = num::pow::pow(rat(1, 2), 50);
        let expected = (one() - tail) / rat_int(4);
        for i in 0..4 {
            assert_eq!(d[i], expected, "index {i}");
            assert!(d[i] < rat(1, 4));
        }
        // Monotone in K and bounded by the limit.
        let d10 = dist(&m, &cfg(16, 10));
        for i in 0..4 {
            assert!(d10[i] <= d[i]);
        }
        // The convergence probe sees the unfinished loop.
        let r = ground_report::<Rat>(&m, &c);
        assert!(r.last_fix_delta > zero());
    }

    #[test]
    fn bottom_is_below_everything_at_ground() {
        let b: SemValue<Rat> = bottom(&Type::Nat, 6);
        assert!(b.as_ground().iter().all(|x| x.is_zero()));
        let bf: SemValue<Rat> = bottom(&Type::nat_fn(1), 6);
        let applied = bf.apply(&SemValue::Ground(unit_vec(6, 2)));
        assert!(applied.as_ground().iter().all(|x| x.is_zero()));
        for m in [coin(rat(1, 3)), num(2), app(stdlib::pred(), num(0))] {
            let d = dist(&m, &cfg(6, 30));
            assert!(d.iter().all(|x| x >= &zero()));
        }
    }

    #[test]
    fn lincomb_identities() {
        let v = SemValue::Ground(vec![rat(1, 3), rat(1, 4), zero()]);
        let w = lincomb(vec![(one(), v.clone())]);
        assert_eq!(w.as_ground(), v.as_ground());
        let z = lincomb(vec![(zero(), v.clone()), (zero(), v.clone())]);
        assert!(z.as_ground().iter().all(|x| x.is_zero()));
        let mix = lincomb(vec![
            (rat(1, 2), SemValue::Ground(unit_vec(3, 0))),
            (rat(1, 2), SemValue::Ground(unit_vec(3, 1))),
        ]);
        assert_eq!(mix.as_ground(), &vec![rat(1, 2), rat(1, 2), zero()]);
    }

    #[test]
    fn sub_probability_invariant() {
        for m in [
            coin(rat(1, 3)),
            app(stdlib::unift(), num(2)),
            app(stdlib::unif(), num(2)),
            apps(stdlib::add(), [coin(rat(1, 2)), num(3)]),
            app(stdlib::exp_(), num(3)),
        ] {
            let r = ground_report::<Rat>(&m, &cfg(16, 60));
            assert!(r.total() <= one(), "total {:?}", r.total());
            assert!(r.dist.iter().all(|x| x >= &zero()));
        }
    }

    #[test]
    fn monotone_in_resources() {
        let m = app(stdlib::unif(), num(2));
        let small = dist(&m, &cfg(8, 10));
        let big_k = dist(&m, &cfg(8, 40));
        for (a, b) in small.iter().zip(&big_k) {
            assert!(a <= b);
        }
        let big_n = dist(&m, &cfg(16, 10));
        for (i, a) in small.iter().enumerate() {
            assert!(a <= &big_n[i]);
        }
    }

    #[test]
    fn invariance_examples() {
        let c = cfg(8, 40);
        let r = check_invariance(&coin(rat(1, 2)), &c);
        assert_eq!(r.max_abs_delta, zero());

        let r = check_invariance(&num(3), &c);
        assert_eq!(r.max_abs_delta, zero());

        let m = ite(coin(rat(1, 3)), num(0), "z", succ(var("z")));
        let r = check_invariance(&m, &c);
        assert_eq!(r.max_abs_delta, zero());
        assert_eq!(r.lhs[0], rat(1, 3));
        assert_eq!(r.lhs[1], rat(2, 3));
    }

    #[test]
    fn closed_forms_match_exactly() {
        let c = cfg(16, 40);
        let u = vec![rat(1, 4), rat(1, 4), rat(1, 2)];
        let v = vec![rat(1, 3), zero(), rat(1, 3), rat(1, 3)];
        let one_arg = vec![vec![u.clone()], vec![v.clone()]];
        let two_args = vec![vec![u.clone(), v.clone()], vec![v.clone(), u.clone()]];

        for f in [Formula::Pred, Formula::Exp, Formula::Shift(2), Formula::Probe(2)] {
            let r = closed_form_check(&f, &one_arg, &c);
            assert_eq!(r.max_abs_delta, zero(), "{f:?}");
        }
        for f in [Formula::Add, Formula::Cmp, Formula::Pprod(2)] {
            let r = closed_form_check(&f, &two_args, &c);
            assert_eq!(r.max_abs_delta, zero(), "{f:?}");
        }
        let r = closed_form_check(
            &Formula::Pchoose(2),
            &[vec![u.clone(), v.clone(), u.clone()]],
            &c,
        );
        assert_eq!(r.max_abs_delta, zero());
        let r = closed_form_check(&Formula::Ran(vec![rat(1, 2), rat(1, 4)]), &[vec![]], &c);
        assert_eq!(r.max_abs_delta, zero());

        // Pred on (1/4, 1/4, 1/2): the closed form gives (1/2, 1/2, 0, ...).
        let got = Formula::Pred.apply(&[u.clone()], 16);
        assert_eq!(got[0], rat(1, 2));
        assert_eq!(got[1], rat(1, 2));
        assert!(got[2..].iter().all(|x| x.is_zero()));

        // Pchoose over zero vectors is bottom.
        let zeroes = vec![zero(); 16];
        let r = closed_form_check(
            &Formula::Pchoose(2),
            &[vec![zeroes.clone(), zeroes.clone(), zeroes]],
            &c,
        );
        assert_eq!(r.max_abs_delta, zero());
    }

    #[test]
    fn unif_closed_form_within_the_geometric_tail() {
        // The loop iterate is short of the formula by at most 2^-K.
        let c = cfg(8, 50);
        let e3 = vec![zero(), zero(), zero(), one()];
        let r = closed_form_check(&Formula::Unif, &[vec![e3]], &c);
        assert!(r.max_abs_delta > zero());
        let tail = num::pow::pow(rat(1, 2), 50);
        assert!(r.max_abs_delta <= tail);
    }

    #[test]
    fn semantic_substitution_at_ground() {
        let c = cfg(8, 30);
        let cases: Vec<(Term, Term, &str)> = vec![
            (succ(var("x")), coin(rat(1, 3)), "x"),
            (
                ite(var("x"), num(0), "z", succ(var("z"))),
                coin(rat(1, 2)),
                "x",
            ),
            (
                apps(stdlib::add(), [var("x"), var("x")]),
                coin(rat(1, 2)),
                "x",
            ),
            (app(stdlib::pred(), succ(var("x"))), num(4), "x"),
        ];
        for (m, p, x) in &cases {
            assert!(
                check_semantic_substitution(m, p, x, &Type::Nat, &c),
                "failed on {m} [{p}/{x}]"
            );
        }
    }

    #[test]
    fn float_backend_tracks_exact_on_dyadic_cases() {
        let m = apps(stdlib::add(), [coin(rat(1, 2)), coin(rat(1, 2))]);
        let c = cfg(8, 50);
        let exact = ground_dist(&m, &c);
        let float = ground_report::<f64>(&m, &c).dist;
        for (e, f) in exact.iter().zip(&float) {
            let e = e.to_f64().unwrap();
            assert!((e - f).abs() < 1e-12);
        }
    }

    #[test]
    #[should_panic(expected = "environment miss")]
    fn unbound_variable_is_a_caller_bug() {
        let ctx = EvalCtx::<Rat>::new(cfg(4, 4));
        let _ = eval(&var("ghost"), &Env::empty(), &ctx);
    }
}
