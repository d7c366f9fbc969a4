//! Testing terms and separation experiments.
//!
//! Every element `a` of a type's web induces two closed terms: a positive
//! test `ptest(a)` of type `nat -> s` and a negative test `ntest(a)` of type
//! `nat -> s -> nat`. Both consume a single `nat`-typed random source; the
//! number of source coordinates they read is given by the arities
//! [`arity`]`(a) = (plen, nlen)`. The map
//! `phi_w : u -> [[ntest(a)]](u)(w)_0` is an entire function of the first
//! `nlen(a)` coordinates of `u`, and the coefficient of its square-free
//! monomial `u_0 u_1 ... u_{nlen-1}` is exactly the coefficient `w_a` of the
//! tested value. Two denotations differing at `a` therefore differ at some
//! rational source distribution, which a grid search finds and an observation
//! context confirms operationally.
//!
//! Coefficients themselves are recovered by exact multivariate interpolation
//! (tensor-product Newton/Vandermonde over rational grids), restricted to
//! first-order types where the web indices are plain multisets of numerals.

use std::collections::BTreeMap;

use num::Zero;
use thiserror::Error;

use crate::denot::{eval, Env, EvalConfig, EvalCtx, SemValue};
use crate::operational::{explore, ExploreError};
use crate::rat::{one, rat_int, zero, Rat};
use crate::stdlib;
use crate::syntax::{
    abs, app, apps, ite, num, typecheck_closed, var, Ctx, FillError, ObservationContext, Term,
    Type, TypeError, TypingContext,
};

/// An element of the web of a type: a natural number at ground type, a
/// (finite multiset of argument points, result point) pair at arrow type.
/// Multiset arguments are kept sorted, so structural equality is multiset
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum WebElem {
    Nat(u64),
    Arrow {
        args: Vec<WebElem>,
        result: Box<WebElem>,
    },
}

impl WebElem {
    pub fn arrow(mut args: Vec<WebElem>, result: WebElem) -> WebElem {
        args.sort();
        WebElem::Arrow {
            args,
            result: Box::new(result),
        }
    }

    /// Number of tree nodes.
    pub fn size(&self) -> u64 {
        match self {
            WebElem::Nat(_) => 1,
            WebElem::Arrow { args, result } => {
                1 + args.iter().map(WebElem::size).sum::<u64>() + result.size()
            }
        }
    }

    pub fn in_web(&self, ty: &Type) -> bool {
        match (self, ty) {
            (WebElem::Nat(_), Type::Nat) => true,
            (WebElem::Arrow { args, result }, Type::Arrow(dom, cod)) => {
                args.iter().all(|b| b.in_web(dom)) && result.in_web(cod)
            }
            _ => false,
        }
    }
}

/// Numbers of random-source coordinates consumed by the positive and
/// negative testing terms for a web point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestArity {
    pub plen: u64,
    pub nlen: u64,
}

pub fn arity(a: &WebElem) -> TestArity {
    match a {
        WebElem::Nat(_) => TestArity { plen: 0, nlen: 0 },
        WebElem::Arrow { args, result } => {
            let r = arity(result);
            let k = args.len() as u64;
            let mut plen = r.plen;
            let mut nlen = r.nlen + k;
            for b in args {
                let ab = arity(b);
                plen += ab.nlen;
                nlen += ab.plen;
            }
            TestArity { plen, nlen }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaError {
    #[error("web element {0:?} does not belong to the web of `{1}`")]
    NotInWeb(WebElem, Type),
    #[error("the two terms have different types: `{0}` vs `{1}`")]
    TypeMismatch(Type, Type),
    #[error("ill-typed input term: {0}")]
    IllTyped(#[from] TypeError),
    #[error("coefficient extraction needs a first-order type (nat -> ... -> nat), got `{0}`")]
    FirstOrderOnly(Type),
    #[error("interpolation grid reuses a coordinate; system is singular")]
    SingularGrid,
    #[error("degree bound {bound} exceeded: residual check failed at an off-grid point")]
    DegreeBoundExceeded { bound: u32 },
    #[error("exploration failed: {0}")]
    Explore(#[from] ExploreError),
    #[error("context construction failed: {0}")]
    Fill(#[from] FillError),
}

/// Routes the random source past the first `offset` coordinates: evaluates
/// the source once, returns `value - offset` when `value >= offset`, and
/// diverges otherwise. Denotationally this is exactly the left shift of the
/// source distribution by `offset`.
fn shifted_source(source: Term, offset: u64) -> Term {
    if offset == 0 {
        return source;
    }
    let mut lowered = var("y");
    for _ in 0..offset {
        lowered = app(stdlib::pred(), lowered);
    }
    let guard = ite(
        apps(stdlib::cmp(), [num(offset), var("y")]),
        lowered,
        "w",
        stdlib::omega(&Type::Nat),
    );
    stdlib::let_("y", source, &guard)
}

/// The positive testing term: `|- ptest(a) : nat -> s` for `a` in the web of
/// `s`. Its denotation at source `u` depends on at most `plen(a)` coordinates.
pub fn ptest(a: &WebElem, sigma: &Type) -> Result<Term, FaError> {
    if !a.in_web(sigma) {
        return Err(FaError::NotInWeb(a.clone(), sigma.clone()));
    }
    Ok(ptest_checked(a, sigma))
}

fn ptest_checked(a: &WebElem, sigma: &Type) -> Term {
    match (a, sigma) {
        (WebElem::Nat(n), Type::Nat) => abs("xi", Type::Nat, num(*n)),
        (WebElem::Arrow { args, result }, Type::Arrow(dom, cod)) => {
            let k = args.len() as u64;
            // Scrutinee: the product of the negative tests of the argument
            // points, each reading its own window of the source.
            let mut offset = 0u64;
            let mut checks = Vec::new();
            for b in args {
                let nb = ntest_checked(b, dom);
                checks.push(apps(
                    nb,
                    [shifted_source(var("xi"), offset), var("x")],
                ));
                offset += arity(b).nlen;
            }
            let scrutinee = apps(stdlib::pprod(k), checks);
            let pass = app(
                ptest_checked(result, cod),
                shifted_source(var("xi"), offset),
            );
            let body = ite(scrutinee, pass, "z", stdlib::omega(cod));
            abs("xi", Type::Nat, abs("x", dom.as_ref().clone(), body))
        }
        _ => unreachable!("membership checked by the caller"),
    }
}

/// The negative testing term: `|- ntest(a) : nat -> s -> nat`. Its
/// denotation at source `u` depends on at most `nlen(a)` coordinates, and the
/// coefficient of `u_0 ... u_{nlen-1}` in `u -> [[ntest(a)]](u)(w)_0` is `w_a`.
pub fn ntest(a: &WebElem, sigma: &Type) -> Result<Term, FaError> {
    if !a.in_web(sigma) {
        return Err(FaError::NotInWeb(a.clone(), sigma.clone()));
    }
    Ok(ntest_checked(a, sigma))
}

fn ntest_checked(a: &WebElem, sigma: &Type) -> Term {
    match (a, sigma) {
        (WebElem::Nat(n), Type::Nat) => abs("xi", Type::Nat, stdlib::probe(*n)),
        (WebElem::Arrow { args, result }, Type::Arrow(dom, cod)) => {
            let k = args.len() as u64;
            // Probe the tested function at a source-directed mixture of the
            // argument points' positive tests.
            let mut offset = k;
            let mut candidates = vec![var("xi")];
            for b in args {
                let pb = ptest_checked(b, dom);
                candidates.push(app(pb, shifted_source(var("xi"), offset)));
                offset += arity(b).plen;
            }
            let probe_arg = apps(stdlib::pchoose(k, dom), candidates);
            let applied = app(var("f"), probe_arg);
            let outer = apps(
                ntest_checked(result, cod),
                [shifted_source(var("xi"), offset), applied],
            );
            abs("xi", Type::Nat, abs("f", sigma.clone(), outer))
        }
        _ => unreachable!("membership checked by the caller"),
    }
}

/// Configuration for the full-abstraction experiments.
#[derive(Debug, Clone)]
pub struct FaConfig {
    pub eval: EvalConfig,
    /// Per-variable interpolation degree bound.
    pub interp_degree: u32,
    /// Separation grid denominator `D`: candidate sources have coordinates in
    /// `{0, 1/D, ..., 1}`.
    pub grid_denom: u64,
}

impl Default for FaConfig {
    fn default() -> Self {
        FaConfig {
            eval: EvalConfig::default(),
            interp_degree: 3,
            grid_denom: 4,
        }
    }
}

/// `phi_{[[M]]}(u)`: the ground-0 coordinate of `[[ntest(a)]]` applied to the
/// source vector `u` and then to `[[M]]`.
pub fn phi(a: &WebElem, m: &Term, u: &[Rat], cfg: &FaConfig) -> Result<Rat, FaError> {
    let sigma = typecheck_closed(m)?;
    let nt = ntest(a, &sigma)?;
    let ctx = EvalCtx::<Rat>::new(cfg.eval.clone());
    let ntv = eval(&nt, &Env::empty(), &ctx);
    let mv = eval(m, &Env::empty(), &ctx);
    let mut padded = u.to_vec();
    padded.resize(cfg.eval.nat_trunc, zero());
    let out = ntv.apply(&SemValue::Ground(padded)).apply(&mv);
    Ok(out.as_ground()[0].clone())
}

// ---------------------------------------------------------------------------
// Exact interpolation
// ---------------------------------------------------------------------------

/// Multivariate polynomial as a map from exponent vectors to coefficients.
pub type MPoly = BTreeMap<Vec<u32>, Rat>;

/// Coefficients (ascending degree) of the unique polynomial of degree
/// `< xs.len()` through the points `(xs[i], ys[i])`, by Newton divided
/// differences. Fails if two nodes coincide.
pub fn vandermonde_solve(xs: &[Rat], ys: &[Rat]) -> Result<Vec<Rat>, FaError> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    // Divided differences.
    let mut dd: Vec<Rat> = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            let denom = &xs[i] - &xs[i - level];
            if denom.is_zero() {
                return Err(FaError::SingularGrid);
            }
            dd[i] = (&dd[i] - &dd[i - 1]) / denom;
        }
    }
    // Expand the Newton basis into monomial coefficients.
    let mut coeffs = vec![zero(); n];
    let mut basis = vec![one()]; // product_{j < i} (x - xs[j])
    for (i, d) in dd.iter().enumerate() {
        for (slot, b) in coeffs.iter_mut().zip(&basis) {
            *slot += d * b;
        }
        if i + 1 < n {
            // basis *= (x - xs[i])
            let mut next = vec![zero(); basis.len() + 1];
            for (j, b) in basis.iter().enumerate() {
                next[j + 1] += b;
                next[j] -= b * &xs[i];
            }
            basis = next;
        }
    }
    Ok(coeffs)
}

/// Tensor-product interpolation: reconstructs the polynomial (per-variable
/// degree `< grids[v].len()`) agreeing with `f` on the full grid.
pub fn interpolate(
    grids: &[Vec<Rat>],
    f: &mut dyn FnMut(&[Rat]) -> Result<Rat, FaError>,
) -> Result<MPoly, FaError> {
    fn go(
        grids: &[Vec<Rat>],
        prefix: &mut Vec<Rat>,
        f: &mut dyn FnMut(&[Rat]) -> Result<Rat, FaError>,
    ) -> Result<MPoly, FaError> {
        if grids.is_empty() {
            let v = f(prefix)?;
            let mut p = MPoly::new();
            if !v.is_zero() {
                p.insert(Vec::new(), v);
            }
            return Ok(p);
        }
        let nodes = &grids[0];
        let mut tails: Vec<MPoly> = Vec::with_capacity(nodes.len());
        for x in nodes {
            prefix.push(x.clone());
            tails.push(go(&grids[1..], prefix, f)?);
            prefix.pop();
        }
        // Union of tail monomials, then one 1-D solve per tail monomial.
        let mut keys: Vec<Vec<u32>> = tails.iter().flat_map(|p| p.keys().cloned()).collect();
        keys.sort();
        keys.dedup();
        let mut out = MPoly::new();
        for key in keys {
            let ys: Vec<Rat> = tails
                .iter()
                .map(|p| p.get(&key).cloned().unwrap_or_else(zero))
                .collect();
            let coeffs = vandermonde_solve(nodes, &ys)?;
            for (deg, c) in coeffs.into_iter().enumerate() {
                if !c.is_zero() {
                    let mut full = Vec::with_capacity(key.len() + 1);
                    full.push(deg as u32);
                    full.extend(key.iter().copied());
                    out.insert(full, c);
                }
            }
        }
        Ok(out)
    }
    go(grids, &mut Vec::new(), f)
}

pub fn eval_mpoly(p: &MPoly, point: &[Rat]) -> Rat {
    let mut acc = zero();
    for (exps, c) in p {
        let mut term = c.clone();
        for (x, e) in point.iter().zip(exps) {
            term *= num::pow::pow(x.clone(), *e as usize);
        }
        acc += term;
    }
    acc
}

/// Interpolation grid for one block of `m` variables with per-variable degree
/// `d`: nodes `{1/(d+2), ..., (d+1)/(d+2)}` scaled by `1/m` so that every
/// grid point keeps the block inside the sub-probability simplex.
fn block_grid(d: u32, block_size: usize) -> Vec<Rat> {
    let scale = rat_int(block_size.max(1) as i64) * rat_int((d + 2) as i64);
    (1..=(d + 1) as i64)
        .map(|i| rat_int(i) / &scale)
        .collect()
}

fn off_grid_point(d: u32, block_size: usize, salt: i64) -> Rat {
    // Nodes use denominator d+2; this uses d+3, so it is never on the grid.
    rat_int(1) / (rat_int(block_size.max(1) as i64) * rat_int((d + 3) as i64 + salt))
}

// ---------------------------------------------------------------------------
// Coefficient extraction (first-order types)
// ---------------------------------------------------------------------------

/// Splits a first-order web point into per-argument multisets of numerals
/// plus the output index: `([m_1], ([m_2], ... n))` becomes `([m_1, m_2, ...], n)`.
fn first_order_blocks(a: &WebElem, arity_k: usize) -> Option<(Vec<BTreeMap<u64, u64>>, u64)> {
    if arity_k == 0 {
        return match a {
            WebElem::Nat(n) => Some((Vec::new(), *n)),
            _ => None,
        };
    }
    match a {
        WebElem::Arrow { args, result } => {
            let mut block = BTreeMap::new();
            for b in args {
                match b {
                    WebElem::Nat(i) => *block.entry(*i).or_insert(0) += 1,
                    _ => return None,
                }
            }
            let (mut rest, out) = first_order_blocks(result, arity_k - 1)?;
            rest.insert(0, block);
            Some((rest, out))
        }
        _ => None,
    }
}

/// The coefficient `w_a` of the denotation of `M` (a closed term of
/// first-order type `nat -> ... -> nat`) at the web point `a`, recovered by
/// exact interpolation. Off-grid residual checks detect a function whose
/// degree exceeds the configured bound.
pub fn extract_coefficient(m: &Term, a: &WebElem, cfg: &FaConfig) -> Result<Rat, FaError> {
    let ty = typecheck_closed(m)?;
    if !a.in_web(&ty) {
        return Err(FaError::NotInWeb(a.clone(), ty));
    }
    let (arg_tys, res) = ty.uncurry();
    if *res != Type::Nat || arg_tys.iter().any(|t| **t != Type::Nat) {
        return Err(FaError::FirstOrderOnly(ty));
    }
    let k = arg_tys.len();
    let (blocks, out_index) =
        first_order_blocks(a, k).ok_or_else(|| FaError::NotInWeb(a.clone(), ty.clone()))?;
    if out_index as usize >= cfg.eval.nat_trunc {
        return Ok(zero());
    }
    let d = cfg.interp_degree;
    for block in &blocks {
        if block.values().any(|&c| c > d as u64) {
            return Err(FaError::DegreeBoundExceeded { bound: d });
        }
    }

    // Variables: for each argument block, the atoms in its multiset support.
    let vars: Vec<(usize, u64)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(j, b)| b.keys().map(move |&i| (j, i)))
        .collect();
    let block_sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();

    let ctx = EvalCtx::<Rat>::new(cfg.eval.clone());
    let base = eval(m, &Env::empty(), &ctx);
    let n_trunc = cfg.eval.nat_trunc;
    let mut evaluate = |point: &[Rat]| -> Result<Rat, FaError> {
        let mut val = base.clone();
        for (j, _block) in blocks.iter().enumerate() {
            let mut arg = vec![zero(); n_trunc];
            for ((bj, atom), x) in vars.iter().zip(point) {
                if *bj == j {
                    arg[*atom as usize] = x.clone();
                }
            }
            val = val.apply(&SemValue::Ground(arg));
        }
        Ok(val.as_ground()[out_index as usize].clone())
    };

    let grids: Vec<Vec<Rat>> = vars
        .iter()
        .map(|(j, _)| block_grid(d, block_sizes[*j]))
        .collect();
    let poly = interpolate(&grids, &mut evaluate)?;

    // Residual check at off-grid points.
    for salt in 0..2 {
        let probe: Vec<Rat> = vars
            .iter()
            .map(|(j, _)| off_grid_point(d, block_sizes[*j], salt))
            .collect();
        if eval_mpoly(&poly, &probe) != evaluate(&probe)? {
            return Err(FaError::DegreeBoundExceeded { bound: d });
        }
    }

    let target: Vec<u32> = vars
        .iter()
        .map(|(j, atom)| blocks[*j].get(atom).copied().unwrap_or(0) as u32)
        .collect();
    Ok(poly.get(&target).cloned().unwrap_or_else(zero))
}

// ---------------------------------------------------------------------------
// The one-coefficient law and separation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct OneCoefReport {
    /// Coefficient of `u_0 ... u_{nlen-1}` in the interpolated `phi`.
    pub interpolated: Rat,
    /// The same coefficient recovered directly from `[[M]]`.
    pub extracted: Rat,
}

impl OneCoefReport {
    pub fn agrees(&self) -> bool {
        self.interpolated == self.extracted
    }
}

/// Checks that the coefficient of the square-free monomial
/// `u_0 u_1 ... u_{nlen(a)-1}` in `phi_{[[M]]}` equals the coefficient of
/// `[[M]]` at `a` (the latter by direct extraction).
pub fn check_one_coef(a: &WebElem, m: &Term, cfg: &FaConfig) -> Result<OneCoefReport, FaError> {
    let nlen = arity(a).nlen as usize;
    let d = cfg.interp_degree;
    let grids: Vec<Vec<Rat>> = (0..nlen).map(|_| block_grid(d, nlen)).collect();
    let mut evaluate = |point: &[Rat]| phi(a, m, point, cfg);
    let poly = interpolate(&grids, &mut evaluate)?;
    for salt in 0..2 {
        let probe: Vec<Rat> = (0..nlen).map(|_| off_grid_point(d, nlen, salt)).collect();
        if eval_mpoly(&poly, &probe) != evaluate(&probe)? {
            return Err(FaError::DegreeBoundExceeded { bound: d });
        }
    }
    let target = vec![1u32; nlen];
    let interpolated = poly.get(&target).cloned().unwrap_or_else(zero);
    let extracted = extract_coefficient(m, a, cfg)?;
    Ok(OneCoefReport {
        interpolated,
        extracted,
    })
}

/// A successful separation: the witnessing source distribution, the two
/// denotational observation values, and the observation context realizing
/// them operationally.
#[derive(Debug, Clone)]
pub struct SeparationResult {
    pub point: WebElem,
    pub probs: Vec<Rat>,
    pub denot: (Rat, Rat),
    pub context: ObservationContext,
    pub operational: Option<(Rat, Rat)>,
}

#[derive(Debug, Clone)]
pub enum SeparateOutcome {
    Found(Box<SeparationResult>),
    /// The grid was too coarse to expose the difference (or there is none).
    NotFound,
}

/// Grid-searches source distributions `q` in `{0, 1/D, ..., 1}^{nlen(a)}`
/// with `sum q <= 1` for one where the two denotational observations differ,
/// taking the lexicographically least hit. On success builds the observation
/// context `ntest(a) (ran q) []` and, when `confirm_steps` is given, runs
/// both filled contexts operationally.
pub fn separate(
    m1: &Term,
    m2: &Term,
    a: &WebElem,
    cfg: &FaConfig,
    confirm_steps: Option<u64>,
) -> Result<SeparateOutcome, FaError> {
    let t1 = typecheck_closed(m1)?;
    let t2 = typecheck_closed(m2)?;
    if t1 != t2 {
        return Err(FaError::TypeMismatch(t1, t2));
    }
    if !a.in_web(&t1) {
        return Err(FaError::NotInWeb(a.clone(), t1));
    }
    let nlen = arity(a).nlen as usize;
    let d = cfg.grid_denom;

    let mut found: Option<(Vec<Rat>, Rat, Rat)> = None;
    let mut point = vec![0u64; nlen];
    'grid: loop {
        if point.iter().sum::<u64>() <= d {
            let q: Vec<Rat> = point
                .iter()
                .map(|&i| rat_int(i as i64) / rat_int(d as i64))
                .collect();
            let v1 = phi(a, m1, &q, cfg)?;
            let v2 = phi(a, m2, &q, cfg)?;
            if v1 != v2 {
                found = Some((q, v1, v2));
                break 'grid;
            }
        }
        // next point in lexicographic order
        let mut idx = nlen;
        loop {
            if idx == 0 {
                break 'grid;
            }
            idx -= 1;
            if point[idx] < d {
                point[idx] += 1;
                for p in point.iter_mut().skip(idx + 1) {
                    *p = 0;
                }
                break;
            }
        }
        if nlen == 0 {
            break;
        }
    }

    let Some((q, v1, v2)) = found else {
        return Ok(SeparateOutcome::NotFound);
    };

    let context = separation_context(a, &t1, &q)?;
    let operational = match confirm_steps {
        None => None,
        Some(k) => Some(obs_distinguish(m1, m2, &context, k)?),
    };
    Ok(SeparateOutcome::Found(Box::new(SeparationResult {
        point: a.clone(),
        probs: q,
        denot: (v1, v2),
        context,
        operational,
    })))
}

/// The observation context `ntest(a) (ran q) []` for closed terms of type
/// `sigma`. An empty `q` (nothing to draw) uses the diverging source.
pub fn separation_context(
    a: &WebElem,
    sigma: &Type,
    q: &[Rat],
) -> Result<ObservationContext, FaError> {
    let nt = ntest(a, sigma)?;
    let source = if q.is_empty() {
        stdlib::omega(&Type::Nat)
    } else {
        stdlib::ran(q).expect("grid points are valid sub-probability weights")
    };
    let shape = Ctx::App(
        Box::new(Ctx::from_term(&apps(nt, [source]))),
        Box::new(Ctx::Hole),
    );
    Ok(ObservationContext::new(
        shape,
        TypingContext::empty(),
        sigma.clone(),
    ))
}

/// Fills the context with each term and compares the exact probabilities of
/// reaching `0` within `k` steps.
pub fn obs_distinguish(
    m1: &Term,
    m2: &Term,
    context: &ObservationContext,
    k: u64,
) -> Result<(Rat, Rat), FaError> {
    let c1 = context.fill(m1)?;
    let c2 = context.fill(m2)?;
    let d1 = explore(&c1, k)?;
    let d2 = explore(&c2, k)?;
    Ok((d1.mass_of_num(0), d2.mass_of_num(0)))
}

/// All web elements of `ty` with node count and numeral values bounded by
/// `size`, in deterministic (sorted) order.
pub fn enumerate_web(ty: &Type, size: u64) -> Vec<WebElem> {
    fn multisets(candidates: &[WebElem], budget: u64, start: usize) -> Vec<Vec<WebElem>> {
        // Nondecreasing index sequences keep each multiset canonical.
        let mut out = vec![Vec::new()];
        for i in start..candidates.len() {
            let c = &candidates[i];
            let cost = c.size();
            if cost <= budget {
                for mut rest in multisets(candidates, budget - cost, i) {
                    rest.insert(0, c.clone());
                    out.push(rest);
                }
            }
        }
        out
    }
    let mut out = Vec::new();
    match ty {
        Type::Nat => {
            for n in 0..=size {
                if size >= 1 {
                    out.push(WebElem::Nat(n));
                }
            }
        }
        Type::Arrow(dom, cod) => {
            if size >= 2 {
                let dom_elems = enumerate_web(dom, size.saturating_sub(2));
                for result in enumerate_web(cod, size.saturating_sub(2)) {
                    let budget = size - 1 - result.size();
                    for args in multisets(&dom_elems, budget, 0) {
                        out.push(WebElem::arrow(args, result.clone()));
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `\x:nat. if x then 0 else [z] diverge` — maps `0` to `0`, evaluating its
/// argument once. Its denotation sends `u` to `u_0 e_0`.
pub fn guard_zero_once() -> Term {
    abs(
        "x",
        Type::Nat,
        ite(var("x"), num(0), "z", stdlib::omega(&Type::Nat)),
    )
}

/// Like [`guard_zero_once`] but re-evaluates the argument: its denotation
/// sends `u` to `u_0^2 e_0`, pointwise below yet incomparable as a
/// coefficient vector.
pub fn guard_zero_twice() -> Term {
    abs(
        "x",
        Type::Nat,
        ite(
            var("x"),
            ite(var("x"), num(0), "z'", stdlib::omega(&Type::Nat)),
            "z",
            stdlib::omega(&Type::Nat),
        ),
    )
}
