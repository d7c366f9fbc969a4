//! Operational semantics: weak-head reduction as a stochastic process.
//!
//! One-step reduction fires the leftmost outermost redex and never reduces
//! under abstractions; numerals and abstractions are the weak-normal forms.
//! Viewing reduction as a Markov chain whose stationary states are the
//! weak-normal terms, [`Explorer`] iterates the chain with exact rational
//! masses: after `k` steps the absorbed mass at a weak-normal `V` is exactly
//! the probability of reaching `V` from the start term in at most `k` steps,
//! a lower bound (monotone in `k`) of the limit probability.
//!
//! States are merged under alpha-equivalence, keyed by the canonical nameless
//! form; fix-unfolding would otherwise spawn unboundedly many copies of the
//! same state.

use std::collections::BTreeMap;

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::rat::{rat_str, Rat};
use crate::syntax::{subst, Nameless, Term};

/// One probabilistic branch of a reduction step. Probabilities are in
/// `(0, 1]`; zero-probability branches are dropped at the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub prob: Rat,
    pub target: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("cannot reduce an open term: free variable `{0}` in redex position")]
    OpenTerm(String),
    #[error("ill-typed redex: {0}")]
    IllTyped(String),
}

/// All one-step reductions of `M`. Empty iff `M` is weak-normal. At most two
/// branches are ever produced, and only by a coin.
pub fn step(m: &Term) -> Result<Vec<Branch>, StepError> {
    let one = || Rat::one();
    match m {
        Term::Num(_) | Term::Abs { .. } => Ok(Vec::new()),
        Term::Var(x) => Err(StepError::OpenTerm(x.clone())),
        Term::Coin(p) => {
            let q = Rat::one() - p;
            let mut branches = Vec::new();
            if !p.is_zero() {
                branches.push(Branch {
                    prob: p.clone(),
                    target: Term::Num(0),
                });
            }
            if !q.is_zero() {
                branches.push(Branch {
                    prob: q,
                    target: Term::Num(1),
                });
            }
            Ok(branches)
        }
        Term::Fix(f) => Ok(vec![Branch {
            prob: one(),
            target: Term::App(f.clone(), Box::new(m.clone())),
        }]),
        Term::Succ(b) => match b.as_ref() {
            Term::Num(n) => Ok(vec![Branch {
                prob: one(),
                target: Term::Num(n + 1),
            }]),
            inner if is_weak_normal(inner) => {
                Err(StepError::IllTyped("succ of a non-numeral value".into()))
            }
            inner => Ok(map_context(step(inner)?, |t| Term::Succ(Box::new(t)))),
        },
        Term::If {
            scrut,
            zero,
            var,
            succ,
        } => match scrut.as_ref() {
            Term::Num(0) => Ok(vec![Branch {
                prob: one(),
                target: zero.as_ref().clone(),
            }]),
            Term::Num(n) => Ok(vec![Branch {
                prob: one(),
                target: subst(succ, &Term::Num(n - 1), var),
            }]),
            inner if is_weak_normal(inner) => Err(StepError::IllTyped(
                "conditional scrutinee is a non-numeral value".into(),
            )),
            inner => {
                let zero = zero.clone();
                let var = var.clone();
                let succ = succ.clone();
                Ok(map_context(step(inner)?, move |t| Term::If {
                    scrut: Box::new(t),
                    zero: zero.clone(),
                    var: var.clone(),
                    succ: succ.clone(),
                }))
            }
        },
        Term::App(f, a) => match f.as_ref() {
            Term::Abs { var, body, .. } => Ok(vec![Branch {
                prob: one(),
                target: subst(body, a, var),
            }]),
            inner if is_weak_normal(inner) => Err(StepError::IllTyped(
                "application head is a non-function value".into(),
            )),
            inner => {
                let a = a.clone();
                Ok(map_context(step(inner)?, move |t| {
                    Term::App(Box::new(t), a.clone())
                }))
            }
        },
    }
}

fn map_context(branches: Vec<Branch>, wrap: impl Fn(Term) -> Term) -> Vec<Branch> {
    branches
        .into_iter()
        .map(|b| Branch {
            prob: b.prob,
            target: wrap(b.target),
        })
        .collect()
}

/// True iff no reduction applies. For closed well-typed terms these are
/// exactly the numerals and abstractions.
pub fn is_weak_normal(m: &Term) -> bool {
    matches!(m, Term::Num(_) | Term::Abs { .. })
}

/// Exact sub-probability distribution over weak-normal forms reached within
/// a bounded number of steps. `mass + residual + pruned = 1` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    mass: BTreeMap<Nameless, (Term, Rat)>,
    /// Mass still on non-normal states after `steps` steps.
    pub residual: Rat,
    /// Mass discarded by the optional frontier floor (see [`ExploreConfig`]).
    pub pruned: Rat,
    pub steps: u64,
}

impl Distribution {
    /// Probability of the weak-normal form `v` (0 if absent); terms are
    /// compared up to alpha-equivalence.
    pub fn mass_of(&self, v: &Term) -> Rat {
        self.mass
            .get(&v.nameless())
            .map(|(_, p)| p.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// Probability of the numeral `n`.
    pub fn mass_of_num(&self, n: u64) -> Rat {
        self.mass_of(&Term::Num(n))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Rat)> {
        self.mass.values().map(|(t, p)| (t, p))
    }

    pub fn total_mass(&self) -> Rat {
        self.mass
            .values()
            .fold(Rat::zero(), |acc, (_, p)| acc + p)
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// JSON view: numerals appear under `"value"` as numbers, other normal
    /// forms as their concrete syntax.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .iter()
            .map(|(t, p)| {
                let value = match t {
                    Term::Num(n) => json!(n),
                    other => json!(other.to_string()),
                };
                json!({ "value": value, "prob": rat_str(p) })
            })
            .collect();
        json!({
            "distribution": entries,
            "residual": rat_str(&self.residual),
            "steps": self.steps,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    /// Hard cap on the number of simultaneously tracked non-normal states.
    pub max_frontier: usize,
    /// Optional mass floor: frontier states whose mass drops strictly below
    /// the floor are moved to `pruned` (still counted in the mass balance).
    /// `None` keeps exploration exact.
    pub mass_floor: Option<Rat>,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            max_frontier: 1_000_000,
            mass_floor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExploreError {
    #[error("frontier size {size} exceeded the cap {cap} at step {at_step}")]
    FrontierLimit {
        size: usize,
        cap: usize,
        at_step: u64,
    },
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Incremental absorbing-chain iteration. Each [`Explorer::advance`] applies
/// one step of the reduction matrix to the current mass vector.
pub struct Explorer {
    frontier: BTreeMap<Nameless, (Term, Rat)>,
    absorbed: BTreeMap<Nameless, (Term, Rat)>,
    pruned: Rat,
    steps: u64,
    config: ExploreConfig,
}

impl Explorer {
    pub fn new(m: Term) -> Self {
        Explorer::with_config(m, ExploreConfig::default())
    }

    pub fn with_config(m: Term, config: ExploreConfig) -> Self {
        let mut frontier = BTreeMap::new();
        let mut absorbed = BTreeMap::new();
        let key = m.nameless();
        if is_weak_normal(&m) {
            absorbed.insert(key, (m, Rat::one()));
        } else {
            frontier.insert(key, (m, Rat::one()));
        }
        Explorer {
            frontier,
            absorbed,
            pruned: Rat::zero(),
            steps: 0,
            config,
        }
    }

    pub fn frontier_size(&self) -> usize {
        self.frontier.len()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies one step of the chain. Absorbing (weak-normal) states keep
    /// their mass; every frontier state distributes its mass over its
    /// branches.
    pub fn advance(&mut self) -> Result<(), ExploreError> {
        if self.frontier.is_empty() {
            self.steps += 1;
            return Ok(());
        }
        let old = std::mem::take(&mut self.frontier);
        for (_, (term, mass)) in old {
            for branch in step(&term)? {
                let weight = &mass * &branch.prob;
                let key = branch.target.nameless();
                let slot = if is_weak_normal(&branch.target) {
                    self.absorbed.entry(key)
                } else {
                    self.frontier.entry(key)
                };
                slot.and_modify(|(_, p)| *p += &weight)
                    .or_insert((branch.target, weight));
            }
        }
        if let Some(floor) = self.config.mass_floor.clone() {
            let keys: Vec<Nameless> = self
                .frontier
                .iter()
                .filter(|(_, (_, p))| *p < floor)
                .map(|(k, _)| k.clone())
                .collect();
            for k in keys {
                let (_, p) = self.frontier.remove(&k).expect("key just listed");
                self.pruned += p;
            }
        }
        self.steps += 1;
        if self.frontier.len() > self.config.max_frontier {
            return Err(ExploreError::FrontierLimit {
                size: self.frontier.len(),
                cap: self.config.max_frontier,
                at_step: self.steps,
            });
        }
        Ok(())
    }

    /// Snapshot of the absorbed mass so far.
    pub fn distribution(&self) -> Distribution {
        let residual = self
            .frontier
            .values()
            .fold(Rat::zero(), |acc, (_, p)| acc + p)
            + &self.pruned;
        Distribution {
            mass: self.absorbed.clone(),
            residual,
            pruned: self.pruned.clone(),
            steps: self.steps,
        }
    }

    /// True when no mass remains on non-normal states; further steps cannot
    /// change the distribution.
    pub fn exhausted(&self) -> bool {
        self.frontier.is_empty()
    }
}

/// Runs `k` steps of the chain from `M` (stopping early if every state has
/// been absorbed) and returns the resulting distribution.
pub fn explore(m: &Term, k: u64) -> Result<Distribution, ExploreError> {
    explore_with(m, k, ExploreConfig::default())
}

pub fn explore_with(m: &Term, k: u64, config: ExploreConfig) -> Result<Distribution, ExploreError> {
    let mut ex = Explorer::with_config(m.clone(), config);
    for _ in 0..k {
        if ex.exhausted() {
            break;
        }
        ex.advance()?;
    }
    let mut dist = ex.distribution();
    dist.steps = k;
    Ok(dist)
}

/// Probability that `M` reduces to the weak-normal `V` within `k` steps.
pub fn reduce_prob(m: &Term, v: &Term, k: u64) -> Result<Rat, ExploreError> {
    debug_assert!(is_weak_normal(v), "reduce_prob target must be weak-normal");
    Ok(explore(m, k)?.mass_of(v))
}

/// Outcome of a single simulated trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SampleOutcome {
    Value(Term),
    Timeout,
}

/// Simulates one trajectory of the chain. Deterministic given the seed: coin
/// branches compare an exact rational threshold against a uniform 64-bit
/// draw, and non-probabilistic steps consume no randomness.
pub fn sample(m: &Term, seed: u64, max_steps: u64) -> Result<SampleOutcome, StepError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = m.clone();
    for _ in 0..max_steps {
        let branches = step(&current)?;
        current = match branches.len() {
            0 => return Ok(SampleOutcome::Value(current)),
            1 => branches.into_iter().next().expect("len checked").target,
            _ => {
                let draw: u64 = rng.gen();
                // draw/2^64 < p  <=>  draw * denom(p) < numer(p) * 2^64
                let p = &branches[0].prob;
                let lhs = num::BigInt::from(draw) * p.denom();
                let rhs = p.numer() * (num::BigInt::from(1u8) << 64);
                let idx = if lhs < rhs { 0 } else { 1 };
                branches.into_iter().nth(idx).expect("two branches").target
            }
        };
    }
    if is_weak_normal(&current) {
        Ok(SampleOutcome::Value(current))
    } else {
        Ok(SampleOutcome::Timeout)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{one, rat, rat_int, zero};
    use crate::stdlib;
    use crate::syntax::{abs, app, coin, fix, ite, num, parse, succ, var, Type};

    fn branch_sum(branches: &[Branch]) -> Rat {
        branches.iter().fold(zero(), |acc, b| acc + &b.prob)
    }

    #[test]
    fn coin_splits() {
        let branches = step(&coin(rat(1, 3))).unwrap();
        assert_eq!(
            branches,
            vec![
                Branch {
                    prob: rat(1, 3),
                    target: num(0)
                },
                Branch {
                    prob: rat(2, 3),
                    target: num(1)
                },
            ]
        );
        assert_eq!(branch_sum(&branches), one());
    }

    #[test]
    fn degenerate_coins_have_one_branch() {
        assert_eq!(
            step(&coin(rat_int(1))).unwrap(),
            vec![Branch {
                prob: one(),
                target: num(0)
            }]
        );
        assert_eq!(
            step(&coin(rat_int(0))).unwrap(),
            vec![Branch {
                prob: one(),
                target: num(1)
            }]
        );
    }

    #[test]
    fn numerals_are_absorbing() {
        assert!(step(&num(0)).unwrap().is_empty());
        assert!(is_weak_normal(&num(5)));
    }

    #[test]
    fn conditional_successor_binds_predecessor() {
        // if 3 then P else [z] R  ->  R[2/z]
        let m = ite(num(3), num(99), "z", succ(var("z")));
        let branches = step(&m).unwrap();
        assert_eq!(
            branches,
            vec![Branch {
                prob: one(),
                target: succ(num(2))
            }]
        );
    }

    #[test]
    fn abstractions_are_weak_normal_even_with_diverging_body() {
        let omega = stdlib::omega(&Type::Nat);
        assert!(is_weak_normal(&abs("x", Type::Nat, omega.clone())));
        assert!(!is_weak_normal(&omega));
    }

    #[test]
    fn fix_unfolds() {
        let f = abs("x", Type::Nat, var("x"));
        let m = fix(f.clone());
        let branches = step(&m).unwrap();
        assert_eq!(
            branches,
            vec![Branch {
                prob: one(),
                target: app(f, m.clone())
            }]
        );
    }

    #[test]
    fn omega_cycles_with_period_two() {
        // fix(\x.x) -> (\x.x)(fix \x.x) -> fix(\x.x) -> ...
        let omega = stdlib::omega(&Type::Nat);
        let s1 = step(&omega).unwrap().remove(0).target;
        let s2 = step(&s1).unwrap().remove(0).target;
        let s3 = step(&s2).unwrap().remove(0).target;
        let s4 = step(&s3).unwrap().remove(0).target;
        assert!(s2.alpha_eq(&omega));
        assert!(s3.alpha_eq(&s1));
        assert!(s4.alpha_eq(&omega));
    }

    #[test]
    fn open_and_ill_typed_redexes_are_caller_bugs() {
        assert!(matches!(step(&var("x")), Err(StepError::OpenTerm(_))));
        assert!(matches!(
            step(&succ(abs("x", Type::Nat, var("x")))),
            Err(StepError::IllTyped(_))
        ));
        assert!(matches!(
            step(&app(num(1), num(2))),
            Err(StepError::IllTyped(_))
        ));
    }

    #[test]
    fn explore_coin_one_step() {
        let d = explore(&coin(rat(1, 2)), 1).unwrap();
        assert_eq!(d.mass_of_num(0), rat(1, 2));
        assert_eq!(d.mass_of_num(1), rat(1, 2));
        assert_eq!(d.residual, zero());
    }

    #[test]
    fn explore_succ_coin() {
        // Two paths of length 2, weights 1/3 and 2/3.
        let d = explore(&succ(coin(rat(1, 3))), 3).unwrap();
        assert_eq!(d.mass_of_num(1), rat(1, 3));
        assert_eq!(d.mass_of_num(2), rat(2, 3));
        assert_eq!(d.residual, zero());
    }

    #[test]
    fn explore_omega_never_terminates() {
        let omega = stdlib::omega(&Type::Nat);
        for k in [0, 1, 5, 100] {
            let d = explore(&omega, k).unwrap();
            assert!(d.is_empty());
            assert_eq!(d.residual, one());
        }
    }

    #[test]
    fn explore_at_zero_steps_of_a_normal_form() {
        let d = explore(&num(3), 0).unwrap();
        assert_eq!(d.mass_of_num(3), one());
        assert_eq!(d.steps, 0);
    }

    #[test]
    fn mass_conservation_and_monotonicity() {
        let m = parse("let x = coin(1/2) in if x then coin(1/3) else [z] succ x").unwrap();
        let mut previous = zero();
        for k in 0..12 {
            let d = explore(&m, k).unwrap();
            assert_eq!(d.total_mass() + &d.residual, one(), "k = {k}");
            let total = d.total_mass();
            assert!(total >= previous, "absorbed mass decreased at k = {k}");
            previous = total;
        }
    }

    #[test]
    fn reduce_prob_examples() {
        assert_eq!(reduce_prob(&coin(rat(1, 2)), &num(0), 1).unwrap(), rat(1, 2));
        assert_eq!(reduce_prob(&num(3), &num(3), 0).unwrap(), one());
        assert_eq!(
            reduce_prob(&succ(coin(rat(1, 3))), &num(2), 3).unwrap(),
            rat(2, 3)
        );
    }

    #[test]
    fn frontier_cap_reported_distinctly() {
        // A term that keeps splitting: each coin doubles the frontier until
        // absorption; with a cap of 1 the very first split trips it.
        let m = parse("if coin(1/2) then coin(1/3) else [z] coin(1/4)").unwrap();
        let cfg = ExploreConfig {
            max_frontier: 1,
            mass_floor: None,
        };
        let err = explore_with(&m, 10, cfg).unwrap_err();
        assert!(matches!(err, ExploreError::FrontierLimit { .. }));
    }

    #[test]
    fn mass_floor_moves_mass_to_pruned() {
        let m = parse("if coin(1/2) then coin(1/3) else [z] coin(1/4)").unwrap();
        let cfg = ExploreConfig {
            max_frontier: 1_000,
            mass_floor: Some(rat(3, 4)),
        };
        let d = explore_with(&m, 10, cfg).unwrap();
        assert!(d.pruned > zero());
        assert_eq!(d.total_mass() + &d.residual, one());
        assert_eq!(d.residual, d.pruned);
    }

    #[test]
    fn sampling_is_deterministic_given_seed() {
        let m = parse("if coin(1/2) then coin(1/3) else [z] succ z").unwrap();
        let a = sample(&m, 42, 100).unwrap();
        let b = sample(&m, 42, 100).unwrap();
        assert_eq!(a, b);
        assert_eq!(sample(&num(7), 123, 10).unwrap(), SampleOutcome::Value(num(7)));
    }

    #[test]
    fn sampling_times_out_on_divergence() {
        let omega = stdlib::omega(&Type::Nat);
        assert_eq!(sample(&omega, 0, 50).unwrap(), SampleOutcome::Timeout);
    }

    #[test]
    fn sample_frequency_matches_bias() {
        // coin(1/4): frequency of 0 over 100_000 seeds within 1/4 +- 0.01.
        let m = coin(rat(1, 4));
        let trials = 100_000u64;
        let mut zeros = 0u64;
        for seed in 0..trials {
            if let SampleOutcome::Value(Term::Num(0)) = sample(&m, seed, 4).unwrap() {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.25).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn json_shape() {
        let d = explore(&coin(rat(1, 2)), 1).unwrap();
        let v = d.to_json();
        assert_eq!(v["residual"], "0/1");
        assert_eq!(v["steps"], 1);
        assert_eq!(v["distribution"][0]["value"], 0);
        assert_eq!(v["distribution"][0]["prob"], "1/2");
    }
}
