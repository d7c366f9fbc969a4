//! The standard example programs: arithmetic, probes, probabilistic choice,
//! random generators, and a small Las Vegas search. These double as the test
//! corpus for comparing the two semantic back-ends and as building blocks of
//! the testing terms in [`crate::fullabs`].

use thiserror::Error;

use crate::rat::{is_probability, one, rat, Rat};
use crate::syntax::{abs, app, apps, coin, fix, ite, num, parse_type, succ, var, Term, Type};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StdlibError {
    #[error("unknown stdlib term `{0}`")]
    Unknown(String),
    #[error("`{name}` expects {expected}, got {found} argument(s)")]
    Arity {
        name: String,
        expected: &'static str,
        found: usize,
    },
    #[error("bad argument for `{name}`: {msg}")]
    BadArgument { name: String, msg: String },
    #[error("ran: probabilities must be in [0,1] with sum <= 1, and non-empty")]
    BadRanWeights,
}

/// `fix (\x:s. x)` — the ever-looping term of type `s`.
pub fn omega(ty: &Type) -> Term {
    fix(abs("x", ty.clone(), var("x")))
}

/// `\x:nat. if x then 0 else [z] z` — predecessor, with `pred 0 = 0`.
pub fn pred() -> Term {
    abs("x", Type::Nat, ite(var("x"), num(0), "z", var("z")))
}

/// Addition by recursion on the second argument.
pub fn add() -> Term {
    abs(
        "x",
        Type::Nat,
        fix(abs(
            "a",
            Type::nat_fn(1),
            abs(
                "y",
                Type::Nat,
                ite(var("y"), var("x"), "z", succ(app(var("a"), var("z")))),
            ),
        )),
    )
}

/// `add k` — adds the constant `k`.
pub fn shift(k: u64) -> Term {
    app(add(), num(k))
}

/// `exp n = 2^n`.
pub fn exp_() -> Term {
    fix(abs(
        "e",
        Type::nat_fn(1),
        abs(
            "x",
            Type::Nat,
            ite(
                var("x"),
                num(1),
                "z",
                apps(
                    add(),
                    [app(var("e"), var("z")), app(var("e"), var("z"))],
                ),
            ),
        ),
    ))
}

/// `cmp n m` reduces to `0` if `n <= m` and to `1` otherwise.
pub fn cmp() -> Term {
    fix(abs(
        "c",
        Type::nat_fn(2),
        abs(
            "x",
            Type::Nat,
            abs(
                "y",
                Type::Nat,
                ite(
                    var("x"),
                    num(0),
                    "z",
                    ite(
                        var("y"),
                        num(1),
                        "z'",
                        apps(var("c"), [var("z"), var("z'")]),
                    ),
                ),
            ),
        ),
    ))
}

/// `probe k M` reduces to `0` with the probability that `M` reduces to `k`,
/// and diverges otherwise.
pub fn probe(k: u64) -> Term {
    let mut t = abs(
        "x",
        Type::Nat,
        ite(var("x"), num(0), "z", omega(&Type::Nat)),
    );
    for _ in 0..k {
        t = abs(
            "x",
            Type::Nat,
            ite(var("x"), omega(&Type::Nat), "z", app(t, var("z"))),
        );
    }
    t
}

/// `pprod k M1 ... Mk` reduces to `0` with probability `prod_i P(Mi -> 0)`.
pub fn pprod(k: u64) -> Term {
    let mut t = num(0);
    for i in 0..k {
        // At stage i the remainder has type nat^i -> nat.
        let rest_ty = Type::nat_fn(i as usize);
        t = abs("x", Type::Nat, ite(var("x"), t, "z", omega(&rest_ty)));
    }
    t
}

/// `pchoose k M N1 ... Nk` reduces to `N_{i+1}` with the probability that `M`
/// reduces to `i`, for `i < k`.
pub fn pchoose(k: u64, sigma: &Type) -> Term {
    let mut t = abs("xi", Type::Nat, omega(sigma));
    for stage in 1..=k {
        // t currently implements pchoose (stage-1); build the stage version.
        let mut body = ite(
            var("xi"),
            var("x1"),
            "zeta",
            apps(
                t,
                std::iter::once(var("zeta")).chain((2..=stage).map(|i| var(&format!("x{i}")))),
            ),
        );
        for i in (1..=stage).rev() {
            body = abs(&format!("x{i}"), sigma.clone(), body);
        }
        t = abs("xi", Type::Nat, body);
    }
    t
}

/// `let x = M in N`: evaluates `M` once and shares the resulting numeral with
/// every occurrence of `x` in `N`.
pub fn let_(x: &str, m: Term, n: &Term) -> Term {
    crate::syntax::desugar_let(x, m, n)
}

/// `unift n` — the uniform distribution on `{0, ..., 2^n - 1}`. The bound is
/// evaluated once, so a probabilistic bound yields a well-defined mixture.
pub fn unift() -> Term {
    fix(abs(
        "u",
        Type::nat_fn(1),
        abs(
            "x",
            Type::Nat,
            ite(
                var("x"),
                num(0),
                "z",
                ite(
                    coin(rat(1, 2)),
                    app(var("u"), var("z")),
                    "z'",
                    apps(
                        add(),
                        [app(exp_(), var("z")), app(var("u"), var("z"))],
                    ),
                ),
            ),
        ),
    ))
}

/// `unif n` — the uniform distribution on `{0, ..., n}`: draws from
/// `unift n` until the result is `<= n`.
pub fn unif() -> Term {
    let retry_loop = fix(abs(
        "u",
        Type::Nat,
        let_(
            "z",
            app(unift(), var("y")),
            &ite(
                apps(cmp(), [var("z"), var("y")]),
                var("z"),
                "w",
                var("u"),
            ),
        ),
    ));
    abs("x", Type::Nat, let_("y", var("x"), &retry_loop))
}

/// A term reducing to `i` with probability `ps[i]`. Requires a non-empty
/// weight list with entries in `[0,1]` summing to at most 1. When the head
/// weight is 1 the whole term is just `0` (the tail weights are then 0).
pub fn ran(ps: &[Rat]) -> Result<Term, StdlibError> {
    if ps.is_empty() || ps.iter().any(|p| !is_probability(p)) {
        return Err(StdlibError::BadRanWeights);
    }
    let total = ps.iter().fold(Rat::from_integer(0.into()), |a, p| a + p);
    if total > one() {
        return Err(StdlibError::BadRanWeights);
    }
    Ok(ran_unchecked(ps))
}

fn ran_unchecked(ps: &[Rat]) -> Term {
    let p0 = ps[0].clone();
    if p0 == one() {
        return num(0);
    }
    if ps.len() == 1 {
        return ite(coin(p0), num(0), "z", omega(&Type::Nat));
    }
    let scale = one() - &p0;
    let tail: Vec<Rat> = ps[1..].iter().map(|p| p / &scale).collect();
    ite(coin(p0), num(0), "z", succ(ran_unchecked(&tail)))
}

/// Las Vegas search: `las_vegas f n` keeps drawing `y` uniformly from
/// `{0..n}` until `f y = 0`, then returns that `y`.
pub fn las_vegas() -> Term {
    abs(
        "f",
        Type::nat_fn(1),
        abs(
            "x",
            Type::Nat,
            fix(abs(
                "r",
                Type::Nat,
                let_(
                    "y",
                    app(unif(), var("x")),
                    &ite(app(var("f"), var("y")), var("y"), "z", var("r")),
                ),
            )),
        ),
    )
}

/// Catalog entry for the command-line `stdlib` listing.
pub struct StdTerm {
    pub name: &'static str,
    pub params: &'static str,
    pub describes: &'static str,
}

pub fn catalog() -> Vec<StdTerm> {
    vec![
        StdTerm { name: "omega", params: "TYPE", describes: "ever-looping term of the given type" },
        StdTerm { name: "pred", params: "", describes: "predecessor (pred 0 = 0)" },
        StdTerm { name: "add", params: "", describes: "addition" },
        StdTerm { name: "shift", params: "K", describes: "add the constant K" },
        StdTerm { name: "exp", params: "", describes: "base-2 exponential" },
        StdTerm { name: "cmp", params: "", describes: "0 if n <= m, else 1" },
        StdTerm { name: "probe", params: "K", describes: "0 with the probability the argument is K" },
        StdTerm { name: "pprod", params: "K", describes: "0 with the product of the K arguments' probabilities of being 0" },
        StdTerm { name: "pchoose", params: "K TYPE", describes: "K-way choice directed by a nat" },
        StdTerm { name: "unift", params: "", describes: "uniform on {0..2^n-1}" },
        StdTerm { name: "unif", params: "", describes: "uniform on {0..n}" },
        StdTerm { name: "ran", params: "P0 P1 ...", describes: "fixed distribution with the given weights" },
        StdTerm { name: "las-vegas", params: "", describes: "retry until f y = 0, return y" },
    ]
}

/// Builds a catalog term from its CLI name and string arguments.
pub fn build(name: &str, args: &[String]) -> Result<Term, StdlibError> {
    let arity = |expected: &'static str, ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(StdlibError::Arity {
                name: name.to_string(),
                expected,
                found: args.len(),
            })
        }
    };
    let nat_arg = |i: usize| -> Result<u64, StdlibError> {
        args[i].parse().map_err(|_| StdlibError::BadArgument {
            name: name.to_string(),
            msg: format!("`{}` is not a natural number", args[i]),
        })
    };
    let type_arg = |i: usize| -> Result<Type, StdlibError> {
        parse_type(&args[i]).map_err(|e| StdlibError::BadArgument {
            name: name.to_string(),
            msg: e.to_string(),
        })
    };
    match name {
        "omega" => {
            arity("a type", args.len() == 1)?;
            Ok(omega(&type_arg(0)?))
        }
        "pred" => {
            arity("no arguments", args.is_empty())?;
            Ok(pred())
        }
        "add" => {
            arity("no arguments", args.is_empty())?;
            Ok(add())
        }
        "shift" => {
            arity("a natural number", args.len() == 1)?;
            Ok(shift(nat_arg(0)?))
        }
        "exp" => {
            arity("no arguments", args.is_empty())?;
            Ok(exp_())
        }
        "cmp" => {
            arity("no arguments", args.is_empty())?;
            Ok(cmp())
        }
        "probe" => {
            arity("a natural number", args.len() == 1)?;
            Ok(probe(nat_arg(0)?))
        }
        "pprod" => {
            arity("a natural number", args.len() == 1)?;
            Ok(pprod(nat_arg(0)?))
        }
        "pchoose" => {
            arity("a natural number and a type", args.len() == 2)?;
            Ok(pchoose(nat_arg(0)?, &type_arg(1)?))
        }
        "unift" => {
            arity("no arguments", args.is_empty())?;
            Ok(unift())
        }
        "unif" => {
            arity("no arguments", args.is_empty())?;
            Ok(unif())
        }
        "ran" => {
            arity("at least one rational", !args.is_empty())?;
            let mut ps = Vec::new();
            for a in args {
                let p = crate::rat::parse_rat(a).ok_or_else(|| StdlibError::BadArgument {
                    name: name.to_string(),
                    msg: format!("`{a}` is not a rational"),
                })?;
                ps.push(p);
            }
            ran(&ps)
        }
        "las-vegas" => {
            arity("no arguments", args.is_empty())?;
            Ok(las_vegas())
        }
        other => Err(StdlibError::Unknown(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operational::explore;
    use crate::rat::{rat_int, zero};
    use crate::syntax::{typecheck_closed, Type};

    fn nat_result(term: &Term, k: u64) -> Vec<(u64, Rat)> {
        let d = explore(term, k).unwrap();
        d.iter()
            .map(|(t, p)| match t {
                Term::Num(n) => (*n, p.clone()),
                other => panic!("non-numeral normal form {other}"),
            })
            .collect()
    }

    #[test]
    fn stated_types() {
        assert_eq!(typecheck_closed(&omega(&Type::nat_fn(1))).unwrap(), Type::nat_fn(1));
        assert_eq!(typecheck_closed(&pred()).unwrap(), Type::nat_fn(1));
        assert_eq!(typecheck_closed(&add()).unwrap(), Type::nat_fn(2));
        assert_eq!(typecheck_closed(&shift(2)).unwrap(), Type::nat_fn(1));
        assert_eq!(typecheck_closed(&exp_()).unwrap(), Type::nat_fn(1));
        assert_eq!(typecheck_closed(&cmp()).unwrap(), Type::nat_fn(2));
        assert_eq!(typecheck_closed(&probe(3)).unwrap(), Type::nat_fn(1));
        assert_eq!(typecheck_closed(&pprod(0)).unwrap(), Type::Nat);
        assert_eq!(typecheck_closed(&pprod(3)).unwrap(), Type::nat_fn(3));
        let sigma = Type::nat_fn(1);
        assert_eq!(
            typecheck_closed(&pchoose(2, &sigma)).unwrap(),
            Type::arrow(
                Type::Nat,
                Type::arrow(sigma.clone(), Type::arrow(sigma.clone(), sigma.clone()))
            )
        );
        assert_eq!(typecheck_closed(&unift()).unwrap(), Type::nat_fn(1));
        assert_eq!(typecheck_closed(&unif()).unwrap(), Type::nat_fn(1));
        assert_eq!(
            typecheck_closed(&ran(&[rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap()).unwrap(),
            Type::Nat
        );
        assert_eq!(
            typecheck_closed(&las_vegas()).unwrap(),
            Type::arrow(Type::nat_fn(1), Type::nat_fn(1))
        );
    }

    #[test]
    fn pred_behavior() {
        assert_eq!(nat_result(&app(pred(), num(0)), 20), vec![(0, one())]);
        assert_eq!(nat_result(&app(pred(), num(3)), 20), vec![(2, one())]);
    }

    #[test]
    fn add_behavior() {
        assert_eq!(
            nat_result(&apps(add(), [num(2), num(3)]), 100),
            vec![(5, one())]
        );
        assert_eq!(
            nat_result(&apps(add(), [num(0), num(0)]), 100),
            vec![(0, one())]
        );
    }

    #[test]
    fn shift_behavior() {
        assert_eq!(nat_result(&app(shift(2), num(3)), 100), vec![(5, one())]);
        assert_eq!(nat_result(&app(shift(0), num(4)), 100), vec![(4, one())]);
    }

    #[test]
    fn exp_behavior() {
        assert_eq!(nat_result(&app(exp_(), num(0)), 100), vec![(1, one())]);
        assert_eq!(nat_result(&app(exp_(), num(3)), 500), vec![(8, one())]);
    }

    #[test]
    fn cmp_behavior() {
        assert_eq!(nat_result(&apps(cmp(), [num(2), num(5)]), 100), vec![(0, one())]);
        assert_eq!(nat_result(&apps(cmp(), [num(5), num(2)]), 100), vec![(1, one())]);
        assert_eq!(nat_result(&apps(cmp(), [num(2), num(2)]), 100), vec![(0, one())]);
    }

    #[test]
    fn probe_behavior() {
        // probe 1 (coin 1/3): succeeds with the probability of drawing 1.
        let d = explore(&app(probe(1), coin(rat(1, 3))), 100).unwrap();
        assert_eq!(d.mass_of_num(0), rat(2, 3));
        assert_eq!(d.residual, rat(1, 3));

        assert_eq!(nat_result(&app(probe(0), num(0)), 100), vec![(0, one())]);

        let d = explore(&app(probe(2), num(1)), 200).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.residual, one());
    }

    #[test]
    fn pprod_behavior() {
        let d = explore(
            &apps(pprod(2), [coin(rat(1, 2)), coin(rat(1, 2))]),
            200,
        )
        .unwrap();
        assert_eq!(d.mass_of_num(0), rat(1, 4));

        assert_eq!(nat_result(&pprod(0), 10), vec![(0, one())]);
        assert_eq!(nat_result(&app(pprod(1), num(0)), 100), vec![(0, one())]);
    }

    #[test]
    fn pchoose_behavior() {
        let t = |scrut: Term| apps(pchoose(2, &Type::Nat), [scrut, num(5), num(7)]);
        assert_eq!(nat_result(&t(num(0)), 200), vec![(5, one())]);
        assert_eq!(nat_result(&t(num(1)), 200), vec![(7, one())]);
        // pchoose 0 diverges on any input.
        let d = explore(&apps(pchoose(0, &Type::Nat), [num(0)]), 200).unwrap();
        assert_eq!(d.residual, one());
    }

    #[test]
    fn let_shares_the_drawn_numeral() {
        // let x = coin(1/2) in add x x: either 0+0 or 1+1.
        let shared = let_(
            "x",
            coin(rat(1, 2)),
            &apps(add(), [var("x"), var("x")]),
        );
        let d = explore(&shared, 300).unwrap();
        assert_eq!(d.mass_of_num(0), rat(1, 2));
        assert_eq!(d.mass_of_num(1), zero());
        assert_eq!(d.mass_of_num(2), rat(1, 2));
        assert_eq!(d.residual, zero());

        // Contrast: (\x. add x x)(coin 1/2) re-evaluates the coin per use.
        let copied = app(
            abs("x", Type::Nat, apps(add(), [var("x"), var("x")])),
            coin(rat(1, 2)),
        );
        let d = explore(&copied, 300).unwrap();
        assert_eq!(d.mass_of_num(0), rat(1, 4));
        assert_eq!(d.mass_of_num(1), rat(1, 2));
        assert_eq!(d.mass_of_num(2), rat(1, 4));

        assert_eq!(nat_result(&let_("x", num(3), &var("x")), 20), vec![(3, one())]);
    }

    #[test]
    fn unift_is_uniform_on_a_power_of_two() {
        let d = explore(&app(unift(), num(2)), 500).unwrap();
        for n in 0..4 {
            assert_eq!(d.mass_of_num(n), rat(1, 4), "at {n}");
        }
        assert_eq!(d.residual, zero());

        assert_eq!(nat_result(&app(unift(), num(0)), 100), vec![(0, one())]);
    }

    #[test]
    fn unift_of_a_coin_is_the_mixture_of_bounds() {
        // Bound drawn once: 1/2 * point(0) + 1/2 * uniform{0,1}.
        let d = explore(&app(unift(), coin(rat(1, 2))), 500).unwrap();
        assert_eq!(d.mass_of_num(0), rat(3, 4));
        assert_eq!(d.mass_of_num(1), rat(1, 4));
        assert_eq!(d.residual, zero());
    }

    #[test]
    fn unif_approaches_uniform() {
        // unif 2: mass >= 1/3 - 10^-3 on each of 0..2 after 500 steps.
        let d = explore(&app(unif(), num(2)), 500).unwrap();
        let floor = rat(1, 3) - rat(1, 1000);
        for n in 0..3 {
            assert!(d.mass_of_num(n) >= floor, "at {n}: {}", d.mass_of_num(n));
            assert!(d.mass_of_num(n) <= rat(1, 3));
        }
        assert_eq!(nat_result(&app(unif(), num(0)), 200), vec![(0, one())]);
    }

    #[test]
    fn ran_splits_weights() {
        let d = explore(&ran(&[rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap(), 100).unwrap();
        assert_eq!(d.mass_of_num(0), rat(1, 2));
        assert_eq!(d.mass_of_num(1), rat(1, 4));
        assert_eq!(d.mass_of_num(2), rat(1, 4));
        assert_eq!(d.residual, zero());
    }

    #[test]
    fn ran_head_weight_one_is_just_zero() {
        assert_eq!(ran(&[rat_int(1)]).unwrap(), num(0));
        assert_eq!(ran(&[rat_int(1), zero(), zero()]).unwrap(), num(0));
    }

    #[test]
    fn ran_subprobability_diverges_on_the_rest() {
        let d = explore(&ran(&[rat(1, 3)]).unwrap(), 200).unwrap();
        assert_eq!(d.mass_of_num(0), rat(1, 3));
        assert_eq!(d.residual, rat(2, 3));
    }

    #[test]
    fn ran_rejects_bad_weights() {
        assert!(ran(&[]).is_err());
        assert!(ran(&[rat(2, 3), rat(2, 3)]).is_err());
        assert!(ran(&[rat(3, 2)]).is_err());
    }

    #[test]
    fn las_vegas_finds_a_zero_of_f() {
        // f y = 0 iff y = 2, searched over {0..3}: success chance 1/4 per
        // round, so mass on 2 after 10 full rounds is 1 - (3/4)^10.
        let f = abs(
            "y",
            Type::Nat,
            ite(
                apps(cmp(), [num(2), var("y")]),
                ite(apps(cmp(), [var("y"), num(2)]), num(0), "b", num(1)),
                "a",
                num(1),
            ),
        );
        let d = explore(&apps(las_vegas(), [f, num(3)]), 2000).unwrap();
        let ten_rounds = one() - num::pow::pow(rat(3, 4), 10);
        assert!(d.mass_of_num(2) >= ten_rounds, "mass {}", d.mass_of_num(2));
        for other in [0, 1, 3] {
            assert_eq!(d.mass_of_num(other), zero());
        }

        // A predicate that never holds leaves the search spinning.
        let never = abs("y", Type::Nat, num(1));
        let d = explore(&apps(las_vegas(), [never, num(3)]), 400).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.residual, one());
    }

    #[test]
    fn build_from_cli_names() {
        assert!(build("pred", &[]).is_ok());
        assert!(build("shift", &["2".into()]).is_ok());
        assert!(build("pchoose", &["2".into(), "nat -> nat".into()]).is_ok());
        assert!(build("ran", &["1/2".into(), "1/4".into()]).is_ok());
        assert!(matches!(build("nope", &[]), Err(StdlibError::Unknown(_))));
        assert!(matches!(build("shift", &[]), Err(StdlibError::Arity { .. })));
        assert!(matches!(
            build("ran", &["x".into()]),
            Err(StdlibError::BadArgument { .. })
        ));
        for entry in catalog() {
            assert!(!entry.name.is_empty() && !entry.describes.is_empty());
        }
    }
}
