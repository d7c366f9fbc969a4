//! Syntax-directed type checking. Every term has at most one type in a given
//! context, so checking is plain inference.

use thiserror::Error;

use super::{Term, Type, TypingContext};
use crate::rat::is_probability;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("cannot apply a term of type `{fun_ty}` (not an arrow) to an argument")]
    NotAnArrow { fun_ty: Type },
    #[error("argument type mismatch: function expects `{expected}`, argument has `{found}`")]
    ArgMismatch { expected: Type, found: Type },
    #[error("conditional scrutinee has type `{0}`, expected `nat`")]
    ScrutineeNotNat(Type),
    #[error("conditional branches disagree: `{zero}` vs `{succ}`")]
    BranchMismatch { zero: Type, succ: Type },
    #[error("fix expects a body of type `s -> s`, found `{0}`")]
    FixNotEndo(Type),
    #[error("succ expects a `nat` argument, found `{0}`")]
    SuccNotNat(Type),
    #[error("coin probability outside [0, 1]")]
    BadCoin,
}

/// Infers the unique type of `M` in `ctx`.
pub fn typecheck(ctx: &TypingContext, m: &Term) -> Result<Type, TypeError> {
    match m {
        Term::Num(_) => Ok(Type::Nat),
        Term::Var(x) => ctx
            .lookup(x)
            .cloned()
            .ok_or_else(|| TypeError::Unbound(x.clone())),
        Term::Coin(p) => {
            if is_probability(p) {
                Ok(Type::Nat)
            } else {
                Err(TypeError::BadCoin)
            }
        }
        Term::Succ(b) => match typecheck(ctx, b)? {
            Type::Nat => Ok(Type::Nat),
            other => Err(TypeError::SuccNotNat(other)),
        },
        Term::If {
            scrut,
            zero,
            var,
            succ,
        } => {
            match typecheck(ctx, scrut)? {
                Type::Nat => {}
                other => return Err(TypeError::ScrutineeNotNat(other)),
            }
            let zero_ty = typecheck(ctx, zero)?;
            let succ_ty = typecheck(&extend_shadowing(ctx, var, Type::Nat), succ)?;
            if zero_ty == succ_ty {
                Ok(zero_ty)
            } else {
                Err(TypeError::BranchMismatch {
                    zero: zero_ty,
                    succ: succ_ty,
                })
            }
        }
        Term::Abs { var, annot, body } => {
            let body_ty = typecheck(&extend_shadowing(ctx, var, annot.clone()), body)?;
            Ok(Type::arrow(annot.clone(), body_ty))
        }
        Term::App(fun, arg) => {
            let fun_ty = typecheck(ctx, fun)?;
            let arg_ty = typecheck(ctx, arg)?;
            match fun_ty {
                Type::Arrow(dom, cod) => {
                    if *dom == arg_ty {
                        Ok(*cod)
                    } else {
                        Err(TypeError::ArgMismatch {
                            expected: *dom,
                            found: arg_ty,
                        })
                    }
                }
                other => Err(TypeError::NotAnArrow { fun_ty: other }),
            }
        }
        Term::Fix(b) => match typecheck(ctx, b)? {
            Type::Arrow(dom, cod) if dom == cod => Ok(*dom),
            other => Err(TypeError::FixNotEndo(other)),
        },
    }
}

/// Checks a closed term.
pub fn typecheck_closed(m: &Term) -> Result<Type, TypeError> {
    typecheck(&TypingContext::empty(), m)
}

// Binders may shadow outer names; typing contexts keep names distinct, so a
// shadowed binding is dropped before the new one is appended.
fn extend_shadowing(ctx: &TypingContext, name: &str, ty: Type) -> TypingContext {
    if ctx.lookup(name).is_none() {
        return ctx.extended(name, ty);
    }
    let mut kept = TypingContext::empty();
    for (n, t) in ctx.bindings() {
        if n != name {
            kept = kept.extended(n, t.clone());
        }
    }
    kept.extended(name, ty)
}

#[cfg(test)]
mod tests {
    use super::super::{abs, app, coin, fix, ite, num, parse, succ, var, Type, TypingContext};
    use super::*;
    use crate::rat::rat;

    #[test]
    fn coin_is_nat() {
        assert_eq!(typecheck_closed(&coin(rat(1, 2))), Ok(Type::Nat));
    }

    #[test]
    fn identity_abstraction() {
        assert_eq!(
            typecheck_closed(&abs("x", Type::Nat, var("x"))),
            Ok(Type::nat_fn(1))
        );
    }

    #[test]
    fn succ_in_context() {
        let ctx = TypingContext::of(&[("x", Type::Nat)]);
        assert_eq!(typecheck(&ctx, &succ(var("x"))), Ok(Type::Nat));
    }

    #[test]
    fn error_cases() {
        assert_eq!(
            typecheck_closed(&var("x")),
            Err(TypeError::Unbound("x".to_string()))
        );
        assert!(matches!(
            typecheck_closed(&app(num(0), num(1))),
            Err(TypeError::NotAnArrow { .. })
        ));
        assert!(matches!(
            typecheck_closed(&ite(abs("x", Type::Nat, var("x")), num(0), "z", num(1))),
            Err(TypeError::ScrutineeNotNat(_))
        ));
        assert!(matches!(
            typecheck_closed(&fix(abs("x", Type::Nat, succ(var("x"))))),
            Ok(Type::Nat)
        ));
        assert!(matches!(
            typecheck_closed(&fix(num(3))),
            Err(TypeError::FixNotEndo(_))
        ));
        assert!(matches!(
            typecheck_closed(&ite(
                num(0),
                num(1),
                "z",
                abs("y", Type::Nat, var("y"))
            )),
            Err(TypeError::BranchMismatch { .. })
        ));
    }

    #[test]
    fn shadowing_binders() {
        // \x:nat->nat. \x:nat. succ x
        let t = abs(
            "x",
            Type::nat_fn(1),
            abs("x", Type::Nat, succ(var("x"))),
        );
        assert_eq!(
            typecheck_closed(&t),
            Ok(Type::arrow(Type::nat_fn(1), Type::nat_fn(1)))
        );
    }

    #[test]
    fn let_sugar_types_like_the_paper_rule() {
        let t = parse("let x = coin(1/2) in succ x").unwrap();
        assert_eq!(typecheck_closed(&t), Ok(Type::Nat));
    }
}
