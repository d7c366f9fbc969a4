//! Observation contexts: term-shaped trees with typed holes.
//!
//! All holes of a context share one signature `(delta, tau)`: a hole stands
//! for a term `M` with `delta |- M : tau`, and filling replaces every hole
//! with `M` verbatim, so binders of the context may capture free variables of
//! `M`. That capture is the point: `(\x:s. [])[x] = \x:s. x`.

use thiserror::Error;

use super::{typecheck, Term, Type, TypeError, TypingContext};

/// Context shapes. `Hole` leaves carry no data; the signature lives on the
/// enclosing [`ObservationContext`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ctx {
    Hole,
    Num(u64),
    Var(String),
    Succ(Box<Ctx>),
    If {
        scrut: Box<Ctx>,
        zero: Box<Ctx>,
        var: String,
        succ: Box<Ctx>,
    },
    Abs {
        var: String,
        annot: Type,
        body: Box<Ctx>,
    },
    App(Box<Ctx>, Box<Ctx>),
    Coin(crate::rat::Rat),
    Fix(Box<Ctx>),
}

impl Ctx {
    /// Embeds a hole-free term as a context shape.
    pub fn from_term(t: &Term) -> Ctx {
        match t {
            Term::Num(n) => Ctx::Num(*n),
            Term::Var(x) => Ctx::Var(x.clone()),
            Term::Succ(b) => Ctx::Succ(Box::new(Ctx::from_term(b))),
            Term::If {
                scrut,
                zero,
                var,
                succ,
            } => Ctx::If {
                scrut: Box::new(Ctx::from_term(scrut)),
                zero: Box::new(Ctx::from_term(zero)),
                var: var.clone(),
                succ: Box::new(Ctx::from_term(succ)),
            },
            Term::Abs { var, annot, body } => Ctx::Abs {
                var: var.clone(),
                annot: annot.clone(),
                body: Box::new(Ctx::from_term(body)),
            },
            Term::App(f, a) => Ctx::App(Box::new(Ctx::from_term(f)), Box::new(Ctx::from_term(a))),
            Term::Coin(p) => Ctx::Coin(p.clone()),
            Term::Fix(b) => Ctx::Fix(Box::new(Ctx::from_term(b))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationContext {
    pub shape: Ctx,
    /// Typing context of the terms the hole accepts.
    pub hole_ctx: TypingContext,
    /// Type of the terms the hole accepts.
    pub hole_ty: Type,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FillError {
    #[error("hole signature mismatch: hole expects `{expected}`, term has type `{found}`")]
    Signature { expected: Type, found: Type },
    #[error("term to insert does not typecheck under the hole context: {0}")]
    IllTypedFiller(TypeError),
    #[error("context itself is ill-typed: {0}")]
    IllTypedContext(String),
}

impl ObservationContext {
    pub fn new(shape: Ctx, hole_ctx: TypingContext, hole_ty: Type) -> Self {
        ObservationContext {
            shape,
            hole_ctx,
            hole_ty,
        }
    }

    /// A bare hole of the given signature.
    pub fn hole(hole_ctx: TypingContext, hole_ty: Type) -> Self {
        ObservationContext::new(Ctx::Hole, hole_ctx, hole_ty)
    }

    /// Replaces every hole with `M` verbatim. Requires `hole_ctx |- M : hole_ty`.
    pub fn fill(&self, m: &Term) -> Result<Term, FillError> {
        let found = typecheck(&self.hole_ctx, m).map_err(FillError::IllTypedFiller)?;
        if found != self.hole_ty {
            return Err(FillError::Signature {
                expected: self.hole_ty.clone(),
                found,
            });
        }
        Ok(fill_shape(&self.shape, m))
    }

    /// Types the context under `outer`. A hole is well-typed where the
    /// ambient context ends with `hole_ctx`, and then has type `hole_ty`.
    pub fn typecheck(&self, outer: &TypingContext) -> Result<Type, FillError> {
        self.check_shape(&self.shape, outer)
    }

    fn check_shape(&self, c: &Ctx, ambient: &TypingContext) -> Result<Type, FillError> {
        let err = |e: TypeError| FillError::IllTypedContext(e.to_string());
        match c {
            Ctx::Hole => {
                if ambient.has_suffix(&self.hole_ctx) {
                    Ok(self.hole_ty.clone())
                } else {
                    Err(FillError::IllTypedContext(format!(
                        "hole context is not a suffix of the ambient context at the hole \
                         (ambient has {} bindings)",
                        ambient.bindings().len()
                    )))
                }
            }
            Ctx::Num(_) => Ok(Type::Nat),
            Ctx::Coin(p) => {
                if crate::rat::is_probability(p) {
                    Ok(Type::Nat)
                } else {
                    Err(err(TypeError::BadCoin))
                }
            }
            Ctx::Var(x) => ambient
                .lookup(x)
                .cloned()
                .ok_or_else(|| err(TypeError::Unbound(x.clone()))),
            Ctx::Succ(b) => match self.check_shape(b, ambient)? {
                Type::Nat => Ok(Type::Nat),
                other => Err(err(TypeError::SuccNotNat(other))),
            },
            Ctx::If {
                scrut,
                zero,
                var,
                succ,
            } => {
                match self.check_shape(scrut, ambient)? {
                    Type::Nat => {}
                    other => return Err(err(TypeError::ScrutineeNotNat(other))),
                }
                let zt = self.check_shape(zero, ambient)?;
                let st = self.check_shape(succ, &ambient.extended(var, Type::Nat))?;
                if zt == st {
                    Ok(zt)
                } else {
                    Err(err(TypeError::BranchMismatch { zero: zt, succ: st }))
                }
            }
            Ctx::Abs { var, annot, body } => {
                let bt = self.check_shape(body, &ambient.extended(var, annot.clone()))?;
                Ok(Type::arrow(annot.clone(), bt))
            }
            Ctx::App(f, a) => {
                let ft = self.check_shape(f, ambient)?;
                let at = self.check_shape(a, ambient)?;
                match ft {
                    Type::Arrow(dom, cod) if *dom == at => Ok(*cod),
                    Type::Arrow(dom, _) => Err(err(TypeError::ArgMismatch {
                        expected: *dom,
                        found: at,
                    })),
                    other => Err(err(TypeError::NotAnArrow { fun_ty: other })),
                }
            }
            Ctx::Fix(b) => match self.check_shape(b, ambient)? {
                Type::Arrow(dom, cod) if dom == cod => Ok(*dom),
                other => Err(err(TypeError::FixNotEndo(other))),
            },
        }
    }
}

fn fill_shape(c: &Ctx, m: &Term) -> Term {
    match c {
        Ctx::Hole => m.clone(),
        Ctx::Num(n) => Term::Num(*n),
        Ctx::Var(x) => Term::Var(x.clone()),
        Ctx::Coin(p) => Term::Coin(p.clone()),
        Ctx::Succ(b) => Term::Succ(Box::new(fill_shape(b, m))),
        Ctx::If {
            scrut,
            zero,
            var,
            succ,
        } => Term::If {
            scrut: Box::new(fill_shape(scrut, m)),
            zero: Box::new(fill_shape(zero, m)),
            var: var.clone(),
            succ: Box::new(fill_shape(succ, m)),
        },
        Ctx::Abs { var, annot, body } => Term::Abs {
            var: var.clone(),
            annot: annot.clone(),
            body: Box::new(fill_shape(body, m)),
        },
        Ctx::App(f, a) => Term::App(Box::new(fill_shape(f, m)), Box::new(fill_shape(a, m))),
        Ctx::Fix(b) => Term::Fix(Box::new(fill_shape(b, m))),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{abs, app, coin, num, var, Type, TypingContext};
    use super::*;
    use crate::rat::rat;

    #[test]
    fn bare_hole() {
        let c = ObservationContext::hole(TypingContext::empty(), Type::Nat);
        assert_eq!(c.fill(&num(3)).unwrap(), num(3));
        assert_eq!(c.typecheck(&TypingContext::empty()).unwrap(), Type::Nat);
    }

    #[test]
    fn binder_captures_filler() {
        // C = \x:nat. [], hole context (x : nat). Then C[x] = \x:nat. x.
        let c = ObservationContext::new(
            Ctx::Abs {
                var: "x".to_string(),
                annot: Type::Nat,
                body: Box::new(Ctx::Hole),
            },
            TypingContext::of(&[("x", Type::Nat)]),
            Type::Nat,
        );
        assert_eq!(c.fill(&var("x")).unwrap(), abs("x", Type::Nat, var("x")));
        assert_eq!(c.typecheck(&TypingContext::empty()).unwrap(), Type::nat_fn(1));
    }

    #[test]
    fn application_context() {
        let c = ObservationContext::new(
            Ctx::App(
                Box::new(Ctx::from_term(&abs("y", Type::Nat, var("y")))),
                Box::new(Ctx::Hole),
            ),
            TypingContext::empty(),
            Type::Nat,
        );
        assert_eq!(
            c.fill(&coin(rat(1, 2))).unwrap(),
            app(abs("y", Type::Nat, var("y")), coin(rat(1, 2)))
        );
    }

    #[test]
    fn signature_mismatch_is_reported() {
        let c = ObservationContext::hole(TypingContext::empty(), Type::Nat);
        let err = c.fill(&abs("x", Type::Nat, var("x"))).unwrap_err();
        assert!(matches!(err, FillError::Signature { .. }));
        let err = c.fill(&var("oops")).unwrap_err();
        assert!(matches!(err, FillError::IllTypedFiller(_)));
    }

    #[test]
    fn hole_requires_its_context_as_suffix() {
        let c = ObservationContext::hole(TypingContext::of(&[("x", Type::Nat)]), Type::Nat);
        // At top level the ambient context is empty: the hole is out of place.
        assert!(c.typecheck(&TypingContext::empty()).is_err());
        // Under the right binder it is fine.
        let under = ObservationContext::new(
            Ctx::Abs {
                var: "x".to_string(),
                annot: Type::Nat,
                body: Box::new(Ctx::Hole),
            },
            TypingContext::of(&[("x", Type::Nat)]),
            Type::Nat,
        );
        assert!(under.typecheck(&TypingContext::empty()).is_ok());
    }
}
