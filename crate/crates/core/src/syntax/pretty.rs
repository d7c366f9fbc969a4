//! Pretty-printing. `parse(pretty(M))` is `M` up to alpha-equivalence (and is
//! in fact syntactically `M` whenever the term's variable names are ordinary
//! identifiers, which all our constructors guarantee).

use std::fmt;

use num::One;

use super::{Term, Type};

/// Precedence context for printing.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    /// Anywhere a full term may appear.
    Term,
    /// Function or argument position of an application, or under `succ`.
    Atom,
}

fn fmt_term(t: &Term, lvl: Level, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Term::Num(n) => write!(f, "{n}"),
        Term::Var(x) => write!(f, "{x}"),
        Term::Coin(p) => {
            if p.denom().is_one() {
                write!(f, "coin({})", p.numer())
            } else {
                write!(f, "coin({}/{})", p.numer(), p.denom())
            }
        }
        Term::Succ(b) => {
            let needs_paren = lvl == Level::Atom;
            if needs_paren {
                write!(f, "(")?;
            }
            write!(f, "succ ")?;
            fmt_term(b, Level::Atom, f)?;
            if needs_paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::App(fun, arg) => {
            let needs_paren = lvl == Level::Atom;
            if needs_paren {
                write!(f, "(")?;
            }
            fmt_app(fun, f)?;
            write!(f, " ")?;
            fmt_term(arg, Level::Atom, f)?;
            if needs_paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Abs { var, annot, body } => {
            let needs_paren = lvl == Level::Atom;
            if needs_paren {
                write!(f, "(")?;
            }
            write!(f, "\\{var}:{annot}. ")?;
            fmt_term(body, Level::Term, f)?;
            if needs_paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Fix(b) => {
            let needs_paren = lvl == Level::Atom;
            if needs_paren {
                write!(f, "(")?;
            }
            write!(f, "fix ")?;
            fmt_term(b, Level::Term, f)?;
            if needs_paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::If {
            scrut,
            zero,
            var,
            succ,
        } => {
            let needs_paren = lvl == Level::Atom;
            if needs_paren {
                write!(f, "(")?;
            }
            write!(f, "if ")?;
            fmt_term(scrut, Level::Term, f)?;
            write!(f, " then ")?;
            fmt_term(zero, Level::Term, f)?;
            write!(f, " else [{var}] ")?;
            fmt_term(succ, Level::Term, f)?;
            if needs_paren {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

// The head of an application chain stays unparenthesized so `f x y` prints
// flat; anything lower-precedence in head position gets wrapped.
fn fmt_app(head: &Term, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match head {
        Term::App(fun, arg) => {
            fmt_app(fun, f)?;
            write!(f, " ")?;
            fmt_term(arg, Level::Atom, f)
        }
        _ => fmt_term(head, Level::Atom, f),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, Level::Term, f)
    }
}

/// Concrete syntax of a term; inverse of parsing up to alpha-equivalence.
pub fn pretty(t: &Term) -> String {
    t.to_string()
}

/// Concrete syntax of a type.
pub fn pretty_type(t: &Type) -> String {
    t.to_string()
}
