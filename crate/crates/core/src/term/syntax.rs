use std::fmt;

use super::Term;

/// Operators spelled only with symbol characters are written infix.
pub fn is_infix(op: &str) -> bool {
    !op.is_empty()
        && op
            .chars()
            .all(|c| !c.is_alphanumeric() && !matches!(c, '_' | '\'' | '#' | '@' | '(' | ')' | ','))
}

/// Binding strength of an infix operator; smaller binds tighter. All infix
/// operators associate to the right.
pub fn infix_precedence(op: &str) -> u8 {
    match op {
        "⊕" | "*" => 30,
        ";" => 40,
        "." => 50,
        _ => 45,
    }
}

pub(super) fn write_term(f: &mut fmt::Formatter<'_>, t: &Term) -> fmt::Result {
    match t {
        Term::Var(v) => write!(f, "{}", v.name),
        Term::Fresh(c) => write!(f, "{c}"),
        Term::App(a) => {
            if a.args.is_empty() {
                return write!(f, "{}", a.op);
            }
            if is_infix(a.op.as_str()) && a.args.len() >= 2 {
                let prec = infix_precedence(a.op.as_str());
                let last = a.args.len() - 1;
                for (i, arg) in a.args.iter().enumerate() {
                    if i > 0 {
                        write!(f, " {} ", a.op)?;
                    }
                    let paren = match arg {
                        Term::App(b) if is_infix(b.op.as_str()) && b.args.len() >= 2 => {
                            let p = infix_precedence(b.op.as_str());
                            p > prec || (p == prec && (b.op != a.op || i != last))
                        }
                        _ => false,
                    };
                    if paren {
                        write!(f, "(")?;
                        write_term(f, arg)?;
                        write!(f, ")")?;
                    } else {
                        write_term(f, arg)?;
                    }
                }
                return Ok(());
            }
            write!(f, "{}(", a.op)?;
            for (i, arg) in a.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write_term(f, arg)?;
            }
            write!(f, ")")
        }
    }
}
