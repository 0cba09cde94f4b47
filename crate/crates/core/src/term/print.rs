use std::fmt::{self, Display, Formatter, Write};

use super::{Arg, ExtTerm, HeapTerm, Heaplet, Location, PredCall, Value};

const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const DISJ: u8 = 4;
const CONJ: u8 = 5;
const ATOM: u8 = 6;

impl Display for Location {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.root)?;
        for field in &self.path {
            write!(f, ".{field}")?;
        }
        Ok(())
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Value::Lit(n) => write!(f, "{n}"),
            Value::Sym(loc) => write!(f, "{loc}"),
            Value::Nil => f.write_str("nil"),
            Value::Record(fields) => {
                f.write_char('(')?;
                for (i, (name, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name}: {v}")?;
                }
                f.write_char(')')
            }
        }
    }
}

impl Display for Heaplet {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{} |-> {}", self.loc, self.val)
    }
}

impl Display for PredCall {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match arg {
                Arg::Value(v) => write!(f, "{v}")?,
                Arg::Term(t) => write_heap(f, t, 0)?,
            }
        }
        f.write_char(')')
    }
}

fn heap_prec(t: &HeapTerm) -> u8 {
    match t {
        HeapTerm::Disj(..) => DISJ,
        HeapTerm::Conj(..) => CONJ,
        _ => ATOM,
    }
}

fn write_heap(f: &mut Formatter<'_>, t: &HeapTerm, min: u8) -> fmt::Result {
    let prec = heap_prec(t);
    if prec < min {
        f.write_char('(')?;
    }
    match t {
        HeapTerm::Emp => f.write_str("emp")?,
        HeapTerm::TrueTotal => f.write_str("true")?,
        HeapTerm::FalseTotal => f.write_str("false")?,
        HeapTerm::TruePartial(o) => write!(f, "true({o})")?,
        HeapTerm::FalsePartial(o) => write!(f, "false({o})")?,
        HeapTerm::EmpPartial(o) => write!(f, "emp({o})")?,
        HeapTerm::PointsTo(h) => write!(f, "{h}")?,
        HeapTerm::Conj(l, r) => {
            write_heap(f, l, CONJ)?;
            f.write_str(" * ")?;
            write_heap(f, r, CONJ + 1)?;
        }
        HeapTerm::Disj(l, r) => {
            write_heap(f, l, DISJ)?;
            f.write_str(" || ")?;
            write_heap(f, r, DISJ + 1)?;
        }
        HeapTerm::Inv(inner) => {
            f.write_str("inv(")?;
            write_heap(f, inner, 0)?;
            f.write_char(')')?;
        }
        HeapTerm::Call(call) => write!(f, "{call}")?,
    }
    if prec < min {
        f.write_char(')')?;
    }
    Ok(())
}

impl Display for HeapTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_heap(f, self, 0)
    }
}

fn ext_prec(t: &ExtTerm) -> u8 {
    match t {
        ExtTerm::Heap(h) => heap_prec(h),
        ExtTerm::Not(_) => NOT,
        ExtTerm::And(..) => AND,
        ExtTerm::Or(..) => OR,
    }
}

fn write_ext(f: &mut Formatter<'_>, t: &ExtTerm, min: u8) -> fmt::Result {
    let prec = ext_prec(t);
    if prec < min {
        f.write_char('(')?;
    }
    match t {
        ExtTerm::Heap(h) => write_heap(f, h, 0)?,
        ExtTerm::Not(e) => {
            f.write_char('!')?;
            write_ext(f, e, NOT)?;
        }
        ExtTerm::And(l, r) => {
            write_ext(f, l, AND)?;
            f.write_str(" && ")?;
            write_ext(f, r, AND + 1)?;
        }
        ExtTerm::Or(l, r) => {
            write_ext(f, l, OR)?;
            f.write_str(" | ")?;
            write_ext(f, r, OR + 1)?;
        }
    }
    if prec < min {
        f.write_char(')')?;
    }
    Ok(())
}

impl Display for ExtTerm {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_ext(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(l: &str, v: Value) -> HeapTerm {
        HeapTerm::pt(Location::from_dotted(l), v)
    }

    #[test]
    fn prints_single_heaplet() {
        assert_eq!(pt("a", Value::Lit(5)).to_string(), "a |-> 5");
    }

    #[test]
    fn precedence_omits_parentheses() {
        let t = HeapTerm::disj(
            HeapTerm::conj(pt("a", Value::sym("x")), pt("b", Value::sym("y"))),
            pt("c", Value::sym("z")),
        );
        assert_eq!(t.to_string(), "a |-> x * b |-> y || c |-> z");
    }

    #[test]
    fn prints_inverse() {
        assert_eq!(
            HeapTerm::inv(pt("a", Value::sym("b"))).to_string(),
            "inv(a |-> b)"
        );
    }

    #[test]
    fn right_nesting_keeps_parentheses() {
        let t = HeapTerm::conj(
            pt("a", Value::sym("b")),
            HeapTerm::disj(pt("c", Value::sym("d")), pt("b", Value::sym("c"))),
        );
        assert_eq!(t.to_string(), "a |-> b * (c |-> d || b |-> c)");
    }

    #[test]
    fn logical_connectives() {
        let a = ExtTerm::Heap(pt("a", Value::Nil));
        let b = ExtTerm::Heap(HeapTerm::Emp);
        let t = ExtTerm::Not(Box::new(ExtTerm::And(Box::new(a.clone()), Box::new(b))));
        assert_eq!(t.to_string(), "!(a |-> nil && emp)");
        let o = ExtTerm::Or(Box::new(a.clone()), Box::new(ExtTerm::Not(Box::new(a))));
        assert_eq!(o.to_string(), "a |-> nil | !a |-> nil");
    }

    #[test]
    fn record_and_negative_literal() {
        let t = pt(
            "x",
            Value::Record(vec![("f".into(), Value::Lit(-3)), ("g".into(), Value::Nil)]),
        );
        assert_eq!(t.to_string(), "x |-> (f: -3, g: nil)");
    }
}
