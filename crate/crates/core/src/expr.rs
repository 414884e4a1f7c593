//! Symbolic expressions in `(z, zbar, w, wbar, p, pbar)` with exact Wirtinger
//! derivatives.
//!
//! The six slots are treated as independent complex variables. `conj` is
//! pushed down to the leaves on construction, so a built tree never holds a
//! `Conj` node and differentiation only needs the sum, product, reciprocal and
//! power rules.
//!
//! JSON form is a prefix tree: a number or `["const", re, im]` for constants,
//! a slot name (`"z"`, `"zbar"`, ...) for variables, and
//! `["+", a, b, ..]`, `["*", a, b, ..]`, `["-", a]`, `["-", a, b]`,
//! `["/", a, b]`, `["conj", a]`, `["inv", a]`, `["pow", a, n]` for the rest.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;

pub const SLOT_NAMES: [&str; 6] = ["z", "zbar", "w", "wbar", "p", "pbar"];

/// Index of the conjugate slot.
pub fn bar(slot: usize) -> usize {
    slot ^ 1
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Var(usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Neg(Arc<Expr>),
    Conj(Arc<Expr>),
    Recip(Arc<Expr>),
    Pow(Arc<Expr>, i32),
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(ZERO)
    }

    pub fn one() -> Expr {
        Expr::Const(ONE)
    }

    pub fn c(v: C64) -> Expr {
        Expr::Const(v)
    }

    pub fn re(v: f64) -> Expr {
        Expr::Const(C64::new(v, 0.0))
    }

    pub fn var(slot: usize) -> Expr {
        assert!(slot < 6, "slot {slot} out of range");
        Expr::Var(slot)
    }

    pub fn z() -> Expr {
        Expr::Var(0)
    }
    pub fn zbar() -> Expr {
        Expr::Var(1)
    }
    pub fn w() -> Expr {
        Expr::Var(2)
    }
    pub fn wbar() -> Expr {
        Expr::Var(3)
    }
    pub fn p() -> Expr {
        Expr::Var(4)
    }
    pub fn pbar() -> Expr {
        Expr::Var(5)
    }

    pub fn as_const(&self) -> Option<C64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(ZERO)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(ONE)
    }

    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut k = ZERO;
        for t in terms {
            match t {
                Expr::Const(c) => k += c,
                Expr::Add(v) => {
                    for u in v {
                        match u {
                            Expr::Const(c) => k += c,
                            u => out.push(u),
                        }
                    }
                }
                t => out.push(t),
            }
        }
        if k != ZERO {
            out.push(Expr::Const(k));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }

    pub fn product(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut out = Vec::new();
        let mut k = ONE;
        for f in factors {
            match f {
                Expr::Const(c) => k *= c,
                Expr::Mul(v) => {
                    for u in v {
                        match u {
                            Expr::Const(c) => k *= c,
                            u => out.push(u),
                        }
                    }
                }
                f => out.push(f),
            }
        }
        if k == ZERO {
            return Expr::zero();
        }
        if k != ONE {
            out.insert(0, Expr::Const(k));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Mul(out),
        }
    }

    pub fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(a) => (*a).clone(),
            e => Expr::Neg(Arc::new(e)),
        }
    }

    pub fn conj(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Var(k) => Expr::Var(bar(k)),
            Expr::Add(v) => Expr::sum(v.into_iter().map(Expr::conj)),
            Expr::Mul(v) => Expr::product(v.into_iter().map(Expr::conj)),
            Expr::Neg(a) => (*a).clone().conj().neg(),
            Expr::Conj(a) => (*a).clone(),
            Expr::Recip(a) => (*a).clone().conj().recip(),
            Expr::Pow(a, n) => (*a).clone().conj().pow(n),
        }
    }

    pub fn recip(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.inv()),
            Expr::Recip(a) => (*a).clone(),
            Expr::Pow(a, n) => Expr::Pow(a, -n),
            e => Expr::Recip(Arc::new(e)),
        }
    }

    pub fn pow(self, n: i32) -> Expr {
        match (self, n) {
            (_, 0) => Expr::one(),
            (e, 1) => e,
            (e, -1) => e.recip(),
            (Expr::Const(c), n) => Expr::Const(c.powi(n)),
            (Expr::Pow(a, m), n) => Expr::Pow(a, m * n),
            (e, n) => Expr::Pow(Arc::new(e), n),
        }
    }

    pub fn sub(self, other: Expr) -> Expr {
        Expr::sum([self, other.neg()])
    }

    pub fn div(self, other: Expr) -> Expr {
        Expr::product([self, other.recip()])
    }

    pub fn eval(&self, x: &[C64; 6]) -> C64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(k) => x[*k],
            Expr::Add(v) => v.iter().map(|e| e.eval(x)).sum(),
            Expr::Mul(v) => v.iter().map(|e| e.eval(x)).product(),
            Expr::Neg(a) => -a.eval(x),
            Expr::Conj(a) => {
                let mut y = *x;
                for k in 0..6 {
                    y[k] = x[bar(k)].conj();
                }
                a.eval(&y).conj()
            }
            Expr::Recip(a) => a.eval(x).inv(),
            Expr::Pow(a, n) => a.eval(x).powi(*n),
        }
    }

    /// Evaluation at a genuine point, conjugate slots filled consistently.
    pub fn at(&self, z: C64, w: C64, p: C64) -> C64 {
        self.eval(&[z, z.conj(), w, w.conj(), p, p.conj()])
    }

    /// Partial derivative in slot `k`, the other five held fixed.
    pub fn diff(&self, k: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(j) => {
                if *j == k {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(v) => Expr::sum(v.iter().map(|e| e.diff(k))),
            Expr::Mul(v) => Expr::sum((0..v.len()).map(|i| {
                let d = v[i].diff(k);
                if d.is_zero() {
                    return Expr::zero();
                }
                Expr::product(
                    v.iter()
                        .enumerate()
                        .map(|(j, e)| if j == i { d.clone() } else { e.clone() }),
                )
            })),
            Expr::Neg(a) => a.diff(k).neg(),
            Expr::Conj(a) => a.diff(bar(k)).conj(),
            Expr::Recip(a) => {
                let d = a.diff(k);
                if d.is_zero() {
                    return Expr::zero();
                }
                Expr::product([d, (**a).clone().pow(-2)]).neg()
            }
            Expr::Pow(a, n) => {
                let d = a.diff(k);
                if d.is_zero() {
                    return Expr::zero();
                }
                Expr::product([Expr::re(*n as f64), (**a).clone().pow(n - 1), d])
            }
        }
    }

    /// Derivative in the real coordinate `r` of `(Re z, Im z, Re w, Im w, Re p, Im p)`.
    pub fn diff_real(&self, r: usize) -> Expr {
        let (a, b) = (self.diff(2 * (r / 2)), self.diff(2 * (r / 2) + 1));
        if r % 2 == 0 {
            Expr::sum([a, b])
        } else {
            Expr::product([Expr::c(C64::new(0.0, 1.0)), a.sub(b)])
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Add(v) | Expr::Mul(v) => 1 + v.iter().map(Expr::size).sum::<usize>(),
            Expr::Neg(a) | Expr::Conj(a) | Expr::Recip(a) | Expr::Pow(a, _) => 1 + a.size(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Expr::Const(c) if c.im == 0.0 => json!(c.re),
            Expr::Const(c) => json!(["const", c.re, c.im]),
            Expr::Var(k) => json!(SLOT_NAMES[*k]),
            Expr::Add(v) => {
                let mut out = vec![json!("+")];
                out.extend(v.iter().map(Expr::to_json));
                Value::Array(out)
            }
            Expr::Mul(v) => {
                let mut out = vec![json!("*")];
                out.extend(v.iter().map(Expr::to_json));
                Value::Array(out)
            }
            Expr::Neg(a) => json!(["-", a.to_json()]),
            Expr::Conj(a) => json!(["conj", a.to_json()]),
            Expr::Recip(a) => json!(["inv", a.to_json()]),
            Expr::Pow(a, n) => json!(["pow", a.to_json(), n]),
        }
    }

    pub fn from_json(v: &Value) -> Result<Expr> {
        let bad = |msg: String| Error::Invalid(format!("expression: {msg}"));
        match v {
            Value::Number(n) => n
                .as_f64()
                .map(Expr::re)
                .ok_or_else(|| bad(format!("number {n} out of range"))),
            Value::String(s) => SLOT_NAMES
                .iter()
                .position(|name| name == s)
                .map(Expr::Var)
                .ok_or_else(|| bad(format!("unknown variable `{s}`"))),
            Value::Array(items) => {
                let head = items
                    .first()
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("array must start with an operator name".into()))?;
                let args = &items[1..];
                let sub = |i: usize| -> Result<Expr> {
                    args.get(i)
                        .ok_or_else(|| bad(format!("`{head}` is missing argument {i}")))
                        .and_then(Expr::from_json)
                };
                let arity = |n: usize| -> Result<()> {
                    if args.len() == n {
                        Ok(())
                    } else {
                        Err(bad(format!("`{head}` takes {n} arguments, got {}", args.len())))
                    }
                };
                match head {
                    "const" => {
                        arity(2)?;
                        let re = args[0].as_f64().ok_or_else(|| bad("const re must be a number".into()))?;
                        let im = args[1].as_f64().ok_or_else(|| bad("const im must be a number".into()))?;
                        Ok(Expr::c(C64::new(re, im)))
                    }
                    "+" => Ok(Expr::sum(args.iter().map(Expr::from_json).collect::<Result<Vec<_>>>()?)),
                    "*" => Ok(Expr::product(args.iter().map(Expr::from_json).collect::<Result<Vec<_>>>()?)),
                    "-" => match args.len() {
                        1 => Ok(sub(0)?.neg()),
                        2 => Ok(sub(0)?.sub(sub(1)?)),
                        n => Err(bad(format!("`-` takes 1 or 2 arguments, got {n}"))),
                    },
                    "/" => {
                        arity(2)?;
                        Ok(sub(0)?.div(sub(1)?))
                    }
                    "conj" => {
                        arity(1)?;
                        Ok(sub(0)?.conj())
                    }
                    "inv" => {
                        arity(1)?;
                        Ok(sub(0)?.recip())
                    }
                    "pow" => {
                        arity(2)?;
                        let n = args[1]
                            .as_i64()
                            .and_then(|n| i32::try_from(n).ok())
                            .ok_or_else(|| bad("pow exponent must be an integer".into()))?;
                        Ok(sub(0)?.pow(n))
                    }
                    other => Err(bad(format!("unknown operator `{other}`"))),
                }
            }
            other => Err(bad(format!("unexpected JSON value {other}"))),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        Expr::from_json(&v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::sum([self, o])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::sub(self, o)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::product([self, o])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        Expr::div(self, o)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
