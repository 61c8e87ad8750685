//! Immutable symbolic expressions over `x, y, p1, p2` and named parameters.
//!
//! Expressions are reference-counted trees; cloning is cheap and sharing
//! across threads is safe. Construction goes through smart constructors that
//! fold constants and strip arithmetic identities, and [`Expr::simplify`]
//! performs a deeper pass (flattening, like-term and power merging). No full
//! canonicalization is attempted.
//!
//! Differentiation is exact. The derivative of `abs(u)` is taken as
//! `u*u'/abs(u)` (sign treated as locally constant), valid away from the zero
//! locus of `u`; every domain in this crate excludes those loci.
//!
//! Simplification may enlarge the natural domain of an expression (for
//! example `0 * ln(x)` folds to `0`); evaluation of the *simplified* tree is
//! what the semantic guarantees refer to.

mod parse;

pub use parse::{parse, parse_with_params, ParseError, ParseErrorKind, DEFAULT_PARAMS};

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops;

use crate::num;

/// Phase-space variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    P1,
    P2,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::P1, Var::P2];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::P1 => "p1",
            Var::P2 => "p2",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::P1 => 2,
            Var::P2 => 3,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Param(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Expr, Expr),
    PowI(Expr, i32),
    PowF(Expr, f64),
    Sin(Expr),
    Cos(Expr),
    Tan(Expr),
    Exp(Expr),
    Ln(Expr),
    Abs(Expr),
}

/// An immutable symbolic expression. `Clone` is O(1).
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

/// Variable and parameter values for evaluation.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    vars: [Option<f64>; 4],
    params: Vec<(Arc<str>, f64)>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bind the base coordinates only.
    pub fn point(x: f64, y: f64) -> Self {
        Bindings {
            vars: [Some(x), Some(y), None, None],
            params: Vec::new(),
        }
    }

    /// Bind all four phase-space variables.
    pub fn phase(x: f64, y: f64, p1: f64, p2: f64) -> Self {
        Bindings {
            vars: [Some(x), Some(y), Some(p1), Some(p2)],
            params: Vec::new(),
        }
    }

    pub fn with_var(mut self, v: Var, value: f64) -> Self {
        self.vars[v.index()] = Some(value);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.set_param(name, value);
        self
    }

    pub fn set_var(&mut self, v: Var, value: f64) {
        self.vars[v.index()] = Some(value);
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        for (n, v) in self.params.iter_mut() {
            if n.as_ref() == name {
                *v = value;
                return;
            }
        }
        self.params.push((Arc::from(name), value));
    }

    pub fn var(&self, v: Var) -> Option<f64> {
        self.vars[v.index()]
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(n, _)| n.as_ref() == name)
            .map(|(_, v)| *v)
    }

    /// This binding set extended by the parameter bindings of `other`.
    pub fn with_params_from(mut self, other: &Bindings) -> Self {
        for (n, v) in &other.params {
            self.set_param(n, *v);
        }
        self
    }
}

/// Evaluation failure, carrying the offending subterm.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    UnboundVar(Var),
    UnboundParam(Arc<str>),
    DivisionByZero(Expr),
    LnNonPositive(Expr),
    NegativeBaseRealPower(Expr),
    ZeroToNegativePower(Expr),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundVar(v) => write!(f, "unbound variable `{v}`"),
            EvalError::UnboundParam(p) => write!(f, "unbound parameter `{p}`"),
            EvalError::DivisionByZero(e) => write!(f, "division by zero in `{e}`"),
            EvalError::LnNonPositive(e) => write!(f, "ln of non-positive value in `{e}`"),
            EvalError::NegativeBaseRealPower(e) => {
                write!(f, "real power of negative base in `{e}`")
            }
            EvalError::ZeroToNegativePower(e) => {
                write!(f, "zero raised to negative power in `{e}`")
            }
        }
    }
}

impl core::error::Error for EvalError {}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn num(value: f64) -> Self {
        Expr::new(Node::Num(value))
    }

    pub fn int(value: i64) -> Self {
        Expr::num(value as f64)
    }

    pub fn var(v: Var) -> Self {
        Expr::new(Node::Var(v))
    }

    pub fn x() -> Self {
        Expr::var(Var::X)
    }

    pub fn y() -> Self {
        Expr::var(Var::Y)
    }

    pub fn p1() -> Self {
        Expr::var(Var::P1)
    }

    pub fn p2() -> Self {
        Expr::var(Var::P2)
    }

    pub fn param(name: &str) -> Self {
        Expr::new(Node::Param(Arc::from(name)))
    }

    pub fn zero() -> Self {
        Expr::num(0.0)
    }

    pub fn one() -> Self {
        Expr::num(1.0)
    }

    fn as_num(&self) -> Option<f64> {
        match &*self.0 {
            Node::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_num() == Some(1.0)
    }

    /// n-ary sum with flattening, constant folding and zero removal.
    pub fn sum(terms: Vec<Expr>) -> Self {
        let mut constant = 0.0;
        let mut rest: Vec<Expr> = Vec::with_capacity(terms.len());
        let mut stack: Vec<Expr> = terms;
        stack.reverse();
        while let Some(t) = stack.pop() {
            match &*t.0 {
                Node::Num(v) => constant += v,
                Node::Add(children) => {
                    for c in children.iter().rev() {
                        stack.push(c.clone());
                    }
                }
                _ => rest.push(t),
            }
        }
        if constant != 0.0 {
            rest.insert(0, Expr::num(constant));
        }
        match rest.len() {
            0 => Expr::zero(),
            1 => rest.pop().unwrap(),
            _ => Expr::new(Node::Add(rest)),
        }
    }

    /// n-ary product with flattening, constant folding, and annihilation by 0.
    pub fn product(factors: Vec<Expr>) -> Self {
        let mut constant = 1.0;
        let mut rest: Vec<Expr> = Vec::with_capacity(factors.len());
        let mut stack: Vec<Expr> = factors;
        stack.reverse();
        while let Some(t) = stack.pop() {
            match &*t.0 {
                Node::Num(v) => constant *= v,
                Node::Mul(children) => {
                    for c in children.iter().rev() {
                        stack.push(c.clone());
                    }
                }
                _ => rest.push(t),
            }
        }
        if constant == 0.0 {
            return Expr::zero();
        }
        if constant != 1.0 {
            rest.insert(0, Expr::num(constant));
        }
        match rest.len() {
            0 => Expr::one(),
            1 => rest.pop().unwrap(),
            _ => Expr::new(Node::Mul(rest)),
        }
    }

    /// Quotient node; also reachable through the `/` operator.
    #[allow(clippy::should_implement_trait)]
    pub fn div(self, rhs: Expr) -> Self {
        if let (Some(a), Some(b)) = (self.as_num(), rhs.as_num()) {
            if b != 0.0 {
                return Expr::num(a / b);
            }
        }
        if rhs.is_one() {
            return self;
        }
        if self.is_zero() {
            return Expr::zero();
        }
        Expr::new(Node::Div(self, rhs))
    }

    /// Integer power.
    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => return Expr::one(),
            1 => return self,
            _ => {}
        }
        if let Some(v) = self.as_num() {
            return Expr::num(num::powi(v, n));
        }
        match &*self.0 {
            Node::PowI(base, m) => {
                if let Some(prod) = m.checked_mul(n) {
                    return base.clone().powi(prod);
                }
            }
            // |u|^n = u^n for even n.
            Node::Abs(inner) if n % 2 == 0 => return inner.clone().powi(n),
            // Integer powers distribute over products and quotients.
            Node::Mul(factors) => {
                return Expr::product(factors.iter().map(|f| f.clone().powi(n)).collect());
            }
            Node::Div(p, q) if n > 0 => {
                return p.clone().powi(n).div(q.clone().powi(n));
            }
            _ => {}
        }
        Expr::new(Node::PowI(self, n))
    }

    /// Real power. Integer-valued exponents are routed to [`Expr::powi`].
    pub fn powf(self, p: f64) -> Self {
        if num::is_integer(p) && (i32::MIN as f64..=i32::MAX as f64).contains(&p) {
            return self.powi(p as i32);
        }
        if let Some(v) = self.as_num() {
            if v >= 0.0 {
                return Expr::num(num::powf(v, p));
            }
        }
        Expr::new(Node::PowF(self, p))
    }

    pub fn sin(self) -> Self {
        match self.as_num() {
            Some(v) => Expr::num(num::sin(v)),
            None => Expr::new(Node::Sin(self)),
        }
    }

    pub fn cos(self) -> Self {
        match self.as_num() {
            Some(v) => Expr::num(num::cos(v)),
            None => Expr::new(Node::Cos(self)),
        }
    }

    pub fn tan(self) -> Self {
        match self.as_num() {
            Some(v) => Expr::num(num::tan(v)),
            None => Expr::new(Node::Tan(self)),
        }
    }

    pub fn exp(self) -> Self {
        match self.as_num() {
            Some(v) => Expr::num(num::exp(v)),
            None => Expr::new(Node::Exp(self)),
        }
    }

    pub fn ln(self) -> Self {
        match self.as_num() {
            Some(v) if v > 0.0 => Expr::num(num::ln(v)),
            _ => Expr::new(Node::Ln(self)),
        }
    }

    pub fn abs(self) -> Self {
        match &*self.0 {
            Node::Num(v) => Expr::num(num::abs(*v)),
            Node::Abs(_) => self,
            _ => Expr::new(Node::Abs(self)),
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, -rhs])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product(vec![Expr::num(-1.0), self])
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

impl Expr {
    /// Evaluate at the given bindings. All free symbols must be bound.
    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        match &*self.0 {
            Node::Num(v) => Ok(*v),
            Node::Var(v) => b.var(*v).ok_or(EvalError::UnboundVar(*v)),
            Node::Param(p) => b.param(p).ok_or_else(|| EvalError::UnboundParam(p.clone())),
            Node::Add(terms) => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.eval(b)?;
                }
                Ok(acc)
            }
            Node::Mul(factors) => {
                let mut acc = 1.0;
                for t in factors {
                    acc *= t.eval(b)?;
                }
                Ok(acc)
            }
            Node::Div(p, q) => {
                let denom = q.eval(b)?;
                if denom == 0.0 {
                    return Err(EvalError::DivisionByZero(self.clone()));
                }
                Ok(p.eval(b)? / denom)
            }
            Node::PowI(base, n) => {
                let v = base.eval(b)?;
                if v == 0.0 && *n < 0 {
                    return Err(EvalError::ZeroToNegativePower(self.clone()));
                }
                Ok(num::powi(v, *n))
            }
            Node::PowF(base, p) => {
                let v = base.eval(b)?;
                if v < 0.0 {
                    return Err(EvalError::NegativeBaseRealPower(self.clone()));
                }
                if v == 0.0 && *p < 0.0 {
                    return Err(EvalError::ZeroToNegativePower(self.clone()));
                }
                Ok(num::powf(v, *p))
            }
            Node::Sin(e) => Ok(num::sin(e.eval(b)?)),
            Node::Cos(e) => Ok(num::cos(e.eval(b)?)),
            Node::Tan(e) => Ok(num::tan(e.eval(b)?)),
            Node::Exp(e) => Ok(num::exp(e.eval(b)?)),
            Node::Ln(e) => {
                let v = e.eval(b)?;
                if v <= 0.0 {
                    return Err(EvalError::LnNonPositive(self.clone()));
                }
                Ok(num::ln(v))
            }
            Node::Abs(e) => Ok(num::abs(e.eval(b)?)),
        }
    }

    /// True if no variable or parameter occurs.
    pub fn is_constant(&self) -> bool {
        match &*self.0 {
            Node::Num(_) => true,
            Node::Var(_) | Node::Param(_) => false,
            Node::Add(c) | Node::Mul(c) => c.iter().all(Expr::is_constant),
            Node::Div(a, b) => a.is_constant() && b.is_constant(),
            Node::PowI(a, _) | Node::PowF(a, _) => a.is_constant(),
            Node::Sin(a)
            | Node::Cos(a)
            | Node::Tan(a)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Abs(a) => a.is_constant(),
        }
    }

    /// Collect the parameter names occurring in the expression.
    pub fn params(&self) -> Vec<Arc<str>> {
        fn walk(e: &Expr, out: &mut Vec<Arc<str>>) {
            match &*e.0 {
                Node::Param(p) => {
                    if !out.iter().any(|q| q == p) {
                        out.push(p.clone());
                    }
                }
                Node::Num(_) | Node::Var(_) => {}
                Node::Add(c) | Node::Mul(c) => c.iter().for_each(|e| walk(e, out)),
                Node::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::PowI(a, _) | Node::PowF(a, _) => walk(a, out),
                Node::Sin(a)
                | Node::Cos(a)
                | Node::Tan(a)
                | Node::Exp(a)
                | Node::Ln(a)
                | Node::Abs(a) => walk(a, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    /// Substitute fixed values for the given parameters.
    pub fn bind_params(&self, bindings: &Bindings) -> Expr {
        match &*self.0 {
            Node::Param(p) => match bindings.param(p) {
                Some(v) => Expr::num(v),
                None => self.clone(),
            },
            Node::Num(_) | Node::Var(_) => self.clone(),
            Node::Add(c) => Expr::sum(c.iter().map(|e| e.bind_params(bindings)).collect()),
            Node::Mul(c) => Expr::product(c.iter().map(|e| e.bind_params(bindings)).collect()),
            Node::Div(a, b) => a.bind_params(bindings).div(b.bind_params(bindings)),
            Node::PowI(a, n) => a.bind_params(bindings).powi(*n),
            Node::PowF(a, p) => a.bind_params(bindings).powf(*p),
            Node::Sin(a) => a.bind_params(bindings).sin(),
            Node::Cos(a) => a.bind_params(bindings).cos(),
            Node::Tan(a) => a.bind_params(bindings).tan(),
            Node::Exp(a) => a.bind_params(bindings).exp(),
            Node::Ln(a) => a.bind_params(bindings).ln(),
            Node::Abs(a) => a.bind_params(bindings).abs(),
        }
    }
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

impl Expr {
    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Expr {
        match &*self.0 {
            Node::Num(_) | Node::Param(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(terms) => Expr::sum(terms.iter().map(|t| t.diff(v)).collect()),
            Node::Mul(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (i, fi) in factors.iter().enumerate() {
                    let d = fi.diff(v);
                    if d.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<Expr> = Vec::with_capacity(factors.len());
                    parts.push(d);
                    for (j, fj) in factors.iter().enumerate() {
                        if i != j {
                            parts.push(fj.clone());
                        }
                    }
                    terms.push(Expr::product(parts));
                }
                Expr::sum(terms)
            }
            Node::Div(p, q) => {
                let dp = p.diff(v);
                let dq = q.diff(v);
                // (p/q)' = p'/q - p q'/q^2
                dp.div(q.clone()) - (p.clone() * dq).div(q.clone().powi(2))
            }
            Node::PowI(base, n) => {
                let db = base.diff(v);
                Expr::num(*n as f64) * base.clone().powi(n - 1) * db
            }
            Node::PowF(base, p) => {
                let db = base.diff(v);
                Expr::num(*p) * base.clone().powf(p - 1.0) * db
            }
            Node::Sin(u) => u.clone().cos() * u.diff(v),
            Node::Cos(u) => -(u.clone().sin()) * u.diff(v),
            Node::Tan(u) => (Expr::one() + u.clone().tan().powi(2)) * u.diff(v),
            Node::Exp(u) => self.clone() * u.diff(v),
            Node::Ln(u) => u.diff(v).div(u.clone()),
            // d|u| = u u' / |u|, valid away from u = 0.
            Node::Abs(u) => (u.clone() * u.diff(v)).div(self.clone()),
        }
    }
}

// ---------------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------------

fn node_rank(n: &Node) -> u8 {
    match n {
        Node::Num(_) => 0,
        Node::Var(_) => 1,
        Node::Param(_) => 2,
        Node::Add(_) => 3,
        Node::Mul(_) => 4,
        Node::Div(_, _) => 5,
        Node::PowI(_, _) => 6,
        Node::PowF(_, _) => 7,
        Node::Sin(_) => 8,
        Node::Cos(_) => 9,
        Node::Tan(_) => 10,
        Node::Exp(_) => 11,
        Node::Ln(_) => 12,
        Node::Abs(_) => 13,
    }
}

/// Deterministic total order on expressions, used to canonicalize the factor
/// and term order inside `simplify` so that commuted products collide.
fn cmp_expr(a: &Expr, b: &Expr) -> core::cmp::Ordering {
    use core::cmp::Ordering;
    if Arc::ptr_eq(&a.0, &b.0) {
        return Ordering::Equal;
    }
    let (na, nb) = (&*a.0, &*b.0);
    match node_rank(na).cmp(&node_rank(nb)) {
        Ordering::Equal => {}
        other => return other,
    }
    match (na, nb) {
        (Node::Num(x), Node::Num(y)) => x.total_cmp(y),
        (Node::Var(x), Node::Var(y)) => x.index().cmp(&y.index()),
        (Node::Param(x), Node::Param(y)) => x.cmp(y),
        (Node::Add(xs), Node::Add(ys)) | (Node::Mul(xs), Node::Mul(ys)) => {
            for (x, y) in xs.iter().zip(ys.iter()) {
                match cmp_expr(x, y) {
                    Ordering::Equal => {}
                    other => return other,
                }
            }
            xs.len().cmp(&ys.len())
        }
        (Node::Div(x1, x2), Node::Div(y1, y2)) => match cmp_expr(x1, y1) {
            Ordering::Equal => cmp_expr(x2, y2),
            other => other,
        },
        (Node::PowI(x, m), Node::PowI(y, k)) => match cmp_expr(x, y) {
            Ordering::Equal => m.cmp(k),
            other => other,
        },
        (Node::PowF(x, m), Node::PowF(y, k)) => match cmp_expr(x, y) {
            Ordering::Equal => m.total_cmp(k),
            other => other,
        },
        (Node::Sin(x), Node::Sin(y))
        | (Node::Cos(x), Node::Cos(y))
        | (Node::Tan(x), Node::Tan(y))
        | (Node::Exp(x), Node::Exp(y))
        | (Node::Ln(x), Node::Ln(y))
        | (Node::Abs(x), Node::Abs(y)) => cmp_expr(x, y),
        _ => Ordering::Equal,
    }
}

/// Split a term into (numeric coefficient, residual factor).
fn coeff_split(e: &Expr) -> (f64, Expr) {
    match &*e.0 {
        Node::Num(v) => (*v, Expr::one()),
        Node::Mul(factors) => {
            if let Node::Num(v) = &*factors[0].0 {
                let rest: Vec<Expr> = factors[1..].to_vec();
                (*v, Expr::product(rest))
            } else {
                (1.0, e.clone())
            }
        }
        _ => (1.0, e.clone()),
    }
}

/// Split a factor into (base, integer exponent).
fn power_split(e: &Expr) -> (Expr, i32) {
    match &*e.0 {
        Node::PowI(base, n) => (base.clone(), *n),
        _ => (e.clone(), 1),
    }
}

impl Expr {
    /// Bottom-up simplification: constant folding, identity removal, power
    /// merging, like-term collection. The result evaluates to the same value
    /// wherever the original is defined.
    pub fn simplify(&self) -> Expr {
        match &*self.0 {
            Node::Num(_) | Node::Var(_) | Node::Param(_) => self.clone(),
            Node::Add(terms) => {
                let simplified: Vec<Expr> = terms.iter().map(Expr::simplify).collect();
                // Re-run the smart constructor, then merge like terms.
                let flat = Expr::sum(simplified);
                let children = match &*flat.0 {
                    Node::Add(c) => c.clone(),
                    _ => return flat,
                };
                // Like-term merge; a coefficient sum far below its largest
                // contribution is cancellation residue (e.g. two different
                // roundings of 1/3) and is snapped to zero.
                let mut merged: Vec<(f64, f64, Expr)> = Vec::with_capacity(children.len());
                for t in &children {
                    let (c, base) = coeff_split(t);
                    if let Some(slot) = merged.iter_mut().find(|(_, _, b)| *b == base) {
                        slot.0 += c;
                        slot.1 = slot.1.max(num::abs(c));
                    } else {
                        merged.push((c, num::abs(c), base));
                    }
                }
                let mut merged: Vec<(f64, Expr)> = merged
                    .into_iter()
                    .filter(|(c, max_abs, _)| num::abs(*c) > 1e-13 * max_abs)
                    .map(|(c, _, base)| (c, base))
                    .collect();
                merged.sort_by(|a, b| cmp_expr(&a.1, &b.1));
                // Normalize the sum so its leading term is monic, pulling the
                // coefficient out front; constant rescalings of a whole
                // expression then collapse structurally.
                let lead = merged.first().map(|(c, _)| *c).unwrap_or(1.0);
                let extract = lead != 1.0 && lead != 0.0 && merged.len() > 1;
                if extract {
                    for slot in merged.iter_mut() {
                        slot.0 /= lead;
                    }
                }
                let body = Expr::sum(
                    merged
                        .into_iter()
                        .map(|(c, base)| {
                            if base.is_one() {
                                Expr::num(c)
                            } else if c == 1.0 {
                                base
                            } else {
                                Expr::product(vec![Expr::num(c), base])
                            }
                        })
                        .collect(),
                );
                if extract {
                    Expr::product(vec![Expr::num(lead), body])
                } else {
                    body
                }
            }
            Node::Mul(factors) => {
                let simplified: Vec<Expr> = factors.iter().map(Expr::simplify).collect();
                let flat = Expr::product(simplified);
                let children = match &*flat.0 {
                    Node::Mul(c) => c.clone(),
                    _ => return flat,
                };
                // Merge equal bases with integer exponents: u^a * u^b -> u^(a+b).
                let mut coeff = 1.0;
                let mut merged: Vec<(Expr, i32)> = Vec::with_capacity(children.len());
                for fct in &children {
                    if let Node::Num(v) = &*fct.0 {
                        coeff *= v;
                        continue;
                    }
                    let (base, n) = power_split(fct);
                    if let Some(slot) = merged.iter_mut().find(|(b, _)| *b == base) {
                        slot.1 += n;
                    } else {
                        merged.push((base, n));
                    }
                }
                merged.sort_by(|a, b| cmp_expr(&a.0, &b.0));
                let mut parts: Vec<Expr> = Vec::with_capacity(merged.len() + 1);
                parts.push(Expr::num(coeff));
                for (base, n) in merged {
                    if n != 0 {
                        parts.push(base.powi(n));
                    }
                }
                Expr::product(parts)
            }
            Node::Div(p, q) => {
                let sp = p.simplify();
                let sq = q.simplify();
                if let Some(c) = sq.as_num() {
                    if c != 0.0 {
                        return Expr::product(vec![Expr::num(1.0 / c), sp]).simplify();
                    }
                }
                // Pull numeric coefficients out of the quotient, so that
                // constant rescalings cancel structurally.
                let (ca, ra) = coeff_split(&sp);
                let (cb, rb) = coeff_split(&sq);
                if ra == rb && !ra.is_constant() {
                    // u/u -> 1 away from u = 0; domains exclude that locus.
                    return Expr::num(ca / cb);
                }
                if cb != 1.0 && cb != 0.0 {
                    return Expr::product(vec![Expr::num(ca / cb), ra.div(rb)]);
                }
                sp.div(sq)
            }
            Node::PowI(base, n) => base.simplify().powi(*n),
            Node::PowF(base, p) => base.simplify().powf(*p),
            Node::Sin(u) => u.simplify().sin(),
            Node::Cos(u) => u.simplify().cos(),
            Node::Tan(u) => u.simplify().tan(),
            Node::Exp(u) => u.simplify().exp(),
            Node::Ln(u) => u.simplify().ln(),
            Node::Abs(u) => u.simplify().abs(),
        }
    }

    /// Number of nodes in the tree (diagnostics).
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Num(_) | Node::Var(_) | Node::Param(_) => 1,
            Node::Add(c) | Node::Mul(c) => 1 + c.iter().map(Expr::size).sum::<usize>(),
            Node::Div(a, b) => 1 + a.size() + b.size(),
            Node::PowI(a, _) | Node::PowF(a, _) => 1 + a.size(),
            Node::Sin(a)
            | Node::Cos(a)
            | Node::Tan(a)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Abs(a) => 1 + a.size(),
        }
    }
}

// ---------------------------------------------------------------------------
// Printing (the output re-parses to a semantically identical expression)
// ---------------------------------------------------------------------------

fn fmt_f64(v: f64) -> String {
    if num::is_integer(v) && num::abs(v) < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Operator precedence tiers used when parenthesizing.
#[derive(PartialOrd, PartialEq, Clone, Copy)]
enum Prec {
    Sum = 1,
    Product = 2,
    Unary = 3,
    Power = 4,
    Atom = 5,
}

fn prec(e: &Expr) -> Prec {
    match &*e.0 {
        Node::Num(v) => {
            if *v < 0.0 {
                Prec::Unary
            } else {
                Prec::Atom
            }
        }
        Node::Var(_) | Node::Param(_) => Prec::Atom,
        Node::Add(_) => Prec::Sum,
        Node::Mul(_) | Node::Div(_, _) => Prec::Product,
        Node::PowI(_, _) | Node::PowF(_, _) => Prec::Power,
        Node::Sin(_) | Node::Cos(_) | Node::Tan(_) | Node::Exp(_) | Node::Ln(_) | Node::Abs(_) => {
            Prec::Atom
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: Prec) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Num(v) => f.write_str(&fmt_f64(*v)),
            Node::Var(v) => f.write_str(v.name()),
            Node::Param(p) => f.write_str(p),
            Node::Add(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if i == 0 {
                        write_child(f, t, Prec::Sum)?;
                        continue;
                    }
                    let (c, base) = coeff_split(t);
                    if c < 0.0 {
                        let flipped = if base.is_one() {
                            Expr::num(-c)
                        } else if c == -1.0 {
                            base
                        } else {
                            Expr::product(vec![Expr::num(-c), base])
                        };
                        write!(f, " - ")?;
                        write_child(f, &flipped, Prec::Product)?;
                    } else {
                        write!(f, " + ")?;
                        write_child(f, t, Prec::Product)?;
                    }
                }
                Ok(())
            }
            Node::Mul(factors) => {
                let mut rest: &[Expr] = factors;
                if let Node::Num(v) = &*factors[0].0 {
                    if *v == -1.0 && factors.len() > 1 {
                        write!(f, "-")?;
                        rest = &factors[1..];
                    }
                }
                for (i, t) in rest.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write_child(f, t, Prec::Product)?;
                }
                Ok(())
            }
            Node::Div(p, q) => {
                write_child(f, p, Prec::Product)?;
                write!(f, "/")?;
                // Right operand binds tighter: a/(b*c) needs parens.
                if prec(q) <= Prec::Product {
                    write!(f, "({q})")
                } else {
                    write!(f, "{q}")
                }
            }
            Node::PowI(base, n) => {
                write_child(f, base, Prec::Atom)?;
                if *n < 0 {
                    write!(f, "^({n})")
                } else {
                    write!(f, "^{n}")
                }
            }
            Node::PowF(base, p) => {
                write_child(f, base, Prec::Atom)?;
                if *p < 0.0 {
                    write!(f, "^({})", fmt_f64(*p))
                } else {
                    write!(f, "^{}", fmt_f64(*p))
                }
            }
            Node::Sin(u) => write!(f, "sin({u})"),
            Node::Cos(u) => write!(f, "cos({u})"),
            Node::Tan(u) => write!(f, "tan({u})"),
            Node::Exp(u) => write!(f, "exp({u})"),
            Node::Ln(u) => write!(f, "ln({u})"),
            Node::Abs(u) => write!(f, "abs({u})"),
        }
    }
}
