use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops;

use super::chart::Chart;

pub type C64 = num_complex::Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// One node of an expression tree.
///
/// Building a [`Node`] directly and wrapping it with [`Expr::from_node`]
/// skips simplification; every other constructor simplifies.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(C64),
    /// Zero-based coordinate index into the chart.
    Coord(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Neg(Expr),
    Quotient(Expr, Expr),
    Pow(Expr, i32),
    Exp(Expr),
    Ln(Expr),
    Sin(Expr),
    Cos(Expr),
    Conj(Expr),
}

/// Immutable, cheaply clonable expression (shared DAG).
#[derive(Clone)]
pub struct Expr(Arc<Node>);

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("chart declares no complex pair {0}")]
pub struct NoSuchPair(pub usize);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: C64) -> Self {
        Expr::from_node(Node::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Expr::constant(C64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Expr::constant(ZERO)
    }

    pub fn one() -> Self {
        Expr::constant(ONE)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Expr::constant(C64::new(0.0, 1.0))
    }

    pub fn coord(index: usize) -> Self {
        Expr::from_node(Node::Coord(index))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(ZERO)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(ONE)
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Self {
        let mut out = Vec::new();
        let mut acc = ZERO;
        let mut push = |t: &Expr, out: &mut Vec<Expr>| match t.node() {
            Node::Const(c) => acc += *c,
            _ => out.push(t.clone()),
        };
        for t in terms {
            match t.node() {
                Node::Sum(inner) => inner.iter().for_each(|x| push(x, &mut out)),
                _ => push(&t, &mut out),
            }
        }
        if acc != ZERO {
            out.push(Expr::constant(acc));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(out)),
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Self {
        let mut out = Vec::new();
        let mut acc = ONE;
        for f in factors {
            let items: &[Expr] = match f.node() {
                Node::Product(inner) => inner,
                _ => core::slice::from_ref(&f),
            };
            for x in items {
                match x.node() {
                    Node::Const(c) => acc *= *c,
                    _ => out.push(x.clone()),
                }
            }
        }
        if acc == ZERO {
            return Expr::zero();
        }
        if acc != ONE {
            out.insert(0, Expr::constant(acc));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Product(out)),
        }
    }

    pub fn neg(&self) -> Self {
        match self.node() {
            Node::Const(c) => Expr::constant(-*c),
            Node::Neg(inner) => inner.clone(),
            Node::Product(fs) if fs[0].as_const().is_some() => {
                let mut fs = fs.clone();
                fs[0] = Expr::constant(-fs[0].as_const().unwrap());
                Expr::product(fs)
            }
            _ => Expr::from_node(Node::Neg(self.clone())),
        }
    }

    pub fn quotient(num: &Expr, den: &Expr) -> Self {
        if den.is_one() {
            return num.clone();
        }
        if num.is_zero() {
            return Expr::zero();
        }
        match (num.as_const(), den.as_const()) {
            (Some(a), Some(b)) if b != ZERO => Expr::constant(a / b),
            _ => Expr::from_node(Node::Quotient(num.clone(), den.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Expr::one();
        }
        if n == 1 {
            return self.clone();
        }
        match self.node() {
            Node::Const(c) if *c != ZERO || n > 0 => Expr::constant(c.powi(n)),
            Node::Pow(base, m) => match m.checked_mul(n) {
                Some(k) => base.powi(k),
                None => Expr::from_node(Node::Pow(self.clone(), n)),
            },
            _ => Expr::from_node(Node::Pow(self.clone(), n)),
        }
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::from_node(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        match self.as_const() {
            Some(c) if c != ZERO => Expr::constant(c.ln()),
            _ => Expr::from_node(Node::Ln(self.clone())),
        }
    }

    pub fn sin(&self) -> Self {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::from_node(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Self {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::from_node(Node::Cos(self.clone())),
        }
    }

    /// A `conj` node with the structural rules applied at the top only.
    /// See [`Expr::conj_expr`] for full distribution.
    pub fn conj(&self) -> Self {
        match self.node() {
            Node::Const(c) => Expr::constant(c.conj()),
            Node::Coord(_) => self.clone(),
            Node::Conj(inner) => inner.clone(),
            _ => Expr::from_node(Node::Conj(self.clone())),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Expr::product([Expr::constant(c), self.clone()])
    }

    /// Rebuild the tree bottom-up through the simplifying constructors.
    pub fn simplify(&self) -> Self {
        let mut memo = BTreeMap::new();
        self.simplify_memo(&mut memo)
    }

    fn simplify_memo(&self, memo: &mut BTreeMap<usize, Expr>) -> Self {
        if let Some(e) = memo.get(&self.addr()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) | Node::Coord(_) => self.clone(),
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.simplify_memo(memo)).collect::<Vec<_>>()),
            Node::Product(fs) => {
                Expr::product(fs.iter().map(|f| f.simplify_memo(memo)).collect::<Vec<_>>())
            }
            Node::Neg(a) => a.simplify_memo(memo).neg(),
            Node::Quotient(a, b) => Expr::quotient(&a.simplify_memo(memo), &b.simplify_memo(memo)),
            Node::Pow(a, n) => a.simplify_memo(memo).powi(*n),
            Node::Exp(a) => a.simplify_memo(memo).exp(),
            Node::Ln(a) => a.simplify_memo(memo).ln(),
            Node::Sin(a) => a.simplify_memo(memo).sin(),
            Node::Cos(a) => a.simplify_memo(memo).cos(),
            Node::Conj(a) => a.simplify_memo(memo).conj(),
        };
        memo.insert(self.addr(), out.clone());
        out
    }

    /// Structural complex conjugation distributed over the whole tree.
    /// Coordinates are fixed. The result contains no `conj` nodes.
    ///
    /// `ln` is conjugated structurally, which matches the principal branch
    /// only away from the negative real axis.
    pub fn conj_expr(&self) -> Self {
        let mut memo = BTreeMap::new();
        self.conj_memo(&mut memo)
    }

    fn conj_memo(&self, memo: &mut BTreeMap<usize, Expr>) -> Self {
        if let Some(e) = memo.get(&self.addr()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(c) => Expr::constant(c.conj()),
            Node::Coord(_) => self.clone(),
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.conj_memo(memo)).collect::<Vec<_>>()),
            Node::Product(fs) => Expr::product(fs.iter().map(|f| f.conj_memo(memo)).collect::<Vec<_>>()),
            Node::Neg(a) => a.conj_memo(memo).neg(),
            Node::Quotient(a, b) => Expr::quotient(&a.conj_memo(memo), &b.conj_memo(memo)),
            Node::Pow(a, n) => a.conj_memo(memo).powi(*n),
            Node::Exp(a) => a.conj_memo(memo).exp(),
            Node::Ln(a) => a.conj_memo(memo).ln(),
            Node::Sin(a) => a.conj_memo(memo).sin(),
            Node::Cos(a) => a.conj_memo(memo).cos(),
            Node::Conj(a) => a.simplify(),
        };
        memo.insert(self.addr(), out.clone());
        out
    }

    /// Exact partial derivative along coordinate `k` (zero-based).
    pub fn partial(&self, k: usize) -> Self {
        let mut memo = BTreeMap::new();
        self.partial_memo(k, &mut memo)
    }

    fn partial_memo(&self, k: usize, memo: &mut BTreeMap<usize, Expr>) -> Self {
        if let Some(e) = memo.get(&self.addr()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Coord(j) => {
                if *j == k {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(ts) => Expr::sum(ts.iter().map(|t| t.partial_memo(k, memo)).collect::<Vec<_>>()),
            Node::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let df = f.partial_memo(k, memo);
                    if df.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = fs.clone();
                    factors[i] = df;
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Node::Neg(a) => a.partial_memo(k, memo).neg(),
            Node::Quotient(a, b) => {
                let da = a.partial_memo(k, memo);
                let db = b.partial_memo(k, memo);
                let first = Expr::quotient(&da, b);
                if db.is_zero() {
                    first
                } else {
                    let second = Expr::quotient(&Expr::product([a.clone(), db]), &b.powi(2));
                    first - second
                }
            }
            Node::Pow(a, n) => {
                let da = a.partial_memo(k, memo);
                Expr::product([Expr::real(*n as f64), a.powi(n - 1), da])
            }
            Node::Exp(a) => Expr::product([self.clone(), a.partial_memo(k, memo)]),
            Node::Ln(a) => Expr::quotient(&a.partial_memo(k, memo), a),
            Node::Sin(a) => Expr::product([a.cos(), a.partial_memo(k, memo)]),
            Node::Cos(a) => Expr::product([a.sin(), a.partial_memo(k, memo)]).neg(),
            Node::Conj(a) => a.partial_memo(k, memo).conj(),
        };
        memo.insert(self.addr(), out.clone());
        out
    }

    /// Wirtinger derivative for complex pair `k` of `chart`:
    /// `½(∂_re − i ∂_im)` when `conjugated` is false, `½(∂_re + i ∂_im)`
    /// (the `∂/∂z̄` derivative) when true.
    pub fn wirtinger(&self, chart: &Chart, k: usize, conjugated: bool) -> Result<Self, NoSuchPair> {
        let (re, im) = chart.pair(k).ok_or(NoSuchPair(k))?;
        let sign = if conjugated { 1.0 } else { -1.0 };
        let d_re = self.partial(re);
        let d_im = self.partial(im);
        Ok(Expr::sum([d_re, d_im.scale(C64::new(0.0, sign))]).scale(C64::new(0.5, 0.0)))
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        fn walk(e: &Expr, seen: &mut BTreeMap<usize, ()>) {
            if seen.insert(e.addr(), ()).is_some() {
                return;
            }
            e.children().iter().for_each(|c| walk(c, seen));
        }
        let mut seen = BTreeMap::new();
        walk(self, &mut seen);
        seen.len()
    }

    pub(crate) fn children(&self) -> Vec<Expr> {
        match self.node() {
            Node::Const(_) | Node::Coord(_) => Vec::new(),
            Node::Sum(v) | Node::Product(v) => v.clone(),
            Node::Quotient(a, b) => alloc::vec![a.clone(), b.clone()],
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Conj(a) => alloc::vec![a.clone()],
        }
    }

    /// Highest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        fn walk(e: &Expr, seen: &mut BTreeMap<usize, ()>, best: &mut Option<usize>) {
            if seen.insert(e.addr(), ()).is_some() {
                return;
            }
            if let Node::Coord(i) = e.node() {
                *best = Some(best.map_or(*i, |b: usize| b.max(*i)));
            }
            e.children().iter().for_each(|c| walk(c, seen, best));
        }
        let mut seen = BTreeMap::new();
        let mut best = None;
        walk(self, &mut seen, &mut best);
        best
    }

    /// Text form that [`super::parse`] reads back to the same tree.
    pub fn display<'a>(&'a self, chart: &'a Chart) -> Display<'a> {
        Display { expr: self, chart: Some(chart) }
    }

    pub fn to_text(&self, chart: &Chart) -> String {
        alloc::format!("{}", self.display(chart))
    }
}

// Printing. Levels follow the grammar: 0 sum, 1 term, 2 factor, 3 base.

pub struct Display<'a> {
    expr: &'a Expr,
    chart: Option<&'a Chart>,
}

fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        return String::from(if x > 0.0 { "1e999" } else { "-1e999" });
    }
    alloc::format!("{:?}", x)
}

fn render(e: &Expr, chart: Option<&Chart>) -> (String, u8) {
    use alloc::format;
    let wrap = |e: &Expr, min: u8| {
        let (s, lvl) = render(e, chart);
        if lvl < min {
            format!("({s})")
        } else {
            s
        }
    };
    match e.node() {
        Node::Const(c) => {
            if c.im == 0.0 {
                (fmt_real(c.re), 3)
            } else if c.re == 0.0 {
                (format!("{}*i", fmt_real(c.im)), 1)
            } else if c.im < 0.0 {
                (format!("{} - {}*i", fmt_real(c.re), fmt_real(-c.im)), 0)
            } else {
                (format!("{} + {}*i", fmt_real(c.re), fmt_real(c.im)), 0)
            }
        }
        Node::Coord(i) => match chart {
            Some(ch) if *i < ch.dim() => (String::from(ch.name(*i)), 3),
            _ => (format!("x{}", i + 1), 3),
        },
        Node::Sum(ts) => {
            let mut s = String::new();
            for (n, t) in ts.iter().enumerate() {
                if n == 0 {
                    s.push_str(&wrap(t, 1));
                    continue;
                }
                match t.node() {
                    Node::Neg(inner) => {
                        s.push_str(" - ");
                        s.push_str(&wrap(inner, 1));
                    }
                    Node::Const(c) if c.im == 0.0 && c.re < 0.0 => {
                        s.push_str(" - ");
                        s.push_str(&fmt_real(-c.re));
                    }
                    _ => {
                        s.push_str(" + ");
                        s.push_str(&wrap(t, 1));
                    }
                }
            }
            (s, 0)
        }
        Node::Product(fs) => {
            let parts: Vec<String> = fs.iter().map(|f| wrap(f, 2)).collect();
            (parts.join("*"), 1)
        }
        Node::Neg(a) => (format!("-{}", wrap(a, 3)), 3),
        Node::Quotient(a, b) => (format!("{}/{}", wrap(a, 1), wrap(b, 2)), 1),
        Node::Pow(a, n) => (format!("{}^{}", wrap(a, 3), n), 2),
        Node::Exp(a) => (format!("exp({})", wrap(a, 0)), 3),
        Node::Ln(a) => (format!("ln({})", wrap(a, 0)), 3),
        Node::Sin(a) => (format!("sin({})", wrap(a, 0)), 3),
        Node::Cos(a) => (format!("cos({})", wrap(a, 0)), 3),
        Node::Conj(a) => (format!("conj({})", wrap(a, 0)), 3),
    }
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self.expr, self.chart).0)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, None).0)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<f64> for Expr {
    fn from(x: f64) -> Self {
        Expr::real(x)
    }
}

impl From<C64> for Expr {
    fn from(c: C64) -> Self {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| Expr::sum([a.clone(), b.neg()]));
binop!(Mul, mul, |a, b| Expr::product([a.clone(), b.clone()]));
binop!(Div, div, |a, b| Expr::quotient(a, b));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
