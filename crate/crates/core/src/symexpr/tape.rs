use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::expr::{Expr, Node, C64};

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("denominator modulus below guard epsilon")]
    DivisionNearZero,
    #[error("logarithm of (near) zero")]
    LnOfZero,
    #[error("point has {got} components, chart needs {want}")]
    WrongDimension { got: usize, want: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Instr {
    Const(C64),
    Coord(u32),
    Add(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    Div(u32, u32),
    Powi(u32, i32),
    Exp(u32),
    Ln(u32),
    Sin(u32),
    Cos(u32),
    Conj(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Const(u64, u64),
    Coord(u32),
    Bin(u8, u32, u32),
    Un(u8, u32),
    Powi(u32, i32),
}

/// Straight-line program compiled from one or more expressions with
/// common subexpressions merged. Evaluating a tape costs one pass over its
/// instructions, regardless of how much sharing the source DAG had.
#[derive(Clone, Debug)]
pub struct Tape {
    code: Vec<Instr>,
    outputs: Vec<u32>,
    dim: usize,
}

struct Builder {
    code: Vec<Instr>,
    keys: BTreeMap<Key, u32>,
    memo: BTreeMap<usize, u32>,
}

impl Builder {
    fn emit(&mut self, key: Key, instr: Instr) -> u32 {
        if let Some(&slot) = self.keys.get(&key) {
            return slot;
        }
        let slot = self.code.len() as u32;
        self.code.push(instr);
        self.keys.insert(key, slot);
        slot
    }

    fn bin(&mut self, tag: u8, a: u32, b: u32) -> u32 {
        // Add and Mul are commutative: normalize operand order for sharing.
        let (a, b) = if (tag == 0 || tag == 1) && b < a { (b, a) } else { (a, b) };
        let instr = match tag {
            0 => Instr::Add(a, b),
            1 => Instr::Mul(a, b),
            _ => Instr::Div(a, b),
        };
        self.emit(Key::Bin(tag, a, b), instr)
    }

    fn un(&mut self, tag: u8, a: u32) -> u32 {
        let instr = match tag {
            0 => Instr::Neg(a),
            1 => Instr::Exp(a),
            2 => Instr::Ln(a),
            3 => Instr::Sin(a),
            4 => Instr::Cos(a),
            _ => Instr::Conj(a),
        };
        self.emit(Key::Un(tag, a), instr)
    }

    fn constant(&mut self, c: C64) -> u32 {
        self.emit(Key::Const(c.re.to_bits(), c.im.to_bits()), Instr::Const(c))
    }

    fn compile(&mut self, e: &Expr) -> u32 {
        if let Some(&s) = self.memo.get(&e.addr()) {
            return s;
        }
        let slot = match e.node() {
            Node::Const(c) => self.constant(*c),
            Node::Coord(i) => self.emit(Key::Coord(*i as u32), Instr::Coord(*i as u32)),
            Node::Sum(ts) => {
                let mut acc = self.compile(&ts[0]);
                for t in &ts[1..] {
                    let s = self.compile(t);
                    acc = self.bin(0, acc, s);
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = self.compile(&fs[0]);
                for f in &fs[1..] {
                    let s = self.compile(f);
                    acc = self.bin(1, acc, s);
                }
                acc
            }
            Node::Quotient(a, b) => {
                let a = self.compile(a);
                let b = self.compile(b);
                self.bin(2, a, b)
            }
            Node::Pow(a, n) => {
                let a = self.compile(a);
                self.emit(Key::Powi(a, *n), Instr::Powi(a, *n))
            }
            Node::Neg(a) => {
                let a = self.compile(a);
                self.un(0, a)
            }
            Node::Exp(a) => {
                let a = self.compile(a);
                self.un(1, a)
            }
            Node::Ln(a) => {
                let a = self.compile(a);
                self.un(2, a)
            }
            Node::Sin(a) => {
                let a = self.compile(a);
                self.un(3, a)
            }
            Node::Cos(a) => {
                let a = self.compile(a);
                self.un(4, a)
            }
            Node::Conj(a) => {
                let a = self.compile(a);
                self.un(5, a)
            }
        };
        self.memo.insert(e.addr(), slot);
        slot
    }
}

impl Tape {
    pub fn compile(dim: usize, exprs: &[Expr]) -> Self {
        let mut b = Builder { code: Vec::new(), keys: BTreeMap::new(), memo: BTreeMap::new() };
        let outputs = exprs.iter().map(|e| b.compile(e)).collect();
        Tape { code: b.code, outputs, dim }
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluate all outputs at `point`, writing into `out`.
    /// `scratch` is reused across calls to avoid reallocating.
    pub fn eval_into(
        &self,
        point: &[f64],
        guard_eps: f64,
        scratch: &mut Vec<C64>,
        out: &mut Vec<C64>,
    ) -> Result<(), EvalError> {
        if point.len() != self.dim {
            return Err(EvalError::WrongDimension { got: point.len(), want: self.dim });
        }
        scratch.clear();
        scratch.reserve(self.code.len());
        for instr in &self.code {
            let v = |s: u32| scratch[s as usize];
            let val = match *instr {
                Instr::Const(c) => c,
                Instr::Coord(i) => C64::new(point[i as usize], 0.0),
                Instr::Add(a, b) => v(a) + v(b),
                Instr::Mul(a, b) => v(a) * v(b),
                Instr::Neg(a) => -v(a),
                Instr::Div(a, b) => {
                    let d = v(b);
                    if d.norm() < guard_eps {
                        return Err(EvalError::DivisionNearZero);
                    }
                    v(a) / d
                }
                Instr::Powi(a, n) => {
                    let base = v(a);
                    if n < 0 && base.norm() < guard_eps {
                        return Err(EvalError::DivisionNearZero);
                    }
                    base.powi(n)
                }
                Instr::Exp(a) => v(a).exp(),
                Instr::Ln(a) => {
                    let x = v(a);
                    if x.norm() < guard_eps {
                        return Err(EvalError::LnOfZero);
                    }
                    x.ln()
                }
                Instr::Sin(a) => v(a).sin(),
                Instr::Cos(a) => v(a).cos(),
                Instr::Conj(a) => v(a).conj(),
            };
            scratch.push(val);
        }
        out.clear();
        out.extend(self.outputs.iter().map(|&s| scratch[s as usize]));
        Ok(())
    }

    pub fn eval(&self, point: &[f64], guard_eps: f64) -> Result<Vec<C64>, EvalError> {
        let mut scratch = Vec::new();
        let mut out = Vec::new();
        self.eval_into(point, guard_eps, &mut scratch, &mut out)?;
        Ok(out)
    }
}

impl Expr {
    /// Evaluate at a point of the chart.
    pub fn eval(&self, chart: &super::Chart, point: &[f64]) -> Result<C64, EvalError> {
        let tape = Tape::compile(chart.dim(), core::slice::from_ref(self));
        Ok(tape.eval(point, chart.guard_eps())?[0])
    }
}
