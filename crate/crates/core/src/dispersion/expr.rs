use std::collections::BTreeMap;
use std::fmt;

/// Identifier values used during evaluation.
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    /// Printing precedence; unary minus sits at 3, between `*` and `^`.
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    pub(crate) fn right_assoc(self) -> bool {
        self == BinOp::Pow
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Exp,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        let y = match self {
            Func::Sqrt if x < 0.0 => {
                return Err(EvalError::DomainError(format!(
                    "sqrt of negative value {x}"
                )));
            }
            Func::Sqrt => x.sqrt(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Abs => x.abs(),
        };
        finite(y, || format!("{}({x}) is not finite", self.name()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound identifier '{0}'")]
    UnboundIdentifier(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

impl EvalError {
    pub fn name(&self) -> &'static str {
        match self {
            EvalError::UnboundIdentifier(_) => "UnboundIdentifier",
            EvalError::DomainError(_) => "DomainError",
        }
    }
}

fn finite(y: f64, msg: impl FnOnce() -> String) -> Result<f64, EvalError> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(EvalError::DomainError(msg()))
    }
}

fn apply_binary(op: BinOp, a: f64, b: f64) -> Result<f64, EvalError> {
    let y = match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b == 0.0 {
                return Err(EvalError::DomainError(format!("division by zero ({a}/0)")));
            }
            a / b
        }
        BinOp::Pow => a.powf(b),
    };
    finite(y, || format!("{a} {} {b} is not finite", op.symbol()))
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Self {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    /// IEEE-754 evaluation; non-finite intermediate results are errors.
    pub fn eval(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(name) => bindings
                .get(name)
                .copied()
                .ok_or_else(|| EvalError::UnboundIdentifier(name.clone())),
            Expr::Neg(e) => Ok(-e.eval(bindings)?),
            Expr::Binary { op, lhs, rhs } => {
                apply_binary(*op, lhs.eval(bindings)?, rhs.eval(bindings)?)
            }
            Expr::Call { func, arg } => func.apply(arg.eval(bindings)?),
        }
    }

    /// Identifiers appearing in the tree, sorted and deduplicated.
    pub fn identifiers(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Num(_) => {}
                Expr::Var(n) => out.push(n.clone()),
                Expr::Neg(x) | Expr::Call { arg: x, .. } => walk(x, out),
                Expr::Binary { lhs, rhs, .. } => {
                    walk(lhs, out);
                    walk(rhs, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Substitutes every identifier except `var` and folds constants.
    pub fn compile(&self, var: &str, bindings: &Bindings) -> Result<Compiled, EvalError> {
        let node = match self {
            Expr::Num(v) => Node::Const(*v),
            Expr::Var(name) if name == var => Node::Var,
            Expr::Var(name) => Node::Const(
                bindings
                    .get(name)
                    .copied()
                    .ok_or_else(|| EvalError::UnboundIdentifier(name.clone()))?,
            ),
            Expr::Neg(e) => match e.compile(var, bindings)?.0 {
                Node::Const(v) => Node::Const(-v),
                n => Node::Neg(Box::new(n)),
            },
            Expr::Binary { op, lhs, rhs } => {
                match (lhs.compile(var, bindings)?.0, rhs.compile(var, bindings)?.0) {
                    (Node::Const(a), Node::Const(b)) => Node::Const(apply_binary(*op, a, b)?),
                    (a, b) => Node::Binary(*op, Box::new(a), Box::new(b)),
                }
            }
            Expr::Call { func, arg } => match arg.compile(var, bindings)?.0 {
                Node::Const(v) => Node::Const(func.apply(v)?),
                n => Node::Call(*func, Box::new(n)),
            },
        };
        Ok(Compiled(node))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }
}

/// Minimal-parenthesis printer whose output parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(n) => f.write_str(n),
            Expr::Neg(e) => {
                f.write_str("-")?;
                wrapped(f, e, e.precedence() < 3)
            }
            Expr::Binary { op, lhs, rhs } => {
                let p = op.precedence();
                let (lp, rp) = (lhs.precedence(), rhs.precedence());
                wrapped(f, lhs, lp < p || (lp == p && op.right_assoc()))?;
                match op {
                    BinOp::Add | BinOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                wrapped(f, rhs, rp < p || (rp == p && !op.right_assoc()))
            }
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Node::Const(v) => Ok(*v),
            Node::Var => Ok(x),
            Node::Neg(e) => Ok(-e.eval(x)?),
            Node::Binary(op, a, b) => apply_binary(*op, a.eval(x)?, b.eval(x)?),
            Node::Call(func, a) => func.apply(a.eval(x)?),
        }
    }
}

/// An expression in a single free variable, with all other identifiers
/// already substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled(Node);

impl Compiled {
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.0.eval(x)
    }
}
