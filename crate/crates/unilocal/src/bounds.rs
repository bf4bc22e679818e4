//! Ascending bound functions, their inverses, and the guess sets derived
//! from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guesses are never pushed beyond this value.
pub const GUESS_CAP: u64 = 1 << 40;

pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - u64::from((x - 1).leading_zeros())
    }
}

/// Iterated base-2 logarithm; 0 for `x <= 1`.
pub fn log_star(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        1 + log_star(ceil_log2(x))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundError {
    #[error("cannot parse bound expression {0:?}")]
    Parse(String),
    #[error("a product bound takes exactly two factors")]
    ProductArity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Id,
    Sq,
    Log,
    LogStar,
    Pow2,
    XLog,
    XLogSq,
    /// Largest palette the shipped color reduction can get stuck at for a given degree bound.
    Linial,
}

impl Base {
    pub const ALL: [Base; 8] = [Base::Id, Base::Sq, Base::Log, Base::LogStar, Base::Pow2, Base::XLog, Base::XLogSq, Base::Linial];

    pub fn name(self) -> &'static str {
        match self {
            Base::Id => "id",
            Base::Sq => "sq",
            Base::Log => "log",
            Base::LogStar => "logstar",
            Base::Pow2 => "pow2",
            Base::XLog => "xlog",
            Base::XLogSq => "xlogsq",
            Base::Linial => "linial",
        }
    }

    pub fn eval(self, x: u64) -> u64 {
        match self {
            Base::Id => x,
            Base::Sq => x.saturating_mul(x),
            Base::Log => ceil_log2(x),
            Base::LogStar => log_star(x),
            Base::Pow2 => {
                if x >= 64 {
                    u64::MAX
                } else {
                    1 << x
                }
            }
            Base::XLog => x.saturating_mul(ceil_log2(x)),
            Base::XLogSq => x.saturating_mul(ceil_log2(x)).saturating_mul(ceil_log2(x)),
            Base::Linial => crate::baselib::linial_palette(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inverse {
    Exact(u64),
    /// The answer is at least the cap; the cap is used in its place.
    Saturated(u64),
    Undefined,
}

impl Inverse {
    pub fn value(self) -> Option<u64> {
        match self {
            Inverse::Exact(y) | Inverse::Saturated(y) => Some(y),
            Inverse::Undefined => None,
        }
    }
}

/// `sum coef * base(x) + constant`, integer valued and non-decreasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AscFn {
    pub terms: Vec<(u64, Base)>,
    pub constant: u64,
}

impl AscFn {
    pub fn base(b: Base) -> Self {
        AscFn { terms: vec![(1, b)], constant: 0 }
    }

    pub fn id() -> Self {
        AscFn::base(Base::Id)
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(c, b)| acc.saturating_add(c.saturating_mul(b.eval(x))))
    }

    /// Largest `y >= 1` with `eval(y) <= budget`.
    pub fn inv_max(&self, budget: u64) -> Inverse {
        if self.eval(1) > budget {
            return Inverse::Undefined;
        }
        let mut lo = 1u64;
        let hi = loop {
            let next = lo * 2;
            if next > GUESS_CAP {
                return Inverse::Saturated(GUESS_CAP);
            }
            if self.eval(next) <= budget {
                lo = next;
            } else {
                break next;
            }
        };
        let mut hi = hi;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Inverse::Exact(lo)
    }

    /// Least `y >= 1` with `eval(y) >= x`.
    pub fn inv_min(&self, x: u64) -> Inverse {
        if self.eval(1) >= x {
            return Inverse::Exact(1);
        }
        let mut lo = 1u64;
        let mut hi = loop {
            let next = lo * 2;
            if next > GUESS_CAP {
                return Inverse::Saturated(GUESS_CAP);
            }
            if self.eval(next) >= x {
                break next;
            }
            lo = next;
        };
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.eval(mid) >= x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Inverse::Exact(hi)
    }
}

impl fmt::Display for AscFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|&(c, b)| if c == 1 { b.name().to_string() } else { format!("{c}*{}", b.name()) })
            .collect();
        if self.constant > 0 || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        write!(f, "{}", parts.join("+"))
    }
}

impl FromStr for AscFn {
    type Err = BoundError;

    /// `term (+ term)*` where a term is `name`, `k*name` or an integer `k`.
    fn from_str(s: &str) -> Result<Self, BoundError> {
        let err = || BoundError::Parse(s.to_string());
        let mut f = AscFn { terms: Vec::new(), constant: 0 };
        for term in s.split('+').map(str::trim) {
            let (coef, name) = match term.split_once('*') {
                Some((c, n)) => (c.trim().parse::<u64>().map_err(|_| err())?, n.trim()),
                None => match term.parse::<u64>() {
                    Ok(k) => {
                        f.constant += k;
                        continue;
                    }
                    Err(_) => (1, term),
                },
            };
            let base = Base::ALL.into_iter().find(|b| b.name() == name).ok_or_else(err)?;
            f.terms.push((coef, base));
        }
        if f.terms.iter().all(|&(c, _)| c == 0) {
            return Err(err());
        }
        Ok(f)
    }
}

/// A runtime bound over several parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundFn {
    /// `f_1(x_1) + ... + f_l(x_l)`.
    Additive(Vec<AscFn>),
    /// `max(1, f_1(x_1)) * max(1, f_2(x_2))`.
    Product(AscFn, AscFn),
}

/// A finite guess set; `saturated` counts coordinates pinned at [`GUESS_CAP`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GuessSet {
    pub vectors: Vec<Vec<u64>>,
    pub saturated: usize,
}

impl BoundFn {
    pub fn arity(&self) -> usize {
        match self {
            BoundFn::Additive(fs) => fs.len(),
            BoundFn::Product(..) => 2,
        }
    }

    pub fn eval(&self, x: &[u64]) -> u64 {
        match self {
            BoundFn::Additive(fs) => fs.iter().zip(x).fold(0u64, |acc, (f, &v)| acc.saturating_add(f.eval(v))),
            BoundFn::Product(f1, f2) => f1.eval(x[0]).max(1).saturating_mul(f2.eval(x[1]).max(1)),
        }
    }

    pub fn bounding_constant(&self) -> u64 {
        match self {
            BoundFn::Additive(fs) => fs.len() as u64,
            BoundFn::Product(..) => 2,
        }
    }

    /// Upper bound on the size of `set_sequence(i)`.
    pub fn seq_number(&self, i: u64) -> u64 {
        match self {
            BoundFn::Additive(_) => 1,
            BoundFn::Product(..) => ceil_log2(i) + 1,
        }
    }

    pub fn set_sequence(&self, i: u64) -> GuessSet {
        match self {
            BoundFn::Additive(fs) => additive_set_sequence(fs, i),
            BoundFn::Product(f1, f2) => product_set_sequence(f1, f2, i),
        }
    }
}

impl fmt::Display for BoundFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundFn::Additive(fs) if fs.len() == 1 => write!(f, "{}", fs[0]),
            BoundFn::Additive(fs) => {
                write!(f, "add({})", fs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))
            }
            BoundFn::Product(a, b) => write!(f, "prod({a}, {b})"),
        }
    }
}

impl FromStr for BoundFn {
    type Err = BoundError;

    /// `add(f, g, ...)`, `prod(f, g)`, or a single ascending function.
    fn from_str(s: &str) -> Result<Self, BoundError> {
        let s = s.trim();
        let args = |inner: &str| -> Result<Vec<AscFn>, BoundError> { inner.split(',').map(str::parse).collect() };
        if let Some(inner) = s.strip_prefix("add(").and_then(|r| r.strip_suffix(')')) {
            return Ok(BoundFn::Additive(args(inner)?));
        }
        if let Some(inner) = s.strip_prefix("prod(").and_then(|r| r.strip_suffix(')')) {
            let mut fs = args(inner)?;
            if fs.len() != 2 {
                return Err(BoundError::ProductArity);
            }
            let f2 = fs.pop().expect("two factors");
            let f1 = fs.pop().expect("two factors");
            return Ok(BoundFn::Product(f1, f2));
        }
        Ok(BoundFn::Additive(vec![s.parse()?]))
    }
}

fn take(inv: Inverse, saturated: &mut usize) -> Option<u64> {
    if matches!(inv, Inverse::Saturated(_)) {
        *saturated += 1;
    }
    inv.value()
}

/// The single vector of per-coordinate largest values within budget `i`.
pub fn additive_set_sequence(fs: &[AscFn], i: u64) -> GuessSet {
    let mut set = GuessSet::default();
    let x: Option<Vec<u64>> = fs.iter().map(|f| take(f.inv_max(i), &mut set.saturated)).collect();
    if let Some(x) = x {
        set.vectors.push(x);
    } else {
        set.saturated = 0;
    }
    set
}

/// Pairs splitting the budget `2i` between the factors as `2^j` and `2i / 2^j`.
pub fn product_set_sequence(f1: &AscFn, f2: &AscFn, i: u64) -> GuessSet {
    let mut set = GuessSet::default();
    for j in 0..=ceil_log2(i) {
        let a = f1.inv_max(1 << j);
        let b = f2.inv_max((2 * i) >> j);
        if a.value().is_some() && b.value().is_some() {
            let mut sat = 0;
            let x = vec![take(a, &mut sat).expect("defined"), take(b, &mut sat).expect("defined")];
            set.saturated += sat;
            set.vectors.push(x);
        }
    }
    set
}

/// How a guess for a dominated parameter is read off the dominating guess.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    /// Least `y` with `g(y) >= x`.
    Up,
    /// Largest `y` with `g(y) <= x`.
    Down,
}

/// An extra parameter `p` known to satisfy `g(p) <= q_target`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domination {
    pub target: usize,
    pub g: AscFn,
}

/// A bound over `l` parameters extended by dominated ones: coordinates
/// `0..l` are the original ones, `l..l+t` the extra ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedBound {
    pub base: BoundFn,
    pub dominations: Vec<Domination>,
    pub rounding: Rounding,
}

pub fn dominated_lift(base: BoundFn, dominations: Vec<Domination>, rounding: Rounding) -> LiftedBound {
    LiftedBound { base, dominations, rounding }
}

impl LiftedBound {
    pub fn arity(&self) -> usize {
        self.base.arity() + self.dominations.len()
    }

    pub fn eval(&self, x: &[u64]) -> u64 {
        let l = self.base.arity();
        let mut z = x[..l].to_vec();
        for (k, d) in self.dominations.iter().enumerate() {
            z[d.target] = z[d.target].max(d.g.eval(x[l + k]));
        }
        self.base.eval(&z)
    }

    /// Appends the derived guesses for the dominated parameters.
    pub fn derive(&self, x: &[u64]) -> Option<Vec<u64>> {
        let mut out = x.to_vec();
        for d in &self.dominations {
            let inv = match self.rounding {
                Rounding::Up => d.g.inv_min(x[d.target]),
                Rounding::Down => d.g.inv_max(x[d.target]),
            };
            out.push(inv.value()?);
        }
        Some(out)
    }

    pub fn set_sequence(&self, i: u64) -> GuessSet {
        let s = self.base.set_sequence(i);
        GuessSet { vectors: s.vectors.iter().filter_map(|x| self.derive(x)).collect(), saturated: s.saturated }
    }
}
