//! Commutative unital quantales: the value algebra for distances and truth values.
//!
//! Two unit-interval quantales are built in, [`QuantaleKind::Luk01`]
//! (truncated addition) and [`QuantaleKind::Max01`] (maximum). For both, the
//! quantale order is the *reverse* of the numeric order: numeric `0` is the
//! top element and the unit, numeric `1` is the bottom. Every method on
//! [`Quantale`] speaks the quantale order; [`Quantale::numeric`] exposes the
//! raw number for rendering.
//!
//! Finite quantales are stored as explicit join and tensor tables; meets,
//! residuals, top, bottom and unit are derived from them.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rational::{self, format_rat, parse_rat, Rat};

/// An element of some quantale. Which variant is valid depends on the
/// quantale it is used with.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QValue {
    /// Index into a finite carrier table.
    Elem(u16),
    /// Exact number in `[0, 1]` for the unit-interval quantales.
    Num(Rat),
    /// Component values for product quantales.
    Tuple(Vec<QValue>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuantaleKind {
    Bool2,
    Luk01,
    Max01,
    Diamond4,
    Table,
    Product,
}

impl QuantaleKind {
    pub fn name(self) -> &'static str {
        match self {
            QuantaleKind::Bool2 => "bool2",
            QuantaleKind::Luk01 => "luk01",
            QuantaleKind::Max01 => "max01",
            QuantaleKind::Diamond4 => "diamond4",
            QuantaleKind::Table => "table",
            QuantaleKind::Product => "product",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuantaleError {
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("invalid quantale table: {0}")]
    InvalidTable(String),
    #[error("value `{0}` is not in the carrier")]
    UnknownValue(String),
}

/// Defining data of a finite quantale: element names, join table and tensor
/// table, all indexed by carrier position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTable {
    pub names: Vec<String>,
    pub join: Vec<Vec<u16>>,
    pub tensor: Vec<Vec<u16>>,
}

struct Finite {
    table: FiniteTable,
    leq: Vec<Vec<bool>>,
    meet: Vec<Vec<u16>>,
    hom: Vec<Vec<u16>>,
    top: u16,
    bottom: u16,
    unit: u16,
}

impl Finite {
    /// Derives the remaining structure. Works on corrupt tables too (picking
    /// arbitrary fallbacks) so that validation can report what is wrong.
    fn new(table: FiniteTable) -> Self {
        let n = table.names.len();
        let leq: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| table.join[i][j] as usize == j).collect())
            .collect();
        let top = (0..n).find(|&t| (0..n).all(|i| leq[i][t])).unwrap_or(0) as u16;
        let bottom = (0..n).find(|&b| (0..n).all(|i| leq[b][i])).unwrap_or(0) as u16;
        let meet = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let lower: Vec<usize> = (0..n).filter(|&l| leq[l][i] && leq[l][j]).collect();
                        lower
                            .iter()
                            .copied()
                            .find(|&g| lower.iter().all(|&l| leq[l][g]))
                            .unwrap_or(bottom as usize) as u16
                    })
                    .collect()
            })
            .collect();
        let unit = (0..n)
            .find(|&e| (0..n).all(|i| table.tensor[e][i] as usize == i))
            .unwrap_or(top as usize) as u16;
        let hom = (0..n)
            .map(|u| {
                (0..n)
                    .map(|w| {
                        (0..n)
                            .filter(|&v| leq[table.tensor[u][v] as usize][w])
                            .fold(bottom, |acc, v| table.join[acc as usize][v])
                    })
                    .collect()
            })
            .collect();
        Finite { table, leq, meet, hom, top, bottom, unit }
    }

    fn size(&self) -> usize {
        self.table.names.len()
    }
}

enum Repr {
    Finite(Finite),
    Luk,
    Max,
    Product(Vec<Quantale>),
}

/// Quantale descriptor. Immutable and cheap to clone.
#[derive(Clone)]
pub struct Quantale {
    kind: QuantaleKind,
    repr: Arc<Repr>,
}

impl fmt::Debug for Quantale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.repr {
            Repr::Product(factors) => f.debug_tuple("product").field(factors).finish(),
            Repr::Finite(fin) if self.kind == QuantaleKind::Table => {
                write!(f, "table{:?}", fin.table.names)
            }
            _ => f.write_str(self.kind.name()),
        }
    }
}

impl PartialEq for Quantale {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.repr, &other.repr) {
            return true;
        }
        self.kind == other.kind
            && match (&*self.repr, &*other.repr) {
                (Repr::Finite(a), Repr::Finite(b)) => a.table == b.table,
                (Repr::Luk, Repr::Luk) | (Repr::Max, Repr::Max) => true,
                (Repr::Product(a), Repr::Product(b)) => a == b,
                _ => false,
            }
    }
}

impl Eq for Quantale {}

fn build_table(names: &[&str], join: impl Fn(usize, usize) -> usize, tensor: impl Fn(usize, usize) -> usize) -> FiniteTable {
    let n = names.len();
    FiniteTable {
        names: names.iter().map(|s| s.to_string()).collect(),
        join: (0..n).map(|i| (0..n).map(|j| join(i, j) as u16).collect()).collect(),
        tensor: (0..n).map(|i| (0..n).map(|j| tensor(i, j) as u16).collect()).collect(),
    }
}

impl Quantale {
    fn finite(kind: QuantaleKind, table: FiniteTable) -> Self {
        Quantale { kind, repr: Arc::new(Repr::Finite(Finite::new(table))) }
    }

    /// The two-element Boolean frame `{bot, top}` with tensor = meet.
    pub fn bool2() -> Self {
        Self::finite(QuantaleKind::Bool2, build_table(&["bot", "top"], |a, b| a.max(b), |a, b| a.min(b)))
    }

    /// The four-element diamond frame `bot < N, B < top`, tensor = meet.
    pub fn diamond4() -> Self {
        // Encoded as pairs of bits: bot=00, N=01, B=10, top=11.
        Self::finite(QuantaleKind::Diamond4, build_table(&["bot", "N", "B", "top"], |a, b| a | b, |a, b| a & b))
    }

    /// `[0,1]` with truncated addition, ordered by reverse numeric order.
    pub fn luk01() -> Self {
        Quantale { kind: QuantaleKind::Luk01, repr: Arc::new(Repr::Luk) }
    }

    /// `[0,1]` with maximum as tensor, ordered by reverse numeric order.
    pub fn max01() -> Self {
        Quantale { kind: QuantaleKind::Max01, repr: Arc::new(Repr::Max) }
    }

    /// The chain `0 < 1/(n-1) < ... < 1` with tensor = min (a frame).
    pub fn chain(n: usize) -> Self {
        assert!(n >= 2, "a chain needs at least two elements");
        let names: Vec<String> = (0..n).map(|i| format_rat(&rational::rat(i as i64, (n - 1) as i64))).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Self::finite(QuantaleKind::Table, build_table(&refs, |a, b| a.max(b), |a, b| a.min(b)))
    }

    /// Finite quantale from explicit tables, rejected unless every law holds.
    pub fn from_table(table: FiniteTable) -> Result<Self, QuantaleError> {
        let q = Self::from_table_unchecked(table)?;
        let report = q.validate(None);
        match report.first_failure() {
            None => Ok(q),
            Some(failure) => Err(QuantaleError::InvalidTable(failure.to_string())),
        }
    }

    /// Finite quantale from tables, checking only their shape. Use
    /// [`Quantale::validate`] to check the laws.
    pub fn from_table_unchecked(table: FiniteTable) -> Result<Self, QuantaleError> {
        let n = table.names.len();
        if n == 0 || n > u16::MAX as usize {
            return Err(QuantaleError::InvalidTable("carrier must be nonempty".into()));
        }
        let square = |t: &Vec<Vec<u16>>| t.len() == n && t.iter().all(|row| row.len() == n && row.iter().all(|&v| (v as usize) < n));
        if !square(&table.join) || !square(&table.tensor) {
            return Err(QuantaleError::InvalidTable("join and tensor tables must be n x n over the carrier".into()));
        }
        for (i, a) in table.names.iter().enumerate() {
            if table.names[..i].contains(a) {
                return Err(QuantaleError::InvalidTable(alloc::format!("duplicate element name `{a}`")));
            }
        }
        Ok(Self::finite(QuantaleKind::Table, table))
    }

    /// Componentwise product; lattice and tensor act pointwise.
    pub fn product(factors: &[Quantale]) -> Self {
        assert!(!factors.is_empty(), "empty product");
        Quantale { kind: QuantaleKind::Product, repr: Arc::new(Repr::Product(factors.to_vec())) }
    }

    pub fn kind(&self) -> QuantaleKind {
        self.kind
    }

    pub fn factors(&self) -> Option<&[Quantale]> {
        match &*self.repr {
            Repr::Product(f) => Some(f),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&FiniteTable> {
        match &*self.repr {
            Repr::Finite(f) => Some(&f.table),
            _ => None,
        }
    }

    /// `true` for quantales with a finite carrier.
    pub fn is_finite(&self) -> bool {
        match &*self.repr {
            Repr::Finite(_) => true,
            Repr::Luk | Repr::Max => false,
            Repr::Product(f) => f.iter().all(Quantale::is_finite),
        }
    }

    /// `true` for the built-in unit-interval quantales.
    pub fn is_unit_interval(&self) -> bool {
        matches!(&*self.repr, Repr::Luk | Repr::Max)
    }

    /// `true` when the order is total.
    pub fn is_chain(&self) -> bool {
        match &*self.repr {
            Repr::Luk | Repr::Max => true,
            Repr::Finite(f) => (0..f.size()).all(|i| (0..f.size()).all(|j| f.leq[i][j] || f.leq[j][i])),
            Repr::Product(factors) => {
                // Only trivial factors keep a product totally ordered.
                factors.iter().filter(|q| q.cardinality() != Some(1)).count() <= 1
                    && factors.iter().all(Quantale::is_chain)
            }
        }
    }

    /// `true` when `top == unit`.
    pub fn is_integral(&self) -> bool {
        self.top() == self.unit()
    }

    pub fn cardinality(&self) -> Option<usize> {
        match &*self.repr {
            Repr::Finite(f) => Some(f.size()),
            Repr::Luk | Repr::Max => None,
            Repr::Product(factors) => factors.iter().try_fold(1usize, |acc, q| q.cardinality().map(|c| acc * c)),
        }
    }

    /// All carrier elements of a finite quantale.
    pub fn elements(&self) -> Option<Vec<QValue>> {
        match &*self.repr {
            Repr::Finite(f) => Some((0..f.size()).map(|i| QValue::Elem(i as u16)).collect()),
            Repr::Luk | Repr::Max => None,
            Repr::Product(factors) => {
                let per: Option<Vec<Vec<QValue>>> = factors.iter().map(Quantale::elements).collect();
                Some(cartesian(&per?))
            }
        }
    }

    /// Carrier elements for finite kinds; the grid `{0, step, ..., 1}`
    /// (componentwise for products) for unit-interval factors.
    pub fn elements_or_grid(&self, step: &Rat) -> Vec<QValue> {
        match &*self.repr {
            Repr::Finite(_) => self.elements().unwrap_or_default(),
            Repr::Luk | Repr::Max => rational::unit_grid(step).into_iter().map(QValue::Num).collect(),
            Repr::Product(factors) => {
                let per: Vec<Vec<QValue>> = factors.iter().map(|q| q.elements_or_grid(step)).collect();
                cartesian(&per)
            }
        }
    }

    pub fn contains(&self, value: &QValue) -> bool {
        match (&*self.repr, value) {
            (Repr::Finite(f), QValue::Elem(i)) => (*i as usize) < f.size(),
            (Repr::Luk | Repr::Max, QValue::Num(r)) => *r >= rational::zero() && *r <= rational::one(),
            (Repr::Product(factors), QValue::Tuple(items)) => {
                factors.len() == items.len() && factors.iter().zip(items).all(|(q, v)| q.contains(v))
            }
            _ => false,
        }
    }

    /// Raw number of a unit-interval value (numeric order, not quantale order).
    pub fn numeric<'a>(&self, value: &'a QValue) -> Option<&'a Rat> {
        match value {
            QValue::Num(r) if self.is_unit_interval() => Some(r),
            _ => None,
        }
    }

    pub fn top(&self) -> QValue {
        match &*self.repr {
            Repr::Finite(f) => QValue::Elem(f.top),
            Repr::Luk | Repr::Max => QValue::Num(rational::zero()),
            Repr::Product(factors) => QValue::Tuple(factors.iter().map(Quantale::top).collect()),
        }
    }

    pub fn bottom(&self) -> QValue {
        match &*self.repr {
            Repr::Finite(f) => QValue::Elem(f.bottom),
            Repr::Luk | Repr::Max => QValue::Num(rational::one()),
            Repr::Product(factors) => QValue::Tuple(factors.iter().map(Quantale::bottom).collect()),
        }
    }

    /// Tensor unit `k`.
    pub fn unit(&self) -> QValue {
        match &*self.repr {
            Repr::Finite(f) => QValue::Elem(f.unit),
            Repr::Luk | Repr::Max => QValue::Num(rational::zero()),
            Repr::Product(factors) => QValue::Tuple(factors.iter().map(Quantale::unit).collect()),
        }
    }

    /// Quantale order `a <= b`.
    pub fn leq(&self, a: &QValue, b: &QValue) -> bool {
        match (&*self.repr, a, b) {
            (Repr::Finite(f), QValue::Elem(x), QValue::Elem(y)) => f.leq[*x as usize][*y as usize],
            (Repr::Luk | Repr::Max, QValue::Num(x), QValue::Num(y)) => x >= y,
            (Repr::Product(factors), QValue::Tuple(xs), QValue::Tuple(ys)) => {
                factors.iter().zip(xs.iter().zip(ys)).all(|(q, (x, y))| q.leq(x, y))
            }
            _ => panic!("value does not belong to quantale {self:?}"),
        }
    }

    pub fn join2(&self, a: &QValue, b: &QValue) -> QValue {
        match (&*self.repr, a, b) {
            (Repr::Finite(f), QValue::Elem(x), QValue::Elem(y)) => QValue::Elem(f.table.join[*x as usize][*y as usize]),
            (Repr::Luk | Repr::Max, QValue::Num(x), QValue::Num(y)) => QValue::Num(rational::min(x, y)),
            (Repr::Product(factors), QValue::Tuple(xs), QValue::Tuple(ys)) => {
                QValue::Tuple(factors.iter().zip(xs.iter().zip(ys)).map(|(q, (x, y))| q.join2(x, y)).collect())
            }
            _ => panic!("value does not belong to quantale {self:?}"),
        }
    }

    pub fn meet2(&self, a: &QValue, b: &QValue) -> QValue {
        match (&*self.repr, a, b) {
            (Repr::Finite(f), QValue::Elem(x), QValue::Elem(y)) => QValue::Elem(f.meet[*x as usize][*y as usize]),
            (Repr::Luk | Repr::Max, QValue::Num(x), QValue::Num(y)) => QValue::Num(rational::max(x, y)),
            (Repr::Product(factors), QValue::Tuple(xs), QValue::Tuple(ys)) => {
                QValue::Tuple(factors.iter().zip(xs.iter().zip(ys)).map(|(q, (x, y))| q.meet2(x, y)).collect())
            }
            _ => panic!("value does not belong to quantale {self:?}"),
        }
    }

    /// Supremum in the quantale order; the empty join is bottom.
    pub fn join<'a>(&self, items: impl IntoIterator<Item = &'a QValue>) -> QValue {
        items.into_iter().fold(self.bottom(), |acc, v| self.join2(&acc, v))
    }

    /// Infimum in the quantale order; the empty meet is top.
    pub fn meet<'a>(&self, items: impl IntoIterator<Item = &'a QValue>) -> QValue {
        items.into_iter().fold(self.top(), |acc, v| self.meet2(&acc, v))
    }

    pub fn tensor(&self, a: &QValue, b: &QValue) -> QValue {
        match (&*self.repr, a, b) {
            (Repr::Finite(f), QValue::Elem(x), QValue::Elem(y)) => QValue::Elem(f.table.tensor[*x as usize][*y as usize]),
            (Repr::Luk, QValue::Num(x), QValue::Num(y)) => QValue::Num(rational::min(&(x + y), &rational::one())),
            (Repr::Max, QValue::Num(x), QValue::Num(y)) => QValue::Num(rational::max(x, y)),
            (Repr::Product(factors), QValue::Tuple(xs), QValue::Tuple(ys)) => {
                QValue::Tuple(factors.iter().zip(xs.iter().zip(ys)).map(|(q, (x, y))| q.tensor(x, y)).collect())
            }
            _ => panic!("value does not belong to quantale {self:?}"),
        }
    }

    /// Right adjoint of `u ⊗ -`: the largest `v` with `u ⊗ v <= w`.
    pub fn hom(&self, u: &QValue, w: &QValue) -> QValue {
        match (&*self.repr, u, w) {
            (Repr::Finite(f), QValue::Elem(x), QValue::Elem(y)) => QValue::Elem(f.hom[*x as usize][*y as usize]),
            (Repr::Luk, QValue::Num(x), QValue::Num(y)) => QValue::Num(rational::max(&(y - x), &rational::zero())),
            (Repr::Max, QValue::Num(x), QValue::Num(y)) => {
                QValue::Num(if x >= y { rational::zero() } else { y.clone() })
            }
            (Repr::Product(factors), QValue::Tuple(xs), QValue::Tuple(ys)) => {
                QValue::Tuple(factors.iter().zip(xs.iter().zip(ys)).map(|(q, (x, y))| q.hom(x, y)).collect())
            }
            _ => panic!("value does not belong to quantale {self:?}"),
        }
    }

    /// Symmetrized residual `hom(u,v) ∧ hom(v,u)`.
    pub fn hom_s(&self, u: &QValue, v: &QValue) -> QValue {
        self.meet2(&self.hom(u, v), &self.hom(v, u))
    }

    /// The four-valued paraconsistent negation (`¬top = bot`, `¬bot = top`,
    /// `N` and `B` fixed); Boolean complement on `bool2`.
    pub fn negation(&self, u: &QValue) -> Result<QValue, QuantaleError> {
        match (self.kind, u) {
            (QuantaleKind::Diamond4, QValue::Elem(x)) => Ok(QValue::Elem(match x {
                0 => 3,
                3 => 0,
                other => *other,
            })),
            (QuantaleKind::Bool2, QValue::Elem(x)) => Ok(QValue::Elem(1 - x)),
            _ => Err(QuantaleError::Unsupported(alloc::format!("negation on {}", self.kind.name()))),
        }
    }

    /// Text form: element name, `"p/q"` for numbers, `"(a,b)"` for tuples.
    pub fn render(&self, value: &QValue) -> String {
        match (&*self.repr, value) {
            (Repr::Finite(f), QValue::Elem(i)) => f.table.names[*i as usize].clone(),
            (_, QValue::Num(r)) => format_rat(r),
            (Repr::Product(factors), QValue::Tuple(items)) => {
                let parts: Vec<String> = factors.iter().zip(items).map(|(q, v)| q.render(v)).collect();
                alloc::format!("({})", parts.join(","))
            }
            _ => alloc::format!("{value:?}"),
        }
    }

    /// Inverse of [`Quantale::render`].
    pub fn parse_value(&self, text: &str) -> Result<QValue, QuantaleError> {
        let text = text.trim();
        let unknown = || QuantaleError::UnknownValue(text.to_string());
        match &*self.repr {
            Repr::Finite(f) => f
                .table
                .names
                .iter()
                .position(|n| n == text)
                .map(|i| QValue::Elem(i as u16))
                .ok_or_else(unknown),
            Repr::Luk | Repr::Max => {
                let r = parse_rat(text).ok_or_else(unknown)?;
                let v = QValue::Num(r);
                if self.contains(&v) { Ok(v) } else { Err(unknown()) }
            }
            Repr::Product(factors) => {
                let inner = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(unknown)?;
                let parts = split_top_level(inner);
                if parts.len() != factors.len() {
                    return Err(unknown());
                }
                factors
                    .iter()
                    .zip(parts)
                    .map(|(q, p)| q.parse_value(p))
                    .collect::<Result<Vec<_>, _>>()
                    .map(QValue::Tuple)
            }
        }
    }

    /// Checks the quantale laws. Exhaustive for finite kinds; on the grid of
    /// the given step for unit-interval kinds (default `1/50`), falling back
    /// to seeded sampling when the grid has too many triples.
    pub fn validate(&self, resolution: Option<&Rat>) -> LawReport {
        let default_step = rational::rat(1, 50);
        let step = resolution.unwrap_or(&default_step);
        let elements = self.elements().unwrap_or_else(|| self.elements_or_grid(step));
        check_laws(self, &elements)
    }

    /// Literal way-above relation on a finite quantale: `x` is way above `y`
    /// iff every codirected subset whose infimum is below `y` contains an
    /// element below `x`.
    pub fn way_above_relation(&self) -> Result<Vec<Vec<bool>>, QuantaleError> {
        let elements = self.finite_elements("way-above")?;
        let n = elements.len();
        if n > 16 {
            return Err(QuantaleError::Unsupported("way-above enumeration beyond 16 elements".into()));
        }
        // Every nonempty codirected subset, with its infimum.
        let mut codirected: Vec<(u32, QValue)> = Vec::new();
        for mask in 1u32..(1u32 << n) {
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let directed = members.iter().all(|&a| {
                members.iter().all(|&b| {
                    members
                        .iter()
                        .any(|&c| self.leq(&elements[c], &elements[a]) && self.leq(&elements[c], &elements[b]))
                })
            });
            if directed {
                let inf = self.meet(members.iter().map(|&i| &elements[i]));
                codirected.push((mask, inf));
            }
        }
        Ok((0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        codirected.iter().all(|(mask, inf)| {
                            !self.leq(inf, &elements[y])
                                || (0..n).any(|a| mask & (1 << a) != 0 && self.leq(&elements[a], &elements[x]))
                        })
                    })
                    .collect()
            })
            .collect())
    }

    /// Checks `k = ⋁{u ⊗ u | ∀v. hom(u,v) way above v}` on a finite quantale.
    pub fn check_k_decomposition(&self) -> Result<KDecomposition, QuantaleError> {
        let elements = self.finite_elements("k-decomposition")?;
        let way_above = self.way_above_relation()?;
        let index = |v: &QValue| elements.iter().position(|e| e == v).expect("carrier element");
        let witnesses: Vec<QValue> = elements
            .iter()
            .filter(|u| elements.iter().all(|v| way_above[index(&self.hom(u, v))][index(v)]))
            .cloned()
            .collect();
        let squares: Vec<QValue> = witnesses.iter().map(|u| self.tensor(u, u)).collect();
        let join = self.join(squares.iter());
        Ok(KDecomposition { holds: join == self.unit(), join, witnesses })
    }

    /// `true` when every `u ⊗ -` preserves infima of codirected subsets,
    /// checked by enumerating all codirected subsets of a finite carrier.
    pub fn tensor_preserves_codirected_infima(&self) -> Result<bool, QuantaleError> {
        let elements = self.finite_elements("codirected infima")?;
        let n = elements.len();
        if n > 16 {
            return Err(QuantaleError::Unsupported("codirected enumeration beyond 16 elements".into()));
        }
        for mask in 1u32..(1u32 << n) {
            let members: Vec<&QValue> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &elements[i]).collect();
            let directed = members.iter().all(|a| {
                members.iter().all(|b| members.iter().any(|c| self.leq(c, a) && self.leq(c, b)))
            });
            if !directed {
                continue;
            }
            let inf = self.meet(members.iter().copied());
            for u in &elements {
                let lhs = self.tensor(u, &inf);
                let images: Vec<QValue> = members.iter().map(|m| self.tensor(u, m)).collect();
                if lhs != self.meet(images.iter()) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn finite_elements(&self, what: &str) -> Result<Vec<QValue>, QuantaleError> {
        self.elements()
            .ok_or_else(|| QuantaleError::Unsupported(alloc::format!("{what} on the infinite quantale {}", self.kind.name())))
    }
}

fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

fn cartesian(per: &[Vec<QValue>]) -> Vec<QValue> {
    let mut acc: Vec<Vec<QValue>> = vec![Vec::new()];
    for options in per {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut next = prefix.clone();
                    next.push(o.clone());
                    next
                })
            })
            .collect();
    }
    acc.into_iter().map(QValue::Tuple).collect()
}

/// Outcome of the unit decomposition check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KDecomposition {
    pub holds: bool,
    pub join: QValue,
    pub witnesses: Vec<QValue>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Law {
    Lattice,
    Monoid,
    JoinPreservation,
    Adjunction,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::Lattice => "lattice",
            Law::Monoid => "monoid",
            Law::JoinPreservation => "join-preservation",
            Law::Adjunction => "adjunction",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawCheck {
    pub law: Law,
    pub passed: bool,
    /// Number of checked instances.
    pub checked: usize,
    pub failure: Option<LawFailure>,
}

/// A violated equation together with the values that violate it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawFailure {
    pub law: Law,
    pub equation: &'static str,
    pub witness: Vec<QValue>,
    pub rendered: Vec<String>,
}

impl fmt::Display for LawFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} law violated ({}) at ({})", self.law.name(), self.equation, self.rendered.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub sampled: bool,
    pub checks: Vec<LawCheck>,
}

impl LawReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&LawFailure> {
        self.checks.iter().find_map(|c| c.failure.as_ref())
    }
}

const EXHAUSTIVE_TRIPLE_LIMIT: usize = 400_000;
const SAMPLED_TRIPLES: usize = 60_000;

struct LawChecker<'q> {
    q: &'q Quantale,
    law: Law,
    checked: usize,
    failure: Option<LawFailure>,
}

impl<'q> LawChecker<'q> {
    fn new(q: &'q Quantale, law: Law) -> Self {
        LawChecker { q, law, checked: 0, failure: None }
    }

    fn check(&mut self, ok: bool, equation: &'static str, witness: &[&QValue]) {
        self.checked += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(LawFailure {
                law: self.law,
                equation,
                witness: witness.iter().map(|v| (*v).clone()).collect(),
                rendered: witness.iter().map(|v| self.q.render(v)).collect(),
            });
        }
    }

    fn finish(self) -> LawCheck {
        LawCheck { law: self.law, passed: self.failure.is_none(), checked: self.checked, failure: self.failure }
    }
}

fn check_laws(q: &Quantale, elements: &[QValue]) -> LawReport {
    let n = elements.len();
    let exhaustive = n.saturating_mul(n).saturating_mul(n) <= EXHAUSTIVE_TRIPLE_LIMIT;
    let triples: Vec<(usize, usize, usize)> = if exhaustive {
        (0..n).flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a75);
        (0..SAMPLED_TRIPLES).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))).collect()
    };
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        triples.iter().map(|&(a, b, _)| (a, b)).collect()
    };

    let (top, bottom, unit) = (q.top(), q.bottom(), q.unit());

    let mut lattice = LawChecker::new(q, Law::Lattice);
    for e in elements {
        lattice.check(q.leq(&bottom, e) && q.leq(e, &top), "bot <= u <= top", &[e]);
        lattice.check(q.join2(e, e) == *e, "u ∨ u = u", &[e]);
    }
    for &(a, b) in &pairs {
        let (x, y) = (&elements[a], &elements[b]);
        let j = q.join2(x, y);
        let m = q.meet2(x, y);
        lattice.check(j == q.join2(y, x), "u ∨ v = v ∨ u", &[x, y]);
        lattice.check(q.leq(x, &j) && q.leq(y, &j), "u, v <= u ∨ v", &[x, y]);
        lattice.check(q.leq(&m, x) && q.leq(&m, y), "u ∧ v <= u, v", &[x, y]);
        lattice.check(q.join2(x, &m) == *x && q.meet2(x, &j) == *x, "absorption", &[x, y]);
        lattice.check(!(q.leq(x, y) && q.leq(y, x)) || x == y, "antisymmetry", &[x, y]);
    }
    for &(a, b, c) in &triples {
        let (x, y, z) = (&elements[a], &elements[b], &elements[c]);
        lattice.check(q.join2(&q.join2(x, y), z) == q.join2(x, &q.join2(y, z)), "(u ∨ v) ∨ w = u ∨ (v ∨ w)", &[x, y, z]);
        // meet must be the greatest lower bound
        lattice.check(!(q.leq(z, x) && q.leq(z, y)) || q.leq(z, &q.meet2(x, y)), "w <= u, v ⇒ w <= u ∧ v", &[x, y, z]);
    }

    let mut monoid = LawChecker::new(q, Law::Monoid);
    for e in elements {
        monoid.check(q.tensor(&unit, e) == *e, "k ⊗ u = u", &[e]);
    }
    for &(a, b) in &pairs {
        let (x, y) = (&elements[a], &elements[b]);
        monoid.check(q.tensor(x, y) == q.tensor(y, x), "u ⊗ v = v ⊗ u", &[x, y]);
    }
    for &(a, b, c) in &triples {
        let (x, y, z) = (&elements[a], &elements[b], &elements[c]);
        monoid.check(q.tensor(&q.tensor(x, y), z) == q.tensor(x, &q.tensor(y, z)), "(u ⊗ v) ⊗ w = u ⊗ (v ⊗ w)", &[x, y, z]);
    }

    let mut preservation = LawChecker::new(q, Law::JoinPreservation);
    for e in elements {
        preservation.check(q.tensor(e, &bottom) == bottom, "u ⊗ bot = bot", &[e]);
    }
    for &(a, b, c) in &triples {
        let (x, y, z) = (&elements[a], &elements[b], &elements[c]);
        preservation.check(
            q.tensor(x, &q.join2(y, z)) == q.join2(&q.tensor(x, y), &q.tensor(x, z)),
            "u ⊗ (v ∨ w) = (u ⊗ v) ∨ (u ⊗ w)",
            &[x, y, z],
        );
    }

    let mut adjunction = LawChecker::new(q, Law::Adjunction);
    for &(a, b, c) in &triples {
        let (u, v, w) = (&elements[a], &elements[b], &elements[c]);
        adjunction.check(q.leq(&q.tensor(u, v), w) == q.leq(v, &q.hom(u, w)), "u ⊗ v <= w ⟺ v <= hom(u,w)", &[u, v, w]);
    }

    LawReport {
        sampled: !exhaustive,
        checks: vec![lattice.finish(), monoid.finish(), preservation.finish(), adjunction.finish()],
    }
}

/// Names of the values of a finite table, for building tables by name.
pub fn table_from_names(names: &[&str], join: &[&[&str]], tensor: &[&[&str]]) -> Result<FiniteTable, QuantaleError> {
    let index = |s: &str| {
        names
            .iter()
            .position(|n| *n == s)
            .map(|i| i as u16)
            .ok_or_else(|| QuantaleError::UnknownValue(s.to_string()))
    };
    let convert = |rows: &[&[&str]]| -> Result<Vec<Vec<u16>>, QuantaleError> {
        rows.iter().map(|row| row.iter().map(|s| index(s)).collect()).collect()
    };
    Ok(FiniteTable { names: names.iter().map(|s| s.to_string()).collect(), join: convert(join)?, tensor: convert(tensor)? })
}

impl QValue {
    /// Shorthand for building unit-interval values in code.
    pub fn ratio(numer: i64, denom: i64) -> QValue {
        QValue::Num(rational::rat(numer, denom))
    }

    pub fn is_zero_num(&self) -> bool {
        matches!(self, QValue::Num(r) if r.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(q: &Quantale, name: &str) -> QValue {
        q.parse_value(name).unwrap()
    }

    fn r(n: i64, d: i64) -> QValue {
        QValue::ratio(n, d)
    }

    #[test]
    fn joins_follow_quantale_order() {
        let b = Quantale::bool2();
        assert_eq!(b.join([&b.bottom(), &b.top()]), b.top());
        let l = Quantale::luk01();
        assert_eq!(l.join([&r(3, 10), &r(7, 10)]), r(3, 10));
        assert_eq!(l.meet([&r(3, 10), &r(7, 10)]), r(7, 10));
        let d = Quantale::diamond4();
        assert_eq!(d.join([&e(&d, "N"), &e(&d, "B")]), d.top());
        assert_eq!(d.meet([&e(&d, "N"), &e(&d, "B")]), d.bottom());
        // empty families
        assert_eq!(l.join([]), l.bottom());
        assert_eq!(d.meet([]), d.top());
    }

    #[test]
    fn tensors() {
        let l = Quantale::luk01();
        assert_eq!(l.tensor(&r(6, 10), &r(7, 10)), r(1, 1));
        let m = Quantale::max01();
        assert_eq!(m.tensor(&r(2, 10), &r(5, 10)), r(5, 10));
        for q in [Quantale::bool2(), Quantale::diamond4(), Quantale::chain(3)] {
            for u in q.elements().unwrap() {
                assert_eq!(q.tensor(&q.unit(), &u), u);
            }
        }
    }

    /// Largest v on a 1/100 grid with u ⊕ v >= w numerically.
    fn brute_luk_hom(u: i64, w: i64) -> i64 {
        (0..=100).filter(|v| (u + v).min(100) >= w).min().unwrap()
    }

    #[test]
    fn residuals() {
        let b = Quantale::bool2();
        assert_eq!(b.hom(&b.top(), &b.bottom()), b.bottom());
        let l = Quantale::luk01();
        assert_eq!(brute_luk_hom(30, 70), 40);
        assert_eq!(l.hom(&r(3, 10), &r(7, 10)), r(2, 5));
        let d = Quantale::diamond4();
        // join of all w with N ∧ w <= B
        let n = e(&d, "N");
        let bb = e(&d, "B");
        let admissible: Vec<QValue> =
            d.elements().unwrap().into_iter().filter(|w| d.leq(&d.tensor(&n, w), &bb)).collect();
        assert_eq!(d.join(admissible.iter()), bb);
        assert_eq!(d.hom(&n, &bb), bb);
    }

    #[test]
    fn symmetrized_residuals() {
        let l = Quantale::luk01();
        assert_eq!(l.hom_s(&r(3, 10), &r(7, 10)), r(2, 5));
        let m = Quantale::max01();
        assert_eq!(m.hom_s(&r(2, 10), &r(5, 10)), r(1, 2));
        assert_eq!(m.hom_s(&r(1, 2), &r(1, 2)), r(0, 1));
        for q in [Quantale::bool2(), Quantale::diamond4()] {
            for u in q.elements().unwrap() {
                assert!(q.leq(&q.unit(), &q.hom_s(&u, &u)));
            }
        }
    }

    #[test]
    fn builtin_laws_hold() {
        for q in [Quantale::bool2(), Quantale::diamond4(), Quantale::chain(3), Quantale::chain(5)] {
            let report = q.validate(None);
            assert!(report.all_passed(), "{q:?}: {:?}", report.first_failure());
            assert!(!report.sampled);
        }
        let report = Quantale::max01().validate(Some(&rational::rat(1, 20)));
        assert!(report.all_passed());
    }

    #[test]
    fn non_associative_table_is_rejected_with_witness() {
        // chain 0 < 1 < 2, tensor commutative with unit 2 but
        // (0 ⊗ 0) ⊗ 1 = 0 while 0 ⊗ (0 ⊗ 1) = 1.
        let table = table_from_names(
            &["0", "1", "2"],
            &[&["0", "1", "2"], &["1", "1", "2"], &["2", "2", "2"]],
            &[&["1", "1", "0"], &["1", "0", "1"], &["0", "1", "2"]],
        )
        .unwrap();
        let q = Quantale::from_table_unchecked(table.clone()).unwrap();
        let report = q.validate(None);
        let monoid = report.checks.iter().find(|c| c.law == Law::Monoid).unwrap();
        assert!(!monoid.passed);
        let failure = monoid.failure.as_ref().unwrap();
        let [a, b, c] = [&failure.witness[0], &failure.witness[1], &failure.witness[2]];
        assert_ne!(q.tensor(&q.tensor(a, b), c), q.tensor(a, &q.tensor(b, c)));
        assert!(Quantale::from_table(table).is_err());
    }

    #[test]
    fn way_above_is_order_on_finite_lattices() {
        for q in [Quantale::bool2(), Quantale::diamond4(), Quantale::chain(4)] {
            let rel = q.way_above_relation().unwrap();
            let el = q.elements().unwrap();
            for (i, x) in el.iter().enumerate() {
                for (j, y) in el.iter().enumerate() {
                    assert_eq!(rel[i][j], q.leq(y, x));
                }
            }
        }
    }

    #[test]
    fn k_decomposition_on_finite_quantales() {
        let b = Quantale::bool2();
        let verdict = b.check_k_decomposition().unwrap();
        assert!(verdict.holds);
        assert!(verdict.witnesses.contains(&b.top()));
        assert!(Quantale::diamond4().check_k_decomposition().unwrap().holds);
        let chain = Quantale::chain(3);
        let verdict = chain.check_k_decomposition().unwrap();
        assert!(verdict.holds);
        // only u <= k qualifies; on the integral chain that is everything
        assert_eq!(verdict.witnesses.len(), 3);
        assert!(matches!(Quantale::luk01().check_k_decomposition(), Err(QuantaleError::Unsupported(_))));
    }

    #[test]
    fn products_are_componentwise() {
        let bb = Quantale::product(&[Quantale::bool2(), Quantale::bool2()]);
        assert_eq!(bb.cardinality(), Some(4));
        assert!(bb.validate(None).all_passed());
        assert!(!bb.is_chain());
        let ll = Quantale::product(&[Quantale::luk01(), Quantale::luk01()]);
        let u = QValue::Tuple(vec![r(1, 4), r(1, 2)]);
        let v = QValue::Tuple(vec![r(1, 2), r(3, 4)]);
        assert_eq!(ll.tensor(&u, &v), QValue::Tuple(vec![r(3, 4), r(1, 1)]));
        assert_eq!(ll.unit(), QValue::Tuple(vec![r(0, 1), r(0, 1)]));
        assert_eq!(ll.parse_value("(1/4,1/2)").unwrap(), u);
        assert_eq!(ll.render(&u), "(1/4,1/2)");
    }

    #[test]
    fn codirected_infima_preserved_by_frames() {
        assert!(Quantale::diamond4().tensor_preserves_codirected_infima().unwrap());
        assert!(Quantale::chain(4).tensor_preserves_codirected_infima().unwrap());
    }
}
