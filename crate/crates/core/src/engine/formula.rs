use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::quantale::{QValue, Quantale};
use crate::rational;
use crate::systems::{Coalgebra, Modality};

use super::EngineError;

/// Formulas of the quantitative modal logic, shared as a DAG.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Tensor(QValue, Arc<Formula>),
    HomS(QValue, Arc<Formula>),
    Modal(Modality, Arc<Formula>),
}

pub type FormulaRef = Arc<Formula>;

impl Formula {
    pub fn top() -> FormulaRef {
        Arc::new(Formula::Top)
    }

    pub fn and(a: FormulaRef, b: FormulaRef) -> FormulaRef {
        Arc::new(Formula::And(a, b))
    }

    pub fn or(a: FormulaRef, b: FormulaRef) -> FormulaRef {
        Arc::new(Formula::Or(a, b))
    }

    pub fn tensor(u: QValue, a: FormulaRef) -> FormulaRef {
        Arc::new(Formula::Tensor(u, a))
    }

    pub fn hom_s(u: QValue, a: FormulaRef) -> FormulaRef {
        Arc::new(Formula::HomS(u, a))
    }

    pub fn modal(m: Modality, a: FormulaRef) -> FormulaRef {
        Arc::new(Formula::Modal(m, a))
    }

    fn children(&self) -> [Option<&FormulaRef>; 2] {
        match self {
            Formula::Top => [None, None],
            Formula::And(a, b) | Formula::Or(a, b) => [Some(a), Some(b)],
            Formula::Tensor(_, a) | Formula::HomS(_, a) | Formula::Modal(_, a) => [Some(a), None],
        }
    }

    /// Modal depth.
    pub fn depth(&self) -> usize {
        let mut memo = BTreeMap::new();
        depth_memo(self, &mut memo)
    }

    /// Number of nodes counted as a tree (saturating).
    pub fn size(&self) -> usize {
        let mut memo = BTreeMap::new();
        size_memo(self, &mut memo)
    }

    /// Checks modal names against the coalgebra's functor and constants
    /// against the carrier.
    pub fn check(&self, c: &Coalgebra) -> Result<(), EngineError> {
        let q = c.quantale();
        match self {
            Formula::Top => Ok(()),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.check(c)?;
                b.check(c)
            }
            Formula::Tensor(u, a) | Formula::HomS(u, a) => {
                if !q.contains(u) {
                    return Err(EngineError::Formula(alloc::format!("constant {u:?} is not in the carrier")));
                }
                a.check(c)
            }
            Formula::Modal(m, a) => {
                c.functor().resolve_modality(m)?;
                a.check(c)
            }
        }
    }

    /// S-expression rendering. Subformulas shared more than once (and
    /// larger than a single node) are bound once with `let` and referenced
    /// by `(ref dN)`.
    pub fn render(&self, q: &Quantale) -> String {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        count_refs(self, &mut counts);
        let mut names: BTreeMap<usize, usize> = BTreeMap::new();
        let mut defs: Vec<String> = Vec::new();
        let body = render_node(self, q, &counts, &mut names, &mut defs, true);
        if defs.is_empty() {
            body
        } else {
            let mut out = String::from("(let (");
            for (i, d) in defs.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "(d{i} {d})");
            }
            let _ = write!(out, ") {body})");
            out
        }
    }
}

fn addr(f: &Formula) -> usize {
    f as *const Formula as usize
}

fn depth_memo(f: &Formula, memo: &mut BTreeMap<usize, usize>) -> usize {
    if let Some(&d) = memo.get(&addr(f)) {
        return d;
    }
    let inner = f.children().into_iter().flatten().map(|c| depth_memo(c, memo)).max().unwrap_or(0);
    let d = if matches!(f, Formula::Modal(_, _)) { inner + 1 } else { inner };
    memo.insert(addr(f), d);
    d
}

fn size_memo(f: &Formula, memo: &mut BTreeMap<usize, usize>) -> usize {
    if let Some(&s) = memo.get(&addr(f)) {
        return s;
    }
    let s = f.children().into_iter().flatten().fold(1usize, |acc, c| acc.saturating_add(size_memo(c, memo)));
    memo.insert(addr(f), s);
    s
}

fn count_refs(f: &Formula, counts: &mut BTreeMap<usize, usize>) {
    let seen = counts.entry(addr(f)).or_insert(0);
    *seen += 1;
    if *seen == 1 {
        for c in f.children().into_iter().flatten() {
            count_refs(c, counts);
        }
    }
}

fn render_constant(q: &Quantale, u: &QValue) -> String {
    match u {
        QValue::Num(r) => alloc::format!("\"{}\"", rational::format_rat(r)),
        _ => alloc::format!("\"{}\"", q.render(u)),
    }
}

fn render_node(
    f: &Formula,
    q: &Quantale,
    counts: &BTreeMap<usize, usize>,
    names: &mut BTreeMap<usize, usize>,
    defs: &mut Vec<String>,
    root: bool,
) -> String {
    let shared = !root && counts.get(&addr(f)).copied().unwrap_or(0) > 1 && !matches!(f, Formula::Top);
    if shared {
        if let Some(&i) = names.get(&addr(f)) {
            return alloc::format!("(ref d{i})");
        }
    }
    let text = match f {
        Formula::Top => String::from("(top)"),
        Formula::And(a, b) => alloc::format!(
            "(and {} {})",
            render_node(a, q, counts, names, defs, false),
            render_node(b, q, counts, names, defs, false)
        ),
        Formula::Or(a, b) => alloc::format!(
            "(or {} {})",
            render_node(a, q, counts, names, defs, false),
            render_node(b, q, counts, names, defs, false)
        ),
        Formula::Tensor(u, a) => {
            alloc::format!("(tensor {} {})", render_constant(q, u), render_node(a, q, counts, names, defs, false))
        }
        Formula::HomS(u, a) => {
            alloc::format!("(homs {} {})", render_constant(q, u), render_node(a, q, counts, names, defs, false))
        }
        Formula::Modal(m, a) => {
            let inner = render_node(a, q, counts, names, defs, false);
            match m {
                Modality::Dia(Some(l)) | Modality::Exp(Some(l)) => alloc::format!("(m {} {} {})", m.keyword(), l, inner),
                Modality::Wgt(l, r) => alloc::format!("(m wgt {} \"{}\" {})", l, rational::format_rat(r), inner),
                _ => alloc::format!("(m {} {})", m.keyword(), inner),
            }
        }
    };
    if shared {
        let i = defs.len();
        defs.push(text);
        names.insert(addr(f), i);
        alloc::format!("(ref d{i})")
    } else {
        text
    }
}

/// Evaluates formulas on a coalgebra, caching shared subformulas.
pub struct Evaluator<'c> {
    c: &'c Coalgebra,
    memo: BTreeMap<usize, (FormulaRef, Vec<QValue>)>,
}

impl<'c> Evaluator<'c> {
    pub fn new(c: &'c Coalgebra) -> Self {
        Evaluator { c, memo: BTreeMap::new() }
    }

    pub fn eval(&mut self, f: &FormulaRef) -> Result<Vec<QValue>, EngineError> {
        if let Some((_, v)) = self.memo.get(&addr(f)) {
            return Ok(v.clone());
        }
        let c = self.c;
        let q = c.quantale();
        let n = c.len();
        let value = match &**f {
            Formula::Top => alloc::vec![q.top(); n],
            Formula::And(a, b) => {
                let (va, vb) = (self.eval(a)?, self.eval(b)?);
                va.iter().zip(&vb).map(|(x, y)| q.meet2(x, y)).collect()
            }
            Formula::Or(a, b) => {
                let (va, vb) = (self.eval(a)?, self.eval(b)?);
                va.iter().zip(&vb).map(|(x, y)| q.join2(x, y)).collect()
            }
            Formula::Tensor(u, a) => {
                check_constant(q, u)?;
                self.eval(a)?.iter().map(|x| q.tensor(u, x)).collect()
            }
            Formula::HomS(u, a) => {
                check_constant(q, u)?;
                self.eval(a)?.iter().map(|x| q.hom_s(u, x)).collect()
            }
            Formula::Modal(m, a) => {
                c.functor().resolve_modality(m)?;
                let inner = if m.is_nullary() { alloc::vec![q.top(); n] } else { self.eval(a)? };
                c.transitions().iter().map(|t| c.functor().apply(q, m, &inner, t)).collect::<Result<Vec<_>, _>>()?
            }
        };
        // keep the node alive so its address stays unique
        self.memo.insert(addr(f), (f.clone(), value.clone()));
        Ok(value)
    }
}

fn check_constant(q: &Quantale, u: &QValue) -> Result<(), EngineError> {
    if q.contains(u) {
        Ok(())
    } else {
        Err(EngineError::Formula(alloc::format!("constant {u:?} is not in the carrier")))
    }
}

/// `⟦φ⟧` on every state.
pub fn eval_formula(f: &FormulaRef, c: &Coalgebra) -> Result<Vec<QValue>, EngineError> {
    Evaluator::new(c).eval(f)
}
