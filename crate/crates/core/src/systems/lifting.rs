use alloc::string::String;
use alloc::vec::Vec;

use crate::quantale::{QValue, Quantale};
use crate::rational::{self, Rat};

use super::functor::{Functor, FunctorValue};
use super::SystemsError;

/// A predicate lifting, named by its modality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Modality {
    /// `⋁_{x∈S} f(x)` over the successors (under a label for lts).
    Dia(Option<String>),
    /// Nullary observation of metric transition systems.
    O,
    /// `⋀_x hom(g(x), f(x))`.
    BoxSup,
    /// `⋀_x hom(g(x), f(x)) ∧ hom(¬f(x), ¬g(x))`.
    BoxArrow,
    /// Expectation of `f`, extended by deadlock ↦ 1.
    Exp(Option<String>),
    /// `min{1, max{0, r + ½ Σ f(x) t(a)(x)}}`.
    Wgt(String, Rat),
}

/// Closure operator under which a lifting is continuous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ContinuityClass {
    Id,
    L,
    CInfSup,
    Inf,
}

impl Modality {
    pub fn keyword(&self) -> &'static str {
        match self {
            Modality::Dia(_) => "dia",
            Modality::O => "o",
            Modality::BoxSup => "box_sup",
            Modality::BoxArrow => "box_arrow",
            Modality::Exp(_) => "exp",
            Modality::Wgt(_, _) => "wgt",
        }
    }

    /// Nullary liftings ignore their argument.
    pub fn is_nullary(&self) -> bool {
        matches!(self, Modality::O)
    }

    pub fn continuity(&self) -> ContinuityClass {
        match self {
            Modality::Dia(_) => ContinuityClass::CInfSup,
            Modality::O | Modality::BoxSup | Modality::BoxArrow => ContinuityClass::Inf,
            Modality::Exp(_) | Modality::Wgt(_, _) => ContinuityClass::L,
        }
    }
}

impl Functor {
    /// Representatives of every modality family in `Λ`. The weighted family
    /// `wgt_{a,r}` is represented by `r = 1/2`, the offset at which no
    /// truncation occurs.
    pub fn modalities(&self) -> Vec<Modality> {
        match self {
            Functor::Lts { labels } => labels.iter().map(|a| Modality::Dia(Some(a.clone()))).collect(),
            Functor::MetricTs => alloc::vec![Modality::O, Modality::Dia(None)],
            Functor::ParaPowerset => alloc::vec![Modality::BoxSup, Modality::BoxArrow],
            Functor::DistMaybe { labels } => labels.iter().map(|a| Modality::Exp(Some(a.clone()))).collect(),
            Functor::SignedWeighted { labels } => {
                labels.iter().map(|a| Modality::Wgt(a.clone(), rational::rat(1, 2))).collect()
            }
        }
    }

    fn resolve(&self, label: &Option<String>) -> Result<usize, SystemsError> {
        match label {
            Some(a) => self.label_index(a).ok_or_else(|| SystemsError::UnknownModality(alloc::format!("label `{a}`"))),
            None if self.labels().len() == 1 => Ok(0),
            None => Err(SystemsError::UnknownModality("a label is required".into())),
        }
    }

    /// Checks that the modality belongs to this functor's `Λ`.
    pub fn resolve_modality(&self, modality: &Modality) -> Result<(), SystemsError> {
        let bad = || SystemsError::UnknownModality(alloc::format!("{} for functor {}", modality.keyword(), self.name()));
        match (self, modality) {
            (Functor::Lts { .. }, Modality::Dia(label)) | (Functor::DistMaybe { .. }, Modality::Exp(label)) => {
                self.resolve(label).map(|_| ())
            }
            (Functor::MetricTs, Modality::O | Modality::Dia(None)) => Ok(()),
            (Functor::ParaPowerset, Modality::BoxSup | Modality::BoxArrow) => Ok(()),
            (Functor::SignedWeighted { .. }, Modality::Wgt(label, _)) => self.resolve(&Some(label.clone())).map(|_| ()),
            _ => Err(bad()),
        }
    }

    /// `λ_X(f)(t)`.
    pub fn apply(&self, q: &Quantale, modality: &Modality, f: &[QValue], t: &FunctorValue) -> Result<QValue, SystemsError> {
        let mismatch = || SystemsError::Mismatch(alloc::format!("{} cannot evaluate this functor value", modality.keyword()));
        let num = |v: &QValue| -> Result<Rat, SystemsError> {
            q.numeric(v).cloned().ok_or_else(|| SystemsError::Mismatch("numeric predicate expected".into()))
        };
        match (self, modality, t) {
            (Functor::Lts { .. }, Modality::Dia(label), FunctorValue::Lts(per)) => {
                let a = self.resolve(label)?;
                Ok(q.join(per[a].iter().map(|&x| &f[x])))
            }
            (Functor::MetricTs, Modality::Dia(None), FunctorValue::MetricTs(_, s)) => Ok(q.join(s.iter().map(|&x| &f[x]))),
            (Functor::MetricTs, Modality::O, FunctorValue::MetricTs(r, _)) => Ok(QValue::Num(r.clone())),
            (Functor::ParaPowerset, Modality::BoxSup | Modality::BoxArrow, FunctorValue::Para(g)) => {
                let arrow = matches!(modality, Modality::BoxArrow);
                let mut acc = q.top();
                for (gx, fx) in g.iter().zip(f) {
                    acc = q.meet2(&acc, &q.hom(gx, fx));
                    if arrow {
                        acc = q.meet2(&acc, &q.hom(&q.negation(fx)?, &q.negation(gx)?));
                    }
                }
                Ok(acc)
            }
            (Functor::DistMaybe { .. }, Modality::Exp(label), FunctorValue::Dist(per)) => {
                let d = &per[self.resolve(label)?];
                let mut total = d.deadlock.clone();
                for (&x, m) in &d.mass {
                    total += m * num(&f[x])?;
                }
                Ok(QValue::Num(total))
            }
            (Functor::SignedWeighted { .. }, Modality::Wgt(label, r), FunctorValue::Signed(per)) => {
                let w = &per[self.resolve(&Some(label.clone()))?];
                let mut sum = rational::zero();
                for (&x, m) in w {
                    sum += m * num(&f[x])?;
                }
                Ok(QValue::Num(rational::clamp01(r + sum / rational::rat(2, 1))))
            }
            _ => Err(mismatch()),
        }
    }
}
