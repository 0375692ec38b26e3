//! JSON documents for quantales, V-categories, coalgebras and reports.

use std::collections::{BTreeMap, BTreeSet};

use qhm_core::quantale::{FiniteTable, QValue, Quantale, QuantaleKind};
use qhm_core::rational::{self, Rat};
use qhm_core::systems::{Coalgebra, Distribution, Functor, FunctorValue};
use qhm_core::vcat::VCat;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDoc {
    pub elements: Vec<String>,
    pub join: Vec<Vec<String>>,
    pub tensor: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantaleDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<QuantaleDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VCatDoc {
    pub quantale: QuantaleDoc,
    pub states: Vec<String>,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalgebraDoc {
    pub quantale: QuantaleDoc,
    pub functor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_matrix: Option<Vec<Vec<String>>>,
    pub transitions: BTreeMap<String, Value>,
}

pub fn parse_rat_text(text: &str) -> Result<Rat, CliError> {
    rational::parse_rat(text).ok_or_else(|| CliError::Parse(format!("not a rational: `{text}`")))
}

fn table_from_doc(t: &TableDoc) -> Result<FiniteTable, CliError> {
    let index = |name: &str| -> Result<u16, CliError> {
        t.elements
            .iter()
            .position(|e| e == name)
            .map(|i| i as u16)
            .ok_or_else(|| CliError::Parse(format!("unknown table element `{name}`")))
    };
    let grid = |rows: &[Vec<String>]| -> Result<Vec<Vec<u16>>, CliError> {
        rows.iter().map(|r| r.iter().map(|v| index(v)).collect()).collect()
    };
    Ok(FiniteTable { names: t.elements.clone(), join: grid(&t.join)?, tensor: grid(&t.tensor)? })
}

fn doc_from_table(t: &FiniteTable) -> TableDoc {
    let grid = |rows: &[Vec<u16>]| rows.iter().map(|r| r.iter().map(|&i| t.names[i as usize].clone()).collect()).collect();
    TableDoc { elements: t.names.clone(), join: grid(&t.join), tensor: grid(&t.tensor) }
}

/// Builds a quantale, re-validating every law for finite tables.
pub fn quantale_from_doc(doc: &QuantaleDoc) -> Result<Quantale, CliError> {
    match doc.kind.as_str() {
        "bool2" => Ok(Quantale::bool2()),
        "diamond4" => Ok(Quantale::diamond4()),
        "luk01" => Ok(Quantale::luk01()),
        "max01" => Ok(Quantale::max01()),
        "table" => {
            let t = doc.table.as_ref().ok_or_else(|| CliError::Parse("table quantale without `table`".into()))?;
            Ok(Quantale::from_table(table_from_doc(t)?)?)
        }
        "product" => {
            let factors = doc.factors.as_ref().ok_or_else(|| CliError::Parse("product quantale without `factors`".into()))?;
            let qs = factors.iter().map(quantale_from_doc).collect::<Result<Vec<_>, _>>()?;
            Ok(Quantale::product(&qs))
        }
        other => Err(CliError::Parse(format!("unknown quantale kind `{other}`"))),
    }
}

/// Like [`quantale_from_doc`] but keeps law-violating tables, so that the
/// law suite can report on them.
pub fn quantale_from_doc_unchecked(doc: &QuantaleDoc) -> Result<Quantale, CliError> {
    match (doc.kind.as_str(), &doc.table) {
        ("table", Some(t)) => Ok(Quantale::from_table_unchecked(table_from_doc(t)?)?),
        _ => quantale_from_doc(doc),
    }
}

pub fn doc_from_quantale(q: &Quantale) -> QuantaleDoc {
    match q.kind() {
        QuantaleKind::Table => QuantaleDoc { kind: "table".into(), table: q.table().map(doc_from_table), factors: None },
        QuantaleKind::Product => QuantaleDoc {
            kind: "product".into(),
            table: None,
            factors: Some(q.factors().unwrap_or_default().iter().map(doc_from_quantale).collect()),
        },
        k => QuantaleDoc { kind: k.name().into(), table: None, factors: None },
    }
}

/// Short names accepted by `--quantale`: `bool2`, `diamond4`, `luk01`,
/// `max01`, `chainN`, products joined by `*` (for example `luk01*luk01`),
/// or a path to a JSON descriptor.
pub fn quantale_from_name(name: &str) -> Result<Quantale, CliError> {
    if name.contains('*') {
        let qs = name.split('*').map(quantale_from_name).collect::<Result<Vec<_>, _>>()?;
        return Ok(Quantale::product(&qs));
    }
    match name {
        "bool2" => Ok(Quantale::bool2()),
        "diamond4" => Ok(Quantale::diamond4()),
        "luk01" => Ok(Quantale::luk01()),
        "max01" => Ok(Quantale::max01()),
        _ => {
            if let Some(n) = name.strip_prefix("chain").and_then(|s| s.parse::<usize>().ok()) {
                if n >= 2 {
                    return Ok(Quantale::chain(n));
                }
            }
            let text = std::fs::read_to_string(name)
                .map_err(|_| CliError::Parse(format!("unknown quantale `{name}` (not a built-in name or readable file)")))?;
            let doc: QuantaleDoc = serde_json::from_str(&text)?;
            quantale_from_doc(&doc)
        }
    }
}

pub fn render_matrix(q: &Quantale, m: &[Vec<QValue>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|v| q.render(v)).collect()).collect()
}

fn parse_matrix(q: &Quantale, rows: &[Vec<String>]) -> Result<Vec<Vec<QValue>>, CliError> {
    rows.iter().map(|r| r.iter().map(|v| Ok(q.parse_value(v)?)).collect()).collect()
}

pub fn vcat_to_doc(v: &VCat) -> VCatDoc {
    VCatDoc { quantale: doc_from_quantale(v.quantale()), states: v.states().to_vec(), matrix: render_matrix(v.quantale(), v.matrix()) }
}

pub fn vcat_from_doc(doc: &VCatDoc) -> Result<VCat, CliError> {
    let q = quantale_from_doc(&doc.quantale)?;
    let matrix = parse_matrix(&q, &doc.matrix)?;
    Ok(VCat::new(q, doc.states.clone(), matrix)?)
}

fn index_map(states: &[String]) -> Result<BTreeMap<&str, usize>, CliError> {
    let mut map = BTreeMap::new();
    for (i, s) in states.iter().enumerate() {
        if s == "deadlock" {
            return Err(CliError::Parse("`deadlock` is reserved and cannot name a state".into()));
        }
        if map.insert(s.as_str(), i).is_some() {
            return Err(CliError::Parse(format!("duplicate state `{s}`")));
        }
    }
    Ok(map)
}

fn state_list(v: &Value, idx: &BTreeMap<&str, usize>) -> Result<BTreeSet<usize>, CliError> {
    let items = v.as_array().ok_or_else(|| CliError::Parse("expected a list of states".into()))?;
    items
        .iter()
        .map(|s| {
            let name = s.as_str().ok_or_else(|| CliError::Parse("state names must be strings".into()))?;
            idx.get(name).copied().ok_or_else(|| CliError::Parse(format!("unknown state `{name}`")))
        })
        .collect()
}

fn weight_map(v: &Value, idx: &BTreeMap<&str, usize>, allow_deadlock: bool) -> Result<(BTreeMap<usize, Rat>, Rat), CliError> {
    let obj = v.as_object().ok_or_else(|| CliError::Parse("expected a map from targets to rationals".into()))?;
    let mut out = BTreeMap::new();
    let mut deadlock = rational::zero();
    for (k, w) in obj {
        let w = w.as_str().ok_or_else(|| CliError::Parse(format!("weight for `{k}` must be a \"p/q\" string")))?;
        let w = parse_rat_text(w)?;
        if k == "deadlock" && allow_deadlock {
            deadlock += w;
            continue;
        }
        let x = idx.get(k.as_str()).copied().ok_or_else(|| CliError::Parse(format!("unknown target `{k}`")))?;
        if w != rational::zero() {
            out.insert(x, w);
        }
    }
    Ok((out, deadlock))
}

fn functor_from_doc(doc: &CoalgebraDoc) -> Result<Functor, CliError> {
    let labels = || -> Vec<String> {
        doc.labels.clone().unwrap_or_else(|| {
            let mut seen = BTreeSet::new();
            for payload in doc.transitions.values() {
                if let Some(obj) = payload.as_object() {
                    seen.extend(obj.keys().cloned());
                }
            }
            seen.into_iter().collect()
        })
    };
    Ok(match doc.functor.as_str() {
        "lts" => Functor::Lts { labels: labels() },
        "metric_ts" => Functor::MetricTs,
        "para_powerset" => Functor::ParaPowerset,
        "dist_maybe" => Functor::DistMaybe { labels: labels() },
        "signed_weighted" => Functor::SignedWeighted { labels: labels() },
        other => return Err(CliError::Parse(format!("unknown functor `{other}`"))),
    })
}

pub fn coalgebra_from_doc(doc: &CoalgebraDoc) -> Result<Coalgebra, CliError> {
    let q = quantale_from_doc(&doc.quantale)?;
    let idx = index_map(&doc.states)?;
    let functor = functor_from_doc(doc)?;
    for name in doc.transitions.keys() {
        if !idx.contains_key(name.as_str()) {
            return Err(CliError::Parse(format!("transitions for unknown state `{name}`")));
        }
    }
    let labels = functor.labels().to_vec();
    let null = Value::Null;
    let per_label = |payload: &Value, label: &str| -> Value {
        payload.as_object().and_then(|o| o.get(label)).cloned().unwrap_or(Value::Null)
    };
    let mut transitions = Vec::with_capacity(doc.states.len());
    for s in &doc.states {
        let payload = doc.transitions.get(s).unwrap_or(&null);
        let value = match &functor {
            Functor::Lts { .. } => FunctorValue::Lts(
                labels
                    .iter()
                    .map(|a| match per_label(payload, a) {
                        Value::Null => Ok(BTreeSet::new()),
                        v => state_list(&v, &idx),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            Functor::MetricTs => {
                let obs = payload
                    .get("obs")
                    .and_then(Value::as_str)
                    .ok_or_else(|| CliError::Parse(format!("state `{s}` needs an \"obs\" rational")))?;
                let succ = match payload.get("succ") {
                    Some(v) => state_list(v, &idx)?,
                    None => BTreeSet::new(),
                };
                FunctorValue::MetricTs(parse_rat_text(obs)?, succ)
            }
            Functor::ParaPowerset => {
                let mut values = vec![q.bottom(); doc.states.len()];
                if let Some(obj) = payload.as_object() {
                    for (k, v) in obj {
                        let x = idx.get(k.as_str()).copied().ok_or_else(|| CliError::Parse(format!("unknown state `{k}`")))?;
                        let name = v.as_str().ok_or_else(|| CliError::Parse("diamond4 values must be strings".into()))?;
                        values[x] = q.parse_value(name)?;
                    }
                }
                FunctorValue::Para(values)
            }
            Functor::DistMaybe { .. } => FunctorValue::Dist(
                labels
                    .iter()
                    .map(|a| match per_label(payload, a) {
                        Value::Null => Ok(Distribution::deadlock()),
                        v => weight_map(&v, &idx, true).map(|(mass, deadlock)| Distribution { mass, deadlock }),
                    })
                    .collect::<Result<_, _>>()?,
            ),
            Functor::SignedWeighted { .. } => FunctorValue::Signed(
                labels
                    .iter()
                    .map(|a| match per_label(payload, a) {
                        Value::Null => Ok(BTreeMap::new()),
                        v => weight_map(&v, &idx, false).map(|(w, _)| w),
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        transitions.push(value);
    }
    let base = match &doc.base_matrix {
        Some(rows) => VCat::new(q.clone(), doc.states.clone(), parse_matrix(&q, rows)?)?,
        None => VCat::discrete(q.clone(), doc.states.clone()),
    };
    Ok(Coalgebra::new(base, functor, transitions)?)
}

fn names(states: &[String], set: &BTreeSet<usize>) -> Value {
    Value::Array(set.iter().map(|&x| Value::String(states[x].clone())).collect())
}

fn weights(states: &[String], w: &BTreeMap<usize, Rat>) -> Map<String, Value> {
    w.iter().map(|(&x, m)| (states[x].clone(), Value::String(rational::format_rat(m)))).collect()
}

pub fn coalgebra_to_doc(c: &Coalgebra) -> CoalgebraDoc {
    let q = c.quantale();
    let states = c.states();
    let labels = c.functor().labels();
    let mut transitions = BTreeMap::new();
    for (s, t) in states.iter().zip(c.transitions()) {
        let payload = match t {
            FunctorValue::Lts(per) => {
                Value::Object(labels.iter().zip(per).filter(|(_, set)| !set.is_empty()).map(|(a, set)| (a.clone(), names(states, set))).collect())
            }
            FunctorValue::MetricTs(r, set) => json!({"obs": rational::format_rat(r), "succ": names(states, set)}),
            FunctorValue::Para(values) => Value::Object(
                values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != q.bottom())
                    .map(|(x, v)| (states[x].clone(), Value::String(q.render(v))))
                    .collect(),
            ),
            FunctorValue::Dist(per) => Value::Object(
                labels
                    .iter()
                    .zip(per)
                    .map(|(a, d)| {
                        let mut m = weights(states, &d.mass);
                        if d.deadlock != rational::zero() {
                            m.insert("deadlock".into(), Value::String(rational::format_rat(&d.deadlock)));
                        }
                        (a.clone(), Value::Object(m))
                    })
                    .collect(),
            ),
            FunctorValue::Signed(per) => Value::Object(
                labels.iter().zip(per).filter(|(_, w)| !w.is_empty()).map(|(a, w)| (a.clone(), Value::Object(weights(states, w)))).collect(),
            ),
        };
        transitions.insert(s.clone(), payload);
    }
    let base = c.base();
    let discrete = VCat::discrete(q.clone(), states.to_vec());
    CoalgebraDoc {
        quantale: doc_from_quantale(q),
        functor: c.functor().name().into(),
        labels: if labels.is_empty() { None } else { Some(labels.to_vec()) },
        states: states.to_vec(),
        base_matrix: if *base == discrete { None } else { Some(render_matrix(q, base.matrix())) },
        transitions,
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// A matrix as CSV with a header row of state names.
pub fn matrix_csv(q: &Quantale, v: &VCat) -> String {
    let mut out = String::from("state");
    for s in v.states() {
        out.push(',');
        out.push_str(s);
    }
    out.push('\n');
    for (s, row) in v.states().iter().zip(v.matrix()) {
        out.push_str(s);
        for x in row {
            let text = q.render(x);
            out.push(',');
            if text.contains(',') {
                out.push('"');
                out.push_str(&text);
                out.push('"');
            } else {
                out.push_str(&text);
            }
        }
        out.push('\n');
    }
    out
}
