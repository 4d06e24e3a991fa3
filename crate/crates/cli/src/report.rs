//! JSON reports (`bht-report/1`) and text tables.
//!
//! Reports are assembled as ordered JSON objects. Floats are written with
//! 17 significant digits so they read back to the same `f64`; non-finite
//! values become `null`. Wall-clock times are only included on request,
//! which keeps reports byte-stable.

use bht_core::catalog::CatalogEntry;
use bht_core::fields::{ResidualReport, Tolerances};
use bht_core::graph::SearchReport;
use bht_core::sampling::SEQUENCE_ID;
use serde_json::{json, Map, Number, Value};

pub const SCHEMA: &str = "bht-report/1";

pub fn tool() -> String {
    format!("bht {}", env!("CARGO_PKG_VERSION"))
}

/// A float with 17 significant digits, or `null`.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(
            format!("{v:.16e}")
                .parse::<Number>()
                .expect("formatted float is valid JSON"),
        )
    } else {
        Value::Null
    }
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

/// Three significant digits for tables.
pub fn sig3(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.2e}")
    } else {
        format!("{v}")
    }
}

pub fn document(reports: Vec<Value>) -> Value {
    json!({
        "schema": SCHEMA,
        "tool": tool(),
        "reports": reports,
    })
}

/// Pretty-printed document with a trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values serialise");
    s.push('\n');
    s
}

fn tolerances(t: &Tolerances) -> Value {
    json!({
        "harmonic": num(t.harmonic),
        "biharmonic": num(t.biharmonic),
        "proper": num(t.proper),
        "reject": num(t.reject),
    })
}

pub fn map_report(entry: &CatalogEntry, r: &ResidualReport, wall_time: Option<f64>) -> Value {
    let mut o = Map::new();
    o.insert("kind".into(), json!("map"));
    o.insert("name".into(), json!(entry.name));
    o.insert(
        "samples".into(),
        json!({
            "requested": r.requested,
            "evaluated": r.samples,
            "skipped": r.skipped,
            "sequence": SEQUENCE_ID,
        }),
    );
    o.insert("tolerances".into(), tolerances(&r.tolerances));
    o.insert("scale".into(), num(r.scale));
    o.insert("sup_tension".into(), num(r.sup_tension));
    o.insert("inf_tension".into(), num(r.inf_tension));
    o.insert("sup_bitension".into(), num(r.sup_bitension));
    o.insert("max_normal".into(), num(r.max_normal));
    o.insert("max_residency".into(), num(r.max_residency));
    o.insert("verdict".into(), json!(r.verdict.as_str()));
    o.insert("expected".into(), json!(entry.expected.as_str()));
    o.insert("claimed".into(), json!(entry.claimed.as_str()));
    o.insert(
        "matches_expected".into(),
        json!(r.verdict == entry.expected),
    );
    o.insert("locus".into(), json!(entry.locus));
    o.insert("warnings".into(), json!(r.warnings));
    if let Some(points) = &r.points {
        let pts: Vec<Value> = points
            .iter()
            .map(|p| {
                json!({
                    "x": nums(&p.x),
                    "tension": num(p.tension),
                    "bitension": num(p.bitension),
                    "energy": num(p.energy),
                })
            })
            .collect();
        o.insert("points".into(), Value::Array(pts));
    }
    if let Some(t) = wall_time {
        o.insert("wall_time_s".into(), num(t));
    }
    Value::Object(o)
}

/// Error placeholder so a failing entry still shows up in `--all` output.
pub fn map_error(entry: &CatalogEntry, err: &str) -> Value {
    json!({
        "kind": "map",
        "name": entry.name,
        "expected": entry.expected.as_str(),
        "claimed": entry.claimed.as_str(),
        "error": err,
    })
}

pub fn search_report(r: &SearchReport) -> Value {
    let c = &r.config;
    let names = bht_core::expr::numbered_names("x", c.dim);
    json!({
        "kind": "search",
        "config": {
            "dim": c.dim,
            "degree": c.degree,
            "grid": c.grid,
            "domain": c.domain.iter().map(|&(a, b)| nums(&[a, b])).collect::<Vec<_>>(),
            "iterations": c.iterations,
            "restarts": c.restarts,
            "lambda": num(c.lambda),
            "eps": num(c.eps),
            "seed": c.seed,
            "init": format!("{:?}", c.init).to_lowercase(),
        },
        "monomials": r.monomials,
        "best_coefficients": nums(&r.best_coefficients),
        "polynomial": r.polynomial().to_source(&names),
        "best_residual": num(r.best_residual),
        "best_objective": num(r.best_objective),
        "mean_delta_f_sq": num(r.mean_delta_f_sq),
        "evaluations": r.evaluations,
        "budget_exhausted": r.budget_exhausted,
        "trace": nums(&r.trace),
    })
}
