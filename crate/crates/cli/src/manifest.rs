//! Line-oriented manifest files.
//!
//! ```text
//! # comment
//! [map torus_S2]
//! domain = Euclidean(2)
//! target = Sphere(3, 1.0)
//! vars = t, s
//! component = cos(t + s)/sqrt(2)
//! component = sin(t + s)/sqrt(2)
//! component = 1/sqrt(2)
//! box = 0.0, 6.283185307179586; 0.0, 6.283185307179586
//! expected = proper_biharmonic
//!
//! [graph scherk]
//! f = ln(cos(x2)/cos(x1))
//! box = -0.7, 0.7; -0.7, 0.7
//! ```
//!
//! Manifolds are `Euclidean(n)`, `Sphere(ambient, radius)`,
//! `Chart(u1, u2 | g11, g12; g21, g22)` (optionally followed by
//! `| lo, hi; lo, hi` chart bounds) and `Product(A, B, ...)`. Sphere
//! coordinates take `*` in a box. Shells read `shell = 0 1 2 3 : 0.5, 2.0`.
//! Numbers are written in shortest round-trip form, so printing and
//! re-reading is lossless.

use std::collections::HashSet;
use std::fmt::Write as _;

use bht_core::catalog::{all_entries, CatalogEntry};
use bht_core::expr::{numbered_names, parse_expr};
use bht_core::fields::{SmoothMap, Verdict};
use bht_core::geometry::{ChartSpec, ManifoldSpec};
use bht_core::graph::GraphFunction;
use bht_core::sampling::{Region, Shell};
use bht_core::Expr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("section `{name}` (line {line}): {source}")]
    Invalid {
        name: String,
        line: usize,
        source: bht_core::Error,
    },
    #[error("duplicate name `{0}`")]
    Duplicate(String),
}

#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub maps: Vec<CatalogEntry>,
    pub graphs: Vec<GraphFunction>,
}

impl Manifest {
    /// Every registered catalog entry.
    pub fn from_catalog() -> bht_core::Result<Manifest> {
        Ok(Manifest {
            maps: all_entries()?,
            graphs: Vec::new(),
        })
    }

    pub fn map(&self, name: &str) -> Option<&CatalogEntry> {
        self.maps.iter().find(|e| e.name == name)
    }

    pub fn graph(&self, name: &str) -> Option<&GraphFunction> {
        self.graphs.iter().find(|g| g.name == name)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.maps {
            write_map(&mut out, e);
        }
        for g in &self.graphs {
            write_graph(&mut out, g);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Manifest, ManifestError> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            if let Some(head) = l.strip_prefix('[') {
                let head = head
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(line, "unterminated section header"))?;
                let (kind, name) = head
                    .trim()
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| syntax(line, "section header needs a kind and a name"))?;
                let kind = match kind {
                    "map" => Kind::Map,
                    "graph" => Kind::Graph,
                    other => return Err(syntax(line, &format!("unknown section kind `{other}`"))),
                };
                sections.push(Section {
                    kind,
                    name: name.trim().to_string(),
                    line,
                    fields: Vec::new(),
                });
                continue;
            }
            let (key, value) = l
                .split_once('=')
                .ok_or_else(|| syntax(line, "expected `key = value`"))?;
            let sec = sections
                .last_mut()
                .ok_or_else(|| syntax(line, "field outside of a section"))?;
            sec.fields
                .push((key.trim().to_string(), value.trim().to_string(), line));
        }

        let mut seen = HashSet::new();
        let mut m = Manifest::default();
        for s in sections {
            if !seen.insert(s.name.clone()) {
                return Err(ManifestError::Duplicate(s.name));
            }
            match s.kind {
                Kind::Map => m.maps.push(s.to_map()?),
                Kind::Graph => m.graphs.push(s.to_graph()?),
            }
        }
        Ok(m)
    }
}

fn syntax(line: usize, msg: &str) -> ManifestError {
    ManifestError::Syntax {
        line,
        msg: msg.to_string(),
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Map,
    Graph,
}

struct Section {
    kind: Kind,
    name: String,
    line: usize,
    fields: Vec<(String, String, usize)>,
}

impl Section {
    fn one(&self, key: &str) -> Result<Option<(&str, usize)>, ManifestError> {
        let mut hits = self.fields.iter().filter(|(k, _, _)| k == key);
        let first = hits.next().map(|(_, v, l)| (v.as_str(), *l));
        if let Some((_, _, l)) = hits.next() {
            return Err(syntax(*l, &format!("field `{key}` given twice")));
        }
        Ok(first)
    }

    fn required(&self, key: &str) -> Result<(&str, usize), ManifestError> {
        self.one(key)?
            .ok_or_else(|| syntax(self.line, &format!("section `{}` lacks `{key}`", self.name)))
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = (&'a str, usize)> + 'a {
        self.fields
            .iter()
            .filter(move |(k, _, _)| k == key)
            .map(|(_, v, l)| (v.as_str(), *l))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), ManifestError> {
        for (k, _, l) in &self.fields {
            if !allowed.contains(&k.as_str()) {
                return Err(syntax(*l, &format!("unknown field `{k}`")));
            }
        }
        Ok(())
    }

    fn invalid(&self, source: bht_core::Error) -> ManifestError {
        ManifestError::Invalid {
            name: self.name.clone(),
            line: self.line,
            source,
        }
    }

    fn to_map(&self) -> Result<CatalogEntry, ManifestError> {
        self.check_keys(&[
            "domain",
            "target",
            "vars",
            "component",
            "box",
            "shell",
            "expected",
            "claimed",
            "locus",
            "note",
        ])?;
        let (d, dl) = self.required("domain")?;
        let domain = parse_manifold(d).map_err(|m| syntax(dl, &m))?;
        let (t, tl) = self.required("target")?;
        let target = parse_manifold(t).map_err(|m| syntax(tl, &m))?;
        let (v, _) = self.required("vars")?;
        let vars: Vec<String> = split_top(v, ',').into_iter().map(str::to_string).collect();
        let components = self
            .all("component")
            .map(|(src, l)| parse_expr(src, &vars).map_err(|e| syntax(l, &e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let (b, bl) = self.required("box")?;
        let mut region = Region {
            bounds: parse_box(b, true).map_err(|m| syntax(bl, &m))?,
            shells: Vec::new(),
        };
        for (s, l) in self.all("shell") {
            region
                .shells
                .push(parse_shell(s).map_err(|m| syntax(l, &m))?);
        }
        let verdict = |key: &str| -> Result<Option<Verdict>, ManifestError> {
            self.one(key)?
                .map(|(s, l)| {
                    s.parse::<Verdict>()
                        .map_err(|_| syntax(l, &format!("unknown verdict `{s}`")))
                })
                .transpose()
        };
        let expected = verdict("expected")?.ok_or_else(|| {
            syntax(
                self.line,
                &format!("section `{}` lacks `expected`", self.name),
            )
        })?;
        let claimed = verdict("claimed")?.unwrap_or(expected);
        let map = SmoothMap::new(self.name.clone(), domain, target, vars, components, region)
            .map_err(|e| self.invalid(e))?
            .with_note(self.one("note")?.map_or("", |(s, _)| s));
        Ok(CatalogEntry {
            name: self.name.clone(),
            map,
            expected,
            claimed,
            locus: self
                .one("locus")?
                .map_or(String::new(), |(s, _)| s.to_string()),
        })
    }

    fn to_graph(&self) -> Result<GraphFunction, ManifestError> {
        self.check_keys(&["f", "vars", "box", "radius"])?;
        let (b, bl) = self.required("box")?;
        let domain: Vec<(f64, f64)> = parse_box(b, false)
            .map_err(|m| syntax(bl, &m))?
            .into_iter()
            .map(|x| x.expect("no sphere coordinates in a graph box"))
            .collect();
        let vars = match self.one("vars")? {
            Some((v, _)) => split_top(v, ',').into_iter().map(str::to_string).collect(),
            None => numbered_names("x", domain.len()),
        };
        let (src, fl) = self.required("f")?;
        let f = parse_expr(src, &vars).map_err(|e| syntax(fl, &e.to_string()))?;
        let mut g =
            GraphFunction::new(self.name.clone(), f, vars, domain).map_err(|e| self.invalid(e))?;
        if let Some((r, l)) = self.one("radius")? {
            g = g.with_radius(parse_f64(r).map_err(|m| syntax(l, &m))?);
        }
        Ok(g)
    }
}

/// Splits at `sep` outside of parentheses; pieces are trimmed.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("invalid number `{}`", s.trim()))
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| format!("invalid integer `{}`", s.trim()))
}

pub fn parse_manifold(s: &str) -> Result<ManifoldSpec, String> {
    let s = s.trim();
    let (head, rest) = s
        .split_once('(')
        .ok_or_else(|| format!("expected `Kind(...)`, got `{s}`"))?;
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| format!("unbalanced parentheses in `{s}`"))?;
    match head.trim() {
        "Euclidean" => Ok(ManifoldSpec::Euclidean(parse_usize(inner)?)),
        "Sphere" => match split_top(inner, ',')[..] {
            [n, r] => Ok(ManifoldSpec::sphere(parse_usize(n)?, parse_f64(r)?)),
            _ => Err("Sphere takes (ambient dimension, radius)".into()),
        },
        "Product" => {
            let parts = split_top(inner, ',')
                .into_iter()
                .map(parse_manifold)
                .collect::<Result<Vec<_>, _>>()?;
            if parts.len() < 2 {
                return Err("Product needs at least two factors".into());
            }
            Ok(ManifoldSpec::Product(parts))
        }
        "Chart" => {
            let parts = split_top(inner, '|');
            if !(2..=3).contains(&parts.len()) {
                return Err("Chart takes (names | metric rows [| bounds])".into());
            }
            let names: Vec<String> = split_top(parts[0], ',')
                .into_iter()
                .map(str::to_string)
                .collect();
            let metric = split_top(parts[1], ';')
                .into_iter()
                .map(|row| {
                    split_top(row, ',')
                        .into_iter()
                        .map(|e| parse_expr(e, &names).map_err(|e| e.to_string()))
                        .collect::<Result<Vec<Expr>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            if metric.len() != names.len() || metric.iter().any(|r| r.len() != names.len()) {
                return Err(format!("Chart metric must be {0}×{0}", names.len()));
            }
            let mut chart = ChartSpec::new(metric);
            if let Some(b) = parts.get(2) {
                let bounds = parse_box(b, false)?;
                if bounds.len() != names.len() {
                    return Err("one bound pair per chart coordinate".into());
                }
                chart.bounds = bounds
                    .into_iter()
                    .map(|x| x.expect("no `*` allowed"))
                    .collect();
            }
            Ok(ManifoldSpec::Chart(chart))
        }
        other => Err(format!("unknown manifold kind `{other}`")),
    }
}

fn parse_box(s: &str, allow_star: bool) -> Result<Vec<Option<(f64, f64)>>, String> {
    split_top(s, ';')
        .into_iter()
        .map(|iv| {
            if iv == "*" {
                return if allow_star {
                    Ok(None)
                } else {
                    Err("`*` only marks sphere coordinates of a map domain".into())
                };
            }
            match split_top(iv, ',')[..] {
                [a, b] => Ok(Some((parse_f64(a)?, parse_f64(b)?))),
                _ => Err(format!("interval `{iv}` should read `lo, hi`")),
            }
        })
        .collect()
}

fn parse_shell(s: &str) -> Result<Shell, String> {
    let (vars, radii) = s.split_once(':').ok_or("shell reads `i j k : min, max`")?;
    let vars = vars
        .split_whitespace()
        .map(parse_usize)
        .collect::<Result<Vec<_>, _>>()?;
    match split_top(radii, ',')[..] {
        [a, b] => Ok(Shell {
            vars,
            min: parse_f64(a)?,
            max: parse_f64(b)?,
        }),
        _ => Err("shell radii read `min, max`".into()),
    }
}

/// Shortest text that reads back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn manifold_to_text(m: &ManifoldSpec) -> String {
    match m {
        ManifoldSpec::Euclidean(n) => format!("Euclidean({n})"),
        ManifoldSpec::Sphere {
            ambient_dim,
            radius,
        } => format!("Sphere({ambient_dim}, {})", num(*radius)),
        ManifoldSpec::Product(fs) => {
            format!(
                "Product({})",
                fs.iter()
                    .map(manifold_to_text)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
        ManifoldSpec::Chart(c) => {
            let names = numbered_names("u", c.dim());
            let rows: Vec<String> = c
                .metric
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|e| e.to_source(&names))
                        .collect::<Vec<_>>()
                        .join(", ")
                })
                .collect();
            let mut s = format!("Chart({} | {}", names.join(", "), rows.join("; "));
            if c.bounds.iter().any(|(a, b)| a.is_finite() || b.is_finite()) {
                let b: Vec<String> = c
                    .bounds
                    .iter()
                    .map(|(a, b)| format!("{}, {}", num(*a), num(*b)))
                    .collect();
                write!(s, " | {}", b.join("; ")).expect("string write");
            }
            s.push(')');
            s
        }
    }
}

fn box_to_text(bounds: &[Option<(f64, f64)>]) -> String {
    bounds
        .iter()
        .map(|b| match b {
            Some((a, b)) => format!("{}, {}", num(*a), num(*b)),
            None => "*".into(),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn write_map(out: &mut String, e: &CatalogEntry) {
    let m = &e.map;
    let _ = writeln!(out, "[map {}]", e.name);
    let _ = writeln!(out, "domain = {}", manifold_to_text(&m.domain));
    let _ = writeln!(out, "target = {}", manifold_to_text(&m.target));
    let _ = writeln!(out, "vars = {}", m.vars.join(", "));
    for c in &m.components {
        let _ = writeln!(out, "component = {}", c.to_source(&m.vars));
    }
    let _ = writeln!(out, "box = {}", box_to_text(&m.region.bounds));
    for s in &m.region.shells {
        let vars: Vec<String> = s.vars.iter().map(ToString::to_string).collect();
        let _ = writeln!(
            out,
            "shell = {} : {}, {}",
            vars.join(" "),
            num(s.min),
            num(s.max)
        );
    }
    let _ = writeln!(out, "expected = {}", e.expected);
    if e.claimed != e.expected {
        let _ = writeln!(out, "claimed = {}", e.claimed);
    }
    if !e.locus.is_empty() {
        let _ = writeln!(out, "locus = {}", single_line(&e.locus));
    }
    if !m.note.is_empty() {
        let _ = writeln!(out, "note = {}", single_line(&m.note));
    }
    out.push('\n');
}

fn write_graph(out: &mut String, g: &GraphFunction) {
    let _ = writeln!(out, "[graph {}]", g.name);
    let _ = writeln!(out, "vars = {}", g.vars.join(", "));
    let _ = writeln!(out, "f = {}", g.f.to_source(&g.vars));
    let bounds: Vec<Option<(f64, f64)>> = g.domain.iter().map(|&b| Some(b)).collect();
    let _ = writeln!(out, "box = {}", box_to_text(&bounds));
    if let Some(r) = g.radius {
        let _ = writeln!(out, "radius = {}", num(r));
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifolds_round_trip() {
        for s in [
            "Euclidean(3)",
            "Sphere(4, 0.7071067811865476)",
            "Product(Sphere(3, 1.0), Euclidean(1))",
            "Chart(u1, u2 | exp(u2), 0; 0, exp(u2))",
            "Chart(u1 | 1 + u1^2 | -2.0, 2.0)",
        ] {
            let m = parse_manifold(s).unwrap();
            assert_eq!(parse_manifold(&manifold_to_text(&m)).unwrap(), m, "{s}");
        }
        assert!(parse_manifold("Torus(2)").is_err());
        assert!(parse_manifold("Chart(u1, u2 | 1, 0)").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "[map a]\ndomain = Euclidean(1)\ntarget = Euclidean(1)\nvars = t\ncomponent = abs(t)\nbox = 0, 1\nexpected = harmonic\n";
        match Manifest::parse(text) {
            Err(ManifestError::Syntax { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let dup = "[graph g]\nf = x1\nbox = 0, 1\n[graph g]\nf = x1\nbox = 0, 1\n";
        assert!(matches!(
            Manifest::parse(dup),
            Err(ManifestError::Duplicate(_))
        ));
        assert!(Manifest::parse("vars = t\n").is_err());
        let bad_dim = "[map a]\ndomain = Euclidean(2)\ntarget = Euclidean(1)\nvars = t\ncomponent = t\nbox = 0, 1\nexpected = harmonic\n";
        assert!(matches!(
            Manifest::parse(bad_dim),
            Err(ManifestError::Invalid { .. })
        ));
    }

    #[test]
    fn graph_sections() {
        let text =
            "[graph hemi]\nf = sqrt(1 - x1^2 - x2^2)\nbox = -0.6, 0.6; -0.6, 0.6\nradius = 0.6\n";
        let m = Manifest::parse(text).unwrap();
        let g = m.graph("hemi").unwrap();
        assert_eq!(g.radius, Some(0.6));
        let again = Manifest::parse(&m.to_text()).unwrap();
        assert_eq!(again.graphs, m.graphs);
    }
}
