//! Case manifests: JSON files describing an ansatz, image tables, transcribed
//! equations and residual checks. All embedded gwi text is parsed, validated
//! against the case grading and canonicalised at load time.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::RowVector;
use crate::relations::{load_relation_file, Relation};
use crate::term::{Grading, GwiExpr, GwiMonomial, Label, Q};
use crate::text::{parse_expr, parse_monomial, parse_rational};

/// A linear form over the unknowns.
pub type Row = RowVector<String>;

#[derive(Clone, Debug)]
pub struct NamedRow {
    pub name: String,
    pub row: Row,
}

#[derive(Clone, Debug)]
pub struct Residual {
    pub name: String,
    pub graph: GwiMonomial,
    pub combo: Row,
}

/// How image data at one level is turned into rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeriveMode {
    /// Reduce modulo WDVV and emit every surviving coordinate.
    Full,
    /// Read off only the coordinates of the residual graphs at this level.
    Tracked,
}

#[derive(Clone, Debug)]
pub struct CaseManifest {
    pub case: String,
    pub source: PathBuf,
    pub g: u32,
    pub n: u32,
    pub k: u32,
    pub unknowns: Vec<String>,
    pub ansatz: BTreeMap<String, GwiMonomial>,
    pub symmetrize_external: Vec<Label>,
    pub images: BTreeMap<u32, BTreeMap<String, GwiExpr>>,
    pub derive: BTreeMap<u32, DeriveMode>,
    /// Whether the stacked derived systems alone should pin down the solution.
    pub derive_solves: bool,
    pub equations: Vec<NamedRow>,
    pub residuals: BTreeMap<u32, Vec<Residual>>,
    pub relations: Vec<Relation>,
    pub expected_solution: Option<Row>,
    pub expected_nullity: usize,
    pub warnings: Vec<String>,
}

impl CaseManifest {
    /// The grading every image entry at level `l` must have.
    pub fn image_grading(&self, l: u32) -> (i64, usize, usize) {
        (i64::from(self.g) - 1, self.n as usize + 2, (self.k + l - 1) as usize)
    }

    pub fn has_checks(&self) -> bool {
        !self.equations.is_empty() || !self.images.is_empty() || !self.residuals.is_empty()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    case: String,
    #[serde(default)]
    corpus_version: Option<String>,
    g: u32,
    n: u32,
    k: u32,
    unknowns: Vec<String>,
    ansatz: BTreeMap<String, String>,
    #[serde(default)]
    symmetrize_external: Vec<String>,
    #[serde(default)]
    images: BTreeMap<String, Value>,
    #[serde(default)]
    derive: BTreeMap<String, DeriveMode>,
    #[serde(default)]
    derive_solves: bool,
    #[serde(default)]
    equations: Vec<RawRow>,
    #[serde(default)]
    equation_count: Option<usize>,
    #[serde(default)]
    residuals: BTreeMap<String, Vec<RawResidual>>,
    #[serde(default)]
    relations: Vec<String>,
    expected_solution: Option<Value>,
    expected_nullity: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRow {
    name: String,
    row: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawResidual {
    #[serde(default)]
    name: Option<String>,
    graph: String,
    combo: Value,
}

/// Parse `1/576 c1 + 1/24 c3 - c6` style linear forms. Repeated unknowns
/// are summed.
pub fn parse_linear_form(text: &str) -> Result<Row> {
    let mut row = Row::new();
    let src = text.trim();
    let bytes = src.as_bytes();
    let mut pos = 0;
    let syntax = |pos: usize, expected: &str| Error::Syntax {
        position: pos,
        expected: expected.into(),
        found: src
            .get(pos..)
            .and_then(|s| s.chars().next())
            .map_or("end of input".into(), |c| format!("{c:?}")),
    };
    let skip = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let mut first = true;
    loop {
        skip(&mut pos);
        if pos == bytes.len() {
            if first {
                return Err(syntax(pos, "term"));
            }
            break;
        }
        let mut sign = Q::from_integer(1.into());
        match bytes[pos] {
            b'-' => {
                sign = -sign;
                pos += 1;
            }
            b'+' => pos += 1,
            _ if first => {}
            _ => return Err(syntax(pos, "'+' or '-'")),
        }
        skip(&mut pos);
        let start = pos;
        while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'/') {
            pos += 1;
        }
        let coeff = if pos > start {
            parse_rational(&src[start..pos]).map_err(|_| syntax(start, "rational"))?
        } else {
            Q::from_integer(1.into())
        };
        skip(&mut pos);
        let nstart = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_alphanumeric() {
            pos += 1;
        }
        if pos == nstart || !bytes[nstart].is_ascii_alphabetic() {
            return Err(syntax(nstart, "unknown name"));
        }
        row.add(src[nstart..pos].to_string(), &(coeff * sign));
        first = false;
    }
    Ok(row)
}

fn parse_row(v: &Value) -> Result<Row> {
    match v {
        Value::String(s) => parse_linear_form(s),
        Value::Object(map) => {
            let mut row = Row::new();
            for (k, x) in map {
                let text = match x {
                    Value::String(s) => s.clone(),
                    Value::Number(n) if n.is_i64() => n.to_string(),
                    other => {
                        return Err(Error::Schema(format!(
                            "coefficient of {k} must be a rational string, got {other}"
                        )))
                    }
                };
                row.add(k.clone(), &parse_rational(&text)?);
            }
            Ok(row)
        }
        other => Err(Error::Schema(format!(
            "expected a row (object or linear form), got {other}"
        ))),
    }
}

/// 1-based line of the first occurrence of `needle` in `text`, or 1.
fn line_of(text: &str, needle: &str) -> usize {
    text.find(needle)
        .map_or(1, |at| text[..at].bytes().filter(|&b| b == b'\n').count() + 1)
}

struct Ctx<'a> {
    file: String,
    text: &'a str,
}

impl Ctx<'_> {
    fn locate<T>(&self, needle: &str, context: impl Into<String>, r: Result<T>) -> Result<T> {
        r.map_err(|e| Error::Located {
            file: self.file.clone(),
            line: line_of(self.text, needle),
            context: context.into(),
            source: Box::new(e),
        })
    }
}

fn check_unknowns(row: &Row, known: &BTreeSet<&str>, what: &str) -> Result<()> {
    for k in row.keys() {
        if !known.contains(k.as_str()) {
            return Err(Error::Schema(format!("{what} refers to unknown {k:?}")));
        }
    }
    Ok(())
}

fn check_grading(m: &GwiMonomial, want: (i64, usize, usize), max_components: usize) -> Result<Grading> {
    let gr = m.grading();
    if (gr.genus_total, gr.n_external, gr.codim) != want || gr.components > max_components {
        return Err(Error::Grading(format!(
            "{m} has {gr}, expected genus {} n {} codim {} with at most {max_components} components",
            want.0, want.1, want.2
        )));
    }
    Ok(gr)
}

pub fn load_manifest(path: &Path) -> Result<CaseManifest> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&text, path)
}

/// Parse manifest text; `path` resolves relative image and relation files.
pub fn parse_manifest(text: &str, path: &Path) -> Result<CaseManifest> {
    let ctx = Ctx {
        file: path.display().to_string(),
        text,
    };
    let raw: RawManifest = serde_json::from_str(text).map_err(|e| Error::Located {
        file: ctx.file.clone(),
        line: e.line(),
        context: "manifest".into(),
        source: Box::new(Error::Schema(e.to_string())),
    })?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut warnings = Vec::new();
    let _ = raw.corpus_version;

    if raw.unknowns.is_empty() {
        return Err(Error::Schema("no unknowns".into()));
    }
    let known: BTreeSet<&str> = raw.unknowns.iter().map(String::as_str).collect();
    if known.len() != raw.unknowns.len() {
        return Err(Error::Schema("duplicate unknown names".into()));
    }

    let mut ansatz = BTreeMap::new();
    for u in &raw.unknowns {
        let src = raw
            .ansatz
            .get(u)
            .ok_or_else(|| Error::Schema(format!("ansatz has no entry for {u}")))?;
        let m = ctx.locate(src, format!("ansatz {u}"), parse_monomial(src))?;
        let want = (i64::from(raw.g), raw.n as usize, raw.k as usize);
        ctx.locate(src, format!("ansatz {u}"), check_grading(&m, want, 1))?;
        if m.brackets().iter().any(|b| b.genus() > 2) {
            warnings.push(format!("ansatz {u} has a vertex of genus above 2"));
        }
        ansatz.insert(u.clone(), m);
    }
    for u in raw.ansatz.keys() {
        if !known.contains(u.as_str()) {
            return Err(Error::Schema(format!("ansatz entry {u:?} is not an unknown")));
        }
    }

    let symmetrize_external = raw
        .symmetrize_external
        .iter()
        .map(|s| Label::new(s))
        .collect::<Result<Vec<_>>>()?;

    let parse_level = |s: &str| -> Result<u32> {
        s.parse::<u32>()
            .ok()
            .filter(|&l| l >= 1)
            .ok_or_else(|| Error::Schema(format!("level {s:?} is not a positive integer")))
    };

    let mut images = BTreeMap::new();
    for (ls, v) in &raw.images {
        let l = parse_level(ls)?;
        let (table, ictx_text, ictx_file);
        match v {
            Value::String(rel) => {
                let p = dir.join(rel);
                let t = std::fs::read_to_string(&p).map_err(|source| Error::Io {
                    path: p.clone(),
                    source,
                })?;
                let parsed: BTreeMap<String, String> = serde_json::from_str(&t).map_err(|e| Error::Located {
                    file: p.display().to_string(),
                    line: e.line(),
                    context: format!("image table l={l}"),
                    source: Box::new(Error::Schema(e.to_string())),
                })?;
                table = parsed;
                ictx_text = t;
                ictx_file = p.display().to_string();
            }
            Value::Object(_) => {
                table =
                    serde_json::from_value(v.clone()).map_err(|e| Error::Schema(format!("image table l={l}: {e}")))?;
                ictx_text = text.to_string();
                ictx_file = ctx.file.clone();
            }
            other => {
                return Err(Error::Schema(format!(
                    "image table l={l} must be an object or a path, got {other}"
                )))
            }
        }
        let ictx = Ctx {
            file: ictx_file,
            text: &ictx_text,
        };
        let want = {
            let g = i64::from(raw.g) - 1;
            (g, raw.n as usize + 2, (raw.k + l - 1) as usize)
        };
        let mut level = BTreeMap::new();
        for (u, src) in &table {
            if !known.contains(u.as_str()) {
                return Err(Error::Schema(format!("image table l={l} refers to unknown {u:?}")));
            }
            let e = ictx.locate(src, format!("image l={l} {u}"), parse_expr(src))?;
            for m in e.monomials() {
                ictx.locate(src, format!("image l={l} {u}"), check_grading(m, want, 2))?;
            }
            level.insert(u.clone(), e);
        }
        images.insert(l, level);
    }

    let mut derive = BTreeMap::new();
    for (ls, mode) in &raw.derive {
        let l = parse_level(ls)?;
        if !images.contains_key(&l) {
            return Err(Error::Schema(format!(
                "derive mode given for l={l} without an image table"
            )));
        }
        derive.insert(l, *mode);
    }
    for &l in images.keys() {
        derive.entry(l).or_insert(DeriveMode::Full);
    }

    let mut equations = Vec::new();
    let mut names = BTreeSet::new();
    for r in &raw.equations {
        let row = ctx.locate(
            &format!("\"{}\"", r.name),
            format!("equation {}", r.name),
            parse_row(&r.row),
        )?;
        check_unknowns(&row, &known, &format!("equation {}", r.name))?;
        if !names.insert(r.name.clone()) {
            return Err(Error::Schema(format!("duplicate equation name {}", r.name)));
        }
        equations.push(NamedRow {
            name: r.name.clone(),
            row,
        });
    }
    if let Some(count) = raw.equation_count {
        if count != equations.len() {
            return Err(Error::Schema(format!(
                "equation_count is {count} but {} equations are listed",
                equations.len()
            )));
        }
    }

    let mut residuals = BTreeMap::new();
    for (ls, list) in &raw.residuals {
        let l = parse_level(ls)?;
        let want = (i64::from(raw.g) - 1, raw.n as usize + 2, (raw.k + l - 1) as usize);
        let mut out = Vec::new();
        for (idx, r) in list.iter().enumerate() {
            let name = r.name.clone().unwrap_or_else(|| format!("r{l}-{:02}", idx + 1));
            let graph = ctx.locate(&r.graph, format!("residual {name}"), parse_monomial(&r.graph))?;
            ctx.locate(&r.graph, format!("residual {name}"), check_grading(&graph, want, 2))?;
            let combo = ctx.locate(&r.graph, format!("residual {name}"), parse_row(&r.combo))?;
            check_unknowns(&combo, &known, &format!("residual {name}"))?;
            out.push(Residual { name, graph, combo });
        }
        residuals.insert(l, out);
    }

    let mut relations = Vec::new();
    for rel in &raw.relations {
        relations.extend(load_relation_file(&dir.join(rel))?);
    }

    let expected_solution = match &raw.expected_solution {
        None | Some(Value::Null) => None,
        Some(v) => {
            let row = parse_row(v)?;
            check_unknowns(&row, &known, "expected_solution")?;
            Some(row)
        }
    };

    let case = CaseManifest {
        case: raw.case,
        source: path.to_path_buf(),
        g: raw.g,
        n: raw.n,
        k: raw.k,
        unknowns: raw.unknowns,
        ansatz,
        symmetrize_external,
        images,
        derive,
        derive_solves: raw.derive_solves,
        equations,
        residuals,
        relations,
        expected_solution,
        expected_nullity: raw.expected_nullity,
        warnings,
    };
    if !case.has_checks() {
        return Err(Error::Schema(format!("case {} has nothing to check", case.case)));
    }
    Ok(case)
}
