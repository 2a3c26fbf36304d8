//! Verification reports and their text and JSON renderings.

use std::fmt::Write as _;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    pub fn new(name: String, pass: bool, detail: String) -> Check {
        Check {
            name,
            status: if pass { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub case: String,
    pub mode: String,
    pub checks: Vec<Check>,
    /// Unknown name to exact rational, in manifest order.
    pub solution: Option<Solution>,
    pub nullity: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Ordered pairs that serialise as a JSON object, keeping the order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution(pub Vec<(String, String)>);

impl Serialize for Solution {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Render one report. JSON is pretty-printed with a trailing newline;
/// key order is fixed by the struct layout and the manifest order of unknowns.
pub fn write_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serialises");
            s.push('\n');
            s
        }
        Format::Text => render_text(report),
    }
}

/// Several reports, ordered by case id.
pub fn write_reports(reports: &[Report], format: Format) -> String {
    let mut sorted: Vec<&Report> = reports.iter().collect();
    sorted.sort_by(|a, b| a.case.cmp(&b.case));
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&sorted).expect("reports serialise");
            s.push('\n');
            s
        }
        Format::Text => sorted.iter().map(|r| render_text(r)).collect::<Vec<_>>().join("\n"),
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "case {} [{}]: {verdict}", r.case, r.mode);
    for c in &r.checks {
        let tag = if c.passed() { "pass" } else { "FAIL" };
        let _ = writeln!(out, "  {tag}  {}: {}", c.name, c.detail);
    }
    for w in &r.warnings {
        let _ = writeln!(out, "  warning: {w}");
    }
    let _ = writeln!(out, "  nullity: {}", r.nullity);
    match &r.solution {
        Some(sol) => {
            let parts: Vec<String> = sol.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "  solution: {}", parts.join(" "));
        }
        None => {
            let _ = writeln!(out, "  solution: none");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            case: "t".into(),
            mode: "solve".into(),
            checks: vec![Check::new("a".into(), true, "ok".into())],
            solution: Some(Solution(vec![("c1".to_string(), "1".to_string())])),
            nullity: 1,
            warnings: vec![],
        }
    }

    #[test]
    fn json_shape() {
        let v: serde_json::Value = serde_json::from_str(&write_report(&sample(), Format::Json)).unwrap();
        assert_eq!(v["checks"][0]["status"], "pass");
        assert_eq!(v["solution"]["c1"], "1");
        assert_eq!(v["nullity"], 1);
        assert!(v.get("warnings").is_none());
    }

    #[test]
    fn text_marks_failures() {
        let mut r = sample();
        r.checks.push(Check::new("b".into(), false, "off".into()));
        assert!(!r.passed());
        assert!(write_report(&r, Format::Text).contains("FAIL  b: off"));
    }
}
