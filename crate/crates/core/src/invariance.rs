//! Assembling invariance constraints on the unknown coefficients, solving
//! them, and checking transcribed residuals.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{in_span, nullspace, rank_of, LinearSystem, RowVector, SolutionSpace};
use crate::manifest::{CaseManifest, DeriveMode, Row};
use crate::par;
use crate::relations::{collapse, enumerate_wdvv, reduce_modulo, Relation, RelationSpan};
use crate::report::{Check, Report, Solution};
use crate::term::{label, symmetrize, Character, GwiExpr, GwiMonomial, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    Solve,
    Derive,
    Residuals,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Derive => "derive",
            Mode::Residuals => "residuals",
        }
    }

    /// `all` expands to every mode.
    pub fn parse_set(s: &str) -> Result<Vec<Mode>> {
        match s {
            "solve" => Ok(vec![Mode::Solve]),
            "derive" => Ok(vec![Mode::Derive]),
            "residuals" => Ok(vec![Mode::Residuals]),
            "all" => Ok(vec![Mode::Solve, Mode::Derive, Mode::Residuals]),
            other => Err(Error::Schema(format!("unknown mode {other:?}"))),
        }
    }
}

/// A derived system together with a human-readable name for each row.
#[derive(Clone, Debug)]
pub struct Derived {
    pub level: u32,
    pub mode: DeriveMode,
    pub system: LinearSystem<String>,
    pub row_names: Vec<String>,
}

pub fn assemble_from_equations(case: &CaseManifest) -> Result<LinearSystem<String>> {
    if case.equations.is_empty() {
        return Err(Error::Schema(format!(
            "case {} has no transcribed equations",
            case.case
        )));
    }
    let mut sys = LinearSystem::new(case.unknowns.clone());
    for eq in &case.equations {
        sys.push(eq.row.clone());
    }
    Ok(sys)
}

/// The projector applied to level-`l` images: the level character on the
/// two new points, then full symmetry on the configured external labels.
pub fn project(case: &CaseManifest, l: u32, e: &GwiExpr) -> Result<GwiExpr> {
    let e = symmetrize(e, &[label("i"), label("j")], Character::for_level(l))?;
    symmetrize(&e, &case.symmetrize_external, Character::Trivial)
}

/// Projected, point-collapsed images at level `l`, one per unknown that has
/// an entry.
pub fn projected_images(case: &CaseManifest, l: u32) -> Result<BTreeMap<String, GwiExpr>> {
    let table = case
        .images
        .get(&l)
        .ok_or_else(|| Error::Schema(format!("case {} has no image table at l={l}", case.case)))?;
    let entries: Vec<(&String, &GwiExpr)> = table.iter().collect();
    let done = par::map(&entries, |(u, e)| -> Result<(String, GwiExpr)> {
        Ok(((*u).clone(), collapse(&project(case, l, e)?)?))
    });
    done.into_iter().collect()
}

fn system_from_coordinates(
    case: &CaseManifest,
    coords: &BTreeMap<String, RowVector<GwiMonomial>>,
) -> (LinearSystem<String>, Vec<String>) {
    let mut by_monomial: BTreeMap<GwiMonomial, Row> = BTreeMap::new();
    for (u, v) in coords {
        for (m, c) in v.iter() {
            by_monomial.entry(m.clone()).or_default().add(u.clone(), c);
        }
    }
    let mut sys = LinearSystem::new(case.unknowns.clone());
    let mut names = Vec::new();
    for (m, row) in by_monomial {
        if !row.is_zero() {
            names.push(m.to_string());
            sys.push(row);
        }
    }
    (sys, names)
}

pub fn assemble_from_images(case: &CaseManifest, l: u32) -> Result<Derived> {
    let mode = case.derive.get(&l).copied().unwrap_or(DeriveMode::Full);
    let images = projected_images(case, l)?;
    match mode {
        DeriveMode::Full => {
            let universe: BTreeSet<GwiMonomial> = images.values().flat_map(|e| e.monomials().cloned()).collect();
            let universe: Vec<GwiMonomial> = universe.into_iter().collect();
            let mut relations = enumerate_wdvv(&universe)?;
            for r in &case.relations {
                relations.push(Relation {
                    expr: collapse(&r.expr)?,
                    provenance: r.provenance.clone(),
                });
            }
            let span = RelationSpan::new(&relations, &universe);
            let mut coords = BTreeMap::new();
            for (u, e) in &images {
                coords.insert(u.clone(), reduce_modulo(e, &span)?);
            }
            let (system, row_names) = system_from_coordinates(case, &coords);
            Ok(Derived {
                level: l,
                mode,
                system,
                row_names,
            })
        }
        DeriveMode::Tracked => {
            let tracked =
                case.residuals.get(&l).filter(|r| !r.is_empty()).ok_or_else(|| {
                    Error::Schema(format!("tracked derive at l={l} needs residual graphs at that level"))
                })?;
            let mut system = LinearSystem::new(case.unknowns.clone());
            let mut row_names = Vec::new();
            for r in tracked {
                let target = crate::relations::collapse_monomial(&r.graph)?;
                let mut row = Row::new();
                for (u, e) in &images {
                    row.add(u.clone(), &e.coefficient_of(&target));
                }
                row_names.push(r.name.clone());
                system.push(row);
            }
            Ok(Derived {
                level: l,
                mode,
                system,
                row_names,
            })
        }
    }
}

fn print_row(row: &Row) -> String {
    let e: Vec<String> = row.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("({})", e.join(", "))
}

/// Compare a kernel with the expected nullity and ray.
pub fn check_kernel(case: &CaseManifest, space: &SolutionSpace<String>) -> Result<()> {
    if space.nullity != case.expected_nullity {
        return Err(Error::NullityMismatch {
            expected: case.expected_nullity,
            found: space.nullity,
        });
    }
    if let Some(expected) = &case.expected_solution {
        if space.nullity != 1 {
            return Err(Error::SolutionMismatch(format!(
                "kernel has dimension {}, cannot be a single ray",
                space.nullity
            )));
        }
        let got = &space.basis[0];
        if got.ratio_to(expected).is_none() {
            return Err(Error::SolutionMismatch(first_difference(got, expected)));
        }
    }
    Ok(())
}

fn first_difference(got: &Row, expected: &Row) -> String {
    let Some((k0, e0)) = expected.iter().next() else {
        return "expected solution is zero".into();
    };
    let g0 = got.get(k0);
    if g0.is_zero() {
        return format!("{k0}: found 0, expected {e0}");
    }
    let scale = e0 / &g0;
    let keys: BTreeSet<&String> = got.keys().chain(expected.keys()).collect();
    for k in keys {
        let (g, e) = (got.get(k) * &scale, expected.get(k));
        if g != e {
            return format!("{k}: found {g}, expected {e} (normalised on {k0})");
        }
    }
    "rays differ".into()
}

/// The kernel ray rescaled to agree with the expected solution when there
/// is one, otherwise as produced (first nonzero entry 1).
fn display_ray(case: &CaseManifest, space: &SolutionSpace<String>) -> Option<Row> {
    if space.nullity != 1 {
        return None;
    }
    let ray = space.basis[0].clone();
    match &case.expected_solution {
        Some(exp) => match ray.ratio_to(exp) {
            Some(r) => Some(ray.scale(&(Q::one() / r))),
            None => Some(ray),
        },
        None => Some(ray),
    }
}

fn kernel_checks(case: &CaseManifest, prefix: &str, space: &SolutionSpace<String>) -> Vec<Check> {
    let mut checks = vec![];
    let nullity_ok = space.nullity == case.expected_nullity;
    checks.push(Check::new(
        format!("{prefix} nullity"),
        nullity_ok,
        if nullity_ok {
            format!("nullity {}", space.nullity)
        } else {
            Error::NullityMismatch {
                expected: case.expected_nullity,
                found: space.nullity,
            }
            .to_string()
        },
    ));
    if case.expected_solution.is_some() {
        let r = check_kernel(case, space);
        let detail = match &r {
            Ok(()) => "kernel is proportional to the expected solution".to_string(),
            Err(e) => e.to_string(),
        };
        checks.push(Check::new(format!("{prefix} solution"), r.is_ok(), detail));
    }
    checks
}

fn transcription_checks(case: &CaseManifest) -> Vec<Check> {
    let Some(sol) = &case.expected_solution else {
        return vec![];
    };
    case.equations
        .iter()
        .map(|eq| {
            let v = eq.row.dot(sol);
            Check::new(
                format!("transcription {}", eq.name),
                v.is_zero(),
                format!("row at expected solution = {v}"),
            )
        })
        .collect()
}

/// Solve from transcribed equations or from derived systems.
pub fn solve_case(case: &CaseManifest, mode: Mode) -> Result<(SolutionSpace<String>, Vec<Check>)> {
    match mode {
        Mode::Solve => {
            let sys = assemble_from_equations(case)?;
            let space = nullspace(&sys);
            let mut checks = kernel_checks(case, "solve", &space);
            checks.extend(transcription_checks(case));
            Ok((space, checks))
        }
        Mode::Derive => derive_case(case),
        Mode::Residuals => Err(Error::Schema("residuals is not a solving mode".into())),
    }
}

fn derive_case(case: &CaseManifest) -> Result<(SolutionSpace<String>, Vec<Check>)> {
    if case.images.is_empty() {
        return Err(Error::Schema(format!("case {} has no image tables", case.case)));
    }
    let levels: Vec<u32> = case.images.keys().copied().collect();
    let derived = par::map(&levels, |&l| assemble_from_images(case, l));
    let reference = reference_solution(case);
    let mut checks = Vec::new();
    let mut stacked = LinearSystem::new(case.unknowns.clone());
    for d in derived {
        let d = match d {
            Ok(d) => d,
            Err(e) => {
                checks.push(Check::new("derive".to_string(), false, e.to_string()));
                continue;
            }
        };
        let l = d.level;
        if d.mode == DeriveMode::Full {
            stacked.rows.extend(d.system.rows.iter().cloned());
        }
        match &reference {
            Some(sol) => {
                let bad: Vec<&String> = d
                    .system
                    .rows
                    .iter()
                    .zip(&d.row_names)
                    .filter(|(r, _)| !r.dot(sol).is_zero())
                    .map(|(_, n)| n)
                    .collect();
                checks.push(Check::new(
                    format!("derive l={l} rows vanish"),
                    bad.is_empty(),
                    if bad.is_empty() {
                        format!("{} rows vanish at the solution", d.system.rows.len())
                    } else {
                        format!(
                            "nonzero at the solution: {}",
                            bad.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; ")
                        )
                    },
                ));
            }
            None => checks.push(Check::new(
                format!("derive l={l} rows vanish"),
                false,
                "no reference solution".into(),
            )),
        }
        let transcribed = case.residuals.get(&l).cloned().unwrap_or_default();
        match d.mode {
            DeriveMode::Tracked => {
                for (row, r) in d.system.rows.iter().zip(&transcribed) {
                    let ok = row.ratio_to(&r.combo).is_some_and(|x| !x.is_zero());
                    checks.push(Check::new(
                        format!("derive l={l} {} matches transcription", r.name),
                        ok,
                        format!("derived {} vs transcribed {}", print_row(row), print_row(&r.combo)),
                    ));
                }
            }
            DeriveMode::Full if !transcribed.is_empty() => {
                let combos: Vec<Row> = transcribed.iter().map(|r| r.combo.clone()).collect();
                let a = rank_of(&d.system.rows);
                let b = rank_of(&combos);
                let both: Vec<Row> = d.system.rows.iter().chain(&combos).cloned().collect();
                let u = rank_of(&both);
                let ok = a == b && b == u;
                checks.push(Check::new(
                    format!("derive l={l} equivalent to transcription"),
                    ok,
                    format!("rank derived {a}, transcribed {b}, together {u}"),
                ));
            }
            DeriveMode::Full => {}
        }
    }
    let space = nullspace(&stacked);
    if case.derive_solves {
        checks.extend(kernel_checks(case, "derive", &space));
        if !case.equations.is_empty() {
            let solved = nullspace(&assemble_from_equations(case)?);
            let same = solved == space;
            checks.push(Check::new(
                "derive kernel equals solve kernel".to_string(),
                same,
                format!("nullity derive {}, solve {}", space.nullity, solved.nullity),
            ));
        }
    }
    Ok((space, checks))
}

/// The solution residuals are evaluated at: the expected one, or else the
/// kernel ray of the transcribed equations when it is unique.
pub fn reference_solution(case: &CaseManifest) -> Option<Row> {
    if let Some(s) = &case.expected_solution {
        return Some(s.clone());
    }
    let sys = assemble_from_equations(case).ok()?;
    let space = nullspace(&sys);
    (space.nullity == 1).then(|| space.basis[0].clone())
}

pub fn residual_check(case: &CaseManifest, l: u32, solution: &Row) -> Vec<Check> {
    case.residuals
        .get(&l)
        .map(|list| {
            list.iter()
                .map(|r| {
                    let v = r.combo.dot(solution);
                    Check::new(
                        format!("residual l={l} {}", r.name),
                        v.is_zero(),
                        format!("{} -> {v}", r.graph),
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}

/// Image-entry grading, re-checked so the report records it.
fn grading_check(case: &CaseManifest) -> Check {
    let mut count = 0usize;
    let mut bad = Vec::new();
    for (&l, table) in &case.images {
        let want = case.image_grading(l);
        for (u, e) in table {
            for m in e.monomials() {
                count += 1;
                let gr = m.grading();
                if (gr.genus_total, gr.n_external, gr.codim) != want || gr.components > 2 {
                    bad.push(format!("l={l} {u}: {m}"));
                }
            }
        }
    }
    Check::new(
        "grading".to_string(),
        bad.is_empty(),
        if bad.is_empty() {
            format!("{count} image monomials graded")
        } else {
            bad.join("; ")
        },
    )
}

pub fn verify_case(case: &CaseManifest, modes: &[Mode]) -> Report {
    let modes: BTreeSet<Mode> = modes.iter().copied().collect();
    let mode_name = if modes.len() == 3 {
        "all".to_string()
    } else {
        modes.iter().map(|m| m.name()).collect::<Vec<_>>().join("+")
    };
    let mut checks = vec![grading_check(case)];
    let mut solution: Option<Row> = None;
    let mut nullity = None;
    for &mode in &modes {
        if mode == Mode::Residuals {
            continue;
        }
        match solve_case(case, mode) {
            Ok((space, c)) => {
                checks.extend(c);
                if solution.is_none() && (mode == Mode::Solve || case.derive_solves) {
                    solution = display_ray(case, &space);
                    nullity = Some(space.nullity);
                }
            }
            Err(e) => checks.push(Check::new(mode.name().to_string(), false, e.to_string())),
        }
    }
    if modes.contains(&Mode::Residuals) {
        let reference = reference_solution(case);
        match &reference {
            Some(sol) => {
                for &l in case.residuals.keys() {
                    checks.extend(residual_check(case, l, sol));
                }
            }
            None => checks.push(Check::new(
                "residuals".to_string(),
                false,
                "no reference solution".into(),
            )),
        }
        if solution.is_none() {
            solution = reference;
            nullity = solution.as_ref().map(|_| 1);
        }
    }
    Report {
        case: case.case.clone(),
        mode: mode_name,
        checks,
        solution: solution.map(|r| {
            Solution(
                case.unknowns
                    .iter()
                    .map(|u| (u.clone(), r.get(u).to_string()))
                    .collect(),
            )
        }),
        nullity: nullity.unwrap_or(case.expected_nullity),
        warnings: case.warnings.clone(),
    }
}

/// Evaluate `row` at a solution.
pub fn evaluate(row: &Row, solution: &Row) -> Q {
    row.dot(solution)
}

/// Whether `v` lies in the row span of `rows`.
pub fn row_in_span(rows: &[Row], v: &Row) -> bool {
    in_span(rows, v).is_some()
}

/// Rows derived at a single level, each checked against the reference
/// solution.
pub fn derive_report(case: &CaseManifest, l: u32) -> Result<Report> {
    let d = assemble_from_images(case, l)?;
    let reference = reference_solution(case);
    let mut checks = Vec::new();
    for (row, name) in d.system.rows.iter().zip(&d.row_names) {
        let detail = print_row(row);
        match &reference {
            Some(sol) => {
                let v = row.dot(sol);
                checks.push(Check::new(name.clone(), v.is_zero(), format!("{detail} -> {v}")));
            }
            None => checks.push(Check::new(
                name.clone(),
                false,
                format!("{detail}, no reference solution"),
            )),
        }
    }
    let space = nullspace(&d.system);
    Ok(Report {
        case: case.case.clone(),
        mode: format!("derive l={l}"),
        checks,
        solution: display_ray(case, &space).map(|r| {
            Solution(
                case.unknowns
                    .iter()
                    .map(|u| (u.clone(), r.get(u).to_string()))
                    .collect(),
            )
        }),
        nullity: space.nullity,
        warnings: case.warnings.clone(),
    })
}
