mod common;

use common::{case, corpus};
use gwi_core::invariance::{
    assemble_from_equations, assemble_from_images, project, reference_solution, verify_case, Mode,
};
use gwi_core::linalg::{nullspace, rank_of};
use gwi_core::manifest::{parse_manifest, CaseManifest, DeriveMode};
use gwi_core::report::{write_report, Format};
use gwi_core::{label, swap_labels, transposition, Error, Q};
use num_traits::Zero;
use serde_json::Value;

fn edited(name: &str, edit: impl FnOnce(&mut Value)) -> gwi_core::Result<CaseManifest> {
    let path = corpus(&format!("{name}.json"));
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    edit(&mut v);
    parse_manifest(&serde_json::to_string_pretty(&v).unwrap(), &path)
}

fn all() -> [Mode; 3] {
    [Mode::Solve, Mode::Derive, Mode::Residuals]
}

#[test]
fn every_case_verifies() {
    for name in ["mg21", "getzler22", "bp23"] {
        let r = verify_case(&case(name), &all());
        let failures: Vec<_> = r.failures().collect();
        assert!(failures.is_empty(), "{name}: {failures:?}");
        assert_eq!(r.nullity, 1);
    }
}

#[test]
fn symmetrised_images_have_the_level_parity() {
    let swap = transposition(&label("i"), &label("j"));
    for name in ["mg21", "getzler22", "bp23"] {
        let c = case(name);
        for (&l, table) in &c.images {
            for (u, e) in table {
                let p = project(&c, l, e).unwrap();
                let s = swap_labels(&p, &swap).unwrap();
                let sign = if l % 2 == 0 {
                    Q::from_integer((-1).into())
                } else {
                    Q::from_integer(1.into())
                };
                assert_eq!(s, p.scale(&sign), "{name} l={l} {u}");
            }
        }
    }
}

#[test]
fn scaling_the_ansatz_leaves_kernels_alone() {
    let c = case("mg21");
    let lambda = Q::new((-7).into(), 3.into());
    let mut scaled = c.clone();
    for table in scaled.images.values_mut() {
        for e in table.values_mut() {
            *e = e.scale(&lambda);
        }
    }
    for eq in &mut scaled.equations {
        eq.row = eq.row.scale(&lambda);
    }
    for l in [1, 2] {
        let a = nullspace(&assemble_from_images(&c, l).unwrap().system);
        let b = nullspace(&assemble_from_images(&scaled, l).unwrap().system);
        assert_eq!(a, b, "l={l}");
    }
    assert_eq!(
        nullspace(&assemble_from_equations(&c).unwrap()),
        nullspace(&assemble_from_equations(&scaled).unwrap())
    );
}

#[test]
fn full_reduction_at_level_three_reproduces_the_transcribed_rows() {
    let mut c = case("getzler22");
    c.derive.insert(3, DeriveMode::Full);
    let d = assemble_from_images(&c, 3).unwrap();
    let combos: Vec<_> = c.residuals[&3].iter().map(|r| r.combo.clone()).collect();
    let both: Vec<_> = d.system.rows.iter().chain(&combos).cloned().collect();
    // r3-01 + r3-03 = -r3-04 / 24, so the transcribed rows have rank 3
    assert_eq!(rank_of(&combos), 3);
    assert_eq!(rank_of(&d.system.rows), 3);
    assert_eq!(rank_of(&both), 3);
    let sol = reference_solution(&c).unwrap();
    assert!(d.system.rows.iter().all(|r| r.dot(&sol).is_zero()));
}

#[test]
fn zero_images_give_an_empty_system() {
    let c = edited("mg21", |v| {
        v["images"]["3"] = serde_json::json!({"c1": "0", "c2": "0"});
    })
    .unwrap();
    let d = assemble_from_images(&c, 3).unwrap();
    assert!(d.system.rows.is_empty());
}

#[test]
fn corrupted_equation_is_caught() {
    let c = edited("bp23", |v| {
        v["equations"][0]["row"] = Value::String("c1 + 2 c2".into());
    })
    .unwrap();
    let r = verify_case(&c, &[Mode::Solve]);
    assert!(!r.passed());
    let nullity = r.checks.iter().find(|k| k.name == "solve nullity").unwrap();
    let ray = r.checks.iter().find(|k| k.name == "solve solution").unwrap();
    assert!(!nullity.passed() || !ray.passed());
    assert!(r.checks.iter().any(|k| k.name == "transcription eq231" && !k.passed()));
}

#[test]
fn corrupted_residual_fails_only_that_check() {
    let c = edited("getzler22", |v| {
        v["residuals"]["3"][3]["combo"] = Value::String("-1/8 c1 - 1/12 c2".into());
    })
    .unwrap();
    let r = verify_case(&c, &[Mode::Residuals]);
    let failed: Vec<_> = r.failures().map(|k| k.name.as_str()).collect();
    assert_eq!(failed, ["residual l=3 r3-04"]);
}

#[test]
fn mistyped_image_is_a_grading_error() {
    let err = edited("mg21", |v| {
        v["images"]["1"]["c5"] = Value::String("1/12 <n>_1 <i m m> <x j n> - <i j m> <x m n>".into());
    })
    .unwrap_err();
    match err {
        Error::Located { source, .. } => assert!(matches!(*source, Error::Grading(_)), "{source}"),
        other => panic!("{other}"),
    }
}

#[test]
fn residuals_fall_back_to_the_solved_ray() {
    let c = edited("mg21", |v| {
        v["expected_solution"] = Value::Null;
    })
    .unwrap();
    let r = verify_case(&c, &all());
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let sol = r.solution.unwrap();
    assert_eq!(sol.0[1], ("c2".to_string(), "-13/240".to_string()));
}

#[test]
fn tracked_mode_needs_residual_graphs() {
    let c = edited("bp23", |v| {
        v["residuals"].as_object_mut().unwrap().remove("4");
    })
    .unwrap();
    assert!(matches!(assemble_from_images(&c, 4), Err(Error::Schema(_))));
}

#[test]
fn json_reports_are_byte_stable() {
    let c = case("getzler22");
    let a = write_report(&verify_case(&c, &all()), Format::Json);
    let b = write_report(&verify_case(&c, &all()), Format::Json);
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["case"], "getzler22");
    assert_eq!(v["mode"], "all");
    assert_eq!(v["solution"]["c13"], "-13/10");
    // manifest order, not lexicographic
    let at = |k: &str| a.find(&format!("\"{k}\":")).unwrap();
    assert!(at("c1") < at("c2") && at("c9") < at("c10"));
}
