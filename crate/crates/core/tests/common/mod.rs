#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use gwi_core::manifest::{load_manifest, CaseManifest};
use gwi_core::{label, Bracket, GwiExpr, GwiMonomial, Insertion, Label, Q};
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::sample::subsequence;

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

pub fn case(name: &str) -> CaseManifest {
    load_manifest(&corpus(&format!("{name}.json"))).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The three corpus cases, loaded once per test binary.
pub fn all_cases() -> &'static [CaseManifest] {
    static CASES: OnceLock<Vec<CaseManifest>> = OnceLock::new();
    CASES.get_or_init(|| ["mg21", "getzler22", "bp23"].iter().map(|n| case(n)).collect())
}

const EXTERNALS: [&str; 5] = ["x", "y", "z", "i", "j"];
const DUMMIES: [&str; 4] = ["m", "n", "a", "b"];

/// Monomials with up to four brackets over externals x y z i j and up to
/// four contracted pairs. Disconnected results are allowed.
pub fn monomial() -> impl Strategy<Value = GwiMonomial> {
    (
        subsequence(EXTERNALS.to_vec(), 0..=5),
        subsequence(DUMMIES.to_vec(), 0..=4),
    )
        .prop_filter("needs a label", |(e, d)| !e.is_empty() || !d.is_empty())
        .prop_flat_map(|(ext, dum)| {
            let mut slots: Vec<&'static str> = ext.clone();
            for d in &dum {
                slots.push(d);
                slots.push(d);
            }
            let len = slots.len();
            (
                Just(slots).prop_shuffle(),
                prop::collection::vec(0u32..3, len),
                (1..=len.min(4)).prop_flat_map(move |k| subsequence((1..len).collect::<Vec<_>>(), k - 1)),
                prop::collection::vec(0u32..3, 4),
            )
        })
        .prop_filter_map("valid monomial", |(slots, psi, cuts, genera)| {
            let ins: Vec<Insertion> = slots
                .iter()
                .zip(&psi)
                // keep psi sparse so most brackets are plain
                .map(|(l, &p)| Insertion::new(label(l), if p == 2 { 1 } else { 0 }))
                .collect();
            let mut bounds = vec![0];
            bounds.extend(cuts);
            bounds.push(ins.len());
            let brackets: Option<Vec<Bracket>> = bounds
                .windows(2)
                .zip(&genera)
                .map(|(w, &g)| Bracket::new(g, ins[w[0]..w[1]].to_vec()).ok())
                .collect();
            GwiMonomial::new(brackets?).ok()
        })
}

pub fn rational() -> impl Strategy<Value = Q> {
    (-50i64..=50, 1i64..=30)
        .prop_filter("nonzero", |(n, _)| *n != 0)
        .prop_map(|(n, d)| Q::new(BigInt::from(n), BigInt::from(d)))
}

pub fn expr() -> impl Strategy<Value = GwiExpr> {
    prop::collection::vec((rational(), monomial()), 0..5).prop_map(GwiExpr::from_terms)
}

/// A renaming of the dummy labels of `m` to fresh names, as a permutation
/// picked by `seed`.
pub fn rename_dummies(m: &GwiMonomial, seed: &[usize]) -> BTreeMap<Label, Label> {
    let fresh = ["p", "q", "r", "s", "t", "u", "v", "w"];
    let ext = m.external_labels();
    let mut dummies: Vec<Label> = m
        .brackets()
        .iter()
        .flat_map(|b| b.insertions().iter().map(|i| i.label.clone()))
        .filter(|l| !ext.contains(l))
        .collect();
    dummies.sort();
    dummies.dedup();
    let mut targets: Vec<&str> = fresh.to_vec();
    for (k, s) in seed.iter().enumerate() {
        let n = targets.len();
        targets.swap(k % n, s % n);
    }
    dummies.into_iter().zip(targets).map(|(d, t)| (d, label(t))).collect()
}

/// Rebuild `m` from its brackets in reverse order with reversed insertions
/// and the given relabelling applied.
pub fn scrambled(m: &GwiMonomial, map: &BTreeMap<Label, Label>) -> GwiMonomial {
    let brackets: Vec<Bracket> = m
        .brackets()
        .iter()
        .rev()
        .map(|b| {
            let ins = b
                .insertions()
                .iter()
                .rev()
                .map(|i| Insertion::new(map.get(&i.label).cloned().unwrap_or_else(|| i.label.clone()), i.psi))
                .collect();
            Bracket::new(b.genus(), ins).expect("bracket")
        })
        .collect();
    GwiMonomial::new(brackets).expect("monomial")
}

/// `sum g_v + E - V + 1`, computed without the component decomposition.
pub fn euler_genus(m: &GwiMonomial) -> i64 {
    let v = m.brackets().len() as i64;
    let e = m.dummy_count() as i64;
    let g: i64 = m.brackets().iter().map(|b| i64::from(b.genus())).sum();
    g + e - v + 1
}

pub mod props {
    use super::*;
    use gwi_core::manifest::CaseManifest;
    use gwi_core::{parse_expr, parse_monomial, print_expr, swap_labels, symmetrize, transposition, Character};
    use proptest::test_runner::TestCaseError;

    pub fn canonical_idempotent(m: &GwiMonomial) -> Result<(), TestCaseError> {
        let again = GwiMonomial::new(m.brackets().to_vec()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&again, m);
        let reparsed = parse_monomial(&m.to_string()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&reparsed, m);
        Ok(())
    }

    pub fn renaming_invariant(m: &GwiMonomial, seed: &[usize]) -> Result<(), TestCaseError> {
        let map = rename_dummies(m, seed);
        prop_assert_eq!(&scrambled(m, &map), m);
        Ok(())
    }

    pub fn round_trip(e: &GwiExpr) -> Result<(), TestCaseError> {
        let text = print_expr(e);
        let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, e);
        prop_assert_eq!(print_expr(&back), text);
        Ok(())
    }

    /// P(P e) = P e for both characters, and the sign law under i<->j.
    pub fn projector_laws(e: &GwiExpr) -> Result<(), TestCaseError> {
        let f = |r: gwi_core::Result<GwiExpr>| r.map_err(|err| TestCaseError::fail(err.to_string()));
        let ij = [label("i"), label("j")];
        let swap = transposition(&ij[0], &ij[1]);
        for ch in [Character::Trivial, Character::Sign] {
            let p = f(symmetrize(e, &ij, ch))?;
            prop_assert_eq!(&f(symmetrize(&p, &ij, ch))?, &p);
            let swapped = f(swap_labels(&p, &swap))?;
            match ch {
                Character::Trivial => prop_assert_eq!(&swapped, &p),
                Character::Sign => prop_assert_eq!(&swapped, &p.scale(&Q::from_integer((-1).into()))),
            }
        }
        let xyz = [label("x"), label("y"), label("z")];
        let p = f(symmetrize(e, &xyz, Character::Trivial))?;
        prop_assert_eq!(&f(symmetrize(&p, &xyz, Character::Trivial))?, &p);
        Ok(())
    }

    pub fn grading_formulas(m: &GwiMonomial) -> Result<(), TestCaseError> {
        let g = m.grading();
        prop_assert_eq!(g.genus_total, euler_genus(m));
        prop_assert_eq!(g.codim, m.dummy_count() + m.psi_total() as usize);
        prop_assert_eq!(g.n_external, m.external_labels().len());
        prop_assert!(g.components >= 1 && g.components <= m.brackets().len());
        Ok(())
    }

    /// Every image monomial of every case, relabelled, keeps the grading
    /// required at its level.
    pub fn corpus_grading(cases: &[CaseManifest], pick: usize, seed: &[usize]) -> Result<(), TestCaseError> {
        let all: Vec<(&CaseManifest, u32, &GwiMonomial)> = cases
            .iter()
            .flat_map(|c| {
                c.images
                    .iter()
                    .flat_map(move |(&l, t)| t.values().flat_map(move |e| e.monomials().map(move |m| (c, l, m))))
            })
            .collect();
        let (c, l, m) = all[pick % all.len()];
        let m = scrambled(m, &rename_dummies(m, seed));
        let g = m.grading();
        prop_assert_eq!((g.genus_total, g.n_external, g.codim), c.image_grading(l));
        prop_assert!(g.components <= 2);
        grading_formulas(&m)
    }
}
