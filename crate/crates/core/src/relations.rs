//! WDVV relations, point-class collapse, and reduction modulo a relation span.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{rref, LinearSystem, RowVector};
use crate::par;
use crate::term::{q, Bracket, GwiExpr, GwiMonomial, Insertion, Label, Q};
use crate::text::parse_expr;

/// An expression asserted to vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub expr: GwiExpr,
    pub provenance: String,
}

impl Relation {
    /// Rescale so the first coefficient is 1; used to deduplicate.
    fn normalized(&self) -> GwiExpr {
        let lead = self.expr.iter().next().map(|(_, c)| c.clone()).unwrap_or_else(Q::one);
        self.expr.scale(&(Q::one() / lead))
    }
}

fn fresh_dummy<'a>(labels: impl Iterator<Item = &'a Label>) -> Label {
    let top = labels
        .filter_map(|l| match l {
            Label::Dummy(k) => Some(*k),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    Label::Dummy(top + 1)
}

/// `companion * [ sum <a b m S1><m c d S2> - sum <a c m S1><m b d S2> ]`
/// summed over splittings of `extras` by position.
fn wdvv_raw(abcd: [&Insertion; 4], extras: &[Insertion], companion: &[Bracket]) -> Result<GwiExpr> {
    let mu = fresh_dummy(
        abcd.iter()
            .map(|i| &i.label)
            .chain(extras.iter().map(|i| &i.label))
            .chain(companion.iter().flat_map(|b| b.insertions().iter().map(|i| &i.label))),
    );
    let mu = Insertion::plain(mu);
    let [a, b, c, d] = abcd;
    let mut out = GwiExpr::zero();
    for (sign, (p, r, s, t)) in [(q(1), (a, b, c, d)), (q(-1), (a, c, b, d))] {
        for mask in 0u32..(1 << extras.len()) {
            let mut left = vec![p.clone(), r.clone(), mu.clone()];
            let mut right = vec![mu.clone(), s.clone(), t.clone()];
            for (n, e) in extras.iter().enumerate() {
                if mask & (1 << n) != 0 {
                    left.push(e.clone());
                } else {
                    right.push(e.clone());
                }
            }
            let mut brackets = companion.to_vec();
            brackets.push(Bracket::new(0, left)?);
            brackets.push(Bracket::new(0, right)?);
            out.add_term(sign.clone(), GwiMonomial::new(brackets)?);
        }
    }
    Ok(out)
}

/// One WDVV instance. The two ends of a contraction may both appear among
/// `a, b, c, d` (e.g. `c = d`), which is how the instance joins them.
pub fn wdvv_relation(
    a: &Label,
    b: &Label,
    c: &Label,
    d: &Label,
    extras: &[Insertion],
    companion: Option<&GwiMonomial>,
) -> Result<Relation> {
    let abcd = [a, b, c, d].map(|l| Insertion::plain(l.clone()));
    let companion = companion.map_or(&[][..], |m| m.brackets());
    let expr = wdvv_raw([&abcd[0], &abcd[1], &abcd[2], &abcd[3]], extras, companion).map_err(|e| match e {
        Error::InvalidMonomial(msg) => Error::LabelCollision(msg),
        other => other,
    })?;
    let extras_txt = extras.iter().map(ToString::to_string).join(" ");
    Ok(Relation {
        expr,
        provenance: format!("wdvv a={a} b={b} c={c} d={d} extras=[{extras_txt}]"),
    })
}

/// The fixed representative of the point class with the given genus and
/// marked points: a trivalent caterpillar whose leaves are the marked points
/// followed by `genus` tadpoles.
fn point_class(genus: i64, externals: &[Label], first_dummy: u32) -> Result<Vec<Bracket>> {
    let mut next = first_dummy;
    let mut fresh = || {
        let l = Label::Dummy(next);
        next += 1;
        Insertion::plain(l)
    };
    let mut leaves: Vec<Insertion> = externals.iter().cloned().map(Insertion::plain).collect();
    let mut brackets = Vec::new();
    if genus == 1 && externals.len() == 1 {
        let t = fresh();
        return Ok(vec![Bracket::new(0, vec![leaves[0].clone(), t.clone(), t])?]);
    }
    for _ in 0..genus {
        let (e, t) = (fresh(), fresh());
        brackets.push(Bracket::new(0, vec![e.clone(), t.clone(), t])?);
        leaves.push(e);
    }
    let n = leaves.len();
    if n < 3 {
        return Err(Error::Grading(format!(
            "no stable point class for genus {genus} with {} marked points",
            externals.len()
        )));
    }
    if n == 3 {
        brackets.push(Bracket::new(0, leaves)?);
        return Ok(brackets);
    }
    let mut spine = fresh();
    brackets.push(Bracket::new(
        0,
        vec![leaves[0].clone(), leaves[1].clone(), spine.clone()],
    )?);
    for leaf in &leaves[2..n - 2] {
        let s = fresh();
        brackets.push(Bracket::new(0, vec![spine, leaf.clone(), s.clone()])?);
        spine = s;
    }
    brackets.push(Bracket::new(
        0,
        vec![spine, leaves[n - 2].clone(), leaves[n - 1].clone()],
    )?);
    Ok(brackets)
}

/// Indices of the connected components of `m` that are point classes:
/// psi-free, with a marked point, of codimension equal to the dimension of
/// their moduli space. Top-degree tautological groups are one-dimensional
/// and every such stratum has degree one, so all of them with the same
/// genus and marked points are equal.
fn point_components(m: &GwiMonomial) -> Vec<crate::term::ComponentData> {
    m.component_data()
        .into_iter()
        .filter(|c| c.psi == 0 && !c.externals.is_empty() && c.codim() as i64 == c.moduli_dim())
        .collect()
}

/// Replace every point-class component by its fixed representative.
pub fn collapse_monomial(m: &GwiMonomial) -> Result<GwiMonomial> {
    let points = point_components(m);
    if points.is_empty() {
        return Ok(m.clone());
    }
    let mut replaced: BTreeSet<usize> = BTreeSet::new();
    let mut brackets = Vec::new();
    let mut next = m.max_dummy() + 1;
    for c in &points {
        replaced.extend(c.brackets.iter().copied());
        let rep = point_class(c.genus, &c.externals, next)?;
        next += 2 * rep.len() as u32 + 2;
        brackets.extend(rep);
    }
    for (n, b) in m.brackets().iter().enumerate() {
        if !replaced.contains(&n) {
            brackets.push(b.clone());
        }
    }
    GwiMonomial::new(brackets)
}

pub fn collapse(e: &GwiExpr) -> Result<GwiExpr> {
    e.map_monomials(|m| collapse_monomial(m).map(GwiExpr::from_monomial))
}

/// All WDVV instances obtained by cutting one contraction of `m` that joins
/// two distinct genus-zero, psi-free brackets.
fn instances_at(m: &GwiMonomial) -> Result<Vec<GwiExpr>> {
    let collapsed: BTreeSet<usize> = point_components(m).into_iter().flat_map(|c| c.brackets).collect();
    let br = m.brackets();
    let mut out = Vec::new();
    for (v1, v2) in (0..br.len()).tuple_combinations() {
        let (b1, b2) = (&br[v1], &br[v2]);
        let usable = |b: &Bracket, v: usize| b.genus() == 0 && b.psi_total() == 0 && !collapsed.contains(&v);
        if !usable(b1, v1) || !usable(b2, v2) {
            continue;
        }
        let shared: BTreeSet<&Label> = b1
            .insertions()
            .iter()
            .map(|i| &i.label)
            .filter(|l| b2.insertions().iter().any(|j| &j.label == *l))
            .collect();
        for mu in shared {
            let rest = |b: &Bracket| -> Vec<Insertion> {
                let mut v = b.insertions().to_vec();
                let k = v.iter().position(|i| &i.label == mu).expect("edge end");
                v.remove(k);
                v
            };
            let (r1, r2) = (rest(b1), rest(b2));
            if r1.len() < 2 || r2.len() < 2 {
                continue;
            }
            let companion: Vec<Bracket> = br
                .iter()
                .enumerate()
                .filter(|&(n, _)| n != v1 && n != v2)
                .map(|(_, b)| b.clone())
                .collect();
            // Both orientations of the edge.
            for (s1, s2) in [(&r1, &r2), (&r2, &r1)] {
                for (pa, pb) in (0..s1.len()).tuple_combinations() {
                    for (pc, pd) in (0..s2.len()).tuple_combinations() {
                        for (pc, pd) in [(pc, pd), (pd, pc)] {
                            let extras: Vec<Insertion> = s1
                                .iter()
                                .enumerate()
                                .filter(|&(n, _)| n != pa && n != pb)
                                .chain(s2.iter().enumerate().filter(|&(n, _)| n != pc && n != pd))
                                .map(|(_, i)| i.clone())
                                .collect();
                            let e = wdvv_raw([&s1[pa], &s1[pb], &s2[pc], &s2[pd]], &extras, &companion)?;
                            out.push(e);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Close `universe` under WDVV: every instance touching a known monomial is
/// generated, its terms join the universe, and the process repeats until no
/// new monomial appears. Relations are collapsed to point-class
/// representatives and returned deduplicated in canonical order.
pub fn enumerate_wdvv(universe: &[GwiMonomial]) -> Result<Vec<Relation>> {
    let mut known: BTreeSet<GwiMonomial> = BTreeSet::new();
    let mut frontier: Vec<GwiMonomial> = Vec::new();
    for m in universe {
        let c = collapse_monomial(m)?;
        if known.insert(c.clone()) {
            frontier.push(c);
        }
    }
    let mut relations: BTreeMap<GwiExpr, GwiExpr> = BTreeMap::new();
    while !frontier.is_empty() {
        let batches = par::map(&frontier, |m| -> Result<Vec<GwiExpr>> {
            instances_at(m)?.iter().map(collapse).collect()
        });
        let mut next = Vec::new();
        for batch in batches {
            for e in batch? {
                if e.is_zero() {
                    continue;
                }
                for m in e.monomials() {
                    if known.insert(m.clone()) {
                        next.push(m.clone());
                    }
                }
                let rel = Relation {
                    expr: e,
                    provenance: String::new(),
                };
                relations.entry(rel.normalized()).or_insert(rel.expr);
            }
        }
        next.sort();
        frontier = next;
    }
    Ok(relations
        .into_values()
        .map(|expr| Relation {
            expr,
            provenance: "wdvv closure".into(),
        })
        .collect())
}

/// Read relations, one expression per line; `#` starts a comment.
pub fn load_relation_file(path: &Path) -> Result<Vec<Relation>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_relations(&text, &path.display().to_string())
}

pub fn parse_relations(text: &str, source: &str) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let expr = parse_expr(body).map_err(|e| Error::Located {
            file: source.into(),
            line: n + 1,
            context: "relation".into(),
            source: Box::new(e),
        })?;
        if expr.is_zero() {
            continue;
        }
        out.push(Relation {
            expr,
            provenance: format!("{source}:{}", n + 1),
        });
    }
    Ok(out)
}

/// A relation row space over an ordered universe of monomials.
#[derive(Clone, Debug)]
pub struct RelationSpan {
    pub universe: Vec<GwiMonomial>,
    pub rows: Vec<RowVector<GwiMonomial>>,
    pub pivots: Vec<GwiMonomial>,
}

pub fn to_row(e: &GwiExpr) -> RowVector<GwiMonomial> {
    RowVector::from_entries(e.iter().map(|(m, c)| (m.clone(), c.clone())))
}

impl RelationSpan {
    /// Span of `relations`; the universe is their support together with
    /// `extra`, in canonical order.
    pub fn new(relations: &[Relation], extra: &[GwiMonomial]) -> RelationSpan {
        let mut universe: BTreeSet<GwiMonomial> = extra.iter().cloned().collect();
        for r in relations {
            universe.extend(r.expr.monomials().cloned());
        }
        let universe: Vec<GwiMonomial> = universe.into_iter().collect();
        let mut sys = LinearSystem::new(universe.clone());
        sys.rows = relations.iter().map(|r| to_row(&r.expr)).collect();
        let red = rref(&sys);
        RelationSpan {
            universe,
            rows: red.system.rows,
            pivots: red.pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Monomials not eliminated by the relations, in canonical order.
    pub fn basis(&self) -> Vec<GwiMonomial> {
        let piv: BTreeSet<&GwiMonomial> = self.pivots.iter().collect();
        self.universe.iter().filter(|m| !piv.contains(m)).cloned().collect()
    }
}

/// Normal form of `e` modulo the span: coordinates on the non-pivot
/// monomials.
pub fn reduce_modulo(e: &GwiExpr, span: &RelationSpan) -> Result<RowVector<GwiMonomial>> {
    for m in e.monomials() {
        if span.universe.binary_search(m).is_err() {
            return Err(Error::MonomialOutsideUniverse(m.to_string()));
        }
    }
    let mut v = to_row(e);
    for (row, p) in span.rows.iter().zip(&span.pivots) {
        let f = v.get(p);
        if !f.is_zero() {
            v.add_scaled(row, &-f);
        }
    }
    Ok(v)
}

/// Linear dependence among a family of strata modulo WDVV.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilyRank {
    /// Independent projected family members before imposing relations.
    pub members: usize,
    /// Dimension of the family span that the relations kill.
    pub deficiency: usize,
    /// Independent members left in the quotient.
    pub quotient: usize,
}

/// Close `family` under WDVV, apply `project` to both the family and the
/// relations, and measure how much of the family span the relations cover.
pub fn family_rank<F>(family: &[GwiMonomial], project: F) -> Result<FamilyRank>
where
    F: Fn(&GwiExpr) -> Result<GwiExpr> + Sync,
{
    let relations = enumerate_wdvv(family)?;
    let proj = |e: &GwiExpr| -> Result<RowVector<GwiMonomial>> { Ok(to_row(&collapse(&project(e)?)?)) };
    let fam: Vec<RowVector<GwiMonomial>> = family
        .iter()
        .map(|m| proj(&GwiExpr::from_monomial(m.clone())))
        .collect::<Result<_>>()?;
    let rel: Vec<RowVector<GwiMonomial>> = par::map(&relations, |r| proj(&r.expr))
        .into_iter()
        .collect::<Result<_>>()?;
    let members = crate::linalg::rank_of(&fam);
    let deficiency = crate::linalg::intersection_dim(&fam, &rel);
    Ok(FamilyRank {
        members,
        deficiency,
        quotient: members - deficiency,
    })
}

/// Every monomial reachable from `seeds` through WDVV instances, in
/// canonical order.
pub fn wdvv_closure(seeds: &[GwiMonomial]) -> Result<Vec<GwiMonomial>> {
    let mut out: BTreeSet<GwiMonomial> = seeds.iter().map(collapse_monomial).collect::<Result<_>>()?;
    for r in enumerate_wdvv(seeds)? {
        out.extend(r.expr.monomials().cloned());
    }
    Ok(out.into_iter().collect())
}
