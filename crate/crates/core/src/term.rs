//! The gwi term calculus.
//!
//! A [`GwiMonomial`] is a product of correlator brackets `<a b:1 m>_g`. Each
//! bracket is a vertex of a decorated dual graph; a label that occurs twice in
//! a monomial is a contracted (dummy) index, i.e. an edge, and a label that
//! occurs once is a marked point. Monomials are always stored in canonical
//! form: dummies renamed to `d1, d2, ...` and brackets/insertions sorted, with
//! the renaming chosen to minimise the sorted structure. Two presentations of
//! the same graph therefore compare equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::par;

/// Exact rational coefficient.
pub type Q = BigRational;

/// Shorthand for the integer rational `n`.
pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Shorthand for `num/den`.
pub fn qf(num: i64, den: i64) -> Q {
    Q::new(num.into(), den.into())
}

/// An insertion label. Named labels come from input; `Dummy(k)` is the
/// reserved canonical name `dk` given to contracted indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Named(Arc<str>),
    Dummy(u32),
}

impl Label {
    /// Build a label from text. `d<digits>` becomes the reserved dummy form.
    pub fn new(name: &str) -> Result<Label> {
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => return Err(Error::InvalidLabel(name.to_string())),
        }
        if !chars.all(|c| c.is_ascii_alphanumeric()) {
            return Err(Error::InvalidLabel(name.to_string()));
        }
        if let Some(k) = reserved_index(name) {
            return Ok(Label::Dummy(k));
        }
        Ok(Label::Named(name.into()))
    }

    pub fn is_dummy_name(&self) -> bool {
        matches!(self, Label::Dummy(_))
    }
}

fn reserved_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('d')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Named(s) => f.write_str(s),
            Label::Dummy(k) => write!(f, "d{k}"),
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Convenience constructor for tests and corpus code; panics on bad input.
pub fn label(name: &str) -> Label {
    Label::new(name).expect("valid label")
}

/// A half-edge or marked point, decorated with a power of psi.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Insertion {
    pub label: Label,
    pub psi: u32,
}

impl Insertion {
    pub fn new(label: Label, psi: u32) -> Self {
        Insertion { label, psi }
    }

    pub fn plain(label: Label) -> Self {
        Insertion { label, psi: 0 }
    }
}

impl fmt::Display for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.psi == 0 {
            write!(f, "{}", self.label)
        } else {
            write!(f, "{}:{}", self.label, self.psi)
        }
    }
}

impl fmt::Debug for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One correlator `<...>_g`: a vertex of genus `genus`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bracket {
    // Field order drives the derived ordering used by canonical forms.
    insertions: Vec<Insertion>,
    genus: u32,
}

impl Bracket {
    pub fn new(genus: u32, mut insertions: Vec<Insertion>) -> Result<Bracket> {
        if insertions.is_empty() {
            return Err(Error::InvalidMonomial("empty bracket".into()));
        }
        insertions.sort();
        Ok(Bracket { insertions, genus })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn insertions(&self) -> &[Insertion] {
        &self.insertions
    }

    pub fn psi_total(&self) -> u32 {
        self.insertions.iter().map(|i| i.psi).sum()
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (n, ins) in self.insertions.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{ins}")?;
        }
        f.write_str(">")?;
        if self.genus > 0 {
            write!(f, "_{}", self.genus)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// (genus, marked points, codimension, connected components) of a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grading {
    pub genus_total: i64,
    pub n_external: usize,
    pub codim: usize,
    pub components: usize,
}

impl fmt::Display for Grading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "genus {} n {} codim {} components {}",
            self.genus_total, self.n_external, self.codim, self.components
        )
    }
}

/// A canonical product of brackets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GwiMonomial {
    brackets: Vec<Bracket>,
}

impl GwiMonomial {
    /// Validate and canonicalise. Fails if any label occurs three or more
    /// times, or a reserved dummy name is left unpaired.
    pub fn new(brackets: Vec<Bracket>) -> Result<GwiMonomial> {
        if brackets.is_empty() {
            return Err(Error::InvalidMonomial("monomial has no brackets".into()));
        }
        canonical_brackets(brackets).map(|brackets| GwiMonomial { brackets })
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    fn label_counts(&self) -> BTreeMap<&Label, usize> {
        let mut counts = BTreeMap::new();
        for ins in self.brackets.iter().flat_map(|b| &b.insertions) {
            *counts.entry(&ins.label).or_insert(0) += 1;
        }
        counts
    }

    /// Labels occurring exactly once, sorted.
    pub fn external_labels(&self) -> Vec<Label> {
        self.label_counts()
            .into_iter()
            .filter(|&(_, n)| n == 1)
            .map(|(l, _)| l.clone())
            .collect()
    }

    pub fn dummy_count(&self) -> usize {
        self.label_counts().values().filter(|&&n| n == 2).count()
    }

    pub fn psi_total(&self) -> u32 {
        self.brackets.iter().map(Bracket::psi_total).sum()
    }

    /// Connected components as sorted lists of bracket indices, ordered by
    /// their smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.brackets.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        let mut seen: BTreeMap<&Label, usize> = BTreeMap::new();
        for (v, b) in self.brackets.iter().enumerate() {
            for ins in &b.insertions {
                if let Some(&u) = seen.get(&ins.label) {
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    parent[ru] = rv;
                } else {
                    seen.insert(&ins.label, v);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Per-component (genus, external labels, codimension, psi total).
    pub fn component_data(&self) -> Vec<ComponentData> {
        let counts = self.label_counts();
        self.components()
            .into_iter()
            .map(|members| {
                let mut externals = Vec::new();
                let mut edge_ends = 0usize;
                let mut genus = 0i64;
                let mut psi = 0u32;
                for &v in &members {
                    let b = &self.brackets[v];
                    genus += i64::from(b.genus);
                    psi += b.psi_total();
                    for ins in &b.insertions {
                        if counts[&ins.label] == 1 {
                            externals.push(ins.label.clone());
                        } else {
                            edge_ends += 1;
                        }
                    }
                }
                let edges = edge_ends / 2;
                genus += edges as i64 - members.len() as i64 + 1;
                externals.sort();
                ComponentData {
                    brackets: members,
                    genus,
                    externals,
                    edges,
                    psi,
                }
            })
            .collect()
    }

    pub fn grading(&self) -> Grading {
        let comps = self.component_data();
        let edges: usize = comps.iter().map(|c| c.edges).sum();
        let psi: usize = comps.iter().map(|c| c.psi as usize).sum();
        let n_external = comps.iter().map(|c| c.externals.len()).sum();
        // 1 - g = sum over components of (1 - g_c)
        let genus_total = 1 - comps.iter().map(|c| 1 - c.genus).sum::<i64>();
        Grading {
            genus_total,
            n_external,
            codim: edges + psi,
            components: comps.len(),
        }
    }

    /// Relabel named labels through `map`; unmapped labels are kept.
    pub fn relabel(&self, map: &BTreeMap<Label, Label>) -> Result<GwiMonomial> {
        if map.keys().any(Label::is_dummy_name) {
            return Err(Error::LabelCollision(
                "reserved dummy names cannot be relabelled".into(),
            ));
        }
        let present: BTreeSet<&Label> = self
            .brackets
            .iter()
            .flat_map(|b| b.insertions.iter().map(|i| &i.label))
            .collect();
        for target in map.values() {
            if present.contains(target) && !map.contains_key(target) {
                return Err(Error::LabelCollision(format!("{target} is already present in {self}")));
            }
        }
        let brackets = self
            .brackets
            .iter()
            .map(|b| {
                let ins = b
                    .insertions
                    .iter()
                    .map(|i| Insertion::new(map.get(&i.label).unwrap_or(&i.label).clone(), i.psi))
                    .collect();
                Bracket::new(b.genus, ins)
            })
            .collect::<Result<Vec<_>>>()?;
        GwiMonomial::new(brackets)
    }

    /// Product of two monomials. Dummies of `other` are shifted apart from
    /// ours first; named labels shared between the two become contractions.
    pub fn mul(&self, other: &GwiMonomial) -> Result<GwiMonomial> {
        let shift = self.max_dummy();
        let mut brackets = self.brackets.clone();
        for b in &other.brackets {
            let ins = b
                .insertions
                .iter()
                .map(|i| {
                    let l = match &i.label {
                        Label::Dummy(k) => Label::Dummy(k + shift),
                        named => named.clone(),
                    };
                    Insertion::new(l, i.psi)
                })
                .collect();
            brackets.push(Bracket::new(b.genus, ins)?);
        }
        GwiMonomial::new(brackets)
    }

    pub(crate) fn max_dummy(&self) -> u32 {
        self.brackets
            .iter()
            .flat_map(|b| &b.insertions)
            .filter_map(|i| match i.label {
                Label::Dummy(k) => Some(k),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for GwiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, b) in self.brackets.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GwiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A connected component of a monomial's dual graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentData {
    pub brackets: Vec<usize>,
    pub genus: i64,
    pub externals: Vec<Label>,
    pub edges: usize,
    pub psi: u32,
}

impl ComponentData {
    pub fn codim(&self) -> usize {
        self.edges + self.psi as usize
    }

    /// Dimension of the moduli space this component lives on.
    pub fn moduli_dim(&self) -> i64 {
        3 * self.genus - 3 + self.externals.len() as i64
    }
}

// Encoded insertion: (label code, psi). Externals take codes 0..E in name
// order, dummies E.. in renamed order, which matches `Label`'s ordering.
type Code = (u32, u32);

fn canonical_brackets(brackets: Vec<Bracket>) -> Result<Vec<Bracket>> {
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for ins in brackets.iter().flat_map(|b| &b.insertions) {
        *counts.entry(ins.label.clone()).or_insert(0) += 1;
    }
    let mut externals = Vec::new();
    let mut dummies = Vec::new();
    for (l, &n) in &counts {
        match n {
            1 if l.is_dummy_name() => {
                return Err(Error::InvalidMonomial(format!(
                    "reserved name {l} used as an external label"
                )))
            }
            1 => externals.push(l.clone()),
            2 => dummies.push(l.clone()),
            _ => return Err(Error::InvalidMonomial(format!("label {l} occurs {n} times"))),
        }
    }
    let n_ext = externals.len() as u32;
    let ext_code: BTreeMap<&Label, u32> = externals.iter().zip(0..).collect();
    let dummy_index: BTreeMap<&Label, usize> = dummies.iter().zip(0..).collect();

    // Each insertion is either Ok(external code) or Err(dummy slot).
    type Slot = (std::result::Result<u32, usize>, u32);
    let raw: Vec<(u32, Vec<Slot>)> = brackets
        .iter()
        .map(|b| {
            let ins = b
                .insertions
                .iter()
                .map(|i| match ext_code.get(&i.label) {
                    Some(&c) => (Ok(c), i.psi),
                    None => (Err(dummy_index[&i.label]), i.psi),
                })
                .collect();
            (b.genus, ins)
        })
        .collect();

    let encode = |perm: &[usize]| -> Vec<(Vec<Code>, u32)> {
        let mut out: Vec<(Vec<Code>, u32)> = raw
            .iter()
            .map(|(g, ins)| {
                let mut codes: Vec<Code> = ins
                    .iter()
                    .map(|(slot, psi)| match slot {
                        Ok(c) => (*c, *psi),
                        Err(d) => (n_ext + perm[*d] as u32, *psi),
                    })
                    .collect();
                codes.sort_unstable();
                (codes, *g)
            })
            .collect();
        out.sort_unstable();
        out
    };

    let k = dummies.len();
    let best = (0..k)
        .permutations(k)
        .map(|perm| encode(&perm))
        .min()
        .expect("at least one permutation");

    best.into_iter()
        .map(|(codes, genus)| {
            let insertions = codes
                .into_iter()
                .map(|(c, psi)| {
                    let label = if c < n_ext {
                        externals[c as usize].clone()
                    } else {
                        Label::Dummy(c - n_ext + 1)
                    };
                    Insertion::new(label, psi)
                })
                .collect();
            Bracket::new(genus, insertions)
        })
        .collect()
}

/// A coefficient times a monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GwiTerm {
    pub coeff: Q,
    pub monomial: GwiMonomial,
}

/// A canonical formal sum of terms; the empty sum is zero.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GwiExpr {
    terms: BTreeMap<GwiMonomial, Q>,
}

impl GwiExpr {
    pub fn zero() -> GwiExpr {
        GwiExpr::default()
    }

    pub fn from_monomial(m: GwiMonomial) -> GwiExpr {
        GwiExpr::term(q(1), m)
    }

    pub fn term(coeff: Q, m: GwiMonomial) -> GwiExpr {
        let mut e = GwiExpr::zero();
        e.add_term(coeff, m);
        e
    }

    pub fn from_terms<I: IntoIterator<Item = (Q, GwiMonomial)>>(terms: I) -> GwiExpr {
        let mut e = GwiExpr::zero();
        for (c, m) in terms {
            e.add_term(c, m);
        }
        e
    }

    pub fn add_term(&mut self, coeff: Q, m: GwiMonomial) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(m).or_insert_with(Q::zero);
        *slot += coeff;
        if slot.is_zero() {
            // re-borrow to remove the cancelled entry
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (sorted) order.
    pub fn iter(&self) -> impl Iterator<Item = (&GwiMonomial, &Q)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> Vec<GwiTerm> {
        self.terms
            .iter()
            .map(|(m, c)| GwiTerm {
                coeff: c.clone(),
                monomial: m.clone(),
            })
            .collect()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &GwiMonomial> {
        self.terms.keys()
    }

    pub fn coefficient_of(&self, m: &GwiMonomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, r: &Q) -> GwiExpr {
        if r.is_zero() {
            return GwiExpr::zero();
        }
        GwiExpr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
        }
    }

    pub fn add(&self, other: &GwiExpr) -> GwiExpr {
        let mut out = self.clone();
        out.add_assign_scaled(other, &q(1));
        out
    }

    pub fn sub(&self, other: &GwiExpr) -> GwiExpr {
        let mut out = self.clone();
        out.add_assign_scaled(other, &q(-1));
        out
    }

    pub fn add_assign_scaled(&mut self, other: &GwiExpr, r: &Q) {
        if r.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            let slot = self.terms.entry(m.clone()).or_insert_with(Q::zero);
            *slot += c * r;
        }
        self.terms.retain(|_, c| !c.is_zero());
    }

    /// Apply a monomial-level linear map.
    pub fn map_monomials<F>(&self, f: F) -> Result<GwiExpr>
    where
        F: Fn(&GwiMonomial) -> Result<GwiExpr> + Sync + Send,
    {
        let terms: Vec<(&GwiMonomial, &Q)> = self.terms.iter().collect();
        let images = par::map(&terms, |(m, _)| f(m));
        let mut out = GwiExpr::zero();
        for ((_, c), img) in terms.iter().zip(images) {
            out.add_assign_scaled(&img?, c);
        }
        Ok(out)
    }

    /// True if every term has the same grading; returns it.
    pub fn grading(&self) -> Option<Grading> {
        let mut it = self.terms.keys().map(GwiMonomial::grading);
        let first = it.next()?;
        it.all(|g| g == first).then_some(first)
    }

    /// The largest absolute denominator among the coefficients.
    pub fn max_denominator(&self) -> Q {
        self.terms
            .values()
            .map(|c| Q::from_integer(c.denom().clone()).abs())
            .max()
            .unwrap_or_else(Q::one)
    }
}

impl fmt::Debug for GwiExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_expr(self))
    }
}

impl fmt::Display for GwiExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::text::print_expr(self))
    }
}

/// Re-canonicalise an expression given as raw terms. Canonical construction
/// already happens in [`GwiMonomial::new`], so this only merges like terms.
pub fn canonicalize(e: &GwiExpr) -> GwiExpr {
    e.clone()
}

/// Exact `sum r_i * e_i`.
pub fn linear_combination(pairs: &[(Q, GwiExpr)]) -> GwiExpr {
    let mut out = GwiExpr::zero();
    for (r, e) in pairs {
        out.add_assign_scaled(e, r);
    }
    out
}

/// Apply a bijection on external labels to every monomial.
pub fn swap_labels(e: &GwiExpr, sigma: &BTreeMap<Label, Label>) -> Result<GwiExpr> {
    let targets: BTreeSet<&Label> = sigma.values().collect();
    if targets.len() != sigma.len() {
        return Err(Error::LabelCollision("relabelling is not injective".into()));
    }
    e.map_monomials(|m| m.relabel(sigma).map(GwiExpr::from_monomial))
}

/// The transposition `a <-> b` as a relabelling map.
pub fn transposition(a: &Label, b: &Label) -> BTreeMap<Label, Label> {
    BTreeMap::from([(a.clone(), b.clone()), (b.clone(), a.clone())])
}

/// A one-dimensional character of a symmetric group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Character {
    Trivial,
    Sign,
}

impl Character {
    /// The character the invariance operator at level `l` carries on the two
    /// new labels: trivial for odd `l`, sign for even `l`.
    pub fn for_level(l: u32) -> Character {
        if l % 2 == 1 {
            Character::Trivial
        } else {
            Character::Sign
        }
    }

    pub fn from_sign(s: i32) -> Option<Character> {
        match s {
            1 => Some(Character::Trivial),
            -1 => Some(Character::Sign),
            _ => None,
        }
    }
}

fn permutation_sign(perm: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// All relabellings of `labels` with their character values.
pub fn group_elements(labels: &[Label], character: Character) -> Vec<(BTreeMap<Label, Label>, i64)> {
    let n = labels.len();
    (0..n)
        .permutations(n)
        .map(|perm| {
            let map = labels
                .iter()
                .zip(&perm)
                .filter(|(a, &p)| **a != labels[p])
                .map(|(a, &p)| (a.clone(), labels[p].clone()))
                .collect();
            let chi = match character {
                Character::Trivial => 1,
                Character::Sign => permutation_sign(&perm),
            };
            (map, chi)
        })
        .collect()
}

/// The averaging projector `(1/|G|) sum chi(s) s(e)` over all permutations
/// of `labels`.
pub fn symmetrize(e: &GwiExpr, labels: &[Label], character: Character) -> Result<GwiExpr> {
    let distinct: BTreeSet<&Label> = labels.iter().collect();
    if distinct.len() != labels.len() {
        return Err(Error::LabelCollision("repeated label in symmetrisation set".into()));
    }
    if labels.len() < 2 {
        return Ok(e.clone());
    }
    let group = group_elements(labels, character);
    let order = q(group.len() as i64);
    let images = par::map(&group, |(sigma, _)| swap_labels(e, sigma));
    let mut out = GwiExpr::zero();
    for ((_, chi), img) in group.iter().zip(images) {
        out.add_assign_scaled(&img?, &(q(*chi) / &order));
    }
    Ok(out)
}

/// Coefficient of `m`'s canonical class in `e`.
pub fn coefficient_of(e: &GwiExpr, m: &GwiMonomial) -> Q {
    e.coefficient_of(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_expr, parse_monomial};

    fn mono(s: &str) -> GwiMonomial {
        parse_monomial(s).unwrap()
    }

    #[test]
    fn dummy_renaming_and_order_do_not_matter() {
        assert_eq!(mono("<n n x>"), mono("<x m m>"));
        assert_eq!(mono("<n n x>").to_string(), "<x d1 d1>");
        assert_eq!(mono("<m>_1 <x m n> <i j n>"), mono("<i a j> <b>_1 <b x a>"));
    }

    #[test]
    fn third_occurrence_is_rejected() {
        let b = Bracket::new(0, vec![Insertion::plain(label("m")); 3]).unwrap();
        assert!(matches!(GwiMonomial::new(vec![b]), Err(Error::InvalidMonomial(_))));
    }

    #[test]
    fn reserved_name_cannot_be_external() {
        assert!(parse_monomial("<d1 x y>").is_err());
        assert!(parse_monomial("<d1 d1 x>").is_ok());
    }

    #[test]
    fn like_terms_merge_across_dummy_names() {
        let e = parse_expr("1/2 <x m m> + 1/2 <x n n>").unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.coefficient_of(&mono("<x a a>")), q(1));
    }

    #[test]
    fn grading_examples() {
        let g = mono("<x:2>_2").grading();
        assert_eq!(
            g,
            Grading {
                genus_total: 2,
                n_external: 1,
                codim: 2,
                components: 1
            }
        );
        let g = mono("<m>_1 <x m n> <i j n>").grading();
        assert_eq!(
            g,
            Grading {
                genus_total: 1,
                n_external: 3,
                codim: 2,
                components: 1
            }
        );
        let g = mono("<i x>_1 <j y m> <m z n> <n a a>").grading();
        assert_eq!(
            g,
            Grading {
                genus_total: 1,
                n_external: 5,
                codim: 3,
                components: 2
            }
        );
    }

    #[test]
    fn codim_is_additive_over_disjoint_products() {
        let a = mono("<x m m>");
        let b = mono("<y:1 n>_1 <n z w>");
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.grading().codim, a.grading().codim + b.grading().codim);
        assert_eq!(ab.grading().components, 2);
    }

    #[test]
    fn linear_combination_cancels() {
        let e = parse_expr("<x m m> + 3 <x:1 y>_1").unwrap();
        assert!(linear_combination(&[(q(1), e.clone()), (q(-1), e.clone())]).is_zero());
        let two = linear_combination(&[(q(2), parse_expr("<x m m>").unwrap())]);
        assert_eq!(two.coefficient_of(&mono("<x m m>")), q(2));
        let wdvv = linear_combination(&[
            (q(1), parse_expr("<a b m><m c d>").unwrap()),
            (q(-1), parse_expr("<a c m><m b d>").unwrap()),
        ]);
        assert_eq!(wdvv.len(), 2);
    }

    #[test]
    fn swap_examples() {
        let ij = transposition(&label("i"), &label("j"));
        let e = parse_expr("<i x m><j m n n>").unwrap();
        assert_eq!(swap_labels(&e, &ij).unwrap(), parse_expr("<j x m><i m n n>").unwrap());
        let sym = parse_expr("<i j m><x m n n>").unwrap();
        assert_eq!(swap_labels(&sym, &ij).unwrap(), sym);
        let cyc = BTreeMap::from([
            (label("x"), label("y")),
            (label("y"), label("z")),
            (label("z"), label("x")),
        ]);
        let e = parse_expr("<x y m><m z n n>").unwrap();
        assert_eq!(swap_labels(&e, &cyc).unwrap(), parse_expr("<y z m><m x n n>").unwrap());
    }

    #[test]
    fn swap_into_existing_label_collides() {
        let e = parse_expr("<i x m><j m n n>").unwrap();
        let map = BTreeMap::from([(label("i"), label("x"))]);
        assert!(matches!(swap_labels(&e, &map), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn symmetrize_examples() {
        let ij = [label("i"), label("j")];
        let sym = parse_expr("<i j m><x m n n>").unwrap();
        assert!(symmetrize(&sym, &ij, Character::Sign).unwrap().is_zero());

        let e = parse_expr("<i x>_1 <j m m>").unwrap();
        let s = symmetrize(&e, &ij, Character::Trivial).unwrap();
        assert_eq!(s, parse_expr("1/2 <i x>_1 <j m m> + 1/2 <j x>_1 <i m m>").unwrap());

        let xyz = [label("x"), label("y"), label("z")];
        let e = parse_expr("<x y m><m z n n>").unwrap();
        let s = symmetrize(&e, &xyz, Character::Trivial).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|(_, c)| *c == qf(1, 3)));
    }

    #[test]
    fn character_by_level() {
        assert_eq!(Character::for_level(1), Character::Trivial);
        assert_eq!(Character::for_level(2), Character::Sign);
        assert_eq!(Character::for_level(4), Character::Sign);
    }
}
