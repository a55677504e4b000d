//! Explicit chordal covers of Cayley graphs with per-clique translations,
//! and the resulting Fourier supports T = union of translated cliques.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::abelian::{make_group, GroupElement, GroupSpec};
use crate::error::{Error, Result};
use crate::graphs::{
    is_chordal, maximal_cliques_chordal, verify_peo, EliminationOrder, Graph, Label,
};

/// A chordal cover of a Cayley graph on the character group, with one
/// translation character per maximal clique. The Fourier support is the
/// union of the translated cliques.
#[derive(Clone, Debug)]
pub struct ChordalCover {
    group: GroupSpec,
    base: Graph,
    cover: Graph,
    peo: EliminationOrder,
    cliques: Vec<BTreeSet<usize>>,
    translations: Vec<GroupElement>,
    fourier_support: BTreeSet<GroupElement>,
}

fn label_to_element(group: &GroupSpec, label: &Label) -> GroupElement {
    let coords: Vec<i64> = label.iter().map(|&c| c as i64).collect();
    group.element(&coords).expect("vertex label lies in the group")
}

impl ChordalCover {
    /// Builds a cover from declared (clique, translation) pairs. The
    /// declared cliques must be exactly the maximal cliques of `cover`;
    /// all structural invariants are checked before returning.
    pub fn assemble(
        group: GroupSpec,
        base: Graph,
        cover: Graph,
        declared: Vec<(BTreeSet<Label>, GroupElement)>,
    ) -> Result<Self> {
        let peo = is_chordal(&cover)
            .ok_or_else(|| Error::BadCertificate("cover graph is not chordal".into()))?;
        let cliques = maximal_cliques_chordal(&cover, &peo)?;
        let mut by_labels: BTreeMap<Vec<Label>, GroupElement> = BTreeMap::new();
        for (c, t) in declared {
            let mut key: Vec<Label> = c.into_iter().collect();
            key.sort();
            by_labels.insert(key, t);
        }
        let mut translations = Vec::with_capacity(cliques.len());
        for c in &cliques {
            let key = cover.labels_of(c);
            let t = by_labels.get(&key).ok_or_else(|| {
                Error::Inconsistent(format!(
                    "maximal clique {key:?} has no declared translation"
                ))
            })?;
            translations.push(t.clone());
        }
        let mut out = ChordalCover {
            group,
            base,
            cover,
            peo,
            cliques,
            translations,
            fourier_support: BTreeSet::new(),
        };
        out.fourier_support = out.translated_union();
        out.validate()?;
        Ok(out)
    }

    fn translated_union(&self) -> BTreeSet<GroupElement> {
        let mut t = BTreeSet::new();
        for i in 0..self.cliques.len() {
            t.extend(self.translated_clique(i));
        }
        t
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn cover(&self) -> &Graph {
        &self.cover
    }

    pub fn peo(&self) -> &EliminationOrder {
        &self.peo
    }

    pub fn cliques(&self) -> &[BTreeSet<usize>] {
        &self.cliques
    }

    pub fn translations(&self) -> &[GroupElement] {
        &self.translations
    }

    /// The vertices of clique `i` as characters.
    pub fn clique_elements(&self, i: usize) -> Vec<GroupElement> {
        self.cliques[i]
            .iter()
            .map(|&v| label_to_element(&self.group, self.cover.label(v)))
            .collect()
    }

    /// The translated clique χ_C · C of clique `i`.
    pub fn translated_clique(&self, i: usize) -> BTreeSet<GroupElement> {
        let t = &self.translations[i];
        self.clique_elements(i)
            .iter()
            .map(|chi| self.group.mul(t, chi))
            .collect()
    }

    /// The Fourier support T = ∪_C χ_C · C.
    pub fn fourier_support(&self) -> &BTreeSet<GroupElement> {
        &self.fourier_support
    }

    /// Checks all structural invariants: containment and chordality of the
    /// cover, clique maximality, and translated-clique containment in T.
    pub fn validate(&self) -> Result<()> {
        if self.base.labels() != self.cover.labels() || !self.base.is_covered_by(&self.cover) {
            return Err(Error::Inconsistent(
                "cover does not contain the base graph".into(),
            ));
        }
        if !verify_peo(&self.cover, &self.peo) {
            return Err(Error::BadCertificate(
                "stored elimination order is not perfect".into(),
            ));
        }
        let maximal = maximal_cliques_chordal(&self.cover, &self.peo)?;
        if maximal != self.cliques {
            return Err(Error::Inconsistent(
                "stored cliques are not the maximal cliques of the cover".into(),
            ));
        }
        if self.cliques.len() != self.translations.len() {
            return Err(Error::Shape("one translation per clique required".into()));
        }
        let union = self.translated_union();
        for i in 0..self.cliques.len() {
            if !self.translated_clique(i).is_subset(&self.fourier_support) {
                return Err(Error::Support(format!(
                    "translated clique {i} escapes the Fourier support"
                )));
            }
        }
        if union != self.fourier_support {
            return Err(Error::Support(
                "Fourier support is not the union of translated cliques".into(),
            ));
        }
        Ok(())
    }
}

// --- Frequency formulas for cycle triangulations ------------------------

fn bit_positions(n: u64) -> Vec<u32> {
    (0..64).filter(|&i| n >> i & 1 == 1).collect()
}

/// Largest k with 2^k < n (n >= 2).
fn floor_log2_strict(n: u64) -> u32 {
    63 - (n - 1).leading_zeros()
}

/// Frequency superset for the triangulation of the (N+1)-cycle:
/// {0} ∪ {±2^i : i = 0..k} ∪ partial sums of the set bits of N except the
/// full sum, where 2^k is the largest power of two below N.
pub fn cycle_plus_one_frequencies(n: u64) -> BTreeSet<i64> {
    assert!(n >= 2);
    let k = floor_log2_strict(n);
    let mut t: BTreeSet<i64> = BTreeSet::from([0]);
    for i in 0..=k {
        t.insert(1 << i);
        t.insert(-(1i64 << i));
    }
    let bits = bit_positions(n);
    let mut sum = 0i64;
    for i in 0..bits.len().saturating_sub(1) {
        sum += 1 << bits[i];
        t.insert(sum);
    }
    t
}

/// Frequency set for the contracted triangulation of the N-cycle: as above
/// but with ±2^i for i = 0..k−1 and the partial sums stopping one earlier.
pub fn cycle_frequencies(n: u64) -> BTreeSet<i64> {
    assert!(n >= 3);
    let k = floor_log2_strict(n);
    let mut t: BTreeSet<i64> = BTreeSet::from([0]);
    for i in 0..k {
        t.insert(1 << i);
        t.insert(-(1i64 << i));
    }
    let bits = bit_positions(n);
    let mut sum = 0i64;
    for i in 0..bits.len().saturating_sub(2) {
        sum += 1 << bits[i];
        t.insert(sum);
    }
    t
}

/// Reduces an integer frequency set into a residue set of the given cyclic
/// group (rank 1).
pub fn residues(group: &GroupSpec, freqs: &BTreeSet<i64>) -> BTreeSet<GroupElement> {
    freqs
        .iter()
        .map(|&f| group.element(&[f]).expect("rank-1 group"))
        .collect()
}

// --- Cycle triangulation ------------------------------------------------

struct Tri {
    verts: [u64; 3],
    shift: i64,
}

/// Recursive fan triangulation of the path lo..hi on the cycle. Splits at
/// the largest power of two below the length; translations send each
/// triangle near the origin.
fn triangulate(lo: u64, hi: u64, chords: &mut Vec<(u64, u64)>, tris: &mut Vec<Tri>) {
    match hi - lo {
        0 | 1 => {}
        2 => tris.push(Tri {
            verts: [lo, lo + 1, lo + 2],
            shift: -((lo + 1) as i64),
        }),
        3 => {
            chords.push((lo, lo + 2));
            tris.push(Tri {
                verts: [lo, lo + 1, lo + 2],
                shift: -((lo + 1) as i64),
            });
            tris.push(Tri {
                verts: [lo, lo + 2, lo + 3],
                shift: -((lo + 2) as i64),
            });
        }
        n => {
            let m = lo + (1u64 << floor_log2_strict(n));
            chords.push((lo, m));
            chords.push((m, hi));
            tris.push(Tri {
                verts: [lo, m, hi],
                shift: -(m as i64),
            });
            triangulate(lo, m, chords, tris);
            triangulate(m, hi, chords, tris);
        }
    }
}

fn cycle_base_graph(n: u64) -> Graph {
    let mut g = Graph::new((0..n).map(|i| vec![i]).collect()).unwrap();
    for i in 0..n as usize {
        let j = (i + 1) % n as usize;
        if i != j {
            g.add_edge(i.min(j), i.max(j));
        }
    }
    g
}

/// Triangulation of the (N+1)-cycle over Z_{N+1}, built by recursive
/// splitting at powers of two. The support is contained in the integer
/// frequency formula (exactly equal when N is a power of two).
pub fn cycle_plus_one_cover(n: u64) -> Result<ChordalCover> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "cycle triangulation needs N >= 2".into(),
        ));
    }
    let group = make_group(&[n + 1])?;
    let base = cycle_base_graph(n + 1);
    let mut chords = Vec::new();
    let mut tris = Vec::new();
    triangulate(0, n, &mut chords, &mut tris);
    let mut cover = base.clone();
    for (a, b) in chords {
        cover.add_edge(
            cover.index_of(&vec![a]).unwrap(),
            cover.index_of(&vec![b]).unwrap(),
        );
    }
    let declared = tris
        .iter()
        .map(|t| {
            let c: BTreeSet<Label> = t.verts.iter().map(|&v| vec![v]).collect();
            (c, group.element(&[t.shift]).unwrap())
        })
        .collect();
    ChordalCover::assemble(group, base, cover, declared)
}

/// Triangulation of the N-cycle, obtained by contracting vertex N onto 0 in
/// the (N+1)-cycle triangulation. Its Fourier support realizes the binary
/// expansion frequency formula.
pub fn cycle_cover(n: u64) -> Result<ChordalCover> {
    if n < 3 {
        return Err(Error::InvalidParameter("cycle cover needs N >= 3".into()));
    }
    let group = make_group(&[n])?;
    let base = cycle_base_graph(n);
    let mut chords = Vec::new();
    let mut tris = Vec::new();
    triangulate(0, n, &mut chords, &mut tris);
    let mut cover = base.clone();
    for (a, b) in chords {
        let (a, b) = (a % n, b % n);
        if a != b {
            cover.add_edge(
                cover.index_of(&vec![a]).unwrap(),
                cover.index_of(&vec![b]).unwrap(),
            );
        }
    }
    let mut declared: Vec<(BTreeSet<Label>, GroupElement)> = Vec::new();
    let mut seen: BTreeSet<BTreeSet<Label>> = BTreeSet::new();
    for t in &tris {
        let c: BTreeSet<Label> = t.verts.iter().map(|&v| vec![v % n]).collect();
        if c.len() == 3 && seen.insert(c.clone()) {
            declared.push((c, group.element(&[t.shift]).unwrap()));
        }
    }
    ChordalCover::assemble(group, base, cover, declared)
}

/// Chordal cover of Cay(Ẑ_N, {−d..d}) as a strong product of the N/d-cycle
/// cover with K_d, via the identification x = qd + r. Clique translations
/// scale by d.
pub fn power_cycle_cover(n: u64, d: u64) -> Result<ChordalCover> {
    if d == 0 || n < 2 {
        return Err(Error::InvalidParameter(
            "power cycle cover needs N >= 2 and d >= 1".into(),
        ));
    }
    if n % d != 0 {
        return Err(Error::NotDivisible {
            n,
            d,
            suggestion: smallest_divisor_geq(n, d),
        });
    }
    if d == 1 {
        return cycle_cover(n);
    }
    let q = n / d;
    if q < 2 {
        return Err(Error::InvalidParameter(
            "power cycle cover needs N/d >= 2".into(),
        ));
    }
    let inner = if q >= 3 {
        cycle_cover(q)?
    } else {
        // Two fibers: the base collapses to a single edge with a single
        // clique and trivial translation.
        let group = make_group(&[2])?;
        let mut base = Graph::new(vec![vec![0], vec![1]])?;
        base.add_edge(0, 1);
        let declared = vec![(
            BTreeSet::from([vec![0], vec![1]]),
            group.identity(),
        )];
        ChordalCover::assemble(group.clone(), base.clone(), base, declared)?
    };

    let group = make_group(&[n])?;
    let mut base = Graph::new((0..n).map(|x| vec![x]).collect())?;
    for x in 0..n {
        for j in 1..=d {
            let y = (x + j) % n;
            if y != x {
                base.add_edge(x as usize, y as usize);
            }
        }
    }
    let mut cover = base.clone();
    // Fibers are complete; adjacent inner-cover vertices connect all fibers.
    for qv in 0..q {
        for r in 0..d {
            for s in (r + 1)..d {
                cover.add_edge((qv * d + r) as usize, (qv * d + s) as usize);
            }
        }
    }
    for (i, j) in inner.cover().edges() {
        let (qa, qb) = (inner.cover().label(i)[0], inner.cover().label(j)[0]);
        for r in 0..d {
            for s in 0..d {
                cover.add_edge((qa * d + r) as usize, (qb * d + s) as usize);
            }
        }
    }
    let mut declared = Vec::new();
    for (ci, clique) in inner.cliques().iter().enumerate() {
        let verts: BTreeSet<Label> = clique
            .iter()
            .flat_map(|&v| {
                let qv = inner.cover().label(v)[0];
                (0..d).map(move |r| vec![qv * d + r])
            })
            .collect();
        let k = inner.translations()[ci].coords()[0];
        declared.push((verts, group.element(&[(d * k) as i64])?));
    }
    ChordalCover::assemble(group, base, cover, declared)
}

/// Chordal cover of the half-cube Cayley graph on Z_2^n (generators: all
/// subsets of size 2). Cliques pair consecutive weight levels of one
/// parity, plus their images under flipping the first coordinate; the
/// support keeps only weights up to ceil(n/2).
pub fn halfcube_cover(n: u64) -> Result<ChordalCover> {
    if !(2..=16).contains(&n) {
        return Err(Error::InvalidParameter(
            "half-cube cover needs 2 <= n <= 16".into(),
        ));
    }
    let nn = n as usize;
    let group = make_group(&vec![2; nn])?;
    let all: Vec<Label> = group.elements().map(|e| e.coords().to_vec()).collect();
    let mut base = Graph::new(all.clone())?;
    for label in &all {
        let i = base.index_of(label).unwrap();
        for a in 0..nn {
            for b in (a + 1)..nn {
                let mut other = label.clone();
                other[a] ^= 1;
                other[b] ^= 1;
                let j = base.index_of(&other).unwrap();
                if i < j {
                    base.add_edge(i, j);
                }
            }
        }
    }
    let weight = |l: &Label| l.iter().filter(|&&c| c == 1).count() as u64;
    let phi = |l: &Label| {
        let mut out = l.clone();
        out[0] ^= 1;
        out
    };
    let level = |k: u64| -> Vec<Label> { all.iter().filter(|l| weight(l) == k).cloned().collect() };

    let h = n.div_ceil(2);
    let (parity, limit) = if h % 2 == 0 {
        (0i64, if n % 2 == 0 { n as i64 - 2 } else { n as i64 - 3 })
    } else {
        (1i64, (2 * h as i64 - 3).max(1))
    };
    let full: Label = vec![1; nn];
    let mut declared: Vec<(BTreeSet<Label>, GroupElement)> = Vec::new();
    let mut k = parity;
    while k <= limit {
        let ku = k as u64;
        let mut clique: BTreeSet<Label> = level(ku).into_iter().collect();
        if ku + 2 <= n {
            clique.extend(level(ku + 2));
        }
        let shift: Label = if k <= h as i64 - 2 {
            vec![0; nn]
        } else if n % 2 == 0 {
            full.clone()
        } else {
            phi(&full)
        };
        let phi_clique: BTreeSet<Label> = clique.iter().map(&phi).collect();
        let phi_shift = phi(&shift);
        declared.push((clique, label_to_element(&group, &shift)));
        declared.push((phi_clique, label_to_element(&group, &phi_shift)));
        k += 2;
    }
    let mut cover = base.clone();
    for (c, _) in &declared {
        let idx: Vec<usize> = c.iter().map(|l| cover.index_of(l).unwrap()).collect();
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                cover.add_edge(i, j);
            }
        }
    }
    ChordalCover::assemble(group, base, cover, declared)
}

/// The explicit hexagon cover with hand-picked translations achieving the
/// four-element support {−1, 0, 1, 3} on Z_6.
pub fn hexagon_cover() -> ChordalCover {
    let group = make_group(&[6]).unwrap();
    let base = cycle_base_graph(6);
    let mut cover = base.clone();
    for (a, b) in [(1u64, 3u64), (3, 5), (0, 3)] {
        cover.add_edge(
            cover.index_of(&vec![a]).unwrap(),
            cover.index_of(&vec![b]).unwrap(),
        );
    }
    let declared = vec![
        (
            BTreeSet::from([vec![0], vec![1], vec![3]]),
            group.element(&[0]).unwrap(),
        ),
        (
            BTreeSet::from([vec![1], vec![2], vec![3]]),
            group.element(&[-2]).unwrap(),
        ),
        (
            BTreeSet::from([vec![3], vec![4], vec![5]]),
            group.element(&[-4]).unwrap(),
        ),
        (
            BTreeSet::from([vec![0], vec![3], vec![5]]),
            group.element(&[0]).unwrap(),
        ),
    ];
    ChordalCover::assemble(group, base, cover, declared).expect("hexagon cover is valid")
}

/// Translation search strategy for `find_translations`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TranslationStrategy {
    /// Cliques by decreasing size; each picks the character minimizing the
    /// running support size, ties by smallest canonical character.
    Greedy,
    /// Full search over all translation tuples (small instances only).
    Exhaustive,
}

/// Assigns clique translations for an arbitrary chordal cover of a Cayley
/// graph, minimizing (greedily or exhaustively) the Fourier support size.
pub fn find_translations(
    group: &GroupSpec,
    base: &Graph,
    cover: &Graph,
    strategy: TranslationStrategy,
) -> Result<ChordalCover> {
    if group.order() > 4096 {
        return Err(Error::InvalidParameter(
            "translation search limited to groups of order <= 4096".into(),
        ));
    }
    if base.labels() != cover.labels() || !base.is_covered_by(cover) {
        return Err(Error::Inconsistent(
            "cover does not contain the base graph".into(),
        ));
    }
    let peo = is_chordal(cover)
        .ok_or_else(|| Error::BadCertificate("cover graph is not chordal".into()))?;
    let cliques = maximal_cliques_chordal(cover, &peo)?;
    let clique_elems: Vec<Vec<GroupElement>> = cliques
        .iter()
        .map(|c| {
            c.iter()
                .map(|&v| label_to_element(group, cover.label(v)))
                .collect()
        })
        .collect();
    let chars: Vec<GroupElement> = group.elements().collect();

    let translations: Vec<GroupElement> = match strategy {
        TranslationStrategy::Greedy => {
            let mut order: Vec<usize> = (0..cliques.len()).collect();
            order.sort_by_key(|&i| (std::cmp::Reverse(cliques[i].len()), i));
            let mut t: BTreeSet<GroupElement> = BTreeSet::new();
            let mut picks: Vec<Option<GroupElement>> = vec![None; cliques.len()];
            for &i in &order {
                let best = chars
                    .iter()
                    .min_by_key(|chi| {
                        let new = clique_elems[i]
                            .iter()
                            .filter(|v| !t.contains(&group.mul(chi, v)))
                            .count();
                        (new, (*chi).clone())
                    })
                    .unwrap()
                    .clone();
                for v in &clique_elems[i] {
                    t.insert(group.mul(&best, v));
                }
                picks[i] = Some(best);
            }
            picks.into_iter().map(Option::unwrap).collect()
        }
        TranslationStrategy::Exhaustive => {
            let m = cliques.len();
            let combos = (group.order() as u128).checked_pow(m as u32);
            if combos.is_none_or(|c| c > 1_000_000) {
                return Err(Error::InvalidParameter(
                    "exhaustive translation search is too large".into(),
                ));
            }
            let mut best: Option<(usize, Vec<GroupElement>)> = None;
            let mut idx = vec![0usize; m];
            loop {
                let mut t = BTreeSet::new();
                for (i, &c) in idx.iter().enumerate() {
                    for v in &clique_elems[i] {
                        t.insert(group.mul(&chars[c], v));
                    }
                }
                let tuple: Vec<GroupElement> =
                    idx.iter().map(|&c| chars[c].clone()).collect();
                if best.as_ref().is_none_or(|(s, _)| t.len() < *s) {
                    best = Some((t.len(), tuple));
                }
                // Odometer increment.
                let mut pos = m;
                while pos > 0 {
                    idx[pos - 1] += 1;
                    if idx[pos - 1] < chars.len() {
                        break;
                    }
                    idx[pos - 1] = 0;
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
            }
            best.unwrap().1
        }
    };

    let declared = cliques
        .iter()
        .zip(&translations)
        .map(|(c, t)| {
            let labels: BTreeSet<Label> = cover.labels_of(c).into_iter().collect();
            (labels, t.clone())
        })
        .collect();
    ChordalCover::assemble(group.clone(), base.clone(), cover.clone(), declared)
}

/// Smallest divisor of N that is at least d (returns d itself when d | N).
pub fn smallest_divisor_geq(n: u64, d: u64) -> u64 {
    assert!((1..=n).contains(&d));
    (d..=n).find(|x| n % x == 0).unwrap()
}

// --- JSON wire format ---------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CliqueJson {
    vertices: Vec<Label>,
    translation: Label,
}

#[derive(Serialize, Deserialize)]
struct CoverJson {
    group: Vec<u64>,
    base_edges: Vec<[Label; 2]>,
    cover_edges: Vec<[Label; 2]>,
    cliques: Vec<CliqueJson>,
    fourier_support: Vec<Label>,
}

impl ChordalCover {
    pub fn to_json(&self) -> String {
        let edge_labels = |g: &Graph| {
            g.edges()
                .iter()
                .map(|&(i, j)| [g.label(i).clone(), g.label(j).clone()])
                .collect()
        };
        let doc = CoverJson {
            group: self.group.moduli().to_vec(),
            base_edges: edge_labels(&self.base),
            cover_edges: edge_labels(&self.cover),
            cliques: self
                .cliques
                .iter()
                .zip(&self.translations)
                .map(|(c, t)| CliqueJson {
                    vertices: self.cover.labels_of(c),
                    translation: t.coords().to_vec(),
                })
                .collect(),
            fourier_support: self.fourier_support.iter().map(|e| e.coords().to_vec()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("cover serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CoverJson = serde_json::from_str(text)?;
        let group = make_group(&doc.group)?;
        let labels: Vec<Label> = group.elements().map(|e| e.coords().to_vec()).collect();
        let mut base = Graph::new(labels.clone())?;
        for [a, b] in &doc.base_edges {
            let (Some(i), Some(j)) = (base.index_of(a), base.index_of(b)) else {
                return Err(Error::Parse(format!("unknown vertex in edge {a:?}-{b:?}")));
            };
            base.add_edge(i, j);
        }
        let mut cover = Graph::new(labels)?;
        for [a, b] in &doc.cover_edges {
            let (Some(i), Some(j)) = (cover.index_of(a), cover.index_of(b)) else {
                return Err(Error::Parse(format!("unknown vertex in edge {a:?}-{b:?}")));
            };
            cover.add_edge(i, j);
        }
        let declared = doc
            .cliques
            .into_iter()
            .map(|c| {
                (
                    c.vertices.into_iter().collect::<BTreeSet<Label>>(),
                    label_to_element(&group, &c.translation),
                )
            })
            .collect();
        let out = Self::assemble(group, base, cover, declared)?;
        let support: BTreeSet<GroupElement> = doc
            .fourier_support
            .iter()
            .map(|l| label_to_element(&out.group, l))
            .collect();
        if support != out.fourier_support {
            return Err(Error::Parse(
                "stored Fourier support disagrees with the translated cliques".into(),
            ));
        }
        Ok(out)
    }
}
