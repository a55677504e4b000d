//! Dense Hermitian matrix kernel: PSD testing, clique-based decomposition
//! of sparse PSD matrices, PSD completion of partial matrices with chordal
//! patterns, rank factorization, group averaging, and Hermitian-to-real
//! reductions.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abelian::{GroupElement, GroupSpec};
use crate::error::{Error, Result};
use crate::graphs::{
    is_chordal, maximal_cliques_chordal, verify_peo, EliminationOrder, Graph, Label,
};

/// Relative PSD tolerance used throughout.
pub const PSD_TOL: f64 = 1e-8;
/// Relative pseudo-inverse cutoff.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Hermitian symmetry tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense Hermitian matrix with labelled rows/columns (character labels).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    labels: Vec<Label>,
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Builds a matrix, enforcing unique labels and Hermitian symmetry
    /// within tolerance (the stored matrix is exactly symmetrized).
    pub fn new(labels: Vec<Label>, data: DMatrix<Complex64>) -> Result<Self> {
        let n = labels.len();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::Shape(format!(
                "{} labels for a {}x{} matrix",
                n,
                data.nrows(),
                data.ncols()
            )));
        }
        if labels.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidParameter("duplicate matrix label".into()));
        }
        let scale = data.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let mut sym = data.clone();
        for i in 0..n {
            for j in 0..n {
                let d = (data[(i, j)] - data[(j, i)].conj()).norm();
                if d > HERMITIAN_TOL * scale {
                    return Err(Error::Shape(format!(
                        "not Hermitian at ({i}, {j}): asymmetry {d:e}"
                    )));
                }
                sym[(i, j)] = (data[(i, j)] + data[(j, i)].conj()) * 0.5;
            }
        }
        Ok(HermitianMatrix { labels, data: sym })
    }

    pub fn zeros(labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigenvalues in ascending order (self-adjoint solver).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (mut vals, _) = eigh(&self.data);
        vals.sort_by(f64::total_cmp);
        vals
    }

    /// PSD test: λ_min ≥ −tol·max(1, λ_max). Returns the verdict together
    /// with the minimum eigenvalue.
    pub fn is_psd(&self, tol: f64) -> (bool, f64) {
        if self.n() == 0 {
            return (true, 0.0);
        }
        let vals = self.eigenvalues();
        let (min, max) = (vals[0], vals[vals.len() - 1]);
        (min >= -tol * max.max(1.0), min)
    }
}

/// A partial Hermitian matrix: entries specified on the diagonal and on a
/// symmetric set of off-diagonal positions.
#[derive(Clone, Debug)]
pub struct PartialMatrix {
    labels: Vec<Label>,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl PartialMatrix {
    pub fn new(labels: Vec<Label>, entries: BTreeMap<(usize, usize), Complex64>) -> Result<Self> {
        let n = labels.len();
        if labels.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidParameter("duplicate matrix label".into()));
        }
        let scale = entries.values().map(|z| z.norm()).fold(1.0f64, f64::max);
        for (&(i, j), &v) in &entries {
            if i >= n || j >= n {
                return Err(Error::Shape(format!("entry ({i}, {j}) out of range")));
            }
            let Some(&w) = entries.get(&(j, i)) else {
                return Err(Error::Shape(format!("entry ({j}, {i}) missing")));
            };
            if (v - w.conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::Shape(format!(
                    "entries ({i}, {j}) and ({j}, {i}) are not conjugate"
                )));
            }
        }
        for i in 0..n {
            if !entries.contains_key(&(i, i)) {
                return Err(Error::Shape(format!("diagonal entry {i} missing")));
            }
        }
        Ok(PartialMatrix { labels, entries })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> Option<Complex64> {
        self.entries.get(&(i, j)).copied()
    }

    pub fn specified(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.keys().copied()
    }
}

/// Self-adjoint eigendecomposition (faer — nalgebra's symmetric solver
/// silently returns wrong eigenpairs on some well-conditioned inputs).
/// Rows that are exactly zero are deflated first, since clique-supported
/// pieces are mostly zero by construction; they reappear as explicit
/// kernel directions. Eigenvalues ascend within the live block.
fn eigh(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let n = m.nrows();
    let live: Vec<usize> = (0..n)
        .filter(|&i| (0..n).any(|j| m[(i, j)] != Complex64::ZERO))
        .collect();
    let k = live.len();
    let a = faer::Mat::from_fn(k, k, |i, j| m[(live[i], live[j])]);
    let eig = a
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("self-adjoint eigensolver converged");
    let mut vals = Vec::with_capacity(n);
    let mut vecs = Vec::with_capacity(n);
    for c in 0..k {
        vals.push(eig.S()[c].re);
        let mut v = DVector::zeros(n);
        for (a, &i) in live.iter().enumerate() {
            v[i] = eig.U()[(a, c)];
        }
        vecs.push(v);
    }
    // Kernel directions for the deflated rows.
    for i in (0..n).filter(|i| !live.contains(i)) {
        vals.push(0.0);
        let mut v = DVector::zeros(n);
        v[i] = Complex64::ONE;
        vecs.push(v);
    }
    (vals, vecs)
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Splits a PSD matrix that is sparse according to a chordal cover into
/// PSD pieces supported on the maximal cliques, one piece per clique,
/// summing back to the input. Elimination follows the PEO; each vertex
/// contributes a rank-one Schur piece assigned to the first maximal clique
/// containing its closed later-neighborhood.
pub fn chordal_decompose(
    q: &HermitianMatrix,
    cover: &Graph,
    peo: &EliminationOrder,
    cliques: &[BTreeSet<usize>],
) -> Result<Vec<HermitianMatrix>> {
    let n = q.n();
    if q.labels() != cover.labels() {
        return Err(Error::Shape("matrix labels must match cover vertices".into()));
    }
    if !verify_peo(cover, peo) {
        return Err(Error::BadCertificate(
            "order is not a perfect elimination ordering of the cover".into(),
        ));
    }
    let (ok, min_eig) = q.is_psd(PSD_TOL);
    if !ok {
        return Err(Error::NotPsd { min_eig });
    }
    let norm = q.norm();
    for i in 0..n {
        for j in (i + 1)..n {
            if !cover.has_edge(i, j) && q.entry(i, j).norm() > 1e-10 * norm.max(1.0) {
                return Err(Error::SparsityViolation { i, j });
            }
        }
    }

    let mut pos = vec![0usize; n];
    for (p, &v) in peo.order.iter().enumerate() {
        pos[v] = p;
    }
    let mut rem = q.data().clone();
    let mut pieces: Vec<DMatrix<Complex64>> =
        vec![DMatrix::zeros(n, n); cliques.len()];
    let pivot_floor = 1e-12 * norm.max(1.0);
    for (p, &v) in peo.order.iter().enumerate() {
        let mut d: Vec<usize> = cover
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| pos[u] > p)
            .collect();
        d.push(v);
        d.sort_unstable();
        let pivot = rem[(v, v)].re;
        if pivot <= pivot_floor {
            // Numerically zero pivot: the row must vanish too.
            let worst = d
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| rem[(v, u)].norm())
                .fold(0.0f64, f64::max);
            if worst > PSD_TOL * norm.max(1.0) {
                return Err(Error::NotPsd {
                    min_eig: -worst * worst / pivot_floor,
                });
            }
            for &u in &d {
                rem[(v, u)] = Complex64::ZERO;
                rem[(u, v)] = Complex64::ZERO;
            }
            continue;
        }
        let target = cliques
            .iter()
            .position(|c| d.iter().all(|u| c.contains(u)))
            .ok_or_else(|| {
                Error::Inconsistent("eliminated neighborhood escapes all cliques".into())
            })?;
        let col: Vec<Complex64> = d.iter().map(|&a| rem[(a, v)]).collect();
        for (ai, &a) in d.iter().enumerate() {
            for (bi, &b) in d.iter().enumerate() {
                let delta = col[ai] * col[bi].conj() / pivot;
                pieces[target][(a, b)] += delta;
                rem[(a, b)] -= delta;
            }
        }
    }

    // Safety: the pieces must reconstruct Q.
    let mut sum = DMatrix::zeros(n, n);
    for piece in &pieces {
        sum += piece;
    }
    if frobenius(&(sum - q.data())) > 1e-8 * norm.max(1.0) {
        return Err(Error::Inconsistent(
            "clique pieces fail to reconstruct the input".into(),
        ));
    }
    pieces
        .into_iter()
        .map(|piece| HermitianMatrix::new(q.labels().to_vec(), piece))
        .collect()
}

/// Moore-Penrose pseudo-inverse of a Hermitian block via eigendecomposition.
fn pinv_hermitian(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (vals, vecs) = eigh(m);
    let cutoff = PINV_CUTOFF * vals.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (v, &lam) in vecs.iter().zip(&vals) {
        if lam.abs() > cutoff {
            out += DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
                v[i] * v[j].conj() / Complex::from(lam)
            });
        }
    }
    out
}

/// Completes a partial Hermitian matrix with a chordal specification
/// pattern to a full PSD matrix, clique tree by clique tree. Fails with the
/// offending clique if some clique block is not PSD.
pub fn chordal_complete(x: &PartialMatrix, g: &Graph) -> Result<HermitianMatrix> {
    let n = x.n();
    if x.labels() != g.labels() {
        return Err(Error::Shape("partial matrix labels must match graph".into()));
    }
    let peo = is_chordal(g)
        .ok_or_else(|| Error::BadCertificate("pattern graph is not chordal".into()))?;
    let mut wanted: BTreeSet<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for (i, j) in g.edges() {
        wanted.insert((i, j));
        wanted.insert((j, i));
    }
    let have: BTreeSet<(usize, usize)> = x.specified().collect();
    if have != wanted {
        return Err(Error::Inconsistent(
            "specified positions must be the diagonal plus the graph edges".into(),
        ));
    }
    let cliques = maximal_cliques_chordal(g, &peo)?;
    let block = |c: &[usize]| {
        DMatrix::from_fn(c.len(), c.len(), |a, b| x.get(c[a], c[b]).unwrap())
    };
    for c in &cliques {
        let idx: Vec<usize> = c.iter().copied().collect();
        let h = HermitianMatrix::new(
            idx.iter().map(|&i| g.label(i).clone()).collect(),
            block(&idx),
        )?;
        let (ok, min_eig) = h.is_psd(PSD_TOL);
        if !ok {
            return Err(Error::Infeasible {
                clique: format!("{:?}", g.labels_of(c)),
                min_eig,
            });
        }
    }

    // Maximum-weight spanning tree on separator sizes (Prim, deterministic).
    let m = cliques.len();
    let mut in_tree = vec![false; m];
    in_tree[0] = true;
    let mut tree_order: Vec<usize> = vec![0];
    let mut parent = vec![0usize; m];
    for _ in 1..m {
        let mut best: Option<(usize, usize, usize)> = None; // (weight, next, parent)
        for &t in &tree_order {
            for c in 0..m {
                if !in_tree[c] {
                    let w = cliques[t].intersection(&cliques[c]).count();
                    if best.is_none_or(|(bw, bc, _)| w > bw || (w == bw && c < bc)) {
                        best = Some((w, c, t));
                    }
                }
            }
        }
        let (_, c, t) = best.unwrap();
        in_tree[c] = true;
        parent[c] = t;
        tree_order.push(c);
    }
    let _ = parent;

    let mut y: DMatrix<Complex64> = DMatrix::zeros(n, n);
    let mut placed: Vec<usize> = Vec::new();
    for (step, &ci) in tree_order.iter().enumerate() {
        let c: Vec<usize> = cliques[ci].iter().copied().collect();
        if step == 0 {
            for &a in &c {
                for &b in &c {
                    y[(a, b)] = x.get(a, b).unwrap();
                }
            }
            placed = c;
            continue;
        }
        let placed_set: BTreeSet<usize> = placed.iter().copied().collect();
        let sep: Vec<usize> = c.iter().copied().filter(|v| placed_set.contains(v)).collect();
        let new: Vec<usize> = c.iter().copied().filter(|v| !placed_set.contains(v)).collect();
        if new.is_empty() {
            continue;
        }
        let rest: Vec<usize> = placed
            .iter()
            .copied()
            .filter(|v| !sep.contains(v))
            .collect();
        // Known entries inside the clique.
        for &a in &c {
            for &b in &c {
                if let Some(v) = x.get(a, b) {
                    y[(a, b)] = v;
                }
            }
        }
        if !sep.is_empty() && !rest.is_empty() {
            let b_ws = DMatrix::from_fn(new.len(), sep.len(), |i, j| y[(new[i], sep[j])]);
            let c_ss = DMatrix::from_fn(sep.len(), sep.len(), |i, j| y[(sep[i], sep[j])]);
            let d_su = DMatrix::from_fn(sep.len(), rest.len(), |i, j| y[(sep[i], rest[j])]);
            let fill = &b_ws * pinv_hermitian(&c_ss) * &d_su;
            for (i, &a) in new.iter().enumerate() {
                for (j, &b) in rest.iter().enumerate() {
                    y[(a, b)] = fill[(i, j)];
                    y[(b, a)] = fill[(i, j)].conj();
                }
            }
        }
        // Empty separator: the blocks stay zero.
        placed.extend(new);
    }

    // Exact agreement on the specified pattern.
    for (i, j) in x.specified() {
        y[(i, j)] = x.get(i, j).unwrap();
    }
    HermitianMatrix::new(x.labels().to_vec(), y)
}

/// Rank factorization Q = Σ_k a_k a_k*. Eigenvalues at or below
/// tol·λ_max are dropped, so the count equals the numerical rank.
pub fn psd_factor(q: &HermitianMatrix, tol: f64) -> Result<Vec<DVector<Complex64>>> {
    let (ok, min_eig) = q.is_psd(tol);
    if !ok {
        return Err(Error::NotPsd { min_eig });
    }
    let (vals, vecs) = eigh(q.data());
    let lam_max = vals.iter().copied().fold(0.0f64, f64::max);
    let mut out = Vec::new();
    for (v, &lam) in vecs.iter().zip(&vals) {
        if lam > tol * lam_max.max(1.0) {
            let scale = Complex::from(lam.max(0.0).sqrt());
            out.push(v.map(|z| z * scale));
        }
    }
    Ok(out)
}

/// Averages a matrix indexed by the full character group over simultaneous
/// translation of rows and columns: Z_{χ,χ′} = (1/|Ĝ|) Σ_λ Y_{λ̄χ,λ̄χ′}.
/// The result is translation invariant, i.e. a moment matrix.
pub fn group_average(y: &HermitianMatrix, group: &GroupSpec) -> Result<HermitianMatrix> {
    let n = group.order() as usize;
    let expected: Vec<Label> = group.elements().map(|e| e.coords().to_vec()).collect();
    if y.labels() != expected.as_slice() {
        return Err(Error::Shape(
            "matrix must be labelled by the full character group in order".into(),
        ));
    }
    let elems: Vec<GroupElement> = group.elements().collect();
    let index: BTreeMap<&GroupElement, usize> =
        elems.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut z: DMatrix<Complex64> = DMatrix::zeros(n, n);
    for lam in &elems {
        let lam_inv = group.inv(lam);
        let perm: Vec<usize> = elems
            .iter()
            .map(|chi| index[&group.mul(&lam_inv, chi)])
            .collect();
        for i in 0..n {
            for j in 0..n {
                z[(i, j)] += y.entry(perm[i], perm[j]);
            }
        }
    }
    z /= Complex::from(n as f64);
    HermitianMatrix::new(y.labels().to_vec(), z)
}

/// Hermitian-to-real reduction through an equalizing involution given as an
/// index permutation σ: returns R = Re[M] − J·Im[M] with (J A)_i = A_{σ(i)}.
/// Requires M to satisfy J M J = conj(M) within tolerance; then R is
/// symmetric and PSD iff M is.
pub fn real_reduction(m: &HermitianMatrix, sigma: &[usize]) -> Result<DMatrix<f64>> {
    let n = m.n();
    if sigma.len() != n {
        return Err(Error::Shape("involution size mismatch".into()));
    }
    for (i, &s) in sigma.iter().enumerate() {
        if s >= n || sigma[s] != i {
            return Err(Error::BadInvolution(format!(
                "index map is not an involution at {i}"
            )));
        }
    }
    let scale = m.norm().max(1.0);
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = (m.entry(sigma[i], sigma[j]) - m.entry(i, j).conj()).norm();
            defect += d * d;
        }
    }
    let defect = defect.sqrt();
    if defect > 1e-10 * scale {
        return Err(Error::NotInvariant(defect));
    }
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            r[(i, j)] = m.entry(i, j).re - m.entry(sigma[i], j).im;
        }
    }
    // Symmetry follows from the invariance; symmetrize exactly.
    let rt = r.transpose();
    Ok((r + rt) * 0.5)
}

/// Standard embedding of a Hermitian matrix as a real symmetric matrix of
/// doubled size, [[Re, Im], [−Im, Re]]; each eigenvalue appears twice.
pub fn complex_to_real_embed(m: &HermitianMatrix) -> DMatrix<f64> {
    let n = m.n();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m.entry(i, j);
            out[(i, j)] = z.re;
            out[(i, j + n)] = z.im;
            out[(i + n, j)] = -z.im;
            out[(i + n, j + n)] = z.re;
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let a = faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    a.self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("self-adjoint eigensolver converged")
}

// --- JSON wire format ---------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    labels: Vec<Label>,
    entries: Vec<[f64; 2]>,
}

impl HermitianMatrix {
    pub fn to_json(&self) -> String {
        let doc = MatrixJson {
            labels: self.labels.clone(),
            entries: self
                .data
                .row_iter()
                .flat_map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MatrixJson = serde_json::from_str(text)?;
        let n = doc.labels.len();
        if doc.entries.len() != n * n {
            return Err(Error::Parse(format!(
                "expected {} entries, found {}",
                n * n,
                doc.entries.len()
            )));
        }
        let data = DMatrix::from_fn(n, n, |i, j| {
            let [re, im] = doc.entries[i * n + j];
            Complex64::new(re, im)
        });
        Self::new(doc.labels, data)
    }
}
