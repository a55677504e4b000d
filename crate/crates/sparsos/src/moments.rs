//! The dual side: moment vectors, truncated moment matrices, equalizing
//! involutions, and PSD lift descriptions of moment polytopes, with JSON
//! and SDPA export.
//!
//! A lift description is symbolic: the matrix entries reference canonical
//! moment variables (one per conjugate pair in T⁻¹T), and the pins record
//! which variables are fixed to 1 or identified with projection coordinates.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::abelian::{FourierFunction, GroupElement, GroupSpec};
use crate::covers::ChordalCover;
use crate::error::{Error, Result};
use crate::graphs::cayley_graph;
use crate::hermitian::{chordal_complete, group_average, HermitianMatrix, PartialMatrix};

/// A point of (a candidate for) the moment polytope: one complex value per
/// character in S.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    group: GroupSpec,
    values: BTreeMap<GroupElement, Complex64>,
}

impl MomentVector {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn values(&self) -> &BTreeMap<GroupElement, Complex64> {
        &self.values
    }

    pub fn value(&self, chi: &GroupElement) -> Option<Complex64> {
        self.values.get(chi).copied()
    }
}

/// The vertex of the moment polytope attached to a group element:
/// values[χ] = χ(x).
pub fn moment_vertex(group: &GroupSpec, s: &BTreeSet<GroupElement>, x: &GroupElement) -> MomentVector {
    let values = s
        .iter()
        .map(|chi| (chi.clone(), group.char_eval(chi, x)))
        .collect();
    MomentVector {
        group: group.clone(),
        values,
    }
}

/// Canonical representative of a conjugate pair: the smaller of {χ, χ̄} in
/// coordinate order, plus a flag telling whether χ is the conjugated one.
pub fn canonical_rep(group: &GroupSpec, chi: &GroupElement) -> (GroupElement, bool) {
    let inv = group.inv(chi);
    if inv < *chi {
        (inv, true)
    } else {
        (chi.clone(), false)
    }
}

/// Looks up y_χ in an assignment keyed by canonical representatives,
/// applying conjugation as needed.
fn lookup_moment(
    group: &GroupSpec,
    y: &BTreeMap<GroupElement, Complex64>,
    chi: &GroupElement,
) -> Result<Complex64> {
    if let Some(&v) = y.get(chi) {
        return Ok(v);
    }
    let inv = group.inv(chi);
    if let Some(&v) = y.get(&inv) {
        return Ok(v.conj());
    }
    Err(Error::IncompleteMoments(format!("{chi}")))
}

/// The truncated moment matrix [M_T(y)]_{χ,χ′} = y_{χ̄χ′} for χ, χ′ ∈ T.
pub fn truncated_moment_matrix(
    group: &GroupSpec,
    t: &[GroupElement],
    y: &BTreeMap<GroupElement, Complex64>,
) -> Result<HermitianMatrix> {
    let n = t.len();
    let mut data = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let eta = group.mul(&group.inv(&t[i]), &t[j]);
            data[(i, j)] = lookup_moment(group, y, &eta)?;
        }
    }
    let labels = t.iter().map(|e| e.coords().to_vec()).collect();
    HermitianMatrix::new(labels, data)
}

/// A reference to a canonical moment variable, possibly conjugated.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryRef {
    pub var: GroupElement,
    pub conj: bool,
}

impl EntryRef {
    fn eval(&self, y: &BTreeMap<GroupElement, Complex64>) -> Result<Complex64> {
        let v = y
            .get(&self.var)
            .copied()
            .ok_or_else(|| Error::IncompleteMoments(format!("{}", self.var)))?;
        Ok(if self.conj { v.conj() } else { v })
    }
}

/// One symbolic matrix entry of a lift.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixEntry {
    /// Hermitian mode: the complex value of the referenced variable.
    Value(EntryRef),
    /// Real mode: Re of the first reference minus Im of the second.
    ReMinusIm { re: EntryRef, im: EntryRef },
}

/// How a canonical variable is pinned by the lift's equality constraints.
#[derive(Clone, Debug, PartialEq)]
pub enum Pin {
    /// y_{1_Ĝ} = 1.
    Constant,
    /// y_χ = ℓ_χ: the variable is a projection coordinate.
    Coordinate(GroupElement),
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiftMode {
    Hermitian,
    /// Real symmetric mode through an equalizing involution, stored as an
    /// index permutation of T.
    Real { sigma: Vec<usize> },
}

/// A symbolic PSD lift of a moment polytope: ℓ ∈ M(G,S) iff the pinned
/// matrix map admits a PSD completion in the free variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftDescription {
    group: GroupSpec,
    s: BTreeSet<GroupElement>,
    t: Vec<GroupElement>,
    variable_index: BTreeSet<GroupElement>,
    pins: BTreeMap<GroupElement, Pin>,
    matrix_map: Vec<Vec<MatrixEntry>>,
    mode: LiftMode,
}

impl LiftDescription {
    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn s(&self) -> &BTreeSet<GroupElement> {
        &self.s
    }

    pub fn t(&self) -> &[GroupElement] {
        &self.t
    }

    pub fn variable_index(&self) -> &BTreeSet<GroupElement> {
        &self.variable_index
    }

    pub fn pins(&self) -> &BTreeMap<GroupElement, Pin> {
        &self.pins
    }

    pub fn matrix_map(&self) -> &[Vec<MatrixEntry>] {
        &self.matrix_map
    }

    pub fn mode(&self) -> &LiftMode {
        &self.mode
    }

    /// Size of the PSD block described (|T| in both modes).
    pub fn size(&self) -> usize {
        self.t.len()
    }

    /// Evaluates the Hermitian matrix map at an assignment of the canonical
    /// variables.
    pub fn hermitian_matrix(
        &self,
        y: &BTreeMap<GroupElement, Complex64>,
    ) -> Result<HermitianMatrix> {
        if !matches!(self.mode, LiftMode::Hermitian) {
            return Err(Error::Inconsistent("lift is not in Hermitian mode".into()));
        }
        let n = self.t.len();
        let mut data = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let MatrixEntry::Value(ref e) = self.matrix_map[i][j] else {
                    return Err(Error::Inconsistent("mixed-mode matrix map".into()));
                };
                data[(i, j)] = e.eval(y)?;
            }
        }
        let labels = self.t.iter().map(|e| e.coords().to_vec()).collect();
        HermitianMatrix::new(labels, data)
    }

    /// Evaluates the real matrix map. Imaginary parts of self-inverse
    /// variables are structurally zero (conjugate symmetry).
    pub fn real_matrix(&self, y: &BTreeMap<GroupElement, Complex64>) -> Result<DMatrix<f64>> {
        if !matches!(self.mode, LiftMode::Real { .. }) {
            return Err(Error::Inconsistent("lift is not in real mode".into()));
        }
        let n = self.t.len();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let MatrixEntry::ReMinusIm { ref re, ref im } = self.matrix_map[i][j] else {
                    return Err(Error::Inconsistent("mixed-mode matrix map".into()));
                };
                let re_val = re.eval(y)?.re;
                let im_val = if im.var == self.group.inv(&im.var) {
                    0.0
                } else {
                    im.eval(y)?.im
                };
                out[(i, j)] = re_val - im_val;
            }
        }
        Ok(out)
    }
}

/// Builds the Hermitian lift of M(G,S) from a chordal cover of Cay(Ĝ,S):
/// ℓ ∈ M(G,S) iff ∃ y on T⁻¹T with y_1 = 1, y_χ = ℓ_χ on S, M_T(y) ⪰ 0.
pub fn build_lift(
    group: &GroupSpec,
    s: &BTreeSet<GroupElement>,
    cover: &ChordalCover,
) -> Result<LiftDescription> {
    if cover.group() != group {
        return Err(Error::Inconsistent("cover is over a different group".into()));
    }
    let base = cayley_graph(group, s)?;
    if cover.base().labels() != base.labels() || cover.base().edges() != base.edges() {
        return Err(Error::Inconsistent(
            "cover base graph does not match Cay(Ĝ, S)".into(),
        ));
    }
    let t: Vec<GroupElement> = cover.fourier_support().iter().cloned().collect();
    let n = t.len();

    let mut variable_index = BTreeSet::new();
    let mut matrix_map = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let eta = group.mul(&group.inv(&t[i]), &t[j]);
            let (var, conj) = canonical_rep(group, &eta);
            variable_index.insert(var.clone());
            row.push(MatrixEntry::Value(EntryRef { var, conj }));
        }
        matrix_map.push(row);
    }

    let mut pins = BTreeMap::new();
    pins.insert(group.identity(), Pin::Constant);
    for chi in s {
        let (var, _) = canonical_rep(group, chi);
        if var == group.identity() {
            continue;
        }
        if !variable_index.contains(&var) {
            return Err(Error::Inconsistent(format!(
                "projection coordinate {chi} is outside T⁻¹T"
            )));
        }
        pins.entry(var.clone()).or_insert(Pin::Coordinate(var));
    }

    Ok(LiftDescription {
        group: group.clone(),
        s: s.clone(),
        t,
        variable_index,
        pins,
        matrix_map,
        mode: LiftMode::Hermitian,
    })
}

/// Checks that an index permutation of `t` is an equalizing involution,
/// i.e. σ∘σ = id and σ(χ)·χ is the same element for every χ; returns that
/// constant.
pub fn verify_involution(
    group: &GroupSpec,
    t: &[GroupElement],
    sigma: &[usize],
) -> Result<GroupElement> {
    let n = t.len();
    if sigma.len() != n || n == 0 {
        return Err(Error::BadInvolution("size mismatch or empty set".into()));
    }
    for (i, &s) in sigma.iter().enumerate() {
        if s >= n || sigma[s] != i {
            return Err(Error::BadInvolution(format!("not an involution at index {i}")));
        }
    }
    let c = group.mul(&t[sigma[0]], &t[0]);
    for i in 1..n {
        if group.mul(&t[sigma[i]], &t[i]) != c {
            return Err(Error::BadInvolution(format!(
                "σ(χ)·χ is not constant at {}",
                t[i]
            )));
        }
    }
    Ok(c)
}

/// Searches for an equalizing involution on T: a constant c with c·T⁻¹ = T,
/// giving σ(χ) = c·χ⁻¹. Returns the smallest admissible constant (in
/// canonical element order) and the permutation on T in sorted order.
pub fn find_equalizing_involution(
    group: &GroupSpec,
    t: &BTreeSet<GroupElement>,
) -> Option<(GroupElement, Vec<usize>)> {
    let sorted: Vec<GroupElement> = t.iter().cloned().collect();
    let index: BTreeMap<&GroupElement, usize> =
        sorted.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut candidates = BTreeSet::new();
    for a in &sorted {
        for b in &sorted {
            candidates.insert(group.mul(a, b));
        }
    }
    for c in candidates {
        let mut perm = Vec::with_capacity(sorted.len());
        let mut ok = true;
        for chi in &sorted {
            let img = group.mul(&c, &group.inv(chi));
            match index.get(&img) {
                Some(&j) => perm.push(j),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some((c, perm));
        }
    }
    None
}

/// Lifts an equalizing involution σ on T ⊆ Ẑ_q to one on
/// T′ = {dk+r : k ∈ T, 0 ≤ r < d} ⊆ Ẑ_{qd} via σ′(dk+r) = dσ(k) + d−r−1.
/// The constant becomes d·(σ(k)+k) + d−1. Returns the extended group, T′ in
/// sorted order, and σ′ as a permutation of that order.
pub fn power_cycle_involution(
    base_group: &GroupSpec,
    base_t: &BTreeSet<GroupElement>,
    sigma: &[usize],
    d: u64,
) -> Result<(GroupSpec, Vec<GroupElement>, Vec<usize>)> {
    if base_group.rank() != 1 {
        return Err(Error::InvalidParameter("base group must be cyclic".into()));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be positive".into()));
    }
    let sorted_base: Vec<GroupElement> = base_t.iter().cloned().collect();
    verify_involution(base_group, &sorted_base, sigma)?;

    let q = base_group.order();
    let group = crate::abelian::make_group(&[q * d])?;
    let mut prime: BTreeMap<GroupElement, GroupElement> = BTreeMap::new();
    for (i, k) in sorted_base.iter().enumerate() {
        let k_val = k.coords()[0];
        let sk_val = sorted_base[sigma[i]].coords()[0];
        for r in 0..d {
            let src = group.element(&[(d * k_val + r) as i64])?;
            let dst = group.element(&[(d * sk_val + d - r - 1) as i64])?;
            prime.insert(src, dst);
        }
    }
    let t_prime: Vec<GroupElement> = prime.keys().cloned().collect();
    let index: BTreeMap<&GroupElement, usize> =
        t_prime.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let sigma_prime: Vec<usize> = t_prime.iter().map(|e| index[&prime[e]]).collect();
    verify_involution(&group, &t_prime, &sigma_prime)?;
    Ok((group, t_prime, sigma_prime))
}

/// Converts a Hermitian lift to a real symmetric lift of the same size via
/// an equalizing involution σ on T: R = Re[M] − J·Im[M] with J the
/// permutation matrix of σ, so the entry at (χ, χ′) is
/// Re[y_{χ̄χ′}] − Im[y_{σ(χ)⁻¹χ′}].
pub fn real_lift(lift: &LiftDescription, sigma: &[usize]) -> Result<LiftDescription> {
    if !matches!(lift.mode, LiftMode::Hermitian) {
        return Err(Error::Inconsistent("lift is already in real mode".into()));
    }
    let group = &lift.group;
    verify_involution(group, &lift.t, sigma)?;
    let n = lift.t.len();
    let mut matrix_map = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let eta_re = group.mul(&group.inv(&lift.t[i]), &lift.t[j]);
            let eta_im = group.mul(&group.inv(&lift.t[sigma[i]]), &lift.t[j]);
            let (re_var, re_conj) = canonical_rep(group, &eta_re);
            let (im_var, im_conj) = canonical_rep(group, &eta_im);
            row.push(MatrixEntry::ReMinusIm {
                re: EntryRef {
                    var: re_var,
                    conj: re_conj,
                },
                im: EntryRef {
                    var: im_var,
                    conj: im_conj,
                },
            });
        }
        matrix_map.push(row);
    }
    Ok(LiftDescription {
        group: lift.group.clone(),
        s: lift.s.clone(),
        t: lift.t.clone(),
        variable_index: lift.variable_index.clone(),
        pins: lift.pins.clone(),
        matrix_map,
        mode: LiftMode::Real {
            sigma: sigma.to_vec(),
        },
    })
}

/// Moments of a probability measure on G, restricted to the lift's
/// canonical variables: y_χ = Σ_x w_x χ(x).
pub fn feasible_point_from_measure(
    lift: &LiftDescription,
    weights: &[f64],
) -> Result<BTreeMap<GroupElement, Complex64>> {
    let group = &lift.group;
    let n = group.order() as usize;
    if weights.len() != n {
        return Err(Error::BadMeasure(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w < -1e-12) {
        return Err(Error::BadMeasure("negative weight".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::BadMeasure(format!("weights sum to {total}, not 1")));
    }
    let elems: Vec<GroupElement> = group.elements().collect();
    let mut y = BTreeMap::new();
    for var in &lift.variable_index {
        let mut acc = Complex64::ZERO;
        for (x, &w) in elems.iter().zip(weights) {
            acc += group.char_eval(var, x) * w;
        }
        y.insert(var.clone(), acc);
    }
    Ok(y)
}

/// The duality pairing Σ_χ f̂(χ)·y_χ between a function and a moment
/// assignment. For f a sum of squares and y the moments of a measure this
/// equals E_μ[f] ≥ 0.
pub fn pairing_check(f: &FourierFunction, y: &BTreeMap<GroupElement, Complex64>) -> Result<f64> {
    let group = f.group();
    let mut acc = Complex64::ZERO;
    for (chi, &c) in f.coeffs() {
        acc += c * lookup_moment(group, y, chi)?;
    }
    Ok(acc.re)
}

/// The constructive half of the exactness proof: builds the partial matrix
/// Y_{η,η′} = y_{η̄η′} on the edges of the chordal cover, completes it to a
/// full PSD matrix, and averages over translations. The result is a PSD
/// moment matrix whose base-edge entries (in particular the S-moments)
/// agree with y exactly.
pub fn complete_moment_matrix(
    y: &BTreeMap<GroupElement, Complex64>,
    cover: &ChordalCover,
) -> Result<HermitianMatrix> {
    let group = cover.group();
    let g = cover.cover();
    let elems: Vec<GroupElement> = group.elements().collect();
    let mut entries = BTreeMap::new();
    let unit = lookup_moment(group, y, &group.identity())?;
    for i in 0..g.n() {
        entries.insert((i, i), unit);
    }
    for (i, j) in g.edges() {
        let eta = group.mul(&group.inv(&elems[i]), &elems[j]);
        let v = lookup_moment(group, y, &eta)?;
        entries.insert((i, j), v);
        entries.insert((j, i), v.conj());
    }
    let partial = PartialMatrix::new(g.labels().to_vec(), entries)?;
    let full = chordal_complete(&partial, g)?;
    group_average(&full, group)
}

// --- SDPA export --------------------------------------------------------

/// One scalar unknown of the exported SDP.
#[derive(Clone, Debug, PartialEq)]
enum Part {
    Re,
    Im,
}

/// The ordered scalar variables of a lift: for each canonical variable its
/// real part, then its imaginary part when the index is not self-inverse.
/// Constant-pinned variables are skipped when `eliminate` is set.
fn scalar_variables(lift: &LiftDescription, eliminate: bool) -> Vec<(GroupElement, Part)> {
    let mut out = Vec::new();
    for var in &lift.variable_index {
        if eliminate && matches!(lift.pins.get(var), Some(Pin::Constant)) {
            continue;
        }
        out.push((var.clone(), Part::Re));
        if *var != lift.group.inv(var) {
            out.push((var.clone(), Part::Im));
        }
    }
    out
}

/// Evaluates the lift's PSD block as a real symmetric matrix: the real
/// matrix map in real mode, the doubled [[Re, Im], [−Im, Re]] embedding in
/// Hermitian mode.
fn real_block(lift: &LiftDescription, y: &BTreeMap<GroupElement, Complex64>) -> Result<DMatrix<f64>> {
    match lift.mode {
        LiftMode::Real { .. } => lift.real_matrix(y),
        LiftMode::Hermitian => Ok(crate::hermitian::complex_to_real_embed(
            &lift.hermitian_matrix(y)?,
        )),
    }
}

/// A parsed SDPA sparse problem: min c·x s.t. Σ_k x_k F_k − F_0 ⪰ 0
/// blockwise. Entries are (matno, blkno, i, j, value), 1-indexed, i ≤ j.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpaProblem {
    pub m: usize,
    pub block_sizes: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<(usize, usize, usize, usize, f64)>,
}

impl SdpaProblem {
    /// Assembles Σ_k x_k F_k − F_0 for one block as a dense symmetric matrix.
    pub fn block_matrix(&self, blkno: usize, x: &[f64]) -> Result<DMatrix<f64>> {
        if blkno == 0 || blkno > self.block_sizes.len() || x.len() != self.m {
            return Err(Error::Shape("bad block number or variable count".into()));
        }
        let n = self.block_sizes[blkno - 1].unsigned_abs() as usize;
        let mut out = DMatrix::zeros(n, n);
        for &(matno, blk, i, j, v) in &self.entries {
            if blk != blkno {
                continue;
            }
            let coef = if matno == 0 { -1.0 } else { x[matno - 1] };
            out[(i - 1, j - 1)] += coef * v;
            if i != j {
                out[(j - 1, i - 1)] += coef * v;
            }
        }
        Ok(out)
    }
}

/// Exports a lift as an SDPA sparse ".dat-s" feasibility problem (c = 0).
/// The PSD block has size |T| in real mode and 2|T| for an embedded
/// Hermitian lift. The y_{1_Ĝ} = 1 pin is eliminated into the constant
/// matrix by default; with `paired_pins` the pinned variable stays free and
/// the equality is enforced by a pair of inequalities in an extra diagonal
/// block. Coordinate pins are always encoded by identifying the moment
/// variable with the projection coordinate, so they add no constraints.
pub fn export_sdpa(lift: &LiftDescription, paired_pins: bool) -> Result<String> {
    let vars = scalar_variables(lift, !paired_pins);
    let m = vars.len();
    let block = match lift.mode {
        LiftMode::Real { .. } => lift.size() as i64,
        LiftMode::Hermitian => 2 * lift.size() as i64,
    };
    let constant_pins: Vec<GroupElement> = lift
        .pins
        .iter()
        .filter(|(_, p)| matches!(p, Pin::Constant))
        .map(|(v, _)| v.clone())
        .collect();

    // Base assignment for the constant matrix: eliminated pins at their
    // pinned value, everything else zero.
    let mut base: BTreeMap<GroupElement, Complex64> = lift
        .variable_index
        .iter()
        .map(|v| (v.clone(), Complex64::ZERO))
        .collect();
    if !paired_pins {
        for v in &constant_pins {
            base.insert(v.clone(), Complex64::ONE);
        }
    }
    let constant = real_block(lift, &base)?;

    let mut text = String::new();
    text.push_str("*sparsos moment-polytope lift\n");
    let names: Vec<String> = vars
        .iter()
        .map(|(v, p)| match p {
            Part::Re => format!("Re[y{v}]"),
            Part::Im => format!("Im[y{v}]"),
        })
        .collect();
    text.push_str(&format!("*variables: {}\n", names.join(" ")));
    let nblocks = if paired_pins && !constant_pins.is_empty() {
        2
    } else {
        1
    };
    text.push_str(&format!("{m}\n{nblocks}\n"));
    if nblocks == 2 {
        text.push_str(&format!("{block} -{}\n", 2 * constant_pins.len()));
    } else {
        text.push_str(&format!("{block}\n"));
    }
    let zeros = vec!["0.0"; m];
    text.push_str(&zeros.join(" "));
    text.push('\n');

    let push_block = |matno: usize, blkno: usize, mat: &DMatrix<f64>, text: &mut String| {
        for i in 0..mat.nrows() {
            for j in i..mat.ncols() {
                if mat[(i, j)] != 0.0 {
                    text.push_str(&format!(
                        "{matno} {blkno} {} {} {}\n",
                        i + 1,
                        j + 1,
                        mat[(i, j)]
                    ));
                }
            }
        }
    };

    // F_0 = −(constant part).
    let f0 = -constant;
    push_block(0, 1, &f0, &mut text);

    // One coefficient matrix per scalar variable, extracted by probing.
    let zero_assign: BTreeMap<GroupElement, Complex64> = lift
        .variable_index
        .iter()
        .map(|v| (v.clone(), Complex64::ZERO))
        .collect();
    let baseline = real_block(lift, &zero_assign)?;
    for (k, (var, part)) in vars.iter().enumerate() {
        let mut probe = zero_assign.clone();
        let unit = match part {
            Part::Re => Complex64::ONE,
            Part::Im => Complex64::I,
        };
        probe.insert(var.clone(), unit);
        let coeff = real_block(lift, &probe)? - &baseline;
        push_block(k + 1, 1, &coeff, &mut text);
    }

    if nblocks == 2 {
        for (p, pin_var) in constant_pins.iter().enumerate() {
            let k = vars
                .iter()
                .position(|(v, part)| v == pin_var && *part == Part::Re)
                .ok_or_else(|| Error::Export("pinned variable missing".into()))?;
            let lo = 2 * p + 1;
            let hi = 2 * p + 2;
            // x_k − 1 ≥ 0 and 1 − x_k ≥ 0.
            text.push_str(&format!("{} 2 {lo} {lo} 1\n", k + 1));
            text.push_str(&format!("0 2 {lo} {lo} 1\n"));
            text.push_str(&format!("{} 2 {hi} {hi} -1\n", k + 1));
            text.push_str(&format!("0 2 {hi} {hi} -1\n"));
        }
    }
    Ok(text)
}

/// Strict parser for the SDPA sparse format produced by `export_sdpa`
/// (and standard ".dat-s" files without bracketed number lists).
pub fn parse_sdpa(text: &str) -> Result<SdpaProblem> {
    // Empty lines are kept: an m = 0 problem has an empty objective line.
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.starts_with('*') && !l.starts_with('"'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} line")))
    };
    let m: usize = next("m")?
        .split_whitespace()
        .next()
        .ok_or_else(|| Error::Parse("empty m line".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad m".into()))?;
    let nblocks: usize = next("nblocks")?
        .split_whitespace()
        .next()
        .ok_or_else(|| Error::Parse("empty nblocks line".into()))?
        .parse()
        .map_err(|_| Error::Parse("bad nblocks".into()))?;
    let sizes_line = next("block sizes")?;
    let block_sizes: Vec<i64> = sizes_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad block size {t}"))))
        .collect::<Result<_>>()?;
    if block_sizes.len() != nblocks || block_sizes.iter().any(|&s| s == 0) {
        return Err(Error::Parse("block size list mismatch".into()));
    }
    let c: Vec<f64> = if m == 0 {
        next("objective")?;
        Vec::new()
    } else {
        next("objective")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad objective {t}"))))
            .collect::<Result<_>>()?
    };
    if c.len() != m {
        return Err(Error::Parse("objective length mismatch".into()));
    }
    let mut entries = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::Parse(format!("bad entry line: {line}")));
        }
        let matno: usize = toks[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad matno {}", toks[0])))?;
        let blkno: usize = toks[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad blkno {}", toks[1])))?;
        let i: usize = toks[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad row {}", toks[2])))?;
        let j: usize = toks[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad col {}", toks[3])))?;
        let v: f64 = toks[4]
            .parse()
            .map_err(|_| Error::Parse(format!("bad value {}", toks[4])))?;
        if matno > m || blkno == 0 || blkno > nblocks {
            return Err(Error::Parse(format!("entry out of range: {line}")));
        }
        let size = block_sizes[blkno - 1];
        let n = size.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > n || j > n || i > j {
            return Err(Error::Parse(format!("entry indices out of range: {line}")));
        }
        if size < 0 && i != j {
            return Err(Error::Parse(format!(
                "off-diagonal entry in diagonal block: {line}"
            )));
        }
        entries.push((matno, blkno, i, j, v));
    }
    Ok(SdpaProblem {
        m,
        block_sizes,
        c,
        entries,
    })
}

// --- JSON wire format ---------------------------------------------------

use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
struct EntryRefJson {
    var: Vec<u64>,
    conj: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MatrixEntryJson {
    Value { value: EntryRefJson },
    ReMinusIm { re: EntryRefJson, im: EntryRefJson },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PinJson {
    Constant { var: Vec<u64> },
    Coordinate { var: Vec<u64>, coordinate: Vec<u64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ModeJson {
    Hermitian,
    Real { sigma: Vec<usize> },
}

/// JSON wire format for a lift description.
#[derive(Serialize, Deserialize)]
pub struct LiftJson {
    group: Vec<u64>,
    s: Vec<Vec<u64>>,
    t: Vec<Vec<u64>>,
    variable_index: Vec<Vec<u64>>,
    pins: Vec<PinJson>,
    matrix_map: Vec<Vec<MatrixEntryJson>>,
    mode: ModeJson,
}

impl LiftDescription {
    pub fn to_json(&self) -> String {
        let coords = |e: &GroupElement| e.coords().to_vec();
        let eref = |e: &EntryRef| EntryRefJson {
            var: coords(&e.var),
            conj: e.conj,
        };
        let doc = LiftJson {
            group: self.group.moduli().to_vec(),
            s: self.s.iter().map(coords).collect(),
            t: self.t.iter().map(coords).collect(),
            variable_index: self.variable_index.iter().map(coords).collect(),
            pins: self
                .pins
                .iter()
                .map(|(v, p)| match p {
                    Pin::Constant => PinJson::Constant { var: coords(v) },
                    Pin::Coordinate(c) => PinJson::Coordinate {
                        var: coords(v),
                        coordinate: coords(c),
                    },
                })
                .collect(),
            matrix_map: self
                .matrix_map
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| match e {
                            MatrixEntry::Value(v) => MatrixEntryJson::Value { value: eref(v) },
                            MatrixEntry::ReMinusIm { re, im } => MatrixEntryJson::ReMinusIm {
                                re: eref(re),
                                im: eref(im),
                            },
                        })
                        .collect()
                })
                .collect(),
            mode: match &self.mode {
                LiftMode::Hermitian => ModeJson::Hermitian,
                LiftMode::Real { sigma } => ModeJson::Real {
                    sigma: sigma.clone(),
                },
            },
        };
        serde_json::to_string_pretty(&doc).expect("lift serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LiftJson = serde_json::from_str(text)?;
        let group = crate::abelian::make_group(&doc.group)?;
        let elem = |coords: &[u64]| -> Result<GroupElement> {
            let signed: Vec<i64> = coords.iter().map(|&c| c as i64).collect();
            group.element(&signed)
        };
        let eref = |e: &EntryRefJson| -> Result<EntryRef> {
            Ok(EntryRef {
                var: elem(&e.var)?,
                conj: e.conj,
            })
        };
        let s = doc.s.iter().map(|c| elem(c)).collect::<Result<BTreeSet<_>>>()?;
        let t = doc.t.iter().map(|c| elem(c)).collect::<Result<Vec<_>>>()?;
        let variable_index = doc
            .variable_index
            .iter()
            .map(|c| elem(c))
            .collect::<Result<BTreeSet<_>>>()?;
        let mut pins = BTreeMap::new();
        for p in &doc.pins {
            match p {
                PinJson::Constant { var } => {
                    pins.insert(elem(var)?, Pin::Constant);
                }
                PinJson::Coordinate { var, coordinate } => {
                    pins.insert(elem(var)?, Pin::Coordinate(elem(coordinate)?));
                }
            }
        }
        let n = t.len();
        if doc.matrix_map.len() != n || doc.matrix_map.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("matrix map shape mismatch".into()));
        }
        let mut matrix_map = Vec::with_capacity(n);
        for row in &doc.matrix_map {
            let mut out = Vec::with_capacity(n);
            for e in row {
                let entry = match e {
                    MatrixEntryJson::Value { value } => MatrixEntry::Value(eref(value)?),
                    MatrixEntryJson::ReMinusIm { re, im } => MatrixEntry::ReMinusIm {
                        re: eref(re)?,
                        im: eref(im)?,
                    },
                };
                out.push(entry);
            }
            matrix_map.push(out);
        }
        for row in &matrix_map {
            for e in row {
                let vars: Vec<&GroupElement> = match e {
                    MatrixEntry::Value(v) => vec![&v.var],
                    MatrixEntry::ReMinusIm { re, im } => vec![&re.var, &im.var],
                };
                for v in vars {
                    if !variable_index.contains(v) {
                        return Err(Error::Parse(format!(
                            "matrix entry references unknown variable {v}"
                        )));
                    }
                }
            }
        }
        let mode = match doc.mode {
            ModeJson::Hermitian => LiftMode::Hermitian,
            ModeJson::Real { sigma } => {
                verify_involution(&group, &t, &sigma)?;
                LiftMode::Real { sigma }
            }
        };
        for pin in pins.keys() {
            if !variable_index.contains(pin) {
                return Err(Error::Parse(format!("pin references unknown variable {pin}")));
            }
        }
        Ok(LiftDescription {
            group,
            s,
            t,
            variable_index,
            pins,
            matrix_map,
            mode,
        })
    }
}
