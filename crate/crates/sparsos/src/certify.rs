//! Sparse sum-of-squares certification: Gram matrix of a real function,
//! clique decomposition along a chordal cover, factorization into squared
//! terms translated into the Fourier support, plus verification and the
//! real-valued conversion.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abelian::{
    fourier_transform_real, make_group, FourierFunction, GroupElement, GroupSpec,
};
use crate::covers::ChordalCover;
use crate::error::{Error, Result};
use crate::hermitian::{chordal_decompose, psd_factor, HermitianMatrix, PSD_TOL};

/// Relative tolerance for nonnegativity of the input function.
pub const NONNEG_TOL: f64 = 1e-10;
/// Terms with coefficient vectors at or below this norm are pruned.
pub const TERM_PRUNE_TOL: f64 = 1e-10;
/// Relative residual bound the pipeline guarantees.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// A sum-of-squares certificate: f(x) = scale · Σ_j |f_j(x)|², with every
/// term supported inside the declared support.
#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub group: GroupSpec,
    pub terms: Vec<FourierFunction>,
    pub declared_support: BTreeSet<GroupElement>,
    pub scale: f64,
    pub residual: f64,
}

/// The Gram matrix of a real-valued function: rows and columns indexed by
/// the full character group, entry (χ, χ′) = f̂(χ̄χ′). Its eigenvalue
/// multiset is exactly the value multiset of f.
pub fn gram_matrix(f: &FourierFunction) -> Result<HermitianMatrix> {
    let defect = f.real_defect();
    if defect > 1e-10 * f.max_coeff_norm().max(1.0) {
        return Err(Error::NotReal(defect));
    }
    let group = f.group();
    let chars: Vec<GroupElement> = group.elements().collect();
    let n = chars.len();
    let data = DMatrix::from_fn(n, n, |i, j| {
        f.coeff(&group.mul(&group.inv(&chars[i]), &chars[j]))
    });
    HermitianMatrix::new(
        chars.iter().map(|e| e.coords().to_vec()).collect(),
        data,
    )
}

/// The generator set of a cover's base Cayley graph (including identity).
fn base_generators(cover: &ChordalCover) -> BTreeSet<GroupElement> {
    let group = cover.group();
    let mut s = BTreeSet::from([group.identity()]);
    for (i, j) in cover.base().edges() {
        let a = element_of(group, cover.base().label(i));
        let b = element_of(group, cover.base().label(j));
        s.insert(group.mul(&group.inv(&a), &b));
        s.insert(group.mul(&group.inv(&b), &a));
    }
    s
}

fn element_of(group: &GroupSpec, label: &[u64]) -> GroupElement {
    let coords: Vec<i64> = label.iter().map(|&c| c as i64).collect();
    group.element(&coords).expect("label lies in the group")
}

/// Certifies a nonnegative function whose support matches the cover's base
/// graph as a sum of squares supported on the cover's Fourier support.
pub fn sparse_sos(f: &FourierFunction, cover: &ChordalCover) -> Result<SosCertificate> {
    let group = cover.group();
    if f.group() != group {
        return Err(Error::Inconsistent("function and cover group differ".into()));
    }
    let scale_f = f.max_abs_on_group();
    let (min, argmin) = f.min_on_group(1e-10 * f.max_coeff_norm().max(1.0))?;
    if min < -NONNEG_TOL * scale_f.max(1.0) {
        return Err(Error::NotNonnegative {
            witness: argmin.to_string(),
            value: min,
        });
    }
    let s = base_generators(cover);
    let supp = f.support(crate::abelian::COEFF_DROP_REL * f.max_coeff_norm());
    if let Some(bad) = supp.iter().find(|chi| !s.contains(chi)) {
        return Err(Error::Support(format!(
            "Fourier support contains {bad}, outside the cover's generator set"
        )));
    }
    // Clamp tiny negative values to zero so the Gram matrix is numerically
    // PSD; re-restrict the coefficients to the original support.
    let f = if min < 0.0 {
        let values: Vec<f64> = group
            .elements()
            .map(|x| f.evaluate(&x).re.max(0.0))
            .collect();
        let clamped = fourier_transform_real(group, &values)?;
        let coeffs: BTreeMap<GroupElement, Complex64> = clamped
            .coeffs()
            .iter()
            .filter(|(chi, _)| supp.contains(chi))
            .map(|(chi, &c)| (chi.clone(), c))
            .collect();
        FourierFunction::new(group.clone(), coeffs)?
    } else {
        f.clone()
    };

    let q = gram_matrix(&f)?;
    let pieces = chordal_decompose(&q, cover.cover(), cover.peo(), cover.cliques())?;
    let sqrt_n = (group.order() as f64).sqrt();
    let chars: Vec<GroupElement> = group.elements().collect();
    let mut terms = Vec::new();
    for (ci, piece) in pieces.iter().enumerate() {
        let translation = &cover.translations()[ci];
        for a in psd_factor(piece, PSD_TOL)? {
            if a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() <= TERM_PRUNE_TOL {
                continue;
            }
            let mut coeffs: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
            for (k, chi) in chars.iter().enumerate() {
                let c = a[k].conj() / sqrt_n;
                if c.norm() > TERM_PRUNE_TOL {
                    coeffs.insert(group.mul(translation, chi), c);
                }
            }
            if !coeffs.is_empty() {
                terms.push(FourierFunction::new(group.clone(), coeffs)?);
            }
        }
    }
    let mut cert = SosCertificate {
        group: group.clone(),
        terms,
        declared_support: cover.fourier_support().clone(),
        scale: 1.0,
        residual: 0.0,
    };
    cert.residual = verify_certificate(&f, &cert, TERM_PRUNE_TOL)?;
    Ok(cert)
}

/// Exhaustively checks a certificate against its target: returns
/// max_x |f(x) − scale·Σ_j |f_j(x)|²|, after re-checking that every term
/// stays inside the declared support (coefficients above `support_tol`).
pub fn verify_certificate(
    f: &FourierFunction,
    cert: &SosCertificate,
    support_tol: f64,
) -> Result<f64> {
    if f.group() != &cert.group {
        return Err(Error::Inconsistent(
            "function and certificate group differ".into(),
        ));
    }
    for (j, term) in cert.terms.iter().enumerate() {
        for chi in term.support(support_tol) {
            if !cert.declared_support.contains(&chi) {
                return Err(Error::CertificateInvalid(format!(
                    "term {j} has support element {chi} outside the declared support"
                )));
            }
        }
    }
    let mut residual = 0.0f64;
    for x in cert.group.elements() {
        let sum: f64 = cert.terms.iter().map(|t| t.evaluate(&x).norm_sqr()).sum();
        residual = residual.max((f.evaluate(&x).re - cert.scale * sum).abs());
    }
    Ok(residual)
}

/// Splits every term into real and imaginary parts, yielding a certificate
/// with real-valued terms supported on the symmetric closure T ∪ T⁻¹.
pub fn real_certificate(cert: &SosCertificate) -> Result<SosCertificate> {
    let group = &cert.group;
    let mut support = cert.declared_support.clone();
    for chi in &cert.declared_support {
        support.insert(group.inv(chi));
    }
    let mut terms = Vec::new();
    for term in &cert.terms {
        let mut re: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        let mut im: BTreeMap<GroupElement, Complex64> = BTreeMap::new();
        let mut keys: BTreeSet<GroupElement> = term.coeffs().keys().cloned().collect();
        for chi in term.coeffs().keys() {
            keys.insert(group.inv(chi));
        }
        for chi in keys {
            let c = term.coeff(&chi);
            let mirrored = term.coeff(&group.inv(&chi)).conj();
            re.insert(chi.clone(), (c + mirrored) * 0.5);
            im.insert(chi, (c - mirrored) / Complex64::new(0.0, 2.0));
        }
        for coeffs in [re, im] {
            let f = FourierFunction::new(group.clone(), coeffs)?;
            if f.coeffs().values().map(|c| c.norm_sqr()).sum::<f64>().sqrt() > TERM_PRUNE_TOL {
                terms.push(f);
            }
        }
    }
    Ok(SosCertificate {
        group: group.clone(),
        terms,
        declared_support: support,
        scale: cert.scale,
        residual: cert.residual,
    })
}

/// Certifies a nonnegative quadratic form c + Σ_{i<j} A_ij x_i x_j on the
/// hypercube {−1,1}^n as a sum of squares of degree at most ⌈n/2⌉, via the
/// half-cube cover.
pub fn certify_quadratic_hypercube(
    n: u64,
    a: &DMatrix<f64>,
    c: f64,
) -> Result<SosCertificate> {
    if !(2..=16).contains(&n) {
        return Err(Error::InvalidParameter(
            "hypercube certification needs 2 <= n <= 16".into(),
        ));
    }
    let nn = n as usize;
    if a.nrows() != nn || a.ncols() != nn {
        return Err(Error::Shape(format!("coefficient matrix must be {nn}x{nn}")));
    }
    for i in 0..nn {
        if a[(i, i)].abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "coefficient matrix must have zero diagonal".into(),
            ));
        }
        for j in 0..nn {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidParameter(
                    "coefficient matrix must be symmetric".into(),
                ));
            }
        }
    }
    let cover = crate::covers::halfcube_cover(n)?;
    let group = cover.group().clone();
    let mut values = Vec::with_capacity(1 << nn);
    let mut min: Option<(f64, GroupElement)> = None;
    for g in group.elements() {
        let x: Vec<f64> = g
            .coords()
            .iter()
            .map(|&b| if b == 0 { 1.0 } else { -1.0 })
            .collect();
        let mut v = c;
        for i in 0..nn {
            for j in (i + 1)..nn {
                v += a[(i, j)] * x[i] * x[j];
            }
        }
        if min.as_ref().is_none_or(|(m, _)| v < *m) {
            min = Some((v, g.clone()));
        }
        values.push(v);
    }
    let (min_val, witness) = min.unwrap();
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if min_val < -NONNEG_TOL * scale.max(1.0) {
        return Err(Error::NotNonnegative {
            witness: witness.to_string(),
            value: min_val,
        });
    }
    let f = fourier_transform_real(&group, &values)?;
    sparse_sos(&f, &cover)
}

// --- JSON wire format ---------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    index: Vec<u64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coefficients: Vec<CoeffJson>,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    group: Vec<u64>,
    support: Vec<Vec<u64>>,
    scale: f64,
    terms: Vec<TermJson>,
    residual: f64,
}

impl SosCertificate {
    pub fn to_json(&self) -> String {
        let doc = CertificateJson {
            group: self.group.moduli().to_vec(),
            support: self
                .declared_support
                .iter()
                .map(|e| e.coords().to_vec())
                .collect(),
            scale: self.scale,
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    coefficients: t
                        .coeffs()
                        .iter()
                        .map(|(chi, c)| CoeffJson {
                            index: chi.coords().to_vec(),
                            re: c.re,
                            im: c.im,
                        })
                        .collect(),
                })
                .collect(),
            residual: self.residual,
        };
        serde_json::to_string_pretty(&doc).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CertificateJson = serde_json::from_str(text)?;
        let group = make_group(&doc.group)?;
        let mut support = BTreeSet::new();
        for coords in &doc.support {
            support.insert(element_of(&group, coords));
        }
        let mut terms = Vec::new();
        for t in doc.terms {
            let mut coeffs = BTreeMap::new();
            for co in t.coefficients {
                coeffs.insert(
                    element_of(&group, &co.index),
                    Complex64::new(co.re, co.im),
                );
            }
            terms.push(FourierFunction::new(group.clone(), coeffs)?);
        }
        Ok(SosCertificate {
            group,
            terms,
            declared_support: support,
            scale: doc.scale,
            residual: doc.residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::{cycle_cover, halfcube_cover, hexagon_cover, power_cycle_cover};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// f(x) = 1 − cos(2πx/6) on Z_6: coefficients 1 at 0 and −1/2 at ±1.
    fn hexagon_function() -> FourierFunction {
        let group = make_group(&[6]).unwrap();
        let coeffs = BTreeMap::from([
            (group.element(&[0]).unwrap(), Complex64::new(1.0, 0.0)),
            (group.element(&[1]).unwrap(), Complex64::new(-0.5, 0.0)),
            (group.element(&[-1]).unwrap(), Complex64::new(-0.5, 0.0)),
        ]);
        FourierFunction::new(group, coeffs).unwrap()
    }

    /// A guaranteed-nonnegative function with support in the symmetric set
    /// S: a sum of |g|² for random g supported on a "half" H with
    /// H̄H ⊆ S. For S = {−d..d} take H = {0..?}; here the caller supplies
    /// the allowed factor support directly.
    fn random_nonneg(
        group: &GroupSpec,
        factor_support: &[GroupElement],
        terms: usize,
        rng: &mut ChaCha8Rng,
    ) -> FourierFunction {
        let mut values = vec![0.0f64; group.order() as usize];
        for _ in 0..terms {
            let g: Vec<Complex64> = factor_support
                .iter()
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            for (i, x) in group.elements().enumerate() {
                let v: Complex64 = factor_support
                    .iter()
                    .zip(&g)
                    .map(|(chi, c)| c * group.char_eval(chi, &x))
                    .sum();
                values[i] += v.norm_sqr();
            }
        }
        fourier_transform_real(group, &values).unwrap()
    }

    #[test]
    fn gram_of_hexagon_function_is_circulant() {
        let f = hexagon_function();
        let q = gram_matrix(&f).unwrap();
        for i in 0..6usize {
            for j in 0..6usize {
                let d = (6 + j - i) % 6;
                let expect = match d {
                    0 => 1.0,
                    1 | 5 => -0.5,
                    _ => 0.0,
                };
                assert_relative_eq!(q.entry(i, j).re, expect, epsilon = 1e-12);
                assert_relative_eq!(q.entry(i, j).im, 0.0, epsilon = 1e-12);
            }
        }
        assert!(q.is_psd(PSD_TOL).0);
    }

    #[test]
    fn gram_of_constant_is_identity() {
        let group = make_group(&[5]).unwrap();
        let f = fourier_transform_real(&group, &[1.0; 5]).unwrap();
        let q = gram_matrix(&f).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(q.entry(i, j).re, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gram_spectrum_is_value_multiset() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for moduli in [vec![5u64], vec![8], vec![2, 6], vec![3, 3, 4], vec![64]] {
            let group = make_group(&moduli).unwrap();
            let values: Vec<f64> = (0..group.order())
                .map(|_| rng.gen_range(-2.0..2.0))
                .collect();
            let f = fourier_transform_real(&group, &values).unwrap();
            let q = gram_matrix(&f).unwrap();
            let mut eigs = q.eigenvalues();
            let mut vals = values.clone();
            eigs.sort_by(f64::total_cmp);
            vals.sort_by(f64::total_cmp);
            for (e, v) in eigs.iter().zip(&vals) {
                assert_relative_eq!(e, v, epsilon = 1e-8);
            }
            let all_nonneg = vals[0] >= 0.0;
            assert_eq!(q.is_psd(PSD_TOL).0, all_nonneg);
        }
    }

    #[test]
    fn gram_rejects_complex_function() {
        let group = make_group(&[4]).unwrap();
        let coeffs = BTreeMap::from([(
            group.element(&[1]).unwrap(),
            Complex64::new(1.0, 0.0),
        )]);
        let f = FourierFunction::new(group, coeffs).unwrap();
        assert!(matches!(gram_matrix(&f), Err(Error::NotReal(_))));
    }

    #[test]
    fn hexagon_certificate() {
        let f = hexagon_function();
        let cover = hexagon_cover();
        let cert = sparse_sos(&f, &cover).unwrap();
        assert!(cert.residual <= RESIDUAL_TOL * 2.0);
        let t = cover.fourier_support();
        for term in &cert.terms {
            for chi in term.support(1e-10) {
                assert!(t.contains(&chi));
            }
        }
    }

    #[test]
    fn constant_certificate() {
        let group = make_group(&[6]).unwrap();
        let f = fourier_transform_real(&group, &[4.0; 6]).unwrap();
        let cover = hexagon_cover();
        let cert = sparse_sos(&f, &cover).unwrap();
        assert!(cert.residual <= RESIDUAL_TOL);
        // All mass is carried by constant-only terms.
        let total: f64 = cert
            .terms
            .iter()
            .map(|t| t.coeffs().values().map(|c| c.norm_sqr()).sum::<f64>())
            .sum();
        assert_relative_eq!(total, 4.0, epsilon = 1e-8);
    }

    #[test]
    fn sos_rejects_negative_function() {
        let group = make_group(&[6]).unwrap();
        let values = [1.0, 1.0, -0.5, 1.0, 1.0, 1.0];
        let f = fourier_transform_real(&group, &values).unwrap();
        let cover = hexagon_cover();
        // Support check happens after nonnegativity, so widen the support
        // by using a cover for the complete graph? Simpler: this f has full
        // support and the hexagon base is the cycle, so nonnegativity must
        // be reported first.
        match sparse_sos(&f, &cover) {
            Err(Error::NotNonnegative { value, .. }) => {
                assert_relative_eq!(value, -0.5, epsilon = 1e-10)
            }
            other => panic!("expected nonnegativity error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn sos_rejects_support_violation() {
        let group = make_group(&[6]).unwrap();
        // f = 2 + 2cos(4πx/6): nonnegative, supported on {0, ±2}.
        let coeffs = BTreeMap::from([
            (group.element(&[0]).unwrap(), Complex64::new(2.0, 0.0)),
            (group.element(&[2]).unwrap(), Complex64::new(1.0, 0.0)),
            (group.element(&[-2]).unwrap(), Complex64::new(1.0, 0.0)),
        ]);
        let f = FourierFunction::new(group, coeffs).unwrap();
        assert!(matches!(
            sparse_sos(&f, &hexagon_cover()),
            Err(Error::Support(_))
        ));
    }

    #[test]
    fn cycle_eight_random_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let cover = cycle_cover(8).unwrap();
        let group = cover.group().clone();
        let half: Vec<GroupElement> =
            [0i64, 1].iter().map(|&k| group.element(&[k]).unwrap()).collect();
        for _ in 0..20 {
            let f = random_nonneg(&group, &half, 2, &mut rng);
            let cert = sparse_sos(&f, &cover).unwrap();
            let bound = RESIDUAL_TOL * f.max_abs_on_group().max(1.0);
            assert!(cert.residual <= bound, "residual {}", cert.residual);
            for term in &cert.terms {
                for chi in term.support(1e-10) {
                    assert!(cover.fourier_support().contains(&chi));
                }
            }
        }
    }

    #[test]
    fn power_cycle_and_halfcube_random_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        // Power cycle: S = {−2..2} on Z_12; factors on {0, 1, 2} stay in S.
        let cover = power_cycle_cover(12, 2).unwrap();
        let group = cover.group().clone();
        let half: Vec<GroupElement> =
            [0i64, 1, 2].iter().map(|&k| group.element(&[k]).unwrap()).collect();
        for _ in 0..10 {
            let f = random_nonneg(&group, &half, 2, &mut rng);
            let cert = sparse_sos(&f, &cover).unwrap();
            assert!(cert.residual <= RESIDUAL_TOL * f.max_abs_on_group().max(1.0));
        }
        // Half-cube: S = weights {0, 2}; factors on the weight-1 level have
        // pairwise differences of weight exactly 2.
        let cover = halfcube_cover(4).unwrap();
        let group = cover.group().clone();
        let mut weight_one: Vec<GroupElement> = Vec::new();
        for i in 0..4 {
            let mut coords = [0i64; 4];
            coords[i] = 1;
            weight_one.push(group.element(&coords).unwrap());
        }
        for _ in 0..10 {
            let f = random_nonneg(&group, &weight_one, 2, &mut rng);
            let cert = sparse_sos(&f, &cover).unwrap();
            assert!(cert.residual <= RESIDUAL_TOL * f.max_abs_on_group().max(1.0));
            for term in &cert.terms {
                for chi in term.support(1e-10) {
                    let w = chi.coords().iter().filter(|&&c| c == 1).count();
                    assert!(w <= 2);
                }
            }
        }
    }

    #[test]
    fn verify_detects_dropped_term() {
        let f = hexagon_function();
        let cert = sparse_sos(&f, &hexagon_cover()).unwrap();
        let mut broken = cert.clone();
        // Drop the heaviest term.
        let heaviest = (0..broken.terms.len())
            .max_by(|&a, &b| {
                let na: f64 = broken.terms[a].coeffs().values().map(|c| c.norm_sqr()).sum();
                let nb: f64 = broken.terms[b].coeffs().values().map(|c| c.norm_sqr()).sum();
                na.total_cmp(&nb)
            })
            .unwrap();
        broken.terms.remove(heaviest);
        let residual = verify_certificate(&f, &broken, 1e-10).unwrap();
        assert!(residual > 1e-4, "residual {residual}");
    }

    #[test]
    fn verify_empty_certificate_of_zero() {
        let group = make_group(&[5]).unwrap();
        let f = FourierFunction::zero(group.clone());
        let cert = SosCertificate {
            group,
            terms: vec![],
            declared_support: BTreeSet::new(),
            scale: 1.0,
            residual: 0.0,
        };
        assert_relative_eq!(verify_certificate(&f, &cert, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn translation_leaves_squares_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let group = make_group(&[12]).unwrap();
        for _ in 0..20 {
            let coeffs: BTreeMap<GroupElement, Complex64> = (0..4)
                .map(|k| {
                    (
                        group.element(&[k]).unwrap(),
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    )
                })
                .collect();
            let h = FourierFunction::new(group.clone(), coeffs.clone()).unwrap();
            let chi = group.element(&[rng.gen_range(0..12)]).unwrap();
            let shifted: BTreeMap<GroupElement, Complex64> = coeffs
                .iter()
                .map(|(k, &c)| (group.mul(&chi, k), c))
                .collect();
            let hs = FourierFunction::new(group.clone(), shifted).unwrap();
            for x in group.elements() {
                assert!(
                    (hs.evaluate(&x).norm_sqr() - h.evaluate(&x).norm_sqr()).abs() < 1e-12
                );
            }
        }
    }

    #[test]
    fn real_certificate_single_character() {
        let group = make_group(&[4]).unwrap();
        let coeffs = BTreeMap::from([(
            group.element(&[1]).unwrap(),
            Complex64::new(1.0, 0.0),
        )]);
        let term = FourierFunction::new(group.clone(), coeffs).unwrap();
        let cert = SosCertificate {
            group: group.clone(),
            terms: vec![term],
            declared_support: BTreeSet::from([group.element(&[1]).unwrap()]),
            scale: 1.0,
            residual: 0.0,
        };
        let real = real_certificate(&cert).unwrap();
        assert_eq!(real.terms.len(), 2);
        assert_eq!(
            real.declared_support,
            BTreeSet::from([
                group.element(&[1]).unwrap(),
                group.element(&[3]).unwrap()
            ])
        );
        // cos and sin of 2πx/4.
        for x in group.elements() {
            let angle = std::f64::consts::TAU * x.coords()[0] as f64 / 4.0;
            let values: Vec<f64> = real.terms.iter().map(|t| t.evaluate(&x).re).collect();
            assert_relative_eq!(values[0], angle.cos(), epsilon = 1e-12);
            assert_relative_eq!(values[1], angle.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn real_certificate_hexagon() {
        let f = hexagon_function();
        let cert = sparse_sos(&f, &hexagon_cover()).unwrap();
        let real = real_certificate(&cert).unwrap();
        for term in &real.terms {
            assert!(term.is_real(1e-10));
            for chi in term.support(1e-10) {
                assert!(real.declared_support.contains(&chi));
            }
        }
        let residual = verify_certificate(&f, &real, 1e-10).unwrap();
        assert!(residual <= RESIDUAL_TOL * 2.0);
        // Symmetric closure of {−1, 0, 1, 3} on Z_6.
        let group = cert.group.clone();
        let expect: BTreeSet<GroupElement> = [0i64, 1, -1, 3]
            .iter()
            .map(|&k| group.element(&[k]).unwrap())
            .collect();
        assert_eq!(real.declared_support, expect);
    }

    #[test]
    fn quadratic_triangle_form() {
        // 3 − x1x2 − x1x3 − x2x3 is nonnegative on {−1,1}³ with minimum 0.
        let mut a = DMatrix::zeros(3, 3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            a[(i, j)] = -1.0;
            a[(j, i)] = -1.0;
        }
        let cert = certify_quadratic_hypercube(3, &a, 3.0).unwrap();
        assert!(cert.residual <= RESIDUAL_TOL * 3.0);
        for term in &cert.terms {
            for chi in term.support(1e-10) {
                let w = chi.coords().iter().filter(|&&c| c == 1).count();
                assert!(w <= 2);
            }
        }
    }

    #[test]
    fn quadratic_constant() {
        let a = DMatrix::zeros(2, 2);
        let cert = certify_quadratic_hypercube(2, &a, 1.0).unwrap();
        assert!(cert.residual <= RESIDUAL_TOL);
        let total: f64 = cert
            .terms
            .iter()
            .map(|t| t.coeffs().values().map(|c| c.norm_sqr()).sum::<f64>())
            .sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn quadratic_max_cut_c4() {
        // Laplacian quadratic of the 4-cycle: cut(x) = Σ_edges (1−x_i x_j)/2;
        // max cut is 4, so 4 − cut is nonnegative with minimum 0. In the
        // form c + Σ A_ij x_i x_j: 4 − 2 + (x1x2 + x2x3 + x3x4 + x4x1)/1...
        // cut = 2 − (x1x2 + x2x3 + x3x4 + x4x1)/... each edge contributes
        // (1 − x_i x_j)/2, so 4 − cut = 2 + Σ_edges x_i x_j / 2.
        let mut a = DMatrix::zeros(4, 4);
        for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            a[(i, j)] = 0.5;
            a[(j, i)] = 0.5;
        }
        let cert = certify_quadratic_hypercube(4, &a, 2.0).unwrap();
        assert!(cert.residual <= RESIDUAL_TOL * 4.0);
        for term in &cert.terms {
            for chi in term.support(1e-10) {
                assert!(chi.coords().iter().filter(|&&c| c == 1).count() <= 2);
            }
        }
    }

    #[test]
    fn quadratic_rejects_negative() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = -1.0;
        match certify_quadratic_hypercube(2, &a, 0.5) {
            Err(Error::NotNonnegative { value, .. }) => {
                assert_relative_eq!(value, -0.5, epsilon = 1e-12)
            }
            other => panic!("expected nonnegativity error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn quadratic_degree_bound_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for n in 2..=8u64 {
            let nn = n as usize;
            // Random quadratic, lifted by its minimum so it is nonnegative.
            let mut a = DMatrix::zeros(nn, nn);
            for i in 0..nn {
                for j in (i + 1)..nn {
                    let v = rng.gen_range(-1.0..1.0);
                    a[(i, j)] = v;
                    a[(j, i)] = v;
                }
            }
            let mut min = f64::INFINITY;
            for mask in 0u32..(1 << nn) {
                let x: Vec<f64> = (0..nn)
                    .map(|i| if mask >> i & 1 == 0 { 1.0 } else { -1.0 })
                    .collect();
                let mut v = 0.0;
                for i in 0..nn {
                    for j in (i + 1)..nn {
                        v += a[(i, j)] * x[i] * x[j];
                    }
                }
                min = min.min(v);
            }
            let cert = certify_quadratic_hypercube(n, &a, -min).unwrap();
            let h = n.div_ceil(2) as usize;
            for term in &cert.terms {
                for chi in term.support(1e-10) {
                    assert!(chi.coords().iter().filter(|&&c| c == 1).count() <= h);
                }
            }
            assert!(cert.residual <= RESIDUAL_TOL * (1.0 - min).max(1.0));
        }
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = sparse_sos(&hexagon_function(), &hexagon_cover()).unwrap();
        let text = cert.to_json();
        let back = SosCertificate::from_json(&text).unwrap();
        assert_eq!(back.terms.len(), cert.terms.len());
        assert_eq!(back.declared_support, cert.declared_support);
        assert_eq!(back.to_json(), text);
        let residual = verify_certificate(&hexagon_function(), &back, 1e-10).unwrap();
        assert!(residual <= RESIDUAL_TOL * 2.0);
    }
}
