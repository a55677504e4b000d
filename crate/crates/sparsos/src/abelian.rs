//! Finite abelian groups as products of cyclic factors, their (self-dual)
//! characters, and exact-at-roots-of-unity Fourier analysis.
//!
//! Elements and characters share one representation: a mixed-radix coordinate
//! tuple. Character evaluation keeps its phase as an exact rational k/L
//! (L = lcm of the moduli) so products and equality checks never go through
//! floating point.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative drop tolerance for Fourier coefficients.
pub const COEFF_DROP_REL: f64 = 1e-10;

/// A finite abelian group Z_{n1} x ... x Z_{nk}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    moduli: Vec<u64>,
    order: u64,
    phase_lcm: u64,
}

/// A group element (or equally a character — the groups here are self-dual),
/// stored as reduced mixed-radix coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coords.len() == 1 {
            write!(f, "{}", self.coords[0])
        } else {
            write!(
                f,
                "({})",
                self.coords
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        }
    }
}

/// Builds the group Z_{n1} x ... x Z_{nk}.
pub fn make_group(moduli: &[u64]) -> Result<GroupSpec> {
    if moduli.is_empty() {
        return Err(Error::InvalidSpec("modulus list is empty".into()));
    }
    if let Some(&m) = moduli.iter().find(|&&m| m == 0) {
        return Err(Error::InvalidSpec(format!("modulus {m} must be >= 1")));
    }
    let order = moduli.iter().product();
    let phase_lcm = moduli.iter().fold(1u64, |l, &m| l.lcm(&m));
    Ok(GroupSpec {
        moduli: moduli.to_vec(),
        order,
        phase_lcm,
    })
}

impl GroupSpec {
    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// lcm of the moduli; the common denominator of all character phases.
    pub fn phase_lcm(&self) -> u64 {
        self.phase_lcm
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    /// Reduces signed coordinates into canonical range.
    pub fn element(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.moduli.len() {
            return Err(Error::Shape(format!(
                "element has {} coordinates, group has rank {}",
                coords.len(),
                self.moduli.len()
            )));
        }
        let coords = coords
            .iter()
            .zip(&self.moduli)
            .map(|(&c, &m)| c.rem_euclid(m as i64) as u64)
            .collect();
        Ok(GroupElement { coords })
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.moduli.len()],
        }
    }

    /// Mixed-radix lexicographic position of `x` in 0..order (first
    /// coordinate most significant).
    pub fn index_of(&self, x: &GroupElement) -> usize {
        let mut idx = 0u64;
        for (&c, &m) in x.coords.iter().zip(&self.moduli) {
            idx = idx * m + c;
        }
        idx as usize
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let mut coords = vec![0u64; self.moduli.len()];
        for (slot, &m) in coords.iter_mut().zip(&self.moduli).rev() {
            *slot = (idx as u64) % m;
            idx /= m as usize;
        }
        GroupElement { coords }
    }

    /// All elements in canonical (mixed-radix lexicographic) order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order as usize).map(|i| self.element_at(i))
    }

    /// Coordinate-wise addition mod moduli (character multiplication).
    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .zip(&self.moduli)
            .map(|((&x, &y), &m)| (x + y) % m)
            .collect();
        GroupElement { coords }
    }

    /// Coordinate-wise negation mod moduli (character inversion).
    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        let coords = a
            .coords
            .iter()
            .zip(&self.moduli)
            .map(|(&x, &m)| (m - x) % m)
            .collect();
        GroupElement { coords }
    }

    /// Exact phase of chi(x) as a numerator over `phase_lcm`:
    /// chi(x) = exp(2 pi i k / L).
    pub fn char_phase(&self, chi: &GroupElement, x: &GroupElement) -> u64 {
        let l = self.phase_lcm;
        let mut k = 0u64;
        for ((&c, &xc), &m) in chi.coords.iter().zip(&x.coords).zip(&self.moduli) {
            // c * xc * (L / m) mod L, avoiding overflow via u128.
            let term = (c as u128 * xc as u128 % m as u128) * (l / m) as u128;
            k = ((k as u128 + term) % l as u128) as u64;
        }
        k
    }

    /// chi(x) as a unit-modulus complex number.
    pub fn char_eval(&self, chi: &GroupElement, x: &GroupElement) -> Complex64 {
        let k = self.char_phase(chi, x);
        Complex64::from_polar(1.0, TAU * k as f64 / self.phase_lcm as f64)
    }
}

/// A function on G stored by its sparse Fourier coefficients.
#[derive(Clone, Debug)]
pub struct FourierFunction {
    group: GroupSpec,
    coeffs: BTreeMap<GroupElement, Complex64>,
}

impl FourierFunction {
    pub fn new(group: GroupSpec, coeffs: BTreeMap<GroupElement, Complex64>) -> Result<Self> {
        for chi in coeffs.keys() {
            if chi.coords.len() != group.rank() {
                return Err(Error::Shape(format!(
                    "coefficient index {chi} does not match group rank {}",
                    group.rank()
                )));
            }
        }
        Ok(FourierFunction { group, coeffs })
    }

    pub fn zero(group: GroupSpec) -> Self {
        FourierFunction {
            group,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn coeffs(&self) -> &BTreeMap<GroupElement, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, chi: &GroupElement) -> Complex64 {
        self.coeffs.get(chi).copied().unwrap_or(Complex64::ZERO)
    }

    /// f(x) = sum_chi c_chi chi(x).
    pub fn evaluate(&self, x: &GroupElement) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(chi, c)| c * self.group.char_eval(chi, x))
            .sum()
    }

    /// Characters with |coefficient| > tol.
    pub fn support(&self, tol: f64) -> BTreeSet<GroupElement> {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(chi, _)| chi.clone())
            .collect()
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of the real-valuedness condition
    /// c(inv(chi)) = conj(c(chi)).
    pub fn real_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for (chi, c) in &self.coeffs {
            let mirrored = self.coeff(&self.group.inv(chi)).conj();
            defect = defect.max((c - mirrored).norm());
        }
        defect
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.real_defect() <= tol
    }

    /// Minimum of f over all of G, with the witnessing point.
    /// Requires f real within `tol`.
    pub fn min_on_group(&self, tol: f64) -> Result<(f64, GroupElement)> {
        let defect = self.real_defect();
        if defect > tol {
            return Err(Error::NotReal(defect));
        }
        let mut best: Option<(f64, GroupElement)> = None;
        for x in self.group.elements() {
            let v = self.evaluate(&x).re;
            if best.as_ref().map_or(true, |(b, _)| v < *b) {
                best = Some((v, x));
            }
        }
        Ok(best.expect("group order is at least 1"))
    }

    /// Maximum of |f| over G.
    pub fn max_abs_on_group(&self) -> f64 {
        self.group
            .elements()
            .map(|x| self.evaluate(&x).norm())
            .fold(0.0, f64::max)
    }
}

/// Naive O(|G|^2) Fourier transform of a value vector given in canonical
/// element order: c(chi) = (1/|G|) sum_x conj(chi(x)) f(x). Coefficients
/// below the relative drop tolerance are omitted.
pub fn fourier_transform(group: &GroupSpec, values: &[Complex64]) -> Result<FourierFunction> {
    if values.len() != group.order() as usize {
        return Err(Error::Shape(format!(
            "value vector has length {}, group has order {}",
            values.len(),
            group.order()
        )));
    }
    let n = group.order() as f64;
    let xs: Vec<GroupElement> = group.elements().collect();
    let mut coeffs = BTreeMap::new();
    for chi in group.elements() {
        let mut acc = Complex64::ZERO;
        for (x, v) in xs.iter().zip(values) {
            acc += group.char_eval(&chi, x).conj() * v;
        }
        coeffs.insert(chi, acc / n);
    }
    let max = coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
    let cutoff = COEFF_DROP_REL * max;
    coeffs.retain(|_, c| c.norm() > cutoff);
    Ok(FourierFunction { group: group.clone(), coeffs })
}

/// Fourier transform of a real value vector.
pub fn fourier_transform_real(group: &GroupSpec, values: &[f64]) -> Result<FourierFunction> {
    let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fourier_transform(group, &complex)
}

// --- JSON wire format ---------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    index: Vec<u64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FunctionJson {
    group: Vec<u64>,
    coefficients: Vec<CoeffJson>,
}

impl FourierFunction {
    /// Canonical JSON: coefficient indices sorted lexicographically.
    pub fn to_json(&self) -> String {
        let doc = FunctionJson {
            group: self.group.moduli.clone(),
            coefficients: self
                .coeffs
                .iter()
                .map(|(chi, c)| CoeffJson {
                    index: chi.coords.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("function serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FunctionJson = serde_json::from_str(text)?;
        let group = make_group(&doc.group)?;
        let mut coeffs = BTreeMap::new();
        for c in doc.coefficients {
            let idx: Vec<i64> = c.index.iter().map(|&v| v as i64).collect();
            let chi = group.element(&idx)?;
            coeffs.insert(chi, Complex64::new(c.re, c.im));
        }
        FourierFunction::new(group, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn z(n: u64) -> GroupSpec {
        make_group(&[n]).unwrap()
    }

    fn el(g: &GroupSpec, coords: &[i64]) -> GroupElement {
        g.element(coords).unwrap()
    }

    /// The running example 1 - cos(2 pi x / 6) on Z_6.
    pub(crate) fn hexagon_function() -> FourierFunction {
        let g = z(6);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(el(&g, &[0]), Complex64::new(1.0, 0.0));
        coeffs.insert(el(&g, &[1]), Complex64::new(-0.5, 0.0));
        coeffs.insert(el(&g, &[-1]), Complex64::new(-0.5, 0.0));
        FourierFunction::new(g, coeffs).unwrap()
    }

    #[test]
    fn group_orders() {
        assert_eq!(make_group(&[2, 2, 2]).unwrap().order(), 8);
        assert_eq!(z(6).order(), 6);
        assert_eq!(make_group(&[4, 3]).unwrap().order(), 12);
        assert!(make_group(&[]).is_err());
        assert!(make_group(&[3, 0]).is_err());
    }

    #[test]
    fn element_enumeration_bijective() {
        let g = make_group(&[4, 3]).unwrap();
        let all: Vec<_> = g.elements().collect();
        assert_eq!(all.len(), 12);
        for (i, x) in all.iter().enumerate() {
            assert_eq!(g.index_of(x), i);
        }
        // Lexicographic: first coordinate most significant.
        assert_eq!(all[0].coords(), &[0, 0]);
        assert_eq!(all[1].coords(), &[0, 1]);
        assert_eq!(all[3].coords(), &[1, 0]);
    }

    #[test]
    fn char_eval_examples() {
        let g = z(6);
        let v = g.char_eval(&el(&g, &[1]), &el(&g, &[1]));
        // e^{i pi / 3}
        assert_abs_diff_eq!(v.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, (3.0f64).sqrt() / 2.0, epsilon = 1e-15);

        for x in g.elements() {
            let one = g.char_eval(&g.identity(), &x);
            assert_abs_diff_eq!(one.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(one.im, 0.0, epsilon = 1e-15);
        }

        let g22 = make_group(&[2, 2]).unwrap();
        let v = g22.char_eval(&el(&g22, &[1, 1]), &el(&g22, &[1, 1]));
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn char_mul_inv_examples() {
        let g = z(6);
        assert_eq!(g.mul(&el(&g, &[4]), &el(&g, &[3])), el(&g, &[1]));
        assert_eq!(g.inv(&el(&g, &[1])), el(&g, &[5]));
        let g22 = make_group(&[2, 2]).unwrap();
        assert_eq!(g22.inv(&el(&g22, &[1, 0])), el(&g22, &[1, 0]));
    }

    #[test]
    fn char_mul_is_homomorphic_in_phase() {
        // Exact at the rational-phase level: phases add mod L.
        let g = make_group(&[6, 4]).unwrap();
        for a in g.elements() {
            for b in g.elements() {
                let ab = g.mul(&a, &b);
                for x in g.elements().take(5) {
                    let pa = g.char_phase(&a, &x);
                    let pb = g.char_phase(&b, &x);
                    let pab = g.char_phase(&ab, &x);
                    assert_eq!((pa + pb) % g.phase_lcm(), pab);
                }
            }
        }
    }

    #[test]
    fn char_eval_homomorphic_in_argument() {
        let g = make_group(&[4, 3]).unwrap();
        for chi in g.elements() {
            for x in g.elements() {
                for y in g.elements().take(4) {
                    let lhs = g.char_phase(&chi, &g.mul(&x, &y));
                    let rhs =
                        (g.char_phase(&chi, &x) + g.char_phase(&chi, &y)) % g.phase_lcm();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn orthonormality() {
        for moduli in [vec![6], vec![2, 2, 2], vec![4, 3], vec![5]] {
            let g = make_group(&moduli).unwrap();
            let n = g.order() as f64;
            for chi in g.elements() {
                for chi2 in g.elements() {
                    let mut acc = Complex64::ZERO;
                    for x in g.elements() {
                        acc += g.char_eval(&chi, &x).conj() * g.char_eval(&chi2, &x);
                    }
                    let expect = if chi == chi2 { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!((acc / n).re, expect, epsilon = 1e-12);
                    assert_abs_diff_eq!((acc / n).im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn transform_constant() {
        let g = z(6);
        let f = fourier_transform_real(&g, &[1.0; 6]).unwrap();
        assert_eq!(f.coeffs().len(), 1);
        assert_abs_diff_eq!(f.coeff(&g.identity()).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn transform_hexagon_function() {
        let g = z(6);
        let values: Vec<f64> = (0..6)
            .map(|x| 1.0 - (TAU * x as f64 / 6.0).cos())
            .collect();
        let f = fourier_transform_real(&g, &values).unwrap();
        assert_eq!(f.coeffs().len(), 3);
        assert_abs_diff_eq!(f.coeff(&el(&g, &[0])).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coeff(&el(&g, &[1])).re, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coeff(&el(&g, &[-1])).re, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = z(8);
        let values: Vec<Complex64> = (0..8)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = fourier_transform(&g, &values).unwrap();
        for (x, v) in g.elements().zip(&values) {
            let w = f.evaluate(&x);
            assert_abs_diff_eq!(w.re, v.re, epsilon = 1e-12);
            assert_abs_diff_eq!(w.im, v.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn real_input_gives_conjugate_symmetric_coeffs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let g = make_group(&[4, 3]).unwrap();
        let values: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = fourier_transform_real(&g, &values).unwrap();
        assert!(f.is_real(1e-12));
    }

    #[test]
    fn evaluate_examples() {
        let f = hexagon_function();
        let g = f.group().clone();
        assert_abs_diff_eq!(f.evaluate(&el(&g, &[0])).re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.evaluate(&el(&g, &[3])).re, 2.0, epsilon = 1e-15);

        // Dirac at y has coefficients conj(chi(y))/|G|.
        let y = el(&g, &[2]);
        let mut coeffs = BTreeMap::new();
        for chi in g.elements() {
            coeffs.insert(chi.clone(), g.char_eval(&chi, &y).conj() / 6.0);
        }
        let delta = FourierFunction::new(g.clone(), coeffs).unwrap();
        for x in g.elements() {
            let expect = if x == y { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(delta.evaluate(&x).re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(delta.evaluate(&x).im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn support_and_min() {
        let f = hexagon_function();
        let g = f.group().clone();
        let supp = f.support(1e-12);
        let expect: BTreeSet<_> = [el(&g, &[-1]), el(&g, &[0]), el(&g, &[1])].into();
        assert_eq!(supp, expect);
        let (min, argmin) = f.min_on_group(1e-12).unwrap();
        assert_abs_diff_eq!(min, 0.0, epsilon = 1e-12);
        assert_eq!(argmin, el(&g, &[0]));

        assert!(FourierFunction::zero(g).support(1e-12).is_empty());
    }

    #[test]
    fn min_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let g = z(5);
        let values: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = fourier_transform_real(&g, &values).unwrap();
        let brute = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let (min, _) = f.min_on_group(1e-10).unwrap();
        assert_abs_diff_eq!(min, brute, epsilon = 1e-10);
    }

    #[test]
    fn min_rejects_complex_function() {
        let g = z(4);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(el(&g, &[1]), Complex64::new(1.0, 0.0));
        let f = FourierFunction::new(g, coeffs).unwrap();
        assert!(matches!(f.min_on_group(1e-10), Err(Error::NotReal(_))));
    }

    #[test]
    fn json_round_trip() {
        let f = hexagon_function();
        let text = f.to_json();
        let back = FourierFunction::from_json(&text).unwrap();
        assert_eq!(back.group(), f.group());
        assert_eq!(back.coeffs().len(), f.coeffs().len());
        assert_eq!(text, back.to_json());
    }
}
