//! Finite combinations of normalized Hermite functions and the ladder action
//! of `x` and `iD` on them.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::surd::{rational, Surd};

/// Letters of a ladder word. `D` itself is `−i·(iD)`; real words use `ID`
/// (or even powers of `D`, via `D² = −(iD)²`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    X,
    ID,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HermiteVector {
    coeffs: BTreeMap<usize, Surd>,
}

impl HermiteVector {
    pub fn zero() -> Self {
        HermiteVector::default()
    }

    /// The basis vector `υ_k`.
    pub fn basis(k: usize) -> Self {
        let mut v = HermiteVector::zero();
        v.add(k, &Surd::int(1));
        v
    }

    pub fn add(&mut self, k: usize, c: &Surd) {
        let e = self.coeffs.entry(k).or_default();
        *e = &*e + c;
        if e.is_zero() {
            self.coeffs.remove(&k);
        }
    }

    pub fn get(&self, k: usize) -> Surd {
        self.coeffs.get(&k).cloned().unwrap_or_default()
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Surd)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = HermiteVector::zero();
        for (k, c) in &self.coeffs {
            out.add(*k, &c.scale(q));
        }
        out
    }

    pub fn plus(&self, other: &HermiteVector) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add(*k, c);
        }
        out
    }

    /// `⟨self, other⟩` in the real orthonormal basis.
    pub fn inner(&self, other: &HermiteVector) -> Surd {
        let mut s = Surd::zero();
        for (k, a) in &self.coeffs {
            if let Some(b) = other.coeffs.get(k) {
                s = &s + &(a * b);
            }
        }
        s
    }

    pub fn norm2(&self) -> Surd {
        self.inner(self)
    }

    /// Raising `(x − iD)υ_k = √(2k+2) υ_{k+1}`.
    pub fn raise(&self) -> Self {
        let mut out = HermiteVector::zero();
        for (k, c) in &self.coeffs {
            out.add(k + 1, &(c * &Surd::sqrt(2 * *k as u64 + 2)));
        }
        out
    }

    /// Lowering `(x + iD)υ_k = √(2k) υ_{k−1}`.
    pub fn lower(&self) -> Self {
        let mut out = HermiteVector::zero();
        for (k, c) in &self.coeffs {
            if *k > 0 {
                out.add(k - 1, &(c * &Surd::sqrt(2 * *k as u64)));
            }
        }
        out
    }

    fn apply_letter(&self, letter: Letter) -> Self {
        let half = rational(1, 2);
        let (r, l) = (self.raise(), self.lower());
        match letter {
            Letter::X => r.plus(&l).scale(&half),
            Letter::ID => l.plus(&r.scale(&rational(-1, 1))).scale(&half),
        }
    }

    /// `h₀υ_k = 2(k − l)υ_k` with `h₀ = D² + x² − (2l+1)`.
    pub fn apply_h0(&self, ell: usize) -> Self {
        let mut out = HermiteVector::zero();
        for (k, c) in &self.coeffs {
            let e = 2 * (*k as i64 - ell as i64);
            out.add(*k, &c.scale(&rational(e, 1)));
        }
        out
    }

    pub fn to_f64(&self) -> Vec<(usize, f64)> {
        self.coeffs.iter().map(|(k, c)| (*k, c.to_f64())).collect()
    }
}

/// Applies the operator product `word[0]·word[1]⋯word[m−1]` to `v`
/// (the last letter acts first).
pub fn ladder_apply(v: &HermiteVector, word: &[Letter]) -> HermiteVector {
    word.iter()
        .rev()
        .fold(v.clone(), |acc, &l| acc.apply_letter(l))
}

/// Polynomial in `x` with exact rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XPoly {
    pub coeffs: Vec<BigRational>,
}

impl XPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn coeff(&self, j: usize) -> BigRational {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn apply(&self, v: &HermiteVector) -> HermiteVector {
        // Horner: (((c_d x + c_{d-1}) x + …) x + c_0) v
        let mut acc = HermiteVector::zero();
        for c in self.coeffs.iter().rev() {
            acc = ladder_apply(&acc, &[Letter::X]).plus(&v.scale(c));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_on_basis() {
        let l = 3;
        let v = ladder_apply(&HermiteVector::basis(l), &[Letter::X]);
        let expect = {
            let mut e = HermiteVector::zero();
            e.add(l + 1, &Surd::sqrt(2 * l as u64 + 2).scale(&rational(1, 2)));
            e.add(l - 1, &Surd::sqrt(2 * l as u64).scale(&rational(1, 2)));
            e
        };
        assert_eq!(v, expect);
    }

    #[test]
    fn x_squared_on_basis() {
        for l in 0..6u64 {
            let v = ladder_apply(&HermiteVector::basis(l as usize), &[Letter::X, Letter::X]);
            let q = rational(1, 4);
            assert_eq!(
                v.get(l as usize + 2),
                Surd::sqrt((2 * l + 2) * (2 * l + 4)).scale(&q)
            );
            assert_eq!(v.get(l as usize), Surd::int(4 * l as i64 + 2).scale(&q));
            if l >= 2 {
                assert_eq!(
                    v.get(l as usize - 2),
                    Surd::sqrt(2 * l * (2 * l - 2)).scale(&q)
                );
            }
        }
    }

    #[test]
    fn empty_word_is_identity() {
        let v = HermiteVector::basis(4).plus(&HermiteVector::basis(1));
        assert_eq!(ladder_apply(&v, &[]), v);
    }

    #[test]
    fn harmonic_oscillator_identity() {
        // x² − (iD)² = D² + x² acts as 2k+1
        for k in 0..5 {
            let b = HermiteVector::basis(k);
            let x2 = ladder_apply(&b, &[Letter::X, Letter::X]);
            let id2 = ladder_apply(&b, &[Letter::ID, Letter::ID]);
            let sum = x2.plus(&id2.scale(&rational(-1, 1)));
            assert_eq!(sum, b.scale(&rational(2 * k as i64 + 1, 1)));
        }
    }

    #[test]
    fn second_moments() {
        for l in 0..6 {
            let b = HermiteVector::basis(l);
            let xb = ladder_apply(&b, &[Letter::X]);
            let db = ladder_apply(&b, &[Letter::ID]);
            let half = rational(2 * l as i64 + 1, 2);
            assert_eq!(xb.norm2().as_rational(), Some(half.clone()));
            assert_eq!(db.norm2().as_rational(), Some(half));
        }
    }
}
