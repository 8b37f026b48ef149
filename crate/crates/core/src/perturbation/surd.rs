//! Exact numbers of the form `Σ qᵢ √nᵢ` with rational `qᵢ` and squarefree `nᵢ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Surd {
    terms: BTreeMap<u64, BigRational>,
}

/// `n = s² · r` with `r` squarefree; returns `(s, r)`.
pub fn split_square(mut n: u64) -> (u64, u64) {
    let mut s = 1;
    let mut r = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            r *= p;
        }
        p += 1;
    }
    (s, r * n)
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Surd {
    pub fn zero() -> Self {
        Surd::default()
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut s = Surd::zero();
        s.add_term(1, q);
        s
    }

    pub fn int(v: i64) -> Self {
        Surd::from_rational(rational(v, 1))
    }

    /// `√n`.
    pub fn sqrt(n: u64) -> Self {
        if n == 0 {
            return Surd::zero();
        }
        let (s, r) = split_square(n);
        let mut out = Surd::zero();
        out.add_term(r, rational(s as i64, 1));
        out
    }

    fn add_term(&mut self, radicand: u64, q: BigRational) {
        if q.is_zero() {
            return;
        }
        let e = self.terms.entry(radicand).or_insert_with(BigRational::zero);
        *e += q;
        if e.is_zero() {
            self.terms.remove(&radicand);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value if no irrational part remains.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        let mut out = Surd::zero();
        if q.is_zero() {
            return out;
        }
        for (r, c) in &self.terms {
            out.terms.insert(*r, c * q);
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(r, c)| c.to_f64().unwrap_or(f64::NAN) * (*r as f64).sqrt())
            .sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.terms.iter().map(|(r, c)| (*r, c))
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        let mut out = self.clone();
        for (r, c) in &rhs.terms {
            out.add_term(*r, c.clone());
        }
        out
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        self + &(-rhs)
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        self.scale(&-BigRational::one())
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let mut out = Surd::zero();
        for (ra, ca) in &self.terms {
            for (rb, cb) in &rhs.terms {
                let (s, r) = split_square(ra * rb);
                out.add_term(r, ca * cb * BigRational::from_integer(BigInt::from(s)));
            }
        }
        out
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (r, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            let sep = if i > 0 { " " } else { "" };
            write!(f, "{sep}{sign}{}", c.abs())?;
            if *r != 1 {
                write!(f, "·√{r}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree_split() {
        assert_eq!(split_square(12), (2, 3));
        assert_eq!(split_square(72), (6, 2));
        assert_eq!(split_square(1), (1, 1));
        assert_eq!(split_square(30), (1, 30));
    }

    #[test]
    fn products_collapse() {
        let a = &Surd::sqrt(6) * &Surd::sqrt(2);
        assert_eq!(a, &Surd::sqrt(3) * &Surd::int(2));
        let b = &Surd::sqrt(2) * &Surd::sqrt(2);
        assert_eq!(b.as_rational(), Some(rational(2, 1)));
        let c = &Surd::sqrt(2) - &Surd::sqrt(8).scale(&rational(1, 2));
        assert!(c.is_zero());
    }

    #[test]
    fn display() {
        let s = &Surd::sqrt(3).scale(&rational(-1, 2)) + &Surd::int(1);
        assert_eq!(s.to_string(), "1 -1/2·√3");
    }
}
