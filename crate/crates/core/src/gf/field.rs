use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::poly;
use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// A field element as its canonical integer in `[0, F)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub(crate) u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parameters identifying a finite field and its polynomial basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    order: u32,
    characteristic: u32,
    degree: u32,
    /// Monic, irreducible, `degree + 1` coefficients, low degree first.
    reduction_poly: Vec<u32>,
}

fn smallest_prime_factor(n: u32) -> u32 {
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 1;
    }
    n
}

/// Splits `order` as p^m, or fails if it is not a prime power.
fn prime_power(order: u32) -> Result<(u32, u32)> {
    if order < 2 {
        return Err(Error::Domain(format!("field order {order} must be at least 2")));
    }
    if order > MAX_ORDER {
        return Err(Error::Domain(format!("field order {order} exceeds {MAX_ORDER}")));
    }
    let p = smallest_prime_factor(order);
    let mut rest = order;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    if rest != 1 {
        return Err(Error::Domain(format!("field order {order} is not a prime power")));
    }
    Ok((p, m))
}

impl FieldSpec {
    /// GF(order) with the lexicographically smallest monic irreducible
    /// reduction polynomial (lower coefficients read as a base-p integer).
    pub fn new(order: u32) -> Result<Self> {
        let (p, m) = prime_power(order)?;
        let count = (p as u64).pow(m);
        let poly = (0..count)
            .map(|idx| poly::monic_from_index(m, idx, p))
            .find(|f| poly::is_irreducible(f, p))
            .ok_or_else(|| Error::Internal(format!("no irreducible of degree {m} over GF({p})")))?;
        Ok(FieldSpec {
            order,
            characteristic: p,
            degree: m,
            reduction_poly: poly,
        })
    }

    /// GF(order) with a caller-supplied reduction polynomial.
    pub fn with_poly(order: u32, reduction_poly: Vec<u32>) -> Result<Self> {
        let (p, m) = prime_power(order)?;
        if reduction_poly.len() != m as usize + 1 {
            return Err(Error::Domain(format!(
                "reduction polynomial for GF({order}) needs {} coefficients, got {}",
                m + 1,
                reduction_poly.len()
            )));
        }
        if reduction_poly.iter().any(|&c| c >= p) {
            return Err(Error::Domain(format!(
                "reduction polynomial coefficients must be digits below {p}"
            )));
        }
        if reduction_poly[m as usize] != 1 {
            return Err(Error::Domain("reduction polynomial must be monic".into()));
        }
        if !poly::is_irreducible(&reduction_poly, p) {
            return Err(Error::Domain(format!(
                "reduction polynomial {reduction_poly:?} is reducible over GF({p})"
            )));
        }
        Ok(FieldSpec {
            order,
            characteristic: p,
            degree: m,
            reduction_poly,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn reduction_poly(&self) -> &[u32] {
        &self.reduction_poly
    }

    /// Product through explicit polynomial reduction. Used to build the
    /// log tables and as a test oracle.
    pub(crate) fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let (p, m) = (self.characteristic, self.degree);
        let prod = poly::mul(&poly::to_digits(a, p, m), &poly::to_digits(b, p, m), p);
        let mut r = poly::rem(&prod, &self.reduction_poly, p);
        r.resize(m as usize, 0);
        poly::from_digits(&r, p)
    }
}

struct Tables {
    spec: FieldSpec,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A constructed field. Cheap to clone; all clones share lookup tables.
#[derive(Clone)]
pub struct Field(Arc<Tables>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order())
    }
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let q = spec.order;
        let n = (q - 1) as usize;
        // find a primitive element by walking powers
        let mut exp = Vec::new();
        for g in 1..q {
            if q > 2 && g == 1 {
                continue;
            }
            exp.clear();
            let mut x = 1u32;
            loop {
                exp.push(x);
                x = spec.slow_mul(x, g);
                if x == 1 || exp.len() > n {
                    break;
                }
            }
            if exp.len() == n {
                break;
            }
        }
        if exp.len() != n {
            return Err(Error::Internal(format!("no primitive element in GF({q})")));
        }
        let mut log = vec![0u32; q as usize];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        let doubled: Vec<u32> = exp.iter().chain(exp.iter()).copied().collect();
        Ok(Field(Arc::new(Tables {
            spec,
            exp: doubled,
            log,
        })))
    }

    /// GF(order) with the default basis.
    pub fn gf(order: u32) -> Result<Self> {
        Field::new(FieldSpec::new(order)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    pub fn order(&self) -> u32 {
        self.0.spec.order
    }

    pub fn characteristic(&self) -> u32 {
        self.0.spec.characteristic
    }

    /// log2 F, the information content of one symbol in bits.
    pub fn bits_per_symbol(&self) -> f64 {
        (self.order() as f64).log2()
    }

    /// Validates a canonical integer as an element of this field.
    pub fn elem(&self, v: u32) -> Result<Fe> {
        if v < self.order() {
            Ok(Fe(v))
        } else {
            Err(Error::usage(format!("{v} is not an element of GF({})", self.order())))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order()).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let s = &self.0.spec;
        if s.characteristic == 2 {
            return Fe(a.0 ^ b.0);
        }
        if s.degree == 1 {
            return Fe((a.0 + b.0) % s.characteristic);
        }
        let p = s.characteristic;
        let (mut x, mut y, mut out, mut place) = (a.0, b.0, 0, 1);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let s = &self.0.spec;
        if s.characteristic == 2 {
            return a;
        }
        if s.degree == 1 {
            return Fe((s.characteristic - a.0) % s.characteristic);
        }
        let p = s.characteristic;
        let (mut x, mut out, mut place) = (a.0, 0, 1);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        Fe(out)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let t = &self.0;
        Fe(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        let t = &self.0;
        let n = self.order() - 1;
        Ok(Fe(t.exp[((n - t.log[a.0 as usize]) % n) as usize]))
    }

    /// Canonical index of a vector: element 0 is the least significant
    /// base-F digit. Returns `None` when the index overflows 128 bits.
    pub fn canonical_index(&self, v: &[Fe]) -> Option<u128> {
        let f = self.order() as u128;
        v.iter().rev().try_fold(0u128, |acc, x| acc.checked_mul(f)?.checked_add(x.0 as u128))
    }

    /// Total order on equal-length vectors matching their canonical index.
    pub fn canonical_cmp(a: &[Fe], b: &[Fe]) -> std::cmp::Ordering {
        a.iter().rev().cmp(b.iter().rev())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf2_cancellation() {
        let f = Field::gf(2).unwrap();
        assert_eq!(f.add(Fe(1), Fe(1)), Fe(0));
        assert_eq!(f.mul(Fe(1), Fe(1)), Fe(1));
    }

    #[test]
    fn gf4_examples() {
        let f = Field::gf(4).unwrap();
        assert_eq!(f.spec().reduction_poly(), &[1, 1, 1]);
        // (1,0) + (1,1) digit-wise mod 2 = (0,1) -> 2 xor 3 = 1
        assert_eq!(f.add(Fe(2), Fe(3)), Fe(1));
        // x * x = x^2 = x + 1
        assert_eq!(f.mul(Fe(2), Fe(2)), Fe(3));
    }

    #[test]
    fn gf5_examples() {
        let f = Field::gf(5).unwrap();
        assert_eq!(f.add(Fe(3), Fe(4)), Fe(2));
        assert_eq!(f.mul(Fe(3), Fe(4)), Fe(2));
        assert_eq!(f.sub(Fe(1), Fe(3)), Fe(3));
    }

    #[test]
    fn inverse_of_zero_is_domain_error() {
        let f = Field::gf(7).unwrap();
        assert!(matches!(f.inv(Fe::ZERO), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_orders_and_polys() {
        assert!(FieldSpec::new(6).is_err());
        assert!(FieldSpec::new(1).is_err());
        assert!(FieldSpec::new(MAX_ORDER * 2).is_err());
        assert!(FieldSpec::with_poly(4, vec![1, 0, 1]).is_err());
        assert!(FieldSpec::with_poly(4, vec![1, 1, 0]).is_err());
        assert!(FieldSpec::with_poly(8, vec![1, 1, 0, 1]).is_ok());
    }

    #[test]
    fn default_polys_are_lexicographically_smallest() {
        assert_eq!(FieldSpec::new(8).unwrap().reduction_poly(), &[1, 1, 0, 1]);
        assert_eq!(FieldSpec::new(9).unwrap().reduction_poly(), &[1, 0, 1]);
        assert_eq!(FieldSpec::new(5).unwrap().reduction_poly(), &[0, 1]);
    }

    #[test]
    fn elem_bounds() {
        let f = Field::gf(4).unwrap();
        assert!(f.elem(3).is_ok());
        assert!(matches!(f.elem(4), Err(Error::Usage(_))));
    }

    fn check_axioms(f: &Field) {
        let els: Vec<Fe> = f.elements().collect();
        for &a in &els {
            assert_eq!(f.add(f.sub(a, a), a), a);
            if !a.is_zero() {
                assert_eq!(f.mul(f.inv(a).unwrap(), a), Fe::ONE);
            }
            for &b in &els {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.add(f.sub(a, b), b), a);
                assert_eq!(f.mul(a, b).0, f.spec().slow_mul(a.0, b.0));
                for &c in &els {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn axioms_exhaustive_small_fields() {
        for q in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            check_axioms(&Field::gf(q).unwrap());
        }
    }

    #[test]
    fn canonical_order() {
        let f = Field::gf(3).unwrap();
        let a = [Fe(2), Fe(0)];
        let b = [Fe(0), Fe(1)];
        assert_eq!(f.canonical_index(&a), Some(2));
        assert_eq!(f.canonical_index(&b), Some(3));
        assert_eq!(Field::canonical_cmp(&a, &b), std::cmp::Ordering::Less);
    }
}
