use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::message::MessageId;

/// Parses `"39/100"`, `"0.39"`, `"1e-3"`-free decimals or integers exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::usage(format!("`{s}` is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Exact rational with the same value as a finite float.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rates of all `L(L+1)/2` messages, in bits per channel use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateTuple {
    users: usize,
    /// Indexed by [`MessageId::position`].
    rates: Vec<BigRational>,
}

impl RateTuple {
    pub fn zeros(users: usize) -> Self {
        RateTuple {
            users,
            rates: vec![BigRational::zero(); users * (users + 1) / 2],
        }
    }

    pub fn users(&self) -> usize {
        self.users
    }

    fn check(&self, m: MessageId) -> Result<()> {
        if m.max_user() >= self.users {
            return Err(Error::usage(format!("{} does not exist with {} users", m.rate_name(), self.users)));
        }
        Ok(())
    }

    pub fn set(&mut self, m: MessageId, rate: BigRational) -> Result<()> {
        self.check(m)?;
        if rate.is_negative() {
            return Err(Error::usage(format!("{} must be nonnegative", m.rate_name())));
        }
        self.rates[m.position(self.users)] = rate;
        Ok(())
    }

    pub fn with(mut self, m: MessageId, rate: BigRational) -> Result<Self> {
        self.set(m, rate)?;
        Ok(self)
    }

    pub fn get(&self, m: MessageId) -> &BigRational {
        &self.rates[m.position(self.users)]
    }

    pub fn get_f64(&self, m: MessageId) -> f64 {
        rational_to_f64(self.get(m))
    }

    pub fn iter(&self) -> impl Iterator<Item = (MessageId, &BigRational)> {
        MessageId::all(self.users).into_iter().zip(&self.rates)
    }

    /// Every rate multiplied by `factor`.
    pub fn scaled(&self, factor: &BigRational) -> Result<Self> {
        if factor.is_negative() {
            return Err(Error::usage("rate scale must be nonnegative"));
        }
        Ok(RateTuple {
            users: self.users,
            rates: self.rates.iter().map(|r| r * factor).collect(),
        })
    }

    /// Relabels users: new user `i` is old user `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut out = RateTuple::zeros(self.users);
        for (m, r) in self.iter() {
            out.rates[m.relabel(&inverse).position(self.users)] = r.clone();
        }
        out
    }

    /// Total rate of everything user `a` must decode.
    pub fn sum_rate(&self, a: usize) -> Result<BigRational> {
        if a >= self.users {
            return Err(Error::usage(format!("user {} out of range 1..={}", a + 1, self.users)));
        }
        Ok(self
            .iter()
            .filter(|(m, _)| !m.contains(a))
            .fold(BigRational::zero(), |acc, (_, r)| acc + r))
    }

    pub fn sum_rates(&self) -> SumRates {
        SumRates((0..self.users).map(|a| self.sum_rate(a).expect("in range")).collect())
    }
}

impl fmt::Display for RateTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(m, r)| format!("{}={}", m.rate_name(), r)).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Per-user sum rates `R^Σ_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumRates(pub Vec<BigRational>);

impl SumRates {
    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }

    pub fn max(&self) -> BigRational {
        self.0.iter().max().cloned().unwrap_or_else(BigRational::zero)
    }
}
