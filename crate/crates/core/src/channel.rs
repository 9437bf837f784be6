//! Channel models and the information measures the capacity region is
//! stated in. All logarithms are base 2; rates are bits per channel use.
//!
//! The uplink is `Y0 = X1 ⊕ … ⊕ XL ⊕ N0` over GF(F) with i.i.d. noise. The
//! downlink is described by its per-user marginals `p(y_a | x0)`; outputs
//! of different users are sampled conditionally independently given `x0`,
//! which leaves every per-user quantity unchanged.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::{Fe, FeVec, Field};

/// Accepted deviation of a probability vector's total from 1.
pub const PMF_TOLERANCE: f64 = 1e-12;

pub(crate) fn validate_pmf(pmf: &[f64], what: &str) -> Result<()> {
    if pmf.is_empty() {
        return Err(Error::usage(format!("{what}: empty distribution")));
    }
    if let Some(bad) = pmf.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::usage(format!("{what}: invalid probability {bad}")));
    }
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > PMF_TOLERANCE {
        return Err(Error::usage(format!("{what}: probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// `-Σ p log2 p`, with `0 log 0 = 0`.
pub fn entropy(pmf: &[f64]) -> Result<f64> {
    validate_pmf(pmf, "entropy")?;
    Ok(entropy_unchecked(pmf))
}

pub(crate) fn entropy_unchecked(pmf: &[f64]) -> f64 {
    -pmf.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

/// Binary entropy function.
pub fn binary_entropy(q: f64) -> f64 {
    entropy_unchecked(&[q, 1.0 - q])
}

/// The finite-field additive uplink.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSpec {
    field: Field,
    noise_pmf: Vec<f64>,
}

impl UplinkSpec {
    pub fn new(field: Field, noise_pmf: Vec<f64>) -> Result<Self> {
        if noise_pmf.len() != field.order() as usize {
            return Err(Error::usage(format!(
                "noise pmf has {} entries, field has {} elements",
                noise_pmf.len(),
                field.order()
            )));
        }
        validate_pmf(&noise_pmf, "noise pmf")?;
        Ok(UplinkSpec { field, noise_pmf })
    }

    /// Noise that is always zero.
    pub fn noiseless(field: Field) -> Self {
        let mut pmf = vec![0.0; field.order() as usize];
        pmf[0] = 1.0;
        UplinkSpec { field, noise_pmf: pmf }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn noise_pmf(&self) -> &[f64] {
        &self.noise_pmf
    }

    /// `log2 F - H(N0)`.
    pub fn bound(&self) -> f64 {
        self.field.bits_per_symbol() - entropy_unchecked(&self.noise_pmf)
    }

    pub fn is_deterministic(&self) -> bool {
        self.noise_pmf.iter().filter(|&&p| p > 0.0).count() == 1
    }

    /// Per-symbol `log p_N(z)`, `-inf` for impossible symbols.
    pub(crate) fn noise_log_pmf(&self) -> Vec<f64> {
        self.noise_pmf.iter().map(|&p| p.ln()).collect()
    }
}

/// Uplink rate bound `log2 F - H(N0)`.
pub fn uplink_bound(up: &UplinkSpec) -> f64 {
    up.bound()
}

/// A discrete memoryless channel as a row-stochastic matrix, rows indexed
/// by input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    rows: Vec<Vec<f64>>,
}

impl Dmc {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || width == 0 {
            return Err(Error::usage("channel matrix must be non-empty"));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::usage("channel matrix rows have different lengths"));
        }
        for (x, r) in rows.iter().enumerate() {
            validate_pmf(r, &format!("channel row {x}"))?;
        }
        Ok(Dmc { rows })
    }

    /// Noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Self {
        Dmc {
            rows: (0..n)
                .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    /// Binary symmetric channel with crossover `q`.
    pub fn bsc(q: f64) -> Result<Self> {
        Dmc::new(vec![vec![1.0 - q, q], vec![q, 1.0 - q]])
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Output distribution `q(y) = Σ p(x) W(y|x)`.
    pub fn output_dist(&self, p: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.outputs()];
        for (px, row) in p.iter().zip(&self.rows) {
            for (qy, w) in q.iter_mut().zip(row) {
                *qy += px * w;
            }
        }
        q
    }

    /// `I(X;Y)` for input distribution `p`, no validation.
    pub(crate) fn info(&self, p: &[f64]) -> f64 {
        let q = self.output_dist(p);
        let mut total = 0.0;
        for (px, row) in p.iter().zip(&self.rows) {
            if *px <= 0.0 {
                continue;
            }
            for (w, qy) in row.iter().zip(&q) {
                if *w > 0.0 {
                    total += px * w * (w / qy).log2();
                }
            }
        }
        total.max(0.0)
    }

    /// Divergences `D(W(·|x) || q)` in bits for every input `x`, with
    /// `f64::INFINITY` where `W(·|x)` puts mass on an output `q` misses.
    pub(crate) fn divergences(&self, q: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = 0.0;
                for (w, qy) in row.iter().zip(q) {
                    if *w > 0.0 {
                        if *qy <= 0.0 {
                            return f64::INFINITY;
                        }
                        d += w * (w / qy).log2();
                    }
                }
                d
            })
            .collect()
    }
}

/// Per-user downlink marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkSpec {
    input_size: usize,
    users: Vec<Dmc>,
}

impl DownlinkSpec {
    pub fn new(input_size: usize, users: Vec<Dmc>) -> Result<Self> {
        if input_size == 0 {
            return Err(Error::usage("downlink input alphabet must be non-empty"));
        }
        if users.is_empty() {
            return Err(Error::usage("downlink needs at least one user channel"));
        }
        if let Some((a, _)) = users.iter().enumerate().find(|(_, w)| w.inputs() != input_size) {
            return Err(Error::usage(format!(
                "user {} channel has {} input rows, expected {input_size}",
                a + 1,
                users[a].inputs()
            )));
        }
        Ok(DownlinkSpec { input_size, users })
    }

    /// Every user observes `x0` exactly.
    pub fn noiseless(input_size: usize, users: usize) -> Self {
        DownlinkSpec {
            input_size,
            users: vec![Dmc::identity(input_size); users],
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn users(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, a: usize) -> &Dmc {
        &self.users[a]
    }

    pub fn channels(&self) -> &[Dmc] {
        &self.users
    }

    /// Same channels with users relabeled: new user `i` is old user `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> DownlinkSpec {
        DownlinkSpec {
            input_size: self.input_size,
            users: perm.iter().map(|&old| self.users[old].clone()).collect(),
        }
    }
}

/// Distribution of the relay's channel input.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDist(Vec<f64>);

impl InputDist {
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        validate_pmf(&pmf, "input distribution")?;
        Ok(InputDist(pmf))
    }

    pub fn uniform(n: usize) -> Self {
        InputDist(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, x: usize) -> Self {
        let mut p = vec![0.0; n];
        p[x] = 1.0;
        InputDist(p)
    }

    pub(crate) fn from_raw(p: Vec<f64>) -> Self {
        InputDist(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    /// Total-variation distance.
    pub fn tv_distance(&self, other: &InputDist) -> f64 {
        0.5 * self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// `I(X;Y) = H(Y) - H(Y|X)` for input `d` through `w`.
pub fn mutual_info(d: &InputDist, w: &Dmc) -> Result<f64> {
    if d.0.len() != w.inputs() {
        return Err(Error::usage(format!(
            "input distribution over {} symbols, channel has {} inputs",
            d.0.len(),
            w.inputs()
        )));
    }
    Ok(w.info(&d.0))
}

/// `n` i.i.d. noise symbols.
pub fn sample_uplink_noise<R: Rng + ?Sized>(up: &UplinkSpec, n: usize, rng: &mut R) -> FeVec {
    if up.is_deterministic() {
        let z = up.noise_pmf.iter().position(|&p| p > 0.0).unwrap_or(0);
        return FeVec::from_raw(&up.field, vec![Fe(z as u32); n]);
    }
    let dist = WeightedIndex::new(&up.noise_pmf).expect("validated pmf");
    FeVec::from_raw(&up.field, (0..n).map(|_| Fe(dist.sample(rng) as u32)).collect())
}

/// Passes `x0` through user `a`'s channel.
pub fn sample_downlink<R: Rng + ?Sized>(
    down: &DownlinkSpec,
    a: usize,
    x0: &[usize],
    rng: &mut R,
) -> Result<Vec<usize>> {
    let w = down
        .users
        .get(a)
        .ok_or_else(|| Error::usage(format!("no downlink channel for user {}", a + 1)))?;
    let dists = w
        .rows
        .iter()
        .map(|r| WeightedIndex::new(r).expect("validated row"))
        .collect::<Vec<_>>();
    x0.iter()
        .map(|&x| {
            let row = dists
                .get(x)
                .ok_or_else(|| Error::usage(format!("downlink input {x} out of range")))?;
            // deterministic rows need no randomness
            match w.rows[x].iter().position(|&p| p == 1.0) {
                Some(y) => Ok(y),
                None => Ok(row.sample(rng)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(entropy(&[0.25; 4]).unwrap(), 2.0);
        assert!(matches!(entropy(&[0.5, 0.6]), Err(Error::Usage(_))));
    }

    #[test]
    fn uplink_bound_examples() {
        let f4 = Field::gf(4).unwrap();
        let up = UplinkSpec::new(f4, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(uplink_bound(&up), 1.0);
        let f2 = Field::gf(2).unwrap();
        assert_eq!(uplink_bound(&UplinkSpec::noiseless(f2.clone())), 1.0);
        assert_eq!(uplink_bound(&UplinkSpec::new(f2, vec![0.5, 0.5]).unwrap()), 0.0);
    }

    #[test]
    fn mutual_info_examples() {
        let id = Dmc::identity(2);
        assert_eq!(mutual_info(&InputDist::uniform(2), &id).unwrap(), 1.0);
        for q in [0.1, 0.25] {
            let i = mutual_info(&InputDist::uniform(2), &Dmc::bsc(q).unwrap()).unwrap();
            assert!(close(i, 1.0 - binary_entropy(q), 1e-9));
        }
        let w = Dmc::new(vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3]]).unwrap();
        assert_eq!(mutual_info(&InputDist::point(2, 1), &w).unwrap(), 0.0);
        assert!(mutual_info(&InputDist::uniform(3), &w).is_err());
    }

    #[test]
    fn product_channel_has_zero_information() {
        let w = Dmc::new(vec![vec![0.3, 0.7]; 3]).unwrap();
        let d = InputDist::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert!(mutual_info(&d, &w).unwrap().abs() < 1e-12);
    }

    #[test]
    fn degenerate_noise_samples_zero() {
        let up = UplinkSpec::noiseless(Field::gf(4).unwrap());
        let z = sample_uplink_noise(&up, 50, &mut Stream::new(1).rng());
        assert!(z.as_slice().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn noise_sampling_is_reproducible() {
        let up = UplinkSpec::new(Field::gf(2).unwrap(), vec![0.8, 0.2]).unwrap();
        let s = Stream::new(9);
        assert_eq!(
            sample_uplink_noise(&up, 100, &mut s.rng()),
            sample_uplink_noise(&up, 100, &mut s.rng())
        );
    }

    #[test]
    fn noise_frequencies_match_pmf() {
        let pmf = vec![0.5, 0.25, 0.125, 0.125];
        let up = UplinkSpec::new(Field::gf(4).unwrap(), pmf.clone()).unwrap();
        let n = 100_000;
        let z = sample_uplink_noise(&up, n, &mut Stream::new(5).rng());
        let mut counts = [0usize; 4];
        for x in z.as_slice() {
            counts[x.value() as usize] += 1;
        }
        for (c, p) in counts.iter().zip(&pmf) {
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((*c as f64 - n as f64 * p).abs() < 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn downlink_sampling() {
        let down = DownlinkSpec::new(2, vec![Dmc::identity(2), Dmc::bsc(0.5).unwrap()]).unwrap();
        let x0 = vec![0, 1, 1, 0, 1];
        let y = sample_downlink(&down, 0, &x0, &mut Stream::new(2).rng()).unwrap();
        assert_eq!(y, x0);
        assert!(sample_downlink(&down, 5, &x0, &mut Stream::new(2).rng()).is_err());
        let s = Stream::new(4);
        let y1 = sample_downlink(&down, 1, &x0, &mut s.rng()).unwrap();
        let y2 = sample_downlink(&down, 1, &x0, &mut s.rng()).unwrap();
        assert_eq!(y1, y2);
    }

    #[test]
    fn downlink_rejects_mismatched_users() {
        assert!(DownlinkSpec::new(3, vec![Dmc::identity(2)]).is_err());
        assert!(DownlinkSpec::new(2, vec![]).is_err());
    }
}
