//! Feasibility of a rate tuple under the private-message scheme (FDF-P)
//! after splitting every common message between its two owners.
//!
//! Each `W_{i,j}` is split into a part sent by `i` and a part sent by `j`,
//! `s_{i,j→i} + s_{i,j→j} = R_{i,j}`. User `i` then sends privately at
//! `r_i = R_i + Σ_j s_{i,j→i}`, and the private-message region demands
//! `Σ_{j≠a} r_j <= C_a` for every `a`. The LP is solved exactly.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::optimizer::max_min_downlink;
use super::rates::{rational_from_f64, RateTuple};
use super::region::format_rate;
use crate::channel::{DownlinkSpec, UplinkSpec};
use crate::error::{Error, Result};
use crate::lp::{Constraint, FarkasCertificate, LinearProgram, LpOutcome, Orientation, Relation};

/// Per-user caps `C_a = min{log2 F - H(N0), max_p I(X0;Y_a)}`, computed
/// from a channel.
pub fn caps_from_channel(up: &UplinkSpec, down: &DownlinkSpec) -> Result<Vec<BigRational>> {
    let bound = up.bound();
    (0..down.users())
        .map(|a| {
            let single = DownlinkSpec::new(down.input_size(), vec![down.user(a).clone()])?;
            let best = max_min_downlink(&single, &[0.0])?.margin;
            Ok(rational_from_f64(bound.min(best)))
        })
        .collect()
}

/// Where each common message ends up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub pair: (usize, usize),
    pub to_first: BigRational,
    pub to_second: BigRational,
}

/// A sum `Σ_{j≠a} r_j` that another cap forces above `C_a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcedBound {
    pub user: usize,
    /// The other cap that, with the split equalities, forces the bound.
    pub via: usize,
    pub min_sum: BigRational,
    pub cap: BigRational,
}

#[derive(Debug, Clone)]
pub enum FdfpVerdict {
    Feasible {
        splits: Vec<Split>,
        effective: Vec<BigRational>,
    },
    Infeasible(Box<FdfpInfeasibility>),
}

impl FdfpVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FdfpVerdict::Feasible { .. })
    }
}

#[derive(Debug, Clone)]
pub struct FdfpInfeasibility {
    pub users: usize,
    pub lp: LinearProgram<BigRational>,
    pub certificate: FarkasCertificate<BigRational>,
    /// Users whose cap is violated by the minimum the other constraints allow.
    pub forced: Vec<ForcedBound>,
}

struct Model {
    users: usize,
    pairs: Vec<(usize, usize)>,
    lp: LinearProgram<BigRational>,
    /// Index of the first cap constraint.
    cap_offset: usize,
}

fn user_label(a: usize) -> String {
    format!("r{}", a + 1)
}

fn build(r: &RateTuple, caps: &[BigRational]) -> Result<Model> {
    let users = r.users();
    if caps.len() != users {
        return Err(Error::usage(format!("{} caps for {users} users", caps.len())));
    }
    let pairs: Vec<(usize, usize)> = (0..users)
        .flat_map(|i| (i + 1..users).map(move |j| (i, j)))
        .collect();
    let names = pairs
        .iter()
        .flat_map(|&(i, j)| {
            [
                format!("s{}_{}->{}", i + 1, j + 1, i + 1),
                format!("s{}_{}->{}", i + 1, j + 1, j + 1),
            ]
        })
        .collect();
    let mut lp = LinearProgram::new(names);
    let n = 2 * pairs.len();
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let mut coeffs = vec![BigRational::zero(); n];
        coeffs[2 * p] = BigRational::one();
        coeffs[2 * p + 1] = BigRational::one();
        let rate = r.get(crate::message::MessageId::Common(i, j)).clone();
        lp.push(Constraint::new(format!("split R{}_{}", i + 1, j + 1), coeffs, Relation::Eq, rate));
    }
    let cap_offset = lp.constraints.len();
    for (a, cap) in caps.iter().enumerate() {
        let mut coeffs = vec![BigRational::zero(); n];
        let mut private = BigRational::zero();
        for j in (0..users).filter(|&j| j != a) {
            private += r.get(crate::message::MessageId::Private(j));
            for (p, &(x, y)) in pairs.iter().enumerate() {
                if x == j {
                    coeffs[2 * p] = BigRational::one();
                } else if y == j {
                    coeffs[2 * p + 1] = BigRational::one();
                }
            }
        }
        let others: Vec<String> = (0..users).filter(|&j| j != a).map(user_label).collect();
        lp.push(Constraint::new(
            format!("cap{}: {} <= {}", a + 1, others.join(" + "), format_rate(cap)),
            coeffs,
            Relation::Le,
            cap - private,
        ));
    }
    Ok(Model {
        users,
        pairs,
        lp,
        cap_offset,
    })
}

/// Decides whether some split of the common messages fits the private
/// region with caps `caps`.
pub fn fdfp_feasible(r: &RateTuple, caps: &[BigRational]) -> Result<FdfpVerdict> {
    let model = build(r, caps)?;
    if let Some(x) = model.lp.feasible_point() {
        let splits = model
            .pairs
            .iter()
            .enumerate()
            .map(|(p, &pair)| Split {
                pair,
                to_first: x[2 * p].clone(),
                to_second: x[2 * p + 1].clone(),
            })
            .collect::<Vec<_>>();
        let mut effective: Vec<BigRational> = (0..model.users)
            .map(|u| r.get(crate::message::MessageId::Private(u)).clone())
            .collect();
        for s in &splits {
            effective[s.pair.0] += &s.to_first;
            effective[s.pair.1] += &s.to_second;
        }
        return Ok(FdfpVerdict::Feasible { splits, effective });
    }
    let certificate = model
        .lp
        .farkas()
        .ok_or_else(|| Error::Internal("infeasible LP without a Farkas certificate".into()))?;
    if !certificate.verify(&model.lp) {
        return Err(Error::Internal("Farkas certificate failed verification".into()));
    }

    // For each cap a, the least value its sum can take when only the split
    // equalities and one other cap b are imposed. A value above C_a is a
    // two-constraint contradiction.
    let splits_only = model.cap_offset;
    let mut forced = Vec::new();
    for (a, cap) in caps.iter().enumerate() {
        let target = &model.lp.constraints[model.cap_offset + a];
        let private_part = cap - &target.rhs;
        let mut best: Option<ForcedBound> = None;
        for b in (0..model.users).filter(|&b| b != a) {
            let mut sub = LinearProgram::new(model.lp.var_names.clone());
            for c in &model.lp.constraints[..splits_only] {
                sub.push(c.clone());
            }
            sub.push(model.lp.constraints[model.cap_offset + b].clone());
            if let LpOutcome::Optimal { value, .. } = sub.minimize(&target.coeffs) {
                let min_sum = value + &private_part;
                if &min_sum > cap && best.as_ref().is_none_or(|f| min_sum > f.min_sum) {
                    best = Some(ForcedBound {
                        user: a,
                        via: b,
                        min_sum,
                        cap: cap.clone(),
                    });
                }
            }
        }
        forced.extend(best);
    }
    Ok(FdfpVerdict::Infeasible(Box::new(FdfpInfeasibility {
        users: model.users,
        lp: model.lp,
        certificate,
        forced,
    })))
}

impl fmt::Display for FdfpInfeasibility {
    /// Human-readable inequality chain.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Farkas certificate (nonnegative multipliers on <= forms):")?;
        for (idx, orient, w) in &self.certificate.terms {
            let c = &self.lp.constraints[*idx];
            let dir = match orient {
                Orientation::AsWritten => "",
                Orientation::Negated => " (negated)",
            };
            writeln!(f, "  {} x [{}]{}", format_rate(w), c.label, dir)?;
        }
        let terms: Vec<String> = self
            .certificate
            .combined
            .iter()
            .zip(&self.lp.var_names)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, n)| format!("{} {}", format_rate(c), n))
            .collect();
        let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        writeln!(
            f,
            "  sum: 0 <= {} <= {} < 0, contradiction",
            lhs,
            format_rate(&self.certificate.combined_rhs)
        )?;
        for b in &self.forced {
            let others: Vec<String> = (0..self.users).filter(|&j| j != b.user).map(user_label).collect();
            writeln!(
                f,
                "  {} >= {} > {} = C_{} (split equalities with cap{})",
                others.join(" + "),
                format_rate(&b.min_sum),
                format_rate(&b.cap),
                b.user + 1,
                b.via + 1
            )?;
        }
        Ok(())
    }
}
