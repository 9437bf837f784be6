//! Maximizes `g(p) = min_a ( I(X0;Y_a) - R^Σ_a )` over input distributions.
//!
//! `g` is concave (a minimum of concave functions). We start from the best
//! point of a simplex grid with step 1/32 and refine with a Frank-Wolfe
//! scheme adapted to the minimum: each step linearizes every user's
//! information at the current point, solves the small LP
//! `max_v min_a (value_a + grad_a · (v - p))` over the simplex, and runs an
//! exact line search toward the LP vertex. By concavity the LP optimum
//! upper-bounds the true maximum, so `lp - g(p)` is a certified gap.

use crate::channel::{DownlinkSpec, InputDist};
use crate::error::{Error, Result};
use crate::lp::{Constraint, LinearProgram, LpOutcome, Relation};

/// Grid resolution: coordinates are multiples of 1/GRID_STEPS.
pub const GRID_STEPS: usize = 32;
/// Largest grid enumerated before the resolution is coarsened.
pub const MAX_GRID_POINTS: usize = 200_000;
pub const GAP_TOLERANCE: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 10_000;
/// Stand-in for an infinite directional derivative at the simplex boundary.
const STEEP: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkOptimum {
    /// `g` at [`DownlinkOptimum::argmax`]; a lower bound on the maximum.
    pub margin: f64,
    pub argmax: InputDist,
    /// Certified `max g - margin`, when every gradient at the final
    /// point was finite.
    pub gap: Option<f64>,
    pub iterations: usize,
}

impl DownlinkOptimum {
    /// Certified upper bound on the maximum, falling back to the margin.
    pub fn upper(&self) -> f64 {
        self.margin + self.gap.unwrap_or(0.0)
    }
}

struct Objective<'a> {
    down: &'a DownlinkSpec,
    sums: &'a [f64],
}

impl Objective<'_> {
    fn value(&self, p: &[f64]) -> f64 {
        self.down
            .channels()
            .iter()
            .zip(self.sums)
            .map(|(w, s)| w.info(p) - s)
            .fold(f64::INFINITY, f64::min)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Calls `visit` with every composition of `total` into `parts` parts.
fn for_each_composition(total: usize, parts: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(rest: usize, idx: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if idx + 1 == cur.len() {
            cur[idx] = rest;
            visit(cur);
            return;
        }
        for v in 0..=rest {
            cur[idx] = v;
            rec(rest - v, idx + 1, cur, visit);
        }
    }
    let mut cur = vec![0; parts];
    rec(total, 0, &mut cur, visit);
}

fn grid_steps(inputs: usize) -> usize {
    let mut steps = GRID_STEPS;
    while steps > 1 && binomial(steps + inputs - 1, inputs - 1) > MAX_GRID_POINTS {
        steps /= 2;
    }
    steps
}

/// Golden-section maximization of a concave function on [0, 1].
fn line_search(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..90 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    // endpoints matter when the maximum sits on a vertex
    [(0.0, f(0.0)), (1.0, f(1.0)), ((lo + hi) / 2.0, f((lo + hi) / 2.0))]
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Solves the linearized max-min over the simplex. Returns the vertex-mix
/// maximizer and the LP value.
fn direction(values: &[f64], grads: &[Vec<f64>], p: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = p.len();
    // variables: v_0..v_{k-1}, t+, t-
    let mut names: Vec<String> = (0..k).map(|x| format!("v{x}")).collect();
    names.push("t+".into());
    names.push("t-".into());
    let mut lp = LinearProgram::new(names);
    let mut simplex = vec![1.0; k];
    simplex.extend([0.0, 0.0]);
    lp.push(Constraint::new("simplex", simplex, Relation::Eq, 1.0));
    for (a, (val, g)) in values.iter().zip(grads).enumerate() {
        // t - g·v <= val - g·p
        let mut row: Vec<f64> = g.iter().map(|x| -x).collect();
        row.extend([1.0, -1.0]);
        let rhs = val - g.iter().zip(p).map(|(gi, pi)| gi * pi).sum::<f64>();
        lp.push(Constraint::new(format!("user{a}"), row, Relation::Le, rhs));
    }
    let mut obj = vec![0.0; k];
    obj.extend([-1.0, 1.0]);
    match lp.minimize(&obj) {
        LpOutcome::Optimal { x, value } => {
            let v: Vec<f64> = x[..k].iter().map(|c| c.max(0.0)).collect();
            let s: f64 = v.iter().sum();
            Some((v.iter().map(|c| c / s).collect(), -value))
        }
        _ => None,
    }
}

/// Maximizes `min_a (I(X0;Y_a) - sums[a])` over `p(x0)`.
pub fn max_min_downlink(down: &DownlinkSpec, sums: &[f64]) -> Result<DownlinkOptimum> {
    if sums.len() != down.users() {
        return Err(Error::usage(format!(
            "{} sum rates for {} downlink users",
            sums.len(),
            down.users()
        )));
    }
    let k = down.input_size();
    let obj = Objective { down, sums };

    let steps = grid_steps(k);
    let mut best = (f64::NEG_INFINITY, vec![1.0 / k as f64; k]);
    for_each_composition(steps, k, &mut |c| {
        let p: Vec<f64> = c.iter().map(|&x| x as f64 / steps as f64).collect();
        let v = obj.value(&p);
        if v > best.0 {
            best = (v, p);
        }
    });
    let (mut value, mut p) = best;

    let mut gap = None;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut finite = true;
        let mut values = Vec::with_capacity(down.users());
        let mut grads = Vec::with_capacity(down.users());
        for (w, s) in down.channels().iter().zip(sums) {
            values.push(w.info(&p) - s);
            let q = w.output_dist(&p);
            let g: Vec<f64> = w
                .divergences(&q)
                .into_iter()
                .map(|d| {
                    if d.is_finite() {
                        d
                    } else {
                        finite = false;
                        STEEP
                    }
                })
                .collect();
            grads.push(g);
        }
        let Some((v, lp_value)) = direction(&values, &grads, &p) else {
            break;
        };
        let this_gap = (lp_value - value).max(0.0);
        gap = finite.then_some(this_gap);
        if finite && this_gap < GAP_TOLERANCE {
            break;
        }
        let seg = |t: f64| -> Vec<f64> { p.iter().zip(&v).map(|(a, b)| a + t * (b - a)).collect() };
        let (t, new_value) = line_search(|t| obj.value(&seg(t)));
        if new_value <= value {
            // no progress along the linearized direction
            break;
        }
        p = seg(t);
        value = new_value;
    }

    Ok(DownlinkOptimum {
        margin: value,
        argmax: InputDist::from_raw(p),
        gap,
        iterations,
    })
}
