//! Dense two-phase simplex with Bland's rule, generic over the scalar.
//!
//! With [`BigRational`] every answer is exact, and infeasibility comes with
//! a Farkas certificate that [`FarkasCertificate::verify`] checks without
//! trusting the solver. The `f64` instantiation serves small direction-finding
//! problems inside the downlink optimizer.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Scalar field the simplex can pivot over.
pub trait LpScalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn is_nil(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
}

impl LpScalar for BigRational {
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

const F64_EPS: f64 = 1e-12;

impl LpScalar for f64 {
    fn is_pos(&self) -> bool {
        *self > F64_EPS
    }
    fn is_neg(&self) -> bool {
        *self < -F64_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// `Σ coeffs[j] x_j  (relation)  rhs`, over nonnegative variables.
#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub label: String,
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: LpScalar> Constraint<T> {
    pub fn new(label: impl Into<String>, coeffs: Vec<T>, relation: Relation, rhs: T) -> Self {
        Constraint {
            label: label.into(),
            coeffs,
            relation,
            rhs,
        }
    }
}

/// A feasibility or minimization problem over `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub n_vars: usize,
    pub var_names: Vec<String>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

/// Orientation of a constraint in `<=` form: as written, or negated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    AsWritten,
    Negated,
}

/// Nonnegative weights on `<=`-oriented constraints whose combination
/// reads `0 <= (nonnegative combination) · x <= (negative number)`.
#[derive(Debug, Clone)]
pub struct FarkasCertificate<T> {
    pub terms: Vec<(usize, Orientation, T)>,
    /// Combined left-hand coefficients (all >= 0).
    pub combined: Vec<T>,
    /// Combined right-hand side (< 0).
    pub combined_rhs: T,
}

impl<T: LpScalar> FarkasCertificate<T> {
    /// Recomputes the combination from the program and checks it proves
    /// infeasibility.
    pub fn verify(&self, lp: &LinearProgram<T>) -> bool {
        let mut lhs = vec![T::zero(); lp.n_vars];
        let mut rhs = T::zero();
        for (idx, orient, w) in &self.terms {
            if w.is_neg() {
                return false;
            }
            let Some(c) = lp.constraints.get(*idx) else {
                return false;
            };
            let usable = matches!(
                (c.relation, orient),
                (Relation::Le, Orientation::AsWritten) | (Relation::Ge, Orientation::Negated) | (Relation::Eq, _)
            );
            if !usable {
                return false;
            }
            let sign = if *orient == Orientation::AsWritten { T::one() } else { -T::one() };
            for (l, a) in lhs.iter_mut().zip(&c.coeffs) {
                *l = l.clone() + sign.clone() * w.clone() * a.clone();
            }
            rhs = rhs + sign * w.clone() * c.rhs.clone();
        }
        lhs.iter().all(|v| !v.is_neg()) && rhs.is_neg()
    }
}

/// Normalized `<=` rows with back-references.
struct Normalized<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    origin: Vec<(usize, Orientation)>,
}

fn normalize<T: LpScalar>(lp: &LinearProgram<T>) -> Normalized<T> {
    let mut out = Normalized {
        rows: Vec::new(),
        rhs: Vec::new(),
        origin: Vec::new(),
    };
    for (i, c) in lp.constraints.iter().enumerate() {
        assert_eq!(c.coeffs.len(), lp.n_vars, "constraint `{}` has wrong width", c.label);
        let negated = || c.coeffs.iter().map(|a| -a.clone()).collect::<Vec<_>>();
        if matches!(c.relation, Relation::Le | Relation::Eq) {
            out.rows.push(c.coeffs.clone());
            out.rhs.push(c.rhs.clone());
            out.origin.push((i, Orientation::AsWritten));
        }
        if matches!(c.relation, Relation::Ge | Relation::Eq) {
            out.rows.push(negated());
            out.rhs.push(-c.rhs.clone());
            out.origin.push((i, Orientation::Negated));
        }
    }
    out
}

struct Tableau<T> {
    a: Vec<Vec<T>>,
    b: Vec<T>,
    basis: Vec<usize>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl<T: LpScalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        for v in self.a[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        self.b[r] = self.b[r].clone() / p;
        let pivot_row = self.a[r].clone();
        let pivot_b = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_nil() {
                continue;
            }
            let f = self.a[i][c].clone();
            for (v, pv) in self.a[i].iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            self.a[i][c] = T::zero();
            self.b[i] = self.b[i].clone() - f * pivot_b.clone();
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[T], j: usize) -> T {
        let mut d = cost[j].clone();
        for (i, &bv) in self.basis.iter().enumerate() {
            if !cost[bv].is_nil() && !self.a[i][j].is_nil() {
                d = d - cost[bv].clone() * self.a[i][j].clone();
            }
        }
        d
    }

    /// Minimizes `cost` over columns `< active_cols`.
    fn optimize(&mut self, cost: &[T], active_cols: usize) -> PhaseEnd {
        let cap = 50_000;
        for _ in 0..cap {
            let entering = (0..active_cols)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(cost, j).is_neg());
            let Some(c) = entering else {
                return PhaseEnd::Optimal;
            };
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.a.len() {
                if !self.a[r][c].is_pos() {
                    continue;
                }
                let ratio = self.b[r].clone() / self.a[r][c].clone();
                let better = match &best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < *bratio
                            || (!(ratio.clone() - bratio.clone()).is_pos()
                                && !(bratio.clone() - ratio.clone()).is_pos()
                                && self.basis[r] < self.basis[*br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return PhaseEnd::Unbounded,
            }
        }
        PhaseEnd::Optimal
    }

    fn objective(&self, cost: &[T]) -> T {
        self.basis
            .iter()
            .zip(&self.b)
            .fold(T::zero(), |acc, (&bv, bi)| acc + cost[bv].clone() * bi.clone())
    }
}

impl<T: LpScalar> LinearProgram<T> {
    pub fn new(var_names: Vec<String>) -> Self {
        LinearProgram {
            n_vars: var_names.len(),
            var_names,
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Constraint<T>) {
        self.constraints.push(c);
    }

    /// Minimizes `objective · x` subject to the constraints and `x >= 0`.
    pub fn minimize(&self, objective: &[T]) -> LpOutcome<T> {
        assert_eq!(objective.len(), self.n_vars);
        let norm = normalize(self);
        let m = norm.rows.len();
        let n = self.n_vars;
        let needs_art: Vec<bool> = norm.rhs.iter().map(|b| b.is_neg()).collect();
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let width = n + m + n_art;

        let mut t = Tableau {
            a: Vec::with_capacity(m),
            b: Vec::with_capacity(m),
            basis: Vec::with_capacity(m),
        };
        let mut art_col = n + m;
        for i in 0..m {
            let mut row = vec![T::zero(); width];
            let sign = if needs_art[i] { -T::one() } else { T::one() };
            for j in 0..n {
                row[j] = sign.clone() * norm.rows[i][j].clone();
            }
            row[n + i] = sign.clone();
            if needs_art[i] {
                row[art_col] = T::one();
                t.basis.push(art_col);
                art_col += 1;
            } else {
                t.basis.push(n + i);
            }
            t.a.push(row);
            t.b.push(sign * norm.rhs[i].clone());
        }

        if n_art > 0 {
            let mut phase1 = vec![T::zero(); width];
            for c in phase1.iter_mut().skip(n + m) {
                *c = T::one();
            }
            t.optimize(&phase1, width);
            if t.objective(&phase1).is_pos() {
                return LpOutcome::Infeasible;
            }
            // drive zero-level artificials out of the basis
            let mut r = 0;
            while r < t.a.len() {
                if t.basis[r] >= n + m {
                    match (0..n + m).find(|&j| !t.a[r][j].is_nil()) {
                        Some(j) => t.pivot(r, j),
                        None => {
                            t.a.remove(r);
                            t.b.remove(r);
                            t.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
        }

        let mut cost = vec![T::zero(); width];
        cost[..n].clone_from_slice(objective);
        match t.optimize(&cost, n + m) {
            PhaseEnd::Unbounded => LpOutcome::Unbounded,
            PhaseEnd::Optimal => {
                let mut x = vec![T::zero(); n];
                for (i, &bv) in t.basis.iter().enumerate() {
                    if bv < n {
                        x[bv] = t.b[i].clone();
                    }
                }
                let value = x
                    .iter()
                    .zip(objective)
                    .fold(T::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
                LpOutcome::Optimal { x, value }
            }
        }
    }

    /// A feasible point, or `None`.
    pub fn feasible_point(&self) -> Option<Vec<T>> {
        match self.minimize(&vec![T::zero(); self.n_vars]) {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        }
    }

    /// Searches for a Farkas certificate by solving the alternative system
    /// `y >= 0, yᵀA >= 0, yᵀb <= -1` over the `<=`-normalized rows.
    pub fn farkas(&self) -> Option<FarkasCertificate<T>> {
        let norm = normalize(self);
        let m = norm.rows.len();
        let mut alt = LinearProgram::new((0..m).map(|i| format!("y{i}")).collect());
        for j in 0..self.n_vars {
            let coeffs = (0..m).map(|i| norm.rows[i][j].clone()).collect();
            alt.push(Constraint::new(format!("col{j}"), coeffs, Relation::Ge, T::zero()));
        }
        alt.push(Constraint::new("rhs", norm.rhs.clone(), Relation::Le, -T::one()));
        let y = alt.feasible_point()?;
        let mut combined = vec![T::zero(); self.n_vars];
        let mut combined_rhs = T::zero();
        let mut terms = Vec::new();
        for (i, w) in y.into_iter().enumerate() {
            if w.is_nil() {
                continue;
            }
            for (c, a) in combined.iter_mut().zip(&norm.rows[i]) {
                *c = c.clone() + w.clone() * a.clone();
            }
            combined_rhs = combined_rhs + w.clone() * norm.rhs[i].clone();
            let (idx, orient) = norm.origin[i];
            terms.push((idx, orient, w));
        }
        Some(FarkasCertificate {
            terms,
            combined,
            combined_rhs,
        })
    }
}
