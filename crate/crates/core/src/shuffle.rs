//! Column shuffling for the asterisked rows.
//!
//! A column of rows 2..L holds at most two symbols. For user `a` the column
//! is written `[α / β]` with `α` the row-`a` symbol. Two equal symbols count
//! as one. Whenever some `[α / β]` and `[γ / α]` coexist (`β != α`,
//! `γ != α`) the row-`a` entries are swapped, giving `[γ / β]` and
//! `[α / α]`. Each swap adds a column with two identical entries and never
//! removes one, so the loop is finite.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{Fe, FeMatrix, Field};
use crate::message::MessageId;
use crate::schedule::{row_content, MessageRef, MessageTable, Slot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplifiedColumn {
    /// Global 0-based column index.
    pub index: usize,
    pub block: MessageId,
    /// Position inside the block.
    pub offset: usize,
    /// Physical asterisked cells `(row, slot)`, rows ascending.
    pub cells: Vec<(usize, Slot)>,
}

impl SimplifiedColumn {
    /// Distinct symbols in the column.
    pub fn entries(&self) -> Vec<MessageRef> {
        let mut out: Vec<MessageRef> = Vec::with_capacity(2);
        for r in self.cells.iter().filter_map(|c| c.1) {
            if !out.contains(&r) {
                out.push(r);
            }
        }
        out
    }

    pub fn top(&self) -> Option<MessageRef> {
        self.entries().first().copied()
    }

    pub fn bottom(&self) -> Option<MessageRef> {
        self.entries().get(1).copied()
    }

    pub fn slot(&self, row: usize) -> Option<Slot> {
        self.cells.iter().find(|c| c.0 == row).map(|c| c.1)
    }

    fn slot_mut(&mut self, row: usize) -> Option<&mut Slot> {
        self.cells.iter_mut().find(|c| c.0 == row).map(|c| &mut c.1)
    }

    /// `[α / β]` as seen by user `a`: `None` when row `a` has no symbol
    /// here; `β` is `None` for a single entry or two identical ones.
    pub fn oriented(&self, a: usize) -> Option<(MessageRef, Option<MessageRef>)> {
        let top = self.slot(a)??;
        let bottom = self
            .cells
            .iter()
            .filter(|c| c.0 != a)
            .find_map(|c| c.1)
            .filter(|&b| b != top);
        Some((top, bottom))
    }

    /// Two cells carrying the same symbol.
    pub fn is_doubled(&self) -> bool {
        self.cells.len() == 2 && self.cells[0].1.is_some() && self.cells[0].1 == self.cells[1].1
    }
}

impl fmt::Display for SimplifiedColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: Option<MessageRef>| s.map_or_else(String::new, |r| r.to_string());
        write!(f, "#{} [{} / {}]", self.index + 1, show(self.top()), show(self.bottom()))
    }
}

/// One simplified column per table column.
pub fn simplify(t: &MessageTable) -> Vec<SimplifiedColumn> {
    let mut out = Vec::with_capacity(t.width());
    for (b, off) in t.blocks.iter().zip(t.offsets()) {
        for p in 0..b.width {
            out.push(SimplifiedColumn {
                index: off + p,
                block: b.id,
                offset: p,
                cells: b.cells.iter().map(|(&row, cell)| (row, cell[p])).collect(),
            });
        }
    }
    out
}

/// Writes shuffled columns back into a table.
pub fn apply_to_table(t: &MessageTable, cols: &[SimplifiedColumn]) -> MessageTable {
    let mut out = t.clone();
    for c in cols {
        let b = out.blocks.iter_mut().find(|b| b.id == c.block).expect("column block exists");
        for &(row, slot) in &c.cells {
            b.cells.get_mut(&row).expect("cell exists")[c.offset] = slot;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Swap {
    /// 1-based pass of the outer loop.
    pub cycle: usize,
    pub user: usize,
    /// Column that held `[α / β]`.
    pub col_a: usize,
    /// Column that held `[γ / α]`.
    pub col_b: usize,
    pub symbol_a: MessageRef,
    pub symbol_b: MessageRef,
}

impl fmt::Display for Swap {
    /// `cycle,user,colA,colB,symbolA,symbolB` with 1-based users and columns.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.cycle,
            self.user + 1,
            self.col_a + 1,
            self.col_b + 1,
            self.symbol_a,
            self.symbol_b
        )
    }
}

#[derive(Debug, Clone)]
pub struct Shuffled {
    pub columns: Vec<SimplifiedColumn>,
    pub log: Vec<Swap>,
    /// Outer passes run, including the final pass without swaps.
    pub cycles: usize,
}

impl Shuffled {
    pub fn log_text(&self) -> String {
        let mut s = String::from("cycle,user,colA,colB,symbolA,symbolB\n");
        for w in &self.log {
            s.push_str(&w.to_string());
            s.push('\n');
        }
        s
    }
}

fn find_pair(cols: &[SimplifiedColumn], a: usize) -> Option<(usize, usize)> {
    let views: Vec<Option<(MessageRef, Option<MessageRef>)>> = cols.iter().map(|c| c.oriented(a)).collect();
    // where each symbol sits as a bottom under a different top
    let mut under: HashMap<MessageRef, Vec<usize>> = HashMap::new();
    for (i, v) in views.iter().enumerate() {
        if let Some((_, Some(b))) = v {
            under.entry(*b).or_default().push(i);
        }
    }
    for (i, v) in views.iter().enumerate() {
        let Some((alpha, Some(_))) = v else { continue };
        if let Some(&j) = under.get(alpha).and_then(|js| js.iter().find(|&&j| j != i)) {
            return Some((i, j));
        }
    }
    None
}

/// Runs the shuffle with users visited in the order 2, 3, ..., L.
pub fn run_shuffle(cols: &[SimplifiedColumn], users: usize) -> Result<Shuffled> {
    let order: Vec<usize> = (1..users).collect();
    run_shuffle_ordered(cols, &order)
}

/// Runs the shuffle visiting users (0-based, each >= 1) in `order`.
pub fn run_shuffle_ordered(cols: &[SimplifiedColumn], order: &[usize]) -> Result<Shuffled> {
    let mut cols = cols.to_vec();
    let limit = cols.len() + 1;
    let mut log = Vec::new();
    let mut cycle = 0;
    loop {
        cycle += 1;
        if cycle > limit {
            return Err(Error::Internal(format!(
                "shuffle still swapping after {limit} passes over {} columns",
                cols.len()
            )));
        }
        let mut swapped = false;
        for &a in order {
            while let Some((i, j)) = find_pair(&cols, a) {
                let alpha = cols[i].slot(a).flatten().expect("row a entry");
                let gamma = cols[j].slot(a).flatten().expect("row a entry");
                *cols[i].slot_mut(a).expect("row a cell") = Some(gamma);
                *cols[j].slot_mut(a).expect("row a cell") = Some(alpha);
                log.push(Swap {
                    cycle,
                    user: a,
                    col_a: cols[i].index,
                    col_b: cols[j].index,
                    symbol_a: alpha,
                    symbol_b: gamma,
                });
                swapped = true;
            }
        }
        if !swapped {
            return Ok(Shuffled {
                columns: cols,
                log,
                cycles: cycle,
            });
        }
    }
}

/// Replays one logged swap on `cols`.
pub fn replay(cols: &mut [SimplifiedColumn], s: &Swap) -> Result<()> {
    let find = |cols: &[SimplifiedColumn], idx| {
        cols.iter()
            .position(|c| c.index == idx)
            .ok_or_else(|| Error::usage(format!("no column {}", idx + 1)))
    };
    let (i, j) = (find(cols, s.col_a)?, find(cols, s.col_b)?);
    let (x, y) = (cols[i].slot(s.user).flatten(), cols[j].slot(s.user).flatten());
    if x != Some(s.symbol_a) || y != Some(s.symbol_b) {
        return Err(Error::usage(format!("swap {s} does not match the columns")));
    }
    *cols[i].slot_mut(s.user).expect("cell") = y;
    *cols[j].slot_mut(s.user).expect("cell") = x;
    Ok(())
}

pub fn doubled_count(cols: &[SimplifiedColumn]) -> usize {
    cols.iter().filter(|c| c.is_doubled()).count()
}

/// The linear system user `a` solves for its row content.
#[derive(Debug, Clone)]
pub struct DecodeSystem {
    pub user: usize,
    /// Unknown symbols, in row order (`A'` of them).
    pub unknowns: Vec<MessageRef>,
    pub equations: Vec<Equation>,
}

/// `Σ unknowns[i] for i in coeffs = U[column] - W[row-1 symbol] - Σ known`.
#[derive(Debug, Clone)]
pub struct Equation {
    pub column: usize,
    pub coeffs: Vec<usize>,
    pub known: Vec<MessageRef>,
}

impl DecodeSystem {
    /// 0/1 coefficient matrix, one row per equation.
    pub fn matrix(&self, field: &Field) -> FeMatrix {
        let mut m = FeMatrix::zeros(field, self.equations.len(), self.unknowns.len());
        for (r, eq) in self.equations.iter().enumerate() {
            for &c in &eq.coeffs {
                m.set(r, c, Fe::ONE);
            }
        }
        m
    }
}

/// Builds user `a`'s system from the columns where row `a` is filled.
pub fn decode_matrix(cols: &[SimplifiedColumn], a: usize, t: &MessageTable) -> Result<DecodeSystem> {
    if a == 0 || a >= t.users {
        return Err(Error::usage(format!("user {} has no asterisked row", a + 1)));
    }
    let unknowns = row_content(&t.lengths(), a);
    let position: HashMap<MessageRef, usize> = unknowns.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut equations = Vec::new();
    for c in cols {
        let Some((top, bottom)) = c.oriented(a) else { continue };
        let mut coeffs = Vec::new();
        let mut known = Vec::new();
        for r in std::iter::once(top).chain(bottom) {
            if r.msg.contains(a) {
                known.push(r);
            } else {
                let i = *position
                    .get(&r)
                    .ok_or_else(|| Error::Internal(format!("{r} in column {} is not in row {}", c.index + 1, a + 1)))?;
                coeffs.push(i);
            }
        }
        equations.push(Equation {
            column: c.index,
            coeffs,
            known,
        });
    }
    Ok(DecodeSystem {
        user: a,
        unknowns,
        equations,
    })
}

/// Checks the chain structure for user `a`: whenever an unknown `α` sits
/// under a different top, exactly one column has `α` on top and that
/// column has no unknown symbol beneath it.
pub fn chain_audit(cols: &[SimplifiedColumn], a: usize) -> std::result::Result<(), String> {
    let views: Vec<(usize, MessageRef, Option<MessageRef>)> = cols
        .iter()
        .filter_map(|c| c.oriented(a).map(|(t, b)| (c.index, t, b)))
        .collect();
    let mut tops: HashMap<MessageRef, Vec<usize>> = HashMap::new();
    for &(i, t, _) in &views {
        tops.entry(t).or_default().push(i);
    }
    if let Some((t, is)) = tops.iter().find(|(_, is)| is.len() > 1) {
        return Err(format!("{t} on top of columns {is:?}"));
    }
    let unknown_bottom: HashSet<usize> = views
        .iter()
        .filter(|(_, _, b)| b.is_some_and(|b| !b.msg.contains(a)))
        .map(|&(i, _, _)| i)
        .collect();
    for &(i, t, b) in &views {
        let Some(alpha) = b.filter(|b| !b.msg.contains(a)) else { continue };
        match tops.get(&alpha).map(|v| v.as_slice()) {
            Some(&[j]) if !unknown_bottom.contains(&j) => {}
            Some(&[j]) => {
                return Err(format!(
                    "column {} has {alpha} under {t}, but column {} tops {alpha} over another unknown",
                    i + 1,
                    j + 1
                ))
            }
            _ => return Err(format!("{alpha} under {t} in column {} is never on top", i + 1)),
        }
    }
    Ok(())
}
