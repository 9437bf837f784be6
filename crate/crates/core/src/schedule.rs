//! The uplink message table.
//!
//! Row 1 holds every message user 1 must decode, one block per message.
//! Row `a >= 2` has an asterisked cell under each block whose row-1
//! message user `a` knows; those cells carry, left to right, the symbols
//! of `W1` and `W1_j` (`j != a`) that user `a` needs and user 1 knows,
//! padded with empty slots.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::message::MessageId;

/// Integer symbol lengths `k_I`, one per message.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolLengths {
    users: usize,
    k: Vec<usize>,
}

impl SymbolLengths {
    pub fn zeros(users: usize) -> Self {
        SymbolLengths {
            users,
            k: vec![0; users * (users + 1) / 2],
        }
    }

    /// Lengths listed in [`MessageId::all`] order.
    pub fn from_vec(users: usize, k: Vec<usize>) -> Result<Self> {
        if k.len() != users * (users + 1) / 2 {
            return Err(Error::usage(format!(
                "{users} users need {} lengths, got {}",
                users * (users + 1) / 2,
                k.len()
            )));
        }
        Ok(SymbolLengths { users, k })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn get(&self, m: MessageId) -> usize {
        self.k[m.position(self.users)]
    }

    pub fn set(&mut self, m: MessageId, k: usize) -> Result<()> {
        if m.max_user() >= self.users {
            return Err(Error::usage(format!("{} does not exist with {} users", m, self.users)));
        }
        self.k[m.position(self.users)] = k;
        Ok(())
    }

    pub fn with(mut self, m: MessageId, k: usize) -> Result<Self> {
        self.set(m, k)?;
        Ok(self)
    }

    pub fn iter(&self) -> impl Iterator<Item = (MessageId, usize)> + '_ {
        MessageId::all(self.users).into_iter().zip(self.k.iter().copied())
    }

    /// `k^Σ_a`: symbols user `a` must decode.
    pub fn sum(&self, a: usize) -> usize {
        self.iter().filter(|(m, _)| !m.contains(a)).map(|(_, k)| k).sum()
    }

    pub fn sums(&self) -> Vec<usize> {
        (0..self.users).map(|a| self.sum(a)).collect()
    }

    /// New user `i` is old user `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let mut out = SymbolLengths::zeros(self.users);
        for (m, k) in self.iter() {
            out.k[m.relabel(&inverse).position(self.users)] = k;
        }
        out
    }
}

/// Puts a user with the largest `k^Σ` first by swapping it with user 1.
/// Ties go to the smallest index, so an already maximal user 1 stays put.
/// Returns `perm` with new user `i` = old user `perm[i]`.
pub fn reindex_users(k: &SymbolLengths) -> (Vec<usize>, SymbolLengths) {
    let sums = k.sums();
    let mut best = 0;
    for (a, &s) in sums.iter().enumerate() {
        if s > sums[best] {
            best = a;
        }
    }
    let mut perm: Vec<usize> = (0..k.users()).collect();
    perm.swap(0, best);
    let out = k.permuted(&perm);
    (perm, out)
}

/// One symbol of one message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MessageRef {
    pub msg: MessageId,
    pub pos: usize,
}

impl MessageRef {
    pub fn new(msg: MessageId, pos: usize) -> Self {
        MessageRef { msg, pos }
    }
}

impl fmt::Display for MessageRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.msg, self.pos)
    }
}

impl TryFrom<String> for MessageRef {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        let bad = || Error::usage(format!("`{s}` is not a symbol reference like W1_2[0]"));
        let (name, rest) = s.split_once('[').ok_or_else(bad)?;
        let pos = rest.strip_suffix(']').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        Ok(MessageRef::new(MessageId::parse(name)?, pos))
    }
}

impl From<MessageRef> for String {
    fn from(r: MessageRef) -> String {
        r.to_string()
    }
}

/// A column position in an asterisked cell; `None` is an empty slot.
pub type Slot = Option<MessageRef>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// The row-1 message; also names the block.
    pub id: MessageId,
    pub width: usize,
    /// Asterisked cells keyed by 0-based row (user) index.
    pub cells: BTreeMap<usize, Vec<Slot>>,
}

impl Block {
    /// Rows that carry an asterisk under this block.
    pub fn asterisk_rows(&self) -> Vec<usize> {
        expected_rows(self.id)
    }
}

fn expected_rows(id: MessageId) -> Vec<usize> {
    match id {
        MessageId::Private(a) => vec![a],
        MessageId::Common(i, j) => vec![i, j],
    }
}

/// Row-1 messages in table order: singles 2..L, then pairs lexicographically.
pub fn block_order(users: usize) -> Vec<MessageId> {
    MessageId::all(users).into_iter().filter(|m| !m.contains(0)).collect()
}

/// Symbols row `a` must carry: `W1` then `W1_j` for increasing `j != a`.
pub fn row_content(k: &SymbolLengths, a: usize) -> Vec<MessageRef> {
    let mut msgs = vec![MessageId::Private(0)];
    msgs.extend((1..k.users()).filter(|&j| j != a).map(|j| MessageId::Common(0, j)));
    msgs.into_iter()
        .flat_map(|m| (0..k.get(m)).map(move |p| MessageRef::new(m, p)))
        .collect()
}

/// Asterisked width of row `a`: `k_a + Σ_{j != a} k_{a,j}` over `j >= 2`.
pub fn row_width(k: &SymbolLengths, a: usize) -> usize {
    block_order(k.users())
        .into_iter()
        .filter(|m| m.contains(a))
        .map(|m| k.get(m))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageTable {
    pub users: usize,
    pub blocks: Vec<Block>,
}

/// Lays out the table. User 1 must have the largest `k^Σ`
/// (see [`reindex_users`]).
pub fn build_table(k: &SymbolLengths) -> Result<MessageTable> {
    let users = k.users();
    if users < 2 {
        return Err(Error::usage("a table needs at least two users"));
    }
    let mut blocks: Vec<Block> = block_order(users)
        .into_iter()
        .map(|id| Block {
            id,
            width: k.get(id),
            cells: expected_rows(id).into_iter().map(|r| (r, Vec::new())).collect(),
        })
        .collect();
    for a in 1..users {
        let content = row_content(k, a);
        let width = row_width(k, a);
        if content.len() > width {
            return Err(Error::Construction(format!(
                "row {} holds {} symbols but has only {} asterisked columns; user 1 must have the largest sum length",
                a + 1,
                content.len(),
                width
            )));
        }
        let mut symbols = content.into_iter();
        for b in blocks.iter_mut().filter(|b| b.id.contains(a)) {
            let cell: Vec<Slot> = (0..b.width).map(|_| symbols.next()).collect();
            b.cells.insert(a, cell);
        }
    }
    Ok(MessageTable { users, blocks })
}

impl MessageTable {
    /// Total width, `k^Σ_1`.
    pub fn width(&self) -> usize {
        self.blocks.iter().map(|b| b.width).sum()
    }

    /// First global column of every block.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = acc;
                acc += b.width;
                o
            })
            .collect()
    }

    pub fn block(&self, id: MessageId) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }

    /// Symbol lengths as implied by the table: row-1 widths and the row
    /// content of every `W1` / `W1_j`. With two users `W1_2` is known to
    /// everyone, never appears, and comes back as 0.
    pub fn lengths(&self) -> SymbolLengths {
        let mut k = SymbolLengths::zeros(self.users);
        for b in &self.blocks {
            k.k[b.id.position(self.users)] = b.width;
        }
        for b in &self.blocks {
            for slot in b.cells.values().flatten().flatten() {
                let p = slot.msg.position(self.users);
                k.k[p] = k.k[p].max(slot.pos + 1);
            }
        }
        k
    }

    /// Overwrites one slot. Meant for building negative controls.
    pub fn set_slot(&mut self, block: MessageId, row: usize, pos: usize, slot: Slot) -> Result<()> {
        let b = self
            .blocks
            .iter_mut()
            .find(|b| b.id == block)
            .ok_or_else(|| Error::usage(format!("no block {block}")))?;
        let cell = b
            .cells
            .get_mut(&row)
            .ok_or_else(|| Error::usage(format!("block {block} has no cell in row {}", row + 1)))?;
        let s = cell
            .get_mut(pos)
            .ok_or_else(|| Error::usage(format!("position {pos} outside block {block}")))?;
        *s = slot;
        Ok(())
    }

    /// Every non-empty asterisked slot as `(block, row, pos, ref)`.
    pub fn asterisked(&self) -> impl Iterator<Item = (MessageId, usize, usize, MessageRef)> + '_ {
        self.blocks.iter().flat_map(|b| {
            b.cells.iter().flat_map(move |(&row, cell)| {
                cell.iter()
                    .enumerate()
                    .filter_map(move |(p, s)| s.map(|r| (b.id, row, p, r)))
            })
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::usage(format!("bad table JSON: {e}")))
    }
}

impl fmt::Display for MessageTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let offsets = self.offsets();
        for (b, off) in self.blocks.iter().zip(offsets) {
            let cols = if b.width == 0 {
                "no columns".to_string()
            } else {
                format!("columns {}..{}", off + 1, off + b.width)
            };
            writeln!(f, "block {} (width {}, {})", b.id, b.width, cols)?;
            let row1: Vec<String> = (0..b.width).map(|p| MessageRef::new(b.id, p).to_string()).collect();
            writeln!(f, "  row 1 : {}", row1.join(" "))?;
            for (row, cell) in &b.cells {
                let s: Vec<String> = cell
                    .iter()
                    .map(|s| s.map_or_else(|| "-".to_string(), |r| r.to_string()))
                    .collect();
                writeln!(f, "  row {}*: {}", row + 1, s.join(" "))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    /// Cells present exactly where expected, with the right widths.
    Shape,
    /// Row content matches the assignment and fits.
    Content,
    /// User 1 knows everything in rows 2..L.
    P1,
    /// Knowing its own row, user `a` knows every other asterisked cell.
    P2,
    /// Rows 1 and `a` cover everything user `a` needs.
    P3,
    /// Count of symbols in rows 2..L unknown to user `a`.
    C1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropFailure {
    pub check: Check,
    pub user: Option<usize>,
    pub block: Option<MessageId>,
    pub row: Option<usize>,
    pub detail: String,
}

impl fmt::Display for PropFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.check)?;
        if let Some(u) = self.user {
            write!(f, " user {}", u + 1)?;
        }
        if let Some(b) = self.block {
            write!(f, " block {b}")?;
        }
        if let Some(r) = self.row {
            write!(f, " row {}", r + 1)?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropReport {
    pub failures: Vec<PropFailure>,
    /// Per user `a >= 2`: unknown symbol count and the expected `A'`.
    pub unknown_counts: Vec<(usize, usize, usize)>,
}

impl PropReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first(&self, check: Check) -> Option<&PropFailure> {
        self.failures.iter().find(|f| f.check == check)
    }
}

impl fmt::Display for PropReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(a, got, want) in &self.unknown_counts {
            writeln!(f, "user {}: {} unknown asterisked symbols (A' = {})", a + 1, got, want)?;
        }
        if self.failures.is_empty() {
            writeln!(f, "all checks passed (shape, content, P1, P2, P3, C1)")
        } else {
            for x in &self.failures {
                writeln!(f, "FAILED {x}")?;
            }
            Ok(())
        }
    }
}

/// Checks the structural properties the decoders depend on.
pub fn verify_props(t: &MessageTable) -> PropReport {
    let users = t.users;
    let k = t.lengths();
    let mut rep = PropReport::default();
    let mut fail = |check, user, block, row, detail: String| {
        rep.failures.push(PropFailure {
            check,
            user,
            block,
            row,
            detail,
        })
    };

    let order = block_order(users);
    let ids: Vec<MessageId> = t.blocks.iter().map(|b| b.id).collect();
    if ids != order {
        fail(Check::Shape, None, None, None, format!("block order {ids:?}, expected {order:?}"));
    }
    for b in &t.blocks {
        let rows: Vec<usize> = b.cells.keys().copied().collect();
        if rows != b.asterisk_rows() {
            fail(Check::Shape, None, Some(b.id), None, format!("asterisks in rows {rows:?}"));
        }
        for (&row, cell) in &b.cells {
            if cell.len() != b.width {
                fail(Check::Shape, None, Some(b.id), Some(row), format!("cell length {} != width {}", cell.len(), b.width));
            }
        }
    }

    // row contents
    for a in 1..users {
        let laid: Vec<Slot> = t
            .blocks
            .iter()
            .filter_map(|b| b.cells.get(&a))
            .flatten()
            .copied()
            .collect();
        let filled: Vec<MessageRef> = laid.iter().flatten().copied().collect();
        let want: BTreeSet<MessageRef> = row_content(&k, a).into_iter().collect();
        let got: BTreeSet<MessageRef> = filled.iter().copied().collect();
        if got.len() != filled.len() {
            fail(Check::Content, Some(a), None, Some(a), "a symbol appears twice in the row".into());
        }
        if got != want {
            let missing: Vec<String> = want.difference(&got).map(|r| r.to_string()).collect();
            let extra: Vec<String> = got.difference(&want).map(|r| r.to_string()).collect();
            fail(
                Check::Content,
                Some(a),
                None,
                Some(a),
                format!("missing [{}], unexpected [{}]", missing.join(" "), extra.join(" ")),
            );
        }
    }

    // P1
    for (block, row, pos, r) in t.asterisked() {
        if !r.msg.contains(0) {
            fail(Check::P1, Some(0), Some(block), Some(row), format!("{r} at position {pos} is unknown to user 1"));
        }
    }

    // P2
    for a in 1..users {
        let own: HashSet<MessageRef> = t
            .asterisked()
            .filter(|&(_, row, _, _)| row == a)
            .map(|(_, _, _, r)| r)
            .collect();
        for (block, row, pos, r) in t.asterisked() {
            if row != a && !r.msg.contains(a) && !own.contains(&r) {
                fail(
                    Check::P2,
                    Some(a),
                    Some(block),
                    Some(row),
                    format!("{r} at position {pos} is neither known nor in row {}", a + 1),
                );
            }
        }
    }

    // P3
    for a in 0..users {
        let mut covered: HashSet<MessageRef> = t
            .blocks
            .iter()
            .flat_map(|b| (0..b.width).map(move |p| MessageRef::new(b.id, p)))
            .collect();
        if a > 0 {
            covered.extend(t.asterisked().filter(|&(_, row, _, _)| row == a).map(|(_, _, _, r)| r));
        }
        for (m, len) in k.iter().filter(|(m, _)| !m.contains(a)) {
            if let Some(p) = (0..len).find(|&p| !covered.contains(&MessageRef::new(m, p))) {
                fail(Check::P3, Some(a), None, None, format!("{} is not in row 1 or row {}", MessageRef::new(m, p), a + 1));
            }
        }
    }

    // C1
    for a in 1..users {
        let unknown: HashSet<MessageRef> = t
            .asterisked()
            .map(|(_, _, _, r)| r)
            .filter(|r| !r.msg.contains(a))
            .collect();
        let want = row_content(&k, a).len();
        rep.unknown_counts.push((a, unknown.len(), want));
        if unknown.len() != want {
            fail(Check::C1, Some(a), None, None, format!("{} unknown symbols, expected {want}", unknown.len()));
        }
    }
    rep
}
