//! Message identifiers. Users are 0-based in code and 1-based in every
//! human-facing string (`W1`, `W1_2`, `R2_3`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index set of a message: one user (private) or an unordered pair (common).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageId {
    Private(usize),
    /// Always stored with the smaller user first.
    Common(usize, usize),
}

impl MessageId {
    pub fn common(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::usage(format!("common message needs two distinct users, got {}", i + 1)));
        }
        Ok(MessageId::Common(i.min(j), i.max(j)))
    }

    /// Whether `user` knows this message a priori.
    pub fn contains(self, user: usize) -> bool {
        match self {
            MessageId::Private(i) => i == user,
            MessageId::Common(i, j) => i == user || j == user,
        }
    }

    /// Smallest user index in the set.
    pub fn min_user(self) -> usize {
        match self {
            MessageId::Private(i) | MessageId::Common(i, _) => i,
        }
    }

    pub fn max_user(self) -> usize {
        match self {
            MessageId::Private(i) | MessageId::Common(_, i) => i,
        }
    }

    /// All `L(L+1)/2` messages: privates, then pairs in lexicographic order.
    pub fn all(users: usize) -> Vec<MessageId> {
        let mut out: Vec<MessageId> = (0..users).map(MessageId::Private).collect();
        for i in 0..users {
            for j in i + 1..users {
                out.push(MessageId::Common(i, j));
            }
        }
        out
    }

    /// Position in [`MessageId::all`].
    pub fn position(self, users: usize) -> usize {
        match self {
            MessageId::Private(i) => i,
            MessageId::Common(i, j) => users + i * users - i * (i + 1) / 2 + (j - i - 1),
        }
    }

    /// Relabels users: new index of old user `u` is `inverse[u]`.
    pub fn relabel(self, inverse: &[usize]) -> MessageId {
        match self {
            MessageId::Private(i) => MessageId::Private(inverse[i]),
            MessageId::Common(i, j) => {
                let (a, b) = (inverse[i], inverse[j]);
                MessageId::Common(a.min(b), a.max(b))
            }
        }
    }

    fn suffix(self) -> String {
        match self {
            MessageId::Private(i) => format!("{}", i + 1),
            MessageId::Common(i, j) => format!("{}_{}", i + 1, j + 1),
        }
    }

    /// Rate coordinate name, e.g. `R1` or `R1_2`.
    pub fn rate_name(self) -> String {
        format!("R{}", self.suffix())
    }

    /// Parses `R1`, `R1_2`, `W3` or `W2_3` style names (1-based).
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::usage(format!("`{s}` is not a message name like R1 or R1_2"));
        let body = s.strip_prefix('R').or_else(|| s.strip_prefix('W')).ok_or_else(bad)?;
        let parse_user = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(u) if u >= 1 => Ok(u - 1),
                _ => Err(bad()),
            }
        };
        match body.split_once('_') {
            None => Ok(MessageId::Private(parse_user(body)?)),
            Some((a, b)) => MessageId::common(parse_user(a)?, parse_user(b)?),
        }
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{}", self.suffix())
    }
}
