//! Physical layer of the nested scheme.
//!
//! Uplink: in every block the row-1 owner sends `W_I` and user 1 sends
//! `V_I` with a shared generator matrix and separate dithers; the relay
//! decodes `W_I ⊕ V_I` by exhaustive maximum likelihood. Downlink: the
//! relay maps the concatenation `U` to a random codeword; each user decodes
//! `U` by maximum likelihood over the candidates its side information
//! leaves open, then peels off its messages.

use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::channel::{sample_uplink_noise, DownlinkSpec, InputDist, UplinkSpec};
use crate::error::{Error, Result};
use crate::gf::{random_matrix, random_vec, Fe, FeMatrix, FeVec, Field, Solution};
use crate::message::MessageId;
use crate::rng::Stream;
use crate::schedule::{build_table, verify_props, MessageRef, MessageTable, SymbolLengths};
use crate::shuffle::{decode_matrix, run_shuffle, simplify, DecodeSystem, Shuffled};

/// Largest exhaustive search (candidates) any decoder will run.
pub const MAX_CANDIDATES: u64 = 1 << 20;

fn check_search(field: &Field, symbols: usize, what: &str) -> Result<u64> {
    let q = field.order() as u64;
    let mut total: u64 = 1;
    for _ in 0..symbols {
        total = total.saturating_mul(q);
        if total > MAX_CANDIDATES {
            return Err(Error::Capability {
                what: what.to_string(),
                value: format!("F^{symbols} with F = {q}"),
                limit: format!("{MAX_CANDIDATES} candidates"),
                hint: "shrink the message lengths or use a smaller field".into(),
            });
        }
    }
    Ok(total)
}

/// Every message of one exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageSet {
    users: usize,
    words: Vec<FeVec>,
}

impl MessageSet {
    pub fn random<R: Rng + ?Sized>(field: &Field, k: &SymbolLengths, rng: &mut R) -> Self {
        MessageSet {
            users: k.users(),
            words: k.iter().map(|(_, len)| random_vec(field, len, rng)).collect(),
        }
    }

    pub fn zeros(field: &Field, k: &SymbolLengths) -> Self {
        MessageSet {
            users: k.users(),
            words: k.iter().map(|(_, len)| FeVec::zeros(field, len)).collect(),
        }
    }

    pub fn get(&self, m: MessageId) -> &FeVec {
        &self.words[m.position(self.users)]
    }

    pub fn set(&mut self, m: MessageId, w: FeVec) -> Result<()> {
        let slot = &mut self.words[m.position(self.users)];
        if slot.len() != w.len() {
            return Err(Error::usage(format!("{m} has length {}, got {}", slot.len(), w.len())));
        }
        *slot = w;
        Ok(())
    }

    pub fn symbol(&self, r: MessageRef) -> Fe {
        self.get(r.msg).as_slice()[r.pos]
    }

    /// The messages user `a` holds a priori.
    pub fn known_to(&self, a: usize) -> KnownMessages {
        KnownMessages {
            user: a,
            words: MessageId::all(self.users)
                .into_iter()
                .filter(|m| m.contains(a))
                .map(|m| (m, self.get(m).clone()))
                .collect(),
        }
    }
}

/// Side information of one user.
#[derive(Debug, Clone)]
pub struct KnownMessages {
    pub user: usize,
    pub words: BTreeMap<MessageId, FeVec>,
}

impl KnownMessages {
    fn symbol(&self, r: MessageRef) -> Result<Fe> {
        self.words
            .get(&r.msg)
            .map(|w| w.as_slice()[r.pos])
            .ok_or_else(|| Error::Internal(format!("user {} does not know {}", self.user + 1, r.msg)))
    }
}

/// A linear block code `x = u G ⊕ q` shared by the two transmitters of
/// one block.
#[derive(Debug, Clone)]
pub struct BlockCode {
    pub g: FeMatrix,
    pub dithers: [FeVec; 2],
}

impl BlockCode {
    pub fn new(g: FeMatrix, dithers: [FeVec; 2]) -> Result<Self> {
        if dithers.iter().any(|d| d.len() != g.cols()) {
            return Err(Error::usage("dither length must equal the code length"));
        }
        Ok(BlockCode { g, dithers })
    }

    /// Uniform `G` and dithers. When `k <= n`, rank-deficient draws are
    /// discarded; the second value counts them.
    pub fn random<R: Rng + ?Sized>(field: &Field, k: usize, n: usize, rng: &mut R) -> (Self, usize) {
        let mut redraws = 0;
        let g = loop {
            let g = random_matrix(field, k, n, rng);
            if k > n || g.rank() == k {
                break g;
            }
            redraws += 1;
        };
        let dithers = [random_vec(field, n, rng), random_vec(field, n, rng)];
        (BlockCode { g, dithers }, redraws)
    }

    pub fn k(&self) -> usize {
        self.g.rows()
    }

    pub fn n(&self) -> usize {
        self.g.cols()
    }

    pub fn dither_sum(&self) -> FeVec {
        self.dithers[0].add(&self.dithers[1]).expect("equal lengths")
    }
}

/// `u G ⊕ q_t` for transmitter `t` (0 or 1).
pub fn encode_uplink(u: &FeVec, code: &BlockCode, transmitter: usize) -> Result<FeVec> {
    let q = code
        .dithers
        .get(transmitter)
        .ok_or_else(|| Error::usage(format!("transmitter {transmitter} out of range 0..2")))?;
    if u.len() != code.k() {
        return Err(Error::usage(format!("message length {} for a k = {} code", u.len(), code.k())));
    }
    u.mul_mat(&code.g)?.add(q)
}

/// Steps through every vector of `F^len` in canonical order, reporting
/// which digits changed. `visit(digits, changed)` may return `false` to
/// stop early.
fn for_each_vector(q: u32, len: usize, mut visit: impl FnMut(&[u32], &[(usize, u32)]) -> bool) {
    let mut digits = vec![0u32; len];
    let mut changed: Vec<(usize, u32)> = Vec::with_capacity(len);
    if !visit(&digits, &changed) {
        return;
    }
    loop {
        changed.clear();
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            let old = digits[i];
            digits[i] = (old + 1) % q;
            changed.push((i, old));
            if digits[i] != 0 {
                break;
            }
            i += 1;
        }
        if !visit(&digits, &changed) {
            return;
        }
    }
}

/// Relay decoding of the sum `s` from `y0 = s G ⊕ dither_sum ⊕ N0` by
/// maximum likelihood over all `F^k` candidates. Ties go to the smallest
/// canonical index.
pub fn relay_decode_sum(y0: &FeVec, code: &BlockCode, dither_sum: &FeVec, up: &UplinkSpec) -> Result<FeVec> {
    let field = up.field();
    let (k, n) = (code.k(), code.n());
    if y0.len() != n || dither_sum.len() != n {
        return Err(Error::usage(format!("received {} symbols for a length-{n} code", y0.len())));
    }
    check_search(field, k, "relay sum decoding")?;
    let z = y0.sub(dither_sum)?;
    let z = z.as_slice();
    let log_pmf = up.noise_log_pmf();
    // multiples[i][e] = e * G_i
    let multiples: Vec<Vec<Vec<Fe>>> = (0..k)
        .map(|i| {
            field
                .elements()
                .map(|e| code.g.row(i).iter().map(|&x| field.mul(e, x)).collect())
                .collect()
        })
        .collect();
    let mut codeword = vec![Fe::ZERO; n];
    let mut best = (f64::NEG_INFINITY, vec![0u32; k]);
    let mut found = false;
    for_each_vector(field.order(), k, |digits, changed| {
        for &(i, old) in changed {
            let (from, to) = (&multiples[i][old as usize], &multiples[i][digits[i] as usize]);
            for t in 0..n {
                codeword[t] = field.add(field.sub(codeword[t], from[t]), to[t]);
            }
        }
        let mut score = 0.0;
        for t in 0..n {
            score += log_pmf[field.sub(z[t], codeword[t]).value() as usize];
            if score == f64::NEG_INFINITY {
                break;
            }
        }
        if !found || score > best.0 {
            best = (score, digits.to_vec());
            found = true;
        }
        true
    });
    FeVec::from_values(field, &best.1)
}

/// Channel uses per block: `floor(n k_I / k^Σ_1)`, leftovers to the last
/// block with `k_I > 0`.
pub fn allocate_lengths(widths: &[usize], n: usize) -> Vec<usize> {
    let total: usize = widths.iter().sum();
    if total == 0 {
        return vec![0; widths.len()];
    }
    let mut out: Vec<usize> = widths.iter().map(|&k| n * k / total).collect();
    let rest = n - out.iter().sum::<usize>();
    if let Some(last) = widths.iter().rposition(|&k| k > 0) {
        out[last] += rest;
    }
    out
}

/// Table, shuffled columns and per-user decoding systems for one set of
/// symbol lengths.
#[derive(Debug, Clone)]
pub struct Scheme {
    field: Field,
    lengths: SymbolLengths,
    table: MessageTable,
    shuffled: Shuffled,
    /// Symbols summed into each position of `U`: the row-1 symbol, then
    /// the distinct asterisked symbols of that column.
    terms: Vec<Vec<MessageRef>>,
    systems: Vec<Option<DecodeSystem>>,
}

impl Scheme {
    /// Builds and checks everything. `lengths` must have user 1 maximal.
    pub fn new(field: &Field, lengths: &SymbolLengths) -> Result<Self> {
        let table = build_table(lengths)?;
        let report = verify_props(&table);
        if !report.is_ok() {
            return Err(Error::Internal(format!("table failed its checks:\n{report}")));
        }
        let shuffled = run_shuffle(&simplify(&table), table.users)?;
        let terms = shuffled
            .columns
            .iter()
            .map(|c| {
                let mut t = vec![MessageRef::new(c.block, c.offset)];
                t.extend(c.entries());
                t
            })
            .collect();
        let mut systems = vec![None];
        for a in 1..table.users {
            let sys = decode_matrix(&shuffled.columns, a, &table)?;
            if sys.matrix(field).rank() != sys.unknowns.len() {
                return Err(Error::Internal(format!("user {} cannot solve its row after shuffling", a + 1)));
            }
            systems.push(Some(sys));
        }
        Ok(Scheme {
            field: field.clone(),
            lengths: lengths.clone(),
            table,
            shuffled,
            terms,
            systems,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn lengths(&self) -> &SymbolLengths {
        &self.lengths
    }

    pub fn table(&self) -> &MessageTable {
        &self.table
    }

    pub fn shuffled(&self) -> &Shuffled {
        &self.shuffled
    }

    pub fn users(&self) -> usize {
        self.table.users
    }

    /// Length of `U`, i.e. `k^Σ_1`.
    pub fn width(&self) -> usize {
        self.terms.len()
    }

    fn block_range(&self, block: usize) -> std::ops::Range<usize> {
        let start: usize = self.table.blocks[..block].iter().map(|b| b.width).sum();
        start..start + self.table.blocks[block].width
    }

    /// `V_I` of block `block` (index into the table's blocks).
    pub fn build_v(&self, block: usize, msgs: &MessageSet) -> FeVec {
        let f = &self.field;
        let data = self.shuffled.columns[self.block_range(block)]
            .iter()
            .map(|c| c.entries().into_iter().fold(Fe::ZERO, |acc, r| f.add(acc, msgs.symbol(r))))
            .collect();
        FeVec::from_raw(f, data)
    }

    /// `U` without channel errors.
    pub fn relay_word(&self, msgs: &MessageSet) -> FeVec {
        let f = &self.field;
        let data = self
            .terms
            .iter()
            .map(|t| t.iter().fold(Fe::ZERO, |acc, &r| f.add(acc, msgs.symbol(r))))
            .collect();
        FeVec::from_raw(f, data)
    }

    /// Codes for every block: block `I` gets `k_I x n_I`.
    pub fn random_codes<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> (Vec<BlockCode>, usize) {
        let widths: Vec<usize> = self.table.blocks.iter().map(|b| b.width).collect();
        let mut redraws = 0;
        let codes = allocate_lengths(&widths, n)
            .into_iter()
            .zip(&widths)
            .map(|(nb, &k)| {
                let (c, r) = BlockCode::random(&self.field, k, nb, rng);
                redraws += r;
                c
            })
            .collect();
        (codes, redraws)
    }

    /// One uplink pass: per block, the owner sends `W_I`, user 1 sends
    /// `V_I`, and the relay decodes their sum. Returns the decoded `U`.
    pub fn uplink_round<R: Rng + ?Sized>(
        &self,
        msgs: &MessageSet,
        codes: &[BlockCode],
        up: &UplinkSpec,
        rng: &mut R,
    ) -> Result<FeVec> {
        if up.field() != &self.field {
            return Err(Error::usage("uplink field differs from the scheme's field"));
        }
        if codes.len() != self.table.blocks.len() {
            return Err(Error::usage(format!("{} codes for {} blocks", codes.len(), self.table.blocks.len())));
        }
        let mut out = Vec::with_capacity(self.width());
        for (b, code) in codes.iter().enumerate() {
            let block = &self.table.blocks[b];
            if block.width == 0 {
                continue;
            }
            let w = msgs.get(block.id);
            let v = self.build_v(b, msgs);
            let y = encode_uplink(w, code, 0)?
                .add(&encode_uplink(&v, code, 1)?)?
                .add(&sample_uplink_noise(up, code.n(), rng))?;
            out.extend(relay_decode_sum(&y, code, &code.dither_sum(), up)?.into_inner());
        }
        Ok(FeVec::from_raw(&self.field, out))
    }

    /// `U` with every unknown symbol of user `a` set to zero.
    pub fn offset(&self, a: usize, known: &KnownMessages) -> Result<FeVec> {
        let f = &self.field;
        let data = self
            .terms
            .iter()
            .map(|t| {
                t.iter()
                    .filter(|r| r.msg.contains(a))
                    .try_fold(Fe::ZERO, |acc, &r| Ok::<_, Error>(f.add(acc, known.symbol(r)?)))
            })
            .collect::<Result<Vec<Fe>>>()?;
        Ok(FeVec::from_raw(f, data))
    }

    /// The `U` values user `a` cannot rule out, as an affine space
    /// `offset + span(basis)`.
    pub fn candidate_space(&self, a: usize) -> Result<CandidateSpace> {
        if a >= self.users() {
            return Err(Error::usage(format!("no user {}", a + 1)));
        }
        let f = &self.field;
        check_search(f, self.lengths.sum(a), &format!("candidate set of user {}", a + 1))?;
        let mut generators: Vec<(MessageRef, Vec<Fe>)> = Vec::new();
        for (m, len) in self.lengths.iter().filter(|(m, _)| !m.contains(a)) {
            for p in 0..len {
                let r = MessageRef::new(m, p);
                let v = self
                    .terms
                    .iter()
                    .map(|t| if t.contains(&r) { Fe::ONE } else { Fe::ZERO })
                    .collect();
                generators.push((r, v));
            }
        }
        // keep generators that are independent of the ones kept so far
        let mut reduced: Vec<(usize, Vec<Fe>)> = Vec::new();
        let mut basis = Vec::new();
        let mut witness = Vec::new();
        for (r, g) in generators {
            let mut v = g.clone();
            for (pivot, row) in &reduced {
                let c = v[*pivot];
                if !c.is_zero() {
                    for (x, y) in v.iter_mut().zip(row) {
                        *x = f.sub(*x, f.mul(c, *y));
                    }
                }
            }
            if let Some(pivot) = v.iter().position(|x| !x.is_zero()) {
                let inv = f.inv(v[pivot])?;
                for x in v.iter_mut() {
                    *x = f.mul(*x, inv);
                }
                reduced.push((pivot, v));
                basis.push(g);
                witness.push(r);
            }
        }
        Ok(CandidateSpace {
            user: a,
            field: f.clone(),
            basis,
            witness,
        })
    }

    /// Recovers every message user `a` needs from `U` and its side
    /// information.
    pub fn recover_messages(&self, a: usize, u: &FeVec, known: &KnownMessages) -> Result<BTreeMap<MessageId, FeVec>> {
        let f = &self.field;
        if u.len() != self.width() {
            return Err(Error::usage(format!("U has {} symbols, expected {}", u.len(), self.width())));
        }
        let u = u.as_slice();
        let mut values: HashMap<MessageRef, Fe> = HashMap::new();
        if let Some(sys) = &self.systems[a] {
            let cols = &self.shuffled.columns;
            let mut rhs = Vec::with_capacity(sys.equations.len());
            for eq in &sys.equations {
                let c = &cols[eq.column];
                let mut v = f.sub(u[eq.column], known.symbol(MessageRef::new(c.block, c.offset))?);
                for &r in &eq.known {
                    v = f.sub(v, known.symbol(r)?);
                }
                rhs.push(v);
            }
            if !sys.unknowns.is_empty() {
                let m = sys.matrix(f);
                match m.solve(&FeVec::from_raw(f, rhs))? {
                    Solution::Unique(x) => {
                        for (r, &v) in sys.unknowns.iter().zip(x.as_slice()) {
                            values.insert(*r, v);
                        }
                    }
                    other => {
                        return Err(Error::Internal(format!(
                            "user {} row system is not uniquely solvable: {other:?}",
                            a + 1
                        )))
                    }
                }
            }
        }
        let lookup = |r: MessageRef| -> Result<Fe> {
            if r.msg.contains(a) {
                known.symbol(r)
            } else {
                values
                    .get(&r)
                    .copied()
                    .ok_or_else(|| Error::Internal(format!("{r} unresolved for user {}", a + 1)))
            }
        };
        // read row 1: W_I = U - V over blocks the user lacks
        let mut heads = Vec::new();
        for (pos, t) in self.terms.iter().enumerate() {
            let head = t[0];
            if head.msg.contains(a) {
                continue;
            }
            let mut v = u[pos];
            for &r in &t[1..] {
                v = f.sub(v, lookup(r)?);
            }
            heads.push((head, v));
        }
        values.extend(heads);
        let mut out = BTreeMap::new();
        for (m, len) in self.lengths.iter().filter(|(m, _)| !m.contains(a)) {
            let data = (0..len)
                .map(|p| {
                    values
                        .get(&MessageRef::new(m, p))
                        .copied()
                        .ok_or_else(|| Error::Internal(format!("{m}[{p}] not recovered by user {}", a + 1)))
                })
                .collect::<Result<Vec<Fe>>>()?;
            out.insert(m, FeVec::from_raw(f, data));
        }
        Ok(out)
    }
}

/// Affine candidate set `D_a = offset + span(basis)`; every coefficient
/// vector gives a distinct element.
#[derive(Debug, Clone)]
pub struct CandidateSpace {
    pub user: usize,
    field: Field,
    basis: Vec<Vec<Fe>>,
    /// Unknown symbol whose unit vector produced each basis vector.
    pub witness: Vec<MessageRef>,
}

impl CandidateSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// `|D_a|`.
    pub fn size(&self) -> u64 {
        (self.field.order() as u64).pow(self.basis.len() as u32)
    }

    /// Visits every candidate `offset + Σ c_i basis_i` together with the
    /// coefficients `c`. Stops early if `visit` returns `false`.
    pub fn for_each(&self, offset: &FeVec, mut visit: impl FnMut(&[Fe], &[u32]) -> bool) {
        let f = &self.field;
        let q = f.order();
        let multiples: Vec<Vec<Vec<Fe>>> = self
            .basis
            .iter()
            .map(|b| f.elements().map(|e| b.iter().map(|&x| f.mul(e, x)).collect()).collect())
            .collect();
        let mut cur: Vec<Fe> = offset.as_slice().to_vec();
        for_each_vector(q, self.basis.len(), |digits, changed| {
            for &(i, old) in changed {
                let (from, to) = (&multiples[i][old as usize], &multiples[i][digits[i] as usize]);
                for (t, c) in cur.iter_mut().enumerate() {
                    *c = f.add(f.sub(*c, from[t]), to[t]);
                }
            }
            visit(&cur, digits)
        });
    }

    /// All candidates, materialized.
    pub fn elements(&self, offset: &FeVec) -> Vec<FeVec> {
        let mut out = Vec::new();
        self.for_each(offset, |u, _| {
            out.push(FeVec::from_raw(&self.field, u.to_vec()));
            true
        });
        out
    }
}

/// Random downlink codebook, realized one codeword at a time from
/// `(stream, index of u)`.
#[derive(Debug, Clone)]
pub struct DownlinkCodebook {
    n: usize,
    stream: Stream,
    dist: WeightedIndex<f64>,
}

impl DownlinkCodebook {
    pub fn new(n: usize, input: &InputDist, stream: Stream) -> Result<Self> {
        let dist = WeightedIndex::new(input.probs())
            .map_err(|e| Error::usage(format!("unusable input distribution: {e}")))?;
        Ok(DownlinkCodebook { n, stream, dist })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Codeword `X0(u)`.
    pub fn codeword(&self, field: &Field, u: &[Fe]) -> Result<Vec<usize>> {
        let index = field
            .canonical_index(u)
            .filter(|&i| i <= u64::MAX as u128)
            .ok_or_else(|| Error::Capability {
                what: "downlink codebook index".into(),
                value: format!("{} symbols over GF({})", u.len(), field.order()),
                limit: "64-bit message index".into(),
                hint: "shrink the message lengths".into(),
            })?;
        let mut rng = self.stream.named("codeword", index as u64).rng();
        Ok((0..self.n).map(|_| self.dist.sample(&mut rng)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownlinkDecision {
    pub u: FeVec,
    /// Another candidate reached the same best likelihood.
    pub tied: bool,
}

/// Maximum-likelihood choice of `U` over user `a`'s candidate set; ties
/// go to the smallest canonical index.
pub fn user_decode_u(
    y: &[usize],
    codebook: &DownlinkCodebook,
    space: &CandidateSpace,
    offset: &FeVec,
    down: &DownlinkSpec,
    a: usize,
) -> Result<DownlinkDecision> {
    let field = offset.field().clone();
    let w = down.user(a);
    if y.len() != codebook.len() {
        return Err(Error::usage(format!("{} outputs for a length-{} codebook", y.len(), codebook.len())));
    }
    if let Some(&bad) = y.iter().find(|&&v| v >= w.outputs()) {
        return Err(Error::usage(format!("output symbol {bad} outside user {}'s alphabet", a + 1)));
    }
    let log_w: Vec<Vec<f64>> = w.rows().iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect();
    let mut best: Option<(f64, Vec<Fe>)> = None;
    let mut tied = false;
    let mut failure = None;
    space.for_each(offset, |u, _| {
        let x = match codebook.codeword(&field, u) {
            Ok(x) => x,
            Err(e) => {
                failure = Some(e);
                return false;
            }
        };
        let mut score = 0.0;
        for (xt, yt) in x.iter().zip(y) {
            score += log_w[*xt][*yt];
            if score == f64::NEG_INFINITY {
                break;
            }
        }
        match &best {
            None => best = Some((score, u.to_vec())),
            Some((s, b)) => {
                if score > *s {
                    best = Some((score, u.to_vec()));
                    tied = false;
                } else if score == *s {
                    tied = true;
                    if Field::canonical_cmp(u, b).is_lt() {
                        best = Some((score, u.to_vec()));
                    }
                }
            }
        }
        true
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (_, u) = best.expect("candidate set is never empty");
    Ok(DownlinkDecision {
        u: FeVec::from_raw(&field, u),
        tied,
    })
}
