//! Non-crossing partitions, their Möbius function and the moment/free
//! cumulant transforms built on top of them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{ExactScalar, Scalar};

/// Largest `n` for which `NC(n)` is enumerated (Catalan(12) = 208012).
pub const ENUMERATION_CAP: usize = 12;

/// Largest `n` for which the Möbius function (and hence the moment to
/// cumulant direction) is available. The top-down recursion is quadratic in
/// `|NC(n)|`, which is already ~3e8 comparisons at `n = 10`.
pub const MOBIUS_CAP: usize = 10;

/// A non-crossing partition of `{1, ..., n}` in canonical form: each block
/// sorted, blocks ordered by their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NCPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    /// Validates that `blocks` partition `{1..n}` without crossings.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(domain("partitions are defined for n >= 1"));
        }
        let mut seen = vec![false; n + 1];
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        for b in &blocks {
            if b.is_empty() {
                return Err(domain("empty block"));
            }
            for &e in b {
                if e == 0 || e > n {
                    return Err(domain(format!("element {e} outside 1..={n}")));
                }
                if seen[e] {
                    return Err(domain(format!("element {e} appears twice")));
                }
                seen[e] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(domain("blocks do not cover 1..=n"));
        }
        blocks.sort_by_key(|b| b[0]);
        if has_crossing(&blocks) {
            return Err(domain("partition has a crossing"));
        }
        Ok(Self { n, blocks })
    }

    /// The partition into singletons, `0_n`.
    pub fn bottom(n: usize) -> Self {
        Self {
            n,
            blocks: (1..=n).map(|i| vec![i]).collect(),
        }
    }

    /// The one-block partition, `1_n`.
    pub fn top(n: usize) -> Self {
        Self {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Restricted growth string: entry `i` is the index of the block holding
    /// element `i + 1`.
    pub fn labels(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.n];
        for (k, b) in self.blocks.iter().enumerate() {
            for &e in b {
                out[e - 1] = k as u8;
            }
        }
        out
    }

    /// Refinement order: `self <= other` when every block of `self` lies
    /// inside a block of `other`.
    pub fn refines(&self, other: &NCPartition) -> Result<bool> {
        if self.n != other.n {
            return Err(domain(format!(
                "partitions of different sizes ({} vs {})",
                self.n, other.n
            )));
        }
        Ok(refines_labels(&self.labels(), &other.labels()))
    }
}

impl fmt::Display for NCPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{{")?;
            for (j, e) in b.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// True when two blocks cross: `a < b < c < d` with `a, c` in one block and
/// `b, d` in the other.
pub fn has_crossing(blocks: &[Vec<usize>]) -> bool {
    for (i, p) in blocks.iter().enumerate() {
        for q in &blocks[i + 1..] {
            // Interleaving test on sorted blocks: q has elements both inside
            // and outside some gap of p.
            for w in p.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let inside = q.iter().any(|&e| e > lo && e < hi);
                let outside = q.iter().any(|&e| e < lo || e > hi);
                if inside && outside {
                    return true;
                }
            }
        }
    }
    false
}

fn refines_labels(fine: &[u8], coarse: &[u8]) -> bool {
    let mut map = [u8::MAX; 32];
    for (&f, &c) in fine.iter().zip(coarse) {
        let slot = &mut map[f as usize];
        if *slot == u8::MAX {
            *slot = c;
        } else if *slot != c {
            return false;
        }
    }
    true
}

/// All partitions of the consecutive elements `lo..hi`.
fn nc_blocks(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
    if lo >= hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    grow(hi, vec![lo], vec![Vec::new()], &mut out);
    out
}

// Extends the block that contains the smallest remaining element. Everything
// strictly between two consecutive members of that block is partitioned
// independently, which is exactly the non-crossing condition.
fn grow(hi: usize, block: Vec<usize>, partials: Vec<Vec<Vec<usize>>>, out: &mut Vec<Vec<Vec<usize>>>) {
    let last = *block.last().expect("block is never empty");
    for tail in nc_blocks(last + 1, hi) {
        for p in &partials {
            let mut full = p.clone();
            full.push(block.clone());
            full.extend(tail.iter().cloned());
            out.push(full);
        }
    }
    for next in last + 1..hi {
        let gaps = nc_blocks(last + 1, next);
        let mut extended = Vec::with_capacity(partials.len() * gaps.len());
        for p in &partials {
            for g in &gaps {
                let mut q = p.clone();
                q.extend(g.iter().cloned());
                extended.push(q);
            }
        }
        let mut b = block.clone();
        b.push(next);
        grow(hi, b, extended, out);
    }
}

/// Block-size multiset shared by several partitions of the same `n`.
struct BlockType {
    sizes: Vec<usize>,
    count: i64,
}

struct LatticeTable {
    partitions: Vec<NCPartition>,
    labels: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    types: Vec<BlockType>,
    type_of: Vec<usize>,
    mobius_top: OnceLock<Vec<i64>>,
    mobius_by_type: OnceLock<Vec<i64>>,
}

impl LatticeTable {
    fn build(n: usize) -> Self {
        let mut partitions: Vec<NCPartition> = nc_blocks(1, n + 1)
            .into_iter()
            .map(|mut blocks| {
                blocks.sort_by_key(|b| b[0]);
                NCPartition { n, blocks }
            })
            .collect();
        partitions.sort_by_cached_key(NCPartition::labels);
        let labels: Vec<Vec<u8>> = partitions.iter().map(NCPartition::labels).collect();
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();

        let mut by_sizes: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut types: Vec<BlockType> = Vec::new();
        let mut type_of = Vec::with_capacity(partitions.len());
        for p in &partitions {
            let mut sizes = p.block_sizes();
            sizes.sort_unstable();
            let t = *by_sizes.entry(sizes.clone()).or_insert_with(|| {
                types.push(BlockType { sizes, count: 0 });
                types.len() - 1
            });
            types[t].count += 1;
            type_of.push(t);
        }
        Self {
            partitions,
            labels,
            index,
            types,
            type_of,
            mobius_top: OnceLock::new(),
            mobius_by_type: OnceLock::new(),
        }
    }

    fn mobius_top(&self) -> &[i64] {
        self.mobius_top.get_or_init(|| {
            // mu(x, 1) = -sum over z strictly above x of mu(z, 1), filled in
            // by increasing number of blocks so every z is known first.
            let count = self.partitions.len();
            let mut order: Vec<usize> = (0..count).collect();
            order.sort_by_key(|&i| self.partitions[i].block_count());
            let mut mu = vec![0i64; count];
            let mut done: Vec<usize> = Vec::with_capacity(count);
            for &x in &order {
                let bx = self.partitions[x].block_count();
                if bx == 1 {
                    mu[x] = 1;
                } else {
                    let mut acc = 0i64;
                    for &z in &done {
                        if self.partitions[z].block_count() < bx
                            && refines_labels(&self.labels[x], &self.labels[z])
                        {
                            acc += mu[z];
                        }
                    }
                    mu[x] = -acc;
                }
                done.push(x);
            }
            mu
        })
    }

    fn mobius_by_type(&self) -> &[i64] {
        self.mobius_by_type.get_or_init(|| {
            let mu = self.mobius_top();
            let mut sums = vec![0i64; self.types.len()];
            for (i, &t) in self.type_of.iter().enumerate() {
                sums[t] += mu[i];
            }
            sums
        })
    }
}

fn table(n: usize) -> Result<Arc<LatticeTable>> {
    if n == 0 {
        return Err(domain("NC(n) requires n >= 1"));
    }
    if n > ENUMERATION_CAP {
        return Err(domain(format!(
            "NC({n}) exceeds the enumeration cap of {ENUMERATION_CAP}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<LatticeTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("lattice cache poisoned").get(&n) {
        return Ok(Arc::clone(t));
    }
    let built = Arc::new(LatticeTable::build(n));
    let mut guard = cache.lock().expect("lattice cache poisoned");
    Ok(Arc::clone(guard.entry(n).or_insert(built)))
}

/// Every non-crossing partition of `{1..n}`, in restricted-growth-string
/// order. `1 <= n <= ENUMERATION_CAP`.
pub fn enumerate_nc(n: usize) -> Result<Vec<NCPartition>> {
    Ok(table(n)?.partitions.clone())
}

/// Number of non-crossing partitions of `{1..n}` without materializing them.
pub fn nc_count(n: usize) -> Result<usize> {
    Ok(table(n)?.partitions.len())
}

/// `mu(pi, 1_n)` in the non-crossing lattice.
pub fn mobius_to_top(pi: &NCPartition) -> Result<ExactScalar> {
    let n = pi.n();
    if n > MOBIUS_CAP {
        return Err(domain(format!(
            "Möbius function capped at n = {MOBIUS_CAP}, got {n}"
        )));
    }
    let t = table(n)?;
    let idx = t.index[&pi.labels()];
    Ok(ExactScalar::from_i64(t.mobius_top()[idx]))
}

/// Where a cumulant sequence came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    ExactMoments,
    Quadrature,
}

/// Free cumulants `kappa_start, kappa_start+1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantSeq<S> {
    start: usize,
    values: Vec<S>,
    provenance: Provenance,
}

impl<S: Scalar> CumulantSeq<S> {
    pub fn new(start: usize, values: Vec<S>, provenance: Provenance) -> Result<Self> {
        if start == 0 {
            return Err(domain("cumulant indices start at 1"));
        }
        Ok(Self {
            start,
            values,
            provenance,
        })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Index of the last cumulant held.
    pub fn end(&self) -> usize {
        self.start + self.values.len() - 1
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// `kappa_n`, if held.
    pub fn kappa(&self, n: usize) -> Option<&S> {
        n.checked_sub(self.start).and_then(|i| self.values.get(i))
    }

    pub fn to_f64(&self) -> CumulantSeq<f64> {
        CumulantSeq {
            start: self.start,
            values: self.values.iter().map(Scalar::to_f64).collect(),
            provenance: self.provenance,
        }
    }
}

fn product_over<S: Scalar>(sizes: &[usize], seq: &[S]) -> S {
    sizes.iter().fold(S::one(), |acc, &s| acc * seq[s - 1].clone())
}

/// Free cumulants from moments `m_1..m_n` via
/// `kappa_k = sum over NC(k) of mu(pi, 1_k) * prod m_|V|`.
pub fn moments_to_cumulants<S: Scalar>(moments: &[S]) -> Result<CumulantSeq<S>> {
    let n = moments.len();
    if n == 0 {
        return Err(domain("need at least one moment"));
    }
    if n > MOBIUS_CAP {
        return Err(domain(format!(
            "moment-to-cumulant transform capped at n = {MOBIUS_CAP}, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let t = table(k)?;
        let mu = t.mobius_by_type();
        let mut acc = S::zero();
        for (ty, &weight) in t.types.iter().zip(mu) {
            if weight != 0 {
                acc = acc + S::from_i64(weight) * product_over(&ty.sizes, moments);
            }
        }
        out.push(acc);
    }
    CumulantSeq::new(1, out, Provenance::ExactMoments)
}

/// Moments `m_1..m_n` from free cumulants `kappa_1..kappa_n` via the
/// moment-cumulant formula.
pub fn cumulants_to_moments<S: Scalar>(cumulants: &[S]) -> Result<Vec<S>> {
    let n = cumulants.len();
    if n == 0 {
        return Err(domain("need at least one cumulant"));
    }
    if n > ENUMERATION_CAP {
        return Err(domain(format!(
            "cumulant-to-moment transform capped at n = {ENUMERATION_CAP}, got {n}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let t = table(k)?;
        let mut acc = S::zero();
        for ty in &t.types {
            acc = acc + S::from_i64(ty.count) * product_over(&ty.sizes, cumulants);
        }
        out.push(acc);
    }
    Ok(out)
}
