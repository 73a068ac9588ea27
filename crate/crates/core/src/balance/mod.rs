//! Balance analysis of ket supports: certificates, irreducibility, maximal
//! balanced parts, and the classification verdict.
//!
//! A support of length `L` over `q` sites is *balanced* when positive
//! integer weights `n_1..n_L` exist that give every symbol `0..d-1` the same
//! weighted count on every site. All decisions here are made in exact
//! rational arithmetic.

mod exact;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::PureState;
use exact::{integer_kernel_basis, to_primitive_integer, Feasibility};

pub use exact::gcd_i128;

/// Ket labels of a state's support: rows index sites, columns index terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BMatrix {
    q: usize,
    d: usize,
    columns: Vec<Vec<u8>>,
}

impl BMatrix {
    pub fn new(q: usize, d: usize, columns: Vec<Vec<u8>>) -> Result<Self> {
        if q < 1 || d < 2 {
            return Err(Error::InvalidSystem(format!("q={q}, d={d}")));
        }
        if columns.is_empty() {
            return Err(Error::InvalidState(
                "a support needs at least one column".into(),
            ));
        }
        for col in &columns {
            if col.len() != q {
                return Err(Error::DimensionMismatch {
                    expected: q,
                    got: col.len(),
                });
            }
            if let Some(&bad) = col.iter().find(|&&s| (s as usize) >= d) {
                return Err(Error::InvalidState(format!(
                    "label {bad} outside 0..{}",
                    d - 1
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for col in &columns {
            if !seen.insert(col.clone()) {
                return Err(Error::InvalidState(format!("duplicate column {col:?}")));
            }
        }
        Ok(BMatrix { q, d, columns })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of columns (the representation length `L`).
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[Vec<u8>] {
        &self.columns
    }

    /// Label of site `site` in column `col`.
    pub fn entry(&self, site: usize, col: usize) -> u8 {
        self.columns[col][site]
    }

    /// Rows as vectors, for display and serialization.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.q)
            .map(|l| self.columns.iter().map(|c| c[l]).collect())
            .collect()
    }

    /// Sub-support on the given (strictly increasing) column indices.
    pub fn restrict(&self, cols: &[usize]) -> Result<BMatrix> {
        let columns = cols.iter().map(|&k| self.columns[k].clone()).collect();
        BMatrix::new(self.q, self.d, columns)
    }

    /// The `(j, j+1)` alternating matrix: entry `-1` where the label equals
    /// `j`, `+1` where it equals `j+1`, `0` elsewhere.
    pub fn alternating(&self, j: usize) -> Result<AlternatingMatrix> {
        if j + 1 >= self.d {
            return Err(Error::SymbolPairOutOfRange {
                lo: j,
                hi: j + 1,
                d: self.d,
            });
        }
        let entries = (0..self.q)
            .map(|l| {
                self.columns
                    .iter()
                    .map(|c| match c[l] as usize {
                        s if s == j => -1i8,
                        s if s == j + 1 => 1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        Ok(AlternatingMatrix {
            lo: j,
            hi: j + 1,
            q: self.q,
            entries,
        })
    }

    /// The stacked `q (d-1) x L` integer constraint matrix whose kernel
    /// carries the balance weights.
    fn constraint_rows(&self) -> Vec<Vec<i128>> {
        let mut rows = Vec::with_capacity(self.q * (self.d - 1));
        for j in 0..self.d - 1 {
            for l in 0..self.q {
                rows.push(
                    self.columns
                        .iter()
                        .map(|c| match c[l] as usize {
                            s if s == j => -1i128,
                            s if s == j + 1 => 1,
                            _ => 0,
                        })
                        .collect(),
                );
            }
        }
        rows
    }

    /// Weighted count of each symbol on each site under the given weights.
    pub fn weighted_counts(&self, weights: &[u64]) -> Vec<Vec<u64>> {
        let mut counts = vec![vec![0u64; self.d]; self.q];
        for (k, col) in self.columns.iter().enumerate() {
            for (l, &s) in col.iter().enumerate() {
                counts[l][s as usize] += weights[k];
            }
        }
        counts
    }
}

/// Signed occurrence matrix for a symbol range `(lo, hi)`; adjacent ranges
/// add up to wider ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternatingMatrix {
    lo: usize,
    hi: usize,
    q: usize,
    entries: Vec<Vec<i8>>,
}

impl AlternatingMatrix {
    /// Zero matrix for an empty symbol range, the neutral element of
    /// composition.
    pub fn empty(q: usize, len: usize, at: usize) -> Self {
        AlternatingMatrix {
            lo: at,
            hi: at,
            q,
            entries: vec![vec![0; len]; q],
        }
    }

    pub fn range(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    pub fn entries(&self) -> &[Vec<i8>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Entrywise sum of a `(j, j+s)` range matrix with the adjacent
/// `(j+s, j+s+1)` pair, yielding the `(j, j+s+1)` range matrix.
pub fn compose_alternating(
    a: &AlternatingMatrix,
    b: &AlternatingMatrix,
) -> Result<AlternatingMatrix> {
    if a.q != b.q || a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.lo == a.hi {
        return Ok(b.clone());
    }
    if b.lo == b.hi {
        return Ok(a.clone());
    }
    if b.lo != a.hi || b.hi != b.lo + 1 {
        return Err(Error::IncompatibleRanges(a.lo, a.hi, b.lo, b.hi));
    }
    let mut entries = vec![vec![0i8; a.len()]; a.q];
    for l in 0..a.q {
        for k in 0..a.len() {
            let sum = a.entries[l][k] + b.entries[l][k];
            if !(-1..=1).contains(&sum) {
                return Err(Error::Numeric(
                    "alternating operands disagree on the underlying support".into(),
                ));
            }
            entries[l][k] = sum;
        }
    }
    Ok(AlternatingMatrix {
        lo: a.lo,
        hi: b.hi,
        q: a.q,
        entries,
    })
}

/// Positive integer weights, gcd 1, equalizing the per-site symbol counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BalanceCertificate {
    weights: Vec<u64>,
}

impl BalanceCertificate {
    pub fn new(weights: Vec<u64>) -> Result<Self> {
        if weights.is_empty() || weights.contains(&0) {
            return Err(Error::InvalidCertificate("weights must be positive".into()));
        }
        let g = weights
            .iter()
            .fold(0i128, |acc, &v| gcd_i128(acc, v as i128));
        if g != 1 {
            return Err(Error::InvalidCertificate(format!(
                "weights share the factor {g}"
            )));
        }
        Ok(BalanceCertificate { weights })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }

    /// Exact soundness check against a support: every symbol must reach the
    /// same weighted count on every site.
    pub fn is_valid_for(&self, b: &BMatrix) -> bool {
        if self.weights.len() != b.len() {
            return false;
        }
        let total: u64 = self.weights.iter().sum();
        if total % b.d() as u64 != 0 {
            return false;
        }
        let share = total / b.d() as u64;
        b.weighted_counts(&self.weights)
            .iter()
            .all(|site| site.iter().all(|&c| c == share))
    }
}

/// Verdict lattice for a state's product-basis representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Product,
    Unbalanced,
    PartlyBalanced {
        balanced_support: Vec<usize>,
        irreducible: bool,
    },
    BalancedReducible {
        blocks: Vec<Vec<usize>>,
    },
    IrreduciblyBalanced {
        certificate: BalanceCertificate,
    },
}

impl Classification {
    pub fn verdict_name(&self) -> &'static str {
        match self {
            Classification::Product => "product",
            Classification::Unbalanced => "unbalanced",
            Classification::PartlyBalanced { .. } => "partly_balanced",
            Classification::BalancedReducible { .. } => "balanced_reducible",
            Classification::IrreduciblyBalanced { .. } => "irreducibly_balanced",
        }
    }

    /// Serialization with 1-based column indices, as documented.
    pub fn to_json(&self, length: usize) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            verdict: &'a str,
            certificate: Option<&'a [u64]>,
            balanced_support: Vec<usize>,
            blocks: Vec<Vec<usize>>,
            balanced_part_irreducible: Option<bool>,
        }
        let all: Vec<usize> = (1..=length).collect();
        let shift = |cols: &[usize]| cols.iter().map(|&c| c + 1).collect::<Vec<_>>();
        let doc = match self {
            Classification::Product | Classification::Unbalanced => Doc {
                verdict: self.verdict_name(),
                certificate: None,
                balanced_support: Vec::new(),
                blocks: Vec::new(),
                balanced_part_irreducible: None,
            },
            Classification::PartlyBalanced {
                balanced_support,
                irreducible,
            } => Doc {
                verdict: self.verdict_name(),
                certificate: None,
                balanced_support: shift(balanced_support),
                blocks: Vec::new(),
                balanced_part_irreducible: Some(*irreducible),
            },
            Classification::BalancedReducible { blocks } => Doc {
                verdict: self.verdict_name(),
                certificate: None,
                balanced_support: all.clone(),
                blocks: blocks.iter().map(|b| shift(b)).collect(),
                balanced_part_irreducible: None,
            },
            Classification::IrreduciblyBalanced { certificate } => Doc {
                verdict: self.verdict_name(),
                certificate: Some(certificate.weights()),
                balanced_support: all.clone(),
                blocks: vec![all.clone()],
                balanced_part_irreducible: None,
            },
        };
        serde_json::to_value(doc).expect("classification serializes")
    }
}

/// Greedy split into irreducibly balanced blocks plus a remainder whose
/// balanced part is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BalanceDecomposition {
    pub blocks: Vec<Vec<usize>>,
    pub remainder: Vec<usize>,
}

/// Support matrix of a state: column `k` is the ket of term `k`.
pub fn b_matrix(state: &PureState) -> BMatrix {
    BMatrix::new(
        state.system().q(),
        state.system().d(),
        state.terms().iter().map(|t| t.ket.clone()).collect(),
    )
    .expect("state invariants carry over to its support matrix")
}

/// Searches for a full-support balance certificate. Absence is a value.
///
/// Deterministic: among the certificates of minimal total weight, returns
/// the lexicographically smallest.
pub fn find_certificate(b: &BMatrix) -> Result<Option<BalanceCertificate>> {
    let rows = b.constraint_rows();
    let kernel = integer_kernel_basis(&rows, b.len())?;
    match kernel.len() {
        0 => Ok(None),
        1 => Ok(positive_ray(&kernel[0])
            .map(BalanceCertificate::new)
            .transpose()?),
        _ => {
            let mut f = Feasibility::new(b.len());
            for row in &rows {
                f.equal(row.clone(), 0);
            }
            for k in 0..b.len() {
                let mut e = vec![0i128; b.len()];
                e[k] = 1;
                f.at_least(e, 1);
            }
            let Some(witness) = f.solve()? else {
                return Ok(None);
            };
            let cap = to_primitive_integer(&witness)?.iter().sum::<u64>();
            let weights = minimal_certificate(b, cap)?;
            Ok(Some(BalanceCertificate::new(weights)?))
        }
    }
}

/// A one-dimensional kernel admits positive weights only along its
/// generator; returns them when the generator has full uniform support.
fn positive_ray(generator: &[i128]) -> Option<Vec<u64>> {
    if generator.iter().any(|&v| v == 0) {
        return None;
    }
    let positive = generator.iter().all(|&v| v > 0);
    let negative = generator.iter().all(|&v| v < 0);
    if !positive && !negative {
        return None;
    }
    Some(generator.iter().map(|&v| v.unsigned_abs() as u64).collect())
}

/// Depth-first search for the minimal-total, lexicographically smallest
/// positive integer weight vector. `cap` bounds the total weight; a valid
/// certificate with that total is known to exist.
fn minimal_certificate(b: &BMatrix, cap: u64) -> Result<Vec<u64>> {
    let d = b.d() as u64;
    let l = b.len() as u64;
    let mut total = l.div_ceil(d) * d;
    while total <= cap {
        let mut search = CertificateSearch::new(b, total / d);
        if search.run() {
            return Ok(search.weights);
        }
        total += d;
    }
    Err(Error::CapExceeded(format!(
        "certificate search exhausted its budget (total weight cap {cap})"
    )))
}

struct CertificateSearch<'a> {
    b: &'a BMatrix,
    share: u64, // target weighted count per symbol per site
    weights: Vec<u64>,
    counts: Vec<Vec<u64>>,    // current weighted count per site per symbol
    remaining: Vec<Vec<u64>>, // columns not yet assigned, per site per symbol
}

impl<'a> CertificateSearch<'a> {
    fn new(b: &'a BMatrix, share: u64) -> Self {
        let mut remaining = vec![vec![0u64; b.d()]; b.q()];
        for col in b.columns() {
            for (l, &s) in col.iter().enumerate() {
                remaining[l][s as usize] += 1;
            }
        }
        CertificateSearch {
            b,
            share,
            weights: vec![0; b.len()],
            counts: vec![vec![0u64; b.d()]; b.q()],
            remaining,
        }
    }

    fn run(&mut self) -> bool {
        let budget = self.share * self.b.d() as u64;
        self.dfs(0, budget)
    }

    fn feasible_here(&self, budget: u64, cols_left: u64) -> bool {
        for l in 0..self.b.q() {
            for s in 0..self.b.d() {
                let need = match self.share.checked_sub(self.counts[l][s]) {
                    Some(v) => v,
                    None => return false,
                };
                let rem = self.remaining[l][s];
                // Every unassigned column contributes at least 1; columns of
                // other symbols eat into the budget first.
                if need < rem {
                    return false;
                }
                if rem == 0 && need != 0 {
                    return false;
                }
                if need > budget - (cols_left - rem) {
                    return false;
                }
            }
        }
        true
    }

    fn dfs(&mut self, k: usize, budget: u64) -> bool {
        let l = self.b.len();
        if k == l {
            return budget == 0
                && self
                    .counts
                    .iter()
                    .all(|site| site.iter().all(|&c| c == self.share));
        }
        let cols_after = (l - k - 1) as u64;
        if budget < cols_after + 1 {
            return false;
        }
        let mut vmax = budget - cols_after;
        for site in 0..self.b.q() {
            let s = self.b.entry(site, k) as usize;
            let room = self.share - self.counts[site][s];
            let others = self.remaining[site][s] - 1;
            if room < others + 1 {
                return false;
            }
            vmax = vmax.min(room - others);
        }
        for site in 0..self.b.q() {
            let s = self.b.entry(site, k) as usize;
            self.remaining[site][s] -= 1;
        }
        for v in 1..=vmax {
            self.weights[k] = v;
            for site in 0..self.b.q() {
                let s = self.b.entry(site, k) as usize;
                self.counts[site][s] += v;
            }
            let ok = self.feasible_here(budget - v, cols_after) && self.dfs(k + 1, budget - v);
            if ok {
                return true;
            }
            for site in 0..self.b.q() {
                let s = self.b.entry(site, k) as usize;
                self.counts[site][s] -= v;
            }
        }
        self.weights[k] = 0;
        for site in 0..self.b.q() {
            let s = self.b.entry(site, k) as usize;
            self.remaining[site][s] += 1;
        }
        false
    }
}

/// Root-of-unity formulation of the balance condition, defined for prime
/// local dimension: true iff the weighted site sums of `exp(2 pi i B/d)`
/// vanish. Decided exactly through symbol counts; the complex evaluation is
/// kept as a cross-check.
pub fn verify_roots_of_unity(b: &BMatrix, weights: &[u64]) -> Result<bool> {
    if !is_prime(b.d()) {
        return Err(Error::NonPrimeDimension(b.d()));
    }
    if weights.len() != b.len() {
        return Err(Error::InvalidCertificate(format!(
            "expected {} weights, got {}",
            b.len(),
            weights.len()
        )));
    }
    if weights.contains(&0) {
        return Err(Error::InvalidCertificate("weights must be positive".into()));
    }
    let counts = b.weighted_counts(weights);
    let exact = counts.iter().all(|site| site.iter().all(|&c| c == site[0]));

    // Complex cross-check with the tolerance the formulation documents.
    let d = b.d() as f64;
    let mut numeric = true;
    for l in 0..b.q() {
        let mut sum = num_complex::Complex64::new(0.0, 0.0);
        for (k, col) in b.columns().iter().enumerate() {
            let angle = 2.0 * std::f64::consts::PI * col[l] as f64 / d;
            sum += weights[k] as f64 * num_complex::Complex64::new(angle.cos(), angle.sin());
        }
        if sum.norm() > 1e-10 {
            numeric = false;
        }
    }
    assert_eq!(exact, numeric, "roots-of-unity cross-check diverged");
    Ok(exact)
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// True when no nonempty proper subset of columns admits its own balance
/// certificate.
///
/// With a full-support certificate in hand this reduces to the kernel
/// dimension of the constraint matrix: sub-support certificates are exactly
/// the nonnegative nonzero kernel vectors, and a cone of dimension two or
/// more that contains a strictly positive point always has an extreme ray
/// with a zero coordinate, hence a proper balanced subset. A
/// one-dimensional kernel leaves only the full-support ray.
pub fn is_irreducible(b: &BMatrix, certificate: &BalanceCertificate) -> Result<bool> {
    if !certificate.is_valid_for(b) {
        return Err(Error::InvalidCertificate(
            "certificate does not balance this support".into(),
        ));
    }
    let kernel = integer_kernel_basis(&b.constraint_rows(), b.len())?;
    Ok(kernel.len() == 1)
}

/// The maximal balanced support: column `k` belongs iff some nonnegative
/// kernel vector has weight on it. One exact feasibility solve per column;
/// the union is itself a balanced support because nonnegative solutions add.
pub fn balanced_part(b: &BMatrix) -> Result<Vec<usize>> {
    let rows = b.constraint_rows();
    let kernel = integer_kernel_basis(&rows, b.len())?;
    match kernel.len() {
        0 => Ok(Vec::new()),
        1 => {
            let v = &kernel[0];
            let has_pos = v.iter().any(|&x| x > 0);
            let has_neg = v.iter().any(|&x| x < 0);
            if has_pos && has_neg {
                Ok(Vec::new())
            } else {
                Ok((0..b.len()).filter(|&k| v[k] != 0).collect())
            }
        }
        _ => {
            let mut support = Vec::new();
            for k in 0..b.len() {
                let mut f = Feasibility::new(b.len());
                for row in &rows {
                    f.equal(row.clone(), 0);
                }
                for j in 0..b.len() {
                    let mut e = vec![0i128; b.len()];
                    e[j] = 1;
                    f.at_least(e, if j == k { 1 } else { 0 });
                }
                if f.solve()?.is_some() {
                    support.push(k);
                }
            }
            Ok(support)
        }
    }
}

/// Greedy extraction of minimal balanced subsets, smallest cardinality
/// first with lexicographic tie-break. Each extracted block is irreducibly
/// balanced; the remainder has an empty balanced part.
pub fn decompose_balanced(b: &BMatrix) -> Result<BalanceDecomposition> {
    let mut remaining: Vec<usize> = (0..b.len()).collect();
    let mut blocks = Vec::new();
    let mut budget: u64 = 4_000_000;
    loop {
        // Blocks can only live inside the current balanced part.
        let sub = match remaining.len() {
            0 => Vec::new(),
            _ => {
                let restricted = b.restrict(&remaining)?;
                balanced_part(&restricted)?
                    .into_iter()
                    .map(|i| remaining[i])
                    .collect::<Vec<usize>>()
            }
        };
        if sub.is_empty() {
            break;
        }
        match smallest_balanced_subset(b, &sub, &mut budget)? {
            Some(block) => {
                remaining.retain(|c| !block.contains(c));
                blocks.push(block);
            }
            None => break,
        }
    }
    Ok(BalanceDecomposition {
        blocks,
        remainder: remaining,
    })
}

/// Smallest (then lexicographically first) subset of `universe` that
/// supports strictly positive balance weights.
fn smallest_balanced_subset(
    b: &BMatrix,
    universe: &[usize],
    budget: &mut u64,
) -> Result<Option<Vec<usize>>> {
    for size in b.d()..=universe.len() {
        let mut chosen: Vec<usize> = Vec::with_capacity(size);
        if let Some(found) = subset_search(b, universe, size, 0, &mut chosen, budget)? {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

fn subset_search(
    b: &BMatrix,
    universe: &[usize],
    size: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    budget: &mut u64,
) -> Result<Option<Vec<usize>>> {
    if chosen.len() == size {
        if *budget == 0 {
            return Err(Error::CapExceeded("balanced-subset search budget".into()));
        }
        *budget -= 1;
        if balanced_subset_check(b, chosen)? {
            return Ok(Some(chosen.clone()));
        }
        return Ok(None);
    }
    let needed = size - chosen.len();
    for idx in from..universe.len() {
        if universe.len() - idx < needed {
            break;
        }
        chosen.push(universe[idx]);
        if let Some(found) = subset_search(b, universe, size, idx + 1, chosen, budget)? {
            return Ok(Some(found));
        }
        chosen.pop();
    }
    Ok(None)
}

/// Exact test: do strictly positive weights on exactly these columns
/// balance every site?
fn balanced_subset_check(b: &BMatrix, cols: &[usize]) -> Result<bool> {
    // Cheap necessary condition: each site must see every symbol.
    for l in 0..b.q() {
        let mut seen = vec![false; b.d()];
        for &k in cols {
            seen[b.entry(l, k) as usize] = true;
        }
        if seen.iter().any(|&v| !v) {
            return Ok(false);
        }
    }
    let sub = b.restrict(cols)?;
    let rows = sub.constraint_rows();
    let kernel = integer_kernel_basis(&rows, sub.len())?;
    match kernel.len() {
        0 => Ok(false),
        1 => Ok(positive_ray(&kernel[0]).is_some()),
        _ => {
            let mut f = Feasibility::new(sub.len());
            for row in &rows {
                f.equal(row.clone(), 0);
            }
            for j in 0..sub.len() {
                let mut e = vec![0i128; sub.len()];
                e[j] = 1;
                f.at_least(e, 1);
            }
            Ok(f.solve()?.is_some())
        }
    }
}

/// Full verdict for a normalized state, on the representation as given.
pub fn classify(state: &PureState, tol: f64) -> Result<Classification> {
    if state.is_product(tol)? {
        return Ok(Classification::Product);
    }
    let b = b_matrix(state);
    if let Some(certificate) = find_certificate(&b)? {
        if is_irreducible(&b, &certificate)? {
            return Ok(Classification::IrreduciblyBalanced { certificate });
        }
        let decomposition = decompose_balanced(&b)?;
        return Ok(Classification::BalancedReducible {
            blocks: decomposition.blocks,
        });
    }
    let support = balanced_part(&b)?;
    if support.is_empty() {
        return Ok(Classification::Unbalanced);
    }
    let sub = b.restrict(&support)?;
    let certificate = find_certificate(&sub)?.ok_or_else(|| {
        Error::Numeric("balanced part lost its certificate on restriction".into())
    })?;
    let irreducible = is_irreducible(&sub, &certificate)?;
    Ok(Classification::PartlyBalanced {
        balanced_support: support,
        irreducible,
    })
}

/// The maximally entangled state on a balanced support: amplitudes
/// proportional to the square roots of the certificate weights.
pub fn construct_max_entangled(b: &BMatrix, cert: &BalanceCertificate) -> Result<PureState> {
    if !cert.is_valid_for(b) {
        return Err(Error::InvalidCertificate(
            "certificate does not balance this support".into(),
        ));
    }
    let system = crate::state::QuditSystem::new(b.q(), b.d())?;
    let terms = b
        .columns()
        .iter()
        .zip(cert.weights())
        .map(|(ket, &n)| crate::state::Term {
            amplitude: num_complex::Complex64::new((n as f64).sqrt(), 0.0),
            ket: ket.clone(),
        })
        .collect();
    PureState::new(system, terms)?.normalize()
}

/// Rational feasibility helper shared with the catalog: does this support
/// admit strictly positive balance weights?
pub(crate) fn has_full_certificate(b: &BMatrix) -> Result<bool> {
    let all: Vec<usize> = (0..b.len()).collect();
    balanced_subset_check(b, &all)
}

/// Kernel dimension of the balance constraints, shared with the catalog.
pub(crate) fn kernel_dimension(b: &BMatrix) -> Result<usize> {
    Ok(integer_kernel_basis(&b.constraint_rows(), b.len())?.len())
}
