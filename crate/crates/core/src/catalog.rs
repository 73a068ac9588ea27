//! Exhaustive enumeration of ket supports at desk scale, one representative
//! per class under site permutations, per-site symbol relabelings and column
//! order, plus the empirical check of the irreducible length bound.

use serde::Serialize;

use crate::balance::{find_certificate, BMatrix, BalanceCertificate};
use crate::error::{Error, Result};

/// Hard desk-scale caps for enumeration.
const MAX_CELLS: usize = 30; // q * L
const MAX_KETS: usize = 64; // d^q, so a support fits one u64 mask
const MAX_SUBSETS: u128 = 300_000_000;

/// A support matrix in canonical form: the class representative whose
/// sorted ket set is smallest over the symmetry orbit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalBMatrix {
    matrix: BMatrix,
}

impl CanonicalBMatrix {
    pub fn matrix(&self) -> &BMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> BMatrix {
        self.matrix
    }
}

/// One enumerated support with its balance data.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub matrix: BMatrix,
    pub certificate: Option<BalanceCertificate>,
    pub irreducible: bool,
}

impl CatalogEntry {
    /// One JSON line of the catalog format.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc {
            q: usize,
            d: usize,
            #[serde(rename = "L")]
            l: usize,
            #[serde(rename = "B")]
            b: Vec<Vec<u8>>,
            n: Option<Vec<u64>>,
            irreducible: bool,
        }
        serde_json::to_value(Doc {
            q: self.matrix.q(),
            d: self.matrix.d(),
            l: self.matrix.len(),
            b: self.matrix.rows(),
            n: self.certificate.as_ref().map(|c| c.weights().to_vec()),
            irreducible: self.irreducible,
        })
        .expect("catalog entry serializes")
    }
}

/// The symmetry group acting on ket indices: site permutations composed
/// with independent symbol permutations per site.
struct OrbitMaps {
    q: usize,
    d: usize,
    n_kets: usize,
    maps: Vec<Vec<u8>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out.sort();
    out
}

fn ket_index(col: &[u8], d: usize) -> usize {
    col.iter().fold(0usize, |acc, &s| acc * d + s as usize)
}

fn index_to_ket(mut idx: usize, q: usize, d: usize) -> Vec<u8> {
    let mut col = vec![0u8; q];
    for slot in col.iter_mut().rev() {
        *slot = (idx % d) as u8;
        idx /= d;
    }
    col
}

impl OrbitMaps {
    fn build(q: usize, d: usize) -> Result<Self> {
        let n_kets = d
            .checked_pow(q as u32)
            .filter(|&n| n <= MAX_KETS)
            .ok_or_else(|| {
                Error::CapExceeded(format!(
                    "d^q must stay at or below {MAX_KETS} for enumeration"
                ))
            })?;
        let site_perms = permutations(q);
        let symbol_perms = permutations(d);
        let group_size = site_perms
            .len()
            .checked_mul(symbol_perms.len().pow(q as u32));
        if group_size.is_none_or(|g| g > 2_000_000) {
            return Err(Error::CapExceeded(
                "symmetry group too large to enumerate".into(),
            ));
        }
        let mut maps = Vec::with_capacity(group_size.unwrap());
        let mut choice = vec![0usize; q];
        for pi in &site_perms {
            loop {
                let mut map = vec![0u8; n_kets];
                for (ket, slot) in map.iter_mut().enumerate() {
                    let digits = index_to_ket(ket, q, d);
                    let image: Vec<u8> = (0..q)
                        .map(|i| symbol_perms[choice[i]][digits[pi[i]] as usize] as u8)
                        .collect();
                    *slot = ket_index(&image, d) as u8;
                }
                maps.push(map);
                // Mixed-radix increment over the per-site symbol choices.
                let mut i = 0;
                while i < q {
                    choice[i] += 1;
                    if choice[i] < symbol_perms.len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == q {
                    break;
                }
            }
        }
        Ok(OrbitMaps { q, d, n_kets, maps })
    }

    fn apply(map: &[u8], mask: u64) -> u64 {
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let bit = m.trailing_zeros() as usize;
            out |= 1u64 << map[bit];
            m &= m - 1;
        }
        out
    }

    /// Ordering on equal-popcount masks by their sorted ket lists: the mask
    /// containing the smallest ket where they differ wins.
    fn precedes(a: u64, b: u64) -> bool {
        if a == b {
            return false;
        }
        let diff = a ^ b;
        a & (diff & diff.wrapping_neg()) != 0
    }

    fn is_canonical(&self, mask: u64) -> bool {
        self.maps
            .iter()
            .all(|map| !Self::precedes(Self::apply(map, mask), mask))
    }

    fn canonical_mask(&self, mask: u64) -> u64 {
        let mut best = mask;
        for map in &self.maps {
            let image = Self::apply(map, mask);
            if Self::precedes(image, best) {
                best = image;
            }
        }
        best
    }

    fn mask_to_matrix(&self, mask: u64) -> Result<BMatrix> {
        let columns: Vec<Vec<u8>> = (0..self.n_kets)
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| index_to_ket(k, self.q, self.d))
            .collect();
        BMatrix::new(self.q, self.d, columns)
    }

    fn matrix_to_mask(&self, b: &BMatrix) -> u64 {
        b.columns()
            .iter()
            .fold(0u64, |acc, col| acc | 1u64 << ket_index(col, self.d))
    }
}

/// Canonical representative of a support's symmetry class. Idempotent and
/// identical across the whole orbit.
pub fn canonicalize(b: &BMatrix) -> Result<CanonicalBMatrix> {
    let maps = OrbitMaps::build(b.q(), b.d())?;
    let mask = maps.matrix_to_mask(b);
    let matrix = maps.mask_to_matrix(maps.canonical_mask(mask))?;
    Ok(CanonicalBMatrix { matrix })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > MAX_SUBSETS {
            return u128::MAX;
        }
    }
    acc
}

fn ensure_enumeration_caps(q: usize, d: usize, length: usize) -> Result<()> {
    if q < 1 || d < 2 {
        return Err(Error::InvalidSystem(format!("q={q}, d={d}")));
    }
    if q * length > MAX_CELLS {
        return Err(Error::CapExceeded(format!(
            "q*L = {} exceeds the {MAX_CELLS}-cell enumeration cap",
            q * length
        )));
    }
    let n_kets = d
        .checked_pow(q as u32)
        .filter(|&n| n <= MAX_KETS)
        .ok_or_else(|| {
            Error::CapExceeded(format!(
                "d^q must stay at or below {MAX_KETS} for enumeration"
            ))
        })?;
    if length > n_kets {
        return Err(Error::CapExceeded(format!(
            "no support of {length} distinct columns exists: only {n_kets} kets"
        )));
    }
    if binomial(n_kets, length) > MAX_SUBSETS {
        return Err(Error::CapExceeded(format!(
            "about C({n_kets},{length}) supports exceed the enumeration budget"
        )));
    }
    Ok(())
}

/// Iterates all masks of the given popcount over `n` bits in ascending
/// integer order.
fn for_each_mask(n: usize, popcount: usize, mut f: impl FnMut(u64) -> Result<()>) -> Result<()> {
    if popcount == 0 || popcount > n {
        return Ok(());
    }
    let limit: u128 = 1u128 << n;
    let mut mask: u64 = (1u64 << popcount) - 1;
    while (mask as u128) < limit {
        f(mask)?;
        // Gosper's hack, in u128 to survive n = 64.
        let c = mask & mask.wrapping_neg();
        let r = (mask as u128) + (c as u128);
        let next = (((r ^ mask as u128) >> 2) / c as u128) | r;
        if next >= limit {
            break;
        }
        mask = next as u64;
    }
    Ok(())
}

/// All canonical support classes with exactly `length` distinct columns.
pub fn enumerate_b_matrices(q: usize, d: usize, length: usize) -> Result<Vec<CanonicalBMatrix>> {
    ensure_enumeration_caps(q, d, length)?;
    if length == 0 {
        return Err(Error::InvalidState(
            "a support needs at least one column".into(),
        ));
    }
    let maps = OrbitMaps::build(q, d)?;
    let mut out = Vec::new();
    for_each_mask(maps.n_kets, length, |mask| {
        if maps.is_canonical(mask) {
            out.push(CanonicalBMatrix {
                matrix: maps.mask_to_matrix(mask)?,
            });
        }
        Ok(())
    })?;
    Ok(out)
}

/// Per-site bit masks of the kets carrying each symbol, for the cheap
/// cover filter: a balanced support must show every symbol on every site.
fn symbol_masks(maps: &OrbitMaps) -> Vec<Vec<u64>> {
    let mut masks = vec![vec![0u64; maps.d]; maps.q];
    for ket in 0..maps.n_kets {
        let digits = index_to_ket(ket, maps.q, maps.d);
        for (l, &s) in digits.iter().enumerate() {
            masks[l][s as usize] |= 1u64 << ket;
        }
    }
    masks
}

fn covers_all_symbols(mask: u64, masks: &[Vec<u64>]) -> bool {
    masks.iter().all(|site| site.iter().all(|&m| mask & m != 0))
}

/// All canonical irreducibly balanced classes up to `l_max`, each with its
/// minimal certificate. `l_max` may overshoot the irreducible length bound
/// `(d-1)q + 1` by at most two, so the bound itself stays testable.
pub fn enumerate_irreducible(q: usize, d: usize, l_max: usize) -> Result<Vec<CatalogEntry>> {
    let bound = (d - 1) * q + 1;
    if l_max > bound + 2 {
        return Err(Error::CapExceeded(format!(
            "l_max {l_max} overshoots the irreducible length bound {bound} by more than 2"
        )));
    }
    let maps = OrbitMaps::build(q, d)?;
    let masks = symbol_masks(&maps);
    let mut out = Vec::new();
    for length in d..=l_max.min(maps.n_kets) {
        ensure_enumeration_caps(q, d, length)?;
        for_each_mask(maps.n_kets, length, |mask| {
            if !covers_all_symbols(mask, &masks) || !maps.is_canonical(mask) {
                return Ok(());
            }
            let matrix = maps.mask_to_matrix(mask)?;
            // Irreducible means a one-dimensional constraint kernel spanned
            // by a strictly positive vector; find_certificate resolves that
            // directly on the fast path.
            if crate::balance::kernel_dimension(&matrix)? != 1 {
                return Ok(());
            }
            if let Some(certificate) = find_certificate(&matrix)? {
                out.push(CatalogEntry {
                    matrix,
                    certificate: Some(certificate),
                    irreducible: true,
                });
            }
            Ok(())
        })?;
    }
    Ok(out)
}

/// Counts of balanced canonical classes just above the irreducible length
/// bound, with any irreducible counterexample listed verbatim.
#[derive(Clone, Debug, Serialize)]
pub struct LengthBoundReport {
    pub q: usize,
    pub d: usize,
    pub bound: usize,
    pub rows: Vec<LengthBoundRow>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LengthBoundRow {
    pub length: usize,
    pub classes_checked: u64,
    pub balanced_classes: u64,
    pub counterexamples: Vec<Vec<Vec<u8>>>,
}

/// Enumerates every balanced canonical class with length in
/// `bound+1 ..= bound+2` (clamped to the number of distinct kets) and
/// verifies each one is reducible.
pub fn verify_length_bound(q: usize, d: usize) -> Result<LengthBoundReport> {
    let bound = (d - 1) * q + 1;
    let maps = OrbitMaps::build(q, d)?;
    let masks = symbol_masks(&maps);
    let mut rows = Vec::new();
    let mut pass = true;
    for length in bound + 1..=(bound + 2).min(maps.n_kets) {
        ensure_enumeration_caps(q, d, length)?;
        let mut row = LengthBoundRow {
            length,
            classes_checked: 0,
            balanced_classes: 0,
            counterexamples: Vec::new(),
        };
        for_each_mask(maps.n_kets, length, |mask| {
            if !covers_all_symbols(mask, &masks) || !maps.is_canonical(mask) {
                return Ok(());
            }
            row.classes_checked += 1;
            let matrix = maps.mask_to_matrix(mask)?;
            if crate::balance::has_full_certificate(&matrix)? {
                row.balanced_classes += 1;
                if crate::balance::kernel_dimension(&matrix)? == 1 {
                    row.counterexamples.push(matrix.rows());
                }
            }
            Ok(())
        })?;
        pass &= row.counterexamples.is_empty();
        rows.push(row);
    }
    Ok(LengthBoundReport {
        q,
        d,
        bound,
        rows,
        pass,
    })
}
