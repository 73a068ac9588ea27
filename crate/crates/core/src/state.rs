//! Pure multi-qudit states in sparse product-basis form, their reduced
//! density matrices, and the stochasticity / product predicates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Default tolerance for stochasticity and rank tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A register of `q` qudits, each of local dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuditSystem {
    q: usize,
    d: usize,
}

impl QuditSystem {
    pub fn new(q: usize, d: usize) -> Result<Self> {
        if q < 1 {
            return Err(Error::InvalidSystem("need at least one qudit".into()));
        }
        if d < 2 {
            return Err(Error::InvalidSystem(format!("local dimension {d} below 2")));
        }
        Ok(QuditSystem { q, d })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// One product term: a complex amplitude on a computational ket.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub amplitude: C64,
    pub ket: Vec<u8>,
}

/// Superposition of distinct computational kets with nonzero amplitudes.
///
/// The number of terms is the representation length `L`. Sites are indexed
/// `0..q` throughout the crate; serialized interfaces are 1-based where the
/// documented formats say so.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    system: QuditSystem,
    terms: Vec<Term>,
}

/// Serialized state document: `{"d":..,"q":..,"terms":[{"re","im","ket"},..]}`.
#[derive(Debug, Serialize, Deserialize)]
struct StateDoc {
    d: usize,
    q: usize,
    terms: Vec<TermDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    re: f64,
    im: f64,
    ket: Vec<i64>,
}

impl PureState {
    /// Builds a state from raw terms, merging duplicate kets (amplitudes
    /// summed, first-occurrence order) and dropping terms that cancel to
    /// exactly zero.
    pub fn new(system: QuditSystem, raw_terms: Vec<Term>) -> Result<Self> {
        let mut order: Vec<Vec<u8>> = Vec::new();
        let mut merged: HashMap<Vec<u8>, C64> = HashMap::new();
        for term in raw_terms {
            if term.ket.len() != system.q {
                return Err(Error::InvalidState(format!(
                    "ket length {} differs from q={}",
                    term.ket.len(),
                    system.q
                )));
            }
            if let Some(&bad) = term.ket.iter().find(|&&s| (s as usize) >= system.d) {
                return Err(Error::InvalidState(format!(
                    "ket entry {bad} outside 0..{}",
                    system.d - 1
                )));
            }
            match merged.get_mut(&term.ket) {
                Some(a) => *a += term.amplitude,
                None => {
                    merged.insert(term.ket.clone(), term.amplitude);
                    order.push(term.ket);
                }
            }
        }
        let terms: Vec<Term> = order
            .into_iter()
            .filter_map(|ket| {
                let amplitude = merged[&ket];
                (amplitude != C64::new(0.0, 0.0)).then_some(Term { amplitude, ket })
            })
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidState("state is empty after merging".into()));
        }
        Ok(PureState { system, terms })
    }

    /// Parses the JSON state document format.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: StateDoc =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        let system = QuditSystem::new(doc.q, doc.d).map_err(|e| Error::Document(e.to_string()))?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let mut ket = Vec::with_capacity(t.ket.len());
            for &entry in &t.ket {
                if entry < 0 || entry as usize >= doc.d {
                    return Err(Error::Document(format!(
                        "ket entry {entry} outside 0..{}",
                        doc.d - 1
                    )));
                }
                ket.push(entry as u8);
            }
            if ket.len() != doc.q {
                return Err(Error::Document(format!(
                    "ket length {} differs from q={}",
                    ket.len(),
                    doc.q
                )));
            }
            terms.push(Term {
                amplitude: C64::new(t.re, t.im),
                ket,
            });
        }
        Self::new(system, terms).map_err(|e| match e {
            Error::InvalidState(msg) => Error::Document(msg),
            other => other,
        })
    }

    /// Serializes to the JSON document format, terms sorted by ket.
    pub fn to_json(&self) -> String {
        let mut terms: Vec<&Term> = self.terms.iter().collect();
        terms.sort_by(|a, b| a.ket.cmp(&b.ket));
        let doc = StateDoc {
            d: self.system.d,
            q: self.system.q,
            terms: terms
                .into_iter()
                .map(|t| TermDoc {
                    re: t.amplitude.re,
                    im: t.amplitude.im,
                    ket: t.ket.iter().map(|&s| s as i64).collect(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("state document serializes")
    }

    pub fn system(&self) -> QuditSystem {
        self.system
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Representation length `L`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.amplitude.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Amplitude on a given ket (zero when absent from the support).
    pub fn amplitude(&self, ket: &[u8]) -> C64 {
        self.terms
            .iter()
            .find(|t| t.ket.as_slice() == ket)
            .map_or(C64::new(0.0, 0.0), |t| t.amplitude)
    }

    /// Rescales to unit 2-norm; kets and relative phases unchanged. A state
    /// already at unit norm comes back bit-identical.
    pub fn normalize(&self) -> Result<PureState> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        if norm == 1.0 {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        for term in &mut out.terms {
            term.amplitude /= norm;
        }
        Ok(out)
    }

    /// Single-site reduced density matrix (partial trace over all other
    /// sites) of the state as given.
    pub fn reduced_density_matrix(&self, site: usize) -> Result<LocalDensityMatrix> {
        let q = self.system.q;
        if site >= q {
            return Err(Error::SiteOutOfRange { site, q });
        }
        let d = self.system.d;
        // Bucket terms by the ket restricted to the complement of `site`;
        // only pairs within a bucket survive the partial trace.
        let mut buckets: HashMap<Vec<u8>, Vec<(u8, C64)>> = HashMap::new();
        for term in &self.terms {
            let mut rest = term.ket.clone();
            let symbol = rest.remove(site);
            buckets
                .entry(rest)
                .or_default()
                .push((symbol, term.amplitude));
        }
        let mut rho = CMatrix::zeros(d, d);
        for entries in buckets.values() {
            for &(s1, a1) in entries {
                for &(s2, a2) in entries {
                    rho[(s1 as usize, s2 as usize)] += a1 * a2.conj();
                }
            }
        }
        Ok(LocalDensityMatrix { site, matrix: rho })
    }

    /// True when every single-site reduction is within `tol` (max-norm) of
    /// the maximally mixed matrix `I/d`.
    pub fn is_stochastic(&self, tol: f64) -> Result<bool> {
        let d = self.system.d;
        let target = CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        for site in 0..self.system.q {
            let rho = self.reduced_density_matrix(site)?;
            if rho.matrix.max_abs_diff(&target) > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True when some bipartition of the sites makes the amplitude tensor a
    /// rank-1 matricization (singular values beyond the first at most `tol`).
    /// All `2^(q-1) - 1` bipartitions are examined.
    pub fn is_product(&self, tol: f64) -> Result<bool> {
        let q = self.system.q;
        if q < 2 {
            return Err(Error::NoBipartition);
        }
        if q > 20 {
            return Err(Error::CapExceeded(format!(
                "product test limited to q <= 20, got {q}"
            )));
        }
        for sub in 0..(1u32 << (q - 1)) {
            let mask = (sub << 1) | 1; // site 0 always on the left side
            if mask == (1u32 << q) - 1 {
                continue; // complement empty
            }
            if self.second_singular_value(mask)? <= tol {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Second-largest singular value of the matricization selected by
    /// `mask` (bit i set = site i on the row side). Only the occupied row
    /// and column indices are materialized.
    fn second_singular_value(&self, mask: u32) -> Result<f64> {
        let side_key = |ket: &[u8], left: bool| -> Vec<u8> {
            ket.iter()
                .enumerate()
                .filter(|(i, _)| ((mask >> i) & 1 == 1) == left)
                .map(|(_, &s)| s)
                .collect()
        };
        let mut row_ids: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut col_ids: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut triplets = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            let next_row = row_ids.len();
            let row = *row_ids.entry(side_key(&term.ket, true)).or_insert(next_row);
            let next_col = col_ids.len();
            let col = *col_ids
                .entry(side_key(&term.ket, false))
                .or_insert(next_col);
            triplets.push((row, col, term.amplitude));
        }
        if row_ids.len() < 2 || col_ids.len() < 2 {
            return Ok(0.0);
        }
        let mut matrix = CMatrix::zeros(row_ids.len(), col_ids.len());
        for (r, c, a) in triplets {
            matrix[(r, c)] = a;
        }
        let sigma = matrix.singular_values()?;
        Ok(sigma.get(1).copied().unwrap_or(0.0))
    }

    /// Contracts a `d x d` operator onto one site. Duplicate kets are merged
    /// and exact-zero terms dropped. The result is intentionally not
    /// renormalized: filtering changes the norm.
    pub fn apply_local_operator(&self, site: usize, op: &CMatrix) -> Result<PureState> {
        let q = self.system.q;
        let d = self.system.d;
        if site >= q {
            return Err(Error::SiteOutOfRange { site, q });
        }
        if op.rows() != d || op.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: op.rows().max(op.cols()),
            });
        }
        let mut order: Vec<Vec<u8>> = Vec::new();
        let mut merged: HashMap<Vec<u8>, C64> = HashMap::new();
        for term in &self.terms {
            let old = term.ket[site] as usize;
            for new in 0..d {
                let coeff = op[(new, old)];
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let mut ket = term.ket.clone();
                ket[site] = new as u8;
                match merged.get_mut(&ket) {
                    Some(a) => *a += coeff * term.amplitude,
                    None => {
                        merged.insert(ket.clone(), coeff * term.amplitude);
                        order.push(ket);
                    }
                }
            }
        }
        let terms: Vec<Term> = order
            .into_iter()
            .filter_map(|ket| {
                let amplitude = merged[&ket];
                (amplitude != C64::new(0.0, 0.0)).then_some(Term { amplitude, ket })
            })
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidState("operator annihilated the state".into()));
        }
        Ok(PureState {
            system: self.system,
            terms,
        })
    }

    /// Support after discarding amplitudes below `rel_tol` times the largest
    /// magnitude. Numerical dust from iterated filtering falls below any
    /// sensible threshold; genuine support entries do not.
    pub fn significant_terms(&self, rel_tol: f64) -> PureState {
        let max = self
            .terms
            .iter()
            .map(|t| t.amplitude.norm())
            .fold(0.0, f64::max);
        let threshold = max * rel_tol;
        let terms: Vec<Term> = self
            .terms
            .iter()
            .filter(|t| t.amplitude.norm() > threshold)
            .cloned()
            .collect();
        PureState {
            system: self.system,
            terms,
        }
    }
}

/// Single-site reduced density matrix.
#[derive(Clone, Debug)]
pub struct LocalDensityMatrix {
    pub site: usize,
    pub matrix: CMatrix,
}

impl LocalDensityMatrix {
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    /// Max-norm distance from `I/d`.
    pub fn deviation_from_maximally_mixed(&self) -> f64 {
        let d = self.matrix.rows();
        let target = CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
        self.matrix.max_abs_diff(&target)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.matrix.hermitian_eigen()?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn state(q: usize, d: usize, terms: &[(f64, f64, &[u8])]) -> PureState {
        PureState::new(
            QuditSystem::new(q, d).unwrap(),
            terms
                .iter()
                .map(|&(re, im, ket)| Term {
                    amplitude: c(re, im),
                    ket: ket.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parse_ghz_document() {
        let text = r#"{"d":2,"q":3,"terms":[{"re":1,"im":0,"ket":[0,0,0]},{"re":1,"im":0,"ket":[1,1,1]}]}"#;
        let s = PureState::parse(text).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.system().q(), 3);
        assert_eq!(s.system().d(), 2);
    }

    #[test]
    fn parse_merges_and_rejects_cancellation() {
        let text =
            r#"{"d":2,"q":2,"terms":[{"re":1,"im":0,"ket":[0,1]},{"re":-1,"im":0,"ket":[0,1]}]}"#;
        match PureState::parse(text) {
            Err(Error::Document(msg)) => assert!(msg.contains("empty"), "{msg}"),
            other => panic!("expected empty-state error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_out_of_range_label() {
        let text = r#"{"d":3,"q":2,"terms":[{"re":1,"im":0,"ket":[0,3]}]}"#;
        match PureState::parse(text) {
            Err(Error::Document(msg)) => assert!(msg.contains("outside"), "{msg}"),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_wrong_ket_length() {
        let text = r#"{"d":2,"q":3,"terms":[{"re":1,"im":0,"ket":[0,1]}]}"#;
        assert!(matches!(PureState::parse(text), Err(Error::Document(_))));
    }

    #[test]
    fn json_round_trip_sorts_terms() {
        let s = state(2, 2, &[(1.0, 0.0, &[1, 1]), (2.0, 0.0, &[0, 0])]);
        let text = s.to_json();
        let back = PureState::parse(&text).unwrap();
        assert_eq!(back.terms()[0].ket, vec![0, 0]);
        assert_eq!(back.amplitude(&[1, 1]), c(1.0, 0.0));
    }

    #[test]
    fn normalize_examples() {
        let s = state(2, 2, &[(2.0, 0.0, &[0, 0]), (1.0, 0.0, &[1, 1])]);
        let n = s.normalize().unwrap();
        let r5 = 5.0f64.sqrt();
        assert!((n.amplitude(&[0, 0]) - c(2.0 / r5, 0.0)).norm() < 1e-15);
        assert!((n.amplitude(&[1, 1]) - c(1.0 / r5, 0.0)).norm() < 1e-15);
        // Fixed point within rounding.
        let again = n.normalize().unwrap();
        assert!(n
            .terms()
            .iter()
            .zip(again.terms())
            .all(|(a, b)| (a.amplitude - b.amplitude).norm() < 1e-15));
        // Complex phases survive.
        let s = state(2, 2, &[(1.0, 0.0, &[0, 0]), (0.0, 1.0, &[1, 1])]);
        let n = s.normalize().unwrap();
        let r2 = 2.0f64.sqrt();
        assert!((n.amplitude(&[1, 1]) - c(0.0, 1.0 / r2)).norm() < 1e-15);
    }

    #[test]
    fn reduced_density_matrix_examples() {
        let bell = state(2, 2, &[(1.0, 0.0, &[0, 0]), (1.0, 0.0, &[1, 1])])
            .normalize()
            .unwrap();
        let rho = bell.reduced_density_matrix(0).unwrap();
        assert!((rho.matrix[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((rho.matrix[(1, 1)].re - 0.5).abs() < 1e-12);
        assert!(rho.matrix[(0, 1)].norm() < 1e-12);

        let product = state(2, 2, &[(1.0, 0.0, &[0, 0])]);
        let rho = product.reduced_density_matrix(1).unwrap();
        assert!((rho.matrix[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(rho.matrix[(1, 1)].norm() < 1e-12);

        let w = state(
            3,
            2,
            &[
                (1.0, 0.0, &[0, 0, 1]),
                (1.0, 0.0, &[0, 1, 0]),
                (1.0, 0.0, &[1, 0, 0]),
            ],
        )
        .normalize()
        .unwrap();
        let rho = w.reduced_density_matrix(0).unwrap();
        assert!((rho.matrix[(0, 0)].re - 2.0 / 3.0).abs() < 1e-12);
        assert!((rho.matrix[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);

        assert!(matches!(
            w.reduced_density_matrix(3),
            Err(Error::SiteOutOfRange { site: 3, q: 3 })
        ));
    }

    #[test]
    fn stochasticity_examples() {
        let two_qutrit = state(
            2,
            3,
            &[
                (1.0, 0.0, &[0, 0]),
                (1.0, 0.0, &[1, 1]),
                (1.0, 0.0, &[2, 2]),
            ],
        )
        .normalize()
        .unwrap();
        assert!(two_qutrit.is_stochastic(1e-12).unwrap());

        let product = state(2, 2, &[(1.0, 0.0, &[0, 0])]);
        assert!(!product.is_stochastic(1e-9).unwrap());

        let skew = state(2, 2, &[(2.0, 0.0, &[0, 0]), (1.0, 0.0, &[1, 1])])
            .normalize()
            .unwrap();
        assert!(!skew.is_stochastic(1e-9).unwrap());
    }

    #[test]
    fn product_detection_examples() {
        let product = state(2, 2, &[(1.0, 0.0, &[0, 0])]);
        assert!(product.is_product(1e-9).unwrap());

        let bell = state(2, 2, &[(1.0, 0.0, &[0, 0]), (1.0, 0.0, &[1, 1])])
            .normalize()
            .unwrap();
        assert!(!bell.is_product(1e-9).unwrap());

        let zero_bell = state(3, 2, &[(1.0, 0.0, &[0, 0, 0]), (1.0, 0.0, &[0, 1, 1])])
            .normalize()
            .unwrap();
        assert!(zero_bell.is_product(1e-9).unwrap());

        let single = state(1, 2, &[(1.0, 0.0, &[0])]);
        assert!(matches!(single.is_product(1e-9), Err(Error::NoBipartition)));
    }

    #[test]
    fn local_operator_examples() {
        let s = state(2, 2, &[(2.0, 0.0, &[0, 0]), (1.0, 0.0, &[1, 1])]);
        let id = CMatrix::identity(2);
        assert_eq!(s.apply_local_operator(0, &id).unwrap(), s);

        let t = 2.0f64.powf(-0.25);
        let filter = CMatrix::diagonal(&[c(t, 0.0), c(1.0 / t, 0.0)]);
        let filtered = s.apply_local_operator(0, &filter).unwrap();
        assert!((filtered.amplitude(&[0, 0]) - c(2.0 * t, 0.0)).norm() < 1e-15);
        assert!((filtered.amplitude(&[1, 1]) - c(1.0 / t, 0.0)).norm() < 1e-15);

        let swap = CMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let flipped = state(2, 2, &[(1.0, 0.0, &[0, 0])])
            .apply_local_operator(0, &swap)
            .unwrap();
        assert_eq!(flipped.terms()[0].ket, vec![1, 0]);

        let wrong = CMatrix::identity(3);
        assert!(matches!(
            s.apply_local_operator(0, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.apply_local_operator(5, &id),
            Err(Error::SiteOutOfRange { .. })
        ));
    }
}
