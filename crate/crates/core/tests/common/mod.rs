//! Shared helpers for the integration suites: independent brute-force
//! oracles (no kernels, no linear programming) and random generators.

#![allow(dead_code)]

use qudit_balance::rng::Rng;
use qudit_balance::{BMatrix, CMatrix, PureState, QuditSystem, Term, C64};

/// Result of the exhaustive weight search over `{1..cap}^L`.
pub struct BruteForceResult {
    pub exists: bool,
    /// All solutions of minimal total weight (empty when none exists).
    pub minimal: Vec<Vec<u64>>,
    pub minimal_total: Option<u64>,
}

/// Exhaustive oracle: searches every weight vector in `{1..cap}^L` for the
/// per-site equal-count condition, by depth-first enumeration with interval
/// pruning. Entirely independent of the kernel/feasibility machinery.
pub fn brute_force_certificates(b: &BMatrix, cap: u64) -> BruteForceResult {
    let l = b.len();
    // Pass 1: any solution at all?
    let mut first: Option<Vec<u64>> = None;
    search(b, cap, None, &mut |weights| {
        first = Some(weights.to_vec());
        true
    });
    let Some(first) = first else {
        return BruteForceResult {
            exists: false,
            minimal: Vec::new(),
            minimal_total: None,
        };
    };
    // Pass 2: iterative deepening on the total weight finds the minimal set.
    let upper: u64 = first.iter().sum();
    let mut total = l as u64;
    loop {
        debug_assert!(total <= upper);
        let mut found: Vec<Vec<u64>> = Vec::new();
        search(b, cap, Some(total), &mut |weights| {
            found.push(weights.to_vec());
            false
        });
        if !found.is_empty() {
            return BruteForceResult {
                exists: true,
                minimal: found,
                minimal_total: Some(total),
            };
        }
        total += 1;
    }
}

/// DFS over weight vectors; `exact_total` restricts to one total weight.
/// The visitor returns true to stop early.
fn search(b: &BMatrix, cap: u64, exact_total: Option<u64>, visit: &mut dyn FnMut(&[u64]) -> bool) {
    let l = b.len();
    let mut weights = vec![0u64; l];
    let mut counts = vec![vec![0u64; b.d()]; b.q()];
    let mut remaining = vec![vec![0u64; b.d()]; b.q()];
    for col in b.columns() {
        for (site, &s) in col.iter().enumerate() {
            remaining[site][s as usize] += 1;
        }
    }
    dfs(
        b,
        cap,
        exact_total,
        0,
        0,
        &mut weights,
        &mut counts,
        &mut remaining,
        visit,
    );
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    b: &BMatrix,
    cap: u64,
    exact_total: Option<u64>,
    k: usize,
    assigned: u64,
    weights: &mut Vec<u64>,
    counts: &mut Vec<Vec<u64>>,
    remaining: &mut Vec<Vec<u64>>,
    visit: &mut dyn FnMut(&[u64]) -> bool,
) -> bool {
    let l = b.len();
    if k == l {
        let balanced = counts.iter().all(|site| site.iter().all(|&c| c == site[0]));
        let total_ok = exact_total.is_none_or(|t| t == assigned);
        if balanced && total_ok {
            return visit(weights);
        }
        return false;
    }
    // Interval prune: every symbol pair must stay closable with the cap.
    for site in counts.iter().zip(remaining.iter()) {
        let (cnt, rem) = site;
        for s in 0..cnt.len() {
            for t in 0..cnt.len() {
                if cnt[s] + rem[s] > cnt[t] + rem[t] * cap {
                    return false;
                }
            }
        }
    }
    let budget = exact_total.map(|t| t - assigned);
    if let Some(budget) = budget {
        let left = (l - k) as u64;
        if budget < left || budget > left * cap {
            return false;
        }
    }
    for site in 0..b.q() {
        let s = b.entry(site, k) as usize;
        remaining[site][s] -= 1;
    }
    let vmax = budget.map_or(cap, |bud| cap.min(bud - (l - k - 1) as u64));
    for v in 1..=vmax {
        weights[k] = v;
        for site in 0..b.q() {
            let s = b.entry(site, k) as usize;
            counts[site][s] += v;
        }
        let stop = dfs(
            b,
            cap,
            exact_total,
            k + 1,
            assigned + v,
            weights,
            counts,
            remaining,
            visit,
        );
        for site in 0..b.q() {
            let s = b.entry(site, k) as usize;
            counts[site][s] -= v;
        }
        if stop {
            for site in 0..b.q() {
                let s = b.entry(site, k) as usize;
                remaining[site][s] += 1;
            }
            return true;
        }
    }
    weights[k] = 0;
    for site in 0..b.q() {
        let s = b.entry(site, k) as usize;
        remaining[site][s] += 1;
    }
    false
}

/// Subset-enumeration oracle for irreducibility: does any nonempty proper
/// column subset admit its own certificate (weights up to `cap`)?
pub fn has_balanced_proper_subset(b: &BMatrix, cap: u64) -> bool {
    let l = b.len();
    assert!(l <= 16, "subset oracle is exponential in L");
    for mask in 1u32..(1 << l) - 1 {
        let cols: Vec<usize> = (0..l).filter(|&k| mask >> k & 1 == 1).collect();
        let sub = b.restrict(&cols).unwrap();
        let mut any = false;
        search(&sub, cap, None, &mut |_| {
            any = true;
            true
        });
        if any {
            return true;
        }
    }
    false
}

/// Dense-vector partial trace, an independent route to the reduced density
/// matrix.
pub fn dense_reduced_density_matrix(state: &PureState, site: usize) -> CMatrix {
    let q = state.system().q();
    let d = state.system().d();
    let dim = d.pow(q as u32);
    let mut vector = vec![C64::new(0.0, 0.0); dim];
    for term in state.terms() {
        let idx = term.ket.iter().fold(0usize, |acc, &s| acc * d + s as usize);
        vector[idx] += term.amplitude;
    }
    let stride = d.pow((q - 1 - site) as u32);
    let mut rho = CMatrix::zeros(d, d);
    for (i, &a) in vector.iter().enumerate() {
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let s_i = i / stride % d;
        let base = i - s_i * stride;
        for s_j in 0..d {
            rho[(s_i, s_j)] += a * vector[base + s_j * stride].conj();
        }
    }
    rho
}

/// Random dense state over all kets of the register.
pub fn random_dense_state(rng: &mut Rng, q: usize, d: usize) -> PureState {
    let dim = d.pow(q as u32);
    let terms: Vec<Term> = (0..dim)
        .map(|idx| {
            let mut ket = vec![0u8; q];
            let mut v = idx;
            for slot in ket.iter_mut().rev() {
                *slot = (v % d) as u8;
                v /= d;
            }
            Term {
                amplitude: rng.amplitude(),
                ket,
            }
        })
        .collect();
    PureState::new(QuditSystem::new(q, d).unwrap(), terms)
        .unwrap()
        .normalize()
        .unwrap()
}

/// Random complex matrix with entries in the unit square.
pub fn random_matrix(rng: &mut Rng, d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = C64::new(rng.symmetric(), rng.symmetric());
        }
    }
    m
}

/// Random determinant-one matrix: a random matrix scaled by a principal
/// d-th root of its determinant. Resamples until well conditioned.
pub fn random_sl_matrix(rng: &mut Rng, d: usize) -> CMatrix {
    loop {
        let m = random_matrix(rng, d);
        let det = m.det().unwrap();
        if det.norm() < 0.1 {
            continue;
        }
        let root = C64::from_polar(det.norm().powf(1.0 / d as f64), det.arg() / d as f64);
        let scaled = m.scale(C64::new(1.0, 0.0) / root);
        debug_assert!((scaled.det().unwrap() - C64::new(1.0, 0.0)).norm() < 1e-10);
        return scaled;
    }
}

/// Random unitary via Gram-Schmidt on a random matrix.
pub fn random_unitary(rng: &mut Rng, d: usize) -> CMatrix {
    loop {
        let m = random_matrix(rng, d);
        let mut cols: Vec<Vec<C64>> = (0..d)
            .map(|j| (0..d).map(|i| m[(i, j)]).collect())
            .collect();
        let mut ok = true;
        for j in 0..d {
            for i in 0..j {
                let proj: C64 = (0..d).map(|r| cols[i][r].conj() * cols[j][r]).sum();
                for r in 0..d {
                    let sub = proj * cols[i][r];
                    cols[j][r] -= sub;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for r in 0..d {
                cols[j][r] /= norm;
            }
        }
        if !ok {
            continue;
        }
        let mut u = CMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                u[(i, j)] = cols[j][i];
            }
        }
        return u;
    }
}

/// State with fresh random amplitudes on a fixed support.
pub fn random_amplitudes_on(rng: &mut Rng, b: &BMatrix) -> PureState {
    let terms = b
        .columns()
        .iter()
        .map(|ket| Term {
            amplitude: rng.amplitude(),
            ket: ket.clone(),
        })
        .collect();
    PureState::new(QuditSystem::new(b.q(), b.d()).unwrap(), terms)
        .unwrap()
        .normalize()
        .unwrap()
}
