//! Exact arithmetic underneath the balance analysis: integer kernels by
//! fraction-free elimination and a rational phase-1 simplex for linear
//! feasibility. Floating point never decides balancedness.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

fn checked_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn checked_sub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or(Error::Overflow)
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Reduced fraction over i128, used only for kernel back-substitution where
/// Hadamard bounds keep every quantity far below overflow.
#[derive(Clone, Copy, Debug)]
struct Frac {
    num: i128,
    den: i128, // > 0
}

impl Frac {
    fn new(num: i128, den: i128) -> Result<Frac> {
        if den == 0 {
            return Err(Error::Numeric("division by zero in exact kernel".into()));
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd_i128(num, den).max(1);
        Ok(Frac {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    fn zero() -> Frac {
        Frac { num: 0, den: 1 }
    }

    fn add(self, other: Frac) -> Result<Frac> {
        Frac::new(
            checked_mul(self.num, other.den)?
                .checked_add(checked_mul(other.num, self.den)?)
                .ok_or(Error::Overflow)?,
            checked_mul(self.den, other.den)?,
        )
    }

    fn mul_int(self, k: i128) -> Result<Frac> {
        Frac::new(checked_mul(self.num, k)?, self.den)
    }

    fn div_int(self, k: i128) -> Result<Frac> {
        Frac::new(self.num, checked_mul(self.den, k)?)
    }

    fn neg(self) -> Frac {
        Frac {
            num: -self.num,
            den: self.den,
        }
    }
}

/// Basis of the rational kernel of an integer matrix, returned as primitive
/// integer vectors (gcd 1), in a deterministic order keyed to the free
/// columns of the echelon form.
pub(crate) fn integer_kernel_basis(rows: &[Vec<i128>], n_cols: usize) -> Result<Vec<Vec<i128>>> {
    let m = rows.len();
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    debug_assert!(a.iter().all(|r| r.len() == n_cols));

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut prev: i128 = 1;
    let mut r = 0;
    for c in 0..n_cols {
        if r == m {
            break;
        }
        // Smallest nonzero magnitude keeps intermediate growth down.
        let pivot_row = (r..m)
            .filter(|&i| a[i][c] != 0)
            .min_by_key(|&i| (a[i][c].unsigned_abs(), i));
        let Some(p) = pivot_row else { continue };
        a.swap(r, p);
        for i in r + 1..m {
            for j in c + 1..n_cols {
                let t = checked_sub(
                    checked_mul(a[i][j], a[r][c])?,
                    checked_mul(a[i][c], a[r][j])?,
                )?;
                debug_assert_eq!(t % prev, 0, "Bareiss division must be exact");
                a[i][j] = t / prev;
            }
            a[i][c] = 0;
        }
        prev = a[r][c];
        pivots.push((r, c));
        r += 1;
    }

    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for f in 0..n_cols {
        if pivot_cols.contains(&f) {
            continue;
        }
        let mut x = vec![Frac::zero(); n_cols];
        x[f] = Frac::new(1, 1)?;
        for &(row, col) in pivots.iter().rev() {
            if col > f {
                continue; // later pivots see only zeros of this vector
            }
            let mut sum = Frac::zero();
            for j in col + 1..n_cols {
                if a[row][j] != 0 && x[j].num != 0 {
                    sum = sum.add(x[j].mul_int(a[row][j])?)?;
                }
            }
            x[col] = sum.neg().div_int(a[row][col])?;
        }
        // Clear denominators and make primitive.
        let mut lcm: i128 = 1;
        for v in &x {
            lcm = checked_mul(lcm / gcd_i128(lcm, v.den), v.den)?;
        }
        let mut ints: Vec<i128> = Vec::with_capacity(n_cols);
        for v in &x {
            ints.push(checked_mul(v.num, lcm / v.den)?);
        }
        let g = ints.iter().fold(0i128, |acc, &v| gcd_i128(acc, v)).max(1);
        for v in &mut ints {
            *v /= g;
        }
        basis.push(ints);
    }
    Ok(basis)
}

fn big(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// A linear feasibility problem `A x >= b` over unconstrained rational `x`.
/// Equalities enter as paired inequalities.
#[derive(Clone, Debug, Default)]
pub(crate) struct Feasibility {
    rows: Vec<Vec<i128>>,
    rhs: Vec<i128>,
    n_vars: usize,
}

impl Feasibility {
    pub fn new(n_vars: usize) -> Self {
        Feasibility {
            rows: Vec::new(),
            rhs: Vec::new(),
            n_vars,
        }
    }

    pub fn at_least(&mut self, coeffs: Vec<i128>, bound: i128) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.rows.push(coeffs);
        self.rhs.push(bound);
    }

    pub fn equal(&mut self, coeffs: Vec<i128>, value: i128) {
        let negated: Vec<i128> = coeffs.iter().map(|&c| -c).collect();
        self.at_least(coeffs, value);
        self.at_least(negated, -value);
    }

    /// Phase-1 simplex with Bland's rule. Returns a witness when feasible.
    pub fn solve(&self) -> Result<Option<Vec<BigRational>>> {
        let m = self.rows.len();
        let n = self.n_vars;
        if m == 0 {
            return Ok(Some(vec![BigRational::zero(); n]));
        }

        // Column layout: u (n) | v (n) | slack (m) | artificial (per nonzero rhs).
        let art_count = self.rhs.iter().filter(|&&b| b != 0).count();
        let n_cols = 2 * n + m + art_count;
        let rhs_col = n_cols;

        let mut tab: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n_cols + 1]; m];
        let mut basis: Vec<usize> = vec![0; m];
        let mut next_art = 2 * n + m;

        for i in 0..m {
            let flip = self.rhs[i] < 0;
            let sign: i128 = if flip { -1 } else { 1 };
            let b = sign * self.rhs[i];
            // After the optional flip the row reads  s*A x >= b  with b >= 0,
            // written as  s*A x - slack = b.
            if b == 0 {
                // Negate once more so the slack can start basic at zero:
                // -s*A x + slack = 0.
                for j in 0..n {
                    tab[i][j] = big(-sign * self.rows[i][j]);
                    tab[i][n + j] = big(sign * self.rows[i][j]);
                }
                tab[i][2 * n + i] = BigRational::one();
                basis[i] = 2 * n + i;
            } else {
                for j in 0..n {
                    tab[i][j] = big(sign * self.rows[i][j]);
                    tab[i][n + j] = big(-sign * self.rows[i][j]);
                }
                tab[i][2 * n + i] = -BigRational::one();
                tab[i][next_art] = BigRational::one();
                tab[i][rhs_col] = big(b);
                basis[i] = next_art;
                next_art += 1;
            }
        }

        // Reduced costs for "minimize sum of artificials". The trailing
        // right-hand-side column carries no cost.
        let is_art = |j: usize| (2 * n + m..n_cols).contains(&j);
        let mut obj = vec![BigRational::zero(); n_cols + 1];
        for (j, o) in obj.iter_mut().enumerate() {
            if is_art(j) {
                *o = BigRational::one();
            }
        }
        for i in 0..m {
            if is_art(basis[i]) {
                for j in 0..=n_cols {
                    let t = tab[i][j].clone();
                    obj[j] -= t;
                }
            }
        }

        loop {
            let entering = (0..n_cols).find(|&j| obj[j] < BigRational::zero());
            let Some(e) = entering else { break };
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..m {
                if tab[i][e] > BigRational::zero() {
                    let ratio = &tab[i][rhs_col] / &tab[i][e];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((p, _)) = leave else {
                return Err(Error::Numeric("phase-1 simplex unbounded".into()));
            };
            let pivot = tab[p][e].clone();
            for j in 0..=n_cols {
                tab[p][j] /= &pivot;
            }
            for i in 0..m {
                if i != p && !tab[i][e].is_zero() {
                    let f = tab[i][e].clone();
                    for j in 0..=n_cols {
                        let t = &tab[p][j] * &f;
                        tab[i][j] -= t;
                    }
                }
            }
            if !obj[e].is_zero() {
                let f = obj[e].clone();
                for j in 0..=n_cols {
                    let t = &tab[p][j] * &f;
                    obj[j] -= t;
                }
            }
            basis[p] = e;
        }

        // obj[rhs_col] holds minus the attained objective.
        if !obj[rhs_col].is_zero() {
            return Ok(None);
        }
        let mut x = vec![BigRational::zero(); n];
        for i in 0..m {
            let j = basis[i];
            if j < n {
                x[j] += &tab[i][rhs_col];
            } else if j < 2 * n {
                x[j - n] -= &tab[i][rhs_col];
            }
        }
        #[cfg(debug_assertions)]
        for (row, &b) in self.rows.iter().zip(&self.rhs) {
            let lhs: BigRational = row.iter().zip(&x).map(|(&c, xv)| big(c) * xv).sum();
            debug_assert!(lhs >= big(b), "feasibility witness violates a constraint");
        }
        Ok(Some(x))
    }
}

/// Scales a strictly positive rational vector to the primitive integer
/// vector on the same ray.
pub(crate) fn to_primitive_integer(x: &[BigRational]) -> Result<Vec<u64>> {
    let mut lcm = BigInt::one();
    for v in x {
        let den = v.denom();
        let g = num_integer_gcd(&lcm, den);
        lcm = &lcm / g * den;
    }
    let mut ints: Vec<BigInt> = x.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    let mut g = BigInt::zero();
    for v in &ints {
        g = num_integer_gcd(&g, v);
    }
    if !g.is_zero() && !g.is_one() {
        for v in &mut ints {
            *v = &*v / &g;
        }
    }
    ints.iter()
        .map(|v| {
            if v.sign() == num_bigint::Sign::Minus {
                return Err(Error::InvalidCertificate(
                    "negative weight after scaling".into(),
                ));
            }
            u64::try_from(v.clone()).map_err(|_| Error::Overflow)
        })
        .collect()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_ghz_constraints() {
        // Rows of the (0,1) alternating matrix of the 3-qubit pair support.
        let rows = vec![vec![-1i128, 1], vec![-1, 1], vec![-1, 1]];
        let basis = integer_kernel_basis(&rows, 2).unwrap();
        assert_eq!(basis, vec![vec![1, 1]]);
    }

    #[test]
    fn kernel_dimension_of_double_bell() {
        // Support {00, 11, 01, 10} on two qubits.
        let rows = vec![vec![-1i128, 1, -1, 1], vec![-1, 1, 1, -1]];
        let basis = integer_kernel_basis(&rows, 4).unwrap();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(rows
                .iter()
                .all(|r| r.iter().zip(v).map(|(a, b)| a * b).sum::<i128>() == 0));
        }
    }

    #[test]
    fn kernel_of_w_support_is_trivial() {
        let rows = vec![vec![-1i128, -1, 1], vec![-1, 1, -1], vec![1, -1, -1]];
        let basis = integer_kernel_basis(&rows, 3).unwrap();
        assert!(basis.is_empty());
    }

    #[test]
    fn feasibility_finds_positive_bell_weights() {
        let mut f = Feasibility::new(2);
        f.equal(vec![-1, 1], 0);
        f.at_least(vec![1, 0], 1);
        f.at_least(vec![0, 1], 1);
        let x = f.solve().unwrap().expect("feasible");
        assert_eq!(x[0], x[1]);
        assert!(x[0] >= BigRational::one());
    }

    #[test]
    fn feasibility_rejects_w_weights() {
        let mut f = Feasibility::new(3);
        f.equal(vec![-1, -1, 1], 0);
        f.equal(vec![-1, 1, -1], 0);
        f.equal(vec![1, -1, -1], 0);
        f.at_least(vec![1, 0, 0], 1);
        f.at_least(vec![0, 1, 0], 1);
        f.at_least(vec![0, 0, 1], 1);
        assert!(f.solve().unwrap().is_none());
    }

    #[test]
    fn primitive_scaling() {
        let x = vec![
            BigRational::new(BigInt::from(3), BigInt::from(2)),
            BigRational::new(BigInt::from(9), BigInt::from(4)),
        ];
        assert_eq!(to_primitive_integer(&x).unwrap(), vec![2, 3]);
    }
}
