//! Exact linear algebra over the rationals.
//!
//! Elimination is fraction-free: rows are scaled to primitive integer vectors
//! and combined with integer multipliers, dividing out the row content after
//! each step. Pivots are chosen as the first nonzero entry in column order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;

/// Scales a rational row to a primitive integer row (positive factor).
pub fn clear_denominators(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut out: Vec<BigInt> = row.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    make_primitive(&mut out);
    out
}

fn make_primitive(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x /= &g;
        }
    }
}

/// Reduced integer echelon form of a matrix.
#[derive(Debug, Clone)]
pub struct Echelon {
    /// Nonzero rows; row `r` has its pivot at `pivots[r]` and zeros in every
    /// other pivot column.
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// One null vector per free column: that column set to 1, other free
    /// columns 0.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![Rational::zero(); self.ncols];
                v[f] = Rational::one();
                for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                    if !row[f].is_zero() {
                        v[pc] = -Rational::new(row[f].clone(), row[pc].clone());
                    }
                }
                v
            })
            .collect()
    }
}

/// Fraction-free Gauss–Jordan elimination.
pub fn fraction_free_reduce(rows: &[Vec<Rational>], ncols: usize) -> Echelon {
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ncols, "ragged matrix");
            clear_denominators(r)
        })
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        if m[r][c].is_negative() {
            for x in m[r].iter_mut() {
                *x = -&*x;
            }
        }
        let pivot_row = m[r].clone();
        for (j, row) in m.iter_mut().enumerate() {
            if j == r || row[c].is_zero() {
                continue;
            }
            let g = pivot_row[c].gcd(&row[c]);
            let a = &pivot_row[c] / &g;
            let b = &row[c] / &g;
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = &*x * &a - p * &b;
            }
            make_primitive(row);
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Echelon { rows: m, pivots, ncols }
}

/// Basis of `{v : A v = 0}`.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    fraction_free_reduce(rows, ncols).nullspace()
}

pub fn rank(rows: &[Vec<Rational>], ncols: usize) -> usize {
    fraction_free_reduce(rows, ncols).rank()
}

/// Reduced row-echelon form of the row space, with leading entries 1.
///
/// This is the canonical basis of the span of `rows`: two sets of vectors
/// span the same space exactly when their `canonical_basis` agree.
pub fn canonical_basis(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let e = fraction_free_reduce(rows, ncols);
    e.rows
        .iter()
        .zip(&e.pivots)
        .map(|(row, &pc)| {
            let lead = &row[pc];
            row.iter().map(|x| Rational::new(x.clone(), lead.clone())).collect()
        })
        .collect()
}

/// A solution of `A x = b` (free variables set to zero), if consistent.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Option<Vec<Rational>> {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let aug: Vec<Vec<Rational>> =
        a.iter().zip(b).map(|(row, rhs)| row.iter().cloned().chain(std::iter::once(rhs.clone())).collect()).collect();
    let e = fraction_free_reduce(&aug, ncols + 1);
    if e.pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &pc) in e.rows.iter().zip(&e.pivots) {
        x[pc] = Rational::new(row[ncols].clone(), row[pc].clone());
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{rat, ratio};

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    fn mat_vec(a: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
        a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
    }

    #[test]
    fn nullspace_of_rank_deficient() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        assert!(mat_vec(&a, &ns[0]).iter().all(Zero::is_zero));
        assert_eq!(rank(&a, 3), 2);
    }

    #[test]
    fn rational_entries() {
        let a = vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(3, 2), rat(1)]];
        assert_eq!(rank(&a, 2), 1);
        let ns = nullspace(&a, 2);
        assert_eq!(ns, vec![vec![ratio(-2, 3), rat(1)]]);
    }

    #[test]
    fn empty_system_has_full_nullspace() {
        assert_eq!(nullspace(&[], 3).len(), 3);
    }

    #[test]
    fn canonical_basis_is_span_invariant() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let b = m(&[&[1, 2, 1], &[2, 1, -1]]);
        assert_eq!(canonical_basis(&a, 3), canonical_basis(&b, 3));
        assert_eq!(canonical_basis(&a, 3), m(&[&[1, 0, -1], &[0, 1, 1]]));
    }

    #[test]
    fn solve_consistent_and_not() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let x = solve(&a, &[rat(3), rat(1)], 2).unwrap();
        assert_eq!(x, vec![rat(2), rat(1)]);
        let sing = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&sing, &[rat(1), rat(3)], 2).is_none());
        let x = solve(&sing, &[rat(1), rat(2)], 2).unwrap();
        assert_eq!(mat_vec(&sing, &x), vec![rat(1), rat(2)]);
    }
}
