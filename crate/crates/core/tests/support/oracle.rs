//! Independent oracle for the point-symmetry solver.
//!
//! The oracle never touches `Expr`, `Poly` or the fraction-free eliminator. It
//! evaluates the linearized symmetry condition
//!
//!   Pᵢ − Σⱼ Kⱼ ∂Fᵢ/∂xⱼ,   Pᵢ = D_t Kᵢ − pᵢ D_t T,
//!
//! for every ansatz basis function at random integer points, straight from
//! the raw tensor entries, and row-reduces the resulting dense matrix with
//! plain rational Gauss–Jordan elimination.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qhds::determining::Mode;
use qhds::CoeffTensor;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Exponent tuples over `(t, x1..xn)` of total degree ≤ d: degree ascending,
/// then exponent tuple descending.
pub fn ansatz_monomials(n: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(pos: usize, len: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == len {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(pos + 1, len, left - e, cur, out);
            cur.pop();
        }
    }
    rec(0, n + 1, d, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        da.cmp(&db).then_with(|| b.cmp(a))
    });
    out
}

fn powq(x: &Q, e: u32) -> Q {
    (0..e).fold(Q::one(), |acc, _| acc * x)
}

fn mono_val(m: &[u32], t: &Q, x: &[Q]) -> Q {
    let mut v = powq(t, m[0]);
    for (l, xl) in x.iter().enumerate() {
        v *= powq(xl, m[l + 1]);
    }
    v
}

/// ∂/∂(coordinate c) of the monomial, c = 0 for t, c = l for x_l.
fn mono_deriv(m: &[u32], c: usize, t: &Q, x: &[Q]) -> Q {
    if m[c] == 0 {
        return Q::zero();
    }
    let mut d = m.to_vec();
    d[c] -= 1;
    q(m[c] as i64) * mono_val(&d, t, x)
}

fn total_derivative(m: &[u32], t: &Q, x: &[Q], p: &[Q]) -> Q {
    let mut v = mono_deriv(m, 0, t, x);
    for (l, pl) in p.iter().enumerate() {
        v += pl * mono_deriv(m, l + 1, t, x);
    }
    v
}

struct Tensor {
    n: usize,
    a: Vec<Q>,
}

impl Tensor {
    fn get(&self, i: usize, j: usize, k: usize) -> &Q {
        &self.a[(i * self.n + j) * self.n + k]
    }

    fn rhs(&self, i: usize, x: &[Q]) -> Q {
        let mut s = Q::zero();
        for j in 0..self.n {
            for k in 0..self.n {
                s += self.get(i, j, k) * &x[j] * &x[k];
            }
        }
        s
    }

    fn jac(&self, i: usize, j: usize, x: &[Q]) -> Q {
        let mut s = Q::zero();
        for (k, xk) in x.iter().enumerate() {
            s += (self.get(i, j, k) + self.get(i, k, j)) * xk;
        }
        s
    }
}

fn oracle_matrix(tensor: &Tensor, degree: u32, on_shell: bool, seed: u64) -> (Vec<Vec<Q>>, usize) {
    let n = tensor.n;
    let monos = ansatz_monomials(n, degree);
    let unknowns = (n + 1) * monos.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rand_q = |rng: &mut ChaCha8Rng| Q::from_integer(BigInt::from(rng.random_range(-6i64..=6)));
    let points = 4 * unknowns + 10;
    let mut rows = Vec::new();
    for _ in 0..points {
        let t = rand_q(&mut rng);
        let x: Vec<Q> = (0..n).map(|_| rand_q(&mut rng)).collect();
        let p: Vec<Q> = if on_shell {
            (0..n).map(|i| tensor.rhs(i, &x)).collect()
        } else {
            (0..n).map(|_| rand_q(&mut rng)).collect()
        };
        for i in 0..n {
            let mut row = Vec::with_capacity(unknowns);
            // T block
            for m in &monos {
                row.push(-&p[i] * total_derivative(m, &t, &x, &p));
            }
            // K_j blocks
            for j in 0..n {
                for m in &monos {
                    let mut v = -mono_val(m, &t, &x) * tensor.jac(i, j, &x);
                    if i == j {
                        v += total_derivative(m, &t, &x, &p);
                    }
                    row.push(v);
                }
            }
            rows.push(row);
        }
    }
    (rows, unknowns)
}

/// Plain Gauss–Jordan over Q, one row at a time; returns RREF rows and
/// pivot columns sorted by pivot.
fn rref(m: Vec<Vec<Q>>, ncols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut basis: Vec<(usize, Vec<Q>)> = Vec::new();
    for mut row in m {
        for (pc, b) in &basis {
            if !row[*pc].is_zero() {
                let f = row[*pc].clone();
                for (x, y) in row.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        let Some(c) = (0..ncols).find(|&c| !row[c].is_zero()) else { continue };
        let inv = row[c].recip();
        for x in row.iter_mut() {
            *x *= &inv;
        }
        for (_, b) in basis.iter_mut() {
            if !b[c].is_zero() {
                let f = b[c].clone();
                for (x, y) in b.iter_mut().zip(&row) {
                    *x -= &f * y;
                }
            }
        }
        basis.push((c, row));
    }
    basis.sort_by_key(|(c, _)| *c);
    basis.into_iter().map(|(c, r)| (r, c)).unzip()
}

fn oracle_basis_raw(tensor: &Tensor, degree: u32, on_shell: bool) -> Vec<Vec<Q>> {
    let (rows, ncols) = oracle_matrix(tensor, degree, on_shell, 12345);
    let (red, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let null: Vec<Vec<Q>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (row, &pc) in red.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect();
    rref(null, ncols).0
}

fn to_tensor(t: &CoeffTensor) -> Tensor {
    let n = t.dim();
    let mut a = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                a.push(t.get(i, j, k).clone());
            }
        }
    }
    Tensor { n, a }
}

/// RREF basis of the solution space, in the solver's unknown order.
pub fn oracle_basis(tensor: &CoeffTensor, degree: u32, mode: Mode) -> Vec<Vec<Q>> {
    oracle_basis_raw(&to_tensor(tensor), degree, mode == Mode::OnShell)
}
