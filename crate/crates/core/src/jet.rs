//! The system `ẋᵢ = Σⱼₖ aⁱⱼₖ xⱼ xₖ` on the first jet space.

use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{rat, Bindings, Expr, FnBindings, Monomial, Poly, Rational, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("system dimension must be at least 1")]
    ZeroDimension,
    #[error("index ({i},{j},{k}) out of range for n = {n}")]
    IndexOutOfRange { i: usize, j: usize, k: usize, n: usize },
    #[error("total derivative of an expression depending on {0} needs second-order jets")]
    DependsOnDerivative(Var),
}

/// Dense `n × n × n` coefficient tensor, entry `(i, j, k)` = `aⁱⱼₖ` (1-based).
/// No symmetry in `j, k` is assumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTensor {
    n: usize,
    a: Vec<Rational>,
}

impl CoeffTensor {
    pub fn zeros(n: usize) -> Self {
        CoeffTensor { n, a: vec![Rational::zero(); n * n * n] }
    }

    /// Builds a tensor from sparse 1-based entries; repeated entries add up.
    pub fn from_entries(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize, Rational)>,
    ) -> Result<Self, JetError> {
        if n == 0 {
            return Err(JetError::ZeroDimension);
        }
        let mut t = CoeffTensor::zeros(n);
        for (i, j, k, v) in entries {
            let idx = t.offset(i, j, k).ok_or(JetError::IndexOutOfRange { i, j, k, n })?;
            t.a[idx] += v;
        }
        Ok(t)
    }

    /// `aⁱᵢᵢ = 1` for every `i`, all else zero: `ẋᵢ = xᵢ²`.
    pub fn decoupled_squares(n: usize) -> Self {
        let mut t = CoeffTensor::zeros(n);
        for i in 1..=n {
            t.set(i, i, i, rat(1));
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn offset(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let n = self.n;
        let ok = |x: usize| (1..=n).contains(&x);
        (ok(i) && ok(j) && ok(k)).then(|| ((i - 1) * n + (j - 1)) * n + (k - 1))
    }

    /// Panics on an out-of-range index.
    pub fn get(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.a[self.offset(i, j, k).expect("tensor index out of range")]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Rational) {
        let idx = self.offset(i, j, k).expect("tensor index out of range");
        self.a[idx] = v;
    }

    /// Nonzero entries as `(i, j, k, value)` in index order.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, usize, Rational)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    let v = self.get(i, j, k);
                    if !v.is_zero() {
                        out.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }
}

/// Right-hand side `Fᵢ` and symmetrized tensor `bⁱⱼₖ = aⁱⱼₖ + aⁱₖⱼ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemRhs {
    tensor: CoeffTensor,
    f: Vec<Poly>,
    b: Vec<Rational>,
}

/// Builds `Fᵢ = Σⱼₖ aⁱⱼₖ xⱼ xₖ` and the symmetrized tensor.
pub fn build_system(tensor: CoeffTensor) -> Result<SystemRhs, JetError> {
    let n = tensor.dim();
    if n == 0 {
        return Err(JetError::ZeroDimension);
    }
    let mut f = Vec::with_capacity(n);
    let mut b = vec![Rational::zero(); n * n * n];
    for i in 1..=n {
        let mut fi = Poly::zero(n);
        for j in 1..=n {
            for k in 1..=n {
                let a = tensor.get(i, j, k);
                fi.add_term(Monomial::from_pairs([(Var::X(j), 1), (Var::X(k), 1)]), a.clone());
                b[((i - 1) * n + (j - 1)) * n + (k - 1)] = a + tensor.get(i, k, j);
            }
        }
        f.push(fi);
    }
    let sys = SystemRhs { tensor, f, b };
    for i in 1..=n {
        assert!(sys.f(i).is_homogeneous(2), "F{i} is not quadratic homogeneous");
        for j in 1..=n {
            assert_eq!(
                sys.f(i).derivative(Var::X(j)),
                sys.linear_form(i, j),
                "∂F{i}/∂x{j} disagrees with the symmetrized tensor"
            );
        }
    }
    Ok(sys)
}

impl SystemRhs {
    pub fn dim(&self) -> usize {
        self.tensor.dim()
    }

    pub fn tensor(&self) -> &CoeffTensor {
        &self.tensor
    }

    /// `Fᵢ`, 1-based.
    pub fn f(&self, i: usize) -> &Poly {
        &self.f[i - 1]
    }

    pub fn f_expr(&self, i: usize) -> Expr {
        Expr::from_poly(self.f(i))
    }

    /// `bⁱⱼₖ = aⁱⱼₖ + aⁱₖⱼ`.
    pub fn b(&self, i: usize, j: usize, k: usize) -> &Rational {
        let n = self.dim();
        &self.b[((i - 1) * n + (j - 1)) * n + (k - 1)]
    }

    /// `Σₖ bⁱⱼₖ xₖ`, which equals `∂Fᵢ/∂xⱼ`.
    pub fn linear_form(&self, i: usize, j: usize) -> Poly {
        let n = self.dim();
        Poly::from_terms(n, (1..=n).map(|k| (Monomial::var(Var::X(k)), self.b(i, j, k).clone())))
    }

    /// Numeric `F(x)`.
    pub fn eval_rhs(&self, x: &[f64]) -> Vec<f64> {
        let env = FnBindings(|v| match v {
            Var::X(i) if i >= 1 => x.get(i - 1).copied(),
            _ => None,
        });
        self.f.iter().map(|fi| fi.eval_f64(&env).expect("x bound")).collect()
    }
}

/// Replaces every `pᵢ` by `Fᵢ(x)`: restriction to the solution manifold.
pub fn on_shell_substitute(e: &Expr, sys: &SystemRhs) -> Expr {
    e.substitute(&|v| match v {
        Var::P(i) if i <= sys.dim() => Some(sys.f_expr(i)),
        _ => None,
    })
    .normalize()
}

/// Truncated total derivative `D_t = ∂t + Σⱼ pⱼ ∂xⱼ` on functions of `(t, x)`.
pub fn total_derivative(e: &Expr) -> Result<Expr, JetError> {
    let vars = e.free_vars();
    if let Some(p) = vars.iter().find(|v| v.is_derivative()) {
        return Err(JetError::DependsOnDerivative(*p));
    }
    let terms = std::iter::once(e.differentiate(Var::T)).chain(
        vars.iter()
            .filter(|v| matches!(v, Var::X(_)))
            .map(|&v| Expr::Var(Var::P(v.index().unwrap())) * e.differentiate(v)),
    );
    Ok(Expr::sum(terms).normalize())
}

/// A point `(t, x, p)` of the jet space.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl JetPoint {
    pub fn new(t: f64, x: Vec<f64>, p: Vec<f64>) -> Self {
        assert_eq!(x.len(), p.len(), "x and p lengths differ");
        JetPoint { t, x, p }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Flat `[t, x₁..xₙ, p₁..pₙ]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.dim() + 1);
        v.push(self.t);
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.p);
        v
    }

    pub fn from_slice(z: &[f64]) -> Self {
        assert!(z.len() % 2 == 1, "flat jet vector must have odd length");
        let n = (z.len() - 1) / 2;
        JetPoint { t: z[0], x: z[1..=n].to_vec(), p: z[n + 1..].to_vec() }
    }

    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::T => Some(self.t),
            Var::X(i) if i >= 1 => self.x.get(i - 1).copied(),
            Var::P(i) if i >= 1 => self.p.get(i - 1).copied(),
            _ => None,
        }
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &JetPoint) -> f64 {
        self.to_vec().iter().zip(other.to_vec()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Bindings for JetPoint {
    fn value(&self, v: Var) -> Option<f64> {
        self.get(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ratio;

    fn s1() -> SystemRhs {
        build_system(CoeffTensor::decoupled_squares(1)).unwrap()
    }

    #[test]
    fn single_square() {
        let sys = s1();
        assert_eq!(sys.f(1), &Poly::var(1, Var::X(1)).pow(2));
        assert_eq!(sys.b(1, 1, 1), &rat(2));
    }

    #[test]
    fn zero_tensor() {
        let sys = build_system(CoeffTensor::zeros(2)).unwrap();
        assert!(sys.f(1).is_zero() && sys.f(2).is_zero());
    }

    #[test]
    fn symmetrization() {
        let t = CoeffTensor::from_entries(2, [(1, 1, 2, rat(1))]).unwrap();
        let sys = build_system(t).unwrap();
        let x1x2 = Poly::var(2, Var::X(1)) * Poly::var(2, Var::X(2));
        assert_eq!(sys.f(1), &x1x2);
        assert!(sys.f(2).is_zero());
        assert_eq!(sys.b(1, 1, 2), &rat(1));
        assert_eq!(sys.b(1, 2, 1), &rat(1));
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(build_system(CoeffTensor::zeros(0)), Err(JetError::ZeroDimension));
        assert!(matches!(
            CoeffTensor::from_entries(2, [(3, 1, 1, rat(1))]),
            Err(JetError::IndexOutOfRange { i: 3, .. })
        ));
    }

    #[test]
    fn on_shell() {
        let sys = s1();
        let e = Expr::p(1) - Expr::pow(Expr::x(1), 2);
        assert_eq!(on_shell_substitute(&e, &sys), Expr::zero());
        let zero = build_system(CoeffTensor::zeros(1)).unwrap();
        assert_eq!(on_shell_substitute(&Expr::p(1), &zero), Expr::zero());
        let t = CoeffTensor::from_entries(2, [(1, 1, 2, rat(1))]).unwrap();
        let sys2 = build_system(t).unwrap();
        let r = on_shell_substitute(&(Expr::t() + Expr::p(1) * Expr::x(2)), &sys2);
        let expected = Expr::t() + Expr::x(1) * Expr::x(2) * Expr::x(2);
        assert_eq!(r.to_poly(2), expected.to_poly(2));
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!(total_derivative(&Expr::x(1)).unwrap(), Expr::p(1));
        assert_eq!(total_derivative(&Expr::t()).unwrap(), Expr::one());
        let d = total_derivative(&(Expr::x(1) * Expr::x(2))).unwrap();
        let expected = Expr::p(1) * Expr::x(2) + Expr::p(2) * Expr::x(1);
        assert_eq!(d.to_poly(2), expected.to_poly(2));
        assert_eq!(total_derivative(&(Expr::p(1) * Expr::t())), Err(JetError::DependsOnDerivative(Var::P(1))));
    }

    #[test]
    fn rhs_evaluation() {
        let t = CoeffTensor::from_entries(2, [(1, 1, 2, ratio(1, 2)), (2, 2, 2, rat(-1))]).unwrap();
        let sys = build_system(t).unwrap();
        assert_eq!(sys.eval_rhs(&[2.0, 3.0]), vec![3.0, -9.0]);
    }
}
