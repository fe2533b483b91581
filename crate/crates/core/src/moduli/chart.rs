use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landau_ginzburg::{build_closed, LGClosedAlgebra};
use crate::linalg::{self, cjson, CMatrix, CVector, C64, ONE, ZERO};
use crate::polycore::{self, LGPolynomial, Poly};
use crate::tolerance::{rel, ToleranceConfig};

/// Quasi-homogeneity data of the flat coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerData {
    /// `d_i = (n + 2 - i) / (n + 1)`, 1-based `i`.
    pub d: Vec<f64>,
    pub r: Vec<f64>,
    /// `2 / (n + 1) - 1`.
    pub v: f64,
}

impl EulerData {
    pub fn new(n: usize) -> Self {
        let np1 = (n + 1) as f64;
        Self {
            d: (1..=n).map(|i| (n + 2 - i) as f64 / np1).collect(),
            r: vec![0.0; n],
            v: 2.0 / np1 - 1.0,
        }
    }

    /// Integer weights `(n + 1) d_i`.
    pub fn weights(n: usize) -> Vec<u32> {
        (1..=n).map(|i| (n + 2 - i) as u32).collect()
    }
}

/// Linear map `tt -> t` as an `n x n` matrix.
pub fn ttilde_to_t_matrix(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    let np1 = (n + 1) as f64;
    for i in 1..=n {
        let (src, coef) = if i == 1 {
            (n, -np1)
        } else if i == n {
            (1, -1.0)
        } else {
            (n + 1 - i, -np1.sqrt())
        };
        m[(i - 1, src - 1)] = C64::new(coef, 0.0);
    }
    m
}

pub fn ttilde_to_t(tt: &[C64]) -> Vec<C64> {
    let m = ttilde_to_t_matrix(tt.len());
    (&m * CVector::from_column_slice(tt)).iter().copied().collect()
}

pub fn t_to_ttilde(t: &[C64]) -> Vec<C64> {
    let m = ttilde_to_t_matrix(t.len());
    let inv = linalg::inverse(&m, 1e-12).expect("signed permutation up to scale");
    (&inv * CVector::from_column_slice(t)).iter().copied().collect()
}

/// Flat coordinates of `p` (no root finding needed).
pub fn flat_coordinates(p: &LGPolynomial) -> Vec<C64> {
    ttilde_to_t(&polycore::revert_generic(p.a(), p.n()))
}

/// The superpotential with flat coordinates `t`.
pub fn a_from_flat(t: &[C64]) -> Result<LGPolynomial> {
    polycore::a_from_reversion(&t_to_ttilde(t))
}

/// Exact `d t / d a` (row `i` = `t^i`, column `k` = `a_k`).
pub fn jacobian_t_by_a(p: &LGPolynomial) -> CMatrix {
    let (_, j) = polycore::revert_with_jacobian(p);
    ttilde_to_t_matrix(p.n()) * j
}

/// Metric expected in flat coordinates: `delta_{i+j,n+1}`, except for
/// `n = 1`, where the unit-normalized coordinate gives `g = 1/2`.
pub fn expected_flat_metric(n: usize) -> CMatrix {
    if n == 1 {
        return CMatrix::from_element(1, 1, C64::new(0.5, 0.0));
    }
    CMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { ONE } else { ZERO })
}

#[derive(Debug, Clone)]
pub struct CanonicalChart {
    pub closed: LGClosedAlgebra,
    /// `x^i = p(alpha_i)`.
    pub x: Vec<C64>,
    /// `d x^i / d a_k = alpha_i^(n-k)`.
    pub jacobian_xa: CMatrix,
    /// Central-difference check of `dp/dx^j = e_j`.
    pub fd_residual: f64,
    /// `sum_i mu_i dx^i - da_1/(n+1)` in the a-chart.
    pub one_form_residual: f64,
}

pub fn canonical_values(p: &LGPolynomial, roots: &[C64]) -> Vec<C64> {
    roots.iter().map(|&r| p.eval(r)).collect()
}

pub fn jacobian_x_by_a(n: usize, roots: &[C64]) -> CMatrix {
    CMatrix::from_fn(n, n, |i, k| roots[i].powi((n - k - 1) as i32))
}

/// Newton iteration in `a` for prescribed canonical coordinates, tracking
/// root labels by continuation from `roots`.
pub fn a_from_canonical(
    target: &[C64],
    start: &LGPolynomial,
    roots: &[C64],
    tol: &ToleranceConfig,
) -> Result<(LGPolynomial, Vec<C64>)> {
    let n = start.n();
    let mut p = start.clone();
    let mut labels = roots.to_vec();
    for _ in 0..60 {
        let x = canonical_values(&p, &labels);
        let resid: Vec<C64> = x.iter().zip(target).map(|(a, b)| a - b).collect();
        let j = jacobian_x_by_a(n, &labels);
        let step = j
            .lu()
            .solve(&CVector::from_vec(resid.clone()))
            .ok_or(Error::NoConvergence("canonical Newton"))?;
        let a: Vec<C64> = p.a().iter().zip(step.iter()).map(|(a, s)| a - s).collect();
        p = LGPolynomial::new(a)?;
        let fresh = polycore::critical_points(&p, tol)?;
        labels = polycore::match_roots(&labels, &fresh, tol)?;
        let scale = linalg::max_norm(p.a()).max(1.0);
        if linalg::max_norm(step.as_slice()) <= 1e-15 * scale {
            break;
        }
    }
    let x = canonical_values(&p, &labels);
    let err = linalg::max_abs_diff(&x, target);
    if err > 1e-12 * linalg::max_norm(target).max(1.0) {
        return Err(Error::NoConvergence("canonical Newton"));
    }
    Ok((p, labels))
}

pub fn canonical_chart(p: &LGPolynomial, tol: &ToleranceConfig) -> Result<CanonicalChart> {
    let closed = build_closed(p, tol)?;
    let n = p.n();
    let roots = closed.roots().to_vec();
    let x = canonical_values(p, &roots);
    let jacobian_xa = jacobian_x_by_a(n, &roots);

    let h = tol.fd_step;
    let mut fd_residual = 0.0f64;
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        let (pp, _) = a_from_canonical(&xp, p, &roots, tol)?;
        let (pm, _) = a_from_canonical(&xm, p, &roots, tol)?;
        let da: Vec<C64> = pp.a().iter().zip(pm.a()).map(|(u, v)| (u - v) / (2.0 * h)).collect();
        let dp = LGPolynomial::tangent_from_a(&da);
        fd_residual = fd_residual.max(dp.max_abs_diff(&closed.idempotents()[j]));
    }

    let mu = closed.mu();
    let mut one_form_residual = 0.0f64;
    for k in 0..n {
        let v: C64 = (0..n).map(|i| mu[i] * jacobian_xa[(i, k)]).sum();
        let expect = if k == 0 { ONE / (n + 1) as f64 } else { ZERO };
        one_form_residual = one_form_residual.max((v - expect).norm());
    }
    Ok(CanonicalChart {
        closed,
        x,
        jacobian_xa,
        fd_residual,
        one_form_residual,
    })
}

#[derive(Debug, Clone)]
pub struct FlatChart {
    pub closed: LGClosedAlgebra,
    pub x: Vec<C64>,
    pub ttilde: Vec<C64>,
    pub t: Vec<C64>,
    /// `d a_k / d t^i`, row `k`, column `i`.
    pub jacobian_ta: CMatrix,
    /// `d x^i / d a_k`.
    pub jacobian_xa: CMatrix,
    /// `dp / dt^i` as polynomials of degree `< n`.
    pub tangents: Vec<Poly>,
}

pub fn flat_chart(p: &LGPolynomial, tol: &ToleranceConfig) -> Result<FlatChart> {
    let closed = build_closed(p, tol)?;
    FlatChart::from_closed(closed)
}

impl FlatChart {
    pub fn from_closed(closed: LGClosedAlgebra) -> Result<Self> {
        let p = closed.p().clone();
        let n = p.n();
        let (ttilde, jtt) = polycore::revert_with_jacobian(&p);
        let t = ttilde_to_t(&ttilde);
        let dt_da = ttilde_to_t_matrix(n) * jtt;
        let jacobian_ta = linalg::inverse(&dt_da, 1e-14).ok_or(Error::SingularGram)?;
        let tangents = (0..n)
            .map(|i| {
                let col: Vec<C64> = (0..n).map(|k| jacobian_ta[(k, i)]).collect();
                LGPolynomial::tangent_from_a(&col)
            })
            .collect();
        let roots = closed.roots().to_vec();
        Ok(Self {
            x: canonical_values(&p, &roots),
            jacobian_xa: jacobian_x_by_a(n, &roots),
            closed,
            ttilde,
            t,
            jacobian_ta,
            tangents,
        })
    }

    pub fn n(&self) -> usize {
        self.closed.n()
    }

    pub fn p(&self) -> &LGPolynomial {
        self.closed.p()
    }

    pub fn roots(&self) -> &[C64] {
        self.closed.roots()
    }

    pub fn tangent(&self, i: usize) -> &Poly {
        &self.tangents[i]
    }

    /// `X[i][m] = (dp/dt^i)(alpha_m) = d x^m / d t^i`.
    pub fn tangent_at_roots(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, n, |i, m| self.tangents[i].eval(self.roots()[m]))
    }

    /// `g_ij = l_p(dp/dt^i * dp/dt^j)`.
    pub fn metric(&self) -> CMatrix {
        let n = self.n();
        CMatrix::from_fn(n, n, |i, j| {
            self.closed
                .functional(&self.closed.multiply(&self.tangents[i], &self.tangents[j]))
        })
    }

    pub fn metric_residual(&self) -> f64 {
        linalg::max_abs(&(self.metric() - expected_flat_metric(self.n())))
    }

    /// Metric of the reversion tangents against `(n+1) delta_{i+j,n+1}`.
    pub fn ttilde_metric_residual(&self) -> f64 {
        let n = self.n();
        let tv: Vec<Poly> = (1..=n).map(|i| polycore::reversion_tangent(self.p(), i)).collect();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let g = self.closed.functional(&self.closed.multiply(&tv[i], &tv[j]));
                let e = if i + j == n - 1 {
                    C64::new((n + 1) as f64, 0.0)
                } else {
                    ZERO
                };
                worst = worst.max((g - e).norm());
            }
        }
        worst
    }

    /// Tangents from the Jacobian against `-[p' p^(-i/(n+1))]_+`.
    pub fn tangent_route_residual(&self) -> f64 {
        let n = self.n();
        let l = ttilde_to_t_matrix(n);
        let mut worst = 0.0f64;
        for i in 0..n {
            // d/d tt^i = sum_j (dt^j/dtt^i) d/dt^j
            let mut q = Poly::zero();
            for j in 0..n {
                q = &q + &self.tangents[j].scale(l[(j, i)]);
            }
            let r = polycore::reversion_tangent(self.p(), i + 1);
            worst = worst.max(rel(q.max_abs_diff(&r), r.max_abs_coeff()));
        }
        worst
    }

    pub fn unit_residual(&self) -> f64 {
        self.tangents[0].max_abs_diff(&Poly::one())
    }

    pub fn reversion_residual(&self) -> f64 {
        let n = self.n();
        let a = self.p().a();
        let mut r = (self.ttilde[0] + a[0] / (n + 1) as f64).norm();
        if n >= 2 {
            r = r.max((self.ttilde[1] + a[1] / (n + 1) as f64).norm());
        }
        r
    }
}

/// Residuals of the Euler-field identities.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerCheck {
    /// `L_E a_k = (k+1)/(n+1) a_k`.
    pub l_e_a: Vec<C64>,
    /// `L_E p` against `p - z p'/(n+1)`.
    pub polynomial_residual: f64,
    /// `L_E t^i` against `d_i t^i`.
    pub flat_residual: f64,
    /// `sum_i x^i e_i` against `L_E p`; absent when `p` is degenerate.
    pub canonical_residual: Option<f64>,
}

pub fn euler_check(p: &LGPolynomial, tol: &ToleranceConfig) -> EulerCheck {
    let n = p.n();
    let np1 = (n + 1) as f64;
    let l_e_a: Vec<C64> = p
        .a()
        .iter()
        .enumerate()
        .map(|(k, &a)| a * ((k + 2) as f64 / np1))
        .collect();
    let le_p = LGPolynomial::tangent_from_a(&l_e_a);
    let z = Poly::monomial(1, ONE);
    let rhs = &p.to_poly() - &(&z * &p.derivative()).scale(C64::new(1.0 / np1, 0.0));
    let scale = p.to_poly().max_abs_coeff();
    let polynomial_residual = rel(le_p.max_abs_diff(&rhs), scale);

    let jac = jacobian_t_by_a(p);
    let t = flat_coordinates(p);
    let e = EulerData::new(n);
    let le_t = &jac * CVector::from_column_slice(&l_e_a);
    let flat_residual = (0..n)
        .map(|i| rel((le_t[i] - t[i] * e.d[i]).norm(), t[i].norm()))
        .fold(0.0, f64::max);

    let canonical_residual = build_closed(p, tol).ok().map(|closed| {
        let mut acc = Poly::zero();
        for (i, e) in closed.idempotents().iter().enumerate() {
            acc = &acc + &e.scale(p.eval(closed.roots()[i]));
        }
        rel(acc.max_abs_diff(&le_p), le_p.max_abs_coeff())
    });
    EulerCheck {
        l_e_a,
        polynomial_residual,
        flat_residual,
        canonical_residual,
    }
}

/// Totally symmetric `c_ijk = l_p(d_i * d_j * d_k)` in flat coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureTensor {
    pub n: usize,
    #[serde(with = "cjson::vec")]
    pub c: Vec<C64>,
}

impl StructureTensor {
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.c[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs_diff(&self, other: &StructureTensor) -> f64 {
        linalg::max_abs_diff(&self.c, &other.c)
    }
}

pub fn structure_tensor(chart: &FlatChart) -> StructureTensor {
    let n = chart.n();
    let mut c = vec![ZERO; n * n * n];
    for i in 0..n {
        for j in i..n {
            let pij = chart.closed.multiply(&chart.tangents[i], &chart.tangents[j]);
            for k in j..n {
                let v = chart
                    .closed
                    .functional(&chart.closed.multiply(&pij, &chart.tangents[k]));
                for (a, b, d) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                    c[(a * n + b) * n + d] = v;
                }
            }
        }
    }
    StructureTensor { n, c }
}

/// Same tensor from canonical data: `sum_m mu_m X_im X_jm X_km`.
pub fn structure_tensor_canonical(chart: &FlatChart) -> StructureTensor {
    let n = chart.n();
    let x = chart.tangent_at_roots();
    let mu = chart.closed.mu();
    let mut c = vec![ZERO; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[(i * n + j) * n + k] = (0..n).map(|m| mu[m] * x[(i, m)] * x[(j, m)] * x[(k, m)]).sum();
            }
        }
    }
    StructureTensor { n, c }
}
