//! Cardy-Frobenius bundle over the space of LG polynomials: flat s-frames,
//! B-structure and transition tensors, assembly of the bundle potential as a
//! tensor series, and verification of the extended WDVV conditions against
//! the pointwise algebraic axioms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cardy::{verify_cardy_frobenius, CardyFrobeniusAlgebra};
use crate::error::{Error, Result};
use crate::frobenius::{FiniteAlgebra, FrobeniusPair, QUAT_TABLE};
use crate::landau_ginzburg::{principal_sqrt, BranchSign, LGClosedAlgebra, QuaternionLGModel};
use crate::linalg::{self, cjson, CMatrix, C64, ONE, ZERO};
use crate::moduli::{a_from_flat, reconstruct_potential, FlatChart, MPoly, PotentialPoly, FIT_TOL};
use crate::polycore::{critical_points, match_roots, min_separation, LGPolynomial};
use crate::report::VerificationReport;
use crate::sampling::{indexed_rng, random_complex};
use crate::tensor_series::{ext_wdvv_check, ExtWdvvReport, TensorMonomial, TensorSeries};
use crate::tolerance::ToleranceConfig;

/// Quaternion letters in frame order.
pub const LETTERS: [&str; 4] = ["1", "I", "J", "K"];

/// How frame vectors at `q` are scaled relative to the base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameScale {
    /// `lambda = (rho_0 / rho_q)^{1/2}`; the pairing `l^B(f f)` is constant.
    #[default]
    FormPreserving,
    /// `lambda = rho_0 / rho_q`; the pairing drifts, the transition tensor
    /// is closed.
    Literal,
}

impl FrameScale {
    pub fn lambda(self, rho0: C64, rho: C64) -> C64 {
        match self {
            FrameScale::FormPreserving => principal_sqrt(rho0 / rho),
            FrameScale::Literal => rho0 / rho,
        }
    }
}

impl fmt::Display for FrameScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameScale::FormPreserving => "form_preserving",
            FrameScale::Literal => "literal",
        })
    }
}

/// Label of the frame field `V e_{alpha_block}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SLabel {
    pub block: usize,
    pub letter: usize,
}

impl fmt::Display for SLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.block + 1, LETTERS[self.letter])
    }
}

/// The model at `q` with critical points matched to those of `base` and each
/// `rho` continued to the square root of `mu` nearest the base value.
pub fn continue_model(base: &QuaternionLGModel, q: &LGPolynomial, tol: &ToleranceConfig) -> Result<QuaternionLGModel> {
    if q.n() != base.n() {
        return Err(Error::DimensionMismatch(format!(
            "n = {} vs base n = {}",
            q.n(),
            base.n()
        )));
    }
    let roots = match_roots(base.closed().roots(), &critical_points(q, tol)?, tol)?;
    let closed = LGClosedAlgebra::from_roots(q, roots, tol)?;
    let mut rho = Vec::with_capacity(q.n());
    let mut branch = Vec::with_capacity(q.n());
    for (&mu, &r0) in closed.mu().iter().zip(base.rho()) {
        let s = principal_sqrt(mu);
        if (s - r0).norm() <= (-s - r0).norm() {
            rho.push(s);
            branch.push(BranchSign::Plus);
        } else {
            rho.push(-s);
            branch.push(BranchSign::Minus);
        }
    }
    QuaternionLGModel::from_closed(closed, rho, branch)
}

#[derive(Debug, Clone)]
pub struct BundleFrame {
    base: QuaternionLGModel,
    labels: Vec<SLabel>,
    b_gram: CMatrix,
    scale: FrameScale,
}

impl BundleFrame {
    pub fn new(base: QuaternionLGModel, scale: FrameScale) -> Result<Self> {
        let labels = (0..base.n())
            .flat_map(|block| (0..4).map(move |letter| SLabel { block, letter }))
            .collect();
        let mut frame = Self {
            base,
            labels,
            b_gram: CMatrix::zeros(0, 0),
            scale,
        };
        frame.b_gram = frame.point_from_model(frame.base.clone())?.b_gram;
        Ok(frame)
    }

    pub fn base(&self) -> &QuaternionLGModel {
        &self.base
    }

    pub fn labels(&self) -> &[SLabel] {
        &self.labels
    }

    /// `l^B(f_i f_j)` at the base point.
    pub fn b_gram(&self) -> &CMatrix {
        &self.b_gram
    }

    pub fn scale(&self) -> FrameScale {
        self.scale
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    /// The frame transported to `q`.
    pub fn at(&self, q: &LGPolynomial, tol: &ToleranceConfig) -> Result<FramePoint> {
        self.point_from_model(continue_model(&self.base, q, tol)?)
    }

    fn point_from_model(&self, model: QuaternionLGModel) -> Result<FramePoint> {
        let chart = FlatChart::from_closed(model.closed().clone())?;
        let lambda: Vec<C64> = self
            .base
            .rho()
            .iter()
            .zip(model.rho())
            .map(|(&r0, &r)| self.scale.lambda(r0, r))
            .collect();
        let b_gram = frame_b_pair(&model, &lambda)?.gram();
        Ok(FramePoint {
            model,
            chart,
            lambda,
            b_gram,
        })
    }
}

/// Frame at `q` built from the base model's frame.
pub fn flat_s_frame(
    base: &QuaternionLGModel,
    q: &LGPolynomial,
    scale: FrameScale,
    tol: &ToleranceConfig,
) -> Result<FramePoint> {
    BundleFrame::new(base.clone(), scale)?.at(q, tol)
}

#[derive(Debug, Clone)]
pub struct FramePoint {
    pub model: QuaternionLGModel,
    pub chart: FlatChart,
    pub lambda: Vec<C64>,
    pub b_gram: CMatrix,
}

impl FramePoint {
    /// The model's Cardy-Frobenius algebra with A on the flat basis
    /// `d/dt^i` and B on the frame `f_(m,V) = lambda_m V e_m`.
    pub fn cf(&self) -> Result<CardyFrobeniusAlgebra> {
        let n = self.model.n();
        let x = self.chart.tangent_at_roots();
        let xinv = linalg::inverse(&x, 1e-14).ok_or(Error::SingularGram)?;
        let mu = self.model.closed().mu();
        let mut structure = vec![ZERO; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    structure[(i * n + j) * n + k] = (0..n).map(|m| x[(i, m)] * x[(j, m)] * xinv[(m, k)]).sum();
                }
            }
        }
        let unit = (0..n).map(|k| (0..n).map(|m| xinv[(m, k)]).sum()).collect();
        let functional = (0..n).map(|i| (0..n).map(|m| x[(i, m)] * mu[m]).sum()).collect();
        let a = FrobeniusPair::new(FiniteAlgebra::new(n, structure, unit)?, functional)?;
        let b = frame_b_pair(&self.model, &self.lambda)?;
        let mut phi = CMatrix::zeros(4 * n, n);
        for k in 0..n {
            for m in 0..n {
                phi[(4 * m, k)] = x[(k, m)] / self.lambda[m];
            }
        }
        CardyFrobeniusAlgebra::new(a, b, phi)
    }

    /// Left multiplication by the letter `V` (summed over blocks) on B in
    /// frame coordinates.
    pub fn left_action(&self, letter: usize) -> Result<CMatrix> {
        let b = frame_b_pair(&self.model, &self.lambda)?;
        let mut v = vec![ZERO; b.dim()];
        for (m, l) in self.lambda.iter().enumerate() {
            v[4 * m + letter] = ONE / l;
        }
        Ok(b.algebra().left_mul_matrix(&v))
    }

    /// Block-diagonal map sending base frame coordinates to frame
    /// coordinates at this point.
    pub fn transfer(&self) -> CMatrix {
        let m = 4 * self.lambda.len();
        CMatrix::from_fn(m, m, |r, c| if r == c { self.lambda[r / 4] } else { ZERO })
    }
}

fn frame_b_pair(model: &QuaternionLGModel, lambda: &[C64]) -> Result<FrobeniusPair> {
    let n = model.n();
    let d = 4 * n;
    let mut structure = vec![ZERO; d * d * d];
    let mut unit = vec![ZERO; d];
    let mut functional = vec![ZERO; d];
    for (m, &l) in lambda.iter().enumerate() {
        for v in 0..4 {
            for w in 0..4 {
                let (sign, u) = QUAT_TABLE[v][w];
                structure[((4 * m + v) * d + 4 * m + w) * d + 4 * m + u] = l * sign;
            }
        }
        unit[4 * m] = ONE / l;
        functional[4 * m] = l * model.rho()[m] * 2.0;
    }
    FrobeniusPair::new(FiniteAlgebra::new(d, structure, unit)?, functional)
}

/// `cB[(i*m+j)*m+k] = l^B((f_i f_j) f_k)` and `cAB[(k, j)] = l^B(phi(d/dt^k) f_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleTensors {
    pub m: usize,
    #[serde(with = "cjson::vec")]
    pub cb: Vec<C64>,
    #[serde(with = "cjson::matrix")]
    pub cab: CMatrix,
}

impl BundleTensors {
    pub fn cb(&self, i: usize, j: usize, k: usize) -> C64 {
        self.cb[(i * self.m + j) * self.m + k]
    }
}

/// `cAB[(k, j)] = l^B(phi(a_k) b_j)`.
pub fn transition_tensor(cf: &CardyFrobeniusAlgebra) -> CMatrix {
    cf.phi().transpose() * cf.b().gram()
}

pub fn bundle_tensors(cf: &CardyFrobeniusAlgebra) -> BundleTensors {
    let b = cf.b();
    let m = b.dim();
    let gram = b.gram();
    let alg = b.algebra();
    let mut cb = vec![ZERO; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for p in 0..m {
                let c = alg.c(i, j, p);
                if c == ZERO {
                    continue;
                }
                for k in 0..m {
                    cb[(i * m + j) * m + k] += c * gram[(p, k)];
                }
            }
        }
    }
    BundleTensors {
        m,
        cb,
        cab: transition_tensor(cf),
    }
}

/// Targeted breakages of the base-point algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    /// B products replaced by a random symmetric 3-tensor.
    BreakAssociativityB,
    /// `phi` acquires an `I` component in every block.
    BreakCentrality,
    /// `phi` doubled on the first block.
    BreakHomomorphism,
    /// Functional of the first B block scaled by 1.5.
    BreakCardy,
    /// One product `d_1 d_2` of A perturbed without `d_2 d_1`.
    BreakTSymmetry,
    /// `phi` sends the first two idempotents to each other's blocks.
    SwapBlocks,
}

impl Corruption {
    pub const TARGETED: [Corruption; 5] = [
        Corruption::BreakAssociativityB,
        Corruption::BreakCentrality,
        Corruption::BreakHomomorphism,
        Corruption::BreakCardy,
        Corruption::BreakTSymmetry,
    ];

    /// Condition (1-based) expected to flag the corruption.
    pub fn predicted_condition(self) -> usize {
        match self {
            Corruption::BreakTSymmetry => 1,
            Corruption::BreakAssociativityB => 4,
            Corruption::BreakCentrality => 5,
            Corruption::BreakHomomorphism => 6,
            Corruption::BreakCardy | Corruption::SwapBlocks => 7,
        }
    }

    pub fn apply(self, cf: &CardyFrobeniusAlgebra, seed: u64) -> Result<CardyFrobeniusAlgebra> {
        let n = cf.a().dim();
        let needs_two = matches!(self, Corruption::BreakTSymmetry | Corruption::SwapBlocks);
        if needs_two && n < 2 {
            return Err(Error::InvalidInput(format!("{self:?} needs at least two blocks")));
        }
        match self {
            Corruption::BreakAssociativityB => {
                let b = cf.b();
                let d = b.dim();
                let mut rng = indexed_rng(seed, 0xB);
                let mut t = vec![ZERO; d * d * d];
                for i in 0..d {
                    for j in i..d {
                        for k in j..d {
                            let v = random_complex(&mut rng, 1.0);
                            for (x, y, z) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                                t[(x * d + y) * d + z] = v;
                            }
                        }
                    }
                }
                let eta_inv = linalg::inverse(&b.gram(), 1e-14).ok_or(Error::SingularGram)?;
                let mut structure = vec![ZERO; d * d * d];
                for i in 0..d {
                    for j in 0..d {
                        for c in 0..d {
                            structure[(i * d + j) * d + c] =
                                (0..d).map(|p| t[(i * d + j) * d + p] * eta_inv[(p, c)]).sum();
                        }
                    }
                }
                let alg = FiniteAlgebra::new(d, structure, b.algebra().unit().to_vec())?;
                cf.with_b(FrobeniusPair::new(alg, b.functional().to_vec())?)
            }
            Corruption::BreakCentrality => {
                let mut phi = cf.phi().clone();
                for m in 0..n {
                    for k in 0..n {
                        let unit_part = phi[(4 * m, k)];
                        phi[(4 * m + 1, k)] += unit_part * 0.5;
                    }
                }
                cf.with_phi(phi)
            }
            Corruption::BreakHomomorphism => {
                let mut phi = cf.phi().clone();
                for r in 0..4 {
                    for k in 0..n {
                        phi[(r, k)] *= 2.0;
                    }
                }
                cf.with_phi(phi)
            }
            Corruption::BreakCardy => {
                let b = cf.b();
                let mut f = b.functional().to_vec();
                for v in f.iter_mut().take(4) {
                    *v *= 1.5;
                }
                cf.with_b(FrobeniusPair::new(b.algebra().clone(), f)?)
            }
            Corruption::BreakTSymmetry => {
                let a = cf.a();
                let mut structure = a.algebra().structure().to_vec();
                for k in 0..n {
                    structure[n + k] += 0.25;
                }
                let alg = FiniteAlgebra::new(n, structure, a.algebra().unit().to_vec())?;
                cf.with_a(FrobeniusPair::new(alg, a.functional().to_vec())?)
            }
            Corruption::SwapBlocks => {
                let mut phi = cf.phi().clone();
                phi.swap_rows(0, 4);
                cf.with_phi(phi)
            }
        }
    }
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

impl std::str::FromStr for Corruption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::InvalidInput(format!("unknown corruption {s:?}")))
    }
}

/// Exponent vectors of total degree `d` in `n` variables.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=d).rev() {
            prefix.push(k);
            rec(n, d - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions {
    /// Samples per circle.
    pub points: usize,
    pub radius: f64,
    pub seed: u64,
}

/// Taylor polynomials (in `tau = t - t0`, up to `degree`) of each component
/// of an analytic map. Directional coefficients come from discrete Cauchy
/// integrals on circles `t0 + r e^{i theta} v`; the homogeneous parts are
/// then fitted by least squares over random directions `v`.
pub fn contour_taylor<F>(mut f: F, t0: &[C64], degree: u32, opts: &ContourOptions) -> Result<Vec<MPoly>>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let n = t0.len();
    let f0 = f(t0)?;
    let comps = f0.len();
    let mut polys = vec![MPoly::new(n); comps];
    for (p, v) in polys.iter_mut().zip(&f0) {
        p.add_term(vec![0; n], *v);
    }
    if degree == 0 || n == 0 {
        return Ok(polys);
    }
    if opts.points <= degree as usize || opts.radius <= 0.0 {
        return Err(Error::InvalidInput(
            "contour needs more points than the degree and a positive radius".into(),
        ));
    }
    let ndir = 2 * monomials_of_degree(n, degree).len() + 2;
    let mut rng = indexed_rng(opts.seed, 0xC0);
    let mut dirs = Vec::with_capacity(ndir);
    while dirs.len() < ndir {
        let v: Vec<C64> = (0..n).map(|_| random_complex(&mut rng, 1.0)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-2 {
            dirs.push(v.into_iter().map(|z| z / norm).collect::<Vec<_>>());
        }
    }
    let np = opts.points;
    let r = opts.radius;
    // coef[dir][d - 1][comp]
    let mut coef = vec![vec![vec![ZERO; comps]; degree as usize]; ndir];
    for (di, v) in dirs.iter().enumerate() {
        for l in 0..np {
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / np as f64);
            let t: Vec<C64> = t0.iter().zip(v).map(|(a, b)| a + b * w * r).collect();
            let h = f(&t)?;
            if h.len() != comps {
                return Err(Error::DimensionMismatch("map changed output length".into()));
            }
            for d in 1..=degree as usize {
                let kernel = w.powu(d as u32).conj() / (np as f64 * r.powi(d as i32));
                for c in 0..comps {
                    coef[di][d - 1][c] += h[c] * kernel;
                }
            }
        }
    }
    for d in 1..=degree {
        let monos = monomials_of_degree(n, d);
        let a = CMatrix::from_fn(ndir, monos.len(), |row, col| {
            monos[col]
                .iter()
                .zip(&dirs[row])
                .fold(ONE, |acc, (&e, &z)| acc * z.powu(e))
        });
        let b = CMatrix::from_fn(ndir, comps, |row, c| coef[row][d as usize - 1][c]);
        let sol = linalg::least_squares_columns(&a, &b).ok_or(Error::NoConvergence("contour least squares"))?;
        for (mi, e) in monos.iter().enumerate() {
            for (c, p) in polys.iter_mut().enumerate() {
                p.add_term(e.clone(), sol[(mi, c)]);
            }
        }
    }
    Ok(polys)
}

fn transition_at(frame: &BundleFrame, t: &[C64], tol: &ToleranceConfig) -> Result<CMatrix> {
    let q = a_from_flat(t)?;
    Ok(transition_tensor(&frame.at(&q, tol)?.cf()?))
}

/// Largest asymmetry `|d_l cAB[k][j] - d_k cAB[l][j]|` at the base point,
/// by central differences with step `fd_step`.
pub fn transition_closure_defect(frame: &BundleFrame, tol: &ToleranceConfig) -> Result<f64> {
    let n = frame.base().n();
    let t0 = crate::moduli::flat_coordinates(frame.base().p());
    let h = tol.fd_step;
    let mut derivs = Vec::with_capacity(n);
    for l in 0..n {
        let mut tp = t0.clone();
        let mut tm = t0.clone();
        tp[l] += h;
        tm[l] -= h;
        derivs.push((transition_at(frame, &tp, tol)? - transition_at(frame, &tm, tol)?) / C64::new(2.0 * h, 0.0));
    }
    let mut defect = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            for j in 0..frame.m() {
                defect = defect.max((derivs[l][(k, j)] - derivs[k][(l, j)]).norm());
            }
        }
    }
    Ok(defect)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    /// Truncation degree of the series.
    pub t_degree: usize,
    /// Frame in which the transition tensor is integrated.
    pub mixed_frame: FrameScale,
    pub contour_points: usize,
    pub seed: u64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            t_degree: 4,
            mixed_frame: FrameScale::Literal,
            contour_points: 24,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Assembly {
    pub series: TensorSeries,
    /// Tensors of the (possibly corrupted) base-point algebra.
    pub base_tensors: BundleTensors,
    pub closure_defect: f64,
    /// `|d^3 F_A(t0) - l^A(d_i d_j d_k)|`, fitted potential against algebra.
    pub potential_defect: f64,
    pub contour_radius: f64,
}

/// The bundle potential centered at the model's point, in shifted flat
/// coordinates and frame coordinates.
///
/// A corruption acts on the base-point algebra only, which fixes every term
/// of degree at most three in the series.
pub fn assemble_potential(
    model: &QuaternionLGModel,
    potential: &PotentialPoly,
    opts: &AssemblyOptions,
    corruption: Option<Corruption>,
    tol: &ToleranceConfig,
) -> Result<Assembly> {
    if opts.t_degree < 3 {
        return Err(Error::InvalidInput("t_degree must be at least 3".into()));
    }
    let n = model.n();
    if potential.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "potential has n = {}, model n = {n}",
            potential.n()
        )));
    }
    let frame = BundleFrame::new(model.clone(), opts.mixed_frame)?;
    let closure_defect = transition_closure_defect(&frame, tol)?;
    if closure_defect > 100.0 * tol.fd_step {
        return Err(Error::TransitionNotClosed { defect: closure_defect });
    }
    let base = frame.point_from_model(model.clone())?;
    let t0 = base.chart.t.clone();
    let clean = base.cf()?;
    let cf = match corruption {
        Some(c) => c.apply(&clean, opts.seed)?,
        None => clean.clone(),
    };
    let tensors = bundle_tensors(&cf);
    let m = frame.m();

    let radius = 0.1
        * min_separation(model.closed().roots())
            .min(min_separation(&base.chart.x))
            .min(1.0);
    let higher = if opts.t_degree >= 4 {
        let copts = ContourOptions {
            points: opts.contour_points,
            radius,
            seed: opts.seed,
        };
        let f = |t: &[C64]| -> Result<Vec<C64>> {
            let c = transition_at(&frame, t, tol)?;
            Ok((0..n)
                .flat_map(|k| (0..m).map(move |j| (k, j)))
                .map(|(k, j)| c[(k, j)])
                .collect())
        };
        contour_taylor(f, &t0, (opts.t_degree - 2) as u32, &copts)?
    } else {
        Vec::new()
    };

    let mut series = TensorSeries::new(n, m, opts.t_degree);
    let ga = cf.a().gram();
    for i in 0..n {
        for j in 0..n {
            series.add_term(TensorMonomial::new(vec![i as u16, j as u16], vec![]), ga[(i, j)] * 0.5)?;
        }
    }
    let gb = cf.b().gram();
    for i in 0..m {
        for j in 0..m {
            series.add_term(TensorMonomial::new(vec![], vec![i as u16, j as u16]), gb[(i, j)])?;
        }
    }
    let a_alg = cf.a().algebra();
    for i in 0..n {
        for j in 0..n {
            let ij = a_alg.mul(&a_alg.basis(i), &a_alg.basis(j));
            for k in 0..n {
                let v = cf.a().apply(&a_alg.mul(&ij, &a_alg.basis(k)));
                series.add_term(TensorMonomial::new(vec![i as u16, j as u16, k as u16], vec![]), v / 6.0)?;
            }
        }
    }
    let shifted = potential.poly().taylor_shift(&t0);
    for (e, c) in &shifted.terms {
        let deg = MPoly::degree_of(e) as usize;
        if (4..=opts.t_degree).contains(&deg) {
            series.add_symmetric_t(&exponent_word(e), &[], *c)?;
        }
    }
    for k in 0..n {
        for j in 0..m {
            series.add_term(TensorMonomial::new(vec![k as u16], vec![j as u16]), tensors.cab[(k, j)])?;
        }
    }
    // P_j of degree d + 1 is (1 / (d + 1)) sum_k t^k C_{kj,d}.
    for (idx, poly) in higher.iter().enumerate() {
        let (k, j) = (idx / m, idx % m);
        for (e, c) in &poly.terms {
            let d = MPoly::degree_of(e);
            if d == 0 {
                continue;
            }
            let mut word = exponent_word(e);
            word.push(k as u16);
            series.add_symmetric_t(&word, &[j as u16], *c / (d as f64 + 1.0))?;
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let v = tensors.cb(i, j, k);
                if v != ZERO {
                    series.add_term(TensorMonomial::new(vec![], vec![i as u16, j as u16, k as u16]), v / 3.0)?;
                }
            }
        }
    }

    let clean_a = clean.a().algebra();
    let d3 = potential.third_derivatives(&t0);
    let mut potential_defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let ij = clean_a.mul(&clean_a.basis(i), &clean_a.basis(j));
            for k in 0..n {
                let v = clean.a().apply(&clean_a.mul(&ij, &clean_a.basis(k)));
                potential_defect = potential_defect.max((d3[(i * n + j) * n + k] - v).norm());
            }
        }
    }
    Ok(Assembly {
        series,
        base_tensors: tensors,
        closure_defect,
        potential_defect,
        contour_radius: radius,
    })
}

fn exponent_word(e: &[u32]) -> Vec<u16> {
    e.iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i as u16, k as usize))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleOptions {
    pub assembly: AssemblyOptions,
    /// Frame used for the pairing drift and the pointwise route.
    pub scale: FrameScale,
    pub corruption: Option<Corruption>,
    /// Sample count for the potential fit.
    pub potential_samples: usize,
}

impl Default for BundleOptions {
    fn default() -> Self {
        Self {
            assembly: AssemblyOptions::default(),
            scale: FrameScale::FormPreserving,
            corruption: None,
            potential_samples: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    #[serde(with = "cjson::vec")]
    pub a: Vec<C64>,
    #[serde(with = "cjson::vec")]
    pub lambda: Vec<C64>,
    /// Relative change of `l^B(f_i f_j)` under the chosen scale.
    pub b_gram_drift: f64,
    /// `max_m |2 rho_0^2 / rho_q - 2 rho_0|`, the unit-pairing drift of
    /// the literal scale.
    pub literal_unit_drift: f64,
    pub ext: ExtWdvvReport,
    pub algebraic: VerificationReport,
    pub series_pass: bool,
    pub algebraic_pass: bool,
    pub quaternion_invariance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleReport {
    pub scale: FrameScale,
    pub t_degree: usize,
    pub corruption: Option<Corruption>,
    pub points: Vec<PointReport>,
    pub closure_defect_literal: f64,
    pub closure_defect_form_preserving: f64,
    pub potential_defect: f64,
    /// Both routes agree in pass/fail at every point.
    pub agreement: bool,
    /// For a corruption: whether its predicted condition exceeds 1e-3 at
    /// the base point.
    pub detected: Option<bool>,
    pub report: VerificationReport,
}

/// Threshold above which a condition counts as violated in detection.
pub const DETECTION_THRESHOLD: f64 = 1e-3;

/// Maximum over `I, J, K` of the change of the left action between base and
/// `point`, plus its commutator with the transfer.
pub fn quaternion_invariance(base: &FramePoint, point: &FramePoint) -> Result<f64> {
    let t = point.transfer();
    let mut worst = 0.0f64;
    for letter in 1..4 {
        let l0 = base.left_action(letter)?;
        let lq = point.left_action(letter)?;
        worst = worst.max(linalg::max_abs(&(&lq - &l0)));
        worst = worst.max(linalg::max_abs(&(&t * &l0 - &l0 * &t)));
    }
    Ok(worst)
}

/// Series route and pointwise route at the base point and each sample.
pub fn verify_bundle(
    model: &QuaternionLGModel,
    samples: &[LGPolynomial],
    opts: &BundleOptions,
    tol: &ToleranceConfig,
) -> Result<BundleReport> {
    let n = model.n();
    let potential = reconstruct_potential(n, opts.potential_samples, opts.assembly.seed, tol)?
        .potential
        .pruned(1e-13);
    let frame = BundleFrame::new(model.clone(), opts.scale)?;
    let literal = BundleFrame::new(model.clone(), FrameScale::Literal)?;
    let form = BundleFrame::new(model.clone(), FrameScale::FormPreserving)?;
    let closure_defect_literal = transition_closure_defect(&literal, tol)?;
    let closure_defect_form_preserving = transition_closure_defect(&form, tol)?;
    let base_point = frame.point_from_model(model.clone())?;
    let gram_scale = linalg::max_abs(frame.b_gram()).max(1e-300);

    let mut report = VerificationReport::new();
    let mut points = Vec::new();
    let mut potential_defect = 0.0f64;
    let mut all_q = vec![model.p().clone()];
    all_q.extend(samples.iter().cloned());
    for (idx, q) in all_q.iter().enumerate() {
        let fp = frame.at(q, tol)?;
        let drift = linalg::max_abs(&(&fp.b_gram - frame.b_gram())) / gram_scale;
        let literal_unit_drift = model
            .rho()
            .iter()
            .zip(fp.model.rho())
            .map(|(&r0, &r)| (r0 * r0 * 2.0 / r - r0 * 2.0).norm())
            .fold(0.0, f64::max);

        let mut cf = fp.cf()?;
        if let Some(c) = opts.corruption {
            cf = c.apply(&cf, opts.assembly.seed)?;
        }
        let algebraic = verify_cardy_frobenius(&cf, tol);

        let asm = assemble_potential(&fp.model, &potential, &opts.assembly, opts.corruption, tol)?;
        potential_defect = potential_defect.max(asm.potential_defect);
        let ext = ext_wdvv_check(&asm.series, tol.eq_tol)?;
        let ext_report = ext.to_report(tol.eq_tol);
        let invariance = quaternion_invariance(&base_point, &fp)?;

        let prefix = format!("point{idx}");
        report.merge(&format!("{prefix}.series"), &ext_report);
        report.merge(&format!("{prefix}.algebraic"), &algebraic);
        report.at_most(format!("{prefix}.b_gram_drift"), drift, tol.eq_tol);
        report.at_most(format!("{prefix}.quaternion_invariance"), invariance, tol.eq_tol);
        let agree = ext_report.pass == algebraic.pass;
        report.at_most(format!("{prefix}.route_agreement"), if agree { 0.0 } else { 1.0 }, 0.0);
        points.push(PointReport {
            a: q.a().to_vec(),
            lambda: fp.lambda.clone(),
            b_gram_drift: drift,
            literal_unit_drift,
            series_pass: ext_report.pass,
            algebraic_pass: algebraic.pass,
            ext,
            algebraic,
            quaternion_invariance: invariance,
        });
    }
    report.at_most("closure_defect", closure_defect_literal, 100.0 * tol.fd_step);
    report.at_most("potential_defect", potential_defect, FIT_TOL);
    let agreement = points.iter().all(|p| p.series_pass == p.algebraic_pass);
    let detected = opts.corruption.map(|c| {
        let r = points[0].ext.residuals();
        r[c.predicted_condition() - 1] > DETECTION_THRESHOLD
    });
    Ok(BundleReport {
        scale: opts.scale,
        t_degree: opts.assembly.t_degree,
        corruption: opts.corruption,
        points,
        closure_defect_literal,
        closure_defect_form_preserving,
        potential_defect,
        agreement,
        detected,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landau_ginzburg::{build_quaternion_model, principal_branches};
    use crate::linalg::c;
    use crate::tensor_series::ext_wdvv_check_below;

    fn model(a: &[f64]) -> QuaternionLGModel {
        let p = LGPolynomial::from_real(a).unwrap();
        build_quaternion_model(&p, &principal_branches(p.n()), &ToleranceConfig::default()).unwrap()
    }

    #[test]
    fn identity_transfer_at_base() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let fp = flat_s_frame(&m, m.p(), FrameScale::FormPreserving, &tol).unwrap();
        assert!(fp.lambda.iter().all(|l| (l - ONE).norm() < 1e-15));
        let frame = BundleFrame::new(m.clone(), FrameScale::FormPreserving).unwrap();
        assert_eq!(frame.labels()[5].to_string(), "(2,I)");
        assert!(linalg::max_abs(&(frame.b_gram() - m.cf().b().gram())) < 1e-15);
    }

    #[test]
    fn form_preserving_scale_keeps_pairing() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let q = LGPolynomial::from_real(&[-3.03, 0.0]).unwrap();
        let fp = flat_s_frame(&m, &q, FrameScale::FormPreserving, &tol).unwrap();
        for (i, l) in fp.lambda.iter().enumerate() {
            let expect = principal_sqrt(m.rho()[i] / fp.model.rho()[i]);
            assert!((l - expect).norm() < 1e-15);
        }
        let frame = BundleFrame::new(m.clone(), FrameScale::FormPreserving).unwrap();
        assert!(linalg::max_abs(&(&fp.b_gram - frame.b_gram())) < 1e-9);

        let lit = flat_s_frame(&m, &q, FrameScale::Literal, &tol).unwrap();
        let unit_drift = (lit.b_gram[(0, 0)] - frame.b_gram()[(0, 0)]).norm();
        let r0 = m.rho()[0];
        let rq = lit.model.rho()[0];
        assert!((unit_drift - (r0 * r0 * 2.0 / rq - r0 * 2.0).norm()).abs() < 1e-12);
        assert!(unit_drift > 1e-4);
    }

    #[test]
    fn tensor_examples_at_base() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let fp = flat_s_frame(&m, m.p(), FrameScale::FormPreserving, &tol).unwrap();
        let bt = bundle_tensors(&fp.cf().unwrap());
        let x = fp.chart.tangent_at_roots();
        for i in 0..2 {
            let r = m.rho()[i];
            let b = 4 * i;
            assert!((bt.cb(b, b, b) - r * 2.0).norm() < 1e-14);
            assert!((bt.cb(b + 1, b + 2, b + 3) + r * 2.0).norm() < 1e-14);
            for k in 0..2 {
                assert!((bt.cab[(k, b)] - r * 2.0 * x[(k, i)]).norm() < 1e-13);
                for v in 1..4 {
                    assert_eq!(bt.cab[(k, b + v)], ZERO);
                }
            }
        }
    }

    #[test]
    fn frame_cf_satisfies_axioms_away_from_base() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let q = LGPolynomial::new(vec![c(-2.95, 0.02), c(0.03, -0.01)]).unwrap();
        for scale in [FrameScale::FormPreserving, FrameScale::Literal] {
            let fp = flat_s_frame(&m, &q, scale, &tol).unwrap();
            let rep = verify_cardy_frobenius(&fp.cf().unwrap(), &tol);
            assert!(rep.pass, "{rep}");
        }
    }

    #[test]
    fn closure_depends_on_frame() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let lit = transition_closure_defect(&BundleFrame::new(m.clone(), FrameScale::Literal).unwrap(), &tol).unwrap();
        let form =
            transition_closure_defect(&BundleFrame::new(m.clone(), FrameScale::FormPreserving).unwrap(), &tol).unwrap();
        assert!(lit < 1e-6, "{lit}");
        assert!(form > 1e-2, "{form}");
        let f = reconstruct_potential(2, 12, 1, &tol).unwrap().potential;
        let opts = AssemblyOptions {
            mixed_frame: FrameScale::FormPreserving,
            ..Default::default()
        };
        assert!(matches!(
            assemble_potential(&m, &f, &opts, None, &tol),
            Err(Error::TransitionNotClosed { .. })
        ));
    }

    #[test]
    fn contour_taylor_recovers_polynomials() {
        let t0 = [c(0.2, 0.1), c(-0.3, 0.0)];
        let f = |t: &[C64]| -> Result<Vec<C64>> { Ok(vec![t[0] * t[0] * t[1], (t[0] + t[1] * 2.0).exp()]) };
        let opts = ContourOptions {
            points: 24,
            radius: 0.2,
            seed: 3,
        };
        let polys = contour_taylor(f, &t0, 3, &opts).unwrap();
        let tau = [c(0.01, -0.02), c(0.015, 0.0)];
        let t: Vec<C64> = t0.iter().zip(&tau).map(|(a, b)| a + b).collect();
        assert!((polys[0].eval(&tau) - t[0] * t[0] * t[1]).norm() < 1e-12);
        // exp remainder is fourth order in |tau| ~ 0.03
        assert!((polys[1].eval(&tau) - (t[0] + t[1] * 2.0).exp()).norm() < 1e-6);
        assert_eq!(monomials_of_degree(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn assembled_series_examples() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let f = reconstruct_potential(2, 12, 1, &tol).unwrap().potential;
        let asm = assemble_potential(&m, &f, &AssemblyOptions::default(), None, &tol).unwrap();
        let s = &asm.series;
        let gram = m.cf().b().gram();
        for i in 0..8 {
            let w = TensorMonomial::new(vec![], vec![i, i]);
            assert!((s.coefficient(&w) - gram[(i as usize, i as usize)]).norm() < 1e-14);
        }
        // d_t d_s at zero reproduces cAB; d_sss reproduces cB
        for k in 0..2 {
            for j in 0..8 {
                let d = s.d_t(k).d_s(j).coefficient(&TensorMonomial::empty());
                assert!((d - asm.base_tensors.cab[(k, j)]).norm() < 1e-13);
            }
        }
        for (key, d) in s.s_length_part(3).d_sss_all() {
            let (i, j, k) = (key.0 as usize, key.1 as usize, key.2 as usize);
            assert!((d.coefficient(&TensorMonomial::empty()) - asm.base_tensors.cb(i, j, k)).norm() < 1e-13);
            assert_eq!(d.len(), 1);
        }
        assert!(asm.potential_defect < 1e-9);
        let r = ext_wdvv_check(s, 1e-9).unwrap();
        assert!(r.to_report(1e-8).pass, "{r:?}");
        assert_eq!(r.degree_limit, 1);
    }

    #[test]
    fn transition_taylor_remainder_is_second_order() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let frame = BundleFrame::new(m.clone(), FrameScale::Literal).unwrap();
        let t0 = crate::moduli::flat_coordinates(m.p());
        let c0 = transition_at(&frame, &t0, &tol).unwrap();
        let dir = [c(0.6, 0.2), c(-0.3, 0.7)];
        let mut jac = Vec::new();
        let h = 1e-6;
        for l in 0..2 {
            let mut tp = t0.clone();
            let mut tm = t0.clone();
            tp[l] += h;
            tm[l] -= h;
            jac.push(
                (transition_at(&frame, &tp, &tol).unwrap() - transition_at(&frame, &tm, &tol).unwrap())
                    / c(2.0 * h, 0.0),
            );
        }
        let remainder = |s: f64| {
            let t: Vec<C64> = t0.iter().zip(&dir).map(|(a, d)| a + d * s).collect();
            let lin = &c0 + &jac[0] * (dir[0] * s) + &jac[1] * (dir[1] * s);
            linalg::max_abs(&(transition_at(&frame, &t, &tol).unwrap() - lin))
        };
        let ratio = remainder(2e-2) / remainder(1e-2);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn corruptions_hit_predicted_conditions() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let f = reconstruct_potential(2, 12, 1, &tol).unwrap().potential;
        for c in Corruption::TARGETED.into_iter().chain([Corruption::SwapBlocks]) {
            let asm = assemble_potential(&m, &f, &AssemblyOptions::default(), Some(c), &tol).unwrap();
            let r = ext_wdvv_check(&asm.series, 1e-9).unwrap();
            assert!(r.residuals()[c.predicted_condition() - 1] > 1e-3, "{c}: {r:?}");
        }
        assert_eq!("break_cardy".parse::<Corruption>().unwrap(), Corruption::BreakCardy);
    }

    #[test]
    fn mixed_conditions_are_exact_only_at_degree_zero() {
        let tol = ToleranceConfig::default();
        let m = model(&[-3.0, 0.0]);
        let f = reconstruct_potential(2, 12, 1, &tol).unwrap().potential;
        let opts = AssemblyOptions {
            t_degree: 5,
            ..Default::default()
        };
        let asm = assemble_potential(&m, &f, &opts, None, &tol).unwrap();
        let r = ext_wdvv_check_below(&asm.series, 1e-9, 2).unwrap();
        assert!(r.associativity_a < 1e-8 && r.associativity_b < 1e-12 && r.centrality < 1e-12);
        assert!(r.cardy > 1e-3, "{r:?}");
    }

    #[test]
    fn invariance_and_single_block() {
        let tol = ToleranceConfig::default();
        let m1 = model(&[0.7]);
        let q = LGPolynomial::from_real(&[0.71]).unwrap();
        let rep = verify_bundle(&m1, &[q], &BundleOptions::default(), &tol).unwrap();
        assert!(rep.report.pass, "{}", rep.report);
        assert!(rep.agreement);
        assert!(rep.points[1].quaternion_invariance < 1e-15);
    }
}
