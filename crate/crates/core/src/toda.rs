//! Hyperbolic Toda lattices on the manifold `Z` of normalized Jacobi elements
//! `y = ssf + Σ ρ_{i,j} h_i(j) + Σ γ_{i,j} e_{α_i}(j)`, `γ_{i,j} > 0`.
//!
//! Two formulations are integrated:
//! - the Lax field `y ↦ [y, P_{b̄}(y)]` (any level), and
//! - Hamilton's equations in canonical coordinates `(ρ_{i,0}, ρ_{i,1}, φ_{i,0}, φ_{i,1})`
//!   at level 1, where `γ_{i,0} = e^{φ_{i,0}}` and `γ_{i,1} = φ_{i,1} e^{φ_{i,0}}`.
//!
//! The Lax field is the canonical Hamiltonian flow run backwards in time.

use num_traits::Float;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{BasisLabel, Takiff, TakiffElement};
use crate::cartan::CartanMatrix;
use crate::error::{Error, Result};
use crate::invariants::{evaluate_invariant, generator_specs, InvariantSpec};
use crate::linalg::Matrix;
use crate::ode::{self, Tolerances};
use crate::scalar::Scalar;

/// Raw coordinates on `Z`: `rho[i][j] = ρ_{i,j}`, `gamma[i][j] = γ_{i,j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TodaState<S> {
    pub rho: Vec<Vec<S>>,
    pub gamma: Vec<Vec<S>>,
}

impl<S: Scalar> TodaState<S> {
    pub fn new(rho: Vec<Vec<S>>, gamma: Vec<Vec<S>>) -> Result<Self> {
        let state = Self { rho, gamma };
        state.validate()?;
        Ok(state)
    }

    pub fn rank(&self) -> usize {
        self.rho.len()
    }

    pub fn level(&self) -> usize {
        self.rho.first().map_or(0, |r| r.len().saturating_sub(1))
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.rho.len();
        let width = self.rho.first().map_or(0, Vec::len);
        if n == 0 || width == 0 {
            return Err(Error::InvalidState("empty state".into()));
        }
        if self.gamma.len() != n
            || self.rho.iter().chain(&self.gamma).any(|r| r.len() != width)
        {
            return Err(Error::InvalidState(format!(
                "rho and gamma must both be {n}×{width}"
            )));
        }
        Ok(())
    }

    /// Shape check plus `γ_{i,j} > 0`.
    pub fn validate(&self) -> Result<()> {
        self.check_shape()?;
        for (i, row) in self.gamma.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                if !g.is_positive() {
                    return Err(Error::InvalidState(format!(
                        "gamma[{}][{j}] = {g} must be positive",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// `ssf + Σ ρ h + Σ γ e` with `ssf` the unit principal element.
    pub fn to_element(&self, alg: &Takiff) -> Result<TakiffElement<S>> {
        self.check_shape()?;
        if self.rank() != alg.rank() || self.level() != alg.level() {
            return Err(Error::Shape(self.rank(), self.level(), alg.rank(), alg.level()));
        }
        let mut y = alg.default_principal_f::<S>();
        for i in 0..self.rank() {
            let e = simple_root_index(alg, i);
            for j in 0..=self.level() {
                y.set(BasisLabel::H(i), j, self.rho[i][j].clone());
                y.set(BasisLabel::E(e), j, self.gamma[i][j].clone());
            }
        }
        Ok(y)
    }

    /// Reads `ρ`, `γ` back from an element of `ssf + b_l` supported on `Z`'s
    /// coordinate directions; positivity is not enforced.
    pub fn from_element(alg: &Takiff, y: &TakiffElement<S>) -> Result<Self> {
        let n = alg.rank();
        let l = alg.level();
        let mut rho = vec![vec![S::zero(); l + 1]; n];
        let mut gamma = vec![vec![S::zero(); l + 1]; n];
        let ssf = alg.default_principal_f::<S>();
        for (c, v) in y.checked_sub(&ssf)?.iter() {
            match c.label {
                BasisLabel::H(i) => rho[i][c.level] = v.clone(),
                BasisLabel::E(k) if alg.data().roots().height(k) == 1 => {
                    let i = simple_of_root(alg, k);
                    gamma[i][c.level] = v.clone();
                }
                _ => {
                    return Err(Error::Support(format!(
                        "component {} is not a coordinate of Z",
                        alg.label_name(c)
                    )))
                }
            }
        }
        Ok(Self { rho, gamma })
    }

    pub fn flatten(&self) -> Vec<S> {
        self.rho.iter().chain(&self.gamma).flatten().cloned().collect()
    }

    pub fn from_flat(rank: usize, level: usize, v: &[S]) -> Self {
        let w = level + 1;
        let rows = |off: usize| (0..rank).map(|i| v[off + i * w..off + (i + 1) * w].to_vec()).collect();
        Self { rho: rows(0), gamma: rows(rank * w) }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TodaState<T> {
        let m = |rows: &Vec<Vec<S>>| rows.iter().map(|r| r.iter().map(&f).collect()).collect();
        TodaState { rho: m(&self.rho), gamma: m(&self.gamma) }
    }
}

fn simple_root_index(alg: &Takiff, i: usize) -> usize {
    let roots = alg.data().roots();
    roots.index_of(roots.simple_root(i)).expect("simple roots are roots")
}

fn simple_of_root(alg: &Takiff, k: usize) -> usize {
    let root = &alg.data().roots().positive_roots()[k];
    root.iter().position(|&c| c == 1).expect("height-one root is simple")
}

/// Canonical coordinates at level 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState<F> {
    pub rho0: Vec<F>,
    pub rho1: Vec<F>,
    pub phi0: Vec<F>,
    pub phi1: Vec<F>,
}

impl<F: Float + Scalar> CanonicalState<F> {
    pub fn rank(&self) -> usize {
        self.rho0.len()
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.rho0.len();
        if n == 0 || [&self.rho1, &self.phi0, &self.phi1].iter().any(|v| v.len() != n) {
            return Err(Error::InvalidState(
                "canonical coordinates need four vectors of equal non-zero length".into(),
            ));
        }
        Ok(())
    }

    /// `γ_{i,0} = e^{φ_{i,0}}`, `γ_{i,1} = φ_{i,1} γ_{i,0}`; requires `φ_{i,1} > 0`.
    pub fn to_raw(&self) -> Result<TodaState<F>> {
        self.check_shape()?;
        let n = self.rank();
        let gamma = (0..n)
            .map(|i| {
                let g0 = self.phi0[i].exp();
                vec![g0, self.phi1[i] * g0]
            })
            .collect();
        let rho = (0..n).map(|i| vec![self.rho0[i], self.rho1[i]]).collect();
        TodaState::new(rho, gamma)
    }

    pub fn from_raw(state: &TodaState<F>) -> Result<Self> {
        state.validate()?;
        if state.level() != 1 {
            return Err(Error::InvalidState("canonical coordinates exist only at level 1".into()));
        }
        let col = |rows: &Vec<Vec<F>>, j: usize| rows.iter().map(|r| r[j]).collect::<Vec<_>>();
        Ok(Self {
            rho0: col(&state.rho, 0),
            rho1: col(&state.rho, 1),
            phi0: state.gamma.iter().map(|g| g[0].ln()).collect(),
            phi1: state.gamma.iter().map(|g| g[1] / g[0]).collect(),
        })
    }

    pub fn flatten(&self) -> Vec<F> {
        [&self.rho0, &self.rho1, &self.phi0, &self.phi1]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn from_flat(rank: usize, v: &[F]) -> Self {
        let part = |k: usize| v[k * rank..(k + 1) * rank].to_vec();
        Self { rho0: part(0), rho1: part(1), phi0: part(2), phi1: part(3) }
    }
}

/// The block `t′` of the symplectic form for one simple root, with inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaBlock<S> {
    pub index: usize,
    pub t_prime: Matrix<S>,
    pub inverse: Matrix<S>,
}

/// `t′_{j,s} = γ_{i,j+s−l}` for `j + s ≥ l`, else 0; `T_i = (t′)^{-1}`.
pub fn omega_block<S: Scalar>(state: &TodaState<S>, i: usize) -> Result<OmegaBlock<S>> {
    state.check_shape()?;
    if i >= state.rank() {
        return Err(Error::InvalidState(format!("block index {} out of range", i + 1)));
    }
    let g = &state.gamma[i];
    if !g[0].is_positive() {
        return Err(Error::InvalidState(format!("gamma[{}][0] must be positive", i + 1)));
    }
    let l = state.level();
    let mut t = Matrix::zeros(l + 1, l + 1);
    for j in 0..=l {
        for s in (l - j)..=l {
            t[(j, s)] = g[j + s - l].clone();
        }
    }
    let inverse = t
        .inverse()
        .ok_or_else(|| Error::Singular("omega block".into()))?;
    Ok(OmegaBlock { index: i, t_prime: t, inverse })
}

fn check_rank<S: Scalar>(state: &TodaState<S>, cartan: &CartanMatrix) -> Result<()> {
    state.check_shape()?;
    if cartan.rank() != state.rank() {
        return Err(Error::Shape(state.rank(), state.level(), cartan.rank(), state.level()));
    }
    Ok(())
}

/// `½ Σ c_{i,r} w_r ρ_{i,j} ρ_{r,l−j} + Σ w_i γ_{i,j}` with `w` the
/// [`CartanMatrix::symmetrizer`]. In type A every `w_i = 1` and this equals
/// `½ Q(y, y)`; in general it is the energy conserved by the Lax field.
pub fn hamiltonian<S: Scalar>(state: &TodaState<S>, cartan: &CartanMatrix) -> Result<S> {
    check_rank(state, cartan)?;
    let l = state.level();
    let w = cartan.symmetrizer();
    let mut terms = Vec::new();
    for i in 0..state.rank() {
        for r in 0..state.rank() {
            let c = cartan.entry(i, r) * w[r];
            if c == 0 {
                continue;
            }
            for j in 0..=l {
                terms.push(S::from_i64(c) * state.rho[i][j].clone() * state.rho[r][l - j].clone());
            }
        }
    }
    let quadratic = S::accumulate(terms) / S::from_i64(2);
    let potential = state
        .gamma
        .iter()
        .zip(&w)
        .flat_map(|(row, &wi)| row.iter().map(move |g| S::from_i64(wi) * g.clone()));
    Ok(quadratic + S::accumulate(potential))
}

fn check_canonical_rank<F: Float + Scalar>(cs: &CanonicalState<F>, cartan: &CartanMatrix) -> Result<()> {
    cs.check_shape()?;
    if cartan.rank() != cs.rank() {
        return Err(Error::Shape(cs.rank(), 1, cartan.rank(), 1));
    }
    Ok(())
}

/// `H = Σ c_{i,r} ρ_{i,0} ρ_{r,1} + Σ (1 + φ_{i,1}) e^{φ_{i,0}}`.
pub fn canonical_hamiltonian<F: Float + Scalar>(
    cs: &CanonicalState<F>,
    cartan: &CartanMatrix,
) -> Result<F> {
    check_canonical_rank(cs, cartan)?;
    let n = cs.rank();
    let mut terms = Vec::new();
    for i in 0..n {
        for r in 0..n {
            terms.push(F::from_i64(cartan.entry(i, r)) * cs.rho0[i] * cs.rho1[r]);
        }
        terms.push((F::one() + cs.phi1[i]) * cs.phi0[i].exp());
    }
    Ok(F::accumulate(terms))
}

/// Hamilton's equations for the pairs `(ρ_{i,0}, φ_{i,1})`, `(ρ_{i,1}, φ_{i,0})`.
pub fn canonical_rhs<F: Float + Scalar>(
    cs: &CanonicalState<F>,
    cartan: &CartanMatrix,
) -> Result<CanonicalState<F>> {
    check_canonical_rank(cs, cartan)?;
    let n = cs.rank();
    let c = |i: usize, r: usize| F::from_i64(cartan.entry(i, r));
    let dot = |row: &dyn Fn(usize) -> F, v: &[F]| F::accumulate((0..n).map(|r| row(r) * v[r]));
    let mut d = CanonicalState {
        rho0: vec![F::zero(); n],
        rho1: vec![F::zero(); n],
        phi0: vec![F::zero(); n],
        phi1: vec![F::zero(); n],
    };
    for i in 0..n {
        let e = cs.phi0[i].exp();
        d.phi1[i] = dot(&|r| c(i, r), &cs.rho1);
        d.phi0[i] = dot(&|r| c(r, i), &cs.rho0);
        d.rho0[i] = -e;
        d.rho1[i] = -(F::one() + cs.phi1[i]) * e;
    }
    Ok(d)
}

/// The rank-one system with `p = ρ₁`, `p̄ = ρ₀`, `q = φ₀`, `q̄ = φ₁`:
/// `q̄′ = 2p̄`, `q′ = 2p`, `p′ = −(1 + q̄)e^q`, `p̄′ = −e^q`.
///
/// It differs from [`canonical_rhs`] by exchanging `p` and `p̄` in the
/// position equations and does not conserve the Hamiltonian; along its
/// solutions `q̄` satisfies the quartic identity exactly.
pub fn quartic_system_rhs<F: Float + Scalar>(cs: &CanonicalState<F>) -> Result<CanonicalState<F>> {
    cs.check_shape()?;
    if cs.rank() != 1 {
        return Err(Error::InvalidState("the quartic system has rank one".into()));
    }
    let two = F::from_i64(2);
    let e = cs.phi0[0].exp();
    Ok(CanonicalState {
        rho0: vec![-e],
        rho1: vec![-(F::one() + cs.phi1[0]) * e],
        phi0: vec![two * cs.rho1[0]],
        phi1: vec![two * cs.rho0[0]],
    })
}

/// Time derivatives `(q̄″, q̄‴, q̄⁗)` along [`quartic_system_rhs`].
pub fn quartic_derivatives<F: Float + Scalar>(cs: &CanonicalState<F>) -> Result<[F; 3]> {
    cs.check_shape()?;
    if cs.rank() != 1 {
        return Err(Error::InvalidState("the quartic identity is defined for rank one".into()));
    }
    let (p, q, qbar) = (cs.rho1[0], cs.phi0[0], cs.phi1[0]);
    let e = q.exp();
    let f = F::from_i64;
    Ok([
        f(-2) * e,
        f(-4) * p * e,
        f(-8) * p * p * e + f(4) * (F::one() + qbar) * e * e,
    ])
}

/// `q̄⁗ q̄″ − (q̄‴)² − (1 + q̄)(q̄″)³`.
pub fn quartic_identity_residual<F: Float + Scalar>(cs: &CanonicalState<F>) -> Result<F> {
    let [d2, d3, d4] = quartic_derivatives(cs)?;
    let qbar = cs.phi1[0];
    Ok(d4 * d2 - d3 * d3 - (F::one() + qbar) * d2 * d2 * d2)
}

/// `[y, P_{b̄}(y)]`.
pub fn lax_rhs<S: Scalar>(alg: &Takiff, y: &TakiffElement<S>) -> Result<TakiffElement<S>> {
    let x = y.checked_sub(&alg.default_principal_f())?;
    if !x.in_b() {
        return Err(Error::Support("y − ssf must lie in b_l".into()));
    }
    alg.bracket(y, &alg.project_bbar(y))
}

/// The Lax field in raw coordinates:
/// `ρ′_{i,k} = Σ_{j≤k} γ_{i,j}`, `γ′_{i,k} = −Σ_{j+s=k} Σ_r c_{r,i} γ_{i,j} ρ_{r,s}`.
pub fn lax_state_rhs<S: Scalar>(state: &TodaState<S>, cartan: &CartanMatrix) -> Result<TodaState<S>> {
    check_rank(state, cartan)?;
    let n = state.rank();
    let l = state.level();
    let mut d = TodaState {
        rho: vec![vec![S::zero(); l + 1]; n],
        gamma: vec![vec![S::zero(); l + 1]; n],
    };
    for i in 0..n {
        for k in 0..=l {
            d.rho[i][k] = S::accumulate(state.gamma[i][..=k].iter().cloned());
            let mut terms = Vec::new();
            for j in 0..=k {
                for r in 0..n {
                    let c = cartan.entry(r, i);
                    if c != 0 {
                        terms.push(
                            S::from_i64(-c) * state.gamma[i][j].clone() * state.rho[r][k - j].clone(),
                        );
                    }
                }
            }
            d.gamma[i][k] = S::accumulate(terms);
        }
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Canonical,
    Lax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    /// Integrates the reversed field; point `k` holds the state at time `−t_k`.
    Backward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    /// Keep every `stride`-th grid point (the last point is always kept).
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_true")]
    pub record_invariants: bool,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl Settings {
    pub fn new(t_end: f64, dt: f64, method: Method) -> Self {
        Self {
            t_end,
            dt,
            method,
            direction: Direction::Forward,
            abs_tol: default_tol(),
            rel_tol: default_tol(),
            stride: 1,
            record_invariants: true,
        }
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: TodaState<f64>,
    pub hamiltonian: f64,
    pub invariants: Vec<f64>,
    pub quartic_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub rank: usize,
    pub level: usize,
    pub formulation: Formulation,
    pub method: Method,
    pub dt: f64,
    pub specs: Vec<InvariantSpec>,
    pub points: Vec<TrajectoryPoint>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }

    /// `max_t |H(t) − H(0)| / |H(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let Some(h0) = self.points.first().map(|p| p.hamiltonian) else {
            return 0.0;
        };
        self.points
            .iter()
            .map(|p| (p.hamiltonian - h0).abs() / h0.abs())
            .fold(0.0, f64::max)
    }

    /// Per recorded invariant, `max_t |I(t) − I(0)| / |I(0)|`.
    pub fn invariant_drift(&self) -> Vec<f64> {
        let Some(first) = self.points.first() else {
            return vec![];
        };
        (0..first.invariants.len())
            .map(|k| {
                let i0 = first.invariants[k];
                self.points
                    .iter()
                    .map(|p| (p.invariants[k] - i0).abs() / i0.abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// A Toda lattice for a Cartan matrix and level. Invariants and the element
/// form of the Lax field need the type-A matrix realization.
#[derive(Clone, Debug)]
pub struct TodaSystem {
    cartan: CartanMatrix,
    level: usize,
    algebra: Option<Takiff>,
}

/// Smallest admissible `γ` before integration is abandoned.
pub const POSITIVITY_FLOOR: f64 = 1e-300;

impl TodaSystem {
    pub fn new(cartan: CartanMatrix, level: usize) -> Result<Self> {
        let algebra = if cartan.is_type_a() {
            Some(Takiff::new(cartan.rank(), level)?)
        } else {
            None
        };
        Ok(Self { cartan, level, algebra })
    }

    pub fn type_a(rank: usize, level: usize) -> Result<Self> {
        Self::new(crate::cartan::cartan_matrix("A", rank)?, level)
    }

    pub fn cartan(&self) -> &CartanMatrix {
        &self.cartan
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn algebra(&self) -> Option<&Takiff> {
        self.algebra.as_ref()
    }

    /// The generating invariants recorded along trajectories.
    pub fn specs(&self) -> Vec<InvariantSpec> {
        if self.algebra.is_some() {
            generator_specs(self.rank(), self.level)
        } else {
            vec![]
        }
    }

    pub fn invariants(&self, state: &TodaState<f64>) -> Result<Vec<f64>> {
        let Some(alg) = &self.algebra else {
            return Ok(vec![]);
        };
        let y = state.to_element(alg)?;
        self.specs()
            .into_iter()
            .map(|s| evaluate_invariant(alg, s, &y))
            .collect()
    }

    fn check_state(&self, state: &TodaState<f64>) -> Result<()> {
        state.validate()?;
        if state.rank() != self.rank() || state.level() != self.level {
            return Err(Error::Shape(state.rank(), state.level(), self.rank(), self.level));
        }
        Ok(())
    }

    pub fn integrate(
        &self,
        formulation: Formulation,
        initial: &TodaState<f64>,
        settings: &Settings,
    ) -> Result<Trajectory> {
        self.check_state(initial)?;
        if settings.stride == 0 {
            return Err(Error::Integrator("stride must be at least 1".into()));
        }
        if formulation == Formulation::Canonical && self.level != 1 {
            return Err(Error::InvalidState("canonical formulation requires level 1".into()));
        }
        let n = self.rank();
        let l = self.level;
        let sign = match settings.direction {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        };
        let cartan = &self.cartan;
        let specs = if settings.record_invariants { self.specs() } else { vec![] };
        let mut points = Vec::new();
        let steps_total = (settings.t_end / settings.dt - 1e-9).ceil().max(0.0) as usize;
        let mut index = 0usize;

        let decode = |y: &[f64]| -> TodaState<f64> {
            match formulation {
                Formulation::Lax => TodaState::from_flat(n, l, y),
                Formulation::Canonical => {
                    let cs = CanonicalState::from_flat(n, y);
                    let gamma = (0..n)
                        .map(|i| {
                            let g0 = cs.phi0[i].exp();
                            vec![g0, cs.phi1[i] * g0]
                        })
                        .collect();
                    let rho = (0..n).map(|i| vec![cs.rho0[i], cs.rho1[i]]).collect();
                    TodaState { rho, gamma }
                }
            }
        };

        let mut observe = |t: f64, y: &[f64]| -> Result<()> {
            let state = decode(y);
            for (i, row) in state.gamma.iter().enumerate() {
                for (j, &g) in row.iter().enumerate() {
                    if !(g > POSITIVITY_FLOOR) {
                        return Err(Error::PositivityLoss {
                            time: t,
                            coordinate: format!("gamma[{}][{j}]", i + 1),
                            value: g,
                        });
                    }
                }
            }
            let keep = index.is_multiple_of(settings.stride) || index == steps_total;
            index += 1;
            if !keep {
                return Ok(());
            }
            let (hamiltonian, quartic_residual) = match formulation {
                Formulation::Lax => (hamiltonian(&state, cartan)?, None),
                Formulation::Canonical => {
                    let cs = CanonicalState::from_flat(n, y);
                    let q = (n == 1).then(|| quartic_identity_residual(&cs)).transpose()?;
                    (canonical_hamiltonian(&cs, cartan)?, q)
                }
            };
            let invariants = if specs.is_empty() { vec![] } else { self.invariants(&state)? };
            points.push(TrajectoryPoint { t, state, hamiltonian, invariants, quartic_residual });
            Ok(())
        };

        let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
            let mut d = match formulation {
                Formulation::Lax => lax_state_rhs(&TodaState::from_flat(n, l, y), cartan)?.flatten(),
                Formulation::Canonical => {
                    canonical_rhs(&CanonicalState::from_flat(n, y), cartan)?.flatten()
                }
            };
            if sign < 0.0 {
                d.iter_mut().for_each(|v| *v = -*v);
            }
            Ok(d)
        };

        let y0 = match formulation {
            Formulation::Lax => initial.flatten(),
            Formulation::Canonical => CanonicalState::from_raw(initial)?.flatten(),
        };
        let stats = match settings.method {
            Method::Rk4 => ode::solve_rk4(rhs, &y0, settings.t_end, settings.dt, &mut observe)?,
            Method::Rk45 => ode::solve_rk45(
                rhs,
                &y0,
                settings.t_end,
                settings.dt,
                Tolerances { abs: settings.abs_tol, rel: settings.rel_tol },
                &mut observe,
            )?,
        };
        Ok(Trajectory {
            rank: n,
            level: l,
            formulation,
            method: settings.method,
            dt: settings.dt,
            specs,
            points,
            accepted_steps: stats.accepted,
            rejected_steps: stats.rejected,
        })
    }

    /// Integrates many initial states in parallel.
    pub fn integrate_batch(
        &self,
        formulation: Formulation,
        initials: &[TodaState<f64>],
        settings: &Settings,
    ) -> Vec<Result<Trajectory>> {
        initials
            .par_iter()
            .map(|s| self.integrate(formulation, s, settings))
            .collect()
    }
}
