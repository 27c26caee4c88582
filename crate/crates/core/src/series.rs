//! Power series for `Ψ‴ = C₀Ψ″ + Ψ² + Ψ` and the solvability test for the
//! rank-one lattice.

use serde::Serialize;

use crate::scalar::Scalar;
use crate::toda::CanonicalState;

pub const DEFAULT_ORDER: usize = 202;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesSolution<S> {
    pub c0: S,
    /// `a_0, …, a_N`.
    pub coefficients: Vec<S>,
    /// `a_0, a_1, a_2, C_0 ∈ (−1, 1)`.
    pub hypothesis_ok: bool,
    /// `(k, 2/k² − |a_{k+2}|)` for `k = 1, …, N − 2`.
    pub margins: Vec<(usize, f64)>,
}

impl<S: Scalar> SeriesSolution<S> {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `a_{n+3}` recomputed from the stored lower coefficients, minus the
    /// stored value.
    pub fn recurrence_residual(&self, n: usize) -> S {
        let a = &self.coefficients;
        next_coefficient(a, &self.c0, n) - a[n + 3].clone()
    }
}

fn next_coefficient<S: Scalar>(a: &[S], c0: &S, n: usize) -> S {
    let f = |v: usize| S::from_i64(v as i64);
    let conv = S::accumulate((0..=n).map(|i| a[i].clone() * a[n - i].clone()));
    let num = f((n + 1) * (n + 2)) * c0.clone() * a[n + 2].clone() + a[n].clone() + conv;
    num / f((n + 1) * (n + 2) * (n + 3))
}

fn in_open_unit<S: Scalar>(x: &S) -> bool {
    x.abs() < S::one()
}

/// Coefficients up to `a_order` from `Ψ(0) = a₀`, `Ψ′(0) = a₁`, `Ψ″(0) = 2a₂`.
pub fn series_coefficients<S: Scalar>(a0: S, a1: S, a2: S, c0: S, order: usize) -> SeriesSolution<S> {
    let order = order.max(3);
    let hypothesis_ok = [&a0, &a1, &a2, &c0].into_iter().all(in_open_unit);
    let mut a = vec![a0, a1, a2];
    for n in 0..=order - 3 {
        let next = next_coefficient(&a, &c0, n);
        a.push(next);
    }
    let margins = (1..=order - 2)
        .map(|k| (k, 2.0 / (k * k) as f64 - a[k + 2].to_f64().abs()))
        .collect();
    SeriesSolution { c0, coefficients: a, hypothesis_ok, margins }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowOrderBound {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub applicable: bool,
    /// `|a₃| < 1`, `|a₄| < 10/24`, `|a₅| < 1/6`.
    pub low_order: Vec<LowOrderBound>,
    /// First `k` with `|a_{k+2}| ≥ 2/k²`.
    pub first_violation: Option<usize>,
    pub min_margin: f64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.applicable && self.first_violation.is_none() && self.low_order.iter().all(|b| b.holds)
    }
}

pub fn bound_check<S: Scalar>(sol: &SeriesSolution<S>) -> BoundReport {
    let a = |k: usize| sol.coefficients.get(k).map_or(0.0, |v| v.to_f64().abs());
    let low_order = [("a3", 3, 1.0), ("a4", 4, 10.0 / 24.0), ("a5", 5, 1.0 / 6.0)]
        .into_iter()
        .map(|(name, k, bound)| LowOrderBound { name, value: a(k), bound, holds: a(k) < bound })
        .collect();
    let first_violation = sol.margins.iter().find(|(_, m)| *m <= 0.0).map(|&(k, _)| k);
    let min_margin = sol.margins.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    BoundReport { applicable: sol.hypothesis_ok, low_order, first_violation, min_margin }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesValue<S> {
    pub value: S,
    /// Majorant of the omitted tail; `None` when `|t| > 1` or the
    /// hypothesis fails.
    pub tail_bound: Option<f64>,
}

/// Horner evaluation of the truncated series plus the tail majorant
/// `Σ_{k>K} 2/k² |t|^{k+2}` with `K = N − 2`.
pub fn series_eval<S: Scalar>(sol: &SeriesSolution<S>, t: &S) -> SeriesValue<S> {
    let value = sol
        .coefficients
        .iter()
        .rev()
        .fold(S::zero(), |acc, a| acc * t.clone() + a.clone());
    let x = t.to_f64().abs();
    let tail_bound = (sol.hypothesis_ok && x <= 1.0).then(|| {
        if x == 0.0 {
            return 0.0;
        }
        let k = (sol.order() - 2) as f64;
        let geometric = if x < 1.0 {
            2.0 / ((k + 1.0) * (k + 1.0)) * x.powf(k + 3.0) / (1.0 - x)
        } else {
            f64::INFINITY
        };
        geometric.min(2.0 / k)
    });
    SeriesValue { value, tail_bound }
}

/// `(Ψ′, Ψ″, C₀Ψ″ + Ψ² + Ψ)`.
pub fn ode_rhs<S: Scalar>(state: &[S; 3], c0: &S) -> [S; 3] {
    let [psi, d1, d2] = state.clone();
    let d3 = c0.clone() * d2.clone() + psi.clone() * psi.clone() + psi;
    [d1, d2, d3]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub value: Option<f64>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalVerdict {
    pub conditions: Vec<Condition>,
    pub holds: bool,
    pub diagnostic: Option<String>,
}

/// `c₀, c₁, c₂/2, 2(c₃ − c₁² − c₁)/c₂ ∈ (0, 1)`.
pub fn global_condition<S: Scalar>(c0: &S, c1: &S, c2: &S, c3: &S) -> GlobalVerdict {
    let unit = |v: &S| v.is_positive() && *v < S::one();
    let two = S::from_i64(2);
    let mut conditions = vec![
        Condition { name: "c0", value: Some(c0.to_f64()), holds: unit(c0) },
        Condition { name: "c1", value: Some(c1.to_f64()), holds: unit(c1) },
    ];
    let half = c2.clone() / two.clone();
    conditions.push(Condition { name: "c2/2", value: Some(half.to_f64()), holds: unit(&half) });
    let mut diagnostic = None;
    if c2.is_zero() {
        diagnostic = Some("c2 = 0: 2(c3 - c1^2 - c1)/c2 is undefined".to_string());
        conditions.push(Condition { name: "2(c3-c1^2-c1)/c2", value: None, holds: false });
    } else {
        let q = two * (c3.clone() - c1.clone() * c1.clone() - c1.clone()) / c2.clone();
        conditions.push(Condition { name: "2(c3-c1^2-c1)/c2", value: Some(q.to_f64()), holds: unit(&q) });
    }
    let holds = conditions.iter().all(|c| c.holds);
    GlobalVerdict { conditions, holds, diagnostic }
}

/// Initial data for the rank-one lattice with `q̄(0) = c₀`, `q̄′(0) = c₁`,
/// `|q̄″(0)| = c₂`, `|q̄‴(0)| = c₃`: `q̄ = c₀`, `p̄ = c₁/2`, `e^q = c₂/2`,
/// `p = c₃/(2c₂)` with `p = ρ₁`, `p̄ = ρ₀`, `q = φ₀`, `q̄ = φ₁`.
///
/// Along the lattice `q̄″ = −2e^q` is negative, so the signs of `c₂`, `c₃`
/// are matched in magnitude only. Returns `None` for `c₂ ≤ 0`.
pub fn toda_initial_state(c0: f64, c1: f64, c2: f64, c3: f64) -> Option<CanonicalState<f64>> {
    (c2 > 0.0).then(|| CanonicalState {
        rho0: vec![c1 / 2.0],
        rho1: vec![c3 / (2.0 * c2)],
        phi0: vec![(c2 / 2.0).ln()],
        phi1: vec![c0],
    })
}
