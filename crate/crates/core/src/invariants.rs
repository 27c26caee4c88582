//! Invariant functions on `g_l` from trace powers of the matrix polynomial
//! `M(t) = Σ_j y_j t^j`.
//!
//! [`InvariantSpec`] `(k, j)` names the coefficient of `t^j` in
//! `tr(M(t)^k)`, `2 ≤ k ≤ n + 1`, `0 ≤ j ≤ k·l`. The coefficients with
//! `j ≤ l` are invariant under the adjoint group of `g_l` and generate the
//! invariant algebra; the higher ones see products that the truncation
//! `t^{l+1} = 0` discards, so they are exposed for inspection only.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{Takiff, TakiffElement};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InvariantSpec {
    /// Trace power `k = m_i + 1`.
    pub power: usize,
    /// Coefficient index `j`.
    pub index: usize,
}

impl InvariantSpec {
    pub fn new(power: usize, index: usize, rank: usize, level: usize) -> Result<Self> {
        let spec = Self { power, index };
        spec.validate(rank, level)?;
        Ok(spec)
    }

    pub fn validate(&self, rank: usize, level: usize) -> Result<()> {
        let err = |reason: String| Error::SpecOutOfRange {
            power: self.power,
            index: self.index,
            reason,
        };
        if self.power < 2 || self.power > rank + 1 {
            return Err(err(format!("power must lie in 2..={}", rank + 1)));
        }
        if self.index > self.power * level {
            return Err(err(format!("index must lie in 0..={}", self.power * level)));
        }
        Ok(())
    }

    /// `true` for the generating invariants (`index ≤ l`).
    pub fn is_generator(&self, level: usize) -> bool {
        self.index <= level
    }
}

impl fmt::Display for InvariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I[{},{}]", self.power, self.index)
    }
}

/// Every z-coefficient of every trace power.
pub fn all_specs(rank: usize, level: usize) -> Vec<InvariantSpec> {
    (2..=rank + 1)
        .flat_map(|k| (0..=k * level).map(move |j| InvariantSpec { power: k, index: j }))
        .collect()
}

/// The `n(l+1)` generating invariants.
pub fn generator_specs(rank: usize, level: usize) -> Vec<InvariantSpec> {
    (2..=rank + 1)
        .flat_map(|k| (0..=level).map(move |j| InvariantSpec { power: k, index: j }))
        .collect()
}

/// Matrix polynomial in `t`, coefficients lowest degree first.
type MatPoly<S> = Vec<Matrix<S>>;

fn poly_mul<S: Scalar>(a: &MatPoly<S>, b: &MatPoly<S>) -> MatPoly<S> {
    let size = a[0].rows();
    let mut out: MatPoly<S> = vec![Matrix::zeros(size, size); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            out[i + j] = &out[i + j] + &(ai * bj);
        }
    }
    out
}

fn poly_pow<S: Scalar>(m: &MatPoly<S>, k: usize) -> MatPoly<S> {
    let size = m[0].rows();
    let mut acc: MatPoly<S> = vec![Matrix::identity(size)];
    for _ in 0..k {
        acc = poly_mul(&acc, m);
    }
    acc
}

/// Coefficient of `t^index` of `tr(P(t)·M(t))` without forming the product.
fn trace_coefficient<S: Scalar>(p: &MatPoly<S>, m: &MatPoly<S>, index: usize) -> S {
    let mut terms = Vec::new();
    for (a, pa) in p.iter().enumerate() {
        if a > index {
            break;
        }
        let Some(mb) = m.get(index - a) else { continue };
        let n = pa.rows();
        for r in 0..n {
            for c in 0..n {
                if !pa[(r, c)].is_zero() && !mb[(c, r)].is_zero() {
                    terms.push(pa[(r, c)].clone() * mb[(c, r)].clone());
                }
            }
        }
    }
    S::accumulate(terms)
}

/// `I_spec(y)`: the coefficient of `t^j` in `tr(M(t)^k)`.
pub fn evaluate_invariant<S: Scalar>(
    alg: &Takiff,
    spec: InvariantSpec,
    y: &TakiffElement<S>,
) -> Result<S> {
    spec.validate(alg.rank(), alg.level())?;
    let m = alg.to_matrices(y);
    let p = poly_pow(&m, spec.power - 1);
    Ok(trace_coefficient(&p, &m, spec.index))
}

pub fn evaluate_all<S: Scalar>(
    alg: &Takiff,
    specs: &[InvariantSpec],
    y: &TakiffElement<S>,
) -> Result<Vec<S>> {
    specs.iter().map(|&s| evaluate_invariant(alg, s, y)).collect()
}

/// The element `g` with `Q(g, w) = d/dε I(y + εw)` for every `w`.
///
/// From `d tr(M^k) = k tr(M^{k-1} W)` and `Q(g, w) = Σ_s tr(g_{l-s} w_s)`,
/// the level-`m` component is the traceless part of `k [M^{k-1}]_{j-l+m}`.
pub fn gradient_invariant<S: Scalar>(
    alg: &Takiff,
    spec: InvariantSpec,
    y: &TakiffElement<S>,
) -> Result<TakiffElement<S>> {
    spec.validate(alg.rank(), alg.level())?;
    let l = alg.level();
    let m = alg.to_matrices(y);
    let p = poly_pow(&m, spec.power - 1);
    let size = alg.rank() + 1;
    let k = S::from_i64(spec.power as i64);
    let mats: Vec<Matrix<S>> = (0..=l)
        .map(|lvl| {
            let idx = spec.index as i64 - l as i64 + lvl as i64;
            if idx < 0 {
                return Matrix::zeros(size, size);
            }
            p.get(idx as usize)
                .map(|c| c.scale(&k))
                .unwrap_or_else(|| Matrix::zeros(size, size))
        })
        .collect();
    Ok(alg.from_matrices(&mats))
}

/// A function on `g_l` whose Poisson bracket can be taken.
#[derive(Clone, Debug)]
pub enum Observable<S> {
    Invariant(InvariantSpec),
    /// The linear function `Q_x = Q(x, ·)`.
    Linear(TakiffElement<S>),
}

impl<S: Scalar> Observable<S> {
    pub fn gradient(&self, alg: &Takiff, at: &TakiffElement<S>) -> Result<TakiffElement<S>> {
        match self {
            Observable::Invariant(spec) => gradient_invariant(alg, *spec, at),
            Observable::Linear(x) => Ok(x.clone()),
        }
    }
}

/// Lie–Poisson bracket of `S(g_l)` at `z`: `Q(z, [δu(z), δv(z)])`.
pub fn poisson_bracket_at<S: Scalar>(
    alg: &Takiff,
    u: &Observable<S>,
    v: &Observable<S>,
    z: &TakiffElement<S>,
) -> Result<S> {
    let du = u.gradient(alg, z)?;
    let dv = v.gradient(alg, z)?;
    alg.q_form(z, &alg.bracket(&du, &dv)?)
}

/// Lie–Poisson bracket of the opposite Borel `b̄_l`, realized on
/// `ssf + b_l`: `Q(y, [P δu(y), P δv(y)])` with `P` the projection onto `b̄_l`.
pub fn poisson_bracket_bbar_at<S: Scalar>(
    alg: &Takiff,
    u: &Observable<S>,
    v: &Observable<S>,
    y: &TakiffElement<S>,
) -> Result<S> {
    let du = alg.project_bbar(&u.gradient(alg, y)?);
    let dv = alg.project_bbar(&v.gradient(alg, y)?);
    alg.q_form(y, &alg.bracket(&du, &dv)?)
}

/// `I^ssf(x) = I(ssf + x)` for `x ∈ b_l`.
pub fn restricted_invariant<S: Scalar>(
    alg: &Takiff,
    spec: InvariantSpec,
    ssf: &TakiffElement<S>,
    x: &TakiffElement<S>,
) -> Result<S> {
    if !x.in_b() {
        return Err(Error::Support(
            "restricted invariants are functions on b_l; argument has negative root components"
                .into(),
        ));
    }
    evaluate_invariant(alg, spec, &ssf.checked_add(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BasisLabel;
    use crate::scalar::{rational, Rational};

    #[test]
    fn spec_ranges() {
        assert!(InvariantSpec::new(2, 2, 1, 1).is_ok());
        assert!(InvariantSpec::new(2, 3, 1, 1).is_err());
        assert!(InvariantSpec::new(3, 0, 1, 1).is_err());
        assert!(InvariantSpec::new(1, 0, 1, 1).is_err());
        assert_eq!(generator_specs(2, 2).len(), 6);
        assert_eq!(all_specs(2, 1).len(), 3 + 4);
    }

    #[test]
    fn sl2_level_one_values() {
        // y = h(0): M(t) = H, tr(M^2) = 2 for every t-power 0 term.
        let alg = Takiff::new(1, 1).unwrap();
        let y = alg.basis_element::<Rational>(BasisLabel::H(0), 0);
        let i0 = evaluate_invariant(&alg, InvariantSpec { power: 2, index: 0 }, &y).unwrap();
        let i1 = evaluate_invariant(&alg, InvariantSpec { power: 2, index: 1 }, &y).unwrap();
        assert_eq!(i0, rational(2, 1));
        assert_eq!(i1, rational(0, 1));

        // e(0) + f(0) is semisimple with eigenvalues ±1: tr(M_0^2) = 2.
        let ef = &alg.basis_element::<Rational>(BasisLabel::E(0), 0)
            + &alg.basis_element(BasisLabel::F(0), 0);
        let v = evaluate_invariant(&alg, InvariantSpec { power: 2, index: 0 }, &ef).unwrap();
        assert_eq!(v, rational(2, 1));
        let top = evaluate_invariant(&alg, InvariantSpec { power: 2, index: 1 }, &ef).unwrap();
        assert_eq!(top, rational(0, 1));
    }

    #[test]
    fn half_q_has_gradient_y() {
        let alg = Takiff::new(2, 2).unwrap();
        let mut y = alg.zero::<Rational>();
        y.set(BasisLabel::E(2), 0, rational(3, 2));
        y.set(BasisLabel::H(0), 1, rational(-1, 3));
        y.set(BasisLabel::F(1), 2, rational(2, 1));
        let spec = InvariantSpec { power: 2, index: 2 };
        let g = gradient_invariant(&alg, spec, &y).unwrap();
        assert_eq!(g.scale(&rational(1, 2)), y);
        let q = alg.q_form(&y, &y).unwrap();
        assert_eq!(evaluate_invariant(&alg, spec, &y).unwrap(), q);
    }

    #[test]
    fn linear_bracket_example() {
        let alg = Takiff::new(1, 1).unwrap();
        let u = Observable::Linear(alg.basis_element::<Rational>(BasisLabel::E(0), 0));
        let v = Observable::Linear(alg.basis_element(BasisLabel::F(0), 0));
        let z = alg.basis_element(BasisLabel::H(0), 1);
        assert_eq!(poisson_bracket_at(&alg, &u, &v, &z).unwrap(), rational(2, 1));
        assert_eq!(poisson_bracket_at(&alg, &u, &u, &z).unwrap(), rational(0, 1));
    }

    #[test]
    fn restricted_invariant_rejects_negative_support() {
        let alg = Takiff::new(1, 1).unwrap();
        let ssf = alg.default_principal_f::<Rational>();
        let spec = InvariantSpec { power: 2, index: 1 };
        let at_zero = restricted_invariant(&alg, spec, &ssf, &alg.zero()).unwrap();
        assert_eq!(at_zero, evaluate_invariant(&alg, spec, &ssf).unwrap());
        let bad = alg.basis_element(BasisLabel::F(0), 0);
        assert!(restricted_invariant(&alg, spec, &ssf, &bad).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        use crate::sampling::{self, Support};
        let mut rng = sampling::rng(3);
        for (n, l) in [(1, 1), (2, 1), (2, 2)] {
            let alg = Takiff::new(n, l).unwrap();
            for spec in all_specs(n, l) {
                let y = sampling::random_float(&mut rng, &alg, Support::All, 1.0);
                let w = sampling::random_float(&mut rng, &alg, Support::All, 1.0);
                let g = gradient_invariant(&alg, spec, &y).unwrap();
                let exact = alg.q_form(&g, &w).unwrap();
                let eps = 1e-5;
                let plus = evaluate_invariant(&alg, spec, &(&y + &w.scale(&eps))).unwrap();
                let minus = evaluate_invariant(&alg, spec, &(&y - &w.scale(&eps))).unwrap();
                let fd = (plus - minus) / (2.0 * eps);
                assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{spec}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn generators_are_conjugation_invariant_higher_coefficients_are_not() {
        use crate::algebra::NilpotentGroupElement;
        use crate::sampling::{self, Support};
        let mut rng = sampling::rng(4);
        let alg = Takiff::new(2, 1).unwrap();
        let mut moved = std::collections::BTreeSet::new();
        for _ in 0..10 {
            let y = sampling::random_exact(&mut rng, &alg, Support::All);
            let a = NilpotentGroupElement::new(sampling::random_exact(&mut rng, &alg, Support::Nilradical)).unwrap();
            let b = NilpotentGroupElement::new(alg.star(&sampling::random_exact(&mut rng, &alg, Support::Nilradical))
                .filter(|c| c.label.is_negative()));
            assert!(b.is_err());
            let ay = alg.group_apply(&a, &y).unwrap();
            for spec in all_specs(2, 1) {
                let before = evaluate_invariant(&alg, spec, &y).unwrap();
                let after = evaluate_invariant(&alg, spec, &ay).unwrap();
                if spec.is_generator(1) {
                    assert_eq!(before, after, "{spec}");
                } else if before != after {
                    moved.insert(spec);
                }
            }
        }
        assert!(!moved.is_empty());
    }

    #[test]
    fn invariant_under_opposite_nilpotent_conjugation() {
        use crate::sampling::{self, Support};
        let mut rng = sampling::rng(5);
        let alg = Takiff::new(2, 2).unwrap();
        for _ in 0..5 {
            let y = sampling::random_exact(&mut rng, &alg, Support::All);
            let z = sampling::random_exact(&mut rng, &alg, Support::Nilradical);
            let zbar = alg.star(&z);
            // exp(ad z̄) computed directly; z̄ lies in the opposite nilradical.
            let mut term = y.clone();
            let mut out = y.clone();
            for k in 1..=12 {
                term = alg.bracket(&zbar, &term).unwrap().scale(&rational(1, k));
                if term.is_zero() {
                    break;
                }
                out = &out + &term;
            }
            assert!(term.is_zero());
            for spec in generator_specs(2, 2) {
                assert_eq!(evaluate_invariant(&alg, spec, &y).unwrap(), evaluate_invariant(&alg, spec, &out).unwrap());
            }
        }
    }

    #[test]
    fn restricted_invariants_separate_section_points() {
        use crate::kostant::KostantSection;
        use crate::sampling;
        let mut rng = sampling::rng(6);
        for (n, l) in [(1, 1), (2, 1), (2, 2)] {
            let alg = Takiff::new(n, l).unwrap();
            let ks = KostantSection::<Rational>::with_default_ssf(&alg).unwrap();
            let specs = generator_specs(n, l);
            let mut seen: Vec<(Vec<Rational>, Vec<Rational>)> = Vec::new();
            for _ in 0..50 {
                let c: Vec<Rational> = (0..ks.dim()).map(|_| sampling::random_rational(&mut rng, 3, 2)).collect();
                let s = ks.section_point(&c).unwrap();
                let v: Vec<Rational> = specs
                    .iter()
                    .map(|&sp| restricted_invariant(&alg, sp, ks.ssf(), &s).unwrap())
                    .collect();
                for (c2, v2) in &seen {
                    assert!(c2 == &c || v2 != &v);
                }
                seen.push((c, v));
            }
        }
    }

    #[test]
    fn restricted_invariants_are_unipotent_invariant() {
        use crate::algebra::NilpotentGroupElement;
        use crate::sampling::{self, Support};
        let mut rng = sampling::rng(8);
        let alg = Takiff::new(2, 1).unwrap();
        let ssf = alg.default_principal_f::<Rational>();
        for _ in 0..10 {
            let x = sampling::random_exact(&mut rng, &alg, Support::Borel);
            let a = NilpotentGroupElement::new(sampling::random_exact(&mut rng, &alg, Support::Nilradical)).unwrap();
            let moved = &alg.group_apply(&a, &(&ssf + &x)).unwrap() - &ssf;
            for spec in generator_specs(2, 1) {
                assert_eq!(
                    restricted_invariant(&alg, spec, &ssf, &x).unwrap(),
                    restricted_invariant(&alg, spec, &ssf, &moved).unwrap()
                );
            }
        }
    }

    #[test]
    fn opposite_borel_brackets_vanish_on_the_slice() {
        use crate::sampling::{self, Support};
        let mut rng = sampling::rng(9);
        for (n, l) in [(1, 1), (2, 1), (2, 2)] {
            let alg = Takiff::new(n, l).unwrap();
            let ssf = alg.default_principal_f::<Rational>();
            let specs = generator_specs(n, l);
            for _ in 0..5 {
                let y = &ssf + &sampling::random_exact(&mut rng, &alg, Support::Borel);
                for &u in &specs {
                    for &v in &specs {
                        let b = poisson_bracket_bbar_at(&alg, &Observable::Invariant(u), &Observable::Invariant(v), &y).unwrap();
                        assert_eq!(b, rational(0, 1), "{u} {v}");
                    }
                }
            }
        }
    }
}
