//! The Lie algebra `sl_{n+1}` in a Chevalley basis and its Takiff
//! extension `g_l = g ⊗ C[t]/(t^{l+1})`.
//!
//! The basis is realized by matrices: `e_β = E_{a,b+1}` for the positive
//! root `β = α_a + … + α_b`, `f_β` its transpose and `h_i = E_{ii} − E_{i+1,i+1}`.
//! The invariant form is the trace form, which gives `κ(e_β, f_β) = 1` and
//! `κ(h_i, h_i) = 2`. All structure constants and κ values are integers.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::Zero;

use crate::cartan::{cartan_matrix, positive_roots, CartanMatrix, RootSystem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisLabel {
    /// Root vector of the `k`-th positive root.
    E(usize),
    /// Coroot `h_i` (0-based).
    H(usize),
    /// Root vector of the negative of the `k`-th positive root.
    F(usize),
}

impl BasisLabel {
    pub fn is_positive(&self) -> bool {
        matches!(self, BasisLabel::E(_))
    }

    pub fn is_cartan(&self) -> bool {
        matches!(self, BasisLabel::H(_))
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, BasisLabel::F(_))
    }

    /// The label of the transpose basis vector (`e_β ↔ f_β`, `h_i ↦ h_i`).
    pub fn transposed(&self) -> BasisLabel {
        match *self {
            BasisLabel::E(k) => BasisLabel::F(k),
            BasisLabel::F(k) => BasisLabel::E(k),
            h => h,
        }
    }
}

/// A basis vector of `g_l`: `label ⊗ t^level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Component {
    pub label: BasisLabel,
    pub level: usize,
}

impl Component {
    pub fn new(label: BasisLabel, level: usize) -> Self {
        Self { label, level }
    }
}

/// Chevalley-basis data for `sl_{n+1}`.
#[derive(Debug)]
pub struct LieAlgebraData {
    cartan: CartanMatrix,
    roots: RootSystem,
    labels: Vec<BasisLabel>,
    matrices: Vec<Matrix<Rational>>,
    /// `[X_a, X_b] = Σ c X_c` stored as `(c, coefficient)`.
    structure: Vec<Vec<Vec<(usize, i64)>>>,
    /// Nonzero κ partners of each basis vector.
    kappa: Vec<Vec<(usize, i64)>>,
    degrees: Vec<i64>,
    /// Matrix position of `e_β` for each positive root.
    root_positions: Vec<(usize, usize)>,
}

/// Builds the Chevalley basis of `sl_{n+1}`.
pub fn chevalley_basis_sl(n: usize) -> Result<LieAlgebraData> {
    if n == 0 {
        return Err(Error::InvalidRank { series: 'A', rank: 0 });
    }
    let cartan = cartan_matrix("A", n)?;
    let roots = positive_roots(&cartan)?;
    let size = n + 1;
    let root_positions: Vec<(usize, usize)> = roots
        .positive_roots()
        .iter()
        .map(|r| {
            let a = r.iter().position(|&c| c != 0).expect("nonzero root");
            let b = r.iter().rposition(|&c| c != 0).expect("nonzero root");
            (a, b + 1)
        })
        .collect();

    let j = roots.count();
    let mut labels = Vec::with_capacity(2 * j + n);
    labels.extend((0..j).map(BasisLabel::E));
    labels.extend((0..n).map(BasisLabel::H));
    labels.extend((0..j).map(BasisLabel::F));

    let matrices: Vec<Matrix<Rational>> = labels
        .iter()
        .map(|label| match *label {
            BasisLabel::E(k) => {
                let (a, b) = root_positions[k];
                Matrix::unit(size, a, b)
            }
            BasisLabel::F(k) => {
                let (a, b) = root_positions[k];
                Matrix::unit(size, b, a)
            }
            BasisLabel::H(i) => {
                &Matrix::unit(size, i, i) - &Matrix::unit(size, i + 1, i + 1)
            }
        })
        .collect();

    let degrees = labels
        .iter()
        .map(|label| match *label {
            BasisLabel::E(k) => roots.height(k),
            BasisLabel::F(k) => -roots.height(k),
            BasisLabel::H(_) => 0,
        })
        .collect();

    let mut data = LieAlgebraData {
        cartan,
        roots,
        labels,
        matrices,
        structure: Vec::new(),
        kappa: Vec::new(),
        degrees,
        root_positions,
    };

    let dim = data.dim();
    let integral = |r: &Rational| -> i64 {
        assert!(r.is_integer(), "non-integral Chevalley constant {r}");
        num_traits::ToPrimitive::to_i64(&r.to_integer()).expect("small constant")
    };
    let mut structure = vec![vec![Vec::new(); dim]; dim];
    let mut kappa = vec![Vec::new(); dim];
    for a in 0..dim {
        for b in 0..dim {
            let comm = data.matrices[a].commutator(&data.matrices[b]);
            structure[a][b] = data
                .decompose(&comm)
                .into_iter()
                .map(|(c, v)| (c, integral(&v)))
                .collect();
            let k = (&data.matrices[a] * &data.matrices[b]).trace();
            if !k.is_zero() {
                kappa[a].push((b, integral(&k)));
            }
        }
    }
    data.structure = structure;
    data.kappa = kappa;
    Ok(data)
}

impl LieAlgebraData {
    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn cartan(&self) -> &CartanMatrix {
        &self.cartan
    }

    pub fn roots(&self) -> &RootSystem {
        &self.roots
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn index(&self, label: BasisLabel) -> usize {
        let j = self.roots.count();
        match label {
            BasisLabel::E(k) => k,
            BasisLabel::H(i) => j + i,
            BasisLabel::F(k) => j + self.rank() + k,
        }
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        self.labels[index]
    }

    pub fn contains(&self, label: BasisLabel) -> bool {
        match label {
            BasisLabel::E(k) | BasisLabel::F(k) => k < self.roots.count(),
            BasisLabel::H(i) => i < self.rank(),
        }
    }

    pub fn matrix(&self, label: BasisLabel) -> &Matrix<Rational> {
        &self.matrices[self.index(label)]
    }

    /// ad-x₀ eigenvalue of a basis vector (root height, signed).
    pub fn degree(&self, label: BasisLabel) -> i64 {
        self.degrees[self.index(label)]
    }

    /// `[X_a, X_b]` in the basis, as exact rationals.
    pub fn structure_constants(&self, a: BasisLabel, b: BasisLabel) -> Vec<(BasisLabel, Rational)> {
        self.structure[self.index(a)][self.index(b)]
            .iter()
            .map(|&(c, v)| (self.labels[c], Rational::from_integer(v.into())))
            .collect()
    }

    pub fn kappa(&self, a: BasisLabel, b: BasisLabel) -> Rational {
        let ib = self.index(b);
        let v = self.kappa[self.index(a)]
            .iter()
            .find(|&&(c, _)| c == ib)
            .map_or(0, |&(_, v)| v);
        Rational::from_integer(v.into())
    }

    pub(crate) fn structure_row(&self, a: usize, b: usize) -> &[(usize, i64)] {
        &self.structure[a][b]
    }

    pub(crate) fn kappa_row(&self, a: usize) -> &[(usize, i64)] {
        &self.kappa[a]
    }

    pub fn root_for_position(&self, row: usize, col: usize) -> Option<usize> {
        self.root_positions.iter().position(|&p| p == (row, col))
    }

    pub fn root_position(&self, k: usize) -> (usize, usize) {
        self.root_positions[k]
    }

    /// Coordinates of a matrix in the basis after removing its trace part.
    pub fn decompose<S: Scalar>(&self, m: &Matrix<S>) -> Vec<(usize, S)> {
        let size = self.rank() + 1;
        let mut out = Vec::new();
        for (k, &(a, b)) in self.root_positions.iter().enumerate() {
            if !m[(a, b)].is_zero() {
                out.push((self.index(BasisLabel::E(k)), m[(a, b)].clone()));
            }
        }
        let shift = m.trace() / S::from_i64(size as i64);
        let mut running = S::zero();
        for i in 0..self.rank() {
            running = running + m[(i, i)].clone() - shift.clone();
            if !running.is_zero() {
                out.push((self.index(BasisLabel::H(i)), running.clone()));
            }
        }
        for (k, &(a, b)) in self.root_positions.iter().enumerate() {
            if !m[(b, a)].is_zero() {
                out.push((self.index(BasisLabel::F(k)), m[(b, a)].clone()));
            }
        }
        out
    }

    /// Coefficients of the fundamental coweight `ω_i` over `h_1..h_n`,
    /// fixed by `κ(h_k, ω_i) = δ_{ki}`.
    pub fn fundamental_coweight(&self, i: usize) -> Vec<Rational> {
        let n = self.rank();
        let gram: Matrix<Rational> = Matrix::from_rows(
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| self.kappa(BasisLabel::H(a), BasisLabel::H(b)))
                        .collect()
                })
                .collect(),
        );
        let mut rhs = vec![Rational::zero(); n];
        rhs[i] = Rational::from_integer(1.into());
        gram.solve(&rhs).expect("Cartan Gram matrix is nonsingular")
    }

    /// Label text: `e1`, `e1-2` (the root α₁+α₂), `f2`, `h1`. 1-based.
    pub fn label_name(&self, label: BasisLabel) -> String {
        let interval = |k: usize| {
            let (a, b) = self.root_positions[k];
            if b == a + 1 {
                format!("{}", a + 1)
            } else {
                format!("{}-{}", a + 1, b)
            }
        };
        match label {
            BasisLabel::E(k) => format!("e{}", interval(k)),
            BasisLabel::F(k) => format!("f{}", interval(k)),
            BasisLabel::H(i) => format!("h{}", i + 1),
        }
    }

    pub fn parse_label(&self, text: &str) -> Result<BasisLabel> {
        let bad = || Error::UnknownLabel(text.to_string());
        let t = text.trim();
        let (kind, rest) = t.split_at(t.chars().next().ok_or_else(bad)?.len_utf8());
        let nums: Vec<usize> = rest
            .split('-')
            .map(|s| s.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let label = match (kind, nums.as_slice()) {
            ("h", &[i]) if i >= 1 => BasisLabel::H(i - 1),
            ("e" | "f", &[a]) | ("e" | "f", &[a, _]) if a >= 1 => {
                let b = *nums.last().expect("non-empty");
                if b < a {
                    return Err(bad());
                }
                let k = self.root_for_position(a - 1, b).ok_or_else(bad)?;
                if kind == "e" {
                    BasisLabel::E(k)
                } else {
                    BasisLabel::F(k)
                }
            }
            _ => return Err(bad()),
        };
        if self.contains(label) {
            Ok(label)
        } else {
            Err(bad())
        }
    }
}

/// An element of `g_l` as a sparse map `(label, level) → coefficient`.
///
/// Entries that are exactly zero are never stored, so structural equality
/// is value equality.
#[derive(Clone, Debug, PartialEq)]
pub struct TakiffElement<S> {
    rank: usize,
    level: usize,
    coeffs: BTreeMap<Component, S>,
}

impl<S: Scalar> TakiffElement<S> {
    pub fn zero(rank: usize, level: usize) -> Self {
        Self {
            rank,
            level,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(rank: usize, level: usize, label: BasisLabel, j: usize) -> Self {
        let mut x = Self::zero(rank, level);
        x.set(label, j, S::one());
        x
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn get(&self, label: BasisLabel, j: usize) -> S {
        self.coeffs
            .get(&Component::new(label, j))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    /// Sets a coefficient. Panics if `j` exceeds the truncation level.
    pub fn set(&mut self, label: BasisLabel, j: usize, value: S) {
        assert!(j <= self.level, "level {j} beyond truncation {}", self.level);
        let key = Component::new(label, j);
        if value.is_zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, value);
        }
    }

    pub fn add_to(&mut self, label: BasisLabel, j: usize, value: S) {
        let v = self.get(label, j) + value;
        self.set(label, j, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Component, &S)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.rank, self.level);
        for (k, v) in &self.coeffs {
            out.set(k.label, k.level, v.clone() * c.clone());
        }
        out
    }

    /// Keeps only the components accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&Component) -> bool) -> Self {
        Self {
            rank: self.rank,
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TakiffElement<T> {
        let mut out = TakiffElement::zero(self.rank, self.level);
        for (k, v) in &self.coeffs {
            out.set(k.label, k.level, f(v));
        }
        out
    }

    pub fn convert<T: Scalar>(&self) -> TakiffElement<T> {
        self.map_scalar(crate::scalar::convert)
    }

    /// Support lies in `n_l` (positive root vectors only).
    pub fn in_n(&self) -> bool {
        self.coeffs.keys().all(|k| k.label.is_positive())
    }

    /// Support lies in `b_l = h_l ⊕ n_l`.
    pub fn in_b(&self) -> bool {
        self.coeffs.keys().all(|k| !k.label.is_negative())
    }

    /// Support lies in `b̄_l = h_l ⊕ n̄_l`.
    pub fn in_bbar(&self) -> bool {
        self.coeffs.keys().all(|k| !k.label.is_positive())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .values()
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rank != other.rank || self.level != other.level {
            return Err(Error::Shape(self.rank, self.level, other.rank, other.level));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_to(k.label, k.level, v.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            out.add_to(k.label, k.level, -v.clone());
        }
        Ok(out)
    }
}

impl<S: Scalar> Add for &TakiffElement<S> {
    type Output = TakiffElement<S>;
    fn add(self, rhs: &TakiffElement<S>) -> TakiffElement<S> {
        self.checked_add(rhs).expect("shape mismatch in element sum")
    }
}

impl<S: Scalar> Sub for &TakiffElement<S> {
    type Output = TakiffElement<S>;
    fn sub(self, rhs: &TakiffElement<S>) -> TakiffElement<S> {
        self.checked_sub(rhs).expect("shape mismatch in element difference")
    }
}

impl<S: Scalar> Neg for &TakiffElement<S> {
    type Output = TakiffElement<S>;
    fn neg(self) -> TakiffElement<S> {
        self.scale(&(-S::one()))
    }
}

/// `exp(log)` for `log ∈ n_l`; acts on `g_l` by `exp(ad log)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NilpotentGroupElement<S> {
    log: TakiffElement<S>,
}

impl<S: Scalar> NilpotentGroupElement<S> {
    pub fn new(log: TakiffElement<S>) -> Result<Self> {
        if !log.in_n() {
            return Err(Error::Support(
                "group logarithm must be supported on positive root vectors".into(),
            ));
        }
        Ok(Self { log })
    }

    pub fn identity(rank: usize, level: usize) -> Self {
        Self {
            log: TakiffElement::zero(rank, level),
        }
    }

    pub fn log(&self) -> &TakiffElement<S> {
        &self.log
    }

    pub fn inverse(&self) -> Self {
        Self { log: -&self.log }
    }

    pub fn is_identity(&self) -> bool {
        self.log.is_zero()
    }
}

/// The Takiff algebra `g_l` over `g = sl_{n+1}`.
#[derive(Clone, Debug)]
pub struct Takiff {
    data: Arc<LieAlgebraData>,
    level: usize,
}

impl Takiff {
    pub fn new(rank: usize, level: usize) -> Result<Self> {
        Ok(Self {
            data: Arc::new(chevalley_basis_sl(rank)?),
            level,
        })
    }

    /// Shares already-built basis data at another truncation level.
    pub fn with_level(&self, level: usize) -> Self {
        Self {
            data: Arc::clone(&self.data),
            level,
        }
    }

    pub fn data(&self) -> &LieAlgebraData {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.data.rank()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.data.dim() * (self.level + 1)
    }

    pub fn zero<S: Scalar>(&self) -> TakiffElement<S> {
        TakiffElement::zero(self.rank(), self.level)
    }

    pub fn basis_element<S: Scalar>(&self, label: BasisLabel, j: usize) -> TakiffElement<S> {
        TakiffElement::basis(self.rank(), self.level, label, j)
    }

    /// Every basis vector of `g_l`, ordered by level then label.
    pub fn components(&self) -> Vec<Component> {
        (0..=self.level)
            .flat_map(|j| self.data.labels().iter().map(move |&l| Component::new(l, j)))
            .collect()
    }

    pub fn degree(&self, label: BasisLabel) -> i64 {
        self.data.degree(label)
    }

    fn check<S: Scalar>(&self, x: &TakiffElement<S>) -> Result<()> {
        if x.rank != self.rank() || x.level != self.level {
            return Err(Error::Shape(x.rank, x.level, self.rank(), self.level));
        }
        if let Some(k) = x.coeffs.keys().find(|k| !self.data.contains(k.label)) {
            return Err(Error::UnknownLabel(format!("{:?}", k.label)));
        }
        Ok(())
    }

    /// `[x(i), y(j)] = [x, y](i + j)`, dropped when `i + j > l`.
    pub fn bracket<S: Scalar>(
        &self,
        x: &TakiffElement<S>,
        y: &TakiffElement<S>,
    ) -> Result<TakiffElement<S>> {
        self.check(x)?;
        self.check(y)?;
        let mut acc: BTreeMap<Component, Vec<S>> = BTreeMap::new();
        for (kx, vx) in &x.coeffs {
            let a = self.data.index(kx.label);
            for (ky, vy) in &y.coeffs {
                let level = kx.level + ky.level;
                if level > self.level {
                    continue;
                }
                let b = self.data.index(ky.label);
                for &(c, sc) in self.data.structure_row(a, b) {
                    acc.entry(Component::new(self.data.label(c), level))
                        .or_default()
                        .push(S::from_i64(sc) * vx.clone() * vy.clone());
                }
            }
        }
        let mut out = self.zero();
        for (k, terms) in acc {
            out.set(k.label, k.level, S::accumulate(terms));
        }
        Ok(out)
    }

    /// `Q(x(i), y(j)) = δ_{i+j,l} κ(x, y)`.
    pub fn q_form<S: Scalar>(&self, x: &TakiffElement<S>, y: &TakiffElement<S>) -> Result<S> {
        self.check(x)?;
        self.check(y)?;
        let mut terms = Vec::new();
        for (kx, vx) in &x.coeffs {
            let partner_level = self.level - kx.level;
            for &(b, kv) in self.data.kappa_row(self.data.index(kx.label)) {
                let vy = y.get(self.data.label(b), partner_level);
                if !vy.is_zero() {
                    terms.push(S::from_i64(kv) * vx.clone() * vy);
                }
            }
        }
        Ok(S::accumulate(terms))
    }

    /// The involution `x(j) ↦ x^T(l − j)`.
    pub fn star<S: Scalar>(&self, x: &TakiffElement<S>) -> TakiffElement<S> {
        let mut out = TakiffElement::zero(x.rank, x.level);
        for (k, v) in &x.coeffs {
            out.set(k.label.transposed(), x.level - k.level, v.clone());
        }
        out
    }

    /// `Q_*(x, y) = Q(x, y*)`, positive definite on real elements.
    pub fn inner_product<S: Scalar>(
        &self,
        x: &TakiffElement<S>,
        y: &TakiffElement<S>,
    ) -> Result<S> {
        self.q_form(x, &self.star(y))
    }

    /// `Q_*`-orthogonal projection onto `b̄_l`; its kernel is `n_l`.
    pub fn project_bbar<S: Scalar>(&self, x: &TakiffElement<S>) -> TakiffElement<S> {
        x.filter(|k| !k.label.is_positive())
    }

    /// `Σ_j Σ_i c[j][i] f_{α_i}(j)`; every coefficient must be nonzero.
    pub fn principal_f<S: Scalar>(&self, coeffs: &[Vec<S>]) -> Result<TakiffElement<S>> {
        if coeffs.len() != self.level + 1 || coeffs.iter().any(|c| c.len() != self.rank()) {
            return Err(Error::NotPrincipal(format!(
                "expected {} levels of {} coefficients",
                self.level + 1,
                self.rank()
            )));
        }
        let mut out = self.zero();
        for (j, row) in coeffs.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                if c.is_zero() {
                    return Err(Error::NotPrincipal(format!(
                        "zero coefficient for simple root {} at level {j}",
                        i + 1
                    )));
                }
                out.set(BasisLabel::F(i), j, c.clone());
            }
        }
        Ok(out)
    }

    pub fn default_principal_f<S: Scalar>(&self) -> TakiffElement<S> {
        let ones = vec![vec![S::one(); self.rank()]; self.level + 1];
        self.principal_f(&ones).expect("unit coefficients are principal")
    }

    /// `ssx = Σ_i ω_i(0)`, the grading element.
    pub fn grading_element(&self) -> TakiffElement<Rational> {
        let mut x = self.zero();
        for i in 0..self.rank() {
            for (r, c) in self.data.fundamental_coweight(i).into_iter().enumerate() {
                x.add_to(BasisLabel::H(r), 0, c);
            }
        }
        x
    }

    /// `exp(ad log a)(x)`; the series is finite because `ad` of an element
    /// of `n_l` raises the ad-x₀ degree.
    pub fn group_apply<S: Scalar>(
        &self,
        a: &NilpotentGroupElement<S>,
        x: &TakiffElement<S>,
    ) -> Result<TakiffElement<S>> {
        self.check(a.log())?;
        self.check(x)?;
        if !a.log.in_n() {
            return Err(Error::Support("group logarithm outside n_l".into()));
        }
        let max_terms = 2 * self.data.roots().max_height() as usize + 2;
        let mut result = x.clone();
        let mut term = x.clone();
        for k in 1..=max_terms + 1 {
            term = self.bracket(&a.log, &term)?;
            if term.is_zero() {
                return Ok(result);
            }
            if k > max_terms {
                break;
            }
            term = term.scale(&(S::one() / S::from_i64(k as i64)));
            result = &result + &term;
        }
        Err(Error::NotNilpotent(max_terms))
    }

    /// Matrix components `(M_0, …, M_l)` of an element.
    pub fn to_matrices<S: Scalar>(&self, x: &TakiffElement<S>) -> Vec<Matrix<S>> {
        let size = self.rank() + 1;
        let mut mats: Vec<Matrix<S>> = vec![Matrix::zeros(size, size); self.level + 1];
        for (k, v) in &x.coeffs {
            let m = &mut mats[k.level];
            match k.label {
                BasisLabel::E(r) => {
                    let (a, b) = self.data.root_position(r);
                    m[(a, b)] = m[(a, b)].clone() + v.clone();
                }
                BasisLabel::F(r) => {
                    let (a, b) = self.data.root_position(r);
                    m[(b, a)] = m[(b, a)].clone() + v.clone();
                }
                BasisLabel::H(i) => {
                    m[(i, i)] = m[(i, i)].clone() + v.clone();
                    m[(i + 1, i + 1)] = m[(i + 1, i + 1)].clone() - v.clone();
                }
            }
        }
        mats
    }

    /// Inverse of [`Takiff::to_matrices`] on traceless matrices; trace parts
    /// are discarded.
    pub fn from_matrices<S: Scalar>(&self, mats: &[Matrix<S>]) -> TakiffElement<S> {
        let mut out = self.zero();
        for (j, m) in mats.iter().enumerate().take(self.level + 1) {
            for (idx, v) in self.data.decompose(m) {
                out.set(self.data.label(idx), j, v);
            }
        }
        out
    }

    pub fn label_name(&self, c: &Component) -> String {
        format!("{}({})", self.data.label_name(c.label), c.level)
    }

    pub fn display<'a, S: Scalar>(&'a self, x: &'a TakiffElement<S>) -> ElementDisplay<'a, S> {
        ElementDisplay { alg: self, x }
    }
}

pub struct ElementDisplay<'a, S> {
    alg: &'a Takiff,
    x: &'a TakiffElement<S>,
}

impl<S: Scalar> fmt::Display for ElementDisplay<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.x.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .x
            .iter()
            .map(|(k, v)| format!("{}*{}", v, self.alg.label_name(k)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
