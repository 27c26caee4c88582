//! The graded decomposition `b_l = [ssf, n_l] ⊕ s_l` and the reduction of
//! points of `ssf + b_l` to the slice `ssf + s_l`.
//!
//! Everything is organized by ad-x₀ degree. In degree `d ≥ 0` the space
//! `b_l` is spanned by Cartan vectors (`d = 0`) or root vectors of height
//! `d`, at every level; `ad ssf` maps the height-`(d+1)` root vectors into
//! it injectively, and `s_l` is chosen as a complement there.

use crate::algebra::{BasisLabel, Component, NilpotentGroupElement, Takiff, TakiffElement};
use crate::error::{Error, Result};
use crate::invariants::{evaluate_invariant, generator_specs};
use crate::linalg::{span_rank, Matrix};
use crate::scalar::Scalar;

/// One ad-x₀ degree of the decomposition.
#[derive(Clone, Debug)]
pub struct DegreePiece<S> {
    pub degree: i64,
    /// Coordinates of `b_l` in this degree.
    pub coordinates: Vec<Component>,
    /// Root vectors `E(β, j)` of height `degree + 1`.
    pub nilpotent: Vec<Component>,
    /// `[ssf, E(β, j)]` for each entry of `nilpotent`.
    pub image: Vec<TakiffElement<S>>,
    /// Basis vectors of `s_l` in this degree.
    pub section: Vec<TakiffElement<S>>,
}

#[derive(Clone, Debug)]
pub struct SectionBasis<S> {
    pub pieces: Vec<DegreePiece<S>>,
}

impl<S: Scalar> SectionBasis<S> {
    /// Basis of `s_l`, lowest degree first.
    pub fn section(&self) -> Vec<TakiffElement<S>> {
        self.pieces.iter().flat_map(|p| p.section.iter().cloned()).collect()
    }

    pub fn section_degrees(&self) -> Vec<i64> {
        self.pieces
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.degree, p.section.len()))
            .collect()
    }

    /// Basis of `[ssf, n_l]`.
    pub fn image(&self) -> Vec<TakiffElement<S>> {
        self.pieces.iter().flat_map(|p| p.image.iter().cloned()).collect()
    }

    pub fn section_dim(&self) -> usize {
        self.pieces.iter().map(|p| p.section.len()).sum()
    }

    pub fn image_dim(&self) -> usize {
        self.pieces.iter().map(|p| p.image.len()).sum()
    }
}

fn coords_of<S: Scalar>(x: &TakiffElement<S>, coordinates: &[Component]) -> Vec<S> {
    coordinates.iter().map(|c| x.get(c.label, c.level)).collect()
}

/// Checks that `ssf = Σ_j Σ_i c_{ij} f_{α_i}(j)` with every `c_{ij} ≠ 0`.
fn check_principal<S: Scalar>(alg: &Takiff, ssf: &TakiffElement<S>) -> Result<()> {
    if ssf.rank() != alg.rank() || ssf.level() != alg.level() {
        return Err(Error::Shape(ssf.rank(), ssf.level(), alg.rank(), alg.level()));
    }
    for (c, _) in ssf.iter() {
        let simple = matches!(c.label, BasisLabel::F(k) if alg.data().roots().height(k) == 1);
        if !simple {
            return Err(Error::NotPrincipal(format!(
                "component {} is not a negative simple root vector",
                alg.label_name(c)
            )));
        }
    }
    for j in 0..=alg.level() {
        for i in 0..alg.rank() {
            let root = alg.data().roots().simple_root(i);
            let k = alg.data().roots().index_of(root).expect("simple roots are roots");
            if ssf.get(BasisLabel::F(k), j).is_zero() {
                return Err(Error::NotPrincipal(format!(
                    "zero coefficient for simple root {} at level {j}",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// Root vectors of a given height, ordered by root coefficients
/// lexicographically descending, then by level.
fn root_components(alg: &Takiff, height: i64) -> Vec<Component> {
    let roots = alg.data().roots();
    let mut ks: Vec<usize> = (0..roots.count()).filter(|&k| roots.height(k) == height).collect();
    ks.sort_by(|&a, &b| roots.positive_roots()[b].cmp(&roots.positive_roots()[a]));
    ks.into_iter()
        .flat_map(|k| (0..=alg.level()).map(move |j| Component::new(BasisLabel::E(k), j)))
        .collect()
}

fn degree_coordinates(alg: &Takiff, degree: i64) -> Vec<Component> {
    if degree == 0 {
        (0..=alg.level())
            .flat_map(|j| (0..alg.rank()).map(move |i| Component::new(BasisLabel::H(i), j)))
            .collect()
    } else {
        root_components(alg, degree)
    }
}

/// Builds `[ssf, n_l]` degree by degree and completes it to `b_l` greedily
/// from coordinate vectors.
pub fn graded_complement<S: Scalar>(alg: &Takiff, ssf: &TakiffElement<S>) -> Result<SectionBasis<S>> {
    check_principal(alg, ssf)?;
    let max = alg.data().roots().max_height();
    let mut pieces = Vec::new();
    for degree in 0..=max {
        let coordinates = degree_coordinates(alg, degree);
        let nilpotent = root_components(alg, degree + 1);
        let image: Vec<TakiffElement<S>> = nilpotent
            .iter()
            .map(|c| alg.bracket(ssf, &alg.basis_element(c.label, c.level)))
            .collect::<Result<_>>()?;
        let mut vectors: Vec<Vec<S>> = image.iter().map(|v| coords_of(v, &coordinates)).collect();
        if span_rank(&vectors) != vectors.len() {
            return Err(Error::NotPrincipal(format!(
                "ad ssf is not injective on height-{} root vectors",
                degree + 1
            )));
        }
        let mut section = Vec::new();
        for (pos, c) in coordinates.iter().enumerate() {
            if vectors.len() == coordinates.len() {
                break;
            }
            let mut unit = vec![S::zero(); coordinates.len()];
            unit[pos] = S::one();
            vectors.push(unit);
            if span_rank(&vectors) == vectors.len() {
                section.push(alg.basis_element(c.label, c.level));
            } else {
                vectors.pop();
            }
        }
        pieces.push(DegreePiece { degree, coordinates, nilpotent, image, section });
    }
    Ok(SectionBasis { pieces })
}

/// Result of [`KostantSection::reduce`]: `y = a · (ssf + s)`.
#[derive(Clone, Debug)]
pub struct Reduction<S> {
    pub group: NilpotentGroupElement<S>,
    /// The section point `s ∈ s_l` (without `ssf`).
    pub section_point: TakiffElement<S>,
    /// Coordinates of `s` in the section basis.
    pub coordinates: Vec<S>,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct KostantSection<S> {
    alg: Takiff,
    ssf: TakiffElement<S>,
    basis: SectionBasis<S>,
    /// Per degree, the square matrix with columns `[ssf, E] | section`.
    systems: Vec<Matrix<S>>,
}

impl<S: Scalar> KostantSection<S> {
    pub fn new(alg: &Takiff, ssf: TakiffElement<S>) -> Result<Self> {
        let basis = graded_complement(alg, &ssf)?;
        let systems = basis
            .pieces
            .iter()
            .map(|p| {
                let cols: Vec<Vec<S>> = p
                    .image
                    .iter()
                    .chain(&p.section)
                    .map(|v| coords_of(v, &p.coordinates))
                    .collect();
                let n = p.coordinates.len();
                let mut m = Matrix::zeros(n, n);
                for (c, col) in cols.iter().enumerate() {
                    for (r, v) in col.iter().enumerate() {
                        m[(r, c)] = v.clone();
                    }
                }
                m
            })
            .collect();
        Ok(Self { alg: alg.clone(), ssf, basis, systems })
    }

    pub fn with_default_ssf(alg: &Takiff) -> Result<Self> {
        Self::new(alg, alg.default_principal_f())
    }

    pub fn algebra(&self) -> &Takiff {
        &self.alg
    }

    pub fn ssf(&self) -> &TakiffElement<S> {
        &self.ssf
    }

    pub fn basis(&self) -> &SectionBasis<S> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.section_dim()
    }

    /// `Σ c_k s_k` for section coordinates `c`.
    pub fn section_point(&self, coordinates: &[S]) -> Result<TakiffElement<S>> {
        if coordinates.len() != self.dim() {
            return Err(Error::Format(format!(
                "expected {} section coordinates, got {}",
                self.dim(),
                coordinates.len()
            )));
        }
        let mut s = self.alg.zero();
        for (v, c) in self.basis.section().iter().zip(coordinates) {
            s = &s + &v.scale(c);
        }
        Ok(s)
    }

    /// Finds the unique `a ∈ N_l`, `s ∈ s_l` with `a · (ssf + s) = y`.
    ///
    /// `log a` and `s` are solved for one ad-x₀ degree at a time: the
    /// degree-`d` part of `exp(ad Z)(ssf + s)` depends on the degree-`(d+1)`
    /// part of `Z` and the degree-`d` part of `s` only through
    /// `[Z_{d+1}, ssf] + s_d`, so each step is a square linear solve.
    pub fn reduce(&self, y: &TakiffElement<S>) -> Result<Reduction<S>> {
        let x = y.checked_sub(&self.ssf)?;
        if !x.in_b() {
            return Err(Error::Support("y − ssf must lie in b_l".into()));
        }
        let mut log = self.alg.zero::<S>();
        let mut s = self.alg.zero::<S>();
        let mut coordinates = Vec::with_capacity(self.dim());
        let mut iterations = 0;
        for (piece, system) in self.basis.pieces.iter().zip(&self.systems) {
            iterations += 1;
            let a = NilpotentGroupElement::new(log.clone())?;
            let current = self.alg.group_apply(&a, &(&self.ssf + &s))?;
            let residual = coords_of(&y.checked_sub(&current)?, &piece.coordinates);
            if residual.iter().all(|r| r.is_zero()) && piece.section.is_empty() {
                continue;
            }
            let sol = system.solve(&residual).ok_or_else(|| {
                Error::Singular(format!("degree {} reduction system", piece.degree))
            })?;
            let (z, sigma) = sol.split_at(piece.image.len());
            for (c, zc) in piece.nilpotent.iter().zip(z) {
                // [Z, ssf] = −[ssf, Z]
                log.add_to(c.label, c.level, -zc.clone());
            }
            for (v, sc) in piece.section.iter().zip(sigma) {
                s = &s + &v.scale(sc);
                coordinates.push(sc.clone());
            }
        }
        Ok(Reduction {
            group: NilpotentGroupElement::new(log)?,
            section_point: s,
            coordinates,
            iterations,
        })
    }

    /// Evaluates the generating invariants at `y` and at `ssf + s` and
    /// reports the largest difference.
    pub fn orbit_invariance_check(&self, y: &TakiffElement<S>) -> Result<OrbitReport<S>> {
        let reduction = self.reduce(y)?;
        let on_section = &self.ssf + &reduction.section_point;
        let mut max = S::zero();
        for spec in generator_specs(self.alg.rank(), self.alg.level()) {
            let d = (evaluate_invariant(&self.alg, spec, y)?
                - evaluate_invariant(&self.alg, spec, &on_section)?)
            .abs();
            if d > max {
                max = d;
            }
        }
        Ok(OrbitReport { discrepancy: max, reduction })
    }
}

#[derive(Clone, Debug)]
pub struct OrbitReport<S> {
    pub discrepancy: S,
    pub reduction: Reduction<S>,
}
