//! Steklov spectra, Rayleigh quotients and the variational check.
//!
//! Two independent routes compute eigenvalues. The full spectrum comes from
//! the Jacobi decomposition of the assembled DtN matrix. Single eigenvalues
//! come from [`steklov_eigenvalue`], which never forms the DtN matrix: the
//! interior block of `L - tB` (Laplacian `L`, boundary projector `B`) is
//! positive definite, so by inertia additivity the number of DtN eigenvalues
//! below `t` equals the number of negative pivots of `L - tB`. On a tree that
//! count is an O(n) leaf-to-root elimination.

use serde::Serialize;

use crate::config::Tolerances;
use crate::eigen::{bisect_kth, eigendecompose_symmetric, Matrix};
use crate::error::{Error, Result};
use crate::graph::BoundaryTree;
use crate::harmonic::{
    dtn_matrix_with, laplacian_apply, normal_derivative, BoundaryFunction, HarmonicSolver,
    VertexFunction,
};

/// Sorted Steklov eigenvalues with their eigenfunctions (harmonic extensions).
#[derive(Debug, Clone)]
pub struct SteklovSpectrum<'a> {
    tree: &'a BoundaryTree,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<VertexFunction<'a>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumJson {
    pub schema: &'static str,
    pub eigenvalues: Vec<f64>,
    pub boundary_order: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

/// Measured deviations from the Steklov eigenpair identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumDiagnostics {
    pub lambda_min: f64,
    pub lambda_2: f64,
    pub lambda_max: f64,
    /// `max |Δf(x)|` over interior x and all eigenfunctions.
    pub interior_residual: f64,
    /// `max |∂f/∂n - λ f|` over the boundary and all eigenfunctions.
    pub steklov_residual: f64,
    /// `max |(f_i, f_j)|` on the boundary for eigenvalues more than 1e-6 apart.
    pub cross_orthogonality: f64,
}

impl SpectrumDiagnostics {
    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let fail = |what: &str, v: f64| Err(Error::Numerical(format!("{what}: {v:e}")));
        if self.lambda_min.abs() > tol.psd {
            return fail("lambda_1 is not zero", self.lambda_min);
        }
        if self.lambda_2 <= 0.0 {
            return fail("lambda_2 is not positive", self.lambda_2);
        }
        if self.lambda_max > 1.0 + tol.psd {
            return fail("largest eigenvalue exceeds 1", self.lambda_max);
        }
        if self.interior_residual > tol.eigen {
            return fail("eigenfunction is not harmonic", self.interior_residual);
        }
        if self.steklov_residual > tol.eigen {
            return fail("Steklov boundary residual", self.steklov_residual);
        }
        if self.cross_orthogonality > tol.eigen {
            return fail("eigenfunctions not orthogonal", self.cross_orthogonality);
        }
        Ok(())
    }
}

impl<'a> SteklovSpectrum<'a> {
    pub fn tree(&self) -> &'a BoundaryTree {
        self.tree
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `λ_k`, 1-based.
    pub fn lambda(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    pub fn diagnostics(&self) -> SpectrumDiagnostics {
        let t = self.tree;
        let mut interior_residual = 0.0f64;
        let mut steklov_residual = 0.0f64;
        for (lam, f) in self.eigenvalues.iter().zip(&self.eigenfunctions) {
            let lap = laplacian_apply(f);
            for &x in t.interior() {
                interior_residual = interior_residual.max(lap.values()[x].abs());
            }
            let nd = normal_derivative(f);
            for (i, &b) in t.boundary().iter().enumerate() {
                steklov_residual =
                    steklov_residual.max((nd.values()[i] - lam * f.values()[b]).abs());
            }
        }
        let restricted: Vec<BoundaryFunction<'_>> = self
            .eigenfunctions
            .iter()
            .map(VertexFunction::restrict_to_boundary)
            .collect();
        let mut cross_orthogonality = 0.0f64;
        for i in 0..restricted.len() {
            for j in 0..i {
                if (self.eigenvalues[i] - self.eigenvalues[j]).abs() > 1e-6 {
                    cross_orthogonality =
                        cross_orthogonality.max(restricted[i].dot(&restricted[j]).abs());
                }
            }
        }
        SpectrumDiagnostics {
            lambda_min: self.eigenvalues[0],
            lambda_2: self.eigenvalues.get(1).copied().unwrap_or(f64::NAN),
            lambda_max: *self.eigenvalues.last().expect("nonempty spectrum"),
            interior_residual,
            steklov_residual,
            cross_orthogonality,
        }
    }

    pub fn to_json(&self, with_vectors: bool) -> SpectrumJson {
        SpectrumJson {
            schema: crate::SCHEMA,
            eigenvalues: self.eigenvalues.clone(),
            boundary_order: self.tree.boundary().to_vec(),
            eigenvectors: with_vectors.then(|| {
                self.eigenfunctions
                    .iter()
                    .map(|f| f.restrict_to_boundary().values().to_vec())
                    .collect()
            }),
        }
    }
}

/// Full Steklov spectrum via the DtN matrix and Jacobi rotations.
pub fn steklov_spectrum(tree: &BoundaryTree) -> Result<SteklovSpectrum<'_>> {
    steklov_spectrum_with(tree, &Tolerances::default())
}

pub fn steklov_spectrum_with<'a>(
    tree: &'a BoundaryTree,
    tol: &Tolerances,
) -> Result<SteklovSpectrum<'a>> {
    let dtn = dtn_matrix_with(tree, tol)?;
    let eig = eigendecompose_symmetric(dtn.matrix())?;
    let solver = HarmonicSolver::new(tree);
    let mut eigenfunctions = Vec::with_capacity(eig.values.len());
    for i in 0..eig.values.len() {
        let g = BoundaryFunction::new(tree, eig.vector(i))?;
        eigenfunctions.push(VertexFunction::new(tree, solver.extend(&g))?);
    }
    Ok(SteklovSpectrum {
        tree,
        eigenvalues: eig.values,
        eigenfunctions,
    })
}

/// `R(f) = sum over edges (f(x)-f(y))^2 / sum over boundary f(x)^2`.
///
/// Returns `+inf` when `f` vanishes on the boundary but not identically.
pub fn rayleigh_quotient(f: &VertexFunction<'_>) -> Result<f64> {
    if f.values().iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroFunction);
    }
    let num = f.edge_energy();
    let den = f.boundary_mass();
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(num / den)
}

/// Leaf-to-root elimination order of the whole tree, reused for every shift.
#[derive(Debug, Clone)]
pub struct TreeInertia<'a> {
    tree: &'a BoundaryTree,
    order: Vec<usize>,
    parent: Vec<usize>,
}

impl<'a> TreeInertia<'a> {
    pub fn new(tree: &'a BoundaryTree) -> Self {
        let n = tree.vertex_count();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut order = vec![0];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &y in tree.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    order.push(y);
                }
            }
        }
        TreeInertia {
            tree,
            order,
            parent,
        }
    }

    /// Number of Steklov eigenvalues strictly below `t`.
    pub fn count_below(&self, t: f64) -> usize {
        let tree = self.tree;
        let mut pivot: Vec<f64> = (0..tree.vertex_count())
            .map(|v| tree.degree(v) as f64 - if tree.is_boundary(v) { t } else { 0.0 })
            .collect();
        let mut negative = 0;
        for &v in self.order.iter().rev() {
            let mut d = pivot[v];
            if d == 0.0 {
                d = f64::EPSILON * (1.0 + tree.degree(v) as f64);
            }
            if d < 0.0 {
                negative += 1;
            }
            let p = self.parent[v];
            if p != usize::MAX {
                pivot[p] -= 1.0 / d;
            }
        }
        negative
    }

    /// `λ_k` (1-based) to absolute accuracy `tol`.
    pub fn eigenvalue(&self, k: usize, tol: f64) -> Result<f64> {
        let m = self.tree.boundary_count();
        if k == 0 || k > m {
            return Err(Error::InfeasibleK { k, lo: 1, hi: m });
        }
        // The whole spectrum lies in [0, 1].
        Ok(bisect_kth(-0.5, 1.5, k, tol, |t| self.count_below(t)))
    }
}

/// Bisection width for [`steklov_eigenvalue`], close to the resolution of `f64` on `[0, 1]`.
pub const STRUCTURED_TOL: f64 = 1e-15;

/// `λ_k` of a tree without assembling the DtN matrix; O(n) per bisection step.
pub fn steklov_eigenvalue(tree: &BoundaryTree, k: usize) -> Result<f64> {
    TreeInertia::new(tree).eigenvalue(k, STRUCTURED_TOL)
}

/// Coefficient grid used by [`variational_upper_check`].
pub const VARIATIONAL_SAMPLES: usize = 256;

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    x
}

const PRIMES: [usize; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Deterministic coefficient vectors: the coordinate axes followed by a
/// Halton sequence mapped to `[-1, 1]^dim`.
pub fn coefficient_grid(dim: usize, samples: usize) -> Vec<Vec<f64>> {
    let mut grid: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for s in 1..=samples {
        grid.push(
            (0..dim)
                .map(|j| {
                    let base = PRIMES
                        .get(j)
                        .copied()
                        .unwrap_or(PRIMES[j % PRIMES.len()] + 2 * j);
                    2.0 * radical_inverse(s, base) - 1.0
                })
                .collect(),
        );
    }
    grid
}

/// Numerical rank of a set of vectors by Gaussian elimination with partial pivoting.
pub(crate) fn numerical_rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m = Matrix::from_rows(rows);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let (r, c) = (m.rows(), m.cols());
    let mut rank = 0;
    for col in 0..c {
        if rank == r {
            break;
        }
        let piv = (rank..r)
            .max_by(|&a, &b| m[(a, col)].abs().total_cmp(&m[(b, col)].abs()))
            .expect("nonempty range");
        if m[(piv, col)].abs() <= 1e-9 * scale {
            continue;
        }
        for j in 0..c {
            let tmp = m[(rank, j)];
            m[(rank, j)] = m[(piv, j)];
            m[(piv, j)] = tmp;
        }
        for i in rank + 1..r {
            let l = m[(i, col)] / m[(rank, col)];
            for j in col..c {
                m[(i, j)] -= l * m[(rank, j)];
            }
        }
        rank += 1;
    }
    rank
}

/// Largest Rayleigh quotient over the sampled combinations of `w`.
pub fn sampled_span_max(w: &[VertexFunction<'_>]) -> Result<f64> {
    let Some(first) = w.first() else {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    };
    let n = first.tree().vertex_count();
    let mut best = f64::NEG_INFINITY;
    for coeffs in coefficient_grid(w.len(), VARIATIONAL_SAMPLES) {
        let mut values = vec![0.0; n];
        for (c, f) in coeffs.iter().zip(w) {
            for (v, x) in values.iter_mut().zip(f.values()) {
                *v += c * x;
            }
        }
        let g = VertexFunction::new(first.tree(), values)?;
        match rayleigh_quotient(&g) {
            Ok(r) => best = best.max(r),
            Err(Error::ZeroFunction) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// Checks `λ_k <= max over sampled nonzero f in span(W) of R(f)`, where `W`
/// is a (k-1)-dimensional family orthogonal to the boundary indicator.
pub fn variational_upper_check(
    tree: &BoundaryTree,
    w: &[VertexFunction<'_>],
    k: usize,
) -> Result<bool> {
    let m = tree.boundary_count();
    if k < 2 || k > m {
        return Err(Error::InfeasibleK { k, lo: 2, hi: m });
    }
    if w.len() != k - 1 {
        return Err(Error::DimensionMismatch {
            expected: k - 1,
            got: w.len(),
        });
    }
    for f in w {
        if f.tree() != tree {
            return Err(Error::DimensionMismatch {
                expected: tree.vertex_count(),
                got: f.tree().vertex_count(),
            });
        }
        let s = f.boundary_sum();
        if s.abs() > 1e-9 {
            return Err(Error::NotOrthogonalToBoundaryIndicator(s));
        }
    }
    let rows: Vec<Vec<f64>> = w.iter().map(|f| f.values().to_vec()).collect();
    let rank = numerical_rank(&rows);
    if rank != k - 1 {
        return Err(Error::DimensionMismatch {
            expected: k - 1,
            got: rank,
        });
    }
    let lambda = steklov_eigenvalue(tree, k)?;
    Ok(lambda <= sampled_span_max(w)? + 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(l: usize) -> BoundaryTree {
        let edges: Vec<_> = (0..l).map(|i| (i, i + 1)).collect();
        BoundaryTree::from_edges(&edges).unwrap()
    }

    fn star(m: usize) -> BoundaryTree {
        let edges: Vec<_> = (1..=m).map(|i| (0, i)).collect();
        BoundaryTree::from_edges(&edges).unwrap()
    }

    #[test]
    fn path_spectrum() {
        for l in [2usize, 5, 13] {
            let t = path(l);
            let s = steklov_spectrum(&t).unwrap();
            assert_eq!(s.len(), 2);
            assert!(s.lambda(1).abs() < 1e-15);
            assert!((s.lambda(2) - 2.0 / l as f64).abs() < 1e-14);
            s.diagnostics().check(&Tolerances::default()).unwrap();
        }
    }

    #[test]
    fn star_spectrum() {
        let t = star(5);
        let s = steklov_spectrum(&t).unwrap();
        assert!(s.lambda(1).abs() < 1e-14);
        for k in 2..=5 {
            assert!((s.lambda(k) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn structured_route_on_small_trees() {
        let t = star(4);
        assert!((steklov_eigenvalue(&t, 1).unwrap()).abs() < 1e-12);
        assert!((steklov_eigenvalue(&t, 3).unwrap() - 1.0).abs() < 1e-12);
        let t = path(8);
        assert!((steklov_eigenvalue(&t, 2).unwrap() - 0.25).abs() < 1e-12);
        assert!(matches!(
            steklov_eigenvalue(&t, 3),
            Err(Error::InfeasibleK { .. })
        ));
    }

    #[test]
    fn rayleigh_cases() {
        let t = path(2);
        let c = VertexFunction::constant(&t, 2.0);
        assert_eq!(rayleigh_quotient(&c).unwrap(), 0.0);
        let f = VertexFunction::new(&t, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(rayleigh_quotient(&f).unwrap(), f64::INFINITY);
        let f = VertexFunction::new(&t, vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(rayleigh_quotient(&f).unwrap(), 1.0);
        assert_eq!(
            rayleigh_quotient(&VertexFunction::zeros(&t)),
            Err(Error::ZeroFunction)
        );
    }

    #[test]
    fn eigenfunction_attains_its_eigenvalue() {
        let t =
            BoundaryTree::from_edges(&[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5), (5, 6)]).unwrap();
        let s = steklov_spectrum(&t).unwrap();
        let f = &s.eigenfunctions[1];
        assert!((rayleigh_quotient(f).unwrap() - s.lambda(2)).abs() < 1e-10);
        assert!(variational_upper_check(&t, std::slice::from_ref(f), 2).unwrap());
    }

    #[test]
    fn variational_check_errors() {
        let t = star(4);
        let f = VertexFunction::new(&t, vec![0.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            variational_upper_check(&t, std::slice::from_ref(&f), 2),
            Err(Error::NotOrthogonalToBoundaryIndicator(_))
        ));
        assert!(matches!(
            variational_upper_check(&t, &[f], 3),
            Err(Error::DimensionMismatch { .. })
        ));
        let g = VertexFunction::new(&t, vec![0.0, 1.0, -1.0, 0.0, 0.0]).unwrap();
        let g2 = g.combine(2.0, &g, 0.0);
        assert!(matches!(
            variational_upper_check(&t, &[g, g2], 3),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn grid_starts_with_axes() {
        let g = coefficient_grid(3, 4);
        assert_eq!(g.len(), 7);
        assert_eq!(g[1], vec![0.0, 1.0, 0.0]);
        assert!(g.iter().flatten().all(|c| (-1.0..=1.0).contains(c)));
    }
}
