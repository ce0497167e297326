//! Laplacian, normal derivative, harmonic extension and the Dirichlet-to-Neumann matrix.

use rayon::prelude::*;

use crate::config::Tolerances;
use crate::eigen::Matrix;
use crate::error::{Error, Result};
use crate::graph::BoundaryTree;

/// A real function on every vertex of a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction<'a> {
    tree: &'a BoundaryTree,
    values: Vec<f64>,
}

/// A real function on the boundary, indexed by the tree's sorted boundary list.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction<'a> {
    tree: &'a BoundaryTree,
    values: Vec<f64>,
}

fn check_values(values: &[f64], expected: usize) -> Result<()> {
    if values.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: values.len(),
        });
    }
    if let Some(x) = values.iter().find(|x| !x.is_finite()) {
        return Err(Error::Numerical(format!("non-finite function value {x}")));
    }
    Ok(())
}

impl<'a> VertexFunction<'a> {
    pub fn new(tree: &'a BoundaryTree, values: Vec<f64>) -> Result<Self> {
        check_values(&values, tree.vertex_count())?;
        Ok(VertexFunction { tree, values })
    }

    pub fn zeros(tree: &'a BoundaryTree) -> Self {
        VertexFunction {
            tree,
            values: vec![0.0; tree.vertex_count()],
        }
    }

    pub fn constant(tree: &'a BoundaryTree, c: f64) -> Self {
        VertexFunction {
            tree,
            values: vec![c; tree.vertex_count()],
        }
    }

    pub fn tree(&self) -> &'a BoundaryTree {
        self.tree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn restrict_to_boundary(&self) -> BoundaryFunction<'a> {
        BoundaryFunction {
            tree: self.tree,
            values: self
                .tree
                .boundary()
                .iter()
                .map(|&b| self.values[b])
                .collect(),
        }
    }

    /// `sum over edges (f(x) - f(y))^2`, the numerator of the Rayleigh quotient.
    pub fn edge_energy(&self) -> f64 {
        self.tree
            .edges()
            .iter()
            .map(|&(x, y)| (self.values[x] - self.values[y]).powi(2))
            .sum()
    }

    /// `sum over boundary f(x)^2`.
    pub fn boundary_mass(&self) -> f64 {
        self.tree
            .boundary()
            .iter()
            .map(|&b| self.values[b].powi(2))
            .sum()
    }

    /// `(f, 1_boundary)`.
    pub fn boundary_sum(&self) -> f64 {
        self.tree.boundary().iter().map(|&b| self.values[b]).sum()
    }

    /// Gradient on each stored edge `(x, y)`: `f(y) - f(x)`.
    pub fn gradient(&self) -> Vec<f64> {
        self.tree
            .edges()
            .iter()
            .map(|&(x, y)| self.values[y] - self.values[x])
            .collect()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &VertexFunction<'_>, b: f64) -> VertexFunction<'a> {
        VertexFunction {
            tree: self.tree,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }
}

impl<'a> BoundaryFunction<'a> {
    pub fn new(tree: &'a BoundaryTree, values: Vec<f64>) -> Result<Self> {
        check_values(&values, tree.boundary_count())?;
        Ok(BoundaryFunction { tree, values })
    }

    /// Indicator of the `j`-th boundary vertex.
    pub fn unit(tree: &'a BoundaryTree, j: usize) -> Self {
        let mut values = vec![0.0; tree.boundary_count()];
        values[j] = 1.0;
        BoundaryFunction { tree, values }
    }

    pub fn tree(&self) -> &'a BoundaryTree {
        self.tree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dot(&self, other: &BoundaryFunction<'_>) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// `(Δf)(x) = sum over neighbours y of (f(x) - f(y))`, at every vertex.
pub fn laplacian_apply<'a>(f: &VertexFunction<'a>) -> VertexFunction<'a> {
    let t = f.tree;
    let values = (0..t.vertex_count())
        .map(|x| {
            t.neighbors(x)
                .iter()
                .map(|&y| f.values[x] - f.values[y])
                .sum()
        })
        .collect();
    VertexFunction { tree: t, values }
}

/// Outward normal derivative at each boundary vertex, summing over interior neighbours.
pub fn normal_derivative<'a>(f: &VertexFunction<'a>) -> BoundaryFunction<'a> {
    let t = f.tree;
    let values = t
        .boundary()
        .iter()
        .map(|&x| {
            t.neighbors(x)
                .iter()
                .filter(|&&y| !t.is_boundary(y))
                .map(|&y| f.values[x] - f.values[y])
                .sum()
        })
        .collect();
    BoundaryFunction { tree: t, values }
}

/// Direct solver for the interior Dirichlet problem.
///
/// The interior block of the Laplacian is tree-structured, so eliminating
/// interior vertices from the leaves of the interior tree inward produces no
/// fill-in: factorization and each solve are O(n).
#[derive(Debug, Clone)]
pub struct HarmonicSolver<'a> {
    tree: &'a BoundaryTree,
    /// Interior vertices, parents before children.
    order: Vec<usize>,
    /// Parent in the interior tree (`usize::MAX` at the root).
    parent: Vec<usize>,
    /// Eliminated diagonal.
    pivot: Vec<f64>,
}

impl<'a> HarmonicSolver<'a> {
    pub fn new(tree: &'a BoundaryTree) -> Self {
        let n = tree.vertex_count();
        let root = tree.interior()[0];
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(tree.interior().len());
        seen[root] = true;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &y in tree.neighbors(x) {
                if !seen[y] && !tree.is_boundary(y) {
                    seen[y] = true;
                    parent[y] = x;
                    order.push(y);
                }
            }
        }
        let mut pivot = vec![0.0; n];
        for &x in &order {
            pivot[x] = tree.degree(x) as f64;
        }
        for &x in order.iter().rev() {
            let p = parent[x];
            if p != usize::MAX {
                pivot[p] -= 1.0 / pivot[x];
            }
        }
        HarmonicSolver {
            tree,
            order,
            parent,
            pivot,
        }
    }

    /// Harmonic extension of boundary data given by a closure over boundary slots.
    fn solve_with(&self, boundary_value: impl Fn(usize) -> f64) -> Vec<f64> {
        let t = self.tree;
        let mut f = vec![0.0; t.vertex_count()];
        for (j, &b) in t.boundary().iter().enumerate() {
            f[b] = boundary_value(j);
        }
        let mut rhs = vec![0.0; t.vertex_count()];
        for &x in &self.order {
            rhs[x] = t
                .neighbors(x)
                .iter()
                .filter(|&&y| t.is_boundary(y))
                .map(|&y| f[y])
                .sum();
        }
        for &x in self.order.iter().rev() {
            let p = self.parent[x];
            if p != usize::MAX {
                rhs[p] += rhs[x] / self.pivot[x];
            }
        }
        for &x in &self.order {
            let p = self.parent[x];
            let up = if p == usize::MAX { 0.0 } else { f[p] };
            f[x] = (rhs[x] + up) / self.pivot[x];
        }
        f
    }

    pub fn extend(&self, g: &BoundaryFunction<'_>) -> Vec<f64> {
        self.solve_with(|j| g.values[j])
    }
}

/// The unique function agreeing with `g` on the boundary and harmonic on the interior.
pub fn harmonic_extension<'a>(g: &BoundaryFunction<'a>) -> Result<VertexFunction<'a>> {
    harmonic_extension_with(g, &Tolerances::default())
}

pub fn harmonic_extension_with<'a>(
    g: &BoundaryFunction<'a>,
    tol: &Tolerances,
) -> Result<VertexFunction<'a>> {
    let solver = HarmonicSolver::new(g.tree);
    let f = VertexFunction {
        tree: g.tree,
        values: solver.extend(g),
    };
    let scale = 1.0 + g.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let lap = laplacian_apply(&f);
    let worst = g
        .tree
        .interior()
        .iter()
        .map(|&x| lap.values[x].abs())
        .fold(0.0, f64::max);
    if worst > tol.residual * scale {
        return Err(Error::Numerical(format!(
            "harmonic residual {worst:e} exceeds tolerance"
        )));
    }
    Ok(f)
}

/// Dense Dirichlet-to-Neumann matrix, rows and columns in sorted boundary order.
#[derive(Debug, Clone)]
pub struct DtnMatrix<'a> {
    tree: &'a BoundaryTree,
    entries: Matrix,
}

impl<'a> DtnMatrix<'a> {
    pub fn tree(&self) -> &'a BoundaryTree {
        self.tree
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn apply(&self, g: &BoundaryFunction<'a>) -> BoundaryFunction<'a> {
        BoundaryFunction {
            tree: self.tree,
            values: self.entries.mul_vec(&g.values),
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.entries.max_asymmetry()
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.entries.row(i).iter().sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// Row-major nested arrays, for JSON output.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.entries.row(i).to_vec())
            .collect()
    }
}

/// Assembles the DtN matrix column by column: `|boundary|` harmonic solves of O(n) each.
pub fn dtn_matrix(tree: &BoundaryTree) -> Result<DtnMatrix<'_>> {
    dtn_matrix_with(tree, &Tolerances::default())
}

pub fn dtn_matrix_with<'a>(tree: &'a BoundaryTree, tol: &Tolerances) -> Result<DtnMatrix<'a>> {
    let m = tree.boundary_count();
    let solver = HarmonicSolver::new(tree);
    // Each boundary vertex has exactly one (interior) neighbour.
    let anchor: Vec<usize> = tree
        .boundary()
        .iter()
        .map(|&b| tree.neighbors(b)[0])
        .collect();
    let columns: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let f = solver.solve_with(|i| if i == j { 1.0 } else { 0.0 });
            tree.boundary()
                .iter()
                .zip(&anchor)
                .map(|(&b, &p)| f[b] - f[p])
                .collect()
        })
        .collect();
    let mut entries = Matrix::zeros(m, m);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            entries[(i, j)] = v;
        }
    }
    let dtn = DtnMatrix { tree, entries };
    let asym = dtn.max_asymmetry();
    if asym > tol.symmetry {
        return Err(Error::Numerical(format!("DtN asymmetry {asym:e}")));
    }
    let row = dtn.max_row_sum();
    if row > tol.symmetry {
        return Err(Error::Numerical(format!("DtN row sum {row:e}")));
    }
    let mut dtn = dtn;
    dtn.entries.symmetrize();
    Ok(dtn)
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
    fn laplacian_annihilates_constants() {
        let t = star(4);
        let lap = laplacian_apply(&VertexFunction::constant(&t, 3.5));
        assert!(lap.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn laplacian_on_path() {
        let t = path(2);
        let f = VertexFunction::new(&t, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(laplacian_apply(&f).values(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn laplacian_on_star_leaf_indicator() {
        let t = star(3);
        let f = VertexFunction::new(&t, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(laplacian_apply(&f).values(), &[-1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn normal_derivative_matches_laplacian() {
        let t = path(2);
        let f = VertexFunction::new(&t, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(normal_derivative(&f).values(), &[1.0, 0.0]);
        let t = star(5);
        let f = VertexFunction::new(&t, vec![0.3, -1.0, 2.0, 0.5, 0.0, 7.0]).unwrap();
        let lap = laplacian_apply(&f);
        let nd = normal_derivative(&f);
        for (i, &b) in t.boundary().iter().enumerate() {
            assert_eq!(nd.values()[i], lap.values()[b]);
        }
    }

    #[test]
    fn extension_on_path_is_linear() {
        let t = path(7);
        let g = BoundaryFunction::new(&t, vec![0.0, 7.0]).unwrap();
        let f = harmonic_extension(&g).unwrap();
        for (k, v) in f.values().iter().enumerate() {
            assert!((v - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_data_extends_to_constant() {
        let t = star(4);
        let g = BoundaryFunction::new(&t, vec![2.5; 4]).unwrap();
        let f = harmonic_extension(&g).unwrap();
        assert!(f.values().iter().all(|&v| (v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn star_center_is_mean() {
        let t = star(5);
        let g = BoundaryFunction::new(&t, vec![1.0, -2.0, 4.0, 0.5, 3.0]).unwrap();
        let f = harmonic_extension(&g).unwrap();
        assert!((f.values()[0] - 6.5 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn path_dtn_closed_form() {
        for l in [2usize, 3, 10] {
            let t = path(l);
            let d = dtn_matrix(&t).unwrap();
            let h = 1.0 / l as f64;
            let want = [[h, -h], [-h, h]];
            for (i, row) in want.iter().enumerate() {
                for (j, &w) in row.iter().enumerate() {
                    assert!((d.matrix()[(i, j)] - w).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn star_dtn_closed_form() {
        let m = 6;
        let t = star(m);
        let d = dtn_matrix(&t).unwrap();
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64;
                assert!((d.matrix()[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_checks() {
        let t = path(3);
        assert!(matches!(
            VertexFunction::new(&t, vec![0.0; 3]),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 3
            })
        ));
        assert!(BoundaryFunction::new(&t, vec![f64::NAN, 0.0]).is_err());
    }
}
