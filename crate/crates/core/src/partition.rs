//! Boundary-balanced edge cuts of a tree and the test functions built on them.
//!
//! All boundary fractions are exact rationals. Every cut is found by the same
//! descent: start from an edge, step into the side holding too much of the
//! boundary, and at each step move to the adjacent component with the most
//! boundary vertices until that component is small enough.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::eigen::Matrix;
use crate::error::{Error, Result};
use crate::graph::{BoundaryTree, SubtreeRef};
use crate::harmonic::VertexFunction;
use crate::spectra::rayleigh_quotient;

pub type Fraction = Ratio<i64>;

fn frac(p: usize, q: usize) -> Fraction {
    Fraction::new(p as i64, q as i64)
}

fn ser_fraction<S: Serializer>(r: &Fraction, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn ser_fractions<S: Serializer>(rs: &[Fraction], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(rs.iter().map(|r| format!("{}/{}", r.numer(), r.denom())))
}

/// Removed edges, the certified parts, and their exact boundary fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionCertificate {
    pub removed_edges: Vec<(usize, usize)>,
    pub parts: Vec<SubtreeRef>,
    #[serde(serialize_with = "ser_fractions")]
    pub fractions: Vec<Fraction>,
    #[serde(serialize_with = "ser_fraction")]
    pub lower: Fraction,
    #[serde(serialize_with = "ser_fraction")]
    pub upper: Fraction,
    /// Number of descent steps taken for each part.
    pub descent_steps: Vec<usize>,
}

impl PartitionCertificate {
    /// Exact re-verification against the tree: disjoint connected parts, distinct
    /// tree edges, and every fraction inside `[lower, upper]`.
    pub fn verify(&self, tree: &BoundaryTree) -> Result<()> {
        let total = tree.boundary_count();
        let mut owner = vec![usize::MAX; tree.vertex_count()];
        for (j, part) in self.parts.iter().enumerate() {
            let again = tree.subtree(&part.vertices)?;
            if again.relative_boundary != part.relative_boundary {
                return Err(Error::Numerical(format!(
                    "part {j} has a stale relative boundary"
                )));
            }
            for &v in &part.vertices {
                if owner[v] != usize::MAX {
                    return Err(Error::Numerical(format!(
                        "parts {} and {j} overlap at {v}",
                        owner[v]
                    )));
                }
                owner[v] = j;
            }
            let f = frac(part.boundary_count(), total);
            if self.fractions.get(j) != Some(&f) {
                return Err(Error::Numerical(format!("fraction of part {j} is not {f}")));
            }
            if f < self.lower || f > self.upper {
                return Err(Error::Numerical(format!(
                    "fraction {f} of part {j} outside [{}, {}]",
                    self.lower, self.upper
                )));
            }
        }
        for (i, e) in self.removed_edges.iter().enumerate() {
            if tree.edges().binary_search(e).is_err() {
                return Err(Error::Numerical(format!(
                    "({}, {}) is not a tree edge",
                    e.0, e.1
                )));
            }
            if self.removed_edges[..i].contains(e) {
                return Err(Error::Numerical("removed edges repeat".into()));
            }
        }
        Ok(())
    }
}

/// Rooted view of a connected region of the tree.
struct RootedRegion {
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    /// Boundary vertices in the subtree below each vertex.
    count: Vec<usize>,
    /// Smallest vertex id in the subtree below each vertex.
    min_id: Vec<usize>,
}

impl RootedRegion {
    fn new(tree: &BoundaryTree, inside: &[bool], root: usize) -> Self {
        let n = tree.vertex_count();
        let mut parent = vec![usize::MAX; n];
        let mut children = vec![Vec::new(); n];
        let mut order = vec![root];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &y in tree.neighbors(x) {
                if inside[y] && !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    children[x].push(y);
                    order.push(y);
                }
            }
        }
        let mut count = vec![0usize; n];
        let mut min_id = vec![usize::MAX; n];
        for &x in order.iter().rev() {
            count[x] += usize::from(tree.is_boundary(x));
            min_id[x] = min_id[x].min(x);
            let p = parent[x];
            if p != usize::MAX {
                count[p] += count[x];
                min_id[p] = min_id[p].min(min_id[x]);
            }
        }
        RootedRegion {
            parent,
            children,
            count,
            min_id,
        }
    }

    fn collect(&self, top: usize) -> Vec<usize> {
        let mut out = vec![top];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&self.children[out[i]]);
            i += 1;
        }
        out.sort_unstable();
        out
    }
}

/// Result of one descent: the cut edge and the vertices split off by it.
struct Cut {
    edge: (usize, usize),
    piece: Vec<usize>,
    steps: usize,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Descends inside the connected region `inside`, starting from `start`,
/// until it finds a side with at most `cap` boundary vertices, where
/// `too_big(c)` says `c` exceeds the cap.
fn descend(
    tree: &BoundaryTree,
    inside: &[bool],
    start: (usize, usize),
    too_big: impl Fn(usize) -> bool,
) -> Result<Cut> {
    let (a, b) = start;
    let rooted_a = RootedRegion::new(tree, inside, a);
    let side_b = rooted_a.count[b];
    let side_a = rooted_a.count[a] - side_b;

    // Orient the region so that the heavy side hangs below `u`.
    let (region, mut u) = if too_big(side_a) {
        (RootedRegion::new(tree, inside, b), a)
    } else if too_big(side_b) {
        (rooted_a, b)
    } else {
        // Both sides fit: certify the heavier one, the side of the larger
        // endpoint on ties.
        let below_b = rooted_a.collect(b);
        let piece = if side_b >= side_a {
            below_b
        } else {
            (0..tree.vertex_count())
                .filter(|&v| inside[v] && below_b.binary_search(&v).is_err())
                .collect()
        };
        return Ok(Cut {
            edge: ordered(a, b),
            piece,
            steps: 0,
        });
    };

    let mut steps = 1;
    loop {
        let best = region.children[u]
            .iter()
            .copied()
            .max_by(|&x, &y| {
                region.count[x]
                    .cmp(&region.count[y])
                    .then(region.min_id[y].cmp(&region.min_id[x]))
            })
            .ok_or_else(|| Error::Numerical("boundary descent stalled at a leaf".into()))?;
        if too_big(region.count[best]) {
            u = best;
            steps += 1;
            continue;
        }
        debug_assert_eq!(region.parent[best], u);
        return Ok(Cut {
            edge: ordered(u, best),
            piece: region.collect(best),
            steps,
        });
    }
}

fn first_edge_inside(tree: &BoundaryTree, inside: &[bool]) -> Option<(usize, usize)> {
    tree.edges()
        .iter()
        .copied()
        .find(|&(u, v)| inside[u] && inside[v])
}

/// One edge cut whose smaller-or-equal side holds between `1/(2(D-1))` and
/// `1/2` of the boundary.
pub fn partition_two(tree: &BoundaryTree) -> Result<PartitionCertificate> {
    let m = tree.boundary_count();
    let d = tree.max_degree();
    let inside = vec![true; tree.vertex_count()];
    let cut = descend(tree, &inside, tree.edges()[0], |c| 2 * c > m)?;
    let part = tree.subtree_unchecked(cut.piece);
    Ok(PartitionCertificate {
        removed_edges: vec![cut.edge],
        fractions: vec![frac(part.boundary_count(), m)],
        parts: vec![part],
        lower: frac(1, 2 * (d - 1)),
        upper: frac(1, 2),
        descent_steps: vec![cut.steps],
    })
}

/// Scans every edge and keeps the most balanced cut (first in edge order on ties).
pub fn partition_two_optimal(tree: &BoundaryTree) -> PartitionCertificate {
    let m = tree.boundary_count();
    let d = tree.max_degree();
    let inside = vec![true; tree.vertex_count()];
    let rooted = RootedRegion::new(tree, &inside, 0);
    let mut best: Option<((usize, usize), usize, usize)> = None;
    for &(u, v) in tree.edges() {
        let child = if rooted.parent[v] == u { v } else { u };
        let below = rooted.count[child];
        let small = below.min(m - below);
        if best.is_none_or(|(_, s, _)| small > s) {
            best = Some(((u, v), small, child));
        }
    }
    let (edge, small, child) = best.expect("a tree has edges");
    let below = rooted.collect(child);
    let piece = if rooted.count[child] == small {
        below
    } else {
        (0..tree.vertex_count())
            .filter(|v| below.binary_search(v).is_err())
            .collect()
    };
    let part = tree.subtree_unchecked(piece);
    PartitionCertificate {
        removed_edges: vec![edge],
        fractions: vec![frac(part.boundary_count(), m)],
        parts: vec![part],
        lower: frac(1, 2 * (d - 1)),
        upper: frac(1, 2),
        descent_steps: vec![0],
    }
}

/// `k - 1` disjoint subtrees, each cut off by one edge, each holding between
/// `1/((D-1)(k-1))` and `1/(k-1)` of the boundary.
pub fn partition_k(tree: &BoundaryTree, k: usize) -> Result<PartitionCertificate> {
    let m = tree.boundary_count();
    if k < 3 || k > m {
        return Err(Error::InfeasibleK { k, lo: 3, hi: m });
    }
    let d = tree.max_degree();
    let mut inside = vec![true; tree.vertex_count()];
    let mut cert = PartitionCertificate {
        removed_edges: Vec::with_capacity(k - 1),
        parts: Vec::with_capacity(k - 1),
        fractions: Vec::with_capacity(k - 1),
        lower: frac(1, (d - 1) * (k - 1)),
        upper: frac(1, k - 1),
        descent_steps: Vec::with_capacity(k - 1),
    };
    for _ in 0..k - 1 {
        let start = first_edge_inside(tree, &inside)
            .ok_or_else(|| Error::Numerical("remaining component has no edge".into()))?;
        let cut = descend(tree, &inside, start, |c| c * (k - 1) > m)?;
        for &v in &cut.piece {
            inside[v] = false;
        }
        let part = tree.subtree_unchecked(cut.piece);
        cert.fractions.push(frac(part.boundary_count(), m));
        cert.parts.push(part);
        cert.removed_edges.push(cut.edge);
        cert.descent_steps.push(cut.steps);
    }
    Ok(cert)
}

/// `f = 1 - β` on the certified part and `-β` elsewhere, `β` its boundary fraction.
pub fn two_level_test_function<'a>(
    tree: &'a BoundaryTree,
    cert: &PartitionCertificate,
) -> Result<VertexFunction<'a>> {
    let part = cert.parts.first().ok_or(Error::DimensionMismatch {
        expected: 1,
        got: 0,
    })?;
    let beta = frac(part.boundary_count(), tree.boundary_count());
    let inside = ratio_to_f64(Fraction::from_integer(1) - beta);
    let outside = -ratio_to_f64(beta);
    let values = (0..tree.vertex_count())
        .map(|v| if part.contains(v) { inside } else { outside })
        .collect();
    VertexFunction::new(tree, values)
}

pub fn ratio_to_f64(r: Fraction) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Second-level split of one part and the function supported on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartSplit {
    pub inner_edge: (usize, usize),
    /// Vertices of the part on the certified side of the inner edge.
    pub first: Vec<usize>,
    #[serde(serialize_with = "ser_fraction")]
    pub fraction: Fraction,
}

#[derive(Debug, Clone)]
pub struct MultiwayFamily<'a> {
    pub functions: Vec<VertexFunction<'a>>,
    pub splits: Vec<PartSplit>,
}

impl MultiwayFamily<'_> {
    /// True when no two functions are nonzero on a common vertex.
    pub fn supports_disjoint(&self) -> bool {
        let n = self.functions.first().map_or(0, |f| f.values().len());
        (0..n).all(|v| {
            self.functions
                .iter()
                .filter(|f| f.values()[v] != 0.0)
                .count()
                <= 1
        })
    }

    /// True when no edge carries a nonzero gradient of two functions.
    pub fn gradients_disjoint(&self) -> bool {
        let grads: Vec<Vec<f64>> = self
            .functions
            .iter()
            .map(VertexFunction::gradient)
            .collect();
        let e = grads.first().map_or(0, Vec::len);
        (0..e).all(|i| grads.iter().filter(|g| g[i] != 0.0).count() <= 1)
    }

    pub fn max_rayleigh(&self) -> Result<f64> {
        self.functions
            .iter()
            .map(rayleigh_quotient)
            .try_fold(f64::NEG_INFINITY, |m, r| Ok(m.max(r?)))
    }
}

/// One function per part of a `partition_k` certificate: the part is split
/// again by the two-way descent into `V1`, `V2` and the function is
/// `|∂V2|/|∂G|` on `V1`, `-|∂V1|/|∂G|` on `V2`, zero elsewhere.
pub fn multiway_test_functions<'a>(
    tree: &'a BoundaryTree,
    cert: &PartitionCertificate,
) -> Result<MultiwayFamily<'a>> {
    let n = tree.vertex_count();
    let mut family = MultiwayFamily {
        functions: Vec::with_capacity(cert.parts.len()),
        splits: Vec::with_capacity(cert.parts.len()),
    };
    for (j, part) in cert.parts.iter().enumerate() {
        let mj = part.boundary_count();
        if mj < 2 {
            return Err(Error::PartTooSmall(j));
        }
        let mut inside = vec![false; n];
        for &v in &part.vertices {
            inside[v] = true;
        }
        let start = first_edge_inside(tree, &inside).ok_or(Error::PartTooSmall(j))?;
        let cut = descend(tree, &inside, start, |c| 2 * c > mj)?;
        let first = tree.subtree_unchecked(cut.piece);
        let m1 = first.boundary_count();
        let on_first = ratio_to_f64(frac(mj - m1, mj));
        let on_second = -ratio_to_f64(frac(m1, mj));
        let mut values = vec![0.0; n];
        for &v in &part.vertices {
            values[v] = if first.contains(v) {
                on_first
            } else {
                on_second
            };
        }
        family.functions.push(VertexFunction::new(tree, values)?);
        family.splits.push(PartSplit {
            inner_edge: cut.edge,
            first: first.vertices,
            fraction: frac(m1, mj),
        });
    }
    Ok(family)
}

/// Homogeneous `(L-1) x L` system for the coefficients `a_0, ..., a_{L-1}` of
/// the diameter test function. Row `k` encodes
/// `(L - 2k) a_0 - k * sum_i n_i a_i - L a_k = 0`, which makes `a_k` the value
/// of the function on the `k`-th branch.
pub fn diameter_system(length: usize, branch_counts: &[usize]) -> Matrix {
    assert_eq!(
        branch_counts.len() + 1,
        length,
        "one count per interior path vertex"
    );
    let l = length as f64;
    let mut m = Matrix::zeros(length - 1, length);
    for k in 1..length {
        let row = k - 1;
        m[(row, 0)] = l - 2.0 * k as f64;
        for i in 1..length {
            m[(row, i)] -= k as f64 * branch_counts[i - 1] as f64;
        }
        m[(row, k)] -= l;
    }
    m
}

/// A nonzero null vector of a wide matrix, scaled to unit maximum entry.
pub fn null_vector(m: &Matrix) -> Result<Vec<f64>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let scale = a.max_abs().max(1.0);
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows)
            .max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs()))
            .expect("nonempty");
        if a[(p, c)].abs() <= 1e-12 * scale {
            continue;
        }
        for j in 0..cols {
            let tmp = a[(r, j)];
            a[(r, j)] = a[(p, j)];
            a[(p, j)] = tmp;
        }
        for i in 0..rows {
            if i != r {
                let l = a[(i, c)] / a[(r, c)];
                if l != 0.0 {
                    for j in 0..cols {
                        a[(i, j)] -= l * a[(r, j)];
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free = (0..cols)
        .find(|c| !pivot_cols.contains(c))
        .ok_or(Error::DegenerateSystem)?;
    let mut x = vec![0.0; cols];
    x[free] = 1.0;
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = -a[(row, free)] / a[(row, c)];
    }
    let top = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(top > 0.0 && top.is_finite()) {
        return Err(Error::DegenerateSystem);
    }
    Ok(x.into_iter().map(|v| v / top).collect())
}

#[derive(Debug, Clone)]
pub struct DiameterWitness<'a> {
    pub function: VertexFunction<'a>,
    pub length: usize,
    pub path: Vec<usize>,
    pub branch_counts: Vec<usize>,
    pub coefficients: Vec<f64>,
}

/// Test function constant on each branch of a diameter path, with
/// `R(f) <= 2/L` and zero boundary sum.
pub fn diameter_test_function(tree: &BoundaryTree) -> Result<DiameterWitness<'_>> {
    let (length, path) = tree.diameter();
    let branches = tree.branch_components(&path)?;
    let counts: Vec<usize> = branches.iter().map(|b| b.boundary_count()).collect();
    let a = null_vector(&diameter_system(length, &counts))?;
    let l = length as f64;
    let s: f64 = counts
        .iter()
        .zip(&a[1..])
        .map(|(&n, &ak)| n as f64 * ak)
        .sum();
    let slope = (2.0 * a[0] + s) / l;
    let mut values = vec![0.0; tree.vertex_count()];
    values[path[0]] = a[0];
    values[path[length]] = -a[0] - s;
    for b in &branches {
        let v = a[0] - b.k as f64 * slope;
        for &x in &b.part.vertices {
            values[x] = v;
        }
    }
    let function = VertexFunction::new(tree, values)?;
    let sum = function.boundary_sum();
    if sum.abs() > 1e-9 {
        return Err(Error::NotOrthogonalToBoundaryIndicator(sum));
    }
    let r = rayleigh_quotient(&function)?;
    if r > 2.0 / l + 1e-9 {
        return Err(Error::Numerical(format!(
            "diameter witness has R = {r} > 2/L"
        )));
    }
    Ok(DiameterWitness {
        function,
        length,
        path,
        branch_counts: counts,
        coefficients: a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_ball, gen_path};

    fn star(m: usize) -> BoundaryTree {
        let edges: Vec<_> = (1..=m).map(|i| (0, i)).collect();
        BoundaryTree::from_edges(&edges).unwrap()
    }

    #[test]
    fn path_two_way_split_is_even() {
        let t = gen_path(6).unwrap();
        let c = partition_two(&t).unwrap();
        assert_eq!(c.fractions, vec![frac(1, 2)]);
        assert_eq!((c.lower, c.upper), (frac(1, 2), frac(1, 2)));
        c.verify(&t).unwrap();
    }

    #[test]
    fn star_two_way_isolates_a_leaf() {
        let t = star(4);
        let c = partition_two(&t).unwrap();
        assert_eq!(c.parts[0].vertices.len(), 1);
        assert_eq!(c.fractions, vec![frac(1, 4)]);
        assert_eq!(c.lower, frac(1, 6));
        c.verify(&t).unwrap();
        assert_eq!(partition_two_optimal(&t).fractions, vec![frac(1, 4)]);
    }

    #[test]
    fn ball_two_way_takes_a_branch() {
        let t = gen_ball(3, 2).unwrap();
        let c = partition_two(&t).unwrap();
        assert_eq!(c.fractions, vec![frac(1, 3)]);
        assert_eq!(c.lower, frac(1, 4));
        assert!(c.removed_edges[0].0 == 0, "cut at the centre");
        c.verify(&t).unwrap();
    }

    #[test]
    fn ball_three_way() {
        let t = gen_ball(3, 2).unwrap();
        let c = partition_k(&t, 3).unwrap();
        assert_eq!(c.fractions, vec![frac(1, 3), frac(1, 3)]);
        assert_eq!((c.lower, c.upper), (frac(1, 4), frac(1, 2)));
        c.verify(&t).unwrap();
        let fam = multiway_test_functions(&t, &c).unwrap();
        for (f, part) in fam.functions.iter().zip(&c.parts) {
            assert_eq!(part.len(), 3);
            let mut vals: Vec<f64> = part.vertices.iter().map(|&v| f.values()[v]).collect();
            vals.sort_by(f64::total_cmp);
            assert_eq!(vals, vec![-0.5, -0.5, 0.5]);
        }
        assert!(fam.supports_disjoint());
        assert!(fam.gradients_disjoint());
    }

    #[test]
    fn star_three_way() {
        for m in 4..9 {
            let t = star(m);
            let c = partition_k(&t, 3).unwrap();
            // With four leaves the rest of the star already fits after one cut.
            let second = if m == 4 { frac(1, 2) } else { frac(1, m) };
            assert_eq!(c.fractions, vec![frac(1, m), second]);
            assert_eq!(c.lower, frac(1, 2 * (m - 1)));
            c.verify(&t).unwrap();
            assert_eq!(
                multiway_test_functions(&t, &c).unwrap_err(),
                Error::PartTooSmall(0)
            );
        }
    }

    #[test]
    fn k_out_of_range() {
        let t = star(4);
        assert!(matches!(partition_k(&t, 2), Err(Error::InfeasibleK { .. })));
        assert!(matches!(partition_k(&t, 5), Err(Error::InfeasibleK { .. })));
        let c = partition_k(&t, 4).unwrap();
        assert_eq!(c.parts.len(), 3);
        c.verify(&t).unwrap();
    }

    #[test]
    fn two_level_values() {
        let t = star(4);
        let c = partition_two(&t).unwrap();
        let f = two_level_test_function(&t, &c).unwrap();
        assert_eq!(f.boundary_sum(), 0.0);
        let leaf = c.parts[0].vertices[0];
        assert_eq!(f.values()[leaf], 0.75);
        assert_eq!(f.values()[0], -0.25);
        assert!((rayleigh_quotient(&f).unwrap() - 4.0 / 3.0).abs() < 1e-15);

        let t = gen_path(5).unwrap();
        let f = two_level_test_function(&t, &partition_two(&t).unwrap()).unwrap();
        assert!((rayleigh_quotient(&f).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn diameter_function_on_path() {
        for l in 2..12usize {
            let t = gen_path(l).unwrap();
            let w = diameter_test_function(&t).unwrap();
            let f = w.function.values();
            for k in 0..=l {
                let want = (l as f64 - 2.0 * k as f64) / l as f64 * f[0];
                assert!((f[k] - want).abs() < 1e-12);
            }
            let r = rayleigh_quotient(&w.function).unwrap();
            assert!((r - 2.0 / l as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn diameter_function_on_star() {
        let t = star(3);
        let w = diameter_test_function(&t).unwrap();
        assert_eq!(w.length, 2);
        assert!(rayleigh_quotient(&w.function).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn null_vector_of_singular_square() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let x = null_vector(&m).unwrap();
        assert!((x[0] + 2.0 * x[1]).abs() < 1e-15);
        assert!(matches!(
            null_vector(&Matrix::identity(2)),
            Err(Error::DegenerateSystem)
        ));
    }
}
