//! Tree families: homogeneous balls, refined balls, paths, extremal
//! caterpillars, and seeded random trees.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BoundaryTree;
use crate::spectra::steklov_eigenvalue;

/// Middle attachment of an extremal caterpillar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Three-vertex middle component.
    A,
    /// Seven-vertex middle component.
    B,
    /// Degree-three ball of a given radius centred on the middle spine vertex.
    C,
}

/// A named family member, as read from `--family` JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilySpec {
    Ball {
        #[serde(rename = "D")]
        degree: usize,
        r: usize,
    },
    Refined {
        l: usize,
    },
    Path {
        #[serde(rename = "L")]
        length: usize,
    },
    ExtremalMiddle {
        #[serde(rename = "L")]
        length: usize,
        variant: Variant,
        #[serde(default = "default_radius")]
        radius: usize,
    },
    Random {
        n: usize,
        #[serde(rename = "D")]
        max_degree: usize,
        #[serde(default)]
        seed: u64,
    },
    RandomInterior3 {
        n: usize,
        #[serde(rename = "D")]
        max_degree: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_radius() -> usize {
    1
}

impl FamilySpec {
    pub fn build(&self) -> Result<BoundaryTree> {
        match *self {
            FamilySpec::Ball { degree, r } => gen_ball(degree, r),
            FamilySpec::Refined { l } => gen_refined(l),
            FamilySpec::Path { length } => gen_path(length),
            FamilySpec::ExtremalMiddle {
                length,
                variant,
                radius,
            } => gen_extremal_middle(length, variant, radius),
            FamilySpec::Random {
                n,
                max_degree,
                seed,
            } => gen_random_tree(n, max_degree, seed),
            FamilySpec::RandomInterior3 {
                n,
                max_degree,
                seed,
            } => gen_random_interior3(n, max_degree, seed),
        }
    }

    /// Short identifier used as `tree_id` in reports.
    pub fn label(&self) -> String {
        match *self {
            FamilySpec::Ball { degree, r } => format!("ball-D{degree}-r{r}"),
            FamilySpec::Refined { l } => format!("refined-l{l}"),
            FamilySpec::Path { length } => format!("path-L{length}"),
            FamilySpec::ExtremalMiddle {
                length,
                variant,
                radius,
            } => match variant {
                Variant::C => format!("extremal-L{length}-C{radius}"),
                v => format!("extremal-L{length}-{v:?}"),
            },
            FamilySpec::Random {
                n,
                max_degree,
                seed,
            } => format!("random-n{n}-D{max_degree}-s{seed}"),
            FamilySpec::RandomInterior3 {
                n,
                max_degree,
                seed,
            } => format!("interior3-n{n}-D{max_degree}-s{seed}"),
        }
    }
}

/// Ball of radius `r` in the homogeneous tree of degree `D`, centred at vertex 0.
pub fn gen_ball(degree: usize, r: usize) -> Result<BoundaryTree> {
    if degree < 3 || r < 1 {
        return Err(Error::BadParams(format!(
            "ball needs D >= 3, r >= 1 (got D={degree}, r={r})"
        )));
    }
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1;
    for depth in 0..r {
        let children = if depth == 0 { degree } else { degree - 1 };
        let mut next = Vec::with_capacity(frontier.len() * children);
        for &v in &frontier {
            for _ in 0..children {
                edges.push((v, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    BoundaryTree::from_edges(&edges)
}

/// Degree-three ball of radius `l` with every edge from depth `k` to `k + 1`
/// (`1 <= k <= l - 1`) subdivided by `k` extra vertices.
pub fn gen_refined(l: usize) -> Result<BoundaryTree> {
    if l < 2 {
        return Err(Error::BadParams(format!(
            "refined tree needs l >= 2 (got {l})"
        )));
    }
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1;
    for depth in 0..l {
        let children = if depth == 0 { 3 } else { 2 };
        let mut next = Vec::new();
        for &v in &frontier {
            for _ in 0..children {
                let mut prev = v;
                for _ in 0..depth {
                    edges.push((prev, next_id));
                    prev = next_id;
                    next_id += 1;
                }
                edges.push((prev, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    BoundaryTree::from_edges(&edges)
}

/// Path `0 - 1 - ... - L`.
pub fn gen_path(length: usize) -> Result<BoundaryTree> {
    if length < 2 {
        return Err(Error::BadParams(format!(
            "path needs L >= 2 (got {length})"
        )));
    }
    let edges: Vec<_> = (0..length).map(|i| (i, i + 1)).collect();
    BoundaryTree::from_edges(&edges)
}

/// Canonical (AHU) encodings of every rooted tree with `size` vertices, sorted.
pub fn rooted_shapes(size: usize) -> Vec<String> {
    fn encode(v: usize, children: &[Vec<usize>]) -> String {
        let mut parts: Vec<String> = children[v].iter().map(|&c| encode(c, children)).collect();
        parts.sort();
        format!("({})", parts.concat())
    }
    let mut shapes = BTreeSet::new();
    if size == 0 {
        return Vec::new();
    }
    // Parent arrays with parent[i] < i enumerate every rooted tree at least once.
    let mut parent = vec![0usize; size];
    loop {
        let mut children = vec![Vec::new(); size];
        for i in 1..size {
            children[parent[i]].push(i);
        }
        shapes.insert(encode(0, &children));
        let mut i = size - 1;
        loop {
            if i == 0 {
                return shapes.into_iter().collect();
            }
            if parent[i] + 1 < i {
                parent[i] += 1;
                for p in parent.iter_mut().skip(i + 1) {
                    *p = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

fn shape_height(code: &str) -> usize {
    let mut depth = 0usize;
    let mut best = 0usize;
    for ch in code.chars() {
        if ch == '(' {
            depth += 1;
            best = best.max(depth);
        } else {
            depth -= 1;
        }
    }
    best - 1
}

/// Appends the rooted shape `code` below `root`, numbering new vertices from `next_id`.
fn attach_shape(code: &str, root: usize, next_id: &mut usize, edges: &mut Vec<(usize, usize)>) {
    let mut stack = vec![];
    for (i, ch) in code.chars().enumerate() {
        if ch == '(' {
            let v = if i == 0 {
                root
            } else {
                let v = *next_id;
                *next_id += 1;
                edges.push((*stack.last().expect("open parent"), v));
                v
            };
            stack.push(v);
        } else {
            stack.pop();
        }
    }
}

fn caterpillar(length: usize, shape: &str) -> Result<BoundaryTree> {
    let mut edges: Vec<_> = (0..length).map(|i| (i, i + 1)).collect();
    let mut next_id = length + 1;
    attach_shape(shape, length / 2, &mut next_id, &mut edges);
    BoundaryTree::from_edges(&edges)
}

fn ball_shape(radius: usize) -> String {
    fn branch(depth_left: usize) -> String {
        if depth_left == 0 {
            "()".into()
        } else {
            let c = branch(depth_left - 1);
            format!("({c}{c})")
        }
    }
    if radius == 0 {
        return "()".into();
    }
    let b = branch(radius - 1);
    format!("({b}{b}{b})")
}

/// Spine `0 - ... - L` with a middle component at `L/2`, chosen so that `λ_2 = 2/L`.
///
/// Variants A and B search the rooted shapes of size 3 and 7 in canonical
/// order and return the first one attaining `2/L` within `1e-9`.
pub fn gen_extremal_middle(length: usize, variant: Variant, radius: usize) -> Result<BoundaryTree> {
    if !length.is_multiple_of(2) || length < 2 {
        return Err(Error::BadParams(format!(
            "L must be even and positive (got {length})"
        )));
    }
    let half = length / 2;
    let target = 2.0 / length as f64;
    let candidates: Vec<String> = match variant {
        Variant::A | Variant::B => {
            // Seven-vertex components with λ₂ = 1/2 already exist at L = 4, so
            // both variants start at L/2 = 2.
            let (size, min_half) = if variant == Variant::A {
                (3, 2)
            } else {
                (7, 2)
            };
            if half < min_half {
                return Err(Error::BadParams(format!(
                    "variant {variant:?} needs L/2 >= {min_half} (got L={length})"
                )));
            }
            rooted_shapes(size)
                .into_iter()
                .filter(|s| shape_height(s) <= half)
                .collect()
        }
        Variant::C => {
            if radius < 1 || radius >= usize::BITS as usize || half + 1 < (1usize << radius) {
                return Err(Error::BadParams(format!(
                    "variant C needs radius >= 1 and L/2 >= 2^radius - 1 (got L={length}, radius={radius})"
                )));
            }
            vec![ball_shape(radius)]
        }
    };
    for shape in candidates {
        let tree = caterpillar(length, &shape)?;
        if (steklov_eigenvalue(&tree, 2)? - target).abs() <= 1e-9 {
            return Ok(tree);
        }
    }
    Err(Error::NoExtremalShapeFound)
}

/// Number of Prüfer draws before falling back to sequential attachment.
pub const PRUFER_DRAW_CAP: usize = 1_000_000;

fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &a in seq {
        degree[a] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &a in seq {
        let Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf, a));
        degree[a] -= 1;
        if degree[a] == 1 {
            leaves.push(Reverse(a));
        }
    }
    let Reverse(u) = leaves.pop().expect("two leaves remain");
    let Reverse(v) = leaves.pop().expect("two leaves remain");
    edges.push((u, v));
    edges
}

fn sequential_attachment(n: usize, max_degree: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    for v in 1..n {
        let open: Vec<usize> = (0..v).filter(|&u| degree[u] < max_degree).collect();
        let u = open[rng.gen_range(0..open.len())];
        degree[u] += 1;
        degree[v] += 1;
        edges.push((u, v));
    }
    edges
}

/// Random tree from a uniform Prüfer sequence, resampled until every degree is at most `max_degree`.
///
/// A cap of 2 forces a path, which rejection almost never hits for larger n,
/// so that case goes straight to sequential attachment.
pub fn gen_random_tree(n: usize, max_degree: usize, seed: u64) -> Result<BoundaryTree> {
    if max_degree < 2 {
        return Err(Error::InfeasibleDegreeCap(max_degree));
    }
    if n < 3 {
        return Err(Error::BadParams(format!(
            "random tree needs n >= 3 (got {n})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if max_degree > 2 || n == 3 {
        let mut seq = vec![0usize; n - 2];
        let mut count = vec![0usize; n];
        for _ in 0..PRUFER_DRAW_CAP {
            count.iter_mut().for_each(|c| *c = 0);
            let mut ok = true;
            for s in seq.iter_mut() {
                *s = rng.gen_range(0..n);
                count[*s] += 1;
                if count[*s] + 1 > max_degree {
                    ok = false;
                }
            }
            if ok {
                return BoundaryTree::from_edges(&prufer_decode(&seq, n));
            }
        }
    }
    BoundaryTree::from_edges(&sequential_attachment(n, max_degree, &mut rng))
}

/// Random tree whose interior vertices all have degree at least 3, grown by
/// expanding random leaves into 2..=D-1 new leaves.
pub fn gen_random_interior3(n_target: usize, max_degree: usize, seed: u64) -> Result<BoundaryTree> {
    if max_degree < 3 {
        return Err(Error::BadParams(format!(
            "interior degree >= 3 needs max_degree >= 3 (got {max_degree})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = if n_target <= 4 {
        3
    } else {
        rng.gen_range(3..=max_degree.min(n_target - 1))
    };
    let mut edges: Vec<_> = (1..=first).map(|v| (0, v)).collect();
    let mut leaves: Vec<usize> = (1..=first).collect();
    let mut count = first + 1;
    while n_target >= count + 2 {
        let slot = rng.gen_range(0..leaves.len());
        let v = leaves.swap_remove(slot);
        let j = rng.gen_range(2..=(max_degree - 1).min(n_target - count));
        for _ in 0..j {
            edges.push((v, count));
            leaves.push(count);
            count += 1;
        }
    }
    BoundaryTree::from_edges(&edges)
}
