//! Upper bounds for Steklov eigenvalues of trees, evaluated against the
//! computed spectrum.
//!
//! Eigenvalue bounds are exact rationals compared with floating eigenvalues
//! under a single slack (`Tolerances::bound`). Inapplicable bounds are
//! reported with `preconditions_met = false` and no verdict.

use std::fmt;
use std::io::Write;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::graph::BoundaryTree;
use crate::partition::{
    diameter_test_function, multiway_test_functions, partition_k, partition_two, ratio_to_f64,
    two_level_test_function, Fraction, PartSplit, PartitionCertificate,
};
use crate::spectra::{rayleigh_quotient, TreeInertia, STRUCTURED_TOL};
use crate::SCHEMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundId {
    Lam2Boundary,
    Lam2Volume,
    Lam2Diameter,
    LamkBoundary,
    LamkVolume,
    LemmaDv,
    PropL,
}

impl BoundId {
    pub const ALL: [BoundId; 7] = [
        BoundId::Lam2Boundary,
        BoundId::Lam2Volume,
        BoundId::Lam2Diameter,
        BoundId::LamkBoundary,
        BoundId::LamkVolume,
        BoundId::LemmaDv,
        BoundId::PropL,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Lam2Boundary => "LAM2_BOUNDARY",
            BoundId::Lam2Volume => "LAM2_VOLUME",
            BoundId::Lam2Diameter => "LAM2_DIAMETER",
            BoundId::LamkBoundary => "LAMK_BOUNDARY",
            BoundId::LamkVolume => "LAMK_VOLUME",
            BoundId::LemmaDv => "LEMMA_DV",
            BoundId::PropL => "PROP_L",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn ser_opt_fraction<S: Serializer>(
    r: &Option<Fraction>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

/// Evidence attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Two-level function on a single edge cut.
    TwoLevel {
        certificate: PartitionCertificate,
        values: Vec<f64>,
        rayleigh: f64,
    },
    /// Function constant on the branches of a diameter path.
    Diameter {
        path: Vec<usize>,
        branch_counts: Vec<usize>,
        coefficients: Vec<f64>,
        values: Vec<f64>,
        rayleigh: f64,
        /// Necessary condition for `λ₂ = 2/L`: for even `L` only the middle
        /// path vertex carries branches, for odd `L` the tree is a path.
        equality_condition: bool,
    },
    /// One function per part of a k-way partition.
    Multiway {
        certificate: PartitionCertificate,
        splits: Vec<PartSplit>,
        rayleigh: Vec<f64>,
        max_rayleigh: f64,
        supports_disjoint: bool,
        gradients_disjoint: bool,
    },
    /// The construction exists but yields no usable function.
    Unavailable { reason: String },
}

impl Witness {
    /// The witness Rayleigh quotient (the largest one for a family).
    pub fn rayleigh(&self) -> Option<f64> {
        match self {
            Witness::TwoLevel { rayleigh, .. } | Witness::Diameter { rayleigh, .. } => {
                Some(*rayleigh)
            }
            Witness::Multiway { max_rayleigh, .. } => Some(*max_rayleigh),
            Witness::Unavailable { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    /// Eigenvalue index for `LAMK_*` bounds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub bound_value: f64,
    #[serde(serialize_with = "ser_opt_fraction")]
    pub bound_exact: Option<Fraction>,
    pub measured: f64,
    pub tightness: f64,
    /// `None` when the preconditions fail.
    pub holds: Option<bool>,
    pub preconditions_met: bool,
    /// Whether the witness sits between the eigenvalue and the bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_consistent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl BoundReport {
    fn upper(id: BoundId, k: Option<usize>, bound: Fraction, measured: f64, tol: f64) -> Self {
        let b = ratio_to_f64(bound);
        BoundReport {
            bound_id: id,
            k,
            bound_value: b,
            bound_exact: Some(bound),
            measured,
            tightness: measured / b,
            holds: Some(measured <= b + tol),
            preconditions_met: true,
            witness_consistent: None,
            witness: None,
        }
    }

    fn vacuous(mut self) -> Self {
        self.holds = None;
        self.preconditions_met = false;
        self
    }

    /// A failed verdict; reports whose preconditions fail never count as violations.
    pub fn violated(&self) -> bool {
        self.holds == Some(false)
    }
}

fn interior_degrees_at_least_3(tree: &BoundaryTree) -> bool {
    tree.interior().iter().all(|&v| tree.degree(v) >= 3)
}

fn checked_fraction(num: usize, den: usize) -> Result<Fraction> {
    let n =
        i64::try_from(num).map_err(|_| Error::Numerical("bound numerator overflows i64".into()))?;
    let d = i64::try_from(den)
        .map_err(|_| Error::Numerical("bound denominator overflows i64".into()))?;
    Ok(Ratio::new(n, d))
}

/// `8 (D-1)^2 (k-1)` with overflow reported as an error.
fn lamk_numerator(d: usize, k: usize, factor: usize) -> Result<usize> {
    (d - 1)
        .checked_mul(d - 1)
        .and_then(|x| x.checked_mul(k - 1))
        .and_then(|x| x.checked_mul(factor))
        .ok_or_else(|| Error::Numerical("bound numerator overflows".into()))
}

/// Evaluates every bound of one tree, sharing its elimination order.
pub struct BoundAudit<'a> {
    tree: &'a BoundaryTree,
    inertia: TreeInertia<'a>,
    tol: Tolerances,
    lambda2: f64,
}

impl<'a> BoundAudit<'a> {
    pub fn new(tree: &'a BoundaryTree, tol: Tolerances) -> Result<Self> {
        let inertia = TreeInertia::new(tree);
        let lambda2 = inertia.eigenvalue(2, STRUCTURED_TOL)?;
        Ok(BoundAudit {
            tree,
            inertia,
            tol,
            lambda2,
        })
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambda(&self, k: usize) -> Result<f64> {
        if k == 2 {
            return Ok(self.lambda2);
        }
        self.inertia.eigenvalue(k, STRUCTURED_TOL)
    }

    fn lam2_witness_consistent(&self, r: f64, bound: f64) -> bool {
        r >= self.lambda2 - self.tol.bound && r <= bound + self.tol.bound
    }

    pub fn lam2_boundary(&self) -> Result<BoundReport> {
        let t = self.tree;
        let bound = checked_fraction(4 * (t.max_degree() - 1), t.boundary_count())?;
        let mut rep = BoundReport::upper(
            BoundId::Lam2Boundary,
            None,
            bound,
            self.lambda2,
            self.tol.bound,
        );
        let certificate = partition_two(t)?;
        let f = two_level_test_function(t, &certificate)?;
        let rayleigh = rayleigh_quotient(&f)?;
        rep.witness_consistent = Some(self.lam2_witness_consistent(rayleigh, rep.bound_value));
        rep.witness = Some(Witness::TwoLevel {
            certificate,
            values: f.into_values(),
            rayleigh,
        });
        Ok(rep)
    }

    pub fn lam2_volume(&self) -> Result<BoundReport> {
        let t = self.tree;
        let bound = checked_fraction(8 * (t.max_degree() - 1), t.vertex_count() + 2)?;
        let rep = BoundReport::upper(
            BoundId::Lam2Volume,
            None,
            bound,
            self.lambda2,
            self.tol.bound,
        );
        Ok(if interior_degrees_at_least_3(t) {
            rep
        } else {
            rep.vacuous()
        })
    }

    pub fn lam2_diameter(&self) -> Result<BoundReport> {
        let t = self.tree;
        let w = diameter_test_function(t)?;
        let bound = checked_fraction(2, w.length)?;
        let mut rep = BoundReport::upper(
            BoundId::Lam2Diameter,
            None,
            bound,
            self.lambda2,
            self.tol.bound,
        );
        let rayleigh = rayleigh_quotient(&w.function)?;
        rep.witness_consistent = Some(self.lam2_witness_consistent(rayleigh, rep.bound_value));
        let equality_condition = diameter_equality_condition(w.length, &w.branch_counts);
        rep.witness = Some(Witness::Diameter {
            path: w.path,
            branch_counts: w.branch_counts,
            coefficients: w.coefficients,
            values: w.function.into_values(),
            rayleigh,
            equality_condition,
        });
        Ok(rep)
    }

    fn lamk(&self, id: BoundId, k: usize) -> Result<BoundReport> {
        let t = self.tree;
        let m = t.boundary_count();
        let d = t.max_degree();
        let bound = match id {
            BoundId::LamkBoundary => checked_fraction(lamk_numerator(d, k.max(1), 8)?, m)?,
            _ => checked_fraction(lamk_numerator(d, k.max(1), 16)?, t.vertex_count() + 2)?,
        };
        if k < 3 || k > m {
            let mut rep =
                BoundReport::upper(id, Some(k), bound, f64::NAN, self.tol.bound).vacuous();
            rep.tightness = f64::NAN;
            return Ok(rep);
        }
        let measured = self.lambda(k)?;
        let rep = BoundReport::upper(id, Some(k), bound, measured, self.tol.bound);
        if id == BoundId::LamkVolume {
            return Ok(if interior_degrees_at_least_3(t) {
                rep
            } else {
                rep.vacuous()
            });
        }
        self.attach_multiway(rep, k)
    }

    fn attach_multiway(&self, mut rep: BoundReport, k: usize) -> Result<BoundReport> {
        let t = self.tree;
        let certificate = partition_k(t, k)?;
        let family = match multiway_test_functions(t, &certificate) {
            Ok(f) => f,
            Err(Error::PartTooSmall(j)) => {
                rep.witness = Some(Witness::Unavailable {
                    reason: format!(
                        "part {j} has a single boundary vertex and cannot be split; \
                         the bound then exceeds 1 and holds trivially"
                    ),
                });
                return Ok(rep);
            }
            Err(e) => return Err(e),
        };
        let rayleigh = family
            .functions
            .iter()
            .map(rayleigh_quotient)
            .collect::<Result<Vec<f64>>>()?;
        let max_rayleigh = rayleigh.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rep.witness_consistent = Some(
            max_rayleigh <= rep.bound_value + self.tol.bound
                && rep.measured <= max_rayleigh + self.tol.bound,
        );
        rep.witness = Some(Witness::Multiway {
            supports_disjoint: family.supports_disjoint(),
            gradients_disjoint: family.gradients_disjoint(),
            certificate,
            splits: family.splits,
            rayleigh,
            max_rayleigh,
        });
        Ok(rep)
    }

    pub fn lamk_boundary(&self, k: usize) -> Result<BoundReport> {
        self.lamk(BoundId::LamkBoundary, k)
    }

    pub fn lamk_volume(&self, k: usize) -> Result<BoundReport> {
        self.lamk(BoundId::LamkVolume, k)
    }

    /// `|V|/2 + 1 <= |δΩ| <= |V|`; the lower side is the reported bound.
    pub fn lemma_dv(&self) -> BoundReport {
        let t = self.tree;
        let n = t.vertex_count();
        let m = t.boundary_count();
        let lower = Ratio::new(n as i64 + 2, 2);
        let measured = m as f64;
        let exact_m = Ratio::from_integer(m as i64);
        let rep = BoundReport {
            bound_id: BoundId::LemmaDv,
            k: None,
            bound_value: ratio_to_f64(lower),
            bound_exact: Some(lower),
            measured,
            tightness: ratio_to_f64(lower) / measured,
            holds: Some(lower <= exact_m && m <= n),
            preconditions_met: true,
            witness_consistent: None,
            witness: None,
        };
        if interior_degrees_at_least_3(t) {
            rep
        } else {
            rep.vacuous()
        }
    }

    /// `L >= 2 log_D(|V|/4)`, decided exactly as `16 D^L >= |V|^2`.
    pub fn prop_l(&self) -> BoundReport {
        let t = self.tree;
        let (length, _) = t.diameter();
        let d = t.max_degree();
        let n = t.vertex_count();
        let bound = 2.0 * ((n as f64) / 4.0).ln() / (d as f64).ln();
        BoundReport {
            bound_id: BoundId::PropL,
            k: None,
            bound_value: bound,
            bound_exact: None,
            measured: length as f64,
            tightness: bound.max(0.0) / length as f64,
            holds: Some(diameter_volume_inequality(d, length, n)),
            preconditions_met: true,
            witness_consistent: None,
            witness: None,
        }
    }

    /// All reports for this tree, with the `LAMK_*` pair evaluated at each of `ks`.
    pub fn all(&self, ks: &[usize]) -> Result<Vec<BoundReport>> {
        let mut out = vec![
            self.lam2_boundary()?,
            self.lam2_volume()?,
            self.lam2_diameter()?,
        ];
        for &k in ks {
            out.push(self.lamk_boundary(k)?);
            out.push(self.lamk_volume(k)?);
        }
        out.push(self.lemma_dv());
        out.push(self.prop_l());
        Ok(out)
    }
}

/// `16 D^L >= |V|^2` in integers; overflow of the left side means it holds.
pub fn diameter_volume_inequality(d: usize, length: usize, n: usize) -> bool {
    let rhs = (n as u128) * (n as u128);
    let Ok(exp) = u32::try_from(length) else {
        return true;
    };
    match (d as u128).checked_pow(exp).and_then(|p| p.checked_mul(16)) {
        Some(lhs) => lhs >= rhs,
        None => true,
    }
}

/// Necessary condition for `λ₂ = 2/L` given the boundary counts of the
/// branches hanging off the interior path vertices.
pub fn diameter_equality_condition(length: usize, branch_counts: &[usize]) -> bool {
    branch_counts
        .iter()
        .enumerate()
        .all(|(i, &c)| c == 0 || (length.is_multiple_of(2) && i + 1 == length / 2))
}

/// The default `k` values audited for a tree: 3 and `min(5, |δΩ|)`, dropping
/// values below 3.
pub fn default_ks(tree: &BoundaryTree) -> Vec<usize> {
    let mut ks = vec![3, 5.min(tree.boundary_count())];
    ks.retain(|&k| k >= 3);
    ks.sort_unstable();
    ks.dedup();
    ks
}

pub fn bound_lam2_boundary(t: &BoundaryTree) -> Result<BoundReport> {
    BoundAudit::new(t, Tolerances::default())?.lam2_boundary()
}

pub fn bound_lam2_volume(t: &BoundaryTree) -> Result<BoundReport> {
    BoundAudit::new(t, Tolerances::default())?.lam2_volume()
}

pub fn bound_lam2_diameter(t: &BoundaryTree) -> Result<BoundReport> {
    BoundAudit::new(t, Tolerances::default())?.lam2_diameter()
}

/// Errors with `InfeasibleK` outside `3..=|δΩ|`.
pub fn bound_lamk_boundary(t: &BoundaryTree, k: usize) -> Result<BoundReport> {
    check_k(t, k)?;
    BoundAudit::new(t, Tolerances::default())?.lamk_boundary(k)
}

pub fn bound_lamk_volume(t: &BoundaryTree, k: usize) -> Result<BoundReport> {
    check_k(t, k)?;
    BoundAudit::new(t, Tolerances::default())?.lamk_volume(k)
}

fn check_k(t: &BoundaryTree, k: usize) -> Result<()> {
    let m = t.boundary_count();
    if k < 3 || k > m {
        return Err(Error::InfeasibleK { k, lo: 3, hi: m });
    }
    Ok(())
}

pub fn lemma_dv_check(t: &BoundaryTree) -> Result<BoundReport> {
    Ok(BoundAudit::new(t, Tolerances::default())?.lemma_dv())
}

pub fn prop_l_check(t: &BoundaryTree) -> Result<BoundReport> {
    Ok(BoundAudit::new(t, Tolerances::default())?.prop_l())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayMember {
    pub vertices: usize,
    pub diameter: usize,
    pub lambda2: f64,
    pub diameter_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub members: Vec<DecayMember>,
    pub threshold: f64,
    /// `λ₂ <= 2/L` for every member.
    pub within_diameter_bound: bool,
    /// `λ₂` strictly decreases along the family.
    pub monotone: bool,
    /// `λ₂` of the largest member is at most the threshold.
    pub below_threshold: bool,
}

impl DecayReport {
    pub fn passed(&self) -> bool {
        self.within_diameter_bound && self.monotone && self.below_threshold
    }
}

/// Finite check of `λ₂ -> 0` along a family of growing trees.
pub fn asymptotic_decay_check(
    family: &[BoundaryTree],
    threshold: f64,
    tol: &Tolerances,
) -> Result<DecayReport> {
    if family.is_empty() {
        return Err(Error::BadParams("empty family".into()));
    }
    let mut members = Vec::with_capacity(family.len());
    for t in family {
        let (length, _) = t.diameter();
        members.push(DecayMember {
            vertices: t.vertex_count(),
            diameter: length,
            lambda2: TreeInertia::new(t).eigenvalue(2, STRUCTURED_TOL)?,
            diameter_bound: 2.0 / length as f64,
        });
    }
    let within = members
        .iter()
        .all(|m| m.lambda2 <= m.diameter_bound + tol.bound);
    let monotone = members.windows(2).all(|w| w[1].lambda2 < w[0].lambda2);
    let last = members.last().expect("nonempty").lambda2;
    Ok(DecayReport {
        below_threshold: last <= threshold + tol.bound,
        members,
        threshold,
        within_diameter_bound: within,
        monotone,
    })
}

#[derive(Serialize)]
struct ReportDocument<'r> {
    schema: &'static str,
    tree_id: &'r str,
    reports: &'r [BoundReport],
}

/// JSON document with the schema tag.
pub fn reports_to_json(tree_id: &str, reports: &[BoundReport]) -> serde_json::Value {
    serde_json::to_value(ReportDocument {
        schema: SCHEMA,
        tree_id,
        reports,
    })
    .expect("reports serialize")
}

pub const CSV_HEADER: &str = "tree_id,bound_id,k,bound,measured,tightness,holds";

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.12e}")
    } else {
        String::new()
    }
}

/// One CSV row per report. `holds` is `true`, `false` or `n/a`.
pub fn write_csv_rows(
    out: &mut impl Write,
    tree_id: &str,
    reports: &[BoundReport],
) -> std::io::Result<()> {
    for r in reports {
        let holds = match r.holds {
            Some(true) => "true",
            Some(false) => "false",
            None => "n/a",
        };
        writeln!(
            out,
            "{tree_id},{},{},{},{},{},{holds}",
            r.bound_id,
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            csv_float(r.bound_value),
            csv_float(r.measured),
            csv_float(r.tightness),
        )?;
    }
    Ok(())
}
