//! Seeded verification runs over random trees and decay sweeps over named families.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    asymptotic_decay_check, default_ks, BoundAudit, BoundId, DecayReport, Witness,
};
use crate::config::Tolerances;
use crate::eigen::eigenvalue_oracle;
use crate::error::{Error, Result};
use crate::generators::FamilySpec;
use crate::graph::BoundaryTree;
use crate::harmonic::dtn_matrix_with;
use crate::partition::{partition_k, partition_two, partition_two_optimal};
use crate::spectra::{steklov_spectrum_with, TreeInertia, STRUCTURED_TOL};
use crate::SCHEMA;

/// Trees with more boundary vertices than this skip the dense checks.
pub const DENSE_LIMIT: usize = 400;

/// Failures listed individually in a summary; the rest are only counted.
const FAILURE_LIST_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub max_n: usize,
    pub max_degree: usize,
    pub seed: u64,
    /// Eigenvalue indices for the `LAMK_*` bounds; `None` means 3 and `min(5, |δΩ|)`.
    pub ks: Option<Vec<usize>>,
    #[serde(skip)]
    pub tol: Tolerances,
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::BadParams("trials must be at least 1".into()));
        }
        if self.max_n < 3 {
            return Err(Error::BadParams(format!(
                "max_n = {} is below 3",
                self.max_n
            )));
        }
        if self.max_degree < 2 {
            return Err(Error::InfeasibleDegreeCap(self.max_degree));
        }
        Ok(())
    }

    /// Random Prüfer trials plus `ceil(0.3 trials)` trees with interior degrees at least 3.
    pub fn interior3_trials(&self) -> usize {
        if self.max_degree < 3 {
            0
        } else {
            (3 * self.trials).div_ceil(10)
        }
    }
}

/// One generated tree of a verification run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialSpec {
    pub trial: usize,
    pub family: FamilySpec,
}

/// Draws the family parameters of every trial from a single seeded stream.
pub fn trial_specs(cfg: &VerifyConfig) -> Vec<TrialSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.trials + cfg.interior3_trials());
    for trial in 0..cfg.trials {
        let family = FamilySpec::Random {
            n: rng.gen_range(3..=cfg.max_n),
            max_degree: rng.gen_range(2..=cfg.max_degree),
            seed: rng.gen(),
        };
        out.push(TrialSpec { trial, family });
    }
    for i in 0..cfg.interior3_trials() {
        let family = FamilySpec::RandomInterior3 {
            n: rng.gen_range(4..=cfg.max_n.max(4)),
            max_degree: rng.gen_range(3..=cfg.max_degree),
            seed: rng.gen(),
        };
        out.push(TrialSpec {
            trial: cfg.trials + i,
            family,
        });
    }
    out
}

/// Named checks, in report order. `required` checks decide the exit status.
pub const CHECKS: &[(&str, bool)] = &[
    ("dtn_invariants", true),
    ("eigenpair_residuals", true),
    ("oracle_agreement", true),
    ("structured_agreement", true),
    ("partition_two", true),
    ("partition_two_vs_optimal", true),
    ("partition_k", true),
    ("LAM2_BOUNDARY", true),
    ("LAM2_VOLUME", true),
    ("LAM2_DIAMETER", true),
    ("LAMK_BOUNDARY", true),
    ("LAMK_VOLUME", true),
    ("LEMMA_DV", true),
    ("PROP_L", true),
    ("witness_two_level", true),
    ("witness_diameter", true),
    ("witness_multiway", false),
    ("multiway_gradients_disjoint", false),
];

fn check_index(name: &str) -> usize {
    CHECKS
        .iter()
        .position(|(n, _)| *n == name)
        .expect("registered check")
}

/// Outcome of one check on one tree: `None` when it does not apply.
type Outcome = Option<std::result::Result<(), String>>;

struct TrialResult {
    outcomes: Vec<Vec<Outcome>>,
}

impl TrialResult {
    fn new() -> Self {
        TrialResult {
            outcomes: vec![Vec::new(); CHECKS.len()],
        }
    }

    fn record(&mut self, name: &str, outcome: Outcome) {
        self.outcomes[check_index(name)].push(outcome);
    }

    fn pass_if(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.record(name, Some(if ok { Ok(()) } else { Err(detail()) }));
    }

    fn fail(&mut self, name: &str, e: impl ToString) {
        self.record(name, Some(Err(e.to_string())));
    }
}

fn audit_tree(tree: &BoundaryTree, ks: &[usize], tol: &Tolerances) -> TrialResult {
    let mut res = TrialResult::new();
    let m = tree.boundary_count();

    if m <= DENSE_LIMIT {
        dense_checks(tree, tol, &mut res);
    }

    match partition_two(tree) {
        Ok(c) => {
            res.record(
                "partition_two",
                Some(c.verify(tree).map_err(|e| e.to_string())),
            );
            let best = partition_two_optimal(tree);
            res.pass_if(
                "partition_two_vs_optimal",
                best.fractions[0] >= c.fractions[0],
                || {
                    format!(
                        "optimal {} below descent {}",
                        best.fractions[0], c.fractions[0]
                    )
                },
            );
        }
        Err(e) => res.fail("partition_two", e),
    }
    for &k in ks {
        if (3..=m).contains(&k) {
            match partition_k(tree, k) {
                Ok(c) => res.record(
                    "partition_k",
                    Some(c.verify(tree).map_err(|e| format!("k={k}: {e}"))),
                ),
                Err(e) => res.fail("partition_k", format!("k={k}: {e}")),
            }
        }
    }

    let audit = match BoundAudit::new(tree, *tol) {
        Ok(a) => a,
        Err(e) => {
            res.fail("LAM2_BOUNDARY", e);
            return res;
        }
    };
    match audit.all(ks) {
        Ok(reports) => {
            for r in &reports {
                let name = r.bound_id.as_str();
                let outcome = r.holds.map(|h| {
                    if h {
                        Ok(())
                    } else {
                        Err(format!(
                            "{}measured {} > bound {}",
                            r.k.map(|k| format!("k={k}: ")).unwrap_or_default(),
                            r.measured,
                            r.bound_value
                        ))
                    }
                });
                res.record(name, outcome);
                let witness_check = match (r.bound_id, &r.witness) {
                    (BoundId::Lam2Boundary, _) => Some("witness_two_level"),
                    (BoundId::Lam2Diameter, _) => Some("witness_diameter"),
                    (BoundId::LamkBoundary, Some(Witness::Multiway { .. })) => {
                        Some("witness_multiway")
                    }
                    _ => None,
                };
                if let (Some(check), Some(ok)) = (witness_check, r.witness_consistent) {
                    let rq = r.witness.as_ref().and_then(Witness::rayleigh);
                    res.pass_if(check, ok, || {
                        format!(
                            "{}R = {:?}, eigenvalue {}, bound {}",
                            r.k.map(|k| format!("k={k}: ")).unwrap_or_default(),
                            rq,
                            r.measured,
                            r.bound_value
                        )
                    });
                }
                if let Some(Witness::Multiway {
                    gradients_disjoint, ..
                }) = &r.witness
                {
                    res.pass_if("multiway_gradients_disjoint", *gradients_disjoint, || {
                        format!("k={:?}: two functions share a gradient edge", r.k)
                    });
                }
            }
        }
        Err(e) => res.fail("LAM2_BOUNDARY", e),
    }
    res
}

fn dense_checks(tree: &BoundaryTree, tol: &Tolerances, res: &mut TrialResult) {
    let dtn = match dtn_matrix_with(tree, tol) {
        Ok(d) => d,
        Err(e) => return res.fail("dtn_invariants", e),
    };
    let spectrum = match steklov_spectrum_with(tree, tol) {
        Ok(s) => s,
        Err(e) => return res.fail("dtn_invariants", e),
    };
    let diag = spectrum.diagnostics();
    let in_range =
        diag.lambda_min >= -tol.psd && diag.lambda_max <= 1.0 + tol.psd && diag.lambda_2 > 0.0;
    res.pass_if("dtn_invariants", in_range, || {
        format!(
            "spectrum [{:e}, {:e}], lambda_2 = {:e}",
            diag.lambda_min, diag.lambda_max, diag.lambda_2
        )
    });
    res.record(
        "eigenpair_residuals",
        Some(diag.check(tol).map_err(|e| e.to_string())),
    );

    let mut worst_oracle = 0.0f64;
    let mut worst_structured = 0.0f64;
    let inertia = TreeInertia::new(tree);
    for (i, &lam) in spectrum.eigenvalues.iter().enumerate() {
        match eigenvalue_oracle(dtn.matrix(), i + 1) {
            Ok(o) => worst_oracle = worst_oracle.max((o - lam).abs()),
            Err(e) => return res.fail("oracle_agreement", e),
        }
        match inertia.eigenvalue(i + 1, STRUCTURED_TOL) {
            Ok(s) => worst_structured = worst_structured.max((s - lam).abs()),
            Err(e) => return res.fail("structured_agreement", e),
        }
    }
    res.pass_if("oracle_agreement", worst_oracle <= tol.eigen, || {
        format!("max deviation {worst_oracle:e}")
    });
    res.pass_if(
        "structured_agreement",
        worst_structured <= tol.eigen,
        || format!("max deviation {worst_structured:e}"),
    );
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckTally {
    pub check: &'static str,
    pub required: bool,
    pub passed: usize,
    pub failed: usize,
    /// Trees where the check did not apply.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub tree: String,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub schema: &'static str,
    pub config: VerifyConfig,
    pub trees: usize,
    pub checks: Vec<CheckTally>,
    pub failures: Vec<Failure>,
    pub failures_total: usize,
    pub passed: bool,
}

impl VerifySummary {
    pub fn tally(&self, check: &str) -> Option<&CheckTally> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "check,required,passed,failed,skipped")?;
        for c in &self.checks {
            writeln!(
                out,
                "{},{},{},{},{}",
                c.check, c.required, c.passed, c.failed, c.skipped
            )?;
        }
        Ok(())
    }
}

/// Builds and audits every trial tree in parallel; results are merged in trial order.
pub fn verify(cfg: &VerifyConfig) -> Result<VerifySummary> {
    cfg.validate()?;
    let specs = trial_specs(cfg);
    let results: Vec<(usize, String, std::result::Result<TrialResult, Error>)> = specs
        .par_iter()
        .map(|s| {
            let label = s.family.label();
            let res = s.family.build().map(|tree| {
                let ks = cfg.ks.clone().unwrap_or_else(|| default_ks(&tree));
                audit_tree(&tree, &ks, &cfg.tol)
            });
            (s.trial, label, res)
        })
        .collect();

    let mut checks: Vec<CheckTally> = CHECKS
        .iter()
        .map(|&(check, required)| CheckTally {
            check,
            required,
            passed: 0,
            failed: 0,
            skipped: 0,
        })
        .collect();
    let mut failures = Vec::new();
    let mut failures_total = 0;
    let mut passed = true;
    for (trial, label, res) in results {
        let res = match res {
            Ok(r) => r,
            Err(e) => {
                passed = false;
                failures_total += 1;
                failures.push(Failure {
                    trial,
                    tree: label,
                    check: "generate",
                    detail: e.to_string(),
                });
                continue;
            }
        };
        for (i, outcomes) in res.outcomes.into_iter().enumerate() {
            let tally = &mut checks[i];
            if outcomes.is_empty() {
                tally.skipped += 1;
            }
            for o in outcomes {
                match o {
                    None => tally.skipped += 1,
                    Some(Ok(())) => tally.passed += 1,
                    Some(Err(detail)) => {
                        tally.failed += 1;
                        if tally.required {
                            passed = false;
                            failures_total += 1;
                            if failures.len() < FAILURE_LIST_LIMIT {
                                failures.push(Failure {
                                    trial,
                                    tree: label.clone(),
                                    check: tally.check,
                                    detail,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(VerifySummary {
        schema: SCHEMA,
        config: cfg.clone(),
        trees: specs.len(),
        checks,
        failures,
        failures_total,
        passed,
    })
}

/// Members of a family up to the given one: balls of radius `1..=r`, paths
/// of length `2..=L`, refined trees `2..=l`, extremal trees of every valid
/// even length up to `L`.
pub fn sweep_members(spec: &FamilySpec) -> Result<Vec<FamilySpec>> {
    let members: Vec<FamilySpec> = match *spec {
        FamilySpec::Ball { degree, r } => (1..=r).map(|r| FamilySpec::Ball { degree, r }).collect(),
        FamilySpec::Path { length } => (2..=length)
            .map(|length| FamilySpec::Path { length })
            .collect(),
        FamilySpec::Refined { l } => (2..=l).map(|l| FamilySpec::Refined { l }).collect(),
        FamilySpec::ExtremalMiddle {
            length,
            variant,
            radius,
        } => (2..=length)
            .step_by(2)
            .map(|length| FamilySpec::ExtremalMiddle {
                length,
                variant,
                radius,
            })
            .filter(|s| s.build().is_ok())
            .collect(),
        FamilySpec::Random { .. } | FamilySpec::RandomInterior3 { .. } => {
            return Err(Error::BadParams(
                "random families have no size sweep".into(),
            ))
        }
    };
    if members.is_empty() {
        return Err(Error::BadParams(format!(
            "{} has no members to sweep",
            spec.label()
        )));
    }
    Ok(members)
}

/// One plot-ready row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tree_id: String,
    pub vertices: usize,
    pub boundary: usize,
    pub max_degree: usize,
    pub diameter: usize,
    pub lambda2: f64,
    pub lam2_boundary: f64,
    pub lam2_diameter: f64,
    /// Empty when some interior vertex has degree below 3.
    pub lam2_volume: Option<f64>,
    pub tightness_boundary: f64,
    pub tightness_diameter: f64,
    pub tightness_volume: Option<f64>,
    pub all_hold: bool,
}

pub const SWEEP_CSV_HEADER: &str = "tree_id,vertices,boundary,max_degree,diameter,lambda2,\
lam2_boundary,lam2_diameter,lam2_volume,tightness_boundary,tightness_diameter,tightness_volume,all_hold";

impl SweepRow {
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e},{},{}",
            self.tree_id,
            self.vertices,
            self.boundary,
            self.max_degree,
            self.diameter,
            self.lambda2,
            self.lam2_boundary,
            self.lam2_diameter,
            opt(self.lam2_volume),
            self.tightness_boundary,
            self.tightness_diameter,
            opt(self.tightness_volume),
            self.all_hold
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub rows: Vec<SweepRow>,
    pub decay: DecayReport,
}

/// Default threshold for the decay check of a sweep.
pub const DECAY_THRESHOLD: f64 = 0.01;

pub fn sweep(spec: &FamilySpec, threshold: f64, tol: &Tolerances) -> Result<SweepReport> {
    let members = sweep_members(spec)?;
    let trees = members
        .iter()
        .map(FamilySpec::build)
        .collect::<Result<Vec<_>>>()?;
    let rows = members
        .par_iter()
        .zip(&trees)
        .map(|(s, t)| {
            let a = BoundAudit::new(t, *tol)?;
            let b = a.lam2_boundary()?;
            let d = a.lam2_diameter()?;
            let v = a.lam2_volume()?;
            Ok(SweepRow {
                tree_id: s.label(),
                vertices: t.vertex_count(),
                boundary: t.boundary_count(),
                max_degree: t.max_degree(),
                diameter: t.diameter().0,
                lambda2: a.lambda2(),
                lam2_boundary: b.bound_value,
                lam2_diameter: d.bound_value,
                lam2_volume: v.preconditions_met.then_some(v.bound_value),
                tightness_boundary: b.tightness,
                tightness_diameter: d.tightness,
                tightness_volume: v.preconditions_met.then_some(v.tightness),
                all_hold: !(b.violated() || d.violated() || v.violated()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decay = asymptotic_decay_check(&trees, threshold, tol)?;
    Ok(SweepReport {
        schema: SCHEMA,
        rows,
        decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trials: usize, seed: u64) -> VerifyConfig {
        VerifyConfig {
            trials,
            max_n: 30,
            max_degree: 5,
            seed,
            ks: None,
            tol: Tolerances::default(),
        }
    }

    #[test]
    fn small_run_passes_and_is_deterministic() {
        let a = verify(&cfg(40, 7)).unwrap();
        assert!(a.passed, "{:#?}", a.failures);
        assert_eq!(a.trees, 52);
        let b = verify(&cfg(40, 7)).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert!(a.tally("LAM2_BOUNDARY").unwrap().passed == 52);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(verify(&cfg(0, 1)), Err(Error::BadParams(_))));
    }

    #[test]
    fn ball_sweep() {
        let rep = sweep(
            &FamilySpec::Ball { degree: 3, r: 8 },
            DECAY_THRESHOLD,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(rep.rows.len(), 8);
        assert!(rep.decay.passed());
        assert!(rep.rows.iter().all(|r| r.all_hold));
        let mut buf = Vec::new();
        rep.rows[0].write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().split(',').count(),
            SWEEP_CSV_HEADER.split(',').count()
        );
    }

    #[test]
    fn random_family_has_no_sweep() {
        let s = FamilySpec::Random {
            n: 10,
            max_degree: 3,
            seed: 0,
        };
        assert!(sweep_members(&s).is_err());
    }
}
