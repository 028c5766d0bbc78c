//! JSON scenarios for the cocycle driver. A scenario fixes a cover, a
//! paracocycle on it and a history of transforms and equivalences, all
//! replayed from seeds, plus optional pending actions for the driver.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle::{
    audit_cover, build_paracocycle, build_paraequivalence, compare_base_cocycles, constructed_base_cocycle, derive_base_cocycle,
    equivalence_check, invert_paraequivalence, random_equivalence_data, same_paracocycle, specialty_suite, transform_paracocycle,
    transitivity_check, CocycleError, CoverModel, Fixture, Paracocycle, Paraequivalence,
};
use crate::liecm::CrossedModule;
use crate::report::{Check, Report, Suite};
use crate::tamper::Tamper;

pub const SCENARIO_SCHEMA: &str = "twobundle-scenario/1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Cocycle(#[from] CocycleError),
}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Paracocycle,
    Paraequivalence,
    Equivalence,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [ScenarioKind::Paracocycle, ScenarioKind::Paraequivalence, ScenarioKind::Equivalence];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Step {
    /// Gauge transform by the paraequivalence drawn from `seed` (or its inverse).
    Transform {
        seed: u64,
        #[serde(default)]
        inverse: bool,
    },
    /// Pass to the equivalent paracocycle with overlap data drawn from `seed`.
    Equivalence { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    /// Shipped crossed-module id, or a path to a crossed-module file.
    pub cm: String,
    pub patches: usize,
    pub truncation: u16,
    pub samples: usize,
    pub seed: u64,
    pub fixture: Fixture,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tamper: Option<Tamper>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<Step>,
    /// Seed of a paraequivalence awaiting `transform`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paraequivalence: Option<u64>,
    /// Seed of equivalence data awaiting `equivalence`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<u64>,
}

impl Scenario {
    pub fn new(cm: impl Into<String>, patches: usize, seed: u64, fixture: Fixture) -> Scenario {
        Scenario {
            schema: SCENARIO_SCHEMA.into(),
            cm: cm.into(),
            patches,
            truncation: crate::dga::DEFAULT_TRUNCATION,
            samples: 2,
            seed,
            fixture,
            tamper: None,
            steps: Vec::new(),
            paraequivalence: None,
            equivalence: None,
        }
    }

    /// A reproducible scenario of the given kind on a generic 3-patch cover.
    pub fn random(kind: ScenarioKind, cm: impl Into<String>, seed: u64) -> Scenario {
        let mut sc = Scenario::new(cm, 3, seed, Fixture::Generic);
        match kind {
            ScenarioKind::Paracocycle => {}
            ScenarioKind::Paraequivalence => sc.paraequivalence = Some(seed.wrapping_mul(31).wrapping_add(1)),
            ScenarioKind::Equivalence => sc.equivalence = Some(seed.wrapping_mul(31).wrapping_add(2)),
        }
        sc
    }

    pub fn from_json(text: &str) -> Result<Scenario> {
        let sc: Scenario = serde_json::from_str(text)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCENARIO_SCHEMA {
            return Err(ScenarioError::Schema(format!("expected schema {SCENARIO_SCHEMA:?}, found {:?}", self.schema)));
        }
        if self.patches == 0 {
            return Err(ScenarioError::Schema("a cover needs at least one patch".into()));
        }
        if self.truncation < 4 {
            return Err(ScenarioError::Schema(format!("truncation degree {} is below the minimum of 4", self.truncation)));
        }
        if self.samples == 0 {
            return Err(ScenarioError::Schema("at least one sample is required".into()));
        }
        Ok(())
    }

    fn report(&self, cm: &CrossedModule) -> Report {
        Report::new(cm.id.clone(), self.truncation, self.seed, self.samples)
    }
}

fn prefixed(s: &mut Suite, prefix: &str, from: Suite) {
    for c in from.checks {
        s.push(Check { id: format!("{prefix}{}", c.id), ..c });
    }
}

/// A scenario's cover and paracocycle after replaying its steps.
pub struct Replay {
    pub cover: CoverModel,
    pub paracocycle: Paracocycle,
    /// Audits produced while building and replaying.
    pub history: Suite,
}

fn paraequivalence_from_seed(c: &mut CoverModel, p: &Paracocycle, fixture: Fixture, seed: u64) -> Result<(Paraequivalence, Suite)> {
    c.reseed(seed);
    let qs = c.random_paraequivalence_seeds(fixture)?;
    Ok(build_paraequivalence(c, p, &qs)?)
}

pub fn replay(sc: &Scenario, cm: CrossedModule) -> Result<Replay> {
    sc.validate()?;
    let mut c = CoverModel::skeleton(cm, sc.patches, sc.truncation, sc.samples, sc.seed)?;
    let seeds = c.random_cover_seeds(sc.fixture)?;
    c.install(&seeds)?;
    c.store.tamper = sc.tamper;
    let mut history = Suite::new("history");
    history.extend(audit_cover(&c)?.checks);
    let overlaps = c.random_overlap_seeds(sc.fixture)?;
    let (mut p, audit) = build_paracocycle(&c, &overlaps)?;
    history.extend(audit.checks);
    for (n, step) in sc.steps.iter().enumerate() {
        match *step {
            Step::Transform { seed, inverse } => {
                let (mut q, _) = paraequivalence_from_seed(&mut c, &p, sc.fixture, seed)?;
                if inverse {
                    q = invert_paraequivalence(&c, &q)?;
                }
                let (next, audit) = transform_paracocycle(&c, &p, &q)?;
                prefixed(&mut history, &format!("step{n}."), audit);
                p = next;
            }
            Step::Equivalence { seed } => {
                c.reseed(seed);
                let tb = random_equivalence_data(&mut c)?;
                let (next, _, audit) = equivalence_check(&c, &p, None, &tb)?;
                prefixed(&mut history, &format!("step{n}."), audit);
                p = next;
            }
        }
    }
    Ok(Replay { cover: c, paracocycle: p, history })
}

/// Full audit of the scenario's current paracocycle: cover, history, barred
/// data by both routes, base identities, specialty and any pending
/// paraequivalence.
pub fn check(sc: &Scenario, cm: CrossedModule) -> Result<Report> {
    let mut report = sc.report(&cm);
    let Replay { mut cover, paracocycle: p, history } = replay(sc, cm)?;
    report.suites.push(history);
    let (stripped, base) = derive_base_cocycle(&cover, &p)?;
    report.suites.push(base);
    report.suites.push(compare_base_cocycles(&cover, &constructed_base_cocycle(&p), &stripped));
    let q = match sc.paraequivalence {
        Some(seed) => {
            let (q, audit) = paraequivalence_from_seed(&mut cover, &p, sc.fixture, seed)?;
            report.suites.push(audit);
            Some(q)
        }
        None => None,
    };
    if sc.fixture != Fixture::Generic {
        report.suites.push(specialty_suite(&cover, &p, q.as_ref())?);
    }
    Ok(report)
}

/// Transform by the pending (or given) paraequivalence. The report holds the
/// paraequivalence audit, the audit of the transformed paracocycle and the
/// round trip back by the inverse; the returned scenario records the step.
pub fn transform(sc: &Scenario, cm: CrossedModule, seed: Option<u64>, inverse: bool) -> Result<(Report, Scenario)> {
    let seed = seed
        .or(sc.paraequivalence)
        .ok_or_else(|| ScenarioError::Schema("no paraequivalence seed given and none pending".into()))?;
    let mut report = sc.report(&cm);
    let Replay { mut cover, paracocycle: p, .. } = replay(sc, cm)?;
    let (mut q, audit) = paraequivalence_from_seed(&mut cover, &p, sc.fixture, seed)?;
    report.suites.push(audit);
    if inverse {
        q = invert_paraequivalence(&cover, &q)?;
    }
    let (p1, audit) = transform_paracocycle(&cover, &p, &q)?;
    let mut transformed = Suite::new("transformed");
    transformed.extend(audit.checks);
    report.suites.push(transformed);
    let (back, _) = transform_paracocycle(&cover, &p1, &invert_paraequivalence(&cover, &q)?)?;
    report.suites.push(same_paracocycle(&cover, "roundtrip", &p, &back));
    let mut out = sc.clone();
    out.steps.push(Step::Transform { seed, inverse });
    out.paraequivalence = None;
    Ok((report, out))
}

/// Pass to the equivalent paracocycle by the pending (or given) data; also
/// checks transitivity against a second draw.
pub fn equivalence(sc: &Scenario, cm: CrossedModule, seed: Option<u64>) -> Result<(Report, Scenario)> {
    let seed = seed
        .or(sc.equivalence)
        .ok_or_else(|| ScenarioError::Schema("no equivalence seed given and none pending".into()))?;
    let mut report = sc.report(&cm);
    let Replay { mut cover, paracocycle: p, .. } = replay(sc, cm)?;
    cover.reseed(seed);
    let tb1 = random_equivalence_data(&mut cover)?;
    let tb2 = random_equivalence_data(&mut cover)?;
    let q = match sc.paraequivalence {
        Some(s) => Some(paraequivalence_from_seed(&mut cover, &p, sc.fixture, s)?.0),
        None => None,
    };
    let (_, _, s) = equivalence_check(&cover, &p, q.as_ref(), &tb1)?;
    report.suites.push(s);
    report.suites.push(transitivity_check(&cover, &p, &tb1, &tb2)?);
    let mut out = sc.clone();
    out.steps.push(Step::Equivalence { seed });
    out.equivalence = None;
    Ok((report, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liecm::instances::{cm_a, cm_t};

    #[test]
    fn json_round_trip_and_validation() {
        let mut sc = Scenario::random(ScenarioKind::Paraequivalence, "CM-T", 4);
        sc.steps.push(Step::Transform { seed: 1, inverse: true });
        sc.steps.push(Step::Equivalence { seed: 2 });
        assert_eq!(Scenario::from_json(&sc.to_json()).unwrap(), sc);
        let bad = sc.to_json().replace("\"patches\": 3", "\"patches\": 0");
        assert!(matches!(Scenario::from_json(&bad), Err(ScenarioError::Schema(_))));
        let extra = sc.to_json().replacen('{', "{\"color\": 1,", 1);
        assert!(matches!(Scenario::from_json(&extra), Err(ScenarioError::Json(_))));
    }

    #[test]
    fn one_patch_checks() {
        let sc = Scenario { samples: 1, ..Scenario::new("CM-A", 1, 5, Fixture::Generic) };
        assert!(check(&sc, cm_a()).unwrap().passed());
    }

    #[test]
    fn transform_then_inverse_step_restores() {
        let sc = Scenario { samples: 1, ..Scenario::random(ScenarioKind::Paraequivalence, "CM-T", 8) };
        let (r, out) = transform(&sc, cm_t(), None, false).unwrap();
        assert!(r.passed());
        assert!(r.find("roundtrip.T.01").is_some_and(|c| c.passed));
        let Step::Transform { seed, .. } = out.steps[0] else { unreachable!() };
        let (r, back) = transform(&out, cm_t(), Some(seed), true).unwrap();
        assert!(r.passed());
        assert_eq!(back.steps.len(), 2);
        assert!(check(&back, cm_t()).unwrap().passed());
    }

    #[test]
    fn tampered_scenario_fails() {
        let sc = Scenario { samples: 1, tamper: Some(Tamper::TBar), ..Scenario::new("CM-A", 3, 2, Fixture::Generic) };
        let r = check(&sc, cm_a()).unwrap();
        assert!(!r.passed());
    }
}
