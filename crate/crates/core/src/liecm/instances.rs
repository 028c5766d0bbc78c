//! Shipped crossed modules and the JSON definition format.

use serde::{Deserialize, Serialize};

use super::{check_crossed_module, CmError, CrossedModule, LieAlgebraSpec, Sector, TauKind};
use crate::matrix::{q, QMat};
use crate::Q;

pub const CM_SCHEMA: &str = "twobundle-cm/1";

fn unit(n: usize, i: usize, j: usize) -> QMat {
    QMat::unit(n, i, j)
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn dir(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| q(x)).collect()
}

fn b2(n: usize) -> Vec<QMat> {
    // span(1_2, e11, e12) placed in the top-left 2x2 block
    let mut id2 = QMat::zero(n);
    id2[(0, 0)] = q(1);
    id2[(1, 1)] = q(1);
    vec![id2, unit(n, 0, 0), unit(n, 0, 1)]
}

/// Ordinary gauge theory: `G = B_2` (upper triangular 2x2), `E` trivial.
pub fn cm_t() -> CrossedModule {
    let g = LieAlgebraSpec::from_reps("g", names(&["E0", "H", "N"]), b2(2), 2).unwrap();
    let e = LieAlgebraSpec::from_reps("e", vec![], vec![], 2).unwrap();
    let sector = Sector { p_dirs: vec![], g_dirs: vec![dir(&[0, 0, 1])], j_dirs: vec![] };
    CrossedModule::new("CM-T", 2, g, e, TauKind::Trivial, vec![vec![]; 3], Some(sector)).unwrap()
}

/// Conjugation crossed module: `E = G = B_2`, `tau = id`.
pub fn cm_c() -> CrossedModule {
    let g = LieAlgebraSpec::from_reps("g", names(&["E0", "H", "N"]), b2(2), 2).unwrap();
    let e = LieAlgebraSpec::from_reps("e", names(&["E0", "H", "N"]), b2(2), 2).unwrap();
    let id = (0..3).map(|a| (0..3).map(|b| q((a == b) as i64)).collect()).collect();
    // N commutes with E0 and N, so exp(N) and e^{E0}-type bodies fix P along N.
    let sector = Sector {
        p_dirs: vec![dir(&[0, 0, 1])],
        g_dirs: vec![dir(&[1, 0, 0]), dir(&[0, 0, 1])],
        j_dirs: vec![dir(&[1, 0, 0]), dir(&[0, 0, 1])],
    };
    CrossedModule::new("CM-C", 2, g, e, TauKind::Inclusion, id, Some(sector)).unwrap()
}

/// Affine crossed module: `G = B_2` acting linearly on `E = R^2`, `tau` trivial.
pub fn cm_a() -> CrossedModule {
    let g = LieAlgebraSpec::from_reps("g", names(&["E0", "H", "N"]), b2(3), 3).unwrap();
    let e = LieAlgebraSpec::from_reps("e", names(&["Y1", "Y2"]), vec![unit(3, 0, 2), unit(3, 1, 2)], 3).unwrap();
    // diag(0,1,0) and e12 fix e13 under conjugation
    let sector = Sector {
        p_dirs: vec![dir(&[1, 0])],
        g_dirs: vec![dir(&[1, -1, 0]), dir(&[0, 0, 1])],
        j_dirs: vec![dir(&[1, 0]), dir(&[0, 1])],
    };
    CrossedModule::new("CM-A", 3, g, e, TauKind::Trivial, vec![vec![q(0); 2]; 3], Some(sector)).unwrap()
}

/// Translation ideal: `G` the affine-type group with Lie algebra
/// `span(e11, e12, e13, e23)`, `E` its translations, `tau` the inclusion.
pub fn cm_h() -> CrossedModule {
    let g = LieAlgebraSpec::from_reps(
        "g",
        names(&["A", "B", "T1", "T2"]),
        vec![unit(3, 0, 0), unit(3, 0, 1), unit(3, 0, 2), unit(3, 1, 2)],
        3,
    )
    .unwrap();
    let e = LieAlgebraSpec::from_reps("e", names(&["Y1", "Y2"]), vec![unit(3, 0, 2), unit(3, 1, 2)], 3).unwrap();
    let tau_dot = vec![dir(&[0, 0]), dir(&[0, 0]), dir(&[1, 0]), dir(&[0, 1])];
    let sector = Sector {
        p_dirs: vec![dir(&[1, 0])],
        g_dirs: vec![dir(&[0, 1, 0, 0]), dir(&[0, 0, 1, 0]), dir(&[0, 0, 0, 1])],
        j_dirs: vec![dir(&[1, 0]), dir(&[0, 1])],
    };
    CrossedModule::new("CM-H", 3, g, e, TauKind::Inclusion, tau_dot, Some(sector)).unwrap()
}

pub fn all() -> Vec<CrossedModule> {
    vec![cm_t(), cm_c(), cm_a(), cm_h()]
}

pub fn by_id(id: &str) -> Option<CrossedModule> {
    match id {
        "CM-T" => Some(cm_t()),
        "CM-C" => Some(cm_c()),
        "CM-A" => Some(cm_a()),
        "CM-H" => Some(cm_h()),
        _ => None,
    }
}

/// Rational in JSON: an integer or a string such as `"-3/4"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QJson {
    Int(i64),
    Str(String),
}

impl QJson {
    pub fn parse(&self) -> Result<Q, CmError> {
        match self {
            QJson::Int(i) => Ok(q(*i)),
            QJson::Str(s) => s.trim().parse::<Q>().map_err(|_| CmError::Schema(format!("bad rational {s:?}"))),
        }
    }

    pub fn from_q(x: &Q) -> QJson {
        match x.to_i64() {
            Some(i) => QJson::Int(i),
            None => QJson::Str(x.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub names: Vec<String>,
    pub matrices: Vec<Vec<Vec<QJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Vec<Vec<Vec<QJson>>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorJson {
    pub p_dirs: Vec<Vec<QJson>>,
    pub g_dirs: Vec<Vec<QJson>>,
    pub j_dirs: Vec<Vec<QJson>>,
}

/// On-disk crossed module. `mu` names the action; only ambient conjugation
/// is supported.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossedModuleJson {
    pub schema: String,
    pub id: String,
    pub ambient: usize,
    pub g: AlgebraJson,
    pub e: AlgebraJson,
    pub tau: TauKind,
    pub tau_dot: Vec<Vec<QJson>>,
    pub mu: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorJson>,
}

fn parse_vec(v: &[QJson]) -> Result<Vec<Q>, CmError> {
    v.iter().map(QJson::parse).collect()
}

fn parse_algebra(name: &str, a: &AlgebraJson, n: usize) -> Result<LieAlgebraSpec, CmError> {
    if a.names.len() != a.matrices.len() {
        return Err(CmError::Schema(format!("{name}: {} names but {} matrices", a.names.len(), a.matrices.len())));
    }
    let mut reps = Vec::new();
    for m in &a.matrices {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(CmError::Schema(format!("{name}: matrices must be {n}x{n}")));
        }
        let rows = m.iter().map(|r| parse_vec(r)).collect::<Result<Vec<_>, _>>()?;
        reps.push(QMat::from_rows(&rows));
    }
    match &a.structure {
        None => LieAlgebraSpec::from_reps(name, a.names.clone(), reps, n),
        Some(c) => {
            let c = c
                .iter()
                .map(|r| r.iter().map(|v| parse_vec(v)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            LieAlgebraSpec::with_structure(name, a.names.clone(), reps, c, n)
        }
    }
}

impl CrossedModuleJson {
    pub fn from_cm(cm: &CrossedModule) -> Self {
        let alg = |a: &LieAlgebraSpec| AlgebraJson {
            names: a.basis_names.clone(),
            matrices: a
                .reps
                .iter()
                .map(|m| (0..cm.n).map(|i| (0..cm.n).map(|j| QJson::from_q(&m[(i, j)])).collect()).collect())
                .collect(),
            structure: Some(
                a.structure
                    .iter()
                    .map(|r| r.iter().map(|v| v.iter().map(QJson::from_q).collect()).collect())
                    .collect(),
            ),
        };
        let vv = |v: &Vec<Vec<Q>>| v.iter().map(|r| r.iter().map(QJson::from_q).collect()).collect();
        CrossedModuleJson {
            schema: CM_SCHEMA.into(),
            id: cm.id.clone(),
            ambient: cm.n,
            g: alg(&cm.g),
            e: alg(&cm.e),
            tau: cm.tau,
            tau_dot: vv(&cm.tau_dot),
            mu: "conjugation".into(),
            sector: cm.sector.as_ref().map(|s| SectorJson {
                p_dirs: vv(&s.p_dirs),
                g_dirs: vv(&s.g_dirs),
                j_dirs: vv(&s.j_dirs),
            }),
        }
    }

    /// Build and fully validate: algebra invariants, sampling support,
    /// crossed-module axioms on three sampled elements.
    pub fn into_cm(self) -> Result<CrossedModule, CmError> {
        if self.schema != CM_SCHEMA {
            return Err(CmError::Schema(format!("expected schema {CM_SCHEMA}, found {}", self.schema)));
        }
        if self.mu != "conjugation" {
            return Err(CmError::Schema(format!("unsupported action {:?}; only \"conjugation\"", self.mu)));
        }
        let n = self.ambient;
        if n == 0 {
            return Err(CmError::Schema("ambient size must be positive".into()));
        }
        let g = parse_algebra("g", &self.g, n)?;
        let e = parse_algebra("e", &self.e, n)?;
        let tau_dot = self.tau_dot.iter().map(|r| parse_vec(r)).collect::<Result<Vec<_>, _>>()?;
        let sector = match &self.sector {
            None => None,
            Some(s) => {
                let pv = |v: &Vec<Vec<QJson>>, d: usize, what: &str| -> Result<Vec<Vec<Q>>, CmError> {
                    let out = v.iter().map(|r| parse_vec(r)).collect::<Result<Vec<_>, _>>()?;
                    if out.iter().any(|r| r.len() != d) {
                        return Err(CmError::Schema(format!("sector.{what} vectors must have length {d}")));
                    }
                    Ok(out)
                };
                Some(Sector {
                    p_dirs: pv(&s.p_dirs, e.dim(), "p_dirs")?,
                    g_dirs: pv(&s.g_dirs, g.dim(), "g_dirs")?,
                    j_dirs: pv(&s.j_dirs, e.dim(), "j_dirs")?,
                })
            }
        };
        let cm = CrossedModule::new(&self.id, n, g, e, self.tau, tau_dot, sector)?;
        cm.validate_sampling()?;
        if cm.tau == TauKind::Inclusion {
            for (b, m) in cm.e.reps.iter().enumerate() {
                if cm.g.coords_q(m).is_none() {
                    return Err(CmError::Axiom(format!("inclusion: e basis {} is not in g", cm.e.basis_names[b])));
                }
            }
        }
        let suite = check_crossed_module(&cm, 3, 0);
        if let Some(f) = suite.failures().next() {
            return Err(CmError::Axiom(format!("{} ({})", f.id, f.anchor)));
        }
        Ok(cm)
    }
}

pub fn load_json(text: &str) -> Result<CrossedModule, CmError> {
    let raw: CrossedModuleJson = serde_json::from_str(text)?;
    raw.into_cm()
}

pub fn to_json(cm: &CrossedModule) -> String {
    serde_json::to_string_pretty(&CrossedModuleJson::from_cm(cm)).expect("crossed module serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_shipped() {
        for cm in all() {
            let back = load_json(&to_json(&cm)).unwrap();
            assert_eq!(back.id, cm.id);
            assert_eq!(back.tau_dot, cm.tau_dot);
            assert_eq!(back.g.structure, cm.g.structure);
            assert_eq!(back.sector, cm.sector);
        }
    }

    #[test]
    fn rejects_bad_structure_constants() {
        let mut j = CrossedModuleJson::from_cm(&cm_c());
        j.g.structure.as_mut().unwrap()[1][2][2] = QJson::Int(-1);
        assert!(matches!(j.into_cm(), Err(CmError::StructureMismatch(_))));
    }

    #[test]
    fn rejects_tau_dot_sign_flip() {
        let mut j = CrossedModuleJson::from_cm(&cm_c());
        j.tau_dot[2][2] = QJson::Int(-1);
        assert!(matches!(j.into_cm(), Err(CmError::Axiom(_))));
    }

    #[test]
    fn rejects_wrong_schema_and_shape() {
        let mut j = CrossedModuleJson::from_cm(&cm_h());
        j.schema = "nope".into();
        assert!(matches!(j.into_cm(), Err(CmError::Schema(_))));
        let mut j = CrossedModuleJson::from_cm(&cm_h());
        j.tau_dot.pop();
        assert!(matches!(j.into_cm(), Err(CmError::Schema(_))));
        assert!(load_json("{\"schema\": 3}").is_err());
    }

    #[test]
    fn rejects_unsampleable_basis() {
        let mut j = CrossedModuleJson::from_cm(&cm_c());
        // so(2)-type generator: neither nilpotent nor integer diagonal
        j.g.names.push("R".into());
        j.g.matrices.push(vec![vec![QJson::Int(0), QJson::Int(-1)], vec![QJson::Int(1), QJson::Int(0)]]);
        j.g.structure = None;
        assert!(j.into_cm().is_err());
    }
}
