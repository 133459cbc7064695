//! The fixed taxonomy of candidate models.
//!
//! 34 candidate dynamic regressions for Y (16 families, each with its
//! admissible augmentation-lag counts) plus the four generating processes
//! for Z. Model numbers follow the `family.aug` convention: the digits
//! before the decimal point identify the family, the digits after it the
//! number of augmentation lags, so logs read like `11.00` or `13.02`.

use std::fmt;
use std::sync::LazyLock;

use crate::dgp::DgpParams;

/// Magnitudes below this are treated as zero when classifying a parameter
/// vector (explicit sentinel flags override this).
pub const ZERO_TOL: f64 = 1e-7;

/// Regressor roles of the most general equation for delta-Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Constant term (b1).
    Intercept,
    /// Deterministic time trend t (b2).
    Trend,
    /// Lagged level Y_{t-1} (b3).
    LagLevelY,
    /// Delta Y_{t-1} (b4).
    DiffY1,
    /// Delta Y_{t-2} (b5).
    DiffY2,
    /// Current level Z_t (b6).
    Z,
    /// Current difference Delta Z_t (b7).
    DiffZ0,
    /// Delta Z_{t-1} (b8).
    DiffZ1,
    /// Delta Z_{t-2} (b9).
    DiffZ2,
    /// Error-correction term Y_{t-1} - (c1 + c2 Z_{t-1}) (b10).
    ErrorCorrection,
}

pub const ALL_ROLES: [Role; 10] = [
    Role::Intercept,
    Role::Trend,
    Role::LagLevelY,
    Role::DiffY1,
    Role::DiffY2,
    Role::Z,
    Role::DiffZ0,
    Role::DiffZ1,
    Role::DiffZ2,
    Role::ErrorCorrection,
];

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Intercept => "intercept",
            Role::Trend => "trend",
            Role::LagLevelY => "y_lag1",
            Role::DiffY1 => "dy_lag1",
            Role::DiffY2 => "dy_lag2",
            Role::Z => "z",
            Role::DiffZ0 => "dz",
            Role::DiffZ1 => "dz_lag1",
            Role::DiffZ2 => "dz_lag2",
            Role::ErrorCorrection => "ec",
        }
    }
}

/// How Y and Z are related under a given model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationType {
    /// Relation in levels.
    A,
    /// Relation only in first differences.
    B,
    /// Mixed relation (neither purely in levels nor purely in differences).
    C,
    /// No relation among those considered.
    D,
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            RelationType::A => 'A',
            RelationType::B => 'B',
            RelationType::C => 'C',
            RelationType::D => 'D',
        };
        write!(f, "{c}")
    }
}

/// Relation type of a family (total over 1..=16).
pub fn family_relation(family: u8) -> RelationType {
    match family {
        1..=6 => RelationType::D,
        7..=10 => RelationType::B,
        11..=14 => RelationType::A,
        15 | 16 => RelationType::C,
        _ => panic!("family out of range: {family}"),
    }
}

/// Augmentation-lag counts under which a family appears in the taxonomy.
pub fn family_aug_lags(family: u8) -> &'static [u8] {
    match family {
        1..=6 => &[0, 1, 2],
        7 | 8 | 11 | 12 => &[0],
        9 | 10 | 13..=16 => &[1, 2],
        _ => panic!("family out of range: {family}"),
    }
}

/// Identifier of one taxonomy row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId {
    family: u8,
    aug_lags: u8,
}

impl ModelId {
    /// Only the (family, aug_lags) pairs present in the taxonomy are
    /// constructible.
    pub fn new(family: u8, aug_lags: u8) -> Option<ModelId> {
        if (1..=16).contains(&family) && family_aug_lags(family).contains(&aug_lags) {
            Some(ModelId { family, aug_lags })
        } else {
            None
        }
    }

    pub fn family(self) -> u8 {
        self.family
    }

    pub fn aug_lags(self) -> u8 {
        self.aug_lags
    }

    pub fn relation(self) -> RelationType {
        family_relation(self.family)
    }

    pub fn is_odd_family(self) -> bool {
        self.family % 2 == 1
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.family, self.aug_lags)
    }
}

/// The generating processes considered for Z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZProcessKind {
    RandomWalk,
    RandomWalkDrift,
    StationaryConstant,
    TrendStationary,
}

impl ZProcessKind {
    /// Classify (m1, m2, m3); `None` when the triple is not one of the four
    /// tabulated processes.
    pub fn from_m(m1: f64, m2: f64, m3: f64) -> Option<ZProcessKind> {
        let m1z = m1.abs() <= ZERO_TOL;
        let m2z = m2.abs() <= ZERO_TOL;
        let unit = (m3 - 1.0).abs() <= ZERO_TOL;
        match (m1z, m2z, unit) {
            (true, true, true) => Some(ZProcessKind::RandomWalk),
            (false, true, true) => Some(ZProcessKind::RandomWalkDrift),
            (false, true, false) => Some(ZProcessKind::StationaryConstant),
            (false, false, false) => Some(ZProcessKind::TrendStationary),
            _ => None,
        }
    }

    /// Whether the process gives Z a deterministic trend (drift counts).
    pub fn has_trend(self) -> bool {
        matches!(self, ZProcessKind::RandomWalkDrift | ZProcessKind::TrendStationary)
    }

    pub fn is_random_walk(self) -> bool {
        matches!(self, ZProcessKind::RandomWalk | ZProcessKind::RandomWalkDrift)
    }
}

/// One taxonomy row: which coefficients are free, which are pinned.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub id: ModelId,
    /// Free coefficients, in the role order of the general equation.
    /// Excludes c1/c2, which the cointegrating-vector stage supplies.
    pub free_coeffs: Vec<Role>,
    /// Constrained coefficients moved to the left side when estimating.
    pub fixed_terms: Vec<(Role, f64)>,
    pub relation: RelationType,
    /// Families 13/14 carry an estimated cointegrating vector.
    pub has_cointegration: bool,
    /// Deepest level lag required (1 + aug_lags, <= 3).
    pub max_lag_needed: u8,
}

impl ModelSpec {
    pub fn uses(&self, role: Role) -> bool {
        self.free_coeffs.contains(&role)
    }

    /// Free-coefficient count entering the information criteria, including
    /// c1 and c2 when an estimated cointegrating vector feeds the model.
    pub fn c_count(&self) -> usize {
        self.free_coeffs.len() + if self.has_cointegration { 2 } else { 0 }
    }
}

fn univariate_lag_roles(aug: u8) -> Vec<Role> {
    match aug {
        0 => vec![],
        1 => vec![Role::DiffY1],
        2 => vec![Role::DiffY1, Role::DiffY2],
        _ => unreachable!(),
    }
}

fn bivariate_lag_roles(aug: u8) -> (Vec<Role>, Vec<Role>) {
    match aug {
        1 => (vec![Role::DiffY1], vec![Role::DiffZ1]),
        2 => (vec![Role::DiffY1, Role::DiffY2], vec![Role::DiffZ1, Role::DiffZ2]),
        _ => unreachable!(),
    }
}

fn build_spec(family: u8, aug: u8) -> ModelSpec {
    let mut free = Vec::new();
    let mut fixed = Vec::new();
    let int = Role::Intercept;
    match family {
        1 => free.extend(univariate_lag_roles(aug)),
        2 => {
            free.push(int);
            free.extend(univariate_lag_roles(aug));
        }
        3 => {
            free.push(int);
            free.push(Role::LagLevelY);
            free.extend(univariate_lag_roles(aug));
        }
        4 => {
            free.push(int);
            free.push(Role::Trend);
            free.push(Role::LagLevelY);
            free.extend(univariate_lag_roles(aug));
        }
        5 => {
            free.push(int);
            free.extend(univariate_lag_roles(aug));
            fixed.push((Role::LagLevelY, -1.0));
        }
        6 => {
            free.push(int);
            free.push(Role::Trend);
            free.extend(univariate_lag_roles(aug));
            fixed.push((Role::LagLevelY, -1.0));
        }
        7 => free.push(Role::DiffZ0),
        8 => {
            free.push(int);
            free.push(Role::DiffZ0);
        }
        9 | 10 => {
            if family == 10 {
                free.push(int);
            }
            let (dy, dz) = bivariate_lag_roles(aug);
            free.extend(dy);
            free.extend(dz);
        }
        11 => {
            free.push(int);
            free.push(Role::Z);
            fixed.push((Role::LagLevelY, -1.0));
        }
        12 => {
            free.push(int);
            free.push(Role::Trend);
            free.push(Role::Z);
            fixed.push((Role::LagLevelY, -1.0));
        }
        13 | 14 => {
            if family == 14 {
                free.push(int);
            }
            let (dy, dz) = bivariate_lag_roles(aug);
            free.extend(dy);
            free.extend(dz);
            free.push(Role::ErrorCorrection);
        }
        15 | 16 => {
            if family == 16 {
                free.push(int);
            }
            free.push(Role::LagLevelY);
            let (dy, dz) = bivariate_lag_roles(aug);
            free.extend(dy);
            free.extend(dz);
        }
        _ => unreachable!(),
    }
    // Keep the role-order convention of the general equation.
    free.sort();
    ModelSpec {
        id: ModelId::new(family, aug).unwrap(),
        free_coeffs: free,
        fixed_terms: fixed,
        relation: family_relation(family),
        has_cointegration: family == 13 || family == 14,
        max_lag_needed: 1 + aug,
    }
}

static MODELS: LazyLock<Vec<ModelSpec>> = LazyLock::new(|| {
    let mut out = Vec::with_capacity(34);
    for family in 1..=16u8 {
        for &aug in family_aug_lags(family) {
            out.push(build_spec(family, aug));
        }
    }
    out
});

/// All 34 taxonomy rows in ascending (family, aug_lags) order.
pub fn list_models() -> &'static [ModelSpec] {
    &MODELS
}

/// Look up the spec for an id.
pub fn model_spec(id: ModelId) -> &'static ModelSpec {
    MODELS
        .iter()
        .find(|m| m.id == id)
        .expect("every constructible ModelId has a spec")
}

/// Prior knowledge about deterministic trends in the variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKnowledge {
    /// Known that neither variable has a trend: odd families only.
    NoneKnownAbsent,
    /// Known that the variables have a trend: even families only.
    KnownPresent,
    /// No prior knowledge: everything is choosable.
    Unknown,
}

/// The identifiers a selection strategy may choose from.
pub fn choosable_set(trend: TrendKnowledge) -> Vec<ModelId> {
    MODELS
        .iter()
        .map(|m| m.id)
        .filter(|id| match trend {
            TrendKnowledge::NoneKnownAbsent => id.is_odd_family(),
            TrendKnowledge::KnownPresent => !id.is_odd_family(),
            TrendKnowledge::Unknown => true,
        })
        .collect()
}

/// Classify a parameter vector into the unique matching taxonomy row, or
/// `None` when no row matches its nonzero pattern.
///
/// Sentinel-flagged values are interpreted at their conceptual value: an
/// eps-substituted b1 counts as zero, an eps-substituted c1 counts as a
/// (tiny) nonzero cointegrating constant, and -0.99999 on b10 counts as -1.
pub fn classify_params(theta: &DgpParams) -> Option<ModelId> {
    let b = theta.conceptual_b();
    let coint = theta.concept_b10_nonzero();
    let c1_nonzero = theta.concept_c1_nonzero();
    let c2_nonzero = theta.c2.abs() > ZERO_TOL;

    let role_value = |r: Role| -> f64 {
        match r {
            Role::Intercept => b[0],
            Role::Trend => b[1],
            Role::LagLevelY => b[2],
            Role::DiffY1 => b[3],
            Role::DiffY2 => b[4],
            Role::Z => b[5],
            Role::DiffZ0 => b[6],
            Role::DiffZ1 => b[7],
            Role::DiffZ2 => b[8],
            Role::ErrorCorrection => b[9],
        }
    };

    'next_model: for spec in MODELS.iter() {
        for &role in &ALL_ROLES {
            let v = role_value(role);
            if let Some(&(_, fixed)) = spec.fixed_terms.iter().find(|(r, _)| *r == role) {
                // Families with a pinned -1 on the lagged level.
                if (v - fixed).abs() > ZERO_TOL {
                    continue 'next_model;
                }
            } else if spec.uses(role) {
                if v.abs() <= ZERO_TOL {
                    continue 'next_model;
                }
                // A free lagged-level coefficient excludes the unit-root and
                // white-noise boundary values.
                if role == Role::LagLevelY && ((v + 1.0).abs() <= ZERO_TOL || v <= -2.0 || v >= 0.0)
                {
                    continue 'next_model;
                }
            } else if v.abs() > ZERO_TOL {
                continue 'next_model;
            }
        }
        // Cointegrating-vector constants.
        if spec.has_cointegration {
            if !coint || !c1_nonzero || !c2_nonzero {
                continue 'next_model;
            }
        } else if c1_nonzero || c2_nonzero {
            continue 'next_model;
        }
        return Some(spec.id);
    }
    None
}
