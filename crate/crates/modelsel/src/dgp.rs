//! Data generation: the true-process parameter vector, its VAR companion
//! form, sample simulation, and the experiment grid of parameter
//! permutations.

use std::io::Write;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::taxonomy::{classify_params, ModelId, ZProcessKind, ZERO_TOL};
use crate::{Error, Result};

/// Literal stand-in for a conceptual zero on b1/c1 in cointegration
/// configurations.
pub const EPS_SENTINEL: f64 = 0.00001;
/// Literal stand-in for b10 = -1.
pub const B10_SENTINEL: f64 = -0.99999;

/// True-process parameters: the ten coefficients of the general delta-Y
/// equation, the cointegrating-vector constants, and the three Z-process
/// coefficients.
///
/// The sentinel flags mark values that were substituted for programming
/// reasons and carry a conceptual value different from the literal one:
/// a flagged b1 or c1 simulates as [`EPS_SENTINEL`] but classifies as zero
/// (b1) or as a nonzero cointegrating constant (c1); a flagged b10
/// simulates as [`B10_SENTINEL`] and classifies as -1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpParams {
    /// b1..b10 of the general equation, in order.
    pub b: [f64; 10],
    pub c1: f64,
    pub c2: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    #[serde(default)]
    pub b1_is_sentinel: bool,
    #[serde(default)]
    pub c1_is_sentinel: bool,
    #[serde(default)]
    pub b10_is_sentinel: bool,
}

impl DgpParams {
    /// All coefficients zero, Z a driftless random walk.
    pub fn zeros() -> DgpParams {
        DgpParams {
            b: [0.0; 10],
            c1: 0.0,
            c2: 0.0,
            m1: 0.0,
            m2: 0.0,
            m3: 1.0,
            b1_is_sentinel: false,
            c1_is_sentinel: false,
            b10_is_sentinel: false,
        }
    }

    /// Coefficient vector at conceptual values (sentinels resolved).
    pub fn conceptual_b(&self) -> [f64; 10] {
        let mut b = self.b;
        if self.b1_is_sentinel {
            b[0] = 0.0;
        }
        if self.b10_is_sentinel {
            b[9] = -1.0;
        }
        b
    }

    pub fn concept_c1_nonzero(&self) -> bool {
        self.c1_is_sentinel || self.c1.abs() > ZERO_TOL
    }

    pub fn concept_b10_nonzero(&self) -> bool {
        self.b10_is_sentinel || self.b[9].abs() > ZERO_TOL
    }

    pub fn z_process(&self) -> Option<ZProcessKind> {
        ZProcessKind::from_m(self.m1, self.m2, self.m3)
    }

    /// Range and consistency checks shared by the generator entry points.
    pub fn validate(&self) -> Result<()> {
        for v in self.b.iter().chain([&self.c1, &self.c2, &self.m1, &self.m2, &self.m3]) {
            if !v.is_finite() {
                return Err(Error::InvalidParams("non-finite parameter".into()));
            }
        }
        if !(-1.0 - 1e-9..=0.0).contains(&self.b[2]) {
            return Err(Error::InvalidParams(format!("b3 = {} outside [-1, 0]", self.b[2])));
        }
        if !(-1.0 - 1e-9..=0.0).contains(&self.b[9]) {
            return Err(Error::InvalidParams(format!("b10 = {} outside [-1, 0]", self.b[9])));
        }
        if !(self.m3 > 0.0 && self.m3 <= 1.0) {
            return Err(Error::InvalidParams(format!("m3 = {} outside (0, 1]", self.m3)));
        }
        if self.b[3] + self.b[4] >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "b4 + b5 = {} must stay below 1",
                self.b[3] + self.b[4]
            )));
        }
        let coint = self.concept_b10_nonzero();
        if !coint && (self.concept_c1_nonzero() || self.c2.abs() > ZERO_TOL) {
            return Err(Error::InvalidParams(
                "c1/c2 must be zero when b10 is zero".into(),
            ));
        }
        if coint && self.c2.abs() <= ZERO_TOL {
            return Err(Error::InvalidParams("c2 must be nonzero when b10 is nonzero".into()));
        }
        Ok(())
    }
}

/// Companion VAR(3) form of the bivariate system, solved for current
/// levels: X_t = psi D_t + M1 X_{t-1} + M2 X_{t-2} + M3 X_{t-3} + S w_t
/// with X = (Y, Z)', D_t = (1, t)' and w = (u, eps)'.
#[derive(Debug, Clone, PartialEq)]
pub struct VarCoefficients {
    pub psi: [[f64; 2]; 2],
    pub m: [[[f64; 2]; 2]; 3],
    pub shock_transform: [[f64; 2]; 2],
}

/// Build the companion form directly from the structural equations.
///
/// The current-value couplings b6 and b7 make the structural system
/// simultaneous in Z_t; premultiplying by (I - N0)^-1 with
/// N0 = [[0, b6 + b7], [0, 0]] resolves it. Literal (sentinel) values are
/// used so the generated data matches the documented substitutions.
pub fn to_var(theta: &DgpParams) -> Result<VarCoefficients> {
    theta.validate()?;
    let [b1, b2, b3, b4, b5, b6, b7, b8, b9, b10] = theta.b;
    let (c1, c2) = (theta.c1, theta.c2);
    let (m1, m2, m3) = (theta.m1, theta.m2, theta.m3);

    let nd = [[b1 - b10 * c1, b2], [m1, m2]];
    let n1 = [[1.0 + b3 + b10 + b4, b8 - b7 - b10 * c2], [0.0, m3]];
    let n2 = [[b5 - b4, b9 - b8], [0.0, 0.0]];
    let n3 = [[-b5, -b9], [0.0, 0.0]];
    // (I - N0)^-1 for N0 = [[0, b6 + b7], [0, 0]].
    let inv = [[1.0, b6 + b7], [0.0, 1.0]];

    let mul = |a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]| -> [[f64; 2]; 2] {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    };

    Ok(VarCoefficients {
        psi: mul(&inv, &nd),
        m: [mul(&inv, &n1), mul(&inv, &n2), mul(&inv, &n3)],
        shock_transform: inv,
    })
}

/// A generated (or loaded) bivariate sample with its presample history and
/// the shock draws that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair {
    /// Levels of Y, presample first, length presample_len + sample_len.
    pub y: Vec<f64>,
    /// Levels of Z, same layout.
    pub z: Vec<f64>,
    /// Y-equation shocks, same layout (empty for loaded data).
    pub shocks_u: Vec<f64>,
    /// Z-equation shocks, same layout (empty for loaded data).
    pub shocks_eps: Vec<f64>,
    pub presample_len: usize,
    pub sample_len: usize,
    /// Stream identifier this pair was drawn with (0 for loaded data).
    pub seed: u64,
}

impl SeriesPair {
    /// Value of Y at sample position `t` (0-based) lagged by `lag`.
    /// Presample observations supply the early lags.
    pub fn y_lag(&self, t: usize, lag: usize) -> f64 {
        self.y[self.presample_len + t - lag]
    }

    pub fn z_lag(&self, t: usize, lag: usize) -> f64 {
        self.z[self.presample_len + t - lag]
    }

    /// The time regressor at sample position `t`: t = 1 on the first
    /// presample observation, so the sample occupies
    /// presample_len + 1 ..= presample_len + sample_len.
    pub fn time_value(&self, t: usize) -> f64 {
        (self.presample_len + t + 1) as f64
    }

    /// Two-column CSV with a presample flag column.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "y,z,presample")?;
        for i in 0..self.y.len() {
            let pre = if i < self.presample_len { 1 } else { 0 };
            writeln!(w, "{},{},{}", self.y[i], self.z[i], pre)?;
        }
        Ok(())
    }

    /// Wrap already-observed data (no presample beyond the reserved lag
    /// rows, no stored shocks).
    pub fn from_observed(y: Vec<f64>, z: Vec<f64>, reserved_lags: usize) -> Result<SeriesPair> {
        if y.len() != z.len() {
            return Err(Error::Domain("y and z must have equal length".into()));
        }
        if y.len() <= reserved_lags {
            return Err(Error::Domain("series shorter than reserved lag rows".into()));
        }
        let sample_len = y.len() - reserved_lags;
        Ok(SeriesPair {
            y,
            z,
            shocks_u: Vec::new(),
            shocks_eps: Vec::new(),
            presample_len: reserved_lags,
            sample_len,
            seed: 0,
        })
    }
}

fn run_recursion(
    var: &VarCoefficients,
    u: &[f64],
    eps: &[f64],
    total: usize,
) -> (Vec<f64>, Vec<f64>) {
    let mut y = vec![0.0; total];
    let mut z = vec![0.0; total];
    let (mut y1, mut y2, mut y3) = (0.0, 0.0, 0.0);
    let (mut z1, mut z2, mut z3) = (0.0, 0.0, 0.0);
    for t in 0..total {
        let time = (t + 1) as f64;
        let s = &var.shock_transform;
        let wy = s[0][0] * u[t] + s[0][1] * eps[t];
        let wz = s[1][0] * u[t] + s[1][1] * eps[t];
        let m = &var.m;
        let yt = var.psi[0][0] + var.psi[0][1] * time
            + m[0][0][0] * y1 + m[0][0][1] * z1
            + m[1][0][0] * y2 + m[1][0][1] * z2
            + m[2][0][0] * y3 + m[2][0][1] * z3
            + wy;
        let zt = var.psi[1][0] + var.psi[1][1] * time
            + m[0][1][0] * y1 + m[0][1][1] * z1
            + m[1][1][0] * y2 + m[1][1][1] * z2
            + m[2][1][0] * y3 + m[2][1][1] * z3
            + wz;
        y[t] = yt;
        z[t] = zt;
        (y3, y2, y1) = (y2, y1, yt);
        (z3, z2, z1) = (z2, z1, zt);
    }
    (y, z)
}

/// Simulate from explicit shock sequences (test hook and oracle support).
/// Starting lag values are zeros.
pub fn simulate_from_shocks(
    theta: &DgpParams,
    u: &[f64],
    eps: &[f64],
    sample_len: usize,
    presample_len: usize,
) -> Result<SeriesPair> {
    if presample_len < 3 {
        return Err(Error::Domain("presample must be at least 3".into()));
    }
    let total = presample_len + sample_len;
    assert_eq!(u.len(), total);
    assert_eq!(eps.len(), total);
    let var = to_var(theta)?;
    let (y, z) = run_recursion(&var, u, eps, total);
    Ok(SeriesPair {
        y,
        z,
        shocks_u: u.to_vec(),
        shocks_eps: eps.to_vec(),
        presample_len,
        sample_len,
        seed: 0,
    })
}

/// Simulate one replication from its dedicated substream.
pub fn simulate_substream(
    theta: &DgpParams,
    master_seed: u64,
    cell: u64,
    rep: u64,
    sample_len: usize,
    presample_len: usize,
) -> Result<SeriesPair> {
    let mut rng = rng::substream(master_seed, cell, rep);
    let mut pair =
        simulate_with_rng(theta, &mut rng, sample_len, presample_len)?;
    pair.seed = (cell << 32) | rep;
    Ok(pair)
}

/// Simulate with a caller-supplied generator. Draws one (u, eps) pair per
/// observation; u drives Y and eps drives Z, independently standard normal.
pub fn simulate_with_rng(
    theta: &DgpParams,
    rng: &mut ChaCha8Rng,
    sample_len: usize,
    presample_len: usize,
) -> Result<SeriesPair> {
    if sample_len < 10 {
        return Err(Error::Domain("sample length must be at least 10".into()));
    }
    if presample_len < 3 {
        return Err(Error::Domain("presample must be at least 3".into()));
    }
    let total = presample_len + sample_len;
    let mut u = vec![0.0; total];
    let mut eps = vec![0.0; total];
    for t in 0..total {
        let (a, b) = rng::normal_pair(rng);
        u[t] = a;
        eps[t] = b;
    }
    simulate_from_shocks(theta, &u, &eps, sample_len, presample_len)
}

/// Convenience wrapper: one sample from stream (seed, 0, 0) with the
/// standard design (T = 50, 100 presample observations).
pub fn simulate(theta: &DgpParams, seed: u64) -> Result<SeriesPair> {
    simulate_substream(theta, seed, 0, 0, 50, 100)
}

/// Which slice of the experiment grid to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Trend status unknown: every admissible configuration.
    All,
    /// Known no trend: odd families, non-trending Z.
    NoTrend,
    /// Known trend: even families, trending Z.
    Trend,
}

const TREND_VALUES: [f64; 2] = [0.5, 1.0];
const LAG_LEVEL_VALUES: [f64; 3] = [-0.9, -0.5, -0.1];
const Z_VALUES: [f64; 3] = [0.1, 1.0, 10.0];
const DZ0_VALUES: [f64; 3] = [0.1, 1.0, 10.0];
const DZ1_VALUES: [f64; 5] = [-0.5, 0.1, 0.5, 1.0, 10.0];
const DZ2_VALUES: [f64; 3] = [0.1, 1.0, 10.0];
const EC_VALUES: [f64; 4] = [-0.1, -0.5, -0.8, -1.0];
const C2_VALUES: [f64; 3] = [0.1, 1.0, 10.0];

/// The four admissible Z processes as (m1, m2, m3).
const Z_PROCESSES: [(f64, f64, f64); 4] = [
    (0.0, 0.0, 1.0), // random walk
    (1.0, 0.0, 1.0), // random walk with drift
    (1.0, 0.0, 0.5), // stationary around a nonzero constant
    (1.0, 1.0, 0.5), // trend stationary
];

fn z_allowed_for_family(family: u8, z: ZProcessKind) -> bool {
    match family {
        // Level relations require a stationary Z.
        11 | 12 => !z.is_random_walk(),
        // Cointegration requires a random-walk Z.
        13 | 14 => z.is_random_walk(),
        _ => true,
    }
}

/// Enumerate the grid of true-process configurations: every admissible
/// assignment of the documented parameter value sets whose nonzero pattern
/// is a taxonomy row in families 1..=14, crossed with the compatible Z
/// processes, filtered to the scenario.
///
/// Cointegration rows enter the grid only in their two-augmentation-lag
/// form (13.02 / 14.02) with both cointegrating constants nonzero; that is
/// the reading under which the grid reproduces its documented cardinalities
/// (1090 / 259 / 286) exactly. Family 13's conceptually-zero intercept and
/// the b10 = -1 endpoint carry their sentinel substitutions.
pub fn enumerate_permutations(scenario: Scenario) -> Vec<(DgpParams, ModelId)> {
    let mut out = Vec::new();
    for family in 1..=14u8 {
        for &aug in crate::taxonomy::family_aug_lags(family) {
            if (family == 13 || family == 14) && aug != 2 {
                continue;
            }
            let id = ModelId::new(family, aug).unwrap();
            if matches!(scenario, Scenario::NoTrend) && !id.is_odd_family() {
                continue;
            }
            if matches!(scenario, Scenario::Trend) && id.is_odd_family() {
                continue;
            }
            for theta in family_value_grid(family, aug) {
                for (m1, m2, m3) in Z_PROCESSES {
                    let z_kind = ZProcessKind::from_m(m1, m2, m3).unwrap();
                    if !z_allowed_for_family(family, z_kind) {
                        continue;
                    }
                    match scenario {
                        Scenario::NoTrend if z_kind.has_trend() => continue,
                        Scenario::Trend if !z_kind.has_trend() => continue,
                        _ => {}
                    }
                    let mut th = theta.clone();
                    th.m1 = m1;
                    th.m2 = m2;
                    th.m3 = m3;
                    debug_assert_eq!(classify_params(&th), Some(id));
                    out.push((th, id));
                }
            }
        }
    }
    out
}

/// Cartesian product of the admissible nonzero values for one family/lag
/// row; all other coefficients are zero.
fn family_value_grid(family: u8, aug: u8) -> Vec<DgpParams> {
    let spec = crate::taxonomy::model_spec(ModelId::new(family, aug).unwrap());
    use crate::taxonomy::Role;

    // Value choices per free role.
    let choices = |role: Role| -> Vec<f64> {
        match role {
            Role::Intercept => vec![1.0],
            Role::Trend => TREND_VALUES.to_vec(),
            Role::LagLevelY => LAG_LEVEL_VALUES.to_vec(),
            Role::DiffY1 => vec![0.5],
            Role::DiffY2 => vec![0.3],
            Role::Z => Z_VALUES.to_vec(),
            Role::DiffZ0 => DZ0_VALUES.to_vec(),
            Role::DiffZ1 => DZ1_VALUES.to_vec(),
            Role::DiffZ2 => DZ2_VALUES.to_vec(),
            Role::ErrorCorrection => EC_VALUES.to_vec(),
        }
    };

    let mut grid: Vec<DgpParams> = vec![DgpParams::zeros()];
    let base_roles: Vec<Role> = spec.free_coeffs.clone();
    for role in base_roles {
        let vals = choices(role);
        let mut next = Vec::with_capacity(grid.len() * vals.len());
        for theta in &grid {
            for &v in &vals {
                let mut th = theta.clone();
                let slot = match role {
                    Role::Intercept => 0,
                    Role::Trend => 1,
                    Role::LagLevelY => 2,
                    Role::DiffY1 => 3,
                    Role::DiffY2 => 4,
                    Role::Z => 5,
                    Role::DiffZ0 => 6,
                    Role::DiffZ1 => 7,
                    Role::DiffZ2 => 8,
                    Role::ErrorCorrection => 9,
                };
                th.b[slot] = v;
                if role == Role::ErrorCorrection && v == -1.0 {
                    th.b[9] = B10_SENTINEL;
                    th.b10_is_sentinel = true;
                }
                next.push(th);
            }
        }
        grid = next;
    }

    // Pinned coefficients (the -1 on the lagged level for families 5/6/11/12).
    for theta in &mut grid {
        for &(role, v) in &spec.fixed_terms {
            debug_assert_eq!(role, Role::LagLevelY);
            theta.b[2] = v;
        }
    }

    // Cointegrating vector for the error-correction families.
    if spec.has_cointegration {
        let mut next = Vec::with_capacity(grid.len() * C2_VALUES.len());
        for theta in &grid {
            for &c2 in &C2_VALUES {
                let mut th = theta.clone();
                th.c1 = 1.0;
                th.c2 = c2;
                if family == 13 {
                    th.b[0] = EPS_SENTINEL;
                    th.b1_is_sentinel = true;
                }
                next.push(th);
            }
        }
        grid = next;
    }
    grid
}
