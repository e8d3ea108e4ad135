//! Grid bookkeeping and the scalar algebra shared by every scheme: Courant
//! numbers, the preferred linear weight, the Courant-dependent limiter and
//! the two WENO-type weights.
//!
//! All functions here are pure. Those that accept user-facing quantities
//! return [`Result`] and reject non-finite input; the limiter family is total
//! and maps a non-finite ratio to the first-order value.

use crate::error::{Error, Result};

/// Uniform time discretisation of `[0, T]` with `N` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
    tau: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Domain(format!("time horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::Domain("time step count must be positive".into()));
        }
        Ok(Self { horizon, steps, tau: horizon / steps as f64 })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Time level `t^n`; the last level returns the horizon exactly.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.horizon
        } else {
            n as f64 * self.tau
        }
    }

    /// Index of the level closest to `t`, clamped to `0..=N`.
    pub fn nearest_level(&self, t: f64) -> usize {
        let n = (t / self.tau).round();
        if n <= 0.0 {
            0
        } else {
            (n as usize).min(self.steps)
        }
    }
}

/// Strictly increasing node coordinates `0 = x_0 < ... < x_I = L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    nodes: Vec<f64>,
}

impl SpaceGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Domain("a space grid needs at least two nodes".into()));
        }
        if nodes[0] != 0.0 {
            return Err(Error::Domain(format!("first node must be 0, got {}", nodes[0])));
        }
        for (i, pair) in nodes.windows(2).enumerate() {
            if !(pair[1].is_finite() && pair[1] > pair[0]) {
                return Err(Error::Domain(format!(
                    "nodes must be strictly increasing (x_{} = {}, x_{} = {})",
                    i,
                    pair[0],
                    i + 1,
                    pair[1]
                )));
            }
        }
        Ok(Self { nodes })
    }

    /// `cells` equal steps on `[0, length]`; the last node is `length` exactly.
    pub fn uniform(length: f64, cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("edge length must be positive, got {length}")));
        }
        if cells == 0 {
            return Err(Error::Domain("cell count must be positive".into()));
        }
        let h = length / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        nodes[cells] = length;
        Self::new(nodes)
    }

    /// Number of cells `I`.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.nodes[self.cells()]
    }

    pub fn x(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Step `h_i = x_i - x_{i-1}` for `i >= 1`.
    pub fn h(&self, i: usize) -> f64 {
        self.nodes[i] - self.nodes[i - 1]
    }

    /// `Some(h)` when all steps agree to a relative 1e-12.
    pub fn uniform_step(&self) -> Option<f64> {
        let h0 = self.h(1);
        (2..=self.cells())
            .all(|i| (self.h(i) - h0).abs() <= 1e-12 * h0)
            .then_some(h0)
    }
}

/// Scheme family member used for a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    FirstOrder,
    /// Compact inverse scheme with a constant weight `w` in `[0, 1]`.
    FixedWeight(f64),
    /// Compact inverse scheme with the Courant-dependent preferred weight.
    ThirdOrder,
    /// Preferred weight replaced by the heuristic smoothness-ratio weight.
    WenoHeuristic,
    /// Limited predictor-corrector scheme.
    HighResolution,
    /// Time-marching direct compact scheme with its own limiter (constant
    /// Courant number only).
    DirectHR,
}

impl Scheme {
    /// CLI names: `first`, `second` (w = 1/3), `third`, `weno`, `hr`,
    /// `direct-hr`, or `w=<value>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "first" => Ok(Scheme::FirstOrder),
            "second" => Ok(Scheme::FixedWeight(1.0 / 3.0)),
            "third" => Ok(Scheme::ThirdOrder),
            "weno" => Ok(Scheme::WenoHeuristic),
            "hr" => Ok(Scheme::HighResolution),
            "direct-hr" => Ok(Scheme::DirectHR),
            other => match other.strip_prefix("w=") {
                Some(v) => {
                    let w: f64 = v
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad weight in scheme name {other:?}")))?;
                    Ok(Scheme::FixedWeight(w))
                }
                None => Err(Error::Parse(format!(
                    "unknown scheme {other:?} (expected first|second|third|weno|hr|direct-hr)"
                ))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Scheme::FirstOrder => "first".into(),
            Scheme::FixedWeight(w) if *w == 1.0 / 3.0 => "second".into(),
            Scheme::FixedWeight(w) => format!("w={w}"),
            Scheme::ThirdOrder => "third".into(),
            Scheme::WenoHeuristic => "weno".into(),
            Scheme::HighResolution => "hr".into(),
            Scheme::DirectHR => "direct-hr".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub weno_epsilon: f64,
    /// Heuristic weights are only applied where `|predicted| < threshold`.
    pub weno_threshold: Option<f64>,
    pub max_corrector_repeats: u32,
    /// Relative size below which a limiter ratio denominator counts as zero.
    pub denominator_tolerance: f64,
    /// Fixed lower Courant bound used by the nonlinear limiter instead of
    /// the local solution-dependent value.
    pub courant_min: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::HighResolution,
            weno_epsilon: 1e-6,
            weno_threshold: None,
            max_corrector_repeats: 1,
            denominator_tolerance: 1e-14,
            courant_min: None,
        }
    }
}

impl SchemeConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self { scheme, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let Scheme::FixedWeight(w) = self.scheme {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Configuration(format!("fixed weight must lie in [0, 1], got {w}")));
            }
        }
        if !(self.weno_epsilon.is_finite() && self.weno_epsilon > 0.0) {
            return Err(Error::Configuration("weno epsilon must be positive".into()));
        }
        if let Some(t) = self.weno_threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Configuration("weno threshold must be positive".into()));
            }
        }
        if !(self.denominator_tolerance.is_finite() && self.denominator_tolerance >= 0.0) {
            return Err(Error::Configuration("denominator tolerance must be non-negative".into()));
        }
        if let Some(c) = self.courant_min {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Configuration("minimal Courant number must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Limiter value for one node and time level; always in `[0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct LimiterState(f64);

impl LimiterState {
    pub const CENTRAL: LimiterState = LimiterState(1.0);
    pub const FIRST_ORDER: LimiterState = LimiterState(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=2.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("limiter value {value} outside [0, 2]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}

/// `C = v tau / (kappa h)`.
pub fn courant_number(v: f64, tau: f64, kappa: f64, h: f64) -> Result<f64> {
    for (name, x) in [("velocity", v), ("time step", tau), ("capacity", kappa), ("space step", h)] {
        check_finite(name, x)?;
        if x <= 0.0 {
            return Err(Error::Domain(format!("{name} must be positive, got {x}")));
        }
    }
    Ok(v * tau / (kappa * h))
}

/// Third-order weight `(2 + 1/C) / 6`, replaced by `1` for `C < 1/4`.
pub fn preferred_weight(c: f64) -> Result<f64> {
    check_finite("Courant number", c)?;
    if c <= 0.0 {
        return Err(Error::Domain(format!("Courant number must be positive, got {c}")));
    }
    Ok(preferred_weight_unchecked(c))
}

pub(crate) fn preferred_weight_unchecked(c: f64) -> f64 {
    if c < 0.25 {
        1.0
    } else {
        (2.0 + 1.0 / c) / 6.0
    }
}

/// Preferred weight of the time-marching direct compact scheme,
/// `min(1, (2 + C) / 6)`.
pub fn direct_preferred_weight(c: f64) -> f64 {
    ((2.0 + c) / 6.0).min(1.0)
}

/// Which argument of `max{0, min{bound r, 1 - w + w r, 2}}` was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimiterBranch {
    Zero,
    /// The Courant-dependent slope `bound * r`.
    Steep,
    /// The linear-weight target `1 - w + w r`.
    Preferred,
    Cap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limited {
    pub value: f64,
    pub branch: LimiterBranch,
}

/// `max{0, min{bound r, 1 - w + w r, 2}}`.
///
/// The inverse scheme uses `bound = 2C + psi_prev`; the direct scheme uses
/// `bound = 2/C + phi_prev`. A NaN ratio yields the first-order value 0.
pub fn limit(r: f64, wbar: f64, bound: f64) -> Limited {
    if r.is_nan() {
        return Limited { value: 0.0, branch: LimiterBranch::Zero };
    }
    let steep = bound * r;
    let preferred = 1.0 - wbar + wbar * r;
    let (mut value, mut branch) = (preferred, LimiterBranch::Preferred);
    if steep < value {
        value = steep;
        branch = LimiterBranch::Steep;
    }
    if 2.0 < value {
        value = 2.0;
        branch = LimiterBranch::Cap;
    }
    if value <= 0.0 {
        // covers -0.0 and a preferred value of exactly zero when w = 1
        value = 0.0;
        branch = LimiterBranch::Zero;
    }
    Limited { value, branch }
}

/// Limiter of the compact inverse scheme.
pub fn limiter_value(r: f64, wbar: f64, c: f64, psi_prev: f64) -> f64 {
    limit(r, wbar, 2.0 * c + psi_prev).value
}

/// Solution-dependent weight `W(r)` whose weighted flux coincides with the
/// limited flux, i.e. `1 - W + W r = Psi(r)` for `r != 1`.
pub fn weno_weight_from_limiter(r: f64, wbar: f64, c: f64, psi_prev: f64) -> f64 {
    if r == 1.0 {
        return wbar;
    }
    let bound = 2.0 * c + psi_prev;
    match limit(r, wbar, bound).branch {
        LimiterBranch::Cap => 1.0 / (r - 1.0),
        LimiterBranch::Preferred => wbar,
        LimiterBranch::Steep => (1.0 - bound * r) / (1.0 - r),
        LimiterBranch::Zero => 1.0 / (1.0 - r),
    }
}

/// Heuristic weight `w / (w + (1 - w) r)` with the smoothness ratio
/// `r = ((eps + db^2) / (eps + da^2))^2`, where `da = Q_{i-1}^{n+1} - Q_i^n`
/// and `db = Q_{i-1}^n - Q_i^{n-1}`. A flat `da` sends the weight to 0 and
/// a flat `db` to 1, as the limiter does through `Psi = 1 - W + W r`.
pub fn weno_heuristic_weight(da: f64, db: f64, wbar: f64, eps: f64) -> f64 {
    let num = eps + db * db;
    let den = eps + da * da;
    let r = (num / den) * (num / den);
    wbar / (wbar + (1.0 - wbar) * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn courant_examples() {
        assert_eq!(courant_number(1.0, 0.25, 1.0, 0.125).unwrap(), 2.0);
        assert_eq!(courant_number(2.0, 0.5, 2.0, 0.5).unwrap(), 1.0);
        assert!((courant_number(1.0, 5.0 / 16.0, 1.0, 1.0 / 8.0).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn courant_rejects_bad_input() {
        assert!(courant_number(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(courant_number(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(courant_number(1.0, 1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn preferred_weight_examples() {
        assert!((preferred_weight(2.0).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        assert_eq!(preferred_weight(0.25).unwrap(), 1.0);
        assert_eq!(preferred_weight(0.1).unwrap(), 1.0);
        assert!(preferred_weight(0.0).is_err());
        assert!(preferred_weight(f64::NAN).is_err());
    }

    #[test]
    fn preferred_weight_continuous_at_quarter() {
        let below = preferred_weight(0.25 - 1e-12).unwrap();
        let above = preferred_weight(0.25 + 1e-12).unwrap();
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn limiter_examples() {
        assert_eq!(limiter_value(1.0, 1.0 / 3.0, 1.0, 1.0), 1.0);
        assert_eq!(limiter_value(-0.5, 0.3, 4.0, 1.7), 0.0);
        // candidates 19.12, 2.176, 2
        assert_eq!(limiter_value(65.0 / 17.0, 5.0 / 12.0, 2.0, 1.0), 2.0);
        assert_eq!(limiter_value(f64::NAN, 0.5, 1.0, 1.0), 0.0);
        assert_eq!(limiter_value(f64::INFINITY, 0.5, 1.0, 1.0), 2.0);
    }

    #[test]
    fn weno_from_limiter_examples() {
        assert_eq!(weno_weight_from_limiter(-1.0, 0.4, 2.0, 1.0), 0.5);
        assert_eq!(weno_weight_from_limiter(1.0, 1.0 / 3.0, 2.0, 1.0), 1.0 / 3.0);
        let r = 65.0 / 17.0;
        let w = weno_weight_from_limiter(r, 5.0 / 12.0, 2.0, 1.0);
        assert!((1.0 - w + w * r - 2.0).abs() < 1e-14);
    }

    #[test]
    fn heuristic_weight_examples() {
        assert_eq!(weno_heuristic_weight(0.3, 0.3, 0.4, 1e-6), 0.4);
        assert!(weno_heuristic_weight(0.0, 1e3, 0.4, 1e-6) < 1e-12);
        let w = weno_heuristic_weight(1.0, 0.0, 1.0 / 3.0, 1e-6);
        assert!(w > 0.999 && w <= 1.0);
    }

    #[test]
    fn time_grid_hits_horizon() {
        let g = TimeGrid::new(0.7, 3).unwrap();
        assert_eq!(g.time(3), 0.7);
        assert_eq!(g.time(0), 0.0);
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn space_grid_validation() {
        let g = SpaceGrid::uniform(2.0, 7).unwrap();
        assert_eq!(g.x(7), 2.0);
        assert!(g.uniform_step().is_some());
        assert!(SpaceGrid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(SpaceGrid::new(vec![0.1, 0.5]).is_err());
        let nu = SpaceGrid::new(vec![0.0, 0.1, 0.4]).unwrap();
        assert!(nu.uniform_step().is_none());
        assert!((nu.h(2) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn scheme_names_roundtrip() {
        for s in ["first", "second", "third", "weno", "hr", "direct-hr"] {
            assert_eq!(Scheme::from_name(s).unwrap().name(), s);
        }
        assert_eq!(Scheme::from_name("w=0.25").unwrap(), Scheme::FixedWeight(0.25));
        assert!(Scheme::from_name("ultra").is_err());
    }

    proptest! {
        #[test]
        fn limiter_stays_in_range(r in -1e6f64..1e6, w in 0.0f64..=1.0, c in 1e-3f64..100.0, p in 0.0f64..=2.0) {
            let psi = limiter_value(r, w, c, p);
            prop_assert!((0.0..=2.0).contains(&psi));
            if r > 0.0 {
                prop_assert!(psi / r <= 2.0 * c + p + 1e-12);
            }
        }

        #[test]
        fn preferred_branch_is_exact(r in -1e3f64..1e3, w in 0.0f64..=1.0, c in 1e-3f64..100.0, p in 0.0f64..=2.0) {
            let l = limit(r, w, 2.0 * c + p);
            if l.branch == LimiterBranch::Preferred {
                prop_assert_eq!(l.value, 1.0 - w + w * r);
            }
        }

        #[test]
        fn weight_and_limiter_agree(r in -1e3f64..1e3, w in 0.0f64..=1.0, c in 1e-3f64..100.0, p in 0.0f64..=2.0) {
            prop_assume!((r - 1.0).abs() > 1e-6);
            let psi = limiter_value(r, w, c, p);
            let ww = weno_weight_from_limiter(r, w, c, p);
            let scale = 1.0f64.max(r.abs() * ww.abs());
            prop_assert!((1.0 - ww + ww * r - psi).abs() <= 1e-12 * scale);
        }

        #[test]
        fn heuristic_weight_in_unit_interval(a in -10.0f64..10.0, b in -10.0f64..10.0, w in 0.01f64..0.99) {
            let ww = weno_heuristic_weight(a, b, w, 1e-6);
            prop_assert!(ww > 0.0 && ww <= 1.0);
        }
    }
}
