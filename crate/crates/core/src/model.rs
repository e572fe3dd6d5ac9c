//! Domain quantities and decay arithmetic.

use core::fmt;

/// Index of a τ instant on the global sub-tick timeline.
pub type Tau = u32;

/// Dense object identifier in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ObjectId(pub u32);

impl ObjectId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O{}", self.0)
    }
}

/// Uniform reporting grid. Each reporting interval `[t_k, t_k+1)` is split
/// into `tau_per_tick` instants of equal length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub delta_t: f64,
    pub tau_per_tick: u32,
    pub origin: f64,
}

impl TimeGrid {
    pub fn new(delta_t: f64, tau_per_tick: u32) -> Result<Self, ModelError> {
        if !(delta_t > 0.0 && delta_t.is_finite()) {
            return Err(ModelError::InvalidGrid("delta_t must be positive"));
        }
        if tau_per_tick == 0 {
            return Err(ModelError::InvalidGrid("tau_per_tick must be at least 1"));
        }
        Ok(TimeGrid {
            delta_t,
            tau_per_tick,
            origin: 0.0,
        })
    }

    /// Duration of one τ subinterval in seconds.
    pub fn delta_tau(&self) -> f64 {
        self.delta_t / self.tau_per_tick as f64
    }

    pub fn tau_of_tick(&self, tick: u32) -> Tau {
        tick * self.tau_per_tick
    }

    pub fn time_of_tau(&self, tau: Tau) -> f64 {
        self.origin + tau as f64 * self.delta_tau()
    }

    /// Last τ index of a dataset with `n_ticks` reporting times.
    pub fn last_tau(&self, n_ticks: u32) -> Tau {
        n_ticks.saturating_sub(1) * self.tau_per_tick
    }

    /// Number of whole τ instants covering `seconds` (rounded to nearest).
    pub fn taus_for_seconds(&self, seconds: f64) -> Tau {
        let t = seconds / self.delta_tau() + 0.5;
        if t <= 0.0 {
            0
        } else {
            t as Tau
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    InvalidWeight(f64),
    InvalidDecay(f64),
    InvalidThreshold(f64),
    InvalidGrid(&'static str),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidWeight(w) => write!(f, "initial weight must be positive, got {w}"),
            ModelError::InvalidDecay(d) => write!(f, "decay must lie in [0, 1), got {d}"),
            ModelError::InvalidThreshold(v) => {
                write!(f, "threshold weight must be non-negative, got {v}")
            }
            ModelError::InvalidGrid(msg) => write!(f, "invalid time grid: {msg}"),
        }
    }
}

impl core::error::Error for ModelError {}

/// Item weight `w`, per-transfer decay `d` and threshold weight `nu`.
///
/// The retained fraction `p = 1 - d` is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    w: f64,
    d: f64,
    nu: f64,
}

impl DecayParams {
    pub fn new(w: f64, d: f64, nu: f64) -> Result<Self, ModelError> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(ModelError::InvalidWeight(w));
        }
        if !(0.0..1.0).contains(&d) {
            return Err(ModelError::InvalidDecay(d));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(ModelError::InvalidThreshold(nu));
        }
        Ok(DecayParams { w, d, nu })
    }

    /// Parameters whose hop budget is exactly `Bounded(h)`: the threshold is
    /// set to the decayed weight after `h` transfers.
    pub fn for_hop_budget(w: f64, d: f64, h: u32) -> Result<Self, ModelError> {
        let probe = DecayParams::new(w, d, 0.0)?;
        DecayParams::new(w, d, actual_weight(&probe, h))
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn p(&self) -> f64 {
        1.0 - self.d
    }
}

/// Largest number of transfers whose decayed weight still meets the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopBudget {
    Bounded(u32),
    Unbounded,
    /// The threshold exceeds the initial weight: no transfer ever succeeds.
    SourceOnly,
}

impl HopBudget {
    /// Hop cap for search, `None` when no transfer is allowed.
    pub fn cap(self) -> Option<u32> {
        match self {
            HopBudget::Bounded(h) => Some(h),
            HopBudget::Unbounded => Some(u32::MAX),
            HopBudget::SourceOnly => None,
        }
    }

    pub fn allows(self, h: u32) -> bool {
        match self {
            HopBudget::Bounded(max) => h <= max,
            HopBudget::Unbounded => true,
            HopBudget::SourceOnly => false,
        }
    }
}

/// Reach status of one object with respect to a single source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachState {
    pub object: ObjectId,
    /// Earliest reach τ, `None` while unreached.
    pub tau_r: Option<Tau>,
    /// Minimum hop count, `None` stands for infinity.
    pub h_min: Option<u32>,
}

impl ReachState {
    pub fn unreached(object: ObjectId) -> Self {
        ReachState {
            object,
            tau_r: None,
            h_min: None,
        }
    }

    pub fn source(object: ObjectId, start: Tau) -> Self {
        ReachState {
            object,
            tau_r: Some(start),
            h_min: Some(0),
        }
    }
}

fn powu(mut base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

/// `w · p^h`.
pub fn actual_weight(params: &DecayParams, h: u32) -> f64 {
    params.w * powu(params.p(), h)
}

/// Hop budget for `params`.
///
/// The floor of `log_p(nu / w)` is found by searching directly on the
/// predicate `actual_weight(h) >= nu`, so the boundary case
/// `w · p^h == nu` is classified by the same arithmetic used for weights.
pub fn max_hops(params: &DecayParams) -> HopBudget {
    let (w, nu, p) = (params.w, params.nu, params.p());
    if nu > w {
        return HopBudget::SourceOnly;
    }
    if p >= 1.0 || nu == 0.0 {
        return HopBudget::Unbounded;
    }
    let meets = |h: u32| actual_weight(params, h) >= nu;
    // meets(0) holds since w >= nu.
    let mut lo = 0u32;
    let mut hi = 1u32;
    while meets(hi) {
        lo = hi;
        if hi == u32::MAX {
            return HopBudget::Bounded(u32::MAX);
        }
        hi = hi.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    HopBudget::Bounded(lo)
}

/// Threshold-gated weight of an item that travelled `h` hops (`None` = never).
pub fn assigned_weight(params: &DecayParams, h: Option<u32>) -> f64 {
    match h {
        Some(h) if max_hops(params).allows(h) => actual_weight(params, h),
        _ => 0.0,
    }
}

/// Sum of assigned weights, one term per source item.
pub fn aggregate_weight(per_source: &[(DecayParams, Option<u32>)]) -> f64 {
    per_source
        .iter()
        .map(|(params, h)| assigned_weight(params, *h))
        .sum()
}
