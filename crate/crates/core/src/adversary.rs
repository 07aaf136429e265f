//! Cheating strategies for Bob and multi-photon cheats for Alice.
//!
//! Bob only ever touches the database modes. His tap-style cheats are
//! modeled as dephasing between his modes and Alice's ancillas with a
//! residual coherence `gamma`; a delay `tau` maps to `gamma` through the
//! Gaussian envelope of the single-photon wavepacket.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{QpqError, Result};
use crate::protocol::{bob_apply_database, DatabaseConfig};
use crate::state::{DensityOperator, ModeId, Occupation, OpticalState, Polarization, PureState, Side};

/// Which of Alice's two queries (in arrival order) an invocation concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryIndex {
    First,
    Second,
}

/// Which queries a measure-and-reprepare Bob intercepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurePick {
    First,
    Second,
    /// One of the two, chosen uniformly per transaction.
    UniformRandomOne,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BobStrategy {
    Honest,
    /// Locate the photon among the database modes and re-create it there.
    MeasureAndReprepare(MeasurePick),
    /// Keep only a fraction `gamma` of the coherence with Alice's ancillas.
    PartialDephase(f64),
    /// Delay the database arm by `tau`; equivalent to
    /// `PartialDephase(delay_to_gamma(tau, sigma_c))`.
    DelayTap {
        tau: f64,
        sigma_c: f64,
    },
}

impl BobStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BobStrategy::PartialDephase(g) if !(0.0..=1.0).contains(&g) => Err(QpqError::GammaOutOfRange(g)),
            BobStrategy::DelayTap { tau, sigma_c } => delay_to_gamma(tau, sigma_c).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Residual coherence for the dephasing strategies.
    pub fn dephasing_gamma(&self) -> Result<Option<f64>> {
        match *self {
            BobStrategy::PartialDephase(g) => Ok(Some(g)),
            BobStrategy::DelayTap { tau, sigma_c } => delay_to_gamma(tau, sigma_c).map(Some),
            _ => Ok(None),
        }
    }
}

impl fmt::Display for BobStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BobStrategy::Honest => f.write_str("honest"),
            BobStrategy::MeasureAndReprepare(pick) => f.write_str(match pick {
                MeasurePick::First => "mr:first",
                MeasurePick::Second => "mr:second",
                MeasurePick::UniformRandomOne => "mr:random",
                MeasurePick::Both => "mr:both",
            }),
            BobStrategy::PartialDephase(g) => write!(f, "dephase:{g}"),
            BobStrategy::DelayTap { tau, sigma_c } => write!(f, "delay:{tau},{sigma_c}"),
        }
    }
}

impl FromStr for BobStrategy {
    type Err = QpqError;

    /// `honest`, `mr:first|second|random|both`, `dephase:<gamma>` or
    /// `delay:<tau>,<sigma_c>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || QpqError::Parse(format!("strategy {s:?}"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let strategy = match (head, arg) {
            ("honest", None) => BobStrategy::Honest,
            ("mr", Some(pick)) => BobStrategy::MeasureAndReprepare(match pick.trim() {
                "first" => MeasurePick::First,
                "second" => MeasurePick::Second,
                "random" => MeasurePick::UniformRandomOne,
                "both" => MeasurePick::Both,
                _ => return Err(bad()),
            }),
            ("dephase", Some(g)) => BobStrategy::PartialDephase(num(g)?),
            ("delay", Some(args)) => {
                let (tau, sigma) = args.split_once(',').ok_or_else(bad)?;
                BobStrategy::DelayTap { tau: num(tau)?, sigma_c: num(sigma)? }
            }
            _ => return Err(bad()),
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// What Bob did to (and learned from) one query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryInfo {
    pub query: QueryIndex,
    /// Database mode where Bob found the photon.
    pub learned_mode: Option<u32>,
    /// Bob measured and found nothing: the photon collapsed into Alice's lab.
    pub collapsed: bool,
    /// Coherence left between Bob's modes and Alice's ancillas.
    pub gamma_applied: f64,
}

/// Bob's record over a transaction; empty for an honest Bob.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InfoRecord {
    entries: Vec<QueryInfo>,
}

impl InfoRecord {
    pub fn entries(&self) -> &[QueryInfo] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Modes Bob located during the transaction.
    pub fn learned_modes(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().filter_map(|e| e.learned_mode)
    }
}

/// A strategy instance for a single transaction.
///
/// The agent receives Alice's queries one at a time and may carry state from
/// the first to the second (e.g. which query a `mr:random` Bob intercepts).
/// Create a fresh agent per transaction.
#[derive(Debug, Clone)]
pub struct BobAgent {
    strategy: BobStrategy,
    intercept: Option<QueryIndex>,
    record: InfoRecord,
}

impl BobAgent {
    pub fn new(strategy: BobStrategy) -> Result<Self> {
        strategy.validate()?;
        Ok(Self { strategy, intercept: None, record: InfoRecord::default() })
    }

    pub fn strategy(&self) -> BobStrategy {
        self.strategy
    }

    pub fn info(&self) -> &InfoRecord {
        &self.record
    }

    /// Bob's reply to one query. Anything he learns is also appended to
    /// [`BobAgent::info`].
    pub fn respond<R: Rng + ?Sized>(
        &mut self,
        query: QueryIndex,
        rho: &DensityOperator,
        db: &DatabaseConfig,
        rng: &mut R,
    ) -> Result<(DensityOperator, Option<QueryInfo>)> {
        let info = match self.strategy {
            BobStrategy::Honest => None,
            BobStrategy::MeasureAndReprepare(pick) => {
                if self.intercepts(pick, query, rng) {
                    let (out, info) = measure_and_reprepare(query, rho, db, rng)?;
                    self.record.entries.push(info);
                    return Ok((out, Some(info)));
                }
                None
            }
            BobStrategy::PartialDephase(_) | BobStrategy::DelayTap { .. } => {
                let gamma = self.strategy.dephasing_gamma()?.unwrap_or(1.0);
                let out = dephasing_tap(rho, db, gamma)?;
                let info = QueryInfo { query, learned_mode: None, collapsed: false, gamma_applied: gamma };
                self.record.entries.push(info);
                return Ok((out, Some(info)));
            }
        };
        Ok((bob_apply_database(rho, db)?, info))
    }

    fn intercepts<R: Rng + ?Sized>(&mut self, pick: MeasurePick, query: QueryIndex, rng: &mut R) -> bool {
        match pick {
            MeasurePick::First => query == QueryIndex::First,
            MeasurePick::Second => query == QueryIndex::Second,
            MeasurePick::Both => true,
            MeasurePick::UniformRandomOne => {
                let target = *self.intercept.get_or_insert_with(|| {
                    if rng.gen::<bool>() {
                        QueryIndex::First
                    } else {
                        QueryIndex::Second
                    }
                });
                target == query
            }
        }
    }
}

/// Applies one strategy step; equivalent to [`BobAgent::respond`].
pub fn apply_bob_strategy<R: Rng + ?Sized>(
    agent: &mut BobAgent,
    query: QueryIndex,
    rho: &DensityOperator,
    db: &DatabaseConfig,
    rng: &mut R,
) -> Result<(DensityOperator, Option<QueryInfo>)> {
    agent.respond(query, rho, db, rng)
}

/// Honest database rotation followed by loss of coherence `gamma` between
/// the database modes and Alice's ancillas.
pub fn dephasing_tap(rho: &DensityOperator, db: &DatabaseConfig, gamma: f64) -> Result<DensityOperator> {
    let register = rho.register();
    let bob: Vec<ModeId> = register.side(Side::BobSide).collect();
    let alice: Vec<ModeId> = register.side(Side::AliceSide).collect();
    bob_apply_database(rho, db)?.dephase_between(&bob, &alice, gamma)
}

fn measure_and_reprepare<R: Rng + ?Sized>(
    query: QueryIndex,
    rho: &DensityOperator,
    db: &DatabaseConfig,
    rng: &mut R,
) -> Result<(DensityOperator, QueryInfo)> {
    let bob: Vec<ModeId> = rho.register().side(Side::BobSide).collect();
    let (outcome, post) = rho.measure_mode_occupation(&bob, rng)?;
    let (state, info) = match outcome {
        Occupation::Found(mode) => {
            let fresh = PureState::basis_state(rho.register(), mode, Polarization::H)?.to_density();
            (fresh, QueryInfo { query, learned_mode: Some(mode.label), collapsed: false, gamma_applied: 0.0 })
        }
        Occupation::Absent => (post, QueryInfo { query, learned_mode: None, collapsed: true, gamma_applied: 0.0 }),
    };
    Ok((bob_apply_database(&state, db)?, info))
}

/// Residual coherence after delaying one arm by `tau` for a photon with
/// Gaussian coherence time `sigma_c`: `exp(−tau² / (2 sigma_c²))`.
pub fn delay_to_gamma(tau: f64, sigma_c: f64) -> Result<f64> {
    if sigma_c <= 0.0 || !sigma_c.is_finite() {
        return Err(QpqError::InvalidParameter(format!("coherence time {sigma_c} must be positive")));
    }
    if tau < 0.0 || !tau.is_finite() {
        return Err(QpqError::InvalidParameter(format!("delay {tau} must be non-negative")));
    }
    let r = tau / sigma_c;
    Ok(libm::exp(-0.5 * r * r))
}

/// Where a (possibly cheating) Alice puts her photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    /// One photon in the target mode: honest Alice.
    TargetOnly,
    /// Target plus `t − 1` distinct modes drawn uniformly.
    UniformRandomModes,
    /// Target plus the `t − 1` modes following it (cyclically), hoping they
    /// land in the same part of Bob's partition.
    AllSamePartAttempt,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::TargetOnly => "target-only",
            Placement::UniformRandomModes => "uniform",
            Placement::AllSamePartAttempt => "same-part",
        })
    }
}

impl FromStr for Placement {
    type Err = QpqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "target-only" => Ok(Placement::TargetOnly),
            "uniform" => Ok(Placement::UniformRandomModes),
            "same-part" => Ok(Placement::AllSamePartAttempt),
            other => Err(QpqError::Parse(format!("placement {other:?}"))),
        }
    }
}

/// Alice sending `t` photons per signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AliceCheat {
    t: u32,
    placement: Placement,
}

impl AliceCheat {
    pub fn new(t: u32, placement: Placement) -> Result<Self> {
        if t == 0 {
            return Err(QpqError::InvalidParameter("photon count must be at least 1".into()));
        }
        if placement == Placement::TargetOnly && t != 1 {
            return Err(QpqError::InvalidParameter(format!("target-only placement carries one photon, not {t}")));
        }
        Ok(Self { t, placement })
    }

    pub const fn honest() -> Self {
        Self { t: 1, placement: Placement::TargetOnly }
    }

    pub fn photons(&self) -> u32 {
        self.t
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn is_honest(&self) -> bool {
        self.t == 1
    }
}

/// Modes (1-based) occupied by Alice's photons; the target comes first and
/// all labels are distinct.
pub fn place_cheat_photons<R: Rng + ?Sized>(cheat: AliceCheat, target: u32, n: u32, rng: &mut R) -> Result<Vec<u32>> {
    if !(1..=n).contains(&target) {
        return Err(QpqError::IndexOutOfRange { index: target, n });
    }
    if cheat.t > n {
        return Err(QpqError::InvalidParameter(format!("{} photons do not fit in {n} modes", cheat.t)));
    }
    let extra = (cheat.t - 1) as usize;
    Ok(match cheat.placement {
        Placement::TargetOnly => vec![target],
        Placement::UniformRandomModes => {
            let mut modes = Vec::with_capacity(cheat.t as usize);
            modes.push(target);
            // indices over the n − 1 non-target modes
            for idx in rand::seq::index::sample(rng, (n - 1) as usize, extra).into_iter() {
                let label = idx as u32 + 1;
                modes.push(if label < target { label } else { label + 1 });
            }
            modes
        }
        Placement::AllSamePartAttempt => (0..cheat.t).map(|k| (target - 1 + k) % n + 1).collect(),
    })
}
