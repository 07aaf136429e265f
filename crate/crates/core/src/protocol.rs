//! Query preparation, Bob's database transformation, Alice's measurements
//! and the two-query transaction.
//!
//! Alice uses one ancilla per database mode, `(j, AliceSide)`, which never
//! leaves her lab. The interferometer of the honesty test maps the beam
//! splitter's "+" output (the database mode `j`) to the "don't know"
//! detector D0 and the "−" output (the ancilla) to the "cheat" detector D1.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::adversary::{BobAgent, InfoRecord, QueryIndex};
use crate::error::{QpqError, Result};
use crate::rng::sample_branch;
use crate::state::{DensityOperator, ModeId, ModeRegister, OpticalState, Polarization, PureState, Side};

/// Bob's database: one classical bit per mode, `A_1..A_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DatabaseConfig {
    bits: Vec<bool>,
}

impl DatabaseConfig {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(QpqError::InvalidParameter("database needs at least one entry".into()));
        }
        if u32::try_from(bits.len()).is_err() {
            return Err(QpqError::InvalidParameter("database too large".into()));
        }
        Ok(Self { bits })
    }

    /// Uniformly random database of `n` entries.
    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        Self::new((0..n).map(|_| rng.gen()).collect())
    }

    /// Every database of size `n`, in binary counting order with `A_1` as
    /// the most significant bit.
    pub fn all(n: u32) -> impl Iterator<Item = DatabaseConfig> {
        assert!((1..32).contains(&n), "exhaustive enumeration supports 1..32 entries");
        (0u32..1 << n).map(move |code| Self { bits: (0..n).map(|k| code >> (n - 1 - k) & 1 == 1).collect() })
    }

    pub fn len(&self) -> u32 {
        self.bits.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// `A_j`, 1-based.
    pub fn bit(&self, j: u32) -> Result<bool> {
        check_index(j, self.len())?;
        Ok(self.bits[(j - 1) as usize])
    }
}

impl fmt::Display for DatabaseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for DatabaseConfig {
    type Err = QpqError;

    /// Comma-separated bits, e.g. `0,1,0`.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .split(',')
            .map(|b| match b.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(QpqError::Parse(format!("database bit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits).map_err(|_| QpqError::Parse(format!("database {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryKind {
    Plain,
    Superposed,
}

/// Which query Alice submits first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ordering {
    PlainFirst,
    SuperposedFirst,
}

impl Ordering {
    pub fn kind_of(self, query: QueryIndex) -> QueryKind {
        match (self, query) {
            (Ordering::PlainFirst, QueryIndex::First) | (Ordering::SuperposedFirst, QueryIndex::Second) => {
                QueryKind::Plain
            }
            _ => QueryKind::Superposed,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Ordering::PlainFirst => "plain-first",
            Ordering::SuperposedFirst => "superposed-first",
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of Alice's honesty test for one transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HonestyVerdict {
    D0Fired,
    /// Bob is caught cheating.
    D1Fired,
    /// The random guess `A^(R)` differed from `A_j`; the test is discarded.
    NotMeaningful,
    NotPerformed,
}

impl HonestyVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            HonestyVerdict::D0Fired => "D0Fired",
            HonestyVerdict::D1Fired => "D1Fired",
            HonestyVerdict::NotMeaningful => "NotMeaningful",
            HonestyVerdict::NotPerformed => "NotPerformed",
        }
    }
}

impl fmt::Display for HonestyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Analysis overrides for a transaction. The default draws both the
/// ordering and the guess `A^(R)` uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Policy {
    pub ordering: Option<Ordering>,
    /// Forced `A^(R)`; only used when the superposed query goes first.
    pub guess: Option<bool>,
}

impl Policy {
    pub const RANDOM: Policy = Policy { ordering: None, guess: None };
    pub const PLAIN_FIRST: Policy = Policy { ordering: Some(Ordering::PlainFirst), guess: None };
    pub const SUPERPOSED_FIRST: Policy = Policy { ordering: Some(Ordering::SuperposedFirst), guess: None };

    pub fn with_guess(self, guess: bool) -> Self {
        Self { guess: Some(guess), ..self }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ordering {
            None => f.write_str("random")?,
            Some(o) => f.write_str(o.as_str())?,
        }
        if let Some(g) = self.guess {
            write!(f, "+guess:{}", u8::from(g))?;
        }
        Ok(())
    }
}

impl FromStr for Policy {
    type Err = QpqError;

    /// `random`, `plain-first` or `superposed-first`, optionally followed by
    /// `+guess:0` / `+guess:1`.
    fn from_str(s: &str) -> Result<Self> {
        let (order, guess) = match s.split_once('+') {
            Some((o, g)) => (o, Some(g)),
            None => (s, None),
        };
        let ordering = match order.trim() {
            "random" => None,
            "plain-first" => Some(Ordering::PlainFirst),
            "superposed-first" => Some(Ordering::SuperposedFirst),
            other => return Err(QpqError::Parse(format!("policy {other:?}"))),
        };
        let guess = match guess.map(str::trim) {
            None => None,
            Some("guess:0") => Some(false),
            Some("guess:1") => Some(true),
            Some(other) => return Err(QpqError::Parse(format!("guess override {other:?}"))),
        };
        Ok(Policy { ordering, guess })
    }
}

/// Everything Alice and Bob end up with after one two-query transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct TransactionOutcome {
    /// `None` when the plain reply could not be read out (the photon was not
    /// in mode `j`), which only a cheating Bob can cause.
    pub retrieved_bit: Option<bool>,
    pub verdict: HonestyVerdict,
    pub ordering: Ordering,
    /// `A^(R)`, present only for superposed-first transactions.
    pub guess_used: Option<bool>,
    pub bob_info: InfoRecord,
}

impl TransactionOutcome {
    pub fn cheat_detected(&self) -> bool {
        self.verdict == HonestyVerdict::D1Fired
    }
}

/// Detector probabilities of the honesty-test interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorProbabilities {
    pub d0: f64,
    pub d1: f64,
}

impl DetectorProbabilities {
    /// Probability that the photon reaches neither detector with H
    /// polarization (V light left over after compensation, or a photon
    /// outside the interferometer).
    pub fn anomaly(&self) -> f64 {
        (1.0 - self.d0 - self.d1).max(0.0)
    }
}

/// Register with database modes `1..=n` followed by Alice's ancillas `1..=n`.
pub fn qpq_register(n: u32) -> Result<ModeRegister> {
    if n == 0 {
        return Err(QpqError::EmptyRegister);
    }
    ModeRegister::new((1..=n).map(ModeId::bob).chain((1..=n).map(ModeId::alice)))
}

fn check_index(j: u32, n: u32) -> Result<()> {
    if (1..=n).contains(&j) {
        Ok(())
    } else {
        Err(QpqError::IndexOutOfRange { index: j, n })
    }
}

fn database_size(register: &ModeRegister) -> u32 {
    register.side(Side::BobSide).count() as u32
}

/// `|P_j⟩ = |H⟩_j`.
pub fn prepare_plain_query(register: &ModeRegister, j: u32) -> Result<PureState> {
    check_index(j, database_size(register))?;
    PureState::basis_state(register, ModeId::bob(j), Polarization::H)
}

/// `|S_j⟩ = (|H⟩_j|∅⟩_{j_a} + |∅⟩_j|H⟩_{j_a})/√2`, made by sending an H
/// photon headed for mode `j` through a 50% beam splitter whose other arm
/// is the ancilla `j_a`.
pub fn prepare_superposed_query(register: &ModeRegister, j: u32) -> Result<PureState> {
    check_index(j, database_size(register))?;
    let ancilla = ModeId::alice(j);
    if !register.contains(ancilla) {
        return Err(QpqError::MissingAncilla(j));
    }
    PureState::basis_state(register, ModeId::bob(j), Polarization::H)?.apply_beam_splitter(ModeId::bob(j), ancilla)
}

/// Bob's honest answer: a half-wave plate on every database mode with
/// `A_j = 1`. Alice's modes are untouched.
pub fn bob_apply_database<S: OpticalState + Clone>(state: &S, db: &DatabaseConfig) -> Result<S> {
    let register_size = database_size(state.register()) as usize;
    if register_size != db.bits().len() {
        return Err(QpqError::DatabaseSizeMismatch { db: db.bits().len(), register: register_size });
    }
    let mut out = state.clone();
    for (k, bit) in db.bits().iter().enumerate() {
        if *bit {
            out = out.apply_half_wave_plate(ModeId::bob(k as u32 + 1))?;
        }
    }
    Ok(out)
}

/// Polarization readout of a plain reply: V means 1, H means 0.
///
/// Fails with [`QpqError::Precondition`] when the photon is not in mode `j`.
pub fn alice_read_plain<R: Rng + ?Sized>(reply: &DensityOperator, j: u32, rng: &mut R) -> Result<bool> {
    check_index(j, database_size(reply.register()))?;
    let (pol, _) = reply.measure_polarization(ModeId::bob(j), rng)?;
    Ok(pol == Polarization::V)
}

/// Exact detector probabilities of the honesty test on mode `j`.
///
/// The compensating plate is inserted on mode `j` iff `guess` is 1; the
/// beam splitter then recombines `j` with `j_a`. `d0` is the H population
/// of the "+" port, `d1` that of the "−" port.
pub fn honesty_test_probabilities(reply: &DensityOperator, j: u32, guess: bool) -> Result<DetectorProbabilities> {
    check_index(j, database_size(reply.register()))?;
    let (mode, ancilla) = (ModeId::bob(j), ModeId::alice(j));
    if !reply.register().contains(ancilla) {
        return Err(QpqError::MissingAncilla(j));
    }
    let compensated = if guess { reply.apply_half_wave_plate(mode)? } else { reply.clone() };
    let out = compensated.apply_beam_splitter(mode, ancilla)?;
    // 1/√2 amplitudes can push populations a few ulps past 1.
    Ok(DetectorProbabilities {
        d0: out.population(mode, Polarization::H)?.clamp(0.0, 1.0),
        d1: out.population(ancilla, Polarization::H)?.clamp(0.0, 1.0),
    })
}

/// Samples the honesty test. Anything other than a D0 click (including
/// light that reaches neither detector) is reported as [`HonestyVerdict::D1Fired`].
pub fn honesty_test<R: Rng + ?Sized>(
    reply: &DensityOperator,
    j: u32,
    guess: bool,
    rng: &mut R,
) -> Result<HonestyVerdict> {
    let d0 = honesty_test_probabilities(reply, j, guess)?.d0;
    Ok(match sample_branch(&[d0, 1.0 - d0], rng) {
        Some(0) => HonestyVerdict::D0Fired,
        _ => HonestyVerdict::D1Fired,
    })
}

/// Runs one full transaction: Alice submits a plain and a superposed query
/// for entry `j`, one at a time, and Bob answers each through `bob`.
///
/// * Plain first: `A_j` is read from the first reply and used to set up the
///   honesty test on the second.
/// * Superposed first: Alice draws `A^(R)` before the first reply arrives,
///   tests the first reply with it, reads `A_j` from the second reply and
///   discards the test if `A^(R) ≠ A_j`.
///
/// A failed plain readout counts as a D1 click.
pub fn run_transaction<R: Rng + ?Sized>(
    db: &DatabaseConfig,
    j: u32,
    bob: &mut BobAgent,
    policy: Policy,
    rng: &mut R,
) -> Result<TransactionOutcome> {
    check_index(j, db.len())?;
    let register = qpq_register(db.len())?;
    let ordering = policy.ordering.unwrap_or_else(|| {
        if rng.gen::<bool>() {
            Ordering::PlainFirst
        } else {
            Ordering::SuperposedFirst
        }
    });
    let plain = prepare_plain_query(&register, j)?.to_density();
    let superposed = prepare_superposed_query(&register, j)?.to_density();

    let (retrieved_bit, verdict, guess_used) = match ordering {
        Ordering::PlainFirst => {
            let (first, _) = bob.respond(QueryIndex::First, &plain, db, rng)?;
            let readout = readout_or_anomaly(&first, j, rng)?;
            let (second, _) = bob.respond(QueryIndex::Second, &superposed, db, rng)?;
            match readout {
                Some(bit) => (Some(bit), honesty_test(&second, j, bit, rng)?, None),
                None => (None, HonestyVerdict::D1Fired, None),
            }
        }
        Ordering::SuperposedFirst => {
            let guess = policy.guess.unwrap_or_else(|| rng.gen());
            let (first, _) = bob.respond(QueryIndex::First, &superposed, db, rng)?;
            let test = honesty_test(&first, j, guess, rng)?;
            let (second, _) = bob.respond(QueryIndex::Second, &plain, db, rng)?;
            match readout_or_anomaly(&second, j, rng)? {
                Some(bit) if bit == guess => (Some(bit), test, Some(guess)),
                Some(bit) => (Some(bit), HonestyVerdict::NotMeaningful, Some(guess)),
                None => (None, HonestyVerdict::D1Fired, Some(guess)),
            }
        }
    };
    Ok(TransactionOutcome { retrieved_bit, verdict, ordering, guess_used, bob_info: bob.info().clone() })
}

fn readout_or_anomaly<R: Rng + ?Sized>(reply: &DensityOperator, j: u32, rng: &mut R) -> Result<Option<bool>> {
    match alice_read_plain(reply, j, rng) {
        Ok(bit) => Ok(Some(bit)),
        Err(QpqError::Precondition(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// How a database index is carried on the wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelEncoding {
    SpatialMode,
    /// One time slot per entry; entry `j` travels at offset `j × slot_duration`.
    TimeSlot {
        slot_duration: f64,
    },
}

impl fmt::Display for ChannelEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelEncoding::SpatialMode => f.write_str("spatial"),
            ChannelEncoding::TimeSlot { slot_duration } => write!(f, "timeslot:{slot_duration}"),
        }
    }
}

impl FromStr for ChannelEncoding {
    type Err = QpqError;

    /// `spatial` or `timeslot:<duration>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "spatial" {
            return Ok(ChannelEncoding::SpatialMode);
        }
        let parse_err = || QpqError::Parse(format!("channel encoding {s:?}"));
        let duration = s.strip_prefix("timeslot:").ok_or_else(parse_err)?;
        let slot_duration: f64 = duration.trim().parse().map_err(|_| parse_err())?;
        if slot_duration <= 0.0 || !slot_duration.is_finite() {
            return Err(parse_err());
        }
        Ok(ChannelEncoding::TimeSlot { slot_duration })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelLabel {
    Spatial(u32),
    TimeOffset(f64),
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelLabel::Spatial(m) => write!(f, "mode {m}"),
            ChannelLabel::TimeOffset(t) => write!(f, "time offset {t}"),
        }
    }
}

pub fn encode_channel(encoding: ChannelEncoding, j: u32, n: u32) -> Result<ChannelLabel> {
    check_index(j, n)?;
    match encoding {
        ChannelEncoding::SpatialMode => Ok(ChannelLabel::Spatial(j)),
        ChannelEncoding::TimeSlot { slot_duration } => {
            if slot_duration <= 0.0 || !slot_duration.is_finite() {
                return Err(QpqError::InvalidParameter(format!("slot duration {slot_duration}")));
            }
            Ok(ChannelLabel::TimeOffset(f64::from(j) * slot_duration))
        }
    }
}

/// Inverse of [`encode_channel`].
pub fn decode_channel(encoding: ChannelEncoding, label: ChannelLabel, n: u32) -> Result<u32> {
    let j = match (encoding, label) {
        (ChannelEncoding::SpatialMode, ChannelLabel::Spatial(j)) => j,
        (ChannelEncoding::TimeSlot { slot_duration }, ChannelLabel::TimeOffset(t)) => {
            let k = t / slot_duration;
            let rounded = libm::round(k);
            if (k - rounded).abs() > 1e-9 || rounded < 1.0 || rounded > f64::from(n) {
                return Err(QpqError::InvalidParameter(format!("time offset {t} is not a slot boundary")));
            }
            rounded as u32
        }
        _ => return Err(QpqError::InvalidParameter(String::from("label does not match the encoding"))),
    };
    check_index(j, n)?;
    Ok(j)
}
