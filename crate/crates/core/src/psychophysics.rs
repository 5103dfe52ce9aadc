//! Four-alternative forced-choice discrimination with a 1-up-2-down
//! staircase, a simulated dichromat observer, and the 64-sequence study.
//!
//! Distances are ΔE76 from the base color. Absolute thresholds are in the
//! observer model's units and say nothing about human thresholds.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::perceived_jnd;
use crate::colorspace::{
    delta_e_linear, lab_from_linear, linear_from_lab, linear_to_xy, srgb_decode, Jnd, Lab, LinearRgb, SRgb8, Xy,
    LMS_TO_LINEAR,
};
use crate::cvd::{confusion_line, ConfusionLine, CvdType};
use crate::ellipse::{fit_ellipse, ThresholdEllipse};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rotation::RotationAngle;

pub const START_DISTANCE: f64 = 15.0;
pub const COARSE_STEP: f64 = 2.0;
pub const FINE_STEP: f64 = 1.0;
pub const REVERSALS_TO_FINISH: usize = 6;
/// Guards sequences that never reverse, e.g. an observer that is always wrong.
pub const MAX_TRIALS: usize = 2000;
/// Angle grid searched by an observer allowed to shift.
pub const OBSERVER_STEP_DEG: f64 = 1.0;

const GAMUT_EPS: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Staircase

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Up,
    Down,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseState {
    pub base: LinearRgb,
    /// Unit vector in Lab along which the odd color leaves the base.
    pub direction: [f64; 3],
    pub current_distance: f64,
    pub max_distance: f64,
    pub step: f64,
    pub consecutive_correct: u32,
    pub reversals: Vec<f64>,
    pub last_move: Move,
    pub finished: bool,
}

impl StaircaseState {
    pub fn new(base: LinearRgb, direction: [f64; 3], max_distance: f64) -> Self {
        Self {
            base,
            direction,
            current_distance: START_DISTANCE.min(max_distance),
            max_distance,
            step: COARSE_STEP,
            consecutive_correct: 0,
            reversals: Vec::new(),
            last_move: Move::None,
            finished: false,
        }
    }
}

pub fn staircase_step(s: &StaircaseState, correct: bool) -> Result<StaircaseState> {
    if s.finished {
        return Err(Error::Usage("staircase already finished".into()));
    }
    let mut next = s.clone();
    let mv = if correct {
        next.consecutive_correct += 1;
        if next.consecutive_correct == 2 {
            next.consecutive_correct = 0;
            Move::Down
        } else {
            Move::None
        }
    } else {
        next.consecutive_correct = 0;
        Move::Up
    };
    if mv == Move::None {
        return Ok(next);
    }
    if s.last_move != Move::None && s.last_move != mv {
        next.reversals.push(s.current_distance);
        if next.reversals.len() == 2 {
            next.step = FINE_STEP;
        }
        next.finished = next.reversals.len() == REVERSALS_TO_FINISH;
    }
    let delta = if mv == Move::Up { next.step } else { -next.step };
    next.current_distance = (s.current_distance + delta).clamp(0.0, s.max_distance);
    next.last_move = mv;
    Ok(next)
}

/// Mean of the last three reversals.
pub fn threshold_estimate(s: &StaircaseState) -> Result<f64> {
    if !s.finished {
        return Err(Error::Usage(format!("staircase unfinished after {} reversals", s.reversals.len())));
    }
    Ok(s.reversals[3..6].iter().sum::<f64>() / 3.0)
}

// ---------------------------------------------------------------------------
// Stimuli

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingLine {
    Protan,
    Deutan,
    Tritan,
    /// Perpendicular in a*b* to the protan confusion line through the base.
    OrthogonalProtan,
}

impl SamplingLine {
    pub const ALL: [SamplingLine; 4] =
        [SamplingLine::Protan, SamplingLine::Deutan, SamplingLine::Tritan, SamplingLine::OrthogonalProtan];

    pub const fn as_str(self) -> &'static str {
        match self {
            SamplingLine::Protan => "protan",
            SamplingLine::Deutan => "deutan",
            SamplingLine::Tritan => "tritan",
            SamplingLine::OrthogonalProtan => "orthogonal_protan",
        }
    }

    pub const fn confusion_type(self) -> Option<CvdType> {
        match self {
            SamplingLine::Protan => Some(CvdType::Protan),
            SamplingLine::Deutan => Some(CvdType::Deutan),
            SamplingLine::Tritan => Some(CvdType::Tritan),
            SamplingLine::OrthogonalProtan => None,
        }
    }
}

impl fmt::Display for SamplingLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Positive, Direction::Negative];

    pub const fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Direction::Positive => "positive",
            Direction::Negative => "negative",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    WithShift,
    WithoutShift,
}

impl Phase {
    pub const BOTH: [Phase; 2] = [Phase::WithShift, Phase::WithoutShift];

    pub const fn shift_allowed(self) -> bool {
        matches!(self, Phase::WithShift)
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            Phase::WithShift => "with_shift",
            Phase::WithoutShift => "without_shift",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with_shift" => Ok(Phase::WithShift),
            "without_shift" => Ok(Phase::WithoutShift),
            other => Err(Error::Domain(format!("unknown phase '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum PathKind {
    /// Straight segment in linear RGB along one LMS cone axis.
    Cone { axis: [f64; 3], offset_max: f64 },
    /// Straight segment in Lab.
    Lab { unit: [f64; 3] },
}

/// Where the odd color sits at each ΔE distance from the base, for one
/// sampling line and direction.
#[derive(Debug, Clone, Copy)]
pub struct StimulusPath {
    base: LinearRgb,
    base_lab: Lab,
    kind: PathKind,
    direction: [f64; 3],
    max_distance: f64,
}

fn lab_tangent(line: &ConfusionLine) -> [f64; 3] {
    let h = 1e-5;
    let a = lab_from_linear(line.color_at(h)).to_array();
    let b = lab_from_linear(line.color_at(-h)).to_array();
    unit([a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn ray_exit(base: LinearRgb, axis: [f64; 3]) -> f64 {
    let p = base.to_array();
    let mut t = f64::INFINITY;
    for k in 0..3 {
        if axis[k] > 0.0 {
            t = t.min((1.0 - p[k]) / axis[k]);
        } else if axis[k] < 0.0 {
            t = t.min(-p[k] / axis[k]);
        }
    }
    t.max(0.0)
}

impl StimulusPath {
    pub fn new(base: LinearRgb, line: SamplingLine, direction: Direction) -> Result<Self> {
        let sign = direction.sign();
        let base_lab = lab_from_linear(base);
        let protan = confusion_line(base, CvdType::Protan)?;
        let mut path = match line.confusion_type() {
            Some(t) => {
                let cl = if t == CvdType::Protan { protan } else { confusion_line(base, t)? };
                let col = t.missing_cone();
                let axis = std::array::from_fn(|k| sign * LMS_TO_LINEAR[k][col]);
                let tangent = lab_tangent(&cl);
                Self {
                    base,
                    base_lab,
                    kind: PathKind::Cone { axis, offset_max: ray_exit(base, axis) },
                    direction: tangent.map(|v| sign * v),
                    max_distance: 0.0,
                }
            }
            None => {
                let t = lab_tangent(&protan);
                let unit = unit([0.0, -sign * t[2], sign * t[1]]);
                Self { base, base_lab, kind: PathKind::Lab { unit }, direction: unit, max_distance: 0.0 }
            }
        };
        path.max_distance = path.find_max_distance();
        Ok(path)
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    /// Largest distance whose odd color stays in gamut.
    pub fn max_distance(&self) -> f64 {
        self.max_distance
    }

    fn cone_point(&self, axis: [f64; 3], s: f64) -> LinearRgb {
        let p = self.base.to_array();
        LinearRgb::new(p[0] + s * axis[0], p[1] + s * axis[1], p[2] + s * axis[2])
    }

    fn lab_point(&self, unit: [f64; 3], d: f64) -> LinearRgb {
        let b = self.base_lab;
        linear_from_lab(Lab::new(b.l + d * unit[0], b.a + d * unit[1], b.b + d * unit[2]))
    }

    fn find_max_distance(&self) -> f64 {
        match self.kind {
            PathKind::Cone { axis, offset_max } => delta_e_linear(self.base, self.cone_point(axis, offset_max)),
            PathKind::Lab { unit } => {
                // march to the first exit, then bisect
                let step = 0.25;
                let mut lo = 0.0;
                while lo < 400.0 && self.lab_point(unit, lo + step).in_gamut(GAMUT_EPS) {
                    lo += step;
                }
                let mut hi = lo + step;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.lab_point(unit, mid).in_gamut(GAMUT_EPS) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// The odd color `distance` ΔE from the base, clamped to the gamut limit.
    pub fn color_at(&self, distance: f64) -> LinearRgb {
        let d = distance.clamp(0.0, self.max_distance);
        if d == 0.0 {
            return self.base;
        }
        match self.kind {
            PathKind::Lab { unit } => self.lab_point(unit, d).clamp_to_unit(),
            PathKind::Cone { axis, offset_max } => {
                let (mut lo, mut hi) = (0.0, offset_max);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if delta_e_linear(self.base, self.cone_point(axis, mid)) < d {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                self.cone_point(axis, 0.5 * (lo + hi)).clamp_to_unit()
            }
        }
    }
}

trait ClampUnit {
    fn clamp_to_unit(self) -> Self;
}

impl ClampUnit for LinearRgb {
    // removes round-off at the gamut boundary only
    fn clamp_to_unit(self) -> Self {
        LinearRgb::from_array(self.to_array().map(|v| v.clamp(0.0, 1.0)))
    }
}

// ---------------------------------------------------------------------------
// Trials and the observer

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialLayout {
    pub patches: [LinearRgb; 4],
    pub odd_position: usize,
}

impl TrialLayout {
    pub fn new(base: LinearRgb, odd: LinearRgb, odd_position: usize) -> Result<Self> {
        if odd_position > 3 {
            return Err(Error::Domain(format!("odd position must be in 0..4, got {odd_position}")));
        }
        let mut patches = [base; 4];
        patches[odd_position] = odd;
        Ok(Self { patches, odd_position })
    }

    pub fn random<R: Rng + ?Sized>(base: LinearRgb, odd: LinearRgb, rng: &mut R) -> Self {
        Self::new(base, odd, rng.random_range(0..4)).expect("position in range")
    }

    pub fn base(&self) -> LinearRgb {
        self.patches[(self.odd_position + 1) % 4]
    }

    pub fn odd(&self) -> LinearRgb {
        self.patches[self.odd_position]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedObserver {
    pub cvd: CvdType,
    pub threshold: Jnd,
    pub lapse_rate: f64,
}

impl SimulatedObserver {
    pub fn new(cvd: CvdType, threshold: Jnd, lapse_rate: f64) -> Result<Self> {
        if !(threshold.0 > 0.0) || !threshold.0.is_finite() {
            return Err(Error::Domain(format!("observer threshold must be positive, got {}", threshold.0)));
        }
        if !(0.0..=1.0).contains(&lapse_rate) {
            return Err(Error::Domain(format!("lapse rate must be in [0, 1], got {lapse_rate}")));
        }
        Ok(Self { cvd, threshold, lapse_rate })
    }

    /// True when some allowed angle lifts the odd/base difference above threshold.
    pub fn detects(&self, base: LinearRgb, odd: LinearRgb, shift_allowed: bool) -> bool {
        if !shift_allowed {
            return perceived_jnd(odd, base, self.cvd, RotationAngle::ZERO).0 > self.threshold.0;
        }
        let n = (360.0 / OBSERVER_STEP_DEG).round() as usize;
        (0..n).any(|i| {
            let theta = RotationAngle::from_degrees(i as f64 * OBSERVER_STEP_DEG);
            perceived_jnd(odd, base, self.cvd, theta).0 > self.threshold.0
        })
    }
}

/// The position the observer picks as odd.
pub fn observer_decide<R: Rng + ?Sized>(
    o: &SimulatedObserver,
    layout: &TrialLayout,
    shift_allowed: bool,
    rng: &mut R,
) -> usize {
    let lapse = o.lapse_rate > 0.0 && rng.random::<f64>() < o.lapse_rate;
    if !lapse && o.detects(layout.base(), layout.odd(), shift_allowed) {
        return layout.odd_position;
    }
    rng.random_range(0..4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceOutcome {
    pub threshold_delta_e: f64,
    pub trials: usize,
    pub state: StaircaseState,
}

/// Runs one staircase to completion. A sequence that exhausts
/// [`MAX_TRIALS`] reports the distance it stopped at.
pub fn run_sequence<R: Rng + ?Sized>(
    o: &SimulatedObserver,
    base: LinearRgb,
    line: SamplingLine,
    direction: Direction,
    shift_allowed: bool,
    rng: &mut R,
) -> Result<SequenceOutcome> {
    let path = StimulusPath::new(base, line, direction)?;
    let mut state = StaircaseState::new(base, path.direction(), path.max_distance());
    let mut trials = 0;
    while !state.finished && trials < MAX_TRIALS {
        let layout = TrialLayout::random(base, path.color_at(state.current_distance), rng);
        let correct = observer_decide(o, &layout, shift_allowed, rng) == layout.odd_position;
        state = staircase_step(&state, correct)?;
        trials += 1;
    }
    let threshold_delta_e = if state.finished { threshold_estimate(&state)? } else { state.current_distance };
    Ok(SequenceOutcome { threshold_delta_e, trials, state })
}

// ---------------------------------------------------------------------------
// Study

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StudyBase {
    pub name: &'static str,
    pub color: SRgb8,
}

pub const STUDY_BASES: [StudyBase; 4] = [
    StudyBase { name: "blue", color: SRgb8::new(86, 95, 214) },
    StudyBase { name: "green", color: SRgb8::new(100, 204, 102) },
    StudyBase { name: "red", color: SRgb8::new(184, 74, 74) },
    StudyBase { name: "gray", color: SRgb8::new(136, 136, 136) },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSpec {
    /// Position in the canonical enumeration; keys the sequence's rng stream.
    pub id: usize,
    pub base: usize,
    pub line: SamplingLine,
    pub direction: Direction,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub seed: u64,
    pub bases: Vec<StudyBase>,
    /// Run order: the with-shift phase first, shuffled within each phase.
    pub sequences: Vec<SequenceSpec>,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn make_study_config(seed: u64) -> StudyConfig {
    let mut rng = stream_rng(seed, 0);
    let mut sequences = Vec::with_capacity(64);
    for phase in Phase::BOTH {
        let mut block = Vec::with_capacity(32);
        for base in 0..STUDY_BASES.len() {
            for line in SamplingLine::ALL {
                for direction in Direction::BOTH {
                    block.push(SequenceSpec { id: 0, base, line, direction, phase });
                }
            }
        }
        let start = sequences.len();
        for (i, s) in block.iter_mut().enumerate() {
            s.id = start + i;
        }
        block.shuffle(&mut rng);
        sequences.extend(block);
    }
    StudyConfig { seed, bases: STUDY_BASES.to_vec(), sequences }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub id: usize,
    pub base_name: String,
    pub line: SamplingLine,
    pub direction: Direction,
    pub phase: Phase,
    pub threshold_delta_e: f64,
    /// Chromaticity of the odd color at the threshold distance.
    pub point: Xy,
    pub trials: usize,
}

pub fn run_study(o: &SimulatedObserver, cfg: &StudyConfig) -> Result<Vec<ThresholdRecord>> {
    run_study_with(o, cfg, Exec::default())
}

/// Sequences run independently, each on its own rng stream, so the result
/// does not depend on `exec` or on the run order.
pub fn run_study_with(o: &SimulatedObserver, cfg: &StudyConfig, exec: Exec) -> Result<Vec<ThresholdRecord>> {
    par::map_slice(exec, &cfg.sequences, |spec| {
        let sb = cfg.bases.get(spec.base).ok_or_else(|| Error::Domain(format!("no base color {}", spec.base)))?;
        let base = srgb_decode(sb.color);
        let mut rng = stream_rng(cfg.seed, spec.id as u64 + 1);
        let out = run_sequence(o, base, spec.line, spec.direction, spec.phase.shift_allowed(), &mut rng)?;
        let path = StimulusPath::new(base, spec.line, spec.direction)?;
        Ok(ThresholdRecord {
            id: spec.id,
            base_name: sb.name.to_string(),
            line: spec.line,
            direction: spec.direction,
            phase: spec.phase,
            threshold_delta_e: out.threshold_delta_e,
            point: linear_to_xy(path.color_at(out.threshold_delta_e))?,
            trials: out.trials,
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseSummary {
    pub base_name: String,
    pub phase: Phase,
    pub points: Vec<Xy>,
    pub ellipse: Option<ThresholdEllipse>,
    pub area: Option<f64>,
    pub error: Option<String>,
}

/// One ellipse per (base, phase) through that cell's threshold points, in
/// base-then-phase order.
pub fn summarize_study(records: &[ThresholdRecord]) -> Vec<EllipseSummary> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.base_name.as_str()) {
            names.push(&r.base_name);
        }
    }
    let mut out = Vec::new();
    for name in names {
        for phase in Phase::BOTH {
            let mut cell: Vec<&ThresholdRecord> =
                records.iter().filter(|r| r.base_name == name && r.phase == phase).collect();
            if cell.is_empty() {
                continue;
            }
            cell.sort_by_key(|r| (r.line, r.direction));
            let points: Vec<Xy> = cell.iter().map(|r| r.point).collect();
            let (ellipse, error) = match fit_ellipse(&points) {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e.to_string())),
            };
            out.push(EllipseSummary {
                base_name: name.to_string(),
                phase,
                points,
                area: ellipse.map(|e| e.area()),
                ellipse,
                error,
            });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Perturbation

const PERTURB_ATTEMPTS: usize = 10_000;

/// A color exactly `distance` ΔE76 from `c` in a uniformly random Lab
/// direction, redrawn until it lands in gamut.
pub fn perturb_color<R: RngCore + ?Sized>(c: LinearRgb, distance: f64, rng: &mut R) -> Result<LinearRgb> {
    if !c.is_finite() || !c.in_gamut(GAMUT_EPS) {
        return Err(Error::Domain(format!("{c:?} is outside the sRGB gamut")));
    }
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(Error::Domain(format!("perturbation distance must be non-negative, got {distance}")));
    }
    if distance == 0.0 {
        return Ok(c);
    }
    let lab = lab_from_linear(c);
    for _ in 0..PERTURB_ATTEMPTS {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-12 {
            continue;
        }
        let k = distance / n;
        let out = linear_from_lab(Lab::new(lab.l + k * v[0], lab.a + k * v[1], lab.b + k * v[2]));
        if out.in_gamut(GAMUT_EPS) {
            return Ok(out.clamp_to_unit());
        }
    }
    Err(Error::Domain(format!("no in-gamut color {distance} ΔE from {c:?} found")))
}
