//! Limb actuation and the six-zone omnidirectional gait.
//!
//! Every limb follows `phi_i = a_i sin(2 pi f t + psi_i)`. Translation in a
//! body-frame direction is produced by picking one of six amplitude
//! templates and setting the lead (alpha) limb amplitude from a gait map
//! built by open-loop simulation.
//!
//! Body-frame headings are measured from the limb-1 hinge axis,
//! counterclockwise positive, in degrees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::integrate;
use crate::error::{Error, Result};
use crate::model::{GaitParams, RobotParams, RobotState, MAX_AMPLITUDE_DEG};
use crate::ode::SolverOptions;
use crate::scalar::{wrap_deg, wrap_deg_signed, Scalar};

/// Version tag written into serialized gait maps.
pub const GAIT_MAP_VERSION: u32 = 1;

/// Angular width of one zone, deg.
pub const ZONE_WIDTH_DEG: f64 = 60.0;

/// Limb angle and rate `(phi, phi_dot)` in rad and rad/s for limb `i` (0-based).
#[inline]
pub fn limb_angle<T: Scalar>(gait: &GaitParams<T>, i: usize, t: T) -> (T, T) {
    assert!(i < 3, "limb index out of range: {i}");
    let w = T::TAU() * gait.frequency;
    let amp = gait.amplitudes[i].to_radians();
    let (s, c) = (w * t + gait.phases[i]).sin_cos();
    (amp * s, amp * w * c)
}

/// All three limb angles and rates at time `t`.
#[inline]
pub fn limb_angles<T: Scalar>(gait: &GaitParams<T>, t: T) -> ([T; 3], [T; 3]) {
    let w = T::TAU() * gait.frequency;
    let (s0, c0) = (w * t).sin_cos();
    let mut angles = [T::zero(); 3];
    let mut rates = [T::zero(); 3];
    for i in 0..3 {
        let amp = gait.amplitudes[i].to_radians();
        let psi = gait.phases[i];
        let (s, c) = if psi == T::zero() {
            (s0, c0)
        } else {
            let (sp, cp) = psi.sin_cos();
            (s0 * cp + c0 * sp, c0 * cp - s0 * sp)
        };
        angles[i] = amp * s;
        rates[i] = amp * w * c;
    }
    (angles, rates)
}

/// The validation gaits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CanonicalGait {
    /// Limb `k` (1-based) idle, the other two in anti-phase at 30 deg; the
    /// body translates towards limb `k`.
    TranslateLimb(u8),
    RotateCw,
    RotateCcw,
}

impl std::str::FromStr for CanonicalGait {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "rotate_cw" => Ok(Self::RotateCw),
            "rotate_ccw" => Ok(Self::RotateCcw),
            _ => s
                .strip_prefix("translate_limb_")
                .and_then(|k| k.parse::<u8>().ok())
                .filter(|k| (1..=3).contains(k))
                .map(Self::TranslateLimb)
                .ok_or_else(|| format!("unknown canonical gait '{s}'")),
        }
    }
}

impl std::fmt::Display for CanonicalGait {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TranslateLimb(k) => write!(f, "translate_limb_{k}"),
            Self::RotateCw => f.write_str("rotate_cw"),
            Self::RotateCcw => f.write_str("rotate_ccw"),
        }
    }
}

impl TryFrom<String> for CanonicalGait {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CanonicalGait> for String {
    fn from(g: CanonicalGait) -> Self {
        g.to_string()
    }
}

/// All amplitudes 30 deg with phases 120 deg apart for the rotation gaits.
/// The counterclockwise gait is the mirror image of the clockwise one, so
/// both start from the same neutral pose and rotate at the same rate.
pub fn canonical_gait<T: Scalar>(kind: CanonicalGait) -> GaitParams<T> {
    let a = T::lit(MAX_AMPLITUDE_DEG);
    let deg = |d: f64| T::lit(d.to_radians());
    match kind {
        CanonicalGait::TranslateLimb(k) => {
            assert!((1..=3).contains(&k), "limb index out of range: {k}");
            let mut g = GaitParams::from_amplitudes([T::zero(), a, -a]);
            for _ in 1..k {
                g = g.rotate_limbs();
            }
            g
        }
        CanonicalGait::RotateCw => GaitParams {
            amplitudes: [a; 3],
            phases: [deg(0.0), deg(120.0), deg(240.0)],
            frequency: T::one(),
        },
        CanonicalGait::RotateCcw => GaitParams {
            amplitudes: [a; 3],
            phases: [deg(180.0), deg(60.0), deg(300.0)],
            frequency: T::one(),
        },
    }
}

/// One entry of an amplitude template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    /// The lead limb, `sign * alpha`.
    Alpha(i8),
    /// Fixed amplitude, deg.
    Fixed(i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zone {
    /// 1..=6
    pub id: u8,
    /// Heading interval is `(lower_deg, lower_deg + 60]`.
    pub lower_deg: u16,
    pub template: [Slot; 3],
}

impl Zone {
    pub fn amplitudes<T: Scalar>(&self, alpha: T) -> [T; 3] {
        self.template.map(|s| match s {
            Slot::Alpha(sign) => T::lit(sign as f64) * alpha,
            Slot::Fixed(a) => T::lit(a as f64),
        })
    }

    pub fn contains<T: Scalar>(&self, heading_deg: T) -> bool {
        let lo = T::lit(self.lower_deg as f64);
        heading_deg > lo && heading_deg <= lo + T::lit(ZONE_WIDTH_DEG)
    }

    /// Index of the alpha limb (0-based).
    pub fn alpha_limb(&self) -> usize {
        self.template.iter().position(|s| matches!(s, Slot::Alpha(_))).unwrap()
    }
}

use Slot::{Alpha, Fixed};

/// Desired translation direction to amplitude template.
pub const ZONES: [Zone; 6] = [
    Zone { id: 1, lower_deg: 0, template: [Alpha(1), Fixed(30), Fixed(-30)] },
    Zone { id: 2, lower_deg: 60, template: [Fixed(-30), Alpha(-1), Fixed(30)] },
    Zone { id: 3, lower_deg: 120, template: [Fixed(-30), Alpha(1), Fixed(30)] },
    Zone { id: 4, lower_deg: 180, template: [Fixed(30), Fixed(-30), Alpha(-1)] },
    Zone { id: 5, lower_deg: 240, template: [Fixed(30), Fixed(-30), Alpha(1)] },
    Zone { id: 6, lower_deg: 300, template: [Alpha(-1), Fixed(30), Fixed(-30)] },
];

/// Zone containing `heading_deg` after wrapping into `(0, 360]`.
pub fn zone_select<T: Scalar>(heading_deg: T) -> &'static Zone {
    let h = wrap_deg(heading_deg);
    let idx = (h / T::lit(ZONE_WIDTH_DEG)).ceil().to_usize().unwrap_or(1).clamp(1, 6) - 1;
    &ZONES[idx]
}

/// Per-cycle body-frame headings of one open-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadingRun<T> {
    /// Heading of each cycle's displacement relative to the body heading at
    /// cycle start, in `(-180, 180]` deg.
    pub cycle_headings: Vec<T>,
    /// Displacement length per cycle, m.
    pub cycle_distances: Vec<T>,
    pub final_state: RobotState<T>,
}

impl<T: Scalar> HeadingRun<T> {
    /// Mean and population standard deviation of the headings after
    /// discarding the first `skip` cycles.
    pub fn settled_heading(&self, skip: usize) -> (T, T) {
        mean_std(&self.cycle_headings[skip.min(self.cycle_headings.len())..])
    }
}

pub(crate) fn mean_std<T: Scalar>(v: &[T]) -> (T, T) {
    if v.is_empty() {
        return (T::nan(), T::nan());
    }
    let n = T::from_usize(v.len()).unwrap();
    let mean = v.iter().fold(T::zero(), |a, b| a + *b) / n;
    let var = v.iter().fold(T::zero(), |a, b| a + (*b - mean) * (*b - mean)) / n;
    (mean, var.sqrt())
}

/// Runs `gait` from `start` for `cycles` whole gait periods and records the
/// body-frame displacement heading of each cycle.
pub fn run_cycles<T: Scalar>(
    start: &RobotState<T>,
    gait: &GaitParams<T>,
    params: &RobotParams<T>,
    cycles: usize,
    opts: &SolverOptions<T>,
) -> Result<HeadingRun<T>> {
    let mut state = *start;
    let mut cycle_headings = Vec::with_capacity(cycles);
    let mut cycle_distances = Vec::with_capacity(cycles);
    let period = gait.period();
    for _ in 0..cycles {
        let seg = integrate(&state, gait, None, params, period, opts)?;
        let end = seg.final_state;
        let dx = end.x - state.x;
        let dy = end.y - state.y;
        let world = dy.atan2(dx).to_degrees();
        cycle_headings.push(wrap_deg_signed(world - state.xi.to_degrees()));
        cycle_distances.push(dx.hypot(dy));
        state = end;
    }
    Ok(HeadingRun { cycle_headings, cycle_distances, final_state: state })
}

/// Number of initial cycles dropped before averaging headings.
pub const TRANSIENT_CYCLES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapSample<T> {
    /// deg
    pub alpha: T,
    /// Mean settled body-frame heading, deg.
    pub theta_avg: T,
    /// Cycle-to-cycle standard deviation of the settled heading, deg.
    pub theta_std: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSamples<T> {
    pub mu: T,
    pub samples: Vec<MapSample<T>>,
}

/// Node of the friction-averaged map: heading `theta` (deg) is produced by
/// lead amplitude `alpha` (deg).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapNode<T> {
    pub alpha: T,
    pub theta: T,
}

/// Sampled alpha-to-heading relation per friction coefficient and the
/// averaged universal map used for gait selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaitMap<T> {
    pub version: u32,
    pub mu_list: Vec<T>,
    pub per_mu: Vec<MuSamples<T>>,
    /// Sorted by increasing `theta` (and `alpha`).
    pub nodes: Vec<MapNode<T>>,
    /// Per zone, whether the within-zone angle runs from the upper boundary
    /// (`lower + 60 - theta`) instead of the lower one.
    pub zone_reversed: [bool; 6],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup<T> {
    /// deg
    pub alpha: T,
    /// Requested angle fell outside the sampled range.
    pub clamped: bool,
}

/// Full result of turning a body-frame heading into a gait.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitSelection<T> {
    pub gait: GaitParams<T>,
    pub zone: u8,
    /// deg
    pub alpha: T,
    /// Within-zone angle handed to the map, deg.
    pub zone_angle: T,
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapBuildOptions<T> {
    pub mu_list: Vec<T>,
    /// Lead amplitudes to sweep, deg, within `[0, 30]`.
    pub alpha_grid: Vec<T>,
    pub cycles: usize,
    pub solver: SolverOptions<T>,
}

impl<T: Scalar> Default for MapBuildOptions<T> {
    fn default() -> Self {
        Self {
            mu_list: vec![T::lit(0.33), T::lit(0.59), T::lit(0.87)],
            alpha_grid: (0..=30).map(|a| T::lit(a as f64)).collect(),
            cycles: 10,
            solver: SolverOptions::default(),
        }
    }
}

/// Builds the gait map by simulating the zone-1 gait `[alpha, 30, -30]`
/// from rest for every `(mu, alpha)` pair, then fixes the within-zone
/// orientation of every zone by simulation.
///
/// Grid points run in parallel; results are merged in grid order.
pub fn build_gait_map<T: Scalar>(params: &RobotParams<T>, opts: &MapBuildOptions<T>) -> Result<GaitMap<T>> {
    params.validate()?;
    if opts.cycles < TRANSIENT_CYCLES + 2 {
        return Err(Error::InvalidParams("gait map needs at least 4 cycles"));
    }
    if opts.mu_list.is_empty() || opts.alpha_grid.len() < 2 {
        return Err(Error::InvalidParams("empty friction list or alpha grid"));
    }
    let max = T::lit(MAX_AMPLITUDE_DEG);
    if opts.alpha_grid.iter().any(|a| !(*a >= T::zero() && *a <= max)) {
        return Err(Error::InvalidParams("alpha grid outside [0, 30] deg"));
    }
    if opts.alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("alpha grid not strictly increasing"));
    }

    let jobs: Vec<(usize, T)> = (0..opts.mu_list.len())
        .flat_map(|m| opts.alpha_grid.iter().map(move |a| (m, *a)))
        .collect();
    let results: Vec<Result<MapSample<T>>> = jobs
        .par_iter()
        .map(|&(m, alpha)| {
            let p = RobotParams { friction_mu: opts.mu_list[m], ..*params };
            let gait = GaitParams::from_amplitudes(ZONES[0].amplitudes(alpha));
            let run = run_cycles(&RobotState::zero(), &gait, &p, opts.cycles, &opts.solver)?;
            let (theta_avg, theta_std) = run.settled_heading(TRANSIENT_CYCLES);
            Ok(MapSample { alpha, theta_avg, theta_std })
        })
        .collect();

    let n_alpha = opts.alpha_grid.len();
    let mut per_mu = Vec::with_capacity(opts.mu_list.len());
    let mut results = results.into_iter();
    for &mu in &opts.mu_list {
        let samples = results.by_ref().take(n_alpha).collect::<Result<Vec<_>>>()?;
        per_mu.push(MuSamples { mu, samples });
    }

    let nodes = average_nodes(&per_mu);
    let mut map = GaitMap {
        version: GAIT_MAP_VERSION,
        mu_list: opts.mu_list.clone(),
        per_mu,
        nodes,
        zone_reversed: [false; 6],
    };
    map.check_monotone()?;
    map.check_orientation()?;

    let mean_mu = opts.mu_list.iter().fold(T::zero(), |a, b| a + *b)
        / T::from_usize(opts.mu_list.len()).unwrap();
    let p = RobotParams { friction_mu: mean_mu, ..*params };
    let probe_cycles = opts.cycles.min(TRANSIENT_CYCLES + 2);
    map.zone_reversed = orient_zones(&map, &p, probe_cycles, &opts.solver)?;
    Ok(map)
}

fn average_nodes<T: Scalar>(per_mu: &[MuSamples<T>]) -> Vec<MapNode<T>> {
    let n = T::from_usize(per_mu.len()).unwrap();
    (0..per_mu[0].samples.len())
        .map(|k| MapNode {
            alpha: per_mu[0].samples[k].alpha,
            theta: per_mu.iter().fold(T::zero(), |a, m| a + m.samples[k].theta_avg) / n,
        })
        .collect()
}

/// Chooses, per zone, the within-zone angle convention whose prediction is
/// closer to the heading realized by simulating that zone's template.
fn orient_zones<T: Scalar>(
    map: &GaitMap<T>,
    params: &RobotParams<T>,
    cycles: usize,
    solver: &SolverOptions<T>,
) -> Result<[bool; 6]> {
    // Probe at the node closest to the middle of the zone, away from both
    // boundaries where the two conventions agree.
    let mid = T::lit(ZONE_WIDTH_DEG / 2.0);
    let probe = *map
        .nodes
        .iter()
        .min_by(|a, b| (a.theta - mid).abs().partial_cmp(&(b.theta - mid).abs()).unwrap())
        .unwrap();
    let width = T::lit(ZONE_WIDTH_DEG);
    let reversed: Vec<Result<bool>> = ZONES
        .par_iter()
        .map(|zone| {
            let gait = GaitParams::from_amplitudes(zone.amplitudes(probe.alpha));
            let run = run_cycles(&RobotState::zero(), &gait, params, cycles, solver)?;
            let (realized, _) = run.settled_heading(TRANSIENT_CYCLES);
            let lo = T::lit(zone.lower_deg as f64);
            let forward = lo + probe.theta;
            let backward = lo + width - probe.theta;
            let miss = |target: T| wrap_deg_signed(realized - target).abs();
            Ok(miss(backward) < miss(forward))
        })
        .collect();
    let mut out = [false; 6];
    for (o, r) in out.iter_mut().zip(reversed) {
        *o = r?;
    }
    Ok(out)
}

impl<T: Scalar> GaitMap<T> {
    /// Per-friction and averaged headings must increase strictly with alpha.
    pub fn check_monotone(&self) -> Result<()> {
        for m in &self.per_mu {
            for w in m.samples.windows(2) {
                if !(w[1].theta_avg > w[0].theta_avg) {
                    return Err(Error::MapNotMonotone {
                        mu: m.mu.to_f64_lossless(),
                        alpha_lo: w[0].alpha.to_f64_lossless(),
                        alpha_hi: w[1].alpha.to_f64_lossless(),
                    });
                }
            }
        }
        for w in self.nodes.windows(2) {
            if !(w[1].theta > w[0].theta && w[1].alpha > w[0].alpha) {
                return Err(Error::MapNotMonotone {
                    mu: f64::NAN,
                    alpha_lo: w[0].alpha.to_f64_lossless(),
                    alpha_hi: w[1].alpha.to_f64_lossless(),
                });
            }
        }
        Ok(())
    }

    /// The smallest lead amplitude must translate close to the limb-1 axis and
    /// larger amplitudes must turn the heading counterclockwise into zone 1.
    /// This pins the sign conventions of the limb angles to the zone table.
    pub fn check_orientation(&self) -> Result<()> {
        let tol = T::lit(5.0);
        let first = self.nodes.first().ok_or_else(|| Error::MapOrientation("empty map".into()))?;
        let last = self.nodes.last().unwrap();
        if first.alpha == T::zero() && first.theta.abs() > tol {
            return Err(Error::MapOrientation(format!(
                "alpha = 0 translates at {} deg, expected the limb-1 axis",
                first.theta
            )));
        }
        if !(first.theta > -tol && last.theta <= T::lit(ZONE_WIDTH_DEG) + tol) {
            return Err(Error::MapOrientation(format!(
                "headings [{}, {}] deg fall outside zone 1",
                first.theta, last.theta
            )));
        }
        Ok(())
    }

    /// Structural checks for a map loaded from disk.
    pub fn validate(&self) -> Result<()> {
        if self.version != GAIT_MAP_VERSION {
            return Err(Error::MapOrientation(format!("unsupported gait map version {}", self.version)));
        }
        if self.nodes.len() < 2 || self.per_mu.len() != self.mu_list.len() {
            return Err(Error::MapOrientation("malformed gait map".into()));
        }
        self.check_monotone()?;
        self.check_orientation()
    }

    /// Lead amplitude for a within-zone heading `theta_zone` (deg) by linear
    /// interpolation of the averaged map. Outside the sampled range the end
    /// amplitude is returned and `clamped` is set.
    pub fn lookup(&self, theta_zone: T) -> Lookup<T> {
        let nodes = &self.nodes;
        let first = nodes[0];
        let last = nodes[nodes.len() - 1];
        if theta_zone < first.theta {
            return Lookup { alpha: first.alpha, clamped: true };
        }
        if theta_zone > last.theta {
            return Lookup { alpha: last.alpha, clamped: true };
        }
        // First node with theta >= theta_zone.
        let k = nodes.partition_point(|n| n.theta < theta_zone);
        let hi = nodes[k];
        if hi.theta == theta_zone || k == 0 {
            return Lookup { alpha: hi.alpha, clamped: false };
        }
        let lo = nodes[k - 1];
        let s = (theta_zone - lo.theta) / (hi.theta - lo.theta);
        Lookup { alpha: lo.alpha + s * (hi.alpha - lo.alpha), clamped: false }
    }

    /// Zone, lead amplitude and resulting gait for a body-frame heading (deg).
    pub fn select(&self, heading_deg: T) -> GaitSelection<T> {
        let h = wrap_deg(heading_deg);
        let zone = zone_select(h);
        let local = h - T::lit(zone.lower_deg as f64);
        let zone_angle = if self.zone_reversed[zone.id as usize - 1] {
            T::lit(ZONE_WIDTH_DEG) - local
        } else {
            local
        };
        let Lookup { alpha, clamped } = self.lookup(zone_angle);
        GaitSelection {
            gait: GaitParams::from_amplitudes(zone.amplitudes(alpha)),
            zone: zone.id,
            alpha,
            zone_angle,
            clamped,
        }
    }

    /// Gait that translates the body towards `heading_deg` in the body frame.
    pub fn gait_for_heading(&self, heading_deg: T) -> GaitParams<T> {
        self.select(heading_deg).gait
    }

    /// Largest difference in settled heading between friction coefficients at
    /// the same alpha, deg.
    pub fn max_mu_spread(&self) -> T {
        (0..self.nodes.len())
            .map(|k| {
                let (lo, hi) = self.per_mu.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), m| {
                    let v = m.samples[k].theta_avg;
                    (lo.min(v), hi.max(v))
                });
                hi - lo
            })
            .fold(T::zero(), T::max)
    }
}

/// A small synthetic map for tests that do not need simulated data.
#[doc(hidden)]
pub fn linear_test_map<T: Scalar>() -> GaitMap<T> {
    let samples: Vec<MapSample<T>> = (0..=30)
        .map(|a| MapSample { alpha: T::lit(a as f64), theta_avg: T::lit(2.0 * a as f64), theta_std: T::zero() })
        .collect();
    GaitMap {
        version: GAIT_MAP_VERSION,
        mu_list: vec![T::lit(0.5)],
        per_mu: vec![MuSamples { mu: T::lit(0.5), samples: samples.clone() }],
        nodes: samples.iter().map(|s| MapNode { alpha: s.alpha, theta: s.theta_avg }).collect(),
        zone_reversed: [false, true, false, true, false, true],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_names_round_trip() {
        for g in [CanonicalGait::TranslateLimb(1), CanonicalGait::TranslateLimb(3), CanonicalGait::RotateCw, CanonicalGait::RotateCcw] {
            let json = serde_json::to_string(&g).unwrap();
            assert_eq!(serde_json::from_str::<CanonicalGait>(&json).unwrap(), g);
            assert_eq!(g.to_string().parse::<CanonicalGait>(), Ok(g));
        }
        assert_eq!(serde_json::to_string(&CanonicalGait::TranslateLimb(2)).unwrap(), "\"translate_limb_2\"");
        assert!(serde_json::from_str::<CanonicalGait>("\"translate_limb_4\"").is_err());
    }

    #[test]
    fn limb_angle_peak_and_rest() {
        let g = GaitParams::from_amplitudes([30.0, 0.0, -30.0]);
        let (phi, _) = limb_angle(&g, 0, 0.25);
        assert!((phi - 30f64.to_radians()).abs() < 1e-15);
        for t in [0.0, 0.1, 0.77, 3.3] {
            assert_eq!(limb_angle(&g, 1, t), (0.0, 0.0));
        }
        let (phi0, rate0) = limb_angle(&g, 2, 0.0);
        assert_eq!(phi0, 0.0);
        assert!((rate0 - -30f64.to_radians() * std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn batched_limb_angles_agree() {
        let g = GaitParams::<f64> { amplitudes: [12.0, -25.0, 30.0], phases: [0.0, 1.1, -0.4], frequency: 1.3 };
        for t in [0.0, 0.13, 0.5, 2.71] {
            let (a, r) = limb_angles(&g, t);
            for i in 0..3 {
                let (ai, ri) = limb_angle(&g, i, t);
                assert!((a[i] - ai).abs() < 1e-14 && (r[i] - ri).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn canonical_gaits() {
        let t1 = canonical_gait::<f64>(CanonicalGait::TranslateLimb(1));
        assert_eq!(t1.amplitudes, [0.0, 30.0, -30.0]);
        assert_eq!(t1.phases, [0.0; 3]);
        assert_eq!(t1.frequency, 1.0);
        assert_eq!(canonical_gait::<f64>(CanonicalGait::TranslateLimb(2)).amplitudes, [-30.0, 0.0, 30.0]);
        assert_eq!(canonical_gait::<f64>(CanonicalGait::TranslateLimb(3)).amplitudes, [30.0, -30.0, 0.0]);
        for kind in [CanonicalGait::RotateCw, CanonicalGait::RotateCcw] {
            let g = canonical_gait::<f64>(kind);
            assert_eq!(g.amplitudes, [30.0; 3]);
            let d1 = wrap_deg((g.phases[1] - g.phases[0]).to_degrees());
            let d2 = wrap_deg((g.phases[2] - g.phases[1]).to_degrees());
            assert!((d1 - d2).abs() < 1e-9);
            assert!((d1 - 120.0).abs() < 1e-9 || (d1 - 240.0).abs() < 1e-9);
        }
        assert_eq!("translate_limb_2".parse(), Ok(CanonicalGait::TranslateLimb(2)));
        assert_eq!("rotate_ccw".parse(), Ok(CanonicalGait::RotateCcw));
        assert!("translate_limb_4".parse::<CanonicalGait>().is_err());
    }

    #[test]
    fn rotation_gaits_are_mirror_images() {
        // Mirror about the limb-1 axis: swap limbs 2 and 3 and negate angles.
        let cw = canonical_gait::<f64>(CanonicalGait::RotateCw);
        let ccw = canonical_gait::<f64>(CanonicalGait::RotateCcw);
        for k in 0..50 {
            let t = k as f64 * 0.0371;
            let (a, _) = limb_angles(&cw, t);
            let (b, _) = limb_angles(&ccw, t);
            assert!((a[0] + b[0]).abs() < 1e-12);
            assert!((a[1] + b[2]).abs() < 1e-12);
            assert!((a[2] + b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn zone_table_rows() {
        let z = zone_select(45.0);
        assert_eq!(z.id, 1);
        assert_eq!(z.amplitudes(12.0), [12.0, 30.0, -30.0]);
        assert_eq!(zone_select(60.0).id, 1);
        assert_eq!(zone_select(60.0001).id, 2);
        assert_eq!(zone_select(361.0).id, 1);
        assert_eq!(zone_select(0.0).id, 6);
        assert_eq!(zone_select(-1.0).id, 6);
        let expect: [[f64; 3]; 6] = [
            [7.0, 30.0, -30.0],
            [-30.0, -7.0, 30.0],
            [-30.0, 7.0, 30.0],
            [30.0, -30.0, -7.0],
            [30.0, -30.0, 7.0],
            [-7.0, 30.0, -30.0],
        ];
        for (zone, row) in ZONES.iter().zip(expect) {
            assert_eq!(zone.amplitudes(7.0), row);
        }
        assert_eq!(ZONES[3].alpha_limb(), 2);
    }

    #[test]
    fn zone_templates_are_symmetric() {
        // Relabelling limbs (a 120 deg body rotation) maps zone z onto z + 2.
        for z in 0..6 {
            let g = GaitParams::from_amplitudes(ZONES[z].amplitudes(11.0));
            assert_eq!(g.rotate_limbs().amplitudes, ZONES[(z + 2) % 6].amplitudes(11.0));
        }
    }

    #[test]
    fn lookup_nodes_midpoints_and_clamps() {
        let map = linear_test_map::<f64>();
        assert_eq!(map.lookup(20.0), Lookup { alpha: 10.0, clamped: false });
        assert_eq!(map.lookup(21.0), Lookup { alpha: 10.5, clamped: false });
        assert_eq!(map.lookup(-1.0), Lookup { alpha: 0.0, clamped: true });
        assert_eq!(map.lookup(61.0), Lookup { alpha: 30.0, clamped: true });
        assert_eq!(map.lookup(0.0), Lookup { alpha: 0.0, clamped: false });
    }

    #[test]
    fn heading_selection_uses_zone_offsets() {
        let map = linear_test_map::<f64>();
        let s = map.select(90.0);
        assert_eq!(s.zone, 2);
        assert_eq!(s.zone_angle, 30.0);
        assert_eq!(s.gait.amplitudes, [-30.0, -15.0, 30.0]);
        let s = map.select(45.0);
        assert_eq!((s.zone, s.alpha), (1, 22.5));
        assert_eq!(map.select(360.0).gait.amplitudes, [-0.0, 30.0, -30.0]);
        assert_eq!(map.gait_for_heading(405.0), map.gait_for_heading(45.0));
    }

    #[test]
    fn six_headings_give_permuted_templates() {
        let map = linear_test_map::<f64>();
        let gaits: Vec<_> = (0..6).map(|k| map.gait_for_heading(30.0 + 60.0 * k as f64)).collect();
        let mut magnitudes: Vec<Vec<f64>> = gaits
            .iter()
            .map(|g| {
                let mut v: Vec<f64> = g.amplitudes.iter().map(|a| a.abs()).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            })
            .collect();
        magnitudes.dedup();
        assert_eq!(magnitudes, vec![vec![15.0, 30.0, 30.0]]);
        for k in 0..6 {
            assert_eq!(gaits[k].rotate_limbs().amplitudes, gaits[(k + 2) % 6].amplitudes);
        }
    }

    #[test]
    fn monotone_check_rejects_bad_maps() {
        let mut map = linear_test_map::<f64>();
        assert!(map.validate().is_ok());
        map.per_mu[0].samples[5].theta_avg = 100.0;
        assert!(matches!(map.check_monotone(), Err(Error::MapNotMonotone { .. })));
        let mut map = linear_test_map::<f64>();
        for n in &mut map.nodes {
            n.theta = -n.theta - 10.0;
        }
        map.nodes.reverse();
        assert!(map.check_orientation().is_err());
    }

    #[test]
    fn build_rejects_bad_options() {
        let p = RobotParams::<f64>::nominal();
        let short = MapBuildOptions { cycles: 3, ..MapBuildOptions::default() };
        assert!(build_gait_map(&p, &short).is_err());
        let wide = MapBuildOptions { alpha_grid: vec![0.0, 31.0], ..MapBuildOptions::default() };
        assert!(build_gait_map(&p, &wide).is_err());
    }

    proptest! {
        #[test]
        fn every_heading_has_one_zone(h in -1000.0..1000.0f64) {
            let w = wrap_deg(h);
            prop_assert!(w > 0.0 && w <= 360.0);
            let hits = ZONES.iter().filter(|z| z.contains(w)).count();
            prop_assert_eq!(hits, 1);
            prop_assert!(zone_select(h).contains(w));
            let map = linear_test_map::<f64>();
            let s = map.select(h);
            prop_assert!(s.gait.amplitudes.iter().all(|a| a.abs() <= 30.0));
            prop_assert!(s.gait.validate().is_ok());
        }
    }
}
