//! Seeded, parallel Monte-Carlo BER estimation.
//!
//! A sweep is a grid of points (one per transmit power, or one per training
//! length). Each point is split into `blocks` independent train-then-transmit
//! rounds: a fresh training frame, fresh [`TrainingStats`], then a share of
//! the point's data symbols. BER therefore averages over training
//! realisations as well as over channel and noise.
//!
//! Every (point, block) pair owns a ChaCha8 stream: the root seed keys the
//! cipher and `point << 32 | block` selects the stream. All techniques of a
//! point see the same block streams (common random numbers), so per-technique
//! results are paired and a point's error counts depend only on
//! `(seed, point index, block index)`, never on thread count or scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::NodeProfile;
use crate::detect::{
    comb_weights_unchecked, compute_training_stats, decide, dev_weights, mrc_detect, ordered_sum, prob_weights,
    Technique, TrainingStats, WeightPair,
};
use crate::error::{Error, Result};
use crate::link::{
    generate_data_symbols, generate_received, training_symbols, LinkParams, Symbol, DEFAULT_BANDWIDTH_HZ,
    DEFAULT_N0_DBM_PER_HZ,
};

pub const DEFAULT_N_T: usize = 50;
pub const DEFAULT_SYMBOLS: u64 = 1_000_000;
pub const DEFAULT_BLOCKS: usize = 100;
pub const DEFAULT_POWER_START_DBM: f64 = -20.0;
pub const DEFAULT_POWER_STOP_DBM: f64 = 30.0;
pub const DEFAULT_POWER_STEP_DB: f64 = 2.0;

/// `start, start + step, ...` up to and including `stop` (within rounding).
pub fn power_range(start_dbm: f64, stop_dbm: f64, step_db: f64) -> Result<Vec<f64>> {
    if !(start_dbm.is_finite() && stop_dbm.is_finite() && step_db.is_finite()) || step_db <= 0.0 {
        return Err(Error::param(
            "power_range",
            format!("need finite bounds and step > 0, got {start_dbm}..{stop_dbm} step {step_db}"),
        ));
    }
    if stop_dbm < start_dbm {
        return Err(Error::param("power_range", "stop_dbm is below start_dbm"));
    }
    let steps = ((stop_dbm - start_dbm) / step_db + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| start_dbm + i as f64 * step_db).collect())
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<NodeProfile>,
    pub n_t: usize,
    pub power_sweep_dbm: Vec<f64>,
    pub n_data_symbols: u64,
    pub techniques: Vec<Technique>,
    pub seed: u64,
    pub n0_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    /// Independent train-then-transmit rounds per point.
    pub blocks: usize,
    /// When set, sweep the training length at the single power in
    /// `power_sweep_dbm` instead of sweeping power.
    pub n_t_sweep: Option<Vec<usize>>,
    /// Run every node as its own single-node link.
    pub per_node: bool,
}

impl Scenario {
    /// A scenario over `nodes` with the default link budget, sweep and
    /// symbol budget, running every technique.
    pub fn with_nodes(nodes: Vec<NodeProfile>) -> Self {
        Scenario {
            nodes,
            n_t: DEFAULT_N_T,
            power_sweep_dbm: power_range(DEFAULT_POWER_START_DBM, DEFAULT_POWER_STOP_DBM, DEFAULT_POWER_STEP_DB)
                .expect("default sweep is valid"),
            n_data_symbols: DEFAULT_SYMBOLS,
            techniques: Technique::ALL.to_vec(),
            seed: 0,
            n0_dbm_per_hz: DEFAULT_N0_DBM_PER_HZ,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            blocks: DEFAULT_BLOCKS,
            n_t_sweep: None,
            per_node: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::param("nodes", "at least one receive node is required"));
        }
        for (i, a) in self.nodes.iter().enumerate() {
            if self.nodes[..i].iter().any(|b| b.id == a.id) {
                return Err(Error::param("nodes", format!("duplicate node id {}", a.id)));
            }
        }
        check_n_t("n_t", self.n_t)?;
        if self.power_sweep_dbm.is_empty() {
            return Err(Error::param("power_sweep_dbm", "sweep is empty"));
        }
        for &p in &self.power_sweep_dbm {
            if p.is_nan() || p == f64::INFINITY {
                return Err(Error::param("power_sweep_dbm", format!("invalid power {p}")));
            }
        }
        if self.power_sweep_dbm.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("power_sweep_dbm", "powers must be strictly increasing"));
        }
        if self.n_data_symbols == 0 {
            return Err(Error::param("n_data_symbols", "must be >= 1"));
        }
        if self.techniques.is_empty() {
            return Err(Error::param("techniques", "at least one technique is required"));
        }
        for (i, t) in self.techniques.iter().enumerate() {
            if self.techniques[..i].contains(t) {
                return Err(Error::param("techniques", format!("`{t}` listed twice")));
            }
        }
        if self.blocks == 0 || self.blocks > u32::MAX as usize {
            return Err(Error::param(
                "blocks",
                format!("must be in 1..=2^32-1, got {}", self.blocks),
            ));
        }
        LinkParams::new(0.0, self.n0_dbm_per_hz, self.bandwidth_hz)?;
        if let Some(values) = &self.n_t_sweep {
            if values.is_empty() {
                return Err(Error::param("n_t_sweep", "sweep is empty"));
            }
            for &n_t in values {
                check_n_t("n_t_sweep", n_t)?;
            }
            if self.power_sweep_dbm.len() != 1 {
                return Err(Error::param(
                    "power_sweep_dbm",
                    "a training-length sweep runs at exactly one power",
                ));
            }
        }
        Ok(())
    }

    fn link(&self, power_dbm: f64) -> Result<LinkParams> {
        LinkParams::new(power_dbm, self.n0_dbm_per_hz, self.bandwidth_hz)
    }
}

fn check_n_t(name: &'static str, n_t: usize) -> Result<()> {
    if n_t < 4 || !n_t.is_multiple_of(2) {
        return Err(Error::param(name, format!("must be even and >= 4, got {n_t}")));
    }
    Ok(())
}

/// Normal-approximation 95% confidence half-width of a binomial proportion.
pub fn ci95_half_width(errors: u64, symbols: u64) -> f64 {
    if symbols == 0 {
        return f64::NAN;
    }
    let n = symbols as f64;
    let p = errors as f64 / n;
    1.96 * (p * (1.0 - p) / n).sqrt()
}

/// One measured BER sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub technique: Technique,
    pub tx_power_dbm: f64,
    pub n_t: usize,
    pub symbol_count: u64,
    pub error_count: u64,
    pub ber: f64,
    pub ci95: f64,
}

impl BerPoint {
    pub fn from_counts(
        technique: Technique,
        tx_power_dbm: f64,
        n_t: usize,
        error_count: u64,
        symbol_count: u64,
    ) -> Self {
        BerPoint {
            technique,
            tx_power_dbm,
            n_t,
            symbol_count,
            error_count,
            ber: error_count as f64 / symbol_count as f64,
            ci95: ci95_half_width(error_count, symbol_count),
        }
    }
}

/// A point for which every block had unusable training.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub technique: Technique,
    pub tx_power_dbm: f64,
    pub n_t: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub points: Vec<BerPoint>,
    pub failures: Vec<PointFailure>,
}

/// Results of one link. `label` names the node in per-node runs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledResult {
    pub label: Option<String>,
    pub result: SweepResult,
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    power_dbm: f64,
    n_t: usize,
}

/// Errors of one technique in one block; `None` when training was unusable.
type BlockCounts = Vec<Option<u64>>;

/// Stream for one (point, block) pair.
pub fn block_rng(seed: u64, point: usize, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | block as u64);
    rng
}

/// Symbols carried by each block: as even a split as possible, earlier
/// blocks taking the remainder.
fn block_sizes(total: u64, blocks: usize) -> Vec<u64> {
    let blocks = (blocks as u64).min(total).max(1);
    let base = total / blocks;
    let extra = total % blocks;
    (0..blocks).map(|b| base + u64::from(b < extra)).collect()
}

/// Trains once, then detects `n_symbols` data symbols with every technique.
fn simulate_block(
    nodes: &[NodeProfile],
    link: &LinkParams,
    n_t: usize,
    n_symbols: usize,
    techniques: &[Technique],
    rng: &mut ChaCha8Rng,
) -> Result<BlockCounts> {
    let training = generate_received(&training_symbols(n_t)?, nodes, link, rng)?;
    let stats = compute_training_stats(&training)?;
    let degenerate = stats.iter().any(|s| s.a_th() <= 0.0);

    let x = generate_data_symbols(n_symbols, rng);
    let frame = generate_received(&x, nodes, link, rng)?;
    let p_watts = link.tx_power_w();

    let k = nodes.len();
    let mut y = vec![0.0; k];
    let mut h = vec![0.0; k];
    let mut scratch = FusionScratch::new(k);
    let mut errors = vec![0u64; techniques.len()];
    for (n, &sent) in x.iter().enumerate() {
        for i in 0..k {
            y[i] = frame.received(i)[n];
            h[i] = frame.gains(i)[n];
        }
        for (t, technique) in techniques.iter().enumerate() {
            let detected = match technique {
                Technique::Probability => scratch.fuse(&y, &stats, prob_weights),
                Technique::Deviation => scratch.fuse(&y, &stats, dev_weights),
                Technique::Combination if degenerate => continue,
                Technique::Combination => scratch.fuse(&y, &stats, comb_weights_unchecked),
                Technique::Mrc => mrc_detect(&y, &h, p_watts),
            };
            errors[t] += u64::from(detected != sent);
        }
    }
    Ok(techniques
        .iter()
        .zip(errors)
        .map(|(t, e)| (!(degenerate && *t == Technique::Combination)).then_some(e))
        .collect())
}

/// Reusable buffers for [`crate::detect::fuse`]'s ordered sums.
struct FusionScratch {
    one: Vec<f64>,
    zero: Vec<f64>,
}

impl FusionScratch {
    fn new(k: usize) -> Self {
        FusionScratch {
            one: vec![0.0; k],
            zero: vec![0.0; k],
        }
    }

    #[inline]
    fn fuse(
        &mut self,
        y: &[f64],
        stats: &[TrainingStats],
        weights: impl Fn(f64, &TrainingStats) -> WeightPair,
    ) -> Symbol {
        for (i, (v, s)) in y.iter().zip(stats).enumerate() {
            let w = weights(v.abs(), s);
            self.one[i] = w.one;
            self.zero[i] = w.zero;
        }
        decide(ordered_sum(&mut self.one), ordered_sum(&mut self.zero))
    }
}

/// Runs every (point, block) task on the current rayon pool and merges the
/// counts per point in grid order.
fn run_grid(
    scenario: &Scenario,
    nodes: &[NodeProfile],
    grid: &[GridPoint],
    techniques: &[Technique],
    point_offset: usize,
) -> Result<SweepResult> {
    let sizes = block_sizes(scenario.n_data_symbols, scenario.blocks);
    let links = grid
        .iter()
        .map(|g| scenario.link(g.power_dbm))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|p| (0..sizes.len()).map(move |b| (p, b)))
        .collect();

    let counts = tasks
        .par_iter()
        .map(|&(p, b)| {
            let mut rng = block_rng(scenario.seed, point_offset + p, b);
            simulate_block(nodes, &links[p], grid[p].n_t, sizes[b] as usize, techniques, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = SweepResult::default();
    for (p, point_counts) in counts.chunks(sizes.len()).enumerate() {
        for (t, &technique) in techniques.iter().enumerate() {
            let mut errors = 0u64;
            let mut symbols = 0u64;
            for (b, block) in point_counts.iter().enumerate() {
                if let Some(e) = block[t] {
                    errors += e;
                    symbols += sizes[b];
                }
            }
            let GridPoint { power_dbm, n_t } = grid[p];
            if symbols == 0 {
                out.failures.push(PointFailure {
                    technique,
                    tx_power_dbm: power_dbm,
                    n_t,
                    reason: "training was silent in every block".into(),
                });
            } else {
                out.points
                    .push(BerPoint::from_counts(technique, power_dbm, n_t, errors, symbols));
            }
        }
    }
    Ok(out)
}

/// BER of one technique at one power of the scenario's sweep.
pub fn run_point(scenario: &Scenario, power_dbm: f64, technique: Technique) -> Result<BerPoint> {
    scenario.validate()?;
    if !scenario.techniques.contains(&technique) {
        return Err(Error::param(
            "technique",
            format!("`{technique}` is not part of the scenario"),
        ));
    }
    let index = scenario
        .power_sweep_dbm
        .iter()
        .position(|&p| p == power_dbm)
        .ok_or_else(|| Error::param("power_dbm", format!("{power_dbm} dBm is not in the sweep")))?;
    let grid = [GridPoint {
        power_dbm,
        n_t: scenario.n_t,
    }];
    let result = run_grid(scenario, &scenario.nodes, &grid, &[technique], index)?;
    match result.points.into_iter().next() {
        Some(point) => Ok(point),
        None => Err(Error::DegenerateTraining {
            node: 0,
            reason: result.failures[0].reason.clone(),
        }),
    }
}

/// One BER point per (power, technique) at the scenario's training length.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepResult> {
    scenario.validate()?;
    let grid: Vec<GridPoint> = scenario
        .power_sweep_dbm
        .iter()
        .map(|&power_dbm| GridPoint {
            power_dbm,
            n_t: scenario.n_t,
        })
        .collect();
    run_grid(scenario, &scenario.nodes, &grid, &scenario.techniques, 0)
}

/// One BER point per (training length, technique) at a fixed power.
pub fn run_nt_sweep(scenario: &Scenario, nt_values: &[usize], fixed_power_dbm: f64) -> Result<SweepResult> {
    scenario.validate()?;
    if nt_values.is_empty() {
        return Err(Error::param("n_t_sweep", "sweep is empty"));
    }
    for &n_t in nt_values {
        check_n_t("n_t_sweep", n_t)?;
    }
    scenario.link(fixed_power_dbm)?;
    let grid: Vec<GridPoint> = nt_values
        .iter()
        .map(|&n_t| GridPoint {
            power_dbm: fixed_power_dbm,
            n_t,
        })
        .collect();
    run_grid(scenario, &scenario.nodes, &grid, &scenario.techniques, 0)
}

/// Runs whatever the scenario describes: a power or training-length sweep,
/// over the whole node set or node by node.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<LabelledResult>> {
    scenario.validate()?;
    let run_one = |s: &Scenario| match &s.n_t_sweep {
        Some(values) => run_nt_sweep(s, values, s.power_sweep_dbm[0]),
        None => run_sweep(s),
    };
    if !scenario.per_node {
        return Ok(vec![LabelledResult {
            label: None,
            result: run_one(scenario)?,
        }]);
    }
    scenario
        .nodes
        .iter()
        .map(|node| {
            let single = Scenario {
                nodes: vec![node.clone()],
                per_node: false,
                ..scenario.clone()
            };
            Ok(LabelledResult {
                label: Some(node.name.clone()),
                result: run_one(&single)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::registry_entry;

    fn small(names: &[&str]) -> Scenario {
        let mut s = Scenario::with_nodes(names.iter().map(|n| registry_entry(n).unwrap()).collect());
        s.power_sweep_dbm = vec![0.0, 10.0];
        s.n_data_symbols = 2_000;
        s.blocks = 10;
        s
    }

    #[test]
    fn power_range_is_inclusive() {
        let r = power_range(-20.0, 30.0, 2.0).unwrap();
        assert_eq!(r.len(), 26);
        assert_eq!(r[0], -20.0);
        assert_eq!(r[25], 30.0);
        assert_eq!(power_range(10.0, 10.0, 1.0).unwrap(), [10.0]);
        assert!(power_range(0.0, 1.0, 0.0).is_err());
        assert!(power_range(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn block_split_is_exact() {
        assert_eq!(block_sizes(10, 3), [4, 3, 3]);
        assert_eq!(block_sizes(2, 100), [1, 1]);
        assert_eq!(block_sizes(1_000_000, 100).iter().sum::<u64>(), 1_000_000);
    }

    #[test]
    fn ci_matches_binomial_formula() {
        let (e, n) = (1234u64, 100_000u64);
        let p = 1234.0 / 100_000.0;
        let sd = (p * (1.0 - p) / 100_000.0f64).sqrt();
        assert!((ci95_half_width(e, n) - 1.96 * sd).abs() < 1e-12);
        assert_eq!(ci95_half_width(0, 10), 0.0);
    }

    #[test]
    fn validation_names_the_key() {
        let mut s = small(&["f9"]);
        s.n_t = 51;
        assert!(matches!(s.validate(), Err(Error::Parameter { name: "n_t", .. })));
        let mut s = small(&["f9"]);
        s.power_sweep_dbm = vec![10.0, 0.0];
        assert!(matches!(
            s.validate(),
            Err(Error::Parameter {
                name: "power_sweep_dbm",
                ..
            })
        ));
        let mut s = small(&["f9"]);
        s.nodes.clear();
        assert!(matches!(s.validate(), Err(Error::Parameter { name: "nodes", .. })));
        let mut s = small(&["f9", "f9"]);
        assert!(s.validate().is_err());
        s.nodes.pop();
        s.n_data_symbols = 0;
        assert!(matches!(
            s.validate(),
            Err(Error::Parameter {
                name: "n_data_symbols",
                ..
            })
        ));
        let mut s = small(&["f9"]);
        s.n_t_sweep = Some(vec![10, 20]);
        assert!(s.validate().is_err(), "two powers with an n_t sweep");
        s.power_sweep_dbm = vec![10.0];
        assert!(s.validate().is_ok());
        s.n_t_sweep = Some(vec![10, 3]);
        assert!(matches!(s.validate(), Err(Error::Parameter { name: "n_t_sweep", .. })));
    }

    #[test]
    fn sweep_is_deterministic_and_counts_symbols() {
        let s = small(&["f2", "f5", "f9"]);
        let a = run_sweep(&s).unwrap();
        let b = run_sweep(&s).unwrap();
        assert_eq!(a, b);
        assert!(a.failures.is_empty());
        assert_eq!(a.points.len(), 2 * 4);
        for p in &a.points {
            assert_eq!(p.symbol_count, 2_000);
            assert!(p.error_count <= p.symbol_count);
            assert!((0.0..=1.0).contains(&p.ber));
        }
    }

    #[test]
    fn run_point_agrees_with_sweep() {
        let s = small(&["f1", "f9"]);
        let sweep = run_sweep(&s).unwrap();
        for p in &sweep.points {
            assert_eq!(&run_point(&s, p.tx_power_dbm, p.technique).unwrap(), p);
        }
        assert!(run_point(&s, 5.0, Technique::Deviation).is_err());
        let mut only = s.clone();
        only.techniques = vec![Technique::Deviation];
        assert!(run_point(&only, 0.0, Technique::Mrc).is_err());
    }

    #[test]
    fn single_power_sweep_is_run_point() {
        let mut s = small(&["f9"]);
        s.power_sweep_dbm = vec![4.0];
        let sweep = run_sweep(&s).unwrap();
        for p in &sweep.points {
            assert_eq!(&run_point(&s, 4.0, p.technique).unwrap(), p);
        }
    }

    #[test]
    fn silent_training_is_reported() {
        let mut s = small(&["f9"]);
        s.n0_dbm_per_hz = f64::NEG_INFINITY;
        s.power_sweep_dbm = vec![f64::NEG_INFINITY];
        let r = run_sweep(&s).unwrap();
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].technique, Technique::Combination);
        assert!(matches!(
            run_point(&s, f64::NEG_INFINITY, Technique::Combination),
            Err(Error::DegenerateTraining { .. })
        ));
    }

    #[test]
    fn per_node_runs_are_labelled() {
        let mut s = small(&["f2", "f3"]);
        s.per_node = true;
        s.techniques = vec![Technique::Probability];
        let out = run_scenario(&s).unwrap();
        let labels: Vec<_> = out.iter().map(|r| r.label.clone().unwrap()).collect();
        assert_eq!(labels, ["f2", "f3"]);
        assert!(out.iter().all(|r| r.result.points.len() == 2));
    }

    #[test]
    fn nt_sweep_points() {
        let mut s = small(&["f5", "f8"]);
        s.power_sweep_dbm = vec![10.0];
        s.n_t_sweep = Some(vec![10, 50]);
        let out = run_scenario(&s).unwrap();
        let pts = &out[0].result.points;
        assert_eq!(pts.len(), 2 * 4);
        assert!(pts.iter().all(|p| p.tx_power_dbm == 10.0));
        assert_eq!(pts.iter().filter(|p| p.n_t == 10).count(), 4);
    }
}
