//! The 97-graph test suite, optimizer comparisons and their ratios.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt::fmt_g;
use crate::graphs::{brute_force_maxcut, gen_barbell, gen_caveman, gen_erdos_renyi, gen_ladder, CutResult, Graph};
use crate::optimizers::{multi_start, rlnm_from_phase1, start_point, OptRunRecord, OptimizerSpec};
use crate::ppo::PolicyCheckpoint;
use crate::qsim::{CostDiagonal, QaoaObjective, MAX_QUBITS};
use crate::rng::derive_seed;

/// Largest instance the benchmark simulates.
pub const MAX_BENCH_QUBITS: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Random,
    Community,
    Ladder,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Random, Family::Community, Family::Ladder];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Random => "random",
            Family::Community => "community",
            Family::Ladder => "ladder",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown family '{s}' (expected random, community or ladder)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// Position in the full suite; seeds derive from it.
    pub id: usize,
    pub graph: Graph,
    pub family: Family,
    pub c_opt: CutResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestSuite {
    pub instances: Vec<Instance>,
}

impl TestSuite {
    pub fn from_graphs(graphs: Vec<(Graph, Family)>) -> Result<Self> {
        let instances = graphs
            .into_par_iter()
            .enumerate()
            .map(|(id, (graph, family))| Ok(Instance { id, c_opt: brute_force_maxcut(&graph)?, graph, family }))
            .collect::<Result<_>>()?;
        Ok(Self { instances })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn count(&self, family: Family) -> usize {
        self.instances.iter().filter(|i| i.family == family).count()
    }

    pub fn only(&self, families: &[Family]) -> Self {
        Self { instances: self.instances.iter().filter(|i| families.contains(&i.family)).cloned().collect() }
    }
}

/// Random graphs, then ladders, barbells and caveman graphs.
pub fn build_g_test() -> Result<TestSuite> {
    let mut graphs = Vec::with_capacity(97);
    for n in [8, 12, 16, 20] {
        for ep in [0.5, 0.6, 0.7, 0.8] {
            for seed in 1..=4 {
                graphs.push((gen_erdos_renyi(n, ep, seed)?, Family::Random));
            }
        }
    }
    for len in 2..=11 {
        graphs.push((gen_ladder(len)?, Family::Ladder));
    }
    for k in 3..=11 {
        graphs.push((gen_barbell(k)?, Family::Community));
    }
    let caves = [(3, 4), (4, 4), (5, 4), (3, 3), (5, 3), (7, 3)].into_iter().chain((3..=10).map(|k| (2, k)));
    for (c, k) in caves {
        graphs.push((gen_caveman(c, k)?, Family::Community));
    }
    TestSuite::from_graphs(graphs)
}

pub fn approximation_ratio(f: f64, c_opt: &CutResult) -> Result<f64> {
    if c_opt.value == 0 {
        return Err(Error::invalid("approximation ratio undefined for a graph without edges"));
    }
    Ok(f / c_opt.value as f64)
}

pub fn optimality_ratio(f: f64, f_opt: f64) -> Result<f64> {
    if f_opt.is_nan() || f_opt <= 0.0 {
        return Err(Error::invalid(format!("best known value must be positive, got {f_opt}")));
    }
    if f > f_opt {
        return Err(Error::Bookkeeping(format!("value {f} exceeds the best known value {f_opt}")));
    }
    Ok(f / f_opt)
}

/// Median over instances of `(1 - tau_base) / (1 - tau_method)`.
///
/// Instances where both gaps vanish are left out; a vanishing method gap
/// against a positive baseline gap counts as `+inf`. Returns NaN when every
/// instance is left out.
pub fn gap_reduction(tau_base: &[f64], tau_method: &[f64]) -> Result<f64> {
    if tau_base.is_empty() || tau_base.len() != tau_method.len() {
        return Err(Error::Empty(format!(
            "gap reduction needs paired non-empty subgroups, got {} and {}",
            tau_base.len(),
            tau_method.len()
        )));
    }
    let mut pool: Vec<f64> = tau_base
        .iter()
        .zip(tau_method)
        .filter_map(|(b, m)| {
            let (gb, gm) = (1.0 - b, 1.0 - m);
            match (gb == 0.0, gm == 0.0) {
                (true, true) => None,
                (false, true) => Some(f64::INFINITY),
                _ => Some(gb / gm),
            }
        })
        .collect();
    Ok(median(&mut pool))
}

pub(crate) fn median(xs: &mut [f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Linearly interpolated quantile; sorts `xs` in place.
pub(crate) fn quantile(xs: &mut [f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let pos = q * (xs.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    if lo == hi || xs[lo] == xs[hi] {
        xs[lo]
    } else {
        xs[lo] + (pos - lo as f64) * (xs[hi] - xs[lo])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub depths: Vec<usize>,
    pub attempts: usize,
    pub budget: usize,
    pub seed: u64,
    /// Concurrent cells; 0 uses every available core.
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { depths: vec![1, 2, 4], attempts: 10, budget: 192, seed: 0, jobs: 0 }
    }
}

/// All attempts of one optimizer on one instance at one depth.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub instance: usize,
    pub p: usize,
    pub optimizer: String,
    pub records: Vec<OptRunRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub instance_label: String,
    pub family: Family,
    pub n: usize,
    pub p: usize,
    pub optimizer: String,
    pub attempt: usize,
    pub best_f: f64,
    pub c_opt: usize,
    pub f_opt: f64,
    pub eta: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub family: Family,
    pub p: usize,
    pub optimizer: String,
    pub mean_tau: f64,
    pub median_tau: f64,
    pub q1: f64,
    pub q3: f64,
    pub gap_reduction_vs_nm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub summary: Vec<SummaryRow>,
    pub cells: Vec<Cell>,
    /// Skipped work, e.g. instances beyond capacity or depths without a policy.
    pub notes: Vec<String>,
    /// Cells that failed; a non-empty list marks the report as partial.
    pub failures: Vec<String>,
}

impl BenchReport {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Mean over attempts of `tau` for every (instance label, p, optimizer).
    pub fn expected_tau(&self) -> BTreeMap<(String, usize, String), f64> {
        self.expected(|r| r.tau)
    }

    /// Mean over attempts of `eta` for every (instance label, p, optimizer).
    pub fn expected_eta(&self) -> BTreeMap<(String, usize, String), f64> {
        self.expected(|r| r.eta)
    }

    fn expected(&self, pick: impl Fn(&ReportRow) -> f64) -> BTreeMap<(String, usize, String), f64> {
        let mut acc: BTreeMap<(String, usize, String), (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = acc.entry((r.instance_label.clone(), r.p, r.optimizer.clone())).or_default();
            e.0 += pick(r);
            e.1 += 1;
        }
        acc.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect()
    }

    pub fn write_report_csv<W: Write>(&self, mut w: W) -> Result<()> {
        self.write_header(&mut w)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "instance_label",
            "family",
            "n",
            "p",
            "optimizer",
            "attempt",
            "best_f",
            "c_opt",
            "f_opt",
            "eta",
            "tau",
        ])
        .map_err(csv_err)?;
        for r in &self.rows {
            out.write_record([
                r.instance_label.clone(),
                r.family.as_str().to_string(),
                r.n.to_string(),
                r.p.to_string(),
                r.optimizer.clone(),
                r.attempt.to_string(),
                fmt_g(r.best_f, 17),
                r.c_opt.to_string(),
                fmt_g(r.f_opt, 17),
                fmt_g(r.eta, 17),
                fmt_g(r.tau, 17),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        self.write_header(&mut w)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["family", "p", "optimizer", "mean_tau", "median_tau", "q1", "q3", "gap_reduction_vs_nm"])
            .map_err(csv_err)?;
        for s in &self.summary {
            out.write_record([
                s.family.as_str().to_string(),
                s.p.to_string(),
                s.optimizer.clone(),
                fmt_g(s.mean_tau, 17),
                fmt_g(s.median_tau, 17),
                fmt_g(s.q1, 17),
                fmt_g(s.q3, 17),
                fmt_g(s.gap_reduction_vs_nm, 17),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    fn write_header<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "# seed={}", self.seed)?;
        if self.is_partial() {
            writeln!(w, "# partial: {} cell(s) failed", self.failures.len())?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("csv: {other:?}")),
    }
}

/// Runs NM at every depth, and RL and RLNM at depths with a matching
/// checkpoint, on identical start points.
pub fn run_benchmark(suite: &TestSuite, checkpoints: &[PolicyCheckpoint], cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.depths.is_empty() || cfg.depths.contains(&0) {
        return Err(Error::invalid(format!(
            "depths must be a non-empty list of positive integers, got {:?}",
            cfg.depths
        )));
    }
    if cfg.attempts == 0 {
        return Err(Error::invalid("at least one attempt per optimizer is required"));
    }
    let mut notes = Vec::new();
    let history = checkpoints.first().map(|c| c.history());
    if checkpoints.iter().any(|c| Some(c.history()) != history) {
        return Err(Error::ShapeMismatch("checkpoints disagree on history length".into()));
    }
    for &p in &cfg.depths {
        if !checkpoints.iter().any(|c| c.p() == p) {
            notes.push(format!("no policy checkpoint for p={p}: only NM runs at this depth"));
        }
    }
    let mut jobs = Vec::new();
    for inst in &suite.instances {
        if inst.graph.n() > MAX_BENCH_QUBITS.min(MAX_QUBITS) {
            notes.push(format!(
                "{} skipped: {} qubits exceed the limit of {MAX_BENCH_QUBITS}",
                inst.graph.label(),
                inst.graph.n()
            ));
            continue;
        }
        for &p in &cfg.depths {
            jobs.push((inst, p));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let results: Vec<(usize, usize, Result<Vec<Cell>>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(inst, p)| {
                let ck = checkpoints.iter().find(|c| c.p() == p);
                (inst.id, p, run_cell(inst, p, ck, cfg))
            })
            .collect()
    });

    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for (id, p, res) in results {
        match res {
            Ok(c) => cells.extend(c),
            Err(e) => {
                let label = suite.instances.iter().find(|i| i.id == id).map(|i| i.graph.label()).unwrap_or("?");
                failures.push(format!("{label} at p={p}: {e}"));
            }
        }
    }
    let (rows, summary) = assemble(suite, &cells, &cfg.depths)?;
    Ok(BenchReport { seed: cfg.seed, rows, summary, cells, notes, failures })
}

fn run_cell(inst: &Instance, p: usize, ck: Option<&PolicyCheckpoint>, cfg: &BenchConfig) -> Result<Vec<Cell>> {
    let d = CostDiagonal::from_graph(&inst.graph)?;
    let objective = QaoaObjective::new(&d, p)?;
    let seed = derive_seed(cfg.seed, &[inst.id as u64, p as u64]);
    let cell = |optimizer: &str, records: Vec<OptRunRecord>| Cell {
        instance: inst.id,
        p,
        optimizer: optimizer.to_string(),
        records,
    };
    let nm = multi_start(OptimizerSpec::NelderMead, &objective, cfg.attempts, cfg.budget, seed)?;
    let mut out = vec![cell("NM", nm.records)];
    if let Some(ck) = ck {
        let rl = multi_start(OptimizerSpec::Rl(ck), &objective, cfg.attempts, cfg.budget, seed)?;
        // the hybrid's first phase is the first half of the same deterministic rollout
        let hybrid = rl
            .records
            .par_iter()
            .map(|r| {
                debug_assert_eq!(r.trace[0].x, start_point(seed, r.attempt, 2 * p));
                let mut h = rlnm_from_phase1(&objective, &r.truncated(cfg.budget / 2)?, cfg.budget)?;
                h.attempt = r.attempt;
                h.seed = r.seed;
                Ok(h)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(cell("RL", rl.records));
        out.push(cell("RLNM", hybrid));
    }
    Ok(out)
}

fn assemble(suite: &TestSuite, cells: &[Cell], depths: &[usize]) -> Result<(Vec<ReportRow>, Vec<SummaryRow>)> {
    let order = |name: &str| ["NM", "RL", "RLNM"].iter().position(|o| *o == name).unwrap_or(3);
    let mut sorted: Vec<&Cell> = cells.iter().collect();
    sorted.sort_by_key(|c| (c.instance, depths.iter().position(|&d| d == c.p), order(&c.optimizer)));

    let mut f_opt: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for c in &sorted {
        for r in &c.records {
            let e = f_opt.entry((c.instance, c.p)).or_insert(f64::NEG_INFINITY);
            *e = e.max(r.best_f);
        }
    }
    let mut rows = Vec::new();
    // (family, p, optimizer) -> instance -> per-attempt taus
    let mut taus: BTreeMap<(Family, usize, usize), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for c in &sorted {
        let inst = suite
            .instances
            .iter()
            .find(|i| i.id == c.instance)
            .ok_or_else(|| Error::Bookkeeping(format!("cell for unknown instance {}", c.instance)))?;
        let fo = f_opt[&(c.instance, c.p)];
        for r in &c.records {
            let tau = optimality_ratio(r.best_f, fo)?;
            rows.push(ReportRow {
                instance_label: inst.graph.label().to_string(),
                family: inst.family,
                n: inst.graph.n(),
                p: c.p,
                optimizer: c.optimizer.clone(),
                attempt: r.attempt,
                best_f: r.best_f,
                c_opt: inst.c_opt.value,
                f_opt: fo,
                eta: approximation_ratio(r.best_f, &inst.c_opt)?,
                tau,
            });
            taus.entry((inst.family, c.p, order(&c.optimizer))).or_default().entry(c.instance).or_default().push(tau);
        }
    }
    let names = ["NM", "RL", "RLNM"];
    let expected = |m: &BTreeMap<usize, Vec<f64>>| -> BTreeMap<usize, f64> {
        m.iter().map(|(k, v)| (*k, v.iter().sum::<f64>() / v.len() as f64)).collect()
    };
    let mut summary = Vec::new();
    for family in Family::ALL {
        for &p in depths {
            let Some(nm) = taus.get(&(family, p, 0)).map(expected) else { continue };
            for (oi, name) in names.iter().enumerate() {
                let Some(per) = taus.get(&(family, p, oi)).map(expected) else { continue };
                let mut values: Vec<f64> = per.values().copied().collect();
                let paired: Vec<(f64, f64)> = per.iter().filter_map(|(k, t)| nm.get(k).map(|b| (*b, *t))).collect();
                let (base, method): (Vec<f64>, Vec<f64>) = paired.into_iter().unzip();
                summary.push(SummaryRow {
                    family,
                    p,
                    optimizer: name.to_string(),
                    mean_tau: values.iter().sum::<f64>() / values.len() as f64,
                    median_tau: median(&mut values),
                    q1: quantile(&mut values, 0.25),
                    q3: quantile(&mut values, 0.75),
                    gap_reduction_vs_nm: gap_reduction(&base, &method)?,
                });
            }
        }
    }
    Ok((rows, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::complete_graph;

    #[test]
    fn ratios() {
        let k3 = brute_force_maxcut(&complete_graph(3).unwrap()).unwrap();
        assert_eq!(approximation_ratio(1.5, &k3).unwrap(), 0.75);
        assert_eq!(approximation_ratio(2.0, &k3).unwrap(), 1.0);
        let empty = CutResult { value: 0, assignment: vec![0, 0] };
        assert!(approximation_ratio(0.0, &empty).is_err());
        assert_eq!(optimality_ratio(0.0, 2.0).unwrap(), 0.0);
        assert!((optimality_ratio(1.8, 2.0).unwrap() - 0.9).abs() < 1e-15);
        assert!(matches!(optimality_ratio(2.1, 2.0), Err(Error::Bookkeeping(_))));
    }

    #[test]
    fn gap_reduction_rules() {
        assert!((gap_reduction(&[0.8, 0.8, 0.8], &[0.9, 0.9, 0.9]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(gap_reduction(&[0.7, 0.95], &[0.7, 0.95]).unwrap(), 1.0);
        // both-zero instance dropped, zero method gap counts as infinity
        assert_eq!(gap_reduction(&[1.0, 0.5, 0.5], &[1.0, 1.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(gap_reduction(&[1.0], &[1.0]).unwrap().is_nan());
        assert!(matches!(gap_reduction(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn quantiles_interpolate() {
        let mut xs = vec![4.0, 1.0, 3.0, 2.0];
        assert_eq!(median(&mut xs), 2.5);
        assert_eq!(quantile(&mut xs, 0.25), 1.75);
        assert_eq!(quantile(&mut xs, 0.75), 3.25);
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(Family::parse(f.as_str()).unwrap(), f);
        }
        assert!(Family::parse("cliques").is_err());
    }
}
