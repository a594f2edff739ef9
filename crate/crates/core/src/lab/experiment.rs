use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{orient, segment_order_dual, segment_order_param, EvalReport};
use crate::predicates::PredicateKind;
use crate::schemes::SchemeId;

use super::{gen_collinear, gen_concurrent};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub predicate: PredicateKind,
    pub scheme: SchemeId,
    pub n: u64,
    pub seed: u64,
    pub format: OutputFormat,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Moments {
    sum: u128,
    sum_sq: u128,
}

impl Moments {
    fn add(&mut self, v: usize) {
        let v = v as u128;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, o: &Moments) {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    /// Mean and population standard deviation over `n` values.
    fn summary(&self, n: u64) -> (f64, f64) {
        if n == 0 {
            return (0.0, 0.0);
        }
        let n = n as f64;
        let mean = self.sum as f64 / n;
        let var = (self.sum_sq as f64 / n - mean * mean).max(0.0);
        (mean, var.sqrt())
    }
}

/// Exact running totals; merging is associative and commutative.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DepthAccumulator {
    n: u64,
    unresolved: u64,
    depth: Moments,
    ops_before: Moments,
    ops_used: Moments,
    aux_ops: Moments,
    histogram: BTreeMap<usize, u64>,
}

impl DepthAccumulator {
    pub fn add(&mut self, r: &EvalReport) {
        self.n += 1;
        self.depth.add(r.depth);
        self.ops_before.add(r.ops_before);
        self.ops_used.add(r.ops_used);
        self.aux_ops.add(r.aux_ops);
        *self.histogram.entry(r.depth).or_default() += 1;
    }

    /// A sample whose perturbed value vanished identically.
    pub fn add_unresolved(&mut self) {
        self.n += 1;
        self.unresolved += 1;
    }

    pub fn merge(&mut self, o: &DepthAccumulator) {
        self.n += o.n;
        self.unresolved += o.unresolved;
        self.depth.merge(&o.depth);
        self.ops_before.merge(&o.ops_before);
        self.ops_used.merge(&o.ops_used);
        self.aux_ops.merge(&o.aux_ops);
        for (d, c) in &o.histogram {
            *self.histogram.entry(*d).or_default() += c;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn report(&self, cfg: &ExperimentConfig) -> DepthReport {
        let resolved = self.n - self.unresolved;
        let (mean_depth, sd_depth) = self.depth.summary(resolved);
        let (mean_ops, sd_ops) = self.ops_before.summary(resolved);
        let (mean_ops_used, sd_ops_used) = self.ops_used.summary(resolved);
        let (mean_aux_ops, _) = self.aux_ops.summary(resolved);
        let depth1 = self.histogram.get(&1).copied().unwrap_or(0);
        DepthReport {
            predicate: cfg.predicate,
            scheme: cfg.scheme,
            n: self.n,
            seed: cfg.seed,
            unresolved: self.unresolved,
            mean_depth,
            sd_depth,
            mean_ops,
            sd_ops,
            mean_ops_used,
            sd_ops_used,
            mean_aux_ops,
            depth1_fraction: if self.n == 0 { 0.0 } else { depth1 as f64 / self.n as f64 },
            histogram: self.histogram.clone(),
        }
    }
}

/// Summary of a depth experiment.
///
/// `mean_ops` counts the rows scanned before the deciding one; `mean_ops_used`
/// adds the deciding row. Means and deviations cover the resolved samples;
/// `depth1_fraction` is taken over all `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub predicate: PredicateKind,
    pub scheme: SchemeId,
    pub n: u64,
    pub seed: u64,
    pub unresolved: u64,
    pub mean_depth: f64,
    pub sd_depth: f64,
    pub mean_ops: f64,
    pub sd_ops: f64,
    pub mean_ops_used: f64,
    pub sd_ops_used: f64,
    pub mean_aux_ops: f64,
    pub depth1_fraction: f64,
    pub histogram: BTreeMap<usize, u64>,
}

impl DepthReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => serde_json::to_string(self).expect("report serializes"),
            OutputFormat::Csv => {
                let mut out = String::from(
                    "predicate,scheme,n,seed,unresolved,mean_depth,sd_depth,mean_ops,sd_ops,mean_ops_used,sd_ops_used,mean_aux_ops,depth1_fraction\n",
                );
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    self.predicate,
                    self.scheme,
                    self.n,
                    self.seed,
                    self.unresolved,
                    self.mean_depth,
                    self.sd_depth,
                    self.mean_ops,
                    self.sd_ops,
                    self.mean_ops_used,
                    self.sd_ops_used,
                    self.mean_aux_ops,
                    self.depth1_fraction
                )
                .unwrap();
                out.push_str("\ndepth,count\n");
                for (d, c) in &self.histogram {
                    writeln!(out, "{d},{c}").unwrap();
                }
                out
            }
        }
    }
}

fn sample(cfg: &ExperimentConfig, k: u64) -> Result<EvalReport> {
    match cfg.predicate {
        PredicateKind::Orient3 => {
            let [a, b, c] = gen_collinear(cfg.seed, k);
            orient(&a, &b, &c, cfg.scheme)
        }
        PredicateKind::SegOrderParam | PredicateKind::SegOrderDual => {
            let [s1, s2, s3] = gen_concurrent(cfg.seed, k);
            let f = if cfg.predicate == PredicateKind::SegOrderParam {
                segment_order_param
            } else {
                segment_order_dual
            };
            f([&s1[0], &s1[1]], [&s2[0], &s2[1]], [&s3[0], &s3[1]], cfg.scheme)
        }
        PredicateKind::LexOrder => Err(Error::NoGenerator(cfg.predicate.to_string())),
    }
}

fn run_range(cfg: &ExperimentConfig, range: std::ops::Range<u64>) -> Result<DepthAccumulator> {
    let mut acc = DepthAccumulator::default();
    for k in range {
        match sample(cfg, k) {
            Ok(r) => acc.add(&r),
            Err(Error::Unresolved) => acc.add_unresolved(),
            Err(e) => return Err(e),
        }
    }
    Ok(acc)
}

/// Evaluates `cfg.n` generated degenerate cases on one thread.
pub fn run_depth_experiment(cfg: &ExperimentConfig) -> Result<DepthReport> {
    Ok(run_range(cfg, 0..cfg.n)?.report(cfg))
}

/// Same report as [`run_depth_experiment`], computed by `workers` threads.
pub fn run_depth_experiment_sharded(cfg: &ExperimentConfig, workers: usize) -> Result<DepthReport> {
    let workers = workers.max(1) as u64;
    let chunk = cfg.n.div_ceil(workers);
    let parts: Vec<Result<DepthAccumulator>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(cfg.n);
                let hi = ((w + 1) * chunk).min(cfg.n);
                scope.spawn(move || run_range(cfg, lo..hi))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut acc = DepthAccumulator::default();
    for p in parts {
        acc.merge(&p?);
    }
    Ok(acc.report(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(predicate: PredicateKind, scheme: SchemeId, n: u64) -> ExperimentConfig {
        ExperimentConfig {
            predicate,
            scheme,
            n,
            seed: 42,
            format: OutputFormat::Json,
        }
    }

    #[test]
    fn single_sample_is_reproducible() {
        let c = cfg(PredicateKind::Orient3, SchemeId::E, 1);
        let a = run_depth_experiment(&c).unwrap().render(OutputFormat::Json);
        let b = run_depth_experiment(&c).unwrap().render(OutputFormat::Json);
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 1);
        assert!(a.starts_with(r#"{"predicate":"orient","scheme":"E","n":1,"seed":42,"unresolved":0,"mean_depth":1.0"#), "{a}");
    }

    #[test]
    fn sharding_does_not_change_the_report() {
        let c = cfg(PredicateKind::SegOrderParam, SchemeId::YL, 12);
        assert_eq!(run_depth_experiment(&c).unwrap(), run_depth_experiment_sharded(&c, 5).unwrap());
    }

    #[test]
    fn world_perturbation_cannot_split_cocircular_concurrency() {
        // every generated endpoint is cocircular, so the perturbation acts affinely
        let r = run_depth_experiment(&cfg(PredicateKind::SegOrderParam, SchemeId::A, 5)).unwrap();
        assert_eq!(r.unresolved, 5);
        assert_eq!(r.depth1_fraction, 0.0);
    }

    #[test]
    fn orient_e_small_run() {
        let r = run_depth_experiment(&cfg(PredicateKind::Orient3, SchemeId::E, 200)).unwrap();
        assert!(r.depth1_fraction > 0.95);
        assert!(r.mean_ops >= 11.0);
        assert_eq!(r.histogram.values().sum::<u64>(), 200);
    }

    #[test]
    fn csv_has_histogram() {
        let r = run_depth_experiment(&cfg(PredicateKind::SegOrderDual, SchemeId::E, 3)).unwrap();
        let csv = r.render(OutputFormat::Csv);
        assert!(csv.starts_with("predicate,scheme,n,seed,"));
        assert!(csv.contains("\ndepth,count\n"));
    }

    #[test]
    fn lex_has_no_generator() {
        assert!(matches!(
            run_depth_experiment(&cfg(PredicateKind::LexOrder, SchemeId::E, 1)),
            Err(Error::NoGenerator(_))
        ));
    }

    #[test]
    fn merge_is_associative() {
        let reports: Vec<EvalReport> = (0..6)
            .map(|d| EvalReport {
                sign: 1,
                depth: d % 3,
                ops_used: 10 + d,
                ops_before: d,
                aux_ops: 0,
            })
            .collect();
        let acc = |rs: &[EvalReport]| {
            let mut a = DepthAccumulator::default();
            rs.iter().for_each(|r| a.add(r));
            a
        };
        let (x, y, z) = (acc(&reports[..2]), acc(&reports[2..3]), acc(&reports[3..]));
        let mut left = x.clone();
        left.merge(&y);
        left.merge(&z);
        let mut right = y.clone();
        right.merge(&z);
        let mut right2 = x;
        right2.merge(&right);
        assert_eq!(left, right2);
        assert_eq!(left, acc(&reports));
    }
}
