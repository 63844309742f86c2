//! 1-NN evaluation, recognition rates, and the benchmark harness behind the
//! CLI `bench` subcommand.
//!
//! A benchmark run is a deterministic function of its config: for every
//! seed the pool is (optionally) capped per class, split, fitted per
//! (method, d), projected, and scored with an exact 1-NN classifier. Rows
//! where the solver fails are recorded with NaN rates and the run
//! continues. Wall time covers the fit only; with `timing = off` the column
//! is written as 0.00 so that identical configs produce byte-identical CSV.

use crate::data_io::{
    load_container, load_idx, load_labels_csv, split, stratified_subsample, synth_gaussian_classes,
    SplitRule, SplitSpec, SynthSpec,
};
use crate::error::{Error, Result};
use crate::mda::{
    mda_ls, rt_from_scatters, tr_from_scatters, Denominator, LabeledDataset, MdaOptions,
    ScatterSet,
};
use crate::tensor::{DenseTensor, GroupSplit};
use crate::trace_ratio::{
    trace_ratio_objective, regularize, ProjectionTensor, Regularization, SolverOptions,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exact 1-nearest-neighbor classification by Euclidean distance.
/// Features are `d × n` with samples along the last mode; ties go to the
/// lowest training index.
pub fn knn1_classify(
    train: &DenseTensor<f64>,
    train_labels: &[usize],
    test: &DenseTensor<f64>,
) -> Result<Vec<usize>> {
    if train.order() != 2 || test.order() != 2 {
        return Err(Error::InvalidArgument(
            "knn expects d × n feature tensors".into(),
        ));
    }
    let (d, n_tr) = (train.shape()[0], train.shape()[1]);
    let (d_te, n_te) = (test.shape()[0], test.shape()[1]);
    if d != d_te {
        return Err(Error::shape_mismatch("knn1_classify", train.shape(), test.shape()));
    }
    if n_tr == 0 || train_labels.len() != n_tr {
        return Err(Error::InvalidArgument(format!(
            "training set has {n_tr} samples but {} labels",
            train_labels.len()
        )));
    }
    // Transpose to sample-major rows for contiguous distance loops.
    let tr = train.swap_groups(GroupSplit::new(1, 1).unwrap())?;
    let te = test.swap_groups(GroupSplit::new(1, 1).unwrap())?;
    let mut pred = Vec::with_capacity(n_te);
    for j in 0..n_te {
        let q = &te.data()[j * d..(j + 1) * d];
        let mut best = 0usize;
        let mut best_dist = f64::INFINITY;
        for i in 0..n_tr {
            let p = &tr.data()[i * d..(i + 1) * d];
            let mut dist = 0.0;
            for (a, b) in q.iter().zip(p) {
                let diff = a - b;
                dist += diff * diff;
            }
            if dist < best_dist {
                best_dist = dist;
                best = i;
            }
        }
        pred.push(train_labels[best]);
    }
    Ok(pred)
}

/// Fraction of correctly classified samples.
pub fn recognition_rate(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "prediction/truth length mismatch: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("no samples to score".into()));
    }
    let correct = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(correct as f64 / pred.len() as f64)
}

/// Fitted method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MdaTr,
    MdaRt,
    MdaLs,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::MdaTr => "mda_tr",
            Method::MdaRt => "mda_rt",
            Method::MdaLs => "mda_ls",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mda_tr" => Ok(Method::MdaTr),
            "mda_rt" => Ok(Method::MdaRt),
            "mda_ls" => Ok(Method::MdaLs),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected mda_tr, mda_rt or mda_ls)"
            ))),
        }
    }
}

/// Where the benchmark dataset comes from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Idx { images: PathBuf, labels: PathBuf },
    Tten { tensor: PathBuf, labels: PathBuf },
    Synth(SynthSpec),
}

/// Full benchmark configuration; parseable from a flat key-value file.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub source: DataSource,
    /// Optional seeded per-class cap applied before splitting.
    pub limit_per_class: Option<usize>,
    pub rule: SplitRule,
    pub methods: Vec<Method>,
    pub dims: Vec<usize>,
    pub denominator: Denominator,
    pub eps: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seeds: Vec<u64>,
    pub baseline: bool,
    pub timing: bool,
    pub out: Option<PathBuf>,
}

impl BenchmarkConfig {
    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods configured".into()));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Config("dims must be a non-empty list of positive values".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be ≥ 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.eps < 0.0 {
            return Err(Error::Config("eps must be nonnegative".into()));
        }
        Ok(())
    }

    /// Parse the flat `key = value` grammar ('#' starts a comment; see the
    /// README for the key list).
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut kv = std::collections::BTreeMap::<String, String>::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = k.trim().to_string();
            if kv.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key {key:?}")));
            }
        }
        let get = |k: &str| kv.get(k).map(|s| s.as_str());
        let required = |k: &str| {
            get(k).ok_or_else(|| Error::Config(format!("missing required key {k:?}")))
        };
        let parse_usize = |k: &str, v: &str| {
            v.parse::<usize>()
                .map_err(|_| Error::Config(format!("{k}: bad integer {v:?}")))
        };
        let parse_f64 = |k: &str, v: &str| {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("{k}: bad number {v:?}")))
        };

        let source = match required("data")? {
            "idx" => DataSource::Idx {
                images: PathBuf::from(required("images")?),
                labels: PathBuf::from(required("labels")?),
            },
            "tten" => DataSource::Tten {
                tensor: PathBuf::from(required("tensor")?),
                labels: PathBuf::from(required("labels")?),
            },
            "synth" => {
                let shape_text = required("feature_shape")?;
                let feature_shape = shape_text
                    .split('x')
                    .map(|p| parse_usize("feature_shape", p.trim()))
                    .collect::<Result<Vec<_>>>()?;
                DataSource::Synth(SynthSpec {
                    classes: parse_usize("classes", required("classes")?)?,
                    per_class: parse_usize("per_class", required("per_class")?)?,
                    feature_shape,
                    separation: parse_f64("separation", required("separation")?)?,
                    noise_sd: parse_f64("noise_sd", required("noise_sd")?)?,
                    seed: parse_usize("synth_seed", get("synth_seed").unwrap_or("0"))? as u64,
                })
            }
            other => {
                return Err(Error::Config(format!(
                    "data must be idx, tten or synth, got {other:?}"
                )))
            }
        };

        let rule = match (get("train_per_class"), get("train_fraction")) {
            (Some(k), None) => SplitRule::PerClass(parse_usize("train_per_class", k)?),
            (None, Some(f)) => SplitRule::Fraction(parse_f64("train_fraction", f)?),
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "train_per_class and train_fraction are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Config(
                    "one of train_per_class or train_fraction is required".into(),
                ))
            }
        };

        let methods = required("methods")?
            .split(',')
            .map(|m| m.trim().parse::<Method>())
            .collect::<Result<Vec<_>>>()?;
        let dims = required("dims")?
            .split(',')
            .map(|p| parse_usize("dims", p.trim()))
            .collect::<Result<Vec<_>>>()?;

        let seeds = match (get("seeds"), get("seed")) {
            (Some(list), None) => list
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::Config(format!("seeds: bad integer {p:?}")))
                })
                .collect::<Result<Vec<_>>>()?,
            (None, Some(base)) => {
                let base: u64 = base
                    .parse()
                    .map_err(|_| Error::Config(format!("seed: bad integer {base:?}")))?;
                let reps = parse_usize("repetitions", get("repetitions").unwrap_or("1"))?;
                if reps == 0 {
                    return Err(Error::Config("repetitions must be ≥ 1".into()));
                }
                (0..reps as u64).map(|i| base + i).collect()
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("seeds and seed are mutually exclusive".into()))
            }
            (None, None) => return Err(Error::Config("one of seeds or seed is required".into())),
        };

        let parse_bool = |k: &str, v: &str| match v {
            "true" | "on" | "1" => Ok(true),
            "false" | "off" | "0" => Ok(false),
            other => Err(Error::Config(format!("{k}: bad boolean {other:?}"))),
        };

        let config = BenchmarkConfig {
            source,
            limit_per_class: get("limit_per_class")
                .map(|v| parse_usize("limit_per_class", v))
                .transpose()?,
            rule,
            methods,
            dims,
            denominator: get("denominator").unwrap_or("st").parse()?,
            eps: parse_f64("eps", get("eps").unwrap_or("0.01"))?,
            tol: parse_f64("tol", get("tol").unwrap_or("1e-9"))?,
            max_iter: parse_usize("max_iter", get("max_iter").unwrap_or("100"))?,
            seeds,
            baseline: parse_bool("baseline", get("baseline").unwrap_or("true"))?,
            timing: parse_bool("timing", get("timing").unwrap_or("on"))?,
            out: get("out").map(PathBuf::from),
        };
        config.validate()?;
        Ok(config)
    }
}

/// One benchmark result row. `rate` and `rho_star` are NaN for failed rows
/// and `rho_star` is NaN for the baseline pseudo-method.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub method: String,
    pub d: usize,
    pub seed: u64,
    pub rate: f64,
    pub wall_time_s: f64,
    pub iterations: usize,
    pub rho_star: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
    /// Rows whose TR solver hit the iteration cap (not serialized).
    pub nonconverged_rows: usize,
    /// Rows that failed outright (not serialized; NaN rate in the CSV).
    pub error_rows: usize,
}

pub const CSV_HEADER: &str = "method,d,seed,recognition_rate,wall_time_s,iterations,rho_star";

impl BenchmarkReport {
    /// Serialize with the pinned schema: rates with 4 decimals, wall time
    /// with 2, UTF-8, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.4},{:.2},{},{:.6}",
                r.method, r.d, r.seed, r.rate, r.wall_time_s, r.iterations, r.rho_star
            )
            .expect("string write");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            other => {
                return Err(Error::Format(format!(
                    "bad benchmark CSV header: {other:?}"
                )))
            }
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 7 {
                return Err(Error::Format(format!(
                    "benchmark CSV line {}: expected 7 fields, got {}",
                    lineno + 2,
                    parts.len()
                )));
            }
            let bad = |field: &str| Error::Format(format!("line {}: bad {field}", lineno + 2));
            rows.push(BenchRow {
                method: parts[0].to_string(),
                d: parts[1].parse().map_err(|_| bad("d"))?,
                seed: parts[2].parse().map_err(|_| bad("seed"))?,
                rate: parts[3].parse().map_err(|_| bad("recognition_rate"))?,
                wall_time_s: parts[4].parse().map_err(|_| bad("wall_time_s"))?,
                iterations: parts[5].parse().map_err(|_| bad("iterations"))?,
                rho_star: parts[6].parse().map_err(|_| bad("rho_star"))?,
            });
        }
        Ok(BenchmarkReport {
            rows,
            ..Default::default()
        })
    }

    /// Mean recognition rate over finite rows of a (method, d) cell.
    pub fn mean_rate(&self, method: &str, d: Option<usize>) -> Option<f64> {
        let rates: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method && d.map_or(true, |dd| r.d == dd) && r.rate.is_finite())
            .map(|r| r.rate)
            .collect();
        if rates.is_empty() {
            None
        } else {
            Some(rates.iter().sum::<f64>() / rates.len() as f64)
        }
    }

    /// Mean wall time over a method's rows.
    pub fn mean_wall_time(&self, method: &str) -> Option<f64> {
        let ts: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.wall_time_s)
            .collect();
        if ts.is_empty() {
            None
        } else {
            Some(ts.iter().sum::<f64>() / ts.len() as f64)
        }
    }
}

pub fn load_source(source: &DataSource) -> Result<LabeledDataset<f64>> {
    match source {
        DataSource::Idx { images, labels } => load_idx(images, labels),
        DataSource::Tten { tensor, labels } => {
            let x = load_container(tensor)?;
            let y = load_labels_csv(labels)?;
            LabeledDataset::new(x, y)
        }
        DataSource::Synth(spec) => synth_gaussian_classes(spec),
    }
}

/// Flattened raw features of a dataset (`D × n`), the baseline input.
fn raw_features(ds: &LabeledDataset<f64>) -> DenseTensor<f64> {
    let split = GroupSplit::new(ds.x().order() - 1, 1).unwrap();
    let m = ds.x().group_flatten(split).unwrap();
    DenseTensor::group_unflatten(&m, &[ds.feature_dim()], &[ds.n()]).unwrap()
}

struct FitOutcome {
    projection: ProjectionTensor<f64>,
    iterations: usize,
    converged: bool,
}

fn fit_method(
    method: Method,
    train: &LabeledDataset<f64>,
    scatters: &ScatterSet<f64>,
    d: usize,
    opts: &MdaOptions<f64>,
    eps: f64,
) -> Result<FitOutcome> {
    match method {
        Method::MdaTr => {
            let sol = tr_from_scatters(scatters, d, opts)?;
            Ok(FitOutcome {
                projection: sol.p,
                iterations: sol.iterations,
                converged: sol.converged,
            })
        }
        Method::MdaRt => Ok(FitOutcome {
            projection: rt_from_scatters(scatters, d, opts)?,
            iterations: 0,
            converged: true,
        }),
        Method::MdaLs => Ok(FitOutcome {
            projection: mda_ls(train, d, eps)?,
            iterations: 0,
            converged: true,
        }),
    }
}

/// Run the full benchmark: split → fit → project → 1-NN → rate, per
/// (seed, method, d), plus a raw-data baseline row per seed. Writes the CSV
/// when `out` is configured.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    config.validate()?;
    let pool = load_source(&config.source)?;
    let mut report = BenchmarkReport::default();

    for &seed in &config.seeds {
        let pool_for_seed;
        let pool_ref = match config.limit_per_class {
            Some(k) => {
                pool_for_seed = stratified_subsample(&pool, k, seed)?;
                &pool_for_seed
            }
            None => &pool,
        };
        let (train, test) = split(
            pool_ref,
            &SplitSpec {
                rule: config.rule,
                seed,
            },
        )?;

        if config.baseline {
            let pred = knn1_classify(&raw_features(&train), train.labels(), &raw_features(&test))?;
            let rate = recognition_rate(&pred, test.labels())?;
            report.rows.push(BenchRow {
                method: "baseline".into(),
                d: train.feature_dim(),
                seed,
                rate,
                wall_time_s: 0.0,
                iterations: 0,
                rho_star: f64::NAN,
            });
        }

        let scatters = ScatterSet::compute(&train)?;
        let opts = MdaOptions {
            denominator: config.denominator,
            solver: SolverOptions {
                max_iter: config.max_iter,
                tol: config.tol,
                seed,
                regularization: Regularization::Shift { eps: config.eps },
                ..Default::default()
            },
        };

        for &method in &config.methods {
            for &d in &config.dims {
                let started = Instant::now();
                let fit = fit_method(method, &train, &scatters, d, &opts, config.eps);
                let wall = started.elapsed().as_secs_f64();
                match fit {
                    Ok(outcome) => {
                        if !outcome.converged {
                            report.nonconverged_rows += 1;
                        }
                        let z_tr = crate::mda::project(train.x(), &outcome.projection)?;
                        let z_te = crate::mda::project(test.x(), &outcome.projection)?;
                        let pred = knn1_classify(&z_tr, train.labels(), &z_te)?;
                        let rate = recognition_rate(&pred, test.labels())?;
                        let b_reg =
                            regularize(scatters.denominator(config.denominator), opts.solver.regularization)?;
                        let rho = trace_ratio_objective(&outcome.projection, &scatters.s_b, &b_reg)
                            .unwrap_or(f64::NAN);
                        report.rows.push(BenchRow {
                            method: method.name().into(),
                            d,
                            seed,
                            rate,
                            wall_time_s: wall,
                            iterations: outcome.iterations,
                            rho_star: rho,
                        });
                    }
                    Err(_) => {
                        report.error_rows += 1;
                        report.rows.push(BenchRow {
                            method: method.name().into(),
                            d,
                            seed,
                            rate: f64::NAN,
                            wall_time_s: wall,
                            iterations: 0,
                            rho_star: f64::NAN,
                        });
                    }
                }
            }
        }
    }

    if !config.timing {
        for r in &mut report.rows {
            r.wall_time_s = 0.0;
        }
    }
    if let Some(path) = &config.out {
        write_report(path, &report)?;
    }
    Ok(report)
}

pub fn write_report(path: &Path, report: &BenchmarkReport) -> Result<()> {
    std::fs::write(path, report.to_csv())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn features(d: usize, cols: &[&[f64]]) -> DenseTensor<f64> {
        let n = cols.len();
        let mut data = vec![0.0; d * n];
        for (j, col) in cols.iter().enumerate() {
            for f in 0..d {
                data[f * n + j] = col[f];
            }
        }
        DenseTensor::from_vec(vec![d, n], data).unwrap()
    }

    #[test]
    fn knn_trivial_cases() {
        let train = features(1, &[&[0.0], &[10.0]]);
        let test = features(1, &[&[1.0]]);
        let pred = knn1_classify(&train, &[7, 9], &test).unwrap();
        assert_eq!(pred, vec![7]);
        // A test point equal to a training point gets that point's label.
        let test2 = features(1, &[&[10.0]]);
        assert_eq!(knn1_classify(&train, &[7, 9], &test2).unwrap(), vec![9]);
        // Tie: equidistant points resolve to the lowest training index.
        let test3 = features(1, &[&[5.0]]);
        assert_eq!(knn1_classify(&train, &[7, 9], &test3).unwrap(), vec![7]);
    }

    #[test]
    fn knn_matches_bruteforce_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(80);
        let d = 3;
        let n_tr = 40;
        let n_te = 15;
        let tr: Vec<Vec<f64>> = (0..n_tr)
            .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let te: Vec<Vec<f64>> = (0..n_te)
            .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let labels: Vec<usize> = (0..n_tr).map(|i| i % 4).collect();
        let tr_cols: Vec<&[f64]> = tr.iter().map(|v| v.as_slice()).collect();
        let te_cols: Vec<&[f64]> = te.iter().map(|v| v.as_slice()).collect();
        let pred = knn1_classify(
            &features(d, &tr_cols),
            &labels,
            &features(d, &te_cols),
        )
        .unwrap();
        // Oracle: full distance matrix, then argmin per test point.
        for (j, q) in te.iter().enumerate() {
            let mut dists: Vec<(f64, usize)> = tr
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let dd: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
                    (dd, i)
                })
                .collect();
            dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            assert_eq!(pred[j], labels[dists[0].1]);
        }
    }

    #[test]
    fn knn_invariant_under_unitary_transform() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(81);
        let d = 4;
        let train = DenseTensor::from_vec(
            vec![d, 20],
            (0..d * 20).map(|_| rng.gen::<f64>()).collect(),
        )
        .unwrap();
        let test = DenseTensor::from_vec(
            vec![d, 8],
            (0..d * 8).map(|_| rng.gen::<f64>()).collect(),
        )
        .unwrap();
        let labels: Vec<usize> = (0..20).map(|i| i % 3).collect();
        let q = crate::subspace::random_orthonormal::<f64>(d, d, &mut rng).unwrap();
        let rot = |t: &DenseTensor<f64>| t.m_mode_product(&q, 0).unwrap();
        let p1 = knn1_classify(&train, &labels, &test).unwrap();
        let p2 = knn1_classify(&rot(&train), &labels, &rot(&test)).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn knn_rejects_empty_training() {
        let train = DenseTensor::from_vec(vec![2, 1], vec![0.0, 0.0]).unwrap();
        let test = DenseTensor::from_vec(vec![2, 1], vec![0.0, 0.0]).unwrap();
        assert!(knn1_classify(&train, &[], &test).is_err());
    }

    #[test]
    fn rate_cases() {
        assert_eq!(recognition_rate(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(recognition_rate(&[1, 1], &[2, 2]).unwrap(), 0.0);
        assert_eq!(recognition_rate(&[1, 2, 3, 4], &[1, 2, 3, 0]).unwrap(), 0.75);
        assert!(recognition_rate(&[1], &[1, 2]).is_err());
        assert!(recognition_rate(&[], &[]).is_err());
    }

    fn synth_config(out: Option<PathBuf>) -> BenchmarkConfig {
        BenchmarkConfig {
            source: DataSource::Synth(SynthSpec {
                classes: 3,
                per_class: 20,
                feature_shape: vec![2, 3],
                separation: 8.0,
                noise_sd: 0.2,
                seed: 5,
            }),
            limit_per_class: None,
            rule: SplitRule::PerClass(15),
            methods: vec![Method::MdaRt, Method::MdaTr],
            dims: vec![1, 2],
            denominator: Denominator::Total,
            eps: 0.01,
            tol: 1e-9,
            max_iter: 100,
            seeds: vec![1, 2],
            baseline: true,
            timing: false,
            out,
        }
    }

    #[test]
    fn benchmark_on_separable_synthetic_is_perfect() {
        let report = run_benchmark(&synth_config(None)).unwrap();
        // |methods| × |dims| × |seeds| + baseline per seed.
        assert_eq!(report.rows.len(), 2 * 2 * 2 + 2);
        for row in &report.rows {
            assert!(
                row.rate > 0.999,
                "separable data should classify perfectly: {row:?}"
            );
        }
        assert_eq!(report.error_rows, 0);
    }

    #[test]
    fn benchmark_csv_roundtrip_and_determinism() {
        let report1 = run_benchmark(&synth_config(None)).unwrap();
        let report2 = run_benchmark(&synth_config(None)).unwrap();
        let csv1 = report1.to_csv();
        assert_eq!(csv1, report2.to_csv(), "same config + seeds must be byte-identical");
        let parsed = BenchmarkReport::from_csv(&csv1).unwrap();
        assert_eq!(parsed.to_csv(), csv1);
        assert!(csv1.starts_with(CSV_HEADER));
        assert!(!csv1.contains('\r'));
    }

    #[test]
    fn config_parsing() {
        let text = r#"
# synthetic smoke benchmark
data = synth
classes = 3
per_class = 10
feature_shape = 2x3
separation = 4.0
noise_sd = 0.5
train_per_class = 8
methods = mda_rt, mda_ls
dims = 1, 2
seed = 7
repetitions = 3
timing = off
"#;
        let cfg = BenchmarkConfig::from_kv_text(text).unwrap();
        assert_eq!(cfg.methods, vec![Method::MdaRt, Method::MdaLs]);
        assert_eq!(cfg.dims, vec![1, 2]);
        assert_eq!(cfg.seeds, vec![7, 8, 9]);
        assert_eq!(cfg.eps, 0.01);
        assert!(!cfg.timing);
        assert!(cfg.baseline);
        assert!(matches!(cfg.rule, SplitRule::PerClass(8)));

        assert!(BenchmarkConfig::from_kv_text("data = synth").is_err());
        assert!(BenchmarkConfig::from_kv_text("nonsense").is_err());
        let dup = "data = synth\ndata = synth\n";
        assert!(BenchmarkConfig::from_kv_text(dup).is_err());
    }

    #[test]
    fn error_rows_keep_the_run_going() {
        let mut cfg = synth_config(None);
        cfg.dims = vec![50, 1]; // 50 > feature dim 6 fails, 1 succeeds
        cfg.seeds = vec![3];
        let report = run_benchmark(&cfg).unwrap();
        assert!(report.error_rows > 0);
        let ok_rows = report
            .rows
            .iter()
            .filter(|r| r.rate.is_finite() && r.method != "baseline")
            .count();
        assert!(ok_rows > 0);
        let nan_rows = report.rows.iter().filter(|r| r.rate.is_nan()).count();
        assert_eq!(nan_rows, report.error_rows);
        // NaN rows survive the CSV round trip.
        let parsed = BenchmarkReport::from_csv(&report.to_csv()).unwrap();
        assert_eq!(
            parsed.rows.iter().filter(|r| r.rate.is_nan()).count(),
            nan_rows
        );
    }

    #[test]
    fn mean_rate_helper() {
        let report = BenchmarkReport {
            rows: vec![
                BenchRow {
                    method: "mda_rt".into(),
                    d: 5,
                    seed: 1,
                    rate: 0.8,
                    wall_time_s: 1.0,
                    iterations: 0,
                    rho_star: 0.5,
                },
                BenchRow {
                    method: "mda_rt".into(),
                    d: 5,
                    seed: 2,
                    rate: 0.9,
                    wall_time_s: 2.0,
                    iterations: 0,
                    rho_star: 0.5,
                },
            ],
            ..Default::default()
        };
        assert!((report.mean_rate("mda_rt", Some(5)).unwrap() - 0.85).abs() < 1e-12);
        assert!(report.mean_rate("mda_tr", None).is_none());
        assert!((report.mean_wall_time("mda_rt").unwrap() - 1.5).abs() < 1e-12);
    }
}
