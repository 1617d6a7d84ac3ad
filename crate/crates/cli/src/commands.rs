use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use smootherlab::boosting_smoothers::{BoostConfig, BoostedEnsemble, BoostedModel};
use smootherlab::dataset::Dataset;
use smootherlab::effective_params::{
    generalized_eff_params, train_eff_params_classical, write_reports_csv,
};
use smootherlab::experiments::output::{
    render_svg, sweep_chart, write_atomic, write_sweep_csv, write_table, Chart, Series,
};
use smootherlab::experiments::{
    back_to_u, bias_variance, cond_study, fixed_design_check, member_seed, model_selection_study,
    peak_move, run_grid, run_sweep, BiasVarianceModel, EvalPoints, FixedDesignModel,
};
use smootherlab::linear_smoothers::LinearFit;
use smootherlab::rff::RffMap;
use smootherlab::tree_smoothers::{FeatureIndex, RegressionTree, TreeEnsemble, TreeOptions};
use smootherlab::{Error, KnnSmoother, Matrix64, Result, Smoother};

use crate::config::{resolve_all, BvEval, BvModelKind, Config, ModelConfig, ModelKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Load the dataset and summarize it.
    Ingest,
    /// Fit one model and score it.
    Fit,
    /// Run a composite schedule.
    Sweep,
    /// Run the cross product of two axis grids.
    Grid,
    /// Switch mechanisms at several first-axis values.
    Peaks,
    /// Generalized and classical effective parameters of one model.
    Effparams,
    /// Condition numbers of the scaled RFF design.
    CondStudy,
    /// Fixed-design losses of interpolating min-norm fits.
    FixedDesign,
    /// Analytic against Monte Carlo bias and variance on synthetic data.
    BiasVariance,
    /// Boosting model selection by test-time effective parameters.
    Select,
    /// Composite sweep with first-axis contours at fixed second-axis values.
    BackToU,
}

pub struct Run {
    pub cfg: Config,
    pub svg: bool,
}

fn seed0(cfg: &Config) -> u64 {
    cfg.seeds.first().copied().unwrap_or(0)
}

fn f(v: f64) -> String {
    v.to_string()
}

/// Binary targets of the evaluated class, or the raw regression targets.
fn task_targets(ds: &Dataset<f64>, class: usize) -> Vec<f64> {
    match ds.class_labels() {
        Some(l) => l.iter().map(|&c| if c == class { 1.0 } else { 0.0 }).collect(),
        None => ds.targets().to_vec(),
    }
}

impl Run {
    fn out(&self, name: &str) -> PathBuf {
        self.cfg.output_dir.join(name)
    }

    fn svg_file(&self, name: &str, chart: &Chart) -> Result<Option<PathBuf>> {
        if !self.svg {
            return Ok(None);
        }
        let p = self.out(name);
        write_atomic(&p, &render_svg(chart))?;
        Ok(Some(p))
    }

    /// Executes `cmd`, returning the one-line summary.
    pub fn execute(&self, cmd: Command) -> Result<String> {
        let start = Instant::now();
        std::fs::create_dir_all(&self.cfg.output_dir).map_err(|e| {
            Error::Format(format!("cannot create {}: {e}", self.cfg.output_dir.display()))
        })?;
        let echo = serde_json::to_string_pretty(&self.cfg)
            .map_err(|e| Error::Format(format!("echoing config: {e}")))?;
        write_atomic(&self.out("config.json"), &(echo + "\n"))?;
        let (what, mut paths) = match cmd {
            Command::Ingest => self.ingest()?,
            Command::Fit => self.fit()?,
            Command::Sweep => self.sweep()?,
            Command::Grid => self.grid()?,
            Command::Peaks => self.peaks()?,
            Command::Effparams => self.effparams()?,
            Command::CondStudy => self.cond()?,
            Command::FixedDesign => self.fixed_design()?,
            Command::BiasVariance => self.bias_variance()?,
            Command::Select => self.select()?,
            Command::BackToU => self.back_to_u()?,
        };
        paths.retain(|p| p.exists());
        let list: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
        Ok(format!(
            "{what} in {:.1}s -> {}",
            start.elapsed().as_secs_f64(),
            list.join(", ")
        ))
    }

    fn ingest(&self) -> Result<(String, Vec<PathBuf>)> {
        let (train, test) = self.cfg.load_data()?;
        let rows: Vec<Vec<String>> = [&train, &test]
            .iter()
            .map(|ds| {
                let counts = match (ds.class_labels(), ds.num_classes()) {
                    (Some(l), Some(c)) => (0..c)
                        .map(|k| l.iter().filter(|&&v| v == k).count().to_string())
                        .collect::<Vec<_>>()
                        .join(":"),
                    _ => String::new(),
                };
                vec![
                    ds.name().to_string(),
                    ds.len().to_string(),
                    ds.dim().to_string(),
                    ds.num_classes().map(|c| c.to_string()).unwrap_or_default(),
                    counts,
                ]
            })
            .collect();
        let p = self.out("dataset.csv");
        write_table(&p, &["set", "size", "dim", "classes", "class_counts"], &rows)?;
        Ok((
            format!("ingest: {} train / {} test rows, d = {}", train.len(), test.len(), train.dim()),
            vec![p],
        ))
    }

    fn model_cfg(&self) -> Result<&ModelConfig> {
        self.cfg
            .model
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a 'model' section".into()))
    }

    fn fit(&self) -> Result<(String, Vec<PathBuf>)> {
        let (train, test) = self.cfg.load_data()?;
        let b = build_model(&self.cfg, self.model_cfg()?, &train, &test)?;
        let pred_train = b.model.predict(&b.x_train)?;
        let pred_test = b.model.predict(&b.x_test)?;
        let mse = |p: &[f64], y: &[f64]| {
            p.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64
        };
        let p_train = generalized_eff_params(b.model.as_ref(), &b.x_train, "train")?;
        let p_test = generalized_eff_params(b.model.as_ref(), &b.x_test, "test")?;
        let row = vec![
            b.label.clone(),
            train.len().to_string(),
            test.len().to_string(),
            f(mse(&pred_train, &b.y_train)),
            f(mse(&pred_test, &b.y_test)),
            f(p_train.p_generalized),
            f(p_test.p_generalized),
        ];
        let p = self.out("fit.csv");
        write_table(
            &p,
            &["model", "n_train", "n_test", "train_mse", "test_mse", "p_train", "p_test"],
            &[row],
        )?;
        Ok((format!("fit: {}", b.label), vec![p]))
    }

    fn effparams(&self) -> Result<(String, Vec<PathBuf>)> {
        let (train, test) = self.cfg.load_data()?;
        let b = build_model(&self.cfg, self.model_cfg()?, &train, &test)?;
        let r_train = generalized_eff_params(b.model.as_ref(), &b.x_train, "train")?;
        let r_test = generalized_eff_params(b.model.as_ref(), &b.x_test, "test")?;
        let hat = b.model.weight_matrix(&b.x_train)?;
        let classical = train_eff_params_classical(&hat)?;
        let mut buf = Vec::new();
        write_reports_csv(
            &mut buf,
            &[(b.label.clone(), r_train.clone()), (b.label.clone(), r_test.clone())],
        )?;
        let p1 = self.out("effparams.csv");
        write_atomic(&p1, &String::from_utf8_lossy(&buf))?;
        let p2 = self.out("effparams_classical.csv");
        write_table(
            &p2,
            &["model", "p_cov", "p_err", "p_var"],
            &[vec![
                b.label.clone(),
                f(classical.p_cov),
                f(classical.p_err),
                f(classical.p_var),
            ]],
        )?;
        let p3 = self.out("effparams_norms.csv");
        let rows: Vec<Vec<String>> = [&r_train, &r_test]
            .iter()
            .flat_map(|r| {
                r.per_point_norms
                    .iter()
                    .enumerate()
                    .map(|(j, v)| vec![r.input_set_name.clone(), j.to_string(), f(*v)])
                    .collect::<Vec<_>>()
            })
            .collect();
        write_table(&p3, &["set", "index", "weight_norm_sq"], &rows)?;
        Ok((
            format!(
                "effparams: {} p_train = {:.4}, p_test = {:.4}",
                b.label, r_train.p_generalized, r_test.p_generalized
            ),
            vec![p1, p2, p3],
        ))
    }

    fn sweep(&self) -> Result<(String, Vec<PathBuf>)> {
        let family = self.cfg.family()?;
        let sc = self
            .cfg
            .schedule
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a 'schedule' section".into()))?;
        let (train, test) = self.cfg.load_data()?;
        let schedule = sc.build(family, train.len())?;
        schedule.validate(train.len())?;
        let res = run_sweep(&schedule, &train, &test, &self.cfg.shared_params())?;
        let p = self.out("sweep.csv");
        write_sweep_csv(&p, &res)?;
        let chart = sweep_chart(&format!("{family} sweep"), &[(family.as_str(), &res)], true);
        let svg = self.svg_file("sweep.svg", &chart)?;
        Ok((
            format!("sweep: {} points x {} seeds", schedule.len(), self.cfg.seeds.len()),
            std::iter::once(p).chain(svg).collect(),
        ))
    }

    fn grid(&self) -> Result<(String, Vec<PathBuf>)> {
        let family = self.cfg.family()?;
        let g = self
            .cfg
            .grid
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a 'grid' section".into()))?;
        let (train, test) = self.cfg.load_data()?;
        let a1 = resolve_all(&g.axis1, train.len())?;
        let a2 = resolve_all(&g.axis2, train.len())?;
        let res = run_grid(family, &a1, &a2, &train, &test, &self.cfg.shared_params())?;
        let p = self.out("grid.csv");
        write_sweep_csv(&p, &res.result)?;
        let (ax1, ax2) = family.axes();
        let chart = Chart {
            title: format!("{family}: test error by {} for fixed {}", ax1.name(), ax2.name()),
            x_label: ax1.name().into(),
            y_label: "test MSE (median over seeds)".into(),
            log_x: true,
            series: (0..a2.len())
                .map(|i| Series {
                    name: format!("{} = {}", ax2.name(), a2[i]),
                    points: res
                        .axis1_curve(i)
                        .iter()
                        .map(|s| (s.axis1_value as f64, s.test_mse.median))
                        .collect(),
                })
                .collect(),
        };
        let svg = self.svg_file("grid.svg", &chart)?;
        Ok((
            format!("grid: {}x{} points x {} seeds", a1.len(), a2.len(), self.cfg.seeds.len()),
            std::iter::once(p).chain(svg).collect(),
        ))
    }

    fn peaks(&self) -> Result<(String, Vec<PathBuf>)> {
        let family = self.cfg.family()?;
        let pc = self
            .cfg
            .peaks
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a 'peaks' section".into()))?;
        let (train, test) = self.cfg.load_data()?;
        let n = train.len();
        let grid = resolve_all(&pc.axis1_grid, n)?;
        let switches = resolve_all(&pc.switches, n)?;
        let results = peak_move(
            family,
            &grid,
            &switches,
            &pc.continuation(n)?,
            &train,
            &test,
            &self.cfg.shared_params(),
        )?;
        let mut paths = Vec::new();
        for (v, r) in switches.iter().zip(&results) {
            let p = self.out(&format!("peaks_switch_{v}.csv"));
            write_sweep_csv(&p, r)?;
            paths.push(p);
        }
        let names: Vec<String> = switches.iter().map(|v| format!("switch {v}")).collect();
        let series: Vec<(&str, &_)> = names.iter().map(String::as_str).zip(&results).collect();
        paths.extend(self.svg_file("peaks.svg", &sweep_chart("peak moving", &series, true))?);
        Ok((format!("peaks: {} switch values", switches.len()), paths))
    }

    fn back_to_u(&self) -> Result<(String, Vec<PathBuf>)> {
        let family = self.cfg.family()?;
        let bc = self
            .cfg
            .back_to_u
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a 'back_to_u' section".into()))?;
        let (train, test) = self.cfg.load_data()?;
        let n = train.len();
        let res = back_to_u(
            family,
            &resolve_all(&bc.axis1_grid, n)?,
            bc.switch.resolve(n)?,
            &bc.continuation(n)?,
            &resolve_all(&bc.reductions, n)?,
            &train,
            &test,
            &self.cfg.shared_params(),
        )?;
        let (a1, a2) = family.axes();
        let rows: Vec<Vec<String>> = res
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.branch.as_str().to_string(),
                    format!("{:?}", r.mechanism).to_lowercase(),
                    a1.name().to_string(),
                    r.axis1.to_string(),
                    a2.name().to_string(),
                    r.axis2.to_string(),
                    f(r.p_train.median),
                    f(r.p_test.median),
                    f(r.test_mse.median),
                    f(r.test_mse.se),
                ]
            })
            .collect();
        let p = self.out("back_to_u.csv");
        write_table(
            &p,
            &[
                "branch", "mechanism", "axis1_name", "axis1_value", "axis2_name", "axis2_value",
                "p_train", "p_test", "test_mse", "test_mse_se",
            ],
            &rows,
        )?;
        let mut series = vec![Series {
            name: "composite".into(),
            points: res
                .rows
                .iter()
                .filter(|r| r.branch == smootherlab::experiments::Branch::Composite)
                .map(|r| (r.p_test.median, r.test_mse.median))
                .collect(),
        }];
        let mut fixed: Vec<usize> = res
            .rows
            .iter()
            .filter(|r| r.branch == smootherlab::experiments::Branch::Contour)
            .map(|r| r.axis2)
            .collect();
        fixed.dedup();
        for b in fixed {
            series.push(Series {
                name: format!("{} = {b}", a2.name()),
                points: res
                    .rows
                    .iter()
                    .filter(|r| r.axis2 == b && (r.branch == smootherlab::experiments::Branch::Contour || r.axis1 == res.switch))
                    .map(|r| (r.p_test.median, r.test_mse.median))
                    .collect(),
            });
        }
        let chart = Chart {
            title: format!("{family}: test error by effective parameters"),
            x_label: "p_test".into(),
            y_label: "test MSE".into(),
            log_x: true,
            series,
        };
        let svg = self.svg_file("back_to_u.svg", &chart)?;
        Ok((
            format!("back-to-u: {} rows", res.rows.len()),
            std::iter::once(p).chain(svg).collect(),
        ))
    }

    fn cond(&self) -> Result<(String, Vec<PathBuf>)> {
        let cc = self
            .cfg
            .cond
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a 'cond' section".into()))?;
        let (train, _) = self.cfg.load_data()?;
        let p_max = cc.p_phi.iter().copied().max().unwrap_or(1);
        let shared = self.cfg.shared_params();
        let map = RffMap::sample(seed0(&self.cfg), p_max, train.dim(), shared.rff_scale)?;
        let rows = cond_study(&map, train.features(), &cc.p_phi, &cc.k, shared.pcr_scaling)?;
        let p = self.out("cond.csv");
        write_table(
            &p,
            &["p_phi", "k", "sigma_k", "kappa"],
            &rows
                .iter()
                .map(|r| vec![r.p_phi.to_string(), r.k.to_string(), f(r.sigma_k), f(r.kappa)])
                .collect::<Vec<_>>(),
        )?;
        Ok((format!("cond-study: {} rows", rows.len()), vec![p]))
    }

    fn fixed_design(&self) -> Result<(String, Vec<PathBuf>)> {
        let fc = self
            .cfg
            .fixed_design
            .clone()
            .ok_or_else(|| Error::Argument("config needs a 'fixed_design' section".into()))?;
        let (train, _) = self.cfg.load_data()?;
        let n = train.len();
        let y = task_targets(&train, self.cfg.shared.eval_class);
        let mut rng = ChaCha8Rng::seed_from_u64(fc.resample_seed);
        let (base, sigma) = match (train.truth(), self.cfg.synthetic_spec()) {
            (Some(t), Some(spec)) => (t.to_vec(), spec.noise_std),
            _ => (y.clone(), fc.noise_std),
        };
        let y_test: Vec<f64> = base
            .iter()
            .map(|&b| {
                let e: f64 = StandardNormal.sample(&mut rng);
                b + sigma * e
            })
            .collect();
        let p_phi = fc.p_phi.unwrap_or_else(|| vec![n, 2 * n, 8 * n]);
        let shared = self.cfg.shared_params();
        let map = RffMap::sample(
            seed0(&self.cfg),
            p_phi.iter().copied().max().unwrap_or(1),
            train.dim(),
            shared.rff_scale,
        )?;
        let mut designs = Vec::new();
        let mut fits = Vec::new();
        for &p in &p_phi {
            let phi = map.transform(train.features(), p)?;
            fits.push(LinearFit::fit_minnorm(&phi, &y)?);
            designs.push(phi);
        }
        let models: Vec<FixedDesignModel<'_, f64>> = p_phi
            .iter()
            .zip(&fits)
            .zip(&designs)
            .map(|((p, m), d)| FixedDesignModel {
                name: format!("minnorm(P_phi={p})"),
                model: m as &dyn Smoother<f64>,
                train_inputs: d,
            })
            .collect();
        let report = fixed_design_check(&models, &y, &y_test, fc.eps)?;
        let path = self.out("fixed_design.csv");
        write_table(
            &path,
            &["model", "train_mse", "fixed_design_loss", "reference_loss", "identity_deviation"],
            &report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        f(r.train_mse),
                        f(r.fixed_design_loss),
                        f(r.reference_loss),
                        f(r.identity_deviation),
                    ]
                })
                .collect::<Vec<_>>(),
        )?;
        Ok((
            format!("fixed-design: {} models, max loss gap {:e}", report.rows.len(), report.max_gap()),
            vec![path],
        ))
    }

    fn bias_variance(&self) -> Result<(String, Vec<PathBuf>)> {
        let bc = self
            .cfg
            .bias_variance
            .as_ref()
            .ok_or_else(|| Error::Argument("config needs a 'bias_variance' section".into()))?;
        let spec = self.cfg.synthetic_spec().ok_or_else(|| {
            Error::Argument("bias-variance needs a synthetic dataset with a known truth".into())
        })?;
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::Argument(format!("bias_variance.{name} is required for this model")))
        };
        let model = match bc.model {
            BvModelKind::SampleMean => BiasVarianceModel::SampleMean,
            BvModelKind::Ols => BiasVarianceModel::Ols { p: need(bc.p, "p")? },
            BvModelKind::Knn => BiasVarianceModel::Knn { k: need(bc.k, "k")? },
            BvModelKind::MinnormRff => BiasVarianceModel::MinNormRff {
                p_phi: need(bc.p_phi, "p_phi")?,
                scale: self.cfg.shared.rff_scale,
                seed: seed0(&self.cfg),
            },
            BvModelKind::Tree => BiasVarianceModel::Tree {
                max_leaves: bc.max_leaves.unwrap_or(spec.n),
            },
        };
        let eval = match bc.eval {
            BvEval::Train => EvalPoints::Train,
            BvEval::Fresh => EvalPoints::Fresh { m: bc.m },
        };
        let report = bias_variance(&spec, &model, bc.n_resamples, eval, seed0(&self.cfg))?;
        let path = self.out("bias_variance.csv");
        let rows: Vec<Vec<String>> = report
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| {
                vec![
                    j.to_string(),
                    f(p.truth),
                    f(p.analytic_bias),
                    f(p.mc_bias),
                    f(p.mc_bias_se),
                    f(p.analytic_var),
                    f(p.mc_var),
                    f(p.mc_var_se),
                    f(p.analytic_mse),
                    f(p.mc_mse),
                    f(p.mc_mse_se),
                ]
            })
            .collect();
        write_table(
            &path,
            &[
                "point", "truth", "analytic_bias", "mc_bias", "mc_bias_se", "analytic_var",
                "mc_var", "mc_var_se", "analytic_mse", "mc_mse", "mc_mse_se",
            ],
            &rows,
        )?;
        Ok((
            format!(
                "bias-variance: {} points, {} redraws, max |analytic - MC| = {:.2} SE",
                report.points.len(),
                report.n_resamples,
                report.max_z()
            ),
            vec![path],
        ))
    }

    fn select(&self) -> Result<(String, Vec<PathBuf>)> {
        let sc = self.cfg.select.clone().ok_or_else(|| {
            Error::Argument("config needs a 'select' section".into())
        })?;
        let (train, test) = self.cfg.load_data()?;
        let leaves = resolve_all(&sc.leaf_grid, train.len())?;
        let table = model_selection_study(
            &train,
            &test,
            &leaves,
            &sc.lr_grid,
            sc.eps,
            sc.max_rounds,
            &self.cfg.shared_params(),
        )?;
        let path = self.out("select.csv");
        let rows: Vec<Vec<String>> = table
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.leaf_budget.to_string(),
                    f(r.learning_rate),
                    r.rounds.to_string(),
                    r.interpolates.to_string(),
                    f(r.train_mse),
                    f(r.test_mse),
                    f(r.p_train),
                    f(r.p_test),
                ]
            })
            .collect();
        write_table(
            &path,
            &[
                "leaf_budget", "learning_rate", "rounds", "interpolates", "train_mse", "test_mse",
                "p_train", "p_test",
            ],
            &rows,
        )?;
        let interp = table.rows.iter().filter(|r| r.interpolates).count();
        let summary = match table.selected {
            None => format!("select: no interpolating configuration among {}", table.rows.len()),
            Some(i) => format!(
                "select: {interp}/{} interpolate; lowest p_test picks leaves = {}, lr = {}; spearman = {}",
                table.rows.len(),
                table.rows[i].leaf_budget,
                table.rows[i].learning_rate,
                table.spearman.map(|s| format!("{s:.3}")).unwrap_or_else(|| "n/a".into())
            ),
        };
        Ok((summary, vec![path]))
    }
}

pub struct Built {
    pub label: String,
    pub model: Box<dyn Smoother<f64>>,
    pub x_train: Matrix64,
    pub x_test: Matrix64,
    pub y_train: Vec<f64>,
    pub y_test: Vec<f64>,
}

/// Fits the configured model on the evaluated binary task (or the raw
/// regression targets).
pub fn build_model(
    cfg: &Config,
    mc: &ModelConfig,
    train: &Dataset<f64>,
    test: &Dataset<f64>,
) -> Result<Built> {
    let shared = cfg.shared_params();
    let seed = seed0(cfg);
    let n = train.len();
    let y_train = task_targets(train, shared.eval_class);
    let y_test = task_targets(test, shared.eval_class);
    let linear = matches!(
        mc.kind,
        ModelKind::Ols | ModelKind::Minnorm | ModelKind::SvdBasis | ModelKind::Pcr
    );
    let (x_train, x_test) = match (linear, mc.p_phi) {
        (true, Some(p)) => {
            let map = RffMap::sample(seed, p, train.dim(), shared.rff_scale)?;
            (map.transform(train.features(), p)?, map.transform(test.features(), p)?)
        }
        _ => (train.features().clone(), test.features().clone()),
    };
    let leaves = match &mc.max_leaves {
        Some(v) => v.resolve(n)?,
        None => n,
    };
    let p_ens = mc.p_ens.unwrap_or(1);
    let boost_cfg = BoostConfig {
        n_rounds: mc.n_rounds.unwrap_or(100),
        learning_rate: shared.learning_rate,
        leaf_budget: shared.leaf_budget,
        seed: member_seed(seed, 1),
        stop_tol: mc.stop_tol,
        max_features: shared.max_features,
    };
    let (label, model): (String, Box<dyn Smoother<f64>>) = match mc.kind {
        ModelKind::Ols => ("ols".into(), Box::new(LinearFit::fit_ols(&x_train, &y_train)?)),
        ModelKind::Minnorm => ("minnorm".into(), Box::new(LinearFit::fit_minnorm(&x_train, &y_train)?)),
        ModelKind::SvdBasis => (
            "svd_basis".into(),
            Box::new(LinearFit::fit_svd_basis(&x_train, &y_train)?),
        ),
        ModelKind::Pcr => {
            let k = mc.p_pc.unwrap_or_else(|| (n - 1).min(x_train.cols()));
            (
                format!("pcr(P_PC={k})"),
                Box::new(LinearFit::fit_pcr(&x_train, &y_train, k, shared.pcr_scaling)?),
            )
        }
        ModelKind::Knn => {
            let k = mc
                .k
                .ok_or_else(|| Error::Argument("model.k is required for knn".into()))?;
            (format!("knn(k={k})"), Box::new(KnnSmoother::fit(&x_train, &y_train, k)?))
        }
        ModelKind::Tree => {
            let index = FeatureIndex::new(&x_train)?;
            let tree = RegressionTree::fit_indexed(
                &index,
                &y_train,
                &TreeOptions {
                    max_leaves: leaves,
                    max_features: shared.max_features,
                    seed: member_seed(seed, 1),
                },
            )?;
            (format!("tree(P_leaf={leaves})"), Box::new(tree))
        }
        ModelKind::Forest => {
            let index = FeatureIndex::new(&x_train)?;
            let forest = TreeEnsemble::fit_indexed(
                &index,
                &y_train,
                leaves,
                shared.max_features,
                p_ens,
                member_seed(seed, 0),
            )?;
            (format!("forest(P_leaf={leaves},P_ens={p_ens})"), Box::new(forest))
        }
        ModelKind::Boost => {
            let m = BoostedModel::fit(&x_train, &y_train, &boost_cfg)?;
            (format!("boost(P_boost={})", m.n_rounds()), Box::new(m))
        }
        ModelKind::BoostEnsemble => {
            let e = BoostedEnsemble::fit(&x_train, &y_train, &boost_cfg, p_ens, member_seed(seed, 0))?;
            (
                format!("boost_ensemble(P_boost={},P_ens={p_ens})", boost_cfg.n_rounds),
                Box::new(e),
            )
        }
    };
    let label = match (linear, mc.p_phi) {
        (true, Some(p)) => format!("{label}[P_phi={p}]"),
        _ => label,
    };
    Ok(Built {
        label,
        model,
        x_train,
        x_test,
        y_train,
        y_test,
    })
}

pub fn ensure_exists(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Format(format!("config file {} not found", path.display())))
    }
}
