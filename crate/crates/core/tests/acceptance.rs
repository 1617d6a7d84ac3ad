//! Acceptance suite. Every criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use smootherlab::boosting_smoothers::{BoostConfig, BoostedEnsemble, BoostedModel};
use smootherlab::dataset::{load_idx, train_test_split, SyntheticSpec};
use smootherlab::effective_params::{
    generalized_eff_params, hessian_proxy_eff_params, train_eff_params_classical,
};
use smootherlab::experiments::output::render_sweep_csv;
use smootherlab::experiments::stats::{argmax, local_maxima, noise_band_violations};
use smootherlab::experiments::{
    back_to_u, bias_variance, fixed_design_check, peak_move, run_grid, BackToU,
    BiasVarianceModel, Branch, Continuation, EvalPoints, Family, FixedDesignModel, GridResult,
    PointSummary, SharedParams, SweepResult,
};
use smootherlab::linear_smoothers::{LinearFit, PcrScaling};
use smootherlab::rff::RffMap;
use smootherlab::tree_smoothers::{RegressionTree, TreeEnsemble};
use smootherlab::{Dataset64, KnnSmoother, Matrix64, Smoother};

const SEEDS: [u64; 3] = [0, 1, 2];
const N: usize = 1000;
const N_TEST: usize = 2000;
const BAND: f64 = 0.02;

/// First-axis grid of the RFF composite sweeps.
const RFF_GRID: [usize; 13] = [50, 100, 200, 300, 400, 500, 600, 700, 800, 850, 900, 950, 999];
const RFF_SWITCHES: [usize; 3] = [700, 850, 999];
const RFF_TOTALS: [usize; 5] = [1200, 1500, 2000, 3000, 4000];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, id: usize, name: &str, f: impl FnOnce() -> Verdict) {
        let start = Instant::now();
        let v = f();
        let status = if v.pass { "PASS" } else { "FAIL" };
        if !v.pass {
            self.failures += 1;
        }
        println!(
            "criterion {id:2} {status} {name} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix64 {
    Matrix64::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn mnist() -> (Dataset64, Dataset64) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist5k");
    let ds = load_idx(&dir.join("images-idx3-ubyte.gz"), &dir.join("labels-idx1-ubyte.gz"))
        .expect("bundled MNIST subset loads");
    train_test_split(&ds, N, N_TEST, 0).expect("split")
}

fn zero_vs_all(ds: &Dataset64) -> Vec<f64> {
    ds.class_labels()
        .expect("labels")
        .iter()
        .map(|&c| if c == 0 { 1.0 } else { 0.0 })
        .collect()
}

fn shared() -> SharedParams {
    SharedParams {
        seeds: SEEDS.to_vec(),
        ..SharedParams::default()
    }
}

fn band_ok(points: &[&PointSummary], f: impl Fn(&PointSummary) -> (f64, f64)) -> Vec<usize> {
    let (m, s): (Vec<f64>, Vec<f64>) = points.iter().map(|p| f(p)).unzip();
    noise_band_violations(&m, &s, BAND)
}

fn fmt_curve(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
}

fn c1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(10..=50);
        let p = rng.random_range(n..=4 * n);
        let phi = gaussian(&mut rng, n, p);
        let y = gaussian_vec(&mut rng, n);
        let x0 = gaussian(&mut rng, 30, p);
        let mn = LinearFit::fit_minnorm(&phi, &y).unwrap().predict(&x0).unwrap();
        let sv = LinearFit::fit_svd_basis(&phi, &y).unwrap().predict(&x0).unwrap();
        worst = worst.max(max_abs_diff(&mn, &sv) / max_abs(&mn));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-6 && secs < 5.0,
        format!("max relative discrepancy {worst:.2e} (<= 1e-6), {secs:.2}s (< 5s)"),
    )
}

fn c2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(10..=40);
        let p = rng.random_range(n..=3 * n);
        let phi = gaussian(&mut rng, n, p);
        let y = gaussian_vec(&mut rng, n);
        let k = (n - 1).min(p);
        let pcr = LinearFit::fit_pcr(&phi, &y, k, PcrScaling::Standardize).unwrap();
        let mn = LinearFit::fit_minnorm(&phi, &y).unwrap();
        worst = worst.max(max_abs_diff(pcr.fitted_values(), mn.fitted_values()));
    }
    verdict(worst <= 1e-5, format!("max training-prediction gap {worst:.2e} (<= 1e-5)"))
}

fn c3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let n = 50;
    let mut worst = 0.0f64;
    for p in 1..=10 {
        let phi = gaussian(&mut rng, n, p);
        let y = gaussian_vec(&mut rng, n);
        let hat = LinearFit::fit_ols(&phi, &y).unwrap().hat_matrix();
        let c = train_eff_params_classical(&hat).unwrap();
        let pf = p as f64;
        worst = worst
            .max((c.p_cov - pf).abs())
            .max((c.p_err - pf).abs())
            .max((c.p_var - pf).abs());
    }
    verdict(worst <= 1e-8, format!("max |trace - p| {worst:.2e} (<= 1e-8)"))
}

fn c4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (n, d) = (200, 5);
    let x = gaussian(&mut rng, n, d);
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let r = x.row(i);
            r[0].sin() + 0.5 * r[1] * r[2] + 0.3 * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let x0 = gaussian(&mut rng, 100, d);
    let map = RffMap::<f64>::sample(7, 400, d, 1.0).unwrap();
    let (phi, phi0) = (map.transform(&x, 400).unwrap(), map.transform(&x0, 400).unwrap());
    let boost_cfg = BoostConfig {
        n_rounds: 25,
        seed: 9,
        ..BoostConfig::default()
    };
    let models: Vec<(&str, Box<dyn Smoother<f64>>, &Matrix64)> = vec![
        ("ols", Box::new(LinearFit::fit_ols(&x, &y).unwrap()), &x0),
        ("minnorm", Box::new(LinearFit::fit_minnorm(&phi, &y).unwrap()), &phi0),
        (
            "pcr",
            Box::new(LinearFit::fit_pcr(&phi, &y, 60, PcrScaling::Standardize).unwrap()),
            &phi0,
        ),
        ("tree", Box::new(RegressionTree::fit(&x, &y, 40, 3).unwrap()), &x0),
        ("forest", Box::new(TreeEnsemble::fit(&x, &y, n, 10, 5).unwrap()), &x0),
        ("boosting", Box::new(BoostedModel::fit(&x, &y, &boost_cfg).unwrap()), &x0),
        (
            "boosted ensemble",
            Box::new(BoostedEnsemble::fit(&x, &y, &boost_cfg, 5, 11).unwrap()),
            &x0,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, m, inputs) in &models {
        let pred = m.predict(inputs).unwrap();
        let w = m.weight_matrix(inputs).unwrap();
        let via_weights: Vec<f64> = (0..inputs.rows())
            .map(|j| w.row(j).iter().zip(&y).map(|(a, b)| a * b).sum())
            .collect();
        let rel = max_abs_diff(&pred, &via_weights) / max_abs(&pred).max(f64::MIN_POSITIVE);
        pass &= rel <= 1e-8;
        parts.push(format!("{name} {rel:.1e}"));
    }
    verdict(pass, format!("relative gaps (<= 1e-8): {}", parts.join(", ")))
}

fn c5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let n = 100;
    let x = gaussian(&mut rng, n, 3);
    let y = gaussian_vec(&mut rng, n);
    let x0 = gaussian(&mut rng, 200, 3);
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1, 2, 5, n] {
        let knn = KnnSmoother::fit(&x, &y, k).unwrap();
        let p = generalized_eff_params(&knn, &x0, "test").unwrap().p_generalized;
        let want = n as f64 / k as f64;
        pass &= (p - want).abs() <= 1e-12 * want;
        parts.push(format!("k={k}: {p} (n/k = {want})"));
    }
    verdict(pass, parts.join(", "))
}

fn c6(train: &Dataset64, test: &Dataset64) -> Verdict {
    let start = Instant::now();
    let y = zero_vs_all(train);
    let map = RffMap::<f64>::sample(0, 4 * N, train.dim(), smootherlab::rff::DEFAULT_SCALE).unwrap();
    let mut p_train = Vec::new();
    let mut p_test = Vec::new();
    for p in [N, 2 * N, 4 * N] {
        let phi = map.transform(train.features(), p).unwrap();
        let phi0 = map.transform(test.features(), p).unwrap();
        let fit = LinearFit::fit_minnorm(&phi, &y).unwrap();
        p_train.push(generalized_eff_params(&fit, &phi, "train").unwrap().p_generalized);
        p_test.push(generalized_eff_params(&fit, &phi0, "test").unwrap().p_generalized);
    }
    let secs = start.elapsed().as_secs_f64();
    let plateau = p_train.iter().all(|p| (p - N as f64).abs() <= 1e-4 * N as f64);
    let distinct = (0..3).all(|i| {
        (i + 1..3).all(|j| (p_test[i] - p_test[j]).abs() > 1e-6 * p_test[i].abs().max(1.0))
    });
    verdict(
        plateau && distinct && secs < 120.0,
        format!(
            "p_train [{}] (n = {N} +- 0.1), p_test [{}], {secs:.1}s (< 120s)",
            fmt_curve(&p_train),
            fmt_curve(&p_test)
        ),
    )
}

/// Composite RFF results (one per switch) and their wall time.
struct RffPeaks {
    results: Vec<SweepResult>,
    elapsed: Duration,
}

fn rff_peaks(train: &Dataset64, test: &Dataset64, shared: &SharedParams) -> RffPeaks {
    let start = Instant::now();
    let results = peak_move(
        Family::RffLinear,
        &RFF_GRID,
        &RFF_SWITCHES,
        &Continuation::RffTotals(RFF_TOTALS.to_vec()),
        train,
        test,
        shared,
    )
    .expect("RFF peak-moving sweeps");
    RffPeaks {
        results,
        elapsed: start.elapsed(),
    }
}

fn c7(peaks: &RffPeaks) -> Verdict {
    let res = peaks.results.last().expect("switch at n - 1");
    let summary = res.summary();
    let med: Vec<f64> = summary.iter().map(|s| s.test_mse.median).collect();
    let phi: Vec<usize> = summary.iter().map(|s| s.axis1_value + s.axis2_value).collect();
    let at_n = (0..phi.len())
        .min_by_key(|&i| phi[i].abs_diff(N))
        .expect("non-empty");
    let min_small = (0..phi.len())
        .filter(|&i| phi[i] < N / 2)
        .map(|i| med[i])
        .fold(f64::INFINITY, f64::min);
    let is_local_max = local_maxima(&med).contains(&at_n);
    let peak = med[at_n];
    let last = *med.last().unwrap();
    let last_phi = *phi.last().unwrap();
    let secs = peaks.elapsed.as_secs_f64();
    verdict(
        is_local_max && peak >= 1.3 * min_small && last <= 0.8 * peak && last_phi == 4 * N && secs < 600.0,
        format!(
            "peak {peak:.3} at P_phi = {} (local max: {is_local_max}), min over P_phi < n/2 {min_small:.3} \
             (ratio {:.1}, >= 1.3), final {last:.3} at P_phi = {last_phi} ({:.0}% below peak, >= 20%); \
             sweep time {secs:.0}s (< 600s)",
            phi[at_n],
            peak / min_small,
            100.0 * (1.0 - last / peak)
        ),
    )
}

fn c8(tree_grid: &GridResult, boost: &BackToU, rff: &BackToU) -> Verdict {
    let mut viol = Vec::new();
    let mut parts = Vec::new();
    // Trees: the P_ens axis at every P_leaf of the grid.
    for i1 in 0..tree_grid.axis1_values.len() {
        let curve = tree_grid.axis2_curve(i1);
        let refs: Vec<&PointSummary> = curve.iter().collect();
        let v = band_ok(&refs, |p| (p.test_mse.median, p.test_mse.se));
        if !v.is_empty() {
            viol.push(format!("tree P_leaf={}", tree_grid.axis1_values[i1]));
        }
    }
    let max_curve: Vec<f64> = tree_grid
        .axis2_curve(tree_grid.axis1_values.len() - 1)
        .iter()
        .map(|p| p.test_mse.median)
        .collect();
    parts.push(format!("tree P_ens at max leaves [{}]", fmt_curve(&max_curve)));
    // Boosting and RFF: the second axis at each fixed first-axis value.
    for (label, b) in [("boosting", boost), ("rff", rff)] {
        let mut firsts: Vec<usize> = b.rows.iter().map(|r| r.axis1).collect();
        firsts.sort_unstable();
        firsts.dedup();
        for a in firsts {
            let mut line: Vec<&_> = b
                .rows
                .iter()
                .filter(|r| {
                    r.axis1 == a
                        && (r.branch == Branch::Contour
                            || r.axis1 == b.switch
                            || r.axis2 == b.family.axis2_base())
                })
                .collect();
            line.sort_by_key(|r| r.axis2);
            line.dedup_by_key(|r| r.axis2);
            if line.len() < 2 {
                continue;
            }
            let (m, s): (Vec<f64>, Vec<f64>) =
                line.iter().map(|r| (r.test_mse.median, r.test_mse.se)).unzip();
            if !noise_band_violations(&m, &s, BAND).is_empty() {
                viol.push(format!("{label} axis1={a} [{}]", fmt_curve(&m)));
            }
            if a == b.switch {
                parts.push(format!("{label} second axis at axis1={a} [{}]", fmt_curve(&m)));
            }
        }
    }
    verdict(
        viol.is_empty(),
        format!(
            "{}; band violations: {}",
            parts.join("; "),
            if viol.is_empty() { "none".into() } else { viol.join("; ") }
        ),
    )
}

fn c9(peaks: &RffPeaks) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (sw, res) in RFF_SWITCHES.iter().zip(&peaks.results) {
        let med = res.median_test_mse();
        let arg = argmax(&med).expect("non-empty");
        let switch_idx = res
            .schedule
            .points
            .iter()
            .position(|p| p.axis1 == *sw && p.axis2 == 0)
            .expect("switch point");
        let ok = arg.abs_diff(switch_idx) <= 1;
        pass &= ok;
        let p = res.schedule.points[arg];
        parts.push(format!(
            "switch {sw}: argmax at step {arg} (P_PC={}, P_ex={}), switch step {switch_idx}",
            p.axis1, p.axis2
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c10(train: &Dataset64) -> Verdict {
    let y = zero_vs_all(train);
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let y_new: Vec<f64> = y
        .iter()
        .map(|&v| v + 0.1 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let map = RffMap::<f64>::sample(0, 8 * N, train.dim(), smootherlab::rff::DEFAULT_SCALE).unwrap();
    let sizes = [N, 2 * N, 8 * N];
    let designs: Vec<Matrix64> = sizes
        .iter()
        .map(|&p| map.transform(train.features(), p).unwrap())
        .collect();
    let fits: Vec<LinearFit<f64>> = designs
        .iter()
        .map(|phi| LinearFit::fit_minnorm(phi, &y).unwrap())
        .collect();
    let models: Vec<FixedDesignModel<'_, f64>> = sizes
        .iter()
        .zip(&fits)
        .zip(&designs)
        .map(|((p, m), d)| FixedDesignModel {
            name: format!("minnorm P_phi={p}"),
            model: m as &dyn Smoother<f64>,
            train_inputs: d,
        })
        .collect();
    match fixed_design_check(&models, &y, &y_new, 1e-4) {
        Ok(report) => {
            let gap = report.max_pairwise_gap();
            let losses: Vec<f64> = report.rows.iter().map(|r| r.fixed_design_loss).collect();
            verdict(
                gap <= 1e-8,
                format!("losses [{}], max pairwise gap {gap:.2e} (<= 1e-8)", fmt_curve(&losses)),
            )
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn c11() -> Verdict {
    let spec = SyntheticSpec {
        true_function: "sine".into(),
        noise_std: 0.5,
        n: 20,
        d: 1,
        seed: 7,
    };
    let report = bias_variance(&spec, &BiasVarianceModel::Ols { p: 2 }, 2000, EvalPoints::Train, 0)
        .expect("bias/variance study");
    let z = report.max_z();
    let avg_var: f64 = report.points.iter().map(|p| p.analytic_var).sum::<f64>() / 20.0;
    verdict(
        z <= 3.0,
        format!(
            "max |analytic - MC| over bias, variance, MSE at 20 points: {z:.2} SE (<= 3); \
             mean analytic variance {avg_var:.4} (p sigma^2 / n = {:.4})",
            2.0 * 0.25 / 20.0
        ),
    )
}

fn c12(results: &[(&str, &BackToU)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, b) in results {
        let switch = b.switch_row();
        let mut branch = vec![switch];
        branch.extend(b.axis2_branch());
        let (m, s): (Vec<f64>, Vec<f64>) =
            branch.iter().map(|r| (r.p_test.median, r.p_test.se)).unzip();
        let monotone = noise_band_violations(&m, &s, BAND).is_empty();
        let folded = branch[1..]
            .iter()
            .all(|r| r.p_test.median <= switch.p_test.median);
        pass &= monotone && folded;
        parts.push(format!(
            "{label}: p_test [{}] non-increasing {monotone}, below interpolation point {folded}",
            fmt_curve(&m)
        ));
    }
    verdict(pass, parts.join("; "))
}

fn c13(train: &Dataset64) -> Verdict {
    let map = RffMap::<f64>::sample(0, 4 * N, train.dim(), smootherlab::rff::DEFAULT_SCALE).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [N / 2, N, 2 * N, 4 * N] {
        let phi = map.transform(train.features(), p).unwrap();
        let v = hessian_proxy_eff_params(&phi, 0.0).unwrap();
        let want = p.min(N) as f64;
        pass &= (v - want).abs() <= 1e-6 * want;
        parts.push(format!("p={p}: {v}"));
    }
    verdict(pass, format!("{} (min(n, p) +- 1e-6 relative)", parts.join(", ")))
}

fn c14(
    train: &Dataset64,
    test: &Dataset64,
    tree_grid: &GridResult,
    peaks: &RffPeaks,
    boost: &BackToU,
) -> Verdict {
    let one_seed = SharedParams {
        seeds: vec![0],
        ..SharedParams::default()
    };
    let seed0_csv = |r: &SweepResult| {
        let mut r = r.clone();
        r.records.retain(|x| x.seed == 0);
        render_sweep_csv(&r).unwrap()
    };
    let tree_again = tree_grid_run(train, test, &shared());
    let rff_again = rff_peaks(train, test, &one_seed);
    let boost_again = boost_back_to_u(train, test, &one_seed);
    let same_tree =
        render_sweep_csv(&tree_grid.result).unwrap() == render_sweep_csv(&tree_again.result).unwrap();
    let same_rff = peaks
        .results
        .iter()
        .zip(&rff_again.results)
        .all(|(a, b)| seed0_csv(a) == seed0_csv(b));
    let same_boost = seed0_csv(&boost.composite) == seed0_csv(&boost_again.composite);
    verdict(
        same_tree && same_rff && same_boost,
        format!(
            "byte-identical CSV on rerun: tree grid {same_tree}, RFF peak sweeps (seed 0) {same_rff}, \
             boosting composite (seed 0) {same_boost}"
        ),
    )
}

fn tree_grid_run(train: &Dataset64, test: &Dataset64, shared: &SharedParams) -> GridResult {
    run_grid(
        Family::Tree,
        &[2, 5, 10, 20, 50, 100, 200, 500, N],
        &[1, 2, 5, 10, 20],
        train,
        test,
        shared,
    )
    .expect("tree grid")
}

fn boost_back_to_u(train: &Dataset64, test: &Dataset64, shared: &SharedParams) -> BackToU {
    back_to_u(
        Family::Boosting,
        &[1, 2, 5, 10, 20, 50, 100],
        100,
        &Continuation::Values(vec![2, 5, 10, 20]),
        &[10, 50],
        train,
        test,
        shared,
    )
    .expect("boosting back-to-U")
}

fn main() {
    let wall = Instant::now();
    let mut suite = Suite { failures: 0 };
    suite.run(1, "min-norm / SVD-basis equivalence", c1);
    suite.run(2, "PCR / min-norm agreement", c2);
    suite.run(3, "OLS trace identities", c3);
    suite.run(4, "weight / prediction duality", c4);
    suite.run(5, "kNN calibration", c5);

    let (train, test) = mnist();
    let shared = shared();
    suite.run(6, "interpolation plateau", || c6(&train, &test));

    let peaks = rff_peaks(&train, &test, &shared);
    suite.run(7, "double-descent shape", || c7(&peaks));

    let tree_grid = tree_grid_run(&train, &test, &shared);
    let tree_u = back_to_u(
        Family::Tree,
        &[2, 5, 10, 20, 50, 100, 200, 500, N],
        N,
        &Continuation::Values(vec![2, 5, 10, 20]),
        &[10, 50, 200],
        &train,
        &test,
        &shared,
    )
    .expect("tree back-to-U");
    let boost_u = boost_back_to_u(&train, &test, &shared);
    let rff_u = back_to_u(
        Family::RffLinear,
        &RFF_GRID,
        999,
        &Continuation::RffTotals(RFF_TOTALS.to_vec()),
        &[200, 700],
        &train,
        &test,
        &shared,
    )
    .expect("RFF back-to-U");
    suite.run(8, "axis decomposition", || c8(&tree_grid, &boost_u, &rff_u));
    suite.run(9, "peak moving", || c9(&peaks));
    suite.run(10, "fixed-design impossibility", || c10(&train));
    suite.run(11, "bias/variance decomposition", c11);
    suite.run(12, "back to U", || {
        c12(&[("tree", &tree_u), ("boosting", &boost_u), ("rff", &rff_u)])
    });
    suite.run(13, "Hessian proxy constancy", || c13(&train));
    suite.run(14, "determinism", || c14(&train, &test, &tree_grid, &peaks, &boost_u));

    println!(
        "acceptance: {} of 14 criteria passed in {:.0}s",
        14 - suite.failures,
        wall.elapsed().as_secs_f64()
    );
    if suite.failures > 0 {
        std::process::exit(1);
    }
}
