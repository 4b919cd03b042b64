//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any required criterion fails.
//!
//! Reference values come from independent oracles written here: a
//! brute-force Dempster combination over every subset pair and central
//! finite differences of the loss.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use fedfuse::cli::{latency_report, run_experiment, run_scaling, DatasetSource, ExperimentConfig, ROUND_LOG_FILE, SUMMARY_FILE};
use fedfuse::data::{generate_synthetic, partition_clients, PartitionPlan, PartitionScheme};
use fedfuse::federation::{
    centralized_train, fed_avg, federated_objective, run_federation, ClientState, ClientUpdate, FederationConfig,
    ModelConfig,
};
use fedfuse::fusion::{combine_all, decide_max_belief, ds_combine, FrameOfDiscernment, MassFunction, Subset};
use fedfuse::latency::{trans_time, LinkTable, MicroserviceNode, Micros, Placement, Stage};
use fedfuse::metrics::binary_metrics;
use fedfuse::nn::{
    evaluate, forward, init_model, loss_and_gradient, Activation, MlpSpec, Optimizer, TrainConfig, WeightVector,
};
use fedfuse::seed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
/// A criterion and whether its failure counts against the run.
type Criterion<'a> = (&'a str, Box<dyn Fn() -> (Check, bool)>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).max(4)
}

// ---------------------------------------------------------------------------
// Dempster-Shafer oracle: dense vectors indexed by subset bitmask.

fn random_dense_mass(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let size = 1usize << n;
    let mut m = vec![0.0; size];
    for v in m.iter_mut().skip(1) {
        // a few exact zeros keep sparse focal sets in the mix
        *v = if rng.random::<f64>() < 0.15 { 0.0 } else { rng.random::<f64>() };
    }
    if m.iter().all(|&v| v == 0.0) {
        m[size - 1] = 1.0;
    }
    let total: f64 = m.iter().sum();
    m.iter_mut().for_each(|v| *v /= total);
    m
}

fn to_mass(frame: &FrameOfDiscernment, dense: &[f64]) -> MassFunction {
    let entries = dense
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(bits, &v)| (subset_of(bits), v));
    MassFunction::new(frame.clone(), entries).expect("valid mass")
}

fn subset_of(bits: usize) -> Subset {
    Subset(bits as u32)
}

fn brute_force(m1: &[f64], m2: &[f64]) -> (Vec<f64>, f64) {
    let mut out = vec![0.0; m1.len()];
    let mut k = 0.0;
    for a in 0..m1.len() {
        for b in 0..m2.len() {
            let p = m1[a] * m2[b];
            if a & b == 0 {
                k += p;
            } else {
                out[a & b] += p;
            }
        }
    }
    out.iter_mut().for_each(|v| *v /= 1.0 - k);
    (out, k)
}

fn frame(n: usize) -> FrameOfDiscernment {
    FrameOfDiscernment::new((0..n).map(|i| format!("h{i}"))).unwrap()
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.random_range(1..=4);
        let f = frame(n);
        let (d1, d2) = (random_dense_mass(&mut rng, n), random_dense_mass(&mut rng, n));
        let (expected, k) = brute_force(&d1, &d2);
        if k >= 1.0 - 1e-9 {
            continue;
        }
        let got = ds_combine(&to_mass(&f, &d1), &to_mass(&f, &d2)).map_err(|e| e.to_string())?;
        worst = worst.max((got.conflict - k).abs());
        for (bits, &e) in expected.iter().enumerate().skip(1) {
            worst = worst.max((got.combined.mass(subset_of(bits)) - e).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("500 pairs, max deviation {worst:.1e}, {secs:.3} s"))
}

fn max_diff(a: &MassFunction, b: &MassFunction, n: usize) -> f64 {
    (1..1usize << n)
        .map(|bits| (a.mass(subset_of(bits)) - b.mass(subset_of(bits))).abs())
        .fold(0.0, f64::max)
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut comm, mut assoc) = (0.0f64, 0.0f64);
    let mut triples = 0;
    while triples < 200 {
        let n = rng.random_range(2..=4);
        let f = frame(n);
        let m: Vec<MassFunction> = (0..3)
            .map(|_| to_mass(&f, &random_dense_mass(&mut rng, n)))
            .collect();
        let ab = ds_combine(&m[0], &m[1]).map_err(|e| e.to_string())?;
        let ba = ds_combine(&m[1], &m[0]).map_err(|e| e.to_string())?;
        comm = comm.max(max_diff(&ab.combined, &ba.combined, n));
        comm = comm.max((ab.conflict - ba.conflict).abs());
        let (Ok(left), Ok(bc)) = (ds_combine(&ab.combined, &m[2]), ds_combine(&m[1], &m[2])) else {
            continue;
        };
        let right = ds_combine(&m[0], &bc.combined).map_err(|e| e.to_string())?;
        assoc = assoc.max(max_diff(&left.combined, &right.combined, n));
        triples += 1;

        let vac = ds_combine(&m[0], &MassFunction::vacuous(f.clone())).map_err(|e| e.to_string())?;
        ensure(vac.combined == m[0] && vac.conflict == 0.0, || "vacuous mass is not neutral".into())?;
    }
    ensure(comm <= 1e-12, || format!("commutativity deviation {comm:e}"))?;
    ensure(assoc <= 1e-9, || format!("associativity deviation {assoc:e}"))?;

    let mut bayes = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=4);
        let f = frame(n);
        let draw = |rng: &mut ChaCha8Rng| {
            let p: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.01).collect();
            let s: f64 = p.iter().sum();
            p.into_iter().map(|v| v / s).collect::<Vec<_>>()
        };
        let (p, q) = (draw(&mut rng), draw(&mut rng));
        let singletons = |p: &[f64]| {
            MassFunction::new(f.clone(), p.iter().enumerate().map(|(i, &v)| (Subset::singleton(i), v))).unwrap()
        };
        let r = ds_combine(&singletons(&p), &singletons(&q)).map_err(|e| e.to_string())?;
        let z: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        for i in 0..n {
            bayes = bayes.max((r.combined.mass(Subset::singleton(i)) - p[i] * q[i] / z).abs());
        }
    }
    ensure(bayes <= 1e-12, || format!("Bayesian reduction deviation {bayes:e}"))?;

    let f = FrameOfDiscernment::new(["A", "B", "C"]).unwrap();
    let s = |l: &str| f.parse_subset(l).unwrap();
    let m1 = MassFunction::new(f.clone(), [(s("A"), 0.99), (s("B"), 0.01)]).unwrap();
    let m2 = MassFunction::new(f.clone(), [(s("C"), 0.99), (s("B"), 0.01)]).unwrap();
    let z = combine_all(&[m1, m2]).map_err(|e| e.to_string())?;
    let d = decide_max_belief(&z);
    ensure(
        format!("{:.4}", z.combined.mass(s("B"))) == "1.0000" && format!("{:.4}", z.conflict) == "0.9999",
        || format!("Zadeh case gave m(B)={} K={}", z.combined.mass(s("B")), z.conflict),
    )?;
    ensure(d.label == "B", || format!("Zadeh decision {}", d.label))?;
    Ok(format!(
        "commutativity {comm:.1e}, associativity {assoc:.1e} over 200 triples, vacuous exact, Bayesian {bayes:.1e}, Zadeh m(B)=1 K=0.9999"
    ))
}

// ---------------------------------------------------------------------------

fn vector(values: Vec<f64>) -> WeightVector {
    let spec = MlpSpec::new(vec![values.len() - 1, 1], Activation::Tanh, 0).unwrap();
    WeightVector::new(values, spec.layer_shapes()).unwrap()
}

fn criterion_3() -> Check {
    let hand = fed_avg(&[
        ClientUpdate {
            client_id: 0,
            weights: vector(vec![1.0, 3.0]),
            samples: 1,
        },
        ClientUpdate {
            client_id: 1,
            weights: vector(vec![3.0, 5.0]),
            samples: 3,
        },
    ])
    .map_err(|e| e.to_string())?;
    ensure(hand.values() == [2.5, 4.5], || format!("hand case gave {:?}", hand.values()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for trial in 0..100 {
        let len = rng.random_range(2..40);
        let k = rng.random_range(1..12);
        let updates: Vec<ClientUpdate> = (0..k)
            .map(|i| ClientUpdate {
                client_id: i as u32,
                weights: vector((0..len).map(|_| rng.random_range(-1e3..1e3)).collect()),
                samples: rng.random_range(1..500),
            })
            .collect();
        let reference = fed_avg(&updates).map_err(|e| e.to_string())?;
        let mut shuffled = updates.clone();
        shuffled.shuffle(&mut rng);
        let again = fed_avg(&shuffled).map_err(|e| e.to_string())?;
        let bits = |w: &WeightVector| w.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        ensure(bits(&reference) == bits(&again), || format!("trial {trial}: permutation changed bits"))?;
        for (j, &v) in reference.values().iter().enumerate() {
            let col = updates.iter().map(|u| u.weights.values()[j]);
            let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
            ensure(lo <= v && v <= hi, || format!("trial {trial}: coordinate {j} outside hull"))?;
        }
        let single = fed_avg(&updates[..1]).map_err(|e| e.to_string())?;
        ensure(bits(&single) == bits(&updates[0].weights), || "single update is not the identity".into())?;
    }
    Ok("hand case [2.5, 4.5] exact; 100 random trials bit-identical under permutation, inside hull, single-update identity".into())
}

fn small_config(clients: usize, rounds: usize, epochs: usize) -> FederationConfig {
    FederationConfig {
        num_clients: clients,
        rounds,
        client_fraction: 1.0,
        models: vec![
            ModelConfig {
                name: "relu".into(),
                spec: MlpSpec::new(vec![8, 12, 3], Activation::Relu, 1).unwrap(),
            },
            ModelConfig {
                name: "tanh".into(),
                spec: MlpSpec::new(vec![8, 10, 6, 3], Activation::Tanh, 1).unwrap(),
            },
        ],
        train: TrainConfig {
            epochs,
            batch_size: 16,
            learning_rate: 5e-3,
            optimizer: Optimizer::adam(),
            seed: 41,
        },
        partition: PartitionScheme::Iid,
        seed: 17,
    }
}

fn criterion_4() -> Check {
    let data = generate_synthetic(3, 8, 80, 0.5, 0.05, 4).map_err(|e| e.to_string())?;
    let test = generate_synthetic(3, 8, 20, 0.5, 0.05, 5).map_err(|e| e.to_string())?;
    let (rounds, epochs) = (4, 3);
    let cfg = small_config(1, rounds, epochs);
    let fed = run_federation(&cfg, &data, &test, 1).map_err(|e| e.to_string())?;
    for (i, m) in cfg.models.iter().enumerate() {
        let init = init_model(&m.spec, seed::derive(cfg.seed, &[seed::TAG_INIT, i as u64])).unwrap();
        let central = centralized_train(&init, &m.name, &m.spec, &data, &test, &cfg.train, rounds * epochs)
            .map_err(|e| e.to_string())?;
        let bits = |w: &WeightVector| w.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        ensure(bits(&central.weights) == bits(&fed.globals[i].weights), || {
            format!("model {} differs from centralized training", m.name)
        })?;
    }
    Ok(format!(
        "K=1 federation ({rounds} rounds x {epochs} epochs) bit-identical to centralized {} epochs for 2 models",
        rounds * epochs
    ))
}

fn criterion_5() -> Check {
    let data = generate_synthetic(4, 10, 150, 0.7, 0.05, 8).map_err(|e| e.to_string())?;
    let parts = partition_clients(
        &data,
        &PartitionPlan {
            scheme: PartitionScheme::Dirichlet { alpha: 0.5 },
            clients: 10,
            seed: 3,
        },
    )
    .map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = parts.iter().map(|p| p.len()).collect();
    let clients: Vec<ClientState> = parts
        .into_iter()
        .enumerate()
        .map(|(k, p)| ClientState::new(k as u32, p))
        .collect();
    let spec = MlpSpec::new(vec![10, 16, 4], Activation::Tanh, 0).unwrap();
    let mut worst = 0.0f64;
    for s in 0..5 {
        let w = init_model(&spec, s).unwrap();
        let objective = federated_objective(&w, &spec, &clients).map_err(|e| e.to_string())?;
        let pooled: f64 = (0..data.len())
            .map(|i| -forward(&w, &spec, data.features(i)).unwrap()[data.label(i)].ln())
            .sum::<f64>()
            / data.len() as f64;
        worst = worst.max((objective - pooled).abs());
        let via_evaluate = evaluate(&w, &spec, &data).unwrap().loss;
        worst = worst.max((objective - via_evaluate).abs());
    }
    ensure(worst <= 1e-9, || format!("deviation {worst:e}"))?;
    Ok(format!("10 Dirichlet clients (sizes {sizes:?}), 5 weight draws, max deviation {worst:.1e}"))
}

fn criterion_6() -> Check {
    let spec = MlpSpec::new(vec![5, 7, 6, 4], Activation::Tanh, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let loss = |w: &WeightVector, x: &[f64], y: usize| -forward(w, &spec, x).unwrap()[y].ln();
    for _ in 0..100 {
        let values: Vec<f64> = (0..spec.num_params()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = WeightVector::new(values.clone(), spec.layer_shapes()).unwrap();
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y = rng.random_range(0..4);
        let (_, analytic) = loss_and_gradient(&w, &spec, &x, y).map_err(|e| e.to_string())?;
        let numeric: Vec<f64> = (0..values.len())
            .map(|j| {
                let mut plus = values.clone();
                let mut minus = values.clone();
                plus[j] += h;
                minus[j] -= h;
                let lp = loss(&WeightVector::new(plus, spec.layer_shapes()).unwrap(), &x, y);
                let lm = loss(&WeightVector::new(minus, spec.layer_shapes()).unwrap(), &x, y);
                (lp - lm) / (2.0 * h)
            })
            .collect();
        let diff = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let na = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nn = numeric.iter().map(|n| n * n).sum::<f64>().sqrt();
        worst = worst.max(diff / na.max(nn).max(1e-12));
    }
    ensure(worst < 1e-4, || format!("max relative error {worst:e}"))?;
    Ok(format!("100 random (weights, input, label) triples, tanh [5,7,6,4], max relative error {worst:.1e}"))
}

fn criterion_7() -> Check {
    let cfg = ExperimentConfig::load(&configs().join("default.toml")).map_err(|e| e.to_string())?;
    let DatasetSource::Synthetic(ds) = &cfg.dataset.source else {
        return Err("shipped config does not use synthetic data".into());
    };
    let f = &cfg.federation;
    let specs: Vec<_> = f.models.iter().map(|m| (&m.spec.layer_widths, m.spec.activation)).collect();
    ensure(
        ds.classes == 3
            && ds.dim == 16
            && ds.samples_per_class == 500
            && ds.label_noise == 0.05
            && f.num_clients == 10
            && f.partition == PartitionScheme::Iid
            && f.rounds == 35
            && f.train.epochs == 10
            && f.train.learning_rate == 1e-3
            && matches!(f.train.optimizer, Optimizer::Adam { .. })
            && f.models.len() == 3
            && (0..3).all(|i| (0..i).all(|j| specs[i] != specs[j])),
        || "shipped config deviates from the required setup".into(),
    )?;
    let start = Instant::now();
    let exp = run_experiment(&cfg, threads()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let accs: Vec<String> = exp
        .summary
        .models
        .iter()
        .map(|m| format!("{} {:.4}", m.name, m.test_accuracy))
        .collect();
    let best = exp.summary.models.iter().map(|m| m.test_accuracy).fold(0.0, f64::max);
    let fused = exp
        .summary
        .fusion
        .as_ref()
        .ok_or("fusion block missing")?
        .metrics
        .macro_avg
        .accuracy;
    let detail = format!("{}, fused {fused:.4}, {secs:.1} s", accs.join(", "));
    ensure(exp.summary.models.iter().all(|m| m.test_accuracy >= 0.90), || detail.clone())?;
    ensure(fused >= best, || detail.clone())?;
    ensure(secs <= 180.0, || detail.clone())?;
    Ok(detail)
}

fn criterion_8() -> Check {
    let cfg = ExperimentConfig::load(&configs().join("transfer.toml")).map_err(|e| e.to_string())?;
    ensure(cfg.transfer.enabled && cfg.transfer.compare_random, || "transfer comparison disabled".into())?;
    ensure(cfg.transfer.target_accuracy == 0.85, || "target accuracy is not 0.85".into())?;
    let start = Instant::now();
    let exp = run_experiment(&cfg, threads()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let t = exp.summary.transfer.as_ref().ok_or("transfer block missing")?;
    let fmt = |r: Option<usize>| r.map_or("never".to_string(), |r| r.to_string());
    let mut lines = Vec::new();
    let mut ok = secs <= 180.0;
    for m in &t.models {
        let random = m.rounds_random.flatten();
        lines.push(format!("{} {} vs {}", m.name, fmt(m.rounds_transfer), fmt(random)));
        ok &= match (m.rounds_transfer, random) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        };
    }
    let detail = format!("rounds to 0.85 transfer vs random: {}, {secs:.1} s", lines.join(", "));
    ensure(ok, || detail.clone())?;
    Ok(detail)
}

fn criterion_9() -> Check {
    let m = binary_metrics(2, 1, 1, 6).map_err(|e| e.to_string())?;
    ensure((m.accuracy - 0.8).abs() < 1e-12, || format!("accuracy {}", m.accuracy))?;
    ensure((m.precision - 0.6667).abs() <= 1e-4, || format!("precision {}", m.precision))?;
    ensure((m.mcc - 0.5238).abs() <= 1e-4, || format!("mcc {}", m.mcc))?;
    let perfect = binary_metrics(7, 0, 0, 5).map_err(|e| e.to_string())?;
    let anti = binary_metrics(0, 5, 7, 0).map_err(|e| e.to_string())?;
    ensure(perfect.mcc == 1.0 && anti.mcc == -1.0, || {
        format!("perfect {} anti {}", perfect.mcc, anti.mcc)
    })?;
    Ok(format!(
        "accuracy {}, precision {:.4}, mcc {:.4}; perfect +1, anti-perfect -1",
        m.accuracy, m.precision, m.mcc
    ))
}

fn node(name: &str, placement: Placement) -> MicroserviceNode {
    MicroserviceNode {
        name: name.into(),
        placement,
        exec: Micros(0),
        stage: Stage::Processing,
        input_mbits: 0.0,
    }
}

fn criterion_10() -> Check {
    let b = latency_report(&configs().join("pipeline.toml")).map_err(|e| e.to_string())?;
    ensure(b.total == b.stages.total(), || format!("total {:?} vs stages {:?}", b.total, b.stages))?;
    let node_sum: Micros = b.nodes.iter().map(|n| n.response).sum();
    ensure(b.total == node_sum, || "total differs from node sum".into())?;

    let gw = Placement::Other("gw".into());
    let mut links = LinkTable::new(Some(gw.clone()));
    links.insert(Placement::Edge("1".into()), gw.clone(), 4.0).unwrap();
    links.insert(gw, Placement::Cloud, 8.0).unwrap();
    let edge = node("e", Placement::Edge("1".into()));
    let cloud = node("c", Placement::Cloud);
    let two_hop = trans_time(&edge, &cloud, 8.0, &links).map_err(|e| e.to_string())?;
    ensure(two_hop == Micros(3_000_000), || format!("two-hop transfer {two_hop:?}"))?;
    let local = trans_time(&cloud, &node("c2", Placement::Cloud), 123.0, &links).map_err(|e| e.to_string())?;
    ensure(local == Micros(0), || format!("co-located transfer {local:?}"))?;
    Ok(format!(
        "pipeline total {} ms = stage sum ({} + {} + {}); two-hop 8 Mbit over (4, 8) Mbit/s = {} ms; co-located 0",
        b.total.as_ms(),
        b.stages.preprocessing.as_ms(),
        b.stages.processing.as_ms(),
        b.stages.fusion.as_ms(),
        two_hop.as_ms()
    ))
}

/// Returns the check and whether a failure counts. The timing ratio is only
/// meaningful with at least four cores; on smaller hosts it is reported but
/// not enforced.
fn criterion_11() -> (Check, bool) {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let run = || -> Check {
        let mut cfg = ExperimentConfig::load(&configs().join("default.toml")).map_err(|e| e.to_string())?;
        cfg.scaling.client_counts = vec![10, 15, 20, 25, 30];
        let report = run_scaling(&cfg, threads()).map_err(|e| e.to_string())?;
        ensure(report.rows.len() == 5, || "expected one row per client count".into())?;
        ensure(report.rows.iter().all(|r| r.total_ms > 0.0), || "non-positive duration".into())?;
        ensure(report.ratio.is_finite(), || "ratio missing".into())?;
        let detail = format!(
            "time(30)/time(10) = {:.3}, threshold {}, {} threads on {} cores",
            report.ratio, report.threshold, report.host.threads, report.host.available_parallelism
        );
        ensure(report.within_threshold, || detail.clone())?;
        Ok(detail)
    };
    match run() {
        Ok(d) => (Ok(d), true),
        Err(d) if cores < 4 => (
            Err(format!("{d}; enforced only with at least 4 cores")),
            false,
        ),
        Err(d) => (Err(d), true),
    }
}

fn criterion_12() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg_text = std::fs::read_to_string(configs().join("default.toml")).map_err(|e| e.to_string())?;
    cfg_text = cfg_text.replace("rounds = 35", "rounds = 4");
    let cfg_path = dir.path().join("experiment.toml");
    std::fs::write(&cfg_path, cfg_text).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let invoke = || -> Result<(Vec<u8>, Vec<u8>), String> {
        let status = Command::new(env!("CARGO_BIN_EXE_fedfuse"))
            .arg("federate")
            .arg("--config")
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .arg("--threads")
            .arg(threads().to_string())
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        let read = |name: &str| std::fs::read(out.join(name)).map_err(|e| e.to_string());
        Ok((read(ROUND_LOG_FILE)?, read(SUMMARY_FILE)?))
    };
    let first = invoke()?;
    let second = invoke()?;
    ensure(first.0 == second.0, || "round log differs".into())?;
    ensure(first.1 == second.1, || "summary differs".into())?;
    Ok(format!(
        "two invocations: {} byte round log and {} byte summary identical",
        first.0.len(),
        first.1.len()
    ))
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("Dempster-Shafer oracle equivalence", Box::new(|| (criterion_1(), true))),
        ("Dempster-Shafer algebra", Box::new(|| (criterion_2(), true))),
        ("FedAvg correctness", Box::new(|| (criterion_3(), true))),
        ("protocol equivalence", Box::new(|| (criterion_4(), true))),
        ("pooled-loss identity", Box::new(|| (criterion_5(), true))),
        ("gradient check", Box::new(|| (criterion_6(), true))),
        ("desk-scale federation", Box::new(|| (criterion_7(), true))),
        ("transfer learning", Box::new(|| (criterion_8(), true))),
        ("metrics", Box::new(|| (criterion_9(), true))),
        ("latency model", Box::new(|| (criterion_10(), true))),
        ("client scaling", Box::new(criterion_11)),
        ("determinism", Box::new(|| (criterion_12(), true))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (result, enforced) = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| (Err(format!("panicked: {:?}", p.downcast_ref::<String>())), true));
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", i + 1);
                if enforced {
                    failed += 1;
                }
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
