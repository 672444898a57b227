mod common;

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use common::{det, eigenvalues, local_matrix, max_gap, model, random_antisymmetric, sorted};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topo_core::flow::{kramers_halfflux_probe, FluxPath};
use topo_core::harness::{run_experiment, sweep, write_results_csv, ExperimentConfig, ResultRecord};
use topo_core::invariants::{chern_value, nc_derivative, pfaffian, trace_per_volume, IndexSet, Region};
use topo_core::linalg::{self, c64, CMat};
use topo_core::model::{build_hamiltonian, Boundary, LatticeSpec, MODEL_NAMES};
use topo_core::spectral::{diagonalize, fermi_projection};

const QUANTIZATION: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).expect("acceptance config")
}

fn run(text: &str) -> Vec<ResultRecord> {
    run_experiment(&config(text), 1).expect("acceptance run").records
}

fn realizations(records: &[ResultRecord]) -> impl Iterator<Item = &ResultRecord> {
    records.iter().filter(|r| !r.is_aggregate())
}

fn ssh_winding() -> Outcome {
    let start = Instant::now();
    let cfg = config("task = \"winding\"\n[model]\nname = \"ssh\"\n[lattice]\nsizes = [256]\n");
    let rows = sweep(&cfg, "model.params.m", &[-2.0, -0.5, 0.0, 0.5, 2.0], 1).expect("sweep");
    let elapsed = start.elapsed();
    let raw: Vec<f64> = rows.iter().map(|(_, r)| r[0].raw[0]).collect();
    let expected = [0.0, 1.0, 1.0, 1.0, 0.0];
    let worst = raw.iter().zip(expected).map(|(x, e)| (x - e).abs()).fold(0.0, f64::max);
    Outcome::new(
        worst < 1e-6 && elapsed < Duration::from_secs(10),
        format!("windings {raw:?}, max deviation {worst:.1e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

const QWZ_OPEN: &str = r#"
task = "chern"
[model]
name = "qwz"
params = { mass = 1.0, disorder = DISORDER }
[lattice]
sizes = [24, 24]
boundary = ["open", "open"]
[ensemble]
realizations = COUNT
[options]
estimator = "ESTIMATOR"
"#;

fn qwz_open(disorder: f64, count: usize, estimator: &str) -> String {
    QWZ_OPEN
        .replace("DISORDER", &disorder.to_string())
        .replace("COUNT", &count.to_string())
        .replace("ESTIMATOR", estimator)
}

fn local_index() -> Outcome {
    let start = Instant::now();
    let pair = run(&qwz_open(0.0, 1, "pair"))[0].raw[0];
    let nc = run(&qwz_open(0.0, 1, "nc"))[0].raw[0];
    let records = run(&qwz_open(0.5, 10, "pair"));
    let disordered: Vec<i64> = realizations(&records).map(|r| r.rounded[0]).collect();
    let elapsed = start.elapsed();
    let pass = (pair - 1.0).abs() < QUANTIZATION
        && (nc - pair).abs() < QUANTIZATION
        && disordered.len() == 10
        && disordered.iter().all(|&k| k == 1)
        && elapsed < Duration::from_secs(300);
    Outcome::new(pass, format!("pair {pair:.6}, chern {nc:.6}, disordered {disordered:?}, {:.1} s", elapsed.as_secs_f64()))
}

const HARPER_CYLINDER: &str = r#"
task = "TASK"
[model]
name = "harper"
params = { disorder = DISORDER }
[lattice]
sizes = [CIRCUMFERENCE, DEPTH]
[ensemble]
realizations = COUNT
[options]
switch_margin = MARGIN
"#;

fn harper(task: &str, sizes: [usize; 2], disorder: f64, count: usize, margin: f64) -> String {
    HARPER_CYLINDER
        .replace("TASK", task)
        .replace("CIRCUMFERENCE", &sizes[0].to_string())
        .replace("DEPTH", &sizes[1].to_string())
        .replace("DISORDER", &disorder.to_string())
        .replace("COUNT", &count.to_string())
        .replace("MARGIN", &format!("{margin:?}"))
}

fn bbc() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (disorder, count) in [(0.0, 1), (0.3, 10)] {
        for r in realizations(&run(&harper("bbc", [24, 24], disorder, count, 0.2))) {
            worst = worst.max((r.raw[0] - r.raw[1]).abs());
            n += 1;
        }
    }
    Outcome::new(n == 11 && worst < QUANTIZATION, format!("max |bulk - boundary| {worst:.2e} over {n} samples"))
}

fn boundary_currents() -> Outcome {
    // B N_1 N_2 must be a multiple of 2 pi on the periodic companion, so the depth is 33.
    let records = run(&harper("boundary-current", [32, 33], 0.3, 10, 0.0));
    let lower: Vec<f64> = realizations(&records).map(|r| r.raw[0]).collect();
    let mean = lower.iter().sum::<f64>() / lower.len() as f64;
    let antisym = realizations(&records).map(|r| (r.raw[0] + r.raw[1]).abs()).fold(0.0, f64::max);
    Outcome::new(
        lower.len() == 10 && (mean.abs() - 1.0).abs() <= 0.02,
        format!("mean edge current {mean:.4}, max |lower + upper| {antisym:.1e}"),
    )
}

fn streda() -> Outcome {
    let b = TAU * 8.0 / 576.0;
    let text = format!(
        "task = \"streda\"\n[model]\nname = \"harper\"\nparams = {{ b = {b:?} }}\n[lattice]\nsizes = [24, 24]\n[options]\ndelta_b = {:?}\n",
        TAU / 576.0
    );
    let r = &run(&text)[0];
    let (lhs, rhs) = (r.raw[0], r.raw[1]);
    let rel = (lhs - rhs).abs() / rhs.abs();
    Outcome::new(rhs != 0.0 && rel < 0.05, format!("dIDS/dB {lhs:.5}, Ch/2pi {rhs:.5}, relative difference {rel:.2e}"))
}

fn laughlin() -> Outcome {
    let text = "task = \"laughlin\"\n[model]\nname = \"qwz\"\nparams = { mass = 1.0, disorder = 0.3 }\n[lattice]\nsizes = [20, 20]\nboundary = [\"open\", \"open\"]\n[ensemble]\nrealizations = 5\n";
    let records = run(text);
    let pairs: Vec<(f64, f64)> = realizations(&records).map(|r| (r.raw[0], r.raw[1].round())).collect();
    let pass = pairs.len() == 5 && pairs.iter().all(|&(sf, pair)| sf == pair && pair != 0.0);
    Outcome::new(pass, format!("(spectral flow, pair index) {pairs:?}"))
}

fn kitaev() -> Outcome {
    let mut seen = Vec::new();
    let mut pass = true;
    for (mu, w, expected) in [(0.0, 0.0, 1), (0.5, 0.3, 1), (2.0, 0.0, 0)] {
        let text = format!(
            "task = \"kitaev-halfflux\"\n[model]\nname = \"kitaev_chain\"\nparams = {{ mu = {mu:?}, w = {w:?} }}\n[lattice]\nsizes = [64]\n[ensemble]\nrealizations = 10\n"
        );
        let records = run(&text);
        let parities: Vec<i64> = realizations(&records).map(|r| r.raw[0] as i64).collect();
        let flows_agree = realizations(&records).all(|r| r.raw[0] == r.raw[1]);
        pass &= parities.len() == 10 && parities.iter().all(|&p| p == expected) && flows_agree;
        seen.push(format!("mu {mu}: {parities:?}"));
    }
    Outcome::new(pass, seen.join("; "))
}

fn z2_consistency() -> Outcome {
    let mut pass = true;
    let mut seen = Vec::new();
    for mass in [1.0, 3.0] {
        for (disorder, count) in [(0.0, 1), (0.2, 2)] {
            let body = format!(
                "[model]\nname = \"kane_mele_qsh\"\nparams = {{ mass = {mass:?}, disorder = {disorder:?} }}\n[lattice]\nsizes = [20, 20]\nboundary = [\"open\", \"open\"]\n[ensemble]\nrealizations = {count}\n"
            );
            let spin = run(&format!("task = \"spin-chern\"\n{body}"));
            let z2 = run(&format!("task = \"z2\"\n{body}"));
            for (s, z) in realizations(&spin).zip(realizations(&z2)) {
                let sch = s.raw[0].round() as i64;
                let parity = z.rounded[0];
                pass &= (s.raw[0] - s.raw[0].round()).abs() < QUANTIZATION && sch.rem_euclid(2) == parity;
                seen.push(format!("mass {mass} lambda {disorder}: SCh {:.3} parity {parity}", s.raw[0]));
            }
        }
    }
    Outcome::new(pass, seen.join("; "))
}

fn hermiticity(rng: &mut ChaCha8Rng) -> bool {
    MODEL_NAMES.iter().all(|&name| {
        let sizes: Vec<usize> = match name {
            "ssh" | "kitaev_chain" => vec![12],
            "chiral_3d" => vec![3, 3, 3],
            _ => vec![6, 6],
        };
        let kv: &[(&str, f64)] = match name {
            "kitaev_chain" => &[("w", 0.5)],
            _ => &[("disorder", 0.5)],
        };
        let h = build_hamiltonian(&model(name, kv, &sizes, Boundary::Periodic), rng.random()).unwrap();
        linalg::max_diff(&h.matrix, &h.matrix.adjoint().to_owned()) < 1e-12
    })
}

fn random_seeds(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failed.push(name.to_string());
        }
    };

    check("hermiticity", hermiticity(&mut rng));

    let l = LatticeSpec::periodic(&[10, 10], 1);
    let (a, b) = (local_matrix(&l, &random_seeds(&mut rng, 11)), local_matrix(&l, &random_seeds(&mut rng, 13)));
    let leibniz = (1..=2).all(|axis| {
        let lhs = nc_derivative(&(&a * &b), &l, axis);
        let rhs = &(&nc_derivative(&a, &l, axis) * &b) + &(&a * &nc_derivative(&b, &l, axis));
        linalg::max_diff(&lhs, &rhs) < 1e-9
    });
    check("Leibniz rule", leibniz);
    check("T(grad A) = 0", (1..=2).all(|axis| trace_per_volume(&nc_derivative(&a, &l, axis), &l, &Region::All).norm() < 1e-12));

    let pf_det = (0..8).all(|_| {
        let m = random_antisymmetric(8, &random_seeds(&mut rng, 28));
        let pf = pfaffian(&m).unwrap();
        let d = det(&m);
        (pf * pf - d).abs() <= 1e-8 * d.abs().max(1e-12)
    });
    check("Pf^2 = det", pf_det);

    let n = 8;
    let proj = |mass: f64| {
        let h = build_hamiltonian(&model("qwz", &[("mass", mass)], &[n, n], Boundary::Periodic), 0).unwrap();
        fermi_projection(&diagonalize(&h).unwrap(), 0.0).unwrap().projector
    };
    let (p1, p2) = (proj(1.0), proj(-1.0));
    let sites = n * n;
    let sum = CMat::from_fn(4 * sites, 4 * sites, |r, c| match (r % 4 < 2, c % 4 < 2) {
        (true, true) => p1[(2 * (r / 4) + r % 4, 2 * (c / 4) + c % 4)],
        (false, false) => p2[(2 * (r / 4) + r % 4 - 2, 2 * (c / 4) + c % 4 - 2)],
        _ => c64::new(0.0, 0.0),
    });
    let i12 = IndexSet::new(&[1, 2]).unwrap();
    let l2 = LatticeSpec::periodic(&[n, n], 2);
    let c1 = chern_value(&p1, &l2, &i12, &Region::All).unwrap();
    let c2 = chern_value(&p2, &l2, &i12, &Region::All).unwrap();
    let c = chern_value(&sum, &LatticeSpec::periodic(&[n, n], 4), &i12, &Region::All).unwrap();
    check("Ch additivity", (c - c1 - c2).norm() < 1e-10);

    let qsh = model("kane_mele_qsh", &[("rashba", 0.2), ("disorder", 0.3)], &[6, 6], Boundary::Periodic);
    let h = build_hamiltonian(&qsh, rng.random()).unwrap();
    let probe = kramers_halfflux_probe(&FluxPath::uniform(h, vec![2, 2], 2), &qsh.symmetry, (-10.0, 10.0), &Region::All).unwrap();
    check("Kramers even multiplicities", probe.all_even());

    let qwz = model("qwz", &[("mass", 1.0), ("disorder", 0.5)], &[8, 8], Boundary::Open);
    let path = FluxPath::uniform(build_hamiltonian(&qwz, rng.random()).unwrap(), vec![3, 4], 1);
    let e0 = sorted(eigenvalues(&path.sample(0.0).unwrap().matrix));
    let e1 = sorted(eigenvalues(&path.sample(1.0).unwrap().matrix));
    check("endpoint gauge equivalence", max_gap(&e0, &e1) < 1e-9);

    let cfg = config("task = \"kitaev-halfflux\"\n[model]\nname = \"kitaev_chain\"\nparams = { mu = 0.5, w = 0.3 }\n[lattice]\nsizes = [32]\n[ensemble]\nrealizations = 4\n");
    let bytes = |workers| {
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &run_experiment(&cfg, workers).unwrap().records).unwrap();
        buf
    };
    check("parallel/serial bit-equality", bytes(1) == bytes(2));

    let pass = failed.is_empty();
    Outcome::new(pass, if pass { "all property checks hold".into() } else { format!("failed: {}", failed.join(", ")) })
}

fn veg() -> Outcome {
    let text = "task = \"veg\"\n[model]\nname = \"qwz\"\nparams = { mass = 1.0 }\n[lattice]\nsizes = [16, 16]\n[options]\ncontour_points = 64\n";
    let r = &run(text)[0];
    let diff = (r.raw[0] - r.raw[1]).abs();
    Outcome::new(diff < 1e-2, format!("veg {:.6}, chern {:.6}, difference {diff:.1e}", r.raw[0], r.raw[1]))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("SSH winding sweep", ssh_winding),
        ("local index formula", local_index),
        ("bulk-boundary correspondence", bbc),
        ("quantized boundary current", boundary_currents),
        ("Streda formula", streda),
        ("Laughlin spectral flow", laughlin),
        ("Kitaev half flux", kitaev),
        ("Z2 consistency", z2_consistency),
        ("property suites", properties),
        ("VEG formula", veg),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (k, (name, criterion)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == (k + 1).to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = criterion();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {}: {name}: {} [{:.1} s]", k + 1, outcome.detail, start.elapsed().as_secs_f64());
        failures += usize::from(!outcome.pass);
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
