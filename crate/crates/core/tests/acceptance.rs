//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines are always printed.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seapartners::dyads::OwnedPair;
use seapartners::metrics::{di_direction, di_displacement, prox};
use seapartners::mixture::{component_overlap, em_fit, Component, EmConfig, GmmModel};
use seapartners::network::{loyalty, PartnerNetwork};
use seapartners::pipeline::{run_classify, run_fit, run_synth, PipelineConfig};
use seapartners::synth::{benchmark, ScenarioSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] {id}. {name}: {} ({:.2?}{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed,
        if in_time { String::new() } else { format!(", over the {budget:?} budget") }
    );
    pass
}

const EARTH_R: f64 = 6371.0;

fn gc_km(p: (f64, f64), q: (f64, f64)) -> f64 {
    // differences taken in degrees, where nearby values subtract exactly
    let (la1, la2) = (p.0.to_radians(), q.0.to_radians());
    let (dla, dlo) = ((q.0 - p.0).to_radians(), (q.1 - p.1).to_radians());
    let s = (dla / 2.0).sin().powi(2) + la1.cos() * la2.cos() * (dlo / 2.0).sin().powi(2);
    2.0 * EARTH_R * s.sqrt().min(1.0).asin()
}

fn bearing_from_east(p: (f64, f64), q: (f64, f64)) -> f64 {
    let (la1, la2, dl) = (p.0.to_radians(), q.0.to_radians(), (q.1 - p.1).to_radians());
    let y = la1.cos() * la2.sin() - la1.sin() * la2.cos() * dl.cos();
    let x = dl.sin() * la2.cos();
    y.atan2(x)
}

/// Direct transcription of the three metric definitions over raw points.
fn brute_force(a: &[(f64, f64)], b: &[(f64, f64)], delta: f64, eps: f64) -> [f64; 3] {
    let n = a.len();
    let mut close = 0usize;
    for t in 0..n {
        if gc_km(a[t], b[t]) < delta {
            close += 1;
        }
    }
    let (mut sum_theta, mut sum_d) = (0.0, 0.0);
    for t in 1..n {
        let da = gc_km(a[t - 1], a[t]);
        let db = gc_km(b[t - 1], b[t]);
        sum_d += if da + db == 0.0 { 1.0 } else { 1.0 - (da - db).abs() / (da + db) };
        sum_theta += match (da < eps, db < eps) {
            (true, true) => 1.0,
            (false, false) => (bearing_from_east(a[t - 1], a[t]) - bearing_from_east(b[t - 1], b[t])).cos(),
            _ => 0.0,
        };
    }
    [close as f64 / n as f64, sum_theta / (n - 1) as f64, sum_d / (n - 1) as f64]
}

fn rel_err(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}

fn metric_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t = rng.random_range(2..=20usize);
        let lat0 = rng.random_range(-60.0..60.0);
        let lon0 = rng.random_range(-179.0..179.0);
        let walk = |rng: &mut ChaCha8Rng, start: (f64, f64)| {
            let mut p = start;
            let mut pts = vec![p];
            for _ in 1..t {
                if rng.random_bool(0.1) {
                    pts.push(p);
                    continue;
                }
                p = (p.0 + rng.random_range(-0.05..0.05), p.1 + rng.random_range(-0.05..0.05));
                pts.push(p);
            }
            pts
        };
        let a = walk(&mut rng, (lat0, lon0));
        let start_b = (lat0 + rng.random_range(-0.05..0.05), lon0 + rng.random_range(-0.05..0.05));
        let b = walk(&mut rng, start_b);
        let delta = rng.random_range(1.0..10.0);
        let pair = OwnedPair::from_coords(&a, &b, 0.001);
        let v = pair.view();
        let got = [prox(&v, delta), di_direction(&v), di_displacement(&v, 1.0)];
        let want = brute_force(&a, &b, delta, 0.001);
        for k in 0..3 {
            worst = worst.max(rel_err(got[k], want[k]));
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("worst relative error {worst:.2e} over 1000 dyads"),
    }
}

fn exemplars() -> Outcome {
    let model = GmmModel::bundled();
    let cases = [([1.0, 1.0, 0.98], 1), ([0.57, 0.0, 0.69], 2), ([0.06, -0.07, 0.24], 3)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (x, want) in cases {
        match model.posterior(&x) {
            Ok(a) => {
                pass &= a.cluster() == want && a.max_posterior > 0.5;
                parts.push(format!("{:?} -> {} ({:.3})", x, a.cluster(), a.max_posterior));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{x:?} -> {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

const BUNDLED_WEIGHTS: [f64; 3] = [0.08, 0.33, 0.59];
const BUNDLED_MEANS: [[f64; 3]; 3] = [[0.94, 0.93, 0.92], [0.20, 0.23, 0.70], [0.09, 0.18, 0.63]];

fn recovery(worst_decrease: &mut f64) -> Outcome {
    let model = GmmModel::bundled();
    let mut recovered = 0;
    let mut notes = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x: Vec<[f64; 3]> = model.sample(6457, &mut rng).into_iter().map(|(x, _)| x).collect();
        let config = EmConfig {
            g: 3,
            restarts: 30,
            seed,
            ..Default::default()
        };
        let fit = match em_fit(&x, &config) {
            Ok(f) => f,
            Err(e) => {
                notes.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        for t in &fit.traces {
            *worst_decrease = worst_decrease.max(t.max_rel_decrease);
        }
        let mut dw: f64 = 0.0;
        let mut dm: f64 = 0.0;
        for (g, c) in fit.model.components.iter().enumerate() {
            dw = dw.max((c.weight - BUNDLED_WEIGHTS[g]).abs());
            for k in 0..3 {
                dm = dm.max((c.mean[k] - BUNDLED_MEANS[g][k]).abs());
            }
        }
        if dw <= 0.03 && dm <= 0.05 {
            recovered += 1;
        } else {
            notes.push(format!("seed {seed}: |dpi| {dw:.3}, |dmu| {dm:.3}"));
        }
    }
    Outcome {
        pass: recovered >= 9,
        detail: format!(
            "{recovered}/10 seeds recovered{}",
            if notes.is_empty() { String::new() } else { format!(" [{}]", notes.join("; ")) }
        ),
    }
}

fn overlap_estimator() -> Outcome {
    use nalgebra::{Matrix3, Vector3};
    let a = Component::new(0.5, Vector3::zeros(), Matrix3::identity()).unwrap();
    let b = Component::new(0.5, Vector3::new(2.0, 0.0, 0.0), Matrix3::identity()).unwrap();
    let analytic = 0.3173;
    let shifted = component_overlap(&a, &b, 1_000_000, 5);
    let same = component_overlap(&a, &a, 1_000_000, 5);
    let z_shift = (shifted.value - analytic).abs() / shifted.std_error;
    let same_ok = (same.value - 1.0).abs() <= 3.0 * same.std_error;
    Outcome {
        pass: z_shift <= 3.0 && same_ok,
        detail: format!(
            "2 sd apart {:.5} (SE {:.1e}, {z_shift:.2} SE from {analytic}); identical {} (SE {:.1e})",
            shifted.value, shifted.std_error, same.value, same.std_error
        ),
    }
}

const PLANT: &str = r#"
seed = 2024
vessels = 240
step_seconds = 3600
start = "2016-06-01T00:00:00Z"

[region]
lat_min = 42.0
lat_max = 46.0
lon_min = -8.0
lon_max = -2.0

[schedule]
trips_per_vessel = 1
trip_hours = [48, 96]
port_hours = [12, 24]
start_spread_hours = 48

[kernel]
median_step_km = 7.0

[pair_groups]
full_trip = 100
noise_km = 1.0

[fleet]
preset = "pelagic-pair-trawlers"
prox_delta_km = 5.0
"#;

fn plant_recovery() -> Outcome {
    let spec = ScenarioSpec::from_toml(PLANT).expect("plant spec");
    match benchmark(&spec, &GmmModel::bundled()) {
        Ok(r) => {
            let recall = r.recall.unwrap_or(0.0);
            let precision = r.precision.unwrap_or(0.0);
            Outcome {
                pass: recall >= 0.95 && precision >= 0.95,
                detail: format!(
                    "recall {recall:.3}, precision {precision:.3} ({} of {} planted, {} dyads)",
                    r.true_positives, r.planted_full_trip, r.dyads
                ),
            }
        }
        Err(e) => Outcome {
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn loyalty_fixtures() -> Outcome {
    let mut names: Vec<String> = (0..56).map(|i| format!("v{i:02}")).collect();
    names.sort();
    let mut edges: Vec<(&str, &str, u32)> = (0..23).map(|k| (names[2 * k].as_str(), names[2 * k + 1].as_str(), 1 + k as u32 % 3)).collect();
    // ten vessels with two partners each
    for k in 0..10 {
        edges.push((names[46 + k].as_str(), names[46 + (k + 1) % 10].as_str(), 1));
    }
    let big = loyalty(&PartnerNetwork::from_edges(edges));
    let mid = loyalty(&PartnerNetwork::from_edges([("m1", "m2", 2), ("m3", "m4", 1)]));
    let big_ok = big.nodes == 56 && big.exclusive_vessels.len() == 46 && big.loyalty_index == Some(46.0 / 56.0);
    let big_rounded = big.loyalty_index.map(|l| (l * 100.0).round() / 100.0);
    let mid_ok = mid.nodes == 4 && mid.loyalty_index == Some(1.0);
    Outcome {
        pass: big_ok && big_rounded == Some(0.82) && mid_ok,
        detail: format!(
            "{}/{} exclusive -> {:?}; mid-water {} vessels -> {:?}",
            big.exclusive_vessels.len(), big.nodes, big_rounded, mid.nodes, mid.loyalty_index
        ),
    }
}

const PAIRS: &str = r#"
seed = 8
vessels = 40
step_seconds = 3600
start = "2016-06-01T00:00:00Z"
record_jitter_seconds = 300

[region]
lat_min = 43.0
lat_max = 45.0
lon_min = -6.0
lon_max = -3.0

[schedule]
trips_per_vessel = 4
trip_hours = [30, 72]
port_hours = [12, 36]
start_spread_hours = 48

[kernel]
median_step_km = 6.0

[pair_groups]
full_trip = 8
partial = 6
noise_km = 0.5
"#;

fn fit_config(dir: &Path, out: &str) -> PipelineConfig {
    let text = format!(
        "mode = \"fit\"\nseed = 11\noutput_dir = \"{out}\"\noverlap_samples = 100000\n\
         [[fleet]]\nname = \"pairs\"\npreset = \"pelagic-pair-trawlers\"\ninput = \"data/records\"\n"
    );
    PipelineConfig::from_toml(&text, dir).expect("fit config")
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec = ScenarioSpec::from_toml(PAIRS).expect("pair spec");
    if let Err(e) = run_synth(&spec, &dir.path().join("data")) {
        return Outcome {
            pass: false,
            detail: e.to_string(),
        };
    }
    for out in ["run1", "run2"] {
        if let Err(e) = run_fit(&fit_config(dir.path(), out)) {
            return Outcome {
                pass: false,
                detail: e.to_string(),
            };
        }
    }
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap_or_default();
    let model_same = read("run1/model.json") == read("run2/model.json") && !read("run1/model.json").is_empty();
    let assign_same = read("run1/pairs/assignments.csv") == read("run2/pairs/assignments.csv");
    Outcome {
        pass: model_same && assign_same,
        detail: format!(
            "model.json {}, assignments.csv {} ({} rows)",
            if model_same { "identical" } else { "differs" },
            if assign_same { "identical" } else { "differs" },
            read("run1/pairs/assignments.csv").iter().filter(|&&b| b == b'\n').count().saturating_sub(1)
        ),
    }
}

const ANCHOVY: &str = r#"
seed = 757
vessels = 757
step_seconds = 600
start = "2016-04-01T00:00:00Z"
record_jitter_seconds = 60

[region]
lat_min = -12.8
lat_max = -12.0
lon_min = -77.6
lon_max = -76.5

[schedule]
trips_per_vessel = 28
trip_hours = [16, 26]
port_hours = [6, 18]
start_spread_hours = 24

[kernel]
median_step_km = 1.5

[pair_groups]
full_trip = 20
partial = 20
noise_km = 0.3
"#;

fn scale() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let spec = ScenarioSpec::from_toml(ANCHOVY).expect("anchovy spec");
    let fail = |e: seapartners::Error| Outcome {
        pass: false,
        detail: e.to_string(),
    };
    if let Err(e) = run_synth(&spec, &dir.path().join("data")) {
        return fail(e);
    }
    let text = "mode = \"classify\"\nmodel = \"bundled\"\n\
                [[fleet]]\nname = \"anchovy\"\npreset = \"anchovy-purse-seiners\"\ninput = \"data/records\"\n";
    let config = PipelineConfig::from_toml(text, dir.path()).expect("classify config");
    match run_classify(&config) {
        Ok(summary) => {
            let r = &summary.reports[0];
            Outcome {
                pass: r.vessels == 757 && (2e5..2e6).contains(&(r.dyads as f64)),
                detail: format!(
                    "{} vessels, {} dyads, median {:.1} h",
                    r.vessels,
                    r.dyads,
                    r.median_duration_hours.unwrap_or(f64::NAN)
                ),
            }
        }
        Err(e) => fail(e),
    }
}

fn main() {
    let mut all = true;
    let mut worst_decrease = 0.0;
    all &= check(1, "metric oracle equivalence", Duration::from_secs(10), metric_oracle);
    all &= check(2, "bundled-model exemplars", Duration::from_secs(1), exemplars);
    all &= check(3, "parameter recovery", Duration::from_secs(300), || recovery(&mut worst_decrease));
    all &= check(4, "EM monotonicity", Duration::from_secs(1), || Outcome {
        pass: worst_decrease <= 1e-9,
        detail: format!("largest relative log-likelihood decrease {worst_decrease:.2e}"),
    });
    all &= check(5, "overlap estimator", Duration::from_secs(30), overlap_estimator);
    all &= check(6, "plant recovery", Duration::from_secs(120), plant_recovery);
    all &= check(7, "loyalty arithmetic", Duration::from_secs(1), loyalty_fixtures);
    all &= check(8, "pipeline determinism", Duration::from_secs(300), determinism);
    all &= check(9, "anchovy-scale classify", Duration::from_secs(1800), scale);
    if !all {
        std::process::exit(1);
    }
}
