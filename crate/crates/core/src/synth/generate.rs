use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;

use super::spec::{PairMode, PairPlan, Region, ScenarioSpec};
use crate::geo::{destination, offset_km};
use crate::ingest::{Id, RawRecord};
use crate::util::format_timestamp;
use crate::{Error, Result};

/// Records over which a partial partner blends in or out of the shared walk.
const BLEND_RECORDS: f64 = 3.0;

/// Planted mode of one trip pair; `vessel_a < vessel_b`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TruthRow {
    pub vessel_a: String,
    pub trip_a: String,
    pub vessel_b: String,
    pub trip_b: String,
    pub mode: PairMode,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    /// Raw records ordered by vessel, then time.
    pub records: Vec<RawRecord>,
    pub truth: Vec<TruthRow>,
    pub vessels: usize,
    pub trips: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub vessels: usize,
    pub trips: usize,
    pub records: usize,
    pub planted: BTreeMap<PairMode, usize>,
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vessels, {} trips, {} records", self.vessels, self.trips, self.records)?;
        for (mode, n) in &self.planted {
            write!(f, ", {n} {} trip pairs", mode.name())?;
        }
        Ok(())
    }
}

impl Scenario {
    pub fn summary(&self) -> DatasetSummary {
        let mut planted = BTreeMap::new();
        for t in &self.truth {
            *planted.entry(t.mode).or_insert(0) += 1;
        }
        DatasetSummary {
            vessels: self.vessels,
            trips: self.trips,
            records: self.records.len(),
            planted,
        }
    }
}

#[derive(Clone)]
struct Trip {
    times: Vec<i64>,
    /// `(lat, lon)` per record.
    points: Vec<(f64, f64)>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform<R: Rng>(rng: &mut R, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        rng.random_range(range[0]..range[1])
    } else {
        range[0]
    }
}

fn schedule(spec: &ScenarioSpec, season_start: i64, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let s = &spec.schedule;
    let mut t = season_start as f64 + rng.random::<f64>() * s.start_spread_hours * 3600.0;
    let j = spec.record_jitter_seconds;
    (0..s.trips_per_vessel)
        .map(|_| {
            let start = t.round() as i64;
            let dur = (uniform(rng, s.trip_hours) * 3600.0).round() as i64;
            let n = (dur / spec.step_seconds) as usize + 1;
            let times = (0..n)
                .map(|k| {
                    let base = start + k as i64 * spec.step_seconds;
                    if j > 0 && k > 0 && k + 1 < n {
                        base + rng.random_range(-j..=j)
                    } else {
                        base
                    }
                })
                .collect();
            t = (start + dur) as f64 + uniform(rng, s.port_hours) * 3600.0;
            times
        })
        .collect()
}

fn reflect(mut lat: f64, mut lon: f64, mut heading: f64, r: &Region) -> (f64, f64, f64) {
    if lat > r.lat_max {
        lat = 2.0 * r.lat_max - lat;
        heading = -heading;
    } else if lat < r.lat_min {
        lat = 2.0 * r.lat_min - lat;
        heading = -heading;
    }
    if lon > r.lon_max {
        lon = 2.0 * r.lon_max - lon;
        heading = PI - heading;
    } else if lon < r.lon_min {
        lon = 2.0 * r.lon_min - lon;
        heading = PI - heading;
    }
    (lat.clamp(r.lat_min, r.lat_max), lon.clamp(r.lon_min, r.lon_max), heading)
}

/// Wrapped-Cauchy turning angle by inversion.
fn turn<R: Rng>(rng: &mut R, rho: f64) -> f64 {
    let u: f64 = rng.random();
    2.0 * (((1.0 - rho) / (1.0 + rho)) * (PI * (u - 0.5)).tan()).atan()
}

fn walk(spec: &ScenarioSpec, times: &[i64], rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let r = &spec.region;
    let k = &spec.kernel;
    let steps = LogNormal::new(k.median_step_km.ln(), k.step_log_sd).expect("validated kernel");
    let mut lat = rng.random_range(r.lat_min..r.lat_max);
    let mut lon = rng.random_range(r.lon_min..r.lon_max);
    let mut heading = rng.random_range(-PI..PI);
    let mut out = Vec::with_capacity(times.len());
    out.push((lat, lon));
    for w in times.windows(2) {
        let scale = (w[1] - w[0]) as f64 / spec.step_seconds as f64;
        heading += turn(rng, k.turning_rho);
        let d = steps.sample(rng) * scale;
        let (la, lo) = destination(lat, lon, heading, d);
        (lat, lon, heading) = reflect(la, lo, heading, r);
        out.push((lat, lon));
    }
    out
}

fn jitter(points: &[(f64, f64)], sigma_km: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    if sigma_km == 0.0 {
        return points.to_vec();
    }
    let n = Normal::new(0.0, sigma_km).expect("validated noise");
    points
        .iter()
        .map(|&(lat, lon)| offset_km(lat, lon, n.sample(rng), n.sample(rng)))
        .collect()
}

fn blend(own: &[(f64, f64)], shared: &[(f64, f64)], window: [f64; 2]) -> Vec<(f64, f64)> {
    let n = own.len() as f64;
    let (w0, w1) = (window[0] * (n - 1.0), window[1] * (n - 1.0));
    own.iter()
        .zip(shared)
        .enumerate()
        .map(|(k, (&o, &s))| {
            let k = k as f64;
            let alpha = if k < w0 {
                1.0 - ((w0 - k) / BLEND_RECORDS).min(1.0)
            } else if k > w1 {
                1.0 - ((k - w1) / BLEND_RECORDS).min(1.0)
            } else {
                1.0
            };
            (o.0 + alpha * (s.0 - o.0), o.1 + alpha * (s.1 - o.1))
        })
        .collect()
}

pub fn trip_id(k: usize) -> String {
    format!("T{:02}", k + 1)
}

/// Generates tracks and planted ground truth; deterministic in `spec.seed`.
pub fn generate(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let season_start = spec.start_epoch()?;
    let n = spec.vessels;
    let plan = spec.plan();

    let schedules: Vec<Vec<Vec<i64>>> = (0..n)
        .into_par_iter()
        .map(|i| schedule(spec, season_start, &mut rng_for(spec.seed, 2 * i as u64)))
        .collect();
    let shared_schedule = |i: usize| match plan.get(&i) {
        Some((a, p)) if p.mode != PairMode::Independent => *a,
        _ => i,
    };
    let own: Vec<Vec<Trip>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(spec.seed, 2 * i as u64 + 1);
            schedules[shared_schedule(i)]
                .iter()
                .map(|times| Trip {
                    points: walk(spec, times, &mut rng),
                    times: times.clone(),
                })
                .collect()
        })
        .collect();
    let tracks: Vec<Vec<Trip>> = (0..n)
        .into_par_iter()
        .map(|i| match plan.get(&i) {
            Some((a, p)) if p.mode != PairMode::Independent => follow(spec, &own[*a], &own[i], p, i),
            _ => own[i].clone(),
        })
        .collect();

    let mut records = Vec::new();
    let mut trips = 0;
    for (i, vessel_trips) in tracks.iter().enumerate() {
        let vessel: Id = Id::from(ScenarioSpec::vessel_id(i));
        for (k, trip) in vessel_trips.iter().enumerate() {
            trips += 1;
            let tid: Id = Id::from(trip_id(k));
            for (&t, &(lat, lon)) in trip.times.iter().zip(&trip.points) {
                records.push(RawRecord {
                    vessel_id: vessel.clone(),
                    timestamp: t,
                    lat,
                    lon,
                    trip_id: Some(tid.clone()),
                });
            }
        }
    }

    let mut truth = Vec::new();
    for (&b, (a, p)) in &plan {
        let (va, vb) = (ScenarioSpec::vessel_id(*a), ScenarioSpec::vessel_id(b));
        let ((va, ta), (vb, tb)) = if va < vb { ((va, a), (vb, &b)) } else { ((vb, &b), (va, a)) };
        let trips_a = tracks[*ta].len();
        let trips_b = tracks[*tb].len();
        for ka in 0..trips_a {
            for kb in 0..trips_b {
                if p.mode != PairMode::Independent && ka != kb {
                    continue;
                }
                truth.push(TruthRow {
                    vessel_a: va.clone(),
                    trip_a: trip_id(ka),
                    vessel_b: vb.clone(),
                    trip_b: trip_id(kb),
                    mode: p.mode,
                });
            }
        }
    }
    truth.sort();
    Ok(Scenario {
        records,
        truth,
        vessels: n,
        trips,
    })
}

fn follow(spec: &ScenarioSpec, leader: &[Trip], own: &[Trip], plan: &PairPlan, i: usize) -> Vec<Trip> {
    let mut rng = rng_for(spec.seed, (1u64 << 40) + i as u64);
    leader
        .iter()
        .zip(own)
        .map(|(l, o)| {
            let shared = jitter(&l.points, plan.noise_km, &mut rng);
            let points = match plan.mode {
                PairMode::FullTrip => shared,
                PairMode::Partial => blend(&o.points, &shared, plan.window),
                PairMode::Independent => o.points.clone(),
            };
            Trip {
                times: l.times.clone(),
                points,
            }
        })
        .collect()
}

/// Writes `records/<vessel>.csv` and `ground_truth.csv` under `dir`.
pub fn write_dataset(dir: &Path, scenario: &Scenario) -> Result<DatasetSummary> {
    let records_dir = dir.join("records");
    fs::create_dir_all(&records_dir).map_err(|e| Error::io(&records_dir, e))?;
    let mut start = 0;
    while start < scenario.records.len() {
        let vessel = &scenario.records[start].vessel_id;
        let end = scenario.records[start..]
            .iter()
            .position(|r| &r.vessel_id != vessel)
            .map_or(scenario.records.len(), |p| start + p);
        let path = records_dir.join(format!("{vessel}.csv"));
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(&path, e);
        writeln!(w, "vessel_id,timestamp,lat,lon,trip_id").map_err(io)?;
        for r in &scenario.records[start..end] {
            writeln!(
                w,
                "{},{},{:.6},{:.6},{}",
                r.vessel_id,
                format_timestamp(r.timestamp),
                r.lat,
                r.lon,
                r.trip_id.as_deref().unwrap_or("")
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
        start = end;
    }
    let path = dir.join("ground_truth.csv");
    let mut text = String::from("vessel_a,trip_a,vessel_b,trip_b,mode\n");
    for t in &scenario.truth {
        text.push_str(&format!("{},{},{},{},{}\n", t.vessel_a, t.trip_a, t.vessel_b, t.trip_b, t.mode.name()));
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(scenario.summary())
}

/// Reads a ground-truth sidecar written by [`write_dataset`].
pub fn read_truth(path: &Path) -> Result<Vec<TruthRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let mode = (f.len() == 5).then(|| PairMode::parse(f[4])).flatten().ok_or_else(|| Error::Format {
            source_name: path.display().to_string(),
            message: format!("line {}: expected vessel_a,trip_a,vessel_b,trip_b,mode", i + 1),
        })?;
        out.push(TruthRow {
            vessel_a: f[0].into(),
            trip_a: f[1].into(),
            vessel_b: f[2].into(),
            trip_b: f[3].into(),
            mode,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyads::{OwnedPair, FleetPreset};
    use crate::geo::haversine_km;
    use crate::ingest::DEFAULT_STATIONARY_EPS_KM;
    use crate::metrics::metric_vector;

    fn spec(extra: &str) -> ScenarioSpec {
        ScenarioSpec::from_toml(&format!(
            r#"
seed = 3
vessels = 4
step_seconds = 3600
start = "2016-06-01T00:00:00Z"
{extra}
[region]
lat_min = 45.0
lat_max = 47.0
lon_min = -6.0
lon_max = -3.0

[schedule]
trips_per_vessel = 2
trip_hours = [20, 30]
port_hours = [10, 20]

[kernel]
median_step_km = 8.0
"#
        ))
        .unwrap()
    }

    fn trip_points(s: &Scenario, vessel: &str, trip: &str) -> Vec<(f64, f64)> {
        s.records
            .iter()
            .filter(|r| &*r.vessel_id == vessel && r.trip_id.as_deref() == Some(trip))
            .map(|r| (r.lat, r.lon))
            .collect()
    }

    #[test]
    fn deterministic_and_seeded() {
        let s = spec("");
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(a.records, b.records);
        let other = generate(&ScenarioSpec { seed: 4, ..s }).unwrap();
        assert_ne!(a.records, other.records);
        assert_eq!(a.trips, 8);
        assert!(a.truth.is_empty());
    }

    #[test]
    fn stays_in_region() {
        let s = spec("");
        let g = generate(&s).unwrap();
        let r = &s.region;
        assert!(g.records.iter().all(|x| x.lat >= r.lat_min && x.lat <= r.lat_max && x.lon >= r.lon_min && x.lon <= r.lon_max));
    }

    #[test]
    fn noiseless_partners_coincide() {
        let s = spec("[[pairs]]\na = \"V0001\"\nb = \"V0002\"\nmode = \"full-trip\"\n");
        let g = generate(&s).unwrap();
        assert_eq!(g.truth.len(), 2);
        let a = trip_points(&g, "V0001", "T01");
        let b = trip_points(&g, "V0002", "T01");
        assert_eq!(a, b);
        let m = metric_vector(&OwnedPair::from_coords(&a, &b, DEFAULT_STATIONARY_EPS_KM).view(), &FleetPreset::PelagicPairTrawlers.config());
        assert_eq!((m.prox, m.di_theta, m.di_d), (1.0, 1.0, 1.0));
    }

    #[test]
    fn partial_partners_share_a_window() {
        let s = spec("[[pairs]]\na = \"V0003\"\nb = \"V0004\"\nmode = \"partial\"\nwindow = [0.4, 0.6]\n");
        let g = generate(&s).unwrap();
        let a = trip_points(&g, "V0003", "T02");
        let b = trip_points(&g, "V0004", "T02");
        assert_eq!(a.len(), b.len());
        let mid = a.len() / 2;
        assert!(haversine_km(a[mid].0, a[mid].1, b[mid].0, b[mid].1) < 1e-9);
        let d0 = haversine_km(a[0].0, a[0].1, b[0].0, b[0].1);
        assert!(d0 > 0.0);
        assert_eq!(g.truth[0].mode, PairMode::Partial);
    }

    #[test]
    fn dataset_files() {
        let s = spec("[[pairs]]\na = \"V0001\"\nb = \"V0002\"\nmode = \"full-trip\"\nnoise_km = 1.0\n");
        let g = generate(&s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let summary = write_dataset(dir.path(), &g).unwrap();
        assert_eq!(summary.planted[&PairMode::FullTrip], 2);
        assert_eq!(fs::read_dir(dir.path().join("records")).unwrap().count(), 4);
        let truth = read_truth(&dir.path().join("ground_truth.csv")).unwrap();
        assert_eq!(truth, g.truth);
        let text = fs::read_to_string(dir.path().join("records/V0001.csv")).unwrap();
        assert!(text.starts_with("vessel_id,timestamp,lat,lon,trip_id\nV0001,2016-06-01T"));
    }

    #[test]
    fn jitter_lowers_prox() {
        let cfg = FleetPreset::PelagicPairTrawlers.config();
        let mut rows = Vec::new();
        for sigma in [0.5, 2.0, 4.0] {
            let mut total = 0.0;
            for seed in 0..30 {
                let mut s = spec(&format!("[[pairs]]\na = \"V0001\"\nb = \"V0002\"\nmode = \"full-trip\"\nnoise_km = {sigma}\n"));
                s.seed = seed;
                let g = generate(&s).unwrap();
                let a = trip_points(&g, "V0001", "T01");
                let b = trip_points(&g, "V0002", "T01");
                total += metric_vector(&OwnedPair::from_coords(&a, &b, DEFAULT_STATIONARY_EPS_KM).view(), &cfg).prox;
            }
            rows.push(total / 30.0);
        }
        assert!(rows[0] >= rows[1] && rows[1] >= rows[2], "{rows:?}");
    }
}
