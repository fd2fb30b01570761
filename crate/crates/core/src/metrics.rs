//! Joint-movement metrics of a dyad: proximity (Prox), dynamic interaction
//! in displacement (DI_d) and in direction (DI_θ).

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyads::{AlignedPair, Dyad, FleetConfig};
use crate::ingest::{Id, TrackSet};
use crate::util::sig6;
use crate::{Error, Result};

/// Metric triple of one dyad, in model feature order (Prox, DI_θ, DI_d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub prox: f64,
    pub di_theta: f64,
    pub di_d: f64,
    /// Index of the dyad in its fleet's manifest.
    pub dyad: usize,
}

impl MetricVector {
    pub fn new(prox: f64, di_theta: f64, di_d: f64) -> Self {
        MetricVector {
            prox,
            di_theta,
            di_d,
            dyad: 0,
        }
    }

    pub fn features(&self) -> [f64; 3] {
        [self.prox, self.di_theta, self.di_d]
    }
}

/// Share of simultaneous fixes strictly closer than `delta_km`.
pub fn prox(pair: &AlignedPair, delta_km: f64) -> f64 {
    let n = pair.len();
    if n == 0 {
        return f64::NAN;
    }
    pair.distances().filter(|&d| d < delta_km).count() as f64 / n as f64
}

pub fn di_displacement(pair: &AlignedPair, beta: f64) -> f64 {
    let steps = pair.steps_a.len().min(pair.steps_b.len());
    if steps == 0 {
        return f64::NAN;
    }
    let sum: f64 = pair
        .steps_a
        .iter()
        .zip(pair.steps_b)
        .map(|(a, b)| {
            let (da, db) = (a.displacement_km, b.displacement_km);
            let total = da + db;
            if total == 0.0 {
                1.0
            } else {
                1.0 - ((da - db).abs() / total).powf(beta)
            }
        })
        .sum();
    sum / steps as f64
}

/// Mean cosine of heading differences. A step where both vessels are
/// stationary counts 1, one stationary counts 0.
pub fn di_direction(pair: &AlignedPair) -> f64 {
    let steps = pair.steps_a.len().min(pair.steps_b.len());
    if steps == 0 {
        return f64::NAN;
    }
    let sum: f64 = pair
        .steps_a
        .iter()
        .zip(pair.steps_b)
        .map(|(a, b)| match (a.heading_rad, b.heading_rad) {
            (Some(ha), Some(hb)) => (ha - hb).cos(),
            (None, None) => 1.0,
            _ => 0.0,
        })
        .sum();
    sum / steps as f64
}

pub fn metric_vector(pair: &AlignedPair, config: &FleetConfig) -> MetricVector {
    MetricVector::new(
        prox(pair, config.prox_delta_km),
        di_direction(pair),
        di_displacement(pair, config.beta),
    )
}

/// One vector per dyad, in manifest order.
pub fn metric_table(set: &TrackSet, dyads: &[Dyad], config: &FleetConfig) -> Result<Vec<MetricVector>> {
    dyads
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let pair = d.view(set).ok_or_else(|| {
                Error::data(format!(
                    "dyad {i} ({}/{} with {}/{}) does not refer to the loaded tracks",
                    d.vessel_a, d.trip_a, d.vessel_b, d.trip_b
                ))
            })?;
            Ok(MetricVector {
                dyad: i,
                ..metric_vector(&pair, config)
            })
        })
        .collect()
}

/// A metric-table row with its dyad identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub vessel_a: Id,
    pub trip_a: Id,
    pub vessel_b: Id,
    pub trip_b: Id,
    pub metrics: MetricVector,
}

const HEADER: [&str; 8] = ["dyad_id", "vessel_a", "trip_a", "vessel_b", "trip_b", "prox", "di_theta", "di_d"];

/// Metric values are written with six significant digits.
pub fn write_metrics<W: Write>(w: W, dyads: &[Dyad], metrics: &[MetricVector]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let wrap = |e: csv::Error| Error::data(format!("writing metric table: {e}"));
    out.write_record(HEADER).map_err(wrap)?;
    for m in metrics {
        let d = &dyads[m.dyad];
        out.write_record([
            m.dyad.to_string(),
            d.vessel_a.to_string(),
            d.trip_a.to_string(),
            d.vessel_b.to_string(),
            d.trip_b.to_string(),
            sig6(m.prox),
            sig6(m.di_theta),
            sig6(m.di_d),
        ])
        .map_err(wrap)?;
    }
    out.flush().map_err(|e| Error::data(format!("writing metric table: {e}")))?;
    Ok(())
}

pub fn read_metrics<R: Read>(r: R, source_name: &str) -> Result<Vec<MetricRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let fmt = |message: String| Error::Format {
        source_name: source_name.to_string(),
        message,
    };
    let headers = rdr.headers().map_err(|e| fmt(e.to_string()))?.clone();
    if headers.iter().ne(HEADER) {
        return Err(fmt(format!("expected header {}", HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let num = |col: usize| -> Result<f64> {
            rec[col]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| fmt(format!("line {}: bad {}", i + 2, HEADER[col])))
        };
        rows.push(MetricRow {
            vessel_a: Id::from(&rec[1]),
            trip_a: Id::from(&rec[2]),
            vessel_b: Id::from(&rec[3]),
            trip_b: Id::from(&rec[4]),
            metrics: MetricVector {
                prox: num(5)?,
                di_theta: num(6)?,
                di_d: num(7)?,
                dyad: rec[0].parse().map_err(|_| fmt(format!("line {}: bad dyad_id", i + 2)))?,
            },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyads::{FleetPreset, OwnedPair};
    use crate::geo::offset_km;
    use crate::ingest::{MotionStep, DEFAULT_STATIONARY_EPS_KM};
    use proptest::prelude::*;

    fn path(steps: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut p = vec![(0.0, 20.0)];
        for &(e, n) in steps {
            let &(lat, lon) = p.last().unwrap();
            p.push(offset_km(lat, lon, e, n));
        }
        p
    }

    fn owned(a: &[(f64, f64)], b: &[(f64, f64)]) -> OwnedPair {
        OwnedPair::from_coords(a, b, DEFAULT_STATIONARY_EPS_KM)
    }

    fn step(d: f64, h: Option<f64>) -> MotionStep {
        MotionStep {
            t_index: 0,
            displacement_km: d,
            heading_rad: h,
            stationary: h.is_none(),
        }
    }

    #[test]
    fn prox_cases() {
        let a = path(&[(5.0, 0.0); 9]);
        assert_eq!(prox(&owned(&a, &a).view(), 5.0), 1.0);
        let far: Vec<_> = a.iter().map(|&(lat, lon)| offset_km(lat, lon, 0.0, 10.0)).collect();
        assert_eq!(prox(&owned(&a, &far).view(), 5.0), 0.0);
        let mixed: Vec<_> = a
            .iter()
            .enumerate()
            .map(|(i, &(lat, lon))| offset_km(lat, lon, 0.0, if i < 4 { 1.0 } else { 8.0 }))
            .collect();
        assert_eq!(a.len(), 10);
        assert!((prox(&owned(&a, &mixed).view(), 5.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn di_d_formula() {
        let sa = [step(3.0, Some(0.0)), step(2.0, Some(0.0))];
        let sb = [step(1.0, Some(0.0)), step(2.0, Some(0.0))];
        let pair = AlignedPair {
            fixes_a: &[],
            fixes_b: &[],
            steps_a: &sa,
            steps_b: &sb,
        };
        assert!((di_displacement(&pair, 1.0) - 0.75).abs() < 1e-15);
        let moving = [step(10.0, Some(0.0)); 4];
        let still = [step(0.0, None); 4];
        let pair = AlignedPair {
            fixes_a: &[],
            fixes_b: &[],
            steps_a: &moving,
            steps_b: &still,
        };
        assert_eq!(di_displacement(&pair, 1.0), 0.0);
        assert_eq!(di_direction(&pair), 0.0);
        let pair = AlignedPair {
            steps_a: &still,
            ..pair
        };
        assert_eq!(di_displacement(&pair, 1.0), 1.0);
        assert_eq!(di_direction(&pair), 1.0);
    }

    #[test]
    fn di_theta_cases() {
        let east = path(&[(5.0, 0.0); 6]);
        let west = path(&[(-5.0, 0.0); 6]);
        let north = path(&[(0.0, 5.0); 6]);
        assert!((di_direction(&owned(&east, &east).view()) - 1.0).abs() < 1e-12);
        assert!((di_direction(&owned(&east, &west).view()) + 1.0).abs() < 1e-6);
        assert!(di_direction(&owned(&east, &north).view()).abs() < 1e-6);
    }

    #[test]
    fn minimal_dyad_is_defined() {
        let a = [(0.0, 0.0), (0.0, 0.05)];
        let b = [(0.01, 0.0), (0.01, 0.04)];
        let m = metric_vector(&owned(&a, &b).view(), &FleetPreset::PelagicPairTrawlers.config());
        assert!(m.features().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn coincident_synchronised_twin() {
        // same path, one vessel lagging a few hundred metres behind
        let a = path(&[(6.0, 1.0), (5.0, 1.5), (6.0, 0.5), (5.5, 1.0), (6.0, 1.0)]);
        let b: Vec<_> = a.iter().map(|&(lat, lon)| offset_km(lat, lon, -0.06, 0.0)).collect();
        let mut b = b;
        b[5] = a[5];
        let m = metric_vector(&owned(&a, &b).view(), &FleetPreset::PelagicPairTrawlers.config());
        assert_eq!(m.prox, 1.0);
        assert!(m.di_theta > 0.99);
        assert!(m.di_d > 0.97 && m.di_d < 1.0);
    }

    #[test]
    fn metrics_csv_round_trip() {
        let d = Dyad {
            vessel_a: "A".into(),
            trip_a: "1".into(),
            vessel_b: "B".into(),
            trip_b: "2".into(),
            start: 0,
            n_fixes: 3,
            step_seconds: 3600,
            min_distance_km: 1.0,
            source: None,
        };
        let m = MetricVector::new(1.0 / 3.0, -0.5, 0.98);
        let mut buf = Vec::new();
        write_metrics(&mut buf, &[d], &[m]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "dyad_id,vessel_a,trip_a,vessel_b,trip_b,prox,di_theta,di_d\n0,A,1,B,2,0.333333,-0.500000,0.980000\n"
        );
        let rows = read_metrics(&buf[..], "m").unwrap();
        assert_eq!(rows[0].metrics.di_theta, -0.5);
    }

    fn walk() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-8.0..8.0f64, -8.0..8.0f64), 1..20).prop_map(|s| path(&s))
    }

    fn walk_pair() -> impl Strategy<Value = (Vec<(f64, f64)>, Vec<(f64, f64)>)> {
        walk().prop_flat_map(|a| {
            let n = a.len();
            (Just(a), prop::collection::vec((-8.0..8.0f64, -8.0..8.0f64), n - 1).prop_map(|s| path(&s)))
        })
    }

    proptest! {
        #[test]
        fn ranges_and_symmetry((a, b) in walk_pair()) {
            let cfg = FleetPreset::PelagicPairTrawlers.config();
            let p = owned(&a, &b);
            let m = metric_vector(&p.view(), &cfg);
            prop_assert!((0.0..=1.0).contains(&m.prox));
            prop_assert!((0.0..=1.0).contains(&m.di_d));
            prop_assert!((-1.0..=1.0).contains(&m.di_theta));
            let s = metric_vector(&p.view().swapped(), &cfg);
            prop_assert_eq!(m.prox, s.prox);
            prop_assert!((m.di_d - s.di_d).abs() < 1e-15);
            prop_assert!((m.di_theta - s.di_theta).abs() < 1e-15);
        }

        #[test]
        fn prox_monotone_in_delta((a, b) in walk_pair(), d1 in 0.1..20.0f64, d2 in 0.1..20.0f64) {
            let p = owned(&a, &b);
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(prox(&p.view(), lo) <= prox(&p.view(), hi));
        }

        #[test]
        fn translation_invariance((a, b) in walk_pair(), dlon in -1.0..1.0f64) {
            let cfg = FleetPreset::PelagicPairTrawlers.config();
            let shift = |v: &[(f64, f64)]| -> Vec<(f64, f64)> { v.iter().map(|&(la, lo)| (la, lo + dlon)).collect() };
            let m = metric_vector(&owned(&a, &b).view(), &cfg);
            let t = metric_vector(&owned(&shift(&a), &shift(&b)).view(), &cfg);
            prop_assert!((m.prox - t.prox).abs() < 1e-6);
            prop_assert!((m.di_d - t.di_d).abs() < 1e-6);
            prop_assert!((m.di_theta - t.di_theta).abs() < 1e-6);
        }

        #[test]
        fn di_d_is_one_iff_identical(da in prop::collection::vec(0.01..10.0f64, 5), db in prop::collection::vec(0.01..10.0f64, 5), same in any::<bool>()) {
            let db = if same { da.clone() } else { db };
            let sa: Vec<_> = da.iter().map(|&d| step(d, Some(0.0))).collect();
            let sb: Vec<_> = db.iter().map(|&d| step(d, Some(0.0))).collect();
            let pair = AlignedPair { fixes_a: &[], fixes_b: &[], steps_a: &sa, steps_b: &sb };
            let oracle = da.iter().zip(&db).map(|(x, y)| 1.0 - (x - y).abs() / (x + y)).sum::<f64>() / 5.0;
            let v = di_displacement(&pair, 1.0);
            prop_assert!((v - oracle).abs() < 1e-15);
            prop_assert_eq!(v == 1.0, da == db);
        }
    }
}
