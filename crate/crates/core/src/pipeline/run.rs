use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{FleetBlock, Mode, PipelineConfig, BUNDLED_MODEL};
use super::fleet::{prepare_fleet, read_records, FleetData, FleetSettings};
use crate::dyads::{dyad_summary, read_manifest, write_manifest, Dyad};
use crate::ingest::write_tracks;
use crate::metrics::{read_metrics, write_metrics, MetricVector};
use crate::mixture::{assign_all, em_fit, overlap_table, summarise, Assignment, EmConfig, GmmModel};
use crate::network::{build_network, fleet_report, layout, loyalty, write_edge_list, write_graphml, write_histograms, FleetReport};
use crate::synth::{self, BenchmarkReport, DatasetSummary, ScenarioSpec};
use crate::util::sig6;
use crate::{Error, Result, Stage};

pub const INCOMPLETE: &str = "INCOMPLETE";

/// What a run produced, for the caller's console summary.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub reports: Vec<FleetReport>,
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<fs::File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs `body`, leaving an `INCOMPLETE` marker in `dir` if it fails.
fn guarded<T>(dir: &Path, body: impl FnOnce() -> Result<T>) -> Result<T> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let marker = dir.join(INCOMPLETE);
    write_file(&marker, "run in progress\n")?;
    match body() {
        Ok(v) => {
            fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
            Ok(v)
        }
        Err(e) => {
            let _ = fs::write(&marker, format!("{e}\n"));
            Err(e)
        }
    }
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))
}

pub fn load_model(path: &Path) -> Result<GmmModel> {
    if path.as_os_str() == BUNDLED_MODEL {
        return Ok(GmmModel::bundled());
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    GmmModel::from_json(&text)
}

/// Metrics as stored on disk, so downstream stages see the same values
/// whether they run in-process or from the metric table.
fn rounded(metrics: &[MetricVector]) -> Vec<MetricVector> {
    let r = |v: f64| sig6(v).parse::<f64>().expect("formatted number");
    metrics
        .iter()
        .map(|m| MetricVector {
            prox: r(m.prox),
            di_theta: r(m.di_theta),
            di_d: r(m.di_d),
            dyad: m.dyad,
        })
        .collect()
}

fn load_fleet(block: &FleetBlock) -> Result<FleetData> {
    let settings = FleetSettings::from_block(block).map_err(|e| e.at(Stage::Config))?;
    let input = block.input.as_ref().expect("validated");
    let reader = read_records(input, &block.format).map_err(|e| e.at(Stage::Ingest))?;
    let mut data = prepare_fleet(reader, &settings)?;
    data.metrics = rounded(&data.metrics);
    log::info!(
        "fleet {}: {} of {} trips regular, {} dyads",
        block.name,
        data.qc.trips_regular,
        data.qc.trips_total,
        data.dyads.len()
    );
    Ok(data)
}

fn write_upstream(dir: &Path, data: &FleetData) -> Result<()> {
    let qc = toml::to_string(&data.qc).expect("qc serialises");
    write_file(&dir.join("qc.toml"), qc)?;
    let path = dir.join("tracks.csv");
    let mut w = create(&path)?;
    write_tracks(&mut w, &data.tracks.tracks, &data.tracks.steps).map_err(|e| Error::io(&path, e))?;
    finish(&path, w)?;
    let path = dir.join("dyads.csv");
    let mut w = create(&path)?;
    write_manifest(&mut w, &data.dyads)?;
    finish(&path, w)?;
    let path = dir.join("metrics.csv");
    let mut w = create(&path)?;
    write_metrics(&mut w, &data.dyads, &data.metrics)?;
    finish(&path, w)
}

pub fn write_assignments<W: Write>(mut w: W, dyads: &[Dyad], assignments: &[Assignment]) -> std::io::Result<()> {
    let g = assignments.first().map_or(3, |a| a.posteriors.len());
    write!(w, "dyad_id,vessel_a,trip_a,vessel_b,trip_b")?;
    for k in 1..=g {
        write!(w, ",p{k}")?;
    }
    writeln!(w, ",cluster,max_posterior")?;
    for a in assignments {
        let d = &dyads[a.dyad];
        write!(w, "{},{},{},{},{}", a.dyad, d.vessel_a, d.trip_a, d.vessel_b, d.trip_b)?;
        for p in &a.posteriors {
            write!(w, ",{p}")?;
        }
        writeln!(w, ",{},{}", a.cluster(), a.max_posterior)?;
    }
    Ok(())
}

pub fn read_assignments(path: &Path) -> Result<Vec<Assignment>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fmt = |line: usize| Error::Format {
        source_name: path.display().to_string(),
        message: format!("line {line}: malformed assignment row"),
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| fmt(1))?.split(',').collect();
    let g = header.iter().filter(|h| h.starts_with('p') && h[1..].parse::<usize>().is_ok()).count();
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 + g + 2 {
            return Err(fmt(i + 2));
        }
        let posteriors = f[5..5 + g]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| fmt(i + 2)))
            .collect::<Result<Vec<_>>>()?;
        let cluster: usize = f[5 + g].parse().map_err(|_| fmt(i + 2))?;
        if cluster == 0 || cluster > g {
            return Err(fmt(i + 2));
        }
        out.push(Assignment {
            dyad: f[0].parse().map_err(|_| fmt(i + 2))?,
            posteriors,
            label: cluster - 1,
            max_posterior: f[6 + g].parse().map_err(|_| fmt(i + 2))?,
        });
    }
    Ok(out)
}

/// Stage D and the reports, from in-memory or reloaded artifacts.
fn downstream(
    dir: &Path,
    name: &str,
    g: usize,
    dyads: &[Dyad],
    metrics: &[MetricVector],
    assignments: Vec<Assignment>,
    config: &PipelineConfig,
) -> Result<FleetReport> {
    let labels: Vec<usize> = assignments.iter().map(|a| a.label).collect();
    let classification = summarise(g, assignments, dyads);
    let network = build_network(&classification.assignments, dyads);
    let coords = layout(&network, config.layout_iterations, config.seed);
    let loyal = loyalty(&network);
    let report = fleet_report(name, &network, &loyal, &dyad_summary(dyads), &classification);

    let path = dir.join("edges.csv");
    let mut w = create(&path)?;
    write_edge_list(&mut w, &network).map_err(|e| Error::io(&path, e))?;
    finish(&path, w)?;
    let path = dir.join("network.graphml");
    let mut w = create(&path)?;
    write_graphml(&mut w, &network, &coords).map_err(|e| Error::io(&path, e))?;
    finish(&path, w)?;
    let path = dir.join("histograms.csv");
    let mut w = create(&path)?;
    write_histograms(&mut w, metrics, &labels, g).map_err(|e| Error::io(&path, e))?;
    finish(&path, w)?;
    write_file(&dir.join("report.toml"), report.to_toml())?;
    Ok(report)
}

fn classify_and_report(
    dir: &Path,
    name: &str,
    model: &GmmModel,
    data: &FleetData,
    assignments: Option<Vec<Assignment>>,
    config: &PipelineConfig,
) -> Result<FleetReport> {
    let assignments = match assignments {
        Some(a) => a,
        None => assign_all(model, &data.metrics).map_err(|e| e.at(Stage::Mixture))?,
    };
    let path = dir.join("assignments.csv");
    let mut w = create(&path)?;
    write_assignments(&mut w, &data.dyads, &assignments).map_err(|e| Error::io(&path, e))?;
    finish(&path, w)?;
    downstream(dir, name, model.g(), &data.dyads, &data.metrics, assignments, config).map_err(|e| e.at(Stage::Network))
}

/// Fits the mixture to the single training fleet and reports on it.
pub fn run_fit(config: &PipelineConfig) -> Result<RunSummary> {
    if config.mode != Mode::Fit {
        return Err(Error::config("configuration is not in fit mode"));
    }
    config.validate()?;
    config.check_inputs()?;
    let out = &config.output_dir;
    let reports = guarded(out, || {
        pool(config.parallelism)?.install(|| {
            let block = &config.fleets[0];
            let dir = out.join(&block.name);
            guarded(&dir, || {
                let data = load_fleet(block)?;
                write_upstream(&dir, &data)?;
                let x: Vec<[f64; 3]> = data.metrics.iter().map(MetricVector::features).collect();
                let em = EmConfig {
                    restarts: config.restarts,
                    seed: config.seed,
                    ..Default::default()
                };
                let fit = em_fit(&x, &em).map_err(|e| e.at(Stage::Mixture))?;
                log::info!(
                    "selected restart {} of {} (ICL {:.3})",
                    fit.model.fit.as_ref().map_or(0, |f| f.selected_restart),
                    config.restarts,
                    fit.model.fit.as_ref().map_or(f64::NAN, |f| f.icl)
                );
                write_file(&out.join("model.json"), fit.model.to_json())?;
                let mut restarts = String::from("restart,status,iterations,log_likelihood,icl,max_rel_decrease\n");
                for t in &fit.traces {
                    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                    let status = toml::Value::try_from(&t.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                    restarts.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        t.restart,
                        status,
                        t.iterations,
                        opt(t.log_likelihood),
                        opt(t.icl),
                        t.max_rel_decrease
                    ));
                }
                write_file(&out.join("restarts.csv"), restarts)?;
                let mut overlaps = String::from("cluster_g,cluster_h,overlap,std_error\n");
                for (g, h, e) in overlap_table(&fit.model, config.overlap_samples, config.seed) {
                    overlaps.push_str(&format!("{},{},{},{}\n", g + 1, h + 1, e.value, e.std_error));
                }
                write_file(&out.join("overlaps.csv"), overlaps)?;
                let report = classify_and_report(&dir, &block.name, &fit.model, &data, Some(fit.assignments), config)?;
                Ok(vec![report])
            })
        })
    })?;
    write_summary(out, &reports)?;
    Ok(RunSummary {
        output_dir: out.clone(),
        reports,
    })
}

/// Classifies every fleet with a fitted model.
pub fn run_classify(config: &PipelineConfig) -> Result<RunSummary> {
    if config.mode != Mode::Classify {
        return Err(Error::config("configuration is not in classify mode"));
    }
    config.validate()?;
    config.check_inputs()?;
    let model = load_model(config.model.as_deref().expect("validated")).map_err(|e| e.at(Stage::Config))?;
    let out = &config.output_dir;
    let reports = guarded(out, || {
        pool(config.parallelism)?.install(|| {
            let results: Vec<Result<FleetReport>> = config
                .fleets
                .par_iter()
                .map(|block| {
                    let dir = out.join(&block.name);
                    guarded(&dir, || {
                        let data = load_fleet(block)?;
                        write_upstream(&dir, &data)?;
                        classify_and_report(&dir, &block.name, &model, &data, None, config)
                    })
                })
                .collect();
            results.into_iter().collect::<Result<Vec<_>>>()
        })
    })?;
    write_summary(out, &reports)?;
    Ok(RunSummary {
        output_dir: out.clone(),
        reports,
    })
}

/// Rebuilds networks and reports from the dyad, metric and assignment
/// files of an earlier run.
pub fn run_report(config: &PipelineConfig) -> Result<RunSummary> {
    let out = &config.output_dir;
    let mut reports = Vec::new();
    for block in &config.fleets {
        let dir = out.join(&block.name);
        let open = |name: &str| -> Result<(PathBuf, fs::File)> {
            let p = dir.join(name);
            let f = fs::File::open(&p).map_err(|e| Error::io(&p, e))?;
            Ok((p, f))
        };
        let (p, f) = open("dyads.csv")?;
        let dyads = read_manifest(std::io::BufReader::new(f), &p.display().to_string())?;
        let (p, f) = open("metrics.csv")?;
        let metrics: Vec<MetricVector> = read_metrics(std::io::BufReader::new(f), &p.display().to_string())?
            .into_iter()
            .map(|r| r.metrics)
            .collect();
        let assignments = read_assignments(&dir.join("assignments.csv"))?;
        if assignments.iter().any(|a| a.dyad >= dyads.len()) || metrics.len() != dyads.len() {
            return Err(Error::data(format!("{}: dyad, metric and assignment files disagree", dir.display())));
        }
        let g = assignments.first().map_or(3, |a| a.posteriors.len());
        reports.push(guarded(&dir, || downstream(&dir, &block.name, g, &dyads, &metrics, assignments, config))?);
    }
    write_summary(out, &reports)?;
    Ok(RunSummary {
        output_dir: out.clone(),
        reports,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_default()
}

/// Cross-fleet table, one row per fleet, plus a plain-text rendering.
fn write_summary(out: &Path, reports: &[FleetReport]) -> Result<()> {
    let g = reports.iter().map(|r| r.clusters.len()).max().unwrap_or(3);
    let mut csv = String::from("fleet,vessels,dyads,median_duration_hours");
    for k in 1..=g {
        csv.push_str(&format!(
            ",c{k}_vessels,c{k}_vessel_share,c{k}_dyads,c{k}_dyad_share,c{k}_median_duration_hours"
        ));
    }
    csv.push_str(",partner_vessels,exclusive_vessels,loyalty_index\n");
    let mut txt = String::new();
    for r in reports {
        csv.push_str(&format!("{},{},{},{}", r.fleet, r.vessels, r.dyads, opt(r.median_duration_hours)));
        txt.push_str(&format!(
            "{}{}: {} vessels, {} dyads, median {} h\n",
            r.fleet,
            if r.empty { " (empty)" } else { "" },
            r.vessels,
            r.dyads,
            opt(r.median_duration_hours)
        ));
        for k in 0..g {
            match r.clusters.get(k) {
                Some(c) => {
                    csv.push_str(&format!(
                        ",{},{},{},{},{}",
                        c.vessels,
                        sig6(c.vessel_share),
                        c.dyads,
                        sig6(c.dyad_share),
                        opt(c.median_duration_hours)
                    ));
                    txt.push_str(&format!(
                        "  cluster {}: {} vessels ({:.1}%), {} dyads ({:.1}%), median {} h\n",
                        c.cluster,
                        c.vessels,
                        100.0 * c.vessel_share,
                        c.dyads,
                        100.0 * c.dyad_share,
                        opt(c.median_duration_hours)
                    ));
                }
                None => csv.push_str(",,,,,"),
            }
        }
        csv.push_str(&format!(
            ",{},{},{}\n",
            r.network.nodes,
            r.network.exclusive_vessels,
            opt(r.network.loyalty_index)
        ));
        txt.push_str(&format!(
            "  partners: {} vessels, {} exclusive, loyalty {}\n",
            r.network.nodes,
            r.network.exclusive_vessels,
            r.network.loyalty_index.map_or("undefined".to_string(), |l| format!("{l:.2}"))
        ));
    }
    write_file(&out.join("summary.csv"), csv)?;
    write_file(&out.join("summary.txt"), txt)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut spec = ScenarioSpec::from_toml(&text)?;
    if let Some(m) = spec.fleet.as_mut().and_then(|f| f.model.as_mut()) {
        if m.is_relative() && m.as_os_str() != BUNDLED_MODEL {
            *m = path.parent().unwrap_or(Path::new(".")).join(&*m);
        }
    }
    Ok(spec)
}

/// Writes a synthetic dataset and a copy of its spec under `out`.
pub fn run_synth(spec: &ScenarioSpec, out: &Path) -> Result<DatasetSummary> {
    guarded(out, || {
        let scenario = synth::generate(spec).map_err(|e| e.at(Stage::Synth))?;
        let summary = synth::write_dataset(out, &scenario).map_err(|e| e.at(Stage::Synth))?;
        write_file(&out.join("scenario.toml"), toml::to_string(spec).expect("spec serialises"))?;
        Ok(summary)
    })
}

pub fn run_benchmark(spec: &ScenarioSpec, out: &Path) -> Result<BenchmarkReport> {
    let model = match spec.fleet.as_ref().and_then(|f| f.model.as_deref()) {
        Some(p) => load_model(p).map_err(|e| e.at(Stage::Config))?,
        None => GmmModel::bundled(),
    };
    guarded(out, || {
        let report = synth::benchmark(spec, &model).map_err(|e| e.at(Stage::Synth))?;
        write_file(&out.join("benchmark.toml"), report.to_toml())?;
        Ok(report)
    })
}
