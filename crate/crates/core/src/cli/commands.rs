use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{CliError, Command, CommonArgs, ModelArgs, RunConfig};
use crate::aqi::{AqiMode, BreakpointTable};
use crate::metrics::{evaluate, evaluate_with_units};
use crate::nn::{
    load_model, predict_scaled, predict_with, save_model, train, unscale_targets, BiLstmNetwork, NetworkConfig,
    TrainingConfig,
};
use crate::preprocess::{held_out_windows, training_windows};
use crate::stats::{
    adf_report, grouped_means, pearson_corr_matrix, AdfReportEntry, CorrelationMatrix, GroupedMeans, Grouping,
};
use crate::synth::{synth_generate, SynthSpec};
use crate::timeseries::{
    add_ratio_column, clean, parse_csv, parse_timestamp, Column, ObservationFrame, TIMESTAMP_FORMAT,
};

/// Runs one command and returns what it prints on stdout.
pub fn execute(common: &CommonArgs, command: &Command) -> Result<String, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    apply_common(&mut cfg, common);
    apply_command(&mut cfg, command)?;
    cfg.validate()?;

    match command {
        Command::Validate => validate(&cfg),
        Command::Analyze { .. } => analyze(&cfg),
        Command::Train { .. } => train_cmd(&cfg),
        Command::Evaluate { scaled, .. } => evaluate_cmd(&cfg, *scaled),
        Command::Forecast { steps, .. } => forecast(&cfg, *steps),
        Command::Aqi { pm25, pm10, .. } => aqi(&cfg, *pm25, *pm10),
        Command::Synth {
            rows,
            start,
            diurnal_amplitude,
            daytime_boost,
            noise_scale,
            pm_ratio,
        } => {
            let mut spec = SynthSpec {
                seed: cfg.seed,
                ..SynthSpec::default()
            };
            if let Some(r) = rows {
                spec.rows = *r;
            }
            if let Some(s) = start {
                spec.start = parse_timestamp(s)
                    .ok_or_else(|| CliError::Usage(format!("--start must look like {TIMESTAMP_FORMAT}, got `{s}`")))?;
            }
            for (dst, src) in [
                (&mut spec.diurnal_amplitude, diurnal_amplitude),
                (&mut spec.daytime_boost, daytime_boost),
                (&mut spec.noise_scale, noise_scale),
                (&mut spec.pm_ratio, pm_ratio),
            ] {
                if let Some(v) = src {
                    *dst = *v;
                }
            }
            synth(&cfg, &spec)
        }
    }
}

fn apply_common(cfg: &mut RunConfig, common: &CommonArgs) {
    if let Some(d) = &common.data {
        cfg.data = Some(d.clone());
    }
    if let Some(m) = &common.model {
        cfg.model = Some(m.clone());
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
}

fn apply_model_args(cfg: &mut RunConfig, m: &ModelArgs) {
    if let Some(l) = m.lookback {
        cfg.lookback = l;
    }
    if let Some(f) = &m.features {
        cfg.features = f.clone();
    }
    if let Some(t) = m.train_fraction {
        cfg.train_fraction = t;
    }
}

fn apply_command(cfg: &mut RunConfig, command: &Command) -> Result<(), CliError> {
    match command {
        Command::Analyze { adf_threshold } => {
            if let Some(t) = adf_threshold {
                cfg.adf_threshold = *t;
            }
        }
        Command::Train {
            model,
            epochs,
            batch_size,
            shuffle,
        } => {
            apply_model_args(cfg, model);
            if let Some(e) = epochs {
                cfg.epochs = *e;
            }
            if let Some(b) = batch_size {
                cfg.batch_size = *b;
            }
            cfg.shuffle |= *shuffle;
        }
        Command::Evaluate { train_fraction, .. } => {
            if let Some(t) = train_fraction {
                cfg.train_fraction = *t;
            }
        }
        Command::Forecast {
            aqi_mode,
            breakpoints,
            steps,
        } => {
            if *steps == 0 {
                return Err(CliError::Usage("--steps must be at least 1".into()));
            }
            if let Some(m) = aqi_mode {
                cfg.aqi_mode = m.parse::<AqiMode>().map_err(CliError::Usage)?;
            }
            if let Some(b) = breakpoints {
                cfg.breakpoints = Some(b.clone());
            }
        }
        Command::Aqi { breakpoints, .. } => {
            if let Some(b) = breakpoints {
                cfg.breakpoints = Some(b.clone());
            }
        }
        Command::Validate | Command::Synth { .. } => {}
    }
    Ok(())
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn load_clean(cfg: &RunConfig) -> Result<(ObservationFrame, crate::timeseries::CleanReport), CliError> {
    let path = cfg.data_path()?;
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let raw = parse_csv(&text)?;
    Ok(clean(&raw)?)
}

fn write_out(cfg: &RunConfig, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    let path = cfg.out.join(name);
    std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn table(cfg: &RunConfig) -> Result<BreakpointTable, CliError> {
    match &cfg.breakpoints {
        Some(p) => Ok(BreakpointTable::load(p)?),
        None => Ok(BreakpointTable::default()),
    }
}

fn validate(cfg: &RunConfig) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Summary {
        #[serde(flatten)]
        report: crate::timeseries::CleanReport,
        first: String,
        last: String,
    }
    let (frame, report) = load_clean(cfg)?;
    let ts = frame.timestamps();
    let fmt = |t: &chrono::NaiveDateTime| t.format(TIMESTAMP_FORMAT).to_string();
    Ok(to_json(&Summary {
        report,
        first: fmt(&ts[0]),
        last: fmt(&ts[ts.len() - 1]),
    }))
}

fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

fn correlation_csv(c: &CorrelationMatrix) -> String {
    let mut s = String::from("column");
    for name in &c.columns {
        write!(s, ",{name}").unwrap();
    }
    s.push('\n');
    for (name, row) in c.columns.iter().zip(&c.matrix) {
        s.push_str(name);
        for v in row {
            write!(s, ",{}", num(*v)).unwrap();
        }
        s.push('\n');
    }
    s
}

fn adf_csv(entries: &[AdfReportEntry]) -> String {
    let mut s = String::from("column,statistic,p_value,lags,verdict,error\n");
    for e in entries {
        match &e.result {
            Ok(r) => {
                let verdict = serde_json::to_value(r.verdict).unwrap();
                writeln!(
                    s,
                    "{},{},{},{},{},",
                    e.column,
                    r.statistic,
                    r.p_value,
                    r.lags_used,
                    verdict.as_str().unwrap()
                )
                .unwrap()
            }
            Err(err) => writeln!(s, "{},,,,,{}", e.column, err.to_string().replace(',', ";")).unwrap(),
        }
    }
    s
}

fn groups_csv(g: &GroupedMeans) -> String {
    let mut s = String::from("label,count,mean_pm25,mean_pm10\n");
    for stat in &g.groups {
        writeln!(
            s,
            "{},{},{},{}",
            stat.label,
            stat.count,
            num(stat.mean_pm25),
            num(stat.mean_pm10)
        )
        .unwrap();
    }
    s
}

fn analyze(cfg: &RunConfig) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Groups {
        rh_bins: GroupedMeans,
        wd_sectors: GroupedMeans,
        day_night: GroupedMeans,
    }
    #[derive(Serialize)]
    struct Analysis {
        rows: usize,
        zero_pm10_dropped: usize,
        correlation: CorrelationMatrix,
        adf: Vec<AdfReportEntry>,
        groups: Groups,
    }

    let (frame, _) = load_clean(cfg)?;
    let (with_ratio, ratio_report) = add_ratio_column(&frame);
    let columns: Vec<&str> = Column::BASE.iter().map(|c| c.name()).collect();
    let correlation = pearson_corr_matrix(&frame, &columns)?;
    let adf = adf_report(&with_ratio, cfg.adf_threshold);
    let groups = Groups {
        rh_bins: grouped_means(&frame, Grouping::RhBins)?,
        wd_sectors: grouped_means(&frame, Grouping::WdSectors)?,
        day_night: grouped_means(&frame, Grouping::DayNight)?,
    };

    let mut written = vec![
        write_out(cfg, "correlation.csv", &correlation_csv(&correlation))?,
        write_out(cfg, "adf.csv", &adf_csv(&adf))?,
        write_out(cfg, "groups_rh_bins.csv", &groups_csv(&groups.rh_bins))?,
        write_out(cfg, "groups_wd_sectors.csv", &groups_csv(&groups.wd_sectors))?,
        write_out(cfg, "groups_day_night.csv", &groups_csv(&groups.day_night))?,
    ];
    let analysis = Analysis {
        rows: frame.len(),
        zero_pm10_dropped: ratio_report.zero_pm10_dropped,
        correlation,
        adf,
        groups,
    };
    written.insert(0, write_out(cfg, "analysis.json", &to_json(&analysis))?);
    Ok(written.iter().map(|p| format!("{}\n", p.display())).collect())
}

fn train_cmd(cfg: &RunConfig) -> Result<String, CliError> {
    let (frame, _) = load_clean(cfg)?;
    let (scaler, data) = training_windows(&frame, &cfg.features, cfg.lookback, cfg.train_fraction)?;

    let mut net =
        BiLstmNetwork::new(NetworkConfig::standard(cfg.lookback, cfg.features.clone()), cfg.seed)?.with_scaler(scaler);
    let tc = TrainingConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        seed: cfg.seed,
        shuffle: cfg.shuffle,
        ..TrainingConfig::default()
    };
    let log = train(&mut net, &data, &tc)?;

    let model_path = cfg.model_path();
    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    save_model(&net, &model_path)?;
    let log_path = write_out(cfg, "training_log.csv", &log.to_csv())?;
    let last = log.epochs.last().map_or(f64::NAN, |e| e.mean_loss);
    Ok(format!(
        "samples {} epochs {} final_loss {last:e}\n{}\n{}\n",
        log.samples,
        log.epochs.len(),
        model_path.display(),
        log_path.display()
    ))
}

fn evaluate_cmd(cfg: &RunConfig, scaled: bool) -> Result<String, CliError> {
    let net = load_model(&cfg.model_path())?;
    let scaler = net.scaler.clone().ok_or(crate::nn::NnError::MissingScaler)?;
    let (frame, _) = load_clean(cfg)?;
    let (test, truths) = held_out_windows(&frame, &scaler, net.features(), net.lookback(), cfg.train_fraction)?;
    let preds = predict_scaled(&net, &test.inputs)?;
    let report = if scaled {
        evaluate_with_units(&preds, &test.targets, "scaled")?
    } else {
        evaluate(&unscale_targets(&net, &preds)?, &truths)?
    };
    let json = to_json(&report);
    write_out(cfg, "metrics.json", &json)?;
    Ok(json)
}

fn forecast(cfg: &RunConfig, steps: usize) -> Result<String, CliError> {
    let net = load_model(&cfg.model_path())?;
    let (frame, _) = load_clean(cfg)?;
    let out = predict_with(&net, &frame, steps, &table(cfg)?, cfg.aqi_mode)?;
    let mut csv = String::from("timestamp,pm25,pm10,aqi,category,aqi_basis\n");
    for f in &out {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            f.timestamp.format(TIMESTAMP_FORMAT),
            f.pm25,
            f.pm10,
            f.aqi.composite,
            f.aqi.category.label(),
            f.aqi_basis
        )
        .unwrap();
    }
    let path = write_out(cfg, "forecast.csv", &csv)?;
    Ok(format!("{}\n", path.display()))
}

fn aqi(cfg: &RunConfig, pm25: f64, pm10: f64) -> Result<String, CliError> {
    #[derive(Serialize)]
    struct Out {
        #[serde(flatten)]
        result: crate::aqi::AqiResult,
        label: &'static str,
    }
    let result = table(cfg)?.composite(pm25, pm10)?;
    Ok(to_json(&Out {
        result,
        label: result.category.label(),
    }))
}

fn synth(cfg: &RunConfig, spec: &SynthSpec) -> Result<String, CliError> {
    let frame = synth_generate(spec)?;
    let path = write_out(cfg, "synth.csv", &frame.to_csv())?;
    Ok(format!("{}\n", path.display()))
}
