use std::collections::BTreeSet;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use h2asym::acceptance::{Outcome, Suite};
use h2asym::analysis::{
    asymmetry_map, band_projection, delay_scan, fill_jes, BandSelection,
    ChirpTable, CountGrid, DelayScanResult, MIN_DELAYS,
};
use h2asym::config::RunConfig;
use h2asym::eventgen::run_simulation;
use h2asym::fitting::{
    extract_alpha_beta, fit_bump, fit_cosine, fit_exponential, sideband_chirp, CosineFit, Sample,
};
use h2asym::format::EventFile;
use h2asym::pathways::BandParity;
use h2asym::units::{angular_frequency, oscillation_period};
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::output::{write_json, write_table, write_text, Provenance, Table};

const PLOT_SCRIPT: &str = include_str!("../assets/plot_maps.py");
const MAP_HEADER: [&str; 4] = ["ker_ev", "delay_fs", "asymmetry", "sigma"];
/// Samples per period for ⟨A⟩(KER).
const AVERAGE_SAMPLES: usize = 64;
/// Fraction of the peak above which the |β|² bump is fitted.
const BUMP_THRESHOLD: f64 = 0.3;

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
}

impl Context {
    pub fn new(config: Option<&Path>, out: Option<PathBuf>, seed: Option<u64>) -> Result<Self, CliError> {
        let mut cfg = match config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = seed {
            cfg.simulation.seed = s;
        }
        let out = out.unwrap_or_else(|| cfg.output.directory.clone());
        Ok(Self { cfg, out })
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            config_hash: self.cfg.hash(),
            seed: self.cfg.simulation.seed,
        }
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out).map_err(|source| CliError::Io {
            path: self.out.clone(),
            source,
        })?;
        Ok(&self.out)
    }

    fn fit_frequency(&self) -> f64 {
        2.0 * angular_frequency(self.cfg.physics.photon_energy_ev)
    }

    /// Centre of the analysis KER bin that contains `fit_ker_ev`.
    fn fit_ker(&self) -> Result<f64, CliError> {
        let axis = self.cfg.binning()?.ker;
        let i = axis
            .index(self.cfg.analysis.fit_ker_ev)
            .ok_or_else(|| CliError::Data("analysis.fit_ker_ev lies outside the KER axis".into()))?;
        Ok(axis.center(i))
    }
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

fn cosine_json(f: &CosineFit) -> Value {
    json!({
        "offset": f.offset,
        "amplitude": f.amplitude,
        "phase": f.phase,
        "angular_frequency": f.angular_frequency,
        "sigma_offset": f.sigma_offset,
        "sigma_amplitude": f.sigma_amplitude,
        "sigma_phase": f.sigma_phase,
        "residual_rms": f.residual_rms,
        "chi2": f.chi2,
    })
}

fn parity_of(label: &str) -> Option<BandParity> {
    if label.starts_with("odd") {
        Some(BandParity::Odd)
    } else if label.starts_with("even") {
        Some(BandParity::Even)
    } else {
        None
    }
}

pub fn model(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let prov = ctx.provenance();
    let model = cfg.build_model()?;
    let dir = ctx.out_dir()?;
    let hw = model.photon_energy_ev();
    let period = oscillation_period(hw);
    let n = cfg.output.model_delays;
    let taus: Vec<f64> = (0..n).map(|k| k as f64 * period / n as f64).collect();
    let axis = cfg.binning()?.ker;
    let kers = axis.centers();
    let fit_ker = ctx.fit_ker()?;
    let fit_bin = axis.index(fit_ker).expect("fit KER lies on the axis");
    // model cells are averaged over the analysis KER bins, like the histograms
    let cell = |members: &[usize], bin: usize, t: f64| -> Result<f64, CliError> {
        let lo = axis.lower_edge(bin);
        Ok(model.binned_asymmetry(members, lo, lo + axis.width(), t)?)
    };
    let w2 = ctx.fit_frequency();
    let mut files = Vec::new();

    let mut seen = BTreeSet::new();
    let bands: Vec<(usize, String)> = model
        .bands
        .iter()
        .enumerate()
        .map(|(i, b)| (i, format!("{}{}", b.parity, b.order)))
        .filter(|(_, l)| seen.insert(l.clone()))
        .collect();

    let mut band_info = Vec::new();
    for (i, label) in &bands {
        let mut rows = Vec::with_capacity(kers.len() * n);
        for (bin, &k) in kers.iter().enumerate() {
            for &t in &taus {
                rows.push(vec![k, t, cell(&[*i], bin, t)?, 0.0]);
            }
        }
        let name = format!("model_map_{label}.csv");
        write_table(&dir.join(&name), &prov, &MAP_HEADER, rows)?;
        files.push(name);
        let samples: Vec<Sample> = taus
            .iter()
            .map(|&t| Ok((t, cell(&[*i], fit_bin, t)?, 1.0)))
            .collect::<Result<_, CliError>>()?;
        let b = &model.bands[*i];
        let mut entry = json!({
            "label": label,
            "parity": b.parity.as_str(),
            "order": b.order,
            "xuv_delta_phase": model.xuv.delta_phase(b.order).ok(),
            "mean_asymmetry_at_fit_ker": model.time_average_asymmetry(*i, fit_ker, AVERAGE_SAMPLES)?,
        });
        if let Ok(f) = fit_cosine(&samples, w2) {
            entry["oscillation"] = cosine_json(&f);
        }
        band_info.push(entry);
    }

    let mut parity_info = Map::new();
    for parity in [BandParity::Odd, BandParity::Even] {
        let members: Vec<usize> = bands
            .iter()
            .map(|(i, _)| *i)
            .filter(|&i| model.bands[i].parity == parity)
            .collect();
        if members.is_empty() {
            continue;
        }
        // yield-weighted over the bands, as counted without alignment
        let mut rows = Vec::with_capacity(kers.len() * n);
        for (bin, &k) in kers.iter().enumerate() {
            for &t in &taus {
                rows.push(vec![k, t, cell(&members, bin, t)?, 0.0]);
            }
        }
        let name = format!("model_map_{parity}.csv");
        write_table(&dir.join(&name), &prov, &MAP_HEADER, rows)?;
        files.push(name);
        let samples: Vec<Sample> = taus
            .iter()
            .map(|&t| Ok((t, cell(&members, fit_bin, t)?, 1.0)))
            .collect::<Result<_, CliError>>()?;
        if let Ok(f) = fit_cosine(&samples, w2) {
            parity_info.insert(parity.as_str().into(), cosine_json(&f));
        }
    }

    let mut header = vec!["ker_ev".to_string()];
    header.extend(bands.iter().map(|(_, l)| l.clone()));
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(kers.len());
    for &k in &kers {
        let mut row = vec![k];
        for (i, _) in &bands {
            row.push(model.time_average_asymmetry(*i, k, AVERAGE_SAMPLES)?);
        }
        rows.push(row);
    }
    write_table(&dir.join("model_mean_asymmetry.csv"), &prov, &header_ref, rows)?;
    files.push("model_mean_asymmetry.csv".into());

    let rows = model.phases.ker_grid().iter().map(|&k| {
        let p = model.phases.at(k);
        vec![k, p.theta_gs, p.theta_bs, p.delta()]
    });
    write_table(
        &dir.join("nuclear_phases.csv"),
        &prov,
        &["ker_ev", "theta_gs", "theta_bs", "delta_theta"],
        rows,
    )?;
    files.push("nuclear_phases.csv".into());
    write_text(&dir.join("plot_maps.py"), PLOT_SCRIPT)?;
    files.push("plot_maps.py".into());

    let summary = json!({
        "provenance": prov.json(),
        "photon_energy_ev": hw,
        "period_fs": period,
        "fit_ker_ev": fit_ker,
        "bands": band_info,
        "parity_sums": parity_info,
        "files": files,
    });
    write_json(&dir.join("model.json"), &summary)?;
    println!("model: wrote {} files to {}", files.len() + 1, dir.display());
    Ok(())
}

pub fn simulate(ctx: &Context, events: Option<u64>) -> Result<(), CliError> {
    let mut cfg = ctx.cfg.clone();
    if let Some(n) = events {
        cfg.simulation.events = n;
        cfg.validate()?;
    }
    let prov = Provenance {
        config_hash: cfg.hash(),
        seed: cfg.simulation.seed,
    };
    let model = cfg.build_model()?;
    let file = run_simulation(&model, &cfg.sim_config()?, prov.config_hash)?;
    let dir = ctx.out_dir()?;
    let mut files = vec!["events.bin".to_string()];
    let path = dir.join("events.bin");
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    let mut w = BufWriter::new(fs::File::create(&path).map_err(io(&path))?);
    file.write_binary(&mut w).map_err(io(&path))?;
    w.flush().map_err(io(&path))?;
    if cfg.output.events_csv {
        let path = dir.join("events.csv");
        let w = BufWriter::new(fs::File::create(&path).map_err(io(&path))?);
        file.write_csv(w)
            .map_err(|source| CliError::Events { path: path.clone(), source })?;
        files.push("events.csv".into());
    }
    let summary = json!({
        "provenance": prov.json(),
        "events": file.len(),
        "delays_fs": file.delays_fs,
        "counts_per_delay": file.counts_per_delay(),
        "files": files,
    });
    write_json(&dir.join("simulate.json"), &summary)?;
    println!("simulate: {} events at {} delays -> {}", file.len(), file.delays_fs.len(), path.display());
    Ok(())
}

fn read_events(path: &Path) -> Result<EventFile, CliError> {
    let f = fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let r = BufReader::new(f);
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let parsed = if is_csv { EventFile::read_csv(r) } else { EventFile::read_binary(r) };
    parsed.map_err(|source| CliError::Events {
        path: path.to_path_buf(),
        source,
    })
}

fn grid_rows(g: &CountGrid, kers: &[f64], delays: &[f64]) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(g.n_ker * g.n_delays);
    for (i, &k) in kers.iter().enumerate() {
        for (d, &t) in delays.iter().enumerate() {
            let (a, s) = g.asymmetry(i, d);
            rows.push(vec![k, t, finite_or_zero(a), finite_or_zero(s)]);
        }
    }
    rows
}

/// Δφ_{q,q−2} per order from the delay dependence of the even-band yields.
fn recover_chirp(scan: &DelayScanResult, w2: f64) -> Result<(ChirpTable, Value), String> {
    let mut fits = Vec::new();
    for b in scan.bands.iter().filter(|b| b.selection.parity == BandParity::Even) {
        let g = &b.counts;
        let s: Vec<Sample> = (0..g.n_delays)
            .map(|d| {
                let n: f64 = (0..g.n_ker).map(|i| g.counts(i, d)).sum();
                (scan.delays_fs[d], n, n.max(1.0).sqrt())
            })
            .collect();
        let f = fit_cosine(&s, w2).map_err(|e| format!("even band {}: {e}", b.selection.order))?;
        fits.push((b.selection.order, f));
    }
    let phases = sideband_chirp(&fits).map_err(|e| format!("chirp recovery: {e}"))?;
    let table: ChirpTable = phases.iter().map(|p| (p.order, p.relative_chirp)).collect();
    let report = phases
        .iter()
        .map(|p| json!({"order": p.order, "phase": p.phase, "sigma": p.sigma, "relative_chirp": p.relative_chirp}))
        .collect();
    Ok((table, Value::Array(report)))
}

pub fn analyze(ctx: &Context, input: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let prov = ctx.provenance();
    let dir = ctx.out_dir()?.to_path_buf();
    let path = input.unwrap_or_else(|| dir.join("events.bin"));
    let file = read_events(&path)?;
    let mut warnings: Vec<String> = Vec::new();
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if !is_csv && file.config_hash != prov.config_hash {
        warnings.push(format!(
            "event file was written with config hash {:016x}, current config is {}",
            file.config_hash,
            prov.hash_hex()
        ));
    }
    if file.is_empty() {
        warnings.push("event file holds no events; all histograms are zero".into());
    }
    if file.delays_fs.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Data(format!("{}: incomplete delay table", path.display())));
    }

    let binning = cfg.binning()?;
    let kers = binning.ker.centers();
    let ees = binning.ee.centers();
    let mut files = Vec::new();

    let jes = fill_jes(&file.events, binning);
    let mut rows = Vec::with_capacity(kers.len() * ees.len());
    for (i, &k) in kers.iter().enumerate() {
        for (j, &e) in ees.iter().enumerate() {
            let idx = jes.index(i, j);
            rows.push(vec![k, e, jes.counts_same[idx] as f64, jes.counts_opp[idx] as f64]);
        }
    }
    write_table(&dir.join("jes.csv"), &prov, &["ker_ev", "ee_ev", "same", "opposite"], rows)?;
    files.push("jes.csv".to_string());
    let amap = asymmetry_map(&jes);
    let mut rows = Vec::with_capacity(kers.len() * ees.len());
    for (i, &k) in kers.iter().enumerate() {
        for (j, &e) in ees.iter().enumerate() {
            let idx = jes.index(i, j);
            rows.push(vec![
                k,
                e,
                finite_or_zero(amap.asymmetry[idx]),
                finite_or_zero(amap.sigma[idx]),
                amap.counts[idx] as f64,
            ]);
        }
    }
    write_table(
        &dir.join("asymmetry_map.csv"),
        &prov,
        &["ker_ev", "ee_ev", "asymmetry", "sigma", "counts"],
        rows,
    )?;
    files.push("asymmetry_map.csv".into());

    let sels: Vec<BandSelection> = cfg.band_selections()?;
    let mut band_totals = Map::new();
    for s in &sels {
        let h = band_projection(&file.events, s, binning.ker);
        band_totals.insert(s.label(), json!(h.iter().sum::<u64>()));
        let name = format!("projection_{}.csv", s.label());
        let rows = kers.iter().zip(&h).map(|(&k, &c)| vec![k, c as f64]);
        write_table(&dir.join(&name), &prov, &["ker_ev", "counts"], rows)?;
        files.push(name);
    }

    let mut chirp_report = Value::Null;
    let mut aligned = false;
    let mut alignment = Value::Null;
    if file.delays_fs.len() < MIN_DELAYS {
        warnings.push(format!(
            "{} delays recorded; delay scans need at least {MIN_DELAYS}",
            file.delays_fs.len()
        ));
    } else {
        let opts = cfg.scan_options()?;
        let raw = delay_scan(&file, &sels, &ChirpTable::new(), &opts)?;
        warnings.extend(raw.warnings.iter().cloned());
        for b in &raw.bands {
            let g = &b.counts;
            let name = format!("yield_{}.csv", b.selection.label());
            let rows = (0..g.n_delays).map(|d| {
                let n: f64 = (0..g.n_ker).map(|i| g.counts(i, d)).sum();
                vec![raw.delays_fs[d], n]
            });
            write_table(&dir.join(&name), &prov, &["delay_fs", "counts"], rows)?;
            files.push(name);
        }
        let mut scan = raw;
        let n_even = sels.iter().filter(|s| s.parity == BandParity::Even).count();
        if cfg.analysis.align && n_even >= 2 && !file.is_empty() {
            match recover_chirp(&scan, ctx.fit_frequency()) {
                Ok((table, report)) => {
                    chirp_report = report;
                    match sels.iter().find(|s| !table.contains_key(&s.order)) {
                        Some(s) => warnings.push(format!(
                            "no even band {} to align band {}; sums are unaligned",
                            s.order,
                            s.label()
                        )),
                        None => {
                            scan = delay_scan(&file, &sels, &table, &opts)?;
                            aligned = true;
                        }
                    }
                }
                Err(e) => warnings.push(format!("{e}; sums are unaligned")),
            }
        }
        alignment = json!(scan.alignment);
        for b in &scan.bands {
            let name = format!("scan_{}.csv", b.selection.label());
            write_table(&dir.join(&name), &prov, &MAP_HEADER, grid_rows(&b.counts, &kers, &scan.delays_fs))?;
            files.push(name);
        }
        for s in &scan.sums {
            let name = format!("scan_{}.csv", s.parity);
            write_table(&dir.join(&name), &prov, &MAP_HEADER, grid_rows(&s.counts, &kers, &scan.delays_fs))?;
            files.push(name);
            if let Some(sub) = &s.mean_subtracted {
                let g = &s.counts;
                let mut rows = Vec::with_capacity(g.n_ker * g.n_delays);
                for (i, &k) in kers.iter().enumerate() {
                    for (d, &t) in scan.delays_fs.iter().enumerate() {
                        let (_, sig) = g.asymmetry(i, d);
                        rows.push(vec![k, t, finite_or_zero(sub[g.index(i, d)]), finite_or_zero(sig)]);
                    }
                }
                let name = format!("scan_{}_mean_subtracted.csv", s.parity);
                write_table(&dir.join(&name), &prov, &MAP_HEADER, rows)?;
                files.push(name);
            }
        }
    }

    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let summary = json!({
        "provenance": prov.json(),
        "input": path.display().to_string(),
        "events": file.len(),
        "delays": file.delays_fs.len(),
        "out_of_range": jes.out_of_range,
        "band_totals": band_totals,
        "chirp": chirp_report,
        "aligned": aligned,
        "alignment": alignment,
        "warnings": warnings,
        "files": files,
    });
    write_json(&dir.join("analysis.json"), &summary)?;
    println!("analyze: {} events -> {} files in {}", file.len(), files.len() + 1, dir.display());
    Ok(())
}

/// Cosine fit of the map row whose KER bin holds `fit_ker`. Maps whose σ
/// column is all zero are noise-free model maps; elsewhere empty cells
/// (σ = 0) are skipped.
fn fit_map_row(t: &Table, fit_ker: f64, w2: f64) -> Result<(f64, CosineFit), CliError> {
    let (ck, ct, ca, cs) = (t.column("ker_ev")?, t.column("delay_fs")?, t.column("asymmetry")?, t.column("sigma")?);
    let mut kers: Vec<f64> = t.rows.iter().map(|r| r[ck]).collect();
    kers.sort_by(f64::total_cmp);
    kers.dedup();
    let no_rows = || CliError::Data(format!("{}: empty map", t.path.display()));
    let k = match kers.len() {
        0 => return Err(no_rows()),
        1 => kers[0],
        _ => {
            let d = kers[1] - kers[0];
            let i = ((fit_ker - (kers[0] - d / 2.0)) / d).floor();
            if i < 0.0 || i as usize >= kers.len() {
                return Err(CliError::Data(format!("{}: no row at KER {fit_ker}", t.path.display())));
            }
            kers[i as usize]
        }
    };
    let noiseless = t.rows.iter().all(|r| r[cs] == 0.0);
    let row: Vec<&Vec<f64>> = t
        .rows
        .iter()
        .filter(|r| r[ck] == k && (noiseless || r[cs] > 0.0))
        .collect();
    // One σ for the whole row: per-cell weights would shift the phase of a
    // non-sinusoidal A(τ) away from its first Fourier harmonic.
    let sigma = if noiseless || row.is_empty() {
        1.0
    } else {
        (row.iter().map(|r| r[cs] * r[cs]).sum::<f64>() / row.len() as f64).sqrt()
    };
    let samples: Vec<Sample> = row.iter().map(|r| (r[ct], r[ca], sigma)).collect();
    let f = fit_cosine(&samples, w2).map_err(|e| CliError::Data(format!("{}: {e}", t.path.display())))?;
    Ok((k, f))
}

pub fn fit(ctx: &Context, input: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let prov = ctx.provenance();
    let src = input.unwrap_or_else(|| ctx.out.clone());
    let entries = fs::read_dir(&src).map_err(|source| CliError::Io {
        path: src.clone(),
        source,
    })?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();

    let fit_ker = ctx.fit_ker()?;
    let w2 = ctx.fit_frequency();
    let range = (cfg.analysis.fit_range_ev[0], cfg.analysis.fit_range_ev[1]);
    let mut maps = Map::new();
    let mut projections = Map::new();
    let mut yields = Vec::new();
    let mut warnings = Vec::new();
    let mut used = 0usize;

    for name in &names {
        let stem = name.trim_end_matches(".csv");
        let path = src.join(name);
        if let Some(label) = stem.strip_prefix("scan_").or_else(|| stem.strip_prefix("model_map_")) {
            used += 1;
            let key = if stem.starts_with("scan_") { label.to_string() } else { format!("model_{label}") };
            match fit_map_row(&Table::read(&path)?, fit_ker, w2) {
                Ok((k, f)) => {
                    let mut v = cosine_json(&f);
                    v["ker_ev"] = json!(k);
                    maps.insert(key, v);
                }
                Err(e) => warnings.push(e.to_string()),
            }
        } else if let Some(label) = stem.strip_prefix("projection_") {
            used += 1;
            let t = Table::read(&path)?;
            let (ck, cc) = (t.column("ker_ev")?, t.column("counts")?);
            let x: Vec<f64> = t.rows.iter().map(|r| r[ck]).collect();
            let y: Vec<f64> = t.rows.iter().map(|r| r[cc]).collect();
            let Some(parity) = parity_of(label) else {
                warnings.push(format!("{name}: cannot tell the band parity"));
                continue;
            };
            let ef = match fit_exponential(&x, &y, range, cfg.exp_fit_options()) {
                Ok(f) => f,
                Err(e) => {
                    warnings.push(format!("{name}: {e}"));
                    continue;
                }
            };
            let ab = extract_alpha_beta(&x, &y, &ef, parity);
            let mut v = json!({
                "amplitude": ef.amplitude,
                "decay": ef.decay,
                "sigma_amplitude": ef.sigma_amplitude,
                "sigma_decay": ef.sigma_decay,
                "bins_used": ef.bins_used,
                "bins_excluded": ef.bins_excluded,
                "counts": y.iter().sum::<f64>(),
            });
            match fit_bump(&ab.ker, &ab.beta_sq, BUMP_THRESHOLD) {
                Ok(b) => v["beta_bump"] = json!({"center": b.center, "width": b.width, "height": b.height}),
                Err(e) => warnings.push(format!("{name}: bump: {e}")),
            }
            projections.insert(label.to_string(), v);
        } else if let Some(label) = stem.strip_prefix("yield_") {
            used += 1;
            if parity_of(label) != Some(BandParity::Even) {
                continue;
            }
            let order: u32 = match label.trim_start_matches("even").parse() {
                Ok(o) => o,
                Err(_) => {
                    warnings.push(format!("{name}: cannot read the harmonic order"));
                    continue;
                }
            };
            let t = Table::read(&path)?;
            let (ct, cc) = (t.column("delay_fs")?, t.column("counts")?);
            let s: Vec<Sample> = t.rows.iter().map(|r| (r[ct], r[cc], r[cc].max(1.0).sqrt())).collect();
            match fit_cosine(&s, w2) {
                Ok(f) => yields.push((order, f)),
                Err(e) => warnings.push(format!("{name}: {e}")),
            }
        }
    }
    if used == 0 {
        return Err(CliError::Data(format!("no histograms found in {}", src.display())));
    }
    let chirp = match sideband_chirp(&yields) {
        Ok(p) => p
            .iter()
            .map(|p| json!({"order": p.order, "phase": p.phase, "sigma": p.sigma, "relative_chirp": p.relative_chirp}))
            .collect(),
        Err(e) => {
            if !yields.is_empty() {
                warnings.push(format!("chirp: {e}"));
            }
            Vec::new()
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let summary = json!({
        "provenance": prov.json(),
        "input": src.display().to_string(),
        "fit_ker_ev": fit_ker,
        "oscillations": maps,
        "projections": projections,
        "chirp": chirp,
        "warnings": warnings,
    });
    let dir = ctx.out_dir()?;
    write_json(&dir.join("fit.json"), &summary)?;
    println!("fit: {used} histograms -> {}", dir.join("fit.json").display());
    Ok(())
}

fn outcome_json(o: &Outcome) -> Value {
    json!({"id": o.id, "name": o.name, "passed": o.passed, "detail": o.detail, "seconds": o.seconds})
}

pub fn selfcheck(ctx: &Context, only: &[u8], write_report: bool) -> Result<(), CliError> {
    let seed = ctx.cfg.simulation.seed;
    let suite = Suite::new(seed)?;
    let mut outcomes = Vec::new();
    let ids: Vec<u8> = if only.is_empty() {
        h2asym::acceptance::CRITERIA.iter().map(|c| c.0).collect()
    } else {
        only.to_vec()
    };
    for id in ids {
        let o = suite.run(id);
        println!("{o}");
        outcomes.push(o);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("selfcheck: {} passed, {failed} failed (seed {seed})", outcomes.len() - failed);
    if write_report {
        let prov = ctx.provenance();
        let report = json!({
            "provenance": prov.json(),
            "outcomes": outcomes.iter().map(outcome_json).collect::<Vec<_>>(),
        });
        write_json(&ctx.out_dir()?.join("selfcheck.json"), &report)?;
    }
    if failed > 0 {
        return Err(CliError::AcceptanceFailed {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}
