use std::path::Path;

use wirange::config::KeyValues;
use wirange::estimate::{run_track, track_rmse, TrackGrid, TrackProtocol};
use wirange::ingest::{load_groundtruth, load_surface, read_raw_audio, save_surface, stft, StftParams};
use wirange::simulate::{synth_surface, truth_track, SceneConfig};
use wirange::tonal::{estimate_range_tonal, estimate_wi_tonal};
use wirange::transform::{build_striation_matrix, valid_striation_count};
use wirange::whiten::whiten;
use wirange::{
    estimate_range, estimate_wi, linear_grid, partition_bands_within, BandPartition, ComplexSurface,
    EstimateResult, ParameterHypothesis, RangeRate, SearchGrid,
};

use crate::args::{
    BandArgs, BetaGridArgs, Command, CompareArgs, EstimateRangeArgs, EstimateWiArgs, HypothesisArgs,
    Method, SimulateArgs, StftArgs, SurfaceArgs, SweepArg, TrackArgs,
};
use crate::output::{join, opt, path_text, Report};
use crate::CliError;

const DEFAULT_GUARD_HZ: f64 = 0.4;
const DEFAULT_NEIGHBORHOOD_HZ: f64 = 1.0;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Stft(a) => stft_cmd(a),
        Command::TransformDebug(a) => transform_debug(a),
        Command::WhitenDiag(a) => whiten_diag(a),
        Command::EstimateRange(a) => estimate_range_cmd(a),
        Command::EstimateWi(a) => estimate_wi_cmd(a),
        Command::Track(a) => track(a),
        Command::Compare(a) => compare(a),
    }
}

/// Band partition and tonal noise neighbourhood resolved from the flags and
/// the optional band file, flags taking precedence.
struct Band {
    partition: BandPartition,
    neighborhood_hz: f64,
    tonal_freqs: Vec<f64>,
    guard_hz: f64,
}

impl Band {
    fn resolve(args: &BandArgs, surface: &ComplexSurface) -> Result<Self, CliError> {
        let kv = match &args.band_config {
            Some(path) => KeyValues::read(path)?,
            None => KeyValues::default(),
        };
        let tonal_freqs = match &args.tonal_freqs {
            Some(v) => v.clone(),
            None => kv.list("tonal_freqs")?,
        };
        let guard_hz = match args.guard {
            Some(g) => g,
            None => kv.get_or("guard_hz", DEFAULT_GUARD_HZ)?,
        };
        let neighborhood_hz = match args.neighborhood {
            Some(n) => n,
            None => kv.get_or("neighborhood_hz", DEFAULT_NEIGHBORHOOD_HZ)?,
        };
        let freqs = surface.freqs();
        let lo = kv.get_or("band_lo", freqs[0])?;
        let hi = kv.get_or("band_hi", freqs[freqs.len() - 1])?;
        let partition = partition_bands_within(&freqs, lo, hi, &tonal_freqs, guard_hz)?;
        Ok(Self {
            partition,
            neighborhood_hz,
            tonal_freqs,
            guard_hz,
        })
    }

    fn params(&self) -> Vec<(&'static str, String)> {
        vec![
            ("tonal_freqs", join(&self.tonal_freqs)),
            ("guard_hz", self.guard_hz.to_string()),
            ("neighborhood_hz", self.neighborhood_hz.to_string()),
            ("broadband_bins", self.partition.broadband.len().to_string()),
        ]
    }
}

fn range_rate(values: &[f64]) -> Result<RangeRate, CliError> {
    match values {
        [] => Err(CliError::Usage("--rdot needs at least one value".into())),
        [v] => Ok(RangeRate::Constant(*v)),
        v => Ok(RangeRate::PerStep(v.to_vec())),
    }
}

/// The loaded surface, its band and the assumed range rate.
struct Inputs {
    surface: ComplexSurface,
    band: Band,
    rdot: RangeRate,
}

impl Inputs {
    fn load(args: &SurfaceArgs) -> Result<Self, CliError> {
        let surface = load_surface(&args.surface)?;
        let band = Band::resolve(&args.band, &surface)?;
        let rdot = range_rate(&args.rdot)?;
        Ok(Self { surface, band, rdot })
    }

    fn params(&self, args: &SurfaceArgs) -> Vec<(&'static str, String)> {
        let mut p = vec![
            ("surface", args.surface.display().to_string()),
            ("rdot", join(&args.rdot)),
        ];
        p.extend(self.band.params());
        p
    }
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut cfg = SceneConfig::from_key_values(&KeyValues::read(&a.config)?)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let (surface, q) = synth_surface(&cfg)?;
    save_surface(&surface, &a.out)?;
    let params = [
        ("config", a.config.display().to_string()),
        ("seed", cfg.seed.to_string()),
    ];
    if let Some(path) = &a.truth {
        let mut truth = Report::new("simulate", &params);
        truth.row(["time_s", "range_m"]);
        for (t, r) in truth_track(&cfg)? {
            truth.row([t, r]);
        }
        truth.emit(Some(path))?;
    }
    let mut summary = Report::new("simulate", &params);
    summary.row(["n_snapshots", "n_bins", "true_range_m", "beta"]);
    summary.row([
        surface.n_snapshots().to_string(),
        surface.n_bins().to_string(),
        q.range_m.to_string(),
        q.beta.to_string(),
    ]);
    summary.emit(None)
}

fn stft_cmd(a: StftArgs) -> Result<(), CliError> {
    let (samples, sample_rate) = read_raw_audio(&a.input)?;
    let params = StftParams {
        sample_rate,
        segment_s: a.segment,
        zeropad_s: a.zeropad,
        overlap_frac: a.overlap,
    };
    let surface = stft(&samples, &params, [a.fmin, a.fmax])?;
    save_surface(&surface, &a.out)?;
    let mut summary = Report::new(
        "stft",
        &[
            ("input", a.input.display().to_string()),
            ("sample_rate", sample_rate.to_string()),
            ("segment_s", a.segment.to_string()),
            ("zeropad_s", a.zeropad.to_string()),
            ("overlap", a.overlap.to_string()),
            ("fmin", a.fmin.to_string()),
            ("fmax", a.fmax.to_string()),
        ],
    );
    summary.row(["n_snapshots", "n_bins", "t0_s", "t_delta_s", "f0_hz", "df_hz"]);
    summary.row([
        surface.n_snapshots() as f64,
        surface.n_bins() as f64,
        surface.t0(),
        surface.t_delta(),
        surface.f0(),
        surface.df(),
    ]);
    summary.emit(None)
}

/// Striation matrix of a single hypothesis over its own valid set.
fn single_hypothesis(a: &HypothesisArgs) -> Result<(Inputs, wirange::transform::StriationMatrix), CliError> {
    let inputs = Inputs::load(&a.common)?;
    let s = &inputs.surface;
    let band = &inputs.band.partition;
    let grid = SearchGrid::new(vec![a.range], inputs.rdot.clone(), vec![a.beta])?;
    let (_, ids) = valid_striation_count(s.n_snapshots(), s.t_delta(), &s.freqs(), band, &grid)?;
    let q = ParameterHypothesis::new(a.range, inputs.rdot.clone(), a.beta)?;
    let z = build_striation_matrix(s, &q, band, &ids)?;
    Ok((inputs, z))
}

fn hypothesis_report(command: &str, a: &HypothesisArgs, inputs: &Inputs) -> Report {
    let mut params = inputs.params(&a.common);
    params.push(("range", a.range.to_string()));
    params.push(("beta", a.beta.to_string()));
    Report::new(command, &params)
}

fn transform_debug(a: HypothesisArgs) -> Result<(), CliError> {
    let (inputs, z) = single_hypothesis(&a)?;
    let mut out = hypothesis_report("transform-debug", &a, &inputs);
    out.row(["l", "k", "re", "im", "abs"]);
    let bins = &inputs.band.partition.broadband;
    for (row, l) in z.striation_ids.iter().enumerate() {
        for (col, k) in bins.iter().enumerate() {
            let v = z.get(row, col).unwrap_or_default();
            out.row([l.to_string(), k.to_string(), v.re.to_string(), v.im.to_string(), v.norm().to_string()]);
        }
    }
    out.emit(a.common.out.as_deref())
}

fn whiten_diag(a: HypothesisArgs) -> Result<(), CliError> {
    let (inputs, z) = single_hypothesis(&a)?;
    let xw = whiten(&z)?;
    let w = xw
        .whitened()
        .ok_or_else(|| CliError::Usage("whitening produced no diagnostics".into()))?;
    let mut out = hypothesis_report("whiten-diag", &a, &inputs);
    out.row(["k", "f_k", "rho_hat"]);
    for (&k, rho) in inputs.band.partition.broadband.iter().zip(&w.diagnostics.rho_hat) {
        out.row([k.to_string(), inputs.surface.freq(k).to_string(), rho.to_string()]);
    }
    out.emit(a.common.out.as_deref())
}

fn write_curve(mut out: Report, label: &str, est: &EstimateResult, dest: Option<&Path>) -> Result<(), CliError> {
    out.row([label, "loglik"]);
    for (v, ll) in est.grid.iter().zip(&est.loglik) {
        out.row([v, ll]);
    }
    out.row([
        "argmax".to_string(),
        est.argmax.to_string(),
        est.loglik[est.argmax_index].to_string(),
    ]);
    out.emit(dest)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Broadband => "broadband",
        Method::Tonal => "tonal",
    }
}

fn beta_grid(g: &BetaGridArgs) -> Result<Vec<f64>, CliError> {
    Ok(linear_grid(g.bmin, g.bmax, g.bstep)?)
}

fn estimate_range_cmd(a: EstimateRangeArgs) -> Result<(), CliError> {
    let inputs = Inputs::load(&a.common)?;
    let grid = linear_grid(a.grid.rmin, a.grid.rmax, a.grid.rstep)?;
    let (s, band) = (&inputs.surface, &inputs.band.partition);
    let est = match a.method {
        Method::Broadband => estimate_range(s, &inputs.rdot, a.beta, &grid, band)?,
        Method::Tonal => estimate_range_tonal(s, &inputs.rdot, a.beta, &grid, band, inputs.band.neighborhood_hz)?,
    };
    let mut params = inputs.params(&a.common);
    params.extend([
        ("method", method_name(a.method).to_string()),
        ("beta", a.beta.to_string()),
        ("rmin", a.grid.rmin.to_string()),
        ("rmax", a.grid.rmax.to_string()),
        ("rstep", a.grid.rstep.to_string()),
        ("m", est.diagnostics.m.to_string()),
    ]);
    write_curve(Report::new("estimate-range", &params), "range_m", &est, a.common.out.as_deref())
}

fn estimate_wi_cmd(a: EstimateWiArgs) -> Result<(), CliError> {
    let inputs = Inputs::load(&a.common)?;
    let grid = beta_grid(&a.grid)?;
    let (s, band) = (&inputs.surface, &inputs.band.partition);
    let est = match a.method {
        Method::Broadband => estimate_wi(s, a.range, &inputs.rdot, &grid, band)?,
        Method::Tonal => estimate_wi_tonal(s, a.range, &inputs.rdot, &grid, band, inputs.band.neighborhood_hz)?,
    };
    let mut params = inputs.params(&a.common);
    params.extend([
        ("method", method_name(a.method).to_string()),
        ("range", a.range.to_string()),
        ("bmin", a.grid.bmin.to_string()),
        ("bmax", a.grid.bmax.to_string()),
        ("bstep", a.grid.bstep.to_string()),
        ("m", est.diagnostics.m.to_string()),
    ]);
    write_curve(Report::new("estimate-wi", &params), "beta", &est, a.common.out.as_deref())
}

fn track(a: TrackArgs) -> Result<(), CliError> {
    let inputs = Inputs::load(&a.common)?;
    let truth = a.truth.as_deref().map(load_groundtruth).transpose()?;
    let grid = match (a.span_frac, a.rmin, a.rmax) {
        (Some(span_frac), None, None) => {
            if truth.is_none() {
                return Err(CliError::Usage("--span-frac needs --truth".into()));
            }
            TrackGrid::AroundTruth { span_frac, step_m: a.rstep }
        }
        (None, Some(lo), Some(hi)) => TrackGrid::Fixed(linear_grid(lo, hi, a.rstep)?),
        _ => {
            return Err(CliError::Usage(
                "give either --span-frac with --truth, or both --rmin and --rmax".into(),
            ))
        }
    };
    let protocol = TrackProtocol {
        target_m: a.target_m,
        stride: a.stride,
        first_end: a.first_end,
        beta: a.beta,
        rdot: inputs.rdot.clone(),
        grid,
    };
    let points = run_track(&inputs.surface, &protocol, &inputs.band.partition, truth.as_ref())?;

    let mut params = inputs.params(&a.common);
    params.extend([
        ("beta", a.beta.to_string()),
        ("target_m", a.target_m.to_string()),
        ("stride", a.stride.to_string()),
        ("first_end", a.first_end.to_string()),
        ("truth", path_text(&a.truth)),
        ("span_frac", opt(a.span_frac)),
        ("rmin", opt(a.rmin)),
        ("rmax", opt(a.rmax)),
        ("rstep", a.rstep.to_string()),
    ]);
    let mut out = Report::new("track", &params);
    out.row(["end_index", "time_s", "window_len", "truth_m", "range_m", "error_m", "status"]);
    for p in &points {
        let status = match &p.outcome {
            Ok(_) => "ok".to_string(),
            Err(e) => format!("\"{}\"", e.replace('"', "'")),
        };
        out.row([
            p.end_index.to_string(),
            p.time_s.to_string(),
            p.window_len.to_string(),
            opt(p.truth_m),
            opt(p.range_m()),
            opt(p.error_m()),
            status,
        ]);
    }
    out.row(["rmse".to_string(), opt(track_rmse(&points))]);
    out.emit(a.common.out.as_deref())
}

fn compare(a: CompareArgs) -> Result<(), CliError> {
    let inputs = Inputs::load(&a.common)?;
    let (s, band, nb) = (&inputs.surface, &inputs.band.partition, inputs.band.neighborhood_hz);
    let mut params = inputs.params(&a.common);
    let (label, broadband, tonal) = match a.sweep {
        SweepArg::Range => {
            let (Some(beta), Some(lo), Some(hi)) = (a.beta, a.rmin, a.rmax) else {
                return Err(CliError::Usage("a range sweep needs --beta, --rmin and --rmax".into()));
            };
            let grid = linear_grid(lo, hi, a.rstep)?;
            params.extend([
                ("sweep", "range".to_string()),
                ("beta", beta.to_string()),
                ("rmin", lo.to_string()),
                ("rmax", hi.to_string()),
                ("rstep", a.rstep.to_string()),
            ]);
            (
                "range_m",
                estimate_range(s, &inputs.rdot, beta, &grid, band)?,
                estimate_range_tonal(s, &inputs.rdot, beta, &grid, band, nb)?,
            )
        }
        SweepArg::Wi => {
            let Some(range) = a.range else {
                return Err(CliError::Usage("an invariant sweep needs --range".into()));
            };
            let grid = beta_grid(&a.beta_grid)?;
            params.extend([
                ("sweep", "wi".to_string()),
                ("range", range.to_string()),
                ("bmin", a.beta_grid.bmin.to_string()),
                ("bmax", a.beta_grid.bmax.to_string()),
                ("bstep", a.beta_grid.bstep.to_string()),
            ]);
            (
                "beta",
                estimate_wi(s, range, &inputs.rdot, &grid, band)?,
                estimate_wi_tonal(s, range, &inputs.rdot, &grid, band, nb)?,
            )
        }
    };
    let mut out = Report::new("compare", &params);
    out.row([label, "loglik_broadband", "loglik_tonal"]);
    for ((v, b), t) in broadband.grid.iter().zip(&broadband.loglik).zip(&tonal.loglik) {
        out.row([v, b, t]);
    }
    out.row(["argmax".to_string(), broadband.argmax.to_string(), tonal.argmax.to_string()]);
    out.row([
        "steps_apart".to_string(),
        broadband.argmax_index.abs_diff(tonal.argmax_index).to_string(),
    ]);
    out.emit(a.common.out.as_deref())
}
