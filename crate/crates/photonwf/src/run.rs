//! Scenario execution: stage pipeline, CSV outputs and `summary.txt`.
//!
//! Every stage writes `stage_<i>_<name>.csv` into the output directory. Field
//! snapshots are flattened in row-major order with `x` slowest; complex values
//! take two columns. Numbers are printed with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use photonwf_core::dynamics::{
    evolve_leapfrog_strided, evolve_spectral, schrodinger_residual, spectral_trajectory, Wavefunction,
};
use photonwf_core::kspace::{gaussian_wavepacket, symmetrize, KGrid, ModeSet};
use photonwf_core::observables::{
    commensurate_band, energy_total, local_observables, localization_study, number_total, VolumeBox,
};
use photonwf_core::synthesis::{
    db_from_rs, fields_from_potential, max_divergence, rs_from_db, synthesize_phi, synthesize_potential,
    synthesize_psi, FieldSnapshot, Part,
};
use photonwf_core::transforms::{
    apply_timedomain, apply_to_snapshot, discretization_tolerance, spectral_multiplier, truncation_tolerance,
    TimeSeries, TransformKind, TransformSpec,
};
use photonwf_core::{Units, C64};

use crate::fft::RustFft3;
use crate::scenario::{fmt_f64, EvolveScheme, FieldChoice, Scenario, Stage, StateSpec};

/// Process exit codes, also listed in every summary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_STAGE_FAILED: i32 = 1;
pub const EXIT_INVALID_SCENARIO: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const SUMMARY_FILE: &str = "summary.txt";
pub const FAILED_FILE: &str = "FAILED";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum StageError {
    #[error(transparent)]
    Core(#[from] photonwf_core::Error),
    #[error("{0}")]
    Io(String),
}

impl From<csv::Error> for StageError {
    fn from(e: csv::Error) -> Self {
        StageError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StageStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub index: usize,
    pub name: &'static str,
    pub status: StageStatus,
    pub wall_time: f64,
    pub output: Option<String>,
    pub scalars: Vec<(String, f64)>,
    pub notes: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub info: Vec<(String, String)>,
    pub defaults: Vec<(String, String)>,
    pub stages: Vec<StageRecord>,
}

impl RunSummary {
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.status == StageStatus::Ok)
    }

    pub fn exit_code(&self) -> i32 {
        if self.succeeded() {
            EXIT_OK
        } else {
            EXIT_STAGE_FAILED
        }
    }

    /// Looks up `stage.<i>.<name>`.
    pub fn scalar(&self, index: usize, name: &str) -> Option<f64> {
        let st = self.stages.iter().find(|s| s.index == index)?;
        st.scalars.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// `summary.txt` contents. Everything above the `[wall_time_seconds]`
    /// section depends only on the scenario.
    pub fn render(&self) -> String {
        let mut s = String::from("# photonwf run summary\n");
        let status = if self.succeeded() { "ok" } else { "failed" };
        let _ = writeln!(s, "status = {status}");
        for (k, v) in &self.info {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (k, v) in &self.defaults {
            let _ = writeln!(s, "default.{k} = {v}");
        }
        let _ = writeln!(s, "stages_executed = {}", self.stages.len());
        for st in &self.stages {
            let p = format!("stage.{}", st.index);
            let _ = writeln!(s, "{p}.name = {}", st.name);
            match &st.status {
                StageStatus::Ok => {
                    let _ = writeln!(s, "{p}.status = ok");
                }
                StageStatus::Failed(msg) => {
                    let _ = writeln!(s, "{p}.status = failed");
                    let _ = writeln!(s, "{p}.error = {}", msg.replace('\n', " "));
                }
            }
            if let Some(o) = &st.output {
                let _ = writeln!(s, "{p}.output = {o}");
            }
            for (k, v) in &st.scalars {
                let _ = writeln!(s, "{p}.{k} = {}", fmt_f64(*v));
            }
            for (k, v) in &st.notes {
                let _ = writeln!(s, "{p}.{k} = {v}");
            }
        }
        s.push_str("\n[wall_time_seconds]\n");
        for st in &self.stages {
            let _ = writeln!(s, "stage.{} = {:.6}", st.index, st.wall_time);
        }
        s.push_str("\n[exit_codes]\n");
        for (k, v) in [
            ("ok", EXIT_OK),
            ("stage_failed", EXIT_STAGE_FAILED),
            ("invalid_scenario", EXIT_INVALID_SCENARIO),
            ("io_error", EXIT_IO),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Builds the initial amplitudes described by the scenario.
pub fn build_state(scenario: &Scenario, grid: &KGrid) -> photonwf_core::Result<ModeSet> {
    match &scenario.state {
        StateSpec::Empty => Ok(ModeSet::zeros(grid)),
        StateSpec::Wavepacket {
            k0,
            sigma_k,
            helicity,
            amplitude,
        } => gaussian_wavepacket(grid, *k0, *sigma_k, *helicity, *amplitude),
        StateSpec::Modes { list, symmetrize: sym } => {
            let mut m = ModeSet::zeros(grid);
            for (idx, h, a) in list {
                let i = grid.index_of(*idx).expect("mode validated at parse time");
                m.set(i, *h, m.amp(i, *h) + a);
            }
            Ok(if *sym { symmetrize(&m) } else { m })
        }
        StateSpec::Random { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let raw = ModeSet::from_fn(grid, |_, _| {
                C64::new(rng.gen_range(-0.5..0.5) * scale, rng.gen_range(-0.5..0.5) * scale)
            });
            Ok(symmetrize(&raw))
        }
    }
}

struct Synthesized {
    field: FieldChoice,
    part: Part,
    snap: FieldSnapshot,
}

struct Pipeline<'a> {
    grid: KGrid,
    units: Units,
    modes: ModeSet,
    time: f64,
    last: Option<Synthesized>,
    fft: &'a RustFft3,
    out: &'a Path,
}

type Scalars = Vec<(String, f64)>;
type Notes = Vec<(String, String)>;

fn num(v: f64) -> String {
    fmt_f64(v)
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), StageError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()
        .map_err(|e| StageError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn write_field(path: &Path, snap: &FieldSnapshot) -> Result<(), StageError> {
    let n = snap.n;
    let h = snap.box_length / n as f64;
    let rows = snap.values.iter().enumerate().map(|(m, v)| {
        let idx = [m / (n * n), (m / n) % n, m % n];
        let mut row: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        row.extend(idx.iter().map(|&i| num(i as f64 * h)));
        for c in v {
            row.push(num(c.re));
            row.push(num(c.im));
        }
        row
    });
    write_csv(
        path,
        &[
            "ix", "iy", "iz", "x", "y", "z", "re_x", "im_x", "re_y", "im_y", "re_z", "im_z",
        ],
        rows,
    )
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        a.abs() / b.abs()
    }
}

impl Pipeline<'_> {
    fn synthesize(&mut self, field: FieldChoice, part: Part, path: &Path) -> Result<(Scalars, Notes), StageError> {
        let (m, t, u, fft) = (&self.modes, self.time, &self.units, self.fft);
        let mut sc: Scalars = vec![("time".into(), t)];
        let snap = match field {
            FieldChoice::Psi => {
                let s = synthesize_psi(m, t, part, u, fft);
                if part == Part::Plus {
                    let h = energy_total(m, u);
                    sc.push(("energy_total".into(), h));
                    sc.push(("parseval_defect".into(), rel(s.integral_norm_sqr() - h, h)));
                }
                s
            }
            FieldChoice::Phi => {
                let s = synthesize_phi(m, t, part, u, fft);
                if part == Part::Plus {
                    let n = number_total(m);
                    sc.push(("number_total".into(), n));
                    sc.push(("parseval_defect".into(), rel(s.integral_norm_sqr() - n, n)));
                }
                s
            }
            FieldChoice::Potential => synthesize_potential(m, t, u, fft),
            FieldChoice::Displacement => fields_from_potential(m, t, u, fft).0,
            FieldChoice::Magnetic => fields_from_potential(m, t, u, fft).1,
            FieldChoice::Rs => {
                let (d, b) = fields_from_potential(m, t, u, fft);
                let rs = rs_from_db(&d, &b, u)?;
                let psi = synthesize_psi(m, t, Part::Plus, u, fft);
                sc.push(("max_deviation_vs_psi_plus".into(), rs.max_abs_diff(&psi)));
                rs
            }
        };
        sc.push(("integral_norm_sqr".into(), snap.integral_norm_sqr()));
        sc.push(("max_norm".into(), snap.max_norm()));
        sc.push(("max_imag".into(), snap.max_imag()));
        sc.push(("max_divergence".into(), max_divergence(&snap, fft)));
        write_field(path, &snap)?;
        self.last = Some(Synthesized { field, part, snap });
        Ok((sc, vec![("field".into(), field.name().into())]))
    }

    fn transform(&mut self, kind: TransformKind, path: &Path) -> Result<(Scalars, Notes), StageError> {
        let last = self
            .last
            .as_ref()
            .expect("validated: a synthesized field precedes every transform");
        let spec = TransformSpec::new(kind);
        let (u, fft) = (&self.units, self.fft);
        let out = apply_to_snapshot(spec, &last.snap, &self.grid, last.part, u, fft)?;
        let back = apply_to_snapshot(spec.inverse(), &out, &self.grid, last.part, u, fft)?;
        let mut sc: Scalars = vec![
            ("time".into(), last.snap.time),
            ("roundtrip_max_error".into(), back.max_abs_diff(&last.snap)),
            ("integral_norm_sqr".into(), out.integral_norm_sqr()),
        ];
        let t = last.snap.time;
        let next_field = match (last.field, kind) {
            (FieldChoice::Psi, TransformKind::TPlus) => {
                let direct = synthesize_phi(&self.modes, t, last.part, u, fft);
                sc.push(("max_deviation_vs_phi".into(), out.max_abs_diff(&direct)));
                FieldChoice::Phi
            }
            (FieldChoice::Phi, TransformKind::InvTPlus) => {
                let direct = synthesize_psi(&self.modes, t, last.part, u, fft);
                sc.push(("max_deviation_vs_psi".into(), out.max_abs_diff(&direct)));
                FieldChoice::Psi
            }
            (f, _) => f,
        };
        write_field(path, &out)?;
        let part = last.part;
        self.last = Some(Synthesized {
            field: next_field,
            part,
            snap: out,
        });
        Ok((sc, vec![("kind".into(), kind.name().into())]))
    }

    fn evolve(
        &mut self,
        scheme: EvolveScheme,
        dt: f64,
        steps: usize,
        record_every: usize,
        path: &Path,
    ) -> Result<(Scalars, Notes), StageError> {
        let (u, fft) = (&self.units, self.fft);
        let t0 = self.time;
        let mut recorded: Vec<usize> = (0..=steps).step_by(record_every).collect();
        if *recorded.last().unwrap_or(&0) != steps {
            recorded.push(steps);
        }
        let times: Vec<f64> = recorded.iter().map(|&j| t0 + j as f64 * dt).collect();
        let mut sc: Scalars = vec![("dt".into(), dt), ("final_time".into(), t0 + steps as f64 * dt)];
        match scheme {
            EvolveScheme::Spectral => {
                let h0 = energy_total(&self.modes, u);
                let n0 = number_total(&self.modes);
                let mut rows = Vec::new();
                let (mut dh, mut dn) = (0.0f64, 0.0f64);
                for &t in &times {
                    let m = evolve_spectral(&self.modes, t, u);
                    let (h, n) = (energy_total(&m, u), number_total(&m));
                    dh = dh.max(rel(h - h0, h0));
                    dn = dn.max(rel(n - n0, n0));
                    rows.push(vec![num(t), num(h), num(n)]);
                }
                write_csv(path, &["time", "energy", "number"], rows)?;
                sc.push(("energy_max_rel_change".into(), dh));
                sc.push(("number_max_rel_change".into(), dn));
                if steps >= 2 {
                    let probe = [t0, t0 + dt, t0 + 2.0 * dt];
                    let traj = spectral_trajectory(&self.modes, Wavefunction::Psi, &probe, u, fft)?;
                    sc.push(("schrodinger_residual".into(), schrodinger_residual(&traj, u, fft)?));
                }
            }
            EvolveScheme::Leapfrog => {
                let (d0, b0) = fields_from_potential(&self.modes, t0, u, fft);
                let traj = evolve_leapfrog_strided(&d0, &b0, dt, steps, record_every, u, fft)?;
                let e0 = traj.states()[0].integral_norm_sqr();
                let mut rows = Vec::new();
                let (mut drift, mut last_err) = (0.0f64, 0.0f64);
                for (t, s) in traj.times().iter().zip(traj.states()) {
                    let exact = synthesize_psi(&self.modes, *t, Part::Plus, u, fft);
                    let e = s.integral_norm_sqr();
                    let err = rel(s.l2_diff(&exact), exact.l2());
                    drift = drift.max(rel(e - e0, e0));
                    last_err = err;
                    rows.push(vec![num(*t), num(e), num(err)]);
                }
                write_csv(path, &["time", "energy", "rel_error_vs_spectral"], rows)?;
                sc.push(("energy_drift".into(), drift));
                sc.push(("final_rel_error_vs_spectral".into(), last_err));
                let (d_final, _) = db_from_rs(traj.last().expect("trajectory holds the initial state"), u);
                let (d_exact, _) = fields_from_potential(&self.modes, t0 + steps as f64 * dt, u, fft);
                sc.push(("final_displacement_l2_error".into(), d_final.l2_diff(&d_exact)));
                if traj.len() >= 3 && steps.is_multiple_of(record_every) {
                    sc.push(("schrodinger_residual".into(), schrodinger_residual(&traj, u, fft)?));
                }
            }
        }
        self.time = t0 + steps as f64 * dt;
        Ok((sc, vec![]))
    }

    fn observables(
        &mut self,
        volumes: &[VolumeBox],
        times: Option<&[f64]>,
        path: &Path,
    ) -> Result<(Scalars, Notes), StageError> {
        let now = [self.time];
        let times = times.unwrap_or(&now);
        let mut rows = Vec::new();
        let mut sc: Scalars = Vec::new();
        let mut notes: Notes = Vec::new();
        let l = self.grid.box_length();
        let covers = (volumes.iter().map(VolumeBox::volume).sum::<f64>() - l * l * l).abs() <= 1e-12 * l * l * l;
        for (j, &t) in times.iter().enumerate() {
            let r = local_observables(&self.modes, volumes, t, &self.units, self.fft)?;
            for (i, v) in r.per_volume.iter().enumerate() {
                let (lo, hi) = (v.volume.lower(), v.volume.upper());
                let mut row = vec![num(t), i.to_string()];
                row.extend(lo.iter().chain(hi.iter()).map(|x| num(*x)));
                row.extend([v.h_local, v.n_local, v.e_dot, v.n_dot].map(num));
                rows.push(row);
            }
            if j == 0 {
                sc.push(("h_total".into(), r.h_total));
                sc.push(("n_total".into(), r.n_total));
                sc.push(("sum_h_local".into(), r.sum_h_local()));
                sc.push(("sum_n_local".into(), r.sum_n_local()));
                if covers {
                    sc.push(("partition_defect_h".into(), rel(r.sum_h_local() - r.h_total, r.h_total)));
                    sc.push(("partition_defect_n".into(), rel(r.sum_n_local() - r.n_total, r.n_total)));
                }
                sc.push(("warnings".into(), r.warnings.len() as f64));
                for (w, msg) in r.warnings.iter().enumerate() {
                    notes.push((format!("warning.{w}"), msg.clone()));
                }
            }
        }
        write_csv(
            path,
            &[
                "time", "volume", "x0", "y0", "z0", "x1", "y1", "z1", "h_local", "n_local", "e_dot", "n_dot",
            ],
            rows,
        )?;
        Ok((sc, notes))
    }

    fn localization(
        &mut self,
        volume: &VolumeBox,
        m_max: i64,
        band_dk: Option<f64>,
        path: &Path,
    ) -> Result<(Scalars, Notes), StageError> {
        let band = match band_dk {
            None => commensurate_band(volume, m_max),
            Some(dk) => {
                let mut b = Vec::new();
                for x in -m_max..=m_max {
                    for y in -m_max..=m_max {
                        for z in -m_max..=m_max {
                            b.push([x as f64 * dk, y as f64 * dk, z as f64 * dk]);
                        }
                    }
                }
                b
            }
        };
        let table = localization_study(volume, &band)?;
        let m = band.len();
        let mut rows = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                rows.push(vec![i.to_string(), j.to_string(), num(table.get(i, j))]);
            }
        }
        write_csv(path, &["i", "j", "overlap"], rows)?;
        let mut sc: Scalars = vec![
            ("band_size".into(), m as f64),
            ("max_off_diagonal".into(), table.max_off_diagonal),
        ];
        if let Some(dk) = band_dk {
            let d = volume.dims();
            let x = 0.5 * dk * d[0].min(d[1]).min(d[2]);
            sc.push(("sinc_envelope_bound".into(), 1.0 / x));
        }
        Ok((sc, vec![]))
    }

    fn timedomain(
        &mut self,
        kind: TransformKind,
        omega: f64,
        window: f64,
        dt: f64,
        outputs: usize,
        path: &Path,
    ) -> Result<(Scalars, Notes), StageError> {
        let u = &self.units;
        let m = (window / dt).round() as usize;
        let two_sided = !matches!(
            kind,
            TransformKind::TPlus | TransformKind::TMinus | TransformKind::InvTPlus | TransformKind::InvTMinus
        );
        let len = outputs + if two_sided { 2 * m } else { m };
        let tone = |t: f64| C64::from_polar(1.0, -omega * t);
        let series = TimeSeries::sample(0.0, dt, len, tone)?;
        let spec = TransformSpec::new(kind);
        let out = apply_timedomain(spec, &series, window, u)?;
        let want = spectral_multiplier(spec, omega, Part::Plus, u)?;
        let mut rows = Vec::new();
        let (mut max_rel, mut max_phase, mut max_mag) = (0.0f64, 0.0f64, 0.0f64);
        let mut ratio = C64::new(0.0, 0.0);
        for (j, o) in out.samples().iter().enumerate() {
            let t = out.time(j);
            let input = tone(t);
            ratio = o / input;
            let q = ratio / want;
            max_rel = max_rel.max((q - 1.0).norm());
            max_phase = max_phase.max(q.arg().abs());
            max_mag = max_mag.max((q.norm() - 1.0).abs());
            rows.push(vec![
                num(t),
                num(input.re),
                num(input.im),
                num(o.re),
                num(o.im),
                num(ratio.re),
                num(ratio.im),
            ]);
        }
        write_csv(
            path,
            &["time", "in_re", "in_im", "out_re", "out_im", "ratio_re", "ratio_im"],
            rows,
        )?;
        let sc: Scalars = vec![
            ("ratio_re".into(), ratio.re),
            ("ratio_im".into(), ratio.im),
            ("expected_re".into(), want.re),
            ("expected_im".into(), want.im),
            ("max_rel_error".into(), max_rel),
            ("max_magnitude_error".into(), max_mag),
            ("max_phase_error".into(), max_phase),
            ("truncation_tolerance".into(), truncation_tolerance(kind, omega, window)),
            (
                "discretization_tolerance".into(),
                discretization_tolerance(kind, omega, dt),
            ),
        ];
        Ok((sc, vec![("kind".into(), kind.name().into())]))
    }
}

/// Runs every stage of `scenario`, writing outputs into `out_dir`.
///
/// Stage failures stop the pipeline, leave earlier outputs in place and are
/// reported in the summary and in a `FAILED` marker; only I/O on the output
/// directory itself is an `Err`.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<RunSummary, RunError> {
    fs::create_dir_all(out_dir).map_err(|e| RunError::io(out_dir, e))?;
    let marker = out_dir.join(FAILED_FILE);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| RunError::io(&marker, e))?;
    }
    let grid = scenario.kgrid();
    let units = scenario.units.units();
    let fft = RustFft3::new();
    let mut summary = RunSummary {
        info: vec![
            ("units".into(), scenario.units.name().into()),
            ("grid.n_per_axis".into(), scenario.grid.n_per_axis.to_string()),
            ("grid.box_length".into(), fmt_f64(scenario.grid.box_length)),
            ("grid.kappa".into(), fmt_f64(scenario.grid.kappa)),
            ("grid.retained_modes".into(), grid.n_retained().to_string()),
            ("stages_planned".into(), scenario.stages.len().to_string()),
        ],
        defaults: scenario.echoed_defaults(),
        stages: Vec::new(),
    };

    let start = Instant::now();
    let state = build_state(scenario, &grid);
    let modes = match state {
        Ok(m) => m,
        Err(e) => {
            summary.info.push(("state.error".into(), e.to_string()));
            fs::write(&marker, format!("state\n{e}\n")).map_err(|e| RunError::io(&marker, e))?;
            summary.stages.push(StageRecord {
                index: 0,
                name: "state",
                status: StageStatus::Failed(e.to_string()),
                wall_time: start.elapsed().as_secs_f64(),
                output: None,
                scalars: vec![],
                notes: vec![],
            });
            write_summary(&summary, out_dir)?;
            return Ok(summary);
        }
    };
    summary
        .info
        .push(("state.energy_total".into(), fmt_f64(energy_total(&modes, &units))));
    summary
        .info
        .push(("state.number_total".into(), fmt_f64(number_total(&modes))));

    let mut p = Pipeline {
        grid,
        units,
        modes,
        time: 0.0,
        last: None,
        fft: &fft,
        out: out_dir,
    };
    for (i, stage) in scenario.stages.iter().enumerate() {
        let file = format!("stage_{i}_{}.csv", stage.name());
        let path = p.out.join(&file);
        let t = Instant::now();
        let result = match stage {
            Stage::Synthesize { field, part } => p.synthesize(*field, *part, &path),
            Stage::Transform { kind } => p.transform(*kind, &path),
            Stage::Evolve {
                scheme,
                dt,
                steps,
                record_every,
            } => p.evolve(*scheme, scenario.evolve_dt(*dt), *steps, *record_every, &path),
            Stage::Observables { volumes, times } => p.observables(volumes, times.as_deref(), &path),
            Stage::LocalizationStudy { volume, m_max, band_dk } => p.localization(volume, *m_max, *band_dk, &path),
            Stage::TimedomainDemo {
                kind,
                omega,
                window,
                dt,
                outputs,
            } => p.timedomain(*kind, *omega, *window, *dt, *outputs, &path),
        };
        let wall_time = t.elapsed().as_secs_f64();
        match result {
            Ok((scalars, notes)) => summary.stages.push(StageRecord {
                index: i,
                name: stage.name(),
                status: StageStatus::Ok,
                wall_time,
                output: Some(file),
                scalars,
                notes,
            }),
            Err(e) => {
                let msg = e.to_string();
                fs::write(&marker, format!("{}\nstage.{i}: {msg}\n", stage.name()))
                    .map_err(|e| RunError::io(&marker, e))?;
                summary.stages.push(StageRecord {
                    index: i,
                    name: stage.name(),
                    status: StageStatus::Failed(msg),
                    wall_time,
                    output: None,
                    scalars: vec![],
                    notes: vec![],
                });
                break;
            }
        }
    }
    write_summary(&summary, out_dir)?;
    Ok(summary)
}

fn write_summary(summary: &RunSummary, out_dir: &Path) -> Result<(), RunError> {
    let path = out_dir.join(SUMMARY_FILE);
    fs::write(&path, summary.render()).map_err(|e| RunError::io(&path, e))
}

/// The part of a rendered summary that must be identical across reruns.
pub fn deterministic_part(rendered: &str) -> &str {
    rendered.split("\n[wall_time_seconds]").next().unwrap_or(rendered)
}
