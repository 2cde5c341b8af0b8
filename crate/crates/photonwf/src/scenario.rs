//! Scenario documents.
//!
//! A scenario is UTF-8 text of `key = value` lines. `[section]` headers
//! prefix the keys that follow, so these two documents are equivalent:
//!
//! ```text
//! [grid]                      grid.n_per_axis = 16
//! n_per_axis = 16             grid.box_length = 6.283185307179586
//! box_length = 6.283185307179586
//! ```
//!
//! `#` starts a comment. Keys may appear once. Recognized keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `units` | `natural` or `si` | `natural` |
//! | `output.dir` | output directory | `photonwf-out` |
//! | `grid.n_per_axis` | samples per axis, 2..=256 | required |
//! | `grid.box_length` | periodic box side | required |
//! | `grid.kappa` | infrared cutoff | `0` |
//! | `wavepacket.k0` | center wavevector `kx, ky, kz` | required in section |
//! | `wavepacket.sigma_k` | k-space width | required in section |
//! | `wavepacket.helicity` | `+` or `-` | `+` |
//! | `wavepacket.amplitude` | `re` or `re, im` | `1` |
//! | `modes.N` | `mx, my, mz, helicity, re, im` lattice mode | |
//! | `modes.symmetrize` | project onto the symmetric subspace | `true` |
//! | `random.seed` | seed for random amplitudes | `0` |
//! | `random.scale` | amplitude scale | `1` |
//!
//! At most one of `wavepacket`, `modes`, `random` may be given; without
//! any the state is empty. Stages are `[stage.0]`, `[stage.1]`, ... with a
//! `type` key:
//!
//! | type | keys (defaults) |
//! |------|-----------------|
//! | `synthesize` | `field` psi/phi/potential/displacement/magnetic/rs (psi), `part` plus/minus/both (plus) |
//! | `transform` | `kind` one of the eight kinds (required) |
//! | `evolve` | `scheme` spectral/leapfrog (spectral), `dt` (half the leapfrog bound), `steps` (100), `record_every` (1) |
//! | `observables` | `volumes` full/halves/octants (halves) or `volume.N = x0,y0,z0,x1,y1,z1`, `times` (current) |
//! | `localization_study` | `volume` (full box), `m_max` (1), `band_dk` (commensurate) |
//! | `timedomain_demo` | `kind` (T+), `omega` (1), `window` (2000), `dt` (0.01), `outputs` (8) |

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use photonwf_core::dynamics::stability_bound;
use photonwf_core::kspace::{build_grid, Helicity, KGrid};
use photonwf_core::observables::VolumeBox;
use photonwf_core::synthesis::Part;
use photonwf_core::transforms::TransformKind;
use photonwf_core::{Error as CoreError, Units, C64};

/// Largest accepted `grid.n_per_axis`.
pub const MAX_N: usize = 256;
/// Largest accepted kernel length of a time-domain demo, in samples.
pub const MAX_KERNEL_SAMPLES: f64 = 2.0e7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{key}: {msg}")]
    Validation { key: String, msg: String },
}

impl ScenarioError {
    fn invalid(key: impl Into<String>, msg: impl Into<String>) -> Self {
        ScenarioError::Validation {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// Key named by a validation error.
    pub fn key(&self) -> Option<&str> {
        match self {
            ScenarioError::Validation { key, .. } => Some(key),
            ScenarioError::Parse { .. } => None,
        }
    }
}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSystem {
    Natural,
    Si,
}

impl UnitSystem {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "natural" => Some(UnitSystem::Natural),
            "si" | "SI" => Some(UnitSystem::Si),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitSystem::Natural => "natural",
            UnitSystem::Si => "si",
        }
    }

    pub fn units(self) -> Units {
        match self {
            UnitSystem::Natural => Units::natural(),
            UnitSystem::Si => Units::si(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n_per_axis: usize,
    pub box_length: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Empty,
    Wavepacket {
        k0: [f64; 3],
        sigma_k: f64,
        helicity: Helicity,
        amplitude: C64,
    },
    Modes {
        list: Vec<([i64; 3], Helicity, C64)>,
        symmetrize: bool,
    },
    Random {
        seed: u64,
        scale: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldChoice {
    Psi,
    Phi,
    Potential,
    Displacement,
    Magnetic,
    Rs,
}

impl FieldChoice {
    const NAMES: &'static str = "psi, phi, potential, displacement, magnetic, rs";

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "psi" => FieldChoice::Psi,
            "phi" => FieldChoice::Phi,
            "potential" => FieldChoice::Potential,
            "displacement" => FieldChoice::Displacement,
            "magnetic" => FieldChoice::Magnetic,
            "rs" => FieldChoice::Rs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldChoice::Psi => "psi",
            FieldChoice::Phi => "phi",
            FieldChoice::Potential => "potential",
            FieldChoice::Displacement => "displacement",
            FieldChoice::Magnetic => "magnetic",
            FieldChoice::Rs => "rs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolveScheme {
    Spectral,
    Leapfrog,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Synthesize {
        field: FieldChoice,
        part: Part,
    },
    Transform {
        kind: TransformKind,
    },
    Evolve {
        scheme: EvolveScheme,
        dt: f64,
        steps: usize,
        record_every: usize,
    },
    Observables {
        volumes: Vec<VolumeBox>,
        times: Option<Vec<f64>>,
    },
    LocalizationStudy {
        volume: VolumeBox,
        m_max: i64,
        band_dk: Option<f64>,
    },
    TimedomainDemo {
        kind: TransformKind,
        omega: f64,
        window: f64,
        dt: f64,
        outputs: usize,
    },
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Synthesize { .. } => "synthesize",
            Stage::Transform { .. } => "transform",
            Stage::Evolve { .. } => "evolve",
            Stage::Observables { .. } => "observables",
            Stage::LocalizationStudy { .. } => "localization_study",
            Stage::TimedomainDemo { .. } => "timedomain_demo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub units: UnitSystem,
    pub output_dir: PathBuf,
    pub grid: GridSpec,
    pub state: StateSpec,
    pub stages: Vec<Stage>,
    /// Values filled in by defaulting, in document order, as `(key, value)`.
    pub defaults: Vec<(String, String)>,
}

impl Scenario {
    pub fn kgrid(&self) -> KGrid {
        build_grid(self.grid.n_per_axis, self.grid.box_length, self.grid.kappa)
            .expect("grid was validated at parse time")
    }

    /// Replaces the random-state seed, if the state is random.
    pub fn override_seed(&mut self, new_seed: u64) {
        if let StateSpec::Random { seed, .. } = &mut self.state {
            *seed = new_seed;
        }
    }

    /// Switches unit systems and re-validates unit-dependent stage limits.
    pub fn override_units(&mut self, units: UnitSystem) -> Result<()> {
        self.units = units;
        check_stage_limits(self)
    }
}

/// Raw key/value pairs with their line numbers.
#[derive(Debug, Default)]
struct Document {
    entries: BTreeMap<String, (usize, String)>,
}

impl Document {
    fn parse(text: &str) -> Result<Document> {
        let mut doc = Document::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ScenarioError::Parse {
                    line,
                    msg: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim();
                if !valid_key(name) {
                    return Err(ScenarioError::Parse {
                        line,
                        msg: format!("invalid section name `{name}`"),
                    });
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| ScenarioError::Parse {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            let k = k.trim();
            if !valid_key(k) {
                return Err(ScenarioError::Parse {
                    line,
                    msg: format!("invalid key `{k}`"),
                });
            }
            let key = if section.is_empty() {
                k.to_string()
            } else {
                format!("{section}.{k}")
            };
            let v = v.trim().to_string();
            if let Some((first, _)) = doc.entries.get(&key) {
                return Err(ScenarioError::Parse {
                    line,
                    msg: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
            doc.entries.insert(key, (line, v));
        }
        Ok(doc)
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        let dotted = format!("{prefix}.");
        self.entries.keys().any(|k| k.starts_with(&dotted))
    }

    /// Removes and returns `prefix.N` entries, sorted by `N`.
    fn take_indexed(&mut self, prefix: &str) -> Result<Vec<(usize, String)>> {
        let dotted = format!("{prefix}.");
        let keys: Vec<String> = self
            .entries
            .keys()
            .filter(|k| {
                k.strip_prefix(&dotted)
                    .is_some_and(|r| r.chars().all(|c| c.is_ascii_digit()) && !r.is_empty())
            })
            .cloned()
            .collect();
        let mut out = Vec::new();
        for k in keys {
            let idx: usize = k[dotted.len()..]
                .parse()
                .map_err(|_| ScenarioError::invalid(&k, "index is too large"))?;
            out.push((idx, self.take(&k).unwrap_or_default()));
        }
        out.sort_by_key(|(i, _)| *i);
        Ok(out)
    }
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.')
            .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

/// Typed access to a document with defaulting.
struct Reader<'a> {
    doc: &'a mut Document,
    defaults: &'a mut Vec<(String, String)>,
}

impl Reader<'_> {
    fn required(&mut self, key: &str) -> Result<String> {
        self.doc
            .take(key)
            .ok_or_else(|| ScenarioError::invalid(key, "required key is missing"))
    }

    fn or_default(&mut self, key: &str, default: &str) -> String {
        match self.doc.take(key) {
            Some(v) => v,
            None => {
                self.defaults.push((key.to_string(), default.to_string()));
                default.to_string()
            }
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.or_default(key, &fmt_f64(default));
        parse_f64(key, &v)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        let v = self.or_default(key, &default.to_string());
        parse_usize(key, &v)
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| ScenarioError::invalid(key, format!("expected a number, found `{v}`")))?;
    if !x.is_finite() {
        return Err(ScenarioError::invalid(key, "value must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| ScenarioError::invalid(key, format!("expected a non-negative integer, found `{v}`")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|p| parse_f64(key, p)).collect()
}

fn parse_vec3(key: &str, v: &str) -> Result<[f64; 3]> {
    let xs = parse_list(key, v)?;
    <[f64; 3]>::try_from(xs.as_slice())
        .map_err(|_| ScenarioError::invalid(key, format!("expected three comma-separated numbers, found `{v}`")))
}

fn parse_complex(key: &str, v: &str) -> Result<C64> {
    match parse_list(key, v)?.as_slice() {
        [re] => Ok(C64::new(*re, 0.0)),
        [re, im] => Ok(C64::new(*re, *im)),
        _ => Err(ScenarioError::invalid(
            key,
            format!("expected `re` or `re, im`, found `{v}`"),
        )),
    }
}

fn parse_helicity(key: &str, v: &str) -> Result<Helicity> {
    match v.trim() {
        "+" | "plus" | "+1" => Ok(Helicity::Plus),
        "-" | "minus" | "-1" | "−" => Ok(Helicity::Minus),
        other => Err(ScenarioError::invalid(
            key,
            format!("helicity must be + or -, found `{other}`"),
        )),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(ScenarioError::invalid(
            key,
            format!("expected true or false, found `{other}`"),
        )),
    }
}

fn parse_kind(key: &str, v: &str) -> Result<TransformKind> {
    TransformKind::parse(v).ok_or_else(|| {
        let names: Vec<&str> = TransformKind::ALL.iter().map(|k| k.name()).collect();
        ScenarioError::invalid(
            key,
            format!("unknown transform kind `{v}`; valid kinds are {}", names.join(", ")),
        )
    })
}

fn parse_volume(key: &str, v: &str, box_length: f64) -> Result<VolumeBox> {
    let xs = parse_list(key, v)?;
    if xs.len() != 6 {
        return Err(ScenarioError::invalid(key, "expected x0, y0, z0, x1, y1, z1"));
    }
    let b = VolumeBox::new([xs[0], xs[1], xs[2]], [xs[3], xs[4], xs[5]])
        .map_err(|e| ScenarioError::invalid(key, e.to_string()))?;
    if !b.fits_in(box_length) {
        return Err(ScenarioError::invalid(key, "volume extends outside the periodic box"));
    }
    Ok(b)
}

fn preset_volumes(key: &str, name: &str, l: f64) -> Result<Vec<VolumeBox>> {
    let h = 0.5 * l;
    let mk = |lo: [f64; 3], hi: [f64; 3]| VolumeBox::new(lo, hi).expect("preset bounds are ordered");
    Ok(match name {
        "full" => vec![VolumeBox::full(l)],
        "halves" => vec![mk([0.0; 3], [h, l, l]), mk([h, 0.0, 0.0], [l, l, l])],
        "octants" => {
            let mut out = Vec::new();
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        let lo = [a as f64 * h, b as f64 * h, c as f64 * h];
                        out.push(mk(lo, [lo[0] + h, lo[1] + h, lo[2] + h]));
                    }
                }
            }
            out
        }
        other => {
            return Err(ScenarioError::invalid(
                key,
                format!("unknown volume preset `{other}`; use full, halves or octants"),
            ))
        }
    })
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut doc = Document::parse(text)?;
    let mut defaults = Vec::new();
    let mut r = Reader {
        doc: &mut doc,
        defaults: &mut defaults,
    };

    let units_s = r.or_default("units", "natural");
    let units = UnitSystem::parse(&units_s)
        .ok_or_else(|| ScenarioError::invalid("units", format!("expected natural or si, found `{units_s}`")))?;
    let output_dir = PathBuf::from(r.or_default("output.dir", "photonwf-out"));

    let n_s = r.required("grid.n_per_axis")?;
    let n = parse_usize("grid.n_per_axis", &n_s)?;
    if !(2..=MAX_N).contains(&n) {
        return Err(ScenarioError::invalid(
            "grid.n_per_axis",
            format!("must lie in 2..={MAX_N}, found {n}"),
        ));
    }
    let box_length = parse_f64("grid.box_length", &r.required("grid.box_length")?)?;
    if box_length <= 0.0 {
        return Err(ScenarioError::invalid("grid.box_length", "must be positive"));
    }
    let kappa = r.f64_or("grid.kappa", 0.0)?;
    if kappa < 0.0 {
        return Err(ScenarioError::invalid("grid.kappa", "must be non-negative"));
    }
    let grid = match build_grid(n, box_length, kappa) {
        Ok(g) => g,
        Err(CoreError::EmptyGrid { .. }) => {
            return Err(ScenarioError::invalid(
                "grid.kappa",
                "no lattice mode survives the cutoff and Nyquist masking",
            ))
        }
        Err(e) => return Err(ScenarioError::invalid("grid", e.to_string())),
    };

    let state = parse_state(&mut r, &grid)?;
    let stages = parse_stages(&mut r, &grid)?;

    if let Some((key, (line, _))) = doc.entries.iter().next() {
        return Err(ScenarioError::invalid(
            key.clone(),
            format!("unknown key (line {line})"),
        ));
    }
    let scenario = Scenario {
        units,
        output_dir,
        grid: GridSpec {
            n_per_axis: n,
            box_length,
            kappa,
        },
        state,
        stages,
        defaults,
    };
    check_stage_limits(&scenario)?;
    Ok(scenario)
}

fn parse_state(r: &mut Reader, grid: &KGrid) -> Result<StateSpec> {
    let present: Vec<&str> = ["wavepacket", "modes", "random"]
        .into_iter()
        .filter(|p| r.doc.has_prefix(p))
        .collect();
    if present.len() > 1 {
        return Err(ScenarioError::invalid(
            present[1],
            format!("only one state section is allowed, found {}", present.join(" and ")),
        ));
    }
    let band = grid.axis_band();
    match present.first().copied() {
        None => Ok(StateSpec::Empty),
        Some("wavepacket") => {
            let k0 = parse_vec3("wavepacket.k0", &r.required("wavepacket.k0")?)?;
            let sigma_k = parse_f64("wavepacket.sigma_k", &r.required("wavepacket.sigma_k")?)?;
            if sigma_k <= 0.0 {
                return Err(ScenarioError::invalid("wavepacket.sigma_k", "must be positive"));
            }
            let k0n = (k0[0] * k0[0] + k0[1] * k0[1] + k0[2] * k0[2]).sqrt();
            if k0n <= grid.kappa() {
                return Err(ScenarioError::invalid("wavepacket.k0", "|k0| must exceed grid.kappa"));
            }
            if k0.iter().any(|c| c.abs() > band) {
                return Err(ScenarioError::invalid(
                    "wavepacket.k0",
                    format!("every component must lie within the lattice band ±{band}"),
                ));
            }
            let h = r.or_default("wavepacket.helicity", "+");
            let helicity = parse_helicity("wavepacket.helicity", &h)?;
            let a = r.or_default("wavepacket.amplitude", "1");
            let amplitude = parse_complex("wavepacket.amplitude", &a)?;
            Ok(StateSpec::Wavepacket {
                k0,
                sigma_k,
                helicity,
                amplitude,
            })
        }
        Some("modes") => {
            let s = r.or_default("modes.symmetrize", "true");
            let symmetrize = parse_bool("modes.symmetrize", &s)?;
            let mut list = Vec::new();
            for (idx, v) in r.doc.take_indexed("modes")? {
                let key = format!("modes.{idx}");
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                if parts.len() != 6 {
                    return Err(ScenarioError::invalid(key, "expected mx, my, mz, helicity, re, im"));
                }
                let mut m = [0i64; 3];
                for w in 0..3 {
                    m[w] = parts[w].parse().map_err(|_| {
                        ScenarioError::invalid(&key, format!("lattice index `{}` is not an integer", parts[w]))
                    })?;
                }
                if !grid.index_of(m).is_some_and(|i| grid.is_retained(i)) {
                    return Err(ScenarioError::invalid(&key, "mode is outside the retained lattice"));
                }
                let h = parse_helicity(&key, parts[3])?;
                let a = C64::new(parse_f64(&key, parts[4])?, parse_f64(&key, parts[5])?);
                list.push((m, h, a));
            }
            if list.is_empty() {
                return Err(ScenarioError::invalid(
                    "modes",
                    "the modes section lists no mode (use modes.0 = ...)",
                ));
            }
            Ok(StateSpec::Modes { list, symmetrize })
        }
        Some(_) => {
            let seed_s = r.or_default("random.seed", "0");
            let seed: u64 = seed_s.parse().map_err(|_| {
                ScenarioError::invalid("random.seed", format!("expected an unsigned integer, found `{seed_s}`"))
            })?;
            let scale = r.f64_or("random.scale", 1.0)?;
            if scale < 0.0 {
                return Err(ScenarioError::invalid("random.scale", "must be non-negative"));
            }
            Ok(StateSpec::Random { seed, scale })
        }
    }
}

fn parse_stages(r: &mut Reader, grid: &KGrid) -> Result<Vec<Stage>> {
    let mut indices: Vec<usize> = r
        .doc
        .entries
        .keys()
        .filter_map(|k| k.strip_prefix("stage."))
        .filter_map(|rest| rest.split('.').next())
        .filter_map(|i| i.parse().ok())
        .collect();
    indices.sort_unstable();
    indices.dedup();
    for (expect, &got) in indices.iter().enumerate() {
        if expect != got {
            return Err(ScenarioError::invalid(
                format!("stage.{expect}.type"),
                format!("stages must be numbered 0, 1, 2, ... without gaps (found stage.{got})"),
            ));
        }
    }
    let l = grid.box_length();
    let mut stages = Vec::new();
    // Fields produced so far that a transform can act on: (field, part).
    let mut last_field: Option<(FieldChoice, Part)> = None;
    for i in indices {
        let key = |k: &str| format!("stage.{i}.{k}");
        let ty = r.required(&key("type"))?;
        let stage = match ty.as_str() {
            "synthesize" => {
                let f = r.or_default(&key("field"), "psi");
                let field = FieldChoice::parse(&f).ok_or_else(|| {
                    ScenarioError::invalid(key("field"), format!("unknown field `{f}`; valid fields are {}", FieldChoice::NAMES))
                })?;
                let p = r.or_default(&key("part"), "plus");
                let part = match p.as_str() {
                    "plus" | "+" => Part::Plus,
                    "minus" | "-" => Part::Minus,
                    "both" => Part::Both,
                    other => {
                        return Err(ScenarioError::invalid(
                            key("part"),
                            format!("expected plus, minus or both, found `{other}`"),
                        ))
                    }
                };
                last_field = Some((field, part));
                Stage::Synthesize { field, part }
            }
            "transform" => {
                let kind = parse_kind(&key("kind"), &r.required(&key("kind"))?)?;
                match last_field {
                    Some((FieldChoice::Psi | FieldChoice::Phi, Part::Plus | Part::Minus)) => {}
                    _ => {
                        return Err(ScenarioError::invalid(
                            key("type"),
                            "transform needs an earlier synthesize stage of psi or phi with part plus or minus",
                        ))
                    }
                }
                Stage::Transform { kind }
            }
            "evolve" => {
                let s = r.or_default(&key("scheme"), "spectral");
                let scheme = match s.as_str() {
                    "spectral" => EvolveScheme::Spectral,
                    "leapfrog" => EvolveScheme::Leapfrog,
                    other => {
                        return Err(ScenarioError::invalid(
                            key("scheme"),
                            format!("expected spectral or leapfrog, found `{other}`"),
                        ))
                    }
                };
                // The bound scales as 1/c; it is re-checked once units are final.
                let dt = match r.doc.take(&key("dt")) {
                    Some(v) => parse_f64(&key("dt"), &v)?,
                    None => f64::NAN,
                };
                if dt <= 0.0 {
                    return Err(ScenarioError::invalid(key("dt"), "must be positive"));
                }
                let steps = r.usize_or(&key("steps"), 100)?;
                let record_every = r.usize_or(&key("record_every"), 1)?;
                if record_every == 0 {
                    return Err(ScenarioError::invalid(key("record_every"), "must be at least 1"));
                }
                if steps > 10_000_000 {
                    return Err(ScenarioError::invalid(key("steps"), "at most 10000000 steps"));
                }
                Stage::Evolve {
                    scheme,
                    dt,
                    steps,
                    record_every,
                }
            }
            "observables" => {
                let explicit = r.doc.take_indexed(&key("volume"))?;
                let volumes = if explicit.is_empty() {
                    let preset = r.or_default(&key("volumes"), "halves");
                    preset_volumes(&key("volumes"), &preset, l)?
                } else {
                    if r.doc.take(&key("volumes")).is_some() {
                        return Err(ScenarioError::invalid(
                            key("volumes"),
                            "give either a preset or explicit volume.N entries, not both",
                        ));
                    }
                    explicit
                        .iter()
                        .map(|(j, v)| parse_volume(&key(&format!("volume.{j}")), v, l))
                        .collect::<Result<Vec<_>>>()?
                };
                for a in 0..volumes.len() {
                    for b in a + 1..volumes.len() {
                        if volumes[a].overlaps(&volumes[b]) {
                            return Err(ScenarioError::invalid(
                                key(&format!("volume.{b}")),
                                format!("overlaps volume {a}"),
                            ));
                        }
                    }
                }
                let times = match r.doc.take(&key("times")) {
                    Some(v) => Some(parse_list(&key("times"), &v)?),
                    None => None,
                };
                Stage::Observables { volumes, times }
            }
            "localization_study" => {
                let volume = match r.doc.take(&key("volume")) {
                    Some(v) => parse_volume(&key("volume"), &v, l)?,
                    None => {
                        r.defaults.push((key("volume"), format!("0, 0, 0, {l}, {l}, {l}")));
                        VolumeBox::full(l)
                    }
                };
                let m_max = r.usize_or(&key("m_max"), 1)?;
                if m_max > 6 {
                    return Err(ScenarioError::invalid(key("m_max"), "at most 6"));
                }
                let band_dk = match r.doc.take(&key("band_dk")) {
                    Some(v) => {
                        let d = parse_f64(&key("band_dk"), &v)?;
                        if d <= 0.0 {
                            return Err(ScenarioError::invalid(key("band_dk"), "must be positive"));
                        }
                        Some(d)
                    }
                    None => None,
                };
                Stage::LocalizationStudy {
                    volume,
                    m_max: m_max as i64,
                    band_dk,
                }
            }
            "timedomain_demo" => {
                let k = r.or_default(&key("kind"), "T+");
                let kind = parse_kind(&key("kind"), &k)?;
                let omega = r.f64_or(&key("omega"), 1.0)?;
                let window = r.f64_or(&key("window"), 2000.0)?;
                let dt = r.f64_or(&key("dt"), 0.01)?;
                let outputs = r.usize_or(&key("outputs"), 8)?;
                for (name, v) in [("omega", omega), ("window", window), ("dt", dt)] {
                    if v <= 0.0 {
                        return Err(ScenarioError::invalid(key(name), "must be positive"));
                    }
                }
                if window < dt {
                    return Err(ScenarioError::invalid(key("window"), "must span at least one step"));
                }
                if window / dt > MAX_KERNEL_SAMPLES {
                    return Err(ScenarioError::invalid(
                        key("window"),
                        format!("window/dt must not exceed {MAX_KERNEL_SAMPLES:e}"),
                    ));
                }
                if outputs == 0 || outputs > 10_000 {
                    return Err(ScenarioError::invalid(key("outputs"), "must lie in 1..=10000"));
                }
                Stage::TimedomainDemo {
                    kind,
                    omega,
                    window,
                    dt,
                    outputs,
                }
            }
            other => {
                return Err(ScenarioError::invalid(
                    key("type"),
                    format!(
                        "unknown stage type `{other}`; valid types are synthesize, transform, evolve, observables, localization_study, timedomain_demo"
                    ),
                ))
            }
        };
        stages.push(stage);
    }
    Ok(stages)
}

/// Fills unit-dependent defaults and checks leapfrog stability.
fn check_stage_limits(s: &Scenario) -> Result<()> {
    let units = s.units.units();
    let bound = stability_bound(s.grid.n_per_axis, s.grid.box_length, &units);
    for (i, st) in s.stages.iter().enumerate() {
        if let Stage::Evolve {
            scheme: EvolveScheme::Leapfrog,
            dt,
            ..
        } = st
        {
            if dt.is_finite() && *dt > bound {
                return Err(ScenarioError::invalid(
                    format!("stage.{i}.dt"),
                    format!("exceeds the leapfrog stability bound {bound:e}"),
                ));
            }
        }
    }
    Ok(())
}

impl Scenario {
    /// Step used by evolve stage `index`: the given `dt`, or half the leapfrog
    /// stability bound when none was set.
    pub fn evolve_dt(&self, dt: f64) -> f64 {
        if dt.is_finite() {
            dt
        } else {
            0.5 * stability_bound(self.grid.n_per_axis, self.grid.box_length, &self.units.units())
        }
    }

    /// Defaults echoed in the summary, including unit-dependent ones.
    pub fn echoed_defaults(&self) -> Vec<(String, String)> {
        let mut out = self.defaults.clone();
        for (i, st) in self.stages.iter().enumerate() {
            if let Stage::Evolve { dt, .. } = st {
                if !dt.is_finite() {
                    out.push((format!("stage.{i}.dt"), fmt_f64(self.evolve_dt(*dt))));
                }
            }
        }
        out
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "grid {}^3, L = {}, kappa = {}, {} stage(s)",
            self.grid.n_per_axis,
            self.grid.box_length,
            self.grid.kappa,
            self.stages.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[grid]
n_per_axis = 8
box_length = 6.283185307179586

[wavepacket]
k0 = 1, 0, 0
sigma_k = 0.5

[stage.0]
type = observables
";

    #[test]
    fn minimal_document_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.grid.kappa, 0.0);
        assert_eq!(s.units, UnitSystem::Natural);
        assert!(matches!(
            s.state,
            StateSpec::Wavepacket {
                helicity: Helicity::Plus,
                ..
            }
        ));
        assert_eq!(s.stages.len(), 1);
        let keys: Vec<&str> = s.defaults.iter().map(|(k, _)| k.as_str()).collect();
        for k in [
            "grid.kappa",
            "wavepacket.helicity",
            "wavepacket.amplitude",
            "stage.0.volumes",
        ] {
            assert!(keys.contains(&k), "{k} not echoed");
        }
    }

    #[test]
    fn evolve_dt_defaults_to_half_the_bound() {
        let s = parse_scenario(&format!("{MINIMAL}\n[stage.1]\ntype = evolve\nscheme = leapfrog\n")).unwrap();
        let Stage::Evolve { dt, .. } = s.stages[1] else {
            panic!()
        };
        let bound = stability_bound(8, std::f64::consts::TAU, &Units::natural());
        assert_eq!(s.evolve_dt(dt), 0.5 * bound);
        assert!(s.echoed_defaults().iter().any(|(k, _)| k == "stage.1.dt"));
    }

    #[test]
    fn zero_grid_names_key() {
        let e = parse_scenario("grid.n_per_axis = 0\ngrid.box_length = 1").unwrap_err();
        assert_eq!(e.key(), Some("grid.n_per_axis"));
    }

    #[test]
    fn bad_transform_kind_lists_all_kinds() {
        let doc = format!("{MINIMAL}\n[stage.1]\ntype = synthesize\n[stage.2]\ntype = transform\nkind = T0\n");
        let e = parse_scenario(&doc).unwrap_err();
        assert_eq!(e.key(), Some("stage.2.kind"));
        let msg = e.to_string();
        for k in TransformKind::ALL {
            assert!(msg.contains(k.name()), "{msg}");
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let e = parse_scenario("[grid]\nn_per_axis 8\n").unwrap_err();
        assert_eq!(
            e,
            ScenarioError::Parse {
                line: 2,
                msg: "expected `key = value`, found `n_per_axis 8`".into()
            }
        );
        let e = parse_scenario("a = 1\na = 2\n").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 2, .. }));
        let e = parse_scenario("[grid\n").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 1, .. }));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_scenario(&format!("{MINIMAL}colour = red\n")).unwrap_err();
        assert_eq!(e.key(), Some("stage.0.colour"));
    }

    #[test]
    fn stage_preconditions() {
        let e = parse_scenario(&format!("{MINIMAL}\n[stage.1]\ntype = transform\nkind = T+\n")).unwrap_err();
        assert_eq!(e.key(), Some("stage.1.type"));
        let e = parse_scenario(&format!("{MINIMAL}\n[stage.2]\ntype = evolve\n")).unwrap_err();
        assert_eq!(e.key(), Some("stage.1.type"));
        let e = parse_scenario(&format!(
            "{MINIMAL}\n[stage.1]\ntype = evolve\nscheme = leapfrog\ndt = 10\n"
        ))
        .unwrap_err();
        assert_eq!(e.key(), Some("stage.1.dt"));
        let e = parse_scenario(&format!(
            "{MINIMAL}\n[stage.1]\ntype = observables\nvolume.0 = 0,0,0,2,2,2\nvolume.1 = 1,1,1,3,3,3\n"
        ))
        .unwrap_err();
        assert_eq!(e.key(), Some("stage.1.volume.1"));
        let e = parse_scenario(&format!("{MINIMAL}\n[stage.1]\ntype = timedomain_demo\nwindow = -1\n")).unwrap_err();
        assert_eq!(e.key(), Some("stage.1.window"));
    }

    #[test]
    fn state_preconditions() {
        let base = "grid.n_per_axis = 8\ngrid.box_length = 6.283185307179586\n";
        let e = parse_scenario(&format!("{base}wavepacket.k0 = 1,0,0\nwavepacket.sigma_k = 0\n")).unwrap_err();
        assert_eq!(e.key(), Some("wavepacket.sigma_k"));
        let e = parse_scenario(&format!("{base}wavepacket.k0 = 9,0,0\nwavepacket.sigma_k = 1\n")).unwrap_err();
        assert_eq!(e.key(), Some("wavepacket.k0"));
        let e = parse_scenario(&format!("{base}modes.0 = 4,0,0,+,1,0\n")).unwrap_err();
        assert_eq!(e.key(), Some("modes.0"));
        let e = parse_scenario(&format!("{base}random.seed = 1\nmodes.0 = 1,0,0,+,1,0\n")).unwrap_err();
        assert_eq!(e.key(), Some("random"));
        let e = parse_scenario("grid.n_per_axis = 2\ngrid.box_length = 1\n").unwrap_err();
        assert_eq!(e.key(), Some("grid.kappa"));
    }

    #[test]
    fn empty_pipeline_is_valid() {
        let s = parse_scenario("grid.n_per_axis = 4\ngrid.box_length = 1 # comment\n").unwrap();
        assert!(s.stages.is_empty());
        assert_eq!(s.state, StateSpec::Empty);
    }
}
