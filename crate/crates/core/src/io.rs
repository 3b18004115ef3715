//! Run configuration, binary field snapshots, and the JSON/CSV outputs of a solve.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Keys:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `grid.n` | 16 | points per axis (even, ≥ 8) |
//! | `grid.L` | 8 | box is `[−L, L)³` |
//! | `model.a` | 1 | mass |
//! | `model.nonlinearity` | `power` | `power` or `table` |
//! | `model.p` | 2.5 | exponent of `f(s) = s^{p−2}`; for tables, the exponent of the mountain-pass floor |
//! | `model.f_table` | | CSV of `s,f` knots, relative to the config file |
//! | `model.V`, `model.K` | `constant:0.2`, `constant:1` | `constant:c`, `rational:amp,gamma`, `exponential:amp,sigma` |
//! | `solver.tol_outer` | 1e-6 | |
//! | `solver.max_outer` | 500 | |
//! | `solver.step0` | 1 | |
//! | `solver.armijo_c` | 1e-4 | |
//! | `solver.starts` | 3 | |
//! | `solver.memory` | 8 | quasi-Newton pairs, 0 for plain gradient steps |
//! | `solver.initial` | `gaussian` | `gaussian` or `random` |
//! | `solver.sigma` | 1 | width of the initial guess |
//! | `solver.tol_inner` | 1e-9 | |
//! | `solver.unique_tol` | 1e-6 | |
//! | `solver.inner_starts` | 2 | |
//! | `solver.inner_max_iter` | 5000 | |
//! | `seed` | 0 | |
//! | `output.dir` | `out` | relative to the config file |

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::field::{Grid, Repr, SpinorField};
use crate::model::{Nonlinearity, Profile, ProblemModel};
use crate::solver::{GroundStateResult, InitialKind, SolveOptions};
use crate::{Complex64, Error, Result};

const KEYS: &[(&str, &str)] = &[
    ("grid.n", "16"),
    ("grid.L", "8"),
    ("model.a", "1"),
    ("model.nonlinearity", "power"),
    ("model.p", "2.5"),
    ("model.f_table", ""),
    ("model.V", "constant:0.2"),
    ("model.K", "constant:1"),
    ("solver.tol_outer", "1e-6"),
    ("solver.max_outer", "500"),
    ("solver.step0", "1"),
    ("solver.armijo_c", "1e-4"),
    ("solver.starts", "3"),
    ("solver.memory", "8"),
    ("solver.initial", "gaussian"),
    ("solver.sigma", "1"),
    ("solver.tol_inner", "1e-9"),
    ("solver.unique_tol", "1e-6"),
    ("solver.inner_starts", "2"),
    ("solver.inner_max_iter", "5000"),
    ("seed", "0"),
    ("output.dir", "out"),
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub half_length: f64,
    pub a: f64,
    pub nonlinearity: Nonlinearity,
    pub v: Profile,
    pub k: Profile,
    pub solver: SolveOptions,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Effective `key → value` map, defaults included.
    pub echo: BTreeMap<String, String>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        msg: format!("{key}: cannot parse '{value}'"),
    })
}

fn parse_profile(key: &str, value: &str, line: usize) -> Result<Profile> {
    let bad = |msg: &str| Error::Config { line, msg: format!("{key}: {msg} in '{value}'") };
    let (kind, args) = value.split_once(':').ok_or_else(|| bad("expected kind:params"))?;
    let nums: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("non-numeric parameter"))?;
    match (kind.trim(), nums.as_slice()) {
        ("constant", [c]) => Ok(Profile::Constant(*c)),
        ("rational", [amp, gamma]) => Ok(Profile::RationalDecay { amp: *amp, gamma: *gamma }),
        ("exponential", [amp, sigma]) => Ok(Profile::Exponential { amp: *amp, sigma: *sigma }),
        _ => Err(bad("unknown profile or wrong parameter count")),
    }
}

/// `s,f` knots, one pair per line; `#` comments and a non-numeric header line are skipped.
pub fn read_f_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut knots = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match parts.as_slice() {
            [s, f] => s.parse::<f64>().ok().zip(f.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(k) => knots.push(k),
            None if i == 0 => {}
            None => {
                return Err(Error::Config { line: i + 1, msg: format!("{}: expected 's,f'", path.display()) });
            }
        }
    }
    Ok(knots)
}

impl RunConfig {
    /// Parses config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut values: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Config {
                line: line_no,
                msg: format!("expected key = value, got '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config { line: line_no, msg: format!("unknown key '{key}'") });
            }
            if values.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
                return Err(Error::Config { line: line_no, msg: format!("duplicate key '{key}'") });
            }
        }
        let get = |key: &str| -> (String, usize) {
            values.get(key).cloned().unwrap_or_else(|| {
                let d = KEYS.iter().find(|(k, _)| *k == key).expect("known key").1;
                (d.to_string(), 0)
            })
        };
        let num_f = |key: &str| -> Result<f64> {
            let (v, l) = get(key);
            parse_num(key, &v, l)
        };
        let num_u = |key: &str| -> Result<usize> {
            let (v, l) = get(key);
            parse_num(key, &v, l)
        };

        let p = num_f("model.p")?;
        let (nl_kind, nl_line) = get("model.nonlinearity");
        let nonlinearity = match nl_kind.as_str() {
            "power" => Nonlinearity::power(p).map_err(|e| Error::Config { line: nl_line, msg: e.to_string() })?,
            "table" => {
                let (path, line) = get("model.f_table");
                if path.is_empty() {
                    return Err(Error::Config { line, msg: "model.f_table is required for a table nonlinearity".into() });
                }
                let knots = read_f_table(&base.join(path))?;
                Nonlinearity::table(knots).map_err(|e| Error::Config { line, msg: e.to_string() })?
            }
            other => return Err(Error::Config { line: nl_line, msg: format!("unknown nonlinearity '{other}'") }),
        };
        let (v_raw, v_line) = get("model.V");
        let (k_raw, k_line) = get("model.K");
        let (init, init_line) = get("solver.initial");
        let sigma = num_f("solver.sigma")?;
        let initial = match init.as_str() {
            "gaussian" => InitialKind::GaussianBump { sigma, spinor: None },
            "random" => InitialKind::Random { sigma },
            other => return Err(Error::Config { line: init_line, msg: format!("unknown initial guess '{other}'") }),
        };
        let seed: u64 = {
            let (v, l) = get("seed");
            parse_num("seed", &v, l)?
        };
        let mut solver = SolveOptions {
            tol_outer: num_f("solver.tol_outer")?,
            max_outer: num_u("solver.max_outer")?,
            step0: num_f("solver.step0")?,
            armijo_c: num_f("solver.armijo_c")?,
            starts: num_u("solver.starts")?,
            seed,
            initial,
            memory: num_u("solver.memory")?,
            ..SolveOptions::default()
        };
        solver.inner.tol = num_f("solver.tol_inner")?;
        solver.inner.unique_tol = num_f("solver.unique_tol")?;
        solver.inner.starts = num_u("solver.inner_starts")?;
        solver.inner.max_iter = num_u("solver.inner_max_iter")?;
        solver.inner.seed = seed;
        if nl_kind == "table" {
            solver.floor_exponent = Some(p);
        }
        solver.validate().map_err(|e| Error::Config { line: 0, msg: e.to_string() })?;

        let cfg = Self {
            n: num_u("grid.n")?,
            half_length: num_f("grid.L")?,
            a: num_f("model.a")?,
            nonlinearity,
            v: parse_profile("model.V", &v_raw, v_line)?,
            k: parse_profile("model.K", &k_raw, k_line)?,
            solver,
            seed,
            output_dir: base.join(get("output.dir").0),
            echo: KEYS.iter().map(|(k, _)| (k.to_string(), get(k).0)).collect(),
        };
        // surface grid and mass problems as config errors
        cfg.model().map_err(|e| Error::Config { line: 0, msg: e.to_string() })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.half_length)
    }

    pub fn model(&self) -> Result<ProblemModel> {
        ProblemModel::new(self.grid()?, self.a, self.v.clone(), self.k.clone(), self.nonlinearity.clone())
    }
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

const MAGIC: &[u8; 4] = b"NDRC";
const VERSION: u32 = 1;
const HEADER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeader {
    pub n: usize,
    pub half_length: f64,
    pub mass: f64,
    pub repr: Repr,
}

/// Serializes a field: 32-byte header, then `(re, im)` little-endian `f64`
/// pairs with `x` fastest, then `y`, `z`, and the spinor index slowest.
pub fn encode_field(u: &SpinorField, mass: f64) -> Vec<u8> {
    let grid = u.grid();
    let mut out = Vec::with_capacity(HEADER + 16 * u.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_length().to_le_bytes());
    out.extend_from_slice(&mass.to_le_bytes());
    out.push(match u.repr() {
        Repr::Physical => 0,
        Repr::Frequency => 1,
    });
    out.extend_from_slice(&[0u8; 3]);
    for z in u.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8], path: &Path) -> Result<(SpinorField, FieldHeader)> {
    let bad = |msg: String| Error::FieldFormat { path: path.to_path_buf(), msg };
    if bytes.len() < HEADER {
        return Err(bad(format!("file has {} bytes, header needs {HEADER}", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let version = u32_at(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = u32_at(8) as usize;
    let half_length = f64_at(12);
    let mass = f64_at(20);
    let repr = match bytes[28] {
        0 => Repr::Physical,
        1 => Repr::Frequency,
        r => return Err(bad(format!("unknown representation tag {r}"))),
    };
    let grid = Grid::new(n, half_length).map_err(|e| bad(e.to_string()))?;
    let count = 4 * grid.points();
    if bytes.len() != HEADER + 16 * count {
        return Err(bad(format!("expected {} bytes for n = {n}, found {}", HEADER + 16 * count, bytes.len())));
    }
    let data = bytes[HEADER..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..16].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let u = SpinorField::from_data(grid, repr, data)?;
    Ok((u, FieldHeader { n, half_length, mass, repr }))
}

pub fn write_field(path: &Path, u: &SpinorField, mass: f64) -> Result<()> {
    write_atomic(path, &encode_field(u, mass))
}

pub fn read_field(path: &Path) -> Result<(SpinorField, FieldHeader)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field(&bytes, path)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub c: f64,
    pub residual_self: f64,
    pub residual_minus: f64,
    pub residual_full: f64,
    pub iterations: usize,
    pub t_check: f64,
    pub converged: bool,
    pub config_echo: BTreeMap<String, String>,
}

impl Summary {
    pub fn new(result: &GroundStateResult, config: &RunConfig) -> Self {
        Self {
            c: result.c,
            residual_self: result.residuals.r_self,
            residual_minus: result.residuals.r_minus,
            residual_full: result.residual_full,
            iterations: result.iterations,
            t_check: result.t_check,
            converged: result.converged(),
            config_echo: config.echo.clone(),
        }
    }
}

pub fn trace_csv(result: &GroundStateResult) -> String {
    let mut out = String::from("iter,m_value,residual,step,inner_iters\n");
    for e in &result.trace {
        out.push_str(&format!("{},{:.17e},{:.6e},{:.6e},{}\n", e.iter, e.m_value, e.residual, e.step, e.inner_iters));
    }
    out
}

/// `|u|` binned over shells of width `dx` around the origin.
pub fn radial_profile(u: &SpinorField) -> Vec<(f64, f64, f64)> {
    let u = u.to_physical();
    let grid = *u.grid();
    let dx = grid.dx();
    let bins = (grid.half_length() * 3f64.sqrt() / dx).ceil() as usize + 1;
    let mut sum = vec![0.0; bins];
    let mut max = vec![0.0f64; bins];
    let mut count = vec![0usize; bins];
    for idx in 0..grid.points() {
        let b = ((grid.radius(idx) / dx) as usize).min(bins - 1);
        let m = u.modulus_at(idx);
        sum[b] += m;
        max[b] = max[b].max(m);
        count[b] += 1;
    }
    (0..bins)
        .filter(|&b| count[b] > 0)
        .map(|b| ((b as f64 + 0.5) * dx, sum[b] / count[b] as f64, max[b]))
        .collect()
}

pub fn profile_csv(u: &SpinorField) -> String {
    let mut out = String::from("r,mean_abs_u,max_abs_u\n");
    for (r, mean, max) in radial_profile(u) {
        out.push_str(&format!("{r:.6},{mean:.10e},{max:.10e}\n"));
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes `summary.json`, `field.bin`, `trace.csv` and `profile.csv` into `dir`.
pub fn write_solve_outputs(dir: &Path, result: &GroundStateResult, config: &RunConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&dir.join("summary.json"), &Summary::new(result, config))?;
    write_field(&dir.join("field.bin"), &result.u_star, config.a)?;
    write_atomic(&dir.join("trace.csv"), trace_csv(result).as_bytes())?;
    write_atomic(&dir.join("profile.csv"), profile_csv(&result.u_star).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn defaults_and_echo() {
        let cfg = RunConfig::parse("", Path::new("/tmp")).unwrap();
        assert_eq!((cfg.n, cfg.half_length, cfg.a), (16, 8.0, 1.0));
        assert_eq!(cfg.v, Profile::Constant(0.2));
        assert_eq!(cfg.echo.len(), KEYS.len());
        assert_eq!(cfg.output_dir, Path::new("/tmp/out"));
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let err = RunConfig::parse("grid.n = 16\nbogus = 1\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = RunConfig::parse("# c\nmodel.V = wobbly:1\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        let err = RunConfig::parse("grid.n = 8\ngrid.n = 8\n", Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }));
        assert!(RunConfig::parse("grid.n = 7", Path::new(".")).is_err());
        assert!(RunConfig::parse("just words", Path::new(".")).is_err());
    }

    #[test]
    fn profiles_parse() {
        let cfg = RunConfig::parse("model.V = rational:0.3, 1.5\nmodel.K = exponential:2,0.5", Path::new(".")).unwrap();
        assert_eq!(cfg.v, Profile::RationalDecay { amp: 0.3, gamma: 1.5 });
        assert_eq!(cfg.k, Profile::Exponential { amp: 2.0, sigma: 0.5 });
    }

    #[test]
    fn field_bytes_round_trip() {
        let grid = Grid::new(8, 3.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = SpinorField::random(grid, Repr::Physical, &mut rng);
        let bytes = encode_field(&u, 1.25);
        assert_eq!(bytes.len(), 32 + 16 * 4 * 512);
        let (back, h) = decode_field(&bytes, Path::new("mem")).unwrap();
        assert_eq!(h, FieldHeader { n: 8, half_length: 3.5, mass: 1.25, repr: Repr::Physical });
        assert!(back.data().iter().zip(u.data()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
        assert!(decode_field(&bytes[..100], Path::new("mem")).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(decode_field(&wrong, Path::new("mem")).is_err());
    }
}
