//! Scenario configuration: a TOML file with flat dotted keys, overridable
//! from the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use prepay::mortgage::MortgageKind;
use toml::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Float,
    Str,
    Bool,
    Path,
    /// Float or the string "atm".
    Rate,
    FloatList,
    StrList,
}

struct Key {
    name: &'static str,
    kind: Kind,
    default: Option<fn() -> Value>,
}

const fn key(name: &'static str, kind: Kind, default: Option<fn() -> Value>) -> Key {
    Key { name, kind, default }
}

const KEYS: &[Key] = &[
    key("seed", Kind::Int, None),
    key("n_paths", Kind::Int, Some(|| Value::Integer(20_000))),
    key("curve", Kind::Path, None),
    key("vols", Kind::Path, None),
    key("loans", Kind::Path, None),
    key("instruments", Kind::Str, Some(|| Value::String("counterdiag10y".into()))),
    key("mortgage.kind", Kind::Str, Some(|| Value::String("bullet".into()))),
    key("mortgage.notional", Kind::Float, Some(|| Value::Float(1e6))),
    key("mortgage.rate", Kind::Rate, Some(|| Value::String("atm".into()))),
    key("mortgage.maturity_years", Kind::Int, Some(|| Value::Integer(10))),
    key("cpr.model", Kind::Str, Some(|| Value::String("logistic".into()))),
    key("cpr.lambda", Kind::Float, Some(|| Value::Float(0.0))),
    key("cpr.lambda_max", Kind::Float, Some(|| Value::Float(0.1))),
    key("cpr.epsilon_star", Kind::Float, Some(|| Value::Float(0.0))),
    key("cpr.alpha", Kind::FloatList, None),
    key("zeta", Kind::Float, Some(|| Value::Float(0.0))),
    key("model.lambda", Kind::Float, None),
    key("model.eta", Kind::Float, None),
    key(
        "hedge.strategies",
        Kind::StrList,
        Some(|| Value::Array(["linear", "diag9", "single-5y5y", "full"].map(|s| Value::String(s.into())).to_vec())),
    ),
    key("hedge.no_short", Kind::Bool, Some(|| Value::Boolean(false))),
    key("greeks.bump", Kind::Float, Some(|| Value::Float(prepay::greeks::DEFAULT_BUMP))),
    key("fit.bins", Kind::Int, Some(|| Value::Integer(56))),
    key("fit.lower", Kind::Float, Some(|| Value::Float(-0.015))),
    key("fit.upper", Kind::Float, Some(|| Value::Float(0.04))),
    key("schedule.cpr", Kind::Float, None),
    key("paths.export", Kind::Int, Some(|| Value::Integer(0))),
    key("synth.seed", Kind::Int, Some(|| Value::Integer(20_180_123))),
    key("synth.periods", Kind::Int, Some(|| Value::Integer(24))),
    key("synth.loans_per_period", Kind::Int, Some(|| Value::Integer(2000))),
    key("out_dir", Kind::Path, Some(|| Value::String("out".into()))),
];

/// Environment variable that overrides `out_dir` from the config file.
pub const OUT_DIR_ENV: &str = "PREPAY_OUT_DIR";

fn lookup(name: &str) -> CliResult<&'static Key> {
    KEYS.iter()
        .find(|k| k.name == name)
        .ok_or_else(|| CliError::input(format!("unknown config key '{name}'")))
}

/// Where a value came from, for error messages and path resolution.
#[derive(Debug, Clone, PartialEq)]
enum Origin {
    File(PathBuf),
    Flag,
    Env,
    Default,
}

#[derive(Debug, Clone)]
struct Entry {
    value: Value,
    origin: Origin,
}

/// Effective key/value set after merging file, environment and flags.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&name, t, out),
            other => out.push((name, other.clone())),
        }
    }
}

fn check_type(name: &str, kind: Kind, value: &Value, origin: &str) -> CliResult<Value> {
    let bad = || CliError::input(format!("{origin}: key '{name}' has the wrong type ({value})"));
    let v = match (kind, value) {
        (Kind::Int, Value::Integer(i)) if *i >= 0 => value.clone(),
        (Kind::Float, Value::Float(_)) => value.clone(),
        (Kind::Float, Value::Integer(i)) => Value::Float(*i as f64),
        (Kind::Str | Kind::Path, Value::String(_)) => value.clone(),
        (Kind::Bool, Value::Boolean(_)) => value.clone(),
        (Kind::Rate, Value::Float(_)) => value.clone(),
        (Kind::Rate, Value::Integer(i)) => Value::Float(*i as f64),
        (Kind::Rate, Value::String(s)) if s == "atm" => value.clone(),
        (Kind::FloatList, Value::Array(a)) => Value::Array(
            a.iter()
                .map(|x| match x {
                    Value::Float(f) => Ok(Value::Float(*f)),
                    Value::Integer(i) => Ok(Value::Float(*i as f64)),
                    _ => Err(bad()),
                })
                .collect::<CliResult<_>>()?,
        ),
        (Kind::StrList, Value::Array(a)) if a.iter().all(Value::is_str) => value.clone(),
        (Kind::StrList, Value::String(s)) => {
            Value::Array(s.split(',').map(|p| Value::String(p.trim().to_string())).collect())
        }
        _ => return Err(bad()),
    };
    Ok(v)
}

/// Parses the right-hand side of `--set key=value` as a TOML value, falling
/// back to a bare string.
fn parse_flag_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

impl Config {
    /// Reads a config file. Relative paths inside it resolve against its directory.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_str_at(&text, path)
    }

    fn from_str_at(text: &str, path: &Path) -> CliResult<Self> {
        let table: toml::Table = text.parse().map_err(|e| CliError::io(path, e))?;
        let mut flat = vec![];
        flatten("", &table, &mut flat);
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut cfg = Config::default();
        let origin = path.display().to_string();
        for (name, value) in flat {
            let k = lookup(&name).map_err(|e| CliError::input(format!("{origin}: {e}")))?;
            let value = check_type(&name, k.kind, &value, &origin)?;
            cfg.entries.insert(name, Entry { value, origin: Origin::File(dir.clone()) });
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> CliResult<()> {
        let (name, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("override '{assignment}' must look like key=value")))?;
        let name = name.trim();
        let k = lookup(name)?;
        let value = match k.kind {
            Kind::Str | Kind::Path => Value::String(raw.trim().to_string()),
            _ => parse_flag_value(raw.trim()),
        };
        let value = check_type(name, k.kind, &value, "command line")?;
        self.entries.insert(name.to_string(), Entry { value, origin: Origin::Flag });
        Ok(())
    }

    pub fn set_value(&mut self, name: &str, value: Value) -> CliResult<()> {
        let k = lookup(name)?;
        let value = check_type(name, k.kind, &value, "command line")?;
        self.entries.insert(name.to_string(), Entry { value, origin: Origin::Flag });
        Ok(())
    }

    /// Takes `out_dir` from the environment unless a flag already set it.
    pub fn apply_env(&mut self) {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            let from_flag = self.entries.get("out_dir").is_some_and(|e| e.origin == Origin::Flag);
            if !from_flag && !dir.is_empty() {
                self.entries.insert("out_dir".into(), Entry { value: Value::String(dir), origin: Origin::Env });
            }
        }
    }

    fn entry(&self, name: &str) -> Option<Entry> {
        self.entries.get(name).cloned().or_else(|| {
            let k = lookup(name).ok()?;
            k.default.map(|d| Entry { value: d(), origin: Origin::Default })
        })
    }

    fn require(&self, name: &str) -> CliResult<Entry> {
        self.entry(name).ok_or_else(|| CliError::input(format!("config key '{name}' is required")))
    }

    pub fn has(&self, name: &str) -> bool {
        self.entry(name).is_some()
    }

    pub fn int(&self, name: &str) -> CliResult<u64> {
        match self.require(name)?.value {
            Value::Integer(i) => Ok(i as u64),
            v => Err(CliError::input(format!("config key '{name}' must be an integer, got {v}"))),
        }
    }

    pub fn float(&self, name: &str) -> CliResult<f64> {
        match self.require(name)?.value {
            Value::Float(f) => Ok(f),
            v => Err(CliError::input(format!("config key '{name}' must be a number, got {v}"))),
        }
    }

    pub fn opt_float(&self, name: &str) -> CliResult<Option<f64>> {
        if self.has(name) { self.float(name).map(Some) } else { Ok(None) }
    }

    pub fn string(&self, name: &str) -> CliResult<String> {
        match self.require(name)?.value {
            Value::String(s) => Ok(s),
            v => Err(CliError::input(format!("config key '{name}' must be a string, got {v}"))),
        }
    }

    pub fn boolean(&self, name: &str) -> CliResult<bool> {
        match self.require(name)?.value {
            Value::Boolean(b) => Ok(b),
            v => Err(CliError::input(format!("config key '{name}' must be true or false, got {v}"))),
        }
    }

    pub fn floats(&self, name: &str) -> CliResult<Option<Vec<f64>>> {
        let Some(e) = self.entry(name) else { return Ok(None) };
        match e.value {
            Value::Array(a) => Ok(Some(a.iter().filter_map(Value::as_float).collect())),
            v => Err(CliError::input(format!("config key '{name}' must be a list of numbers, got {v}"))),
        }
    }

    pub fn strings(&self, name: &str) -> CliResult<Vec<String>> {
        match self.require(name)?.value {
            Value::Array(a) => Ok(a.iter().filter_map(|v| v.as_str().map(str::to_string)).collect()),
            v => Err(CliError::input(format!("config key '{name}' must be a list of strings, got {v}"))),
        }
    }

    /// Path value resolved against the config directory (file values) or the
    /// working directory (flags, environment).
    pub fn path(&self, name: &str) -> CliResult<PathBuf> {
        let e = self.require(name)?;
        let Value::String(s) = e.value else {
            return Err(CliError::input(format!("config key '{name}' must be a path")));
        };
        let p = PathBuf::from(&s);
        Ok(match e.origin {
            _ if p.is_absolute() => p,
            Origin::File(dir) => dir.join(p),
            _ => p,
        })
    }

    /// Input file that must exist.
    pub fn input_path(&self, name: &str) -> CliResult<PathBuf> {
        let p = self.path(name)?;
        if !p.is_file() {
            return Err(CliError::input(format!("{}: file not found (config key '{name}')", p.display())));
        }
        Ok(p)
    }

    pub fn seed(&self) -> CliResult<u64> {
        if self.entries.contains_key("seed") {
            self.int("seed")
        } else {
            Err(CliError::input("config key 'seed' is required; pass --seed or set it in the config file"))
        }
    }

    pub fn mortgage_kind(&self) -> CliResult<MortgageKind> {
        Ok(self.string("mortgage.kind")?.parse()?)
    }

    /// Mortgage rate; `None` means at the money.
    pub fn mortgage_rate(&self) -> CliResult<Option<f64>> {
        match self.require("mortgage.rate")?.value {
            Value::Float(f) => Ok(Some(f)),
            _ => Ok(None),
        }
    }

    /// Every known key with its effective value, for the run manifest. Paths
    /// are reduced to their file names so manifests do not depend on where
    /// the run happened; `out_dir` is left out for the same reason.
    pub fn effective(&self) -> BTreeMap<String, Value> {
        KEYS.iter()
            .filter(|k| k.name != "out_dir")
            .filter_map(|k| {
                let e = self.entry(k.name)?;
                let v = match (k.kind, &e.value) {
                    (Kind::Path, Value::String(s)) => Value::String(
                        Path::new(s).file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                    ),
                    _ => e.value,
                };
                Some((k.name.to_string(), v))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_tables_flatten_to_dotted_keys() {
        let cfg = Config::from_str_at("seed = 7\n[mortgage]\nkind = \"annuity\"\nrate = 0.01\n", Path::new("/x/s.toml"))
            .unwrap();
        assert_eq!(cfg.seed().unwrap(), 7);
        assert_eq!(cfg.mortgage_kind().unwrap(), MortgageKind::Annuity);
        assert_eq!(cfg.mortgage_rate().unwrap(), Some(0.01));
        assert_eq!(cfg.int("n_paths").unwrap(), 20_000);
    }

    #[test]
    fn dotted_keys_inline() {
        let cfg = Config::from_str_at("seed = 1\n\"cpr.model\" = \"rational\"\ncpr.lambda_max = 0.2\n", Path::new("a.toml"))
            .unwrap();
        assert_eq!(cfg.string("cpr.model").unwrap(), "rational");
        assert_eq!(cfg.float("cpr.lambda_max").unwrap(), 0.2);
    }

    #[test]
    fn unknown_key_is_rejected_with_file_name() {
        let err = Config::from_str_at("seed = 1\nsede = 2\n", Path::new("cfg.toml")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("cfg.toml") && err.to_string().contains("sede"));
    }

    #[test]
    fn flags_override_file_values() {
        let mut cfg = Config::from_str_at("seed = 1\nzeta = 0.01\n", Path::new("a.toml")).unwrap();
        cfg.set("zeta=0.02").unwrap();
        cfg.set("hedge.strategies=linear,diag9").unwrap();
        cfg.set("mortgage.rate=atm").unwrap();
        assert_eq!(cfg.float("zeta").unwrap(), 0.02);
        assert_eq!(cfg.strings("hedge.strategies").unwrap(), vec!["linear", "diag9"]);
        assert_eq!(cfg.mortgage_rate().unwrap(), None);
        assert!(cfg.set("zeta=abc").is_err());
        assert!(cfg.set("nokey=1").is_err());
    }

    #[test]
    fn missing_seed_is_an_input_error() {
        let cfg = Config::default();
        let err = cfg.seed().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("seed"));
    }

    #[test]
    fn file_paths_resolve_against_config_dir() {
        let cfg = Config::from_str_at("seed = 1\ncurve = \"c.csv\"\n", Path::new("/data/s.toml")).unwrap();
        assert_eq!(cfg.path("curve").unwrap(), PathBuf::from("/data/c.csv"));
        assert_eq!(cfg.effective()["curve"], Value::String("c.csv".into()));
    }
}
