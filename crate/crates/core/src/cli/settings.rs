use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys accepted in each section; the unnamed leading section holds `experiment`.
const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["experiment"]),
    ("loop", &["preset", "wc", "plant", "plant_file", "pm", "gamma", "wr", "wf", "wl", "wh", "alpha", "lowpass"]),
    ("grid", &["w_min", "w_max", "points"]),
    ("sim", &["duration", "amplitude"]),
    ("hosidf", &["element", "n"]),
    ("sweep", &["kind", "pm", "wl", "ratios", "gamma"]),
    ("design", &["pa", "wr_ratio", "wf_ratio", "alpha"]),
    ("fit", &["frf", "weight"]),
    ("gainvar", &["delta_db"]),
    ("output", &["dir", "label"]),
];

#[derive(Debug, Clone, PartialEq)]
enum Origin {
    File { path: PathBuf, line: usize },
    Flag(&'static str),
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: Origin,
}

/// Flat `section.key = value` parameters from a config file and command-line flags.
/// Flags override the file.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    entries: BTreeMap<String, Entry>,
    base_dir: Option<PathBuf>,
}

fn known(section: &str, key: &str) -> bool {
    SCHEMA.iter().any(|(s, keys)| *s == section && keys.contains(&key))
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut s = Self::parse(&text, path)?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    /// Parses `key = value` lines grouped under `[section]` headers. `#` starts a comment.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| Error::Parse { path: path.to_path_buf(), line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err(format!("unterminated section header `{content}`")))?.trim();
                if name.is_empty() || !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(err(format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(err(format!("expected `key = value`, found `{content}`")));
            }
            if !known(&section, key) {
                let place = if section.is_empty() { "outside any section".to_string() } else { format!("in section [{section}]") };
                return Err(err(format!("unknown key `{key}` {place}")));
            }
            let full = qualified(&section, key);
            if let Some(prev) = entries.get(&full) {
                let Entry { origin: Origin::File { line: first, .. }, .. } = prev else { unreachable!() };
                return Err(err(format!("`{key}` already set on line {first}")));
            }
            entries.insert(full, Entry { value: value.to_string(), origin: Origin::File { path: path.to_path_buf(), line } });
        }
        Ok(Self { entries, base_dir: None })
    }

    /// Sets `key` (`section.key`) from the command-line flag `flag`.
    pub fn set_flag(&mut self, key: &str, value: impl ToString, flag: &'static str) {
        debug_assert!(key.split_once('.').is_some_and(|(s, k)| known(s, k)) || known("", key), "{key}");
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), origin: Origin::Flag(flag) });
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    /// Error attributed to wherever `key` was set.
    pub fn invalid(&self, key: &str, message: impl Into<String>) -> Error {
        let message = message.into();
        match self.entries.get(key).map(|e| &e.origin) {
            Some(Origin::File { path, line }) => Error::Parse { path: path.clone(), line: *line, message: format!("{key}: {message}") },
            Some(Origin::Flag(flag)) => Error::Config(format!("--{flag}: {message}")),
            None => Error::Config(format!("{key}: {message}")),
        }
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| self.invalid(key, format!("cannot parse `{v}`"))),
        }
    }

    /// Finite number, optionally required to be positive.
    pub fn number(&self, key: &str, positive: bool) -> Result<Option<f64>> {
        let v: Option<f64> = self.parsed(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(self.invalid(key, format!("{x} is not finite"))),
            Some(x) if positive && !(x > 0.0) => Err(self.invalid(key, format!("must be positive, got {x}"))),
            _ => Ok(v),
        }
    }

    /// Comma-separated list of finite numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.str(key) else { return Ok(None) };
        let items = v
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| self.invalid(key, format!("`{v}` is not a comma-separated list of numbers")))?;
        if items.is_empty() {
            return Err(self.invalid(key, "list is empty"));
        }
        Ok(Some(items))
    }

    pub fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>> {
        let Some(v) = self.str(key) else { return Ok(None) };
        options.iter().find(|(name, _)| *name == v).map(|(_, t)| Some(*t)).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            self.invalid(key, format!("`{v}` is not one of {}", names.join(", ")))
        })
    }

    /// Path value, resolved against the config file's directory when relative and set there.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let e = self.entries.get(key)?;
        let p = PathBuf::from(&e.value);
        match (&e.origin, &self.base_dir) {
            (Origin::File { .. }, Some(dir)) if p.is_relative() => Some(dir.join(p)),
            _ => Some(p),
        }
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Settings> {
        Settings::parse(text, Path::new("t.cfg"))
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn sections_and_comments() {
        let s = parse("experiment = step # trailing\n\n[loop]\nwc = 100\n[sweep]\npm = 10, 14\n").unwrap();
        assert_eq!(s.str("experiment"), Some("step"));
        assert_eq!(s.number("loop.wc", true).unwrap(), Some(100.0));
        assert_eq!(s.list("sweep.pm").unwrap(), Some(vec![10.0, 14.0]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of(parse("[loop]\nwc = 1\nbogus = 2\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("[nowhere]\n").unwrap_err()), 1);
        assert_eq!(line_of(parse("[loop]\n\nwc 100\n").unwrap_err()), 3);
        assert_eq!(line_of(parse("[loop]\nwc = 1\nwc = 2\n").unwrap_err()), 3);
        let s = parse("[loop]\n\nwc = fast\n").unwrap();
        assert_eq!(line_of(s.number("loop.wc", true).unwrap_err()), 3);
        let s = parse("[loop]\nwc = -4\n").unwrap();
        assert_eq!(line_of(s.number("loop.wc", true).unwrap_err()), 2);
    }

    #[test]
    fn flags_override_file() {
        let mut s = parse("[loop]\nwc = 100\n").unwrap();
        s.set_flag("loop.wc", 200.0, "wc");
        assert_eq!(s.number("loop.wc", true).unwrap(), Some(200.0));
        s.set_flag("loop.wc", "x", "wc");
        assert!(matches!(s.number("loop.wc", true), Err(Error::Config(m)) if m.starts_with("--wc")));
    }
}
