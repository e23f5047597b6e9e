//! Flat key = value configuration files with optional sections. A section
//! opens with `[name]` and scopes the keys that follow; `name.key = value`
//! is the inline equivalent. Keys outside any section configure global
//! flags. Command-line flags always win over file values.

use crate::error::{EvoError, Result};
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Parsed configuration file: section name (empty for top level) to
/// key/value pairs, last assignment wins.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(EvoError::ConfigParse {
                    line,
                    message: "unterminated section header".into(),
                })?;
                let name = name.trim();
                if name.is_empty() || !is_identifier(name) {
                    return Err(EvoError::ConfigParse {
                        line,
                        message: format!("bad section name '{name}'"),
                    });
                }
                current = name.to_string();
                sections.entry(current.clone()).or_default();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| EvoError::ConfigParse {
                    line,
                    message: format!("expected key = value, got '{content}'"),
                })?;
            let mut key = key.trim().to_string();
            let value = value.trim().to_string();
            let mut section = current.clone();
            // A dotted key addresses a section regardless of position.
            if let Some((prefix, rest)) = key.split_once('.') {
                section = prefix.trim().to_string();
                key = rest.trim().to_string();
            }
            if key.is_empty()
                || !is_identifier(&key)
                || !(section.is_empty() || is_identifier(&section))
            {
                return Err(EvoError::ConfigParse {
                    line,
                    message: format!(
                        "bad key '{}'",
                        content.split('=').next().unwrap_or("").trim()
                    ),
                });
            }
            sections.entry(section).or_default().insert(key, value);
        }
        Ok(FileConfig { sections })
    }

    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)?;
        FileConfig::parse(&text)
    }

    /// Key/value view of one section; the empty name is the top level.
    pub fn section(&self, name: &str) -> Section<'_> {
        Section {
            entries: self.sections.get(name),
        }
    }
}

fn is_identifier(s: &str) -> bool {
    s.chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Debug, Clone, Copy)]
pub struct Section<'a> {
    entries: Option<&'a BTreeMap<String, String>>,
}

impl Section<'_> {
    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.and_then(|m| m.get(key)).map(String::as_str)
    }

    /// Parses the value under `key`; None when the key is absent.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                EvoError::InvalidArgument(format!("config key '{key}': {e} (value '{raw}')"))
            }),
        }
    }
}

/// Fills empty Option fields of a flags struct from a config section.
macro_rules! fill_from_section {
    ($args:expr, $section:expr, [ $($field:ident),* $(,)? ]) => {
        $(
            if $args.$field.is_none() {
                $args.$field = $section.get(stringify!($field))?;
            }
        )*
    };
}
pub(crate) use fill_from_section;

/// Comma-separated frequency vector, e.g. "0.3,0.3,0.4".
pub fn parse_simplex(raw: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = raw
        .split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| {
                EvoError::InvalidArgument(format!("bad frequency '{}' in '{raw}'", part.trim()))
            })
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(EvoError::InvalidArgument("empty frequency vector".into()));
    }
    Ok(values)
}

/// Inclusive sweep range "lo:hi:step", or a single number.
pub fn parse_range(raw: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = raw.split(':').collect();
    let bad = |what: &str| {
        EvoError::InvalidArgument(format!("bad {what} in range '{raw}' (want lo:hi:step)"))
    };
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.trim().parse().map_err(|_| bad("number"))?;
            Ok(vec![v])
        }
        [lo, hi, step] => {
            let lo: f64 = lo.trim().parse().map_err(|_| bad("lower bound"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad("upper bound"))?;
            let step: f64 = step.trim().parse().map_err(|_| bad("step"))?;
            if !step.is_finite() || step <= 0.0 {
                return Err(bad("step"));
            }
            if !lo.is_finite() || !hi.is_finite() || hi < lo {
                return Err(bad("bounds"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| lo + i as f64 * step).collect())
        }
        _ => Err(bad("shape")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys_agree() {
        let text = "\
# sweep setup
output_dir = out

[phase]
alpha = 0:1:0.5
beta = 1

simulate.replicas = 20
";
        let config = FileConfig::parse(text).unwrap();
        assert_eq!(config.section("").raw("output_dir"), Some("out"));
        assert_eq!(config.section("phase").raw("alpha"), Some("0:1:0.5"));
        assert_eq!(
            config.section("simulate").get::<u32>("replicas").unwrap(),
            Some(20)
        );
        assert_eq!(config.section("phase").raw("missing"), None);
        assert_eq!(config.section("nope").raw("x"), None);
    }

    #[test]
    fn later_assignments_win() {
        let config = FileConfig::parse("[a]\nx = 1\nx = 2\n").unwrap();
        assert_eq!(config.section("a").get::<i32>("x").unwrap(), Some(2));
    }

    #[test]
    fn parse_errors_cite_the_line() {
        let err = FileConfig::parse("x = 1\nbroken line\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = FileConfig::parse("[unclosed\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        assert!(FileConfig::parse("a..b = 1\n").is_err());
    }

    #[test]
    fn typed_reads_report_bad_values() {
        let config = FileConfig::parse("[s]\nn = soon\n").unwrap();
        let err = config.section("s").get::<u32>("n").unwrap_err();
        assert!(err.to_string().contains("'n'"), "{err}");
    }

    #[test]
    fn ranges_cover_the_spec_shapes() {
        assert_eq!(parse_range("0.5").unwrap(), vec![0.5]);
        let r = parse_range("0:1:0.25").unwrap();
        assert_eq!(r, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let r = parse_range("0:8:0.05").unwrap();
        assert_eq!(r.len(), 161);
        assert!((r[160] - 8.0).abs() < 1e-12);
        assert!(parse_range("1:0:0.5").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1:0.5:2").is_err());
    }

    #[test]
    fn simplex_parsing_trims_and_validates() {
        assert_eq!(parse_simplex("0.3, 0.3 ,0.4").unwrap(), vec![0.3, 0.3, 0.4]);
        assert!(parse_simplex("0.3,x").is_err());
    }
}
