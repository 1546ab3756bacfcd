//! `key = value` run files.
//!
//! Keys are long option names without the leading dashes, plus `command` for
//! the subcommand. Values from the file are spliced in front of the command
//! line options, so anything given as a flag wins.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const SUBCOMMANDS: [&str; 4] = ["gf", "shift", "dynamics", "demo"];

/// Ordered `(key, value)` pairs from a run file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFile {
    pub entries: Vec<(String, String)>,
}

impl RunFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config {
                    line: idx + 1,
                    message: format!("expected `key = value`, got {line:?}"),
                });
            };
            let key = k.trim().trim_start_matches("--").replace('_', "-");
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Config {
                    line: idx + 1,
                    message: format!("bad key {:?}", k.trim()),
                });
            }
            let value = v.trim().to_string();
            // A later line for the same key replaces the earlier one.
            entries.retain(|(existing, _)| *existing != key);
            entries.push((key, value));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Removes `--config PATH` from `args`, loads it, and rebuilds the argument
/// list as `bin command <file options> <flag options>`.
pub fn merge_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config_path: Option<OsString> = None;
    let mut iter = args.into_iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let path = iter
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a file path".into()))?;
            config_path = Some(path);
        } else if let Some(p) = s.strip_prefix("--config=") {
            config_path = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config_path else {
        return Ok(rest);
    };
    let file = RunFile::load(Path::new(&path))?;

    let cmd_pos = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let (mut merged, tail) = match cmd_pos {
        Some(i) => {
            let tail = rest.split_off(i + 1);
            (rest, tail)
        }
        None => {
            let cmd = file.get("command").ok_or_else(|| {
                CliError::Usage("no subcommand given and the config has no `command` key".into())
            })?;
            if !SUBCOMMANDS.contains(&cmd) {
                return Err(CliError::Usage(format!(
                    "config names unknown command {cmd:?}; expected one of {}",
                    SUBCOMMANDS.join(", ")
                )));
            }
            let tail = rest.split_off(rest.len().min(1));
            let mut head = rest;
            head.push(cmd.into());
            (head, tail)
        }
    };
    for (k, v) in &file.entries {
        if k == "command" {
            continue;
        }
        if k == "name" {
            merged.push(v.into());
            continue;
        }
        merged.push(format!("--{k}").into());
        merged.push(v.into());
    }
    merged.extend(tail);
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[OsString]) -> Vec<String> {
        v.iter().map(|s| s.to_string_lossy().into_owned()).collect()
    }

    #[test]
    fn parses_and_renders() {
        let f = RunFile::parse("# comment\ncommand = gf\nradius_nm = 20\n\n--gap-nm= 1.5\nradius-nm = 10\n").unwrap();
        assert_eq!(f.get("radius-nm"), Some("10"));
        assert_eq!(f.get("gap-nm"), Some("1.5"));
        assert_eq!(f.render(), "command = gf\ngap-nm = 1.5\nradius-nm = 10\n");
        assert_eq!(RunFile::parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(matches!(
            RunFile::parse("a = 1\nnot a pair\n"),
            Err(CliError::Config { line: 2, .. })
        ));
    }

    #[test]
    fn flags_follow_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "command = gf\ngap-nm = 2\n").unwrap();
        let args: Vec<OsString> = ["bin", "--config", path.to_str().unwrap(), "--gap-nm", "3"]
            .iter()
            .map(OsString::from)
            .collect();
        assert_eq!(strs(&merge_config(args).unwrap()), ["bin", "gf", "--gap-nm", "2", "--gap-nm", "3"]);
    }

    #[test]
    fn explicit_subcommand_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "command = gf\nout-dir = x\n").unwrap();
        let args: Vec<OsString> = ["bin", "shift", "--config", path.to_str().unwrap()]
            .iter()
            .map(OsString::from)
            .collect();
        assert_eq!(strs(&merge_config(args).unwrap()), ["bin", "shift", "--out-dir", "x"]);
    }
}
