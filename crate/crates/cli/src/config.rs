//! `key=value` config files, spliced into argv as `--key value` right after
//! the subcommand so that flags given on the command line override them.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

/// Flag values taken from a config file, in file order.
fn read_pairs(path: &Path) -> Result<Vec<OsString>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config {}:{}: expected key=value", path.display(), lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.starts_with('-') {
            return Err(format!("config {}:{}: bad key '{key}'", path.display(), lineno + 1));
        }
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

/// Returns argv with the config file's flags inserted after the subcommand
/// name. `--config` itself stays in place for clap to accept.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.into());
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, sub) else {
        return Ok(args);
    };
    let pairs = read_pairs(Path::new(&path))?;
    let mut out = args;
    out.splice(sub + 1..sub + 1, pairs);
    Ok(out)
}
