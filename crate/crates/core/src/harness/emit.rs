//! CSV / JSON output with provenance headers, written atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::scan::{CutoffProfile, ProfileRow};
use crate::error::{Error, Result};

pub const PROFILE_SCHEMA: &str = "dihedral-cutoff/profile/v1";
pub const PROFILE_COLUMNS: [&str; 14] = [
    "n",
    "k",
    "replicate",
    "regime",
    "alpha",
    "t0",
    "t",
    "tv",
    "stderr",
    "bias",
    "gens_hash",
    "seed",
    "rejections",
    "status",
];

/// 17 significant digits; parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn clean(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

pub fn profile_csv(profile: &CutoffProfile, cfg: &ExperimentConfig) -> String {
    let mut out = format!(
        "# schema={PROFILE_SCHEMA} config_hash={} seed={} config={}\n",
        profile.config_hash,
        cfg.seed,
        cfg.to_json()
    );
    out.push_str(&PROFILE_COLUMNS.join(","));
    out.push('\n');
    for r in &profile.rows {
        let fields = [
            r.n.to_string(),
            r.k.to_string(),
            r.replicate.to_string(),
            clean(&r.regime),
            fmt_f64(r.alpha),
            fmt_f64(r.t0),
            fmt_f64(r.t),
            fmt_f64(r.tv),
            fmt_f64(r.stderr),
            fmt_f64(r.bias),
            clean(&r.gens_hash),
            r.seed.to_string(),
            r.rejections.to_string(),
            clean(&r.status),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_profile_csv(text: &str) -> Result<Vec<ProfileRow>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("profile has no header row".into()))?;
    if header.split(',').collect::<Vec<_>>() != PROFILE_COLUMNS {
        return Err(Error::Parse(format!("unexpected profile columns: {header}")));
    }
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
    };
    let int = |s: &str, what: &str| -> Result<u64> {
        s.parse::<u64>().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
    };
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != PROFILE_COLUMNS.len() {
                return Err(Error::Parse(format!("row has {} fields: {line}", f.len())));
            }
            Ok(ProfileRow {
                n: int(f[0], "n")?,
                k: int(f[1], "k")?,
                replicate: int(f[2], "replicate")? as usize,
                regime: f[3].to_string(),
                alpha: num(f[4], "alpha")?,
                t0: num(f[5], "t0")?,
                t: num(f[6], "t")?,
                tv: num(f[7], "tv")?,
                stderr: num(f[8], "stderr")?,
                bias: num(f[9], "bias")?,
                gens_hash: f[10].to_string(),
                seed: int(f[11], "seed")?,
                rejections: int(f[12], "rejections")? as usize,
                status: f[13].to_string(),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ProfileJson<'a> {
    schema: &'static str,
    config_hash: &'a str,
    config: &'a ExperimentConfig,
    failed_cells: usize,
    rejections: usize,
    rows: &'a [ProfileRow],
}

pub fn profile_json(profile: &CutoffProfile, cfg: &ExperimentConfig) -> String {
    let doc = ProfileJson {
        schema: PROFILE_SCHEMA,
        config_hash: &profile.config_hash,
        config: cfg,
        failed_cells: profile.failed_cells,
        rejections: profile.rejections,
        rows: &profile.rows,
    };
    serde_json::to_string_pretty(&doc).expect("profile serializes")
}

/// Write to a sibling temporary file, then rename over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Domain(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
