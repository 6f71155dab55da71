use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{ElectronicIntegrals, Tensor4};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FcidumpHeader {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
}

/// Reads a spin-free FCIDUMP file (chemists' index order, 1-based).
pub fn read_fcidump(path: impl AsRef<Path>) -> Result<(ElectronicIntegrals, FcidumpHeader)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fcidump(&text, &path.display().to_string())
}

pub fn parse_fcidump(text: &str, origin: &str) -> Result<(ElectronicIntegrals, FcidumpHeader)> {
    let mut header_text = String::new();
    let mut body_start = None;
    let mut in_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if !in_header {
            if trimmed.is_empty() {
                continue;
            }
            if !trimmed.to_ascii_uppercase().starts_with("&FCI") {
                return Err(Error::parse(
                    format!("{origin}:{}", lineno + 1),
                    "malformed header: expected '&FCI'",
                ));
            }
            in_header = true;
        }
        let upper = trimmed.to_ascii_uppercase();
        if upper.ends_with("&END") || upper == "/" || upper.ends_with('/') {
            header_text.push_str(trimmed.trim_end_matches('/'));
            header_text.push(',');
            body_start = Some(lineno + 1);
            break;
        }
        header_text.push_str(trimmed);
        header_text.push(',');
    }
    let body_start = body_start
        .ok_or_else(|| Error::parse(format!("{origin}:1"), "malformed header: missing '&END'"))?;
    let fields = parse_namelist(&header_text);
    let get = |key: &str| -> Result<i64> {
        let raw = fields
            .get(key)
            .and_then(|v| v.first())
            .ok_or_else(|| Error::parse(format!("{origin}:1"), format!("malformed header: missing {key}")))?;
        raw.parse::<i64>().map_err(|_| {
            Error::parse(format!("{origin}:1"), format!("malformed header: {key}={raw}"))
        })
    };
    let norb = get("NORB")?;
    let nelec = get("NELEC")?;
    let ms2 = fields.get("MS2").map(|_| get("MS2")).transpose()?.unwrap_or(0);
    if norb <= 0 || nelec < 0 {
        return Err(Error::parse(
            format!("{origin}:1"),
            format!("malformed header: NORB={norb}, NELEC={nelec}"),
        ));
    }
    let n = norb as usize;
    let header = FcidumpHeader {
        norb: n,
        nelec: nelec as usize,
        ms2,
    };

    let mut h = DMatrix::zeros(n, n);
    let mut g = Tensor4::zeros(n);
    let mut core = 0.0;
    for (lineno, line) in text.lines().enumerate().skip(body_start) {
        let loc = || format!("{origin}:{}", lineno + 1);
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(Error::parse(loc(), format!("expected 'value i j k l', got '{}'", line.trim())));
        }
        let value: f64 = tokens[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::parse(loc(), format!("bad value '{}'", tokens[0])))?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&tokens[1..]) {
            let i: usize = tok
                .parse()
                .map_err(|_| Error::parse(loc(), format!("bad index '{tok}'")))?;
            if i > n {
                return Err(Error::parse(
                    loc(),
                    format!("index {i} out of range for NORB={n}"),
                ));
            }
            *slot = i;
        }
        match idx {
            [0, 0, 0, 0] => core = value,
            [i, j, 0, 0] if i > 0 && j > 0 => {
                h[(i - 1, j - 1)] = value;
                h[(j - 1, i - 1)] = value;
            }
            // Orbital-energy records carry no Hamiltonian information.
            [_, 0, 0, 0] => log::debug!("{}: skipping orbital-energy record", loc()),
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (i, j, k, l) = (i - 1, j - 1, k - 1, l - 1);
                for (p, q, r, s) in [
                    (i, j, k, l),
                    (j, i, k, l),
                    (i, j, l, k),
                    (j, i, l, k),
                    (k, l, i, j),
                    (l, k, i, j),
                    (k, l, j, i),
                    (l, k, j, i),
                ] {
                    g.set(p, q, r, s, value);
                }
            }
            _ => {
                return Err(Error::parse(loc(), format!("invalid index pattern {idx:?}")));
            }
        }
    }
    let ints = ElectronicIntegrals::spin_free(h, g, core)
        .map_err(|e| Error::validation(origin.to_string(), e.to_string()))?;
    Ok((ints, header))
}

fn parse_namelist(text: &str) -> HashMap<String, Vec<String>> {
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    let cleaned = text.replace("&FCI", " ").replace("&fci", " ").replace("&END", " ").replace("&end", " ");
    for token in cleaned.split([',', ' ', '\t', '\n']).filter(|t| !t.is_empty()) {
        if let Some((key, value)) = token.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            let entry = out.entry(key.clone()).or_default();
            if !value.trim().is_empty() {
                entry.push(value.trim().to_string());
            }
            current = Some(key);
        } else if let Some(key) = &current {
            out.entry(key.clone()).or_default().push(token.to_string());
        }
    }
    out
}

/// Formats integrals as FCIDUMP text. Spin-resolved integrals collapse onto the
/// opposite-spin channel; a warning is logged when that loses information.
pub fn format_fcidump(ints: &ElectronicIntegrals, nelec: usize, ms2: i64) -> String {
    let n = ints.n_orbitals();
    let mismatch = ints.channel_mismatch();
    if mismatch > 1e-12 {
        log::warn!(
            "FCIDUMP is spin-free: same-spin and opposite-spin channels differ by up to {mismatch:.3e}; \
             writing the opposite-spin channel"
        );
    }
    let mut out = String::new();
    let _ = writeln!(out, "&FCI NORB={n},NELEC={nelec},MS2={ms2},");
    let _ = writeln!(out, "  ORBSYM={}", "1,".repeat(n));
    let _ = writeln!(out, "  ISYM=1,");
    let _ = writeln!(out, "&END");
    let g = ints.opposite_spin();
    for i in 0..n {
        for j in 0..=i {
            let ij = i * (i + 1) / 2 + j;
            for k in 0..n {
                for l in 0..=k {
                    let kl = k * (k + 1) / 2 + l;
                    if kl > ij {
                        continue;
                    }
                    let v = g.get(i, j, k, l);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:.15e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    let h = ints.one_body();
    for i in 0..n {
        for j in 0..=i {
            let v = h[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{v:.15e} {} {} 0 0", i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.15e} 0 0 0 0", ints.core_energy());
    out
}

pub fn write_fcidump(
    ints: &ElectronicIntegrals,
    nelec: usize,
    ms2: i64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_fcidump(ints, nelec, ms2)).map_err(|e| Error::io(path, e))
}
