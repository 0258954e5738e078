//! Versioned JSON certificate files with a SHA-256 checksum over the
//! canonical (compact) serialization of every other field.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use inflacert::lpcore::{parse_canonical_label, CertificateEntry, FarkasCertificate, Provenance};
use inflacert::{Mode, Scalar, Sign};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::values::CliScalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub u: String,
    pub u_exact: Option<String>,
    pub t: Option<String>,
    /// `F_AB, F_BC, F_AC, F_ABC`
    pub f: Option<[String; 4]>,
    pub mode: String,
    pub options: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub label: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub format_version: u32,
    pub provenance: ProvenanceRecord,
    pub rows: Vec<RowRecord>,
    pub margin: String,
    pub checksum: String,
}

#[derive(Serialize)]
struct Body<'a> {
    format_version: u32,
    provenance: &'a ProvenanceRecord,
    rows: &'a [RowRecord],
    margin: &'a str,
}

impl CertificateFile {
    pub fn compute_checksum(&self) -> String {
        let body = Body {
            format_version: self.format_version,
            provenance: &self.provenance,
            rows: &self.rows,
            margin: &self.margin,
        };
        let text = serde_json::to_string(&body).expect("plain strings always serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn from_certificate<S: Scalar>(cert: &FarkasCertificate<S>) -> CertificateFile {
        let p = &cert.provenance;
        let mut file = CertificateFile {
            format_version: FORMAT_VERSION,
            provenance: ProvenanceRecord {
                u: p.u.clone(),
                u_exact: p.u_exact.clone(),
                t: p.t.map(|t| t.to_string()),
                f: p.f.clone(),
                mode: p.mode.unwrap_or(S::MODE).to_string(),
                options: p.options.clone(),
            },
            rows: cert
                .entries
                .iter()
                .map(|e| RowRecord {
                    label: e.label(),
                    y: e.y.render(),
                })
                .collect(),
            margin: cert.margin.render(),
            checksum: String::new(),
        };
        file.checksum = file.compute_checksum();
        file
    }

    pub fn mode(&self) -> Result<Mode> {
        self.provenance.mode.parse().map_err(|e: String| anyhow!(e))
    }

    pub fn provenance(&self) -> Result<Provenance> {
        let p = &self.provenance;
        Ok(Provenance {
            u: p.u.clone(),
            u_exact: p.u_exact.clone(),
            t: p
                .t
                .as_deref()
                .map(str::parse::<Sign>)
                .transpose()
                .map_err(|e| anyhow!("bad t in provenance: {e}"))?,
            f: p.f.clone(),
            mode: Some(self.mode()?),
            options: p.options.clone(),
        })
    }

    /// Decode into scalar type `S`; exact values must be written in lowest terms.
    pub fn to_certificate<S: CliScalar>(&self) -> Result<FarkasCertificate<S>> {
        let value = |text: &str, what: &str| -> Result<S> {
            let v = S::parse_value(text).ok_or_else(|| anyhow!("unparseable {what} `{text}`"))?;
            if S::MODE == Mode::Exact && v.render() != text {
                bail!("{what} `{text}` is not a lowest-terms rational");
            }
            Ok(v)
        };
        let entries = self
            .rows
            .iter()
            .map(|r| {
                let (kind, direction) =
                    parse_canonical_label(&r.label).ok_or_else(|| anyhow!("malformed row label `{}`", r.label))?;
                Ok(CertificateEntry {
                    kind,
                    direction,
                    y: value(&r.y, "multiplier")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FarkasCertificate {
            entries,
            margin: value(&self.margin, "margin")?,
            provenance: self.provenance()?,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain strings always serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<CertificateFile> {
        let file: CertificateFile = serde_json::from_str(text).context("not a certificate file")?;
        if file.format_version != FORMAT_VERSION {
            bail!("unsupported format_version {}", file.format_version);
        }
        if file.compute_checksum() != file.checksum {
            bail!("checksum mismatch: the file was modified");
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<CertificateFile> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }
}
