//! Manifest files: flat key-value text with sectioned headers, hand-editable
//! and diff-friendly.
//!
//! ```text
//! # worked example
//! [manifold]
//! m = 1
//! r = 1
//!
//! [connection]
//! Px[1][1] = y1        # absent entries are zero
//!
//! [verify]
//! samples = 100
//! seed = 0
//! scan_range = 2.0
//! scan_steps = 256
//! tol_equivalence = 1e-10
//! ```
//!
//! Connection entries are keyed `Px[j][a]` / `Py[j][a]` with 1-based indices
//! in `1..=m` x `1..=r`, and their expressions may reference base coordinates
//! only.

use std::path::Path;

use thiserror::Error;

use crate::chart::Chart;
use crate::expr::{parse, Expr, ExprError};
use crate::presymplectic::{ModelError, PresymplecticModel};
use crate::thickening::{Connection, ThickeningError};
use crate::verify::{Tolerances, VerifyOptions};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: connection index {key} out of range for m={m}, r={r}")]
    IndexOutOfRange {
        line: usize,
        key: String,
        m: usize,
        r: usize,
    },
    #[error("line {line}: connection entries must depend on base coordinates only; `{name}` is a fiber/momentum coordinate")]
    FiberDependence { line: usize, name: String },
    #[error("line {line}: in `{key}`: {source}")]
    Expression {
        line: usize,
        key: String,
        #[source]
        source: ExprError,
    },
    #[error("missing required key `{0}` in section [manifold]")]
    MissingKey(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Connection(#[from] ThickeningError),
}

/// Parsed manifest: manifold size, raw connection entries, and verification
/// parameters with defaults filled in.
#[derive(Clone, Debug)]
pub struct Manifest {
    pub m: usize,
    pub r: usize,
    /// `(j, a, text, line)` with 0-based indices, already range-checked.
    px_entries: Vec<(usize, usize, String, usize)>,
    py_entries: Vec<(usize, usize, String, usize)>,
    pub samples: usize,
    pub seed: u64,
    pub scan_range: f64,
    pub scan_steps: usize,
    pub tolerances: Tolerances,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Manifold,
    Connection,
    Verify,
}

fn parse_connection_key(key: &str) -> Option<(bool, usize, usize)> {
    let (is_px, rest) = if let Some(rest) = key.strip_prefix("Px") {
        (true, rest)
    } else {
        let rest = key.strip_prefix("Py")?;
        (false, rest)
    };
    let rest = rest.strip_prefix('[')?;
    let (j, rest) = rest.split_once(']')?;
    let rest = rest.strip_prefix('[')?;
    let a = rest.strip_suffix(']')?;
    let j: usize = j.parse().ok()?;
    let a: usize = a.parse().ok()?;
    Some((is_px, j, a))
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest, ManifestError> {
        let text = std::fs::read_to_string(path)?;
        Manifest::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Manifest, ManifestError> {
        let mut section = Section::None;
        let mut m: Option<usize> = None;
        let mut r: Option<usize> = None;
        let mut raw_px: Vec<(usize, usize, String, usize)> = Vec::new();
        let mut raw_py: Vec<(usize, usize, String, usize)> = Vec::new();
        let mut samples = 100usize;
        let mut seed = 0u64;
        let mut scan_range = 2.0f64;
        let mut scan_steps = 256usize;
        let mut tolerances = Tolerances::default();

        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw_line.split_once('#') {
                Some((before, _)) => before,
                None => raw_line,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ManifestError::Parse {
                    line,
                    message: "unterminated section header".to_string(),
                })?;
                section = match name.trim() {
                    "manifold" => Section::Manifold,
                    "connection" => Section::Connection,
                    "verify" => Section::Verify,
                    other => {
                        return Err(ManifestError::Parse {
                            line,
                            message: format!("unknown section `[{other}]`"),
                        })
                    }
                };
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ManifestError::Parse {
                line,
                message: "expected `key = value`".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let parse_usize = |v: &str| -> Result<usize, ManifestError> {
                v.parse().map_err(|_| ManifestError::Parse {
                    line,
                    message: format!("`{key}` expects a non-negative integer, got `{v}`"),
                })
            };
            let parse_f64 = |v: &str| -> Result<f64, ManifestError> {
                v.parse().map_err(|_| ManifestError::Parse {
                    line,
                    message: format!("`{key}` expects a number, got `{v}`"),
                })
            };
            match section {
                Section::Manifold => match key {
                    "m" => m = Some(parse_usize(value)?),
                    "r" => r = Some(parse_usize(value)?),
                    other => {
                        return Err(ManifestError::Parse {
                            line,
                            message: format!("unknown [manifold] key `{other}`"),
                        })
                    }
                },
                Section::Connection => match parse_connection_key(key) {
                    Some((is_px, j, a)) => {
                        let (mm, rr) = (
                            m.ok_or(ManifestError::Parse {
                                line,
                                message: "[manifold] must precede [connection]".to_string(),
                            })?,
                            r.ok_or(ManifestError::Parse {
                                line,
                                message: "[manifold] must precede [connection]".to_string(),
                            })?,
                        );
                        if j == 0 || j > mm || a == 0 || a > rr {
                            return Err(ManifestError::IndexOutOfRange {
                                line,
                                key: key.to_string(),
                                m: mm,
                                r: rr,
                            });
                        }
                        let entry = (j - 1, a - 1, value.to_string(), line);
                        if is_px {
                            raw_px.push(entry);
                        } else {
                            raw_py.push(entry);
                        }
                    }
                    None => {
                        return Err(ManifestError::Parse {
                            line,
                            message: format!(
                                "connection keys look like Px[j][a] or Py[j][a], got `{key}`"
                            ),
                        })
                    }
                },
                Section::Verify => match key {
                    "samples" => samples = parse_usize(value)?,
                    "seed" => {
                        seed = value.parse().map_err(|_| ManifestError::Parse {
                            line,
                            message: format!("`seed` expects an unsigned integer, got `{value}`"),
                        })?
                    }
                    "scan_range" => scan_range = parse_f64(value)?,
                    "scan_steps" => scan_steps = parse_usize(value)?,
                    "tol_equivalence" => tolerances.equivalence = parse_f64(value)?,
                    "tol_closedness" => tolerances.closedness = parse_f64(value)?,
                    "tol_wedge_power" => tolerances.wedge_power = parse_f64(value)?,
                    "tol_coisotropy" => tolerances.coisotropy_angle = parse_f64(value)?,
                    "tol_rank" => tolerances.rank = parse_f64(value)?,
                    "tol_pfaffian_zero" => tolerances.pfaffian_zero = parse_f64(value)?,
                    other => {
                        return Err(ManifestError::Parse {
                            line,
                            message: format!("unknown [verify] key `{other}`"),
                        })
                    }
                },
                Section::None => {
                    return Err(ManifestError::Parse {
                        line,
                        message: "keys must appear inside a [section]".to_string(),
                    })
                }
            }
        }

        let m = m.ok_or(ManifestError::MissingKey("m"))?;
        let r = r.ok_or(ManifestError::MissingKey("r"))?;
        Ok(Manifest {
            m,
            r,
            px_entries: raw_px,
            py_entries: raw_py,
            samples,
            seed,
            scan_range,
            scan_steps,
            tolerances,
        })
    }

    pub fn model(&self) -> Result<PresymplecticModel, ManifestError> {
        Ok(PresymplecticModel::darboux(self.m, self.r)?)
    }

    /// Parse the connection entries against the base chart. Identifiers that
    /// exist only on the thickened or cotangent chart get the dedicated
    /// "base coordinates only" diagnostic.
    pub fn connection(&self) -> Result<Connection, ManifestError> {
        let base = Chart::base(self.m, self.r);
        let thick = Chart::thickened(self.m, self.r);
        let cot = Chart::cotangent(self.m, self.r);
        let mut px = vec![vec![Expr::zero(); self.r]; self.m];
        let mut py = vec![vec![Expr::zero(); self.r]; self.m];
        for (table, entries) in [(&mut px, &self.px_entries), (&mut py, &self.py_entries)] {
            for (j, a, text, line) in entries {
                let expr = match parse(text, &base) {
                    Ok(e) => e,
                    Err(ExprError::UnknownIdentifier { name, offset }) => {
                        if thick.index_of(&name).is_some() || cot.index_of(&name).is_some() {
                            return Err(ManifestError::FiberDependence {
                                line: *line,
                                name,
                            });
                        }
                        return Err(ManifestError::Expression {
                            line: *line,
                            key: format!("Px/Py[{}][{}]", j + 1, a + 1),
                            source: ExprError::UnknownIdentifier { name, offset },
                        });
                    }
                    Err(e) => {
                        return Err(ManifestError::Expression {
                            line: *line,
                            key: format!("Px/Py[{}][{}]", j + 1, a + 1),
                            source: e,
                        })
                    }
                };
                table[*j][*a] = expr;
            }
        }
        Ok(Connection::new(self.m, self.r, px, py)?)
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            samples: self.samples,
            seed: self.seed,
            scan_range: self.scan_range,
            scan_steps: self.scan_steps,
            probe_non_closed: false,
            tolerances: self.tolerances,
        }
    }
}
