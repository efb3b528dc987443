//! PCEN hyperparameters and their key-value file format.
//!
//! The parameter file is line-oriented `key = value` text. Scalars use
//! Rust's shortest round-trip float formatting, vectors are comma-separated,
//! and the bank logits appear as one `z<k>` row per smoother:
//!
//! ```text
//! pcen-params v1
//! channels = 40
//! eps = 1e-6
//! init = first-frame
//! alpha = 0.98,0.98,...
//! delta = 2.0,...
//! r = 0.5,...
//! smoother = bank
//! s_bank = 0.015,0.08
//! z0 = ...
//! z1 = ...
//! ```
//!
//! `smoother` is one of `single` (with `s = ...`), `per-channel` (with
//! `s_per_channel = ...`) or `bank`. Loading a saved file reproduces every
//! value bit-exactly.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// How the smoother state is seeded at the first frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    /// `M(0,f) = E(0,f)`: no startup transient, and the full-AGC regime is
    /// gain-invariant from frame 0.
    FirstFrame,
    /// The state starts at 0 and the recursion already applies to the first
    /// frame, so `M(0,f) = s*E(0,f)` and a unit step follows
    /// `1 - (1-s)^(t+1)`.
    Zero,
}

/// Smoothing configuration: one coefficient, one per channel, or a bank of
/// coefficients blended per channel through softmax weights.
#[derive(Clone, Debug, PartialEq)]
pub enum SmootherSpec {
    Single(f64),
    PerChannel(Vec<f64>),
    Bank {
        coefficients: Vec<f64>,
        /// K×F logits; weights are `softmax_k(z[k][f])` per channel.
        logits: Vec<Vec<f64>>,
    },
}

/// All PCEN hyperparameters, per-channel where the compression is
/// frequency-dependent.
#[derive(Clone, Debug, PartialEq)]
pub struct PcenParams {
    /// Stabilizer added to the smoothed level before exponentiation. The
    /// shipped default is 1e-6; zero is allowed for the exact gain-invariant
    /// regime where the caller guarantees strictly positive smoothed energy.
    pub eps: f64,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    pub r: Vec<f64>,
    pub smoother: SmootherSpec,
    pub init: InitMode,
}

fn coeff_ok(s: f64) -> bool {
    s > 0.0 && s <= 1.0
}

impl PcenParams {
    /// Fixed scalar parameters: `s = 0.025`, `alpha = 0.98`, `delta = 2`,
    /// `r = 0.5`, `eps = 1e-6`, first-frame initialization.
    pub fn defaults(channels: usize) -> Self {
        Self {
            eps: 1e-6,
            alpha: vec![0.98; channels],
            delta: vec![2.0; channels],
            r: vec![0.5; channels],
            smoother: SmootherSpec::Single(0.025),
            init: InitMode::FirstFrame,
        }
    }

    /// Single smoother computed with alternating coefficients: even channels
    /// use the slow smoother (0.015), odd channels the fast one (0.08).
    pub fn alternating_smoother(channels: usize) -> SmootherSpec {
        SmootherSpec::PerChannel(
            (0..channels)
                .map(|f| if f % 2 == 0 { 0.015 } else { 0.08 })
                .collect(),
        )
    }

    pub fn channels(&self) -> usize {
        self.alpha.len()
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.channels();
        if f == 0 {
            return Err(Error::InvalidParam("zero channels".into()));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "eps must be finite and >= 0, got {}",
                self.eps
            )));
        }
        if self.delta.len() != f || self.r.len() != f {
            return Err(Error::ShapeMismatch(format!(
                "alpha/delta/r lengths {}/{}/{} differ",
                f,
                self.delta.len(),
                self.r.len()
            )));
        }
        if self.alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParam("alpha entries must be > 0".into()));
        }
        if self.delta.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidParam("delta entries must be >= 0".into()));
        }
        // r > 0 keeps (x + delta)^r well defined at x = 0 even when delta
        // is 0; r <= 0 with delta = 0 would hit the 0^r singularity.
        if self.r.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParam("r entries must be > 0".into()));
        }
        match &self.smoother {
            SmootherSpec::Single(s) => {
                if !coeff_ok(*s) {
                    return Err(Error::InvalidParam(format!(
                        "smoothing coefficient {s} outside (0, 1]"
                    )));
                }
            }
            SmootherSpec::PerChannel(s) => {
                if s.len() != f {
                    return Err(Error::ShapeMismatch(format!(
                        "{} per-channel coefficients for {f} channels",
                        s.len()
                    )));
                }
                if s.iter().any(|&s| !coeff_ok(s)) {
                    return Err(Error::InvalidParam(
                        "per-channel smoothing coefficients must be in (0, 1]".into(),
                    ));
                }
            }
            SmootherSpec::Bank {
                coefficients,
                logits,
            } => {
                if coefficients.is_empty() {
                    return Err(Error::InvalidParam("smoother bank is empty".into()));
                }
                if coefficients.iter().any(|&s| !coeff_ok(s)) {
                    return Err(Error::InvalidParam(
                        "bank coefficients must be in (0, 1]".into(),
                    ));
                }
                if logits.len() != coefficients.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "{} logit rows for {} coefficients",
                        logits.len(),
                        coefficients.len()
                    )));
                }
                for row in logits {
                    if row.len() != f {
                        return Err(Error::ShapeMismatch(format!(
                            "logit row of length {} for {f} channels",
                            row.len()
                        )));
                    }
                    if row.iter().any(|z| !z.is_finite()) {
                        return Err(Error::InvalidParam("logits must be finite".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, &path.display().to_string())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("pcen-params v1\n");
        let push_vec = |out: &mut String, key: &str, v: &[f64]| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&fmt_vec(v));
            out.push('\n');
        };
        out.push_str(&format!("channels = {}\n", self.channels()));
        out.push_str(&format!("eps = {:?}\n", self.eps));
        out.push_str(&format!(
            "init = {}\n",
            match self.init {
                InitMode::FirstFrame => "first-frame",
                InitMode::Zero => "zero",
            }
        ));
        push_vec(&mut out, "alpha", &self.alpha);
        push_vec(&mut out, "delta", &self.delta);
        push_vec(&mut out, "r", &self.r);
        match &self.smoother {
            SmootherSpec::Single(s) => {
                out.push_str("smoother = single\n");
                out.push_str(&format!("s = {s:?}\n"));
            }
            SmootherSpec::PerChannel(s) => {
                out.push_str("smoother = per-channel\n");
                push_vec(&mut out, "s_per_channel", s);
            }
            SmootherSpec::Bank {
                coefficients,
                logits,
            } => {
                out.push_str("smoother = bank\n");
                push_vec(&mut out, "s_bank", coefficients);
                for (k, row) in logits.iter().enumerate() {
                    push_vec(&mut out, &format!("z{k}"), row);
                }
            }
        }
        out
    }

    pub fn from_text(text: &str, origin: &str) -> Result<Self> {
        let kv = parse_kv(text, origin, "pcen-params v1")?;
        let channels: usize = kv.get_scalar(origin, "channels")?;
        let eps = kv.get_scalar(origin, "eps")?;
        let init = match kv.get_str(origin, "init")? {
            "first-frame" => InitMode::FirstFrame,
            "zero" => InitMode::Zero,
            other => return Err(Error::malformed(origin, format!("unknown init `{other}`"))),
        };
        let alpha = kv.get_vec(origin, "alpha")?;
        let delta = kv.get_vec(origin, "delta")?;
        let r = kv.get_vec(origin, "r")?;
        let smoother = match kv.get_str(origin, "smoother")? {
            "single" => SmootherSpec::Single(kv.get_scalar(origin, "s")?),
            "per-channel" => SmootherSpec::PerChannel(kv.get_vec(origin, "s_per_channel")?),
            "bank" => {
                let coefficients = kv.get_vec(origin, "s_bank")?;
                let mut logits = Vec::with_capacity(coefficients.len());
                for k in 0..coefficients.len() {
                    logits.push(kv.get_vec(origin, &format!("z{k}"))?);
                }
                SmootherSpec::Bank {
                    coefficients,
                    logits,
                }
            }
            other => {
                return Err(Error::malformed(
                    origin,
                    format!("unknown smoother `{other}`"),
                ))
            }
        };
        let params = PcenParams {
            eps,
            alpha,
            delta,
            r,
            smoother,
            init,
        };
        if params.channels() != channels {
            return Err(Error::malformed(
                origin,
                format!(
                    "channels field says {channels} but alpha has {}",
                    params.channels()
                ),
            ));
        }
        params.validate()?;
        Ok(params)
    }
}

pub(crate) fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Simple `key = value` store shared by the params and checkpoint formats.
pub(crate) struct KvFile {
    map: BTreeMap<String, String>,
}

impl KvFile {
    pub fn get_str<'a>(&'a self, origin: &str, key: &str) -> Result<&'a str> {
        self.map
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::malformed(origin, format!("missing key `{key}`")))
    }

    pub fn get_scalar<T: std::str::FromStr>(&self, origin: &str, key: &str) -> Result<T> {
        let raw = self.get_str(origin, key)?;
        raw.parse()
            .map_err(|_| Error::malformed(origin, format!("bad value for `{key}`: `{raw}`")))
    }

    pub fn get_vec(&self, origin: &str, key: &str) -> Result<Vec<f64>> {
        let raw = self.get_str(origin, key)?;
        raw.split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::malformed(origin, format!("bad float `{tok}` in `{key}`"))
                })
            })
            .collect()
    }

    pub fn get_opt_scalar<T: std::str::FromStr>(
        &self,
        origin: &str,
        key: &str,
    ) -> Result<Option<T>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(_) => self.get_scalar(origin, key).map(Some),
        }
    }
}

pub(crate) fn parse_kv(text: &str, origin: &str, expected_header: &str) -> Result<KvFile> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::malformed(origin, "empty file"))?;
    if header.trim() != expected_header {
        return Err(Error::malformed(
            origin,
            format!("expected header `{expected_header}`, found `{header}`"),
        ));
    }
    let mut map = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::malformed(origin, format!("line {}: missing `=`", i + 2)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(KvFile { map })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PcenParams::defaults(40).validate().unwrap();
    }

    #[test]
    fn coefficient_domain_is_checked() {
        let mut p = PcenParams::defaults(4);
        p.smoother = SmootherSpec::Single(0.0);
        assert!(p.validate().is_err());
        p.smoother = SmootherSpec::Single(1.0);
        assert!(p.validate().is_ok());
        p.smoother = SmootherSpec::Single(1.0 + 1e-12);
        assert!(p.validate().is_err());
    }

    #[test]
    fn empty_bank_is_rejected() {
        let mut p = PcenParams::defaults(4);
        p.smoother = SmootherSpec::Bank {
            coefficients: vec![],
            logits: vec![],
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn text_roundtrip_is_bit_exact() {
        let mut p = PcenParams::defaults(3);
        p.alpha = vec![0.98, 1.0 + 1e-13, 0.1234567890123456];
        p.smoother = SmootherSpec::Bank {
            coefficients: vec![0.015, 0.08],
            logits: vec![vec![0.3, -1.75, 1e-9], vec![-0.25, 50.0, 0.0]],
        };
        let text = p.to_text();
        let q = PcenParams::from_text(&text, "mem").unwrap();
        assert_eq!(p, q);
    }
}
