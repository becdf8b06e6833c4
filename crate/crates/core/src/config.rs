//! Metric configuration: thresholds, exponents, per-language reference fits
//! and lexicons. Every key is optional in the file; absent keys keep the
//! defaults below.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Language;

/// A value held separately for each evaluation language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerLanguage<T> {
    pub en: T,
    pub zh: T,
}

impl<T> PerLanguage<T> {
    pub fn get(&self, lang: Language) -> &T {
        match lang {
            Language::En => &self.en,
            Language::Zh => &self.zh,
        }
    }

    pub fn get_mut(&mut self, lang: Language) -> &mut T {
        match lang {
            Language::En => &mut self.en,
            Language::Zh => &mut self.zh,
        }
    }
}

/// Log-space Gaussian reference `(mu, sigma)` used by the centered scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceFit {
    pub mu: f64,
    pub sigma: f64,
}

/// Temporal-density reference; carries its own smoothing constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TdReference {
    pub mu: f64,
    pub sigma: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// Concave exponent applied to event and text energies.
    pub p: f64,
    /// Grayscale difference a pixel must strictly exceed to count as changed.
    pub tau: f64,
    /// Smoothing constant inside the PADVC centered score's log.
    pub epsilon_padvc: f64,
    pub padvc_ref: PerLanguage<ReferenceFit>,
    pub td_ref: PerLanguage<TdReference>,
    /// Change ratio a transition must strictly exceed to count as active.
    pub event_activity_threshold: f64,
    /// Active runs separated by fewer quiet transitions than this are merged.
    pub event_min_gap_frames: usize,
    pub overlap_area_frac: f64,
    pub oob_frac: f64,
    pub leak_margin: f64,
    /// Overlap ratio up to which two grid cells count as merely abutting
    /// (compared after a 5% allowance).
    pub grid_abutment_tol: f64,
    /// Overlaps involving an object at or below this effective opacity are exempt.
    pub suppress_opacity: f64,
    pub container_roles: Vec<String>,
    pub action_lexicon: PerLanguage<Vec<String>>,
    /// Optional lexicon file that replaces `action_lexicon` when set.
    pub lexicon_path: Option<PathBuf>,
    /// Constructor names whose string arguments are rendered as text.
    pub text_constructors: Vec<String>,
    /// Text-energy sampling stride, in frames; event end frames are always sampled.
    pub text_sample_stride: usize,
    pub ocr_min_confidence: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    /// Used when a frame directory carries no `fps.txt`.
    pub default_fps: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            p: 0.7,
            tau: 25.0,
            epsilon_padvc: 1e-8,
            padvc_ref: PerLanguage {
                en: ReferenceFit {
                    mu: -2.4470,
                    sigma: 1.8098,
                },
                zh: ReferenceFit {
                    mu: -0.6663,
                    sigma: 0.6547,
                },
            },
            td_ref: PerLanguage {
                en: TdReference {
                    mu: -3.4075,
                    sigma: 0.4680,
                    epsilon: 4.71e-3,
                },
                zh: TdReference {
                    mu: -3.6128,
                    sigma: 0.5952,
                    epsilon: 9.81e-5,
                },
            },
            event_activity_threshold: 0.002,
            event_min_gap_frames: 3,
            overlap_area_frac: 0.10,
            oob_frac: 0.15,
            leak_margin: 0.05,
            grid_abutment_tol: 0.15,
            suppress_opacity: 0.05,
            container_roles: ["container", "textbox", "matrix", "frame"]
                .map(String::from)
                .to_vec(),
            action_lexicon: PerLanguage {
                en: ["draw", "show", "animate", "transform", "demonstrate", "compare"]
                    .map(String::from)
                    .to_vec(),
                zh: ["演示", "绘制", "展示", "变换", "比较"].map(String::from).to_vec(),
            },
            lexicon_path: None,
            text_constructors: [
                "Text",
                "MarkupText",
                "Paragraph",
                "Title",
                "Tex",
                "MathTex",
                "SingleStringMathTex",
                "BulletedList",
            ]
            .map(String::from)
            .to_vec(),
            text_sample_stride: 5,
            ocr_min_confidence: 0.5,
            bootstrap_resamples: 10_000,
            bootstrap_seed: 0x5eed_2026,
            default_fps: 15.0,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg()))
            }
        }
        let pos = |v: f64| v.is_finite() && v > 0.0;
        check(self.p > 0.0 && self.p < 1.0, || format!("p must lie in (0,1), got {}", self.p))?;
        check((0.0..=255.0).contains(&self.tau), || {
            format!("tau must lie in [0,255], got {}", self.tau)
        })?;
        check(pos(self.epsilon_padvc), || {
            format!("epsilon_padvc must be positive, got {}", self.epsilon_padvc)
        })?;
        for lang in Language::ALL {
            let r = self.padvc_ref.get(lang);
            check(r.mu.is_finite() && pos(r.sigma), || {
                format!("padvc_ref.{lang}: need finite mu and positive sigma, got {r:?}")
            })?;
            let t = self.td_ref.get(lang);
            check(t.mu.is_finite() && pos(t.sigma) && pos(t.epsilon), || {
                format!("td_ref.{lang}: need finite mu, positive sigma and epsilon, got {t:?}")
            })?;
        }
        check((0.0..=1.0).contains(&self.event_activity_threshold), || {
            format!(
                "event_activity_threshold must lie in [0,1], got {}",
                self.event_activity_threshold
            )
        })?;
        check(self.event_min_gap_frames >= 1, || {
            "event_min_gap_frames must be positive".into()
        })?;
        check(self.overlap_area_frac > 0.0 && self.overlap_area_frac <= 1.0, || {
            format!("overlap_area_frac must lie in (0,1], got {}", self.overlap_area_frac)
        })?;
        check(self.oob_frac > 0.0 && self.oob_frac <= 1.0, || {
            format!("oob_frac must lie in (0,1], got {}", self.oob_frac)
        })?;
        check(self.leak_margin.is_finite() && self.leak_margin >= 0.0, || {
            format!("leak_margin must be nonnegative, got {}", self.leak_margin)
        })?;
        check(self.grid_abutment_tol.is_finite() && self.grid_abutment_tol >= 0.0, || {
            format!("grid_abutment_tol must be nonnegative, got {}", self.grid_abutment_tol)
        })?;
        check((0.0..=1.0).contains(&self.suppress_opacity), || {
            format!("suppress_opacity must lie in [0,1], got {}", self.suppress_opacity)
        })?;
        check(self.text_sample_stride >= 1, || "text_sample_stride must be positive".into())?;
        check((0.0..=1.0).contains(&self.ocr_min_confidence), || {
            format!("ocr_min_confidence must lie in [0,1], got {}", self.ocr_min_confidence)
        })?;
        check(self.bootstrap_resamples >= 1, || "bootstrap_resamples must be positive".into())?;
        check(pos(self.default_fps), || {
            format!("default_fps must be positive, got {}", self.default_fps)
        })?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }

    /// Parses TOML text, overlaying it onto the defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let overrides: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut base = toml::Table::try_from(MetricConfig::default())
            .map_err(|e| Error::Config(e.to_string()))?;
        merge_tables(&mut base, overrides);
        let cfg: MetricConfig = toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge_tables(base: &mut toml::Table, overrides: toml::Table) {
    for (key, value) in overrides {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Reads a config file. A relative `lexicon_path` is resolved against the
/// config file's directory and its contents replace the inline lexicon.
pub fn load_config(path: &Path) -> Result<MetricConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = MetricConfig::from_toml_str(&text)?;
    if let Some(lex) = cfg.lexicon_path.clone() {
        let resolved = if lex.is_relative() {
            path.parent().unwrap_or(Path::new(".")).join(lex)
        } else {
            lex
        };
        let text = fs::read_to_string(&resolved).map_err(|e| Error::io(&resolved, e))?;
        cfg.action_lexicon = parse_lexicon(&text)?;
    }
    Ok(cfg)
}

/// Parses a language-sectioned lexicon: `[en]` / `[zh]` headers, one term per
/// line, `#` comments and blank lines ignored.
pub fn parse_lexicon(text: &str) -> Result<PerLanguage<Vec<String>>> {
    let mut lex = PerLanguage {
        en: Vec::new(),
        zh: Vec::new(),
    };
    let mut current: Option<Language> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(section.parse().map_err(|_| {
                Error::Config(format!("lexicon line {}: unknown section [{section}]", lineno + 1))
            })?);
            continue;
        }
        let lang = current.ok_or_else(|| {
            Error::Config(format!("lexicon line {}: term before any section", lineno + 1))
        })?;
        lex.get_mut(lang).push(line.to_string());
    }
    Ok(lex)
}
