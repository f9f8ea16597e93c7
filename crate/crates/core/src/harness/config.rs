//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::abc::{Method, PriorBox, Standardization};
use crate::error::{Error, Result};
use crate::gp::KernelFamily;
use crate::lsfit::Family;
use crate::models::DEFAULT_OUT_CAP;
use crate::summaries::{SummaryKind, SummarySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Dmc,
    Price,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dmc => "dmc",
            ModelKind::Price => "price",
        }
    }

    pub fn directed(self) -> bool {
        self == ModelKind::Price
    }

    pub fn theta_names(self) -> Vec<String> {
        match self {
            ModelKind::Dmc => vec!["q_m".into(), "q_c".into()],
            ModelKind::Price => vec!["k0".into(), "p".into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    Er,
    EdgeList,
}

/// Every key a config file may set, with its default.
pub const KEYS: &[(&str, &str)] = &[
    ("model", "dmc"),
    ("prior_lower", ""),
    ("prior_upper", ""),
    ("seed_source", "er"),
    ("seed_nodes", "30"),
    ("seed_p", "0.2"),
    ("seed_rng", "1"),
    ("seed_path", ""),
    ("seed_cutoff", ""),
    ("n_s", "500"),
    ("n_o", "1000"),
    ("grid_start", "35"),
    ("grid_stop", ""),
    ("grid_step", "5"),
    ("summaries", ""),
    ("forms", ""),
    ("n_star", "100"),
    ("replicates", "1"),
    ("re_form", "power_offset"),
    ("method", "LS"),
    ("kernel", "linear_plus_rbf"),
    ("b", "1000"),
    ("k", "50"),
    ("standardization", "extrapolated"),
    ("aux_count", "1000"),
    ("master_seed", "1"),
    ("truths", "0.25:0.5"),
    ("replicate_count", "20"),
    ("price_out_cap", "610"),
    ("observed_path", ""),
    ("timing_n_o", "1000,4000"),
    ("timing_table_sizes", "100,1000"),
    ("timing_reps", "5"),
];

/// Keys that determine the content of a reference table. `b` is left out so
/// that a table can be extended by resuming with a larger size.
const TABLE_KEYS: &[&str] = &[
    "model",
    "prior_lower",
    "prior_upper",
    "seed_source",
    "seed_nodes",
    "seed_p",
    "seed_rng",
    "seed_path",
    "seed_cutoff",
    "n_s",
    "n_o",
    "grid_start",
    "grid_stop",
    "grid_step",
    "summaries",
    "forms",
    "n_star",
    "replicates",
    "re_form",
    "kernel",
    "master_seed",
    "price_out_cap",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    raw: BTreeMap<String, String>,
    pub model: ModelKind,
    pub prior: PriorBox,
    pub seed_source: SeedSource,
    pub seed_nodes: usize,
    pub seed_p: f64,
    pub seed_rng: u64,
    pub seed_path: Option<PathBuf>,
    pub seed_cutoff: Option<i64>,
    pub n_s: usize,
    pub n_o: usize,
    pub grid_start: usize,
    pub grid_stop: usize,
    pub grid_step: usize,
    pub summaries: Vec<SummaryKind>,
    pub forms: Vec<Family>,
    pub n_star: usize,
    pub replicates: usize,
    pub re_form: Family,
    pub methods: Vec<Method>,
    pub kernel: KernelFamily,
    pub b: usize,
    pub k: usize,
    pub standardization: Standardization,
    pub aux_count: usize,
    pub master_seed: u64,
    pub truths: Vec<Vec<f64>>,
    pub replicate_count: usize,
    pub price_out_cap: u64,
    pub observed_path: Option<PathBuf>,
    pub timing_n_o: Vec<usize>,
    pub timing_table_sizes: Vec<usize>,
    pub timing_reps: usize,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| parse_num(key, p)).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_pairs(std::iter::empty::<(String, String)>()).expect("defaults are valid")
    }
}

impl RunConfig {
    /// Parses config text. Lines are `key = value`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got {line:?}") })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut raw: BTreeMap<String, String> = KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in pairs {
            let k = k.into();
            if !raw.contains_key(&k) {
                return Err(Error::Config(format!("unknown key {k:?}")));
            }
            raw.insert(k, v.into());
        }
        Self::from_raw(raw)
    }

    /// Returns a copy with `key` set to `value`.
    pub fn with(&self, key: &str, value: &str) -> Result<Self> {
        let mut raw = self.raw.clone();
        if !raw.contains_key(key) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        raw.insert(key.to_string(), value.to_string());
        Self::from_raw(raw)
    }

    /// Applies `key=value` overrides in order; validation runs once at the end.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut raw = self.raw.clone();
        for o in overrides {
            let (k, v) = o
                .as_ref()
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {:?} is not key=value", o.as_ref())))?;
            let k = k.trim();
            if !raw.contains_key(k) {
                return Err(Error::Config(format!("unknown key {k:?}")));
            }
            raw.insert(k.to_string(), v.trim().to_string());
        }
        Self::from_raw(raw)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn from_raw(raw: BTreeMap<String, String>) -> Result<Self> {
        let g = |k: &str| raw[k].as_str();
        let model = match g("model") {
            "dmc" => ModelKind::Dmc,
            "price" => ModelKind::Price,
            other => return Err(Error::Config(format!("unknown model {other:?}"))),
        };
        let (def_lo, def_hi, def_summaries) = match model {
            ModelKind::Dmc => ("0.15,0.1", "0.35,0.9", "avg_degree,triangles"),
            ModelKind::Price => ("0.9,0.019", "1.1,0.021", "in_degree_mean,in_degree_var,triangles"),
        };
        let or = |v: &'static str, d: &'static str| if g(v).is_empty() { d.to_string() } else { g(v).to_string() };
        let prior = PriorBox::new(
            parse_list("prior_lower", &or("prior_lower", def_lo))?,
            parse_list("prior_upper", &or("prior_upper", def_hi))?,
        )?;
        if prior.dim() != 2 {
            return Err(Error::Config("prior box must have two coordinates".into()));
        }
        let seed_source = match g("seed_source") {
            "er" => SeedSource::Er,
            "edgelist" => SeedSource::EdgeList,
            other => return Err(Error::Config(format!("unknown seed_source {other:?}"))),
        };
        let opt_path = |k: &str| (!g(k).is_empty()).then(|| PathBuf::from(g(k)));
        let n_s: usize = parse_num("n_s", g("n_s"))?;
        let summaries: Vec<SummaryKind> = parse_list("summaries", &or("summaries", def_summaries))?;
        let forms: Vec<Family> = if g("forms").is_empty() {
            vec![Family::Power; summaries.len()]
        } else {
            parse_list("forms", g("forms"))?
        };
        let methods: Vec<Method> = parse_list("method", g("method"))?;
        let truths = g("truths")
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.split(':').map(|x| parse_num::<f64>("truths", x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;

        let cfg = RunConfig {
            model,
            prior,
            seed_source,
            seed_nodes: parse_num("seed_nodes", g("seed_nodes"))?,
            seed_p: parse_num("seed_p", g("seed_p"))?,
            seed_rng: parse_num("seed_rng", g("seed_rng"))?,
            seed_path: opt_path("seed_path"),
            seed_cutoff: if g("seed_cutoff").is_empty() { None } else { Some(parse_num("seed_cutoff", g("seed_cutoff"))?) },
            n_s,
            n_o: parse_num("n_o", g("n_o"))?,
            grid_start: parse_num("grid_start", g("grid_start"))?,
            grid_stop: if g("grid_stop").is_empty() { n_s } else { parse_num("grid_stop", g("grid_stop"))? },
            grid_step: parse_num("grid_step", g("grid_step"))?,
            summaries,
            forms,
            n_star: parse_num("n_star", g("n_star"))?,
            replicates: parse_num("replicates", g("replicates"))?,
            re_form: parse_num("re_form", g("re_form"))?,
            methods,
            kernel: parse_num("kernel", g("kernel"))?,
            b: parse_num("b", g("b"))?,
            k: parse_num("k", g("k"))?,
            standardization: parse_num("standardization", g("standardization"))?,
            aux_count: parse_num("aux_count", g("aux_count"))?,
            master_seed: parse_num("master_seed", g("master_seed"))?,
            truths,
            replicate_count: parse_num("replicate_count", g("replicate_count"))?,
            price_out_cap: if g("price_out_cap").is_empty() {
                DEFAULT_OUT_CAP
            } else {
                parse_num("price_out_cap", g("price_out_cap"))?
            },
            observed_path: opt_path("observed_path"),
            timing_n_o: parse_list("timing_n_o", g("timing_n_o"))?,
            timing_table_sizes: parse_list("timing_table_sizes", g("timing_table_sizes"))?,
            timing_reps: parse_num("timing_reps", g("timing_reps"))?,
            raw,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_s > self.n_o {
            return bad(format!("n_s = {} exceeds n_o = {}", self.n_s, self.n_o));
        }
        if self.seed_source == SeedSource::Er && self.seed_nodes == 0 {
            return bad("seed_nodes must be positive".into());
        }
        if self.seed_source == SeedSource::EdgeList && self.seed_path.is_none() {
            return bad("seed_source = edgelist needs seed_path".into());
        }
        if self.grid_step == 0 || self.grid_start > self.grid_stop || self.grid_stop > self.n_s {
            return bad(format!(
                "checkpoint grid {}..{} step {} must lie within (seed, n_s = {}]",
                self.grid_start, self.grid_stop, self.grid_step, self.n_s
            ));
        }
        if self.seed_source == SeedSource::Er && self.grid_start <= self.seed_nodes {
            return bad(format!("grid_start {} must exceed the seed size {}", self.grid_start, self.seed_nodes));
        }
        if self.summaries.is_empty() {
            return bad("no summaries requested".into());
        }
        if self.forms.len() != self.summaries.len() {
            return bad(format!("{} forms for {} summaries", self.forms.len(), self.summaries.len()));
        }
        for s in &self.summaries {
            if s.is_sampled() {
                return bad("sampled triangle counts are selected with method RE, not in summaries".into());
            }
            let needs_directed = matches!(s, SummaryKind::InDegreeMean | SummaryKind::InDegreeVariance);
            if needs_directed && !self.model.directed() {
                return bad(format!("summary {s} needs a directed model"));
            }
        }
        if self.methods.is_empty() {
            return bad("no method given".into());
        }
        let points = self.grid().len();
        for m in &self.methods {
            if m.uses_gp() && points < crate::gp::MIN_POINTS {
                return bad(format!("method {m} needs at least {} checkpoints", crate::gp::MIN_POINTS));
            }
            if m.uses_density() && self.summaries.len() != 2 {
                return bad(format!("method {m} needs exactly two summaries"));
            }
            if *m == Method::RE {
                if !self.summaries.contains(&SummaryKind::TriangleCount) {
                    return bad("method RE replaces the triangle count, which is not tracked".into());
                }
                if self.replicates == 0 || self.grid_for(Method::RE).len() < self.re_form.param_count() + 1 {
                    return bad(format!(
                        "method RE needs replicates ≥ 1 and more than {} checkpoints at or above n_star = {}",
                        self.re_form.param_count(),
                        self.n_star
                    ));
                }
            }
        }
        if self.b == 0 || self.k == 0 {
            return bad("b and k must be positive".into());
        }
        if self.k > self.b {
            return bad(format!("k = {} exceeds b = {}", self.k, self.b));
        }
        for t in &self.truths {
            if t.len() != self.prior.dim() {
                return bad(format!("truth {t:?} has the wrong dimension"));
            }
        }
        Ok(())
    }

    /// Checkpoint node counts.
    pub fn grid(&self) -> Vec<usize> {
        crate::models::GrowthPlan::grid(self.grid_start, self.grid_stop, self.grid_step)
    }

    /// Checkpoints tracked by `method`. RE cannot sample `n_star` nodes from
    /// a smaller graph, so its grid starts at the first point ≥ `n_star`.
    pub fn grid_for(&self, method: Method) -> Vec<usize> {
        let grid = self.grid();
        if method == Method::RE {
            grid.into_iter().filter(|&n| n >= self.n_star).collect()
        } else {
            grid
        }
    }

    pub fn method(&self) -> Method {
        self.methods[0]
    }

    /// Summary specs used by `method` (RE swaps the triangle count for its
    /// sampled version).
    pub fn summary_specs(&self, method: Method) -> Result<Vec<SummarySpec>> {
        self.summaries
            .iter()
            .map(|&kind| {
                if method == Method::RE && kind == SummaryKind::TriangleCount {
                    SummarySpec::sampled(self.n_star, self.replicates)
                } else {
                    Ok(SummarySpec::new(kind))
                }
            })
            .collect()
    }

    /// Functional forms aligned with `summary_specs(method)`.
    pub fn forms_for(&self, method: Method) -> Vec<Family> {
        self.summaries
            .iter()
            .zip(&self.forms)
            .map(|(&kind, &f)| if method == Method::RE && kind == SummaryKind::TriangleCount { self.re_form } else { f })
            .collect()
    }

    pub fn theta_names(&self) -> Vec<String> {
        self.model.theta_names()
    }

    /// Hash of everything that determines the rows of `method`'s table.
    pub fn table_hash(&self, method: Method) -> String {
        let mut text = String::new();
        for k in TABLE_KEYS {
            let _ = writeln!(text, "{k}={}", self.raw[*k]);
        }
        let _ = writeln!(text, "method={method}");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(16).map(|b| format!("{b:02x}")).collect()
    }

    /// Canonical text form, one `key = value` per line.
    pub fn to_text(&self) -> String {
        self.raw.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_desk_scale() {
        let c = RunConfig::default();
        assert_eq!((c.n_s, c.n_o, c.b, c.k, c.replicate_count), (500, 1000, 1000, 50, 20));
        assert_eq!(c.grid().len(), 94);
        assert_eq!(c.prior.lower, vec![0.15, 0.1]);
        assert_eq!(c.truths, vec![vec![0.25, 0.5]]);
        assert_eq!(c.method(), Method::LS);
    }

    #[test]
    fn parse_comments_and_overrides() {
        let c = RunConfig::parse("# study\nmodel = dmc\nb = 20 # small\nk = 10\nmethod = LS,S\ntruths = 0.2:0.3;0.3:0.7\n").unwrap();
        assert_eq!(c.b, 20);
        assert_eq!(c.methods, vec![Method::LS, Method::S]);
        assert_eq!(c.truths.len(), 2);
        let d = c.with_overrides(&["k=5", "n_o = 2000"]).unwrap();
        assert_eq!((d.k, d.n_o), (5, 2000));
        assert!(matches!(RunConfig::parse("bogus = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("model dmc"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn validation() {
        let c = RunConfig::default();
        assert!(c.with("n_s", "2000").is_err());
        assert!(c.with("grid_start", "20").is_err());
        assert!(c.with("k", "2000").is_err());
        assert!(c.with("summaries", "in_degree_mean").is_err());
        assert!(c.with("method", "RE").is_ok());
        assert!(c.with_overrides(&["method=RE", "n_star=490"]).is_err());
        assert!(c.with_overrides(&["method=RE", "replicates=0"]).is_err());
        assert!(c.with_overrides(&["b=10", "k=5"]).is_ok());
    }

    #[test]
    fn hash_ignores_table_size_only() {
        let c = RunConfig::default();
        assert_eq!(c.table_hash(Method::LS), c.with("b", "100").unwrap().table_hash(Method::LS));
        assert_eq!(c.table_hash(Method::LS), c.with("k", "10").unwrap().table_hash(Method::LS));
        assert_ne!(c.table_hash(Method::LS), c.with("master_seed", "2").unwrap().table_hash(Method::LS));
        assert_ne!(c.table_hash(Method::LS), c.table_hash(Method::S));
    }

    #[test]
    fn re_swaps_triangles() {
        let c = RunConfig::default().with("method", "RE").unwrap();
        let specs = c.summary_specs(Method::RE).unwrap();
        assert_eq!(c.grid_for(Method::RE)[0], 100);
        assert_eq!(c.grid_for(Method::LS)[0], 35);
        assert_eq!(specs[1].kind, SummaryKind::SampleTriangleCount);
        assert_eq!(c.forms_for(Method::RE), vec![Family::Power, Family::PowerOffset]);
        assert_eq!(c.summary_specs(Method::LS).unwrap()[1].kind, SummaryKind::TriangleCount);
    }
}
