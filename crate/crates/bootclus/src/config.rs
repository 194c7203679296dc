//! Run configuration: a TOML file naming the data, the null model, the
//! pipeline, and the output directory. All values are echoed into the result
//! JSON for provenance.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bootstrap::{Dataset, IndexChoice, MethodChoice, NullModelChoice, PipelineSpec};
use crate::data::{read_mixed_csv, read_presence_absence, read_schema, read_series_csv};
use crate::dissimilarity::{MixedDistanceConfig, SeriesCostMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataConfig,
    pub null_model: NullModelChoice,
    pub pipeline: PipelineConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum DataConfig {
    Mixed {
        path: PathBuf,
        schema: PathBuf,
    },
    Series {
        path: PathBuf,
        t_len: usize,
        h: usize,
        prescription_period: usize,
    },
    PresenceAbsence {
        path: PathBuf,
        neighbors: PathBuf,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(flatten)]
    pub method: MethodChoice,
    #[serde(flatten)]
    pub index: IndexChoice,
    pub k: Vec<usize>,
    pub m: usize,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub mixed_distance: Option<MixedDistanceConfig>,
    #[serde(default)]
    pub series_costs: Option<SeriesCostMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        if !path.is_file() {
            return Err(Error::config(format!("config file not found: {}", path.display())));
        }
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let paths: Vec<&Path> = match &self.data {
            DataConfig::Mixed { path, schema } => vec![path, schema],
            DataConfig::Series { path, .. } => vec![path],
            DataConfig::PresenceAbsence { path, neighbors } => vec![path, neighbors],
        };
        for p in paths {
            if !p.exists() {
                return Err(Error::config(format!("missing input file: {}", p.display())));
            }
        }
        if self.pipeline.m < 1 {
            return Err(Error::config("m >= 1 required"));
        }
        if self.pipeline.k.is_empty() {
            return Err(Error::config("K must be nonempty"));
        }
        Ok(())
    }

    /// Load the dataset this configuration points at. Ingestion warnings go
    /// to standard error.
    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.data {
            DataConfig::Mixed { path, schema } => {
                let specs = read_schema(schema)?;
                Ok(Dataset::Mixed(read_mixed_csv(path, &specs)?))
            }
            DataConfig::Series {
                path,
                t_len,
                h,
                prescription_period,
            } => Ok(Dataset::Series(read_series_csv(
                path,
                *t_len,
                *h,
                *prescription_period,
            )?)),
            DataConfig::PresenceAbsence { path, neighbors } => {
                let (data, warnings) = read_presence_absence(path, neighbors)?;
                for w in warnings {
                    eprintln!("warning: {}", w);
                }
                Ok(Dataset::PresenceAbsence(data))
            }
        }
    }

    pub fn pipeline_spec(&self, progress: bool) -> PipelineSpec {
        PipelineSpec {
            null_model: self.null_model.clone(),
            method: self.pipeline.method.clone(),
            index: self.pipeline.index.clone(),
            k_values: self.pipeline.k.clone(),
            m: self.pipeline.m,
            seed: self.pipeline.seed,
            mixed_distance: self.pipeline.mixed_distance.clone(),
            series_costs: self.pipeline.series_costs.clone(),
            workers: self.pipeline.workers,
            progress,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_mixed_config() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.csv");
        let schema = dir.path().join("s.toml");
        std::fs::write(&data, "x\n1\n2\n").unwrap();
        std::fs::write(&schema, "[[variable]]\nname = \"x\"\nkind = \"continuous\"\n").unwrap();
        let text = format!(
            r#"
[data]
shape = "mixed"
path = "{}"
schema = "{}"

[null_model]
family = "latent-gaussian"

[pipeline]
method = "pam"
index = "asw"
k = [2, 3]
m = 9
seed = 1

[output]
dir = "out"
"#,
            data.display(),
            schema.display()
        );
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, text).unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert!(matches!(cfg.pipeline.method, MethodChoice::Pam));
        assert!(matches!(cfg.pipeline.index, IndexChoice::Asw));
        assert_eq!(cfg.pipeline.k, vec![2, 3]);
    }

    #[test]
    fn m_zero_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("d.csv");
        std::fs::write(&data, "1,2\n").unwrap();
        let text = format!(
            r#"
[data]
shape = "series"
path = "{}"
t_len = 2
h = 3
prescription_period = 7

[null_model]
family = "markov"

[pipeline]
method = "pam"
index = "asw"
k = [2]
m = 0
seed = 1

[output]
dir = "out"
"#,
            data.display()
        );
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, text).unwrap();
        let err = RunConfig::load(&cfg_path).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
