use nishimori::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::job::Job;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a command's outputs byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub core_version: String,
    /// SHA-256 of the job's canonical JSON.
    pub config_sha256: String,
    pub master_seed: Option<u64>,
    pub job: Job,
    pub outputs: Vec<OutputFile>,
}

fn hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn job_hash(job: &Job) -> Result<String> {
    let canonical = serde_json::to_vec(job).map_err(|e| Error::Io(e.to_string()))?;
    Ok(hex(&canonical))
}

impl Manifest {
    pub fn new(job: Job, outputs: &[(String, &[u8])]) -> Result<Self> {
        Ok(Self {
            command: job.name().into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: nishimori::VERSION.into(),
            config_sha256: job_hash(&job)?,
            master_seed: job.seed(),
            outputs: outputs.iter().map(|(p, b)| OutputFile { path: p.clone(), sha256: hex(b) }).collect(),
            job,
        })
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        v.push(b'\n');
        Ok(v)
    }

    /// Parse and check that the recorded hash still matches the job.
    pub fn parse(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
        let h = job_hash(&m.job)?;
        if h != m.config_sha256 {
            return Err(Error::Config(format!("manifest hash {} does not match its job ({h})", m.config_sha256)));
        }
        Ok(m)
    }
}
