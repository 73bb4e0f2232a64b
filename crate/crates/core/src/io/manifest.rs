use super::config::RunConfig;
use crate::field::{ErrorSchedule, FieldSpec};
use crate::machine::MachineSpec;
use sha2::{Digest, Sha256};

/// SHA-256 of the canonical machine text, hex encoded.
pub fn machine_digest(m: &MachineSpec) -> String {
    format!("{:x}", Sha256::digest(m.to_text().as_bytes()))
}

/// Everything needed to repeat a run: the config plus the constants derived
/// from it when the field was compiled.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub machine_name: String,
    pub machine_digest: String,
    pub config: RunConfig,
    pub lambda: f64,
    pub rho0: f64,
    pub m_bound: Option<f64>,
    pub tau: Option<f64>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &RunConfig, fs: &FieldSpec, schedule: Option<&ErrorSchedule>) -> Self {
        RunManifest {
            machine_name: fs.machine().name.clone(),
            machine_digest: machine_digest(fs.machine()),
            config: config.clone(),
            lambda: fs.lambda(),
            rho0: fs.rho0(),
            m_bound: schedule.map(|s| s.m_bound()),
            tau: schedule.map(|s| s.tau()),
            artifacts: Vec::new(),
        }
    }

    pub fn add_artifact(&mut self, name: impl Into<String>) {
        self.artifacts.push(name.into());
    }

    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
        let mut s = format!(
            "machine_name = {}\nmachine_digest = {}\nlambda = {}\nrho0 = {}\nm_bound = {}\ntau = {}\n",
            self.machine_name,
            self.machine_digest,
            self.lambda,
            self.rho0,
            opt(self.m_bound),
            opt(self.tau)
        );
        s.push_str(&self.config.to_text());
        s.push_str(&format!("artifacts = {}\n", self.artifacts.join(" ")));
        s
    }
}
