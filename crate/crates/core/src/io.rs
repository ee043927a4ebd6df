//! JSON interchange formats: instances in, schedules and reports out.
//!
//! Rationals cross the boundary as `[numerator, denominator]` integer
//! pairs, so nothing is ever rounded through floating point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, RawInstance, RawJob, SizeClass, Violation};
use crate::numerics::Rational;
use crate::solvers::{Method, SolveStats};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("epsilon denominator must be positive")]
    BadEpsilon,
    #[error("invalid instance: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("value does not fit the interchange integer range")]
    Overflow,
    #[error("schedule references unknown job {0:?}")]
    UnknownJob(String),
    #[error("schedule references unknown machine {0:?}")]
    UnknownMachine(String),
    #[error("schedule misses job {0:?}")]
    MissingJob(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// On-disk instance: exact epsilon, machine names, jobs with eligibility
/// lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub epsilon: [i64; 2],
    pub machines: Vec<String>,
    pub jobs: Vec<JobFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobFile {
    pub id: String,
    pub size: SizeClass,
    pub eligible: Vec<String>,
}

impl InstanceFile {
    pub fn to_raw(&self) -> Result<RawInstance, IoError> {
        let [num, den] = self.epsilon;
        if den <= 0 {
            return Err(IoError::BadEpsilon);
        }
        Ok(RawInstance {
            epsilon: Rational::new(num.into(), den.into()),
            machines: self.machines.clone(),
            jobs: self
                .jobs
                .iter()
                .map(|j| RawJob {
                    id: j.id.clone(),
                    size: j.size,
                    eligible: j.eligible.clone(),
                })
                .collect(),
        })
    }

    pub fn from_instance(instance: &Instance) -> Result<InstanceFile, IoError> {
        let raw = instance.to_raw();
        Ok(InstanceFile {
            epsilon: rational_pair(&raw.epsilon)?,
            machines: raw.machines,
            jobs: raw
                .jobs
                .into_iter()
                .map(|j| JobFile {
                    id: j.id,
                    size: j.size,
                    eligible: j.eligible,
                })
                .collect(),
        })
    }
}

/// Exact `[numerator, denominator]` form, failing on overflow rather than
/// rounding.
pub fn rational_pair(x: &Rational) -> Result<[i64; 2], IoError> {
    let num = i64::try_from(x.numer()).map_err(|_| IoError::Overflow)?;
    let den = i64::try_from(x.denom()).map_err(|_| IoError::Overflow)?;
    Ok([num, den])
}

/// Parse and validate an instance from JSON text.
pub fn parse_instance(json: &str) -> Result<Instance, IoError> {
    let file: InstanceFile = serde_json::from_str(json)?;
    let raw = file.to_raw()?;
    Instance::from_raw(&raw).map_err(IoError::Invalid)
}

/// Serialize an instance as pretty JSON (stable field and entry order).
pub fn serialize_instance(instance: &Instance) -> Result<String, IoError> {
    let file = InstanceFile::from_instance(instance)?;
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Machine-readable solve report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub assignment: BTreeMap<String, String>,
    pub makespan: [i64; 2],
    pub method: String,
    pub tau: Option<[i64; 2]>,
    #[serde(default)]
    pub stats: serde_json::Value,
}

/// Assemble the canonical report JSON. Counters are deterministic, so two
/// identical runs serialize byte-identically; wall-clock time is therefore
/// reported on stderr by the CLI, never here.
pub fn report_file(
    instance: &Instance,
    schedule: &crate::instance::Schedule,
    makespan: &Rational,
    method: Method,
    tau: Option<&Rational>,
    stats: &SolveStats,
) -> Result<ReportFile, IoError> {
    let mut assignment = BTreeMap::new();
    for j in instance.jobs() {
        assignment.insert(
            instance.job(j).name.clone(),
            instance
                .machine_name(schedule.assignment[j.ix()])
                .to_string(),
        );
    }
    Ok(ReportFile {
        assignment,
        makespan: rational_pair(makespan)?,
        method: method.to_string(),
        tau: tau.map(rational_pair).transpose()?,
        stats: serde_json::to_value(stats)?,
    })
}

/// Anything carrying an `assignment` map can be verified against an
/// instance; extra report fields are ignored.
#[derive(Debug, Clone, Deserialize)]
pub struct ScheduleFile {
    pub assignment: BTreeMap<String, String>,
}

/// Re-interpret a schedule file against `instance`, failing on unknown or
/// missing names.
pub fn schedule_from_file(
    instance: &Instance,
    file: &ScheduleFile,
) -> Result<crate::instance::Schedule, IoError> {
    use crate::instance::Machine;
    let machine_index: BTreeMap<&str, Machine> = instance
        .machines()
        .map(|m| (instance.machine_name(m), m))
        .collect();
    let mut assignment = Vec::with_capacity(instance.job_count());
    for j in instance.jobs() {
        let name = &instance.job(j).name;
        let target = file
            .assignment
            .get(name)
            .ok_or_else(|| IoError::MissingJob(name.clone()))?;
        let m = machine_index
            .get(target.as_str())
            .ok_or_else(|| IoError::UnknownMachine(target.clone()))?;
        assignment.push(*m);
    }
    for name in file.assignment.keys() {
        if !instance.jobs().any(|j| &instance.job(j).name == name) {
            return Err(IoError::UnknownJob(name.clone()));
        }
    }
    Ok(crate::instance::Schedule { assignment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    #[test]
    fn parse_round_trip() {
        let text = r#"{
            "epsilon": [1, 2],
            "machines": ["m1", "m2"],
            "jobs": [
                {"id": "b1", "size": "big", "eligible": ["m1", "m2"]},
                {"id": "s1", "size": "small", "eligible": ["m1"]}
            ]
        }"#;
        let instance = parse_instance(text).unwrap();
        assert_eq!(*instance.epsilon(), rat(1, 2));
        let serialized = serialize_instance(&instance).unwrap();
        let reparsed = parse_instance(&serialized).unwrap();
        assert_eq!(instance, reparsed);
    }

    #[test]
    fn zero_denominator_is_rejected() {
        let text = r#"{"epsilon": [1, 0], "machines": ["m1"], "jobs": []}"#;
        assert!(matches!(parse_instance(text), Err(IoError::BadEpsilon)));
    }

    #[test]
    fn invalid_instances_report_violations() {
        let text = r#"{
            "epsilon": [1, 2],
            "machines": ["m1"],
            "jobs": [{"id": "s1", "size": "small", "eligible": []}]
        }"#;
        match parse_instance(text) {
            Err(IoError::Invalid(v)) => assert_eq!(v.len(), 1),
            other => panic!("expected a violation list, got {other:?}"),
        }
    }
}
