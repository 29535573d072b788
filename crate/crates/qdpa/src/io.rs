//! File formats: metrics and power CSVs, Q-table CSVs and scenario documents.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use qdpa_core::{Method, MetricsRecord, QTable, RewardKind, Scenario, StateModel};

/// One line of `metrics.csv`. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub k_active: usize,
    pub method: String,
    pub state_model: String,
    pub reward_kind: String,
    pub mue_rate: f64,
    pub fue_sum_rate: f64,
    pub fbs_sum_power_mw: f64,
    pub mue_ok: bool,
    pub fue_ok_frac: f64,
    pub cl_messages: u64,
}

pub const METRICS_COLUMNS: [&str; 11] = [
    "seed",
    "k_active",
    "method",
    "state_model",
    "reward_kind",
    "mue_rate",
    "fue_sum_rate",
    "fbs_sum_power_mw",
    "mue_ok",
    "fue_ok_frac",
    "cl_messages",
];

impl From<&MetricsRecord> for MetricsRow {
    fn from(r: &MetricsRecord) -> Self {
        Self {
            seed: r.seed,
            k_active: r.k_active,
            method: r.method.name().to_string(),
            state_model: r.state_model.name().to_string(),
            reward_kind: r.reward_kind.name().to_string(),
            mue_rate: r.mue_rate,
            fue_sum_rate: r.fue_sum_rate,
            fbs_sum_power_mw: r.fbs_sum_power_mw,
            mue_ok: r.mue_ok,
            fue_ok_frac: r.fue_ok_frac,
            cl_messages: r.cl_messages,
        }
    }
}

impl MetricsRow {
    pub fn method(&self) -> Option<Method> {
        Method::from_name(&self.method)
    }
}

pub fn state_model_from_name(name: &str) -> Option<StateModel> {
    [
        StateModel::FueStatus,
        StateModel::MueStatus,
        StateModel::Full,
    ]
    .into_iter()
    .find(|m| m.name() == name)
}

pub fn reward_kind_from_name(name: &str) -> Option<RewardKind> {
    [
        RewardKind::Proposed,
        RewardKind::Quadratic,
        RewardKind::Exponential,
        RewardKind::Proximity,
    ]
    .into_iter()
    .find(|k| k.name() == name)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    if records.is_empty() {
        w.write_record(METRICS_COLUMNS)?;
    }
    for r in records {
        w.serialize(MetricsRow::from(r))?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != METRICS_COLUMNS {
        bail!("{}: unexpected columns {:?}", path.display(), header);
    }
    r.deserialize()
        .map(|row| row.with_context(|| format!("parsing {}", path.display())))
        .collect()
}

/// Long-format power vectors: one row per femtocell per record.
pub fn write_powers_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["seed", "k_active", "method", "fbs", "power_w"])?;
    for r in records {
        for (i, p) in r.powers_w.iter().enumerate() {
            w.write_record([
                r.seed.to_string(),
                r.k_active.to_string(),
                r.method.name().to_string(),
                (i + 1).to_string(),
                p.to_string(),
            ])?;
        }
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes `<stem>_q.csv` and `<stem>_visits.csv`: one row per state,
/// one column per action.
pub fn write_qtable(dir: &Path, stem: &str, q: &QTable) -> Result<()> {
    let header: Vec<String> = std::iter::once("state".to_string())
        .chain((0..q.actions()).map(|a| format!("a{a}")))
        .collect();
    let mut values = csv::Writer::from_writer(create(&dir.join(format!("{stem}_q.csv")))?);
    let mut visits = csv::Writer::from_writer(create(&dir.join(format!("{stem}_visits.csv")))?);
    values.write_record(&header)?;
    visits.write_record(&header)?;
    for s in 0..q.states() {
        values.write_record(
            std::iter::once(s.to_string()).chain(q.row(s).iter().map(f64::to_string)),
        )?;
        visits.write_record(
            std::iter::once(s.to_string()).chain(q.visit_row(s).iter().map(u64::to_string)),
        )?;
    }
    values.flush()?;
    visits.flush()?;
    Ok(())
}

pub fn read_qtable(dir: &Path, stem: &str) -> Result<QTable> {
    fn grid<T: std::str::FromStr>(path: &Path) -> Result<(usize, Vec<T>)>
    where
        T::Err: std::error::Error + Send + Sync + 'static,
    {
        let mut r =
            csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        let actions = r.headers()?.len().saturating_sub(1);
        let mut out = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.get(0) != Some(i.to_string().as_str()) {
                bail!("{}: rows must list states in order", path.display());
            }
            for field in rec.iter().skip(1) {
                out.push(
                    field
                        .parse::<T>()
                        .with_context(|| format!("{}: bad value {field:?}", path.display()))?,
                );
            }
        }
        Ok((actions, out))
    }
    let (actions, values) = grid::<f64>(&dir.join(format!("{stem}_q.csv")))?;
    let (_, visits) = grid::<u64>(&dir.join(format!("{stem}_visits.csv")))?;
    let states = values.len().checked_div(actions).unwrap_or(0);
    Ok(QTable::from_parts(states, actions, values, visits)?)
}

pub const SCENARIO_FORMAT: &str = "qdpa-scenario";
pub const SCENARIO_VERSION: u32 = 1;

/// Self-contained scenario snapshot: config, positions and gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub format: String,
    pub version: u32,
    pub k_active: usize,
    pub scenario: Scenario,
}

impl ScenarioDocument {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            format: SCENARIO_FORMAT.to_string(),
            version: SCENARIO_VERSION,
            k_active: scenario.num_femto(),
            scenario: scenario.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let doc: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing scenario {}", path.display()))?;
        doc.check()
            .with_context(|| format!("scenario {}", path.display()))?;
        Ok(doc)
    }

    fn check(&self) -> Result<()> {
        if self.format != SCENARIO_FORMAT || self.version != SCENARIO_VERSION {
            bail!("unsupported document {} v{}", self.format, self.version);
        }
        let s = &self.scenario;
        s.config.validate()?;
        let k = self.k_active;
        if s.channel.num_femto() != k
            || s.fbs.len() != k
            || s.fue.len() != k
            || s.apartment.len() != k
            || s.strip.len() != k
        {
            bail!("inconsistent femtocell count, expected {k}");
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdpa_core::topology::build_scenario;
    use qdpa_core::ScenarioConfig;

    #[test]
    fn qtable_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut q = QTable::new(3, 2);
        q.update(1, 1, 0.25, 0.0, 0.9);
        q.update(2, 0, -1.0 / 3.0, 0.5, 0.9);
        write_qtable(dir.path(), "t", &q).unwrap();
        assert_eq!(read_qtable(dir.path(), "t").unwrap(), q);
    }

    #[test]
    fn scenario_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = build_scenario(
            &ScenarioConfig {
                seed: 4,
                ..ScenarioConfig::default()
            },
            5,
        )
        .unwrap();
        let path = dir.path().join("s.json");
        ScenarioDocument::new(&s).save(&path).unwrap();
        let back = ScenarioDocument::load(&path).unwrap();
        assert_eq!(back.scenario, s);
        assert_eq!(back.k_active, 5);
    }

    #[test]
    fn name_lookups() {
        for m in [
            StateModel::FueStatus,
            StateModel::MueStatus,
            StateModel::Full,
        ] {
            assert_eq!(state_model_from_name(m.name()), Some(m));
        }
        assert_eq!(
            reward_kind_from_name("quadratic"),
            Some(RewardKind::Quadratic)
        );
    }
}
