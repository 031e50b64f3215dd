use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ZoneId;

/// Passengers per day between origin and destination zones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemandMatrix {
    entries: BTreeMap<(ZoneId, ZoneId), f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DemandRow {
    origin_zone: u32,
    dest_zone: u32,
    passengers: f64,
}

impl DemandMatrix {
    /// Entries for the same pair are summed; zero entries are dropped.
    pub fn new(entries: impl IntoIterator<Item = ((ZoneId, ZoneId), f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for ((s, t), q) in entries {
            if !q.is_finite() || q < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "demand {s}->{t} must be a non-negative number, got {q}"
                )));
            }
            if q > 0.0 {
                *map.entry((s, t)).or_insert(0.0) += q;
            }
        }
        Ok(Self { entries: map })
    }

    pub fn get(&self, s: ZoneId, t: ZoneId) -> f64 {
        self.entries.get(&(s, t)).copied().unwrap_or(0.0)
    }

    /// All stored entries, including same-zone ones.
    pub fn entries(&self) -> impl Iterator<Item = ((ZoneId, ZoneId), f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// The origin-destination pairs that trips are planned for: distinct
    /// zones with positive demand, in (origin, destination) order.
    pub fn pairs(&self) -> impl Iterator<Item = (ZoneId, ZoneId, f64)> + '_ {
        self.entries
            .iter()
            .filter(|((s, t), _)| s != t)
            .map(|((s, t), q)| (*s, *t, *q))
    }

    /// Total demand over distinct-zone pairs.
    pub fn total(&self) -> f64 {
        self.pairs().map(|(_, _, q)| q).sum()
    }

    pub fn origins(&self) -> Vec<ZoneId> {
        let mut o: Vec<ZoneId> = self.pairs().map(|(s, _, _)| s).collect();
        o.dedup();
        o
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn without(&self, s: ZoneId, t: ZoneId) -> Self {
        let mut entries = self.entries.clone();
        entries.remove(&(s, t));
        Self { entries }
    }

    /// Demand attached to each zone as origin plus as destination.
    pub fn zone_activity(&self) -> BTreeMap<ZoneId, f64> {
        let mut activity = BTreeMap::new();
        for (s, t, q) in self.pairs() {
            *activity.entry(s).or_insert(0.0) += q;
            *activity.entry(t).or_insert(0.0) += q;
        }
        activity
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
            path: path.into(),
            source,
        })?;
        let mut entries = Vec::new();
        for row in reader.deserialize() {
            let row: DemandRow = row.map_err(|source| Error::Csv {
                path: path.into(),
                source,
            })?;
            entries.push(((ZoneId(row.origin_zone), ZoneId(row.dest_zone)), row.passengers));
        }
        Self::new(entries)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("origin_zone,dest_zone,passengers\n");
        for ((s, t), q) in &self.entries {
            out.push_str(&format!("{},{},{}\n", s.0, t.0, q));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_demand_rejected() {
        assert!(DemandMatrix::new([((ZoneId(0), ZoneId(1)), -1.0)]).is_err());
        assert!(DemandMatrix::new([((ZoneId(0), ZoneId(1)), f64::NAN)]).is_err());
    }

    #[test]
    fn same_zone_pairs_excluded_from_total() {
        let d = DemandMatrix::new([
            ((ZoneId(0), ZoneId(0)), 5.0),
            ((ZoneId(0), ZoneId(1)), 2.0),
            ((ZoneId(1), ZoneId(0)), 3.0),
        ])
        .unwrap();
        assert_eq!(d.total(), 5.0);
        assert_eq!(d.pairs().count(), 2);
        assert_eq!(d.origins(), vec![ZoneId(0), ZoneId(1)]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demand.csv");
        let d = DemandMatrix::new([((ZoneId(3), ZoneId(7)), 12.25), ((ZoneId(7), ZoneId(3)), 0.5)])
            .unwrap();
        d.write_csv(&path).unwrap();
        assert_eq!(DemandMatrix::read_csv(&path).unwrap(), d);
    }
}
