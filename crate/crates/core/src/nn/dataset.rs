//! RSRP time series for training, read from `t_ms,ue_id,cell_id,rsrp_dbm`
//! CSV files. Extra columns are ignored.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use super::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub ue_id: u32,
    pub cell_id: u32,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub series: Vec<Series>,
}

impl Dataset {
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { series: vec![Series { ue_id: 0, cell_id: 0, values }] }
    }

    pub fn samples(&self) -> usize {
        self.series.iter().map(|s| s.values.len()).sum()
    }

    pub fn load_csv(path: &Path) -> Result<Self, NnError> {
        let file = std::fs::File::open(path).map_err(|e| NnError::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(file)
    }

    /// Groups rows by `(ue_id, cell_id)` and orders each group by `t_ms`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, NnError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| NnError::Data(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| NnError::Data(format!("missing column `{name}`")))
        };
        let (ct, cu, cc, cr) = (col("t_ms")?, col("ue_id")?, col("cell_id")?, col("rsrp_dbm")?);
        let mut groups: BTreeMap<(u32, u32), Vec<(u64, f64)>> = BTreeMap::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| NnError::Data(e.to_string()))?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let bad = |what: &str| NnError::Data(format!("row {}: bad {what}", line + 2));
            let t: u64 = field(ct).parse().map_err(|_| bad("t_ms"))?;
            let ue: u32 = field(cu).parse().map_err(|_| bad("ue_id"))?;
            let cell: u32 = field(cc).parse().map_err(|_| bad("cell_id"))?;
            let rsrp: f64 = field(cr).parse().map_err(|_| bad("rsrp_dbm"))?;
            if !rsrp.is_finite() {
                return Err(bad("rsrp_dbm"));
            }
            groups.entry((ue, cell)).or_default().push((t, rsrp));
        }
        let series = groups
            .into_iter()
            .map(|((ue_id, cell_id), mut rows)| {
                rows.sort_by_key(|r| r.0);
                Series { ue_id, cell_id, values: rows.into_iter().map(|r| r.1).collect() }
            })
            .collect();
        Ok(Self { series })
    }
}
