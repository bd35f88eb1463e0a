//! Panel data model: the N×T observed-outcome matrix with unit roles,
//! calendar dates and treatment indexing, plus long-format CSV ingestion.
//!
//! Units are ordered treated-first: rows `0..n_treated` are treated, the
//! rest are controls. Columns `0..t0` are the pre-treatment period, columns
//! `t0..T` the treatment period. Missing observations are carried in an
//! explicit boolean mask; the backing matrix stores 0.0 at masked cells but
//! those values are never meaningful.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Days per ISO week-of-year cycle divided by 7; using the mean Gregorian
/// year length keeps week 52/53 -> week 1 adjacency smooth in the circular
/// encoding.
const WOY_PERIOD: f64 = 365.2425 / 7.0;

/// How treated units are designated when loading a long-format file.
#[derive(Debug, Clone)]
pub enum TreatedSpec {
    /// The first `n` unit ids in file order are treated.
    Count(usize),
    /// Exactly these unit ids are treated; they are moved to the top rows
    /// in the given order.
    Ids(Vec<String>),
}

/// Dense N×T outcome panel with unit roles, dates and treatment start.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelMatrix {
    outcomes: Array2<f64>,
    observed: Array2<bool>,
    unit_ids: Vec<String>,
    dates: Vec<NaiveDate>,
    n_treated: usize,
    t0: usize,
}

impl PanelMatrix {
    /// Validates the panel invariants and normalizes masked cells to 0.0.
    pub fn new(
        mut outcomes: Array2<f64>,
        observed: Array2<bool>,
        unit_ids: Vec<String>,
        dates: Vec<NaiveDate>,
        n_treated: usize,
        t0: usize,
    ) -> Result<Self> {
        let (n, t) = outcomes.dim();
        if unit_ids.len() != n {
            return Err(Error::validation(format!(
                "unit_ids length ({}) != row count ({n})",
                unit_ids.len()
            )));
        }
        if dates.len() != t {
            return Err(Error::validation(format!(
                "dates length ({}) != column count ({t})",
                dates.len()
            )));
        }
        if observed.dim() != (n, t) {
            return Err(Error::validation("mask shape differs from outcomes"));
        }
        if n_treated == 0 || n_treated >= n {
            return Err(Error::validation(format!(
                "need at least one treated and one control unit (n_treated={n_treated}, n={n})"
            )));
        }
        if t0 == 0 || t0 >= t {
            return Err(Error::validation(format!(
                "treatment start must leave 1 <= T0 < T (t0={t0}, T={t})"
            )));
        }
        let mut seen = HashSet::new();
        for id in &unit_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::validation(format!("duplicate unit id '{id}'")));
            }
        }
        for w in dates.windows(2) {
            if w[1] - w[0] != chrono::Duration::days(1) {
                return Err(Error::validation(format!(
                    "dates must be consecutive calendar days; gap between {} and {}",
                    w[0], w[1]
                )));
            }
        }
        for ((i, j), v) in outcomes.indexed_iter_mut() {
            if observed[(i, j)] {
                if !v.is_finite() {
                    return Err(Error::validation(format!(
                        "non-finite outcome at unit {i}, period {j}"
                    )));
                }
            } else {
                *v = 0.0;
            }
        }
        Ok(PanelMatrix { outcomes, observed, unit_ids, dates, n_treated, t0 })
    }

    /// Fully observed convenience constructor.
    pub fn fully_observed(
        outcomes: Array2<f64>,
        unit_ids: Vec<String>,
        dates: Vec<NaiveDate>,
        n_treated: usize,
        t0: usize,
    ) -> Result<Self> {
        let mask = Array2::from_elem(outcomes.dim(), true);
        Self::new(outcomes, mask, unit_ids, dates, n_treated, t0)
    }

    pub fn n_units(&self) -> usize {
        self.outcomes.nrows()
    }

    pub fn n_treated(&self) -> usize {
        self.n_treated
    }

    pub fn n_controls(&self) -> usize {
        self.n_units() - self.n_treated
    }

    pub fn n_periods(&self) -> usize {
        self.outcomes.ncols()
    }

    /// Number of pre-treatment periods (T0). Treatment starts at column t0.
    pub fn t0(&self) -> usize {
        self.t0
    }

    /// Number of treatment periods (T1 = T - T0).
    pub fn t1(&self) -> usize {
        self.n_periods() - self.t0
    }

    pub fn unit_ids(&self) -> &[String] {
        &self.unit_ids
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn outcomes(&self) -> &Array2<f64> {
        &self.outcomes
    }

    pub fn observed(&self) -> &Array2<bool> {
        &self.observed
    }

    pub fn is_fully_observed(&self) -> bool {
        self.observed.iter().all(|&o| o)
    }

    /// Value at (unit, period) or None when masked-missing.
    pub fn value(&self, unit: usize, period: usize) -> Option<f64> {
        if self.observed[(unit, period)] {
            Some(self.outcomes[(unit, period)])
        } else {
            None
        }
    }

    /// Control-unit rows over all periods (N^c × T).
    pub fn control_block(&self) -> ArrayView2<'_, f64> {
        self.outcomes.slice(s![self.n_treated.., ..])
    }

    pub fn control_mask(&self) -> ArrayView2<'_, bool> {
        self.observed.slice(s![self.n_treated.., ..])
    }

    /// The four blocks of the panel: (pre_treated, pre_control,
    /// post_control, post_treated) with shapes (N^t×T0), (N^c×T0),
    /// (N^c×T1), (N^t×T1).
    pub fn block_views(&self) -> BlockViews<'_> {
        let nt = self.n_treated;
        let t0 = self.t0;
        BlockViews {
            pre_treated: self.outcomes.slice(s![..nt, ..t0]),
            pre_control: self.outcomes.slice(s![nt.., ..t0]),
            post_control: self.outcomes.slice(s![nt.., t0..]),
            post_treated: self.outcomes.slice(s![..nt, t0..]),
        }
    }

    pub fn treatment_mask(&self) -> TreatmentMask {
        TreatmentMask {
            n_units: self.n_units(),
            n_periods: self.n_periods(),
            n_treated: self.n_treated,
            t0: self.t0,
        }
    }

    /// Replaces the treated rows with a single row of per-day sums.
    ///
    /// Errors when any treated entry is missing, since the sum would be
    /// undefined. With a single treated unit this is the identity apart
    /// from the unit id.
    pub fn aggregate_treated(&self) -> Result<PanelMatrix> {
        if self.n_treated == 1 {
            return Ok(self.clone());
        }
        let t = self.n_periods();
        let nc = self.n_controls();
        for i in 0..self.n_treated {
            for j in 0..t {
                if !self.observed[(i, j)] {
                    return Err(Error::validation(format!(
                        "cannot aggregate: treated unit '{}' is missing period {}",
                        self.unit_ids[i], j
                    )));
                }
            }
        }
        let agg: Array1<f64> =
            self.outcomes.slice(s![..self.n_treated, ..]).sum_axis(Axis(0));
        let mut outcomes = Array2::zeros((1 + nc, t));
        let mut observed = Array2::from_elem((1 + nc, t), true);
        outcomes.row_mut(0).assign(&agg);
        outcomes
            .slice_mut(s![1.., ..])
            .assign(&self.outcomes.slice(s![self.n_treated.., ..]));
        observed
            .slice_mut(s![1.., ..])
            .assign(&self.observed.slice(s![self.n_treated.., ..]));
        let mut unit_ids = Vec::with_capacity(1 + nc);
        unit_ids.push("__agg__".to_string());
        unit_ids.extend_from_slice(&self.unit_ids[self.n_treated..]);
        PanelMatrix::new(outcomes, observed, unit_ids, self.dates.clone(), 1, self.t0)
    }

    /// Re-windows the panel for backtesting: keeps columns `0..t_end` and
    /// moves the treatment start to `t0`.
    pub fn restrict(&self, t0: usize, t_end: usize) -> Result<PanelMatrix> {
        if t_end > self.n_periods() || t0 >= t_end || t0 == 0 {
            return Err(Error::validation(format!(
                "restrict window (t0={t0}, t_end={t_end}) outside panel of T={}",
                self.n_periods()
            )));
        }
        PanelMatrix::new(
            self.outcomes.slice(s![.., ..t_end]).to_owned(),
            self.observed.slice(s![.., ..t_end]).to_owned(),
            self.unit_ids.clone(),
            self.dates[..t_end].to_vec(),
            self.n_treated,
            t0,
        )
    }

    /// Keeps the treated row `treated_idx` plus every control; used when a
    /// model is estimated on each treated unit separately.
    pub fn single_treated(&self, treated_idx: usize) -> Result<PanelMatrix> {
        if treated_idx >= self.n_treated {
            return Err(Error::validation(format!(
                "treated index {treated_idx} out of range (n_treated={})",
                self.n_treated
            )));
        }
        let t = self.n_periods();
        let nc = self.n_controls();
        let mut outcomes = Array2::zeros((1 + nc, t));
        let mut observed = Array2::from_elem((1 + nc, t), true);
        outcomes.row_mut(0).assign(&self.outcomes.row(treated_idx));
        observed.row_mut(0).assign(&self.observed.row(treated_idx));
        outcomes
            .slice_mut(s![1.., ..])
            .assign(&self.outcomes.slice(s![self.n_treated.., ..]));
        observed
            .slice_mut(s![1.., ..])
            .assign(&self.observed.slice(s![self.n_treated.., ..]));
        let mut unit_ids = Vec::with_capacity(1 + nc);
        unit_ids.push(self.unit_ids[treated_idx].clone());
        unit_ids.extend_from_slice(&self.unit_ids[self.n_treated..]);
        PanelMatrix::new(outcomes, observed, unit_ids, self.dates.clone(), 1, self.t0)
    }

    /// Returns a copy with outcomes replaced; mask, roles and dates kept.
    pub fn with_outcomes(&self, outcomes: Array2<f64>) -> Result<PanelMatrix> {
        PanelMatrix::new(
            outcomes,
            self.observed.clone(),
            self.unit_ids.clone(),
            self.dates.clone(),
            self.n_treated,
            self.t0,
        )
    }

    /// Writes the panel as long-format CSV (unit_id, date, revenue),
    /// skipping masked cells. Loading the file back with the same treated
    /// count and `dates()[t0()]` as treatment start reproduces the panel
    /// bit-exactly.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["unit_id", "date", "revenue"])?;
        for i in 0..self.n_units() {
            for j in 0..self.n_periods() {
                if self.observed[(i, j)] {
                    w.write_record(&[
                        self.unit_ids[i].clone(),
                        self.dates[j].format("%Y-%m-%d").to_string(),
                        format_float(self.outcomes[(i, j)]),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal representation that round-trips to the same f64.
pub(crate) fn format_float(v: f64) -> String {
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // `{}` on f64 uses the shortest round-trip representation.
    format!("{v}")
}

/// The four submatrix views of a panel's block structure.
pub struct BlockViews<'a> {
    pub pre_treated: ArrayView2<'a, f64>,
    pub pre_control: ArrayView2<'a, f64>,
    pub post_control: ArrayView2<'a, f64>,
    pub post_treated: ArrayView2<'a, f64>,
}

/// Treated/untreated index sets and the 0/1 treatment status.
///
/// The treated set is exactly rows `0..n_treated` crossed with periods
/// `t0..T`; everything else is untreated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreatmentMask {
    n_units: usize,
    n_periods: usize,
    n_treated: usize,
    t0: usize,
}

impl TreatmentMask {
    pub fn new(n_units: usize, n_periods: usize, n_treated: usize, t0: usize) -> Result<Self> {
        if n_treated == 0 || n_treated >= n_units || t0 == 0 || t0 >= n_periods {
            return Err(Error::validation("degenerate treatment mask"));
        }
        Ok(TreatmentMask { n_units, n_periods, n_treated, t0 })
    }

    /// Treatment status W_it.
    pub fn status(&self, unit: usize, period: usize) -> u8 {
        u8::from(self.is_treated(unit, period))
    }

    pub fn is_treated(&self, unit: usize, period: usize) -> bool {
        unit < self.n_treated && period >= self.t0
    }

    pub fn n_treated(&self) -> usize {
        self.n_treated
    }

    pub fn t0(&self) -> usize {
        self.t0
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    /// All (unit, period) pairs in the treated set, row-major.
    pub fn treated_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_treated).flat_map(move |i| (self.t0..self.n_periods).map(move |t| (i, t)))
    }

    /// All (unit, period) pairs in the untreated set, row-major.
    pub fn untreated_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_units).flat_map(move |i| {
            let end = if i < self.n_treated { self.t0 } else { self.n_periods };
            (0..end).map(move |t| (i, t))
        })
    }

    pub fn n_treated_pairs(&self) -> usize {
        self.n_treated * (self.n_periods - self.t0)
    }
}

/// Per-date calendar covariates with circular encodings.
///
/// Day-of-week uses Monday = 0. Week-of-year uses ISO weeks; the circular
/// angle divides by the mean number of ISO weeks per year rather than 52 so
/// that the final week of a year sits next to week 1 of the following year.
#[derive(Debug, Clone)]
pub struct CalendarFeatures {
    rows: Vec<CalendarRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct CalendarRow {
    pub dow: u32,
    pub woy: u32,
    pub month: u32,
    pub dow_cos: f64,
    pub dow_sin: f64,
    pub woy_cos: f64,
    pub woy_sin: f64,
}

impl CalendarFeatures {
    pub fn for_dates(dates: &[NaiveDate]) -> Self {
        let rows = dates
            .iter()
            .map(|d| {
                let dow = d.weekday().num_days_from_monday();
                let woy = d.iso_week().week();
                let month = d.month();
                let dow_angle = 2.0 * std::f64::consts::PI * f64::from(dow) / 7.0;
                let woy_angle = 2.0 * std::f64::consts::PI * f64::from(woy - 1) / WOY_PERIOD;
                CalendarRow {
                    dow,
                    woy,
                    month,
                    dow_cos: dow_angle.cos(),
                    dow_sin: dow_angle.sin(),
                    woy_cos: woy_angle.cos(),
                    woy_sin: woy_angle.sin(),
                }
            })
            .collect();
        CalendarFeatures { rows }
    }

    pub fn row(&self, t: usize) -> &CalendarRow {
        &self.rows[t]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Loads a long-format CSV with columns (unit_id, date, revenue).
///
/// The panel date axis is the full consecutive range between the earliest
/// and latest date in the file; a calendar day with no observation for any
/// unit is rejected, while an absent (unit, date) pair becomes a masked
/// cell. Treated units are moved to the top rows.
pub fn load_panel(
    path: impl AsRef<Path>,
    treated: &TreatedSpec,
    treatment_start: NaiveDate,
) -> Result<PanelMatrix> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::validation(format!("missing column '{name}'")))
    };
    let unit_col = col("unit_id")?;
    let date_col = col("date")?;
    let rev_col = col("revenue")?;

    let mut file_order: Vec<String> = Vec::new();
    let mut seen_units: HashSet<String> = HashSet::new();
    let mut rows: Vec<(String, NaiveDate, f64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let unit = record
            .get(unit_col)
            .ok_or_else(|| Error::validation("short record"))?
            .to_string();
        let date_str =
            record.get(date_col).ok_or_else(|| Error::validation("short record"))?;
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|e| {
            Error::validation(format!("bad date '{date_str}': {e} (expected YYYY-MM-DD)"))
        })?;
        let rev_str = record.get(rev_col).ok_or_else(|| Error::validation("short record"))?;
        let revenue: f64 = rev_str
            .parse()
            .map_err(|e| Error::validation(format!("bad revenue '{rev_str}': {e}")))?;
        if !revenue.is_finite() {
            return Err(Error::validation(format!("non-finite revenue for {unit} at {date}")));
        }
        if seen_units.insert(unit.clone()) {
            file_order.push(unit.clone());
        }
        rows.push((unit, date, revenue));
    }
    if rows.is_empty() {
        return Err(Error::validation("empty panel file"));
    }

    let first = rows.iter().map(|r| r.1).min().unwrap();
    let last = rows.iter().map(|r| r.1).max().unwrap();
    let t = (last - first).num_days() as usize + 1;
    let dates: Vec<NaiveDate> =
        (0..t).map(|k| first + chrono::Duration::days(k as i64)).collect();

    // Resolve unit ordering: treated first.
    let unit_ids: Vec<String> = match treated {
        TreatedSpec::Count(n) => {
            if *n == 0 || *n >= file_order.len() {
                return Err(Error::validation(format!(
                    "treated count {n} must leave at least one control among {} units",
                    file_order.len()
                )));
            }
            file_order.clone()
        }
        TreatedSpec::Ids(ids) => {
            let id_set: HashSet<&str> = ids.iter().map(String::as_str).collect();
            if id_set.len() != ids.len() {
                return Err(Error::validation("duplicate id in treated list"));
            }
            for id in ids {
                if !seen_units.contains(id) {
                    return Err(Error::validation(format!("unknown treated unit id '{id}'")));
                }
            }
            if ids.len() >= file_order.len() {
                return Err(Error::validation("treated list leaves no control units"));
            }
            let mut ordered = ids.clone();
            ordered.extend(file_order.iter().filter(|u| !id_set.contains(u.as_str())).cloned());
            ordered
        }
    };
    let n_treated = match treated {
        TreatedSpec::Count(n) => *n,
        TreatedSpec::Ids(ids) => ids.len(),
    };

    let index_of: HashMap<&str, usize> =
        unit_ids.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();

    let n = unit_ids.len();
    let mut outcomes = Array2::zeros((n, t));
    let mut observed = Array2::from_elem((n, t), false);
    for (unit, date, revenue) in &rows {
        let i = index_of[unit.as_str()];
        let j = (*date - first).num_days() as usize;
        if observed[(i, j)] {
            return Err(Error::validation(format!(
                "duplicate observation for unit '{unit}' at {date}"
            )));
        }
        observed[(i, j)] = true;
        outcomes[(i, j)] = *revenue;
    }

    // A day with no observation across every unit means the panel itself
    // skips that date.
    for (j, date) in dates.iter().enumerate() {
        if (0..n).all(|i| !observed[(i, j)]) {
            return Err(Error::validation(format!(
                "date gap spanning the whole panel at {date}"
            )));
        }
    }

    if treatment_start < first {
        return Err(Error::validation(format!(
            "treatment start {treatment_start} precedes panel (first date {first})"
        )));
    }
    if treatment_start > last {
        return Err(Error::validation(format!(
            "treatment start {treatment_start} is after the panel end ({last})"
        )));
    }
    let t0 = (treatment_start - first).num_days() as usize;
    if t0 == 0 {
        return Err(Error::validation(
            "treatment start leaves no pre-treatment period".to_string(),
        ));
    }

    PanelMatrix::new(outcomes, observed, unit_ids, dates, n_treated, t0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn dates_from(start: &str, n: usize) -> Vec<NaiveDate> {
        let d0 = date(start);
        (0..n).map(|k| d0 + chrono::Duration::days(k as i64)).collect()
    }

    fn write_csv(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn load_two_units_three_days() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            &dir,
            "panel.csv",
            "unit_id,date,revenue\n\
             a,2020-01-01,1.5\n\
             a,2020-01-02,2.5\n\
             a,2020-01-03,3.5\n\
             b,2020-01-01,4\n\
             b,2020-01-02,5\n\
             b,2020-01-03,6\n",
        );
        let panel = load_panel(&p, &TreatedSpec::Count(1), date("2020-01-03")).unwrap();
        assert_eq!(panel.n_units(), 2);
        assert_eq!(panel.t0(), 2);
        assert_eq!(panel.t1(), 1);
        assert_eq!(panel.value(0, 1), Some(2.5));
        assert!(panel.is_fully_observed());
    }

    #[test]
    fn absent_pair_becomes_masked() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            &dir,
            "panel.csv",
            "unit_id,date,revenue\n\
             a,2020-01-01,1\n\
             a,2020-01-02,2\n\
             a,2020-01-03,3\n\
             b,2020-01-01,4\n\
             b,2020-01-03,6\n",
        );
        let panel = load_panel(&p, &TreatedSpec::Count(1), date("2020-01-03")).unwrap();
        assert_eq!(panel.value(1, 1), None);
        assert_eq!(panel.value(1, 0), Some(4.0));
    }

    #[test]
    fn treatment_start_before_panel_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            &dir,
            "panel.csv",
            "unit_id,date,revenue\na,2020-01-02,1\nb,2020-01-02,2\na,2020-01-03,1\nb,2020-01-03,2\n",
        );
        let err = load_panel(&p, &TreatedSpec::Count(1), date("2020-01-01")).unwrap_err();
        assert!(err.to_string().contains("precedes panel"), "{err}");
    }

    #[test]
    fn whole_panel_date_gap_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            &dir,
            "panel.csv",
            "unit_id,date,revenue\n\
             a,2020-01-01,1\n\
             b,2020-01-01,2\n\
             a,2020-01-03,1\n\
             b,2020-01-03,2\n",
        );
        let err = load_panel(&p, &TreatedSpec::Count(1), date("2020-01-03")).unwrap_err();
        assert!(err.to_string().contains("date gap"), "{err}");
    }

    #[test]
    fn duplicate_observation_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            &dir,
            "panel.csv",
            "unit_id,date,revenue\na,2020-01-01,1\na,2020-01-01,9\nb,2020-01-02,2\n",
        );
        let err = load_panel(&p, &TreatedSpec::Count(1), date("2020-01-02")).unwrap_err();
        assert!(err.to_string().contains("duplicate observation"), "{err}");
    }

    #[test]
    fn unknown_treated_id_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            &dir,
            "panel.csv",
            "unit_id,date,revenue\na,2020-01-01,1\nb,2020-01-01,2\na,2020-01-02,1\nb,2020-01-02,2\n",
        );
        let err = load_panel(&p, &TreatedSpec::Ids(vec!["zzz".into()]), date("2020-01-02"))
            .unwrap_err();
        assert!(err.to_string().contains("unknown treated unit id"), "{err}");
    }

    #[test]
    fn treated_ids_reordered_to_top() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_csv(
            &dir,
            "panel.csv",
            "unit_id,date,revenue\n\
             a,2020-01-01,1\nb,2020-01-01,2\nc,2020-01-01,3\n\
             a,2020-01-02,1\nb,2020-01-02,2\nc,2020-01-02,3\n",
        );
        let panel =
            load_panel(&p, &TreatedSpec::Ids(vec!["c".into()]), date("2020-01-02")).unwrap();
        assert_eq!(panel.unit_ids(), &["c".to_string(), "a".to_string(), "b".to_string()]);
        assert_eq!(panel.value(0, 0), Some(3.0));
    }

    #[test]
    fn block_views_shapes_and_partition() {
        let outcomes = arr2(&[
            [1.0, 2.0, 3.0, 4.0],
            [5.0, 6.0, 7.0, 8.0],
            [9.0, 10.0, 11.0, 12.0],
        ]);
        let panel = PanelMatrix::fully_observed(
            outcomes.clone(),
            vec!["t".into(), "c1".into(), "c2".into()],
            dates_from("2021-03-01", 4),
            1,
            2,
        )
        .unwrap();
        let b = panel.block_views();
        assert_eq!(b.pre_treated.dim(), (1, 2));
        assert_eq!(b.pre_control.dim(), (2, 2));
        assert_eq!(b.post_control.dim(), (2, 2));
        assert_eq!(b.post_treated.dim(), (1, 2));
        // Reassembling the blocks reproduces the matrix element-wise.
        for i in 0..3 {
            for j in 0..4 {
                let v = if i < 1 && j < 2 {
                    b.pre_treated[(i, j)]
                } else if i < 1 {
                    b.post_treated[(i, j - 2)]
                } else if j < 2 {
                    b.pre_control[(i - 1, j)]
                } else {
                    b.post_control[(i - 1, j - 2)]
                };
                assert_eq!(v, outcomes[(i, j)]);
            }
        }
    }

    #[test]
    fn block_views_single_control_row() {
        let outcomes = arr2(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        let panel = PanelMatrix::fully_observed(
            outcomes,
            vec!["t1".into(), "t2".into(), "c".into()],
            dates_from("2021-03-01", 2),
            2,
            1,
        )
        .unwrap();
        let b = panel.block_views();
        assert_eq!(b.pre_control.dim(), (1, 1));
        assert_eq!(b.post_control.dim(), (1, 1));
    }

    #[test]
    fn aggregate_sums_columns() {
        let outcomes = arr2(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]);
        let panel = PanelMatrix::fully_observed(
            outcomes,
            vec!["t1".into(), "t2".into(), "c".into()],
            dates_from("2021-03-01", 3),
            2,
            2,
        )
        .unwrap();
        let agg = panel.aggregate_treated().unwrap();
        assert_eq!(agg.n_treated(), 1);
        assert_eq!(agg.outcomes().row(0).to_vec(), vec![5.0, 7.0, 9.0]);
        assert_eq!(agg.outcomes().row(1).to_vec(), vec![7.0, 8.0, 9.0]);
        // Total treated revenue per day is preserved exactly.
        assert_eq!(agg.outcomes().row(0).sum(), 21.0);
    }

    #[test]
    fn aggregate_single_treated_is_identity() {
        let outcomes = arr2(&[[1.0, 2.0], [3.0, 4.0]]);
        let panel = PanelMatrix::fully_observed(
            outcomes,
            vec!["t".into(), "c".into()],
            dates_from("2021-03-01", 2),
            1,
            1,
        )
        .unwrap();
        let agg = panel.aggregate_treated().unwrap();
        assert_eq!(agg, panel);
    }

    #[test]
    fn aggregate_with_missing_treated_errors() {
        let outcomes = arr2(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        let mut mask = Array2::from_elem((3, 2), true);
        mask[(0, 1)] = false;
        let panel = PanelMatrix::new(
            outcomes,
            mask,
            vec!["t1".into(), "t2".into(), "c".into()],
            dates_from("2021-03-01", 2),
            2,
            1,
        )
        .unwrap();
        assert!(panel.aggregate_treated().is_err());
    }

    #[test]
    fn save_load_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let outcomes = arr2(&[
            [1.000000000001, 0.1 + 0.2, 3.25],
            [4.0, 5.5, 6.125],
            [7.0, 1e-13, 9.0f64.sqrt()],
        ]);
        let mut mask = Array2::from_elem((3, 3), true);
        mask[(2, 1)] = false;
        let panel = PanelMatrix::new(
            outcomes,
            mask,
            vec!["u1".into(), "u2".into(), "u3".into()],
            dates_from("2019-12-30", 3),
            1,
            2,
        )
        .unwrap();
        let p = dir.path().join("roundtrip.csv");
        panel.save_csv(&p).unwrap();
        let reloaded = load_panel(&p, &TreatedSpec::Count(1), panel.dates()[panel.t0()]).unwrap();
        assert_eq!(reloaded, panel);
    }

    #[test]
    fn treatment_mask_partition() {
        let mask = TreatmentMask::new(4, 6, 2, 4).unwrap();
        let treated: HashSet<_> = mask.treated_pairs().collect();
        let untreated: HashSet<_> = mask.untreated_pairs().collect();
        assert!(treated.is_disjoint(&untreated));
        assert_eq!(treated.len() + untreated.len(), 24);
        assert_eq!(treated.len(), mask.n_treated_pairs());
        for (i, t) in treated {
            assert_eq!(mask.status(i, t), 1);
            assert!(i < 2 && t >= 4);
        }
        for (i, t) in untreated {
            assert_eq!(mask.status(i, t), 0);
        }
    }

    #[test]
    fn calendar_circular_encodings() {
        let dates = dates_from("2020-01-01", 400);
        let cal = CalendarFeatures::for_dates(&dates);
        for t in 0..cal.len() {
            let r = cal.row(t);
            let dn = r.dow_cos * r.dow_cos + r.dow_sin * r.dow_sin;
            let wn = r.woy_cos * r.woy_cos + r.woy_sin * r.woy_sin;
            assert!((dn - 1.0).abs() < 1e-12);
            assert!((wn - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dow_chord_distances_symmetric() {
        // 2020-01-05 is a Sunday (dow 6), 01-06 Monday (dow 0), 01-07 Tuesday.
        let dates = dates_from("2020-01-05", 3);
        let cal = CalendarFeatures::for_dates(&dates);
        let d = |a: &CalendarRow, b: &CalendarRow| {
            ((a.dow_cos - b.dow_cos).powi(2) + (a.dow_sin - b.dow_sin).powi(2)).sqrt()
        };
        let sun_mon = d(cal.row(0), cal.row(1));
        let mon_tue = d(cal.row(1), cal.row(2));
        assert!((sun_mon - mon_tue).abs() < 1e-12);
    }

    #[test]
    fn restrict_moves_treatment_start() {
        let outcomes = Array2::from_shape_fn((3, 10), |(i, j)| (i * 10 + j) as f64);
        let panel = PanelMatrix::fully_observed(
            outcomes,
            vec!["t".into(), "c1".into(), "c2".into()],
            dates_from("2021-03-01", 10),
            1,
            8,
        )
        .unwrap();
        let sub = panel.restrict(4, 7).unwrap();
        assert_eq!(sub.n_periods(), 7);
        assert_eq!(sub.t0(), 4);
        assert_eq!(sub.t1(), 3);
        assert_eq!(sub.outcomes()[(2, 6)], 26.0);
    }
}
