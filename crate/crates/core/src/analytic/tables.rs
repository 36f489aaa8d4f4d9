//! The complete analytic table set and its CSV and JSON emitters.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::derived::{derived_tables, DerivedInputs};
use super::mixture::{mixture_predictions, MixturePredictions};
use super::pmf::{closed, p_lr, p_mj, p_nu_t_positive, p_t_given_n, p_t_overall};
use super::quad::QuadratureConfig;
use super::series::{segment_series, SegmentSeries, SeriesConfig};
use crate::error::AnalyticError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub quantity: String,
    pub value: f64,
    pub error_bound: f64,
    pub n_max: Option<usize>,
    pub notes: String,
}

impl TableRow {
    fn new(quantity: impl Into<String>, value: f64, error_bound: f64) -> Self {
        Self {
            quantity: quantity.into(),
            value,
            error_bound,
            n_max: None,
            notes: String::new(),
        }
    }

    fn series(mut self, n_max: usize) -> Self {
        self.n_max = Some(n_max);
        self
    }

    fn note(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }
}

/// Analytic predictions together with the intermediate results they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTables {
    pub rows: Vec<TableRow>,
    pub mixture: MixturePredictions,
    pub tail_deficit: f64,
    pub warnings: Vec<String>,
}

impl AnalyticTables {
    pub fn get(&self, quantity: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn value(&self, quantity: &str) -> Option<f64> {
        self.get(quantity).map(|r| r.value)
    }
}

/// Number of entries of the XX-count distribution reported.
pub const NU_EXX_REPORTED: usize = 4;

/// Largest `l + r` summed when checking the left fraction of T vertices.
const LR_SUM_MAX: u32 = 60;

/// Series-based edge-class inputs with the labelling of the printed tables.
pub fn series_inputs(s: &SegmentSeries) -> DerivedInputs {
    DerivedInputs {
        eps_tt: s.eps_edge_types().tt,
        eps_p1: s.eps_p1().as_printed,
        eps_z1: s.eps_z1(),
        t_pair_sum: s.t_pair_sum(),
        tx_pair_sum: s.tx_pair_sum(),
    }
}

pub fn analytic_tables(s: &SeriesConfig, q: &QuadratureConfig) -> Result<AnalyticTables, AnalyticError> {
    let series = segment_series(s, q)?;
    let n_max = s.n_max;
    let ser_err = series.quadrature_error + series.tail_deficit().max(0.0);
    let mut rows = Vec::new();
    let mut warnings: Vec<String> = series.warning().into_iter().collect();
    if !s.tail_report {
        warnings.clear();
    }

    let p0 = closed::p0();
    rows.push(TableRow::new("p_0", p0, 0.0).note("closed form"));
    rows.push(TableRow::new("P(nu_T>=1)", closed::p_nu_t_positive(), 0.0).note("closed form"));
    let lr = p_nu_t_positive(q)?;
    rows.push(TableRow::new("P(nu_T>=1) quadrature", lr.value, lr.error));
    let frac = p_t_overall(q)?;
    rows.push(TableRow::new("p_T", frac.p_t, frac.error_bound).note("reduced integral"));
    rows.push(TableRow::new("p_T resummed", frac.p_t_resummed, frac.error_bound).note("resummed double sum"));
    rows.push(TableRow::new("p_X", frac.p_x, frac.error_bound));
    rows.push(TableRow::new("eps_V[T]", 2.0 / 3.0, 0.0).note("exact"));
    rows.push(TableRow::new("eps_V[X]", 1.0 / 3.0, 0.0).note("exact"));
    rows.push(TableRow::new("lambda_E/lambda_V", 2.0, 0.0).note("exact"));
    rows.push(TableRow::new("lambda_P/lambda_V", 7.0 / 6.0, 0.0).note("exact"));

    let (mut left, mut with_t) = (0.0, 0.0);
    for m in 1..=LR_SUM_MAX {
        for l in 0..=m {
            let p = p_lr(l, m - l, q)?.value;
            left += l as f64 / m as f64 * p;
            with_t += p;
        }
    }
    rows.push(
        TableRow::new("p_L|T", left / with_t, 0.0).note(format!("left and right sums truncated at l + r = {LR_SUM_MAX}")),
    );
    let mut t_zero = 0.0;
    for j in 0..=20 {
        t_zero += p_mj(0, j, q)?.value;
    }
    rows.push(TableRow::new("P(nu_T=0) partial", t_zero, 0.0).note("sum over j <= 20"));

    for n in [1u32, 2, 20, 200] {
        let e = p_t_given_n(n, q)?;
        rows.push(TableRow::new(format!("p_T|{n}"), e.value, e.error));
    }
    for n in 0..=5 {
        rows.push(TableRow::new(format!("p_{n}"), series.p[n], 0.0).series(n_max));
    }
    rows.push(TableRow::new("series tail deficit", series.tail_deficit(), series.quadrature_error).series(n_max));
    rows.push(TableRow::new("mean nu", series.mean_interior_vertices(), ser_err).series(n_max).note("tends to 2"));
    rows.push(TableRow::new("edge completeness", series.edge_completeness(), ser_err).series(n_max).note("tends to 1"));

    let types = series.eps_edge_types();
    rows.push(TableRow::new("eps_E[TT]", types.tt, ser_err).series(n_max));
    rows.push(TableRow::new("eps_E[XX]", types.xx, ser_err).series(n_max));
    rows.push(TableRow::new("eps_E[TX]", types.tx, ser_err).series(n_max));
    let p1 = series.eps_p1();
    for (label, triple) in [("as-printed", p1.as_printed), ("figure-consistent", p1.figure_consistent)] {
        for (i, v) in triple.iter().enumerate() {
            rows.push(
                TableRow::new(format!("eps_E[P1,{}] {label}", i + 1), *v, ser_err)
                    .series(n_max)
                    .note(label),
            );
        }
    }
    rows.push(
        TableRow::new("eps_E[P1,3] printed constant", closed::eps_p1_3_printed_constant(), 0.0)
            .note("printed closed form; does not equal p_0/3"),
    );
    for (j, v) in series.eps_z1().iter().enumerate() {
        rows.push(TableRow::new(format!("eps_E[Z1,{j}]"), *v, ser_err).series(n_max));
    }
    rows.push(TableRow::new("sum (n-1) p_T|n p_n", series.t_pair_sum(), ser_err).series(n_max));
    rows.push(TableRow::new("sum (n-1) p_T|n p_X|n p_n", series.tx_pair_sum(), ser_err).series(n_max));
    rows.push(
        TableRow::new("sum (n-1) (p_T|n^2 + 2 p_T|n p_X|n) p_n", series.t_class_one_sum(), ser_err)
            .series(n_max)
            .note("T-vertex class-1 edges under the lookup table, types independent given n"),
    );
    for (k, v) in series.nu_exx_pmf(NU_EXX_REPORTED).iter().enumerate() {
        rows.push(
            TableRow::new(format!("P(nu_EXX={k})"), *v, ser_err)
                .series(n_max)
                .note("product formula over adjacent pairs"),
        );
    }

    let inputs = series_inputs(&series);
    for (name, v) in derived_tables(&inputs) {
        let exact = matches!(
            name.as_str(),
            "eta_V,V[T]" | "eta_V,V[X]" | "mu_V[T],E[P1,1]" | "mu_V[X],E[Z1,0]"
        ) || v == 0.0;
        let row = TableRow::new(name, v, if exact { 0.0 } else { 36.0 * ser_err });
        rows.push(if exact { row } else { row.series(n_max) });
    }

    let mixture = mixture_predictions(q)?;
    let m_err = mixture.error_bound;
    let mut mix = |name: &str, v: f64| rows.push(TableRow::new(format!("{name} mixture"), v, m_err).note("exact average over segments"));
    mix("eps_E[TT]", mixture.eps_tt);
    mix("eps_E[XX]", mixture.eps_xx);
    mix("eps_E[TX]", mixture.eps_tx);
    for (i, v) in mixture.eps_p1.iter().enumerate() {
        mix(&format!("eps_E[P1,{}] figure-consistent", i + 1), *v);
    }
    for (j, v) in mixture.eps_z1.iter().enumerate() {
        mix(&format!("eps_E[Z1,{j}]"), *v);
    }
    mix("mu_V[T],E[P1,1]", mixture.mu_vt_p1_1);
    mix("mu_V[X],E[P1,1]", mixture.mu_vx_p1_1);
    mix("sum (n-1) p_T|n p_n", mixture.t_pair_sum);
    for (k, v) in mixture.nu_exx.iter().take(NU_EXX_REPORTED + 1).enumerate() {
        mix(&format!("P(nu_EXX={k})"), *v);
    }
    mix("edge completeness", mixture.completeness);

    Ok(AnalyticTables {
        rows,
        mixture,
        tail_deficit: series.tail_deficit(),
        warnings,
    })
}

/// Writes rows as CSV after a block of `# key: value` header lines.
pub fn write_table_csv<W: Write>(rows: &[TableRow], header: &[(String, String)], mut w: W) -> csv::Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}: {v}")?;
    }
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["quantity", "value", "error_bound", "n_max", "notes"])?;
    for r in rows {
        csv.write_record([
            r.quantity.clone(),
            format!("{:.12e}", r.value),
            format!("{:.3e}", r.error_bound),
            r.n_max.map(|n| n.to_string()).unwrap_or_default(),
            r.notes.clone(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_fields_with_commas() {
        let rows = vec![TableRow::new("mu_V[T],E[TT]", 1.0, 0.0)];
        let mut out = Vec::new();
        write_table_csv(&rows, &[("seed".into(), "1".into())], &mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# seed: 1\nquantity,value"));
        assert!(s.contains("\"mu_V[T],E[TT]\""));
    }
}
