//! Quadrature, series and closed forms for the typical I-segment and the
//! mean values that follow from them.

pub mod derived;
pub mod mixture;
pub mod pmf;
pub mod quad;
pub mod sampler;
pub mod series;
pub mod tables;

pub use derived::{derived_tables, printed_half_ulp, DerivedInputs, REFERENCE_VALUES};
pub use mixture::{mixture_predictions, MixturePredictions, NU_EXX_BINS};
pub use pmf::{
    closed, p_lr, p_mj, p_n, p_n_table, p_n_with_t_numerator, p_nu_t_positive, p_t_given_n, p_t_given_n_by_sum,
    p_t_overall, PmfTable, VertexTypeFractions, ROUTE_AGREEMENT,
};
pub use quad::{quad1d, quad2d, quad2d_vec, Estimate, QuadratureConfig};
pub use series::{
    epsilon_edge_types, epsilon_p1, epsilon_z1, nu_exx_pmf, segment_series, EdgeTypeEps, P1Assignments, SegmentSeries,
    SeriesConfig, TAIL_WARNING,
};
pub use sampler::{sample_summary, sample_typical_segment, SegmentSampleSummary, TypicalSegment};
pub use tables::{analytic_tables, series_inputs, write_table_csv, AnalyticTables, TableRow, NU_EXX_REPORTED};
