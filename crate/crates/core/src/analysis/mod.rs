//! Correlations between difficulty metrics, significance testing, data maps,
//! learning curves and time-to-best ratios.

mod correlation;
mod curves;
mod datamap;
mod significance;
pub mod svg;

pub use correlation::{average_ranks, pearson, roc_auc, spearman, CorrelationMatrix};
pub use curves::{
    curve_csv, curves_svg, learning_curve, mean_std, time_ratio, time_ratio_summary, CurvePoint, TimeRatioSummary,
};
pub use datamap::{csv_field, datamap_csv, datamap_export, datamap_points, datamap_svg, DataMapPoint};
pub use significance::{approx_randomization, DEFAULT_ROUNDS};
