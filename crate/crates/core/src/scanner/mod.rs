//! Parameter-space scans, boundary tracing and figure data.

pub mod cache;
pub mod figures;
pub mod grid;
pub mod output;
pub mod trace;

pub use cache::OracleCache;
pub use figures::{figure_data, FigureId, FigureOptions, FigureOutput};
pub use grid::{
    scan, Axis, AxisName, Classifier, GridSpec, Node, NodeOutcome, NodeStatus, ParamPoint, RegionGrid,
    DEFAULT_ORACLE_RESOLUTION, DEFAULT_RESOLUTION,
};
pub use output::{fmt_num, write_json, Cell, Table, SIGNIFICANT_DIGITS};
pub use trace::{trace_boundary, BoundaryCurve, BoundaryPoint, DEFAULT_TRACE_WIDTH};
