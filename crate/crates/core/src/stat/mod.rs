//! Statistical base forecasters.

pub mod arima;
pub mod auto;
pub mod diff;
pub mod fourier;
pub mod highres;
pub mod kpss;
pub mod naive;
pub mod optim;

pub use arima::{fit_arima, ArimaCoefficients, ArimaModel, ArimaOrder, FitOptions};
pub use auto::{auto_arima, auto_order, SearchConfig};
pub use diff::{difference, undifference};
pub use fourier::fourier_terms;
pub use highres::{fit_high_resolution_arima, ArimaForecaster, HighResConfig};
pub use naive::seasonal_naive;
