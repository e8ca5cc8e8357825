"""Online-trained LSTM forecaster for hidden-target traces."""

from .online import (LstmConfig, forecast_trace, read_predictions_csv,
                     read_trace_csv, train_predict_online,
                     write_predictions_csv)

__version__ = "0.1.0"

__all__ = ["LstmConfig", "forecast_trace", "read_predictions_csv",
           "read_trace_csv", "train_predict_online", "write_predictions_csv"]
