from . import checkpoint
from .cell import GateParams, LstmCellParams, lstm_cell
from .models import (CnnConfig, LstmConfig, SequentialForecaster, build_cnn,
                     build_lstm)
from .optim import AdamState, adam_step
from .train import TrainHistory, gradient_check, mae_loss, train

__all__ = [
    "GateParams", "LstmCellParams", "lstm_cell",
    "CnnConfig", "LstmConfig", "SequentialForecaster",
    "build_cnn", "build_lstm",
    "AdamState", "adam_step",
    "TrainHistory", "gradient_check", "mae_loss", "train",
]
