"""Minimal numpy neural-network engine: layers, training, traces and input gradients."""

from .checkpoint import load_network, save_network
from .layers import Conv2D, Dense, Flatten, MaxPool2D, ReLU, Reshape, Sigmoid
from .network import (
    ForwardTrace,
    Network,
    cross_entropy,
    dense_autoencoder,
    forward,
    input_gradient,
    lenet,
    log_softmax_temperature,
    mlp,
    small_convnet,
    softmax_temperature,
)
from .training import (
    Autoencoder,
    TrainConfig,
    accuracy,
    reconstruction_loss,
    train_autoencoder,
    train_classifier,
)

__all__ = [
    "Autoencoder",
    "Conv2D",
    "Dense",
    "Flatten",
    "ForwardTrace",
    "MaxPool2D",
    "Network",
    "ReLU",
    "Reshape",
    "Sigmoid",
    "TrainConfig",
    "accuracy",
    "cross_entropy",
    "dense_autoencoder",
    "forward",
    "input_gradient",
    "lenet",
    "load_network",
    "log_softmax_temperature",
    "mlp",
    "reconstruction_loss",
    "save_network",
    "small_convnet",
    "softmax_temperature",
    "train_autoencoder",
    "train_classifier",
]
