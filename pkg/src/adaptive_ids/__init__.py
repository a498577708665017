"""Adaptive network intrusion detection over KDD99-style connection records.

Neural binary classifiers (an MLP with resilient-propagation and
Levenberg-Marquardt trainers, an SMO-trained SVM) feed a three-role
detection architecture: Net-LAN monitors classify traffic, a honeypot
monitor contributes auto-confirmed attack evidence, and a central module
triages alarms, retrains the base classifier on confirmed evidence, and
broadcasts versioned model updates back to every monitor.
"""

from . import classifier, kdd, mlp, protocol, svm
from .classifier import ClassifierArtifact, Prediction, TrainSpec
from .kdd import ConnectionRecord, KddEncoder, Label

__all__ = [
    "ClassifierArtifact",
    "ConnectionRecord",
    "KddEncoder",
    "Label",
    "Prediction",
    "TrainSpec",
    "classifier",
    "kdd",
    "mlp",
    "protocol",
    "svm",
]

__version__ = "0.1.0"
