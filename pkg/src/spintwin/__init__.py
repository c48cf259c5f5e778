"""Desk-scale model of a two-qubit silicon spin processor.

Subpackages cover the full workflow: device model fitting (`device`),
adiabatic pulse design (`pulses`), noisy time-domain simulation
(`dynamics`), gate set assembly (`gateset`), gate set tomography
(`gst`), error metrics (`metrics`), closed-loop calibration
(`calibration`) and a two-qubit hydrogen VQE (`vqe`).
"""

__version__ = "0.1.0"
