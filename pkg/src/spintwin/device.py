"""Physical model of the exchange-coupled double quantum dot.

Everything is kept in frequency units (Hz): the two-spin Hamiltonian is
divided through by Planck's constant, which absorbs g, the Bohr magneton
and hbar into the qubit frequencies.  In the computational basis
(|00>, |01>, |10>, |11>, first label = qubit 1, |0> the lower Zeeman
state) the Hamiltonian is

    H/h = -f_Q1(v_B) Z1/2 - f_Q2(v_B) Z2/2
          + J(v_B)/4 (X1X2 + Y1Y2 + Z1Z2 - 11)

with the exponential barrier-voltage exchange J(v_B) = J_res e^(2 alpha v_B)
and barrier-dependent frequency shifts f_Qj(v_B) = f_Qj + beta_j v_B^gamma.

The fitters recover all model constants from conditional-frequency and
dephasing-time data by damped least squares, with residual-bootstrap
confidence intervals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict, replace

import numpy as np
import scipy.optimize

H_DERIV_STEP_VB = 10e-6     # volts; central-difference step along v_B
H_DERIV_STEP_FREQ = 100.0   # Hz; step along the bare qubit frequencies


@dataclass(frozen=True)
class DeviceModel:
    """All constants of the two-qubit device model.

    Frequencies in Hz, alpha in 1/V, beta in Hz/V^gamma, noise amplitudes
    as rms values (delta_vb in V).  drive_q1/drive_q2 are the fixed
    microwave amplitudes expressed as the peak Rabi rate each qubit picks
    up from a unit-amplitude tone on the shared drive line.
    """

    f_q1: float
    f_q2: float
    j_res: float
    alpha: float
    beta1: float = 0.0
    beta2: float = 0.0
    gamma: float = 1.0
    delta_vb: float = 0.0
    delta_f_q1: float = 0.0
    delta_f_q2: float = 0.0
    drive_q1: float = 0.0
    drive_q2: float = 0.0

    def __post_init__(self):
        if self.j_res <= 0:
            raise ValueError("residual exchange must be positive")
        if self.f_q1 == self.f_q2:
            raise ValueError("qubit frequencies must differ")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        for name in ("delta_vb", "delta_f_q1", "delta_f_q2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def delta_ez(self) -> float:
        """Zeeman splitting difference f_Q1 - f_Q2 (Hz, sign included)."""
        return self.f_q1 - self.f_q2

    def replace(self, **kw) -> "DeviceModel":
        return replace(self, **kw)


# Fitted values of the reference device shipped with the repo.
_JSON_FIELDS = {
    "f_q1": "f_q1_hz", "f_q2": "f_q2_hz", "j_res": "j_res_hz",
    "alpha": "alpha_per_volt",
    "beta1": "beta1_hz_per_voltgamma", "beta2": "beta2_hz_per_voltgamma",
    "gamma": "gamma",
    "delta_vb": "delta_vb_volt",
    "delta_f_q1": "delta_f_q1_hz", "delta_f_q2": "delta_f_q2_hz",
    "drive_q1": "drive_q1_hz", "drive_q2": "drive_q2_hz",
}


def save_device(model: DeviceModel, path) -> None:
    payload = {_JSON_FIELDS[k]: v for k, v in asdict(model).items()}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_device(path) -> DeviceModel:
    with open(path) as fh:
        payload = json.load(fh)
    inverse = {v: k for k, v in _JSON_FIELDS.items()}
    return DeviceModel(**{inverse[k]: float(v) for k, v in payload.items()})


def reference_device() -> DeviceModel:
    """The fitted reference device bundled with the package."""
    from importlib.resources import files
    path = files("spintwin.data") / "delft_2022_reference.device.json"
    inverse = {v: k for k, v in _JSON_FIELDS.items()}
    payload = json.loads(path.read_text())
    return DeviceModel(**{inverse[k]: float(v) for k, v in payload.items()})


def exchange(model: DeviceModel, v_b) -> np.ndarray | float:
    """Exchange coupling J(v_B) = J_res exp(2 alpha v_B), in Hz."""
    return model.j_res * np.exp(2.0 * model.alpha * np.asarray(v_b, dtype=float))


def barrier_for_exchange(model: DeviceModel, j) -> np.ndarray | float:
    """Inverse of :func:`exchange`: barrier voltage giving exchange j."""
    return np.log(np.asarray(j, dtype=float) / model.j_res) / (2.0 * model.alpha)


def field_shift(model: DeviceModel, v_b):
    """Barrier-induced frequency shifts (df_Q1, df_Q2) in Hz.

    The power law is extended to negative excursions as an odd function so
    that noise fluctuations around v_B = 0 stay real-valued.
    """
    v = np.asarray(v_b, dtype=float)
    mag = np.sign(v) * np.abs(v) ** model.gamma
    return model.beta1 * mag, model.beta2 * mag


def hamiltonian(model: DeviceModel, v_b: float,
                df_q1: float = 0.0, df_q2: float = 0.0) -> np.ndarray:
    """4x4 Hamiltonian (Hz) at barrier voltage v_b plus frequency offsets."""
    j = float(exchange(model, v_b))
    s1, s2 = field_shift(model, v_b)
    f1 = model.f_q1 + s1 + df_q1
    f2 = model.f_q2 + s2 + df_q2
    h = np.zeros((4, 4))
    h[0, 0] = -(f1 + f2) / 2
    h[3, 3] = +(f1 + f2) / 2
    h[1, 1] = (f2 - f1) / 2 - j / 2
    h[2, 2] = (f1 - f2) / 2 - j / 2
    h[1, 2] = h[2, 1] = j / 2
    return h


@dataclass(frozen=True)
class ConditionalFrequencies:
    """The four conditional transition frequencies (Hz)."""

    f_q1_given_q2_0: float
    f_q1_given_q2_1: float
    f_q2_given_q1_0: float
    f_q2_given_q1_1: float

    @property
    def splitting_q1(self) -> float:
        """f_Q1(other=1) - f_Q1(other=0); equals J by the trace identity."""
        return self.f_q1_given_q2_1 - self.f_q1_given_q2_0

    @property
    def splitting_q2(self) -> float:
        return self.f_q2_given_q1_1 - self.f_q2_given_q1_0

    def as_array(self) -> np.ndarray:
        return np.array([self.f_q1_given_q2_0, self.f_q1_given_q2_1,
                         self.f_q2_given_q1_0, self.f_q2_given_q1_1])


def conditional_frequencies(model: DeviceModel, v_b: float,
                            df_q1: float = 0.0,
                            df_q2: float = 0.0) -> ConditionalFrequencies:
    """Conditional transition frequencies by exact diagonalization.

    The odd-parity eigenstates are labeled by their overlap with the bare
    |01> and |10> states, which is well defined as long as the qubit
    frequencies stay split.
    """
    h = hamiltonian(model, v_b, df_q1, df_q2)
    e00, e11 = h[0, 0], h[3, 3]
    w, vec = np.linalg.eigh(h[1:3, 1:3])
    ov01 = np.abs(vec[0, :])
    if abs(ov01[0] - ov01[1]) < 1e-9:
        raise ValueError(
            "degenerate qubit frequencies: odd-parity eigenstates cannot "
            "be labeled")
    i01 = int(np.argmax(ov01))
    e01, e10 = w[i01], w[1 - i01]
    return ConditionalFrequencies(
        f_q1_given_q2_0=e10 - e00,
        f_q1_given_q2_1=e11 - e01,
        f_q2_given_q1_0=e01 - e00,
        f_q2_given_q1_1=e11 - e10,
    )


def _conditional_frequencies_closed_form(params, v_b):
    """Vectorized closed-form conditional frequencies for the fitters.

    params = (alpha, beta1, beta2, gamma, j_res, f_q1, f_q2); returns an
    array of shape (4, len(v_b)) ordered as ConditionalFrequencies.
    """
    alpha, beta1, beta2, gamma, j_res, f_q1, f_q2 = params
    v = np.asarray(v_b, dtype=float)
    j = j_res * np.exp(2.0 * alpha * v)
    mag = np.sign(v) * np.abs(v) ** gamma
    f1 = f_q1 + beta1 * mag
    f2 = f_q2 + beta2 * mag
    dez = f1 - f2
    root = np.sqrt(dez ** 2 + j ** 2)
    # Odd-block eigenvalues; the |01>-labeled branch is the one that tends
    # to (f2 - f1)/2 as J -> 0, i.e. -sign(dez) * root / 2.
    e01 = -j / 2 - np.sign(dez) * root / 2
    e10 = -j / 2 + np.sign(dez) * root / 2
    e00 = -(f1 + f2) / 2
    e11 = +(f1 + f2) / 2
    return np.stack([e10 - e00, e11 - e01, e01 - e00, e11 - e10])


@dataclass(frozen=True)
class DephasingTimes:
    """Pure dephasing times of the four conditional transitions (s)."""

    t2_q1_given_q2_0: float
    t2_q1_given_q2_1: float
    t2_q2_given_q1_0: float
    t2_q2_given_q1_1: float

    def as_array(self) -> np.ndarray:
        return np.array([self.t2_q1_given_q2_0, self.t2_q1_given_q2_1,
                         self.t2_q2_given_q1_0, self.t2_q2_given_q1_1])


def transition_sensitivities(model: DeviceModel, v_b: float) -> np.ndarray:
    """Central-difference derivatives of the four conditional frequencies.

    Returns shape (4, 3): derivatives w.r.t. v_B (Hz/V) and the two bare
    qubit frequencies (dimensionless).  Step sizes are fixed module
    constants, three orders below the fitted noise scales.
    """
    def freqs(dv=0.0, df1=0.0, df2=0.0):
        m = model.replace(f_q1=model.f_q1 + df1, f_q2=model.f_q2 + df2)
        return conditional_frequencies(m, v_b + dv).as_array()

    dv, df = H_DERIV_STEP_VB, H_DERIV_STEP_FREQ
    d_vb = (freqs(dv=dv) - freqs(dv=-dv)) / (2 * dv)
    d_f1 = (freqs(df1=df) - freqs(df1=-df)) / (2 * df)
    d_f2 = (freqs(df2=df) - freqs(df2=-df)) / (2 * df)
    return np.stack([d_vb, d_f1, d_f2], axis=1)


def dephasing_times(model: DeviceModel, v_b: float) -> DephasingTimes:
    """Quasistatic dephasing times 1 / (sqrt(2) pi sigma_f) per transition.

    sigma_f is the rms transition-frequency fluctuation from the three
    noise channels.  With all noise amplitudes zero the times are infinite
    and returned as math.inf explicitly.
    """
    noise = np.array([model.delta_vb, model.delta_f_q1, model.delta_f_q2])
    sens = transition_sensitivities(model, v_b)
    var = (sens ** 2) @ (noise ** 2)
    with np.errstate(divide="ignore"):
        t2 = np.where(var > 0.0, 1.0 / (np.sqrt(2.0) * np.pi * np.sqrt(var)),
                      np.inf)
    return DephasingTimes(*t2)


def _t2_closed_form(exchange_params, noise_params, v_b):
    """Vectorized dephasing times for the noise fitter; shape (4, n)."""
    delta_vb, delta_f1, delta_f2 = noise_params
    v = np.asarray(v_b, dtype=float)
    dv, df = H_DERIV_STEP_VB, H_DERIV_STEP_FREQ

    def f(shift_v=0.0, shift1=0.0, shift2=0.0):
        p = list(exchange_params)
        p[5] += shift1
        p[6] += shift2
        return _conditional_frequencies_closed_form(p, v + shift_v)

    d_vb = (f(shift_v=dv) - f(shift_v=-dv)) / (2 * dv)
    d_f1 = (f(shift1=df) - f(shift1=-df)) / (2 * df)
    d_f2 = (f(shift2=df) - f(shift2=-df)) / (2 * df)
    var = (d_vb * delta_vb) ** 2 + (d_f1 * delta_f1) ** 2 + (d_f2 * delta_f2) ** 2
    return 1.0 / (np.sqrt(2.0) * np.pi * np.sqrt(var))


@dataclass
class FitResult:
    model: DeviceModel
    params: dict
    intervals: dict          # param -> (lo, hi), 95% residual bootstrap
    residual_norm: float
    n_iterations: int


class FitError(RuntimeError):
    """Raised when a least-squares fit fails to converge."""

    def __init__(self, message, residual_norm=None):
        super().__init__(message)
        self.residual_norm = residual_norm


_EXCHANGE_PARAM_NAMES = ("alpha", "beta1", "beta2", "gamma", "j_res",
                         "f_q1", "f_q2")


def _initial_exchange_guess(v_b, freqs):
    """Heuristic start: log-linear splitting fit plus mean-frequency levels."""
    split = np.abs(freqs[:, 1] - freqs[:, 0])
    split = np.clip(split, 1.0, None)
    slope, intercept = np.polyfit(v_b, np.log(split), 1)
    alpha = slope / 2.0
    j_res = float(np.exp(intercept))
    i0 = int(np.argmin(v_b))
    f_q1 = float((freqs[i0, 0] + freqs[i0, 1]) / 2)
    f_q2 = float((freqs[i0, 2] + freqs[i0, 3]) / 2)
    # Mean Q2 shift against v_B^1 seeds beta2; beta1 from Q1 likewise.
    mean2 = (freqs[:, 2] + freqs[:, 3]) / 2 - f_q2
    mean1 = (freqs[:, 0] + freqs[:, 1]) / 2 - f_q1
    beta2 = float(np.polyfit(v_b, mean2, 1)[0]) or 1e6
    beta1 = float(np.polyfit(v_b, mean1, 1)[0]) or -1e5
    return np.array([alpha, beta1, beta2, 1.0, j_res, f_q1, f_q2])


def _run_lm(residual_fn, x0, x_scale, max_nfev=20000):
    res = scipy.optimize.least_squares(
        residual_fn, x0, method="lm", x_scale=x_scale, max_nfev=max_nfev,
        xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if not res.success:
        raise FitError(
            f"least-squares fit did not converge: {res.message} "
            f"(residual norm {np.linalg.norm(res.fun):.3e})",
            residual_norm=float(np.linalg.norm(res.fun)))
    return res


def fit_exchange_model(freq_data, n_bootstrap: int = 200, seed: int = 0,
                       x0=None) -> FitResult:
    """Fit (alpha, beta1, beta2, gamma, j_res, f_q1, f_q2) to frequency data.

    freq_data: sequence of (v_B, (f_q1|0, f_q1|1, f_q2|0, f_q2|1)).
    All four conditional-frequency curves are fitted simultaneously.
    Requires >= 8 distinct barrier points spanning at least a decade of J.
    """
    v_b = np.array([p[0] for p in freq_data], dtype=float)
    freqs = np.array([p[1] for p in freq_data], dtype=float)
    if len(np.unique(v_b)) < 8:
        raise ValueError("need at least 8 distinct barrier voltages")
    split = np.abs(freqs[:, 1] - freqs[:, 0])
    if split.max() / max(split.min(), 1.0) < 10.0:
        raise ValueError("data must span at least a decade of J")

    target = freqs.T  # shape (4, n)

    def residuals(p):
        return (_conditional_frequencies_closed_form(p, v_b) - target).ravel()

    x0 = _initial_exchange_guess(v_b, freqs) if x0 is None else np.asarray(x0)
    x_scale = np.abs(x0) + np.array([1.0, 1e5, 1e5, 0.1, 1e3, 1e6, 1e6])
    res = _run_lm(residuals, x0, x_scale)
    best = res.x

    fitted = _conditional_frequencies_closed_form(best, v_b)
    intervals = _residual_bootstrap(
        _EXCHANGE_PARAM_NAMES, best, fitted, target, len(best), x_scale,
        lambda p, fake: (_conditional_frequencies_closed_form(p, v_b) -
                         fake).ravel(),
        n_bootstrap, seed)

    params = dict(zip(_EXCHANGE_PARAM_NAMES, best))
    model = DeviceModel(
        f_q1=params["f_q1"], f_q2=params["f_q2"], j_res=params["j_res"],
        alpha=params["alpha"], beta1=params["beta1"], beta2=params["beta2"],
        gamma=params["gamma"])
    return FitResult(model=model, params=params, intervals=intervals,
                     residual_norm=float(np.linalg.norm(res.fun)),
                     n_iterations=int(res.nfev))


_NOISE_PARAM_NAMES = ("delta_vb", "delta_f_q1", "delta_f_q2")


def fit_noise_model(model: DeviceModel, t2_data, n_bootstrap: int = 200,
                    seed: int = 0, x0=None) -> FitResult:
    """Fit the three rms noise amplitudes to dephasing-time data.

    t2_data: sequence of (v_B, (T2 values for the four transitions)).
    The exchange model must already be fitted; its parameters are frozen.
    """
    v_b = np.array([p[0] for p in t2_data], dtype=float)
    t2 = np.array([p[1] for p in t2_data], dtype=float).T  # (4, n)
    exch = np.array([model.alpha, model.beta1, model.beta2, model.gamma,
                     model.j_res, model.f_q1, model.f_q2])

    # Rates are linear in the squared amplitudes, which seeds the fit.
    rates2 = (1.0 / (np.sqrt(2.0) * np.pi * t2)) ** 2
    sens = np.stack([
        _t2_closed_form(exch, (1.0, 0.0, 0.0), v_b),
        _t2_closed_form(exch, (0.0, 1.0, 0.0), v_b),
        _t2_closed_form(exch, (0.0, 0.0, 1.0), v_b),
    ])
    design = (1.0 / (np.sqrt(2.0) * np.pi * sens) ** 2).reshape(3, -1).T
    lin, _ = scipy.optimize.nnls(design, rates2.ravel())

    def residuals(p):
        return (np.log(_t2_closed_form(exch, np.abs(p), v_b)) -
                np.log(t2)).ravel()

    x0 = np.sqrt(np.maximum(lin, 1e-30)) if x0 is None else np.asarray(x0)
    x_scale = np.abs(x0) + np.array([1e-5, 1e2, 1e2])
    res = _run_lm(residuals, x0, x_scale)
    best = np.abs(res.x)

    fitted = np.log(_t2_closed_form(exch, best, v_b))
    intervals = _residual_bootstrap(
        _NOISE_PARAM_NAMES, best, fitted, np.log(t2), len(best), x_scale,
        lambda p, fake: (np.log(_t2_closed_form(exch, np.abs(p), v_b)) -
                         fake).ravel(),
        n_bootstrap, seed, postprocess=np.abs)

    params = dict(zip(_NOISE_PARAM_NAMES, best))
    fitted_model = model.replace(delta_vb=params["delta_vb"],
                                 delta_f_q1=params["delta_f_q1"],
                                 delta_f_q2=params["delta_f_q2"])
    return FitResult(model=fitted_model, params=params, intervals=intervals,
                     residual_norm=float(np.linalg.norm(res.fun)),
                     n_iterations=int(res.nfev))


def _residual_bootstrap(names, best, fitted, target, n_params, x_scale,
                        residual_fn, n_bootstrap, seed, postprocess=None):
    """95% percentile intervals from a residual bootstrap.

    Residuals are pooled across all curves and inflated by
    sqrt(N / (N - p)) to undo the variance absorbed by the fit.
    """
    if n_bootstrap <= 0:
        return {n: (np.nan, np.nan) for n in names}
    rng = np.random.default_rng(seed)
    resid = (target - fitted).ravel()
    resid = resid * np.sqrt(resid.size / (resid.size - n_params))
    samples = []
    for _ in range(n_bootstrap):
        take = rng.integers(0, resid.size, size=resid.size)
        fake = fitted + resid[take].reshape(fitted.shape)
        try:
            x = _run_lm(lambda p: residual_fn(p, fake), best, x_scale,
                        max_nfev=5000).x
        except FitError:
            continue
        samples.append(postprocess(x) if postprocess else x)
    if not samples:
        return {n: (np.nan, np.nan) for n in names}
    arr = np.array(samples)
    lo = np.percentile(arr, 2.5, axis=0)
    hi = np.percentile(arr, 97.5, axis=0)
    return {n: (float(a), float(b)) for n, a, b in zip(names, lo, hi)}
