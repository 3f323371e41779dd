"""Experiment configuration: a single JSON document describing the plant,
controller, excitation, OCP weights, simulation and Monte Carlo parameters.

Loading is strict: unknown keys anywhere in the document are rejected, and
every value is pushed through the owning type's validation immediately, so a
bad config fails at load time rather than mid-campaign.
"""

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from .lti import SisoTransferFunction, StateSpace, tf_to_ss
from .ocp import OcpConfig
from .signals import MultisineSpec, grid_frequencies
from .simloop import CampaignConfig, RhcConfig

_TOP_KEYS = {"plant", "controller", "excitation", "noise_std",
             "discard_periods", "ocp", "sim_length", "warmup",
             "rhc_noise_std", "monte_carlo", "seed", "out_dir"}
_TF_KEYS = {"num", "den"}
_EXC_KEYS = {"period_length", "k_indices", "amplitude", "periods", "phase_seed"}
_OCP_KEYS = {"T", "T_bar", "Q", "R", "lambda_g", "lambda_sigma",
             "u_box", "y_box", "nominal_mode"}
_MC_KEYS = {"periods_list", "runs"}


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ValueError(f"{where} must be a mapping")
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown key(s) in {where}: {sorted(unknown)}")
    missing = allowed - set(d)
    if missing:
        raise ValueError(f"missing key(s) in {where}: {sorted(missing)}")


@dataclass(frozen=True)
class RunConfig:
    """Validated, typed view of one experiment description."""

    plant: StateSpace
    controller: StateSpace
    excitation: MultisineSpec
    noise_std: float
    discard_periods: int
    ocp: OcpConfig
    sim_length: int
    warmup: np.ndarray
    rhc_noise_std: float
    mc_periods_list: tuple
    mc_runs: int
    seed: int
    out_dir: str

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        _reject_unknown(d, _TOP_KEYS, "config")
        _reject_unknown(d["plant"], _TF_KEYS, "plant")
        _reject_unknown(d["controller"], _TF_KEYS, "controller")
        _reject_unknown(d["excitation"], _EXC_KEYS, "excitation")
        _reject_unknown(d["ocp"], _OCP_KEYS, "ocp")
        _reject_unknown(d["monte_carlo"], _MC_KEYS, "monte_carlo")

        plant = tf_to_ss(SisoTransferFunction(tuple(d["plant"]["num"]),
                                              tuple(d["plant"]["den"])))
        ctrl = tf_to_ss(SisoTransferFunction(tuple(d["controller"]["num"]),
                                             tuple(d["controller"]["den"])))
        exc_d = d["excitation"]
        w = grid_frequencies(int(exc_d["period_length"]),
                             [int(k) for k in exc_d["k_indices"]])
        amp = np.broadcast_to(np.asarray(exc_d["amplitude"], dtype=float),
                              w.shape).copy()
        excitation = MultisineSpec.with_random_phases(
            w, amp, int(exc_d["period_length"]), int(exc_d["periods"]),
            seed=int(exc_d["phase_seed"]))

        o = d["ocp"]
        u_box = np.asarray(o["u_box"], dtype=float)
        y_box = np.asarray(o["y_box"], dtype=float)
        ocp = OcpConfig(
            T=int(o["T"]), T_bar=int(o["T_bar"]), Q=o["Q"], R=o["R"],
            lambda_g=float(o["lambda_g"]), lambda_sigma=float(o["lambda_sigma"]),
            u_box=tuple(map(tuple, u_box.reshape(-1, 2))),
            y_box=tuple(map(tuple, y_box.reshape(-1, 2))),
            nominal_mode=bool(o["nominal_mode"]))

        warmup = np.asarray(d["warmup"], dtype=float)
        if warmup.ndim == 1:
            warmup = warmup.reshape(-1, 1)
        mc = d["monte_carlo"]
        cfg = RunConfig(
            plant=plant, controller=ctrl, excitation=excitation,
            noise_std=float(d["noise_std"]),
            discard_periods=int(d["discard_periods"]),
            ocp=ocp, sim_length=int(d["sim_length"]), warmup=warmup,
            rhc_noise_std=float(d["rhc_noise_std"]),
            mc_periods_list=tuple(int(p) for p in mc["periods_list"]),
            mc_runs=int(mc["runs"]),
            seed=int(d["seed"]), out_dir=str(d["out_dir"]))
        if cfg.noise_std < 0 or cfg.rhc_noise_std < 0:
            raise ValueError("noise levels must be nonnegative")
        if cfg.discard_periods < 0:
            raise ValueError("discard_periods must be nonnegative")
        if cfg.sim_length < 1:
            raise ValueError("sim_length must be at least 1")
        # exercise the remaining invariants now (warmup length/shape)
        RhcConfig(cfg.ocp, None, cfg.sim_length, cfg.warmup,
                  cfg.rhc_noise_std, cfg.seed)
        return cfg

    @staticmethod
    def from_json(path) -> "RunConfig":
        with open(path) as fh:
            return RunConfig.from_dict(json.load(fh))

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    def campaign(self) -> CampaignConfig:
        return CampaignConfig(
            controller=self.controller, excitation=self.excitation,
            exp_noise_std=self.noise_std, discard_periods=self.discard_periods,
            ocp=self.ocp, sim_length=self.sim_length, warmup=self.warmup,
            rhc_noise_std=self.rhc_noise_std)

    def rhc_config(self, eqs, rng_seed) -> RhcConfig:
        return RhcConfig(self.ocp, eqs, self.sim_length, self.warmup,
                         self.rhc_noise_std, rng_seed)


def write_default_config(path) -> None:
    from .casestudy import default_config_dict
    with open(path, "w") as fh:
        json.dump(default_config_dict(), fh, indent=2)
        fh.write("\n")
