"""Bundled example modal-channel profiles.

All coupling coefficients and delays below are illustrative fixtures chosen
to exercise the models at a plausible operating point for a ~100 m
multimode span at 25 GBaud; they are not measured fiber data.
"""

from __future__ import annotations

from .channel import ModalChannelSpec, ModeCoupling


def mmf_100m_moderate() -> ModalChannelSpec:
    """Moderate mode coupling: mild interferometric fading, well-conditioned."""
    modes = (
        ModeCoupling(rho_in=0.976 + 0.0j, rho_out=0.976 + 0.0j, delay_s=0.0),
        ModeCoupling(rho_in=0.300 + 0.29j, rho_out=0.285 - 0.31j, delay_s=8.0e-12),
        ModeCoupling(rho_in=0.260 - 0.27j, rho_out=0.300 + 0.22j, delay_s=1.9e-11),
        ModeCoupling(rho_in=0.250 + 0.21j, rho_out=0.240 - 0.26j, delay_s=3.3e-11),
        ModeCoupling(rho_in=0.220 - 0.18j, rho_out=0.200 + 0.23j, delay_s=4.8e-11),
        ModeCoupling(rho_in=0.180 + 0.16j, rho_out=0.170 - 0.19j, delay_s=6.6e-11),
    )
    return ModalChannelSpec(modes=modes, mmf_length_m=100.0, label="mmf-100m-moderate")


def mmf_100m_strong() -> ModalChannelSpec:
    """Strong mode coupling: deep fades, wide run-to-run SNR spread."""
    modes = (
        ModeCoupling(rho_in=0.880 + 0.0j, rho_out=0.885 + 0.0j, delay_s=0.0),
        ModeCoupling(rho_in=0.480 + 0.43j, rho_out=0.465 - 0.44j, delay_s=1.1e-11),
        ModeCoupling(rho_in=0.390 - 0.38j, rho_out=0.405 + 0.36j, delay_s=2.4e-11),
        ModeCoupling(rho_in=0.355 + 0.33j, rho_out=0.340 - 0.35j, delay_s=3.9e-11),
        ModeCoupling(rho_in=0.300 - 0.28j, rho_out=0.295 + 0.30j, delay_s=5.7e-11),
        ModeCoupling(rho_in=0.245 + 0.23j, rho_out=0.250 - 0.24j, delay_s=7.9e-11),
    )
    return ModalChannelSpec(modes=modes, mmf_length_m=100.0, label="mmf-100m-strong")


PROFILES = {
    "mmf-100m-moderate": mmf_100m_moderate,
    "mmf-100m-strong": mmf_100m_strong,
}


def get_profile(name: str) -> ModalChannelSpec:
    try:
        return PROFILES[name]()
    except KeyError:
        raise KeyError(
            f"unknown profile {name!r}; available: {sorted(PROFILES)}"
        ) from None
