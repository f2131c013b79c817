"""Conversion constants between atomic units and lab units."""

AU_FIELD_V_PER_CM = 5.14220675e9
AU_TIME_S = 2.418884e-17
BOHR_M = 5.29177210903e-11
NS = 1e-9
PS = 1e-12
RYDBERG_LIFETIME_S = 10e-6


def field_to_au(e_v_per_cm: float) -> float:
    return e_v_per_cm / AU_FIELD_V_PER_CM


def field_from_au(e_au: float) -> float:
    return e_au * AU_FIELD_V_PER_CM


def time_to_ns(t_au: float) -> float:
    return t_au * AU_TIME_S / NS


def time_from_ns(t_ns: float) -> float:
    return t_ns * NS / AU_TIME_S


def time_from_ps(t_ps: float) -> float:
    return t_ps * PS / AU_TIME_S


def length_to_au(r_m: float) -> float:
    return r_m / BOHR_M
