#!/usr/bin/env python3
"""Generate the bundled nk catalog (data/nk/*.nk).

Each material is produced from one of three sources:
  * Sellmeier / Cauchy coefficients (transparent media, published fits),
  * a Drude + Lorentz oscillator model (metals, metallic compounds),
  * a Tauc-Lorentz model or hand-anchored (lambda, n, k) tables
    (semiconductors and UV-absorbing oxides), PCHIP-interpolated.

Output format per file:
  # name=<name> category=<Metal|Alloy|Semiconductor|Dielectric|Transparent|Other>
  <lambda_nm> <n> <k>

The output grid spans 240-2600 nm so that any 250-2500 nm design grid is
interior to every material's support.
"""

import argparse
import pathlib

import numpy as np
from scipy.interpolate import PchipInterpolator

HC_EV_NM = 1239.841984  # photon energy [eV] * wavelength [nm]


def output_grid():
    a = np.arange(240.0, 600.0, 2.0)
    b = np.arange(600.0, 1200.0, 5.0)
    c = np.arange(1200.0, 2600.0 + 1e-9, 10.0)
    return np.concatenate([a, b, c])


GRID_NM = output_grid()
GRID_UM = GRID_NM / 1000.0
GRID_EV = HC_EV_NM / GRID_NM


# ---------------------------------------------------------------------------
# model evaluators


def sellmeier(bs, cs):
    """n^2 = 1 + sum b*l^2/(l^2 - c), l in um, c in um^2."""
    l2 = GRID_UM**2
    n2 = 1.0 + sum(b * l2 / (l2 - c) for b, c in zip(bs, cs))
    return np.sqrt(np.maximum(n2, 1e-6)), np.zeros_like(GRID_NM)


def cauchy(a, b, c=0.0):
    """n = a + b/l^2 + c/l^4, l in um."""
    n = a + b / GRID_UM**2 + c / GRID_UM**4
    return n, np.zeros_like(GRID_NM)


def eps_to_nk(eps):
    mod = np.abs(eps)
    n = np.sqrt(np.maximum((mod + eps.real) / 2.0, 1e-12))
    k = np.sqrt(np.maximum((mod - eps.real) / 2.0, 0.0))
    return np.maximum(n, 0.02), k


def drude_lorentz(eps_inf, wp_ev, gamma_ev, lorentz=()):
    """eps = eps_inf - wp^2/(w^2 + i g w) + sum f wj^2/(wj^2 - w^2 - i G w)."""
    w = GRID_EV
    eps = eps_inf - wp_ev**2 / (w**2 + 1j * gamma_ev * w)
    for f, wj, gj in lorentz:
        eps = eps + f * wj**2 / (wj**2 - w**2 - 1j * gj * w)
    return eps_to_nk(eps)


def tauc_lorentz(eps_inf, a, e0, c, eg):
    """Tauc-Lorentz eps2 with eps1 from a numerical Kramers-Kronig transform."""
    xs = np.linspace(0.01, 40.0, 16000)

    def eps2_of(e):
        e = np.asarray(e, dtype=float)
        out = np.zeros_like(e)
        above = e > eg
        ea = e[above]
        out[above] = (a * e0 * c * (ea - eg) ** 2) / (
            ((ea**2 - e0**2) ** 2 + c**2 * ea**2) * ea
        )
        return out

    e2_xs = eps2_of(xs)
    e_eval = GRID_EV
    eps1 = np.empty_like(e_eval)
    for i, e in enumerate(e_eval):
        # principal value via singularity subtraction
        f = (xs * e2_xs - e * eps2_of(e)) / (xs**2 - e**2)
        eps1[i] = eps_inf + (2.0 / np.pi) * np.trapezoid(f, xs)
    eps = eps1 + 1j * eps2_of(e_eval)
    return eps_to_nk(eps)


def anchored(points):
    """PCHIP through (lambda_nm, n, k) anchors."""
    pts = sorted(points)
    lam = np.array([p[0] for p in pts])
    n = np.array([p[1] for p in pts])
    k = np.array([p[2] for p in pts])
    fn = PchipInterpolator(lam, n)
    fk = PchipInterpolator(lam, k)
    return np.maximum(fn(GRID_NM), 0.02), np.maximum(fk(GRID_NM), 0.0)


def with_uv_tail(base, edge_nm, k_at_240, n_bump=0.0):
    """Adds a smooth absorption tail below edge_nm to a transparent model."""
    n, k = base
    mask = GRID_NM < edge_nm
    x = (edge_nm - GRID_NM[mask]) / (edge_nm - 240.0)
    k = k.copy()
    n = n.copy()
    k[mask] = np.maximum(k[mask], k_at_240 * x**2)
    n[mask] = n[mask] + n_bump * x**2
    return n, k


# ---------------------------------------------------------------------------
# catalog definition

MATERIALS = {}


def mat(name, category, nk):
    assert name not in MATERIALS, name
    MATERIALS[name] = (category, nk)


# --- transparent fluorides, oxides, glasses, crystals, polymers -------------

mat("MgF2", "Transparent", sellmeier(
    [0.48755108, 0.39875031, 2.3120353],
    [0.04338408**2, 0.09461442**2, 23.793604**2]))
mat("SiO2", "Transparent", sellmeier(
    [0.6961663, 0.4079426, 0.8974794],
    [0.0684043**2, 0.1162414**2, 9.896161**2]))
mat("Al2O3", "Transparent", sellmeier(
    [1.4313493, 0.65054713, 5.3414021],
    [0.0726631**2, 0.1193242**2, 18.028251**2]))
mat("CaF2", "Transparent", sellmeier(
    [0.5675888, 0.4710914, 3.8484723],
    [0.050263605**2, 0.1003909**2, 34.649040**2]))
mat("BaF2", "Transparent", sellmeier(
    [0.643356, 0.506762, 3.8261],
    [0.057789**2, 0.10968**2, 46.3864**2]))
mat("LiF", "Transparent", sellmeier(
    [0.92549, 6.96747], [0.07376**2, 32.79**2]))
mat("BK7", "Transparent", sellmeier(
    [1.03961212, 0.231792344, 1.01046945],
    [0.00600069867, 0.0200179144, 103.560653]))
mat("SF10", "Transparent", sellmeier(
    [1.62153902, 0.256287842, 1.64447552],
    [0.0122241457, 0.0595736775, 147.468793]))
mat("SF11", "Transparent", sellmeier(
    [1.73759695, 0.313747346, 1.89878101],
    [0.013188707, 0.0623068142, 155.23629]))
mat("F2", "Transparent", sellmeier(
    [1.34533359, 0.209073176, 0.937357162],
    [0.00997743871, 0.0470450767, 111.886764]))
mat("Diamond", "Transparent", sellmeier(
    [4.3356, 0.3306], [0.1060**2, 0.1750**2]))
mat("MgO", "Transparent", sellmeier(
    [1.111033, 0.8460085, 7.808527],
    [0.0712465**2, 0.1375204**2, 26.89302**2]))
mat("ZrO2", "Transparent", sellmeier(
    [1.347091, 2.117788, 9.452943],
    [0.062543**2, 0.166739**2, 24.320570**2]))
mat("HfO2", "Transparent", cauchy(1.97, 0.0208))
mat("Y2O3", "Transparent", cauchy(1.90, 0.0120))
mat("Sc2O3", "Transparent", cauchy(1.965, 0.0125))
mat("La2O3", "Transparent", cauchy(1.86, 0.0130))
mat("AlN", "Transparent", cauchy(2.12, 0.0145))
mat("Si3N4", "Transparent", sellmeier([2.8939], [0.13967**2]))
mat("MgAl2O4", "Transparent", cauchy(1.70, 0.0085))
mat("YAG", "Transparent", cauchy(1.815, 0.0105))
mat("CaO", "Transparent", cauchy(1.82, 0.0095))
mat("LaF3", "Transparent", cauchy(1.59, 0.0055))
mat("CeF3", "Transparent", cauchy(1.615, 0.0060))
mat("AlF3", "Transparent", cauchy(1.375, 0.0030))
mat("YF3", "Transparent", cauchy(1.51, 0.0045))
mat("YbF3", "Transparent", cauchy(1.52, 0.0048))
mat("GdF3", "Transparent", cauchy(1.55, 0.0050))
mat("ThF4", "Transparent", cauchy(1.515, 0.0047))
mat("Na3AlF6", "Transparent", cauchy(1.34, 0.0025))
mat("NaF", "Transparent", cauchy(1.32, 0.0022))
mat("NaCl", "Transparent", cauchy(1.53, 0.0065))
mat("KCl", "Transparent", cauchy(1.48, 0.0055))
mat("KBr", "Transparent", cauchy(1.545, 0.0080))
mat("CsI", "Transparent", cauchy(1.73, 0.0160))
mat("PMMA", "Transparent", cauchy(1.478, 0.0055))
mat("Polycarbonate", "Transparent", cauchy(1.568, 0.0105))
mat("Polystyrene", "Transparent", cauchy(1.573, 0.0115))
mat("PET", "Transparent", cauchy(1.615, 0.0125))
mat("PTFE", "Transparent", cauchy(1.35, 0.0020))
mat("PDMS", "Transparent", cauchy(1.40, 0.0030))
mat("SiO", "Transparent", with_uv_tail(cauchy(1.87, 0.0300), 450.0, 0.55, 0.1))

# --- UV-absorbing oxides / wide-gap compounds (Dielectric) ------------------

_tio2_uv = [
    (240, 3.00, 1.70), (260, 3.20, 1.45), (280, 3.35, 1.15), (300, 3.38, 0.85),
    (320, 3.30, 0.55), (340, 3.20, 0.25), (360, 3.12, 0.06), (380, 3.05, 0.010),
    (400, 2.996, 0.0),
]


def tio2_rutile():
    l2 = GRID_UM**2
    n = np.sqrt(5.913 + 0.2441 / np.maximum(l2 - 0.0803, 0.02))
    k = np.zeros_like(GRID_NM)
    uv = anchored(_tio2_uv + [(500, 2.70, 0.0), (700, 2.58, 0.0)])
    mask = GRID_NM < 400.0
    n[mask] = uv[0][mask]
    k[mask] = uv[1][mask]
    return n, k


mat("TiO2", "Dielectric", tio2_rutile())
mat("TiO2_anatase", "Dielectric", with_uv_tail(cauchy(2.45, 0.050), 385.0, 1.2, 0.4))
mat("CeO2", "Dielectric", with_uv_tail(cauchy(2.25, 0.045), 395.0, 0.9, 0.3))
mat("Nb2O5", "Dielectric", with_uv_tail(cauchy(2.21, 0.040), 365.0, 0.8, 0.3))
mat("Ta2O5", "Dielectric", with_uv_tail(cauchy(2.07, 0.026), 305.0, 0.6, 0.25))
mat("ZnO", "Dielectric", with_uv_tail(cauchy(1.935, 0.028), 378.0, 0.75, 0.25))
mat("SnO2", "Dielectric", with_uv_tail(cauchy(1.97, 0.024), 345.0, 0.6, 0.2))
mat("In2O3", "Dielectric", with_uv_tail(cauchy(2.00, 0.030), 360.0, 0.65, 0.2))
mat("BaTiO3", "Dielectric", with_uv_tail(cauchy(2.33, 0.046), 387.0, 0.85, 0.3))
mat("SrTiO3", "Dielectric", with_uv_tail(cauchy(2.28, 0.044), 382.0, 0.85, 0.3))
mat("LiNbO3", "Dielectric", with_uv_tail(cauchy(2.19, 0.038), 320.0, 0.6, 0.25))
mat("ZnS", "Dielectric", with_uv_tail(cauchy(2.29, 0.042), 345.0, 0.9, 0.3))
mat("WO3", "Dielectric", with_uv_tail(cauchy(2.10, 0.034), 400.0, 0.7, 0.25))
mat("Bi2O3", "Dielectric", with_uv_tail(cauchy(2.28, 0.050), 435.0, 0.85, 0.3))
mat("V2O5", "Dielectric", with_uv_tail(cauchy(2.05, 0.055), 520.0, 1.0, 0.35))
mat("GaN", "Dielectric", with_uv_tail(cauchy(2.32, 0.032), 365.0, 0.85, 0.3))
mat("SiC", "Dielectric", with_uv_tail(cauchy(2.56, 0.042), 390.0, 1.0, 0.35))

# --- semiconductors ----------------------------------------------------------

_si_anchors = [
    (240, 1.60, 3.60), (250, 1.66, 3.64), (260, 1.76, 3.90), (270, 2.00, 4.40),
    (280, 2.50, 5.00), (290, 3.40, 5.30), (300, 5.00, 4.17), (310, 5.01, 3.59),
    (320, 5.11, 3.26), (340, 5.30, 3.00), (350, 5.44, 2.99), (360, 6.00, 2.60),
    (370, 6.85, 1.40), (380, 6.50, 0.80), (390, 5.95, 0.50), (400, 5.57, 0.387),
    (420, 5.12, 0.245), (450, 4.67, 0.145), (480, 4.40, 0.075), (500, 4.29, 0.045),
    (550, 4.08, 0.028), (600, 3.94, 0.022), (650, 3.85, 0.016), (700, 3.78, 0.011),
    (750, 3.73, 0.008), (800, 3.69, 0.0065), (900, 3.62, 0.003), (1000, 3.57, 0.001),
    (1100, 3.545, 0.0002), (1200, 3.52, 0.00002), (1400, 3.49, 0.0), (1700, 3.47, 0.0),
    (2100, 3.455, 0.0), (2600, 3.44, 0.0),
]
mat("Si", "Semiconductor", anchored(_si_anchors))
mat("a-Si", "Semiconductor", anchored([
    (240, 2.6, 2.3), (280, 3.2, 2.6), (320, 3.7, 2.65), (360, 4.1, 2.5),
    (400, 4.45, 2.2), (450, 4.7, 1.7), (500, 4.75, 1.2), (550, 4.72, 0.82),
    (600, 4.62, 0.52), (650, 4.50, 0.32), (700, 4.38, 0.18), (750, 4.28, 0.095),
    (800, 4.20, 0.045), (900, 4.08, 0.009), (1000, 4.00, 0.001), (1200, 3.90, 0.0),
    (1600, 3.80, 0.0), (2600, 3.72, 0.0)]))
_ge_anchors = [
    (240, 1.30, 3.30), (250, 1.45, 3.45), (265, 1.80, 3.95), (285, 2.80, 4.80),
    (300, 3.25, 4.50), (310, 3.90, 3.34), (330, 3.96, 3.10), (350, 4.02, 2.91),
    (380, 4.08, 2.50), (400, 4.14, 2.21), (450, 4.05, 2.14), (496, 4.34, 2.38),
    (550, 4.96, 2.10), (590, 5.28, 1.60), (620, 5.60, 1.10), (650, 5.52, 0.92),
    (700, 5.20, 0.65), (750, 4.97, 0.50), (800, 4.77, 0.38), (900, 4.52, 0.21),
    (1000, 4.37, 0.14), (1200, 4.26, 0.095), (1400, 4.21, 0.050), (1550, 4.21, 0.018),
    (1700, 4.18, 0.004), (1900, 4.13, 0.0005), (2100, 4.10, 0.0), (2600, 4.05, 0.0),
]
mat("Ge", "Semiconductor", anchored(_ge_anchors))
mat("GaAs", "Semiconductor", anchored([
    (240, 2.30, 4.20), (260, 2.90, 3.80), (280, 3.30, 3.30), (300, 3.80, 2.40),
    (330, 3.55, 2.10), (360, 3.45, 2.00), (400, 4.20, 2.10), (430, 4.80, 1.90),
    (450, 4.60, 1.20), (500, 4.37, 0.45), (550, 4.10, 0.31), (600, 3.95, 0.23),
    (650, 3.85, 0.18), (700, 3.78, 0.14), (800, 3.67, 0.08), (850, 3.63, 0.058),
    (870, 3.61, 0.03), (890, 3.60, 0.003), (950, 3.55, 0.0002), (1100, 3.49, 0.0),
    (1500, 3.41, 0.0), (2600, 3.33, 0.0)]))
mat("GaP", "Semiconductor", tauc_lorentz(2.2, 140.0, 3.8, 2.6, 2.26))
mat("GaSb", "Semiconductor", tauc_lorentz(2.8, 110.0, 2.2, 2.4, 0.72))
mat("InP", "Semiconductor", tauc_lorentz(2.1, 120.0, 3.1, 2.5, 1.34))
mat("InAs", "Semiconductor", tauc_lorentz(2.6, 105.0, 2.5, 2.5, 0.42))
mat("InSb", "Semiconductor", tauc_lorentz(3.0, 95.0, 2.0, 2.3, 0.24))
mat("CdTe", "Semiconductor", tauc_lorentz(2.2, 115.0, 3.0, 2.6, 1.50))
mat("CdS", "Semiconductor", tauc_lorentz(1.9, 120.0, 3.9, 2.7, 2.42))
mat("CdSe", "Semiconductor", tauc_lorentz(2.0, 115.0, 3.4, 2.7, 1.74))
mat("ZnTe", "Semiconductor", tauc_lorentz(1.9, 125.0, 3.6, 2.7, 2.26))
mat("ZnSe", "Semiconductor", tauc_lorentz(1.8, 125.0, 4.0, 2.7, 2.70))
mat("AlAs", "Semiconductor", tauc_lorentz(1.7, 130.0, 3.9, 2.6, 2.95))
mat("AlSb", "Semiconductor", tauc_lorentz(2.3, 120.0, 3.2, 2.6, 1.62))
mat("PbS", "Semiconductor", tauc_lorentz(3.2, 95.0, 2.1, 2.6, 0.41))
mat("PbSe", "Semiconductor", tauc_lorentz(3.4, 90.0, 1.9, 2.6, 0.28))
mat("PbTe", "Semiconductor", tauc_lorentz(3.6, 88.0, 1.8, 2.6, 0.32))
mat("Cu2O", "Semiconductor", tauc_lorentz(2.4, 100.0, 3.3, 2.4, 2.10))
mat("Fe2O3", "Semiconductor", tauc_lorentz(2.3, 95.0, 3.4, 2.3, 2.20))
mat("As2S3", "Semiconductor", tauc_lorentz(2.0, 105.0, 3.9, 2.4, 2.35))
mat("As2Se3", "Semiconductor", tauc_lorentz(2.4, 105.0, 3.3, 2.4, 1.85))
mat("Sb2S3", "Semiconductor", tauc_lorentz(2.5, 105.0, 3.1, 2.4, 1.70))
mat("Sb2Se3", "Semiconductor", tauc_lorentz(2.8, 100.0, 2.7, 2.4, 1.20))
mat("SnS", "Semiconductor", tauc_lorentz(2.6, 100.0, 2.9, 2.4, 1.30))
mat("Te", "Semiconductor", tauc_lorentz(3.5, 90.0, 1.9, 2.2, 0.33))
mat("Se", "Semiconductor", tauc_lorentz(2.2, 100.0, 3.2, 2.3, 1.95))
mat("MoS2", "Semiconductor", tauc_lorentz(3.0, 95.0, 2.9, 2.0, 1.35))
mat("Bi2Te3", "Semiconductor", tauc_lorentz(4.0, 85.0, 1.6, 2.2, 0.21))

# --- metals ------------------------------------------------------------------

_cu_anchors = [
    (240, 1.46, 1.76), (260, 1.46, 1.72), (280, 1.44, 1.70), (300, 1.39, 1.67),
    (330, 1.34, 1.70), (350, 1.33, 1.74), (380, 1.24, 1.96), (400, 1.18, 2.21),
    (450, 1.15, 2.40), (500, 1.12, 2.60), (520, 1.07, 2.59), (550, 0.76, 2.46),
    (580, 0.47, 2.78), (600, 0.36, 2.96), (633, 0.25, 3.41), (700, 0.22, 4.00),
    (750, 0.24, 4.45), (800, 0.26, 4.94), (900, 0.30, 5.86), (1000, 0.33, 6.72),
    (1200, 0.42, 8.40), (1500, 0.62, 10.70), (2000, 0.95, 14.40), (2600, 1.45, 18.50),
]
mat("Cu", "Metal", anchored(_cu_anchors))
_al_anchors = [
    (240, 0.19, 2.85), (300, 0.28, 3.61), (350, 0.37, 4.24), (400, 0.49, 4.86),
    (450, 0.62, 5.47), (500, 0.77, 6.08), (550, 0.96, 6.69), (600, 1.20, 7.26),
    (650, 1.47, 7.79), (700, 1.83, 8.31), (750, 2.40, 8.62), (800, 2.80, 8.45),
    (850, 2.75, 8.31), (900, 2.06, 8.30), (950, 1.58, 8.95), (1000, 1.35, 9.58),
    (1200, 1.21, 11.2), (1500, 1.38, 14.0), (2000, 2.15, 18.8), (2600, 3.10, 24.3),
]
mat("Al", "Metal", anchored(_al_anchors))
mat("Ag", "Metal", drude_lorentz(
    3.7, 9.01, 0.048, [(0.9, 4.70, 0.60), (0.3, 5.30, 1.0)]))
mat("Au", "Metal", drude_lorentz(
    5.5, 8.95, 0.069, [(1.1, 2.95, 0.75), (1.2, 3.90, 1.3)]))
mat("Cr", "Metal", drude_lorentz(
    3.0, 6.50, 0.47, [(6.0, 1.35, 1.60), (4.0, 3.20, 2.2)]))
mat("Ni", "Metal", drude_lorentz(
    3.5, 7.10, 0.35, [(5.0, 1.50, 1.90), (3.0, 4.00, 2.5)]))
mat("Ti", "Metal", drude_lorentz(
    2.8, 5.10, 0.55, [(6.5, 1.20, 1.80), (3.0, 2.60, 2.3)]))
mat("W", "Metal", drude_lorentz(
    3.8, 6.30, 0.26, [(7.0, 1.00, 0.95), (5.0, 2.70, 1.8)]))
mat("Mo", "Metal", drude_lorentz(
    3.6, 7.00, 0.30, [(7.5, 1.10, 1.10), (4.5, 2.90, 2.0)]))
mat("Ta", "Metal", drude_lorentz(
    3.2, 6.70, 0.33, [(6.0, 1.30, 1.40), (3.5, 3.00, 2.1)]))
mat("Nb", "Metal", drude_lorentz(
    3.3, 6.90, 0.35, [(5.5, 1.40, 1.50), (3.5, 3.10, 2.1)]))
mat("V", "Metal", drude_lorentz(
    3.1, 6.60, 0.40, [(5.8, 1.30, 1.55), (3.6, 2.90, 2.1)]))
mat("Fe", "Metal", drude_lorentz(
    3.4, 6.80, 0.45, [(5.2, 1.40, 1.80), (3.2, 3.30, 2.4)]))
mat("Co", "Metal", drude_lorentz(
    3.5, 6.90, 0.42, [(5.0, 1.45, 1.85), (3.1, 3.50, 2.4)]))
mat("Pt", "Metal", drude_lorentz(
    3.9, 7.60, 0.33, [(5.5, 1.25, 1.70), (3.5, 3.80, 2.5)]))
mat("Pd", "Metal", drude_lorentz(
    3.7, 7.40, 0.36, [(5.2, 1.35, 1.75), (3.3, 3.60, 2.4)]))
mat("Rh", "Metal", drude_lorentz(
    3.4, 7.90, 0.28, [(4.5, 1.60, 1.80), (3.0, 4.20, 2.5)]))
mat("Ir", "Metal", drude_lorentz(
    3.6, 7.70, 0.30, [(4.8, 1.55, 1.85), (3.1, 4.0, 2.5)]))
mat("Zn", "Metal", drude_lorentz(
    2.8, 8.20, 0.35, [(2.5, 1.70, 1.20), (1.5, 4.6, 2.0)]))
mat("Sn", "Metal", drude_lorentz(
    3.0, 7.80, 0.42, [(3.0, 1.80, 1.60), (1.8, 4.2, 2.2)]))
mat("Pb", "Metal", drude_lorentz(
    3.2, 7.30, 0.48, [(3.5, 1.60, 1.70), (2.0, 3.9, 2.3)]))
mat("Mg", "Metal", drude_lorentz(
    2.2, 8.70, 0.14, [(0.6, 3.80, 1.0)]))
mat("Be", "Metal", drude_lorentz(
    2.9, 7.90, 0.32, [(4.0, 1.50, 1.50), (2.5, 3.6, 2.2)]))

# --- metallic compounds and alloys --------------------------------------------

mat("TiN", "Alloy", drude_lorentz(
    4.2, 7.35, 0.30, [(2.2, 4.20, 1.6), (1.0, 6.2, 1.8)]))
mat("ZrN", "Alloy", drude_lorentz(
    3.9, 7.90, 0.26, [(2.0, 4.60, 1.7), (0.9, 6.5, 1.8)]))
mat("HfN", "Alloy", drude_lorentz(
    3.8, 7.60, 0.28, [(2.1, 4.40, 1.7), (1.0, 6.3, 1.8)]))
mat("NbN", "Alloy", drude_lorentz(
    4.0, 6.90, 0.45, [(3.0, 3.40, 2.0), (2.0, 5.6, 2.3)]))
mat("NiCr", "Alloy", drude_lorentz(
    3.3, 6.90, 0.42, [(5.3, 1.45, 1.85), (3.3, 3.6, 2.35)]))
mat("SS304", "Alloy", drude_lorentz(
    3.4, 6.70, 0.46, [(5.1, 1.45, 1.90), (3.2, 3.5, 2.4)]))
mat("Inconel", "Alloy", drude_lorentz(
    3.4, 6.80, 0.44, [(5.0, 1.50, 1.90), (3.1, 3.6, 2.4)]))
mat("Constantan", "Alloy", drude_lorentz(
    3.3, 7.00, 0.44, [(4.8, 1.50, 1.90), (3.0, 3.6, 2.4)]))
mat("Monel", "Alloy", drude_lorentz(
    3.4, 7.00, 0.42, [(4.9, 1.48, 1.88), (3.0, 3.6, 2.4)]))
mat("Brass", "Alloy", drude_lorentz(
    4.5, 8.20, 0.20, [(2.8, 2.60, 0.90), (1.5, 4.3, 1.8)]))
mat("Bronze", "Alloy", drude_lorentz(
    4.3, 8.00, 0.24, [(2.9, 2.50, 1.00), (1.6, 4.2, 1.9)]))
mat("TiAlN", "Alloy", drude_lorentz(
    4.0, 6.60, 0.42, [(2.8, 3.60, 1.9), (1.5, 5.8, 2.1)]))

# --- conductive oxide --------------------------------------------------------

mat("ITO", "Dielectric", drude_lorentz(
    3.9, 1.78, 0.11, [(0.6, 5.2, 0.9)]))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/nk", type=pathlib.Path)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name, (category, (n, k)) in sorted(MATERIALS.items()):
        assert np.all(n > 0), name
        assert np.all(k >= 0), name
        assert np.all(np.isfinite(n)) and np.all(np.isfinite(k)), name
        path = args.out / f"{name}.nk"
        with open(path, "w") as f:
            f.write(f"# name={name} category={category}\n")
            for lam, nv, kv in zip(GRID_NM, n, k):
                f.write(f"{lam:.1f} {nv:.6g} {kv:.6g}\n")
    print(f"wrote {len(MATERIALS)} materials to {args.out}")

    counts = {}
    for _, (category, _) in MATERIALS.items():
        counts[category] = counts.get(category, 0) + 1
    print("categories:", counts)

    for probe in ["Cu", "Ag", "Au", "W", "TiO2", "Si", "Ge", "MgF2"]:
        cat, (n, k) = MATERIALS[probe]
        for lam in (500.0, 1000.0):
            i = int(np.argmin(np.abs(GRID_NM - lam)))
            print(f"  {probe:6s} @{lam:.0f}nm  n={n[i]:.3f} k={k[i]:.3f}")


if __name__ == "__main__":
    main()
