"""Discrepancy ledger: printed reference formulas versus computed replacements.

Each entry carries the printed expression, the replacement this package
computes, a short anchor phrase locating the printed formula, and a live
numeric check so the record is regenerated rather than asserted.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import sympy as sp

from .oscillator import OscillatorParams, green_mode_sum, green_quadrature, laguerre_eval, wigner_mode
from .phasepoly import PhasePolynomial, moyal_bracket
from .potentials import PotentialSpec
from .starexp import ALPHA, P, SIGMA, VDER, f2_g2_truncated, generic_gcal

__all__ = ["LedgerEntry", "printed_gcal2", "printed_gcal4", "compare_gcal4", "build_ledger", "ledger_json"]

V1, V2, V3, V4 = VDER[1:5]


@dataclass
class LedgerEntry:
    formula_id: str
    paper_expr: str
    computed_expr: str
    location_quote: str
    status: str  # "discrepancy" | "agrees" | "not_implementable"
    first_differing_order: str | None = None
    note: str = ""
    check: dict = field(default_factory=dict)


def printed_gcal2() -> sp.Expr:
    """Printed G_2 with its extra e^{-f sigma} factor dropped."""
    return sp.Rational(1, 8) * ALPHA * SIGMA**2 * V2 - sp.Rational(1, 12) * ALPHA * SIGMA**3 * (V1**2 + 2 * ALPHA * P**2 * V2)


def printed_gcal4() -> sp.Expr:
    a, s, p = ALPHA, SIGMA, P
    return sp.expand(
        sp.Rational(1, 480) * a**2 * s**3 * V4 * (5 - 15 * a * p**2 * s + 4 * a**2 * p**4 * s**2)
        - sp.Rational(1, 288) * a**2 * s**6 * (V1**2 + 2 * a * p**2 * V2) ** 2
        + sp.Rational(1, 240) * a**2 * s**5 * (9 * V1**2 * V2 + 18 * a * p**2 * V2 + 4 * a * p**2 * V1 * V3)
        + sp.Rational(1, 48) * a**2 * s**3 * V4
        - sp.Rational(1, 96) * a**2 * s**2 * (5 * V2**2 + 4 * V1 * V3 + a * p**2 * V4)
    )


def _monomials(expr) -> dict:
    gens = (ALPHA, P, SIGMA, V1, V2, V3, V4)
    return {m: c for m, c in sp.Poly(sp.expand(expr), *gens).terms()}


def _mono_text(m) -> str:
    names = ("alpha", "p", "sigma", "v1", "v2", "v3", "v4")
    parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, m) if e]
    return " ".join(parts) or "1"


def _first_sigma_order(diff_terms) -> str | None:
    orders = sorted({m[2] for m in diff_terms})
    return f"sigma^{orders[0]}" if orders else None


def compare_gcal4() -> dict:
    """Term-by-term comparison of the printed G_4 with the recursion output."""
    comp = _monomials(generic_gcal(4))
    printed = _monomials(printed_gcal4())
    rows, differing = [], []
    for m in sorted(set(comp) | set(printed), key=lambda m: (m[2], m)):
        c, pr = comp.get(m, 0), printed.get(m, 0)
        ok = sp.simplify(c - pr) == 0
        rows.append({"monomial": _mono_text(m), "computed": str(c), "printed": str(pr), "match": bool(ok)})
        if not ok:
            differing.append(m)
    return {
        "n_terms": len(rows),
        "n_matching": sum(r["match"] for r in rows),
        "first_differing_order": _first_sigma_order(differing),
        "terms": rows,
    }


def _gcal2_entry() -> LedgerEntry:
    comp = generic_gcal(2)
    diff = _monomials(comp - printed_gcal2())
    return LedgerEntry(
        "gcal2_coefficients",
        "(1/8 alpha sigma^2 v'' - 1/12 alpha sigma^3 (v'^2 + 2 alpha p^2 v'')) e^{-f sigma}",
        str(comp),
        "which for the chosen $f$ can be integrated quite readily to give",
        "discrepancy",
        _first_sigma_order(diff),
        "printed coefficients +1/8, -1/12 and the extra e^{-f sigma} factor disagree with the recursion; "
        "the computed form is confirmed by the hbar^2 Taylor coefficient of the oscillator closed form",
        {"differing_monomials": [_mono_text(m) for m in diff]},
    )


def _f2g2_entry() -> LedgerEntry:
    F, G = f2_g2_truncated(1.0, 60)
    return LedgerEntry(
        "f2_g2_closed_forms",
        "F2 = (1/2) sum_{n>=2} f^{n-2} / (n (n-3)!),  G2 = (1/6) sum_{n>=2} (5n-9) f^{n-3} / (n (n-3)!)",
        "F2 = e^f / 2,  G2 = e^f / 3",
        "The functions $F_2,G_2$ turn out to be",
        "discrepancy",
        "n = 2 term",
        "the printed closed forms need (-1)! at n = 2; summing the double-sum definitions gives e^f/2 and e^f/3",
        {"F2_at_1": F, "e_over_2": math.e / 2, "G2_at_1": G, "e_over_3": math.e / 3},
    )


def _eps2_weight_entry() -> LedgerEntry:
    return LedgerEntry(
        "eps2_general_weight",
        "E2 = -(1/8) omega_2(f,f) F2 - (1/2) omega2_tilde(f,f) G2",
        "E2 = -(1/8) (omega_2(f,f) F2 + omega2_tilde(f,f) G2)",
        "From this it follows that we can write",
        "discrepancy",
        "hbar^2",
        "the weight 1/8 on the omega2_tilde term is the one that reproduces the specialised alpha p^2 + v displays",
    )


def _wigner_entry() -> LedgerEntry:
    p = OscillatorParams()
    # m = omega = hbar = 1: x = 2 (q^2 + p^2), so dq dp = (pi / 2) dx
    integrals = {}
    for n in (0, 1, 2, 3):
        xs = np.linspace(0, 200, 40001)
        w = np.array([wigner_mode(n, math.sqrt(x / 2), 0.0, p, with_factorial=True) for x in xs])
        integrals[n] = float(np.trapezoid(w, xs) * math.pi / 2)
    return LedgerEntry(
        "wigner_mode_normalization",
        "W_n = (-1)^n / (hbar pi n!) e^{-x/2} L_n(x)",
        "W_n = (-1)^n / (hbar pi) e^{-x/2} L_n(x)",
        "is the Wigner function for the harmonic oscillator",
        "discrepancy",
        "n = 2",
        "with the 1/n! the phase-space integral is 1/n!, not 1; the numeric Weyl transform of |n><n| agrees with the corrected form",
        {"integral_with_factorial": integrals},
    )


def _generating_entry() -> LedgerEntry:
    t, x = 0.3, 1.0
    lhs = math.exp(-x * t / (1 - t)) / (1 - t)
    with_fact = math.fsum(t**n * laguerre_eval(n, x) / math.factorial(n) for n in range(80))
    without = math.fsum(t**n * laguerre_eval(n, x) for n in range(200))
    return LedgerEntry(
        "laguerre_generating_function",
        "e^{-xt/(1-t)} / (1-t) = sum_n t^n L_n(x) / n!",
        "e^{-xt/(1-t)} / (1-t) = sum_n t^n L_n(x)",
        "The generating function for the Laguerre polynomials is",
        "discrepancy",
        "t^2",
        "evaluated at t = 0.3, x = 1",
        {"closed_form": lhs, "sum_with_factorial": with_fact, "sum_without_factorial": without},
    )


def _green_mode_entry() -> LedgerEntry:
    printed = green_mode_sum(0.0, 0.0, OscillatorParams(), N=60, paper_variant=True).value
    return LedgerEntry(
        "green_mode_sum_factorial",
        "G = sum_n (-1)^n e^{-x/2} L_n(x) / (pi hbar^2 omega (n + 1/2) n!)",
        "G = sum_n 2 (-1)^n e^{-x/2} L_n(x) / (hbar omega (n + 1/2))",
        "can be written as a mode sum",
        "discrepancy",
        "n = 2",
        "the printed sum inherits the 1/n! of the Wigner display; at the origin it does not reach pi/(hbar omega)",
        {"printed_at_origin": printed, "quadrature_at_origin": green_quadrature(0.0)},
    )


def _a2_entry() -> LedgerEntry:
    m = sp.Symbol("m", positive=True)
    v = sp.Symbol("v")
    comp = sp.sqrt(2 * sp.pi * m) * v**2 / 2
    return LedgerEntry(
        "sdw_a2_prefactor",
        "a_2 = (pi m / 2) v^2",
        str(comp),
        "For an arbitrary potential in one dimension we would get",
        "discrepancy",
        "sigma^{3/2}",
        "a_n = sqrt(2 pi m) (-v)^n / n!; the printed a_2 prefactor is inconsistent with the printed a_0 and a_1",
    )


def _harmonic_an_entry() -> LedgerEntry:
    m, w, q = sp.symbols("m omega q", positive=True)
    v = m * w**2 * q**2 / 2
    a1 = -sp.sqrt(2 * sp.pi * m) * v
    a2 = sp.sqrt(2 * sp.pi * m) * v**2 / 2
    return LedgerEntry(
        "sdw_harmonic_a1_a2",
        "a_1 = -pi m^2 omega q^2,  a_2 = (1/4) pi m^3 omega^2 q^4",
        f"a_1 = {sp.simplify(a1)},  a_2 = {sp.simplify(a2)}",
        "harmonic oscillator we then arrive at the relations",
        "discrepancy",
        "sigma^{1/2}",
        "obtained by substituting v = m omega^2 q^2 / 2 into the general a_n",
    )


def _delta2_entry() -> LedgerEntry:
    return LedgerEntry(
        "delta2_a2_sign",
        "delta2 a_2 = (1/6) sqrt(alpha pi) v''",
        "delta2 a_2 = -(1/6) sqrt(alpha pi) v''",
        "to the Schwinger-DeWitt coefficients",
        "discrepancy",
        "sigma^{3/2}",
        "at alpha = 1 and standard normalization this reproduces the classical a_2 density v^2/2 - v''/6",
    )


def _eps2_int_entry() -> LedgerEntry:
    return LedgerEntry(
        "eps2_momentum_integral_sign",
        "int E2 dp = (1/12) sqrt(alpha pi) sigma^{3/2} e^{-sigma v} (2 v'' - sigma v'^2)",
        "int E2 dp = -(1/12) sqrt(alpha pi) sigma^{3/2} e^{-sigma v} (2 v'' - sigma v'^2)",
        "we can readily compute the momentum integral",
        "discrepancy",
        "sigma^{3/2}",
        "exact Gaussian moments of the recursion G_2",
    )


def _eps2_final_entry() -> LedgerEntry:
    return LedgerEntry(
        "eps2_final_display",
        "E2 = (1/12) e^{-v sigma} sqrt(alpha pi) sigma^{3/2} (2 v'' - sigma v'^2)",
        "int E2 dp = -(1/12) sqrt(alpha pi) sigma^{3/2} e^{-v sigma} (2 v'' - sigma v'^2); "
        "pointwise E2 = e^{-H sigma} G_2",
        "leading finally to",
        "discrepancy",
        "sigma^{3/2}",
        "the display carries the momentum-integration factor sqrt(alpha pi) sigma^{3/2}; read as the integrated density",
    )


def _moyal_entry() -> LedgerEntry:
    q, p = PhasePolynomial.q(), PhasePolynomial.p()
    f, g = q**3, p**3
    br = moyal_bracket(f, g)
    return LedgerEntry(
        "moyal_bracket_display",
        "[f,g]_M = i sum_n (-1)^n (2n+1)! 4^{-n} hbar^{2n+1} omega_{2n+1}(f,g)",
        "[f,g]_M = i sum_n (-1)^n hbar^{2n+1} omega_{2n+1}(f,g) / ((2n+1)! 4^n)",
        "leading to the standard Moyal bracket",
        "discrepancy",
        "hbar^3",
        "the factorial must divide; checked on [q^3, p^3]",
        {"q3_p3_bracket": br.to_text()},
    )


def _green_sign_entry() -> LedgerEntry:
    return LedgerEntry(
        "green_sign",
        "G = H^{-1} = -int_0^inf e^{-H sigma} d sigma",
        "G = H^{-1} = int_0^inf e^{-H sigma} d sigma",
        "interpretation of the integral of the star exponential",
        "discrepancy",
        None,
        "for a positive spectrum the sigma-integral is +H^{-1}; the later display already uses the plus sign",
    )


def _trace_entry() -> LedgerEntry:
    return LedgerEntry(
        "trace_normalization",
        "Tr A = int A_W(q,p) dq dp",
        "Tr A = (2 pi hbar)^{-1} int A_W(q,p) dq dp",
        "point of contact with the Wigner-Weyl-Moyal formalism",
        "discrepancy",
        None,
        "with the symbol of the identity equal to 1 the trace needs 1/(2 pi hbar); "
        "the 'paper' normalization toggle reproduces the printed rule",
    )


def _wigner_hbar_entry() -> LedgerEntry:
    return LedgerEntry(
        "wigner_formula_hbar",
        "W(q,p) = (2 pi)^{-n} int e^{-iyp} <q + y/2|rho|q - y/2> dy",
        "W(q,p) = (2 pi hbar)^{-1} int e^{-iyp/hbar} <q + y/2|rho|q - y/2> dy",
        "the standard formula for the Wigner function",
        "discrepancy",
        None,
        "the display sets hbar = 1 while later formulas keep hbar explicit",
    )


def _harmonic_eps2_entry() -> LedgerEntry:
    return LedgerEntry(
        "harmonic_eps2_frequency",
        "v = (1/2) m omega q^2;  E2 = -(1/4) omega F2 - (1/8) (omega p^2 / m + m omega^2 q^2) G2",
        "v = (1/2) m omega^2 q^2;  E2 = -(1/4) omega^2 F2 - (1/8) (omega^2 p^2 / m + m omega^4 q^2) G2",
        "For $k=2$, the harmonic oscillator",
        "discrepancy",
        "hbar^2",
        "the printed form follows from the general alpha p^2 + v display with omega in place of omega^2; "
        "the later oscillator display uses omega^2",
    )


def _family_entry(fid, quote, printed_text, printed_fn, v: PotentialSpec) -> LedgerEntry:
    """Printed Coulomb/Yukawa E2 against the general alpha p^2 + v display."""
    m = float(v.mass)
    a = float(v.alpha)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        q, p = rng.uniform(0.3, 3.0), rng.uniform(-2, 2)
        v1, v2 = v.derivative(1, q), v.derivative(2, q)
        general = (-0.5 * a * v2, -0.25 * (2 * a * a * v2 * p * p + a * v1 * v1))
        pr = printed_fn(q, p, m)
        worst = max(worst, abs(general[0] - pr[0]), abs(general[1] - pr[1]))
    return LedgerEntry(fid, printed_text, "E2 = -(1/2) alpha v'' F2 - (1/4)(2 alpha^2 v'' p^2 + alpha v'^2) G2",
                       quote, "agrees" if worst < 1e-12 else "discrepancy", None,
                       "F2 and G2 coefficients compared at 20 random points", {"max_abs_difference": worst})


def _coulomb_printed(z):
    def fn(q, p, m):
        return (-z / (2 * m) * q**-3, -1 / (4 * m * m) * (z * q**-3 * p * p + m / 2 * z * z * q**-4))
    return fn


def _yukawa_printed(z, mu):
    def fn(q, p, m):
        e = math.exp(-mu * q)
        F = -z / (2 * m) * e * (q**-3 + mu * q**-2 + 0.5 * mu * mu / q)
        G = -z / (8 * m * m * q**4) * e * e * (2 * p * p * (q + mu * q * q + 0.5 * mu * mu * q**3) / e
                                                 + m * z * (1 + 2 * mu * q + mu * mu * q * q))
        return F, G
    return fn


def _gcal4_entry() -> LedgerEntry:
    cmp = compare_gcal4()
    return LedgerEntry(
        "gcal4_printed",
        str(printed_gcal4()),
        str(generic_gcal(4)),
        "Straightforward computations yield",
        "discrepancy" if cmp["n_matching"] < cmp["n_terms"] else "agrees",
        cmp["first_differing_order"],
        "term-by-term comparison; the printed '18 alpha p^2 v''' term lacks v' factors",
        {"n_terms": cmp["n_terms"], "n_matching": cmp["n_matching"],
         "mismatches": [r for r in cmp["terms"] if not r["match"]]},
    )


def _static_entries() -> list[LedgerEntry]:
    return [
        LedgerEntry(
            "off_diagonal_ansatz",
            "G_H(q,q';sigma) = sum_n e^{-(q-q')^2/(4 sigma)} a_n(q,q') sigma^{n-d/2}",
            "exponent -(q-q')^2/(4 alpha sigma)",
            "Schwinger-DeWitt asymptotic expansion of the heat kernel",
            "discrepancy", None,
            "only diagonal quantities are computed, so nothing here depends on the choice"),
        LedgerEntry(
            "laguerre_limit_expression",
            "L(x) = lim_{t->-1} t^{-3/2} int t^{1/2} e^{-xt/(1-t)} / (1-t) dt",
            "G = (2/hbar omega) e^{-x/2} int_0^1 t^{-1/2} (1+t)^{-1} e^{xt/(1+t)} dt",
            "we can find a closed formula for this sum",
            "not_implementable", None,
            "indefinite integral with a complex t^{1/2} at t -> -1; realised as a convergent real integral"),
    ]


def build_ledger() -> list[LedgerEntry]:
    entries = [
        _gcal2_entry(),
        _f2g2_entry(),
        _eps2_weight_entry(),
        _wigner_entry(),
        _generating_entry(),
        _green_mode_entry(),
        _a2_entry(),
        _harmonic_an_entry(),
        _delta2_entry(),
        _eps2_int_entry(),
        _eps2_final_entry(),
        _moyal_entry(),
        _green_sign_entry(),
        _trace_entry(),
        _wigner_hbar_entry(),
        _harmonic_eps2_entry(),
        _family_entry("coulomb_eps2", "corresponding to the Coulomb",
                      "E2 = -(1/2m) z q^{-3} F2 - (1/4m^2)(z q^{-3} p^2 + (m/2) z^2 q^{-4}) G2", _coulomb_printed(1.0),
                      PotentialSpec.coulomb(1.0)),
        _family_entry("yukawa_eps2", "A Yukawa-like potential",
                      "E2 = -(z/2m) e^{-mu q}(q^{-3} + mu q^{-2} + mu^2 q^{-1}/2) F2 - (z/(8 m^2 q^4)) e^{-2 mu q}"
                      "(2 p^2 (q + mu q^2 + mu^2 q^3/2) e^{mu q} + m z (1 + 2 mu q + mu^2 q^2)) G2", _yukawa_printed(1.0, 0.7),
                      PotentialSpec.yukawa(1.0, 0.7)),
        _gcal4_entry(),
    ]
    return entries + _static_entries()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def ledger_json(entries: list[LedgerEntry] | None = None) -> str:
    entries = build_ledger() if entries is None else entries
    doc = {
        "entries": [_jsonable(asdict(e)) for e in entries],
        "n_discrepancies": sum(e.status == "discrepancy" for e in entries),
    }
    return json.dumps(doc, indent=2, sort_keys=True)
