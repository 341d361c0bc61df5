"""Numerical certificates for the uncertainty inequalities.

Two families are certified:

* dispersion bounds: the product of the spatial and spectral dispersions of
  f dominates ||f||^2 with constant 2/(2|a|+n), and the multiplier-operator
  variant replaces the spatial factor by a scale-space norm of the operator
  family (requires an admissible symbol);
* concentration bounds: if f keeps all but an epsilon of its energy on E and
  the operator family all but a delta on S, the size product
  ||m||_1 mu(E)^(1/2) (iint_S sigma^-2(2|a|+n) dOmega)^(1/2) is at least
  1 - (epsilon + delta).

Inequalities are certified with slack tolerance -1e-6 * lhs: they hold
exactly in the continuum, so only quadrature noise can push the slack
slightly negative.  Certificates serialize to JSON (schema 1).
"""

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import DomainError, NotAdmissibleError
from .grids import (
    Box,
    Field,
    TensorGrid,
    box_mask,
    integrate,
    measure_of_set,
    norm,
    omega_norm,
)
from .multiplier import apply_scale_family, check_admissibility
from .transform import forward
from .translate import SpectralEvaluator

__all__ = [
    "HpwCertificate",
    "DsCertificate",
    "ScaleRegion",
    "hpw_transform",
    "hpw_multiplier",
    "hpw_general",
    "concentration_space",
    "concentration_scale",
    "donoho_stark_certificate",
    "scale_capped_bound",
]

PASS_TOLERANCE = 1e-6


@dataclass
class HpwCertificate:
    """One dispersion-inequality instance: pass iff slack >= -tol * lhs."""

    variant: str
    lhs: float
    rhs: float
    constant: float
    slack: float
    ratio: float
    passed: bool
    tolerance: float
    details: dict = dataclass_field(default_factory=dict)
    context: dict = dataclass_field(default_factory=dict)

    def to_json_dict(self):
        return {
            "schema": 1,
            "kind": "hpw",
            "variant": self.variant,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "constant": float(self.constant),
            "slack": float(self.slack),
            "ratio": float(self.ratio),
            "passed": bool(self.passed),
            "tolerance": float(self.tolerance),
            "details": self.details,
            "context": self.context,
        }


@dataclass
class DsCertificate:
    """One concentration-inequality instance."""

    m_l1: float
    mu_e: float
    s_weight: float
    lhs: float
    rhs: float
    epsilon: float
    delta: float
    passed: bool
    vacuous: bool
    unbounded: bool
    tolerance: float
    sigma_interval: tuple
    details: dict = dataclass_field(default_factory=dict)
    context: dict = dataclass_field(default_factory=dict)

    def to_json_dict(self):
        return {
            "schema": 1,
            "kind": "donoho-stark",
            "m_l1": float(self.m_l1),
            "mu_e": float(self.mu_e),
            "s_weight": float(self.s_weight),
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "epsilon": float(self.epsilon),
            "delta": float(self.delta),
            "passed": bool(self.passed),
            "vacuous": bool(self.vacuous),
            "unbounded": bool(self.unbounded),
            "tolerance": float(self.tolerance),
            "sigma_interval": [float(self.sigma_interval[0]), float(self.sigma_interval[1])],
            "details": self.details,
            "context": self.context,
        }


@dataclass(frozen=True)
class ScaleRegion:
    """A scale-space region: sigma interval times a spatial box or mask
    (None means the whole spatial domain)."""

    sigma_lo: float
    sigma_hi: float
    spatial: object = None

    def __post_init__(self):
        if not self.sigma_lo < self.sigma_hi:
            raise DomainError("scale region needs sigma_lo < sigma_hi")


def _grid_context(grid, scales=None):
    ctx = {
        "alpha": list(grid.alpha.orders),
        "grid_shape": list(grid.shape),
        "grid_radii": [ax.radius for ax in grid.axes],
        "rule": grid.axes[0].rule,
    }
    if scales is not None:
        ctx["sigma_range"] = [scales.sigma_min, scales.sigma_max]
        ctx["sigma_count"] = scales.count
    from . import __version__

    ctx["version"] = __version__
    return ctx


def _weighted_norm(field, power):
    """|| |x|^power f ||_2 on the field's grid."""
    r = field.grid.radius_values()
    return float(
        math.sqrt(
            max(
                integrate(
                    Field(field.grid, (r ** (2.0 * power)) * np.abs(field.values) ** 2)
                ),
                0.0,
            )
        )
    )


def _tail_fraction(field):
    """Share of the second-moment mass in the outer tenth of the radius."""
    grid = field.grid
    r = grid.radius_values()
    rmax = math.sqrt(sum(ax.radius**2 for ax in grid.axes))
    w = grid.point_weights() * r * r * np.abs(field.values) ** 2
    total = w.sum()
    if total == 0.0:
        return 0.0
    return float(w[r >= 0.9 * rmax].sum() / total)


def _default_rays(n):
    unit = np.ones(n) / math.sqrt(n)
    return [s * unit for s in (0.9, 1.0, 1.1)]


def hpw_transform(f, plan, tolerance=PASS_TOLERANCE):
    """Dispersion certificate in the transform pair (||f||^2 variant)."""
    lhs = norm(f, 2) ** 2
    if lhs == 0.0:
        raise DomainError("certificates need a nonzero field")
    fhat = forward(plan, f)
    spatial = _weighted_norm(f, 1.0)
    spectral = _weighted_norm(fhat, 1.0)
    constant = 2.0 / f.grid.alpha.homogeneity
    rhs = constant * spatial * spectral
    slack = rhs - lhs
    details = {
        "spatial_dispersion": spatial,
        "spectral_dispersion": spectral,
        "tail_fraction_f": _tail_fraction(f),
        "tail_fraction_transform": _tail_fraction(fhat),
    }
    details["tail_ok"] = (
        details["tail_fraction_f"] <= 1e-6
        and details["tail_fraction_transform"] <= 1e-6
    )
    return HpwCertificate(
        variant="transform-squared",
        lhs=lhs,
        rhs=rhs,
        constant=constant,
        slack=slack,
        ratio=rhs / lhs,
        passed=slack >= -tolerance * lhs,
        tolerance=tolerance,
        details=details,
        context=_grid_context(f.grid),
    )


def hpw_multiplier(
    f,
    m,
    scales,
    plan,
    rays=None,
    tolerance=PASS_TOLERANCE,
    admissibility_tol=1e-3,
):
    """Dispersion certificate for the operator family (bounds ||f||, not its
    square); refuses symbols that fail the admissibility check."""
    lhs = norm(f, 2)
    if lhs == 0.0:
        raise DomainError("certificates need a nonzero field")
    if rays is None:
        rays = _default_rays(f.grid.n)
    report = check_admissibility(m, scales, rays, tolerance=admissibility_tol)
    if not report.is_admissible:
        raise NotAdmissibleError(
            f"multiplier deviates from admissibility by {report.max_deviation:.3g}",
            report=report,
        )
    fhat = forward(plan, f)
    spectral = _weighted_norm(fhat, 1.0)
    family = apply_scale_family(f, m, scales, plan)
    r2 = f.grid.radius_values() ** 2
    scale_dispersion = omega_norm(family, spatial_weight=r2)
    constant = 2.0 / f.grid.alpha.homogeneity
    rhs = constant * spectral * scale_dispersion
    slack = rhs - lhs
    return HpwCertificate(
        variant="multiplier",
        lhs=lhs,
        rhs=rhs,
        constant=constant,
        slack=slack,
        ratio=rhs / lhs,
        passed=slack >= -tolerance * lhs,
        tolerance=tolerance,
        details={
            "spectral_dispersion": spectral,
            "scale_dispersion": scale_dispersion,
            "admissibility": report.to_json_dict(),
        },
        context=_grid_context(f.grid, scales),
    )


def hpw_general(
    f,
    m,
    a,
    b,
    scales,
    plan,
    rays=None,
    tolerance=PASS_TOLERANCE,
    admissibility_tol=1e-3,
):
    """Power-weighted dispersion certificate with exponents a, b >= 1.

    The interpolation parameter solves a e = (1 - e) b, i.e. e = b/(a+b).
    The displayed product bounds ||f||^(1-ae); the certificate reports the
    equivalent bound on ||f|| (exponent 1/(1-ae)), which at a = b = 1
    coincides exactly with the plain multiplier certificate.  For
    a b >= a + b the displayed bound carries no power of ||f|| and cannot be
    normalized; that part of the parameter range is refused.
    """
    a = float(a)
    b = float(b)
    if a < 1 or b < 1:
        raise DomainError("exponents must satisfy a, b >= 1")
    eps = b / (a + b)
    ae = a * eps
    if ae >= 1.0:
        raise DomainError(
            "a*b >= a+b leaves no power of ||f|| in the displayed bound; "
            "choose exponents with 1/a + 1/b > 1"
        )
    lhs = norm(f, 2)
    if lhs == 0.0:
        raise DomainError("certificates need a nonzero field")
    if rays is None:
        rays = _default_rays(f.grid.n)
    report = check_admissibility(m, scales, rays, tolerance=admissibility_tol)
    if not report.is_admissible:
        raise NotAdmissibleError(
            f"multiplier deviates from admissibility by {report.max_deviation:.3g}",
            report=report,
        )
    fhat = forward(plan, f)
    spectral = _weighted_norm(fhat, b)
    family = apply_scale_family(f, m, scales, plan)
    r2a = f.grid.radius_values() ** (2.0 * a)
    scale_dispersion = omega_norm(family, spatial_weight=r2a)
    constant = 2.0 / f.grid.alpha.homogeneity
    display = constant**ae * scale_dispersion**eps * spectral ** (1.0 - eps)
    rhs = display ** (1.0 / (1.0 - ae))
    slack = rhs - lhs
    return HpwCertificate(
        variant="general",
        lhs=lhs,
        rhs=rhs,
        constant=constant,
        slack=slack,
        ratio=rhs / lhs,
        passed=slack >= -tolerance * lhs,
        tolerance=tolerance,
        details={
            "a": a,
            "b": b,
            "epsilon": eps,
            "a_epsilon": ae,
            "display_rhs": display,
            "spectral_dispersion": spectral,
            "scale_dispersion": scale_dispersion,
            "admissibility": report.to_json_dict(),
        },
        context=_grid_context(f.grid, scales),
    )


def concentration_space(f, region, grid=None):
    """Measured spatial concentration defect epsilon = ||f - X_E f|| / ||f||.

    ``f`` is a Field or a vectorized callable (then ``grid`` is required).
    Boxes are integrated on a fresh quadrature of the box itself (callables
    evaluated directly, fields synthesized spectrally), so the cut does not
    snap to grid nodes; masks restrict the node sum, with node-resolution
    accuracy.
    """
    if isinstance(f, Field):
        grid = f.grid
    elif grid is None:
        raise DomainError("callable concentration needs an explicit grid")

    if isinstance(region, np.ndarray):
        if not isinstance(f, Field):
            f = Field.from_function(grid, f)
        w = grid.point_weights()
        sq = np.abs(f.values) ** 2
        total = float((w * sq).sum())
        if total == 0.0:
            raise DomainError("concentration of the zero field is undefined")
        mask = np.asarray(region, dtype=bool).ravel()
        outside = float((w * sq)[~mask].sum())
        return float(math.sqrt(min(max(outside / total, 0.0), 1.0)))

    box = Box.of(region)
    if len(box.uppers) != grid.n:
        raise DomainError("box dimension does not match grid")
    if isinstance(f, Field):
        total = norm(f, 2) ** 2
        if total == 0.0:
            raise DomainError("concentration of the zero field is undefined")
        if all(u >= ax.radius for u, ax in zip(box.uppers, grid.axes)):
            return 0.0
        if any(u == 0.0 for u in box.uppers):
            inside = 0.0
        else:
            sub = TensorGrid.build(
                grid.alpha,
                [min(u, ax.radius) for u, ax in zip(box.uppers, grid.axes)],
                grid.shape,
                grid.axes[0].rule,
            )
            synth = SpectralEvaluator(f)
            vals = synth.on_axes(list(sub.node_axes()), clip=False)
            inside = integrate(Field(sub, np.abs(vals.ravel()) ** 2))
    else:
        full = Field.from_function(grid, lambda *cs: np.abs(f(*cs)) ** 2)
        total = integrate(full)
        if total == 0.0:
            raise DomainError("concentration of the zero field is undefined")
        if any(u == 0.0 for u in box.uppers):
            inside = 0.0
        else:
            sub = TensorGrid.build(
                grid.alpha,
                [min(u, ax.radius) for u, ax in zip(box.uppers, grid.axes)],
                grid.shape,
                grid.axes[0].rule,
            )
            inside = integrate(
                Field.from_function(sub, lambda *cs: np.abs(f(*cs)) ** 2)
            )
    frac = min(max(float(np.real(inside)) / float(np.real(total)), 0.0), 1.0)
    return float(math.sqrt(1.0 - frac))


def concentration_scale(scale_field, region):
    """Measured scale-space concentration defect delta of an operator family.

    The sigma interval snaps to the log-grid cell edges (midpoint cells are
    the atoms of the discrete scale measure); the spatial part is a box
    (node-snapped mask) or an explicit mask.
    """
    total = omega_norm(scale_field) ** 2
    if total == 0.0:
        raise DomainError("concentration of a zero family is undefined")
    sc = scale_field.scales
    _, _, sigma_mask = sc.snap_interval(region.sigma_lo, region.sigma_hi)
    spatial_mask = _spatial_mask(scale_field.grid, region.spatial)
    inside = (
        omega_norm(scale_field, sigma_mask=sigma_mask, spatial_mask=spatial_mask) ** 2
    )
    frac = min(max(inside / total, 0.0), 1.0)
    return float(math.sqrt(1.0 - frac))


def _spatial_mask(grid, spatial):
    if spatial is None:
        return None
    if isinstance(spatial, np.ndarray):
        return np.asarray(spatial, dtype=bool).ravel()
    return box_mask(grid, Box.of(spatial))


def _spatial_measure(grid, spatial):
    if spatial is None:
        return measure_of_set(grid, Box(tuple(ax.radius for ax in grid.axes)))
    if isinstance(spatial, np.ndarray):
        return measure_of_set(grid, spatial)
    return measure_of_set(grid, Box.of(spatial))


def _multiplier_l1(m, grid):
    return norm(Field(grid, np.abs(m.evaluate(grid, 1.0))), 1)


def donoho_stark_certificate(
    f,
    m,
    region_e,
    region_s,
    scales,
    plan,
    f_exact=None,
    rays=None,
    tolerance=PASS_TOLERANCE,
    admissibility_tol=1e-3,
):
    """Concentration certificate: measures epsilon and delta, assembles the
    size product, and checks it dominates 1 - (epsilon + delta).

    ``f_exact`` optionally supplies the closed form behind the sampled f for
    box-accurate epsilon.  A sigma interval touching 0 makes the size product
    diverge; the certificate then passes trivially and is flagged unbounded.
    """
    if not {"L1", "L2"} <= set(m.memberships):
        raise DomainError("the concentration bound needs m claimed in L1 and L2")
    grid = plan.input_grid
    if rays is None:
        rays = _default_rays(grid.n)
    report = check_admissibility(m, scales, rays, tolerance=admissibility_tol)
    if not report.is_admissible:
        raise NotAdmissibleError(
            f"multiplier deviates from admissibility by {report.max_deviation:.3g}",
            report=report,
        )
    homogeneity = grid.alpha.homogeneity
    family = apply_scale_family(f, m, scales, plan)

    epsilon = concentration_space(f_exact if f_exact is not None else f, region_e, grid=grid)

    unbounded = region_s.sigma_lo <= 0.0
    if unbounded:
        lo_eff, hi_eff = 0.0, min(region_s.sigma_hi, scales.sigma_max)
        region_eff = ScaleRegion(scales.sigma_min, hi_eff, region_s.spatial)
        sigma_part = math.inf
    else:
        lo_eff, hi_eff, _ = scales.snap_interval(region_s.sigma_lo, region_s.sigma_hi)
        region_eff = ScaleRegion(lo_eff, hi_eff, region_s.spatial)
        sigma_part = (lo_eff ** (-2.0 * homogeneity) - hi_eff ** (-2.0 * homogeneity)) / (
            2.0 * homogeneity
        )
    delta = concentration_scale(family, region_eff)

    m_l1 = _multiplier_l1(m, plan.output_grid)
    mu_e = measure_of_set(grid, region_e)
    s_weight = sigma_part * _spatial_measure(grid, region_s.spatial)
    lhs = m_l1 * math.sqrt(mu_e) * math.sqrt(s_weight) if mu_e > 0 else 0.0
    if unbounded and mu_e > 0:
        lhs = math.inf
    rhs = 1.0 - (epsilon + delta)
    vacuous = rhs <= 0.0
    passed = bool(vacuous or unbounded or lhs >= rhs - tolerance)
    return DsCertificate(
        m_l1=m_l1,
        mu_e=mu_e,
        s_weight=s_weight,
        lhs=lhs,
        rhs=rhs,
        epsilon=epsilon,
        delta=delta,
        passed=passed,
        vacuous=vacuous,
        unbounded=unbounded,
        tolerance=tolerance,
        sigma_interval=(lo_eff, hi_eff),
        details={"admissibility": report.to_json_dict()},
        context=_grid_context(grid, scales),
    )


def scale_capped_bound(m, region_e, region_s, xi, grid, scales):
    """Coarser size bound for regions bounded away from scale 0.

    With rho = 1/sigma_lo the bound rho^(2|a|+n) ||m||_1 mu(E)^(1/2)
    Omega(S)^(1/2) dominates the certificate's size product on the same
    region (the inverse-scale weight is majorized by its sup).
    """
    xi = float(xi)
    if xi <= 0:
        raise DomainError("the scale floor xi must be positive")
    if xi > scales.sigma_max:
        raise DomainError("xi exceeds the scale range: the region is empty")
    if region_s.sigma_lo < xi:
        raise DomainError("the region must stay above the scale floor xi")
    lo_eff, hi_eff, _ = scales.snap_interval(region_s.sigma_lo, region_s.sigma_hi)
    if not lo_eff < hi_eff:
        raise DomainError("the snapped scale region is empty")
    rho = 1.0 / lo_eff
    omega_s = math.log(hi_eff / lo_eff) * _spatial_measure(grid, region_s.spatial)
    m_l1 = _multiplier_l1(m, grid)
    mu_e = measure_of_set(grid, region_e)
    return float(
        rho ** grid.alpha.homogeneity * m_l1 * math.sqrt(mu_e) * math.sqrt(omega_s)
    )
