"""One suite per command: compute, compare with tolerances, return checks and CSV rows."""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, Field

from .. import bem, spectral, symbols
from ..clifford import algebra_residuals, alpha_dot
from ..geometry import SurfaceMesh, ball_grid, chart_graph_mesh, mesh_from_file, sphere_mesh
from ..geometry.charts import Chart
from ..kernels import KernelParams
from ..shared.errors import CapabilityError, UsageError
from ..shared.models import CheckResult, Command, MeshKind, OperatorLabel, ResolventKind, RunConfig, Side
from ..spectral.decay import TREND_NAMES
from ..spectral.rates import PS_SOURCE_ORDER

logger = logging.getLogger(__name__)

# Configuration
ALGEBRA_TOLERANCE = 1e-13
CAUCHY_SQUARE_TOLERANCE = 5e-3
ADJOINT_TOLERANCE = 1e-8
LAMBDA_SQUARE_TOLERANCE = 1e-2
JUMP_TOLERANCE = 2e-2
RANGE_TOLERANCE = 1e-10
LU_TOLERANCE = 1e-8
EIGEN_TOLERANCE = 1e-12
TRANSPORT_TOLERANCE = (1e-12, 1e-8)
FLAT_B10_TOLERANCE = 1e-10
HALFSPACE_TOLERANCE = 1e-12
SYMBOL_SLOPE = -0.8
ORACLE_MATCH = 5e-3
RATE_BAND = (-1.15, -0.85)
DECAY_BAND = 0.15
DECAY_SLOPES = {
    "ps_exterior_h1": -1.0,
    "exterior_resolvent": -1.0,
    "exterior_trace": -0.5,
    "extension": -0.5,
    "extension_h_half": -1.0,
}
MIT_BOUND_SLACK = 1.2
STABILITY_BAND = 0.1
MU_REAL_TOLERANCE = 1e-8
MU_DEGENERACY_TOLERANCE = 1e-6
DEFAULT_WINDOW = (1.0, 2.5)
DEFAULT_STEP_COUPLING = 200.0
DEFAULT_RESOLVENT_COUPLINGS = [10.0, 20.0, 40.0, 80.0]
DEFAULT_EIGEN_COUPLINGS = [50.0, 100.0, 200.0]
BALL_RADIAL_POINTS = 12
PARAMETRIX_SAMPLES = 20
HALFSPACE_SAMPLES = 100


class Table(BaseModel):
    name: str
    header: List[str]
    rows: List[Tuple] = Field(default_factory=list)


class SuiteResult(BaseModel):
    checks: List[CheckResult] = Field(default_factory=list)
    values: Dict[str, float] = Field(default_factory=dict)
    tables: List[Table] = Field(default_factory=list)


def build_mesh(config: RunConfig) -> SurfaceMesh:
    spec = config.mesh
    if spec.kind == MeshKind.SPHERE:
        return sphere_mesh(spec.R, spec.order)
    if spec.kind == MeshKind.CHART:
        if spec.order & (spec.order - 1):
            raise UsageError(f"order: chart-graph meshes need a power-of-two grid, got {spec.order}")
        return chart_graph_mesh(Chart.flat(), 2.0 * np.pi * spec.R, spec.order)
    return mesh_from_file(spec.path)


def _check_table(result: SuiteResult, name: str) -> SuiteResult:
    result.tables.append(Table(name=name, header=["name", "value", "tolerance", "passed"],
                               rows=[(c.name, c.value, c.tolerance, int(c.passed)) for c in result.checks]))
    return result


def check_identities(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    rng = np.random.default_rng(config.seed)
    result = SuiteResult()
    for name, value in algebra_residuals(rng).items():
        result.checks.append(CheckResult.upper_bound(name, value, ALGEBRA_TOLERANCE))
    p = KernelParams(m=config.m, z=config.spectral_parameter)
    residual, constant = bem.cauchy_square_residual(mesh, p, config.threads)
    result.values["cauchy_square_constant"] = constant
    result.checks.append(CheckResult.upper_bound("cauchy_square", residual, CAUCHY_SQUARE_TOLERANCE,
                                                 f"measured constant {constant:.6f}"))
    result.checks.append(CheckResult.upper_bound(
        "cauchy_adjoint", bem.cauchy_adjoint_residual(mesh, config.m, p.z, config.threads), ADJOINT_TOLERANCE))
    result.checks.append(CheckResult.upper_bound(
        "lambda_square", bem.lambda_square_residual(mesh, p, rng, threads=config.threads), LAMBDA_SQUARE_TOLERANCE))
    for side, value in bem.jump_residuals(mesh, p, rng, threads=config.threads).items():
        result.checks.append(CheckResult.upper_bound(f"jump_{side}", value, JUMP_TOLERANCE))
    interior = bem.ps_interior(mesh, p, config.threads)
    exterior = bem.ps_exterior(mesh, config.m, p.z, config.threads)
    minus, plus = spectral.range_projector(mesh, -1), spectral.range_projector(mesh, +1)
    result.checks.append(CheckResult.upper_bound(
        "ps_interior_range", max(minus.compose(interior).norm(), interior.compose(plus).norm()), RANGE_TOLERANCE))
    result.checks.append(CheckResult.upper_bound(
        "ps_exterior_range", max(plus.compose(exterior).norm(), exterior.compose(minus).norm()), RANGE_TOLERANCE))
    worst = 0.0
    chart = Chart.polynomial([[0.0, 0.1, 0.05], [0.2, -0.1, 0.0], [0.15, 0.0, 0.0]])
    for y, xi in zip(rng.uniform(-1, 1, (PARAMETRIX_SAMPLES, 2)), rng.normal(0, 5, (PARAMETRIX_SAMPLES, 2))):
        worst = max(worst, max(symbols.eigen_residuals(symbols.l0_eigendecomp(chart, y, xi)).values()))
    result.checks.append(CheckResult.upper_bound("l0_eigen_structure", worst, EIGEN_TOLERANCE))
    return _check_table(result, "identities")


def assemble(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    p = KernelParams(m=config.m, z=config.spectral_parameter)
    builders: Dict[OperatorLabel, Callable] = {
        OperatorLabel.CAUCHY: lambda: bem.assemble_cauchy(mesh, p, config.threads),
        OperatorLabel.LAMBDA: lambda: bem.assemble_lambda(mesh, p, config.threads),
        OperatorLabel.SINGLE_LAYER: lambda: bem.assemble_single_layer(mesh, p, config.threads),
        OperatorLabel.PS_INTERIOR: lambda: bem.ps_interior(mesh, p, config.threads),
        OperatorLabel.PS_EXTERIOR: lambda: bem.ps_exterior(mesh, config.m + (config.M or 0.0), p.z, config.threads),
    }
    if config.label not in builders:
        raise UsageError(f"label: cannot assemble a {config.label.value} operator")
    op = builders[config.label]()
    path = Path(config.output) / f"{config.label.value}.sdop"
    bem.dump_operator(op, path)
    result = SuiteResult(values={"nodes": float(mesh.size), "norm": op.norm()})
    if config.label == OperatorLabel.LAMBDA:
        inverse = bem.invert_dense(op)
        result.checks.append(CheckResult.upper_bound("lambda_lu_residual", inverse.lu_residual, LU_TOLERANCE))
    logger.info("wrote %s", path)
    return _check_table(result, "assemble")


def ps_compare(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    if not mesh.is_sphere:
        raise CapabilityError("ps-compare quantizes symbols spectrally and needs a sphere mesh")
    side = Side.EXTERIOR if config.label == OperatorLabel.PS_EXTERIOR else Side.INTERIOR
    order = max(config.mesh.order, 2 * max(config.l_values))
    if order != mesh.order:
        logger.info("wave packets at l=%d need order %d; refining the sphere", max(config.l_values), order)
        mesh = sphere_mesh(config.mesh.R, order + order % 2)
    z = config.spectral_parameter
    table = Table(name="ps_compare", header=["variant", "mass", "l", "error"])
    result = SuiteResult(tables=[table])
    op = bem.SpectralPoincareSteklov(mesh=mesh, mass=config.m, z=z, side=side)
    classical = [symbols.wavepacket_compare(op, l) for l in config.l_values]
    table.rows.extend(("classical", config.m, l, e) for l, e in zip(config.l_values, classical))
    fit = spectral.rate_fit(zip(config.l_values, classical))
    result.values["classical_slope"] = fit.slope
    result.checks.append(CheckResult.upper_bound("classical_symbol_slope", fit.slope, SYMBOL_SLOPE))
    for mass in config.semiclassical_masses:
        op = bem.SpectralPoincareSteklov(mesh=mesh, mass=mass, z=z, side=side)
        errors = [symbols.wavepacket_compare(op, l, semiclassical=True) for l in config.l_values]
        table.rows.extend(("semiclassical", mass, l, e) for l, e in zip(config.l_values, errors))
        slope = spectral.rate_fit(zip(config.l_values, errors)).slope
        result.values[f"semiclassical_slope_m{mass:g}"] = slope
        result.checks.append(CheckResult.upper_bound(f"semiclassical_trend_m{mass:g}", slope, 0.0,
                                                     "errors must not grow with the frequency"))
    return result


def _oracle_comparison(result: SuiteResult, roots, oracle, label: str):
    values = [r.value for r in roots]
    expected = [e.value for e in oracle]
    worst = 0.0
    for v in values:
        worst = max(worst, min((abs(v - e) for e in expected), default=np.inf))
    for e in expected:
        worst = max(worst, min((abs(v - e) for v in values), default=np.inf))
    result.checks.append(CheckResult.upper_bound(f"{label}_oracle_match", worst, ORACLE_MATCH,
                                                 f"{len(values)} roots, {len(expected)} oracle values"))
    result.checks.append(CheckResult.within(f"{label}_root_count", len(values), len(expected), 0.0))


def _scan_table(scan) -> Table:
    return Table(name="scan", header=["a", "sigma_min"], rows=list(zip(scan.grid, scan.sigma_min)))


def eig_mit(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    window = config.interval or DEFAULT_WINDOW
    scan = spectral.mit_scan(mesh, config.m, window, config.steps, config.threads)
    roots = spectral.scan_roots(scan)
    oracle = spectral.oracle_spectrum(config.mesh.R, config.m, None, (scan.grid[0], scan.grid[-1]))
    result = SuiteResult(tables=[_scan_table(scan), Table(name="eigen", header=["M", "lambda", "residual"],
                                                          rows=[(np.inf, r.value, r.residual) for r in roots])])
    _oracle_comparison(result, roots, oracle, "mit")
    return result


def eig_step(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    window = config.interval or DEFAULT_WINDOW
    M = config.M or DEFAULT_STEP_COUPLING
    scan = spectral.bs_scan(mesh, config.m, M, window, config.steps, config.threads)
    roots = spectral.scan_roots(scan)
    oracle = spectral.oracle_spectrum(config.mesh.R, config.m, M, (scan.grid[0], scan.grid[-1]))
    result = SuiteResult(tables=[_scan_table(scan), Table(name="eigen", header=["M", "lambda", "residual"],
                                                          rows=[(M, r.value, r.residual) for r in roots])])
    _oracle_comparison(result, roots, oracle, "birman_schwinger")
    for root in roots:
        result.values[f"multiplicity_{root.value:.6f}"] = float(root.multiplicity_hint)
    return result


def _interior_source(R: float) -> spectral.GaussianSource:
    return spectral.GaussianSource(center=np.array([0.1 * R, 0.05 * R, 0.0]), width=0.15 * R,
                                   spinor=np.array([1.0, 0.0, 0.5, 0.0], dtype=complex))


def rate_resolvent(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    couplings = config.couplings or DEFAULT_RESOLVENT_COUPLINGS
    z = config.spectral_parameter
    R = config.mesh.R
    grid = ball_grid(R, BALL_RADIAL_POINTS, config.mesh.order)
    source = _interior_source(R)
    table = Table(name="rate", header=["M", "residual"])
    decay = Table(name="decay", header=["M", "ps_exterior_h1", *TREND_NAMES])
    result = SuiteResult(tables=[table])
    channels = mesh.is_sphere and z.imag == 0.0 and abs(z.real) < config.m
    mit_ratio = None
    for M in couplings:
        blocks = spectral.krein_blocks(mesh, config.m, M, z, config.threads)
        applied = spectral.resolvent_apply(ResolventKind.FULL, mesh, grid, config.m, z, source, M=M,
                                           threads=config.threads, blocks=blocks)
        table.rows.append((M, grid.norm(applied.difference)))
        if mit_ratio is None:
            mit_ratio = grid.norm(applied.volume - applied.difference) / grid.norm(source(grid.points))
        if channels:
            resolvent, trace = spectral.shell_source_decay(R, config.m, M, z)
            extension = spectral.nystrom_extension(mesh, config.m, M, z, config.threads,
                                                   lambda_inverse=blocks.exterior_lambda_inverse)
            decay.rows.append((M, bem.sobolev_operator_norm(blocks.exterior, PS_SOURCE_ORDER),
                               resolvent, trace, extension, spectral.extension_decay(R, config.m, M, z)))
    fit = spectral.rate_fit(table.rows)
    result.values.update({"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "mit_ratio": mit_ratio})
    lo, hi = RATE_BAND
    result.checks.append(CheckResult.within("resolvent_rate_slope", fit.slope, (lo + hi) / 2, (hi - lo) / 2))
    if channels:
        result.tables.append(decay)
        for column, name in enumerate(decay.header[1:], start=1):
            slope = spectral.rate_fit((row[0], row[column]) for row in decay.rows).slope
            result.values[f"{name}_slope"] = slope
            result.checks.append(CheckResult.within(f"{name}_slope", slope, DECAY_SLOPES[name], DECAY_BAND))
    else:
        logger.info("decay trends need a sphere and a real spectral parameter in (-m, m); skipped")
    if abs(z.imag) == 0.0 and abs(z.real) < config.m:
        result.checks.append(CheckResult.upper_bound("mit_resolvent_bound", mit_ratio,
                                                     2.0 / config.m * MIT_BOUND_SLACK))
    return result


def rate_eig(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    couplings = config.couplings or DEFAULT_EIGEN_COUPLINGS
    R, m = config.mesh.R, config.m
    kappa = -1
    rows = spectral.expansion_slopes(R, m, couplings, kappa)
    mit = spectral.radial_oracle(R, m, None, kappa, count=1)[0]
    traces = [spectral.oracle_eigenfunction(R, m, mit, kappa, mu2).trace(mesh).project(+1) for mu2 in (-1, 1)]
    mkj = spectral.mkj_matrix(mesh, m, traces, mit)
    mu = float(mkj.mu[0].real)
    table = Table(name="eigen", header=["M", "lambda", "residual"],
                  rows=[(M, value, abs(slope - mu) / abs(mu)) for M, value, slope in rows])
    slopes = [slope for _, _, slope in rows]
    result = SuiteResult(tables=[table], values={"lambda_mit": mit, "mu": mu, "slope_last": slopes[-1]})
    spread = (max(slopes) - min(slopes)) / abs(np.mean(slopes))
    result.checks.append(CheckResult.upper_bound("expansion_stability", spread, STABILITY_BAND))
    result.checks.append(CheckResult.upper_bound("expansion_vs_mkj", abs(slopes[-1] - mu) / abs(mu), STABILITY_BAND))
    result.checks.append(CheckResult.upper_bound("mkj_real", float(np.max(np.abs(mkj.mu.imag))) / abs(mu),
                                                 MU_REAL_TOLERANCE))
    result.checks.append(CheckResult.upper_bound("mkj_degeneracy", float(np.ptp(mkj.mu.real)),
                                                 MU_DEGENERACY_TOLERANCE))
    return result


def parametrix(config: RunConfig, mesh: SurfaceMesh) -> SuiteResult:
    rng = np.random.default_rng(config.seed)
    h = 1.0 / config.m
    z = config.spectral_parameter
    result = SuiteResult()
    curved = Chart.polynomial([[0.0, 0.1, 0.05], [0.2, -0.1, 0.0], [0.15, 0.0, 0.0]])
    for j, tolerance in enumerate(TRANSPORT_TOLERANCE):
        term = symbols.parametrix_term(j, curved, h, z)
        transport, boundary = 0.0, 0.0
        for y, xi in zip(rng.uniform(-0.5, 0.5, (PARAMETRIX_SAMPLES, 2)), rng.normal(0, 3, (PARAMETRIX_SAMPLES, 2))):
            tau = rng.uniform(0.0, 2.0 * h)
            transport = max(transport, symbols.transport_residual(term, y, xi, tau))
            boundary = max(boundary, symbols.boundary_residual(term, y, xi))
        result.checks.append(CheckResult.upper_bound(f"transport_a{j}", transport, tolerance))
        result.checks.append(CheckResult.upper_bound(f"boundary_a{j}", boundary, tolerance))
    result.checks.append(CheckResult.upper_bound("b10_flat_chart", flat_b10_residual(h, z, rng), FLAT_B10_TOLERANCE))
    result.checks.append(CheckResult.upper_bound("halfspace_symbol", halfspace_residual(config.m, rng),
                                                 HALFSPACE_TOLERANCE))
    frequencies = rng.normal(0, 10, (PARAMETRIX_SAMPLES, 2))
    constant = symbols.ellipticity_constant(curved, rng.uniform(-0.5, 0.5, (5, 2)), frequencies)
    result.values["ellipticity_constant"] = constant
    result.checks.append(CheckResult.within("ellipticity_positive", float(constant > 0), 1.0, 0.0))
    return _check_table(result, "parametrix")


def flat_b10_residual(h: float, z: complex, rng: np.random.Generator) -> float:
    """Flat chart: Pi_+ B_{1,0} against -h Pi_+ (i alpha.n)(z / 2 lambda) Pi_- A_0(tau = 0)."""
    flat = Chart.flat()
    worst = 0.0
    for xi in rng.normal(0, 3, (PARAMETRIX_SAMPLES, 2)):
        e = symbols.l0_eigendecomp(flat, np.zeros(2), xi, z)
        B = symbols.term_coefficients(1, flat, h, z, np.zeros(2), xi)[0]
        A0 = e.Pi_minus @ e.P_minus / e.k_plus
        target = -h * e.Pi_plus @ (1j * alpha_dot(e.normal)) @ (z / (2.0 * e.lam) * e.Pi_minus @ A0)
        worst = max(worst, float(np.max(np.abs(e.Pi_plus @ B - target))))
    return worst


def halfspace_residual(m: float, rng: np.random.Generator) -> float:
    """Half-space multiplier at z = 0 against the semiclassical symbol at n = -e3."""
    xi = rng.normal(0, 5 * m, (HALFSPACE_SAMPLES, 2))
    multiplier = symbols.halfspace_multiplier(xi, m, 0.0)
    symbol = symbols.ps_semiclassical_symbol(np.array([0.0, 0.0, -1.0]), -xi / m)
    return float(np.max(np.abs(multiplier - symbol)))


SUITES: Dict[Command, Callable[[RunConfig, SurfaceMesh], SuiteResult]] = {
    Command.CHECK_IDENTITIES: check_identities,
    Command.ASSEMBLE: assemble,
    Command.PS_COMPARE: ps_compare,
    Command.EIG_MIT: eig_mit,
    Command.EIG_STEP: eig_step,
    Command.RATE_RESOLVENT: rate_resolvent,
    Command.RATE_EIG: rate_eig,
    Command.PARAMETRIX: parametrix,
}
