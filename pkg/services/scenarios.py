"""
Scenario Service.
Reproduces the reference experiments (S-matrix conditioning, symmetry of the
aggregation model, velocity profiles, bi-stability, the v_min bifurcation
sweep and the Upsilon speed scan) and writes their result tables.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from config.settings import config
from data import presets
from models.simulation import Diagnostics, SimConfig
from models.velocity_grid import VelocityGrid
from services.export_service import ExportService
from services.quadrature import gauss_legendre
from services.scattering import case_smatrix, fd_smatrix, smatrix_diagnostics
from services.simulator import Simulator, velocity_profile_metrics
from services.travelling_wave import find_wave_speeds
from utils.error_handler import ChemowaveError, InvalidInputError, handle_errors
from utils.logger import get_logger

logger = get_logger(__name__)

RATE_PATTERNS = ('unit', 'uniform_low', 'mixed')


@dataclass
class ScenarioResult:
    """Summary table of one scenario and the files it produced."""

    name: str
    table: pd.DataFrame
    files: List[Path] = field(default_factory=list)
    aborted: int = 0

    @property
    def ok(self) -> bool:
        return self.aborted == 0


@handle_errors(fallback_value=None)
def _run_isolated(sim_config: SimConfig) -> Optional[Diagnostics]:
    """One run; configuration errors yield None instead of stopping a sweep."""
    return Simulator(sim_config).run()


def conditioning_rates(grid: VelocityGrid, pattern: str, chi_m: float, chi_n: float) -> np.ndarray:
    """
    Rate pattern used in the conditioning study.

    ``unit``: T = 1. ``uniform_low``: T = 1 - chi_M - chi_N for every velocity.
    ``mixed``: both material derivatives change sign inside the velocity range,
    giving all four rate values.
    """
    v = grid.nodes
    if pattern == 'unit':
        return np.ones_like(v)
    if pattern == 'uniform_low':
        return np.full_like(v, 1.0 - chi_m - chi_n)
    if pattern == 'mixed':
        cuts = presets.CONDITIONING_CUTS
        return 1.0 - chi_m * np.sign(v - cuts['chi_m']) - chi_n * np.sign(v - cuts['chi_n'])
    raise InvalidInputError(f"Unknown rate pattern: {pattern}", field='pattern')


class ScenarioRunner:
    """Runs preset experiments and exports their results."""

    def __init__(
        self,
        output_dir: Optional[str] = None,
        threads: Optional[int] = None,
        overrides: Optional[Dict[str, float]] = None,
        progress: bool = True
    ):
        """
        Initialize the runner.

        Args:
            output_dir: Result directory
            threads: Worker processes for independent runs
            overrides: Optional ``dx``, ``dt`` and ``t_end`` applied to every run
            progress: Show progress bars
        """
        self.exporter = ExportService(output_dir)
        self.threads = max(1, threads or config.threads)
        self.overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        self.progress = progress
        logger.info(f"Scenario runner initialized ({self.threads} worker(s), overrides: {self.overrides})")

    # ------------------------------------------------------------------
    # Plumbing
    # ------------------------------------------------------------------

    def apply_overrides(self, sim_config: SimConfig) -> SimConfig:
        """Apply command-line overrides; a new dx keeps the left edge and the cell count rounding."""
        changes: Dict[str, Any] = {}
        if 'dx' in self.overrides:
            dx = self.overrides['dx']
            num_cells = max(3, int(round((sim_config.x_right - sim_config.x_left) / dx)))
            x_right = sim_config.x_left + num_cells * dx
            if abs(x_right - sim_config.x_right) > 1e-9:
                logger.warning(f"{sim_config.label}: right edge moved to {x_right:.6g} to fit dx = {dx}")
            changes.update(dx=dx, x_right=x_right)
        if 'dt' in self.overrides:
            changes['dt'] = self.overrides['dt']
        if 't_end' in self.overrides:
            changes['t_end'] = self.overrides['t_end']
            changes['snapshot_times'] = [min(t, self.overrides['t_end']) for t in sim_config.snapshot_times]
        return replace(sim_config, **changes) if changes else sim_config

    def execute(self, configs: Sequence[SimConfig], desc: str) -> List[Optional[Diagnostics]]:
        """Run independent simulations, in worker processes when threads > 1."""
        configs = [self.apply_overrides(c) for c in configs]
        if self.threads > 1 and len(configs) > 1:
            with ProcessPoolExecutor(max_workers=self.threads) as executor:
                results = list(tqdm(
                    executor.map(_run_isolated, configs),
                    total=len(configs), desc=desc, disable=not self.progress
                ))
        else:
            results = [_run_isolated(c) for c in tqdm(configs, desc=desc, disable=not self.progress)]

        for sim_config, diagnostics in zip(configs, results):
            if diagnostics is not None:
                self.exporter.export_run(diagnostics, sim_config)
        return results

    @staticmethod
    def _failed(diagnostics: Optional[Diagnostics]) -> bool:
        return diagnostics is None or diagnostics.aborted

    def _finish(self, name: str, rows: List[Dict[str, Any]], results: Sequence[Optional[Diagnostics]],
                metadata: Dict[str, Any]) -> ScenarioResult:
        table = pd.DataFrame.from_records(rows)
        path = self.exporter.write_csv(table, f"{name}.csv", metadata)
        aborted = sum(self._failed(d) for d in results)
        if aborted:
            logger.warning(f"{name}: {aborted} run(s) aborted")
        return ScenarioResult(name=name, table=table, files=[path], aborted=aborted)

    # ------------------------------------------------------------------
    # Experiments
    # ------------------------------------------------------------------

    def conditioning(
        self,
        half_counts: Optional[Sequence[int]] = None,
        dxs: Optional[Sequence[float]] = None,
        patterns: Sequence[str] = RATE_PATTERNS
    ) -> ScenarioResult:
        """
        Condition numbers of Case and FD S-matrices over K and dx.

        FD matrices are built without the non-resonance guard; the
        ``resonance_ok`` column records whether the guard holds.
        """
        half_counts = list(half_counts or presets.CONDITIONING_HALF_COUNTS)
        dxs = list(dxs or presets.CONDITIONING_DX)
        params = presets.wave_params()
        rows = []

        for k in tqdm(half_counts, desc="Conditioning", disable=not self.progress):
            grid = gauss_legendre(k)
            for pattern in patterns:
                rates = conditioning_rates(grid, pattern, params.chi_m, params.chi_n)
                for dx in dxs:
                    for variant in ('case', 'fd'):
                        row = {
                            'pattern': pattern, 'K': k, 'dx': dx, 'variant': variant,
                            'condition': float('nan'), 'defect': float('nan'),
                            'min_entry': float('nan'),
                            'resonance_ok': grid.min_speed > dx * params.chi_total,
                            'failed': False, 'error': '',
                        }
                        try:
                            if variant == 'case':
                                smatrix = case_smatrix(rates, grid, dx)
                            else:
                                smatrix = fd_smatrix(rates, grid, dx, check_resonance=False)
                            report = smatrix_diagnostics(smatrix, grid)
                            row.update(
                                condition=report.condition_number,
                                defect=report.stochastic_defect,
                                min_entry=report.min_entry,
                            )
                        except ChemowaveError as e:
                            logger.warning(f"Conditioning K={k} dx={dx} {variant} {pattern}: {e.message}")
                            row.update(failed=True, error=e.message)
                        rows.append(row)

        metadata = {'scenario': 'conditioning', 'params': params.to_dict(), 'cuts': presets.CONDITIONING_CUTS}
        return self._finish('conditioning', rows, [], metadata)

    def symmetry(self) -> ScenarioResult:
        """Steady-state symmetry error of WB-WB and TS-TS, frozen and dynamic signal."""
        cases = [(scheme, frozen) for scheme in ('wb', 'ts') for frozen in (True, False)]
        configs = [presets.symmetry_config(s, s, frozen) for s, frozen in cases]
        results = self.execute(configs, "Symmetry")

        rows = []
        for (scheme, frozen), diagnostics in zip(cases, results):
            row = {'scheme': f"{scheme}-{scheme}".upper(), 'signal': 'frozen' if frozen else 'dynamic'}
            if diagnostics is None or not diagnostics.records:
                row.update(aborted=True)
            else:
                final = diagnostics.final
                row.update(
                    sym_err=final['sym_err'],
                    steady=diagnostics.steady,
                    final_time=final['time'],
                    mass_drift=diagnostics.mass_drift,
                    aborted=diagnostics.aborted,
                )
                if not diagnostics.steady:
                    logger.warning(f"{diagnostics.label}: no steady state by t = {final['time']:.1f}")
            rows.append(row)

        return self._finish('symmetry', rows, results, {'scenario': 'symmetry'})

    def wavespeed(self) -> ScenarioResult:
        """Velocity profiles at t = 100 for WB-WB, WB-TS, TS-TS with MD-1 and MD-2."""
        cases = [(k, p, md) for k, p in (('wb', 'wb'), ('wb', 'ts'), ('ts', 'ts')) for md in ('md1', 'md2')]
        configs = [presets.wavespeed_config(k, p, md) for k, p, md in cases]
        results = self.execute(configs, "Wave speed")

        rows = []
        for (kinetic, parabolic, md), sim_config, diagnostics in zip(cases, configs, results):
            row = {'scheme': f"{kinetic}-{parabolic}".upper(), 'md': md.upper()}
            if self._failed(diagnostics) or not diagnostics.snapshots:
                row.update(aborted=True)
                rows.append(row)
                continue
            last = diagnostics.snapshots[-1]
            window = diagnostics.speed_over_window(0.5 * last.time)
            row.update(
                time=last.time,
                c_est=diagnostics.final['speed'],
                peak_speed=window['peak_speed'],
                aborted=False,
                **velocity_profile_metrics(last.rho, last.u),
            )
            rows.append(row)

        return self._finish('wavespeed', rows, results, {'scenario': 'wavespeed'})

    def bistability(
        self,
        seeds: Optional[Sequence[float]] = None,
        dx: float = presets.FINE_DX,
        t_end: float = 60.0
    ) -> ScenarioResult:
        """Long runs seeded with stationary waves; speed over the final quarter."""
        seeds = list(seeds or presets.BISTABILITY_SEEDS)
        configs = [presets.wave_seed_config(c0, dx=dx, t_end=t_end) for c0 in seeds]
        results = self.execute(configs, "Bi-stability")
        rows = [self._speed_row({'c0': c0, 'dx': dx}, d) for c0, d in zip(seeds, results)]
        return self._finish('bistability', rows, results, {'scenario': 'bistability', 'dx': dx, 't_end': t_end})

    def mesh_sensitivity(self, c0: float = presets.FAST_WAVE, t_end: float = 30.0) -> ScenarioResult:
        """The fast wave on the coarse and the fine mesh."""
        dxs = [presets.COARSE_DX, presets.FINE_DX]
        configs = [presets.wave_seed_config(c0, dx=dx, t_end=t_end) for dx in dxs]
        results = self.execute(configs, "Mesh sensitivity")
        rows = [self._speed_row({'c0': c0, 'dx': dx}, d) for dx, d in zip(dxs, results)]
        return self._finish('mesh_sensitivity', rows, results, {'scenario': 'mesh_sensitivity', 't_end': t_end})

    @staticmethod
    def _speed_row(row: Dict[str, Any], diagnostics: Optional[Diagnostics]) -> Dict[str, Any]:
        if diagnostics is None or len(diagnostics.records) < 2:
            row.update(aborted=True)
            return row
        t_stop = diagnostics.final['time']
        window = diagnostics.speed_over_window(0.75 * t_stop, t_stop)
        row.update(
            final_time=t_stop,
            mean_speed=window['mean_speed'],
            peak_speed=window['peak_speed'],
            aborted=diagnostics.aborted,
        )
        return row

    def bifurcation(
        self,
        vmins: Optional[Sequence[float]] = None,
        dynamic: bool = True,
        dx: float = presets.FINE_DX,
        t_end: float = 40.0
    ) -> ScenarioResult:
        """
        Wave speeds against v_min: Upsilon roots (analytic branch) and the
        long-time speed of runs seeded at each root (dynamic branch).
        """
        vmins = list(vmins or presets.BIFURCATION_VMIN)
        params = presets.wave_params()
        rows: List[Dict[str, Any]] = []
        seeds: List[tuple] = []

        for v_min in tqdm(vmins, desc="Speed scans", disable=not self.progress):
            try:
                scan = find_wave_speeds(presets.two_speed_grid(v_min), params)
            except ChemowaveError as e:
                logger.warning(f"Speed scan failed at v_min = {v_min}: {e.message}")
                rows.append({'v_min': v_min, 'branch': 'analytic', 'seed': math.nan, 'speed': math.nan,
                             'note': f"scan failed: {e.message}"})
                continue
            if not scan.roots:
                rows.append({'v_min': v_min, 'branch': 'analytic', 'seed': math.nan, 'speed': math.nan,
                             'note': 'no root'})
            for root in scan.roots:
                rows.append({'v_min': v_min, 'branch': 'analytic', 'seed': math.nan, 'speed': root, 'note': ''})
                seeds.append((v_min, root))

        results: List[Optional[Diagnostics]] = []
        if dynamic and seeds:
            configs = [
                presets.wave_seed_config(root, dx=dx, t_end=t_end, v_min=v_min,
                                         label=f"bifurcation_vmin{v_min:g}_c{root:.4f}")
                for v_min, root in seeds
            ]
            results = self.execute(configs, "Bifurcation runs")
            for (v_min, root), diagnostics in zip(seeds, results):
                row = self._speed_row({'v_min': v_min, 'branch': 'dynamic', 'seed': root}, diagnostics)
                row['speed'] = row.get('mean_speed', math.nan)
                row['note'] = 'aborted' if row.get('aborted') else ''
                rows.append(row)

        metadata = {'scenario': 'bifurcation', 'params': params.to_dict(), 'dx': dx, 't_end': t_end}
        return self._finish('bifurcation', rows, results, metadata)

    def speeds(self, v_min: float = 0.5, scan_points: Optional[int] = None) -> ScenarioResult:
        """Upsilon(c) table with the roots and jumps found on it."""
        params = presets.wave_params()
        scan = find_wave_speeds(presets.two_speed_grid(v_min), params, scan_points=scan_points,
                                progress=self.progress)
        table = pd.DataFrame({'c': scan.speeds, 'upsilon': scan.upsilon, 'failed': np.isnan(scan.upsilon)})
        metadata = {'scenario': 'speeds', 'v_min': v_min, 'params': params.to_dict(), 'scan': scan.to_dict()}
        scan_path = self.exporter.write_csv(table, 'speeds_scan.csv', metadata)

        found = [{'kind': 'root', 'c': c} for c in scan.roots] + [{'kind': 'jump', 'c': c} for c in scan.jumps]
        roots_path = self.exporter.export_table(found, 'speeds_roots.csv', metadata)
        return ScenarioResult(name='speeds', table=pd.DataFrame.from_records(found), files=[scan_path, roots_path])

    def custom(self, sim_config: SimConfig) -> ScenarioResult:
        """One run from a run file."""
        results = self.execute([sim_config], "Run")
        rows = [self._speed_row({'label': sim_config.label}, results[0])]
        return self._finish(f"{sim_config.label}_summary", rows, results, {'scenario': 'custom'})
