"""CLI entry point for the elastic Born toolbox."""
import argparse
import asyncio
import json
import logging
import os
from pathlib import Path
import re
import sys
import time
from typing import Any

import numpy as np
from pydantic import ValidationError

from elastoborn.calculus import E1, E2, Grid, norm
from elastoborn.channels import Mode
from elastoborn.errors import ConfigError, ElastobornError
from elastoborn.identities import (
    elimination_replay,
    family_ablation,
    fourier_consistency,
    isotropic_lambda_vector,
    kernel_certificate,
    kernel_vector_residual,
    sphere_samples,
)
from elastoborn.inverse import (
    DataFunctional,
    forward_isotropic,
    isotropic_certificate,
    reconstruct,
    sampled_stability_ratio,
)
from elastoborn.models import RandomPerturbation, ReconstructionReportModel, RunConfig, RunReport, Status
from elastoborn.orchestrator import CHANNEL_MAP, ExpansionOrchestrator, gather_in_threads
from elastoborn.settings import THREADS_ENV
from elastoborn.tensors import Perturbation
from elastoborn.utils import (
    generate_perturbation,
    random_anisotropic,
    random_isotropic,
    read_field,
    read_perturbation,
    read_vector_field,
    write_field,
    write_kernel_csv,
    write_perturbation,
    write_report,
    write_summary,
    write_vector_field,
)

logger = logging.getLogger(__name__)

COMMANDS = ('forward', 'reconstruct', 'roundtrip', 'kernel-test', 'verify-identities', 'stability')
EFFECTIVE_CONFIG_FILE = 'effective_config.json'
EXIT_CODES = {Status.PASS: 0, Status.FAIL: 2, Status.ERROR: 1}
# sp and ps leading coefficients of an isotropic perturbation are exact zeros
ISOTROPIC_LEADING_TOLERANCE = 1e-12
SYMBOL_SAMPLES = 100
# dropping a row family that uniqueness needs should leave sigma_min at round-off
NEGATIVE_CONTROL_BOUND = 1e-10


def _key_line(text: str, loc: tuple) -> int | None:
    """Line of the first occurrence of the innermost named key of an error location."""
    for part in reversed(loc):
        if isinstance(part, str):
            match = re.search(rf'"{re.escape(part)}"\s*:', text)
            if match:
                return text.count('\n', 0, match.start()) + 1
    return None


def _describe(error: ValidationError, source: str = 'config', text: str | None = None) -> str:
    """One line naming the dotted location of the first validation error."""
    first = error.errors()[0]
    loc = tuple(first['loc'])
    dotted = '.'.join(str(part) for part in loc) or '<root>'
    line = _key_line(text, loc) if text is not None else None
    where = f'{source}:{line}' if line is not None else source
    extra = f' (+{error.error_count() - 1} more)' if error.error_count() > 1 else ''
    return f'{where}: {dotted}: {first["msg"]}{extra}'


def load_config(path: str | Path | None) -> RunConfig:
    """Parse a JSON config file; without a path every default applies."""
    if path is None:
        return RunConfig()
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f'{path}:{e.lineno}:{e.colno}: {e.msg}') from e
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_describe(e, str(path), text)) from e


def apply_overrides(config: RunConfig, command: str, args: argparse.Namespace) -> RunConfig:
    """Fold command-line flags into the config and validate the result."""
    data = config.model_dump(by_alias=True)
    if getattr(args, 'out', None):
        data['output_dir'] = args.out
    if getattr(args, 'n', None):
        data['grid']['N'] = args.n
    if getattr(args, 'channel', None):
        data['channels'] = args.channel
    if getattr(args, 'samples', None) is not None:
        data['stability' if command == 'stability' else 'kernel']['samples'] = args.samples
    if getattr(args, 'seed', None) is not None:
        data['kernel']['seed'] = args.seed
        data['stability']['seed'] = args.seed
        if data['perturbation']['kind'] == 'random':
            data['perturbation']['seed'] = args.seed
    if getattr(args, 'tolerance', None) is not None:
        if command == 'kernel-test':
            data['kernel']['tolerance'] = args.tolerance
        elif command in ('reconstruct', 'roundtrip'):
            data['reconstruction']['elliptic_tolerance'] = args.tolerance
        else:
            data['identities']['tolerance'] = args.tolerance
    if getattr(args, 'iso', False) and data['perturbation']['kind'] == 'random':
        data['perturbation']['isotropic'] = True
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_describe(e, 'command line')) from e


def write_effective_config(config: RunConfig, output_dir: str | Path) -> Path:
    output_path = Path(output_dir)
    output_path.mkdir(parents=True, exist_ok=True)
    effective_file = output_path / EFFECTIVE_CONFIG_FILE
    with open(effective_file, 'w') as f:
        f.write(config.model_dump_json(indent=2, by_alias=True))
    return effective_file


def _status(passed: bool) -> Status:
    return Status.PASS if passed else Status.FAIL


def forward_command(config: RunConfig, output_dir: Path, iso: bool = False) -> RunReport:
    """Expand the configured channels and write coefficient fields."""
    P, metadata = generate_perturbation(config.perturbation, config.grid)
    write_perturbation(P, output_dir / 'perturbation', metadata)

    channels = list(config.channels)
    print(f"Running {len(channels)} channels in parallel...")
    orchestrator = ExpansionOrchestrator(P, config.background, config.theta, config.alpha, config.identities.tolerance)
    results = asyncio.run(orchestrator.run_all_channels(channels))
    orchestrator.save_results(results, output_dir)

    details: dict[str, Any] = {'perturbation': metadata, 'channels': orchestrator.summarize(results)}
    if iso:
        if P.isotropic is None:
            raise ConfigError('--iso needs an isotropic perturbation')
        (lam, mu), rho = P.isotropic, P.rho
        dp, ds = forward_isotropic(lam, mu, rho, config.background, config.reconstruction.mask_margin)
        write_field(dp.field, output_dir / 'dp.f64')
        write_vector_field(ds.field, output_dir / 'ds')
        details['data_functionals'] = {'dp': norm(dp.field, region=dp.mask), 'ds': norm(ds.field, region=ds.mask)}

    passed = orchestrator.passed(results)
    worst = max((v for r in results.values() if r is not None for v in r.residuals.values()), default=0.0)
    return RunReport(
        command='forward',
        status=_status(passed),
        message=f'{len(channels)} channels, worst residual {worst:.2e}',
        details=details,
    )


def reconstruct_command(config: RunConfig, output_dir: Path) -> RunReport:
    """Recover (lambda, mu, rho) from dp.f64 and ds_x*.f64 in data_dir."""
    if config.data_dir is None:
        raise ConfigError('reconstruct needs data_dir')
    data_dir = Path(config.data_dir)
    dp_field = read_field(data_dir / 'dp.f64')
    ds_field = read_vector_field(data_dir / 'ds', dp_field.grid)
    mask = dp_field.grid.interior_mask(config.reconstruction.mask_margin)
    dp = DataFunctional(Mode.P, E1, None, dp_field, mask)
    ds = DataFunctional(Mode.S, E1, E2, ds_field, mask)

    truth = None
    truth_dir = data_dir / 'perturbation'
    if truth_dir.exists():
        P = read_perturbation(truth_dir)
        if P.isotropic is not None:
            truth = (P.isotropic[0], P.isotropic[1], P.rho)

    result = reconstruct(dp, ds, config.background, config.reconstruction, truth)
    for name, f in (('lambda', result.lam), ('mu', result.mu), ('rho', result.rho)):
        write_field(f, output_dir / f'{name}.f64')

    report = result.report
    worst = max(report.stage_residuals.values())
    return RunReport(
        command='reconstruct',
        status=_status(report.passed),
        message=f'worst stage residual {worst:.2e}',
        details=report.model_dump(mode='json'),
    )


def _roundtrip_seed(config: RunConfig, grid: Grid, seed: int) -> ReconstructionReportModel:
    bumps = config.perturbation.bumps if isinstance(config.perturbation, RandomPerturbation) else 2
    lam, mu, rho = random_isotropic(grid, seed, bumps)
    dp, ds = forward_isotropic(lam, mu, rho, config.background, config.reconstruction.mask_margin)
    return reconstruct(dp, ds, config.background, config.reconstruction, truth=(lam, mu, rho)).report


def convergence_check(coarse: dict[str, float], fine: dict[str, float], factor: float) -> tuple[dict[str, float], bool]:
    """Coarse over fine error per parameter; converged when every ratio reaches `factor`."""
    ratios = {name: coarse[name] / fine[name] if fine[name] > 0.0 else float('inf') for name in fine}
    return ratios, all(ratio >= factor for ratio in ratios.values())


def roundtrip_command(config: RunConfig, output_dir: Path) -> RunReport:
    """Forward then reconstruct random isotropic triples, one per seed."""
    options = config.roundtrip
    print(f"Running {len(options.seeds)} round trips in parallel...")
    reports = asyncio.run(gather_in_threads(lambda seed: _roundtrip_seed(config, config.grid, seed), options.seeds))
    per_seed = {str(seed): report.model_dump(mode='json') for seed, report in zip(options.seeds, reports)}
    tolerances = {'mu': options.mu_tolerance, 'rho': options.rho_tolerance, 'lambda': options.lambda_tolerance}
    worst = {name: max(r.errors[name] for r in reports) for name in tolerances}
    details: dict[str, Any] = {'seeds': per_seed, 'max_errors': worst, 'tolerances': tolerances}

    passed = all(worst[name] <= tolerances[name] for name in tolerances)
    if options.coarse_N is not None and options.coarse_N >= config.grid.N:
        logger.warning('coarse_N %d is not below N %d; convergence is not checked', options.coarse_N, config.grid.N)
    elif options.coarse_N is not None:
        coarse = Grid(N=options.coarse_N, L=config.grid.L)
        coarse_reports = asyncio.run(gather_in_threads(lambda seed: _roundtrip_seed(config, coarse, seed), options.seeds))
        coarse_worst = {name: max(r.errors[name] for r in coarse_reports) for name in tolerances}
        ratios, converged = convergence_check(coarse_worst, worst, options.convergence_factor)
        details['convergence'] = ratios
        details['coarse_max_errors'] = coarse_worst
        details['convergence_factor'] = options.convergence_factor
        passed = passed and converged
    return RunReport(
        command='roundtrip',
        status=_status(passed),
        message=', '.join(f'{name} {worst[name]:.2e}' for name in tolerances),
        details=details,
    )


def kernel_test_command(config: RunConfig, output_dir: Path) -> RunReport:
    """Kernel certificate, family ablation and the elimination replay."""
    options = config.kernel
    samples = sphere_samples(options.samples, options.seed)
    certificate = kernel_certificate(samples, config.background, options.tolerance, options.drop_families)
    ablation = family_ablation(samples, config.background)
    replays = [
        elimination_replay(sample, config.background, options.replay_tolerance, options.drop_families)
        for sample in samples[:options.replay_samples]
    ]
    lam_vector = isotropic_lambda_vector()
    control = max(kernel_vector_residual(s, config.background, lam_vector, ('pp',)) for s in samples[:SYMBOL_SAMPLES])
    write_kernel_csv(certificate, replays, output_dir / 'kernel_certificate.csv')

    ss_control = {'sigma_min': ablation['ss'], 'bound': NEGATIVE_CONTROL_BOUND, 'reached': ablation['ss'] <= NEGATIVE_CONTROL_BOUND}
    deviations = []
    if not ss_control['reached']:
        logger.warning('Dropping the ss rows leaves sigma_min %.3e above %.0e', ablation['ss'], NEGATIVE_CONTROL_BOUND)
        deviations.append(f'ss drop keeps sigma_min {ablation["ss"]:.3e} > {NEGATIVE_CONTROL_BOUND:.0e}')

    passed = (
        certificate.passed
        and control <= NEGATIVE_CONTROL_BOUND
        and all(r.passed for r in replays)
    )
    return RunReport(
        command='kernel-test',
        status=_status(passed),
        message=f'{len(certificate.samples)} samples, min sigma {certificate.min_sigma:.3e}',
        details={
            'certificate': certificate.model_dump(mode='json'),
            'ablation': ablation,
            'pp_drop_kernel_residual': control,
            'ss_drop_control': ss_control,
            'deviations': deviations,
            'replay': [r.model_dump(mode='json') for r in replays],
        },
    )


def verify_identities_command(config: RunConfig, output_dir: Path) -> RunReport:
    """Channel residual suite over seeded anisotropic perturbations plus a Fourier check of the inventory."""
    options = config.identities
    bumps = config.perturbation.bumps if isinstance(config.perturbation, RandomPerturbation) else 2
    channels = list(config.channels)
    per_seed: dict[str, Any] = {}
    worst = 0.0
    leading = 0.0
    passed = True
    first: Perturbation | None = None

    for seed in options.seeds:
        P = random_anisotropic(config.grid, seed, bumps)
        if first is None:
            first = P
        print(f"Running {len(channels)} channels in parallel for seed {seed}...")
        orchestrator = ExpansionOrchestrator(P, config.background, config.theta, config.alpha, options.tolerance)
        results = asyncio.run(orchestrator.run_all_channels(channels))
        passed = passed and orchestrator.passed(results)
        per_seed[str(seed)] = orchestrator.summarize(results)
        worst = max([worst, *(v for r in results.values() if r is not None for v in r.residuals.values())])

        lam, mu, rho = random_isotropic(config.grid, seed, bumps)
        iso = ExpansionOrchestrator(Perturbation.from_isotropic(lam, mu, rho), config.background, config.theta, config.alpha)
        iso_results = asyncio.run(iso.run_all_channels([name for name in ('sp', 'ps') if name in channels]))
        scale = max(norm(lam), norm(mu), norm(rho))
        for result in iso_results.values():
            if result is not None:
                leading = max(leading, norm(result.coefficient('w1')) / scale)

    fourier = fourier_consistency(first, config.background) if first is not None else 0.0
    passed = passed and leading <= ISOTROPIC_LEADING_TOLERANCE and fourier <= options.fourier_tolerance
    return RunReport(
        command='verify-identities',
        status=_status(passed),
        message=f'worst residual {worst:.2e}, fourier {fourier:.2e}',
        details={
            'seeds': per_seed,
            'max_residual': worst,
            'isotropic_leading': leading,
            'fourier_consistency': fourier,
        },
    )


def stability_command(config: RunConfig, output_dir: Path) -> RunReport:
    """Empirical Lipschitz ratios over random isotropic triples and the isotropic symbol certificate."""
    options = config.stability
    bg = config.background
    print(f"Running {options.samples} stability samples in parallel...")
    report = sampled_stability_ratio(
        options.samples,
        options.seed,
        bg,
        config.grid,
        margin=config.reconstruction.mask_margin,
        scale=options.scale,
        floor=options.floor,
        map_ratios=lambda fn, triples: asyncio.run(gather_in_threads(fn, triples)),
    )

    points = [s.array for s in sphere_samples(SYMBOL_SAMPLES, options.seed)]
    sigma = float(np.min(isotropic_certificate(points, bg)))
    passed = report.passed and sigma > 0.0
    return RunReport(
        command='stability',
        status=_status(passed),
        message=f'max ratio {report.max_ratio:.3e}, symbol sigma {sigma:.3e}',
        details={**report.model_dump(mode='json'), 'symbol_sigma_min': sigma},
    )


def run(config: RunConfig, command: str, iso: bool = False) -> RunReport:
    """Dispatch one command, then write report.json, the effective config and SUMMARY.md."""
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    if config.threads is not None:
        os.environ[THREADS_ENV] = str(config.threads)
    write_effective_config(config, output_dir)

    start = time.perf_counter()
    try:
        if command == 'forward':
            report = forward_command(config, output_dir, iso)
        elif command == 'reconstruct':
            report = reconstruct_command(config, output_dir)
        elif command == 'roundtrip':
            report = roundtrip_command(config, output_dir)
        elif command == 'kernel-test':
            report = kernel_test_command(config, output_dir)
        elif command == 'verify-identities':
            report = verify_identities_command(config, output_dir)
        elif command == 'stability':
            report = stability_command(config, output_dir)
        else:
            raise ConfigError(f'unknown command {command!r}')
    except (ElastobornError, OSError, ValueError) as e:
        logger.exception('Command %s failed', command)
        report = RunReport(command=command, status=Status.ERROR, message=str(e).splitlines()[0])

    report.elapsed_seconds = time.perf_counter() - start
    write_report(report, output_dir)
    write_summary(output_dir)
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Elastic Born inverse-scattering numerics')
    subparsers = parser.add_subparsers(dest='command', help='Command to run')

    helps = {
        'forward': 'Expand scattering channels for a perturbation',
        'reconstruct': 'Recover (lambda, mu, rho) from isotropic data functionals',
        'roundtrip': 'Forward then reconstruct random isotropic triples',
        'kernel-test': 'Kernel certificate and elimination replay on sampled frequencies',
        'verify-identities': 'Channel residuals and Fourier consistency of the identity rows',
        'stability': 'Empirical stability ratios over random isotropic triples',
    }
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=helps[command])
        sub.add_argument('--config', help='JSON run configuration')
        sub.add_argument('--out', help='Output directory for results')
        sub.add_argument('--samples', type=int, help='Number of frequency or stability samples')
        sub.add_argument('--seed', type=int, help='Seed for sampling and random perturbations')
        sub.add_argument('--tolerance', type=float, help='Pass/fail tolerance for the command')
        sub.add_argument('--n', type=int, help='Grid nodes per axis')
        sub.add_argument('--channel', nargs='+', choices=list(CHANNEL_MAP), help='Specific channels to run')
        sub.add_argument('--iso', action='store_true', help='Use an isotropic perturbation and write dp/ds')
        sub.add_argument('--verbose', action='store_true', help='Debug logging')

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command not in COMMANDS:
        parser.print_help()
        return 1

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    try:
        config = apply_overrides(load_config(args.config), args.command, args)
        report = run(config, args.command, iso=args.iso)
    except (ElastobornError, ValidationError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1

    print(f"{args.command}: {report.status} ({report.message})")
    return EXIT_CODES[report.status]


if __name__ == '__main__':
    sys.exit(main())
